//! Generates a recording, stores it as EEGB, reads it back and summarizes it.
//!
//! cargo run --example dataset_io -- [path]

use sgfb::io::{generate_synthetic, load_dataset, save_dataset, SynthConfig};

fn main() -> sgfb::Result<()> {
    let path = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("synth-7.eegb"), Into::into);
    let d = generate_synthetic(&SynthConfig::default())?;
    save_dataset(&d, &path)?;
    let back = load_dataset(&path)?;
    assert_eq!(back, d);

    println!("{} ({} bytes)", path.display(), sgfb::io::encode_dataset(&back)?.len());
    println!("subject {}, classes {} / {}", back.subject_id, back.class_names[0], back.class_names[1]);
    println!(
        "{} trials ({} + {}), {} channels x {} samples at {} Hz, cue at {} s",
        back.trials.len(),
        back.class_count(1),
        back.class_count(2),
        back.channels(),
        back.samples(),
        back.fs_hz,
        back.cue_offset_s
    );
    Ok(())
}
