use proptest::prelude::*;
use sgfb::io::{decode_dataset, encode_dataset, generate_synthetic, SynthConfig};

fn sample() -> Vec<u8> {
    let cfg = SynthConfig { channels: 3, trials_per_class: 2, duration_s: 1.0, cue_offset_s: 0.25, ..SynthConfig::default() };
    encode_dataset(&generate_synthetic(&cfg).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn random_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
        let _ = decode_dataset(&bytes);
    }

    #[test]
    fn corrupted_files_never_panic(edits in proptest::collection::vec((any::<prop::sample::Index>(), any::<u8>()), 1..8), cut in any::<prop::sample::Index>()) {
        let mut bytes = sample();
        for (at, v) in &edits {
            let i = at.index(bytes.len());
            bytes[i] ^= v | 1;
        }
        if let Ok(d) = decode_dataset(&bytes) {
            // Anything accepted must be a well-formed dataset.
            prop_assert!(d.validate().is_ok());
        }
        let keep = cut.index(bytes.len());
        prop_assert!(decode_dataset(&bytes[..keep]).is_err());
    }

    #[test]
    fn single_sample_edits_are_caught_or_harmless(at in any::<prop::sample::Index>(), v in 1u8..=255) {
        let clean = sample();
        let original = decode_dataset(&clean).unwrap();
        let mut bytes = clean.clone();
        let i = at.index(bytes.len());
        bytes[i] ^= v;
        match decode_dataset(&bytes) {
            Err(_) => {}
            Ok(d) => prop_assert!(d != original, "edit at {i} decoded to the original"),
        }
    }
}

#[test]
fn clean_sample_round_trips() {
    let bytes = sample();
    assert_eq!(encode_dataset(&decode_dataset(&bytes).unwrap()).unwrap(), bytes);
}
