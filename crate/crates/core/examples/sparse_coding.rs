//! Codes one held-out trial against a training dictionary and classifies it
//! by per-class residual.
//!
//! cargo run --example sparse_coding -- [lambda] [lambda1]

use sgfb::eval::{prepare_trials, FoldModel, PipelineConfig};
use sgfb::io::{generate_synthetic, SynthConfig};
use sgfb::sgfb::{classify, cross_band_gaps, SgfbHyperparams, SgfbSolver};

fn main() -> sgfb::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<f64>().expect("number"));
    let hp = SgfbHyperparams::new(args.next().unwrap_or(0.3), args.next().unwrap_or(0.1));
    let cfg = PipelineConfig { hp, ..PipelineConfig::default() };
    let d = generate_synthetic(&SynthConfig { snr_db: -10.0, ..SynthConfig::default() })?;
    let prep = prepare_trials(&d, &cfg.bands, (1.0, 2.0))?;

    // Trials 0 and 1 (one per class) are held out.
    let train: Vec<usize> = (2..prep.len()).collect();
    let model = FoldModel::fit(&prep, &train, &cfg)?;
    let solver = SgfbSolver::new(&model.dictionary);
    println!(
        "dictionary: {} bands x {} features x {} training columns",
        model.dictionary.band_count(),
        model.dictionary.rows(),
        model.dictionary.columns()
    );

    for test in [0, 1] {
        let (y, _) = model.encode(&prep.bands[test])?;
        let code = solver.solve(&y, &hp)?;
        let c = classify(&y, &model.dictionary, &code)?;
        let gaps = cross_band_gaps(&y, &model.dictionary, &code, &hp)?;
        println!(
            "trial {test} (class {}): {} nonzeros, {} sweeps, objective {:.5}, kkt {:.1e}",
            prep.labels[test],
            code.nonzeros(),
            code.iterations,
            code.objective,
            code.max_kkt_violation
        );
        println!(
            "  residuals {:.4} / {:.4} -> class {}{}, {} same-sign cross-band pairs",
            c.residuals[0],
            c.residuals[1],
            c.class,
            if c.tie { " (tie)" } else { "" },
            gaps.len()
        );
        let mut rows: Vec<(usize, f64)> =
            (0..code.coeffs.rows()).map(|k| (k, code.coeffs.row(k).iter().map(|v| v.abs()).sum())).collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1));
        for &(k, w) in rows.iter().take(3) {
            let col = model.dictionary.column_trial[k];
            println!("  column {k:>2} (trial {col:>2}, class {}): total |u| {w:.4}", model.dictionary.column_class[k]);
        }
    }
    Ok(())
}
