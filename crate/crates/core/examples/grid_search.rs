//! Nested cross-validation over a small (lambda, lambda1) grid.
//!
//! cargo run --release --example grid_search

use sgfb::eval::{grid_search, EvalConfig, PipelineConfig};
use sgfb::io::{generate_synthetic, SynthConfig};

fn main() -> sgfb::Result<()> {
    let d = generate_synthetic(&SynthConfig { snr_db: -12.0, ..SynthConfig::default() })?;
    let eval = EvalConfig {
        folds: 5,
        inner_folds: 5,
        lambda_grid: vec![0.1, 0.3, 0.5, 0.7],
        lambda1_grid: vec![0.1, 0.4],
        ..EvalConfig::default()
    };
    let g = grid_search(&d, &PipelineConfig::default(), &eval)?;

    print!("lambda \\ lambda1");
    for l1 in &g.lambda1_grid {
        print!("  {l1:>6}");
    }
    println!();
    for (l, row) in g.lambda_grid.iter().zip(&g.surface) {
        print!("{l:>16}");
        for v in row {
            print!("  {v:>6.4}");
        }
        println!();
    }
    println!("best mean surface point: lambda {} lambda1 {}", g.best.0, g.best.1);
    for f in &g.outer.folds {
        println!("outer fold {}: lambda {} lambda1 {} acc {:.4}", f.fold, f.hp.lambda, f.hp.lambda1, f.metrics.acc);
    }
    println!("outer acc {:.4} +/- {:.4}", g.outer.summary.acc.0, g.outer.summary.acc.1);
    Ok(())
}
