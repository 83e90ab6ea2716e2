use sgfb::eval::{fraction_experiment, grid_search, kfold_cv, EvalConfig, PipelineConfig};
use sgfb::io::{decode_dataset, encode_dataset, generate_synthetic, Dataset, SynthConfig};
use sgfb::sgfb::SgfbHyperparams;

fn synth(snr_db: f64, trials_per_class: usize, seed: u64) -> Dataset {
    generate_synthetic(&SynthConfig { snr_db, trials_per_class, seed, ..SynthConfig::default() }).unwrap()
}

fn fold_accs(d: &Dataset, eval: &EvalConfig) -> Vec<f64> {
    kfold_cv(d, &PipelineConfig::default(), eval).unwrap().folds.iter().map(|f| f.metrics.acc).collect()
}

#[test]
fn duplicated_halves_score_identically() {
    let d = synth(-5.0, 25, 21);
    let mut doubled = d.clone();
    doubled.trials.extend(d.trials.iter().cloned());
    let n = d.trials.len();
    let first = Dataset { trials: doubled.trials[..n].to_vec(), ..d.clone() };
    let second = Dataset { trials: doubled.trials[n..].to_vec(), ..d.clone() };
    let eval = EvalConfig { folds: 5, seed: 4, ..EvalConfig::default() };
    let a = fold_accs(&first, &eval);
    assert_eq!(a, fold_accs(&second, &eval));
    assert!(a.iter().any(|&x| x < 1.0), "want a set hard enough to be informative: {a:?}");
}

#[test]
fn stored_dataset_scores_like_generated_one() {
    let d = synth(0.0, 20, 5);
    let back = decode_dataset(&encode_dataset(&d).unwrap()).unwrap();
    let eval = EvalConfig { folds: 4, ..EvalConfig::default() };
    let a = kfold_cv(&d, &PipelineConfig::default(), &eval).unwrap();
    let b = kfold_cv(&back, &PipelineConfig::default(), &eval).unwrap();
    assert_eq!(a.summary, b.summary);
    for (x, y) in a.folds.iter().zip(&b.folds) {
        assert_eq!((x.metrics, x.fingerprint, &x.test), (y.metrics, y.fingerprint, &y.test));
    }
}

#[test]
fn full_fraction_single_repeat_is_plain_cross_validation() {
    let d = synth(-10.0, 20, 8);
    let eval = EvalConfig { folds: 4, fractions: vec![1.0], repeats: 1, seed: 3, ..EvalConfig::default() };
    let fr = fraction_experiment(&d, &PipelineConfig::default(), &eval).unwrap();
    let cv = kfold_cv(&d, &PipelineConfig::default(), &eval).unwrap();
    assert_eq!(fr.rows.len(), 1);
    // The spread is taken over repeats, so only the means carry over.
    let s = fr.rows[0].summary;
    assert_eq!((s.acc.0, s.sen.map(|x| x.0), s.spe.map(|x| x.0)), (cv.summary.acc.0, cv.summary.sen.map(|x| x.0), cv.summary.spe.map(|x| x.0)));
    assert_eq!(s.acc.1, 0.0);
    assert_eq!(fr.rows[0].flags, cv.flags);
}

#[test]
fn grid_selection_is_near_exhaustive_best() {
    let d = synth(-12.0, 30, 31);
    let eval = EvalConfig {
        folds: 5,
        inner_folds: 4,
        lambda_grid: vec![0.1, 0.3, 0.6],
        lambda1_grid: vec![0.1, 0.4],
        seed: 2,
        ..EvalConfig::default()
    };
    let g = grid_search(&d, &PipelineConfig::default(), &eval).unwrap();
    let mut best = 0.0f64;
    for &lambda in &eval.lambda_grid {
        for &lambda1 in &eval.lambda1_grid {
            let p = PipelineConfig { hp: SgfbHyperparams::new(lambda, lambda1), ..PipelineConfig::default() };
            best = best.max(kfold_cv(&d, &p, &eval).unwrap().mean_acc());
        }
    }
    let selected = g.outer.mean_acc();
    assert!(selected >= best - 0.02, "selected {selected}, exhaustive best {best}");
    assert!(eval.lambda_grid.contains(&g.best.0) && eval.lambda1_grid.contains(&g.best.1));
    for f in &g.outer.folds {
        assert!(eval.lambda_grid.contains(&f.hp.lambda));
    }
}

#[test]
fn more_training_data_does_not_hurt() {
    let d = synth(-15.0, 40, 13);
    let eval = EvalConfig { folds: 5, fractions: vec![0.3, 1.0], repeats: 4, ..EvalConfig::default() };
    let fr = fraction_experiment(&d, &PipelineConfig::default(), &eval).unwrap();
    let (low, full) = (fr.rows[0].summary.acc.0, fr.rows[1].summary.acc.0);
    assert!(full >= low - 0.02, "30%: {low}, 100%: {full}");
    assert!(fr.rows.iter().all(|r| r.repeats == 4));
}

#[test]
fn fraction_below_fold_count_is_rejected() {
    let d = synth(0.0, 10, 1);
    let eval = EvalConfig { folds: 5, fractions: vec![0.3], repeats: 1, ..EvalConfig::default() };
    assert!(fraction_experiment(&d, &PipelineConfig::default(), &eval).is_err());
}
