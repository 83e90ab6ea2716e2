mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sgfb::numerics::Matrix;
use sgfb::sgfb::{sgfb_solve, src_solve, BandDictionary, SgfbHyperparams, SgfbSolver};

fn instance(seed: u64, bands: usize, rows: usize, cols: usize) -> (Vec<Matrix>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = (0..bands).map(|_| random_block(&mut rng, rows, cols)).collect();
    let y = (0..bands).map(|_| random_vec(&mut rng, rows)).collect();
    (blocks, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn matches_sign_enumeration(
        seed in any::<u64>(),
        shape in prop::sample::select(vec![(1usize, 3usize, 6usize), (2, 4, 4), (3, 2, 3), (2, 2, 5)]),
        lambda in 0.01f64..0.5,
        lambda1 in prop::sample::select(vec![0.0, 0.05, 0.3, 1.5]),
    ) {
        let (bands, rows, cols) = shape;
        let (blocks, y) = instance(seed, bands, rows, cols);
        let code = SgfbSolver::from_blocks(blocks.clone()).solve(&y, &SgfbHyperparams::new(lambda, lambda1)).unwrap();
        let (best, _) = exhaustive_minimum(&blocks, &y, lambda, lambda1);
        prop_assert!((objective(&blocks, &y, &code.coeffs, lambda, lambda1) - best).abs() <= 1e-8);
        prop_assert!(kkt_violation(&blocks, &y, &code.coeffs, lambda, lambda1) <= 1e-6);
    }

    #[test]
    fn single_band_equals_plain_lasso(seed in any::<u64>(), lambda in 0.01f64..0.5) {
        let (blocks, y) = instance(seed, 1, 3, 7);
        let theta = src_solve(&y[0], &blocks[0], lambda).unwrap();
        let u = Matrix::from_fn(7, 1, |k, _| theta[k]);
        let (best, _) = exhaustive_minimum(&blocks, &y, lambda, 0.0);
        prop_assert!((objective(&blocks, &y, &u, lambda, 0.0) - best).abs() <= 1e-8);
    }
}

#[test]
fn dictionary_wrapper_and_raw_blocks_agree() {
    let (blocks, y) = instance(9, 3, 4, 6);
    let dict = BandDictionary::from_parts(blocks.clone(), vec![1, 1, 1, 2, 2, 2], (0..6).collect()).unwrap();
    let hp = SgfbHyperparams::new(0.1, 0.2);
    let a = sgfb_solve(&y, &dict, &hp).unwrap();
    let b = SgfbSolver::from_blocks(blocks).solve(&y, &hp).unwrap();
    assert_eq!(a.coeffs, b.coeffs);
}
