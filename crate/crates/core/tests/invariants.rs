//! Property tests for the transform stack.

use proptest::prelude::*;
use spix_core::grid::CoeffGrid;
use spix_core::rng::Xoshiro256;
use spix_core::sensing::SensingOp;
use spix_core::solver::LinearOperator;
use spix_core::srm::{fwht, SrmConfig};
use spix_core::wavelet::{dwt2, idwt2, FilterBank};
use spix_core::SplineOrder;

fn random_grid(rows: usize, cols: usize, seed: u64) -> CoeffGrid {
    let mut rng = Xoshiro256::seed_from(seed);
    CoeffGrid::from_fn(rows, cols, |_, _| rng.next_f64() * 2.0 - 1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wavelet_round_trip_any_shape(
        rows in 8usize..48,
        cols in 8usize..48,
        levels in 1usize..3,
        seed in 0u64..1000,
        fourfour in proptest::bool::ANY,
    ) {
        let bank = if fourfour {
            FilterBank::bior(4, 4).unwrap()
        } else {
            FilterBank::bior(2, 2).unwrap()
        };
        let g = random_grid(rows, cols, seed);
        let x = dwt2(&g, &bank, levels).unwrap();
        prop_assert_eq!(x.len(), rows * cols);
        let back = idwt2(&x, &bank).unwrap();
        prop_assert!(g.max_abs_diff(&back) < 1e-10);
    }

    #[test]
    fn fwht_involution(log_n in 1u32..9, seed in 0u64..1000) {
        let n = 1usize << log_n;
        let mut rng = Xoshiro256::seed_from(seed);
        let orig: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
        let mut v = orig.clone();
        fwht(&mut v).unwrap();
        fwht(&mut v).unwrap();
        for (a, b) in v.iter().zip(&orig) {
            prop_assert!((a - n as f64 * b).abs() < 1e-9);
        }
    }

    #[test]
    fn theta_adjoint_identity(
        p in 0u32..4,
        seed in 0u64..500,
        m_frac in 0.2f64..1.0,
    ) {
        let k = 8usize;
        let n = k * k;
        let m = ((n as f64 * m_frac) as usize).clamp(1, n);
        let op = SensingOp::new(
            k, k,
            SrmConfig::new(n, m, seed).unwrap(),
            SplineOrder::new(p).unwrap(),
            FilterBank::bior(2, 2).unwrap(),
            2,
        ).unwrap();
        let mut rng = Xoshiro256::seed_from(seed ^ 0xABCD);
        let x: Vec<f64> = (0..op.cols()).map(|_| rng.next_f64() - 0.5).collect();
        let y: Vec<f64> = (0..op.rows()).map(|_| rng.next_f64() - 0.5).collect();
        let lhs: f64 = op.forward(&x).iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(op.adjoint(&y)).map(|(a, b)| a * b).sum();
        let scale = lhs.abs().max(rhs.abs()).max(1e-12);
        prop_assert!(((lhs - rhs) / scale).abs() < 1e-10);
    }
}
