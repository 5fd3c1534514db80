//! Shared fixtures for the transform benchmarks.

use spix_core::grid::CoeffGrid;
use spix_core::rng::Xoshiro256;
use spix_core::sensing::SensingOp;
use spix_core::srm::SrmConfig;
use spix_core::wavelet::FilterBank;
use spix_core::SplineOrder;

pub fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = Xoshiro256::seed_from(seed);
    (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect()
}

pub fn random_grid(rows: usize, cols: usize, seed: u64) -> CoeffGrid {
    let mut rng = Xoshiro256::seed_from(seed);
    CoeffGrid::from_fn(rows, cols, |_, _| rng.next_f64() * 2.0 - 1.0)
}

/// Standard benchmark operator: k x k masks, half-rate ensemble, linear
/// generator, four wavelet levels.
pub fn bench_op(k: usize) -> SensingOp {
    SensingOp::new(
        k,
        k,
        SrmConfig::new(k * k, k * k / 2, 42).unwrap(),
        SplineOrder::new(1).unwrap(),
        FilterBank::bior(2, 2).unwrap(),
        4,
    )
    .unwrap()
}
