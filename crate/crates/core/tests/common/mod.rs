#![allow(dead_code)]

use efm_core::grid::GridSpec;
use efm_core::kernel::{apply_filter, Kernel, KernelSpec};
use efm_core::{Complex64, FilterKind, FilterWeights, FilteredKernel, KernelForm, Transform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn grid(dim: usize, modes: usize) -> GridSpec {
    let form = if dim == 2 { KernelForm::Carleman } else { KernelForm::Classical };
    GridSpec::with_defaults(dim, modes, 6.0, form).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point values in `[0, 1)` with a few exact zeros.
pub fn nonnegative_values(grid: &GridSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..grid.len())
        .map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen::<f64>() })
        .collect()
}

pub fn modes_of(grid: &GridSpec, values: &[f64]) -> Vec<Complex64> {
    Transform::new(grid).forward(values).unwrap().modes
}

/// Arbitrary complex coefficients, not Hermitian.
pub fn complex_modes(grid: &GridSpec, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..grid.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn filtered(grid: &GridSpec, filter: FilterKind) -> FilteredKernel {
    let spec = KernelSpec::for_grid(grid, filter).unwrap();
    let kernel = Kernel::build(grid, &spec).unwrap();
    apply_filter(grid, kernel, &FilterWeights::for_grid(filter, grid).unwrap()).unwrap()
}

/// An unfiltered kernel materialized entry by entry, to exercise the dense engine.
pub fn dense_unfiltered(grid: &GridSpec) -> FilteredKernel {
    let values = Kernel::Dense(filtered(grid, FilterKind::None).to_dense().unwrap());
    apply_filter(grid, values, &FilterWeights::for_grid(FilterKind::None, grid).unwrap()).unwrap()
}

pub fn max_abs(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = max_abs(b).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}
