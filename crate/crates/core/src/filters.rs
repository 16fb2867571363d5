//! Per-mode filter weights and the non-negativity certificate of their trigonometric kernels.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::grid::{GridSpec, ModeIndex};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    /// Modified Jackson weights; the kernel is non-negative and smears at `O(N^-2)`.
    Jackson,
    /// Fejér (Cesàro) weights `1 - |b| / (n + 1)`; non-negative kernel, first-order smearing.
    Fejer,
    /// Unit weights, i.e. the Dirichlet kernel.
    None,
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::Jackson => "jackson",
            FilterKind::Fejer => "fejer",
            FilterKind::None => "none",
        })
    }
}

impl FromStr for FilterKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jackson" => Ok(FilterKind::Jackson),
            "fejer" => Ok(FilterKind::Fejer),
            "none" => Ok(FilterKind::None),
            other => Err(Error::Setup(format!("unknown filter kind `{other}`"))),
        }
    }
}

fn check_index(n: usize, beta: i64) -> Result<u64> {
    let abs = beta.unsigned_abs();
    if n == 0 || abs > n as u64 {
        return Err(Error::FilterIndex { n: n as i64, beta });
    }
    Ok(abs)
}

/// One-dimensional modified Jackson weight for `N = 2n + 1` modes.
pub fn jackson_1d(n: usize, beta: i64) -> Result<f64> {
    let b = check_index(n, beta)? as f64;
    let np1 = (n + 1) as f64;
    let a = PI / np1;
    let cot = a.cos() / a.sin();
    Ok(((np1 - b) * (a * b).cos() + (a * b).sin() * cot) / np1)
}

pub fn fejer_1d(n: usize, beta: i64) -> Result<f64> {
    let b = check_index(n, beta)? as f64;
    Ok(1.0 - b / (n + 1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterWeights {
    kind: FilterKind,
    n: usize,
    /// Weight of `beta = -n..=n`.
    weights: Vec<f64>,
}

impl FilterWeights {
    pub fn new(kind: FilterKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::FilterIndex { n: 0, beta: 0 });
        }
        let weights = (-(n as i64)..=n as i64)
            .map(|beta| match kind {
                FilterKind::Jackson => jackson_1d(n, beta),
                FilterKind::Fejer => fejer_1d(n, beta),
                FilterKind::None => Ok(1.0),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kind, n, weights })
    }

    pub fn for_grid(kind: FilterKind, grid: &GridSpec) -> Result<Self> {
        Self::new(kind, grid.half())
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn half(&self) -> usize {
        self.n
    }

    pub fn weight_1d(&self, beta: i64) -> f64 {
        self.weights[(beta + self.n as i64) as usize]
    }

    pub fn weights_1d(&self) -> &[f64] {
        &self.weights
    }

    /// Tensor-product weight `prod_i sigma(k_i)`.
    pub fn tensor_weight(&self, k: &ModeIndex) -> f64 {
        k.0.iter().map(|&c| self.weight_1d(c)).product()
    }

    /// Tensor weights for every mode of `grid`, in grid layout.
    pub fn per_mode(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        if grid.half() != self.n {
            return Err(Error::SizeMismatch {
                expected: 2 * grid.half() + 1,
                found: self.weights.len(),
            });
        }
        Ok(grid.mode_indices().map(|k| self.tensor_weight(&k)).collect())
    }

    /// `sum_b sigma(b) exp(i pi b x)` for `x = v / T`; real because the weights are even.
    pub fn kernel_1d(&self, x: f64) -> f64 {
        self.weights[self.n]
            + 2.0
                * (1..=self.n)
                    .map(|b| self.weight_1d(b as i64) * (PI * b as f64 * x).cos())
                    .sum::<f64>()
    }

    /// Samples the `dim`-dimensional kernel on `(oversample N)^dim` points of one period and
    /// reports its minimum. The kernel is a tensor product, so only the 1D factor is sampled.
    pub fn certify_kernel_nonnegative(&self, dim: usize, oversample: usize) -> Result<KernelCertificate> {
        if oversample < 4 {
            return Err(Error::Setup(format!("oversampling factor must be >= 4, got {oversample}")));
        }
        let count = oversample * (2 * self.n + 1);
        let samples: Vec<(f64, f64)> = (0..count)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / count as f64;
                (x, self.kernel_1d(x))
            })
            .collect();
        let (x_min, v_min) = samples
            .iter()
            .copied()
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let (x_max, v_max) = samples
            .iter()
            .copied()
            .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        // the minimum of a product of factors is attained at a combination of factor extrema
        let mut best = (f64::INFINITY, [0.0; 3]);
        for mask in 0..(1u32 << dim) {
            let mut value = 1.0;
            let mut at = [0.0; 3];
            for (axis, slot) in at.iter_mut().enumerate().take(dim) {
                let (x, v) = if mask & (1 << axis) != 0 {
                    (x_min, v_min)
                } else {
                    (x_max, v_max)
                };
                value *= v;
                *slot = x;
            }
            if value < best.0 {
                best = (value, at);
            }
        }
        Ok(KernelCertificate {
            min_value: best.0,
            argmin: best.1,
            samples_per_axis: count,
        })
    }
}

/// Outcome of [`FilterWeights::certify_kernel_nonnegative`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelCertificate {
    pub min_value: f64,
    /// Location of the minimum in units of the box half-width (`v / T`).
    pub argmin: [f64; 3],
    pub samples_per_axis: usize,
}

impl KernelCertificate {
    pub const TOLERANCE: f64 = -1e-12;

    pub fn is_nonnegative(&self) -> bool {
        self.min_value >= Self::TOLERANCE
    }
}

/// `max_j |f(v_j) - (S f)(v_j)|` on an `N`-point periodic grid over `[-T, T)`, where `S` multiplies
/// the discrete Fourier coefficients of the samples by the filter weights.
pub fn smoothing_error_1d(weights: &FilterWeights, f: impl Fn(f64) -> f64) -> f64 {
    let n = weights.half() as i64;
    let count = (2 * n + 1) as f64;
    let x: Vec<f64> = (-n..=n).map(|j| 2.0 * j as f64 / count).collect();
    let samples: Vec<f64> = x.iter().map(|&xi| f(xi)).collect();
    let coeffs: Vec<(f64, f64)> = (-n..=n)
        .map(|k| {
            samples.iter().zip(&x).fold((0.0, 0.0), |(re, im), (&s, &xi)| {
                let phase = -PI * k as f64 * xi;
                (re + s * phase.cos() / count, im + s * phase.sin() / count)
            })
        })
        .collect();
    x.iter()
        .zip(&samples)
        .map(|(&xi, &s)| {
            let smoothed: f64 = (-n..=n)
                .zip(&coeffs)
                .map(|(k, &(re, im))| {
                    let phase = PI * k as f64 * xi;
                    weights.weight_1d(k) * (re * phase.cos() - im * phase.sin())
                })
                .sum();
            (s - smoothed).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn jackson_values() {
        for n in [1, 2, 5, 40] {
            assert_abs_diff_eq!(jackson_1d(n, 0).unwrap(), 1.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(jackson_1d(2, 1).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(jackson_1d(1, 1).unwrap(), 0.0, epsilon = 1e-15);
        assert!(matches!(jackson_1d(2, 3), Err(Error::FilterIndex { .. })));
        assert!(matches!(jackson_1d(2, -3), Err(Error::FilterIndex { .. })));
    }

    #[test]
    fn fejer_values() {
        assert_eq!(fejer_1d(7, 0).unwrap(), 1.0);
        assert_abs_diff_eq!(fejer_1d(3, 2).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(fejer_1d(2, 2).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert!(fejer_1d(2, 3).is_err());
        let w = FilterWeights::new(FilterKind::Fejer, 9).unwrap();
        for b in 1..=9 {
            assert!(w.weight_1d(b) > 0.0 && w.weight_1d(b) < w.weight_1d(b - 1));
        }
    }

    #[test]
    fn tensor_weights() {
        let j = FilterWeights::new(FilterKind::Jackson, 2).unwrap();
        assert_eq!(j.tensor_weight(&ModeIndex::default()), 1.0);
        assert_abs_diff_eq!(j.tensor_weight(&ModeIndex::new(&[1, 1])), 0.25, epsilon = 1e-15);
        let none = FilterWeights::new(FilterKind::None, 4).unwrap();
        assert_eq!(none.tensor_weight(&ModeIndex::new(&[3, -4, 1])), 1.0);
    }

    #[test]
    fn weights_are_even_bounded_and_jackson_monotone() {
        for n in 1..=512usize {
            for kind in [FilterKind::Jackson, FilterKind::Fejer] {
                let w = FilterWeights::new(kind, n).unwrap();
                for b in 0..=n as i64 {
                    assert_eq!(w.weight_1d(b), w.weight_1d(-b));
                    let v = w.weight_1d(b);
                    assert!((-1e-15..=1.0).contains(&v), "{kind} n={n} b={b}: {v}");
                    if b > 0 && kind == FilterKind::Jackson {
                        assert!(v <= w.weight_1d(b - 1) + 1e-15);
                    }
                }
            }
        }
    }

    /// Brute-force sampling of the 2D kernel on the full tensor grid.
    fn dense_min_2d(w: &FilterWeights, count: usize) -> f64 {
        let vals: Vec<f64> = (0..count)
            .map(|i| w.kernel_1d(-1.0 + 2.0 * i as f64 / count as f64))
            .collect();
        let mut min = f64::INFINITY;
        for a in &vals {
            for b in &vals {
                min = min.min(a * b);
            }
        }
        min
    }

    #[test]
    fn kernel_certification() {
        let jackson = FilterWeights::new(FilterKind::Jackson, 16).unwrap();
        let cert = jackson.certify_kernel_nonnegative(2, 8).unwrap();
        assert!(cert.is_nonnegative(), "{cert:?}");
        assert_abs_diff_eq!(cert.min_value, dense_min_2d(&jackson, 8 * 33), epsilon = 1e-12);

        let fejer = FilterWeights::new(FilterKind::Fejer, 16).unwrap();
        assert!(fejer.certify_kernel_nonnegative(3, 8).unwrap().is_nonnegative());

        let dirichlet = FilterWeights::new(FilterKind::None, 16).unwrap();
        let cert = dirichlet.certify_kernel_nonnegative(2, 8).unwrap();
        assert!(cert.min_value < 0.0);
        assert_abs_diff_eq!(cert.min_value, dense_min_2d(&dirichlet, 8 * 33), epsilon = 1e-9);

        assert!(jackson.certify_kernel_nonnegative(2, 3).is_err());
    }

    #[test]
    fn jackson_first_weight_is_cosine() {
        // (n cos a + sin a cot a)/(n+1) = cos a with a = pi/(n+1)
        for n in [3usize, 8, 64] {
            let w = FilterWeights::new(FilterKind::Jackson, n).unwrap();
            assert_abs_diff_eq!(w.weight_1d(1), (PI / (n + 1) as f64).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn smoothing_error_of_single_cosine() {
        let w = FilterWeights::new(FilterKind::Jackson, 8).unwrap();
        let err = smoothing_error_1d(&w, |x| (PI * x).cos());
        assert_abs_diff_eq!(err, 1.0 - w.weight_1d(1), epsilon = 1e-13);
    }
}
