//! Multi-dimensional complex FFTs on cubic arrays and the mapping between the symmetric
//! mode layout `[-n, n]^d` and the 0-based FFT layout of an arbitrary transform length.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Row-major `size^dim` transform, applied axis by axis.
pub(crate) struct FftNd {
    size: usize,
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftNd {
    pub(crate) fn new(size: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            size,
            dim,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    /// Unnormalized `sum_j x_j exp(-2 pi i k j / size)`.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.apply(&*self.forward, data);
    }

    /// Unnormalized `sum_k x_k exp(+2 pi i k j / size)`.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.apply(&*self.inverse, data);
    }

    fn apply(&self, plan: &dyn Fft<f64>, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len());
        let p = self.size;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // last axis: lines are contiguous
        plan.process_with_scratch(data, &mut scratch);
        if self.dim == 1 {
            return;
        }
        let mut lines = vec![Complex64::default(); self.len() / p];
        let mut stride = p;
        for _axis in 1..self.dim {
            let block = stride * p;
            lines.resize(block, Complex64::default());
            for chunk in data.chunks_mut(block) {
                for j in 0..p {
                    for i in 0..stride {
                        lines[i * p + j] = chunk[j * stride + i];
                    }
                }
                plan.process_with_scratch(&mut lines[..block], &mut scratch);
                for j in 0..p {
                    for i in 0..stride {
                        chunk[j * stride + i] = lines[i * p + j];
                    }
                }
            }
            stride *= p;
        }
    }
}

/// Smallest 5-smooth integer not below `n`.
pub(crate) fn next_fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for f in [2, 3, 5] {
            while r % f == 0 {
                r /= f;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Transforms between mode coefficients on `[-n, n]^d` and values on a `size^d` periodic grid.
///
/// With `size == 2n + 1` the product of two transformed mode vectors is an aliased (circular)
/// convolution; with `size >= 4n + 1` it is the exact linear convolution.
pub(crate) struct ModalFft {
    fft: FftNd,
    map: Vec<usize>,
    scale: f64,
}

impl std::fmt::Debug for ModalFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModalFft")
            .field("size", &self.fft.size)
            .field("dim", &self.fft.dim)
            .field("modes", &self.map.len())
            .finish()
    }
}

impl ModalFft {
    pub(crate) fn new(half: usize, dim: usize, size: usize) -> Self {
        assert!(size > 2 * half, "transform length must cover the mode set");
        let modes_per_axis = 2 * half + 1;
        let count = modes_per_axis.pow(dim as u32);
        let map = (0..count)
            .map(|flat| {
                let mut rem = flat;
                let mut digits = [0usize; 3];
                for axis in (0..dim).rev() {
                    digits[axis] = rem % modes_per_axis;
                    rem /= modes_per_axis;
                }
                digits[..dim].iter().fold(0usize, |acc, &digit| {
                    let k = digit as i64 - half as i64;
                    acc * size + k.rem_euclid(size as i64) as usize
                })
            })
            .collect();
        let fft = FftNd::new(size, dim);
        let scale = 1.0 / fft.len() as f64;
        Self { fft, map, scale }
    }

    pub(crate) fn points_len(&self) -> usize {
        self.fft.len()
    }

    /// `x_j = sum_k c_k exp(2 pi i k j / size)`, in FFT layout.
    pub(crate) fn to_points(&self, modes: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.fft.len()];
        for (&target, &c) in self.map.iter().zip(modes) {
            out[target] = c;
        }
        self.fft.inverse(&mut out);
        out
    }

    /// `c_k = size^-d sum_j x_j exp(-2 pi i k j / size)` restricted to `[-n, n]^d`.
    pub(crate) fn to_modes(&self, mut points: Vec<Complex64>) -> Vec<Complex64> {
        self.fft.forward(&mut points);
        self.map.iter().map(|&src| points[src] * self.scale).collect()
    }

    /// Places symmetric-layout samples into FFT layout (only meaningful when `size == 2n+1`).
    pub(crate) fn scatter(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.fft.len()];
        for (&target, &v) in self.map.iter().zip(values) {
            out[target] = v;
        }
        out
    }

    pub(crate) fn gather(&self, points: &[Complex64]) -> Vec<Complex64> {
        self.map.iter().map(|&src| points[src]).collect()
    }
}
