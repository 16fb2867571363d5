//! Brute-force discrete velocity form of the collocation methods.
//!
//! With `G(y, z) = sum_{i,j} B*(i, j) E_-i(y) E_-j(z)` the point values evolve as
//! `dF_r/dt = sum_{p,q,s} A^{rs}_{pq} (F_p F_q - F_r F_s)` where
//! `A^{rs}_{pq} = N^-2d 1_N(r + s - p - q) G(p - s, q - s)`.
//! Everything here scales like `N^3d` or worse and is guarded to small grids.

use num_complex::Complex64;

use crate::grid::{symmetric_mod, GridSpec, ModeIndex};
use crate::kernel::KernelModes;
use crate::{Error, Result};

/// Largest `N` accepted by the oracle in 2D and 3D.
pub const MAX_MODES_2D: usize = 9;
pub const MAX_MODES_3D: usize = 5;

fn guard(grid: &GridSpec) -> Result<()> {
    let limit = if grid.dim() == 2 { MAX_MODES_2D } else { MAX_MODES_3D };
    if grid.modes() > limit {
        return Err(Error::OracleTooLarge(format!(
            "N = {} exceeds {limit} in {}D",
            grid.modes(),
            grid.dim()
        )));
    }
    Ok(())
}

/// Flat index of the node `p - s`, reduced periodically onto the grid.
fn difference_index(grid: &GridSpec, modes: &[ModeIndex], p: usize, s: usize) -> usize {
    let d = modes[p] - modes[s];
    grid.index_of(&symmetric_mod(&d.0[..grid.dim()], grid.modes()).expect("odd N"))
}

/// `G` at every pair of grid nodes `(y, z)`.
#[derive(Debug, Clone)]
pub struct GTable {
    len: usize,
    values: Vec<f64>,
    max_imag: f64,
}

impl GTable {
    pub fn get(&self, y: usize, z: usize) -> f64 {
        self.values[y * self.len + z]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest imaginary part discarded, relative to the largest magnitude.
    pub fn max_imag(&self) -> f64 {
        self.max_imag
    }

    /// `(min value, y index, z index)`.
    pub fn min(&self) -> (f64, usize, usize) {
        let (i, v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
        (v, i / self.len, i % self.len)
    }
}

/// Evaluates `G` at all node pairs as `E* B E*^T` with `E*_{y,i} = E_-i(y)`.
pub fn build_g(grid: &GridSpec, kernel: &impl KernelModes) -> Result<GTable> {
    guard(grid)?;
    grid.check_len(kernel.len())?;
    let len = grid.len();
    let modes: Vec<ModeIndex> = grid.mode_indices().collect();
    let nodes: Vec<[f64; 3]> = grid.nodes().collect();
    let waves: Vec<Complex64> = nodes
        .iter()
        .flat_map(|y| modes.iter().map(move |k| grid.plane_wave(&-*k, y)))
        .collect();
    // half[i][z] = sum_j B(i, j) E_-j(z)
    let mut half = vec![Complex64::default(); len * len];
    for i in 0..len {
        for j in 0..len {
            let b = kernel.entry(i, j);
            if b == 0.0 {
                continue;
            }
            for z in 0..len {
                half[i * len + z] += b * waves[z * len + j];
            }
        }
    }
    let mut values = vec![0.0; len * len];
    let mut max_imag: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for y in 0..len {
        for z in 0..len {
            let g: Complex64 = (0..len).map(|i| waves[y * len + i] * half[i * len + z]).sum();
            values[y * len + z] = g.re;
            max_imag = max_imag.max(g.im.abs());
            scale = scale.max(g.norm());
        }
    }
    Ok(GTable {
        len,
        values,
        max_imag: if scale > 0.0 { max_imag / scale } else { 0.0 },
    })
}

/// `G(y, z)` for a fixed `z` at arbitrary velocities `ys`, by direct Fourier summation.
///
/// Costs `O(|K|^2 + |K| |ys|)` and has no size guard.
pub fn g_slice(grid: &GridSpec, kernel: &impl KernelModes, z: [f64; 3], ys: &[[f64; 3]]) -> Result<Vec<f64>> {
    grid.check_len(kernel.len())?;
    let modes: Vec<ModeIndex> = grid.mode_indices().collect();
    let wz: Vec<Complex64> = modes.iter().map(|k| grid.plane_wave(&-*k, &z)).collect();
    let inner: Vec<Complex64> = (0..modes.len())
        .map(|i| (0..modes.len()).map(|j| kernel.entry(i, j) * wz[j]).sum())
        .collect();
    Ok(ys
        .iter()
        .map(|y| {
            modes
                .iter()
                .zip(&inner)
                .map(|(k, c)| grid.plane_wave(&-*k, y) * c)
                .sum::<Complex64>()
                .re
        })
        .collect())
}

/// Coefficients `A^{rs}_{pq}` stored over `(p, q, s)`; `r` is fixed by `r = p + q - s`.
#[derive(Debug, Clone)]
pub struct DvmCoefficients {
    grid: GridSpec,
    modes: Vec<ModeIndex>,
    values: Vec<f64>,
}

pub fn build_a(grid: &GridSpec, g: &GTable) -> Result<DvmCoefficients> {
    guard(grid)?;
    let len = grid.len();
    if g.len != len {
        return Err(Error::SizeMismatch {
            expected: len,
            found: g.len,
        });
    }
    let modes: Vec<ModeIndex> = grid.mode_indices().collect();
    let norm = (len as f64).powi(-2);
    let mut values = vec![0.0; len * len * len];
    for p in 0..len {
        for q in 0..len {
            for s in 0..len {
                let y = difference_index(grid, &modes, p, s);
                let z = difference_index(grid, &modes, q, s);
                values[(p * len + q) * len + s] = norm * g.get(y, z);
            }
        }
    }
    Ok(DvmCoefficients {
        grid: grid.clone(),
        modes,
        values,
    })
}

impl DvmCoefficients {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Node index `r` with `r + s = p + q` on the periodic grid.
    pub fn partner(&self, p: usize, q: usize, s: usize) -> usize {
        let k = self.modes[p] + self.modes[q] - self.modes[s];
        self.grid
            .index_of(&symmetric_mod(&k.0[..self.grid.dim()], self.grid.modes()).expect("odd N"))
    }

    /// `A^{rs}_{pq}`, zero off the support `r + s = p + q`.
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        if self.partner(p, q, s) != r {
            return 0.0;
        }
        let len = self.len();
        self.values[(p * len + q) * len + s]
    }

    /// Stored entries as `(p, q, r, s, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, usize, f64)> + '_ {
        let len = self.len();
        (0..len * len * len).map(move |i| {
            let (p, q, s) = (i / (len * len), (i / len) % len, i % len);
            (p, q, self.partner(p, q, s), s, self.values[i])
        })
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `Q_r = sum_{p,q,s} A^{rs}_{pq} (F_p F_q - F_r F_s)`.
pub fn q_dvm(values: &[f64], coeffs: &DvmCoefficients) -> Result<Vec<f64>> {
    let len = coeffs.len();
    if values.len() != len {
        return Err(Error::SizeMismatch {
            expected: len,
            found: values.len(),
        });
    }
    let mut out = vec![0.0; len];
    for (p, q, r, s, a) in coeffs.entries() {
        out[r] += a * (values[p] * values[q] - values[r] * values[s]);
    }
    Ok(out)
}

/// `sum_{p,q} A^{rs}_{pq}` for every `(r, s)`, flattened as `r * len + s`.
pub fn loss_coefficients(coeffs: &DvmCoefficients) -> Vec<f64> {
    let len = coeffs.len();
    let mut out = vec![0.0; len * len];
    for (_, _, r, s, a) in coeffs.entries() {
        out[r * len + s] += a;
    }
    out
}

/// `N^-d sum_{k,j} 1_N(k + j) B*(j, j) E_k(r) E_j(s)` for every `(r, s)`.
pub fn loss_coefficients_closed_form(grid: &GridSpec, kernel: &impl KernelModes) -> Result<Vec<f64>> {
    guard(grid)?;
    let len = grid.len();
    let modes: Vec<ModeIndex> = grid.mode_indices().collect();
    let nodes: Vec<[f64; 3]> = grid.nodes().collect();
    let diag = kernel.diagonal();
    let mut out = vec![0.0; len * len];
    for r in 0..len {
        for s in 0..len {
            let mut acc = Complex64::default();
            for kk in &modes {
                for (j, kj) in modes.iter().enumerate() {
                    let sum = *kk + *kj;
                    if symmetric_mod(&sum.0[..grid.dim()], grid.modes())? != ModeIndex([0; 3]) {
                        continue;
                    }
                    acc += diag[j] * grid.plane_wave(kk, &nodes[r]) * grid.plane_wave(kj, &nodes[s]);
                }
            }
            out[r * len + s] = acc.re / len as f64;
        }
    }
    Ok(out)
}
