use std::f64::consts::PI;

use rayon::prelude::*;

use crate::grid::GridSpec;
use crate::kernel::{sinc, KernelModes, KernelSpec};
use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

/// 3D kernel modes `B(l, m) = Phi(|l+m|^2, |l-m|^2)` stored over integer squared norms.
///
/// `Phi(a^2, b^2) = 16 pi^2 B int_0^R r^2 sinc(pi r a / 2T) sinc(pi r b / 2T) dr`. Only pairs with
/// `a^2 + b^2 = 2(|l|^2 + |m|^2) <= 12 n^2` are reachable and only those are filled; the rest of
/// the square is left at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable3D {
    half: usize,
    side: usize,
    values: Vec<f64>,
}

impl KernelTable3D {
    pub fn build(grid: &GridSpec, spec: &KernelSpec) -> Result<Self> {
        spec.validate(grid)?;
        if spec.dim != 3 {
            return Err(Error::InvalidKernel("tabulated kernels are three-dimensional".into()));
        }
        let half = grid.half();
        let max_sq = 12 * half * half;
        let side = max_sq + 1;
        let (r, w) = gauss_legendre(spec.radial_nodes, 0.0, spec.radius);
        let prefactor = 16.0 * PI * PI * spec.model.collision_kernel();
        let weights: Vec<f64> = r.iter().zip(&w).map(|(r, w)| prefactor * w * r * r).collect();
        let scale = PI / (2.0 * spec.box_half_width);
        // samples[a2][j] = sinc(pi r_j a / 2T)
        let samples: Vec<Vec<f64>> = (0..side)
            .map(|a2| {
                let a = (a2 as f64).sqrt();
                r.iter().map(|rj| sinc(scale * rj * a)).collect()
            })
            .collect();
        let mut values = vec![0.0; side * side];
        values.par_chunks_mut(side).enumerate().for_each(|(a2, row)| {
            let sa = &samples[a2];
            for (b2, v) in row.iter_mut().enumerate().take(side - a2) {
                *v = sa
                    .iter()
                    .zip(&samples[b2])
                    .zip(&weights)
                    .map(|((x, y), w)| w * x * y)
                    .sum();
            }
        });
        for a2 in 0..side {
            for b2 in a2 + 1..side - a2 {
                values[b2 * side + a2] = values[a2 * side + b2];
            }
        }
        Ok(Self { half, side, values })
    }

    /// Rebuilds from stored values (cache loads).
    pub fn from_parts(half: usize, values: Vec<f64>) -> Result<Self> {
        let side = 12 * half * half + 1;
        if values.len() != side * side {
            return Err(Error::SizeMismatch {
                expected: side * side,
                found: values.len(),
            });
        }
        Ok(Self { half, side, values })
    }

    pub fn half(&self) -> usize {
        self.half
    }

    /// Number of entries per row, `12 n^2 + 1`.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Phi` for squared norms `a2 = |l+m|^2`, `b2 = |l-m|^2`.
    pub fn lookup(&self, a2: i64, b2: i64) -> f64 {
        self.values[a2 as usize * self.side + b2 as usize]
    }

    /// All `Phi(a2, .)`, indexed by `b2`.
    pub fn row(&self, a2: i64) -> &[f64] {
        let start = a2 as usize * self.side;
        &self.values[start..start + self.side]
    }

    pub(crate) fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if grid.dim() != 3 || grid.half() != self.half {
            return Err(Error::InvalidKernel(format!(
                "table for n = {} does not fit a {}D grid with n = {}",
                self.half,
                grid.dim(),
                grid.half()
            )));
        }
        Ok(())
    }
}

/// Unfiltered view over grid indices, used to assemble dense oracles.
pub struct TableModes<'a> {
    table: &'a KernelTable3D,
    modes: Vec<crate::grid::ModeIndex>,
}

impl<'a> TableModes<'a> {
    pub fn new(table: &'a KernelTable3D, grid: &GridSpec) -> Result<Self> {
        table.check_grid(grid)?;
        Ok(Self {
            table,
            modes: grid.mode_indices().collect(),
        })
    }
}

impl KernelModes for TableModes<'_> {
    fn len(&self) -> usize {
        self.modes.len()
    }

    fn entry(&self, l: usize, m: usize) -> f64 {
        let (l, m) = (self.modes[l], self.modes[m]);
        self.table.lookup((l + m).norm_sq(), (l - m).norm_sq())
    }
}
