use std::f64::consts::PI;

use crate::grid::GridSpec;
use crate::kernel::{psi_r, KernelModes, KernelSpec};
use crate::{Error, Result};

/// Low-rank 2D kernel `B(l, m) = w sum_t [a_t(l) b_t(m) + b_t(l) a_t(m)]`, where
/// `a_t(l) = psi_R(l, e_t)`, `b_t(l) = psi_R(l, e_t + pi/2)` and `t` runs over midpoint nodes
/// on `[0, pi/2)`. Folding both quarter-periods keeps the sum exactly symmetric in `l <-> m`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelFactors2D {
    weight: f64,
    len: usize,
    parallel: Vec<Vec<f64>>,
    perpendicular: Vec<Vec<f64>>,
}

impl KernelFactors2D {
    pub fn build(grid: &GridSpec, spec: &KernelSpec) -> Result<Self> {
        spec.validate(grid)?;
        if spec.dim != 2 {
            return Err(Error::InvalidKernel("factored kernels are two-dimensional".into()));
        }
        let carleman = spec
            .model
            .carleman_constant()
            .ok_or_else(|| Error::InvalidKernel("model has no constant Carleman kernel".into()))?;
        let nodes = spec.angular_nodes;
        let step = 0.5 * PI / nodes as f64;
        let modes: Vec<_> = grid.mode_indices().collect();
        let (radius, t) = (spec.radius, spec.box_half_width);
        let mut parallel = Vec::with_capacity(nodes);
        let mut perpendicular = Vec::with_capacity(nodes);
        for node in 0..nodes {
            let theta = (node as f64 + 0.5) * step;
            let e = [theta.cos(), theta.sin()];
            let e_perp = [-theta.sin(), theta.cos()];
            parallel.push(modes.iter().map(|l| psi_r(l, &e, radius, t)).collect());
            perpendicular.push(modes.iter().map(|l| psi_r(l, &e_perp, radius, t)).collect());
        }
        Ok(Self {
            weight: carleman * step,
            len: grid.len(),
            parallel,
            perpendicular,
        })
    }

    /// Rebuilds from stored factor vectors (cache loads).
    pub fn from_parts(weight: f64, parallel: Vec<Vec<f64>>, perpendicular: Vec<Vec<f64>>) -> Result<Self> {
        let len = parallel.first().map_or(0, Vec::len);
        if parallel.is_empty()
            || parallel.len() != perpendicular.len()
            || parallel.iter().chain(&perpendicular).any(|v| v.len() != len)
        {
            return Err(Error::InvalidKernel("inconsistent factor shapes".into()));
        }
        Ok(Self {
            weight,
            len,
            parallel,
            perpendicular,
        })
    }

    pub fn nodes(&self) -> usize {
        self.parallel.len()
    }

    /// Common quadrature weight of every term.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn parallel(&self, node: usize) -> &[f64] {
        &self.parallel[node]
    }

    pub fn perpendicular(&self, node: usize) -> &[f64] {
        &self.perpendicular[node]
    }

    pub(crate) fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        grid.check_len(self.len)
    }

    pub(crate) fn filtered(&self, sigma: &[f64]) -> Self {
        let scale = |v: &Vec<f64>| v.iter().zip(sigma).map(|(a, s)| a * s).collect();
        Self {
            weight: self.weight,
            len: self.len,
            parallel: self.parallel.iter().map(scale).collect(),
            perpendicular: self.perpendicular.iter().map(scale).collect(),
        }
    }
}

impl KernelModes for KernelFactors2D {
    fn len(&self) -> usize {
        self.len
    }

    fn entry(&self, l: usize, m: usize) -> f64 {
        self.weight
            * self
                .parallel
                .iter()
                .zip(&self.perpendicular)
                .map(|(a, b)| a[l] * b[m] + b[l] * a[m])
                .sum::<f64>()
    }
}
