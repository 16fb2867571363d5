//! Fourier modes `B(l, m)` of the truncated collision kernel for Maxwell molecules.
//!
//! In 2D the Carleman form is used: `B(l, m) = Bc * int_0^pi psi(l, e_t) psi(m, e_t+pi/2) dt`
//! with `psi(l, e) = int_-R^R E_l(r e) dr` and the constant Carleman kernel `Bc = 2 B = 1/pi`.
//! A midpoint rule on `[0, pi/2)` (both halves of `[0, pi)` folded together) turns this into a
//! sum of `2M` separable terms, which is what the fast evaluator consumes.
//!
//! In 3D the classical form is used. Integrating the plane waves over the sphere and then over
//! the direction of the relative velocity gives
//! `B(l, m) = 16 pi^2 B int_0^R r^2 sinc(pi r |l+m| / 2T) sinc(pi r |l-m| / 2T) dr`,
//! which depends only on the integers `|l+m|^2` and `|l-m|^2` and is stored as a table.

mod cache;
mod factors;
mod table;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cache::{cache_path, kernel_cache_io, CacheKey, CacheStatus};
pub use factors::KernelFactors2D;
pub use table::{KernelTable3D, TableModes};

use crate::filters::{FilterKind, FilterWeights};
use crate::grid::{GridSpec, KernelForm, ModeIndex};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoleculeModel {
    /// `B(g, w) = 1 / (2 pi)` in two dimensions.
    Maxwell2d,
    /// `B(g, w) = 1 / (4 pi)` in three dimensions.
    Maxwell3d,
}

impl MoleculeModel {
    pub fn for_dim(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(MoleculeModel::Maxwell2d),
            3 => Ok(MoleculeModel::Maxwell3d),
            _ => Err(Error::InvalidKernel(format!("no Maxwell model for dimension {dim}"))),
        }
    }

    pub fn dim(self) -> usize {
        match self {
            MoleculeModel::Maxwell2d => 2,
            MoleculeModel::Maxwell3d => 3,
        }
    }

    /// Constant collision kernel `B(g, w)`.
    pub fn collision_kernel(self) -> f64 {
        match self {
            MoleculeModel::Maxwell2d => 1.0 / (2.0 * PI),
            MoleculeModel::Maxwell3d => 1.0 / (4.0 * PI),
        }
    }

    /// Carleman kernel `2^(d-1) B |y + z|^(2-d)`; constant only in 2D.
    pub fn carleman_constant(self) -> Option<f64> {
        match self {
            MoleculeModel::Maxwell2d => Some(2.0 * self.collision_kernel()),
            MoleculeModel::Maxwell3d => None,
        }
    }

    pub fn form(self) -> KernelForm {
        match self {
            MoleculeModel::Maxwell2d => KernelForm::Carleman,
            MoleculeModel::Maxwell3d => KernelForm::Classical,
        }
    }
}

impl fmt::Display for MoleculeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoleculeModel::Maxwell2d => "maxwell-2d",
            MoleculeModel::Maxwell3d => "maxwell-3d",
        })
    }
}

impl FromStr for MoleculeModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maxwell-2d" => Ok(MoleculeModel::Maxwell2d),
            "maxwell-3d" => Ok(MoleculeModel::Maxwell3d),
            other => Err(Error::InvalidKernel(format!("unknown molecule model `{other}`"))),
        }
    }
}

pub const DEFAULT_ANGULAR_NODES: usize = 8;
pub const DEFAULT_RADIAL_NODES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub dim: usize,
    pub model: MoleculeModel,
    pub radius: f64,
    pub box_half_width: f64,
    /// Midpoint nodes on `[0, pi/2)` (2D).
    pub angular_nodes: usize,
    /// Gauss–Legendre nodes on `[0, R]` (3D).
    pub radial_nodes: usize,
    pub filter: FilterKind,
}

impl KernelSpec {
    pub fn for_grid(grid: &GridSpec, filter: FilterKind) -> Result<Self> {
        Ok(Self {
            dim: grid.dim(),
            model: MoleculeModel::for_dim(grid.dim())?,
            radius: grid.radius(),
            box_half_width: grid.box_half_width(),
            angular_nodes: DEFAULT_ANGULAR_NODES,
            radial_nodes: DEFAULT_RADIAL_NODES,
            filter,
        })
    }

    pub fn with_angular_nodes(mut self, nodes: usize) -> Self {
        self.angular_nodes = nodes;
        self
    }

    pub fn with_radial_nodes(mut self, nodes: usize) -> Self {
        self.radial_nodes = nodes;
        self
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if self.model.dim() != self.dim {
            return Err(Error::InvalidKernel(format!(
                "model {} is inconsistent with dimension {}",
                self.model, self.dim
            )));
        }
        if self.dim != grid.dim()
            || self.radius != grid.radius()
            || self.box_half_width != grid.box_half_width()
        {
            return Err(Error::InvalidKernel(
                "kernel spec (d, R, T) does not match the grid".into(),
            ));
        }
        if self.model.form() != grid.form() {
            return Err(Error::InvalidKernel(format!(
                "{} kernels need a grid built for the {:?} form",
                self.model,
                self.model.form()
            )));
        }
        if self.angular_nodes < 1 {
            return Err(Error::InvalidKernel("need at least one angular node".into()));
        }
        if self.radial_nodes < 8 {
            return Err(Error::InvalidKernel(format!(
                "need at least 8 radial nodes, got {}",
                self.radial_nodes
            )));
        }
        Ok(())
    }
}

/// `sin(x) / x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `psi_R(l, e) = int_-R^R E_l(r e) dr = 2R sinc(pi R (l.e) / T)`.
pub fn psi_r(l: &ModeIndex, e: &[f64], radius: f64, box_half_width: f64) -> f64 {
    2.0 * radius * sinc(PI * radius * l.dot(e) / box_half_width)
}

/// Read access to the modes `B(l, m)` by flat grid index.
pub trait KernelModes {
    fn len(&self) -> usize;
    fn entry(&self, l: usize, m: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.len()).map(|m| self.entry(m, m)).collect()
    }
}

/// Fully materialized `N^d x N^d` kernel; only practical for small grids.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseKernel {
    len: usize,
    values: Vec<f64>,
}

impl DenseKernel {
    /// Memory guard: refuse more than this many entries.
    pub const MAX_ENTRIES: usize = 1 << 27;

    pub fn assemble(source: &impl KernelModes) -> Result<Self> {
        let len = source.len();
        if len * len > Self::MAX_ENTRIES {
            return Err(Error::OracleTooLarge(format!(
                "dense kernel with {len}^2 entries"
            )));
        }
        let mut values = vec![0.0; len * len];
        for (l, row) in values.chunks_mut(len).enumerate() {
            for (m, v) in row.iter_mut().enumerate() {
                *v = source.entry(l, m);
            }
        }
        Ok(Self { len, values })
    }

    pub fn from_values(len: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != len * len {
            return Err(Error::SizeMismatch {
                expected: len * len,
                found: values.len(),
            });
        }
        Ok(Self { len, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

impl KernelModes for DenseKernel {
    fn len(&self) -> usize {
        self.len
    }

    fn entry(&self, l: usize, m: usize) -> f64 {
        self.values[l * self.len + m]
    }
}

/// Unfiltered kernel in one of its storage forms.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    Factored(KernelFactors2D),
    Table(KernelTable3D),
    Dense(DenseKernel),
}

impl Kernel {
    /// Builds the natural representation for the grid dimension.
    pub fn build(grid: &GridSpec, spec: &KernelSpec) -> Result<Self> {
        spec.validate(grid)?;
        match spec.dim {
            2 => Ok(Kernel::Factored(KernelFactors2D::build(grid, spec)?)),
            _ => Ok(Kernel::Table(KernelTable3D::build(grid, spec)?)),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Kernel::Factored(_) => "factors2d",
            Kernel::Table(_) => "table3d",
            Kernel::Dense(_) => "dense",
        }
    }
}

/// Kernel with filter weights `B_sigma(l, m) = B(l, m) sigma(l) sigma(m)` attached.
///
/// For factored kernels the weights are folded into the factors; otherwise they are applied at
/// lookup. The diagonal `D_m = B_sigma(m, m)` feeding the loss term is precomputed.
#[derive(Debug, Clone)]
pub struct FilteredKernel {
    grid: GridSpec,
    weights: FilterWeights,
    sigma: Vec<f64>,
    diagonal: Vec<f64>,
    repr: Kernel,
    table_modes: Vec<ModeIndex>,
}

impl FilteredKernel {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn weights(&self) -> &FilterWeights {
        &self.weights
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn repr(&self) -> &Kernel {
        &self.repr
    }

    pub fn factors(&self) -> Option<&KernelFactors2D> {
        match &self.repr {
            Kernel::Factored(f) => Some(f),
            _ => None,
        }
    }

    pub fn table(&self) -> Option<&KernelTable3D> {
        match &self.repr {
            Kernel::Table(t) => Some(t),
            _ => None,
        }
    }

    /// Materializes every `B_sigma(l, m)`.
    pub fn to_dense(&self) -> Result<DenseKernel> {
        DenseKernel::assemble(self)
    }
}

impl KernelModes for FilteredKernel {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn entry(&self, l: usize, m: usize) -> f64 {
        match &self.repr {
            Kernel::Factored(f) => f.entry(l, m),
            Kernel::Table(t) => {
                let (kl, km) = (self.table_modes[l], self.table_modes[m]);
                self.sigma[l] * self.sigma[m] * t.lookup((kl + km).norm_sq(), (kl - km).norm_sq())
            }
            Kernel::Dense(d) => self.sigma[l] * self.sigma[m] * d.entry(l, m),
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diagonal.clone()
    }
}

/// Attaches filter weights to a kernel.
pub fn apply_filter(grid: &GridSpec, kernel: Kernel, weights: &FilterWeights) -> Result<FilteredKernel> {
    let sigma = weights.per_mode(grid)?;
    let repr = match kernel {
        Kernel::Factored(f) => {
            f.check_grid(grid)?;
            Kernel::Factored(f.filtered(&sigma))
        }
        Kernel::Table(t) => {
            t.check_grid(grid)?;
            Kernel::Table(t)
        }
        Kernel::Dense(d) => {
            grid.check_len(d.len())?;
            Kernel::Dense(d)
        }
    };
    let table_modes = match &repr {
        Kernel::Table(_) => grid.mode_indices().collect(),
        _ => Vec::new(),
    };
    let mut filtered = FilteredKernel {
        grid: grid.clone(),
        weights: weights.clone(),
        sigma,
        diagonal: Vec::new(),
        repr,
        table_modes,
    };
    filtered.diagonal = (0..grid.len()).map(|m| filtered.entry(m, m)).collect();
    Ok(filtered)
}

/// Builds the kernel for `spec` and applies `spec.filter`.
pub fn build_filtered(grid: &GridSpec, spec: &KernelSpec) -> Result<FilteredKernel> {
    let kernel = Kernel::build(grid, spec)?;
    apply_filter(grid, kernel, &FilterWeights::for_grid(spec.filter, grid)?)
}
