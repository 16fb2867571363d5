//! Velocity grid, Fourier mode set and the discrete Fourier transform pair.
//!
//! Nodes and modes share one layout: lexicographic over `(k_1, ..., k_d)` with every component
//! in `[-n, n]`, last component fastest. The node with index tuple `j` sits at velocity `h j`
//! with `h = 2T / N`, and `E_k(v) = exp(i pi k.v / T)`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fft::ModalFft;
use crate::{Error, Result};

/// Which form of the collision operator the kernel modes are derived from; it fixes the
/// dealiasing bound on the box half-width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    /// `T >= (3 sqrt 2 + 1) R / 4`.
    Carleman,
    /// `T >= (3 + sqrt 2) R / 4`.
    Classical,
}

impl KernelForm {
    pub fn dealiasing_factor(self) -> f64 {
        match self {
            KernelForm::Carleman => (3.0 * std::f64::consts::SQRT_2 + 1.0) / 4.0,
            KernelForm::Classical => (3.0 + std::f64::consts::SQRT_2) / 4.0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            KernelForm::Carleman => "Carleman-form",
            KernelForm::Classical => "classical-form",
        }
    }
}

/// A `d`-tuple of integer frequencies (or node offsets). Unused trailing components are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ModeIndex(pub [i64; 3]);

impl ModeIndex {
    pub fn new(components: &[i64]) -> Self {
        let mut k = [0; 3];
        k[..components.len()].copy_from_slice(components);
        ModeIndex(k)
    }

    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn dot(&self, e: &[f64]) -> f64 {
        self.0.iter().zip(e).map(|(&c, &x)| c as f64 * x).sum()
    }
}

impl std::ops::Add for ModeIndex {
    type Output = ModeIndex;
    fn add(self, rhs: ModeIndex) -> ModeIndex {
        ModeIndex([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl std::ops::Sub for ModeIndex {
    type Output = ModeIndex;
    fn sub(self, rhs: ModeIndex) -> ModeIndex {
        ModeIndex([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2]])
    }
}

impl std::ops::Neg for ModeIndex {
    type Output = ModeIndex;
    fn neg(self) -> ModeIndex {
        ModeIndex([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// Reduces every component of `l` into `[-n, n]` modulo `N = 2n + 1`.
pub fn symmetric_mod(l: &[i64], modes: usize) -> Result<ModeIndex> {
    if modes % 2 == 0 {
        return Err(Error::EvenModes(modes));
    }
    let n_modes = modes as i64;
    let half = n_modes / 2;
    let mut out = [0; 3];
    for (o, &c) in out.iter_mut().zip(l) {
        *o = (c + half).rem_euclid(n_modes) - half;
    }
    Ok(ModeIndex(out))
}

/// Parameters of the grid supplied by the user before validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub dim: usize,
    /// Modes per dimension as requested; even values are reduced to `N - 1`.
    pub modes: usize,
    pub radius: f64,
    /// Half-width `T` of the velocity box; defaults from the dealiasing bound.
    pub box_half_width: Option<f64>,
    pub form: KernelForm,
    /// Accept a box narrower than the dealiasing bound.
    pub allow_aliasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    requested_modes: usize,
    modes: usize,
    half: usize,
    box_half_width: f64,
    radius: f64,
    form: KernelForm,
}

impl GridSpec {
    pub fn new(config: GridConfig) -> Result<Self> {
        let GridConfig {
            dim,
            modes: requested_modes,
            radius,
            box_half_width,
            form,
            allow_aliasing,
        } = config;
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if requested_modes < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 modes per dimension, got {requested_modes}"
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidGrid(format!("radius must be positive, got {radius}")));
        }
        let box_half_width = box_half_width.unwrap_or_else(|| default_box_half_width(radius, form));
        if !(box_half_width.is_finite() && box_half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box half-width must be positive, got {box_half_width}"
            )));
        }
        let required = form.dealiasing_factor() * radius;
        if box_half_width < required && !allow_aliasing {
            return Err(Error::Aliasing {
                box_half_width,
                required,
                radius,
                form: form.name(),
            });
        }
        let modes = if requested_modes % 2 == 0 {
            requested_modes - 1
        } else {
            requested_modes
        };
        Ok(Self {
            dim,
            requested_modes,
            modes,
            half: modes / 2,
            box_half_width,
            radius,
            form,
        })
    }

    /// Grid with the default box half-width for `form`.
    pub fn with_defaults(dim: usize, modes: usize, radius: f64, form: KernelForm) -> Result<Self> {
        Self::new(GridConfig {
            dim,
            modes,
            radius,
            box_half_width: None,
            form,
            allow_aliasing: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn requested_modes(&self) -> usize {
        self.requested_modes
    }

    /// Odd number of modes per dimension actually used.
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn half(&self) -> usize {
        self.half
    }

    pub fn box_half_width(&self) -> f64 {
        self.box_half_width
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn form(&self) -> KernelForm {
        self.form
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.box_half_width / self.modes as f64
    }

    /// Quadrature weight `h^d` of one node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Number of nodes, equal to the number of modes.
    pub fn len(&self) -> usize {
        self.modes.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: &ModeIndex) -> bool {
        let n = self.half as i64;
        k.0[..self.dim].iter().all(|c| c.abs() <= n) && k.0[self.dim..].iter().all(|&c| c == 0)
    }

    pub fn index_of(&self, k: &ModeIndex) -> usize {
        debug_assert!(self.contains(k));
        let n = self.half as i64;
        k.0[..self.dim]
            .iter()
            .fold(0usize, |acc, &c| acc * self.modes + (c + n) as usize)
    }

    pub fn mode(&self, index: usize) -> ModeIndex {
        let n = self.half as i64;
        let mut rem = index;
        let mut k = [0i64; 3];
        for axis in (0..self.dim).rev() {
            k[axis] = (rem % self.modes) as i64 - n;
            rem /= self.modes;
        }
        ModeIndex(k)
    }

    pub fn mode_indices(&self) -> impl Iterator<Item = ModeIndex> + '_ {
        (0..self.len()).map(move |i| self.mode(i))
    }

    /// Flat index of `-k` given the flat index of `k`.
    pub fn negated_index(&self, index: usize) -> usize {
        self.len() - 1 - index
    }

    pub fn zero_index(&self) -> usize {
        (self.len() - 1) / 2
    }

    pub fn node(&self, index: usize) -> [f64; 3] {
        let h = self.spacing();
        let k = self.mode(index);
        [h * k.0[0] as f64, h * k.0[1] as f64, h * k.0[2] as f64]
    }

    pub fn nodes(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// `E_k(v) = exp(i pi k.v / T)`.
    pub fn plane_wave(&self, k: &ModeIndex, v: &[f64; 3]) -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::PI * k.dot(v) / self.box_half_width)
    }

    /// Checks that a mode or node vector has one entry per grid point.
    pub fn check_len(&self, found: usize) -> Result<()> {
        if found == self.len() {
            Ok(())
        } else {
            Err(Error::SizeMismatch {
                expected: self.len(),
                found,
            })
        }
    }
}

/// `ceil((3 sqrt 2 + 1) R / 4)` (Carleman) or `ceil((3 + sqrt 2) R / 4)` (classical), rounded up
/// to two decimals.
pub fn default_box_half_width(radius: f64, form: KernelForm) -> f64 {
    (form.dealiasing_factor() * radius * 100.0).ceil() / 100.0
}

/// Fourier coefficients `F_k` for `k` in `[-n, n]^d`, plus the simulation time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub modes: Vec<Complex64>,
    pub time: f64,
}

impl SpectralState {
    pub fn new(modes: Vec<Complex64>, time: f64) -> Self {
        Self { modes, time }
    }

    pub fn zero_mode(&self, grid: &GridSpec) -> Complex64 {
        self.modes[grid.zero_index()]
    }

    /// `max_k |F_-k - conj(F_k)| / max_k |F_k|`.
    pub fn hermitian_residue(&self, grid: &GridSpec) -> f64 {
        hermitian_residue(grid, &self.modes)
    }
}

pub(crate) fn hermitian_residue(grid: &GridSpec, modes: &[Complex64]) -> f64 {
    let scale = modes.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let half = modes.len() / 2 + 1;
    (0..half)
        .map(|i| (modes[grid.negated_index(i)] - modes[i].conj()).norm())
        .fold(0.0, f64::max)
        / scale
}

/// Relative tolerance on imaginary residues and Hermitian defects.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Forward and inverse discrete Fourier transforms on a grid.
pub struct Transform {
    grid: GridSpec,
    fft: ModalFft,
}

impl Transform {
    pub fn new(grid: &GridSpec) -> Self {
        Self {
            grid: grid.clone(),
            fft: ModalFft::new(grid.half(), grid.dim(), grid.modes()),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `F_k = N^-d sum_p F_p E_-k(p)`.
    pub fn forward(&self, values: &[f64]) -> Result<SpectralState> {
        self.grid.check_len(values.len())?;
        let complex: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let modes = self.fft.to_modes(self.fft.scatter(&complex));
        Ok(SpectralState::new(modes, 0.0))
    }

    /// Point values `F_r = sum_k F_k E_k(r)` without the realness check.
    pub fn inverse_complex(&self, modes: &[Complex64]) -> Result<Vec<Complex64>> {
        self.grid.check_len(modes.len())?;
        Ok(self.fft.gather(&self.fft.to_points(modes)))
    }

    /// `F_r = sum_k F_k E_k(r)`; rejects states whose imaginary residue exceeds
    /// [`HERMITIAN_TOLERANCE`] relative to the largest value.
    pub fn inverse(&self, state: &SpectralState) -> Result<Vec<f64>> {
        self.inverse_modes(&state.modes)
    }

    pub fn inverse_modes(&self, modes: &[Complex64]) -> Result<Vec<f64>> {
        let values = self.inverse_complex(modes)?;
        let scale = values.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let residue = values.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        if scale > 0.0 && residue > HERMITIAN_TOLERANCE * scale {
            return Err(Error::HermitianViolation(residue / scale));
        }
        Ok(values.into_iter().map(|c| c.re).collect())
    }
}

/// Drops every entry whose mode has a component equal to `-N/2` from data laid out over
/// `[-N/2, N/2 - 1]^d` (even `N`), giving data over the odd set `[-(N/2 - 1), N/2 - 1]^d`.
pub fn reduce_even_modes<T: Copy>(dim: usize, even_modes: usize, data: &[T]) -> Result<Vec<T>> {
    if even_modes % 2 != 0 || even_modes < 4 {
        return Err(Error::InvalidGrid(format!(
            "even-N reduction needs an even mode count >= 4, got {even_modes}"
        )));
    }
    let expected = even_modes.pow(dim as u32);
    if data.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            found: data.len(),
        });
    }
    Ok(data
        .iter()
        .enumerate()
        .filter(|&(flat, _)| {
            let mut rem = flat;
            (0..dim).all(|_| {
                let digit = rem % even_modes;
                rem /= even_modes;
                digit != 0
            })
        })
        .map(|(_, &v)| v)
        .collect())
}

/// Even-N reduction of a spectral state laid out over `[-N/2, N/2 - 1]^d`.
pub fn reduce_even_state(dim: usize, even_modes: usize, state: &SpectralState) -> Result<SpectralState> {
    Ok(SpectralState::new(
        reduce_even_modes(dim, even_modes, &state.modes)?,
        state.time,
    ))
}
