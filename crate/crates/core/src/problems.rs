//! Benchmark problems: BKW exact solutions, bi-Gaussian and discontinuous initial data.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fft::ModalFft;
use crate::grid::{GridSpec, SpectralState, Transform};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// Point samples at the grid nodes (mollified first for discontinuous data).
    Interpolation,
    /// Fourier coefficients of the data on the box, truncated to the mode set.
    Projection,
}

impl fmt::Display for InitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitMode::Interpolation => "interpolation",
            InitMode::Projection => "projection",
        })
    }
}

impl FromStr for InitMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interpolation" => Ok(InitMode::Interpolation),
            "projection" => Ok(InitMode::Projection),
            other => Err(Error::Setup(format!("unknown initializer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Problem {
    Bkw2d,
    Bkw3d,
    #[serde(rename = "bigaussian2d")]
    BiGaussian2d { u1: [f64; 2], u2: [f64; 2] },
    Discontinuous2d { rho1: f64 },
}

impl Problem {
    pub fn bigaussian() -> Self {
        Problem::BiGaussian2d {
            u1: [-2.0, 0.0],
            u2: [2.0, 0.0],
        }
    }

    pub fn discontinuous() -> Self {
        Problem::Discontinuous2d { rho1: 1.2 }
    }

    /// Parses `bkw2d`, `bkw3d`, `bigaussian2d` or `discontinuous2d` with default parameters.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "bkw2d" => Ok(Problem::Bkw2d),
            "bkw3d" => Ok(Problem::Bkw3d),
            "bigaussian2d" => Ok(Problem::bigaussian()),
            "discontinuous2d" => Ok(Problem::discontinuous()),
            other => Err(Error::Setup(format!("unknown problem `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::Bkw2d => "bkw2d",
            Problem::Bkw3d => "bkw3d",
            Problem::BiGaussian2d { .. } => "bigaussian2d",
            Problem::Discontinuous2d { .. } => "discontinuous2d",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Problem::Bkw3d => 3,
            _ => 2,
        }
    }

    pub fn is_discontinuous(&self) -> bool {
        matches!(self, Problem::Discontinuous2d { .. })
    }

    pub fn has_exact_solution(&self) -> bool {
        matches!(self, Problem::Bkw2d | Problem::Bkw3d)
    }

    /// Initial density `f(0, v)`.
    pub fn initial(&self, v: &[f64; 3]) -> f64 {
        match *self {
            Problem::Bkw2d => bkw_2d(0.0, v),
            Problem::Bkw3d => bkw_3d(0.0, v),
            Problem::BiGaussian2d { u1, u2 } => bigaussian_2d(u1, u2, v),
            Problem::Discontinuous2d { rho1 } => discontinuous_2d(&DiscontinuousParams::derive(rho1), v),
        }
    }

    /// Exact density `f(t, v)` where known.
    pub fn exact(&self, t: f64, v: &[f64; 3]) -> Option<f64> {
        match self {
            Problem::Bkw2d => Some(bkw_2d(t, v)),
            Problem::Bkw3d => Some(bkw_3d(t, v)),
            _ => None,
        }
    }
}

/// `f = (2 pi S)^-1 exp(-|v|^2 / 2S) ((2S - 1)/S + (1 - S)/(2S^2) |v|^2)`, `S = 1 - exp(-t/8)/2`.
pub fn bkw_2d(t: f64, v: &[f64; 3]) -> f64 {
    let s = 1.0 - 0.5 * (-t / 8.0).exp();
    let r2 = v[0] * v[0] + v[1] * v[1];
    (2.0 * PI * s).recip() * (-r2 / (2.0 * s)).exp() * ((2.0 * s - 1.0) / s + (1.0 - s) / (2.0 * s * s) * r2)
}

/// `f = (2 pi S)^-3/2 exp(-|v|^2 / 2S) ((5S - 3)/(2S) + (1 - S)/(2S^2) |v|^2)`,
/// `S = 1 - 2 exp(-t/6)/5`.
pub fn bkw_3d(t: f64, v: &[f64; 3]) -> f64 {
    let s = 1.0 - 0.4 * (-t / 6.0).exp();
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    (2.0 * PI * s).powf(-1.5)
        * (-r2 / (2.0 * s)).exp()
        * ((5.0 * s - 3.0) / (2.0 * s) + (1.0 - s) / (2.0 * s * s) * r2)
}

pub fn bigaussian_2d(u1: [f64; 2], u2: [f64; 2], v: &[f64; 3]) -> f64 {
    let g = |u: [f64; 2]| (-((v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2)) / 2.0).exp();
    (g(u1) + g(u2)) / (4.0 * PI)
}

/// Densities and temperatures of the two half-plane Maxwellians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscontinuousParams {
    pub rho1: f64,
    pub rho2: f64,
    pub t1: f64,
    pub t2: f64,
}

impl DiscontinuousParams {
    /// Solves `(rho1 + rho2)/2 = 1`, `(rho1 T1 + rho2 T2)/2 = 1`, `rho1 sqrt(T1) = rho2 sqrt(T2)`:
    /// `rho2 = 2 - rho1`, `T1 = rho2 / rho1`, `T2 = rho1 / rho2`.
    pub fn derive(rho1: f64) -> Self {
        let rho2 = 2.0 - rho1;
        Self {
            rho1,
            rho2,
            t1: rho2 / rho1,
            t2: rho1 / rho2,
        }
    }

    /// Limits of the density as `v_1 -> 0+` and `v_1 -> 0-` at `v_2 = 0`.
    pub fn jump_limits(&self) -> (f64, f64) {
        (
            self.rho1 / (2.0 * PI * self.t1),
            self.rho2 / (2.0 * PI * self.t2),
        )
    }
}

/// Maxwellian with `(rho1, T1)` for `v_1 > 0`, `(rho2, T2)` for `v_1 < 0`, and the mean of the
/// two on the interface.
pub fn discontinuous_2d(p: &DiscontinuousParams, v: &[f64; 3]) -> f64 {
    let r2 = v[0] * v[0] + v[1] * v[1];
    let side = |rho: f64, t: f64| rho / (2.0 * PI * t) * (-r2 / (2.0 * t)).exp();
    if v[0] > 0.0 {
        side(p.rho1, p.t1)
    } else if v[0] < 0.0 {
        side(p.rho2, p.t2)
    } else {
        0.5 * (side(p.rho1, p.t1) + side(p.rho2, p.t2))
    }
}

/// Isotropic Gaussian of standard deviation `eps`, cut at `6 eps` and discretized on a stencil
/// of spacing `eps / 2`; weights sum to one.
#[derive(Debug, Clone)]
pub struct Mollifier {
    offsets: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl Mollifier {
    const STEPS_PER_SIGMA: i64 = 2;
    const CUTOFF_SIGMAS: i64 = 6;

    pub fn new(dim: usize, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::Setup(format!("mollifier width must be positive, got {eps}")));
        }
        let reach = Self::STEPS_PER_SIGMA * Self::CUTOFF_SIGMAS;
        let step = eps / Self::STEPS_PER_SIGMA as f64;
        let third = if dim == 3 { reach } else { 0 };
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        for i in -reach..=reach {
            for j in -reach..=reach {
                for k in -third..=third {
                    let y = [i as f64 * step, j as f64 * step, k as f64 * step];
                    let r2 = y.iter().map(|c| c * c).sum::<f64>();
                    if r2 <= (6.0 * eps).powi(2) {
                        offsets.push(y);
                        weights.push((-r2 / (2.0 * eps * eps)).exp());
                    }
                }
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { offsets, weights })
    }

    pub fn apply(&self, f: impl Fn(&[f64; 3]) -> f64, v: &[f64; 3]) -> f64 {
        self.offsets
            .iter()
            .zip(&self.weights)
            .map(|(y, w)| w * f(&[v[0] - y[0], v[1] - y[1], v[2] - y[2]]))
            .sum()
    }
}

/// Oversampling factor of the projection quadrature.
pub const PROJECTION_OVERSAMPLE: usize = 4;
/// Largest change of any coefficient between `4x` and `8x` oversampling, relative to the mean
/// mode, before the projection is declared unconverged.
pub const PROJECTION_TOLERANCE: f64 = 1e-2;

/// Point values of `f` at the nodes.
pub fn sample(grid: &GridSpec, f: impl Fn(&[f64; 3]) -> f64 + Sync) -> Vec<f64> {
    use rayon::prelude::*;
    (0..grid.len()).into_par_iter().map(|i| f(&grid.node(i))).collect()
}

/// Initial Fourier state for `problem`. `eps` is the mollifier width for discontinuous data
/// under interpolation (default `h`); it is ignored otherwise.
pub fn initialize(problem: &Problem, grid: &GridSpec, mode: InitMode, eps: Option<f64>) -> Result<SpectralState> {
    if problem.dim() != grid.dim() {
        return Err(Error::Setup(format!(
            "{} is a {}D problem but the grid is {}D",
            problem.name(),
            problem.dim(),
            grid.dim()
        )));
    }
    match mode {
        InitMode::Interpolation => {
            let values = interpolation_values(problem, grid, eps)?;
            Transform::new(grid).forward(&values)
        }
        InitMode::Projection => {
            let coarse = project(problem, grid, PROJECTION_OVERSAMPLE);
            let fine = project(problem, grid, 2 * PROJECTION_OVERSAMPLE);
            let scale = coarse[grid.zero_index()].norm();
            let change = coarse
                .iter()
                .zip(&fine)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if !(change <= PROJECTION_TOLERANCE * scale) {
                return Err(Error::Projection(format!(
                    "coefficients moved by {change:e} (mean mode {scale:e}) when doubling the oversampling"
                )));
            }
            Ok(SpectralState::new(coarse, 0.0))
        }
    }
}

/// Samples used by the interpolation initializer.
pub fn interpolation_values(problem: &Problem, grid: &GridSpec, eps: Option<f64>) -> Result<Vec<f64>> {
    if problem.is_discontinuous() {
        let eps = eps.unwrap_or_else(|| grid.spacing());
        let mollifier = Mollifier::new(grid.dim(), eps)?;
        Ok(sample(grid, |v| mollifier.apply(|w| problem.initial(w), v)))
    } else {
        Ok(sample(grid, |v| problem.initial(v)))
    }
}

/// Trapezoidal Fourier coefficients on `oversample * N` points per axis.
fn project(problem: &Problem, grid: &GridSpec, oversample: usize) -> Vec<Complex64> {
    use rayon::prelude::*;
    let size = oversample * grid.modes();
    let dim = grid.dim();
    let fft = ModalFft::new(grid.half(), dim, size);
    let h = 2.0 * grid.box_half_width() / size as f64;
    let coord = |j: usize| {
        let j = j as i64;
        let s = size as i64;
        (if j < s / 2 { j } else { j - s }) as f64 * h
    };
    let points: Vec<Complex64> = (0..fft.points_len())
        .into_par_iter()
        .map(|flat| {
            let mut v = [0.0; 3];
            let mut rem = flat;
            for axis in (0..dim).rev() {
                v[axis] = coord(rem % size);
                rem /= size;
            }
            Complex64::new(problem.initial(&v), 0.0)
        })
        .collect();
    fft.to_modes(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::KernelForm;
    use crate::quadrature::gauss_legendre;

    /// Composite Gauss–Legendre rule on `[a, b]` with `panels` panels of 16 nodes.
    fn composite(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let width = (b - a) / panels as f64;
        (0..panels)
            .flat_map(|p| {
                let (x, w) = gauss_legendre(16, a + p as f64 * width, a + (p + 1) as f64 * width);
                x.into_iter().zip(w)
            })
            .collect()
    }

    /// `int f dv` and the first moments over `[-L, L]^2`, split at `v_1 = 0`.
    fn moments_2d(f: impl Fn(&[f64; 3]) -> f64) -> [f64; 4] {
        let rule: Vec<(f64, f64)> = composite(-16.0, 0.0, 16)
            .into_iter()
            .chain(composite(0.0, 16.0, 16))
            .collect();
        let mut m = [0.0; 4];
        for &(x, wx) in &rule {
            for &(y, wy) in &rule {
                let v = [x, y, 0.0];
                let fw = f(&v) * wx * wy;
                m[0] += fw;
                m[1] += fw * x;
                m[2] += fw * y;
                m[3] += fw * (x * x + y * y) / 2.0;
            }
        }
        m
    }

    /// Radial moments `(mass, energy)` for isotropic densities in `dim` dimensions.
    fn radial_moments(dim: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let shell = if dim == 2 { 2.0 * PI } else { 4.0 * PI };
        let mut mass = 0.0;
        let mut energy = 0.0;
        for (r, w) in composite(0.0, 20.0, 40) {
            let g = shell * r.powi(dim as i32 - 1) * f(r) * w;
            mass += g;
            energy += g * r * r / 2.0;
        }
        (mass, energy)
    }

    #[test]
    fn bkw_2d_values() {
        assert_eq!(bkw_2d(0.0, &[0.0; 3]), 0.0);
        for t in [0.0, 0.5, 1.0] {
            let (mass, energy) = radial_moments(2, |r| bkw_2d(t, &[r, 0.0, 0.0]));
            assert!((mass - 1.0).abs() < 1e-8);
            assert!((energy - 1.0).abs() < 1e-8, "{energy}");
            let m = moments_2d(|v| bkw_2d(t, v));
            assert!(m[1].abs() < 1e-12 && m[2].abs() < 1e-12);
        }
        let v = [0.7, -1.1, 0.0];
        let maxwellian = (-(0.49 + 1.21) / 2.0f64).exp() / (2.0 * PI);
        assert!((bkw_2d(400.0, &v) - maxwellian).abs() < 1e-15);
    }

    #[test]
    fn bkw_3d_values() {
        assert!(bkw_3d(0.0, &[0.0; 3]).abs() < 1e-17);
        for t in [0.0, 0.5, 1.0] {
            let (mass, energy) = radial_moments(3, |r| bkw_3d(t, &[r, 0.0, 0.0]));
            assert!((mass - 1.0).abs() < 1e-8);
            assert!((energy - 1.5).abs() < 1e-8, "{energy}");
        }
        let v = [0.3, 0.4, -1.2];
        let r2: f64 = v.iter().map(|x| x * x).sum();
        let maxwellian = (2.0 * PI).powf(-1.5) * (-r2 / 2.0).exp();
        assert!((bkw_3d(600.0, &v) - maxwellian).abs() < 1e-15);
    }

    #[test]
    fn bigaussian_values() {
        let p = Problem::bigaussian();
        let v = [1.3, -0.4, 0.0];
        assert_eq!(p.initial(&v), p.initial(&[-1.3, 0.4, 0.0]));
        let expect = 2.0 * (-2.0f64).exp() / (4.0 * PI);
        assert!((p.initial(&[0.0; 3]) - expect).abs() < 1e-16);
        let m = moments_2d(|v| p.initial(v));
        assert!((m[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn discontinuous_parameters_match_moments() {
        let p = DiscontinuousParams::derive(1.2);
        assert!((p.rho2 - 0.8).abs() < 1e-15);
        assert!((p.t1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.t2 - 1.5).abs() < 1e-15);
        let m = moments_2d(|v| discontinuous_2d(&p, v));
        assert!((m[0] - 1.0).abs() < 1e-8, "mass {}", m[0]);
        assert!(m[1].abs() < 1e-8, "momentum {}", m[1]);
        assert!((m[3] - 1.0).abs() < 1e-8, "energy {}", m[3]);
        let (right, left) = p.jump_limits();
        assert!((right - left).abs() > 0.1);
    }

    fn grid2(modes: usize) -> GridSpec {
        GridSpec::with_defaults(2, modes, 6.0, KernelForm::Carleman).unwrap()
    }

    #[test]
    fn interpolation_samples_exactly() {
        let g = grid2(16);
        let state = initialize(&Problem::Bkw2d, &g, InitMode::Interpolation, None).unwrap();
        let values = Transform::new(&g).inverse(&state).unwrap();
        let exact = sample(&g, |v| bkw_2d(0.0, v));
        assert!(exact.iter().all(|&x| x >= 0.0));
        for (a, b) in values.iter().zip(&exact) {
            assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn projection_of_discontinuous_data_oscillates() {
        for modes in [16, 32] {
            let g = grid2(modes);
            let state = initialize(&Problem::discontinuous(), &g, InitMode::Projection, None).unwrap();
            let values = Transform::new(&g).inverse(&state).unwrap();
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(min < 0.0, "N = {modes}: min {min}");
        }
    }

    #[test]
    fn projection_of_smooth_data_is_accurate() {
        let g = grid2(32);
        let state = initialize(&Problem::Bkw2d, &g, InitMode::Projection, None).unwrap();
        // mean mode = mass / |D_T|, and the tails outside D_T are below 1e-12
        let mean = 1.0 / (2.0 * g.box_half_width()).powi(2);
        assert!((state.modes[g.zero_index()].re - mean).abs() < 1e-10 * mean);
        let values = Transform::new(&g).inverse(&state).unwrap();
        let exact = sample(&g, |v| bkw_2d(0.0, v));
        let err = lp_max(&values, &exact);
        assert!(err < 1e-3, "{err}");
    }

    fn lp_max(a: &[f64], b: &[f64]) -> f64 {
        let scale = b.iter().map(|x| x.abs()).fold(0.0, f64::max);
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn mollified_discontinuous_samples_are_nonnegative() {
        let g = grid2(32);
        let values = interpolation_values(&Problem::discontinuous(), &g, None).unwrap();
        assert!(values.iter().all(|&x| x >= 0.0));
        let mass: f64 = values.iter().sum::<f64>() * g.cell_volume();
        assert!((mass - 1.0).abs() < 1e-3);
    }

    #[test]
    fn mollifier_is_normalized_and_exact_on_linear_functions() {
        for dim in [2, 3] {
            let m = Mollifier::new(dim, 0.3).unwrap();
            let total: f64 = m.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-13);
            let v = [0.2, -0.5, 0.1];
            let lin = |w: &[f64; 3]| 1.0 + 2.0 * w[0] - w[1] + 0.5 * w[2];
            assert!((m.apply(lin, &v) - lin(&v)).abs() < 1e-13);
        }
        assert!(Mollifier::new(2, 0.0).is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let g = grid2(9);
        assert!(initialize(&Problem::Bkw3d, &g, InitMode::Interpolation, None).is_err());
    }
}
