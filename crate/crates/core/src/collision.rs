//! Fourier-space collision operator for the FGM, FCM, EFM and Fejér-EFM variants.
//!
//! All variants evaluate
//! `Q_k = sum_{l,m} ind(l + m - k) (B*(l, m) - B*(m, m)) F_l F_m`
//! where `ind` is either the strict indicator (Galerkin) or its `N`-periodic version
//! (collocation), and `B*` is the kernel with the variant's filter weights attached.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fft::{next_fast_len, ModalFft};
use crate::filters::FilterKind;
use crate::grid::{hermitian_residue, symmetric_mod, GridSpec, ModeIndex};
use crate::kernel::{build_filtered, FilteredKernel, Kernel, KernelModes, KernelSpec, KernelTable3D};
use crate::problems::InitMode;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Indicator {
    /// `1(l + m - k)`: no wrap-around.
    Strict,
    /// `1_N(l + m - k)`: frequencies are summed modulo `N`.
    Aliased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodVariant {
    Fgm,
    Fcm,
    Efm,
    /// EFM with Fejér weights: a more dissipative positivity-preserving comparison method.
    EfmFejer,
}

impl MethodVariant {
    pub const ALL: [MethodVariant; 4] = [
        MethodVariant::Fgm,
        MethodVariant::Fcm,
        MethodVariant::Efm,
        MethodVariant::EfmFejer,
    ];

    pub fn indicator(self) -> Indicator {
        match self {
            MethodVariant::Fgm => Indicator::Strict,
            _ => Indicator::Aliased,
        }
    }

    pub fn filter(self) -> FilterKind {
        match self {
            MethodVariant::Fgm | MethodVariant::Fcm => FilterKind::None,
            MethodVariant::Efm => FilterKind::Jackson,
            MethodVariant::EfmFejer => FilterKind::Fejer,
        }
    }

    pub fn default_init(self) -> InitMode {
        match self {
            MethodVariant::Fgm | MethodVariant::Fcm => InitMode::Projection,
            MethodVariant::Efm | MethodVariant::EfmFejer => InitMode::Interpolation,
        }
    }

    pub fn is_entropic(self) -> bool {
        matches!(self, MethodVariant::Efm | MethodVariant::EfmFejer)
    }
}

impl fmt::Display for MethodVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodVariant::Fgm => "fgm",
            MethodVariant::Fcm => "fcm",
            MethodVariant::Efm => "efm",
            MethodVariant::EfmFejer => "efm-fejer",
        })
    }
}

impl FromStr for MethodVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fgm" => Ok(MethodVariant::Fgm),
            "fcm" => Ok(MethodVariant::Fcm),
            "efm" => Ok(MethodVariant::Efm),
            "efm-fejer" => Ok(MethodVariant::EfmFejer),
            other => Err(Error::Setup(format!(
                "unknown method `{other}` (expected fgm, fcm, efm or efm-fejer)"
            ))),
        }
    }
}

/// Gain evaluation strategy, chosen from the kernel representation.
#[derive(Debug)]
enum GainEngine {
    /// Sum of `2M` convolutions of factor-weighted coefficients.
    LowRank,
    /// Direct sum over `s = l + m` with one cached `Phi` row per `s`.
    Table(TableGain),
    /// Direct double sum over a materialized kernel.
    Dense,
}

#[derive(Debug)]
struct TableGain {
    modes: Vec<ModeIndex>,
    /// Preimages `s` (unreduced `l + m`) of each output mode `k`.
    preimages: Vec<Vec<ModeIndex>>,
}

/// Collision operator bound to a grid, a filtered kernel and a method variant.
#[derive(Debug)]
pub struct CollisionOperator {
    variant: MethodVariant,
    grid: GridSpec,
    kernel: FilteredKernel,
    conv: ModalFft,
    engine: GainEngine,
}

impl CollisionOperator {
    pub fn new(kernel: FilteredKernel, variant: MethodVariant) -> Result<Self> {
        if kernel.weights().kind() != variant.filter() {
            return Err(Error::Setup(format!(
                "{variant} needs a {} filter, kernel carries {}",
                variant.filter(),
                kernel.weights().kind()
            )));
        }
        let grid = kernel.grid().clone();
        let size = match variant.indicator() {
            Indicator::Aliased => grid.modes(),
            Indicator::Strict => next_fast_len(2 * grid.modes() - 1),
        };
        let conv = ModalFft::new(grid.half(), grid.dim(), size);
        let engine = match kernel.repr() {
            Kernel::Factored(_) => GainEngine::LowRank,
            Kernel::Table(_) => GainEngine::Table(TableGain::new(&grid, variant.indicator())),
            Kernel::Dense(_) => GainEngine::Dense,
        };
        Ok(Self {
            variant,
            grid,
            kernel,
            conv,
            engine,
        })
    }

    /// Builds the kernel for `grid` with default quadrature and the variant's filter.
    pub fn for_grid(grid: &GridSpec, variant: MethodVariant) -> Result<Self> {
        let spec = KernelSpec::for_grid(grid, variant.filter())?;
        Self::new(build_filtered(grid, &spec)?, variant)
    }

    pub fn variant(&self) -> MethodVariant {
        self.variant
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kernel(&self) -> &FilteredKernel {
        &self.kernel
    }

    /// `Q[F, F]` in Fourier space.
    pub fn eval(&self, modes: &[Complex64]) -> Result<Vec<Complex64>> {
        let (gain, loss) = self.split(modes)?;
        Ok(gain.iter().zip(&loss).map(|(g, l)| g - l).collect())
    }

    /// Gain and loss parts `(Q+, Q-)` with `Q = Q+ - Q-`.
    pub fn split(&self, modes: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        self.grid.check_len(modes.len())?;
        let gain = self.gain_quadratic(modes);
        let loss = self.loss(modes, modes)?;
        Ok((gain, loss))
    }

    /// Bilinear gain `sum ind(l + m - k) B*(l, m) a_l b_m`.
    pub fn gain(&self, a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
        self.grid.check_len(a.len())?;
        self.grid.check_len(b.len())?;
        Ok(match &self.engine {
            GainEngine::LowRank => self.low_rank_gain(a, b),
            GainEngine::Table(t) => t.gain(self.table(), &self.kernel, a, b, false),
            GainEngine::Dense => direct_gain(&self.grid, &self.kernel, self.variant.indicator(), a, b),
        })
    }

    /// Bilinear loss `sum ind(l + m - k) B*(m, m) a_l b_m`.
    pub fn loss(&self, a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
        self.grid.check_len(a.len())?;
        self.grid.check_len(b.len())?;
        let weighted: Vec<Complex64> = b
            .iter()
            .zip(self.kernel.diagonal())
            .map(|(b, d)| b * d)
            .collect();
        Ok(self.convolve(a, &weighted))
    }

    /// `sum_{l + m = k} a_l b_m` under the variant's indicator.
    pub fn convolve(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let pa = self.conv.to_points(a);
        let pb = self.conv.to_points(b);
        let product = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
        self.conv.to_modes(product)
    }

    fn gain_quadratic(&self, modes: &[Complex64]) -> Vec<Complex64> {
        match &self.engine {
            GainEngine::LowRank => self.low_rank_gain(modes, modes),
            GainEngine::Table(t) => {
                let hermitian = hermitian_residue(&self.grid, modes) <= 1e-13;
                t.gain(self.table(), &self.kernel, modes, modes, hermitian)
            }
            GainEngine::Dense => direct_gain(&self.grid, &self.kernel, self.variant.indicator(), modes, modes),
        }
    }

    fn table(&self) -> &KernelTable3D {
        self.kernel.table().expect("table engine implies a table kernel")
    }

    fn low_rank_gain(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let factors = self.kernel.factors().expect("low-rank engine implies factors");
        let same = std::ptr::eq(a, b) || a == b;
        let weighted = |f: &[f64], x: &[Complex64]| -> Vec<Complex64> {
            self.conv.to_points(&x.iter().zip(f).map(|(x, f)| x * f).collect::<Vec<_>>())
        };
        let len = self.conv.points_len();
        let points = (0..factors.nodes())
            .into_par_iter()
            .fold(
                || vec![Complex64::default(); len],
                |mut acc, t| {
                    let (p, q) = (factors.parallel(t), factors.perpendicular(t));
                    let pa = weighted(p, a);
                    let qa = weighted(q, a);
                    if same {
                        for ((acc, x), y) in acc.iter_mut().zip(&pa).zip(&qa) {
                            *acc += 2.0 * x * y;
                        }
                    } else {
                        let pb = weighted(p, b);
                        let qb = weighted(q, b);
                        for (j, acc) in acc.iter_mut().enumerate() {
                            *acc += pa[j] * qb[j] + qa[j] * pb[j];
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![Complex64::default(); len],
                |mut x, y| {
                    x.iter_mut().zip(&y).for_each(|(x, y)| *x += y);
                    x
                },
            );
        let mut gain = self.conv.to_modes(points);
        let w = factors.weight();
        gain.iter_mut().for_each(|g| *g *= w);
        gain
    }
}

impl TableGain {
    fn new(grid: &GridSpec, indicator: Indicator) -> Self {
        let n = grid.half() as i64;
        let modes_n = grid.modes() as i64;
        let modes: Vec<ModeIndex> = grid.mode_indices().collect();
        let shifts: &[i64] = match indicator {
            Indicator::Strict => &[0],
            Indicator::Aliased => &[-1, 0, 1],
        };
        let preimages = modes
            .iter()
            .map(|k| {
                let mut out = Vec::new();
                for &a in shifts {
                    for &b in shifts {
                        for &c in shifts {
                            let s = ModeIndex([k.0[0] + a * modes_n, k.0[1] + b * modes_n, k.0[2] + c * modes_n]);
                            if s.0.iter().all(|x| x.abs() <= 2 * n) {
                                out.push(s);
                            }
                        }
                    }
                }
                out
            })
            .collect();
        Self { modes, preimages }
    }

    /// Gain for the table kernel. With `hermitian` (and `a == b`) only half of the outputs are
    /// computed and each `s` sums only over ordered pairs `l <= m`.
    fn gain(
        &self,
        table: &KernelTable3D,
        kernel: &FilteredKernel,
        a: &[Complex64],
        b: &[Complex64],
        hermitian: bool,
    ) -> Vec<Complex64> {
        let sigma = kernel.sigma();
        let split = |x: &[Complex64]| -> (Vec<f64>, Vec<f64>) {
            x.iter().zip(sigma).map(|(x, s)| (x.re * s, x.im * s)).unzip()
        };
        let (ur, ui) = split(a);
        let symmetric = hermitian && (std::ptr::eq(a, b) || a == b);
        let (vr, vi) = if symmetric { (ur.clone(), ui.clone()) } else { split(b) };
        // stored at the index of -m so that m = s - l is read forwards as l runs upwards
        let (vr, vi): (Vec<f64>, Vec<f64>) = (vr.into_iter().rev().collect(), vi.into_iter().rev().collect());
        let n = table.half() as i64;
        let side = (2 * n + 1) as usize;
        let len = self.modes.len();
        let count = if symmetric { len / 2 + 1 } else { len };
        let index = |c1: i64, c2: i64, c3: i64| ((c1 + n) as usize * side + (c2 + n) as usize) * side + (c3 + n) as usize;
        let mut out: Vec<Complex64> = (0..count)
            .into_par_iter()
            .map_init(
                || vec![0.0; side],
                |weights, k| {
                    let mut acc_re = 0.0;
                    let mut acc_im = 0.0;
                    for s in &self.preimages[k] {
                        let row = table.row(s.norm_sq());
                        let [s1, s2, s3] = s.0;
                        let lo = |c: i64| (c - n).max(-n);
                        let hi = |c: i64| (c + n).min(n);
                        let (lo3, hi3) = (lo(s3), hi(s3));
                        let run = (hi3 - lo3 + 1) as usize;
                        for l1 in lo(s1)..=hi(s1) {
                            let d1 = 2 * l1 - s1;
                            for l2 in lo(s2)..=hi(s2) {
                                let d2 = 2 * l2 - s2;
                                let factor = if symmetric {
                                    match (d1, d2).cmp(&(0, 0)) {
                                        std::cmp::Ordering::Greater => continue,
                                        std::cmp::Ordering::Less => 2.0,
                                        std::cmp::Ordering::Equal => 0.0,
                                    }
                                } else {
                                    1.0
                                };
                                let base = d1 * d1 + d2 * d2;
                                let l_start = index(l1, l2, lo3);
                                let m_start = index(l1 - s1, l2 - s2, lo3 - s3);
                                let (ur, ui) = (&ur[l_start..l_start + run], &ui[l_start..l_start + run]);
                                let (vr, vi) = (&vr[m_start..m_start + run], &vi[m_start..m_start + run]);
                                let w = &mut weights[..run];
                                let mut d3 = 2 * lo3 - s3;
                                for w in w.iter_mut() {
                                    *w = row[(base + d3 * d3) as usize];
                                    d3 += 2;
                                }
                                if factor == 0.0 {
                                    // (d1, d2) = 0: pair each l3 with s3 - l3 once, d3 = 2 l3 - s3
                                    let mut d3 = 2 * lo3 - s3;
                                    for j in 0..run {
                                        if d3 > 0 {
                                            break;
                                        }
                                        w[j] *= if d3 < 0 { 2.0 } else { 1.0 };
                                        d3 += 2;
                                    }
                                    let stop = ((s3 - 2 * lo3) / 2 + 1).clamp(0, run as i64) as usize;
                                    w[stop..].iter_mut().for_each(|w| *w = 0.0);
                                }
                                let (pr, pi) = weighted_products(w, ur, ui, vr, vi);
                                let f = if factor == 0.0 { 1.0 } else { factor };
                                acc_re += f * pr;
                                acc_im += f * pi;
                            }
                        }
                    }
                    Complex64::new(acc_re, acc_im)
                },
            )
            .collect();
        if symmetric {
            // G_{-k} = conj(G_k) for Hermitian input; index of -k is len - 1 - k
            let half: Vec<Complex64> = out.clone();
            out.resize(len, Complex64::default());
            for k in count..len {
                out[k] = half[len - 1 - k].conj();
            }
        }
        out
    }
}

/// `sum_j w_j x_j y_j` for split complex `x` and `y`, with independent lanes so it vectorizes.
#[inline]
fn weighted_products(w: &[f64], xr: &[f64], xi: &[f64], yr: &[f64], yi: &[f64]) -> (f64, f64) {
    const LANES: usize = 4;
    let mut re = [0.0; LANES];
    let mut im = [0.0; LANES];
    let n = w.len();
    let (xr, xi, yr, yi) = (&xr[..n], &xi[..n], &yr[..n], &yi[..n]);
    let body = n / LANES * LANES;
    for c in (0..body).step_by(LANES) {
        for j in 0..LANES {
            let i = c + j;
            re[j] += w[i] * (xr[i] * yr[i] - xi[i] * yi[i]);
            im[j] += w[i] * (xr[i] * yi[i] + xi[i] * yr[i]);
        }
    }
    let (mut pr, mut pi) = ((re[0] + re[1]) + (re[2] + re[3]), (im[0] + im[1]) + (im[2] + im[3]));
    for i in body..n {
        pr += w[i] * (xr[i] * yr[i] - xi[i] * yi[i]);
        pi += w[i] * (xr[i] * yi[i] + xi[i] * yr[i]);
    }
    (pr, pi)
}

/// Gain by the direct `O(N^2d)` double sum over any kernel.
fn direct_gain(
    grid: &GridSpec,
    kernel: &impl KernelModes,
    indicator: Indicator,
    a: &[Complex64],
    b: &[Complex64],
) -> Vec<Complex64> {
    let modes: Vec<ModeIndex> = grid.mode_indices().collect();
    let mut out = vec![Complex64::default(); grid.len()];
    for (l, kl) in modes.iter().enumerate() {
        for (m, km) in modes.iter().enumerate() {
            if let Some(k) = target(grid, indicator, *kl + *km) {
                out[k] += kernel.entry(l, m) * a[l] * b[m];
            }
        }
    }
    out
}

fn target(grid: &GridSpec, indicator: Indicator, s: ModeIndex) -> Option<usize> {
    match indicator {
        Indicator::Strict => grid.contains(&s).then(|| grid.index_of(&s)),
        Indicator::Aliased => {
            let k = symmetric_mod(&s.0[..grid.dim()], grid.modes()).ok()?;
            Some(grid.index_of(&k))
        }
    }
}

/// `Q_k = sum_{l,m} ind(l + m - k) (B*(l, m) - B*(m, m)) F_l F_m` by brute force.
pub fn eval_collision_direct(
    grid: &GridSpec,
    kernel: &impl KernelModes,
    indicator: Indicator,
    modes: &[Complex64],
) -> Result<Vec<Complex64>> {
    grid.check_len(modes.len())?;
    grid.check_len(kernel.len())?;
    let diagonal = kernel.diagonal();
    let all: Vec<ModeIndex> = grid.mode_indices().collect();
    let mut out = vec![Complex64::default(); grid.len()];
    for (l, kl) in all.iter().enumerate() {
        for (m, km) in all.iter().enumerate() {
            if let Some(k) = target(grid, indicator, *kl + *km) {
                out[k] += (kernel.entry(l, m) - diagonal[m]) * modes[l] * modes[m];
            }
        }
    }
    Ok(out)
}

/// `(Q+, Q-)` for `op`; a convenience wrapper around [`CollisionOperator::split`].
pub fn gain_loss_split(op: &CollisionOperator, modes: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    op.split(modes)
}
