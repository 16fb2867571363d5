//! `efm verify`: the small-grid oracle suite.
//!
//! Every check records the measured quantity and its threshold so the JSON report can be read
//! without rerunning anything. `tamper` negates one row of every kernel before use, which must
//! make the symmetry and positivity checks fail.

use efm_core::collision::eval_collision_direct;
use efm_core::dvm::{build_a, build_g, g_slice, q_dvm};
use efm_core::filters::smoothing_error_1d;
use efm_core::kernel::{apply_filter, Kernel, KernelModes, KernelSpec};
use efm_core::{
    CollisionOperator, Complex64, FilterKind, FilterWeights, FilteredKernel, GridSpec, KernelForm, MethodVariant,
    Transform,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    /// The bound `measured` is compared against; see `relation`.
    pub threshold: f64,
    pub relation: &'static str,
}

impl Check {
    fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured <= threshold,
            measured,
            threshold,
            relation: "<=",
        }
    }

    fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured >= threshold,
            measured,
            threshold,
            relation: ">=",
        }
    }

    fn below(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured < threshold,
            measured,
            threshold,
            relation: "<",
        }
    }

    fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Vec<Self> {
        let name = name.into();
        vec![
            Self::at_least(format!("{name} (lower)"), measured, lo),
            Self::at_most(format!("{name} (upper)"), measured, hi),
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub tampered: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Random states drawn for each oracle comparison.
pub const RANDOM_STATES: usize = 20;

struct Suite {
    rng: ChaCha8Rng,
    tamper: bool,
    checks: Vec<Check>,
}

fn grid(dim: usize, modes: usize) -> Result<GridSpec, CliError> {
    let form = if dim == 2 { KernelForm::Carleman } else { KernelForm::Classical };
    Ok(GridSpec::with_defaults(dim, modes, 6.0, form)?)
}

fn rel_max(a: impl Iterator<Item = f64>, scale: f64) -> f64 {
    a.fold(0.0, f64::max) / scale.max(f64::MIN_POSITIVE)
}

impl Suite {
    fn kernel(&self, grid: &GridSpec, filter: FilterKind) -> Result<FilteredKernel, CliError> {
        let spec = KernelSpec::for_grid(grid, filter)?;
        let weights = FilterWeights::for_grid(filter, grid)?;
        let kernel = Kernel::build(grid, &spec)?;
        if !self.tamper {
            return Ok(apply_filter(grid, kernel, &weights)?);
        }
        // negate the row of one nonzero mode
        let plain = apply_filter(grid, kernel, &FilterWeights::for_grid(FilterKind::None, grid)?)?;
        let mut dense = plain.to_dense()?;
        let len = grid.len();
        let row = (grid.zero_index() + 1) % len;
        dense.values_mut()[row * len..(row + 1) * len]
            .iter_mut()
            .for_each(|v| *v = -*v);
        Ok(apply_filter(grid, Kernel::Dense(dense), &weights)?)
    }

    fn values(&mut self, grid: &GridSpec, floor: f64) -> Vec<f64> {
        (0..grid.len())
            .map(|_| if self.rng.gen_bool(0.1) { floor } else { floor + self.rng.gen::<f64>() })
            .collect()
    }

    fn symmetry(&mut self) -> Result<(), CliError> {
        for (dim, modes) in [(2, 9), (3, 5)] {
            let g = grid(dim, modes)?;
            let k = self.kernel(&g, FilterKind::Jackson)?;
            let mut worst: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for l in 0..g.len() {
                for m in 0..g.len() {
                    let b = k.entry(l, m);
                    scale = scale.max(b.abs());
                    worst = worst.max((b - k.entry(m, l)).abs());
                    worst = worst.max((b - k.entry(g.negated_index(l), g.negated_index(m))).abs());
                }
            }
            self.checks
                .push(Check::at_most(format!("kernel symmetry {dim}D N={modes}"), worst / scale, 1e-12));
        }
        Ok(())
    }

    fn filter_kernels(&mut self) -> Result<(), CliError> {
        for kind in [FilterKind::Jackson, FilterKind::Fejer] {
            for modes in [5, 9, 17, 33] {
                let cert = FilterWeights::new(kind, modes)?.certify_kernel_nonnegative(1, 64)?;
                self.checks
                    .push(Check::at_least(format!("{kind} kernel minimum N={modes}"), cert.min_value, -1e-12));
            }
        }
        Ok(())
    }

    fn g_positivity(&mut self) -> Result<(), CliError> {
        for (dim, modes) in [(2, 5), (2, 7), (2, 9), (3, 5)] {
            let g = grid(dim, modes)?;
            for filter in [FilterKind::Jackson, FilterKind::Fejer] {
                let (min, _, _) = build_g(&g, &self.kernel(&g, filter)?)?.min();
                self.checks
                    .push(Check::at_least(format!("{filter} G minimum {dim}D N={modes}"), min, -1e-12));
            }
        }
        let g = grid(2, 9)?;
        let (min, _, _) = build_g(&g, &self.kernel(&g, FilterKind::None)?)?.min();
        self.checks
            .push(Check::below("unfiltered G minimum 2D N=9", min, 0.0));

        let g = grid(2, 31)?;
        let t = g.box_half_width();
        let ys: Vec<[f64; 3]> = (0..=200)
            .map(|i| [-t + 2.0 * t * i as f64 / 200.0, 0.0, 0.0])
            .collect();
        let slice = g_slice(&g, &self.kernel(&g, FilterKind::None)?, [t / 2.0, t / 2.0, 0.0], &ys)?;
        let min = slice.iter().copied().fold(f64::INFINITY, f64::min);
        self.checks
            .push(Check::below("unfiltered G slice minimum 2D N=31", min, 0.0));
        Ok(())
    }

    fn dvm_equivalence(&mut self) -> Result<(), CliError> {
        for (dim, modes) in [(2, 5), (2, 9), (3, 5)] {
            let g = grid(dim, modes)?;
            let kernel = self.kernel(&g, FilterKind::Jackson)?;
            let coeffs = build_a(&g, &build_g(&g, &kernel)?)?;
            let op = CollisionOperator::new(kernel.clone(), MethodVariant::Efm)?;
            let transform = Transform::new(&g);
            let mut worst: f64 = 0.0;
            let mut mass: f64 = 0.0;
            for _ in 0..RANDOM_STATES {
                let values = self.values(&g, 0.0);
                let modes_in = transform.forward(&values)?.modes;
                let spectral = transform.inverse_complex(&op.eval(&modes_in)?)?;
                let dvm = q_dvm(&values, &coeffs)?;
                let scale = spectral.iter().map(|c| c.norm()).fold(0.0, f64::max);
                worst = worst.max(rel_max(dvm.iter().zip(&spectral).map(|(a, b)| (b - a).norm()), scale));
                mass = mass.max(dvm.iter().sum::<f64>().abs() / scale.max(f64::MIN_POSITIVE));
            }
            self.checks
                .push(Check::at_most(format!("EFM vs quadruple sum {dim}D N={modes}"), worst, 1e-10));
            self.checks
                .push(Check::at_most(format!("quadruple sum mass {dim}D N={modes}"), mass, 1e-12 * g.len() as f64));
        }
        Ok(())
    }

    fn entropy(&mut self) -> Result<(), CliError> {
        let g = grid(2, 5)?;
        let coeffs = build_a(&g, &build_g(&g, &self.kernel(&g, FilterKind::Jackson)?)?)?;
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..100 {
            let values = self.values(&g, 1e-3);
            let q = q_dvm(&values, &coeffs)?;
            worst = worst.max(q.iter().zip(&values).map(|(q, f)| q * f.ln()).sum());
        }
        self.checks
            .push(Check::at_most("entropy production 2D N=5", worst, 1e-12));
        Ok(())
    }

    fn fast_direct(&mut self) -> Result<(), CliError> {
        for (dim, modes) in [(2, 9), (2, 17), (3, 5)] {
            let g = grid(dim, modes)?;
            for variant in MethodVariant::ALL {
                let op = CollisionOperator::new(self.kernel(&g, variant.filter())?, variant)?;
                let mut worst: f64 = 0.0;
                let mut mean_mode: f64 = 0.0;
                for _ in 0..3 {
                    let values = self.values(&g, 0.0);
                    let f = Transform::new(&g).forward(&values)?.modes;
                    let fast = op.eval(&f)?;
                    let direct = eval_collision_direct(&g, op.kernel(), variant.indicator(), &f)?;
                    let scale = direct.iter().map(|c| c.norm()).fold(0.0, f64::max);
                    worst = worst.max(rel_max(fast.iter().zip(&direct).map(|(a, b)| (a - b).norm()), scale));
                    mean_mode = mean_mode.max(fast[g.zero_index()].norm() / scale.max(f64::MIN_POSITIVE));
                }
                self.checks
                    .push(Check::at_most(format!("{variant} fast vs direct {dim}D N={modes}"), worst, 1e-10));
                self.checks
                    .push(Check::at_most(format!("{variant} mean mode {dim}D N={modes}"), mean_mode, 1e-12));
            }
        }
        Ok(())
    }

    fn indicator(&mut self) -> Result<(), CliError> {
        // the strict indicator never wraps: a single high mode squared leaves the grid
        let g = grid(2, 9)?;
        let op = CollisionOperator::new(self.kernel(&g, FilterKind::None)?, MethodVariant::Fgm)?;
        let mut f = vec![Complex64::default(); g.len()];
        f[g.len() - 1] = Complex64::new(1.0, 0.0);
        let gain = op.gain(&f, &f)?;
        let scale = op.kernel().diagonal().iter().copied().fold(0.0, f64::max);
        let leaked = rel_max(gain.iter().map(|c| c.norm()), scale);
        self.checks
            .push(Check::at_most("strict indicator drops out-of-range sums", leaked, 1e-14));
        Ok(())
    }

    fn smoothing_order(&mut self) -> Result<(), CliError> {
        let f = |x: f64| (std::f64::consts::PI * x).sin().exp();
        let ladder = [16usize, 32, 64, 128];
        let errors: Vec<f64> = ladder
            .iter()
            .map(|&n| Ok(smoothing_error_1d(&FilterWeights::new(FilterKind::Jackson, 2 * n + 1)?, f)))
            .collect::<Result<_, CliError>>()?;
        let slope = log_slope(&ladder, &errors);
        self.checks
            .extend(Check::within("Jackson smoothing slope", slope, -2.3, -1.7));
        Ok(())
    }
}

/// Least-squares slope of `log e` against `log n`.
pub fn log_slope(n: &[usize], e: &[f64]) -> f64 {
    let x: Vec<f64> = n.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = e.iter().map(|e| e.ln()).collect();
    let k = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / k, y.iter().sum::<f64>() / k);
    let num: f64 = x.iter().zip(&y).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = x.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

pub fn cmd_verify(seed: u64, tamper: bool) -> Result<VerifyReport, CliError> {
    let mut suite = Suite {
        rng: ChaCha8Rng::seed_from_u64(seed),
        tamper,
        checks: Vec::new(),
    };
    suite.symmetry()?;
    suite.filter_kernels()?;
    suite.g_positivity()?;
    suite.dvm_equivalence()?;
    suite.entropy()?;
    suite.fast_direct()?;
    suite.indicator()?;
    suite.smoothing_order()?;
    Ok(VerifyReport {
        seed,
        tampered: tamper,
        checks: suite.checks,
    })
}
