//! Moments, entropy, positivity error and relative error norms.

use serde::{Deserialize, Serialize};

use crate::grid::GridSpec;
use crate::{Error, Result};

/// Point values with `|F| <= ZERO_THRESHOLD` count as zero in the entropy.
pub const ZERO_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
    pub entropy: f64,
    /// Nodes with `F < -1e-14` skipped by the entropy sum.
    pub negative_nodes: usize,
    pub positivity_error: f64,
    pub min_value: f64,
}

impl DiagnosticsRecord {
    pub fn compute(grid: &GridSpec, values: &[f64], time: f64) -> Result<Self> {
        grid.check_len(values.len())?;
        let w = grid.cell_volume();
        let mut mass = 0.0;
        let mut momentum = [0.0; 3];
        let mut energy = 0.0;
        for (i, &f) in values.iter().enumerate() {
            let v = grid.node(i);
            mass += f;
            for (m, c) in momentum.iter_mut().zip(v) {
                *m += f * c;
            }
            energy += f * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        }
        let Entropy { value, negative_nodes } = entropy(grid, values);
        Ok(Self {
            time,
            mass: mass * w,
            momentum: momentum.map(|m| m * w),
            energy: energy * w,
            entropy: value,
            negative_nodes,
            positivity_error: positivity_error(values)?,
            min_value: values.iter().copied().fold(f64::INFINITY, f64::min),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropy {
    pub value: f64,
    pub negative_nodes: usize,
}

/// `eta = h^d sum F ln F` with `0 ln 0 = 0`; negative values are skipped and counted.
pub fn entropy(grid: &GridSpec, values: &[f64]) -> Entropy {
    let mut sum = 0.0;
    let mut negative_nodes = 0;
    for &f in values {
        if f.abs() <= ZERO_THRESHOLD {
            continue;
        }
        if f < 0.0 {
            negative_nodes += 1;
            continue;
        }
        sum += f * f.ln();
    }
    if negative_nodes > 0 {
        log::debug!("entropy skipped {negative_nodes} negative point values");
    }
    Entropy {
        value: grid.cell_volume() * sum,
        negative_nodes,
    }
}

/// `(sum |F| - sum F) / sum |F|`.
pub fn positivity_error(values: &[f64]) -> Result<f64> {
    let abs: f64 = values.iter().map(|f| f.abs()).sum();
    if abs == 0.0 {
        return Err(Error::ZeroState);
    }
    let plain: f64 = values.iter().sum();
    Ok((abs - plain) / abs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::L1, Norm::L2, Norm::Linf];

    pub fn apply(self, values: impl Iterator<Item = f64>) -> f64 {
        match self {
            Norm::L1 => values.map(f64::abs).sum(),
            Norm::L2 => values.map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Linf => values.map(f64::abs).fold(0.0, f64::max),
        }
    }
}

/// `||F - f||_p / ||f||_p` with plain sums over the nodes.
pub fn lp_relative_error(numeric: &[f64], exact: &[f64], norm: Norm) -> Result<f64> {
    if numeric.len() != exact.len() {
        return Err(Error::SizeMismatch {
            expected: exact.len(),
            found: numeric.len(),
        });
    }
    let denom = norm.apply(exact.iter().copied());
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(norm.apply(numeric.iter().zip(exact).map(|(a, b)| a - b)) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

impl ErrorNorms {
    pub fn compute(numeric: &[f64], exact: &[f64]) -> Result<Self> {
        Ok(Self {
            l1: lp_relative_error(numeric, exact, Norm::L1)?,
            l2: lp_relative_error(numeric, exact, Norm::L2)?,
            linf: lp_relative_error(numeric, exact, Norm::Linf)?,
        })
    }

    pub fn get(&self, norm: Norm) -> f64 {
        match norm {
            Norm::L1 => self.l1,
            Norm::L2 => self.l2,
            Norm::Linf => self.linf,
        }
    }
}

/// `log2(e_N / e_2N)` between consecutive rows of a doubling ladder.
pub fn convergence_rates(modes: &[usize], errors: &[f64]) -> Result<Vec<f64>> {
    if modes.len() != errors.len() {
        return Err(Error::Convergence(format!(
            "{} mode counts but {} errors",
            modes.len(),
            errors.len()
        )));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::Convergence(format!("errors must be positive, got {e}")));
    }
    if let Some(w) = modes.windows(2).find(|w| w[1] != 2 * w[0]) {
        return Err(Error::Convergence(format!("{} -> {} is not a doubling", w[0], w[1])));
    }
    Ok(errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::KernelForm;

    fn grid() -> GridSpec {
        GridSpec::with_defaults(2, 9, 6.0, KernelForm::Carleman).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let g = grid();
        let ones = vec![1.0; g.len()];
        assert_eq!(entropy(&g, &ones).value, 0.0);
        let e = vec![std::f64::consts::E; g.len()];
        let expect = (2.0 * g.box_half_width()).powi(2) * std::f64::consts::E;
        assert!((entropy(&g, &e).value - expect).abs() < 1e-12 * expect);
        let mut mixed = vec![1.0; g.len()];
        mixed[0] = 0.0;
        mixed[1] = -1e-15;
        mixed[2] = -0.5;
        let h = entropy(&g, &mixed);
        assert_eq!(h.negative_nodes, 1);
        assert_eq!(h.value, 0.0);
    }

    #[test]
    fn positivity_error_examples() {
        assert_eq!(positivity_error(&[1.0, 2.0, 0.0]).unwrap(), 0.0);
        assert_eq!(positivity_error(&[-1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(positivity_error(&[-1.0, 3.0]).unwrap(), 0.5);
        assert!(positivity_error(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn relative_error_examples() {
        let f = vec![1.0, -2.0, 3.0, 0.5];
        for norm in Norm::ALL {
            assert_eq!(lp_relative_error(&f, &f, norm).unwrap(), 0.0);
            let doubled: Vec<f64> = f.iter().map(|x| 2.0 * x).collect();
            assert!((lp_relative_error(&doubled, &f, norm).unwrap() - 1.0).abs() < 1e-15);
        }
        let mut bumped = f.clone();
        bumped[2] += 0.25;
        assert!((lp_relative_error(&bumped, &f, Norm::Linf).unwrap() - 0.25 / 3.0).abs() < 1e-15);
        assert!(lp_relative_error(&f, &[0.0; 4], Norm::L1).is_err());
    }

    #[test]
    fn rates() {
        assert_eq!(convergence_rates(&[16, 32], &[4e-3, 1e-3]).unwrap(), vec![2.0]);
        let r = convergence_rates(&[32, 64], &[1.72e-3, 5.54e-4]).unwrap();
        assert!((r[0] - 1.64).abs() < 1e-2);
        let r = convergence_rates(&[32, 64], &[1.42e-3, 4.07e-4]).unwrap();
        assert!((r[0] - 1.80).abs() < 1e-2);
        assert!(convergence_rates(&[16, 48], &[1.0, 0.5]).is_err());
        assert!(convergence_rates(&[16, 32], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn moments_of_sampled_maxwellian() {
        let g = GridSpec::with_defaults(2, 33, 6.0, KernelForm::Carleman).unwrap();
        let values: Vec<f64> = g
            .nodes()
            .map(|v| (-(v[0] * v[0] + v[1] * v[1]) / 2.0).exp() / (2.0 * std::f64::consts::PI))
            .collect();
        let r = DiagnosticsRecord::compute(&g, &values, 0.0).unwrap();
        assert!((r.mass - 1.0).abs() < 1e-8);
        assert!(r.momentum.iter().all(|m| m.abs() < 1e-14));
        assert!((r.energy - 2.0).abs() < 1e-8);
        assert_eq!(r.positivity_error, 0.0);
    }
}
