//! Spectral solvers for the space-homogeneous Boltzmann equation with Maxwell molecules.
//!
//! Three discretizations of the collision operator share one evaluator:
//!
//! - the Fourier Galerkin method (strict frequency indicator, zero-padded convolutions),
//! - the Fourier collocation method (aliased indicator, length-`N` circular convolutions),
//! - the entropic Fourier method, which is the collocation method with a modified Jackson
//!   filter applied to the kernel modes. Its point values evolve as a discrete velocity model
//!   with non-negative coefficients, so positivity, mass conservation and a discrete
//!   H-theorem hold.
//!
//! A Fejér-filtered variant of the entropic method is included as a more dissipative
//! positivity-preserving comparison.
//!
//! The [`dvm`] module rebuilds the discrete-velocity coefficients by brute force on small grids
//! and is used to cross-check the spectral evaluators.

pub mod collision;
pub mod diagnostics;
pub mod dvm;
mod error;
pub(crate) mod fft;
pub mod filters;
pub mod grid;
pub mod kernel;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod timestepper;

pub use collision::{CollisionOperator, Indicator, MethodVariant};
pub use error::{Error, Result};
pub use filters::{FilterKind, FilterWeights};
pub use grid::{GridSpec, KernelForm, ModeIndex, SpectralState, Transform};
pub use kernel::{FilteredKernel, Kernel, KernelSpec, MoleculeModel};
pub use problems::{InitMode, Problem};
pub use solver::{Simulation, SimulationSetup};
pub use timestepper::TimeSpec;

pub use num_complex::Complex64;
