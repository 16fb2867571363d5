//! End-to-end runs: grid, kernel, initial data, time integration and diagnostics.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::collision::{CollisionOperator, MethodVariant};
use crate::diagnostics::{DiagnosticsRecord, ErrorNorms};
use crate::filters::FilterWeights;
use crate::grid::{GridConfig, GridSpec, SpectralState, Transform};
use crate::kernel::{apply_filter, kernel_cache_io, Kernel, KernelSpec};
use crate::problems::{initialize, sample, InitMode, Problem};
use crate::timestepper::{integrate, TimeSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSetup {
    pub problem: Problem,
    pub method: MethodVariant,
    pub grid: GridConfig,
    pub angular_nodes: usize,
    pub radial_nodes: usize,
    pub time: TimeSpec,
    pub init: InitMode,
    /// Mollifier width for discontinuous data; defaults to `h`.
    pub mollifier: Option<f64>,
    /// Directory for persisted kernels; kernels are rebuilt in memory when absent.
    pub kernel_cache: Option<PathBuf>,
}

impl SimulationSetup {
    /// Defaults for `problem` and `method` at `modes` per dimension with `R = 6`.
    pub fn new(problem: Problem, method: MethodVariant, modes: usize) -> Self {
        let form = crate::kernel::MoleculeModel::for_dim(problem.dim())
            .map(|m| m.form())
            .unwrap_or(crate::grid::KernelForm::Carleman);
        Self {
            problem,
            method,
            grid: GridConfig {
                dim: problem.dim(),
                modes,
                radius: 6.0,
                box_half_width: None,
                form,
                allow_aliasing: false,
            },
            angular_nodes: crate::kernel::DEFAULT_ANGULAR_NODES,
            radial_nodes: crate::kernel::DEFAULT_RADIAL_NODES,
            time: TimeSpec::default(),
            init: method.default_init(),
            mollifier: None,
            kernel_cache: None,
        }
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.time.t_end = t_end;
        self
    }

    pub fn with_init(mut self, init: InitMode) -> Self {
        self.init = init;
        self
    }

    pub fn with_angular_nodes(mut self, nodes: usize) -> Self {
        self.angular_nodes = nodes;
        self
    }
}

/// Final output of a run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: SpectralState,
    pub final_values: Vec<f64>,
    /// Exact solution at the nodes at the final time, when known.
    pub exact_values: Option<Vec<f64>>,
    pub errors: Option<ErrorNorms>,
    pub seconds: f64,
}

pub struct Simulation {
    setup: SimulationSetup,
    grid: GridSpec,
    transform: Transform,
    operator: CollisionOperator,
    initial: SpectralState,
}

impl Simulation {
    pub fn new(setup: SimulationSetup) -> Result<Self> {
        if setup.problem.dim() != setup.grid.dim {
            return Err(Error::Setup(format!(
                "{} needs d = {}, got d = {}",
                setup.problem.name(),
                setup.problem.dim(),
                setup.grid.dim
            )));
        }
        setup.time.validate()?;
        let grid = GridSpec::new(setup.grid)?;
        let spec = KernelSpec::for_grid(&grid, setup.method.filter())?
            .with_angular_nodes(setup.angular_nodes)
            .with_radial_nodes(setup.radial_nodes);
        let kernel = match &setup.kernel_cache {
            Some(dir) => kernel_cache_io(dir, &grid, &spec)?.0,
            None => Kernel::build(&grid, &spec)?,
        };
        let weights = FilterWeights::for_grid(spec.filter, &grid)?;
        let operator = CollisionOperator::new(apply_filter(&grid, kernel, &weights)?, setup.method)?;
        let initial = initialize(&setup.problem, &grid, setup.init, setup.mollifier)?;
        Ok(Self {
            transform: Transform::new(&grid),
            grid,
            operator,
            initial,
            setup,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn setup(&self) -> &SimulationSetup {
        &self.setup
    }

    pub fn operator(&self) -> &CollisionOperator {
        &self.operator
    }

    pub fn initial_state(&self) -> &SpectralState {
        &self.initial
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    /// Runs to `t_end`; `observe` sees every record together with the current point values.
    pub fn run_with<O>(&self, mut observe: O) -> Result<RunResult>
    where
        O: FnMut(&DiagnosticsRecord, &[f64]) -> Result<()>,
    {
        let start = Instant::now();
        let mut records = Vec::new();
        let mut rhs = |modes: &[num_complex::Complex64]| self.operator.eval(modes);
        let final_state = integrate(self.initial.clone(), &mut rhs, &self.setup.time, |_, state| {
            let values = self.transform.inverse(state)?;
            let record = DiagnosticsRecord::compute(&self.grid, &values, state.time)?;
            observe(&record, &values)?;
            records.push(record);
            Ok(())
        })?;
        let final_values = self.transform.inverse(&final_state)?;
        let t = final_state.time;
        let exact_values = self
            .setup
            .problem
            .has_exact_solution()
            .then(|| sample(&self.grid, |v| self.setup.problem.exact(t, v).unwrap_or(0.0)));
        let errors = exact_values
            .as_ref()
            .map(|exact| ErrorNorms::compute(&final_values, exact))
            .transpose()?;
        Ok(RunResult {
            records,
            final_state,
            final_values,
            exact_values,
            errors,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    pub fn run(&self) -> Result<RunResult> {
        self.run_with(|_, _| Ok(()))
    }
}

/// Point values along the `v_1` axis (other components zero), as `(v_1, F)` pairs.
pub fn slice_v1(grid: &GridSpec, values: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.check_len(values.len())?;
    let n = grid.half() as i64;
    Ok((-n..=n)
        .map(|j| {
            let k = crate::grid::ModeIndex::new(&[j, 0, 0][..grid.dim()]);
            let i = grid.index_of(&k);
            (grid.node(i)[0], values[i])
        })
        .collect())
}
