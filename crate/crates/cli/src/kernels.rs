//! `efm kernel`: build and persist kernels in the cache directory.

use std::path::{Path, PathBuf};

use efm_core::kernel::{cache_path, kernel_cache_io, CacheStatus, KernelSpec, MoleculeModel};
use efm_core::{FilterKind, GridSpec};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct KernelEntry {
    pub dim: usize,
    pub modes: usize,
    /// `M` in 2D, `M_r` in 3D.
    pub nodes: usize,
    pub status: &'static str,
    pub path: PathBuf,
}

fn status_name(status: CacheStatus) -> &'static str {
    match status {
        CacheStatus::Hit => "hit",
        CacheStatus::Miss => "built",
        CacheStatus::Rebuilt => "rebuilt",
    }
}

/// Ensures a cached kernel exists for every `(modes, nodes)` pair; existing valid entries are
/// left untouched.
pub fn cmd_kernel(
    dir: &Path,
    dim: usize,
    radius: f64,
    modes: &[usize],
    nodes: &[usize],
) -> Result<Vec<KernelEntry>, CliError> {
    let model = MoleculeModel::for_dim(dim).map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = Vec::new();
    for &n in modes {
        let grid = GridSpec::with_defaults(dim, n, radius, model.form())?;
        for &m in nodes {
            let mut spec = KernelSpec::for_grid(&grid, FilterKind::None)?;
            if dim == 2 {
                spec = spec.with_angular_nodes(m);
            } else {
                spec = spec.with_radial_nodes(m);
            }
            let (_, status) = kernel_cache_io(dir, &grid, &spec)?;
            let entry = KernelEntry {
                dim,
                modes: n,
                nodes: m,
                status: status_name(status),
                path: cache_path(dir, &grid, &spec),
            };
            log::info!("{}D N = {n}, nodes = {m}: {}", dim, entry.status);
            out.push(entry);
        }
    }
    Ok(out)
}
