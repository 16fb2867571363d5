//! On-disk kernel cache.
//!
//! File layout (all integers little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 8 | magic `EFMKERN\0` |
//! | 4 | format version (`u32`) |
//! | 4 | header length `H` (`u32`) |
//! | H | UTF-8 JSON header: the [`CacheKey`] plus payload metadata |
//! | 8 x P | payload, `f64` |
//! | 32 | SHA-256 of everything above |
//!
//! Factored 2D payloads hold the `M` parallel factor vectors followed by the `M` perpendicular
//! ones, each in grid mode order. 3D payloads hold the `Phi` table row by row.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::grid::GridSpec;
use crate::kernel::{Kernel, KernelFactors2D, KernelSpec, KernelTable3D, MoleculeModel};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"EFMKERN\0";
const VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

/// Everything that determines the unfiltered kernel values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheKey {
    pub dim: usize,
    pub modes: usize,
    pub radius: f64,
    pub box_half_width: f64,
    pub model: MoleculeModel,
    /// `M` in 2D, `M_r` in 3D.
    pub nodes: usize,
}

impl CacheKey {
    pub fn new(grid: &GridSpec, spec: &KernelSpec) -> Self {
        Self {
            dim: spec.dim,
            modes: grid.modes(),
            radius: spec.radius,
            box_half_width: spec.box_half_width,
            model: spec.model,
            nodes: if spec.dim == 2 {
                spec.angular_nodes
            } else {
                spec.radial_nodes
            },
        }
    }

    pub fn file_name(&self) -> String {
        let json = serde_json::to_vec(self).expect("cache key serializes");
        let digest = Sha256::digest(&json);
        let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        format!("{}d-n{}-{hex}.kern", self.dim, self.modes)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    key: CacheKey,
    kind: String,
    weight: f64,
    payload_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    /// A file existed but was unreadable or failed verification.
    Rebuilt,
}

/// Loads the kernel for `spec` from `dir`, building and storing it when absent or corrupt.
pub fn kernel_cache_io(dir: &Path, grid: &GridSpec, spec: &KernelSpec) -> Result<(Kernel, CacheStatus)> {
    spec.validate(grid)?;
    let key = CacheKey::new(grid, spec);
    let path = dir.join(key.file_name());
    let mut status = CacheStatus::Miss;
    if path.exists() {
        match read_kernel(&path, &key) {
            Ok(kernel) => return Ok((kernel, CacheStatus::Hit)),
            Err(err) => {
                log::warn!("discarding kernel cache entry {}: {err}", path.display());
                status = CacheStatus::Rebuilt;
            }
        }
    }
    let kernel = Kernel::build(grid, spec)?;
    fs::create_dir_all(dir)?;
    write_kernel(&path, &key, &kernel)?;
    Ok((kernel, status))
}

pub fn cache_path(dir: &Path, grid: &GridSpec, spec: &KernelSpec) -> PathBuf {
    dir.join(CacheKey::new(grid, spec).file_name())
}

fn write_kernel(path: &Path, key: &CacheKey, kernel: &Kernel) -> Result<()> {
    let (kind, weight, payload): (&str, f64, Vec<f64>) = match kernel {
        Kernel::Factored(f) => {
            let mut payload = Vec::with_capacity(2 * f.nodes() * f.parallel(0).len());
            for t in 0..f.nodes() {
                payload.extend_from_slice(f.parallel(t));
            }
            for t in 0..f.nodes() {
                payload.extend_from_slice(f.perpendicular(t));
            }
            ("factors2d", f.weight(), payload)
        }
        Kernel::Table(t) => ("table3d", 1.0, t.values().to_vec()),
        Kernel::Dense(_) => return Err(Error::Cache("dense kernels are not cached".into())),
    };
    let header = serde_json::to_vec(&Header {
        key: key.clone(),
        kind: kind.to_string(),
        weight,
        payload_len: payload.len(),
    })
    .map_err(|e| Error::Cache(e.to_string()))?;

    let mut bytes = Vec::with_capacity(16 + header.len() + 8 * payload.len() + DIGEST_LEN);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(header.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&header);
    for v in &payload {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let digest = Sha256::digest(&bytes);
    bytes.extend_from_slice(&digest);

    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(&bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_kernel(path: &Path, key: &CacheKey) -> Result<Kernel> {
    let bytes = fs::read(path)?;
    let corrupt = |msg: &str| Error::Cache(msg.to_string());
    if bytes.len() < 16 + DIGEST_LEN || &bytes[..8] != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != digest {
        return Err(corrupt("checksum mismatch"));
    }
    let version = u32::from_le_bytes(body[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    let header_len = u32::from_le_bytes(body[12..16].try_into().unwrap()) as usize;
    let header_end = 16 + header_len;
    if body.len() < header_end {
        return Err(corrupt("truncated header"));
    }
    let header: Header =
        serde_json::from_slice(&body[16..header_end]).map_err(|e| Error::Cache(e.to_string()))?;
    if &header.key != key {
        return Err(corrupt("key mismatch"));
    }
    let raw = &body[header_end..];
    if raw.len() != 8 * header.payload_len {
        return Err(corrupt("payload length mismatch"));
    }
    let payload: Vec<f64> = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    match header.kind.as_str() {
        "factors2d" => {
            let nodes = key.nodes;
            if nodes == 0 || payload.len() % (2 * nodes) != 0 {
                return Err(corrupt("factor payload shape"));
            }
            let len = payload.len() / (2 * nodes);
            let mut vectors: Vec<Vec<f64>> = payload.chunks(len).map(<[f64]>::to_vec).collect();
            let perpendicular = vectors.split_off(nodes);
            Ok(Kernel::Factored(KernelFactors2D::from_parts(
                header.weight,
                vectors,
                perpendicular,
            )?))
        }
        "table3d" => Ok(Kernel::Table(KernelTable3D::from_parts(key.modes / 2, payload)?)),
        other => Err(Error::Cache(format!("unknown payload kind `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::FilterKind;
    use crate::grid::KernelForm;

    fn setup(dim: usize, modes: usize, radius: f64) -> (GridSpec, KernelSpec) {
        let form = if dim == 2 {
            KernelForm::Carleman
        } else {
            KernelForm::Classical
        };
        let g = GridSpec::with_defaults(dim, modes, radius, form).unwrap();
        let spec = KernelSpec::for_grid(&g, FilterKind::Jackson).unwrap();
        (g, spec)
    }

    #[test]
    fn roundtrip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        for dim in [2, 3] {
            let (g, spec) = setup(dim, 7, 6.0);
            let (built, status) = kernel_cache_io(dir.path(), &g, &spec).unwrap();
            assert_eq!(status, CacheStatus::Miss);
            let (loaded, status) = kernel_cache_io(dir.path(), &g, &spec).unwrap();
            assert_eq!(status, CacheStatus::Hit);
            assert_eq!(built, loaded);
        }
    }

    #[test]
    fn changed_radius_misses() {
        let dir = tempfile::tempdir().unwrap();
        let (g, spec) = setup(2, 7, 6.0);
        kernel_cache_io(dir.path(), &g, &spec).unwrap();
        let (g2, spec2) = setup(2, 7, 5.0);
        let (_, status) = kernel_cache_io(dir.path(), &g2, &spec2).unwrap();
        assert_eq!(status, CacheStatus::Miss);
        let spec3 = spec.clone().with_angular_nodes(3);
        let (_, status) = kernel_cache_io(dir.path(), &g, &spec3).unwrap();
        assert_eq!(status, CacheStatus::Miss);
    }

    #[test]
    fn corrupted_file_is_rebuilt() {
        let dir = tempfile::tempdir().unwrap();
        let (g, spec) = setup(2, 7, 6.0);
        let (built, _) = kernel_cache_io(dir.path(), &g, &spec).unwrap();
        let path = cache_path(dir.path(), &g, &spec);
        let mut bytes = fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        fs::write(&path, &bytes).unwrap();
        let (rebuilt, status) = kernel_cache_io(dir.path(), &g, &spec).unwrap();
        assert_eq!(status, CacheStatus::Rebuilt);
        assert_eq!(built, rebuilt);
        fs::write(&path, b"short").unwrap();
        let (_, status) = kernel_cache_io(dir.path(), &g, &spec).unwrap();
        assert_eq!(status, CacheStatus::Rebuilt);
        let (_, status) = kernel_cache_io(dir.path(), &g, &spec).unwrap();
        assert_eq!(status, CacheStatus::Hit);
    }
}
