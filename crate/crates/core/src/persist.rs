//! On-disk solution directories.
//!
//! A directory holds `metadata.json` (configuration echo, solver metadata and
//! a SHA-256 digest per field file) plus one `u_<j>.csv` per field with
//! columns `ix,iy,x,y,kind,value`. Loading recomputes every digest and checks
//! the node list against the grid rebuilt from the stored spec.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, GridSpec, NodeKind};
use crate::toda::{Boundary, GridSolution, SolverMeta};
use crate::weights::WeightSpec;

pub const METADATA_FILE: &str = "metadata.json";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionMetadata {
    pub format_version: u32,
    pub r: usize,
    pub weight: WeightSpec,
    pub grid: GridSpec,
    pub boundary: Boundary,
    pub node_count: usize,
    pub n_interior: usize,
    pub meta: SolverMeta,
    pub files: Vec<FileDigest>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldRow {
    ix: i64,
    iy: i64,
    x: f64,
    y: f64,
    kind: NodeKind,
    value: f64,
}

fn field_name(j: usize) -> String {
    format!("u_{j}.csv")
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn integrity(path: &Path, reason: impl Into<String>) -> Error {
    Error::Integrity {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes `sol` into `dir` (created if missing) and returns the paths
/// written, metadata last.
pub fn save_solution(sol: &GridSolution, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut files = Vec::new();
    for (idx, field) in sol.u.iter().enumerate() {
        let name = field_name(idx + 1);
        let mut w = csv::Writer::from_writer(Vec::new());
        for (k, n) in sol.grid.nodes().iter().enumerate() {
            w.serialize(FieldRow {
                ix: n.ix,
                iy: n.iy,
                x: n.x,
                y: n.y,
                kind: sol.grid.kind(k),
                value: field[k],
            })?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        let path = dir.join(&name);
        write_atomic(&path, &bytes)?;
        files.push(FileDigest {
            name,
            sha256: sha256_hex(&bytes),
        });
        written.push(path);
    }
    let meta = SolutionMetadata {
        format_version: FORMAT_VERSION,
        r: sol.r,
        weight: sol.weight.clone(),
        grid: sol.grid.spec(),
        boundary: sol.boundary.clone(),
        node_count: sol.grid.node_count(),
        n_interior: sol.grid.n_interior(),
        meta: sol.meta.clone(),
        files,
    };
    let path = dir.join(METADATA_FILE);
    write_atomic(&path, &serde_json::to_vec_pretty(&meta)?)?;
    written.push(path);
    Ok(written)
}

pub fn read_metadata(dir: &Path) -> Result<SolutionMetadata> {
    let path = dir.join(METADATA_FILE);
    let bytes = fs::read(&path)?;
    let meta: SolutionMetadata = serde_json::from_slice(&bytes)?;
    if meta.format_version != FORMAT_VERSION {
        return Err(integrity(
            &path,
            format!("unsupported format version {}", meta.format_version),
        ));
    }
    Ok(meta)
}

/// Loads a directory written by [`save_solution`], failing with
/// [`Error::Integrity`] on any digest, shape or node mismatch.
pub fn load_solution(dir: &Path) -> Result<GridSolution> {
    let meta = read_metadata(dir)?;
    let grid = Grid2D::new(&meta.grid)?;
    let meta_path = dir.join(METADATA_FILE);
    if grid.node_count() != meta.node_count || grid.n_interior() != meta.n_interior {
        return Err(integrity(&meta_path, "stored node counts do not match the grid spec"));
    }
    if meta.r < 2 || meta.files.len() != meta.r - 1 {
        return Err(integrity(
            &meta_path,
            format!("{} field files listed for r = {}", meta.files.len(), meta.r),
        ));
    }
    let mut u = Vec::with_capacity(meta.r - 1);
    for (idx, fd) in meta.files.iter().enumerate() {
        if fd.name != field_name(idx + 1) {
            return Err(integrity(&meta_path, format!("unexpected file name {}", fd.name)));
        }
        let path = dir.join(&fd.name);
        let bytes = fs::read(&path)?;
        let digest = sha256_hex(&bytes);
        if digest != fd.sha256 {
            return Err(integrity(
                &path,
                format!("sha256 {digest} does not match recorded {}", fd.sha256),
            ));
        }
        let mut rdr = csv::Reader::from_reader(bytes.as_slice());
        let mut values = Vec::with_capacity(grid.node_count());
        for (k, row) in rdr.deserialize::<FieldRow>().enumerate() {
            let row = row?;
            if k >= grid.node_count() {
                return Err(integrity(&path, "more rows than grid nodes"));
            }
            let n = grid.node(k);
            if (row.ix, row.iy) != (n.ix, n.iy) || row.kind != grid.kind(k) {
                return Err(integrity(&path, format!("row {k} does not match grid node {k}")));
            }
            values.push(row.value);
        }
        if values.len() != grid.node_count() {
            return Err(integrity(
                &path,
                format!("{} rows for {} nodes", values.len(), grid.node_count()),
            ));
        }
        u.push(values);
    }
    let node_weights = meta.weight.at_nodes(&grid, meta.r)?;
    Ok(GridSolution {
        r: meta.r,
        grid,
        weight: meta.weight,
        node_weights,
        boundary: meta.boundary,
        u,
        meta: meta.meta,
    })
}
