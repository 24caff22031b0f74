use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::CliError;

/// Write through a temp file in the same directory plus an atomic rename,
/// so a failed run never leaves a partial artifact.
pub fn write_atomic(path: &Path, content: &[u8]) -> Result<(), CliError> {
    let tmp: PathBuf = path.with_extension(match path.extension() {
        Some(e) => format!("{}.tmp", e.to_string_lossy()),
        None => "tmp".to_string(),
    });
    let mut file = std::fs::File::create(&tmp)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", tmp.display())))?;
    file.write_all(content)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", tmp.display())))?;
    file.sync_all().ok();
    drop(file);
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::io(format!("cannot rename into {}: {e}", path.display())))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::io(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Shortest round-trip formatting; empty for missing values.
pub fn fmt_f64(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v}"),
        _ => String::new(),
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// OBJ export of a sampled grid: vertices after 3D projection, quad faces
/// between grid cells whose four corners all evaluated.
pub struct ObjData {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 4]>,
    /// Rows of the projection applied to ambient samples.
    pub basis: Vec<Vec<f64>>,
}

pub fn project_first3(samples: &[Vec<f64>]) -> (Vec<[f64; 3]>, Vec<Vec<f64>>) {
    let dim = samples.first().map_or(3, |s| s.len());
    let mut basis = vec![vec![0.0; dim]; 3];
    for (k, row) in basis.iter_mut().enumerate() {
        if k < dim {
            row[k] = 1.0;
        }
    }
    let verts = samples.iter().map(|s| [s[0], s[1], s[2]]).collect();
    (verts, basis)
}

pub fn project_pca(samples: &[Vec<f64>]) -> (Vec<[f64; 3]>, Vec<Vec<f64>>) {
    let dim = samples[0].len();
    let n = samples.len() as f64;
    let mut mean = vec![0.0; dim];
    for s in samples {
        for k in 0..dim {
            mean[k] += s[k] / n;
        }
    }
    let mut cov = vec![vec![0.0; dim]; dim];
    for s in samples {
        for i in 0..dim {
            for j in 0..dim {
                cov[i][j] += (s[i] - mean[i]) * (s[j] - mean[j]) / n;
            }
        }
    }
    let (_, vecs) = spherecong::linalg::sym_eigen(&cov);
    let basis: Vec<Vec<f64>> = vecs.into_iter().take(3).collect();
    let verts = samples
        .iter()
        .map(|s| {
            let c: Vec<f64> = (0..dim).map(|k| s[k] - mean[k]).collect();
            [
                spherecong::linalg::dot(&basis[0], &c),
                spherecong::linalg::dot(&basis[1], &c),
                spherecong::linalg::dot(&basis[2], &c),
            ]
        })
        .collect();
    (verts, basis)
}

/// Build quad faces from an nu x nv lattice with possibly missing samples.
pub fn grid_faces(index: &[Option<usize>], nu: usize, nv: usize) -> Vec<[usize; 4]> {
    let mut faces = Vec::new();
    let at = |i: usize, j: usize| index[i * nv + j];
    for i in 0..nu.saturating_sub(1) {
        for j in 0..nv.saturating_sub(1) {
            if let (Some(a), Some(b), Some(c), Some(d)) =
                (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1))
            {
                faces.push([a, b, c, d]);
            }
        }
    }
    faces
}

pub fn write_obj(path: &Path, data: &ObjData) -> Result<(), CliError> {
    let mut out = String::new();
    for row in &data.basis {
        let nums: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
        out.push_str(&format!("# projection {}\n", nums.join(" ")));
    }
    for v in &data.vertices {
        out.push_str(&format!("v {} {} {}\n", v[0], v[1], v[2]));
    }
    for f in &data.faces {
        // OBJ indices are 1-based
        out.push_str(&format!("f {} {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1, f[3] + 1));
    }
    write_atomic(path, out.as_bytes())
}
