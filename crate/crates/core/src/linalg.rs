//! Small dense linear algebra over generic scalars.
//!
//! Ambient vectors are plain `Vec<S>` so the same code runs over floats and
//! Taylor series. The f64-only pieces (eigenvalues, solves) live at the end.

use serde::{Deserialize, Serialize};

use crate::error::TaylorError;
use crate::taylor::{Real, Scalar};

/// Ambient inner product signature. Lorentzian negates the last coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    Euclidean,
    Lorentzian,
}

impl Metric {
    pub fn sign_of(&self, i: usize, dim: usize) -> f64 {
        match self {
            Metric::Euclidean => 1.0,
            Metric::Lorentzian => {
                if i + 1 == dim {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    assert_eq!(a.len(), b.len());
    let mut acc = S::of(0.0);
    for (x, y) in a.iter().zip(b) {
        acc = acc + x.clone() * y.clone();
    }
    acc
}

pub fn dot_metric<S: Scalar>(metric: Metric, a: &[S], b: &[S]) -> S {
    assert_eq!(a.len(), b.len());
    let dim = a.len();
    let mut acc = S::of(0.0);
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        let term = x.clone() * y.clone();
        acc = if metric.sign_of(i, dim) < 0.0 { acc - term } else { acc + term };
    }
    acc
}

pub fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn neg<S: Scalar>(a: &[S]) -> Vec<S> {
    a.iter().map(|x| -x.clone()).collect()
}

pub fn scale<S: Scalar>(a: &[S], c: &S) -> Vec<S> {
    a.iter().map(|x| x.clone() * c.clone()).collect()
}

pub fn scale_f64<S: Scalar>(a: &[S], c: f64) -> Vec<S> {
    let c = S::of(c);
    scale(a, &c)
}

/// a + c * b
pub fn axpy<S: Scalar>(a: &[S], c: &S, b: &[S]) -> Vec<S> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() + c.clone() * y.clone())
        .collect()
}

pub fn zeros<S: Scalar>(dim: usize) -> Vec<S> {
    vec![S::of(0.0); dim]
}

pub fn norm_sq<S: Scalar>(a: &[S]) -> S {
    dot(a, a)
}

pub fn norm<S: Scalar>(a: &[S]) -> Result<S, TaylorError> {
    norm_sq(a).sqrt()
}

pub fn normalize<S: Scalar>(a: &[S]) -> Result<Vec<S>, TaylorError> {
    let n = norm(a)?;
    let inv = n.recip()?;
    Ok(scale(a, &inv))
}

/// v minus its components along an orthonormal family.
pub fn project_off<S: Scalar>(v: &[S], orthonormal: &[Vec<S>]) -> Vec<S> {
    let mut out = v.to_vec();
    for u in orthonormal {
        let c = dot(&out, u);
        out = out
            .iter()
            .zip(u)
            .map(|(x, y)| x.clone() - c.clone() * y.clone())
            .collect();
    }
    out
}

pub fn project_off_metric<S: Scalar>(metric: Metric, v: &[S], orthonormal: &[Vec<S>]) -> Vec<S> {
    let mut out = v.to_vec();
    for u in orthonormal {
        let c = dot_metric(metric, &out, u);
        let uu = dot_metric(metric, u, u); // +-1 for unit vectors
        let c = c.try_div(&uu).expect("unit vector norm");
        out = out
            .iter()
            .zip(u)
            .map(|(x, y)| x.clone() - c.clone() * y.clone())
            .collect();
    }
    out
}

/// Numeric value of a scalar as f64 (for thresholds and reports).
pub fn val<S: Scalar>(s: &S) -> f64 {
    s.value().to_f64_lossy()
}

pub fn value_vec<S: Scalar>(a: &[S]) -> Vec<f64> {
    a.iter().map(val).collect()
}

pub fn norm_f64(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist_f64(a: &[f64], b: &[f64]) -> f64 {
    norm_f64(&sub(a, b))
}

// ---------------------------------------------------------------------------
// f64-only helpers
// ---------------------------------------------------------------------------

/// Eigenvalues and eigenvectors of a small symmetric matrix (cyclic Jacobi).
/// Returns (eigenvalues descending, eigenvectors as rows).
pub fn sym_eigen(mat: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = mat.len();
    let mut a: Vec<Vec<f64>> = mat.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let eigvals: Vec<f64> = idx.iter().map(|&i| a[i][i]).collect();
    let eigvecs: Vec<Vec<f64>> = idx.iter().map(|&i| (0..n).map(|k| v[k][i]).collect()).collect();
    (eigvals, eigvecs)
}

/// Singular values of the matrix whose columns are the given vectors.
pub fn singular_values(cols: &[Vec<f64>]) -> Vec<f64> {
    let m = cols.len();
    let gram: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| dot(&cols[i], &cols[j])).collect())
        .collect();
    let (eig, _) = sym_eigen(&gram);
    eig.iter().map(|&e| e.max(0.0).sqrt()).collect()
}

/// Determinant of a small dense matrix (Gaussian elimination).
pub fn det(mat: &[Vec<f64>]) -> f64 {
    let n = mat.len();
    let mut a = mat.to_vec();
    let mut d = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap());
        let piv = piv.unwrap();
        if a[piv][col].abs() < 1e-300 {
            return 0.0;
        }
        if piv != col {
            a.swap(col, piv);
            d = -d;
        }
        d *= a[col][col];
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    d
}

/// Solve a dense linear system by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let (piv, piv_val) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
        if piv_val < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in (r + 1)..n {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

/// Frobenius distance between the orthogonal projectors onto the spans of
/// two orthonormal families (a Grassmann distance).
pub fn projector_distance(basis_a: &[Vec<f64>], basis_b: &[Vec<f64>]) -> f64 {
    let dim = basis_a[0].len();
    let proj = |basis: &[Vec<f64>]| {
        let mut p = vec![vec![0.0; dim]; dim];
        for u in basis {
            for i in 0..dim {
                for j in 0..dim {
                    p[i][j] += u[i] * u[j];
                }
            }
        }
        p
    };
    let (pa, pb) = (proj(basis_a), proj(basis_b));
    let mut acc = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let d = pa[i][j] - pb[i][j];
            acc += d * d;
        }
    }
    acc.sqrt()
}

/// Defect between the conformal classes of two 2x2 Gram matrices:
/// each is normalized by half its trace, then compared entrywise.
pub fn conformality_defect(m1: &[[f64; 2]; 2], m2: &[[f64; 2]; 2]) -> f64 {
    let n = |m: &[[f64; 2]; 2]| {
        let t = (m[0][0] + m[1][1]) / 2.0;
        [[m[0][0] / t, m[0][1] / t], [m[1][0] / t, m[1][1] / t]]
    };
    let (a, b) = (n(m1), n(m2));
    let mut acc: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            acc += (a[i][j] - b[i][j]).powi(2);
        }
    }
    acc.sqrt()
}
