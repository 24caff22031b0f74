//! Adapted frames, fundamental forms, the ellipse of curvature and the
//! superconformal / S-Willmore / Willmore residuals.
//!
//! The frame construction is generic over the scalar so the same code
//! produces plain values from a jet and derivative *fields* when run over
//! Taylor series.

use num_complex::Complex64;

use crate::error::{Error, Result, TaylorError};
use crate::fd;
use crate::immersion::{chart_jet_series, chart_jet_values, ChartJet, ImmersionSpec};
use crate::linalg::{self, Metric};
use crate::taylor::{Jet, Real, Scalar, Var};
use crate::tolerances::Tolerances;

/// First-order frame and second fundamental form, over any scalar.
#[derive(Debug, Clone)]
pub struct FrameFields<S: Scalar> {
    pub dim: usize,
    pub position: Vec<S>,
    pub fu: Vec<S>,
    pub fv: Vec<S>,
    /// Orthonormal tangent frame from Gram-Schmidt on (f_u, f_v).
    pub x1: Vec<S>,
    pub x2: Vec<S>,
    /// X1 = a du; X2 = b du + c dv.
    pub a: S,
    pub b: S,
    pub c: S,
    pub metric: [[S; 2]; 2],
    pub alpha11: Vec<S>,
    pub alpha12: Vec<S>,
    pub alpha22: Vec<S>,
    /// Mean curvature vector (alpha11 + alpha22) / 2.
    pub mean: Vec<S>,
    /// |f_u|^2 of the chart.
    pub conformal_factor: S,
}

/// Regularity floor: sin^2 of the chart angle must exceed this.
const REGULARITY_EPS: f64 = 1e-16;

pub fn frame_fields<S: Scalar>(cj: &ChartJet<S>) -> Result<FrameFields<S>> {
    assert!(cj.depth() >= 2);
    let dim = cj.dim();
    let position = cj.at(0, 0).to_vec();
    let fu = cj.at(1, 0).to_vec();
    let fv = cj.at(0, 1).to_vec();

    let e = linalg::dot(&fu, &fu);
    let ff = linalg::dot(&fu, &fv);
    let g = linalg::dot(&fv, &fv);
    let (ev, fv_, gv) = (linalg::val(&e), linalg::val(&ff), linalg::val(&g));
    if !(ev > 0.0) || !(gv > 0.0) || ev * gv - fv_ * fv_ <= REGULARITY_EPS * ev * gv {
        return Err(Error::DegenerateImmersion);
    }

    let inv_len_u = e.sqrt()?.recip()?; // a
    let x1 = linalg::scale(&fu, &inv_len_u);
    let w = linalg::sub(&fv, &linalg::scale(&x1, &linalg::dot(&fv, &x1)));
    let inv_len_w = linalg::norm(&w)?.recip()?;
    let x2 = linalg::scale(&w, &inv_len_w);
    // X2 = (fv - (F/E) fu) / |w|
    let b = -(ff.try_div(&e)?.clone() * inv_len_w.clone());
    let c = inv_len_w.clone();

    let fuu = cj.at(2, 0);
    let fuv = cj.at(1, 1);
    let fvv = cj.at(0, 2);
    let frame = [x1.clone(), x2.clone()];
    let perp = |z: &[S]| linalg::project_off(z, &frame);
    let p_uu = perp(fuu);
    let p_uv = perp(fuv);
    let p_vv = perp(fvv);

    let a = inv_len_u;
    let a2 = a.clone() * a.clone();
    let alpha11 = linalg::scale(&p_uu, &a2);
    let alpha12 = linalg::add(
        &linalg::scale(&p_uu, &(a.clone() * b.clone())),
        &linalg::scale(&p_uv, &(a.clone() * c.clone())),
    );
    let alpha22 = {
        let t1 = linalg::scale(&p_uu, &(b.clone() * b.clone()));
        let t2 = linalg::scale(&p_uv, &(b.clone() * c.clone()).scale(S::R::of(2.0)));
        let t3 = linalg::scale(&p_vv, &(c.clone() * c.clone()));
        linalg::add(&linalg::add(&t1, &t2), &t3)
    };
    let mean = linalg::scale_f64(&linalg::add(&alpha11, &alpha22), 0.5);

    Ok(FrameFields {
        dim,
        position,
        fu,
        fv,
        x1,
        x2,
        a,
        b,
        c,
        metric: [[e.clone(), ff.clone()], [ff, g]],
        alpha11,
        alpha12,
        alpha22,
        mean,
        conformal_factor: e,
    })
}

/// The first-normal-space frame {xi1, xi2, delta} with its scalars, over any
/// scalar type. Only legitimate at (numerically) superconformal points.
#[derive(Debug, Clone)]
pub struct XiFields<S: Scalar> {
    pub xi1: Vec<S>,
    pub xi2: Vec<S>,
    pub delta: Vec<S>,
    pub lambda1: S,
    pub lambda2: S,
    pub lambda: S,
    pub theta: S,
}

pub fn alpha_norm_value<S: Scalar>(ff: &FrameFields<S>) -> f64 {
    let n11 = linalg::val(&linalg::norm_sq(&ff.alpha11));
    let n12 = linalg::val(&linalg::norm_sq(&ff.alpha12));
    let n22 = linalg::val(&linalg::norm_sq(&ff.alpha22));
    (n11 + 2.0 * n12 + n22).max(0.0).sqrt()
}

pub fn xi_fields<S: Scalar>(ff: &FrameFields<S>, tols: &Tolerances) -> Result<XiFields<S>> {
    let alpha_norm = alpha_norm_value(ff);
    let txi1 = linalg::scale_f64(&linalg::sub(&ff.alpha11, &ff.alpha22), 0.5);
    let txi2 = ff.alpha12.clone();
    let floor = tols.umbilic * (1.0 + alpha_norm);
    if linalg::val(&linalg::norm_sq(&txi1)).max(0.0).sqrt() <= floor
        || linalg::val(&linalg::norm_sq(&txi2)).max(0.0).sqrt() <= floor
    {
        return Err(Error::UmbilicPoint);
    }
    let xi1 = linalg::normalize(&txi1)?;
    let xi2 = linalg::normalize(&txi2)?;
    let lambda1 = linalg::dot(&ff.mean, &xi1);
    let lambda2 = linalg::dot(&ff.mean, &xi2);
    let delta0 = linalg::sub(
        &linalg::sub(&ff.mean, &linalg::scale(&xi1, &lambda1)),
        &linalg::scale(&xi2, &lambda2),
    );
    let h_norm = linalg::val(&linalg::norm_sq(&ff.mean)).max(0.0).sqrt();
    let lambda = linalg::norm(&delta0).map_err(|_| Error::DegenerateFrame("lambda"))?;
    if linalg::val(&lambda) <= tols.lambda * (1.0 + h_norm) {
        return Err(Error::DegenerateFrame("lambda"));
    }
    // delta sign fixed so that lambda = <H, delta> >= 0
    let delta = linalg::scale(&delta0, &lambda.recip()?);
    let theta = lambda1.clone() * lambda1.clone() + lambda2.clone() * lambda2.clone();
    Ok(XiFields { xi1, xi2, delta, lambda1, lambda2, lambda, theta })
}

/// Plain-value xi-frame for reporting.
#[derive(Debug, Clone)]
pub struct XiFrame {
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    pub delta: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda: f64,
    pub theta: f64,
}

/// Adapted frame data at a point.
#[derive(Debug, Clone)]
pub struct FrameData {
    pub dim: usize,
    pub position: Vec<f64>,
    pub fu: Vec<f64>,
    pub fv: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub x1_chart: [f64; 2],
    pub x2_chart: [f64; 2],
    pub metric: [[f64; 2]; 2],
    pub alpha11: Vec<f64>,
    pub alpha12: Vec<f64>,
    pub alpha22: Vec<f64>,
    pub mean_curvature: Vec<f64>,
    pub conformal_factor: f64,
    /// Size of the traceless second fundamental form: the larger singular
    /// value of [ (a11-a22)/2 , a12 ]. Equals |alpha12| at circle points.
    pub mu: f64,
    /// The smaller singular value of the same pair.
    pub mu_minor: f64,
    pub alpha_norm: f64,
    pub dim_n1: usize,
    pub xi: Option<XiFrame>,
    pub umbilic: bool,
    pub minimal: bool,
}

impl FrameData {
    pub fn h_norm(&self) -> f64 {
        linalg::norm_f64(&self.mean_curvature)
    }
}

pub fn fundamental_forms(jet: &Jet<f64>, tols: &Tolerances) -> Result<FrameData> {
    let cj = chart_jet_values(jet, 2)?;
    let ff = frame_fields(&cj)?;
    let alpha_norm = alpha_norm_value(&ff);
    let txi1 = linalg::scale_f64(&linalg::sub(&ff.alpha11, &ff.alpha22), 0.5);
    let txi2 = ff.alpha12.clone();
    let sv = linalg::singular_values(&[txi1, txi2]);
    let (mu, mu_minor) = (sv[0], sv[1]);
    let umbilic = mu <= tols.umbilic * (1.0 + alpha_norm);
    let minimal = linalg::norm_f64(&ff.mean) <= tols.minimal;

    let sv_n1 = linalg::singular_values(&[ff.alpha11.clone(), ff.alpha12.clone(), ff.alpha22.clone()]);
    let dim_n1 = sv_n1.iter().filter(|&&s| s > tols.rank * (1.0 + sv_n1[0])).count();

    // the adapted normal frame is only legitimate at circle points
    let circle = 2.0 * (mu - mu_minor) / (1.0 + alpha_norm * alpha_norm);
    let xi = if umbilic || circle >= tols.superconformal_gate {
        None
    } else {
        match xi_fields(&ff, tols) {
            Ok(x) => Some(XiFrame {
                xi1: x.xi1,
                xi2: x.xi2,
                delta: x.delta,
                lambda1: x.lambda1,
                lambda2: x.lambda2,
                lambda: x.lambda,
                theta: x.theta,
            }),
            Err(Error::UmbilicPoint) | Err(Error::DegenerateFrame(_)) => None,
            Err(e) => return Err(e),
        }
    };

    Ok(FrameData {
        dim: ff.dim,
        position: ff.position,
        fu: ff.fu,
        fv: ff.fv,
        x1: ff.x1,
        x2: ff.x2,
        x1_chart: [ff.a, 0.0],
        x2_chart: [ff.b, ff.c],
        metric: ff.metric,
        alpha11: ff.alpha11,
        alpha12: ff.alpha12,
        alpha22: ff.alpha22,
        mean_curvature: ff.mean,
        conformal_factor: ff.conformal_factor,
        mu,
        mu_minor,
        alpha_norm,
        dim_n1,
        xi,
        umbilic,
        minimal,
    })
}

/// Ellipse of curvature: image of the unit tangent circle under v -> a(v,v),
/// centered at H with axis vectors (a11 - a22)/2 and a12.
#[derive(Debug, Clone)]
pub struct Ellipse {
    pub center: Vec<f64>,
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub semi_major: f64,
    pub semi_minor: f64,
    /// max(|<a12, a11-a22>|, ||a11-a22| - 2|a12||), unnormalized.
    pub circle_residual: f64,
}

pub fn ellipse_of_curvature(fd: &FrameData) -> Ellipse {
    let diff = linalg::sub(&fd.alpha11, &fd.alpha22);
    let axis1 = linalg::scale_f64(&diff, 0.5);
    let axis2 = fd.alpha12.clone();
    let sv = linalg::singular_values(&[axis1.clone(), axis2.clone()]);
    let circle_residual = circle_defect(fd);
    Ellipse {
        center: fd.mean_curvature.clone(),
        axis1,
        axis2,
        semi_major: sv[0],
        semi_minor: sv[1],
        circle_residual,
    }
}

fn circle_defect(fd: &FrameData) -> f64 {
    let diff = linalg::sub(&fd.alpha11, &fd.alpha22);
    let angle = linalg::dot(&fd.alpha12, &diff).abs();
    let len = (linalg::norm_f64(&diff) - 2.0 * linalg::norm_f64(&fd.alpha12)).abs();
    angle.max(len)
}

impl Ellipse {
    /// Distance from a sampled normal vector to the ellipse. The argmin over
    /// the parameter circle runs on the expanded quadratic (coarse scan plus
    /// ternary refinement); the returned distance is one exact vector norm,
    /// so near-zero distances are not washed out by cancellation.
    pub fn sample_residual(&self, alpha_vv: &[f64]) -> f64 {
        let s = linalg::sub(alpha_vv, &self.center);
        let sa1 = linalg::dot(&s, &self.axis1);
        let sa2 = linalg::dot(&s, &self.axis2);
        let a11 = linalg::dot(&self.axis1, &self.axis1);
        let a22 = linalg::dot(&self.axis2, &self.axis2);
        let a12 = linalg::dot(&self.axis1, &self.axis2);
        let ss = linalg::dot(&s, &s);
        let d2 = |phi: f64| -> f64 {
            let (c, sn) = (phi.cos(), phi.sin());
            ss - 2.0 * (c * sa1 + sn * sa2) + c * c * a11 + 2.0 * c * sn * a12 + sn * sn * a22
        };
        let n = 64;
        let mut best = (0usize, f64::INFINITY);
        for k in 0..n {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let dk = d2(phi);
            if dk < best.1 {
                best = (k, dk);
            }
        }
        let step = 2.0 * std::f64::consts::PI / n as f64;
        let mid = best.0 as f64 * step;
        let (mut lo, mut hi) = (mid - step, mid + step);
        for _ in 0..40 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if d2(m1) <= d2(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let mut phi = 0.5 * (lo + hi);
        // Newton polish on the exact residual vector; the expanded form
        // above cannot resolve distances near the rounding floor
        for _ in 0..8 {
            let (c, sn) = (phi.cos(), phi.sin());
            // r = s - cos a1 - sin a2, r' = sin a1 - cos a2, r'' = cos a1 + sin a2
            let r = linalg::sub(
                &linalg::sub(&s, &linalg::scale_f64(&self.axis1, c)),
                &linalg::scale_f64(&self.axis2, sn),
            );
            let rp = linalg::sub(
                &linalg::scale_f64(&self.axis1, sn),
                &linalg::scale_f64(&self.axis2, c),
            );
            let rpp = linalg::add(
                &linalg::scale_f64(&self.axis1, c),
                &linalg::scale_f64(&self.axis2, sn),
            );
            let q = linalg::dot(&r, &rp);
            let qp = linalg::dot(&rp, &rp) + linalg::dot(&r, &rpp);
            if qp.abs() < 1e-300 {
                break;
            }
            let delta = q / qp;
            phi -= delta;
            if delta.abs() < 1e-15 {
                break;
            }
        }
        let p = linalg::add(
            &linalg::scale_f64(&self.axis1, phi.cos()),
            &linalg::scale_f64(&self.axis2, phi.sin()),
        );
        linalg::dist_f64(&s, &p)
    }
}

/// Scale-free circle criterion defect: twice the gap of the singular values
/// of the traceless second fundamental form, which is invariant under chart
/// rotations (the raw pairing defects are not). Zero (by convention) at
/// flagged umbilic points, where the ellipse degenerates to a point.
pub fn superconformal_residual(fd: &FrameData) -> f64 {
    if fd.umbilic {
        return 0.0;
    }
    2.0 * (fd.mu - fd.mu_minor) / (1.0 + fd.alpha_norm * fd.alpha_norm)
}

/// The mean curvature field differentiated along the chart directions and
/// projected to the normal space: (perp(dH/du), perp(dH/dv)).
pub fn grad_h_chart(jet: &Jet<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    if jet.order() < 3 {
        return Err(TaylorError::OrderExceeded { a: 3, b: 0, order: jet.order() }.into());
    }
    let w = jet.order() - 2;
    let cj = chart_jet_series(jet.components(), w, 2);
    let ff = frame_fields(&cj)?;
    let dhu: Vec<f64> = ff.mean.iter().map(|c| c.derivative(Var::U).value()).collect();
    let dhv: Vec<f64> = ff.mean.iter().map(|c| c.derivative(Var::V).value()).collect();
    let x1 = linalg::value_vec(&ff.x1);
    let x2 = linalg::value_vec(&ff.x2);
    let frame = [x1, x2];
    Ok((linalg::project_off(&dhu, &frame), linalg::project_off(&dhv, &frame)))
}

/// Normal-connection derivative of H along the orthonormal frame.
pub fn normal_derivative_h(jet: &Jet<f64>) -> Result<[Vec<f64>; 2]> {
    if jet.order() < 3 {
        return Err(TaylorError::OrderExceeded { a: 3, b: 0, order: jet.order() }.into());
    }
    let w = jet.order() - 2;
    let cj = chart_jet_series(jet.components(), w, 2);
    let ff = frame_fields(&cj)?;
    let dhu: Vec<f64> = ff.mean.iter().map(|c| c.derivative(Var::U).value()).collect();
    let dhv: Vec<f64> = ff.mean.iter().map(|c| c.derivative(Var::V).value()).collect();
    let (a, b, c) = (linalg::val(&ff.a), linalg::val(&ff.b), linalg::val(&ff.c));
    let d1 = linalg::scale_f64(&dhu, a);
    let d2 = linalg::add(&linalg::scale_f64(&dhu, b), &linalg::scale_f64(&dhv, c));
    let x1 = linalg::value_vec(&ff.x1);
    let x2 = linalg::value_vec(&ff.x2);
    let frame = [x1, x2];
    Ok([linalg::project_off(&d1, &frame), linalg::project_off(&d2, &frame)])
}

fn complexify(re: &[f64], im_scaled: &[f64], im_factor: f64) -> Vec<Complex64> {
    re.iter()
        .zip(im_scaled)
        .map(|(r, i)| Complex64::new(*r, i * im_factor))
        .collect()
}

/// Defect of `grad^perp_V H parallel to alpha(V, V)` for V = X1 - i X2: the
/// component of B off the complex line spanned by A, scale-free.
pub fn s_willmore_residual(jet: &Jet<f64>, tols: &Tolerances) -> Result<f64> {
    let fd = fundamental_forms(jet, tols)?;
    let grads = normal_derivative_h(jet)?;
    // A = alpha(V,V) = (a11 - a22) - 2i a12, B = grad_V H
    let diff = linalg::sub(&fd.alpha11, &fd.alpha22);
    let a = complexify(&diff, &fd.alpha12, -2.0);
    let b = complexify(&grads[0], &grads[1], -1.0);
    let aa: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    if aa.sqrt() <= tols.umbilic * (1.0 + fd.alpha_norm) {
        return Err(Error::UmbilicPoint);
    }
    let ba: Complex64 = b.iter().zip(&a).map(|(x, y)| x * y.conj()).sum();
    let coeff = ba / aa;
    let mut off = 0.0f64;
    let mut bn = 0.0f64;
    for (x, y) in b.iter().zip(&a) {
        off += (x - coeff * y).norm_sqr();
        bn += x.norm_sqr();
    }
    Ok(off.sqrt() / (1.0 + bn.sqrt()))
}

/// Norm of the Willmore operator at a point. The normal Laplacian is built
/// from Richardson-extrapolated central differences of the grad^perp H field
/// in chart coordinates, with the connection correction taken exactly from
/// order-3 jets.
pub fn willmore_residual(
    spec: &ImmersionSpec,
    point: (f64, f64),
    fd_step: f64,
    tols: &Tolerances,
) -> Result<f64> {
    for (du, dv) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
        let q = (point.0 + du * fd_step, point.1 + dv * fd_step);
        if !spec.domain.contains(q.0, q.1) {
            return Err(Error::StencilOutsideDomain);
        }
    }
    let jet = spec.jet_with(point, 3, tols)?;
    let fd_base = fundamental_forms(&jet, tols)?;
    let cj = chart_jet_values(&jet, 3)?;

    // metric, inverse, Christoffel symbols from exact jet data
    let m = fd_base.metric;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let minv = [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ];
    let first = [cj.at(1, 0).to_vec(), cj.at(0, 1).to_vec()];
    let second = |i: usize, j: usize| match (i, j) {
        (0, 0) => cj.at(2, 0),
        (1, 1) => cj.at(0, 2),
        _ => cj.at(1, 1),
    };
    // dm[k][i][j] = d_k <f_i, f_j>
    let mut dm = [[[0.0f64; 2]; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                dm[k][i][j] =
                    linalg::dot(second(i, k), &first[j]) + linalg::dot(&first[i], second(j, k));
            }
        }
    }
    let mut gamma = [[[0.0f64; 2]; 2]; 2]; // gamma[k][i][j]
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for l in 0..2 {
                    s += minv[k][l] * (dm[i][j][l] + dm[j][i][l] - dm[l][i][j]);
                }
                gamma[k][i][j] = 0.5 * s;
            }
        }
    }

    // W_u, W_v stacked, as a field over the chart
    let dim = spec.ambient_dim();
    let w_field = |q: (f64, f64)| -> Result<Vec<f64>> {
        let j = spec.jet_with(q, 3, tols)?;
        let (wu, wv) = grad_h_chart(&j)?;
        let mut out = wu;
        out.extend(wv);
        Ok(out)
    };
    let at_base = w_field(point)?;
    let w_base = [at_base[..dim].to_vec(), at_base[dim..].to_vec()];
    let along_u = fd::richardson(|u| w_field((u, point.1)), point.0, fd_step)?;
    let along_v = fd::richardson(|v| w_field((point.0, v)), point.1, fd_step)?;
    // dW[i][j] = d_i W_j
    let dw = [
        [along_u[..dim].to_vec(), along_u[dim..].to_vec()],
        [along_v[..dim].to_vec(), along_v[dim..].to_vec()],
    ];

    let frame = [fd_base.x1.clone(), fd_base.x2.clone()];
    let mut laplacian = vec![0.0; dim];
    for i in 0..2 {
        for j in 0..2 {
            let mut term = linalg::project_off(&dw[i][j], &frame);
            for k in 0..2 {
                term = linalg::sub(&term, &linalg::scale_f64(&w_base[k], gamma[k][i][j]));
            }
            laplacian = linalg::add(&laplacian, &linalg::scale_f64(&term, minv[i][j]));
        }
    }

    let h = &fd_base.mean_curvature;
    let h2 = linalg::dot(h, h);
    let mut el = linalg::sub(&laplacian, &linalg::scale_f64(h, 2.0 * h2));
    for (alpha, weight) in [
        (&fd_base.alpha11, 1.0),
        (&fd_base.alpha12, 2.0),
        (&fd_base.alpha22, 1.0),
    ] {
        el = linalg::add(&el, &linalg::scale_f64(alpha, weight * linalg::dot(h, alpha)));
    }
    let hn = h2.max(0.0).sqrt();
    Ok(linalg::norm_f64(&el) / (1.0 + hn * hn * hn))
}

/// Chart-level fundamental forms for an arbitrary ambient signature. No
/// frame normalization happens here, so Lorentzian normals are fine.
#[derive(Debug, Clone)]
pub struct ChartForms {
    pub metric: [[f64; 2]; 2],
    pub metric_inv: [[f64; 2]; 2],
    pub fu: Vec<f64>,
    pub fv: Vec<f64>,
    /// alpha(du,du), alpha(du,dv), alpha(dv,dv) in ambient coordinates.
    pub alpha: [Vec<f64>; 3],
    pub mean: Vec<f64>,
}

pub fn chart_forms(jet: &Jet<f64>, metric: Metric) -> Result<ChartForms> {
    let cj = chart_jet_values(jet, 2)?;
    let fu = cj.at(1, 0).to_vec();
    let fv = cj.at(0, 1).to_vec();
    let m = [
        [linalg::dot_metric(metric, &fu, &fu), linalg::dot_metric(metric, &fu, &fv)],
        [linalg::dot_metric(metric, &fv, &fu), linalg::dot_metric(metric, &fv, &fv)],
    ];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() < REGULARITY_EPS {
        return Err(Error::DegenerateImmersion);
    }
    let minv = [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ];
    let first = [fu.clone(), fv.clone()];
    let perp = |z: &[f64]| -> Vec<f64> {
        let mut out = z.to_vec();
        for k in 0..2 {
            for l in 0..2 {
                let c = minv[k][l] * linalg::dot_metric(metric, z, &first[k]);
                out = linalg::sub(&out, &linalg::scale_f64(&first[l], c));
            }
        }
        out
    };
    let alpha = [perp(cj.at(2, 0)), perp(cj.at(1, 1)), perp(cj.at(0, 2))];
    let mut mean = vec![0.0; jet.ambient_dim()];
    let pick = |i: usize, j: usize| -> &Vec<f64> {
        match (i, j) {
            (0, 0) => &alpha[0],
            (1, 1) => &alpha[2],
            _ => &alpha[1],
        }
    };
    for i in 0..2 {
        for j in 0..2 {
            mean = linalg::add(&mean, &linalg::scale_f64(pick(i, j), 0.5 * minv[i][j]));
        }
    }
    Ok(ChartForms { metric: m, metric_inv: minv, fu, fv, alpha, mean })
}

/// Normal component of an ambient vector at the footpoint of a jet.
pub fn normal_component(cf: &ChartForms, metric: Metric, z: &[f64]) -> Vec<f64> {
    let first = [cf.fu.clone(), cf.fv.clone()];
    let mut out = z.to_vec();
    for k in 0..2 {
        for l in 0..2 {
            let c = cf.metric_inv[k][l] * linalg::dot_metric(metric, z, &first[k]);
            out = linalg::sub(&out, &linalg::scale_f64(&first[l], c));
        }
    }
    out
}

/// Shape-operator matrix of `mu` in the chart basis: m^{-1} [<alpha_ij, mu>].
pub fn shape_operator(cf: &ChartForms, metric: Metric, mu: &[f64]) -> [[f64; 2]; 2] {
    let s = [
        [
            linalg::dot_metric(metric, &cf.alpha[0], mu),
            linalg::dot_metric(metric, &cf.alpha[1], mu),
        ],
        [
            linalg::dot_metric(metric, &cf.alpha[1], mu),
            linalg::dot_metric(metric, &cf.alpha[2], mu),
        ],
    ];
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                out[i][j] += cf.metric_inv[i][k] * s[k][j];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::ImmersionSpec;
    use approx::assert_relative_eq;

    fn jet_of(src: &str, p: (f64, f64), order: usize) -> Jet<f64> {
        ImmersionSpec::from_source(src).unwrap().jet(p, order).unwrap()
    }

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn plane_is_flat() {
        let fd = fundamental_forms(&jet_of("[u, v, 0, 0]", (0.3, 0.2), 2), &tols()).unwrap();
        assert!(linalg::norm_f64(&fd.alpha11) < 1e-14);
        assert!(linalg::norm_f64(&fd.mean_curvature) < 1e-14);
        assert_eq!(fd.dim_n1, 0);
        assert!(fd.umbilic);
        assert!(fd.minimal);
        assert!(fd.xi.is_none());
    }

    #[test]
    fn paraboloid_umbilic_at_origin() {
        let fd =
            fundamental_forms(&jet_of("[u, v, u^2 + v^2, 0]", (0.0, 0.0), 2), &tols()).unwrap();
        assert_eq!(fd.alpha11, vec![0.0, 0.0, 2.0, 0.0]);
        assert_eq!(fd.alpha22, vec![0.0, 0.0, 2.0, 0.0]);
        assert!(linalg::norm_f64(&fd.alpha12) < 1e-14);
        assert_eq!(fd.mean_curvature, vec![0.0, 0.0, 2.0, 0.0]);
        assert!(fd.umbilic);
        assert!(fd.mu < 1e-12);
    }

    #[test]
    fn holomorphic_curve_frame() {
        let fd =
            fundamental_forms(&jet_of("[u, v, u^2 - v^2, 2*u*v]", (0.0, 0.0), 2), &tols()).unwrap();
        assert!(fd.h_norm() < 1e-14);
        assert_relative_eq!(fd.mu, 2.0, epsilon = 1e-12);
        assert!(!fd.umbilic);
        assert!(fd.minimal);
        assert_eq!(fd.dim_n1, 2);
        // xi frame needs lambda != 0, which fails for minimal curves
        assert!(fd.xi.is_none());
        let ell = ellipse_of_curvature(&fd);
        assert_relative_eq!(ell.semi_major, 2.0, epsilon = 1e-12);
        assert_relative_eq!(ell.semi_minor, 2.0, epsilon = 1e-12);
        assert!(ell.circle_residual < 1e-12);
        assert!(superconformal_residual(&fd) < 1e-10);
    }

    #[test]
    fn ellipse_point_and_segment_cases() {
        let fd_pt =
            fundamental_forms(&jet_of("[u, v, u^2 + v^2, 0]", (0.0, 0.0), 2), &tols()).unwrap();
        let e = ellipse_of_curvature(&fd_pt);
        assert!(e.semi_major < 1e-12 && e.semi_minor < 1e-12);
        assert_eq!(e.center, vec![0.0, 0.0, 2.0, 0.0]);

        let fd_seg = fundamental_forms(&jet_of("[u, v, u^2, 0]", (0.0, 0.0), 2), &tols()).unwrap();
        let e = ellipse_of_curvature(&fd_seg);
        assert!(linalg::norm_f64(&e.axis2) < 1e-14);
        assert_relative_eq!(e.circle_residual, 2.0, epsilon = 1e-12);
        // normative formula: 2 / (1 + |alpha|^2) with |alpha|^2 = 4
        assert_relative_eq!(superconformal_residual(&fd_seg), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn ellipse_sampling_oracle() {
        // alpha(v,v) sampled straight from chart second derivatives stays on
        // the computed ellipse
        let jet = jet_of("[u, v, u^2 - v^2, 2*u*v, u*v]", (0.3, -0.2), 2);
        let fd = fundamental_forms(&jet, &tols()).unwrap();
        let ell = ellipse_of_curvature(&fd);
        let cj = chart_jet_values(&jet, 2).unwrap();
        for k in 0..360 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 360.0;
            // v = cos X1 + sin X2 in chart coefficients
            let c1 = th.cos() * fd.x1_chart[0] + th.sin() * fd.x2_chart[0];
            let c2 = th.sin() * fd.x2_chart[1];
            let mut second = linalg::scale_f64(cj.at(2, 0), c1 * c1);
            second = linalg::add(&second, &linalg::scale_f64(cj.at(1, 1), 2.0 * c1 * c2));
            second = linalg::add(&second, &linalg::scale_f64(cj.at(0, 2), c2 * c2));
            let avv = linalg::project_off(&second, &[fd.x1.clone(), fd.x2.clone()]);
            let res = ell.sample_residual(&avv);
            assert!(res < 1e-9 * (1.0 + ell.semi_major), "res = {res}");
        }
    }

    #[test]
    fn sphere_round_trip_residuals() {
        let src = "domain u in [0.3, 2.8], v in [0, 6.28]; \
                   [sin(u)*cos(v), sin(u)*sin(v), cos(u), 0]";
        let spec = ImmersionSpec::from_source(src).unwrap();
        let p = (1.1, 0.7);
        let fd = fundamental_forms(&spec.jet(p, 2).unwrap(), &tols()).unwrap();
        assert!(fd.umbilic);
        assert_eq!(superconformal_residual(&fd), 0.0);
        assert_relative_eq!(fd.h_norm(), 1.0, epsilon = 1e-10);
        // parallel mean curvature
        let grads = normal_derivative_h(&spec.jet(p, 3).unwrap()).unwrap();
        assert!(linalg::norm_f64(&grads[0]) < 1e-9);
        assert!(linalg::norm_f64(&grads[1]) < 1e-9);
    }

    #[test]
    fn minimal_surface_has_zero_h_derivative() {
        let jet = jet_of("[u, v, u^2 - v^2, 2*u*v]", (0.4, 0.1), 3);
        let grads = normal_derivative_h(&jet).unwrap();
        assert!(linalg::norm_f64(&grads[0]) < 1e-10);
        assert!(linalg::norm_f64(&grads[1]) < 1e-10);
    }

    #[test]
    fn h_derivative_matches_finite_differences() {
        let spec = ImmersionSpec::from_source("[u, v, u^2 + v^3, u*v, 0]").unwrap();
        let p = (0.2, 0.1);
        let grads = normal_derivative_h(&spec.jet(p, 3).unwrap()).unwrap();

        // oracle: finite differences of the (plainly evaluated) H field,
        // projected at the base point
        let h_at = |q: (f64, f64)| -> crate::error::Result<Vec<f64>> {
            let fd = fundamental_forms(&spec.jet(q, 2)?, &tols())?;
            Ok(fd.mean_curvature)
        };
        let du = fd::richardson(|u| h_at((u, p.1)), p.0, 1e-4).unwrap();
        let dv = fd::richardson(|v| h_at((p.0, v)), p.1, 1e-4).unwrap();
        let fd0 = fundamental_forms(&spec.jet(p, 2).unwrap(), &tols()).unwrap();
        let frame = [fd0.x1.clone(), fd0.x2.clone()];
        let a = fd0.x1_chart[0];
        let (b, c) = (fd0.x2_chart[0], fd0.x2_chart[1]);
        let o1 = linalg::project_off(&linalg::scale_f64(&du, a), &frame);
        let o2 = linalg::project_off(
            &linalg::add(&linalg::scale_f64(&du, b), &linalg::scale_f64(&dv, c)),
            &frame,
        );
        for (ours, oracle) in [(&grads[0], &o1), (&grads[1], &o2)] {
            let scale = 1.0 + linalg::norm_f64(oracle);
            assert!(linalg::dist_f64(ours, oracle) / scale < 1e-6);
        }
    }

    #[test]
    fn s_willmore_zero_for_minimal() {
        let jet = jet_of("[u, v, u^2 - v^2, 2*u*v]", (0.4, 0.1), 3);
        assert!(s_willmore_residual(&jet, &tols()).unwrap() < 1e-12);
    }

    #[test]
    fn willmore_residual_minimal_and_sphere() {
        let minimal = ImmersionSpec::from_source("[u, v, u^2 - v^2, 2*u*v]").unwrap();
        let r = willmore_residual(&minimal, (0.2, 0.3), 1e-2, &tols()).unwrap();
        assert!(r < 1e-6, "minimal willmore residual {r}");

        let sphere = ImmersionSpec::from_source(
            "domain u in [0.3, 2.8], v in [0, 6.28]; [sin(u)*cos(v), sin(u)*sin(v), cos(u), 0]",
        )
        .unwrap();
        let r = willmore_residual(&sphere, (1.2, 0.8), 1e-2, &tols()).unwrap();
        assert!(r < 1e-6, "sphere willmore residual {r}");
    }

    #[test]
    fn willmore_stencil_domain_check() {
        let spec = ImmersionSpec::from_source("[u, v, u*v, u+v]").unwrap();
        assert!(matches!(
            willmore_residual(&spec, (0.999, 0.0), 1e-2, &tols()),
            Err(Error::StencilOutsideDomain)
        ));
    }

    #[test]
    fn frame_rotation_invariance() {
        use crate::immersion::SurfaceMap;
        let spec = ImmersionSpec::from_source("[u, v, u^2 + v^3, u*v, 0]").unwrap();
        let p = (0.25, 0.15);
        let fd0 = fundamental_forms(&spec.jet(p, 2).unwrap(), &tols()).unwrap();
        let e0 = ellipse_of_curvature(&fd0);
        for angle in [0.3, 1.2, -0.8] {
            let rot = spec.wrapped(|inner| SurfaceMap::ChartRotated { angle, inner });
            // evaluate the rotated chart at the pre-image of p
            let q = (angle.cos() * p.0 + angle.sin() * p.1, -angle.sin() * p.0 + angle.cos() * p.1);
            let fd1 = fundamental_forms(&rot.jet(q, 2).unwrap(), &tols()).unwrap();
            assert_relative_eq!(fd0.h_norm(), fd1.h_norm(), epsilon = 1e-10);
            assert_relative_eq!(
                superconformal_residual(&fd0),
                superconformal_residual(&fd1),
                epsilon = 1e-10
            );
            let e1 = ellipse_of_curvature(&fd1);
            assert_relative_eq!(e0.semi_major, e1.semi_major, epsilon = 1e-10);
            assert_relative_eq!(e0.semi_minor, e1.semi_minor, epsilon = 1e-10);
        }
    }

    #[test]
    fn theta_lambda_identity() {
        // needs a superconformal point with lambda != 0: the projected torus
        let entry = crate::gallery::make("stereo_torus_r5", &Default::default()).unwrap();
        for p in [(1.0, 2.0), (2.5, 4.0), (0.7, 5.0)] {
            let fd = fundamental_forms(&entry.spec.jet(p, 2).unwrap(), &tols()).unwrap();
            let xi = fd.xi.as_ref().expect("xi frame at superconformal point");
            let h2 = fd.h_norm().powi(2);
            assert_relative_eq!(xi.theta + xi.lambda * xi.lambda, h2, epsilon = 1e-10);
        }
    }
}
