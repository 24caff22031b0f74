//! Central sphere congruence, surface of centers, the P + Lambda splitting
//! of its normal bundle, dual surface construction, duality verification and
//! classification.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frames::{
    frame_fields, fundamental_forms, normal_derivative_h, superconformal_residual, xi_fields,
    FrameFields,
};
use crate::immersion::{chart_jet_series, ImmersionSpec, SurfaceMap};
use crate::linalg::{self};
use crate::taylor::{Jet, Real, Scalar, TaylorScalar, Var};
use crate::tolerances::{Orientation, Tolerances};

/// One member of the central sphere congruence.
#[derive(Debug, Clone, Serialize)]
pub struct SphereElement {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Orthonormal frame of f_* TM + span{H}, anchored at f(p).
    pub plane3: [Vec<f64>; 3],
}

pub fn central_sphere(jet: &Jet<f64>, tols: &Tolerances) -> Result<SphereElement> {
    let fd = fundamental_forms(jet, tols)?;
    let hn = fd.h_norm();
    if hn <= tols.minimal {
        return Err(Error::MinimalPoint);
    }
    let center = linalg::add(&fd.position, &linalg::scale_f64(&fd.mean_curvature, 1.0 / (hn * hn)));
    let h_unit = linalg::scale_f64(&fd.mean_curvature, 1.0 / hn);
    Ok(SphereElement {
        center,
        radius: 1.0 / hn,
        plane3: [fd.x1.clone(), fd.x2.clone(), h_unit],
    })
}

/// Series of the surface of centers g = f + H / |H|^2.
pub fn centers_series<T: Real>(
    inner: &SurfaceMap,
    point: (T, T),
    order: usize,
    tols: &Tolerances,
) -> Result<Vec<TaylorScalar<T>>> {
    let w = order.max(1);
    let comps = inner.eval_series(point, w + 2, tols)?;
    let cj = chart_jet_series(&comps, w, 2);
    let ff = frame_fields(&cj)?;
    let hn = linalg::val(&linalg::norm_sq(&ff.mean)).max(0.0).sqrt();
    if hn <= tols.minimal {
        return Err(Error::MinimalPoint);
    }
    let r2 = linalg::norm_sq(&ff.mean).recip()?;
    let g = linalg::add(&ff.position, &linalg::scale(&ff.mean, &r2));
    // dg must have rank 2, otherwise the congruence degenerates to a point
    let du: Vec<f64> = g.iter().map(|c| c.derivative(Var::U).value().to_f64_lossy()).collect();
    let dv: Vec<f64> = g.iter().map(|c| c.derivative(Var::V).value().to_f64_lossy()).collect();
    let sv = linalg::singular_values(&[du, dv]);
    if sv[1] <= 1e-8 * (1.0 + sv[0]) {
        return Err(Error::DegenerateCenters);
    }
    Ok(g.iter().map(|c| c.truncated(order)).collect())
}

/// Jet of the surface of centers, with the first-order part cross-checked
/// against the analytic expression for dg.
#[derive(Debug, Clone)]
pub struct CentersJet {
    pub jet: Jet<f64>,
    pub eq19_defect: f64,
}

pub fn centers_jet(
    spec: &ImmersionSpec,
    point: (f64, f64),
    order: usize,
    tols: &Tolerances,
) -> Result<CentersJet> {
    spec.check_point(point.0, point.1)?;
    let comps = centers_series(&spec.map, point, order.max(1), tols)?;
    let g_jet = Jet::new(point, comps.iter().map(|c| c.truncated(order)).collect());

    // dg = f_*(I - r^2 A_H) Z + r^2 grad_Z H + Z(r^2) H, assembled from
    // frame data and compared with the jet's own first-order part
    let fjet = spec.jet_with(point, 3, tols)?;
    let fd = fundamental_forms(&fjet, tols)?;
    let grads = normal_derivative_h(&fjet)?;
    let hn = fd.h_norm();
    let r2 = 1.0 / (hn * hn);
    // r^2 as a field, for Z(r^2)
    let w = 1;
    let fcj = chart_jet_series(fjet.components(), w, 2);
    let ff = frame_fields(&fcj)?;
    let r2_series = linalg::norm_sq(&ff.mean).recip()?;
    let dr2 = [r2_series.derivative(Var::U).value(), r2_series.derivative(Var::V).value()];

    let a_h = [
        [linalg::dot(&fd.alpha11, &fd.mean_curvature), linalg::dot(&fd.alpha12, &fd.mean_curvature)],
        [linalg::dot(&fd.alpha12, &fd.mean_curvature), linalg::dot(&fd.alpha22, &fd.mean_curvature)],
    ];
    let gu: Vec<f64> = comps.iter().map(|c| c.derivative(Var::U).value()).collect();
    let gv: Vec<f64> = comps.iter().map(|c| c.derivative(Var::V).value()).collect();
    let chart = [fd.x1_chart, fd.x2_chart];
    let x_amb = [fd.x1.clone(), fd.x2.clone()];
    let mut defect = 0.0f64;
    for i in 0..2 {
        let lhs = linalg::add(
            &linalg::scale_f64(&gu, chart[i][0]),
            &linalg::scale_f64(&gv, chart[i][1]),
        );
        // f_*(I - r^2 A_H) X_i = X_i - r^2 (A_H[i][0] X_1 + A_H[i][1] X_2)
        let mut rhs = x_amb[i].clone();
        for j in 0..2 {
            rhs = linalg::sub(&rhs, &linalg::scale_f64(&x_amb[j], r2 * a_h[i][j]));
        }
        rhs = linalg::add(&rhs, &linalg::scale_f64(&grads[i], r2));
        let zr2 = chart[i][0] * dr2[0] + chart[i][1] * dr2[1];
        rhs = linalg::add(&rhs, &linalg::scale_f64(&fd.mean_curvature, zr2));
        defect = defect.max(linalg::dist_f64(&lhs, &rhs) / (1.0 + linalg::norm_f64(&lhs)));
    }
    Ok(CentersJet { jet: g_jet, eq19_defect: defect })
}

// ---------------------------------------------------------------------------
// The dual pipeline (codimension >= 3)
// ---------------------------------------------------------------------------

struct DualCore<T: Real> {
    f: Vec<TaylorScalar<T>>,
    h_mean: Vec<TaylorScalar<T>>,
    r2: TaylorScalar<T>,
    g: Vec<TaylorScalar<T>>,
    gu: Vec<TaylorScalar<T>>,
    gv: Vec<TaylorScalar<T>>,
    g1: Vec<TaylorScalar<T>>,
    g2: Vec<TaylorScalar<T>>,
    varrho: TaylorScalar<T>,
    varrho_u: TaylorScalar<T>,
    varrho_v: TaylorScalar<T>,
    h1: Vec<TaylorScalar<T>>,
    h2: Vec<TaylorScalar<T>>,
    eta: Vec<TaylorScalar<T>>,
    xi: Vec<TaylorScalar<T>>,
    e1: Vec<TaylorScalar<T>>,
    e2: Vec<TaylorScalar<T>>,
    h_lambda: Vec<TaylorScalar<T>>,
    dual: Vec<TaylorScalar<T>>,
}

fn value_frame_gates<T: Real>(
    ff: &FrameFields<TaylorScalar<T>>,
    tols: &Tolerances,
) -> Result<()> {
    let dim = ff.dim;
    if dim < 5 {
        return Err(Error::DegenerateFrame("dual formula needs codimension >= 3"));
    }
    let h_norm = linalg::val(&linalg::norm_sq(&ff.mean)).max(0.0).sqrt();
    if h_norm <= tols.minimal {
        return Err(Error::MinimalPoint);
    }
    let a11 = linalg::value_vec(&ff.alpha11);
    let a12 = linalg::value_vec(&ff.alpha12);
    let a22 = linalg::value_vec(&ff.alpha22);
    let n11 = linalg::dot(&a11, &a11);
    let n12 = linalg::dot(&a12, &a12);
    let n22 = linalg::dot(&a22, &a22);
    let alpha_norm = (n11 + 2.0 * n12 + n22).max(0.0).sqrt();
    let txi1 = linalg::scale_f64(&linalg::sub(&a11, &a22), 0.5);
    let sv_t = linalg::singular_values(&[txi1, a12.clone()]);
    let circle = 2.0 * (sv_t[0] - sv_t[1]) / (1.0 + alpha_norm * alpha_norm);
    if circle >= tols.superconformal_gate {
        return Err(Error::DegenerateFrame("superconformal gate"));
    }
    if sv_t[0] <= tols.umbilic * (1.0 + alpha_norm) {
        return Err(Error::UmbilicPoint);
    }
    let sv = linalg::singular_values(&[a11, a12, a22]);
    let rank = sv.iter().filter(|&&s| s > tols.rank * (1.0 + sv[0])).count();
    if rank != 3 {
        return Err(Error::DegenerateFrame("dim N1 must be 3"));
    }
    Ok(())
}

fn dual_core<T: Real>(comps: &[TaylorScalar<T>], tols: &Tolerances) -> Result<DualCore<T>> {
    let k = comps[0].order();
    assert!(k >= 3, "dual pipeline needs 3 orders of headroom");
    let w_a = k - 2;
    let cj = chart_jet_series(comps, w_a, 2);
    let ff = frame_fields(&cj)?;
    value_frame_gates(&ff, tols)?;
    let xi_f = xi_fields(&ff, tols)?;

    let r2_full = linalg::norm_sq(&ff.mean).recip()?;
    let g_full = linalg::add(&ff.position, &linalg::scale(&ff.mean, &r2_full));
    let varrho_full = r2_full.scale_by(T::of(0.5));
    let h1_full = linalg::scale(
        &linalg::sub(
            &linalg::scale(&xi_f.xi1, &xi_f.lambda2),
            &linalg::scale(&xi_f.xi2, &xi_f.lambda1),
        ),
        &r2_full,
    );
    let h2_full = linalg::sub(
        &linalg::scale(&ff.mean, &r2_full),
        &linalg::scale(&xi_f.delta, &xi_f.lambda.recip()?),
    );

    let w_b = w_a - 1;
    let gu: Vec<_> = g_full.iter().map(|c| c.derivative(Var::U)).collect();
    let gv: Vec<_> = g_full.iter().map(|c| c.derivative(Var::V)).collect();
    let varrho_u = varrho_full.derivative(Var::U);
    let varrho_v = varrho_full.derivative(Var::V);
    let tr = |v: &[TaylorScalar<T>]| -> Vec<TaylorScalar<T>> {
        v.iter().map(|c| c.truncated(w_b)).collect()
    };
    let f = tr(comps);
    let h_mean = tr(&ff.mean);
    let r2 = r2_full.truncated(w_b);
    let g = tr(&g_full);
    let h1 = tr(&h1_full);
    let h2 = tr(&h2_full);
    let varrho = varrho_full.truncated(w_b);

    // rank of dg
    let duv = linalg::value_vec(&gu);
    let dvv = linalg::value_vec(&gv);
    let sv = linalg::singular_values(&[duv, dvv]);
    if sv[1] <= 1e-8 * (1.0 + sv[0]) {
        return Err(Error::DegenerateCenters);
    }

    let g1 = linalg::normalize(&gu).map_err(|_| Error::DegenerateCenters)?;
    let w_vec = linalg::sub(&gv, &linalg::scale(&g1, &linalg::dot(&gv, &g1)));
    let g2 = linalg::normalize(&w_vec).map_err(|_| Error::DegenerateCenters)?;
    let tangent = [g1.clone(), g2.clone()];

    let eta = linalg::project_off(&h1, &tangent);
    let xi = linalg::project_off(&h2, &tangent);
    let sv_ex = linalg::singular_values(&[linalg::value_vec(&eta), linalg::value_vec(&xi)]);
    if sv_ex[1] <= tols.independence * (1.0 + sv_ex[0]) {
        return Err(Error::DegenerateFrame("eta and xi dependent"));
    }
    let e1 = linalg::normalize(&eta).map_err(|_| Error::DegenerateFrame("eta"))?;
    let xi_off = linalg::sub(&xi, &linalg::scale(&e1, &linalg::dot(&xi, &e1)));
    let e2 = linalg::normalize(&xi_off).map_err(|_| Error::DegenerateFrame("xi"))?;

    let mut h_lambda = h_mean.clone();
    for basis in [&g1, &g2, &e1, &e2] {
        let c = linalg::dot(&h_lambda, basis);
        h_lambda = linalg::sub(&h_lambda, &linalg::scale(basis, &c));
    }
    let hl_norm = linalg::val(&linalg::norm_sq(&h_lambda)).max(0.0).sqrt();
    if hl_norm <= tols.lambda_component {
        return Err(Error::LambdaRankError);
    }

    let two_r2 = r2.scale_by(T::of(2.0));
    let dual = linalg::add(&f, &linalg::scale(&h_lambda, &two_r2));

    Ok(DualCore {
        f,
        h_mean,
        r2,
        g,
        gu,
        gv,
        g1,
        g2,
        varrho,
        varrho_u,
        varrho_v,
        h1,
        h2,
        eta,
        xi,
        e1,
        e2,
        h_lambda,
        dual,
    })
}

/// Series of the dual superconformal surface f + 2 (H)^Lambda / |H|^2.
pub fn dual_series<T: Real>(
    inner: &SurfaceMap,
    point: (T, T),
    order: usize,
    tols: &Tolerances,
) -> Result<Vec<TaylorScalar<T>>> {
    let comps = inner.eval_series(point, order + 3, tols)?;
    Ok(dual_core(&comps, tols)?.dual)
}

pub fn dualize(spec: &ImmersionSpec) -> ImmersionSpec {
    spec.wrapped(|inner| SurfaceMap::Dual { inner })
}

/// Everything the splitting N_gM = P + Lambda yields at one point, with the
/// lemma-level identities evaluated as residuals.
#[derive(Debug, Clone, Serialize)]
pub struct CenterData {
    pub g_point: Vec<f64>,
    pub g_tangent: [Vec<f64>; 2],
    pub varrho: f64,
    pub rho: f64,
    pub omega: f64,
    pub omega_radicand: f64,
    pub eta: Vec<f64>,
    pub xi: Vec<f64>,
    pub y_chart: [f64; 2],
    pub z_chart: [f64; 2],
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub w: Vec<f64>,
    pub h_lambda: Vec<f64>,
    pub lambda_basis: Vec<Vec<f64>>,
    pub dim_lambda: usize,
    /// |h1_tangential - g_*(J grad varrho)| / (1 + |h1|)
    pub ht_residual_1: f64,
    /// |h2_tangential + g_* grad varrho| / (1 + |h2|)
    pub ht_residual_2: f64,
    pub eta_xi_dot: f64,
    pub eta_xi_min_sv: f64,
    /// |f - (g + g_*Z - rho xi + Omega w)| / (1 + |f|)
    pub parametrization_defect: f64,
    /// Distance between the closed dual formula and the mirrored
    /// parametrization g + g_*Z - rho xi - Omega w.
    pub dual_proof_defect: f64,
    pub dual_point: Vec<f64>,
}

pub fn center_data(
    spec: &ImmersionSpec,
    point: (f64, f64),
    tols: &Tolerances,
    orientation: Orientation,
) -> Result<CenterData> {
    spec.check_point(point.0, point.1)?;
    let comps = spec.map.eval_series(point, 3, tols)?;
    let core = dual_core(&comps, tols)?;

    let g_point = linalg::value_vec(&core.g);
    let gu = linalg::value_vec(&core.gu);
    let gv = linalg::value_vec(&core.gv);
    let g1 = linalg::value_vec(&core.g1);
    let g2 = linalg::value_vec(&core.g2);
    let f = linalg::value_vec(&core.f);
    let h1 = linalg::value_vec(&core.h1);
    let h2 = linalg::value_vec(&core.h2);
    let eta = linalg::value_vec(&core.eta);
    let xi = linalg::value_vec(&core.xi);
    let e1 = linalg::value_vec(&core.e1);
    let e2 = linalg::value_vec(&core.e2);
    let h_lambda = linalg::value_vec(&core.h_lambda);
    let varrho = core.varrho.value();
    let dvarrho = [core.varrho_u.value(), core.varrho_v.value()];

    // chart solves against the g metric
    let mg = [
        [linalg::dot(&gu, &gu), linalg::dot(&gu, &gv)],
        [linalg::dot(&gv, &gu), linalg::dot(&gv, &gv)],
    ];
    let solve2 = |rhs: [f64; 2]| -> Result<[f64; 2]> {
        let sol = linalg::solve(
            vec![vec![mg[0][0], mg[0][1]], vec![mg[1][0], mg[1][1]]],
            vec![rhs[0], rhs[1]],
        )
        .ok_or(Error::DegenerateCenters)?;
        Ok([sol[0], sol[1]])
    };
    let push = |c: [f64; 2]| linalg::add(&linalg::scale_f64(&gu, c[0]), &linalg::scale_f64(&gv, c[1]));

    let y_chart = solve2([linalg::dot(&h1, &gu), linalg::dot(&h1, &gv)])?;
    let z_chart = solve2([linalg::dot(&h2, &gu), linalg::dot(&h2, &gv)])?;
    let grad_chart = solve2(dvarrho)?;
    let grad_amb = push(grad_chart);
    let z_amb = push(z_chart);

    // J grad in the oriented orthonormal frame (G1, G2)
    let p = linalg::dot(&grad_amb, &g1);
    let q = linalg::dot(&grad_amb, &g2);
    let o = orientation.sign();
    let jgrad = linalg::add(&linalg::scale_f64(&g1, -o * q), &linalg::scale_f64(&g2, o * p));

    let h1_t = linalg::sub(&h1, &eta);
    let h2_t = linalg::sub(&h2, &xi);
    let ht_residual_1 = linalg::dist_f64(&h1_t, &jgrad) / (1.0 + linalg::norm_f64(&h1));
    let ht_residual_2 = linalg::norm_f64(&linalg::add(&h2_t, &grad_amb)) / (1.0 + linalg::norm_f64(&h2));

    let xi_nsq = linalg::dot(&xi, &xi);
    let rho = linalg::dot(&grad_amb, &grad_amb) / xi_nsq;
    let omega_radicand = 2.0 * varrho - rho * (rho + 1.0) * xi_nsq;
    if omega_radicand <= 0.0 {
        return Err(Error::DegenerateFrame("omega radicand"));
    }
    let omega = omega_radicand.sqrt();
    let w = linalg::scale_f64(&h_lambda, -1.0 / linalg::norm_f64(&h_lambda));

    // Lambda = orthogonal complement of {G1, G2, e1, e2}
    let dim = f.len();
    let span = [g1.clone(), g2.clone(), e1.clone(), e2.clone()];
    let mut lambda_basis: Vec<Vec<f64>> = Vec::new();
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        let mut r = linalg::project_off(&e, &span);
        r = linalg::project_off(&r, &lambda_basis);
        let n = linalg::norm_f64(&r);
        if n > 1e-6 {
            lambda_basis.push(linalg::scale_f64(&r, 1.0 / n));
        }
    }
    let dim_lambda = lambda_basis.len();

    let sv_ex = linalg::singular_values(&[eta.clone(), xi.clone()]);
    let eta_xi_dot = linalg::dot(&eta, &xi);
    let eta_xi_min_sv = sv_ex[1];

    // f = g + g_*Z - rho xi + Omega w, and the dual mirrors w -> -w
    let mut recon = linalg::add(&g_point, &z_amb);
    recon = linalg::sub(&recon, &linalg::scale_f64(&xi, rho));
    let parametrization_defect = {
        let r = linalg::add(&recon, &linalg::scale_f64(&w, omega));
        linalg::dist_f64(&f, &r) / (1.0 + linalg::norm_f64(&f))
    };
    let dual_point = linalg::value_vec(&core.dual);
    let dual_proof_defect = {
        let r = linalg::sub(&recon, &linalg::scale_f64(&w, omega));
        linalg::dist_f64(&dual_point, &r) / (1.0 + linalg::norm_f64(&dual_point))
    };

    Ok(CenterData {
        g_point,
        g_tangent: [gu, gv],
        varrho,
        rho,
        omega,
        omega_radicand,
        eta,
        xi,
        y_chart,
        z_chart,
        h1,
        h2,
        w,
        h_lambda,
        lambda_basis,
        dim_lambda,
        ht_residual_1,
        ht_residual_2,
        eta_xi_dot,
        eta_xi_min_sv,
        parametrization_defect,
        dual_proof_defect,
        dual_point,
    })
}

/// The dual point with the proof-form cross-check already applied.
pub fn dual_point(spec: &ImmersionSpec, point: (f64, f64), tols: &Tolerances) -> Result<Vec<f64>> {
    Ok(center_data(spec, point, tols, Orientation::default())?.dual_point)
}

// ---------------------------------------------------------------------------
// Verification and classification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct PointResiduals {
    pub u: f64,
    pub v: f64,
    pub same_center: f64,
    pub same_radius: f64,
    pub same_plane3: f64,
    pub conformality: f64,
    pub superconformal_dual: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ResidualAggregate {
    pub same_center: f64,
    pub same_radius: f64,
    pub same_plane3: f64,
    pub conformality: f64,
    pub superconformal_dual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClassificationKind {
    PointDual,
    InversionReflection,
    Inversion,
    Generic,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub kind: ClassificationKind,
    pub p0: Option<Vec<f64>>,
    pub fit_residual: f64,
    pub homothety: f64,
    pub separation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub nu: usize,
    pub nv: usize,
    pub total_cells: usize,
    pub excluded_cells: usize,
    pub failed_points: usize,
    pub points: Vec<PointResiduals>,
    pub max: ResidualAggregate,
    pub mean: ResidualAggregate,
    pub classification: Classification,
}

impl DualityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max.same_center < tol
            && self.max.same_radius < tol
            && self.max.same_plane3 < tol
            && self.max.conformality < tol
            && self.max.superconformal_dual < tol
    }
}

pub fn verify_duality(
    f_spec: &ImmersionSpec,
    ftilde_spec: &ImmersionSpec,
    nu: usize,
    nv: usize,
    tols: &Tolerances,
) -> Result<DualityReport> {
    let total_cells = nu * nv;
    let grid = f_spec.domain.grid(nu, nv);
    let excluded_cells = total_cells - grid.len();
    let mut points = Vec::new();
    let mut failed = 0usize;
    let mut f_samples = Vec::new();
    let mut d_samples = Vec::new();
    for &(u, v) in &grid {
        match point_residuals(f_spec, ftilde_spec, (u, v), tols) {
            Ok((pr, fval, dval)) => {
                points.push(pr);
                f_samples.push(fval);
                d_samples.push(dval);
            }
            Err(_) => failed += 1,
        }
    }
    if (excluded_cells + failed) as f64 > tols.coverage * total_cells as f64 {
        return Err(Error::DegenerateCoverage { excluded: excluded_cells + failed, total: total_cells });
    }
    let mut max = ResidualAggregate::default();
    let mut mean = ResidualAggregate::default();
    for p in &points {
        max.same_center = max.same_center.max(p.same_center);
        max.same_radius = max.same_radius.max(p.same_radius);
        max.same_plane3 = max.same_plane3.max(p.same_plane3);
        max.conformality = max.conformality.max(p.conformality);
        max.superconformal_dual = max.superconformal_dual.max(p.superconformal_dual);
        mean.same_center += p.same_center;
        mean.same_radius += p.same_radius;
        mean.same_plane3 += p.same_plane3;
        mean.conformality += p.conformality;
        mean.superconformal_dual += p.superconformal_dual;
    }
    let n = points.len().max(1) as f64;
    mean.same_center /= n;
    mean.same_radius /= n;
    mean.same_plane3 /= n;
    mean.conformality /= n;
    mean.superconformal_dual /= n;

    let classification = classify_pair(&f_samples, &d_samples, tols);
    Ok(DualityReport {
        nu,
        nv,
        total_cells,
        excluded_cells,
        failed_points: failed,
        points,
        max,
        mean,
        classification,
    })
}

fn point_residuals(
    f_spec: &ImmersionSpec,
    ftilde_spec: &ImmersionSpec,
    p: (f64, f64),
    tols: &Tolerances,
) -> Result<(PointResiduals, Vec<f64>, Vec<f64>)> {
    let jf = f_spec.jet_with(p, 2, tols)?;
    let jt = ftilde_spec.jet_with(p, 2, tols)?;
    let ff = fundamental_forms(&jf, tols)?;
    let ft = fundamental_forms(&jt, tols)?;
    let (hf, ht) = (ff.h_norm(), ft.h_norm());
    if hf <= tols.minimal || ht <= tols.minimal {
        return Err(Error::MinimalPoint);
    }
    let center_f = linalg::add(&ff.position, &linalg::scale_f64(&ff.mean_curvature, 1.0 / (hf * hf)));
    let center_t = linalg::add(&ft.position, &linalg::scale_f64(&ft.mean_curvature, 1.0 / (ht * ht)));
    let plane_f = [
        ff.x1.clone(),
        ff.x2.clone(),
        linalg::scale_f64(&ff.mean_curvature, 1.0 / hf),
    ];
    let plane_t = [
        ft.x1.clone(),
        ft.x2.clone(),
        linalg::scale_f64(&ft.mean_curvature, 1.0 / ht),
    ];
    let pr = PointResiduals {
        u: p.0,
        v: p.1,
        same_center: linalg::dist_f64(&center_f, &center_t),
        same_radius: (hf - ht).abs(),
        same_plane3: linalg::projector_distance(&plane_f, &plane_t),
        conformality: linalg::conformality_defect(&ff.metric, &ft.metric),
        superconformal_dual: superconformal_residual(&ft),
    };
    Ok((pr, ff.position, ft.position))
}

fn bbox_diag(samples: &[Vec<f64>]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let dim = samples[0].len();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for s in samples {
        for k in 0..dim {
            lo[k] = lo[k].min(s[k]);
            hi[k] = hi[k].max(s[k]);
        }
    }
    (0..dim).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt()
}

fn centroid(samples: &[Vec<f64>]) -> Vec<f64> {
    let dim = samples[0].len();
    let mut c = vec![0.0; dim];
    for s in samples {
        c = linalg::add(&c, s);
    }
    linalg::scale_f64(&c, 1.0 / samples.len() as f64)
}

/// Detect the normal forms of the dual: a point, or +-(inversion through a
/// fitted center with a fitted homothety).
pub fn classify_pair(
    f_pts: &[Vec<f64>],
    d_pts: &[Vec<f64>],
    tols: &Tolerances,
) -> Classification {
    let undetermined = Classification {
        kind: ClassificationKind::Undetermined,
        p0: None,
        fit_residual: f64::NAN,
        homothety: f64::NAN,
        separation: f64::NAN,
    };
    if f_pts.len() < 8 {
        return undetermined;
    }
    let scale = 1.0 + bbox_diag(f_pts);
    let coincident = f_pts
        .iter()
        .zip(d_pts)
        .map(|(a, b)| linalg::dist_f64(a, b))
        .fold(0.0f64, f64::max);
    if coincident < 1e-9 * scale {
        return undetermined;
    }
    let diam_d = bbox_diag(d_pts);
    if diam_d < 1e-6 * scale {
        return Classification {
            kind: ClassificationKind::PointDual,
            p0: Some(centroid(d_pts)),
            fit_residual: diam_d / scale,
            homothety: f64::NAN,
            separation: f64::NAN,
        };
    }

    // Gauss-Newton on r_i = log|f_i - p0| + log|d_i - p0| - log c,
    // seeded at the centroid of the dual image
    let dim = f_pts[0].len();
    let mut p0 = centroid(d_pts);
    let mut logc = 0.0f64;
    let mut lm = 1e-3f64;
    let residuals = |p0: &[f64], logc: f64| -> Option<Vec<f64>> {
        let mut r = Vec::with_capacity(f_pts.len());
        for (f, d) in f_pts.iter().zip(d_pts) {
            let a = linalg::dist_f64(f, p0);
            let b = linalg::dist_f64(d, p0);
            if a < 1e-12 || b < 1e-12 {
                return None;
            }
            r.push(a.ln() + b.ln() - logc);
        }
        Some(r)
    };
    let cost = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();
    let mut r = match residuals(&p0, logc) {
        Some(r) => r,
        None => return undetermined,
    };
    for _ in 0..120 {
        // J_i = [-(f_i-p0)/|f_i-p0|^2 - (d_i-p0)/|d_i-p0|^2, -1]
        let n = dim + 1;
        let mut jtj = vec![vec![0.0; n]; n];
        let mut jtr = vec![0.0; n];
        for (i, (f, d)) in f_pts.iter().zip(d_pts).enumerate() {
            let df = linalg::sub(f, &p0);
            let dd = linalg::sub(d, &p0);
            let (a2, b2) = (linalg::dot(&df, &df), linalg::dot(&dd, &dd));
            let mut row: Vec<f64> = (0..dim).map(|k| -df[k] / a2 - dd[k] / b2).collect();
            row.push(-1.0);
            for x in 0..n {
                for y in 0..n {
                    jtj[x][y] += row[x] * row[y];
                }
                jtr[x] += row[x] * r[i];
            }
        }
        for x in 0..dim + 1 {
            jtj[x][x] += lm;
        }
        let delta = match linalg::solve(jtj, jtr.iter().map(|x| -x).collect()) {
            Some(d) => d,
            None => break,
        };
        let mut p0_new = p0.clone();
        for k in 0..dim {
            p0_new[k] += delta[k];
        }
        let logc_new = logc + delta[dim];
        match residuals(&p0_new, logc_new) {
            Some(r_new) if cost(&r_new) < cost(&r) => {
                let step: f64 = delta.iter().map(|x| x * x).sum::<f64>();
                p0 = p0_new;
                logc = logc_new;
                r = r_new;
                lm = (lm * 0.3).max(1e-12);
                if step.sqrt() < 1e-14 {
                    break;
                }
            }
            _ => {
                lm *= 10.0;
                if lm > 1e8 {
                    break;
                }
            }
        }
    }
    let c = logc.exp();

    // residuals of the two signed models
    let mut res_plus = 0.0f64;
    let mut res_minus = 0.0f64;
    for (f, d) in f_pts.iter().zip(d_pts) {
        let df = linalg::sub(f, &p0);
        let inv = linalg::scale_f64(&df, c / linalg::dot(&df, &df));
        let plus = linalg::add(&p0, &inv);
        let minus = linalg::sub(&p0, &inv);
        res_plus = res_plus.max(linalg::dist_f64(d, &plus));
        res_minus = res_minus.max(linalg::dist_f64(d, &minus));
    }
    res_plus /= scale;
    res_minus /= scale;
    let (best, other, kind) = if res_minus <= res_plus {
        (res_minus, res_plus, ClassificationKind::InversionReflection)
    } else {
        (res_plus, res_minus, ClassificationKind::Inversion)
    };
    let separation = other / best.max(1e-300);
    if best < tols.classify_fit {
        if separation >= 10.0 {
            Classification { kind, p0: Some(p0), fit_residual: best, homothety: c, separation }
        } else {
            Classification {
                kind: ClassificationKind::Undetermined,
                p0: Some(p0),
                fit_residual: best,
                homothety: c,
                separation,
            }
        }
    } else {
        Classification {
            kind: ClassificationKind::Generic,
            p0: None,
            fit_residual: best,
            homothety: c,
            separation,
        }
    }
}

pub fn classify_dual(
    spec: &ImmersionSpec,
    nu: usize,
    nv: usize,
    tols: &Tolerances,
) -> Result<Classification> {
    let grid = spec.domain.grid(nu, nv);
    let mut f_pts = Vec::new();
    let mut d_pts = Vec::new();
    for &p in &grid {
        if let (Ok(f), Ok(d)) = (spec.value_with(p, tols), dual_point(spec, p, tols)) {
            f_pts.push(f);
            d_pts.push(d);
        }
    }
    if (f_pts.len() as f64) < 0.9 * grid.len() as f64 || f_pts.is_empty() {
        return Err(Error::InsufficientSamples { usable: f_pts.len(), total: grid.len() });
    }
    Ok(classify_pair(&f_pts, &d_pts, tols))
}

// ---------------------------------------------------------------------------
// Lemma-level checks
// ---------------------------------------------------------------------------

/// Residuals of the mean curvature of the surface of centers against its
/// predicted P-components: <H_g, eta> = 0 and (H_g)^xi = -2 |h2|^{-2} xi.
#[derive(Debug, Clone, Serialize)]
pub struct CentersHgCheck {
    pub eta_residual: f64,
    pub xi_residual: f64,
}

pub fn centers_mean_curvature_check(
    spec: &ImmersionSpec,
    point: (f64, f64),
    tols: &Tolerances,
) -> Result<CentersHgCheck> {
    let g_spec = spec.wrapped(|inner| SurfaceMap::Centers { inner });
    let g_jet = g_spec.jet_with(point, 2, tols)?;
    let gfd = fundamental_forms(&g_jet, tols)?;
    let hg = &gfd.mean_curvature;
    if spec.ambient_dim() == 4 {
        let v = linalg::norm_f64(hg);
        return Ok(CentersHgCheck { eta_residual: v, xi_residual: v });
    }
    let cd = center_data(spec, point, tols, Orientation::default())?;
    let eta_hat = linalg::scale_f64(&cd.eta, 1.0 / linalg::norm_f64(&cd.eta));
    let eta_residual = linalg::dot(hg, &eta_hat).abs();
    let xi_hat = linalg::scale_f64(&cd.xi, 1.0 / linalg::norm_f64(&cd.xi));
    let h2_sq = linalg::dot(&cd.h2, &cd.h2);
    let proj = linalg::scale_f64(&xi_hat, linalg::dot(hg, &xi_hat));
    let predicted = linalg::scale_f64(&cd.xi, -2.0 / h2_sq);
    let xi_residual = linalg::dist_f64(&proj, &predicted);
    Ok(CentersHgCheck { eta_residual, xi_residual })
}

/// Largest tangential component (along g) of the orthonormal basis of the
/// complement of the first normal space. Zero when the basis is empty.
pub fn first_normal_perp_check(
    spec: &ImmersionSpec,
    point: (f64, f64),
    tols: &Tolerances,
) -> Result<f64> {
    let jet = spec.jet_with(point, 2, tols)?;
    let fd = fundamental_forms(&jet, tols)?;
    let xi = fd.xi.as_ref().ok_or(Error::DegenerateFrame("xi frame needed"))?;
    let dim = spec.ambient_dim();
    let span = [
        fd.x1.clone(),
        fd.x2.clone(),
        xi.xi1.clone(),
        xi.xi2.clone(),
        xi.delta.clone(),
    ];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        let mut r = linalg::project_off(&e, &span);
        r = linalg::project_off(&r, &basis);
        let n = linalg::norm_f64(&r);
        if n > 1e-6 {
            basis.push(linalg::scale_f64(&r, 1.0 / n));
        }
    }
    if basis.is_empty() {
        return Ok(0.0);
    }
    let g_jet = centers_jet(spec, point, 1, tols)?.jet;
    let gu = g_jet.extract_derivative(1, 0).map_err(Error::from)?;
    let gv = g_jet.extract_derivative(0, 1).map_err(Error::from)?;
    let g1 = linalg::scale_f64(&gu, 1.0 / linalg::norm_f64(&gu));
    let mut g2 = linalg::sub(&gv, &linalg::scale_f64(&g1, linalg::dot(&gv, &g1)));
    g2 = linalg::scale_f64(&g2, 1.0 / linalg::norm_f64(&g2));
    let mut worst = 0.0f64;
    for b in &basis {
        let t = (linalg::dot(b, &g1).powi(2) + linalg::dot(b, &g2).powi(2)).sqrt();
        worst = worst.max(t);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::ImmersionSpec;
    use approx::assert_relative_eq;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn unit_sphere_central_spheres() {
        let spec = ImmersionSpec::from_source(
            "domain u in [0.3, 2.8], v in [0, 6.28]; [sin(u)*cos(v), sin(u)*sin(v), cos(u), 0]",
        )
        .unwrap();
        for p in [(1.0, 0.5), (1.7, 3.0), (2.2, 5.5)] {
            let s = central_sphere(&spec.jet(p, 2).unwrap(), &tols()).unwrap();
            assert!(linalg::norm_f64(&s.center) < 1e-10);
            assert_relative_eq!(s.radius, 1.0, epsilon = 1e-10);
            // f(p) lies on the sphere and center - f within plane3
            let f = spec.value(p).unwrap();
            assert_relative_eq!(linalg::dist_f64(&f, &s.center), s.radius, epsilon = 1e-10);
            let d = linalg::sub(&s.center, &f);
            let off = linalg::project_off(&d, &s.plane3);
            assert!(linalg::norm_f64(&off) < 1e-10);
        }
    }

    #[test]
    fn plane_has_no_central_sphere() {
        let spec = ImmersionSpec::from_source("[u, v, 0, 0]").unwrap();
        assert!(matches!(
            central_sphere(&spec.jet((0.1, 0.2), 2).unwrap(), &tols()),
            Err(Error::MinimalPoint)
        ));
    }

    #[test]
    fn classify_identity_pair_is_undetermined() {
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|k| {
                let t = k as f64 * 0.37;
                vec![t.cos(), t.sin(), 0.2 * t, 1.0, 0.0]
            })
            .collect();
        let c = classify_pair(&pts, &pts, &tols());
        assert_eq!(c.kind, ClassificationKind::Undetermined);
    }

    #[test]
    fn classify_recovers_inversion_reflection() {
        // synthetic: d = p0 - (f - p0)/|f - p0|^2 with p0 = 0
        let f_pts: Vec<Vec<f64>> = (0..60)
            .map(|k| {
                let t = k as f64 * 0.11 + 0.3;
                vec![1.5 + t.cos(), t.sin(), 0.3 * (2.0 * t).sin(), 0.1 * t, 0.5]
            })
            .collect();
        let d_pts: Vec<Vec<f64>> = f_pts
            .iter()
            .map(|f| linalg::scale_f64(f, -1.0 / linalg::dot(f, f)))
            .collect();
        let c = classify_pair(&f_pts, &d_pts, &tols());
        assert_eq!(c.kind, ClassificationKind::InversionReflection);
        let p0 = c.p0.unwrap();
        assert!(linalg::norm_f64(&p0) < 1e-7, "p0 = {p0:?}");
        assert_relative_eq!(c.homothety, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn classify_detects_point_dual() {
        let f_pts: Vec<Vec<f64>> = (0..30)
            .map(|k| vec![k as f64 * 0.1, 1.0, 0.0, 0.0, 2.0])
            .collect();
        let d_pts: Vec<Vec<f64>> = (0..30).map(|_| vec![3.0, 1.0, 2.0, 0.0, 0.0]).collect();
        let c = classify_pair(&f_pts, &d_pts, &tols());
        assert_eq!(c.kind, ClassificationKind::PointDual);
        assert!(linalg::dist_f64(&c.p0.unwrap(), &[3.0, 1.0, 2.0, 0.0, 0.0]) < 1e-12);
    }
}
