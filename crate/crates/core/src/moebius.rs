//! Conformal transformations of R^{n+2} and the Lorentzian model:
//! inversions, reflections, the stereographic configurations used by the
//! sphere/hyperbolic pipelines, and the normal-bundle isometry P with its
//! transformation laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, TaylorError};
use crate::frames::{chart_forms, normal_component, shape_operator};
use crate::immersion::{ImmersionSpec, SurfaceMap};
use crate::linalg::{self, Metric};
use crate::taylor::{Real, Scalar, TaylorScalar};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MoebiusKind {
    Inversion { center: Vec<f64>, radius: f64 },
    Reflection { center: Vec<f64> },
    Composite(Vec<MoebiusMap>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub kind: MoebiusKind,
    pub signature: Metric,
}

/// Squared-distance floor below which an inversion reports a pole hit.
const POLE_EPS: f64 = 1e-12;

impl MoebiusMap {
    pub fn inversion(center: Vec<f64>, radius: f64) -> Self {
        assert!(radius > 0.0);
        MoebiusMap { kind: MoebiusKind::Inversion { center, radius }, signature: Metric::Euclidean }
    }

    pub fn lorentz_inversion(center: Vec<f64>, radius: f64) -> Self {
        assert!(radius > 0.0);
        MoebiusMap { kind: MoebiusKind::Inversion { center, radius }, signature: Metric::Lorentzian }
    }

    pub fn reflection(center: Vec<f64>) -> Self {
        MoebiusMap { kind: MoebiusKind::Reflection { center }, signature: Metric::Euclidean }
    }

    pub fn composite(maps: Vec<MoebiusMap>) -> Self {
        assert!(!maps.is_empty());
        MoebiusMap { kind: MoebiusKind::Composite(maps), signature: Metric::Euclidean }
    }

    /// Apply over any scalar; the series form is what `push_immersion`
    /// evaluates so jets of composed surfaces stay exact.
    pub fn apply_series<S: Scalar>(&self, p: &[S]) -> Result<Vec<S>> {
        match &self.kind {
            MoebiusKind::Inversion { center, radius } => {
                if center.len() != p.len() {
                    return Err(Error::DimensionMismatch { expected: center.len(), got: p.len() });
                }
                let c: Vec<S> = center.iter().map(|x| S::of(*x)).collect();
                let d = linalg::sub(p, &c);
                let q = linalg::dot_metric(self.signature, &d, &d);
                if linalg::val(&q).abs() <= POLE_EPS {
                    return Err(Error::PoleHit);
                }
                let r2 = radius * radius;
                match self.signature {
                    // T(p) = c + R^2 (p - c) / |p - c|^2
                    Metric::Euclidean => {
                        let w = q.recip().map_err(pole_from_div)?.scale(S::R::of(r2));
                        Ok(linalg::add(&c, &linalg::scale(&d, &w)))
                    }
                    // T(p) = c - R^2 (p - c) / <p - c, p - c>
                    Metric::Lorentzian => {
                        let w = q.recip().map_err(pole_from_div)?.scale(S::R::of(-r2));
                        Ok(linalg::add(&c, &linalg::scale(&d, &w)))
                    }
                }
            }
            MoebiusKind::Reflection { center } => {
                if center.len() != p.len() {
                    return Err(Error::DimensionMismatch { expected: center.len(), got: p.len() });
                }
                let c: Vec<S> = center.iter().map(|x| S::of(2.0 * *x)).collect();
                Ok(linalg::sub(&c, p))
            }
            MoebiusKind::Composite(maps) => {
                let mut out = p.to_vec();
                for m in maps {
                    out = m.apply_series(&out)?;
                }
                Ok(out)
            }
        }
    }

    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.apply_series(p)
    }
}

fn pole_from_div(e: TaylorError) -> Error {
    match e {
        TaylorError::DivisionNearZero(_) => Error::PoleHit,
        other => Error::Taylor(other),
    }
}

/// Compose a surface with a Moebius map; jets of the composite are exact.
pub fn push_immersion(map: &MoebiusMap, spec: &ImmersionSpec) -> ImmersionSpec {
    spec.wrapped(|inner| SurfaceMap::Moebius { map: map.clone(), inner })
}

/// The normal-bundle isometry of an inversion centered at `center`:
/// P mu = mu - 2 <f - c, mu> (f - c) / |f - c|^2.
pub fn normal_isometry(center: &[f64], f_point: &[f64], mu: &[f64]) -> Result<Vec<f64>> {
    normal_isometry_metric(Metric::Euclidean, center, f_point, mu)
}

pub fn normal_isometry_metric(
    metric: Metric,
    center: &[f64],
    f_point: &[f64],
    mu: &[f64],
) -> Result<Vec<f64>> {
    let d = linalg::sub(f_point, center);
    let q = linalg::dot_metric(metric, &d, &d);
    if q.abs() <= POLE_EPS {
        return Err(Error::PoleHit);
    }
    let c = 2.0 * linalg::dot_metric(metric, &d, mu) / q;
    Ok(linalg::sub(mu, &linalg::scale_f64(&d, c)))
}

/// Residuals of the inversion transformation laws at a point: the mean
/// curvature law and the shape operator law, both compared against direct
/// jet computation of the pushed surface.
#[derive(Debug, Clone)]
pub struct LawCheck {
    pub mean_curvature_residual: f64,
    pub shape_operator_residual: f64,
}

pub fn mean_curvature_law_check(
    spec: &ImmersionSpec,
    map: &MoebiusMap,
    point: (f64, f64),
    tols: &Tolerances,
) -> Result<LawCheck> {
    let (center, radius) = match &map.kind {
        MoebiusKind::Inversion { center, radius } => (center.clone(), *radius),
        _ => return Err(Error::BadParams("law check needs an inversion".into())),
    };
    let metric = map.signature;
    let jet = spec.jet_with(point, 2, tols)?;
    let cf = chart_forms(&jet, metric)?;
    let f = jet.value();
    let d = linalg::sub(&f, &center);
    let q = linalg::dot_metric(metric, &d, &d);
    if q.abs() <= POLE_EPS {
        return Err(Error::PoleHit);
    }
    let d_perp = normal_component(&cf, metric, &d);

    let pushed = push_immersion(map, spec);
    let pushed_jet = pushed.jet_with(point, 2, tols)?;
    let pcf = chart_forms(&pushed_jet, metric)?;

    let r2 = radius * radius;
    let law_arg = linalg::add(&linalg::scale_f64(&cf.mean, q), &linalg::scale_f64(&d_perp, 2.0));
    let mut h_law = normal_isometry_metric(metric, &center, &f, &law_arg)?;
    h_law = match metric {
        Metric::Euclidean => linalg::scale_f64(&h_law, 1.0 / r2),
        Metric::Lorentzian => linalg::scale_f64(&h_law, -1.0 / r2),
    };
    let h_direct = &pcf.mean;
    let mean_curvature_residual =
        linalg::dist_f64(h_direct, &h_law) / (1.0 + linalg::norm_f64(h_direct));

    // shape operator law over a spanning set of normal directions
    let dim = spec.ambient_dim();
    let mut shape_operator_residual = 0.0f64;
    let mut checked = 0;
    for k in 0..dim {
        let mut e_k = vec![0.0; dim];
        e_k[k] = 1.0;
        let mu = normal_component(&cf, metric, &e_k);
        let msq = linalg::dot_metric(metric, &mu, &mu).abs();
        if msq < 1e-4 {
            continue;
        }
        let a_mu = shape_operator(&cf, metric, &mu);
        let p_mu = normal_isometry_metric(metric, &center, &f, &mu)?;
        let a_pushed = shape_operator(&pcf, metric, &p_mu);
        let dm = linalg::dot_metric(metric, &d, &mu);
        let mut norm_law = 0.0f64;
        let mut diff = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let ident = if i == j { 1.0 } else { 0.0 };
                let law = match metric {
                    Metric::Euclidean => (q * a_mu[i][j] + 2.0 * dm * ident) / r2,
                    Metric::Lorentzian => (-q * a_mu[i][j] - 2.0 * dm * ident) / r2,
                };
                diff += (a_pushed[i][j] - law).powi(2);
                norm_law += law * law;
            }
        }
        shape_operator_residual =
            shape_operator_residual.max(diff.sqrt() / (1.0 + norm_law.sqrt()));
        checked += 1;
    }
    if checked == 0 {
        return Err(Error::DegenerateFrame("no usable normal direction"));
    }
    Ok(LawCheck { mean_curvature_residual, shape_operator_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StereoModel {
    Spherical,
    Hyperbolic,
}

/// Defect of the stereographic-image relation at a point:
/// spherical `2 f_perp = -(1+|f|^2) H`, hyperbolic `f_perp = (1-|f|^2)/2 H`.
pub fn stereo_relation_residual(
    spec: &ImmersionSpec,
    model: StereoModel,
    point: (f64, f64),
    tols: &Tolerances,
) -> Result<f64> {
    let jet = spec.jet_with(point, 2, tols)?;
    let cf = chart_forms(&jet, Metric::Euclidean)?;
    if linalg::norm_f64(&cf.mean) <= tols.minimal {
        return Err(Error::MinimalPoint);
    }
    let f = jet.value();
    let f_perp = normal_component(&cf, Metric::Euclidean, &f);
    let fsq = linalg::dot(&f, &f);
    let (lhs, rhs) = match model {
        StereoModel::Spherical => (
            linalg::scale_f64(&f_perp, 2.0),
            linalg::scale_f64(&cf.mean, -(1.0 + fsq)),
        ),
        StereoModel::Hyperbolic => (f_perp, linalg::scale_f64(&cf.mean, 0.5 * (1.0 - fsq))),
    };
    Ok(linalg::dist_f64(&lhs, &rhs) / (1.0 + linalg::norm_f64(&lhs) + linalg::norm_f64(&rhs)))
}

/// Lorentz-model membership defect: |<p - c, p - c> + R^2| for points meant
/// to lie on the hyperbolic model H_R(c).
pub fn hyperbolic_model_defect(p: &[f64], center: &[f64], radius: f64) -> f64 {
    let d = linalg::sub(p, center);
    (linalg::dot_metric(Metric::Lorentzian, &d, &d) + radius * radius).abs()
}

/// The paper's stereographic configurations: the model sphere/hyperboloid of
/// radius 1/2 centered at e/2 inside R^{n+3} (resp. L^{n+3}), projected by
/// the inversion centered at the pole e. `dim` is the model ambient n+3.
pub fn stereographic_inversion(dim: usize, metric: Metric) -> MoebiusMap {
    let mut e = vec![0.0; dim];
    e[dim - 1] = 1.0;
    match metric {
        Metric::Euclidean => MoebiusMap::inversion(e, 1.0),
        Metric::Lorentzian => MoebiusMap::lorentz_inversion(e, 1.0),
    }
}

/// Compose a model surface with the stereographic inversion and drop the
/// certified-zero last coordinate.
pub fn stereographic_image(model_spec: &ImmersionSpec) -> ImmersionSpec {
    let dim = model_spec.ambient_dim();
    let map = stereographic_inversion(dim, model_spec.ambient);
    let pushed = push_immersion(&map, model_spec);
    let mut out = pushed.wrapped(|inner| SurfaceMap::DropLast { inner });
    out.ambient = Metric::Euclidean;
    out
}

/// Apply the differential of a map to a tangent vector at p, numerically
/// exact via series composition.
pub fn differential(map: &MoebiusMap, p: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    // curve t -> p + t x, derivative of T along it at t = 0
    let order = 1;
    let series: Vec<TaylorScalar<f64>> = p
        .iter()
        .zip(x)
        .map(|(pi, xi)| {
            let mut s = TaylorScalar::constant(*pi, order);
            s = s + TaylorScalar::variable(0.0, crate::taylor::Var::U, order).scale_by(*xi);
            s
        })
        .collect();
    let image = map.apply_series(&series)?;
    Ok(image.iter().map(|c| c.partial(1, 0).unwrap()).collect())
}
