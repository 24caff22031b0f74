//! Reproducible generators for the test surfaces, each a full
//! `ImmersionSpec` with expected invariant flags that `certify` re-checks.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frames::{chart_forms, fundamental_forms, s_willmore_residual, superconformal_residual};
use crate::immersion::{Disk, Domain, ImmersionSpec, SurfaceMap};
use crate::linalg::{self, Metric};
use crate::moebius::{self, MoebiusMap};
use crate::tolerances::{Orientation, Tolerances};
use crate::weierstrass::{enneper_data, quartic_data, RouxelSign};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedFlags {
    pub superconformal: Option<bool>,
    pub minimal: Option<bool>,
    pub minimal_in_sphere_model: Option<bool>,
    pub s_willmore: Option<bool>,
    pub codim: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GalleryEntry {
    pub id: String,
    pub params: BTreeMap<String, f64>,
    pub expected: ExpectedFlags,
    /// Center of the round/hyperbolic model the surface lives on, if any.
    pub model_center: Option<Vec<f64>>,
    pub model_radius: Option<f64>,
    pub spec: ImmersionSpec,
}

pub const IDS: &[&str] = &[
    "plane",
    "paraboloid_r4",
    "holo_curve_z2",
    "holo_curve_generic",
    "round_sphere_slice",
    "enneper_r3slice_r4",
    "veronese_s4",
    "equilateral_torus_s5",
    "stereo_veronese_r4",
    "stereo_torus_r5",
    "isotropic_minimal_r6",
    "inverted_isotropic_r6",
    "graph_generic_r5",
    "hyperbolic_patch",
    "hyperbolic_geodesic_h2",
    "stereo_hyperbolic_r4",
    "rouxel_enneper_r4",
    "rouxel_quartic_r4",
];

pub fn all() -> Vec<GalleryEntry> {
    IDS.iter().map(|id| make(id, &BTreeMap::new()).expect("builtin id")).collect()
}

fn flags(
    superconformal: Option<bool>,
    minimal: Option<bool>,
    minimal_in_sphere_model: Option<bool>,
    s_willmore: Option<bool>,
    codim: usize,
) -> ExpectedFlags {
    ExpectedFlags { superconformal, minimal, minimal_in_sphere_model, s_willmore, codim }
}

fn dsl(source: &str) -> ImmersionSpec {
    ImmersionSpec::from_source(source).expect("builtin gallery source")
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn check_param_keys(params: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<()> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::BadParams(format!("unknown parameter `{k}`")));
        }
    }
    Ok(())
}

pub fn make(id: &str, params: &BTreeMap<String, f64>) -> Result<GalleryEntry> {
    let mut model_center = None;
    let mut model_radius = None;
    if !matches!(id, "inverted_isotropic_r6" | "hyperbolic_geodesic_h2") {
        check_param_keys(params, &[])?;
    }
    let (spec, expected) = match id {
        "plane" => (dsl("[u, v, 0, 0]"), flags(Some(false), Some(true), None, None, 2)),
        "paraboloid_r4" => (
            dsl("[u, v, u^2 + v^2, 0]"),
            flags(Some(false), Some(false), None, None, 2),
        ),
        "holo_curve_z2" => (
            dsl("[u, v, u^2 - v^2, 2*u*v]"),
            flags(Some(true), Some(true), None, Some(true), 2),
        ),
        "holo_curve_generic" => (
            dsl(
                "exclude disk(0, 0, 0.2); \
                 [u, v, u^3 - 3*u*v^2 + u, 3*u^2*v - v^3 + v]",
            ),
            flags(Some(true), Some(true), None, Some(true), 2),
        ),
        "round_sphere_slice" => {
            model_center = Some(vec![0.0, 0.0, 0.0, 0.0]);
            model_radius = Some(1.0);
            (
                dsl(
                    "domain u in [0.4, 2.7], v in [0.1, 6.2]; \
                     [sin(u)*cos(v), sin(u)*sin(v), cos(u), 0]",
                ),
                flags(Some(false), Some(false), Some(true), None, 2),
            )
        }
        "enneper_r3slice_r4" => (
            dsl(
                "domain u in [-0.9, 0.9], v in [-0.9, 0.9]; \
                 [u - (u^3 - 3*u*v^2)/3, -(v + (3*u^2*v - v^3)/3), u^2 - v^2, 0]",
            ),
            flags(Some(false), Some(true), None, Some(true), 2),
        ),
        "veronese_s4" => {
            model_center = Some(vec![0.0, 0.0, 0.0, 0.0, 0.5]);
            model_radius = Some(0.5);
            (
                dsl(
                    "let h = 0.8660254037844386; \
                     domain u in [0.45, 2.69], v in [0.15, 6.13]; \
                     [h*sin(u)^2*sin(v)*cos(v), \
                      h*sin(u)*cos(u)*cos(v), \
                      h*sin(u)*cos(u)*sin(v), \
                      h*sin(u)^2*(cos(v)^2 - sin(v)^2)/2, \
                      sin(u)^2/4 - cos(u)^2/2 + 0.5]",
                ),
                flags(Some(true), Some(false), Some(true), Some(true), 3),
            )
        }
        "equilateral_torus_s5" => {
            model_center = Some(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.5]);
            model_radius = Some(0.5);
            (
                dsl(
                    "let s = 0.28867513459481287; \
                     domain u in [0.05, 6.23], v in [0.05, 6.23]; \
                     [s*cos(u), s*sin(u), s*cos(v), s*sin(v), s*cos(u+v), 0.5 - s*sin(u+v)]",
                ),
                flags(Some(true), Some(false), Some(true), Some(true), 4),
            )
        }
        "stereo_veronese_r4" => {
            let model = make("veronese_s4", &BTreeMap::new())?;
            (
                moebius::stereographic_image(&model.spec),
                flags(Some(true), Some(false), Some(false), Some(true), 2),
            )
        }
        "stereo_torus_r5" => {
            let model = make("equilateral_torus_s5", &BTreeMap::new())?;
            (
                moebius::stereographic_image(&model.spec),
                flags(Some(true), Some(false), Some(false), Some(true), 3),
            )
        }
        "isotropic_minimal_r6" => (
            dsl(
                "domain u in [-0.9, 0.9], v in [-0.9, 0.9]; \
                 [u, v, u^2 - v^2, 2*u*v, u^3 - 3*u*v^2, 3*u^2*v - v^3]",
            ),
            flags(Some(true), Some(true), Some(false), Some(true), 4),
        ),
        "inverted_isotropic_r6" => {
            check_param_keys(params, &["center_last", "radius"])?;
            let cl = param(params, "center_last", 3.0);
            let radius = param(params, "radius", 1.0);
            if radius <= 0.0 {
                return Err(Error::BadParams("radius must be positive".into()));
            }
            let base = make("isotropic_minimal_r6", &BTreeMap::new())?;
            let inv = MoebiusMap::inversion(vec![0.0, 0.0, 0.0, 0.0, 0.0, cl], radius);
            let mut spec = moebius::push_immersion(&inv, &base.spec);
            // theta vanishes at z = 0 and the surface of centers branches
            spec.domain.exclusions.push(Disk { cu: 0.0, cv: 0.0, r: 0.1 });
            (spec, flags(Some(true), Some(false), Some(false), Some(true), 4))
        }
        "graph_generic_r5" => (
            dsl(
                "domain u in [-0.8, 0.8], v in [-0.8, 0.8]; \
                 [u, v, u^2 + v^3, u*v, u^3 - v^2]",
            ),
            flags(Some(false), Some(false), Some(false), Some(false), 3),
        ),
        "hyperbolic_patch" => {
            model_center = Some(vec![0.0, 0.0, 0.0, 0.0, 0.5]);
            model_radius = Some(0.5);
            (
                dsl(
                    "domain u in [0.25, 1.0], v in [0.25, 1.0]; \
                     [u, v, 0.2*(u^2 - v^2), 0.3*u*v, \
                      0.5 + sqrt(0.25 + u^2 + v^2 + 0.04*(u^2 - v^2)^2 + 0.09*(u*v)^2)]",
                )
                .with_metric(Metric::Lorentzian),
                flags(None, None, None, None, 3),
            )
        }
        "hyperbolic_geodesic_h2" => {
            check_param_keys(params, &["alpha"])?;
            let alpha = param(params, "alpha", 0.3);
            let c2a = (2.0 * alpha).cos();
            if c2a <= 0.0 {
                return Err(Error::BadParams("alpha must keep cos(2 alpha) > 0".into()));
            }
            model_center = Some(vec![0.0, 0.0, 0.0, 0.0, 0.5]);
            model_radius = Some(0.5);
            let source = format!(
                "let sa = {sa}; let ca = {ca}; let ic = {ic}; \
                 domain u in [-0.8, 0.8], v in [-0.8, 0.8]; \
                 [u, v, sa*sqrt((u^2 + v^2 + 0.25)*ic), 0, \
                  0.5 + ca*sqrt((u^2 + v^2 + 0.25)*ic)]",
                sa = alpha.sin(),
                ca = alpha.cos(),
                ic = 1.0 / c2a,
            );
            (
                ImmersionSpec::from_source(&source)?.with_metric(Metric::Lorentzian),
                flags(None, None, Some(true), None, 3),
            )
        }
        "stereo_hyperbolic_r4" => {
            let model = make("hyperbolic_geodesic_h2", &BTreeMap::new())?;
            (
                moebius::stereographic_image(&model.spec),
                flags(Some(false), Some(false), Some(false), None, 2),
            )
        }
        "rouxel_enneper_r4" => (
            ImmersionSpec {
                map: SurfaceMap::Rouxel {
                    data: enneper_data(),
                    sign: RouxelSign::Plus,
                    orientation: Orientation::Positive,
                },
                domain: Domain::new((-0.9, 0.9), (-0.9, 0.9)),
                ambient: Metric::Euclidean,
            },
            flags(Some(true), Some(false), Some(false), Some(true), 2),
        ),
        "rouxel_quartic_r4" => (
            ImmersionSpec {
                map: SurfaceMap::Rouxel {
                    data: quartic_data(),
                    sign: RouxelSign::Plus,
                    orientation: Orientation::Positive,
                },
                // K + K_perp of the centers vanishes at z = 0, where the
                // plus-sign surface fails to immerse
                domain: Domain::new((-0.8, 0.8), (-0.8, 0.8))
                    .with_exclusion(Disk { cu: 0.0, cv: 0.0, r: 0.25 }),
                ambient: Metric::Euclidean,
            },
            flags(Some(true), Some(false), Some(false), Some(true), 2),
        ),
        _ => return Err(Error::UnknownId(id.to_string())),
    };
    Ok(GalleryEntry {
        id: id.to_string(),
        params: params.clone(),
        expected,
        model_center,
        model_radius,
        spec,
    })
}

/// Residual evidence gathered by `certify`.
#[derive(Debug, Clone, Serialize)]
pub struct CertifyReport {
    pub id: String,
    pub points_checked: usize,
    pub umbilic_points: usize,
    pub failed_points: usize,
    pub max_superconformal: Option<f64>,
    pub min_h_norm: f64,
    pub max_h_norm: f64,
    pub max_s_willmore: Option<f64>,
    pub max_model_defect: Option<f64>,
    pub max_radial_defect: Option<f64>,
    pub max_isotropy_defect: Option<f64>,
}

/// Sweep the entry's grid and compare observations with expected_flags.
pub fn certify(entry: &GalleryEntry, nu: usize, nv: usize, tols: &Tolerances) -> Result<CertifyReport> {
    let fail = |flag: &str| Error::CertificationFailed {
        id: entry.id.clone(),
        flag: flag.to_string(),
    };
    let grid = entry.spec.domain.grid(nu, nv);
    let mut report = CertifyReport {
        id: entry.id.clone(),
        points_checked: 0,
        umbilic_points: 0,
        failed_points: 0,
        max_superconformal: None,
        min_h_norm: f64::INFINITY,
        max_h_norm: 0.0,
        max_s_willmore: None,
        max_model_defect: None,
        max_radial_defect: None,
        max_isotropy_defect: None,
    };

    let lorentzian = entry.spec.ambient == Metric::Lorentzian;
    for &p in &grid {
        // model membership applies in both signatures
        if let (Some(center), Some(radius)) = (&entry.model_center, entry.model_radius) {
            let x = entry.spec.value_with(p, tols)?;
            let d = linalg::sub(&x, center);
            let defect = match entry.spec.ambient {
                Metric::Euclidean => (linalg::norm_f64(&d) - radius).abs(),
                Metric::Lorentzian => {
                    (linalg::dot_metric(Metric::Lorentzian, &d, &d) + radius * radius).abs()
                }
            };
            let m = report.max_model_defect.get_or_insert(0.0);
            *m = m.max(defect);
        }

        if lorentzian {
            // Lorentzian entries: check minimality inside the model via the
            // signature-aware chart forms (H parallel to the radial field)
            if entry.expected.minimal_in_sphere_model == Some(true) {
                let jet = entry.spec.jet_with(p, 2, tols)?;
                let cf = chart_forms(&jet, Metric::Lorentzian)?;
                let x = jet.value();
                let d = linalg::sub(&x, entry.model_center.as_ref().unwrap());
                let dd = linalg::dot_metric(Metric::Lorentzian, &d, &d);
                let c = linalg::dot_metric(Metric::Lorentzian, &cf.mean, &d) / dd;
                let off = linalg::sub(&cf.mean, &linalg::scale_f64(&d, c));
                let defect = linalg::norm_f64(&off) / (1.0 + linalg::norm_f64(&cf.mean));
                let m = report.max_radial_defect.get_or_insert(0.0);
                *m = m.max(defect);
            }
            report.points_checked += 1;
            continue;
        }

        let jet = match entry.spec.jet_with(p, 3, tols) {
            Ok(j) => j,
            Err(_) => {
                report.failed_points += 1;
                continue;
            }
        };
        let fd = fundamental_forms(&jet, tols)?;
        report.points_checked += 1;
        let hn = fd.h_norm();
        report.min_h_norm = report.min_h_norm.min(hn);
        report.max_h_norm = report.max_h_norm.max(hn);
        if fd.umbilic {
            report.umbilic_points += 1;
        } else {
            let s = superconformal_residual(&fd);
            let m = report.max_superconformal.get_or_insert(0.0);
            *m = m.max(s);
            if let Ok(sw) = s_willmore_residual(&jet, tols) {
                let m = report.max_s_willmore.get_or_insert(0.0);
                *m = m.max(sw);
            }
            if entry.expected.superconformal == Some(true) && entry.expected.minimal == Some(true) {
                // 1-isotropy: alpha(dz, dz) . alpha(dz, dz) = 0
                let diff = linalg::sub(&fd.alpha11, &fd.alpha22);
                let re: f64 = diff.iter().map(|x| x * x).sum::<f64>()
                    - 4.0 * fd.alpha12.iter().map(|x| x * x).sum::<f64>();
                let im: f64 = -4.0 * linalg::dot(&diff, &fd.alpha12);
                let defect = (re * re + im * im).sqrt()
                    / (1.0 + fd.alpha_norm * fd.alpha_norm);
                let m = report.max_isotropy_defect.get_or_insert(0.0);
                *m = m.max(defect);
            }
        }
        // sphere-model surfaces: H of the Euclidean immersion is radial
        if entry.expected.minimal_in_sphere_model == Some(true) {
            let center = entry.model_center.as_ref().unwrap();
            let x = fd.position.clone();
            let d = linalg::sub(&x, center);
            let r = linalg::norm_f64(&d);
            let c = linalg::dot(&fd.mean_curvature, &d) / (r * r);
            let off = linalg::sub(&fd.mean_curvature, &linalg::scale_f64(&d, c));
            let defect = linalg::norm_f64(&off) / (1.0 + hn);
            let m = report.max_radial_defect.get_or_insert(0.0);
            *m = m.max(defect);
        }
    }

    if report.points_checked == 0 {
        return Err(Error::InsufficientSamples { usable: 0, total: grid.len() });
    }
    if let Some(d) = report.max_model_defect {
        if d > 1e-10 {
            return Err(fail("model membership"));
        }
    }
    if lorentzian {
        if let Some(d) = report.max_radial_defect {
            if d > 1e-8 {
                return Err(fail("minimal_in_sphere_model"));
            }
        }
        return Ok(report);
    }

    match entry.expected.superconformal {
        Some(true) => {
            if report.umbilic_points > 0 {
                return Err(fail("superconformal (umbilic points found)"));
            }
            if report.max_superconformal.unwrap_or(f64::INFINITY) >= tols.superconformal_gate {
                return Err(fail("superconformal"));
            }
        }
        Some(false) => {
            let all_umbilic = report.umbilic_points == report.points_checked;
            let clearly_not = report.max_superconformal.map_or(false, |m| m > 1e-6);
            if !(all_umbilic || clearly_not) {
                return Err(fail("not superconformal"));
            }
        }
        None => {}
    }
    match entry.expected.minimal {
        Some(true) => {
            if report.max_h_norm > 1e-8 {
                return Err(fail("minimal"));
            }
        }
        Some(false) => {
            if report.max_h_norm <= 1e-8 {
                return Err(fail("not minimal"));
            }
        }
        None => {}
    }
    if entry.expected.minimal_in_sphere_model == Some(true) {
        if report.max_radial_defect.unwrap_or(f64::INFINITY) > 1e-8 {
            return Err(fail("minimal_in_sphere_model"));
        }
        // Remark criterion: the surface of centers degenerates to a point
        let probe = grid[grid.len() / 2];
        match crate::duality::centers_jet(&entry.spec, probe, 1, tols) {
            Err(Error::DegenerateCenters) => {}
            other => {
                let _ = other;
                return Err(fail("centers must degenerate for sphere-model surfaces"));
            }
        }
    }
    match entry.expected.s_willmore {
        Some(true) => {
            if report.max_s_willmore.unwrap_or(f64::INFINITY) >= tols.s_willmore_gate {
                return Err(fail("s_willmore"));
            }
        }
        Some(false) => {
            if report.max_s_willmore.map_or(true, |m| m < 1e-4) {
                return Err(fail("not s_willmore"));
            }
        }
        None => {}
    }
    if let Some(d) = report.max_isotropy_defect {
        if d > 1e-10 {
            return Err(fail("1-isotropy"));
        }
    }
    Ok(report)
}
