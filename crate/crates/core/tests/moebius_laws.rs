//! Transformation laws of inversions against direct jet computation, the
//! stereographic relations, and gallery certification.

mod common;

use std::collections::BTreeMap;

use spherecong::error::Error;
use spherecong::frames::{fundamental_forms, superconformal_residual};
use spherecong::gallery;
use spherecong::immersion::chart_jet_values;
use spherecong::linalg::{self, Metric};
use spherecong::moebius::{
    mean_curvature_law_check, normal_isometry, push_immersion, stereo_relation_residual,
    MoebiusMap, StereoModel,
};
use spherecong::tolerances::Tolerances;

fn tols() -> Tolerances {
    Tolerances::default()
}

#[test]
fn euclidean_transformation_laws() {
    let t = tols();
    // concentric inversion of the round sphere
    let sphere = gallery::make("round_sphere_slice", &BTreeMap::new()).unwrap().spec;
    let inv0 = MoebiusMap::inversion(vec![0.0; 4], 1.0);
    let c = mean_curvature_law_check(&sphere, &inv0, (1.2, 0.8), &t).unwrap();
    assert!(c.mean_curvature_residual < 1e-9);
    assert!(c.shape_operator_residual < 1e-9);

    // holomorphic curve pushed through an off-surface inversion, two radii
    let holo = gallery::make("holo_curve_z2", &BTreeMap::new()).unwrap().spec;
    for radius in [1.0, 1.7] {
        let inv = MoebiusMap::inversion(vec![0.0, 0.0, 0.0, 3.0], radius);
        for p in [(0.3, -0.2), (0.6, 0.5)] {
            let c = mean_curvature_law_check(&holo, &inv, p, &t).unwrap();
            assert!(c.mean_curvature_residual < 1e-7, "H law {:.2e}", c.mean_curvature_residual);
            assert!(c.shape_operator_residual < 1e-7, "A law {:.2e}", c.shape_operator_residual);
        }
    }
}

#[test]
fn lorentzian_transformation_laws() {
    let t = tols();
    let patch = gallery::make("hyperbolic_patch", &BTreeMap::new()).unwrap().spec;
    let mut center = vec![0.0; 5];
    center[4] = 3.0;
    let linv = MoebiusMap::lorentz_inversion(center, 1.0);
    for p in [(0.5, 0.5), (0.8, 0.4)] {
        let c = mean_curvature_law_check(&patch, &linv, p, &t).unwrap();
        assert!(c.mean_curvature_residual < 1e-7, "H law {:.2e}", c.mean_curvature_residual);
        assert!(c.shape_operator_residual < 1e-7, "A law {:.2e}", c.shape_operator_residual);
    }
    // the stereographic pole configuration itself
    let mut e = vec![0.0; 5];
    e[4] = 1.0;
    let linv_e = MoebiusMap::lorentz_inversion(e, 1.0);
    let c = mean_curvature_law_check(&patch, &linv_e, (0.5, 0.5), &t).unwrap();
    assert!(c.mean_curvature_residual < 1e-7);
    assert!(c.shape_operator_residual < 1e-7);
}

#[test]
fn stereo_relations_certify_the_images() {
    let t = tols();
    for (id, model) in [
        ("stereo_veronese_r4", StereoModel::Spherical),
        ("stereo_torus_r5", StereoModel::Spherical),
        ("stereo_hyperbolic_r4", StereoModel::Hyperbolic),
    ] {
        let spec = gallery::make(id, &BTreeMap::new()).unwrap().spec;
        for p in spec.domain.grid(5, 5) {
            let r = stereo_relation_residual(&spec, model, p, &t).unwrap();
            assert!(r < 1e-7, "{id} {model:?} defect {r:.2e} at {p:?}");
        }
    }
    // control surface is far from both relations
    let graph = gallery::make("graph_generic_r5", &BTreeMap::new()).unwrap().spec;
    let r = stereo_relation_residual(&graph, StereoModel::Spherical, (0.25, 0.35), &t).unwrap();
    assert!(r > 1e-2, "graph spherical relation {r:.2e}");
    // minimal surfaces have no relation to check
    let holo = gallery::make("holo_curve_z2", &BTreeMap::new()).unwrap().spec;
    assert!(matches!(
        stereo_relation_residual(&holo, StereoModel::Spherical, (0.3, 0.2), &t),
        Err(Error::MinimalPoint)
    ));
}

#[test]
fn veronese_push_satisfies_inversion_distance_pattern() {
    // |T(p) - e| |p - e| = 1 for the unit inversion centered at the pole
    let model = gallery::make("veronese_s4", &BTreeMap::new()).unwrap().spec;
    let mut e = vec![0.0; 5];
    e[4] = 1.0;
    let inv = MoebiusMap::inversion(e.clone(), 1.0);
    let pushed = push_immersion(&inv, &model);
    for p in model.domain.grid(5, 5) {
        let x = model.value(p).unwrap();
        let y = pushed.value(p).unwrap();
        let prod = linalg::dist_f64(&x, &e) * linalg::dist_f64(&y, &e);
        assert!((prod - 1.0).abs() < 1e-12, "pattern defect {:.2e}", (prod - 1.0).abs());
    }
}

#[test]
fn p_maps_normals_to_pushed_normals() {
    let t = tols();
    let spec = gallery::make("holo_curve_z2", &BTreeMap::new()).unwrap().spec;
    let center = vec![0.0, 0.0, 0.0, 3.0];
    let inv = MoebiusMap::inversion(center.clone(), 1.0);
    let pushed = push_immersion(&inv, &spec);
    for p in [(0.3, -0.2), (0.5, 0.6)] {
        let fd = fundamental_forms(&spec.jet(p, 2).unwrap(), &t).unwrap();
        let f = spec.value(p).unwrap();
        // any normal direction of f
        let mut nu = vec![0.13, -0.5, 0.7, 0.9];
        nu = linalg::project_off(&nu, &[fd.x1.clone(), fd.x2.clone()]);
        let pnu = normal_isometry(&center, &f, &nu).unwrap();
        assert!((linalg::norm_f64(&pnu) - linalg::norm_f64(&nu)).abs() < 1e-12);
        // pushed tangent plane
        let pj = pushed.jet(p, 2).unwrap();
        let cj = chart_jet_values(&pj, 1).unwrap();
        for tangent in [cj.at(1, 0), cj.at(0, 1)] {
            let cosine = linalg::dot(tangent, &pnu)
                / (linalg::norm_f64(tangent) * linalg::norm_f64(&pnu));
            assert!(cosine.abs() < 1e-8, "P image not normal: {cosine:.2e}");
        }
    }
}

#[test]
fn gallery_certifies_on_default_grids() {
    let t = tols();
    for entry in gallery::all() {
        let report = gallery::certify(&entry, 21, 21, &t)
            .unwrap_or_else(|e| panic!("{}: {e}", entry.id));
        assert!(report.points_checked > 0);
    }
}

#[test]
fn conformal_invariance_of_superconformality() {
    let t = tols();
    // pass/fail at the gate is preserved under an off-surface inversion
    for (id, expect_pass) in [("stereo_torus_r5", true), ("graph_generic_r5", false)] {
        let spec = gallery::make(id, &BTreeMap::new()).unwrap().spec;
        let dim = spec.ambient_dim();
        let mut center = vec![0.4; dim];
        center[dim - 1] = 3.0;
        let pushed = push_immersion(&MoebiusMap::inversion(center, 1.0), &spec);
        for p in spec.domain.grid(4, 4) {
            let before = {
                let fd = fundamental_forms(&spec.jet(p, 2).unwrap(), &t).unwrap();
                superconformal_residual(&fd) < t.superconformal_gate
            };
            let after = {
                let fd = fundamental_forms(&pushed.jet(p, 2).unwrap(), &t).unwrap();
                superconformal_residual(&fd) < t.superconformal_gate
            };
            assert_eq!(before, after, "{id} at {p:?}");
            assert_eq!(before, expect_pass, "{id} at {p:?}");
        }
    }
}
