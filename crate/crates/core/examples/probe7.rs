use spherecong::gallery;
use spherecong::moebius::{mean_curvature_law_check, MoebiusMap};
use spherecong::tolerances::Tolerances;
use std::collections::BTreeMap;

fn main() {
    let tols = Tolerances::default();
    // Euclidean: concentric inversion of the round sphere
    let sph = gallery::make("round_sphere_slice", &BTreeMap::new()).unwrap();
    let inv0 = MoebiusMap::inversion(vec![0.0; 4], 1.0);
    let c = mean_curvature_law_check(&sph.spec, &inv0, (1.2, 0.8), &tols).unwrap();
    println!("sphere concentric: H={:.2e} A={:.2e}", c.mean_curvature_residual, c.shape_operator_residual);

    // holomorphic curve pushed through an off-surface inversion
    let holo = gallery::make("holo_curve_z2", &BTreeMap::new()).unwrap();
    let inv = MoebiusMap::inversion(vec![0.0, 0.0, 0.0, 3.0], 1.0);
    for p in [(0.3, -0.2), (0.6, 0.5)] {
        let c = mean_curvature_law_check(&holo.spec, &inv, p, &tols).unwrap();
        println!("holo {p:?}: H={:.2e} A={:.2e}", c.mean_curvature_residual, c.shape_operator_residual);
    }
    // radius != 1 to exercise the scaling
    let inv2 = MoebiusMap::inversion(vec![0.0, 0.0, 0.0, 3.0], 1.7);
    let c = mean_curvature_law_check(&holo.spec, &inv2, (0.3, -0.2), &tols).unwrap();
    println!("holo radius 1.7: H={:.2e} A={:.2e}", c.mean_curvature_residual, c.shape_operator_residual);

    // Lorentzian on the hyperbolic patch
    let hp = gallery::make("hyperbolic_patch", &BTreeMap::new()).unwrap();
    let mut e = vec![0.0; 5];
    e[4] = 1.0;
    let linv = MoebiusMap::lorentz_inversion(linalg_scale(&e, 3.0), 1.0);
    for p in [(0.5, 0.5), (0.8, 0.4)] {
        match mean_curvature_law_check(&hp.spec, &linv, p, &tols) {
            Ok(c) => println!("lorentz {p:?}: H={:.2e} A={:.2e}", c.mean_curvature_residual, c.shape_operator_residual),
            Err(err) => println!("lorentz {p:?} ERR {err}"),
        }
    }
    // also the stereographic center e itself
    let linv_e = MoebiusMap::lorentz_inversion(e, 1.0);
    match mean_curvature_law_check(&hp.spec, &linv_e, (0.5, 0.5), &tols) {
        Ok(c) => println!("lorentz center e: H={:.2e} A={:.2e}", c.mean_curvature_residual, c.shape_operator_residual),
        Err(err) => println!("lorentz center e ERR {err}"),
    }
}

fn linalg_scale(v: &[f64], c: f64) -> Vec<f64> {
    v.iter().map(|x| x * c).collect()
}
