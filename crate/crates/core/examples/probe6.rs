use spherecong::duality::{dualize, dual_point};
use spherecong::frames::{fundamental_forms, s_willmore_residual, superconformal_residual, willmore_residual};
use spherecong::gallery;
use spherecong::linalg;
use spherecong::moebius::{push_immersion, stereo_relation_residual, MoebiusMap, StereoModel};
use spherecong::tolerances::Tolerances;
use std::collections::BTreeMap;
use std::time::Instant;

fn main() {
    let tols = Tolerances::default();
    // Willmore residuals for acceptance #7
    for id in ["veronese_s4", "stereo_torus_r5", "round_sphere_slice"] {
        let e = gallery::make(id, &BTreeMap::new()).unwrap();
        let t0 = Instant::now();
        let mut worst = 0.0f64;
        for p in e.spec.domain.grid(5, 5) {
            match willmore_residual(&e.spec, p, tols.willmore_fd_step, &tols) {
                Ok(r) => worst = worst.max(r),
                Err(err) => println!("{id} willmore ERR at {p:?}: {err}"),
            }
        }
        println!("{id}: willmore max = {worst:.3e} ({:?})", t0.elapsed());
    }
    // graph s_willmore residual at a probe point (value to freeze)
    let g = gallery::make("graph_generic_r5", &BTreeMap::new()).unwrap();
    let p = (0.25, 0.35);
    let j = g.spec.jet(p, 3).unwrap();
    println!("graph s_willmore at {p:?} = {:.12e}", s_willmore_residual(&j, &tols).unwrap());
    println!("graph willmore at {p:?} = {:.6e}", willmore_residual(&g.spec, p, tols.willmore_fd_step, &tols).unwrap());

    // stereo relations
    for (id, model) in [("stereo_veronese_r4", StereoModel::Spherical),
                        ("stereo_torus_r5", StereoModel::Spherical),
                        ("stereo_hyperbolic_r4", StereoModel::Hyperbolic)] {
        let e = gallery::make(id, &BTreeMap::new()).unwrap();
        let mut worst = 0.0f64;
        for p in e.spec.domain.grid(5, 5) {
            worst = worst.max(stereo_relation_residual(&e.spec, model, p, &tols).unwrap());
        }
        println!("{id}: stereo {model:?} defect = {worst:.3e}");
    }
    let g5 = gallery::make("graph_generic_r5", &BTreeMap::new()).unwrap();
    println!("graph spherical stereo = {:.3e}", stereo_relation_residual(&g5.spec, StereoModel::Spherical, (0.25, 0.35), &tols).unwrap());

    // conformal invariance of superconformality under inversion
    let torus = gallery::make("stereo_torus_r5", &BTreeMap::new()).unwrap();
    let inv = MoebiusMap::inversion(vec![0.3, -0.2, 0.4, 0.1, 2.5], 1.0);
    let pushed = push_immersion(&inv, &torus.spec);
    let mut worst = 0.0f64;
    for p in torus.spec.domain.grid(5, 5) {
        let fd = fundamental_forms(&pushed.jet(p, 2).unwrap(), &tols).unwrap();
        worst = worst.max(superconformal_residual(&fd));
    }
    println!("pushed torus superconformal max = {worst:.3e}");

    // double dual pointwise
    let dual = dualize(&torus.spec);
    let ddual = dualize(&dual);
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for p in [(1.0, 2.0), (3.0, 4.5), (5.5, 0.7), (2.2, 2.9)] {
        let f = torus.spec.value(p).unwrap();
        let dd = ddual.value(p).unwrap();
        worst = worst.max(linalg::dist_f64(&f, &dd));
    }
    println!("double dual max defect = {worst:.3e} ({:?})", t0.elapsed());
    let _ = dual_point;
}
