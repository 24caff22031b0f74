use spherecong::duality::{classify_dual, dualize, verify_duality, centers_mean_curvature_check, first_normal_perp_check};
use spherecong::gallery;
use spherecong::tolerances::Tolerances;
use std::collections::BTreeMap;
use std::time::Instant;

fn main() {
    let tols = Tolerances::default();
    let torus = gallery::make("stereo_torus_r5", &BTreeMap::new()).unwrap();
    let t0 = Instant::now();
    let dual = dualize(&torus.spec);
    match verify_duality(&torus.spec, &dual, 11, 11, &tols) {
        Ok(r) => println!(
            "verify torus: center={:.2e} radius={:.2e} plane={:.2e} conf={:.2e} supdual={:.2e} cls={:?} ({:?})",
            r.max.same_center, r.max.same_radius, r.max.same_plane3,
            r.max.conformality, r.max.superconformal_dual, r.classification.kind, t0.elapsed()
        ),
        Err(e) => println!("verify ERR {e}"),
    }
    let t0 = Instant::now();
    match classify_dual(&torus.spec, 11, 11, &tols) {
        Ok(c) => println!("classify torus: {:?} p0={:?} fit={:.2e} c={:.4} sep={:.1e} ({:?})",
            c.kind, c.p0.as_ref().map(|p| p.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>()),
            c.fit_residual, c.homothety, c.separation, t0.elapsed()),
        Err(e) => println!("classify ERR {e}"),
    }
    // Lemma Hg + Corollary checks
    for p in [(1.0, 2.0), (3.0, 4.5)] {
        match centers_mean_curvature_check(&torus.spec, p, &tols) {
            Ok(c) => println!("Hg check {p:?}: eta={:.2e} xi={:.2e}", c.eta_residual, c.xi_residual),
            Err(e) => println!("Hg ERR {e}"),
        }
        match first_normal_perp_check(&torus.spec, p, &tols) {
            Ok(r) => println!("N1perp {p:?}: {r:.2e}"),
            Err(e) => println!("N1perp ERR {e}"),
        }
    }
    let iso = gallery::make("inverted_isotropic_r6", &BTreeMap::new()).unwrap();
    for p in [(0.5, 0.4), (-0.6, 0.3)] {
        match first_normal_perp_check(&iso.spec, p, &tols) {
            Ok(r) => println!("iso N1perp {p:?}: {r:.2e}"),
            Err(e) => println!("iso N1perp ERR {e}"),
        }
        match centers_mean_curvature_check(&iso.spec, p, &tols) {
            Ok(c) => println!("iso Hg {p:?}: eta={:.2e} xi={:.2e}", c.eta_residual, c.xi_residual),
            Err(e) => println!("iso Hg ERR {e}"),
        }
    }
    match classify_dual(&iso.spec, 11, 11, &tols) {
        Ok(c) => println!("classify iso: {:?} p0={:?} fit={:.2e}",
            c.kind, c.p0.as_ref().map(|p| p.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>()), c.fit_residual),
        Err(e) => println!("classify iso ERR {e}"),
    }
}
