use spherecong::duality::{center_data, dual_point, centers_jet};
use spherecong::gallery;
use spherecong::linalg;
use spherecong::tolerances::{Orientation, Tolerances};
use std::collections::BTreeMap;

fn main() {
    let tols = Tolerances::default();
    let torus = gallery::make("stereo_torus_r5", &BTreeMap::new()).unwrap();
    println!("== stereo_torus_r5 ==");
    for p in [(1.0, 2.0), (3.0, 4.5), (5.5, 0.7)] {
        match center_data(&torus.spec, p, &tols, Orientation::Positive) {
            Ok(cd) => {
                let f = torus.spec.value(p).unwrap();
                let expected = linalg::scale_f64(&f, -1.0 / linalg::dot(&f, &f));
                let dual_err = linalg::dist_f64(&cd.dual_point, &expected);
                println!(
                    "p={p:?} ht1={:.2e} ht2={:.2e} par={:.2e} proof={:.2e} dimL={} eta.xi={:.2e} dual_vs_-I={:.3e}",
                    cd.ht_residual_1, cd.ht_residual_2, cd.parametrization_defect,
                    cd.dual_proof_defect, cd.dim_lambda, cd.eta_xi_dot, dual_err
                );
            }
            Err(e) => println!("p={p:?} ERR {e}"),
        }
        match centers_jet(&torus.spec, p, 2, &tols) {
            Ok(cj) => println!("   eq19 defect = {:.3e}", cj.eq19_defect),
            Err(e) => println!("   centers_jet ERR {e}"),
        }
    }
    println!("== inverted_isotropic_r6 ==");
    let iso = gallery::make("inverted_isotropic_r6", &BTreeMap::new()).unwrap();
    let mut pts = Vec::new();
    for p in iso.spec.domain.grid(5, 5) {
        match dual_point(&iso.spec, p, &tols) {
            Ok(d) => pts.push(d),
            Err(e) => println!("p={p:?} ERR {e}"),
        }
    }
    if !pts.is_empty() {
        let c = &pts[0];
        let spread = pts.iter().map(|x| linalg::dist_f64(x, c)).fold(0.0f64, f64::max);
        println!("dual spread = {spread:.3e}, first = {:?}", &c[..6.min(c.len())]);
    }
}
