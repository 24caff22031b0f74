use spherecong::duality::verify_duality;
use spherecong::gallery;
use spherecong::immersion::SurfaceMap;
use spherecong::linalg;
use spherecong::taylor::Jet;
use spherecong::tolerances::{Orientation, Tolerances};
use spherecong::weierstrass::*;
use std::collections::BTreeMap;

fn main() {
    let tols = Tolerances::default();
    for id in ["rouxel_enneper_r4", "rouxel_quartic_r4"] {
        println!("== {id} ==");
        let f = gallery::make(id, &BTreeMap::new()).unwrap();
        let data = if id.contains("enneper") { enneper_data() } else { quartic_data() };
        let sign = RouxelSign::Plus;

        // forward checks
        let pts = f.spec.domain.grid(7, 7);
        match codim2_pair(&f.spec, &pts, &tols, Orientation::Positive) {
            Ok(pair) => {
                println!("codim2: |H_g|max={:.2e} conj={:.2e}", pair.max_g_mean_curvature, pair.max_conjugacy_defect);
                // centers equals the Weierstrass g pointwise
                let mut worst = 0.0f64;
                for &p in &pts {
                    let g_rec = pair.centers.value(p).unwrap();
                    // g = Re Phi from the data directly:
                    let comps = rouxel_series(&data, sign, Orientation::Positive, p, 0).unwrap();
                    let _ = comps;
                    let gw = weierstrass_g(&data, p);
                    worst = worst.max(linalg::dist_f64(&g_rec, &gw));
                }
                println!("centers vs weierstrass g: {:.3e}", worst);
                // metric identity: <,>_f = -|h|^2 (K + Kperp) <,>_g
                let mut worst_m = 0.0f64;
                for &p in &pts {
                    let jf = f.spec.jet(p, 2).unwrap();
                    let jg = pair.centers.jet_with(p, 2, &tols).unwrap();
                    let (k, kperp) = gauss_and_normal_curvature(&jg, &tols).unwrap();
                    let h = weierstrass_h(&data, p);
                    let hsq = linalg::dot(&h, &h);
                    let factor = -hsq * (k + kperp);
                    let mf = metric_of(&jf);
                    let mg = metric_of(&jg);
                    let mut d = 0.0f64;
                    for i in 0..2 { for j in 0..2 {
                        d = d.max((mf[i][j] - factor * mg[i][j]).abs());
                    }}
                    let scale = 1.0 + mf[0][0].abs().max(mf[1][1].abs());
                    worst_m = worst_m.max(d / scale);
                }
                println!("metric identity (K+Kperp): {:.3e}", worst_m);
                // partner passes verify_duality
                match verify_duality(&f.spec, &pair.partner, 9, 9, &tols) {
                    Ok(r) => println!(
                        "partner verify: center={:.2e} radius={:.2e} plane={:.2e} conf={:.2e} supdual={:.2e} cls={:?}",
                        r.max.same_center, r.max.same_radius, r.max.same_plane3,
                        r.max.conformality, r.max.superconformal_dual, r.classification.kind),
                    Err(e) => println!("partner verify ERR {e}"),
                }
            }
            Err(e) => println!("codim2_pair ERR {e}"),
        }
    }
    // stereo veronese is also codim-2 and its dual is -I o f
    let sv = gallery::make("stereo_veronese_r4", &BTreeMap::new()).unwrap();
    let partner = sv.spec.wrapped(|inner| SurfaceMap::RouxelPartner { inner, orientation: Orientation::Positive });
    match verify_duality(&sv.spec, &partner, 9, 9, &tols) {
        Ok(r) => println!(
            "stereo_veronese partner: center={:.2e} radius={:.2e} plane={:.2e} conf={:.2e} cls={:?} p0={:?} hom={:.4}",
            r.max.same_center, r.max.same_radius, r.max.same_plane3, r.max.conformality,
            r.classification.kind,
            r.classification.p0.as_ref().map(|p| p.iter().map(|x| format!("{x:.1e}")).collect::<Vec<_>>()),
            r.classification.homothety),
        Err(e) => println!("stereo_veronese ERR {e}"),
    }
}

fn weierstrass_g(data: &WeierstrassData, p: (f64, f64)) -> Vec<f64> {
    // integrate phi exactly: antiderivative with the stored constant
    let z = num_complex::Complex64::new(p.0, p.1);
    data.phi.iter().enumerate().map(|(k, poly)| {
        let coeffs = poly.coeffs();
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (d, c) in coeffs.iter().enumerate().rev() {
            acc = acc + c * z.powu(d as u32 + 1) / (d as f64 + 1.0);
        }
        let c0 = num_complex::Complex64::new(data.constant[k].0, data.constant[k].1);
        (acc + c0).re
    }).collect()
}

fn weierstrass_h(data: &WeierstrassData, p: (f64, f64)) -> Vec<f64> {
    let z = num_complex::Complex64::new(p.0, p.1);
    data.phi.iter().enumerate().map(|(k, poly)| {
        let coeffs = poly.coeffs();
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (d, c) in coeffs.iter().enumerate().rev() {
            acc = acc + c * z.powu(d as u32 + 1) / (d as f64 + 1.0);
        }
        let c0 = num_complex::Complex64::new(data.constant[k].0, data.constant[k].1);
        -(acc + c0).im
    }).collect()
}

fn metric_of(j: &Jet<f64>) -> [[f64; 2]; 2] {
    let fu = j.extract_derivative(1, 0).unwrap();
    let fv = j.extract_derivative(0, 1).unwrap();
    [[linalg::dot(&fu, &fu), linalg::dot(&fu, &fv)], [linalg::dot(&fu, &fv), linalg::dot(&fv, &fv)]]
}
