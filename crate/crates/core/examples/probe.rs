use spherecong::gallery;
use spherecong::tolerances::Tolerances;
use std::collections::BTreeMap;

fn main() {
    let tols = Tolerances::default();
    for id in gallery::IDS {
        let entry = gallery::make(id, &BTreeMap::new()).unwrap();
        match gallery::certify(&entry, 11, 11, &tols) {
            Ok(r) => println!(
                "{:24} OK  sup={:?} swill={:?} hmin={:.2e} hmax={:.2e} umb={} rad={:?} iso={:?} model={:?}",
                id, r.max_superconformal.map(|x| format!("{x:.2e}")),
                r.max_s_willmore.map(|x| format!("{x:.2e}")),
                r.min_h_norm, r.max_h_norm, r.umbilic_points,
                r.max_radial_defect.map(|x| format!("{x:.2e}")),
                r.max_isotropy_defect.map(|x| format!("{x:.2e}")),
                r.max_model_defect.map(|x| format!("{x:.2e}")),
            ),
            Err(e) => println!("{:24} FAIL {e}", id),
        }
    }
}
