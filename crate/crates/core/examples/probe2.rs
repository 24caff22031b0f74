use spherecong::tolerances::Orientation;
use spherecong::weierstrass::{quartic_data, rouxel_series, RouxelSign};
use spherecong::taylor::Jet;

fn main() {
    let data = quartic_data();
    for rmin in [0.2, 0.3, 0.4] {
        for sign in [RouxelSign::Plus, RouxelSign::Minus] {
            let mut min_e = f64::INFINITY;
            for i in 0..65 {
                for j in 0..65 {
                    let u = -0.8 + 1.6 * i as f64 / 64.0;
                    let v = -0.8 + 1.6 * j as f64 / 64.0;
                    if (u * u + v * v).sqrt() < rmin { continue; }
                    if let Ok(comps) = rouxel_series(&data, sign, Orientation::Positive, (u, v), 1) {
                        let jet = Jet::new((u, v), comps);
                        let fu = jet.extract_derivative(1, 0).unwrap();
                        let e: f64 = fu.iter().map(|x| x * x).sum();
                        if e < min_e { min_e = e; }
                    }
                }
            }
            println!("rmin {rmin}: {sign:?}: min |f_u|^2 = {min_e:.3e}");
        }
    }
}
