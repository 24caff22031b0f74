//! Taylor-free oracle pipeline: plain f64 evaluation plus Richardson
//! central differences, used to cross-check the jet-based operators.
#![allow(dead_code)]

use num_complex::Complex64;
use spherecong::immersion::{ImmersionSpec, SurfaceMap};
use spherecong::linalg;
use spherecong::weierstrass::WeierstrassData;

/// Plain f64 evaluation of the direct (non-derived) surface maps.
pub fn direct_value(map: &SurfaceMap, p: (f64, f64)) -> Option<Vec<f64>> {
    match map {
        SurfaceMap::Dsl(ast) => ast.eval_components(&p.0, &p.1).ok(),
        SurfaceMap::Moebius { map: m, inner } => {
            direct_value(inner, p).and_then(|x| m.apply(&x).ok())
        }
        SurfaceMap::DropLast { inner } => direct_value(inner, p).map(|mut x| {
            x.pop();
            x
        }),
        SurfaceMap::Affine { linear, offset, inner } => {
            let x = direct_value(inner, p)?;
            let dim = offset.len();
            let mut out = offset.clone();
            match linear {
                Some(mat) => {
                    for i in 0..dim {
                        for (j, xj) in x.iter().enumerate() {
                            out[i] += mat[i][j] * xj;
                        }
                    }
                }
                None => {
                    for i in 0..dim {
                        out[i] += x[i];
                    }
                }
            }
            Some(out)
        }
        SurfaceMap::ChartRotated { angle, inner } => {
            let q = (
                angle.cos() * p.0 - angle.sin() * p.1,
                angle.sin() * p.0 + angle.cos() * p.1,
            );
            direct_value(inner, q)
        }
        _ => None,
    }
}

/// Oracle evaluation: the pure-f64 path where available, otherwise the
/// value-level series path (order 0).
pub fn value(spec: &ImmersionSpec, p: (f64, f64)) -> Option<Vec<f64>> {
    direct_value(&spec.map, p).or_else(|| spec.value(p).ok())
}

fn rich1(f: &dyn Fn(f64) -> Option<Vec<f64>>, x: f64, h: f64) -> Option<Vec<f64>> {
    let d = |h: f64| -> Option<Vec<f64>> {
        let fp = f(x + h)?;
        let fm = f(x - h)?;
        Some(linalg::scale_f64(&linalg::sub(&fp, &fm), 1.0 / (2.0 * h)))
    };
    let d1 = d(h)?;
    let d2 = d(h / 2.0)?;
    Some(linalg::sub(
        &linalg::scale_f64(&d2, 4.0 / 3.0),
        &linalg::scale_f64(&d1, 1.0 / 3.0),
    ))
}

/// d^{a+b} f / du^a dv^b by nested Richardson differences of plain values.
pub fn fd_partial(spec: &ImmersionSpec, p: (f64, f64), a: usize, b: usize, h: f64) -> Option<Vec<f64>> {
    if a > 0 {
        rich1(&|u| fd_partial(spec, (u, p.1), a - 1, b, h), p.0, h)
    } else if b > 0 {
        rich1(&|v| fd_partial(spec, (p.0, v), 0, b - 1, h), p.1, h)
    } else {
        value(spec, p)
    }
}

pub struct OracleFrames {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub x1_chart: [f64; 2],
    pub x2_chart: [f64; 2],
    pub alpha11: Vec<f64>,
    pub alpha12: Vec<f64>,
    pub alpha22: Vec<f64>,
    pub mean: Vec<f64>,
}

/// Frames from finite differences only.
pub fn oracle_frames(spec: &ImmersionSpec, p: (f64, f64), h: f64) -> Option<OracleFrames> {
    let fu = fd_partial(spec, p, 1, 0, h)?;
    let fv = fd_partial(spec, p, 0, 1, h)?;
    let fuu = fd_partial(spec, p, 2, 0, h)?;
    let fuv = fd_partial(spec, p, 1, 1, h)?;
    let fvv = fd_partial(spec, p, 0, 2, h)?;
    let e = linalg::dot(&fu, &fu);
    let a = 1.0 / e.sqrt();
    let x1 = linalg::scale_f64(&fu, a);
    let w = linalg::sub(&fv, &linalg::scale_f64(&x1, linalg::dot(&fv, &x1)));
    let wn = linalg::norm_f64(&w);
    let x2 = linalg::scale_f64(&w, 1.0 / wn);
    let b = -(linalg::dot(&fu, &fv) / e) / wn;
    let c = 1.0 / wn;
    let frame = [x1.clone(), x2.clone()];
    let perp = |z: &[f64]| linalg::project_off(z, &frame);
    let (p_uu, p_uv, p_vv) = (perp(&fuu), perp(&fuv), perp(&fvv));
    let alpha11 = linalg::scale_f64(&p_uu, a * a);
    let alpha12 = linalg::add(
        &linalg::scale_f64(&p_uu, a * b),
        &linalg::scale_f64(&p_uv, a * c),
    );
    let alpha22 = {
        let t1 = linalg::scale_f64(&p_uu, b * b);
        let t2 = linalg::scale_f64(&p_uv, 2.0 * b * c);
        let t3 = linalg::scale_f64(&p_vv, c * c);
        linalg::add(&linalg::add(&t1, &t2), &t3)
    };
    let mean = linalg::scale_f64(&linalg::add(&alpha11, &alpha22), 0.5);
    Some(OracleFrames { x1, x2, x1_chart: [a, 0.0], x2_chart: [b, c], alpha11, alpha12, alpha22, mean })
}

/// S-Willmore residual from the oracle pipeline alone: H field by finite
/// differences of finite differences.
pub fn oracle_s_willmore(spec: &ImmersionSpec, p: (f64, f64), h2: f64) -> Option<f64> {
    let of = oracle_frames(spec, p, 1e-3)?;
    let h_field = |q: (f64, f64)| -> Option<Vec<f64>> {
        oracle_frames(spec, q, 1e-3).map(|f| f.mean)
    };
    let dhu = rich1(&|u| h_field((u, p.1)), p.0, h2)?;
    let dhv = rich1(&|v| h_field((p.0, v)), p.1, h2)?;
    let frame = [of.x1.clone(), of.x2.clone()];
    let [a, _] = of.x1_chart;
    let [b, c] = of.x2_chart;
    let g1 = linalg::project_off(&linalg::scale_f64(&dhu, a), &frame);
    let g2 = linalg::project_off(
        &linalg::add(&linalg::scale_f64(&dhu, b), &linalg::scale_f64(&dhv, c)),
        &frame,
    );
    // A = (a11 - a22) - 2i a12, B = g1 - i g2
    let diff = linalg::sub(&of.alpha11, &of.alpha22);
    let a_c: Vec<Complex64> = diff
        .iter()
        .zip(&of.alpha12)
        .map(|(re, im)| Complex64::new(*re, -2.0 * im))
        .collect();
    let b_c: Vec<Complex64> = g1
        .iter()
        .zip(&g2)
        .map(|(re, im)| Complex64::new(*re, -im))
        .collect();
    let aa: f64 = a_c.iter().map(|z| z.norm_sqr()).sum();
    if aa < 1e-16 {
        return None;
    }
    let ba: Complex64 = b_c.iter().zip(&a_c).map(|(x, y)| x * y.conj()).sum();
    let coeff = ba / aa;
    let mut off = 0.0f64;
    let mut bn = 0.0f64;
    for (x, y) in b_c.iter().zip(&a_c) {
        off += (x - coeff * y).norm_sqr();
        bn += x.norm_sqr();
    }
    Some(off.sqrt() / (1.0 + bn.sqrt()))
}

/// Exact integration of polynomial Weierstrass data: (g, h) at a point.
pub fn weierstrass_gh(data: &WeierstrassData, p: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
    let z = Complex64::new(p.0, p.1);
    let mut g = Vec::with_capacity(4);
    let mut h = Vec::with_capacity(4);
    for (k, poly) in data.phi.iter().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (d, c) in poly.coeffs().iter().enumerate().rev() {
            acc += c * z.powu(d as u32 + 1) / (d as f64 + 1.0);
        }
        let c0 = Complex64::new(data.constant[k].0, data.constant[k].1);
        let full = acc + c0;
        g.push(full.re);
        h.push(-full.im);
    }
    (g, h)
}
