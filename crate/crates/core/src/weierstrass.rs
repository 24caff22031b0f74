//! Codimension-2 superconformal surfaces from minimal Weierstrass data:
//! f = g + J_{+-} h with g = Re of the antiderivative of an isotropic
//! polynomial curve and h the conjugate minimal surface.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{frame_fields, fundamental_forms};
use crate::immersion::{chart_jet_series, ImmersionSpec, SurfaceMap};
use crate::linalg;
use crate::taylor::{Jet, Real, Scalar, TaylorScalar, Var};
use crate::tolerances::{Orientation, Tolerances};

/// Polynomial with complex coefficients, ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CPoly(pub Vec<(f64, f64)>);

impl CPoly {
    pub fn coeffs(&self) -> Vec<Complex64> {
        self.0.iter().map(|(re, im)| Complex64::new(*re, *im)).collect()
    }

    fn antiderivative(&self) -> CPoly {
        let mut out = vec![(0.0, 0.0)];
        for (k, (re, im)) in self.0.iter().enumerate() {
            let d = (k + 1) as f64;
            out.push((re / d, im / d));
        }
        CPoly(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RouxelSign {
    Plus,
    Minus,
}

impl RouxelSign {
    pub fn flipped(&self) -> Self {
        match self {
            RouxelSign::Plus => RouxelSign::Minus,
            RouxelSign::Minus => RouxelSign::Plus,
        }
    }

    fn factor(&self) -> f64 {
        match self {
            RouxelSign::Plus => 1.0,
            RouxelSign::Minus => -1.0,
        }
    }
}

/// Isotropic polynomial curve phi: C -> C^4 with its integration constant.
/// g = Re Int phi, h = -Im Int phi (the conjugate minimal surface; the
/// constant moves h, which is only defined up to translation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassData {
    pub phi: Vec<CPoly>,
    pub constant: Vec<(f64, f64)>,
}

const ISOTROPY_TOL: f64 = 1e-10;

impl WeierstrassData {
    /// Validates the isotropy phi . phi = 0 as a polynomial identity.
    pub fn new(phi: Vec<CPoly>, constant: Vec<(f64, f64)>) -> Result<Self> {
        assert_eq!(phi.len(), 4, "codimension-2 data lives in R^4");
        assert_eq!(constant.len(), 4);
        let deg = phi.iter().map(|p| p.0.len()).max().unwrap_or(1);
        let mut square = vec![Complex64::new(0.0, 0.0); 2 * deg];
        for p in &phi {
            let c = p.coeffs();
            for (i, a) in c.iter().enumerate() {
                for (j, b) in c.iter().enumerate() {
                    square[i + j] += a * b;
                }
            }
        }
        let defect = square.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if defect > ISOTROPY_TOL {
            return Err(Error::NonIsotropicData(defect));
        }
        Ok(WeierstrassData { phi, constant })
    }

    /// Rational data is accepted only when the denominator is constant;
    /// anything else has no closed-form antiderivative here.
    pub fn from_rational(
        numer: Vec<CPoly>,
        denom: CPoly,
        constant: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let nonconst = denom.0.iter().skip(1).any(|(re, im)| *re != 0.0 || *im != 0.0);
        if nonconst {
            return Err(Error::NonClosedFormAntiderivative);
        }
        let d = Complex64::new(denom.0[0].0, denom.0[0].1);
        if d.norm() < 1e-14 {
            return Err(Error::BadParams("zero denominator".into()));
        }
        let scaled = numer
            .into_iter()
            .map(|p| {
                CPoly(
                    p.coeffs()
                        .iter()
                        .map(|c| {
                            let q = c / d;
                            (q.re, q.im)
                        })
                        .collect(),
                )
            })
            .collect();
        Self::new(scaled, constant)
    }

    pub fn ambient_dim(&self) -> usize {
        4
    }
}

/// Complex number with Taylor-series components.
#[derive(Clone)]
struct CSeries<T: Real> {
    re: TaylorScalar<T>,
    im: TaylorScalar<T>,
}

impl<T: Real> CSeries<T> {
    fn constant(c: Complex64, order: usize) -> Self {
        CSeries {
            re: TaylorScalar::constant(T::of(c.re), order),
            im: TaylorScalar::constant(T::of(c.im), order),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        CSeries {
            re: self.re.clone() * other.re.clone() - self.im.clone() * other.im.clone(),
            im: self.re.clone() * other.im.clone() + self.im.clone() * other.re.clone(),
        }
    }

    fn add(&self, other: &Self) -> Self {
        CSeries { re: self.re.clone() + other.re.clone(), im: self.im.clone() + other.im.clone() }
    }
}

fn eval_cpoly<T: Real>(p: &CPoly, z: &CSeries<T>, order: usize) -> CSeries<T> {
    let coeffs = p.coeffs();
    let mut acc = CSeries::constant(*coeffs.last().unwrap_or(&Complex64::new(0.0, 0.0)), order);
    for c in coeffs.iter().rev().skip(1) {
        acc = acc.mul(z).add(&CSeries::constant(*c, order));
    }
    acc
}

struct WeierstrassEval<T: Real> {
    g: Vec<Vec<TaylorScalar<T>>>, // [g, h] stacked: g[0] = g comps, g[1] = h comps
    gu: Vec<TaylorScalar<T>>,
    gv: Vec<TaylorScalar<T>>,
}

fn eval_weierstrass<T: Real>(
    data: &WeierstrassData,
    point: (T, T),
    order: usize,
) -> WeierstrassEval<T> {
    let z = CSeries {
        re: TaylorScalar::variable(point.0, Var::U, order),
        im: TaylorScalar::variable(point.1, Var::V, order),
    };
    let mut g = Vec::with_capacity(4);
    let mut h = Vec::with_capacity(4);
    let mut gu = Vec::with_capacity(4);
    let mut gv = Vec::with_capacity(4);
    for (k, p) in data.phi.iter().enumerate() {
        let mut prim = p.antiderivative();
        prim.0[0] = data.constant[k];
        let big = eval_cpoly(&prim, &z, order);
        let small = eval_cpoly(p, &z, order);
        // g = Re Phi, h = -Im Phi; g_u = Re phi, g_v = -Im phi
        g.push(big.re.clone());
        h.push(-big.im.clone());
        gu.push(small.re.clone());
        gv.push(-small.im.clone());
    }
    WeierstrassEval { g: vec![g, h], gu, gv }
}

/// Oriented orthonormal basis of the normal plane of a surface in R^4,
/// given the orthonormal tangent pair. det[t1 t2 n1 n2] > 0.
fn oriented_normal_plane<S: Scalar>(t1: &[S], t2: &[S]) -> Result<(Vec<S>, Vec<S>)> {
    assert_eq!(t1.len(), 4);
    let frame = [t1.to_vec(), t2.to_vec()];
    let mut candidates: Vec<(f64, Vec<S>)> = Vec::new();
    for k in 0..4 {
        let mut e = linalg::zeros::<S>(4);
        e[k] = S::of(1.0);
        let r = linalg::project_off(&e, &frame);
        candidates.push((linalg::val(&linalg::norm_sq(&r)), r));
    }
    let best = candidates
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let n1 = linalg::normalize(&candidates[best].1).map_err(|_| Error::DegenerateImmersion)?;
    let mut n2 = None;
    let mut full = vec![t1.to_vec(), t2.to_vec(), n1.clone()];
    let mut best2 = (0.0f64, 0usize);
    for k in 0..4 {
        if k == best {
            continue;
        }
        let mut e = linalg::zeros::<S>(4);
        e[k] = S::of(1.0);
        let r = linalg::project_off(&e, &full);
        let n = linalg::val(&linalg::norm_sq(&r));
        if n > best2.0 {
            best2 = (n, k);
        }
    }
    {
        let mut e = linalg::zeros::<S>(4);
        e[best2.1] = S::of(1.0);
        let r = linalg::project_off(&e, &full);
        n2 = Some(linalg::normalize(&r).map_err(|_| Error::DegenerateImmersion)?);
    }
    let mut n2 = n2.unwrap();
    full.push(n2.clone());
    let det = linalg::det(&[
        linalg::value_vec(t1),
        linalg::value_vec(t2),
        linalg::value_vec(&full[2]),
        linalg::value_vec(&n2),
    ]);
    if det < 0.0 {
        n2 = linalg::neg(&n2);
    }
    Ok((n1, n2))
}

/// Series of f = g + J_sign h at a point. No order is lost: tangents of g
/// come straight from phi.
pub fn rouxel_series<T: Real>(
    data: &WeierstrassData,
    sign: RouxelSign,
    orientation: Orientation,
    point: (T, T),
    order: usize,
) -> Result<Vec<TaylorScalar<T>>> {
    let ev = eval_weierstrass(data, point, order);
    let (g, h) = (&ev.g[0], &ev.g[1]);
    let g1 = linalg::normalize(&ev.gu).map_err(|_| Error::DegenerateImmersion)?;
    let w = linalg::sub(&ev.gv, &linalg::scale(&g1, &linalg::dot(&ev.gv, &g1)));
    let g2 = linalg::normalize(&w).map_err(|_| Error::DegenerateImmersion)?;

    let o = orientation.sign();
    let t1 = linalg::dot(h, &g1);
    let t2 = linalg::dot(h, &g2);
    // tangential part rotated by J: g_*(J Y) with J G1 = G2
    let jy = linalg::scale_f64(
        &linalg::sub(&linalg::scale(&g2, &t1), &linalg::scale(&g1, &t2)),
        o,
    );
    let eta = linalg::sub(
        &linalg::sub(h, &linalg::scale(&g1, &t1)),
        &linalg::scale(&g2, &t2),
    );
    let (n1, n2) = oriented_normal_plane(&g1, &g2)?;
    let s = sign.factor() * o;
    // Jhat_+ n1 = n2 in the oriented normal plane
    let jn = linalg::scale_f64(
        &linalg::sub(
            &linalg::scale(&n2, &linalg::dot(&eta, &n1)),
            &linalg::scale(&n1, &linalg::dot(&eta, &n2)),
        ),
        s,
    );
    let mut out = linalg::add(g, &jy);
    out = linalg::add(&out, &jn);
    Ok(out)
}

/// Codimension-2 frame data needed by the partner construction: g, h fields
/// and the g-tangent frame, all as series at the requested order.
struct Codim2Core<T: Real> {
    f: Vec<TaylorScalar<T>>,
    g: Vec<TaylorScalar<T>>,
    h: Vec<TaylorScalar<T>>,
    gu: Vec<TaylorScalar<T>>,
    gv: Vec<TaylorScalar<T>>,
}

fn codim2_core<T: Real>(
    comps: &[TaylorScalar<T>],
    tols: &Tolerances,
) -> Result<Codim2Core<T>> {
    let k = comps[0].order();
    assert!(k >= 3);
    if comps.len() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: comps.len() });
    }
    let w_a = k - 2;
    let cj = chart_jet_series(comps, w_a, 2);
    let ff = frame_fields(&cj)?;

    // value-level gates
    let alpha_norm = crate::frames::alpha_norm_value(&ff);
    let h_norm = linalg::val(&linalg::norm_sq(&ff.mean)).max(0.0).sqrt();
    if h_norm <= tols.minimal {
        return Err(Error::MinimalPoint);
    }
    let txi1 = linalg::scale_f64(&linalg::sub(&ff.alpha11, &ff.alpha22), 0.5);
    let txi2 = ff.alpha12.clone();
    let floor = tols.umbilic * (1.0 + alpha_norm);
    let sv = linalg::singular_values(&[linalg::value_vec(&txi1), linalg::value_vec(&txi2)]);
    if sv[0] <= floor {
        return Err(Error::UmbilicPoint);
    }
    if 2.0 * (sv[0] - sv[1]) / (1.0 + alpha_norm * alpha_norm) >= tols.superconformal_gate {
        return Err(Error::DegenerateFrame("superconformal gate"));
    }

    let xi1 = linalg::normalize(&txi1)?;
    let xi2 = linalg::normalize(&txi2)?;
    let lambda1 = linalg::dot(&ff.mean, &xi1);
    let lambda2 = linalg::dot(&ff.mean, &xi2);
    let r2 = linalg::norm_sq(&ff.mean).recip()?;
    let g_full = linalg::add(
        &ff.position,
        &linalg::scale(&ff.mean, &r2),
    );
    // h = r^2 (lambda2 xi1 - lambda1 xi2)
    let h_full = linalg::scale(
        &linalg::sub(&linalg::scale(&xi1, &lambda2), &linalg::scale(&xi2, &lambda1)),
        &r2,
    );

    let w_b = w_a - 1;
    let gu: Vec<_> = g_full.iter().map(|c| c.derivative(Var::U)).collect();
    let gv: Vec<_> = g_full.iter().map(|c| c.derivative(Var::V)).collect();
    let trunc = |v: &[TaylorScalar<T>]| -> Vec<TaylorScalar<T>> {
        v.iter().map(|c| c.truncated(w_b)).collect()
    };
    Ok(Codim2Core {
        f: comps.iter().map(|c| c.truncated(w_b)).collect(),
        g: trunc(&g_full),
        h: trunc(&h_full),
        gu,
        gv,
    })
}

/// Series of the opposite-sign partner 2 (g + g_*(J Y_h)) - f.
pub fn partner_series<T: Real>(
    inner: &SurfaceMap,
    orientation: Orientation,
    point: (T, T),
    order: usize,
    tols: &Tolerances,
) -> Result<Vec<TaylorScalar<T>>> {
    let comps = inner.eval_series(point, order + 3, tols)?;
    let core = codim2_core(&comps, tols)?;
    let g1 = linalg::normalize(&core.gu).map_err(|_| Error::DegenerateCenters)?;
    let w = linalg::sub(&core.gv, &linalg::scale(&g1, &linalg::dot(&core.gv, &g1)));
    let g2 = linalg::normalize(&w).map_err(|_| Error::DegenerateCenters)?;
    let t1 = linalg::dot(&core.h, &g1);
    let t2 = linalg::dot(&core.h, &g2);
    let jy = linalg::scale_f64(
        &linalg::sub(&linalg::scale(&g2, &t1), &linalg::scale(&g1, &t2)),
        orientation.sign(),
    );
    let mut out = linalg::add(&core.g, &jy);
    out = linalg::scale_f64(&out, 2.0);
    Ok(linalg::sub(&out, &core.f))
}

/// Pointwise forward checks of the codimension-2 picture.
#[derive(Debug, Clone, Serialize)]
pub struct Codim2Check {
    /// |H_g| of the recovered surface of centers (should vanish: g minimal).
    pub g_mean_curvature: f64,
    /// Defect of h_* = g_* o J for the best-matching complex structure.
    pub conjugacy_defect: f64,
}

pub fn codim2_checks(
    spec: &ImmersionSpec,
    point: (f64, f64),
    tols: &Tolerances,
) -> Result<Codim2Check> {
    spec.check_point(point.0, point.1)?;
    // h-field to first order, g to second (for H_g): evaluate deep enough
    let comps = spec.map.eval_series(point, 5, tols)?;
    let core = codim2_core(&comps, tols)?; // series at order 2
    let dh_u: Vec<f64> = core.h.iter().map(|c| c.derivative(Var::U).value()).collect();
    let dh_v: Vec<f64> = core.h.iter().map(|c| c.derivative(Var::V).value()).collect();
    let gu = linalg::value_vec(&core.gu);
    let gv = linalg::value_vec(&core.gv);
    let scale = 1.0 + linalg::norm_f64(&gu);
    let defect_for = |s: f64| -> f64 {
        let d1 = linalg::dist_f64(&dh_u, &linalg::scale_f64(&gv, s));
        let d2 = linalg::dist_f64(&dh_v, &linalg::scale_f64(&gu, -s));
        d1.max(d2) / scale
    };
    let conjugacy_defect = defect_for(1.0).min(defect_for(-1.0));

    // H of g from the g-series (order 2)
    let gcj = chart_jet_series(&core.g, 0, 2);
    let gff = frame_fields(&gcj)?;
    let hg = linalg::value_vec(&gff.mean);
    Ok(Codim2Check { g_mean_curvature: linalg::norm_f64(&hg), conjugacy_defect })
}

/// Surface of centers and opposite-sign dual of a codimension-2
/// superconformal surface, with forward checks over the given points.
pub struct Codim2Pair {
    pub centers: ImmersionSpec,
    pub partner: ImmersionSpec,
    pub max_g_mean_curvature: f64,
    pub max_conjugacy_defect: f64,
}

pub fn codim2_pair(
    spec: &ImmersionSpec,
    sample_points: &[(f64, f64)],
    tols: &Tolerances,
    orientation: Orientation,
) -> Result<Codim2Pair> {
    if spec.ambient_dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: spec.ambient_dim() });
    }
    let mut max_g = 0.0f64;
    let mut max_c = 0.0f64;
    for &p in sample_points {
        let chk = codim2_checks(spec, p, tols)?;
        max_g = max_g.max(chk.g_mean_curvature);
        max_c = max_c.max(chk.conjugacy_defect);
    }
    Ok(Codim2Pair {
        centers: spec.wrapped(|inner| SurfaceMap::Centers { inner }),
        partner: spec.wrapped(|inner| SurfaceMap::RouxelPartner { inner, orientation }),
        max_g_mean_curvature: max_g,
        max_conjugacy_defect: max_c,
    })
}

/// Gauss curvature and normal curvature of a surface in R^4, with the
/// normal plane oriented so that det[X1 X2 n1 n2] > 0. The returned K-perp
/// matches the J_+ convention; flip its sign for J_-.
pub fn gauss_and_normal_curvature(jet: &Jet<f64>, tols: &Tolerances) -> Result<(f64, f64)> {
    if jet.ambient_dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: jet.ambient_dim() });
    }
    let fd = fundamental_forms(jet, tols)?;
    let k = linalg::dot(&fd.alpha11, &fd.alpha22) - linalg::dot(&fd.alpha12, &fd.alpha12);
    let (n1, n2) = oriented_normal_plane(&fd.x1, &fd.x2)?;
    let a = |nu: &[f64]| -> [[f64; 2]; 2] {
        [
            [linalg::dot(&fd.alpha11, nu), linalg::dot(&fd.alpha12, nu)],
            [linalg::dot(&fd.alpha12, nu), linalg::dot(&fd.alpha22, nu)],
        ]
    };
    let a1 = a(&n1);
    let a2 = a(&n2);
    // K-perp = 2 (p1 q2 - q1 p2) for traceless parts p = (A11-A22)/2, q = A12
    let p1 = 0.5 * (a1[0][0] - a1[1][1]);
    let q1 = a1[0][1];
    let p2 = 0.5 * (a2[0][0] - a2[1][1]);
    let q2 = a2[0][1];
    Ok((k, 2.0 * (p1 * q2 - q1 * p2)))
}

/// Enneper-type data in an R^3 slice: phi = (1 - z^2, i (1 + z^2), 2z, 0),
/// with an integration constant keeping |h| away from zero on the chart.
pub fn enneper_data() -> WeierstrassData {
    WeierstrassData::new(
        vec![
            CPoly(vec![(1.0, 0.0), (0.0, 0.0), (-1.0, 0.0)]),
            CPoly(vec![(0.0, 1.0), (0.0, 0.0), (0.0, 1.0)]),
            CPoly(vec![(0.0, 0.0), (2.0, 0.0)]),
            CPoly(vec![(0.0, 0.0)]),
        ],
        vec![(0.0, 0.0), (0.0, 0.0), (0.0, 2.0), (0.0, 0.0)],
    )
    .expect("enneper data is isotropic")
}

/// Substantially four-dimensional isotropic data:
/// phi = ((1 - z^3)/2, -i (1 + z^3)/2, (z + z^2)/2, -i (z - z^2)/2).
pub fn quartic_data() -> WeierstrassData {
    WeierstrassData::new(
        vec![
            CPoly(vec![(0.5, 0.0), (0.0, 0.0), (0.0, 0.0), (-0.5, 0.0)]),
            CPoly(vec![(0.0, -0.5), (0.0, 0.0), (0.0, 0.0), (0.0, -0.5)]),
            CPoly(vec![(0.0, 0.0), (0.5, 0.0), (0.5, 0.0)]),
            CPoly(vec![(0.0, 0.0), (0.0, -0.5), (0.0, 0.5)]),
        ],
        vec![(0.0, 0.0), (0.0, 2.0), (0.0, 0.0), (0.0, 0.0)],
    )
    .expect("quartic data is isotropic")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropy_validation() {
        // phi . phi = 1 for (1, 0, 0, 0): rejected
        let bad = WeierstrassData::new(
            vec![
                CPoly(vec![(1.0, 0.0)]),
                CPoly(vec![(0.0, 0.0)]),
                CPoly(vec![(0.0, 0.0)]),
                CPoly(vec![(0.0, 0.0)]),
            ],
            vec![(0.0, 0.0); 4],
        );
        assert!(matches!(bad, Err(Error::NonIsotropicData(_))));
        assert!(WeierstrassData::new(enneper_data().phi, vec![(0.0, 0.0); 4]).is_ok());
        assert!(WeierstrassData::new(quartic_data().phi, vec![(0.0, 0.0); 4]).is_ok());
    }

    #[test]
    fn rational_data_needs_constant_denominator() {
        let num = enneper_data().phi;
        let denom_bad = CPoly(vec![(1.0, 0.0), (1.0, 0.0)]);
        assert!(matches!(
            WeierstrassData::from_rational(num.clone(), denom_bad, vec![(0.0, 0.0); 4]),
            Err(Error::NonClosedFormAntiderivative)
        ));
        let denom_ok = CPoly(vec![(2.0, 0.0)]);
        assert!(WeierstrassData::from_rational(num, denom_ok, vec![(0.0, 0.0); 4]).is_ok());
    }

    #[test]
    fn conjugate_pair_relations() {
        // h_u = g_v, h_v = -g_u from the same data
        let data = enneper_data();
        let ev = eval_weierstrass(&data, (0.3f64, -0.2f64), 2);
        let (g, h) = (&ev.g[0], &ev.g[1]);
        for k in 0..4 {
            let hu = h[k].derivative(Var::U).value();
            let hv = h[k].derivative(Var::V).value();
            let gu = g[k].derivative(Var::U).value();
            let gv = g[k].derivative(Var::V).value();
            assert!((hu - gv).abs() < 1e-12);
            assert!((hv + gu).abs() < 1e-12);
            // and the tangent shortcut agrees with differentiation
            assert!((ev.gu[k].value() - gu).abs() < 1e-12);
            assert!((ev.gv[k].value() - gv).abs() < 1e-12);
        }
    }

    #[test]
    fn rouxel_surface_evaluates() {
        let data = enneper_data();
        let comps =
            rouxel_series(&data, RouxelSign::Plus, Orientation::Positive, (0.4f64, 0.3f64), 2)
                .unwrap();
        assert_eq!(comps.len(), 4);
        assert_eq!(comps[0].order(), 2);
    }
}
