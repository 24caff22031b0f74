//! Surface specifications and their evaluation to jets.
//!
//! An `ImmersionSpec` is closed under the operations the pipelines need:
//! composition with Moebius maps, affine motions, chart rotations, dropping
//! a certified-zero coordinate, passing to the surface of centers, and
//! dualization. Evaluation of derived surfaces re-runs the corresponding
//! pipeline in Taylor arithmetic, so jets of a dual are exact.

use serde::{Deserialize, Serialize};

use crate::dsl::SurfaceAst;
use crate::error::{Error, Result};
use crate::linalg::Metric;
use crate::moebius::MoebiusMap;
use crate::taylor::{Jet, Real, Scalar, TaylorScalar, Var};
use crate::tolerances::{Orientation, Tolerances};
use crate::weierstrass::{RouxelSign, WeierstrassData};

/// Open disk excluded from a chart domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub cu: f64,
    pub cv: f64,
    pub r: f64,
}

/// Chart rectangle with excluded open disks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub u: (f64, f64),
    pub v: (f64, f64),
    #[serde(default)]
    pub exclusions: Vec<Disk>,
}

impl Default for Domain {
    fn default() -> Self {
        Domain { u: (-1.0, 1.0), v: (-1.0, 1.0), exclusions: Vec::new() }
    }
}

impl Domain {
    pub fn new(u: (f64, f64), v: (f64, f64)) -> Self {
        Domain { u, v, exclusions: Vec::new() }
    }

    pub fn with_exclusion(mut self, d: Disk) -> Self {
        self.exclusions.push(d);
        self
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        if u < self.u.0 || u > self.u.1 || v < self.v.0 || v > self.v.1 {
            return false;
        }
        for d in &self.exclusions {
            if (u - d.cu).hypot(v - d.cv) < d.r {
                return false;
            }
        }
        true
    }

    /// Cell centers of an nu x nv grid over the rectangle, exclusion disks
    /// removed. Row-major in u then v, deterministic.
    pub fn grid(&self, nu: usize, nv: usize) -> Vec<(f64, f64)> {
        let du = (self.u.1 - self.u.0) / nu as f64;
        let dv = (self.v.1 - self.v.0) / nv as f64;
        let mut pts = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            for j in 0..nv {
                let u = self.u.0 + (i as f64 + 0.5) * du;
                let v = self.v.0 + (j as f64 + 0.5) * dv;
                if self.contains(u, v) {
                    pts.push((u, v));
                }
            }
        }
        pts
    }
}

/// The map part of a surface specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SurfaceMap {
    Dsl(SurfaceAst),
    Moebius { map: MoebiusMap, inner: Box<SurfaceMap> },
    /// Drop the last ambient coordinate after certifying it is ~0.
    DropLast { inner: Box<SurfaceMap> },
    Affine { linear: Option<Vec<Vec<f64>>>, offset: Vec<f64>, inner: Box<SurfaceMap> },
    ChartRotated { angle: f64, inner: Box<SurfaceMap> },
    /// Dual superconformal surface (codimension >= 3 pipeline).
    Dual { inner: Box<SurfaceMap> },
    /// Surface of centers of the central sphere congruence.
    Centers { inner: Box<SurfaceMap> },
    /// Codimension-2 surface built from minimal Weierstrass data.
    Rouxel { data: WeierstrassData, sign: RouxelSign, orientation: Orientation },
    /// Opposite-sign Rouxel partner of a codimension-2 superconformal surface.
    RouxelPartner { inner: Box<SurfaceMap>, orientation: Orientation },
}

const PROJECTION_TOL: f64 = 1e-10;

impl SurfaceMap {
    pub fn ambient_dim(&self) -> usize {
        match self {
            SurfaceMap::Dsl(ast) => ast.ambient_dim(),
            SurfaceMap::Moebius { inner, .. } => inner.ambient_dim(),
            SurfaceMap::DropLast { inner } => inner.ambient_dim() - 1,
            SurfaceMap::Affine { offset, .. } => offset.len(),
            SurfaceMap::ChartRotated { inner, .. } => inner.ambient_dim(),
            SurfaceMap::Dual { inner } => inner.ambient_dim(),
            SurfaceMap::Centers { inner } => inner.ambient_dim(),
            SurfaceMap::Rouxel { data, .. } => data.ambient_dim(),
            SurfaceMap::RouxelPartner { inner, .. } => inner.ambient_dim(),
        }
    }

    /// Evaluate to Taylor series of the given order about `point`.
    pub fn eval_series<T: Real>(
        &self,
        point: (T, T),
        order: usize,
        tols: &Tolerances,
    ) -> Result<Vec<TaylorScalar<T>>> {
        match self {
            SurfaceMap::Dsl(ast) => {
                let u = TaylorScalar::variable(point.0, Var::U, order);
                let v = TaylorScalar::variable(point.1, Var::V, order);
                ast.eval_components(&u, &v)
            }
            SurfaceMap::Moebius { map, inner } => {
                let p = inner.eval_series(point, order, tols)?;
                map.apply_series(&p)
            }
            SurfaceMap::DropLast { inner } => {
                let mut p = inner.eval_series(point, order, tols)?;
                let last = p.pop().expect("nonempty");
                let mag = last.value().to_f64_lossy().abs();
                if mag > PROJECTION_TOL {
                    return Err(Error::ProjectionNotFlat(mag));
                }
                Ok(p)
            }
            SurfaceMap::Affine { linear, offset, inner } => {
                let p = inner.eval_series(point, order, tols)?;
                let dim = offset.len();
                let mut out = Vec::with_capacity(dim);
                for i in 0..dim {
                    let mut acc = TaylorScalar::constant(T::of(offset[i]), order);
                    match linear {
                        Some(mat) => {
                            for (j, pj) in p.iter().enumerate() {
                                if mat[i][j] != 0.0 {
                                    acc = acc + pj.scale_by(T::of(mat[i][j]));
                                }
                            }
                        }
                        None => acc = acc + p[i].clone(),
                    }
                    out.push(acc);
                }
                Ok(out)
            }
            SurfaceMap::ChartRotated { angle, inner } => {
                let (c, s) = (T::of(angle.cos()), T::of(angle.sin()));
                let (u0, v0) = point;
                let q = (c * u0 - s * v0, s * u0 + c * v0);
                let p = inner.eval_series(q, order, tols)?;
                // inner offsets in terms of outer ones: du' = c du - s dv, etc.
                let mut du = TaylorScalar::variable(T::zero(), Var::U, order);
                let mut dv = TaylorScalar::variable(T::zero(), Var::V, order);
                let u_arg = du.scale_by(c) - dv.scale_by(s);
                let v_arg = {
                    du = TaylorScalar::variable(T::zero(), Var::U, order);
                    dv = TaylorScalar::variable(T::zero(), Var::V, order);
                    du.scale_by(s) + dv.scale_by(c)
                };
                Ok(p.iter().map(|comp| comp.substitute(&u_arg, &v_arg)).collect())
            }
            SurfaceMap::Dual { inner } => crate::duality::dual_series(inner, point, order, tols),
            SurfaceMap::Centers { inner } => crate::duality::centers_series(inner, point, order, tols),
            SurfaceMap::Rouxel { data, sign, orientation } => {
                crate::weierstrass::rouxel_series(data, *sign, *orientation, point, order)
            }
            SurfaceMap::RouxelPartner { inner, orientation } => {
                crate::weierstrass::partner_series(inner, *orientation, point, order, tols)
            }
        }
    }
}

/// A surface definition: map, chart domain, ambient signature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmersionSpec {
    pub map: SurfaceMap,
    pub domain: Domain,
    #[serde(default = "euclidean")]
    pub ambient: Metric,
}

fn euclidean() -> Metric {
    Metric::Euclidean
}

impl ImmersionSpec {
    pub fn from_ast(ast: SurfaceAst) -> Self {
        let domain = ast.domain.clone();
        ImmersionSpec { map: SurfaceMap::Dsl(ast), domain, ambient: Metric::Euclidean }
    }

    pub fn from_source(source: &str) -> Result<Self> {
        Ok(Self::from_ast(crate::dsl::parse(source)?))
    }

    pub fn ambient_dim(&self) -> usize {
        self.map.ambient_dim()
    }

    /// Codimension n of a surface in R^{n+2}.
    pub fn codim(&self) -> usize {
        self.ambient_dim() - 2
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_metric(mut self, ambient: Metric) -> Self {
        self.ambient = ambient;
        self
    }

    /// Wrap in a further map, keeping domain and signature.
    pub fn wrapped(&self, f: impl FnOnce(Box<SurfaceMap>) -> SurfaceMap) -> Self {
        ImmersionSpec {
            map: f(Box::new(self.map.clone())),
            domain: self.domain.clone(),
            ambient: self.ambient,
        }
    }

    pub fn check_point(&self, u: f64, v: f64) -> Result<()> {
        if self.domain.contains(u, v) {
            Ok(())
        } else {
            Err(Error::PointOutsideDomain { u, v })
        }
    }

    pub fn jet_with(&self, point: (f64, f64), order: usize, tols: &Tolerances) -> Result<Jet<f64>> {
        self.check_point(point.0, point.1)?;
        let comps = self.map.eval_series(point, order, tols)?;
        Ok(Jet::new(point, comps))
    }

    pub fn jet(&self, point: (f64, f64), order: usize) -> Result<Jet<f64>> {
        self.jet_with(point, order, &Tolerances::default())
    }

    pub fn value(&self, point: (f64, f64)) -> Result<Vec<f64>> {
        Ok(self.jet_with(point, 0, &Tolerances::default())?.value())
    }

    pub fn value_with(&self, point: (f64, f64), tols: &Tolerances) -> Result<Vec<f64>> {
        Ok(self.jet_with(point, 0, tols)?.value())
    }
}

/// Derivatives of an immersion at a point, as ambient vectors over any
/// scalar. Entry (a, b) holds d^{a+b} f / du^a dv^b; for series scalars the
/// entries are themselves expansions of the derivative fields.
#[derive(Debug, Clone)]
pub struct ChartJet<S> {
    dim: usize,
    depth: usize,
    entries: Vec<Vec<S>>,
}

fn tri_index(depth: usize, a: usize, b: usize) -> usize {
    a * (2 * depth + 3 - a) / 2 + b
}

impl<S: Scalar> ChartJet<S> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn at(&self, a: usize, b: usize) -> &[S] {
        assert!(a + b <= self.depth);
        &self.entries[tri_index(self.depth, a, b)]
    }
}

/// Plain-value chart derivatives from a jet.
pub fn chart_jet_values<T: Real>(jet: &Jet<T>, depth: usize) -> Result<ChartJet<T>> {
    let mut entries = Vec::new();
    for a in 0..=depth {
        for b in 0..=(depth - a) {
            entries.push(jet.extract_derivative(a, b).map_err(Error::from)?);
        }
    }
    // triangular enumeration above is (a ascending, b ascending) which
    // matches tri_index ordering
    Ok(ChartJet { dim: jet.ambient_dim(), depth, entries })
}

/// Series-valued chart derivatives: each entry is the Taylor expansion of
/// the corresponding derivative field, truncated to `working_order`.
/// Components must carry order >= working_order + depth.
pub fn chart_jet_series<T: Real>(
    comps: &[TaylorScalar<T>],
    working_order: usize,
    depth: usize,
) -> ChartJet<TaylorScalar<T>> {
    let order = comps.iter().map(|c| c.order()).max().unwrap();
    assert!(order >= working_order + depth);
    // constant components never met a variable and sit at order 0
    let comps: Vec<TaylorScalar<T>> = comps
        .iter()
        .map(|c| {
            if c.order() == order {
                c.clone()
            } else {
                assert!(c.order() == 0, "series components must share one order");
                TaylorScalar::constant(c.value(), order)
            }
        })
        .collect();
    let mut entries = Vec::new();
    for a in 0..=depth {
        for b in 0..=(depth - a) {
            let vec: Vec<TaylorScalar<T>> = comps
                .iter()
                .map(|c| {
                    let mut d = c.clone();
                    for _ in 0..a {
                        d = d.derivative(Var::U);
                    }
                    for _ in 0..b {
                        d = d.derivative(Var::V);
                    }
                    d.truncated(working_order)
                })
                .collect();
            entries.push(vec);
        }
    }
    ChartJet { dim: comps.len(), depth, entries }
}
