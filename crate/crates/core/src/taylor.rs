//! Exact truncated Taylor (jet) arithmetic in two chart variables.
//!
//! `TaylorScalar` is the scalar the rest of the crate is generic over: a
//! surface evaluated over it yields exact partial derivatives, and whole
//! geometric pipelines re-run over it yield jets of derived surfaces.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Float, FromPrimitive, ToPrimitive};

use crate::error::TaylorError;

/// Base field for all numerics: any IEEE float exposed through num-traits.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("representable constant")
    }
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

/// Chart variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    U,
    V,
}

/// What to lift a real number into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lift {
    U,
    V,
    Const,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Scalars the geometric pipelines are generic over: plain floats for
/// pointwise evaluation, `TaylorScalar` for jets. Branch decisions in
/// generic code are taken on `value()`, the evaluation at the base point.
pub trait Scalar:
    Clone + fmt::Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    type R: Real;

    fn from_real(x: Self::R) -> Self;
    fn of(x: f64) -> Self {
        Self::from_real(Self::R::of(x))
    }
    fn value(&self) -> Self::R;
    fn is_constant(&self) -> bool;
    fn scale(&self, c: Self::R) -> Self;
    fn try_div(&self, rhs: &Self) -> Result<Self, TaylorError>;
    fn recip(&self) -> Result<Self, TaylorError>;
    fn sqrt(&self) -> Result<Self, TaylorError>;
    fn ln(&self) -> Result<Self, TaylorError>;
    fn powi(&self, n: i32) -> Result<Self, TaylorError>;
    fn powf(&self, e: Self::R) -> Result<Self, TaylorError>;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn atan(&self) -> Self;
}

/// |constant term| at or below this is treated as a division by zero.
pub const DIV_EPS: f64 = 1e-12;

macro_rules! impl_scalar_for_float {
    ($t:ty) => {
        impl Scalar for $t {
            type R = $t;

            fn from_real(x: $t) -> Self {
                x
            }
            fn value(&self) -> $t {
                *self
            }
            fn is_constant(&self) -> bool {
                true
            }
            fn scale(&self, c: $t) -> Self {
                self * c
            }
            fn try_div(&self, rhs: &Self) -> Result<Self, TaylorError> {
                if rhs.abs() <= DIV_EPS as $t {
                    return Err(TaylorError::DivisionNearZero(rhs.to_f64_lossy()));
                }
                Ok(self / rhs)
            }
            fn recip(&self) -> Result<Self, TaylorError> {
                <$t as Scalar>::try_div(&(1.0 as $t), self)
            }
            fn sqrt(&self) -> Result<Self, TaylorError> {
                if *self < 0.0 {
                    return Err(TaylorError::DomainError {
                        func: "sqrt",
                        value: self.to_f64_lossy(),
                    });
                }
                Ok(<$t>::sqrt(*self))
            }
            fn ln(&self) -> Result<Self, TaylorError> {
                if *self <= 0.0 {
                    return Err(TaylorError::DomainError {
                        func: "log",
                        value: self.to_f64_lossy(),
                    });
                }
                Ok(<$t>::ln(*self))
            }
            fn powi(&self, n: i32) -> Result<Self, TaylorError> {
                if n < 0 && self.abs() <= DIV_EPS as $t {
                    return Err(TaylorError::DivisionNearZero(self.to_f64_lossy()));
                }
                Ok(<$t>::powi(*self, n))
            }
            fn powf(&self, e: $t) -> Result<Self, TaylorError> {
                if *self <= 0.0 {
                    return Err(TaylorError::DomainError {
                        func: "pow",
                        value: self.to_f64_lossy(),
                    });
                }
                Ok(<$t>::powf(*self, e))
            }
            fn sin(&self) -> Self {
                <$t>::sin(*self)
            }
            fn cos(&self) -> Self {
                <$t>::cos(*self)
            }
            fn exp(&self) -> Self {
                <$t>::exp(*self)
            }
            fn atan(&self) -> Self {
                <$t>::atan(*self)
            }
        }
    };
}

impl_scalar_for_float!(f32);
impl_scalar_for_float!(f64);

/// Largest truncation order the kernel supports. User-facing jets stay in
/// 2..=4; derived-surface pipelines consume the headroom above that.
pub const MAX_ORDER: usize = 8;

fn tri_len(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Index of coefficient (a, b) in the dense triangular layout, a + b <= order.
fn tri_index(order: usize, a: usize, b: usize) -> usize {
    debug_assert!(a + b <= order);
    // rows a = 0.., row a holds order + 1 - a entries
    a * (2 * order + 3 - a) / 2 + b
}

fn factorial<T: Real>(n: usize) -> T {
    let mut acc = T::one();
    for k in 2..=n {
        acc = acc * T::of(k as f64);
    }
    acc
}

/// Bivariate Taylor expansion truncated at total degree `order`.
///
/// Coefficient c_{ab} multiplies u^a v^b; the partial derivative
/// d^{a+b} f / du^a dv^b at the base point is c_{ab} * a! * b!.
#[derive(Clone, PartialEq)]
pub struct TaylorScalar<T> {
    order: usize,
    coeffs: Vec<T>,
}

impl<T: Real> fmt::Debug for TaylorScalar<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Taylor(order={}, c00={:?})", self.order, self.coeffs[0])
    }
}

impl<T: Real> TaylorScalar<T> {
    pub fn constant(x: T, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "order {order} above MAX_ORDER");
        let mut coeffs = vec![T::zero(); tri_len(order)];
        coeffs[0] = x;
        TaylorScalar { order, coeffs }
    }

    /// Expansion of the coordinate function `var` at base value `x`. At
    /// order 0 this collapses to the plain value.
    pub fn variable(x: T, var: Var, order: usize) -> Self {
        assert!(order <= MAX_ORDER);
        let mut s = Self::constant(x, order);
        if order >= 1 {
            let idx = match var {
                Var::U => tri_index(order, 1, 0),
                Var::V => tri_index(order, 0, 1),
            };
            s.coeffs[idx] = T::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    pub fn coeff(&self, a: usize, b: usize) -> T {
        if a + b > self.order {
            T::zero()
        } else {
            self.coeffs[tri_index(self.order, a, b)]
        }
    }

    /// d^{a+b} / du^a dv^b at the base point.
    pub fn partial(&self, a: usize, b: usize) -> Result<T, TaylorError> {
        if a + b > self.order {
            return Err(TaylorError::OrderExceeded { a, b, order: self.order });
        }
        Ok(self.coeff(a, b) * factorial::<T>(a) * factorial::<T>(b))
    }

    /// True when every coefficient of total degree >= 1 vanishes.
    pub fn is_const_series(&self) -> bool {
        self.coeffs[1..].iter().all(|c| *c == T::zero())
    }

    /// Drop coefficients above `order`. Requires order <= self.order.
    pub fn truncated(&self, order: usize) -> Self {
        assert!(order <= self.order);
        let mut out = Self::constant(T::zero(), order);
        for a in 0..=order {
            for b in 0..=(order - a) {
                out.coeffs[tri_index(order, a, b)] = self.coeff(a, b);
            }
        }
        out
    }

    /// Formal partial derivative; the result is one order lower.
    pub fn derivative(&self, var: Var) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 series");
        let order = self.order - 1;
        let mut out = Self::constant(T::zero(), order);
        for a in 0..=order {
            for b in 0..=(order - a) {
                let c = match var {
                    Var::U => self.coeff(a + 1, b) * T::of((a + 1) as f64),
                    Var::V => self.coeff(a, b + 1) * T::of((b + 1) as f64),
                };
                out.coeffs[tri_index(order, a, b)] = c;
            }
        }
        out
    }

    /// Order-0 values are exact constants of the ring and broadcast into
    /// any truncation order; other mismatches are pipeline bugs.
    fn aligned<'a>(&'a self, rhs: &'a Self) -> (Self, Self) {
        if self.order == rhs.order {
            (self.clone(), rhs.clone())
        } else if self.order == 0 {
            (Self::constant(self.coeffs[0], rhs.order), rhs.clone())
        } else if rhs.order == 0 {
            (self.clone(), Self::constant(rhs.coeffs[0], self.order))
        } else {
            panic!("taylor order mismatch inside pipeline ({} vs {})", self.order, rhs.order)
        }
    }

    fn add_impl(&self, rhs: &Self) -> Self {
        let (a, b) = self.aligned(rhs);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| *x + *y).collect();
        TaylorScalar { order: a.order, coeffs }
    }

    fn sub_impl(&self, rhs: &Self) -> Self {
        let (a, b) = self.aligned(rhs);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| *x - *y).collect();
        TaylorScalar { order: a.order, coeffs }
    }

    fn mul_impl(&self, rhs: &Self) -> Self {
        let (this, rhs) = self.aligned(rhs);
        let (this, rhs) = (&this, &rhs);
        let order = this.order;
        let mut out = Self::constant(T::zero(), order);
        for a1 in 0..=order {
            for b1 in 0..=(order - a1) {
                let x = this.coeffs[tri_index(order, a1, b1)];
                if x == T::zero() {
                    continue;
                }
                for a2 in 0..=(order - a1 - b1) {
                    for b2 in 0..=(order - a1 - b1 - a2) {
                        let y = rhs.coeffs[tri_index(order, a2, b2)];
                        if y == T::zero() {
                            continue;
                        }
                        let idx = tri_index(order, a1 + a2, b1 + b2);
                        out.coeffs[idx] = out.coeffs[idx] + x * y;
                    }
                }
            }
        }
        out
    }

    pub fn scale_by(&self, c: T) -> Self {
        let coeffs = self.coeffs.iter().map(|x| *x * c).collect();
        TaylorScalar { order: self.order, coeffs }
    }

    /// f(self) where `derivs[k]` = f^(k) at the constant term. Standard
    /// univariate composition of the truncated series.
    pub fn compose_univariate(&self, derivs: &[T]) -> Self {
        assert!(derivs.len() >= self.order + 1);
        let mut nil = self.clone();
        nil.coeffs[0] = T::zero();
        // Horner over the nilpotent part
        let mut acc = Self::constant(derivs[self.order] / factorial::<T>(self.order), self.order);
        for k in (0..self.order).rev() {
            acc = acc.mul_impl(&nil);
            acc.coeffs[0] = acc.coeffs[0] + derivs[k] / factorial::<T>(k);
        }
        acc
    }

    fn check_div(&self) -> Result<T, TaylorError> {
        let c0 = self.value();
        if c0.abs() <= T::of(DIV_EPS) {
            return Err(TaylorError::DivisionNearZero(c0.to_f64_lossy()));
        }
        Ok(c0)
    }

    /// Substitute the chart offsets: result(x, y) = self(u_arg(x,y), v_arg(x,y)).
    /// Both arguments must have zero constant term (pure offset changes).
    pub fn substitute(&self, u_arg: &Self, v_arg: &Self) -> Self {
        assert_eq!(u_arg.order, v_arg.order);
        let order = u_arg.order;
        assert!(u_arg.value() == T::zero() && v_arg.value() == T::zero());
        // powers of the arguments up to the total degree that survives
        let mut upow: Vec<TaylorScalar<T>> = vec![Self::constant(T::one(), order)];
        let mut vpow: Vec<TaylorScalar<T>> = vec![Self::constant(T::one(), order)];
        for k in 1..=self.order.min(order) {
            upow.push(upow[k - 1].mul_impl(u_arg));
            vpow.push(vpow[k - 1].mul_impl(v_arg));
        }
        let mut out = Self::constant(T::zero(), order);
        for a in 0..=self.order {
            for b in 0..=(self.order - a) {
                let c = self.coeff(a, b);
                if c == T::zero() || a > order || b > order {
                    continue;
                }
                out = out.add_impl(&upow[a].mul_impl(&vpow[b]).scale_by(c));
            }
        }
        out
    }

    /// Reciprocal without the near-zero guard; caller has validated c00.
    pub(crate) fn recip_unchecked(&self) -> Self {
        let c0 = self.value();
        let mut derivs = Vec::with_capacity(self.order + 1);
        let mut d = c0.recip(); // f = 1/t, f^(k) = (-1)^k k! / t^{k+1}
        derivs.push(d);
        for k in 1..=self.order {
            d = -d * T::of(k as f64) / c0;
            derivs.push(d);
        }
        self.compose_univariate(&derivs)
    }
}

impl<T: Real> Add for TaylorScalar<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_impl(&rhs)
    }
}

impl<T: Real> Sub for TaylorScalar<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.sub_impl(&rhs)
    }
}

impl<T: Real> Mul for TaylorScalar<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_impl(&rhs)
    }
}

impl<T: Real> Neg for TaylorScalar<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_by(-T::one())
    }
}

impl<T: Real> Scalar for TaylorScalar<T> {
    type R = T;

    fn from_real(x: T) -> Self {
        // default working order; pipeline code always builds series
        // explicitly, this exists for generic constants
        TaylorScalar::constant(x, 0)
    }
    fn value(&self) -> T {
        self.coeffs[0]
    }
    fn is_constant(&self) -> bool {
        self.is_const_series()
    }
    fn scale(&self, c: T) -> Self {
        self.scale_by(c)
    }

    fn try_div(&self, rhs: &Self) -> Result<Self, TaylorError> {
        rhs.check_div()?;
        Ok(self.mul_impl(&rhs.recip_unchecked()))
    }

    fn recip(&self) -> Result<Self, TaylorError> {
        self.check_div()?;
        Ok(self.recip_unchecked())
    }

    fn sqrt(&self) -> Result<Self, TaylorError> {
        let c0 = self.value();
        if c0 <= T::zero() {
            return Err(TaylorError::DomainError { func: "sqrt", value: c0.to_f64_lossy() });
        }
        let mut derivs = Vec::with_capacity(self.order + 1);
        let mut d = c0.sqrt();
        derivs.push(d);
        let half = T::of(0.5);
        for k in 0..self.order {
            // f^(k+1) = f^(k) * (1/2 - k) / t
            d = d * (half - T::of(k as f64)) / c0;
            derivs.push(d);
        }
        Ok(self.compose_univariate(&derivs))
    }

    fn ln(&self) -> Result<Self, TaylorError> {
        let c0 = self.value();
        if c0 <= T::zero() {
            return Err(TaylorError::DomainError { func: "log", value: c0.to_f64_lossy() });
        }
        let mut derivs = Vec::with_capacity(self.order + 1);
        derivs.push(c0.ln());
        if self.order >= 1 {
            let mut d = c0.recip(); // f' = 1/t, then f^(k+1) = -k f^(k) / t
            derivs.push(d);
            for k in 1..self.order {
                d = -d * T::of(k as f64) / c0;
                derivs.push(d);
            }
        }
        Ok(self.compose_univariate(&derivs))
    }

    fn powi(&self, n: i32) -> Result<Self, TaylorError> {
        if n < 0 {
            return Scalar::recip(&Scalar::powi(self, -n)?);
        }
        let mut acc = Self::constant(T::one(), self.order);
        let mut base = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_impl(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_impl(&base);
            }
        }
        Ok(acc)
    }

    fn powf(&self, e: T) -> Result<Self, TaylorError> {
        let c0 = self.value();
        if c0 <= T::zero() {
            return Err(TaylorError::DomainError { func: "pow", value: c0.to_f64_lossy() });
        }
        let mut derivs = Vec::with_capacity(self.order + 1);
        let mut d = c0.powf(e);
        derivs.push(d);
        for k in 0..self.order {
            d = d * (e - T::of(k as f64)) / c0;
            derivs.push(d);
        }
        Ok(self.compose_univariate(&derivs))
    }

    fn sin(&self) -> Self {
        let c0 = self.value();
        let (s, c) = (c0.sin(), c0.cos());
        let cycle = [s, c, -s, -c];
        let derivs: Vec<T> = (0..=self.order).map(|k| cycle[k % 4]).collect();
        self.compose_univariate(&derivs)
    }

    fn cos(&self) -> Self {
        let c0 = self.value();
        let (s, c) = (c0.sin(), c0.cos());
        let cycle = [c, -s, -c, s];
        let derivs: Vec<T> = (0..=self.order).map(|k| cycle[k % 4]).collect();
        self.compose_univariate(&derivs)
    }

    fn exp(&self) -> Self {
        let e0 = self.value().exp();
        let derivs = vec![e0; self.order + 1];
        self.compose_univariate(&derivs)
    }

    fn atan(&self) -> Self {
        // d^n atan(t) = (n-1)! (1+t^2)^{-n/2} sin(n (atan t + pi/2)), n >= 1
        let t = self.value();
        let theta = t.atan() + T::of(std::f64::consts::FRAC_PI_2);
        let w = (T::one() + t * t).sqrt();
        let mut derivs = Vec::with_capacity(self.order + 1);
        derivs.push(t.atan());
        let mut fact = T::one(); // (n-1)!
        let mut wn = w; // w^n
        for n in 1..=self.order {
            if n > 1 {
                fact = fact * T::of((n - 1) as f64);
                wn = wn * w;
            }
            derivs.push(fact / wn * (T::of(n as f64) * theta).sin());
        }
        self.compose_univariate(&derivs)
    }
}

/// Lift a real into a `TaylorScalar`. This is the user-facing constructor
/// and keeps the order in the supported jet range 2..=4.
pub fn lift<T: Real>(value: T, which: Lift, order: usize) -> Result<TaylorScalar<T>, TaylorError> {
    if !(2..=4).contains(&order) {
        return Err(TaylorError::OrderOutOfRange(order));
    }
    Ok(match which {
        Lift::Const => TaylorScalar::constant(value, order),
        Lift::U => TaylorScalar::variable(value, Var::U, order),
        Lift::V => TaylorScalar::variable(value, Var::V, order),
    })
}

/// Checked binary arithmetic; validates matching orders first.
pub fn arith<T: Real>(
    x: &TaylorScalar<T>,
    y: &TaylorScalar<T>,
    op: ArithOp,
) -> Result<TaylorScalar<T>, TaylorError> {
    if x.order != y.order {
        return Err(TaylorError::OrderMismatch(x.order, y.order));
    }
    Ok(match op {
        ArithOp::Add => x.add_impl(y),
        ArithOp::Sub => x.sub_impl(y),
        ArithOp::Mul => x.mul_impl(y),
        ArithOp::Div => x.try_div(y)?,
    })
}

/// Jet of an immersion at a chart point: one series per ambient coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T: Real> {
    base: (T, T),
    comps: Vec<TaylorScalar<T>>,
}

impl<T: Real> Jet<T> {
    pub fn new(base: (T, T), comps: Vec<TaylorScalar<T>>) -> Self {
        assert!(!comps.is_empty());
        // components that never met a variable stay order 0; promote them
        let order = comps.iter().map(|c| c.order()).max().unwrap();
        let comps: Vec<_> = comps
            .into_iter()
            .map(|c| {
                if c.order() == order {
                    c
                } else {
                    assert!(c.order() == 0, "jet components must share one order");
                    TaylorScalar::constant(c.value(), order)
                }
            })
            .collect();
        Jet { base, comps }
    }

    pub fn base(&self) -> (T, T) {
        self.base
    }

    pub fn ambient_dim(&self) -> usize {
        self.comps.len()
    }

    pub fn order(&self) -> usize {
        self.comps[0].order()
    }

    pub fn components(&self) -> &[TaylorScalar<T>] {
        &self.comps
    }

    pub fn value(&self) -> Vec<T> {
        self.comps.iter().map(|c| c.value()).collect()
    }

    /// d^{a+b} f / du^a dv^b at the base point, as an ambient vector.
    pub fn extract_derivative(&self, a: usize, b: usize) -> Result<Vec<T>, TaylorError> {
        self.comps.iter().map(|c| c.partial(a, b)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ts(order: usize, entries: &[((usize, usize), f64)]) -> TaylorScalar<f64> {
        let mut s = TaylorScalar::constant(0.0, order);
        for &((a, b), c) in entries {
            let idx = tri_index(order, a, b);
            s.coeffs[idx] = c;
        }
        s
    }

    #[test]
    fn lift_constant_and_variables() {
        let c = lift(3.0, Lift::Const, 2).unwrap();
        assert_eq!(c.coeff(0, 0), 3.0);
        assert!(c.is_const_series());

        let u = lift(0.5, Lift::U, 2).unwrap();
        assert_eq!(u.coeff(0, 0), 0.5);
        assert_eq!(u.coeff(1, 0), 1.0);
        assert_eq!(u.coeff(0, 1), 0.0);

        let v = lift(0.0, Lift::V, 4).unwrap();
        assert_eq!(v.coeff(0, 0), 0.0);
        assert_eq!(v.coeff(0, 1), 1.0);
        assert_eq!(v.coeff(1, 0), 0.0);

        assert_eq!(lift(1.0, Lift::U, 5), Err(TaylorError::OrderOutOfRange(5)));
        assert_eq!(lift(1.0, Lift::U, 1), Err(TaylorError::OrderOutOfRange(1)));
    }

    #[test]
    fn u_squared() {
        let u = TaylorScalar::variable(0.0, Var::U, 2);
        let u2 = arith(&u, &u, ArithOp::Mul).unwrap();
        assert_eq!(u2.coeff(2, 0), 1.0);
        assert_eq!(u2.coeff(0, 0), 0.0);
        assert_eq!(u2.coeff(1, 0), 0.0);
    }

    #[test]
    fn sin_at_zero() {
        let u = TaylorScalar::variable(0.0, Var::U, 2);
        let s = Scalar::sin(&u);
        assert_eq!(s.coeff(0, 0), 0.0);
        assert_eq!(s.coeff(1, 0), 1.0);
        assert_eq!(s.coeff(2, 0), 0.0);
    }

    #[test]
    fn order_mismatch_rejected() {
        let a = TaylorScalar::constant(1.0, 2);
        let b = TaylorScalar::constant(1.0, 3);
        assert_eq!(arith(&a, &b, ArithOp::Add), Err(TaylorError::OrderMismatch(2, 3)));
    }

    #[test]
    fn division_near_zero() {
        let a = TaylorScalar::variable(1.0, Var::U, 2);
        let b = TaylorScalar::constant(1e-13, 2);
        assert!(matches!(arith(&a, &b, ArithOp::Div), Err(TaylorError::DivisionNearZero(_))));
    }

    #[test]
    fn sqrt_log_domain_errors() {
        let neg = TaylorScalar::constant(-1.0, 2);
        assert!(matches!(Scalar::sqrt(&neg), Err(TaylorError::DomainError { func: "sqrt", .. })));
        assert!(matches!(Scalar::ln(&neg), Err(TaylorError::DomainError { func: "log", .. })));
    }

    // Richardson-extrapolated central differences over plain f64 evaluation;
    // the oracle never touches series arithmetic.
    fn fd1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    }

    fn fd2(f: impl Fn(f64) -> f64 + Copy, x: f64, h: f64) -> f64 {
        let d = |h: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    }

    #[test]
    fn exp_of_series_matches_finite_differences() {
        // g(u) = exp(0.3 + 0.7 u + 0.2 u^2) along the u-axis
        let g = |u: f64| (0.3 + 0.7 * u + 0.2 * u * u).exp();
        let s = ts(2, &[((0, 0), 0.3), ((1, 0), 0.7), ((2, 0), 0.2)]);
        let e = Scalar::exp(&s);
        let h = 1e-4;
        assert_relative_eq!(e.partial(0, 0).unwrap(), g(0.0), max_relative = 1e-10);
        assert_relative_eq!(e.partial(1, 0).unwrap(), fd1(g, 0.0, h), max_relative = 1e-6);
        assert_relative_eq!(e.partial(2, 0).unwrap(), fd2(g, 0.0, h), max_relative = 1e-6);
    }

    #[test]
    fn atan_sqrt_ln_match_finite_differences() {
        let base = |u: f64| 1.4 + 0.6 * u - 0.3 * u * u;
        let s = ts(3, &[((0, 0), 1.4), ((1, 0), 0.6), ((2, 0), -0.3)]);
        let h = 1e-3;
        for (name, f, series) in [
            ("atan", Box::new(move |u: f64| base(u).atan()) as Box<dyn Fn(f64) -> f64>, Scalar::atan(&s)),
            ("sqrt", Box::new(move |u: f64| base(u).sqrt()), Scalar::sqrt(&s).unwrap()),
            ("ln", Box::new(move |u: f64| base(u).ln()), Scalar::ln(&s).unwrap()),
        ] {
            assert_relative_eq!(series.partial(0, 0).unwrap(), f(0.0), max_relative = 1e-12);
            assert_relative_eq!(
                series.partial(1, 0).unwrap(),
                fd1(&f, 0.0, h),
                max_relative = 1e-6,
            );
            let _ = name;
        }
    }

    #[test]
    fn jet_extract_polynomial() {
        // f(u,v) = (u, v, u^2 - v^2, 2uv) at (0,0)
        let order = 2;
        let u = TaylorScalar::variable(0.0, Var::U, order);
        let v = TaylorScalar::variable(0.0, Var::V, order);
        let comps = vec![
            u.clone(),
            v.clone(),
            u.clone() * u.clone() - v.clone() * v.clone(),
            (u.clone() * v.clone()).scale_by(2.0),
        ];
        let jet = Jet::new((0.0, 0.0), comps);
        assert_eq!(jet.extract_derivative(2, 0).unwrap(), vec![0.0, 0.0, 2.0, 0.0]);
        assert_eq!(jet.extract_derivative(1, 1).unwrap(), vec![0.0, 0.0, 0.0, 2.0]);
        assert!(matches!(
            jet.extract_derivative(3, 0),
            Err(TaylorError::OrderExceeded { .. })
        ));
    }

    #[test]
    fn jet_extract_sin_cos() {
        let order = 2;
        let u = TaylorScalar::variable(0.0, Var::U, order);
        let v = TaylorScalar::variable(0.0, Var::V, order);
        let comps = vec![
            u.clone(),
            v.clone(),
            Scalar::sin(&u) * Scalar::cos(&v),
            TaylorScalar::constant(0.0, order),
        ];
        let jet = Jet::new((0.0, 0.0), comps);
        assert_eq!(jet.extract_derivative(1, 0).unwrap(), vec![1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn derivative_reindexes_coefficients() {
        let s = ts(3, &[((0, 0), 1.0), ((2, 1), 5.0), ((3, 0), 2.0)]);
        let du = s.derivative(Var::U);
        assert_eq!(du.order(), 2);
        assert_eq!(du.coeff(1, 1), 10.0);
        assert_eq!(du.coeff(2, 0), 6.0);
        let dv = s.derivative(Var::V);
        assert_eq!(dv.coeff(2, 0), 5.0);
    }

    #[test]
    fn f32_smoke() {
        let u = TaylorScalar::<f32>::variable(0.25f32, Var::U, 3);
        let w = Scalar::sqrt(&(Scalar::exp(&u) + TaylorScalar::constant(1.0f32, 3))).unwrap();
        assert!((w.value() - (0.25f32.exp() + 1.0).sqrt()).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn ring_distributivity(
            xs in proptest::collection::vec(-2.0f64..2.0, 6),
            ys in proptest::collection::vec(-2.0f64..2.0, 6),
            zs in proptest::collection::vec(-2.0f64..2.0, 6),
        ) {
            let order = 2; // 6 coefficients
            let build = |cs: &[f64]| {
                let mut s = TaylorScalar::constant(0.0, order);
                s.coeffs.copy_from_slice(cs);
                s
            };
            let (x, y, z) = (build(&xs), build(&ys), build(&zs));
            let lhs = (x.clone() + y.clone()) * z.clone();
            let rhs = x * z.clone() + y * z;
            for (a, b) in lhs.coeffs.iter().zip(&rhs.coeffs) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn recip_involution(
            mut cs in proptest::collection::vec(-2.0f64..2.0, 15),
            c0 in 0.1f64..2.0,
            flip in proptest::bool::ANY,
        ) {
            let order = 4;
            cs[0] = if flip { -c0 } else { c0 };
            let mut x = TaylorScalar::constant(0.0, order);
            x.coeffs.copy_from_slice(&cs);
            let back = Scalar::recip(&Scalar::recip(&x).unwrap()).unwrap();
            for (a, b) in x.coeffs.iter().zip(&back.coeffs) {
                prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
            }
        }
    }
}
