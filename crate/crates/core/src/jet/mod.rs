//! Truncated multivariate Taylor arithmetic ("jets") over the four base
//! variables `(x1, x2, y1, y2)`.
//!
//! A [`Jet`] stores normalized Taylor coefficients `c[α] = ∂^α f / α!` for
//! every multi-index `α = (a1, a2, b1, b2)` with `a1 + a2 <= x_order` and
//! `b1 + b2 <= y_order`. Truncation is anisotropic: curvature needs four
//! derivatives in the fiber direction but only two along the base.
//!
//! ```
//! use finsler::jet::{JetSpace, Var, seed_point};
//!
//! let space = JetSpace::new(2, 4);
//! let [x1, x2, _, _] = seed_point(&space, [2.0, 3.0, 0.0, 0.0], [true; 4]);
//! let f = &(&x1 * &x1) * &x2;
//! assert_eq!(f.value(), 12.0);
//! assert_eq!(f.partial([1, 1, 0, 0]).unwrap(), 4.0);
//! # let _ = Var::X1;
//! ```

pub mod series;

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
pub use series::Series;

/// Multi-index `(a1, a2, b1, b2)`: derivative counts in `x1, x2, y1, y2`.
pub type MultiIndex = [usize; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X1,
    X2,
    Y1,
    Y2,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X1, Var::X2, Var::Y1, Var::Y2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn x(i: usize) -> Var {
        [Var::X1, Var::X2][i]
    }

    pub fn y(i: usize) -> Var {
        [Var::Y1, Var::Y2][i]
    }

    fn is_x(self) -> bool {
        matches!(self, Var::X1 | Var::X2)
    }
}

struct SpaceInner {
    x_order: usize,
    y_order: usize,
    indices: Vec<MultiIndex>,
    lookup: Vec<usize>,
    /// `(i, j, k)`: coefficient `i` times coefficient `j` lands in `k`.
    products: Vec<(u32, u32, u32)>,
}

/// Truncation orders shared by all jets that are combined together.
#[derive(Clone)]
pub struct JetSpace(Arc<SpaceInner>);

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetSpace(x_order={}, y_order={})", self.0.x_order, self.0.y_order)
    }
}

impl PartialEq for JetSpace {
    fn eq(&self, other: &Self) -> bool {
        self.orders() == other.orders()
    }
}

impl Eq for JetSpace {}

fn space_cache() -> &'static Mutex<HashMap<(usize, usize), JetSpace>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), JetSpace>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl JetSpace {
    /// Space with maximum total degree `x_order` in `(x1, x2)` and `y_order`
    /// in `(y1, y2)`. Spaces are interned, so repeated construction is cheap.
    pub fn new(x_order: usize, y_order: usize) -> Self {
        let mut cache = space_cache().lock().expect("jet space cache poisoned");
        cache
            .entry((x_order, y_order))
            .or_insert_with(|| JetSpace(Arc::new(SpaceInner::build(x_order, y_order))))
            .clone()
    }

    /// Default orders for full curvature evaluation.
    pub fn curvature() -> Self {
        Self::new(2, 4)
    }

    pub fn x_order(&self) -> usize {
        self.0.x_order
    }

    pub fn y_order(&self) -> usize {
        self.0.y_order
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.0.x_order, self.0.y_order)
    }

    pub fn len(&self) -> usize {
        self.0.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.0.indices
    }

    pub fn contains(&self, idx: MultiIndex) -> bool {
        idx[0] + idx[1] <= self.0.x_order && idx[2] + idx[3] <= self.0.y_order
    }

    /// Position of a multi-index in the dense coefficient vector.
    pub fn position(&self, idx: MultiIndex) -> Option<usize> {
        if !self.contains(idx) {
            return None;
        }
        let (xo, yo) = (self.0.x_order + 1, self.0.y_order + 1);
        let flat = ((idx[0] * xo + idx[1]) * yo + idx[2]) * yo + idx[3];
        Some(self.0.lookup[flat])
    }

    /// Largest power of a nilpotent jet that can be non-zero.
    pub fn nilpotency(&self) -> usize {
        self.0.x_order + self.0.y_order
    }
}

impl SpaceInner {
    fn build(x_order: usize, y_order: usize) -> Self {
        let mut indices = Vec::new();
        for dx in 0..=x_order {
            for a1 in (0..=dx).rev() {
                let a2 = dx - a1;
                for dy in 0..=y_order {
                    for b1 in (0..=dy).rev() {
                        indices.push([a1, a2, b1, dy - b1]);
                    }
                }
            }
        }
        let (xo, yo) = (x_order + 1, y_order + 1);
        let mut lookup = vec![usize::MAX; xo * xo * yo * yo];
        for (pos, idx) in indices.iter().enumerate() {
            lookup[((idx[0] * xo + idx[1]) * yo + idx[2]) * yo + idx[3]] = pos;
        }
        let find = |idx: MultiIndex| lookup[((idx[0] * xo + idx[1]) * yo + idx[2]) * yo + idx[3]];
        let mut products = Vec::new();
        for (i, p) in indices.iter().enumerate() {
            for (j, q) in indices.iter().enumerate() {
                let s = [p[0] + q[0], p[1] + q[1], p[2] + q[2], p[3] + q[3]];
                if s[0] + s[1] <= x_order && s[2] + s[3] <= y_order {
                    products.push((i as u32, j as u32, find(s) as u32));
                }
            }
        }
        SpaceInner { x_order, y_order, indices, lookup, products }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Truncated Taylor expansion of a scalar function of `(x1, x2, y1, y2)`.
#[derive(Clone, PartialEq)]
pub struct Jet {
    space: JetSpace,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("space", &self.space)
            .field("value", &self.value())
            .finish()
    }
}

/// One jet per variable at `values`: active variables carry a unit first
/// derivative, inactive ones are constants.
pub fn seed_point(space: &JetSpace, values: [f64; 4], active: [bool; 4]) -> [Jet; 4] {
    std::array::from_fn(|v| {
        if active[v] {
            Jet::variable(space, Var::ALL[v], values[v])
        } else {
            Jet::constant(space, values[v])
        }
    })
}

impl Jet {
    pub fn constant(space: &JetSpace, value: f64) -> Self {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = value;
        Jet { space: space.clone(), coeffs }
    }

    pub fn zero(space: &JetSpace) -> Self {
        Self::constant(space, 0.0)
    }

    /// The coordinate function of `var`, expanded at `value`. Falls back to a
    /// constant when the space has no room for the first derivative.
    pub fn variable(space: &JetSpace, var: Var, value: f64) -> Self {
        let mut jet = Self::constant(space, value);
        let mut idx = [0; 4];
        idx[var.index()] = 1;
        if let Some(pos) = space.position(idx) {
            jet.coeffs[pos] = 1.0;
        }
        jet
    }

    /// Builds a jet from raw normalized coefficients laid out as in
    /// [`JetSpace::indices`].
    pub fn from_coeffs(space: &JetSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.len() {
            return Err(Error::Domain(format!(
                "expected {} coefficients, got {}",
                space.len(),
                coeffs.len()
            )));
        }
        Ok(Jet { space: space.clone(), coeffs })
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Normalized Taylor coefficient `∂^α f / α!`.
    pub fn coeff(&self, idx: MultiIndex) -> Result<f64> {
        self.space
            .position(idx)
            .map(|p| self.coeffs[p])
            .ok_or_else(|| Error::OrderExceeded(format!("{idx:?} in {:?}", self.space)))
    }

    /// Partial derivative `∂^α f = α! · c[α]`.
    pub fn partial(&self, idx: MultiIndex) -> Result<f64> {
        let c = self.coeff(idx)?;
        Ok(c * idx.iter().map(|&k| factorial(k)).product::<f64>())
    }

    fn check_space(&self, other: &Jet) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            let (a, b) = self.space.orders();
            let (c, d) = other.space.orders();
            Err(Error::SpaceMismatch(a, b, c, d))
        }
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Jet> {
        self.check_space(other)?;
        Ok(self + other)
    }

    pub fn checked_sub(&self, other: &Jet) -> Result<Jet> {
        self.check_space(other)?;
        Ok(self - other)
    }

    pub fn checked_mul(&self, other: &Jet) -> Result<Jet> {
        self.check_space(other)?;
        Ok(self * other)
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        self.check_space(other)?;
        Ok(self * &other.recip()?)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `f(self)` where `series` holds the Taylor coefficients of `f` at
    /// `self.value()`. Coefficients beyond the space's nilpotency are ignored
    /// and missing ones are treated as zero.
    pub fn compose(&self, series: &Series) -> Jet {
        let n = self.space.nilpotency().min(series.order());
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut acc = Jet::constant(&self.space, series.0[n]);
        for k in (0..n).rev() {
            acc = &acc * &h;
            acc.coeffs[0] += series.0[k];
        }
        acc
    }

    fn expand(&self) -> Series {
        Series::variable(self.value(), self.space.nilpotency())
    }

    pub fn recip(&self) -> Result<Jet> {
        if self.value() == 0.0 || !self.value().is_finite() {
            return Err(Error::Domain(format!("reciprocal of {}", self.value())));
        }
        Ok(self.compose(&self.expand().recip()))
    }

    pub fn exp(&self) -> Jet {
        self.compose(&self.expand().exp())
    }

    pub fn ln(&self) -> Result<Jet> {
        if !(self.value() > 0.0) {
            return Err(Error::Domain(format!("log of {}", self.value())));
        }
        Ok(self.compose(&self.expand().ln()))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        if !(self.value() > 0.0) {
            return Err(Error::Domain(format!("sqrt of {}", self.value())));
        }
        Ok(self.compose(&self.expand().sqrt()))
    }

    /// `self^p` for real `p`; requires a positive value.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        if !(self.value() > 0.0) {
            return Err(Error::Domain(format!("{}^{} with non-positive base", self.value(), p)));
        }
        Ok(self.compose(&self.expand().powf(p)))
    }

    /// Integer power by repeated squaring; any base for `n >= 0`.
    pub fn powi(&self, n: i32) -> Result<Jet> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = Jet::constant(&self.space, 1.0);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    pub fn sin(&self) -> Jet {
        self.compose(&self.expand().sin_cos().0)
    }

    pub fn cos(&self) -> Jet {
        self.compose(&self.expand().sin_cos().1)
    }

    pub fn atan(&self) -> Jet {
        self.compose(&self.expand().atan())
    }

    pub fn asinh(&self) -> Jet {
        self.compose(&self.expand().asinh())
    }

    /// `∂f/∂var`, living in the space with that variable's group order
    /// reduced by one.
    pub fn derivative(&self, var: Var) -> Result<Jet> {
        let (xo, yo) = self.space.orders();
        let target = if var.is_x() {
            if xo == 0 {
                return Err(Error::OrderExceeded(format!("∂/∂{var:?} of {:?}", self.space)));
            }
            JetSpace::new(xo - 1, yo)
        } else {
            if yo == 0 {
                return Err(Error::OrderExceeded(format!("∂/∂{var:?} of {:?}", self.space)));
            }
            JetSpace::new(xo, yo - 1)
        };
        let v = var.index();
        let coeffs = target
            .indices()
            .iter()
            .map(|idx| {
                let mut up = *idx;
                up[v] += 1;
                let pos = self.space.position(up).expect("raised index stays in source space");
                (idx[v] + 1) as f64 * self.coeffs[pos]
            })
            .collect();
        Ok(Jet { space: target, coeffs })
    }

    /// Drops coefficients outside a smaller space.
    pub fn truncate(&self, target: &JetSpace) -> Result<Jet> {
        let (xo, yo) = self.space.orders();
        let (tx, ty) = target.orders();
        if tx > xo || ty > yo {
            return Err(Error::OrderExceeded(format!(
                "cannot truncate {:?} to {:?}",
                self.space, target
            )));
        }
        let coeffs = target
            .indices()
            .iter()
            .map(|idx| self.coeffs[self.space.position(*idx).expect("subspace index")])
            .collect();
        Ok(Jet { space: target.clone(), coeffs })
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        assert_eq!(self.space, rhs.space, "jet space mismatch");
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        assert_eq!(self.space, rhs.space, "jet space mismatch");
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        assert_eq!(self.space, rhs.space, "jet space mismatch");
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for &(i, j, k) in &self.space.0.products {
            coeffs[k as usize] += self.coeffs[i as usize] * rhs.coeffs[j as usize];
        }
        Jet { space: self.space.clone(), coeffs }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += rhs;
        out
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet { (&self).$m(&rhs) }
        }
        impl<'a> $tr<&'a Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet { (&self).$m(rhs) }
        }
        impl<'a> $tr<Jet> for &'a Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet { self.$m(&rhs) }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $m(self, rhs: f64) -> Jet { (&self).$m(rhs) }
        }
    )*};
}

forward_owned!(Add::add, Sub::sub, Mul::mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Binary operations selectable at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Elementary functions selectable at run time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElemFn {
    Neg,
    PowReal(f64),
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Atan,
    Asinh,
}

pub fn jet_arith(a: &Jet, b: &Jet, op: ArithOp) -> Result<Jet> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
        ArithOp::Div => a.div(b),
    }
}

pub fn jet_func(f: ElemFn, a: &Jet) -> Result<Jet> {
    match f {
        ElemFn::Neg => Ok(-a),
        ElemFn::PowReal(p) => a.powf(p),
        ElemFn::Sqrt => a.sqrt(),
        ElemFn::Exp => Ok(a.exp()),
        ElemFn::Log => a.ln(),
        ElemFn::Sin => Ok(a.sin()),
        ElemFn::Cos => Ok(a.cos()),
        ElemFn::Atan => Ok(a.atan()),
        ElemFn::Asinh => Ok(a.asinh()),
    }
}
