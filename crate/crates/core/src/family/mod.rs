//! The two-dimensional `(α, β)`-metrics of vanishing S-curvature.
//!
//! The profile is
//!
//! ```text
//! φ(s) = [(1 + k1 s²)(1 + k2 s²)]^{1/4} · exp(∫₀^s τ),
//! τ(s) = ± √(k2 − k1) / (2 (1 + k1 s²) √(1 + k2 s²)),      k2 > k1,
//! ```
//!
//! and the metric is `F = α φ(β/α)` with `α`, `β` built from a structure
//! triple `(B, u, v)`: `u + iv` holomorphic and `u B₁ + v B₂ = 0`. Such
//! metrics are Einstein with the closed-form flag curvature of
//! [`closed_form_k`], and generally not Ricci-flat.

mod closed_form;
mod metric;
mod positivity;
mod structure;

use crate::error::{Error, Result};
use crate::jet::{Jet, Series};

pub use closed_form::{closed_form_k, closed_form_k_branches, constant_b_rigidity, deform_and_killing, Rigidity};
pub use metric::{
    assemble_finsler, construct_alpha_beta, AlphaBetaFields, AlphaBetaMetric, ExplicitFields, FamilyFields,
};
pub use positivity::{positivity_check, PositivityVerdict};
pub use structure::{
    build_structure, build_structure_with, polynomial_parts, structure_residuals, Domain, Exclusion, FieldSource, StructureData, StructurePoint,
    STRUCTURE_EQUATIONS,
};

/// Margin keeping samples away from the degenerate loci `B = 0`,
/// `u² + v² = 0` and `1 + k B = 0`.
pub const DOMAIN_MARGIN: f64 = 1e-6;

/// Absolute tolerance of the adaptive Simpson rule for `∫₀^s τ`.
pub const PRIMITIVE_TOL: f64 = 1e-12;

/// The `±` in `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// `+1` or `−1`; anything else is rejected.
    pub fn from_f64(v: f64) -> Result<Sign> {
        if v == 1.0 {
            Ok(Sign::Plus)
        } else if v == -1.0 {
            Ok(Sign::Minus)
        } else {
            Err(Error::Config(format!("eps must be +1 or -1, got {v}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    k1: f64,
    k2: f64,
    eps: Sign,
}

impl FamilyParams {
    pub fn new(k1: f64, k2: f64, eps: Sign) -> Result<Self> {
        if !(k1.is_finite() && k2.is_finite()) {
            return Err(Error::Domain(format!("non-finite parameters k1={k1}, k2={k2}")));
        }
        if k2 <= k1 {
            return Err(Error::Domain(format!("k2 must exceed k1, got k1={k1}, k2={k2}")));
        }
        Ok(FamilyParams { k1, k2, eps })
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn eps(&self) -> Sign {
        self.eps
    }

    pub fn with_eps(&self, eps: Sign) -> Self {
        FamilyParams { eps, ..*self }
    }

    /// `τ(0) = ±√(k2 − k1)/2`.
    pub fn a1(&self) -> f64 {
        self.eps.value() * (self.k2 - self.k1).sqrt() / 2.0
    }

    fn check_s(&self, s: f64) -> Result<()> {
        let p = 1.0 + self.k1 * s * s;
        let q = 1.0 + self.k2 * s * s;
        if !(p > 0.0 && q > 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!(
                "s = {s} outside the profile domain (1 + k1 s² = {p}, 1 + k2 s² = {q})"
            )));
        }
        Ok(())
    }

    pub fn tau(&self, s: f64) -> Result<f64> {
        self.check_s(s)?;
        Ok(self.tau_unchecked(s))
    }

    fn tau_unchecked(&self, s: f64) -> f64 {
        let s2 = s * s;
        self.a1() / ((1.0 + self.k1 * s2) * (1.0 + self.k2 * s2).sqrt())
    }

    /// Taylor series of `τ` at `s0`.
    fn tau_series(&self, s0: f64, order: usize) -> Series {
        let v = Series::variable(s0, order);
        let s2 = &v * &v;
        let p = (&s2.scale(self.k1) + 1.0).recip();
        let q = (&s2.scale(self.k2) + 1.0).powf(-0.5);
        (&p * &q).scale(self.a1())
    }

    /// `Φ(s) = ∫₀^s τ` by adaptive Simpson quadrature.
    pub fn primitive(&self, s: f64) -> Result<f64> {
        self.check_s(s)?;
        simpson(|t| self.tau_unchecked(t), 0.0, s, PRIMITIVE_TOL)
    }

    /// Taylor series of `φ` at `s0`, up to `order`.
    pub fn phi_series(&self, s0: f64, order: usize) -> Result<Series> {
        let big_phi = self.primitive(s0)?;
        let e = if order == 0 {
            Series::constant(big_phi, 0)
        } else {
            self.tau_series(s0, order - 1).integrate(big_phi)
        };
        let v = Series::variable(s0, order);
        let s2 = &v * &v;
        let radicand = &(&s2.scale(self.k1) + 1.0) * &(&s2.scale(self.k2) + 1.0);
        Ok(&radicand.powf(0.25) * &e.exp())
    }

    pub fn phi(&self, s: f64) -> Result<f64> {
        let r = (1.0 + self.k1 * s * s) * (1.0 + self.k2 * s * s);
        Ok(r.powf(0.25) * self.primitive(s)?.exp())
    }

    /// `[φ, φ′, φ″]` at `s`.
    pub fn phi_derivatives(&self, s: f64) -> Result<[f64; 3]> {
        let ser = self.phi_series(s, 2)?;
        Ok([ser.derivative_at(0), ser.derivative_at(1), ser.derivative_at(2)])
    }

    /// `τ` composed with a jet.
    pub fn tau_jet(&self, s: &Jet) -> Result<Jet> {
        self.check_s(s.value())?;
        Ok(s.compose(&self.tau_series(s.value(), s.space().nilpotency())))
    }

    /// `φ` composed with a jet. Only the value coefficient of `Φ` comes from
    /// quadrature; all its derivatives come from the series of `τ`.
    pub fn phi_jet(&self, s: &Jet) -> Result<Jet> {
        Ok(s.compose(&self.phi_series(s.value(), s.space().nilpotency())?))
    }
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_DEPTH: u32 = 40;
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // (a, b, fa, fm, fb, estimate, tolerance, depth)
    let mut stack = vec![(a, b, fa, fm, fb, whole, tol, 0u32)];
    let mut total = 0.0;
    while let Some((a, b, fa, fm, fb, est, tol, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - est;
        if delta.abs() <= 15.0 * tol {
            total += left + right + delta / 15.0;
        } else if depth >= MAX_DEPTH || !delta.is_finite() {
            return Err(Error::QuadratureNonConvergence(format!(
                "∫τ on [{a}, {b}] did not reach tolerance {tol:e}"
            )));
        } else {
            stack.push((a, m, fa, flm, fm, left, tol / 2.0, depth + 1));
            stack.push((m, b, fm, frm, fb, right, tol / 2.0, depth + 1));
        }
    }
    Ok(total)
}
