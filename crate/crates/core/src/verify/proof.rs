//! The identity chain leading from the `r_ij` condition to the flag curvature.
//!
//! Each entry compares a quantity computed directly from `(α, β)` (covariant
//! derivatives, curvature) with its closed form in terms of `θ`, `λ`,
//! `s_m s^m` and polynomials in `b²`.

use std::collections::BTreeMap;

use crate::ab::ABTensorSet;
use crate::error::{Error, Result};
use crate::family::{FamilyParams, StructurePoint};
use crate::residual::normalized;

/// Margin on `2(1 − k1 k2 b⁴) + (k2 − k1) b²` below which the chain is not
/// evaluated (the identities divide by it).
pub const LOCUS_MARGIN: f64 = 1e-4;

/// Names of the chain residuals, in evaluation order.
pub const PROOF_CHAIN_NAMES: [&str; 9] = [
    "r_divergence",
    "s_divergence",
    "b_s0k_contraction",
    "s_trace_derivative",
    "s00_ricci_form",
    "s00_closed_form",
    "flag_curvature_lambda_form",
    "s_norm_closed_form",
    "gauss_curvature_closed_form",
];

/// Pointwise scalars of the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProofScalars {
    pub b2: f64,
    pub theta: f64,
    pub lambda: f64,
    /// `s_m s^m`.
    pub s_norm: f64,
    /// `2(1 − k1 k2 b⁴) + (k2 − k1) b²`.
    pub locus: f64,
    /// `4 + (k1 + 3k2) b²`.
    pub r00_denominator: f64,
    /// Polynomial in the closed form of `s^m_{0|m}`.
    pub s_trace_poly: f64,
    /// Polynomial in the closed form of `s_{0|0}`.
    pub s00_poly: f64,
    /// Polynomial in `K` as a function of `λ` and `s_m s^m`.
    pub flag_poly: f64,
    /// Polynomial in the closed form of `λ`.
    pub gauss_poly: f64,
}

impl ProofScalars {
    /// `[A, A₁, A₂, T]` as polynomials in `b²`.
    pub fn polynomials(p: &FamilyParams, b2: f64) -> [f64; 4] {
        let (k1, k2) = (p.k1(), p.k2());
        let b4 = b2 * b2;
        let b6 = b4 * b2;
        let a = 2.0 * k1 * k2 * (k1 * k1 - 18.0 * k1 * k2 - 15.0 * k2 * k2) * b6
            + (3.0 * k1.powi(3) - 135.0 * k1 * k2 * k2 - 57.0 * k1 * k1 * k2 - 3.0 * k2.powi(3)) * b4
            - (156.0 * k1 * k2 + 18.0 * k1 * k1 + 18.0 * k2 * k2) * b2
            - 16.0 * (3.0 * k1 + k2);
        let a1 = 4.0 * k1 * k2 * (k1 + 3.0 * k2) * b6 * (2.0 * k1 * k2 * b2 + 3.0 * (k1 - k2))
            + (6.0 * k1.powi(3) - 6.0 * k2.powi(3) - 18.0 * k1 * k1 * k2 - 174.0 * k1 * k2 * k2) * b4
            - (12.0 * k1 * k1 + 28.0 * k2 * k2 + 216.0 * k1 * k2) * b2
            - 24.0 * (3.0 * k1 + k2);
        let a2 = 2.0 * k1 * k1 * k2 * k2 * b6
            + 5.0 * k1 * k2 * (k1 + k2) * b4
            + k1 * (k1 + 13.0 * k2) * b2
            + 2.0 * (2.0 * k1 + k2);
        let t = 2.0 * k1 * k2 * b6 * (k1 * k2 * b2 + k1 - k2) + (k1 * k1 - k2 * k2 - 8.0 * k1 * k2) * b4
            - 4.0 * (k1 + k2) * b2
            - 2.0;
        [a, a1, a2, t]
    }

    pub fn new(p: &FamilyParams, b2: f64, theta: f64, lambda: f64, s_norm: f64) -> Self {
        let (k1, k2) = (p.k1(), p.k2());
        let [a, a1, a2, t] = Self::polynomials(p, b2);
        ProofScalars {
            b2,
            theta,
            lambda,
            s_norm,
            locus: 2.0 * (1.0 - k1 * k2 * b2 * b2) + (k2 - k1) * b2,
            r00_denominator: 4.0 + (k1 + 3.0 * k2) * b2,
            s_trace_poly: a,
            s00_poly: a1,
            flag_poly: a2,
            gauss_poly: t,
        }
    }

    /// `K` from `λ` and `s_m s^m`.
    pub fn flag_curvature(&self, p: &FamilyParams) -> f64 {
        let d4 = self.r00_denominator;
        2.0 * (1.0 + p.k2() * self.b2) / self.locus
            * (self.lambda - 8.0 * self.flag_poly / (self.b2 * d4 * d4) * self.s_norm)
    }
}

/// Named normalized residuals of the chain at direction `y`, given the
/// tensors of the family pair, the structure values at the same point and
/// the numerically computed flag curvature `k_numeric`.
pub fn proof_chain_from(
    p: &FamilyParams,
    t: &ABTensorSet,
    lambda: f64,
    s: &StructurePoint,
    k_numeric: f64,
    y: [f64; 2],
) -> Result<BTreeMap<&'static str, f64>> {
    if t.b2 <= 1e-10 {
        return Err(Error::DegenerateForm(t.b2));
    }
    let ps = ProofScalars::new(p, t.b2, t.theta, lambda, t.s_norm_sq());
    if ps.locus.abs() < LOCUS_MARGIN {
        return Err(Error::DegenerateDenominator(format!(
            "2(1 - k1 k2 b^4) + (k2 - k1) b^2 = {:e}",
            ps.locus
        )));
    }
    let (k1, k2) = (p.k1(), p.k2());
    let b2 = t.b2;
    let (d2, d4) = (ps.locus, ps.r00_denominator);
    let (p1, p2) = (1.0 + k1 * b2, 1.0 + k2 * b2);
    let (theta, lam, ss) = (ps.theta, ps.lambda, ps.s_norm);
    let al2 = t.alpha_sq(y);
    let be = t.beta(y);
    let gap = b2 * al2 - be * be;
    let c = (3.0 * k1 + k2 + 4.0 * k1 * k2 * b2) / d4;
    let mut out = BTreeMap::new();

    let pr = 32.0 * p1 * p2 * (k1 * k2 * (3.0 * k2 + k1) * b2 * b2 + 8.0 * k1 * k2 * b2 + 3.0 * k1 + k2) / d4.powi(3);
    let s_div = t.s_divergence();
    let (u1, u2) = (pr * ss, c * b2 * s_div);
    out.insert("r_divergence", normalized(t.r_divergence(), u1 + u2, &[u1, u2]));

    // With r_ij = c (b_i s_j + b_j s_i) the divergence identity gives
    // (1 − c b²) s^m_{|m} = (…) θ − λ b², and 1 − c b² = 2 d2 / d4; the λ
    // term therefore enters with a minus sign.
    let (u1, u2) = (
        8.0 * p1 * p2 * ((3.0 * k2 * k2 - k1 * k1 + 6.0 * k1 * k2) * b2 * b2 + 4.0 * (k1 + 3.0 * k2) * b2 + 8.0)
            / (d4 * d4 * d2)
            * theta,
        -b2 * d4 / (2.0 * d2) * lam,
    );
    out.insert("s_divergence", normalized(s_div, u1 + u2, &[u1, u2]));

    out.insert("b_s0k_contraction", normalized(t.b_s0k(y), 2.0 * d2 / d4 * theta * be, &[]));

    let (u1, u2) = (be / d2 * 2.0 * ps.s_trace_poly / (d4 * d4) * theta, be / d2 * 0.5 * d4 * lam);
    out.insert("s_trace_derivative", normalized(t.s_trace_derivative(y), u1 + u2, &[u1, u2]));

    let s00 = t.s00_derivative(y);
    let terms = [t.b_r_difference(y), -lam * gap, t.q00(y), -t.t00(y)];
    out.insert("s00_ricci_form", normalized(s00, terms.iter().sum(), &terms));

    let terms = [
        -d4 * lam / (2.0 * d2) * gap,
        2.0 * theta * d2 / d4 * al2,
        -2.0 * theta * ps.s00_poly / (d4 * d4 * d2) * gap,
    ];
    out.insert("s00_closed_form", normalized(s00, terms.iter().sum(), &terms));

    out.insert("flag_curvature_lambda_form", normalized(k_numeric, ps.flag_curvature(p), &[]));

    let cross = s.u * s.db[1] - s.v * s.db[0];
    let ss_closed = d4 * d4 * cross * cross / (64.0 * b2 * p1.sqrt() * p2.powf(1.5));
    out.insert("s_norm_closed_form", normalized(ss, ss_closed, &[]));

    let uv = s.u * s.u + s.v * s.v;
    let quotient = if s.v.abs() >= s.u.abs() { (s.db[0] / s.v).powi(2) } else { (s.db[1] / s.u).powi(2) };
    let inner = [
        d2 * p1.sqrt() * (s.ddb[0] + s.ddb[2]),
        uv * quotient / (b2 * p2 * p1.sqrt()) * ps.gauss_poly,
    ];
    let pre = -uv / (4.0 * b2 * b2 * p2.sqrt());
    out.insert(
        "gauss_curvature_closed_form",
        normalized(lam, pre * (inner[0] + inner[1]), &[pre * inner[0], pre * inner[1]]),
    );
    Ok(out)
}
