use super::FamilyParams;

/// Number of sample nodes on `[−b, b]`.
const NODES: usize = 201;

/// Strong convexity of `F = α φ(β/α)` for `‖β‖_α = b`.
///
/// `F` is a positive-definite Finsler metric iff, for `|s| ≤ b`,
/// `φ > 0`, `φ − sφ′ > 0` and `φ − sφ′ + (b² − s²)φ″ > 0`. For this
/// profile that reduces to `1 + k1 b² > 0`; the quadratics `f(t)` and
/// `h(t)` on `[0, b²]` certify the third inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityVerdict {
    pub pd: bool,
    /// `1 + k1 b²`.
    pub condition_value: f64,
    /// Minima of the three inequalities over the defined sample nodes.
    pub sampled_min: [f64; 3],
    /// Nodes at which `φ` is undefined (`1 + k1 s² ≤ 0`).
    pub undefined_nodes: usize,
    /// Minima of `f(t)` and `h(t)` over `t ∈ [0, b²]`.
    pub polynomial_min: [f64; 2],
}

impl PositivityVerdict {
    /// Whether the sampled inequalities hold at every node.
    pub fn sampled_positive(&self) -> bool {
        self.undefined_nodes == 0 && self.sampled_min.iter().all(|m| *m > 0.0)
    }
}

/// `[Ã, B̃, C̃]` of `f(t)`.
pub fn f_coefficients(p: &FamilyParams, b: f64) -> [f64; 3] {
    let (k1, k2) = (p.k1(), p.k2());
    let b2 = b * b;
    [
        2.0 * k1 * k2 * (k1 + k2) * b2 + 3.0 * k1 * k1 + 2.0 * k2 * k2 - k1 * k2,
        k1 * (9.0 * k2 - k1) * b2 + 3.0 * k2 + 5.0 * k1,
        (3.0 * k2 + k1) * b2 + 4.0,
    ]
}

/// `[Â, B̂, Ĉ]` of `h(t)`.
pub fn h_coefficients(p: &FamilyParams, b: f64) -> [f64; 3] {
    let (k1, k2) = (p.k1(), p.k2());
    let b2 = b * b;
    let b4 = b2 * b2;
    [
        4.0 * k1 * k2 * k2 * (3.0 * k2 + k1) * b4 + 4.0 * k2 * (3.0 * k2 * k2 + 3.0 * k1 * k1 + 2.0 * k1 * k2) * b2
            - 6.0 * k1 * k2
            + 9.0 * k1 * k1
            + 13.0 * k2 * k2,
        4.0 * k1 * k2 * (9.0 * k2 - k1) * b4 + 2.0 * (9.0 * k2 - k1) * (3.0 * k1 + k2) * b2 + 12.0 * k1 + 20.0 * k2,
        (4.0 + k1 * b2 + 3.0 * k2 * b2).powi(2),
    ]
}

/// Minimum of `A t² + B t + C` over `[lo, hi]`.
pub fn quadratic_min(c: [f64; 3], lo: f64, hi: f64) -> f64 {
    let q = |t: f64| (c[0] * t + c[1]) * t + c[2];
    let mut m = q(lo).min(q(hi));
    if c[0] > 0.0 {
        let v = -c[1] / (2.0 * c[0]);
        if v > lo && v < hi {
            m = m.min(q(v));
        }
    }
    m
}

pub fn positivity_check(p: &FamilyParams, b: f64) -> PositivityVerdict {
    let b = b.abs();
    let condition_value = 1.0 + p.k1() * b * b;
    let mut sampled_min = [f64::INFINITY; 3];
    let mut undefined_nodes = 0;
    for j in 0..NODES {
        let s = if b == 0.0 { 0.0 } else { -b + 2.0 * b * j as f64 / (NODES - 1) as f64 };
        match p.phi_derivatives(s) {
            Ok([phi, d1, d2]) => {
                let vals = [phi, phi - s * d1, phi - s * d1 + (b * b - s * s) * d2];
                for (m, v) in sampled_min.iter_mut().zip(vals) {
                    *m = m.min(if v.is_nan() { f64::NEG_INFINITY } else { v });
                }
            }
            Err(_) => undefined_nodes += 1,
        }
    }
    let b2 = b * b;
    PositivityVerdict {
        pd: condition_value > 0.0,
        condition_value,
        sampled_min,
        undefined_nodes,
        polynomial_min: [
            quadratic_min(f_coefficients(p, b), 0.0, b2),
            quadratic_min(h_coefficients(p, b), 0.0, b2),
        ],
    }
}
