//! Scale-free residuals.

/// `|lhs − rhs| / (1 + max |term|)`, where the terms are `lhs`, `rhs` and
/// any further constituents of the identity being checked.
pub fn normalized(lhs: f64, rhs: f64, terms: &[f64]) -> f64 {
    let scale = terms.iter().fold(lhs.abs().max(rhs.abs()), |m, t| m.max(t.abs()));
    let r = (lhs - rhs).abs() / (1.0 + scale);
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}
