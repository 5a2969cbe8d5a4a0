use super::{FamilyFields, FamilyParams, StructureData, StructurePoint, AlphaBetaFields, DOMAIN_MARGIN};
use crate::ab::{ab_tensors, OneFormData, RiemannData};
use crate::error::{Error, Result};
use crate::residual::normalized;

fn closed_form_from(p: &FamilyParams, s: &StructurePoint, quotient: f64) -> f64 {
    let (k1, k2) = (p.k1(), p.k2());
    let b = s.b;
    let uv = s.u * s.u + s.v * s.v;
    let sp = (1.0 + k1 * b).sqrt();
    let lap = s.ddb[0] + s.ddb[2];
    -uv * (1.0 + k2 * b).sqrt() / (4.0 * b * b)
        * (2.0 * sp * lap - uv * (2.0 + 3.0 * k1 * b) / (b * sp) * quotient)
}

fn check_closed_form_point(p: &FamilyParams, d: &StructureData, x: [f64; 2]) -> Result<StructurePoint> {
    let s = d.point(x)?;
    if !(s.b > DOMAIN_MARGIN && 1.0 + p.k1() * s.b > DOMAIN_MARGIN && 1.0 + p.k2() * s.b > DOMAIN_MARGIN) {
        return Err(Error::Domain(format!("B = {} out of range at x={x:?}", s.b)));
    }
    if s.u.abs().max(s.v.abs()) <= DOMAIN_MARGIN {
        return Err(Error::Domain(format!("u and v both vanish at x={x:?}")));
    }
    Ok(s)
}

/// The flag curvature of the family in closed form,
///
/// ```text
/// K = −(u² + v²) √(1 + k2 B) / (4B²) · { 2 √(1 + k1 B) (B₁₁ + B₂₂)
///       − (u² + v²)(2 + 3 k1 B) / (B √(1 + k1 B)) · (B₁/v)² },
/// ```
///
/// with `(B₁/v)²` replaced by the equal `(B₂/u)²` where `|v| < |u|`.
pub fn closed_form_k(p: &FamilyParams, d: &StructureData, x: [f64; 2]) -> Result<f64> {
    let s = check_closed_form_point(p, d, x)?;
    let q = if s.v.abs() >= s.u.abs() { (s.db[0] / s.v).powi(2) } else { (s.db[1] / s.u).powi(2) };
    Ok(closed_form_from(p, &s, q))
}

/// Both quotient branches, `(with B₁/v, with B₂/u)`; a branch is `None`
/// where its denominator is below the margin.
pub fn closed_form_k_branches(p: &FamilyParams, d: &StructureData, x: [f64; 2]) -> Result<(Option<f64>, Option<f64>)> {
    let s = check_closed_form_point(p, d, x)?;
    let v_branch = (s.v.abs() > DOMAIN_MARGIN).then(|| closed_form_from(p, &s, (s.db[0] / s.v).powi(2)));
    let u_branch = (s.u.abs() > DOMAIN_MARGIN).then(|| closed_form_from(p, &s, (s.db[1] / s.u).powi(2)));
    Ok((v_branch, u_branch))
}

/// Rescales `β` to `β̃ = (1 + k1 b²)^{−3/4} (1 + k2 b²)^{−1/4} β` and reports
/// how far `β̃` is from a Killing form: the max over `i, j` of the normalized
/// `r̃_ij`.
pub fn deform_and_killing(p: &FamilyParams, rm: &RiemannData, of: &OneFormData) -> Result<(OneFormData, f64)> {
    let b2 = of.norm_sq_jet(rm.metric_jets())?;
    let pk = &b2.scale(p.k1()) + 1.0;
    let qk = &b2.scale(p.k2()) + 1.0;
    if !(pk.value() > 0.0 && qk.value() > 0.0) {
        return Err(Error::Domain(format!("1 + k b² not positive (b² = {})", b2.value())));
    }
    let factor = &pk.powf(-0.75)? * &qk.powf(-0.25)?;
    let b = of.jets();
    let deformed = OneFormData::new([&factor * &b[0], &factor * &b[1]])?;
    let t = ab_tensors(rm, &deformed)?;
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max(normalized(t.r[i][j], 0.0, &[t.db[i][j], t.db[j][i]]));
        }
    }
    Ok((deformed, worst))
}

/// Residuals of "`α` flat and `β` parallel" for a constant-`B` triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rigidity {
    /// `|λ|`.
    pub flatness: f64,
    /// `max |b_{i|j}|`.
    pub parallel: f64,
}

/// Requires `B` to be constant on the domain (checked on a 9×9 grid and at
/// `x`).
pub fn constant_b_rigidity(p: &FamilyParams, d: &StructureData, x: [f64; 2]) -> Result<Rigidity> {
    const GRADIENT_TOL: f64 = 1e-12;
    let grid = d.domain.grid(9, 9);
    for y in grid.iter().copied().filter(|y| d.domain.contains(*y)).chain([x]) {
        let s = d.point(y)?;
        let g = s.db[0].abs().max(s.db[1].abs());
        if g > GRADIENT_TOL * (1.0 + s.b.abs()) {
            return Err(Error::PreconditionFailed(format!("B is not constant: |∇B| = {g:e} at {y:?}")));
        }
    }
    let (rm, of) = FamilyFields::new(*p, d.clone()).pair(x)?;
    let t = ab_tensors(&rm, &of)?;
    let parallel = t.db.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Rigidity { flatness: rm.lambda.abs(), parallel })
}
