use crate::error::{Error, Result};
use crate::expr::{BinOp, Expression, ScalarField};
use crate::jet::{Jet, JetSpace, Var};
use crate::residual::normalized;

/// The three structure equations, in the order reported by
/// [`structure_residuals`].
pub const STRUCTURE_EQUATIONS: [&str; 3] = ["u_1 = v_2", "u_2 = -v_1", "u*B_1 + v*B_2 = 0"];

/// Default tolerance when validating a structure triple.
pub const STRUCTURE_TOL: f64 = 1e-9;

/// A region removed from the sampling box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exclusion {
    /// Points with `|x − center| < radius`.
    Disc { center: [f64; 2], radius: f64 },
    /// Points with `|x − center| > radius`.
    Exterior { center: [f64; 2], radius: f64 },
}

impl Exclusion {
    pub fn excludes(&self, x: [f64; 2]) -> bool {
        let d = |c: [f64; 2]| ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt();
        match *self {
            Exclusion::Disc { center, radius } => d(center) < radius,
            Exclusion::Exterior { center, radius } => d(center) > radius,
        }
    }
}

/// A box `[x1min, x1max] × [x2min, x2max]` minus exclusions.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub bounds: [f64; 4],
    pub exclusions: Vec<Exclusion>,
}

impl Domain {
    pub fn new(bounds: [f64; 4], exclusions: Vec<Exclusion>) -> Result<Self> {
        if !bounds.iter().all(|b| b.is_finite()) || bounds[0] > bounds[1] || bounds[2] > bounds[3] {
            return Err(Error::Config(format!("empty or invalid domain box {bounds:?}")));
        }
        Ok(Domain { bounds, exclusions })
    }

    /// `0.1 ≤ |x| ≤ outer` style annulus centred at the origin.
    pub fn annulus(inner: f64, outer: f64) -> Result<Self> {
        Domain::new(
            [-outer, outer, -outer, outer],
            vec![
                Exclusion::Disc { center: [0.0, 0.0], radius: inner },
                Exclusion::Exterior { center: [0.0, 0.0], radius: outer },
            ],
        )
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        let [a, b, c, d] = self.bounds;
        x[0] >= a && x[0] <= b && x[1] >= c && x[1] <= d && !self.exclusions.iter().any(|e| e.excludes(x))
    }

    /// `nx × ny` cell-centred grid over the box (a single cell gives the
    /// midpoint), row-major in `x2` then `x1`.
    pub fn grid(&self, nx: usize, ny: usize) -> Vec<[f64; 2]> {
        let [a, b, c, d] = self.bounds;
        let coord = |lo: f64, hi: f64, n: usize, i: usize| {
            if n == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                out.push([coord(a, b, nx, i), coord(c, d, ny, j)]);
            }
        }
        out
    }
}

/// Where `u` and `v` come from.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    /// `f(z) = Σ c_n zⁿ` with `c_n = [re, im]`; `u = Re f`, `v = Im f`.
    Polynomial(Vec<[f64; 2]>),
    Expressions { u: ScalarField, v: ScalarField },
}

/// A structure triple `(B, u, v)` on a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureData {
    pub u: ScalarField,
    pub v: ScalarField,
    pub b: ScalarField,
    pub domain: Domain,
}

/// Values and derivatives of a structure triple at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructurePoint {
    pub b: f64,
    /// `[B₁, B₂]`.
    pub db: [f64; 2],
    /// `[B₁₁, B₁₂, B₂₂]`.
    pub ddb: [f64; 3],
    pub u: f64,
    pub v: f64,
    /// `[u₁, u₂]`.
    pub du: [f64; 2],
    /// `[v₁, v₂]`.
    pub dv: [f64; 2],
}

impl StructureData {
    /// Takes the triple as given, without checking the structure equations.
    pub fn new(u: ScalarField, v: ScalarField, b: ScalarField, domain: Domain) -> Self {
        StructureData { u, v, b, domain }
    }

    /// Jets of `(B, u, v)` on the given coordinate jets.
    pub fn jets(&self, x: &[Jet; 2]) -> Result<(Jet, Jet, Jet)> {
        Ok((self.b.eval(x)?, self.u.eval(x)?, self.v.eval(x)?))
    }

    pub fn point(&self, x: [f64; 2]) -> Result<StructurePoint> {
        let sp = JetSpace::new(2, 0);
        let xj = [Jet::variable(&sp, Var::X1, x[0]), Jet::variable(&sp, Var::X2, x[1])];
        let (b, u, v) = self.jets(&xj)?;
        let d = |j: &Jet, i: [usize; 2]| j.partial([i[0], i[1], 0, 0]);
        Ok(StructurePoint {
            b: b.value(),
            db: [d(&b, [1, 0])?, d(&b, [0, 1])?],
            ddb: [d(&b, [2, 0])?, d(&b, [1, 1])?, d(&b, [0, 2])?],
            u: u.value(),
            v: v.value(),
            du: [d(&u, [1, 0])?, d(&u, [0, 1])?],
            dv: [d(&v, [1, 0])?, d(&v, [0, 1])?],
        })
    }
}

/// Normalized residuals of `u₁ = v₂`, `u₂ = −v₁`, `u B₁ + v B₂ = 0` at `x`.
pub fn structure_residuals(d: &StructureData, x: [f64; 2]) -> Result<[f64; 3]> {
    let p = d.point(x)?;
    let ub = p.u * p.db[0];
    let vb = p.v * p.db[1];
    Ok([
        normalized(p.du[0], p.dv[1], &[]),
        normalized(p.du[1], -p.dv[0], &[]),
        normalized(ub + vb, 0.0, &[ub, vb]),
    ])
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn monomial(coef: f64, px: usize, py: usize) -> Expression {
    let pow = |var: usize, p: usize| match p {
        1 => Expression::var(var),
        _ => Expression::Binary(BinOp::Pow, Box::new(Expression::var(var)), Box::new(Expression::Const(p as f64))),
    };
    let mut e = Expression::Const(coef);
    for (var, p) in [(0, px), (1, py)] {
        if p > 0 {
            e = Expression::Binary(BinOp::Mul, Box::new(e), Box::new(pow(var, p)));
        }
    }
    e
}

/// Real and imaginary parts of `Σ c_n zⁿ`, `z = x1 + i x2`, as expressions.
pub fn polynomial_parts(coeffs: &[[f64; 2]]) -> (ScalarField, ScalarField) {
    let mut re: Vec<Expression> = Vec::new();
    let mut im: Vec<Expression> = Vec::new();
    for (n, &[a, b]) in coeffs.iter().enumerate() {
        // zⁿ = Σ_k C(n,k) x1^{n−k} (i x2)^k, and i^k cycles 1, i, −1, −i
        for k in 0..=n {
            let c = binomial(n, k);
            let (ik_re, ik_im) = match k % 4 {
                0 => (1.0, 0.0),
                1 => (0.0, 1.0),
                2 => (-1.0, 0.0),
                _ => (0.0, -1.0),
            };
            // (a + ib)(ik_re + i ik_im)
            let cr = c * (a * ik_re - b * ik_im);
            let ci = c * (a * ik_im + b * ik_re);
            if cr != 0.0 {
                re.push(monomial(cr, n - k, k));
            }
            if ci != 0.0 {
                im.push(monomial(ci, n - k, k));
            }
        }
    }
    let sum = |terms: Vec<Expression>| {
        terms
            .into_iter()
            .reduce(|acc, t| Expression::Binary(BinOp::Add, Box::new(acc), Box::new(t)))
            .unwrap_or(Expression::Const(0.0))
    };
    (ScalarField::new(sum(re)), ScalarField::new(sum(im)))
}

/// Builds a structure triple and checks the structure equations on a 9×9
/// grid over the domain (excluded points and points where a field is
/// undefined are skipped).
pub fn build_structure(source: FieldSource, b: ScalarField, domain: Domain) -> Result<StructureData> {
    build_structure_with(source, b, domain, STRUCTURE_TOL)
}

pub fn build_structure_with(source: FieldSource, b: ScalarField, domain: Domain, tol: f64) -> Result<StructureData> {
    let (u, v) = match source {
        FieldSource::Polynomial(c) => polynomial_parts(&c),
        FieldSource::Expressions { u, v } => (u, v),
    };
    let d = StructureData::new(u, v, b, domain);
    for x in d.domain.grid(9, 9) {
        if !d.domain.contains(x) {
            continue;
        }
        let res = match structure_residuals(&d, x) {
            Ok(r) => r,
            Err(Error::Domain(_)) => continue,
            Err(e) => return Err(e),
        };
        for (residual, equation) in res.into_iter().zip(STRUCTURE_EQUATIONS) {
            if !(residual <= tol) {
                return Err(Error::StructureViolation { equation, x1: x[0], x2: x[1], residual });
            }
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf(s: &str) -> ScalarField {
        ScalarField::parse(s).unwrap()
    }

    fn unit_box() -> Domain {
        Domain::new([-1.0, 1.0, -1.0, 1.0], vec![]).unwrap()
    }

    #[test]
    fn rotation_polynomial() {
        let d = build_structure(FieldSource::Polynomial(vec![[0.0, 0.0], [0.0, 1.0]]), sf("x1^2 + x2^2"), unit_box())
            .unwrap();
        for x in [[0.3, -0.7], [0.9, 0.1]] {
            assert_eq!(d.u.value(x).unwrap(), -x[1]);
            assert_eq!(d.v.value(x).unwrap(), x[0]);
            assert_eq!(structure_residuals(&d, x).unwrap(), [0.0; 3]);
        }
    }

    #[test]
    fn cubic_polynomial_parts() {
        let (u, v) = polynomial_parts(&[[0.5, -1.0], [0.0, 0.0], [2.0, 0.3], [-1.0, 0.7]]);
        let (x, y) = (0.4, -0.9);
        let z2 = (x * x - y * y, 2.0 * x * y);
        let z3 = (z2.0 * x - z2.1 * y, z2.0 * y + z2.1 * x);
        let re = 0.5 + (2.0 * z2.0 - 0.3 * z2.1) + (-z3.0 - 0.7 * z3.1);
        let im = -1.0 + (2.0 * z2.1 + 0.3 * z2.0) + (-z3.1 + 0.7 * z3.0);
        assert!((u.value([x, y]).unwrap() - re).abs() < 1e-14);
        assert!((v.value([x, y]).unwrap() - im).abs() < 1e-14);
    }

    #[test]
    fn constant_triple() {
        let src = FieldSource::Expressions { u: sf("1"), v: sf("0") };
        assert!(build_structure(src, sf("0.3"), unit_box()).is_ok());
    }

    #[test]
    fn flow_condition_violation() {
        let src = FieldSource::Expressions { u: sf("-x2"), v: sf("x1") };
        let err = build_structure(src, sf("x1"), unit_box()).unwrap_err();
        assert!(matches!(err, Error::StructureViolation { equation: "u*B_1 + v*B_2 = 0", .. }), "{err}");
    }

    #[test]
    fn cauchy_riemann_violation() {
        let src = FieldSource::Expressions { u: sf("x1"), v: sf("-x2") };
        let err = build_structure(src, sf("1"), unit_box()).unwrap_err();
        assert!(matches!(err, Error::StructureViolation { equation: "u_1 = v_2", .. }));
    }

    #[test]
    fn annulus_membership() {
        let d = Domain::annulus(0.1, 0.9).unwrap();
        assert!(!d.contains([0.0, 0.0]));
        assert!(d.contains([0.5, 0.0]));
        assert!(!d.contains([0.8, 0.8]));
        assert_eq!(d.grid(1, 1), vec![[0.0, 0.0]]);
    }
}
