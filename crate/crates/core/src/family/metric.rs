use super::{FamilyParams, StructureData, DOMAIN_MARGIN};
use crate::ab::{OneFormData, RiemannData};
use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::geometry::FinslerFunction;
use crate::jet::{Jet, JetSpace, Var};

/// A conformally flat `α = e^{σ} |y|` together with `β = b_i y^i`.
pub trait AlphaBetaFields: Sync {
    /// `(e^{2σ}, [b_1, b_2])` on seeded coordinate jets.
    fn fields(&self, x: &[Jet; 2]) -> Result<(Jet, [Jet; 2])>;

    /// Whether `x` is a regular point (margins included).
    fn admissible(&self, x: [f64; 2]) -> bool;

    /// `α` and `β` at `x` as second-order jets.
    fn pair(&self, x: [f64; 2]) -> Result<(RiemannData, OneFormData)> {
        if !self.admissible(x) {
            return Err(Error::Domain(format!("x={x:?} outside the admissible domain")));
        }
        let sp = JetSpace::new(2, 0);
        let xj = [Jet::variable(&sp, Var::X1, x[0]), Jet::variable(&sp, Var::X2, x[1])];
        let (e2s, b) = self.fields(&xj)?;
        Ok((RiemannData::conformal(&e2s)?, OneFormData::new(b)?))
    }
}

/// The pair built from a structure triple:
///
/// ```text
/// e^{2σ} = B / ((u² + v²)(1 + k1 B)^{3/2}(1 + k2 B)^{1/2})
/// b_i    = B (u, v)_i / ((u² + v²)(1 + k1 B)^{3/4}(1 + k2 B)^{1/4})
/// ```
///
/// so that `‖β‖²_α = B`.
#[derive(Debug, Clone)]
pub struct FamilyFields {
    pub params: FamilyParams,
    pub structure: StructureData,
}

impl FamilyFields {
    pub fn new(params: FamilyParams, structure: StructureData) -> Self {
        FamilyFields { params, structure }
    }
}

impl AlphaBetaFields for FamilyFields {
    fn fields(&self, x: &[Jet; 2]) -> Result<(Jet, [Jet; 2])> {
        let (b, u, v) = self.structure.jets(x)?;
        let (k1, k2) = (self.params.k1(), self.params.k2());
        let p = &b.scale(k1) + 1.0;
        let q = &b.scale(k2) + 1.0;
        let uv = &(&u * &u) + &(&v * &v);
        let e2s = b.div(&(&(&uv * &p.powf(1.5)?) * &q.sqrt()?))?;
        let factor = b.div(&(&(&uv * &p.powf(0.75)?) * &q.powf(0.25)?))?;
        Ok((e2s, [&factor * &u, &factor * &v]))
    }

    fn admissible(&self, x: [f64; 2]) -> bool {
        if !self.structure.domain.contains(x) {
            return false;
        }
        let (Ok(b), Ok(u), Ok(v)) = (self.structure.b.value(x), self.structure.u.value(x), self.structure.v.value(x))
        else {
            return false;
        };
        b > DOMAIN_MARGIN
            && u * u + v * v > DOMAIN_MARGIN
            && 1.0 + self.params.k1() * b > DOMAIN_MARGIN
            && 1.0 + self.params.k2() * b > DOMAIN_MARGIN
    }
}

/// `e^{2σ}` and `b_i` given directly; used for probes outside the family.
#[derive(Debug, Clone)]
pub struct ExplicitFields {
    pub params: FamilyParams,
    pub sigma: ScalarField,
    pub b: [ScalarField; 2],
}

impl AlphaBetaFields for ExplicitFields {
    fn fields(&self, x: &[Jet; 2]) -> Result<(Jet, [Jet; 2])> {
        let e2s = self.sigma.eval(x)?.scale(2.0).exp();
        Ok((e2s, [self.b[0].eval(x)?, self.b[1].eval(x)?]))
    }

    fn admissible(&self, x: [f64; 2]) -> bool {
        let (Ok(s), Ok(b1), Ok(b2)) = (self.sigma.value(x), self.b[0].value(x), self.b[1].value(x)) else {
            return false;
        };
        let b2norm = (-2.0 * s).exp() * (b1 * b1 + b2 * b2);
        b2norm.is_finite() && 1.0 + self.params.k1() * b2norm > DOMAIN_MARGIN
    }
}

/// `F = α φ(β/α)`.
#[derive(Debug, Clone)]
pub struct AlphaBetaMetric<T> {
    pub params: FamilyParams,
    pub fields: T,
}

impl<T: AlphaBetaFields> AlphaBetaMetric<T> {
    pub fn new(params: FamilyParams, fields: T) -> Self {
        AlphaBetaMetric { params, fields }
    }
}

impl<T: AlphaBetaFields> FinslerFunction for AlphaBetaMetric<T> {
    fn eval(&self, x: &[Jet; 2], y: &[Jet; 2]) -> Result<Jet> {
        let (e2s, b) = self.fields.fields(x)?;
        let alpha = (&e2s * &(&(&y[0] * &y[0]) + &(&y[1] * &y[1]))).sqrt()?;
        let beta = &(&b[0] * &y[0]) + &(&b[1] * &y[1]);
        let s = beta.div(&alpha)?;
        Ok(&alpha * &self.params.phi_jet(&s)?)
    }

    fn admissible(&self, x: [f64; 2], y: [f64; 2]) -> bool {
        y != [0.0, 0.0] && self.fields.admissible(x)
    }
}

/// `F` for a structure triple.
pub fn assemble_finsler(p: FamilyParams, d: StructureData) -> AlphaBetaMetric<FamilyFields> {
    AlphaBetaMetric::new(p, FamilyFields::new(p, d))
}

/// `(α, β)` of a structure triple at `x`.
pub fn construct_alpha_beta(p: FamilyParams, d: &StructureData, x: [f64; 2]) -> Result<(RiemannData, OneFormData)> {
    FamilyFields::new(p, d.clone()).pair(x)
}

#[cfg(test)]
mod tests {
    use super::super::{Domain, Sign};
    use super::*;

    fn sf(s: &str) -> ScalarField {
        ScalarField::parse(s).unwrap()
    }

    fn example(k1: f64, k2: f64) -> (FamilyParams, StructureData) {
        let p = FamilyParams::new(k1, k2, Sign::Plus).unwrap();
        let d = StructureData::new(sf("-x2"), sf("x1"), sf("x1^2 + x2^2"), Domain::annulus(0.1, 0.9).unwrap());
        (p, d)
    }

    #[test]
    fn norm_of_beta_is_b() {
        let (p, d) = example(-1.0, 0.0);
        let (rm, of) = construct_alpha_beta(p, &d, [0.5, 0.0]).unwrap();
        let b = of.values();
        let b2 = (b[0] * b[0] + b[1] * b[1]) / rm.a[0][0];
        assert!((b2 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn square_root_metric() {
        let (p, d) = example(-1.0, 0.0);
        let f = assemble_finsler(p, d);
        let x = [0.3, -0.4];
        let y = [0.7, 0.2];
        let (rm, of) = f.fields.pair(x).unwrap();
        let alpha = rm.norm_sq(y).sqrt();
        let beta = of.values()[0] * y[0] + of.values()[1] * y[1];
        let expected = (alpha * (alpha + beta)).sqrt();
        assert!((f.value(x, y).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn degenerate_loci_are_inadmissible() {
        let (p, d) = example(-1.0, 0.0);
        let fields = FamilyFields::new(p, d.clone());
        assert!(!fields.admissible([0.0, 0.0]));
        let whole = StructureData { domain: Domain::new([-2.0, 2.0, -2.0, 2.0], vec![]).unwrap(), ..d };
        let fields = FamilyFields::new(p, whole);
        assert!(fields.admissible([0.99, 0.0]));
        assert!(!fields.admissible([1.0, 0.0]));
        assert!(construct_alpha_beta(p, &fields.structure, [1.0, 0.0]).is_err());
    }
}
