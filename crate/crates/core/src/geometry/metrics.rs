use super::FinslerFunction;
use crate::error::Result;
use crate::expr::ScalarField;
use crate::jet::Jet;

/// `F = |y|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl FinslerFunction for Euclidean {
    fn eval(&self, _x: &[Jet; 2], y: &[Jet; 2]) -> Result<Jet> {
        (&(&y[0] * &y[0]) + &(&y[1] * &y[1])).sqrt()
    }
}

/// `F = e^{σ(x)} |y|`.
#[derive(Debug, Clone)]
pub struct ConformalRiemannian {
    sigma: ScalarField,
}

impl ConformalRiemannian {
    pub fn new(sigma: ScalarField) -> Self {
        ConformalRiemannian { sigma }
    }
}

impl FinslerFunction for ConformalRiemannian {
    fn eval(&self, x: &[Jet; 2], y: &[Jet; 2]) -> Result<Jet> {
        let norm = (&(&y[0] * &y[0]) + &(&y[1] * &y[1])).sqrt()?;
        Ok(&self.sigma.eval(x)?.exp() * &norm)
    }

    fn admissible(&self, x: [f64; 2], _y: [f64; 2]) -> bool {
        self.sigma.value(x).is_ok_and(f64::is_finite)
    }
}

/// `F = sqrt(a_ij(x) y^i y^j)`; the lower-left entry is ignored and taken
/// equal to `a[0][1]`.
#[derive(Debug, Clone)]
pub struct QuadraticRiemannian {
    a: [[ScalarField; 2]; 2],
}

impl QuadraticRiemannian {
    pub fn new(a: [[ScalarField; 2]; 2]) -> Self {
        QuadraticRiemannian { a }
    }
}

impl FinslerFunction for QuadraticRiemannian {
    fn eval(&self, x: &[Jet; 2], y: &[Jet; 2]) -> Result<Jet> {
        let a11 = self.a[0][0].eval(x)?;
        let a12 = self.a[0][1].eval(x)?;
        let a22 = self.a[1][1].eval(x)?;
        let q = &(&(&a11 * &(&y[0] * &y[0])) + &(&a12 * &(&y[0] * &y[1])).scale(2.0)) + &(&a22 * &(&y[1] * &y[1]));
        q.sqrt()
    }
}
