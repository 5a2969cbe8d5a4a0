//! Finsler invariants of a metric on a planar domain.
//!
//! Everything is computed from jets of `F²` at a single point `(x, y)`:
//! the fundamental tensor `g_ij = ½ [F²]_{y^i y^j}`, the spray
//!
//! ```text
//! G^i = ¼ g^{il} ( [F²]_{x^k y^l} y^k − [F²]_{x^l} )
//! ```
//!
//! and the Riemann curvature
//!
//! ```text
//! R^i_k = 2 ∂G^i/∂x^k − y^j ∂²G^i/∂x^j∂y^k + 2 G^j ∂²G^i/∂y^j∂y^k − ∂G^i/∂y^j ∂G^j/∂y^k.
//! ```
//!
//! In two dimensions the flag curvature is `K = Ric / F²` with `Ric = R^k_k`.
//! The S-curvature uses the Busemann–Hausdorff volume factor, see
//! [`bh_volume_factor`].

mod metrics;
mod volume;

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace, Var};

pub use metrics::{ConformalRiemannian, Euclidean, QuadraticRiemannian};
pub use volume::{bh_volume_factor, bh_volume_factor_with, QuadratureConfig, VolumeFactor};

pub type Mat2 = [[f64; 2]; 2];

/// A Finsler function `F(x, y)` on a planar domain, evaluable in jet
/// arithmetic.
///
/// `eval` receives coordinate jets for `x` and `y` (all in one space) and
/// must return the jet of `F`. Implementations must be positively
/// 1-homogeneous in `y`.
pub trait FinslerFunction: Sync {
    fn eval(&self, x: &[Jet; 2], y: &[Jet; 2]) -> Result<Jet>;

    /// Whether `(x, y)` lies in the region where `F` is defined and regular.
    fn admissible(&self, _x: [f64; 2], _y: [f64; 2]) -> bool {
        true
    }

    /// Plain value of `F`.
    fn value(&self, x: [f64; 2], y: [f64; 2]) -> Result<f64> {
        let space = JetSpace::new(0, 0);
        let xj = [Jet::constant(&space, x[0]), Jet::constant(&space, x[1])];
        let yj = [Jet::constant(&space, y[0]), Jet::constant(&space, y[1])];
        Ok(self.eval(&xj, &yj)?.value())
    }
}

impl<T: FinslerFunction + ?Sized> FinslerFunction for &T {
    fn eval(&self, x: &[Jet; 2], y: &[Jet; 2]) -> Result<Jet> {
        (**self).eval(x, y)
    }
    fn admissible(&self, x: [f64; 2], y: [f64; 2]) -> bool {
        (**self).admissible(x, y)
    }
}

/// All pointwise invariants at one `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSample {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub f: f64,
    pub g: Mat2,
    pub spray: [f64; 2],
    pub riemann: Mat2,
    pub ricci: f64,
    pub flag: f64,
    pub s: f64,
    pub flag_residual: f64,
}

pub(crate) fn check_point(f: &dyn FinslerFunction, x: [f64; 2], y: [f64; 2]) -> Result<()> {
    if !(x.iter().chain(&y).all(|v| v.is_finite())) {
        return Err(Error::Domain(format!("non-finite point x={x:?} y={y:?}")));
    }
    if y == [0.0, 0.0] {
        return Err(Error::Domain("direction y must be non-zero".into()));
    }
    if !f.admissible(x, y) {
        return Err(Error::Domain(format!("(x={x:?}, y={y:?}) outside the admissible domain")));
    }
    Ok(())
}

/// Jet of `F²` with all four variables active.
fn f_squared(f: &dyn FinslerFunction, space: &JetSpace, x: [f64; 2], y: [f64; 2]) -> Result<Jet> {
    let xj = [Jet::variable(space, Var::X1, x[0]), Jet::variable(space, Var::X2, x[1])];
    let yj = [Jet::variable(space, Var::Y1, y[0]), Jet::variable(space, Var::Y2, y[1])];
    let fj = f.eval(&xj, &yj)?;
    if !(fj.value() > 0.0) {
        return Err(Error::Domain(format!("F = {} is not positive at x={x:?} y={y:?}", fj.value())));
    }
    Ok(&fj * &fj)
}

fn second_y(f2: &Jet, i: usize, j: usize) -> Result<Jet> {
    f2.derivative(Var::y(i))?.derivative(Var::y(j))
}

pub(crate) fn check_det(g: &Mat2) -> Result<f64> {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let scale = g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(det > 1e-12 * scale * scale) || !det.is_finite() {
        return Err(Error::SingularMetric { det });
    }
    Ok(det)
}

/// Spray coefficients as jets, from `F²` given in a space of orders
/// `(X, Y)` with `X >= 1`, `Y >= 2`. The result lives in `(X − 1, Y − 2)`.
fn spray_jets(f2: &Jet, y: [f64; 2]) -> Result<[Jet; 2]> {
    let (xo, yo) = f2.space().orders();
    if xo < 1 || yo < 2 {
        return Err(Error::OrderExceeded(format!("spray needs x_order >= 1, y_order >= 2, got ({xo}, {yo})")));
    }
    let target = JetSpace::new(xo - 1, yo - 2);
    let t = |j: Jet| j.truncate(&target);

    let g11 = t(second_y(f2, 0, 0)?.scale(0.5))?;
    let g12 = t(second_y(f2, 0, 1)?.scale(0.5))?;
    let g22 = t(second_y(f2, 1, 1)?.scale(0.5))?;
    check_det(&[[g11.value(), g12.value()], [g12.value(), g22.value()]])?;
    let det = &(&g11 * &g22) - &(&g12 * &g12);
    let inv_det = det.recip()?;
    let ginv = [
        [&g22 * &inv_det, -(&g12 * &inv_det)],
        [-(&g12 * &inv_det), &g11 * &inv_det],
    ];

    let yj = [Jet::variable(&target, Var::Y1, y[0]), Jet::variable(&target, Var::Y2, y[1])];
    let mut w: [Jet; 2] = [Jet::zero(&target), Jet::zero(&target)];
    for (l, wl) in w.iter_mut().enumerate() {
        let dxl = t(f2.derivative(Var::x(l))?)?;
        let mut acc = -dxl;
        let dyl = f2.derivative(Var::y(l))?;
        for (k, yk) in yj.iter().enumerate() {
            let mixed = t(dyl.derivative(Var::x(k))?)?;
            acc = acc + &mixed * yk;
        }
        *wl = acc;
    }
    let g = |i: usize| (&(&ginv[i][0] * &w[0]) + &(&ginv[i][1] * &w[1])).scale(0.25);
    Ok([g(0), g(1)])
}

/// `g_ij(x, y)`.
pub fn fundamental_tensor(f: &dyn FinslerFunction, x: [f64; 2], y: [f64; 2]) -> Result<Mat2> {
    check_point(f, x, y)?;
    let f2 = f_squared(f, &JetSpace::new(0, 2), x, y)?;
    let mut g = [[0.0; 2]; 2];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, gij) in row.iter_mut().enumerate() {
            let mut idx = [0; 4];
            idx[2 + i] += 1;
            idx[2 + j] += 1;
            *gij = 0.5 * f2.partial(idx)?;
        }
    }
    check_det(&g)?;
    Ok(g)
}

/// Spray coefficients `G^i(x, y)`.
pub fn spray_coefficients(f: &dyn FinslerFunction, x: [f64; 2], y: [f64; 2]) -> Result<[f64; 2]> {
    check_point(f, x, y)?;
    let f2 = f_squared(f, &JetSpace::new(1, 2), x, y)?;
    let g = spray_jets(&f2, y)?;
    Ok([g[0].value(), g[1].value()])
}

fn riemann_from_spray(g: &[Jet; 2], y: [f64; 2]) -> Result<Mat2> {
    let d = |i: usize, idx: [usize; 4]| g[i].partial(idx);
    let ex = |k: usize| {
        let mut m = [0; 4];
        m[k] = 1;
        m
    };
    let ey = |k: usize| ex(2 + k);
    let add = |a: [usize; 4], b: [usize; 4]| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
    let gv = [g[0].value(), g[1].value()];
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for k in 0..2 {
            let mut v = 2.0 * d(i, ex(k))?;
            for j in 0..2 {
                v -= y[j] * d(i, add(ex(j), ey(k)))?;
                v += 2.0 * gv[j] * d(i, add(ey(j), ey(k)))?;
                v -= d(i, ey(j))? * d(j, ey(k))?;
            }
            r[i][k] = v;
        }
    }
    Ok(r)
}

/// Riemann curvature `R^i_k` and Ricci scalar `Ric = R^k_k`.
pub fn riemann_curvature(f: &dyn FinslerFunction, x: [f64; 2], y: [f64; 2]) -> Result<(Mat2, f64)> {
    check_point(f, x, y)?;
    let f2 = f_squared(f, &JetSpace::curvature(), x, y)?;
    let g = spray_jets(&f2, y)?;
    let r = riemann_from_spray(&g, y)?;
    Ok((r, r[0][0] + r[1][1]))
}

fn flag_parts(f2: &Jet, r: &Mat2, ric: f64, y: [f64; 2]) -> Result<(f64, f64)> {
    let ff = f2.value();
    let k = ric / ff;
    let mut g = [[0.0; 2]; 2];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, gij) in row.iter_mut().enumerate() {
            let mut idx = [0; 4];
            idx[2 + i] += 1;
            idx[2 + j] += 1;
            *gij = 0.5 * f2.partial(idx)?;
        }
    }
    let y_low = [g[0][0] * y[0] + g[0][1] * y[1], g[1][0] * y[0] + g[1][1] * y[1]];
    let mut res = 0.0f64;
    for i in 0..2 {
        for kk in 0..2 {
            let delta = if i == kk { 1.0 } else { 0.0 };
            let expected = k * (ff * delta - y[i] * y_low[kk]);
            res = res.max((r[i][kk] - expected).abs());
        }
    }
    Ok((k, res))
}

/// Flag curvature `K = Ric/F²` and the max-norm deviation of `R^i_k` from the
/// scalar-flag form `K (F² δ^i_k − y^i y_k)`.
pub fn flag_curvature(f: &dyn FinslerFunction, x: [f64; 2], y: [f64; 2]) -> Result<(f64, f64)> {
    check_point(f, x, y)?;
    let f2 = f_squared(f, &JetSpace::curvature(), x, y)?;
    let g = spray_jets(&f2, y)?;
    let r = riemann_from_spray(&g, y)?;
    flag_parts(&f2, &r, r[0][0] + r[1][1], y)
}

fn s_from_spray(g: &[Jet; 2], y: [f64; 2], vol: &VolumeFactor) -> Result<f64> {
    let div = g[0].partial([0, 0, 1, 0])? + g[1].partial([0, 0, 0, 1])?;
    Ok(div - y[0] * vol.dln_sigma[0] - y[1] * vol.dln_sigma[1])
}

/// S-curvature `∂G^m/∂y^m − y^m ∂_m ln σ_F`.
pub fn s_curvature(f: &dyn FinslerFunction, x: [f64; 2], y: [f64; 2]) -> Result<f64> {
    let vol = bh_volume_factor(f, x)?;
    s_curvature_with(f, x, y, &vol)
}

/// S-curvature with a precomputed volume factor at `x`.
pub fn s_curvature_with(f: &dyn FinslerFunction, x: [f64; 2], y: [f64; 2], vol: &VolumeFactor) -> Result<f64> {
    check_point(f, x, y)?;
    let f2 = f_squared(f, &JetSpace::new(1, 3), x, y)?;
    let g = spray_jets(&f2, y)?;
    s_from_spray(&g, y, vol)
}

/// Every invariant at `(x, y)` from a single jet evaluation of `F²`. The
/// volume factor is computed when not supplied.
pub fn curvature_sample(
    f: &dyn FinslerFunction,
    x: [f64; 2],
    y: [f64; 2],
    vol: Option<&VolumeFactor>,
) -> Result<CurvatureSample> {
    check_point(f, x, y)?;
    let owned;
    let vol = match vol {
        Some(v) => v,
        None => {
            owned = bh_volume_factor(f, x)?;
            &owned
        }
    };
    let f2 = f_squared(f, &JetSpace::curvature(), x, y)?;
    let spray = spray_jets(&f2, y)?;
    let riemann = riemann_from_spray(&spray, y)?;
    let ricci = riemann[0][0] + riemann[1][1];
    let (flag, flag_residual) = flag_parts(&f2, &riemann, ricci, y)?;
    let mut g = [[0.0; 2]; 2];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, gij) in row.iter_mut().enumerate() {
            let mut idx = [0; 4];
            idx[2 + i] += 1;
            idx[2 + j] += 1;
            *gij = 0.5 * f2.partial(idx)?;
        }
    }
    Ok(CurvatureSample {
        x,
        y,
        f: f2.value().sqrt(),
        g,
        spray: [spray[0].value(), spray[1].value()],
        riemann,
        ricci,
        flag,
        s: s_from_spray(&spray, y, vol)?,
        flag_residual,
    })
}
