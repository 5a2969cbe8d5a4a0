//! Riemannian and one-form machinery for `(α, β)` pairs in two dimensions.
//!
//! For `α = sqrt(a_ij y^i y^j)` and `β = b_i y^i` we work with the covariant
//! derivative `b_{i|j}` (Levi-Civita connection of `α`) and the usual
//! decomposition
//!
//! ```text
//! r_ij = ½ (b_{i|j} + b_{j|i})     s_ij = ½ (b_{i|j} − b_{j|i})
//! r^i_j = a^{ik} r_kj              s^i_j = a^{ik} s_kj
//! q_ij = r_im s^m_j                t_ij = s_im s^m_j
//! r_j = b^i r_ij   s_j = b^i s_ij  q_j = b^i q_ij   t_j = b^i t_ij
//! ```
//!
//! Index `0` means contraction with `y` (`T_{i0} = T_ij y^j`). Curvature of
//! `α` uses the convention in which, in two dimensions,
//! `R̄_{jmik} = λ (a_jk a_mi − a_ij a_mk)` with `λ` the Gauss curvature.

use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::family::FamilyParams;
use crate::geometry::check_det;
use crate::jet::{Jet, JetSpace, Var};
use crate::residual::normalized;

pub type Mat2 = [[f64; 2]; 2];
pub type Tensor3 = [[[f64; 2]; 2]; 2];
pub type Tensor4 = [[[[f64; 2]; 2]; 2]; 2];

fn x_jets(space: &JetSpace, x: [f64; 2]) -> [Jet; 2] {
    [Jet::variable(space, Var::X1, x[0]), Jet::variable(space, Var::X2, x[1])]
}

/// Space used for all field jets in this module.
pub fn field_space() -> JetSpace {
    JetSpace::new(2, 0)
}

fn order1() -> JetSpace {
    JetSpace::new(1, 0)
}

fn jet_inverse(a: &[[Jet; 2]; 2]) -> Result<[[Jet; 2]; 2]> {
    let det = &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0]);
    let inv = det.recip()?;
    Ok([
        [&a[1][1] * &inv, -(&a[0][1] * &inv)],
        [-(&a[1][0] * &inv), &a[0][0] * &inv],
    ])
}

/// A Riemannian metric `a_ij(x)` known to second order at a point, with its
/// connection and curvature.
#[derive(Debug, Clone)]
pub struct RiemannData {
    /// `a_ij` as second-order jets.
    a2: [[Jet; 2]; 2],
    /// `Γ^i_jk` to first order.
    gamma: [[[Jet; 2]; 2]; 2],
    pub a: Mat2,
    pub a_inv: Mat2,
    pub christoffel: Tensor3,
    /// `R̄_{jmik}`, all indices lowered.
    pub curvature: Tensor4,
    /// `R̄ic_ik`.
    pub ricci: Mat2,
    /// Gauss curvature.
    pub lambda: f64,
}

impl RiemannData {
    /// From jets of `a_ij` with x-order at least 2.
    pub fn new(a: [[Jet; 2]; 2]) -> Result<Self> {
        if a[0][0].space().x_order() < 2 {
            return Err(Error::OrderExceeded("metric jets need x_order >= 2".into()));
        }
        let sp2 = field_space();
        let a2: [[Jet; 2]; 2] = [
            [a[0][0].truncate(&sp2)?, a[0][1].truncate(&sp2)?],
            [a[1][0].truncate(&sp2)?, a[1][1].truncate(&sp2)?],
        ];
        let av = [[a2[0][0].value(), a2[0][1].value()], [a2[1][0].value(), a2[1][1].value()]];
        if (av[0][1] - av[1][0]).abs() > 1e-12 * (1.0 + av[0][1].abs()) {
            return Err(Error::Domain("metric is not symmetric".into()));
        }
        let det = check_det(&av)?;
        if av[0][0] <= 0.0 {
            return Err(Error::SingularMetric { det });
        }
        let sp1 = order1();
        let a1: [[Jet; 2]; 2] = [
            [a2[0][0].truncate(&sp1)?, a2[0][1].truncate(&sp1)?],
            [a2[1][0].truncate(&sp1)?, a2[1][1].truncate(&sp1)?],
        ];
        let ainv1 = jet_inverse(&a1)?;
        // da[k][i][j] = ∂_k a_ij
        let mut da: Vec<Vec<Vec<Jet>>> = Vec::with_capacity(2);
        for k in 0..2 {
            let mut m = Vec::with_capacity(2);
            for row in &a2 {
                m.push(vec![row[0].derivative(Var::x(k))?, row[1].derivative(Var::x(k))?]);
            }
            da.push(m);
        }
        let gamma: [[[Jet; 2]; 2]; 2] = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                std::array::from_fn(|k| {
                    let mut acc = Jet::zero(&sp1);
                    for l in 0..2 {
                        let t = &(&da[j][l][k] + &da[k][l][j]) - &da[l][j][k];
                        acc = acc + &ainv1[i][l] * &t;
                    }
                    acc.scale(0.5)
                })
            })
        });
        let gv = gamma.clone().map(|m| m.map(|r| r.map(|j| j.value())));
        let dg = |i: usize, j: usize, k: usize, m: usize| -> Result<f64> {
            let mut idx = [0; 4];
            idx[m] = 1;
            gamma[i][j][k].partial(idx)
        };
        // R^ρ_{σμν} = ∂_μ Γ^ρ_{νσ} − ∂_ν Γ^ρ_{μσ} + Γ^ρ_{μλ} Γ^λ_{νσ} − Γ^ρ_{νλ} Γ^λ_{μσ}
        let mut up = [[[[0.0; 2]; 2]; 2]; 2];
        for rho in 0..2 {
            for sig in 0..2 {
                for mu in 0..2 {
                    for nu in 0..2 {
                        let mut v = dg(rho, nu, sig, mu)? - dg(rho, mu, sig, nu)?;
                        for lam in 0..2 {
                            v += gv[rho][mu][lam] * gv[lam][nu][sig] - gv[rho][nu][lam] * gv[lam][mu][sig];
                        }
                        up[rho][sig][mu][nu] = v;
                    }
                }
            }
        }
        let mut low = [[[[0.0; 2]; 2]; 2]; 2];
        for rho in 0..2 {
            for sig in 0..2 {
                for mu in 0..2 {
                    for nu in 0..2 {
                        low[rho][sig][mu][nu] = (0..2).map(|k| av[rho][k] * up[k][sig][mu][nu]).sum();
                    }
                }
            }
        }
        // R̄_{jmik} = R_{jmki} in the convention above
        let mut curvature = [[[[0.0; 2]; 2]; 2]; 2];
        for j in 0..2 {
            for m in 0..2 {
                for i in 0..2 {
                    for k in 0..2 {
                        curvature[j][m][i][k] = low[j][m][k][i];
                    }
                }
            }
        }
        let mut ricci = [[0.0; 2]; 2];
        for (i, row) in ricci.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = (0..2).map(|rho| up[rho][i][rho][k]).sum();
            }
        }
        let lambda = low[0][1][0][1] / det;
        let a_inv = [[av[1][1] / det, -av[0][1] / det], [-av[1][0] / det, av[0][0] / det]];
        Ok(RiemannData {
            a2,
            gamma,
            a: av,
            a_inv,
            christoffel: gv,
            curvature,
            ricci,
            lambda,
        })
    }

    pub fn metric_jets(&self) -> &[[Jet; 2]; 2] {
        &self.a2
    }

    /// `a_ij = e^{2σ} δ_ij` from a jet of the conformal factor `e^{2σ}`.
    pub fn conformal(e2sigma: &Jet) -> Result<Self> {
        let z = Jet::zero(e2sigma.space());
        Self::new([[e2sigma.clone(), z.clone()], [z, e2sigma.clone()]])
    }

    /// From expression fields (the lower-left entry mirrors `a[0][1]`).
    pub fn from_fields(a: &[[ScalarField; 2]; 2], x: [f64; 2]) -> Result<Self> {
        let xj = x_jets(&field_space(), x);
        let a11 = a[0][0].eval(&xj)?;
        let a12 = a[0][1].eval(&xj)?;
        let a22 = a[1][1].eval(&xj)?;
        Self::new([[a11, a12.clone()], [a12, a22]])
    }

    /// Copy with the curvature tensor and Ricci form scaled by `factor`.
    pub fn with_scaled_curvature(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.curvature = out.curvature.map(|a| a.map(|b| b.map(|c| c.map(|v| v * factor))));
        out.ricci = out.ricci.map(|r| r.map(|v| v * factor));
        out.lambda *= factor;
        out
    }

    pub fn norm_sq(&self, y: [f64; 2]) -> f64 {
        quad(&self.a, y, y)
    }

    /// Max normalized deviation of `R̄` from `λ (a_jk a_mi − a_ij a_mk)`.
    pub fn constant_curvature_residual(&self) -> f64 {
        let a = &self.a;
        let mut worst = 0.0f64;
        for j in 0..2 {
            for m in 0..2 {
                for i in 0..2 {
                    for k in 0..2 {
                        let rhs = self.lambda * (a[j][k] * a[m][i] - a[i][j] * a[m][k]);
                        worst = worst.max(normalized(self.curvature[j][m][i][k], rhs, &[]));
                    }
                }
            }
        }
        worst
    }
}

/// `λ`, `R̄` and `R̄ic` of a metric at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaCurvature {
    pub lambda: f64,
    pub curvature: Tensor4,
    pub ricci: Mat2,
    /// Normalized deviation from the two-dimensional constant-curvature form.
    pub residual: f64,
}

pub fn alpha_curvature(rm: &RiemannData) -> AlphaCurvature {
    AlphaCurvature {
        lambda: rm.lambda,
        curvature: rm.curvature,
        ricci: rm.ricci,
        residual: rm.constant_curvature_residual(),
    }
}

/// A one-form `b_i(x)` known to second order at a point.
#[derive(Debug, Clone)]
pub struct OneFormData {
    b: [Jet; 2],
}

impl OneFormData {
    pub fn new(b: [Jet; 2]) -> Result<Self> {
        if b[0].space().x_order() < 2 {
            return Err(Error::OrderExceeded("one-form jets need x_order >= 2".into()));
        }
        let sp = field_space();
        Ok(OneFormData { b: [b[0].truncate(&sp)?, b[1].truncate(&sp)?] })
    }

    pub fn from_fields(b: &[ScalarField; 2], x: [f64; 2]) -> Result<Self> {
        let xj = x_jets(&field_space(), x);
        Self::new([b[0].eval(&xj)?, b[1].eval(&xj)?])
    }

    pub fn jets(&self) -> &[Jet; 2] {
        &self.b
    }

    pub fn values(&self) -> [f64; 2] {
        [self.b[0].value(), self.b[1].value()]
    }

    /// Jet of `b² = a^{ij} b_i b_j` (second order in x).
    pub fn norm_sq_jet(&self, a: &[[Jet; 2]; 2]) -> Result<Jet> {
        let ainv = jet_inverse(a)?;
        let mut acc = Jet::zero(self.b[0].space());
        for i in 0..2 {
            for j in 0..2 {
                acc = acc + &(&ainv[i][j] * &self.b[i]) * &self.b[j];
            }
        }
        Ok(acc)
    }
}

fn quad(m: &Mat2, u: [f64; 2], v: [f64; 2]) -> f64 {
    (0..2).map(|i| (0..2).map(|j| m[i][j] * u[i] * v[j]).sum::<f64>()).sum()
}

fn mat_vec(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn vec_mat(v: [f64; 2], m: &Mat2) -> [f64; 2] {
    [v[0] * m[0][0] + v[1] * m[1][0], v[0] * m[0][1] + v[1] * m[1][1]]
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn dot(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[0] + u[1] * v[1]
}

/// The pointwise `r/s/q/t` zoo and its covariant-derivative layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ABTensorSet {
    pub a: Mat2,
    pub a_inv: Mat2,
    pub b: [f64; 2],
    pub b_up: [f64; 2],
    /// `b² = a^{ij} b_i b_j`.
    pub b2: f64,
    /// `b_{i|j}`.
    pub db: Mat2,
    pub r: Mat2,
    pub s: Mat2,
    /// `r^i_j`.
    pub r_up: Mat2,
    /// `s^i_j`.
    pub s_up: Mat2,
    pub r_i: [f64; 2],
    pub s_i: [f64; 2],
    pub q: Mat2,
    pub t: Mat2,
    pub q_i: [f64; 2],
    pub t_i: [f64; 2],
    /// `r = b^i r_i`.
    pub r_scalar: f64,
    /// `θ = s_m s^m / b²` (zero when `b² = 0`).
    pub theta: f64,
    /// `b_{i|j|k}`.
    pub ddb: Tensor3,
    /// `r_{ij|k}`.
    pub r_cov: Tensor3,
    /// `s_{ij|k}`.
    pub s_cov: Tensor3,
    /// `r_{i|k}`, covariant derivative of `r_i`.
    pub r_i_cov: Mat2,
    /// `s_{i|k}`.
    pub s_i_cov: Mat2,
}

pub fn ab_tensors(rm: &RiemannData, of: &OneFormData) -> Result<ABTensorSet> {
    let sp1 = order1();
    let b1 = [of.b[0].truncate(&sp1)?, of.b[1].truncate(&sp1)?];
    // b_{i|j} as first-order jets
    let mut dbj: Vec<Vec<Jet>> = Vec::with_capacity(2);
    for i in 0..2 {
        let mut row = Vec::with_capacity(2);
        for j in 0..2 {
            let mut v = of.b[i].derivative(Var::x(j))?;
            for (l, bl) in b1.iter().enumerate() {
                v = v - &rm.gamma[l][i][j] * bl;
            }
            row.push(v);
        }
        dbj.push(row);
    }
    let g = &rm.christoffel;
    let db: Mat2 = std::array::from_fn(|i| std::array::from_fn(|j| dbj[i][j].value()));
    let mut ddb = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let mut idx = [0; 4];
                idx[k] = 1;
                let mut v = dbj[i][j].partial(idx)?;
                for l in 0..2 {
                    v -= g[l][i][k] * db[l][j] + g[l][j][k] * db[i][l];
                }
                ddb[i][j][k] = v;
            }
        }
    }
    let a = rm.a;
    let ai = rm.a_inv;
    let b = of.values();
    let b_up = mat_vec(&ai, b);
    let b2 = dot(b, b_up);
    let r: Mat2 = std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (db[i][j] + db[j][i])));
    let s: Mat2 = std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (db[i][j] - db[j][i])));
    let r_up = mat_mul(&ai, &r);
    let s_up = mat_mul(&ai, &s);
    let r_i = vec_mat(b_up, &r);
    let s_i = vec_mat(b_up, &s);
    let q = mat_mul(&r, &s_up);
    let t = mat_mul(&s, &s_up);
    let q_i = vec_mat(b_up, &q);
    let t_i = vec_mat(b_up, &t);
    let r_scalar = dot(b_up, r_i);
    let s_norm = quad(&ai, s_i, s_i);
    let theta = if b2 > 0.0 { s_norm / b2 } else { 0.0 };
    let mut r_cov = [[[0.0; 2]; 2]; 2];
    let mut s_cov = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                r_cov[i][j][k] = 0.5 * (ddb[i][j][k] + ddb[j][i][k]);
                s_cov[i][j][k] = 0.5 * (ddb[i][j][k] - ddb[j][i][k]);
            }
        }
    }
    // b^i_{|k} = a^{il} b_{l|k}
    let db_up = mat_mul(&ai, &db);
    let mut r_i_cov = [[0.0; 2]; 2];
    let mut s_i_cov = [[0.0; 2]; 2];
    for j in 0..2 {
        for k in 0..2 {
            let mut rv = 0.0;
            let mut sv = 0.0;
            for i in 0..2 {
                rv += db_up[i][k] * r[i][j] + b_up[i] * r_cov[i][j][k];
                sv += db_up[i][k] * s[i][j] + b_up[i] * s_cov[i][j][k];
            }
            r_i_cov[j][k] = rv;
            s_i_cov[j][k] = sv;
        }
    }
    Ok(ABTensorSet {
        a,
        a_inv: ai,
        b,
        b_up,
        b2,
        db,
        r,
        s,
        r_up,
        s_up,
        r_i,
        s_i,
        q,
        t,
        q_i,
        t_i,
        r_scalar,
        theta,
        ddb,
        r_cov,
        s_cov,
        r_i_cov,
        s_i_cov,
    })
}

impl ABTensorSet {
    pub fn alpha_sq(&self, y: [f64; 2]) -> f64 {
        quad(&self.a, y, y)
    }

    pub fn beta(&self, y: [f64; 2]) -> f64 {
        dot(self.b, y)
    }

    /// `s_m s^m`.
    pub fn s_norm_sq(&self) -> f64 {
        quad(&self.a_inv, self.s_i, self.s_i)
    }

    /// `s_0 = s_i y^i`.
    pub fn s0(&self, y: [f64; 2]) -> f64 {
        dot(self.s_i, y)
    }

    pub fn t00(&self, y: [f64; 2]) -> f64 {
        quad(&self.t, y, y)
    }

    pub fn q00(&self, y: [f64; 2]) -> f64 {
        quad(&self.q, y, y)
    }

    /// `s^m_{|m} = a^{mk} s_{m|k}`.
    pub fn s_divergence(&self) -> f64 {
        trace_with(&self.a_inv, &self.s_i_cov)
    }

    /// `r^m_{|m} = a^{mk} r_{m|k}`.
    pub fn r_divergence(&self) -> f64 {
        trace_with(&self.a_inv, &self.r_i_cov)
    }

    /// `s^m_{0|m} = a^{mk} s_{mj|k} y^j`.
    pub fn s_trace_derivative(&self, y: [f64; 2]) -> f64 {
        let mut v = 0.0;
        for m in 0..2 {
            for k in 0..2 {
                for j in 0..2 {
                    v += self.a_inv[m][k] * self.s_cov[m][j][k] * y[j];
                }
            }
        }
        v
    }

    /// `b^k s_{0|k} = b^k s_{j|k} y^j`.
    pub fn b_s0k(&self, y: [f64; 2]) -> f64 {
        quad(&self.s_i_cov, y, self.b_up)
    }

    /// `s_{0|0} = s_{j|k} y^j y^k`.
    pub fn s00_derivative(&self, y: [f64; 2]) -> f64 {
        quad(&self.s_i_cov, y, y)
    }

    /// `b^m (r_{m0|0} − r_{00|m})`.
    pub fn b_r_difference(&self, y: [f64; 2]) -> f64 {
        let mut v = 0.0;
        for m in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    v += self.b_up[m] * (self.r_cov[m][i][j] - self.r_cov[i][j][m]) * y[i] * y[j];
                }
            }
        }
        v
    }
}

fn trace_with(ainv: &Mat2, m: &Mat2) -> f64 {
    (0..2).map(|i| (0..2).map(|k| ainv[i][k] * m[i][k]).sum::<f64>()).sum()
}

/// Normalized residuals of the four Ricci identities at direction `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciIdentityResiduals {
    /// `s_{ij|k} = r_{ik|j} − r_{jk|i} − b^l R̄_{klij}` (max over `i, j, k`).
    pub s_cov: f64,
    /// `s^k_{0|k} = r^k_{k|0} − r^k_{0|k} + b^l R̄ic_{l0}`.
    pub s_trace: f64,
    /// `b^k s_{0|k} = r_k s^k_0 − t_0 + b^k b^l r_{kl|0} − b^k b^l r_{k0|l}`.
    pub b_s0k: f64,
    /// `s^k_{|k} = r^k_{|k} − t^k_k − r^i_j r^j_i − b^i r^k_{k|i} − b^k b^i R̄ic_ik`.
    pub s_div: f64,
}

impl RicciIdentityResiduals {
    pub fn max(&self) -> f64 {
        self.s_cov.max(self.s_trace).max(self.b_s0k).max(self.s_div)
    }
}

pub fn ricci_identity_residuals(rm: &RiemannData, of: &OneFormData, y: [f64; 2]) -> Result<RicciIdentityResiduals> {
    let t = ab_tensors(rm, of)?;
    Ok(ricci_identities_from(&t, rm, y))
}

/// Same as [`ricci_identity_residuals`] but with curvature taken from `rm`
/// while the tensors come from `t`; used to probe sensitivity.
pub fn ricci_identities_from(t: &ABTensorSet, rm: &RiemannData, y: [f64; 2]) -> RicciIdentityResiduals {
    let bu = t.b_up;
    let ai = t.a_inv;
    let rb = &rm.curvature;
    let ric = &rm.ricci;

    let mut first = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let curv: f64 = (0..2).map(|l| bu[l] * rb[k][l][i][j]).sum();
                let lhs = t.s_cov[i][j][k];
                let rhs = t.r_cov[i][k][j] - t.r_cov[j][k][i] - curv;
                first = first.max(normalized(lhs, rhs, &[t.r_cov[i][k][j], t.r_cov[j][k][i], curv]));
            }
        }
    }

    let lhs2 = t.s_trace_derivative(y);
    let mut rkk0 = 0.0;
    let mut rk0k = 0.0;
    for k in 0..2 {
        for m in 0..2 {
            for j in 0..2 {
                rkk0 += ai[k][m] * t.r_cov[m][k][j] * y[j];
                rk0k += ai[k][m] * t.r_cov[m][j][k] * y[j];
            }
        }
    }
    let bric0 = quad(ric, bu, y);
    let second = normalized(lhs2, rkk0 - rk0k + bric0, &[rkk0, rk0k, bric0]);

    let lhs3 = t.b_s0k(y);
    let rks = dot(t.r_i, mat_vec(&t.s_up, y));
    let t0 = dot(t.t_i, y);
    let mut bbr_kl0 = 0.0;
    let mut bbr_k0l = 0.0;
    for k in 0..2 {
        for l in 0..2 {
            for j in 0..2 {
                bbr_kl0 += bu[k] * bu[l] * t.r_cov[k][l][j] * y[j];
                bbr_k0l += bu[k] * bu[l] * t.r_cov[k][j][l] * y[j];
            }
        }
    }
    let third = normalized(lhs3, rks - t0 + bbr_kl0 - bbr_k0l, &[rks, t0, bbr_kl0, bbr_k0l]);

    let lhs4 = t.s_divergence();
    let r_div = t.r_divergence();
    let t_tr = trace_with(&ai, &t.t);
    let rr: f64 = (0..2).map(|i| (0..2).map(|j| t.r_up[i][j] * t.r_up[j][i]).sum::<f64>()).sum();
    let mut b_rkki = 0.0;
    for i in 0..2 {
        for k in 0..2 {
            for m in 0..2 {
                b_rkki += bu[i] * ai[k][m] * t.r_cov[m][k][i];
            }
        }
    }
    let bbric = quad(ric, bu, bu);
    let fourth = normalized(lhs4, r_div - t_tr - rr - b_rkki - bbric, &[r_div, t_tr, rr, b_rkki, bbric]);

    RicciIdentityResiduals { s_cov: first, s_trace: second, b_s0k: third, s_div: fourth }
}

/// `θ` and the residuals of the two-dimensional identities
/// `s_0² = θ (b²α² − β²)`, `t_00 = −θ α²`,
/// `s_ij = (b_i s_j − b_j s_i)/b²` and `t_00 = −(s_m s^m β² + b² s_0²)/b⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaDecomposition {
    pub theta: f64,
    pub s0_sq: f64,
    pub t00: f64,
    pub closure: f64,
    pub t00_expanded: f64,
}

impl ThetaDecomposition {
    pub fn max_residual(&self) -> f64 {
        self.s0_sq.max(self.t00).max(self.closure).max(self.t00_expanded)
    }
}

pub fn theta_decomposition(rm: &RiemannData, of: &OneFormData, y: [f64; 2]) -> Result<ThetaDecomposition> {
    let t = ab_tensors(rm, of)?;
    theta_from(&t, y)
}

pub fn theta_from(t: &ABTensorSet, y: [f64; 2]) -> Result<ThetaDecomposition> {
    if t.b2 <= 1e-10 {
        return Err(Error::DegenerateForm(t.b2));
    }
    let theta = t.theta;
    let b2 = t.b2;
    let al2 = t.alpha_sq(y);
    let be = t.beta(y);
    let s0 = t.s0(y);
    let t00 = t.t00(y);
    let ss = t.s_norm_sq();
    let s0_sq = normalized(s0 * s0, theta * (b2 * al2 - be * be), &[theta * b2 * al2, theta * be * be]);
    let t00_res = normalized(t00, -theta * al2, &[]);
    let mut closure = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let rhs = (t.b[i] * t.s_i[j] - t.b[j] * t.s_i[i]) / b2;
            closure = closure.max(normalized(t.s[i][j], rhs, &[]));
        }
    }
    let t00_expanded = normalized(t00, -(ss * be * be + b2 * s0 * s0) / (b2 * b2), &[]);
    Ok(ThetaDecomposition { theta, s0_sq, t00: t00_res, closure, t00_expanded })
}

/// `(3k1 + k2 + 4 k1 k2 b²) / (4 + (k1 + 3k2) b²)`.
pub fn r00_coefficient(params: &FamilyParams, b2: f64) -> Result<f64> {
    let (k1, k2) = (params.k1(), params.k2());
    let den = 4.0 + (k1 + 3.0 * k2) * b2;
    if den.abs() <= 1e-12 {
        return Err(Error::DegenerateDenominator(format!("4 + (k1 + 3k2) b² = {den:e}")));
    }
    Ok((3.0 * k1 + k2 + 4.0 * k1 * k2 * b2) / den)
}

/// Max normalized deviation of `r_ij` from `c(b²) (b_i s_j + b_j s_i)`.
pub fn r00_residual(rm: &RiemannData, of: &OneFormData, params: &FamilyParams) -> Result<f64> {
    let t = ab_tensors(rm, of)?;
    r00_from(&t, params)
}

pub fn r00_from(t: &ABTensorSet, params: &FamilyParams) -> Result<f64> {
    let c = r00_coefficient(params, t.b2)?;
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let rhs = c * (t.b[i] * t.s_i[j] + t.b[j] * t.s_i[i]);
            worst = worst.max(normalized(t.r[i][j], rhs, &[t.db[i][j], t.db[j][i]]));
        }
    }
    Ok(worst)
}

/// Outcome of the conformal one-form test for `a = e^{2σ} δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalKillingCheck {
    /// `max(|∂W¹/∂x² + ∂W²/∂x¹|, |∂W¹/∂x¹ − ∂W²/∂x²|)`.
    pub conditions_residual: f64,
    /// `c = −½ (∂W¹/∂x¹ + W^r σ_r)`.
    pub c: f64,
    /// Normalized residual of `W_{0|0} = −2c α²`.
    pub covderiv_residual: f64,
}

/// Tests whether `W_i y^i` (with `W^i` given as fields) is a conformal
/// one-form of `α = e^{σ} |y|` at `x`, direction `y`.
pub fn conformal_killing_check(
    sigma: &ScalarField,
    w: [&ScalarField; 2],
    x: [f64; 2],
    y: [f64; 2],
) -> Result<ConformalKillingCheck> {
    let sp = field_space();
    let xj = x_jets(&sp, x);
    let sj = sigma.eval(&xj)?;
    let wj = [w[0].eval(&xj)?, w[1].eval(&xj)?];
    let d = |j: &Jet, k: usize| {
        let mut idx = [0; 4];
        idx[k] = 1;
        j.partial(idx)
    };
    let w11 = d(&wj[0], 0)?;
    let w12 = d(&wj[0], 1)?;
    let w21 = d(&wj[1], 0)?;
    let w22 = d(&wj[1], 1)?;
    let conditions_residual = (w12 + w21).abs().max((w11 - w22).abs());
    let c = -0.5 * (w11 + wj[0].value() * d(&sj, 0)? + wj[1].value() * d(&sj, 1)?);

    let e2s = sj.scale(2.0).exp();
    let rm = RiemannData::conformal(&e2s)?;
    // lower W with a and differentiate covariantly
    let w_low = OneFormData::new([&e2s * &wj[0], &e2s * &wj[1]])?;
    let t = ab_tensors(&rm, &w_low)?;
    let w00 = quad(&t.db, y, y);
    let rhs = -2.0 * c * rm.norm_sq(y);
    Ok(ConformalKillingCheck {
        conditions_residual,
        c,
        covderiv_residual: normalized(w00, rhs, &[]),
    })
}
