//! Shared helpers for the integration tests: random test functions with an
//! independent complex-arithmetic evaluator, and random smooth `(α, β)`
//! pairs given as expressions.
#![allow(dead_code)]

use finsler::ab::{OneFormData, RiemannData};
use finsler::expr::ScalarField;
use finsler::jet::{Jet, JetSpace, Var};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random elementary composition in `(x1, x2, y1, y2)`, built so that
/// every intermediate stays away from branch cuts near the base point.
#[derive(Debug, Clone)]
pub enum Comp {
    Var(usize),
    Const(f64),
    Add(Box<Comp>, Box<Comp>),
    Mul(Box<Comp>, Box<Comp>),
    /// `a / (2 + cos b)`
    DivShift(Box<Comp>, Box<Comp>),
    Sin(Box<Comp>),
    Cos(Box<Comp>),
    /// `exp(a / 2)`
    Exp(Box<Comp>),
    /// `log(2 + sin a)`
    LogShift(Box<Comp>),
    /// `sqrt(2 + cos a)`
    SqrtShift(Box<Comp>),
    /// `(1.5 + sin(a)/2)^p`
    PowShift(Box<Comp>, f64),
    Atan(Box<Comp>),
    Asinh(Box<Comp>),
}

impl Comp {
    pub fn random(r: &mut impl Rng, depth: usize) -> Comp {
        if depth == 0 || r.gen_bool(0.2) {
            return if r.gen_bool(0.85) { Comp::Var(r.gen_range(0..4)) } else { Comp::Const(r.gen_range(-1.0..1.0)) };
        }
        let sub = |r: &mut _| Box::new(Comp::random(r, depth - 1));
        match r.gen_range(0..12) {
            0 => Comp::Add(sub(r), sub(r)),
            1 | 2 => Comp::Mul(sub(r), sub(r)),
            3 => Comp::DivShift(sub(r), sub(r)),
            4 => Comp::Sin(sub(r)),
            5 => Comp::Cos(sub(r)),
            6 => Comp::Exp(sub(r)),
            7 => Comp::LogShift(sub(r)),
            8 => Comp::SqrtShift(sub(r)),
            9 => Comp::PowShift(sub(r), r.gen_range(-1.5..2.5)),
            10 => Comp::Atan(sub(r)),
            _ => Comp::Asinh(sub(r)),
        }
    }

    pub fn eval_jet(&self, v: &[Jet; 4]) -> Jet {
        let s = v[0].space();
        match self {
            Comp::Var(i) => v[*i].clone(),
            Comp::Const(c) => Jet::constant(s, *c),
            Comp::Add(a, b) => &a.eval_jet(v) + &b.eval_jet(v),
            Comp::Mul(a, b) => &a.eval_jet(v) * &b.eval_jet(v),
            Comp::DivShift(a, b) => a.eval_jet(v).div(&(&b.eval_jet(v).cos() + 2.0)).unwrap(),
            Comp::Sin(a) => a.eval_jet(v).sin(),
            Comp::Cos(a) => a.eval_jet(v).cos(),
            Comp::Exp(a) => a.eval_jet(v).scale(0.5).exp(),
            Comp::LogShift(a) => (&a.eval_jet(v).sin() + 2.0).ln().unwrap(),
            Comp::SqrtShift(a) => (&a.eval_jet(v).cos() + 2.0).sqrt().unwrap(),
            Comp::PowShift(a, p) => (&a.eval_jet(v).sin().scale(0.5) + 1.5).powf(*p).unwrap(),
            Comp::Atan(a) => a.eval_jet(v).atan(),
            Comp::Asinh(a) => a.eval_jet(v).asinh(),
        }
    }

    pub fn eval_c(&self, v: &[Complex64; 4]) -> Complex64 {
        let two = Complex64::new(2.0, 0.0);
        match self {
            Comp::Var(i) => v[*i],
            Comp::Const(c) => Complex64::new(*c, 0.0),
            Comp::Add(a, b) => a.eval_c(v) + b.eval_c(v),
            Comp::Mul(a, b) => a.eval_c(v) * b.eval_c(v),
            Comp::DivShift(a, b) => a.eval_c(v) / (b.eval_c(v).cos() + two),
            Comp::Sin(a) => a.eval_c(v).sin(),
            Comp::Cos(a) => a.eval_c(v).cos(),
            Comp::Exp(a) => (a.eval_c(v) * 0.5).exp(),
            Comp::LogShift(a) => (a.eval_c(v).sin() + two).ln(),
            Comp::SqrtShift(a) => (a.eval_c(v).cos() + two).sqrt(),
            Comp::PowShift(a, p) => (a.eval_c(v).sin() * 0.5 + 1.5).powf(*p),
            Comp::Atan(a) => a.eval_c(v).atan(),
            Comp::Asinh(a) => a.eval_c(v).asinh(),
        }
    }

    pub fn eval_f(&self, v: [f64; 4]) -> f64 {
        self.eval_c(&v.map(|t| Complex64::new(t, 0.0))).re
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Every partial `∂^α f` stored in `space`, from the Cauchy integral
/// formula: the trapezoid rule on the torus `|z_v − p_v| = r` with `n`
/// nodes per variable, i.e. a four-dimensional DFT of complex values.
pub fn cauchy_partials(f: &Comp, p: [f64; 4], space: &JetSpace, r: f64, n: usize) -> Vec<([usize; 4], f64)> {
    let (xo, yo) = space.orders();
    // A variable whose group has order 0 is held fixed.
    let nodes = |v: usize| if (v < 2 && xo == 0) || (v >= 2 && yo == 0) { 1 } else { n };
    let counts = [nodes(0), nodes(1), nodes(2), nodes(3)];
    let unit: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect();
    let mut values = Vec::with_capacity(counts.iter().product());
    for a in 0..counts[0] {
        for b in 0..counts[1] {
            for c in 0..counts[2] {
                for d in 0..counts[3] {
                    let idx = [a, b, c, d];
                    let z: [Complex64; 4] = std::array::from_fn(|v| {
                        if counts[v] == 1 { Complex64::new(p[v], 0.0) } else { p[v] + unit[idx[v]] * r }
                    });
                    values.push((idx, f.eval_c(&z)));
                }
            }
        }
    }
    let total = values.len() as f64;
    space
        .indices()
        .iter()
        .map(|alpha| {
            let mut sum = Complex64::new(0.0, 0.0);
            for (idx, val) in &values {
                let mut w = Complex64::new(1.0, 0.0);
                for v in 0..4 {
                    if counts[v] > 1 {
                        w *= unit[(n - (idx[v] * alpha[v]) % n) % n];
                    }
                }
                sum += val * w;
            }
            let deg: usize = alpha.iter().sum();
            let coeff = sum.re / total / r.powi(deg as i32);
            (*alpha, coeff * alpha.iter().map(|&k| factorial(k)).product::<f64>())
        })
        .collect()
}

/// `∂f/∂v` by central differences with one Richardson step.
pub fn fd_first(f: &dyn Fn([f64; 4]) -> f64, p: [f64; 4], v: usize, h: f64) -> f64 {
    let d = |h: f64| {
        let (mut a, mut b) = (p, p);
        a[v] += h;
        b[v] -= h;
        (f(a) - f(b)) / (2.0 * h)
    };
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// `∂²f/∂v∂w` by central differences at `h`, `h/2`, `h/4` with two
/// Richardson steps.
pub fn fd_second(f: &dyn Fn([f64; 4]) -> f64, p: [f64; 4], v: usize, w: usize, h: f64) -> f64 {
    let shifted = |dv: f64, dw: f64| {
        let mut q = p;
        q[v] += dv;
        q[w] += dw;
        f(q)
    };
    let d = |h: f64| {
        if v == w {
            (shifted(h, 0.0) - 2.0 * f(p) + shifted(-h, 0.0)) / (h * h)
        } else {
            (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) / (4.0 * h * h)
        }
    };
    let (d1, d2, d4) = (d(h), d(h / 2.0), d(h / 4.0));
    let (r1, r2) = ((4.0 * d2 - d1) / 3.0, (4.0 * d4 - d2) / 3.0);
    (16.0 * r2 - r1) / 15.0
}

/// `|a − b| / max(|b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

/// A random quadratic polynomial in `x1, x2` as expression text.
pub fn random_quadratic(r: &mut impl Rng, scale: f64) -> String {
    let c: [f64; 6] = std::array::from_fn(|_| scale * r.gen_range(-1.0..1.0));
    format!(
        "({:.6}) + ({:.6})*x1 + ({:.6})*x2 + ({:.6})*x1^2 + ({:.6})*x1*x2 + ({:.6})*x2^2",
        c[0], c[1], c[2], c[3], c[4], c[5]
    )
}

/// A random smooth pair: `a = I + 0.1 Q(x)` with `Q` a symmetric matrix of
/// random quadratics, and `b_i` random quadratics with an offset keeping
/// `b` away from zero.
pub struct RandomPair {
    pub a: [[ScalarField; 2]; 2],
    pub b: [ScalarField; 2],
}

impl RandomPair {
    pub fn new(r: &mut impl Rng) -> Self {
        let q00 = random_quadratic(r, 1.0);
        let q01 = random_quadratic(r, 1.0);
        let q11 = random_quadratic(r, 1.0);
        let sf = |s: String| ScalarField::parse(&s).unwrap();
        let a = [
            [sf(format!("1 + 0.1*({q00})")), sf(format!("0.1*({q01})"))],
            [sf(format!("0.1*({q01})")), sf(format!("1 + 0.1*({q11})"))],
        ];
        let off: [f64; 2] = [r.gen_range(0.3..1.0), r.gen_range(-1.0..1.0)];
        let b = [
            sf(format!("{:.6} + {}", off[0], random_quadratic(r, 0.5))),
            sf(format!("{:.6} + {}", off[1], random_quadratic(r, 0.5))),
        ];
        RandomPair { a, b }
    }

    pub fn at(&self, x: [f64; 2]) -> (RiemannData, OneFormData) {
        (RiemannData::from_fields(&self.a, x).unwrap(), OneFormData::from_fields(&self.b, x).unwrap())
    }

    pub fn a_value(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.a[i][j].value(x).unwrap()))
    }

    pub fn b_value(&self, x: [f64; 2]) -> [f64; 2] {
        std::array::from_fn(|i| self.b[i].value(x).unwrap())
    }
}

pub fn random_point(r: &mut impl Rng) -> [f64; 2] {
    [r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5)]
}

pub fn random_unit(r: &mut impl Rng) -> [f64; 2] {
    let t: f64 = r.gen_range(0.0..std::f64::consts::TAU);
    [t.cos(), t.sin()]
}

pub fn seeded_vars(space: &JetSpace, p: [f64; 4]) -> [Jet; 4] {
    finsler::jet::seed_point(space, p, [true; 4])
}

pub fn var_jet(space: &JetSpace, v: usize, value: f64) -> Jet {
    Jet::variable(space, Var::ALL[v], value)
}
