//! Univariate truncated Taylor series.
//!
//! `Series` holds normalized coefficients `c[k] = f^(k)(t0) / k!`. It is the
//! workhorse behind every elementary function on [`Jet`](super::Jet): the
//! function is expanded around the jet's value here, then composed with the
//! jet's nilpotent part.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Series(pub Vec<f64>);

impl Series {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Series(c)
    }

    /// The identity `t0 + t`.
    pub fn variable(t0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = t0;
        if order > 0 {
            c[1] = 1.0;
        }
        Series(c)
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// `k!` times the k-th coefficient.
    pub fn derivative_at(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.0.get(k).copied().unwrap_or(0.0) * fact
    }

    pub fn scale(&self, s: f64) -> Self {
        Series(self.0.iter().map(|c| c * s).collect())
    }

    pub fn recip(&self) -> Self {
        let a = &self.0;
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a[0];
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += a[j] * b[k - j];
            }
            b[k] = -acc / a[0];
        }
        Series(b)
    }

    pub fn div(&self, other: &Series) -> Self {
        self * &other.recip()
    }

    pub fn exp(&self) -> Self {
        let a = &self.0;
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * a[j] * b[k - j];
            }
            b[k] = acc / k as f64;
        }
        Series(b)
    }

    /// Natural logarithm; caller guarantees a positive constant term.
    pub fn ln(&self) -> Self {
        let a = &self.0;
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].ln();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..k {
                acc += j as f64 * b[j] * a[k - j];
            }
            b[k] = (a[k] - acc / k as f64) / a[0];
        }
        Series(b)
    }

    /// Real power; caller guarantees a positive constant term.
    pub fn powf(&self, p: f64) -> Self {
        let a = &self.0;
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].powf(p);
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += (p * j as f64 - (k - j) as f64) * a[j] * b[k - j];
            }
            b[k] = acc / (k as f64 * a[0]);
        }
        Series(b)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let a = &self.0;
        let n = a.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = a[0].sin();
        c[0] = a[0].cos();
        for k in 1..n {
            let mut acc_s = 0.0;
            let mut acc_c = 0.0;
            for j in 1..=k {
                acc_s += j as f64 * a[j] * c[k - j];
                acc_c += j as f64 * a[j] * s[k - j];
            }
            s[k] = acc_s / k as f64;
            c[k] = -acc_c / k as f64;
        }
        (Series(s), Series(c))
    }

    pub fn atan(&self) -> Self {
        let dn = self.differentiate();
        let q = (&(self * self) + 1.0).recip();
        let mut out = (&dn * &q).integrate(self.0[0].atan());
        out.0.truncate(self.0.len());
        out
    }

    pub fn asinh(&self) -> Self {
        let dn = self.differentiate();
        let q = (&(self * self) + 1.0).powf(-0.5);
        let mut out = (&dn * &q).integrate(self.0[0].asinh());
        out.0.truncate(self.0.len());
        out
    }

    /// Formal derivative; the result has one order less (at least order 0).
    pub fn differentiate(&self) -> Self {
        let n = self.0.len();
        if n == 1 {
            return Series(vec![0.0]);
        }
        Series((1..n).map(|k| k as f64 * self.0[k]).collect())
    }

    /// Primitive with the given constant term; the result has one order more.
    pub fn integrate(&self, c0: f64) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        out.push(c0);
        out.extend(self.0.iter().enumerate().map(|(k, c)| c / (k + 1) as f64));
        Series(out)
    }

    /// Evaluates the polynomial at offset `t` from the expansion point.
    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

impl Add<&Series> for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        Series(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub<&Series> for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        Series(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add<f64> for &Series {
    type Output = Series;
    fn add(self, rhs: f64) -> Series {
        let mut out = self.clone();
        out.0[0] += rhs;
        out
    }
}

impl Mul<&Series> for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let n = self.0.len().min(rhs.0.len());
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..n - i {
                out[i + j] += self.0[i] * rhs.0[j];
            }
        }
        Series(out)
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}
