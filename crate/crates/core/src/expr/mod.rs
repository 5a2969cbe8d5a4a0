//! A small arithmetic expression language for scalar fields on the plane.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = atom [ "^" unary ] ;            (* right associative *)
//! atom    = number | "x1" | "x2" | "pi" | "e"
//!         | func "(" expr ")" | "(" expr ")" ;
//! func    = "sin" | "cos" | "exp" | "log" | "sqrt" | "atan" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//!         | "." digits [ exponent ] ;
//! ```
//!
//! `^` binds tighter than unary minus, so `-x1^2` is `-(x1^2)`.

mod parser;

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace, Var};

pub use parser::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl UnaryFn {
    pub(crate) fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryFn::Sin,
            "cos" => UnaryFn::Cos,
            "exp" => UnaryFn::Exp,
            "log" => UnaryFn::Log,
            "sqrt" => UnaryFn::Sqrt,
            "atan" => UnaryFn::Atan,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            UnaryFn::Neg => "-",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Atan => "atan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Parsed expression tree over the coordinates `x1`, `x2`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Const(f64),
    /// Coordinate index: 0 for `x1`, 1 for `x2`.
    Var(usize),
    Unary(UnaryFn, Box<Expression>),
    Binary(BinOp, Box<Expression>, Box<Expression>),
}

/// Fully parenthesized form; parsing the output yields the same tree.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Const(c) => write!(f, "{c:?}"),
            Expression::Var(i) => write!(f, "x{}", i + 1),
            Expression::Unary(UnaryFn::Neg, a) => write!(f, "(-{a})"),
            Expression::Unary(func, a) => write!(f, "{}({a})", func.name()),
            Expression::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

fn domain(what: &str, value: f64, node: &Expression) -> Error {
    Error::Domain(format!("{what} of {value} in `{node}`"))
}

impl Expression {
    pub fn var(i: usize) -> Self {
        Expression::Var(i)
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expression::Const(_) => true,
            Expression::Var(_) => false,
            Expression::Unary(_, a) => a.is_constant(),
            Expression::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Evaluates in plain floating point.
    pub fn eval_f64(&self, x: [f64; 2]) -> Result<f64> {
        Ok(match self {
            Expression::Const(c) => *c,
            Expression::Var(i) => x[*i],
            Expression::Unary(func, a) => {
                let v = a.eval_f64(x)?;
                match func {
                    UnaryFn::Neg => -v,
                    UnaryFn::Sin => v.sin(),
                    UnaryFn::Cos => v.cos(),
                    UnaryFn::Exp => v.exp(),
                    UnaryFn::Atan => v.atan(),
                    UnaryFn::Log if v > 0.0 => v.ln(),
                    UnaryFn::Sqrt if v > 0.0 => v.sqrt(),
                    UnaryFn::Log => return Err(domain("log", v, self)),
                    UnaryFn::Sqrt => return Err(domain("sqrt", v, self)),
                }
            }
            Expression::Binary(op, a, b) => {
                let (u, w) = (a.eval_f64(x)?, b.eval_f64(x)?);
                match op {
                    BinOp::Add => u + w,
                    BinOp::Sub => u - w,
                    BinOp::Mul => u * w,
                    BinOp::Div if w != 0.0 => u / w,
                    BinOp::Div => return Err(domain("division by", w, self)),
                    BinOp::Pow => match integer_exponent(b, w) {
                        Some(n) if n >= 0 || u != 0.0 => u.powi(n),
                        Some(_) => return Err(domain("negative power", u, self)),
                        None if u > 0.0 => u.powf(w),
                        None => return Err(domain("non-integer power", u, self)),
                    },
                }
            }
        })
    }

    /// Evaluates in jet arithmetic; `x` are the coordinate jets.
    pub fn eval_jet(&self, x: &[Jet; 2]) -> Result<Jet> {
        let space = x[0].space();
        Ok(match self {
            Expression::Const(c) => Jet::constant(space, *c),
            Expression::Var(i) => x[*i].clone(),
            Expression::Unary(func, a) => {
                let v = a.eval_jet(x)?;
                match func {
                    UnaryFn::Neg => -v,
                    UnaryFn::Sin => v.sin(),
                    UnaryFn::Cos => v.cos(),
                    UnaryFn::Exp => v.exp(),
                    UnaryFn::Atan => v.atan(),
                    UnaryFn::Log => v.ln().map_err(|_| domain("log", v.value(), self))?,
                    UnaryFn::Sqrt => v.sqrt().map_err(|_| domain("sqrt", v.value(), self))?,
                }
            }
            Expression::Binary(op, a, b) => {
                let u = a.eval_jet(x)?;
                match op {
                    BinOp::Add => u + b.eval_jet(x)?,
                    BinOp::Sub => u - b.eval_jet(x)?,
                    BinOp::Mul => u * b.eval_jet(x)?,
                    BinOp::Div => {
                        let w = b.eval_jet(x)?;
                        u.div(&w).map_err(|_| domain("division by", w.value(), self))?
                    }
                    BinOp::Pow if b.is_constant() => {
                        let p = b.eval_f64([0.0, 0.0])?;
                        match integer_exponent(b, p) {
                            Some(n) => u.powi(n).map_err(|_| domain("negative power", u.value(), self))?,
                            None => u.powf(p).map_err(|_| domain("non-integer power", u.value(), self))?,
                        }
                    }
                    BinOp::Pow => {
                        let w = b.eval_jet(x)?;
                        let l = u.ln().map_err(|_| domain("non-integer power", u.value(), self))?;
                        (w * l).exp()
                    }
                }
            }
        })
    }
}

fn integer_exponent(b: &Expression, value: f64) -> Option<i32> {
    (b.is_constant() && value.fract() == 0.0 && value.abs() <= 64.0).then_some(value as i32)
}

/// A scalar function of `(x1, x2)` given by an expression.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    expression: Expression,
}

impl ScalarField {
    pub fn new(expression: Expression) -> Self {
        ScalarField { expression }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(ScalarField::new(parse(text)?))
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(Expression::Const(c))
    }

    pub fn expression(&self) -> &Expression {
        &self.expression
    }

    pub fn value(&self, x: [f64; 2]) -> Result<f64> {
        self.expression.eval_f64(x)
    }

    /// Evaluates on already-seeded coordinate jets.
    pub fn eval(&self, x: &[Jet; 2]) -> Result<Jet> {
        self.expression.eval_jet(x)
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expression.fmt(f)
    }
}

/// Jet of `field` at `point`, with both coordinates active.
pub fn eval_field(field: &ScalarField, space: &JetSpace, point: [f64; 2]) -> Result<Jet> {
    let x = [
        Jet::variable(space, Var::X1, point[0]),
        Jet::variable(space, Var::X2, point[1]),
    ];
    field.eval(&x)
}
