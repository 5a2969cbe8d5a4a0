use super::{BinOp, Expression, UnaryFn};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((i, Tok::Op(c as char)));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let mantissa = &text[start..i];
                if mantissa == "." {
                    return Err(syntax(start, "expected digits around `.`"));
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    let digits = j;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j == digits {
                        return Err(syntax(i, "expected exponent digits"));
                    }
                    i = j;
                }
                let value: f64 = text[start..i]
                    .parse()
                    .map_err(|_| syntax(start, "malformed number"))?;
                if !value.is_finite() {
                    return Err(syntax(start, "number out of range"));
                }
                out.push((start, Tok::Num(value)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => return Err(syntax(i, "unexpected character")),
        }
    }
    Ok(out)
}

fn syntax(pos: usize, message: &str) -> Error {
    Error::Syntax { pos, message: message.to_string() }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(syntax(self.offset(), &format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expression> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expression> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expression::Unary(UnaryFn::Neg, Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expression::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expression> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expression::Const(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "x1" => Ok(Expression::Var(0)),
                "x2" => Ok(Expression::Var(1)),
                "pi" => Ok(Expression::Const(std::f64::consts::PI)),
                "e" => Ok(Expression::Const(std::f64::consts::E)),
                _ => match UnaryFn::from_name(&name) {
                    Some(func) => {
                        self.expect(Tok::LParen, "`(` after function name")?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Expression::Unary(func, Box::new(arg)))
                    }
                    None => Err(Error::UnknownIdentifier(name)),
                },
            },
            Some(_) => Err(syntax(at, "expected number, variable, function or `(`")),
            None => Err(syntax(at, "unexpected end of input")),
        }
    }
}

/// Parses expression text into a tree.
pub fn parse(text: &str) -> Result<Expression> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(syntax(p.offset(), "unexpected trailing input"));
    }
    Ok(e)
}
