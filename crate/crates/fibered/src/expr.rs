//! A small expression language for scalar symbols in `x, y, ξ, η`.
//!
//! Grammar (usual precedence, `^` right-associative):
//! `+ - * / ^`, parentheses, `|e|` for the modulus, numbers, the constants `i` and `pi`, the
//! variables `x, y, xi (ξ), eta (η)`, and the functions `abs, sign, pos (indicator of > 0),
//! nonneg (indicator of ≥ 0), cos, sin, exp, sqrt, conj, re, im`.
//!
//! Directional limits at `η → 0±` are evaluated by substituting an infinitesimal `η = ±ε`
//! (`ε = 1e-200`): continuous expressions lose only `O(ε)`, and sign/indicator functions of
//! `η` see the correct side.

use crate::error::{Error, Result};
use crate::symbols::{Bandwidth, CompatibleSymbol, PointFn};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

/// Infinitesimal used for one-sided limits in `η`.
pub const INFINITESIMAL: f64 = 1e-200;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Complex64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Xi,
    Eta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Sign,
    Pos,
    NonNeg,
    Cos,
    Sin,
    Exp,
    Sqrt,
    Conj,
    Re,
    Im,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
                    i += 1;
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let txt: String = chars[start..i].iter().collect();
            out.push(Tok::Num(txt.parse().map_err(|_| Error::Parse(format!("bad number '{txt}'")))?));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()|".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected '{c}' at token {}", self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Bin(Op::Add, Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Bin(Op::Sub, Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Bin(Op::Mul, Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Bin(Op::Div, Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(Complex64::new(v, 0.0)))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Sym('|')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect('|')?;
                Ok(Expr::Call(Func::Abs, Box::new(e)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let var = match name.as_str() {
                    "x" => Some(Expr::Var(Var::X)),
                    "y" => Some(Expr::Var(Var::Y)),
                    "xi" | "ξ" => Some(Expr::Var(Var::Xi)),
                    "eta" | "η" => Some(Expr::Var(Var::Eta)),
                    "i" => Some(Expr::Num(Complex64::new(0.0, 1.0))),
                    "pi" => Some(Expr::Num(Complex64::new(std::f64::consts::PI, 0.0))),
                    _ => None,
                };
                if let Some(v) = var {
                    return Ok(v);
                }
                let f = match name.as_str() {
                    "abs" => Func::Abs,
                    "sign" => Func::Sign,
                    "pos" => Func::Pos,
                    "nonneg" => Func::NonNeg,
                    "cos" => Func::Cos,
                    "sin" => Func::Sin,
                    "exp" => Func::Exp,
                    "sqrt" => Func::Sqrt,
                    "conj" => Func::Conj,
                    "re" => Func::Re,
                    "im" => Func::Im,
                    other => return Err(Error::Parse(format!("unknown identifier '{other}'"))),
                };
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(Expr::Call(f, Box::new(arg)))
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

impl Expr {
    pub fn parse(s: &str) -> Result<Expr> {
        let mut p = Parser { toks: tokenize(s)?, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!("trailing input after token {}", p.pos)));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64, y: f64, xi: f64, eta: f64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Expr::Num(v) => *v,
            Expr::Var(v) => Complex64::new(
                match v {
                    Var::X => x,
                    Var::Y => y,
                    Var::Xi => xi,
                    Var::Eta => eta,
                },
                0.0,
            ),
            Expr::Neg(e) => -e.eval(x, y, xi, eta),
            Expr::Bin(op, a, b) => {
                let (u, v) = (a.eval(x, y, xi, eta), b.eval(x, y, xi, eta));
                match op {
                    Op::Add => u + v,
                    Op::Sub => u - v,
                    Op::Mul => u * v,
                    Op::Div => u / v,
                    Op::Pow => {
                        if v.im == 0.0 && v.re.fract() == 0.0 && v.re.abs() <= 64.0 {
                            u.powi(v.re as i32)
                        } else {
                            u.powc(v)
                        }
                    }
                }
            }
            Expr::Call(f, a) => {
                let u = a.eval(x, y, xi, eta);
                match f {
                    Func::Abs => Complex64::new(u.norm(), 0.0),
                    Func::Sign => {
                        if u.re < 0.0 {
                            -one
                        } else if u.re > 0.0 {
                            one
                        } else {
                            zero
                        }
                    }
                    Func::Pos => if u.re > 0.0 { one } else { zero },
                    Func::NonNeg => if u.re >= 0.0 { one } else { zero },
                    Func::Cos => u.cos(),
                    Func::Sin => u.sin(),
                    Func::Exp => u.exp(),
                    Func::Sqrt => u.sqrt(),
                    Func::Conj => u.conj(),
                    Func::Re => Complex64::new(u.re, 0.0),
                    Func::Im => Complex64::new(u.im, 0.0),
                }
            }
        }
    }

    /// One-sided limit `η → 0` from the side `sign(η̂)`.
    pub fn eval_limit(&self, x: f64, y: f64, xi: f64, eta_hat: f64) -> Complex64 {
        self.eval(x, y, xi, eta_hat.signum() * INFINITESIMAL)
    }

    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(e) | Expr::Call(_, e) => e.uses(var),
            Expr::Bin(_, a, b) => a.uses(var) || b.uses(var),
        }
    }
}

/// Compatible pair from a principal-symbol expression (and optionally an explicit limit
/// expression in `x, y, xi, eta` where `eta` stands for `η̂ = ±1`). The operator part is the
/// fiber multiplication by the limit at `η̂ = sign η`.
pub fn expression_symbol(name: &str, principal: &str, limit: Option<&str>, band: Option<Bandwidth>) -> Result<CompatibleSymbol> {
    let e = Arc::new(Expr::parse(principal)?);
    let l = match limit {
        Some(s) => Some(Arc::new(Expr::parse(s)?)),
        None => None,
    };
    let band = band.unwrap_or_else(|| {
        let dep = |v: Var| e.uses(v) || l.as_ref().is_some_and(|l| l.uses(v));
        Bandwidth::new(if dep(Var::X) { None } else { Some(0) }, if dep(Var::Y) { None } else { Some(0) })
    });
    let ee = e.clone();
    let eval: PointFn = Arc::new(move |x, y, xi, eta| DMatrix::from_element(1, 1, ee.eval(x, y, xi, eta)));
    let lim: PointFn = match l {
        Some(l) => Arc::new(move |x, y, xi, eh| DMatrix::from_element(1, 1, l.eval(x, y, xi, eh))),
        None => Arc::new(move |x, y, xi, eh| DMatrix::from_element(1, 1, e.eval_limit(x, y, xi, eh))),
    };
    let mut s = CompatibleSymbol::smooth(name, 1, eval, lim, band);
    s.kind = crate::symbols::SymbolKind::General;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let e = Expr::parse("(xi^2 + |eta|*xi*cos(x))/(xi^2+eta^2)").unwrap();
        let v = e.eval(0.0, 0.0, 1.0, 1.0);
        assert!((v.re - 1.0).abs() < 1e-15);
        let w = Expr::parse("2 + pos(eta)").unwrap();
        assert_eq!(w.eval_limit(0.0, 0.0, 1.0, 1.0).re, 3.0);
        assert_eq!(w.eval_limit(0.0, 0.0, 1.0, -1.0).re, 2.0);
        let z = Expr::parse("(xi + i*eta)/sqrt(xi^2+eta^2)").unwrap();
        assert!((z.eval_limit(0.0, 0.0, -3.0, 1.0) + Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((Expr::parse("-2^2").unwrap().eval(0.0, 0.0, 0.0, 0.0).re + 4.0).abs() < 1e-15);
        assert!((Expr::parse("1.5e-1*2").unwrap().eval(0.0, 0.0, 0.0, 0.0).re - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("foo(x)").is_err());
        assert!(Expr::parse("(x").is_err());
        assert!(Expr::parse("x $ y").is_err());
        assert!(Expr::parse("x y").is_err());
    }

    #[test]
    fn expression_symbol_is_compatible() {
        let s = expression_symbol("e", "2 + pos(eta)*cos(y)", None, None).unwrap();
        assert!(s.check_compatibility(1e-12).passed);
        assert_eq!(s.principal.band, Bandwidth::new(Some(0), None));
    }
}
