//! A small arithmetic expression language for profiles.
//!
//! Grammar: numbers, the variable `x`, the constants `pi` and `L`, the operators
//! `+ - * / ^` (with `^` right-associative and binding tighter than unary minus),
//! parentheses and the functions `sin`, `cos`, `tan`, `exp`, `sqrt`, `pow(a, b)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Length,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Ident(usize, usize),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && (b[j] as char).is_ascii_digit() {
                    i = j;
                    while i < b.len() && (b[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Parse(format!("bad number '{text}' at {start}")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push(Tok::Ident(start, i));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}' at {i}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Tok>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).copied()
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected '{op}' in '{}'", self.src)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(a, b)) => {
                self.pos += 1;
                let name = &self.src[a..b];
                match name {
                    "x" => Ok(Expr::X),
                    "L" => Ok(Expr::Length),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "pow" => {
                        self.expect('(')?;
                        let a = self.expr()?;
                        self.expect(',')?;
                        let b = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::Pow(Box::new(a), Box::new(b)))
                    }
                    _ => {
                        let f = match name {
                            "sin" => Func::Sin,
                            "cos" => Func::Cos,
                            "tan" => Func::Tan,
                            "exp" => Func::Exp,
                            "sqrt" => Func::Sqrt,
                            _ => return Err(Error::Parse(format!("unknown identifier '{name}' in '{}'", self.src))),
                        };
                        self.expect('(')?;
                        let a = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::Call(f, Box::new(a)))
                    }
                }
            }
            _ => Err(Error::Parse(format!("unexpected end or operator in '{}'", self.src))),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let toks = tokenize(src)?;
        if toks.is_empty() {
            return Err(Error::Parse("empty expression".into()));
        }
        let mut p = Parser { src, toks, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!("trailing input in '{src}'")));
        }
        Ok(e)
    }

    /// Value and derivative with respect to `x`.
    pub fn eval(&self, x: f64, length: f64) -> (f64, f64) {
        match self {
            Expr::Num(v) => (*v, 0.0),
            Expr::X => (x, 1.0),
            Expr::Length => (length, 0.0),
            Expr::Neg(a) => {
                let (v, d) = a.eval(x, length);
                (-v, -d)
            }
            Expr::Add(a, b) => {
                let ((u, du), (v, dv)) = (a.eval(x, length), b.eval(x, length));
                (u + v, du + dv)
            }
            Expr::Sub(a, b) => {
                let ((u, du), (v, dv)) = (a.eval(x, length), b.eval(x, length));
                (u - v, du - dv)
            }
            Expr::Mul(a, b) => {
                let ((u, du), (v, dv)) = (a.eval(x, length), b.eval(x, length));
                (u * v, du * v + u * dv)
            }
            Expr::Div(a, b) => {
                let ((u, du), (v, dv)) = (a.eval(x, length), b.eval(x, length));
                (u / v, (du * v - u * dv) / (v * v))
            }
            Expr::Pow(a, b) => {
                let ((u, du), (v, dv)) = (a.eval(x, length), b.eval(x, length));
                let val = u.powf(v);
                let d = if dv == 0.0 {
                    if v == 0.0 { 0.0 } else { v * u.powf(v - 1.0) * du }
                } else {
                    val * (dv * u.ln() + v * du / u)
                };
                (val, d)
            }
            Expr::Call(f, a) => {
                let (u, du) = a.eval(x, length);
                match f {
                    Func::Sin => (u.sin(), u.cos() * du),
                    Func::Cos => (u.cos(), -u.sin() * du),
                    Func::Tan => {
                        let t = u.tan();
                        (t, (1.0 + t * t) * du)
                    }
                    Func::Exp => {
                        let e = u.exp();
                        (e, e * du)
                    }
                    Func::Sqrt => {
                        let s = u.sqrt();
                        (s, 0.5 * du / s)
                    }
                }
            }
        }
    }
}
