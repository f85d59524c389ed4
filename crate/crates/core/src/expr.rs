//! Jump-function expressions: lexer, recursive-descent parser, printer and jet evaluator.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := factor (("*" | "/") factor)*
//! factor  := "-" factor | power
//! power   := primary ("^" factor)?
//! primary := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! so `-v^2` reads `-(v^2)` and `2^3^2` reads `2^(3^2)`. Exponents must be
//! constant. Identifiers are `v`, `z2..zN` (`N` the shell dimension), `r`
//! (the transverse radius), `pi`, and the functions `exp log cosh sinh tanh
//! erf sqrt`.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Cosh,
    Sinh,
    Tanh,
    Erf,
    Sqrt,
}

impl Func {
    const ALL: [Func; 7] = [
        Func::Exp,
        Func::Log,
        Func::Cosh,
        Func::Sinh,
        Func::Tanh,
        Func::Erf,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Cosh => "cosh",
            Func::Sinh => "sinh",
            Func::Tanh => "tanh",
            Func::Erf => "erf",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    V,
    /// Transverse coordinate `z^k`, `k ≥ 2`.
    Z(usize),
    R,
    Pi,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub dim_n: usize,
    pub allow_v: bool,
}

impl ParseOptions {
    pub fn new(dim_n: usize) -> Self {
        ParseOptions { dim_n, allow_v: true }
    }

    /// Expressions of the transverse coordinates only.
    pub fn transverse(dim_n: usize) -> Self {
        ParseOptions {
            dim_n,
            allow_v: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            while lx.pos < lx.src.len() && lx.src[lx.pos].is_ascii_whitespace() {
                lx.pos += 1;
            }
            let start = lx.pos;
            let Some(&c) = lx.src.get(lx.pos) else {
                out.push((Tok::End, start));
                return Ok(out);
            };
            let tok = match c {
                b'0'..=b'9' | b'.' => lx.number()?,
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    while lx.pos < lx.src.len()
                        && (lx.src[lx.pos].is_ascii_alphanumeric() || lx.src[lx.pos] == b'_')
                    {
                        lx.pos += 1;
                    }
                    Tok::Ident(String::from_utf8_lossy(&lx.src[start..lx.pos]).into_owned())
                }
                b'+' | b'-' | b'*' | b'/' | b'^' => {
                    lx.pos += 1;
                    Tok::Op(c as char)
                }
                b'(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                b',' => {
                    lx.pos += 1;
                    Tok::Comma
                }
                _ => {
                    return Err(Error::Parse {
                        offset: start,
                        expected: vec!["number".into(), "identifier".into(), "operator".into(), "(".into()],
                    })
                }
            };
            out.push((tok, start));
        }
    }

    fn digits(&mut self) -> usize {
        let s = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.pos - s
    }

    fn number(&mut self) -> Result<Tok> {
        let start = self.pos;
        let mut n = self.digits();
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += self.digits();
        }
        if n == 0 {
            return Err(Error::Parse {
                offset: start,
                expected: vec!["digit".into()],
            });
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                return Err(Error::Parse {
                    offset: mark + 1,
                    expected: vec!["exponent digits".into()],
                });
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|_| Error::Parse {
                offset: start,
                expected: vec!["number".into()],
            })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
    opts: ParseOptions,
}

fn expected(offset: usize, items: &[&str]) -> Error {
    Error::Parse {
        offset,
        expected: items.iter().map(|s| s.to_string()).collect(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let at = self.offset();
            let exponent = self.factor()?;
            if !exponent.is_constant() {
                return Err(expected(at, &["constant exponent"]));
            }
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(x) => Ok(Expr::Num(x)),
            Tok::LParen => {
                let e = self.expr()?;
                match self.bump() {
                    (Tok::RParen, _) => Ok(e),
                    (_, off) => Err(expected(off, &[")", "operator"])),
                }
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return Err(expected(self.offset(), &["("]));
                    }
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    match self.bump() {
                        (Tok::RParen, _) => {}
                        (_, off) => return Err(expected(off, &[")", ",", "operator"])),
                    }
                    if args.len() != 1 {
                        return Err(Error::Arity {
                            name,
                            expected: 1,
                            found: args.len(),
                        });
                    }
                    let arg = args.pop().expect("one argument");
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                let var = self.variable(&name, at)?;
                if *self.peek() == Tok::LParen {
                    return Err(expected(self.offset(), &["operator", "end of input"]));
                }
                Ok(Expr::Var(var))
            }
            Tok::End => Err(expected(at, &["number", "identifier", "("])),
            _ => Err(expected(at, &["number", "identifier", "(", "-"])),
        }
    }

    fn variable(&self, name: &str, at: usize) -> Result<Var> {
        let unknown = || Error::UnknownIdentifier {
            name: name.to_string(),
            offset: at,
        };
        match name {
            "v" if self.opts.allow_v => Ok(Var::V),
            "r" => Ok(Var::R),
            "pi" => Ok(Var::Pi),
            _ => {
                let k: usize = name
                    .strip_prefix('z')
                    .filter(|d| !d.is_empty() && !d.starts_with('0'))
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(unknown)?;
                if (2..=self.opts.dim_n).contains(&k) {
                    Ok(Var::Z(k))
                } else {
                    Err(unknown())
                }
            }
        }
    }
}

/// Parses `text` into an expression over `v, z2..zN, r`.
pub fn parse(text: &str, opts: ParseOptions) -> Result<Expr> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, i: 0, opts };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        _ => Err(expected(p.offset(), &["operator", "end of input"])),
    }
}

/// Values of the coordinates an expression is evaluated at, as jets.
pub struct Point<'a, T> {
    pub v: &'a Jet<T>,
    /// `z[k]` is `z^{k+2}`.
    pub z: &'a [Jet<T>],
}

fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

impl Expr {
    /// True when no coordinate appears.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(Var::Pi) => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Bin(_, a, b) | Expr::Pow(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    pub fn uses_v(&self) -> bool {
        match self {
            Expr::Var(Var::V) => true,
            Expr::Num(_) | Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses_v(),
            Expr::Bin(_, a, b) | Expr::Pow(a, b) => a.uses_v() || b.uses_v(),
        }
    }

    /// Value of a constant subexpression.
    pub fn constant_value(&self) -> Option<f64> {
        if !self.is_constant() {
            return None;
        }
        let zero = Jet::<f64>::zero(1, 0);
        self.eval(&Point { v: &zero, z: &[] }).ok().map(|j| j.value())
    }

    fn level(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    /// Evaluates the expression on coordinate jets.
    pub fn eval<T: Scalar>(&self, at: &Point<'_, T>) -> Result<Jet<T>> {
        let order = at.v.order();
        Ok(match self {
            Expr::Num(x) => at.v.lift_const(T::lit(*x)),
            Expr::Var(Var::V) => at.v.clone(),
            Expr::Var(Var::Pi) => at.v.lift_const(T::PI()),
            Expr::Var(Var::Z(k)) => at
                .z
                .get(k - 2)
                .cloned()
                .ok_or_else(|| domain(format!("z{k} not supplied")))?,
            Expr::Var(Var::R) => {
                let mut r2 = at.v.lift_const(T::zero());
                for z in at.z {
                    r2 += &(z * z);
                }
                if r2.value() == T::zero() && order > 0 {
                    return Err(domain("r is not differentiable at r = 0"));
                }
                r2.sqrt()
            }
            Expr::Neg(a) => -a.eval(at)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(at)?, b.eval(at)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.value() == T::zero() {
                            return Err(domain("division by zero"));
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(base, exponent) => {
                let b = base.eval(at)?;
                let e = exponent
                    .constant_value()
                    .ok_or_else(|| domain("non-constant exponent"))?;
                if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
                    if e < 0.0 && b.value() == T::zero() {
                        return Err(domain("negative power of zero"));
                    }
                    b.powi(e as i32)
                } else if b.value() > T::zero() {
                    b.powf(T::lit(e))
                } else {
                    return Err(domain("non-integer power of a non-positive base"));
                }
            }
            Expr::Call(f, a) => {
                let a = a.eval(at)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a.value() <= T::zero() {
                            return Err(domain("log of a non-positive argument"));
                        }
                        a.ln()
                    }
                    Func::Cosh => a.cosh(),
                    Func::Sinh => a.sinh(),
                    Func::Tanh => a.tanh(),
                    Func::Erf => a.erf(),
                    Func::Sqrt => {
                        if a.value() < T::zero() || (a.value() == T::zero() && order > 0) {
                            return Err(domain("sqrt outside its smooth domain"));
                        }
                        a.sqrt()
                    }
                }
            }
        })
    }

    /// S-expression rendering of the tree.
    pub fn tree(&self) -> String {
        match self {
            Expr::Num(x) => format!("{x:?}"),
            Expr::Var(v) => var_name(*v),
            Expr::Neg(a) => format!("(neg {})", a.tree()),
            Expr::Bin(op, a, b) => format!("({} {} {})", op.symbol(), a.tree(), b.tree()),
            Expr::Pow(a, b) => format!("(^ {} {})", a.tree(), b.tree()),
            Expr::Call(f, a) => format!("({} {})", f.name(), a.tree()),
        }
    }
}

fn var_name(v: Var) -> String {
    match v {
        Var::V => "v".into(),
        Var::Z(k) => format!("z{k}"),
        Var::R => "r".into(),
        Var::Pi => "pi".into(),
    }
}

struct Paren<'a>(&'a Expr, bool);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Minimal-parenthesis rendering that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Var(v) => f.write_str(&var_name(*v)),
            Expr::Neg(a) => write!(f, "-{}", Paren(a, a.level() < 3)),
            Expr::Bin(op, a, b) => {
                let lvl = self.level();
                let sep = if lvl == 1 {
                    format!(" {} ", op.symbol())
                } else {
                    op.symbol().to_string()
                };
                write!(f, "{}{}{}", Paren(a, a.level() < lvl), sep, Paren(b, b.level() <= lvl))
            }
            Expr::Pow(a, b) => write!(f, "{}^{}", Paren(a, a.level() < 5), Paren(b, b.level() < 3)),
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), a),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Result<Expr> {
        parse(s, ParseOptions::new(3))
    }

    fn at(e: &Expr, v: f64, z: &[f64]) -> f64 {
        let vj = Jet::constant(1, 0, v);
        let zj: Vec<Jet<f64>> = z.iter().map(|&x| Jet::constant(1, 0, x)).collect();
        e.eval(&Point { v: &vj, z: &zj }).unwrap().value()
    }

    #[test]
    fn precedence_and_unary_minus() {
        let e = p("exp(-v^2)").unwrap();
        assert!((at(&e, 1.5, &[]) - (-2.25f64).exp()).abs() < 1e-15);
        assert_eq!(at(&p("-2^2").unwrap(), 0.0, &[]), -4.0);
        assert_eq!(at(&p("2^3^2").unwrap(), 0.0, &[]), 512.0);
        assert_eq!(at(&p("1 - 2 - 3").unwrap(), 0.0, &[]), -4.0);
        assert_eq!(at(&p("8/2/2").unwrap(), 0.0, &[]), 2.0);
        assert_eq!(at(&p("2*-v").unwrap(), 3.0, &[]), -6.0);
    }

    #[test]
    fn example_family_expression() {
        let e = p("4*v - 2*log(cosh(v)) - tanh(r)*exp(-v^2) - (1.1*r^2/4)*erf(r)").unwrap();
        let (v, r) = (0.3f64, 1.2f64);
        let expect = 4.0 * v
            - 2.0 * v.cosh().ln()
            - r.tanh() * (-v * v).exp()
            - 1.1 * r * r / 4.0 * crate::special::erf(r);
        assert!((at(&e, v, &[r, 0.0]) - expect).abs() < 1e-14);
    }

    #[test]
    fn errors_carry_offsets() {
        match p("v + * 2") {
            Err(Error::Parse { offset, expected }) => {
                assert_eq!(offset, 4);
                assert!(expected.contains(&"number".to_string()));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(p("x + 1"), Err(Error::UnknownIdentifier { offset: 0, .. })));
        assert!(matches!(p("z4"), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(p("z1"), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(p("exp(v, 2)"), Err(Error::Arity { expected: 1, found: 2, .. })));
        assert!(matches!(p("v^v"), Err(Error::Parse { offset: 2, .. })));
        assert!(matches!(p("(v"), Err(Error::Parse { offset: 2, .. })));
        assert!(matches!(p(""), Err(Error::Parse { offset: 0, .. })));
        assert!(matches!(p("v $"), Err(Error::Parse { offset: 2, .. })));
        assert!(matches!(p("1e+"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse("v + z2", ParseOptions::transverse(3)),
            Err(Error::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn domain_errors() {
        let vj = Jet::variable(1, 2, 0, -1.0);
        let pt = Point { v: &vj, z: &[] };
        assert!(matches!(p("log(v)").unwrap().eval(&pt), Err(Error::Domain(_))));
        assert!(matches!(p("sqrt(v)").unwrap().eval(&pt), Err(Error::Domain(_))));
        assert!(matches!(p("1/(v+1)").unwrap().eval(&pt), Err(Error::Domain(_))));
        assert!(matches!(p("v^0.5").unwrap().eval(&pt), Err(Error::Domain(_))));
        assert!(p("v^3").unwrap().eval(&pt).is_ok());
    }

    #[test]
    fn printer_round_trip_simple() {
        for s in ["-(v - 1)", "(-v)^2", "-v^2", "(2^3)^2"] {
            let e = p(s).unwrap();
            assert_eq!(p(&e.to_string()).unwrap(), e, "{s} -> {e}");
        }
        assert_eq!(p("(v)").unwrap().to_string(), "v");
        assert_eq!(p("v - (1 - v)").unwrap().to_string(), "v - (1.0 - v)");
    }
}
