//! Dirichlet boundary data, defined arc by arc.
//!
//! Each arc carries either a closed-form expression in the arc parameter
//! `t` in [0, 1] and the plane coordinates `x`, `y`, or a seeded random
//! trigonometric series in `t` (a stand-in for smooth random data). Values
//! are scalars; continuity across corners is detected, not required.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, Domain};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Relative corner mismatch below which data counts as continuous.
const CONTINUITY_TOL: f64 = 1e-10;
/// Guard samples per arc taken at construction to catch log/divide blowups.
const GUARD_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Var {
    T,
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum UnOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Expression tree over t, x, y.
#[derive(Debug, Clone)]
pub(crate) enum Expr {
    Num(f64),
    Var(Var),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr> {
        Parser::new(source)?.parse_full()
    }

    pub fn eval(&self, t: f64, x: f64, y: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Unary(op, a) => {
                let v = a.eval(t, x, y);
                match op {
                    UnOp::Neg => -v,
                    UnOp::Sin => v.sin(),
                    UnOp::Cos => v.cos(),
                    UnOp::Exp => v.exp(),
                    UnOp::Log => v.ln(),
                    UnOp::Abs => v.abs(),
                }
            }
            Expr::Binary(op, a, b) => {
                let u = a.eval(t, x, y);
                let v = b.eval(t, x, y);
                match op {
                    BinOp::Add => u + v,
                    BinOp::Sub => u - v,
                    BinOp::Mul => u * v,
                    BinOp::Div => u / v,
                    BinOp::Pow => u.powf(v),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn new(source: &str) -> Result<Parser> {
        let mut tokens = Vec::new();
        let bytes = source.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            match c {
                ' ' | '\t' | '\n' | '\r' => i += 1,
                '+' => {
                    tokens.push((i, Token::Plus));
                    i += 1;
                }
                '-' => {
                    tokens.push((i, Token::Minus));
                    i += 1;
                }
                '*' => {
                    tokens.push((i, Token::Star));
                    i += 1;
                }
                '/' => {
                    tokens.push((i, Token::Slash));
                    i += 1;
                }
                '^' => {
                    tokens.push((i, Token::Caret));
                    i += 1;
                }
                '(' => {
                    tokens.push((i, Token::LParen));
                    i += 1;
                }
                ')' => {
                    tokens.push((i, Token::RParen));
                    i += 1;
                }
                ',' => {
                    tokens.push((i, Token::Comma));
                    i += 1;
                }
                '0'..='9' | '.' => {
                    let start = i;
                    while i < bytes.len()
                        && (bytes[i].is_ascii_digit()
                            || bytes[i] == b'.'
                            || bytes[i] == b'e'
                            || bytes[i] == b'E'
                            || ((bytes[i] == b'+' || bytes[i] == b'-')
                                && i > start
                                && (bytes[i - 1] == b'e' || bytes[i - 1] == b'E')))
                    {
                        i += 1;
                    }
                    let text = &source[start..i];
                    let v: f64 = text.parse().map_err(|_| {
                        Error::Data(format!("bad number {text:?} at byte {start}"))
                    })?;
                    tokens.push((start, Token::Num(v)));
                }
                'a'..='z' | 'A'..='Z' | '_' => {
                    let start = i;
                    while i < bytes.len()
                        && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    tokens.push((start, Token::Ident(source[start..i].to_string())));
                }
                _ => {
                    return Err(Error::Data(format!(
                        "unexpected character {c:?} at byte {i}"
                    )))
                }
            }
        }
        Ok(Parser { tokens, pos: 0 })
    }

    fn parse_full(mut self) -> Result<Expr> {
        let e = self.expr()?;
        if let Some((at, tok)) = self.tokens.get(self.pos) {
            return Err(Error::Data(format!(
                "trailing input {tok:?} at byte {at}"
            )));
        }
        Ok(e)
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Binary(BinOp::Add, Box::new(lhs), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Binary(BinOp::Sub, Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    lhs = Expr::Binary(BinOp::Mul, Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Binary(BinOp::Div, Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.pos += 1;
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.pos += 1;
            let exp = self.unary()?; // right associative
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.tokens.get(self.pos).map(|(i, _)| *i).unwrap_or(0);
        match self.bump() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                match self.bump() {
                    Some(Token::RParen) => Ok(e),
                    _ => Err(Error::Data(format!("missing ')' for '(' at byte {at}"))),
                }
            }
            Some(Token::Ident(name)) => {
                if matches!(self.peek(), Some(Token::LParen)) {
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while matches!(self.peek(), Some(Token::Comma)) {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    if !matches!(self.bump(), Some(Token::RParen)) {
                        return Err(Error::Data(format!(
                            "missing ')' in call of {name} at byte {at}"
                        )));
                    }
                    let unary = |op: UnOp, mut args: Vec<Expr>| -> Result<Expr> {
                        if args.len() != 1 {
                            return Err(Error::Data(format!(
                                "{name} takes one argument (byte {at})"
                            )));
                        }
                        Ok(Expr::Unary(op, Box::new(args.remove(0))))
                    };
                    match name.as_str() {
                        "sin" => unary(UnOp::Sin, args),
                        "cos" => unary(UnOp::Cos, args),
                        "exp" => unary(UnOp::Exp, args),
                        "log" => unary(UnOp::Log, args),
                        "abs" => unary(UnOp::Abs, args),
                        "pow" => {
                            if args.len() != 2 {
                                return Err(Error::Data(format!(
                                    "pow takes two arguments (byte {at})"
                                )));
                            }
                            let b = args.pop().unwrap();
                            let a = args.pop().unwrap();
                            Ok(Expr::Binary(BinOp::Pow, Box::new(a), Box::new(b)))
                        }
                        _ => Err(Error::Data(format!(
                            "unknown function {name:?} at byte {at}"
                        ))),
                    }
                } else {
                    match name.as_str() {
                        "t" => Ok(Expr::Var(Var::T)),
                        "x" => Ok(Expr::Var(Var::X)),
                        "y" => Ok(Expr::Var(Var::Y)),
                        "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                        _ => Err(Error::Data(format!(
                            "unknown variable {name:?} at byte {at}; use t, x, y"
                        ))),
                    }
                }
            }
            Some(tok) => Err(Error::Data(format!(
                "unexpected {tok:?} at byte {at}"
            ))),
            None => Err(Error::Data("unexpected end of expression".into())),
        }
    }
}

/// Data carried by one arc.
#[derive(Debug, Clone)]
pub(crate) enum ArcData {
    Expr(Expr),
    /// sum_k (a_k cos(2 pi k t) + b_k sin(2 pi k t)) / sqrt(K), all times
    /// t(1 - t) so values vanish at both corners.
    Series { coeffs: Vec<(f64, f64)> },
}

impl ArcData {
    fn eval(&self, t: f64, x: f64, y: f64) -> f64 {
        match self {
            ArcData::Expr(e) => e.eval(t, x, y),
            ArcData::Series { coeffs } => {
                let mut s = 0.0;
                for (k, (a, b)) in coeffs.iter().enumerate() {
                    let w = std::f64::consts::TAU * (k as f64 + 1.0) * t;
                    s += a * w.cos() + b * w.sin();
                }
                t * (1.0 - t) * s / (coeffs.len() as f64).sqrt()
            }
        }
    }
}

/// Build the random series for an arc of length `arc_len`: independent
/// standard-normal coefficients for every frequency up to 1/wavelength
/// (at least one mode).
pub(crate) fn random_series(seed: u64, wavelength: f64, arc_len: f64) -> Result<ArcData> {
    if !(wavelength > 0.0) {
        return Err(Error::Data(format!("wavelength must be positive, got {wavelength}")));
    }
    let modes = ((arc_len / wavelength).floor() as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..modes)
        .map(|_| (rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    Ok(ArcData::Series { coeffs })
}

/// Per-arc Dirichlet data for one domain.
#[derive(Debug, Clone)]
pub struct BoundarySpec {
    arcs: Vec<ArcData>,
    continuous: bool,
    max_corner_jump: f64,
    data_scale: f64,
}

impl BoundarySpec {
    /// One expression source per arc, in arc order.
    pub fn from_expressions(domain: &Domain, sources: &[&str]) -> Result<BoundarySpec> {
        if sources.len() != domain.arcs().len() {
            return Err(Error::Data(format!(
                "domain has {} arcs but {} expressions were given",
                domain.arcs().len(),
                sources.len()
            )));
        }
        let arcs = sources
            .iter()
            .map(|s| Expr::parse(s).map(ArcData::Expr))
            .collect::<Result<Vec<_>>>()?;
        BoundarySpec::from_arc_data(domain, arcs)
    }

    /// The same expression on every arc.
    pub fn uniform(domain: &Domain, source: &str) -> Result<BoundarySpec> {
        let e = Expr::parse(source)?;
        let arcs = vec![ArcData::Expr(e); domain.arcs().len()];
        BoundarySpec::from_arc_data(domain, arcs)
    }

    /// Independent smooth random data on every arc; arc k is seeded with
    /// `seed + k` and uses wavelength `wavelength_frac` times its length.
    pub fn random_smooth(domain: &Domain, seed: u64, wavelength_frac: f64) -> Result<BoundarySpec> {
        let arcs = domain
            .arcs()
            .iter()
            .enumerate()
            .map(|(k, arc)| {
                random_series(
                    seed.wrapping_add(k as u64),
                    wavelength_frac * arc.length(),
                    arc.length(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        BoundarySpec::from_arc_data(domain, arcs)
    }

    /// Assemble from per-arc data (used by the file loader).
    pub(crate) fn from_arc_data(domain: &Domain, arcs: Vec<ArcData>) -> Result<BoundarySpec> {
        if arcs.len() != domain.arcs().len() {
            return Err(Error::Data(format!(
                "domain has {} arcs but {} data entries were given",
                domain.arcs().len(),
                arcs.len()
            )));
        }
        // Guard pass: sample densely, require finite values, record scale.
        let mut data_scale = 0.0f64;
        for (k, (data, arc)) in arcs.iter().zip(domain.arcs()).enumerate() {
            for i in 0..GUARD_SAMPLES {
                let t = i as f64 / (GUARD_SAMPLES - 1) as f64;
                let p = arc.point(t);
                let v = data.eval(t, p.re, p.im);
                if !v.is_finite() {
                    return Err(Error::Data(format!(
                        "non-finite value on arc {k} at t = {t:.6}"
                    )));
                }
                data_scale = data_scale.max(v.abs());
            }
        }
        let m = arcs.len();
        let mut max_corner_jump = 0.0f64;
        for k in 0..m {
            let prev = (k + m - 1) % m;
            let pos = domain.corners()[k].position;
            let before = arcs[prev].eval(1.0, pos.re, pos.im);
            let after = arcs[k].eval(0.0, pos.re, pos.im);
            max_corner_jump = max_corner_jump.max((before - after).abs());
        }
        let continuous = max_corner_jump <= CONTINUITY_TOL * data_scale;
        Ok(BoundarySpec {
            arcs,
            continuous,
            max_corner_jump,
            data_scale,
        })
    }

    /// Evaluate the data at a boundary point.
    pub fn eval(&self, arc: usize, t: f64, x: f64, y: f64) -> Result<f64> {
        let v = self.arcs[arc].eval(t, x, y);
        if !v.is_finite() {
            return Err(Error::Data(format!(
                "non-finite value on arc {arc} at t = {t:.6}"
            )));
        }
        Ok(v)
    }

    pub fn eval_point(&self, p: &BoundaryPoint) -> Result<f64> {
        self.eval(p.arc, p.t, p.position.re, p.position.im)
    }

    /// True when adjacent arcs agree at every shared corner.
    pub fn continuous(&self) -> bool {
        self.continuous
    }

    /// Largest mismatch of adjacent arc values at a shared corner.
    pub fn max_corner_jump(&self) -> f64 {
        self.max_corner_jump
    }

    /// Largest sampled |h|; the reference scale for continuity decisions.
    pub fn data_scale(&self) -> f64 {
        self.data_scale
    }
}
