//! Expression grammar:
//!
//! ```text
//! expr    := ('+'|'-')? term (('+'|'-') term)*
//! term    := factor ('*' factor | '/' rational)*
//! factor  := base ('^' integer)?
//! base    := identifier | rational | '(' expr ')' | 'exp' '(' linear ')'
//! linear  := rational combination of coordinates
//! rational:= integer ('/' positive-integer)?
//! ```
//!
//! Identifiers are coordinate names, their jets (`u_x`, `u_xx`, `u_xxx`,
//! `u_x4`, ...), `eps` and `isqrt2`.

use dispersio::jetring::render::{render_coeff, render_diffpoly};
use dispersio::rat::Rat;
use dispersio::{CoeffFn, DiffPoly};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{CliError, CliResult};

const RESERVED: [&str; 3] = ["eps", "isqrt2", "exp"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
}

fn err<T>(line: usize, col: usize, msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Parse { line, col, msg: msg.into() })
}

impl Lexer {
    fn new(text: &str) -> CliResult<Self> {
        let mut toks = Vec::new();
        let chars: Vec<char> = text.chars().collect();
        let (mut i, mut line, mut col) = (0, 1, 1);
        while i < chars.len() {
            let c = chars[i];
            let (l0, c0) = (line, col);
            if c == '\n' {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            if c.is_whitespace() {
                i += 1;
                col += 1;
                continue;
            }
            let single = match c {
                '+' => Some(Tok::Plus),
                '-' => Some(Tok::Minus),
                '*' => Some(Tok::Star),
                '/' => Some(Tok::Slash),
                '^' => Some(Tok::Caret),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                _ => None,
            };
            if let Some(t) = single {
                toks.push((t, l0, c0));
                i += 1;
                col += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == '.' || chars[i] == 'e' || chars[i] == 'E') {
                    return err(l0, c0, "non-rational literal");
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                toks.push((Tok::Num(s.parse().expect("digits")), l0, c0));
            } else if c.is_ascii_alphabetic() {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                toks.push((Tok::Ident(chars[start..i].iter().collect()), l0, c0));
            } else {
                return err(l0, c0, format!("unexpected character '{c}'"));
            }
        }
        toks.push((Tok::End, line, col));
        Ok(Lexer { toks })
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    names: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].1, self.toks[self.pos].2)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> CliResult<T> {
        let (l, c) = self.here();
        err(l, c, msg)
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> CliResult<()> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn n(&self) -> usize {
        self.names.len()
    }

    fn expr(&mut self) -> CliResult<DiffPoly> {
        let mut neg = false;
        match self.peek() {
            Tok::Minus => {
                self.next();
                neg = true;
            }
            Tok::Plus => {
                self.next();
            }
            _ => {}
        }
        let first = self.term()?;
        let mut acc = if neg { -&first } else { first };
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.next();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.next();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> CliResult<DiffPoly> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.next();
                    acc = &acc * &self.factor()?;
                }
                Tok::Slash => {
                    self.next();
                    let r = self.rational()?;
                    if r.is_zero() {
                        return self.fail("division by zero");
                    }
                    acc = acc.scale(&r.recip());
                }
                Tok::Num(_) | Tok::Ident(_) | Tok::LParen => {
                    return self.fail("implicit multiplication is not allowed");
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> CliResult<DiffPoly> {
        let base = self.base()?;
        if *self.peek() == Tok::Caret {
            self.next();
            match self.next() {
                Tok::Num(k) => {
                    let k = k.to_u32().ok_or_else(|| {
                        let (l, c) = self.here();
                        CliError::Parse { line: l, col: c, msg: "exponent too large".into() }
                    })?;
                    return Ok(base.pow(k));
                }
                _ => {
                    self.pos -= 1;
                    return self.fail("expected a nonnegative integer exponent");
                }
            }
        }
        Ok(base)
    }

    fn rational(&mut self) -> CliResult<Rat> {
        let p = match self.next() {
            Tok::Num(p) => p,
            _ => {
                self.pos -= 1;
                return self.fail("expected an integer");
            }
        };
        if *self.peek() == Tok::Slash {
            if let Tok::Num(q) = &self.toks[self.pos + 1].0 {
                let q = q.clone();
                self.pos += 2;
                if q.is_zero() {
                    return self.fail("zero denominator");
                }
                return Ok(Rat::new(p, q));
            }
        }
        Ok(Rat::from_integer(p))
    }

    fn base(&mut self) -> CliResult<DiffPoly> {
        let n = self.n();
        match self.peek().clone() {
            Tok::Num(_) => Ok(DiffPoly::constant(n, self.rational()?)),
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.here();
                self.next();
                if *self.peek() == Tok::LParen {
                    if name != "exp" {
                        return err(at.0, at.1, format!("unknown function '{name}'"));
                    }
                    self.next();
                    let inner = self.expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    let lin = inner
                        .as_coeff()
                        .filter(|c| !c.has_exp() && !c.has_theta())
                        .and_then(|c| c.as_linear())
                        .ok_or(CliError::Parse {
                            line: at.0,
                            col: at.1,
                            msg: "exp argument must be a rational linear combination of coordinates".into(),
                        })?;
                    return Ok(DiffPoly::from_coeff(CoeffFn::exp_linear(&lin)));
                }
                self.ident(&name).ok_or(CliError::Parse {
                    line: at.0,
                    col: at.1,
                    msg: format!("unknown identifier '{name}'"),
                })
            }
            _ => self.fail("expected an expression"),
        }
    }

    fn ident(&self, name: &str) -> Option<DiffPoly> {
        let n = self.n();
        match name {
            "eps" => return Some(DiffPoly::eps(n)),
            "isqrt2" => return Some(DiffPoly::from_coeff(CoeffFn::theta(n))),
            _ => {}
        }
        if let Some(a) = self.names.iter().position(|c| c == name) {
            return Some(DiffPoly::coord(n, a));
        }
        let (stem, suffix) = name.rsplit_once('_')?;
        let a = self.names.iter().position(|c| c == stem)?;
        let order = match suffix {
            "x" => 1,
            "xx" => 2,
            "xxx" => 3,
            s => {
                let k: u32 = s.strip_prefix('x')?.parse().ok()?;
                if k < 4 || s.starts_with("x0") {
                    return None;
                }
                k
            }
        };
        Some(DiffPoly::jet(n, a, order))
    }
}

/// Checks coordinate names: alphanumeric, starting with a letter, unique and
/// not reserved.
pub fn validate_names(names: &[String]) -> CliResult<()> {
    for (i, s) in names.iter().enumerate() {
        let ok = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) && s.chars().all(|c| c.is_ascii_alphanumeric());
        if !ok || RESERVED.contains(&s.as_str()) {
            return Err(CliError::Input(format!("invalid coordinate name '{s}'")));
        }
        if names[..i].contains(s) {
            return Err(CliError::Input(format!("duplicate coordinate name '{s}'")));
        }
    }
    Ok(())
}

/// Parses a differential polynomial in the given coordinates.
pub fn parse_diffpoly(text: &str, names: &[String]) -> CliResult<DiffPoly> {
    validate_names(names)?;
    let lex = Lexer::new(text)?;
    let mut p = Parser { toks: lex.toks, pos: 0, names };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail("unexpected trailing input");
    }
    Ok(e)
}

/// Parses an exponential polynomial (no jets, no `eps`).
pub fn parse_potential(text: &str, names: &[String]) -> CliResult<CoeffFn> {
    let p = parse_diffpoly(text, names)?;
    p.as_coeff()
        .ok_or_else(|| CliError::Parse { line: 1, col: 1, msg: "potential depends on jets or eps".into() })
}

pub fn render(p: &DiffPoly, names: &[String]) -> String {
    render_diffpoly(p, names)
}

pub fn render_fn(f: &CoeffFn, names: &[String]) -> String {
    render_coeff(f, names)
}

/// Parses a rational literal such as `-3/4`.
pub fn parse_rational(text: &str) -> CliResult<Rat> {
    let p = parse_diffpoly(text, &[])?;
    let c = p.as_coeff().and_then(|c| c.as_constant());
    c.ok_or_else(|| CliError::Input(format!("'{text}' is not a rational number")))
}
