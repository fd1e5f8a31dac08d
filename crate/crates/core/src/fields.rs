//! Small expression language for spatial profiles and time profiles.
//!
//! A field is a sum of terms:
//!
//! ```text
//! const(c)                 c
//! ramp(c0, cx, cy)         c0 + cx·x + cy·y
//! gauss(a, x0, y0, s)      a·exp(−((x−x0)² + (y−y0)²)/(2s²))
//! clamp(lo, hi, expr)      min(max(expr, lo), hi)
//! ```
//!
//! joined by `+` or `-`. Surface fields are evaluated with `y = 0`.

use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum FieldExpr {
    Const(f64),
    Ramp { c0: f64, cx: f64, cy: f64 },
    Gauss { a: f64, x0: f64, y0: f64, s: f64 },
    Clamp { lo: f64, hi: f64, inner: Box<FieldExpr> },
    Sum(Vec<(f64, FieldExpr)>),
}

impl FieldExpr {
    pub fn zero() -> Self {
        FieldExpr::Const(0.0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            FieldExpr::Const(c) => *c,
            FieldExpr::Ramp { c0, cx, cy } => c0 + cx * x + cy * y,
            FieldExpr::Gauss { a, x0, y0, s } => {
                let r2 = (x - x0).powi(2) + (y - y0).powi(2);
                a * (-r2 / (2.0 * s * s)).exp()
            }
            FieldExpr::Clamp { lo, hi, inner } => inner.eval(x, y).max(*lo).min(*hi),
            FieldExpr::Sum(terms) => terms.iter().map(|(s, t)| s * t.eval(x, y)).sum(),
        }
    }

    pub fn parse(src: &str) -> Result<Self, String> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(format!("unexpected trailing input in `{src}`"));
        }
        Ok(e)
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            FieldExpr::Const(c) => *c == 0.0,
            FieldExpr::Sum(t) => t.iter().all(|(_, e)| e.is_identically_zero()),
            _ => false,
        }
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldExpr::Const(c) => write!(f, "const({c})"),
            FieldExpr::Ramp { c0, cx, cy } => write!(f, "ramp({c0}, {cx}, {cy})"),
            FieldExpr::Gauss { a, x0, y0, s } => write!(f, "gauss({a}, {x0}, {y0}, {s})"),
            FieldExpr::Clamp { lo, hi, inner } => write!(f, "clamp({lo}, {hi}, {inner})"),
            FieldExpr::Sum(terms) => {
                for (i, (s, t)) in terms.iter().enumerate() {
                    match (i, *s < 0.0) {
                        (0, false) => write!(f, "{t}")?,
                        (0, true) => write!(f, "-{t}")?,
                        (_, false) => write!(f, " + {t}")?,
                        (_, true) => write!(f, " - {t}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
}

fn tokenize(src: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                out.push(Tok::LParen);
                i += 1
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1
            }
            '+' => {
                out.push(Tok::Plus);
                i += 1
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() {
                    let d = chars[i];
                    let exp_sign = (d == '+' || d == '-') && matches!(chars[i - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse::<f64>().map_err(|_| format!("bad number `{s}`"))?;
                out.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), String> {
        match self.next() {
            Some(ref got) if *got == t => Ok(()),
            got => Err(format!("expected {t:?}, found {got:?}")),
        }
    }

    fn number(&mut self) -> Result<f64, String> {
        let sign = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            -1.0
        } else {
            1.0
        };
        match self.next() {
            Some(Tok::Num(v)) => Ok(sign * v),
            got => Err(format!("expected a number, found {got:?}")),
        }
    }

    fn numbers(&mut self, n: usize) -> Result<Vec<f64>, String> {
        let mut v = Vec::with_capacity(n);
        for k in 0..n {
            if k > 0 {
                self.expect(Tok::Comma)?;
            }
            v.push(self.number()?);
        }
        Ok(v)
    }

    fn expr(&mut self) -> Result<FieldExpr, String> {
        let mut terms = Vec::new();
        let mut sign = 1.0;
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            sign = -1.0;
        }
        terms.push((sign, self.term()?));
        loop {
            match self.peek() {
                Some(Tok::Plus) => sign = 1.0,
                Some(Tok::Minus) => sign = -1.0,
                _ => break,
            }
            self.pos += 1;
            terms.push((sign, self.term()?));
        }
        if terms.len() == 1 && terms[0].0 == 1.0 {
            Ok(terms.pop().unwrap().1)
        } else {
            Ok(FieldExpr::Sum(terms))
        }
    }

    fn term(&mut self) -> Result<FieldExpr, String> {
        let name = match self.next() {
            Some(Tok::Ident(s)) => s,
            got => return Err(format!("expected a profile name, found {got:?}")),
        };
        self.expect(Tok::LParen)?;
        let e = match name.as_str() {
            "const" => FieldExpr::Const(self.number()?),
            "ramp" => {
                let v = self.numbers(3)?;
                FieldExpr::Ramp { c0: v[0], cx: v[1], cy: v[2] }
            }
            "gauss" => {
                let v = self.numbers(4)?;
                if !(v[3] > 0.0) {
                    return Err("gauss width must be positive".into());
                }
                FieldExpr::Gauss { a: v[0], x0: v[1], y0: v[2], s: v[3] }
            }
            "clamp" => {
                let v = self.numbers(2)?;
                self.expect(Tok::Comma)?;
                let inner = self.expr()?;
                if v[0] > v[1] {
                    return Err("clamp bounds are reversed".into());
                }
                FieldExpr::Clamp { lo: v[0], hi: v[1], inner: Box::new(inner) }
            }
            other => return Err(format!("unknown profile `{other}`")),
        };
        self.expect(Tok::RParen)?;
        Ok(e)
    }
}

/// Scalar time modulation of a load.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeProfile {
    Constant,
    /// Linear rise from 0 at `t = 0` to 1 at `t = t1`, then constant.
    Ramp { t1: f64 },
    /// `sin²` pulse supported on `[t0, t1]`.
    Bump { t0: f64, t1: f64 },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Ramp { t1 } => (t / t1).clamp(0.0, 1.0),
            TimeProfile::Bump { t0, t1 } => {
                if t <= t0 || t >= t1 {
                    0.0
                } else {
                    (std::f64::consts::PI * (t - t0) / (t1 - t0)).sin().powi(2)
                }
            }
        }
    }

    pub fn parse(src: &str) -> Result<Self, String> {
        let s = src.trim();
        if s == "constant" {
            return Ok(TimeProfile::Constant);
        }
        let (name, rest) = s
            .split_once('(')
            .ok_or_else(|| format!("unknown time profile `{s}`"))?;
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| format!("missing `)` in `{s}`"))?;
        let nums: Result<Vec<f64>, _> = args.split(',').map(|a| a.trim().parse::<f64>()).collect();
        let nums = nums.map_err(|_| format!("bad arguments in `{s}`"))?;
        match (name.trim(), nums.as_slice()) {
            ("ramp", [t1]) if *t1 > 0.0 => Ok(TimeProfile::Ramp { t1: *t1 }),
            ("bump", [t0, t1]) if t1 > t0 => Ok(TimeProfile::Bump { t0: *t0, t1: *t1 }),
            _ => Err(format!("invalid time profile `{s}`")),
        }
    }
}

impl fmt::Display for TimeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeProfile::Constant => write!(f, "constant"),
            TimeProfile::Ramp { t1 } => write!(f, "ramp({t1})"),
            TimeProfile::Bump { t0, t1 } => write!(f, "bump({t0}, {t1})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let e = FieldExpr::parse("const(1.2) + ramp(0, 0, -0.5) - gauss(0.1, 1, 0, 0.5)").unwrap();
        let v = e.eval(1.0, 0.4);
        assert!((v - (1.2 - 0.2 - 0.1 * (-0.16f64 / 0.5).exp())).abs() < 1e-15);
        let c = FieldExpr::parse("clamp(0.03, 1, ramp(-0.57625, 1.2125, 0))").unwrap();
        assert_eq!(c.eval(0.0, 0.0), 0.03);
        assert_eq!(c.eval(2.0, 0.0), 1.0);
        assert!(FieldExpr::parse("const(-2.5e-1)").unwrap().eval(0.0, 0.0) == -0.25);
    }

    #[test]
    fn display_round_trips() {
        for s in ["const(1.5) + gauss(0.2, 0.5, 0.5, 0.4)", "clamp(0, 1, ramp(0.1, 1, 0) - const(0.5))"] {
            let e = FieldExpr::parse(s).unwrap();
            assert_eq!(FieldExpr::parse(&e.to_string()).unwrap(), e);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(FieldExpr::parse("sin(1)").is_err());
        assert!(FieldExpr::parse("const(1) +").is_err());
        assert!(FieldExpr::parse("gauss(1, 0, 0, 0)").is_err());
        assert!(TimeProfile::parse("ramp(0)").is_err());
    }

    #[test]
    fn time_profiles() {
        assert_eq!(TimeProfile::parse("constant").unwrap().eval(7.0), 1.0);
        let r = TimeProfile::parse("ramp(0.2)").unwrap();
        assert_eq!(r.eval(0.1), 0.5);
        assert_eq!(r.eval(3.0), 1.0);
        let b = TimeProfile::parse("bump(0, 1)").unwrap();
        assert!((b.eval(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(b.eval(1.5), 0.0);
    }
}
