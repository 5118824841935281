//! Canonical text form of `SymExpr` and its parser.
//!
//! Terms are printed in ascending exponent-key order, for example
//! `-1/4*rho^-1 + (1/2+3*i)*y1^2*rho`. The parser accepts the same grammar
//! plus parentheses, integer powers, `mu` (the context's μ) and `i`.
//! The token `eta1` is refused: η₁ has to be written as `i*mu - rho^2`.

use std::fmt;
use std::sync::Arc;

use super::expr::{Ctx, SymExpr};
use super::scalar::{ComplexRational, Rat};
use super::SymError;

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for m in self.monomials() {
            let mut factors = Vec::new();
            if m.rho_exp == 1 {
                factors.push("rho".to_string());
            } else if m.rho_exp != 0 {
                factors.push(format!("rho^{}", m.rho_exp));
            }
            for (i, e) in m.y_exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("y{}", i + 1)),
                    _ => factors.push(format!("y{}^{}", i + 1, e)),
                }
            }
            for (i, e) in m.eta_exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("eta{}", i + 2)),
                    _ => factors.push(format!("eta{}^{}", i + 2, e)),
                }
            }
            let c = &m.coeff;
            let (neg, mag) = if c.im.is_zero() && c.re.signum() < 0 || c.re.is_zero() && c.im.signum() < 0 {
                (true, -c)
            } else {
                (false, c.clone())
            };
            let body = if factors.is_empty() {
                mag.to_string()
            } else if mag.is_one() {
                factors.join("*")
            } else {
                format!("{}*{}", mag, factors.join("*"))
            };
            match (first, neg) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>, SymError> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            out.push(Tok::Num(cs[st..i].iter().collect()));
        } else if c.is_ascii_alphabetic() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(SymError::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    ctx: &'a Arc<Ctx>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat_op(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<SymExpr, SymError> {
        let mut acc = if self.eat_op('-') {
            -self.term()?
        } else {
            self.eat_op('+');
            self.term()?
        };
        loop {
            if self.eat_op('+') {
                acc = &acc + &self.term()?;
            } else if self.eat_op('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<SymExpr, SymError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat_op('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat_op('/') {
                let d = self.unary()?;
                acc = &acc * &invert_monomial(&d)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<SymExpr, SymError> {
        if self.eat_op('-') {
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<SymExpr, SymError> {
        let base = self.atom()?;
        if !self.eat_op('^') {
            return Ok(base);
        }
        let neg = self.eat_op('-');
        let n = match self.peek().cloned() {
            Some(Tok::Num(s)) if s.chars().all(|c| c.is_ascii_digit()) => {
                self.pos += 1;
                s.parse::<u32>().map_err(|_| SymError::Parse(format!("bad exponent {s}")))?
            }
            other => return Err(SymError::Parse(format!("expected integer exponent, found {other:?}"))),
        };
        let p = base.pow(n);
        if neg {
            invert_monomial(&p)
        } else {
            Ok(p)
        }
    }

    fn atom(&mut self) -> Result<SymExpr, SymError> {
        let ctx = self.ctx;
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                self.pos += 1;
                Ok(SymExpr::constant(ctx, ComplexRational::from_rat(Rat::parse(&s)?)))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat_op(')') {
                    return Err(SymError::Parse("missing ')'".into()));
                }
                Ok(e)
            }
            Some(Tok::Ident(id)) => {
                self.pos += 1;
                match id.as_str() {
                    "i" => Ok(SymExpr::constant(ctx, ComplexRational::i())),
                    "rho" => Ok(SymExpr::rho(ctx)),
                    "mu" => Ok(SymExpr::constant(ctx, ComplexRational::from_rat(ctx.mu().clone()))),
                    "eta1" => Err(SymError::Parse("eta1 is not a variable; write it as i*mu - rho^2".into())),
                    _ => {
                        if let Some(n) = id.strip_prefix("eta") {
                            let i = parse_index(n, &id)?;
                            SymExpr::eta(ctx, i)
                        } else if let Some(n) = id.strip_prefix('y') {
                            let i = parse_index(n, &id)?;
                            SymExpr::y(ctx, i)
                        } else {
                            Err(SymError::Parse(format!("unknown identifier {id:?}")))
                        }
                    }
                }
            }
            other => Err(SymError::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

fn parse_index(n: &str, id: &str) -> Result<usize, SymError> {
    n.parse::<usize>().map_err(|_| SymError::Parse(format!("unknown identifier {id:?}")))
}

/// Inverse of a single term c·ϱ^e (the only exactly invertible elements).
fn invert_monomial(e: &SymExpr) -> Result<SymExpr, SymError> {
    let ms: Vec<_> = e.monomials().collect();
    match ms.as_slice() {
        [m] if m.y_exps.iter().all(|&x| x == 0) && m.eta_exps.iter().all(|&x| x == 0) => {
            Ok(SymExpr::rho_pow(e.ctx(), -m.rho_exp, m.coeff.recip()?))
        }
        [] => Err(SymError::DivisionByZero),
        _ => Err(SymError::Parse(format!("cannot divide by {e}"))),
    }
}

/// Parse the text form in the given context.
pub fn parse_expr(ctx: &Arc<Ctx>, s: &str) -> Result<SymExpr, SymError> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(SymError::Parse("empty expression".into()));
    }
    let mut p = Parser { toks, pos: 0, ctx };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(SymError::Parse(format!("trailing input at token {}", p.pos)));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: usize) -> Arc<Ctx> {
        Ctx::new(d, Rat::new(1, 3)).unwrap()
    }

    #[test]
    fn roundtrip_simple() {
        let c = ctx(3);
        for s in ["0", "rho", "-1/4*rho^-1", "(1/2+3*i)*rho*y1^2*eta2", "2 - i*y2", "-1/2*i*rho^-3"] {
            let e = parse_expr(&c, s).unwrap();
            let back = parse_expr(&c, &e.to_string()).unwrap();
            assert_eq!(e, back, "{s} -> {e}");
        }
    }

    #[test]
    fn eta1_is_rejected() {
        let c = ctx(2);
        assert!(parse_expr(&c, "rho^2 + eta1").is_err());
        let e = parse_expr(&c, "rho^2 + i*mu - rho^2").unwrap();
        assert_eq!(e.to_string(), "1/3*i");
    }

    #[test]
    fn division_only_by_single_terms() {
        let c = ctx(2);
        assert_eq!(parse_expr(&c, "y1/(2*rho)").unwrap().to_string(), "1/2*rho^-1*y1");
        assert!(parse_expr(&c, "1/(1+rho)").is_err());
        assert!(parse_expr(&c, "1/0").is_err());
        assert!(parse_expr(&c, "y3").is_err());
        assert!(parse_expr(&c, "rho +").is_err());
    }
}
