//! Arithmetic micro-grammar used for matrix entries in coin files.
//!
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := ("-" | "+") unary | power
//! power := atom ("^" unary)?
//! atom  := number | "sqrt" "(" expr ")" | ident | "(" expr ")"
//! ```
//!
//! Entries such as `"1/sqrt(3)"` or `"sqrt(1-2*x^2)/sqrt(2)"` evaluate in
//! double precision, so fixtures need no hand-rounded decimals. Identifiers
//! other than `sqrt` are free variables bound at evaluation time.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Sqrt(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    /// Byte offset into the source text.
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at offset {})", self.message, self.offset)
    }
}

impl std::error::Error for ExprError {}

pub type Bindings = BTreeMap<String, f64>;

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, vars: &Bindings) -> Result<f64, String> {
        let v = match self {
            Expr::Num(x) => *x,
            Expr::Var(name) => *vars
                .get(name)
                .ok_or_else(|| format!("unbound variable `{name}`"))?,
            Expr::Neg(e) => -e.eval(vars)?,
            Expr::Sqrt(e) => {
                let x = e.eval(vars)?;
                if x < 0.0 {
                    return Err(format!("sqrt of negative value {x}"));
                }
                x.sqrt()
            }
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(vars)?, b.eval(vars)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err("expression evaluates to a non-finite value".into())
        }
    }

    /// Free variables, sorted and deduplicated.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(n) => out.push(n.clone()),
            Expr::Neg(e) | Expr::Sqrt(e) => e.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

/// Parses and evaluates with no free variables.
pub fn eval_str(src: &str) -> Result<f64, String> {
    Expr::parse(src)
        .map_err(|e| e.to_string())?
        .eval(&Bindings::new())
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ExprError {
        ExprError {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
                if name == "sqrt" {
                    if !self.eat(b'(') {
                        return Err(self.error("expected `(` after sqrt"));
                    }
                    let e = self.expr()?;
                    if !self.eat(b')') {
                        return Err(self.error("expected `)`"));
                    }
                    Ok(Expr::Sqrt(Box::new(e)))
                } else {
                    Ok(Expr::Var(name.to_string()))
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            digits(self);
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        text.parse::<f64>().map(Expr::Num).map_err(|_| ExprError {
            offset: start,
            message: format!("invalid number `{text}`"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_style_entries() {
        assert_eq!(eval_str("1/sqrt(3)").unwrap(), 1.0 / 3f64.sqrt());
        assert_eq!(eval_str("sqrt(2)/sqrt(3)").unwrap(), 2f64.sqrt() / 3f64.sqrt());
        assert_eq!(eval_str("-1/sqrt(2)").unwrap(), -1.0 / 2f64.sqrt());
        assert_eq!(eval_str("sqrt(6)/2/3").unwrap(), 6f64.sqrt() / 2.0 / 3.0);
        assert_eq!(eval_str("0").unwrap(), 0.0);
        assert_eq!(eval_str("1.5e-3").unwrap(), 1.5e-3);
    }

    #[test]
    fn shortest_float_repr_round_trips() {
        let x = 1.0 / 3f64.sqrt();
        assert_eq!(eval_str(&format!("{x:?}")).unwrap().to_bits(), x.to_bits());
        let y: f64 = -2.5e-17;
        assert_eq!(eval_str(&format!("{y:?}")).unwrap().to_bits(), y.to_bits());
    }

    #[test]
    fn precedence_and_variables() {
        let e = Expr::parse("sqrt(1-2*x^2)/sqrt(2)").unwrap();
        assert_eq!(e.variables(), vec!["x".to_string()]);
        let mut b = Bindings::new();
        b.insert("x".into(), 0.3);
        let expected = (1.0 - 2.0 * 0.3f64.powf(2.0)).sqrt() / 2f64.sqrt();
        assert_eq!(e.eval(&b).unwrap(), expected);
        assert_eq!(eval_str("2-3-4").unwrap(), -5.0);
        assert_eq!(eval_str("-2^2").unwrap(), -4.0);
        assert_eq!(eval_str("2*(3+4)").unwrap(), 14.0);
    }

    #[test]
    fn errors() {
        assert!(Expr::parse("1/").is_err());
        assert!(Expr::parse("sqrt 3").is_err());
        assert!(Expr::parse("(1").is_err());
        assert!(Expr::parse("1 2").is_err());
        assert!(eval_str("sqrt(-1)").is_err());
        assert!(eval_str("x").is_err());
        assert!(eval_str("1/0").is_err());
    }
}
