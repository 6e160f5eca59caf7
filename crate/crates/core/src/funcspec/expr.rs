//! Single-variable arithmetic expressions.
//!
//! Grammar (whitespace between tokens is ignored):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" unary ] ;          (* right-associative *)
//! primary = number | "x" | "pi" | param | call | "(" expr ")" ;
//! call    = ("exp" | "log" | "sqrt" | "abs") "(" expr ")" ;
//! param   = identifier other than the above ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//!         | "." digits [ exponent ] ;
//! ```
//!
//! So `-x^2` is `-(x^2)`, `2^-1` is `2^(-1)` and `a^b^c` is `a^(b^c)`.
//! Nesting deeper than [`MAX_DEPTH`] is rejected.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Named parameter values, e.g. `q = 0.5`.
pub type Params = BTreeMap<String, f64>;

pub const MAX_DEPTH: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parameter names referenced anywhere in the tree.
    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_params(&self, out: &mut Vec<String>) {
        match self {
            Expr::Param(p) => out.push(p.clone()),
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_params(out),
            Expr::Binary(_, l, r) => {
                l.collect_params(out);
                r.collect_params(out);
            }
            Expr::Const(_) | Expr::Var => {}
        }
    }

    /// Errors if a referenced parameter is missing from `params`.
    pub fn check_params(&self, params: &Params) -> Result<()> {
        match self.params().into_iter().find(|p| !params.contains_key(p)) {
            Some(p) => Err(Error::UnknownIdentifier(p)),
            None => Ok(()),
        }
    }

    pub fn eval(&self, x: f64, params: &Params) -> Result<f64> {
        let v = self.eval_inner(x, params)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x, value: v })
        }
    }

    fn eval_inner(&self, x: f64, params: &Params) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Param(p) => *params
                .get(p)
                .ok_or_else(|| Error::UnknownIdentifier(p.clone()))?,
            Expr::Neg(e) => -e.eval_inner(x, params)?,
            Expr::Binary(op, l, r) => {
                let a = l.eval_inner(x, params)?;
                let b = r.eval_inner(x, params)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b)?,
                }
            }
            Expr::Call(f, e) => {
                let a = e.eval_inner(x, params)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(Error::Domain(format!("log of non-positive value {a}")));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(Error::Domain(format!("sqrt of negative value {a}")));
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                }
            }
        })
    }
}

fn pow(base: f64, exponent: f64) -> Result<f64> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        return Ok(base.powi(exponent as i32));
    }
    if base > 0.0 || (base == 0.0 && exponent > 0.0) {
        Ok(base.powf(exponent))
    } else {
        Err(Error::Domain(format!(
            "non-integer exponent {exponent} needs a positive base, got {base}"
        )))
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    let a = c.abs();
    if a == 0.0 || (1e-5..1e15).contains(&a) {
        write!(f, "{c}")
    } else {
        write!(f, "{c:e}")
    }
}

/// Fully parenthesized rendering; parsing it yields an equal tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => {
                f.write_str("(-")?;
                write_number(f, -c)?;
                f.write_str(")")
            }
            Expr::Const(c) => write_number(f, *c),
            Expr::Var => f.write_str("x"),
            Expr::Param(p) => f.write_str(p),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Op(u8),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.pos - start
    }

    /// Returns the token and its starting byte offset.
    fn next(&mut self) -> Result<(Token, usize)> {
        self.skip_ws();
        let start = self.pos;
        let Some(&b) = self.src.get(self.pos) else {
            return Ok((Token::End, start));
        };
        let tok = match b {
            b'0'..=b'9' | b'.' => {
                let int_digits = self.digits();
                let mut frac_digits = 0;
                if self.src.get(self.pos) == Some(&b'.') {
                    self.pos += 1;
                    frac_digits = self.digits();
                }
                if int_digits + frac_digits == 0 {
                    return Err(syntax(start, "expected digits"));
                }
                if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
                    let save = self.pos;
                    self.pos += 1;
                    if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                        self.pos += 1;
                    }
                    if self.digits() == 0 {
                        // not an exponent; leave `e` for the next token
                        self.pos = save;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let value: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, "malformed number"))?;
                if !value.is_finite() {
                    return Err(syntax(start, "number out of range"));
                }
                Token::Number(value)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Token::Ident(
                    std::str::from_utf8(&self.src[start..self.pos])
                        .expect("ascii")
                        .to_string(),
                )
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Token::Op(b)
            }
            b'(' => {
                self.pos += 1;
                Token::LParen
            }
            b')' => {
                self.pos += 1;
                Token::RParen
            }
            other => {
                return Err(syntax(
                    start,
                    &format!("unexpected byte 0x{other:02x}"),
                ))
            }
        };
        Ok((tok, start))
    }
}

fn syntax(offset: usize, message: &str) -> Error {
    Error::Syntax {
        offset,
        message: message.to_string(),
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    current: Token,
    offset: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<()> {
        let (tok, off) = self.lexer.next()?;
        self.current = tok;
        self.offset = off;
        Ok(())
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(syntax(self.offset, "expression nested too deeply"))
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        self.enter()?;
        let mut lhs = self.term()?;
        while let Token::Op(op @ (b'+' | b'-')) = self.current {
            self.advance()?;
            let rhs = self.term()?;
            let op = if op == b'+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Token::Op(op @ (b'*' | b'/')) = self.current {
            self.advance()?;
            let rhs = self.unary()?;
            let op = if op == b'*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        self.enter()?;
        let out = match self.current {
            Token::Op(b'-') => {
                self.advance()?;
                Expr::Neg(Box::new(self.unary()?))
            }
            Token::Op(b'+') => {
                self.advance()?;
                self.unary()?
            }
            _ => self.power()?,
        };
        self.depth -= 1;
        Ok(out)
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.current == Token::Op(b'^') {
            self.advance()?;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let offset = self.offset;
        match std::mem::replace(&mut self.current, Token::End) {
            Token::Number(v) => {
                self.advance()?;
                Ok(Expr::Const(v))
            }
            Token::Ident(name) => {
                self.advance()?;
                if self.current == Token::LParen {
                    let func = Func::from_name(&name).ok_or(Error::UnknownIdentifier(name))?;
                    self.advance()?;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                Ok(match name.as_str() {
                    "x" => Expr::Var,
                    "pi" => Expr::Const(std::f64::consts::PI),
                    _ if Func::from_name(&name).is_some() => {
                        return Err(syntax(offset, &format!("function `{name}` needs an argument")))
                    }
                    _ => Expr::Param(name),
                })
            }
            Token::LParen => {
                self.advance()?;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::End => Err(syntax(offset, "unexpected end of input")),
            Token::RParen => Err(syntax(offset, "unexpected `)`")),
            Token::Op(op) => Err(syntax(offset, &format!("unexpected `{}`", op as char))),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.current == Token::RParen {
            self.advance()
        } else {
            Err(syntax(self.offset, "expected `)`"))
        }
    }
}

/// Parses raw bytes; any input either parses or yields a positioned error.
pub fn parse_bytes(src: &[u8]) -> Result<Expr> {
    let mut parser = Parser {
        lexer: Lexer { src, pos: 0 },
        current: Token::End,
        offset: 0,
        depth: 0,
    };
    parser.advance()?;
    let e = parser.expr()?;
    if parser.current != Token::End {
        return Err(syntax(parser.offset, "unexpected trailing input"));
    }
    Ok(e)
}

pub fn parse_expression(text: &str) -> Result<Expr> {
    parse_bytes(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(text: &str, x: f64, params: &[(&str, f64)]) -> f64 {
        let p: Params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        parse_expression(text).unwrap().eval(x, &p).unwrap()
    }

    #[test]
    fn basic_examples() {
        assert_eq!(eval("x^2", 3.0, &[]), 9.0);
        assert_eq!(eval("(1 - x^q)/q", 4.0, &[("q", 0.5)]), -2.0);
        assert_eq!(eval("exp(x)*log(x)", 1.0, &[]), 0.0);
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("-x^2", 3.0, &[]), -9.0);
        assert_eq!(eval("2^-1", 0.0, &[]), 0.5);
        assert_eq!(eval("2^3^2", 0.0, &[]), 512.0);
        assert_eq!(eval("1 - 2 - 3", 0.0, &[]), -4.0);
        assert_eq!(eval("8 / 4 / 2", 0.0, &[]), 1.0);
        assert_eq!(eval("1 + 2 * 3", 0.0, &[]), 7.0);
        assert_eq!(eval("  ( 1+2 ) *3 ", 0.0, &[]), 9.0);
        assert_eq!(eval("1.5e1 + .5", 0.0, &[]), 15.5);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse_expression("x + * 2") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match parse_expression("(x + 1") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expression("x $ 1"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse_expression(""), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse_expression("2x"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression("1e999"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn unknown_function_and_parameter() {
        assert_eq!(
            parse_expression("sin(x)"),
            Err(Error::UnknownIdentifier("sin".into()))
        );
        let e = parse_expression("x^q").unwrap();
        assert_eq!(e.check_params(&Params::new()), Err(Error::UnknownIdentifier("q".into())));
    }

    #[test]
    fn fractional_power_of_negative_base() {
        let e = parse_expression("x^0.5").unwrap();
        assert!(matches!(e.eval(-1.0, &Params::new()), Err(Error::Domain(_))));
        assert_eq!(parse_expression("x^-1").unwrap().eval(-2.0, &Params::new()).unwrap(), -0.5);
        assert!(matches!(
            parse_expression("1/x").unwrap().eval(0.0, &Params::new()),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let deep = "(".repeat(100_000);
        assert!(matches!(parse_expression(&deep), Err(Error::Syntax { .. })));
        let minus = "-".repeat(100_000) + "x";
        assert!(matches!(parse_expression(&minus), Err(Error::Syntax { .. })));
    }

    #[test]
    fn unparse_round_trips() {
        for text in ["-x^2", "2^-x", "(1 - x^q)/q", "exp(-x)*1e-300", "abs(x) - -3", "pi*x"] {
            let e = parse_expression(text).unwrap();
            assert_eq!(parse_expression(&e.to_string()).unwrap(), e, "{text} -> {e}");
        }
    }
}
