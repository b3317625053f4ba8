//! A small expression language for coefficient fields.
//!
//! Scenario files and catalog entries describe fields as strings such as
//! `"(x2^2 - x3^2) * sin(v)"`; this module parses them into
//! [`ScalarField`] trees, which are then exactly differentiable like any
//! built-in field.
//!
//! Grammar (usual precedence, `^` binds tightest and is right-associative):
//!
//! ```text
//! expr   := term  (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' signed-number)?
//! atom   := number | coord | func '(' expr ')' | '(' expr ')'
//! coord  := x1 | x2 | x3 | theta | v | y5 | chi   (theta aliases x3)
//! func   := exp | ln | sqrt | abs | sgn | sin | cos | tan | atan
//!         | sinh | cosh | tanh | sech
//! ```
//!
//! `ln` and `sqrt` act on absolute values (`ln|u|`, `√|u|`), matching the
//! convention used throughout the residual calculus.  Exponents are numeric
//! literals: integer exponents map to exact integer powers, fractional ones
//! to `|u|^a`.

use crate::error::{ForgeError, Result};
use crate::field::{ScalarField, Var};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, bytes: src.as_bytes(), pos: 0 }
    }

    fn error(&self, offset: usize, message: impl Into<String>) -> ForgeError {
        ForgeError::ExprParse {
            offset,
            message: message.into(),
            source_text: self.src.to_string(),
        }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>> {
        let mut out = Vec::new();
        while self.pos < self.bytes.len() {
            let start = self.pos;
            let c = self.bytes[self.pos];
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                }
                b'+' => {
                    self.pos += 1;
                    out.push((start, Tok::Plus));
                }
                b'-' => {
                    self.pos += 1;
                    out.push((start, Tok::Minus));
                }
                b'*' => {
                    self.pos += 1;
                    out.push((start, Tok::Star));
                }
                b'/' => {
                    self.pos += 1;
                    out.push((start, Tok::Slash));
                }
                b'^' => {
                    self.pos += 1;
                    out.push((start, Tok::Caret));
                }
                b'(' => {
                    self.pos += 1;
                    out.push((start, Tok::LParen));
                }
                b')' => {
                    self.pos += 1;
                    out.push((start, Tok::RParen));
                }
                b'0'..=b'9' | b'.' => {
                    out.push((start, self.number()?));
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let mut end = self.pos;
                    while end < self.bytes.len()
                        && (self.bytes[end].is_ascii_alphanumeric() || self.bytes[end] == b'_')
                    {
                        end += 1;
                    }
                    let word = &self.src[self.pos..end];
                    self.pos = end;
                    out.push((start, Tok::Ident(word.to_string())));
                }
                other => {
                    return Err(self.error(start, format!("unexpected byte {:?}", other as char)));
                }
            }
        }
        Ok(out)
    }

    fn number(&mut self) -> Result<Tok> {
        let start = self.pos;
        let mut end = self.pos;
        let b = self.bytes;
        while end < b.len() && b[end].is_ascii_digit() {
            end += 1;
        }
        if end < b.len() && b[end] == b'.' {
            end += 1;
            while end < b.len() && b[end].is_ascii_digit() {
                end += 1;
            }
        }
        if end < b.len() && (b[end] == b'e' || b[end] == b'E') {
            let mut probe = end + 1;
            if probe < b.len() && (b[probe] == b'+' || b[probe] == b'-') {
                probe += 1;
            }
            if probe < b.len() && b[probe].is_ascii_digit() {
                end = probe;
                while end < b.len() && b[end].is_ascii_digit() {
                    end += 1;
                }
            }
        }
        let text = &self.src[start..end];
        self.pos = end;
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|e| self.error(start, format!("bad number literal {text:?}: {e}")))
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> ForgeError {
        let offset = self
            .toks
            .get(self.pos)
            .map(|(o, _)| *o)
            .unwrap_or(self.src.len());
        ForgeError::ExprParse {
            offset,
            message: message.into(),
            source_text: self.src.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        match self.bump() {
            Some(t) if t == tok => Ok(()),
            Some(t) => Err(self.error(format!("expected {what}, found {t:?}"))),
            None => Err(self.error(format!("expected {what}, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<ScalarField> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ScalarField> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    acc = acc.div(&self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<ScalarField> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<ScalarField> {
        let base = self.atom()?;
        if !matches!(self.peek(), Some(Tok::Caret)) {
            return Ok(base);
        }
        self.pos += 1;
        let mut sign = 1.0;
        while matches!(self.peek(), Some(Tok::Minus)) {
            self.pos += 1;
            sign = -sign;
        }
        let expo = match self.bump() {
            Some(Tok::Num(n)) => sign * n,
            other => {
                return Err(self.error(format!(
                    "exponent must be a numeric literal, found {other:?}"
                )))
            }
        };
        if expo.fract() == 0.0 && expo.abs() <= i32::MAX as f64 {
            Ok(base.powi(expo as i32))
        } else {
            Ok(base.powf_abs(expo))
        }
    }

    fn atom(&mut self) -> Result<ScalarField> {
        match self.bump() {
            Some(Tok::Num(n)) => Ok(ScalarField::constant(n)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => self.ident(&name),
            other => Err(self.error(format!("expected a value, found {other:?}"))),
        }
    }

    fn ident(&mut self, name: &str) -> Result<ScalarField> {
        let coord = match name {
            "x1" => Some(Var::X1),
            "x2" => Some(Var::X2),
            "x3" => Some(Var::X3),
            // Angular profiles (horizon deformations) are fields of the
            // second horizontal coordinate; `theta` reads naturally there.
            "theta" => Some(Var::X3),
            "v" => Some(Var::V),
            "y5" => Some(Var::Y5),
            "chi" => Some(Var::Chi),
            "pi" => return Ok(ScalarField::constant(std::f64::consts::PI)),
            "e" => return Ok(ScalarField::constant(std::f64::consts::E)),
            _ => None,
        };
        if let Some(var) = coord {
            return Ok(ScalarField::coord(var));
        }
        self.expect(Tok::LParen, &format!("`(` after function {name:?}"))?;
        let arg = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(match name {
            "exp" => arg.exp(),
            "ln" => arg.ln_abs(),
            "sqrt" => arg.sqrt_abs(),
            "abs" => arg.abs(),
            "sgn" => arg.signum(),
            "sin" => arg.sin(),
            "cos" => arg.cos(),
            "tan" => arg.tan(),
            "atan" => arg.atan(),
            "sinh" => arg.sinh(),
            "cosh" => arg.cosh(),
            "tanh" => arg.tanh(),
            "sech" => arg.sech(),
            other => {
                return Err(self.error(format!(
                    "unknown function {other:?}; known: exp ln sqrt abs sgn sin cos tan atan sinh cosh tanh sech"
                )))
            }
        })
    }
}

/// Parse an expression into a differentiable field.
pub fn parse_field(src: &str) -> Result<ScalarField> {
    let toks = Lexer::new(src).tokens()?;
    let mut parser = Parser { src, toks, pos: 0 };
    let field = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.error("trailing input after expression"));
    }
    Ok(field)
}
