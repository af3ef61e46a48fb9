//! Expression language for field declarations.
//!
//! Grammar (usual precedence, `^` right-associative, unary minus binds looser
//! than `^` so `-x^2 = -(x^2)`):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | 'x' | 's' | 'u' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | sinh | cosh | exp | ln | sqrt | abs
//! ```
//!
//! `s` is an alias of `x`, convenient for turning-angle functions `H(s)`.
//! Derivatives come from evaluating the tree on [`Jet`]s.

use std::fmt;

use thiserror::Error;

use super::jet::Jet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("unexpected character '{ch}' at offset {pos} in \"{src}\"")]
    UnexpectedChar { ch: char, pos: usize, src: String },
    #[error("unexpected end of expression \"{0}\"")]
    UnexpectedEnd(String),
    #[error("unexpected token '{token}' in \"{src}\"")]
    UnexpectedToken { token: String, src: String },
    #[error("unknown identifier '{name}' in \"{src}\"")]
    UnknownIdentifier { name: String, src: String },
    #[error("expression \"{0}\" uses u but declares a one-variable field")]
    UsesU(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    U,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let tokens = tokenize(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            src,
        };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(ExprError::UnexpectedToken {
                token: p.tokens[p.pos].to_string(),
                src: src.to_string(),
            });
        }
        Ok(e)
    }

    pub fn uses_u(&self) -> bool {
        match self {
            Expr::U => true,
            Expr::Num(_) | Expr::X => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses_u(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.uses_u() || b.uses_u(),
        }
    }

    /// Plain value.
    pub fn eval(&self, x: f64, u: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::U => u,
            Expr::Neg(a) => -a.eval(x, u),
            Expr::Add(a, b) => a.eval(x, u) + b.eval(x, u),
            Expr::Sub(a, b) => a.eval(x, u) - b.eval(x, u),
            Expr::Mul(a, b) => a.eval(x, u) * b.eval(x, u),
            Expr::Div(a, b) => a.eval(x, u) / b.eval(x, u),
            Expr::Pow(a, b) => {
                let base = a.eval(x, u);
                let p = b.eval(x, u);
                if p.fract() == 0.0 && p.abs() < 64.0 {
                    base.powi(p as i32)
                } else {
                    base.powf(p)
                }
            }
            Expr::Call(f, a) => {
                let v = a.eval(x, u);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Sinh => v.sinh(),
                    Func::Cosh => v.cosh(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Sqrt => v.sqrt(),
                    Func::Abs => v.abs(),
                }
            }
        }
    }

    /// Taylor expansion of order `order` around `(x, u)`.
    pub fn jet(&self, x: f64, u: f64, order: usize) -> Jet {
        match self {
            Expr::Num(v) => Jet::constant(order, *v),
            Expr::X => Jet::var_x(order, x),
            Expr::U => Jet::var_u(order, u),
            Expr::Neg(a) => -&a.jet(x, u, order),
            Expr::Add(a, b) => &a.jet(x, u, order) + &b.jet(x, u, order),
            Expr::Sub(a, b) => &a.jet(x, u, order) - &b.jet(x, u, order),
            Expr::Mul(a, b) => &a.jet(x, u, order) * &b.jet(x, u, order),
            Expr::Div(a, b) => a.jet(x, u, order).div(&b.jet(x, u, order)),
            Expr::Pow(a, b) => a.jet(x, u, order).pow(&b.jet(x, u, order)),
            Expr::Call(f, a) => {
                let j = a.jet(x, u, order);
                match f {
                    Func::Sin => j.sin(),
                    Func::Cos => j.cos(),
                    Func::Sinh => j.sinh(),
                    Func::Cosh => j.cosh(),
                    Func::Exp => j.exp(),
                    Func::Ln => j.ln(),
                    Func::Sqrt => j.sqrt(),
                    Func::Abs => j.abs(),
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::X => write!(f, "x"),
            Expr::U => write!(f, "u"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "{v}"),
            Token::Ident(s) => write!(f, "{s}"),
            Token::Op(c) => write!(f, "{c}"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
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
            // exponent part: 1e-3, 2.5E+4
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| ExprError::UnexpectedChar {
                ch: chars[start],
                pos: start,
                src: src.to_string(),
            })?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else if c == '(' {
            out.push(Token::LParen);
            i += 1;
        } else if c == ')' {
            out.push(Token::RParen);
            i += 1;
        } else {
            return Err(ExprError::UnexpectedChar {
                ch: c,
                pos: i,
                src: src.to_string(),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token, ExprError> {
        let t = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| ExprError::UnexpectedEnd(self.src.to_string()))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Token) -> Result<(), ExprError> {
        let t = self.next()?;
        if t == want {
            Ok(())
        } else {
            Err(ExprError::UnexpectedToken {
                token: t.to_string(),
                src: self.src.to_string(),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(Token::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if let Some(Token::Op('+')) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.next()? {
            Token::Num(v) => Ok(Expr::Num(v)),
            Token::LParen => {
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Token::Ident(name) => match name.as_str() {
                "x" | "s" => Ok(Expr::X),
                "u" => Ok(Expr::U),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                "e" => Ok(Expr::Num(std::f64::consts::E)),
                other => {
                    let func =
                        Func::from_name(other).ok_or_else(|| ExprError::UnknownIdentifier {
                            name: other.to_string(),
                            src: self.src.to_string(),
                        })?;
                    self.expect(Token::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Token::RParen)?;
                    Ok(Expr::Call(func, Box::new(arg)))
                }
            },
            t => Err(ExprError::UnexpectedToken {
                token: t.to_string(),
                src: self.src.to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = Expr::parse("-x^2 + 2*3").unwrap();
        assert_eq!(e.eval(3.0, 0.0), -3.0);
        let e = Expr::parse("2^3^2").unwrap();
        assert_eq!(e.eval(0.0, 0.0), 512.0);
        let e = Expr::parse("1e-3 * x + 2.5E1").unwrap();
        assert!((e.eval(1000.0, 0.0) - 26.0).abs() < 1e-12);
    }

    #[test]
    fn functions_and_constants() {
        let e = Expr::parse("cosh(u) + 0.5*sinh(u)").unwrap();
        let v = e.eval(0.0, 1.0);
        assert!((v - (1.0_f64.cosh() + 0.5 * 1.0_f64.sinh())).abs() < 1e-15);
        let e = Expr::parse("exp(-(x^2+1)*u)").unwrap();
        assert!((e.eval(1.0, 1.0) - (-2.0_f64).exp()).abs() < 1e-15);
        assert!(Expr::parse("sin(pi/2)").unwrap().eval(0.0, 0.0) == 1.0);
    }

    #[test]
    fn errors_are_reported() {
        assert!(matches!(
            Expr::parse("foo(x)"),
            Err(ExprError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            Expr::parse("x +"),
            Err(ExprError::UnexpectedEnd(_))
        ));
        assert!(matches!(
            Expr::parse("x $ 2"),
            Err(ExprError::UnexpectedChar { ch: '$', .. })
        ));
        assert!(matches!(
            Expr::parse("(x"),
            Err(ExprError::UnexpectedEnd(_))
        ));
    }

    #[test]
    fn jet_matches_hand_derivative() {
        // d/dx (x sin x) = sin x + x cos x
        let e = Expr::parse("x*sin(x)").unwrap();
        let j = e.jet(0.7, 0.0, 2);
        let want = 0.7_f64.sin() + 0.7 * 0.7_f64.cos();
        assert!((j.partial(1, 0) - want).abs() < 1e-14);
        // mixed partial of exp(x u) at (1,2): (1 + x u) e^{xu}
        let e = Expr::parse("exp(x*u)").unwrap();
        let j = e.jet(1.0, 2.0, 2);
        assert!((j.partial(1, 1) - 3.0 * 2.0_f64.exp()).abs() < 1e-12);
    }
}
