//! A small arithmetic expression language for metric components.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '×' | '/' | '÷') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'u1' | 'u2' | 'u3' | 'pi' | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | sinh | cosh | exp | log
//! ```

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Log,
}

impl Func {
    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, u: &[f64; 3]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => u[*i],
            Expr::Neg(a) => -a.eval(u),
            Expr::Add(a, b) => a.eval(u) + b.eval(u),
            Expr::Sub(a, b) => a.eval(u) - b.eval(u),
            Expr::Mul(a, b) => a.eval(u) * b.eval(u),
            Expr::Div(a, b) => a.eval(u) / b.eval(u),
            Expr::Pow(a, b) => {
                let base = a.eval(u);
                match **b {
                    Expr::Num(e) if e.fract() == 0.0 && e.abs() < 64.0 => base.powi(e as i32),
                    _ => base.powf(b.eval(u)),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(u)),
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

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent suffix, e.g. 1e-3
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text
                    .parse::<f64>()
                    .map_err(|_| Error::Expression(format!("bad number `{text}`")))?;
                out.push(Token::Num(v));
            }
            c if c.is_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            '+' | '-' | '*' | '/' | '^' | '×' | '÷' => {
                let op = match c {
                    '×' => '*',
                    '÷' => '/',
                    o => o,
                };
                out.push(Token::Op(op));
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            other => return Err(Error::Expression(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
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

    fn term(&mut self) -> Result<Expr> {
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

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "u1" => Ok(Expr::Var(0)),
                "u2" => Ok(Expr::Var(1)),
                "u3" => Ok(Expr::Var(2)),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                f => {
                    let func = match f {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "sinh" => Func::Sinh,
                        "cosh" => Func::Cosh,
                        "exp" => Func::Exp,
                        "log" => Func::Log,
                        _ => return Err(Error::Expression(format!("unknown identifier `{f}`"))),
                    };
                    match self.next() {
                        Some(Token::LParen) => {}
                        _ => return Err(Error::Expression(format!("expected `(` after `{f}`"))),
                    }
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::Call(func, Box::new(arg)))
                }
            },
            Some(t) => Err(Error::Expression(format!("unexpected token {t:?}"))),
            None => Err(Error::Expression("unexpected end of expression".into())),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.next() {
            Some(Token::RParen) => Ok(()),
            _ => Err(Error::Expression("expected `)`".into())),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser {
        tokens: tokenize(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::Expression(format!("trailing input in `{src}`")));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, u: [f64; 3]) -> f64 {
        parse(s).unwrap().eval(&u)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", [0.0; 3]), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", [0.0; 3]), 512.0);
        assert_eq!(ev("-2 ^ 2", [0.0; 3]), -4.0);
        assert_eq!(ev("8 ÷ 4 × 2", [0.0; 3]), 4.0);
        assert_eq!(ev("(1 - 2) - 3", [0.0; 3]), -4.0);
    }

    #[test]
    fn variables_and_functions() {
        let u = [0.5, 2.0, -1.0];
        assert!((ev("sin(u1)^2 + cos(u1)^2", u) - 1.0).abs() < 1e-15);
        assert!((ev("exp(log(u2))", u) - 2.0).abs() < 1e-15);
        assert!((ev("cosh(u3)^2 - sinh(u3)^2", u) - 1.0).abs() < 1e-14);
        assert_eq!(ev("1/u2^2", u), 0.25);
        assert_eq!(ev("1e-2 * u2", u), 0.02);
        assert!((ev("pi", u) - std::f64::consts::PI).abs() == 0.0);
    }

    #[test]
    fn malformed_input_is_rejected() {
        for bad in ["1 +", "sin 2", "u4", "(1", "1 2", "3 $ 4", "tan(u1)"] {
            assert!(parse(bad).is_err(), "{bad} should fail");
        }
    }
}
