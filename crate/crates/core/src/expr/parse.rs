//! Pratt parser for the expression grammar.
//!
//! ```text
//! expr    := expr ('+'|'-') expr | expr ('*'|'/') expr | '-' expr
//!          | expr '^' expr | atom
//! atom    := number | ident | 'y' '\''* | 'y' '^' '(' int ')'
//!          | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | sqrt
//! ```
//! `x` and `z` both name the independent variable; `eps` (or `ε`) is the small
//! parameter. `^` is right associative and binds tighter than unary minus.

use std::collections::BTreeSet;

use super::ast::{Ast, Func};
use super::linform::decimal_to_rational;
use super::ExprError;

/// Names that may appear as constants besides the built-in ones.
///
/// The default scope accepts `c`, `k`, `pi` and indexed names such as `C1`
/// or `a7`; anything else must be declared.
#[derive(Clone, Debug)]
pub struct Scope {
    declared: BTreeSet<String>,
    indexed: bool,
}

impl Default for Scope {
    fn default() -> Self {
        Scope {
            declared: ["c", "k", "pi"].iter().map(|s| s.to_string()).collect(),
            indexed: true,
        }
    }
}

impl Scope {
    /// A scope accepting only the listed names.
    pub fn strict<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Scope {
            declared: names.into_iter().map(Into::into).collect(),
            indexed: false,
        }
    }

    pub fn declare(mut self, name: impl Into<String>) -> Self {
        self.declared.insert(name.into());
        self
    }

    pub fn accepts(&self, name: &str) -> bool {
        if self.declared.contains(name) {
            return true;
        }
        if !self.indexed {
            return false;
        }
        let mut chars = name.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() => {
                let rest: String = chars.collect();
                if rest.is_empty() {
                    c.is_ascii_uppercase()
                } else {
                    rest.chars().all(|c| c.is_ascii_digit())
                }
            }
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Prime,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ExprError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, ch) = chars[i];
        let single = match ch {
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '*' | '·' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '\'' | '′' => Some(Tok::Prime),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, pos });
            i += 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            let s: String = chars[start..i].iter().map(|(_, c)| c).collect();
            out.push(Spanned {
                tok: Tok::Num(s),
                pos,
            });
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().map(|(_, c)| c).collect();
            out.push(Spanned {
                tok: Tok::Ident(s),
                pos,
            });
            continue;
        }
        return Err(ExprError::Syntax {
            pos,
            message: format!("unexpected character {ch:?}"),
        });
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    idx: usize,
    end: usize,
    scope: &'a Scope,
}

const BP_ADD: u8 = 10;
const BP_MUL: u8 = 20;
const BP_NEG: u8 = 30;
const BP_POW: u8 = 40;

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.idx + k).map(|s| &s.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |s| s.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|s| s.tok.clone());
        self.idx += 1;
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ExprError> {
        if self.peek() == Some(&tok) {
            self.idx += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Ast, ExprError> {
        let mut lhs = self.prefix()?;
        loop {
            let (lbp, rbp) = match self.peek() {
                Some(Tok::Plus) | Some(Tok::Minus) => (BP_ADD, BP_ADD + 1),
                Some(Tok::Star) | Some(Tok::Slash) => (BP_MUL, BP_MUL + 1),
                Some(Tok::Caret) => (BP_POW, BP_POW - 1),
                Some(Tok::RParen) | None => break,
                Some(_) => return self.err("expected an operator"),
            };
            if lbp < min_bp {
                break;
            }
            let op = self.next().expect("peeked");
            let rhs = self.expr(rbp)?;
            lhs = match op {
                Tok::Plus => Ast::Add(Box::new(lhs), Box::new(rhs)),
                Tok::Minus => Ast::Sub(Box::new(lhs), Box::new(rhs)),
                Tok::Star => Ast::Mul(Box::new(lhs), Box::new(rhs)),
                Tok::Slash => Ast::Div(Box::new(lhs), Box::new(rhs)),
                Tok::Caret => Ast::Pow(Box::new(lhs), Box::new(rhs)),
                _ => unreachable!("operator tokens only"),
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Ast, ExprError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Minus) => {
                let inner = self.expr(BP_NEG)?;
                Ok(Ast::Neg(Box::new(inner)))
            }
            Some(Tok::Plus) => self.expr(BP_NEG),
            Some(Tok::LParen) => {
                let inner = self.expr(0)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Num(s)) => match decimal_to_rational(&s) {
                Some(r) => Ok(Ast::Num(r)),
                None => Err(ExprError::Syntax {
                    pos,
                    message: format!("malformed number {s:?}"),
                }),
            },
            Some(Tok::Ident(name)) => self.ident(name, pos),
            Some(t) => Err(ExprError::Syntax {
                pos,
                message: format!("unexpected token {t:?}"),
            }),
            None => self.err("unexpected end of input"),
        }
    }

    fn ident(&mut self, name: String, pos: usize) -> Result<Ast, ExprError> {
        match name.as_str() {
            "x" | "z" => Ok(Ast::Indep),
            "eps" | "epsilon" | "ε" => Ok(Ast::Eps),
            "y" => {
                let mut order = 0u32;
                while self.peek() == Some(&Tok::Prime) {
                    self.idx += 1;
                    order += 1;
                }
                if order == 0 {
                    if let (
                        Some(Tok::Caret),
                        Some(Tok::LParen),
                        Some(Tok::Num(n)),
                        Some(Tok::RParen),
                    ) = (
                        self.peek(),
                        self.peek_at(1),
                        self.peek_at(2),
                        self.peek_at(3),
                    ) {
                        if let Ok(k) = n.parse::<u32>() {
                            self.idx += 4;
                            return Ok(Ast::Jet(k));
                        }
                    }
                }
                Ok(Ast::Jet(order))
            }
            "sin" | "cos" | "sqrt" => {
                let func = match name.as_str() {
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    _ => Func::Sqrt,
                };
                self.expect(Tok::LParen, &format!("'(' after {name}"))?;
                let arg = self.expr(0)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Ast::Call(func, Box::new(arg)))
            }
            _ if self.peek() == Some(&Tok::LParen) => {
                Err(ExprError::UnknownIdentifier { name, pos })
            }
            _ if self.scope.accepts(&name) => Ok(Ast::Const(name)),
            _ => Err(ExprError::UnknownIdentifier { name, pos }),
        }
    }
}

/// Parses `text` with the default scope.
pub fn parse(text: &str) -> Result<Ast, ExprError> {
    parse_in(text, &Scope::default())
}

pub fn parse_in(text: &str, scope: &Scope) -> Result<Ast, ExprError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        idx: 0,
        end: text.len(),
        scope,
    };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let e = p.expr(0)?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(a: Ast) -> Box<Ast> {
        Box::new(a)
    }

    #[test]
    fn linear_ode_tree() {
        assert_eq!(
            parse("y'' + y").unwrap(),
            Ast::Add(b(Ast::Jet(2)), b(Ast::Jet(0)))
        );
    }

    #[test]
    fn boussinesq_tree() {
        let e = parse("y'' + y - eps*(x + 1 + y^2)").unwrap();
        let inner = Ast::Add(
            b(Ast::Add(b(Ast::Indep), b(Ast::num(1)))),
            b(Ast::Pow(b(Ast::Jet(0)), b(Ast::num(2)))),
        );
        let expected = Ast::Sub(
            b(Ast::Add(b(Ast::Jet(2)), b(Ast::Jet(0)))),
            b(Ast::Mul(b(Ast::Eps), b(inner))),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn factor_tree() {
        let e = parse("(1+eps)*y'").unwrap();
        assert_eq!(
            e,
            Ast::Mul(b(Ast::Add(b(Ast::num(1)), b(Ast::Eps))), b(Ast::Jet(1)))
        );
    }

    #[test]
    fn jet_spellings() {
        assert_eq!(parse("y^(4)").unwrap(), Ast::Jet(4));
        assert_eq!(parse("y'''").unwrap(), Ast::Jet(3));
        assert_eq!(
            parse("y^2").unwrap(),
            Ast::Pow(b(Ast::Jet(0)), b(Ast::num(2)))
        );
        assert_eq!(parse("z").unwrap(), Ast::Indep);
    }

    #[test]
    fn precedence_of_unary_minus_and_power() {
        assert_eq!(
            parse("-x^2").unwrap(),
            Ast::Neg(b(Ast::Pow(b(Ast::Indep), b(Ast::num(2)))))
        );
        assert_eq!(
            parse("2^3^2").unwrap(),
            Ast::Pow(b(Ast::num(2)), b(Ast::Pow(b(Ast::num(3)), b(Ast::num(2)))))
        );
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse("y + * 2") {
            Err(ExprError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("(x + 1"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse(""), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn unknown_identifier_is_named() {
        match parse("x + foo") {
            Err(ExprError::UnknownIdentifier { name, pos }) => {
                assert_eq!(name, "foo");
                assert_eq!(pos, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("tan(x)"),
            Err(ExprError::UnknownIdentifier { .. })
        ));
        assert!(parse("C1*y + a7").is_ok());
        assert!(parse_in("A*sin(x)", &Scope::default().declare("A")).is_ok());
        assert!(parse_in("C1", &Scope::strict(["c"])).is_err());
    }
}
