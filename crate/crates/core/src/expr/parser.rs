//! Pratt parser for right-hand side expressions.
//!
//! Binding powers, loosest first: `+ -`, `* /`, unary minus, `^`. `^` is
//! right-associative and binds tighter than a leading minus, so `-u^2` is
//! `-(u^2)` while `2^-1` is `2^(-1)`.

use super::ast::{BinOp, Expr, ExprKind, Func, Span, Var};
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| ParseError::Syntax { offset: start, message: format!("malformed number `{text}`") })?;
            out.push(Token { tok: Tok::Num(v), span: Span::new(start, i) });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), span: Span::new(start, i) });
            continue;
        }
        let tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            _ => {
                let ch = src[start..].chars().next().expect("in bounds");
                return Err(ParseError::Syntax { offset: start, message: format!("unexpected character `{ch}`") });
            }
        };
        i += 1;
        out.push(Token { tok, span: Span::new(start, i) });
    }
    out.push(Token { tok: Tok::End, span: Span::new(src.len(), src.len()) });
    Ok(out)
}

const UNARY_BP: u8 = 5;

fn infix_binding(op: char) -> Option<(BinOp, u8, u8)> {
    match op {
        '+' => Some((BinOp::Add, 1, 2)),
        '-' => Some((BinOp::Sub, 1, 2)),
        '*' => Some((BinOp::Mul, 3, 4)),
        '/' => Some((BinOp::Div, 3, 4)),
        '^' => Some((BinOp::Pow, 7, 6)),
        _ => None,
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.bump();
        if t.tok == want {
            Ok(t)
        } else {
            Err(unexpected(&t, what))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let (op, l_bp, r_bp) = match &self.peek().tok {
                Tok::Op(c) => infix_binding(*c).expect("lexer only emits known operators"),
                _ => break,
            };
            if l_bp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.expr(r_bp)?;
            let span = lhs.span.join(rhs.span);
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Expr::new(ExprKind::Num(v), t.span)),
            Tok::Op('-') => {
                let inner = self.expr(UNARY_BP)?;
                let span = t.span.join(inner.span);
                Ok(Expr::new(ExprKind::Neg(Box::new(inner)), span))
            }
            Tok::LParen => {
                let inner = self.expr(0)?;
                let close = self.expect(Tok::RParen, "`)`")?;
                // keep the parenthesized span so errors point at the whole group
                Ok(Expr::new(inner.kind, t.span.join(close.span)))
            }
            Tok::Ident(name) => match name.as_str() {
                "t" => Ok(Expr::new(ExprKind::Var(Var::T), t.span)),
                "u" => Ok(Expr::new(ExprKind::Var(Var::U), t.span)),
                _ => {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| ParseError::UnknownIdentifier { offset: t.span.start, name: name.clone() })?;
                    self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
                    let mut args = Vec::new();
                    if self.peek().tok != Tok::RParen {
                        loop {
                            args.push(self.expr(0)?);
                            if self.peek().tok == Tok::Comma {
                                self.bump();
                                continue;
                            }
                            break;
                        }
                    }
                    let close = self.expect(Tok::RParen, "`,` or `)`")?;
                    if args.len() != func.arity() {
                        return Err(ParseError::Arity {
                            offset: t.span.start,
                            function: func.name(),
                            expected: func.arity(),
                            found: args.len(),
                        });
                    }
                    Ok(Expr::new(ExprKind::Call(func, args), t.span.join(close.span)))
                }
            },
            _ => Err(unexpected(&t, "a number, variable, function call, `-` or `(`")),
        }
    }
}

fn unexpected(t: &Token, what: &str) -> ParseError {
    let found = match &t.tok {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of input".into(),
    };
    ParseError::Syntax { offset: t.span.start, message: format!("expected {what}, found {found}") }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    if src.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr(0)?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return Err(unexpected(&t, "an operator or end of input"));
    }
    Ok(e)
}
