use super::{BinOp, Expr, ExprKind, Expression, ParseError, ParseErrorKind, Span, MAX_VARIABLES};
use crate::jets::ElementaryFn;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number { value: f64, integer: bool },
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

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

fn syntax(position: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        kind: ParseErrorKind::Syntax,
        position,
        message: format!("syntax error: {}", message.into()),
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i + 1;
        if c.is_whitespace() {
            i += 1;
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
        if let Some(tok) = single {
            out.push(Token {
                tok,
                span: Span { start, end: start + 1 },
            });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let begin = i;
            let mut integer = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                integer = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integer = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let literal: String = chars[begin..i].iter().collect();
            let value: f64 = literal
                .parse()
                .map_err(|_| syntax(start, format!("malformed number '{literal}'")))?;
            out.push(Token {
                tok: Tok::Number { value, integer },
                span: Span { start, end: i + 1 },
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[begin..i].iter().collect()),
                span: Span { start, end: i + 1 },
            });
            continue;
        }
        return Err(syntax(start, format!("unexpected character '{c}'")));
    }
    let end = chars.len() + 1;
    out.push(Token {
        tok: Tok::End,
        span: Span { start: end, end },
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self) -> ParseError {
        let t = self.peek();
        let what = match &t.tok {
            Tok::End => "unexpected end of input".to_string(),
            Tok::Number { .. } => "unexpected number".to_string(),
            Tok::Ident(name) => format!("unexpected identifier '{name}'"),
            other => format!("unexpected '{}'", tok_symbol(other)),
        };
        syntax(t.span.start, what)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.term()?;
            left = binary(op, left, right);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.unary()?;
            left = binary(op, left, right);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            let minus = self.bump();
            let inner = self.power()?;
            let span = Span {
                start: minus.span.start,
                end: inner.span.end,
            };
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if self.peek().tok == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let t = self.bump();
        match t.tok {
            Tok::Number { value, integer: true } if value <= i32::MAX as f64 => {
                let e = value as i32;
                let exponent = if negative { -e } else { e };
                let span = Span {
                    start: base.span.start,
                    end: t.span.end,
                };
                Ok(Expr {
                    kind: ExprKind::Pow(Box::new(base), exponent),
                    span,
                })
            }
            Tok::End => Err(syntax(t.span.start, "unexpected end of input after '^'")),
            _ => Err(ParseError {
                kind: ParseErrorKind::NonIntegerExponent,
                position: t.span.start,
                message: "exponent must be an integer literal".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Number { value, .. } => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Number(value),
                    span: t.span,
                })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "pi" {
                    return Ok(Expr {
                        kind: ExprKind::Pi,
                        span: t.span,
                    });
                }
                if let Some(func) = ElementaryFn::from_name(&name) {
                    if self.peek().tok != Tok::LParen {
                        return Err(self.unexpected_after(&name));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    let close = self.expect_rparen()?;
                    return Ok(Expr {
                        kind: ExprKind::Call(func, Box::new(arg)),
                        span: Span {
                            start: t.span.start,
                            end: close.end,
                        },
                    });
                }
                if let Some(index) = variable_index(&name) {
                    if index == 0 || index > self.dim || index > MAX_VARIABLES {
                        return Err(ParseError {
                            kind: ParseErrorKind::VariableOutOfRange {
                                index,
                                dim: self.dim,
                            },
                            position: t.span.start,
                            message: format!(
                                "variable index {index} exceeds chart dimension {}",
                                self.dim
                            ),
                        });
                    }
                    return Ok(Expr {
                        kind: ExprKind::Var(index),
                        span: t.span,
                    });
                }
                Err(ParseError {
                    kind: ParseErrorKind::UnknownIdentifier(name.clone()),
                    position: t.span.start,
                    message: format!("unknown identifier '{name}'"),
                })
            }
            _ => Err(self.unexpected()),
        }
    }

    fn unexpected_after(&self, name: &str) -> ParseError {
        let t = self.peek();
        syntax(t.span.start, format!("expected '(' after '{name}'"))
    }

    fn expect_rparen(&mut self) -> Result<Span, ParseError> {
        if self.peek().tok == Tok::RParen {
            Ok(self.bump().span)
        } else {
            let t = self.peek();
            Err(syntax(t.span.start, "expected ')'"))
        }
    }
}

fn tok_symbol(t: &Tok) -> &'static str {
    match t {
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Slash => "/",
        Tok::Caret => "^",
        Tok::LParen => "(",
        Tok::RParen => ")",
        _ => "?",
    }
}

fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().or(Some(usize::MAX))
}

fn binary(op: BinOp, left: Expr, right: Expr) -> Expr {
    let span = Span {
        start: left.span.start,
        end: right.span.end,
    };
    Expr {
        kind: ExprKind::Binary(op, Box::new(left), Box::new(right)),
        span,
    }
}

/// Parses `text` as a formula over `dim` chart variables.
pub fn parse(text: &str, dim: usize) -> Result<Expression, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0, dim };
    let root = parser.expr()?;
    if parser.peek().tok != Tok::End {
        return Err(parser.unexpected());
    }
    Ok(Expression::new(root, dim))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_squared_shape() {
        let e = parse("sin(x1)^2", 2).unwrap();
        match &e.root().kind {
            ExprKind::Pow(base, 2) => match &base.kind {
                ExprKind::Call(ElementaryFn::Sin, arg) => {
                    assert!(matches!(arg.kind, ExprKind::Var(1)))
                }
                other => panic!("unexpected base {other:?}"),
            },
            other => panic!("unexpected root {other:?}"),
        }
    }

    #[test]
    fn syntax_error_position() {
        let err = parse("x1 +* 2", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
        assert_eq!(err.position, 5);
    }

    #[test]
    fn identifier_errors() {
        let err = parse("y + 1", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("y".into()));
        assert_eq!(err.position, 1);
        let err = parse("x9", 4).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::VariableOutOfRange { index: 9, dim: 4 });
        let err = parse("x0", 4).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::VariableOutOfRange { index: 0, .. }));
        let err = parse("x3", 2).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::VariableOutOfRange { index: 3, dim: 2 }));
    }

    #[test]
    fn exponent_rules() {
        assert_eq!(
            parse("x1^2.5", 1).unwrap_err().kind,
            ParseErrorKind::NonIntegerExponent
        );
        assert_eq!(
            parse("x1^x1", 1).unwrap_err().kind,
            ParseErrorKind::NonIntegerExponent
        );
        let e = parse("x1^-2", 1).unwrap();
        assert!(matches!(e.root().kind, ExprKind::Pow(_, -2)));
    }

    #[test]
    fn no_implicit_multiplication() {
        assert_eq!(parse("2x1", 1).unwrap_err().kind, ParseErrorKind::Syntax);
        assert_eq!(parse("--x1", 1).unwrap_err().kind, ParseErrorKind::Syntax);
        assert_eq!(parse("sin x1", 1).unwrap_err().kind, ParseErrorKind::Syntax);
        assert_eq!(parse("(x1", 1).unwrap_err().position, 4);
        assert_eq!(parse("", 1).unwrap_err().position, 1);
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(
            parse(" x1 *  ( 2+pi ) ", 1).unwrap(),
            parse("x1*(2+pi)", 1).unwrap()
        );
    }
}
