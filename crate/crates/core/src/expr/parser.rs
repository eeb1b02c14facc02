//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | ident '(' args ')' | '(' expr ')'
//! ```

use super::{BinOp, Constant, ExprError, Func, Node, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer {
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Lexer {
    fn new(src: &str) -> Self {
        // Columns count characters, 1-based.
        let chars = src.chars().enumerate().map(|(i, c)| (i + 1, c)).collect();
        Lexer { chars, pos: 0 }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Token)>> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
                self.pos += 1;
            }
            let Some(&(col, c)) = self.chars.get(self.pos) else {
                let end = self.chars.last().map_or(1, |&(i, _)| i + 1);
                out.push((end, Token::End));
                return Ok(out);
            };
            let tok = match c {
                '0'..='9' | '.' => self.number(col)?,
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = self.pos;
                    while self
                        .chars
                        .get(self.pos)
                        .is_some_and(|&(_, c)| c.is_ascii_alphanumeric() || c == '_')
                    {
                        self.pos += 1;
                    }
                    Token::Ident(
                        self.chars[start..self.pos]
                            .iter()
                            .map(|&(_, c)| c)
                            .collect(),
                    )
                }
                '+' | '-' | '*' | '/' | '^' => {
                    self.pos += 1;
                    Token::Op(c)
                }
                '(' => {
                    self.pos += 1;
                    Token::LParen
                }
                ')' => {
                    self.pos += 1;
                    Token::RParen
                }
                ',' => {
                    self.pos += 1;
                    Token::Comma
                }
                other => {
                    return Err(ExprError::Syntax {
                        column: col,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            };
            out.push((col, tok));
        }
    }

    fn number(&mut self, col: usize) -> Result<Token> {
        let start = self.pos;
        let peek = |s: &Self, off: usize| s.chars.get(s.pos + off).map(|&(_, c)| c);
        while peek(self, 0).is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(peek(self, 0), Some('e' | 'E')) {
            let (sign, digit) = (peek(self, 1), peek(self, 2));
            let has_exp = match sign {
                Some('+' | '-') => digit.is_some_and(|c| c.is_ascii_digit()),
                Some(c) => c.is_ascii_digit(),
                None => false,
            };
            if has_exp {
                self.pos += if matches!(sign, Some('+' | '-')) {
                    2
                } else {
                    1
                };
                while peek(self, 0).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text: String = self.chars[start..self.pos]
            .iter()
            .map(|&(_, c)| c)
            .collect();
        text.parse::<f64>()
            .map(Token::Num)
            .map_err(|_| ExprError::Syntax {
                column: col,
                message: format!("malformed number `{text}`"),
            })
    }
}

struct Parser<'c> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    coords: &'c [String],
}

pub(super) fn parse(text: &str, coords: &[String]) -> Result<Node> {
    let tokens = Lexer::new(text).tokens()?;
    let mut p = Parser {
        tokens,
        pos: 0,
        coords,
    };
    let node = p.expr()?;
    match p.peek() {
        Token::End => Ok(node),
        other => Err(p.unexpected(&other.clone())),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn column(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn advance(&mut self) -> (usize, Token) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, tok: &Token) -> ExprError {
        let message = match tok {
            Token::End => "unexpected end of input".to_string(),
            Token::Num(v) => format!("unexpected number {v}"),
            Token::Ident(s) => format!("unexpected identifier `{s}`"),
            Token::Op(c) => format!("unexpected operator `{c}`"),
            Token::LParen => "unexpected `(`".to_string(),
            Token::RParen => "unexpected `)`".to_string(),
            Token::Comma => "unexpected `,`".to_string(),
        };
        ExprError::Syntax {
            column: self.column(),
            message,
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Token::Op(c @ ('+' | '-')) = *self.peek() {
            self.advance();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Token::Op(c @ ('*' | '/')) = *self.peek() {
            self.advance();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match *self.peek() {
            Token::Op('-') => {
                self.advance();
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Token::Op('+') => {
                self.advance();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if let Token::Op('^') = self.peek() {
            self.advance();
            let exponent = self.unary()?;
            if !exponent.is_constant() {
                let mut expr = String::new();
                Node::Pow(Box::new(base), Box::new(exponent)).write(self.coords, &mut expr);
                return Err(ExprError::NonConstantExponent { expr });
            }
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        let (column, tok) = self.advance();
        match tok {
            Token::Num(v) => Ok(Node::Num(v)),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if matches!(self.peek(), Token::LParen) {
                    let Some(func) = Func::lookup(&name) else {
                        return Err(ExprError::UnknownIdentifier { name, column });
                    };
                    self.advance();
                    let args = self.arguments()?;
                    if args.len() != 1 {
                        return Err(ExprError::Arity {
                            name,
                            expected: 1,
                            found: args.len(),
                        });
                    }
                    let arg = args.into_iter().next().expect("one argument");
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                if let Some(i) = self.coords.iter().position(|c| *c == name) {
                    return Ok(Node::Var(i));
                }
                if let Some(c) = Constant::lookup(&name) {
                    return Ok(Node::Const(c));
                }
                if let Some(f) = Func::lookup(&name) {
                    return Err(ExprError::Arity {
                        name: f.name().to_string(),
                        expected: 1,
                        found: 0,
                    });
                }
                Err(ExprError::UnknownIdentifier { name, column })
            }
            other => {
                self.pos = self
                    .pos
                    .saturating_sub(usize::from(!matches!(other, Token::End)));
                Err(ExprError::Syntax {
                    column,
                    message: match other {
                        Token::End => "unexpected end of input".into(),
                        Token::Op(c) => format!("unexpected operator `{c}`"),
                        Token::RParen => "unexpected `)`".into(),
                        Token::Comma => "unexpected `,`".into(),
                        _ => "unexpected token".into(),
                    },
                })
            }
        }
    }

    fn arguments(&mut self) -> Result<Vec<Node>> {
        let mut args = Vec::new();
        if matches!(self.peek(), Token::RParen) {
            self.advance();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            match self.peek() {
                Token::Comma => {
                    self.advance();
                }
                Token::RParen => {
                    self.advance();
                    return Ok(args);
                }
                other => return Err(self.unexpected(&other.clone())),
            }
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.peek() {
            Token::RParen => {
                self.advance();
                Ok(())
            }
            other => Err(self.unexpected(&other.clone())),
        }
    }
}
