//! Recursive-descent parser for the LTL concrete syntax.
//!
//! Precedence, tightest first: unary `!`, `X`, `F`/`<>`, `G`/`[]`; then `U`
//! and `R` (right-associative); then `&&`; then `||`; then `->`
//! (right-associative). `U` binding tighter than `&&` means `! a U b`
//! parses as `(! a) U b`.

use std::collections::BTreeSet;

use crate::error::LtlError;

use super::LtlAst;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    Next,
    Finally,
    Globally,
    Until,
    Release,
    And,
    Or,
    Implies,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<Vec<(Tok, usize)>, LtlError> {
        let mut lx = Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        while let Some(t) = lx.next_token()? {
            out.push(t);
        }
        Ok(out)
    }

    fn next_token(&mut self) -> Result<Option<(Tok, usize)>, LtlError> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        let rest = &self.src[start..];
        let sym = [
            ("&&", Tok::And),
            ("||", Tok::Or),
            ("->", Tok::Implies),
            ("<>", Tok::Finally),
            ("[]", Tok::Globally),
            ("!", Tok::Not),
            ("(", Tok::LParen),
            (")", Tok::RParen),
        ];
        for (s, t) in sym {
            if rest.starts_with(s) {
                self.pos += s.len();
                return Ok(Some((t, start)));
            }
        }
        let c = self.bytes[start];
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut end = start;
            while end < self.bytes.len()
                && (self.bytes[end].is_ascii_alphanumeric() || self.bytes[end] == b'_')
            {
                end += 1;
            }
            self.pos = end;
            let word = &self.src[start..end];
            let t = match word {
                "true" => Tok::True,
                "false" => Tok::False,
                "X" => Tok::Next,
                "F" => Tok::Finally,
                "G" => Tok::Globally,
                "U" => Tok::Until,
                "R" => Tok::Release,
                _ => Tok::Ident(word.to_string()),
            };
            return Ok(Some((t, start)));
        }
        Err(LtlError::Syntax {
            position: start,
            message: format!("unexpected character `{}`", rest.chars().next().unwrap()),
        })
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
    atoms: &'a BTreeSet<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> LtlError {
        LtlError::Syntax {
            position: self.pos(),
            message: message.into(),
        }
    }

    fn implies(&mut self) -> Result<LtlAst, LtlError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.bump();
            let rhs = self.implies()?;
            return Ok(LtlAst::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<LtlAst, LtlError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            let rhs = self.and()?;
            lhs = LtlAst::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<LtlAst, LtlError> {
        let mut lhs = self.until()?;
        while self.peek() == Some(&Tok::And) {
            self.bump();
            let rhs = self.until()?;
            lhs = LtlAst::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<LtlAst, LtlError> {
        let lhs = self.unary()?;
        match self.peek() {
            Some(Tok::Until) => {
                self.bump();
                let rhs = self.until()?;
                Ok(LtlAst::Until(Box::new(lhs), Box::new(rhs)))
            }
            Some(Tok::Release) => {
                self.bump();
                let rhs = self.until()?;
                Ok(LtlAst::Release(Box::new(lhs), Box::new(rhs)))
            }
            _ => Ok(lhs),
        }
    }

    fn unary(&mut self) -> Result<LtlAst, LtlError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Ok(LtlAst::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Next) => {
                self.bump();
                Ok(LtlAst::Next(Box::new(self.unary()?)))
            }
            Some(Tok::Finally) => {
                self.bump();
                Ok(LtlAst::Eventually(Box::new(self.unary()?)))
            }
            Some(Tok::Globally) => {
                self.bump();
                Ok(LtlAst::Always(Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<LtlAst, LtlError> {
        let position = self.pos();
        match self.bump() {
            Some(Tok::True) => Ok(LtlAst::True),
            Some(Tok::False) => Ok(LtlAst::False),
            Some(Tok::Ident(name)) => {
                if self.atoms.contains(&name) {
                    Ok(LtlAst::Atom(name))
                } else {
                    Err(LtlError::UndeclaredAtom {
                        atom: name,
                        position,
                    })
                }
            }
            Some(Tok::LParen) => {
                let inner = self.implies()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(LtlError::Syntax {
                        position,
                        message: "unclosed parenthesis".to_string(),
                    }),
                }
            }
            Some(t) => Err(LtlError::Syntax {
                position,
                message: format!("expected a formula, found {t:?}"),
            }),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Parses an LTL formula over the declared region atoms.
pub fn parse_ltl(text: &str, atoms: &BTreeSet<String>) -> Result<LtlAst, LtlError> {
    let toks = Lexer::tokenize(text)?;
    let mut parser = Parser {
        toks,
        idx: 0,
        end: text.len(),
        atoms,
    };
    let ast = parser.implies()?;
    if parser.idx < parser.toks.len() {
        return Err(parser.err("trailing input after formula"));
    }
    Ok(ast)
}
