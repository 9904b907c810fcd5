//! Recursive-descent parser for the ASCII surface syntax.
//!
//! ```text
//! type := "Nat" | type "->" type | type "*" type | "(" type ")"
//! term := var | "\" var ":" type "." term | term term | "<" term "," term ">"
//!       | "p1" | "p2" | "rec" | "0" | "S" | natlit | term "(+)" term
//!       | "rand" | "fixr" | "(" term ")"
//! ```
//! `<a, b, c>` abbreviates `<a, <b, c>>`. Comments run from `--` to the end
//! of the line.

use thiserror::Error;

use super::print::KEYWORDS;
use super::term::Term;
use super::types::Type;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Backslash,
    Colon,
    Dot,
    LParen,
    RParen,
    Lt,
    Gt,
    Comma,
    Arrow,
    Star,
    Oplus,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Nat(n) => format!("`{n}`"),
            Tok::Backslash => "`\\`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Dot => "`.`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Star => "`*`".into(),
            Tok::Oplus => "`(+)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Lexed>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| ParseError { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            adv(1, &mut i, &mut col);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let simple = match c {
            '\\' | 'λ' => Some(Tok::Backslash),
            ':' => Some(Tok::Colon),
            '.' => Some(Tok::Dot),
            ')' => Some(Tok::RParen),
            '<' => Some(Tok::Lt),
            '>' => Some(Tok::Gt),
            ',' => Some(Tok::Comma),
            '*' => Some(Tok::Star),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Lexed { tok, line: l0, col: c0 });
            adv(1, &mut i, &mut col);
            continue;
        }
        if c == '(' {
            if chars.get(i + 1) == Some(&'+') && chars.get(i + 2) == Some(&')') {
                out.push(Lexed { tok: Tok::Oplus, line: l0, col: c0 });
                adv(3, &mut i, &mut col);
            } else {
                out.push(Lexed { tok: Tok::LParen, line: l0, col: c0 });
                adv(1, &mut i, &mut col);
            }
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Lexed { tok: Tok::Arrow, line: l0, col: c0 });
            adv(2, &mut i, &mut col);
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
                col += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse::<u64>().map_err(|_| err(l0, c0, format!("numeral `{s}` is too large")))?;
            out.push(Lexed { tok: Tok::Nat(n), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
                col += 1;
            }
            out.push(Lexed { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, col: c0 });
            continue;
        }
        return Err(err(l0, c0, format!("unexpected character `{c}`")));
    }
    out.push(Lexed { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let l = &self.toks[self.pos];
        ParseError { line: l.line, col: l.col, msg: msg.into() }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", want.describe(), self.peek().describe())))
        }
    }

    // type := prod ("->" type)?
    fn ty(&mut self) -> Result<Type, ParseError> {
        let lhs = self.ty_prod()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            Ok(Type::arrow(lhs, self.ty()?))
        } else {
            Ok(lhs)
        }
    }

    fn ty_prod(&mut self) -> Result<Type, ParseError> {
        let lhs = self.ty_atom()?;
        if *self.peek() == Tok::Star {
            self.bump();
            Ok(Type::product(lhs, self.ty_prod()?))
        } else {
            Ok(lhs)
        }
    }

    fn ty_atom(&mut self) -> Result<Type, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "Nat" => {
                self.bump();
                Ok(Type::Nat)
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            t => Err(self.error(format!("expected a type, found {}", t.describe()))),
        }
    }

    // term := app ("(+)" term)?
    fn term(&mut self) -> Result<Term, ParseError> {
        let lhs = self.app()?;
        if *self.peek() == Tok::Oplus {
            self.bump();
            Ok(Term::choice(lhs, self.term()?))
        } else {
            Ok(lhs)
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::Nat(_) | Tok::LParen | Tok::Lt | Tok::Backslash)
    }

    // app := atom+ where a lambda may only come last (its body extends right)
    fn app(&mut self) -> Result<Term, ParseError> {
        if !self.starts_atom() {
            return Err(self.error(format!("expected a term, found {}", self.peek().describe())));
        }
        let mut head = self.atom()?;
        while self.starts_atom() {
            let last = *self.peek() == Tok::Backslash;
            let arg = self.atom()?;
            head = Term::app(head, arg);
            if last {
                break;
            }
        }
        Ok(head)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        let save = self.pos;
        match self.bump() {
            Tok::Nat(n) => Ok(Term::num(n)),
            Tok::Ident(s) => Ok(match s.as_str() {
                "p1" => Term::proj1(),
                "p2" => Term::proj2(),
                "rec" => Term::rec(),
                "S" => Term::succ(),
                "rand" => Term::rand(),
                "fixr" => Term::fixran(),
                "Nat" => {
                    self.pos = save;
                    return Err(self.error("`Nat` is a type, not a term"));
                }
                "srand" => {
                    self.pos = save;
                    return Err(self.error("`srand` has no surface syntax"));
                }
                _ => Term::var(&s),
            }),
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Lt => {
                let mut items = vec![self.term()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    items.push(self.term()?);
                }
                if items.len() < 2 {
                    return Err(self.error(format!("expected `,`, found {}", self.peek().describe())));
                }
                self.expect(Tok::Gt)?;
                Ok(Term::tuple(items))
            }
            Tok::Backslash => {
                let save = self.pos;
                let name = match self.bump() {
                    Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => s,
                    t => {
                        self.pos = save;
                        return Err(self.error(format!("expected a variable name, found {}", t.describe())));
                    }
                };
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                self.expect(Tok::Dot)?;
                let body = self.term()?;
                Ok(Term::lam(&name, ty, body))
            }
            t => {
                self.pos = save;
                Err(self.error(format!("expected a term, found {}", t.describe())))
            }
        }
    }
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {} after the term", p.peek().describe())));
    }
    Ok(t)
}

pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let t = p.ty()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {} after the type", p.peek().describe())));
    }
    Ok(t)
}
