//! S-expression reader with source positions.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SExp {
    Sym(String, Pos),
    Str(String, Pos),
    List(Vec<SExp>, Pos),
}

impl SExp {
    pub fn pos(&self) -> Pos {
        match self {
            SExp::Sym(_, p) | SExp::Str(_, p) | SExp::List(_, p) => *p,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            SExp::Sym(s, _) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExp]> {
        match self {
            SExp::List(items, _) => Some(items),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SexpError {
    pub pos: Pos,
    pub msg: String,
}

pub fn read_all(text: &str) -> Result<Vec<SExp>, SexpError> {
    let mut lexer = Lexer::new(text);
    let mut out = Vec::new();
    loop {
        match lexer.next_token()? {
            None => return Ok(out),
            Some(tok) => out.push(read_from(&mut lexer, tok)?),
        }
    }
}

#[derive(Debug)]
enum Tok {
    LParen(Pos),
    RParen(Pos),
    Sym(String, Pos),
    Str(String, Pos),
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn next_token(&mut self) -> Result<Option<Tok>, SexpError> {
        loop {
            let Some(&c) = self.chars.peek() else {
                return Ok(None);
            };
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            if c == ';' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
                continue;
            }
            let pos = self.pos();
            if c == '(' {
                self.bump();
                return Ok(Some(Tok::LParen(pos)));
            }
            if c == ')' {
                self.bump();
                return Ok(Some(Tok::RParen(pos)));
            }
            if c == '"' {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => {
                            return Err(SexpError {
                                pos,
                                msg: "unterminated string literal".into(),
                            })
                        }
                        Some('"') => {
                            // SMT-LIB escapes a quote by doubling it
                            if self.chars.peek() == Some(&'"') {
                                self.bump();
                                s.push('"');
                            } else {
                                break;
                            }
                        }
                        Some(c) => s.push(c),
                    }
                }
                return Ok(Some(Tok::Str(s, pos)));
            }
            if c == '|' {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => {
                            return Err(SexpError {
                                pos,
                                msg: "unterminated quoted symbol".into(),
                            })
                        }
                        Some('|') => break,
                        Some(c) => s.push(c),
                    }
                }
                return Ok(Some(Tok::Sym(s, pos)));
            }
            // bare symbol / numeral / keyword
            let mut s = String::new();
            while let Some(&c) = self.chars.peek() {
                if c.is_whitespace() || c == '(' || c == ')' || c == ';' || c == '"' {
                    break;
                }
                s.push(c);
                self.bump();
            }
            return Ok(Some(Tok::Sym(s, pos)));
        }
    }
}

fn read_from(lexer: &mut Lexer, tok: Tok) -> Result<SExp, SexpError> {
    match tok {
        Tok::Sym(s, p) => Ok(SExp::Sym(s, p)),
        Tok::Str(s, p) => Ok(SExp::Str(s, p)),
        Tok::RParen(p) => Err(SexpError {
            pos: p,
            msg: "unexpected `)`".into(),
        }),
        Tok::LParen(p) => {
            let mut items = Vec::new();
            loop {
                match lexer.next_token()? {
                    None => {
                        return Err(SexpError {
                            pos: p,
                            msg: "unclosed `(`".into(),
                        })
                    }
                    Some(Tok::RParen(_)) => return Ok(SExp::List(items, p)),
                    Some(tok) => items.push(read_from(lexer, tok)?),
                }
            }
        }
    }
}
