//! Tokenizer shared by the term reader and the grammar file reader.

use std::fmt;

use thiserror::Error;

/// 1-based line and column of a token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at {location}: {message}")]
pub struct SyntaxError {
    pub location: Location,
    pub message: String,
}

impl SyntaxError {
    pub fn new(location: Location, message: impl Into<String>) -> Self {
        SyntaxError {
            location,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase identifier, number, `$name` or `'quoted'` atom.
    Atom(String),
    /// Identifier starting with an uppercase letter or `_`.
    Var(String),
    /// Double-quoted string (lexicon words).
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Equals,
    Arrow,
    Dot,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Atom(a) => write!(f, "`{a}`"),
            Tok::Var(v) => write!(f, "variable `{v}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Equals => f.write_str("`=`"),
            Tok::Arrow => f.write_str("`=>`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub location: Location,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Splits `src` into tokens. `%` starts a comment running to end of line.
pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let mut line = 1;
    let mut column = 1;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let location = Location { line, column };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }
        let tok = match c {
            '(' => {
                bump!();
                Tok::LParen
            }
            ')' => {
                bump!();
                Tok::RParen
            }
            '[' => {
                bump!();
                Tok::LBracket
            }
            ']' => {
                bump!();
                Tok::RBracket
            }
            ',' => {
                bump!();
                Tok::Comma
            }
            ':' => {
                bump!();
                Tok::Colon
            }
            '.' => {
                bump!();
                Tok::Dot
            }
            '=' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    Tok::Arrow
                } else {
                    Tok::Equals
                }
            }
            '"' | '\'' => {
                let quote = c;
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        None => return Err(SyntaxError::new(location, "unterminated quoted text")),
                        Some('\\') => match bump!() {
                            Some(e) => s.push(e),
                            None => {
                                return Err(SyntaxError::new(location, "unterminated quoted text"))
                            }
                        },
                        Some(ch) if ch == quote => break,
                        Some(ch) => s.push(ch),
                    }
                }
                if quote == '"' {
                    Tok::Str(s)
                } else {
                    Tok::Atom(s)
                }
            }
            '$' => {
                bump!();
                let mut s = String::from("$");
                while let Some(&ch) = chars.peek() {
                    if !is_ident_char(ch) {
                        break;
                    }
                    s.push(ch);
                    bump!();
                }
                Tok::Atom(s)
            }
            c if is_ident_char(c) => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if !is_ident_char(ch) {
                        break;
                    }
                    s.push(ch);
                    bump!();
                }
                if c.is_uppercase() || c == '_' {
                    Tok::Var(s)
                } else {
                    Tok::Atom(s)
                }
            }
            other => {
                return Err(SyntaxError::new(
                    location,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        out.push(Token { tok, location });
    }
    out.push(Token {
        tok: Tok::Eof,
        location: Location { line, column },
    });
    Ok(out)
}

/// Cursor over a token vector.
pub struct Tokens {
    toks: Vec<Token>,
    pos: usize,
}

impl Tokens {
    pub fn new(src: &str) -> Result<Self, SyntaxError> {
        Ok(Tokens {
            toks: tokenize(src)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn location(&self) -> Location {
        self.toks[self.pos].location
    }

    pub fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        let t = self.advance();
        if t.tok == tok {
            Ok(())
        } else {
            Err(SyntaxError::new(
                t.location,
                format!("expected {tok}, found {}", t.tok),
            ))
        }
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn is_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_locations() {
        let toks = tokenize("rule r1: s => [np]. % comment\nlex \"walks\": v.").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(kinds[0], Tok::Atom("rule".into()));
        assert_eq!(kinds[3], Tok::Atom("s".into()));
        assert_eq!(kinds[4], Tok::Arrow);
        assert!(kinds.contains(&Tok::Str("walks".into())));
        let lex = toks.iter().find(|t| t.tok == Tok::Atom("lex".into())).unwrap();
        assert_eq!(lex.location, Location { line: 2, column: 1 });
    }

    #[test]
    fn unterminated_string() {
        let err = tokenize("lex \"oops").unwrap_err();
        assert_eq!(err.location, Location { line: 1, column: 5 });
    }

    #[test]
    fn variables_and_special_atoms() {
        let toks = tokenize("f(X, _, _3, $end, 'Det')").unwrap();
        assert_eq!(toks[2].tok, Tok::Var("X".into()));
        assert_eq!(toks[4].tok, Tok::Var("_".into()));
        assert_eq!(toks[6].tok, Tok::Var("_3".into()));
        assert_eq!(toks[8].tok, Tok::Atom("$end".into()));
        assert_eq!(toks[10].tok, Tok::Atom("Det".into()));
    }
}
