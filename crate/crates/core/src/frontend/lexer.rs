//! Tokens of the formula language. Unicode symbols are folded into their
//! ASCII spellings here, so the parser sees one vocabulary.

use std::fmt;

use serde::Serialize;

/// Byte offsets into the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        SourceSpan { start, end }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Word(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Colon,
    Comma,
    Semi,
    Dot,
    Assign,
    Tilde,
    Amp,
    Bar,
    Arrow,
    Iff,
    /// `∅`, the same as `{}`.
    Empty,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Assign => "`=`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::Empty => "`∅`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// A character the lexer could not place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub span: SourceSpan,
    pub found: char,
}

fn word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '/' | '\'' | '+' | '*')
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if word_char(c) {
            let mut end = start;
            while let Some(&(i, d)) = chars.peek() {
                if !word_char(d) {
                    break;
                }
                end = i + d.len_utf8();
                chars.next();
            }
            out.push(Token {
                tok: Tok::Word(src[start..end].to_string()),
                span: SourceSpan::new(start, end),
            });
            continue;
        }
        chars.next();
        let single = |tok: Tok| Token {
            tok,
            span: SourceSpan::new(start, start + c.len_utf8()),
        };
        let word = |w: &str| single(Tok::Word(w.to_string()));
        let token = match c {
            '{' => single(Tok::LBrace),
            '}' => single(Tok::RBrace),
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            ':' => single(Tok::Colon),
            ',' => single(Tok::Comma),
            ';' => single(Tok::Semi),
            '.' => single(Tok::Dot),
            '=' => single(Tok::Assign),
            '~' | '¬' => single(Tok::Tilde),
            '&' | '∧' => single(Tok::Amp),
            '|' | '∨' => single(Tok::Bar),
            '→' => single(Tok::Arrow),
            '↔' => single(Tok::Iff),
            '∅' => single(Tok::Empty),
            '∈' => word("in"),
            '≈' => word("eq"),
            '∀' => word("forall"),
            '∃' => word("exists"),
            '-' if matches!(chars.peek(), Some(&(_, '>'))) => {
                chars.next();
                Token {
                    tok: Tok::Arrow,
                    span: SourceSpan::new(start, start + 2),
                }
            }
            '<' if src[start..].starts_with("<->") => {
                chars.next();
                chars.next();
                Token {
                    tok: Tok::Iff,
                    span: SourceSpan::new(start, start + 3),
                }
            }
            other => {
                return Err(LexError {
                    span: SourceSpan::new(start, start + other.len_utf8()),
                    found: other,
                })
            }
        };
        out.push(token);
    }
    out.push(Token {
        tok: Tok::Eof,
        span: SourceSpan::new(src.len(), src.len()),
    });
    Ok(out)
}
