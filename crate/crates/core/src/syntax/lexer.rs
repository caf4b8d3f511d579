use std::fmt;

use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// `'...'`, used for generated names that are not plain identifiers.
    Quoted(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Slash,
    Neck,
    Arrow,
    QueryStart,
    Not,
    Plus,
    Minus,
    Star,
    IntDiv,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Quoted(s) => return write!(f, "'{s}'"),
            Tok::Int(i) => return write!(f, "`{i}`"),
            Tok::Str(_) => "string",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Dot => "`.`",
            Tok::Slash => "`/`",
            Tok::Neck => "`:-`",
            Tok::Arrow => "`->`",
            Tok::QueryStart => "`?-`",
            Tok::Not => "`\\+`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::IntDiv => "`//`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::Eq => "`=`",
            Tok::Ne => "`\\=`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, expected: &str, found: String| SyntaxError {
        line,
        col,
        expected: expected.to_string(),
        found,
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let peek = chars.get(i + 1).copied();
        let (tok, len) = if ident_start(c) {
            let mut j = i + 1;
            loop {
                while j < chars.len() && ident_char(chars[j]) {
                    j += 1;
                }
                // A hyphen joins two identifier runs only when written without spaces.
                if j + 1 < chars.len() && chars[j] == '-' && ident_char(chars[j + 1]) {
                    j += 1;
                } else {
                    break;
                }
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            let v = s
                .parse::<i64>()
                .map_err(|_| err(line, col, "integer in range", s.clone()))?;
            (Tok::Int(v), j - i)
        } else if c == '"' || c == '\'' {
            let quote = c;
            let mut j = i + 1;
            let mut s = String::new();
            loop {
                match chars.get(j) {
                    None | Some('\n') => {
                        return Err(err(line, col, "closing quote", "end of line".into()))
                    }
                    Some('\\') if quote == '"' => {
                        match chars.get(j + 1) {
                            Some('n') => s.push('\n'),
                            Some(&e @ ('"' | '\\')) => s.push(e),
                            other => {
                                return Err(err(
                                    line,
                                    col + j - i,
                                    "escape sequence",
                                    other.map(|c| c.to_string()).unwrap_or_default(),
                                ))
                            }
                        }
                        j += 2;
                    }
                    Some(&q) if q == quote => break,
                    Some(&ch) => {
                        s.push(ch);
                        j += 1;
                    }
                }
            }
            let tok = if quote == '"' {
                Tok::Str(s)
            } else {
                Tok::Quoted(s)
            };
            (tok, j + 1 - i)
        } else {
            match (c, peek) {
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                (',', _) => (Tok::Comma, 1),
                ('.', _) => (Tok::Dot, 1),
                ('/', Some('/')) => (Tok::IntDiv, 2),
                ('/', _) => (Tok::Slash, 1),
                (':', Some('-')) => (Tok::Neck, 2),
                ('-', Some('>')) => (Tok::Arrow, 2),
                ('-', _) => (Tok::Minus, 1),
                ('?', Some('-')) => (Tok::QueryStart, 2),
                ('\\', Some('+')) => (Tok::Not, 2),
                ('\\', Some('=')) => (Tok::Ne, 2),
                ('+', _) => (Tok::Plus, 1),
                ('*', _) => (Tok::Star, 1),
                ('<', Some('=')) => (Tok::Le, 2),
                ('<', _) => (Tok::Lt, 1),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('>', _) => (Tok::Gt, 1),
                ('=', _) => (Tok::Eq, 1),
                _ => return Err(err(line, col, "token", c.to_string())),
            }
        };
        out.push(Token {
            tok,
            line: start_line,
            col: start_col,
        });
        i += len;
        col += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}
