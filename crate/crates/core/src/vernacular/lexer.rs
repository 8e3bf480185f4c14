use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Dot,
    Colon,
    ColonEq,
    Eq,
    Arrow,
    LParen,
    RParen,
    LBrack,
    RBrack,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::ColonEq => "`:=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Byte offset of the token in the source.
    pub offset: usize,
}

pub fn lex(src: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    let advance = |c: char, line: &mut usize, col: &mut usize| {
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let (off, c) = chars[i];
        let next = chars.get(i + 1).map(|&(_, c)| c);
        if c.is_whitespace() {
            advance(c, &mut line, &mut col);
            i += 1;
            continue;
        }
        if c == '(' && next == Some('*') {
            let (sl, sc) = (line, col);
            let mut depth = 0usize;
            loop {
                if i >= chars.len() {
                    return Err(Error::UnterminatedComment { line: sl, col: sc });
                }
                let c = chars[i].1;
                let n = chars.get(i + 1).map(|&(_, c)| c);
                if c == '(' && n == Some('*') {
                    depth += 1;
                    col += 2;
                    i += 2;
                } else if c == '*' && n == Some(')') {
                    depth -= 1;
                    col += 2;
                    i += 2;
                    if depth == 0 {
                        break;
                    }
                } else {
                    advance(c, &mut line, &mut col);
                    i += 1;
                }
            }
            continue;
        }
        let (tok, len) = match c {
            '.' => (Tok::Dot, 1),
            ':' if next == Some('=') => (Tok::ColonEq, 2),
            ':' => (Tok::Colon, 1),
            '=' => (Tok::Eq, 1),
            '-' if next == Some('>') => (Tok::Arrow, 2),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBrack, 1),
            ']' => (Tok::RBrack, 1),
            c if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && (chars[j].1.is_ascii_alphanumeric() || matches!(chars[j].1, '_' | '\'')) {
                    j += 1;
                }
                let s: String = chars[i..j].iter().map(|&(_, c)| c).collect();
                (Tok::Ident(s), j - i)
            }
            ch => return Err(Error::BadChar { line, col, ch }),
        };
        out.push(Spanned { tok, line, col, offset: off });
        col += len;
        i += len;
    }
    Ok(out)
}
