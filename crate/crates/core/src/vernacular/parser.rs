use super::lexer::{lex, Spanned, Tok};
use crate::error::{Error, Result};
use crate::term::{Name, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Parameter,
    Axiom,
    Variable,
    Hypothesis,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Declare { kind: DeclKind, name: Name, ty: Option<Term> },
    Assumes(Term),
    Definition { name: Name, ty: Option<Term>, body: Term },
    Theorem { name: Name, ty: Option<Term> },
    Remark { name: Name, ty: Option<Term> },
    Goal(Term),
    Statement(Term),
    Proof(Term),
    Section(Name),
    End(Name),
    Save(Option<Name>),
    Intro(Option<Name>),
    Apply(Term),
    Assumption(Name),
    Instantiate(Name, Term),
    Check(Term),
    Undo,
    Show,
}

/// A command with the position of its first token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Located {
    pub command: Command,
    pub line: usize,
    pub col: usize,
    /// The source text of the command, without the final dot.
    pub text: String,
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    /// Position reported when input runs out.
    end: (usize, usize),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn error(&self, expected: &str) -> Error {
        let (line, col) = match self.toks.get(self.pos) {
            Some(s) => (s.line, s.col),
            None => self.end,
        };
        let found = match self.peek() {
            Some(t) => t.describe(),
            None => "end of command".into(),
        };
        Error::Syntax { line, col, expected: format!("{expected}, found {found}") }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&tok.describe()))
        }
    }

    fn ident(&mut self) -> Result<Name> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_reserved(s) => {
                let n = Name::new(s);
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.error("an identifier")),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn finish(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("`.`"))
        }
    }

    fn term(&mut self) -> Result<Term> {
        let lhs = self.app_seq()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.term()?;
            return Ok(Term::arrow(lhs, rhs));
        }
        Ok(lhs)
    }

    fn starts_elem(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(s)) => !is_reserved(s) || s == "Prop" || s == "Type",
            Some(Tok::LParen) | Some(Tok::LBrack) => true,
            _ => false,
        }
    }

    fn app_seq(&mut self) -> Result<Term> {
        if !self.starts_elem() {
            return Err(self.error("a term"));
        }
        let (mut head, mut open) = self.elem()?;
        while !open && self.starts_elem() {
            let (arg, o) = self.elem()?;
            head = Term::app(head, arg);
            open = o;
        }
        Ok(head)
    }

    /// Parses one operand. The flag is set for binders, whose body extends
    /// as far as possible.
    fn elem(&mut self) -> Result<(Term, bool)> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "Prop" => {
                self.pos += 1;
                Ok((Term::prop(), false))
            }
            Some(Tok::Ident(s)) if s == "Type" => {
                self.pos += 1;
                Ok((Term::type_(), false))
            }
            Some(Tok::Ident(_)) => Ok((Term::Var(self.ident()?), false)),
            Some(Tok::LBrack) => {
                self.pos += 1;
                let x = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.term()?;
                self.expect(Tok::RBrack)?;
                let body = self.term()?;
                Ok((Term::lambda(x, ty, body), true))
            }
            Some(Tok::LParen) => {
                let is_binder = matches!(self.peek_at(1), Some(Tok::Ident(s)) if !is_reserved(s))
                    && self.peek_at(2) == Some(&Tok::Colon);
                self.pos += 1;
                if is_binder {
                    let x = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let ty = self.term()?;
                    self.expect(Tok::RParen)?;
                    let body = self.term()?;
                    Ok((Term::product(x, ty, body), true))
                } else {
                    let t = self.term()?;
                    self.expect(Tok::RParen)?;
                    Ok((t, false))
                }
            }
            _ => Err(self.error("a term")),
        }
    }

    fn optional_type(&mut self) -> Result<Option<Term>> {
        if self.peek() == Some(&Tok::Colon) {
            self.pos += 1;
            Ok(Some(self.term()?))
        } else {
            Ok(None)
        }
    }

    fn optional_ident(&mut self) -> Result<Option<Name>> {
        if self.at_end() {
            Ok(None)
        } else {
            Ok(Some(self.ident()?))
        }
    }

    fn command(&mut self) -> Result<Command> {
        let kw = match self.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return Err(self.error("a command")),
        };
        self.pos += 1;
        let cmd = match kw.as_str() {
            "Parameter" | "Axiom" | "Variable" | "Hypothesis" => {
                let kind = match kw.as_str() {
                    "Parameter" => DeclKind::Parameter,
                    "Axiom" => DeclKind::Axiom,
                    "Variable" => DeclKind::Variable,
                    _ => DeclKind::Hypothesis,
                };
                let name = self.ident()?;
                let ty = self.optional_type()?;
                Command::Declare { kind, name, ty }
            }
            "Assumes" => Command::Assumes(self.term()?),
            "Definition" => {
                let name = self.ident()?;
                let ty = self.optional_type()?;
                match self.peek() {
                    Some(Tok::Eq) | Some(Tok::ColonEq) => self.pos += 1,
                    _ => return Err(self.error("`:=` or `=`")),
                }
                let body = self.term()?;
                Command::Definition { name, ty, body }
            }
            "Theorem" | "Lemma" => {
                let name = self.ident()?;
                Command::Theorem { name, ty: self.optional_type()? }
            }
            "Remark" => {
                let name = self.ident()?;
                Command::Remark { name, ty: self.optional_type()? }
            }
            "Goal" => Command::Goal(self.term()?),
            "Statement" => Command::Statement(self.term()?),
            "Proof" => Command::Proof(self.term()?),
            "Section" => Command::Section(self.ident()?),
            "End" => Command::End(self.ident()?),
            "Save" => Command::Save(self.optional_ident()?),
            "Intro" => Command::Intro(self.optional_ident()?),
            "Apply" => Command::Apply(self.term()?),
            "Assumption" => Command::Assumption(self.ident()?),
            "Instantiate" => {
                let x = self.ident()?;
                let t = self.term()?;
                Command::Instantiate(x, t)
            }
            "Check" => Command::Check(self.term()?),
            "Undo" => Command::Undo,
            "Show" => Command::Show,
            _ => {
                self.pos -= 1;
                return Err(self.error("a command"));
            }
        };
        self.finish()?;
        Ok(cmd)
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(s, "Prop" | "Type")
}

pub fn parse_term(src: &str) -> Result<Term> {
    let toks = lex(src)?;
    let end = end_pos(src);
    let mut p = Parser { toks: &toks, pos: 0, end };
    let t = p.term()?;
    if !p.at_end() {
        return Err(p.error("end of input"));
    }
    Ok(t)
}

fn end_pos(src: &str) -> (usize, usize) {
    let line = src.matches('\n').count() + 1;
    let col = src.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Splits a script into dot-terminated commands and parses each.
pub fn parse_program(src: &str) -> Result<Vec<Located>> {
    let toks = lex(src)?;
    let mut out = Vec::new();
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        if t.tok == Tok::Dot {
            let slice = &toks[start..i];
            if slice.is_empty() {
                return Err(Error::Syntax { line: t.line, col: t.col, expected: "a command, found `.`".into() });
            }
            let mut p = Parser { toks: slice, pos: 0, end: (t.line, t.col) };
            let command = p.command()?;
            let text = src[slice[0].offset..t.offset].trim().to_string();
            out.push(Located { command, line: slice[0].line, col: slice[0].col, text });
            start = i + 1;
        }
    }
    if start < toks.len() {
        let end = end_pos(src);
        return Err(Error::Syntax { line: end.0, col: end.1, expected: "`.` at end of command".into() });
    }
    Ok(out)
}

/// Parses a single command, with or without its final dot.
pub fn parse_command(src: &str) -> Result<Command> {
    let trimmed = src.trim_end();
    let with_dot = if trimmed.ends_with('.') { trimmed.to_string() } else { format!("{trimmed}.") };
    let mut cmds = parse_program(&with_dot)?;
    match cmds.len() {
        1 => Ok(cmds.remove(0).command),
        0 => Err(Error::Syntax { line: 1, col: 1, expected: "a command".into() }),
        _ => Err(Error::Syntax { line: cmds[1].line, col: cmds[1].col, expected: "a single command".into() }),
    }
}
