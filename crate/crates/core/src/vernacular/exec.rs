//! Executing commands against a proof state, with transcript output in the
//! style of the original sessions.

use std::fmt::{self, Write as _};

use super::parser::{parse_program, Command, DeclKind, Located};
use crate::context::{Item, Quantifier};
use crate::engine::Config;
use crate::error::{Error, Result};
use crate::tactics::{Event, GoalView, ProofKind, ProofState};
use crate::term::{Name, Term};
use crate::typing;

impl fmt::Display for DeclKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeclKind::Parameter => "Parameter",
            DeclKind::Axiom => "Axiom",
            DeclKind::Variable => "Variable",
            DeclKind::Hypothesis => "Hypothesis",
        })
    }
}

fn opt_type(f: &mut fmt::Formatter<'_>, ty: &Option<Term>) -> fmt::Result {
    match ty {
        Some(t) => write!(f, " : {t}"),
        None => Ok(()),
    }
}

fn opt_name(f: &mut fmt::Formatter<'_>, n: &Option<Name>) -> fmt::Result {
    match n {
        Some(n) => write!(f, " {n}"),
        None => Ok(()),
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Declare { kind, name, ty } => {
                write!(f, "{kind} {name}")?;
                opt_type(f, ty)?;
            }
            Command::Assumes(t) => write!(f, "Assumes {t}")?,
            Command::Definition { name, ty, body } => {
                write!(f, "Definition {name}")?;
                opt_type(f, ty)?;
                write!(f, " := {body}")?;
            }
            Command::Theorem { name, ty } => {
                write!(f, "Theorem {name}")?;
                opt_type(f, ty)?;
            }
            Command::Remark { name, ty } => {
                write!(f, "Remark {name}")?;
                opt_type(f, ty)?;
            }
            Command::Goal(t) => write!(f, "Goal {t}")?,
            Command::Statement(t) => write!(f, "Statement {t}")?,
            Command::Proof(t) => write!(f, "Proof {t}")?,
            Command::Section(n) => write!(f, "Section {n}")?,
            Command::End(n) => write!(f, "End {n}")?,
            Command::Save(n) => {
                f.write_str("Save")?;
                opt_name(f, n)?;
            }
            Command::Intro(n) => {
                f.write_str("Intro")?;
                opt_name(f, n)?;
            }
            Command::Apply(t) => write!(f, "Apply {t}")?,
            Command::Assumption(n) => write!(f, "Assumption {n}")?,
            Command::Instantiate(n, t) => write!(f, "Instantiate {n} {t}")?,
            Command::Check(t) => write!(f, "Check {t}")?,
            Command::Undo => f.write_str("Undo")?,
            Command::Show => f.write_str("Show")?,
        }
        f.write_str(".")
    }
}

/// Renders goals as in the sessions: count, first goal with its hypotheses
/// below the bar, then the statements of the other goals.
pub fn render_goals(goals: &[GoalView]) -> String {
    let mut out = String::new();
    if goals.is_empty() {
        return out;
    }
    let count = if goals.len() == 1 { "1 subgoal".to_string() } else { format!("{} subgoals", goals.len()) };
    let _ = writeln!(out, "{count}");
    let first = &goals[0];
    let _ = writeln!(out, "  {}", first.statement);
    let _ = writeln!(out, "  ============================");
    for (h, ty) in &first.hypotheses {
        let _ = writeln!(out, "    {h} : {ty}");
    }
    for (i, g) in goals.iter().enumerate().skip(1) {
        let _ = writeln!(out, "subgoal {} is:", i + 1);
        let _ = writeln!(out, "  {}", g.statement);
    }
    out
}

/// A statement header waiting for `Assumes`.
#[derive(Clone, Debug)]
struct PendingDecl {
    kind: DeclKind,
    name: Name,
}

pub struct Interpreter {
    state: ProofState,
    pending: Option<PendingDecl>,
}

impl Interpreter {
    pub fn new(config: Config) -> Interpreter {
        Interpreter { state: ProofState::new(config), pending: None }
    }

    pub fn state(&self) -> &ProofState {
        &self.state
    }

    pub fn goals(&self) -> Vec<GoalView> {
        self.state.goals()
    }

    /// Runs one command and returns its display text.
    pub fn execute(&mut self, cmd: &Command) -> Result<String> {
        if let Some(p) = self.pending.take() {
            return match cmd {
                Command::Assumes(ty) => self.declare(p.kind, &p.name, ty),
                _ => {
                    self.pending = Some(p.clone());
                    Err(Error::ModeError(format!("`Assumes` expected after `{} {}`", p.kind, p.name)))
                }
            };
        }
        match cmd {
            Command::Declare { kind, name, ty: Some(ty) } => self.declare(*kind, name, ty),
            Command::Declare { kind, name, ty: None } => {
                self.pending = Some(PendingDecl { kind: *kind, name: name.clone() });
                Ok(String::new())
            }
            Command::Assumes(_) => Err(Error::ModeError("`Assumes` without a declaration".into())),
            Command::Definition { name, ty, body } => {
                self.state.define(name, body, ty.as_ref())?;
                Ok(self.report())
            }
            Command::Theorem { name, ty } => self.begin(ProofKind::Theorem, Some(name), ty.as_ref()),
            Command::Remark { name, ty } => self.begin(ProofKind::Remark, Some(name), ty.as_ref()),
            Command::Goal(t) => self.begin(ProofKind::Goal, None, Some(t)),
            Command::Statement(t) => {
                self.state.statement(t)?;
                Ok(self.report())
            }
            Command::Proof(t) => {
                self.state.proof_term(t)?;
                Ok(self.report())
            }
            Command::Section(n) => {
                self.state.open_section(n)?;
                Ok(String::new())
            }
            Command::End(n) => {
                self.state.close_section(n)?;
                Ok(String::new())
            }
            Command::Save(n) => {
                self.state.save(n.as_ref())?;
                Ok(self.report())
            }
            Command::Intro(n) => {
                self.state.intro(n.as_ref())?;
                Ok(self.tactic_report())
            }
            Command::Apply(t) => {
                self.state.apply(t)?;
                Ok(self.tactic_report())
            }
            Command::Assumption(n) => {
                self.state.assumption(n)?;
                Ok(self.tactic_report())
            }
            Command::Instantiate(n, t) => {
                self.state.instantiate(n, t)?;
                if self.state.in_proof() || !self.state.events().is_empty() {
                    Ok(self.tactic_report())
                } else {
                    Ok(self.render_context())
                }
            }
            Command::Check(t) => {
                let ctx = self.state.context();
                let ty = typing::infer(ctx, ctx.len(), t, self.state.config().fuel)?;
                Ok(format!("{t} : {ty}\n"))
            }
            Command::Undo => {
                self.state.undo()?;
                Ok(render_goals(&self.goals()))
            }
            Command::Show => {
                if self.state.in_proof() {
                    Ok(render_goals(&self.goals()))
                } else {
                    Ok(self.render_context())
                }
            }
        }
    }

    fn declare(&mut self, kind: DeclKind, name: &Name, ty: &Term) -> Result<String> {
        let hypothesis = matches!(kind, DeclKind::Variable | DeclKind::Hypothesis);
        self.state.declare(Quantifier::Forall, name, ty, hypothesis)?;
        Ok(self.report())
    }

    fn begin(&mut self, kind: ProofKind, name: Option<&Name>, ty: Option<&Term>) -> Result<String> {
        self.state.begin_proof(kind, name, ty)?;
        Ok(self.report())
    }

    fn render_context(&self) -> String {
        let mut out = String::new();
        for it in &self.state.context().items {
            let _ = writeln!(out, "{it}");
        }
        out
    }

    /// Display text for the last command, from its events and the goals.
    fn report(&self) -> String {
        self.report_after(false)
    }

    fn tactic_report(&self) -> String {
        self.report_after(true)
    }

    fn report_after(&self, tactic: bool) -> String {
        let mut out = String::new();
        for e in self.state.events() {
            match e {
                Event::Declared(n) => {
                    let _ = writeln!(out, "{n} is assumed");
                }
                Event::Defined(n) => {
                    let _ = writeln!(out, "{n} is defined");
                }
                Event::GoalProved => {
                    let _ = writeln!(out, "Goal proved!");
                }
                Event::Saved(n) => {
                    if tactic && self.state.proofs().is_empty() && !out.contains("Goal proved!") {
                        let _ = writeln!(out, "Goal proved!");
                    }
                    let _ = writeln!(out, "{n} is defined");
                }
            }
        }
        if self.state.in_proof() && !self.state.events().contains(&Event::GoalProved) {
            out.push_str(&render_goals(&self.goals()));
        }
        out
    }

    pub fn context_lines(&self) -> Vec<String> {
        self.state.context().items.iter().map(|it| it.to_string()).collect()
    }

    pub fn constraint_lines(&self) -> Vec<String> {
        self.state
            .context()
            .items
            .iter()
            .filter(|it| matches!(it, Item::Constraint(..)))
            .map(|it| it.to_string())
            .collect()
    }
}

/// Outcome of running a whole script.
pub struct ScriptRun {
    pub transcript: String,
    /// The first failing command, with its position.
    pub error: Option<(usize, usize, Error)>,
    pub interpreter: Interpreter,
}

impl ScriptRun {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Runs `src` command by command, stopping at the first error.
pub fn run_script(src: &str, config: Config) -> ScriptRun {
    let mut interpreter = Interpreter::new(config);
    let mut transcript = String::new();
    let commands: Vec<Located> = match parse_program(src) {
        Ok(c) => c,
        Err(e) => {
            let (line, col) = error_position(&e).unwrap_or((1, 1));
            let _ = writeln!(transcript, "Error at {line}:{col}: {e}");
            return ScriptRun { transcript, error: Some((line, col, e)), interpreter };
        }
    };
    for c in commands {
        let _ = writeln!(transcript, "{}.", c.text);
        match interpreter.execute(&c.command) {
            Ok(text) => {
                for line in text.lines() {
                    let _ = writeln!(transcript, "    {line}");
                }
            }
            Err(e) => {
                let _ = writeln!(transcript, "Error at {}:{}: {e}", c.line, c.col);
                return ScriptRun { transcript, error: Some((c.line, c.col, e)), interpreter };
            }
        }
    }
    if let Some(p) = &interpreter.pending {
        let e = Error::ModeError(format!("`Assumes` expected after `{} {}`", p.kind, p.name));
        let _ = writeln!(transcript, "Error: {e}");
        return ScriptRun { transcript, error: Some((0, 0, e)), interpreter };
    }
    ScriptRun { transcript, error: None, interpreter }
}

fn error_position(e: &Error) -> Option<(usize, usize)> {
    match e {
        Error::Syntax { line, col, .. } | Error::UnterminatedComment { line, col } | Error::BadChar { line, col, .. } => {
            Some((*line, *col))
        }
        _ => None,
    }
}
