use thiserror::Error;

use crate::term::{Name, Term};

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("reduction fuel exhausted")]
    FuelExhausted,
    #[error("unbound name `{0}`")]
    UnboundName(Name),
    #[error("type error at {location}: {reason}")]
    TypeError {
        location: Term,
        reason: String,
        /// Typing rules entered on the way to the failure, outermost first.
        trace: Vec<&'static str>,
    },
    #[error("type mismatch: inferred {inferred}, expected {expected}")]
    Mismatch { inferred: Term, expected: Term },
    #[error("ill-formed context at item {item}: {reason}")]
    IllFormed { item: usize, reason: String },
    #[error("`{0}` is out of scope")]
    OutOfScope(Name),
    #[error("section `{0}` still contains existential variables")]
    SectionHasExistentials(Name),
    #[error("no section labelled `{0}`")]
    NoSuchSection(Name),
    #[error("`{0}` is not an existential variable")]
    NotExistential(Name),
    #[error("the item left of the index is not an existential declaration")]
    NotExistentialAtIndex,
    #[error("the register is empty")]
    RegisterEmpty,
    #[error("{0} is not a proposition or a type")]
    NotASort(Term),
    #[error("`{0}` is already declared")]
    NameClash(Name),
    #[error("index out of bounds")]
    OutOfBounds,
    #[error("failure context: {0}")]
    FailureContext(String),
    #[error("goal {0} is not a product")]
    GoalNotProduct(Term),
    #[error("no goal accepts `{head}`: {reason}")]
    NoGoalAccepts { head: Term, reason: String },
    #[error("`{0}` does not prove the goal exactly")]
    NotExact(Term),
    #[error("{0} goal(s) remain")]
    GoalsRemain(usize),
    #[error("nothing to undo")]
    HistoryEmpty,
    #[error("{0}")]
    ModeError(String),
    #[error("{line}:{col}: syntax error, expected {expected}")]
    Syntax { line: usize, col: usize, expected: String },
    #[error("{line}:{col}: unterminated comment")]
    UnterminatedComment { line: usize, col: usize },
    #[error("{line}:{col}: unexpected character `{ch}`")]
    BadChar { line: usize, col: usize, ch: char },
    #[error("extracted proof of `{name}` does not re-check: {reason}")]
    ExtractionFailed { name: Name, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
