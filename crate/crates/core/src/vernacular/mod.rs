//! The command language: lexing, parsing and execution of scripts.

pub mod exec;
pub mod lexer;
pub mod parser;

pub use exec::{render_goals, run_script, Interpreter, ScriptRun};
pub use parser::{parse_command, parse_program, parse_term, Command, DeclKind, Located};
