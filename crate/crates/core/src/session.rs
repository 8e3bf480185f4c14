//! Line-delimited JSON session protocol: one request object per line in,
//! one response object per line out.

use std::io::{self, BufRead, Write};

use serde::Serialize;
use serde_json::Value;

use crate::engine::Config;
use crate::vernacular::{parse_program, Interpreter};

#[derive(Debug, Serialize)]
pub struct GoalEntry {
    pub index: usize,
    pub statement: String,
    pub hypotheses: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Response {
    pub id: Value,
    pub status: &'static str,
    pub message: String,
    pub goals: Vec<GoalEntry>,
    pub context: Vec<String>,
    pub constraints: Vec<String>,
}

pub struct Session {
    interpreter: Interpreter,
}

impl Session {
    pub fn new(config: Config) -> Session {
        Session { interpreter: Interpreter::new(config) }
    }

    pub fn interpreter(&self) -> &Interpreter {
        &self.interpreter
    }

    fn respond(&self, id: Value, result: Result<String, String>) -> Response {
        let (status, message) = match result {
            Ok(m) => ("ok", m),
            Err(m) => ("error", m),
        };
        let goals = self
            .interpreter
            .goals()
            .into_iter()
            .enumerate()
            .map(|(i, g)| GoalEntry {
                index: i + 1,
                statement: g.statement.to_string(),
                hypotheses: g.hypotheses.iter().map(|(h, ty)| format!("{h} : {ty}")).collect(),
            })
            .collect();
        Response {
            id,
            status,
            message,
            goals,
            context: self.interpreter.context_lines(),
            constraints: self.interpreter.constraint_lines(),
        }
    }

    /// Handles one request line.
    pub fn handle(&mut self, line: &str) -> Response {
        let req: Value = match serde_json::from_str(line) {
            Ok(v @ Value::Object(_)) => v,
            Ok(_) => return self.respond(Value::Null, Err("request must be a JSON object".into())),
            Err(e) => return self.respond(Value::Null, Err(format!("malformed request: {e}"))),
        };
        let id = req.get("id").cloned().unwrap_or(Value::Null);
        let Some(cmd) = req.get("cmd").and_then(Value::as_str) else {
            return self.respond(id, Err("request has no `cmd` string".into()));
        };
        let result = self.run(cmd);
        self.respond(id, result)
    }

    fn run(&mut self, text: &str) -> Result<String, String> {
        let commands = parse_program(text).map_err(|e| e.to_string())?;
        let mut out = String::new();
        for c in commands {
            match self.interpreter.execute(&c.command) {
                Ok(m) => out.push_str(&m),
                Err(e) => return Err(format!("{}:{}: {e}", c.line, c.col)),
            }
        }
        Ok(out)
    }

    pub fn handle_line(&mut self, line: &str) -> String {
        serde_json::to_string(&self.handle(line)).expect("responses serialize")
    }
}

/// Serves requests from `input` until end of input, answering in order.
pub fn serve(session: &mut Session, input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(output, "{}", session.handle_line(&line))?;
        output.flush()?;
    }
    Ok(())
}
