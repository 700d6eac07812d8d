use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use thiserror::Error;

use super::script::SmtScript;

/// Environment variable consulted when no solver command is given explicitly.
pub const SOLVER_ENV: &str = "QCHECK_SOLVER";
pub const DEFAULT_SOLVER: &str = "z3 -in";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
    Unknown,
}

#[derive(Debug, Error)]
pub enum SmtError {
    #[error("cannot start solver '{command}': {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("solver i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver exited unexpectedly")]
    Exited,
    #[error("solver reported an error: {0}")]
    Solver(String),
    #[error("malformed solver output: {0}")]
    Malformed(String),
    #[error("solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("solver answered unknown")]
    Unknown,
    #[error("empty solver command")]
    EmptyCommand,
}

/// Anything that can decide satisfiability of a script.
pub trait Solver {
    fn check_sat(&mut self, script: &SmtScript) -> Result<SatResult, SmtError>;
}

/// Pick the solver command: explicit flag, then the environment, then `z3 -in`.
pub fn resolve_solver_command(flag: Option<&str>) -> String {
    if let Some(f) = flag {
        return f.to_string();
    }
    match std::env::var(SOLVER_ENV) {
        Ok(v) if !v.trim().is_empty() => v,
        _ => DEFAULT_SOLVER.to_string(),
    }
}

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// An external SMT-LIB solver spoken to over a pipe. The session is reset
/// before every query; it is restarted after errors and timeouts.
pub struct ProcessSolver {
    command: Vec<String>,
    timeout: Duration,
    session: Option<Session>,
    pub queries: u64,
}

impl ProcessSolver {
    pub fn new(command: &str, timeout: Duration) -> Result<Self, SmtError> {
        let command: Vec<String> = command.split_whitespace().map(str::to_string).collect();
        if command.is_empty() {
            return Err(SmtError::EmptyCommand);
        }
        let mut s = ProcessSolver { command, timeout, session: None, queries: 0 };
        s.start()?;
        Ok(s)
    }

    /// Solver from `QCHECK_SOLVER` or the default, with the default timeout.
    pub fn from_env() -> Result<Self, SmtError> {
        Self::new(&resolve_solver_command(None), DEFAULT_TIMEOUT)
    }

    fn start(&mut self) -> Result<(), SmtError> {
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| SmtError::Spawn { command: self.command.join(" "), source })?;
        let stdin = child.stdin.take().ok_or(SmtError::Exited)?;
        let stdout = child.stdout.take().ok_or(SmtError::Exited)?;
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        self.session = Some(Session { child, stdin, lines: rx });
        Ok(())
    }

    fn query(&mut self, text: &str) -> Result<SatResult, SmtError> {
        if self.session.is_none() {
            self.start()?;
        }
        let session = self.session.as_mut().expect("session started");
        session.stdin.write_all(b"(reset)\n")?;
        session.stdin.write_all(text.as_bytes())?;
        session.stdin.flush()?;
        loop {
            let line = match session.lines.recv_timeout(self.timeout) {
                Ok(l) => l,
                Err(RecvTimeoutError::Timeout) => return Err(SmtError::Timeout(self.timeout)),
                Err(RecvTimeoutError::Disconnected) => return Err(SmtError::Exited),
            };
            let tok = line.trim();
            match tok {
                "" | "success" => continue,
                "sat" => return Ok(SatResult::Sat),
                "unsat" => return Ok(SatResult::Unsat),
                "unknown" => return Ok(SatResult::Unknown),
                t if t.starts_with("(error") => return Err(SmtError::Solver(t.to_string())),
                t => return Err(SmtError::Malformed(t.to_string())),
            }
        }
    }
}

impl Solver for ProcessSolver {
    fn check_sat(&mut self, script: &SmtScript) -> Result<SatResult, SmtError> {
        self.queries += 1;
        let r = self.query(&script.serialize());
        if r.is_err() {
            // leftover output would poison the next query
            self.session = None;
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_resolution_prefers_flag() {
        assert_eq!(resolve_solver_command(Some("cvc5 --lang smt2")), "cvc5 --lang smt2");
    }

    #[test]
    fn missing_binary_is_a_spawn_error() {
        let e = ProcessSolver::new("definitely-not-a-solver-binary", DEFAULT_TIMEOUT);
        assert!(matches!(e, Err(SmtError::Spawn { .. })));
    }
}
