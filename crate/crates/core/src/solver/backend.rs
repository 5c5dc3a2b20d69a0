//! Interchangeable solver backends sharing one JSON contract: the program
//! dump goes in, a [`Solution`] document comes out.

use super::{solve_bundled, Solution, SolverConfig};
use crate::conic::ConicProgram;
use crate::error::{Error, Result};
use std::io::Write;
use std::process::{Command, Stdio};

/// Environment variable naming an external solver command. When set, the
/// command receives the program JSON on stdin and must print a solution
/// JSON on stdout.
pub const SOLVER_ENV: &str = "RANKHIER_SOLVER";

pub trait Backend {
    fn name(&self) -> String;
    fn solve(&self, cp: &ConicProgram, cfg: &SolverConfig) -> Result<Solution>;
}

/// The built-in interior-point method.
pub struct Bundled;

impl Backend for Bundled {
    fn name(&self) -> String {
        "bundled".into()
    }

    fn solve(&self, cp: &ConicProgram, cfg: &SolverConfig) -> Result<Solution> {
        solve_bundled(cp, cfg)
    }
}

/// An external program speaking the JSON contract. The command line is split
/// on whitespace; the first word is the executable.
pub struct External {
    pub command: String,
}

impl Backend for External {
    fn name(&self) -> String {
        format!("external:{}", self.command)
    }

    fn solve(&self, cp: &ConicProgram, _cfg: &SolverConfig) -> Result<Solution> {
        let mut words = self.command.split_whitespace();
        let exe = words.next().ok_or_else(|| Error::Backend("empty solver command".into()))?;
        let mut child = Command::new(exe)
            .args(words)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Backend(format!("cannot start {exe}: {e}")))?;
        let payload = cp.to_json()?;
        child
            .stdin
            .take()
            .ok_or_else(|| Error::Backend("no stdin".into()))?
            .write_all(payload.as_bytes())?;
        let out = child.wait_with_output()?;
        if !out.status.success() {
            return Err(Error::Backend(format!(
                "{exe} exited with {}: {}",
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        let text = String::from_utf8_lossy(&out.stdout);
        Solution::from_json(text.trim()).map_err(|e| Error::Backend(format!("unreadable solution: {e}")))
    }
}

/// Backend chosen by [`SOLVER_ENV`], falling back to [`Bundled`].
pub fn backend_from_env() -> Box<dyn Backend> {
    match std::env::var(SOLVER_ENV) {
        Ok(cmd) if !cmd.trim().is_empty() && cmd.trim() != "bundled" => Box::new(External { command: cmd }),
        _ => Box::new(Bundled),
    }
}
