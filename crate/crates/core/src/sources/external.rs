//! Client for an external evaluator process.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::protocol::{self, Handshake, Request, Response};
use super::{EvalResult, Evaluator, SourceBinding, SourceSpec};
use crate::error::{Error, Result};
use crate::space::{Location, SearchSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalConfig {
    /// Program and arguments.
    pub command: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    /// Restarts allowed after a crash, EOF or timeout.
    #[serde(default = "default_retries")]
    pub retries: u32,
}

fn default_timeout() -> f64 {
    3600.0
}

fn default_retries() -> u32 {
    2
}

impl ExternalConfig {
    pub fn new(command: Vec<String>) -> Self {
        ExternalConfig {
            command,
            timeout_secs: default_timeout(),
            retries: default_retries(),
        }
    }

    fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs.max(0.001))
    }
}

struct Process {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
}

impl Process {
    fn spawn(config: &ExternalConfig) -> Result<(Self, Handshake)> {
        let (program, args) = config
            .command
            .split_first()
            .ok_or_else(|| Error::Config("evaluator command is empty".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let mut process = Process {
            child,
            stdin,
            lines: rx,
        };
        let line = process.read_line(config.timeout())?;
        Ok((process, protocol::parse_handshake(&line)?))
    }

    fn read_line(&mut self, timeout: Duration) -> Result<String> {
        let deadline = Instant::now() + timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(left) {
                Ok(Ok(line)) if line.trim().is_empty() => continue,
                Ok(Ok(line)) => return Ok(line),
                Ok(Err(e)) => return Err(e.into()),
                Err(RecvTimeoutError::Timeout) => {
                    return Err(Error::Io(std::io::Error::new(
                        std::io::ErrorKind::TimedOut,
                        format!("no reply within {:.1}s", timeout.as_secs_f64()),
                    )))
                }
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(Error::Io(std::io::Error::new(
                        std::io::ErrorKind::UnexpectedEof,
                        "evaluator closed its output",
                    )))
                }
            }
        }
    }

    fn send(&mut self, line: &str) -> Result<()> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| Error::Io(std::io::Error::from(std::io::ErrorKind::BrokenPipe)))?;
        writeln!(stdin, "{line}")?;
        stdin.flush()?;
        Ok(())
    }

    fn shutdown(mut self) {
        drop(self.stdin.take());
        let deadline = Instant::now() + Duration::from_secs(2);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(10));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Evaluates external sources through a long-lived evaluator process and
/// synthetic sources in-process. Requests are strictly sequential.
pub struct ExternalEvaluator {
    config: ExternalConfig,
    space: SearchSpace,
    process: Option<Process>,
    handshake: Handshake,
    next_id: u64,
}

impl ExternalEvaluator {
    /// Starts the evaluator and reads its handshake.
    pub fn spawn(config: ExternalConfig, space: SearchSpace) -> Result<Self> {
        let (process, handshake) = Process::spawn(&config)?;
        Ok(ExternalEvaluator {
            config,
            space,
            process: Some(process),
            handshake,
            next_id: 0,
        })
    }

    pub fn handshake(&self) -> &Handshake {
        &self.handshake
    }

    fn exchange(&mut self, line: &str) -> Result<String> {
        if self.process.is_none() {
            let (process, handshake) = Process::spawn(&self.config)?;
            if handshake.objectives != self.handshake.objectives {
                return Err(Error::Protocol("evaluator changed its objectives on restart".into()));
            }
            self.process = Some(process);
        }
        let timeout = self.config.timeout();
        let process = self.process.as_mut().expect("process is running");
        let reply = process.send(line).and_then(|_| process.read_line(timeout));
        if reply.is_err() {
            if let Some(p) = self.process.take() {
                p.shutdown();
            }
        }
        reply
    }

    fn evaluate_external(&mut self, source: usize, loc: &Location, seed: u64) -> Result<EvalResult> {
        let native = self.space.decode(loc)?;
        let id = self.next_id;
        self.next_id += 1;
        let line = serde_json::to_string(&Request {
            id,
            source,
            values: protocol::encode_values(&self.space, &native),
            cv_seed: seed,
        })?;

        let mut last_error = String::new();
        for attempt in 0..=self.config.retries {
            match self.exchange(&line) {
                Ok(reply) => return self.read_response(id, &reply, seed),
                Err(Error::Io(e)) => {
                    log::warn!("evaluator attempt {} for request {id} failed: {e}", attempt + 1);
                    last_error = e.to_string();
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::Source {
            source_id: source,
            retries: self.config.retries,
            message: last_error,
        })
    }

    fn read_response(&self, id: u64, reply: &str, seed: u64) -> Result<EvalResult> {
        match protocol::parse_response(reply)? {
            Response::Success {
                id: got,
                objectives,
                wall_seconds,
            } => {
                if got != id {
                    return Err(Error::Protocol(format!("expected response {id}, got {got}")));
                }
                if objectives.len() != self.handshake.objectives.len() {
                    return Err(Error::Protocol(format!(
                        "expected {} objectives, got {}",
                        self.handshake.objectives.len(),
                        objectives.len()
                    )));
                }
                Ok(EvalResult {
                    objectives,
                    wall_cost: wall_seconds,
                    seed_used: seed,
                })
            }
            Response::Failure { id: got, error } => {
                if got != id {
                    return Err(Error::Protocol(format!("expected response {id}, got {got}")));
                }
                Err(Error::Evaluator { id, message: error })
            }
        }
    }
}

impl Evaluator for ExternalEvaluator {
    fn evaluate(&mut self, source: &SourceSpec, loc: &Location, seed: u64) -> Result<EvalResult> {
        match &source.binding {
            SourceBinding::External { .. } => self.evaluate_external(source.id, loc, seed),
            SourceBinding::Synthetic(_) => super::SyntheticEvaluator.evaluate(source, loc, seed),
        }
    }
}

impl Drop for ExternalEvaluator {
    fn drop(&mut self) {
        if let Some(p) = self.process.take() {
            p.shutdown();
        }
    }
}
