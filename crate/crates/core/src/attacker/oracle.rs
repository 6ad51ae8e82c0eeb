use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use thiserror::Error;

use crate::netlist::{format_vector, parse_vector, Netlist};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle expects {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("oracle protocol violation: {0}")]
    Protocol(String),
    #[error("oracle process: {0}")]
    Io(#[from] std::io::Error),
}

/// Black-box access to an activated circuit.
pub trait Oracle {
    fn num_inputs(&self) -> usize;
    fn num_outputs(&self) -> usize;
    fn evaluate(&mut self, x: &[bool]) -> Result<Vec<bool>, OracleError>;
    /// Number of successful `evaluate` calls so far.
    fn queries(&self) -> u64;
}

fn check_arity(expected: usize, x: &[bool]) -> Result<(), OracleError> {
    if x.len() != expected {
        return Err(OracleError::Arity { expected, got: x.len() });
    }
    Ok(())
}

/// An activated netlist simulated in process.
#[derive(Debug, Clone)]
pub struct NetlistOracle {
    net: Netlist,
    queries: u64,
}

impl NetlistOracle {
    pub fn new(net: Netlist) -> NetlistOracle {
        NetlistOracle { net, queries: 0 }
    }
}

impl Oracle for NetlistOracle {
    fn num_inputs(&self) -> usize {
        self.net.inputs().len()
    }

    fn num_outputs(&self) -> usize {
        self.net.outputs().len()
    }

    fn evaluate(&mut self, x: &[bool]) -> Result<Vec<bool>, OracleError> {
        check_arity(self.num_inputs(), x)?;
        let y = self.net.eval(x).map_err(|e| OracleError::Protocol(e.to_string()))?;
        self.queries += 1;
        Ok(y)
    }

    fn queries(&self) -> u64 {
        self.queries
    }
}

/// An oracle backed by a closure.
pub struct FnOracle<F> {
    inputs: usize,
    outputs: usize,
    f: F,
    queries: u64,
}

impl<F: FnMut(&[bool]) -> Vec<bool>> FnOracle<F> {
    pub fn new(inputs: usize, outputs: usize, f: F) -> FnOracle<F> {
        FnOracle {
            inputs,
            outputs,
            f,
            queries: 0,
        }
    }
}

impl<F: FnMut(&[bool]) -> Vec<bool>> Oracle for FnOracle<F> {
    fn num_inputs(&self) -> usize {
        self.inputs
    }

    fn num_outputs(&self) -> usize {
        self.outputs
    }

    fn evaluate(&mut self, x: &[bool]) -> Result<Vec<bool>, OracleError> {
        check_arity(self.inputs, x)?;
        let y = (self.f)(x);
        if y.len() != self.outputs {
            return Err(OracleError::Protocol(format!(
                "expected {} outputs, got {}",
                self.outputs,
                y.len()
            )));
        }
        self.queries += 1;
        Ok(y)
    }

    fn queries(&self) -> u64 {
        self.queries
    }
}

/// A child process that answers one `0`/`1` vector per line: each input
/// vector written to its stdin gets one output vector back on stdout.
pub struct CommandOracle {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    inputs: usize,
    outputs: usize,
    queries: u64,
}

impl CommandOracle {
    /// Runs `command` through `sh -c`.
    pub fn spawn(command: &str, inputs: usize, outputs: usize) -> Result<CommandOracle, OracleError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(CommandOracle {
            child,
            stdin,
            stdout,
            inputs,
            outputs,
            queries: 0,
        })
    }
}

impl Oracle for CommandOracle {
    fn num_inputs(&self) -> usize {
        self.inputs
    }

    fn num_outputs(&self) -> usize {
        self.outputs
    }

    fn evaluate(&mut self, x: &[bool]) -> Result<Vec<bool>, OracleError> {
        check_arity(self.inputs, x)?;
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| OracleError::Protocol("stdin closed".into()))?;
        let sent = writeln!(stdin, "{}", format_vector(x)).and_then(|_| stdin.flush());
        if let Err(e) = sent {
            return Err(OracleError::Protocol(format!("cannot write query: {e}")));
        }
        let mut line = String::new();
        if self.stdout.read_line(&mut line)? == 0 {
            return Err(OracleError::Protocol("oracle closed its output".into()));
        }
        let text = line.trim();
        let y = parse_vector(text).map_err(|_| OracleError::Protocol(format!("bad output line {text:?}")))?;
        if y.len() != self.outputs {
            return Err(OracleError::Protocol(format!(
                "expected {} outputs, got {text:?}",
                self.outputs
            )));
        }
        self.queries += 1;
        Ok(y)
    }

    fn queries(&self) -> u64 {
        self.queries
    }
}

impl Drop for CommandOracle {
    fn drop(&mut self) {
        drop(self.stdin.take());
        if !matches!(self.child.try_wait(), Ok(Some(_))) {
            let _ = self.child.kill();
        }
        let _ = self.child.wait();
    }
}
