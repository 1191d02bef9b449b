//! Client side of the wire protocol: a child process that answers predict
//! requests over its standard input and output.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use shape_core::{Dataset, Evaluator};

use crate::protocol::{self, Request, Response};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);

#[derive(Debug, thiserror::Error)]
pub enum ExternalError {
    #[error("failed to start evaluator {command:?}: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("handshake failed: {0}")]
    Handshake(String),
}

struct Session {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    /// request digest → digest of the labels first returned for it
    seen: HashMap<[u8; 32], [u8; 32]>,
    broken: Option<String>,
}

/// An evaluator living in a child process. Requests are strictly serial.
pub struct ExternalEvaluator {
    command: String,
    timeout: Duration,
    session: Mutex<Session>,
    warnings: Mutex<Vec<String>>,
}

impl ExternalEvaluator {
    /// Starts `command` through `sh -c` and performs the handshake for the
    /// schema of `dataset`.
    pub fn spawn(command: &str, dataset: &Dataset, timeout: Duration) -> Result<Self, ExternalError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| ExternalError::Spawn {
                command: command.into(),
                source,
            })?;
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let stdin = child.stdin.take();
        let evaluator = Self {
            command: command.into(),
            timeout,
            session: Mutex::new(Session {
                child,
                stdin,
                lines: rx,
                next_id: 0,
                seen: HashMap::new(),
                broken: None,
            }),
            warnings: Mutex::new(Vec::new()),
        };
        {
            let mut s = evaluator.lock();
            match s.exchange(&protocol::hello(dataset), timeout) {
                Ok(Response::Ready) => {}
                Ok(Response::Error { message, .. }) => return Err(ExternalError::Handshake(message)),
                Ok(other) => return Err(ExternalError::Handshake(format!("expected ready, got {other:?}"))),
                Err(e) => return Err(ExternalError::Handshake(e)),
            }
        }
        Ok(evaluator)
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Session> {
        self.session.lock().unwrap_or_else(|p| p.into_inner())
    }
}

impl Session {
    fn exchange(&mut self, request: &Request, timeout: Duration) -> Result<Response, String> {
        if let Some(why) = &self.broken {
            return Err(format!("evaluator unusable: {why}"));
        }
        let mut line = serde_json::to_vec(request).map_err(|e| e.to_string())?;
        line.push(b'\n');
        let stdin = self.stdin.as_mut().ok_or("evaluator stdin closed")?;
        if let Err(e) = stdin.write_all(&line).and_then(|_| stdin.flush()) {
            return Err(self.fail(format!("write failed: {e}")));
        }
        let deadline = Instant::now() + timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(left) {
                Ok(Ok(text)) if text.trim().is_empty() => continue,
                Ok(Ok(text)) => {
                    return serde_json::from_str(&text)
                        .map_err(|e| self.fail(format!("protocol violation: {e} in {text:?}")))
                }
                Ok(Err(e)) => return Err(self.fail(format!("read failed: {e}"))),
                Err(RecvTimeoutError::Timeout) => {
                    let _ = self.child.kill();
                    return Err(self.fail(format!("timed out after {} s", timeout.as_secs_f64())));
                }
                Err(RecvTimeoutError::Disconnected) => {
                    let status = self.child.wait().map(|s| s.to_string()).unwrap_or_default();
                    return Err(self.fail(format!("evaluator exited ({status})")));
                }
            }
        }
    }

    fn fail(&mut self, why: String) -> String {
        self.broken = Some(why.clone());
        why
    }
}

fn digest(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().into()
}

impl Evaluator for ExternalEvaluator {
    fn predict(&self, coalition: &str, dataset: &Dataset) -> Result<Vec<usize>, String> {
        let mut s = self.lock();
        s.next_id += 1;
        let id = s.next_id;
        let request = protocol::predict_request(id, coalition, dataset);
        let Request::Predict { samples, .. } = &request else {
            unreachable!()
        };
        let key = digest(&[
            coalition.as_bytes(),
            &serde_json::to_vec(samples).map_err(|e| e.to_string())?,
        ]);

        let labels = match s.exchange(&request, self.timeout)? {
            Response::Predictions { request_id, labels } if request_id == id => {
                protocol::decode_labels(&labels, dataset.len())?
            }
            Response::Predictions { request_id, .. } => {
                return Err(s.fail(format!(
                    "protocol violation: answer to request {request_id}, expected {id}"
                )))
            }
            Response::Error { message, .. } => return Err(message),
            Response::Ready => return Err(s.fail("protocol violation: unexpected ready".into())),
        };

        let bytes: Vec<u8> = labels.iter().flat_map(|&l| (l as u64).to_le_bytes()).collect();
        let answer = digest(&[&bytes]);
        if let Some(previous) = s.seen.insert(key, answer) {
            if previous != answer {
                self.warnings.lock().unwrap_or_else(|p| p.into_inner()).push(format!(
                    "evaluator is not pure: coalition {coalition} answered differently to an identical request"
                ));
            }
        }
        Ok(labels)
    }

    fn is_serial(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("external:{}", self.command)
    }

    fn diagnostics(&self) -> Vec<String> {
        self.warnings.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }
}

impl Drop for ExternalEvaluator {
    fn drop(&mut self) {
        let s = self.session.get_mut().unwrap_or_else(|p| p.into_inner());
        s.stdin = None;
        let deadline = Instant::now() + Duration::from_secs(2);
        while Instant::now() < deadline {
            match s.child.try_wait() {
                Ok(Some(_)) | Err(_) => return,
                Ok(None) => thread::sleep(Duration::from_millis(10)),
            }
        }
        let _ = s.child.kill();
        let _ = s.child.wait();
    }
}
