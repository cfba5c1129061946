use super::{AttemptError, Respondent, RespondentSpec};
use crate::render::PromptText;
use crate::scenario::Scenario;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

/// Runs a local program per query: prompt on stdin, completion on stdout.
/// A nonzero exit status counts as a failed attempt.
pub struct SubprocessRespondent {
    model_name: String,
    argv: Vec<String>,
    timeout: Duration,
}

impl SubprocessRespondent {
    pub fn new(spec: &RespondentSpec, timeout: Duration) -> Self {
        Self {
            model_name: spec.model_name.clone(),
            argv: spec.command.clone().expect("validated subprocess spec"),
            timeout,
        }
    }
}

impl Respondent for SubprocessRespondent {
    fn model_name(&self) -> &str {
        &self.model_name
    }

    fn respond(&self, _: &Scenario, prompt: &PromptText) -> Result<String, AttemptError> {
        let mut child = Command::new(&self.argv[0])
            .args(&self.argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| AttemptError::Fatal(format!("spawning {}: {e}", self.argv[0])))?;

        let mut stdin = child.stdin.take().expect("piped stdin");
        let input = prompt.full.clone();
        let writer = std::thread::spawn(move || {
            // The child may exit without reading; a broken pipe is not our failure.
            let _ = stdin.write_all(input.as_bytes());
        });
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = std::thread::spawn(move || {
            let mut out = String::new();
            stdout.read_to_string(&mut out).map(|_| out)
        });

        let started = Instant::now();
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) if started.elapsed() >= self.timeout => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(AttemptError::Retryable(format!(
                        "subprocess timed out after {:?}",
                        self.timeout
                    )));
                }
                Ok(None) => std::thread::sleep(Duration::from_millis(5)),
                Err(e) => return Err(AttemptError::Retryable(e.to_string())),
            }
        };
        let _ = writer.join();
        let out = reader
            .join()
            .expect("reader thread")
            .map_err(|e| AttemptError::Retryable(e.to_string()))?;
        if !status.success() {
            return Err(AttemptError::Retryable(format!(
                "subprocess exited with {status}"
            )));
        }
        Ok(out.trim_end().to_string())
    }
}
