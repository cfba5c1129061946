#![allow(dead_code)]

use moralbench::adapters::{ChoiceRecord, PolicySpec, RespondentSpec};
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

pub type Handler = dyn Fn(&serde_json::Value) -> (u16, String) + Send + Sync;

/// Minimal chat-completions endpoint on a loopback port. Records every
/// request body it receives.
pub struct StubServer {
    pub url: String,
    pub requests: Arc<AtomicUsize>,
    pub bodies: Arc<Mutex<Vec<serde_json::Value>>>,
    stop: Arc<AtomicBool>,
    addr: std::net::SocketAddr,
}

pub fn completion(text: &str) -> String {
    serde_json::json!({
        "choices": [{"index": 0, "message": {"role": "assistant", "content": text}}]
    })
    .to_string()
}

/// The prompt text of a recorded request body.
pub fn prompt_of(body: &serde_json::Value) -> &str {
    body["messages"][0]["content"].as_str().unwrap_or("")
}

fn handle(mut stream: TcpStream, handler: &Handler) -> Option<serde_json::Value> {
    stream
        .set_read_timeout(Some(Duration::from_secs(10)))
        .ok()?;
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut content_length = 0usize;
    let mut line = String::new();
    reader.read_line(&mut line).ok()?;
    if line.is_empty() {
        return None;
    }
    loop {
        line.clear();
        reader.read_line(&mut line).ok()?;
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some((k, v)) = l.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                content_length = v.trim().parse().ok()?;
            }
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body).ok()?;
    let body: serde_json::Value = serde_json::from_slice(&body).ok()?;
    let (status, payload) = handler(&body);
    let reason = match status {
        200 => "OK",
        401 => "Unauthorized",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        _ => "Status",
    };
    let _ = write!(
        stream,
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    );
    let _ = stream.flush();
    Some(body)
}

impl StubServer {
    pub fn start(
        handler: impl Fn(&serde_json::Value) -> (u16, String) + Send + Sync + 'static,
    ) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let requests = Arc::new(AtomicUsize::new(0));
        let bodies = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let handler: Arc<Handler> = Arc::new(handler);
        {
            let (requests, bodies, stop) = (requests.clone(), bodies.clone(), stop.clone());
            std::thread::spawn(move || {
                for stream in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = stream else { continue };
                    let (requests, bodies, handler) =
                        (requests.clone(), bodies.clone(), handler.clone());
                    std::thread::spawn(move || {
                        if let Some(body) = handle(stream, handler.as_ref()) {
                            requests.fetch_add(1, Ordering::SeqCst);
                            bodies.lock().unwrap().push(body);
                        }
                    });
                }
            });
        }
        Self {
            url: format!("http://{addr}/v1/chat/completions"),
            requests,
            bodies,
            stop,
            addr,
        }
    }

    pub fn count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn spec(&self, model: &str) -> RespondentSpec {
        RespondentSpec {
            kind: moralbench::adapters::RespondentKind::HttpChat,
            model_name: model.into(),
            endpoint_url: Some(self.url.clone()),
            ..RespondentSpec::synthetic(model, PolicySpec::default())
        }
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
    }
}

/// Answer derived from the prompt only, so reruns see identical text.
pub fn deterministic_answer(body: &serde_json::Value) -> (u16, String) {
    let prompt = prompt_of(body);
    let h = prompt
        .bytes()
        .fold(0u32, |h, b| h.wrapping_mul(31).wrapping_add(b as u32));
    let text = if h % 2 == 0 {
        "Case 1."
    } else {
        "I would choose Case 2."
    };
    (200, completion(text))
}

pub fn record_set(path: &Path) -> std::collections::BTreeSet<(String, String, String)> {
    moralbench::adapters::read_records(path)
        .unwrap()
        .into_iter()
        .map(|r: ChoiceRecord| (r.scenario_id, r.raw_text, r.parsed.as_text().to_string()))
        .collect()
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) {
    std::fs::write(path, serde_json::to_string_pretty(value).unwrap()).unwrap();
}
