//! Shared helpers for integration tests: a minimal chat-completions stub
//! server with a request counter, and the note fixture.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use vaxner_core::corpus::{AnnotatedDocument, EntitySpan};
use vaxner_core::{EntityType, Source};

/// The running example: a first-person vaccination note with one vaccine
/// mention and two adverse events.
pub const NOTE: &str = "My first shot of moderna vaccine = very sore arm the next day \
and very tired so I slept a lot .";

pub fn find_span(text: &str, needle: &str) -> (usize, usize) {
    assert!(text.is_ascii());
    let start = text.find(needle).expect("fixture substring present");
    (start, start + needle.len())
}

pub fn span(text: &str, needle: &str, etype: EntityType) -> EntitySpan {
    let (start, end) = find_span(text, needle);
    EntitySpan::new(start, end, etype, needle)
}

pub fn note_doc() -> AnnotatedDocument {
    AnnotatedDocument::new(
        "twitter:fixture-1",
        Source::Twitter,
        NOTE,
        vec![
            span(NOTE, "moderna vaccine", EntityType::Vaccine),
            span(NOTE, "sore arm", EntityType::AdverseEvent),
            span(NOTE, "tired", EntityType::AdverseEvent),
        ],
    )
}

/// A parsed stub request: the JSON body plus selected headers.
pub struct StubRequest {
    pub body: serde_json::Value,
    pub authorization: Option<String>,
}

impl StubRequest {
    /// Concatenated content of all messages in the request, for routing
    /// responses on what was asked.
    pub fn prompt_text(&self) -> String {
        self.body["messages"]
            .as_array()
            .map(|messages| {
                messages
                    .iter()
                    .filter_map(|m| m["content"].as_str())
                    .collect::<Vec<_>>()
                    .join("\n")
            })
            .unwrap_or_default()
    }
}

pub struct StubResponse {
    pub status: u16,
    pub body: String,
}

impl StubResponse {
    /// A well-formed chat completion carrying `text`.
    pub fn content(text: &str) -> StubResponse {
        StubResponse {
            status: 200,
            body: serde_json::json!({
                "id": "stub",
                "choices": [{"index": 0, "message": {"role": "assistant", "content": text}}]
            })
            .to_string(),
        }
    }

    pub fn status(code: u16) -> StubResponse {
        StubResponse {
            status: code,
            body: "{}".into(),
        }
    }

    pub fn raw(body: &str) -> StubResponse {
        StubResponse {
            status: 200,
            body: body.into(),
        }
    }
}

type Responder = Arc<dyn Fn(&StubRequest) -> StubResponse + Send + Sync>;

/// In-process chat-completions stub: binds an ephemeral local port,
/// answers with the responder's output, and counts handled requests.
pub struct StubServer {
    addr: SocketAddr,
    requests: Arc<AtomicUsize>,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl StubServer {
    pub fn start(
        responder: impl Fn(&StubRequest) -> StubResponse + Send + Sync + 'static,
    ) -> StubServer {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub listener");
        let addr = listener.local_addr().expect("stub local addr");
        let requests = Arc::new(AtomicUsize::new(0));
        let shutdown = Arc::new(AtomicBool::new(false));
        let responder: Responder = Arc::new(responder);

        let handle = {
            let requests = Arc::clone(&requests);
            let shutdown = Arc::clone(&shutdown);
            std::thread::spawn(move || {
                for stream in listener.incoming() {
                    if shutdown.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = stream else { continue };
                    let requests = Arc::clone(&requests);
                    let responder = Arc::clone(&responder);
                    std::thread::spawn(move || handle_connection(stream, &requests, &responder));
                }
            })
        };

        StubServer {
            addr,
            requests,
            shutdown,
            handle: Some(handle),
        }
    }

    /// Endpoint URL for backend configs.
    pub fn url(&self) -> String {
        format!("http://{}/v1/chat/completions", self.addr)
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Unblock the accept loop.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn handle_connection(stream: TcpStream, requests: &AtomicUsize, responder: &Responder) {
    let Some((request, mut stream)) = read_request(stream) else {
        return;
    };
    requests.fetch_add(1, Ordering::SeqCst);
    let response = responder(&request);
    let reason = match response.status {
        200 => "OK",
        400 => "Bad Request",
        401 => "Unauthorized",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        503 => "Service Unavailable",
        _ => "Status",
    };
    let payload = format!(
        "HTTP/1.1 {} {}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
        response.status,
        reason,
        response.body.len(),
        response.body
    );
    let _ = stream.write_all(payload.as_bytes());
    let _ = stream.flush();
}

fn read_request(stream: TcpStream) -> Option<(StubRequest, TcpStream)> {
    let mut reader = BufReader::new(stream);
    let mut request_line = String::new();
    reader.read_line(&mut request_line).ok()?;
    if !request_line.starts_with("POST") {
        return None;
    }

    let mut content_length = 0usize;
    let mut authorization = None;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line).ok()?;
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            let value = value.trim();
            match name.to_ascii_lowercase().as_str() {
                "content-length" => content_length = value.parse().unwrap_or(0),
                "authorization" => authorization = Some(value.to_string()),
                _ => {}
            }
        }
    }

    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body).ok()?;
    let body = serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null);
    Some((
        StubRequest {
            body,
            authorization,
        },
        reader.into_inner(),
    ))
}
