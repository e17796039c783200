//! Test fixtures: scripted backend servers speaking the `/analyze` and
//! `/transcribe` protocol, and WAV generators.
//!
//! Deliberately independent of `speejis-core` so every crate can use it as a
//! dev-dependency, including core itself.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};

pub mod wav;

type SpanFn = dyn Fn(usize, usize, f64, f64) -> [f64; 3] + Send + Sync;

/// How the fake `/analyze` endpoint answers.
#[derive(Clone)]
pub enum SerBehavior {
    /// Same raw `[0, 1]` triple for every span.
    Constant([f64; 3]),
    /// Raw triple from `(span_index, span_count, start_s, end_s)`.
    PerSpan(Arc<SpanFn>),
    /// One result fewer than requested.
    ShortByOne,
    /// Every value is 1.5 (outside the raw scale).
    OutOfRange,
    /// Sleeps before answering like `Constant([0.5; 3])`.
    Delay(Duration),
    Status(u16),
    Garbage,
}

impl SerBehavior {
    pub fn per_span(f: impl Fn(usize, usize, f64, f64) -> [f64; 3] + Send + Sync + 'static) -> Self {
        SerBehavior::PerSpan(Arc::new(f))
    }
}

/// How the fake `/transcribe` endpoint answers.
#[derive(Clone)]
pub enum AsrBehavior {
    Segments(Vec<(f64, f64, String)>),
    Status(u16),
}

#[derive(Clone)]
struct Shared {
    ser: SerBehavior,
    asr: AsrBehavior,
    analyze_log: Arc<Mutex<Vec<Value>>>,
    transcribe_log: Arc<Mutex<Vec<Value>>>,
}

/// A fake model server bound to an ephemeral localhost port.
pub struct FakeServer {
    addr: SocketAddr,
    analyze_log: Arc<Mutex<Vec<Value>>>,
    transcribe_log: Arc<Mutex<Vec<Value>>>,
    task: tokio::task::JoinHandle<()>,
}

impl FakeServer {
    pub async fn start(ser: SerBehavior) -> Self {
        Self::start_with(ser, AsrBehavior::Segments(Vec::new())).await
    }

    pub async fn start_with(ser: SerBehavior, asr: AsrBehavior) -> Self {
        let shared = Shared {
            ser,
            asr,
            analyze_log: Arc::default(),
            transcribe_log: Arc::default(),
        };
        let app = Router::new()
            .route("/analyze", post(analyze))
            .route("/transcribe", post(transcribe))
            .with_state(shared.clone());
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
            .await
            .expect("bind fake server");
        let addr = listener.local_addr().expect("local addr");
        let task = tokio::spawn(async move {
            axum::serve(listener, app).await.expect("fake server");
        });
        FakeServer {
            addr,
            analyze_log: shared.analyze_log,
            transcribe_log: shared.transcribe_log,
            task,
        }
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Bodies received on `/analyze`, with `audio_b64` retained.
    pub fn analyze_requests(&self) -> Vec<Value> {
        self.analyze_log.lock().unwrap().clone()
    }

    pub fn transcribe_requests(&self) -> Vec<Value> {
        self.transcribe_log.lock().unwrap().clone()
    }
}

impl Drop for FakeServer {
    fn drop(&mut self) {
        self.task.abort();
    }
}

/// `(start_s, end_s)` of every span in a logged request.
pub fn request_spans(body: &Value) -> Vec<(f64, f64)> {
    body["spans"]
        .as_array()
        .map(|a| {
            a.iter()
                .map(|s| {
                    (
                        s["start_s"].as_f64().unwrap_or(f64::NAN),
                        s["end_s"].as_f64().unwrap_or(f64::NAN),
                    )
                })
                .collect()
        })
        .unwrap_or_default()
}

fn triple(t: [f64; 3]) -> Value {
    json!({"valence": t[0], "arousal": t[1], "dominance": t[2]})
}

async fn analyze(State(s): State<Shared>, Json(body): Json<Value>) -> Response {
    s.analyze_log.lock().unwrap().push(body.clone());
    let spans = request_spans(&body);
    let n = spans.len();
    let results: Vec<Value> = match &s.ser {
        SerBehavior::Constant(t) => spans.iter().map(|_| triple(*t)).collect(),
        SerBehavior::PerSpan(f) => spans
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| triple(f(i, n, a, b)))
            .collect(),
        SerBehavior::ShortByOne => (0..n.saturating_sub(1)).map(|_| triple([0.5; 3])).collect(),
        SerBehavior::OutOfRange => spans.iter().map(|_| triple([1.5; 3])).collect(),
        SerBehavior::Delay(d) => {
            tokio::time::sleep(*d).await;
            spans.iter().map(|_| triple([0.5; 3])).collect()
        }
        SerBehavior::Status(code) => {
            return StatusCode::from_u16(*code)
                .unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
                .into_response();
        }
        SerBehavior::Garbage => return "not json at all".into_response(),
    };
    Json(json!({ "results": results })).into_response()
}

async fn transcribe(State(s): State<Shared>, Json(body): Json<Value>) -> Response {
    s.transcribe_log.lock().unwrap().push(body);
    match &s.asr {
        AsrBehavior::Segments(segs) => {
            let segs: Vec<Value> = segs
                .iter()
                .map(|(a, b, t)| json!({"start_s": a, "end_s": b, "text": t}))
                .collect();
            Json(json!({ "segments": segs })).into_response()
        }
        AsrBehavior::Status(code) => StatusCode::from_u16(*code)
            .unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
            .into_response(),
    }
}

/// An address nothing listens on.
pub fn unreachable_url() -> String {
    let sock = std::net::TcpListener::bind("127.0.0.1:0").expect("bind");
    let addr = sock.local_addr().expect("addr");
    drop(sock);
    format!("http://{addr}")
}
