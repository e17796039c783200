//! Helpers for driving the `speejis` binary.

#![allow(dead_code)]

use std::path::Path;
use std::process::{Output, Stdio};
use std::time::{Duration, Instant};

use futures::StreamExt;
use reqwest::multipart::{Form, Part};
use serde_json::{json, Value};
use tokio::io::{AsyncBufReadExt, BufReader, Lines};
use tokio::process::{Child, ChildStdout, Command};
use tokio_tungstenite::tungstenite::Message;

pub const BIN: &str = env!("CARGO_BIN_EXE_speejis");

const ENV_VARS: [&str; 8] = [
    "SPEEJI_DATA_DIR",
    "SPEEJI_SER_BACKEND",
    "SPEEJI_SER_URL",
    "SPEEJI_ASR_URL",
    "SPEEJI_EMOJI_TABLE",
    "SPEEJI_PORT",
    "SPEEJI_NEUTRAL_TAU",
    "SPEEJI_INTEREST_TAU",
];

/// The binary with a clean environment.
pub fn speejis() -> std::process::Command {
    let mut c = std::process::Command::new(BIN);
    for v in ENV_VARS {
        c.env_remove(v);
    }
    c
}

pub async fn run(args: &[&str]) -> Output {
    let mut c = Command::from(speejis());
    c.args(args).output().await.expect("run speejis")
}

/// The JSON object the binary wrote to stderr.
pub fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .unwrap_or_else(|| panic!("no JSON on stderr: {text}"));
    serde_json::from_str(line).unwrap()
}

pub struct Served {
    pub child: Child,
    pub base: String,
    pub http: reqwest::Client,
    _stdout: Lines<BufReader<ChildStdout>>,
}

pub async fn serve(data_dir: &Path, extra: &[&str]) -> Served {
    let mut c = Command::from(speejis());
    c.arg("serve")
        .arg("--port")
        .arg("0")
        .arg("--data-dir")
        .arg(data_dir)
        .args(extra)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .kill_on_drop(true);
    let mut child = c.spawn().expect("spawn serve");
    let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
    let line = tokio::time::timeout(Duration::from_secs(20), lines.next_line())
        .await
        .expect("serve announces its address")
        .unwrap()
        .expect("serve exited before listening");
    let base = line.strip_prefix("listening on ").expect("address line").to_owned();
    Served {
        child,
        base,
        http: reqwest::Client::new(),
        _stdout: lines,
    }
}

pub type WsStream = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

impl Served {
    pub fn pid(&self) -> u32 {
        self.child.id().expect("running")
    }

    pub async fn kill9(&mut self) {
        self.child.start_kill().unwrap();
        self.child.wait().await.unwrap();
    }

    pub fn sigterm(&self) {
        let ok = std::process::Command::new("kill")
            .arg("-TERM")
            .arg(self.pid().to_string())
            .status()
            .unwrap()
            .success();
        assert!(ok);
    }

    pub async fn conversation(&self) -> String {
        let r: Value = self
            .http
            .post(format!("{}/api/conversations", self.base))
            .json(&json!({"title": "acceptance"}))
            .send()
            .await
            .unwrap()
            .json()
            .await
            .unwrap();
        r["conversation_id"].as_str().unwrap().to_owned()
    }

    pub async fn post(&self, cid: &str, audio: Vec<u8>) -> reqwest::Result<reqwest::Response> {
        let form = Form::new()
            .part("audio", Part::bytes(audio).file_name("voice.wav"))
            .text("sender", "tester");
        self.http
            .post(format!("{}/api/conversations/{cid}/messages", self.base))
            .multipart(form)
            .send()
            .await
    }

    pub async fn get(&self, path: &str) -> reqwest::Response {
        self.http.get(format!("{}{path}", self.base)).send().await.unwrap()
    }

    pub async fn message(&self, mid: &str) -> Value {
        self.get(&format!("/api/messages/{mid}")).await.json().await.unwrap()
    }

    pub async fn list(&self, cid: &str) -> Vec<Value> {
        self.get(&format!("/api/conversations/{cid}/messages"))
            .await
            .json()
            .await
            .unwrap()
    }

    pub async fn wait_settled(&self, mid: &str, limit: Duration) -> Option<Value> {
        let deadline = Instant::now() + limit;
        loop {
            let m = self.message(mid).await;
            if m["status"] != "processing" {
                return Some(m);
            }
            if Instant::now() > deadline {
                return None;
            }
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
    }

    pub async fn subscribe(&self, cid: &str) -> WsStream {
        let url = format!("{}/api/ws?conversation={cid}", self.base.replace("http://", "ws://"));
        tokio_tungstenite::connect_async(url).await.unwrap().0
    }
}

/// Next JSON text frame, or `None` after `limit`.
pub async fn next_event(ws: &mut WsStream, limit: Duration) -> Option<Value> {
    let deadline = tokio::time::Instant::now() + limit;
    loop {
        let frame = tokio::time::timeout_at(deadline, ws.next()).await.ok()??.ok()?;
        if let Message::Text(t) = frame {
            return serde_json::from_str(&t).ok();
        }
    }
}
