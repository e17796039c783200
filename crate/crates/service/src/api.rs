use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::ws::{CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::Deserialize;
use speejis_core::{content_hash, decode_wav, encode_wav, render_svg, RenderOptions};
use tokio::sync::broadcast::error::RecvError;

use crate::error::ServiceError;
use crate::model::{Conversation, VoiceMessage};
use crate::store::Store;
use crate::worker::Workers;

/// Upload size cap. Generous enough for 300 s of 48 kHz stereo float audio.
pub const MAX_UPLOAD_BYTES: usize = 128 * 1024 * 1024;

pub const DEFAULT_SVG_WIDTH: f64 = 400.0;
pub const DEFAULT_SVG_HEIGHT: f64 = 64.0;

pub(crate) struct AppState {
    pub store: Arc<Store>,
    pub workers: Workers,
    pub max_duration_s: f64,
}

type Shared = State<Arc<AppState>>;

pub(crate) fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/conversations", post(create_conversation))
        .route("/api/conversations/{cid}", get(get_conversation))
        .route(
            "/api/conversations/{cid}/messages",
            get(list_messages).post(post_message),
        )
        .route("/api/messages/{mid}", get(get_message))
        .route("/api/messages/{mid}/audio", get(get_audio))
        .route("/api/messages/{mid}/waveform.svg", get(get_waveform))
        .route("/api/ws", get(events))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

#[derive(Deserialize)]
struct NewConversation {
    #[serde(default)]
    title: String,
}

async fn create_conversation(
    State(s): Shared,
    Json(body): Json<NewConversation>,
) -> Result<(StatusCode, Json<Conversation>), ServiceError> {
    Ok((StatusCode::CREATED, Json(s.store.create_conversation(&body.title)?)))
}

async fn get_conversation(State(s): Shared, Path(cid): Path<String>) -> Result<Json<Conversation>, ServiceError> {
    Ok(Json(s.store.conversation(&cid)?))
}

#[derive(Deserialize)]
struct Since {
    since: Option<String>,
}

async fn list_messages(
    State(s): Shared,
    Path(cid): Path<String>,
    Query(q): Query<Since>,
) -> Result<Json<Vec<Arc<VoiceMessage>>>, ServiceError> {
    let since = q
        .since
        .map(|t| {
            DateTime::parse_from_rfc3339(&t)
                .map(|t| t.with_timezone(&Utc))
                .map_err(|e| ServiceError::BadRequest(format!("since: {e}")))
        })
        .transpose()?;
    Ok(Json(s.store.list(&cid, since)?))
}

async fn post_message(
    State(s): Shared,
    Path(cid): Path<String>,
    mut form: Multipart,
) -> Result<(StatusCode, Json<Arc<VoiceMessage>>), ServiceError> {
    if !s.store.has_conversation(&cid) {
        return Err(ServiceError::NotFound(format!("conversation {cid}")));
    }
    let mut audio: Option<Bytes> = None;
    let mut sender = String::new();
    while let Some(field) = form
        .next_field()
        .await
        .map_err(|e| ServiceError::BadRequest(format!("multipart: {e}")))?
    {
        match field.name() {
            Some("audio") => {
                audio = Some(
                    field
                        .bytes()
                        .await
                        .map_err(|e| ServiceError::BadRequest(format!("audio: {e}")))?,
                );
            }
            Some("sender") => {
                sender = field
                    .text()
                    .await
                    .map_err(|e| ServiceError::BadRequest(format!("sender: {e}")))?;
            }
            _ => {}
        }
    }
    let audio = audio.ok_or_else(|| ServiceError::BadRequest("missing multipart field `audio`".into()))?;
    let clip = decode_wav(&audio).map_err(|e| ServiceError::Undecodable(e.to_string()))?;
    if clip.duration_s() > s.max_duration_s {
        return Err(ServiceError::TooLong(format!(
            "message is {:.1} s; limit is {} s",
            clip.duration_s(),
            s.max_duration_s
        )));
    }
    let canonical = encode_wav(&clip);
    let audio_ref = content_hash(&canonical);
    s.store.put_audio(&audio_ref, &canonical)?;
    let msg = s.store.append_message(&cid, &sender, &audio_ref).await?;
    s.workers.enqueue(msg.message_id.clone(), clip);
    Ok((StatusCode::CREATED, Json(msg)))
}

async fn get_message(State(s): Shared, Path(mid): Path<String>) -> Result<Json<Arc<VoiceMessage>>, ServiceError> {
    Ok(Json(s.store.message(&mid)?))
}

async fn get_audio(State(s): Shared, Path(mid): Path<String>) -> Result<Response, ServiceError> {
    let msg = s.store.message(&mid)?;
    let bytes = s.store.read_audio(&msg.audio_ref)?;
    Ok(([(header::CONTENT_TYPE, "audio/wav")], bytes).into_response())
}

#[derive(Deserialize)]
struct SvgQuery {
    width: Option<f64>,
    height: Option<f64>,
    segments: Option<u8>,
}

async fn get_waveform(
    State(s): Shared,
    Path(mid): Path<String>,
    Query(q): Query<SvgQuery>,
) -> Result<Response, ServiceError> {
    let msg = s.store.message(&mid)?;
    let Some(d) = &msg.descriptor else {
        return Err(ServiceError::Conflict(format!("message {mid} is still processing")));
    };
    let segments = match q.segments.unwrap_or(0) {
        0 => false,
        1 => true,
        n => return Err(ServiceError::BadRequest(format!("segments must be 0 or 1, got {n}"))),
    };
    let svg = render_svg(
        d,
        q.width.unwrap_or(DEFAULT_SVG_WIDTH),
        q.height.unwrap_or(DEFAULT_SVG_HEIGHT),
        RenderOptions { segments },
    )
    .map_err(|e| ServiceError::BadRequest(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}

#[derive(Deserialize)]
struct WsQuery {
    conversation: String,
}

async fn events(State(s): Shared, Query(q): Query<WsQuery>, ws: WebSocketUpgrade) -> Result<Response, ServiceError> {
    // subscribe before the upgrade completes so nothing after the handshake is missed
    let rx = s.store.subscribe(&q.conversation)?;
    Ok(ws.on_upgrade(move |socket| pump(socket, rx)))
}

async fn pump(mut socket: WebSocket, mut rx: tokio::sync::broadcast::Receiver<crate::model::Event>) {
    loop {
        tokio::select! {
            ev = rx.recv() => match ev {
                Ok(ev) => {
                    let text = serde_json::to_string(&ev).expect("event serializes");
                    if socket.send(Message::Text(text.into())).await.is_err() {
                        return;
                    }
                }
                Err(RecvError::Lagged(n)) => {
                    tracing::info!(skipped = n, "disconnecting slow subscriber");
                    let _ = socket
                        .send(Message::Close(Some(CloseFrame { code: 1008, reason: "subscriber lagged".into() })))
                        .await;
                    return;
                }
                Err(RecvError::Closed) => return,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => return,
                Some(Ok(_)) => {}
            },
        }
    }
}
