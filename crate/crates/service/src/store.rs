//! Append-only persistence.
//!
//! Layout under the data directory:
//!
//! ```text
//! audio/<sha256>.wav            canonical WAV, written via temp file + rename
//! conversations/<cid>.jsonl     one record per line
//! ```
//!
//! Audio is always durable before the message record that references it, so
//! a restart can never list a message whose audio is missing. The in-memory
//! index is rebuilt from the logs on open; a torn final line is truncated.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use speejis_core::AugmentationDescriptor;
use tokio::sync::{broadcast, Mutex};

use crate::error::ServiceError;
use crate::model::{now_micros, rfc3339, Conversation, Event, EventType, MessageStatus, VoiceMessage};

/// Per-conversation event buffer; a subscriber further behind is dropped.
pub const EVENT_BUFFER: usize = 256;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Conversation {
        conversation_id: String,
        title: String,
        #[serde(serialize_with = "rfc3339")]
        created_at: DateTime<Utc>,
    },
    Message {
        message_id: String,
        sender: String,
        #[serde(serialize_with = "rfc3339")]
        created_at: DateTime<Utc>,
        audio_ref: String,
    },
    Augmented {
        message_id: String,
        descriptor: Box<AugmentationDescriptor>,
    },
}

struct ConvLog {
    file: File,
    last_ts: DateTime<Utc>,
}

impl ConvLog {
    fn append(&mut self, record: &Record) -> io::Result<()> {
        let mut line = serde_json::to_string(record).map_err(io::Error::other)?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()
    }

    /// Strictly increasing within the conversation.
    fn next_ts(&mut self) -> DateTime<Utc> {
        let now = now_micros();
        self.last_ts = if now > self.last_ts {
            now
        } else {
            self.last_ts + Duration::microseconds(1)
        };
        self.last_ts
    }
}

struct ConvEntry {
    title: String,
    created_at: DateTime<Utc>,
    message_ids: Vec<String>,
    log: Arc<Mutex<ConvLog>>,
    events: broadcast::Sender<Event>,
}

#[derive(Default)]
struct Index {
    conversations: HashMap<String, ConvEntry>,
    messages: HashMap<String, Arc<VoiceMessage>>,
}

pub struct Store {
    root: PathBuf,
    index: RwLock<Index>,
}

/// What `Store::open` found.
pub struct Recovered {
    pub store: Store,
    /// Messages still `processing` when the previous process stopped.
    pub pending: Vec<String>,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Recovered, ServiceError> {
        let root = root.into();
        fs::create_dir_all(root.join("audio"))?;
        fs::create_dir_all(root.join("conversations"))?;
        let mut index = Index::default();
        let mut pending = Vec::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(root.join("conversations"))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            load_conversation(&root, &path, &mut index, &mut pending)?;
        }
        // oldest first so re-run order follows upload order
        pending.sort_by_key(|id| index.messages[id].created_at);
        Ok(Recovered {
            store: Store {
                root,
                index: RwLock::new(index),
            },
            pending,
        })
    }

    pub fn audio_path(&self, audio_ref: &str) -> PathBuf {
        self.root.join("audio").join(format!("{audio_ref}.wav"))
    }

    /// Stores canonical audio under its content hash. Idempotent.
    pub fn put_audio(&self, audio_ref: &str, bytes: &[u8]) -> io::Result<()> {
        let path = self.audio_path(audio_ref);
        if path.exists() {
            return Ok(());
        }
        let tmp = self
            .root
            .join("audio")
            .join(format!(".{audio_ref}.{}.tmp", uuid::Uuid::now_v7()));
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        drop(f);
        fs::rename(&tmp, &path)?;
        sync_dir(&self.root.join("audio"))
    }

    pub fn read_audio(&self, audio_ref: &str) -> io::Result<Vec<u8>> {
        fs::read(self.audio_path(audio_ref))
    }

    pub fn create_conversation(&self, title: &str) -> Result<Conversation, ServiceError> {
        let id = uuid::Uuid::now_v7().to_string();
        let path = self.root.join("conversations").join(format!("{id}.jsonl"));
        let file = OpenOptions::new().create_new(true).append(true).open(&path)?;
        sync_dir(&self.root.join("conversations"))?;
        let created_at = now_micros();
        let mut log = ConvLog {
            file,
            last_ts: created_at,
        };
        log.append(&Record::Conversation {
            conversation_id: id.clone(),
            title: title.to_owned(),
            created_at,
        })?;
        let (events, _) = broadcast::channel(EVENT_BUFFER);
        self.index.write().unwrap().conversations.insert(
            id.clone(),
            ConvEntry {
                title: title.to_owned(),
                created_at,
                message_ids: Vec::new(),
                log: Arc::new(Mutex::new(log)),
                events,
            },
        );
        Ok(Conversation {
            conversation_id: id,
            title: title.to_owned(),
            created_at,
            message_ids: Vec::new(),
        })
    }

    pub fn conversation(&self, cid: &str) -> Result<Conversation, ServiceError> {
        let index = self.index.read().unwrap();
        let c = index
            .conversations
            .get(cid)
            .ok_or_else(|| not_found("conversation", cid))?;
        Ok(Conversation {
            conversation_id: cid.to_owned(),
            title: c.title.clone(),
            created_at: c.created_at,
            message_ids: c.message_ids.clone(),
        })
    }

    pub fn has_conversation(&self, cid: &str) -> bool {
        self.index.read().unwrap().conversations.contains_key(cid)
    }

    /// Appends a new `processing` message and announces it.
    pub async fn append_message(
        &self,
        cid: &str,
        sender: &str,
        audio_ref: &str,
    ) -> Result<Arc<VoiceMessage>, ServiceError> {
        let log = self.log_of(cid)?;
        let mut log = log.lock().await;
        let msg = Arc::new(VoiceMessage {
            message_id: uuid::Uuid::now_v7().to_string(),
            conversation_id: cid.to_owned(),
            sender: sender.to_owned(),
            created_at: log.next_ts(),
            audio_ref: audio_ref.to_owned(),
            status: MessageStatus::Processing,
            descriptor: None,
        });
        log.append(&Record::Message {
            message_id: msg.message_id.clone(),
            sender: msg.sender.clone(),
            created_at: msg.created_at,
            audio_ref: msg.audio_ref.clone(),
        })?;
        let mut index = self.index.write().unwrap();
        index.messages.insert(msg.message_id.clone(), msg.clone());
        let conv = index
            .conversations
            .get_mut(cid)
            .expect("conversation present while its log is held");
        conv.message_ids.push(msg.message_id.clone());
        let _ = conv.events.send(Event {
            kind: EventType::Created,
            message_id: msg.message_id.clone(),
            status: msg.status,
        });
        Ok(msg)
    }

    /// Persists the descriptor of a finished job and announces it.
    pub async fn record_augmented(
        &self,
        mid: &str,
        descriptor: AugmentationDescriptor,
    ) -> Result<Arc<VoiceMessage>, ServiceError> {
        let current = self.message(mid)?;
        let log = self.log_of(&current.conversation_id)?;
        let mut log = log.lock().await;
        log.append(&Record::Augmented {
            message_id: mid.to_owned(),
            descriptor: Box::new(descriptor.clone()),
        })?;
        let mut updated = (*current).clone();
        updated.status = descriptor.status.into();
        updated.descriptor = Some(descriptor);
        let updated = Arc::new(updated);
        let mut index = self.index.write().unwrap();
        index.messages.insert(mid.to_owned(), updated.clone());
        if let Some(conv) = index.conversations.get(&updated.conversation_id) {
            let _ = conv.events.send(Event {
                kind: EventType::Augmented,
                message_id: mid.to_owned(),
                status: updated.status,
            });
        }
        Ok(updated)
    }

    pub fn message(&self, mid: &str) -> Result<Arc<VoiceMessage>, ServiceError> {
        self.index
            .read()
            .unwrap()
            .messages
            .get(mid)
            .cloned()
            .ok_or_else(|| not_found("message", mid))
    }

    /// Messages in conversation order, optionally only those strictly newer
    /// than `since`.
    pub fn list(&self, cid: &str, since: Option<DateTime<Utc>>) -> Result<Vec<Arc<VoiceMessage>>, ServiceError> {
        let index = self.index.read().unwrap();
        let conv = index
            .conversations
            .get(cid)
            .ok_or_else(|| not_found("conversation", cid))?;
        Ok(conv
            .message_ids
            .iter()
            .map(|id| index.messages[id].clone())
            .filter(|m| since.is_none_or(|t| m.created_at > t))
            .collect())
    }

    pub fn subscribe(&self, cid: &str) -> Result<broadcast::Receiver<Event>, ServiceError> {
        let index = self.index.read().unwrap();
        let conv = index
            .conversations
            .get(cid)
            .ok_or_else(|| not_found("conversation", cid))?;
        Ok(conv.events.subscribe())
    }

    fn log_of(&self, cid: &str) -> Result<Arc<Mutex<ConvLog>>, ServiceError> {
        let index = self.index.read().unwrap();
        let conv = index
            .conversations
            .get(cid)
            .ok_or_else(|| not_found("conversation", cid))?;
        Ok(conv.log.clone())
    }
}

fn not_found(what: &str, id: &str) -> ServiceError {
    ServiceError::NotFound(format!("{what} {id}"))
}

fn sync_dir(dir: &Path) -> io::Result<()> {
    File::open(dir)?.sync_all()
}

fn load_conversation(
    root: &Path,
    path: &Path,
    index: &mut Index,
    pending: &mut Vec<String>,
) -> Result<(), ServiceError> {
    let bytes = fs::read(path)?;
    let mut good_end = 0usize;
    let mut records = Vec::new();
    let mut offset = 0usize;
    while offset < bytes.len() {
        let Some(nl) = bytes[offset..].iter().position(|&b| b == b'\n') else {
            break; // unterminated final line: a write cut short
        };
        let line = &bytes[offset..offset + nl];
        offset += nl + 1;
        match serde_json::from_slice::<Record>(line) {
            Ok(r) => records.push(r),
            Err(e) if offset >= bytes.len() => {
                tracing::warn!(path = %path.display(), error = %e, "dropping torn final record");
                break;
            }
            Err(e) => {
                tracing::warn!(path = %path.display(), error = %e, "skipping unreadable record");
                good_end = offset;
                continue;
            }
        }
        good_end = offset;
    }
    if good_end < bytes.len() {
        OpenOptions::new().write(true).open(path)?.set_len(good_end as u64)?;
    }

    let mut records = records.into_iter();
    let Some(Record::Conversation {
        conversation_id,
        title,
        created_at,
    }) = records.next()
    else {
        tracing::warn!(path = %path.display(), "log does not start with a conversation record; ignored");
        return Ok(());
    };
    let mut entry = ConvEntry {
        title,
        created_at,
        message_ids: Vec::new(),
        log: Arc::new(Mutex::new(ConvLog {
            file: OpenOptions::new().append(true).open(path)?,
            last_ts: created_at,
        })),
        events: broadcast::channel(EVENT_BUFFER).0,
    };
    let mut last_ts = created_at;
    for record in records {
        match record {
            Record::Conversation { .. } => {
                tracing::warn!(path = %path.display(), "duplicate conversation record ignored");
            }
            Record::Message {
                message_id,
                sender,
                created_at,
                audio_ref,
            } => {
                if !root.join("audio").join(format!("{audio_ref}.wav")).is_file() {
                    tracing::warn!(message_id, "audio missing; message not listed");
                    continue;
                }
                last_ts = last_ts.max(created_at);
                entry.message_ids.push(message_id.clone());
                index.messages.insert(
                    message_id.clone(),
                    Arc::new(VoiceMessage {
                        message_id,
                        conversation_id: conversation_id.clone(),
                        sender,
                        created_at,
                        audio_ref,
                        status: MessageStatus::Processing,
                        descriptor: None,
                    }),
                );
            }
            Record::Augmented { message_id, descriptor } => {
                let Some(msg) = index.messages.get_mut(&message_id) else {
                    continue;
                };
                if let Err(e) = descriptor.validate() {
                    tracing::warn!(message_id, error = %e, "stored descriptor invalid; will re-run");
                    continue;
                }
                let m = Arc::make_mut(msg);
                m.status = descriptor.status.into();
                m.descriptor = Some(*descriptor);
            }
        }
    }
    entry.message_ids.sort_by(|a, b| {
        let (ma, mb) = (&index.messages[a], &index.messages[b]);
        (ma.created_at, a).cmp(&(mb.created_at, b))
    });
    pending.extend(
        entry
            .message_ids
            .iter()
            .filter(|id| index.messages[*id].status == MessageStatus::Processing)
            .cloned(),
    );
    entry.log.try_lock().expect("fresh mutex").last_ts = last_ts;
    index.conversations.insert(conversation_id, entry);
    Ok(())
}
