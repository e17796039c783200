use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize, Serializer};
use speejis_core::{AugmentationDescriptor, DescriptorStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageStatus {
    Processing,
    Done,
    AugmentationFailed,
}

impl From<DescriptorStatus> for MessageStatus {
    fn from(s: DescriptorStatus) -> Self {
        match s {
            DescriptorStatus::Done => MessageStatus::Done,
            DescriptorStatus::AugmentationFailed => MessageStatus::AugmentationFailed,
        }
    }
}

/// Timestamps are kept at microsecond precision so that the RFC 3339 form
/// served to clients parses back to the identical instant.
pub fn now_micros() -> DateTime<Utc> {
    let now = Utc::now();
    DateTime::from_timestamp_micros(now.timestamp_micros()).unwrap_or(now)
}

pub(crate) fn rfc3339<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Micros, true))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoiceMessage {
    pub message_id: String,
    pub conversation_id: String,
    pub sender: String,
    #[serde(serialize_with = "rfc3339")]
    pub created_at: DateTime<Utc>,
    /// Hex SHA-256 of the canonical WAV bytes.
    pub audio_ref: String,
    pub status: MessageStatus,
    pub descriptor: Option<AugmentationDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conversation {
    pub conversation_id: String,
    pub title: String,
    #[serde(serialize_with = "rfc3339")]
    pub created_at: DateTime<Utc>,
    pub message_ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventType {
    #[serde(rename = "message.created")]
    Created,
    #[serde(rename = "message.augmented")]
    Augmented,
}

/// One frame of the per-conversation event stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    #[serde(rename = "type")]
    pub kind: EventType,
    pub message_id: String,
    pub status: MessageStatus,
}
