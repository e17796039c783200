use std::path::Path;

use serde_json::{json, Value};
use speejis_core::Error;

/// A command failure: exit code plus a JSON line for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    kind: &'static str,
    message: String,
    pointer: Option<String>,
    file: Option<String>,
}

impl Failure {
    pub fn new(code: u8, kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            kind,
            message: message.into(),
            pointer: None,
            file: None,
        }
    }

    pub fn input(kind: &'static str, message: impl Into<String>) -> Self {
        Self::new(2, kind, message)
    }

    pub fn at_file(mut self, file: &Path) -> Self {
        self.file = Some(file.display().to_string());
        self
    }

    pub fn report(&self) {
        let mut v = json!({ "error": self.kind, "message": self.message });
        if let Some(p) = &self.pointer {
            v["path"] = Value::String(p.clone());
        }
        if let Some(f) = &self.file {
            v["file"] = Value::String(f.clone());
        }
        eprintln!("{v}");
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Schema { path, message } => Failure {
                pointer: Some(path),
                ..Failure::input("schema", message)
            },
            Error::Decode(m) => Failure::input("decode", m),
            Error::Table(m) => Failure::input("table", m),
            Error::InvalidVad(m) | Error::Input(m) => Failure::input("input", m),
            Error::Io(e) => Failure::input("io", e.to_string()),
            Error::Backend(e) => Failure::new(3, "backend", e.to_string()),
        }
    }
}
