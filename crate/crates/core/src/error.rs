use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by every pipeline stage.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("line {line}: malformed record: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("document {doc_id}: {detail}")]
    InvalidDocument { doc_id: String, detail: String },

    #[error("duplicate doc_id {doc_id}")]
    DuplicateDocId { doc_id: String },

    #[error("{file}: missing required column {column}")]
    MissingColumn { file: String, column: String },

    #[error("duplicate VAERS_ID {id} in data file")]
    DuplicateVaersId { id: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("prompt template: {0}")]
    Template(String),

    #[error("corpora disagree on document {doc_id}: {detail}")]
    CorpusMismatch { doc_id: String, detail: String },

    #[error("backend transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },

    #[error("backend returned HTTP {status} after {attempts} attempt(s)")]
    BackendStatus { status: u16, attempts: u32 },

    #[error("malformed backend response: {0}")]
    MalformedResponse(String),

    #[error("auth token environment variable {0} is not set")]
    MissingAuth(String),

    #[error("cache conflict for key {key}: existing entry differs")]
    CacheConflict { key: String },

    #[error("cache file line {line} is corrupt: {message}")]
    CacheCorrupt { line: usize, message: String },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// True when the failure originated in the generation backend or its
    /// transport, as opposed to bad input data. The CLI maps these to a
    /// distinct exit status.
    pub fn is_backend(&self) -> bool {
        matches!(
            self,
            Error::Transport { .. }
                | Error::BackendStatus { .. }
                | Error::MalformedResponse(_)
                | Error::MissingAuth(_)
        )
    }
}
