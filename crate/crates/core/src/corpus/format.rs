//! The canonical corpus file format.
//!
//! One document per line, JSON objects with keys exactly in the order
//! `doc_id`, `source`, `text`, `spans`; each span object in the order
//! `start`, `end`, `type`, `surface`. Spans are sorted by
//! `(start, end, type)` on write, so re-serializing a loaded file is a
//! canonicalizing operation.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::{AnnotatedDocument, Corpus, Error, Result};

/// Loads a corpus, validating every document. Errors name the offending
/// line number (malformed JSON) or document id (invariant violations).
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let file = File::open(path.as_ref())?;
    load_corpus_reader(BufReader::new(file))
}

pub fn load_corpus_reader(reader: impl BufRead) -> Result<Corpus> {
    let mut docs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let number = idx + 1;
        let doc: AnnotatedDocument =
            serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
                line: number,
                message: e.to_string(),
            })?;
        if let Some(v) = doc.validate().into_iter().next() {
            return Err(Error::InvalidDocument {
                doc_id: doc.doc_id,
                detail: v.to_string(),
            });
        }
        docs.push(doc);
    }
    Corpus::new(docs)
}

/// Serializes a corpus to its canonical byte representation.
pub fn corpus_to_string(corpus: &Corpus) -> String {
    let mut out = String::new();
    for doc in corpus.iter() {
        let canonical = AnnotatedDocument {
            doc_id: doc.doc_id.clone(),
            source: doc.source,
            text: doc.text.clone(),
            spans: doc.sorted_spans(),
        };
        out.push_str(&serde_json::to_string(&canonical).expect("document serializes"));
        out.push('\n');
    }
    out
}

pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let mut file = File::create(path.as_ref())?;
    file.write_all(corpus_to_string(corpus).as_bytes())?;
    Ok(())
}
