//! Tokenization and IOB tag sequences.
//!
//! Every predictor in an ensemble sees the same token grid, so the
//! tokenizer is deliberately model-agnostic: split on Unicode whitespace,
//! then peel leading and trailing characters that are neither letters,
//! digits, nor `&` off each chunk as single-character tokens. `&` stays
//! word-internal so manufacturer names like "J&J" survive as one token.

use std::fmt;
use std::str::FromStr;

use crate::corpus::{AnnotatedDocument, Corpus, EntitySpan, EntityType};
use crate::{Error, Result};

/// A token: a character interval into its parent text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

/// A per-token IOB tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Outside,
    Begin(EntityType),
    Inside(EntityType),
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Outside => f.write_str("O"),
            Tag::Begin(t) => write!(f, "B-{t}"),
            Tag::Inside(t) => write!(f, "I-{t}"),
        }
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "O" {
            return Ok(Tag::Outside);
        }
        match s.split_once('-') {
            Some(("B", t)) => Ok(Tag::Begin(t.parse()?)),
            Some(("I", t)) => Ok(Tag::Inside(t.parse()?)),
            _ => Err(Error::Invalid(format!("unknown tag {s:?}"))),
        }
    }
}

pub type TagSequence = Vec<Tag>;

/// Counters for lossy situations met while encoding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EncodeStats {
    /// Spans whose boundaries did not sit on token boundaries and were
    /// expanded outward to whole tokens.
    pub clipped: usize,
    /// Tokens claimed by spans of more than one type.
    pub type_conflicts: usize,
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '&'
}

/// Splits `text` into tokens. Deterministic, offsets in character units.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let chunk_start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        emit_chunk(&chars, chunk_start, i, &mut tokens);
    }
    tokens
}

/// Peels non-word single-character tokens off both ends of the chunk
/// `[start, end)`, keeping the middle intact.
fn emit_chunk(chars: &[char], start: usize, end: usize, out: &mut Vec<Token>) {
    let mut lo = start;
    let mut hi = end;
    let mut leading = Vec::new();
    while lo < hi && !is_token_char(chars[lo]) {
        leading.push(lo);
        lo += 1;
    }
    let mut trailing = Vec::new();
    while hi > lo && !is_token_char(chars[hi - 1]) {
        trailing.push(hi - 1);
        hi -= 1;
    }
    trailing.reverse();

    let single = |idx: usize| Token {
        start: idx,
        end: idx + 1,
        surface: chars[idx].to_string(),
    };
    out.extend(leading.into_iter().map(single));
    if lo < hi {
        out.push(Token {
            start: lo,
            end: hi,
            surface: chars[lo..hi].iter().collect(),
        });
    }
    out.extend(trailing.into_iter().map(single));
}

/// Cross-type claims on one token resolve to the most frequent class in
/// this corpus first: ae, then vaccine, then shot.
fn precedence(etype: EntityType) -> u8 {
    match etype {
        EntityType::AdverseEvent => 0,
        EntityType::Vaccine => 1,
        EntityType::Shot => 2,
    }
}

/// Encodes a document's spans over `tokens` as one merged IOB sequence.
///
/// Spans not aligned to token boundaries are expanded outward to whole
/// tokens (never truncated), counted in [`EncodeStats::clipped`]. When
/// spans of different types claim the same token the higher-precedence
/// type wins and [`EncodeStats::type_conflicts`] counts the token.
pub fn encode_iob(doc: &AnnotatedDocument, tokens: &[Token]) -> (TagSequence, EncodeStats) {
    let mut stats = EncodeStats::default();

    // Clip each span to the token interval it touches.
    let mut token_ranges: Vec<(usize, usize, EntityType)> = Vec::new();
    for span in doc.sorted_spans() {
        let first = tokens
            .iter()
            .position(|t| t.end > span.start && t.start < span.end);
        let last = tokens
            .iter()
            .rposition(|t| t.end > span.start && t.start < span.end);
        let (Some(first), Some(last)) = (first, last) else {
            continue;
        };
        if tokens[first].start != span.start || tokens[last].end != span.end {
            stats.clipped += 1;
        }
        token_ranges.push((first, last, span.etype));
    }

    // Resolve per-token winners.
    let mut claims: Vec<Vec<(EntityType, usize)>> = vec![Vec::new(); tokens.len()];
    for (range_idx, &(first, last, etype)) in token_ranges.iter().enumerate() {
        for claim in claims.iter_mut().take(last + 1).skip(first) {
            claim.push((etype, range_idx));
        }
    }
    let mut winners: Vec<Option<EntityType>> = Vec::with_capacity(tokens.len());
    for claim in &claims {
        let distinct: std::collections::BTreeSet<EntityType> =
            claim.iter().map(|(t, _)| *t).collect();
        if distinct.len() > 1 {
            stats.type_conflicts += 1;
        }
        winners.push(distinct.into_iter().min_by_key(|t| precedence(*t)));
    }

    // First token of each surviving span opens with B.
    let mut tags = vec![Tag::Outside; tokens.len()];
    for i in 0..tokens.len() {
        let Some(t) = winners[i] else { continue };
        let starts_here = token_ranges
            .iter()
            .any(|&(first, _, etype)| etype == t && first == i);
        let continues = i > 0 && winners[i - 1] == Some(t) && !starts_here;
        tags[i] = if continues { Tag::Inside(t) } else { Tag::Begin(t) };
    }
    (tags, stats)
}

/// Decodes an IOB sequence back to spans: maximal B/I runs of one type
/// become spans from the first token's start to the last token's end.
/// Decoding is lenient — an `I-t` with no open `t` run is treated as
/// `B-t` — so ill-formed sequences from external taggers still decode.
pub fn decode_iob(text: &str, tokens: &[Token], tags: &[Tag]) -> Vec<EntitySpan> {
    debug_assert_eq!(tokens.len(), tags.len());
    let mut spans = Vec::new();
    let mut open: Option<(EntityType, usize, usize)> = None; // (type, start, end)

    let close = |open: &mut Option<(EntityType, usize, usize)>, spans: &mut Vec<EntitySpan>| {
        if let Some((etype, start, end)) = open.take() {
            if let Some(span) = EntitySpan::from_text(text, start, end, etype) {
                spans.push(span);
            }
        }
    };

    for (token, tag) in tokens.iter().zip(tags.iter()) {
        match tag {
            Tag::Outside => close(&mut open, &mut spans),
            Tag::Begin(t) => {
                close(&mut open, &mut spans);
                open = Some((*t, token.start, token.end));
            }
            Tag::Inside(t) => match &mut open {
                Some((current, _, end)) if current == t => *end = token.end,
                _ => {
                    close(&mut open, &mut spans);
                    open = Some((*t, token.start, token.end));
                }
            },
        }
    }
    close(&mut open, &mut spans);
    spans.sort();
    spans
}

/// CoNLL-style export: one `surface<TAB>tag` line per token, documents
/// separated by a blank line.
pub fn to_conll(corpus: &Corpus) -> (String, EncodeStats) {
    let mut out = String::new();
    let mut total = EncodeStats::default();
    for (idx, doc) in corpus.iter().enumerate() {
        if idx > 0 {
            out.push('\n');
        }
        let tokens = tokenize(&doc.text);
        let (tags, stats) = encode_iob(doc, &tokens);
        total.clipped += stats.clipped;
        total.type_conflicts += stats.type_conflicts;
        for (token, tag) in tokens.iter().zip(tags.iter()) {
            out.push_str(&token.surface);
            out.push('\t');
            out.push_str(&tag.to_string());
            out.push('\n');
        }
    }
    (out, total)
}
