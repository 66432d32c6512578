//! Social-media record filtering.
//!
//! Records arrive as line-delimited JSON exports (one post per line) and
//! pass through a conjunction of rules: no retweets or quotes, a follower
//! cap, a date window, at least one hit from *each* configured keyword
//! set, and at least one adverse-event lexicon term when a lexicon is
//! configured. Keyword matching is case-insensitive on token boundaries,
//! so "J&J" matches as a literal token and multi-word keywords match as
//! token sequences.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedDocument, Corpus, Source};
use crate::tagging::tokenize;
use crate::{Error, Result};

/// One raw post or tweet prior to filtering.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SocialRecord {
    pub id: String,
    pub source: Source,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_retweet: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_quote: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub follower_count: Option<u64>,
    /// ISO-8601 date or RFC 3339 timestamp.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

/// Reads records from a line-delimited JSON file.
pub fn load_social_records(path: impl AsRef<Path>) -> Result<Vec<SocialRecord>> {
    let file = fs::File::open(path.as_ref())?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let record: SocialRecord =
            serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
                line: idx + 1,
                message: e.to_string(),
            })?;
        records.push(record);
    }
    Ok(records)
}

/// A keyword as a lowercase token sequence.
type KeywordTokens = Vec<String>;

/// The filter configuration.
#[derive(Debug, Clone, Default)]
pub struct FilterRules {
    /// Named keyword sets; a record must match at least one keyword from
    /// each set.
    keyword_sets: Vec<(String, Vec<KeywordTokens>)>,
    date_from: Option<NaiveDate>,
    date_to: Option<NaiveDate>,
    follower_cap: Option<u64>,
    ae_lexicon: Vec<KeywordTokens>,
}

/// On-disk shape of the rules file (TOML).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilterRulesFile {
    #[serde(default)]
    keyword_set: Vec<KeywordSetEntry>,
    #[serde(default)]
    date_from: Option<String>,
    #[serde(default)]
    date_to: Option<String>,
    /// Defaults to 10,000 when absent.
    #[serde(default)]
    follower_cap: Option<u64>,
    /// Path to a term list, one adverse-event term per line, resolved
    /// relative to the rules file.
    #[serde(default)]
    ae_lexicon: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeywordSetEntry {
    name: String,
    terms: Vec<String>,
}

const DEFAULT_FOLLOWER_CAP: u64 = 10_000;

fn keyword_tokens(term: &str) -> KeywordTokens {
    tokenize(term)
        .into_iter()
        .map(|t| t.surface.to_lowercase())
        .collect()
}

fn parse_date(value: &str, field: &str) -> Result<NaiveDate> {
    value
        .parse::<NaiveDate>()
        .map_err(|e| Error::Config(format!("{field}: {value:?} is not an ISO-8601 date: {e}")))
}

impl FilterRules {
    /// Loads the rules from a TOML file; unknown keys are rejected.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path)?;
        let parsed: FilterRulesFile = toml::from_str(&raw)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;

        let mut rules = FilterRules {
            follower_cap: Some(parsed.follower_cap.unwrap_or(DEFAULT_FOLLOWER_CAP)),
            ..FilterRules::default()
        };
        for entry in parsed.keyword_set {
            rules = rules.with_keyword_set(&entry.name, &entry.terms);
        }
        if let Some(s) = parsed.date_from {
            rules.date_from = Some(parse_date(&s, "date_from")?);
        }
        if let Some(s) = parsed.date_to {
            rules.date_to = Some(parse_date(&s, "date_to")?);
        }
        if let Some(lexicon) = parsed.ae_lexicon {
            let lexicon_path = path.parent().unwrap_or(Path::new(".")).join(lexicon);
            let terms = fs::read_to_string(&lexicon_path)?;
            rules = rules.with_ae_lexicon(terms.lines().map(str::trim).filter(|l| !l.is_empty()));
        }
        Ok(rules)
    }

    pub fn with_keyword_set<S: AsRef<str>>(
        mut self,
        name: &str,
        terms: impl IntoIterator<Item = S>,
    ) -> Self {
        let tokens = terms
            .into_iter()
            .map(|t| keyword_tokens(t.as_ref()))
            .filter(|t| !t.is_empty())
            .collect();
        self.keyword_sets.push((name.to_string(), tokens));
        self
    }

    pub fn with_ae_lexicon<S: AsRef<str>>(mut self, terms: impl IntoIterator<Item = S>) -> Self {
        self.ae_lexicon = terms
            .into_iter()
            .map(|t| keyword_tokens(t.as_ref()))
            .filter(|t| !t.is_empty())
            .collect();
        self
    }

    pub fn with_window(mut self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Self {
        self.date_from = from;
        self.date_to = to;
        self
    }

    pub fn with_follower_cap(mut self, cap: Option<u64>) -> Self {
        self.follower_cap = cap;
        self
    }

    /// The first rule the record fails, or `None` when it is kept.
    fn rejection(&self, record: &SocialRecord) -> Option<String> {
        if record.is_retweet == Some(true) {
            return Some("retweet".to_string());
        }
        if record.is_quote == Some(true) {
            return Some("quote".to_string());
        }
        if let (Some(cap), Some(count)) = (self.follower_cap, record.follower_count) {
            if count > cap {
                return Some("follower_cap".to_string());
            }
        }
        if self.date_from.is_some() || self.date_to.is_some() {
            let Some(date) = record.timestamp.as_deref().and_then(parse_timestamp) else {
                // A window is configured but the record cannot place
                // itself inside it.
                return Some("date_window".to_string());
            };
            if self.date_from.map(|from| date < from).unwrap_or(false)
                || self.date_to.map(|to| date > to).unwrap_or(false)
            {
                return Some("date_window".to_string());
            }
        }
        if !self.keyword_sets.is_empty() || !self.ae_lexicon.is_empty() {
            let text_tokens: Vec<String> = tokenize(&record.text)
                .into_iter()
                .map(|t| t.surface.to_lowercase())
                .collect();
            for (name, terms) in &self.keyword_sets {
                if !terms.iter().any(|t| contains_sequence(&text_tokens, t)) {
                    return Some(format!("keyword_set:{name}"));
                }
            }
            if !self.ae_lexicon.is_empty()
                && !self
                    .ae_lexicon
                    .iter()
                    .any(|t| contains_sequence(&text_tokens, t))
            {
                return Some("ae_lexicon".to_string());
            }
        }
        None
    }
}

fn parse_timestamp(value: &str) -> Option<NaiveDate> {
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(value) {
        return Some(dt.date_naive());
    }
    value.parse::<NaiveDate>().ok()
}

fn contains_sequence(haystack: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || needle.len() > haystack.len() {
        return false;
    }
    haystack
        .windows(needle.len())
        .any(|w| w.iter().zip(needle).all(|(a, b)| a == b))
}

/// Filtering result: the kept records as a corpus, plus a count per
/// rejection reason.
#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub corpus: Corpus,
    pub rejected: BTreeMap<String, usize>,
}

/// Applies the rules to `records`, keeping survivors as span-free
/// documents with ids `<source>:<record id>`.
pub fn filter_social(records: &[SocialRecord], rules: &FilterRules) -> Result<FilterOutcome> {
    let mut docs = Vec::new();
    let mut rejected: BTreeMap<String, usize> = BTreeMap::new();
    for record in records {
        match rules.rejection(record) {
            Some(reason) => *rejected.entry(reason).or_insert(0) += 1,
            None => docs.push(AnnotatedDocument::new(
                format!("{}:{}", record.source, record.id),
                record.source,
                record.text.clone(),
                vec![],
            )),
        }
    }
    Ok(FilterOutcome {
        corpus: Corpus::new(docs)?,
        rejected,
    })
}
