//! Prompt templates and rendering.
//!
//! Two styles exist: *split* prompts ask for one entity type per request
//! (three completions per note), *merged* prompts ask for every type at
//! once (one completion per note). Bodies carry a `{note}` placeholder
//! and, for split style, an `{entity name}` placeholder. The entity-name
//! word substituted for the shot type is "dose" — that is what the
//! built-in prompts ask for — and the generation parser maps it back.

use serde::{Deserialize, Serialize};

use crate::corpus::EntityType;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptStyle {
    Split,
    Merged,
}

impl std::str::FromStr for PromptStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split" => Ok(PromptStyle::Split),
            "merged" => Ok(PromptStyle::Merged),
            other => Err(Error::Invalid(format!(
                "unknown prompt style {other:?} (expected split or merged)"
            ))),
        }
    }
}

/// The word a prompt uses for an entity type.
pub fn prompt_entity_name(etype: EntityType) -> &'static str {
    match etype {
        EntityType::Vaccine => "vaccine",
        EntityType::Shot => "dose",
        EntityType::AdverseEvent => "adverse event",
    }
}

/// A fill-in-the-note prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    style: PromptStyle,
    role_preamble: Option<String>,
    body: String,
}

const NOTE_PLACEHOLDER: &str = "{note}";
const ENTITY_PLACEHOLDER: &str = "{entity name}";

impl PromptTemplate {
    /// Builds a template, checking placeholder arity: `{note}` exactly
    /// once; `{entity name}` exactly once for split style and never for
    /// merged style.
    pub fn new(
        style: PromptStyle,
        role_preamble: Option<String>,
        body: impl Into<String>,
    ) -> Result<Self> {
        let body = body.into();
        let notes = body.matches(NOTE_PLACEHOLDER).count();
        if notes != 1 {
            return Err(Error::Template(format!(
                "body must contain {NOTE_PLACEHOLDER} exactly once, found {notes}"
            )));
        }
        let entities = body.matches(ENTITY_PLACEHOLDER).count();
        let expected = match style {
            PromptStyle::Split => 1,
            PromptStyle::Merged => 0,
        };
        if entities != expected {
            return Err(Error::Template(format!(
                "{style:?} style body must contain {ENTITY_PLACEHOLDER} exactly {expected} time(s), found {entities}"
            )));
        }
        Ok(Self {
            style,
            role_preamble,
            body,
        })
    }

    pub fn style(&self) -> PromptStyle {
        self.style
    }

    pub fn role_preamble(&self) -> Option<&str> {
        self.role_preamble.as_deref()
    }

    pub fn body(&self) -> &str {
        self.body
            .as_str()
    }

    /// The built-in templates, named after the model rows they were used
    /// with. Returns an error listing the known names on a miss.
    pub fn builtin(name: &str) -> Result<PromptTemplate> {
        let (style, preamble, body): (PromptStyle, Option<&str>, &str) = match name {
            "gpt2-pretrained-merged" => (
                PromptStyle::Merged,
                None,
                "Please extract all names of dose, vaccine, and adverse event from this note, and put them in a list: {note}",
            ),
            "gpt2-finetuned-split" => (
                PromptStyle::Split,
                None,
                "\"question\": \"Please extract all the names of {entity name} from the following note\" \"context\": {note}",
            ),
            "gpt35-pretrained-merged" => (
                PromptStyle::Merged,
                Some("Assistant is a large language model trained by OpenAI."),
                "Please extract all names of vaccine, dose, and adverse event from the following note, and put them in a list:{note}",
            ),
            "gpt35-finetuned-split" => (
                PromptStyle::Split,
                Some("You are an assistant that is good at named entity recognition."),
                "Please only extract all {entity name} in the following note. Please output the entity directly. Do not contain other information: {note}",
            ),
            "gpt4-pretrained-merged" => (
                PromptStyle::Merged,
                Some("Assistant is a large language model trained by OpenAI."),
                "Please extract all names of vaccine, dose, and adverse event from the following note, and put them in a list:{note}",
            ),
            "llama2-split" => (
                PromptStyle::Split,
                None,
                "Please extract all the names of {entity name} from the following note:{note}",
            ),
            other => {
                return Err(Error::Template(format!(
                    "unknown built-in template {other:?} (known: {})",
                    Self::BUILTIN_NAMES.join(", ")
                )))
            }
        };
        Self::new(style, preamble.map(str::to_string), body)
    }

    pub const BUILTIN_NAMES: [&'static str; 6] = [
        "gpt2-pretrained-merged",
        "gpt2-finetuned-split",
        "gpt35-pretrained-merged",
        "gpt35-finetuned-split",
        "gpt4-pretrained-merged",
        "llama2-split",
    ];
}

/// One chat message: a role ("system" or "user") plus content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: "user".into(),
            content: content.into(),
        }
    }
}

/// Substitutes the placeholders verbatim and returns the message list:
/// the optional system preamble followed by one user message. `etype`
/// must be present iff the template style is split.
pub fn render_prompt(
    template: &PromptTemplate,
    note: &str,
    etype: Option<EntityType>,
) -> Result<Vec<Message>> {
    let content = match (template.style, etype) {
        (PromptStyle::Split, Some(etype)) => template
            .body
            .replace(ENTITY_PLACEHOLDER, prompt_entity_name(etype))
            .replace(NOTE_PLACEHOLDER, note),
        (PromptStyle::Merged, None) => template.body.replace(NOTE_PLACEHOLDER, note),
        (PromptStyle::Split, None) => {
            return Err(Error::Template(
                "split style requires an entity type to render".into(),
            ))
        }
        (PromptStyle::Merged, Some(_)) => {
            return Err(Error::Template(
                "merged style does not take an entity type".into(),
            ))
        }
    };
    let mut messages = Vec::with_capacity(2);
    if let Some(preamble) = &template.role_preamble {
        messages.push(Message::system(preamble.clone()));
    }
    messages.push(Message::user(content));
    Ok(messages)
}
