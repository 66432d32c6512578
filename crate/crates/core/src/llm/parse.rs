//! Parsing free-text generations into entity strings.
//!
//! Generations arrive as plain text in whatever list shape the model
//! chose. The parser is line-oriented: it strips list markers, quotes,
//! and whitespace, drops refusals, and — for merged-style prompts — reads
//! optional `label: value` prefixes, mapping the labels the prompts ask
//! for back onto the schema (notably "dose" -> shot). Nothing here
//! errors; lines that yield no entity are counted and skipped.

use crate::corpus::EntityType;
use crate::llm::PromptStyle;

/// The type a generation claimed for an entity, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClaimedType {
    /// A recognized label.
    Known(EntityType),
    /// A `label: value` line whose label maps to nothing; the raw label
    /// is kept for diagnostics.
    Unknown(String),
    /// A bare line with no label.
    Unlabeled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedEntity {
    pub text: String,
    pub claim: ClaimedType,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseOutcome {
    /// Entities in generation order, case-insensitive duplicates removed
    /// keeping the first occurrence.
    pub entities: Vec<ParsedEntity>,
    /// Non-empty lines that produced no entity (refusals, bare markers).
    pub skipped: usize,
}

fn strip_list_marker(line: &str) -> &str {
    // Bullet markers.
    for marker in ["-", "*", "\u{2022}"] {
        if let Some(rest) = line.strip_prefix(marker) {
            return rest.trim_start();
        }
    }
    // Numbered markers: "3." or "3)".
    let digits = line.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits > 0 {
        let rest = &line[digits..];
        if let Some(rest) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')) {
            return rest.trim_start();
        }
    }
    line
}

fn strip_quotes(line: &str) -> &str {
    for quote in ['"', '\''] {
        if line.len() >= 2 && line.starts_with(quote) && line.ends_with(quote) {
            return line[1..line.len() - 1].trim();
        }
    }
    line
}

fn is_refusal(line: &str) -> bool {
    let lowered = line.to_lowercase();
    lowered == "none" || lowered == "no entities"
}

fn map_label(label: &str) -> Option<EntityType> {
    match label.to_lowercase().as_str() {
        "vaccine" => Some(EntityType::Vaccine),
        "dose" | "shot" => Some(EntityType::Shot),
        "adverse event" | "ae" => Some(EntityType::AdverseEvent),
        _ => None,
    }
}

/// Parses one raw completion. Order is preserved; exact duplicates
/// (case-insensitive on the entity text, same claim) are removed keeping
/// the first.
pub fn parse_generation(raw: &str, style: PromptStyle) -> ParseOutcome {
    let mut outcome = ParseOutcome::default();
    let mut seen: Vec<(String, ClaimedType)> = Vec::new();

    for raw_line in raw.lines() {
        let trimmed = raw_line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let line = strip_quotes(strip_list_marker(trimmed)).trim();
        if line.is_empty() || is_refusal(line) {
            outcome.skipped += 1;
            continue;
        }

        let (text, claim) = match style {
            PromptStyle::Split => (line.to_string(), ClaimedType::Unlabeled),
            PromptStyle::Merged => match line.split_once(':') {
                Some((label, value)) => {
                    let value = strip_quotes(value.trim()).trim();
                    if value.is_empty() {
                        outcome.skipped += 1;
                        continue;
                    }
                    let claim = match map_label(label.trim()) {
                        Some(etype) => ClaimedType::Known(etype),
                        None => ClaimedType::Unknown(label.trim().to_string()),
                    };
                    (value.to_string(), claim)
                }
                None => (line.to_string(), ClaimedType::Unlabeled),
            },
        };

        let key = (text.to_lowercase(), claim.clone());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        outcome.entities.push(ParsedEntity { text, claim });
    }
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(outcome: &ParseOutcome) -> Vec<&str> {
        outcome.entities.iter().map(|e| e.text.as_str()).collect()
    }

    #[test]
    fn empty_input_parses_to_nothing() {
        let out = parse_generation("", PromptStyle::Split);
        assert!(out.entities.is_empty());
        assert_eq!(out.skipped, 0);
    }

    #[test]
    fn bulleted_list_split_style() {
        let out = parse_generation("- sore arm\n- fever", PromptStyle::Split);
        assert_eq!(texts(&out), ["sore arm", "fever"]);
        assert!(out
            .entities
            .iter()
            .all(|e| e.claim == ClaimedType::Unlabeled));
    }

    #[test]
    fn labeled_merged_lines_map_to_types() {
        let out = parse_generation(
            "vaccine: Moderna vaccine\ndose: first shot",
            PromptStyle::Merged,
        );
        assert_eq!(
            out.entities,
            vec![
                ParsedEntity {
                    text: "Moderna vaccine".into(),
                    claim: ClaimedType::Known(EntityType::Vaccine),
                },
                ParsedEntity {
                    text: "first shot".into(),
                    claim: ClaimedType::Known(EntityType::Shot),
                },
            ]
        );
    }

    #[test]
    fn unknown_labels_are_marked() {
        let out = parse_generation("severity: mild", PromptStyle::Merged);
        assert_eq!(out.entities.len(), 1);
        assert_eq!(out.entities[0].claim, ClaimedType::Unknown("severity".into()));
        assert_eq!(out.entities[0].text, "mild");
    }

    #[test]
    fn merged_accepts_bare_lines_too() {
        let out = parse_generation("- fever\nadverse event: chills", PromptStyle::Merged);
        assert_eq!(out.entities[0].claim, ClaimedType::Unlabeled);
        assert_eq!(
            out.entities[1].claim,
            ClaimedType::Known(EntityType::AdverseEvent)
        );
    }

    #[test]
    fn numbered_markers_and_quotes_are_stripped() {
        let out = parse_generation("1. \"sore arm\"\n2) fever\n\u{2022} chills", PromptStyle::Split);
        assert_eq!(texts(&out), ["sore arm", "fever", "chills"]);
    }

    #[test]
    fn refusals_are_skipped_and_counted() {
        let out = parse_generation("None\nno entities\nNONE", PromptStyle::Split);
        assert!(out.entities.is_empty());
        assert_eq!(out.skipped, 3);
    }

    #[test]
    fn case_insensitive_dedup_keeps_first() {
        let out = parse_generation("- Fever\n- fever\n- FEVER\n- chills", PromptStyle::Split);
        assert_eq!(texts(&out), ["Fever", "chills"]);
    }

    #[test]
    fn bare_markers_count_as_skipped() {
        let out = parse_generation("-\n- fever\n3.", PromptStyle::Split);
        assert_eq!(texts(&out), ["fever"]);
        assert_eq!(out.skipped, 2);
    }

    #[test]
    fn shot_label_accepted_alongside_dose() {
        let out = parse_generation("shot: booster shot", PromptStyle::Merged);
        assert_eq!(out.entities[0].claim, ClaimedType::Known(EntityType::Shot));
    }

    #[test]
    fn case_insensitive_labels() {
        let out = parse_generation("Vaccine: Pfizer\nAdverse Event: rash", PromptStyle::Merged);
        assert_eq!(out.entities[0].claim, ClaimedType::Known(EntityType::Vaccine));
        assert_eq!(
            out.entities[1].claim,
            ClaimedType::Known(EntityType::AdverseEvent)
        );
    }
}
