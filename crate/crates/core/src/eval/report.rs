//! Plain-text report tables and line-delimited record emission.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::json;

use crate::corpus::EntityType;
use crate::eval::{format_ratio, AgreementReport, ErrorBreakdown, ScoreReport, ScoreRow};
use crate::{Error, Result};

/// Which matching regimes a score report should show.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchSelector {
    Strict,
    Relaxed,
    Both,
}

impl FromStr for MatchSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(MatchSelector::Strict),
            "relaxed" => Ok(MatchSelector::Relaxed),
            "both" => Ok(MatchSelector::Both),
            other => Err(Error::Invalid(format!(
                "unknown match selector {other:?} (expected strict, relaxed, or both)"
            ))),
        }
    }
}

impl MatchSelector {
    pub fn strict(&self) -> bool {
        matches!(self, MatchSelector::Strict | MatchSelector::Both)
    }

    pub fn relaxed(&self) -> bool {
        matches!(self, MatchSelector::Relaxed | MatchSelector::Both)
    }
}

fn row_cells(row: &ScoreRow) -> String {
    format!(
        "{:>9.3} {:>8.3} {:>8.3}",
        row.scores.precision, row.scores.recall, row.scores.f1
    )
}

/// Renders per-entity rows plus the micro-average row, one block per
/// selected matching regime.
pub fn render_score_report(report: &ScoreReport, selector: MatchSelector) -> (String, Vec<String>) {
    let mut out = String::new();
    let mut records = Vec::new();
    let sections: Vec<(&str, &crate::eval::ScoreSection)> = [
        ("strict", &report.strict),
        ("relaxed", &report.relaxed),
    ]
    .into_iter()
    .filter(|(name, _)| match *name {
        "strict" => selector.strict(),
        _ => selector.relaxed(),
    })
    .collect();

    for (idx, (name, section)) in sections.iter().enumerate() {
        if idx > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "{name} match");
        let _ = writeln!(
            out,
            "{:<13} {:>9} {:>8} {:>8}  {:>5} {:>5} {:>5}",
            "entity", "precision", "recall", "f1", "tp", "fp", "fn"
        );
        for (etype, row) in &section.per_type {
            let _ = writeln!(
                out,
                "{:<13} {}  {:>5} {:>5} {:>5}",
                etype.label(),
                row_cells(row),
                row.counts.tp,
                row.counts.fp,
                row.counts.fn_
            );
            records.push(score_record(name, etype.label(), row));
        }
        let micro = &section.micro;
        let _ = writeln!(
            out,
            "{:<13} {}  {:>5} {:>5} {:>5}",
            "micro-average",
            row_cells(micro),
            micro.counts.tp,
            micro.counts.fp,
            micro.counts.fn_
        );
        records.push(score_record(name, "micro-average", micro));
    }
    (out, records)
}

fn score_record(match_name: &str, entity: &str, row: &ScoreRow) -> String {
    json!({
        "record": "score",
        "match": match_name,
        "entity": entity,
        "tp": row.counts.tp,
        "fp": row.counts.fp,
        "fn": row.counts.fn_,
        "precision": row.scores.precision,
        "recall": row.scores.recall,
        "f1": row.scores.f1,
    })
    .to_string()
}

/// Renders the error-analysis table: one row per entity type, the four
/// error categories as `count/denominator, percent` cells.
pub fn render_error_report(breakdown: &ErrorBreakdown) -> Result<(String, Vec<String>)> {
    let tally = &breakdown.tally;
    let cell = |count: usize, denom: usize| -> Result<String> {
        if denom == 0 {
            // Nothing of this type on that side; show a dash rather than
            // a division by zero.
            return Ok(format!("{count}/0, -"));
        }
        format_ratio(count as u64, denom as u64)
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<8} {:>22} {:>22} {:>22} {:>22}",
        "entity", "boundary mismatch", "false positive", "false negative", "incorrect type"
    );
    let _ = writeln!(
        out,
        "{:<8} {:>22} {:>22} {:>22} {:>22}",
        "", "(of gold)", "(of predicted)", "(of gold)", "(of predicted)"
    );
    let mut records = Vec::new();
    for etype in EntityType::ALL {
        let gold_d = tally.of(|t| t.gold_spans, etype);
        let pred_d = tally.of(|t| t.predicted_spans, etype);
        let boundary = tally.of(|t| t.boundary_mismatch, etype);
        let fp = tally.of(|t| t.false_positive, etype);
        let fn_ = tally.of(|t| t.false_negative, etype);
        let incorrect = tally.of(|t| t.incorrect_type, etype);
        let _ = writeln!(
            out,
            "{:<8} {:>22} {:>22} {:>22} {:>22}",
            etype.label(),
            cell(boundary, gold_d)?,
            cell(fp, pred_d)?,
            cell(fn_, gold_d)?,
            cell(incorrect, pred_d)?
        );
        records.push(
            json!({
                "record": "errors",
                "entity": etype.label(),
                "boundary_mismatch": boundary,
                "false_positive": fp,
                "false_negative": fn_,
                "incorrect_type": incorrect,
                "gold_spans": gold_d,
                "predicted_spans": pred_d,
            })
            .to_string(),
        );
    }
    Ok((out, records))
}

/// Renders the inter-rater agreement table.
pub fn render_agreement_report(report: &AgreementReport) -> (String, Vec<String>) {
    let mut out = String::new();
    let _ = writeln!(out, "{:<8} {:>10}", "entity", "agreement");
    let mut records = Vec::new();
    for (etype, value) in &report.per_type {
        let _ = writeln!(out, "{:<8} {:>10.2}", etype.label(), value);
        records.push(
            json!({"record": "agreement", "entity": etype.label(), "agreement": value})
                .to_string(),
        );
    }
    let _ = writeln!(out, "{:<8} {:>10.2}", "overall", report.overall);
    records.push(
        json!({"record": "agreement", "entity": "overall", "agreement": report.overall})
            .to_string(),
    );
    (out, records)
}
