//! VAERS report ingestion.
//!
//! VAERS publishes reports as three CSV files sharing the primary key
//! `VAERS_ID`: a data file (demographics and the free-text symptom
//! narrative), a vaccine file (one row per administered vaccine), and a
//! symptoms file (coded symptom terms). Ingestion selects reports whose
//! vaccine type matches a filter and turns each one into a span-free
//! document ready for annotation or prediction.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::corpus::{AnnotatedDocument, Corpus, Source};
use crate::{Error, Result};

/// Ingestion output: the corpus plus coded symptom terms per document.
/// The terms are side metadata only — they never enter the canonical
/// corpus format.
#[derive(Debug, Clone)]
pub struct VaersIngestion {
    pub corpus: Corpus,
    /// doc_id -> coded symptom terms from the symptoms file, when given.
    pub symptoms: BTreeMap<String, Vec<String>>,
}

/// Joins the three VAERS CSV files on `VAERS_ID` and keeps reports with
/// at least one vaccine row whose `VAX_TYPE` equals `vax_type_filter`.
///
/// The join is an inner join: data rows without a matching vaccine row
/// are dropped, and multiple vaccine rows for one id still produce a
/// single document. Document text is the `SYMPTOM_TEXT` field; spans are
/// empty; ids are `vaers:<VAERS_ID>`.
pub fn ingest_vaers(
    data_csv: impl AsRef<Path>,
    vax_csv: impl AsRef<Path>,
    symptoms_csv: Option<&Path>,
    vax_type_filter: &str,
) -> Result<VaersIngestion> {
    let vax_types = read_vax_types(vax_csv.as_ref())?;

    let data_path = data_csv.as_ref();
    let mut reader = csv::Reader::from_path(data_path)?;
    let headers = reader.headers()?.clone();
    let id_col = column_index(&headers, data_path, "VAERS_ID")?;
    let text_col = column_index(&headers, data_path, "SYMPTOM_TEXT")?;

    let mut seen_ids = BTreeSet::new();
    let mut docs = Vec::new();
    for record in reader.records() {
        let record = record?;
        let id = record.get(id_col).unwrap_or("").to_string();
        if !seen_ids.insert(id.clone()) {
            return Err(Error::DuplicateVaersId { id });
        }
        let matches = vax_types
            .get(&id)
            .map(|types| types.iter().any(|t| t == vax_type_filter))
            .unwrap_or(false);
        if !matches {
            continue;
        }
        let text = record.get(text_col).unwrap_or("").to_string();
        docs.push(AnnotatedDocument::new(
            format!("vaers:{id}"),
            Source::Vaers,
            text,
            vec![],
        ));
    }
    let corpus = Corpus::new(docs)?;

    let mut symptoms = BTreeMap::new();
    if let Some(path) = symptoms_csv {
        let retained: BTreeSet<&str> = corpus.iter().map(|d| d.doc_id.as_str()).collect();
        for (id, terms) in read_symptoms(path)? {
            let doc_id = format!("vaers:{id}");
            if retained.contains(doc_id.as_str()) {
                symptoms.entry(doc_id).or_insert_with(Vec::new).extend(terms);
            }
        }
    }

    Ok(VaersIngestion { corpus, symptoms })
}

fn read_vax_types(path: &Path) -> Result<BTreeMap<String, Vec<String>>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let id_col = column_index(&headers, path, "VAERS_ID")?;
    let type_col = column_index(&headers, path, "VAX_TYPE")?;
    let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let id = record.get(id_col).unwrap_or("").to_string();
        let vax_type = record.get(type_col).unwrap_or("").to_string();
        map.entry(id).or_default().push(vax_type);
    }
    Ok(map)
}

/// Collects the non-empty cells of every `SYMPTOM*`-named column (the
/// published files use SYMPTOM1..SYMPTOM5 plus version columns, which are
/// skipped by the VERSION suffix check).
fn read_symptoms(path: &Path) -> Result<Vec<(String, Vec<String>)>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let id_col = column_index(&headers, path, "VAERS_ID")?;
    let term_cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, name)| name.starts_with("SYMPTOM") && !name.contains("VERSION"))
        .map(|(i, _)| i)
        .collect();

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let id = record.get(id_col).unwrap_or("").to_string();
        let terms: Vec<String> = term_cols
            .iter()
            .filter_map(|&i| record.get(i))
            .filter(|cell| !cell.is_empty())
            .map(str::to_string)
            .collect();
        if !terms.is_empty() {
            rows.push((id, terms));
        }
    }
    Ok(rows)
}

fn column_index(headers: &csv::StringRecord, path: &Path, column: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::MissingColumn {
            file: path.display().to_string(),
            column: column.to_string(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;
    use tempfile::TempDir;

    fn write(dir: &TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        fs::write(&path, content).unwrap();
        path
    }

    #[test]
    fn inner_join_keeps_only_matching_vax_type() {
        let dir = TempDir::new().unwrap();
        let data = write(
            &dir,
            "data.csv",
            "VAERS_ID,SYMPTOM_TEXT\n1,Sore arm after shot\n2,Mild fever\n",
        );
        let vax = write(&dir, "vax.csv", "VAERS_ID,VAX_TYPE\n1,COVID19\n2,FLU\n");

        let out = ingest_vaers(&data, &vax, None, "COVID19").unwrap();
        assert_eq!(out.corpus.len(), 1);
        let doc = &out.corpus.docs()[0];
        assert_eq!(doc.doc_id, "vaers:1");
        assert_eq!(doc.text, "Sore arm after shot");
        assert!(doc.spans.is_empty());
        assert_eq!(doc.source, Source::Vaers);
    }

    #[test]
    fn empty_vax_file_yields_empty_corpus() {
        let dir = TempDir::new().unwrap();
        let data = write(&dir, "data.csv", "VAERS_ID,SYMPTOM_TEXT\n1,text\n");
        let vax = write(&dir, "vax.csv", "VAERS_ID,VAX_TYPE\n");
        let out = ingest_vaers(&data, &vax, None, "COVID19").unwrap();
        assert!(out.corpus.is_empty());
    }

    #[test]
    fn data_row_without_vax_row_is_excluded() {
        let dir = TempDir::new().unwrap();
        let data = write(
            &dir,
            "data.csv",
            "VAERS_ID,SYMPTOM_TEXT\n1,kept\n3,orphan row\n",
        );
        let vax = write(&dir, "vax.csv", "VAERS_ID,VAX_TYPE\n1,COVID19\n");
        let out = ingest_vaers(&data, &vax, None, "COVID19").unwrap();
        assert_eq!(out.corpus.len(), 1);
        assert_eq!(out.corpus.docs()[0].doc_id, "vaers:1");
    }

    #[test]
    fn multiple_vax_rows_one_document() {
        let dir = TempDir::new().unwrap();
        let data = write(&dir, "data.csv", "VAERS_ID,SYMPTOM_TEXT\n1,both doses\n");
        let vax = write(
            &dir,
            "vax.csv",
            "VAERS_ID,VAX_TYPE\n1,COVID19\n1,COVID19\n1,FLU\n",
        );
        let out = ingest_vaers(&data, &vax, None, "COVID19").unwrap();
        assert_eq!(out.corpus.len(), 1);
    }

    #[test]
    fn missing_column_is_reported() {
        let dir = TempDir::new().unwrap();
        let data = write(&dir, "data.csv", "VAERS_ID,NARRATIVE\n1,text\n");
        let vax = write(&dir, "vax.csv", "VAERS_ID,VAX_TYPE\n1,COVID19\n");
        let err = ingest_vaers(&data, &vax, None, "COVID19").unwrap_err();
        assert!(err.to_string().contains("SYMPTOM_TEXT"), "{err}");
    }

    #[test]
    fn duplicate_vaers_id_is_rejected() {
        let dir = TempDir::new().unwrap();
        let data = write(&dir, "data.csv", "VAERS_ID,SYMPTOM_TEXT\n1,a\n1,b\n");
        let vax = write(&dir, "vax.csv", "VAERS_ID,VAX_TYPE\n1,COVID19\n");
        let err = ingest_vaers(&data, &vax, None, "COVID19").unwrap_err();
        assert!(matches!(err, Error::DuplicateVaersId { .. }), "{err}");
    }

    #[test]
    fn symptoms_attach_as_metadata_only() {
        let dir = TempDir::new().unwrap();
        let data = write(&dir, "data.csv", "VAERS_ID,SYMPTOM_TEXT\n1,text\n2,other\n");
        let vax = write(&dir, "vax.csv", "VAERS_ID,VAX_TYPE\n1,COVID19\n2,FLU\n");
        let symptoms = write(
            &dir,
            "symptoms.csv",
            "VAERS_ID,SYMPTOM1,SYMPTOMVERSION1,SYMPTOM2\n1,Pyrexia,24.1,Pain in extremity\n2,Chills,24.1,\n",
        );
        let out = ingest_vaers(&data, &vax, Some(&symptoms), "COVID19").unwrap();
        assert_eq!(
            out.symptoms.get("vaers:1").unwrap(),
            &vec!["Pyrexia".to_string(), "Pain in extremity".to_string()]
        );
        // Report 2 was filtered out, so its terms are not retained.
        assert!(!out.symptoms.contains_key("vaers:2"));
        // Metadata never reaches the documents themselves.
        assert!(out.corpus.docs()[0].spans.is_empty());
    }

    #[test]
    fn quoted_fields_are_parsed_per_rfc4180() {
        let dir = TempDir::new().unwrap();
        let data = write(
            &dir,
            "data.csv",
            "VAERS_ID,SYMPTOM_TEXT\n1,\"Fever, chills, and a \"\"knot\"\" at the site\"\n",
        );
        let vax = write(&dir, "vax.csv", "VAERS_ID,VAX_TYPE\n1,COVID19\n");
        let out = ingest_vaers(&data, &vax, None, "COVID19").unwrap();
        assert_eq!(
            out.corpus.docs()[0].text,
            "Fever, chills, and a \"knot\" at the site"
        );
    }
}
