//! Rectangular numeric tables with a metadata block.
//!
//! CSV output puts metadata on `# key: value` lines ahead of the header.
//! Numbers use the shortest round-trip formatting, in exponent form for very
//! large or small magnitudes, so identical inputs give byte-identical files.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub metadata: BTreeMap<String, String>,
    pub columns: Vec<String>,
    /// Optional text label per row, written as a leading `label` column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_labels: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

const LABEL_COLUMN: &str = "label";

impl Dataset {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Result<Self> {
        let columns: Vec<String> = columns.into_iter().map(Into::into).collect();
        if columns.is_empty() || columns.iter().any(|c| c == LABEL_COLUMN) {
            return Err(Error::Config(
                "dataset needs at least one numeric column".into(),
            ));
        }
        Ok(Self {
            metadata: BTreeMap::new(),
            columns,
            row_labels: None,
            rows: Vec::new(),
        })
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if self.row_labels.is_some() {
            return Err(Error::Config("labelled dataset needs push_labelled".into()));
        }
        self.check_width(&row)?;
        self.rows.push(row);
        Ok(())
    }

    pub fn push_labelled(&mut self, label: &str, row: Vec<f64>) -> Result<()> {
        if self.row_labels.is_none() && !self.rows.is_empty() {
            return Err(Error::Config(
                "cannot mix labelled and unlabelled rows".into(),
            ));
        }
        self.check_width(&row)?;
        self.row_labels
            .get_or_insert_with(Vec::new)
            .push(label.to_string());
        self.rows.push(row);
        Ok(())
    }

    fn check_width(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Config(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn value(&self, label: &str, column: &str) -> Option<f64> {
        let row = self.row_labels.as_ref()?.iter().position(|l| l == label)?;
        let col = self.columns.iter().position(|c| c == column)?;
        Some(self.rows[row][col])
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            // Keep each entry on one line.
            out.push_str(&format!("# {k}: {}\n", v.replace('\n', "\\n")));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let wrap = |e: csv::Error| Error::Config(format!("csv output failed: {e}"));
        let mut header: Vec<&str> = Vec::new();
        if self.row_labels.is_some() {
            header.push(LABEL_COLUMN);
        }
        header.extend(self.columns.iter().map(String::as_str));
        w.write_record(&header).map_err(wrap)?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut rec: Vec<String> = Vec::with_capacity(row.len() + 1);
            if let Some(labels) = &self.row_labels {
                rec.push(labels[i].clone());
            }
            rec.extend(row.iter().map(|x| format!("{x:?}")));
            w.write_record(&rec).map_err(wrap)?;
        }
        let body = w
            .into_inner()
            .map_err(|e| Error::Config(format!("csv output failed: {e}")))?;
        out.push_str(&String::from_utf8_lossy(&body));
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut metadata = BTreeMap::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(entry) = line.strip_prefix("# ") else {
                break;
            };
            let (k, v) = entry
                .trim_end_matches('\n')
                .split_once(": ")
                .ok_or_else(|| {
                    Error::Config(format!("malformed metadata line `{}`", line.trim_end()))
                })?;
            metadata.insert(k.to_string(), v.replace("\\n", "\n"));
            body_start += line.len();
        }
        let wrap = |e: csv::Error| Error::Config(format!("csv input failed: {e}"));
        let mut r = csv::Reader::from_reader(&text.as_bytes()[body_start..]);
        let header: Vec<String> = r
            .headers()
            .map_err(wrap)?
            .iter()
            .map(String::from)
            .collect();
        let labelled = header.first().map(String::as_str) == Some(LABEL_COLUMN);
        let mut ds = Dataset::new(header.into_iter().skip(labelled as usize))?;
        ds.metadata = metadata;
        for rec in r.records() {
            let rec = rec.map_err(wrap)?;
            let mut fields = rec.iter();
            let label = if labelled {
                fields.next().map(String::from)
            } else {
                None
            };
            let row = fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::Config(format!("non-numeric cell `{f}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            match label {
                Some(l) => ds.push_labelled(&l, row)?,
                None => ds.push(row)?,
            }
        }
        Ok(ds)
    }

    /// Non-finite values become `null`, as JSON has no infinities.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("json output failed: {e}")))
    }
}
