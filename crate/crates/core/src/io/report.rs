//! Plain-text result reports.
//!
//! ```text
//! sgfb-report v1
//!
//! [kv config]
//! folds = 10
//!
//! [table folds]
//! fold,acc,sen,spe
//! 0,1.0000,1.0000,1.0000
//! ```
//!
//! Sections are separated by one blank line. Keys may not contain `=`,
//! table cells may not contain `,`, and nothing may contain a line break.

use std::path::Path;

use crate::error::{Error, Result};

pub const REPORT_HEADER: &str = "sgfb-report v1";

#[derive(Debug, Clone, PartialEq)]
pub enum Section {
    Kv { name: String, entries: Vec<(String, String)> },
    Table { name: String, header: Vec<String>, rows: Vec<Vec<String>> },
}

impl Section {
    pub fn name(&self) -> &str {
        match self {
            Section::Kv { name, .. } | Section::Table { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub sections: Vec<Section>,
}

fn bad(message: impl Into<String>) -> Error {
    Error::Report { line: 0, message: message.into() }
}

fn check_text(s: &str, forbidden: &[char]) -> Result<()> {
    if s.contains(['\n', '\r']) || s.contains(forbidden) {
        return Err(bad(format!("text {s:?} cannot be written to a report")));
    }
    Ok(())
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push_kv<K: Into<String>, V: Into<String>>(&mut self, name: &str, entries: impl IntoIterator<Item = (K, V)>) {
        let entries = entries.into_iter().map(|(k, v)| (k.into(), v.into())).collect();
        self.sections.push(Section::Kv { name: name.into(), entries });
    }

    pub fn push_table(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) {
        let header = header.iter().map(|s| s.to_string()).collect();
        self.sections.push(Section::Table { name: name.into(), header, rows });
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name() == name)
    }

    /// Value of `key` in the key-value section `section`.
    pub fn value(&self, section: &str, key: &str) -> Option<&str> {
        match self.section(section)? {
            Section::Kv { entries, .. } => entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str()),
            Section::Table { .. } => None,
        }
    }

    pub fn to_text(&self) -> Result<String> {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for s in &self.sections {
            out.push('\n');
            match s {
                Section::Kv { name, entries } => {
                    check_text(name, &[])?;
                    out.push_str(&format!("[kv {name}]\n"));
                    for (k, v) in entries {
                        check_text(k, &['='])?;
                        check_text(v, &[])?;
                        if k.trim() != k || v.trim() != v || k.is_empty() || k.starts_with('[') {
                            return Err(bad(format!("key {k:?} or value {v:?} has surrounding whitespace")));
                        }
                        out.push_str(&format!("{k} = {v}\n"));
                    }
                }
                Section::Table { name, header, rows } => {
                    check_text(name, &[])?;
                    out.push_str(&format!("[table {name}]\n"));
                    for row in std::iter::once(header).chain(rows) {
                        if row.len() != header.len() {
                            return Err(bad(format!("table {name}: row of {} cells, header has {}", row.len(), header.len())));
                        }
                        for c in row {
                            check_text(c, &[','])?;
                        }
                        if row.len() == 1 && row[0].is_empty() {
                            return Err(bad(format!("table {name}: single empty cell cannot be written")));
                        }
                        out.push_str(&row.join(","));
                        out.push('\n');
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Report> {
        let err = |line: usize, message: String| Error::Report { line, message };
        let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, REPORT_HEADER)) => {}
            _ => return Err(err(1, format!("expected header line '{REPORT_HEADER}'"))),
        }
        if !text.ends_with('\n') {
            return Err(err(text.split('\n').count(), "missing final line break".into()));
        }
        let mut report = Report::new();
        let mut current: Option<Section> = None;
        for (no, line) in lines {
            if line.is_empty() {
                if let Some(s) = current.take() {
                    report.sections.push(s);
                }
                continue;
            }
            if line.contains('\r') {
                return Err(err(no, "carriage return in report".into()));
            }
            match &mut current {
                None => {
                    let inner = line
                        .strip_prefix('[')
                        .and_then(|l| l.strip_suffix(']'))
                        .ok_or_else(|| err(no, format!("expected section header, found {line:?}")))?;
                    current = Some(if let Some(name) = inner.strip_prefix("kv ") {
                        Section::Kv { name: name.into(), entries: Vec::new() }
                    } else if let Some(name) = inner.strip_prefix("table ") {
                        Section::Table { name: name.into(), header: Vec::new(), rows: Vec::new() }
                    } else {
                        return Err(err(no, format!("unknown section kind in {line:?}")));
                    });
                }
                Some(Section::Kv { entries, .. }) => {
                    let (k, v) = line.split_once(" = ").ok_or_else(|| err(no, format!("expected 'key = value', found {line:?}")))?;
                    entries.push((k.into(), v.into()));
                }
                Some(Section::Table { header, rows, .. }) => {
                    let cells: Vec<String> = line.split(',').map(String::from).collect();
                    if header.is_empty() {
                        *header = cells;
                    } else if cells.len() != header.len() {
                        return Err(err(no, format!("row has {} cells, header has {}", cells.len(), header.len())));
                    } else {
                        rows.push(cells);
                    }
                }
            }
        }
        if let Some(s) = current.take() {
            report.sections.push(s);
        }
        Ok(report)
    }
}

pub fn write_report(report: &Report, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, report.to_text()?).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Report> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Report::parse(&text)
}
