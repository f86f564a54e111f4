//! Correlation reports and their method × language-pair grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::FlipAnalysis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    #[default]
    System,
    Segment,
}

/// Results of one method on one language pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub method: String,
    pub lp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pearson: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub williams_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub williams_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flips: Option<FlipAnalysis>,
}

impl MetricResult {
    pub fn new(method: impl Into<String>, lp: impl Into<String>) -> Self {
        MetricResult {
            method: method.into(),
            lp: lp.into(),
            pearson: None,
            williams_t: None,
            williams_p: None,
            tau: None,
            bootstrap_p: None,
            pairs: None,
            flips: None,
        }
    }

    /// The grid value: Pearson r at system level, tau at segment level.
    pub fn value(&self, level: Level) -> Option<f64> {
        match level {
            Level::System => self.pearson,
            Level::Segment => self.tau,
        }
    }

    /// The p-value behind the grid's stars.
    pub fn p_value(&self, level: Level) -> Option<f64> {
        match level {
            Level::System => self.williams_p,
            Level::Segment => self.bootstrap_p,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub level: Level,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    pub results: Vec<MetricResult>,
}

impl CorrelationReport {
    pub fn validate(&self) -> Result<()> {
        for r in &self.results {
            let bad = |what: &str, v: f64| {
                Err(Error::Degenerate(format!("{} / {}: {what} {v} out of range", r.method, r.lp)))
            };
            for (what, v, lo) in [("pearson", r.pearson, -1.0), ("tau", r.tau, -1.0)] {
                if let Some(v) = v {
                    if !(lo..=1.0).contains(&v) {
                        return bad(what, v);
                    }
                }
            }
            for (what, v) in [("williams p", r.williams_p), ("bootstrap p", r.bootstrap_p)] {
                if let Some(v) = v {
                    if !(0.0..=1.0).contains(&v) {
                        return bad(what, v);
                    }
                }
            }
        }
        Ok(())
    }

    /// Methods and language pairs in first-appearance order.
    pub fn axes(&self) -> (Vec<String>, Vec<String>) {
        let mut methods: Vec<String> = Vec::new();
        let mut lps: Vec<String> = Vec::new();
        for r in &self.results {
            if !methods.contains(&r.method) {
                methods.push(r.method.clone());
            }
            if !lps.contains(&r.lp) {
                lps.push(r.lp.clone());
            }
        }
        (methods, lps)
    }

    fn cell(&self, method: &str, lp: &str) -> Option<&MetricResult> {
        self.results.iter().find(|r| r.method == method && r.lp == lp)
    }
}

/// `***`, `**` or `*` for p at or below 0.001, 0.01 and 0.05.
pub fn significance_stars(p: Option<f64>) -> &'static str {
    match p {
        Some(p) if p <= 0.001 => "***",
        Some(p) if p <= 0.01 => "**",
        Some(p) if p <= 0.05 => "*",
        _ => "",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Tsv,
    Json,
    #[serde(alias = "md")]
    Markdown,
}

impl TableFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TableFormat::Tsv => "tsv",
            TableFormat::Json => "json",
            TableFormat::Markdown => "md",
        }
    }
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(TableFormat::Tsv),
            "json" => Ok(TableFormat::Json),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(Error::config(format!("unknown table format {other:?}"))),
        }
    }
}

fn grid(report: &CorrelationReport) -> (Vec<String>, Vec<Vec<String>>) {
    let (methods, lps) = report.axes();
    let mut header = vec!["method".to_string()];
    header.extend(lps.iter().cloned());
    let rows = methods
        .iter()
        .map(|m| {
            let mut row = vec![m.clone()];
            for lp in &lps {
                row.push(match report.cell(m, lp).and_then(|r| r.value(report.level).map(|v| (v, r))) {
                    Some((v, r)) => format!("{v}{}", significance_stars(r.p_value(report.level))),
                    None => String::new(),
                });
            }
            row
        })
        .collect();
    (header, rows)
}

/// Renders the method × language-pair grid. Cells hold the full-precision
/// value followed by its significance stars; JSON carries the whole report.
pub fn emit_report_tables(report: &CorrelationReport, format: TableFormat) -> Result<String> {
    Ok(match format {
        TableFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            s
        }
        TableFormat::Tsv => {
            let (header, rows) = grid(report);
            let mut s = header.join("\t");
            s.push('\n');
            for r in rows {
                s.push_str(&r.join("\t"));
                s.push('\n');
            }
            s
        }
        TableFormat::Markdown => {
            let (header, rows) = grid(report);
            let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
            let mut s = line(&header);
            s.push_str(&line(&vec!["---".to_string(); header.len()]));
            for r in rows {
                s.push_str(&line(&r));
            }
            s
        }
    })
}

/// One parsed grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub method: String,
    pub lp: String,
    pub value: f64,
    pub stars: String,
}

/// Reads back a markdown grid produced by [`emit_report_tables`].
pub fn parse_markdown_grid(text: &str) -> Result<Vec<GridCell>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let split = |l: &str| -> Vec<String> {
        l.trim()
            .trim_start_matches('|')
            .trim_end_matches('|')
            .split('|')
            .map(|c| c.trim().to_string())
            .collect()
    };
    let header = split(lines.next().ok_or_else(|| Error::Parse {
        offset: 0,
        message: "missing header row".into(),
    })?);
    lines.next();
    let mut cells = Vec::new();
    for (i, l) in lines.enumerate() {
        let row = split(l);
        if row.len() != header.len() {
            return Err(Error::Parse {
                offset: i + 2,
                message: format!("row has {} cells, header has {}", row.len(), header.len()),
            });
        }
        for (lp, c) in header.iter().zip(&row).skip(1) {
            if c.is_empty() {
                continue;
            }
            let num = c.trim_end_matches('*');
            let value = num.parse().map_err(|_| Error::Parse {
                offset: i + 2,
                message: format!("bad cell {c:?}"),
            })?;
            cells.push(GridCell {
                method: row[0].clone(),
                lp: lp.clone(),
                value,
                stars: c[num.len()..].to_string(),
            });
        }
    }
    Ok(cells)
}
