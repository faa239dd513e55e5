//! Aggregation of transcripts into report rows.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sweep::TranscriptRecord;
use super::{io_err, HarnessError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelFilter {
    #[default]
    All,
    Solvable,
    Unsolvable,
}

impl LabelFilter {
    /// Unlabeled instances only pass `All`.
    pub fn keeps(self, solvable: Option<bool>) -> bool {
        match self {
            LabelFilter::All => true,
            LabelFilter::Solvable => solvable == Some(true),
            LabelFilter::Unsolvable => solvable == Some(false),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub instances: usize,
    pub solved: usize,
    /// Percent.
    pub success_rate: f64,
    pub mean_time_s: f64,
    pub mean_iterations: f64,
    /// Percent of instances that reached the slow solver.
    pub fallback_rate: f64,
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn mean(sum: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn aggregate(label: &str, records: &[TranscriptRecord], filter: LabelFilter) -> ReportRow {
    let kept: Vec<&TranscriptRecord> = records.iter().filter(|r| filter.keeps(r.solvable)).collect();
    let n = kept.len();
    let solved = kept.iter().filter(|r| r.status.is_solved()).count();
    let fallbacks = kept.iter().filter(|r| r.fallback.is_some()).count();
    let time: f64 = kept.iter().map(|r| r.total_time_ms / 1e3).sum();
    let iters: f64 = kept.iter().map(|r| r.attempts.len() as f64).sum();
    ReportRow {
        label: label.to_string(),
        instances: n,
        solved,
        success_rate: pct(solved, n),
        mean_time_s: mean(time, n),
        mean_iterations: mean(iters, n),
        fallback_rate: pct(fallbacks, n),
    }
}

pub fn read_transcripts(path: &Path) -> Result<Vec<TranscriptRecord>, HarnessError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Rows recomputed from transcript files, one per label in order of first
/// appearance.
pub fn cmd_report(paths: &[impl AsRef<Path>], filter: LabelFilter) -> Result<Vec<ReportRow>, HarnessError> {
    let mut groups: Vec<(String, Vec<TranscriptRecord>)> = Vec::new();
    for p in paths {
        for r in read_transcripts(p.as_ref())? {
            match groups.iter_mut().find(|(l, _)| *l == r.config.label) {
                Some((_, v)) => v.push(r),
                None => groups.push((r.config.label.clone(), vec![r])),
            }
        }
    }
    Ok(groups.iter().map(|(l, rs)| aggregate(l, rs, filter)).collect())
}

pub fn write_csv(path: &Path, rows: &[ReportRow]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let file = File::create(path).map_err(io_err(path))?;
    write_csv_to(file, rows)
}

pub fn write_csv_to<W: Write>(out: W, rows: &[ReportRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "label",
            "instances",
            "solved",
            "success_rate",
            "mean_time_s",
            "mean_iterations",
            "fallback_rate",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::Csv(e.into()))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ReportRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<ReportRow>, _>>()?;
    Ok(rows)
}
