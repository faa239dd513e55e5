//! Experiment harness: dataset generation, configuration sweeps, reports
//! and scatter plots.

mod dataset;
mod plot;
mod report;
mod sweep;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use dataset::{
    cmd_generate, generate_dataset, Dataset, DatasetItem, GenerateReport, GenerateSpec, Manifest, ManifestEntry,
    MANIFEST,
};
pub use plot::render_svg;
pub use report::{aggregate, cmd_report, read_csv, read_transcripts, write_csv, write_csv_to, LabelFilter, ReportRow};
pub use sweep::{
    cmd_run, label_slug, AttemptRecord, Configuration, FallbackRecord, MemoryMode, RunSummary, SweepSpec,
    TranscriptRecord,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("no rows to plot")]
    EmptyInput,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Memory(#[from] crate::memory::MemoryError),
}

pub(crate) fn io_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads report CSVs and writes their rows as one scatter plot.
pub fn cmd_plot(csvs: &[impl AsRef<Path>], out: &Path, title: &str) -> Result<usize, HarnessError> {
    let mut rows = Vec::new();
    for c in csvs {
        rows.extend(read_csv(c.as_ref())?);
    }
    let svg = render_svg(&rows, title)?;
    std::fs::write(out, svg).map_err(io_err(out))?;
    Ok(rows.len())
}
