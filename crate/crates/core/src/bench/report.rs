use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Jsonl,
    Csv,
    Summary,
}

/// Per-label aggregate. `tau` statistics cover every record with the label;
/// the standard deviation is the sample one (n - 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub label: String,
    pub runs: usize,
    pub mean_tau: f64,
    pub std_tau: f64,
    pub error_rate: f64,
    pub incomplete: usize,
    pub failed: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// One summary per label, in order of first appearance.
pub fn summarize(records: &[RunRecord]) -> Vec<Summary> {
    let mut labels: Vec<&str> = Vec::new();
    for r in records {
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
    }
    labels
        .into_iter()
        .map(|label| {
            let group: Vec<&RunRecord> = records.iter().filter(|r| r.label == label).collect();
            let mut taus: Vec<f64> = group.iter().map(|r| r.result.tau as f64).collect();
            taus.sort_by(f64::total_cmp);
            let n = taus.len() as f64;
            let mean = taus.iter().sum::<f64>() / n;
            let var = if taus.len() > 1 { taus.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            Summary {
                label: label.into(),
                runs: group.len(),
                mean_tau: mean,
                std_tau: var.sqrt(),
                error_rate: group.iter().filter(|r| !r.result.correct).count() as f64 / n,
                incomplete: group.iter().filter(|r| r.result.incomplete).count(),
                failed: group.iter().filter(|r| r.error.is_some()).count(),
                min: taus[0],
                q1: quantile(&taus, 0.25),
                median: quantile(&taus, 0.5),
                q3: quantile(&taus, 0.75),
                max: taus[taus.len() - 1],
            }
        })
        .collect()
}

pub fn write_jsonl(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<RunRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            records.push(serde_json::from_str(&line)?);
        }
    }
    Ok(records)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    label: &'a str,
    algorithm: &'a str,
    algorithm_index: usize,
    repetition: u64,
    instance_seed: u64,
    seed: u64,
    generator: &'a str,
    tau: u64,
    answer: String,
    correct: bool,
    incomplete: bool,
    wall_time: f64,
    init_time: f64,
    stopping_time: f64,
    sampling_time: f64,
    estimation_time: f64,
    error: &'a str,
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn write_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for r in records {
        let res = &r.result;
        let answer: Vec<String> = res.answer.iter().map(|a| a.to_string()).collect();
        w.serialize(CsvRow {
            label: &r.label,
            algorithm: &res.algorithm,
            algorithm_index: r.algorithm_index,
            repetition: r.repetition,
            instance_seed: r.instance_seed,
            seed: res.seed,
            generator: &res.generator,
            tau: res.tau,
            answer: answer.join(" "),
            correct: res.correct,
            incomplete: res.incomplete,
            wall_time: res.wall_time,
            init_time: res.timings.init,
            stopping_time: res.timings.stopping,
            sampling_time: res.timings.sampling,
            estimation_time: res.timings.estimation,
            error: r.error.as_deref().unwrap_or(""),
        })
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn write_summary(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for s in summarize(records) {
        w.serialize(s).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `runs.jsonl`, `runs.csv` or `summary.csv` into `dir` and returns the path.
pub fn emit_report(records: &[RunRecord], format: ReportFormat, dir: &Path) -> Result<PathBuf> {
    if records.is_empty() {
        return Err(Error::Parameter("no records to report".into()));
    }
    std::fs::create_dir_all(dir)?;
    let path = dir.join(match format {
        ReportFormat::Jsonl => "runs.jsonl",
        ReportFormat::Csv => "runs.csv",
        ReportFormat::Summary => "summary.csv",
    });
    match format {
        ReportFormat::Jsonl => write_jsonl(records, &path)?,
        ReportFormat::Csv => write_csv(records, &path)?,
        ReportFormat::Summary => write_summary(records, &path)?,
    }
    Ok(path)
}
