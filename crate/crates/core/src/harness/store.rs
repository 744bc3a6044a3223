use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{HarnessError, ResultRecord};

const MANIFEST: &str = "manifest.jsonl";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestEntry {
    hash: String,
    config_hash: String,
    file: String,
}

/// Writes `<dir>/<hash>.json` and appends it to the manifest; returns the
/// record path. An existing record with the same hash is left untouched.
pub fn persist(record: &ResultRecord, dir: &Path) -> Result<PathBuf, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let file = format!("{}.json", record.record_hash);
    let path = dir.join(&file);
    if path.exists() {
        return Ok(path);
    }
    let body = serde_json::to_vec_pretty(record).map_err(|e| HarnessError::InvalidParameter(e.to_string()))?;
    fs::write(&path, body).map_err(|e| HarnessError::io(&path, e))?;
    let entry = ManifestEntry { hash: record.record_hash.clone(), config_hash: record.config_hash.clone(), file };
    let manifest = dir.join(MANIFEST);
    let mut f = OpenOptions::new().create(true).append(true).open(&manifest).map_err(|e| HarnessError::io(&manifest, e))?;
    let line = serde_json::to_string(&entry).expect("manifest entry serializes");
    writeln!(f, "{line}").map_err(|e| HarnessError::io(&manifest, e))?;
    Ok(path)
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SummaryRow {
    pub hash: String,
    pub system: String,
    pub alpha: String,
    pub iota1: i64,
    pub iota2: i64,
    pub n: u64,
    pub abs_final: f64,
    pub decay_slope: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct ReportSummary {
    pub rows: Vec<SummaryRow>,
    /// Hashes of manifest entries that were unreadable or failed their hash check.
    pub skipped: Vec<String>,
}

#[derive(Serialize)]
struct CsvRow {
    #[serde(rename = "N")]
    n: u64,
    re_avg: f64,
    im_avg: f64,
    abs_avg: f64,
}

fn load(dir: &Path, entry: &ManifestEntry) -> Option<ResultRecord> {
    let text = fs::read_to_string(dir.join(&entry.file)).ok()?;
    let rec: ResultRecord = serde_json::from_str(&text).ok()?;
    (rec.record_hash == entry.hash && rec.compute_hash() == entry.hash).then_some(rec)
}

/// Regenerates `<hash>.csv` for every intact record and `summary.csv` over all of them.
pub fn report(dir: &Path) -> Result<ReportSummary, HarnessError> {
    let manifest = dir.join(MANIFEST);
    let text = fs::read_to_string(&manifest).map_err(|e| HarnessError::io(&manifest, e))?;
    let mut out = ReportSummary::default();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let entry: ManifestEntry = match serde_json::from_str(line) {
            Ok(e) => e,
            Err(_) => {
                log::warn!("skipping unreadable manifest line: {line}");
                out.skipped.push(line.to_string());
                continue;
            }
        };
        let Some(rec) = load(dir, &entry) else {
            log::warn!("skipping corrupted record {}", entry.hash);
            out.skipped.push(entry.hash);
            continue;
        };
        let csv_path = dir.join(format!("{}.csv", rec.record_hash));
        let mut w = csv::Writer::from_path(&csv_path).map_err(|e| HarnessError::Io(csv_path.clone(), e.to_string()))?;
        for cp in &rec.checkpoints {
            w.serialize(CsvRow { n: cp.n, re_avg: cp.re, im_avg: cp.im, abs_avg: cp.abs })
                .map_err(|e| HarnessError::Io(csv_path.clone(), e.to_string()))?;
        }
        w.flush().map_err(|e| HarnessError::io(&csv_path, e))?;
        out.rows.push(SummaryRow {
            hash: rec.record_hash.clone(),
            system: rec.config.system.clone(),
            alpha: rec.config.alpha.clone(),
            iota1: rec.config.iota1,
            iota2: rec.config.iota2,
            n: rec.config.n,
            abs_final: rec.abs_final,
            decay_slope: rec.decay_slope,
        });
    }
    let summary = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&summary).map_err(|e| HarnessError::Io(summary.clone(), e.to_string()))?;
    for r in &out.rows {
        w.serialize(r).map_err(|e| HarnessError::Io(summary.clone(), e.to_string()))?;
    }
    w.flush().map_err(|e| HarnessError::io(&summary, e))?;
    Ok(out)
}
