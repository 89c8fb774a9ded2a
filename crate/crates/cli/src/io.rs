//! Points CSV, counts JSONL and run manifest, each with a matching reader.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use lipkin_core::lmg::{LmgParams, RdmPoint, Source};
use lipkin_core::tomography::CountsRecord;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::SweepConfig;
use crate::error::{CliError, CliResult};

pub const EXACT_COLUMNS: [&str; 10] = [
    "epsilon", "lambda", "jz", "jz2", "jpm2", "energy", "degenerate", "source", "shots", "seed",
];
pub const SIM_EXTRA_COLUMNS: [&str; 5] = ["jz_err", "jz2_err", "jpm2_err", "energy_err", "status"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

/// One row of points.csv. Exact files leave the error columns out; failed
/// simulation points leave the value columns empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRow {
    pub epsilon: f64,
    pub lambda: f64,
    pub jz: Option<f64>,
    pub jz2: Option<f64>,
    pub jpm2: Option<f64>,
    pub energy: Option<f64>,
    pub degenerate: Option<bool>,
    pub source: String,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub jz_err: Option<f64>,
    #[serde(default)]
    pub jz2_err: Option<f64>,
    #[serde(default)]
    pub jpm2_err: Option<f64>,
    #[serde(default)]
    pub energy_err: Option<f64>,
    #[serde(default)]
    pub status: Option<Status>,
}

impl PointRow {
    pub fn exact(p: &RdmPoint, degenerate: bool) -> Self {
        Self {
            epsilon: p.params.epsilon,
            lambda: p.params.lambda,
            jz: Some(p.jz),
            jz2: Some(p.jz2),
            jpm2: Some(p.jpm2),
            energy: Some(p.energy()),
            degenerate: Some(degenerate),
            source: p.source.as_str().to_string(),
            shots: p.shots,
            seed: p.seed,
            jz_err: None,
            jz2_err: None,
            jpm2_err: None,
            energy_err: None,
            status: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status != Some(Status::Failed) && self.jz.is_some() && self.jz2.is_some() && self.jpm2.is_some()
    }

    pub fn coords(&self) -> Option<[f64; 3]> {
        Some([self.jz?, self.jz2?, self.jpm2?])
    }

    /// `n_particles` is not stored per row; callers supply it.
    pub fn to_point(&self, n_particles: u32) -> Option<RdmPoint> {
        let c = self.coords()?;
        Some(RdmPoint {
            jz: c[0],
            jz2: c[1],
            jpm2: c[2],
            params: LmgParams {
                epsilon: self.epsilon,
                lambda: self.lambda,
                n_particles,
            },
            source: Source::parse(&self.source).unwrap_or(Source::Exact),
            shots: self.shots,
            seed: self.seed,
        })
    }

    pub fn max_err(&self) -> f64 {
        [self.jz_err, self.jz2_err, self.jpm2_err]
            .iter()
            .map(|e| e.unwrap_or(0.0))
            .fold(0.0, f64::max)
    }
}

/// Shortest string that parses back to the same bits; exponent form only
/// outside [1e-5, 1e16) so tiny residuals stay compact.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

pub fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn row_fields(r: &PointRow, sim: bool) -> Vec<String> {
    let mut f = vec![
        fmt_f64(r.epsilon),
        fmt_f64(r.lambda),
        fmt_opt_f64(r.jz),
        fmt_opt_f64(r.jz2),
        fmt_opt_f64(r.jpm2),
        fmt_opt_f64(r.energy),
        opt(r.degenerate),
        r.source.clone(),
        opt(r.shots),
        opt(r.seed),
    ];
    if sim {
        f.extend([fmt_opt_f64(r.jz_err), fmt_opt_f64(r.jz2_err), fmt_opt_f64(r.jpm2_err), fmt_opt_f64(r.energy_err)]);
        f.push(match r.status {
            Some(Status::Ok) => "ok".into(),
            Some(Status::Failed) => "failed".into(),
            None => String::new(),
        });
    }
    f
}

pub fn points_csv_bytes(rows: &[PointRow], sim: bool) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = EXACT_COLUMNS.to_vec();
    if sim {
        header.extend(SIM_EXTRA_COLUMNS);
    }
    w.write_record(&header)?;
    for r in rows {
        w.write_record(row_fields(r, sim))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_points_csv(path: &Path, rows: &[PointRow], sim: bool) -> CliResult<()> {
    write_bytes(path, &points_csv_bytes(rows, sim)?)
}

pub fn read_points_csv(path: &Path) -> CliResult<Vec<PointRow>> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r.headers()?.clone();
    for col in EXACT_COLUMNS {
        if !header.iter().any(|h| h == col) {
            return Err(CliError::Config(format!("{}: missing column {col}", path.display())));
        }
    }
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?);
    }
    Ok(rows)
}

/// One histogram with the grid point it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsLine {
    pub point: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub repetition: u32,
    #[serde(flatten)]
    pub record: CountsRecord,
}

pub fn counts_jsonl_bytes(lines: &[CountsLine]) -> CliResult<Vec<u8>> {
    let mut out = Vec::new();
    for l in lines {
        serde_json::to_writer(&mut out, l)?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn read_counts_jsonl(path: &Path) -> CliResult<Vec<CountsLine>> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSeed {
    pub point: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub config: SweepConfig,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub seeds: Vec<PointSeed>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn new(command: &str, config: &SweepConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash: config.hash(),
            config: config.clone(),
            started_unix: now(),
            finished_unix: 0.0,
            seeds: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn record_file(&mut self, dir: &Path, name: &str) -> CliResult<()> {
        let bytes = std::fs::read(dir.join(name))?;
        self.files.push(FileEntry {
            name: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    pub fn finish(mut self, dir: &Path) -> CliResult<()> {
        self.finished_unix = now();
        let mut text = serde_json::to_vec_pretty(&self)?;
        text.push(b'\n');
        write_bytes(&dir.join("manifest.json"), &text)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn ensure_dir(dir: &Path) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes)?;
    w.flush()?;
    Ok(())
}

/// Manifest next to a points file, when present.
pub fn sibling_manifest(points: &Path) -> Option<RunManifest> {
    let dir = points.parent()?;
    RunManifest::read(&dir.join("manifest.json")).ok()
}
