//! Batch evaluation over a directory of high-resolution images.
//!
//! Every (image, method, factor) combination yields exactly one row. Rows
//! that fail carry the failure text in the `error` column; they are never
//! dropped. Metrics are filled only when a ground-truth image is found and
//! its dimensions match the output.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::lsid::{LsidParams, DEFAULT_ALPHA, DEFAULT_K};
use crate::method::Method;
use crate::metrics::{psnr, ssim};
use crate::raster::{is_image_path, load_image, Raster};

pub const CSV_HEADER: [&str; 9] = [
    "image", "method", "factor", "psnr_db", "ssim", "time_ms", "out_w", "out_h", "error",
];

/// A method column in the report: a built-in downscaler, or a directory of
/// outputs produced elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BenchMethod {
    Builtin(Method),
    External(PathBuf),
}

impl BenchMethod {
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchMethod::Builtin(m) => write!(f, "{m}"),
            BenchMethod::External(dir) => write!(f, "external:{}", dir.display()),
        }
    }
}

impl FromStr for BenchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.strip_prefix("external:") {
            Some("") => Err(Error::Config("external method needs a directory".into())),
            Some(dir) => Ok(BenchMethod::External(PathBuf::from(dir))),
            None => s.parse().map(BenchMethod::Builtin),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub hr_dir: PathBuf,
    pub gt_dir: Option<PathBuf>,
    /// File stem pattern for ground-truth and external images; `{stem}` is
    /// the HR file stem and `{factor}` the factor, e.g. `{stem}x{factor}`.
    pub gt_template: String,
    pub factors: Vec<f64>,
    pub methods: Vec<BenchMethod>,
    pub alpha: f64,
    pub k: usize,
    pub out: PathBuf,
    pub markdown: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            hr_dir: PathBuf::new(),
            gt_dir: None,
            gt_template: "{stem}".into(),
            factors: vec![4.0],
            methods: Method::ALL.into_iter().map(BenchMethod::Builtin).collect(),
            alpha: DEFAULT_ALPHA,
            k: DEFAULT_K,
            out: PathBuf::from("bench.csv"),
            markdown: None,
        }
    }
}

/// Keys accepted in a config file, one `key = value` per line.
pub const CONFIG_KEYS: [&str; 9] = [
    "hr_dir", "gt_dir", "gt_template", "factors", "methods", "alpha", "k", "out", "markdown",
];

impl BenchConfig {
    /// Parse `key = value` lines; `#` starts a comment. Unset keys keep
    /// their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = BenchConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        BenchConfig::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "hr_dir" => self.hr_dir = value.into(),
            "gt_dir" => self.gt_dir = Some(value.into()),
            "gt_template" => self.gt_template = value.into(),
            "factors" => self.factors = parse_factors(value)?,
            "methods" => self.methods = parse_methods(value)?,
            "alpha" => {
                self.alpha = value
                    .parse()
                    .map_err(|_| Error::Config(format!("alpha: not a number: {value}")))?
            }
            "k" => {
                self.k = value
                    .parse()
                    .map_err(|_| Error::Config(format!("k: not an integer: {value}")))?
            }
            "out" => self.out = value.into(),
            "markdown" => self.markdown = Some(value.into()),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.hr_dir.is_dir() {
            return Err(Error::Config(format!(
                "hr_dir {} is not a directory",
                self.hr_dir.display()
            )));
        }
        if let Some(gt) = &self.gt_dir {
            if !gt.is_dir() {
                return Err(Error::Config(format!("gt_dir {} is not a directory", gt.display())));
            }
        }
        if self.factors.is_empty() {
            return Err(Error::Config("no factors given".into()));
        }
        if let Some(f) = self.factors.iter().find(|f| !f.is_finite() || **f <= 1.0) {
            return Err(Error::InvalidFactor(*f));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods given".into()));
        }
        for m in &self.methods {
            if let BenchMethod::External(dir) = m {
                if !dir.is_dir() {
                    return Err(Error::Config(format!(
                        "external directory {} does not exist",
                        dir.display()
                    )));
                }
            }
        }
        LsidParams::new(2.0).with_alpha(self.alpha).with_k(self.k).validate()
    }

    fn stem_for(&self, stem: &str, factor: f64) -> String {
        self.gt_template
            .replace("{stem}", stem)
            .replace("{factor}", &format_factor(factor))
    }
}

pub fn parse_factors(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("not a factor: '{}'", p.trim())))
        })
        .collect()
}

pub fn parse_methods(s: &str) -> Result<Vec<BenchMethod>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// `4` for 4.0, `8.75` for 8.75.
pub fn format_factor(f: f64) -> String {
    format!("{f}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub image: String,
    pub method: String,
    pub factor: f64,
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
    pub time_ms: Option<f64>,
    pub out_w: Option<usize>,
    pub out_h: Option<usize>,
    pub error: Option<String>,
}

impl BenchRow {
    fn new(image: &str, method: &BenchMethod, factor: f64) -> Self {
        BenchRow {
            image: image.to_string(),
            method: method.label(),
            factor,
            psnr_db: None,
            ssim: None,
            time_ms: None,
            out_w: None,
            out_h: None,
            error: None,
        }
    }

    fn failed(mut self, err: impl fmt::Display) -> Self {
        self.error = Some(err.to_string());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

/// Look for `<dir>/<stem>` as given, then with each supported extension.
fn find_image(dir: &Path, stem: &str) -> Option<PathBuf> {
    let direct = dir.join(stem);
    if direct.is_file() && is_image_path(&direct) {
        return Some(direct);
    }
    ["png", "ppm", "pgm", "pnm", "PNG", "PPM", "PGM"]
        .iter()
        .map(|ext| dir.join(format!("{stem}.{ext}")))
        .find(|p| p.is_file())
}

fn list_images(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut images = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && is_image_path(&path) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                images.push((stem.to_string(), path.clone()));
            }
        }
    }
    images.sort();
    Ok(images)
}

/// Run every configured method at every factor over `cfg.hr_dir`.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let images = list_images(&cfg.hr_dir)?;
    if images.is_empty() {
        return Err(Error::Config(format!(
            "no images found in {}",
            cfg.hr_dir.display()
        )));
    }

    let mut rows = Vec::new();
    for (stem, path) in &images {
        let hr = load_image(path);
        if let Err(e) = &hr {
            log::warn!("{}: {e}", path.display());
        }
        for &factor in &cfg.factors {
            let gt = ground_truth(cfg, stem, factor);
            for method in &cfg.methods {
                let row = BenchRow::new(stem, method, factor);
                let row = match &hr {
                    Ok(hr) => evaluate(cfg, row, hr, method, factor, &gt),
                    Err(e) => row.failed(e),
                };
                rows.push(row);
            }
        }
    }
    rows.sort_by(|a, b| {
        a.image
            .cmp(&b.image)
            .then_with(|| a.method.cmp(&b.method))
            .then_with(|| a.factor.total_cmp(&b.factor))
    });
    Ok(BenchReport { rows })
}

enum GroundTruth {
    NotConfigured,
    Missing,
    Found(Result<Raster>),
}

fn ground_truth(cfg: &BenchConfig, stem: &str, factor: f64) -> GroundTruth {
    let Some(dir) = &cfg.gt_dir else {
        return GroundTruth::NotConfigured;
    };
    let name = cfg.stem_for(stem, factor);
    match find_image(dir, &name) {
        Some(p) => GroundTruth::Found(load_image(p)),
        None => {
            log::warn!(
                "{stem}: no ground truth '{name}' in {} at factor {}; metrics left empty",
                dir.display(),
                format_factor(factor)
            );
            GroundTruth::Missing
        }
    }
}

fn evaluate(
    cfg: &BenchConfig,
    mut row: BenchRow,
    hr: &Raster,
    method: &BenchMethod,
    factor: f64,
    gt: &GroundTruth,
) -> BenchRow {
    let output = match method {
        BenchMethod::Builtin(m) => {
            let params = LsidParams::new(factor).with_alpha(cfg.alpha).with_k(cfg.k);
            let start = Instant::now();
            let out = m.run(hr, &params);
            row.time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            out
        }
        BenchMethod::External(dir) => {
            let name = cfg.stem_for(&row.image, factor);
            match find_image(dir, &name) {
                Some(p) => load_image(p),
                None => return row.failed(format!("no external output '{name}' in {}", dir.display())),
            }
        }
    };
    let output = match output {
        Ok(o) => o,
        Err(e) => return row.failed(e),
    };
    row.out_w = Some(output.width());
    row.out_h = Some(output.height());

    let reference = match gt {
        GroundTruth::NotConfigured | GroundTruth::Missing => return row,
        GroundTruth::Found(Err(e)) => return row.failed(format!("ground truth: {e}")),
        GroundTruth::Found(Ok(r)) => r,
    };
    if (reference.width(), reference.height(), reference.channels())
        != (output.width(), output.height(), output.channels())
    {
        return row.failed(format!(
            "output {}x{}x{} does not match ground truth {}x{}x{}",
            output.width(),
            output.height(),
            output.channels(),
            reference.width(),
            reference.height(),
            reference.channels()
        ));
    }
    match psnr(reference, &output) {
        Ok(p) => row.psnr_db = Some(p),
        Err(e) => return row.failed(e),
    }
    match ssim(reference, &output) {
        Ok(s) => row.ssim = Some(s),
        Err(e) => return row.failed(e),
    }
    row
}

fn fmt_psnr(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p:.4}")
    }
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

/// CSV text of the report with the fixed header.
pub fn render_csv(report: &BenchReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in &report.rows {
        w.write_record([
            r.image.clone(),
            r.method.clone(),
            format_factor(r.factor),
            opt(r.psnr_db, fmt_psnr),
            opt(r.ssim, |s| format!("{s:.6}")),
            opt(r.time_ms, |t| format!("{t:.3}")),
            opt(r.out_w, |v| v.to_string()),
            opt(r.out_h, |v| v.to_string()),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_report(report: &BenchReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_csv(report)?).map_err(|e| Error::io(path, e))
}

/// Per (method, factor) means over rows without an error.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub factor: f64,
    pub images: usize,
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
    pub time_ms: Option<f64>,
}

pub fn summarize(report: &BenchReport) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, u64), Vec<&BenchRow>> = BTreeMap::new();
    for r in report.rows.iter().filter(|r| r.error.is_none()) {
        groups
            .entry((r.method.clone(), r.factor.to_bits()))
            .or_default()
            .push(r);
    }
    let mean = |vals: Vec<f64>| {
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let mut out: Vec<SummaryRow> = groups
        .into_iter()
        .map(|((method, bits), rows)| SummaryRow {
            method,
            factor: f64::from_bits(bits),
            images: rows.len(),
            psnr_db: mean(rows.iter().filter_map(|r| r.psnr_db).collect()),
            ssim: mean(rows.iter().filter_map(|r| r.ssim).collect()),
            time_ms: mean(rows.iter().filter_map(|r| r.time_ms).collect()),
        })
        .collect();
    out.sort_by(|a, b| a.method.cmp(&b.method).then_with(|| a.factor.total_cmp(&b.factor)));
    out
}

pub fn render_markdown(report: &BenchReport) -> String {
    let mut md = String::from(
        "| method | factor | images | PSNR (dB) | SSIM | time (ms) |\n|---|---|---|---|---|---|\n",
    );
    for s in summarize(report) {
        let dash = || "-".to_string();
        writeln!(
            md,
            "| {} | {} | {} | {} | {} | {} |",
            s.method,
            format_factor(s.factor),
            s.images,
            s.psnr_db.map(fmt_psnr).unwrap_or_else(dash),
            s.ssim.map(|v| format!("{v:.4}")).unwrap_or_else(dash),
            s.time_ms.map(|v| format!("{v:.1}")).unwrap_or_else(dash),
        )
        .unwrap();
    }
    md
}

pub fn write_markdown(report: &BenchReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_markdown(report)).map_err(|e| Error::io(path, e))
}
