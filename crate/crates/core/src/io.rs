//! Logits+labels datasets and report files.
//!
//! Dataset formats:
//!
//! - JSONL, one object per line: `{"logits": [0.1, 0.9], "label": 1}`
//! - CSV with header `label,logit_0,...,logit_{k-1}`
//!
//! Both are read as a stream with line-numbered errors; LF and CRLF line
//! endings are accepted. Every record must carry the same number of logits.
//!
//! Reports are written as CSV (header row, LF endings) or as a JSON document
//! carrying the seed and a SHA-256 of the run configuration. Reals are
//! rounded to 12 significant digits in both.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorReport, RiskCoveragePoint};
use crate::harness::{ConvergenceTable, CounterexampleReport, EquivalenceReport};
use crate::scoring::LogitsRecord;
use crate::theory::BiasMseCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    Jsonl,
    Csv,
}

impl DataFormat {
    /// `.jsonl`, `.ndjson` and `.json` read as JSONL; `.csv` as CSV.
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("jsonl" | "ndjson" | "json") => Ok(DataFormat::Jsonl),
            Some("csv") => Ok(DataFormat::Csv),
            _ => Err(Error::Usage(format!(
                "cannot infer the format of {}; use a .jsonl or .csv extension or pass --format",
                path.display()
            ))),
        }
    }
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" | "json" => Ok(DataFormat::Jsonl),
            "csv" => Ok(DataFormat::Csv),
            _ => Err(Error::Usage(format!("unknown dataset format `{s}` (jsonl|csv)"))),
        }
    }
}

/// A fully loaded dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub format: DataFormat,
    pub k: usize,
    pub records: Vec<LogitsRecord>,
}

#[derive(Deserialize)]
struct RawRecord {
    logits: Vec<f64>,
    label: u64,
}

enum Source<R: BufRead> {
    Jsonl { reader: R, buf: String },
    Csv { records: csv::StringRecordsIntoIter<R> },
}

/// Streaming record reader; holds one record at a time.
pub struct DatasetReader<R: BufRead> {
    path: PathBuf,
    source: Source<R>,
    /// Class count and the line that established it.
    k: Option<(usize, u64)>,
    line: u64,
    done: bool,
}

impl DatasetReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>, format: DataFormat) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(DatasetReader::new(BufReader::with_capacity(1 << 16, file), format, path))
    }
}

impl<R: BufRead> DatasetReader<R> {
    /// `path` is only used in error messages.
    pub fn new(reader: R, format: DataFormat, path: impl Into<PathBuf>) -> Self {
        let source = match format {
            DataFormat::Jsonl => Source::Jsonl {
                reader,
                buf: String::new(),
            },
            DataFormat::Csv => Source::Csv {
                records: csv::ReaderBuilder::new()
                    .has_headers(false)
                    .flexible(true)
                    .trim(csv::Trim::All)
                    .from_reader(reader)
                    .into_records(),
            },
        };
        DatasetReader {
            path: path.into(),
            source,
            k: None,
            line: 0,
            done: false,
        }
    }

    /// Class count, known after the CSV header or the first JSONL record.
    pub fn k(&self) -> Option<usize> {
        self.k.map(|(k, _)| k)
    }

    fn parse_err(&self, line: u64, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn check(&mut self, logits: Vec<f64>, label: u64, line: u64) -> Result<LogitsRecord> {
        let m = logits.len();
        match self.k {
            Some((k, first)) if k != m => {
                return Err(self.parse_err(
                    line,
                    format!("field `logits`: expected {k} logits (as established at line {first}), found {m}"),
                ))
            }
            None => {
                if m < 2 {
                    return Err(self.parse_err(line, format!("field `logits`: need at least 2 logits, found {m}")));
                }
                self.k = Some((m, line));
            }
            _ => {}
        }
        if let Some(i) = logits.iter().position(|z| !z.is_finite()) {
            return Err(self.parse_err(line, format!("field `logits[{i}]`: value is not finite")));
        }
        if label >= m as u64 {
            return Err(self.parse_err(line, format!("field `label`: {label} out of range 0..{m}")));
        }
        Ok(LogitsRecord {
            logits,
            label: label as usize,
        })
    }

    fn next_jsonl(&mut self) -> Option<Result<LogitsRecord>> {
        loop {
            let Source::Jsonl { reader, buf } = &mut self.source else {
                unreachable!()
            };
            buf.clear();
            match reader.read_line(buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(Error::io(self.path.clone(), e))),
            }
            self.line += 1;
            let text = buf.trim_end_matches(['\n', '\r']);
            if text.trim().is_empty() {
                continue;
            }
            let line = self.line;
            let parsed = serde_json::from_str::<RawRecord>(text)
                .map_err(|_| describe_json_error(text));
            return Some(match parsed {
                Ok(raw) => self.check(raw.logits, raw.label, line),
                Err(msg) => Err(self.parse_err(line, msg)),
            });
        }
    }

    fn next_csv(&mut self) -> Option<Result<LogitsRecord>> {
        let Source::Csv { records } = &mut self.source else {
            unreachable!()
        };
        let row = match records.next()? {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(self.line + 1, |p| p.line());
                return Some(Err(self.parse_err(line, e.to_string())));
            }
        };
        let line = row.position().map_or(self.line + 1, |p| p.line());
        self.line = line;
        if self.k.is_none() {
            if let Err(e) = self.read_header(&row, line) {
                return Some(Err(e));
            }
            return self.next_csv();
        }
        Some(self.csv_record(&row, line))
    }

    fn read_header(&mut self, row: &csv::StringRecord, line: u64) -> Result<()> {
        if row.get(0) != Some("label") {
            return Err(self.parse_err(line, "header must start with `label`"));
        }
        let k = row.len() - 1;
        for (i, name) in row.iter().skip(1).enumerate() {
            if name != format!("logit_{i}") {
                return Err(self.parse_err(line, format!("header column {} must be `logit_{i}`, found `{name}`", i + 1)));
            }
        }
        if k < 2 {
            return Err(self.parse_err(line, format!("header declares {k} logit columns, need at least 2")));
        }
        self.k = Some((k, line));
        Ok(())
    }

    fn csv_record(&mut self, row: &csv::StringRecord, line: u64) -> Result<LogitsRecord> {
        let label_text = row.get(0).unwrap_or("");
        let label: u64 = label_text
            .parse()
            .map_err(|_| self.parse_err(line, format!("field `label`: `{label_text}` is not a non-negative integer")))?;
        let mut logits = Vec::with_capacity(row.len().saturating_sub(1));
        for (i, field) in row.iter().skip(1).enumerate() {
            let z: f64 = field
                .parse()
                .map_err(|_| self.parse_err(line, format!("field `logit_{i}`: `{field}` is not a number")))?;
            logits.push(z);
        }
        self.check(logits, label, line)
    }
}

impl<R: BufRead> Iterator for DatasetReader<R> {
    type Item = Result<LogitsRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = match self.source {
            Source::Jsonl { .. } => self.next_jsonl(),
            Source::Csv { .. } => self.next_csv(),
        };
        if matches!(item, None | Some(Err(_))) {
            self.done = true;
        }
        item
    }
}

/// Re-parse a line that failed typed decoding to say which field is wrong.
fn describe_json_error(text: &str) -> String {
    let value: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return format!("malformed JSON: {e}"),
    };
    let Some(obj) = value.as_object() else {
        return "expected a JSON object with fields `logits` and `label`".into();
    };
    match obj.get("logits") {
        None => return "missing field `logits`".into(),
        Some(Value::Array(items)) => {
            if let Some(i) = items.iter().position(|v| !v.is_number()) {
                return format!("field `logits[{i}]`: expected a number, found {}", items[i]);
            }
        }
        Some(other) => return format!("field `logits`: expected an array of numbers, found {other}"),
    }
    match obj.get("label") {
        None => "missing field `label`".into(),
        Some(v) if v.as_u64().is_none() => format!("field `label`: expected a non-negative integer, found {v}"),
        Some(_) => "record could not be decoded".into(),
    }
}

/// Read a whole dataset; an empty file is an error.
pub fn load_dataset(path: impl AsRef<Path>, format: DataFormat) -> Result<DatasetFile> {
    let path = path.as_ref();
    let mut reader = DatasetReader::open(path, format)?;
    let records = reader.by_ref().collect::<Result<Vec<_>>>()?;
    let k = match reader.k() {
        Some(k) if !records.is_empty() => k,
        _ => return Err(Error::invalid(format!("{}: no records", path.display()))),
    };
    Ok(DatasetFile { format, k, records })
}

/// Write records in full precision (shortest round-trip representation).
pub fn write_dataset(path: impl AsRef<Path>, format: DataFormat, records: &[LogitsRecord]) -> Result<()> {
    let path = path.as_ref();
    let io_err = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    let mut line = String::new();
    match format {
        DataFormat::Jsonl => {
            for r in records {
                line.clear();
                line.push_str("{\"logits\":[");
                for (i, z) in r.logits.iter().enumerate() {
                    if i > 0 {
                        line.push(',');
                    }
                    write!(line, "{z:?}").unwrap();
                }
                writeln!(line, "],\"label\":{}}}", r.label).unwrap();
                out.write_all(line.as_bytes()).map_err(io_err)?;
            }
        }
        DataFormat::Csv => {
            let k = records.first().map_or(0, |r| r.logits.len());
            line.push_str("label");
            for i in 0..k {
                write!(line, ",logit_{i}").unwrap();
            }
            line.push('\n');
            out.write_all(line.as_bytes()).map_err(io_err)?;
            for r in records {
                line.clear();
                write!(line, "{}", r.label).unwrap();
                for z in &r.logits {
                    write!(line, ",{z:?}").unwrap();
                }
                line.push('\n');
                out.write_all(line.as_bytes()).map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::Usage(format!("unknown report format `{s}` (csv|json)"))),
        }
    }
}

/// Round to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// `x` rounded to 12 significant digits, in its shortest decimal form.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{:?}", round_sig12(x))
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_real(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Real)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Anything that can be written as a report.
pub trait Report: Serialize {
    /// Short tag stored in the JSON document.
    fn kind(&self) -> &'static str;
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<Cell>>;
}

fn opt_name<T: std::fmt::Display>(x: &Option<T>) -> Cell {
    x.as_ref().map_or(Cell::Empty, |v| Cell::Text(v.to_string()))
}

const ESTIMATOR_HEADER: [&str; 7] = ["estimator", "value", "n", "loss", "csf", "tie_policy", "seed"];

fn estimator_row(r: &EstimatorReport) -> Vec<Cell> {
    vec![
        r.estimator.name().into(),
        r.value.into(),
        r.n.into(),
        opt_name(&r.loss_kind),
        opt_name(&r.csf_kind),
        r.tie_policy.to_string().into(),
        r.seed.map_or(Cell::Empty, Cell::Int),
    ]
}

impl Report for EstimatorReport {
    fn kind(&self) -> &'static str {
        "estimator_report"
    }
    fn header(&self) -> Vec<&'static str> {
        ESTIMATOR_HEADER.to_vec()
    }
    fn rows(&self) -> Vec<Vec<Cell>> {
        vec![estimator_row(self)]
    }
}

impl Report for Vec<EstimatorReport> {
    fn kind(&self) -> &'static str {
        "estimator_reports"
    }
    fn header(&self) -> Vec<&'static str> {
        ESTIMATOR_HEADER.to_vec()
    }
    fn rows(&self) -> Vec<Vec<Cell>> {
        self.iter().map(estimator_row).collect()
    }
}

impl Report for ConvergenceTable {
    fn kind(&self) -> &'static str {
        "convergence_table"
    }
    fn header(&self) -> Vec<&'static str> {
        vec!["size", "estimator", "mean", "std", "gap", "mae", "mse", "batches", "reference"]
    }
    fn rows(&self) -> Vec<Vec<Cell>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.size.into(),
                    r.estimator.name().into(),
                    r.mean.into(),
                    r.std.into(),
                    r.gap.into(),
                    r.mae.into(),
                    r.mse.into(),
                    r.batches.into(),
                    self.reference.into(),
                ]
            })
            .collect()
    }
}

fn curves_header(curves: &[BiasMseCurve]) -> Vec<&'static str> {
    let mut h = vec!["quantity", "n", "beta_or_rank", "closed_form"];
    if curves.iter().any(BiasMseCurve::has_mc) {
        h.extend(["mc_estimate", "mc_stderr"]);
    }
    h
}

fn curves_rows(curves: &[BiasMseCurve]) -> Vec<Vec<Cell>> {
    let with_mc = curves.iter().any(BiasMseCurve::has_mc);
    let mut rows = Vec::new();
    for c in curves {
        for p in &c.points {
            let (n, x) = match c.n {
                Some(n) => (n.into(), p.x.into()),
                None => (Cell::Int(p.x as u64), Cell::Empty),
            };
            let mut row = vec![c.quantity.name().into(), n, x, p.closed_form.into()];
            if with_mc {
                row.push(p.mc_estimate.into());
                row.push(p.mc_stderr.into());
            }
            rows.push(row);
        }
    }
    rows
}

impl Report for BiasMseCurve {
    fn kind(&self) -> &'static str {
        "bias_mse_curve"
    }
    fn header(&self) -> Vec<&'static str> {
        curves_header(std::slice::from_ref(self))
    }
    fn rows(&self) -> Vec<Vec<Cell>> {
        curves_rows(std::slice::from_ref(self))
    }
}

impl Report for Vec<BiasMseCurve> {
    fn kind(&self) -> &'static str {
        "bias_mse_curves"
    }
    fn header(&self) -> Vec<&'static str> {
        curves_header(self)
    }
    fn rows(&self) -> Vec<Vec<Cell>> {
        curves_rows(self)
    }
}

impl Report for CounterexampleReport {
    fn kind(&self) -> &'static str {
        "counterexample"
    }
    fn header(&self) -> Vec<&'static str> {
        vec!["top_loss", "top_weight", "plugin_alpha_hat", "sele", "sele_times_two", "holds"]
    }
    fn rows(&self) -> Vec<Vec<Cell>> {
        vec![vec![
            self.losses[4].into(),
            self.top_weight.into(),
            self.plugin_alpha_hat.into(),
            self.sele.into(),
            self.sele_times_two.into(),
            self.holds.to_string().into(),
        ]]
    }
}

impl Report for EquivalenceReport {
    fn kind(&self) -> &'static str {
        "equivalence"
    }
    fn header(&self) -> Vec<&'static str> {
        vec!["n", "empirical", "population", "abs_gap", "rel_gap"]
    }
    fn rows(&self) -> Vec<Vec<Cell>> {
        vec![vec![
            self.n.into(),
            self.empirical.into(),
            self.population.into(),
            self.abs_gap.into(),
            self.rel_gap.into(),
        ]]
    }
}

impl Report for Vec<RiskCoveragePoint> {
    fn kind(&self) -> &'static str {
        "risk_coverage"
    }
    fn header(&self) -> Vec<&'static str> {
        vec!["threshold", "coverage", "risk"]
    }
    fn rows(&self) -> Vec<Vec<Cell>> {
        self.iter()
            .map(|p| vec![p.threshold.into(), p.coverage.into(), p.risk.into()])
            .collect()
    }
}

/// Run metadata embedded in JSON reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub config: Value,
    /// SHA-256 of the compact JSON encoding of `config` (keys sorted).
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(seed: Option<u64>, config: &impl Serialize) -> Result<Self> {
        let config = serde_json::to_value(config).map_err(|e| Error::invalid(e.to_string()))?;
        let digest = Sha256::digest(config.to_string().as_bytes());
        let mut hex = String::with_capacity(64);
        for b in digest.iter() {
            write!(hex, "{b:02x}").unwrap();
        }
        Ok(Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config,
            config_sha256: hex,
        })
    }
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig12(n.as_f64().unwrap());
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Render a report to a string (LF line endings, trailing newline).
pub fn render_report<R: Report + ?Sized>(report: &R, format: ReportFormat, provenance: &Provenance) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let mut out = report.header().join(",");
            out.push('\n');
            for row in report.rows() {
                let cells: Vec<String> = row.iter().map(|c| csv_escape(&c.render())).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            Ok(out)
        }
        ReportFormat::Json => {
            let mut data = serde_json::to_value(report).map_err(|e| Error::invalid(e.to_string()))?;
            round_json(&mut data);
            let doc = serde_json::json!({
                "kind": report.kind(),
                "provenance": provenance,
                "data": data,
            });
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::invalid(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Write a report to `path`.
pub fn write_report<R: Report + ?Sized>(
    report: &R,
    path: impl AsRef<Path>,
    format: ReportFormat,
    provenance: &Provenance,
) -> Result<()> {
    let path = path.as_ref();
    let text = render_report(report, format, provenance)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
