//! CSV ingestion of exposures, capitals and default probabilities, the
//! matching writers, and CSV/JSON report output.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exposure::{
    BankId, BankRecord, BankRecords, LayerId, LiabilityMatrix, MultiLayerSnapshot,
};
use crate::loss::{spread_to_pd, DefaultProbabilities, Provenance, SpreadConvention};

/// Layers of each date, as read from an exposures file.
pub type ExposureData = BTreeMap<NaiveDate, BTreeMap<LayerId, LiabilityMatrix>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExposureRow {
    pub date: NaiveDate,
    pub layer: LayerId,
    pub debtor: BankId,
    pub creditor: BankId,
    pub amount: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapitalRow {
    pub date: NaiveDate,
    pub bank: BankId,
    pub capital: f64,
    #[serde(default)]
    pub total_assets: Option<f64>,
}

/// `bank` is `*` for a row that applies to every bank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityRow {
    pub date: NaiveDate,
    pub bank: String,
    #[serde(default)]
    pub pd: Option<f64>,
    #[serde(default)]
    pub spread: Option<f64>,
}

pub const BROADCAST: &str = "*";

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads every data row of a headed CSV file, passing each with its line
/// number to `f`.
fn read_rows<T, F>(path: &Path, required: &[&str], mut f: F) -> Result<()>
where
    T: DeserializeOwned,
    F: FnMut(u64, T) -> Result<()>,
{
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    for col in required {
        if !headers.iter().any(|h| h == *col) {
            return Err(parse_err(path, 1, format!("missing column `{col}`")));
        }
    }
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: T = rec
            .deserialize(Some(&headers))
            .map_err(|e| parse_err(path, line, deserialize_message(&e)))?;
        f(line, row)?;
    }
    Ok(())
}

fn deserialize_message(e: &csv::Error) -> String {
    match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => e.to_string(),
    }
}

pub fn parse_exposures(path: impl AsRef<Path>) -> Result<ExposureData> {
    let path = path.as_ref();
    let mut out = ExposureData::new();
    merge_exposures(path, &mut out)?;
    Ok(out)
}

/// Adds the rows of `path` into `out`; repeated keys are summed.
fn merge_exposures(path: &Path, out: &mut ExposureData) -> Result<()> {
    read_rows(
        path,
        &["date", "layer", "debtor", "creditor", "amount"],
        |line, r: ExposureRow| {
            if r.layer.as_str().is_empty()
                || r.debtor.as_str().is_empty()
                || r.creditor.as_str().is_empty()
            {
                return Err(parse_err(path, line, "empty layer or bank id"));
            }
            if !(r.amount.is_finite() && r.amount > 0.0) {
                return Err(parse_err(
                    path,
                    line,
                    format!("amount {} is not positive", r.amount),
                ));
            }
            if r.debtor == r.creditor {
                return Err(parse_err(
                    path,
                    line,
                    format!("bank `{}` owes itself", r.debtor),
                ));
            }
            out.entry(r.date)
                .or_default()
                .entry(r.layer)
                .or_default()
                .add(r.debtor, r.creditor, r.amount)
                .map_err(|e| parse_err(path, line, e.to_string()))
        },
    )
}

/// Capital history per bank.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CapitalTable {
    history: BTreeMap<BankId, BTreeMap<NaiveDate, (f64, Option<f64>)>>,
}

impl CapitalTable {
    /// Records of every bank with a capital row on or before `date`, each
    /// taken from its latest such row.
    pub fn records_on(&self, date: NaiveDate) -> BankRecords {
        self.history
            .iter()
            .filter_map(|(bank, rows)| {
                rows.range(..=date)
                    .next_back()
                    .map(|(_, &(capital, assets))| {
                        let mut r = BankRecord::new(bank.clone(), capital);
                        r.total_noninterbank_assets = assets;
                        (bank.clone(), r)
                    })
            })
            .collect()
    }

    pub fn banks(&self) -> impl Iterator<Item = &BankId> {
        self.history.keys()
    }
}

pub fn parse_capitals(path: impl AsRef<Path>) -> Result<CapitalTable> {
    let path = path.as_ref();
    let mut table = CapitalTable::default();
    read_rows(path, &["date", "bank", "capital"], |line, r: CapitalRow| {
        if r.bank.as_str().is_empty() {
            return Err(parse_err(path, line, "empty bank id"));
        }
        if !(r.capital.is_finite() && r.capital >= 0.0) {
            return Err(parse_err(
                path,
                line,
                format!("capital {} is negative", r.capital),
            ));
        }
        if let Some(a) = r.total_assets {
            if !(a.is_finite() && a >= 0.0) {
                return Err(parse_err(
                    path,
                    line,
                    format!("total_assets {a} is negative"),
                ));
            }
        }
        let rows = table.history.entry(r.bank.clone()).or_default();
        if rows.insert(r.date, (r.capital, r.total_assets)).is_some() {
            return Err(parse_err(
                path,
                line,
                format!("duplicate capital row for `{}` on {}", r.bank, r.date),
            ));
        }
        Ok(())
    })?;
    Ok(table)
}

#[derive(Clone, Debug, Default, PartialEq)]
struct ProbabilityDay {
    broadcast: Option<(f64, Provenance)>,
    banks: BTreeMap<BankId, (f64, Provenance)>,
}

/// Default probabilities by date, with optional broadcast rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProbabilityTable {
    days: BTreeMap<NaiveDate, ProbabilityDay>,
}

impl ProbabilityTable {
    /// One probability for every bank on every date.
    pub fn constant(p: f64) -> Result<Self> {
        check_pd(p)?;
        Ok(ProbabilityTable {
            days: BTreeMap::from([(
                NaiveDate::MIN,
                ProbabilityDay {
                    broadcast: Some((p, Provenance::Direct)),
                    banks: BTreeMap::new(),
                },
            )]),
        })
    }

    /// Probabilities from the latest date on or before `date`. A bank's own
    /// row takes precedence over a broadcast row.
    pub fn for_banks(&self, date: NaiveDate, banks: &BankRecords) -> Result<DefaultProbabilities> {
        let day = self.days.range(..=date).next_back().map(|(_, d)| d);
        let mut from_spread = false;
        let mut values = BTreeMap::new();
        for id in banks.keys() {
            let (p, prov) = day
                .and_then(|d| d.banks.get(id).or(d.broadcast.as_ref()))
                .copied()
                .ok_or_else(|| Error::MissingProbability(id.clone()))?;
            from_spread |= prov == Provenance::FromSpread;
            values.insert(id.clone(), p);
        }
        let provenance = if from_spread {
            Provenance::FromSpread
        } else {
            Provenance::Direct
        };
        DefaultProbabilities::new(values, provenance)
    }
}

fn check_pd(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "pd",
            value: p,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

/// Reads `date,bank,pd` or `date,bank,spread` rows. Spreads are converted
/// with a one-year horizon at the given recovery rate.
pub fn parse_probabilities(path: impl AsRef<Path>, recovery_rate: f64) -> Result<ProbabilityTable> {
    let path = path.as_ref();
    let mut table = ProbabilityTable::default();
    read_rows(path, &["date", "bank"], |line, r: ProbabilityRow| {
        let (p, prov) = match (r.pd, r.spread) {
            (Some(_), Some(_)) => return Err(parse_err(path, line, "row has both pd and spread")),
            (None, None) => return Err(parse_err(path, line, "row has neither pd nor spread")),
            (Some(p), None) => {
                check_pd(p).map_err(|e| parse_err(path, line, e.to_string()))?;
                (p, Provenance::Direct)
            }
            (None, Some(s)) => {
                let p = spread_to_pd(s, recovery_rate, 1.0, SpreadConvention::ConstantHazard)
                    .map_err(|e| parse_err(path, line, e.to_string()))?;
                (p, Provenance::FromSpread)
            }
        };
        let day = table.days.entry(r.date).or_default();
        let duplicate = if r.bank == BROADCAST {
            day.broadcast.replace((p, prov)).is_some()
        } else {
            if r.bank.is_empty() {
                return Err(parse_err(path, line, "empty bank id"));
            }
            day.banks
                .insert(BankId::new(r.bank.clone()), (p, prov))
                .is_some()
        };
        if duplicate {
            return Err(parse_err(
                path,
                line,
                format!("duplicate probability for `{}` on {}", r.bank, r.date),
            ));
        }
        Ok(())
    })?;
    Ok(table)
}

/// Files making up one dataset.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DatasetBundle {
    pub exposures: Vec<PathBuf>,
    pub capitals: PathBuf,
    pub probabilities: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub snapshots: Vec<MultiLayerSnapshot>,
    pub probabilities: Option<ProbabilityTable>,
}

impl DatasetBundle {
    pub fn load(&self, recovery_rate: f64) -> Result<Dataset> {
        let ((exposures, capitals), probabilities) = rayon::join(
            || {
                rayon::join(
                    || {
                        let mut out = ExposureData::new();
                        for p in &self.exposures {
                            merge_exposures(p, &mut out)?;
                        }
                        Ok::<_, Error>(out)
                    },
                    || parse_capitals(&self.capitals),
                )
            },
            || {
                self.probabilities
                    .as_ref()
                    .map(|p| parse_probabilities(p, recovery_rate))
                    .transpose()
            },
        );
        Ok(Dataset {
            snapshots: assemble_snapshots(exposures?, &capitals?)?,
            probabilities: probabilities?,
        })
    }
}

/// One snapshot per exposure date. The bank set is every bank with a capital
/// record on or before the date.
pub fn assemble_snapshots(
    exposures: ExposureData,
    capitals: &CapitalTable,
) -> Result<Vec<MultiLayerSnapshot>> {
    exposures
        .into_iter()
        .map(|(date, layers)| {
            let banks = capitals.records_on(date);
            for m in layers.values() {
                if let Some(bank) = m.banks().into_iter().find(|b| !banks.contains_key(b)) {
                    return Err(Error::MissingCapital { bank, date });
                }
            }
            MultiLayerSnapshot::new(date, layers, banks)
        })
        .collect()
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| io_err(path, e))
}

fn finish<W: Write>(path: &Path, w: csv::Writer<W>) -> Result<()> {
    w.into_inner()
        .map_err(|e| io_err(path, e.into_error()))?
        .flush()
        .map_err(|e| io_err(path, e))
}

pub fn write_exposures(path: impl AsRef<Path>, snapshots: &[MultiLayerSnapshot]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["date", "layer", "debtor", "creditor", "amount"])?;
    for s in snapshots {
        for (layer, m) in s.layers() {
            for (d, c, a) in m.iter() {
                w.write_record([
                    s.date().to_string(),
                    layer.to_string(),
                    d.to_string(),
                    c.to_string(),
                    a.to_string(),
                ])?;
            }
        }
    }
    finish(path, w)
}

/// Writes a capital row for each bank at its first snapshot and whenever its
/// record changes.
pub fn write_capitals(path: impl AsRef<Path>, snapshots: &[MultiLayerSnapshot]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["date", "bank", "capital", "total_assets"])?;
    let mut last: BTreeMap<&BankId, (f64, Option<f64>)> = BTreeMap::new();
    for s in snapshots {
        for (id, r) in s.banks() {
            let cur = (r.capital, r.total_noninterbank_assets);
            if last.get(id) != Some(&cur) {
                w.write_record([
                    s.date().to_string(),
                    id.to_string(),
                    r.capital.to_string(),
                    r.total_noninterbank_assets
                        .map(|a| a.to_string())
                        .unwrap_or_default(),
                ])?;
                last.insert(id, cur);
            }
        }
    }
    finish(path, w)
}

pub fn write_probabilities(path: impl AsRef<Path>, rows: &[ProbabilityRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["date", "bank", "pd", "spread"])?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([r.date.to_string(), r.bank.clone(), opt(r.pd), opt(r.spread)])?;
    }
    finish(path, w)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

/// A CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(i64),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<NaiveDate> for Cell {
    fn from(x: NaiveDate) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(x) => format_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

/// A report that can be laid out as one CSV table.
pub trait Tabular {
    fn csv_header(&self) -> Vec<String>;
    fn csv_rows(&self) -> Vec<Vec<Cell>>;
}

/// Rounds to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest decimal for `x` rounded to 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let r = round_sig(x);
    if r != 0.0 && (r.abs() < 1e-6 || r.abs() >= 1e15) {
        let s = format!("{r:e}");
        return s;
    }
    let s = r.to_string();
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn round_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => {
            if let Some(x) = n
                .as_f64()
                .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            {
                *n = x;
            }
        }
        serde_json::Value::Array(xs) => xs.iter_mut().for_each(round_json),
        serde_json::Value::Object(m) => m.values_mut().for_each(round_json),
        _ => {}
    }
}

pub fn render_report<R>(report: &R, format: ReportFormat) -> Result<String>
where
    R: Serialize + Tabular + ?Sized,
{
    match format {
        ReportFormat::Json => {
            let mut v = serde_json::to_value(report)?;
            round_json(&mut v);
            let mut s = serde_json::to_string_pretty(&v)?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(report.csv_header())?;
            for row in report.csv_rows() {
                w.write_record(row.iter().map(Cell::render))?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Error::Internal(e.into_error().to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
        }
    }
}

pub fn write_report<R>(report: &R, format: ReportFormat, path: impl AsRef<Path>) -> Result<()>
where
    R: Serialize + Tabular + ?Sized,
{
    let path = path.as_ref();
    let text = render_report(report, format)?;
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}
