//! On-disk formats.
//!
//! CSV files are comma separated with a header row and LF line endings.
//! Floats are written with 17 significant digits, so reading them back
//! gives the same `f64`.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use credal_core::{CredalSet, Event, FiniteDistribution, OutcomeSpace, RationalDistribution, Tower};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    if !s.contains('/') {
        return None;
    }
    BigRational::from_str(s.trim()).ok()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionJson {
    pub labels: Vec<String>,
    pub probs: Vec<f64>,
}

impl From<&FiniteDistribution> for DistributionJson {
    fn from(d: &FiniteDistribution) -> Self {
        Self { labels: d.space().labels().to_vec(), probs: d.probs().to_vec() }
    }
}

impl DistributionJson {
    pub fn into_distribution(self) -> CliResult<FiniteDistribution> {
        let space = Arc::new(OutcomeSpace::new(self.labels)?);
        Ok(FiniteDistribution::new(space, self.probs)?)
    }
}

/// Exact distribution with `"numerator/denominator"` strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalJson {
    pub labels: Vec<String>,
    pub probs: Vec<String>,
}

impl From<&RationalDistribution> for RationalJson {
    fn from(d: &RationalDistribution) -> Self {
        Self { labels: d.space().labels().to_vec(), probs: d.probs().iter().map(format_rational).collect() }
    }
}

impl RationalJson {
    pub fn into_distribution(self) -> CliResult<RationalDistribution> {
        let probs = self
            .probs
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| CliError::Usage(format!("not a fraction: {s:?}"))))
            .collect::<CliResult<Vec<_>>>()?;
        let space = Arc::new(OutcomeSpace::new(self.labels)?);
        Ok(RationalDistribution::new(space, probs)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalSetJson {
    pub labels: Vec<String>,
    pub members: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member_labels: Option<Vec<String>>,
}

impl From<&CredalSet> for CredalSetJson {
    fn from(c: &CredalSet) -> Self {
        Self {
            labels: c.space().labels().to_vec(),
            members: c.members().iter().map(|m| m.probs().to_vec()).collect(),
            member_labels: c.labels().map(<[String]>::to_vec),
        }
    }
}

impl CredalSetJson {
    pub fn into_credal_set(self) -> CliResult<CredalSet> {
        let space = Arc::new(OutcomeSpace::new(self.labels)?);
        let members = self
            .members
            .into_iter()
            .map(|p| FiniteDistribution::new(space.clone(), p))
            .collect::<Result<Vec<_>, _>>()?;
        let set = CredalSet::new(members)?;
        Ok(match self.member_labels {
            Some(l) => set.with_labels(l)?,
            None => set,
        })
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> CliResult<T> {
    let mut s = String::new();
    std::fs::File::open(path).and_then(|mut f| f.read_to_string(&mut s)).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&s).map_err(|source| CliError::Json { path: path.into(), source })
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// In-memory CSV table; every cell is already formatted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::io("<csv buffer>", e.into_error()))
    }

    pub fn from_reader<R: Read>(r: R) -> CliResult<Self> {
        let mut rdr = csv::ReaderBuilder::new().from_reader(r);
        let header = rdr.headers()?.iter().map(String::from).collect();
        let rows = rdr.records().map(|r| r.map(|r| r.iter().map(String::from).collect())).collect::<Result<_, _>>()?;
        Ok(Self { header, rows })
    }

    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| f64::from_str(&r[idx]).ok()).collect()
    }
}

/// Two-column `(param, value)` plot table.
pub fn xy_table(x_name: &str, y_name: &str, points: &[(f64, f64)]) -> Table {
    let mut t = Table::new([x_name, y_name]);
    for &(x, y) in points {
        t.push(vec![format_float(x), format_float(y)]);
    }
    t
}

/// Distribution as `label,probability` rows.
pub fn distribution_table(d: &FiniteDistribution) -> Table {
    let mut t = Table::new(["label", "probability"]);
    for (l, p) in d.space().labels().iter().zip(d.probs()) {
        t.push(vec![l.clone(), format_float(*p)]);
    }
    t
}

pub fn distribution_from_table(t: &Table) -> CliResult<FiniteDistribution> {
    if t.header != ["label", "probability"] {
        return Err(CliError::Usage(format!("unexpected header {:?}", t.header)));
    }
    let labels: Vec<String> = t.rows.iter().map(|r| r[0].clone()).collect();
    let probs = t.column_f64("probability").ok_or_else(|| CliError::Usage("unparsable probability".into()))?;
    DistributionJson { labels, probs }.into_distribution()
}

const ORDER_NAMES: [&str; 10] =
    ["first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth"];

pub fn order_column_name(order: usize) -> String {
    match ORDER_NAMES.get(order.wrapping_sub(1)) {
        Some(n) => format!("{n}order"),
        None => format!("order{order}"),
    }
}

/// Wide table: one column of sorted implied probabilities per order,
/// indexed by `functionidx`. Shorter columns are padded with empty cells.
pub fn order_columns(columns: &[Vec<f64>]) -> Table {
    let mut header = vec!["functionidx".to_string()];
    header.extend((1..=columns.len()).map(order_column_name));
    let mut t = Table::new(header);
    let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
    for i in 0..rows {
        let mut row = vec![i.to_string()];
        row.extend(columns.iter().map(|c| c.get(i).map(|v| format_float(*v)).unwrap_or_default()));
        t.push(row);
    }
    t
}

/// Long table with columns `order,particle_index,value`.
pub fn long_table(columns: &[Vec<f64>]) -> Table {
    let mut t = Table::new(["order", "particle_index", "value"]);
    for (o, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            t.push(vec![(o + 1).to_string(), i.to_string(), format_float(*v)]);
        }
    }
    t
}

/// One JSON object per line. Level-1 lines carry the parameter point and
/// probability vector; higher levels carry weights over the level below.
pub fn write_tower_jsonl<W: Write>(t: &Tower, mut w: W) -> std::io::Result<()> {
    let mut line = String::new();
    let floats = |out: &mut String, xs: &[f64]| {
        out.push('[');
        for (i, x) in xs.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&serde_json::to_string(x).expect("finite"));
        }
        out.push(']');
    };
    for k in 0..t.level_len(1) {
        line.clear();
        write!(line, "{{\"level\":1,\"index\":{k},\"point\":").unwrap();
        floats(&mut line, t.base_point(k));
        line.push_str(",\"probs\":");
        floats(&mut line, t.base_probs(k));
        line.push_str("}\n");
        w.write_all(line.as_bytes())?;
    }
    for order in 2..=t.max_order() {
        for j in 0..t.level_len(order) {
            line.clear();
            write!(line, "{{\"level\":{order},\"index\":{j},\"weights\":").unwrap();
            floats(&mut line, t.weights(order, j));
            line.push_str("}\n");
            w.write_all(line.as_bytes())?;
        }
    }
    Ok(())
}

/// Parses a comma-separated list of outcome labels into an event.
pub fn event_from_labels(space: &OutcomeSpace, list: &str) -> CliResult<Event> {
    let idx = list
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| space.index_of(s.trim()).ok_or_else(|| CliError::Usage(format!("unknown outcome {s:?}"))))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Event::new(space.len(), idx)?)
}
