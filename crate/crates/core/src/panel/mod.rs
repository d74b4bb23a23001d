//! Panel data model and the deterministic transforms that build it: loan
//! aggregation, spread construction, differencing, quarterly interpolation
//! and alignment of heterogeneous series onto one monthly grid.
//!
//! Missing observations are carried as `None`. Statistical modules only
//! accept complete panels (see [`AlignedPanel::to_matrix`]).

mod io;
mod month;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{read_loans_csv, read_panel_csv, read_yields_csv, write_panel_csv};
pub use month::Month;

/// Credit grade of a loan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Grade {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Grade {
    pub const ALL: [Grade; 6] = [Grade::A, Grade::B, Grade::C, Grade::D, Grade::E, Grade::F];

    pub fn letter(self) -> char {
        match self {
            Grade::A => 'A',
            Grade::B => 'B',
            Grade::C => 'C',
            Grade::D => 'D',
            Grade::E => 'E',
            Grade::F => 'F',
        }
    }
}

impl FromStr for Grade {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" => Ok(Grade::A),
            "B" => Ok(Grade::B),
            "C" => Ok(Grade::C),
            "D" => Ok(Grade::D),
            "E" => Ok(Grade::E),
            "F" => Ok(Grade::F),
            other => Err(Error::InvalidRecord(format!("grade `{other}` not in A-F"))),
        }
    }
}

/// Loan maturity in months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    M36,
    M60,
}

impl Term {
    pub const ALL: [Term; 2] = [Term::M36, Term::M60];

    pub fn months(self) -> u32 {
        match self {
            Term::M36 => 36,
            Term::M60 => 60,
        }
    }

    pub fn from_months(months: u32) -> Result<Self> {
        match months {
            36 => Ok(Term::M36),
            60 => Ok(Term::M60),
            other => Err(Error::InvalidRecord(format!("term {other} not in {{36, 60}}"))),
        }
    }
}

/// One originated loan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoanRecord {
    pub origination_month: Month,
    /// Percent per annum.
    pub rate: f64,
    pub grade: Grade,
    pub term: Term,
}

impl LoanRecord {
    pub fn new(origination_month: Month, rate: f64, grade: Grade, term: Term) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidRecord(format!("rate {rate} must be positive")));
        }
        Ok(Self { origination_month, rate, grade, term })
    }
}

/// Government bond yield for one month and maturity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldCurvePoint {
    pub month: Month,
    pub maturity_months: u32,
    /// Percent per annum.
    pub yield_pct: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    /// Aggregated loan rates, before the risk-free yield is subtracted.
    Rate,
    SpreadLevel,
    SpreadDiff,
    Macro,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeriesKey {
    pub name: String,
    pub kind: SeriesKind,
}

impl SeriesKey {
    pub fn new(name: impl Into<String>, kind: SeriesKind) -> Self {
        Self { name: name.into(), kind }
    }

    /// Parses the `<term>-<grade>` naming scheme used for loan series,
    /// e.g. `36-A`.
    pub fn term_grade(&self) -> Option<(Term, Grade)> {
        parse_term_grade(&self.name)
    }
}

pub fn series_name(term: Term, grade: Grade) -> String {
    format!("{}-{}", term.months(), grade.letter())
}

pub fn parse_term_grade(name: &str) -> Option<(Term, Grade)> {
    let (term, grade) = name.split_once('-')?;
    let term = Term::from_months(term.parse().ok()?).ok()?;
    let grade = grade.parse().ok()?;
    Some((term, grade))
}

/// Named series on a shared, strictly increasing monthly index.
///
/// The index is usually a contiguous grid; `align` with the intersect
/// policy may drop interior months, which [`AlignedPanel::is_contiguous`]
/// reports.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPanel {
    months: Vec<Month>,
    columns: Vec<SeriesKey>,
    values: Vec<Vec<Option<f64>>>,
}

impl AlignedPanel {
    pub fn new(months: Vec<Month>, columns: Vec<SeriesKey>, values: Vec<Vec<Option<f64>>>) -> Result<Self> {
        if months.is_empty() {
            return Err(Error::InsufficientObservations("panel has no rows".into()));
        }
        if months.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NonMonotone("panel months".into()));
        }
        if columns.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} column keys but {} value columns",
                columns.len(),
                values.len()
            )));
        }
        let mut seen = HashSet::new();
        for (key, col) in columns.iter().zip(&values) {
            if !seen.insert(key.name.as_str()) {
                return Err(Error::DuplicateSeries(key.name.clone()));
            }
            if col.len() != months.len() {
                return Err(Error::DimensionMismatch(format!(
                    "column `{}` has {} values for {} months",
                    key.name,
                    col.len(),
                    months.len()
                )));
            }
            if col.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("column `{}` has non-finite values", key.name)));
            }
        }
        Ok(Self { months, columns, values })
    }

    /// Builds a complete panel on a contiguous grid starting at `start`.
    pub fn from_matrix(start: Month, columns: Vec<SeriesKey>, data: &DMatrix<f64>) -> Result<Self> {
        let months = (0..data.nrows()).map(|t| start.offset(t as i64)).collect();
        let values = data
            .column_iter()
            .map(|c| c.iter().map(|&v| Some(v)).collect())
            .collect();
        Self::new(months, columns, values)
    }

    pub fn months(&self) -> &[Month] {
        &self.months
    }

    pub fn start_month(&self) -> Month {
        self.months[0]
    }

    pub fn n_rows(&self) -> usize {
        self.months.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[SeriesKey] {
        &self.columns
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column(&self, j: usize) -> &[Option<f64>] {
        &self.values[j]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn is_contiguous(&self) -> bool {
        self.months.windows(2).all(|w| w[0].succ() == w[1])
    }

    pub fn is_column_complete(&self, j: usize) -> bool {
        self.values[j].iter().all(Option::is_some)
    }

    pub fn is_complete(&self) -> bool {
        (0..self.n_cols()).all(|j| self.is_column_complete(j))
    }

    /// Dense `T×n` matrix; fails on the first column with a missing entry.
    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        for (j, key) in self.columns.iter().enumerate() {
            if !self.is_column_complete(j) {
                return Err(Error::MissingValues(key.name.clone()));
            }
        }
        Ok(DMatrix::from_fn(self.n_rows(), self.n_cols(), |t, j| self.values[j][t].unwrap()))
    }

    /// Sub-panel with the named columns, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Self> {
        let mut columns = Vec::with_capacity(names.len());
        let mut values = Vec::with_capacity(names.len());
        for name in names {
            let j = self
                .column_index(name)
                .ok_or_else(|| Error::InvalidArgument(format!("no column named `{name}`")))?;
            columns.push(self.columns[j].clone());
            values.push(self.values[j].clone());
        }
        Self::new(self.months.clone(), columns, values)
    }

    /// Restricts the panel to rows where every column is observed.
    pub fn complete_rows(&self) -> Result<Self> {
        align(std::slice::from_ref(self), AlignPolicy::Intersect)
    }

    /// The observed values of one column between its first and last
    /// non-missing entries; fails if there is a gap inside that span.
    pub fn observed_span(&self, j: usize) -> Result<(Month, Vec<f64>)> {
        let col = &self.values[j];
        let name = &self.columns[j].name;
        let first = col.iter().position(Option::is_some);
        let last = col.iter().rposition(Option::is_some);
        let (Some(first), Some(last)) = (first, last) else {
            return Err(Error::TooFewValues { column: name.clone(), needed: 1 });
        };
        let mut out = Vec::with_capacity(last - first + 1);
        for t in first..=last {
            if t > first && self.months[t - 1].succ() != self.months[t] {
                return Err(Error::MissingValues(name.clone()));
            }
            out.push(col[t].ok_or_else(|| Error::MissingValues(name.clone()))?);
        }
        Ok((self.months[first], out))
    }

    fn with_kind(mut self, from: SeriesKind, to: SeriesKind) -> Self {
        for c in &mut self.columns {
            if c.kind == from {
                c.kind = to;
            }
        }
        self
    }
}

impl fmt::Display for AlignedPanel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "panel {}..{} ({} rows, {} columns)",
            self.months[0],
            self.months[self.months.len() - 1],
            self.n_rows(),
            self.n_cols()
        )
    }
}

/// Averages loan rates into the twelve `<term>-<grade>` series on the
/// monthly grid spanning all records. Buckets without loans are missing.
///
/// Rates within a bucket are summed in ascending order so the result does
/// not depend on record order.
pub fn aggregate_loans(records: &[LoanRecord]) -> Result<AlignedPanel> {
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    let first = records.iter().map(|r| r.origination_month).min().unwrap();
    let last = records.iter().map(|r| r.origination_month).max().unwrap();
    let n_rows = first.months_until(last) as usize + 1;

    let mut buckets: HashMap<(Term, Grade, Month), Vec<f64>> = HashMap::new();
    for r in records {
        buckets.entry((r.term, r.grade, r.origination_month)).or_default().push(r.rate);
    }

    let mut columns = Vec::with_capacity(12);
    let mut values = Vec::with_capacity(12);
    for term in Term::ALL {
        for grade in Grade::ALL {
            columns.push(SeriesKey::new(series_name(term, grade), SeriesKind::Rate));
            let col = (0..n_rows)
                .map(|t| {
                    let month = first.offset(t as i64);
                    buckets.get_mut(&(term, grade, month)).map(|rates| {
                        rates.sort_by(f64::total_cmp);
                        rates.iter().sum::<f64>() / rates.len() as f64
                    })
                })
                .collect();
            values.push(col);
        }
    }
    let months = (0..n_rows).map(|t| first.offset(t as i64)).collect();
    AlignedPanel::new(months, columns, values)
}

/// Subtracts the government yield of matching maturity from each observed
/// rate. Column maturities come from the `<term>-<grade>` names.
pub fn to_spreads(panel: &AlignedPanel, curve: &[YieldCurvePoint]) -> Result<AlignedPanel> {
    let mut lookup: HashMap<(Month, u32), f64> = HashMap::with_capacity(curve.len());
    for p in curve {
        if !p.yield_pct.is_finite() {
            return Err(Error::InvalidRecord(format!("non-finite yield at {} ({} months)", p.month, p.maturity_months)));
        }
        if let Some(prev) = lookup.insert((p.month, p.maturity_months), p.yield_pct) {
            if prev != p.yield_pct {
                return Err(Error::InvalidRecord(format!(
                    "conflicting yields at {} ({} months)",
                    p.month, p.maturity_months
                )));
            }
        }
    }
    let mut values = Vec::with_capacity(panel.n_cols());
    for (j, key) in panel.columns.iter().enumerate() {
        let (term, _) = key.term_grade().ok_or_else(|| {
            Error::InvalidArgument(format!("cannot infer maturity from column name `{}`", key.name))
        })?;
        let maturity = term.months();
        let col = panel.values[j]
            .iter()
            .zip(&panel.months)
            .map(|(v, &month)| match v {
                None => Ok(None),
                Some(rate) => lookup
                    .get(&(month, maturity))
                    .map(|y| Some(rate - y))
                    .ok_or(Error::MissingCurvePoint { month, maturity }),
            })
            .collect::<Result<Vec<_>>>()?;
        values.push(col);
    }
    let columns = panel
        .columns
        .iter()
        .map(|c| SeriesKey::new(c.name.clone(), SeriesKind::SpreadLevel))
        .collect();
    AlignedPanel::new(panel.months.clone(), columns, values)
}

/// `Δx[t] = x[t] − x[t−1]`, missing wherever either side is missing.
pub fn first_difference(panel: &AlignedPanel) -> Result<AlignedPanel> {
    if !panel.is_contiguous() {
        return Err(Error::InvalidArgument("first differences need a contiguous monthly grid".into()));
    }
    let mut values = Vec::with_capacity(panel.n_cols());
    for (j, key) in panel.columns.iter().enumerate() {
        let col: Vec<Option<f64>> = panel.values[j]
            .windows(2)
            .map(|w| match (w[0], w[1]) {
                (Some(a), Some(b)) => Some(b - a),
                _ => None,
            })
            .collect();
        if col.iter().all(Option::is_none) {
            return Err(Error::TooFewValues { column: key.name.clone(), needed: 2 });
        }
        values.push(col);
    }
    let out = AlignedPanel::new(panel.months[1..].to_vec(), panel.columns.clone(), values)?;
    Ok(out.with_kind(SeriesKind::SpreadLevel, SeriesKind::SpreadDiff))
}

/// A regularly spaced monthly series.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlySeries {
    pub start: Month,
    pub values: Vec<f64>,
}

impl MonthlySeries {
    pub fn get(&self, month: Month) -> Option<f64> {
        let t = self.start.months_until(month);
        (t >= 0).then(|| self.values.get(t as usize).copied()).flatten()
    }
}

/// Linear interpolation between quarterly anchor observations. Anchor
/// months keep their values; nothing is extrapolated past the last anchor.
pub fn interpolate_quarterly(points: &[(Month, f64)]) -> Result<MonthlySeries> {
    if points.len() < 2 {
        return Err(Error::TooFewValues { column: "quarterly series".into(), needed: 2 });
    }
    for w in points.windows(2) {
        if w[0].0 >= w[1].0 {
            return Err(Error::NonMonotone(format!("{} is not after {}", w[1].0, w[0].0)));
        }
    }
    if let Some((m, _)) = points.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite value at {m}")));
    }
    let start = points[0].0;
    let mut values = vec![points[0].1];
    for w in points.windows(2) {
        let ((m0, v0), (m1, v1)) = (w[0], w[1]);
        let gap = m0.months_until(m1);
        for step in 1..gap {
            let frac = step as f64 / gap as f64;
            values.push(v0 + (v1 - v0) * frac);
        }
        values.push(v1);
    }
    Ok(MonthlySeries { start, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignPolicy {
    /// Keep only months where every column is observed.
    Intersect,
    /// Keep the full contiguous span, marking gaps as missing.
    Union,
}

impl FromStr for AlignPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intersect" => Ok(AlignPolicy::Intersect),
            "union" => Ok(AlignPolicy::Union),
            other => Err(Error::InvalidArgument(format!("unknown alignment policy `{other}`"))),
        }
    }
}

/// Places all columns of all panels on one monthly index.
pub fn align(panels: &[AlignedPanel], policy: AlignPolicy) -> Result<AlignedPanel> {
    if panels.is_empty() {
        return Err(Error::InvalidArgument("nothing to align".into()));
    }
    let first = panels.iter().map(|p| p.months[0]).min().unwrap();
    let last = panels.iter().map(|p| *p.months.last().unwrap()).max().unwrap();
    let span: Vec<Month> = (0..=first.months_until(last)).map(|t| first.offset(t)).collect();

    let mut columns = Vec::new();
    let mut values: Vec<Vec<Option<f64>>> = Vec::new();
    for panel in panels {
        let index: BTreeMap<Month, usize> = panel.months.iter().enumerate().map(|(t, &m)| (m, t)).collect();
        for (j, key) in panel.columns.iter().enumerate() {
            columns.push(key.clone());
            values.push(span.iter().map(|m| index.get(m).and_then(|&t| panel.values[j][t])).collect());
        }
    }

    match policy {
        AlignPolicy::Union => AlignedPanel::new(span, columns, values),
        AlignPolicy::Intersect => {
            let keep: BTreeSet<usize> =
                (0..span.len()).filter(|&t| values.iter().all(|c| c[t].is_some())).collect();
            if keep.is_empty() {
                return Err(Error::EmptyOverlap);
            }
            let months = keep.iter().map(|&t| span[t]).collect();
            let values = values.into_iter().map(|c| keep.iter().map(|&t| c[t]).collect()).collect();
            AlignedPanel::new(months, columns, values)
        }
    }
}
