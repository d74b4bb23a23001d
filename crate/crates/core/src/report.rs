//! Report tables: construction from results, CSV and markdown rendering,
//! and a reader for the CSV form.
//!
//! A CSV table is a run of `# ` metadata lines, a header whose first cell
//! labels the row names, and one row per label with numeric cells (empty
//! cell = not applicable).

use std::io::Read;

use nalgebra::DMatrix;

use crate::cca::{EigenRow, RedundancyRow, WilksRow};
use crate::error::{Error, Result};
use crate::factor_model::DiagnosticReport;
use crate::panel::AlignedPanel;
use crate::regress::RegressionFit;
use crate::stattests::{AdfResult, JohansenResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub caption: String,
    pub metadata: Vec<String>,
    pub label_header: String,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
    /// Decimal places used in the markdown rendering.
    pub decimals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub values: Vec<Option<f64>>,
    /// Rendered without a label in markdown (t-statistic rows).
    pub secondary: bool,
}

impl TableRow {
    pub fn new(label: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        Self { label: label.into(), values, secondary: false }
    }
}

const CSV_DECIMALS: usize = 8;

fn fmt_num(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    // Avoid "-0.00" style noise.
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

impl Table {
    pub fn new(caption: impl Into<String>, label_header: impl Into<String>, columns: Vec<String>) -> Self {
        Self {
            caption: caption.into(),
            metadata: Vec::new(),
            label_header: label_header.into(),
            columns,
            rows: Vec::new(),
            decimals: 3,
        }
    }

    /// Puts `metadata` ahead of any lines already present.
    pub fn with_metadata(mut self, metadata: &[String]) -> Self {
        self.metadata.splice(0..0, metadata.iter().cloned());
        self
    }

    pub fn with_decimals(mut self, decimals: usize) -> Self {
        self.decimals = decimals;
        self
    }

    pub fn push(&mut self, row: TableRow) {
        debug_assert_eq!(row.values.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {}\n", self.caption));
        for m in &self.metadata {
            out.push_str(&format!("# {m}\n"));
        }
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec![self.label_header.clone()];
        header.extend(self.columns.iter().cloned());
        wtr.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut rec = vec![row.label.clone()];
            rec.extend(row.values.iter().map(|v| v.map_or_else(String::new, |x| fmt_num(x, CSV_DECIMALS))));
            wtr.write_record(&rec).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf8"));
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("**{}**\n\n", self.caption);
        for m in &self.metadata {
            out.push_str(&format!("_{m}_  \n"));
        }
        if !self.metadata.is_empty() {
            out.push('\n');
        }
        out.push_str(&format!("| {} | {} |\n", self.label_header, self.columns.join(" | ")));
        out.push_str(&format!("|---|{}\n", "---:|".repeat(self.columns.len())));
        for row in &self.rows {
            let label = if row.secondary { "" } else { row.label.as_str() };
            let cells: Vec<String> =
                row.values.iter().map(|v| v.map_or_else(String::new, |x| fmt_num(x, self.decimals))).collect();
            out.push_str(&format!("| {} | {} |\n", label, cells.join(" | ")));
        }
        out
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn value(&self, label: &str, column: &str) -> Option<f64> {
        let j = self.column_index(column)?;
        self.rows.iter().find(|r| r.label == label)?.values[j]
    }
}

/// Parses the CSV form written by [`Table::to_csv`]. The first `#` line
/// becomes the caption, later ones metadata.
pub fn read_table_csv<R: Read>(mut rdr: R) -> Result<Table> {
    let mut text = String::new();
    rdr.read_to_string(&mut text)?;
    let mut comments = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        if let Some(c) = line.strip_prefix('#') {
            comments.push(c.trim().to_string());
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let mut csv_rdr = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let headers = csv_rdr.headers()?.clone();
    let mut cols = headers.iter();
    let label_header = cols
        .next()
        .ok_or_else(|| Error::Parse { location: "header".into(), message: "empty header".into() })?
        .to_string();
    let columns: Vec<String> = cols.map(String::from).collect();
    let mut rows = Vec::new();
    for rec in csv_rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let label = rec.get(0).unwrap_or_default().to_string();
        let values = rec
            .iter()
            .skip(1)
            .map(|cell| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                        location: format!("line {line}"),
                        message: format!("non-numeric cell `{cell}`"),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(TableRow { label, values, secondary: false });
    }
    let mut comments = comments.into_iter();
    Ok(Table {
        caption: comments.next().unwrap_or_default(),
        metadata: comments.collect(),
        label_header,
        columns,
        rows,
        decimals: 3,
    })
}

/// Min, max, mean and standard deviation of each panel column over its
/// observed values.
pub fn summary_table(caption: &str, panel: &AlignedPanel) -> Table {
    let mut t = Table::new(caption, "series", vec!["min".into(), "max".into(), "mean".into(), "sd".into()])
        .with_decimals(2);
    for (j, key) in panel.columns().iter().enumerate() {
        let vals: Vec<f64> = panel.column(j).iter().flatten().copied().collect();
        let n = vals.len() as f64;
        let row = if vals.is_empty() {
            vec![None; 4]
        } else {
            let mean = vals.iter().sum::<f64>() / n;
            let sd = if vals.len() > 1 {
                Some((vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
            } else {
                None
            };
            vec![
                Some(vals.iter().copied().fold(f64::INFINITY, f64::min)),
                Some(vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                Some(mean),
                sd,
            ]
        };
        t.push(TableRow::new(key.name.clone(), row));
    }
    t
}

pub fn matrix_table(caption: &str, label_header: &str, row_names: &[String], col_names: &[String], m: &DMatrix<f64>) -> Table {
    let mut t = Table::new(caption, label_header, col_names.to_vec()).with_decimals(2);
    for (i, name) in row_names.iter().enumerate() {
        t.push(TableRow::new(name.clone(), m.row(i).iter().map(|&v| Some(v)).collect()));
    }
    t
}

pub fn adf_table(caption: &str, results: &[(String, AdfResult)]) -> Table {
    let mut t = Table::new(
        caption,
        "series",
        vec!["statistic".into(), "p_value".into(), "lag_order".into(), "n_obs".into()],
    )
    .with_decimals(2);
    for (name, r) in results {
        t.push(TableRow::new(
            name.clone(),
            vec![Some(r.statistic), Some(r.p_value), Some(r.lag_order as f64), Some(r.n_obs as f64)],
        ));
    }
    t
}

pub fn johansen_table(caption: &str, result: &JohansenResult) -> Table {
    let mut t = Table::new(
        caption,
        "hypothesis",
        vec!["statistic".into(), "critical_value_5pct".into(), "rejected".into()],
    )
    .with_decimals(2);
    for i in 0..result.hypotheses.len() {
        t.push(TableRow::new(
            result.label(i),
            vec![
                Some(result.trace_statistics[i]),
                Some(result.critical_values_5pct[i]),
                Some(if result.rejected[i] { 1.0 } else { 0.0 }),
            ],
        ));
    }
    t
}

/// Coefficient row over t-statistic row per fit, with an adjusted R²
/// column. Columns are the union of predictor names in first-seen order;
/// predictors a fit does not use stay empty.
pub fn fit_table(caption: &str, fits: &[RegressionFit]) -> Table {
    let mut predictors: Vec<String> = Vec::new();
    for f in fits {
        for p in &f.predictor_names {
            if !predictors.contains(p) {
                predictors.push(p.clone());
            }
        }
    }
    let mut columns = predictors.clone();
    columns.push("adj_r_squared".into());
    let mut t = Table::new(caption, "response", columns);
    for f in fits {
        let mut coef = vec![None; predictors.len() + 1];
        let mut tstat = vec![None; predictors.len() + 1];
        for (i, p) in f.predictor_names.iter().enumerate() {
            let j = predictors.iter().position(|x| x == p).unwrap();
            coef[j] = Some(f.coefficients[i]);
            tstat[j] = Some(f.t_statistics[i]);
        }
        coef[predictors.len()] = Some(f.adj_r_squared);
        t.push(TableRow::new(f.response_name.clone(), coef));
        t.push(TableRow { label: format!("{} (t)", f.response_name), values: tstat, secondary: true });
    }
    t
}

pub fn eigen_rows_table(caption: &str, rows: &[EigenRow]) -> Table {
    let mut t = Table::new(
        caption,
        "variate",
        vec!["cancor".into(), "cancor_sq".into(), "eigenvalue".into(), "percentage".into(), "cumulative".into()],
    )
    .with_decimals(5);
    for r in rows {
        t.push(TableRow::new(
            r.index.to_string(),
            vec![Some(r.correlation), Some(r.squared), Some(r.eigenvalue), Some(r.percentage), Some(r.cumulative)],
        ));
    }
    t
}

pub fn wilks_rows_table(caption: &str, rows: &[WilksRow]) -> Table {
    let mut t = Table::new(
        caption,
        "variate",
        vec![
            "cancor".into(),
            "lr_stat".into(),
            "approx_f".into(),
            "num_df".into(),
            "den_df".into(),
            "p_value".into(),
        ],
    )
    .with_decimals(4);
    for r in rows {
        t.push(TableRow::new(
            r.k.to_string(),
            vec![Some(r.correlation), Some(r.lambda), Some(r.f_approx), Some(r.num_df), Some(r.den_df), Some(r.p_value)],
        ));
    }
    t
}

pub fn redundancy_rows_table(caption: &str, rows: &[RedundancyRow]) -> Table {
    let cols = rows.iter().map(|r| r.index.to_string()).collect();
    let mut t = Table::new(caption, "y_variate", cols).with_decimals(2);
    t.push(TableRow::new("redundancy", rows.iter().map(|r| Some(r.redundancy)).collect()));
    t
}

pub fn diagnostic_table(caption: &str, report: &DiagnosticReport) -> Table {
    let mut t = Table::new(
        caption,
        "response",
        vec!["adj_r2_before".into(), "adj_r2_after".into(), "delta".into()],
    );
    for r in &report.responses {
        t.push(TableRow::new(
            r.response_name.clone(),
            vec![Some(r.adj_r2_before), Some(r.adj_r2_after), Some(r.delta)],
        ));
    }
    t.push(TableRow::new("mean", vec![None, None, Some(report.mean_delta)]));
    t.metadata.push(format!(
        "verdict: {}; pc1_variance_share: {:.6}; thresholds: strong={} weak={}",
        report.verdict, report.pc1_variance_share, report.thresholds.strong, report.thresholds.weak
    ));
    t
}
