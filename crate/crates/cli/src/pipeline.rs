//! Analysis sections shared by the subcommands and `analyze`.

use std::fs::File;
use std::path::Path;

use ccafactor::cca::{cca_fit, cross_loadings, eigen_table, redundancy, wilks_lambda, CcaSolution};
use ccafactor::factor_model::{missing_factor_diagnostic, DiagnosticReport, FactorScores};
use ccafactor::linalg::correlation;
use ccafactor::panel::{
    aggregate_loans, align, first_difference, parse_term_grade, read_loans_csv, read_panel_csv, read_yields_csv,
    to_spreads, AlignedPanel, Grade, Month, SeriesKey, SeriesKind, Term,
};
use ccafactor::regress::{ols, stepwise_aic, Design, RegressionFit};
use ccafactor::report::{
    adf_table, diagnostic_table, eigen_rows_table, fit_table, johansen_table, matrix_table, redundancy_rows_table,
    summary_table, wilks_rows_table, Table, TableRow,
};
use ccafactor::stattests::{adf_test, johansen_trace, MAX_SERIES};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::config::{align_name, PipelineConfig, Stacking, Transform};
use crate::error::{CliError, Context};

/// Named output tables plus free-form files, in emission order.
#[derive(Debug, Default)]
pub struct Bundle {
    pub tables: Vec<(String, Table)>,
    pub files: Vec<(String, String)>,
    pub verdicts: Vec<String>,
    pub skipped: Vec<(String, CliError)>,
}

impl Bundle {
    pub fn push(&mut self, stem: impl Into<String>, table: Table) {
        self.tables.push((stem.into(), table));
    }
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Data(format!("cannot open `{}`: {e}", path.display())))
}

pub fn read_panel(path: &Path, kind: SeriesKind) -> Result<AlignedPanel, CliError> {
    read_panel_csv(open(path)?, kind).ctx("panel")
}

/// Aggregated loan rates, converted to spreads when a curve is given.
pub fn build_panel(loans: &Path, yields: Option<&Path>) -> Result<AlignedPanel, CliError> {
    let records = read_loans_csv(open(loans)?).ctx("panel")?;
    let rates = aggregate_loans(&records).ctx("panel")?;
    match yields {
        Some(y) => to_spreads(&rates, &read_yields_csv(open(y)?).ctx("panel")?).ctx("panel"),
        None => Ok(rates),
    }
}

fn drop_empty_columns(panel: AlignedPanel) -> Result<AlignedPanel, CliError> {
    let keep: Vec<String> = (0..panel.n_cols())
        .filter(|&j| panel.column(j).iter().any(Option::is_some))
        .map(|j| panel.columns()[j].name.clone())
        .collect();
    if keep.is_empty() {
        return Err(CliError::Data("spread panel has no observations".into()));
    }
    let names: Vec<&str> = keep.iter().map(String::as_str).collect();
    panel.select(&names).ctx("panel")
}

/// Spread levels from `spreads` or from `loans` + `yields`, with
/// never-observed series removed.
pub fn load_levels(cfg: &PipelineConfig) -> Result<AlignedPanel, CliError> {
    let panel = if let Some(p) = &cfg.spreads {
        read_panel(p, SeriesKind::SpreadLevel)?
    } else if let (Some(l), Some(y)) = (&cfg.loans, &cfg.yields) {
        build_panel(l, Some(y))?
    } else {
        return Err(CliError::Usage("provide --spreads, or --loans together with --yields".into()));
    };
    drop_empty_columns(panel)
}

pub fn load_macro(cfg: &PipelineConfig) -> Result<Option<AlignedPanel>, CliError> {
    cfg.macro_panel.as_deref().map(|p| read_panel(p, SeriesKind::Macro)).transpose()
}

pub fn apply_transform(levels: &AlignedPanel, transform: Transform) -> Result<AlignedPanel, CliError> {
    match transform {
        Transform::Levels => Ok(levels.clone()),
        Transform::Diff => first_difference(levels).ctx("panel"),
    }
}

/// Responses and predictors on one complete monthly index.
#[derive(Debug, Clone)]
pub struct RegressionData {
    pub months: Vec<Month>,
    pub y: DMatrix<f64>,
    pub y_names: Vec<String>,
    pub x: DMatrix<f64>,
    pub x_names: Vec<String>,
}

pub fn regression_data(
    responses: &AlignedPanel,
    predictors: &AlignedPanel,
    cfg: &PipelineConfig,
) -> Result<RegressionData, CliError> {
    let aligned = align(&[responses.clone(), predictors.clone()], cfg.align.into()).ctx("panel")?;
    let m = aligned.to_matrix().ctx("panel")?;
    let ny = responses.n_cols();
    let names = aligned.names();
    Ok(RegressionData {
        months: aligned.months().to_vec(),
        y: m.columns(0, ny).into_owned(),
        y_names: names[..ny].to_vec(),
        x: m.columns(ny, m.ncols() - ny).into_owned(),
        x_names: names[ny..].to_vec(),
    })
}

/// A regression panel: responses built by stacking one or more series.
#[derive(Debug, Clone)]
pub struct ResponseGroup {
    pub label: &'static str,
    pub caption: &'static str,
    pub responses: Vec<(String, Vec<usize>)>,
}

pub fn response_groups(names: &[String], stacking: Stacking) -> Vec<ResponseGroup> {
    let parsed: Option<Vec<(Term, Grade)>> = names.iter().map(|n| parse_term_grade(n)).collect();
    match (stacking, parsed) {
        (Stacking::Pooled, Some(tg)) => {
            let by_grade = Grade::ALL
                .iter()
                .filter_map(|&g| {
                    let cols: Vec<usize> = Term::ALL
                        .iter()
                        .filter_map(|&t| tg.iter().position(|&x| x == (t, g)))
                        .collect();
                    (!cols.is_empty()).then(|| (g.letter().to_string(), cols))
                })
                .collect();
            let by_term = Term::ALL
                .iter()
                .filter_map(|&t| {
                    let cols: Vec<usize> = Grade::ALL
                        .iter()
                        .filter_map(|&g| tg.iter().position(|&x| x == (t, g)))
                        .collect();
                    (!cols.is_empty()).then(|| (format!("{}-m", t.months()), cols))
                })
                .collect();
            vec![
                ResponseGroup { label: "grade", caption: "across loan grade types", responses: by_grade },
                ResponseGroup { label: "term", caption: "across loan term types", responses: by_term },
            ]
        }
        _ => vec![ResponseGroup {
            label: "series",
            caption: "per series",
            responses: names.iter().enumerate().map(|(j, n)| (n.clone(), vec![j])).collect(),
        }],
    }
}

fn stack_columns(m: &DMatrix<f64>, cols: &[usize]) -> DVector<f64> {
    let t = m.nrows();
    DVector::from_fn(t * cols.len(), |i, _| m[(i % t, cols[i / t])])
}

fn stack_rows(m: &DMatrix<f64>, times: usize) -> DMatrix<f64> {
    let t = m.nrows();
    DMatrix::from_fn(t * times, m.ncols(), |i, j| m[(i % t, j)])
}

fn fits_for_group(
    group: &ResponseGroup,
    y: &DMatrix<f64>,
    x: &DMatrix<f64>,
    x_names: &[String],
    stepwise: bool,
) -> Result<(Vec<RegressionFit>, Vec<Design>), CliError> {
    group
        .responses
        .par_iter()
        .map(|(name, cols)| {
            let yy = stack_columns(y, cols);
            let design = Design::new(stack_rows(x, cols.len()), x_names.to_vec(), true).ctx("regress")?;
            if stepwise {
                let (fit, _) = stepwise_aic(name, &yy, &design).ctx("regress")?;
                let kept: Vec<usize> = fit
                    .predictor_names
                    .iter()
                    .filter_map(|p| x_names.iter().position(|n| n == p))
                    .collect();
                Ok((fit, design.subset(&kept)))
            } else {
                Ok((ols(name, &yy, &design).ctx("regress")?, design))
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map(|v| v.into_iter().unzip())
}

/// Runs sections, recording failures instead of aborting unless strict.
pub struct Runner<'a> {
    pub cfg: &'a PipelineConfig,
    pub bundle: Bundle,
    strict: bool,
}

impl<'a> Runner<'a> {
    pub fn new(cfg: &'a PipelineConfig, strict: bool) -> Self {
        Self { cfg, bundle: Bundle::default(), strict }
    }

    pub fn run(
        &mut self,
        name: &str,
        f: impl FnOnce(&PipelineConfig, &mut Bundle) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        match f(self.cfg, &mut self.bundle) {
            Ok(()) => Ok(()),
            Err(e) if !self.strict => {
                eprintln!("warning: section `{name}` skipped: {e}");
                self.bundle.skipped.push((name.to_string(), e));
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    pub fn finish(self) -> Bundle {
        self.bundle
    }
}

fn meta(n_obs: usize, transform: &str, alignment: &str, stacking: &str) -> Vec<String> {
    vec![format!("n_obs: {n_obs}; transform: {transform}; alignment: {alignment}; stacking: {stacking}")]
}

fn span_meta(panel: &AlignedPanel, transform: &str) -> Vec<String> {
    meta(panel.n_rows(), transform, "per-series span", "none")
}

pub fn section_summary(b: &mut Bundle, stem: &str, caption: &str, panel: &AlignedPanel, transform: &str) {
    b.push(stem, summary_table(caption, panel).with_metadata(&span_meta(panel, transform)));
}

pub fn section_adf(
    cfg: &PipelineConfig,
    b: &mut Bundle,
    stem: &str,
    caption: &str,
    panel: &AlignedPanel,
    transform: &str,
) -> Result<(), CliError> {
    let results = (0..panel.n_cols())
        .into_par_iter()
        .map(|j| {
            let (_, values) = panel.observed_span(j).ctx("stattests")?;
            let r = adf_test(&values, cfg.adf_lag, cfg.adf_kind.into()).ctx("stattests")?;
            Ok((panel.columns()[j].name.clone(), r))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut table = adf_table(caption, &results).with_metadata(&span_meta(panel, transform));
    table.metadata.push(format!(
        "regression: {}; lag: {}",
        if cfg.adf_kind == crate::config::AdfKind::C { "constant" } else { "constant+trend" },
        cfg.adf_lag.map_or("floor((T-1)^(1/3))".to_string(), |l| l.to_string())
    ));
    b.push(stem, table);
    Ok(())
}

/// Column groups for the cointegration test: one per loan term when names
/// allow, else consecutive chunks of at most six series.
pub fn johansen_groups(names: &[String]) -> Vec<(String, Vec<String>)> {
    let parsed: Option<Vec<(Term, Grade)>> = names.iter().map(|n| parse_term_grade(n)).collect();
    match parsed {
        Some(tg) => Term::ALL
            .iter()
            .filter_map(|&t| {
                let cols: Vec<String> =
                    names.iter().zip(&tg).filter(|(_, x)| x.0 == t).map(|(n, _)| n.clone()).collect();
                (cols.len() >= 2).then(|| (t.months().to_string(), cols))
            })
            .collect(),
        None => names
            .chunks(MAX_SERIES)
            .enumerate()
            .filter(|(_, c)| c.len() >= 2)
            .map(|(i, c)| ((i + 1).to_string(), c.to_vec()))
            .collect(),
    }
}

pub fn section_johansen(cfg: &PipelineConfig, b: &mut Bundle, levels: &AlignedPanel) -> Result<(), CliError> {
    let groups = johansen_groups(&levels.names());
    if groups.is_empty() {
        return Err(CliError::Data("cointegration test needs at least two series".into()));
    }
    for (label, cols) in groups {
        let names: Vec<&str> = cols.iter().map(String::as_str).collect();
        let sub = levels.select(&names).ctx("panel")?.complete_rows().ctx("panel")?;
        let r = johansen_trace(&sub.to_matrix().ctx("panel")?, &cols, cfg.johansen_lag).ctx("stattests")?;
        let caption = format!("Johansen test statistics and critical values for levels of monthly credit spreads ({label})");
        let mut table = johansen_table(&caption, &r).with_metadata(&meta(sub.n_rows(), "levels", "intersect", "none"));
        table.metadata.push(format!("series: {}; lag: {}", cols.join(" "), cfg.johansen_lag));
        b.push(format!("johansen_{label}"), table);
    }
    Ok(())
}

pub fn section_macro(b: &mut Bundle, macro_panel: &AlignedPanel) -> Result<(), CliError> {
    section_summary(b, "macro_summary", "Description statistics: macroeconomic variables of monthly frequency", macro_panel, "as supplied");
    let complete = macro_panel.complete_rows().ctx("panel")?;
    let m = complete.to_matrix().ctx("panel")?;
    let names = complete.names();
    let k = names.len();
    let mut c = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            c[(i, j)] = correlation(m.column(i).as_slice(), m.column(j).as_slice())
                .ok_or_else(|| CliError::Module {
                    module: "panel",
                    source: ccafactor::Error::DegenerateSeries(format!("`{}` is constant", names[i.max(j)])),
                })?;
        }
    }
    let table = matrix_table("Description statistics: correlations between macroeconomic variables", "variable", &names, &names, &c)
        .with_metadata(&meta(complete.n_rows(), "as supplied", "intersect", "none"));
    b.push("macro_correlations", table);
    Ok(())
}

fn fit_meta(cfg: &PipelineConfig, fits: &[RegressionFit]) -> Vec<String> {
    let n = fits.first().map_or(0, |f| f.n_obs);
    meta(n, &cfg.transform.to_string(), align_name(cfg.align), &cfg.stacking.to_string())
}

fn push_diagnostic(
    cfg: &PipelineConfig,
    b: &mut Bundle,
    stem: &str,
    caption: &str,
    fits: &[RegressionFit],
    report: &DiagnosticReport,
) {
    b.push(format!("{stem}_pc"), fit_table(caption, &report.augmented_fits).with_metadata(&fit_meta(cfg, fits)));
    let diag_caption = format!("Missing-factor diagnostic: adjusted R-squared gains from the first PC of residuals ({stem})");
    b.push(format!("{stem}_diagnostic"), diagnostic_table(&diag_caption, report).with_metadata(&fit_meta(cfg, fits)));
    b.verdicts.push(format!(
        "{stem}: verdict {} (mean delta {:.4}, PC1 variance share {:.4})",
        report.verdict, report.mean_delta, report.pc1_variance_share
    ));
}

fn panel_prefix(group: &ResponseGroup) -> &'static str {
    match group.label {
        "grade" => "Panel A ",
        "term" => "Panel B ",
        _ => "",
    }
}

#[derive(Debug, Clone, Copy)]
pub enum OlsKind {
    Full,
    Stepwise,
    Diagnose,
}

pub fn section_ols(
    cfg: &PipelineConfig,
    b: &mut Bundle,
    data: &RegressionData,
    group: &ResponseGroup,
    kind: OlsKind,
) -> Result<(), CliError> {
    let panel = panel_prefix(group);
    let stem_base = format!("ols_{}", group.label);
    match kind {
        OlsKind::Full => {
            let (fits, _) = fits_for_group(group, &data.y, &data.x, &data.x_names, false)?;
            let caption = format!("{panel}OLS Regressions: Full specification regressions, {}", group.caption);
            b.push(format!("{stem_base}_full"), fit_table(&caption, &fits).with_metadata(&fit_meta(cfg, &fits)));
        }
        OlsKind::Stepwise => {
            let (fits, _) = fits_for_group(group, &data.y, &data.x, &data.x_names, true)?;
            let caption = format!("{panel}OLS Regressions: AIC stepwise regressions, {}", group.caption);
            b.push(format!("{stem_base}_stepwise"), fit_table(&caption, &fits).with_metadata(&fit_meta(cfg, &fits)));
        }
        OlsKind::Diagnose => {
            let (fits, designs) = fits_for_group(group, &data.y, &data.x, &data.x_names, false)?;
            let report = missing_factor_diagnostic(&fits, &designs, cfg.thresholds).ctx("factor_model")?;
            let caption = format!(
                "{panel}PC OLS Regressions: Full specification regressions including first PC of residuals, {}",
                group.caption
            );
            push_diagnostic(cfg, b, &stem_base, &caption, &fits, &report);
        }
    }
    Ok(())
}

fn cca_meta(cfg: &PipelineConfig, sol: &CcaSolution) -> Vec<String> {
    let mut m = meta(sol.n_obs, &cfg.transform.to_string(), align_name(cfg.align), "none");
    m.push(format!("p: {}; q: {}; ridge: {}", sol.p, sol.q, sol.standardization.ridge));
    m
}

pub fn fit_cca(cfg: &PipelineConfig, data: &RegressionData) -> Result<CcaSolution, CliError> {
    cca_fit(&data.y, &data.x, cfg.ridge).ctx("cca")
}

/// Canonical correlations plus the eigenvalue, Wilks, redundancy and
/// cross-loading tables. Each table is independent of the others' success.
pub fn section_cca(r: &mut Runner, sol: &CcaSolution, data: &RegressionData) -> Result<(), CliError> {
    r.run("cca correlations", |cfg, b| {
        let mut t = Table::new(
            "Canonical correlations",
            "variate",
            vec!["cancor".into(), "cancor_sq".into()],
        )
        .with_decimals(5)
        .with_metadata(&cca_meta(cfg, sol));
        for (i, rho) in sol.correlations.iter().enumerate() {
            t.push(TableRow::new((i + 1).to_string(), vec![Some(*rho), Some(rho * rho)]));
        }
        b.push("cca_correlations", t);
        Ok(())
    })?;
    r.run("cca eigenvalues", |cfg, b| {
        let rows = eigen_table(sol).ctx("cca")?;
        b.push(
            "cca_eigen",
            eigen_rows_table("Canonical Correlation Coefficients and Eigenvalues", &rows).with_metadata(&cca_meta(cfg, sol)),
        );
        Ok(())
    })?;
    r.run("cca wilks", |cfg, b| {
        let rows = wilks_lambda(sol).ctx("cca")?;
        b.push(
            "cca_wilks",
            wilks_rows_table("Wilk's Lambda Tests for Significance of Canonical Variates", &rows)
                .with_metadata(&cca_meta(cfg, sol)),
        );
        Ok(())
    })?;
    r.run("cca redundancy", |cfg, b| {
        let rows = redundancy(sol, &data.y).ctx("cca")?;
        b.push(
            "cca_redundancy",
            redundancy_rows_table("Redundancy Indices for P2P Credit Spread Canonical Variates", &rows)
                .with_metadata(&cca_meta(cfg, sol)),
        );
        Ok(())
    })?;
    r.run("cca cross-loadings", |cfg, b| {
        let k = cfg.factors.min(sol.m());
        let m = cross_loadings(sol, &data.x, k).ctx("cca")?;
        let cols: Vec<String> = (1..=k).map(|i| format!("Factor{i}")).collect();
        b.push(
            "cca_cross_loadings",
            matrix_table("Pairwise Correlations of CCA Factors and Macroeconomic Proxies", "variable", &data.x_names, &cols, &m)
                .with_metadata(&cca_meta(cfg, sol)),
        );
        Ok(())
    })?;
    Ok(())
}

pub fn factor_scores(cfg: &PipelineConfig, sol: &CcaSolution) -> Result<FactorScores, CliError> {
    FactorScores::from_solution(sol, cfg.factors).ctx("factor_model")
}

/// Factor scores as a dated panel, for reuse as regressors elsewhere.
pub fn factor_panel(scores: &FactorScores, months: &[Month]) -> Result<AlignedPanel, CliError> {
    let keys = scores.names.iter().map(|n| SeriesKey::new(n.clone(), SeriesKind::Macro)).collect();
    let values = (0..scores.r()).map(|j| scores.scores.column(j).iter().map(|&v| Some(v)).collect()).collect();
    AlignedPanel::new(months.to_vec(), keys, values).ctx("factor_model")
}

pub fn section_factor(
    cfg: &PipelineConfig,
    b: &mut Bundle,
    data: &RegressionData,
    scores: &FactorScores,
    group: &ResponseGroup,
    diagnose: bool,
) -> Result<(), CliError> {
    let panel = panel_prefix(group);
    let (fits, designs) = fits_for_group(group, &data.y, &scores.scores, &scores.names, false)?;
    let stem = format!("cca_{}", group.label);
    if diagnose {
        let report = missing_factor_diagnostic(&fits, &designs, cfg.thresholds).ctx("factor_model")?;
        let caption = format!("{panel}CCA-PC Factor Regressions: including first PC of residuals, {}", group.caption);
        push_diagnostic(cfg, b, &stem, &caption, &fits, &report);
    } else {
        let caption = format!("{panel}CCA Factor Regressions: {}", group.caption);
        b.push(format!("{stem}_factor"), fit_table(&caption, &fits).with_metadata(&fit_meta(cfg, &fits)));
    }
    Ok(())
}
