//! `analyze`: every section in report order plus a markdown summary.

use std::fmt::Write;

use crate::config::{PipelineConfig, Transform};
use crate::error::CliError;
use crate::pipeline::{self, Bundle, OlsKind, Runner};

const LEVELS_CAPTION: &str =
    "Description statistics: levels of monthly credit spreads across maturity terms and grades";
const DIFF_CAPTION: &str =
    "Description statistics: first differences of monthly credit spreads across maturity terms and grades";

/// Runs the full pipeline. Section failures are recorded and skipped unless
/// `cfg.strict`; failing to load the spread panel is always fatal.
pub fn analyze(cfg: &PipelineConfig) -> Result<(Bundle, String), CliError> {
    let levels = pipeline::load_levels(cfg)?;
    let macro_panel = pipeline::load_macro(cfg)?;
    let mut r = Runner::new(cfg, cfg.strict);

    r.run("level summary", |_, b| {
        pipeline::section_summary(b, "summary_levels", LEVELS_CAPTION, &levels, "levels");
        Ok(())
    })?;
    r.run("level ADF", |cfg, b| {
        pipeline::section_adf(
            cfg,
            b,
            "adf_levels",
            "ADF test statistics and p-values for levels of monthly credit spreads",
            &levels,
            "levels",
        )
    })?;
    let diffs = pipeline::apply_transform(&levels, Transform::Diff);
    r.run("difference summary", |_, b| {
        pipeline::section_summary(b, "summary_diff", DIFF_CAPTION, diffs.as_ref().map_err(clone_err)?, "diff");
        Ok(())
    })?;
    r.run("difference ADF", |cfg, b| {
        pipeline::section_adf(
            cfg,
            b,
            "adf_diff",
            "ADF test statistics and p-values for first differences of monthly credit spreads",
            diffs.as_ref().map_err(clone_err)?,
            "diff",
        )
    })?;
    r.run("johansen", |cfg, b| pipeline::section_johansen(cfg, b, &levels))?;

    let Some(macro_panel) = macro_panel else {
        r.bundle.skipped.push(("regressions".into(), CliError::Usage("no macro panel configured".into())));
        let bundle = r.finish();
        let md = summary(cfg, &bundle);
        return Ok((bundle, md));
    };
    r.run("macro description", |_, b| pipeline::section_macro(b, &macro_panel))?;

    let responses = match cfg.transform {
        Transform::Levels => Ok(levels.clone()),
        Transform::Diff => diffs.as_ref().map(Clone::clone).map_err(clone_err),
    };
    let mut data = None;
    r.run("regression data", |cfg, _| {
        data = Some(pipeline::regression_data(&responses?, &macro_panel, cfg)?);
        Ok(())
    })?;
    if let Some(data) = data {
        let groups = pipeline::response_groups(&data.y_names, cfg.stacking);
        for kind in [OlsKind::Full, OlsKind::Stepwise, OlsKind::Diagnose] {
            for g in &groups {
                let name = format!("ols {:?} {}", kind, g.label).to_lowercase();
                r.run(&name, |cfg, b| pipeline::section_ols(cfg, b, &data, g, kind))?;
            }
        }
        let mut sol = None;
        r.run("cca", |cfg, _| {
            sol = Some(pipeline::fit_cca(cfg, &data)?);
            Ok(())
        })?;
        if let Some(sol) = sol {
            pipeline::section_cca(&mut r, &sol, &data)?;
            let mut scores = None;
            r.run("factor scores", |cfg, b| {
                let s = pipeline::factor_scores(cfg, &sol)?;
                let panel = pipeline::factor_panel(&s, &data.months)?;
                let comments = vec![format!(
                    "CCA factor scores; n_obs: {}; transform: {}",
                    data.months.len(),
                    cfg.transform
                )];
                b.files.push(("factor_scores.csv".into(), crate::panel_text(&panel, &comments)?));
                scores = Some(s);
                Ok(())
            })?;
            if let Some(scores) = scores {
                for diagnose in [false, true] {
                    for g in &groups {
                        let name = format!("cca {} {}", if diagnose { "diagnostic" } else { "factor" }, g.label);
                        r.run(&name, |cfg, b| pipeline::section_factor(cfg, b, &data, &scores, g, diagnose))?;
                    }
                }
            }
        }
    }
    let bundle = r.finish();
    let md = summary(cfg, &bundle);
    Ok((bundle, md))
}

fn clone_err(e: &CliError) -> CliError {
    match e {
        CliError::Usage(m) => CliError::Usage(m.clone()),
        CliError::Data(m) => CliError::Data(m.clone()),
        CliError::Module { module, source } => CliError::Data(format!("{module}: {source}")),
    }
}

/// Markdown report: settings, every table under its caption, verdicts and
/// skipped sections.
pub fn summary(cfg: &PipelineConfig, bundle: &Bundle) -> String {
    let mut s = String::from("# Credit spread factor analysis\n\n## Settings\n\n```\n");
    for line in cfg.echo() {
        let _ = writeln!(s, "{line}");
    }
    s.push_str("```\n");
    for (stem, table) in &bundle.tables {
        let _ = write!(s, "\n## {stem}.csv\n\n{}", table.to_markdown());
    }
    if !bundle.verdicts.is_empty() {
        s.push_str("\n## Missing-factor verdicts\n\n");
        for v in &bundle.verdicts {
            let _ = writeln!(s, "- {v}");
        }
    }
    if !bundle.skipped.is_empty() {
        s.push_str("\n## Skipped sections\n\n");
        for (name, e) in &bundle.skipped {
            let _ = writeln!(s, "- {name}: {e}");
        }
    }
    s
}
