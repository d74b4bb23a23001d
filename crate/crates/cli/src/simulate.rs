//! `simulate`: synthetic datasets in the panel CSV format.

use std::path::Path;

use ccafactor::panel::{series_name, write_panel_csv, AlignedPanel, Grade, Month, SeriesKey, SeriesKind, Term};
use ccafactor::synthgen::{generate, population_cca, FactorModelSpec};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Context};

/// TOML spec. A preset supplies every parameter; explicit fields override it.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub t: Option<usize>,
    /// First month of the generated panels, `YYYY-MM`.
    pub start: Option<String>,
    pub alpha: Option<Vec<f64>>,
    /// Rows of `B1`, one per response.
    pub b1: Option<Vec<Vec<f64>>>,
    /// Rows of `B2`, one per response.
    pub b2: Option<Vec<Vec<f64>>>,
    /// Rows of `Θ`, one per proxy.
    pub theta: Option<Vec<Vec<f64>>>,
    pub proxy_noise_scale: Option<f64>,
    pub idio_variances: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct Truth<'a> {
    seed: u64,
    t: usize,
    start: String,
    n: usize,
    r: usize,
    m_minus_r: usize,
    k: usize,
    alpha: &'a [f64],
    b1: Vec<Vec<f64>>,
    b2: Vec<Vec<f64>>,
    theta: Vec<Vec<f64>>,
    proxy_noise_scale: f64,
    idio_variances: &'a [f64],
    population_canonical_correlations: Option<Vec<f64>>,
    assumption_violations: Vec<String>,
}

fn preset(name: &str, seed: u64) -> Result<FactorModelSpec, CliError> {
    match name {
        "desk-default" => Ok(FactorModelSpec::desk_default(seed)),
        "scenario-a" => Ok(FactorModelSpec::scenario_a(seed)),
        "scenario-b" => Ok(FactorModelSpec::scenario_b(seed)),
        other => Err(CliError::Usage(format!(
            "unknown preset `{other}` (expected desk-default, scenario-a or scenario-b)"
        ))),
    }
}

fn matrix(name: &str, rows: &[Vec<f64>], ncols_if_empty: usize) -> Result<DMatrix<f64>, CliError> {
    let Some(first) = rows.first() else {
        return Ok(DMatrix::zeros(0, ncols_if_empty));
    };
    let c = first.len();
    if let Some(i) = rows.iter().position(|r| r.len() != c) {
        return Err(CliError::Data(format!(
            "spec: row {} of `{name}` has {} entries, row 1 has {c}",
            i + 1,
            rows[i].len()
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), c, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Resolves a spec file (or bare preset) into generator parameters.
/// `seed_flag` wins over the file's seed.
pub fn resolve(file: &SpecFile, preset_flag: Option<&str>, seed_flag: Option<u64>) -> Result<FactorModelSpec, CliError> {
    let seed = seed_flag.or(file.seed).unwrap_or(0);
    let mut spec = match preset_flag.or(file.preset.as_deref()) {
        Some(p) => preset(p, seed)?,
        None => {
            let missing: Vec<&str> = [
                ("alpha", file.alpha.is_none()),
                ("b1", file.b1.is_none()),
                ("theta", file.theta.is_none()),
                ("idio_variances", file.idio_variances.is_none()),
                ("proxy_noise_scale", file.proxy_noise_scale.is_none()),
                ("t", file.t.is_none()),
            ]
            .into_iter()
            .filter_map(|(k, m)| m.then_some(k))
            .collect();
            if !missing.is_empty() {
                return Err(CliError::Usage(format!("spec without a preset must set: {}", missing.join(", "))));
            }
            FactorModelSpec {
                alpha: Vec::new(),
                b1: DMatrix::zeros(0, 0),
                b2: DMatrix::zeros(0, 0),
                theta: DMatrix::zeros(0, 0),
                proxy_noise_scale: 0.0,
                idio_variances: Vec::new(),
                t: 0,
                seed,
            }
        }
    };
    if let Some(v) = &file.alpha {
        spec.alpha = v.clone();
    }
    if let Some(v) = &file.b1 {
        spec.b1 = matrix("b1", v, 0)?;
    }
    match &file.b2 {
        Some(v) => spec.b2 = matrix("b2", v, 0)?,
        None if file.b1.is_some() => spec.b2 = DMatrix::zeros(spec.b1.nrows(), 0),
        None => {}
    }
    if let Some(v) = &file.theta {
        spec.theta = matrix("theta", v, 0)?;
    }
    if let Some(v) = file.proxy_noise_scale {
        spec.proxy_noise_scale = v;
    }
    if let Some(v) = &file.idio_variances {
        spec.idio_variances = v.clone();
    }
    if let Some(t) = file.t {
        spec.t = t;
    }
    spec.validate().ctx("synthgen")?;
    Ok(spec)
}

/// Response names: the loan series layout for twelve responses, else `y1..yn`.
fn response_names(n: usize) -> Vec<String> {
    if n == Term::ALL.len() * Grade::ALL.len() {
        Term::ALL.iter().flat_map(|&t| Grade::ALL.iter().map(move |&g| series_name(t, g))).collect()
    } else {
        (1..=n).map(|i| format!("y{i}")).collect()
    }
}

fn panel(start: Month, names: Vec<String>, kind: SeriesKind, data: &DMatrix<f64>) -> Result<AlignedPanel, CliError> {
    let keys = names.into_iter().map(|n| SeriesKey::new(n, kind)).collect();
    AlignedPanel::from_matrix(start, keys, data).ctx("synthgen")
}

fn csv_text(p: &AlignedPanel, comments: &[String]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_panel_csv(&mut buf, p, comments).ctx("panel")?;
    Ok(String::from_utf8(buf).expect("panel CSV is UTF-8"))
}

/// Generated files as `(name, content)` pairs.
pub fn render(spec: &FactorModelSpec, start: Month) -> Result<Vec<(String, String)>, CliError> {
    let d = generate(spec).ctx("synthgen")?;
    let header = vec![format!("synthetic: seed {}; T {}", spec.seed, spec.t)];
    let y = panel(start, response_names(spec.n()), SeriesKind::SpreadLevel, &d.y)?;
    let z = panel(start, (1..=spec.k()).map(|i| format!("z{i}")).collect(), SeriesKind::Macro, &d.z)?;
    let f = d.true_f1.clone().resize_horizontally(spec.r() + spec.m_minus_r(), 0.0);
    let mut f = f;
    f.columns_mut(spec.r(), spec.m_minus_r()).copy_from(&d.true_f2);
    let f_names = (1..=spec.r())
        .map(|i| format!("f1_{i}"))
        .chain((1..=spec.m_minus_r()).map(|i| format!("f2_{i}")))
        .collect();
    let factors = panel(start, f_names, SeriesKind::Macro, &f)?;

    let truth = Truth {
        seed: spec.seed,
        t: spec.t,
        start: start.to_string(),
        n: spec.n(),
        r: spec.r(),
        m_minus_r: spec.m_minus_r(),
        k: spec.k(),
        alpha: &spec.alpha,
        b1: rows(&spec.b1),
        b2: rows(&spec.b2),
        theta: rows(&spec.theta),
        proxy_noise_scale: spec.proxy_noise_scale,
        idio_variances: &spec.idio_variances,
        population_canonical_correlations: population_cca(spec).ok(),
        assumption_violations: spec.assumption_violations(),
    };
    let truth_json = serde_json::to_string_pretty(&truth).expect("truth serializes") + "\n";
    let config = format!(
        "# analyze settings for this synthetic dataset\nspreads = spreads.csv\nmacro = macro.csv\nfactors = {}\nseed = {}\n",
        spec.r(),
        spec.seed
    );
    Ok(vec![
        ("spreads.csv".into(), csv_text(&y, &header)?),
        ("macro.csv".into(), csv_text(&z, &header)?),
        ("factors.csv".into(), csv_text(&factors, &header)?),
        ("truth.json".into(), truth_json),
        ("config.txt".into(), config),
    ])
}

pub fn simulate(spec_path: Option<&Path>, preset_flag: Option<&str>, seed: Option<u64>, out: &Path) -> Result<(), CliError> {
    let file = match spec_path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Data(format!("spec `{}`: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| CliError::Data(format!("spec `{}`: {e}", p.display())))?
        }
        None if preset_flag.is_some() => SpecFile::default(),
        None => return Err(CliError::Usage("simulate needs --spec FILE or --preset NAME".into())),
    };
    let spec = resolve(&file, preset_flag, seed)?;
    let start = match &file.start {
        Some(s) => s.parse().ctx("panel")?,
        None => Month::new(2010, 5).expect("valid month"),
    };
    let files = render(&spec, start)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Data(format!("creating `{}`: {e}", out.display())))?;
    for (name, content) in files {
        std::fs::write(out.join(&name), content).map_err(|e| CliError::Data(format!("writing {name}: {e}")))?;
    }
    Ok(())
}
