//! `ccafactor`: credit-spread factor analysis from the command line.

mod analyze;
mod config;
mod error;
mod pipeline;
mod simulate;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ccafactor::panel::{write_panel_csv, AlignedPanel, SeriesKind};
use clap::{Args, Parser, Subcommand};

use config::{AdfKind, AlignArg, PipelineConfig, Stacking, Transform};
use error::{CliError, Context};
use pipeline::{Bundle, OlsKind, Runner};

#[derive(Parser, Debug)]
#[command(name = "ccafactor", version, about = "Latent factor analysis of credit spread panels")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// `key = value` settings file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (tables go to stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    transform: Option<Transform>,
    #[arg(long, global = true, value_enum)]
    align: Option<AlignArg>,
    /// Number of canonical variates retained as factors.
    #[arg(long, global = true)]
    factors: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
struct Inputs {
    /// Loan-level CSV (`date,rate,grade,term`).
    #[arg(long)]
    loans: Option<PathBuf>,
    /// Yield curve CSV (`date,maturity_months,yield`).
    #[arg(long)]
    yields: Option<PathBuf>,
    /// Spread panel CSV.
    #[arg(long)]
    spreads: Option<PathBuf>,
    /// Macro proxy panel CSV.
    #[arg(long = "macro")]
    macro_panel: Option<PathBuf>,
    #[arg(long, value_enum)]
    stacking: Option<Stacking>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Average loan rates into monthly grade×term series; subtract the
    /// curve when yields are given.
    Aggregate {
        #[arg(long)]
        loans: PathBuf,
        #[arg(long)]
        yields: Option<PathBuf>,
    },
    /// Convert a rate panel into spreads over the matching maturity yield.
    Spreads {
        #[arg(long)]
        rates: PathBuf,
        #[arg(long)]
        yields: PathBuf,
    },
    /// Augmented Dickey-Fuller tests on every series.
    Adf {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        lag: Option<usize>,
        #[arg(long, value_enum)]
        kind: Option<AdfKind>,
    },
    /// Johansen trace tests on spread levels.
    Johansen {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        lag: Option<usize>,
    },
    /// OLS of every response on all macro proxies.
    Ols {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// AIC forward-backward selection per response.
    Stepwise {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Canonical correlation analysis of spreads against macro proxies.
    Cca {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        ridge: Option<f64>,
    },
    /// Regress responses on the leading canonical variates.
    FactorRegress {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        ridge: Option<f64>,
    },
    /// Residual first-PC missing-factor diagnostic.
    Diagnose {
        #[command(flatten)]
        inputs: Inputs,
        /// Regressors: macro proxies directly, or CCA factors.
        #[arg(long, value_enum, default_value = "cca")]
        on: DiagnoseOn,
        #[arg(long)]
        ridge: Option<f64>,
        #[arg(long)]
        strong: Option<f64>,
        #[arg(long)]
        weak: Option<f64>,
    },
    /// Full report bundle.
    Analyze {
        #[command(flatten)]
        inputs: Inputs,
        /// Fail on the first section error instead of recording it.
        #[arg(long)]
        strict: bool,
    },
    /// Draw a synthetic dataset from a factor model spec.
    Simulate {
        /// TOML spec file.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Built-in spec: desk-default, scenario-a or scenario-b.
        #[arg(long)]
        preset: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum DiagnoseOn {
    Macro,
    Cca,
}

fn base_config(common: &Common) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => PipelineConfig::from_file(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    if let Some(t) = common.transform {
        cfg.transform = t;
    }
    if let Some(a) = common.align {
        cfg.align = a;
    }
    if let Some(f) = common.factors {
        cfg.factors = f;
    }
    if let Some(s) = common.seed {
        cfg.seed = Some(s);
    }
    Ok(cfg)
}

fn apply_inputs(cfg: &mut PipelineConfig, inputs: &Inputs) {
    let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
        if v.is_some() {
            slot.clone_from(v);
        }
    };
    set(&mut cfg.loans, &inputs.loans);
    set(&mut cfg.yields, &inputs.yields);
    set(&mut cfg.spreads, &inputs.spreads);
    set(&mut cfg.macro_panel, &inputs.macro_panel);
    if let Some(s) = inputs.stacking {
        cfg.stacking = s;
    }
}

/// Writes each table as `<stem>.csv` under `dir`, or all of them to stdout.
fn emit(bundle: &Bundle, out: Option<&Path>, markdown: Option<String>) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Data(format!("writing output: {e}"));
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io_err)?;
            for (stem, table) in &bundle.tables {
                std::fs::write(dir.join(format!("{stem}.csv")), table.to_csv()).map_err(io_err)?;
            }
            for (name, content) in &bundle.files {
                std::fs::write(dir.join(name), content).map_err(io_err)?;
            }
            if let Some(md) = markdown {
                std::fs::write(dir.join("summary.md"), md).map_err(io_err)?;
            }
        }
        None => match write_stdout(bundle) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            r => r.map_err(io_err)?,
        },
    }
    Ok(())
}

fn write_stdout(bundle: &Bundle) -> std::io::Result<()> {
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    for (i, (_, table)) in bundle.tables.iter().enumerate() {
        if i > 0 {
            writeln!(w)?;
        }
        write!(w, "{}", table.to_csv())?;
    }
    for v in &bundle.verdicts {
        writeln!(w, "# {v}")?;
    }
    w.flush()
}

fn panel_text(panel: &AlignedPanel, comments: &[String]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_panel_csv(&mut buf, panel, comments).ctx("panel")?;
    Ok(String::from_utf8(buf).expect("panel CSV is UTF-8"))
}

fn emit_panel(panel: &AlignedPanel, name: &str, out: Option<&Path>, comments: &[String]) -> Result<(), CliError> {
    let text = panel_text(panel, comments)?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("creating `{}`: {e}", dir.display())))?;
            std::fs::write(dir.join(name), text).map_err(|e| CliError::Data(format!("writing {name}: {e}")))
        }
        None => {
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Data(format!("writing output: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn regression_inputs(cfg: &PipelineConfig) -> Result<pipeline::RegressionData, CliError> {
    let levels = pipeline::load_levels(cfg)?;
    let responses = pipeline::apply_transform(&levels, cfg.transform)?;
    let macro_panel = pipeline::load_macro(cfg)?
        .ok_or_else(|| CliError::Usage("this command needs --macro".into()))?;
    pipeline::regression_data(&responses, &macro_panel, cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let mut cfg = base_config(&cli.common)?;
    let out = cfg.out.clone();
    match cli.command {
        Command::Aggregate { loans, yields } => {
            cfg.loans = Some(loans);
            cfg.yields = yields;
            cfg.validate()?;
            let panel = pipeline::build_panel(cfg.loans.as_deref().unwrap(), cfg.yields.as_deref())?;
            let name = if cfg.yields.is_some() { "spreads.csv" } else { "rates.csv" };
            emit_panel(&panel, name, out.as_deref(), &[])
        }
        Command::Spreads { rates, yields } => {
            cfg.yields = Some(yields.clone());
            cfg.validate()?;
            let panel = pipeline::read_panel(&rates, SeriesKind::Rate)?;
            let curve = ccafactor::panel::read_yields_csv(
                std::fs::File::open(&yields).map_err(|e| CliError::Data(format!("`{}`: {e}", yields.display())))?,
            )
            .ctx("panel")?;
            let spreads = ccafactor::panel::to_spreads(&panel, &curve).ctx("panel")?;
            emit_panel(&spreads, "spreads.csv", out.as_deref(), &[])
        }
        Command::Adf { inputs, lag, kind } => {
            apply_inputs(&mut cfg, &inputs);
            if lag.is_some() {
                cfg.adf_lag = lag;
            }
            if let Some(k) = kind {
                cfg.adf_kind = k;
            }
            cfg.validate()?;
            let levels = pipeline::load_levels(&cfg)?;
            let series = pipeline::apply_transform(&levels, cfg.transform)?;
            let mut b = Bundle::default();
            let caption = match cfg.transform {
                Transform::Levels => "ADF test statistics and p-values for levels of monthly credit spreads",
                Transform::Diff => "ADF test statistics and p-values for first differences of monthly credit spreads",
            };
            pipeline::section_adf(&cfg, &mut b, "adf", caption, &series, &cfg.transform.to_string())?;
            emit(&b, out.as_deref(), None)
        }
        Command::Johansen { inputs, lag } => {
            apply_inputs(&mut cfg, &inputs);
            if let Some(l) = lag {
                cfg.johansen_lag = l;
            }
            cfg.validate()?;
            let levels = pipeline::load_levels(&cfg)?;
            let mut b = Bundle::default();
            pipeline::section_johansen(&cfg, &mut b, &levels)?;
            emit(&b, out.as_deref(), None)
        }
        Command::Ols { inputs } => regression_command(cfg, &inputs, OlsKind::Full),
        Command::Stepwise { inputs } => regression_command(cfg, &inputs, OlsKind::Stepwise),
        Command::Cca { inputs, ridge } => {
            apply_inputs(&mut cfg, &inputs);
            if let Some(r) = ridge {
                cfg.ridge = r;
            }
            cfg.validate()?;
            let data = regression_inputs(&cfg)?;
            let sol = pipeline::fit_cca(&cfg, &data)?;
            let mut runner = Runner::new(&cfg, true);
            pipeline::section_cca(&mut runner, &sol, &data)?;
            emit(&runner.finish(), out.as_deref(), None)
        }
        Command::FactorRegress { inputs, ridge } => {
            apply_inputs(&mut cfg, &inputs);
            if let Some(r) = ridge {
                cfg.ridge = r;
            }
            cfg.validate()?;
            let data = regression_inputs(&cfg)?;
            let sol = pipeline::fit_cca(&cfg, &data)?;
            let scores = pipeline::factor_scores(&cfg, &sol)?;
            let mut b = Bundle::default();
            for g in pipeline::response_groups(&data.y_names, cfg.stacking) {
                pipeline::section_factor(&cfg, &mut b, &data, &scores, &g, false)?;
            }
            emit(&b, out.as_deref(), None)
        }
        Command::Diagnose { inputs, on, ridge, strong, weak } => {
            apply_inputs(&mut cfg, &inputs);
            if let Some(r) = ridge {
                cfg.ridge = r;
            }
            if let Some(s) = strong {
                cfg.thresholds.strong = s;
            }
            if let Some(w) = weak {
                cfg.thresholds.weak = w;
            }
            cfg.validate()?;
            let data = regression_inputs(&cfg)?;
            let mut b = Bundle::default();
            let groups = pipeline::response_groups(&data.y_names, cfg.stacking);
            match on {
                DiagnoseOn::Macro => {
                    for g in &groups {
                        pipeline::section_ols(&cfg, &mut b, &data, g, OlsKind::Diagnose)?;
                    }
                }
                DiagnoseOn::Cca => {
                    let sol = pipeline::fit_cca(&cfg, &data)?;
                    let scores = pipeline::factor_scores(&cfg, &sol)?;
                    for g in &groups {
                        pipeline::section_factor(&cfg, &mut b, &data, &scores, g, true)?;
                    }
                }
            }
            emit(&b, out.as_deref(), None)
        }
        Command::Analyze { inputs, strict } => {
            apply_inputs(&mut cfg, &inputs);
            cfg.strict |= strict;
            cfg.validate()?;
            let out = out.ok_or_else(|| CliError::Usage("analyze needs --out DIR".into()))?;
            let (bundle, md) = analyze::analyze(&cfg)?;
            emit(&bundle, Some(&out), Some(md))
        }
        Command::Simulate { spec, preset } => {
            let out = out.ok_or_else(|| CliError::Usage("simulate needs --out DIR".into()))?;
            simulate::simulate(spec.as_deref(), preset.as_deref(), cfg.seed, &out)
        }
    }
}

fn regression_command(mut cfg: PipelineConfig, inputs: &Inputs, kind: OlsKind) -> Result<(), CliError> {
    apply_inputs(&mut cfg, inputs);
    cfg.validate()?;
    let data = regression_inputs(&cfg)?;
    let mut b = Bundle::default();
    for g in pipeline::response_groups(&data.y_names, cfg.stacking) {
        pipeline::section_ols(&cfg, &mut b, &data, &g, kind)?;
    }
    emit(&b, cfg.out.as_deref(), None)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { error::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
