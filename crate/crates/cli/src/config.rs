//! Pipeline settings: `key = value` config files with flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ccafactor::factor_model::Thresholds;
use ccafactor::panel::AlignPolicy;
use ccafactor::stattests::{RegressionKind, DEFAULT_JOHANSEN_LAG};
use clap::ValueEnum;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Transform {
    Levels,
    Diff,
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::Levels => "levels",
            Transform::Diff => "diff",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlignArg {
    Intersect,
    Union,
}

impl From<AlignArg> for AlignPolicy {
    fn from(a: AlignArg) -> Self {
        match a {
            AlignArg::Intersect => AlignPolicy::Intersect,
            AlignArg::Union => AlignPolicy::Union,
        }
    }
}

/// How responses are grouped into regression panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stacking {
    /// Stack `<term>-<grade>` series by grade and by term when every
    /// response name has that form; otherwise one response per series.
    Pooled,
    /// One response per series.
    None,
}

impl fmt::Display for Stacking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stacking::Pooled => "pooled",
            Stacking::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AdfKind {
    /// Constant only.
    C,
    /// Constant and linear trend.
    Ct,
}

impl From<AdfKind> for RegressionKind {
    fn from(k: AdfKind) -> Self {
        match k {
            AdfKind::C => RegressionKind::Constant,
            AdfKind::Ct => RegressionKind::ConstantTrend,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub loans: Option<PathBuf>,
    pub yields: Option<PathBuf>,
    pub spreads: Option<PathBuf>,
    pub macro_panel: Option<PathBuf>,
    pub transform: Transform,
    pub align: AlignArg,
    pub stacking: Stacking,
    pub factors: usize,
    pub adf_lag: Option<usize>,
    pub adf_kind: AdfKind,
    pub johansen_lag: usize,
    pub thresholds: Thresholds,
    pub ridge: f64,
    pub strict: bool,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            loans: None,
            yields: None,
            spreads: None,
            macro_panel: None,
            transform: Transform::Levels,
            align: AlignArg::Intersect,
            stacking: Stacking::Pooled,
            factors: 3,
            adf_lag: None,
            adf_kind: AdfKind::Ct,
            johansen_lag: DEFAULT_JOHANSEN_LAG,
            thresholds: Thresholds::default(),
            ridge: 0.0,
            strict: false,
            out: None,
            seed: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{value}`")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value, true).map_err(|_| CliError::Usage(format!("config key `{key}`: invalid value `{value}`")))
}

impl PipelineConfig {
    /// Reads `key = value` lines. Blank lines and `#` comments are skipped;
    /// relative paths resolve against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("config `{}`: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
            cfg.set(key.trim(), value.trim().trim_matches('"'), base)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), CliError> {
        let path = || Some(base.join(value));
        match key {
            "loans" => self.loans = path(),
            "yields" => self.yields = path(),
            "spreads" => self.spreads = path(),
            "macro" => self.macro_panel = path(),
            "out" => self.out = path(),
            "transform" => self.transform = parse_enum(key, value)?,
            "align" => self.align = parse_enum(key, value)?,
            "stacking" => self.stacking = parse_enum(key, value)?,
            "factors" => self.factors = parse(key, value)?,
            "adf_lag" => self.adf_lag = Some(parse(key, value)?),
            "adf_kind" => self.adf_kind = parse_enum(key, value)?,
            "johansen_lag" => self.johansen_lag = parse(key, value)?,
            "strong" => self.thresholds.strong = parse(key, value)?,
            "weak" => self.thresholds.weak = parse(key, value)?,
            "ridge" => self.ridge = parse(key, value)?,
            "strict" => self.strict = parse(key, value)?,
            "seed" => self.seed = Some(parse(key, value)?),
            other => return Err(CliError::Usage(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.factors == 0 {
            return Err(CliError::Usage("--factors must be at least 1".into()));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(CliError::Usage("ridge must be a nonnegative number".into()));
        }
        for p in [&self.loans, &self.yields, &self.spreads, &self.macro_panel].into_iter().flatten() {
            if !p.exists() {
                return Err(CliError::Data(format!("input file `{}` does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// Effective settings, one `key = value` string each. Input paths are
    /// shown by file name only so bundles do not depend on where they ran.
    pub fn echo(&self) -> Vec<String> {
        let name = |p: &Option<PathBuf>| {
            p.as_ref().and_then(|p| p.file_name()).map_or("-".to_string(), |n| n.to_string_lossy().into_owned())
        };
        vec![
            format!("loans = {}", name(&self.loans)),
            format!("yields = {}", name(&self.yields)),
            format!("spreads = {}", name(&self.spreads)),
            format!("macro = {}", name(&self.macro_panel)),
            format!("transform = {}", self.transform),
            format!("align = {}", align_name(self.align)),
            format!("stacking = {}", self.stacking),
            format!("factors = {}", self.factors),
            format!("adf_lag = {}", self.adf_lag.map_or("default".to_string(), |l| l.to_string())),
            format!("adf_kind = {}", if self.adf_kind == AdfKind::C { "c" } else { "ct" }),
            format!("johansen_lag = {}", self.johansen_lag),
            format!("strong = {}", self.thresholds.strong),
            format!("weak = {}", self.thresholds.weak),
            format!("ridge = {}", self.ridge),
        ]
    }
}

pub fn align_name(a: AlignArg) -> &'static str {
    match a {
        AlignArg::Intersect => "intersect",
        AlignArg::Union => "union",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_and_resolves_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# comment\nspreads = data/s.csv\ntransform = diff\nfactors = 4\nstrong = 0.4\n").unwrap();
        let cfg = PipelineConfig::from_file(&path).unwrap();
        assert_eq!(cfg.spreads, Some(dir.path().join("data/s.csv")));
        assert_eq!(cfg.transform, Transform::Diff);
        assert_eq!(cfg.factors, 4);
        assert_eq!(cfg.thresholds.strong, 0.4);
    }

    #[test]
    fn rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "colour = blue\n").unwrap();
        assert!(matches!(PipelineConfig::from_file(&path), Err(CliError::Usage(_))));
    }
}
