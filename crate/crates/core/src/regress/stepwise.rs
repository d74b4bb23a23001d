use nalgebra::DVector;

use super::{ols, Design, RegressionFit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepAction {
    Add,
    Drop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepwiseStep {
    pub action: StepAction,
    pub predictor: String,
    pub aic_after: f64,
}

/// Model the winning search started from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartModel {
    InterceptOnly,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepwiseTrace {
    pub start: StartModel,
    pub start_aic: f64,
    pub steps: Vec<StepwiseStep>,
}

impl StepwiseTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Forward-backward selection by AIC.
///
/// Two greedy searches run, one from the intercept-only model and one from
/// the full model. Each step takes the single add or drop with the lowest
/// AIC (first predictor in column order on ties) and stops when no move
/// lowers AIC. The search ending at the lower AIC wins, so the result is
/// never worse than either reference model.
pub fn stepwise_aic(response_name: &str, y: &DVector<f64>, full: &Design) -> Result<(RegressionFit, StepwiseTrace)> {
    let p = full.x.ncols();
    if p == 0 {
        let fit = ols(response_name, y, full)?;
        let trace = StepwiseTrace { start: StartModel::InterceptOnly, start_aic: fit.aic, steps: Vec::new() };
        return Ok((fit, trace));
    }
    // Surfaces rank and size errors of the full model up front.
    ols(response_name, y, full)?;

    let from_empty = if full.intercept {
        Some(search(response_name, y, full, vec![false; p], StartModel::InterceptOnly)?)
    } else {
        None
    };
    let from_full = search(response_name, y, full, vec![true; p], StartModel::Full)?;

    Ok(match from_empty {
        Some(e) if e.0.aic <= from_full.0.aic => e,
        _ => from_full,
    })
}

fn fit_subset(name: &str, y: &DVector<f64>, full: &Design, active: &[bool]) -> Result<RegressionFit> {
    let cols: Vec<usize> = (0..active.len()).filter(|&j| active[j]).collect();
    ols(name, y, &full.subset(&cols))
}

fn search(
    name: &str,
    y: &DVector<f64>,
    full: &Design,
    mut active: Vec<bool>,
    start: StartModel,
) -> Result<(RegressionFit, StepwiseTrace)> {
    let mut current = fit_subset(name, y, full, &active)?;
    let mut trace = StepwiseTrace { start, start_aic: current.aic, steps: Vec::new() };
    loop {
        let mut best: Option<(usize, RegressionFit)> = None;
        for j in 0..active.len() {
            active[j] = !active[j];
            let candidate = fit_subset(name, y, full, &active);
            active[j] = !active[j];
            let fit = match candidate {
                Ok(fit) => fit,
                // A move that breaks identifiability (or empties a
                // no-intercept model) is simply not available.
                Err(Error::RankDeficient { .. } | Error::InvalidArgument(_)) => continue,
                Err(e) => return Err(e),
            };
            if best.as_ref().is_none_or(|(_, b)| fit.aic < b.aic) {
                best = Some((j, fit));
            }
        }
        match best {
            Some((j, fit)) if fit.aic < current.aic => {
                let action = if active[j] { StepAction::Drop } else { StepAction::Add };
                active[j] = !active[j];
                trace.steps.push(StepwiseStep { action, predictor: full.names[j].clone(), aic_after: fit.aic });
                current = fit;
            }
            _ => return Ok((current, trace)),
        }
    }
}
