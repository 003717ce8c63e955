//! Log-log power-law regression S = A * x^B with standard errors from
//! ordinary least squares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpSide {
    AboveEP,
    BelowEP,
}

/// One sensitivity sample: true coupling, deviation from the EP, and the
/// measured amplification S = (Re E - Im E) / |dOmega|.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub omega_true: f64,
    pub delta_omega: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub a: f64,
    pub b: f64,
    pub stderr_a: f64,
    pub stderr_b: f64,
    pub side: EpSide,
    pub n_points: usize,
}

/// OLS of ln S against ln |dOmega / Omega_0| over the points on one side
/// of the EP. Omega_0 is recovered per point as omega_true - delta_omega.
pub fn fit_power_law(points: &[SensitivityPoint], side: EpSide) -> Result<PowerLawFit> {
    let selected: Vec<(usize, &SensitivityPoint)> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| match side {
            EpSide::AboveEP => p.delta_omega > 0.0,
            EpSide::BelowEP => p.delta_omega < 0.0,
        })
        .collect();
    if selected.len() < 3 {
        return Err(Error::InsufficientPoints { got: selected.len(), need: 3 });
    }
    for (index, p) in &selected {
        if p.s <= 0.0 {
            return Err(Error::NonPositiveS { index: *index, value: p.s });
        }
    }

    let xy: Vec<(f64, f64)> = selected
        .iter()
        .map(|(_, p)| {
            let omega_ep = p.omega_true - p.delta_omega;
            ((p.delta_omega / omega_ep).abs().ln(), p.s.ln())
        })
        .collect();

    let n = xy.len() as f64;
    let mean_x = xy.iter().map(|v| v.0).sum::<f64>() / n;
    let mean_y = xy.iter().map(|v| v.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|v| (v.0 - mean_x).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|v| (v.0 - mean_x) * (v.1 - mean_y)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateData);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let ss_res: f64 = xy.iter().map(|v| (v.1 - intercept - slope * v.0).powi(2)).sum();
    let dof = (xy.len() as f64 - 2.0).max(1.0);
    let var = ss_res / dof;
    let stderr_b = (var / sxx).sqrt();
    let stderr_slope_to_a = (var * (1.0 / n + mean_x * mean_x / sxx)).sqrt();

    Ok(PowerLawFit {
        a: intercept.exp(),
        b: slope,
        // delta-method: stderr of A = A * stderr of intercept
        stderr_a: intercept.exp() * stderr_slope_to_a,
        stderr_b,
        side,
        n_points: xy.len(),
    })
}
