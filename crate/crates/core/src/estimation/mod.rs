//! The sensing pipeline: synthetic finite-shot post-selected measurements,
//! least-squares extraction of the complex eigenenergy E from conditioned
//! population traces, the sensitivity estimator S = (Re E - Im E)/|dOmega|,
//! and the near-EP power-law fit S = A |dOmega/Omega_0|^B.

mod power_law;
mod simplex;

pub use power_law::{fit_power_law, EpSide, PowerLawFit, SensitivityPoint};

use num_complex::Complex64;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate_master, sinc_c, TimeGrid};
use crate::error::{Error, Result};
use crate::model::{ComplexEnergy, Density3, SystemParams, IDX_E0};
use crate::nh_core::half_splitting;
use crate::rng::{task_rng, task_seed};

/// Minimum post-selected shots per time point; below this the binomial
/// error on the conditioned population exceeds ~0.1.
pub const MIN_KEPT: u64 = 25;
/// Minimum usable time points for an eigenenergy fit.
pub const MIN_FIT_POINTS: usize = 5;
/// Number of deterministic optimizer starts.
pub const N_RESTARTS: usize = 4;

/// Default campaign: relative deviations |dOmega|/Omega_0 applied on both
/// sides of the EP.
pub const DEFAULT_REL_OFFSETS: [f64; 8] = [0.02, 0.04, 0.07, 0.12, 0.18, 0.25, 0.35, 0.5];
/// Default shots per time point.
pub const DEFAULT_SHOTS: u64 = 3000;
/// Default measurement grid: 81 points on [0, 2] us (about 2.5 / Gamma at
/// the reference losses).
pub fn default_grid() -> TimeGrid {
    TimeGrid::new(0.0, 2.0, 81).expect("static grid is valid")
}

/// Counts of the three readout outcomes at one interaction time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub t: f64,
    pub shots: u64,
    pub counts_e0: u64,
    pub counts_g1: u64,
    pub counts_g0: u64,
}

/// Extracted complex eigenenergy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitResult {
    pub energy: ComplexEnergy,
    pub residual_rss: f64,
    pub n_points_used: usize,
    pub converged: bool,
}

/// Draw one multinomial readout sample per grid time from the Lindblad
/// populations. Deterministic in `seed`.
pub fn simulate_measurements(
    p: &SystemParams,
    grid: &TimeGrid,
    shots: u64,
    seed: u64,
) -> Result<Vec<MeasurementRecord>> {
    let rho_t = integrate_master(p, &Density3::basis_state(IDX_E0), grid)?;
    let times = grid.times();
    Ok(rho_t
        .iter()
        .zip(times)
        .enumerate()
        .map(|(k, (rho, t))| {
            let (p_g0, p_e0, p_g1) = rho.populations();
            let mut rng = task_rng(seed, k as u64);
            let pe = p_e0.clamp(0.0, 1.0);
            let n_e0 = Binomial::new(shots, pe).unwrap().sample(&mut rng);
            let rest = shots - n_e0;
            let denom = (p_g1 + p_g0).max(1e-300);
            let pg1 = (p_g1.max(0.0) / denom).clamp(0.0, 1.0);
            let n_g1 = Binomial::new(rest, pg1).unwrap().sample(&mut rng);
            MeasurementRecord {
                t,
                shots,
                counts_e0: n_e0,
                counts_g1: n_g1,
                counts_g0: rest - n_g1,
            }
        })
        .collect())
}

/// Discard the |g,g> outcomes and renormalize: returns
/// (t, conditioned p_e, kept shots).
pub fn condition_record(r: &MeasurementRecord) -> Result<(f64, f64, u64)> {
    let kept = r.counts_e0 + r.counts_g1;
    if kept < MIN_KEPT {
        return Err(Error::InsufficientSurvivors { kept, min: MIN_KEPT });
    }
    Ok((r.t, r.counts_e0 as f64 / kept as f64, kept))
}

/// Conditioned-population model M(t; E) implied by the no-jump amplitudes,
/// with Omega expressed through E as Omega(E) = sqrt(E^2 + (kappa/4)^2).
/// The common decay e^{-Gamma t} cancels in the ratio.
pub fn conditioned_model(e: Complex64, kappa: f64, t: f64) -> f64 {
    let k4 = Complex64::new(kappa / 4.0, 0.0);
    let omega = (e * e + k4 * k4).sqrt();
    let z = e * t;
    let s = sinc_c(z) * t; // sin(Et)/E
    let f = z.cos() + k4 * s;
    let g = -Complex64::i() * omega * s;
    let fn2 = f.norm_sqr();
    let gn2 = g.norm_sqr();
    fn2 / (fn2 + gn2)
}

fn weighted_rss(data: &[(f64, f64, u64)], kappa: f64, e: Complex64) -> f64 {
    data.iter()
        .map(|&(t, pe, w)| {
            let m = conditioned_model(e, kappa, t);
            w as f64 * (pe - m).powi(2)
        })
        .sum()
}

/// Dominant angular frequency of the detrended trace by a direct
/// periodogram scan; the population oscillates at 2E above the EP.
fn dominant_frequency(data: &[(f64, f64, u64)]) -> f64 {
    let n = data.len();
    let mean = data.iter().map(|d| d.1).sum::<f64>() / n as f64;
    let span = data[n - 1].0 - data[0].0;
    let dt = span / (n - 1) as f64;
    let w_max = std::f64::consts::PI / dt;
    let mut best = (0.0, 0.0);
    for j in 1..=256 {
        let w = w_max * j as f64 / 256.0;
        let (mut re, mut im) = (0.0, 0.0);
        for &(t, pe, _) in data {
            re += (pe - mean) * (w * t).cos();
            im += (pe - mean) * (w * t).sin();
        }
        let power = re * re + im * im;
        if power > best.1 {
            best = (w, power);
        }
    }
    best.0
}

/// Crude overdamped rate estimate from the envelope decay of the
/// detrended trace.
fn decay_rate(data: &[(f64, f64, u64)]) -> f64 {
    let last = data[data.len() - 1].1;
    let d0 = (data[0].1 - last).abs();
    if d0 < 1e-12 {
        return 1.0;
    }
    // first time the deviation falls below d0 / e
    for &(t, pe, _) in data.iter().skip(1) {
        if (pe - last).abs() < d0 / std::f64::consts::E && t > 0.0 {
            return 1.0 / t;
        }
    }
    1.0 / data[data.len() - 1].0.max(1e-6)
}

/// Weighted least-squares fit of the complex eigenenergy to conditioned
/// populations. `data` holds (t, conditioned p_e, kept shots); kept shots
/// act as inverse-variance weights. `omega_hint`, when given, seeds one
/// optimizer start with the splitting expected at that coupling.
pub fn fit_eigenenergy(
    data: &[(f64, f64, u64)],
    kappa_q: f64,
    kappa_p: f64,
    omega_hint: Option<f64>,
) -> Result<FitResult> {
    if data.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints { got: data.len(), need: MIN_FIT_POINTS });
    }
    let lo = data.iter().map(|d| d.1).fold(f64::INFINITY, f64::min);
    let hi = data.iter().map(|d| d.1).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-10 {
        return Err(Error::DegenerateData);
    }
    let kappa = kappa_p - kappa_q;

    let freq_guess = [dominant_frequency(data) / 2.0, 0.0];
    let rate_guess = [0.0, -decay_rate(data) / 2.0];
    let hint_guess = match omega_hint {
        Some(omega) => {
            let p = SystemParams::new(omega.max(0.0), kappa_q, kappa_p)?;
            let e = half_splitting(&p);
            [e.re, e.im]
        }
        None => [kappa.abs() / 8.0, -kappa.abs() / 8.0],
    };
    let midpoint = [
        0.5 * (freq_guess[0] + rate_guess[0]),
        0.5 * (freq_guess[1] + rate_guess[1]),
    ];
    let starts = [freq_guess, rate_guess, hint_guess, midpoint];

    let scale_ref = kappa.abs() / 4.0 + 1.0;
    let mut best: Option<simplex::SimplexOutcome> = None;
    for x0 in starts {
        let h = (0.1 * (x0[0].abs() + x0[1].abs())).max(0.02 * scale_ref);
        let out = simplex::minimize(
            |x| weighted_rss(data, kappa, Complex64::new(x[0], x[1])),
            x0,
            h,
        );
        let better = match &best {
            None => true,
            Some(b) => out.fmin < b.fmin,
        };
        if better {
            best = Some(out);
        }
    }
    let best = best.unwrap();
    if !best.converged {
        return Err(Error::NotConverged { restarts: N_RESTARTS });
    }
    // the model is invariant under E -> -E and E -> conj(E), so the fit
    // only determines (|Re E|, |Im E|); fold onto the damped branch
    let energy = ComplexEnergy::new(best.x[0].abs(), -best.x[1].abs());
    Ok(FitResult {
        energy,
        residual_rss: best.fmin,
        n_points_used: data.len(),
        converged: best.converged,
    })
}

/// S = (Re E - Im E) / |dOmega|; positive on both sides of the EP with the
/// canonical branch.
pub fn sensitivity_from_fit(
    e: ComplexEnergy,
    omega_true: f64,
    delta_omega: f64,
) -> Result<SensitivityPoint> {
    if delta_omega == 0.0 {
        return Err(Error::AtExceptionalPoint);
    }
    Ok(SensitivityPoint {
        omega_true,
        delta_omega,
        s: (e.re - e.im) / delta_omega.abs(),
    })
}

/// One coupling point of a sensing campaign.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PointReport {
    pub omega: f64,
    pub delta_omega: f64,
    pub re_e: f64,
    pub im_e: f64,
    pub s: f64,
    pub rss: f64,
    pub converged: bool,
    pub n_points_used: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema_version: u32,
    pub kappa_q: f64,
    pub kappa_p: f64,
    pub omega_ep: f64,
    pub grid: TimeGrid,
    pub shots: u64,
    pub seed: u64,
    pub points: Vec<PointReport>,
    pub power_law_above: Option<PowerLawFit>,
    pub power_law_below: Option<PowerLawFit>,
}

/// Full synthetic sensing campaign over a list of couplings. Deterministic
/// in `seed`; campaign points run in parallel but are keyed by index.
pub fn run_sensing_campaign(
    omega_list: &[f64],
    p_base: &SystemParams,
    grid: &TimeGrid,
    shots: u64,
    seed: u64,
) -> Result<CampaignReport> {
    let omega_ep = p_base.omega_ep();
    let points: Vec<PointReport> = omega_list
        .par_iter()
        .enumerate()
        .map(|(i, &omega)| -> Result<PointReport> {
            let p = p_base.with_omega(omega)?;
            let records = simulate_measurements(&p, grid, shots, task_seed(seed, i as u64))?;
            let data: Vec<(f64, f64, u64)> =
                records.iter().filter_map(|r| condition_record(r).ok()).collect();
            let delta_omega = omega - omega_ep;
            match fit_eigenenergy(&data, p.kappa_q(), p.kappa_p(), Some(omega)) {
                Ok(fit) => {
                    let sp = sensitivity_from_fit(fit.energy, omega, delta_omega)?;
                    Ok(PointReport {
                        omega,
                        delta_omega,
                        re_e: fit.energy.re,
                        im_e: fit.energy.im,
                        s: sp.s,
                        rss: fit.residual_rss,
                        converged: fit.converged,
                        n_points_used: fit.n_points_used,
                    })
                }
                Err(Error::NotConverged { .. }) => Ok(PointReport {
                    omega,
                    delta_omega,
                    re_e: f64::NAN,
                    im_e: f64::NAN,
                    s: f64::NAN,
                    rss: f64::NAN,
                    converged: false,
                    n_points_used: data.len(),
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let sens: Vec<SensitivityPoint> = points
        .iter()
        .filter(|pt| pt.converged)
        .map(|pt| SensitivityPoint { omega_true: pt.omega, delta_omega: pt.delta_omega, s: pt.s })
        .collect();
    let power_law_above = fit_power_law(&sens, EpSide::AboveEP).ok();
    let power_law_below = fit_power_law(&sens, EpSide::BelowEP).ok();

    Ok(CampaignReport {
        schema_version: 1,
        kappa_q: p_base.kappa_q(),
        kappa_p: p_base.kappa_p(),
        omega_ep,
        grid: *grid,
        shots,
        seed,
        points,
        power_law_above,
        power_law_below,
    })
}

/// The default campaign coupling list: the relative offsets applied on
/// both sides of the EP (below-EP points first, ascending in Omega).
pub fn default_omega_list(p_base: &SystemParams) -> Vec<f64> {
    let o0 = p_base.omega_ep();
    let mut below: Vec<f64> = DEFAULT_REL_OFFSETS.iter().rev().map(|x| o0 * (1.0 - x)).collect();
    let above = DEFAULT_REL_OFFSETS.iter().map(|x| o0 * (1.0 + x));
    below.extend(above);
    below
}
