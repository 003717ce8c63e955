//! Monte Carlo quantum-jump unraveling of the master equation with
//! post-selection on the no-jump branch.
//!
//! Both jump channels terminate in the dark state |g,0>, so a trajectory
//! carries at most one jump. The first-jump time is sampled exactly from
//! the analytic no-jump norm by bisection on the norm threshold.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{propagate_no_jump, TimeGrid};
use crate::error::{Error, Result};
use crate::model::{Density3, PureState2, SystemParams, IDX_G0};
use crate::rng::task_rng;

/// Bisection width for locating the jump time, us.
pub const JUMP_TIME_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpChannel {
    QubitDecay,
    PhotonLoss,
}

/// Final state of a single trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FinalState {
    /// Normalized single-excitation state (no jump occurred).
    Pure(PureState2),
    /// The dark state |g,0> after a jump.
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub jumped: bool,
    pub jump_time: Option<f64>,
    pub jump_channel: Option<JumpChannel>,
    pub final_state: FinalState,
}

/// Per-grid-point ensemble statistics.
#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub n_traj: u64,
    pub grid: TimeGrid,
    /// Surviving (not yet jumped) trajectory counts per grid point.
    pub survivor_counts: Vec<u64>,
    /// Counts of |e,0> outcomes among sampled survivor measurements.
    pub e0_counts: Vec<u64>,
    /// survivor_counts / n_traj.
    pub survival_fraction: Vec<f64>,
    /// e0_counts / survivor_counts (NaN where no survivors).
    pub conditioned_p_e: Vec<f64>,
    pub conditioned_p_g1: Vec<f64>,
    /// Unconditioned ensemble-averaged density matrix per grid point.
    pub rho_bar: Vec<Density3>,
}

fn norm_sqr_at(p: &SystemParams, t: f64) -> f64 {
    propagate_no_jump(p, &PureState2::excited(), t)
        .expect("t >= 0 by construction")
        .norm_sqr()
}

/// Sample one trajectory from |e,0> over the grid span. The jump threshold
/// r is drawn once; the crossing of the no-jump norm below r is located by
/// bisection, then a channel is drawn with weights kappa_q*|c_e0|^2 and
/// kappa_p*|c_g1|^2 at the jump instant.
pub fn sample_trajectory(p: &SystemParams, grid: &TimeGrid, seed: u64) -> TrajectoryRecord {
    let mut rng = task_rng(seed, 0);
    sample_with_rng(p, grid, &mut rng)
}

fn sample_with_rng<R: Rng>(p: &SystemParams, grid: &TimeGrid, rng: &mut R) -> TrajectoryRecord {
    let r: f64 = rng.gen_range(f64::EPSILON..1.0);
    if norm_sqr_at(p, grid.t_max) >= r {
        let psi = propagate_no_jump(p, &PureState2::excited(), grid.t_max).unwrap();
        let normalized = psi.normalized().unwrap_or(PureState2::excited());
        return TrajectoryRecord {
            jumped: false,
            jump_time: None,
            jump_channel: None,
            final_state: FinalState::Pure(normalized),
        };
    }
    // norm is non-increasing from 1 at t = 0; bracket and bisect
    let (mut lo, mut hi) = (0.0f64, grid.t_max);
    while hi - lo > JUMP_TIME_TOL {
        let mid = 0.5 * (lo + hi);
        if norm_sqr_at(p, mid) < r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t_jump = 0.5 * (lo + hi);
    let psi = propagate_no_jump(p, &PureState2::excited(), t_jump).unwrap();
    let w_q = p.kappa_q() * psi.c_e0.norm_sqr();
    let w_p = p.kappa_p() * psi.c_g1.norm_sqr();
    let channel = if w_q + w_p <= 0.0 {
        // degenerate weights cannot occur for a genuine norm loss; fall
        // back on the larger raw rate
        if p.kappa_q() >= p.kappa_p() { JumpChannel::QubitDecay } else { JumpChannel::PhotonLoss }
    } else if rng.gen_range(0.0..1.0) * (w_q + w_p) < w_q {
        JumpChannel::QubitDecay
    } else {
        JumpChannel::PhotonLoss
    };
    TrajectoryRecord {
        jumped: true,
        jump_time: Some(t_jump),
        jump_channel: Some(channel),
        final_state: FinalState::Dark,
    }
}

struct TrajectoryTally {
    survivors: Vec<u64>,
    e0: Vec<u64>,
}

impl TrajectoryTally {
    fn zero(n: usize) -> Self {
        Self { survivors: vec![0; n], e0: vec![0; n] }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.survivors.iter_mut().zip(other.survivors) {
            *a += b;
        }
        for (a, b) in self.e0.iter_mut().zip(other.e0) {
            *a += b;
        }
        self
    }
}

/// Run one trajectory and, at every grid point where it has not jumped,
/// sample a projective single-excitation outcome.
fn tally_one(p: &SystemParams, grid: &TimeGrid, times: &[f64], seed: u64, index: u64) -> TrajectoryTally {
    let mut rng = task_rng(seed, index);
    let record = sample_with_rng(p, grid, &mut rng);
    let cutoff = record.jump_time.unwrap_or(f64::INFINITY);
    let mut tally = TrajectoryTally::zero(times.len());
    for (k, &t) in times.iter().enumerate() {
        if t >= cutoff {
            break;
        }
        tally.survivors[k] = 1;
        let psi = propagate_no_jump(p, &PureState2::excited(), t).unwrap();
        let p_e = psi.c_e0.norm_sqr() / psi.norm_sqr();
        if rng.gen_range(0.0..1.0) < p_e {
            tally.e0[k] = 1;
        }
    }
    tally
}

/// Simulate an ensemble. Per-trajectory seeds are derived from the master
/// seed and the trajectory index, and all tallies are integer counts, so
/// the result is bit-identical for any worker count.
pub fn run_ensemble(p: &SystemParams, grid: &TimeGrid, n_traj: u64, seed: u64) -> EnsembleStats {
    let times = grid.times();
    let n = times.len();
    let tally = (0..n_traj)
        .into_par_iter()
        .map(|i| tally_one(p, grid, &times, seed, i))
        .reduce(|| TrajectoryTally::zero(n), TrajectoryTally::merge);

    let survival_fraction: Vec<f64> =
        tally.survivors.iter().map(|&s| s as f64 / n_traj as f64).collect();
    let conditioned_p_e: Vec<f64> = tally
        .survivors
        .iter()
        .zip(&tally.e0)
        .map(|(&s, &e)| if s > 0 { e as f64 / s as f64 } else { f64::NAN })
        .collect();
    let conditioned_p_g1: Vec<f64> = conditioned_p_e.iter().map(|pe| 1.0 - pe).collect();

    let rho_bar: Vec<Density3> = times
        .iter()
        .zip(&tally.survivors)
        .map(|(&t, &s)| {
            let psi = propagate_no_jump(p, &PureState2::excited(), t).unwrap();
            let pure = psi.normalized().map(|n| Density3::from_pure(&n)).unwrap_or_else(Density3::zero);
            let frac = s as f64 / n_traj as f64;
            let mut m = pure.0 * num_complex::Complex64::new(frac, 0.0);
            m[(IDX_G0, IDX_G0)] += num_complex::Complex64::new(1.0 - frac, 0.0);
            Density3(m)
        })
        .collect();

    EnsembleStats {
        n_traj,
        grid: *grid,
        survivor_counts: tally.survivors,
        e0_counts: tally.e0,
        survival_fraction,
        conditioned_p_e,
        conditioned_p_g1,
        rho_bar,
    }
}

/// Post-selected populations among survivors at the grid point nearest t.
pub fn postselect_no_jump(stats: &EnsembleStats, t: f64) -> Result<(f64, f64, f64)> {
    let k = stats.grid.nearest_index(t);
    if stats.survivor_counts[k] == 0 {
        return Err(Error::NoSurvivors(t));
    }
    Ok((
        stats.conditioned_p_e[k],
        stats.conditioned_p_g1[k],
        stats.survival_fraction[k],
    ))
}
