//! Simulation and estimation toolkit for a dissipative qubit-resonator
//! system operated near its exceptional point (EP).
//!
//! The library covers the full sensing chain:
//!
//! * [`model`] — parameters, unit conventions, canonical eigenenergy branch;
//! * [`nh_core`] — the 2x2 non-Hermitian Hamiltonian, its exact eigensystem,
//!   and the theoretical sensitivity |dE/dOmega|;
//! * [`dynamics`] — exact no-jump propagation and Lindblad integration;
//! * [`trajectories`] — quantum-jump Monte Carlo with no-jump post-selection;
//! * [`estimation`] — finite-shot measurement synthesis, least-squares
//!   eigenenergy extraction, and the near-EP power-law sensitivity fit.
//!
//! All rates are in 1/us, all times in us.

pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod model;
pub mod nh_core;
pub mod rng;
pub mod trajectories;

pub use error::{Error, Result};
pub use model::{
    canonicalize, make_params, ComplexEnergy, Density3, PureState2, SystemParams,
};
pub use nh_core::{
    build_hamiltonian, eigensystem, half_splitting, sensitivity_theory, spectrum_sweep, NHSpectrum,
    SweepRow,
};
pub use dynamics::{
    conditioned_populations, integrate_master, lindblad_rhs, propagate_no_jump, TimeGrid,
};
pub use trajectories::{
    postselect_no_jump, run_ensemble, sample_trajectory, EnsembleStats, FinalState, JumpChannel,
    TrajectoryRecord,
};
pub use estimation::{
    condition_record, fit_eigenenergy, fit_power_law, run_sensing_campaign, sensitivity_from_fit,
    simulate_measurements, CampaignReport, EpSide, FitResult, MeasurementRecord, PointReport,
    PowerLawFit, SensitivityPoint,
};

/// Qubit energy dissipation rate of the reference device, 1/us.
pub const REF_KAPPA_Q: f64 = 0.07;
/// Resonator photon decay rate of the reference device, 1/us.
pub const REF_KAPPA_P: f64 = 5.0;
