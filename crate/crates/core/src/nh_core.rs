//! Non-Hermitian Hamiltonian on the single-excitation subspace: exact
//! eigensystem, half Rabi splitting, EP detection, and the theoretical
//! sensitivity |dE/dOmega|.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ComplexEnergy, SystemParams};

/// |E| below this value counts as "at the exceptional point".
pub const EP_TOL: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Spectral data of the 2x2 non-Hermitian Hamiltonian.
#[derive(Debug, Clone)]
pub struct NHSpectrum {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub half_splitting: ComplexEnergy,
    /// Normalized eigenvectors on the ordered basis [|e,0>, |g,1>].
    pub v_plus: Vector2<Complex64>,
    pub v_minus: Vector2<Complex64>,
    /// Unnormalized amplitude pairs (Omega, -i*kappa/4 +- E).
    pub raw_plus: Vector2<Complex64>,
    pub raw_minus: Vector2<Complex64>,
    /// Normalization constants with v = N * raw.
    pub n_plus: Complex64,
    pub n_minus: Complex64,
    pub is_ep: bool,
}

/// H restricted to the ordered basis [|e,0>, |g,1>]:
/// diagonal (-i*kappa_q/2, -i*kappa_p/2), off-diagonal Omega.
pub fn build_hamiltonian(p: &SystemParams) -> Matrix2<Complex64> {
    let omega = Complex64::new(p.omega(), 0.0);
    Matrix2::new(
        -I * p.kappa_q() / 2.0,
        omega,
        omega,
        -I * p.kappa_p() / 2.0,
    )
}

/// Half the vacuum Rabi splitting, E = sqrt(Omega^2 - kappa^2/16), on the
/// canonical branch: real above the EP, purely imaginary (im < 0) below.
pub fn half_splitting(p: &SystemParams) -> ComplexEnergy {
    let x = p.omega() * p.omega() - p.kappa() * p.kappa() / 16.0;
    if x >= 0.0 {
        ComplexEnergy::new(x.sqrt(), 0.0)
    } else {
        ComplexEnergy::new(0.0, -(-x).sqrt())
    }
}

/// Deterministic gauge: unit 2-norm, first component of modulus > 1e-14
/// made real positive.
fn fix_gauge(v: Vector2<Complex64>) -> (Vector2<Complex64>, Complex64) {
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let lead = if v[0].norm() > 1e-14 { v[0] } else { v[1] };
    let phase = lead / lead.norm();
    let scale = (Complex64::new(norm, 0.0) * phase).inv();
    (v.map(|c| c * scale), scale)
}

/// Exact eigensystem: lambda_+- = -i*Gamma +- E with eigenvectors
/// proportional to (Omega, -i*kappa/4 +- E). At the EP the coalesced vector
/// is returned in both slots and `is_ep` is set.
pub fn eigensystem(p: &SystemParams) -> NHSpectrum {
    let e = half_splitting(p);
    let ec = e.as_complex();
    let center = -I * p.gamma();
    let is_ep = e.norm() < EP_TOL;

    let omega = Complex64::new(p.omega(), 0.0);
    let mk4 = -I * p.kappa() / 4.0;
    let mut raw_plus = Vector2::new(omega, mk4 + ec);
    let mut raw_minus = Vector2::new(omega, mk4 - ec);
    // When Omega = 0 one of the pairs degenerates to the zero vector; the
    // second-row form (i*kappa/4 +- E, Omega) supplies the eigenvector.
    let floor = 1e-14 * (p.omega().abs() + p.kappa().abs() + EP_TOL);
    if (raw_plus[0].norm_sqr() + raw_plus[1].norm_sqr()).sqrt() <= floor {
        raw_plus = Vector2::new(-mk4 + ec, omega);
    }
    if (raw_minus[0].norm_sqr() + raw_minus[1].norm_sqr()).sqrt() <= floor {
        raw_minus = Vector2::new(-mk4 - ec, omega);
    }
    if is_ep {
        raw_minus = raw_plus;
    }

    let (v_plus, n_plus) = fix_gauge(raw_plus);
    let (v_minus, n_minus) = fix_gauge(raw_minus);

    NHSpectrum {
        lambda_plus: center + ec,
        lambda_minus: center - ec,
        half_splitting: e,
        v_plus,
        v_minus,
        raw_plus,
        raw_minus,
        n_plus,
        n_minus,
        is_ep,
    }
}

/// Theoretical sensitivity S = |dE/dOmega| = Omega / |E|.
pub fn sensitivity_theory(p: &SystemParams) -> Result<f64> {
    let e = half_splitting(p).norm();
    if e < EP_TOL {
        return Err(Error::AtExceptionalPoint);
    }
    Ok(p.omega() / e)
}

/// One row of a coupling sweep.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SweepRow {
    pub omega: f64,
    pub delta_omega: f64,
    pub re_e: f64,
    pub im_e: f64,
    /// Absent at the EP, where S diverges.
    pub s_theory: Option<f64>,
}

/// Evaluate the splitting and theoretical sensitivity over a coupling grid.
pub fn spectrum_sweep(p_base: &SystemParams, omega_grid: &[f64]) -> Result<Vec<SweepRow>> {
    let omega_ep = p_base.omega_ep();
    omega_grid
        .iter()
        .map(|&omega| {
            let p = p_base.with_omega(omega)?;
            let e = half_splitting(&p);
            Ok(SweepRow {
                omega,
                delta_omega: omega - omega_ep,
                re_e: e.re,
                im_e: e.im,
                s_theory: sensitivity_theory(&p).ok(),
            })
        })
        .collect()
}
