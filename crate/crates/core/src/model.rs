//! Shared domain types: system parameters, complex eigenenergies with a
//! canonical branch, pure states on the single-excitation subspace, and
//! 3x3 density matrices.
//!
//! Unit convention: all rates and couplings are in 1/us (angular frequency),
//! all times in us. No 2*pi conversions are applied anywhere.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hermiticity tolerance for [`Density3`] validation.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Unit-trace tolerance for [`Density3`] under integration.
pub const TRACE_TOL: f64 = 1e-9;
/// Positivity tolerance (smallest eigenvalue) for [`Density3`].
pub const POSITIVITY_TOL: f64 = -1e-9;
/// Norm floor below which conditioning on the no-jump branch is refused.
pub const NORM_FLOOR: f64 = 1e-12;

/// Physical parameters of the dissipative qubit-resonator system.
///
/// `omega` is the resonant coupling strength, `kappa_q` the qubit energy
/// dissipation rate, `kappa_p` the resonator photon decay rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    omega: f64,
    kappa_q: f64,
    kappa_p: f64,
}

impl SystemParams {
    /// Validate and construct.
    pub fn new(omega: f64, kappa_q: f64, kappa_p: f64) -> Result<Self> {
        for (name, v) in [("omega", omega), ("kappa_q", kappa_q), ("kappa_p", kappa_p)] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
            if v < 0.0 {
                return Err(Error::NegativeRate { name, value: v });
            }
        }
        Ok(Self { omega, kappa_q, kappa_p })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn kappa_q(&self) -> f64 {
        self.kappa_q
    }

    pub fn kappa_p(&self) -> f64 {
        self.kappa_p
    }

    /// Loss imbalance kappa = kappa_p - kappa_q (may be negative).
    pub fn kappa(&self) -> f64 {
        self.kappa_p - self.kappa_q
    }

    /// Common damping Gamma = (kappa_q + kappa_p) / 4, the -i*Gamma offset
    /// shared by both eigenvalues.
    pub fn gamma(&self) -> f64 {
        (self.kappa_q + self.kappa_p) / 4.0
    }

    /// Exceptional-point coupling Omega_0 = |kappa| / 4.
    pub fn omega_ep(&self) -> f64 {
        self.kappa().abs() / 4.0
    }

    /// Same losses, different coupling.
    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(omega, self.kappa_q, self.kappa_p)
    }
}

/// Validated constructor for [`SystemParams`].
pub fn make_params(omega: f64, kappa_q: f64, kappa_p: f64) -> Result<SystemParams> {
    SystemParams::new(omega, kappa_q, kappa_p)
}

/// Half of the vacuum Rabi splitting, E = sqrt(Omega^2 - kappa^2/16).
///
/// Canonical branch: `re >= 0`, and `im <= 0` when `re == 0`. Above the EP
/// the value is real; below it, purely imaginary with negative imaginary
/// part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnergy {
    pub re: f64,
    pub im: f64,
}

impl ComplexEnergy {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn norm(&self) -> f64 {
        self.as_complex().norm()
    }

    /// Resolve the square-root sign ambiguity: flip the global sign so that
    /// `re >= 0`, breaking the `re == 0` tie toward `im <= 0`. Idempotent.
    pub fn canonicalize(self) -> Result<Self> {
        if !self.re.is_finite() || !self.im.is_finite() {
            return Err(Error::NonFinite("ComplexEnergy"));
        }
        let flip = self.re < 0.0 || (self.re == 0.0 && self.im > 0.0);
        if flip {
            Ok(Self { re: -self.re, im: -self.im })
        } else {
            // normalize -0.0 so canonical forms compare bitwise
            Ok(Self { re: self.re + 0.0, im: self.im + 0.0 })
        }
    }
}

/// Canonicalize a complex eigenenergy (free-function form).
pub fn canonicalize(e: ComplexEnergy) -> Result<ComplexEnergy> {
    e.canonicalize()
}

/// Unnormalized amplitudes on the single-excitation subspace
/// {|e,0>, |g,1>}. The squared norm is the accumulated no-jump probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState2 {
    pub c_e0: Complex64,
    pub c_g1: Complex64,
}

impl PureState2 {
    pub fn new(c_e0: Complex64, c_g1: Complex64) -> Self {
        Self { c_e0, c_g1 }
    }

    /// Initial state |e,0>.
    pub fn excited() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// Squared norm |c_e0|^2 + |c_g1|^2.
    pub fn norm_sqr(&self) -> f64 {
        self.c_e0.norm_sqr() + self.c_g1.norm_sqr()
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm_sqr().sqrt();
        if n <= NORM_FLOOR {
            return None;
        }
        Some(Self::new(self.c_e0 / n, self.c_g1 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.c_e0.re.is_finite()
            && self.c_e0.im.is_finite()
            && self.c_g1.re.is_finite()
            && self.c_g1.im.is_finite()
    }
}

/// Basis index of |g,0> in the 3-dimensional space.
pub const IDX_G0: usize = 0;
/// Basis index of |e,0>.
pub const IDX_E0: usize = 1;
/// Basis index of |g,1>.
pub const IDX_G1: usize = 2;

/// 3x3 density matrix on the ordered basis [|g,0>, |e,0>, |g,1>].
#[derive(Debug, Clone, PartialEq)]
pub struct Density3(pub Matrix3<Complex64>);

impl Density3 {
    pub fn zero() -> Self {
        Self(Matrix3::zeros())
    }

    /// Pure basis state |k><k|.
    pub fn basis_state(k: usize) -> Self {
        let mut m = Matrix3::zeros();
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Self(m)
    }

    /// Projector onto a (possibly unnormalized) single-excitation state,
    /// embedded with zero weight on |g,0>.
    pub fn from_pure(psi: &PureState2) -> Self {
        let mut m = Matrix3::zeros();
        let amps = [Complex64::new(0.0, 0.0), psi.c_e0, psi.c_g1];
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = amps[i] * amps[j].conj();
            }
        }
        Self(m)
    }

    pub fn trace(&self) -> Complex64 {
        self.0[(0, 0)] + self.0[(1, 1)] + self.0[(2, 2)]
    }

    /// Largest absolute deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let d = (self.0[(i, j)] - self.0[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Smallest eigenvalue, assuming Hermiticity.
    pub fn min_eigenvalue(&self) -> f64 {
        let eig = self.0.symmetric_eigenvalues();
        eig.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Replace by the Hermitian part (rho + rho^dagger) / 2.
    pub fn symmetrize(&mut self) {
        let h = (self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        self.0 = h;
    }

    /// Population vector (p_g0, p_e0, p_g1).
    pub fn populations(&self) -> (f64, f64, f64) {
        (
            self.0[(IDX_G0, IDX_G0)].re,
            self.0[(IDX_E0, IDX_E0)].re,
            self.0[(IDX_G1, IDX_G1)].re,
        )
    }

    /// Check the Hermiticity / trace / positivity invariants.
    pub fn validate(&self) -> Result<()> {
        if self.hermiticity_defect() > HERMITICITY_TOL {
            return Err(Error::NonFinite("Density3: not Hermitian"));
        }
        if (self.trace().re - 1.0).abs() > TRACE_TOL || self.trace().im.abs() > TRACE_TOL {
            return Err(Error::NonFinite("Density3: trace not 1"));
        }
        if self.min_eigenvalue() < POSITIVITY_TOL {
            return Err(Error::NonFinite("Density3: not positive"));
        }
        Ok(())
    }
}
