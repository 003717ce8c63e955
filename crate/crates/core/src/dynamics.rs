//! Time evolution: exact no-jump propagator on the single-excitation
//! subspace and a fixed-step RK4 Lindblad integrator on the 3-dimensional
//! space spanned by {|g,0>, |e,0>, |g,1>}.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Density3, PureState2, SystemParams, IDX_E0, IDX_G0, IDX_G1, NORM_FLOOR};
use crate::nh_core::half_splitting;

/// Internal RK4 substep ceiling, us. kappa_p = 5/us gives dt*kappa = 0.01.
pub const DT_INTERNAL_MAX: f64 = 0.002;
/// Max-norm bound for the step-halving accuracy probe.
pub const STEP_PROBE_TOL: f64 = 1e-7;
/// Switch sin(z)/z to its Taylor series below this |z|.
const SINC_SERIES_CUTOFF: f64 = 1e-4;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Uniform time grid on [t0, t_max] with n_points samples (endpoints
/// included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_max: f64, n_points: usize) -> Result<Self> {
        if !(t0.is_finite() && t_max.is_finite()) {
            return Err(Error::NonFinite("TimeGrid"));
        }
        if t0 < 0.0 {
            return Err(Error::NegativeTime(t0));
        }
        if t_max <= t0 {
            return Err(Error::InvalidGrid("t_max must exceed t0"));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid("need at least 2 points"));
        }
        Ok(Self { t0, t_max, n_points })
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t0) / (self.n_points - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.t0 + k as f64 * self.dt()).collect()
    }

    /// Index of the grid point nearest to t (clamped to the grid).
    pub fn nearest_index(&self, t: f64) -> usize {
        let k = ((t - self.t0) / self.dt()).round();
        (k.max(0.0) as usize).min(self.n_points - 1)
    }
}

/// sin(z)/z with a 4-term Taylor series near the origin; analytic in z, so
/// imaginary arguments (overdamped regime) turn it into sinh(|z|)/|z|.
pub fn sinc_c(z: Complex64) -> Complex64 {
    if z.norm() < SINC_SERIES_CUTOFF {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0 - z2 * z2 * z2 / 5040.0
    } else {
        z.sin() / z
    }
}

/// Entries of exp(-i H t) on [|e,0>, |g,1>], as (u11, u12, u22); u21 = u12.
fn propagator_entries(p: &SystemParams, t: f64) -> (Complex64, Complex64, Complex64) {
    let e = half_splitting(p).as_complex();
    let z = e * t;
    let decay = Complex64::new((-p.gamma() * t).exp(), 0.0);
    let c = z.cos();
    let s = sinc_c(z) * t; // sin(Et)/E
    let diag = Complex64::new(p.kappa() / 4.0, 0.0) * s;
    let off = -I * p.omega() * s;
    (decay * (c + diag), decay * off, decay * (c - diag))
}

/// Exact no-jump evolution exp(-i H t) |psi0>. The output norm is not
/// renormalized; its square is the no-jump probability.
pub fn propagate_no_jump(p: &SystemParams, psi0: &PureState2, t: f64) -> Result<PureState2> {
    if !t.is_finite() || !psi0.is_finite() {
        return Err(Error::NonFinite("propagate_no_jump"));
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let (u11, u12, u22) = propagator_entries(p, t);
    Ok(PureState2::new(
        u11 * psi0.c_e0 + u12 * psi0.c_g1,
        u12 * psi0.c_e0 + u22 * psi0.c_g1,
    ))
}

/// Renormalized single-excitation populations (p_e, p_g1) conditioned on
/// no jump having occurred.
pub fn conditioned_populations(psi: &PureState2) -> Result<(f64, f64)> {
    let n = psi.norm_sqr();
    if n <= NORM_FLOOR {
        return Err(Error::VanishedNorm(n));
    }
    Ok((psi.c_e0.norm_sqr() / n, psi.c_g1.norm_sqr() / n))
}

fn hamiltonian3(p: &SystemParams) -> Matrix3<Complex64> {
    let mut h = Matrix3::zeros();
    h[(IDX_E0, IDX_E0)] = -I * p.kappa_q() / 2.0;
    h[(IDX_G1, IDX_G1)] = -I * p.kappa_p() / 2.0;
    h[(IDX_E0, IDX_G1)] = Complex64::new(p.omega(), 0.0);
    h[(IDX_G1, IDX_E0)] = Complex64::new(p.omega(), 0.0);
    h
}

fn rhs(p: &SystemParams, h: &Matrix3<Complex64>, rho: &Matrix3<Complex64>) -> Matrix3<Complex64> {
    // -i (H rho - rho H^dag); the anticommutator halves live in H already
    let mut d = (h * rho - rho * h.adjoint()) * (-I);
    // jump terms: both channels feed the dark state |g,0>
    d[(IDX_G0, IDX_G0)] += rho[(IDX_E0, IDX_E0)] * p.kappa_q() + rho[(IDX_G1, IDX_G1)] * p.kappa_p();
    d
}

/// dRho/dt of the master equation at a single point.
pub fn lindblad_rhs(p: &SystemParams, rho: &Density3) -> Density3 {
    Density3(rhs(p, &hamiltonian3(p), &rho.0))
}

fn rk4_step(
    p: &SystemParams,
    h3: &Matrix3<Complex64>,
    rho: &Matrix3<Complex64>,
    dt: f64,
) -> Matrix3<Complex64> {
    let half = Complex64::new(dt / 2.0, 0.0);
    let full = Complex64::new(dt, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let k1 = rhs(p, h3, rho);
    let k2 = rhs(p, h3, &(rho + k1 * half));
    let k3 = rhs(p, h3, &(rho + k2 * half));
    let k4 = rhs(p, h3, &(rho + k3 * full));
    rho + (k1 + k2 * two + k3 * two + k4) * Complex64::new(dt / 6.0, 0.0)
}

fn integrate_on_grid(
    p: &SystemParams,
    rho0: &Matrix3<Complex64>,
    grid: &TimeGrid,
    refine: usize,
) -> Vec<Matrix3<Complex64>> {
    let h3 = hamiltonian3(p);
    let grid_dt = grid.dt();
    let n_sub = ((grid_dt / DT_INTERNAL_MAX).ceil() as usize).max(1) * refine;
    let dt = grid_dt / n_sub as f64;
    let mut out = Vec::with_capacity(grid.n_points);
    let mut rho = *rho0;
    out.push(rho);
    for _ in 1..grid.n_points {
        for _ in 0..n_sub {
            rho = rk4_step(p, &h3, &rho, dt);
        }
        out.push(rho);
    }
    out
}

fn max_norm_diff(a: &Matrix3<Complex64>, b: &Matrix3<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Fixed-step RK4 integration of the master equation on the grid, with a
/// step-halving accuracy probe at the final time.
pub fn integrate_master(
    p: &SystemParams,
    rho0: &Density3,
    grid: &TimeGrid,
) -> Result<Vec<Density3>> {
    let coarse = integrate_on_grid(p, &rho0.0, grid, 1);
    let fine = integrate_on_grid(p, &rho0.0, grid, 2);
    let err = max_norm_diff(coarse.last().unwrap(), fine.last().unwrap());
    if err > STEP_PROBE_TOL {
        return Err(Error::StepTooLarge { err, tol: STEP_PROBE_TOL });
    }
    Ok(coarse
        .into_iter()
        .map(|m| {
            let mut d = Density3(m);
            d.symmetrize();
            d
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_params;
    use approx::assert_relative_eq;
    use nalgebra::Matrix2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ref_params(omega: f64) -> SystemParams {
        make_params(omega, 0.07, 5.0).unwrap()
    }

    /// Test-only 2x2 matrix exponential by scaling-and-squaring Taylor.
    fn expm2(m: &Matrix2<Complex64>) -> Matrix2<Complex64> {
        let norm = m.iter().map(|c| c.norm()).sum::<f64>();
        let s = (norm.log2().ceil().max(0.0) as u32) + 6;
        let a = m / Complex64::new(2.0f64.powi(s as i32), 0.0);
        let mut term = Matrix2::identity();
        let mut acc: Matrix2<Complex64> = Matrix2::identity();
        for k in 1..25 {
            term = term * a / Complex64::new(k as f64, 0.0);
            acc += term;
        }
        for _ in 0..s {
            acc = acc * acc;
        }
        acc
    }

    fn propagate_oracle(p: &SystemParams, psi0: &PureState2, t: f64) -> PureState2 {
        let h = crate::nh_core::build_hamiltonian(p);
        let u = expm2(&(h * (-I * t)));
        PureState2::new(
            u[(0, 0)] * psi0.c_e0 + u[(0, 1)] * psi0.c_g1,
            u[(1, 0)] * psi0.c_e0 + u[(1, 1)] * psi0.c_g1,
        )
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 2.0, 81).is_ok());
        assert!(TimeGrid::new(-0.1, 2.0, 81).is_err());
        assert!(TimeGrid::new(0.0, 0.0, 81).is_err());
        assert!(TimeGrid::new(0.0, 2.0, 1).is_err());
    }

    #[test]
    fn no_jump_at_ep_matches_limit_formula() {
        let p = ref_params(1.2325);
        let psi = propagate_no_jump(&p, &PureState2::excited(), 1.0).unwrap();
        let decay = (-1.2675f64).exp();
        assert_relative_eq!(psi.c_e0.re, decay * (1.0 + 4.93 / 4.0), max_relative = 1e-10);
        assert!(psi.c_e0.im.abs() < 1e-12);
        assert!(psi.c_g1.re.abs() < 1e-12);
        assert_relative_eq!(psi.c_g1.im, -1.2325 * decay, max_relative = 1e-10);
        // oracle: numerical matrix exponential
        let o = propagate_oracle(&p, &PureState2::excited(), 1.0);
        assert!((psi.c_e0 - o.c_e0).norm() < 1e-10);
        assert!((psi.c_g1 - o.c_g1).norm() < 1e-10);
    }

    #[test]
    fn no_jump_identity_at_t_zero() {
        let psi0 = PureState2::new(Complex64::new(0.6, 0.1), Complex64::new(-0.3, 0.7));
        let psi = propagate_no_jump(&ref_params(1.7), &psi0, 0.0).unwrap();
        assert_eq!(psi, psi0);
    }

    #[test]
    fn no_jump_hermitian_rabi_oscillation() {
        let p = make_params(1.0, 0.0, 0.0).unwrap();
        let psi = propagate_no_jump(&p, &PureState2::excited(), std::f64::consts::FRAC_PI_2).unwrap();
        assert!(psi.c_e0.norm() < 1e-12);
        assert!((psi.c_g1 - Complex64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn no_jump_rejects_negative_time() {
        let r = propagate_no_jump(&ref_params(1.0), &PureState2::excited(), -0.5);
        assert_eq!(r, Err(Error::NegativeTime(-0.5)));
    }

    #[test]
    fn conditioned_populations_examples() {
        let psi = PureState2::new(Complex64::new(0.6287, 0.0), Complex64::new(0.0, -0.3471));
        let (pe, pg) = conditioned_populations(&psi).unwrap();
        assert_relative_eq!(pe, 0.7664, max_relative = 2e-4);
        assert_relative_eq!(pe + pg, 1.0, max_relative = 1e-15);

        let (pe, pg) =
            conditioned_populations(&PureState2::excited()).unwrap();
        assert_eq!((pe, pg), (1.0, 0.0));

        let zero = PureState2::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        assert!(matches!(conditioned_populations(&zero), Err(Error::VanishedNorm(_))));
    }

    #[test]
    fn rhs_dark_state_is_stationary() {
        let d = lindblad_rhs(&ref_params(1.5), &Density3::basis_state(IDX_G0));
        assert!(d.0.iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn rhs_excited_state_bookkeeping() {
        let p = ref_params(1.5);
        let d = lindblad_rhs(&p, &Density3::basis_state(IDX_E0));
        assert_relative_eq!(d.0[(IDX_E0, IDX_E0)].re, -0.07, max_relative = 1e-14);
        assert_relative_eq!(d.0[(IDX_G0, IDX_G0)].re, 0.07, max_relative = 1e-14);
        // coherence sourced at rate -i*Omega
        assert!((d.0[(IDX_G1, IDX_E0)] - Complex64::new(0.0, -1.5)).norm() < 1e-14);
    }

    #[test]
    fn rhs_is_traceless_and_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let psi = PureState2::new(
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
            );
            let rho = Density3::from_pure(&psi);
            let d = lindblad_rhs(&ref_params(rng.gen::<f64>() * 3.0), &rho);
            assert!(d.trace().norm() < 1e-14);
            assert!(d.hermiticity_defect() < 1e-14);
        }
    }

    #[test]
    fn master_dark_state_constant() {
        let grid = TimeGrid::new(0.0, 1.0, 11).unwrap();
        let out = integrate_master(&ref_params(1.5), &Density3::basis_state(IDX_G0), &grid).unwrap();
        for rho in &out {
            assert!((rho.0[(IDX_G0, IDX_G0)].re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn master_matches_no_jump_decomposition() {
        let p = ref_params(1.2325);
        let grid = TimeGrid::new(0.0, 1.0, 21).unwrap();
        let out = integrate_master(&p, &Density3::basis_state(IDX_E0), &grid).unwrap();
        let rho1 = &out[20];
        let psi = propagate_no_jump(&p, &PureState2::excited(), 1.0).unwrap();
        let mut expect = Density3::from_pure(&psi).0;
        expect[(IDX_G0, IDX_G0)] = Complex64::new(1.0 - psi.norm_sqr(), 0.0);
        assert!(max_norm_diff(&rho1.0, &expect) < 1e-8);
    }

    #[test]
    fn master_closed_system_oscillates() {
        let p = make_params(1.0, 0.0, 0.0).unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 41).unwrap();
        let out = integrate_master(&p, &Density3::basis_state(IDX_E0), &grid).unwrap();
        for (rho, t) in out.iter().zip(grid.times()) {
            let (_, pe, pg) = rho.populations();
            assert_relative_eq!(pe, t.cos().powi(2), epsilon = 1e-9);
            assert_relative_eq!(pg, t.sin().powi(2), epsilon = 1e-9);
        }
    }

    #[test]
    fn master_preserves_trace_and_positivity() {
        let grid = TimeGrid::new(0.0, 3.0, 61).unwrap();
        let out = integrate_master(&ref_params(1.2325), &Density3::basis_state(IDX_E0), &grid).unwrap();
        for rho in &out {
            assert!((rho.trace().re - 1.0).abs() < 1e-9);
            assert!(rho.min_eigenvalue() > -1e-9);
            rho.validate().unwrap();
        }
    }

    #[test]
    fn propagator_matches_expm_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 0..1000 {
            let p = make_params(rng.gen::<f64>() * 4.0, rng.gen::<f64>() * 4.0, rng.gen::<f64>() * 6.0)
                .unwrap();
            // include the sinc-series region |Et| in [0, 1e-6]
            let t = if k % 10 == 0 {
                rng.gen::<f64>() * 1e-6 / half_splitting(&p).norm().max(1.0)
            } else {
                rng.gen::<f64>() * 2.0
            };
            let got = propagate_no_jump(&p, &PureState2::excited(), t).unwrap();
            let want = propagate_oracle(&p, &PureState2::excited(), t);
            assert!(
                (got.c_e0 - want.c_e0).norm() < 1e-10 && (got.c_g1 - want.c_g1).norm() < 1e-10,
                "mismatch at p={:?} t={}",
                p,
                t
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn norm_monotone_nonincreasing(
            omega in 0.0f64..4.0,
            kq in 0.0f64..3.0,
            kp in 0.0f64..6.0,
        ) {
            let p = make_params(omega, kq, kp).unwrap();
            let mut last = 1.0f64;
            for k in 0..200 {
                let t = k as f64 * 0.01;
                let n = propagate_no_jump(&p, &PureState2::excited(), t).unwrap().norm_sqr();
                prop_assert!(n <= last + 1e-12, "norm increased at t={}", t);
                prop_assert!(n <= 1.0 + 1e-12 && n >= 0.0);
                last = n;
            }
        }
    }
}
