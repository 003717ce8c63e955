//! Minimal 2-D Nelder-Mead simplex minimizer with deterministic behavior.

/// Convergence thresholds: simplex diameter and objective improvement.
pub const DIAMETER_TOL: f64 = 1e-9;
pub const FVAL_TOL: f64 = 1e-12;
pub const MAX_ITERS: usize = 4000;

const ALPHA: f64 = 1.0; // reflection
const GAMMA: f64 = 2.0; // expansion
const RHO: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink

#[derive(Debug, Clone, Copy)]
pub struct SimplexOutcome {
    pub x: [f64; 2],
    pub fmin: f64,
    #[allow(dead_code)]
    pub iters: usize,
    pub converged: bool,
}

fn diameter(simplex: &[[f64; 2]; 3]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let dx = simplex[i][0] - simplex[j][0];
            let dy = simplex[i][1] - simplex[j][1];
            d = d.max((dx * dx + dy * dy).sqrt());
        }
    }
    d
}

/// Minimize `f` starting from `x0` with initial simplex scale `h`.
pub fn minimize<F: FnMut(&[f64; 2]) -> f64>(mut f: F, x0: [f64; 2], h: f64) -> SimplexOutcome {
    let mut simplex = [
        x0,
        [x0[0] + h, x0[1]],
        [x0[0], x0[1] + h],
    ];
    let mut fv = [f(&simplex[0]), f(&simplex[1]), f(&simplex[2])];

    let mut iters = 0;
    let mut converged = false;
    while iters < MAX_ITERS {
        iters += 1;
        // order best..worst
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| fv[a].total_cmp(&fv[b]));
        let ordered = [simplex[idx[0]], simplex[idx[1]], simplex[idx[2]]];
        let fo = [fv[idx[0]], fv[idx[1]], fv[idx[2]]];
        simplex = ordered;
        fv = fo;

        if diameter(&simplex) < DIAMETER_TOL && (fv[2] - fv[0]).abs() < FVAL_TOL {
            converged = true;
            break;
        }

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let refl = [
            centroid[0] + ALPHA * (centroid[0] - simplex[2][0]),
            centroid[1] + ALPHA * (centroid[1] - simplex[2][1]),
        ];
        let fr = f(&refl);

        if fr < fv[0] {
            let exp = [
                centroid[0] + GAMMA * (refl[0] - centroid[0]),
                centroid[1] + GAMMA * (refl[1] - centroid[1]),
            ];
            let fe = f(&exp);
            if fe < fr {
                simplex[2] = exp;
                fv[2] = fe;
            } else {
                simplex[2] = refl;
                fv[2] = fr;
            }
        } else if fr < fv[1] {
            simplex[2] = refl;
            fv[2] = fr;
        } else {
            let contr = [
                centroid[0] + RHO * (simplex[2][0] - centroid[0]),
                centroid[1] + RHO * (simplex[2][1] - centroid[1]),
            ];
            let fc = f(&contr);
            if fc < fv[2] {
                simplex[2] = contr;
                fv[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = [
                        simplex[0][0] + SIGMA * (simplex[k][0] - simplex[0][0]),
                        simplex[0][1] + SIGMA * (simplex[k][1] - simplex[0][1]),
                    ];
                    fv[k] = f(&simplex[k]);
                }
            }
        }
    }

    let mut best = 0;
    for k in 1..3 {
        if fv[k] < fv[best] {
            best = k;
        }
    }
    SimplexOutcome { x: simplex[best], fmin: fv[best], iters, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let out = minimize(|x| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.25).powi(2), [0.0, 0.0], 0.5);
        assert!(out.converged);
        assert!((out.x[0] - 1.5).abs() < 1e-7);
        assert!((out.x[1] + 0.25).abs() < 1e-7);
    }

    #[test]
    fn rosenbrock_converges() {
        let out = minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            [-1.2, 1.0],
            0.5,
        );
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64; 2]| x[0].powi(2) + x[1].powi(2) + (x[0] * 3.0).sin() * 0.1;
        let a = minimize(f, [2.0, -1.0], 0.3);
        let b = minimize(f, [2.0, -1.0], 0.3);
        assert_eq!(a.x, b.x);
        assert_eq!(a.iters, b.iters);
    }
}
