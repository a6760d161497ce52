//! Projected gradient ascent on the normalization sphere.
//!
//! Steps follow the tangent-projected gradient, clamp to f >= 0 and
//! renormalize. The step size backtracks on failure and grows on success,
//! starting from a scale-free value so solves at different coefficients c
//! behave covariantly.

use super::functional::Functional;

pub struct AscentOutcome {
    pub value: f64,
    pub profile: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

pub fn ascend(
    fun: &Functional,
    f: &mut Vec<f64>,
    max_iters: usize,
    tol_grad: f64,
    tol_value: f64,
) -> AscentOutcome {
    for v in f.iter_mut() {
        *v = v.abs();
    }
    fun.normalize(f);
    let mut ev = fun.evaluate(f);
    let gnorm0: f64 = ev.gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
    let fnorm0: f64 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut step = fnorm0 / gnorm0.max(1e-300);
    let mut grad_norm = f64::INFINITY;
    for it in 1..=max_iters {
        // tangent projection in the quadrature metric, then the bound
        // constraint f >= 0: a negative component at a zero node points
        // outside the feasible set and does not count against optimality
        let nf: Vec<f64> = fun.grid.w_norm.iter().zip(f.iter()).map(|(w, v)| w * v).collect();
        let gn_dot: f64 = ev.gradient.iter().zip(&nf).map(|(g, n)| g * n).sum();
        let nn_dot: f64 = nf.iter().map(|n| n * n).sum();
        let lambda = gn_dot / nn_dot.max(1e-300);
        let mut g2 = 0.0;
        for ((g, n), &fi) in ev.gradient.iter_mut().zip(&nf).zip(f.iter()) {
            *g -= lambda * n;
            if fi <= 0.0 && *g < 0.0 {
                *g = 0.0;
            }
            g2 += *g * *g;
        }
        grad_norm = g2.sqrt();
        let mut trial: Vec<f64> = f
            .iter()
            .zip(&ev.gradient)
            .map(|(v, g)| (v + step * g).max(0.0))
            .collect();
        fun.normalize(&mut trial);
        let ev_trial = fun.evaluate(&trial);
        if ev_trial.value > ev.value {
            let gain = ev_trial.value - ev.value;
            *f = trial;
            ev = ev_trial;
            step *= 1.25;
            if grad_norm < tol_grad && gain < tol_value {
                return AscentOutcome {
                    value: ev.value,
                    profile: std::mem::take(f),
                    iterations: it,
                    grad_norm,
                    converged: true,
                };
            }
        } else {
            step *= 0.5;
            if step * grad_norm < 1e-22 {
                return AscentOutcome {
                    value: ev.value,
                    profile: std::mem::take(f),
                    iterations: it,
                    grad_norm,
                    converged: true,
                };
            }
        }
    }
    AscentOutcome {
        value: ev.value,
        profile: std::mem::take(f),
        iterations: max_iters,
        grad_norm,
        converged: false,
    }
}
