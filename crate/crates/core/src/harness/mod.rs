//! Reproducible experiment driver: Lyapunov slope fitting, asymptotic and
//! intermittency scans, staged runs with manifests and plot-ready CSV.

pub mod config;
pub mod csvout;
mod manifest;
mod stages;

pub use manifest::{replay_manifest, RunManifest};
pub use stages::{run_config_file, run_config_text, RunOutcome};

use crate::error::{Error, Result};
use crate::kernels::green_value;
use crate::pam::{feynman_kac_curves, MomentCurve, PamConfig};
use crate::stats::{jackknife_stderr, wls_line};

/// Fitted annealed Lyapunov exponent over a finite window.
#[derive(Debug, Clone)]
pub struct LyapunovEstimate {
    pub p: u32,
    pub kappa: f64,
    pub rho: f64,
    pub slope: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub samples: usize,
    pub guard_ok: bool,
    /// False when any grid point has relative stderr above 25%.
    pub usable: bool,
}

/// Sampling budget for one Lyapunov fit.
#[derive(Debug, Clone)]
pub struct LyapunovBudget {
    pub side: usize,
    pub samples: usize,
    pub batches: usize,
    pub grid_points: usize,
    pub seed: u64,
    pub stream_base: u64,
}

impl Default for LyapunovBudget {
    fn default() -> Self {
        Self { side: 12, samples: 20_000, batches: 100, grid_points: 4, seed: 1, stream_base: 0 }
    }
}

pub fn time_grid(window: (f64, f64), points: usize) -> Result<Vec<f64>> {
    if !(window.0 > 0.0 && window.0 < window.1) || points < 2 {
        return Err(Error::domain("need 0 < t_min < t_max and at least two grid points"));
    }
    Ok((0..points)
        .map(|i| window.0 + (window.1 - window.0) * i as f64 / (points - 1) as f64)
        .collect())
}

/// Weighted slope of (1/p) log-moment against t, with delta-method
/// weights and jackknife-over-batches stderr.
pub fn fit_lyapunov_slope(curve: &MomentCurve) -> (f64, f64, bool) {
    let p = curve.order as f64;
    let nb = curve.n_batches();
    let mut ys = Vec::with_capacity(curve.times.len());
    let mut vars = Vec::with_capacity(curve.times.len());
    let mut usable = true;
    for ti in 0..curve.times.len() {
        let est = curve.estimate(ti);
        let rel = est.stderr / est.mean;
        if rel > 0.25 {
            usable = false;
        }
        ys.push(est.log_mean / p);
        vars.push((rel / p) * (rel / p));
    }
    let (slope, _) = wls_line(&curve.times, &ys, &vars);
    let slope_without = |skip: usize| {
        let mut ys_k = Vec::with_capacity(curve.times.len());
        for ti in 0..curve.times.len() {
            let bm = &curve.batch_means[ti];
            let mut acc = 0.0;
            for (b, &m) in bm.iter().enumerate() {
                if b != skip {
                    acc += m;
                }
            }
            ys_k.push((acc / (nb - 1) as f64).ln() / p);
        }
        wls_line(&curve.times, &ys_k, &vars).0
    };
    let se = jackknife_stderr(nb, slope, slope_without);
    (slope, se, usable)
}

/// Slope of the rescaled representation: fits log E exp[(1/kappa) int phi]
/// against the rescaled clock kappa t on the same samples. By the clock
/// identity, kappa^2 * this slope equals kappa (lambda_p - rho).
pub fn fit_lambda_star_slope(curve: &MomentCurve, kappa: f64, rho: f64) -> f64 {
    let p = curve.order as f64;
    let mut ts = Vec::with_capacity(curve.times.len());
    let mut ys = Vec::with_capacity(curve.times.len());
    let mut vars = Vec::with_capacity(curve.times.len());
    for ti in 0..curve.times.len() {
        let est = curve.estimate(ti);
        let rel = est.stderr / est.mean;
        ts.push(kappa * est.time);
        ys.push((est.log_mean - p * rho * est.time) / p);
        vars.push((rel / p) * (rel / p));
    }
    wls_line(&ts, &ys, &vars).0
}

/// Estimate lambda_p over the window via the Feynman-Kac route.
pub fn estimate_lyapunov(
    kappa: f64,
    rho: f64,
    p: u32,
    window: (f64, f64),
    budget: &LyapunovBudget,
) -> Result<LyapunovEstimate> {
    let grid = time_grid(window, budget.grid_points)?;
    let cfg = PamConfig {
        kappa,
        rho,
        p,
        t_final: window.1,
        side: budget.side,
        samples: budget.samples,
        batches: budget.batches,
        seed: budget.seed,
        stream_base: budget.stream_base,
        ..PamConfig::default()
    };
    let curves = feynman_kac_curves(&cfg, &grid)?;
    let curve = &curves[p as usize - 1];
    let (slope, stderr, usable) = fit_lyapunov_slope(curve);
    Ok(LyapunovEstimate {
        p,
        kappa,
        rho,
        slope,
        stderr,
        window,
        samples: curve.samples,
        guard_ok: curve.guard_ok,
        usable,
    })
}

/// Right-hand side of the large-kappa asymptote:
/// (1/6) rho (1-rho) G + [6 rho (1-rho) p]^2 P3, with P3 expressed through
/// the unit-coefficient value and the quadratic coefficient law.
pub fn theorem_rhs(rho: f64, p: u32, p3_unit: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::domain("rho must lie in [0,1]"));
    }
    if p == 0 {
        return Err(Error::domain("p must be >= 1"));
    }
    let g0 = green_value([0, 0, 0])?;
    let q = rho * (1.0 - rho);
    let c = 6.0 * q * p as f64;
    Ok(q * g0 / 6.0 + c * c * p3_unit)
}

/// One row of the asymptotic scan.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub kappa: f64,
    pub lambda: f64,
    pub se: f64,
    /// kappa (lambda_p - rho)
    pub scaled: f64,
    pub scaled_se: f64,
    pub rhs: f64,
    pub guard_ok: bool,
    pub usable: bool,
}

/// kappa-scan of kappa (lambda_p - rho) against the asymptote.
pub fn asymptotic_scan(
    rho: f64,
    p: u32,
    plans: &[(f64, (f64, f64), LyapunovBudget)],
    p3_unit: f64,
) -> Result<Vec<ScanRow>> {
    let rhs = theorem_rhs(rho, p, p3_unit)?;
    let mut rows = Vec::with_capacity(plans.len());
    for (kappa, window, budget) in plans {
        let est = estimate_lyapunov(*kappa, rho, p, *window, budget)?;
        rows.push(ScanRow {
            kappa: *kappa,
            lambda: est.slope,
            se: est.stderr,
            scaled: kappa * (est.slope - rho),
            scaled_se: kappa * est.stderr,
            rhs,
            guard_ok: est.guard_ok,
            usable: est.usable,
        });
    }
    Ok(rows)
}

/// One row of the intermittency scan: the gap lambda_2 - lambda_1 with a
/// jackknife stderr that respects the shared randomness of the two
/// estimates (common catalyst and first walker).
#[derive(Debug, Clone)]
pub struct IntermittencyRow {
    pub kappa: f64,
    pub lambda1: f64,
    pub se1: f64,
    pub lambda2: f64,
    pub se2: f64,
    pub gap: f64,
    pub gap_se: f64,
}

pub fn intermittency_point(
    kappa: f64,
    rho: f64,
    window: (f64, f64),
    budget: &LyapunovBudget,
) -> Result<IntermittencyRow> {
    let grid = time_grid(window, budget.grid_points)?;
    let cfg = PamConfig {
        kappa,
        rho,
        p: 2,
        t_final: window.1,
        side: budget.side,
        samples: budget.samples,
        batches: budget.batches,
        seed: budget.seed,
        stream_base: budget.stream_base,
        ..PamConfig::default()
    };
    let curves = feynman_kac_curves(&cfg, &grid)?;
    let (l1, se1, _) = fit_lyapunov_slope(&curves[0]);
    let (l2, se2, _) = fit_lyapunov_slope(&curves[1]);
    // jackknife on the gap itself: the curves share batches
    let nb = curves[0].n_batches();
    let gap_without = |skip: usize| {
        let one = slope_from_curve_excluding(&curves[0], skip);
        let two = slope_from_curve_excluding(&curves[1], skip);
        two - one
    };
    let gap = l2 - l1;
    let gap_se = jackknife_stderr(nb, gap, gap_without);
    Ok(IntermittencyRow { kappa, lambda1: l1, se1, lambda2: l2, se2, gap, gap_se })
}

fn slope_from_curve_excluding(curve: &MomentCurve, skip: usize) -> f64 {
    let p = curve.order as f64;
    let nb = curve.n_batches();
    let mut ys = Vec::with_capacity(curve.times.len());
    let mut vars = Vec::with_capacity(curve.times.len());
    for ti in 0..curve.times.len() {
        let est = curve.estimate(ti);
        let rel = est.stderr / est.mean;
        vars.push((rel / p) * (rel / p));
        let bm = &curve.batch_means[ti];
        let mut acc = 0.0;
        for (b, &m) in bm.iter().enumerate() {
            if b != skip {
                acc += m;
            }
        }
        ys.push((acc / (nb - 1) as f64).ln() / p);
    }
    wls_line(&curve.times, &ys, &vars).0
}

pub fn intermittency_scan(
    rho: f64,
    plans: &[(f64, (f64, f64), LyapunovBudget)],
) -> Result<Vec<IntermittencyRow>> {
    plans
        .iter()
        .map(|(kappa, window, budget)| intermittency_point(*kappa, rho, *window, budget))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_fitter_recovers_exact_exponential() {
        // synthetic exactly-exponential data: batch means all equal e^{mu t}
        let mu = 0.734;
        let times: Vec<f64> = vec![0.5, 1.0, 1.5, 2.0];
        let batch_means: Vec<Vec<f64>> =
            times.iter().map(|t| vec![(mu * *t).exp(); 8]).collect();
        let curve = MomentCurve { order: 1, times, batch_means, samples: 8, guard_ok: true };
        let (slope, se, usable) = fit_lyapunov_slope(&curve);
        assert!((slope - mu).abs() < 1e-12, "slope {slope}");
        assert!(se.abs() < 1e-12);
        assert!(usable);
    }

    #[test]
    fn degenerate_densities_give_exact_slopes() {
        let budget = LyapunovBudget { side: 6, samples: 40, ..Default::default() };
        let one = estimate_lyapunov(1.0, 1.0, 2, (0.5, 1.5), &budget).unwrap();
        assert!((one.slope - 1.0).abs() < 1e-12, "rho=1 slope {}", one.slope);
        assert_eq!(one.stderr, 0.0);
        let zero = estimate_lyapunov(1.0, 0.0, 1, (0.5, 1.5), &budget).unwrap();
        assert_eq!(zero.slope, 0.0);
    }

    #[test]
    fn clock_conversion_identity() {
        // kappa^2 lambda_star = kappa (lambda - rho) on shared samples
        let cfg = PamConfig {
            kappa: 2.0,
            rho: 0.5,
            p: 1,
            t_final: 1.5,
            side: 8,
            samples: 2000,
            seed: 5,
            ..PamConfig::default()
        };
        let grid = time_grid((0.5, 1.5), 4).unwrap();
        let curves = feynman_kac_curves(&cfg, &grid).unwrap();
        let (slope, _, _) = fit_lyapunov_slope(&curves[0]);
        let star = fit_lambda_star_slope(&curves[0], cfg.kappa, cfg.rho);
        let lhs = cfg.kappa * cfg.kappa * star;
        let rhs = cfg.kappa * (slope - cfg.rho);
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn theorem_rhs_symmetry_and_zeros() {
        let p3 = 6.719069673583227e-4;
        assert_eq!(theorem_rhs(0.0, 1, p3).unwrap(), 0.0);
        assert_eq!(theorem_rhs(1.0, 3, p3).unwrap(), 0.0);
        let a = theorem_rhs(0.3, 2, p3).unwrap();
        let b = theorem_rhs(0.7, 2, p3).unwrap();
        assert!((a - b).abs() < 1e-15);
        // rho = 1/2, p = 1: 0.25 G/6 + 1.5^2 P3
        let v = theorem_rhs(0.5, 1, p3).unwrap();
        let g0 = green_value([0, 0, 0]).unwrap();
        assert!((v - (0.25 * g0 / 6.0 + 2.25 * p3)).abs() < 1e-15);
    }
}
