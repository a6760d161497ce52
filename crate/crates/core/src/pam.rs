//! Reactant moments computed two independent ways.
//!
//! The field u solves du/dt = kappa Delta u + xi_t u with u(.,0) = 1,
//! where xi is the exclusion process at its native speed (bond rate 1/6)
//! and Delta is the unnormalized lattice Laplacian. The direct route
//! integrates this equation along a sampled catalyst trajectory; the
//! Feynman-Kac route averages exp of the occupation integral of p
//! independent walkers observed at rate 6*kappa over joint samples of
//! (catalyst, walkers). Both target the same annealed moment and must
//! agree within Monte Carlo error.
//!
//! The integrand of the Feynman-Kac exponent is piecewise constant
//! between events (walker jumps and stirring events), so the time
//! integral is accumulated exactly on a merged event timeline; the
//! estimator carries no time-discretization bias.

use crate::error::{Error, Result};
use crate::exclusion::{sample_bernoulli, stirring_rate};
use crate::lattice::TorusLattice;
use crate::rng::Stream;
use crate::stats::BatchStats;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct PamConfig {
    pub kappa: f64,
    pub rho: f64,
    /// Moment order p.
    pub p: u32,
    pub t_final: f64,
    pub side: usize,
    /// Acceptance threshold for the integral-identity defect diagnostic.
    pub solver_tol: f64,
    pub samples: usize,
    pub batches: usize,
    pub seed: u64,
    /// Base stream id; replica r draws from stream `stream_base + r`.
    pub stream_base: u64,
}

impl Default for PamConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            rho: 0.5,
            p: 1,
            t_final: 1.0,
            side: 8,
            solver_tol: 1e-6,
            samples: 1000,
            batches: 100,
            seed: 1,
            stream_base: 0,
        }
    }
}

impl PamConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kappa <= 0.0 || !self.kappa.is_finite() {
            return Err(Error::domain(format!("kappa must be > 0, got {}", self.kappa)));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::domain(format!("rho must lie in [0,1], got {}", self.rho)));
        }
        if self.p == 0 {
            return Err(Error::domain("moment order p must be >= 1"));
        }
        if self.t_final <= 0.0 || !self.t_final.is_finite() {
            return Err(Error::domain(format!("t_final must be > 0, got {}", self.t_final)));
        }
        if self.side < 3 {
            return Err(Error::domain("lattice side must be >= 3"));
        }
        if self.samples < 2 {
            return Err(Error::domain("sample count must be >= 2"));
        }
        Ok(())
    }

    /// Finite-size guard: three standard deviations of the walker range
    /// must fit in half the torus, else estimates carry wrap bias.
    pub fn guard_ok(&self) -> bool {
        (6.0 * self.kappa * self.t_final).sqrt() * 3.0 < self.side as f64 / 2.0
    }

    pub fn lattice(&self) -> Result<TorusLattice> {
        TorusLattice::new(self.side)
    }
}

/// Monte Carlo moment statistics at one time point.
#[derive(Debug, Clone)]
pub struct MomentEstimate {
    pub order: u32,
    pub time: f64,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub log_mean: f64,
    pub guard_ok: bool,
}

/// Batch-resolved moment estimates along a time grid (shared trajectories
/// across grid points of one curve, so downstream fits can jackknife).
#[derive(Debug, Clone)]
pub struct MomentCurve {
    pub order: u32,
    pub times: Vec<f64>,
    /// batch_means[t_idx][batch]
    pub batch_means: Vec<Vec<f64>>,
    pub samples: usize,
    pub guard_ok: bool,
}

impl MomentCurve {
    pub fn estimate(&self, t_idx: usize) -> MomentEstimate {
        let stats = BatchStats::from_batch_means(self.batch_means[t_idx].clone());
        let mean = stats.mean();
        MomentEstimate {
            order: self.order,
            time: self.times[t_idx],
            mean,
            stderr: stats.stderr(),
            samples: self.samples,
            log_mean: mean.ln(),
            guard_ok: self.guard_ok,
        }
    }

    pub fn n_batches(&self) -> usize {
        self.batch_means[0].len()
    }
}

fn batch_layout(samples: usize, batches: usize) -> (usize, usize) {
    let b = batches.clamp(2, samples);
    let per = samples.div_ceil(b);
    (b, per)
}

fn curves_from_replicas<F>(
    orders: u32,
    t_grid: &[f64],
    samples: usize,
    batches: usize,
    guard_ok: bool,
    replica_values: F,
) -> Vec<MomentCurve>
where
    F: Fn(usize) -> Vec<Vec<f64>> + Sync,
{
    let (n_batches, per_batch) = batch_layout(samples, batches);
    let total = n_batches * per_batch;
    let all: Vec<Vec<Vec<f64>>> = (0..total).into_par_iter().map(&replica_values).collect();
    let mut curves = Vec::new();
    for q in 0..orders as usize {
        let mut batch_means = vec![vec![0.0; n_batches]; t_grid.len()];
        for (r, rep) in all.iter().enumerate() {
            let b = r / per_batch;
            for (ti, row) in rep.iter().enumerate() {
                batch_means[ti][b] += row[q];
            }
        }
        for row in batch_means.iter_mut() {
            for m in row.iter_mut() {
                *m /= per_batch as f64;
            }
        }
        curves.push(MomentCurve {
            order: q as u32 + 1,
            times: t_grid.to_vec(),
            batch_means,
            samples: total,
            guard_ok,
        });
    }
    curves
}

/// One joint Feynman-Kac sample: returns, for each grid time and each
/// order q <= p, the sample value exp(sum_{j<=q} I_j(t)).
fn fk_replica(
    lat: &TorusLattice,
    cfg: &PamConfig,
    rng: &mut Stream,
    t_grid: &[f64],
) -> Vec<Vec<f64>> {
    let p = cfg.p as usize;
    let r_sse = stirring_rate(lat);
    let walk_rate = 6.0 * cfg.kappa;
    let total_rate = r_sse + p as f64 * walk_rate;
    let mut eta = sample_bernoulli(lat, cfg.rho, rng).expect("validated rho");
    let origin = 0usize;
    let mut pos = vec![origin; p];
    let mut on = vec![u8::from(eta.occupied(origin)); p];
    let mut integral = vec![0.0f64; p];
    let mut out = vec![vec![0.0; p]; t_grid.len()];
    let mut t = 0.0f64;
    let mut gi = 0usize;
    let t_end = *t_grid.last().unwrap();
    loop {
        let wait = rng.exponential(total_rate);
        let t_next = t + wait;
        while gi < t_grid.len() && t_grid[gi] <= t_next {
            let dt = t_grid[gi] - t;
            let mut acc = 0.0;
            for q in 0..p {
                acc += integral[q] + on[q] as f64 * dt;
                out[gi][q] = acc.exp();
            }
            gi += 1;
        }
        if gi >= t_grid.len() || t_next > t_end {
            break;
        }
        for q in 0..p {
            integral[q] += on[q] as f64 * wait;
        }
        t = t_next;
        let v = rng.uniform() * total_rate;
        if v < r_sse {
            let bond = rng.index(lat.bond_count());
            let (a, b) = lat.bond_endpoints(bond);
            eta.swap(a, b);
            for j in 0..p {
                if pos[j] == a || pos[j] == b {
                    on[j] = u8::from(eta.occupied(pos[j]));
                }
            }
        } else {
            let j = (((v - r_sse) / walk_rate) as usize).min(p - 1);
            let dir = rng.index(6);
            pos[j] = lat.neighbor(pos[j], dir);
            on[j] = u8::from(eta.occupied(pos[j]));
        }
    }
    out
}

/// Feynman-Kac moment curves for all orders 1..=p on a shared time grid.
pub fn feynman_kac_curves(cfg: &PamConfig, t_grid: &[f64]) -> Result<Vec<MomentCurve>> {
    cfg.validate()?;
    validate_grid(t_grid, cfg.t_final)?;
    let lat = cfg.lattice()?;
    let guard = cfg.guard_ok();
    Ok(curves_from_replicas(cfg.p, t_grid, cfg.samples, cfg.batches, guard, |r| {
        let mut rng = Stream::new(cfg.seed, cfg.stream_base + r as u64);
        fk_replica(&lat, cfg, &mut rng, t_grid)
    }))
}

/// E_{nu_rho}(u(0,t)^p) by the p-walker Feynman-Kac representation.
pub fn feynman_kac_estimate(cfg: &PamConfig) -> Result<MomentEstimate> {
    let curves = feynman_kac_curves(cfg, &[cfg.t_final])?;
    Ok(curves[cfg.p as usize - 1].estimate(0))
}

fn validate_grid(t_grid: &[f64], t_final: f64) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::domain("time grid must be nonempty"));
    }
    let mut prev = 0.0;
    for &t in t_grid {
        if t <= prev {
            return Err(Error::domain("time grid must be strictly increasing and positive"));
        }
        prev = t;
    }
    if (prev - t_final).abs() > 1e-12 && prev > t_final {
        return Err(Error::domain("time grid exceeds the configured horizon"));
    }
    Ok(())
}

/// A sampled catalyst path: initial configuration plus stirring events
/// (time, bond), piecewise constant in between.
#[derive(Debug, Clone)]
pub struct CatalystTrajectory {
    pub initial: Vec<u8>,
    pub events: Vec<(f64, u32)>,
    pub t_final: f64,
}

/// Sample a catalyst trajectory from nu_rho over [0, t_final].
pub fn generate_catalyst(
    lat: &TorusLattice,
    rho: f64,
    t_final: f64,
    rng: &mut Stream,
) -> Result<CatalystTrajectory> {
    let state = sample_bernoulli(lat, rho, rng)?;
    let rate = stirring_rate(lat);
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        t += rng.exponential(rate);
        if t > t_final {
            break;
        }
        events.push((t, rng.index(lat.bond_count()) as u32));
    }
    Ok(CatalystTrajectory { initial: state.occupancy().to_vec(), events, t_final })
}

/// The reactant field at one time.
#[derive(Debug, Clone)]
pub struct ReactantField {
    pub values: Vec<f64>,
    pub time: f64,
}

struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Workspace {
    fn new(n: usize) -> Self {
        Self { k1: vec![0.0; n], k2: vec![0.0; n], k3: vec![0.0; n], k4: vec![0.0; n], tmp: vec![0.0; n] }
    }
}

#[inline]
fn rhs(lat: &TorusLattice, kappa: f64, eta: &[u8], u: &[f64], out: &mut [f64]) {
    for i in 0..u.len() {
        let nb = lat.neighbors(i);
        let sum = u[nb[0] as usize]
            + u[nb[1] as usize]
            + u[nb[2] as usize]
            + u[nb[3] as usize]
            + u[nb[4] as usize]
            + u[nb[5] as usize];
        out[i] = kappa * (sum - 6.0 * u[i]) + eta[i] as f64 * u[i];
    }
}

fn rk4_span(
    lat: &TorusLattice,
    kappa: f64,
    eta: &[u8],
    u: &mut [f64],
    span: f64,
    h_max: f64,
    ws: &mut Rk4Workspace,
) {
    if span <= 0.0 {
        return;
    }
    let nsub = (span / h_max).ceil().max(1.0) as usize;
    let h = span / nsub as f64;
    for _ in 0..nsub {
        rhs(lat, kappa, eta, u, &mut ws.k1);
        for i in 0..u.len() {
            ws.tmp[i] = u[i] + 0.5 * h * ws.k1[i];
        }
        rhs(lat, kappa, eta, &ws.tmp, &mut ws.k2);
        for i in 0..u.len() {
            ws.tmp[i] = u[i] + 0.5 * h * ws.k2[i];
        }
        rhs(lat, kappa, eta, &ws.tmp, &mut ws.k3);
        for i in 0..u.len() {
            ws.tmp[i] = u[i] + h * ws.k3[i];
        }
        rhs(lat, kappa, eta, &ws.tmp, &mut ws.k4);
        for i in 0..u.len() {
            u[i] += h / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
        }
    }
}

/// Integrate du/dt = kappa Delta u + xi_t u along a catalyst trajectory.
///
/// The potential is constant between stirring events; each inter-event
/// interval is integrated with classical RK4 using substeps
/// h <= min(0.1/(6 kappa + 1), gap). Returns the final field and u(0, t)
/// recorded at the requested grid times.
pub fn solve_direct(
    lat: &TorusLattice,
    kappa: f64,
    traj: &CatalystTrajectory,
    t_grid: &[f64],
) -> Result<(ReactantField, Vec<f64>)> {
    if kappa <= 0.0 {
        return Err(Error::domain("kappa must be > 0"));
    }
    validate_grid(t_grid, traj.t_final)?;
    let n = lat.site_count();
    if traj.initial.len() != n {
        return Err(Error::domain("catalyst configuration does not match the lattice"));
    }
    let h_max = 0.1 / (6.0 * kappa + 1.0);
    let mut eta = traj.initial.clone();
    let mut u = vec![1.0f64; n];
    let mut ws = Rk4Workspace::new(n);
    let mut records = Vec::with_capacity(t_grid.len());
    let mut t = 0.0f64;
    let mut ev = traj.events.iter().peekable();
    let mut gi = 0usize;
    let t_end = *t_grid.last().unwrap();
    loop {
        let next_event = ev.peek().map(|&&(te, _)| te).unwrap_or(f64::INFINITY);
        let next_grid = if gi < t_grid.len() { t_grid[gi] } else { f64::INFINITY };
        let next = next_event.min(next_grid).min(t_end);
        rk4_span(lat, kappa, &eta, &mut u, next - t, h_max, &mut ws);
        if !u[0].is_finite() {
            return Err(Error::Instability { time: next, substep: h_max });
        }
        t = next;
        if gi < t_grid.len() && t_grid[gi] <= t {
            records.push(u[0]);
            gi += 1;
        }
        if let Some(&&(te, bond)) = ev.peek() {
            if te <= t {
                let (a, b) = lat.bond_endpoints(bond as usize);
                eta.swap(a, b);
                ev.next();
            }
        }
        if gi >= t_grid.len() {
            break;
        }
    }
    if u.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::numerical("direct solver lost positivity"));
    }
    Ok((ReactantField { values: u, time: t }, records))
}

/// Direct-solver moment curves (orders 1..=p) over catalyst samples.
pub fn annealed_curves(cfg: &PamConfig, t_grid: &[f64]) -> Result<Vec<MomentCurve>> {
    cfg.validate()?;
    validate_grid(t_grid, cfg.t_final)?;
    let lat = cfg.lattice()?;
    let guard = cfg.guard_ok();
    let p = cfg.p;
    let curves = curves_from_replicas(p, t_grid, cfg.samples, cfg.batches, guard, |r| {
        let mut rng = Stream::new(cfg.seed, cfg.stream_base + r as u64);
        let traj = generate_catalyst(&lat, cfg.rho, cfg.t_final, &mut rng).expect("validated");
        let (_, records) = solve_direct(&lat, cfg.kappa, &traj, t_grid).expect("solver");
        records
            .iter()
            .map(|&u0| (1..=p).map(|q| u0.powi(q as i32)).collect())
            .collect()
    });
    Ok(curves)
}

/// E_{nu_rho}([u(0,t)]^p) by averaging the direct solver over catalyst
/// trajectories.
pub fn annealed_moment(cfg: &PamConfig) -> Result<MomentEstimate> {
    let curves = annealed_curves(cfg, &[cfg.t_final])?;
    Ok(curves[cfg.p as usize - 1].estimate(0))
}

/// Relative defect of u(x,t) = 1 + int_0^t (kappa Delta u + xi u)(x,s) ds
/// at the origin, measured with trapezoid accumulation on a refined
/// substep grid. Diagnostic for solver validation.
pub fn integral_identity_defect(
    lat: &TorusLattice,
    kappa: f64,
    traj: &CatalystTrajectory,
    t_final: f64,
) -> Result<f64> {
    let n = lat.site_count();
    let h_max = 0.025 / (6.0 * kappa + 1.0);
    let mut eta = traj.initial.clone();
    let mut u = vec![1.0f64; n];
    let mut ws = Rk4Workspace::new(n);
    let mut deriv = vec![0.0f64; n];
    let mut integral = 0.0f64;
    let mut t = 0.0f64;
    let mut ev = traj.events.iter().peekable();
    while t < t_final {
        let next_event = ev.peek().map(|&&(te, _)| te).unwrap_or(f64::INFINITY);
        let next = next_event.min(t_final);
        let span = next - t;
        if span > 0.0 {
            // composite Simpson over pairs of substeps
            let nsub = 2 * ((span / (2.0 * h_max)).ceil().max(1.0) as usize);
            let h = span / nsub as f64;
            for _ in 0..nsub / 2 {
                rhs(lat, kappa, &eta, &u, &mut deriv);
                let left = deriv[0];
                rk4_span(lat, kappa, &eta, &mut u, h, h, &mut ws);
                rhs(lat, kappa, &eta, &u, &mut deriv);
                let mid = deriv[0];
                rk4_span(lat, kappa, &eta, &mut u, h, h, &mut ws);
                rhs(lat, kappa, &eta, &u, &mut deriv);
                integral += h / 3.0 * (left + 4.0 * mid + deriv[0]);
            }
        }
        t = next;
        if let Some(&&(te, bond)) = ev.peek() {
            if te <= t {
                let (a, b) = lat.bond_endpoints(bond as usize);
                eta.swap(a, b);
                ev.next();
            }
        }
    }
    Ok(((u[0] - 1.0) - integral).abs() / u[0].abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_cfg() -> PamConfig {
        PamConfig { side: 6, samples: 200, ..PamConfig::default() }
    }

    #[test]
    fn empty_catalyst_keeps_field_at_one_exactly() {
        let cfg = PamConfig { rho: 0.0, ..base_cfg() };
        let lat = cfg.lattice().unwrap();
        let mut rng = Stream::new(3, 0);
        let traj = generate_catalyst(&lat, 0.0, 1.0, &mut rng).unwrap();
        let (field, recs) = solve_direct(&lat, 1.0, &traj, &[0.5, 1.0]).unwrap();
        assert!(field.values.iter().all(|&v| v == 1.0));
        assert!(recs.iter().all(|&v| v == 1.0));
        let est = feynman_kac_estimate(&cfg).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.stderr, 0.0);
        let est = annealed_moment(&cfg).unwrap();
        assert_eq!(est.mean, 1.0);
    }

    #[test]
    fn full_catalyst_grows_exponentially() {
        // the all-ones state is invariant under stirring, so u = e^t
        let cfg = PamConfig { rho: 1.0, p: 2, t_final: 2.0, ..base_cfg() };
        let lat = cfg.lattice().unwrap();
        let mut rng = Stream::new(4, 0);
        let traj = generate_catalyst(&lat, 1.0, 2.0, &mut rng).unwrap();
        let (field, recs) = solve_direct(&lat, 1.0, &traj, &[2.0]).unwrap();
        let exact = 2.0f64.exp();
        assert!(((recs[0] - exact) / exact).abs() < 1e-8, "u(0,2) = {}", recs[0]);
        let spread = field.values.iter().cloned().fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
        assert!((spread.1 - spread.0) / exact < 1e-12);

        // FK at rho = 1, p = 2, t = 1: every sample is e^{2t} exactly
        let cfg = PamConfig { rho: 1.0, p: 2, t_final: 1.0, samples: 50, ..base_cfg() };
        let est = feynman_kac_estimate(&cfg).unwrap();
        assert!(((est.mean - 2.0f64.exp()) / est.mean).abs() < 1e-13);
        assert!(est.stderr < 1e-13);
    }

    /// Frozen single occupied site on a 3^3 torus against a dense
    /// eigen-decomposition of kappa*Delta + diag(eta).
    #[test]
    fn frozen_potential_matches_eigensolver_oracle() {
        use nalgebra::{DMatrix, DVector};
        let lat = TorusLattice::new(3).unwrap();
        let n = lat.site_count();
        let kappa = 1.0;
        let mut occ = vec![0u8; n];
        occ[0] = 1;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for d in 0..6 {
                m[(i, lat.neighbor(i, d))] += kappa;
            }
            m[(i, i)] += -6.0 * kappa + occ[i] as f64;
        }
        let eig = m.symmetric_eigen();
        let ones = DVector::from_element(n, 1.0);
        let coeffs = eig.eigenvectors.transpose() * ones;
        let mut expt = DVector::zeros(n);
        for k in 0..n {
            expt += eig.eigenvectors.column(k) * (coeffs[k] * (eig.eigenvalues[k] * 1.0f64).exp());
        }
        let traj = CatalystTrajectory { initial: occ, events: vec![], t_final: 1.0 };
        let (_, recs) = solve_direct(&lat, kappa, &traj, &[1.0]).unwrap();
        assert!(
            ((recs[0] - expt[0]) / expt[0]).abs() < 1e-8,
            "solver {} vs eigen {}",
            recs[0],
            expt[0]
        );
    }

    #[test]
    fn integral_identity_defect_small() {
        let lat = TorusLattice::new(4).unwrap();
        let mut rng = Stream::new(11, 0);
        let traj = generate_catalyst(&lat, 0.5, 1.0, &mut rng).unwrap();
        let defect = integral_identity_defect(&lat, 2.0, &traj, 1.0).unwrap();
        assert!(defect < 1e-6, "defect {defect:e}");
    }

    #[test]
    fn cross_method_agreement_small_config() {
        let cfg = PamConfig {
            kappa: 1.0,
            rho: 0.5,
            p: 1,
            t_final: 1.0,
            side: 8,
            samples: 8000,
            seed: 9,
            ..PamConfig::default()
        };
        let fk = feynman_kac_estimate(&cfg).unwrap();
        let cfg_d = PamConfig { samples: 600, stream_base: 1 << 32, ..cfg };
        let dir = annealed_moment(&cfg_d).unwrap();
        let sigma = (fk.stderr.powi(2) + dir.stderr.powi(2)).sqrt();
        assert!(
            (fk.mean - dir.mean).abs() < 4.0 * sigma,
            "fk {} +- {} vs direct {} +- {}",
            fk.mean,
            fk.stderr,
            dir.mean,
            dir.stderr
        );
        // range bound: 1 <= E u <= e^t up to CI
        assert!(fk.mean >= 1.0 - 4.0 * fk.stderr);
        assert!(fk.mean <= 1.0f64.exp() + 4.0 * fk.stderr);
        // Jensen floor e^{p rho t}
        let floor = (cfg.p as f64 * cfg.rho * cfg.t_final).exp();
        assert!(fk.mean >= floor * (1.0 - 4.0 * fk.stderr / fk.mean));
    }

    #[test]
    fn moment_order_monotonicity() {
        let cfg = PamConfig {
            kappa: 0.5,
            rho: 0.5,
            p: 3,
            t_final: 1.0,
            side: 8,
            samples: 6000,
            seed: 21,
            ..PamConfig::default()
        };
        let curves = feynman_kac_curves(&cfg, &[1.0]).unwrap();
        // (1/pt) log E u^p nondecreasing in p, up to 4 combined sigmas
        let mut prev = f64::NEG_INFINITY;
        let mut prev_se = 0.0;
        for c in &curves {
            let est = c.estimate(0);
            let rate = est.log_mean / (est.order as f64 * est.time);
            let se = est.stderr / est.mean / (est.order as f64 * est.time);
            assert!(
                rate >= prev - 4.0 * (se + prev_se),
                "order {} rate {} below previous {}",
                est.order,
                rate,
                prev
            );
            prev = rate;
            prev_se = se;
        }
    }

    #[test]
    fn sample_count_too_small_rejected() {
        let cfg = PamConfig { samples: 1, ..base_cfg() };
        assert!(feynman_kac_estimate(&cfg).is_err());
    }

    #[test]
    fn guard_flag_reported() {
        let cfg = PamConfig { kappa: 8.0, t_final: 1.0, side: 8, samples: 4, ..PamConfig::default() };
        assert!(!cfg.guard_ok());
        let est = feynman_kac_estimate(&cfg).unwrap();
        assert!(!est.guard_ok);
        let cfg2 = PamConfig { kappa: 0.5, t_final: 0.5, side: 12, samples: 4, ..PamConfig::default() };
        assert!(cfg2.guard_ok());
    }
}
