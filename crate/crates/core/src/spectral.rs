//! Exact finite-state-space oracles and lemma-level numerical checks.
//!
//! The joint process (exclusion configuration, walker) on a small torus
//! has generator A = (1/kappa) L + Delta acting on the fixed-particle
//! sector, which the dynamics preserve. Both parts are symmetric with
//! respect to the counting measure on (sector x sites), so A + diag(V) is
//! a symmetric matrix and the long-time growth rate of E exp(int V(Z_s) ds)
//! equals its top eigenvalue. That eigenvalue is computed by power
//! iteration on the nonnegative shifted operator and compared against a
//! Monte Carlo slope oracle.

use crate::error::{Error, Result};
use crate::exclusion::{sample_bernoulli, ExclusionState};
use crate::kernels::{green_value, wrapped_kernel_1d, window_tail_1d};
use crate::lattice::TorusLattice;
use crate::rng::Stream;
use crate::stats::{jackknife_stderr, BatchStats};
use rayon::prelude::*;

const SPARSE_STATE_CAP: usize = 1_000_000;
const DENSE_STATE_CAP: usize = 2_000;

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Fixed-particle-number exclusion sector, optionally paired with a walker.
pub struct SmallSystem {
    pub lattice: TorusLattice,
    pub particles: usize,
    pub walker: bool,
    configs: Vec<u64>,
}

impl SmallSystem {
    pub fn new(lattice: TorusLattice, particles: usize, walker: bool) -> Result<Self> {
        let sites = lattice.site_count();
        if sites > 64 {
            return Err(Error::domain("small systems are limited to 64 sites"));
        }
        if particles > sites {
            return Err(Error::domain("more particles than sites"));
        }
        let n_configs = binomial(sites, particles);
        let states = n_configs.saturating_mul(if walker { sites as u64 } else { 1 });
        if states > SPARSE_STATE_CAP as u64 {
            return Err(Error::domain(format!(
                "state space {states} exceeds the sparse cap {SPARSE_STATE_CAP}"
            )));
        }
        // enumerate n-subsets in colex order; the rank formula below
        // inverts this enumeration
        let mut configs = Vec::with_capacity(n_configs as usize);
        let mut pos: Vec<usize> = (0..particles).collect();
        loop {
            let mask = pos.iter().fold(0u64, |m, &p| m | 1 << p);
            configs.push(mask);
            if particles == 0 {
                break;
            }
            let mut i = 0;
            while i + 1 < particles && pos[i] + 1 == pos[i + 1] {
                i += 1;
            }
            if pos[i] + 1 >= sites && i + 1 == particles {
                break;
            }
            pos[i] += 1;
            for j in 0..i {
                pos[j] = j;
            }
            if *pos.last().unwrap() >= sites {
                break;
            }
        }
        Ok(Self { lattice, particles, walker, configs })
    }

    pub fn config_count(&self) -> usize {
        self.configs.len()
    }

    pub fn state_count(&self) -> usize {
        self.config_count() * if self.walker { self.lattice.site_count() } else { 1 }
    }

    pub fn config_mask(&self, rank: usize) -> u64 {
        self.configs[rank]
    }

    /// Colex rank of an occupation mask within the sector.
    pub fn rank(&self, mask: u64) -> usize {
        let mut rank = 0u64;
        let mut i = 0usize;
        let mut m = mask;
        while m != 0 {
            let p = m.trailing_zeros() as usize;
            i += 1;
            rank += binomial(p, i);
            m &= m - 1;
        }
        rank as usize
    }

    #[inline]
    pub fn state_index(&self, config_rank: usize, walker_pos: usize) -> usize {
        if self.walker {
            config_rank * self.lattice.site_count() + walker_pos
        } else {
            config_rank
        }
    }
}

/// Sparse symmetric rate matrix plus dense diagonal, representing
/// A + diag(V) + shift for a nonnegative power iteration.
struct ShiftedOperator {
    row_ptr: Vec<u32>,
    col: Vec<u32>,
    rate: Vec<f64>,
    diag: Vec<f64>,
    shift: f64,
}

impl ShiftedOperator {
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (row, o) in out.iter_mut().enumerate() {
            let mut acc = self.diag[row] * v[row];
            let lo = self.row_ptr[row] as usize;
            let hi = self.row_ptr[row + 1] as usize;
            for k in lo..hi {
                acc += self.rate[k] * v[self.col[k] as usize];
            }
            *o = acc;
        }
    }
}

fn assemble(sys: &SmallSystem, kappa: f64, v: &[f64]) -> Result<ShiftedOperator> {
    if kappa <= 0.0 {
        return Err(Error::domain("kappa must be > 0"));
    }
    let n = sys.state_count();
    if v.len() != n {
        return Err(Error::domain(format!("potential length {} != state count {n}", v.len())));
    }
    let lat = &sys.lattice;
    let sites = lat.site_count();
    let swap_rate = 1.0 / (6.0 * kappa);
    let walker_positions = if sys.walker { sites } else { 1 };
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col = Vec::new();
    let mut rate = Vec::new();
    let mut out_rate = vec![0.0f64; n];
    row_ptr.push(0u32);
    for config_rank in 0..sys.config_count() {
        let mask = sys.configs[config_rank];
        // bond swaps that change the configuration, shared by all walker
        // positions of this configuration
        let mut swaps: Vec<usize> = Vec::new();
        for bond in 0..lat.bond_count() {
            let (a, b) = lat.bond_endpoints(bond);
            let occ_a = mask >> a & 1;
            let occ_b = mask >> b & 1;
            if occ_a != occ_b {
                let flipped = mask ^ (1 << a) ^ (1 << b);
                swaps.push(sys.rank(flipped));
            }
        }
        for w in 0..walker_positions {
            let row = sys.state_index(config_rank, w);
            let mut total = 0.0;
            for &r2 in &swaps {
                col.push(sys.state_index(r2, w) as u32);
                rate.push(swap_rate);
                total += swap_rate;
            }
            if sys.walker {
                for d in 0..6 {
                    col.push(sys.state_index(config_rank, lat.neighbor(w, d)) as u32);
                    rate.push(1.0);
                    total += 1.0;
                }
            }
            out_rate[row] = total;
            row_ptr.push(col.len() as u32);
        }
    }
    let shift = out_rate
        .iter()
        .zip(v)
        .map(|(r, vi)| r - vi)
        .fold(0.0f64, f64::max)
        + 0.5;
    let diag: Vec<f64> = out_rate
        .iter()
        .zip(v)
        .map(|(r, vi)| shift - r + vi)
        .collect();
    Ok(ShiftedOperator { row_ptr, col, rate, diag, shift })
}

#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
}

fn power_iterate(op: &ShiftedOperator, tol: f64, max_iter: usize) -> Result<SpectralResult> {
    let n = op.diag.len();
    let mut v = vec![(n as f64).powf(-0.5); n];
    let mut w = vec![0.0f64; n];
    let mut mu = 0.0;
    for it in 1..=max_iter {
        op.apply(&v, &mut w);
        mu = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let mut res2 = 0.0;
        let mut norm2 = 0.0;
        for i in 0..n {
            let r = w[i] - mu * v[i];
            res2 += r * r;
            norm2 += w[i] * w[i];
        }
        let norm = norm2.sqrt();
        for i in 0..n {
            v[i] = w[i] / norm;
        }
        if res2.sqrt() <= tol {
            return Ok(SpectralResult { lambda: mu - op.shift, residual: res2.sqrt(), iterations: it });
        }
    }
    Err(Error::numerical(format!(
        "power iteration did not converge in {max_iter} iterations (residual {:.3e})",
        {
            let mut res2 = 0.0;
            op.apply(&v, &mut w);
            for i in 0..n {
                let r = w[i] - mu * v[i];
                res2 += r * r;
            }
            res2.sqrt()
        }
    )))
}

/// Top of the spectrum of (1/kappa) L + Delta + diag(V) on the sector
/// (L + diag(V) when the walker is disabled): the exact t -> infinity
/// oracle for (1/t) log E exp(int V(Z_s) ds).
pub fn top_eigenvalue(sys: &SmallSystem, kappa: f64, v: &[f64]) -> Result<SpectralResult> {
    let op = assemble(sys, kappa, v)?;
    power_iterate(&op, 1e-9, 2_000_000)
}

/// Dense cross-check for small systems.
pub fn top_eigenvalue_dense(sys: &SmallSystem, kappa: f64, v: &[f64]) -> Result<f64> {
    let n = sys.state_count();
    if n > DENSE_STATE_CAP {
        return Err(Error::domain(format!("dense fallback limited to {DENSE_STATE_CAP} states, got {n}")));
    }
    let op = assemble(sys, kappa, v)?;
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    for row in 0..n {
        m[(row, row)] = op.diag[row] - op.shift;
        for k in op.row_ptr[row] as usize..op.row_ptr[row + 1] as usize {
            m[(row, op.col[k] as usize)] += op.rate[k];
        }
    }
    let eig = m.symmetric_eigen();
    Ok(eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// Monte Carlo long-time slope of (1/t) log E exp(int V(Z_s) ds) between
/// horizons t1 < t2, with jackknife stderr over batches.
pub fn mc_growth_slope(
    sys: &SmallSystem,
    kappa: f64,
    v: &[f64],
    t1: f64,
    t2: f64,
    samples: usize,
    batches: usize,
    seed: u64,
    stream_base: u64,
) -> Result<(f64, f64)> {
    if !(0.0 < t1 && t1 < t2) {
        return Err(Error::domain("need 0 < t1 < t2"));
    }
    if samples < 2 {
        return Err(Error::domain("need at least 2 samples"));
    }
    let lat = &sys.lattice;
    let sites = lat.site_count();
    let n_batches = batches.clamp(2, samples);
    let per_batch = samples.div_ceil(n_batches);
    let total = n_batches * per_batch;
    let bond_rate = lat.bond_count() as f64 / (6.0 * kappa);
    let walk_rate = if sys.walker { 6.0 } else { 0.0 };
    let total_rate = bond_rate + walk_rate;
    let pairs: Vec<(f64, f64)> = (0..total)
        .into_par_iter()
        .map(|r| {
            let mut rng = Stream::new(seed, stream_base + r as u64);
            let mut mask = sys.configs[rng.index(sys.config_count())];
            let mut rank = sys.rank(mask);
            let mut w = 0usize;
            let mut t = 0.0f64;
            let mut integral = 0.0f64;
            let mut at_t1 = 0.0f64;
            let mut recorded = false;
            loop {
                let wait = rng.exponential(total_rate);
                let t_next = t + wait;
                if !recorded && t_next >= t1 {
                    at_t1 = integral + v[sys.state_index(rank, w)] * (t1 - t);
                    recorded = true;
                }
                if t_next >= t2 {
                    integral += v[sys.state_index(rank, w)] * (t2 - t);
                    break;
                }
                integral += v[sys.state_index(rank, w)] * wait;
                t = t_next;
                if rng.uniform() * total_rate < bond_rate {
                    let bond = rng.index(lat.bond_count());
                    let (a, b) = lat.bond_endpoints(bond);
                    if (mask >> a & 1) != (mask >> b & 1) {
                        mask ^= (1 << a) | (1 << b);
                        rank = sys.rank(mask);
                    }
                } else {
                    w = lat.neighbor(w, rng.index(6));
                }
            }
            (at_t1.exp(), integral.exp())
        })
        .collect();
    let _ = sites;
    let mut b1 = vec![0.0f64; n_batches];
    let mut b2 = vec![0.0f64; n_batches];
    for (r, (e1, e2)) in pairs.iter().enumerate() {
        b1[r / per_batch] += e1;
        b2[r / per_batch] += e2;
    }
    for k in 0..n_batches {
        b1[k] /= per_batch as f64;
        b2[k] /= per_batch as f64;
    }
    let slope_of = |skip: Option<usize>| {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        let mut cnt = 0.0;
        for k in 0..n_batches {
            if Some(k) == skip {
                continue;
            }
            m1 += b1[k];
            m2 += b2[k];
            cnt += 1.0;
        }
        ((m2 / cnt).ln() - (m1 / cnt).ln()) / (t2 - t1)
    };
    let full = slope_of(None);
    let se = jackknife_stderr(n_batches, full, |k| slope_of(Some(k)));
    Ok((full, se))
}

// ---------------------------------------------------------------------------
// psi functional
// ---------------------------------------------------------------------------

/// Query for psi(eta, x) = int_0^T sum_z p_{6 s (1 + 1/(6 kappa))}(x, z)
/// (eta(z) - rho) ds on the torus.
#[derive(Debug, Clone)]
pub struct PsiQuery {
    pub x: usize,
    pub kappa: f64,
    pub t_horizon: f64,
}

/// The constant 1[kappa] = 1 + 1/(6 kappa) that merges walker and
/// rescaled-exclusion kernels.
pub fn one_kappa(kappa: f64) -> f64 {
    1.0 + 1.0 / (6.0 * kappa)
}

/// Certified bound on the difference between the torus-wrapped psi field
/// and its infinite-lattice counterpart; must stay below 1e-8 for the
/// lemma checks to carry over.
pub fn psi_wrap_bound(lat: &TorusLattice, kappa: f64, t_horizon: f64) -> f64 {
    let u_max = 2.0 * t_horizon * one_kappa(kappa); // per-coordinate time
    let half = (lat.side() - 1) / 2;
    3.0 * t_horizon * window_tail_1d(u_max, half)
}

/// The integrated kernel field H[d] = int_0^T p^L_{6 s 1[kappa]}(d) ds on
/// torus displacements, by composite 64-node Gauss-Legendre per unit
/// interval. psi(eta, x) = sum_z (eta(z) - rho) H[z - x].
pub struct PsiField {
    lat_side: usize,
    pub h: Vec<f64>,
    pub t_horizon: f64,
}

fn gl64() -> (Vec<f64>, Vec<f64>) {
    // nodes via Newton on Legendre P_64, as in the Green quadrature
    let n = 64usize;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

impl PsiField {
    pub fn build(lat: &TorusLattice, kappa: f64, t_horizon: f64) -> Result<Self> {
        if kappa <= 0.0 || t_horizon <= 0.0 {
            return Err(Error::domain("psi needs kappa > 0 and T > 0"));
        }
        let wrap = psi_wrap_bound(lat, kappa, t_horizon);
        if wrap > 1e-8 {
            return Err(Error::domain(format!(
                "torus wrap bound {wrap:.2e} exceeds 1e-8; enlarge the torus or shorten T"
            )));
        }
        let l = lat.side();
        let (nodes, weights) = gl64();
        let mut h = vec![0.0f64; l * l * l];
        let ok = one_kappa(kappa);
        let mut lo = 0.0f64;
        while lo < t_horizon {
            let hi = (lo + 1.0).min(t_horizon);
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            for (t, w) in nodes.iter().zip(&weights) {
                let s = mid + half * t;
                let u = 2.0 * s * ok; // per-coordinate time of the 6 s 1[kappa] kernel
                let w1 = wrapped_kernel_1d(u, l);
                let wt = w * half;
                let mut idx = 0usize;
                for dx in 0..l {
                    let wx = wt * w1[dx];
                    for dy in 0..l {
                        let wxy = wx * w1[dy];
                        for dz in 0..l {
                            h[idx] += wxy * w1[dz];
                            idx += 1;
                        }
                    }
                }
            }
            lo = hi;
        }
        Ok(Self { lat_side: l, h, t_horizon })
    }

    #[inline]
    pub fn at_displacement(&self, d: [usize; 3]) -> f64 {
        let l = self.lat_side;
        self.h[(d[0] * l + d[1]) * l + d[2]]
    }

    /// psi(eta, x) = sum_z (eta(z) - rho) H[z - x].
    pub fn psi(&self, lat: &TorusLattice, eta: &ExclusionState, x: usize, rho: f64) -> f64 {
        let l = self.lat_side;
        let xc = lat.coords(x);
        let mut acc = 0.0;
        let mut site = 0usize;
        for zx in 0..l {
            let dx = (zx + l - xc[0]) % l;
            for zy in 0..l {
                let dy = (zy + l - xc[1]) % l;
                for zz in 0..l {
                    let dz = (zz + l - xc[2]) % l;
                    acc += (eta.occupied(site) as u8 as f64 - rho) * self.at_displacement([dx, dy, dz]);
                    site += 1;
                }
            }
        }
        acc
    }

    /// psi(eta, b) - psi(eta, a) for arbitrary sites a, b.
    pub fn site_difference(&self, lat: &TorusLattice, eta: &ExclusionState, a: usize, b: usize, rho: f64) -> f64 {
        self.psi(lat, eta, b, rho) - self.psi(lat, eta, a, rho)
    }

    /// psi(eta^{a,b}, x) - psi(eta, x) = (eta(b) - eta(a)) (H[a-x] - H[b-x]).
    pub fn swap_difference(&self, lat: &TorusLattice, eta: &ExclusionState, x: usize, a: usize, b: usize) -> f64 {
        let sgn = eta.occupied(b) as i8 - eta.occupied(a) as i8;
        if sgn == 0 {
            return 0.0;
        }
        let l = self.lat_side;
        let xc = lat.coords(x);
        let ac = lat.coords(a);
        let bc = lat.coords(b);
        let da = [(ac[0] + l - xc[0]) % l, (ac[1] + l - xc[1]) % l, (ac[2] + l - xc[2]) % l];
        let db = [(bc[0] + l - xc[0]) % l, (bc[1] + l - xc[1]) % l, (bc[2] + l - xc[2]) % l];
        sgn as f64 * (self.at_displacement(da) - self.at_displacement(db))
    }

    /// sum over all bonds of (psi(eta^{a,b}, x) - psi(eta, x))^2.
    pub fn swap_sum_of_squares(&self, lat: &TorusLattice, eta: &ExclusionState, x: usize) -> f64 {
        let mut acc = 0.0;
        for bond in 0..lat.bond_count() {
            let (a, b) = lat.bond_endpoints(bond);
            let d = self.swap_difference(lat, eta, x, a, b);
            acc += d * d;
        }
        acc
    }
}

/// Evaluate psi(eta, x) for one query.
pub fn compute_psi(lat: &TorusLattice, eta: &ExclusionState, q: &PsiQuery, rho: f64) -> Result<f64> {
    let field = PsiField::build(lat, q.kappa, q.t_horizon)?;
    Ok(field.psi(lat, eta, q.x, rho))
}

/// Observed-to-bound ratios for the three psi inequalities.
#[derive(Debug, Clone)]
pub struct PsiBoundsReport {
    pub samples: usize,
    /// |psi(eta,b) - psi(eta,a)| against 2 C sqrt(T).
    pub max_gradient_ratio: f64,
    /// |psi(eta^{a,b},x) - psi(eta,x)| against 2 G.
    pub max_swap_ratio: f64,
    /// bond sum of squared swap differences against G/6.
    pub max_sum_sq_ratio: f64,
}

impl PsiBoundsReport {
    pub fn all_hold(&self) -> bool {
        self.max_gradient_ratio <= 1.0 && self.max_swap_ratio <= 1.0 && self.max_sum_sq_ratio <= 1.0
    }
}

/// Check the three psi bounds on random (eta, x, bond) samples drawn from
/// nu_rho, with C certified by the kernel-bound verifier and G the Green
/// constant.
#[allow(clippy::too_many_arguments)]
pub fn check_psi_bounds(
    lat: &TorusLattice,
    n_samples: usize,
    kappa: f64,
    t_horizon: f64,
    rho: f64,
    c_const: f64,
    seed: u64,
    stream_base: u64,
) -> Result<PsiBoundsReport> {
    if n_samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    if t_horizon < 1.0 {
        return Err(Error::domain("the gradient bound 2 C sqrt(T) requires T >= 1"));
    }
    let field = PsiField::build(lat, kappa, t_horizon)?;
    let g0 = green_value([0, 0, 0])?;
    let grad_bound = 2.0 * c_const * t_horizon.sqrt();
    let swap_bound = 2.0 * g0;
    let sum_bound = g0 / 6.0;
    let mut report = PsiBoundsReport {
        samples: n_samples,
        max_gradient_ratio: 0.0,
        max_swap_ratio: 0.0,
        max_sum_sq_ratio: 0.0,
    };
    for s in 0..n_samples {
        let mut rng = Stream::new(seed, stream_base + s as u64);
        let eta = sample_bernoulli(lat, rho, &mut rng)?;
        let x = rng.index(lat.site_count());
        let bond = rng.index(lat.bond_count());
        let (a, b) = lat.bond_endpoints(bond);
        let grad = field.site_difference(lat, &eta, a, b, rho).abs();
        let swap = field.swap_difference(lat, &eta, x, a, b).abs();
        let ssq = field.swap_sum_of_squares(lat, &eta, x);
        report.max_gradient_ratio = report.max_gradient_ratio.max(grad / grad_bound);
        report.max_swap_ratio = report.max_swap_ratio.max(swap / swap_bound);
        report.max_sum_sq_ratio = report.max_sum_sq_ratio.max(ssq / sum_bound);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Green-operator exponential moment
// ---------------------------------------------------------------------------

/// Outcome of the exponential-moment bound check for a nonnegative
/// finitely supported potential.
#[derive(Debug, Clone)]
pub enum GreenMomentOutcome {
    /// ||G V||_inf >= 1: the bound's hypothesis fails, which is a correct
    /// result, not an error.
    PreconditionViolated { norm: f64 },
    Checked(GreenMomentReport),
}

#[derive(Debug, Clone)]
pub struct GreenMomentReport {
    pub norm: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    /// Upper bound on the relative truncation bias from stopping the walk
    /// at the envelope radius.
    pub envelope_tail_bound: f64,
    pub within_bound: bool,
}

/// sup_x sum_y G(x - y) V(y) over a padded box around the support.
pub fn green_potential_norm(potential: &[([i64; 3], f64)]) -> Result<f64> {
    if potential.iter().any(|&(_, v)| v < 0.0) {
        return Err(Error::domain("potential must be nonnegative"));
    }
    let pad = 6i64;
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for &(y, _) in potential {
        for i in 0..3 {
            lo[i] = lo[i].min(y[i]);
            hi[i] = hi[i].max(y[i]);
        }
    }
    let mut best = 0.0f64;
    for x0 in lo[0] - pad..=hi[0] + pad {
        for x1 in lo[1] - pad..=hi[1] + pad {
            for x2 in lo[2] - pad..=hi[2] + pad {
                let mut acc = 0.0;
                for &(y, v) in potential {
                    acc += v * green_value([x0 - y[0], x1 - y[1], x2 - y[2]])?;
                }
                best = best.max(acc);
            }
        }
    }
    Ok(best)
}

/// Monte Carlo check of E_x exp(int_0^infty V(X_t) dt) <= (1 - ||GV||)^{-1}
/// for the rate-6 walk; the integral is truncated when the walker leaves a
/// certified envelope, which can only lower the estimate.
pub fn green_operator_moment_check(
    potential: &[([i64; 3], f64)],
    start: [i64; 3],
    samples: usize,
    batches: usize,
    seed: u64,
    stream_base: u64,
) -> Result<GreenMomentOutcome> {
    if potential.is_empty() {
        return Err(Error::domain("potential support must be nonempty"));
    }
    let norm = green_potential_norm(potential)?;
    if norm >= 1.0 {
        return Ok(GreenMomentOutcome::PreconditionViolated { norm });
    }
    let extent = potential
        .iter()
        .map(|&(y, _)| y.iter().map(|c| c.abs()).max().unwrap())
        .max()
        .unwrap();
    let env = extent + 30;
    // beyond the envelope the expected leftover integral is at most
    // sum V(y) * G(x - y) / 6 <= sum V * 0.6 / (6 dist); exponentiate for a
    // relative bias bound on the exponential moment
    let vsum: f64 = potential.iter().map(|&(_, v)| v).sum();
    let tail = vsum * 0.6 / (6.0 * (env - extent) as f64);
    let envelope_tail_bound = tail.exp() - 1.0;

    let map: std::collections::HashMap<[i64; 3], f64> = potential.iter().cloned().collect();
    let n_batches = batches.clamp(2, samples.max(2));
    let per_batch = samples.div_ceil(n_batches);
    let total = n_batches * per_batch;
    let vals: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|r| {
            let mut rng = Stream::new(seed, stream_base + r as u64);
            let mut pos = start;
            let mut integral = 0.0f64;
            loop {
                if pos.iter().any(|c| c.abs() > env) {
                    break;
                }
                let wait = rng.exponential(6.0);
                if let Some(&v) = map.get(&pos) {
                    integral += v * wait;
                }
                let dir = rng.index(6);
                pos[dir % 3] += if dir < 3 { 1 } else { -1 };
            }
            integral.exp()
        })
        .collect();
    let mut b = vec![0.0f64; n_batches];
    for (r, v) in vals.iter().enumerate() {
        b[r / per_batch] += v;
    }
    for m in b.iter_mut() {
        *m /= per_batch as f64;
    }
    let stats = BatchStats::from_batch_means(b);
    let estimate = stats.mean();
    let stderr = stats.stderr();
    let bound = 1.0 / (1.0 - norm);
    Ok(GreenMomentOutcome::Checked(GreenMomentReport {
        norm,
        estimate,
        stderr,
        bound,
        envelope_tail_bound,
        within_bound: estimate <= bound * (1.0 + 4.0 * stderr / estimate),
    }))
}
