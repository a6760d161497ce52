//! Lattice Green function of the rate-1 simple random walk on Z^3.
//!
//! G(x) = integral over the Brillouin zone of cos(k.x) / (1 - phi(k)),
//! phi(k) = (cos k1 + cos k2 + cos k3) / 3, normalized by (2 pi)^{-3}.
//! The integrand has an integrable 1/|k|^2 singularity at k = 0; the cube
//! [0,pi]^3 is decomposed into dyadic shells accumulating toward the
//! origin, each integrated by tensor Gauss-Legendre, and the quadrature
//! order is raised until two successive estimates agree to 1e-9.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Newton iteration from the Chebyshev-based initial guess
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

fn gl_cached(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| Box::leak(Box::new(gauss_legendre(n))))
}

/// Composite GL nodes on [lo, hi], splitting into panels so the phase of
/// cos(k * x) advances at most ~2 radians per panel.
fn axis_rule(lo: f64, hi: f64, x: i64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let panels = 1 + ((hi - lo) * x.unsigned_abs() as f64 / 2.0).floor() as usize;
    let (gn, gw) = gl_cached(order);
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    let h = (hi - lo) / panels as f64;
    for p in 0..panels {
        let a = lo + p as f64 * h;
        let mid = a + 0.5 * h;
        for (t, w) in gn.iter().zip(gw) {
            nodes.push(mid + 0.5 * h * t);
            weights.push(0.5 * h * w);
        }
    }
    (nodes, weights)
}

/// Tensor integral of prod cos(k_i x_i) / ((2/3) sum sin^2(k_i/2)) over a box.
fn box_integral(lo: [f64; 3], hi: [f64; 3], x: [i64; 3], order: usize) -> f64 {
    let mut cosx = Vec::new();
    let mut sin2 = Vec::new();
    let mut wts = Vec::new();
    for i in 0..3 {
        let (nodes, w) = axis_rule(lo[i], hi[i], x[i], order);
        let c: Vec<f64> = nodes.iter().map(|k| (k * x[i] as f64).cos()).collect();
        let s: Vec<f64> = nodes
            .iter()
            .map(|k| {
                let s = (0.5 * k).sin();
                s * s
            })
            .collect();
        cosx.push(c);
        sin2.push(s);
        wts.push(w);
    }
    let mut total = 0.0;
    for a in 0..wts[0].len() {
        let wa = wts[0][a] * cosx[0][a];
        let sa = sin2[0][a];
        for b in 0..wts[1].len() {
            let wb = wa * wts[1][b] * cosx[1][b];
            let sab = sa + sin2[1][b];
            let mut inner = 0.0;
            for c in 0..wts[2].len() {
                inner += wts[2][c] * cosx[2][c] / (sab + sin2[2][c]);
            }
            total += wb * inner;
        }
    }
    total * 1.5 // divide by (2/3)
}

fn green_quadrature(x: [i64; 3], order: usize) -> f64 {
    const SHELLS: usize = 48;
    let mut total = 0.0;
    let mut a = std::f64::consts::PI;
    for _ in 0..SHELLS {
        let half = 0.5 * a;
        for mask in 1u32..8 {
            let mut lo = [0.0; 3];
            let mut hi = [half; 3];
            for i in 0..3 {
                if mask >> i & 1 == 1 {
                    lo[i] = half;
                    hi[i] = a;
                }
            }
            total += box_integral(lo, hi, x, order);
        }
        a = half;
    }
    // neglected cube [0, a]^3: integrand <= 6/|k|^2 (1 + O(a^2)), so the
    // contribution is below 6 * (pi/2) * sqrt(3) * a * 1.1, i.e. ~5e-14
    total / std::f64::consts::PI.powi(3)
}

fn green_uncached(x: [i64; 3]) -> Result<f64> {
    let mut prev = f64::NAN;
    for &order in &[12usize, 18, 26, 36, 48] {
        let cur = green_quadrature(x, order);
        if (cur - prev).abs() <= 1e-9 * cur.abs().max(1e-6) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::numerical(format!(
        "Green quadrature did not stabilize to 1e-9 at x = {x:?}"
    )))
}

/// G(x) for the rate-1 walk; symmetric under coordinate permutations and
/// sign flips, with results memoized per canonical point.
pub fn green_value(x: [i64; 3]) -> Result<f64> {
    let mut key = [x[0].abs(), x[1].abs(), x[2].abs()];
    key.sort_unstable();
    static CACHE: OnceLock<Mutex<HashMap<[i64; 3], f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().unwrap().get(&key) {
        return Ok(v);
    }
    let v = green_uncached(key)?;
    cache.lock().unwrap().insert(key, v);
    Ok(v)
}
