//! Simple symmetric exclusion on the torus via the stirring construction.
//!
//! Bonds carry independent rate-1/6 clocks; when a bond rings its endpoint
//! states are interchanged. We draw events from one aggregated exponential
//! clock of rate (bond count)/6 and pick the bond uniformly, which has the
//! same law with O(1) state. Swaps conserve the particle number, and the
//! Bernoulli product measures are invariant.
//!
//! The stirring flow run backward from a site is a rate-1 simple random
//! walk, which gives the one-point duality identity
//! E_eta xi_t(x) = sum_y p_t(x, y) eta(y) used here as the exact oracle.

use crate::error::{Error, Result};
use crate::kernels::wrapped_kernel_1d;
use crate::lattice::TorusLattice;
use crate::rng::Stream;

#[derive(Debug, Clone)]
pub struct ExclusionState {
    occupancy: Vec<u8>,
    particle_count: usize,
    time: f64,
}

impl ExclusionState {
    pub fn from_occupancy(occupancy: Vec<u8>) -> Self {
        debug_assert!(occupancy.iter().all(|&b| b <= 1));
        let particle_count = occupancy.iter().map(|&b| b as usize).sum();
        Self { occupancy, particle_count, time: 0.0 }
    }

    pub fn occupancy(&self) -> &[u8] {
        &self.occupancy
    }

    #[inline]
    pub fn occupied(&self, site: usize) -> bool {
        self.occupancy[site] == 1
    }

    pub fn particle_count(&self) -> usize {
        self.particle_count
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    #[inline]
    pub fn swap(&mut self, a: usize, b: usize) {
        self.occupancy.swap(a, b);
    }
}

/// Draw an i.i.d. Bernoulli(rho) configuration at time zero.
pub fn sample_bernoulli(lattice: &TorusLattice, rho: f64, rng: &mut Stream) -> Result<ExclusionState> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::domain(format!("density must lie in [0,1], got {rho}")));
    }
    let occupancy: Vec<u8> = (0..lattice.site_count())
        .map(|_| u8::from(rng.bernoulli(rho)))
        .collect();
    Ok(ExclusionState::from_occupancy(occupancy))
}

/// Total stirring event rate: one rate-1/6 clock per bond.
pub fn stirring_rate(lattice: &TorusLattice) -> f64 {
    lattice.bond_count() as f64 / 6.0
}

/// Advance the stirring dynamics by `dt` time units in place.
pub fn evolve(lattice: &TorusLattice, state: &mut ExclusionState, dt: f64, rng: &mut Stream) -> Result<()> {
    if dt < 0.0 || !dt.is_finite() {
        return Err(Error::domain(format!("evolution span must be >= 0, got {dt}")));
    }
    let rate = stirring_rate(lattice);
    let mut remaining = dt;
    loop {
        let wait = rng.exponential(rate);
        if wait > remaining {
            break;
        }
        remaining -= wait;
        let bond = rng.index(lattice.bond_count());
        let (a, b) = lattice.bond_endpoints(bond);
        state.swap(a, b);
    }
    state.time += dt;
    Ok(())
}

/// Exact one-point expectation E_eta xi_t(x) through the torus-wrapped
/// kernel; the analytic oracle against which `evolve` is tested.
pub fn duality_expectation(lattice: &TorusLattice, eta: &ExclusionState, x: usize, t: f64) -> Result<f64> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::domain(format!("duality time must be >= 0, got {t}")));
    }
    let l = lattice.side();
    let w = wrapped_kernel_1d(t / 3.0, l);
    let xc = lattice.coords(x);
    let mut total = 0.0;
    for site in 0..lattice.site_count() {
        if !eta.occupied(site) {
            continue;
        }
        let yc = lattice.coords(site);
        let dx = (yc[0] + l - xc[0]) % l;
        let dy = (yc[1] + l - xc[1]) % l;
        let dz = (yc[2] + l - xc[2]) % l;
        total += w[dx] * w[dy] * w[dz];
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StirringSchedule;

    fn lat8() -> TorusLattice {
        TorusLattice::new(8).unwrap()
    }

    #[test]
    fn bernoulli_extremes() {
        let lat = lat8();
        let mut rng = Stream::new(1, 0);
        let empty = sample_bernoulli(&lat, 0.0, &mut rng).unwrap();
        assert_eq!(empty.particle_count(), 0);
        let full = sample_bernoulli(&lat, 1.0, &mut rng).unwrap();
        assert_eq!(full.particle_count(), lat.site_count());
        assert!(sample_bernoulli(&lat, 1.5, &mut rng).is_err());
    }

    #[test]
    fn bernoulli_density_within_binomial_ci() {
        let lat = lat8();
        let rho = 0.3;
        let reps = 200usize;
        let mut occupied = 0usize;
        for r in 0..reps {
            let mut rng = Stream::new(42, r as u64);
            let s = sample_bernoulli(&lat, rho, &mut rng).unwrap();
            occupied += s.particle_count();
        }
        let n = (reps * lat.site_count()) as f64;
        let mean = occupied as f64 / n;
        let sigma = (rho * (1.0 - rho) / n).sqrt();
        assert!((mean - rho).abs() < 4.0 * sigma, "mean {mean} vs {rho}");
    }

    #[test]
    fn particle_count_conserved_and_extremes_frozen() {
        let lat = lat8();
        let mut rng = Stream::new(9, 0);
        let mut state = sample_bernoulli(&lat, 0.4, &mut rng).unwrap();
        let count = state.particle_count();
        let before = state.occupancy().to_vec();
        evolve(&lat, &mut state, 3.0, &mut rng).unwrap();
        assert_eq!(state.particle_count(), count);
        assert_ne!(state.occupancy(), &before[..], "dynamics should move particles");

        for rho in [0.0, 1.0] {
            let mut s = sample_bernoulli(&lat, rho, &mut rng).unwrap();
            let frozen = s.occupancy().to_vec();
            evolve(&lat, &mut s, 2.0, &mut rng).unwrap();
            assert_eq!(s.occupancy(), &frozen[..]);
        }
    }

    #[test]
    fn identical_schedule_gives_bit_identical_trajectory() {
        let lat = lat8();
        let schedule = StirringSchedule::new(123, 7);
        let run = |sched: StirringSchedule| {
            let mut rng = sched.stream();
            let mut s = sample_bernoulli(&lat, 0.5, &mut rng).unwrap();
            evolve(&lat, &mut s, 5.0, &mut rng).unwrap();
            s.occupancy().to_vec()
        };
        assert_eq!(run(schedule), run(schedule));
    }

    #[test]
    fn duality_trivial_cases() {
        let lat = lat8();
        let mut rng = Stream::new(5, 0);
        let eta = sample_bernoulli(&lat, 0.5, &mut rng).unwrap();
        // t = 0 recovers the configuration
        for x in [0usize, 13, 200] {
            let v = duality_expectation(&lat, &eta, x, 0.0).unwrap();
            assert!((v - eta.occupied(x) as u8 as f64).abs() < 1e-12);
        }
        // full configuration stays at one for every x, t
        let full = ExclusionState::from_occupancy(vec![1; lat.site_count()]);
        for t in [0.3, 2.0, 9.0] {
            let v = duality_expectation(&lat, &full, 3, t).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    /// A lone exclusion particle performs a rate-1 walk: six incident
    /// bonds, each at rate 1/6. MC occupation probabilities must match the
    /// torus-wrapped kernel.
    #[test]
    fn single_particle_matches_wrapped_kernel() {
        let lat = lat8();
        let t = 2.0;
        let reps = 40_000usize;
        let origin = lat.index(0, 0, 0);
        let targets = [lat.index(0, 0, 0), lat.index(1, 0, 0), lat.index(2, 7, 0), lat.index(4, 4, 4)];
        let mut hits = [0usize; 4];
        for r in 0..reps {
            let mut rng = Stream::new(2024, r as u64);
            let mut occ = vec![0u8; lat.site_count()];
            occ[origin] = 1;
            let mut s = ExclusionState::from_occupancy(occ);
            evolve(&lat, &mut s, t, &mut rng).unwrap();
            for (k, &tgt) in targets.iter().enumerate() {
                if s.occupied(tgt) {
                    hits[k] += 1;
                }
            }
        }
        let single = ExclusionState::from_occupancy({
            let mut occ = vec![0u8; lat.site_count()];
            occ[origin] = 1;
            occ
        });
        for (k, &tgt) in targets.iter().enumerate() {
            let oracle = duality_expectation(&lat, &single, tgt, t).unwrap();
            let mc = hits[k] as f64 / reps as f64;
            let sigma = (oracle * (1.0 - oracle) / reps as f64).sqrt();
            assert!(
                (mc - oracle).abs() < 4.0 * sigma.max(1e-6),
                "site {tgt}: mc {mc:.5} oracle {oracle:.5} sigma {sigma:.2e}"
            );
        }
    }

    /// Deterministic half-full slab against the kernel oracle.
    #[test]
    fn slab_duality_mc() {
        let lat = lat8();
        let occ: Vec<u8> = (0..lat.site_count())
            .map(|s| u8::from(lat.coords(s)[0] < 4))
            .collect();
        let eta = ExclusionState::from_occupancy(occ.clone());
        let t = 1.0;
        let x = lat.index(0, 0, 0);
        let oracle = duality_expectation(&lat, &eta, x, t).unwrap();
        let reps = 40_000usize;
        let mut hits = 0usize;
        for r in 0..reps {
            let mut rng = Stream::new(77, r as u64);
            let mut s = ExclusionState::from_occupancy(occ.clone());
            evolve(&lat, &mut s, t, &mut rng).unwrap();
            hits += s.occupied(x) as usize;
        }
        let mc = hits as f64 / reps as f64;
        let sigma = (oracle * (1.0 - oracle) / reps as f64).sqrt();
        assert!((mc - oracle).abs() < 4.0 * sigma, "mc {mc} oracle {oracle}");
    }
}
