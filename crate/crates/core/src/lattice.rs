//! Finite L x L x L periodic lattice with site and bond indexing.
//!
//! Sites are indexed as `(x * L + y) * L + z`. Each site owns the three
//! bonds in the +x, +y, +z directions, so bond `b` connects site `b / 3`
//! to its neighbor along axis `b % 3` and the 3L^3 unoriented bonds are
//! listed exactly once.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct TorusLattice {
    side: usize,
    neighbors: Vec<[u32; 6]>,
}

impl TorusLattice {
    /// Directions 0..3 are +x, +y, +z; directions 3..6 the negatives.
    pub fn new(side: usize) -> Result<Self> {
        if side < 3 {
            return Err(Error::domain(format!(
                "torus side must be >= 3 to keep bonds distinct, got {side}"
            )));
        }
        if side.pow(3) > u32::MAX as usize {
            return Err(Error::domain(format!("torus side {side} too large")));
        }
        let n = side * side * side;
        let mut neighbors = vec![[0u32; 6]; n];
        for x in 0..side {
            for y in 0..side {
                for z in 0..side {
                    let i = (x * side + y) * side + z;
                    let xp = if x + 1 == side { 0 } else { x + 1 };
                    let xm = if x == 0 { side - 1 } else { x - 1 };
                    let yp = if y + 1 == side { 0 } else { y + 1 };
                    let ym = if y == 0 { side - 1 } else { y - 1 };
                    let zp = if z + 1 == side { 0 } else { z + 1 };
                    let zm = if z == 0 { side - 1 } else { z - 1 };
                    neighbors[i] = [
                        ((xp * side + y) * side + z) as u32,
                        ((x * side + yp) * side + z) as u32,
                        ((x * side + y) * side + zp) as u32,
                        ((xm * side + y) * side + z) as u32,
                        ((x * side + ym) * side + z) as u32,
                        ((x * side + y) * side + zm) as u32,
                    ];
                }
            }
        }
        Ok(Self { side, neighbors })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn site_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn bond_count(&self) -> usize {
        3 * self.site_count()
    }

    #[inline]
    pub fn neighbor(&self, site: usize, dir: usize) -> usize {
        self.neighbors[site][dir] as usize
    }

    #[inline]
    pub fn neighbors(&self, site: usize) -> &[u32; 6] {
        &self.neighbors[site]
    }

    #[inline]
    pub fn bond_endpoints(&self, bond: usize) -> (usize, usize) {
        let site = bond / 3;
        (site, self.neighbors[site][bond % 3] as usize)
    }

    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (x * self.side + y) * self.side + z
    }

    pub fn coords(&self, site: usize) -> [usize; 3] {
        let z = site % self.side;
        let y = (site / self.side) % self.side;
        let x = site / (self.side * self.side);
        [x, y, z]
    }

    /// Coordinate-wise displacement from `from` to `to`, each reduced to
    /// the symmetric window (-L/2, L/2].
    pub fn displacement(&self, from: usize, to: usize) -> [i64; 3] {
        let a = self.coords(from);
        let b = self.coords(to);
        let l = self.side as i64;
        let mut d = [0i64; 3];
        for i in 0..3 {
            let mut di = b[i] as i64 - a[i] as i64;
            if di > l / 2 {
                di -= l;
            }
            if di <= -(l + 1) / 2 {
                di += l;
            }
            d[i] = di;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn every_site_has_six_incident_bonds() {
        let lat = TorusLattice::new(4).unwrap();
        let mut incident = vec![0usize; lat.site_count()];
        for b in 0..lat.bond_count() {
            let (a, c) = lat.bond_endpoints(b);
            assert_ne!(a, c);
            incident[a] += 1;
            incident[c] += 1;
        }
        assert!(incident.iter().all(|&k| k == 6));
    }

    #[test]
    fn bond_list_has_no_duplicates() {
        for side in [3usize, 4, 5] {
            let lat = TorusLattice::new(side).unwrap();
            let mut seen = HashSet::new();
            for b in 0..lat.bond_count() {
                let (a, c) = lat.bond_endpoints(b);
                let key = (a.min(c), a.max(c));
                assert!(seen.insert(key), "duplicate bond {key:?} at side {side}");
            }
            assert_eq!(seen.len(), 3 * lat.site_count());
        }
    }

    #[test]
    fn neighbor_relation_is_symmetric() {
        let lat = TorusLattice::new(5).unwrap();
        for s in 0..lat.site_count() {
            for d in 0..6 {
                let t = lat.neighbor(s, d);
                let back = lat.neighbor(t, (d + 3) % 6);
                assert_eq!(back, s);
            }
        }
    }

    #[test]
    fn side_below_three_is_rejected() {
        assert!(TorusLattice::new(2).is_err());
    }
}
