//! Orbits of the hyperoctahedral group acting on a torus or on a centered box
//! of `Z^d`.
//!
//! Simple random walk started at the origin is invariant under coordinate
//! permutations and sign flips, so its occupation distribution is constant on
//! orbits. An orbit is represented by its canonical point: absolute values of
//! the coordinates sorted ascending. Canonical points with entries in
//! `0..=bound` are ranked by the colex rank of the strictly increasing
//! sequence `c_i + i`, which gives a dense index in `0..C(bound + d, d)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{Site, Step, Torus, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// The torus `T_L^d`; canonical coordinates run over `0..=L/2`.
    Periodic { side: usize },
    /// The box `[-R, R]^d` of `Z^d`; stepping outside is absorption.
    Absorbing { radius: usize },
}

#[derive(Clone, Debug)]
pub struct OrbitSpace {
    dim: usize,
    bound: usize,
    boundary: Boundary,
    // binom[k][n] = C(n, k) for k ≤ dim, n ≤ bound + dim
    binom: Vec<Vec<u64>>,
    count: usize,
}

pub type Canon = [usize; MAX_DIM];

fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

impl OrbitSpace {
    /// Number of orbit representatives, without building the space.
    pub fn count_for(dim: usize, boundary: Boundary) -> u128 {
        let bound = match boundary {
            Boundary::Periodic { side } => side / 2,
            Boundary::Absorbing { radius } => radius,
        };
        binomial((bound + dim) as u64, dim as u64).unwrap_or(u128::MAX)
    }

    pub fn new(dim: usize, boundary: Boundary) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::param("dim", alloc::format!("must be in 1..={MAX_DIM}")));
        }
        let bound = match boundary {
            Boundary::Periodic { side } if side == 0 => return Err(Error::param("side", "must be positive")),
            Boundary::Periodic { side } => side / 2,
            Boundary::Absorbing { radius } => radius,
        };
        let count = Self::count_for(dim, boundary);
        if count > u32::MAX as u128 - 1 {
            return Err(Error::Resource { needed: count, budget: u32::MAX as u128 - 1 });
        }
        let n_max = bound + dim;
        let binom = (0..=dim)
            .map(|k| (0..=n_max).map(|n| binomial(n as u64, k as u64).unwrap() as u64).collect())
            .collect();
        Ok(OrbitSpace { dim, bound, boundary, binom, count: count as usize })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// Rank of a canonical point (sorted ascending, entries `≤ bound`).
    pub fn rank(&self, canon: &[usize]) -> usize {
        canon
            .iter()
            .enumerate()
            .map(|(i, &c)| self.binom[i + 1][c + i] as usize)
            .sum()
    }

    /// Canonical point of `site`, or `None` outside an absorbing box.
    ///
    /// Periodic sites may be given in any integer coordinates; they are
    /// reduced into the centered box first.
    pub fn canonicalize(&self, site: &[i64]) -> Option<Canon> {
        let mut c = [0usize; MAX_DIM];
        for (slot, &x) in c.iter_mut().zip(site) {
            *slot = match self.boundary {
                Boundary::Periodic { side } => {
                    let l = side as i64;
                    let r = x.rem_euclid(l);
                    r.min(l - r) as usize
                }
                Boundary::Absorbing { radius } => {
                    let a = x.unsigned_abs() as usize;
                    if a > radius {
                        return None;
                    }
                    a
                }
            };
        }
        c[..self.dim].sort_unstable();
        Some(c)
    }

    pub fn rank_of(&self, site: &[i64]) -> Option<usize> {
        self.canonicalize(site).map(|c| self.rank(&c[..self.dim]))
    }

    /// All canonical points, indexed by rank.
    pub fn representatives(&self) -> Vec<Canon> {
        let mut out = alloc::vec![[0usize; MAX_DIM]; self.count];
        let mut cur = [0usize; MAX_DIM];
        self.fill(0, 0, &mut cur, &mut out);
        out
    }

    fn fill(&self, pos: usize, lo: usize, cur: &mut Canon, out: &mut [Canon]) {
        if pos == self.dim {
            out[self.rank(&cur[..self.dim])] = *cur;
            return;
        }
        for v in lo..=self.bound {
            cur[pos] = v;
            self.fill(pos + 1, v, cur, out);
        }
    }

    /// Number of sites in the orbit of a canonical point.
    pub fn orbit_size(&self, canon: &[usize]) -> f64 {
        let d = self.dim;
        let mut size: f64 = (1..=d).map(|k| k as f64).product();
        let mut run = 1usize;
        for i in 1..=d {
            if i < d && canon[i] == canon[i - 1] {
                run += 1;
            } else {
                size /= (1..=run).map(|k| k as f64).product::<f64>();
                run = 1;
            }
        }
        for &c in &canon[..d] {
            let self_mirror = match self.boundary {
                Boundary::Periodic { side } => side % 2 == 0 && 2 * c == side,
                Boundary::Absorbing { .. } => false,
            };
            if c != 0 && !self_mirror {
                size *= 2.0;
            }
        }
        size
    }

    /// Rank of the neighbour of `canon` along `step`, `None` when absorbed.
    pub fn neighbor(&self, canon: &[usize], step: Step) -> Option<usize> {
        let mut s = [0i64; MAX_DIM];
        for (slot, &c) in s.iter_mut().zip(&canon[..self.dim]) {
            *slot = c as i64;
        }
        s[step.axis()] += step.sign();
        self.rank_of(&s[..self.dim])
    }

    /// Torus matching a periodic space.
    pub fn torus(&self) -> Option<Torus> {
        match self.boundary {
            Boundary::Periodic { side } => Torus::new(self.dim, side).ok(),
            Boundary::Absorbing { .. } => None,
        }
    }

    pub fn rank_of_site(&self, site: &Site) -> Option<usize> {
        self.rank_of(site)
    }
}
