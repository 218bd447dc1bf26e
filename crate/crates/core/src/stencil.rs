//! One-step transition stencil of simple random walk and the tail-weighted
//! occupation sweep `g = Σ_n P(N ≥ n) q_n`.
//!
//! The stencil is stored in pull form: `q_{n+1}(x) = (1/2d) Σ_k q_n(nbr(x, k))`.
//! Absorbed neighbours point at a sentinel state that always holds zero.
//! The kernel is symmetric, so pull form equals push form; for orbit spaces
//! the pull from a canonical neighbour is valid because `q_n` is constant on
//! orbits.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{Step, Torus};
use crate::orbit::{Boundary, OrbitSpace};
use crate::walklen::WalkLengthLaw;

/// Default number of states a sweep may allocate.
pub const DEFAULT_MAX_STATES: usize = 1 << 26;

#[derive(Clone, Debug)]
pub struct Stencil {
    degree: usize,
    states: usize,
    nbrs: Vec<u32>,
    weights: Vec<f64>,
    origin: usize,
    // state lists by parity of ‖x‖₁ when the graph is bipartite
    parity_classes: Option<[Vec<u32>; 2]>,
}

/// Result of a tail-weighted sweep.
#[derive(Clone, Debug)]
pub struct Sweep {
    /// Occupation value per state (per site of the orbit for orbit spaces).
    pub values: Vec<f64>,
    /// Number of walk steps propagated.
    pub steps: u64,
    /// `Σ_{m ≥ steps} P(N ≥ m)`: bound on the mass not accumulated.
    pub truncation_bound: f64,
    /// Probability that the walk is absorbed before it stops.
    pub leaked: f64,
}

fn check_budget(needed: u128, budget: usize) -> Result<()> {
    if needed > budget as u128 {
        Err(Error::Resource { needed, budget: budget as u128 })
    } else {
        Ok(())
    }
}

impl Stencil {
    /// Full torus, one state per site.
    pub fn dense_torus(torus: &Torus, max_states: usize) -> Result<Self> {
        check_budget(torus.sites() as u128, max_states)?;
        let nbrs = torus.neighbor_table();
        let parity_classes = torus.side().is_multiple_of(2).then(|| {
            let mut classes = [Vec::new(), Vec::new()];
            for x in 0..torus.sites() {
                classes[usize::from(torus.site(x).parity())].push(x as u32);
            }
            classes
        });
        Ok(Stencil {
            degree: torus.degree(),
            states: torus.sites(),
            nbrs,
            weights: alloc::vec![1.0; torus.sites()],
            origin: torus.origin(),
            parity_classes,
        })
    }

    /// Orbit-reduced torus or absorbing box.
    pub fn orbits(space: &OrbitSpace, max_states: usize) -> Result<Self> {
        check_budget(space.len() as u128, max_states)?;
        let d = space.dim();
        let reps = space.representatives();
        let sentinel = reps.len() as u32;
        let mut nbrs = Vec::with_capacity(reps.len() * 2 * d);
        let mut weights = Vec::with_capacity(reps.len());
        let bipartite = match space.boundary() {
            Boundary::Periodic { side } => side % 2 == 0,
            Boundary::Absorbing { .. } => true,
        };
        let mut classes = [Vec::new(), Vec::new()];
        for (r, c) in reps.iter().enumerate() {
            for step in Step::all(d) {
                nbrs.push(space.neighbor(&c[..d], step).map_or(sentinel, |n| n as u32));
            }
            weights.push(space.orbit_size(&c[..d]));
            if bipartite {
                let parity = c[..d].iter().sum::<usize>() & 1;
                classes[parity].push(r as u32);
            }
        }
        Ok(Stencil {
            degree: 2 * d,
            states: reps.len(),
            nbrs,
            weights,
            origin: 0,
            parity_classes: bipartite.then_some(classes),
        })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Propagate `q_0 = δ_origin` for `steps` steps, calling `visit(n, q_n)`
    /// before each step and once more for `n = steps`. Returning `false` from
    /// `visit` stops early. On bipartite stencils the third argument lists the
    /// states of the parity class reachable at step `n`; entries of `q_n`
    /// outside it hold stale values and must be ignored.
    pub fn propagate<F>(&self, steps: u64, mut visit: F)
    where
        F: FnMut(u64, &[f64], Option<&[u32]>) -> bool,
    {
        let mut cur = alloc::vec![0.0f64; self.states + 1];
        let mut next = alloc::vec![0.0f64; self.states + 1];
        cur[self.origin] = 1.0;
        let origin_parity = self
            .parity_classes
            .as_ref()
            .map(|c| usize::from(!c[0].contains(&(self.origin as u32))))
            .unwrap_or(0);
        let inv = 1.0 / self.degree as f64;
        let deg = self.degree;
        let mut n = 0u64;
        loop {
            let active = self.parity_classes.as_ref().map(|c| c[(origin_parity + n as usize) & 1].as_slice());
            if !visit(n, &cur[..self.states], active) || n == steps {
                return;
            }
            match &self.parity_classes {
                Some(c) => {
                    for &x in &c[(origin_parity + n as usize + 1) & 1] {
                        let x = x as usize;
                        let row = &self.nbrs[x * deg..x * deg + deg];
                        let s: f64 = row.iter().map(|&y| cur[y as usize]).sum();
                        next[x] = s * inv;
                    }
                }
                None => {
                    for (x, row) in self.nbrs.chunks_exact(deg).enumerate() {
                        let s: f64 = row.iter().map(|&y| cur[y as usize]).sum();
                        next[x] = s * inv;
                    }
                }
            }
            core::mem::swap(&mut cur, &mut next);
            n += 1;
        }
    }

    /// `g = Σ_{n < n*} P(N ≥ n) q_n`, stopping at the first `n*` with
    /// `P(N ≥ n*) < tail_cut`.
    pub fn tail_weighted(&self, law: &WalkLengthLaw, tail_cut: f64) -> Result<Sweep> {
        if !(tail_cut > 0.0 && tail_cut < 1.0) {
            return Err(Error::param("tail_cut", "must lie in (0, 1)"));
        }
        let mut g = alloc::vec![0.0f64; self.states];
        let mut stop = 0u64;
        let mut leaked = 0.0;
        let mut prev_mass = 1.0;
        let weights = &self.weights;
        self.propagate(u64::MAX, |n, q, active| {
            let mass: f64 = match active {
                Some(a) => a.iter().map(|&x| weights[x as usize] * q[x as usize]).sum(),
                None => weights.iter().zip(q).map(|(w, v)| w * v).sum(),
            };
            if n > 0 {
                // absorbed between steps n-1 and n; only counts if N ≥ n
                leaked += (prev_mass - mass).max(0.0) * law.tail(n);
            }
            prev_mass = mass;
            let t = law.tail(n);
            if t < tail_cut {
                stop = n;
                return false;
            }
            match active {
                Some(a) => {
                    for &x in a {
                        g[x as usize] += t * q[x as usize];
                    }
                }
                None => {
                    for (gx, qx) in g.iter_mut().zip(q) {
                        *gx += t * qx;
                    }
                }
            }
            true
        });
        Ok(Sweep { values: g, steps: stop, truncation_bound: law.tail_sum_from(stop), leaked })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_n_is_stochastic_on_the_torus() {
        for (d, l) in [(1, 4), (2, 5), (3, 4)] {
            let torus = Torus::new(d, l).unwrap();
            let st = Stencil::dense_torus(&torus, DEFAULT_MAX_STATES).unwrap();
            st.propagate(40, |_, q, active| {
                let mass: f64 = match active {
                    Some(a) => a.iter().map(|&x| q[x as usize]).sum(),
                    None => q.iter().sum(),
                };
                assert!((mass - 1.0).abs() < 1e-12);
                true
            });
        }
    }

    #[test]
    fn orbit_sweep_matches_dense_sweep() {
        let law = WalkLengthLaw::geometric(30.0).unwrap();
        for (d, l) in [(2, 6), (3, 5), (3, 6)] {
            let torus = Torus::new(d, l).unwrap();
            let dense = Stencil::dense_torus(&torus, DEFAULT_MAX_STATES).unwrap().tail_weighted(&law, 1e-13).unwrap();
            let space = OrbitSpace::new(d, Boundary::Periodic { side: l }).unwrap();
            let red = Stencil::orbits(&space, DEFAULT_MAX_STATES).unwrap().tail_weighted(&law, 1e-13).unwrap();
            assert_eq!(dense.steps, red.steps);
            for x in 0..torus.sites() {
                let r = space.rank_of(&torus.site(x)).unwrap();
                assert!((dense.values[x] - red.values[r]).abs() < 1e-12, "d={d} L={l} x={x}");
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let torus = Torus::new(3, 10).unwrap();
        assert!(matches!(Stencil::dense_torus(&torus, 999), Err(Error::Resource { .. })));
    }

    #[test]
    fn box_leak_is_zero_when_walk_cannot_escape() {
        let law = WalkLengthLaw::deterministic(5);
        let space = OrbitSpace::new(2, Boundary::Absorbing { radius: 5 }).unwrap();
        let sweep = Stencil::orbits(&space, DEFAULT_MAX_STATES).unwrap().tail_weighted(&law, 1e-12).unwrap();
        assert_eq!(sweep.leaked, 0.0);
        assert_eq!(sweep.truncation_bound, 0.0);
        let space = OrbitSpace::new(2, Boundary::Absorbing { radius: 2 }).unwrap();
        let sweep = Stencil::orbits(&space, DEFAULT_MAX_STATES).unwrap().tail_weighted(&law, 1e-12).unwrap();
        // P(reach |x_i| = 3 within 5 steps) > 0
        assert!(sweep.leaked > 0.0);
    }
}
