//! Ising model on the torus through its high-temperature graphs, sampled by
//! a worm algorithm, and the greedy trail that turns a two-defect graph into
//! a walk length.
//!
//! States are `(A, u, v)` with `A` an edge set whose odd vertices are exactly
//! `{u, v}` (`u ≠ v`) or none (`u = v`), weighted by `z^{|A|}`, `z = tanh β`.
//! The displacement `v - u` is distributed as `⟨s_0 s_x⟩`.

use alloc::vec::Vec;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fss::{jackknife, ratio_profile, RadialClasses, RadialProfile};
use crate::lattice::{Step, Torus};

#[derive(Clone, Debug)]
pub struct HighTempConfig {
    torus: Torus,
    z: f64,
    // bit `x·d + axis` is the edge {x, x + e_axis}
    edges: Vec<u64>,
    occupied: usize,
    pub u: usize,
    pub v: usize,
}

impl HighTempConfig {
    /// Empty graph with both defects at the origin.
    pub fn new(torus: &Torus, z: f64) -> Result<Self> {
        if torus.side() < 3 {
            return Err(Error::param("L", "the worm needs L ≥ 3 so that the torus graph is simple"));
        }
        if !(z > 0.0 && z < 1.0) {
            return Err(Error::param("z", alloc::format!("need 0 < z < 1, got {z}")));
        }
        let o = torus.origin();
        Ok(HighTempConfig {
            torus: *torus,
            z,
            edges: alloc::vec![0; torus.edges().div_ceil(64)],
            occupied: 0,
            u: o,
            v: o,
        })
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// `|A|`.
    pub fn occupied(&self) -> usize {
        self.occupied
    }

    pub fn in_c0(&self) -> bool {
        self.u == self.v
    }

    #[inline]
    pub fn edge_id(&self, x: usize, step: Step) -> usize {
        let d = self.torus.dim();
        if step.is_positive() {
            x * d + step.axis()
        } else {
            self.torus.neighbor(x, step) * d + step.axis()
        }
    }

    #[inline]
    pub fn is_occupied(&self, e: usize) -> bool {
        self.edges[e >> 6] >> (e & 63) & 1 == 1
    }

    #[inline]
    fn toggle(&mut self, e: usize) {
        self.edges[e >> 6] ^= 1 << (e & 63);
        if self.is_occupied(e) {
            self.occupied += 1;
        } else {
            self.occupied -= 1;
        }
    }

    /// Set an edge directly; defects are not updated.
    pub fn set_edge(&mut self, x: usize, step: Step, on: bool) {
        let e = self.edge_id(x, step);
        if self.is_occupied(e) != on {
            self.toggle(e);
        }
    }

    pub fn degree(&self, x: usize) -> usize {
        Step::all(self.torus.dim()).filter(|&s| self.is_occupied(self.edge_id(x, s))).count()
    }

    /// Odd vertices are exactly the defects.
    pub fn parity_ok(&self) -> bool {
        (0..self.torus.sites()).all(|x| {
            let odd = self.degree(x) % 2 == 1;
            let defect = !self.in_c0() && (x == self.u || x == self.v);
            odd == defect
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WormMove {
    Moved,
    Relocated,
    Rejected,
}

/// Relocation attempt probability.
pub fn relocation_probability(dim: usize) -> f64 {
    1.0 / (2 * dim + 1) as f64
}

/// One update. With probability `1/(2d+1)` a relocation is attempted, which
/// places both defects on a uniform site when `u = v` and does nothing
/// otherwise. Else a uniform defect moves to a uniform neighbour, toggling
/// the edge, accepted with `min(1, z^{±1})`.
pub fn worm_step<R: Rng + ?Sized>(cfg: &mut HighTempConfig, rng: &mut R) -> WormMove {
    let d = cfg.torus.dim();
    if rng.random::<f64>() < relocation_probability(d) {
        if cfg.u == cfg.v {
            let w = rng.random_range(0..cfg.torus.sites());
            cfg.u = w;
            cfg.v = w;
            return WormMove::Relocated;
        }
        return WormMove::Rejected;
    }
    let move_v = rng.random::<bool>();
    let from = if move_v { cfg.v } else { cfg.u };
    let step = Step::from_index(rng.random_range(0..2 * d));
    let e = cfg.edge_id(from, step);
    if !cfg.is_occupied(e) && rng.random::<f64>() >= cfg.z {
        return WormMove::Rejected;
    }
    cfg.toggle(e);
    let to = cfg.torus.neighbor(from, step);
    if move_v {
        cfg.v = to;
    } else {
        cfg.u = to;
    }
    debug_assert!(cfg.torus.sites() > 64 || cfg.parity_ok());
    WormMove::Moved
}

/// A strict total order on sites; the default is lexicographic in centered
/// coordinates, which coincides with index order.
#[derive(Clone, Debug, Default)]
pub struct TotalOrder {
    rank: Option<Vec<u32>>,
}

impl TotalOrder {
    pub fn lexicographic() -> Self {
        TotalOrder { rank: None }
    }

    /// Order given by `rank[x]`, which must be a permutation of `0..L^d`.
    pub fn from_ranks(rank: Vec<u32>) -> Result<Self> {
        let mut seen = alloc::vec![false; rank.len()];
        for &r in &rank {
            if r as usize >= rank.len() || core::mem::replace(&mut seen[r as usize], true) {
                return Err(Error::input("ranks must be a permutation"));
            }
        }
        Ok(TotalOrder { rank: Some(rank) })
    }

    #[inline]
    pub fn key(&self, x: usize) -> usize {
        match &self.rank {
            None => x,
            Some(r) => r[x] as usize,
        }
    }
}

/// Reusable traversal marks for [`ising_trail_length`].
#[derive(Clone, Debug, Default)]
pub struct TrailScratch {
    stamp: Vec<u32>,
    generation: u32,
}

impl TrailScratch {
    pub fn new(edges: usize) -> Self {
        TrailScratch { stamp: alloc::vec![0; edges], generation: 0 }
    }

    fn next_generation(&mut self, edges: usize) -> u32 {
        if self.stamp.len() != edges {
            self.stamp = alloc::vec![0; edges];
            self.generation = 0;
        }
        if self.generation == u32::MAX {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 0;
        }
        self.generation += 1;
        self.generation
    }
}

/// Length of the greedy trail from the smaller defect: at each vertex take
/// the smallest neighbour across an occupied, not yet traversed edge; stop
/// when there is none, which happens at the other defect. Zero in `C_0`.
pub fn ising_trail_length(cfg: &HighTempConfig, order: &TotalOrder, scratch: &mut TrailScratch) -> usize {
    if cfg.in_c0() {
        return 0;
    }
    let (x, y) = if order.key(cfg.u) < order.key(cfg.v) { (cfg.u, cfg.v) } else { (cfg.v, cfg.u) };
    let gen = scratch.next_generation(cfg.torus.edges());
    let d = cfg.torus.dim();
    let mut cur = x;
    let mut len = 0;
    loop {
        let mut best: Option<(usize, usize)> = None;
        for step in Step::all(d) {
            let e = cfg.edge_id(cur, step);
            if cfg.is_occupied(e) && scratch.stamp[e] != gen {
                let w = cfg.torus.neighbor(cur, step);
                if best.is_none_or(|(bw, _)| order.key(w) < order.key(bw)) {
                    best = Some((w, e));
                }
            }
        }
        match best {
            Some((w, e)) => {
                scratch.stamp[e] = gen;
                cur = w;
                len += 1;
            }
            None => break,
        }
    }
    debug_assert_eq!(cur, y, "trail must halt at the second defect");
    len
}

#[derive(Clone, Copy, Debug)]
pub struct WormRunParams {
    pub burn_in: u64,
    pub steps: u64,
    pub batches: usize,
    /// Steps between trail measurements; `None` means one sweep, `L^d/(2d)`.
    pub measure_every: Option<u64>,
}

impl WormRunParams {
    pub fn cadence(&self, torus: &Torus) -> u64 {
        self.measure_every.unwrap_or((torus.sites() / torus.degree()).max(1) as u64).max(1)
    }
}

#[derive(Clone, Debug, Default)]
pub struct WormBatch {
    pub steps: u64,
    /// Displacement visits per class, every step.
    pub displacement: Vec<f64>,
    pub measurements: u64,
    pub trail_sum: f64,
    pub c2_measurements: u64,
    pub c2_trail_sum: f64,
}

#[derive(Clone, Debug, Default)]
pub struct WormTally {
    pub batches: Vec<WormBatch>,
    /// Trail length at each measurement.
    pub trail_series: Vec<f64>,
}

pub fn run_worm<R: Rng + ?Sized>(
    torus: &Torus,
    z: f64,
    params: &WormRunParams,
    classes: &RadialClasses,
    order: &TotalOrder,
    rng: &mut R,
) -> Result<WormTally> {
    if params.batches == 0 || params.steps < params.batches as u64 {
        return Err(Error::param("batches", "need at least one step per batch"));
    }
    let mut cfg = HighTempConfig::new(torus, z)?;
    for _ in 0..params.burn_in {
        worm_step(&mut cfg, rng);
    }
    let cadence = params.cadence(torus);
    let mut scratch = TrailScratch::new(torus.edges());
    let mut tally = WormTally::default();
    let per = params.steps / params.batches as u64;
    let mut t = 0u64;
    for b in 0..params.batches {
        let n = if b + 1 == params.batches { params.steps - per * b as u64 } else { per };
        let mut batch = WormBatch { steps: n, displacement: alloc::vec![0.0; classes.len()], ..Default::default() };
        for _ in 0..n {
            worm_step(&mut cfg, rng);
            let disp = torus.displacement(cfg.u, cfg.v);
            batch.displacement[classes.class_of[disp] as usize] += 1.0;
            t += 1;
            if t.is_multiple_of(cadence) {
                let len = ising_trail_length(&cfg, order, &mut scratch) as f64;
                batch.measurements += 1;
                batch.trail_sum += len;
                if !cfg.in_c0() {
                    batch.c2_measurements += 1;
                    batch.c2_trail_sum += len;
                }
                tally.trail_series.push(len);
            }
        }
        tally.batches.push(batch);
    }
    Ok(tally)
}

#[derive(Clone, Debug)]
pub struct WormEstimates {
    pub g: RadialProfile,
    pub chi: f64,
    pub chi_err: f64,
    /// Trail length averaged over all measured configurations (`C_0` counts 0).
    pub mean_len: f64,
    pub mean_len_err: f64,
    /// Trail length averaged over `C_2` measurements only.
    pub mean_len_conditional: f64,
    pub mean_len_conditional_err: f64,
    pub steps: u64,
    pub measurements: u64,
}

pub fn worm_estimates(tallies: &[WormTally], classes: &RadialClasses) -> Result<WormEstimates> {
    let batches: Vec<&WormBatch> = tallies.iter().flat_map(|t| t.batches.iter()).collect();
    if batches.is_empty() {
        return Err(Error::input("no batches"));
    }
    let hist: Vec<Vec<f64>> = batches.iter().map(|b| b.displacement.clone()).collect();
    if hist.iter().map(|h| h[0]).sum::<f64>() == 0.0 {
        return Err(Error::Normalization("displacement zero was never visited"));
    }
    let g = ratio_profile(classes, &hist, 0)?;
    let chi_in: Vec<Vec<f64>> = batches.iter().map(|b| alloc::vec![b.displacement[0], b.steps as f64]).collect();
    let (chi, chi_err) = jackknife(&chi_in, |v| v[1] / v[0]);
    let all: Vec<Vec<f64>> = batches.iter().map(|b| alloc::vec![b.trail_sum, b.measurements as f64]).collect();
    let cond: Vec<Vec<f64>> = batches.iter().map(|b| alloc::vec![b.c2_trail_sum, b.c2_measurements as f64]).collect();
    let measurements: u64 = batches.iter().map(|b| b.measurements).sum();
    let (mean_len, mean_len_err) = if measurements > 0 { jackknife(&all, |v| v[0] / v[1]) } else { (0.0, 0.0) };
    let c2: u64 = batches.iter().map(|b| b.c2_measurements).sum();
    let (mean_len_conditional, mean_len_conditional_err) =
        if c2 > 0 { jackknife(&cond, |v| if v[1] > 0.0 { v[0] / v[1] } else { 0.0 }) } else { (0.0, 0.0) };
    Ok(WormEstimates {
        g,
        chi,
        chi_err,
        mean_len,
        mean_len_err,
        mean_len_conditional,
        mean_len_conditional_err,
        steps: batches.iter().map(|b| b.steps).sum(),
        measurements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;
    use crate::rlrw::Domain;
    use crate::rng::stream_rng;

    #[test]
    fn parity_is_preserved() {
        let t = Torus::new(2, 4).unwrap();
        let mut cfg = HighTempConfig::new(&t, 0.4).unwrap();
        let mut rng = stream_rng(1, 0, 0);
        for _ in 0..50_000 {
            worm_step(&mut cfg, &mut rng);
            assert!(cfg.parity_ok());
        }
        assert!(HighTempConfig::new(&Torus::new(2, 2).unwrap(), 0.3).is_err());
    }

    #[test]
    fn tiny_z_stays_empty() {
        let t = Torus::new(3, 4).unwrap();
        let c = RadialClasses::new(&Domain::Torus(t));
        let p = WormRunParams { burn_in: 0, steps: 100_000, batches: 10, measure_every: Some(1) };
        let tally = run_worm(&t, 1e-9, &p, &c, &TotalOrder::lexicographic(), &mut stream_rng(2, 0, 0)).unwrap();
        let e = worm_estimates(&[tally], &c).unwrap();
        assert!(e.mean_len < 1e-3);
        assert_eq!(e.g.bins[0].g, 1.0);
    }

    #[test]
    fn simple_trails() {
        let t = Torus::new(2, 5).unwrap();
        let mut cfg = HighTempConfig::new(&t, 0.5).unwrap();
        let mut scratch = TrailScratch::default();
        let order = TotalOrder::lexicographic();
        assert_eq!(ising_trail_length(&cfg, &order, &mut scratch), 0);
        let o = t.origin();
        cfg.set_edge(o, Step::new(0, 1), true);
        cfg.v = t.site_index(&Site::new(&[1, 0])).unwrap();
        assert!(cfg.parity_ok());
        assert_eq!(ising_trail_length(&cfg, &order, &mut scratch), 1);
        // repeated evaluation is stable
        assert_eq!(ising_trail_length(&cfg, &order, &mut scratch), 1);
    }

    #[test]
    fn trail_picks_smallest_neighbour() {
        // path 0 → e1 → e1+e2 plus a unit square hanging at e1; the greedy
        // rule at e1 prefers the square (its next vertex (1,-1) < (1,1))
        let t = Torus::new(2, 5).unwrap();
        let idx = |c: [i64; 2]| t.site_index(&Site::new(&c)).unwrap();
        let mut cfg = HighTempConfig::new(&t, 0.5).unwrap();
        cfg.set_edge(idx([0, 0]), Step::new(0, 1), true);
        cfg.set_edge(idx([1, 0]), Step::new(1, 1), true);
        for (a, s) in [([1, 0], Step::new(1, -1)), ([1, -1], Step::new(0, 1)), ([2, -1], Step::new(1, 1)), ([2, 0], Step::new(0, -1))] {
            cfg.set_edge(idx(a), s, true);
        }
        cfg.u = idx([0, 0]);
        cfg.v = idx([1, 1]);
        assert!(cfg.parity_ok());
        assert_eq!(ising_trail_length(&cfg, &TotalOrder::lexicographic(), &mut TrailScratch::default()), 6);
        // reversed order starts at (1,1) and, at (1,0), still prefers the
        // square since (1,-1) now ranks above (0,0)
        let rev = TotalOrder::from_ranks((0..25u32).rev().collect()).unwrap();
        assert_eq!(ising_trail_length(&cfg, &rev, &mut TrailScratch::default()), 6);
        // ranking (0,0) then (1,1) ahead of everything skips the square
        let first = [idx([0, 0]), idx([1, 1])];
        let list: Vec<usize> = first.into_iter().chain((0..25).filter(|x| !first.contains(x))).collect();
        let mut ranks = alloc::vec![0u32; 25];
        for (r, &x) in list.iter().enumerate() {
            ranks[x] = r as u32;
        }
        let o2 = TotalOrder::from_ranks(ranks).unwrap();
        assert_eq!(ising_trail_length(&cfg, &o2, &mut TrailScratch::default()), 2);
    }
}
