//! Variable-length self-avoiding walks from the origin of the torus with
//! weight `z^{|ω|}`, sampled by Berretti–Sokal append/delete moves.
//!
//! `g(x) = Σ_{ω: 0 → x} z^{|ω|}` is the stationary endpoint histogram divided
//! by the time spent at the empty walk, since the empty walk is the only one
//! ending at the origin.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fss::{batch_mean_error, blocked_errors, jackknife, ratio_profile, RadialClasses, RadialProfile};
use crate::lattice::{Step, Torus};

/// Dense occupancy is used while `d·L^d` stays below this.
pub const DENSE_OCCUPANCY_LIMIT: u128 = 100_000_000;

#[derive(Clone, Debug)]
enum Occupancy {
    Dense(Vec<u64>),
    Sparse(BTreeSet<u32>),
}

impl Occupancy {
    fn new(torus: &Torus) -> Self {
        if (torus.dim() as u128) * (torus.sites() as u128) <= DENSE_OCCUPANCY_LIMIT {
            Occupancy::Dense(alloc::vec![0; torus.sites().div_ceil(64)])
        } else {
            Occupancy::Sparse(BTreeSet::new())
        }
    }

    #[inline]
    fn contains(&self, x: usize) -> bool {
        match self {
            Occupancy::Dense(bits) => bits[x >> 6] >> (x & 63) & 1 == 1,
            Occupancy::Sparse(set) => set.contains(&(x as u32)),
        }
    }

    #[inline]
    fn set(&mut self, x: usize, on: bool) {
        match self {
            Occupancy::Dense(bits) => {
                if on {
                    bits[x >> 6] |= 1 << (x & 63);
                } else {
                    bits[x >> 6] &= !(1 << (x & 63));
                }
            }
            Occupancy::Sparse(set) => {
                if on {
                    set.insert(x as u32);
                } else {
                    set.remove(&(x as u32));
                }
            }
        }
    }
}

/// Lifting variable of the irreversible chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Grow,
    Shrink,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Appended,
    Deleted,
    Rejected,
}

#[derive(Clone, Debug)]
pub struct SawState {
    torus: Torus,
    z: f64,
    path: Vec<u32>,
    occ: Occupancy,
    p_append: f64,
    p_delete: f64,
    pub direction: Direction,
}

impl SawState {
    /// Empty walk at the origin.
    pub fn new(torus: &Torus, z: f64) -> Result<Self> {
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::param("z", alloc::format!("fugacity must be positive, got {z}")));
        }
        let mut occ = Occupancy::new(torus);
        let o = torus.origin();
        occ.set(o, true);
        let q = torus.degree() as f64 * z;
        Ok(SawState {
            torus: *torus,
            z,
            path: alloc::vec![o as u32],
            occ,
            p_append: q.min(1.0),
            p_delete: (1.0 / q).min(1.0),
            direction: Direction::Grow,
        })
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Number of steps `|ω|`.
    pub fn len(&self) -> usize {
        self.path.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.path.len() == 1
    }

    pub fn tip(&self) -> usize {
        *self.path.last().expect("path holds the origin") as usize
    }

    pub fn path(&self) -> impl Iterator<Item = usize> + '_ {
        self.path.iter().map(|&x| x as usize)
    }

    pub fn is_occupied(&self, x: usize) -> bool {
        self.occ.contains(x)
    }

    /// Self-avoidance, adjacency and occupancy consistency.
    pub fn is_valid(&self) -> bool {
        let mut seen = BTreeSet::new();
        let d = self.torus.dim();
        let path_ok = self.path.iter().enumerate().all(|(i, &x)| {
            seen.insert(x)
                && (i == 0 || Step::all(d).any(|s| self.torus.neighbor(self.path[i - 1] as usize, s) == x as usize))
        });
        let occ_ok = (0..self.torus.sites()).all(|x| self.occ.contains(x) == seen.contains(&(x as u32)));
        path_ok && occ_ok && self.path[0] as usize == self.torus.origin()
    }

    #[inline]
    fn try_append<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let k = rng.random_range(0..self.torus.degree());
        let next = self.torus.neighbor(self.tip(), Step::from_index(k));
        if self.occ.contains(next) || (self.p_append < 1.0 && rng.random::<f64>() >= self.p_append) {
            return false;
        }
        self.occ.set(next, true);
        self.path.push(next as u32);
        true
    }

    #[inline]
    fn try_delete<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        if self.is_empty() || (self.p_delete < 1.0 && rng.random::<f64>() >= self.p_delete) {
            return false;
        }
        let tip = self.path.pop().expect("nonempty") as usize;
        self.occ.set(tip, false);
        true
    }
}

/// Reversible update: append to a uniform neighbour of the tip with
/// probability 1/2 (accepted with `min(1, 2dz)`), otherwise delete the tip
/// (accepted with `min(1, 1/(2dz))`).
pub fn bs_step<R: Rng + ?Sized>(state: &mut SawState, rng: &mut R) -> Move {
    if rng.random::<bool>() {
        if state.try_append(rng) {
            return Move::Appended;
        }
    } else if state.try_delete(rng) {
        return Move::Deleted;
    }
    Move::Rejected
}

/// Lifted update: attempt the move named by `state.direction` with the same
/// acceptance probabilities, and reverse the direction on rejection.
pub fn lifted_bs_step<R: Rng + ?Sized>(state: &mut SawState, rng: &mut R) -> Move {
    let mv = match state.direction {
        Direction::Grow => state.try_append(rng).then_some(Move::Appended),
        Direction::Shrink => state.try_delete(rng).then_some(Move::Deleted),
    };
    match mv {
        Some(m) => m,
        None => {
            state.direction = match state.direction {
                Direction::Grow => Direction::Shrink,
                Direction::Shrink => Direction::Grow,
            };
            Move::Rejected
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampler {
    Reversible,
    Lifted,
}

#[derive(Clone, Copy, Debug)]
pub struct SawRunParams {
    pub burn_in: u64,
    pub steps: u64,
    pub batches: usize,
    /// Spacing of the stored `|ω|` series used for `τ_int`.
    pub series_stride: u64,
    pub sampler: Sampler,
}

/// Measurements of one batch of a chain.
#[derive(Clone, Debug, Default)]
pub struct SawBatch {
    pub steps: u64,
    /// Endpoint visits per class.
    pub endpoint: Vec<f64>,
    pub len_sum: f64,
    /// Visits per walk length.
    pub len_hist: Vec<f64>,
    pub rejections: u64,
    pub flips: u64,
}

/// Everything measured by one chain.
#[derive(Clone, Debug, Default)]
pub struct SawTally {
    pub batches: Vec<SawBatch>,
    pub series: Vec<f64>,
    pub series_stride: u64,
}

/// Run one chain from the empty walk.
pub fn run_saw<R: Rng + ?Sized>(
    torus: &Torus,
    z: f64,
    params: &SawRunParams,
    classes: &RadialClasses,
    rng: &mut R,
) -> Result<SawTally> {
    if params.batches == 0 || params.steps < params.batches as u64 {
        return Err(Error::param("batches", "need at least one step per batch"));
    }
    let mut state = SawState::new(torus, z)?;
    let step = |s: &mut SawState, rng: &mut R| match params.sampler {
        Sampler::Reversible => bs_step(s, rng),
        Sampler::Lifted => lifted_bs_step(s, rng),
    };
    for _ in 0..params.burn_in {
        step(&mut state, rng);
    }
    let stride = params.series_stride.max(1);
    let mut tally = SawTally { batches: Vec::with_capacity(params.batches), series: Vec::new(), series_stride: stride };
    let per = params.steps / params.batches as u64;
    let mut t = 0u64;
    for b in 0..params.batches {
        let n = if b + 1 == params.batches { params.steps - per * b as u64 } else { per };
        let mut batch = SawBatch { steps: n, endpoint: alloc::vec![0.0; classes.len()], ..Default::default() };
        let mut hist: Vec<u64> = Vec::new();
        let mut len_sum = 0u64;
        for _ in 0..n {
            let before = state.direction;
            if step(&mut state, rng) == Move::Rejected {
                batch.rejections += 1;
            }
            if state.direction != before {
                batch.flips += 1;
            }
            let len = state.len();
            batch.endpoint[classes.class_of[state.tip()] as usize] += 1.0;
            len_sum += len as u64;
            if hist.len() <= len {
                hist.resize(len + 1, 0);
            }
            hist[len] += 1;
            if t.is_multiple_of(stride) {
                tally.series.push(len as f64);
            }
            t += 1;
        }
        batch.len_sum = len_sum as f64;
        batch.len_hist = hist.into_iter().map(|c| c as f64).collect();
        tally.batches.push(batch);
    }
    Ok(tally)
}

#[derive(Clone, Debug)]
pub struct SawEstimates {
    pub g: RadialProfile,
    pub chi: f64,
    pub chi_err: f64,
    pub mean_len: f64,
    pub mean_len_err: f64,
    /// Mean over chains of `τ_int` of `|ω|`, in units of the series stride.
    pub tau_int: f64,
    pub tau_converged: bool,
    /// `P(|ω| = k)` with batch errors.
    pub length_distribution: Vec<(f64, f64)>,
    pub steps: u64,
    pub rejection_rate: f64,
}

/// Combine chains; batches from all chains are pooled for the errors.
pub fn saw_estimates(tallies: &[SawTally], classes: &RadialClasses) -> Result<SawEstimates> {
    let batches: Vec<&SawBatch> = tallies.iter().flat_map(|t| t.batches.iter()).collect();
    if batches.is_empty() {
        return Err(Error::input("no batches"));
    }
    let origin_class = 0;
    let endpoint: Vec<Vec<f64>> = batches.iter().map(|b| b.endpoint.clone()).collect();
    if endpoint.iter().map(|e| e[origin_class]).sum::<f64>() == 0.0 {
        return Err(Error::Normalization("the empty walk was never visited"));
    }
    let g = ratio_profile(classes, &endpoint, origin_class)?;
    let chi_in: Vec<Vec<f64>> = batches.iter().map(|b| alloc::vec![b.endpoint[origin_class], b.steps as f64]).collect();
    let (chi, chi_err) = jackknife(&chi_in, |v| v[1] / v[0]);
    let len_in: Vec<Vec<f64>> = batches.iter().map(|b| alloc::vec![b.len_sum, b.steps as f64]).collect();
    let (mean_len, mean_len_err) = jackknife(&len_in, |v| v[0] / v[1]);
    let kmax = batches.iter().map(|b| b.len_hist.len()).max().unwrap_or(0);
    let length_distribution = (0..kmax)
        .map(|k| {
            let fr: Vec<f64> =
                batches.iter().map(|b| b.len_hist.get(k).copied().unwrap_or(0.0) / b.steps as f64).collect();
            batch_mean_error(&fr)
        })
        .collect();
    let mut taus = Vec::new();
    let mut tau_converged = true;
    for t in tallies {
        if let Ok(b) = blocked_errors(&t.series) {
            taus.push(b.tau_int);
            tau_converged &= b.converged;
        }
    }
    let tau_int = if taus.is_empty() { f64::NAN } else { taus.iter().sum::<f64>() / taus.len() as f64 };
    let steps: u64 = batches.iter().map(|b| b.steps).sum();
    let rejections: u64 = batches.iter().map(|b| b.rejections).sum();
    Ok(SawEstimates {
        g,
        chi,
        chi_err,
        mean_len,
        mean_len_err,
        tau_int,
        tau_converged: tau_converged && !taus.is_empty(),
        length_distribution,
        steps,
        rejection_rate: rejections as f64 / steps as f64,
    })
}

/// `z_L = z_c - a L^{-λ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudocriticalPoint {
    pub z_c: f64,
    pub a: f64,
    pub lambda: f64,
    pub l: usize,
}

impl PseudocriticalPoint {
    pub fn new(z_c: f64, a: f64, lambda: f64, l: usize) -> Result<Self> {
        let p = PseudocriticalPoint { z_c, a, lambda, l };
        p.z()?;
        Ok(p)
    }

    pub fn z(&self) -> Result<f64> {
        if self.a < 0.0 || self.lambda <= 0.0 || self.l == 0 {
            return Err(Error::param("a/lambda/L", "need a ≥ 0, λ > 0 and L ≥ 1"));
        }
        let z = self.z_c - self.a * libm::pow(self.l as f64, -self.lambda);
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::param("z_L", alloc::format!("z_c - a L^(-λ) = {z} is not positive")));
        }
        Ok(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rlrw::Domain;
    use crate::rng::stream_rng;

    fn classes(t: &Torus) -> RadialClasses {
        RadialClasses::new(&Domain::Torus(*t))
    }

    fn params(steps: u64, sampler: Sampler) -> SawRunParams {
        SawRunParams { burn_in: 1000, steps, batches: 50, series_stride: 1, sampler }
    }

    #[test]
    fn moves_keep_the_state_valid() {
        let t = Torus::new(2, 4).unwrap();
        let mut s = SawState::new(&t, 0.4).unwrap();
        let mut rng = stream_rng(1, 0, 0);
        for i in 0..20_000 {
            if i % 2 == 0 {
                bs_step(&mut s, &mut rng);
            } else {
                lifted_bs_step(&mut s, &mut rng);
            }
            if i % 97 == 0 {
                assert!(s.is_valid());
            }
        }
        assert!(SawState::new(&t, 0.0).is_err());
    }

    #[test]
    fn tiny_fugacity_stays_empty() {
        let t = Torus::new(3, 5).unwrap();
        let c = classes(&t);
        let tally = run_saw(&t, 1e-9, &params(100_000, Sampler::Reversible), &c, &mut stream_rng(2, 0, 0)).unwrap();
        let e = saw_estimates(&[tally], &c).unwrap();
        assert!(e.mean_len < 1e-3);
        assert_eq!(e.g.bins[0].g, 1.0);
    }

    #[test]
    fn susceptibility_small_z_expansion() {
        let t = Torus::new(2, 5).unwrap();
        let c = classes(&t);
        let z = 1e-3;
        let tally = run_saw(&t, z, &params(10_000_000, Sampler::Reversible), &c, &mut stream_rng(3, 0, 0)).unwrap();
        let e = saw_estimates(&[tally], &c).unwrap();
        assert!(libm::fabs(e.chi - (1.0 + 4.0 * z)) < 1e-4, "chi = {} ± {}", e.chi, e.chi_err);
    }

    #[test]
    fn lifted_flips_equal_rejections() {
        let t = Torus::new(2, 5).unwrap();
        let c = classes(&t);
        let tally = run_saw(&t, 0.2, &params(200_000, Sampler::Lifted), &c, &mut stream_rng(4, 0, 0)).unwrap();
        for b in &tally.batches {
            assert_eq!(b.flips, b.rejections);
        }
    }

    #[test]
    fn reversible_flow_balance_per_length() {
        // append flow k→k+1 equals delete flow k+1→k
        let t = Torus::new(2, 5).unwrap();
        let mut s = SawState::new(&t, 0.2).unwrap();
        let mut rng = stream_rng(5, 0, 0);
        let mut up = [0f64; 8];
        let mut down = [0f64; 8];
        for _ in 0..2_000_000 {
            let k = s.len();
            match bs_step(&mut s, &mut rng) {
                Move::Appended if k < 8 => up[k] += 1.0,
                Move::Deleted if k <= 8 => down[k - 1] += 1.0,
                _ => {}
            }
        }
        for k in 0..4 {
            // a chain crosses each level alternately up and down
            assert!(libm::fabs(up[k] - down[k]) <= 1.0, "level {k}: {} vs {}", up[k], down[k]);
        }
    }

    #[test]
    fn dense_and_sparse_occupancy_agree() {
        let t = Torus::new(2, 6).unwrap();
        let mut dense = Occupancy::new(&t);
        let mut sparse = Occupancy::Sparse(BTreeSet::new());
        for x in [0usize, 5, 35, 17, 5] {
            dense.set(x, true);
            sparse.set(x, true);
        }
        dense.set(17, false);
        sparse.set(17, false);
        for x in 0..36 {
            assert_eq!(dense.contains(x), sparse.contains(x));
        }
    }

    #[test]
    fn pseudocritical_points() {
        let p = PseudocriticalPoint::new(0.11314084, 0.1, 1.0, 10).unwrap();
        assert!(libm::fabs(p.z().unwrap() - 0.10314084) < 1e-15);
        assert_eq!(PseudocriticalPoint::new(0.2, 0.0, 1.0, 4).unwrap().z().unwrap(), 0.2);
        assert!(libm::fabs(PseudocriticalPoint::new(0.2, 0.1, 200.0, 4).unwrap().z().unwrap() - 0.2) < 1e-15);
        assert!(PseudocriticalPoint::new(0.1, 1.0, 1.0, 2).is_err());
    }
}
