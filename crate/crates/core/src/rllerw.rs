//! Random-length loop-erased random walk.
//!
//! A simple random walk from the origin is loop-erased chronologically until
//! the erased path first has `N` steps. The two-point function counts each
//! site of that final path once.

use alloc::vec::Vec;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{Step, Torus};
use crate::rlrw::{McAccumulator, OccupationField};
use crate::walklen::WalkLengthLaw;

/// Rejected length draws allowed per sample before giving up.
pub const MAX_REJECTIONS: u64 = 1_000_000;

/// Self-avoiding path from the origin, with O(1) membership.
#[derive(Clone, Debug)]
pub struct ErasedPath {
    torus: Torus,
    sites: Vec<u32>,
    // position + 1 of each site on the path, 0 when absent
    position: Vec<u32>,
}

impl ErasedPath {
    pub fn new(torus: &Torus) -> Self {
        let mut p = ErasedPath {
            torus: *torus,
            sites: Vec::new(),
            position: alloc::vec![0; torus.sites()],
        };
        p.reset();
        p
    }

    /// Back to the one-site path at the origin.
    pub fn reset(&mut self) {
        for &x in &self.sites {
            self.position[x as usize] = 0;
        }
        self.sites.clear();
        let o = self.torus.origin();
        self.sites.push(o as u32);
        self.position[o] = 1;
    }

    /// Number of steps of the path.
    pub fn len(&self) -> usize {
        self.sites.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.sites.len() == 1
    }

    pub fn tip(&self) -> usize {
        *self.sites.last().expect("path is never empty") as usize
    }

    pub fn sites(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.sites.iter().map(|&x| x as usize)
    }

    pub fn contains(&self, x: usize) -> bool {
        self.position[x] != 0
    }

    /// Chronological erasure of one walk step to `next`.
    pub fn loop_erase_step(&mut self, next: usize) -> Result<()> {
        let tip = self.tip();
        if next >= self.position.len() || !Step::all(self.torus.dim()).any(|s| self.torus.neighbor(tip, s) == next) {
            return Err(Error::input(alloc::format!("site {next} is not a neighbour of the tip {tip}")));
        }
        self.push_neighbor(next);
        Ok(())
    }

    #[inline]
    fn push_neighbor(&mut self, next: usize) {
        let pos = self.position[next] as usize;
        if pos == 0 {
            self.sites.push(next as u32);
            self.position[next] = self.sites.len() as u32;
        } else {
            for &x in &self.sites[pos..] {
                self.position[x as usize] = 0;
            }
            self.sites.truncate(pos);
        }
    }

    /// Check the self-avoidance and adjacency invariants.
    pub fn is_valid(&self) -> bool {
        let mut seen = alloc::collections::BTreeSet::new();
        let d = self.torus.dim();
        self.sites.iter().enumerate().all(|(i, &x)| {
            seen.insert(x)
                && self.position[x as usize] as usize == i + 1
                && (i == 0 || Step::all(d).any(|s| self.torus.neighbor(self.sites[i - 1] as usize, s) == x as usize))
        }) && self.sites[0] as usize == self.torus.origin()
    }
}

/// Outcome of one loop-erased sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SampleStats {
    /// Length draws rejected because `N ≥ L^d`.
    pub rejections: u64,
    /// Simple-random-walk steps consumed.
    pub walk_steps: u64,
}

/// Draw `N`, then grow `path` (reset first) until its length first equals `N`.
pub fn sample_rllerw<R: Rng + ?Sized>(
    path: &mut ErasedPath,
    law: &WalkLengthLaw,
    rng: &mut R,
) -> Result<SampleStats> {
    let torus = path.torus;
    let mut stats = SampleStats::default();
    let n = loop {
        let n = law.sample(rng);
        if (n as u128) < torus.sites() as u128 {
            break n as usize;
        }
        stats.rejections += 1;
        if stats.rejections >= MAX_REJECTIONS {
            return Err(Error::Numerical(alloc::format!(
                "{MAX_REJECTIONS} consecutive length draws were at least the site count"
            )));
        }
    };
    path.reset();
    let deg = torus.degree();
    while path.len() != n {
        let next = torus.neighbor(path.tip(), Step::from_index(rng.random_range(0..deg)));
        path.push_neighbor(next);
        stats.walk_steps += 1;
    }
    Ok(stats)
}

/// Estimated field plus sampler diagnostics.
#[derive(Clone, Debug)]
pub struct RllerwRun {
    pub field: OccupationField,
    pub stats: SampleStats,
}

/// Accumulate `samples` loop-erased walks into `acc`.
pub fn accumulate_rllerw<R: Rng + ?Sized>(
    acc: &mut McAccumulator,
    torus: &Torus,
    law: &WalkLengthLaw,
    samples: u64,
    rng: &mut R,
) -> Result<SampleStats> {
    let mut path = ErasedPath::new(torus);
    let mut total = SampleStats::default();
    for _ in 0..samples {
        let s = sample_rllerw(&mut path, law, rng)?;
        total.rejections += s.rejections;
        total.walk_steps += s.walk_steps;
        acc.record_path(path.sites());
    }
    Ok(total)
}

pub fn mc_two_point_rllerw<R: Rng + ?Sized>(
    torus: &Torus,
    law: &WalkLengthLaw,
    samples: u64,
    rng: &mut R,
) -> Result<RllerwRun> {
    if samples == 0 {
        return Err(Error::input("at least one sample is required"));
    }
    let mut acc = McAccumulator::new(torus);
    let stats = accumulate_rllerw(&mut acc, torus, law, samples, rng)?;
    Ok(RllerwRun { field: acc.finish()?, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;
    use crate::rng::stream_rng;
    use alloc::collections::BTreeMap;
    use alloc::vec::Vec;

    fn idx(t: &Torus, c: &[i64]) -> usize {
        t.site_index(&Site::new(c)).unwrap()
    }

    #[test]
    fn erasure_examples() {
        let t = Torus::new(2, 5).unwrap();
        let o = idx(&t, &[0, 0]);
        let e1 = idx(&t, &[1, 0]);
        let e12 = idx(&t, &[1, 1]);
        let mut p = ErasedPath::new(&t);
        p.loop_erase_step(e1).unwrap();
        assert_eq!(p.sites().collect::<Vec<_>>(), [o, e1]);
        p.loop_erase_step(o).unwrap();
        assert_eq!(p.sites().collect::<Vec<_>>(), [o]);
        p.loop_erase_step(e1).unwrap();
        p.loop_erase_step(e12).unwrap();
        assert_eq!(p.len(), 2);
        p.loop_erase_step(e1).unwrap();
        assert_eq!(p.sites().collect::<Vec<_>>(), [o, e1]);
        assert!(p.is_valid());
        assert!(p.loop_erase_step(idx(&t, &[2, 2])).is_err());
    }

    #[test]
    fn zero_length_gives_origin() {
        let t = Torus::new(3, 4).unwrap();
        let run = mc_two_point_rllerw(&t, &WalkLengthLaw::deterministic(0), 10, &mut stream_rng(1, 0, 0)).unwrap();
        for (s, g, _) in run.field.rows() {
            assert_eq!(g, if s.norm2() == 0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn unit_length_endpoint_is_uniform() {
        let t = Torus::new(3, 5).unwrap();
        let mut rng = stream_rng(2, 0, 0);
        let mut path = ErasedPath::new(&t);
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        let draws = 100_000u64;
        for _ in 0..draws {
            sample_rllerw(&mut path, &WalkLengthLaw::deterministic(1), &mut rng).unwrap();
            *counts.entry(path.tip()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let e = draws as f64 / 6.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 5 degrees of freedom: P(chi2 > 20.5) ≈ 1e-3
        assert!(chi2 < 20.5, "chi2 = {chi2}");
    }

    #[test]
    fn rejects_lengths_beyond_site_count() {
        let t = Torus::new(1, 3).unwrap();
        let mut path = ErasedPath::new(&t);
        let err = sample_rllerw(&mut path, &WalkLengthLaw::deterministic(3), &mut stream_rng(0, 0, 0));
        assert!(err.is_err());
        let law = WalkLengthLaw::geometric(2.0).unwrap();
        let mut rng = stream_rng(5, 0, 0);
        let mut rejected = 0;
        for _ in 0..1000 {
            let s = sample_rllerw(&mut path, &law, &mut rng).unwrap();
            assert!(path.len() < 3 && path.is_valid());
            rejected += s.rejections;
        }
        assert!(rejected > 0);
    }

    #[test]
    fn fixed_length_paths_are_valid() {
        let t = Torus::new(2, 4).unwrap();
        let mut rng = stream_rng(9, 0, 0);
        let mut path = ErasedPath::new(&t);
        for n in 0..15 {
            sample_rllerw(&mut path, &WalkLengthLaw::deterministic(n), &mut rng).unwrap();
            assert_eq!(path.len(), n as usize);
            assert!(path.is_valid());
        }
    }
}
