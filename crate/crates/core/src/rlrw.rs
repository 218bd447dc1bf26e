//! Random-length random walk: `g(x) = E Σ_{n=0}^{N} 1(S_n = x)`.
//!
//! Monte Carlo estimation on the torus, the exact evaluator
//! `g = Σ_n P(N ≥ n) q_n`, and the same sum on a large absorbing box of `Z^d`.

use alloc::vec::Vec;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{Site, Step, Torus, MAX_DIM};
use crate::orbit::{Boundary, OrbitSpace};
use crate::rng::stream_rng;
use crate::stencil::{Stencil, Sweep, DEFAULT_MAX_STATES};
use crate::walklen::WalkLengthLaw;

/// Support of an occupation field.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Torus(Torus),
    /// The centered box `[-radius, radius]^dim` of `Z^d`, row-major with axis 0 slowest.
    Box { dim: usize, radius: usize },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Torus(t) => t.dim(),
            Domain::Box { dim, .. } => *dim,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Domain::Torus(t) => t.sites(),
            Domain::Box { dim, radius } => (2 * radius + 1).pow(*dim as u32),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn site(&self, idx: usize) -> Site {
        match self {
            Domain::Torus(t) => t.site(idx),
            Domain::Box { dim, radius } => {
                let w = 2 * radius + 1;
                let mut c = [0i64; MAX_DIM];
                let mut rest = idx;
                for a in (0..*dim).rev() {
                    c[a] = (rest % w) as i64 - *radius as i64;
                    rest /= w;
                }
                Site::new(&c[..*dim])
            }
        }
    }

    /// Index of `s`, or `None` when it is outside the domain.
    pub fn index(&self, s: &[i64]) -> Option<usize> {
        match self {
            Domain::Torus(t) => t.site_index(&Site::new(s)).ok(),
            Domain::Box { dim, radius } => {
                if s.len() != *dim {
                    return None;
                }
                let r = *radius as i64;
                let w = 2 * r + 1;
                let mut idx = 0i64;
                for &c in s {
                    if c.abs() > r {
                        return None;
                    }
                    idx = idx * w + c + r;
                }
                Some(idx as usize)
            }
        }
    }
}

/// Expected visits per site, with per-site standard errors.
#[derive(Clone, Debug)]
pub struct OccupationField {
    pub domain: Domain,
    pub values: Vec<f64>,
    /// Standard error of the mean (Monte Carlo) or zero (exact).
    pub stderr: Vec<f64>,
    /// Number of walks, `None` for exact evaluation.
    pub samples: Option<u64>,
    /// `Σ_{m ≥ n*} P(N ≥ m)` for exact evaluation.
    pub truncation_bound: f64,
    /// Probability of absorption before the walk stops (box evaluation).
    pub leaked: f64,
    /// Steps propagated by the exact sweep.
    pub steps: u64,
}

impl OccupationField {
    pub fn get(&self, s: &[i64]) -> Option<f64> {
        self.domain.index(s).map(|i| self.values[i])
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_exact(&self) -> bool {
        self.samples.is_none()
    }

    /// Rows `(site, g, stderr)` in index order.
    pub fn rows(&self) -> impl Iterator<Item = (Site, f64, f64)> + '_ {
        (0..self.values.len()).map(move |i| (self.domain.site(i), self.values[i], self.stderr[i]))
    }

    fn exact(domain: Domain, values: Vec<f64>, sweep: &Sweep) -> Self {
        let n = values.len();
        OccupationField {
            domain,
            values,
            stderr: alloc::vec![0.0; n],
            samples: None,
            truncation_bound: sweep.truncation_bound,
            leaked: sweep.leaked,
            steps: sweep.steps,
        }
    }
}

/// Options of the exact evaluators.
#[derive(Clone, Copy, Debug)]
pub struct DpOptions {
    /// Stop at the first `n` with `P(N ≥ n)` below this.
    pub tail_cut: f64,
    pub max_states: usize,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions { tail_cut: 1e-12, max_states: DEFAULT_MAX_STATES }
    }
}

/// Running per-site sums of visit counts over walks.
#[derive(Clone, Debug)]
pub struct McAccumulator {
    torus: Torus,
    sum: Vec<f64>,
    sumsq: Vec<f64>,
    walks: u64,
    steps: u64,
    counts: Vec<u32>,
    touched: Vec<u32>,
}

impl McAccumulator {
    pub fn new(torus: &Torus) -> Self {
        let n = torus.sites();
        McAccumulator {
            torus: *torus,
            sum: alloc::vec![0.0; n],
            sumsq: alloc::vec![0.0; n],
            walks: 0,
            steps: 0,
            counts: alloc::vec![0; n],
            touched: Vec::new(),
        }
    }

    pub fn walks(&self) -> u64 {
        self.walks
    }

    /// Total walk steps simulated.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Record one walk given as a sequence of visited site indices.
    pub fn record_path<I: IntoIterator<Item = usize>>(&mut self, path: I) {
        for x in path {
            if self.counts[x] == 0 {
                self.touched.push(x as u32);
            }
            self.counts[x] += 1;
        }
        self.flush();
    }

    fn flush(&mut self) {
        for &x in &self.touched {
            let c = f64::from(self.counts[x as usize]);
            self.sum[x as usize] += c;
            self.sumsq[x as usize] += c * c;
            self.counts[x as usize] = 0;
        }
        self.touched.clear();
        self.walks += 1;
    }

    /// Run one random-length walk from the origin.
    pub fn walk<R: Rng + ?Sized>(&mut self, law: &WalkLengthLaw, rng: &mut R) {
        let n = law.sample(rng);
        let deg = self.torus.degree();
        let mut x = self.torus.origin();
        self.counts[x] += 1;
        self.touched.push(x as u32);
        for _ in 0..n {
            x = self.torus.neighbor(x, Step::from_index(rng.random_range(0..deg)));
            if self.counts[x] == 0 {
                self.touched.push(x as u32);
            }
            self.counts[x] += 1;
        }
        self.steps += n;
        self.flush();
    }

    pub fn merge(&mut self, other: &McAccumulator) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sumsq.iter_mut().zip(&other.sumsq) {
            *a += b;
        }
        self.walks += other.walks;
        self.steps += other.steps;
    }

    pub fn finish(&self) -> Result<OccupationField> {
        if self.walks == 0 {
            return Err(Error::input("no walks were recorded"));
        }
        let n = self.walks as f64;
        let values: Vec<f64> = self.sum.iter().map(|s| s / n).collect();
        let stderr = self
            .sumsq
            .iter()
            .zip(&values)
            .map(|(sq, m)| {
                if self.walks < 2 {
                    0.0
                } else {
                    let var = ((sq / n) - m * m).max(0.0) * n / (n - 1.0);
                    libm::sqrt(var / n)
                }
            })
            .collect();
        Ok(OccupationField {
            domain: Domain::Torus(self.torus),
            values,
            stderr,
            samples: Some(self.walks),
            truncation_bound: 0.0,
            leaked: 0.0,
            steps: 0,
        })
    }
}

/// Monte Carlo estimate from `replicas` independent streams of `seed`.
pub fn mc_two_point(
    torus: &Torus,
    law: &WalkLengthLaw,
    replicas: u32,
    walks_per_replica: u64,
    seed: u64,
) -> Result<OccupationField> {
    if replicas == 0 || walks_per_replica == 0 {
        return Err(Error::input("at least one walk is required"));
    }
    let mut acc = McAccumulator::new(torus);
    for r in 0..replicas {
        let mut rng = stream_rng(seed, 0, r);
        for _ in 0..walks_per_replica {
            acc.walk(law, &mut rng);
        }
    }
    acc.finish()
}

/// Exact torus field with one state per site.
pub fn exact_two_point(torus: &Torus, law: &WalkLengthLaw, opts: DpOptions) -> Result<OccupationField> {
    let sweep = Stencil::dense_torus(torus, opts.max_states)?.tail_weighted(law, opts.tail_cut)?;
    let values = sweep.values.clone();
    Ok(OccupationField::exact(Domain::Torus(*torus), values, &sweep))
}

/// Exact torus field computed on symmetry orbits, expanded to all sites.
pub fn exact_two_point_symmetric(torus: &Torus, law: &WalkLengthLaw, opts: DpOptions) -> Result<OccupationField> {
    let space = OrbitSpace::new(torus.dim(), Boundary::Periodic { side: torus.side() })?;
    let sweep = Stencil::orbits(&space, opts.max_states)?.tail_weighted(law, opts.tail_cut)?;
    let values = (0..torus.sites())
        .map(|x| sweep.values[space.rank_of(&torus.site(x)).expect("periodic rank")])
        .collect();
    Ok(OccupationField::exact(Domain::Torus(*torus), values, &sweep))
}

/// Field of the walk on `Z^d`, computed on the absorbing box of `box_radius`
/// and reported on the box of `output_radius ≤ box_radius`.
pub fn exact_two_point_infinite(
    dim: usize,
    law: &WalkLengthLaw,
    box_radius: usize,
    output_radius: usize,
    opts: DpOptions,
) -> Result<OccupationField> {
    if output_radius > box_radius {
        return Err(Error::param("output_radius", "must not exceed box_radius"));
    }
    let space = OrbitSpace::new(dim, Boundary::Absorbing { radius: box_radius })?;
    let sweep = Stencil::orbits(&space, opts.max_states)?.tail_weighted(law, opts.tail_cut)?;
    let domain = Domain::Box { dim, radius: output_radius };
    let values = (0..domain.len())
        .map(|i| sweep.values[space.rank_of(&domain.site(i)).expect("inside box")])
        .collect();
    Ok(OccupationField::exact(domain, values, &sweep))
}

/// Smallest box radius meeting `radius ≥ 3 sqrt(E N)`.
pub fn default_box_radius(law: &WalkLengthLaw) -> usize {
    libm::ceil(3.0 * libm::sqrt(law.mean())) as usize
}

/// Torus minus infinite-lattice field on the torus sites.
#[derive(Clone, Debug)]
pub struct PlateauDiscrepancy {
    pub torus: Torus,
    /// `g_T(x) - g_Z(x)`.
    pub delta: Vec<f64>,
    /// `delta · L^d / E N`.
    pub ratio: Vec<f64>,
}

impl PlateauDiscrepancy {
    /// Largest `|ratio|` over sites with `‖x‖ ≤ r`.
    pub fn max_abs_ratio_within(&self, r: f64) -> f64 {
        self.select_within(r).map(|(_, q)| libm::fabs(q)).fold(0.0, f64::max)
    }

    /// `(min, max)` of the ratio over sites with `‖x‖ ≤ r`.
    pub fn ratio_range_within(&self, r: f64) -> (f64, f64) {
        self.select_within(r)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, q)| (lo.min(q), hi.max(q)))
    }

    fn select_within(&self, r: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r2 = r * r;
        (0..self.delta.len()).filter_map(move |i| {
            ((self.torus.site(i).norm2() as f64) <= r2 + 1e-9).then(|| (i, self.ratio[i]))
        })
    }
}

pub fn plateau_discrepancy(
    torus_field: &OccupationField,
    infinite_field: &OccupationField,
    law: &WalkLengthLaw,
) -> Result<PlateauDiscrepancy> {
    let Domain::Torus(torus) = &torus_field.domain else {
        return Err(Error::input("first field must live on a torus"));
    };
    if infinite_field.domain.dim() != torus.dim() || matches!(infinite_field.domain, Domain::Torus(_)) {
        return Err(Error::input("second field must live on a box of the same dimension"));
    }
    let scale = torus.sites() as f64 / law.mean();
    let mut delta = Vec::with_capacity(torus.sites());
    for (i, s) in torus.iter_sites().enumerate() {
        let gz = infinite_field
            .get(&s)
            .ok_or_else(|| Error::input("infinite-lattice field does not cover the torus box"))?;
        delta.push(torus_field.values[i] - gz);
    }
    let ratio = delta.iter().map(|d| d * scale).collect();
    Ok(PlateauDiscrepancy { torus: *torus, delta, ratio })
}

/// Sum of a box field over all images `x + zL`, indexed by torus site.
pub fn fold_to_torus(field: &OccupationField, torus: &Torus) -> Result<Vec<f64>> {
    if field.domain.dim() != torus.dim() || matches!(field.domain, Domain::Torus(_)) {
        return Err(Error::input("field must live on a box of the torus dimension"));
    }
    let mut out = alloc::vec![0.0; torus.sites()];
    for (i, &g) in field.values.iter().enumerate() {
        let s = torus.reduce(&field.domain.site(i));
        out[torus.site_index(&s)?] += g;
    }
    Ok(out)
}
