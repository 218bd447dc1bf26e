//! Walk-length laws `N` for random-length walks.
//!
//! Every law is supported on the nonnegative integers and exposes exact tail
//! probabilities `P(N ≥ n)`, which is what the exact evaluators consume.

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Geometric, StandardNormal};

use crate::error::{Error, Result};

/// Family of a walk-length law, without parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LawFamily {
    Geometric,
    HalfNormal,
    DiscretizedExponential,
    CompleteGraphSaw,
    Deterministic,
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    /// `P(N = k) = p(1-p)^k`, `p = 1/(1+m)`.
    Geometric { mean: f64 },
    /// `round(σ|Z|)`, `σ = m·sqrt(π/2)`.
    HalfNormal { mean: f64 },
    /// `round(Y)`, `Y ~ Exp(mean m)`.
    DiscretizedExponential { mean: f64 },
    /// `n - 1 - X`, `X ~ Poisson(1/z)` conditioned on `X ≤ n - 1`.
    /// `log_cdf[j] = ln P(X ≤ j)` (unconditioned) for `j < n`.
    CompleteGraphSaw { sites: u64, fugacity: f64, log_cdf: Vec<f64> },
    Deterministic(u64),
}

/// A law for the walk length `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkLengthLaw(Repr);

fn check_mean(mean: f64) -> Result<()> {
    if mean.is_finite() && mean > 0.0 {
        Ok(())
    } else {
        Err(Error::param("mean", alloc::format!("must be finite and positive, got {mean}")))
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

impl WalkLengthLaw {
    pub fn geometric(mean: f64) -> Result<Self> {
        check_mean(mean)?;
        Ok(WalkLengthLaw(Repr::Geometric { mean }))
    }

    pub fn half_normal(mean: f64) -> Result<Self> {
        check_mean(mean)?;
        Ok(WalkLengthLaw(Repr::HalfNormal { mean }))
    }

    pub fn discretized_exponential(mean: f64) -> Result<Self> {
        check_mean(mean)?;
        Ok(WalkLengthLaw(Repr::DiscretizedExponential { mean }))
    }

    /// Length law of the variable-length SAW on the complete graph `K_n`.
    pub fn complete_graph_saw(sites: u64, fugacity: f64) -> Result<Self> {
        if sites < 1 {
            return Err(Error::param("sites", "must be at least 1"));
        }
        if sites > 1 << 28 {
            return Err(Error::param("sites", "at most 2^28 sites are supported"));
        }
        if !(fugacity.is_finite() && fugacity > 0.0) {
            return Err(Error::param("fugacity", alloc::format!("must be positive, got {fugacity}")));
        }
        let rate = 1.0 / fugacity;
        let ln_rate = libm::log(rate);
        let mut log_cdf = Vec::with_capacity(sites as usize);
        let mut acc = f64::NEG_INFINITY;
        for j in 0..sites {
            let jf = j as f64;
            let log_pmf = -rate + jf * ln_rate - libm::lgamma(jf + 1.0);
            acc = log_add_exp(acc, log_pmf);
            log_cdf.push(acc);
        }
        Ok(WalkLengthLaw(Repr::CompleteGraphSaw { sites, fugacity, log_cdf }))
    }

    pub fn deterministic(n0: u64) -> Self {
        WalkLengthLaw(Repr::Deterministic(n0))
    }

    pub fn family(&self) -> LawFamily {
        match self.0 {
            Repr::Geometric { .. } => LawFamily::Geometric,
            Repr::HalfNormal { .. } => LawFamily::HalfNormal,
            Repr::DiscretizedExponential { .. } => LawFamily::DiscretizedExponential,
            Repr::CompleteGraphSaw { .. } => LawFamily::CompleteGraphSaw,
            Repr::Deterministic(_) => LawFamily::Deterministic,
        }
    }

    /// The parameter `m` of the mean-parameterized laws, or the exact mean otherwise.
    pub fn nominal_mean(&self) -> f64 {
        match self.0 {
            Repr::Geometric { mean } | Repr::HalfNormal { mean } | Repr::DiscretizedExponential { mean } => mean,
            _ => self.mean(),
        }
    }

    /// Largest value with positive probability, if bounded.
    pub fn max_value(&self) -> Option<u64> {
        match self.0 {
            Repr::CompleteGraphSaw { sites, .. } => Some(sites - 1),
            Repr::Deterministic(n0) => Some(n0),
            _ => None,
        }
    }

    /// Exact mean of the (discretized) law.
    ///
    /// For the rounded laws this differs from the nominal `m` by less than 1/2;
    /// the bias is not corrected.
    pub fn mean(&self) -> f64 {
        match &self.0 {
            Repr::Geometric { mean } => *mean,
            Repr::DiscretizedExponential { mean } => {
                let q = libm::exp(-1.0 / mean);
                libm::sqrt(q) / -libm::expm1(-1.0 / mean)
            }
            Repr::HalfNormal { .. } => self.tail_sum_from(1),
            Repr::CompleteGraphSaw { sites, fugacity, log_cdf } => {
                let m = (*sites - 1) as usize;
                let cond_mean_x = if m == 0 {
                    0.0
                } else {
                    libm::exp(log_cdf[m - 1] - log_cdf[m]) / fugacity
                };
                m as f64 - cond_mean_x
            }
            Repr::Deterministic(n0) => *n0 as f64,
        }
    }

    fn half_normal_sigma(mean: f64) -> f64 {
        mean * libm::sqrt(core::f64::consts::FRAC_PI_2)
    }

    /// `P(N ≥ n)`.
    pub fn tail(&self, n: u64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        let nf = n as f64;
        match &self.0 {
            Repr::Geometric { mean } => libm::exp(nf * libm::log(mean / (1.0 + mean))),
            Repr::DiscretizedExponential { mean } => libm::exp(-(nf - 0.5) / mean),
            Repr::HalfNormal { mean } => {
                let sigma = Self::half_normal_sigma(*mean);
                libm::erfc((nf - 0.5) / (sigma * core::f64::consts::SQRT_2))
            }
            Repr::CompleteGraphSaw { sites, log_cdf, .. } => {
                let m = *sites - 1;
                if n > m {
                    0.0
                } else {
                    libm::exp(log_cdf[(m - n) as usize] - log_cdf[m as usize])
                }
            }
            Repr::Deterministic(n0) => {
                if n <= *n0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `Σ_{m ≥ n} P(N ≥ m) = E[(N - n + 1)⁺]`.
    pub fn tail_sum_from(&self, n: u64) -> f64 {
        match &self.0 {
            Repr::Geometric { mean } => self.tail(n) * (1.0 + mean),
            Repr::DiscretizedExponential { mean } => {
                let head = if n == 0 { 1.0 } else { 0.0 };
                let first = n.max(1) as f64;
                head + libm::exp(-(first - 0.5) / mean) / -libm::expm1(-1.0 / mean)
            }
            Repr::HalfNormal { .. } => {
                let mut sum = 0.0;
                let mut m = n;
                loop {
                    let t = self.tail(m);
                    sum += t;
                    if t <= 1e-18 * sum || t == 0.0 {
                        break;
                    }
                    m += 1;
                }
                sum
            }
            Repr::CompleteGraphSaw { sites, .. } => (n..*sites).map(|m| self.tail(m)).sum(),
            Repr::Deterministic(n0) => (*n0 + 1).saturating_sub(n) as f64,
        }
    }

    /// Draw one length.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.0 {
            Repr::Geometric { mean } => Geometric::new(1.0 / (1.0 + mean))
                .expect("validated mean")
                .sample(rng),
            Repr::HalfNormal { mean } => {
                let z: f64 = StandardNormal.sample(rng);
                libm::round(Self::half_normal_sigma(*mean) * libm::fabs(z)) as u64
            }
            Repr::DiscretizedExponential { mean } => {
                let e: f64 = Exp1.sample(rng);
                libm::round(mean * e) as u64
            }
            Repr::CompleteGraphSaw { sites, log_cdf, .. } => {
                let m = (*sites - 1) as usize;
                // inverse CDF of X | X ≤ m
                let u: f64 = rng.random();
                let target = libm::log(u) + log_cdf[m];
                let x = log_cdf.partition_point(|&lc| lc < target).min(m);
                (m - x) as u64
            }
            Repr::Deterministic(n0) => *n0,
        }
    }
}

/// Scaling limit `F(t) = lim P(N_L / a_L² ≥ t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalingLimitF {
    Constant(f64),
    /// `F(t) = e^{-t}`.
    ExponentialTail,
    /// `F(t) = 1` for `t ≤ 1`, `0` after.
    UnitStep,
}

impl ScalingLimitF {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ScalingLimitF::Constant(c) => c,
            ScalingLimitF::ExponentialTail => libm::exp(-t),
            ScalingLimitF::UnitStep => {
                if t <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Scaling limit for a law with mean (or fixed length) `L^μ`, normalized by
/// `a_L = L^κ`. Returns `None` where no closed form is provided.
pub fn limit_f(family: LawFamily, mean_exponent: f64, scale_exponent: f64) -> Option<ScalingLimitF> {
    let gap = 2.0 * scale_exponent - mean_exponent;
    let tol = 1e-12 * (1.0 + libm::fabs(mean_exponent));
    match family {
        LawFamily::Geometric | LawFamily::DiscretizedExponential | LawFamily::Deterministic => {
            if gap > tol {
                // a_L² grows faster than N_L
                Some(ScalingLimitF::Constant(0.0))
            } else if gap < -tol {
                Some(ScalingLimitF::Constant(1.0))
            } else if family == LawFamily::Deterministic {
                Some(ScalingLimitF::UnitStep)
            } else {
                Some(ScalingLimitF::ExponentialTail)
            }
        }
        LawFamily::HalfNormal | LawFamily::CompleteGraphSaw => None,
    }
}

/// Empirical `P(N / scale ≥ t)` at each `t`.
pub fn empirical_f(samples: &[u64], scale: f64, ts: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = samples.iter().map(|&n| n as f64 / scale).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    ts.iter()
        .map(|&t| (sorted.len() - sorted.partition_point(|&v| v < t)) as f64 / n)
        .collect()
}
