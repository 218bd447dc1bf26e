//! Theoretical predictions: the Gaussian local approximation `p̄_n`, the
//! scaling-limit integral and its closed forms, finite-size exponent
//! predictions, and numerical checkers for the auxiliary bounds used to
//! control the torus image sums.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::Torus;
use crate::orbit::{Boundary, OrbitSpace};
use crate::stencil::{Stencil, DEFAULT_MAX_STATES};
use crate::walklen::ScalingLimitF;

/// `p̄_n(x) = 2 (d/(2πn))^{d/2} exp(-‖x‖² d/(2n))`, with `d = x.len()`.
pub fn pbar(n: u64, x: &[i64]) -> f64 {
    let r2: i64 = x.iter().map(|c| c * c).sum();
    pbar_r2(n, r2 as f64, x.len())
}

pub fn pbar_r2(n: u64, r2: f64, d: usize) -> f64 {
    let (n, d) = (n as f64, d as f64);
    2.0 * libm::pow(d / (2.0 * PI * n), d / 2.0) * libm::exp(-r2 * d / (2.0 * n))
}

/// `P(S_n = x)` for simple random walk on `Z^d`, by DP on the orbit space
/// of the box of radius `n` (the walk cannot reach its boundary).
pub fn srw_pn_exact(n: u64, x: &[i64]) -> Result<f64> {
    let d = x.len();
    let l1: i64 = x.iter().map(|c| c.abs()).sum();
    if l1 > n as i64 || (n as i64 + l1) % 2 == 1 {
        return Ok(0.0);
    }
    let space = OrbitSpace::new(d, Boundary::Absorbing { radius: n.max(1) as usize })?;
    let stencil = Stencil::orbits(&space, DEFAULT_MAX_STATES)?;
    let target = space.rank_of(x).expect("x lies in the box");
    let mut p = 0.0;
    stencil.propagate(n, |k, q, _| {
        if k == n {
            p = q[target];
        }
        true
    });
    Ok(p)
}

// Gauss–Kronrod 7/15 nodes on [-1, 1], positive half.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, libm::fabs((k - g) * h))
}

/// Quadrature value and its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss–Kronrod over `[a, b]` split at `breaks`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], abs_tol: f64) -> Result<Quadrature> {
    const MAX_INTERVALS: usize = 5000;
    let mut pts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    pts.push(a);
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    let mut iv: Vec<(f64, f64, f64, f64)> = pts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let err: f64 = iv.iter().map(|t| t.3).sum();
        let value: f64 = iv.iter().map(|t| t.2).sum();
        if !value.is_finite() {
            return Err(Error::Numerical(String::from("integrand is not finite")));
        }
        if err <= abs_tol {
            return Ok(Quadrature { value, error: err, intervals: iv.len() });
        }
        if iv.len() >= MAX_INTERVALS {
            return Err(Error::Numerical(format!(
                "quadrature did not converge: residual estimate {err:e} after {} intervals",
                iv.len()
            )));
        }
        let (worst, _) = iv
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = iv.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        iv.push((lo, mid, v1, e1));
        iv.push((mid, hi, v2, e2));
    }
}

pub const LIMIT_TOLERANCE: f64 = 1e-10;

/// `c₀ π^{-d/2} (d/2) Γ(d/2 - 1)`, the limit for constant `F`.
pub fn constant_limit(c0: f64, d: usize) -> f64 {
    let h = d as f64 / 2.0;
    c0 * libm::pow(PI, -h) * h * libm::tgamma(h - 1.0)
}

/// `π^{-d/2}(d/2) ∫_0^∞ s^{d/2-2} e^{-s} F(dξ²/(2s)) ds`, integrated in
/// `u = √s` so the `d = 3` endpoint singularity disappears.
pub fn limit_integral(f: ScalingLimitF, d: usize, xi: f64) -> Result<Quadrature> {
    if d < 3 {
        return Err(Error::param("d", "the limit integral needs d ≥ 3"));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::param("xi", "must be positive and finite"));
    }
    let b = d as f64 * xi * xi / 2.0;
    let pre = libm::pow(PI, -(d as f64) / 2.0) * d as f64 / 2.0;
    let e = d as i32 - 3;
    let integrand = move |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        2.0 * libm::pow(u, e as f64) * libm::exp(-u * u) * f.eval(b / (u * u))
    };
    let upper = 12.0 + libm::sqrt(d as f64);
    let breaks = [libm::sqrt(b)];
    let q = integrate(integrand, 0.0, upper, &breaks, LIMIT_TOLERANCE / pre)?;
    Ok(Quadrature { value: pre * q.value, error: pre * q.error, intervals: q.intervals })
}

/// Scaling limit of `‖x‖^{d-2} g_T(x)` at `‖x‖ = ξ a_L`: the integral plus
/// the plateau term `α ξ^{d-2}`. Constant `F` uses the closed form.
pub fn torus_limit_value(f: ScalingLimitF, d: usize, xi: f64, alpha: f64) -> Result<f64> {
    let head = match f {
        ScalingLimitF::Constant(c0) => {
            if d < 3 {
                return Err(Error::param("d", "the limit integral needs d ≥ 3"));
            }
            constant_limit(c0, d)
        }
        _ => limit_integral(f, d, xi)?.value,
    };
    Ok(head + alpha * libm::pow(xi, d as f64 - 2.0))
}

/// `c_head ‖x‖^{2-d} + c_plateau L^{plateau_exponent}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlateauAnsatz {
    pub dim: usize,
    pub c_head: f64,
    pub c_plateau: f64,
    pub plateau_exponent: f64,
}

impl PlateauAnsatz {
    pub fn eval(&self, r: f64, l: f64) -> f64 {
        self.c_head * libm::pow(r, 2.0 - self.dim as f64) + self.c_plateau * libm::pow(l, self.plateau_exponent)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regime {
    Critical,
    Pseudocritical { lambda: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingPrediction {
    pub mu: f64,
    pub mean_len_exponent: f64,
    pub chi_exponent: f64,
    pub plateau_exponent: f64,
    pub collapse_exponent: f64,
}

/// Exponents with `μ = min(λ, d/2)` (`μ = d/2` at criticality).
pub fn predict_scaling(regime: Regime, d: usize) -> Result<ScalingPrediction> {
    if d < 3 {
        return Err(Error::param("d", "predictions need d ≥ 3"));
    }
    let half = d as f64 / 2.0;
    let mu = match regime {
        Regime::Critical => half,
        Regime::Pseudocritical { lambda } => {
            if !(lambda > 0.0) {
                return Err(Error::param("lambda", "must be positive"));
            }
            lambda.min(half)
        }
    };
    let df = d as f64;
    Ok(ScalingPrediction {
        mu,
        mean_len_exponent: mu,
        chi_exponent: mu,
        plateau_exponent: mu - df,
        collapse_exponent: (df - mu) / (df - 2.0),
    })
}

// ---- bound checkers -------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub passed: bool,
    pub instances: u64,
    pub detail: String,
    pub counterexample: Option<String>,
}

impl BoundCheck {
    fn new(name: &'static str) -> Self {
        BoundCheck { name, passed: true, instances: 0, detail: String::new(), counterexample: None }
    }

    fn fail(&mut self, what: String) {
        if self.passed {
            self.counterexample = Some(what);
        }
        self.passed = false;
    }
}

/// `‖x + zL‖` for a torus site `x`.
pub fn image_norm(x: &[i64], z: &[i64], l: i64) -> f64 {
    libm::sqrt(x.iter().zip(z).map(|(&a, &b)| ((a + b * l) * (a + b * l)) as f64).sum())
}

/// `½‖z‖L ≤ ‖x + zL‖ ≤ 2d‖z‖L` for every `x ∈ T_L^d` and every nonzero `z`
/// with `‖z‖_∞ ≤ z_max`, in exact integer arithmetic.
pub fn image_norm_bounds(dims: &[usize], sides: &[usize], z_max: i64) -> Result<BoundCheck> {
    let mut check = BoundCheck::new("image_norm");
    for &d in dims {
        for &side in sides {
            let torus = Torus::new(d, side)?;
            let l = side as i64;
            let zs: Vec<Vec<i64>> = lattice_box(d, z_max).into_iter().filter(|z| z.iter().any(|&c| c != 0)).collect();
            for x in torus.iter_sites() {
                for z in &zs {
                    let img: i64 = x.iter().zip(z).map(|(&a, &b)| (a + b * l) * (a + b * l)).sum();
                    let zl2: i64 = z.iter().map(|c| c * c).sum::<i64>() * l * l;
                    check.instances += 1;
                    let d2 = (d * d) as i64;
                    if !(zl2 <= 4 * img && img <= 4 * d2 * zl2) {
                        check.fail(format!("d={d} L={l} x={:?} z={z:?}: ‖x+zL‖²={img}, (‖z‖L)²={zl2}", &x[..]));
                    }
                }
            }
        }
    }
    check.detail = format!("exhaustive over x ∈ T_L^d, 0 < ‖z‖_∞ ≤ {z_max}");
    Ok(check)
}

fn lattice_box(d: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = alloc::vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-r..=r).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

/// Truncated `Σ_{z ∈ Z^d \ 0} e^{-a‖z‖²}` with a rigorous tail bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaSum {
    pub value: f64,
    pub tail_bound: f64,
    /// Truncation at `|z_i| ≤ cutoff`.
    pub cutoff: i64,
}

pub fn theta_sum(a: f64, d: usize) -> Result<ThetaSum> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::param("a", "must be positive and finite"));
    }
    // first Z with e^{-aZ²} < 1e-16
    let cutoff = libm::ceil(libm::sqrt(16.0 * libm::log(10.0) / a)) as i64;
    // t = θ(a) - 1, kept separate so large a does not cancel
    let mut t = 0.0;
    for z in (1..=cutoff).rev() {
        t += 2.0 * libm::exp(-a * (z * z) as f64);
    }
    // Σ_{|z|>Z} e^{-az²} ≤ 2∫_Z^∞ e^{-at²} dt
    let tail1 = libm::sqrt(PI / a) * libm::erfc(libm::sqrt(a) * cutoff as f64);
    // (1 + t)^d - 1 = Σ_{k≥1} C(d,k) t^k
    let binom_sum = |t: f64| {
        let mut c = 1.0;
        let mut acc = 0.0;
        for k in 1..=d {
            c = c * (d + 1 - k) as f64 / k as f64;
            acc += c * libm::pow(t, k as f64);
        }
        acc
    };
    let value = binom_sum(t);
    let tail_bound = binom_sum(t + tail1) - value;
    Ok(ThetaSum { value, tail_bound, cutoff })
}

/// Lower and upper bounds `[√(π/a) erfc(√a)]^d - 1` and
/// `(π/a)^{d/2} (1 + √(a/π))^d` on the theta sum.
pub fn theta_sum_bracket(a: f64, d: usize) -> (f64, f64) {
    let df = d as f64;
    let lo = libm::pow(libm::sqrt(PI / a) * libm::erfc(libm::sqrt(a)), df) - 1.0;
    let hi = libm::pow(PI / a, df / 2.0) * libm::pow(1.0 + libm::sqrt(a / PI), df);
    (lo, hi)
}

pub fn theta_sum_bounds(dims: &[usize], a_values: &[f64]) -> Result<BoundCheck> {
    let mut check = BoundCheck::new("theta_sum_bounds");
    let mut worst_tail: f64 = 0.0;
    for &d in dims {
        for &a in a_values {
            let s = theta_sum(a, d)?;
            let (lo, hi) = theta_sum_bracket(a, d);
            worst_tail = worst_tail.max(s.tail_bound);
            check.instances += 1;
            if !(lo <= s.value && s.value + s.tail_bound <= hi) {
                check.fail(format!("d={d} a={a}: sum {} (+{:e}) outside [{lo}, {hi}]", s.value, s.tail_bound));
            }
        }
    }
    check.detail = format!("truncated sums, largest tail bound {worst_tail:e}");
    Ok(check)
}

/// `∫_{√a}^∞ e^{-ds²} s^{d-1} ds`.
pub fn theta_lower_integral(a: f64, d: usize) -> Result<f64> {
    let df = d as f64;
    let lo = libm::sqrt(a);
    let hi = libm::sqrt(a + 60.0 / df);
    let scale = libm::exp(-df * a) * libm::pow(lo.max(1e-300), df - 1.0).max(1e-300);
    let q = integrate(|s| libm::exp(-df * s * s) * libm::pow(s, df - 1.0), lo, hi, &[], 1e-13 * scale.max(1e-200))?;
    Ok(q.value)
}

/// Envelope constants fitted on a grid of `a`: `c = sup S(a) a^{d/2}` and
/// `c' = inf S(a) / (a^{-d/2} ∫_{√a}^∞ e^{-ds²}s^{d-1}ds)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaEnvelope {
    pub dim: usize,
    pub c: f64,
    pub c_prime: f64,
}

pub fn theta_envelope(d: usize, a_values: &[f64]) -> Result<ThetaEnvelope> {
    if a_values.is_empty() {
        return Err(Error::input("empty a grid"));
    }
    let mut c: f64 = 0.0;
    let mut c_prime = f64::INFINITY;
    for &a in a_values {
        let s = theta_sum(a, d)?;
        let scale = libm::pow(a, -(d as f64) / 2.0);
        c = c.max((s.value + s.tail_bound) / scale);
        let low = theta_lower_integral(a, d)?;
        if low > 0.0 {
            c_prime = c_prime.min(s.value / (scale * low));
        }
    }
    Ok(ThetaEnvelope { dim: d, c, c_prime })
}

/// The two-sided envelope exists: fitted `c, c'` are positive and finite.
pub fn theta_envelope_check(dims: &[usize], a_values: &[f64]) -> Result<BoundCheck> {
    let mut check = BoundCheck::new("theta_envelope");
    let mut parts = Vec::new();
    for &d in dims {
        let env = theta_envelope(d, a_values)?;
        check.instances += a_values.len() as u64;
        parts.push(format!("d={d}: c={:.6} c'={:.6}", env.c, env.c_prime));
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(env.c) && ok(env.c_prime)) {
            check.fail(format!("d={d}: c={} c'={}", env.c, env.c_prime));
        }
    }
    check.detail = format!("constants are existential; fitted on the a grid ({})", parts.join(", "));
    Ok(check)
}

/// `|p̄_n(y) - p̄_{n+1}(y)| ≤ (d/2π)^{d/2} (d+2) n^{-1-d/2}` for `n ≤ n_max`
/// and every `‖y‖² ≤ r_max²` realized by a lattice point.
pub fn increment_bound(dims: &[usize], n_max: u64, r_max: i64) -> BoundCheck {
    let mut check = BoundCheck::new("gaussian_increment");
    let mut tightest: f64 = 0.0;
    for &d in dims {
        let r2s = representable_r2(d, r_max);
        let df = d as f64;
        let pre = libm::pow(df / (2.0 * PI), df / 2.0) * (df + 2.0);
        for n in 1..=n_max {
            let bound = pre * libm::pow(n as f64, -1.0 - df / 2.0);
            for &r2 in &r2s {
                let diff = libm::fabs(pbar_r2(n, r2 as f64, d) - pbar_r2(n + 1, r2 as f64, d));
                check.instances += 1;
                tightest = tightest.max(diff / bound);
                if diff > bound {
                    check.fail(format!("d={d} n={n} ‖y‖²={r2}: {diff:e} > {bound:e}"));
                }
            }
        }
    }
    check.detail = format!("n ≤ {n_max}, ‖y‖ ≤ {r_max}; largest ratio to bound {tightest:.4}");
    check
}

/// Values `‖y‖² ≤ r_max²` attained by `y ∈ Z^d`.
fn representable_r2(d: usize, r_max: i64) -> Vec<i64> {
    let cap = (r_max * r_max) as usize;
    let mut reach = alloc::vec![false; cap + 1];
    reach[0] = true;
    for _ in 0..d {
        let mut next = alloc::vec![false; cap + 1];
        for (s, _) in reach.iter().enumerate().filter(|(_, &r)| r) {
            let mut c = 0usize;
            while s + c * c <= cap {
                next[s + c * c] = true;
                c += 1;
            }
        }
        reach = next;
    }
    reach.iter().enumerate().filter(|(_, &r)| r).map(|(s, _)| s as i64).collect()
}

/// `C_n = max_{x: n ↔ x} |p_n(x) - p̄_n(x)| n^{d/2+1}` over a range of `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalCltReport {
    pub dim: usize,
    pub ns: Vec<u64>,
    pub constants: Vec<f64>,
}

impl LocalCltReport {
    pub fn sup_over(&self, lo: u64, hi: u64) -> f64 {
        self.ns
            .iter()
            .zip(&self.constants)
            .filter(|(&n, _)| n >= lo && n <= hi)
            .map(|(_, &c)| c)
            .fold(0.0, f64::max)
    }
}

pub fn local_clt_constants(d: usize, n_min: u64, n_max: u64) -> Result<LocalCltReport> {
    if n_min == 0 || n_min > n_max {
        return Err(Error::param("n", "need 1 ≤ n_min ≤ n_max"));
    }
    let space = OrbitSpace::new(d, Boundary::Absorbing { radius: n_max as usize })?;
    let stencil = Stencil::orbits(&space, DEFAULT_MAX_STATES)?;
    let r2: Vec<f64> = space
        .representatives()
        .iter()
        .map(|c| c[..d].iter().map(|&v| (v * v) as f64).sum())
        .collect();
    let mut report = LocalCltReport { dim: d, ns: Vec::new(), constants: Vec::new() };
    stencil.propagate(n_max, |n, q, active| {
        if n >= n_min {
            let active = active.expect("the box is bipartite");
            let worst = active
                .iter()
                .map(|&s| libm::fabs(q[s as usize] - pbar_r2(n, r2[s as usize], d)))
                .fold(0.0, f64::max);
            report.ns.push(n);
            report.constants.push(worst * libm::pow(n as f64, d as f64 / 2.0 + 1.0));
        }
        true
    });
    Ok(report)
}

/// The scaled error does not grow: `sup_{[mid, n_max]} C_n ≤ 1.1 sup_{[n_min, mid]} C_n`.
pub fn local_clt_check(d: usize, n_min: u64, mid: u64, n_max: u64) -> Result<(BoundCheck, LocalCltReport)> {
    let report = local_clt_constants(d, n_min, n_max)?;
    let early = report.sup_over(n_min, mid);
    let late = report.sup_over(mid, n_max);
    let mut check = BoundCheck::new("local_clt");
    check.instances = report.ns.len() as u64;
    if !(late <= 1.1 * early && early.is_finite()) {
        check.fail(format!("sup C_n = {late} on [{mid}, {n_max}] vs {early} on [{n_min}, {mid}]"));
    }
    check.detail = format!("d={d}: sup C_n = {early:.6} on [{n_min}, {mid}], {late:.6} on [{mid}, {n_max}]");
    Ok((check, report))
}

#[derive(Clone, Debug)]
pub struct LemmaGrid {
    pub image_dims: Vec<usize>,
    pub image_sides: Vec<usize>,
    pub image_z_max: i64,
    pub theta_dims: Vec<usize>,
    pub theta_a: Vec<f64>,
    pub envelope_a: Vec<f64>,
    pub increment_dims: Vec<usize>,
    pub increment_n_max: u64,
    pub increment_r_max: i64,
    pub clt_dim: usize,
    pub clt_n: (u64, u64, u64),
}

impl Default for LemmaGrid {
    fn default() -> Self {
        LemmaGrid {
            image_dims: alloc::vec![1, 2, 3],
            image_sides: (1..=8).collect(),
            image_z_max: 3,
            theta_dims: (1..=5).collect(),
            theta_a: alloc::vec![0.1, 1.0, 10.0],
            envelope_a: (-30..=20).map(|k| libm::pow(10.0, k as f64 / 10.0)).collect(),
            increment_dims: (1..=5).collect(),
            increment_n_max: 1000,
            increment_r_max: 20,
            clt_dim: 3,
            clt_n: (10, 100, 200),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LemmaReport {
    pub checks: Vec<BoundCheck>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn check_lemma_bounds(grid: &LemmaGrid) -> Result<LemmaReport> {
    let (lo, mid, hi) = grid.clt_n;
    Ok(LemmaReport {
        checks: alloc::vec![
            image_norm_bounds(&grid.image_dims, &grid.image_sides, grid.image_z_max)?,
            theta_envelope_check(&grid.theta_dims, &grid.envelope_a)?,
            theta_sum_bounds(&grid.theta_dims, &grid.theta_a)?,
            increment_bound(&grid.increment_dims, grid.increment_n_max, grid.increment_r_max),
            local_clt_check(grid.clt_dim, lo, mid, hi)?.0,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pbar_values() {
        let v = pbar(1, &[0, 0, 0]);
        assert!((v - 2.0 * libm::pow(3.0 / (2.0 * PI), 1.5)).abs() < 1e-15);
        assert!((v - 0.659845).abs() < 1e-6);
        assert_eq!(pbar(7, &[1, -2, 3]), pbar(7, &[-1, 2, -3]));
    }

    #[test]
    fn exact_probabilities() {
        assert!((srw_pn_exact(1, &[1, 0]).unwrap() - 0.25).abs() < 1e-15);
        assert!((srw_pn_exact(2, &[0]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(srw_pn_exact(3, &[1, 1]).unwrap(), 0.0);
        assert_eq!(srw_pn_exact(2, &[3, 0]).unwrap(), 0.0);
        // p_4(0) in d=1: C(4,2)/16
        assert!((srw_pn_exact(4, &[0]).unwrap() - 0.375).abs() < 1e-15);
    }

    #[test]
    fn constant_f_matches_gamma_form() {
        for d in 3..=6 {
            for xi in [0.3, 1.0, 2.5] {
                let q = limit_integral(ScalingLimitF::Constant(1.0), d, xi).unwrap();
                assert!((q.value - constant_limit(1.0, d)).abs() < 1e-9, "d={d}");
            }
        }
        assert!((constant_limit(1.0, 4) - 2.0 / (PI * PI)).abs() < 1e-15);
        let a = limit_integral(ScalingLimitF::Constant(3.0), 5, 1.0).unwrap().value;
        let b = limit_integral(ScalingLimitF::Constant(1.0), 5, 1.0).unwrap().value;
        assert!((a - 3.0 * b).abs() < 1e-9);
    }

    #[test]
    fn exponential_f_closed_form_in_d3() {
        // ∫ s^{-1/2} e^{-s-b/s} ds = √π e^{-2√b}
        for xi in [0.2, 1.0, 3.0] {
            let b = 1.5 * xi * xi;
            let want = 1.5 * libm::pow(PI, -1.5) * libm::sqrt(PI) * libm::exp(-2.0 * libm::sqrt(b));
            let got = limit_integral(ScalingLimitF::ExponentialTail, 3, xi).unwrap().value;
            assert!((got - want).abs() < 1e-10, "xi={xi}: {got} vs {want}");
        }
    }

    #[test]
    fn unit_step_splits_cleanly() {
        // F = 1{t ≤ 1}: 2π^{-d/2}(d/2)∫_{√b}^∞ e^{-u²} du in d=3
        let xi = 0.8;
        let b: f64 = 1.5 * xi * xi;
        let want = 1.5 * libm::pow(PI, -1.5) * libm::sqrt(PI) * libm::erfc(libm::sqrt(b));
        let got = limit_integral(ScalingLimitF::UnitStep, 3, xi).unwrap().value;
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn torus_limit_curve() {
        let c0 = 0.1 / constant_limit(1.0, 5);
        for xi in [0.5, 1.0, 1.7] {
            let v = torus_limit_value(ScalingLimitF::Constant(c0), 5, xi, 2.0).unwrap();
            assert!((v - (0.1 + 2.0 * xi * xi * xi)).abs() < 1e-12);
        }
        let f = ScalingLimitF::ExponentialTail;
        assert_eq!(torus_limit_value(f, 4, 1.0, 0.0).unwrap(), limit_integral(f, 4, 1.0).unwrap().value);
        assert!(limit_integral(f, 2, 1.0).is_err());
    }

    #[test]
    fn scaling_predictions() {
        let p = predict_scaling(Regime::Pseudocritical { lambda: 3.0 }, 5).unwrap();
        assert_eq!(p.mean_len_exponent, 2.5);
        let p = predict_scaling(Regime::Pseudocritical { lambda: 2.0 }, 5).unwrap();
        assert_eq!((p.mean_len_exponent, p.plateau_exponent), (2.0, -3.0));
        let p = predict_scaling(Regime::Critical, 5).unwrap();
        assert!((p.collapse_exponent - 5.0 / 6.0).abs() < 1e-15);
        let a = PlateauAnsatz { dim: 5, c_head: 1.0, c_plateau: 2.0, plateau_exponent: -2.5 };
        assert!((a.eval(2.0, 4.0) - (0.125 + 2.0 / 32.0)).abs() < 1e-15);
    }

    #[test]
    fn theta_examples() {
        assert!((image_norm(&[1], &[1], 2) - 3.0).abs() < 1e-15);
        let s = theta_sum(1.0, 1).unwrap();
        assert!((s.value - 0.772637).abs() < 1e-6);
        let (lo, hi) = theta_sum_bracket(1.0, 1);
        assert!((lo - (libm::sqrt(PI) * libm::erfc(1.0) - 1.0)).abs() < 1e-15);
        assert!((hi - (libm::sqrt(PI) + 1.0)).abs() < 1e-14);
        assert!(lo < s.value && s.value < hi);
        // product structure against direct summation in d = 2
        let direct: f64 = lattice_box(2, 12)
            .iter()
            .filter(|z| z.iter().any(|&c| c != 0))
            .map(|z| libm::exp(-0.7 * (z[0] * z[0] + z[1] * z[1]) as f64))
            .sum();
        assert!((theta_sum(0.7, 2).unwrap().value - direct).abs() < 1e-14);
    }

    #[test]
    fn quick_bound_checks() {
        assert!(image_norm_bounds(&[1, 2], &[2, 3, 4], 2).unwrap().passed);
        assert!(theta_sum_bounds(&[1, 3], &[0.1, 1.0, 10.0]).unwrap().passed);
        assert!(increment_bound(&[2, 3], 50, 6).passed);
        let env = theta_envelope(2, &[0.01, 0.1, 1.0, 10.0]).unwrap();
        assert!(env.c > 0.0 && env.c_prime > 0.0 && env.c.is_finite());
        assert_eq!(representable_r2(1, 3), [0, 1, 4, 9]);
        // no cancellation at large a: leading term 2d e^{-a}
        let s = theta_sum(100.0, 3).unwrap().value;
        assert!((s / (6.0 * libm::exp(-100.0)) - 1.0).abs() < 1e-12);
    }
}
