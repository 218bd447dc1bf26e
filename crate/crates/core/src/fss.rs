//! Finite-size-scaling post-processing: radial profiles, Monte Carlo error
//! analysis, fits of `Y = a L^b + c` and data collapse.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::rlrw::{Domain, OccupationField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialBin {
    pub r2: i64,
    pub r: f64,
    pub g: f64,
    pub stderr: f64,
    pub multiplicity: usize,
}

/// Two-point function averaged over exact `‖x‖²` classes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RadialProfile {
    pub bins: Vec<RadialBin>,
}

impl RadialProfile {
    /// `Σ g·multiplicity`.
    pub fn total(&self) -> f64 {
        self.bins.iter().map(|b| b.g * b.multiplicity as f64).sum()
    }

    pub fn bin(&self, r2: i64) -> Option<&RadialBin> {
        self.bins.binary_search_by_key(&r2, |b| b.r2).ok().map(|i| &self.bins[i])
    }
}

/// Partition of a domain into `‖x‖²` classes.
#[derive(Clone, Debug)]
pub struct RadialClasses {
    /// Sorted distinct `‖x‖²`.
    pub r2: Vec<i64>,
    pub multiplicity: Vec<usize>,
    /// Class of each site index.
    pub class_of: Vec<u32>,
}

impl RadialClasses {
    pub fn new(domain: &Domain) -> Self {
        let n2: Vec<i64> = (0..domain.len()).map(|i| domain.site(i).norm2()).collect();
        let mut r2 = n2.clone();
        r2.sort_unstable();
        r2.dedup();
        let mut multiplicity = alloc::vec![0; r2.len()];
        let class_of = n2
            .iter()
            .map(|v| {
                let c = r2.binary_search(v).expect("present");
                multiplicity[c] += 1;
                c as u32
            })
            .collect();
        RadialClasses { r2, multiplicity, class_of }
    }

    pub fn len(&self) -> usize {
        self.r2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r2.is_empty()
    }

    /// Per-class sums of a per-site vector.
    pub fn sum_by_class(&self, per_site: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.len()];
        for (&c, &v) in self.class_of.iter().zip(per_site) {
            out[c as usize] += v;
        }
        out
    }
}

/// Average a field over `‖x‖²` classes; errors are the standard error of the
/// class mean assuming independent site errors.
pub fn radial_bin(field: &OccupationField) -> RadialProfile {
    let classes = RadialClasses::new(&field.domain);
    let sums = classes.sum_by_class(&field.values);
    let sq: Vec<f64> = field.stderr.iter().map(|e| e * e).collect();
    let var = classes.sum_by_class(&sq);
    let bins = (0..classes.len())
        .map(|c| {
            let m = classes.multiplicity[c] as f64;
            RadialBin {
                r2: classes.r2[c],
                r: libm::sqrt(classes.r2[c] as f64),
                g: sums[c] / m,
                stderr: libm::sqrt(var[c]) / m,
                multiplicity: classes.multiplicity[c],
            }
        })
        .collect();
    RadialProfile { bins }
}

/// Profile of `g(class) = (H[class]/multiplicity) / H[norm_class]` from
/// per-batch class histograms, with jackknife errors over batches.
pub fn ratio_profile(classes: &RadialClasses, batches: &[Vec<f64>], norm_class: usize) -> Result<RadialProfile> {
    if batches.is_empty() {
        return Err(Error::input("no batches"));
    }
    let total = sum_batches(batches);
    if total[norm_class] <= 0.0 {
        return Err(Error::Normalization("normalizing class was never visited"));
    }
    let bins = (0..classes.len())
        .map(|c| {
            let m = classes.multiplicity[c] as f64;
            let (g, err) = jackknife(batches, |h| h[c] / m / h[norm_class]);
            RadialBin {
                r2: classes.r2[c],
                r: libm::sqrt(classes.r2[c] as f64),
                g,
                stderr: if err.is_finite() { err } else { 0.0 },
                multiplicity: classes.multiplicity[c],
            }
        })
        .collect();
    Ok(RadialProfile { bins })
}

fn sum_batches(batches: &[Vec<f64>]) -> Vec<f64> {
    let mut total = alloc::vec![0.0; batches[0].len()];
    for b in batches {
        for (t, v) in total.iter_mut().zip(b) {
            *t += v;
        }
    }
    total
}

/// Delete-one jackknife of `f` applied to summed batch vectors.
/// Returns `(f(total), error)`; the error is zero with fewer than two batches.
pub fn jackknife<F: Fn(&[f64]) -> f64>(batches: &[Vec<f64>], f: F) -> (f64, f64) {
    let total = sum_batches(batches);
    let full = f(&total);
    let k = batches.len();
    if k < 2 {
        return (full, 0.0);
    }
    let mut loo = alloc::vec![0.0; total.len()];
    let mut vals = Vec::with_capacity(k);
    for b in batches {
        for ((l, t), v) in loo.iter_mut().zip(&total).zip(b) {
            *l = t - v;
        }
        vals.push(f(&loo));
    }
    let mean = vals.iter().sum::<f64>() / k as f64;
    let ss: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum();
    (full, libm::sqrt(ss * (k as f64 - 1.0) / k as f64))
}

/// Mean and standard error of independent batch means.
pub fn batch_mean_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, libm::sqrt(var / n))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockingLevel {
    pub block: usize,
    pub stderr: f64,
    pub stderr_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockingEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Integrated autocorrelation time in units of the series spacing.
    pub tau_int: f64,
    /// Window at which the self-consistent `τ_int` estimate stopped.
    pub window: usize,
    /// `false` when no blocking plateau or no consistent window was found.
    pub converged: bool,
    pub levels: Vec<BlockingLevel>,
}

/// Window constant of the self-consistent `τ_int` estimator.
pub const TAU_WINDOW_C: f64 = 6.0;

/// Logarithmic blocking for the error of the mean, plus the windowed
/// integrated autocorrelation time.
pub fn blocked_errors(series: &[f64]) -> Result<BlockingEstimate> {
    if series.len() < 1000 {
        return Err(Error::input(alloc::format!("series has {} points, at least 1000 needed", series.len())));
    }
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut levels = Vec::new();
    let mut cur: Vec<f64> = series.to_vec();
    let mut block = 1;
    while cur.len() >= 16 {
        let m = cur.len() as f64;
        let mu = cur.iter().sum::<f64>() / m;
        let var = cur.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (m - 1.0);
        let se = libm::sqrt(var / m);
        levels.push(BlockingLevel { block, stderr: se, stderr_err: se / libm::sqrt(2.0 * (m - 1.0)) });
        cur = cur.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        block *= 2;
    }
    let usable = |k: usize| n / levels[k].block >= 64;
    let mut plateau = None;
    for k in 0..levels.len() {
        if !usable(k) {
            break;
        }
        let rest = &levels[k + 1..levels.len().min(k + 3)];
        if rest.len() == 2 && rest.iter().all(|l| l.stderr <= levels[k].stderr + l.stderr_err) {
            plateau = Some(k);
            break;
        }
    }
    let (stderr, blocked_ok) = match plateau {
        Some(k) => (levels[k].stderr, true),
        None => {
            let k = (0..levels.len()).rev().find(|&k| usable(k)).unwrap_or(0);
            (levels[k].stderr, false)
        }
    };
    let (tau_int, window, window_ok) = integrated_autocorrelation(series, TAU_WINDOW_C);
    Ok(BlockingEstimate { mean, stderr, tau_int, window, converged: blocked_ok && window_ok, levels })
}

/// Self-consistent windowing: `τ(M) = 1/2 + Σ_{t=1}^{M} ρ(t)` at the smallest
/// `M ≥ c·τ(M)`. Returns `(τ, M, found)`.
pub fn integrated_autocorrelation(series: &[f64], c: f64) -> (f64, usize, bool) {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let c0 = dev.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return (0.5, 0, true);
    }
    let mut tau = 0.5;
    let max_window = n / 4;
    for t in 1..=max_window {
        let ct = dev[..n - t].iter().zip(&dev[t..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        tau += ct / c0;
        if t as f64 >= c * tau {
            return (tau, t, true);
        }
    }
    (tau, max_window, false)
}

/// One `(L, Y, σ_Y)` observation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitPoint {
    pub l: f64,
    pub y: f64,
    pub err: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FitOptions {
    /// Discard points with `L` below this.
    pub l_min: f64,
    /// Hold `c` at this value instead of fitting it.
    pub fix_c: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub err_a: f64,
    pub err_b: f64,
    pub err_c: f64,
    pub chi2: f64,
    pub dof: usize,
    pub chi2_per_dof: f64,
    pub l_min: f64,
    pub iterations: usize,
}

pub const MAX_FIT_ITERATIONS: usize = 500;

fn solve(mut m: [[f64; 3]; 3], mut v: [f64; 3], n: usize) -> Option<[f64; 3]> {
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| libm::fabs(m[i][col]).total_cmp(&libm::fabs(m[j][col])))?;
        if m[piv][col] == 0.0 || !m[piv][col].is_finite() {
            return None;
        }
        m.swap(col, piv);
        v.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for k in col..n {
                m[r][k] -= f * m[col][k];
            }
            v[r] -= f * v[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (v[r] - s) / m[r][r];
    }
    Some(x)
}

fn invert(m: [[f64; 3]; 3], n: usize) -> Option<[[f64; 3]; 3]> {
    let mut inv = [[0.0; 3]; 3];
    for col in 0..n {
        let mut e = [0.0; 3];
        e[col] = 1.0;
        let x = solve(m, e, n)?;
        for r in 0..n {
            inv[r][col] = x[r];
        }
    }
    Some(inv)
}

struct Model<'a> {
    pts: &'a [FitPoint],
    fix_c: Option<f64>,
}

impl Model<'_> {
    fn chi2(&self, a: f64, b: f64, c: f64) -> f64 {
        self.pts
            .iter()
            .map(|p| {
                let r = (p.y - a * libm::pow(p.l, b) - c) / p.err;
                r * r
            })
            .sum()
    }

    /// Best `(a, c)` at fixed `b`.
    fn profile(&self, b: f64) -> Option<(f64, f64, f64)> {
        let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for p in self.pts {
            let w = 1.0 / (p.err * p.err);
            let phi = libm::pow(p.l, b);
            let y = p.y - self.fix_c.unwrap_or(0.0);
            s11 += w * phi * phi;
            s12 += w * phi;
            s22 += w;
            t1 += w * phi * y;
            t2 += w * y;
        }
        let (a, c) = match self.fix_c {
            Some(c) => (t1 / s11, c),
            None => {
                let x = solve([[s11, s12, 0.0], [s12, s22, 0.0], [0.0; 3]], [t1, t2, 0.0], 2)?;
                (x[0], x[1])
            }
        };
        (a.is_finite() && c.is_finite()).then(|| (a, c, self.chi2(a, b, c)))
    }

    fn npar(&self) -> usize {
        if self.fix_c.is_some() {
            2
        } else {
            3
        }
    }

    /// `JᵀWJ` and `JᵀW r` for parameters `(a, b[, c])`.
    fn normal(&self, a: f64, b: f64, c: f64) -> ([[f64; 3]; 3], [f64; 3]) {
        let n = self.npar();
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for p in self.pts {
            let w = 1.0 / (p.err * p.err);
            let phi = libm::pow(p.l, b);
            let j = [phi, a * phi * libm::log(p.l), 1.0];
            let r = p.y - a * phi - c;
            for i in 0..n {
                jtr[i] += w * j[i] * r;
                for k in 0..n {
                    jtj[i][k] += w * j[i] * j[k];
                }
            }
        }
        (jtj, jtr)
    }
}

/// Weighted least squares for `Y = a L^b + c` over the points with `L ≥ l_min`.
pub fn power_law_fit(points: &[FitPoint], opts: FitOptions) -> Result<FitResult> {
    let pts: Vec<FitPoint> = points.iter().copied().filter(|p| p.l >= opts.l_min).collect();
    let model = Model { pts: &pts, fix_c: opts.fix_c };
    let npar = model.npar();
    if pts.len() < npar + 1 {
        return Err(Error::input(alloc::format!("{} points with L ≥ {}, need at least {}", pts.len(), opts.l_min, npar + 1)));
    }
    if pts.iter().any(|p| !(p.err > 0.0) || !(p.l > 0.0) || !p.y.is_finite()) {
        return Err(Error::input("points need positive L, finite Y and positive errors"));
    }

    // log-log slope of Y - min Y (or Y - c) as a first guess, then a profile grid in b
    let shift = opts.fix_c.unwrap_or_else(|| pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min));
    let ll: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.y - shift > 0.0)
        .map(|p| (libm::log(p.l), libm::log(p.y - shift)))
        .collect();
    let mut candidates: Vec<f64> = (0..=600).map(|k| -1.0 + 0.01 * k as f64).collect();
    if ll.len() >= 2 {
        let n = ll.len() as f64;
        let mx = ll.iter().map(|p| p.0).sum::<f64>() / n;
        let my = ll.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = ll.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = ll.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        if sxx > 0.0 {
            candidates.push(sxy / sxx);
        }
    }
    let (mut b, (mut a, mut c, mut chi2)) = candidates
        .iter()
        .filter_map(|&b| model.profile(b).map(|r| (b, r)))
        .min_by(|x, y| x.1 .2.total_cmp(&y.1 .2))
        .ok_or_else(|| Error::Numerical("no finite starting point for the fit".into()))?;

    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_FIT_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = model.normal(a, b, c);
        let mut m = jtj;
        for i in 0..npar {
            m[i][i] += lambda * jtj[i][i];
        }
        let Some(step) = solve(m, jtr, npar) else {
            lambda *= 10.0;
            continue;
        };
        let (na, nb) = (a + step[0], b + step[1]);
        let nc = if npar == 3 { c + step[2] } else { c };
        let nchi2 = model.chi2(na, nb, nc);
        if nchi2.is_finite() && nchi2 <= chi2 {
            let small = libm::fabs(step[1]) <= 1e-13 * (1.0 + libm::fabs(b))
                && libm::fabs(step[0]) <= 1e-13 * (1.0 + libm::fabs(a));
            let flat = chi2 - nchi2 <= 1e-14 * chi2.max(1e-300);
            a = na;
            b = nb;
            c = nc;
            chi2 = nchi2;
            lambda = (lambda * 0.1).max(1e-15);
            if small || flat {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e16 {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Numerical(alloc::format!(
            "fit did not converge in {MAX_FIT_ITERATIONS} iterations (chi2 = {chi2}, a = {a}, b = {b}, c = {c})"
        )));
    }
    let (jtj, _) = model.normal(a, b, c);
    let cov = invert(jtj, npar).ok_or_else(|| Error::Numerical("singular fit covariance".into()))?;
    let dof = pts.len() - npar;
    Ok(FitResult {
        a,
        b,
        c,
        err_a: libm::sqrt(cov[0][0].max(0.0)),
        err_b: libm::sqrt(cov[1][1].max(0.0)),
        err_c: if npar == 3 { libm::sqrt(cov[2][2].max(0.0)) } else { 0.0 },
        chi2,
        dof,
        chi2_per_dof: chi2 / dof as f64,
        l_min: opts.l_min,
        iterations,
    })
}

/// Fit again for each admissible `L_min`, smallest first.
pub fn scan_l_min(points: &[FitPoint], fix_c: Option<f64>) -> Vec<(f64, Result<FitResult>)> {
    let mut ls: Vec<f64> = points.iter().map(|p| p.l).collect();
    ls.sort_by(f64::total_cmp);
    ls.dedup();
    let need = if fix_c.is_some() { 3 } else { 4 };
    ls.iter()
        .filter(|&&l| points.iter().filter(|p| p.l >= l).count() >= need)
        .map(|&l| (l, power_law_fit(points, FitOptions { l_min: l, fix_c })))
        .collect()
}

/// Default `χ²/dof` acceptance threshold of [`select_l_min`].
pub const CHI2_THRESHOLD: f64 = 1.5;

/// First fit of a scan whose `χ²/dof` does not exceed `threshold`.
pub fn select_l_min(scan: &[(f64, Result<FitResult>)], threshold: f64) -> Option<FitResult> {
    scan.iter()
        .filter_map(|(_, r)| r.as_ref().ok())
        .find(|f| f.chi2_per_dof <= threshold)
        .copied()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollapsePoint {
    /// `‖x‖ / L^κ`.
    pub y: f64,
    /// `‖x‖^{d-2} g(x)`.
    pub big_y: f64,
    pub err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseSeries {
    pub l: usize,
    pub kappa: f64,
    pub points: Vec<CollapsePoint>,
}

/// `κ = (d - μ)/(d - 2)`.
pub fn collapse_exponent(d: usize, mu: f64) -> f64 {
    (d as f64 - mu) / (d as f64 - 2.0)
}

/// Rescale radial profiles; bins with `r < r_min` (and `r = 0`) are dropped.
pub fn collapse(profiles: &[(usize, RadialProfile)], d: usize, mu: f64, r_min: f64) -> Result<Vec<CollapseSeries>> {
    if d < 3 {
        return Err(Error::param("d", "collapse needs d ≥ 3"));
    }
    if !(mu > 0.0 && mu < d as f64) {
        return Err(Error::param("mu", "must lie in (0, d)"));
    }
    let kappa = collapse_exponent(d, mu);
    Ok(profiles
        .iter()
        .map(|(l, prof)| {
            let scale = libm::pow(*l as f64, kappa);
            let points = prof
                .bins
                .iter()
                .filter(|b| b.r2 > 0 && b.r >= r_min)
                .map(|b| {
                    let w = libm::pow(b.r, d as f64 - 2.0);
                    CollapsePoint { y: b.r / scale, big_y: w * b.g, err: w * b.stderr }
                })
                .collect();
            CollapseSeries { l: *l, kappa, points }
        })
        .collect())
}

/// Inverse of the collapse transform: `(‖x‖, g)`.
pub fn uncollapse(p: &CollapsePoint, d: usize, mu: f64, l: usize) -> (f64, f64) {
    let r = p.y * libm::pow(l as f64, collapse_exponent(d, mu));
    (r, p.big_y / libm::pow(r, d as f64 - 2.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollapseMetric {
    /// Root-mean-square error-normalized difference.
    pub value: f64,
    pub pairs: usize,
    pub points: usize,
}

fn interpolate(s: &CollapseSeries, y: f64) -> Option<(f64, f64)> {
    let pts = &s.points;
    let hi = pts.partition_point(|p| p.y < y);
    if hi == pts.len() || (hi == 0 && pts[0].y > y) {
        return None;
    }
    if pts[hi].y == y || hi == 0 {
        return Some((pts[hi].big_y, pts[hi].err));
    }
    let (p, q) = (&pts[hi - 1], &pts[hi]);
    let t = (y - p.y) / (q.y - p.y);
    Some((p.big_y + t * (q.big_y - p.big_y), p.err + t * (q.err - p.err)))
}

/// Pairwise collapse quality: each point of one series is compared with the
/// linear interpolant of every other series over their overlap. Differences
/// are divided by the combined error, or left raw where both errors vanish.
pub fn collapse_metric(series: &[CollapseSeries]) -> Result<CollapseMetric> {
    let mut sorted: Vec<CollapseSeries> = series.to_vec();
    for s in &mut sorted {
        s.points.sort_by(|a, b| a.y.total_cmp(&b.y));
    }
    let (mut sum, mut count, mut pairs) = (0.0, 0usize, 0usize);
    for (i, si) in sorted.iter().enumerate() {
        for (j, sj) in sorted.iter().enumerate() {
            if i == j || sj.points.is_empty() {
                continue;
            }
            let before = count;
            for p in &si.points {
                if let Some((yj, ej)) = interpolate(sj, p.y) {
                    let den = p.err * p.err + ej * ej;
                    let diff = p.big_y - yj;
                    sum += if den > 0.0 { diff * diff / den } else { diff * diff };
                    count += 1;
                }
            }
            if count > before {
                pairs += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::Numerical("collapse series do not overlap".into()));
    }
    Ok(CollapseMetric { value: libm::sqrt(sum / count as f64), pairs, points: count })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub a: f64,
    pub b: f64,
    pub err_a: f64,
    pub err_b: f64,
    pub chi2_per_dof: f64,
}

/// Weighted fit of `Y = a + b y³` to collapsed points.
pub fn fit_cubic_shape(points: &[CollapsePoint]) -> Result<LinearFit> {
    if points.len() < 3 {
        return Err(Error::input("need at least three points"));
    }
    let (mut s, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let w = if p.err > 0.0 { 1.0 / (p.err * p.err) } else { 1.0 };
        let x = p.y * p.y * p.y;
        s += w;
        sx += w * x;
        sxx += w * x * x;
        sy += w * p.big_y;
        sxy += w * x * p.big_y;
    }
    let det = s * sxx - sx * sx;
    if det <= 0.0 {
        return Err(Error::Numerical("degenerate abscissae".into()));
    }
    let a = (sxx * sy - sx * sxy) / det;
    let b = (s * sxy - sx * sy) / det;
    let chi2: f64 = points
        .iter()
        .map(|p| {
            let w = if p.err > 0.0 { 1.0 / (p.err * p.err) } else { 1.0 };
            let r = p.big_y - a - b * p.y * p.y * p.y;
            w * r * r
        })
        .sum();
    Ok(LinearFit {
        a,
        b,
        err_a: libm::sqrt(sxx / det),
        err_b: libm::sqrt(s / det),
        chi2_per_dof: chi2 / (points.len() - 2) as f64,
    })
}

/// Profile of a site function on a domain, without errors.
pub fn radial_of(domain: &Domain, f: impl Fn(&Site) -> f64) -> RadialProfile {
    let values: Vec<f64> = (0..domain.len()).map(|i| f(&domain.site(i))).collect();
    let n = values.len();
    radial_bin(&OccupationField {
        domain: domain.clone(),
        values,
        stderr: alloc::vec![0.0; n],
        samples: None,
        truncation_bound: 0.0,
        leaked: 0.0,
        steps: 0,
    })
}
