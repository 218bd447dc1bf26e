//! Simulation and exact-evaluation drivers behind `simulate` and `exact`.
//!
//! Replica `r` at side `L` draws from `stream_rng(seed, L, r)`; replicas run
//! on a worker pool and are merged in replica order, so outputs depend only
//! on the configuration.

use rayon::prelude::*;
use torwalk_core::fss::{blocked_errors, radial_bin, RadialClasses};
use torwalk_core::ising::{run_worm, worm_estimates, TotalOrder, WormRunParams};
use torwalk_core::lattice::Torus;
use torwalk_core::rllerw::{sample_rllerw, ErasedPath};
use torwalk_core::rlrw::{
    default_box_radius, exact_two_point, exact_two_point_infinite, exact_two_point_symmetric, plateau_discrepancy,
    DpOptions, Domain, McAccumulator, OccupationField,
};
use torwalk_core::rng::{stream_id, stream_rng};
use torwalk_core::saw::{run_saw, saw_estimates, SawRunParams};
use torwalk_core::WalkLengthLaw;

use crate::config::{Model, RunConfig};
use crate::error::{Result, RunError};
use crate::format::fmt_g;
use crate::manifest::OutputDir;
use crate::tables::{field_csv, length_csv, radial_csv, scalars_csv, ScalarRow};

pub const WORKERS_ENV: &str = "TORWALK_WORKERS";

/// Target length of the stored `|ω|` series per chain.
const SERIES_POINTS: u64 = 100_000;

pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let n = match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| RunError::config(format!("{WORKERS_ENV}: expected a positive integer, got `{v}`")))?,
        Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| RunError::config(format!("{WORKERS_ENV}: {e}")))
}

fn replicas<T: Send>(
    pool: &rayon::ThreadPool,
    cfg: &RunConfig,
    l: usize,
    out: &mut OutputDir,
    job: impl Fn(&mut torwalk_core::rng::ChaCha8Rng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    if cfg.replicas == 0 {
        return Err(RunError::config("replicas: must be positive"));
    }
    let point = u32::try_from(l).map_err(|_| RunError::config("L: too large"))?;
    for r in 0..cfg.replicas {
        out.add_stream(l, r, cfg.seed, stream_id(point, r));
    }
    pool.install(|| {
        (0..cfg.replicas)
            .into_par_iter()
            .map(|r| job(&mut stream_rng(cfg.seed, point, r)))
            .collect::<Vec<Result<T>>>()
    })
    .into_iter()
    .collect()
}

/// Per-walk length moments of an iid sampler.
#[derive(Clone, Copy, Debug, Default)]
struct LengthMoments {
    n: u64,
    sum: f64,
    sumsq: f64,
}

impl LengthMoments {
    fn push(&mut self, len: u64) {
        let x = len as f64;
        self.n += 1;
        self.sum += x;
        self.sumsq += x * x;
    }

    fn merge(&mut self, o: &LengthMoments) {
        self.n += o.n;
        self.sum += o.sum;
        self.sumsq += o.sumsq;
    }

    fn mean_err(&self) -> (f64, f64) {
        let n = self.n as f64;
        let mean = self.sum / n;
        if self.n < 2 {
            return (mean, f64::NAN);
        }
        let var = ((self.sumsq / n) - mean * mean).max(0.0) * n / (n - 1.0);
        (mean, (var / n).sqrt())
    }
}

fn walk_replica(
    model: Model,
    torus: &Torus,
    law: &WalkLengthLaw,
    walks: u64,
    rng: &mut torwalk_core::rng::ChaCha8Rng,
) -> Result<(McAccumulator, LengthMoments)> {
    let mut acc = McAccumulator::new(torus);
    let mut moments = LengthMoments::default();
    match model {
        Model::Rlrw => {
            for _ in 0..walks {
                let before = acc.steps();
                acc.walk(law, rng);
                moments.push(acc.steps() - before);
            }
        }
        Model::Rllerw => {
            let mut path = ErasedPath::new(torus);
            for _ in 0..walks {
                sample_rllerw(&mut path, law, rng)?;
                acc.record_path(path.sites());
                moments.push(path.len() as u64);
            }
        }
        _ => unreachable!("walk models only"),
    }
    Ok((acc, moments))
}

/// Run the Monte Carlo models over every side in `cfg.L`.
pub fn simulate(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<ScalarRow>> {
    let pool = worker_pool()?;
    let d = cfg.dim()?;
    let steps = cfg.require_steps()?;
    let mut rows = Vec::new();
    for l in cfg.sides()? {
        let torus = Torus::new(d, l)?;
        let row = match cfg.model {
            Model::Rlrw | Model::Rllerw => {
                let law = cfg.law()?.build(l)?;
                let parts = replicas(&pool, cfg, l, out, |rng| walk_replica(cfg.model, &torus, &law, steps, rng))?;
                let mut acc = McAccumulator::new(&torus);
                let mut moments = LengthMoments::default();
                for (a, m) in &parts {
                    acc.merge(a);
                    moments.merge(m);
                }
                let field = acc.finish()?;
                out.write(&format!("field_L{l}.csv"), &field_csv(&field))?;
                out.write(&format!("radial_L{l}.csv"), &radial_csv(&radial_bin(&field)))?;
                let (mean_n, mean_n_err) = moments.mean_err();
                // every walk contributes exactly N + 1 visits
                ScalarRow {
                    l,
                    z: f64::NAN,
                    lambda: f64::NAN,
                    chi: field.total(),
                    chi_err: mean_n_err,
                    mean_n,
                    mean_n_err,
                    tau_int: 0.5,
                    mean_n_ising_conditional: None,
                }
            }
            Model::Saw => {
                let fug = cfg.fugacity()?;
                let z = fug.at(l)?;
                let classes = RadialClasses::new(&Domain::Torus(torus));
                let params = SawRunParams {
                    burn_in: cfg.burn_in,
                    steps,
                    batches: cfg.batches,
                    series_stride: cfg.series_stride.unwrap_or((steps / SERIES_POINTS).max(1)),
                    sampler: cfg.sampler.into(),
                };
                let tallies = replicas(&pool, cfg, l, out, |rng| Ok(run_saw(&torus, z, &params, &classes, rng)?))?;
                let est = saw_estimates(&tallies, &classes)?;
                out.write(&format!("radial_L{l}.csv"), &radial_csv(&est.g))?;
                out.write(&format!("length_L{l}.csv"), &length_csv(&est.length_distribution))?;
                ScalarRow {
                    l,
                    z,
                    lambda: fug.lambda_column(),
                    chi: est.chi,
                    chi_err: est.chi_err,
                    mean_n: est.mean_len,
                    mean_n_err: est.mean_len_err,
                    tau_int: est.tau_int * params.series_stride as f64,
                    mean_n_ising_conditional: None,
                }
            }
            Model::Ising => {
                let fug = cfg.fugacity()?;
                let z = fug.at(l)?;
                let classes = RadialClasses::new(&Domain::Torus(torus));
                let params = WormRunParams {
                    burn_in: cfg.burn_in,
                    steps,
                    batches: cfg.batches,
                    measure_every: cfg.measure_every,
                };
                let order = TotalOrder::lexicographic();
                let tallies =
                    replicas(&pool, cfg, l, out, |rng| Ok(run_worm(&torus, z, &params, &classes, &order, rng)?))?;
                let est = worm_estimates(&tallies, &classes)?;
                let (tau, thin) = trail_tau(&tallies);
                out.write(&format!("radial_L{l}.csv"), &radial_csv(&est.g))?;
                ScalarRow {
                    l,
                    z,
                    lambda: fug.lambda_column(),
                    chi: est.chi,
                    chi_err: est.chi_err,
                    mean_n: est.mean_len,
                    mean_n_err: est.mean_len_err,
                    tau_int: tau * (thin * params.cadence(&torus)) as f64,
                    mean_n_ising_conditional: Some(est.mean_len_conditional),
                }
            }
            other => return Err(RunError::config(format!("model: `{}` is not a simulation model", other.name()))),
        };
        rows.push(row);
        out.write("scalars.csv", &scalars_csv(&rows))?;
    }
    Ok(rows)
}

/// Mean `τ_int` of the trail series over chains, after thinning each series
/// to at most `SERIES_POINTS`; returns `(τ, thinning factor)`.
fn trail_tau(tallies: &[torwalk_core::ising::WormTally]) -> (f64, u64) {
    let longest = tallies.iter().map(|t| t.trail_series.len() as u64).max().unwrap_or(0);
    let thin = longest.div_ceil(SERIES_POINTS).max(1);
    let taus: Vec<f64> = tallies
        .iter()
        .filter_map(|t| {
            let s: Vec<f64> = t.trail_series.iter().step_by(thin as usize).copied().collect();
            blocked_errors(&s).ok()
        })
        .map(|b| b.tau_int)
        .collect();
    let tau = if taus.is_empty() { f64::NAN } else { taus.iter().sum::<f64>() / taus.len() as f64 };
    (tau, thin)
}

/// Summary of one exact evaluation.
#[derive(Clone, Debug)]
pub struct ExactSummary {
    pub l: usize,
    pub mean_n: f64,
    pub sum_g: f64,
    pub truncation_bound: f64,
    pub steps: u64,
    /// Plateau window `(min, max)` of `(g_T - g_Z) L^d / E N` over `‖x‖ ≤ L/4`.
    pub plateau_range: Option<(f64, f64)>,
}

impl ExactSummary {
    /// `Σ_x g(x) = E N + 1` up to the truncation bound (plus roundoff).
    pub fn identity_holds(&self) -> bool {
        (self.sum_g - (self.mean_n + 1.0)).abs() <= self.truncation_bound + 1e-9 * self.sum_g
    }
}

pub fn exact_field(cfg: &RunConfig, torus: &Torus, law: &WalkLengthLaw) -> Result<OccupationField> {
    let opts = DpOptions { tail_cut: cfg.exact.tail_cut, max_states: cfg.exact.max_states };
    Ok(if cfg.exact.symmetric {
        exact_two_point_symmetric(torus, law, opts)?
    } else {
        exact_two_point(torus, law, opts)?
    })
}

pub fn exact(cfg: &RunConfig, out: &mut OutputDir) -> Result<Vec<ExactSummary>> {
    if cfg.model != Model::ExactRlrw {
        return Err(RunError::config(format!("model: `exact` needs exact-rlrw, got `{}`", cfg.model.name())));
    }
    let d = cfg.dim()?;
    let mut summaries = Vec::new();
    for l in cfg.sides()? {
        let torus = Torus::new(d, l)?;
        let law = cfg.law()?.build(l)?;
        let field = exact_field(cfg, &torus, &law)?;
        out.write(&format!("field_L{l}.csv"), &field_csv(&field))?;
        out.write(&format!("radial_L{l}.csv"), &radial_csv(&radial_bin(&field)))?;
        let mut plateau_range = None;
        if cfg.exact.infinite {
            let output_radius = torus.max_coord() as usize;
            let radius = cfg.exact.box_radius.unwrap_or_else(|| default_box_radius(&law).max(2 * l));
            let opts = DpOptions { tail_cut: cfg.exact.tail_cut, max_states: cfg.exact.max_states };
            let inf = exact_two_point_infinite(d, &law, radius, output_radius, opts)?;
            let disc = plateau_discrepancy(&field, &inf, &law)?;
            let mut text = String::new();
            let mut header: Vec<String> = (0..d).map(|k| format!("coord_{k}")).collect();
            header.extend(["g_torus", "g_infinite", "ratio"].map(String::from));
            text.push_str(&header.join(","));
            text.push('\n');
            for (i, s) in torus.iter_sites().enumerate() {
                let mut row: Vec<String> = s.iter().map(|c| c.to_string()).collect();
                row.push(fmt_g(field.values[i]));
                row.push(fmt_g(field.values[i] - disc.delta[i]));
                row.push(fmt_g(disc.ratio[i]));
                text.push_str(&row.join(","));
                text.push('\n');
            }
            out.write(&format!("plateau_L{l}.csv"), &text)?;
            plateau_range = Some(disc.ratio_range_within(l as f64 / 4.0));
        }
        summaries.push(ExactSummary {
            l,
            mean_n: law.mean(),
            sum_g: field.total(),
            truncation_bound: field.truncation_bound,
            steps: field.steps,
            plateau_range,
        });
        out.write("exact.csv", &exact_csv(&summaries))?;
    }
    Ok(summaries)
}

fn exact_csv(rows: &[ExactSummary]) -> String {
    let mut text = String::from("L,meanN,sum_g,identity_residual,truncation_bound,steps,plateau_min,plateau_max\n");
    for s in rows {
        let (lo, hi) = s.plateau_range.unwrap_or((f64::NAN, f64::NAN));
        let cells = [
            s.l.to_string(),
            fmt_g(s.mean_n),
            fmt_g(s.sum_g),
            fmt_g(s.sum_g - s.mean_n - 1.0),
            fmt_g(s.truncation_bound),
            s.steps.to_string(),
            fmt_g(lo),
            fmt_g(hi),
        ];
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    text
}
