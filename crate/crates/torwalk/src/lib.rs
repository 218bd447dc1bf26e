//! Runner for `torwalk-core`: TOML configuration, replica scheduling, CSV and
//! JSON outputs, and a hashed manifest per output directory.

pub mod analysis;
pub mod config;
pub mod error;
pub mod format;
pub mod manifest;
pub mod runner;
pub mod tables;
pub mod verify;

use std::path::PathBuf;

use config::{Model, RunConfig};
use error::{Result, RunError};
use manifest::{OutputDir, RunManifest};

pub use error::RunError as Error;

/// Run `body` against a fresh output directory; on failure a partial manifest is left behind.
pub fn with_output<T>(
    dir: &std::path::Path,
    command: &str,
    config_toml: String,
    body: impl FnOnce(&mut OutputDir) -> Result<T>,
) -> Result<(T, RunManifest)> {
    let mut out = OutputDir::create(dir, command, config_toml)?;
    match body(&mut out) {
        Ok(v) => Ok((v, out.finish()?)),
        Err(e) => Err(out.abort(e)),
    }
}

pub fn simulate(cfg: &RunConfig) -> Result<RunManifest> {
    match cfg.model {
        Model::Rlrw | Model::Rllerw | Model::Saw | Model::Ising => {}
        other => return Err(RunError::config(format!("model: `{}` cannot be simulated", other.name()))),
    }
    with_output(&cfg.output, "simulate", cfg.to_toml(), |out| runner::simulate(cfg, out)).map(|(_, m)| m)
}

pub fn exact(cfg: &RunConfig) -> Result<RunManifest> {
    if cfg.model != Model::ExactRlrw {
        return Err(RunError::config(format!("model: `exact` needs exact-rlrw, got `{}`", cfg.model.name())));
    }
    with_output(&cfg.output, "exact", cfg.to_toml(), |out| runner::exact(cfg, out)).map(|(_, m)| m)
}

/// Writes `verify.txt` and `verify.json`; a failing check is a [`RunError::Verification`].
pub fn verify(dir: &std::path::Path, config_toml: String) -> Result<verify::VerifyReport> {
    let (report, _) = with_output(dir, "verify", config_toml, |out| {
        let report = verify::run_verify()?;
        out.write("verify.txt", &report.text())?;
        out.write("verify.json", &report.json())?;
        Ok(report)
    })?;
    Ok(report)
}

pub fn analyze(inputs: &[PathBuf], dim: Option<usize>, dir: &std::path::Path) -> Result<RunManifest> {
    let echo = format!("inputs = {:?}\nd = {:?}\n", inputs, dim);
    with_output(dir, "analyze", echo, |out| {
        let (fits, exps) = analysis::analyze_files(inputs, dim)?;
        out.write("fit.json", &(serde_json::to_string_pretty(&fits).expect("fits serialize") + "\n"))?;
        out.write("exponents.json", &(serde_json::to_string_pretty(&exps).expect("exponents serialize") + "\n"))?;
        Ok(())
    })
    .map(|(_, m)| m)
}

pub fn collapse(
    inputs: &[String],
    d: usize,
    mu: f64,
    r_min: f64,
    dir: &std::path::Path,
) -> Result<(analysis::CollapseReport, RunManifest)> {
    let echo = format!("inputs = {inputs:?}\nd = {d}\nmu = {mu}\nr_min = {r_min}\n");
    with_output(dir, "collapse", echo, |out| {
        let profiles = analysis::read_profiles(inputs)?;
        let (series, report) = analysis::collapse_profiles(&profiles, d, mu, r_min)?;
        out.write("collapse.csv", &tables::collapse_csv(&series))?;
        out.write("collapse.json", &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
        Ok(report)
    })
}

/// Dispatch on `cfg.model`. `analyze` fits the `scalars.csv` already in the output directory.
pub fn run(cfg: &RunConfig) -> Result<()> {
    match cfg.model {
        Model::Rlrw | Model::Rllerw | Model::Saw | Model::Ising => simulate(cfg).map(drop),
        Model::ExactRlrw => exact(cfg).map(drop),
        Model::Verify => {
            let report = verify(&cfg.output, cfg.to_toml())?;
            print!("{}", report.text());
            check_report(&report)
        }
        Model::Analyze => analyze(&[cfg.output.join("scalars.csv")], cfg.d, &cfg.output).map(drop),
    }
}

pub fn check_report(report: &verify::VerifyReport) -> Result<()> {
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(RunError::Verification(failed.join(", ")))
    }
}
