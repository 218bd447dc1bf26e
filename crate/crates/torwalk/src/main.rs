use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use torwalk::config::{self, RunConfig};
use torwalk::error::{Result, RunError};
use torwalk::manifest::{read_manifest, verify_manifest};

#[derive(Parser)]
#[command(name = "torwalk", version, about = "Random-length walks, SAW and Ising worm simulations on tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// TOML run description.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Reuse the configuration echoed in a manifest.
    #[arg(long, conflicts_with = "config")]
    from_manifest: Option<PathBuf>,
    /// `key=value` override, TOML-parsed; dotted keys reach into tables (e.g. `fugacity.a=0.2`).
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut overrides = Vec::new();
        if let Some(s) = self.seed {
            overrides.push(format!("seed={s}"));
        }
        if let Some(o) = &self.out {
            overrides.push(format!("output={}", toml::Value::String(o.display().to_string())));
        }
        overrides.extend(self.set.iter().cloned());
        match &self.from_manifest {
            Some(m) => {
                let text = read_manifest(m)?.config;
                let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| RunError::Parse {
                    path: m.clone(),
                    msg: e.to_string(),
                })?;
                for o in &overrides {
                    config::apply_override(&mut table, o)?;
                }
                RunConfig::from_table(table)
            }
            None => config::load(self.config.as_deref(), &overrides),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo run of rlrw, rllerw, saw or ising.
    Simulate(ConfigArgs),
    /// Exact dynamic-programming evaluation (model exact-rlrw).
    Exact(ConfigArgs),
    /// Check the analytic bounds and identities; exit 2 if any fails.
    Verify {
        #[arg(short, long, default_value = "verify-out")]
        out: PathBuf,
    },
    /// Fit `Y = a L^b + c` to scalar tables, grouped by lambda.
    Analyze {
        /// `scalars.csv` files or directories containing one.
        #[arg(short, long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        /// Lattice dimension, for the predicted exponents.
        #[arg(short, long)]
        dim: Option<usize>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Rescale radial profiles and score the collapse.
    Collapse {
        /// `radial_L<side>.csv` files, or `L=path`.
        #[arg(short, long, required = true, num_args = 1..)]
        input: Vec<String>,
        #[arg(short, long)]
        dim: usize,
        /// Walk-length exponent: E N ~ L^mu.
        #[arg(long)]
        mu: f64,
        /// Drop bins closer than this to the origin.
        #[arg(long, default_value_t = 1.0)]
        r_min: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Dispatch on the configured model.
    Run(ConfigArgs),
    /// Re-hash the outputs listed in a manifest.
    CheckManifest { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("torwalk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate(a) => {
            let m = torwalk::simulate(&a.load()?)?;
            println!("wrote {} files", m.outputs.len());
            Ok(())
        }
        Command::Exact(a) => {
            let m = torwalk::exact(&a.load()?)?;
            println!("wrote {} files", m.outputs.len());
            Ok(())
        }
        Command::Run(a) => torwalk::run(&a.load()?),
        Command::Verify { out } => {
            let report = torwalk::verify(&out, String::new())?;
            print!("{}", report.text());
            torwalk::check_report(&report)
        }
        Command::Analyze { input, dim, out } => {
            torwalk::analyze(&input, dim, &out)?;
            print!("{}", std::fs::read_to_string(out.join("exponents.json")).map_err(|e| RunError::io(&out, e))?);
            Ok(())
        }
        Command::Collapse { input, dim, mu, r_min, out } => {
            let (report, _) = torwalk::collapse(&input, dim, mu, r_min, &out)?;
            println!("collapse metric {} over {} points ({} pairs)", report.metric, report.points, report.pairs);
            Ok(())
        }
        Command::CheckManifest { dir } => {
            let bad = verify_manifest(&dir)?;
            if bad.is_empty() {
                println!("all outputs match");
                Ok(())
            } else {
                Err(RunError::Verification(format!("hash mismatch: {}", bad.join(", "))))
            }
        }
    }
}
