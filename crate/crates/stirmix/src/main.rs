use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use stirmix::commands;
use stirmix::config::ExperimentConfig;
use stirmix::error::{CliError, Result};

#[derive(Parser)]
#[command(name = "stirmix", version, about = "Optimal stirring of a passive scalar on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Overrides applied on top of the config file (or the defaults).
#[derive(Args, Default)]
struct Overrides {
    /// JSON configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long = "a-list", value_delimiter = ',')]
    a_list: Option<Vec<f64>>,
    #[arg(long = "t-final")]
    t_final: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long = "dt-max")]
    dt_max: Option<f64>,
    #[arg(long = "snapshot-times", value_delimiter = ',')]
    snapshot_times: Option<Vec<f64>>,
    #[arg(long = "p-list", value_delimiter = ',')]
    p_list: Option<Vec<f64>>,
    #[arg(long = "no-dealias")]
    no_dealias: bool,
    /// Keep integrating after the spectrum fills up.
    #[arg(long = "no-stop-on-fill")]
    no_stop_on_fill: bool,
    #[arg(long = "fill-threshold")]
    fill_threshold: Option<f64>,
    #[arg(long = "degeneracy-floor")]
    degeneracy_floor: Option<f64>,
    #[arg(long)]
    enstrophy: Option<f64>,
    /// Decay fit window as `t0,t1`.
    #[arg(long = "fit-window", value_delimiter = ',', num_args = 2)]
    fit_window: Option<Vec<f64>>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long = "log-grad-slack")]
    log_grad_slack: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    serial: bool,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long = "no-images")]
    no_images: bool,
    #[arg(long = "no-fields")]
    no_fields: bool,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(n, a, a_list, t_final, cfl, dt_max, snapshot_times, p_list, fill_threshold, degeneracy_floor, enstrophy, lambda, kappa, log_grad_slack, seed);
        if let Some(w) = self.workers {
            c.workers = Some(w);
        }
        if let Some(w) = &self.fit_window {
            c.fit_window = Some([w[0], w[1]]);
        }
        if let Some(o) = &self.out {
            c.output = o.clone();
        }
        c.dealias &= !self.no_dealias;
        c.stop_on_spectral_fill &= !self.no_stop_on_fill;
        c.serial |= self.serial;
        c.write_snapshot_images &= !self.no_images;
        c.write_snapshot_fields &= !self.no_fields;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one run and write its time series, snapshots and summary.
    Simulate(Overrides),
    /// Run every entry of `a_list` and compare decay rates.
    Sweep(Overrides),
    /// Recompute fits and checks from an existing run or sweep directory.
    Analyze {
        dir: PathBuf,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Mixedness verdicts and mix-norm certificates for a field file.
    Certify {
        field: PathBuf,
        /// Scales to test; defaults to a geometric ladder.
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Check the rescaling identities at three resolutions.
    Scalecheck {
        /// Sub-cube side length.
        #[arg(long = "scale", default_value_t = 0.5)]
        scale: f64,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Write a reference field file.
    Fixture {
        /// checkerboard, stripe, constant, disks or initial
        kind: String,
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, default_value_t = 11.0 / 12.0)]
        a: f64,
        #[arg(long, short)]
        out: PathBuf,
    },
}

fn print_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("serialisable"));
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(o) => {
            let cfg = o.resolve()?;
            let res = commands::cmd_simulate(&cfg)?;
            let s = &res.summary;
            println!(
                "{} steps, stopped by {} at t = {:.4}; h(0) = {:.6e}, h(T) = {:.6e}; output in {}",
                s.steps,
                s.stop_reason,
                s.final_time,
                s.h_neg1_initial,
                s.h_neg1_final,
                res.dir.display()
            );
        }
        Command::Sweep(o) => {
            let cfg = o.resolve()?;
            let s = commands::cmd_sweep(&cfg)?;
            print_json(&s.rates);
            if let Some(m) = s.members.iter().find(|m| !m.ok) {
                return Err(CliError::PartialFailure(format!(
                    "sweep member a = {} failed: {}",
                    m.a,
                    m.error.as_deref().unwrap_or("unknown error")
                )));
            }
        }
        Command::Analyze { dir, opts } => {
            let cfg = opts.resolve()?;
            print_json(&commands::cmd_analyze(&dir, &cfg)?);
        }
        Command::Certify { field, deltas, opts } => {
            let cfg = opts.resolve()?;
            let report = commands::cmd_certify(&field, &cfg, deltas.as_deref(), opts.out.as_deref())?;
            print_json(&report);
        }
        Command::Scalecheck { scale, opts } => {
            let cfg = opts.resolve()?;
            let report = commands::cmd_scalecheck(&cfg, scale, opts.out.as_deref())?;
            print_json(&report);
        }
        Command::Fixture { kind, n, a, out } => {
            let f = commands::fixture(&kind, n, a)?;
            stirmix::formats::write_field(&out, &f, Some(0.0))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
