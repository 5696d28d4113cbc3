//! Command-line front end.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{load_config, SimulationConfig};
use crate::driver::run_simulation;
use crate::mesh::MacroField;
use crate::oracles::{
    multigroup_homogeneous_solve, rosseland_diffusion_solve, DiffusionBoundary, DiffusionProblem,
    MultigroupProblem,
};
use crate::output::{
    snapshot_name, snapshot_rows, spectrum_name, spectrum_rows, write_snapshot, write_spectrum,
    write_timeseries, TimeseriesRow,
};
use crate::presets::preset;

#[derive(Debug, Parser)]
#[command(
    name = "ugkp",
    version,
    about = "Frequency-dependent thermal radiative transfer solver"
)]
pub struct Cli {
    /// Log every step.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Overrides {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for transport and assembly.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Multiplies the cell count along every refined axis.
    #[arg(long)]
    pub scale_mesh: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print or run a benchmark preset.
    Preset {
        #[arg(long)]
        name: String,
        #[arg(long, conflicts_with = "out")]
        print: bool,
        #[arg(long, required_unless_present = "print")]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Reference solutions written in the driver's formats.
    Oracle {
        kind: OracleKind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Frequency groups of the homogeneous oracle.
        #[arg(long, default_value_t = 10_000)]
        groups: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OracleKind {
    Homogeneous,
    Diffusion,
}

fn apply(mut cfg: SimulationConfig, o: &Overrides) -> anyhow::Result<SimulationConfig> {
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(f) = o.scale_mesh {
        cfg = cfg.with_mesh_scale(f)?;
    }
    if let Some(t) = o.t_end {
        cfg = cfg.with_t_end(t);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn set_workers(n: Option<usize>) -> anyhow::Result<()> {
    #[cfg(feature = "parallel")]
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker pool")?;
    }
    #[cfg(not(feature = "parallel"))]
    if n.is_some_and(|n| n > 1) {
        bail!("--workers needs the `parallel` feature");
    }
    Ok(())
}

fn run(cfg: SimulationConfig, out: &Path) -> anyhow::Result<()> {
    let s = run_simulation(cfg, out)?;
    println!(
        "{} steps to t = {} ns, energy {:.9e} -> {:.9e}, max |balance residual| {:.3e}, {} particles, {:.0} ms",
        s.steps, s.final_time_ns, s.initial_energy, s.final_energy, s.max_abs_balance_residual, s.final_particles, s.wall_ms
    );
    println!("outputs in {}", out.display());
    Ok(())
}

fn oracle_homogeneous(cfg: &SimulationConfig, out: &Path, groups: usize) -> anyhow::Result<()> {
    let built = cfg.build()?;
    if built.regions.regions.len() != 1 {
        bail!("homogeneous oracle needs a single material region");
    }
    let region = &built.regions.regions[0];
    let p = MultigroupProblem {
        consts: built.consts,
        model: region.opacity,
        cv: region.cv,
        t0: cfg.initial.t,
        radiation_t: cfg.initial.radiation_temperature(),
        spectrum_t: cfg.initial.spectrum_temperature(),
        groups,
        dt: cfg.time.dt,
        t_end: cfg.time.t_end,
    };
    let r = multigroup_homogeneous_solve(&p)?;
    let n = built.mesh.n_cells();
    let rho = r.final_state.rho_g.iter().sum::<f64>();
    let mut field = MacroField::equilibrium(&built.consts, &vec![r.final_state.t; n]);
    field.rho = vec![rho; n];
    let last = (r.times.len() - 1) as u64;
    let t_final = *r.times.last().unwrap_or(&0.0);
    let rows = snapshot_rows(
        &built.mesh,
        &field,
        &built.consts,
        &vec![0; n],
        last,
        t_final,
    );
    write_snapshot(&rows, &out.join(snapshot_name(last)))?;
    if let Some(bins) = &cfg.particles.spectrum {
        let edges = bins.edges();
        let values = r.final_state.binned_intensity(&edges);
        write_spectrum(
            &spectrum_rows(&edges, &values),
            &out.join(spectrum_name(last)),
        )?;
    }
    let area = built.mesh.area();
    let ts: Vec<TimeseriesRow> = (0..r.times.len())
        .map(|k| TimeseriesRow {
            step: k as u64,
            time_ns: r.times[k],
            total_energy: r.energies[k] * area,
            balance_residual: if k == 0 {
                0.0
            } else {
                (r.energies[k] - r.energies[k - 1]) * area
            },
            n_particles: 0,
            picard_iters: 0,
            wall_ms: 0.0,
        })
        .collect();
    write_timeseries(&ts, &out.join("timeseries.csv"))?;
    println!(
        "final T = {} keV after {} steps; outputs in {}",
        r.final_state.t,
        last,
        out.display()
    );
    Ok(())
}

fn oracle_diffusion(cfg: &SimulationConfig, out: &Path) -> anyhow::Result<()> {
    let built = cfg.build()?;
    let p = DiffusionProblem::new(
        &built.mesh,
        &built.regions,
        built.consts,
        DiffusionBoundary::from_spec(&cfg.boundary),
        cfg.time.dt,
    );
    let n = built.mesh.n_cells();
    let stride = cfg.output.snapshot_stride;
    let run = rosseland_diffusion_solve(&p, &vec![cfg.initial.t; n], cfg.time.t_end, stride)?;
    let steps: Vec<u64> = run
        .times
        .iter()
        .map(|t| (t / cfg.time.dt).round() as u64)
        .collect();
    for (k, t) in run.fields.iter().enumerate() {
        let field = MacroField::equilibrium(&built.consts, t);
        let rows = snapshot_rows(
            &built.mesh,
            &field,
            &built.consts,
            &vec![0; n],
            steps[k],
            run.times[k],
        );
        write_snapshot(&rows, &out.join(snapshot_name(steps[k])))?;
    }
    println!("{} snapshots in {}", run.fields.len(), out.display());
    Ok(())
}

pub fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            overrides,
        } => {
            let cfg =
                load_config(&config).with_context(|| format!("loading {}", config.display()))?;
            let cfg = apply(cfg, &overrides)?;
            set_workers(overrides.workers)?;
            let out = out
                .or_else(|| cfg.output.dir.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            run(cfg, &out)
        }
        Command::Preset {
            name,
            print,
            out,
            overrides,
        } => {
            let cfg = apply(preset(&name)?, &overrides)?;
            if print {
                print!("{}", cfg.to_toml_string());
                return Ok(());
            }
            set_workers(overrides.workers)?;
            let out = out.expect("clap requires --out without --print");
            run(cfg, &out)
        }
        Command::Oracle {
            kind,
            config,
            out,
            groups,
        } => {
            let cfg =
                load_config(&config).with_context(|| format!("loading {}", config.display()))?;
            match kind {
                OracleKind::Homogeneous => oracle_homogeneous(&cfg, &out, groups),
                OracleKind::Diffusion => oracle_diffusion(&cfg, &out),
            }
        }
    }
}

pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
