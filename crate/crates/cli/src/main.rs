//! `fhm`: batch runner writing CSV/JSON data files and a manifest per experiment.

mod config;
mod error;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{
    parse_mode, parse_momentum, Experiment, Grid, GroundSource, Momentum, PropagatorChoice, RunConfig, Solver, SpinChoice,
    StateSource,
};
use error::CliError;
use fhm_core::qeom::PoolKind;

#[derive(Parser)]
#[command(name = "fhm", version, about = "Fermi-Hubbard ring experiments: VQE, exact diagonalization, qEOM, Trotter dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground energies over a (t', U) grid.
    GroundScan(ScanArgs),
    /// Charge and spin gaps over a (t', U) grid.
    Gaps(ScanArgs),
    /// Single-particle spectral function A(k, omega).
    Spectral(SpectralArgs),
    /// Spin-spin correlations and the dynamical structure factor.
    Dynamics(DynamicsArgs),
    /// Gate, CNOT and swap counts.
    Resources(ResourceArgs),
    /// Non-interacting band and Fermi sea.
    Band(ScanArgs),
    /// Runs the experiment named in the config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long = "t-prime", allow_negative_numbers = true)]
    t_prime: Option<f64>,
    #[arg(long = "U", allow_negative_numbers = true)]
    u: Option<f64>,
    /// Comma-separated t' scan values.
    #[arg(long = "t-primes", value_delimiter = ',', allow_negative_numbers = true)]
    t_primes: Option<Vec<f64>>,
    /// Comma-separated U scan values.
    #[arg(long = "U-values", value_delimiter = ',', allow_negative_numbers = true)]
    u_values: Option<Vec<f64>>,
    /// Particle sector as `n_up,n_down`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    sector: Option<Vec<usize>>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_enum)]
    solver: Option<Solver>,
    #[arg(long)]
    seed: Option<u64>,
    /// Iteration cap per VQE stage.
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SpectralArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    eta: Option<f64>,
    /// Comma-separated momenta, e.g. `0,pi/3,pi`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k: Option<Vec<String>>,
    /// Frequency grid `lo:hi:step`.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, value_enum)]
    spin: Option<SpinChoice>,
    #[arg(long, value_enum)]
    states: Option<StateSource>,
    #[arg(long, value_enum)]
    ground: Option<GroundSource>,
    /// qEOM operator pool: `paper` or `full`.
    #[arg(long)]
    pool: Option<String>,
}

#[derive(Args)]
struct DynamicsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "tau-max")]
    tau_max: Option<f64>,
    /// `growing` or `fixed:n`.
    #[arg(long)]
    mode: Option<String>,
    /// Fourier window of the structure factor.
    #[arg(long = "T")]
    window: Option<f64>,
    #[arg(long, value_enum)]
    propagator: Option<PropagatorChoice>,
    /// Reference site i of C_ij.
    #[arg(long)]
    site: Option<usize>,
    /// Comma-separated structure-factor momenta.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k: Option<Vec<String>>,
    /// Structure-factor frequency grid `lo:hi:step`.
    #[arg(long = "s-omega", allow_hyphen_values = true)]
    s_omega: Option<String>,
    #[arg(long, value_enum)]
    ground: Option<GroundSource>,
}

#[derive(Args)]
struct ResourceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Static ansatz counts for `L d`.
    #[arg(long = "static", num_args = 2, value_names = ["L", "D"])]
    static_counts: Option<Vec<usize>>,
    /// Per-step Trotter counts for `L`.
    #[arg(long)]
    trotter: Option<usize>,
    /// Heavy-hex route preset; repeatable.
    #[arg(long)]
    route: Vec<String>,
    /// Comma-separated lattice sizes for the all-to-all scaling fit.
    #[arg(long = "scaling-sizes", value_delimiter = ',')]
    scaling_sizes: Option<Vec<usize>>,
}

fn parse_grid(s: &str) -> Result<Grid, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Config(format!("grid must be lo:hi:step, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    Ok(Grid::new(v[0], v[1], v[2]))
}

fn parse_pool(s: &str) -> Result<PoolKind, CliError> {
    match s {
        "paper" => Ok(PoolKind::Paper),
        "full" => Ok(PoolKind::Full),
        other => Err(CliError::Config(format!("pool must be \"paper\" or \"full\", got {other:?}"))),
    }
}

fn momenta(ks: Vec<String>) -> Result<Vec<Momentum>, CliError> {
    ks.into_iter().map(|k| parse_momentum(&k).map(|_| Momentum::Expr(k))).collect()
}

impl CommonArgs {
    fn base(&self) -> Result<RunConfig, CliError> {
        match &self.config {
            Some(path) => RunConfig::load(path),
            None => Ok(RunConfig::default()),
        }
    }

    fn apply(self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(v) = self.l {
            cfg.l = v;
        }
        if let Some(v) = self.t {
            cfg.t = v;
        }
        if let Some(v) = self.t_prime {
            cfg.t_prime = v;
            cfg.t_primes = Some(vec![v]);
        }
        if let Some(v) = self.u {
            cfg.u = v;
            cfg.u_values = Some(vec![v]);
        }
        if let Some(v) = self.t_primes {
            cfg.t_primes = Some(v);
        }
        if let Some(v) = self.u_values {
            cfg.u_values = Some(v);
        }
        if let Some(s) = self.sector {
            match s.as_slice() {
                &[a, b] => cfg.sector = Some((a, b)),
                _ => return Err(CliError::Config("sector must be n_up,n_down".to_string())),
            }
        }
        if let Some(v) = self.depth {
            cfg.depth = Some(v);
        }
        if let Some(v) = self.solver {
            cfg.solver = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = Some(v);
        }
        if let Some(v) = self.max_iter {
            cfg.vqe.max_iter = v;
        }
        if let Some(v) = self.out {
            cfg.out = v;
        }
        Ok(())
    }
}

fn scan(e: Experiment, a: ScanArgs) -> Result<(Experiment, RunConfig), CliError> {
    let mut cfg = a.common.base()?;
    a.common.apply(&mut cfg)?;
    Ok((e, cfg))
}

fn build(command: Command) -> Result<(Experiment, RunConfig), CliError> {
    match command {
        Command::Run { config, out } => {
            let mut cfg = RunConfig::load(&config)?;
            let e = cfg.experiment.ok_or_else(|| CliError::Config("config has no \"experiment\" field".to_string()))?;
            if let Some(o) = out {
                cfg.out = o;
            }
            Ok((e, cfg))
        }
        Command::GroundScan(a) => scan(Experiment::GroundScan, a),
        Command::Gaps(a) => scan(Experiment::Gaps, a),
        Command::Band(a) => scan(Experiment::Band, a),
        Command::Spectral(a) => {
            let mut cfg = a.common.base()?;
            a.common.apply(&mut cfg)?;
            if let Some(v) = a.eta {
                cfg.eta = v;
            }
            if let Some(k) = a.k {
                cfg.k = Some(momenta(k)?);
            }
            if let Some(g) = a.omega {
                cfg.omega = parse_grid(&g)?;
            }
            if let Some(v) = a.spin {
                cfg.spin = v;
            }
            if let Some(v) = a.states {
                cfg.states = v;
            }
            if let Some(v) = a.ground {
                cfg.ground = v;
            }
            if let Some(v) = a.pool {
                cfg.pool = parse_pool(&v)?;
            }
            Ok((Experiment::Spectral, cfg))
        }
        Command::Dynamics(a) => {
            let mut cfg = a.common.base()?;
            a.common.apply(&mut cfg)?;
            if let Some(v) = a.dt {
                cfg.dt = v;
            }
            if let Some(v) = a.tau_max {
                cfg.tau_max = v;
            }
            if let Some(v) = a.mode {
                parse_mode(&v)?;
                cfg.mode = v;
            }
            if let Some(v) = a.window {
                cfg.window = Some(v);
            }
            if let Some(v) = a.propagator {
                cfg.propagator = v;
            }
            if let Some(v) = a.site {
                cfg.site = v;
            }
            if let Some(k) = a.k {
                cfg.k = Some(momenta(k)?);
            }
            if let Some(g) = a.s_omega {
                cfg.s_omega = parse_grid(&g)?;
            }
            if let Some(v) = a.ground {
                cfg.ground = v;
            }
            Ok((Experiment::Dynamics, cfg))
        }
        Command::Resources(a) => {
            let mut cfg = a.common.base()?;
            a.common.apply(&mut cfg)?;
            if let Some(v) = a.static_counts {
                cfg.resources.static_counts = Some((v[0], v[1]));
            }
            if let Some(v) = a.trotter {
                cfg.resources.trotter = Some(v);
            }
            if !a.route.is_empty() {
                cfg.resources.routes = a.route;
            }
            if let Some(v) = a.scaling_sizes {
                cfg.resources.scaling_sizes = v;
            }
            Ok((Experiment::Resources, cfg))
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    let start = Instant::now();
    let (experiment, cfg) = build(command)?;
    let cfg = cfg.resolve(experiment)?;
    let artifacts = run::run(&cfg)?;
    let wall = start.elapsed().as_secs_f64();
    output::write_run(&cfg.out, experiment.name(), &cfg, &artifacts, wall)?;
    for a in &artifacts {
        match a.rows {
            Some(n) => println!("{}  ({n} rows)", cfg.out.join(&a.name).display()),
            None => println!("{}", cfg.out.join(&a.name).display()),
        }
    }
    println!("{}", cfg.out.join("manifest.json").display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
