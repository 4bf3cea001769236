use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qrc_experiments::config::{parse_range, ExperimentConfig, HamiltonianSource, ObservableSelection, Overrides, Task};
use qrc_experiments::experiment::run_experiment;
use qrc_experiments::report::{render_csv, spectral_rows, spectral_table, write_csv, Metadata, OpsReport};
use qrc_experiments::CliError;
use qrc_core::hamiltonian::{build_ising, Preset};

#[derive(Parser)]
#[command(name = "qrc", version, about = "Quantum reservoir experiments and Krylov measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distinct eigenvalues, transition frequencies and operator grades.
    Spectral(SpectralArgs),
    /// Fidelity, spread complexity, expressivity and observability curves.
    Measures(ExperimentArgs),
    /// Lorenz x→x and x→z tasks.
    Lorenz(ExperimentArgs),
    /// Information processing capacity.
    Ipc(ExperimentArgs),
    /// Every task of the config over the (T, V) grid.
    Sweep(ExperimentArgs),
    /// Random-coupling ensemble, mean and spread per grid point.
    RandomEnsemble(ExperimentArgs),
    /// Operation counts of state-matrix and observability evaluation.
    OpsCount(OpsArgs),
    /// Prints the effective config after overrides.
    ShowConfig(ExperimentArgs),
}

#[derive(Args, Clone, Default)]
struct ExperimentArgs {
    /// TOML experiment file. Flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    /// Comma-separated subset of lxx, lxz, ipc, measures (sweep only).
    #[arg(long, value_delimiter = ',')]
    tasks: Option<Vec<String>>,
    #[arg(long)]
    preset: Option<String>,
    /// Random-coupling ensemble with this many sites.
    #[arg(long)]
    random_sites: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Explicit clock cycles, comma separated.
    #[arg(long = "t", value_delimiter = ',')]
    clock_cycles: Option<Vec<f64>>,
    /// Clock-cycle range start:stop:step.
    #[arg(long = "t-range")]
    clock_range: Option<String>,
    #[arg(long = "v", value_delimiter = ',')]
    virtual_nodes: Option<Vec<usize>>,
    /// first-site, all-sites or a comma-separated site list.
    #[arg(long)]
    observables: Option<String>,
    #[arg(long)]
    n_init: Option<usize>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    buffer: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    seed_states: Option<usize>,
    #[arg(long)]
    lookahead: Option<usize>,
    #[arg(long)]
    max_order: Option<usize>,
    #[arg(long)]
    ipc_threshold: Option<f64>,
    /// Also write per-target IPC capacities.
    #[arg(long)]
    ipc_targets: bool,
    #[arg(long)]
    smoothing_window: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SpectralArgs {
    /// Presets to tabulate. Defaults to all four.
    #[arg(long, value_delimiter = ',')]
    preset: Vec<String>,
    /// Random-coupling Hamiltonians with this many sites instead of presets.
    #[arg(long)]
    random_sites: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// Sites whose Z observable is analysed. Defaults to all.
    #[arg(long, value_delimiter = ',')]
    sites: Vec<usize>,
    /// Cross-check each grade against the Krylov rank oracle.
    #[arg(long)]
    oracle: bool,
    /// Output CSV. Standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OpsArgs {
    #[arg(long, default_value_t = 4)]
    k: u64,
    #[arg(long, default_value_t = 30_000)]
    n_u: u64,
    #[arg(long, default_value_t = 30)]
    v: u64,
}

impl ExperimentArgs {
    fn overrides(&self) -> Result<Overrides, CliError> {
        let tasks = self
            .tasks
            .as_ref()
            .map(|ts| {
                ts.iter()
                    .map(|t| Task::parse(t).ok_or_else(|| CliError::config("tasks", format!("unknown task {t:?}"))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        Ok(Overrides {
            name: self.name.clone(),
            tasks,
            preset: self.preset.clone(),
            random_sites: self.random_sites,
            seeds: self.seeds.clone(),
            clock_cycles: self.clock_cycles.clone(),
            clock_range: self.clock_range.as_deref().map(parse_range).transpose()?,
            virtual_nodes: self.virtual_nodes.clone(),
            observables: self.observables.as_deref().map(ObservableSelection::parse).transpose()?,
            n_init: self.n_init,
            n_train: self.n_train,
            n_test: self.n_test,
            buffer: self.buffer,
            noise: self.noise,
            seed: self.seed,
            seed_states: self.seed_states,
            lookahead: self.lookahead,
            max_order: self.max_order,
            ipc_threshold: self.ipc_threshold,
            write_ipc_targets: self.ipc_targets,
            smoothing_window: self.smoothing_window,
            output_dir: self.out.clone(),
            threads: self.threads,
        })
    }

    fn resolve(&self, forced: Option<Vec<Task>>) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(tasks) = forced {
            cfg.tasks = tasks;
        }
        self.overrides()?.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn experiment(args: &ExperimentArgs, command: &str, forced: Option<Vec<Task>>) -> Result<(), CliError> {
    let cfg = args.resolve(forced)?;
    let (result, paths) = run_experiment(&cfg, command)?;
    eprintln!(
        "{} grid points x {} hamiltonian(s), config hash {}",
        result.records.len(),
        result.member_labels.len(),
        &result.config_hash[..12]
    );
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

fn random_ensemble(args: &ExperimentArgs) -> Result<(), CliError> {
    let mut a = args.clone();
    let from_file = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if !from_file.hamiltonian.is_ensemble() && a.random_sites.is_none() && a.seeds.is_none() {
        a.random_sites = Some(6);
        a.seeds = Some((0..10).collect());
    }
    if a.config.is_none() {
        a.observables.get_or_insert_with(|| "all-sites".into());
        a.virtual_nodes.get_or_insert_with(|| vec![10, 30, 50]);
    }
    let cfg = a.resolve(None)?;
    if !matches!(cfg.hamiltonian, HamiltonianSource::Random { .. }) {
        return Err(CliError::config("hamiltonian.kind", "random-ensemble needs kind = \"random\""));
    }
    experiment(&a, "random-ensemble", None)
}

fn spectral(args: &SpectralArgs) -> Result<(), CliError> {
    let mut hams = Vec::new();
    if let Some(n) = args.random_sites {
        let src = HamiltonianSource::Random {
            n_sites: n,
            seeds: args.seeds.clone(),
        };
        for m in src.members()? {
            hams.push((m.label.clone(), build_ising(&m.spec)?, n));
        }
    } else {
        let names: Vec<String> = if args.preset.is_empty() {
            Preset::ALL.iter().map(|p| p.name().to_string()).collect()
        } else {
            args.preset.clone()
        };
        for name in names {
            let p: Preset = name.parse().map_err(|e: qrc_core::Error| CliError::config("preset", e.to_string()))?;
            hams.push((p.name().to_string(), build_ising(&p.spec())?, 4));
        }
    }
    let mut rows = Vec::new();
    for (label, h, n) in &hams {
        let sites: Vec<usize> = if args.sites.is_empty() {
            (1..=*n).collect()
        } else {
            args.sites.clone()
        };
        if let Some(s) = sites.iter().find(|&&s| s == 0 || s > *n) {
            return Err(CliError::config("sites", format!("site {s} outside 1..={n}")));
        }
        rows.extend(spectral_rows(label, h, *n, &sites, args.oracle)?);
    }
    let (header, body) = spectral_table(&rows);
    let meta = Metadata::new("spectral");
    match &args.out {
        Some(p) => {
            write_csv(p, &meta, &header, &body)?;
            println!("{}", p.display());
        }
        None => io::stdout().write_all(&render_csv(&meta, &header, &body)?)?,
    }
    Ok(())
}

fn ops_count(args: &OpsArgs) -> Result<(), CliError> {
    if args.k == 0 || args.v == 0 || args.n_u == 0 {
        return Err(CliError::config("ops-count", "k, n_u and v must be positive"));
    }
    let r = OpsReport::new(args.k, args.n_u, args.v);
    let (header, body) = r.table();
    io::stdout().write_all(&render_csv(&Metadata::new("ops-count"), &header, &body)?)?;
    eprintln!("ratio N_obs/N_state = {:.2}%", 100.0 * r.ratio);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectral(a) => spectral(&a),
        Command::Measures(a) => experiment(&a, "measures", Some(vec![Task::Measures])),
        Command::Lorenz(a) => experiment(&a, "lorenz", Some(vec![Task::Lxx, Task::Lxz])),
        Command::Ipc(a) => experiment(&a, "ipc", Some(vec![Task::Ipc])),
        Command::Sweep(a) => experiment(&a, "sweep", None),
        Command::RandomEnsemble(a) => random_ensemble(&a),
        Command::OpsCount(a) => ops_count(&a),
        Command::ShowConfig(a) => {
            let cfg = a.resolve(None)?;
            print!("{}", cfg.to_toml()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
