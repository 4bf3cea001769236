use std::path::PathBuf;

use nalgebra::DMatrix;
use qrc_core::ipc::{compute_ipc, IpcResult};
use qrc_core::krylov::{
    autocorrelation_fidelity, haar_seed_states, krylov_expressivity, lanczos_state_basis, spread_complexity,
    ExpressivityParams, KrylovObservability, KrylovStateBasis, TimeSpacing, LANCZOS_TOL,
};
use qrc_core::quantum::{pauli_embed, Axis, CMatrix, HermitianOperator, PureState};
use qrc_core::reservoir::{nrmse, run, train_readout, ReservoirConfig, StateMatrix};
use qrc_core::tasks::{
    integrate_lorenz, make_task, uniform_series, LorenzParams, TaskSpec, DEFAULT_DISCARD, DEFAULT_INIT,
};
use rayon::prelude::*;

use crate::analysis::{saturation_detect, SATURATION_REL_TOL};
use crate::config::{ExperimentConfig, Member, Task};
use crate::report::{fmt_num, write_csv, Metadata};
use crate::CliError;

/// Sample mean, standard deviation and standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
}

impl Stat {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            stderr: std / (n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpcSummary {
    pub per_order: Vec<f64>,
    pub total: f64,
    pub within_bound: bool,
    /// Per-target capacities, kept only when they are written out.
    pub detail: Option<IpcResult>,
}

/// Everything measured for one Hamiltonian at one `(T, V)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointValues {
    pub nrmse_lxx: Option<f64>,
    pub nrmse_lxz: Option<f64>,
    pub ipc: Option<IpcSummary>,
    /// Averages over the seed states.
    pub e_k: Option<Stat>,
    pub k_s: Option<Stat>,
    pub fidelity: Option<Stat>,
    pub o_k: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    NrmseLxx,
    NrmseLxz,
    Ipc(usize),
    IpcTotal,
    Ek,
    Ok,
    Ks,
    Fidelity,
}

impl Field {
    pub fn name(self) -> String {
        match self {
            Field::NrmseLxx => "nrmse_lxx".into(),
            Field::NrmseLxz => "nrmse_lxz".into(),
            Field::Ipc(k) => format!("ipc_{k}"),
            Field::IpcTotal => "ipc_total".into(),
            Field::Ek => "e_k".into(),
            Field::Ok => "o_k".into(),
            Field::Ks => "k_s".into(),
            Field::Fidelity => "fidelity".into(),
        }
    }

    pub fn get(self, p: &PointValues) -> Option<f64> {
        match self {
            Field::NrmseLxx => p.nrmse_lxx,
            Field::NrmseLxz => p.nrmse_lxz,
            Field::Ipc(k) => p.ipc.as_ref().and_then(|i| i.per_order.get(k - 1).copied()),
            Field::IpcTotal => p.ipc.as_ref().map(|i| i.total),
            Field::Ek => p.e_k.map(|s| s.mean),
            Field::Ok => p.o_k,
            Field::Ks => p.k_s.map(|s| s.mean),
            Field::Fidelity => p.fidelity.map(|s| s.mean),
        }
    }

    /// Spread over seed states, used for single-Hamiltonian error bars.
    fn seed_stderr(self, p: &PointValues) -> Option<f64> {
        match self {
            Field::Ek => p.e_k.map(|s| s.stderr),
            Field::Ks => p.k_s.map(|s| s.stderr),
            Field::Fidelity => p.fidelity.map(|s| s.stderr),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRecord {
    pub clock_cycle: f64,
    pub virtual_nodes: usize,
    /// One entry per Hamiltonian, in ensemble order.
    pub members: Vec<PointValues>,
}

impl GridRecord {
    pub fn stat(&self, field: Field) -> Stat {
        let xs: Vec<f64> = self.members.iter().filter_map(|p| field.get(p)).collect();
        Stat::from_samples(&xs)
    }

    /// Ensemble standard error, or the seed-state standard error for a
    /// single Hamiltonian.
    pub fn stderr(&self, field: Field) -> f64 {
        if self.members.len() == 1 {
            field.seed_stderr(&self.members[0]).unwrap_or(0.0)
        } else {
            self.stat(field).stderr
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config_hash: String,
    pub member_labels: Vec<String>,
    pub ensemble: bool,
    pub fields: Vec<Field>,
    pub clock_cycles: Vec<f64>,
    pub virtual_nodes: Vec<usize>,
    /// `V` outer, `T` inner.
    pub records: Vec<GridRecord>,
}

impl SweepResult {
    pub fn record(&self, t: f64, v: usize) -> Option<&GridRecord> {
        let ti = self.clock_cycles.iter().position(|&x| x == t)?;
        let vi = self.virtual_nodes.iter().position(|&x| x == v)?;
        self.records.get(vi * self.clock_cycles.len() + ti)
    }

    /// Ensemble-mean curve of `field` against `T` at fixed `V`.
    pub fn curve(&self, field: Field, v: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        let vi = self.virtual_nodes.iter().position(|&x| x == v)?;
        let n = self.clock_cycles.len();
        let ys = self.records[vi * n..(vi + 1) * n]
            .iter()
            .map(|r| r.stat(field).mean)
            .collect();
        Some((self.clock_cycles.clone(), ys))
    }

    /// Ensemble means over the whole grid, in record order.
    pub fn flat(&self, field: Field) -> Vec<f64> {
        self.records.iter().map(|r| r.stat(field).mean).collect()
    }
}

struct SeedState {
    psi: PureState,
    basis: KrylovStateBasis,
}

struct MemberContext {
    h: HermitianOperator,
    observables: Vec<HermitianOperator>,
    observability: Option<KrylovObservability>,
    seeds: Vec<SeedState>,
    noise_seed: u64,
}

struct SharedInputs {
    lorenz: Option<(Vec<f64>, Vec<f64>, Vec<f64>)>,
    uniform: Option<Vec<f64>>,
}

fn shared_inputs(cfg: &ExperimentConfig) -> Result<SharedInputs, CliError> {
    let total = cfg.splits.total();
    let lorenz = if cfg.has(Task::Lxx) || cfg.has(Task::Lxz) {
        let p = cfg.lorenz.lookahead;
        let series = integrate_lorenz(&LorenzParams::default(), DEFAULT_INIT, total + p, DEFAULT_DISCARD)?;
        let train = cfg.splits.train_range();
        let lxx = make_task(&series, &TaskSpec::lxx(p)?, total, train.clone())?;
        let lxz = make_task(&series, &TaskSpec::lxz(), total, train)?;
        Some((lxx.inputs, lxx.targets, lxz.targets))
    } else {
        None
    };
    let uniform = cfg.has(Task::Ipc).then(|| uniform_series(total, cfg.seed));
    Ok(SharedInputs { lorenz, uniform })
}

fn member_context(
    cfg: &ExperimentConfig,
    index: usize,
    member: &Member,
    h: HermitianOperator,
) -> Result<MemberContext, CliError> {
    let n = member.spec.n_sites;
    let mats: Vec<CMatrix> = cfg
        .observables
        .sites(n)
        .iter()
        .map(|&s| pauli_embed(s, Axis::Z, n))
        .collect::<Result<_, _>>()?;
    let observables = mats
        .iter()
        .map(|m| HermitianOperator::new(m.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let (observability, seeds) = if cfg.has(Task::Measures) {
        let eig = h.eigensystem()?;
        let v_max = cfg.grid.virtual_nodes.iter().copied().max().unwrap_or(1);
        let ko = KrylovObservability::from_observability_spaces(eig, &mats, TimeSpacing::default(), v_max, cfg.seed)?;
        let seeds = haar_seed_states(h.dim(), cfg.seed_states, cfg.seed)
            .into_iter()
            .map(|psi| {
                let basis = lanczos_state_basis(&h, &psi, LANCZOS_TOL)?;
                Ok(SeedState { psi, basis })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        (Some(ko), seeds)
    } else {
        (None, Vec::new())
    };
    Ok(MemberContext {
        h,
        observables,
        observability,
        seeds,
        noise_seed: cfg.seed.wrapping_add(index as u64),
    })
}

fn test_nrmse(s: &StateMatrix, targets: &[f64]) -> Result<f64, CliError> {
    let tr: Vec<f64> = s.train_indices().iter().map(|&i| targets[i]).collect();
    let te: Vec<f64> = s.test_indices().iter().map(|&i| targets[i]).collect();
    let w = train_readout(&s.train(), &DMatrix::from_column_slice(tr.len(), 1, &tr))?;
    let pred = w.predict(&s.test());
    Ok(nrmse(pred.as_slice(), &te)?)
}

fn evaluate_point(
    cfg: &ExperimentConfig,
    ctx: &MemberContext,
    shared: &SharedInputs,
    t: f64,
    v: usize,
) -> Result<PointValues, CliError> {
    let mut out = PointValues::default();
    let n_sites = ctx.h.dim().trailing_zeros() as usize;
    let rc = ReservoirConfig::new(t, v, ctx.observables.clone(), cfg.noise, n_sites)?;
    if let Some((inputs, lxx, lxz)) = &shared.lorenz {
        let s = run(&ctx.h, inputs, &rc, &cfg.splits, ctx.noise_seed)?;
        if cfg.has(Task::Lxx) {
            out.nrmse_lxx = Some(test_nrmse(&s, lxx)?);
        }
        if cfg.has(Task::Lxz) {
            out.nrmse_lxz = Some(test_nrmse(&s, lxz)?);
        }
    }
    if let Some(u) = &shared.uniform {
        let s = run(&ctx.h, u, &rc, &cfg.splits, ctx.noise_seed)?;
        let r = compute_ipc(&s, u, &cfg.ipc)?;
        out.ipc = Some(IpcSummary {
            per_order: r.per_order[..r.max_order].to_vec(),
            total: r.total,
            within_bound: r.within_readout_bound(),
            detail: cfg.write_ipc_targets.then_some(r),
        });
    }
    if let Some(ko) = &ctx.observability {
        let eig = ctx.h.eigensystem()?;
        out.o_k = Some(ko.evaluate(t, v)?.total);
        let mut ek = Vec::with_capacity(ctx.seeds.len());
        let mut ks = Vec::with_capacity(ctx.seeds.len());
        let mut fid = Vec::with_capacity(ctx.seeds.len());
        for s in &ctx.seeds {
            let params = ExpressivityParams::new(s.basis.grade());
            ek.push(krylov_expressivity(eig, &s.psi, t, &params)?);
            ks.push(spread_complexity(&s.basis, eig, &s.psi, t));
            fid.push(autocorrelation_fidelity(eig, &s.psi, t));
        }
        out.e_k = Some(Stat::from_samples(&ek));
        out.k_s = Some(Stat::from_samples(&ks));
        out.fidelity = Some(Stat::from_samples(&fid));
    }
    Ok(out)
}

fn requested_fields(cfg: &ExperimentConfig) -> Vec<Field> {
    let mut f = Vec::new();
    if cfg.has(Task::Lxx) {
        f.push(Field::NrmseLxx);
    }
    if cfg.has(Task::Lxz) {
        f.push(Field::NrmseLxz);
    }
    if cfg.has(Task::Ipc) {
        f.extend((1..=cfg.ipc.max_order).map(Field::Ipc));
        f.push(Field::IpcTotal);
    }
    if cfg.has(Task::Measures) {
        f.extend([Field::Ek, Field::Ok, Field::Ks, Field::Fidelity]);
    }
    f
}

/// Evaluates every `(member, T, V)` point. Work is spread over a rayon pool
/// of `cfg.threads` workers; results come back in grid order regardless.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult, CliError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::config("threads", e.to_string()))?;
    pool.install(|| sweep_in_pool(cfg))
}

fn sweep_in_pool(cfg: &ExperimentConfig) -> Result<SweepResult, CliError> {
    let built = cfg.build_members()?;
    let labels: Vec<String> = built.iter().map(|(m, _)| m.label.clone()).collect();
    let contexts: Vec<MemberContext> = built
        .into_par_iter()
        .enumerate()
        .map(|(i, (m, h))| member_context(cfg, i, &m, h))
        .collect::<Result<_, _>>()?;
    let shared = shared_inputs(cfg)?;
    let ts = cfg.grid.clock_values();
    let vs = cfg.grid.virtual_nodes.clone();
    let jobs: Vec<(usize, f64, usize)> = vs
        .iter()
        .flat_map(|&v| ts.iter().map(move |&t| (t, v)))
        .flat_map(|(t, v)| (0..contexts.len()).map(move |m| (m, t, v)))
        .collect();
    let values: Vec<PointValues> = jobs
        .par_iter()
        .map(|&(m, t, v)| evaluate_point(cfg, &contexts[m], &shared, t, v))
        .collect::<Result<_, _>>()?;
    let k = contexts.len();
    let records = values
        .chunks(k)
        .zip(jobs.chunks(k))
        .map(|(vals, js)| GridRecord {
            clock_cycle: js[0].1,
            virtual_nodes: js[0].2,
            members: vals.to_vec(),
        })
        .collect();
    Ok(SweepResult {
        config_hash: cfg.content_hash()?,
        member_labels: labels,
        ensemble: cfg.hamiltonian.is_ensemble(),
        fields: requested_fields(cfg),
        clock_cycles: ts,
        virtual_nodes: vs,
        records,
    })
}

pub fn metadata(cfg: &ExperimentConfig, result: &SweepResult, command: &str) -> Metadata {
    let mut m = Metadata::new(command);
    m.push("experiment", &cfg.name);
    m.push("config_hash", &result.config_hash);
    m.push("hamiltonians", result.member_labels.join(" "));
    m.push(
        "seeds",
        format!(
            "base={} inputs={} seed_states={} noise=base+member_index",
            cfg.seed, cfg.seed, cfg.seed
        ),
    );
    m.push("noise", cfg.noise);
    m.push(
        "splits",
        format!(
            "init={} buffer={} train={} test={}",
            cfg.splits.n_init, cfg.splits.buffer, cfg.splits.n_train, cfg.splits.n_test
        ),
    );
    m.push(
        "observables",
        cfg.observables
            .sites(cfg.hamiltonian.n_sites())
            .iter()
            .map(|s| format!("Z{s}"))
            .collect::<Vec<_>>()
            .join(" "),
    );
    m.push("savgol_window", cfg.smoothing_window);
    m
}

/// Wide table, one row per grid point. Ensembles add `_std` columns.
pub fn sweep_table(result: &SweepResult) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["T".to_string(), "V".to_string(), "members".to_string()];
    for f in &result.fields {
        header.push(f.name());
        if result.ensemble {
            header.push(format!("{}_std", f.name()));
        }
    }
    let has_ipc = result.fields.contains(&Field::IpcTotal);
    if has_ipc {
        header.push("ipc_within_bound".into());
    }
    let rows = result
        .records
        .iter()
        .map(|r| {
            let mut row = vec![
                fmt_num(r.clock_cycle),
                r.virtual_nodes.to_string(),
                r.members.len().to_string(),
            ];
            for &f in &result.fields {
                let s = r.stat(f);
                row.push(fmt_num(s.mean));
                if result.ensemble {
                    row.push(fmt_num(s.std));
                }
            }
            if has_ipc {
                let ok = r.members.iter().all(|p| p.ipc.as_ref().map_or(true, |i| i.within_bound));
                row.push(ok.to_string());
            }
            row
        })
        .collect();
    (header, rows)
}

/// Long table `T, V, measure, value, stderr`.
pub fn measures_table(result: &SweepResult) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["T", "V", "measure", "value", "stderr"].iter().map(|s| s.to_string()).collect();
    let fields: Vec<Field> = result
        .fields
        .iter()
        .copied()
        .filter(|f| matches!(f, Field::Ek | Field::Ok | Field::Ks | Field::Fidelity))
        .collect();
    let mut rows = Vec::new();
    for r in &result.records {
        for &f in &fields {
            rows.push(vec![
                fmt_num(r.clock_cycle),
                r.virtual_nodes.to_string(),
                f.name(),
                fmt_num(r.stat(f).mean),
                fmt_num(r.stderr(f)),
            ]);
        }
    }
    (header, rows)
}

/// Saturation time and plateau of every field's curve at each `V`.
pub fn saturation_table(result: &SweepResult, window: usize) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["V", "measure", "t_sat", "plateau"].iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    if result.clock_cycles.len() < 5 {
        return (header, rows);
    }
    for &v in &result.virtual_nodes {
        for &f in &result.fields {
            let Some((ts, ys)) = result.curve(f, v) else { continue };
            if ys.iter().any(|y| !y.is_finite()) {
                continue;
            }
            if let Ok(s) = saturation_detect(&ts, &ys, SATURATION_REL_TOL, Some(window)) {
                rows.push(vec![
                    v.to_string(),
                    f.name(),
                    s.t_sat.map(fmt_num).unwrap_or_else(|| "none".into()),
                    fmt_num(s.plateau),
                ]);
            }
        }
    }
    (header, rows)
}

/// Writes the CSVs for a finished sweep and returns their paths.
pub fn write_outputs(cfg: &ExperimentConfig, result: &SweepResult, command: &str) -> Result<Vec<PathBuf>, CliError> {
    let meta = metadata(cfg, result, command);
    let dir = &cfg.output_dir;
    let mut written = Vec::new();
    let mut emit = |name: String, table: (Vec<String>, Vec<Vec<String>>)| -> Result<(), CliError> {
        let path = dir.join(name);
        write_csv(&path, &meta, &table.0, &table.1)?;
        written.push(path);
        Ok(())
    };
    emit(format!("{}_sweep.csv", cfg.name), sweep_table(result))?;
    if cfg.has(Task::Measures) {
        emit(format!("{}_measures.csv", cfg.name), measures_table(result))?;
    }
    emit(format!("{}_saturation.csv", cfg.name), saturation_table(result, cfg.smoothing_window))?;
    if cfg.write_ipc_targets {
        for r in &result.records {
            for (label, p) in result.member_labels.iter().zip(&r.members) {
                let Some(detail) = p.ipc.as_ref().and_then(|i| i.detail.as_ref()) else { continue };
                let mut buf = Vec::new();
                meta.write_to(&mut buf)?;
                detail.write_targets_csv(&mut buf)?;
                let path = dir.join(format!(
                    "{}_ipc_targets_{label}_T{}_V{}.csv",
                    cfg.name,
                    fmt_num(r.clock_cycle),
                    r.virtual_nodes
                ));
                std::fs::create_dir_all(dir)?;
                std::fs::write(&path, buf)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// Runs the sweep and writes its CSVs.
pub fn run_experiment(cfg: &ExperimentConfig, command: &str) -> Result<(SweepResult, Vec<PathBuf>), CliError> {
    let result = run_sweep(cfg)?;
    let paths = write_outputs(cfg, &result, command)?;
    Ok((result, paths))
}
