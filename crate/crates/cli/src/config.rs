use std::fs;
use std::path::{Path, PathBuf};

use qrc_core::hamiltonian::{build_ising, preset, sample_random, IsingSpec, Preset, RandomCouplingSampler};
use qrc_core::ipc::IpcConfig;
use qrc_core::reservoir::{SplitLengths, DEFAULT_NOISE};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Savitzky–Golay window used when smoothing curves for saturation analysis.
pub const DEFAULT_SMOOTHING_WINDOW: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Lxx,
    Lxz,
    Ipc,
    Measures,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Lxx, Task::Lxz, Task::Ipc, Task::Measures];

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lxx" => Some(Task::Lxx),
            "lxz" => Some(Task::Lxz),
            "ipc" => Some(Task::Ipc),
            "measures" => Some(Task::Measures),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HamiltonianSource {
    Preset { name: String },
    Random { n_sites: usize, seeds: Vec<u64> },
}

impl Default for HamiltonianSource {
    fn default() -> Self {
        HamiltonianSource::Preset {
            name: Preset::HI3.name().to_string(),
        }
    }
}

/// One Hamiltonian of an experiment. Random members carry their seed.
#[derive(Debug, Clone)]
pub struct Member {
    pub label: String,
    pub spec: IsingSpec,
    pub seed: Option<u64>,
}

impl HamiltonianSource {
    pub fn n_sites(&self) -> usize {
        match self {
            HamiltonianSource::Preset { .. } => 4,
            HamiltonianSource::Random { n_sites, .. } => *n_sites,
        }
    }

    pub fn members(&self) -> Result<Vec<Member>, CliError> {
        match self {
            HamiltonianSource::Preset { name } => {
                let spec = preset(name).map_err(|e| CliError::config("hamiltonian.name", e.to_string()))?;
                Ok(vec![Member {
                    label: name.clone(),
                    spec,
                    seed: None,
                }])
            }
            HamiltonianSource::Random { n_sites, seeds } => seeds
                .iter()
                .map(|&seed| {
                    let spec = sample_random(*n_sites, &RandomCouplingSampler::new(seed))
                        .map_err(|e| CliError::config("hamiltonian.n_sites", e.to_string()))?;
                    Ok(Member {
                        label: format!("random-{n_sites}-{seed}"),
                        spec,
                        seed: Some(seed),
                    })
                })
                .collect(),
        }
    }

    pub fn is_ensemble(&self) -> bool {
        matches!(self, HamiltonianSource::Random { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "selection", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObservableSelection {
    #[default]
    FirstSite,
    AllSites,
    Explicit {
        sites: Vec<usize>,
    },
}

impl ObservableSelection {
    /// 1-based Pauli-Z sites.
    pub fn sites(&self, n_sites: usize) -> Vec<usize> {
        match self {
            ObservableSelection::FirstSite => vec![1],
            ObservableSelection::AllSites => (1..=n_sites).collect(),
            ObservableSelection::Explicit { sites } => sites.clone(),
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "first-site" | "z1" => Ok(ObservableSelection::FirstSite),
            "all-sites" | "all" => Ok(ObservableSelection::AllSites),
            list => {
                let sites = list
                    .split(',')
                    .map(|x| x.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| {
                        CliError::config(
                            "observables",
                            format!("expected first-site, all-sites or a site list, got {list:?}"),
                        )
                    })?;
                Ok(ObservableSelection::Explicit { sites })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub clock_cycles: Vec<f64>,
    /// `[start, stop, step]`, inclusive of `stop` up to rounding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clock_range: Option<[f64; 3]>,
    #[serde(default)]
    pub virtual_nodes: Vec<usize>,
}

impl Grid {
    /// Explicit clock cycles followed by the range, sorted and deduplicated.
    pub fn clock_values(&self) -> Vec<f64> {
        let mut ts = self.clock_cycles.clone();
        if let Some([start, stop, step]) = self.clock_range {
            if step > 0.0 && stop >= start {
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                ts.extend((0..=n).map(|i| start + i as f64 * step));
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorenzOptions {
    pub lookahead: usize,
}

impl Default for LorenzOptions {
    fn default() -> Self {
        Self { lookahead: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub tasks: Vec<Task>,
    pub hamiltonian: HamiltonianSource,
    pub grid: Grid,
    pub observables: ObservableSelection,
    pub splits: SplitLengths,
    pub noise: f64,
    pub seed: u64,
    pub seed_states: usize,
    pub lorenz: LorenzOptions,
    pub ipc: IpcConfig,
    pub write_ipc_targets: bool,
    pub smoothing_window: usize,
    pub output_dir: PathBuf,
    /// Worker threads, 0 for one per core.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            tasks: vec![Task::Lxx, Task::Lxz, Task::Ipc, Task::Measures],
            hamiltonian: HamiltonianSource::default(),
            grid: Grid {
                clock_cycles: vec![10.0],
                clock_range: None,
                virtual_nodes: vec![30],
            },
            observables: ObservableSelection::default(),
            splits: SplitLengths::default(),
            noise: DEFAULT_NOISE,
            seed: 0,
            seed_states: qrc_core::krylov::DEFAULT_SEED_STATES,
            lorenz: LorenzOptions::default(),
            ipc: IpcConfig::default(),
            write_ipc_targets: false,
            smoothing_window: DEFAULT_SMOOTHING_WINDOW,
            output_dir: PathBuf::from("results"),
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn has(&self, task: Task) -> bool {
        self.tasks.contains(&task)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.tasks.is_empty() {
            return Err(CliError::config("tasks", "at least one task is required"));
        }
        let ts = self.grid.clock_values();
        if ts.is_empty() {
            return Err(CliError::config("grid.clock_cycles", "the clock-cycle grid is empty"));
        }
        if let Some(t) = ts.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return Err(CliError::config("grid.clock_cycles", format!("clock cycles must be positive, got {t}")));
        }
        if let Some([_, _, step]) = self.grid.clock_range {
            if !(step > 0.0) {
                return Err(CliError::config("grid.clock_range", "step must be positive"));
            }
        }
        if self.grid.virtual_nodes.is_empty() {
            return Err(CliError::config("grid.virtual_nodes", "the virtual-node grid is empty"));
        }
        if self.grid.virtual_nodes.contains(&0) {
            return Err(CliError::config("grid.virtual_nodes", "virtual nodes must be at least 1"));
        }
        let n_sites = self.hamiltonian.n_sites();
        match &self.hamiltonian {
            HamiltonianSource::Preset { name } => {
                name.parse::<Preset>()
                    .map_err(|e| CliError::config("hamiltonian.name", e.to_string()))?;
            }
            HamiltonianSource::Random { n_sites, seeds } => {
                if !(2..=10).contains(n_sites) {
                    return Err(CliError::config("hamiltonian.n_sites", "must lie in 2..=10"));
                }
                if seeds.is_empty() {
                    return Err(CliError::config("hamiltonian.seeds", "at least one seed is required"));
                }
            }
        }
        let sites = self.observables.sites(n_sites);
        if sites.is_empty() {
            return Err(CliError::config("observables.sites", "no observables selected"));
        }
        if let Some(s) = sites.iter().find(|&&s| s == 0 || s > n_sites) {
            return Err(CliError::config(
                "observables.sites",
                format!("site {s} outside 1..={n_sites}"),
            ));
        }
        let mut sorted = sites.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != sites.len() {
            return Err(CliError::config("observables.sites", "sites must be distinct"));
        }
        self.splits
            .validate()
            .map_err(|e| CliError::config("splits", e.to_string()))?;
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(CliError::config("noise", "must be a finite non-negative number"));
        }
        if self.has(Task::Measures) && self.seed_states == 0 {
            return Err(CliError::config("seed_states", "at least one seed state is required"));
        }
        if self.lorenz.lookahead == 0 {
            return Err(CliError::config("lorenz.lookahead", "must be at least 1"));
        }
        self.ipc.validate().map_err(|e| CliError::config("ipc", e.to_string()))?;
        if self.smoothing_window < 3 || self.smoothing_window % 2 == 0 {
            return Err(CliError::config("smoothing_window", "must be odd and at least 3"));
        }
        Ok(())
    }

    /// Validated Hamiltonians with their eigensystems built.
    pub fn build_members(&self) -> Result<Vec<(Member, qrc_core::quantum::HermitianOperator)>, CliError> {
        self.hamiltonian
            .members()?
            .into_iter()
            .map(|m| {
                let h = build_ising(&m.spec)?;
                h.eigensystem()?;
                Ok((m, h))
            })
            .collect()
    }

    /// SHA-256 of the config with `output_dir` and `threads` cleared, so
    /// moving the output or changing the worker count keeps the hash.
    pub fn content_hash(&self) -> Result<String, CliError> {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        canonical.threads = 0;
        let text = canonical.to_toml()?;
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }
}

/// Command-line overrides. `None` leaves the file value untouched.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub name: Option<String>,
    pub tasks: Option<Vec<Task>>,
    pub preset: Option<String>,
    pub random_sites: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub clock_cycles: Option<Vec<f64>>,
    pub clock_range: Option<[f64; 3]>,
    pub virtual_nodes: Option<Vec<usize>>,
    pub observables: Option<ObservableSelection>,
    pub n_init: Option<usize>,
    pub n_train: Option<usize>,
    pub n_test: Option<usize>,
    pub buffer: Option<usize>,
    pub noise: Option<f64>,
    pub seed: Option<u64>,
    pub seed_states: Option<usize>,
    pub lookahead: Option<usize>,
    pub max_order: Option<usize>,
    pub ipc_threshold: Option<f64>,
    pub write_ipc_targets: bool,
    pub smoothing_window: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(v) = &self.name {
            cfg.name = v.clone();
        }
        if let Some(v) = &self.tasks {
            cfg.tasks = v.clone();
        }
        if let Some(name) = &self.preset {
            cfg.hamiltonian = HamiltonianSource::Preset { name: name.clone() };
        }
        if self.random_sites.is_some() || self.seeds.is_some() {
            let (n_old, seeds_old) = match &cfg.hamiltonian {
                HamiltonianSource::Random { n_sites, seeds } => (*n_sites, seeds.clone()),
                HamiltonianSource::Preset { .. } => (6, (0..10).collect()),
            };
            if self.preset.is_some() {
                return Err(CliError::config("hamiltonian", "--preset conflicts with --random-sites/--seeds"));
            }
            cfg.hamiltonian = HamiltonianSource::Random {
                n_sites: self.random_sites.unwrap_or(n_old),
                seeds: self.seeds.clone().unwrap_or(seeds_old),
            };
        }
        if let Some(v) = &self.clock_cycles {
            cfg.grid.clock_cycles = v.clone();
            if self.clock_range.is_none() {
                cfg.grid.clock_range = None;
            }
        }
        if let Some(v) = self.clock_range {
            cfg.grid.clock_range = Some(v);
            if self.clock_cycles.is_none() {
                cfg.grid.clock_cycles.clear();
            }
        }
        if let Some(v) = &self.virtual_nodes {
            cfg.grid.virtual_nodes = v.clone();
        }
        if let Some(v) = &self.observables {
            cfg.observables = v.clone();
        }
        if let Some(v) = self.n_init {
            cfg.splits.n_init = v;
        }
        if let Some(v) = self.n_train {
            cfg.splits.n_train = v;
        }
        if let Some(v) = self.n_test {
            cfg.splits.n_test = v;
        }
        if let Some(v) = self.buffer {
            cfg.splits.buffer = v;
        }
        if let Some(v) = self.noise {
            cfg.noise = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.seed_states {
            cfg.seed_states = v;
        }
        if let Some(v) = self.lookahead {
            cfg.lorenz.lookahead = v;
        }
        if let Some(v) = self.max_order {
            cfg.ipc.max_order = v;
        }
        if let Some(v) = self.ipc_threshold {
            cfg.ipc.threshold = Some(v);
        }
        if self.write_ipc_targets {
            cfg.write_ipc_targets = true;
        }
        if let Some(v) = self.smoothing_window {
            cfg.smoothing_window = v;
        }
        if let Some(v) = &self.output_dir {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = self.threads {
            cfg.threads = v;
        }
        Ok(())
    }
}

/// Parses `start:stop:step`.
pub fn parse_range(s: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::config("grid.clock_range", format!("expected start:stop:step, got {s:?}")))?;
    match parts.as_slice() {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(CliError::config("grid.clock_range", format!("expected start:stop:step, got {s:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "hi2-grid"
tasks = ["lxx", "ipc"]
noise = 1e-5
seed = 3

[hamiltonian]
kind = "preset"
name = "HI2"

[grid]
clock_cycles = [2.0, 1.0]
clock_range = [5.0, 7.0, 1.0]
virtual_nodes = [10, 30]

[observables]
selection = "all-sites"

[splits]
n_init = 100
n_train = 500
n_test = 200
buffer = 10
"#;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.grid.clock_values(), vec![1.0, 2.0, 5.0, 6.0, 7.0]);
        assert_eq!(cfg.observables.sites(4), vec![1, 2, 3, 4]);
        assert_eq!(cfg.tasks, vec![Task::Lxx, Task::Ipc]);
        assert_eq!(cfg.smoothing_window, DEFAULT_SMOOTHING_WINDOW);
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn empty_grid_names_the_field() {
        let mut cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        cfg.grid.clock_cycles.clear();
        cfg.grid.clock_range = None;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("grid.clock_cycles"), "{err}");
        cfg.grid.clock_cycles = vec![-1.0];
        assert!(cfg.validate().unwrap_err().to_string().contains("grid.clock_cycles"));
    }

    #[test]
    fn bad_fields_are_named() {
        let cases: Vec<(&str, Box<dyn Fn(&mut ExperimentConfig)>)> = vec![
            ("grid.virtual_nodes", Box::new(|c| c.grid.virtual_nodes = vec![0])),
            ("observables.sites", Box::new(|c| c.observables = ObservableSelection::Explicit { sites: vec![5] })),
            ("hamiltonian.name", Box::new(|c| c.hamiltonian = HamiltonianSource::Preset { name: "HX".into() })),
            ("noise", Box::new(|c| c.noise = -1.0)),
            ("smoothing_window", Box::new(|c| c.smoothing_window = 4)),
            ("tasks", Box::new(|c| c.tasks.clear())),
        ];
        for (field, mutate) in cases {
            let mut cfg = ExperimentConfig::default();
            mutate(&mut cfg);
            let err = cfg.validate().unwrap_err().to_string();
            assert!(err.contains(field), "{field}: {err}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("nosie = 1.0").is_err());
    }

    #[test]
    fn overrides_win_over_file() {
        let mut cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        let ov = Overrides {
            clock_cycles: Some(vec![4.0]),
            seeds: Some(vec![1, 2]),
            random_sites: Some(5),
            threads: Some(2),
            ..Overrides::default()
        };
        ov.apply(&mut cfg).unwrap();
        assert_eq!(cfg.grid.clock_values(), vec![4.0]);
        assert_eq!(
            cfg.hamiltonian,
            HamiltonianSource::Random {
                n_sites: 5,
                seeds: vec![1, 2]
            }
        );
        cfg.validate().unwrap();
    }

    #[test]
    fn hash_ignores_output_location_and_threads() {
        let a = ExperimentConfig::from_toml(SAMPLE).unwrap();
        let mut b = a.clone();
        b.threads = 7;
        b.output_dir = PathBuf::from("/elsewhere");
        assert_eq!(a.content_hash().unwrap(), b.content_hash().unwrap());
        b.seed += 1;
        assert_ne!(a.content_hash().unwrap(), b.content_hash().unwrap());
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("1:40:0.5").unwrap(), [1.0, 40.0, 0.5]);
        assert!(parse_range("1:2").is_err());
    }
}
