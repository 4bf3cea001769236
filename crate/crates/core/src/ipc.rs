//! Information processing capacity.
//!
//! Each target is a product of Legendre polynomials of past inputs,
//! `Π l_{k_i}(u_{n-m_i})`, with distinct delays `m_i ≥ 1`. Delay 1 is the most
//! recently injected input. A readout is trained per target on the train block,
//! and its squared-correlation capacity is measured on the test block.
//! Capacities below the threshold `θ` are zeroed, and the rest are summed per
//! total order.

use std::fmt;
use std::io::{self, Write};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::reservoir::{capacity, LeastSquares, StateMatrix};
use crate::tasks::legendre;

/// Highest supported total order.
pub const MAX_ORDER: usize = 4;

/// Delay windows `D` per total order 1..=4.
pub const DEFAULT_WINDOWS: [usize; MAX_ORDER] = [15, 15, 10, 7];

const CHUNK: usize = 64;

/// Monomial `Π l_k(u_{n-m})` stored as `(delay m, degree k)` with ascending delays.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IpcTarget {
    factors: Vec<(usize, usize)>,
}

impl IpcTarget {
    pub fn new(mut factors: Vec<(usize, usize)>) -> Result<Self> {
        factors.sort_unstable();
        if factors.is_empty() {
            return Err(invalid("factors", "a target needs at least one factor"));
        }
        if factors.iter().any(|&(m, k)| m == 0 || k == 0) {
            return Err(invalid("factors", "delays and degrees start at 1"));
        }
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("factors", "delays must be distinct"));
        }
        let t = Self { factors };
        if t.total_order() > MAX_ORDER {
            return Err(invalid("factors", format!("total order above {MAX_ORDER}")));
        }
        Ok(t)
    }

    pub fn factors(&self) -> &[(usize, usize)] {
        &self.factors
    }

    pub fn total_order(&self) -> usize {
        self.factors.iter().map(|f| f.1).sum()
    }

    pub fn max_delay(&self) -> usize {
        self.factors.iter().map(|f| f.0).max().unwrap_or(0)
    }

    /// Target value at time `n`.
    pub fn value(&self, u: &[f64], n: usize) -> f64 {
        self.factors
            .iter()
            .map(|&(m, k)| legendre(k, u[n - m]))
            .product()
    }

    /// Target values at the given times. Every time needs `max_delay ≤ n ≤ len(u)`.
    pub fn series(&self, u: &[f64], times: &[usize]) -> Result<Vec<f64>> {
        let md = self.max_delay();
        if let Some(&bad) = times.iter().find(|&&n| n < md || n > u.len()) {
            return Err(Error::SeriesTooShort {
                needed: bad.max(md),
                got: u.len(),
            });
        }
        Ok(times.iter().map(|&n| self.value(u, n)).collect())
    }
}

impl fmt::Display for IpcTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (m, k)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "l{k}(u[n-{m}])")?;
        }
        Ok(())
    }
}

/// Targets with total order `≤ max_order` and every delay `≤ max_delay`.
pub fn enumerate_targets(max_order: usize, max_delay: usize) -> Vec<IpcTarget> {
    enumerate_windowed(max_order, &[max_delay; MAX_ORDER])
}

/// Targets of each total order `o ≤ max_order` with delays `≤ windows[o-1]`.
pub fn enumerate_windowed(max_order: usize, windows: &[usize; MAX_ORDER]) -> Vec<IpcTarget> {
    fn rec(start: usize, window: usize, left: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<IpcTarget>) {
        if left == 0 {
            out.push(IpcTarget { factors: cur.clone() });
            return;
        }
        for m in start..=window {
            for k in 1..=left {
                cur.push((m, k));
                rec(m + 1, window, left - k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    for order in 1..=max_order.min(MAX_ORDER) {
        rec(1, windows[order - 1], order, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IpcConfig {
    pub max_order: usize,
    pub windows: [usize; MAX_ORDER],
    /// Defaults to `2·N_R / N_test` when absent.
    pub threshold: Option<f64>,
}

impl Default for IpcConfig {
    fn default() -> Self {
        Self {
            max_order: MAX_ORDER,
            windows: DEFAULT_WINDOWS,
            threshold: None,
        }
    }
}

impl IpcConfig {
    pub fn with_max_order(max_order: usize) -> Self {
        Self {
            max_order,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_ORDER).contains(&self.max_order) {
            return Err(invalid("max_order", format!("must be in 1..={MAX_ORDER}")));
        }
        if self.windows[..self.max_order].contains(&0) {
            return Err(invalid("windows", "delay windows must be at least 1"));
        }
        if let Some(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(invalid("threshold", format!("{t} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetCapacity {
    pub target: IpcTarget,
    /// Thresholded test-block capacity.
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpcResult {
    pub per_order: [f64; MAX_ORDER],
    pub total: f64,
    pub threshold: f64,
    pub windows: [usize; MAX_ORDER],
    pub max_order: usize,
    pub readout_dim: usize,
    pub targets: Vec<TargetCapacity>,
}

impl IpcResult {
    /// `IPC ≤ N_R + 1`, the bias column included.
    pub fn within_readout_bound(&self) -> bool {
        self.total <= (self.readout_dim + 1) as f64 + 1e-9
    }

    /// CSV with columns `order,delays,degrees,capacity`.
    pub fn write_targets_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "order,delays,degrees,capacity")?;
        for t in &self.targets {
            let join = |f: fn(&(usize, usize)) -> usize| {
                t.target
                    .factors()
                    .iter()
                    .map(|x| f(x).to_string())
                    .collect::<Vec<_>>()
                    .join(";")
            };
            writeln!(
                w,
                "{},{},{},{}",
                t.target.total_order(),
                join(|x| x.0),
                join(|x| x.1),
                t.capacity
            )?;
        }
        Ok(())
    }
}

/// IPC of the state matrix `s` driven by the uniform input series `u`.
pub fn compute_ipc(s: &StateMatrix, u: &[f64], cfg: &IpcConfig) -> Result<IpcResult> {
    cfg.validate()?;
    if s.input_indices.len() != s.n_rows() {
        return Err(Error::DimensionMismatch("state matrix rows vs input indices".into()));
    }
    if s.n_train == 0 || s.n_test() == 0 {
        return Err(invalid("S", "both train and test blocks must be nonempty"));
    }
    let n_r = s.readout_dim();
    let threshold = cfg
        .threshold
        .unwrap_or(2.0 * n_r as f64 / s.n_test() as f64);
    let targets = enumerate_windowed(cfg.max_order, &cfg.windows);
    let train_t: Vec<usize> = s.train_indices().iter().map(|i| i + 1).collect();
    let test_t: Vec<usize> = s.test_indices().iter().map(|i| i + 1).collect();
    let solver = LeastSquares::new(&s.train())?;
    let test_block = s.test();

    let caps: Vec<Vec<f64>> = targets
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<Vec<f64>> {
            let mut ytr = DMatrix::zeros(train_t.len(), chunk.len());
            let mut yte = DMatrix::zeros(test_t.len(), chunk.len());
            for (c, t) in chunk.iter().enumerate() {
                ytr.set_column(c, &nalgebra::DVector::from_vec(t.series(u, &train_t)?));
                yte.set_column(c, &nalgebra::DVector::from_vec(t.series(u, &test_t)?));
            }
            let w = solver.solve(&ytr)?;
            let pred = w.predict(&test_block);
            Ok((0..chunk.len())
                .map(|c| {
                    let y: Vec<f64> = pred.column(c).iter().cloned().collect();
                    let yt: Vec<f64> = yte.column(c).iter().cloned().collect();
                    let cap = capacity(&y, &yt).unwrap_or(0.0);
                    if cap < threshold {
                        0.0
                    } else {
                        cap
                    }
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut per_order = [0.0; MAX_ORDER];
    let targets: Vec<TargetCapacity> = targets
        .into_iter()
        .zip(caps.into_iter().flatten())
        .map(|(target, capacity)| {
            per_order[target.total_order() - 1] += capacity;
            TargetCapacity { target, capacity }
        })
        .collect();
    Ok(IpcResult {
        per_order,
        total: per_order.iter().sum(),
        threshold,
        windows: cfg.windows,
        max_order: cfg.max_order,
        readout_dim: n_r,
        targets,
    })
}
