//! Benchmark data: Lorenz63 trajectories, the two prediction tasks built on
//! them, uniform input series and Legendre polynomials.

use std::io::{self, Write};
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Initial condition used by the experiments.
pub const DEFAULT_INIT: [f64; 3] = [1.0, 1.0, 1.0];

/// Samples dropped before recording (20 time units at the default sampling step).
pub const DEFAULT_DISCARD: usize = 1000;

/// Lorenz63 parameters and time steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub dt_integration: f64,
    pub dt_sample: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            a: 10.0,
            b: 28.0,
            c: 8.0 / 3.0,
            dt_integration: 0.001,
            dt_sample: 0.02,
        }
    }
}

impl LorenzParams {
    /// Integration steps per recorded sample.
    pub fn steps_per_sample(&self) -> Result<usize> {
        if !(self.dt_integration > 0.0) || !(self.dt_sample > 0.0) {
            return Err(invalid("dt_integration", "time steps must be positive"));
        }
        let ratio = self.dt_sample / self.dt_integration;
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > 1e-9 * ratio {
            return Err(invalid(
                "dt_sample",
                format!("{} is not an integer multiple of {}", self.dt_sample, self.dt_integration),
            ));
        }
        Ok(k as usize)
    }

    fn rhs(&self, s: [f64; 3]) -> [f64; 3] {
        let [x, y, z] = s;
        [self.a * (y - x), x * (self.b - z) - y, x * y - self.c * z]
    }

    fn rk4(&self, s: [f64; 3], h: f64) -> [f64; 3] {
        let add = |u: [f64; 3], v: [f64; 3], f: f64| [u[0] + f * v[0], u[1] + f * v[1], u[2] + f * v[2]];
        let k1 = self.rhs(s);
        let k2 = self.rhs(add(s, k1, h / 2.0));
        let k3 = self.rhs(add(s, k2, h / 2.0));
        let k4 = self.rhs(add(s, k3, h));
        [
            s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            s[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        ]
    }
}

/// Sampled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct LorenzSeries {
    pub dt: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl LorenzSeries {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// CSV with columns `t,x,y,z`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,y,z")?;
        for n in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{}",
                n as f64 * self.dt,
                self.x[n],
                self.y[n],
                self.z[n]
            )?;
        }
        Ok(())
    }
}

/// RK4 integration at `dt_integration`, one sample kept every
/// `dt_sample / dt_integration` steps, the first `discard` samples dropped.
pub fn integrate_lorenz(
    params: &LorenzParams,
    init: [f64; 3],
    n_samples: usize,
    discard: usize,
) -> Result<LorenzSeries> {
    if n_samples == 0 {
        return Err(invalid("n_samples", "must be at least 1"));
    }
    let stride = params.steps_per_sample()?;
    let h = params.dt_integration;
    let mut s = init;
    let mut out = LorenzSeries {
        dt: params.dt_sample,
        x: Vec::with_capacity(n_samples),
        y: Vec::with_capacity(n_samples),
        z: Vec::with_capacity(n_samples),
    };
    for k in 0..discard + n_samples {
        if k >= discard {
            out.x.push(s[0]);
            out.y.push(s[1]);
            out.z.push(s[2]);
        }
        for _ in 0..stride {
            s = params.rk4(s, h);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    /// Predict `x_{n+p}` from `x_n`.
    Lxx,
    /// Predict `z_n` from `x_n`.
    Lxz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub lookahead: usize,
}

impl TaskSpec {
    pub fn lxx(lookahead: usize) -> Result<Self> {
        if lookahead == 0 {
            return Err(invalid("lookahead", "must be at least 1"));
        }
        Ok(Self {
            kind: TaskKind::Lxx,
            lookahead,
        })
    }

    pub fn lxz() -> Self {
        Self {
            kind: TaskKind::Lxz,
            lookahead: 0,
        }
    }

    /// `x_n → x_n`, used to check input/target alignment.
    pub fn diagnostic_identity() -> Self {
        Self {
            kind: TaskKind::Lxx,
            lookahead: 0,
        }
    }

    /// Extra trajectory samples needed beyond the inputs.
    pub fn horizon(&self) -> usize {
        match self.kind {
            TaskKind::Lxx => self.lookahead,
            TaskKind::Lxz => 0,
        }
    }
}

/// Reservoir inputs and raw targets for one task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskData {
    /// `x_n` mapped affinely to `[-1, 1]` and clamped there.
    pub inputs: Vec<f64>,
    /// Unscaled targets aligned with `inputs`.
    pub targets: Vec<f64>,
    /// `(min, max)` of `x` on the training segment.
    pub scale: (f64, f64),
}

/// Builds `n_inputs` input/target pairs. The affine input map sends the min and
/// max of `x` over `train` to -1 and +1. Samples outside the training range are
/// clamped.
pub fn make_task(
    series: &LorenzSeries,
    spec: &TaskSpec,
    n_inputs: usize,
    train: Range<usize>,
) -> Result<TaskData> {
    let needed = n_inputs + spec.horizon();
    if series.len() < needed {
        return Err(Error::SeriesTooShort {
            needed,
            got: series.len(),
        });
    }
    if train.is_empty() || train.end > n_inputs {
        return Err(invalid(
            "train",
            format!("segment {train:?} must be nonempty and within {n_inputs} inputs"),
        ));
    }
    let seg = &series.x[train];
    let lo = seg.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = seg.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::Degenerate("input series is constant on the training segment".into()));
    }
    let inputs = series.x[..n_inputs]
        .iter()
        .map(|&x| (2.0 * (x - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0))
        .collect();
    let targets = match spec.kind {
        TaskKind::Lxx => series.x[spec.lookahead..spec.lookahead + n_inputs].to_vec(),
        TaskKind::Lxz => series.z[..n_inputs].to_vec(),
    };
    Ok(TaskData {
        inputs,
        targets,
        scale: (lo, hi),
    })
}

/// I.i.d. `U([-1, 1])` inputs.
pub fn uniform_series(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

/// Legendre polynomial `l_k(x)` by the three-term recurrence
/// `(n+1) l_{n+1} = (2n+1) x l_n - n l_{n-1}`.
pub fn legendre(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for n in 1..k {
                let nf = n as f64;
                let next = ((2.0 * nf + 1.0) * x * cur - nf * prev) / (nf + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}
