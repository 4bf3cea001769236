//! The reservoir pipeline. Each input `u_n` overwrites qubit 1 with
//! `√((1-u)/2)|0⟩ + √((1+u)/2)|1⟩`. The register then evolves for one clock cycle
//! `T` and is measured at `V` equally spaced sub-times `(j+1)T/V`. The collected
//! expectations form one row of the state matrix, and a linear readout is
//! trained on those rows.
//!
//! [`run`] uses [`ReservoirEngine`], which works in the eigenbasis of `H`.
//! There, evolution is an entrywise phase, and all readouts of a batch of steps
//! come from one matrix product. [`step`] is the plain reference
//! implementation of a single cycle.

use std::io::{self, Write};
use std::ops::Range;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantum::{
    kron, partial_trace_first_qubit, pauli_embed, Axis, CMatrix, DensityMatrix,
    HermitianEigensystem, HermitianOperator,
};

/// Noise amplitude `η` used throughout the experiments.
pub const DEFAULT_NOISE: f64 = 1e-5;

/// Clock cycle, multiplexing and measured observables.
#[derive(Debug, Clone)]
pub struct ReservoirConfig {
    pub clock_cycle: f64,
    pub virtual_nodes: usize,
    pub observables: Vec<HermitianOperator>,
    pub noise: f64,
    pub n_sites: usize,
}

impl ReservoirConfig {
    pub fn new(
        clock_cycle: f64,
        virtual_nodes: usize,
        observables: Vec<HermitianOperator>,
        noise: f64,
        n_sites: usize,
    ) -> Result<Self> {
        if !(clock_cycle > 0.0) || !clock_cycle.is_finite() {
            return Err(invalid("clock_cycle", format!("must be positive, got {clock_cycle}")));
        }
        if virtual_nodes == 0 {
            return Err(invalid("virtual_nodes", "must be at least 1"));
        }
        if observables.is_empty() {
            return Err(invalid("observables", "at least one observable is required"));
        }
        if !(noise >= 0.0) || !noise.is_finite() {
            return Err(invalid("noise", format!("must be non-negative, got {noise}")));
        }
        if n_sites < 2 {
            return Err(invalid("n_sites", "the encoding needs at least two sites"));
        }
        let dim = 1usize << n_sites;
        if let Some(o) = observables.iter().find(|o| o.dim() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "observable dim {} vs register dim {dim}",
                o.dim()
            )));
        }
        Ok(Self {
            clock_cycle,
            virtual_nodes,
            observables,
            noise,
            n_sites,
        })
    }

    /// Pauli-Z readout on the given 1-based sites.
    pub fn pauli_z(
        clock_cycle: f64,
        virtual_nodes: usize,
        sites: &[usize],
        noise: f64,
        n_sites: usize,
    ) -> Result<Self> {
        let obs = sites
            .iter()
            .map(|&s| HermitianOperator::new(pauli_embed(s, Axis::Z, n_sites)?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(clock_cycle, virtual_nodes, obs, noise, n_sites)
    }

    /// `N_R = V·K`.
    pub fn readout_dim(&self) -> usize {
        self.virtual_nodes * self.observables.len()
    }

    /// Measurement times `(j+1)T/V`.
    pub fn sub_times(&self) -> Vec<f64> {
        let tau = self.clock_cycle / self.virtual_nodes as f64;
        (0..self.virtual_nodes).map(|j| (j + 1) as f64 * tau).collect()
    }
}

/// Input segment lengths, laid out as init, buffer, train, buffer, test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitLengths {
    pub n_init: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub buffer: usize,
}

impl Default for SplitLengths {
    fn default() -> Self {
        Self {
            n_init: 10_000,
            n_train: 25_000,
            n_test: 5_000,
            buffer: 100,
        }
    }
}

impl SplitLengths {
    pub fn validate(&self) -> Result<()> {
        if self.n_init == 0 || self.n_train == 0 || self.n_test == 0 || self.buffer == 0 {
            return Err(invalid("splits", "all segment lengths must be positive"));
        }
        Ok(())
    }

    /// Inputs consumed by one run.
    pub fn total(&self) -> usize {
        self.n_init + self.n_train + self.n_test + 2 * self.buffer
    }

    pub fn train_range(&self) -> Range<usize> {
        let s = self.n_init + self.buffer;
        s..s + self.n_train
    }

    pub fn test_range(&self) -> Range<usize> {
        let s = self.train_range().end + self.buffer;
        s..s + self.n_test
    }
}

/// Readout rows for the train block followed by the test block.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix {
    pub data: DMatrix<f64>,
    /// Index of the last input injected before each row was measured.
    pub input_indices: Vec<usize>,
    pub n_train: usize,
}

impl StateMatrix {
    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn readout_dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn n_test(&self) -> usize {
        self.n_rows() - self.n_train
    }

    pub fn train(&self) -> DMatrix<f64> {
        self.data.rows(0, self.n_train).into_owned()
    }

    pub fn test(&self) -> DMatrix<f64> {
        self.data.rows(self.n_train, self.n_test()).into_owned()
    }

    pub fn train_indices(&self) -> &[usize] {
        &self.input_indices[..self.n_train]
    }

    pub fn test_indices(&self) -> &[usize] {
        &self.input_indices[self.n_train..]
    }

    /// CSV with header `input_index,node_0,…`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "input_index")?;
        for c in 0..self.readout_dim() {
            write!(w, ",node_{c}")?;
        }
        writeln!(w)?;
        for (r, idx) in self.input_indices.iter().enumerate() {
            write!(w, "{idx}")?;
            for c in 0..self.readout_dim() {
                write!(w, ",{}", self.data[(r, c)])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn input_amplitudes(u: f64) -> Result<[f64; 2]> {
    if !(-1.0..=1.0).contains(&u) {
        return Err(invalid("u", format!("input {u} outside [-1, 1]")));
    }
    Ok([((1.0 - u) / 2.0).sqrt(), ((1.0 + u) / 2.0).sqrt()])
}

/// `|Ψ(u)⟩⟨Ψ(u)| ⊗ Tr₁(ρ_prev)`.
pub fn encode(u: f64, rho_prev: &DensityMatrix, n_sites: usize) -> Result<DensityMatrix> {
    let [a0, a1] = input_amplitudes(u)?;
    let sigma = partial_trace_first_qubit(rho_prev.matrix(), n_sites)?;
    let c = |x: f64| Complex64::new(x, 0.0);
    let p = CMatrix::from_row_slice(2, 2, &[c(a0 * a0), c(a0 * a1), c(a1 * a0), c(a1 * a1)]);
    Ok(DensityMatrix::from_matrix_unchecked(kron(&p, &sigma)))
}

/// One clock cycle in the computational basis. Returns the state at `T` and
/// the readout row ordered `j·K + k`.
pub fn step(
    rho_enc: &DensityMatrix,
    eig: &HermitianEigensystem,
    cfg: &ReservoirConfig,
) -> Result<(DensityMatrix, Vec<f64>)> {
    if rho_enc.dim() != eig.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs Hamiltonian dim {}",
            rho_enc.dim(),
            eig.dim()
        )));
    }
    let mut row = Vec::with_capacity(cfg.readout_dim());
    let mut last = rho_enc.matrix().clone();
    for t in cfg.sub_times() {
        let u = eig.unitary_at(t);
        last = &u * rho_enc.matrix() * u.adjoint();
        let rho_t = DensityMatrix::from_matrix_unchecked(last.clone());
        for o in &cfg.observables {
            row.push(rho_t.expectation(o.matrix()));
        }
    }
    Ok((DensityMatrix::from_matrix_unchecked(last), row))
}

/// Complex matrix as separate real and imaginary parts. A missing imaginary
/// part means the matrix is real.
#[derive(Debug, Clone)]
struct Split {
    re: DMatrix<f64>,
    im: Option<DMatrix<f64>>,
}

impl Split {
    fn from_complex(m: &CMatrix) -> Self {
        let im = m.map(|z| z.im);
        Self {
            re: m.map(|z| z.re),
            im: im.iter().any(|&x| x != 0.0).then_some(im),
        }
    }

    fn mul(&self, other: &Split) -> Split {
        let mut re = &self.re * &other.re;
        let im = match (&self.im, &other.im) {
            (None, None) => None,
            (Some(ai), None) => Some(ai * &other.re),
            (None, Some(bi)) => Some(&self.re * bi),
            (Some(ai), Some(bi)) => {
                re -= ai * bi;
                Some(&self.re * bi + ai * &other.re)
            }
        };
        Split { re, im }
    }

    fn adjoint(&self) -> Split {
        Split {
            re: self.re.transpose(),
            im: self.im.as_ref().map(|m| -m.transpose()),
        }
    }

    fn scaled_sum(a: &Split, x: f64, b: &Split, y: f64) -> Split {
        let im = match (&a.im, &b.im) {
            (None, None) => None,
            (Some(p), None) => Some(p * x),
            (None, Some(q)) => Some(q * y),
            (Some(p), Some(q)) => Some(p * x + q * y),
        };
        Split {
            re: &a.re * x + &b.re * y,
            im,
        }
    }
}

/// Precomputed eigenbasis machinery for one `(H, config)` pair.
#[derive(Debug, Clone)]
pub struct ReservoirEngine {
    n_sites: usize,
    dim: usize,
    v_top: Split,
    v_bot: Split,
    v_top_adj: Split,
    v_bot_adj: Split,
    /// `cos` and `sin` of `-(ε_a - ε_b)T`.
    cycle_phase: (DMatrix<f64>, DMatrix<f64>),
    /// Maps packed eigenbasis states to readout rows.
    readout: DMatrix<f64>,
    upper: Vec<(usize, usize)>,
    eigenbasis: Split,
}

const BATCH: usize = 128;

impl ReservoirEngine {
    pub fn new(h: &HermitianOperator, cfg: &ReservoirConfig) -> Result<Self> {
        let dim = 1usize << cfg.n_sites;
        if h.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian dim {} vs register dim {dim}",
                h.dim()
            )));
        }
        let eig = h.eigensystem()?;
        let v = Split::from_complex(eig.eigenvectors());
        let half = dim / 2;
        let rows = |s: &Split, start: usize| Split {
            re: s.re.rows(start, half).into_owned(),
            im: s.im.as_ref().map(|m| m.rows(start, half).into_owned()),
        };
        let v_top = rows(&v, 0);
        let v_bot = rows(&v, half);
        let ev = eig.eigenvalues();
        let t = cfg.clock_cycle;
        let cycle_phase = (
            DMatrix::from_fn(dim, dim, |a, b| (-(ev[a] - ev[b]) * t).cos()),
            DMatrix::from_fn(dim, dim, |a, b| (-(ev[a] - ev[b]) * t).sin()),
        );

        let upper: Vec<(usize, usize)> = (0..dim)
            .flat_map(|a| (a + 1..dim).map(move |b| (a, b)))
            .collect();
        let n_packed = dim + 2 * upper.len();
        let obs_eig: Vec<CMatrix> = cfg
            .observables
            .iter()
            .map(|o| eig.to_eigenbasis(o.matrix()))
            .collect();
        let k_obs = obs_eig.len();
        let mut readout = DMatrix::zeros(cfg.readout_dim(), n_packed);
        for (j, tj) in cfg.sub_times().into_iter().enumerate() {
            for (k, ot) in obs_eig.iter().enumerate() {
                let r = j * k_obs + k;
                for a in 0..dim {
                    readout[(r, a)] = ot[(a, a)].re;
                }
                for (p, &(a, b)) in upper.iter().enumerate() {
                    // C_ab = Õ_ba e^{-i(ε_a-ε_b)t}; the (b, a) term is its conjugate
                    let c = ot[(b, a)] * Complex64::from_polar(1.0, -(ev[a] - ev[b]) * tj);
                    readout[(r, dim + p)] = 2.0 * c.re;
                    readout[(r, dim + upper.len() + p)] = -2.0 * c.im;
                }
            }
        }
        Ok(Self {
            n_sites: cfg.n_sites,
            dim,
            v_top_adj: v_top.adjoint(),
            v_bot_adj: v_bot.adjoint(),
            v_top,
            v_bot,
            cycle_phase,
            readout,
            upper,
            eigenbasis: v,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn to_eigenbasis(&self, rho: &DensityMatrix) -> Split {
        let r = Split {
            re: rho.matrix().map(|z| z.re),
            im: Some(rho.matrix().map(|z| z.im)),
        };
        self.eigenbasis.adjoint().mul(&r).mul(&self.eigenbasis)
    }

    /// Encodes `u` into the eigenbasis state `rho`.
    fn encode_eigen(&self, u: f64, rho: &Split) -> Result<Split> {
        let [a0, a1] = input_amplitudes(u)?;
        let mut sigma = self.v_top.mul(rho).mul(&self.v_top_adj);
        let bot = self.v_bot.mul(rho).mul(&self.v_bot_adj);
        sigma.re += &bot.re;
        match (&mut sigma.im, bot.im) {
            (Some(s), Some(b)) => *s += b,
            (s @ None, Some(b)) => *s = Some(b),
            _ => {}
        }
        let a = Split::scaled_sum(&self.v_top_adj, a0, &self.v_bot_adj, a1);
        let mut out = a.mul(&sigma).mul(&a.adjoint());
        if out.im.is_none() {
            out.im = Some(DMatrix::zeros(self.dim, self.dim));
        }
        Ok(out)
    }

    fn pack(&self, rho: &Split, col: &mut [f64]) {
        let im = rho.im.as_ref().expect("eigenbasis state carries an imaginary part");
        let p = self.upper.len();
        for a in 0..self.dim {
            col[a] = rho.re[(a, a)];
        }
        for (i, &(a, b)) in self.upper.iter().enumerate() {
            col[self.dim + i] = rho.re[(a, b)];
            col[self.dim + p + i] = im[(a, b)];
        }
    }

    fn advance(&self, rho: &mut Split) {
        let im = rho.im.as_mut().expect("eigenbasis state carries an imaginary part");
        let (c, s) = &self.cycle_phase;
        for idx in 0..self.dim * self.dim {
            let (x, y) = (rho.re[idx], im[idx]);
            rho.re[idx] = x * c[idx] - y * s[idx];
            im[idx] = x * s[idx] + y * c[idx];
        }
    }

    /// Noise-free readout rows for the inputs at positions listed in `keep`
    /// (ascending, non-overlapping), starting from `initial`.
    pub fn raw_states(
        &self,
        inputs: &[f64],
        initial: &DensityMatrix,
        keep: &[Range<usize>],
    ) -> Result<DMatrix<f64>> {
        if initial.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "initial state dim {} vs register dim {}",
                initial.dim(),
                self.dim
            )));
        }
        let end = keep.iter().map(|r| r.end).max().unwrap_or(0);
        if end > inputs.len() {
            return Err(Error::SeriesTooShort {
                needed: end,
                got: inputs.len(),
            });
        }
        let n_rows: usize = keep.iter().map(|r| r.len()).sum();
        let n_r = self.readout.nrows();
        let n_packed = self.readout.ncols();
        let mut out = DMatrix::zeros(n_rows, n_r);
        let mut packed = DMatrix::zeros(n_packed, BATCH);
        let mut pending = 0usize;
        let mut next_row = 0usize;
        let mut rho = self.to_eigenbasis(initial);
        let mut seg = keep.iter().peekable();

        let flush = |packed: &DMatrix<f64>, count: usize, out: &mut DMatrix<f64>, first: usize| {
            let block = &self.readout * packed.columns(0, count);
            out.rows_mut(first, count).copy_from(&block.transpose());
        };

        for (n, &u) in inputs.iter().enumerate().take(end) {
            let enc = self.encode_eigen(u, &rho)?;
            while seg.peek().is_some_and(|r| r.end <= n) {
                seg.next();
            }
            if seg.peek().is_some_and(|r| r.contains(&n)) {
                self.pack(&enc, packed.column_mut(pending).as_mut_slice());
                pending += 1;
                if pending == BATCH {
                    flush(&packed, pending, &mut out, next_row);
                    next_row += pending;
                    pending = 0;
                }
            }
            rho = enc;
            self.advance(&mut rho);
        }
        if pending > 0 {
            flush(&packed, pending, &mut out, next_row);
        }
        Ok(out)
    }
}

/// Full run from the maximally mixed state. Init and buffer rows are dropped,
/// and `η·N(0,1)` noise seeded by `seed` is added to every kept entry.
pub fn run(
    h: &HermitianOperator,
    inputs: &[f64],
    cfg: &ReservoirConfig,
    splits: &SplitLengths,
    seed: u64,
) -> Result<StateMatrix> {
    splits.validate()?;
    if inputs.len() < splits.total() {
        return Err(Error::SeriesTooShort {
            needed: splits.total(),
            got: inputs.len(),
        });
    }
    let engine = ReservoirEngine::new(h, cfg)?;
    let keep = [splits.train_range(), splits.test_range()];
    let init = DensityMatrix::maximally_mixed(1 << cfg.n_sites);
    let mut data = engine.raw_states(inputs, &init, &keep)?;
    add_noise(&mut data, cfg.noise, seed);
    Ok(StateMatrix {
        data,
        input_indices: keep.iter().flat_map(|r| r.clone()).collect(),
        n_train: splits.n_train,
    })
}

/// Adds `η·N(0,1)` entrywise in row-major order.
pub fn add_noise(data: &mut DMatrix<f64>, eta: f64, seed: u64) {
    if eta == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in 0..data.nrows() {
        for c in 0..data.ncols() {
            let z: f64 = StandardNormal.sample(&mut rng);
            data[(r, c)] += eta * z;
        }
    }
}

/// Linear readout `y = [s, 1] · W`; the last row of `weights` is the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutWeights {
    pub weights: DMatrix<f64>,
}

impl ReadoutWeights {
    pub fn n_features(&self) -> usize {
        self.weights.nrows() - 1
    }

    pub fn bias(&self) -> DVector<f64> {
        self.weights.row(self.weights.nrows() - 1).transpose()
    }

    pub fn predict(&self, s: &DMatrix<f64>) -> DMatrix<f64> {
        let nf = self.n_features();
        let mut y = s * self.weights.rows(0, nf);
        for mut row in y.row_iter_mut() {
            row += self.weights.row(nf);
        }
        y
    }
}

enum Factor {
    Cholesky(Cholesky<f64, nalgebra::Dyn>),
    Pseudo(DMatrix<f64>),
}

/// Least-squares solver for `[S, 1] W ≈ Y`. It factors the column-scaled Gram
/// matrix once, so solving for many target sets costs one product each.
/// Near-singular Gram matrices use the minimum-norm pseudoinverse instead.
pub struct LeastSquares {
    design: DMatrix<f64>,
    col_scale: DVector<f64>,
    factor: Factor,
}

/// Cholesky pivots below this fraction of the largest pivot, squared, trigger
/// the pseudoinverse.
const RCOND_MIN: f64 = 1e-13;

impl LeastSquares {
    pub fn new(s: &DMatrix<f64>) -> Result<Self> {
        if s.nrows() == 0 {
            return Err(invalid("S", "empty training block"));
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::Degenerate("state matrix has non-finite entries".into()));
        }
        let n = s.nrows();
        let p = s.ncols() + 1;
        let mut design = DMatrix::from_element(n, p, 1.0);
        design.columns_mut(0, p - 1).copy_from(s);
        let col_scale = DVector::from_iterator(
            p,
            design.column_iter().map(|c| {
                let nrm = c.norm();
                if nrm > 0.0 {
                    1.0 / nrm
                } else {
                    1.0
                }
            }),
        );
        let mut gram = design.tr_mul(&design);
        for i in 0..p {
            for j in 0..p {
                gram[(i, j)] *= col_scale[i] * col_scale[j];
            }
        }
        let factor = match Cholesky::new(gram.clone()) {
            Some(ch) => {
                let d = ch.l_dirty().diagonal();
                let (lo, hi) = d
                    .iter()
                    .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
                if lo > 0.0 && (lo / hi).powi(2) > RCOND_MIN {
                    Factor::Cholesky(ch)
                } else {
                    Factor::Pseudo(pseudo_inverse(gram))
                }
            }
            None => Factor::Pseudo(pseudo_inverse(gram)),
        };
        Ok(Self {
            design,
            col_scale,
            factor,
        })
    }

    pub fn uses_pseudoinverse(&self) -> bool {
        matches!(self.factor, Factor::Pseudo(_))
    }

    pub fn solve(&self, targets: &DMatrix<f64>) -> Result<ReadoutWeights> {
        if targets.nrows() != self.design.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} target rows vs {} state rows",
                targets.nrows(),
                self.design.nrows()
            )));
        }
        let mut rhs = self.design.tr_mul(targets);
        for (i, mut row) in rhs.row_iter_mut().enumerate() {
            row *= self.col_scale[i];
        }
        let mut w = match &self.factor {
            Factor::Cholesky(ch) => ch.solve(&rhs),
            Factor::Pseudo(pinv) => pinv * rhs,
        };
        for (i, mut row) in w.row_iter_mut().enumerate() {
            row *= self.col_scale[i];
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::Degenerate("readout weights are not finite".into()));
        }
        Ok(ReadoutWeights { weights: w })
    }
}

fn pseudo_inverse(gram: DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(gram);
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let cut = lmax * RCOND_MIN;
    let inv = eig
        .eigenvalues
        .map(|l| if l > cut { 1.0 / l } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

/// Least-squares readout with a bias column.
pub fn train_readout(s_train: &DMatrix<f64>, targets: &DMatrix<f64>) -> Result<ReadoutWeights> {
    LeastSquares::new(s_train)?.solve(targets)
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n)
}

/// `√(mean((y - y_targ)²) / var(y_targ))`.
pub fn nrmse(y: &[f64], y_targ: &[f64]) -> Result<f64> {
    if y.len() != y_targ.len() || y.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions vs {} targets",
            y.len(),
            y_targ.len()
        )));
    }
    let (_, var) = mean_var(y_targ);
    if !(var > 0.0) {
        return Err(Error::Degenerate("target has zero variance".into()));
    }
    let mse = y.iter().zip(y_targ).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64;
    Ok((mse / var).sqrt())
}

/// Squared Pearson correlation `cov² / (var(y) var(y_targ))`.
pub fn capacity(y: &[f64], y_targ: &[f64]) -> Result<f64> {
    if y.len() != y_targ.len() || y.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions vs {} targets",
            y.len(),
            y_targ.len()
        )));
    }
    let (my, vy) = mean_var(y);
    let (mt, vt) = mean_var(y_targ);
    if !(vy > 0.0) || !(vt > 0.0) {
        return Err(Error::Degenerate("zero variance in capacity".into()));
    }
    let cov = y
        .iter()
        .zip(y_targ)
        .map(|(a, b)| (a - my) * (b - mt))
        .sum::<f64>()
        / y.len() as f64;
    Ok((cov * cov / (vy * vt)).clamp(0.0, 1.0))
}

/// `N_state = (7 + K)·N_u·V`.
pub fn count_state_ops(k: u64, n_u: u64, v: u64) -> u64 {
    (7 + k) * n_u * v
}
