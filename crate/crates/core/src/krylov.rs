//! Krylov-space measures of state and operator dynamics.
//!
//! State side: the Lanczos basis of `span{H^k ψ₀}`, spread complexity, the
//! return fidelity and the Krylov expressivity `E_K`. Operator side: operator
//! complexity `K_O` under the Liouvillian `L(O) = [H, O]`, the greedy
//! observability-space construction, and the Krylov observability `O_K`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantum::{
    fidelity_pure, frobenius_norm, CMatrix, CVector, HermitianEigensystem, HermitianOperator,
    PureState,
};
use crate::spectral::{group_by_gap, operator_grade};

/// Relative residual below which Lanczos stops.
pub const LANCZOS_TOL: f64 = 1e-8;

/// Relative projection residual above which Algorithm 1 accepts a new direction.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Upper limit on the Algorithm 1 time horizon.
pub const MAX_GRID_HORIZON: f64 = 1e3;

/// Number of Haar-random seed states averaged for state measures.
pub const DEFAULT_SEED_STATES: usize = 20;

/// Orthonormal Lanczos vectors `k₀ = ψ₀, k₁, …` with the recurrence coefficients.
#[derive(Debug, Clone)]
pub struct KrylovStateBasis {
    vectors: Vec<CVector>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl KrylovStateBasis {
    pub fn grade(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }
}

fn orthogonalize(v: &mut CVector, basis: &[CVector]) {
    for _ in 0..2 {
        for q in basis {
            let c = q.dotc(v);
            v.axpy(-c, q, Complex64::new(1.0, 0.0));
        }
    }
}

/// Lanczos with full reorthogonalization. Stops when the residual drops below
/// `tol · max(1, ‖H‖_F)`.
pub fn lanczos_state_basis(h: &HermitianOperator, psi0: &PureState, tol: f64) -> Result<KrylovStateBasis> {
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs Hamiltonian dim {}",
            psi0.dim(),
            h.dim()
        )));
    }
    let cutoff = tol * h.frobenius_norm().max(1.0);
    let m = h.matrix();
    let mut vectors = vec![psi0.amplitudes().clone()];
    let mut a = Vec::new();
    let mut b = Vec::new();
    while vectors.len() < h.dim() {
        let last = vectors.last().expect("nonempty");
        let mut r = m * last;
        a.push(last.dotc(&r).re);
        orthogonalize(&mut r, &vectors);
        let nrm = r.norm();
        if nrm < cutoff {
            break;
        }
        b.push(nrm);
        vectors.push(r.unscale(nrm));
    }
    Ok(KrylovStateBasis { vectors, a, b })
}

/// `α_n(t) = ⟨k_n|e^{-iHt}ψ₀⟩`.
pub fn spread_amplitudes(
    basis: &KrylovStateBasis,
    eig: &HermitianEigensystem,
    psi0: &PureState,
    t: f64,
) -> Vec<Complex64> {
    let psi_t = eig.evolve_state(psi0, t);
    basis.vectors.iter().map(|k| k.dotc(psi_t.amplitudes())).collect()
}

/// `K_S(t) = Σ (n+1)|α_n(t)|²`.
pub fn spread_complexity(
    basis: &KrylovStateBasis,
    eig: &HermitianEigensystem,
    psi0: &PureState,
    t: f64,
) -> f64 {
    spread_amplitudes(basis, eig, psi0, t)
        .iter()
        .enumerate()
        .map(|(n, a)| (n + 1) as f64 * a.norm_sqr())
        .sum()
}

/// `|⟨ψ₀|e^{-iHt}|ψ₀⟩|`.
pub fn autocorrelation_fidelity(eig: &HermitianEigensystem, psi0: &PureState, t: f64) -> f64 {
    let c = eig.coefficients(psi0.amplitudes());
    let s: Complex64 = c
        .iter()
        .zip(eig.eigenvalues())
        .map(|(cj, &e)| Complex64::from_polar(cj.norm_sqr(), -e * t))
        .sum();
    s.norm().min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpressivityParams {
    /// Fidelity `λ` above which two states count as partially redundant.
    pub threshold: f64,
    /// Krylov grade `m`, the number of sampled states.
    pub grade: usize,
}

impl ExpressivityParams {
    pub fn new(grade: usize) -> Self {
        Self {
            threshold: FRAC_1_SQRT_2,
            grade,
        }
    }
}

/// `1 + Σ_i m_i`. Each `m_i` is 1 when `λ_i < λ`, and `1 - (λ_i - λ)/(1 - λ)` otherwise.
pub fn effective_dimension(fidelities: &[f64], threshold: f64) -> f64 {
    1.0 + fidelities
        .iter()
        .map(|&f| {
            if f < threshold {
                1.0
            } else if threshold >= 1.0 {
                0.0
            } else {
                (1.0 - (f - threshold) / (1.0 - threshold)).clamp(0.0, 1.0)
            }
        })
        .sum::<f64>()
}

/// Krylov expressivity over the horizon `T`. It samples `m` states at
/// `(i+1)T/m` and applies [`effective_dimension`] to consecutive fidelities.
pub fn krylov_expressivity(
    eig: &HermitianEigensystem,
    psi0: &PureState,
    horizon: f64,
    params: &ExpressivityParams,
) -> Result<f64> {
    let m = params.grade;
    if m < 1 {
        return Err(invalid("grade", "must be at least 1"));
    }
    if !(0.0..=1.0).contains(&params.threshold) {
        return Err(invalid("threshold", "must lie in [0, 1]"));
    }
    let states: Vec<PureState> = (0..m)
        .map(|i| eig.evolve_state(psi0, (i + 1) as f64 * horizon / m as f64))
        .collect();
    let fid: Vec<f64> = states.windows(2).map(|w| fidelity_pure(&w[0], &w[1])).collect();
    Ok(effective_dimension(&fid, params.threshold))
}

/// `L(O) = HO - OH`.
pub fn liouvillian_apply(h: &CMatrix, o: &CMatrix) -> CMatrix {
    h * o - o * h
}

/// Operator Krylov basis in the frequency coordinates of the transition spectrum.
///
/// `L` is diagonal on the components `σ_P/‖σ_P‖`, with eigenvalues `ω_P`, so
/// Lanczos runs on `diag(ω)` starting from `c_P = ‖σ_P‖/‖O‖`. The result is the
/// same Krylov space as `{L^k(O)}` in the full operator space.
#[derive(Debug, Clone)]
pub struct OperatorKrylov {
    omegas: Vec<f64>,
    weights: Vec<f64>,
    /// Row `n` holds `W_n` in component coordinates.
    q: DMatrix<Complex64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl OperatorKrylov {
    /// Builds the basis for `O` with eigenvalue tolerance `tol`.
    pub fn new(eig: &HermitianEigensystem, o: &CMatrix, tol: f64) -> Result<Self> {
        let ts = operator_grade(eig, o, tol)?;
        let comps: Vec<_> = ts.nonvanishing().collect();
        let omegas: Vec<f64> = comps.iter().map(|c| c.omega).collect();
        let weights: Vec<f64> = comps.iter().map(|c| c.norm / ts.operator_norm).collect();
        let m = omegas.len();
        let scale = omegas.iter().fold(1.0f64, |acc, w| acc.max(w.abs()));
        let w0n = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        let mut rows: Vec<CVector> =
            vec![CVector::from_iterator(m, weights.iter().map(|&w| Complex64::new(w / w0n, 0.0)))];
        let (mut a, mut b) = (Vec::new(), Vec::new());
        while rows.len() < m {
            let last = rows.last().expect("nonempty");
            let mut r = CVector::from_iterator(m, last.iter().zip(&omegas).map(|(x, w)| x * *w));
            a.push(last.dotc(&r).re);
            orthogonalize(&mut r, &rows);
            let nrm = r.norm();
            if nrm < 1e-14 * scale {
                break;
            }
            b.push(nrm);
            rows.push(r.unscale(nrm));
        }
        let q = DMatrix::from_fn(rows.len(), m, |n, p| rows[n][p]);
        Ok(Self {
            omegas,
            weights,
            q,
            a,
            b,
        })
    }

    /// Number of Krylov vectors, equal to the operator grade `M`.
    pub fn grade(&self) -> usize {
        self.q.nrows()
    }

    /// `β_n(t) = (W_n, O(t)) / ‖O‖`.
    pub fn amplitudes(&self, t: f64) -> Vec<Complex64> {
        let x: Vec<Complex64> = self
            .omegas
            .iter()
            .zip(&self.weights)
            .map(|(&w, &c)| Complex64::from_polar(c, w * t))
            .collect();
        (0..self.q.nrows())
            .map(|n| (0..x.len()).map(|p| self.q[(n, p)].conj() * x[p]).sum())
            .collect()
    }

    /// `K_O(t) = Σ (n+1)|β_n(t)|²`.
    pub fn complexity(&self, t: f64) -> f64 {
        self.amplitudes(t)
            .iter()
            .enumerate()
            .map(|(n, b)| (n + 1) as f64 * b.norm_sqr())
            .sum()
    }
}

/// Operator complexity of `O` at time `t`.
pub fn operator_complexity(eig: &HermitianEigensystem, o: &CMatrix, t: f64) -> Result<f64> {
    Ok(OperatorKrylov::new(eig, o, eig.degeneracy_tolerance())?.complexity(t))
}

/// Orthonormal operator basis found by the greedy sweep, with each element
/// tagged by the observable that contributed it.
#[derive(Debug, Clone)]
pub struct OperatorBasisSet {
    pub basis: Vec<CMatrix>,
    pub owner: Vec<usize>,
    pub per_observable_dims: Vec<usize>,
}

impl OperatorBasisSet {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Greedy sweep, times outer and observables inner. `O_k(t_j)` is added when
/// its relative residual after projecting out the current basis exceeds `tol`.
pub fn build_observability_spaces(
    eig: &HermitianEigensystem,
    observables: &[CMatrix],
    times: &[f64],
    tol: f64,
) -> Result<OperatorBasisSet> {
    let n = eig.dim();
    let (basis, owner, dims) = greedy_sweep(eig, observables, times, tol, usize::MAX)?;
    let basis = basis
        .into_iter()
        .map(|v| eig.from_eigenbasis(&CMatrix::from_column_slice(n, n, v.as_slice())))
        .collect();
    Ok(OperatorBasisSet {
        basis,
        owner,
        per_observable_dims: dims,
    })
}

/// Per-observable dimensions of the greedy sweep over the seeded grid of
/// [`observability_time_grid`]. The sweep stops early once every observable
/// owns at least `cap` elements.
pub fn observability_dims(
    eig: &HermitianEigensystem,
    observables: &[CMatrix],
    seed: u64,
    cap: usize,
) -> Result<Vec<usize>> {
    let times = observability_time_grid(eig, observables, seed)?;
    greedy_sweep(eig, observables, &times, MEMBERSHIP_TOL, cap).map(|(_, _, dims)| dims)
}

type Sweep = (Vec<CVector>, Vec<usize>, Vec<usize>);

fn greedy_sweep(eig: &HermitianEigensystem, observables: &[CMatrix], times: &[f64], tol: f64, cap: usize) -> Result<Sweep> {
    if observables.is_empty() || times.is_empty() {
        return Err(invalid("observables", "need at least one observable and one time"));
    }
    let n = eig.dim();
    let obs_eig: Vec<CMatrix> = observables
        .iter()
        .map(|o| {
            if o.shape() != (n, n) {
                Err(Error::DimensionMismatch(format!("observable {:?} vs dim {n}", o.shape())))
            } else {
                Ok(eig.to_eigenbasis(o))
            }
        })
        .collect::<Result<_>>()?;
    let mut basis: Vec<CVector> = Vec::new();
    let mut owner = Vec::new();
    let mut dims = vec![0; observables.len()];
    for &t in times {
        if dims.iter().all(|&m| m >= cap) {
            break;
        }
        for (k, ot) in obs_eig.iter().enumerate() {
            let mut m = ot.clone();
            eig.phase_eigenbasis_operator(&mut m, t);
            let mut v = CVector::from_column_slice(m.as_slice());
            let nrm = v.norm();
            if nrm == 0.0 {
                continue;
            }
            v.unscale_mut(nrm);
            orthogonalize(&mut v, &basis);
            let res = v.norm();
            if res > tol {
                basis.push(v.unscale(res));
                owner.push(k);
                dims[k] += 1;
            }
        }
    }
    Ok((basis, owner, dims))
}

/// Seeded random sample times for [`build_observability_spaces`]. It draws
/// `2·max_k M_k` times uniformly on `(0, T_grid]`, where `T_grid = 2π/Δω_min`
/// capped at [`MAX_GRID_HORIZON`]. `Δω_min` is the smallest gap between
/// distinct nonvanishing frequencies.
pub fn observability_time_grid(
    eig: &HermitianEigensystem,
    observables: &[CMatrix],
    seed: u64,
) -> Result<Vec<f64>> {
    let tol = eig.degeneracy_tolerance();
    let mut freqs = Vec::new();
    let mut m_max = 1;
    for o in observables {
        let ts = operator_grade(eig, o, tol)?;
        m_max = m_max.max(ts.grade);
        freqs.extend(ts.nonvanishing().map(|c| c.omega));
    }
    freqs.sort_by(f64::total_cmp);
    let groups = group_by_gap(&freqs, 2.0 * tol);
    let centers: Vec<f64> = groups.iter().map(|r| freqs[r.start]).collect();
    let min_gap = centers
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let horizon = if min_gap.is_finite() && min_gap > 0.0 {
        (2.0 * PI / min_gap).min(MAX_GRID_HORIZON)
    } else {
        2.0 * PI
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times: Vec<f64> = (0..2 * m_max)
        .map(|_| horizon * (1.0 - rng.gen::<f64>()))
        .collect();
    times.sort_by(f64::total_cmp);
    Ok(times)
}

/// Sub-sampling step used inside `κ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TimeSpacing {
    /// `τ_j = j·T/V`, the reservoir's measurement times.
    #[default]
    VirtualNodes,
    /// `τ_j = j·T/M_k`.
    Grade,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservabilityResult {
    pub kappas: Vec<f64>,
    pub total: f64,
}

/// Precomputed data for evaluating `O_K(T, V)` on many grid points.
#[derive(Debug, Clone)]
pub struct KrylovObservability {
    weights: Vec<Vec<(f64, f64)>>,
    grades: Vec<usize>,
    spacing: TimeSpacing,
}

impl KrylovObservability {
    /// `dims` are the per-observable grades `M_k`.
    pub fn new(
        eig: &HermitianEigensystem,
        observables: &[CMatrix],
        dims: Vec<usize>,
        spacing: TimeSpacing,
    ) -> Result<Self> {
        if observables.is_empty() || dims.len() != observables.len() {
            return Err(invalid("dims", "one grade per observable is required"));
        }
        let ev = eig.eigenvalues();
        let weights = observables
            .iter()
            .map(|o| {
                let norm2 = frobenius_norm(o).powi(2);
                if norm2 == 0.0 {
                    return Err(Error::ZeroNorm);
                }
                let ot = eig.to_eigenbasis(o);
                let mut w = Vec::with_capacity(ot.len());
                for b in 0..ot.ncols() {
                    for a in 0..ot.nrows() {
                        let x = ot[(a, b)].norm_sqr() / norm2;
                        if x > 0.0 {
                            w.push((ev[a] - ev[b], x));
                        }
                    }
                }
                Ok(w)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            weights,
            grades: dims,
            spacing,
        })
    }

    /// Grades from the closed-form transition spectrum.
    pub fn from_spectrum(
        eig: &HermitianEigensystem,
        observables: &[CMatrix],
        spacing: TimeSpacing,
    ) -> Result<Self> {
        let tol = eig.degeneracy_tolerance();
        let dims = observables
            .iter()
            .map(|o| operator_grade(eig, o, tol).map(|t| t.grade))
            .collect::<Result<Vec<_>>>()?;
        Self::new(eig, observables, dims, spacing)
    }

    /// Grades `dim(F̃_k)` from the greedy sweep, so directions shared between
    /// observables are counted once. With [`TimeSpacing::VirtualNodes`] the
    /// sweep stops once every grade reaches `max_virtual_nodes`, which leaves
    /// `R_k = min(V, M_k)` unchanged for every `V ≤ max_virtual_nodes`.
    pub fn from_observability_spaces(
        eig: &HermitianEigensystem,
        observables: &[CMatrix],
        spacing: TimeSpacing,
        max_virtual_nodes: usize,
        seed: u64,
    ) -> Result<Self> {
        let cap = match spacing {
            TimeSpacing::VirtualNodes => max_virtual_nodes.max(1),
            TimeSpacing::Grade => usize::MAX,
        };
        let dims = observability_dims(eig, observables, seed, cap)?;
        Self::new(eig, observables, dims, spacing)
    }

    pub fn grades(&self) -> &[usize] {
        &self.grades
    }

    /// `F(O(τ), O(τ + Δ))`, which by unitarity depends only on `Δ`.
    fn overlap(&self, k: usize, delta: f64) -> f64 {
        let s: Complex64 = self.weights[k]
            .iter()
            .map(|&(w, x)| Complex64::from_polar(x, w * delta))
            .sum();
        s.norm().min(1.0)
    }

    /// `κ_k = 1 + Σ_{j=1}^{R_k-1} (1 - F(O_k(τ_j), O_k(τ_{j+1})))` with
    /// `R_k = min(V, M_k)`, and `O_K = Σ κ_k`.
    pub fn evaluate(&self, horizon: f64, virtual_nodes: usize) -> Result<ObservabilityResult> {
        if !(horizon > 0.0) {
            return Err(invalid("horizon", "must be positive"));
        }
        if virtual_nodes == 0 {
            return Err(invalid("virtual_nodes", "must be at least 1"));
        }
        let kappas: Vec<f64> = self
            .grades
            .iter()
            .enumerate()
            .map(|(k, &m_k)| {
                let r = virtual_nodes.min(m_k.max(1));
                let delta = match self.spacing {
                    TimeSpacing::VirtualNodes => horizon / virtual_nodes as f64,
                    TimeSpacing::Grade => horizon / m_k.max(1) as f64,
                };
                let f = self.overlap(k, delta);
                1.0 + (r - 1) as f64 * (1.0 - f)
            })
            .collect();
        Ok(ObservabilityResult {
            total: kappas.iter().sum(),
            kappas,
        })
    }
}

/// `O_K` with greedy-sweep grades and the default spacing.
pub fn krylov_observability(
    eig: &HermitianEigensystem,
    observables: &[CMatrix],
    horizon: f64,
    virtual_nodes: usize,
) -> Result<ObservabilityResult> {
    KrylovObservability::from_observability_spaces(eig, observables, TimeSpacing::default(), virtual_nodes, 0)?
        .evaluate(horizon, virtual_nodes)
}

/// `N_obs = VK(VK + 3)/2`.
pub fn count_obs_ops(v: u64, k: u64) -> u64 {
    let n = v * k;
    n * (n + 3) / 2
}

/// `r = N_obs / N_state`.
pub fn ops_ratio(v: u64, k: u64, n_u: u64) -> f64 {
    count_obs_ops(v, k) as f64 / crate::reservoir::count_state_ops(k, n_u, v) as f64
}

/// `count` Haar-random states drawn from one seeded stream.
pub fn haar_seed_states(dim: usize, count: usize, seed: u64) -> Vec<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| PureState::haar_random(dim, &mut rng)).collect()
}
