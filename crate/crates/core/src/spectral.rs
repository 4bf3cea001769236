//! Closed-form Krylov grades.
//!
//! The state grade is `m = d - n₁`: `d` is the number of distinct energies and
//! `n₁` the number of energy classes that the seed state does not populate. The
//! operator grade is `M = N_ω - N₁`: `N_ω` counts distinct transition
//! frequencies and `N₁` the frequency components `σ_P` of the operator that vanish.
//!
//! Two brute-force oracles validate both results. Each takes the numerical
//! rank of a Chebyshev polynomial basis of the Krylov space. It uses only the
//! Hamiltonian matrix and never the eigensystem.

use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::{
    frobenius_norm, CMatrix, CVector, HermitianEigensystem, HermitianOperator, PureState,
};

/// `σ_P` counts as vanishing when `‖σ_P‖_F ≤ SIGMA_VANISHING_REL · ‖O‖_F`.
pub const SIGMA_VANISHING_REL: f64 = 1e-9;

/// Singular values below `ORACLE_REL_TOL · σ_max` are treated as zero.
pub const ORACLE_REL_TOL: f64 = 1e-8;

/// Split an ascending sequence wherever consecutive entries differ by more than `tol`.
pub fn group_by_gap(sorted: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    if sorted.is_empty() {
        return out;
    }
    let mut start = 0;
    for i in 1..sorted.len() {
        if sorted[i] - sorted[i - 1] > tol {
            out.push(start..i);
            start = i;
        }
    }
    out.push(start..sorted.len());
    out
}

/// Eigenvalue classes: index ranges into the ascending spectrum and their mean energies.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyClasses {
    pub ranges: Vec<Range<usize>>,
    pub energies: Vec<f64>,
}

impl EnergyClasses {
    pub fn new(eig: &HermitianEigensystem, tol: f64) -> Self {
        let ev = eig.eigenvalues();
        let ranges = group_by_gap(ev, tol);
        let energies = ranges
            .iter()
            .map(|r| ev[r.clone()].iter().sum::<f64>() / r.len() as f64)
            .collect();
        Self { ranges, energies }
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// Class index of every eigenvalue.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = vec![0; self.ranges.last().map_or(0, |r| r.end)];
        for (p, r) in self.ranges.iter().enumerate() {
            for i in r.clone() {
                out[i] = p;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateGrade {
    /// Number of distinct eigenvalues.
    pub d: usize,
    /// `γ_p = ⟨ξ_p|ψ₀⟩ = ‖Π_p ψ₀‖² / √|J_p|`, one per energy class.
    pub gamma: Vec<Complex64>,
    /// Count of classes with `|γ_p| ≤ tol`.
    pub n_vanishing: usize,
    /// `m = d - n₁`.
    pub m: usize,
}

/// Krylov grade of `ψ₀` under the Hamiltonian with eigensystem `eig`.
/// `tol` both groups the eigenvalues and decides when `|γ_p|` vanishes.
pub fn state_grade(eig: &HermitianEigensystem, psi0: &PureState, tol: f64) -> Result<StateGrade> {
    if psi0.dim() != eig.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs Hamiltonian dim {}",
            psi0.dim(),
            eig.dim()
        )));
    }
    let classes = EnergyClasses::new(eig, tol);
    let alpha = eig.coefficients(psi0.amplitudes());
    let gamma: Vec<Complex64> = classes
        .ranges
        .iter()
        .map(|r| {
            let w: f64 = r.clone().map(|j| alpha[j].norm_sqr()).sum();
            Complex64::new(w / (r.len() as f64).sqrt(), 0.0)
        })
        .collect();
    let n_vanishing = gamma.iter().filter(|g| g.norm() <= tol).count();
    let d = classes.len();
    Ok(StateGrade {
        d,
        gamma,
        n_vanishing,
        m: d - n_vanishing,
    })
}

/// One distinct transition frequency and the class pairs `(p, q)` with
/// `E_p - E_q ≈ ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyComponent {
    pub omega: f64,
    pub class_pairs: Vec<(usize, usize)>,
    /// `‖σ_P‖_F`.
    pub norm: f64,
}

/// Decomposition `O(t) = Σ_P e^{iω_P t} σ_P` of a Heisenberg-picture operator.
#[derive(Debug, Clone)]
pub struct TransitionSpectrum {
    pub classes: EnergyClasses,
    /// Ascending in `omega`.
    pub components: Vec<FrequencyComponent>,
    /// `N₁`.
    pub n_vanishing: usize,
    /// `M = N_ω - N₁`.
    pub grade: usize,
    pub operator_norm: f64,
    /// `V† O V`.
    pub operator_eigenbasis: CMatrix,
}

impl TransitionSpectrum {
    pub fn d(&self) -> usize {
        self.classes.len()
    }

    /// `N_ω`.
    pub fn n_omega(&self) -> usize {
        self.components.len()
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.omega).collect()
    }

    pub fn vanishing_threshold(&self) -> f64 {
        SIGMA_VANISHING_REL * self.operator_norm
    }

    /// Components with `σ_P ≠ 0`.
    pub fn nonvanishing(&self) -> impl Iterator<Item = &FrequencyComponent> {
        let thr = self.vanishing_threshold();
        self.components.iter().filter(move |c| c.norm > thr)
    }

    /// `σ_P` in the eigenbasis of H.
    pub fn sigma_eigenbasis(&self, index: usize) -> CMatrix {
        let labels = self.classes.labels();
        let comp = &self.components[index];
        let n = labels.len();
        CMatrix::from_fn(n, n, |a, b| {
            if comp.class_pairs.contains(&(labels[a], labels[b])) {
                self.operator_eigenbasis[(a, b)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `σ_P` in the computational basis.
    pub fn sigma(&self, eig: &HermitianEigensystem, index: usize) -> CMatrix {
        eig.from_eigenbasis(&self.sigma_eigenbasis(index))
    }

    /// `Σ_P e^{iω_P t} σ_P` in the computational basis.
    pub fn reconstruct(&self, eig: &HermitianEigensystem, t: f64) -> CMatrix {
        let labels = self.classes.labels();
        let n = labels.len();
        let mut phase = DMatrix::from_element(self.d(), self.d(), Complex64::new(0.0, 0.0));
        for comp in &self.components {
            let ph = Complex64::from_polar(1.0, comp.omega * t);
            for &(p, q) in &comp.class_pairs {
                phase[(p, q)] = ph;
            }
        }
        let m = CMatrix::from_fn(n, n, |a, b| {
            self.operator_eigenbasis[(a, b)] * phase[(labels[a], labels[b])]
        });
        eig.from_eigenbasis(&m)
    }
}

/// Transition spectrum of `O` under the Hamiltonian with eigensystem `eig`.
/// Eigenvalues are grouped at `tol`, frequencies at `2·tol`.
pub fn operator_grade(
    eig: &HermitianEigensystem,
    o: &CMatrix,
    tol: f64,
) -> Result<TransitionSpectrum> {
    let n = eig.dim();
    if o.nrows() != n || o.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{} vs Hamiltonian dim {n}",
            o.nrows(),
            o.ncols()
        )));
    }
    let operator_norm = frobenius_norm(o);
    if operator_norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let classes = EnergyClasses::new(eig, tol);
    let d = classes.len();
    let labels = classes.labels();
    let ot = eig.to_eigenbasis(o);

    let mut block = vec![0.0f64; d * d];
    for b in 0..n {
        for a in 0..n {
            block[labels[a] * d + labels[b]] += ot[(a, b)].norm_sqr();
        }
    }

    let mut pairs: Vec<(f64, usize, usize)> = (0..d)
        .flat_map(|p| (0..d).map(move |q| (p, q)))
        .map(|(p, q)| (classes.energies[p] - classes.energies[q], p, q))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let freqs: Vec<f64> = pairs.iter().map(|x| x.0).collect();

    let components: Vec<FrequencyComponent> = group_by_gap(&freqs, 2.0 * tol)
        .into_iter()
        .map(|r| {
            let members = &pairs[r.clone()];
            let omega = members.iter().map(|x| x.0).sum::<f64>() / members.len() as f64;
            let norm = members
                .iter()
                .map(|&(_, p, q)| block[p * d + q])
                .sum::<f64>()
                .sqrt();
            FrequencyComponent {
                omega,
                class_pairs: members.iter().map(|&(_, p, q)| (p, q)).collect(),
                norm,
            }
        })
        .collect();

    let thr = SIGMA_VANISHING_REL * operator_norm;
    let n_vanishing = components.iter().filter(|c| c.norm <= thr).count();
    let grade = components.len() - n_vanishing;
    Ok(TransitionSpectrum {
        classes,
        components,
        n_vanishing,
        grade,
        operator_norm,
        operator_eigenbasis: ot,
    })
}

/// Numerical rank of the column set: singular values above `rel_tol · σ_max`.
/// Columns are taken as given, so noise-level columns stay negligible.
pub fn numerical_rank(columns: &[CVector], rel_tol: f64) -> usize {
    if columns.is_empty() || columns.iter().any(|c| !c.norm().is_finite()) {
        return 0;
    }
    let m = CMatrix::from_columns(columns);
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Grows a Chebyshev basis `T_k(A/ρ) v` in blocks of `block` vectors. It stops
/// once a whole extra block leaves the rank unchanged, or the rank reaches `full`.
fn chebyshev_rank<F>(v0: CVector, apply: F, block: usize, full: usize, rel_tol: f64) -> usize
where
    F: Fn(&CVector) -> CVector,
{
    const MAX_BLOCKS: usize = 8;
    if v0.norm() == 0.0 {
        return 0;
    }
    let mut cols = vec![v0.clone()];
    let mut prev = v0;
    let mut cur = apply(&cols[0]);
    cols.push(cur.clone());
    let mut last_rank = None;
    for b in 1..=MAX_BLOCKS {
        while cols.len() < b * block {
            let next = apply(&cur) * Complex64::new(2.0, 0.0) - &prev;
            prev = std::mem::replace(&mut cur, next);
            cols.push(cur.clone());
        }
        let rank = numerical_rank(&cols[..b * block], rel_tol);
        if rank >= full || last_rank == Some(rank) {
            return rank;
        }
        last_rank = Some(rank);
    }
    last_rank.unwrap_or(0)
}

fn gershgorin_radius(h: &CMatrix) -> f64 {
    h.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Dimension of `span{H^k ψ₀}` by singular-value rank.
pub fn krylov_rank_oracle_state(h: &HermitianOperator, psi0: &PureState, rel_tol: f64) -> usize {
    let m = h.matrix();
    let dim = m.nrows();
    let rho = gershgorin_radius(m);
    if rho == 0.0 {
        return 1;
    }
    let scaled = m.unscale(rho);
    chebyshev_rank(
        psi0.amplitudes().clone(),
        |v| &scaled * v,
        dim.max(2),
        dim,
        rel_tol,
    )
}

/// Dimension of `span{L^k(O)}` with `L(O) = [H, O]`, by singular-value rank.
pub fn krylov_rank_oracle_operator(h: &HermitianOperator, o: &CMatrix, rel_tol: f64) -> usize {
    let m = h.matrix();
    let dim = m.nrows();
    let rho = 2.0 * gershgorin_radius(m);
    if rho == 0.0 {
        return usize::from(frobenius_norm(o) > 0.0);
    }
    let scaled = m.unscale(rho);
    let apply = |v: &CVector| {
        let x = CMatrix::from_column_slice(dim, dim, v.as_slice());
        let lx = &scaled * &x - &x * &scaled;
        CVector::from_column_slice(lx.as_slice())
    };
    chebyshev_rank(
        CVector::from_column_slice(o.as_slice()),
        apply,
        (dim * dim).max(2),
        dim * dim,
        rel_tol,
    )
}

/// Dimension of `span{O(t_j)}` over the given times.
pub fn evolved_operator_rank(
    eig: &HermitianEigensystem,
    o: &CMatrix,
    times: &[f64],
    rel_tol: f64,
) -> usize {
    let cols: Vec<CVector> = times
        .iter()
        .map(|&t| CVector::from_column_slice(eig.evolve_operator(o, t).as_slice()))
        .collect();
    numerical_rank(&cols, rel_tol)
}
