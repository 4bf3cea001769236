//! Dense complex linear algebra for small qubit registers.
//!
//! Site `1` is the most significant tensor factor, so `pauli_embed(1, Z, 2)` is
//! `Z ⊗ I = diag(1, 1, -1, -1)`. Time evolution is always carried out through a
//! cached spectral decomposition of the generator.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance used to accept a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative factor in the eigenvalue degeneracy tolerance `1e-9 · max(1, ‖H‖_F)`.
pub const DEGENERACY_REL: f64 = 1e-9;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);

/// Single-qubit Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// The 2×2 Pauli matrix for `axis`.
pub fn pauli(axis: Axis) -> CMatrix {
    match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[C0, C1, C1, C0]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[C0, -CI, CI, C0]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[C1, C0, C0, -C1]),
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Pauli operator acting on `site` (1-based) of an `n_sites` register.
pub fn pauli_embed(site: usize, axis: Axis, n_sites: usize) -> Result<CMatrix> {
    if n_sites == 0 || site == 0 || site > n_sites {
        return Err(invalid(
            "site",
            format!("site {site} out of range 1..={n_sites}"),
        ));
    }
    let id = CMatrix::identity(2, 2);
    let p = pauli(axis);
    let mut out = CMatrix::identity(1, 1);
    for s in 1..=n_sites {
        out = kron(&out, if s == site { &p } else { &id });
    }
    Ok(out)
}

/// `Tr(A† B)`.
pub fn frobenius_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise deviation `|A - A†|`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `AB - BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Normalized overlap `|Tr(A†B)| / (‖A‖_F ‖B‖_F)`.
pub fn operator_overlap(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let na = frobenius_norm(a);
    let nb = frobenius_norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((frobenius_inner(a, b).norm() / (na * nb)).min(1.0))
}

/// `|⟨a|b⟩|` for pure states.
pub fn fidelity_pure(a: &PureState, b: &PureState) -> f64 {
    a.0.dotc(&b.0).norm().min(1.0)
}

/// Partial trace over the most significant qubit of any square matrix of even
/// dimension. Linear, so it also accepts non-positive Hermitian inputs.
pub fn partial_trace_first_qubit(m: &CMatrix, n_sites: usize) -> Result<CMatrix> {
    if n_sites < 2 {
        return Err(invalid("n_sites", "partial trace needs at least two sites"));
    }
    let dim = 1usize << n_sites;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, register needs {dim}",
            m.nrows(),
            m.ncols()
        )));
    }
    let h = dim / 2;
    Ok(CMatrix::from_fn(h, h, |i, j| m[(i, j)] + m[(i + h, j + h)]))
}

/// Eigen-decomposition `H = V diag(ε) V†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigensystem {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    real_eigenvectors: Option<DMatrix<f64>>,
}

/// Diagonalize a Hermitian matrix. Real symmetric input is routed through the
/// real solver, which yields real eigenvectors.
pub fn hermitian_eig(h: &CMatrix) -> Result<HermitianEigensystem> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} is not square",
            h.nrows(),
            h.ncols()
        )));
    }
    let scale = h.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let defect = hermiticity_defect(h);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }
    let n = h.nrows();
    let max_iter = 1000 * n.max(1);
    if h.iter().all(|z| z.im == 0.0) {
        let re = h.map(|z| z.re);
        let sym = (&re + re.transpose()) * 0.5;
        let eig = SymmetricEigen::try_new(sym, f64::EPSILON, max_iter).ok_or(Error::EigenFailed)?;
        let order = ascending_order(eig.eigenvalues.as_slice());
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(HermitianEigensystem {
            eigenvalues: values,
            eigenvectors: vecs.map(|x| Complex64::new(x, 0.0)),
            real_eigenvectors: Some(vecs),
        })
    } else {
        let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::try_new(sym, f64::EPSILON, max_iter).ok_or(Error::EigenFailed)?;
        let order = ascending_order(eig.eigenvalues.as_slice());
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(HermitianEigensystem {
            eigenvalues: values,
            eigenvectors: vecs,
            real_eigenvectors: None,
        })
    }
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

impl HermitianEigensystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary whose columns are the eigenvectors.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// `1e-9 · max(1, ‖H‖_F)`, with the norm taken from the spectrum.
    pub fn degeneracy_tolerance(&self) -> f64 {
        let fro = self.eigenvalues.iter().map(|e| e * e).sum::<f64>().sqrt();
        DEGENERACY_REL * fro.max(1.0)
    }

    /// Real eigenvectors when the generator was real symmetric.
    pub fn real_eigenvectors(&self) -> Option<&DMatrix<f64>> {
        self.real_eigenvectors.as_ref()
    }

    /// `e^{-iHt}`.
    pub fn unitary_at(&self, t: f64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut vd = v.clone();
        for (c, &e) in self.eigenvalues.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, -e * t);
            for r in 0..vd.nrows() {
                vd[(r, c)] *= ph;
            }
        }
        vd * v.adjoint()
    }

    /// `V† M V`.
    pub fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * m * &self.eigenvectors
    }

    /// `V M̃ V†`.
    pub fn from_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        &self.eigenvectors * m * self.eigenvectors.adjoint()
    }

    /// Amplitudes `⟨φ_j|ψ⟩` in the eigenbasis.
    pub fn coefficients(&self, psi: &CVector) -> CVector {
        self.eigenvectors.adjoint() * psi
    }

    /// `e^{-iHt}|ψ⟩`.
    pub fn evolve_state(&self, psi: &PureState, t: f64) -> PureState {
        let mut c = self.coefficients(psi.amplitudes());
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            c[j] *= Complex64::from_polar(1.0, -e * t);
        }
        PureState(&self.eigenvectors * c)
    }

    /// Heisenberg picture `e^{iHt} O e^{-iHt}`.
    pub fn evolve_operator(&self, o: &CMatrix, t: f64) -> CMatrix {
        let mut m = self.to_eigenbasis(o);
        self.phase_eigenbasis_operator(&mut m, t);
        self.from_eigenbasis(&m)
    }

    /// Multiply an eigenbasis operator entrywise by `e^{i(ε_a - ε_b)t}`.
    pub fn phase_eigenbasis_operator(&self, m: &mut CMatrix, t: f64) {
        let e = &self.eigenvalues;
        for b in 0..m.ncols() {
            for a in 0..m.nrows() {
                m[(a, b)] *= Complex64::from_polar(1.0, (e[a] - e[b]) * t);
            }
        }
    }
}

/// Dense Hermitian matrix with a lazily computed, cached eigensystem.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: CMatrix,
    eig: OnceLock<HermitianEigensystem>,
}

impl HermitianOperator {
    /// Validates Hermiticity within [`HERMITIAN_TOL`] and stores the exactly
    /// symmetrized matrix.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} is not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(defect));
        }
        let sym = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(Self {
            matrix: sym,
            eig: OnceLock::new(),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(&self.matrix)
    }

    /// Eigenvalue equality tolerance `1e-9 · max(1, ‖H‖_F)`.
    pub fn degeneracy_tolerance(&self) -> f64 {
        DEGENERACY_REL * self.frobenius_norm().max(1.0)
    }

    /// The cached eigensystem, computed on first use.
    pub fn eigensystem(&self) -> Result<&HermitianEigensystem> {
        if let Some(e) = self.eig.get() {
            return Ok(e);
        }
        let e = hermitian_eig(&self.matrix)?;
        Ok(self.eig.get_or_init(|| e))
    }
}

/// Unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(CVector);

impl PureState {
    /// Accepts `v` if its norm is one within `1e-10`.
    pub fn new(v: CVector) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("state norm {n} is not 1")));
        }
        Ok(Self(v))
    }

    /// Rescales `v` to unit norm.
    pub fn normalized(v: CVector) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self(v.unscale(n)))
    }

    /// Computational basis state `|idx⟩`.
    pub fn basis(dim: usize, idx: usize) -> Result<Self> {
        if idx >= dim {
            return Err(invalid("idx", format!("{idx} outside dimension {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[idx] = C1;
        Ok(Self(v))
    }

    /// Haar-random state from normalized complex Gaussian amplitudes.
    pub fn haar_random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        loop {
            let v = CVector::from_fn(dim, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            if let Ok(s) = Self::normalized(v) {
                return s;
            }
        }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> CVector {
        self.0
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let defect = hermiticity_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {defect:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let eig = hermitian_eig(&m)?;
        if eig.eigenvalues[0] < -1e-10 {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e}",
                eig.eigenvalues[0]
            )));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self(&psi.0 * psi.0.adjoint())
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim).unscale(dim as f64))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `Re Tr(O ρ)`.
    pub fn expectation(&self, o: &CMatrix) -> f64 {
        // Tr(Oρ) = Σ_ij O_ij ρ_ji
        let mut acc = C0;
        for i in 0..self.0.nrows() {
            for j in 0..self.0.ncols() {
                acc += o[(i, j)] * self.0[(j, i)];
            }
        }
        acc.re
    }

    pub fn purity(&self) -> f64 {
        frobenius_inner(&self.0, &self.0).re
    }

    /// Reduced state of sites `2..=n_sites`.
    pub fn partial_trace_first_qubit(&self, n_sites: usize) -> Result<DensityMatrix> {
        partial_trace_first_qubit(&self.0, n_sites).map(DensityMatrix)
    }
}
