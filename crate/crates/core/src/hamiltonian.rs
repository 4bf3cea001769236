//! Transverse-field Ising reservoirs
//! `H = Σ_{i<j} J_ij X_i X_j + h Σ_i Z_i`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantum::{pauli_embed, Axis, CMatrix, HermitianOperator};
use crate::spectral::group_by_gap;

/// Transverse field used by every preset and by the random ensembles.
pub const DEFAULT_FIELD: f64 = 0.5;

/// One coupling `J_ij X_i X_j` with 1-based sites `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingSpec {
    pub n_sites: usize,
    pub h: f64,
    pub couplings: Vec<Coupling>,
}

impl IsingSpec {
    pub fn new(n_sites: usize, h: f64, couplings: Vec<Coupling>) -> Result<Self> {
        let spec = Self {
            n_sites,
            h,
            couplings,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(invalid("n_sites", "must be at least 1"));
        }
        if !self.h.is_finite() {
            return Err(invalid("h", "must be finite"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.couplings {
            if !(1 <= c.i && c.i < c.j && c.j <= self.n_sites) {
                return Err(invalid(
                    "couplings",
                    format!("pair ({}, {}) violates 1 <= i < j <= {}", c.i, c.j, self.n_sites),
                ));
            }
            if !c.value.is_finite() {
                return Err(invalid("couplings", format!("J_{}{} is not finite", c.i, c.j)));
            }
            if !seen.insert((c.i, c.j)) {
                return Err(invalid("couplings", format!("pair ({}, {}) repeated", c.i, c.j)));
            }
        }
        Ok(())
    }

    /// `J_ij`, zero when the pair is absent.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.couplings
            .iter()
            .find(|c| c.i == a && c.j == b)
            .map_or(0.0, |c| c.value)
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }
}

/// Site pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn coupling_pairs(n_sites: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n_sites * n_sites.saturating_sub(1) / 2);
    for i in 1..=n_sites {
        for j in i + 1..=n_sites {
            out.push((i, j));
        }
    }
    out
}

/// The four four-site reservoirs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    HI1,
    HI2,
    HI3,
    HI4,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::HI1, Preset::HI2, Preset::HI3, Preset::HI4];

    /// `(J12, J13, J14, J23, J24, J34)`.
    pub fn couplings(self) -> [f64; 6] {
        match self {
            Preset::HI1 => [0.5; 6],
            Preset::HI2 => [0.4, 0.5, 0.5, 0.5, 0.5, 0.5],
            Preset::HI3 => [0.35, 0.40, 0.45, 0.50, 0.55, 0.60],
            Preset::HI4 => [0.35, 0.40, 0.45, 0.50, 0.55, 0.65],
        }
    }

    pub fn spec(self) -> IsingSpec {
        let couplings = coupling_pairs(4)
            .into_iter()
            .zip(self.couplings())
            .map(|((i, j), value)| Coupling { i, j, value })
            .collect();
        IsingSpec {
            n_sites: 4,
            h: DEFAULT_FIELD,
            couplings,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::HI1 => "HI1",
            Preset::HI2 => "HI2",
            Preset::HI3 => "HI3",
            Preset::HI4 => "HI4",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| *c != '_')
            .collect::<String>()
            .to_ascii_uppercase();
        match key.as_str() {
            "HI1" => Ok(Preset::HI1),
            "HI2" => Ok(Preset::HI2),
            "HI3" => Ok(Preset::HI3),
            "HI4" => Ok(Preset::HI4),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

/// Preset lookup by name.
pub fn preset(name: &str) -> Result<IsingSpec> {
    name.parse::<Preset>().map(Preset::spec)
}

/// Dense Hamiltonian matrix for `spec`.
pub fn build_ising(spec: &IsingSpec) -> Result<HermitianOperator> {
    spec.validate()?;
    let dim = spec.dim();
    let mut h = CMatrix::zeros(dim, dim);
    for c in &spec.couplings {
        let xx = pauli_embed(c.i, Axis::X, spec.n_sites)? * pauli_embed(c.j, Axis::X, spec.n_sites)?;
        h += xx * Complex64::new(c.value, 0.0);
    }
    for site in 1..=spec.n_sites {
        h += pauli_embed(site, Axis::Z, spec.n_sites)? * Complex64::new(spec.h, 0.0);
    }
    HermitianOperator::new(h)
}

/// Uniform coupling distribution `U([low, high])` with a fixed seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomCouplingSampler {
    pub low: f64,
    pub high: f64,
    pub seed: u64,
}

impl RandomCouplingSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            low: 0.25,
            high: 0.75,
            seed,
        }
    }

    pub fn with_bounds(low: f64, high: f64, seed: u64) -> Result<Self> {
        if !(low < high) || !low.is_finite() || !high.is_finite() {
            return Err(invalid("low", format!("need finite low < high, got [{low}, {high}]")));
        }
        Ok(Self { low, high, seed })
    }

    /// Coupling with lexicographic pair index `index`. Each index owns its own
    /// ChaCha stream, so draws do not depend on evaluation order.
    pub fn draw(&self, index: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        self.low + (self.high - self.low) * rng.gen::<f64>()
    }
}

/// All-to-all random Ising spec with field [`DEFAULT_FIELD`].
pub fn sample_random(n_sites: usize, sampler: &RandomCouplingSampler) -> Result<IsingSpec> {
    if n_sites < 2 {
        return Err(invalid("n_sites", "random ensembles need at least two sites"));
    }
    let couplings = coupling_pairs(n_sites)
        .into_iter()
        .enumerate()
        .map(|(k, (i, j))| Coupling {
            i,
            j,
            value: sampler.draw(k),
        })
        .collect();
    IsingSpec::new(n_sites, DEFAULT_FIELD, couplings)
}

/// Number of eigenvalue classes after gap-splitting the sorted spectrum at `tol`.
pub fn distinct_eigenvalue_count(h: &HermitianOperator, tol: f64) -> Result<usize> {
    Ok(group_by_gap(h.eigensystem()?.eigenvalues(), tol).len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn preset_couplings() {
        let s = preset("HI1").unwrap();
        assert!(s.couplings.iter().all(|c| c.value == 0.5));
        let s = preset("HI3").unwrap();
        let vals: Vec<f64> = s.couplings.iter().map(|c| c.value).collect();
        assert_eq!(vals, vec![0.35, 0.40, 0.45, 0.50, 0.55, 0.60]);
        let s4 = preset("hi4").unwrap();
        assert_eq!(s4.coupling(3, 4), 0.65);
        for (i, j) in coupling_pairs(4) {
            if (i, j) != (3, 4) {
                assert_eq!(s4.coupling(i, j), s.coupling(i, j));
            }
        }
        assert_eq!(s4.n_sites, 4);
        assert_eq!(s4.h, 0.5);
        assert!(matches!(preset("HI9"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn single_spin_and_pair() {
        let h = build_ising(&IsingSpec::new(1, 0.5, vec![]).unwrap()).unwrap();
        assert_abs_diff_eq!(h.matrix()[(0, 0)].re, 0.5);
        assert_abs_diff_eq!(h.matrix()[(1, 1)].re, -0.5);
        assert_eq!(distinct_eigenvalue_count(&h, h.degeneracy_tolerance()).unwrap(), 2);

        let spec = IsingSpec::new(2, 0.0, vec![Coupling { i: 1, j: 2, value: 1.0 }]).unwrap();
        let h = build_ising(&spec).unwrap();
        let ev = h.eigensystem().unwrap().eigenvalues().to_vec();
        for (a, b) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(h.matrix()[(0, 3)].re, 1.0);
    }

    #[test]
    fn preset_distinct_eigenvalues() {
        let expected = [9, 16, 15, 16];
        for (p, d) in Preset::ALL.into_iter().zip(expected) {
            let h = build_ising(&p.spec()).unwrap();
            assert_eq!(distinct_eigenvalue_count(&h, h.degeneracy_tolerance()).unwrap(), d, "{p}");
            assert!(h.matrix().iter().all(|z| z.im.abs() <= 1e-15));
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(IsingSpec::new(2, 0.5, vec![Coupling { i: 2, j: 1, value: 1.0 }]).is_err());
        assert!(IsingSpec::new(2, 0.5, vec![Coupling { i: 1, j: 3, value: 1.0 }]).is_err());
        let dup = vec![Coupling { i: 1, j: 2, value: 1.0 }; 2];
        assert!(IsingSpec::new(2, 0.5, dup).is_err());
        assert!(RandomCouplingSampler::with_bounds(0.5, 0.5, 0).is_err());
        assert!(sample_random(1, &RandomCouplingSampler::new(0)).is_err());
    }

    #[test]
    fn random_sampler_determinism_and_bounds() {
        let a = sample_random(6, &RandomCouplingSampler::new(7)).unwrap();
        let b = sample_random(6, &RandomCouplingSampler::new(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.couplings.len(), 15);
        let specs: Vec<IsingSpec> = (0..10)
            .map(|s| sample_random(4, &RandomCouplingSampler::new(s)).unwrap())
            .collect();
        for s in &specs {
            assert!(s.couplings.iter().all(|c| (0.25..=0.75).contains(&c.value)));
        }
        for i in 0..specs.len() {
            for j in i + 1..specs.len() {
                assert_ne!(specs[i], specs[j]);
            }
        }
    }

    #[test]
    fn preset_names_parse_with_subscript_underscore() {
        let p: Preset = "H_I2".parse().unwrap();
        assert_eq!(p, Preset::HI2);
        assert_eq!(p.to_string(), "HI2");
    }
}
