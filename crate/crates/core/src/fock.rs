//! Fixed-total-number two-mode Fock space.
//!
//! Basis vector `k` is `|n_a = k, n_b = N - k>`, so the tunneling term is
//! tridiagonal and the basis ordering is deterministic.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};

/// Tolerance on norm, Hermiticity and trace applied when a state is built.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Smallest eigenvalue a density matrix may carry.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Norm tolerance accepted by [`reduced_entropy`].
pub const ENTROPY_NORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FockBasis {
    n_atoms: usize,
}

impl FockBasis {
    pub fn new(n_atoms: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(invalid("atom number must be at least 1"));
        }
        Ok(Self { n_atoms })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }

    /// Occupations `(n_a, n_b)` of basis vector `k`.
    pub fn occupations(&self, k: usize) -> Option<(usize, usize)> {
        (k <= self.n_atoms).then(|| (k, self.n_atoms - k))
    }

    /// Basis index holding `n_a` atoms in mode `a`.
    pub fn index_of(&self, n_a: usize) -> Option<usize> {
        (n_a <= self.n_atoms).then_some(n_a)
    }
}

/// Builds the basis for `n_atoms` atoms. Negative counts are rejected.
pub fn build_basis(n_atoms: i64) -> Result<FockBasis> {
    if n_atoms < 1 {
        return Err(invalid(format!("atom number must be at least 1, got {n_atoms}")));
    }
    FockBasis::new(n_atoms as usize)
}

/// Operators with a closed-form matrix on the fixed-N basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// `a† b`
    AdagB,
    /// `b† a`
    BdagA,
    NumberA,
    NumberB,
    /// `n_a n_b`
    NumberProduct,
    /// `(J^Z)^2` with `J^Z = (n_a - n_b) / 2`
    JzSquared,
    /// `(n_a + n_b)^2`
    TotalSquared,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 7] = [
        OperatorKind::AdagB,
        OperatorKind::BdagA,
        OperatorKind::NumberA,
        OperatorKind::NumberB,
        OperatorKind::NumberProduct,
        OperatorKind::JzSquared,
        OperatorKind::TotalSquared,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::AdagB => "adag_b",
            OperatorKind::BdagA => "bdag_a",
            OperatorKind::NumberA => "n_a",
            OperatorKind::NumberB => "n_b",
            OperatorKind::NumberProduct => "n_a_n_b",
            OperatorKind::JzSquared => "jz_squared",
            OperatorKind::TotalSquared => "n_total_squared",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "adag_b" | "a†b" => OperatorKind::AdagB,
            "bdag_a" | "b†a" => OperatorKind::BdagA,
            "n_a" => OperatorKind::NumberA,
            "n_b" => OperatorKind::NumberB,
            "n_a_n_b" | "n_a·n_b" => OperatorKind::NumberProduct,
            "jz_squared" | "(J^Z)²" => OperatorKind::JzSquared,
            "n_total_squared" | "N̂²" => OperatorKind::TotalSquared,
            other => return Err(invalid(format!("unknown operator descriptor '{other}'"))),
        };
        Ok(kind)
    }
}

/// Dense matrix of `kind` in the fixed-N basis.
pub fn operator_matrix(kind: OperatorKind, basis: FockBasis) -> DMatrix<C64> {
    let n = basis.n_atoms();
    let dim = basis.dim();
    let hop = |k: usize| (((k + 1) * (n - k)) as f64).sqrt();
    let diag =
        |f: &dyn Fn(f64) -> f64| DMatrix::from_diagonal(&DVector::from_fn(dim, |k, _| C64::new(f(k as f64), 0.0)));
    let nf = n as f64;
    match kind {
        OperatorKind::AdagB => {
            let mut m = DMatrix::zeros(dim, dim);
            for k in 0..n {
                m[(k + 1, k)] = C64::new(hop(k), 0.0);
            }
            m
        }
        OperatorKind::BdagA => {
            let mut m = DMatrix::zeros(dim, dim);
            for k in 0..n {
                m[(k, k + 1)] = C64::new(hop(k), 0.0);
            }
            m
        }
        OperatorKind::NumberA => diag(&|k| k),
        OperatorKind::NumberB => diag(&|k| nf - k),
        OperatorKind::NumberProduct => diag(&|k| k * (nf - k)),
        OperatorKind::JzSquared => diag(&|k| ((2.0 * k - nf) / 2.0).powi(2)),
        OperatorKind::TotalSquared => diag(&|_| nf * nf),
    }
}

/// Anything an expectation value can be taken against.
pub trait QuantumState {
    fn basis(&self) -> FockBasis;

    /// `<psi|O|psi>` for pure states, `Tr[rho O]` for mixed ones.
    fn expectation(&self, op: &DMatrix<C64>) -> Result<C64>;
}

/// Free-function form of [`QuantumState::expectation`].
pub fn expectation<S: QuantumState + ?Sized>(op: &DMatrix<C64>, state: &S) -> Result<C64> {
    state.expectation(op)
}

fn check_square(op: &DMatrix<C64>, dim: usize) -> Result<()> {
    if op.nrows() != dim || op.ncols() != dim {
        return Err(invalid(format!(
            "operator is {}x{} but the basis has dimension {dim}",
            op.nrows(),
            op.ncols()
        )));
    }
    Ok(())
}

/// Pure state over the fixed-N basis.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState {
    basis: FockBasis,
    amplitudes: DVector<C64>,
}

impl TwoModeState {
    /// Wraps `amplitudes`, which must already be unit norm.
    pub fn new(basis: FockBasis, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(invalid(format!(
                "{} amplitudes supplied for a basis of dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        let norm_sq = amplitudes.norm_squared();
        if (norm_sq - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm_sq} is not 1")));
        }
        Ok(Self { basis, amplitudes })
    }

    /// Normalizes `amplitudes` before wrapping them.
    pub fn normalized(basis: FockBasis, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Self::new(basis, amplitudes / C64::new(norm, 0.0))
    }

    /// The basis vector `|n_a, N - n_a>`.
    pub fn number_state(basis: FockBasis, n_a: usize) -> Result<Self> {
        let k = basis
            .index_of(n_a)
            .ok_or_else(|| invalid(format!("n_a = {n_a} exceeds N = {}", basis.n_atoms())))?;
        let mut amps = DVector::zeros(basis.dim());
        amps[k] = C64::new(1.0, 0.0);
        Self::new(basis, amps)
    }

    /// All atoms in the single-particle mode `(a + e^{i phase} b)/sqrt 2`.
    pub fn binomial(basis: FockBasis, phase: f64) -> Result<Self> {
        let n = basis.n_atoms();
        // sqrt(C(N, k)) / 2^{N/2} built in log space so large N does not overflow.
        let ln_fact = ln_factorials(n);
        let amps = DVector::from_fn(basis.dim(), |k, _| {
            let ln_mag = 0.5 * (ln_fact[n] - ln_fact[k] - ln_fact[n - k]) - 0.5 * n as f64 * std::f64::consts::LN_2;
            C64::from_polar(ln_mag.exp(), phase * (n - k) as f64)
        });
        Self::normalized(basis, amps)
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// Well-A von Neumann entropy in bits.
    pub fn entropy(&self) -> Result<f64> {
        reduced_entropy(self.amplitudes.as_slice())
    }
}

pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

impl QuantumState for TwoModeState {
    fn basis(&self) -> FockBasis {
        self.basis
    }

    fn expectation(&self, op: &DMatrix<C64>) -> Result<C64> {
        check_square(op, self.basis.dim())?;
        Ok(self.amplitudes.dotc(&(op * &self.amplitudes)))
    }
}

/// Mixed state over the fixed-N basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    basis: FockBasis,
    entries: DMatrix<C64>,
    // eigenvalues known from construction
    spectrum: Option<Vec<f64>>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(basis: FockBasis, entries: DMatrix<C64>) -> Result<Self> {
        let rho = Self::checked_shape(basis, entries)?;
        let eig = rho.entries.clone().symmetric_eigen();
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("density matrix has eigenvalue {min}")));
        }
        Ok(rho)
    }

    /// `|psi><psi|`.
    pub fn from_pure(state: &TwoModeState) -> Self {
        let v = state.amplitudes();
        let mut spectrum = vec![0.0; v.len()];
        spectrum[v.len() - 1] = 1.0;
        Self {
            basis: state.basis(),
            entries: v * v.adjoint(),
            spectrum: Some(spectrum),
        }
    }

    /// `sum_i w_i |v_i><v_i|` for non-negative weights summing to one and
    /// orthonormal `vectors`; positivity then holds by construction.
    pub fn from_spectral(basis: FockBasis, weights: &[f64], vectors: &[DVector<C64>]) -> Result<Self> {
        if weights.len() != vectors.len() {
            return Err(invalid("weight and vector counts differ"));
        }
        if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
            return Err(Error::InvalidState(format!("negative or non-finite weight {w}")));
        }
        let dim = basis.dim();
        let mut entries = DMatrix::<C64>::zeros(dim, dim);
        for (&w, v) in weights.iter().zip(vectors) {
            if w == 0.0 {
                continue;
            }
            if v.len() != dim {
                return Err(invalid("spectral vector has the wrong dimension"));
            }
            entries += v * v.adjoint() * C64::new(w, 0.0);
        }
        let mut rho = Self::checked_shape(basis, entries)?;
        if weights.len() == dim {
            let mut spectrum = weights.to_vec();
            spectrum.sort_by(f64::total_cmp);
            rho.spectrum = Some(spectrum);
        }
        Ok(rho)
    }

    fn checked_shape(basis: FockBasis, entries: DMatrix<C64>) -> Result<Self> {
        check_square(&entries, basis.dim())?;
        let herm_err = (&entries - entries.adjoint()).camax();
        if herm_err > CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!("Hermiticity violated by {herm_err}")));
        }
        let trace = entries.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!("trace {trace} is not 1")));
        }
        Ok(Self {
            basis,
            entries,
            spectrum: None,
        })
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// Ascending eigenvalues: the construction weights when the state was
    /// built from a spectral decomposition, otherwise by diagonalization.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if let Some(spectrum) = &self.spectrum {
            return spectrum.clone();
        }
        let mut ev: Vec<f64> = self
            .entries
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

impl QuantumState for DensityMatrix {
    fn basis(&self) -> FockBasis {
        self.basis
    }

    fn expectation(&self, op: &DMatrix<C64>) -> Result<C64> {
        check_square(op, self.basis.dim())?;
        // Tr[rho O] without forming the product.
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.entries.nrows() {
            for j in 0..self.entries.ncols() {
                acc += self.entries[(i, j)] * op[(j, i)];
            }
        }
        Ok(acc)
    }
}

/// Entropy (bits) of well A for the pure fixed-N state with these amplitudes.
///
/// The reduced density matrix of one mode is diagonal in atom number, so the
/// von Neumann entropy is the Shannon entropy of `|amplitude_k|^2`.
pub fn reduced_entropy(amplitudes: &[C64]) -> Result<f64> {
    let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    let norm_err = (norm_sq - 1.0).abs();
    if norm_err.is_nan() || norm_err > ENTROPY_NORM_TOL {
        return Err(Error::InvalidState(format!(
            "squared norm {norm_sq} deviates from 1 by more than {ENTROPY_NORM_TOL:e}"
        )));
    }
    Ok(amplitudes
        .iter()
        .map(|a| a.norm_sqr())
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum())
}
