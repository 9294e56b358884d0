//! Two-mode restriction of the coupled-mode Hamiltonian: ground states,
//! canonical thermal states and coupling/temperature sweeps.
//!
//! Energies are in units of the tunneling energy `hbar kappa`; the
//! interaction enters through the ratio `G = g / kappa`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::criteria::{entropic_criterion, hz_criterion, InterwellMoments};
use crate::error::{invalid, Error, Result};
use crate::fock::{DensityMatrix, FockBasis, TwoModeState};

/// Default `hbar kappa / k_B` in nK.
pub const DEFAULT_KAPPA_SCALE_NK: f64 = 50.0;

/// Relative energy window treated as one degenerate ground level at `T = 0`.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeHamiltonian {
    basis: FockBasis,
    coupling: f64,
    matrix: DMatrix<f64>,
}

impl TwoModeHamiltonian {
    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    /// Interaction ratio `g / kappa`.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Full spectrum, ascending.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let dim = self.basis.dim();
        let eig = self
            .matrix
            .clone()
            .try_symmetric_eigen(f64::EPSILON, 1000 * dim)
            .ok_or_else(|| {
                Error::Numeric(format!(
                    "symmetric eigensolver did not converge (N = {}, G = {})",
                    self.basis.n_atoms(),
                    self.coupling
                ))
            })?;
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let states = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        Ok(Spectrum { energies, states })
    }
}

/// Eigenpairs sorted by energy.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub states: Vec<DVector<f64>>,
}

impl Spectrum {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// Number of levels within [`DEGENERACY_TOL`] of the ground energy.
    pub fn ground_degeneracy(&self) -> usize {
        let e0 = self.energies[0];
        let scale = self.energies.iter().fold(1.0f64, |m, e| m.max(e.abs()));
        self.energies
            .iter()
            .take_while(|&&e| e - e0 <= DEGENERACY_TOL * scale)
            .count()
    }
}

/// `H[k+1,k] = sqrt((k+1)(N-k))`, `H[k,k] = (G/2)[k(k-1) + (N-k)(N-k-1)]`.
pub fn build_hamiltonian(n_atoms: usize, coupling: f64) -> Result<TwoModeHamiltonian> {
    if !coupling.is_finite() {
        return Err(invalid(format!("interaction ratio must be finite, got {coupling}")));
    }
    let basis = FockBasis::new(n_atoms)?;
    let n = n_atoms as f64;
    let dim = basis.dim();
    let mut matrix = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let kf = k as f64;
        matrix[(k, k)] = 0.5 * coupling * (kf * (kf - 1.0) + (n - kf) * (n - kf - 1.0));
        if k < n_atoms {
            let hop = ((kf + 1.0) * (n - kf)).sqrt();
            matrix[(k + 1, k)] = hop;
            matrix[(k, k + 1)] = hop;
        }
    }
    Ok(TwoModeHamiltonian {
        basis,
        coupling,
        matrix,
    })
}

fn fix_phase(v: &DVector<f64>) -> DVector<C64> {
    // near-ties (persymmetric states) resolve to the lowest index
    let vmax = v.amax();
    let imax = v.iter().position(|x| x.abs() >= vmax * (1.0 - 1e-9)).unwrap_or(0);
    let sign = if v[imax] < 0.0 { -1.0 } else { 1.0 };
    v.map(|x| C64::new(sign * x, 0.0))
}

/// Lowest eigenvector, with its largest-magnitude amplitude real positive.
/// When several amplitudes tie in magnitude the one with the smallest `n_a` wins.
pub fn ground_state(h: &TwoModeHamiltonian) -> Result<TwoModeState> {
    let spectrum = h.spectrum()?;
    ground_state_from(h.basis(), &spectrum)
}

fn ground_state_from(basis: FockBasis, spectrum: &Spectrum) -> Result<TwoModeState> {
    TwoModeState::normalized(basis, fix_phase(&spectrum.states[0]))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalSpec {
    temperature_nk: f64,
    kappa_scale_nk: f64,
}

impl ThermalSpec {
    pub fn new(temperature_nk: f64, kappa_scale_nk: f64) -> Result<Self> {
        if !(temperature_nk.is_finite() && temperature_nk >= 0.0) {
            return Err(invalid(format!(
                "temperature must be finite and >= 0 nK, got {temperature_nk}"
            )));
        }
        if !(kappa_scale_nk.is_finite() && kappa_scale_nk > 0.0) {
            return Err(invalid(format!(
                "hbar kappa / k_B must be finite and > 0 nK, got {kappa_scale_nk}"
            )));
        }
        Ok(Self {
            temperature_nk,
            kappa_scale_nk,
        })
    }

    /// Temperature with the default 50 nK tunneling scale.
    pub fn at(temperature_nk: f64) -> Result<Self> {
        Self::new(temperature_nk, DEFAULT_KAPPA_SCALE_NK)
    }

    pub fn temperature_nk(&self) -> f64 {
        self.temperature_nk
    }

    pub fn kappa_scale_nk(&self) -> f64 {
        self.kappa_scale_nk
    }
}

/// Canonical state `exp(-H/k_B T)/Z` restricted to fixed N.
pub fn thermal_state(h: &TwoModeHamiltonian, spec: ThermalSpec) -> Result<DensityMatrix> {
    let spectrum = h.spectrum()?;
    thermal_state_from(h.basis(), &spectrum, spec)
}

/// Boltzmann weights of `spectrum`, shifted by the ground energy.
pub fn boltzmann_weights(spectrum: &Spectrum, spec: ThermalSpec) -> Vec<f64> {
    let e0 = spectrum.ground_energy();
    let mut weights: Vec<f64> = if spec.temperature_nk == 0.0 {
        let g = spectrum.ground_degeneracy();
        (0..spectrum.energies.len())
            .map(|i| if i < g { 1.0 } else { 0.0 })
            .collect()
    } else {
        let beta = spec.kappa_scale_nk / spec.temperature_nk;
        spectrum.energies.iter().map(|e| (-(e - e0) * beta).exp()).collect()
    };
    let z: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= z);
    weights
}

fn thermal_state_from(basis: FockBasis, spectrum: &Spectrum, spec: ThermalSpec) -> Result<DensityMatrix> {
    let weights = boltzmann_weights(spectrum, spec);
    let vectors: Vec<DVector<C64>> = spectrum.states.iter().map(|v| v.map(|x| C64::new(x, 0.0))).collect();
    DensityMatrix::from_spectral(basis, &weights, &vectors)
}

/// One `(Ng/kappa, T)` point of the adiabatic sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct AdiabaticRow {
    pub ng_over_kappa: f64,
    pub temperature_nk: f64,
    /// `None` when the HZ denominator vanishes.
    pub e_hz: Option<f64>,
    /// Only evaluated on `T = 0` rows.
    pub e_entropic: Option<f64>,
}

/// Rows are ordered by grid point, then by temperature in the given order.
pub fn adiabatic_sweep(
    n_atoms: usize,
    ng_grid: &[f64],
    temperatures_nk: &[f64],
    kappa_scale_nk: f64,
) -> Result<Vec<AdiabaticRow>> {
    if ng_grid.is_empty() || temperatures_nk.is_empty() {
        return Err(invalid("sweep grids must be non-empty"));
    }
    let specs = temperatures_nk
        .iter()
        .map(|&t| ThermalSpec::new(t, kappa_scale_nk))
        .collect::<Result<Vec<_>>>()?;
    let chunks: Vec<Vec<AdiabaticRow>> = ng_grid
        .par_iter()
        .map(|&x| sweep_point(n_atoms, x, &specs))
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn sweep_point(n_atoms: usize, ng_over_kappa: f64, specs: &[ThermalSpec]) -> Result<Vec<AdiabaticRow>> {
    let h = build_hamiltonian(n_atoms, ng_over_kappa / n_atoms as f64)?;
    let spectrum = h.spectrum()?;
    let basis = h.basis();
    specs
        .iter()
        .map(|spec| {
            let t = spec.temperature_nk();
            let rho = thermal_state_from(basis, &spectrum, *spec)?;
            let e_hz = hz_criterion(&InterwellMoments::from_state(&rho)?).value;
            let e_entropic = if t == 0.0 {
                entropic_criterion(&ground_state_from(basis, &spectrum)?)?.value
            } else {
                None
            };
            Ok(AdiabaticRow {
                ng_over_kappa,
                temperature_nk: t,
                e_hz,
                e_entropic,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            Error::Numeric(msg) => Error::Numeric(format!("at Ng/kappa = {ng_over_kappa}: {msg}")),
            other => other,
        })
}
