//! Closed-form Heisenberg moments of the four-mode Kerr evolution.
//!
//! Each well evolves under `H = (1/2) sum_ij g_ij a_i† a_j† a_j a_i`, which is
//! diagonal in the Fock basis. For a normally ordered monomial
//! `O = a†^m a^n` (per well, `d = m - n`) the Heisenberg operator is
//!
//! ```text
//! O(t) = e^{i c t} a†^m e^{i t sum_i (sum_j g_ij d_j) N_i} a^n
//! c    = sum_ij g_ij n_i d_j + (1/2) sum_ij g_ij d_i d_j - (1/2) sum_i g_ii d_i
//! ```
//!
//! which follows from `E(k + d) - E(k)` evaluated at the intermediate
//! occupation `k - n`. The coherent product state then factorises the
//! expectation over modes, leaving the kernel
//! `<alpha| a†^m e^{i lambda N} a^n |alpha> = (alpha*)^m alpha^n exp[|alpha|^2 (e^{i lambda} - 1)]`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::algebra::{beamsplitter_expand, Mode, Monomial, Polynomial, MAX_DEGREE};
use super::{assemble_spin_moments, RawSpinExpectations};
use crate::criteria::SpinMoments;
use crate::error::{invalid, Error, Result};

/// Largest `|alpha|^2` accepted per mode.
pub const MAX_ALPHA_SQ: f64 = 1e6;

/// Scattering lengths in Bohr radii for the Rb mixture near 9.131 G.
pub const RB_SCATTERING_LENGTHS: (f64, f64, f64) = (100.4, 95.5, 80.8);

/// Interaction strengths relative to `g_11`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GRatios {
    pub g11: f64,
    pub g22: f64,
    pub g12: f64,
}

impl GRatios {
    /// `g_ij` is proportional to `a_ij`, so the ratios are direct quotients.
    pub fn from_scattering_lengths(a11: f64, a22: f64, a12: f64) -> Self {
        Self {
            g11: 1.0,
            g22: a22 / a11,
            g12: a12 / a11,
        }
    }

    pub fn rubidium() -> Self {
        let (a11, a22, a12) = RB_SCATTERING_LENGTHS;
        Self::from_scattering_lengths(a11, a22, a12)
    }

    pub fn without_cross_coupling(self) -> Self {
        Self { g12: 0.0, ..self }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.g11, self.g12], [self.g12, self.g22]]
    }

    pub fn validate(&self) -> Result<()> {
        if self.g11 != 1.0 {
            return Err(invalid(format!("g11 ratio must be exactly 1, got {}", self.g11)));
        }
        if !self.g22.is_finite() || !self.g12.is_finite() {
            return Err(invalid("g ratios must be finite"));
        }
        Ok(())
    }
}

/// Parameters of one evaluation of the dynamic scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KerrParams {
    /// Coherent amplitudes, indexed by [`Mode`].
    pub alpha: [C64; 4],
    pub g: GRatios,
    /// Reference atom number `N_A` in `tau = g_11 N_A t`.
    pub n_ref: f64,
    /// Dimensionless time `g_11 N_A t`.
    pub tau: f64,
}

impl KerrParams {
    pub fn new(alpha: [C64; 4], g: GRatios, n_ref: f64, tau: f64) -> Result<Self> {
        g.validate()?;
        if !(n_ref.is_finite() && n_ref > 0.0) {
            return Err(invalid(format!(
                "reference atom number must be finite and > 0, got {n_ref}"
            )));
        }
        if !tau.is_finite() {
            return Err(invalid("tau must be finite"));
        }
        for (mode, a) in Mode::ALL.iter().zip(&alpha) {
            let sq = a.norm_sqr();
            if !sq.is_finite() || sq > MAX_ALPHA_SQ {
                return Err(invalid(format!(
                    "|alpha|^2 = {sq} for mode {} exceeds the limit {MAX_ALPHA_SQ:e}",
                    mode.label()
                )));
            }
        }
        Ok(Self { alpha, g, n_ref, tau })
    }

    /// The same amplitude in all four modes.
    pub fn uniform(alpha: C64, g: GRatios, n_ref: f64, tau: f64) -> Result<Self> {
        Self::new([alpha; 4], g, n_ref, tau)
    }

    /// Real amplitude with `2 |alpha|^2 = N_A` atoms per well.
    pub fn from_well_population(n_a: f64, g: GRatios, tau: f64) -> Result<Self> {
        if n_a.is_nan() || n_a <= 0.0 {
            return Err(invalid(format!("well population must be > 0, got {n_a}")));
        }
        Self::uniform(C64::new((n_a / 2.0).sqrt(), 0.0), g, n_a, tau)
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        Self { tau, ..*self }
    }

    /// `g_ij t = (g_ij / g_11) tau / N_A`.
    pub fn coupling_times(&self) -> [[f64; 2]; 2] {
        let s = self.tau / self.n_ref;
        self.g.matrix().map(|row| row.map(|g| g * s))
    }
}

/// `<alpha| a†^m e^{i lambda N} a^n |alpha>`.
pub fn kerr_kernel(alpha: C64, m: u32, n: u32, lambda: f64) -> C64 {
    // e^{i lambda} - 1 without cancellation at small lambda
    let half = 0.5 * lambda;
    let shift = C64::new(-2.0 * half.sin().powi(2), lambda.sin());
    alpha.conj().powu(m) * alpha.powu(n) * (shift * alpha.norm_sqr()).exp()
}

/// Expectation of a normally ordered monomial of Heisenberg operators at `tau`.
pub fn evolve_monomial(mono: &Monomial, params: &KerrParams) -> Result<C64> {
    if mono.degree() > MAX_DEGREE {
        return Err(Error::UnsupportedRequest(format!(
            "monomial {mono} has degree {} > {MAX_DEGREE}",
            mono.degree()
        )));
    }
    let gt = params.coupling_times();
    let mut value = C64::new(1.0, 0.0);
    for well in 0..2 {
        let modes = [2 * well, 2 * well + 1];
        let m = modes.map(|i| mono.create[i] as u32);
        let n = modes.map(|i| mono.annihilate[i] as u32);
        let d = [m[0] as f64 - n[0] as f64, m[1] as f64 - n[1] as f64];
        let mut phase = 0.0;
        for i in 0..2 {
            phase -= 0.5 * gt[i][i] * d[i];
            for j in 0..2 {
                phase += gt[i][j] * (n[i] as f64 * d[j] + 0.5 * d[i] * d[j]);
            }
        }
        value *= C64::from_polar(1.0, phase);
        for i in 0..2 {
            let lambda = gt[i][0] * d[0] + gt[i][1] * d[1];
            value *= kerr_kernel(params.alpha[modes[i]], m[i], n[i], lambda);
        }
    }
    Ok(value)
}

/// Which operators a [`MomentTable`]'s monomials are written in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TableFrame {
    PreBeamSplitter,
    PostBeamSplitter { phi: f64 },
}

/// Evaluated monomials for one parameter set.
#[derive(Clone, Debug)]
pub struct MomentTable {
    values: BTreeMap<Monomial, C64>,
    pub params: KerrParams,
    pub frame: TableFrame,
    /// Beam-splitter phase of the spin polynomials that requested the entries.
    pub phi: Option<f64>,
}

impl MomentTable {
    /// Evaluates every requested monomial together with its conjugate.
    pub fn populate<'a>(
        params: KerrParams,
        phi: Option<f64>,
        monomials: impl IntoIterator<Item = &'a Monomial>,
    ) -> Result<Self> {
        let mut values = BTreeMap::new();
        for mono in monomials {
            for m in [*mono, mono.dagger()] {
                if let Entry::Vacant(slot) = values.entry(m) {
                    slot.insert(evolve_monomial(&m, &params)?);
                }
            }
        }
        Ok(Self {
            values,
            params,
            frame: TableFrame::PreBeamSplitter,
            phi,
        })
    }

    pub fn get(&self, mono: &Monomial) -> Option<C64> {
        self.values.get(mono).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Expectation of a polynomial whose monomials are all in the table.
    pub fn expect(&self, poly: &Polynomial) -> Result<C64> {
        poly.terms().try_fold(C64::new(0.0, 0.0), |acc, (m, c)| {
            let v = self
                .get(m)
                .ok_or_else(|| Error::UnsupportedRequest(format!("monomial {m} missing from moment table")))?;
            Ok(acc + c * v)
        })
    }

    /// Largest `|<m†> - <m>*|` over the table.
    pub fn conjugate_closure_error(&self) -> f64 {
        self.values
            .iter()
            .filter_map(|(m, v)| self.values.get(&m.dagger()).map(|w| (w - v.conj()).norm()))
            .fold(0.0, f64::max)
    }
}

/// Schwinger spin polynomials `(J^X, J^Y, J^Z)` for a pair of modes and the
/// pair's total number.
pub fn spin_polynomials(first: Mode, second: Mode) -> ([Polynomial; 3], Polynomial) {
    let ad = |m| Polynomial::monomial(Monomial::creation(m));
    let a = |m| Polynomial::monomial(Monomial::annihilation(m));
    let raise = &ad(first) * &a(second);
    let lower = &ad(second) * &a(first);
    let n1 = Polynomial::monomial(Monomial::number(first));
    let n2 = Polynomial::monomial(Monomial::number(second));
    let half = C64::new(0.5, 0.0);
    let jx = (&raise + &lower).scale(half);
    let jy = (&raise + &lower.scale(C64::new(-1.0, 0.0))).scale(C64::new(0.0, -0.5));
    let jz = (&n1 + &n2.scale(C64::new(-1.0, 0.0))).scale(half);
    ([jx, jy, jz], &n1 + &n2)
}

/// Pre-beam-splitter expansions of every spin moment, independent of `tau`.
#[derive(Clone, Debug)]
pub struct SpinMomentPlan {
    phi: f64,
    first: [[Polynomial; 3]; 2],
    number: [Polynomial; 2],
    /// `[pair][p][q]` for pairs (A,A), (B,B), (A,B)
    second: [[[Polynomial; 3]; 3]; 3],
}

const PAIRS: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];

impl SpinMomentPlan {
    pub fn new(phi: f64) -> Self {
        let wells = [
            spin_polynomials(Mode::A1, Mode::A2),
            spin_polynomials(Mode::B1, Mode::B2),
        ];
        let first = std::array::from_fn(|w| std::array::from_fn(|p| beamsplitter_expand(&wells[w].0[p], phi)));
        let number = std::array::from_fn(|w| beamsplitter_expand(&wells[w].1, phi));
        let second = std::array::from_fn(|k| {
            let (w, v) = PAIRS[k];
            std::array::from_fn(|p| {
                std::array::from_fn(|q| beamsplitter_expand(&(&wells[w].0[p] * &wells[v].0[q]), phi))
            })
        });
        Self {
            phi,
            first,
            number,
            second,
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    fn polynomials(&self) -> impl Iterator<Item = &Polynomial> {
        self.first
            .iter()
            .flatten()
            .chain(&self.number)
            .chain(self.second.iter().flatten().flatten())
    }

    /// Every monomial needed, each once.
    pub fn monomials(&self) -> Vec<Monomial> {
        let mut all: Vec<Monomial> = self.polynomials().flat_map(|p| p.terms().map(|(m, _)| *m)).collect();
        all.sort();
        all.dedup();
        all
    }

    pub fn table(&self, params: &KerrParams) -> Result<MomentTable> {
        MomentTable::populate(*params, Some(self.phi), &self.monomials())
    }

    pub fn raw(&self, table: &MomentTable) -> Result<RawSpinExpectations> {
        let mut raw = RawSpinExpectations::default();
        for w in 0..2 {
            for p in 0..3 {
                raw.first[w][p] = table.expect(&self.first[w][p])?;
            }
            raw.number[w] = table.expect(&self.number[w])?;
        }
        for (k, &(w, v)) in PAIRS.iter().enumerate() {
            for p in 0..3 {
                for q in 0..3 {
                    raw.second[w][v][p][q] = table.expect(&self.second[k][p][q])?;
                }
            }
        }
        Ok(raw)
    }

    pub fn evaluate(&self, params: &KerrParams) -> Result<SpinMoments> {
        let table = self.table(params)?;
        Ok(assemble_spin_moments(&self.raw(&table)?))
    }
}

/// Post-beam-splitter local spin moments at `params.tau`.
pub fn dynamic_spin_moments(params: &KerrParams, phi: f64) -> Result<SpinMoments> {
    SpinMomentPlan::new(phi).evaluate(params)
}

/// `<N_A>` and `<N_B>` before the beam splitter.
pub fn pre_split_populations(params: &KerrParams) -> Result<[f64; 2]> {
    let n = |modes: [Mode; 2]| -> Result<f64> {
        modes.iter().try_fold(0.0, |acc, &m| {
            Ok(acc + evolve_monomial(&Monomial::number(m), params)?.re)
        })
    };
    Ok([n([Mode::A1, Mode::A2])?, n([Mode::B1, Mode::B2])?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn fock_sum_kernel(alpha: C64, m: u32, n: u32, lambda: f64, cutoff: usize) -> C64 {
        // sum_k <alpha|k+m> ... evaluated with explicit Fock amplitudes
        let amp = |k: usize| -> C64 {
            let mut v = c((-0.5 * alpha.norm_sqr()).exp(), 0.0);
            for j in 1..=k {
                v *= alpha / (j as f64).sqrt();
            }
            v
        };
        let ladder = |k: usize, p: u32| -> f64 { (0..p).map(|i| ((k - i as usize) as f64).sqrt()).product() };
        let mut acc = c(0.0, 0.0);
        for k in n as usize..=cutoff {
            let mid = k - n as usize;
            let out = mid + m as usize;
            if out > cutoff {
                continue;
            }
            acc += amp(out).conj() * amp(k) * ladder(k, n) * ladder(out, m) * C64::from_polar(1.0, lambda * mid as f64);
        }
        acc
    }

    #[test]
    fn kernel_identity_and_vacuum() {
        let alpha = c(0.7, -1.2);
        let v = kerr_kernel(alpha, 2, 1, 0.0);
        assert!((v - alpha.conj().powu(2) * alpha).norm() < 1e-14);
        assert_eq!(kerr_kernel(c(0.0, 0.0), 1, 0, 0.4), c(0.0, 0.0));
        assert_eq!(kerr_kernel(c(0.0, 0.0), 0, 2, 0.4), c(0.0, 0.0));
    }

    #[test]
    fn kernel_matches_fock_sum() {
        let v = kerr_kernel(c(1.0, 0.0), 0, 0, PI);
        let oracle = fock_sum_kernel(c(1.0, 0.0), 0, 0, PI, 40);
        assert!((v - oracle).norm() < 1e-14);
        assert_abs_diff_eq!(v.re, (-2f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(v.re, 0.135335, epsilon = 1e-6);

        for (m, n, lambda) in [(1, 0, 0.3), (0, 2, -1.1), (2, 1, 2.5), (1, 1, 0.01)] {
            let alpha = c(1.1, 0.6);
            let v = kerr_kernel(alpha, m, n, lambda);
            let o = fock_sum_kernel(alpha, m, n, lambda, 60);
            assert!((v - o).norm() < 1e-12, "{m} {n} {lambda}: {v} vs {o}");
        }
    }

    fn rb(alpha: C64, tau: f64) -> KerrParams {
        KerrParams::uniform(alpha, GRatios::rubidium(), 200.0, tau).unwrap()
    }

    #[test]
    fn number_is_conserved() {
        let alpha = c(2.0, 0.5);
        for tau in [0.0, 0.3, 7.0, 120.0] {
            let v = evolve_monomial(&Monomial::number(Mode::A1), &rb(alpha, tau)).unwrap();
            assert_abs_diff_eq!(v.re, alpha.norm_sqr(), epsilon = 1e-12);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
            let pops = pre_split_populations(&rb(alpha, tau)).unwrap();
            assert_abs_diff_eq!(pops[0], 2.0 * alpha.norm_sqr(), epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_time_is_coherent_value() {
        let params = KerrParams::new(
            [c(1.0, 0.2), c(-0.3, 0.9), c(0.5, 0.0), c(0.0, -1.4)],
            GRatios::rubidium(),
            10.0,
            0.0,
        )
        .unwrap();
        let mut mono = Monomial::IDENTITY;
        mono.create = [1, 0, 0, 1];
        mono.annihilate = [0, 1, 1, 0];
        let expect = params.alpha[0].conj() * params.alpha[3].conj() * params.alpha[1] * params.alpha[2];
        assert!((evolve_monomial(&mono, &params).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn single_mode_kerr_mean_field() {
        let alpha = c(2.0, 0.0); // |alpha|^2 = 4
        let g = GRatios::rubidium().without_cross_coupling();
        let params = KerrParams::uniform(alpha, g, 200.0, 3.0).unwrap();
        let v = evolve_monomial(&Monomial::annihilation(Mode::A1), &params).unwrap();
        let lam = -3.0 / 200.0;
        let expect = alpha * (C64::from_polar(1.0, lam) - 1.0).scale(4.0).exp();
        assert!((v - expect).norm() < 1e-13);
        let oracle = alpha.norm_sqr().sqrt() * fock_sum_kernel(alpha, 0, 0, lam, 40);
        assert!((v - oracle).norm() < 1e-12);
    }

    #[test]
    fn degree_limit() {
        let mut mono = Monomial::IDENTITY;
        mono.create = [2, 0, 0, 0];
        mono.annihilate = [2, 1, 0, 0];
        assert!(matches!(
            evolve_monomial(&mono, &rb(c(1.0, 0.0), 0.1)),
            Err(Error::UnsupportedRequest(_))
        ));
    }

    #[test]
    fn params_validation() {
        let bad_g = GRatios {
            g11: 0.9,
            g22: 1.0,
            g12: 0.0,
        };
        assert!(KerrParams::uniform(c(1.0, 0.0), bad_g, 200.0, 0.0).is_err());
        assert!(KerrParams::uniform(c(1.0, 0.0), GRatios::rubidium(), 0.0, 0.0).is_err());
        assert!(KerrParams::uniform(c(1e4, 0.0), GRatios::rubidium(), 200.0, 0.0).is_err());
        assert!(KerrParams::uniform(c(1.0, 0.0), GRatios::rubidium(), 200.0, f64::NAN).is_err());
    }

    #[test]
    fn rubidium_ratios() {
        let g = GRatios::rubidium();
        assert_eq!(g.g11, 1.0);
        assert_abs_diff_eq!(g.g22, 0.95120, epsilon = 5e-6);
        assert_abs_diff_eq!(g.g12, 0.80478, epsilon = 5e-6);
    }

    #[test]
    fn table_conjugate_closure() {
        let plan = SpinMomentPlan::new(FRAC_PI_2);
        for tau in [0.0, 0.2, 40.0] {
            let table = plan.table(&rb(c(1.5, 0.3), tau)).unwrap();
            assert!(!table.is_empty());
            assert!(table.conjugate_closure_error() < 1e-12);
        }
    }

    #[test]
    fn coherent_spin_moments_at_zero_time() {
        let alpha = 3.0;
        let sm = dynamic_spin_moments(&rb(c(alpha, 0.0), 0.0), FRAC_PI_2).unwrap();
        let n_w = 2.0 * alpha * alpha;
        for well in [sm.a, sm.b] {
            assert_abs_diff_eq!(well.mean.x, alpha * alpha, epsilon = 1e-10);
            assert_abs_diff_eq!(well.mean.y, 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(well.mean.z, 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(well.cov[(1, 1)], n_w / 4.0, epsilon = 1e-10);
            assert_abs_diff_eq!(well.cov[(2, 2)], n_w / 4.0, epsilon = 1e-10);
            // Poissonian number fluctuations along the mean axis
            assert_abs_diff_eq!(well.cov[(0, 0)], n_w / 4.0, epsilon = 1e-10);
            assert_abs_diff_eq!(well.n_mean, n_w, epsilon = 1e-10);
        }
        assert!(sm.cross.amax() < 1e-10);
    }

    #[test]
    fn total_number_survives_beam_splitter() {
        for tau in [0.0, 0.25, 3.0] {
            let params = rb(c(2.2, -0.4), tau);
            let sm = dynamic_spin_moments(&params, FRAC_PI_2).unwrap();
            assert_abs_diff_eq!(
                sm.a.n_mean + sm.b.n_mean,
                4.0 * params.alpha[0].norm_sqr(),
                epsilon = 1e-10
            );
        }
    }
}
