//! Entanglement and squeezing signatures evaluated from moments.
//!
//! Both scenarios reduce their states to moment-level inputs
//! ([`InterwellMoments`] or [`SpinMoments`]) so a single implementation of
//! each witness serves the adiabatic and the dynamic preparation.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use nalgebra::{Matrix3, Rotation3, Vector3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{operator_matrix, OperatorKind, QuantumState, TwoModeState};

/// Denominators at or below this are treated as zero.
pub const DENOMINATOR_FLOOR: f64 = 1e-300;
/// Variance floor applied before taking logarithms.
pub const VARIANCE_FLOOR: f64 = 1e-300;
/// Lowest reported squeezing, in dB.
pub const DB_FLOOR: f64 = -300.0;
/// A witness certifies entanglement only below `1 - VERDICT_MARGIN`, so
/// rounding on a separable boundary state cannot produce a verdict.
pub const VERDICT_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriterionName {
    HilleryZubairy,
    Entropic,
    Product,
    Sum,
}

impl fmt::Display for CriterionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriterionName::HilleryZubairy => "E_HZ",
            CriterionName::Entropic => "E_entropic",
            CriterionName::Product => "E_product",
            CriterionName::Sum => "E_sum",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Sign pairing `(s1, s2)` of `J_A^theta s1 J_B^theta` and
/// `J_A^{theta+pi/2} s2 J_B^{theta+pi/2}`.
pub type SignPair = (Sign, Sign);

// Ties resolve to the first entry: difference at theta, sum at theta + pi/2.
const SIGN_PAIRS: [SignPair; 4] = [
    (Sign::Minus, Sign::Plus),
    (Sign::Plus, Sign::Minus),
    (Sign::Minus, Sign::Minus),
    (Sign::Plus, Sign::Plus),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: CriterionName,
    /// `None` marks an inconclusive witness (vanishing denominator).
    pub value: Option<f64>,
    pub entangled: Option<bool>,
    pub theta: Option<f64>,
    pub signs: Option<SignPair>,
}

impl CriterionResult {
    fn new(name: CriterionName, value: Option<f64>) -> Self {
        let value = value.map(|v| v.max(0.0));
        Self {
            name,
            value,
            entangled: value.map(|v| v < 1.0 - VERDICT_MARGIN),
            theta: None,
            signs: None,
        }
    }

    pub fn undefined(name: CriterionName) -> Self {
        Self::new(name, None)
    }

    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }
}

/// Interwell moments of the single-spin two-mode state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterwellMoments {
    /// `<a† b>`
    pub m_adb: C64,
    /// `<n_a n_b>`
    pub m_nanb: f64,
    pub m_na: f64,
    pub m_nb: f64,
    /// `<(N_A + N_B)^2>`
    pub m_n2: f64,
    /// `<(J_AB^Z)^2>`
    pub m_jz2: f64,
}

impl InterwellMoments {
    /// Moments of a fixed-N state. Fails if `N^2/4 - (J^Z)^2 = n_a n_b`
    /// does not hold to 1e-10 relative.
    pub fn from_state<S: QuantumState + ?Sized>(state: &S) -> Result<Self> {
        let basis = state.basis();
        let ev = |kind| state.expectation(&operator_matrix(kind, basis));
        let m = Self {
            m_adb: ev(OperatorKind::AdagB)?,
            m_nanb: ev(OperatorKind::NumberProduct)?.re,
            m_na: ev(OperatorKind::NumberA)?.re,
            m_nb: ev(OperatorKind::NumberB)?.re,
            m_n2: ev(OperatorKind::TotalSquared)?.re,
            m_jz2: ev(OperatorKind::JzSquared)?.re,
        };
        let gap = (0.25 * m.m_n2 - m.m_jz2 - m.m_nanb).abs();
        if gap > 1e-10 * m.m_n2.max(1.0) {
            return Err(Error::Numeric(format!(
                "inconsistent moments: N^2/4 - Jz^2 differs from n_a n_b by {gap:e}"
            )));
        }
        Ok(m)
    }

    /// Spin form of the HZ ratio, using `<J^X> = Re<a†b>`, `<J^Y> = Im<a†b>`.
    pub fn hz_spin_form(&self) -> Option<f64> {
        hz_spin_form(self.m_n2, self.m_jz2, self.m_adb.re, self.m_adb.im)
    }
}

/// `(<N^2>/4 - <(J^Z)^2>) / (<J^X>^2 + <J^Y>^2)`.
pub fn hz_spin_form(m_n2: f64, m_jz2: f64, jx: f64, jy: f64) -> Option<f64> {
    let den = jx * jx + jy * jy;
    (den >= DENOMINATOR_FLOOR).then(|| (0.25 * m_n2 - m_jz2) / den)
}

/// `<n_a n_b> / |<a† b>|^2`; entangled below 1.
pub fn hz_criterion(m: &InterwellMoments) -> CriterionResult {
    let den = m.m_adb.norm_sqr();
    let value = (den >= DENOMINATOR_FLOOR).then(|| m.m_nanb / den);
    CriterionResult::new(CriterionName::HilleryZubairy, value)
}

/// `1 - S / log2(N + 1)` for the well-A entropy `S` of a pure state.
pub fn entropic_criterion(state: &TwoModeState) -> Result<CriterionResult> {
    let entropy = state.entropy()?;
    let max = (state.basis().dim() as f64).log2();
    Ok(CriterionResult::new(CriterionName::Entropic, Some(1.0 - entropy / max)))
}

/// Covariance block of one spin in the Z-X squeezing plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneCovariance {
    pub zz: f64,
    pub xx: f64,
    pub zx: f64,
}

impl PlaneCovariance {
    /// `Var(cos t J^Z + sin t J^X)`
    pub fn variance(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        c * c * self.zz + s * s * self.xx + 2.0 * s * c * self.zx
    }
}

fn wrap_half_turn(theta: f64) -> f64 {
    theta - PI * ((theta + FRAC_PI_2) / PI).floor()
}

/// Squeezing angle in `[-pi/2, pi/2)` minimising `Var(J^theta)`.
///
/// `atan2(2 zx, zz - xx) / 2` is a principal axis; of it and its
/// orthogonal partner the one with the smaller variance is returned, keeping
/// the first on ties (so a fully isotropic block gives 0).
pub fn optimal_theta(cov: &PlaneCovariance) -> f64 {
    let axis = wrap_half_turn(0.5 * (2.0 * cov.zx).atan2(cov.zz - cov.xx));
    let partner = wrap_half_turn(axis + FRAC_PI_2);
    if cov.variance(partner) < cov.variance(axis) {
        partner
    } else {
        axis
    }
}

/// Unit vector of `J^theta = cos t J^Z + sin t J^X` in (X, Y, Z) components.
pub fn plane_direction(theta: f64) -> Vector3<f64> {
    let (s, c) = theta.sin_cos();
    Vector3::new(s, 0.0, c)
}

/// Local spin moments of one well. Components are ordered (X, Y, Z).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WellMoments {
    pub mean: Vector3<f64>,
    /// `<{J^P, J^Q}>/2 - <J^P><J^Q>`
    pub cov: Matrix3<f64>,
    pub n_mean: f64,
}

impl WellMoments {
    pub fn variance(&self, theta: f64) -> f64 {
        let u = plane_direction(theta);
        (u.transpose() * self.cov * u)[0]
    }

    pub fn plane(&self) -> PlaneCovariance {
        PlaneCovariance {
            zz: self.cov[(2, 2)],
            xx: self.cov[(0, 0)],
            zx: self.cov[(2, 0)],
        }
    }

    /// `Var(J^theta) Var(J^{theta+pi/2}) - <J^Y>^2 / 4`; non-negative for
    /// physical moments.
    pub fn heisenberg_margin(&self, theta: f64) -> f64 {
        self.variance(theta) * self.variance(theta + FRAC_PI_2) - 0.25 * self.mean.y * self.mean.y
    }

    fn rotated(&self, r: &Matrix3<f64>) -> Self {
        Self {
            mean: r * self.mean,
            cov: r * self.cov * r.transpose(),
            n_mean: self.n_mean,
        }
    }
}

/// Axes the product and sum criteria are evaluated in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    /// Each well is rotated so its mean spin points along +Y.
    #[default]
    MeanSpinAligned,
    /// Laboratory axes, no rotation.
    Literal,
}

/// First and second moments of the local spins at wells A and B.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinMoments {
    pub a: WellMoments,
    pub b: WellMoments,
    /// `crossCov(P, Q) = <J_A^P J_B^Q> - <J_A^P><J_B^Q>`
    pub cross: Matrix3<f64>,
}

/// Minimal rotation taking `mean` to +Y; identity for a vanishing mean.
fn align_to_y(mean: &Vector3<f64>) -> Matrix3<f64> {
    let norm = mean.norm();
    if norm <= DENOMINATOR_FLOOR {
        return Matrix3::identity();
    }
    match Rotation3::rotation_between(mean, &Vector3::y()) {
        Some(r) => r.into_inner(),
        // antiparallel to +Y
        None => Rotation3::from_axis_angle(&Vector3::z_axis(), PI).into_inner(),
    }
}

impl SpinMoments {
    pub fn in_frame(&self, frame: Frame) -> SpinMoments {
        match frame {
            Frame::Literal => *self,
            Frame::MeanSpinAligned => {
                let ra = align_to_y(&self.a.mean);
                let rb = align_to_y(&self.b.mean);
                SpinMoments {
                    a: self.a.rotated(&ra),
                    b: self.b.rotated(&rb),
                    cross: ra * self.cross * rb.transpose(),
                }
            }
        }
    }

    /// `Var(J_A^theta + s J_B^theta)`.
    pub fn combined_variance(&self, theta: f64, sign: Sign) -> f64 {
        let u = plane_direction(theta);
        let local = (u.transpose() * (self.a.cov + self.b.cov) * u)[0];
        let cross = (u.transpose() * self.cross * u)[0];
        (local + 2.0 * sign.factor() * cross).max(0.0)
    }

    /// Z-X block of the difference spin `J_A - J_B`.
    pub fn difference_plane(&self) -> PlaneCovariance {
        let d = self.a.cov + self.b.cov - (self.cross + self.cross.transpose());
        PlaneCovariance {
            zz: d[(2, 2)],
            xx: d[(0, 0)],
            zx: d[(2, 0)],
        }
    }

    /// `|<J_A^Y>| + |<J_B^Y>|`
    pub fn mean_spin_sum(&self) -> f64 {
        self.a.mean.y.abs() + self.b.mean.y.abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Squeezing {
    /// `10 log10[Var(J_A^theta - J_B^theta) / n0]`
    pub plus_db: f64,
    /// `10 log10[Var(J_A^{theta+pi/2} + J_B^{theta+pi/2}) / n0]`
    pub minus_db: f64,
    /// Set when the corresponding value hit [`DB_FLOOR`].
    pub plus_floored: bool,
    pub minus_floored: bool,
}

fn to_db(variance: f64, n0: f64) -> (f64, bool) {
    let db = 10.0 * (variance.max(VARIANCE_FLOOR) / n0).log10();
    if db <= DB_FLOOR {
        (DB_FLOOR, true)
    } else {
        (db, false)
    }
}

/// Squeezing relative to the shot noise `n0 = (|<J_A^Y>| + |<J_B^Y>|)/2`;
/// `None` when `n0` vanishes.
pub fn squeezing_db(sm: &SpinMoments, theta: f64) -> Option<Squeezing> {
    let n0 = 0.5 * sm.mean_spin_sum();
    if n0 <= DENOMINATOR_FLOOR {
        return None;
    }
    let (plus_db, plus_floored) = to_db(sm.combined_variance(theta, Sign::Minus), n0);
    let (minus_db, minus_floored) = to_db(sm.combined_variance(theta + FRAC_PI_2, Sign::Plus), n0);
    Some(Squeezing {
        plus_db,
        minus_db,
        plus_floored,
        minus_floored,
    })
}

fn best_pairing(
    name: CriterionName,
    sm: &SpinMoments,
    theta: f64,
    combine: impl Fn(f64, f64) -> f64,
) -> CriterionResult {
    let den = sm.mean_spin_sum();
    if den <= DENOMINATOR_FLOOR {
        let mut r = CriterionResult::undefined(name);
        r.theta = Some(theta);
        return r;
    }
    let (signs, value) = SIGN_PAIRS
        .iter()
        .map(|&(s1, s2)| {
            let v1 = sm.combined_variance(theta, s1);
            let v2 = sm.combined_variance(theta + FRAC_PI_2, s2);
            ((s1, s2), combine(v1, v2) / den)
        })
        .fold(None::<(SignPair, f64)>, |best, cand| match best {
            Some(b) if b.1 <= cand.1 => Some(b),
            _ => Some(cand),
        })
        .expect("four pairings");
    let mut r = CriterionResult::new(name, Some(value));
    r.theta = Some(theta);
    r.signs = Some(signs);
    r
}

/// Heisenberg-product witness, minimised over the four sign pairings.
pub fn product_criterion(sm: &SpinMoments, theta: f64) -> CriterionResult {
    // capping at the arithmetic mean removes one-ulp AM-GM inversions when v1 == v2
    best_pairing(CriterionName::Product, sm, theta, |v1, v2| {
        (2.0 * (v1 * v2).sqrt()).min(v1 + v2)
    })
}

/// Sum (inseparability) witness, minimised over the four sign pairings.
pub fn sum_criterion(sm: &SpinMoments, theta: f64) -> CriterionResult {
    best_pairing(CriterionName::Sum, sm, theta, |v1, v2| v1 + v2)
}
