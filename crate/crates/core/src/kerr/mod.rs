//! Dynamic four-mode scenario: coherent initial state, per-well Kerr
//! evolution, a 50:50 beam splitter between wells, then local spin
//! measurements.

pub mod algebra;
pub mod engine;
pub mod oracle;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

pub use algebra::{beamsplitter_expand, LinearModeMap, Mode, Monomial, Polynomial};
pub use engine::{
    dynamic_spin_moments, evolve_monomial, kerr_kernel, pre_split_populations, GRatios, KerrParams, MomentTable,
    SpinMomentPlan, TableFrame,
};
pub use oracle::{default_cutoff, fock_oracle};

use crate::criteria::{
    optimal_theta, product_criterion, squeezing_db, sum_criterion, CriterionResult, Frame, SpinMoments, Squeezing,
    WellMoments,
};
use crate::error::{invalid, Error, Result};

/// Raw spin expectations: `first[w][p] = <J_w^p>`, `number[w] = <N_w>`,
/// `second[w][v][p][q] = <J_w^p J_v^q>` for `(w, v)` in (A,A), (B,B), (A,B).
#[derive(Clone, Copy, Debug, Default)]
pub struct RawSpinExpectations {
    pub first: [[C64; 3]; 2],
    pub number: [C64; 2],
    pub second: [[[[C64; 3]; 3]; 2]; 2],
}

/// Means, symmetrised covariances and cross covariances from raw moments.
pub fn assemble_spin_moments(raw: &RawSpinExpectations) -> SpinMoments {
    let mean = |w: usize| Vector3::from_fn(|p, _| raw.first[w][p].re);
    let well = |w: usize| {
        let m = mean(w);
        let cov = Matrix3::from_fn(|p, q| 0.5 * (raw.second[w][w][p][q] + raw.second[w][w][q][p]).re - m[p] * m[q]);
        WellMoments {
            mean: m,
            cov,
            n_mean: raw.number[w].re,
        }
    };
    let (ma, mb) = (mean(0), mean(1));
    let cross = Matrix3::from_fn(|p, q| raw.second[0][1][p][q].re - ma[p] * mb[q]);
    SpinMoments {
        a: well(0),
        b: well(1),
        cross,
    }
}

/// One `tau` point of the dynamic sweep.
#[derive(Clone, Debug)]
pub struct DynamicRow {
    pub tau: f64,
    /// `None` when the shot-noise reference vanishes.
    pub squeezing: Option<Squeezing>,
    pub theta: f64,
    pub product: CriterionResult,
    pub sum: CriterionResult,
    /// Moments in the frame the criteria were evaluated in.
    pub moments: SpinMoments,
}

/// Evaluates squeezing and both EPR criteria at one set of moments.
///
/// The squeezing angle minimises the variance of `J_A - J_B` in the Z-X
/// plane of the chosen frame.
pub fn evaluate_criteria(moments: &SpinMoments, frame: Frame, tau: f64) -> DynamicRow {
    let framed = moments.in_frame(frame);
    let theta = optimal_theta(&framed.difference_plane());
    DynamicRow {
        tau,
        squeezing: squeezing_db(&framed, theta),
        theta,
        product: product_criterion(&framed, theta),
        sum: sum_criterion(&framed, theta),
        moments: framed,
    }
}

/// Sweeps `tau` over `tau_grid`; `base.tau` is ignored. Rows keep grid order.
pub fn dynamic_sweep(base: &KerrParams, tau_grid: &[f64], phi: f64, frame: Frame) -> Result<Vec<DynamicRow>> {
    if tau_grid.is_empty() {
        return Err(invalid("tau grid must be non-empty"));
    }
    let plan = SpinMomentPlan::new(phi);
    tau_grid
        .par_iter()
        .map(|&tau| {
            let params = KerrParams::new(base.alpha, base.g, base.n_ref, tau)?;
            let sm = plan.evaluate(&params).map_err(|e| match e {
                Error::Numeric(msg) => Error::Numeric(format!("at tau = {tau}: {msg}")),
                other => other,
            })?;
            Ok(evaluate_criteria(&sm, frame, tau))
        })
        .collect()
}

/// Scale-aware deviation: relative for entries of order one or larger,
/// absolute (scaled by `floor`) near zero.
pub fn deviation(x: f64, y: f64, floor: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(floor)
}

/// All scalar entries of a [`SpinMoments`], in a fixed order.
pub fn flatten_moments(sm: &SpinMoments) -> Vec<f64> {
    let mut out = Vec::with_capacity(47);
    for w in [&sm.a, &sm.b] {
        out.extend(w.mean.iter());
        out.extend(w.cov.iter());
        out.push(w.n_mean);
    }
    out.extend(sm.cross.iter());
    out
}

/// Largest [`deviation`] between corresponding entries.
pub fn max_deviation(x: &SpinMoments, y: &SpinMoments, floor: f64) -> f64 {
    flatten_moments(x)
        .iter()
        .zip(flatten_moments(y))
        .map(|(a, b)| deviation(*a, b, floor))
        .fold(0.0, f64::max)
}
