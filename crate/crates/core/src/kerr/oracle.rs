//! Brute-force Fock-truncation ground truth for the dynamic scenario.
//!
//! Each well is stored as a truncated two-mode amplitude array, evolved with
//! the exact Kerr energies, and spin moments are built from raw operator
//! strings applied to those arrays. Nothing here goes through the normal
//! ordering or the closed-form kernel of [`super::engine`].

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;

use super::algebra::LinearModeMap;
use super::engine::KerrParams;
use super::{assemble_spin_moments, RawSpinExpectations};
use crate::criteria::SpinMoments;
use crate::error::{invalid, Error, Result};

/// Largest `|alpha|^2` the oracle accepts.
pub const ORACLE_MAX_ALPHA_SQ: f64 = 25.0;
/// Largest truncated probability tolerated per mode.
pub const TRUNCATION_LIMIT: f64 = 1e-10;
// room for the raising operators of a quartic operator string
const PAD: usize = 4;

/// Cutoff comfortably above `|alpha|^2 + 10 |alpha|`.
pub fn default_cutoff(alpha_sq: f64) -> usize {
    (alpha_sq + 10.0 * alpha_sq.sqrt()).ceil() as usize + 10
}

/// Amplitudes of one well's two modes, `psi[n1 * dim + n2]`.
#[derive(Clone, Debug)]
struct WellState {
    dim: usize,
    psi: Vec<C64>,
}

impl WellState {
    fn zeros(dim: usize) -> Self {
        Self {
            dim,
            psi: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    /// Applies `a_local` or `a_local†` (`local` = 0 or 1).
    fn apply(&self, local: usize, dagger: bool) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for n1 in 0..d {
            for n2 in 0..d {
                let v = self.psi[n1 * d + n2];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                let (k, other) = if local == 0 { (n1, n2) } else { (n2, n1) };
                let (target, factor) = if dagger {
                    if k + 1 >= d {
                        continue;
                    }
                    (k + 1, ((k + 1) as f64).sqrt())
                } else {
                    if k == 0 {
                        continue;
                    }
                    (k - 1, (k as f64).sqrt())
                };
                let idx = if local == 0 {
                    target * d + other
                } else {
                    other * d + target
                };
                out.psi[idx] += v * factor;
            }
        }
        out
    }

    fn inner(&self, other: &Self) -> C64 {
        self.psi.iter().zip(&other.psi).map(|(x, y)| x.conj() * y).sum()
    }
}

fn truncated_coherent(alpha: C64, cutoff: usize) -> Result<Vec<C64>> {
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut v = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    amps.push(v);
    for n in 1..=cutoff {
        v *= alpha / (n as f64).sqrt();
        amps.push(v);
    }
    let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let loss = (1.0 - kept).max(0.0);
    if loss > TRUNCATION_LIMIT {
        return Err(Error::InsufficientCutoff {
            cutoff,
            loss,
            limit: TRUNCATION_LIMIT,
        });
    }
    Ok(amps)
}

fn evolved_well(alphas: [C64; 2], gt: [[f64; 2]; 2], cutoff: usize) -> Result<WellState> {
    let c1 = truncated_coherent(alphas[0], cutoff)?;
    let c2 = truncated_coherent(alphas[1], cutoff)?;
    let dim = cutoff + 1 + PAD;
    let mut state = WellState::zeros(dim);
    for (n1, a1) in c1.iter().enumerate() {
        for (n2, a2) in c2.iter().enumerate() {
            let (x1, x2) = (n1 as f64, n2 as f64);
            let energy = 0.5 * gt[0][0] * x1 * (x1 - 1.0) + 0.5 * gt[1][1] * x2 * (x2 - 1.0) + gt[0][1] * x1 * x2;
            state.psi[n1 * dim + n2] = a1 * a2 * C64::from_polar(1.0, -energy);
        }
    }
    Ok(state)
}

/// `c_k† c_l |psi_A psi_B>` as a product of per-well vectors.
fn bilinear_image(wells: &[WellState; 2], k: usize, l: usize) -> [WellState; 2] {
    let mut out = wells.clone();
    out[l / 2] = out[l / 2].apply(l % 2, false);
    out[k / 2] = out[k / 2].apply(k % 2, true);
    out
}

fn product_inner(x: &[WellState; 2], y: &[WellState; 2]) -> C64 {
    x[0].inner(&y[0]) * x[1].inner(&y[1])
}

/// `h` for `(J^X, J^Y, J^Z)` on local modes `(first, second)` as 4x4 matrices.
fn spin_coefficients(first: usize, second: usize) -> [Matrix4<C64>; 3] {
    let z = C64::new(0.0, 0.0);
    let mut jx = Matrix4::from_element(z);
    let mut jy = Matrix4::from_element(z);
    let mut jz = Matrix4::from_element(z);
    jx[(first, second)] = C64::new(0.5, 0.0);
    jx[(second, first)] = C64::new(0.5, 0.0);
    jy[(first, second)] = C64::new(0.0, -0.5);
    jy[(second, first)] = C64::new(0.0, 0.5);
    jz[(first, first)] = C64::new(0.5, 0.0);
    jz[(second, second)] = C64::new(-0.5, 0.0);
    [jx, jy, jz]
}

/// Truncated-Fock evaluation of the same [`SpinMoments`] that
/// [`super::dynamic_spin_moments`] computes.
pub fn fock_oracle(params: &KerrParams, phi: f64, cutoff: usize) -> Result<SpinMoments> {
    if let Some(a) = params.alpha.iter().find(|a| a.norm_sqr() > ORACLE_MAX_ALPHA_SQ) {
        return Err(invalid(format!(
            "oracle is limited to |alpha|^2 <= {ORACLE_MAX_ALPHA_SQ}, got {}",
            a.norm_sqr()
        )));
    }
    let gt = params.coupling_times();
    let wells = [
        evolved_well([params.alpha[0], params.alpha[1]], gt, cutoff)?,
        evolved_well([params.alpha[2], params.alpha[3]], gt, cutoff)?,
    ];

    // images[k][l] = c_k† c_l |psi>
    let images: Vec<Vec<[WellState; 2]>> = (0..4)
        .map(|k| (0..4).map(|l| bilinear_image(&wells, k, l)).collect())
        .collect();
    let mut two_point = [[C64::new(0.0, 0.0); 4]; 4];
    for (k, row) in two_point.iter_mut().enumerate() {
        for (l, v) in row.iter_mut().enumerate() {
            *v = product_inner(&wells, &images[k][l]);
        }
    }
    // <c_r† c_s c_k† c_l> = <c_s† c_r psi | c_k† c_l psi>
    let mut gram = vec![C64::new(0.0, 0.0); 256];
    for r in 0..4 {
        for s in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    gram[((r * 4 + s) * 4 + k) * 4 + l] = product_inner(&images[s][r], &images[k][l]);
                }
            }
        }
    }

    // post-splitter spins pulled back onto the pre-splitter modes: U† h U
    let u = LinearModeMap::beam_splitter(phi).u;
    let u = Matrix4::from_fn(|i, j| u[i][j]);
    let local = [spin_coefficients(0, 1), spin_coefficients(2, 3)];
    let pulled: [[Matrix4<C64>; 3]; 2] =
        std::array::from_fn(|w| std::array::from_fn(|p| u.adjoint() * local[w][p] * u));
    let number: [Matrix4<C64>; 2] = std::array::from_fn(|w| {
        let mut h = Matrix4::from_element(C64::new(0.0, 0.0));
        h[(2 * w, 2 * w)] = C64::new(1.0, 0.0);
        h[(2 * w + 1, 2 * w + 1)] = C64::new(1.0, 0.0);
        u.adjoint() * h * u
    });

    let first_moment = |m: &Matrix4<C64>| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..4 {
            for s in 0..4 {
                acc += m[(r, s)] * two_point[r][s];
            }
        }
        acc
    };
    let second_moment = |p: &Matrix4<C64>, q: &Matrix4<C64>| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..4 {
            for s in 0..4 {
                let c1 = p[(r, s)];
                if c1 == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..4 {
                    for l in 0..4 {
                        acc += c1 * q[(k, l)] * gram[((r * 4 + s) * 4 + k) * 4 + l];
                    }
                }
            }
        }
        acc
    };

    let mut raw = RawSpinExpectations::default();
    for w in 0..2 {
        raw.number[w] = first_moment(&number[w]);
        raw.first[w] = pulled[w].each_ref().map(first_moment);
    }
    for (w, v) in [(0, 0), (1, 1), (0, 1)] {
        for p in 0..3 {
            for q in 0..3 {
                raw.second[w][v][p][q] = second_moment(&pulled[w][p], &pulled[v][q]);
            }
        }
    }
    Ok(assemble_spin_moments(&raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kerr::GRatios;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn params(alpha: f64, tau: f64) -> KerrParams {
        KerrParams::uniform(C64::new(alpha, 0.0), GRatios::rubidium(), 8.0, tau).unwrap()
    }

    #[test]
    fn zero_time_coherent_moments() {
        let sm = fock_oracle(&params(2.0, 0.0), FRAC_PI_2, default_cutoff(4.0)).unwrap();
        for well in [sm.a, sm.b] {
            assert_abs_diff_eq!(well.mean.x, 4.0, epsilon = 1e-12);
            assert_abs_diff_eq!(well.cov[(2, 2)], 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(well.cov[(1, 1)], 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(well.n_mean, 8.0, epsilon = 1e-12);
        }
        assert!(sm.cross.amax() < 1e-12);
    }

    #[test]
    fn cutoff_below_mean_number_is_rejected() {
        let err = fock_oracle(&params(2.0, 0.5), FRAC_PI_2, 3).unwrap_err();
        assert!(matches!(err, Error::InsufficientCutoff { cutoff: 3, .. }));
    }

    #[test]
    fn large_amplitude_rejected() {
        assert!(matches!(
            fock_oracle(&params(6.0, 0.5), FRAC_PI_2, 200),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn ladder_operators_on_truncated_well() {
        let mut w = WellState::zeros(6);
        w.psi[2 * 6 + 1] = C64::new(1.0, 0.0); // |2, 1>
        let down = w.apply(0, false);
        assert_abs_diff_eq!(down.psi[6 + 1].re, 2f64.sqrt());
        let up = w.apply(1, true);
        assert_abs_diff_eq!(up.psi[2 * 6 + 2].re, 2f64.sqrt());
        // <a a†> - <a† a> = 1 on this vector
        let a_adag = w.apply(0, true).apply(0, false);
        let adag_a = w.apply(0, false).apply(0, true);
        assert_abs_diff_eq!((a_adag.inner(&w) - adag_a.inner(&w)).re, 1.0, epsilon = 1e-14);
    }
}
