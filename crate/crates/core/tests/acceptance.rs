//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process fails if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twowell::adiabatic::{adiabatic_sweep, build_hamiltonian, ground_state, thermal_state, ThermalSpec};
use twowell::criteria::{
    entropic_criterion, hz_criterion, hz_spin_form, optimal_theta, product_criterion, sum_criterion, CriterionResult,
    Frame, InterwellMoments, SpinMoments,
};
use twowell::fock::{operator_matrix, DensityMatrix, FockBasis, OperatorKind, QuantumState, TwoModeState};
use twowell::kerr::{
    default_cutoff, dynamic_spin_moments, dynamic_sweep, fock_oracle, max_deviation, DynamicRow, GRatios, KerrParams,
    SpinMomentPlan,
};
use twowell::runner::{preset, resolve, Grid, Resolved, ResolvedDynamic};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Check {
    ensure(
        elapsed < limit,
        format!("{detail}, {:.2} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs()),
    )
}

fn preset_dynamic(name: &str) -> ResolvedDynamic {
    match resolve(&preset(name).unwrap()).unwrap() {
        Resolved::Dynamic(d) => d,
        _ => panic!("{name} is not a dynamic preset"),
    }
}

fn sweep(d: &ResolvedDynamic, tau: &[f64]) -> Vec<DynamicRow> {
    let base = KerrParams::uniform(C64::new(d.alpha, 0.0), d.g_ratios, d.n_a, 0.0).unwrap();
    dynamic_sweep(&base, tau, d.phi, d.frame).unwrap()
}

fn open_grid(d: &ResolvedDynamic) -> Vec<f64> {
    d.tau.iter().copied().filter(|&t| t > 0.0).collect()
}

fn argmin(xs: &[(f64, Option<f64>)]) -> (f64, f64) {
    xs.iter()
        .filter_map(|&(x, v)| v.map(|v| (x, v)))
        .fold((f64::NAN, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best })
}

fn landmark() -> Check {
    let start = Instant::now();
    let grid = Grid::step(-6.0, 2.0, 0.05).values().unwrap();
    let rows = adiabatic_sweep(100, &grid, &[0.0], 50.0).unwrap();
    let elapsed = start.elapsed();
    let hz: Vec<_> = rows.iter().map(|r| (r.ng_over_kappa, r.e_hz)).collect();
    let ent: Vec<_> = rows.iter().map(|r| (r.ng_over_kappa, r.e_entropic)).collect();
    let (x_hz, v_hz) = argmin(&hz);
    let (x_ent, v_ent) = argmin(&ent);
    let window = -3.0..=-1.0;
    let detail = format!("min E_HZ {v_hz:.5} at {x_hz:.2}, min E_entropic {v_ent:.5} at {x_ent:.2}");
    ensure(window.contains(&x_hz) && window.contains(&x_ent), detail.clone())?;
    within(elapsed, Duration::from_secs(60), detail)
}

fn thermal_ordering() -> Check {
    let start = Instant::now();
    let rows = adiabatic_sweep(100, &[-2.0], &[0.0, 50.0, 80.0], 50.0).unwrap();
    let e: Vec<f64> = rows.iter().map(|r| r.e_hz.unwrap()).collect();
    let detail = format!("E_HZ(0, 50, 80 nK) = {:.6}, {:.6}, {:.6}", e[0], e[1], e[2]);
    ensure(e[0] < e[1] && e[1] < e[2] && e[0] < 1.0, detail.clone())?;
    within(start.elapsed(), Duration::from_secs(60), detail)
}

fn noninteracting_closed_form() -> Check {
    let mut worst: f64 = 0.0;
    for n in [2usize, 10, 100] {
        let psi = ground_state(&build_hamiltonian(n, 0.0).unwrap()).unwrap();
        let hz = hz_criterion(&InterwellMoments::from_state(&psi).unwrap())
            .value
            .unwrap();
        worst = worst.max((hz - (n as f64 - 1.0) / n as f64).abs());
    }
    ensure(worst < 1e-9, format!("max |E_HZ - (N-1)/N| = {worst:.2e}"))
}

/// Independent spin form of the HZ ratio, built from explicit `J^X`, `J^Y`
/// matrices rather than the `<a†b>` entry used by the moment form.
fn independent_spin_form<S: QuantumState>(state: &S) -> Option<f64> {
    let b = state.basis();
    let adb = operator_matrix(OperatorKind::AdagB, b);
    let bda = operator_matrix(OperatorKind::BdagA, b);
    let jx = (&adb + &bda) * C64::new(0.5, 0.0);
    let jy = (&adb - &bda) * C64::new(0.0, -0.5);
    let dim = b.dim();
    let jz = DMatrix::from_fn(dim, dim, |i, j| {
        let k = b.occupations(i).unwrap().0 as f64;
        if i == j {
            C64::new(k - 0.5 * b.n_atoms() as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let n = b.n_atoms() as f64;
    let ev = |m: &DMatrix<C64>| state.expectation(m).unwrap().re;
    hz_spin_form(n * n, ev(&(&jz * &jz)), ev(&jx), ev(&jy))
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn hz_form_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let basis = FockBasis::new(30).unwrap();
    let mut worst: f64 = 0.0;
    let mut compare = |m: Option<f64>, s: Option<f64>| match (m, s) {
        (Some(m), Some(s)) => {
            worst = worst.max(relative(m, s));
            true
        }
        (None, None) => true,
        _ => false,
    };
    let mut consistent = true;
    for _ in 0..100 {
        let amps = DVector::from_fn(basis.dim(), |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let psi = TwoModeState::normalized(basis, amps).unwrap();
        let moment = hz_criterion(&InterwellMoments::from_state(&psi).unwrap()).value;
        consistent &= compare(moment, independent_spin_form(&psi));
    }
    for _ in 0..20 {
        let h = build_hamiltonian(30, rng.gen_range(-6.0..2.0) / 30.0).unwrap();
        let rho: DensityMatrix = thermal_state(&h, ThermalSpec::at(rng.gen_range(0.0..200.0)).unwrap()).unwrap();
        let moment = hz_criterion(&InterwellMoments::from_state(&rho).unwrap()).value;
        consistent &= compare(moment, independent_spin_form(&rho));
    }
    ensure(
        consistent && worst < 1e-10,
        format!("120 states, max relative difference {worst:.2e}"),
    )
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let plan = SpinMomentPlan::new(FRAC_PI_2);
    let taus: Vec<f64> = (1..=20).map(|k| 0.5 * k as f64).collect();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for a2 in [1.0f64, 4.0, 9.0, 16.0] {
        for g in [GRatios::rubidium(), GRatios::rubidium().without_cross_coupling()] {
            for &tau in &taus {
                let params = KerrParams::uniform(C64::new(a2.sqrt(), 0.0), g, 2.0 * a2, tau).unwrap();
                let engine = plan.evaluate(&params).unwrap();
                let oracle = fock_oracle(&params, FRAC_PI_2, default_cutoff(a2)).unwrap();
                // 1e-8 relative, 1e-10 absolute for entries below 1e-2
                worst = worst.max(max_deviation(&engine, &oracle, 1e-2));
                count += 1;
            }
        }
    }
    let detail = format!("{count} points, max deviation {worst:.2e}");
    ensure(worst < 1e-8, detail.clone())?;
    within(start.elapsed(), Duration::from_secs(300), detail)
}

fn coherent_baseline() -> Check {
    let fig3 = preset_dynamic("fig3");
    let mut worst_db: f64 = 0.0;
    let mut worst_e: f64 = 0.0;
    for n_a in [8.0, fig3.n_a] {
        let d = ResolvedDynamic {
            n_a,
            alpha: (n_a / 2.0).sqrt(),
            ..fig3.clone()
        };
        let row = &sweep(&d, &[0.0])[0];
        let s = row.squeezing.ok_or("squeezing undefined at tau = 0")?;
        worst_db = worst_db.max(s.plus_db.abs()).max(s.minus_db.abs());
        for e in [&row.product, &row.sum] {
            worst_e = worst_e.max((e.value.ok_or("criterion undefined at tau = 0")? - 1.0).abs());
        }
    }
    ensure(
        worst_db < 1e-6 && worst_e < 1e-9,
        format!("|alpha|^2 = 4 and 100: max |S| = {worst_db:.2e} dB, max |E - 1| = {worst_e:.2e}"),
    )
}

fn dynamic_entanglement() -> Check {
    let start = Instant::now();
    let fig3 = preset_dynamic("fig3");
    let rows = sweep(&fig3, &open_grid(&fig3));
    let elapsed = start.elapsed();
    let entangled = rows.iter().filter(|r| r.product.entangled == Some(true)).count();
    let squeezed = rows
        .iter()
        .filter(|r| r.squeezing.is_some_and(|s| s.plus_db < 0.0))
        .count();
    let best = argmin(&rows.iter().map(|r| (r.tau, r.product.value)).collect::<Vec<_>>());
    let detail = format!(
        "{entangled}/{} points with E_product < 1 (min {:.4} at tau {:.3}), {squeezed} with S+ < 0 dB",
        rows.len(),
        best.1,
        best.0
    );
    ensure(entangled > 0 && squeezed > 0, detail.clone())?;
    within(elapsed, Duration::from_secs(60), detail)
}

fn cross_coupling_comparison() -> Check {
    let fig3 = preset_dynamic("fig3");
    let fig4 = preset_dynamic("fig4");
    let grid = open_grid(&fig3);
    let min = |d: &ResolvedDynamic| {
        argmin(
            &sweep(d, &grid)
                .iter()
                .map(|r| (r.tau, r.product.value))
                .collect::<Vec<_>>(),
        )
        .1
    };
    let (rb, free) = (min(&fig3), min(&fig4));
    ensure(
        free < rb,
        format!("min E_product: g12 = 0 gives {free:.4}, Rb g12 gives {rb:.4}"),
    )
}

fn hierarchy_violations(rows: &[DynamicRow]) -> (usize, usize) {
    let mut checked = 0;
    let mut bad = 0;
    for r in rows {
        if let (Some(p), Some(s)) = (r.product.value, r.sum.value) {
            checked += 1;
            if p > s {
                bad += 1;
            }
        }
    }
    (checked, bad)
}

fn dynamic_rows_for_properties() -> Vec<DynamicRow> {
    let mut rows = Vec::new();
    for name in ["fig3", "fig4"] {
        let d = preset_dynamic(name);
        rows.extend(sweep(&d, &d.tau));
        rows.extend(sweep(
            &ResolvedDynamic {
                frame: Frame::Literal,
                ..d.clone()
            },
            &d.tau,
        ));
        let long: Vec<f64> = (0..=200).map(|i| 0.05 * i as f64).collect();
        rows.extend(sweep(&d, &long));
    }
    rows
}

fn criterion_hierarchy() -> Check {
    let (checked, bad) = hierarchy_violations(&dynamic_rows_for_properties());
    ensure(
        bad == 0 && checked > 0,
        format!("{checked} defined points, {bad} with E_product > E_sum"),
    )
}

fn heisenberg_bound() -> Check {
    let rows = dynamic_rows_for_properties();
    let mut worst = f64::INFINITY;
    let mut evaluated = 0;
    for r in &rows {
        for well in [r.moments.a, r.moments.b] {
            let angles = std::iter::once(r.theta).chain((0..36).map(|k| k as f64 * PI / 36.0));
            for theta in angles {
                worst = worst.min(well.heisenberg_margin(theta));
                evaluated += 1;
            }
        }
    }
    ensure(
        worst >= -1e-9,
        format!("{evaluated} (well, tau, theta) triples, min margin {worst:.3e}"),
    )
}

fn never_entangled(results: &[CriterionResult]) -> bool {
    results.iter().all(|r| r.entangled != Some(true))
}

fn separable_soundness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut false_positives = 0;
    let mut worst: f64 = f64::INFINITY;
    let g = GRatios::rubidium();
    for _ in 0..200 {
        let alpha: [C64; 4] =
            std::array::from_fn(|_| C64::from_polar(rng.gen_range(0.0..7.0), rng.gen_range(0.0..TAU)));
        let phi = rng.gen_range(0.0..TAU);
        let params = KerrParams::new(alpha, g, 50.0, 0.0).unwrap();
        let sm: SpinMoments = dynamic_spin_moments(&params, phi).unwrap();
        for frame in [Frame::MeanSpinAligned, Frame::Literal] {
            let framed = sm.in_frame(frame);
            let mut thetas = vec![optimal_theta(&framed.difference_plane())];
            thetas.extend((0..12).map(|_| rng.gen_range(-FRAC_PI_2..FRAC_PI_2)));
            for theta in thetas {
                let results = [product_criterion(&framed, theta), sum_criterion(&framed, theta)];
                for v in results.iter().filter_map(|r| r.value) {
                    worst = worst.min(v);
                }
                if !never_entangled(&results) {
                    false_positives += 1;
                }
            }
        }
    }
    // number states are the separable states of the fixed-N two-mode space
    for n in [1usize, 7, 30] {
        let basis = FockBasis::new(n).unwrap();
        for k in 0..=n {
            let psi = TwoModeState::number_state(basis, k).unwrap();
            let hz = hz_criterion(&InterwellMoments::from_state(&psi).unwrap());
            let ent = entropic_criterion(&psi).unwrap();
            if !never_entangled(&[hz, ent]) {
                false_positives += 1;
            }
        }
    }
    ensure(
        false_positives == 0,
        format!("{false_positives} false positives, min E over coherent products {worst:.12}"),
    )
}

fn kerr_revival() -> Check {
    let g = GRatios {
        g11: 1.0,
        g22: 1.0,
        g12: 0.0,
    };
    let mut worst: f64 = 0.0;
    for (n_a, phi) in [(8.0, FRAC_PI_2), (200.0, FRAC_PI_2), (50.0, 1.0)] {
        let p0 = KerrParams::from_well_population(n_a, g, 0.0).unwrap();
        // g11 t = tau / N_A = 2 pi
        let p1 = p0.with_tau(TAU * n_a);
        let m0 = dynamic_spin_moments(&p0, phi).unwrap();
        let m1 = dynamic_spin_moments(&p1, phi).unwrap();
        worst = worst.max(max_deviation(&m0, &m1, 1e-2));
    }
    ensure(worst < 1e-8, format!("max deviation after one revival {worst:.2e}"))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("critical-point landmark", landmark),
        ("thermal ordering", thermal_ordering),
        ("noninteracting closed form", noninteracting_closed_form),
        ("HZ form equivalence", hz_form_equivalence),
        ("oracle equivalence", oracle_equivalence),
        ("coherent baseline", coherent_baseline),
        ("dynamic entanglement exists", dynamic_entanglement),
        ("cross-coupling comparison", cross_coupling_comparison),
        ("criterion hierarchy", criterion_hierarchy),
        ("Heisenberg bound", heisenberg_bound),
        ("separable-state soundness", separable_soundness),
        ("Kerr revival", kerr_revival),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
