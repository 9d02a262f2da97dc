//! Acceptance suite: one test per shipped claim, each printing a PASS/FAIL
//! line with the measured quantity (run with `--nocapture` to see them all).
//!
//! The three production runs (Cauchy compact, Cauchy monotone, Gaussian
//! baseline) are shared across criteria through lazy fixtures.

use frackpp_core::*;
use std::sync::OnceLock;
use std::time::Instant;

struct TimedRun {
    out: RunOutput,
    seconds: f64,
}

fn compact_run() -> &'static TimedRun {
    static RUN: OnceLock<TimedRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let config = SimulationConfig {
            alpha: 0.5,
            force_tabulated: false,
            reaction: "logistic".into(),
            initial: InitialCondition::Compact { support_radius: 1.0 },
            dt: 0.05,
            t_final: 14.0,
            snapshot_times: (0..=14).map(|i| i as f64).collect(),
            levels: vec![0.25, 0.5, 0.75],
            grid: GradedGridSpec::symmetric(4.0, 0.02, 1.005, 2.0e5),
            boundary_mismatch_tol: 0.05,
        };
        let t0 = Instant::now();
        let out = run(&config).expect("compact run");
        TimedRun {
            out,
            seconds: t0.elapsed().as_secs_f64(),
        }
    })
}

fn monotone_run() -> &'static TimedRun {
    static RUN: OnceLock<TimedRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let config = SimulationConfig {
            alpha: 0.5,
            force_tabulated: false,
            reaction: "logistic".into(),
            initial: InitialCondition::MonotoneRamp,
            dt: 0.05,
            t_final: 14.0,
            snapshot_times: (0..=14).map(|i| i as f64).collect(),
            levels: vec![0.25, 0.5, 0.75],
            grid: GradedGridSpec {
                core_half_width: 4.0,
                core_spacing: 0.02,
                stretch: 1.005,
                left_width: 1.3e7,
                right_width: 200.0,
            },
            boundary_mismatch_tol: 0.05,
        };
        let t0 = Instant::now();
        let out = run(&config).expect("monotone run");
        TimedRun {
            out,
            seconds: t0.elapsed().as_secs_f64(),
        }
    })
}

fn gaussian_run() -> &'static TimedRun {
    static RUN: OnceLock<TimedRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let config = SimulationConfig {
            alpha: 1.0,
            force_tabulated: false,
            reaction: "logistic".into(),
            initial: InitialCondition::Compact { support_radius: 1.0 },
            dt: 0.05,
            t_final: 45.0,
            snapshot_times: vec![0.0, 15.0, 30.0, 45.0],
            levels: vec![0.25, 0.5, 0.75],
            grid: GradedGridSpec::symmetric(130.0, 0.025, 1.01, 160.0),
            boundary_mismatch_tol: 0.05,
        };
        let t0 = Instant::now();
        let out = run(&config).expect("gaussian run");
        TimedRun {
            out,
            seconds: t0.elapsed().as_secs_f64(),
        }
    })
}

fn report(criterion: u32, pass: bool, detail: String) {
    println!(
        "acceptance criterion {criterion:2}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_01_compact_level_set_rate() {
    let run = compact_run();
    let trace = &run.out.traces[1]; // lambda = 0.5
    let est = fit_rate(trace, FrontSide::Right, RateModel::ExponentialInT, (8.0, 14.0)).unwrap();
    let pass = (est.rate - 0.5).abs() <= 0.05 && run.seconds < 300.0;
    report(
        1,
        pass,
        format!(
            "x+_0.5 rate {:.4} vs 0.5 +- 0.05, drift {:.4}, run {:.0}s < 300s",
            est.rate, est.drift, run.seconds
        ),
    );
}

#[test]
fn criterion_02_level_set_ratio_band() {
    let run = &compact_run().out;
    // band factor C(t) = max over levels of max(ratio, 1/ratio), ratio = x+ e^{-t/2}
    let band_at = |t_probe: f64| -> f64 {
        let mut c: f64 = 1.0;
        for trace in &run.traces {
            for (t, x) in trace.side_samples(FrontSide::Right, (t_probe - 1e-9, t_probe + 1e-9)) {
                let ratio = x * (-t / 2.0).exp();
                c = c.max(ratio).max(1.0 / ratio);
            }
        }
        c
    };
    // last third of the run
    let mut c_band: f64 = 1.0;
    for trace in &run.traces {
        for (t, x) in trace.side_samples(FrontSide::Right, (14.0 * 2.0 / 3.0, 14.0)) {
            let ratio = x * (-t / 2.0).exp();
            c_band = c_band.max(ratio).max(1.0 / ratio);
        }
    }
    let c10 = band_at(10.0);
    let c14 = band_at(14.0);
    // the ratios converge to their limiting constants from below; 2% headroom
    // distinguishes residual convergence from genuine widening
    let pass = c_band <= 3.0 && c14 <= 1.02 * c10;
    report(
        2,
        pass,
        format!("band factor {c_band:.3} <= 3 on the last third; C(10) = {c10:.4}, C(14) = {c14:.4}"),
    );
}

#[test]
fn criterion_03_monotone_level_set_rate() {
    let run = monotone_run();
    let trace = &run.out.traces[1]; // lambda = 0.5
    let est = fit_rate(trace, FrontSide::Left, RateModel::ExponentialInT, (9.0, 14.0)).unwrap();
    let pass = (est.rate - 1.0).abs() <= 0.1;
    report(
        3,
        pass,
        format!(
            "|x-_0.5| rate {:.4} vs c** = 1.0 +- 0.1, drift {:.4}, monotone defect {:.1e}",
            est.rate, est.drift, run.out.monotonicity_defect
        ),
    );
}

#[test]
fn criterion_04_gaussian_linear_speed() {
    let run = gaussian_run();
    let trace = &run.out.traces[1];
    let est = fit_rate(trace, FrontSide::Right, RateModel::LinearInT, (27.0, 45.0)).unwrap();
    let pass = (est.rate - 2.0).abs() <= 0.1;
    report(
        4,
        pass,
        format!(
            "linear speed {:.4} vs 2 sqrt(f'(0)) = 2.0 +- 0.1, drift {:.4}",
            est.rate, est.drift
        ),
    );
}

#[test]
fn criterion_05_invasion_bracketing() {
    let run = &compact_run().out;
    let snaps: Vec<&Field> = run.snapshots.iter().collect();
    let below = check_invasion(&snaps, 0.3, InvasionRegion::Ball, InvasionKind::BelowCritical)
        .unwrap();
    let above = check_invasion(&snaps, 0.7, InvasionRegion::Ball, InvasionKind::AboveCritical)
        .unwrap();
    let pass = below.conclusive
        && above.conclusive
        && below.final_extremum >= 0.95
        && above.final_extremum <= 0.05;
    report(
        5,
        pass,
        format!(
            "min over |x|<=e^(0.3t) at t=14: {:.4} >= 0.95; max over |x|>=e^(0.7t): {:.4} <= 0.05",
            below.final_extremum, above.final_extremum
        ),
    );
}

#[test]
fn criterion_06_no_traveling_wave_stretching() {
    let compact = &compact_run().out;
    let stretched =
        stretch_diagnostic(&compact.traces[0], &compact.traces[2], (8.0, 14.0)).unwrap();
    let gaussian = &gaussian_run().out;
    let rigid =
        stretch_diagnostic(&gaussian.traces[0], &gaussian.traces[2], (27.0, 45.0)).unwrap();
    let pass = (stretched.rate - 0.5).abs() <= 0.1 && rigid.rate.abs() <= 0.05;
    report(
        6,
        pass,
        format!(
            "width rate {:.4} vs 0.5 +- 0.1 (alpha = 1/2) against {:.4} vs 0 +- 0.05 (alpha = 1)",
            stretched.rate, rigid.rate
        ),
    );
}

#[test]
fn criterion_07_supersolution_dominance() {
    let run = &compact_run().out;
    let rep = supersolution_check(run, None).unwrap();
    report(
        7,
        rep.pass,
        format!(
            "max of u - e^(f'(0)t) p(t)*u0 over all snapshots: {:.3e} <= tol {:.3e}",
            rep.max_defect, rep.tolerance
        ),
    );
}

#[test]
fn criterion_08_kernel_property_suite() {
    let t0 = Instant::now();
    let cauchy = StableKernel::cauchy(1).unwrap();
    let gauss = StableKernel::gaussian(1).unwrap();
    let tabs: Vec<StableKernel> = [0.25, 0.5, 0.75]
        .iter()
        .map(|&a| StableKernel::tabulated(a, 1, 1e6, 4096).unwrap())
        .collect();

    // unit mass within 1e-6
    let mut mass_defect = 0.0_f64;
    for k in [&cauchy, &gauss, &tabs[0], &tabs[1], &tabs[2]] {
        for t in [0.05, 1.0, 5.0] {
            mass_defect = mass_defect.max((k.mass(t).unwrap() - 1.0).abs());
        }
    }

    // semigroup defect < 1e-4
    let grid: Vec<f64> = (-10..=10).map(|i| 0.9 * i as f64).collect();
    let mut semigroup = 0.0_f64;
    semigroup = semigroup.max(cauchy.semigroup_defect(1.0, 2.0, &grid).unwrap());
    semigroup = semigroup.max(gauss.semigroup_defect(0.5, 0.5, &grid).unwrap());
    for tab in &tabs {
        semigroup = semigroup.max(tab.semigroup_defect(1.0, 1.0, &grid).unwrap());
    }

    // two-sided bound: B = pi exactly at alpha = 1/2, finite B elsewhere
    let mut pts = Vec::new();
    for t in [0.2, 1.0, 4.0] {
        pts.push((t, 0.0));
        for i in 0..120 {
            let x = 10f64.powf(-2.0 + 7.0 * i as f64 / 119.0);
            pts.push((t, x));
            pts.push((t, -x));
        }
    }
    let b_cauchy = cauchy.check_bounds(std::f64::consts::PI, &pts).unwrap();
    let bounds_ok = b_cauchy.passes
        && (b_cauchy.required_b - std::f64::consts::PI).abs() < 1e-9
        && tabs.iter().all(|tab| {
            let rep = tab.check_bounds(0.0, &pts).unwrap();
            rep.required_b.is_finite()
                && tab
                    .check_bounds(rep.required_b * 1.0001, &pts)
                    .unwrap()
                    .passes
        });

    // tail exponent -(1 + 2 alpha) +- 0.05 for alpha in {0.25, 0.5, 0.75}
    let mut tail_err = 0.0_f64;
    for (tab, alpha) in tabs.iter().zip([0.25, 0.5, 0.75]) {
        let fitted = tab.fitted_tail_exponent().unwrap();
        tail_err = tail_err.max((fitted - -(1.0 + 2.0 * alpha)).abs());
    }

    let seconds = t0.elapsed().as_secs_f64();
    let pass = mass_defect < 1e-6
        && semigroup < 1e-4
        && bounds_ok
        && tail_err < 0.05
        && seconds < 60.0;
    report(
        8,
        pass,
        format!(
            "mass defect {mass_defect:.2e} < 1e-6, semigroup defect {semigroup:.2e} < 1e-4, \
             B(1/2) = pi and finite B elsewhere: {bounds_ok}, tail exponent error {tail_err:.3} < 0.05, \
             {seconds:.0}s < 60s"
        ),
    );
}

#[test]
fn criterion_09_operator_cross_validation() {
    // symbol eigenrelation on cos(kx)
    let n = 256;
    let length = 2.0 * std::f64::consts::PI;
    let mut eigen_rel = 0.0_f64;
    for alpha in [0.25, 0.5, 0.75] {
        let op = SpectralOperator::new(alpha, length, n).unwrap();
        let grid = op.grid();
        for k in [1i64, 3, 9] {
            let samples: Vec<f64> = grid.iter().map(|&x| (k as f64 * x).cos()).collect();
            let out = op.apply(&samples).unwrap();
            let lambda = op.symbol(k);
            for (o, s) in out.iter().zip(&samples) {
                eigen_rel = eigen_rel.max((o - lambda * s).abs() / lambda);
            }
        }
    }

    // spectral vs singular-integral on the smooth decaying suite
    let n = 4096;
    let length = 340.0;
    let probes = [-3.7, -1.2, 0.0, 0.45, 1.1, 2.6];
    let suite: Vec<Box<dyn Fn(f64) -> f64>> = vec![
        Box::new(|x: f64| (-x * x).exp()),
        Box::new(|x: f64| 0.8 * (-(x - 1.0) * (x - 1.0) / 2.0).exp()),
        Box::new(|x: f64| {
            let c = x.cosh();
            1.0 / (c * c)
        }),
    ];
    let mut cross = 0.0_f64;
    for alpha in [0.25, 0.5, 0.75] {
        let spec = SpectralOperator::new(alpha, length, n).unwrap();
        let sing = SingularIntegralOperator::with_quadrature(alpha, 1e-3, 1.2e4).unwrap();
        let grid = spec.grid();
        let h = length / n as f64;
        for f in &suite {
            let samples: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
            let spectral_all = spec.apply(&samples).unwrap();
            for &x in &probes {
                let j = ((x + 0.5 * length) / h).round() as usize;
                let direct = sing.apply_at(f, (0.0, 0.0), grid[j]).unwrap();
                cross = cross.max((direct - spectral_all[j]).abs());
            }
        }
    }
    let pass = eigen_rel <= 1e-10 && cross <= 1e-3;
    report(
        9,
        pass,
        format!("eigenrelation defect {eigen_rel:.2e} <= 1e-10, cross-method sup {cross:.2e} <= 1e-3"),
    );
}

#[test]
fn criterion_10_structural_properties() {
    // comparison principle: ordered compact data stay ordered
    let mk_config = |radius: f64| SimulationConfig {
        alpha: 0.5,
        force_tabulated: false,
        reaction: "logistic".into(),
        initial: InitialCondition::Compact { support_radius: radius },
        dt: 0.05,
        t_final: 2.0,
        snapshot_times: vec![0.0, 1.0, 2.0],
        levels: vec![0.5],
        grid: GradedGridSpec::symmetric(4.0, 0.02, 1.005, 1.0e4),
        boundary_mismatch_tol: 0.05,
    };
    let small = run(&mk_config(0.5)).unwrap();
    let large = run(&mk_config(1.5)).unwrap();
    let mut ordering_defect = 0.0_f64;
    for (a, b) in small.snapshots.iter().zip(&large.snapshots) {
        for (u, v) in a.values().iter().zip(b.values()) {
            ordering_defect = ordering_defect.max(u - v);
        }
    }

    // range preservation on the production run
    let compact = &compact_run().out;
    let mut range_defect = 0.0_f64;
    for snap in &compact.snapshots {
        range_defect = range_defect.max(snap.range_defect());
    }
    let clamp_excess = compact.clamp.max_excess;

    // Strang self-convergence order in dt on a smooth periodic benchmark
    let n = 512;
    let op = SpectralOperator::new(0.5, 60.0, n).unwrap();
    let grid = op.grid();
    let u0: Vec<f64> = grid.iter().map(|&x| 0.1 + 0.6 * (-x * x / 4.0).exp()).collect();
    let logistic = ReactionTerm::logistic();
    let solve = |dt: f64| -> Vec<f64> {
        let prop = SpectralPropagator::new(&op, dt).unwrap();
        let mut u = u0.clone();
        for _ in 0..(1.0 / dt).round() as usize {
            u = prop.strang_step(&u, &logistic).unwrap();
        }
        u
    };
    let reference = solve(0.025);
    let err = |u: &[f64]| -> f64 {
        u.iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let order = (err(&solve(0.2)) / err(&solve(0.1))).log2();

    let pass = ordering_defect <= 1e-10
        && range_defect == 0.0
        && clamp_excess <= 1e-10
        && (order - 2.0).abs() <= 0.2;
    report(
        10,
        pass,
        format!(
            "ordering defect {ordering_defect:.2e} <= 1e-10, range defect {range_defect:.1e} (exact), \
             clamp excess {clamp_excess:.1e}, splitting order {order:.3} = 2.0 +- 0.2"
        ),
    );
}
