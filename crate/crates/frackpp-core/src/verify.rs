//! Comparison-based checks of simulation output: the linearized supersolution
//! e^{f'(0)t} p(t,.) * u0, the heuristic front-position scale, the
//! interior lower bound on moving balls, and residual sign maps for
//! algebraic-profile super/subsolution candidates.

use crate::error::{Error, Result};
use crate::evolve::{convolve_exact, RunOutput};
use crate::operator::SingularIntegralOperator;
use crate::reaction::ReactionTerm;
use serde::Serialize;

/// Outcome of checking u(t,.) <= e^{f'(0)t} (p(t,.)*u0) + tol at snapshots.
#[derive(Debug, Clone, Serialize)]
pub struct SupersolutionReport {
    pub times: Vec<f64>,
    /// max over the grid of u - supersolution, per snapshot time
    pub per_time_defect: Vec<f64>,
    pub max_defect: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Verify the concavity supersolution bound on every snapshot of a run.
///
/// The tolerance defaults to 1e-3 plus a discretization term scaled from the
/// splitting step and core spacing.
pub fn supersolution_check(run: &RunOutput, tolerance: Option<f64>) -> Result<SupersolutionReport> {
    let fp0 = run.reaction.fp0();
    let h = run.grid.spec().core_spacing;
    let tol = tolerance.unwrap_or(1e-3 + 1e-2 * (run.config.dt * run.config.dt + h * h));
    let mut times = Vec::new();
    let mut per_time_defect = Vec::new();
    let mut max_defect = f64::MIN;
    for snap in &run.snapshots {
        let t = snap.time();
        let defect = if t == 0.0 {
            // same initial datum: equality by construction
            snap.values()
                .iter()
                .zip(run.initial.values())
                .map(|(a, b)| a - b)
                .fold(f64::MIN, f64::max)
        } else {
            let amplification = (fp0 * t).exp();
            let linear = convolve_exact(&run.kernel, &run.initial, t, run.grid.nodes())?;
            snap.values()
                .iter()
                .zip(&linear)
                .map(|(u, conv)| u - amplification * conv)
                .fold(f64::MIN, f64::max)
        };
        times.push(t);
        per_time_defect.push(defect);
        max_defect = max_defect.max(defect);
    }
    Ok(SupersolutionReport {
        times,
        per_time_defect,
        max_defect,
        tolerance: tol,
        pass: max_defect <= tol,
    })
}

/// Heuristic front-position scale t^{1/(N+2 alpha)} e^{c* t} (times a caller
/// constant), with c* = f'(0)/(N + 2 alpha).
pub fn heuristic_front(alpha: f64, dim: u32, fp0: f64, t: f64, constant: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("heuristic needs t > 0, got {t}")));
    }
    let denom = dim as f64 + 2.0 * alpha;
    Ok(constant * t.powf(1.0 / denom) * (fp0 * t / denom).exp())
}

/// Late-time minima of u over the moving balls |x| <= e^{sigma t}.
#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundReport {
    pub sigma: f64,
    pub epsilon: f64,
    /// (t, min over |x| <= e^{sigma t}) per usable snapshot
    pub history: Vec<(f64, f64)>,
    /// min over the last third of the usable history
    pub late_minimum: f64,
    pub conclusive: bool,
    pub pass: bool,
}

/// Check that the late-time minimum over |x| <= e^{sigma t} stays above
/// epsilon, for sigma below the compact-data spreading rate.
pub fn lower_bound_check(run: &RunOutput, sigma: f64, epsilon: f64) -> Result<LowerBoundReport> {
    let c_star = run.reaction.fp0() / (1.0 + 2.0 * run.config.alpha);
    if !(sigma > 0.0 && sigma < c_star) {
        return Err(Error::Domain(format!(
            "sigma must lie in (0, c*) = (0, {c_star:.6}), got {sigma}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain("epsilon must lie in (0,1)".into()));
    }
    let mut history = Vec::new();
    let mut conclusive = true;
    for snap in &run.snapshots {
        let t = snap.time();
        let radius = (sigma * t).exp();
        if radius > run.grid.right_edge() || -radius < run.grid.left_edge() {
            conclusive = false;
            continue;
        }
        let mut m = snap.interp(radius).min(snap.interp(-radius));
        for (x, &v) in run.grid.nodes().iter().zip(snap.values()) {
            if x.abs() < radius {
                m = m.min(v);
            }
        }
        history.push((t, m));
    }
    if history.is_empty() {
        return Err(Error::Fit("no snapshot usable for the lower bound".into()));
    }
    let start = history.len() - history.len().div_ceil(3);
    let late_minimum = history[start..]
        .iter()
        .map(|&(_, m)| m)
        .fold(f64::INFINITY, f64::min);
    Ok(LowerBoundReport {
        sigma,
        epsilon,
        history,
        late_minimum,
        conclusive,
        pass: late_minimum >= epsilon,
    })
}

/// Orientation of an algebraic-profile candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProfileOrientation {
    /// residual >= 0 required everywhere sampled
    Supersolution,
    /// residual <= 0 required everywhere sampled
    Subsolution,
}

/// Candidate profile a (1 + |x|^2/b(t)^2)^{-1} with b(t) = b0 e^{r t}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AlgebraicProfile {
    pub amplitude: f64,
    pub width0: f64,
    pub growth_rate: f64,
    pub orientation: ProfileOrientation,
}

impl AlgebraicProfile {
    pub fn width(&self, t: f64) -> f64 {
        self.width0 * (self.growth_rate * t).exp()
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        let s = x / self.width(t);
        self.amplitude / (1.0 + s * s)
    }

    /// Analytic time derivative: 2 a r s^2 (1+s^2)^{-2} with s = x/b(t).
    pub fn time_derivative(&self, t: f64, x: f64) -> f64 {
        let s = x / self.width(t);
        let den = 1.0 + s * s;
        2.0 * self.amplitude * self.growth_rate * s * s / (den * den)
    }
}

/// Sign summary of the residual d_t u + A u - f(u) over a (t,x) sample set.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualSignSummary {
    pub orientation: ProfileOrientation,
    /// (t, x, residual) triples
    pub samples: Vec<(f64, f64, f64)>,
    pub min_residual: f64,
    pub max_residual: f64,
    /// residual >= -tol everywhere sampled
    pub holds_as_supersolution: bool,
    /// residual <= tol everywhere sampled
    pub holds_as_subsolution: bool,
}

/// Evaluate the residual of an algebraic profile through the singular-integral
/// operator (alpha = 1/2 regime) and the analytic time derivative.
pub fn profile_residual_sign(
    profile: &AlgebraicProfile,
    op: &SingularIntegralOperator,
    reaction: &ReactionTerm,
    times: &[f64],
    points: &[f64],
) -> Result<ResidualSignSummary> {
    if profile.amplitude <= 0.0 || profile.amplitude > 1.0 {
        return Err(Error::Domain("profile amplitude must lie in (0,1]".into()));
    }
    if profile.width0 <= 0.0 {
        return Err(Error::Domain("profile width must be positive".into()));
    }
    let mut samples = Vec::with_capacity(times.len() * points.len());
    let mut min_residual = f64::INFINITY;
    let mut max_residual = f64::NEG_INFINITY;
    for &t in times {
        let b = profile.width(t);
        let a = profile.amplitude;
        let u = move |y: f64| {
            let s = y / b;
            a / (1.0 + s * s)
        };
        for &x in points {
            let du_dt = profile.time_derivative(t, x);
            let au = op.apply_at(&u, (0.0, 0.0), x)?;
            let val = profile.value(t, x);
            let residual = du_dt + au - reaction.eval(val);
            min_residual = min_residual.min(residual);
            max_residual = max_residual.max(residual);
            samples.push((t, x, residual));
        }
    }
    let tol = 1e-12;
    Ok(ResidualSignSummary {
        orientation: profile.orientation,
        samples,
        min_residual,
        max_residual,
        holds_as_supersolution: min_residual >= -tol,
        holds_as_subsolution: max_residual <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{run_with, InitialCondition, SimulationConfig};
    use crate::grid::GradedGridSpec;
    use crate::kernel::StableKernel;

    fn small_compact_config() -> SimulationConfig {
        SimulationConfig {
            alpha: 0.5,
            force_tabulated: false,
            reaction: "logistic".into(),
            initial: InitialCondition::Compact { support_radius: 1.0 },
            dt: 0.05,
            t_final: 1.0,
            snapshot_times: vec![0.0, 0.5, 1.0],
            levels: vec![0.5],
            grid: GradedGridSpec::symmetric(4.0, 0.05, 1.01, 400.0),
            boundary_mismatch_tol: 0.05,
        }
    }

    #[test]
    fn heuristic_front_formula() {
        // t^{1/(N+2a)} e^{c* t} at alpha=1/2, N=1, f'(0)=1, t=2: sqrt(2) e
        let v = heuristic_front(0.5, 1, 1.0, 2.0, 1.0).unwrap();
        let expect = 2.0_f64.sqrt() * 1.0_f64.exp();
        assert!((v - expect).abs() < 1e-12, "{v} vs {expect}");
        assert!(heuristic_front(0.5, 1, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn heuristic_front_monotone_in_t_and_rate() {
        let a = heuristic_front(0.5, 1, 1.0, 1.0, 1.0).unwrap();
        let b = heuristic_front(0.5, 1, 1.0, 2.0, 1.0).unwrap();
        let c = heuristic_front(0.5, 1, 2.0, 2.0, 1.0).unwrap();
        assert!(b > a && c > b);
        // N + 2 alpha -> infinity sends c* to 0
        let big_dim = heuristic_front(0.5, 1000, 1.0, 2.0, 1.0).unwrap();
        assert!(big_dim < 2.0 * 1000.0_f64.powf(0.0) * 1.01);
    }

    #[test]
    fn supersolution_on_zero_reaction_run_is_equality() {
        // with f = 0 the evolution is the semigroup itself, so the defect is
        // pure discretization error
        let config = small_compact_config();
        let kernel = StableKernel::cauchy(1).unwrap();
        let zero = ReactionTerm::custom("zero", |_| 0.0, 1.0, -1.0);
        let run = run_with(&config, kernel, zero).unwrap();
        let report = supersolution_check(&run, None).unwrap();
        assert!(report.pass, "defect {:?}", report.per_time_defect);
        // t = 0 snapshot is exactly the initial datum
        assert!(report.per_time_defect[0] <= 0.0);
        assert!(report.max_defect < 5e-4);
    }

    #[test]
    fn supersolution_on_logistic_run_passes() {
        let run = run_with(
            &small_compact_config(),
            StableKernel::cauchy(1).unwrap(),
            ReactionTerm::logistic(),
        )
        .unwrap();
        let report = supersolution_check(&run, None).unwrap();
        assert!(report.pass, "defect {:?}", report.per_time_defect);
    }

    #[test]
    fn lower_bound_guards_sigma() {
        let run = run_with(
            &small_compact_config(),
            StableKernel::cauchy(1).unwrap(),
            ReactionTerm::logistic(),
        )
        .unwrap();
        // c* = 1/2: sigma above it is a precondition violation
        assert!(lower_bound_check(&run, 0.6, 0.1).is_err());
        let rep = lower_bound_check(&run, 0.3, 0.05).unwrap();
        assert!(rep.conclusive);
        // initial datum is 1 on [-1,1], so the t=0 ball minimum is 1
        assert!((rep.history[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn profile_residual_at_maximum_is_positive_without_reaction() {
        let op = SingularIntegralOperator::new(0.5).unwrap();
        let zero = ReactionTerm::custom("zero", |_| 0.0, 1.0, -1.0);
        let profile = AlgebraicProfile {
            amplitude: 1.0,
            width0: 2.0,
            growth_rate: 0.0,
            orientation: ProfileOrientation::Supersolution,
        };
        let summary =
            profile_residual_sign(&profile, &op, &zero, &[0.0, 1.0], &[0.0]).unwrap();
        // at the interior maximum the operator value is a/b > 0
        for &(t, _, r) in &summary.samples {
            let b = profile.width(t);
            assert!(r > 0.0);
            assert!((r - 1.0 / b).abs() < 1e-4, "t={t}: {r} vs {}", 1.0 / b);
        }
    }

    #[test]
    fn profile_residual_vanishes_in_the_tail() {
        let op = SingularIntegralOperator::new(0.5).unwrap();
        let logistic = ReactionTerm::logistic();
        let profile = AlgebraicProfile {
            amplitude: 0.5,
            width0: 1.0,
            growth_rate: 0.5,
            orientation: ProfileOrientation::Subsolution,
        };
        let summary =
            profile_residual_sign(&profile, &op, &logistic, &[0.0], &[500.0]).unwrap();
        assert!(summary.samples[0].2.abs() < 1e-3);
    }

    #[test]
    fn profile_residual_linear_in_amplitude_without_reaction() {
        let op = SingularIntegralOperator::new(0.5).unwrap();
        let zero = ReactionTerm::custom("zero", |_| 0.0, 1.0, -1.0);
        let base = AlgebraicProfile {
            amplitude: 0.4,
            width0: 3.0,
            growth_rate: 0.5,
            orientation: ProfileOrientation::Supersolution,
        };
        let double = AlgebraicProfile {
            amplitude: 0.8,
            ..base
        };
        let pts = [0.0, 1.0, 5.0, 20.0];
        let s1 = profile_residual_sign(&base, &op, &zero, &[0.7], &pts).unwrap();
        let s2 = profile_residual_sign(&double, &op, &zero, &[0.7], &pts).unwrap();
        for (a, b) in s1.samples.iter().zip(&s2.samples) {
            assert!((2.0 * a.2 - b.2).abs() < 1e-9, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn profile_parameter_guards() {
        let op = SingularIntegralOperator::new(0.5).unwrap();
        let logistic = ReactionTerm::logistic();
        let bad = AlgebraicProfile {
            amplitude: 1.5,
            width0: 1.0,
            growth_rate: 0.5,
            orientation: ProfileOrientation::Supersolution,
        };
        assert!(profile_residual_sign(&bad, &op, &logistic, &[0.0], &[0.0]).is_err());
    }
}
