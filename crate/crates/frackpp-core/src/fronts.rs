//! Level-set front extraction and spreading-rate estimation.
//!
//! Level positions follow the inf/sup definitions
//! x_l^-(t) = inf{x : u(t,x) = l}, x_l^+(t) = sup{x : u(t,x) = l}; on the
//! discrete grid the equality sets are replaced by interpolated crossings.

use crate::error::{Error, Result};
use crate::grid::Field;
use serde::Serialize;

/// Crossing positions of one level in one snapshot.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LevelCrossing {
    pub level: f64,
    pub x_minus: Option<f64>,
    pub x_plus: Option<f64>,
}

/// Time series of the crossing positions of one level.
#[derive(Debug, Clone, Serialize)]
pub struct FrontTrace {
    pub level: f64,
    pub times: Vec<f64>,
    pub x_minus: Vec<Option<f64>>,
    pub x_plus: Vec<Option<f64>>,
}

impl FrontTrace {
    pub fn new(level: f64) -> Self {
        Self {
            level,
            times: Vec::new(),
            x_minus: Vec::new(),
            x_plus: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, crossing: &LevelCrossing) {
        self.times.push(t);
        self.x_minus.push(crossing.x_minus);
        self.x_plus.push(crossing.x_plus);
    }

    /// Samples (t, x) of the chosen side inside [window.0, window.1].
    pub fn side_samples(&self, side: FrontSide, window: (f64, f64)) -> Vec<(f64, f64)> {
        let xs = match side {
            FrontSide::Left => &self.x_minus,
            FrontSide::Right => &self.x_plus,
        };
        self.times
            .iter()
            .zip(xs)
            .filter(|(t, _)| **t >= window.0 && **t <= window.1)
            .filter_map(|(t, x)| x.map(|x| (*t, x)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FrontSide {
    Left,
    Right,
}

/// Fit model for front positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RateModel {
    /// least-squares slope of log|x| against t
    ExponentialInT,
    /// least-squares slope of x against t
    LinearInT,
}

/// A fitted spreading rate with residual diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct RateEstimate {
    pub model: RateModel,
    #[serde(rename = "c")]
    pub rate: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    #[serde(rename = "residual")]
    pub residual_rms: f64,
    /// |rate on the second half - rate on the first half|; large drift flags
    /// a window that is not yet asymptotic.
    pub drift: f64,
    pub samples: usize,
}

/// Locate the leftmost and rightmost interpolated crossings of each level.
///
/// Returns `x_minus = x_plus = None` for levels the snapshot never attains.
pub fn extract_levels(field: &Field, levels: &[f64]) -> Result<Vec<LevelCrossing>> {
    for &l in levels {
        if !(l > 0.0 && l < 1.0) {
            return Err(Error::Domain(format!("levels must lie in (0,1), got {l}")));
        }
    }
    let nodes = field.grid().nodes();
    let u = field.values();
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        let mut x_minus = None;
        let mut x_plus = None;
        for j in 0..u.len() - 1 {
            let (a, b) = (u[j] - level, u[j + 1] - level);
            if a == 0.0 {
                x_minus.get_or_insert(nodes[j]);
                x_plus = Some(nodes[j]);
            }
            if a * b < 0.0 {
                let t = a / (a - b);
                let x = nodes[j] + t * (nodes[j + 1] - nodes[j]);
                x_minus.get_or_insert(x);
                x_plus = Some(x);
            }
        }
        if *u.last().unwrap() == level {
            x_minus.get_or_insert(*nodes.last().unwrap());
            x_plus = Some(*nodes.last().unwrap());
        }
        out.push(LevelCrossing {
            level,
            x_minus,
            x_plus,
        });
    }
    Ok(out)
}

/// Least-squares rate of a front trace over a time window.
pub fn fit_rate(
    trace: &FrontTrace,
    side: FrontSide,
    model: RateModel,
    window: (f64, f64),
) -> Result<RateEstimate> {
    let samples = trace.side_samples(side, window);
    fit_samples(&samples, model, window)
}

fn fit_samples(samples: &[(f64, f64)], model: RateModel, window: (f64, f64)) -> Result<RateEstimate> {
    if window.0 >= window.1 {
        return Err(Error::Fit(format!("empty window [{}, {}]", window.0, window.1)));
    }
    if samples.len() < 8 {
        return Err(Error::Fit(format!(
            "need >= 8 samples in the window, found {}",
            samples.len()
        )));
    }
    let transformed: Vec<(f64, f64)> = match model {
        RateModel::LinearInT => samples.to_vec(),
        RateModel::ExponentialInT => {
            let mut ys = Vec::with_capacity(samples.len());
            for &(t, x) in samples {
                if x == 0.0 {
                    return Err(Error::Fit(format!(
                        "exponential model needs nonzero positions, found x = 0 at t = {t}"
                    )));
                }
                ys.push((t, x.abs().ln()));
            }
            // positions must keep one sign for log|x| to trace one front
            let sign = samples[0].1.signum();
            if samples.iter().any(|&(_, x)| x.signum() != sign) {
                return Err(Error::Fit(
                    "exponential model needs positions of one sign".into(),
                ));
            }
            ys
        }
    };
    let (rate, intercept, residual_rms) = least_squares(&transformed);
    // local-rate drift between the two window halves
    let mid = 0.5 * (transformed[0].0 + transformed[transformed.len() - 1].0);
    let first: Vec<(f64, f64)> = transformed.iter().copied().filter(|s| s.0 <= mid).collect();
    let second: Vec<(f64, f64)> = transformed.iter().copied().filter(|s| s.0 > mid).collect();
    let drift = if first.len() >= 4 && second.len() >= 4 {
        let (r1, _, _) = least_squares(&first);
        let (r2, _, _) = least_squares(&second);
        (r2 - r1).abs()
    } else {
        f64::NAN
    };
    Ok(RateEstimate {
        model,
        rate,
        intercept,
        window,
        residual_rms,
        drift,
        samples: samples.len(),
    })
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in pts {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mut ss = 0.0;
    for &(x, y) in pts {
        let r = y - slope * x - intercept;
        ss += r * r;
    }
    (slope, intercept, (ss / n).sqrt())
}

/// Exponential growth rate of the front width x^+_{low}(t) - x^+_{high}(t).
///
/// A rigidly translating profile has width rate 0; stretching fronts have a
/// positive rate.
pub fn stretch_diagnostic(
    trace_low: &FrontTrace,
    trace_high: &FrontTrace,
    window: (f64, f64),
) -> Result<RateEstimate> {
    if trace_low.level >= trace_high.level {
        return Err(Error::Domain(
            "stretch diagnostic wants trace_low.level < trace_high.level".into(),
        ));
    }
    let lo = trace_low.side_samples(FrontSide::Right, window);
    let hi = trace_high.side_samples(FrontSide::Right, window);
    let mut widths = Vec::new();
    let mut j = 0usize;
    for (t, xl) in lo {
        while j < hi.len() && hi[j].0 < t - 1e-12 {
            j += 1;
        }
        if j < hi.len() && (hi[j].0 - t).abs() < 1e-9 {
            let w = xl - hi[j].1;
            if w <= 0.0 {
                return Err(Error::Fit(format!("front width not positive at t = {t}")));
            }
            widths.push((t, w));
        }
    }
    fit_samples(&widths, RateModel::ExponentialInT, window)
}

/// Geometry of the invasion set for `check_invasion`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InvasionRegion {
    /// |x| <= e^{ct} (compactly supported data)
    Ball,
    /// x >= -e^{ct} (nondecreasing data)
    RightHalfLine,
}

/// Which side of the threshold rate is being tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InvasionKind {
    /// c below the spreading rate: min over the region should approach 1
    BelowCritical,
    /// c above the spreading rate: sup over the complement should approach 0
    AboveCritical,
}

/// Per-snapshot extrema of u over moving regions |x| <= e^{ct} (or their
/// complements), quantifying the exponential invasion statements.
#[derive(Debug, Clone, Serialize)]
pub struct InvasionReport {
    pub c: f64,
    pub region: InvasionRegion,
    pub kind: InvasionKind,
    /// (t, extremum) per usable snapshot
    pub history: Vec<(f64, f64)>,
    pub final_extremum: f64,
    /// false when e^{ct} ran past the grid and the late snapshots were skipped
    pub conclusive: bool,
}

/// Track min u over {|x| <= e^{ct}} (kind Below) or max u over the complement
/// (kind Above) across snapshots.
pub fn check_invasion(
    snapshots: &[&Field],
    c: f64,
    region: InvasionRegion,
    kind: InvasionKind,
) -> Result<InvasionReport> {
    if !(c > 0.0) {
        return Err(Error::Domain("invasion exponent c must be positive".into()));
    }
    if snapshots.is_empty() {
        return Err(Error::Domain("no snapshots supplied".into()));
    }
    let mut history = Vec::new();
    let mut conclusive = true;
    for field in snapshots {
        let t = field.time();
        let radius = (c * t).exp();
        let grid = field.grid();
        let out_of_grid = match region {
            InvasionRegion::Ball => radius > grid.right_edge() || -radius < grid.left_edge(),
            InvasionRegion::RightHalfLine => -radius < grid.left_edge(),
        };
        if out_of_grid {
            conclusive = false;
            continue;
        }
        let value = match (region, kind) {
            (InvasionRegion::Ball, InvasionKind::BelowCritical) => {
                extremum_over(field, -radius, radius, true)
            }
            (InvasionRegion::Ball, InvasionKind::AboveCritical) => {
                let left = extremum_over(field, grid.left_edge(), -radius, false);
                let right = extremum_over(field, radius, grid.right_edge(), false);
                left.max(right)
            }
            (InvasionRegion::RightHalfLine, InvasionKind::BelowCritical) => {
                extremum_over(field, -radius, grid.right_edge(), true)
            }
            (InvasionRegion::RightHalfLine, InvasionKind::AboveCritical) => {
                extremum_over(field, grid.left_edge(), -radius, false)
            }
        };
        history.push((t, value));
    }
    let final_extremum = history.last().map(|&(_, v)| v).ok_or_else(|| {
        Error::Fit("every snapshot was inconclusive for this c".into())
    })?;
    Ok(InvasionReport {
        c,
        region,
        kind,
        history,
        final_extremum,
        conclusive,
    })
}

/// Extremum of the piecewise-linear field over [a, b] (min if `minimum`).
fn extremum_over(field: &Field, a: f64, b: f64, minimum: bool) -> f64 {
    let nodes = field.grid().nodes();
    let u = field.values();
    let combine = |best: f64, v: f64| if minimum { best.min(v) } else { best.max(v) };
    let mut best = combine(field.interp(a), field.interp(b));
    for (x, &v) in nodes.iter().zip(u) {
        if *x > a && *x < b {
            best = combine(best, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GradedGrid, GradedGridSpec};
    use std::sync::Arc;

    fn uniformish_grid() -> Arc<GradedGrid> {
        Arc::new(GradedGrid::build(GradedGridSpec::symmetric(8.0, 0.05, 1.02, 60.0)).unwrap())
    }

    fn bump_field(center: f64) -> Field {
        let g = uniformish_grid();
        Field::from_fn(g, |x| (1.0 - 0.25 * (x - center).abs()).clamp(0.0, 0.9999), 0.0, 0.0)
    }

    #[test]
    fn extract_levels_on_mollified_indicator() {
        let g = uniformish_grid();
        // ramp from 1 at |x| <= 1-h to 0 at |x| >= 1
        let h = 0.05;
        let f = Field::from_fn(
            g,
            |x| ((1.0 - x.abs()) / h).clamp(0.0, 1.0),
            0.0,
            0.0,
        );
        let cr = extract_levels(&f, &[0.5]).unwrap();
        let c = &cr[0];
        assert!((c.x_minus.unwrap() + 1.0).abs() < h, "{:?}", c.x_minus);
        assert!((c.x_plus.unwrap() - 1.0).abs() < h, "{:?}", c.x_plus);
    }

    #[test]
    fn constant_below_level_is_absent() {
        let g = uniformish_grid();
        let f = Field::from_fn(g, |_| 0.3, 0.0, 0.0);
        let cr = extract_levels(&f, &[0.5]).unwrap();
        assert!(cr[0].x_minus.is_none() && cr[0].x_plus.is_none());
    }

    #[test]
    fn monotone_ramp_single_crossing() {
        let g = uniformish_grid();
        let f = Field::from_fn(g, |x| x.clamp(0.0, 1.0), 0.0, 1.0);
        let cr = extract_levels(&f, &[0.5]).unwrap();
        let c = &cr[0];
        assert!((c.x_minus.unwrap() - 0.5).abs() < 0.05);
        assert!((c.x_plus.unwrap() - 0.5).abs() < 0.05);
    }

    #[test]
    fn invalid_level_rejected() {
        let f = bump_field(0.0);
        assert!(extract_levels(&f, &[1.5]).is_err());
        assert!(extract_levels(&f, &[0.0]).is_err());
    }

    #[test]
    fn level_ordering_for_unimodal_snapshot() {
        let f = bump_field(0.0);
        let cr = extract_levels(&f, &[0.25, 0.5, 0.75]).unwrap();
        assert!(cr[0].x_plus.unwrap() > cr[1].x_plus.unwrap());
        assert!(cr[1].x_plus.unwrap() > cr[2].x_plus.unwrap());
    }

    #[test]
    fn extraction_is_translation_equivariant() {
        let a = extract_levels(&bump_field(0.0), &[0.5]).unwrap();
        let b = extract_levels(&bump_field(2.0), &[0.5]).unwrap();
        let cell = 0.06;
        assert!((b[0].x_plus.unwrap() - a[0].x_plus.unwrap() - 2.0).abs() < cell);
        assert!((b[0].x_minus.unwrap() - a[0].x_minus.unwrap() - 2.0).abs() < cell);
    }

    fn synthetic_trace(f: impl Fn(f64) -> f64) -> FrontTrace {
        let mut tr = FrontTrace::new(0.5);
        for i in 0..=100 {
            let t = 0.1 * i as f64;
            tr.push(
                t,
                &LevelCrossing {
                    level: 0.5,
                    x_minus: Some(-f(t)),
                    x_plus: Some(f(t)),
                },
            );
        }
        tr
    }

    #[test]
    fn exponential_fit_is_exact_on_synthetic_data() {
        let tr = synthetic_trace(|t| 3.0 * (0.5 * t).exp());
        let est = fit_rate(&tr, FrontSide::Right, RateModel::ExponentialInT, (2.0, 10.0)).unwrap();
        assert!((est.rate - 0.5).abs() < 1e-12);
        assert!((est.intercept - 3.0_f64.ln()).abs() < 1e-12);
        assert!(est.residual_rms < 1e-12);
        assert!(est.drift < 1e-12);
    }

    #[test]
    fn linear_growth_under_exponential_model_drifts() {
        let tr = synthetic_trace(|t| 2.0 * t + 1.0);
        let est = fit_rate(&tr, FrontSide::Right, RateModel::ExponentialInT, (1.0, 10.0)).unwrap();
        // local rate of log(2t+1) decays toward 0, flagged by the drift
        let half1 = fit_rate(&tr, FrontSide::Right, RateModel::ExponentialInT, (1.0, 5.0)).unwrap();
        let half2 = fit_rate(&tr, FrontSide::Right, RateModel::ExponentialInT, (6.0, 10.0)).unwrap();
        assert!(half2.rate < half1.rate);
        assert!(est.drift > 0.01, "drift {}", est.drift);
    }

    #[test]
    fn linear_fit_recovers_speed() {
        let tr = synthetic_trace(|t| 2.0 * t + 0.3);
        let est = fit_rate(&tr, FrontSide::Right, RateModel::LinearInT, (0.0, 10.0)).unwrap();
        assert!((est.rate - 2.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples_is_fit_error() {
        let tr = synthetic_trace(|t| t + 1.0);
        assert!(fit_rate(&tr, FrontSide::Right, RateModel::LinearInT, (0.0, 0.3)).is_err());
    }

    #[test]
    fn rigid_translation_has_zero_width_rate() {
        let mut lo = FrontTrace::new(0.25);
        let mut hi = FrontTrace::new(0.75);
        for i in 0..=50 {
            let t = 0.2 * i as f64;
            lo.push(t, &LevelCrossing { level: 0.25, x_minus: None, x_plus: Some(3.0 + 2.0 * t) });
            hi.push(t, &LevelCrossing { level: 0.75, x_minus: None, x_plus: Some(1.0 + 2.0 * t) });
        }
        let est = stretch_diagnostic(&lo, &hi, (0.0, 10.0)).unwrap();
        assert!(est.rate.abs() < 1e-12, "width rate {}", est.rate);
    }

    #[test]
    fn stretching_widths_have_positive_rate() {
        let mut lo = FrontTrace::new(0.25);
        let mut hi = FrontTrace::new(0.75);
        for i in 0..=50 {
            let t = 0.2 * i as f64;
            lo.push(t, &LevelCrossing { level: 0.25, x_minus: None, x_plus: Some(3.0 * (0.5 * t).exp()) });
            hi.push(t, &LevelCrossing { level: 0.75, x_minus: None, x_plus: Some(1.0 * (0.5 * t).exp()) });
        }
        let est = stretch_diagnostic(&lo, &hi, (1.0, 10.0)).unwrap();
        assert!((est.rate - 0.5).abs() < 1e-10);
    }

    #[test]
    fn invasion_degenerate_window_reports_initial_minimum() {
        let g = uniformish_grid();
        let f = Field::from_fn(g, |x| if x.abs() <= 1.0 { 1.0 } else { 0.0 }, 0.0, 0.0);
        // t = 0: region is |x| <= 1
        let rep = check_invasion(&[&f], 0.3, InvasionRegion::Ball, InvasionKind::BelowCritical)
            .unwrap();
        assert_eq!(rep.history.len(), 1);
        assert!((rep.final_extremum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invasion_inconclusive_beyond_grid() {
        let g = uniformish_grid();
        let mut f = Field::from_fn(g, |_| 0.5, 0.0, 0.0);
        f.set_time(100.0); // e^{30} is far beyond the grid
        let rep = check_invasion(&[&f], 0.3, InvasionRegion::Ball, InvasionKind::BelowCritical);
        assert!(rep.is_err() || !rep.unwrap().conclusive);
    }
}
