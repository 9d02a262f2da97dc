//! Two independent discretizations of the fractional Laplacian (-Delta)^alpha:
//! a Fourier multiplier |xi|^{2 alpha} on a uniform periodic grid, and a
//! principal-value singular integral with symmetric inner quadrature and
//! algebraic-tail outer closure. Each serves as the oracle for the other.

use crate::error::{Error, Result};
use crate::quad::{integrate_geometric, integrate_gl16};
use crate::reaction::ReactionTerm;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Fourier-multiplier form of (-Delta)^alpha on a uniform periodic grid.
pub struct SpectralOperator {
    alpha: f64,
    length: f64,
    n: usize,
    multipliers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl SpectralOperator {
    /// Operator on a periodic box of the given length with n nodes.
    pub fn new(alpha: f64, length: f64, n: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!("alpha must be in (0,1], got {alpha}")));
        }
        if !(length > 0.0) || n < 4 {
            return Err(Error::Domain("need positive length and n >= 4".into()));
        }
        let mut planner = FftPlanner::new();
        let multipliers = (0..n)
            .map(|j| {
                let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                let xi = 2.0 * PI * k / length;
                xi.abs().powf(2.0 * alpha)
            })
            .collect();
        Ok(Self {
            alpha,
            length,
            n,
            multipliers,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Grid nodes x_j = -L/2 + j L/n.
    pub fn grid(&self) -> Vec<f64> {
        let h = self.length / self.n as f64;
        (0..self.n).map(|j| -0.5 * self.length + j as f64 * h).collect()
    }

    /// Symbol value |2 pi k / L|^{2 alpha} at integer frequency k.
    pub fn symbol(&self, k: i64) -> f64 {
        (2.0 * PI * k as f64 / self.length).abs().powf(2.0 * self.alpha)
    }

    /// Apply (-Delta)^alpha to samples on the periodic grid.
    pub fn apply(&self, samples: &[f64]) -> Result<Vec<f64>> {
        if samples.len() != self.n {
            return Err(Error::Domain(format!(
                "expected {} samples, got {}",
                self.n,
                samples.len()
            )));
        }
        let mut buf: Vec<Complex<f64>> =
            samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        for (c, m) in buf.iter_mut().zip(&self.multipliers) {
            *c *= m;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        Ok(buf.into_iter().map(|c| c.re * scale).collect())
    }

    /// Diffusion factors e^{-dt |xi|^{2 alpha}} for the semigroup step.
    pub(crate) fn semigroup_factors(&self, dt: f64) -> Vec<f64> {
        self.multipliers.iter().map(|m| (-dt * m).exp()).collect()
    }

    pub(crate) fn transform_pair(&self) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        (self.forward.clone(), self.inverse.clone())
    }
}

/// Principal-value singular-integral form of (-Delta)^alpha (N = 1):
/// c_alpha PV int (u(x) - u(y)) / |x-y|^{1+2 alpha} dy.
#[derive(Debug, Clone)]
pub struct SingularIntegralOperator {
    alpha: f64,
    normalization: f64,
    inner_cutoff: f64,
    outer_radius: f64,
}

impl SingularIntegralOperator {
    /// Build the operator, fixing the normalization constant by symbol
    /// consistency (the integral 2 int_0^inf (1-cos s)/s^{1+2a} ds is computed
    /// numerically and inverted) rather than from a formula table.
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_quadrature(alpha, 1e-3, 1e4)
    }

    /// Same, with explicit inner principal-value cutoff and outer truncation
    /// radius.
    pub fn with_quadrature(alpha: f64, inner_cutoff: f64, outer_radius: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!(
                "singular-integral operator needs alpha in (0,1), got {alpha}"
            )));
        }
        if !(inner_cutoff > 0.0 && outer_radius > inner_cutoff) {
            return Err(Error::Domain("need 0 < inner cutoff < outer radius".into()));
        }
        let normalization = 1.0 / (2.0 * one_minus_cos_integral(alpha));
        Ok(Self {
            alpha,
            normalization,
            inner_cutoff,
            outer_radius,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The calibrated constant c_{1,alpha}.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Apply the operator to a callable at the given points. `far` supplies
    /// the constants u approaches at -inf / +inf for the outer tail closure.
    pub fn apply<F>(&self, u: F, far: (f64, f64), points: &[f64]) -> Result<Vec<f64>>
    where
        F: Fn(f64) -> f64,
    {
        points.iter().map(|&x| self.apply_at(&u, far, x)).collect()
    }

    /// Operator value at a single point.
    pub fn apply_at<F>(&self, u: &F, far: (f64, f64), x: f64) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        let two_alpha = 2.0 * self.alpha;
        let ux = u(x);
        let pair_defect = |s: f64| 2.0 * ux - u(x + s) - u(x - s);

        // inner [0, delta]: second-order Taylor cancellation; the curvature is
        // estimated from the same symmetric pair at s = delta
        let delta = self.inner_cutoff;
        let g_delta = pair_defect(delta);
        if !g_delta.is_finite() {
            return Err(Error::Eval(format!("u not finite near x = {x}")));
        }
        let inner = g_delta / (delta * delta) * delta.powf(2.0 - two_alpha) / (2.0 - two_alpha);

        // main region [delta, S]: geometric panels, width capped so the
        // O(1)-scale variation of u is resolved
        let mut acc = 0.0;
        let mut lo = delta;
        let mut w = delta;
        while lo < self.outer_radius {
            let hi = (lo + w.min(3.0)).min(self.outer_radius);
            let piece = integrate_gl16(|s| pair_defect(s) / s.powf(1.0 + two_alpha), lo, hi);
            if !piece.is_finite() {
                return Err(Error::Eval(format!(
                    "integrand not finite on [{lo}, {hi}] at x = {x}"
                )));
            }
            acc += piece;
            lo = hi;
            w *= 1.5;
        }

        // outer tail: u(x +- s) -> far-field constants, the kernel tail
        // integrates exactly
        let outer = (2.0 * ux - far.0 - far.1) * self.outer_radius.powf(-two_alpha) / two_alpha;

        Ok(self.normalization * (inner + acc + outer))
    }
}

/// Numeric value of int_0^inf (1 - cos s)/s^{1+2 alpha} ds.
///
/// Split at s = 1: below, the integrand 2 sin^2(s/2) s^{-1-2a} goes on
/// geometric panels with an analytic sliver at 0; above, the monomial part
/// integrates exactly and the cosine part goes on half-period panels with a
/// two-term integration-by-parts closure of the tail.
fn one_minus_cos_integral(alpha: f64) -> f64 {
    let two_alpha = 2.0 * alpha;
    let eps = 1e-5_f64;
    // int_0^eps: (1-cos s)/s^{1+2a} = s^{1-2a}/2 - s^{3-2a}/24 + O(s^{5-2a})
    let head = eps.powf(2.0 - two_alpha) / (2.0 * (2.0 - two_alpha))
        - eps.powf(4.0 - two_alpha) / (24.0 * (4.0 - two_alpha));
    let low = integrate_geometric(
        |s| {
            let half = (0.5 * s).sin();
            2.0 * half * half / s.powf(1.0 + two_alpha)
        },
        eps,
        1.0,
        eps,
        1.6,
        0.25,
    );
    let s_top = 1000.0_f64;
    // int_1^inf s^{-1-2a} ds exactly
    let monomial = 1.0 / two_alpha;
    // int_1^S cos(s) s^{-1-2a} ds by half-period panels
    let mut cos_part = 0.0;
    let mut lo = 1.0_f64;
    while lo < s_top {
        let hi = (lo + PI).min(s_top);
        cos_part += integrate_gl16(|s| s.cos() * s.powf(-1.0 - two_alpha), lo, hi);
        lo = hi;
    }
    // int_S^inf cos(s) s^{-a1} ds = -sin(S) S^{-a1} + a1 cos(S) S^{-a1-1}
    //                               + O(S^{-a1-2})
    let a1 = 1.0 + two_alpha;
    let cos_tail = -s_top.sin() * s_top.powf(-a1) + a1 * s_top.cos() * s_top.powf(-a1 - 1.0);
    head + low + monomial - (cos_part + cos_tail)
}

/// Pointwise residual u_t + A u - f(u) on a uniform periodic grid.
///
/// A supersolution candidate must have residual >= -tolerance wherever it is
/// evaluated; a subsolution <= tolerance.
pub fn operator_residual(
    op: &SpectralOperator,
    u: &[f64],
    u_t: &[f64],
    reaction: &ReactionTerm,
) -> Result<Vec<f64>> {
    if u.len() != op.len() || u_t.len() != op.len() {
        return Err(Error::GridMismatch(format!(
            "residual needs {} samples, got u: {}, u_t: {}",
            op.len(),
            u.len(),
            u_t.len()
        )));
    }
    let au = op.apply(u)?;
    Ok(u.iter()
        .zip(u_t)
        .zip(au)
        .map(|((&ui, &uti), aui)| uti + aui - reaction.eval(ui))
        .collect())
}
