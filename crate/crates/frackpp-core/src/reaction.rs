//! KPP reaction terms: concave f with f(0) = f(1) = 0 and f'(1) < 0 < f'(0),
//! plus the exact flow of du/dt = f(u) used by the splitting integrator.

use crate::error::{Error, Result};
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type FlowFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A reaction nonlinearity together with its derivative data at the two
/// equilibria and, when available, the exact solution of du/dt = f(u).
#[derive(Clone)]
pub struct ReactionTerm {
    name: String,
    f: ScalarFn,
    fp0: f64,
    fp1: f64,
    exact_flow: Option<FlowFn>,
    preserves_unit_interval: bool,
}

impl std::fmt::Debug for ReactionTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReactionTerm")
            .field("name", &self.name)
            .field("fp0", &self.fp0)
            .field("fp1", &self.fp1)
            .field("exact_flow", &self.exact_flow.is_some())
            .finish()
    }
}

impl ReactionTerm {
    /// f(u) = u(1-u) with the exact logistic flow
    /// u(dt) = u e^{dt} / (1 + u (e^{dt} - 1)).
    pub fn logistic() -> Self {
        Self::scaled_logistic(1.0)
    }

    /// f(u) = rate * u(1-u); the exact flow is the logistic flow run at
    /// rescaled time.
    pub fn scaled_logistic(rate: f64) -> Self {
        assert!(rate > 0.0, "logistic rate must be positive");
        Self {
            name: if rate == 1.0 {
                "logistic".into()
            } else {
                format!("logistic*{rate}")
            },
            f: Arc::new(move |u| rate * u * (1.0 - u)),
            fp0: rate,
            fp1: -rate,
            exact_flow: Some(Arc::new(move |u: f64, dt: f64| {
                if u == 0.0 || u == 1.0 {
                    return u;
                }
                let g = (rate * dt).exp();
                let gm1 = (rate * dt).exp_m1();
                u * g / (1.0 + u * gm1)
            })),
            preserves_unit_interval: true,
        }
    }

    /// f(u) = rate * u, the linearization at 0. Does not preserve [0,1]; used
    /// for growth-bound experiments against the linear semigroup.
    pub fn linear(rate: f64) -> Self {
        Self {
            name: format!("linear*{rate}"),
            f: Arc::new(move |u| rate * u),
            fp0: rate,
            fp1: rate,
            exact_flow: Some(Arc::new(move |u: f64, dt: f64| u * (rate * dt).exp())),
            preserves_unit_interval: false,
        }
    }

    /// Arbitrary concave KPP nonlinearity with caller-declared derivative
    /// data. The flow falls back to substepped RK4.
    pub fn custom(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static, fp0: f64, fp1: f64) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            fp0,
            fp1,
            exact_flow: None,
            preserves_unit_interval: true,
        }
    }

    /// Reaction selected by name in config files. Only "logistic" ships.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "logistic" => Ok(Self::logistic()),
            other => Err(Error::Config(format!(
                "unknown reaction {other:?}; available: \"logistic\""
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// f'(0), the growth rate driving every spreading-law constant.
    pub fn fp0(&self) -> f64 {
        self.fp0
    }

    /// f'(1).
    pub fn fp1(&self) -> f64 {
        self.fp1
    }

    pub fn preserves_unit_interval(&self) -> bool {
        self.preserves_unit_interval
    }

    /// Evaluate f(u). Inputs are clamped to [0,1] for interval-preserving
    /// reactions; convolution round-off can produce values like -1e-16.
    pub fn eval(&self, u: f64) -> f64 {
        let u = if self.preserves_unit_interval {
            u.clamp(0.0, 1.0)
        } else {
            u
        };
        (self.f)(u)
    }

    /// Advance du/dt = f(u) by time dt >= 0 from state u.
    pub fn flow(&self, u: f64, dt: f64) -> Result<f64> {
        if dt < 0.0 {
            return Err(Error::Domain(format!("flow time must be >= 0, got {dt}")));
        }
        if dt == 0.0 {
            return Ok(u);
        }
        let u = if self.preserves_unit_interval {
            u.clamp(0.0, 1.0)
        } else {
            u
        };
        let out = match &self.exact_flow {
            Some(flow) => flow(u, dt),
            None => self.rk4_flow(u, dt),
        };
        Ok(if self.preserves_unit_interval {
            out.clamp(0.0, 1.0)
        } else {
            out
        })
    }

    fn rk4_flow(&self, u0: f64, dt: f64) -> f64 {
        let steps = (dt / 0.005).ceil().max(1.0) as usize;
        let h = dt / steps as f64;
        let mut u = u0;
        for _ in 0..steps {
            let k1 = (self.f)(u);
            let k2 = (self.f)(u + 0.5 * h * k1);
            let k3 = (self.f)(u + 0.5 * h * k2);
            let k4 = (self.f)(u + h * k3);
            u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        u
    }

    /// Max positive second difference of f over a uniform sample of [0,1];
    /// concave nonlinearities give a value <= tolerance scale.
    pub fn concavity_defect(&self, samples: usize) -> f64 {
        let n = samples.max(3);
        let h = 1.0 / (n - 1) as f64;
        let mut worst = f64::MIN;
        for i in 1..n - 1 {
            let u = i as f64 * h;
            let second = (self.f)(u + h) - 2.0 * (self.f)(u) + (self.f)(u - h);
            worst = worst.max(second);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn logistic_values() {
        let f = ReactionTerm::logistic();
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(1.0), 0.0);
        assert!((f.eval(0.5) - 0.25).abs() < 1e-15);
        assert_eq!(f.fp0(), 1.0);
        assert_eq!(f.fp1(), -1.0);
    }

    #[test]
    fn logistic_flow_closed_form() {
        let f = ReactionTerm::logistic();
        // u(ln 2) from 0.5: 0.5*2/(1+0.5*1) = 2/3
        let v = f.flow(0.5, std::f64::consts::LN_2).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15, "got {v}");
    }

    #[test]
    fn logistic_flow_fixed_points_and_identity() {
        let f = ReactionTerm::logistic();
        assert_eq!(f.flow(0.0, 3.0).unwrap(), 0.0);
        assert_eq!(f.flow(1.0, 3.0).unwrap(), 1.0);
        assert_eq!(f.flow(0.3, 0.0).unwrap(), 0.3);
    }

    #[test]
    fn negative_flow_time_rejected() {
        let f = ReactionTerm::logistic();
        assert!(f.flow(0.5, -0.1).is_err());
    }

    #[test]
    fn concavity_holds_for_logistic() {
        let f = ReactionTerm::logistic();
        assert!(f.concavity_defect(1000) <= 1e-12);
    }

    #[test]
    fn rk4_flow_matches_exact_logistic() {
        let exact = ReactionTerm::logistic();
        let rk = ReactionTerm::custom("logistic-rk", |u| u * (1.0 - u), 1.0, -1.0);
        for u in [0.01, 0.3, 0.7, 0.99] {
            let a = exact.flow(u, 0.4).unwrap();
            let b = rk.flow(u, 0.4).unwrap();
            assert!((a - b).abs() < 1e-12, "u={u}: {a} vs {b}");
        }
    }

    #[test]
    fn unknown_reaction_name_rejected() {
        assert!(ReactionTerm::by_name("bistable").is_err());
    }

    proptest! {
        #[test]
        fn flow_preserves_interval_and_monotonicity(
            u in 0.0_f64..=1.0,
            v in 0.0_f64..=1.0,
            dt in 0.0_f64..3.0,
        ) {
            let f = ReactionTerm::logistic();
            let fu = f.flow(u, dt).unwrap();
            let fv = f.flow(v, dt).unwrap();
            prop_assert!((0.0..=1.0).contains(&fu));
            if u <= v {
                prop_assert!(fu <= fv + 1e-15);
            } else {
                prop_assert!(fv <= fu + 1e-15);
            }
        }

        #[test]
        fn flow_semigroup_property(u in 0.0_f64..=1.0, s in 0.0_f64..2.0, t in 0.0_f64..2.0) {
            let f = ReactionTerm::logistic();
            let one = f.flow(u, s + t).unwrap();
            let two = f.flow(f.flow(u, s).unwrap(), t).unwrap();
            prop_assert!((one - two).abs() < 1e-12);
        }
    }
}
