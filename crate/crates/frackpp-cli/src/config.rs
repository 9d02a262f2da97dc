//! Config-file parsing: sectioned key-value text (TOML), fail-closed on
//! unknown keys, with documented defaults filled in during resolution.

use anyhow::{bail, Context, Result};
use frackpp_core::{
    FrontSide, GradedGridSpec, InitialCondition, RateModel, ReactionTerm, SimulationConfig,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub kernel: KernelSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reaction: Option<ReactionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fronts: Option<FrontsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<ChecksSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub alpha: f64,
    /// "auto" (closed forms when they exist) or "tabulated".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// "compact" or "monotone".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_radius: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core_half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core_spacing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stretch: Option<f64>,
    /// symmetric extent; overridden by left_width/right_width when present
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_mismatch_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    /// "exponential" or "linear"
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_model: Option<String>,
    /// "left" or "right"
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_side: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supersolution: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invasion_below: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invasion_above: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound_epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stretch: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_sweep: Option<bool>,
}

/// How the front positions are fitted after the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub model: RateModelTag,
    pub side: FrontSideTag,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModelTag {
    Exponential,
    Linear,
}

impl From<RateModelTag> for RateModel {
    fn from(tag: RateModelTag) -> Self {
        match tag {
            RateModelTag::Exponential => RateModel::ExponentialInT,
            RateModelTag::Linear => RateModel::LinearInT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontSideTag {
    Left,
    Right,
}

impl From<FrontSideTag> for FrontSide {
    fn from(tag: FrontSideTag) -> Self {
        match tag {
            FrontSideTag::Left => FrontSide::Left,
            FrontSideTag::Right => FrontSide::Right,
        }
    }
}

/// Which verification passes run after the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checks {
    /// compare the fitted 0.5-level rate against the theoretical constant
    pub rate: bool,
    pub supersolution: bool,
    pub invasion_below: Option<f64>,
    pub invasion_above: Option<f64>,
    pub lower_bound: Option<(f64, f64)>,
    pub stretch: bool,
    pub profile_sweep: bool,
}

/// Fully resolved experiment: simulation config plus fit and check selections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub simulation: SimulationConfig,
    pub fit: FitSpec,
    pub checks: Checks,
}

impl Experiment {
    pub fn expected_rate(&self) -> f64 {
        let (c_star, c_star_star, c_star_one) = self.simulation.derived_constants(1.0);
        match (self.fit.model, self.simulation.initial) {
            (RateModelTag::Linear, _) => c_star_one,
            (RateModelTag::Exponential, InitialCondition::MonotoneRamp) => c_star_star,
            (RateModelTag::Exponential, InitialCondition::Compact { .. }) => c_star,
        }
    }
}

/// Parse and resolve a config file, filling documented defaults and refusing
/// unknown keys.
pub fn parse_config(path: &Path) -> Result<Experiment> {
    let body = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    parse_config_str(&body)
}

pub fn parse_config_str(body: &str) -> Result<Experiment> {
    let file: FileConfig = toml::from_str(body).map_err(|e| anyhow::anyhow!("{e}"))?;
    resolve(file)
}

fn resolve(file: FileConfig) -> Result<Experiment> {
    let alpha = file.kernel.alpha;
    if !(alpha > 0.0 && alpha <= 1.0) {
        bail!("kernel.alpha must lie in (0, 1], got {alpha}");
    }
    let force_tabulated = match file.kernel.mode.as_deref() {
        None | Some("auto") => false,
        Some("tabulated") => {
            if alpha >= 1.0 {
                bail!("tabulated mode requires alpha < 1");
            }
            true
        }
        Some(other) => bail!("kernel.mode must be \"auto\" or \"tabulated\", got {other:?}"),
    };

    let reaction_name = file
        .reaction
        .and_then(|r| r.name)
        .unwrap_or_else(|| "logistic".into());
    // fail at parse time, not runtime
    ReactionTerm::by_name(&reaction_name).map_err(|e| anyhow::anyhow!("{e}"))?;

    let initial_section = file.initial.unwrap_or(InitialSection {
        kind: None,
        support_radius: None,
    });
    let initial = match initial_section.kind.as_deref() {
        None | Some("compact") => InitialCondition::Compact {
            support_radius: initial_section.support_radius.unwrap_or(1.0),
        },
        Some("monotone") => {
            if initial_section.support_radius.is_some() {
                bail!("initial.support_radius only applies to kind = \"compact\"");
            }
            InitialCondition::MonotoneRamp
        }
        Some(other) => bail!("initial.kind must be \"compact\" or \"monotone\", got {other:?}"),
    };

    let time = file.time.unwrap_or(TimeSection {
        dt: None,
        t_final: None,
        snapshots: None,
    });
    let dt = time.dt.unwrap_or(0.05);
    if !(dt > 0.0) {
        bail!("time.dt must be positive, got {dt}");
    }
    let t_final = time.t_final.unwrap_or(14.0);
    if t_final < 0.0 {
        bail!("time.t_final must be >= 0");
    }
    let snapshot_times = time.snapshots.unwrap_or_else(|| {
        let mut ts: Vec<f64> = (0..=t_final.floor() as i64).map(|i| i as f64).collect();
        if ts.last() != Some(&t_final) {
            ts.push(t_final);
        }
        ts
    });

    // grid defaults: uniform core of half-width 4 at spacing 0.02, geometric
    // stretch 1.005, extents sized from the spreading law with 20% headroom
    let grid_section = file.grid.unwrap_or(GridSection {
        core_half_width: None,
        core_spacing: None,
        stretch: None,
        half_width: None,
        left_width: None,
        right_width: None,
        boundary_mismatch_tol: None,
    });
    let (default_left, default_right) = if alpha >= 1.0 {
        let reach = 2.0 * t_final + 40.0;
        (reach, reach)
    } else {
        match initial {
            InitialCondition::Compact { .. } => {
                let reach = 12.0 * (t_final / (1.0 + 2.0 * alpha)).exp();
                (reach, reach)
            }
            InitialCondition::MonotoneRamp => {
                (12.0 * (t_final / (2.0 * alpha)).exp(), 200.0)
            }
        }
    };
    let core_half_width = grid_section
        .core_half_width
        .unwrap_or(if alpha >= 1.0 { 2.0 * t_final + 20.0 } else { 4.0 });
    let core_spacing = grid_section.core_spacing.unwrap_or(0.02);
    let stretch = grid_section.stretch.unwrap_or(1.005);
    let left_width = grid_section
        .left_width
        .or(grid_section.half_width)
        .unwrap_or(default_left);
    let right_width = grid_section
        .right_width
        .or(grid_section.half_width)
        .unwrap_or(default_right);

    let fronts = file.fronts.unwrap_or(FrontsSection {
        levels: None,
        fit_model: None,
        fit_side: None,
        fit_window: None,
    });
    let levels = fronts.levels.unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
    for &l in &levels {
        if !(l > 0.0 && l < 1.0) {
            bail!("fronts.levels must lie in (0,1), got {l}");
        }
    }
    let model = match fronts.fit_model.as_deref() {
        Some("exponential") => RateModelTag::Exponential,
        Some("linear") => RateModelTag::Linear,
        None => {
            if alpha >= 1.0 {
                RateModelTag::Linear
            } else {
                RateModelTag::Exponential
            }
        }
        Some(other) => bail!("fronts.fit_model must be \"exponential\" or \"linear\", got {other:?}"),
    };
    let side = match fronts.fit_side.as_deref() {
        Some("left") => FrontSideTag::Left,
        Some("right") => FrontSideTag::Right,
        None => match initial {
            InitialCondition::MonotoneRamp => FrontSideTag::Left,
            _ => FrontSideTag::Right,
        },
        Some(other) => bail!("fronts.fit_side must be \"left\" or \"right\", got {other:?}"),
    };
    // asymptotic statements: default window is the last 40% of the run
    let window = match fronts.fit_window {
        Some([a, b]) => {
            if !(a < b && b <= t_final + 1e-9) {
                bail!("fronts.fit_window must satisfy 0 <= a < b <= t_final");
            }
            (a, b)
        }
        None => (0.6 * t_final, t_final),
    };

    let checks_section = file.checks.unwrap_or(ChecksSection {
        rate: None,
        supersolution: None,
        invasion_below: None,
        invasion_above: None,
        lower_bound_sigma: None,
        lower_bound_epsilon: None,
        stretch: None,
        profile_sweep: None,
    });
    let lower_bound = match (
        checks_section.lower_bound_sigma,
        checks_section.lower_bound_epsilon,
    ) {
        (Some(s), Some(e)) => Some((s, e)),
        (None, None) => None,
        _ => bail!("checks.lower_bound_sigma and checks.lower_bound_epsilon go together"),
    };
    let has_stretch_levels = levels.contains(&0.25) && levels.contains(&0.75);
    let checks = Checks {
        rate: checks_section.rate.unwrap_or(true),
        supersolution: checks_section.supersolution.unwrap_or(true),
        invasion_below: checks_section.invasion_below,
        invasion_above: checks_section.invasion_above,
        lower_bound,
        stretch: checks_section.stretch.unwrap_or(has_stretch_levels),
        profile_sweep: checks_section.profile_sweep.unwrap_or(false),
    };
    if checks.stretch && !has_stretch_levels {
        bail!("checks.stretch needs levels 0.25 and 0.75 in fronts.levels");
    }

    Ok(Experiment {
        simulation: SimulationConfig {
            alpha,
            force_tabulated,
            reaction: reaction_name,
            initial,
            dt,
            t_final,
            snapshot_times,
            levels,
            grid: GradedGridSpec {
                core_half_width,
                core_spacing,
                stretch,
                left_width,
                right_width,
            },
            boundary_mismatch_tol: grid_section.boundary_mismatch_tol.unwrap_or(0.05),
        },
        fit: FitSpec {
            model,
            side,
            window,
        },
        checks,
    })
}

/// Serialize a resolved experiment back to config-file text; parsing the
/// output reproduces the experiment exactly.
pub fn emit_config(experiment: &Experiment) -> Result<String> {
    let sim = &experiment.simulation;
    let (kind, support_radius) = match sim.initial {
        InitialCondition::Compact { support_radius } => ("compact", Some(support_radius)),
        InitialCondition::MonotoneRamp => ("monotone", None),
    };
    let file = FileConfig {
        kernel: KernelSection {
            alpha: sim.alpha,
            mode: Some(if sim.force_tabulated { "tabulated" } else { "auto" }.into()),
        },
        reaction: Some(ReactionSection {
            name: Some(sim.reaction.clone()),
        }),
        initial: Some(InitialSection {
            kind: Some(kind.into()),
            support_radius,
        }),
        time: Some(TimeSection {
            dt: Some(sim.dt),
            t_final: Some(sim.t_final),
            snapshots: Some(sim.snapshot_times.clone()),
        }),
        grid: Some(GridSection {
            core_half_width: Some(sim.grid.core_half_width),
            core_spacing: Some(sim.grid.core_spacing),
            stretch: Some(sim.grid.stretch),
            half_width: None,
            left_width: Some(sim.grid.left_width),
            right_width: Some(sim.grid.right_width),
            boundary_mismatch_tol: Some(sim.boundary_mismatch_tol),
        }),
        fronts: Some(FrontsSection {
            levels: Some(sim.levels.clone()),
            fit_model: Some(
                match experiment.fit.model {
                    RateModelTag::Exponential => "exponential",
                    RateModelTag::Linear => "linear",
                }
                .into(),
            ),
            fit_side: Some(
                match experiment.fit.side {
                    FrontSideTag::Left => "left",
                    FrontSideTag::Right => "right",
                }
                .into(),
            ),
            fit_window: Some([experiment.fit.window.0, experiment.fit.window.1]),
        }),
        checks: Some(ChecksSection {
            rate: Some(experiment.checks.rate),
            supersolution: Some(experiment.checks.supersolution),
            invasion_below: experiment.checks.invasion_below,
            invasion_above: experiment.checks.invasion_above,
            lower_bound_sigma: experiment.checks.lower_bound.map(|(s, _)| s),
            lower_bound_epsilon: experiment.checks.lower_bound.map(|(_, e)| e),
            stretch: Some(experiment.checks.stretch),
            profile_sweep: Some(experiment.checks.profile_sweep),
        }),
    };
    toml::to_string_pretty(&file).context("serializing config")
}
