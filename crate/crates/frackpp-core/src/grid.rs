//! Graded 1-D meshes and sampled solution fields.
//!
//! Exponentially moving fronts with algebraic tails need a grid that is fine
//! near the origin and reaches out to ~1e5-1e7 with a bounded node budget,
//! so the mesh is uniform on a core interval and geometrically stretched
//! outside it.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Construction parameters of a graded grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradedGridSpec {
    /// Half-width of the uniform core around 0.
    pub core_half_width: f64,
    /// Node spacing inside the core.
    pub core_spacing: f64,
    /// Geometric growth factor of cell widths outside the core (>= 1).
    pub stretch: f64,
    /// Extent of the grid to the left of 0 (positive number).
    pub left_width: f64,
    /// Extent of the grid to the right of 0.
    pub right_width: f64,
}

impl GradedGridSpec {
    /// Symmetric grid reaching `half_width` on both sides.
    pub fn symmetric(core_half_width: f64, core_spacing: f64, stretch: f64, half_width: f64) -> Self {
        Self {
            core_half_width,
            core_spacing,
            stretch,
            left_width: half_width,
            right_width: half_width,
        }
    }
}

/// A strictly increasing 1-D mesh, uniform on [-core, core] and geometrically
/// stretched outside.
#[derive(Debug)]
pub struct GradedGrid {
    spec: GradedGridSpec,
    nodes: Vec<f64>,
    /// index of the node at x = 0
    origin: usize,
}

impl GradedGrid {
    pub fn build(spec: GradedGridSpec) -> Result<Self> {
        if !(spec.core_spacing > 0.0) || !(spec.core_half_width >= spec.core_spacing) {
            return Err(Error::Config(
                "core spacing must be positive and no wider than the core".into(),
            ));
        }
        if !(spec.stretch >= 1.0) {
            return Err(Error::Config("stretch factor must be >= 1".into()));
        }
        if spec.stretch == 1.0
            && (spec.left_width > 4.0 * spec.core_half_width
                || spec.right_width > 4.0 * spec.core_half_width)
        {
            return Err(Error::Config(
                "stretch = 1 (uniform grid) only supported up to 4x the core width".into(),
            ));
        }
        if spec.left_width < spec.core_half_width || spec.right_width < spec.core_half_width {
            return Err(Error::Config("grid extents must contain the core".into()));
        }

        let n_core = (spec.core_half_width / spec.core_spacing).round() as usize;
        let h = spec.core_half_width / n_core as f64;

        let one_side = |extent: f64| -> Vec<f64> {
            // nodes beyond the core edge, geometric widths
            let mut xs = Vec::new();
            let mut x = spec.core_half_width;
            let mut w = h * spec.stretch;
            while x < extent {
                x += w;
                xs.push(x);
                w *= spec.stretch;
            }
            xs
        };

        let right_tail = one_side(spec.right_width);
        let left_tail = one_side(spec.left_width);

        let mut nodes =
            Vec::with_capacity(left_tail.len() + right_tail.len() + 2 * n_core + 1);
        for &x in left_tail.iter().rev() {
            nodes.push(-x);
        }
        for i in 0..=2 * n_core {
            nodes.push((i as f64 - n_core as f64) * h);
        }
        let origin = left_tail.len() + n_core;
        nodes.extend_from_slice(&right_tail);

        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Config("grid nodes are not strictly increasing".into()));
            }
        }
        Ok(Self { spec, nodes, origin })
    }

    pub fn spec(&self) -> &GradedGridSpec {
        &self.spec
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn origin_index(&self) -> usize {
        self.origin
    }

    pub fn left_edge(&self) -> f64 {
        self.nodes[0]
    }

    pub fn right_edge(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn is_symmetric(&self) -> bool {
        self.spec.left_width == self.spec.right_width
    }

    /// Trapezoid quadrature weights for integrals of nodal data over the grid.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let half = 0.5 * (self.nodes[i + 1] - self.nodes[i]);
            w[i] += half;
            w[i + 1] += half;
        }
        w
    }

    /// Index of the last node with position <= x, or None left of the grid.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if x < self.nodes[0] {
            return None;
        }
        let mut lo = 0usize;
        let mut hi = self.nodes.len() - 1;
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if self.nodes[mid] <= x {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Some(lo)
    }
}

/// A sampled solution on a graded grid with constant far-field closure values.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<GradedGrid>,
    values: Vec<f64>,
    left_value: f64,
    right_value: f64,
    time: f64,
}

impl Field {
    pub fn new(
        grid: Arc<GradedGrid>,
        values: Vec<f64>,
        left_value: f64,
        right_value: f64,
        time: f64,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            left_value,
            right_value,
            time,
        })
    }

    /// Sample a function at the grid nodes.
    pub fn from_fn(
        grid: Arc<GradedGrid>,
        f: impl Fn(f64) -> f64,
        left_value: f64,
        right_value: f64,
    ) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self {
            grid,
            values,
            left_value,
            right_value,
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<GradedGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn left_value(&self) -> f64 {
        self.left_value
    }

    pub fn right_value(&self) -> f64 {
        self.right_value
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn set_far_field(&mut self, left: f64, right: f64) {
        self.left_value = left;
        self.right_value = right;
    }

    /// Piecewise-linear interpolation with far-field constants outside.
    pub fn interp(&self, x: f64) -> f64 {
        let nodes = self.grid.nodes();
        if x <= nodes[0] {
            return if x == nodes[0] { self.values[0] } else { self.left_value };
        }
        if x >= *nodes.last().unwrap() {
            return if x == *nodes.last().unwrap() {
                *self.values.last().unwrap()
            } else {
                self.right_value
            };
        }
        let i = self.grid.locate(x).unwrap();
        if nodes[i] == x {
            return self.values[i];
        }
        let t = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest decrease between consecutive nodes (0 for nondecreasing data).
    pub fn monotonicity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for w in self.values.windows(2) {
            worst = worst.max(w[0] - w[1]);
        }
        worst
    }

    /// How far any value strays outside [0,1].
    pub fn range_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for &v in &self.values {
            worst = worst.max(-v).max(v - 1.0);
        }
        worst
    }

    /// Trapezoid integral of the sampled values over the grid (equals the
    /// exact integral of the piecewise-linear reconstruction).
    pub fn trapezoid_integral(&self) -> f64 {
        let nodes = self.grid.nodes();
        let mut acc = 0.0;
        for i in 0..nodes.len() - 1 {
            acc += 0.5 * (self.values[i] + self.values[i + 1]) * (nodes[i + 1] - nodes[i]);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> Arc<GradedGrid> {
        Arc::new(
            GradedGrid::build(GradedGridSpec::symmetric(2.0, 0.5, 1.3, 20.0)).unwrap(),
        )
    }

    #[test]
    fn grid_is_strictly_increasing_and_symmetric() {
        let g = small_grid();
        assert!(g.is_symmetric());
        assert_eq!(g.node(g.origin_index()), 0.0);
        for w in g.nodes().windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(g.right_edge() >= 20.0);
        assert_eq!(g.left_edge(), -g.right_edge());
    }

    #[test]
    fn asymmetric_extents() {
        let g = GradedGrid::build(GradedGridSpec {
            core_half_width: 2.0,
            core_spacing: 0.5,
            stretch: 1.3,
            left_width: 100.0,
            right_width: 10.0,
        })
        .unwrap();
        assert!(g.left_edge() <= -100.0);
        assert!(g.right_edge() >= 10.0 && g.right_edge() < 100.0);
    }

    #[test]
    fn locate_brackets_positions() {
        let g = small_grid();
        for &x in &[-19.0, -2.0, 0.0, 0.25, 1.99, 7.3] {
            let i = g.locate(x).unwrap();
            assert!(g.node(i) <= x);
            if i + 1 < g.len() {
                assert!(g.node(i + 1) > x);
            }
        }
        assert!(g.locate(g.left_edge() - 1.0).is_none());
    }

    #[test]
    fn interp_reproduces_linear_functions() {
        let g = small_grid();
        let f = Field::from_fn(g, |x| 0.25 * x + 1.0, 0.0, 0.0);
        for &x in &[-1.7, 0.0, 0.3, 5.11] {
            assert!((f.interp(x) - (0.25 * x + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn trapezoid_integral_of_hat() {
        let g = small_grid();
        // hat of height 1 supported on [-2,2]: integral 2
        let f = Field::from_fn(g, |x| (1.0 - 0.5 * x.abs()).max(0.0), 0.0, 0.0);
        assert!((f.trapezoid_integral() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_grid_guard() {
        assert!(GradedGrid::build(GradedGridSpec::symmetric(2.0, 0.5, 1.0, 100.0)).is_err());
        assert!(GradedGrid::build(GradedGridSpec::symmetric(50.0, 0.5, 1.0, 60.0)).is_ok());
    }
}
