//! Alpha-stable transition densities p(t,x) with Fourier transform
//! exp(-t |xi|^(2 alpha)).
//!
//! Closed forms exist at alpha = 1/2 (Cauchy) and alpha = 1 (Gaussian). For
//! other alpha the density p(1,r) is tabulated once by numeric Fourier
//! inversion on a log-spaced radius grid and extrapolated beyond the table by
//! its algebraic tail C r^{-(N+2 alpha)}. Evaluation at other times goes
//! through the exact self-similar scaling
//! p(t,x) = t^{-N/(2 alpha)} p(1, t^{-1/(2 alpha)} x), always through the same
//! p(1,.) code path.

use crate::error::{Error, Result};
use crate::quad::{integrate_gl16, integrate_gl4};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

/// Evaluation strategy for a stable kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelMode {
    /// alpha = 1/2, explicit Cauchy profile.
    CauchyClosedForm,
    /// alpha = 1, heat kernel baseline.
    Gaussian,
    /// any alpha in (0,1), tabulated Fourier inversion.
    Tabulated,
}

/// Tabulation of p(1,r) on a log-spaced radius grid with algebraic tail.
#[derive(Debug, Clone)]
pub struct KernelTable {
    r_min: f64,
    r_max: f64,
    log_step: f64,
    p_at_zero: f64,
    log_radii: Vec<f64>,
    log_values: Vec<f64>,
    /// d(ln p)/d(index) at the nodes, for cubic Hermite interpolation.
    slopes: Vec<f64>,
    /// Coefficient C of the tail law p(1,r) ~ C r^{-(N+2a)}, fitted from the
    /// last decade of the table.
    tail_coeff: f64,
    /// Exact tail exponent -(N + 2 alpha) used for extrapolation.
    tail_exponent: f64,
    /// Free log-log slope fitted over the last decade (diagnostic).
    fitted_tail_exponent: f64,
    /// Cumulative int_0^{r_i} p(1,s) ds at the nodes.
    cum_mass: Vec<f64>,
    /// Complementary tail int_{r_i}^{inf} p(1,s) ds at the nodes, accumulated
    /// backward so small tail masses keep full relative accuracy.
    tail_mass_nodes: Vec<f64>,
    /// Cumulative int_0^{r_i} s p(1,s) ds at the nodes.
    cum_moment: Vec<f64>,
}

/// An alpha-stable transition density generating the Feller semigroup.
///
/// Immutable after construction; evaluation is pure and thread-safe.
#[derive(Debug, Clone)]
pub struct StableKernel {
    alpha: f64,
    dim: u32,
    mode: KernelMode,
    table: Option<KernelTable>,
    /// Profile normalization: B_N for the Cauchy form, (4 pi)^{-N/2} for the
    /// Gaussian, unused (1.0) for tabulated kernels.
    normalization: f64,
}

/// Outcome of checking the two-sided algebraic kernel bound.
#[derive(Debug, Clone, Serialize)]
pub struct KernelBoundReport {
    pub alpha: f64,
    pub dim: u32,
    pub candidate_b: f64,
    /// Smallest constant that would make the two-sided bound hold on the
    /// tested set.
    pub required_b: f64,
    pub max_lower_violation: f64,
    pub max_upper_violation: f64,
    pub passes: bool,
}

impl StableKernel {
    /// Explicit alpha = 1/2 kernel B_N t / (t^2 + |x|^2)^{(N+1)/2}.
    pub fn cauchy(dim: u32) -> Result<Self> {
        if dim < 1 {
            return Err(Error::Domain("dimension must be >= 1".into()));
        }
        let n = dim as f64;
        // B_N normalizes unit mass: Gamma((N+1)/2) / pi^{(N+1)/2}
        let b_n = libm::tgamma(0.5 * (n + 1.0)) / PI.powf(0.5 * (n + 1.0));
        Ok(Self {
            alpha: 0.5,
            dim,
            mode: KernelMode::CauchyClosedForm,
            table: None,
            normalization: b_n,
        })
    }

    /// Gaussian baseline (alpha = 1), kernel (4 pi t)^{-N/2} e^{-|x|^2/(4t)}.
    pub fn gaussian(dim: u32) -> Result<Self> {
        if dim < 1 {
            return Err(Error::Domain("dimension must be >= 1".into()));
        }
        Ok(Self {
            alpha: 1.0,
            dim,
            mode: KernelMode::Gaussian,
            table: None,
            normalization: (4.0 * PI).powf(-0.5 * dim as f64),
        })
    }

    /// Kernel for any stability index in (0,1], choosing the closed form when
    /// one exists and building the default tabulation otherwise.
    pub fn for_alpha(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!(
                "stability index must lie in (0,1], got {alpha}"
            )));
        }
        if alpha == 0.5 {
            Self::cauchy(1)
        } else if alpha == 1.0 {
            Self::gaussian(1)
        } else {
            Self::tabulated(alpha, 1, 1e6, 4096)
        }
    }

    /// One-time Fourier inversion of exp(-|xi|^{2 alpha}) tabulated on a
    /// log-spaced radius grid reaching `r_max`, with `nodes` table nodes.
    pub fn tabulated(alpha: f64, dim: u32, r_max: f64, nodes: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!(
                "tabulated kernels require alpha in (0,1), got {alpha}"
            )));
        }
        if dim != 1 {
            return Err(Error::Unsupported(
                "tabulated kernels are built for N = 1 only".into(),
            ));
        }
        if nodes < 64 || r_max < 100.0 {
            return Err(Error::Config(
                "tabulation needs at least 64 nodes and r_max >= 100".into(),
            ));
        }
        let table = build_table(alpha, r_max, nodes)?;
        Ok(Self {
            alpha,
            dim,
            mode: KernelMode::Tabulated,
            table: Some(table),
            normalization: 1.0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn mode(&self) -> KernelMode {
        self.mode
    }

    /// p(1, r) for radius r >= 0.
    pub fn profile(&self, r: f64) -> Result<f64> {
        let r = r.abs();
        match self.mode {
            KernelMode::CauchyClosedForm => {
                let n = self.dim as f64;
                Ok(self.normalization / (1.0 + r * r).powf(0.5 * (n + 1.0)))
            }
            KernelMode::Gaussian => Ok(self.normalization * (-0.25 * r * r).exp()),
            KernelMode::Tabulated => {
                let table = self
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::State("tabulated kernel without a built table".into()))?;
                Ok(table.eval(r))
            }
        }
    }

    /// Evaluate p(t,x); `x` is the signed coordinate for N = 1, the radius
    /// otherwise.
    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("kernel time must be positive, got {t}")));
        }
        let s = t.powf(-0.5 / self.alpha);
        Ok(s.powi(self.dim as i32) * self.profile(x.abs() * s)?)
    }

    /// Cumulative distribution int_{-inf}^{x} p(t,y) dy (N = 1 only).
    pub fn cdf(&self, t: f64, x: f64) -> Result<f64> {
        Ok(0.5 + self.signed_mass(t, x)?)
    }

    /// Signed partial mass int_0^x p(t,y) dy (odd in x, N = 1 only).
    pub fn signed_mass(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.at_time(t)?.signed_mass(x))
    }

    /// Partial first moment int_0^x y p(t,y) dy (even in x, N = 1 only).
    pub fn partial_moment(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.at_time(t)?.partial_moment(x))
    }

    /// View of the kernel at a fixed time with the scaling factor hoisted,
    /// for bulk antiderivative evaluation (N = 1 only).
    pub fn at_time(&self, t: f64) -> Result<KernelAtTime<'_>> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("kernel time must be positive, got {t}")));
        }
        if self.dim != 1 {
            return Err(Error::Unsupported("time view is N = 1 only".into()));
        }
        if self.mode == KernelMode::Tabulated && self.table.is_none() {
            return Err(Error::State("tabulated kernel without a built table".into()));
        }
        Ok(KernelAtTime {
            kernel: self,
            scale: t.powf(-0.5 / self.alpha),
        })
    }

    /// Total mass of p(t,.) by quadrature of the profile (N = 1).
    pub fn mass(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("kernel time must be positive, got {t}")));
        }
        match self.mode {
            KernelMode::CauchyClosedForm | KernelMode::Gaussian => {
                // independent quadrature of the profile out to the far tail
                let prof = |r: f64| self.profile(r).unwrap();
                let mut total = crate::quad::integrate_geometric(prof, 0.0, 1e7, 1e-4, 1.4, 1e6);
                if self.mode == KernelMode::CauchyClosedForm {
                    // remaining Cauchy tail beyond 1e7: B_1 / r
                    total += self.normalization / 1e7;
                }
                Ok(2.0 * total)
            }
            KernelMode::Tabulated => {
                let table = self.table.as_ref().unwrap();
                Ok(2.0 * (table.cum_mass.last().unwrap()
                    + table.tail_coeff * table.r_max.powf(-2.0 * self.alpha)
                        / (2.0 * self.alpha)))
            }
        }
    }

    /// Max over `grid` of |(p(t,.) * p(s,.))(x) - p(t+s, x)| using quadrature
    /// convolution (N = 1).
    pub fn semigroup_defect(&self, t: f64, s: f64, grid: &[f64]) -> Result<f64> {
        if !(t > 0.0 && s > 0.0) {
            return Err(Error::Domain("semigroup times must be positive".into()));
        }
        if self.dim != 1 {
            return Err(Error::Unsupported("semigroup check is N = 1 only".into()));
        }
        let scale = t.powf(0.5 / self.alpha).max(s.powf(0.5 / self.alpha)).max(1.0);
        let y_cut = 300.0 * scale;
        let mut worst: f64 = 0.0;
        for &x in grid {
            let conv = self.convolve_at(t, s, x, y_cut)?;
            let exact = self.eval(t + s, x)?;
            worst = worst.max((conv - exact).abs());
        }
        Ok(worst)
    }

    fn convolve_at(&self, t: f64, s: f64, x: f64, y_cut: f64) -> Result<f64> {
        // panel edges refined around the two kernel peaks y = 0 and y = x
        let mut edges: Vec<f64> = Vec::new();
        let mut push_fan = |center: f64| {
            let mut w = 1e-6;
            let mut off = 0.0;
            while center - off > -y_cut || center + off < y_cut {
                edges.push((center + off).clamp(-y_cut, y_cut));
                edges.push((center - off).clamp(-y_cut, y_cut));
                off += w;
                w *= 1.35;
                if off > 2.0 * y_cut {
                    break;
                }
            }
        };
        push_fan(0.0);
        push_fan(x);
        edges.push(-y_cut);
        edges.push(y_cut);
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut acc = 0.0;
        for w in edges.windows(2) {
            if w[1] - w[0] < 1e-14 {
                continue;
            }
            acc += integrate_gl16(
                |y| self.eval(t, y).unwrap() * self.eval(s, x - y).unwrap(),
                w[0],
                w[1],
            );
        }
        Ok(acc)
    }

    /// Verify the two-sided algebraic bound
    /// B^{-1} <= p(t,x) t^{N/(2a)} (1 + |t^{-1/(2a)} x|^{N+2a}) <= B
    /// on a test set, and report the smallest empirically sufficient B.
    pub fn check_bounds(&self, candidate_b: f64, test_set: &[(f64, f64)]) -> Result<KernelBoundReport> {
        if self.alpha >= 1.0 {
            return Err(Error::Unsupported(
                "the algebraic two-sided bound excludes the Gaussian case".into(),
            ));
        }
        let exponent = self.dim as f64 + 2.0 * self.alpha;
        let mut sup = f64::MIN;
        let mut inf = f64::MAX;
        let mut lower_viol: f64 = 0.0;
        let mut upper_viol: f64 = 0.0;
        for &(t, x) in test_set {
            if !(t > 0.0) {
                return Err(Error::Domain("bound test times must be positive".into()));
            }
            let r = x.abs() * t.powf(-0.5 / self.alpha);
            let q = self.profile(r)? * (1.0 + r.powf(exponent));
            sup = sup.max(q);
            inf = inf.min(q);
            lower_viol = lower_viol.max(1.0 / candidate_b - q);
            upper_viol = upper_viol.max(q - candidate_b);
        }
        // equality at round-off (the Cauchy case has the ratio identically
        // 1/pi) counts as satisfied
        if lower_viol < 1e-12 {
            lower_viol = 0.0;
        }
        if upper_viol < 1e-12 {
            upper_viol = 0.0;
        }
        let required_b = sup.max(1.0 / inf).max(1.0);
        Ok(KernelBoundReport {
            alpha: self.alpha,
            dim: self.dim,
            candidate_b,
            required_b,
            max_lower_violation: lower_viol.max(0.0),
            max_upper_violation: upper_viol.max(0.0),
            passes: lower_viol <= 0.0 && upper_viol <= 0.0,
        })
    }

    /// Fitted tail coefficient of the tabulation (tabulated mode only).
    pub fn tail_coefficient(&self) -> Option<f64> {
        self.table.as_ref().map(|t| t.tail_coeff)
    }

    /// Free-fit log-log tail slope of the tabulation (tabulated mode only).
    pub fn fitted_tail_exponent(&self) -> Option<f64> {
        self.table.as_ref().map(|t| t.fitted_tail_exponent)
    }

    pub fn table_node_count(&self) -> Option<usize> {
        self.table.as_ref().map(|t| t.log_radii.len() + 1)
    }

    /// Write the tabulation as CSV with columns `r,p1_of_r`.
    pub fn export_table_csv(&self, path: &Path) -> Result<()> {
        let table = self
            .table
            .as_ref()
            .ok_or_else(|| Error::State("no table to export".into()))?;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "r,p1_of_r")?;
        writeln!(out, "{:.16e},{:.16e}", 0.0, table.p_at_zero)?;
        for (lr, lp) in table.log_radii.iter().zip(&table.log_values) {
            writeln!(out, "{:.16e},{:.16e}", lr.exp(), lp.exp())?;
        }
        Ok(())
    }

    /// Write the JSON sidecar describing the tabulation.
    pub fn export_table_sidecar(&self, path: &Path) -> Result<()> {
        let table = self
            .table
            .as_ref()
            .ok_or_else(|| Error::State("no table to export".into()))?;
        let sidecar = TableSidecar {
            alpha: self.alpha,
            dim: self.dim,
            tail_coefficient: table.tail_coeff,
            node_count: table.log_radii.len() + 1,
        };
        let body = serde_json::to_string_pretty(&sidecar)
            .map_err(|e| Error::Build(format!("sidecar serialization failed: {e}")))?;
        std::fs::write(path, body)?;
        Ok(())
    }

    /// Rebuild a tabulated kernel from an exported CSV + sidecar pair.
    pub fn import_table(csv_path: &Path, sidecar_path: &Path) -> Result<Self> {
        let sidecar: TableSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path)?)
            .map_err(|e| Error::State(format!("invalid table sidecar: {e}")))?;
        let body = std::fs::read_to_string(csv_path)?;
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (i, line) in body.lines().enumerate() {
            if i == 0 {
                if line.trim() != "r,p1_of_r" {
                    return Err(Error::State(format!(
                        "unexpected table header {:?}",
                        line.trim()
                    )));
                }
                continue;
            }
            let mut parts = line.split(',');
            let r: f64 = parts
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::State(format!("bad table row {i}")))?;
            let p: f64 = parts
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::State(format!("bad table row {i}")))?;
            radii.push(r);
            values.push(p);
        }
        if radii.len() != sidecar.node_count {
            return Err(Error::State(format!(
                "table has {} nodes but sidecar declares {}",
                radii.len(),
                sidecar.node_count
            )));
        }
        if radii.first() != Some(&0.0) || radii.len() < 3 {
            return Err(Error::State("table must start at r = 0".into()));
        }
        let table = assemble_table(
            sidecar.alpha,
            values[0],
            &radii[1..],
            &values[1..],
            Some(sidecar.tail_coefficient),
        )?;
        Ok(Self {
            alpha: sidecar.alpha,
            dim: sidecar.dim,
            mode: KernelMode::Tabulated,
            table: Some(table),
            normalization: 1.0,
        })
    }
}

/// A kernel bound to a fixed evolution time, exposing the antiderivatives the
/// cell-exact convolution needs: the signed partial mass int_0^z p(t,s) ds and
/// the partial first moment int_0^z s p(t,s) ds.
pub struct KernelAtTime<'a> {
    kernel: &'a StableKernel,
    /// t^{-1/(2 alpha)}
    scale: f64,
}

impl KernelAtTime<'_> {
    pub fn density(&self, z: f64) -> f64 {
        let r = z.abs() * self.scale;
        let p1 = match self.kernel.mode {
            KernelMode::CauchyClosedForm => self.kernel.normalization / (1.0 + r * r),
            KernelMode::Gaussian => self.kernel.normalization * (-0.25 * r * r).exp(),
            KernelMode::Tabulated => self.kernel.table.as_ref().unwrap().eval(r),
        };
        self.scale * p1
    }

    /// int_0^z p(t,s) ds, odd in z.
    pub fn signed_mass(&self, z: f64) -> f64 {
        let r = z.abs() * self.scale;
        let half = match self.kernel.mode {
            KernelMode::CauchyClosedForm => r.atan() / PI,
            KernelMode::Gaussian => 0.5 * libm::erf(0.5 * r),
            KernelMode::Tabulated => self.kernel.table.as_ref().unwrap().half_mass_to(r),
        };
        half.copysign(z)
    }

    /// int_0^z s p(t,s) ds, even in z.
    pub fn partial_moment(&self, z: f64) -> f64 {
        let r = z.abs() * self.scale;
        let m1 = match self.kernel.mode {
            KernelMode::CauchyClosedForm => 0.5 / PI * (r * r).ln_1p(),
            KernelMode::Gaussian => {
                (1.0 / (4.0 * PI).sqrt()) * 2.0 * (-(-0.25 * r * r).exp_m1())
            }
            KernelMode::Tabulated => self.kernel.table.as_ref().unwrap().half_moment_to(r),
        };
        m1 / self.scale
    }

    /// int_z^inf p(t,s) ds for z >= 0 (1/2 at z = 0), computed from the tail
    /// side so far-out masses keep full relative accuracy.
    pub fn tail_mass(&self, z: f64) -> f64 {
        debug_assert!(z >= 0.0);
        let r = z * self.scale;
        match self.kernel.mode {
            KernelMode::CauchyClosedForm => {
                if r == 0.0 {
                    0.5
                } else {
                    (1.0 / r).atan() / PI
                }
            }
            KernelMode::Gaussian => 0.5 * libm::erfc(0.5 * r),
            KernelMode::Tabulated => self.kernel.table.as_ref().unwrap().tail_from(r),
        }
    }

    /// Exact cell mass int_{z_lo}^{z_hi} p(t,s) ds, z_lo <= z_hi, free of the
    /// +-1/2 cancellation that plagues CDF differences far from the origin.
    pub fn cell_mass(&self, z_lo: f64, z_hi: f64) -> f64 {
        debug_assert!(z_lo <= z_hi);
        let r_lo = z_lo * self.scale;
        let r_hi = z_hi * self.scale;
        match self.kernel.mode {
            KernelMode::CauchyClosedForm => {
                let prod = 1.0 + r_hi * r_lo;
                if prod > 0.1 {
                    // arctan subtraction identity
                    ((r_hi - r_lo) / prod).atan() / PI
                } else {
                    // cell straddles the origin: direct values are accurate
                    (r_hi.atan() - r_lo.atan()) / PI
                }
            }
            KernelMode::Gaussian => {
                if r_lo >= 0.0 {
                    0.5 * (libm::erfc(0.5 * r_lo) - libm::erfc(0.5 * r_hi))
                } else if r_hi <= 0.0 {
                    0.5 * (libm::erfc(-0.5 * r_hi) - libm::erfc(-0.5 * r_lo))
                } else {
                    0.5 * (libm::erf(0.5 * r_hi) - libm::erf(0.5 * r_lo))
                }
            }
            KernelMode::Tabulated => {
                let table = self.kernel.table.as_ref().unwrap();
                if r_lo >= 0.0 {
                    table.tail_from(r_lo) - table.tail_from(r_hi)
                } else if r_hi <= 0.0 {
                    table.tail_from(-r_hi) - table.tail_from(-r_lo)
                } else {
                    table.half_mass_to(r_hi) + table.half_mass_to(-r_lo)
                }
            }
        }
    }

    /// Exact cell first moment int_{z_lo}^{z_hi} s p(t,s) ds, z_lo <= z_hi.
    pub fn cell_moment(&self, z_lo: f64, z_hi: f64) -> f64 {
        debug_assert!(z_lo <= z_hi);
        let r_lo = z_lo * self.scale;
        let r_hi = z_hi * self.scale;
        match self.kernel.mode {
            KernelMode::CauchyClosedForm => {
                // (1/2pi) ln((1+r_hi^2)/(1+r_lo^2)), stable via ln_1p
                let num = (r_hi - r_lo) * (r_hi + r_lo);
                (0.5 / PI) * (num / (1.0 + r_lo * r_lo)).ln_1p() / self.scale
            }
            KernelMode::Gaussian => {
                let g = |r: f64| (-0.25 * r * r).exp();
                (1.0 / (4.0 * PI).sqrt()) * 2.0 * (g(r_lo) - g(r_hi)) / self.scale
            }
            KernelMode::Tabulated => {
                let table = self.kernel.table.as_ref().unwrap();
                (table.half_moment_to(r_hi.abs()) - table.half_moment_to(r_lo.abs()))
                    / self.scale
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TableSidecar {
    alpha: f64,
    dim: u32,
    tail_coefficient: f64,
    node_count: usize,
}

impl KernelTable {
    fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return self.p_at_zero;
        }
        if r < self.r_min {
            // even quadratic blend to p(1,0); the profile is smooth and even
            let first = self.log_values[0].exp();
            let q = r / self.r_min;
            return self.p_at_zero + (first - self.p_at_zero) * q * q;
        }
        if r >= self.r_max {
            return self.tail_coeff * (self.tail_exponent * r.ln()).exp();
        }
        let lam = (r.ln() - self.r_min.ln()) / self.log_step;
        let i = (lam.floor() as usize).min(self.log_values.len() - 2);
        let t = lam - i as f64;
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        let lp = h00 * self.log_values[i]
            + h10 * self.slopes[i]
            + h01 * self.log_values[i + 1]
            + h11 * self.slopes[i + 1];
        lp.exp()
    }

    /// int_q^inf p(1,s) ds for q >= 0, without forming 1/2 - F1(q).
    fn tail_from(&self, q: f64) -> f64 {
        if q <= 0.0 {
            // half the total mass
            return self.tail_mass_nodes[0] + self.cum_mass[0];
        }
        if q <= self.r_min {
            // head piece between q and r_min plus the stored tail at node 0
            return self.tail_mass_nodes[0] + (self.half_mass_to(self.r_min) - self.half_mass_to(q));
        }
        if q >= self.r_max {
            let two_alpha = -(self.tail_exponent + 1.0);
            return self.tail_coeff / two_alpha * q.powf(-two_alpha);
        }
        let lam = (q.ln() - self.r_min.ln()) / self.log_step;
        let i = (lam.floor() as usize).min(self.tail_mass_nodes.len() - 2);
        let hi = (self.r_min.ln() + (i + 1) as f64 * self.log_step).exp();
        self.tail_mass_nodes[i + 1] + integrate_gl4(|s| self.eval(s), q, hi)
    }

    fn half_mass_to(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let first = self.log_values[0].exp();
        if r <= self.r_min {
            return self.p_at_zero * r
                + (first - self.p_at_zero) * r * r * r / (3.0 * self.r_min * self.r_min);
        }
        if r >= self.r_max {
            let two_alpha = -(self.tail_exponent + 1.0);
            let total = self.cum_mass.last().unwrap();
            return total
                + self.tail_coeff / two_alpha
                    * (self.r_max.powf(-two_alpha) - r.powf(-two_alpha));
        }
        let lam = (r.ln() - self.r_min.ln()) / self.log_step;
        let i = (lam.floor() as usize).min(self.cum_mass.len() - 2);
        let lo = (self.r_min.ln() + i as f64 * self.log_step).exp();
        self.cum_mass[i] + integrate_gl4(|s| self.eval(s), lo, r)
    }

    fn half_moment_to(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let first = self.log_values[0].exp();
        if r <= self.r_min {
            return 0.5 * self.p_at_zero * r * r
                + 0.25 * (first - self.p_at_zero) * r.powi(4) / (self.r_min * self.r_min);
        }
        if r >= self.r_max {
            let two_alpha = -(self.tail_exponent + 1.0);
            let total = self.cum_moment.last().unwrap();
            let tail = if (two_alpha - 1.0).abs() < 1e-12 {
                self.tail_coeff * (r / self.r_max).ln()
            } else {
                self.tail_coeff / (1.0 - two_alpha)
                    * (r.powf(1.0 - two_alpha) - self.r_max.powf(1.0 - two_alpha))
            };
            return total + tail;
        }
        let lam = (r.ln() - self.r_min.ln()) / self.log_step;
        let i = (lam.floor() as usize).min(self.cum_moment.len() - 2);
        let lo = (self.r_min.ln() + i as f64 * self.log_step).exp();
        self.cum_moment[i] + integrate_gl4(|s| s * self.eval(s), lo, r)
    }
}

/// Numeric Fourier inversion p(1,r) = (1/pi) int_0^inf cos(r xi) e^{-xi^{2a}} dxi.
///
/// For 2a <= 1 the contour is rotated to the positive imaginary axis, giving
/// the absolutely convergent, non-oscillatory representation
/// (1/pi) int_0^inf e^{-r s - cos(pi a) s^{2a}} sin(sin(pi a) s^{2a}) ds.
/// For 2a > 1 the cosine integral is integrated directly (the integrand then
/// dies by xi ~ 45^{1/(2a)} <= 45) below r = 12 and summed by the convergent /
/// asymptotic tail series above.
pub fn invert_profile(alpha: f64, r: f64) -> Result<f64> {
    let beta = 2.0 * alpha;
    if r == 0.0 {
        return Ok(libm::tgamma(1.0 + 1.0 / beta) / PI);
    }
    if beta <= 1.0 {
        rotated_inversion(beta, r)
    } else if r < 12.0 {
        direct_inversion(beta, r)
    } else {
        tail_series(alpha, r)
            .ok_or_else(|| Error::Build(format!("tail series stalled at alpha={alpha}, r={r}")))
    }
}

fn rotated_inversion(beta: f64, r: f64) -> Result<f64> {
    let c = (0.5 * PI * beta).cos().max(0.0);
    let d = (0.5 * PI * beta).sin();
    let target = 45.0;
    let s_decay = if c > 1e-12 {
        (target / c).powf(1.0 / beta)
    } else {
        f64::INFINITY
    };
    let s_damp = if r > 0.0 { target / r } else { f64::INFINITY };
    let s_max = s_decay.min(s_damp);
    if !s_max.is_finite() {
        return Err(Error::Build(format!(
            "rotated inversion needs r > 0 or decay, got beta={beta}, r={r}"
        )));
    }
    let f = |s: f64| (-r * s - c * s.powf(beta)).exp() * (d * s.powf(beta)).sin();
    let s_scale = s_max.min(1.0 / r.max(1.0)).min(1.0);
    let w0 = 1e-13 * s_scale;
    // leading Taylor piece below the first panel
    let mut acc = d * w0.powf(1.0 + beta) / (1.0 + beta);
    let mut lo = w0;
    let mut w = w0;
    while lo < s_max {
        // cap the panel so the phase d s^beta advances at most ~3 radians
        let phase_rate = d * beta * lo.powf(beta - 1.0);
        let w_phase = if phase_rate > 0.0 { 3.0 / phase_rate } else { f64::INFINITY };
        let step = w.min(w_phase).max(1e-300);
        let hi = (lo + step).min(s_max);
        acc += integrate_gl16(f, lo, hi);
        lo = hi;
        w *= 1.35;
    }
    Ok(acc / PI)
}

fn direct_inversion(beta: f64, r: f64) -> Result<f64> {
    let xi_max = 45.0_f64.powf(1.0 / beta);
    let f = |xi: f64| (r * xi).cos() * (-xi.powf(beta)).exp();
    let w0 = 1e-10;
    // leading piece below the first panel: cos ~ 1, e^{-xi^b} ~ 1
    let mut acc = w0;
    let mut lo = w0;
    let mut w = w0;
    let w_osc = 3.0 / r.max(0.25);
    while lo < xi_max {
        let step = w.min(w_osc);
        let hi = (lo + step).min(xi_max);
        acc += integrate_gl16(f, lo, hi);
        lo = hi;
        w *= 1.5;
    }
    Ok(acc / PI)
}

/// Convergent (2a < 1) / asymptotic (2a >= 1) large-r series
/// p(1,r) = (1/pi) sum_k (-1)^{k-1} Gamma(2 a k + 1)/k! sin(k pi a) r^{-2 a k - 1}.
///
/// Returns None if the asymptotic envelope stops shrinking before reaching
/// relative accuracy 1e-13.
fn tail_series(alpha: f64, r: f64) -> Option<f64> {
    let beta = 2.0 * alpha;
    let ln_r = r.ln();
    let mut sum: f64 = 0.0;
    let mut prev_env = f64::MAX;
    let mut sign = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        let ln_env = libm::lgamma(beta * kf + 1.0) - libm::lgamma(kf + 1.0) - (beta * kf + 1.0) * ln_r;
        let env = ln_env.exp();
        if env > prev_env {
            // asymptotic turnover: accept only if already converged
            return if env < 1e-13 * sum.abs().max(1e-300) {
                Some(sum / PI)
            } else {
                None
            };
        }
        sum += sign * env * (kf * PI * alpha).sin();
        sign = -sign;
        if env < 1e-17 * sum.abs().max(1e-300) && k > 3 {
            return Some(sum / PI);
        }
        prev_env = env;
    }
    Some(sum / PI)
}

fn build_table(alpha: f64, r_max: f64, nodes: usize) -> Result<KernelTable> {
    let beta = 2.0 * alpha;
    let r_min: f64 = 1e-2;
    let n_log = nodes - 1;
    let log_step = (r_max.ln() - r_min.ln()) / (n_log - 1) as f64;
    let p_at_zero = libm::tgamma(1.0 + 1.0 / beta) / PI;

    // consistency of the two evaluation routes where they hand over
    if beta > 1.0 {
        for probe in [11.0, 12.5, 14.0] {
            let direct = direct_inversion(beta, probe)?;
            let series = tail_series(alpha, probe).ok_or_else(|| {
                Error::Build(format!(
                    "Fourier inversion not convergent: tail series stalls at alpha={alpha}, r={probe}"
                ))
            })?;
            let rel = (direct - series).abs() / series.abs();
            if rel > 1e-7 {
                return Err(Error::Build(format!(
                    "Fourier inversion inconsistent at alpha={alpha}, r={probe}: \
                     direct={direct:.12e}, series={series:.12e}, rel={rel:.3e}"
                )));
            }
        }
    }

    let mut log_radii = Vec::with_capacity(n_log);
    let mut values = Vec::with_capacity(n_log);
    for i in 0..n_log {
        let lr = r_min.ln() + i as f64 * log_step;
        let r = lr.exp();
        let p = invert_profile(alpha, r)?;
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::Build(format!(
                "Fourier inversion returned {p} at alpha={alpha}, r={r}"
            )));
        }
        log_radii.push(lr);
        values.push(p);
    }
    assemble_table(alpha, p_at_zero, &log_radii.iter().map(|lr| lr.exp()).collect::<Vec<_>>(), &values, None)
}

fn assemble_table(
    alpha: f64,
    p_at_zero: f64,
    radii: &[f64],
    values: &[f64],
    imported_tail_coeff: Option<f64>,
) -> Result<KernelTable> {
    let n = radii.len();
    if n < 16 || values.len() != n {
        return Err(Error::State("tabulation too small to assemble".into()));
    }
    let r_min = radii[0];
    let r_max = radii[n - 1];
    let log_radii: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let log_values: Vec<f64> = values.iter().map(|p| p.ln()).collect();
    let log_step = (log_radii[n - 1] - log_radii[0]) / (n - 1) as f64;

    let mut slopes = vec![0.0; n];
    for i in 1..n - 1 {
        slopes[i] = 0.5 * (log_values[i + 1] - log_values[i - 1]);
    }
    slopes[0] = log_values[1] - log_values[0];
    slopes[n - 1] = log_values[n - 1] - log_values[n - 2];

    // tail fit over the last decade: coefficient at the exact exponent, plus a
    // free-slope fit as a diagnostic
    let decade_start = log_radii[n - 1] - std::f64::consts::LN_10;
    let tail_exponent = -(1.0 + 2.0 * alpha);
    let (mut s_c, mut count) = (0.0, 0_usize);
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        if log_radii[i] >= decade_start {
            s_c += log_values[i] - tail_exponent * log_radii[i];
            sx += log_radii[i];
            sy += log_values[i];
            sxx += log_radii[i] * log_radii[i];
            sxy += log_radii[i] * log_values[i];
            count += 1;
        }
    }
    if count < 8 {
        return Err(Error::Build("not enough tail nodes to fit the decay law".into()));
    }
    let cf = count as f64;
    let fitted_tail_exponent = (cf * sxy - sx * sy) / (cf * sxx - sx * sx);
    let tail_coeff = imported_tail_coeff.unwrap_or((s_c / cf).exp());

    let mut table = KernelTable {
        r_min,
        r_max,
        log_step,
        p_at_zero,
        log_radii,
        log_values,
        slopes,
        tail_coeff,
        fitted_tail_exponent,
        tail_exponent,
        cum_mass: Vec::new(),
        tail_mass_nodes: Vec::new(),
        cum_moment: Vec::new(),
    };

    // cumulative mass and first moment at the nodes, integrating the interpolant
    let first = table.log_values[0].exp();
    let mut interval_mass = Vec::with_capacity(n - 1);
    let mut cum_mass = Vec::with_capacity(n);
    let mut cum_moment = Vec::with_capacity(n);
    cum_mass.push(p_at_zero * r_min + (first - p_at_zero) * r_min / 3.0);
    cum_moment.push(0.5 * p_at_zero * r_min * r_min + 0.25 * (first - p_at_zero) * r_min * r_min);
    for i in 1..n {
        let lo = table.log_radii[i - 1].exp();
        let hi = table.log_radii[i].exp();
        let dm = integrate_gl4(|s| table.eval(s), lo, hi);
        let dq = integrate_gl4(|s| s * table.eval(s), lo, hi);
        interval_mass.push(dm);
        cum_mass.push(cum_mass[i - 1] + dm);
        cum_moment.push(cum_moment[i - 1] + dq);
    }
    // complementary tails accumulated backward from the algebraic closure
    let two_alpha = 2.0 * alpha;
    let mut tail_mass_nodes = vec![0.0; n];
    tail_mass_nodes[n - 1] = tail_coeff / two_alpha * r_max.powf(-two_alpha);
    for i in (0..n - 1).rev() {
        tail_mass_nodes[i] = tail_mass_nodes[i + 1] + interval_mass[i];
    }
    table.cum_mass = cum_mass;
    table.tail_mass_nodes = tail_mass_nodes;
    table.cum_moment = cum_moment;
    Ok(table)
}
