//! Fading and noise statistics of the near user after SIC, conditioned on
//! whether the far user's BPSK symbol was detected correctly.
//!
//! Every quantity depends on the symbol only through `|X_ij|` and, for the
//! noise half-lines, the sign of `X_ij`. Densities are written for the
//! "aligned" noise `t = sign(X_ij)·w`, so negative symbols reuse the positive
//! code path with the intervals flipped.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::{integrate_piecewise, normal_pdf, q_function, std_normal_cdf};
use crate::scenario::{rayleigh_pdf, ConstellationPoint, Scenario};

/// Outcome of the far-user decision at the near user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Success,
    Failure,
}

/// Which conditioning a curve carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveBranch {
    Success,
    Failure,
    Unconditional,
}

impl From<Branch> for CurveBranch {
    fn from(b: Branch) -> Self {
        match b {
            Branch::Success => CurveBranch::Success,
            Branch::Failure => CurveBranch::Failure,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    Fading,
    Noise,
}

/// `μ = √(X²γ̄/(X²γ̄+2))`, the quantity all closed forms are built from.
pub fn mu(s: &Scenario, x: &ConstellationPoint) -> f64 {
    let snr = x.value * x.value * s.gamma_bar();
    (snr / (snr + 2.0)).sqrt()
}

/// Probability that the far-user symbol is detected correctly given `X_ij`.
pub fn sic_success_prob(s: &Scenario, x: &ConstellationPoint) -> f64 {
    0.5 * (1.0 + mu(s, x))
}

/// `p_F = (1-μ)/2`, evaluated as `1/((X²γ̄+2)(1+μ))` to keep relative
/// accuracy when `μ → 1`.
pub fn sic_failure_prob(s: &Scenario, x: &ConstellationPoint) -> f64 {
    let snr = x.value * x.value * s.gamma_bar();
    1.0 / ((snr + 2.0) * (1.0 + mu(s, x)))
}

pub fn branch_prob(s: &Scenario, x: &ConstellationPoint, branch: Branch) -> f64 {
    match branch {
        Branch::Success => sic_success_prob(s, x),
        Branch::Failure => sic_failure_prob(s, x),
    }
}

/// `|X_ij|·β/σ_n`.
fn detection_margin(s: &Scenario, x: &ConstellationPoint, beta: f64) -> f64 {
    x.magnitude() * beta / s.sigma_n()
}

pub fn pdf_beta_success(s: &Scenario, x: &ConstellationPoint, beta: f64) -> f64 {
    if beta < 0.0 {
        return 0.0;
    }
    rayleigh_pdf(beta, s.omega()) * std_normal_cdf(detection_margin(s, x, beta))
        / sic_success_prob(s, x)
}

pub fn pdf_beta_failure(s: &Scenario, x: &ConstellationPoint, beta: f64) -> f64 {
    if beta < 0.0 {
        return 0.0;
    }
    rayleigh_pdf(beta, s.omega()) * q_function(detection_margin(s, x, beta))
        / sic_failure_prob(s, x)
}

/// Fraction of fading that keeps noise value `w` on the success side:
/// `e^{-w²/(X²Ω)}` on the truncated half-line, 1 on the open one.
fn survival(s: &Scenario, x: &ConstellationPoint, w: f64) -> f64 {
    let aligned = w * x.far_symbol();
    if aligned >= 0.0 {
        1.0
    } else {
        (-w * w / (x.value * x.value * s.omega())).exp()
    }
}

pub fn pdf_noise_success(s: &Scenario, x: &ConstellationPoint, w: f64) -> f64 {
    normal_pdf(w, s.sigma_n()) * survival(s, x, w) / sic_success_prob(s, x)
}

pub fn pdf_noise_failure(s: &Scenario, x: &ConstellationPoint, z: f64) -> f64 {
    if z * x.far_symbol() >= 0.0 {
        return 0.0;
    }
    let blocked = -(-z * z / (x.value * x.value * s.omega())).exp_m1();
    normal_pdf(z, s.sigma_n()) * blocked / sic_failure_prob(s, x)
}

/// Whether `(β, n)` lies in the success region `Y = βX + n` on the same side
/// as `X`. The boundary `Y = 0` counts as success.
pub fn in_success_region(x: &ConstellationPoint, beta: f64, n: f64) -> bool {
    let y = beta * x.value + n;
    if x.value > 0.0 {
        y >= 0.0
    } else {
        y <= 0.0
    }
}

/// Branch-conditioned joint density of `(β, n)`.
pub fn joint_pdf(s: &Scenario, x: &ConstellationPoint, branch: Branch, beta: f64, n: f64) -> f64 {
    if beta < 0.0 {
        return 0.0;
    }
    let inside = in_success_region(x, beta, n) == (branch == Branch::Success);
    if !inside {
        return 0.0;
    }
    rayleigh_pdf(beta, s.omega()) * normal_pdf(n, s.sigma_n()) / branch_prob(s, x, branch)
}

/// Second moment of the success-branch noise,
/// `σ_n²(1+μ³)/(2p_S) = σ_n²(1 - μ + μ²)`.
pub fn second_moment_w(s: &Scenario, x: &ConstellationPoint) -> f64 {
    let m = mu(s, x);
    s.sigma_n_sq() * (1.0 - m + m * m)
}

/// Second moment of the failure-branch noise,
/// `σ_n²(1-μ³)/(2p_F) = σ_n²(1 + μ + μ²)`.
pub fn second_moment_z(s: &Scenario, x: &ConstellationPoint) -> f64 {
    let m = mu(s, x);
    s.sigma_n_sq() * (1.0 + m + m * m)
}

/// Per-symbol bundle consumed by the outage and capacity modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalChannelStats {
    pub point: ConstellationPoint,
    pub p_success: f64,
    pub p_failure: f64,
    pub m2_w: f64,
    pub m2_z: f64,
}

impl ConditionalChannelStats {
    pub fn new(s: &Scenario, x: &ConstellationPoint) -> Self {
        ConditionalChannelStats {
            point: *x,
            p_success: sic_success_prob(s, x),
            p_failure: sic_failure_prob(s, x),
            m2_w: second_moment_w(s, x),
            m2_z: second_moment_z(s, x),
        }
    }
}

const NOISE_SPAN: f64 = 12.0;

/// `E[W]`, by quadrature (no closed form is used).
pub fn mean_noise_success(s: &Scenario, x: &ConstellationPoint) -> Result<f64> {
    let span = NOISE_SPAN * s.sigma_n();
    let r = integrate_piecewise(
        |w| w * pdf_noise_success(s, x, w),
        &[-span, 0.0, span],
        1e-12 * s.sigma_n(),
        1e-10,
    )?;
    Ok(r.value)
}

/// `E[Z]`, by quadrature over the failure half-line.
pub fn mean_noise_failure(s: &Scenario, x: &ConstellationPoint) -> Result<f64> {
    let span = NOISE_SPAN * s.sigma_n();
    let r = integrate_piecewise(
        |z| z * pdf_noise_failure(s, x, z),
        &[-span, 0.0, span],
        1e-12 * s.sigma_n(),
        1e-10,
    )?;
    Ok(r.value)
}

pub const DEFAULT_CURVE_POINTS: usize = 2048;

/// A density sampled on an ordered grid, for plotting and histogram checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdfCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub branch: CurveBranch,
    pub variable: Variable,
    pub scenario: Scenario,
    pub point: ConstellationPoint,
}

fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|k| lo + step * k as f64).collect()
}

/// Span of the fading curves, `[0, 5√Ω]`. The failure branch is
/// concentrated at `β ~ (1/Ω + X²/(2σ_n²))^{-1/2}`, so its span shrinks
/// accordingly.
pub fn fading_support(s: &Scenario, x: &ConstellationPoint, branch: CurveBranch) -> (f64, f64) {
    let hi = match branch {
        CurveBranch::Failure => {
            let rate = 1.0 / s.omega() + x.value * x.value / (2.0 * s.sigma_n_sq());
            6.0 / rate.sqrt()
        }
        _ => 5.0 * s.omega().sqrt(),
    };
    (0.0, hi)
}

/// Span of the noise curves, `±6σ_n`.
pub fn noise_support(s: &Scenario) -> (f64, f64) {
    let span = 6.0 * s.sigma_n();
    (-span, span)
}

impl PdfCurve {
    /// Fading density over [`fading_support`]. Abscissae are `hi·u²` for
    /// uniform `u`, which clusters points where the densities rise linearly
    /// from zero.
    pub fn fading(s: &Scenario, x: &ConstellationPoint, branch: CurveBranch, points: usize) -> Self {
        let points = points.max(2);
        let (_, hi) = fading_support(s, x, branch);
        let grid: Vec<f64> = uniform_grid(0.0, 1.0, points)
            .into_iter()
            .map(|u| hi * u * u)
            .collect();
        let density = grid
            .iter()
            .map(|&b| match branch {
                CurveBranch::Success => pdf_beta_success(s, x, b),
                CurveBranch::Failure => pdf_beta_failure(s, x, b),
                CurveBranch::Unconditional => rayleigh_pdf(b, s.omega()),
            })
            .collect();
        PdfCurve {
            grid,
            density,
            branch,
            variable: Variable::Fading,
            scenario: *s,
            point: *x,
        }
    }

    /// Noise density over [`noise_support`].
    pub fn noise(s: &Scenario, x: &ConstellationPoint, branch: CurveBranch, points: usize) -> Self {
        let points = points.max(2);
        let (lo, hi) = noise_support(s);
        let grid = uniform_grid(lo, hi, points);
        let density = grid
            .iter()
            .map(|&w| match branch {
                CurveBranch::Success => pdf_noise_success(s, x, w),
                CurveBranch::Failure => pdf_noise_failure(s, x, w),
                CurveBranch::Unconditional => normal_pdf(w, s.sigma_n()),
            })
            .collect();
        PdfCurve {
            grid,
            density,
            branch,
            variable: Variable::Noise,
            scenario: *s,
            point: *x,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    /// Trapezoid integral of the sampled density.
    pub fn trapezoid_mass(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(g, d)| 0.5 * (g[1] - g[0]) * (d[0] + d[1]))
            .sum()
    }

    /// Density at `v`, zero outside the grid, linear in between.
    pub fn interpolate(&self, v: f64) -> f64 {
        let n = self.grid.len();
        if n < 2 || v < self.grid[0] || v > self.grid[n - 1] {
            return 0.0;
        }
        let k = self.grid.partition_point(|&g| g <= v).clamp(1, n - 1) - 1;
        let frac = (v - self.grid[k]) / (self.grid[k + 1] - self.grid[k]);
        self.density[k] * (1.0 - frac) + self.density[k + 1] * frac
    }

    pub fn metadata(&self) -> String {
        format!(
            "branch={} variable={} point={} alpha1={} snr_db={} omega={}",
            match self.branch {
                CurveBranch::Success => "success",
                CurveBranch::Failure => "failure",
                CurveBranch::Unconditional => "unconditional",
            },
            match self.variable {
                Variable::Fading => "fading",
                Variable::Noise => "noise",
            },
            self.point.label(),
            self.scenario.alpha1(),
            self.scenario.snr_db(),
            self.scenario.omega(),
        )
    }

    /// Two-column CSV preceded by a `#` line carrying [`Self::metadata`].
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", self.metadata())?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["abscissa", "density"])?;
        for (g, d) in self.grid.iter().zip(&self.density) {
            w.write_record([g.to_string(), d.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::bpsk_constellation;

    fn setup(alpha1: f64, snr_db: f64) -> (Scenario, [ConstellationPoint; 4]) {
        let s = Scenario::new(alpha1, snr_db, 1.0, 1.0).unwrap();
        (s, bpsk_constellation(&s))
    }

    #[test]
    fn success_probability_examples() {
        let (s, c) = setup(0.8, 0.0);
        assert!((sic_success_prob(&s, &c[3]) - 0.844_12).abs() < 1e-5);
        let lo = Scenario::from_linear(0.8, 1e-12, 1.0, 1.0).unwrap();
        assert!((sic_success_prob(&lo, &c[3]) - 0.5).abs() < 1e-6);
        let hi = Scenario::from_linear(0.8, 1e12, 1.0, 1.0).unwrap();
        assert!((sic_success_prob(&hi, &c[3]) - 1.0).abs() < 1e-6);
        assert_eq!(sic_success_prob(&s, &c[0]), sic_success_prob(&s, &c[3]));
    }

    #[test]
    fn failure_probability_keeps_relative_accuracy() {
        let s = Scenario::from_linear(0.8, 1e9, 1.0, 1.0).unwrap();
        let x = bpsk_constellation(&s)[3];
        let snr = x.value * x.value * 1e9;
        let expect = 1.0 / (2.0 * snr);
        assert!(((sic_failure_prob(&s, &x) - expect) / expect).abs() < 1e-8);
        assert!(sic_success_prob(&s, &x) + sic_failure_prob(&s, &x) - 1.0 < 1e-15);
    }

    #[test]
    fn second_moment_examples() {
        let (s, c) = setup(0.8, 0.0);
        assert!((second_moment_w(&s, &c[3]) - 0.7855).abs() < 1e-3);
        assert!((second_moment_z(&s, &c[3]) - 2.162).abs() < 2e-3);
        let hi = Scenario::from_linear(0.8, 1e12, 1.0, 1.0).unwrap();
        let w = second_moment_w(&hi, &c[3]);
        assert!((w / hi.sigma_n_sq() - 1.0).abs() < 1e-6);
        let lo = Scenario::from_linear(0.8, 1e-12, 1.0, 1.0).unwrap();
        assert!((second_moment_z(&lo, &c[3]) / lo.sigma_n_sq() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn printed_moment_forms_agree_with_simplified() {
        let (s, c) = setup(0.7, 3.0);
        for x in &c {
            let m = mu(&s, x);
            let ps = sic_success_prob(&s, x);
            let pf = sic_failure_prob(&s, x);
            let w = s.sigma_n_sq() / (2.0 * ps) * (1.0 + m.powi(3));
            let z = s.sigma_n_sq() / (2.0 * pf) * (1.0 - m.powi(3));
            assert!((w - second_moment_w(&s, x)).abs() < 1e-14);
            assert!((z - second_moment_z(&s, x)).abs() < 1e-13);
        }
    }

    #[test]
    fn failure_noise_support() {
        let (s, c) = setup(0.8, 0.0);
        assert_eq!(pdf_noise_failure(&s, &c[3], 1.0), 0.0);
        assert!(pdf_noise_failure(&s, &c[3], -1.0) > 0.0);
        assert_eq!(pdf_noise_failure(&s, &c[0], -1.0), 0.0);
        assert!(pdf_noise_failure(&s, &c[0], 1.0) > 0.0);
    }

    #[test]
    fn joint_respects_region() {
        let (s, c) = setup(0.8, 0.0);
        let x = c[3];
        assert_eq!(joint_pdf(&s, &x, Branch::Success, 1.0, -2.0), 0.0);
        assert!(joint_pdf(&s, &x, Branch::Failure, 1.0, -2.0) > 0.0);
        // tie goes to success
        let beta = 0.5;
        let n = -x.value * beta;
        assert!(joint_pdf(&s, &x, Branch::Success, beta, n) > 0.0);
        assert_eq!(joint_pdf(&s, &x, Branch::Failure, beta, n), 0.0);
    }

    #[test]
    fn conditional_means_have_expected_signs() {
        let (s, c) = setup(0.8, 0.0);
        assert!(mean_noise_success(&s, &c[3]).unwrap() > 0.0);
        assert!(mean_noise_failure(&s, &c[3]).unwrap() < 0.0);
        let total = sic_success_prob(&s, &c[3]) * mean_noise_success(&s, &c[3]).unwrap()
            + sic_failure_prob(&s, &c[3]) * mean_noise_failure(&s, &c[3]).unwrap();
        assert!(total.abs() < 1e-9);
    }

    #[test]
    fn curves_normalize() {
        for snr in [0.0, 10.0, 30.0] {
            let (s, c) = setup(0.8, snr);
            for x in [c[3], c[2], c[0]] {
                for b in [CurveBranch::Success, CurveBranch::Failure, CurveBranch::Unconditional] {
                    let f = PdfCurve::fading(&s, &x, b, DEFAULT_CURVE_POINTS);
                    let n = PdfCurve::noise(&s, &x, b, DEFAULT_CURVE_POINTS);
                    assert!((f.trapezoid_mass() - 1.0).abs() < 1e-6, "{snr} {b:?} fading {}", f.trapezoid_mass());
                    assert!((n.trapezoid_mass() - 1.0).abs() < 1e-6, "{snr} {b:?} noise {}", n.trapezoid_mass());
                    assert!(f.density.iter().chain(&n.density).all(|&d| d >= 0.0));
                }
            }
        }
    }

    #[test]
    fn curve_csv_has_metadata_and_header() {
        let (s, c) = setup(0.8, 0.0);
        let curve = PdfCurve::noise(&s, &c[3], CurveBranch::Success, 5);
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# branch=success variable=noise point=X11"));
        assert_eq!(lines.next().unwrap(), "abscissa,density");
        assert_eq!(lines.count(), 5);
    }
}
