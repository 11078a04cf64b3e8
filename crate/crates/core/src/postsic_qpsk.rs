//! QPSK success-branch statistics for the top-right quadrant
//! (`s₁ = (1+j)/√2`).
//!
//! The real rail carries level `λ_i` and the imaginary rail `λ_j`, with
//! `λ_{±1} = (√α₁ ± √α₂)/√2`. Success means both rails of `Y = βλ + N` land
//! in the first quadrant.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::{integrate_piecewise, normal_pdf, std_normal_cdf};
use crate::scenario::{rayleigh_pdf, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RailLevel {
    Plus,
    Minus,
}

impl RailLevel {
    pub fn sign(self) -> f64 {
        match self {
            RailLevel::Plus => 1.0,
            RailLevel::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RailLevel::Plus => "1",
            RailLevel::Minus => "-1",
        }
    }
}

/// `(√α₁ + i√α₂)/√2` for `i = ±1`.
pub fn rail_level(s: &Scenario, r: RailLevel) -> f64 {
    (s.alpha1().sqrt() + r.sign() * s.alpha2().sqrt()) / SQRT_2
}

/// `μ = √(λ²γ̄/(2+λ²γ̄))`.
fn rail_mu(s: &Scenario, lambda: f64) -> f64 {
    let snr = lambda * lambda * s.gamma_bar();
    (snr / (snr + 2.0)).sqrt()
}

/// Rail amplitudes of one quadrant point and their derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrantLevels {
    pub rail_i: RailLevel,
    pub rail_j: RailLevel,
    pub lambda_i: f64,
    pub lambda_j: f64,
    pub chi_i: f64,
    pub chi_j: f64,
    pub mu_i: f64,
    pub mu_j: f64,
}

impl QuadrantLevels {
    pub fn new(s: &Scenario, rail_i: RailLevel, rail_j: RailLevel) -> Self {
        let lambda_i = rail_level(s, rail_i);
        let lambda_j = rail_level(s, rail_j);
        QuadrantLevels {
            rail_i,
            rail_j,
            lambda_i,
            lambda_j,
            chi_i: lambda_i / s.sigma_n(),
            chi_j: lambda_j / s.sigma_n(),
            mu_i: rail_mu(s, lambda_i),
            mu_j: rail_mu(s, lambda_j),
        }
    }

    /// The same point seen from the imaginary rail.
    pub fn swapped(&self) -> Self {
        QuadrantLevels {
            rail_i: self.rail_j,
            rail_j: self.rail_i,
            lambda_i: self.lambda_j,
            lambda_j: self.lambda_i,
            chi_i: self.chi_j,
            chi_j: self.chi_i,
            mu_i: self.mu_j,
            mu_j: self.mu_i,
        }
    }

    pub fn equal_rails(&self) -> bool {
        self.rail_i == self.rail_j
    }

    pub fn label(&self) -> String {
        format!("({},{})", self.rail_i.label(), self.rail_j.label())
    }
}

/// The four rail combinations in table order:
/// `(1,1), (-1,-1), (1,-1), (-1,1)`.
pub fn table_rails(s: &Scenario) -> [QuadrantLevels; 4] {
    use RailLevel::{Minus, Plus};
    [
        QuadrantLevels::new(s, Plus, Plus),
        QuadrantLevels::new(s, Minus, Minus),
        QuadrantLevels::new(s, Plus, Minus),
        QuadrantLevels::new(s, Minus, Plus),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexNoiseSample {
    pub re: f64,
    pub im: f64,
}

impl ComplexNoiseSample {
    pub fn new(re: f64, im: f64) -> Self {
        ComplexNoiseSample { re, im }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// `Pr(success | β) = Φ(βχ_i)Φ(βχ_j)`.
pub fn qpsk_success_prob_given_beta(q: &QuadrantLevels, beta: f64) -> f64 {
    std_normal_cdf(beta * q.chi_i) * std_normal_cdf(beta * q.chi_j)
}

/// `E_β[Q²(βχ)] = 1/4 - (μ/π)(π/2 - arctan μ)` in Rayleigh fading.
pub fn mean_q_squared(mu: f64) -> f64 {
    0.25 - mu / PI * (FRAC_PI_2 - mu.atan())
}

/// Equal-rail success probability `E_β[Φ²(βχ)] = 1/4 + μ/2 + (μ/π)arctan μ`.
pub fn rail_success_prob(mu: f64) -> f64 {
    mu + mean_q_squared(mu)
}

/// The equal-rail expression in its printed form, `μ + 1/4 - arctan(μ)/π`,
/// which rests on `E[Q²] = 1/4 - arctan(μ)/π`. Diagnostic only.
pub fn rail_success_prob_printed(mu: f64) -> f64 {
    mu + 0.25 - mu.atan() / PI
}

/// Rail-averaged success probability `(p_S|λ_i + p_S|λ_j)/2`; exact on equal
/// rails, an approximation otherwise.
pub fn qpsk_success_prob(q: &QuadrantLevels) -> f64 {
    0.5 * (rail_success_prob(q.mu_i) + rail_success_prob(q.mu_j))
}

const FADING_SPAN: f64 = 12.0;

fn fading_breakpoints(s: &Scenario, q: &QuadrantLevels) -> Vec<f64> {
    let hi = FADING_SPAN * s.omega().sqrt();
    let mut pts = vec![0.0, hi];
    // the Φ factors switch on at β ~ 1/χ
    for chi in [q.chi_i, q.chi_j] {
        for m in [0.25, 1.0, 4.0] {
            let b = m / chi;
            if b < hi {
                pts.push(b);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Exact success probability: closed form on equal rails, 1-D quadrature of
/// `E_β[Φ(βχ_i)Φ(βχ_j)]` otherwise.
pub fn qpsk_success_prob_exact(s: &Scenario, q: &QuadrantLevels) -> Result<f64> {
    if q.equal_rails() {
        return Ok(rail_success_prob(q.mu_i));
    }
    let r = integrate_piecewise(
        |b| rayleigh_pdf(b, s.omega()) * qpsk_success_prob_given_beta(q, b),
        &fading_breakpoints(s, q),
        1e-14,
        1e-12,
    )?;
    Ok(r.value)
}

/// `∫_{-∞}^0 w² N(w; 0, a²) Φ(bw) dw
///   = a²/4 - (a²/(2π))[ab/(1+a²b²) + arctan(ab)]`.
pub fn psi_kernel(a: f64, b: f64) -> f64 {
    let ab = a * b;
    let a2 = a * a;
    0.25 * a2 - a2 / (2.0 * PI) * (ab / (1.0 + ab * ab) + ab.atan())
}

/// The kernel as printed, `(a²/2)[1/2 - ba/√(2π(1+b²a²))]`. It does not
/// equal its defining integral and is kept for reports only.
pub fn psi_kernel_printed(a: f64, b: f64) -> f64 {
    let ab = a * b;
    0.5 * a * a * (0.5 - ab / (2.0 * PI * (1.0 + ab * ab)).sqrt())
}

/// How the success-branch densities are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Exact `p_S`.
    Exact,
    /// Rail-averaged `p_S`.
    RailAverage,
}

/// Success-branch model of one quadrant point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpskSuccessModel {
    pub scenario: Scenario,
    pub levels: QuadrantLevels,
    pub p_s: f64,
    pub normalization: Normalization,
}

impl QpskSuccessModel {
    pub fn new(s: &Scenario, levels: QuadrantLevels, normalization: Normalization) -> Result<Self> {
        let p_s = match normalization {
            Normalization::Exact => qpsk_success_prob_exact(s, &levels)?,
            Normalization::RailAverage => qpsk_success_prob(&levels),
        };
        Ok(QpskSuccessModel {
            scenario: *s,
            levels,
            p_s,
            normalization,
        })
    }

    pub fn exact(s: &Scenario, levels: QuadrantLevels) -> Result<Self> {
        Self::new(s, levels, Normalization::Exact)
    }

    /// The model with real and imaginary rails exchanged.
    pub fn swapped(&self) -> Self {
        QpskSuccessModel {
            levels: self.levels.swapped(),
            ..*self
        }
    }

    fn sigma(&self) -> f64 {
        self.scenario.sigma_n()
    }

    pub fn pdf_beta(&self, beta: f64) -> f64 {
        if beta < 0.0 {
            return 0.0;
        }
        rayleigh_pdf(beta, self.scenario.omega()) * qpsk_success_prob_given_beta(&self.levels, beta)
            / self.p_s
    }

    /// `τ(w) = max(0, -w_R/λ_i, -w_I/λ_j)`, the smallest fade that keeps `w`
    /// in the success quadrant.
    pub fn tau(&self, w: &ComplexNoiseSample) -> f64 {
        0.0f64
            .max(-w.re / self.levels.lambda_i)
            .max(-w.im / self.levels.lambda_j)
    }

    pub fn joint_noise_pdf(&self, w: &ComplexNoiseSample) -> f64 {
        let sigma = self.sigma();
        let t = self.tau(w);
        normal_pdf(w.re, sigma) * normal_pdf(w.im, sigma) * (-t * t / self.scenario.omega()).exp()
            / self.p_s
    }

    /// Closed-form marginal of the real noise component.
    pub fn pdf_noise_real(&self, w_r: f64) -> f64 {
        let q = &self.levels;
        let base = normal_pdf(w_r, self.sigma()) / self.p_s;
        if w_r >= 0.0 {
            return base * 0.5 * (1.0 + q.mu_j);
        }
        let first = q.mu_j * std_normal_cdf(q.chi_j * w_r / (q.lambda_i * q.mu_j));
        let second = (-w_r * w_r / (q.lambda_i * q.lambda_i * self.scenario.omega())).exp()
            * std_normal_cdf(-q.chi_j * w_r / q.lambda_i);
        base * (first + second)
    }

    pub fn pdf_noise_imag(&self, w_i: f64) -> f64 {
        self.swapped().pdf_noise_real(w_i)
    }

    /// Real-component marginal by integrating the joint density over `w_I`.
    pub fn pdf_noise_real_numeric(&self, w_r: f64) -> Result<f64> {
        let sigma = self.sigma();
        let span = 12.0 * sigma;
        // τ changes form where -w_I/λ_j crosses max(0, -w_R/λ_i)
        let kink = -self.levels.lambda_j * (-w_r / self.levels.lambda_i).max(0.0);
        let mut pts = vec![-span, span];
        if kink > -span {
            pts.insert(1, kink);
        }
        let r = integrate_piecewise(
            |wi| self.joint_noise_pdf(&ComplexNoiseSample::new(w_r, wi)),
            &pts,
            1e-15,
            1e-11,
        )?;
        Ok(r.value)
    }

    /// `E[W_R²]` from the three-term decomposition with the corrected kernel.
    pub fn second_moment_real(&self) -> f64 {
        let q = &self.levels;
        let sigma = self.sigma();
        let varpi1 = q.chi_j / (q.lambda_i * q.mu_j);
        let varpi2 = -q.chi_j / q.lambda_i;
        (sigma * sigma * (1.0 + q.mu_j) / 4.0
            + q.mu_j * psi_kernel(sigma, varpi1)
            + q.mu_i * psi_kernel(sigma * q.mu_i, varpi2))
            / self.p_s
    }

    /// `E[|W|²]` reported as `2E[W_R²]`; equals the true complex second
    /// moment only on equal rails.
    pub fn second_moment_w(&self) -> f64 {
        2.0 * self.second_moment_real()
    }

    /// `E[W_R²] + E[W_I²]`, the complex second moment on any rails.
    pub fn second_moment_both_rails(&self) -> f64 {
        self.second_moment_real() + self.swapped().second_moment_real()
    }

    /// Second moment with the printed kernel and rail-averaged `p_S`
    /// built from the printed `E[Q²]` identity. Diagnostic only.
    pub fn second_moment_w_printed(&self) -> f64 {
        let q = &self.levels;
        let sigma = self.sigma();
        let p_s = 0.5 * (rail_success_prob_printed(q.mu_i) + rail_success_prob_printed(q.mu_j));
        let varpi1 = q.chi_j / (q.lambda_i * q.mu_j);
        let varpi2 = -q.chi_j / q.lambda_i;
        2.0 * (sigma * sigma * (1.0 + q.mu_j) / 4.0
            + q.mu_j * psi_kernel_printed(sigma, varpi1)
            + q.mu_i * psi_kernel_printed(sigma * q.mu_i, varpi2))
            / p_s
    }

    fn noise_moment_real(&self, power: i32) -> Result<f64> {
        let span = 12.0 * self.sigma();
        let r = integrate_piecewise(
            |w| w.powi(power) * self.pdf_noise_real(w),
            &[-span, 0.0, span],
            1e-15,
            1e-11,
        )?;
        Ok(r.value)
    }

    /// `E[W_R²]` by quadrature of the closed-form marginal.
    pub fn second_moment_real_numeric(&self) -> Result<f64> {
        self.noise_moment_real(2)
    }

    /// `(E[W_R], E[W_I])` by quadrature.
    pub fn mean_noise(&self) -> Result<ComplexNoiseSample> {
        Ok(ComplexNoiseSample::new(
            self.noise_moment_real(1)?,
            self.swapped().noise_moment_real(1)?,
        ))
    }

    /// `var[W] = E[|W|²] - |E[W]|²`.
    pub fn variance_w(&self) -> Result<f64> {
        Ok(self.second_moment_both_rails() - self.mean_noise()?.norm_sqr())
    }

    /// `Pr(α₂β²/E[|W|²] < γ_th)` under the success-branch fading density.
    pub fn outage_given_success(&self) -> Result<f64> {
        let s = &self.scenario;
        let eps = (s.gamma_th() * self.second_moment_both_rails() / s.alpha2()).sqrt();
        let mut pts: Vec<f64> = fading_breakpoints(s, &self.levels)
            .into_iter()
            .filter(|&b| b < eps)
            .collect();
        pts.push(eps);
        if pts.len() < 2 {
            return Ok(0.0);
        }
        let r = integrate_piecewise(|b| self.pdf_beta(b), &pts, 1e-15, 1e-11)?;
        Ok(r.value.clamp(0.0, 1.0))
    }
}

/// `2E[W_R²]` with exact `p_S`.
pub fn qpsk_second_moment_w(s: &Scenario, q: &QuadrantLevels) -> Result<f64> {
    Ok(QpskSuccessModel::exact(s, *q)?.second_moment_w())
}

pub fn qpsk_outage_given_success(s: &Scenario, q: &QuadrantLevels) -> Result<f64> {
    QpskSuccessModel::exact(s, *q)?.outage_given_success()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_adaptive;

    fn scenario(snr_db: f64) -> Scenario {
        Scenario::new(0.8, snr_db, 1.0, 1.0).unwrap()
    }

    #[test]
    fn levels_ordering() {
        let s = scenario(0.0);
        let [pp, mm, pm, mp] = table_rails(&s);
        assert!(pp.lambda_i > mm.lambda_i && mm.lambda_i > 0.0);
        assert!(pp.mu_i > 0.0 && pp.mu_i < 1.0);
        assert_eq!(pm.swapped(), mp);
        assert!(pp.equal_rails() && !pm.equal_rails());
        let hotter = QuadrantLevels::new(&scenario(10.0), RailLevel::Minus, RailLevel::Minus);
        assert!(hotter.mu_i > mm.mu_i);
    }

    #[test]
    fn success_prob_given_beta_limits() {
        let q = table_rails(&scenario(0.0))[2];
        assert_eq!(qpsk_success_prob_given_beta(&q, 0.0), 0.25);
        assert!((qpsk_success_prob_given_beta(&q, 1e3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn success_prob_limits() {
        let hi = Scenario::from_linear(0.8, 1e14, 1.0, 1.0).unwrap();
        let lo = Scenario::from_linear(0.8, 1e-14, 1.0, 1.0).unwrap();
        for q in table_rails(&hi) {
            assert!((qpsk_success_prob(&q) - 1.0).abs() < 1e-6);
        }
        for q in table_rails(&lo) {
            assert!((qpsk_success_prob(&q) - 0.25).abs() < 1e-6);
        }
    }

    #[test]
    fn mean_q_squared_matches_quadrature() {
        for mu in [0.1f64, 0.5, 0.9, 0.99] {
            // Rayleigh with Ω = 1 and χ chosen so that μ = √(χ²/(2+χ²))
            let chi = (2.0 * mu * mu / (1.0 - mu * mu)).sqrt();
            let q = |b: f64| crate::numerics::q_function(b * chi);
            let r = integrate_adaptive(|b| rayleigh_pdf(b, 1.0) * q(b) * q(b), 0.0, 12.0, 1e-13)
                .unwrap();
            assert!((r.value - mean_q_squared(mu)).abs() < 1e-10, "{mu}");
        }
    }

    #[test]
    fn psi_examples() {
        assert!((psi_kernel(1.3, 0.0) - 0.25 * 1.69).abs() < 1e-15);
        assert!((psi_kernel(1.0, 1.0) - 0.045_422_528).abs() < 1e-8);
        for (a, b) in [(0.5, 2.0), (2.0, -0.3), (1.0, 1.0)] {
            assert!((psi_kernel(a, b) + psi_kernel(a, -b) - a * a / 2.0).abs() < 1e-15);
        }
        assert!((psi_kernel_printed(1.0, 1.0) - 0.108_95).abs() < 1e-5);
    }

    #[test]
    fn noise_real_branch_is_plain_on_positive_side() {
        let s = scenario(0.0);
        let m = QpskSuccessModel::exact(&s, table_rails(&s)[2]).unwrap();
        let w = 0.7;
        let expect = normal_pdf(w, s.sigma_n()) * (1.0 + m.levels.mu_j) / (2.0 * m.p_s);
        assert!((m.pdf_noise_real(w) / expect - 1.0).abs() < 1e-14);
        let z = ComplexNoiseSample::new(0.3, 0.2);
        let plain = normal_pdf(0.3, s.sigma_n()) * normal_pdf(0.2, s.sigma_n()) / m.p_s;
        assert!((m.joint_noise_pdf(&z) / plain - 1.0).abs() < 1e-14);
    }

    #[test]
    fn closed_marginal_matches_numeric_marginal() {
        for snr in [0.0, 10.0] {
            let s = scenario(snr);
            for q in table_rails(&s) {
                let m = QpskSuccessModel::exact(&s, q).unwrap();
                for k in -20..=20 {
                    let w = 0.25 * k as f64 * s.sigma_n();
                    let a = m.pdf_noise_real(w);
                    let b = m.pdf_noise_real_numeric(w).unwrap();
                    assert!((a - b).abs() < 1e-9, "{snr} {} {w}: {a} {b}", q.label());
                }
            }
        }
    }

    #[test]
    fn equal_rail_moment_matches_quadrature() {
        let s = scenario(0.0);
        for q in table_rails(&s) {
            let m = QpskSuccessModel::exact(&s, q).unwrap();
            let numeric = m.second_moment_real_numeric().unwrap();
            assert!((m.second_moment_real() - numeric).abs() < 1e-10);
        }
    }

    #[test]
    fn conditioning_reduces_noise_power() {
        for snr in [0.0, 10.0, 20.0] {
            let s = scenario(snr);
            for q in table_rails(&s) {
                let m = QpskSuccessModel::exact(&s, q).unwrap();
                assert!(m.second_moment_both_rails() < 2.0 * s.sigma_n_sq());
                assert!(m.variance_w().unwrap() < m.second_moment_both_rails());
            }
        }
    }

    #[test]
    fn outage_limits() {
        let s = Scenario::new(0.8, 10.0, 1.0, 1e-9).unwrap();
        let q = table_rails(&s)[0];
        assert!(qpsk_outage_given_success(&s, &q).unwrap() < 1e-8);
        let s = Scenario::new(0.8, 90.0, 1.0, 1.0).unwrap();
        assert!(qpsk_outage_given_success(&s, &q).unwrap() < 1e-6);
    }
}
