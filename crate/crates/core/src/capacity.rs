//! Near-user ergodic capacity: exact branch integrals, the closed-form
//! approximation built on a two-exponential Q bound, and the conventional
//! imperfect-SIC baseline.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{geometric_breakpoints, integrate_piecewise, q_function, scaled_exp_integral_e1};
use crate::postsic_bpsk::{
    pdf_beta_failure, second_moment_w, second_moment_z, sic_failure_prob, sic_success_prob,
};
use crate::scenario::{bpsk_constellation, ConstellationPoint, LegacyModel, Scenario};

const REL_TOL: f64 = 1e-11;
const ABS_TOL: f64 = 1e-14;
const BREAK_LEVELS: usize = 30;

/// `∫₀^∞ g(β) dβ` for integrands that decay like `e^{-β²/scale²}`.
fn integrate_fading<F: Fn(f64) -> f64>(g: F, scale: f64) -> Result<f64> {
    // e^{-750} underflows, so nothing beyond this point contributes
    let hi = scale * 750f64.sqrt();
    let pts = geometric_breakpoints(hi, BREAK_LEVELS);
    Ok(integrate_piecewise(g, &pts, ABS_TOL, REL_TOL)?.value)
}

/// Decay scale of `e^{-β²/Ω}Q(|X|β/σ_n)`.
fn failure_scale(s: &Scenario, x: &ConstellationPoint) -> f64 {
    let c2 = x.value * x.value / s.sigma_n_sq();
    1.0 / (1.0 / s.omega() + 0.5 * c2).sqrt()
}

/// `I(A, B) = ∫₀^∞ β log₂(1+Aβ²) e^{-Bβ²} dβ = e^{B/A}E₁(B/A)/(2B ln 2)`.
pub fn log_gaussian_kernel(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::invalid("kernel", format!("require A > 0 and B > 0, got ({a}, {b})")));
    }
    Ok(scaled_exp_integral_e1(b / a)? / (2.0 * LN_2 * b))
}

/// `(1/ln2)e^{a}E₁(a)` with `a = 1/(KΩ)`: the Rayleigh average of `log₂(1+Kβ²)`.
fn rayleigh_log_average(a: f64) -> Result<f64> {
    Ok(scaled_exp_integral_e1(a)? / LN_2)
}

/// Per-symbol capacity terms. `c_approx` approximates `c_success`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityBreakdown {
    pub point: ConstellationPoint,
    pub c_success: f64,
    pub c_failure: f64,
    pub p_s: f64,
    pub p_f: f64,
    /// `C̄_S p_S + C̄_F p_F`
    pub c_total: f64,
    pub c_approx: f64,
    /// `A = α₂/E[W²]`
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
    pub i1: f64,
    pub i2: f64,
}

/// `p_S·C̄_S` split as `(2/Ω)(I₁ - J)` where `J` is the exact Q-weighted
/// integral; returns `(I₁, J)`.
fn success_terms(s: &Scenario, x: &ConstellationPoint) -> Result<(f64, f64)> {
    let m2w = second_moment_w(s, x);
    let a = s.alpha2() / m2w;
    let i1 = 0.5 * s.omega() * rayleigh_log_average(m2w / (s.alpha2() * s.omega()))?;
    let c = x.magnitude() / s.sigma_n();
    let omega = s.omega();
    let j = integrate_fading(
        |b| b * (a * b * b).ln_1p() / LN_2 * q_function(c * b) * (-b * b / omega).exp(),
        failure_scale(s, x),
    )?;
    Ok((i1, j))
}

/// Exact ergodic capacity given correct far-user detection.
pub fn ec_given_success_exact(s: &Scenario, x: &ConstellationPoint) -> Result<f64> {
    let (i1, j) = success_terms(s, x)?;
    Ok((2.0 / s.omega() * (i1 - j) / sic_success_prob(s, x)).max(0.0))
}

/// Exact ergodic capacity given a far-user detection error, by adaptive
/// quadrature against the failure-branch fading density.
pub fn ec_given_failure_exact(s: &Scenario, x: &ConstellationPoint) -> Result<f64> {
    let m2z = second_moment_z(s, x);
    let (a1, a2) = (s.alpha1(), s.alpha2());
    integrate_fading(
        |b| {
            let b2 = b * b;
            (a2 * b2 / (4.0 * a1 * b2 + m2z)).ln_1p() / LN_2 * pdf_beta_failure(s, x, b)
        },
        failure_scale(s, x),
    )
}

/// `(I₁, I₂)` of the closed-form approximation, with `I₂` the Q-weighted
/// integral after substituting `Q(x) ≈ e^{-x²/2}/12 + e^{-2x²/3}/4`.
fn approx_terms(s: &Scenario, x: &ConstellationPoint) -> Result<(f64, f64, f64, f64, f64)> {
    let m2w = second_moment_w(s, x);
    let a = s.alpha2() / m2w;
    let x2 = x.value * x.value / s.sigma_n_sq();
    let b1 = 0.5 * x2 + 1.0 / s.omega();
    let b2 = 2.0 * x2 / 3.0 + 1.0 / s.omega();
    let i1 = 0.5 * s.omega() * rayleigh_log_average(m2w / (s.alpha2() * s.omega()))?;
    let i2 = log_gaussian_kernel(a, b1)? / 12.0 + log_gaussian_kernel(a, b2)? / 4.0;
    Ok((a, b1, b2, i1, i2))
}

pub fn capacity_breakdown(s: &Scenario, x: &ConstellationPoint) -> Result<CapacityBreakdown> {
    let p_s = sic_success_prob(s, x);
    let p_f = sic_failure_prob(s, x);
    let c_success = ec_given_success_exact(s, x)?;
    let c_failure = ec_given_failure_exact(s, x)?;
    let (a, b1, b2, i1, i2) = approx_terms(s, x)?;
    Ok(CapacityBreakdown {
        point: *x,
        c_success,
        c_failure,
        p_s,
        p_f,
        c_total: c_success * p_s + c_failure * p_f,
        c_approx: 2.0 / s.omega() * (i1 - i2) / p_s,
        a,
        b1,
        b2,
        i1,
        i2,
    })
}

/// Exact ergodic capacity averaged over the four equiprobable symbols.
pub fn ec_total_exact(s: &Scenario) -> Result<f64> {
    let mut total = 0.0;
    for x in bpsk_constellation(s) {
        let p_s = sic_success_prob(s, &x);
        let p_f = sic_failure_prob(s, &x);
        let term = ec_given_success_exact(s, &x)? * p_s + ec_given_failure_exact(s, &x)? * p_f;
        total += x.prob() * term;
    }
    Ok(total)
}

/// Closed-form approximation `(2/Ω)(1/4)Σ(I₁ - I₂)`. The failure branch is
/// neglected and the Q-weighted term is subtracted.
pub fn ec_closed_form_approx(s: &Scenario) -> Result<f64> {
    let mut total = 0.0;
    for x in bpsk_constellation(s) {
        let (_, _, _, i1, i2) = approx_terms(s, &x)?;
        total += x.prob() * 2.0 / s.omega() * (i1 - i2);
    }
    Ok(total)
}

/// Conventional imperfect-SIC capacity,
/// `(1/ln2)[e^{a₁}E₁(a₁) - e^{a₂}E₁(a₂)]` with `a₁ = 1/(γ̄(ζα₁+α₂))` and
/// `a₂ = 1/(γ̄ζα₁)`; the second term vanishes at `ζ = 0`.
pub fn legacy_ec(s: &Scenario, m: &LegacyModel) -> Result<f64> {
    let inv = 1.0 / s.gamma_bar();
    let signal = rayleigh_log_average(inv / (m.zeta() * s.alpha1() + s.alpha2()))?;
    if m.zeta() == 0.0 {
        return Ok(signal);
    }
    let interference = rayleigh_log_average(inv / (m.zeta() * s.alpha1()))?;
    Ok((signal - interference).max(0.0))
}

/// `|exact - other|/exact × 100`.
pub fn normalized_error(exact: f64, other: f64) -> Result<f64> {
    if exact == 0.0 || !exact.is_finite() {
        return Err(Error::UndefinedNormalization(exact));
    }
    Ok((exact - other).abs() / exact.abs() * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub min: f64,
    pub max: f64,
    pub avg: f64,
}

impl ErrorSummary {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let avg = values.iter().sum::<f64>() / values.len() as f64;
        Some(ErrorSummary { min, max, avg })
    }
}
