//! Near-user outage probability over the SIC success and failure branches,
//! and the conventional imperfect-SIC baseline.

use serde::{Deserialize, Serialize};

use crate::numerics::{erf, q_function, std_normal_cdf};
use crate::postsic_bpsk::{
    mu, second_moment_w, second_moment_z, sic_failure_prob, sic_success_prob,
};
use crate::scenario::{bpsk_constellation, distinct_points, ConstellationPoint, LegacyModel, Scenario};

/// Per-symbol outage terms and the intermediates that produce them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageBreakdown {
    pub point: ConstellationPoint,
    pub po_success: f64,
    pub po_failure: f64,
    pub p_s: f64,
    pub p_f: f64,
    /// `P_OS·p_S + P_OF·p_F`
    pub contribution: f64,
    /// `ψ = α₂/E[W²]`
    pub psi: f64,
    /// `√(γ_th/ψ)`, the fading threshold on the success branch.
    pub eps_success: f64,
    /// `√(γ_th E[Z²]/(α₂ - 4α₁γ_th))`; `None` when the failure branch is
    /// always in outage.
    pub eps_failure: Option<f64>,
}

/// `√((X²γ̄+2)/(2Ω))`
fn erf_scale(s: &Scenario, x: &ConstellationPoint) -> f64 {
    ((x.value * x.value * s.gamma_bar() + 2.0) / (2.0 * s.omega())).sqrt()
}

pub fn eps_success(s: &Scenario, x: &ConstellationPoint) -> f64 {
    (s.gamma_th() * second_moment_w(s, x) / s.alpha2()).sqrt()
}

pub fn eps_failure(s: &Scenario, x: &ConstellationPoint) -> Option<f64> {
    let margin = s.alpha2() - 4.0 * s.alpha1() * s.gamma_th();
    (margin > 0.0).then(|| (s.gamma_th() * second_moment_z(s, x) / margin).sqrt())
}

/// `p_S·P_OS = ∫₀^ε f_β(β) Φ(|X|β/σ_n) dβ`, integrated by parts.
fn joint_outage_success(s: &Scenario, x: &ConstellationPoint, eps: f64) -> f64 {
    let c = x.magnitude() / s.sigma_n();
    let fade = (-eps * eps / s.omega()).exp();
    0.5 - fade * std_normal_cdf(c * eps) + 0.5 * mu(s, x) * erf(erf_scale(s, x) * eps)
}

/// `p_F·P_OF = ∫₀^ε f_β(β) Q(|X|β/σ_n) dβ`.
fn joint_outage_failure(s: &Scenario, x: &ConstellationPoint, eps: f64) -> f64 {
    let c = x.magnitude() / s.sigma_n();
    let fade = (-eps * eps / s.omega()).exp();
    0.5 - fade * q_function(c * eps) - 0.5 * mu(s, x) * erf(erf_scale(s, x) * eps)
}

/// Outage probability given correct far-user detection,
/// `(1/p_S)[1/2 - e^{-ε²/Ω}Φ(|X|ε/σ_n) + (μ/2)erf(ε√((X²γ̄+2)/(2Ω)))]`.
pub fn outage_given_success(s: &Scenario, x: &ConstellationPoint) -> f64 {
    let eps = eps_success(s, x);
    (joint_outage_success(s, x, eps) / sic_success_prob(s, x)).clamp(0.0, 1.0)
}

/// Outage probability given a far-user detection error. Equal to 1 when
/// `α₂ ≤ 4α₁γ_th`, since the residual interference then caps the SINR below
/// the threshold for every fade.
pub fn outage_given_failure(s: &Scenario, x: &ConstellationPoint) -> f64 {
    match eps_failure(s, x) {
        None => 1.0,
        Some(eps) => (joint_outage_failure(s, x, eps) / sic_failure_prob(s, x)).clamp(0.0, 1.0),
    }
}

/// The success-branch closed form exactly as it appears in print, kept only
/// so reports can show how far it sits from the defining integral.
pub fn printed_outage_given_success(s: &Scenario, x: &ConstellationPoint) -> f64 {
    let eps = eps_success(s, x);
    let x2g = x.value * x.value * s.gamma_bar();
    let fade = (-eps * eps / s.omega()).exp();
    let q = q_function(eps * (x2g / s.omega()).sqrt());
    let phi = std_normal_cdf(eps * ((x2g + 2.0) / s.omega()).sqrt());
    (0.5 - fade * (1.0 + q) + mu(s, x) * phi) / sic_success_prob(s, x)
}

pub fn outage_breakdown(s: &Scenario, x: &ConstellationPoint) -> OutageBreakdown {
    let p_s = sic_success_prob(s, x);
    let p_f = sic_failure_prob(s, x);
    let po_success = outage_given_success(s, x);
    let po_failure = outage_given_failure(s, x);
    let eps_f = eps_failure(s, x);
    // built from the unnormalized integrals so tiny p_F does not amplify error
    let failure_part = match eps_f {
        None => p_f,
        Some(eps) => joint_outage_failure(s, x, eps).clamp(0.0, p_f),
    };
    let success_part = joint_outage_success(s, x, eps_success(s, x)).clamp(0.0, p_s);
    OutageBreakdown {
        point: *x,
        po_success,
        po_failure,
        p_s,
        p_f,
        contribution: (success_part + failure_part).clamp(0.0, 1.0),
        psi: s.alpha2() / second_moment_w(s, x),
        eps_success: eps_success(s, x),
        eps_failure: eps_f,
    }
}

/// Average over the four equiprobable symbols.
pub fn outage_total(s: &Scenario) -> f64 {
    bpsk_constellation(s)
        .iter()
        .map(|x| x.prob() * outage_breakdown(s, x).contribution)
        .sum()
}

/// The same average using one representative per `|X_ij|`.
pub fn outage_total_symmetric(s: &Scenario) -> f64 {
    let [a, b] = distinct_points(s);
    0.5 * (outage_breakdown(s, &a).contribution + outage_breakdown(s, &b).contribution)
}

/// Conventional imperfect-SIC outage with residual power factor `ζ`.
pub fn legacy_outage(s: &Scenario, m: &LegacyModel) -> f64 {
    let margin = s.alpha2() - m.zeta() * s.alpha1() * s.gamma_th();
    if margin <= 0.0 {
        return 1.0;
    }
    -(-(s.gamma_th() / s.gamma_bar()) / margin).exp_m1()
}

/// Largest `ζ` for which the conventional model is not in certain outage,
/// `α₂/(α₁γ_th)`.
pub fn legacy_zeta_upper_bound(s: &Scenario) -> f64 {
    s.alpha2() / (s.alpha1() * s.gamma_th())
}
