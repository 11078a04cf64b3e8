//! Self-check suites: mixture identities, normalization, closed forms
//! against direct quadrature, and simulation agreement.

use serde::{Deserialize, Serialize};

use crate::capacity::capacity_breakdown;
use crate::error::Result;
use crate::exec::Execution;
use crate::montecarlo::{ChunkRng, McConfig};
use crate::numerics::{integrate_piecewise, normal_pdf, std_normal_cdf};
use crate::outage::{eps_failure, eps_success, outage_given_failure, outage_given_success};
use crate::postsic_bpsk::{
    pdf_beta_failure, pdf_beta_success, pdf_noise_failure, pdf_noise_success, second_moment_w,
    second_moment_z, sic_failure_prob, sic_success_prob, CurveBranch, PdfCurve, DEFAULT_CURVE_POINTS,
};
use crate::postsic_qpsk::{psi_kernel, table_rails, QpskSuccessModel};
use crate::reproduce::{Check, SpotComparison};
use crate::scenario::{bpsk_constellation, rayleigh_pdf, ConstellationPoint, Scenario};
use crate::sweep::point_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

impl std::str::FromStr for Level {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            _ => Err(crate::Error::invalid("level", format!("expected fast or full, got `{s}`"))),
        }
    }
}

/// A documented inconsistency in the published expressions and how this
/// crate handles it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownIssue {
    pub name: String,
    pub status: String,
    pub handling: String,
}

pub fn known_issues() -> Vec<KnownIssue> {
    let issue = |name: &str, handling: &str| KnownIssue {
        name: name.to_string(),
        status: "known, handled".to_string(),
        handling: handling.to_string(),
    };
    vec![
        issue(
            "printed success-branch outage closed form",
            "does not equal its defining integral (0.847 vs 0.362 at alpha1=0.8, 10 dB, R=1); replaced by the re-derived form 1/2 - e^{-eps^2/Omega} Phi(c eps) + (mu/2) erf(k eps)",
        ),
        issue(
            "QPSK unequal-rail second moment split",
            "the rail-wise formula gives different values for (1,-1) and (-1,1) while simulation is symmetric; the pair mean is gated against simulation and single cells are reported",
        ),
        issue(
            "printed Psi kernel",
            "replaced by a^2/4 - (a^2/(2 pi))[ab/(1+a^2 b^2) + arctan(ab)], which equals its defining integral",
        ),
        issue(
            "printed E[Q^2] identity",
            "replaced by 1/4 - (mu/pi)(pi/2 - arctan mu); the equal-rail success probability becomes 1/4 + mu/2 + (mu/pi) arctan mu",
        ),
        issue(
            "rail-average QPSK success probability accuracy",
            "the averaged-rail approximation is off by up to 2.05% at 10 dB (0.29% at 20 dB); the second-moment formula is evaluated with the exact success probability",
        ),
        issue(
            "zeta range for alpha1=0.8, R=0.5",
            "printed as 6.036; alpha2/(alpha1 gamma_th) evaluates to 0.6036",
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub level: Level,
    pub checks: Vec<Check>,
    pub known_issues: Vec<KnownIssue>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.gating).all(|c| c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&c.line());
            s.push('\n');
        }
        for k in &self.known_issues {
            s.push_str(&format!("[{}] {}: {}\n", k.status, k.name, k.handling));
        }
        s
    }
}

struct Grid {
    alphas: Vec<f64>,
    snrs: Vec<f64>,
    rates: Vec<f64>,
}

impl Grid {
    fn for_level(level: Level) -> Self {
        match level {
            Level::Fast => Grid {
                alphas: vec![0.55, 0.75, 0.95],
                snrs: vec![-10.0, 0.0, 10.0, 20.0, 30.0, 40.0],
                rates: vec![0.25, 1.0, 4.0],
            },
            Level::Full => Grid {
                alphas: (0..9).map(|k| 0.55 + 0.05 * f64::from(k)).collect(),
                snrs: (0..11).map(|k| -10.0 + 5.0 * f64::from(k)).collect(),
                rates: vec![0.25, 0.5, 1.0, 2.0, 3.0, 4.0],
            },
        }
    }

    fn scenarios(&self) -> Result<Vec<Scenario>> {
        let mut v = Vec::new();
        for &a in &self.alphas {
            for &d in &self.snrs {
                for &r in &self.rates {
                    v.push(Scenario::new(a, d, 1.0, r)?);
                }
            }
        }
        Ok(v)
    }
}

/// Scenarios drawn uniformly over alpha1 in [0.55, 0.95], SNR in [-10, 40] dB,
/// rate in [0.25, 4] and Omega in [0.5, 2].
pub fn random_scenarios(seed: u64, count: usize) -> Result<Vec<Scenario>> {
    let mut rng = ChunkRng::new(seed, 0);
    (0..count)
        .map(|_| {
            let a = 0.55 + 0.4 * rng.uniform_open0();
            let d = -10.0 + 50.0 * rng.uniform_open0();
            let r = 0.25 + 3.75 * rng.uniform_open0();
            let o = 0.5 + 1.5 * rng.uniform_open0();
            Scenario::new(a, d, o, r)
        })
        .collect()
}

fn fading_integral<F: Fn(f64) -> f64>(f: F, s: &Scenario, x: &ConstellationPoint, upper: f64) -> Result<f64> {
    let knee = (s.sigma_n() / x.magnitude()).min(upper);
    let mut pts = vec![0.0, knee, upper];
    pts.dedup();
    Ok(integrate_piecewise(f, &pts, 1e-14, 1e-12)?.value)
}

fn identity_checks(scenarios: &[Scenario]) -> Vec<Check> {
    let mut mix_fading = 0.0f64;
    let mut mix_noise = 0.0f64;
    let mut moment = 0.0f64;
    for s in scenarios {
        for x in bpsk_constellation(s) {
            let (ps, pf) = (sic_success_prob(s, &x), sic_failure_prob(s, &x));
            moment = moment.max((ps * second_moment_w(s, &x) + pf * second_moment_z(s, &x) - s.sigma_n_sq()).abs());
            for k in 0..=40 {
                let b = 0.1 * f64::from(k) * s.omega().sqrt();
                let lhs = ps * pdf_beta_success(s, &x, b) + pf * pdf_beta_failure(s, &x, b);
                mix_fading = mix_fading.max((lhs - rayleigh_pdf(b, s.omega())).abs());
                let w = (0.3 * f64::from(k) - 6.0) * s.sigma_n();
                let lhs = ps * pdf_noise_success(s, &x, w) + pf * pdf_noise_failure(s, &x, w);
                mix_noise = mix_noise.max((lhs - normal_pdf(w, s.sigma_n())).abs());
            }
        }
    }
    vec![
        Check::gate("mixture identity, fading", mix_fading <= 1e-12, format!("max abs error {mix_fading:.2e}")),
        Check::gate("mixture identity, noise", mix_noise <= 1e-12, format!("max abs error {mix_noise:.2e}")),
        Check::gate("moment identity", moment <= 1e-12, format!("max abs error {moment:.2e}")),
    ]
}

fn normalization_checks(scenarios: &[Scenario]) -> Vec<Check> {
    let mut err = 0.0f64;
    for s in scenarios.iter().step_by(7) {
        let x = bpsk_constellation(s)[3];
        for b in [CurveBranch::Success, CurveBranch::Failure, CurveBranch::Unconditional] {
            err = err.max((PdfCurve::fading(s, &x, b, DEFAULT_CURVE_POINTS).trapezoid_mass() - 1.0).abs());
            err = err.max((PdfCurve::noise(s, &x, b, DEFAULT_CURVE_POINTS).trapezoid_mass() - 1.0).abs());
        }
    }
    vec![Check::gate("curve normalization", err <= 1e-6, format!("max |mass - 1| {err:.2e}"))]
}

fn closed_form_checks(scenarios: &[Scenario]) -> Result<Vec<Check>> {
    let mut ps_err = 0.0f64;
    let mut m2_err = 0.0f64;
    let mut pos_err = 0.0f64;
    let mut pof_err = 0.0f64;
    let mut i1_err = 0.0f64;
    for s in scenarios {
        for x in crate::scenario::distinct_points(s) {
            let c = x.magnitude() / s.sigma_n();
            let ps = fading_integral(|b| rayleigh_pdf(b, s.omega()) * std_normal_cdf(c * b), s, &x, 40.0 * s.omega().sqrt())?;
            ps_err = ps_err.max((ps - sic_success_prob(s, &x)).abs());
            let span = 12.0 * s.sigma_n();
            let m2 = integrate_piecewise(|w| w * w * pdf_noise_success(s, &x, w), &[-span, 0.0, span], 1e-16, 1e-12)?.value;
            m2_err = m2_err.max((m2 - second_moment_w(s, &x)).abs());
            let eps = eps_success(s, &x);
            let pos = fading_integral(|b| pdf_beta_success(s, &x, b), s, &x, eps)?;
            pos_err = pos_err.max((pos - outage_given_success(s, &x)).abs());
            if let Some(eps) = eps_failure(s, &x) {
                let pof = fading_integral(|b| pdf_beta_failure(s, &x, b), s, &x, eps)?;
                pof_err = pof_err.max((pof - outage_given_failure(s, &x)).abs());
            }
            let br = capacity_breakdown(s, &x)?;
            let a = br.a;
            let i1 = integrate_piecewise(
                |b| b * (a * b * b).ln_1p() / std::f64::consts::LN_2 * (-b * b / s.omega()).exp(),
                &crate::numerics::geometric_breakpoints(30.0 * s.omega().sqrt(), 30),
                1e-14,
                1e-12,
            )?
            .value;
            i1_err = i1_err.max((i1 - br.i1).abs());
        }
    }
    let mut psi_err = 0.0f64;
    for (a, b) in [(0.3, -2.0), (1.0, 1.0), (0.7, 0.4), (2.0, 3.0), (1.5, -0.8)] {
        let q = integrate_piecewise(
            |w| w * w * normal_pdf(w, a) * std_normal_cdf(b * w),
            &[-14.0 * a, -a, 0.0],
            1e-16,
            1e-12,
        )?
        .value;
        psi_err = psi_err.max(((q - psi_kernel(a, b)) / q).abs());
    }
    let mut qpsk_err = 0.0f64;
    for s in scenarios.iter().step_by(5) {
        for q in table_rails(s) {
            let m = QpskSuccessModel::exact(s, q)?;
            let numeric = m.second_moment_real_numeric()?;
            qpsk_err = qpsk_err.max(((numeric - m.second_moment_real()) / numeric).abs());
        }
    }
    Ok(vec![
        Check::gate("SIC success probability vs quadrature", ps_err <= 1e-6, format!("max abs error {ps_err:.2e}")),
        Check::gate("E[W^2] vs quadrature", m2_err <= 1e-6, format!("max abs error {m2_err:.2e}")),
        Check::gate(
            "success-branch outage (re-derived form) vs quadrature",
            pos_err <= 1e-6,
            format!("max abs error {pos_err:.2e}"),
        ),
        Check::gate("failure-branch outage vs quadrature", pof_err <= 1e-6, format!("max abs error {pof_err:.2e}")),
        Check::gate("I1 kernel vs quadrature", i1_err <= 1e-6, format!("max abs error {i1_err:.2e}")),
        Check::gate("Psi kernel vs quadrature", psi_err <= 1e-8, format!("max rel error {psi_err:.2e}")),
        Check::gate("QPSK E[W_R^2] vs quadrature", qpsk_err <= 1e-4, format!("max rel error {qpsk_err:.2e}")),
    ])
}

fn mc_checks(level: Level, seed: u64, execution: Execution) -> Result<Vec<Check>> {
    let samples = match level {
        Level::Fast => 200_000,
        Level::Full => 10_000_000,
    };
    let spots = [(0.75, 10.0, 1.0), (0.9, 20.0, 0.5), (0.55, 5.0, 0.25), (0.8, 30.0, 3.0)];
    let mut out = Vec::new();
    let mut worst_z = 0.0f64;
    for (k, &(a, d, r)) in spots.iter().enumerate() {
        let s = Scenario::new(a, d, 1.0, r)?;
        let cfg = McConfig::new(samples, point_seed(seed, k))?.with_execution(execution);
        let c = SpotComparison::run(&s, &cfg)?;
        worst_z = worst_z
            .max(c.outage_mc.proportion_z_score(c.outage_exact))
            .max(c.ec_mc.z_score(c.ec_exact));
    }
    out.push(Check::gate(
        format!("simulation agreement ({samples} samples, 4 spots)"),
        worst_z <= 4.0,
        format!("largest |z| = {worst_z:.2}"),
    ));
    Ok(out)
}

pub fn run_validation(level: Level, seed: u64, execution: Execution) -> Result<ValidationReport> {
    let scenarios = Grid::for_level(level).scenarios()?;
    let mut checks = identity_checks(&random_scenarios(seed, 1000)?);
    checks.extend(normalization_checks(&scenarios));
    checks.extend(closed_form_checks(&scenarios)?);
    checks.extend(mc_checks(level, seed, execution)?);
    Ok(ValidationReport {
        level,
        checks,
        known_issues: known_issues(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suite_passes() {
        let r = run_validation(Level::Fast, 3, Execution::Sequential).unwrap();
        assert!(r.passed(), "{}", r.render());
        assert!(r.known_issues.len() >= 2);
        assert!(r.known_issues.iter().all(|k| k.status == "known, handled"));
        assert!(r.to_json().unwrap().contains("\"level\": \"fast\""));
    }
}
