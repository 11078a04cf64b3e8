//! Property tests over random scenarios.

mod common;

use noma_core::montecarlo::{simulate_bpsk_link, McConfig};
use noma_core::numerics::normal_pdf;
use noma_core::outage::{legacy_outage, outage_given_failure, outage_given_success, outage_total};
use noma_core::postsic_bpsk::{
    joint_pdf, pdf_beta_failure, pdf_beta_success, pdf_noise_failure, pdf_noise_success, second_moment_w,
    second_moment_z, sic_failure_prob, sic_success_prob, Branch, CurveBranch, PdfCurve,
};
use noma_core::postsic_qpsk::{psi_kernel, table_rails, ComplexNoiseSample, QpskSuccessModel};
use noma_core::scenario::{bpsk_constellation, rayleigh_pdf, LegacyModel, Scenario};
use noma_core::sweep::{Axis, Grid, SweepRecord, SweepTable};
use noma_core::Execution;
use proptest::prelude::*;

fn scenario() -> impl Strategy<Value = Scenario> {
    (0.51f64..0.99, -10.0f64..40.0, 0.25f64..4.0, 0.2f64..5.0)
        .prop_map(|(a, d, o, r)| Scenario::new(a, d, o, r).unwrap())
}

proptest! {
    #[test]
    fn fading_mixture_is_rayleigh(s in scenario(), k in 0usize..4, u in 0.0f64..6.0) {
        let x = bpsk_constellation(&s)[k];
        let b = u * s.omega().sqrt();
        let mix = sic_success_prob(&s, &x) * pdf_beta_success(&s, &x, b)
            + sic_failure_prob(&s, &x) * pdf_beta_failure(&s, &x, b);
        prop_assert!((mix - rayleigh_pdf(b, s.omega())).abs() <= 1e-12);
    }

    #[test]
    fn noise_mixture_is_gaussian(s in scenario(), k in 0usize..4, u in -8.0f64..8.0) {
        let x = bpsk_constellation(&s)[k];
        let w = u * s.sigma_n();
        let mix = sic_success_prob(&s, &x) * pdf_noise_success(&s, &x, w)
            + sic_failure_prob(&s, &x) * pdf_noise_failure(&s, &x, w);
        prop_assert!((mix - normal_pdf(w, s.sigma_n())).abs() <= 1e-12 * normal_pdf(0.0, s.sigma_n()).max(1.0));
    }

    #[test]
    fn second_moments_recombine(s in scenario(), k in 0usize..4) {
        let x = bpsk_constellation(&s)[k];
        let total = sic_success_prob(&s, &x) * second_moment_w(&s, &x)
            + sic_failure_prob(&s, &x) * second_moment_z(&s, &x);
        prop_assert!((total - s.sigma_n_sq()).abs() <= 1e-12 * s.sigma_n_sq().max(1.0));
        prop_assert!(second_moment_w(&s, &x) < s.sigma_n_sq());
        prop_assert!(second_moment_z(&s, &x) > s.sigma_n_sq());
    }

    #[test]
    fn success_probability_is_a_majority(s in scenario(), k in 0usize..4) {
        let x = bpsk_constellation(&s)[k];
        let p = sic_success_prob(&s, &x);
        prop_assert!((0.5..=1.0).contains(&p));
        let better = s.with_snr_db(s.snr_db() + 3.0).unwrap();
        prop_assert!(sic_success_prob(&better, &x) >= p);
    }

    #[test]
    fn joint_density_lives_on_its_branch(s in scenario(), k in 0usize..4, u in 0.0f64..4.0, v in -4.0f64..4.0) {
        let x = bpsk_constellation(&s)[k];
        let (b, n) = (u * s.omega().sqrt(), v * s.sigma_n());
        let ok = joint_pdf(&s, &x, Branch::Success, b, n);
        let bad = joint_pdf(&s, &x, Branch::Failure, b, n);
        prop_assert!(ok == 0.0 || bad == 0.0);
        let both = ok * sic_success_prob(&s, &x) + bad * sic_failure_prob(&s, &x);
        let product = rayleigh_pdf(b, s.omega()) * normal_pdf(n, s.sigma_n());
        prop_assert!((both - product).abs() <= 1e-12 * product.max(1.0));
    }

    #[test]
    fn outages_are_probabilities(s in scenario(), k in 0usize..4) {
        let x = bpsk_constellation(&s)[k];
        for p in [outage_given_success(&s, &x), outage_given_failure(&s, &x), outage_total(&s)] {
            prop_assert!((0.0..=1.0).contains(&p), "{p}");
        }
    }

    #[test]
    fn legacy_outage_grows_with_zeta(s in scenario(), z1 in 0.0f64..2.0, dz in 0.0f64..2.0) {
        let lo = legacy_outage(&s, &LegacyModel::from_zeta(z1).unwrap());
        let hi = legacy_outage(&s, &LegacyModel::from_zeta(z1 + dz).unwrap());
        prop_assert!(hi >= lo);
    }

    #[test]
    fn curves_integrate_to_one(s in scenario(), k in 0usize..4) {
        let x = bpsk_constellation(&s)[k];
        for b in [CurveBranch::Success, CurveBranch::Failure, CurveBranch::Unconditional] {
            let f = PdfCurve::fading(&s, &x, b, 2048).trapezoid_mass();
            let n = PdfCurve::noise(&s, &x, b, 2048).trapezoid_mass();
            prop_assert!((f - 1.0).abs() < 1e-5, "fading {b:?} {f}");
            prop_assert!((n - 1.0).abs() < 1e-5, "noise {b:?} {n}");
        }
    }

    #[test]
    fn grid_text_round_trips(start in -20.0f64..20.0, step in 0.01f64..5.0, n in 1u32..50) {
        let g = Grid::new(start, step, Some(start + step * f64::from(n)));
        let back: Grid = g.to_string().parse().unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn csv_round_trip_is_exact(rows in prop::collection::vec((any::<f64>(), any::<f64>(), any::<f64>()), 1..20)) {
        let rows: Vec<SweepRecord> = rows
            .into_iter()
            .filter(|(a, b, c)| a.is_finite() && b.is_finite() && c.is_finite())
            .map(|(x, a, b)| SweepRecord { x, values: vec![a, b] })
            .collect();
        let t = SweepTable { axis: Axis::Snr, columns: vec!["po_exact".into(), "po_legacy".into()], rows };
        let back = SweepTable::read_csv(t.to_csv_string().unwrap().as_bytes()).unwrap();
        prop_assert_eq!(back, t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn psi_kernel_equals_its_integral(a in 0.05f64..5.0, b in -10.0f64..10.0) {
        let reference = common::psi(a, b);
        prop_assert!((psi_kernel(a, b) - reference).abs() <= 1e-10 * reference.max(1e-12) + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn qpsk_real_marginal_matches_joint(s in scenario(), k in 0usize..4, u in -4.0f64..4.0) {
        let m = QpskSuccessModel::exact(&s, table_rails(&s)[k]).unwrap();
        let w = u * s.sigma_n();
        let closed = m.pdf_noise_real(w);
        let numeric = m.pdf_noise_real_numeric(w).unwrap();
        prop_assert!((closed - numeric).abs() <= 1e-6 * normal_pdf(0.0, s.sigma_n()));
    }

    #[test]
    fn qpsk_joint_density_normalizes(s in scenario(), k in 0usize..4) {
        let m = QpskSuccessModel::exact(&s, table_rails(&s)[k]).unwrap();
        let sig = s.sigma_n();
        let lam = (m.levels.lambda_i, m.levels.lambda_j);
        let total = common::integrate(
            |re| {
                // the density has a ridge where -w_I/λ_j = max(0, -w_R/λ_i)
                let kink = -lam.1 * (-re / lam.0).max(0.0);
                let mut pts = vec![-14.0 * sig];
                if kink > -14.0 * sig {
                    pts.push(kink);
                }
                pts.push(14.0 * sig);
                common::integrate(|im| m.joint_noise_pdf(&ComplexNoiseSample::new(re, im)), &pts)
            },
            &[-14.0 * sig, -3.0 * sig, 0.0, 3.0 * sig, 14.0 * sig],
        );
        prop_assert!((total - 1.0).abs() < 1e-4, "{total}");
    }

    #[test]
    fn execution_modes_agree_bitwise(s in scenario(), seed in any::<u64>()) {
        let cfg = McConfig { chunk: 4096, ..McConfig::new(20_000, seed).unwrap() };
        let a = simulate_bpsk_link(&s, &cfg.with_execution(Execution::Sequential)).unwrap();
        let b = simulate_bpsk_link(&s, &cfg.with_execution(Execution::Parallel)).unwrap();
        prop_assert_eq!(a, b);
    }
}
