use proptest::prelude::*;

use wigf_core::estimate::{self, Kde};
use wigf_core::gof::{self, GofModel};
use wigf_core::igf;
use wigf_core::integrate::integrate;
use wigf_core::residual;
use wigf_core::rigf;
use wigf_core::{Distribution, QuadConfig, Sample, SampleSource, WeightFn};

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn model() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (0.3..4.0f64).prop_map(|l| Distribution::exponential(l).unwrap()),
        (0.0..2.0f64, 0.2..3.0f64).prop_map(|(a, len)| Distribution::uniform(a, a + len).unwrap()),
        (0.8..3.0f64, 0.5..2.0f64).prop_map(|(d, t)| Distribution::weibull(d, t).unwrap()),
        (2.5..6.0f64, 0.5..2.0f64).prop_map(|(c, g)| Distribution::pareto(c, g).unwrap()),
        (0.5..3.0f64).prop_map(|l| Distribution::inverted_exponential(l).unwrap()),
    ]
}

fn weight() -> impl Strategy<Value = WeightFn> {
    prop_oneof![Just(WeightFn::One), Just(WeightFn::Identity), Just(WeightFn::power(2.0).unwrap())]
}

fn sample(xs: Vec<f64>) -> Sample {
    Sample::from_parts(xs, SampleSource::Inline).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn densities_have_unit_mass(d in model()) {
        let (lo, hi) = d.support();
        let m = integrate(|x| d.density(x), lo, hi, &cfg()).unwrap().value;
        prop_assert!((m - 1.0).abs() < 1e-8, "{d}: {m}");
    }

    #[test]
    fn quantile_inverts_cdf(d in model(), u in 0.01..0.99f64) {
        let x = d.quantile(u).unwrap();
        prop_assert!((d.cdf(x) - u).abs() < 1e-10);
    }

    #[test]
    fn unit_weight_at_beta_one_is_mass(d in model()) {
        let v = igf::gwigf_ext(&d, &WeightFn::One, 1.0, &cfg()).unwrap();
        prop_assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gwigf_is_log_convex_in_beta(d in model(), w in weight(), b in 1.1..2.5f64, h in 0.05..0.4f64) {
        let c = cfg();
        let vals = [b - h, b, b + h].map(|x| igf::gwigf_ext(&d, &w, x, &c).map(f64::ln));
        if let [Ok(lo), Ok(mid), Ok(hi)] = vals {
            prop_assert!(lo + hi - 2.0 * mid >= -1e-8, "{d} {w}: {lo} {mid} {hi}");
        }
    }

    #[test]
    fn closed_form_matches_quadrature_for_exponential(l in 0.3..4.0f64, b in 1.0..3.0f64) {
        let d = Distribution::exponential(l).unwrap();
        let c = igf::gwigf_closed(&d, &WeightFn::Identity, b).unwrap().value;
        let q = igf::gwigf_ext(&d, &WeightFn::Identity, b, &cfg()).unwrap();
        prop_assert!((c - q).abs() <= 1e-8 * q.abs());
    }

    #[test]
    fn rigf_endpoints(f in model(), l in 0.3..3.0f64) {
        // support of an exponential covers every model drawn here
        let g = Distribution::exponential(l).unwrap();
        let c = cfg();
        let at1 = rigf::gwrigf_ext(&f, &g, &WeightFn::One, 1.0, &c).unwrap();
        prop_assert!((at1 - 1.0).abs() < 1e-8);
        // at b = 0 the second law carries the mass
        let at0 = rigf::gwrigf_ext(&g, &f, &WeightFn::One, 0.0, &c).unwrap();
        prop_assert!((at0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn cross_energy_below_mean(f in model(), g in model(), w in weight(), b in 1.0..3.0f64) {
        let c = cfg();
        let ci = rigf::cross_informational_energy(&f, &g, &w, b, &c);
        let fi = igf::gwigf_ext(&f, &w, b, &c);
        let gi = igf::gwigf_ext(&g, &w, b, &c);
        if let (Ok(ci), Ok(fi), Ok(gi)) = (ci, fi, gi) {
            let m = 0.5 * (fi + gi);
            prop_assert!(ci <= m + 1e-9 * m.abs().max(1.0));
        }
    }

    #[test]
    fn residual_at_lower_end_is_unconditional(d in model(), w in weight(), b in 1.0..3.0f64) {
        let c = cfg();
        let (lo, _) = d.support();
        if let (Ok(r), Ok(u)) = (residual::residual_gwigf_ext(&d, &w, b, lo, &c), igf::gwigf_ext(&d, &w, b, &c)) {
            prop_assert!((r - u).abs() <= 1e-8 * u.abs().max(1.0));
        }
    }

    #[test]
    fn kde_has_unit_mass(xs in prop::collection::vec(0.0..20.0f64, 2..80), b in 0.02..3.0f64) {
        let k = Kde::new(&xs, b).unwrap();
        let m = integrate(|x| k.pdf(x), f64::NEG_INFINITY, f64::INFINITY, &cfg()).unwrap().value;
        prop_assert!((m - 1.0).abs() < 1e-8);
        prop_assert!((k.survival(f64::NEG_INFINITY) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kde_survival_is_monotone(xs in prop::collection::vec(0.0..20.0f64, 2..40), b in 0.05..2.0f64, t in 0.0..20.0f64, dt in 0.0..5.0f64) {
        let k = Kde::new(&xs, b).unwrap();
        prop_assert!(k.survival(t + dt) <= k.survival(t) + 1e-15);
    }

    #[test]
    fn silverman_is_scale_equivariant(xs in prop::collection::vec(0.01..10.0f64, 5..60), s in 0.1..10.0f64) {
        let scaled: Vec<f64> = xs.iter().map(|x| x * s).collect();
        match (estimate::silverman(&xs), estimate::silverman(&scaled)) {
            (Ok(a), Ok(b)) => prop_assert!((b - s * a).abs() <= 1e-9 * b),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn exponential_mle_is_reciprocal_mean(xs in prop::collection::vec(0.01..10.0f64, 1..60), s in 0.1..10.0f64) {
        let a = estimate::mle_rate_exponential(&xs).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        prop_assert!((a * mean - 1.0).abs() < 1e-12);
        let scaled: Vec<f64> = xs.iter().map(|x| x * s).collect();
        let b = estimate::mle_rate_exponential(&scaled).unwrap();
        prop_assert!((b * s - a).abs() <= 1e-12 * a);
    }

    #[test]
    fn gof_criteria_are_ordered(xs in prop::collection::vec(0.05..10.0f64, 5..40)) {
        let s = sample(xs);
        let rep = gof::gof_report(&s, &[GofModel::Exponential, GofModel::Gumbel2]).unwrap();
        for w in rep.rows.windows(2) {
            prop_assert!(w[0].criteria.aic <= w[1].criteria.aic);
        }
        for r in &rep.rows {
            let c = &r.criteria;
            prop_assert!((c.aic - (2.0 * c.neg_log_l + 2.0 * r.fit.k as f64)).abs() < 1e-9);
            if let Some(aicc) = c.aicc {
                prop_assert!(aicc >= c.aic);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn bootstrap_mse_dominates_squared_bias(seed in 0u64..1000) {
        let mut grid = estimate::ExperimentGrid::exponential_study(15, 3, seed);
        grid.ns = vec![30];
        grid.ts = vec![0.2, 0.7];
        let table = estimate::bootstrap_bias_mse(&grid, estimate::exponential_truth(0.5)).unwrap();
        for r in &table.rows {
            if let (Some(b), Some(m)) = (r.bias, r.mse) {
                prop_assert!(m + 1e-15 >= b * b, "{r:?}");
            }
        }
    }

    #[test]
    fn simulation_is_reproducible(seed in 0u64..1000) {
        let mut grid = estimate::ExperimentGrid::exponential_study(10, 2, seed);
        grid.ns = vec![30];
        let a = estimate::bootstrap_bias_mse(&grid, estimate::exponential_truth(0.5)).unwrap();
        let b = estimate::bootstrap_bias_mse(&grid, estimate::exponential_truth(0.5)).unwrap();
        prop_assert_eq!(a, b);
    }
}
