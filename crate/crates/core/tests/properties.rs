use proptest::prelude::*;
use varjack::asymptotics::{
    gaussian_targets, rademacher_jackknife, rademacher_sum_function, PolynomialG,
};
use varjack::combinatorics::factorial;
use varjack::exact::{
    analyze, covariance_b, energy_cross_check, hoeffding_energies, interpolation_check, ExactConfig,
};
use varjack::instances::{random_lcs, random_multilinear};
use varjack::lcs::{lcs_brute_oracle, lcs_dp, lcs_length};
use varjack::mc::{estimate_b_k, EstimatorConfig};
use varjack::{CoordFunction, RandomSource};

fn instance(seed: u64, n: usize, m: u32, lcs: bool) -> varjack::instances::RandomInstance {
    let mut rng = RandomSource::new(seed, 0);
    if lcs {
        random_lcs(&mut rng, n, m).unwrap()
    } else {
        random_multilinear(&mut rng, n, m).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn identities_hold(seed in any::<u64>(), n in 1usize..7, m in 2u32..4, lcs in any::<bool>()) {
        let inst = instance(seed, n, m, lcs);
        let cfg = ExactConfig::default();
        let (t, r, ids) = analyze(&inst.space, &inst.f, &cfg).unwrap();
        prop_assert!(ids.all_pass(), "{:?}", ids.failures().collect::<Vec<_>>());
        // B_k non-negative and non-increasing
        for k in 0..n {
            prop_assert!(r.b[k] >= -1e-12 * r.scale());
            if k + 1 < n {
                prop_assert!(r.b[k + 1] <= r.b[k] + 1e-12 * r.scale());
            }
        }
        let e = hoeffding_energies(&inst.space, &inst.f, &cfg).unwrap();
        prop_assert!(energy_cross_check(&e, &r, 1e-9).all_pass());
        let interp = interpolation_check(&t, &inst.space, &inst.f, &cfg).unwrap();
        prop_assert!(interp.all_pass(), "{:?}", interp.failures().collect::<Vec<_>>());
    }

    #[test]
    fn covariance_polarises(seed in any::<u64>(), n in 1usize..6) {
        let a = instance(seed, n, 2, false);
        let mut rng = RandomSource::new(seed ^ 0xABCD, 1);
        let b = random_multilinear(&mut rng, n, 2).unwrap();
        // same space for both functions
        let g = b.f.clone();
        let fa = a.f.clone();
        let sum = CoordFunction::new(n, "sum", move |x| fa.eval(x) + g.eval(x));
        let g2 = b.f.clone();
        let fa2 = a.f.clone();
        let diff = CoordFunction::new(n, "diff", move |x| fa2.eval(x) - g2.eval(x));
        let cfg = ExactConfig::default();
        let c = covariance_b(&a.space, &a.f, &b.f, &cfg).unwrap();
        let (_, rs, _) = analyze(&a.space, &sum, &cfg).unwrap();
        let (_, rd, _) = analyze(&a.space, &diff, &cfg).unwrap();
        let scale = rs.scale().max(rd.scale());
        for k in 0..n {
            prop_assert!((c.b[k] - (rs.b[k] - rd.b[k]) / 4.0).abs() <= 1e-9 * scale);
        }
        prop_assert!((c.b.iter().sum::<f64>() - c.covariance).abs() <= 1e-9 * scale);
    }

    #[test]
    fn rademacher_closed_form_matches_engine(c in prop::collection::vec(-1.0f64..1.0, 1..5), n in 1usize..9) {
        let g = PolynomialG::new(c);
        let closed = rademacher_jackknife(&g, n, n).unwrap();
        let (space, f) = rademacher_sum_function(&g, n);
        let e = hoeffding_energies(&space, &f, &ExactConfig::default()).unwrap();
        let (jp, kp) = (e.jp(), e.kp());
        for k in 1..=n {
            let fk = factorial(k);
            prop_assert!((closed.j[k - 1] - fk * jp[k - 1]).abs() <= 1e-9 * closed.j[k - 1].abs().max(1.0));
            prop_assert!((closed.k[k - 1] - fk * kp[k - 1]).abs() <= 1e-9 * closed.k[k - 1].abs().max(1.0));
        }
    }

    #[test]
    fn gaussian_series_hold(c in prop::collection::vec(-2.0f64..2.0, 1..6)) {
        let t = gaussian_targets(&PolynomialG::new(c), 6);
        prop_assert!(t.report.all_pass(), "{:?}", t.report.failures().collect::<Vec<_>>());
        for k in 1..=6 {
            prop_assert!(t.eta_at(k) + 1e-12 >= t.theta_at(k));
        }
    }

    #[test]
    fn lcs_routes_agree(x in prop::collection::vec(0u32..3, 0..10), y in prop::collection::vec(0u32..3, 0..12)) {
        let b = lcs_brute_oracle(&x, &y).unwrap();
        prop_assert_eq!(b, lcs_dp(&x, &y));
        prop_assert_eq!(b, lcs_length(&x, &y));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn estimates_ignore_worker_count(seed in any::<u64>(), workers in 1usize..9, k in 1usize..5) {
        let inst = instance(seed, 4, 2, false);
        let a = estimate_b_k(&inst.space, &inst.f, k, &EstimatorConfig::new(3000, seed).with_streams(1)).unwrap();
        let b = estimate_b_k(&inst.space, &inst.f, k, &EstimatorConfig::new(3000, seed).with_streams(workers)).unwrap();
        prop_assert_eq!(a, b);
    }
}
