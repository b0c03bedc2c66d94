use collabspan_core::cohorts::{build_cohorts, CohortTable, EntityKind, Lifetime};
use collabspan_core::exec;
use collabspan_core::fitting::{
    empirical_cdf, fit_weibull, fit_weibull_excluding_central, parameter_evolution, CdfPoint, FitConfig,
    FitVariant, WeibullParams,
};
use collabspan_core::tempgraph::{merge_intervals, Interval};
use proptest::prelude::*;

fn quantile(w: &WeibullParams, f: f64) -> f64 {
    w.lambda * (-(-f).ln_1p()).powf(1.0 / w.k)
}

fn exact_points(w: &WeibullParams, scale: f64) -> Vec<CdfPoint> {
    (1..20)
        .map(|i| {
            let f = i as f64 / 20.0;
            CdfPoint::exact(quantile(w, f) * scale, f)
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

proptest! {
    #[test]
    fn exact_points_recover_parameters(k in 0.05f64..4.0, lambda in 0.1f64..100.0) {
        let w = WeibullParams::new(k, lambda).unwrap();
        let fit = fit_weibull(&exact_points(&w, 1.0)).unwrap();
        prop_assert!(rel(fit.params.k, k) < 1e-9, "k {} vs {}", fit.params.k, k);
        prop_assert!(rel(fit.params.lambda, lambda) < 1e-9, "lambda {} vs {}", fit.params.lambda, lambda);
    }

    #[test]
    fn scaling_abscissae_scales_lambda(k in 0.1f64..3.0, lambda in 0.5f64..50.0, s in 0.01f64..100.0) {
        let w = WeibullParams::new(k, lambda).unwrap();
        let base = fit_weibull(&exact_points(&w, 1.0)).unwrap();
        let scaled = fit_weibull(&exact_points(&w, s)).unwrap();
        prop_assert!(rel(scaled.params.k, base.params.k) < 1e-9);
        prop_assert!(rel(scaled.params.lambda, base.params.lambda * s) < 1e-9);
    }

    #[test]
    fn excluding_a_point_on_an_exact_line_is_a_no_op(k in 0.1f64..3.0, lambda in 0.5f64..50.0) {
        let w = WeibullParams::new(k, lambda).unwrap();
        let pts = exact_points(&w, 1.0);
        let a = fit_weibull(&pts).unwrap();
        let b = fit_weibull_excluding_central(&pts, None).unwrap();
        prop_assert!(rel(a.params.k, b.params.k) < 1e-9);
        prop_assert!(rel(a.params.lambda, b.params.lambda) < 1e-9);
    }

    #[test]
    fn empirical_cdf_is_strictly_increasing(
        counts in prop::collection::vec(0u64..50, 61),
        truncated in 0u64..40,
    ) {
        let mut t = CohortTable::from_counts(
            EntityKind::Node, 1950, 60,
            counts.iter().enumerate().map(|(dt, &c)| (dt as u32, c)),
        );
        t.add(75, truncated);
        if let Ok(points) = empirical_cdf(&t, 1) {
            prop_assert!(points.windows(2).all(|w| w[0].f < w[1].f && w[0].dt < w[1].dt));
            prop_assert!(points.iter().all(|p| p.f > 0.0 && p.f < 1.0 && p.dt >= 1.0));
            let ceiling = t.in_range() as f64 / t.total as f64;
            prop_assert!(points.last().unwrap().f <= ceiling);
        }
    }

    #[test]
    fn cohort_tables_conserve_and_ignore_order(
        mut lifetimes in prop::collection::vec((1900i32..1910, 0u32..100), 0..400),
        seed in any::<u64>(),
    ) {
        let lts: Vec<Lifetime> = lifetimes.iter().map(|&(cohort, dt)| Lifetime { cohort, dt }).collect();
        let tables = build_cohorts(EntityKind::Node, &lts, 60);
        for t in &tables {
            prop_assert_eq!(t.histogram.iter().sum::<u64>() + t.truncated, t.total);
        }
        prop_assert_eq!(tables.iter().map(|t| t.total).sum::<u64>(), lts.len() as u64);
        prop_assert!(tables.windows(2).all(|w| w[0].cohort < w[1].cohort));

        // Deterministic shuffle.
        let n = lifetimes.len();
        let mut state = seed | 1;
        for i in (1..n).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            lifetimes.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let shuffled: Vec<Lifetime> = lifetimes.iter().map(|&(cohort, dt)| Lifetime { cohort, dt }).collect();
        prop_assert_eq!(build_cohorts(EntityKind::Node, &shuffled, 60), tables);
    }

    #[test]
    fn raising_the_limit_only_moves_truncated_counts(
        lifetimes in prop::collection::vec((1900i32..1905, 0u32..120), 1..300),
    ) {
        let lts: Vec<Lifetime> = lifetimes.iter().map(|&(cohort, dt)| Lifetime { cohort, dt }).collect();
        let at60 = build_cohorts(EntityKind::Node, &lts, 60);
        let at80 = build_cohorts(EntityKind::Node, &lts, 80);
        prop_assert_eq!(at60.len(), at80.len());
        for (a, b) in at60.iter().zip(&at80) {
            prop_assert_eq!(&a.histogram[..], &b.histogram[..=60]);
            prop_assert_eq!(a.total, b.total);
            prop_assert_eq!(a.truncated, b.truncated + b.histogram[61..].iter().sum::<u64>());
        }
    }

    #[test]
    fn merged_intervals_cover_the_same_instants(
        raw in prop::collection::vec((0u32..80, 0u32..12), 1..30),
    ) {
        let input: Vec<Interval> = raw
            .iter()
            .map(|&(a, len)| Interval { creation: a as f64 * 0.5, removal: (a + len) as f64 * 0.5 })
            .collect();
        let mut merged = input.clone();
        merge_intervals(&mut merged);
        prop_assert!(merged.windows(2).all(|w| w[0].removal < w[1].creation));
        for step in 0..200 {
            let t = step as f64 * 0.25;
            let before = input.iter().any(|iv| iv.contains(t));
            let after = merged.iter().any(|iv| iv.contains(t));
            prop_assert_eq!(before, after, "t = {}", t);
        }
    }
}

#[test]
fn fits_do_not_depend_on_parallelism() {
    let tables: Vec<CohortTable> = (0..12)
        .map(|c| {
            CohortTable::from_counts(
                EntityKind::Edge,
                1980 + c,
                60,
                (0..40u32).map(|dt| (dt, (500.0 * (-(dt as f64) / (4.0 + c as f64)).exp()) as u64 + 1)),
            )
        })
        .collect();
    let cfg = FitConfig::default();
    let par = parameter_evolution(&tables, &FitVariant::ALL, &cfg);
    let seq = exec::sequential(|| parameter_evolution(&tables, &FitVariant::ALL, &cfg));
    assert_eq!(par, seq);
    assert_eq!(par.len(), 3);
    assert!(par.iter().all(|s| s.points.len() == 12));
}
