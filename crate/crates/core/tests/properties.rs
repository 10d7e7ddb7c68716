use proptest::prelude::*;
use taubounds::parallel::with_workers;
use taubounds::{
    analyze, population_bounds, sample_copula, simulate_dataset, summarize, AnalysisOptions,
    BenchmarkScenario, CopulaSpec, CovariateScale, MarginMode, MgpConfig, ObservationRecord,
    PiecewiseLinearCdf, ThetaConstraint,
};

fn config(rho: f64, gamma: [[f64; 2]; 4], scale: CovariateScale) -> MgpConfig {
    MgpConfig::new(gamma, CopulaSpec::gaussian(rho).unwrap(), scale).unwrap()
}

fn gamma_strategy() -> impl Strategy<Value = [[f64; 2]; 4]> {
    prop::array::uniform4(prop::array::uniform2(-5.0..5.0f64))
}

fn scale_strategy() -> impl Strategy<Value = CovariateScale> {
    prop_oneof![Just(CovariateScale::Uniform01), Just(CovariateScale::NormalScore)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn worst_case_contains_zero(
        rho in -0.999..0.999f64,
        gamma in gamma_strategy(),
        scale in scale_strategy(),
        seed in 0u64..1000,
    ) {
        let cfg = config(rho, gamma, scale);
        let pop = population_bounds(&cfg, ThetaConstraint::new(0.25).unwrap(), 20_000, seed).unwrap();
        let w = pop.worst_case;
        prop_assert!(w.lower <= 3.0 * w.se_lower.unwrap(), "lower {} se {:?}", w.lower, w.se_lower);
        prop_assert!(w.upper >= -3.0 * w.se_upper.unwrap(), "upper {} se {:?}", w.upper, w.se_upper);
    }

    #[test]
    fn refined_nested_and_monotone(
        rho in -0.999..0.999f64,
        gamma in gamma_strategy(),
        scale in scale_strategy(),
        seed in 0u64..1000,
    ) {
        let cfg = config(rho, gamma, scale);
        let mut prev: Option<(f64, f64)> = None;
        for th in [0.1, 0.25, 0.4] {
            let pop = population_bounds(&cfg, ThetaConstraint::new(th).unwrap(), 10_000, seed).unwrap();
            prop_assert!(pop.refined.is_within(&pop.worst_case));
            if let Some((lo, hi)) = prev {
                prop_assert!(pop.refined.lower >= lo);
                prop_assert!(pop.refined.upper >= hi);
            }
            prev = Some((pop.refined.lower, pop.refined.upper));
        }
    }

    #[test]
    fn affine_table_matches_uniform(
        a in -10.0..10.0f64,
        b in 0.1..50.0f64,
        seed in 0u64..1000,
    ) {
        let cfg = BenchmarkScenario::P3.config(CovariateScale::Uniform01);
        let recs = simulate_dataset(&cfg, 500, seed).unwrap();
        let scaled: Vec<ObservationRecord> = recs
            .iter()
            .map(|r| ObservationRecord::new(r.x.map(|x| a + b * x), r.y.map(|y| a + b * y)))
            .collect();
        let table = || PiecewiseLinearCdf::new(vec![(a, 0.0), (a + b, 1.0)]).unwrap();
        let margins = MarginMode::KnownFromFile { x: table(), y: table() };
        let theta = Some(ThetaConstraint::new(0.3).unwrap());
        let opts = AnalysisOptions::default();
        let base = analyze(&recs, &MarginMode::KnownUniform01, theta, &opts).unwrap();
        let moved = analyze(&scaled, &margins, theta, &opts).unwrap();
        let tol = 1e-9;
        for (p, q) in [
            (base.worst_case.raw, moved.worst_case.raw),
            (base.refined.unwrap().raw, moved.refined.unwrap().raw),
        ] {
            prop_assert!((p.lower - q.lower).abs() < tol && (p.upper - q.upper).abs() < tol);
        }
        prop_assert_eq!(base.decision, moved.decision);
    }

    #[test]
    fn unknown_margin_worst_case_contains_zero(
        rho in -0.999..0.999f64,
        gamma in gamma_strategy(),
        seed in 0u64..1000,
    ) {
        let cfg = config(rho, gamma, CovariateScale::Uniform01);
        let recs = simulate_dataset(&cfg, 2_000, seed).unwrap();
        let rep = analyze(&recs, &MarginMode::Unknown, None, &AnalysisOptions::default()).unwrap();
        let w = rep.worst_case.raw;
        prop_assert!(w.lower <= 3.0 * w.se_lower.unwrap());
        prop_assert!(w.upper >= -3.0 * w.se_upper.unwrap());
    }
}

fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn gaussian_copula_margins_are_uniform() {
    let n = 20_000;
    // 1% critical value of the one-sample Kolmogorov-Smirnov statistic.
    let crit = 1.63 / (n as f64).sqrt();
    for rho in [-0.95, 0.0, 0.7] {
        let pts = sample_copula(CopulaSpec::gaussian(rho).unwrap(), n, 11).unwrap();
        let du = ks_uniform(pts.iter().map(|p| p.u()).collect());
        let dv = ks_uniform(pts.iter().map(|p| p.v()).collect());
        assert!(du < crit && dv < crit, "rho {rho}: D = {du}, {dv}, crit {crit}");
    }
}

#[test]
fn plug_in_summary_near_population() {
    let cfg = BenchmarkScenario::P3.config(CovariateScale::Uniform01);
    let pop = population_bounds(&cfg, BenchmarkScenario::P3.theta(), 2_000_000, 5).unwrap();
    let recs = simulate_dataset(&cfg, 100_000, 6).unwrap();
    let s = summarize(&recs, &MarginMode::KnownUniform01).unwrap();
    let se = s.se.unwrap();
    let pse = pop.summary.base.se.unwrap();
    let base = &pop.summary.base;
    let pairs = [
        (s.m1, base.m1, se.m1, pse.m1),
        (s.l1, base.l1, se.l1, pse.l1),
        (s.m2, base.m2, se.m2, pse.m2),
        (s.m3, base.m3, se.m3, pse.m3),
    ];
    for (a, b, sa, sb) in pairs {
        let (a, b) = (a.unwrap(), b.unwrap());
        assert!((a - b).abs() <= 3.0 * sa.hypot(sb), "{a} vs {b}");
    }
    for z in 0..4 {
        assert!((s.p[z] - base.p[z]).abs() <= 3.0 * se.p[z].hypot(pse.p[z]));
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let cfg = BenchmarkScenario::P2.config(CovariateScale::NormalScore);
    let theta = BenchmarkScenario::P2.theta();
    let run = |w| {
        with_workers(w, || {
            (
                population_bounds(&cfg, theta, 50_000, 9).unwrap(),
                simulate_dataset(&cfg, 30_000, 9).unwrap(),
            )
        })
    };
    let (p1, d1) = run(1);
    let (p8, d8) = run(8);
    assert_eq!(p1.worst_case, p8.worst_case);
    assert_eq!(p1.refined, p8.refined);
    assert_eq!(p1.summary, p8.summary);
    assert_eq!(d1, d8);
}
