use oed_core::bnb::{self, BnbParams, Status};
use oed_core::cobnb::cobnb_solve;
use oed_core::instance::{generate, Correlation, Criterion, GeneratorSpec, Variant};
use oed_core::verify::{brute_force, oracle_criteria, tiny_instance};

fn tol(f: f64) -> f64 {
    1e-6 * (1.0 + f.abs())
}

#[test]
fn all_solvers_agree_with_enumeration() {
    let params = BnbParams::exact();
    for seed in 0..12u64 {
        for criterion in oracle_criteria() {
            for variant in [Variant::Optimal, Variant::Fusion] {
                let inst = tiny_instance(seed, variant, criterion);
                let Ok(oracle) = brute_force(&inst) else {
                    let r = bnb::solve(&inst, &params).unwrap();
                    assert_eq!(r.status, Status::Infeasible);
                    continue;
                };
                let a = bnb::solve(&inst, &params).unwrap();
                let b = cobnb_solve(&inst, &params).unwrap();
                for r in [&a, &b] {
                    assert_eq!(r.status, Status::Optimal, "{} seed {seed}", r.solver);
                    assert!((r.objective - oracle.value).abs() <= tol(oracle.value), "{} seed {seed}", r.solver);
                    assert!(r.lower_bound <= r.objective + 1e-9);
                }
            }
        }
    }
}

#[test]
fn single_worker_runs_are_deterministic() {
    let inst = generate(&GeneratorSpec::new(20, 5, Variant::Optimal, Correlation::Correlated, 3)).unwrap();
    let params = BnbParams::default();
    let a = bnb::solve(&inst, &params).unwrap();
    let b = bnb::solve(&inst, &params).unwrap();
    assert_eq!(a.incumbent, b.incumbent);
    assert_eq!(a.nodes, b.nodes);
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    let c = cobnb_solve(&inst, &params).unwrap();
    let d = cobnb_solve(&inst, &params).unwrap();
    assert_eq!(c.incumbent, d.incumbent);
    assert_eq!(c.nodes, d.nodes);
}

#[test]
fn worker_count_does_not_change_the_optimum() {
    let inst = generate(&GeneratorSpec::new(18, 4, Variant::Fusion, Correlation::Independent, 9))
        .unwrap()
        .with_criterion(Criterion::a_opt());
    let one = bnb::solve(&inst, &BnbParams::default()).unwrap();
    let four = bnb::solve(&inst, &BnbParams { workers: 4, ..Default::default() }).unwrap();
    assert_eq!(one.status, Status::Optimal);
    assert_eq!(four.status, Status::Optimal);
    let t = 1e-6 + 1e-4 * one.objective.abs();
    assert!((one.objective - four.objective).abs() <= 2.0 * t);
}

#[test]
fn dynamic_pruning_keeps_the_optimum() {
    for seed in 1..4u64 {
        let inst = generate(&GeneratorSpec::new(16, 4, Variant::Optimal, Correlation::Correlated, seed)).unwrap();
        let on = bnb::solve(&inst, &BnbParams::exact()).unwrap();
        let off = bnb::solve(&inst, &BnbParams { dynamic_pruning: false, ..BnbParams::exact() }).unwrap();
        assert!((on.objective - off.objective).abs() <= tol(on.objective));
    }
}

#[test]
fn node_limit_reports_a_valid_bracket() {
    let inst = generate(&GeneratorSpec::new(30, 6, Variant::Optimal, Correlation::Correlated, 1)).unwrap();
    let r = bnb::solve(&inst, &BnbParams { node_limit: Some(2), ..BnbParams::exact() }).unwrap();
    assert_eq!(r.status, Status::GapLimit);
    assert!(r.lower_bound <= r.objective);
    assert!(r.nodes <= 2);
}

#[test]
fn forced_timeout_keeps_bound_below_incumbent() {
    let inst = generate(&GeneratorSpec::new(100, 25, Variant::Optimal, Correlation::Independent, 1)).unwrap();
    for r in [
        bnb::solve(&inst, &BnbParams { time_limit: Some(0.001), ..Default::default() }).unwrap(),
        cobnb_solve(&inst, &BnbParams { time_limit: Some(0.001), ..Default::default() }).unwrap(),
    ] {
        assert_eq!(r.status, Status::TimeLimit, "{}", r.solver);
        assert!(r.lower_bound <= r.objective, "{}", r.solver);
    }
}

#[test]
fn incumbent_history_only_improves() {
    let inst = generate(&GeneratorSpec::new(24, 6, Variant::Fusion, Correlation::Correlated, 4)).unwrap();
    let r = bnb::solve(&inst, &BnbParams { record_trace: true, ..Default::default() }).unwrap();
    for w in r.improvements.windows(2) {
        assert!(w[1].objective <= w[0].objective);
    }
    for w in r.trace.windows(2) {
        assert!(w[1].lower_bound >= w[0].lower_bound - 1e-12);
        assert!(w[1].incumbent <= w[0].incumbent);
    }
}
