// Every example must run to completion.

#[path = "../examples/branch_and_bound.rs"]
#[allow(dead_code)]
mod branch_and_bound;

#[test]
fn branch_and_bound_runs() {
    branch_and_bound::run_example().expect("branch_and_bound");
}

#[path = "../examples/brute_force_oracle.rs"]
#[allow(dead_code)]
mod brute_force_oracle;

#[test]
fn brute_force_oracle_runs() {
    brute_force_oracle::run_example().expect("brute_force_oracle");
}

#[path = "../examples/cli_bench.rs"]
#[allow(dead_code)]
mod cli_bench;

#[test]
fn cli_bench_runs() {
    cli_bench::run_example().expect("cli_bench");
}

#[path = "../examples/compare_solvers.rs"]
#[allow(dead_code)]
mod compare_solvers;

#[test]
fn compare_solvers_runs() {
    compare_solvers::run_example().expect("compare_solvers");
}

#[path = "../examples/evaluate_criteria.rs"]
#[allow(dead_code)]
mod evaluate_criteria;

#[test]
fn evaluate_criteria_runs() {
    evaluate_criteria::run_example().expect("evaluate_criteria");
}

#[path = "../examples/exchange_steps.rs"]
#[allow(dead_code)]
mod exchange_steps;

#[test]
fn exchange_steps_runs() {
    exchange_steps::run_example().expect("exchange_steps");
}

#[path = "../examples/generate_instance.rs"]
#[allow(dead_code)]
mod generate_instance;

#[test]
fn generate_instance_runs() {
    generate_instance::run_example().expect("generate_instance");
}

#[path = "../examples/greedy_lmo.rs"]
#[allow(dead_code)]
mod greedy_lmo;

#[test]
fn greedy_lmo_runs() {
    greedy_lmo::run_example().expect("greedy_lmo");
}

#[path = "../examples/root_relaxation.rs"]
#[allow(dead_code)]
mod root_relaxation;

#[test]
fn root_relaxation_runs() {
    root_relaxation::run_example().expect("root_relaxation");
}

#[path = "../examples/smoothness_constants.rs"]
#[allow(dead_code)]
mod smoothness_constants;

#[test]
fn smoothness_constants_runs() {
    smoothness_constants::run_example().expect("smoothness_constants");
}
