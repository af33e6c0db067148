//! Check the tree search against full enumeration on a tiny instance.

use oed_core::bnb::{solve, BnbParams};
use oed_core::instance::{Criterion, Variant};
use oed_core::verify::{brute_force, tiny_instance};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let inst = tiny_instance(11, Variant::Fusion, Criterion::log_a_opt());
    let oracle = brute_force(&inst)?;
    println!(
        "enumerated {} points ({} feasible): x* = {:?}, f* = {:.10}",
        oracle.points, oracle.feasible, oracle.x, oracle.value
    );
    let report = solve(&inst, &BnbParams::exact())?;
    println!("tree search: {:?}, f = {:.10}", report.incumbent, report.objective);
    assert!((report.objective - oracle.value).abs() <= 1e-6);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
