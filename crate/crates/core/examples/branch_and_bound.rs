//! Solve a small D-optimal design exactly with branch-and-bound.

use oed_core::bnb::{solve, BnbParams};
use oed_core::instance::{generate, Correlation, GeneratorSpec, Variant};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let inst = generate(&GeneratorSpec::new(16, 4, Variant::Optimal, Correlation::Correlated, 2))?;
    let params = BnbParams {
        workers: 2,
        ..Default::default()
    };
    let report = solve(&inst, &params)?;
    println!("status {} after {} nodes in {:.3}s", report.status, report.nodes, report.wall_time);
    println!("objective {:.8}  lower bound {:.8}", report.objective, report.lower_bound);
    println!("design {:?}", report.incumbent);
    for imp in &report.improvements {
        println!("  node {:>4}: {:.8}", imp.node_id, imp.objective);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
