//! Solve the continuous relaxation with BPCG and print the gap trace.

use oed_core::bnb::start_point;
use oed_core::criteria::Objective;
use oed_core::frankwolfe::{bpcg, ActiveSet, BpcgOptions, TracePoint};
use oed_core::instance::{generate, Correlation, GeneratorSpec, Variant};
use oed_core::lmo::BoundBox;
use oed_core::verify::slope_fit;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let inst = generate(&GeneratorSpec::new(40, 10, Variant::Fusion, Correlation::Independent, 1))?;
    let obj = Objective::new(&inst);
    let bbox = BoundBox::from_instance(&inst);
    let x0 = start_point(&inst, 1)?;

    let mut rows = Vec::new();
    let mut sink = |p: TracePoint| rows.push(p);
    let opts = BpcgOptions {
        gap_tol: 1e-10,
        trace: Some(&mut sink),
        ..Default::default()
    };
    let (status, active) = bpcg(&obj, &bbox, ActiveSet::singleton(x0), opts)?;

    for r in rows.iter().step_by(50) {
        println!("{:>5} {:>14.8} {:.3e}", r.iteration, r.primal, r.dual_gap);
    }
    println!(
        "{:?} after {} iterations, lower bound {:.8}, {} vertices",
        status.reason,
        status.iterations,
        status.lower_bound(),
        active.len()
    );
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.iteration as f64, r.dual_gap)).collect();
    println!("log-gap slope {:.3e}", slope_fit(&pts)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
