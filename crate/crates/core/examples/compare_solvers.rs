//! Run both tree solvers on the same A-optimal instance.

use oed_core::bnb::{self, BnbParams};
use oed_core::cobnb::cobnb_solve;
use oed_core::instance::{generate, Correlation, Criterion, GeneratorSpec, Variant};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let inst = generate(&GeneratorSpec::new(14, 3, Variant::Optimal, Correlation::Independent, 5))?
        .with_criterion(Criterion::a_opt());
    let params = BnbParams::default();
    let a = bnb::solve(&inst, &params)?;
    let b = cobnb_solve(&inst, &params)?;
    for r in [&a, &b] {
        println!(
            "{:>7}: {} obj {:.8} nodes {:>5} lmo {:>6} {:.3}s",
            r.solver, r.status, r.objective, r.nodes, r.lmo_calls, r.wall_time
        );
    }
    let tol = params.abs_tol + params.rel_tol * a.objective.abs();
    assert!((a.objective - b.objective).abs() <= 2.0 * tol);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
