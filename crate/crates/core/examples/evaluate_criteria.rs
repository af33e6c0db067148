//! Evaluate every criterion at a feasible integer start point.

use oed_core::bnb::start_point;
use oed_core::criteria::{domain_feasible, information, Objective};
use oed_core::instance::{generate, Correlation, Criterion, GeneratorSpec, Variant};
use oed_core::linalg::Spectral;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let inst = generate(&GeneratorSpec::new(15, 4, Variant::Optimal, Correlation::Independent, 3))?;
    let x: Vec<f64> = start_point(&inst, 1)?.into_iter().map(|v| v as f64).collect();
    assert!(domain_feasible(&inst, &x));

    let spectrum = Spectral::new(&information(&inst, &x)?);
    println!("eigenvalues of X(x) in [{:.4}, {:.4}]", spectrum.min(), spectrum.max());

    let criteria = [
        ("D", Criterion::d_opt()),
        ("A", Criterion::a_opt()),
        ("logA", Criterion::log_a_opt()),
        ("GTI p=2", Criterion::gti(2.0)?),
        ("logGTI p=0.5", Criterion::log_gti(0.5)?),
    ];
    for (name, criterion) in criteria {
        let obj = Objective::with_criterion(&inst, criterion);
        let (value, grad) = obj.value_and_gradient(&x)?;
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        println!("{name:>13}: f = {value:>12.6}  |grad| = {norm:.4e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
