//! Generate a random instance, validate it and round-trip it through JSON.

use oed_core::instance::{generate, Correlation, GeneratorSpec, Instance, Variant};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GeneratorSpec::new(20, 5, Variant::Fusion, Correlation::Correlated, 7);
    let inst = generate(&spec)?;
    inst.ensure_valid()?;
    println!(
        "m={} n={} budget={} fusion={} upper={:?}",
        inst.m,
        inst.n,
        inst.budget,
        inst.is_fusion(),
        inst.upper
    );

    let back = Instance::from_json(&inst.to_json())?;
    assert_eq!(back, inst);
    println!("json round-trip ok ({} bytes)", inst.to_json().len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
