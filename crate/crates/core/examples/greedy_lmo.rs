//! Linear minimization and rounding over the budgeted integer box.

use oed_core::lmo::BoundBox;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let bbox = BoundBox::new(vec![0, 1, 0, 0], vec![3, 2, 2, 4], 6)?;
    let d = [-1.0, 0.5, -3.0, -2.0];
    let v = bbox.lmo(&d)?;
    println!("lmo({d:?}) = {v:?}");

    // the vertex must beat every lattice point in the box
    let best = bbox
        .enumerate(10_000)?
        .map(|p| p.iter().zip(&d).map(|(&pi, di)| pi as f64 * di).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let value: f64 = v.iter().zip(&d).map(|(&vi, di)| vi as f64 * di).sum();
    assert!((value - best).abs() < 1e-12);

    let w = [1.4, 1.6, 0.5, 2.5];
    println!("round({w:?}) = {:?}", bbox.round(&w)?);
    println!("points in box: {:?}", bbox.count_points(10_000));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
