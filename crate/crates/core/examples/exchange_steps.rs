//! Closed-form coordinate-exchange steps against a golden-section search.

use nalgebra::{DMatrix, DVector};
use oed_core::cobnb::{exchange_step_a, exchange_step_d, golden_max, ExchangeStats};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let x = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
    let vj = DVector::from_vec(vec![1.0, -0.5, 0.3]);
    let vk = DVector::from_vec(vec![0.2, 0.8, -0.4]);
    let stats = ExchangeStats::from_vectors(&x, &vj, &vk)?;
    let (hj, hk) = (3.0, 2.0);

    let ta = exchange_step_a(&stats, hj, hk);
    let td = exchange_step_d(&stats, hj, hk);
    let ga = golden_max(|t| stats.a_gain(t), 0.0, hj.min(hk));
    let gd = golden_max(|t| stats.d_gain(t), 0.0, hj.min(hk));
    println!("A step {ta:.6} (gain {:.6}), golden {ga:.6} (gain {:.6})", stats.a_gain(ta), stats.a_gain(ga));
    println!("D step {td:.6} (gain {:.6}), golden {gd:.6} (gain {:.6})", stats.d_gain(td), stats.d_gain(gd));
    assert!(stats.a_gain(ta) >= stats.a_gain(ga) - 1e-9);
    assert!(stats.d_gain(td) >= stats.d_gain(gd) - 1e-9);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
