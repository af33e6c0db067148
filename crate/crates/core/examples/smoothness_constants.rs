//! Compare the fusion smoothness constants with sampled Hessian spectra.

use oed_core::criteria::{eig_bound, fusion_constants, trace_eig_bound};
use oed_core::criteria::{information, Objective};
use oed_core::instance::{generate, Correlation, Criterion, GeneratorSpec, Variant};
use oed_core::linalg::max_eigenvalue;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let inst = generate(&GeneratorSpec::new(12, 3, Variant::Fusion, Correlation::Independent, 4))?;
    let k = fusion_constants(&inst, 1.0)?;
    println!("L_f {:.3e}  L_g {:.3e}  L_k {:.3e}", k.l_f, k.l_g, k.l_k);

    let obj = Objective::with_criterion(&inst, Criterion::d_opt());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = 0.0f64;
    let mut worst_info = 0.0f64;
    for _ in 0..50 {
        // random point in the box, scaled down onto the budget
        let mut x: Vec<f64> = inst.upper.iter().map(|&u| rng.random::<f64>() * u as f64).collect();
        let s: f64 = x.iter().sum();
        if s > inst.budget as f64 {
            x.iter_mut().for_each(|v| *v *= inst.budget as f64 / s);
        }
        worst = worst.max(max_eigenvalue(&obj.hessian(&x)?));
        worst_info = worst_info.max(max_eigenvalue(&(information(&inst, &x)? - inst.fusion.clone().unwrap())));
    }
    println!("largest sampled Hessian eigenvalue {worst:.3e} <= {:.3e}", k.l_f);
    println!(
        "largest sampled lambda_max(A^T diag(x) A) {worst_info:.3e}; row bound {:.3e}, trace bound {:.3e}",
        eig_bound(&inst),
        trace_eig_bound(&inst)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
