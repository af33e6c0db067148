//! Drive the command-line front end: generate two instances and benchmark them.

use oed_core::cli::{read_bench, run_from};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let inst_dir = dir.path().join("instances");
    std::fs::create_dir_all(&inst_dir)?;
    for seed in ["1", "2"] {
        let out = inst_dir.join(format!("s{seed}.json"));
        let code = run_from(["oed", "generate", "--m", "12", "--n", "3", "--seed", seed, "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
    }
    let csv = dir.path().join("bench.csv");
    let code = run_from([
        "oed",
        "bench",
        "--solver",
        "boscia,cobnb",
        "--out",
        csv.to_str().unwrap(),
        inst_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    for row in read_bench(&csv)? {
        println!(
            "{:>8} {:>7} {:>10} {:>8.4}s nodes {:>4}",
            row.instance, row.solver, row.status, row.time_s, row.nodes
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
