//! Compares the Lanczos top eigenvalue with a dense Jacobi solve, and the
//! fast (MT) solver with the brute-force reference on a tiny instance.
//!
//! `cargo run --release --example spectral_oracle -- [seed]`

use rand::Rng;
use robreg::oracle::{brute_mt_with, decompose, jacobi_top, BruteOptions};
use robreg::packsdp::solve_mt;
use robreg::rng::stream;
use robreg::spectral::{lambda_max, ORACLE_TOL};
use robreg::weights::VectorSet;

fn main() -> robreg::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(11, |a| a.parse().expect("seed"));
    let mut rng = stream(seed);

    let (n, d) = (500, 6);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let zs = VectorSet::from_rows(&rows)?;
    let s: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let fast = lambda_max(&zs, &s, ORACLE_TOL, seed)?;
    let mut m = vec![0.0; d * d];
    for (z, w) in zs.iter().zip(&s) {
        for a in 0..d {
            for b in 0..d {
                m[a * d + b] += w * z[a] * z[b];
            }
        }
    }
    let (dense, _) = jacobi_top(m, d);
    println!("lanczos {:.10}  jacobi {dense:.10}  ({} products)", fast.lambda, fast.matvecs);

    let small: Vec<Vec<f64>> = (0..8).map(|_| (0..2).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let zs = VectorSet::from_rows(&small)?;
    let delta = 0.25;
    let opts = BruteOptions { iterations: 20_000, restarts: 6, seed, ..BruteOptions::default() };
    let brute = brute_mt_with(&zs, delta, &opts)?;
    let sol = solve_mt(&zs, delta, seed)?;
    println!("brute OPT {:.5}  solver {:.5}  bound (1+delta) OPT {:.5}", brute.value, sol.achieved, (1.0 + delta) * brute.value);

    let dec = decompose(&sol.weights)?;
    println!("solver weights decompose into {} uniform atoms (coefficients sum {:.6})", dec.atoms.len(), dec.coefficient_sum());
    Ok(())
}
