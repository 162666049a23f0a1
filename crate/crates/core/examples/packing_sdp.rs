//! Solves the capped-simplex eigenvalue program on a small point cloud with
//! a few far outliers, and shows the bisection, the packing solves at fixed
//! levels, and the conversion back to simplex weights.
//!
//! `cargo run --example packing_sdp -- [delta] [seed]`

use rand::Rng;
use robreg::packsdp::{l_star, pack_to_mt, solve_mt, solve_pack, PackInstance};
use robreg::rng::stream;
use robreg::spectral::{lambda_max, ORACLE_TOL};
use robreg::weights::VectorSet;

fn main() -> robreg::Result<()> {
    let mut args = std::env::args().skip(1);
    let delta: f64 = args.next().map_or(0.1, |a| a.parse().expect("delta"));
    let seed: u64 = args.next().map_or(3, |a| a.parse().expect("seed"));

    let (n, d) = (200, 4);
    let mut rng = stream(seed);
    let mut rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    for row in rows.iter_mut().take(n / 20) {
        row[0] = 30.0;
    }
    let zs = VectorSet::from_rows(&rows)?;

    let uniform = vec![1.0 / n as f64; n];
    let full = lambda_max(&zs, &uniform, ORACLE_TOL, seed)?.lambda;
    let ls = l_star(&zs, delta)?;
    println!("uniform weights: lambda_max {full:.3}; l* = {ls:.3}");

    let sol = solve_mt(&zs, delta, seed)?;
    println!("solve_mt: achieved {:.4} after {} bisection rounds", sol.achieved, sol.rounds);
    for r in &sol.trace {
        println!("  lambda {:8.4}  objective {:.4}  {}", r.lambda_m, r.objective, if r.accepted { "accept" } else { "reject" });
    }
    let planted: f64 = sol.weights.as_slice()[..n / 20].iter().sum();
    println!("weight left on the outliers: {planted:.4}");

    let lambda = 1.5 * sol.achieved;
    let pack = solve_pack(&PackInstance::new(&zs, delta, lambda)?, seed)?;
    println!("pack at lambda {lambda:.4}: objective {:.4}, lambda_max {:.4}", pack.objective, pack.lambda_max);
    if pack.objective >= 1.0 - delta / 10.0 {
        let s = pack_to_mt(&pack.weights, delta, lambda)?;
        let check = lambda_max(&zs, s.as_slice(), ORACLE_TOL, seed)?.lambda;
        println!("converted: member of Delta_2delta = {}, lambda_max {check:.4}", s.is_member());
    }
    Ok(())
}
