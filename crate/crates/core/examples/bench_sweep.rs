//! Small scaling sweep through the same code path as `robreg bench`:
//! heavy-tailed and OLS fits over three corruption levels, then the
//! median errors and the fitted log-log slope.
//!
//! `cargo run --release --example bench_sweep -- [reps]`

use clap::Parser;
use robreg::cli::{run_bench, write_bench_csv, Cli, Command};

fn main() -> robreg::Result<()> {
    let reps = std::env::args().nth(1).unwrap_or_else(|| "3".into());
    let cli = Cli::parse_from([
        "robreg", "bench", "--algo", "ht,ols", "--eta", "0.02,0.05,0.1", "--n", "4000", "--d", "5",
        "--family", "student-t", "--adversary", "leverage-point", "--magnitude", "50", "--sigma-hint", "1",
        "--reps", &reps,
    ]);
    let Command::Bench(args) = cli.command else { unreachable!() };
    let (rows, summary) = run_bench(&args)?;
    write_bench_csv(&rows, std::io::stdout().lock())?;
    for g in &summary.groups {
        println!("{:?} eta {:<5} median error {:.4}", g.algo, g.eta, g.median_error.unwrap_or(f64::NAN));
    }
    for s in &summary.error_slopes {
        println!("{:?}: slope of error against eta {:.2}", s.algo, s.slope);
    }
    Ok(())
}
