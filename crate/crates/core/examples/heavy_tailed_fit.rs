//! Heavy-tailed fit against leverage-point corruption, compared with OLS.
//!
//! `cargo run --release --example heavy_tailed_fit -- [eta] [seed]`

use robreg::adversary::{corrupt, AdversaryKind, AdversarySpec};
use robreg::datagen::{generate, GenerativeSpec};
use robreg::regress::{fit_ht, fit_ols, HtConfig};

fn main() -> robreg::Result<()> {
    let mut args = std::env::args().skip(1);
    let eta: f64 = args.next().map_or(0.04, |a| a.parse().expect("eta"));
    let seed: u64 = args.next().map_or(1, |a| a.parse().expect("seed"));
    let d = 10;
    let n = (20.0 * d as f64 * (d as f64).ln() / eta).ceil() as usize;
    let w_star: Vec<f64> = (0..d).map(|j| if j % 2 == 0 { 1.0 } else { -0.5 }).collect();

    let spec = GenerativeSpec::student_t(w_star.clone(), 1.0, 5.0);
    let clean = generate(&spec, n, seed)?;
    let adv = AdversarySpec::new(AdversaryKind::LeveragePoint, eta, 100.0);
    let data = corrupt(&clean, &adv, seed.wrapping_add(1))?;

    let cfg = HtConfig::new(eta).with_sigma(1.0).with_seed(seed);
    let ht = fit_ht(&data, &cfg)?;
    let ols = fit_ols(&data)?;
    println!("n = {n}, d = {d}, eta = {eta}");
    println!(
        "ht : error {:.4}  T = {}  restarts = {}  {:.2}s",
        ht.error_vs_truth.unwrap_or(f64::NAN),
        ht.t_used,
        ht.restarts,
        ht.seconds
    );
    println!("ols: error {:.4}", ols.error_vs_truth.unwrap_or(f64::NAN));
    println!("5 sqrt(eta) = {:.4}", 5.0 * eta.sqrt());
    Ok(())
}
