//! Two-stage fit on Gaussian data under a mean-shift adversary: the
//! correction step should cut the stage-1 error roughly from `√η` to `η`.
//!
//! `cargo run --release --example subgaussian_refinement -- [eta] [seed] [magnitude] [inspect]`

use robreg::adversary::{corrupt, AdversaryKind, AdversarySpec};
use robreg::datagen::{generate, GenerativeSpec};
use robreg::subgauss::{fit_sg, SgConfig};

fn main() -> robreg::Result<()> {
    let mut args = std::env::args().skip(1);
    let eta: f64 = args.next().map_or(0.05, |a| a.parse().expect("eta"));
    let seed: u64 = args.next().map_or(1, |a| a.parse().expect("seed"));
    let magnitude: f64 = args.next().map_or(3.0, |a| a.parse().expect("magnitude"));
    let inspecting = args.next().is_some_and(|a| a == "inspect");
    let d = 10;
    let n = (4 * (d as f64 / (eta * eta)).ceil() as usize).min(100_000);
    let w_star = vec![1.0; d];

    let clean = generate(&GenerativeSpec::gaussian_identity(w_star, 1.0), n, seed)?;
    let mut adv = AdversarySpec::new(AdversaryKind::MeanShift, eta, magnitude);
    adv.inspecting = inspecting;
    let data = corrupt(&clean, &adv, seed.wrapping_add(1))?;

    let rep = fit_sg(&data, &SgConfig::new(eta).with_sigma(1.0).with_seed(seed))?;
    let ext = rep.sg.as_ref().expect("two-stage report");
    println!("n = {n}, d = {d}, eta = {eta}, n1 = {}, survivors = {}", ext.n1, ext.survivors);
    println!("stage-1 error {:.4}", ext.stage1_error.unwrap_or(f64::NAN));
    println!("final error   {:.4}", rep.error_vs_truth.unwrap_or(f64::NAN));
    println!("correction    {:.4}  ({:.2}s)", ext.correction_norm, rep.seconds);
    Ok(())
}
