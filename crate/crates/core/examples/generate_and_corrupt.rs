//! Samples a heavy-tailed dataset, plants leverage points, and writes the
//! CSV and truth sidecar to a temporary directory.
//!
//! `cargo run --example generate_and_corrupt -- [n] [eta] [seed]`

use robreg::adversary::{corrupt, AdversaryKind, AdversarySpec};
use robreg::datagen::{generate, GenerativeSpec};
use robreg::linalg::norm;

fn main() -> robreg::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(1000, |a| a.parse().expect("n"));
    let eta: f64 = args.next().map_or(0.05, |a| a.parse().expect("eta"));
    let seed: u64 = args.next().map_or(7, |a| a.parse().expect("seed"));

    let spec = GenerativeSpec::student_t(vec![1.0, -2.0, 0.5], 1.0, 5.0);
    let clean = generate(&spec, n, seed)?;
    let data = corrupt(&clean, &AdversarySpec::new(AdversaryKind::LeveragePoint, eta, 50.0), seed + 1)?;
    let truth = data.truth.as_ref().expect("generated data carries truth");

    let bad = &truth.corrupted_indices;
    println!("{} samples, {} replaced (eta = {eta})", data.len(), bad.len());
    let mean_norm = |idx: &mut dyn Iterator<Item = usize>| {
        let v: Vec<f64> = idx.map(|i| norm(data.x(i))).collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    };
    let clean_idx = (0..data.len()).filter(|i| bad.binary_search(i).is_err());
    println!("mean |x| clean {:.2}, planted {:.2}", mean_norm(&mut clean_idx.into_iter()), mean_norm(&mut bad.iter().copied()));

    let dir = std::env::temp_dir().join(format!("robreg-example-{seed}"));
    std::fs::create_dir_all(&dir)?;
    data.save_csv(dir.join("data.csv"))?;
    truth.save_json(dir.join("truth.json"))?;
    println!("wrote {}", dir.display());
    Ok(())
}
