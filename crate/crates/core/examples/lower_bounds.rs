//! Prints the three indistinguishable pairs at a few corruption levels: the
//! TV distance stays under η/2 while the parameters stay a gap apart.

use robreg::lower_bound::{lower_bound_pair_cond, lower_bound_pair_ht, lower_bound_pair_sg};

fn main() -> robreg::Result<()> {
    println!("{:>5} {:>6} {:>8} {:>10} {:>10}", "case", "eta", "tv", "gap", "var(eps2)");
    for eta in [0.01, 0.04, 0.1] {
        let pairs = [
            ("ht", lower_bound_pair_ht(1.0, eta)?),
            ("sg", lower_bound_pair_sg(1.0, eta)?),
            ("cond", lower_bound_pair_cond(1.0, eta, 16.0, 3)?),
        ];
        for (name, p) in pairs {
            println!("{name:>5} {eta:>6} {:>8.4} {:>10.6} {:>10.6}", p.tv, p.gap, p.d2.noise_variance());
        }
    }
    Ok(())
}
