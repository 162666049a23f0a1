//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Run with `cargo test --release --test
//! acceptance`; the statistical criteria take several minutes on one core.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use robreg::adversary::{corrupt, AdversaryKind, AdversarySpec};
use robreg::cli::log_log_slope;
use robreg::datagen::{generate, random_unit, GenerativeSpec};
use robreg::dataset::Dataset;
use robreg::gradest::estimate_gradient;
use robreg::linalg::{dist, median, sub};
use robreg::lower_bound::{lower_bound_pair_cond, lower_bound_pair_ht, lower_bound_pair_sg};
use robreg::oracle::{brute_mt, decompose, jacobi_top, project_capped_simplex, tv_distance};
use robreg::packsdp::{l_star, pack_to_mt, solve_mt, solve_pack, PackInstance};
use robreg::regress::{fit_ht_monitored, fit_ols, FitReport, HtConfig, SimulationMonitor};
use robreg::rng::{derive_seed, stream};
use robreg::spectral::{lambda_max, ORACLE_TOL};
use robreg::subgauss::{fit_sg, SgConfig};
use robreg::weights::{cap, is_in_capped_simplex, VectorSet};

struct Line {
    id: usize,
    pass: bool,
    detail: String,
}

fn line(id: usize, pass: bool, detail: impl Into<String>) -> Line {
    let l = Line {
        id,
        pass,
        detail: detail.into(),
    };
    eprintln!("  finished criterion {id}");
    l
}

/// Descent-inequality checks accumulated over every fit in the suite.
#[derive(Default)]
struct DescentLog {
    fits: usize,
    steps: usize,
    violations: Vec<String>,
}

impl DescentLog {
    fn check(&mut self, label: &str, rep: &FitReport, monitor: &SimulationMonitor, step: f64) {
        self.fits += 1;
        self.steps += rep.trace.iter().filter(|r| r.grad_error.is_some()).count();
        if rep.trace.iter().take(rep.trace.len().saturating_sub(1)).any(|r| r.grad_error.is_none()) {
            self.violations.push(format!("{label}: missing gradient error"));
        }
        if let Err(t) = monitor.check_descent(&rep.trace, step) {
            self.violations.push(format!("{label}: step {t}"));
        }
    }
}

fn gauss(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn med(v: &[f64]) -> f64 {
    median(v).unwrap_or(f64::NAN)
}

fn dense_lambda_max(zs: &VectorSet, s: &[f64]) -> f64 {
    let d = zs.dim();
    let mut m = vec![0.0; d * d];
    for (z, w) in zs.iter().zip(s) {
        for a in 0..d {
            for b in 0..d {
                m[a * d + b] += w * z[a] * z[b];
            }
        }
    }
    jacobi_top(m, d).0
}

struct Instance {
    zs: VectorSet,
    delta: f64,
}

fn sdp_instances() -> Vec<Instance> {
    let deltas = [0.1, 0.2, 1.0 / 3.0];
    (0..100)
        .map(|i| {
            let mut rng = stream(derive_seed(2024, i as u64));
            let n = rng.random_range(3..=8);
            let d = rng.random_range(1..=3);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let scale = if rng.random::<f64>() < 0.25 { 8.0 } else { 1.0 };
                    (0..d).map(|_| scale * gauss(&mut rng)).collect::<Vec<f64>>()
                })
                .collect();
            Instance {
                zs: VectorSet::from_rows(&rows).unwrap(),
                delta: deltas[i % 3],
            }
        })
        .collect()
}

fn criteria_1_to_3(out: &mut Vec<Line>) {
    let insts = sdp_instances();
    let brute: Vec<f64> = insts.iter().map(|c| brute_mt(&c.zs, c.delta).unwrap()).collect();

    // 1: approximation factor and membership
    let mut solve_secs = 0.0;
    let mut worst = f64::NEG_INFINITY;
    let mut bad = Vec::new();
    for (i, (c, &opt)) in insts.iter().zip(&brute).enumerate() {
        let t = Instant::now();
        let sol = solve_mt(&c.zs, c.delta, i as u64).unwrap();
        solve_secs += t.elapsed().as_secs_f64();
        let member = sol.weights.is_member() && (sol.weights.delta() - 2.0 * c.delta).abs() < 1e-15;
        let value = dense_lambda_max(&c.zs, sol.weights.as_slice()).max(sol.achieved);
        let bound = (1.0 + c.delta) * opt + 1e-3;
        worst = worst.max(value - bound);
        if !member || value > bound {
            bad.push(i);
        }
    }
    out.push(line(
        1,
        bad.is_empty() && solve_secs < 5.0,
        format!(
            "{} of 100 instances within (1+delta) OPT + 1e-3 and in Delta_2delta; worst margin {worst:+.2e}; solver time {solve_secs:.2}s (< 5s)",
            100 - bad.len()
        ),
    ));

    // 2: bracket and monotonicity on a 10-point grid
    let mut bracket_bad = 0;
    let mut mono_bad = 0;
    let mut grids = Vec::new();
    for (i, (c, &opt)) in insts.iter().zip(&brute).enumerate() {
        let ls = l_star(&c.zs, c.delta).unwrap();
        let d = c.zs.dim() as f64;
        if !(opt <= ls * (1.0 + 1e-12) && ls <= d * opt * (1.0 + 1e-9)) {
            bracket_bad += 1;
        }
        let lo = 0.5 * ls / d;
        let grid: Vec<f64> = (0..10).map(|k| lo * (ls / lo).powf(k as f64 / 9.0)).collect();
        let mut best = 0.0f64;
        let mut sols = Vec::new();
        for &lam in &grid {
            let inst = PackInstance::new(&c.zs, c.delta, lam).unwrap();
            let p = solve_pack(&inst, i as u64).unwrap();
            if p.objective < (1.0 - c.delta / 10.0) * best - 1e-12 {
                mono_bad += 1;
            }
            best = best.max(p.objective);
            sols.push((lam, p));
        }
        grids.push(sols);
    }
    out.push(line(
        2,
        bracket_bad == 0 && mono_bad == 0,
        format!(
            "bracket brute <= l* <= d brute violated on {bracket_bad} of 100; objective drops beyond (1-delta/10) on {mono_bad} of 1000 grid points"
        ),
    ));

    // 3: conversion back to the simplex
    let mut converted = 0;
    let mut conv_bad = 0;
    for (c, sols) in insts.iter().zip(&grids) {
        for (lam, p) in sols {
            if p.objective < 1.0 - c.delta / 10.0 {
                continue;
            }
            converted += 1;
            let s = pack_to_mt(&p.weights, c.delta, *lam).unwrap();
            let ok_member = is_in_capped_simplex(s.as_slice(), 2.0 * c.delta) && s.is_member();
            let value = dense_lambda_max(&c.zs, s.as_slice());
            if !ok_member || value > (1.0 + c.delta / 2.0) * lam * (1.0 + 1e-3) {
                conv_bad += 1;
            }
        }
    }
    out.push(line(
        3,
        conv_bad == 0 && converted > 0,
        format!("{converted} accepted packing points converted; {conv_bad} failed membership or the (1+delta/2) lambda bound"),
    ));
}

fn alternating(d: usize) -> Vec<f64> {
    (0..d).map(|j| if j % 2 == 0 { 1.0 } else { -0.5 }).collect()
}

fn identity_monitor(w_star: &[f64]) -> SimulationMonitor {
    SimulationMonitor {
        w_star: w_star.to_vec(),
        sigma_diag: vec![1.0; w_star.len()],
    }
}

fn criterion_4(out: &mut Vec<Line>, log: &mut DescentLog) {
    let d = 10;
    let w_star = alternating(d);
    let spec = GenerativeSpec::student_t(w_star.clone(), 1.0, 5.0);
    let monitor = identity_monitor(&w_star);
    let etas = [0.01, 0.04, 0.09];
    let mut medians = Vec::new();
    let mut wins = 0;
    let mut runs = 0;
    let mut slowest = 0.0f64;
    let mut bounds_ok = true;
    let mut per_eta = Vec::new();
    for &eta in &etas {
        let n = (20.0 * d as f64 * (d as f64).ln() / eta).ceil() as usize;
        let mut errs = Vec::new();
        for seed in 0..20u64 {
            let clean = generate(&spec, n, seed).unwrap();
            let adv = AdversarySpec::new(AdversaryKind::LeveragePoint, eta, 100.0);
            let data = corrupt(&clean, &adv, derive_seed(seed, 100)).unwrap();
            let cfg = HtConfig::new(eta).with_sigma(1.0).with_kappa(1.0).with_seed(seed);
            let rep = fit_ht_monitored(&data, &cfg, Some(&monitor)).unwrap();
            log.check(&format!("ht eta {eta} seed {seed}"), &rep, &monitor, cfg.step);
            let ols = fit_ols(&data).unwrap();
            let e = rep.error_vs_truth.unwrap();
            runs += 1;
            if e < ols.error_vs_truth.unwrap() {
                wins += 1;
            }
            slowest = slowest.max(rep.seconds);
            errs.push(e);
        }
        let m = med(&errs);
        bounds_ok &= m <= 5.0 * eta.sqrt();
        per_eta.push(format!("{eta}: {m:.4} (<= {:.3})", 5.0 * eta.sqrt()));
        medians.push((eta, m));
    }
    let slope = log_log_slope(&medians).unwrap_or(f64::NAN);
    let win_rate = wins as f64 / runs as f64;
    out.push(line(
        4,
        bounds_ok && (0.3..=0.7).contains(&slope) && win_rate >= 0.9 && slowest < 60.0,
        format!(
            "median errors {}; slope {slope:.3} in [0.3, 0.7]; ht beats OLS in {:.0}%; slowest fit {slowest:.1}s",
            per_eta.join(", "),
            100.0 * win_rate
        ),
    ));
}

fn criterion_5(out: &mut Vec<Line>, log: &mut DescentLog) {
    let d = 10;
    let w_star = vec![1.0; d];
    let spec = GenerativeSpec::gaussian_identity(w_star.clone(), 1.0);
    let monitor = identity_monitor(&w_star);
    let mut finals = Vec::new();
    let mut ratio = f64::NAN;
    let mut slowest = 0.0f64;
    for &eta in &[0.02, 0.05, 0.10] {
        let n = (4 * (d as f64 / (eta * eta)).ceil() as usize).min(100_000);
        let mut stage1 = Vec::new();
        let mut fin = Vec::new();
        for seed in 0..20u64 {
            let clean = generate(&spec, n, seed).unwrap();
            let adv = AdversarySpec::new(AdversaryKind::MeanShift, eta, 10.0);
            let data = corrupt(&clean, &adv, derive_seed(seed, 100)).unwrap();
            let mut cfg = SgConfig::new(eta).with_sigma(1.0).with_seed(seed);
            cfg.monitor = Some(monitor.clone());
            let rep = fit_sg(&data, &cfg).unwrap();
            log.check(&format!("sg stage 1 eta {eta} seed {seed}"), &rep, &monitor, cfg.ht.step);
            slowest = slowest.max(rep.seconds);
            stage1.push(rep.sg.as_ref().unwrap().stage1_error.unwrap());
            fin.push(rep.error_vs_truth.unwrap());
        }
        if eta == 0.05 {
            ratio = med(&fin) / med(&stage1);
        }
        finals.push((eta, med(&fin)));
    }
    let slope = log_log_slope(&finals).unwrap_or(f64::NAN);
    let listing: Vec<String> = finals.iter().map(|(e, m)| format!("{e}: {m:.4}")).collect();
    out.push(line(
        5,
        ratio <= 0.5 && (0.7..=1.3).contains(&slope) && slowest < 120.0,
        format!(
            "final/stage-1 median ratio at eta 0.05 {ratio:.3} (<= 0.5); final medians {}; slope {slope:.3} in [0.7, 1.3]; slowest fit {slowest:.1}s",
            listing.join(", ")
        ),
    ));
}

fn criterion_6(out: &mut Vec<Line>, log: &mut DescentLog) {
    let d = 10;
    let w_star = alternating(d);
    let spec = GenerativeSpec::gaussian_identity(w_star.clone(), 1.0);
    let monitor = identity_monitor(&w_star);
    let (mut ht, mut ols) = (Vec::new(), Vec::new());
    for seed in 0..20u64 {
        let clean = generate(&spec, 5000, seed).unwrap();
        let data = corrupt(&clean, &AdversarySpec::idle(), seed).unwrap();
        let cfg = HtConfig::new(0.02).with_sigma(1.0).with_seed(seed);
        let rep = fit_ht_monitored(&data, &cfg, Some(&monitor)).unwrap();
        log.check(&format!("clean seed {seed}"), &rep, &monitor, cfg.step);
        ht.push(rep.error_vs_truth.unwrap());
        ols.push(fit_ols(&data).unwrap().error_vs_truth.unwrap());
    }
    let (a, b) = (med(&ht), med(&ols));
    out.push(line(6, a <= 2.0 * b, format!("median ht error {a:.4} vs OLS {b:.4} (ratio {:.2} <= 2)", a / b)));
}

fn criterion_7(out: &mut Vec<Line>, log: &mut DescentLog) {
    let d = 10;
    let eta = 0.04;
    let w_star = alternating(d);
    let spec = GenerativeSpec::gaussian_identity(w_star.clone(), 1.0);
    let monitor = identity_monitor(&w_star);
    let w_norm = robreg::linalg::norm(&w_star);
    let mut medians = Vec::new();
    for n in [10_000usize, 20_000] {
        let mut secs = Vec::new();
        for seed in 0..5u64 {
            let clean = generate(&spec, n, seed).unwrap();
            let adv = AdversarySpec::new(AdversaryKind::LeveragePoint, eta, 100.0);
            let data = corrupt(&clean, &adv, derive_seed(seed, 100)).unwrap();
            let cfg = HtConfig::new(eta).with_sigma(1.0).with_w_norm(w_norm).with_seed(seed);
            let t = Instant::now();
            let rep = fit_ht_monitored(&data, &cfg, Some(&monitor)).unwrap();
            secs.push(t.elapsed().as_secs_f64());
            log.check(&format!("timing n {n} seed {seed}"), &rep, &monitor, cfg.step);
        }
        medians.push(med(&secs));
    }
    let ratio = medians[1] / medians[0];
    out.push(line(
        7,
        ratio <= 2.5,
        format!("median fit time {:.3}s at n = 10000, {:.3}s at n = 20000; ratio {ratio:.2} (<= 2.5)", medians[0], medians[1]),
    ));
}

fn criterion_8(out: &mut Vec<Line>) {
    let mut checked = 0;
    let mut bad = Vec::new();
    let sigma = 1.0;
    for &eta in &[0.01, 0.04, 0.1] {
        let pairs = [
            ("ht", lower_bound_pair_ht(sigma, eta).unwrap()),
            ("sg", lower_bound_pair_sg(sigma, eta).unwrap()),
            ("cond", lower_bound_pair_cond(sigma, eta, 9.0, 3).unwrap()),
        ];
        for (name, p) in pairs {
            checked += 1;
            let mean_ok = p.d2.noise_mean().abs() <= 1e-9;
            let var_ok = p.d2.noise_variance() <= sigma * sigma + 1e-9;
            let tv_ok = p.tv <= eta / 2.0 + 1e-12;
            if !(mean_ok && var_ok && tv_ok) {
                bad.push(format!("{name}@{eta}"));
            }
        }
    }
    out.push(line(
        8,
        bad.is_empty(),
        format!("{checked} pairs checked for zero noise mean, variance <= sigma^2 and TV <= eta/2; failures {bad:?}"),
    ));
}

fn random_capped(rng: &mut impl Rng, n: usize, delta: f64) -> Vec<f64> {
    let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(3)).collect();
    let total: f64 = y.iter().sum();
    let y: Vec<f64> = y.iter().map(|v| v / total).collect();
    project_capped_simplex(&y, cap(delta, n))
}

fn criterion_9(out: &mut Vec<Line>, log: &DescentLog) {
    let mut rng = stream(909);

    let mut tv_bad = 0;
    for _ in 0..1000 {
        let n = rng.random_range(5..60);
        let d1 = rng.random_range(0.01..0.5);
        let d2 = rng.random_range(0.01..0.5);
        let a = random_capped(&mut rng, n, d1);
        let b = random_capped(&mut rng, n, d2);
        let inside = is_in_capped_simplex(&a, d1) && is_in_capped_simplex(&b, d2);
        if !inside || tv_distance(&a, &b).unwrap() > d1 + d2 + 1e-12 {
            tv_bad += 1;
        }
    }

    let mut dec_bad = 0;
    let mut dec_worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(3..40);
        let k = rng.random_range(1..n);
        let delta = k as f64 / n as f64;
        let s = robreg::weights::SimplexWeights::new(random_capped(&mut rng, n, delta), delta).unwrap();
        match decompose(&s) {
            Ok(dec) => {
                let err = dec.reconstruct().iter().zip(s.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                dec_worst = dec_worst.max(err);
                if err > 1e-9 || (dec.coefficient_sum() - 1.0).abs() > 1e-9 {
                    dec_bad += 1;
                }
            }
            Err(_) => dec_bad += 1,
        }
    }

    let mut eig_bad = 0;
    let mut eig_worst = 0.0f64;
    for i in 0..500u64 {
        let n = rng.random_range(2..200);
        let d = rng.random_range(1..=8);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| gauss(&mut rng)).collect::<Vec<f64>>())
            .collect();
        let zs = VectorSet::from_rows(&rows).unwrap();
        let s: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let fast = lambda_max(&zs, &s, ORACLE_TOL, i).unwrap().lambda;
        let exact = dense_lambda_max(&zs, &s);
        let rel = (fast - exact).abs() / exact.abs().max(1e-300);
        eig_worst = eig_worst.max(rel);
        if rel > 1e-6 {
            eig_bad += 1;
        }
    }

    let pass = tv_bad == 0 && dec_bad == 0 && eig_bad == 0 && log.violations.is_empty() && log.fits > 0;
    out.push(line(
        9,
        pass,
        format!(
            "tv bound failures {tv_bad}/1000; decompose failures {dec_bad}/1000 (worst {dec_worst:.1e}); eigenvalue failures {eig_bad}/500 (worst rel {eig_worst:.1e}); descent inequality violated {} times over {} steps of {} fits",
            log.violations.len(),
            log.steps,
            log.fits
        ),
    ));
}

fn criterion_10(out: &mut Vec<Line>) {
    let d = 10;
    let eta = 0.05;
    let mut errs = Vec::new();
    for seed in 0..20u64 {
        let w_star = alternating(d);
        let clean: Dataset = generate(&GenerativeSpec::gaussian_identity(w_star.clone(), 1.0), 20_000, seed).unwrap();
        let adv = AdversarySpec::new(AdversaryKind::LeveragePoint, eta, 100.0);
        let data = corrupt(&clean, &adv, derive_seed(seed, 100)).unwrap();
        let u = random_unit(d, &mut stream(derive_seed(seed, 200)));
        let w: Vec<f64> = w_star.iter().zip(&u).map(|(a, b)| a + b).collect();
        let est = estimate_gradient(&data, &w, eta, seed).unwrap();
        errs.push(dist(&est.g_hat, &sub(&w, &w_star)));
    }
    let m = med(&errs);
    out.push(line(10, m <= 0.5, format!("median gradient error {m:.4} (<= 0.5) over 20 seeds")));
}

fn main() {
    let start = Instant::now();
    let mut out = Vec::new();
    let mut log = DescentLog::default();
    criteria_1_to_3(&mut out);
    criterion_8(&mut out);
    criterion_10(&mut out);
    criterion_6(&mut out, &mut log);
    criterion_7(&mut out, &mut log);
    criterion_4(&mut out, &mut log);
    criterion_5(&mut out, &mut log);
    criterion_9(&mut out, &log);
    out.sort_by_key(|l| l.id);

    println!();
    for l in &out {
        println!("criterion {:>2}: {}  {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.detail);
    }
    for v in log.violations.iter().take(10) {
        println!("  descent violation: {v}");
    }
    let failed = out.iter().filter(|l| !l.pass).count();
    println!("{} of {} criteria passed in {:.0}s", out.len() - failed, out.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
