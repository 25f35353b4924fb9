//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use bellsphere::analysis::{chsh_inequalities_hold, stochastic_sign_quoted_form};
use bellsphere::detectors::{measure_sequence, outcome_probabilities};
use bellsphere::oracles::{integrate_edge_singular, ring_mean_projection, sequence_tree_mean};
use bellsphere::*;

type Outcome = std::result::Result<String, String>;

const SEED: u64 = 20_240_917;
const MAXIMAL: [f64; 4] = [0.0, FRAC_PI_4, 2.0 * FRAC_PI_4, 3.0 * FRAC_PI_4];

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn mc(stream: u64) -> MonteCarlo {
    MonteCarlo::new(SEED).with_stream_base(stream << 40)
}

/// A zero standard error only passes on an exact match.
fn zscore(x: f64, expected: f64, se: f64) -> f64 {
    if se > 0.0 {
        (x - expected) / se
    } else if (x - expected).abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn grid(model: DetectorModel, expected: impl Fn(f64) -> f64, stream: u64) -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..7 {
        let d = i as f64 * PI / 6.0;
        let r = estimate_correlation(
            &model,
            &PairSource::StaticSphere,
            Axis::new(0.0),
            Axis::new(d),
            1_000_000,
            &mc(stream + i),
        )
        .map_err(|e| e.to_string())?;
        let z = zscore(r.e_hat, expected(d), r.std_err);
        ensure(z.abs() <= 5.0, format!("Δ = {d:.4}: e_hat {} vs {} (z = {z:.2})", r.e_hat, expected(d)))?;
        worst = worst.max(z.abs());
    }
    Ok(format!("max |z| = {worst:.2}"))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let msg = grid(DetectorModel::Direct, |d| -d.cos() / 3.0, 10)?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, format!("took {secs:.2} s"))?;
    Ok(format!("{msg}, {secs:.2} s"))
}

fn criterion_2() -> Outcome {
    let msg = grid(DetectorModel::Sign, |d| -0.25 + d / (2.0 * PI), 20)?;
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let d = i as f64 * PI / 99.0;
        let s: f64 = [(0.5, 0.5), (0.5, -0.5), (-0.5, 0.5), (-0.5, -0.5)]
            .iter()
            .map(|&(k, kp)| lune_probability(k, kp, d))
            .sum();
        worst = worst.max((s - 1.0).abs());
    }
    ensure(worst <= 1e-12, format!("lune sum off by {worst:e}"))?;
    Ok(format!("{msg}; lune sums within {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let msg = grid(DetectorModel::EnsembleDep, |d| -0.25 * d.cos(), 30)?;
    let closed = chsh(&DetectorModel::EnsembleDep, MAXIMAL, &ChshMode::Closed).map_err(|e| e.to_string())?;
    ensure((closed.c - 2.0 * SQRT_2).abs() <= 1e-9, format!("closed C = {}", closed.c))?;
    let r = chsh(
        &DetectorModel::EnsembleDep,
        MAXIMAL,
        &ChshMode::MonteCarlo { n: 1_000_000, mc: mc(40) },
    )
    .map_err(|e| e.to_string())?;
    ensure(r.c - 3.0 * r.std_err > 2.0, format!("MC C = {} ± {}", r.c, r.std_err))?;
    Ok(format!("{msg}; closed C = {:.9}; MC C = {:.5} ± {:.5}", closed.c, r.c, r.std_err))
}

fn criterion_4() -> Outcome {
    let stochastic = DetectorModel::stochastic_sign(0.75).map_err(|e| e.to_string())?;
    // the stochastic detector's correlation is the sign one scaled by (2p − 1)² = ¼
    let stochastic_max = 0.25 * 2.0;
    let mut parts = Vec::new();
    for (model, expected) in [
        (DetectorModel::Direct, 2.0 * SQRT_2 / 3.0),
        (DetectorModel::Sign, 2.0),
        (stochastic, stochastic_max),
    ] {
        let (best, all) = sweep_chsh(&model, FRAC_PI_8, &ChshMode::Closed).map_err(|e| e.to_string())?;
        ensure((best.c - expected).abs() <= 1e-9, format!("{model}: max C = {}", best.c))?;
        ensure(all.iter().all(|r| !r.violated), format!("{model}: a quadruple was flagged"))?;
        parts.push(format!("{model} {:.9}", best.c));
    }
    ensure(stochastic_max < 2.0, "stochastic max not below 2")?;
    Ok(parts.join(", "))
}

fn criterion_5() -> Outcome {
    let mut rng = RngStream::new(SEED, 5);
    let mut worst_closed: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    for i in 0..20 {
        let a = Axis::new(2.0 * PI * rng.uniform());
        let b = Axis::new(2.0 * PI * rng.uniform());
        let s = if rng.uniform() < 0.5 { Sign::Plus } else { Sign::Minus };
        let e = Ensemble::hemisphere(a, s);
        // mean projection of a hemisphere onto b is s·cosΔ/2
        let mean = s.value() * (b.theta() - a.theta()).cos() / 2.0;
        let [p, m] = outcome_probabilities(&e, b).map_err(|e| e.to_string())?;
        worst_closed = worst_closed.max((0.5 * p - 0.5 * m - mean).abs());
        let est = mc(50 + i).run(100_000, |r| {
            bellsphere::detectors::measure_ensemble(&e, b, r).expect("hemisphere").0.value()
        });
        let z = zscore(est.mean, mean, est.std_err());
        worst_z = worst_z.max(z.abs());
    }
    ensure(worst_closed <= 1e-12, format!("closed deviation {worst_closed:e}"))?;
    ensure(worst_z <= 5.0, format!("MC |z| = {worst_z:.2}"))?;
    Ok(format!("closed within {worst_closed:.1e}, MC max |z| = {worst_z:.2}"))
}

fn criterion_6() -> Outcome {
    let h = Ensemble::hemisphere(Axis::new(0.0), Sign::Plus);
    let b = Axis::new(PI / 3.0);
    let a2 = Axis::new(2.0 * PI / 3.0);
    let mut means = Vec::new();
    for (i, axes) in [[b, a2], [a2, b]].iter().enumerate() {
        let tree = sequence_tree_mean(&h, axes).map_err(|e| e.to_string())?;
        let est = mc(60 + i as u64).run(1_000_000, |r| {
            measure_sequence(&h, axes, r).expect("sequence").last().expect("step").outcome.value()
        });
        let z = zscore(est.mean, tree, est.std_err());
        ensure(z.abs() <= 5.0, format!("order {i}: {} vs tree {tree} (z = {z:.2})", est.mean))?;
        means.push(tree);
    }
    let gap = means[0] - means[1];
    ensure((gap - 0.25).abs() <= 1e-12, format!("gap = {gap}"))?;
    Ok(format!("tree means {:+.3} / {:+.3}, gap {gap:.3}", means[0], means[1]))
}

/// Eight CHSH variants in ±1 units, unit marginals ½.
fn eight_variants(e: [f64; 4]) -> bool {
    let e = e.map(|x| 4.0 * x);
    let total: f64 = e.iter().sum();
    e.iter().all(|&x| (total - 2.0 * x).abs() <= 2.0 + 1e-12)
}

fn criterion_7() -> Outcome {
    let mut rng = RngStream::new(SEED, 7);
    let mut agree = 0;
    let mut infeasible = 0;
    let n = 10_000;
    for i in 0..n {
        let e: [f64; 4] = std::array::from_fn(|_| 0.5 * rng.uniform() - 0.25);
        let marg: [[f64; 2]; 4] = if i % 2 == 0 {
            [[0.5; 2]; 4]
        } else {
            std::array::from_fn(|_| {
                let p = rng.uniform();
                [p, 1.0 - p]
            })
        };
        let lp = fine_feasible(e, marg, 0.5).map_err(|e| e.to_string())?.is_feasible();
        let ineq = if i % 2 == 0 { eight_variants(e) } else { chsh_inequalities_hold(e, marg, 0.5) };
        agree += (lp == ineq) as usize;
        infeasible += (!lp) as usize;
    }
    ensure(agree == n, format!("{agree}/{n} agree"))?;
    let e = [(0, 1), (0, 3), (2, 1), (2, 3)].map(|(i, j)| -0.25 * (MAXIMAL[j] - MAXIMAL[i]).cos());
    match fine_feasible(e, [[0.5; 2]; 4], 0.5).map_err(|e| e.to_string())? {
        Feasibility::Infeasible(cert) if cert.is_valid() => {}
        other => return Err(format!("maximal ensemble correlations not certified: {other:?}")),
    }
    Ok(format!("{agree}/{n} agree ({infeasible} infeasible); maximal quadruple certified"))
}

fn criterion_8() -> Outcome {
    let mut worst_norm: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    for ratio in [0.0, 0.375, 0.625, 0.99] {
        let d = ConfigDensity::new(1.0, ratio).map_err(|e| e.to_string())?;
        let rho = |t: f64, p: f64| d.density_at(t, p).value();
        let norm = integrate_edge_singular(rho, d.support_half_width(), 1024, 16);
        worst_norm = worst_norm.max((norm - 1.0).abs());
        for theta in [0.0, 0.4, FRAC_PI_4, 2.0, 3.0] {
            let m = ring_mean_projection(rho, 1.0, ratio, theta, 1024, 16);
            worst_mean = worst_mean.max((m - ratio * theta.cos()).abs());
        }
    }
    ensure(worst_norm <= 1e-6, format!("normalization off by {worst_norm:e}"))?;
    ensure(worst_mean <= 1e-6, format!("mean projection off by {worst_mean:e}"))?;
    Ok(format!("normalization within {worst_norm:.1e}, mean within {worst_mean:.1e}"))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_bellsphere")
}

fn criterion_9() -> Outcome {
    let out = Command::new(bin())
        .args(["--seed", "7", "verify", "--trials", "200000"])
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text
        .lines()
        .find(|l| l.contains("stochastic sign detector at Δ = 0"))
        .ok_or("no discrepancy line")?;
    ensure(line.contains("-0.0625") && line.contains("-0.125"), line.to_string())?;
    // parse "Monte Carlo <mean> ± <se>"
    let mc_part = line.split("Monte Carlo ").nth(1).ok_or("no Monte Carlo value")?;
    let mut it = mc_part.split_whitespace();
    let mean: f64 = it.next().and_then(|s| s.parse().ok()).ok_or("bad mean")?;
    it.next();
    let se: f64 = it.next().and_then(|s| s.parse().ok()).ok_or("bad std err")?;
    let quoted = stochastic_sign_quoted_form(0.0, 0.0);
    let z_oracle = (mean + 1.0 / 16.0) / se;
    let z_quoted = (mean - quoted) / se;
    ensure(z_oracle.abs() <= 5.0, format!("MC {mean} ± {se} not within 5σ of −1/16"))?;
    ensure(z_quoted.abs() > 5.0, format!("MC {mean} does not separate from the quoted value"))?;
    ensure(out.status.success(), format!("verify exited with {:?}", out.status.code()))?;
    Ok(format!("MC {mean:.5} ± {se:.5}: |z| {:.2} vs oracle, {:.1} vs quoted", z_oracle.abs(), z_quoted.abs()))
}

fn run_to_file(dir: &Path, name: &str, workers: &str, args: &[&str]) -> std::result::Result<Vec<u8>, String> {
    let path = dir.join(format!("{name}-{workers}.out"));
    let status = Command::new(bin())
        .args(["--seed", "99", "--workers", workers, "--block-size", "1000", "-o"])
        .arg(&path)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), format!("{name} failed: {}", String::from_utf8_lossy(&status.stderr)))?;
    std::fs::read(&path).map_err(|e| e.to_string())
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let commands: [(&str, &[&str]); 5] = [
        ("correlate", &["correlate", "--model", "ensemble", "--theta-a", "0", "--theta-b", "pi/3", "--trials", "200000"]),
        ("chsh", &["chsh", "--model", "ensemble", "--angles", "0,pi/4,pi/2,3pi/4", "--mode", "montecarlo", "--trials", "100000"]),
        ("sweep", &["sweep", "--model", "sign", "--step", "pi/2", "--mode", "montecarlo", "--trials", "20000"]),
        ("sequential", &["sequential", "--angles", "0,pi/3,2pi/3", "--trials", "100000"]),
        ("json", &["--format", "json", "correlate", "--model", "direct", "--theta-a", "0", "--theta-b", "pi", "--trials", "50000"]),
    ];
    for (name, args) in commands {
        let one = run_to_file(dir.path(), name, "1", args)?;
        let four = run_to_file(dir.path(), name, "4", args)?;
        ensure(!one.is_empty(), format!("{name}: empty output"))?;
        ensure(one == four, format!("{name}: outputs differ between 1 and 4 workers"))?;
    }
    Ok("5 commands byte-identical with 1 and 4 workers".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 direct correlations", criterion_1),
        ("2 sign correlations and lune sums", criterion_2),
        ("3 ensemble correlations and CHSH", criterion_3),
        ("4 reference models obey CHSH", criterion_4),
        ("5 outcome weights preserve the mean", criterion_5),
        ("6 sequential measurements do not commute", criterion_6),
        ("7 joint feasibility matches CHSH", criterion_7),
        ("8 ring density normalization", criterion_8),
        ("9 stochastic discrepancy report", criterion_9),
        ("10 reproducible across worker counts", criterion_10),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, f) in criteria {
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match res {
            Ok(msg) => println!("PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}: {msg}");
            }
        }
    }
    println!("{} of 10 criteria passed in {:.1} s", 10 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
