//! Built-in verification checks run by `bellsphere verify`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, TAU};
use std::fmt::Write as _;

use crate::analysis::{
    chsh, chsh_inequalities_hold, chsh_value, e_closed, estimate_correlation, fine_feasible,
    lune_probability, stochastic_sign_quoted_form, sweep_chsh, ChshMode, Feasibility, MonteCarlo,
};
use crate::cli::fmt_sig9;
use crate::detectors::{
    measure_ensemble, measure_pair, measure_sequence, outcome_probabilities, DetectorModel,
    DEFAULT_P_HI,
};
use crate::distributions::{ConfigDensity, Ensemble, PairSource};
use crate::geometry::{sample_ring, sample_sphere, Axis, Sign};
use crate::oracles::{
    enumerate_ensemble_e, enumerate_pointlike_e, integrate_edge_singular, ring_mean_projection,
    sequence_tree_mean,
};
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub workers: usize,
    pub block_size: usize,
    pub trials: usize,
    /// Name of a check whose expected value is deliberately perturbed.
    pub corrupt: Option<String>,
    pub report_discrepancies: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            workers: 0,
            block_size: crate::analysis::DEFAULT_BLOCK_SIZE,
            trials: 1_000_000,
            corrupt: None,
            report_discrepancies: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub const CHECK_NAMES: &[&str] = &[
    "density-normalization",
    "ring-mean-projection",
    "sphere-moments",
    "lune-simplex",
    "oracle-sign-grid",
    "oracle-stochastic-grid",
    "oracle-ensemble-grid",
    "mean-preservation",
    "non-commutation",
    "fine-chsh-agreement",
    "fine-maximal-infeasible",
    "parameter-independence",
    "conditional-expectation",
    "correlation-direct",
    "correlation-sign",
    "correlation-stochastic",
    "correlation-ensemble",
    "chsh-maximal",
    "bell-compliance",
    "stochastic-discrepancy",
];

struct Ctx<'a> {
    opts: &'a VerifyOptions,
}

impl Ctx<'_> {
    /// Expected value as used by check `name`, perturbed on request.
    fn expect(&self, name: &str, v: f64) -> f64 {
        if self.opts.corrupt.as_deref() == Some(name) {
            v + 0.5
        } else {
            v
        }
    }

    fn mc(&self, base: u64) -> MonteCarlo {
        MonteCarlo::new(self.opts.seed)
            .with_workers(self.opts.workers)
            .with_block_size(self.opts.block_size)
            .with_stream_base(base << 40)
    }

    fn rng(&self, stream: u64) -> RngStream {
        RngStream::new(self.opts.seed, (1 << 62) + stream)
    }
}

fn result(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

fn within_sigma(x: f64, expected: f64, se: f64, k: f64) -> bool {
    (x - expected).abs() <= k * se
}

/// Runs every check. Returns the results and the discrepancy report text.
pub fn run_checks(opts: &VerifyOptions) -> (Vec<CheckResult>, String) {
    let ctx = Ctx { opts };
    let n = opts.trials;
    let mut out = Vec::new();
    let mut report = String::new();

    // configuration-density normalization
    {
        let name = "density-normalization";
        let mut worst: f64 = 0.0;
        for c in [0.0, 0.375, 0.625, 0.99] {
            let d = ConfigDensity::new(1.0, c).expect("valid ring");
            let total = integrate_edge_singular(|t, p| d.density_at(t, p).value(), d.support_half_width(), 1024, 16);
            worst = worst.max((total - ctx.expect(name, 1.0)).abs());
        }
        out.push(result(name, worst <= 1e-6, format!("max |∫ρ dΩ − 1| = {worst:.3e}")));
    }

    {
        let name = "ring-mean-projection";
        let mut worst: f64 = 0.0;
        let mut mc_ok = true;
        for (i, c) in [0.0, 0.375, 0.625, 0.99].into_iter().enumerate() {
            let d = ConfigDensity::new(1.0, c).expect("valid ring");
            let ring = Ensemble::ring(1.0, c).expect("valid ring");
            for theta in [0.0, FRAC_PI_4, 1.0, 2.5] {
                let q = ring_mean_projection(|t, p| d.density_at(t, p).value(), 1.0, c, theta, 1024, 16);
                let closed = ctx.expect(name, ring.mean_projection(Axis::new(theta)));
                worst = worst.max((q - closed).abs());
            }
            let a = Axis::new(FRAC_PI_4);
            let m = ctx.mc(100 + i as u64).run(n / 4, |r| sample_ring(1.0, c, r).expect("valid").project(a));
            mc_ok &= within_sigma(m.mean, ctx.expect(name, c * FRAC_PI_4.cos()), m.std_err(), 5.0) || m.std_err() == 0.0 && (m.mean - c * FRAC_PI_4.cos()).abs() < 1e-12;
        }
        out.push(result(
            name,
            worst <= 1e-6 && mc_ok,
            format!("quadrature max error {worst:.3e}; Monte Carlo within 5σ: {mc_ok}"),
        ));
    }

    {
        let name = "sphere-moments";
        let m = ctx.mc(200).run_vec(n, 2, |r, o| {
            let j = sample_sphere(r);
            o[0] = j.z;
            o[1] = j.z * j.z;
        });
        let ok = within_sigma(m[0].mean, ctx.expect(name, 0.0), m[0].std_err(), 5.0)
            && within_sigma(m[1].mean, ctx.expect(name, 1.0 / 3.0), m[1].std_err(), 5.0);
        out.push(result(
            name,
            ok,
            format!("⟨z⟩ = {}, ⟨z²⟩ = {}", fmt_sig9(m[0].mean), fmt_sig9(m[1].mean)),
        ));
    }

    {
        let name = "lune-simplex";
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let d = PI * i as f64 / 99.0;
            let ks = [0.5, -0.5];
            let total: f64 = ks.iter().flat_map(|&k| ks.map(|kp| lune_probability(k, kp, d))).sum();
            let moment: f64 = ks.iter().flat_map(|&k| ks.map(|kp| k * kp * lune_probability(k, kp, d))).sum();
            worst = worst
                .max((total - ctx.expect(name, 1.0)).abs())
                .max((moment - e_closed(&DetectorModel::Sign, 0.0, d)).abs());
        }
        out.push(result(name, worst <= 1e-12, format!("max deviation {worst:.3e} over 100 Δ")));
    }

    let grid_check = |name: &'static str, model: DetectorModel, oracle: &dyn Fn(f64) -> f64| {
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let d = PI * i as f64 / 99.0;
            worst = worst.max((e_closed(&model, 0.0, d) - ctx.expect(name, oracle(d))).abs());
        }
        result(name, worst <= 1e-12, format!("max |closed − oracle| = {worst:.3e}"))
    };
    let stochastic = DetectorModel::StochasticSign { p_hi: DEFAULT_P_HI };
    out.push(grid_check("oracle-sign-grid", DetectorModel::Sign, &|d| {
        enumerate_pointlike_e(&DetectorModel::Sign, d).expect("sign")
    }));
    out.push(grid_check("oracle-stochastic-grid", stochastic, &|d| {
        enumerate_pointlike_e(&stochastic, d).expect("stochastic")
    }));
    out.push(grid_check("oracle-ensemble-grid", DetectorModel::EnsembleDep, &enumerate_ensemble_e));

    {
        let name = "mean-preservation";
        let mut rng = ctx.rng(1);
        let (mut closed_worst, mut mc_ok): (f64, bool) = (0.0, true);
        for i in 0..20 {
            let a = Axis::new(TAU * rng.uniform());
            let sign = if rng.bernoulli(0.5) { Sign::Plus } else { Sign::Minus };
            let b = Axis::new(TAU * rng.uniform());
            let e = Ensemble::hemisphere(a, sign);
            let [p, m] = outcome_probabilities(&e, b).expect("hemisphere");
            let target = ctx.expect(name, e.mean_projection(b));
            closed_worst = closed_worst.max((0.5 * p - 0.5 * m - target).abs());
            let est = ctx.mc(300 + i).run(100_000, |r| measure_ensemble(&e, b, r).expect("hemisphere").0.value());
            mc_ok &= within_sigma(est.mean, target, est.std_err(), 5.0) || est.std_err() == 0.0 && (est.mean - target).abs() < 1e-12;
        }
        out.push(result(
            name,
            closed_worst <= 1e-12 && mc_ok,
            format!("closed max error {closed_worst:.3e}; Monte Carlo within 5σ: {mc_ok}"),
        ));
    }

    {
        let name = "non-commutation";
        let a = Axis::new(0.0);
        let b = Axis::new(PI / 3.0);
        let a2 = Axis::new(2.0 * PI / 3.0);
        let h = Ensemble::hemisphere(a, Sign::Plus);
        let fwd = sequence_tree_mean(&h, &[b, a2]).expect("tree");
        let rev = sequence_tree_mean(&h, &[a2, b]).expect("tree");
        let mut ok = (fwd - rev - ctx.expect(name, 0.25)).abs() <= 1e-12;
        let mut detail = format!("tree [b,a'] = {}, [a',b] = {}", fmt_sig9(fwd), fmt_sig9(rev));
        for (i, (axes, tree)) in [([b, a2], fwd), ([a2, b], rev)].into_iter().enumerate() {
            let m = ctx.mc(400 + i as u64).run(n, |r| measure_sequence(&h, &axes, r).expect("seq")[1].outcome.value());
            ok &= within_sigma(m.mean, tree, m.std_err(), 5.0);
            let _ = write!(detail, "; MC {}", fmt_sig9(m.mean));
        }
        out.push(result(name, ok, detail));
    }

    {
        let name = "fine-chsh-agreement";
        let mut rng = ctx.rng(2);
        let trials = 10_000;
        let mut agree = 0;
        let mut feasible = 0;
        for i in 0..trials {
            let marg: [[f64; 2]; 4] = std::array::from_fn(|_| {
                let p = if i % 2 == 0 { 0.5 } else { rng.uniform() };
                [p, 1.0 - p]
            });
            let e: [f64; 4] = std::array::from_fn(|_| 0.5 * rng.uniform() - 0.25);
            let lp = fine_feasible(e, marg, 0.5).expect("valid marginals").is_feasible();
            let ineq = chsh_inequalities_hold(e, marg, 0.5);
            if lp == ineq {
                agree += 1;
            }
            feasible += lp as usize;
        }
        let target = ctx.expect(name, trials as f64);
        out.push(result(
            name,
            agree as f64 == target,
            format!("{agree}/{trials} agree ({feasible} feasible)"),
        ));
    }

    {
        let name = "fine-maximal-infeasible";
        let q = [0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4];
        let corr = |m: &DetectorModel| crate::analysis::CHSH_PAIRS.map(|(i, j)| e_closed(m, q[i], q[j]));
        let half = [[0.5, 0.5]; 4];
        let ens = fine_feasible(corr(&DetectorModel::EnsembleDep), half, 0.5).expect("valid");
        let certified = matches!(&ens, Feasibility::Infeasible(c) if c.is_valid());
        let sign = fine_feasible(corr(&DetectorModel::Sign), half, 0.5).expect("valid");
        let ok = certified && sign.is_feasible() && ctx.expect(name, 0.0) == 0.0;
        out.push(result(
            name,
            ok,
            format!("ensemble certified infeasible: {certified}; sign feasible: {}", sign.is_feasible()),
        ));
    }

    {
        let name = "parameter-independence";
        let a = Axis::new(0.0);
        let mut ok = true;
        let mut worst: f64 = 0.0;
        for i in 0..8 {
            let b = Axis::new(PI * i as f64 / 8.0);
            let m = ctx.mc(500 + i).run(n / 4, |r| {
                let (r1, _) = measure_pair(&DetectorModel::EnsembleDep, &PairSource::StaticSphere, a, b, r).expect("pair");
                (r1.value() > 0.0) as u8 as f64
            });
            let z = (m.mean - ctx.expect(name, 0.5)) / m.std_err();
            worst = worst.max(z.abs());
            ok &= z.abs() <= 5.0;
        }
        out.push(result(name, ok, format!("max |z| of P(R1a=+½) over 8 axes b = {worst:.2}")));
    }

    {
        let name = "conditional-expectation";
        let a = Axis::new(0.0);
        let b = Axis::new(1.0);
        let m = ctx.mc(600).run_vec(n, 4, |r, o| {
            let (r1, r2) = measure_pair(&DetectorModel::EnsembleDep, &PairSource::StaticSphere, a, b, r).expect("pair");
            let plus = r1.value() > 0.0;
            o[0] = plus as u8 as f64;
            o[1] = if plus { r2.value() } else { 0.0 };
            o[2] = (!plus) as u8 as f64;
            o[3] = if plus { 0.0 } else { r2.value() };
        });
        let mut ok = true;
        let mut detail = String::new();
        for (k, (ind, val)) in [(0.5, (0, 1)), (-0.5, (2, 3))] {
            let count = m[ind].mean * n as f64;
            let cond = m[val].mean / m[ind].mean;
            // r2 is ±½ within the conditioning event
            let se = ((0.25 - cond * cond).max(0.0) / count).sqrt();
            let target = ctx.expect(name, -k * 1f64.cos());
            ok &= within_sigma(cond, target, se, 5.0);
            let _ = write!(detail, "E[R2b|R1a={k}] = {} (expected {}) ", fmt_sig9(cond), fmt_sig9(target));
        }
        out.push(result(name, ok, detail.trim_end().to_string()));
    }

    for (idx, (name, model)) in [
        ("correlation-direct", DetectorModel::Direct),
        ("correlation-sign", DetectorModel::Sign),
        ("correlation-stochastic", stochastic),
        ("correlation-ensemble", DetectorModel::EnsembleDep),
    ]
    .into_iter()
    .enumerate()
    {
        let mut worst: f64 = 0.0;
        for i in 0..7 {
            let d = PI * i as f64 / 6.0;
            let mut rec = estimate_correlation(
                &model,
                &PairSource::StaticSphere,
                Axis::new(0.0),
                Axis::new(d),
                n,
                &ctx.mc(700 + 10 * idx as u64 + i),
            )
            .expect("estimate");
            rec.e_closed = ctx.expect(name, rec.e_closed);
            worst = worst.max(rec.z_score().abs());
        }
        out.push(result(name, worst <= 5.0, format!("max |z| over 7 separations = {worst:.2}")));
    }

    {
        let name = "chsh-maximal";
        let q = [0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4];
        let closed = chsh(&DetectorModel::EnsembleDep, q, &ChshMode::Closed).expect("chsh");
        let mc = chsh(&DetectorModel::EnsembleDep, q, &ChshMode::MonteCarlo { n, mc: ctx.mc(800) }).expect("chsh");
        let target = ctx.expect(name, 2.0 * 2f64.sqrt());
        let ok = (closed.c - target).abs() <= 1e-9 && closed.violated && mc.violated && mc.c - 3.0 * mc.std_err > 2.0;
        out.push(result(
            name,
            ok,
            format!("closed C = {}; Monte Carlo C = {} ± {}", fmt_sig9(closed.c), fmt_sig9(mc.c), fmt_sig9(mc.std_err)),
        ));
    }

    {
        let name = "bell-compliance";
        let mut ok = true;
        let mut detail = String::new();
        let oracle_max = {
            // independent scan of oracle correlations over the same grid
            let g = 16;
            let e = |i: usize, j: usize| {
                let d = crate::geometry::separation(i as f64 * FRAC_PI_8, j as f64 * FRAC_PI_8);
                enumerate_pointlike_e(&stochastic, d).expect("stochastic")
            };
            let mut best: f64 = 0.0;
            for a in 0..g {
                for b in 0..g {
                    for a2 in 0..g {
                        for b2 in 0..g {
                            best = best.max(chsh_value([e(a, b), e(a, b2), e(a2, b), e(a2, b2)], 0.5));
                        }
                    }
                }
            }
            best
        };
        for (model, expected) in [
            (DetectorModel::Direct, 2.0 * 2f64.sqrt() / 3.0),
            (DetectorModel::Sign, 2.0),
            (stochastic, oracle_max),
        ] {
            let (best, all) = sweep_chsh(&model, FRAC_PI_8, &ChshMode::Closed).expect("sweep");
            let expected = ctx.expect(name, expected);
            ok &= (best.c - expected).abs() <= 1e-9 && best.c <= 2.0 + 1e-9 && all.iter().all(|r| !r.violated);
            let _ = write!(detail, "{} max C = {}; ", model.name(), fmt_sig9(best.c));
        }
        out.push(result(name, ok, detail.trim_end_matches("; ").to_string()));
    }

    {
        let name = "stochastic-discrepancy";
        let oracle = enumerate_pointlike_e(&stochastic, 0.0).expect("stochastic");
        let quoted = stochastic_sign_quoted_form(0.0, 0.0);
        let rec = estimate_correlation(
            &stochastic,
            &PairSource::StaticSphere,
            Axis::new(0.0),
            Axis::new(0.0),
            n,
            &ctx.mc(900),
        )
        .expect("estimate");
        let z_oracle = (rec.e_hat - ctx.expect(name, oracle)) / rec.std_err;
        let z_quoted = (rec.e_hat - quoted) / rec.std_err;
        let ok = z_oracle.abs() <= 5.0 && z_quoted.abs() > 5.0;
        let _ = writeln!(
            report,
            "stochastic sign detector at Δ = 0: enumeration {} | quoted closed form (Δ/π − 1)/8 = {} | Monte Carlo {} ± {} (z vs enumeration {:.2}, z vs quoted {:.2})",
            fmt_sig9(oracle),
            fmt_sig9(quoted),
            fmt_sig9(rec.e_hat),
            fmt_sig9(rec.std_err),
            z_oracle,
            z_quoted
        );
        if opts.report_discrepancies {
            let _ = writeln!(report, "delta,enumeration,quoted_form,closed_form");
            for i in 0..=12 {
                let d = PI * i as f64 / 12.0;
                let _ = writeln!(
                    report,
                    "{},{},{},{}",
                    fmt_sig9(d),
                    fmt_sig9(enumerate_pointlike_e(&stochastic, d).expect("stochastic")),
                    fmt_sig9(stochastic_sign_quoted_form(0.0, d)),
                    fmt_sig9(e_closed(&stochastic, 0.0, d))
                );
            }
        }
        out.push(result(
            name,
            ok,
            format!("Monte Carlo sides with enumeration: |z| = {:.2} vs {:.2}", z_oracle.abs(), z_quoted.abs()),
        ));
    }

    // change of ⟨J_b⟩ on measurement, both conventions
    {
        let a = Axis::new(0.0);
        let b = Axis::new(PI / 3.0);
        let h = Ensemble::hemisphere(a, Sign::Plus);
        let [p_plus, p_minus] = outcome_probabilities(&h, b).expect("hemisphere");
        let _ = writeln!(
            report,
            "measurement change of <J_b> from hemisphere a+ with Δ = π/3 (post − pre | −2k·P(k)):"
        );
        for (k, p) in [(0.5, p_plus), (-0.5, p_minus)] {
            let post = Ensemble::hemisphere(b, Sign::of(k));
            let direct = post.mean_projection(b) - h.mean_projection(b);
            let _ = writeln!(report, "  k = {k:+}: {} | {}", fmt_sig9(direct), fmt_sig9(-2.0 * k * p));
        }
        let mut rng = ctx.rng(3);
        let rec = measure_sequence(&h, &[b], &mut rng).expect("seq");
        let _ = writeln!(
            report,
            "  sampled record: k = {:+}, delta = {}, weighted = {}",
            rec[0].outcome.value(),
            fmt_sig9(rec[0].delta_mean_projection),
            fmt_sig9(rec[0].delta_weighted)
        );
    }

    debug_assert_eq!(out.len(), CHECK_NAMES.len());
    (out, report)
}
