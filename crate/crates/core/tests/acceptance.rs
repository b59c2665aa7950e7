//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fail.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use ycsae::experiment::{self, write_metrics_csv, MetricsRow};
use ycsae::learning::{fitness, reconstruction_error, roulette, update_error, update_niche};
use ycsae::{
    load_model, run_experiment, save_model, train, InputSource, NetworkGenome, Rule, RuleId,
    Rulebase, TrainConfig, Trainer,
};

const SIGNIFICANCE: f64 = 0.001;
const PER_BIT_BOUND: f64 = 0.05;
const SHAPE_RATIO: f64 = 0.25;

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn check(id: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

fn chi_square(observed: &[f64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum()
}

fn chi_critical(df: usize) -> f64 {
    ChiSquared::new(df as f64)
        .unwrap()
        .inverse_cdf(1.0 - SIGNIFICANCE)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn sigmoid_oracle(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Rows produced by presentations, excluding the cycle-0 snapshot.
fn sampled(rows: &[MetricsRow]) -> &[MetricsRow] {
    &rows[1..]
}

struct Figure1 {
    length: usize,
    final_per_bit: f64,
    first_window: f64,
    last_window: f64,
}

fn figure1(length: usize) -> Figure1 {
    let cfg = TrainConfig {
        master_seed: 2020,
        ..TrainConfig::standard(length)
    };
    assert_eq!(
        (cfg.pop_size, cfg.hidden, cfg.runs, cfg.cycles),
        (1000, 5, 10, 50_000)
    );
    let start = Instant::now();
    let res = run_experiment(&cfg, &InputSource::generated(&cfg)).expect("experiment");
    let rows = sampled(&res.averaged.rows);
    let tail = (rows.len() / 10).max(1);
    let head = (rows.len() / 20).max(1);
    let fig = Figure1 {
        length,
        final_per_bit: mean(
            rows[rows.len() - tail..]
                .iter()
                .map(|r| r.window_match_error_per_bit),
        ),
        first_window: mean(rows[..head].iter().map(|r| r.window_match_error)),
        last_window: mean(
            rows[rows.len() - tail..]
                .iter()
                .map(|r| r.window_match_error),
        ),
    };
    eprintln!(
        "  l={length}: {} runs x {} cycles in {:.1?}; final per-bit {:.4}, window first {:.4} last {:.4}",
        cfg.runs,
        cfg.cycles,
        start.elapsed(),
        fig.final_per_bit,
        fig.first_window,
        fig.last_window
    );
    fig
}

fn ac1_ac2(fig: &Figure1, id: &'static str) -> Outcome {
    check(
        id,
        fig.final_per_bit <= PER_BIT_BOUND,
        format!(
            "l={}: mean per-bit window error over final 10% = {:.4} (bound {PER_BIT_BOUND})",
            fig.length, fig.final_per_bit
        ),
    )
}

fn ac3(figs: &[Figure1]) -> Outcome {
    let parts: Vec<String> = figs
        .iter()
        .map(|f| {
            format!(
                "l={}: last/first = {:.3}",
                f.length,
                f.last_window / f.first_window
            )
        })
        .collect();
    let pass = figs
        .iter()
        .all(|f| f.last_window < SHAPE_RATIO * f.first_window);
    check(
        "AC3",
        pass,
        format!("{} (need < {SHAPE_RATIO})", parts.join(", ")),
    )
}

fn ac4() -> Outcome {
    let beta = 0.2;
    let mut worst: f64 = 0.0;
    for &(e0, s) in &[(5.5, 0.3), (0.0, 2.0), (10.0, 10.0), (1.25, 0.75)] {
        let mut e = e0;
        for t in 1..=100 {
            e = update_error(e, s, beta);
            let closed = (1.0f64 - beta).powi(t) * (e0 - s).abs();
            worst = worst.max(((e - s).abs() - closed).abs());
        }
    }
    for &(sigma0, m) in &[(500.0, 10usize), (1.0, 40), (7.0, 7)] {
        let mut sigma = sigma0;
        for t in 1..=100 {
            sigma = update_niche(sigma, m, beta);
            let closed = (1.0f64 - beta).powi(t) * (sigma0 - m as f64).abs();
            worst = worst.max(((sigma - m as f64).abs() - closed).abs());
        }
    }
    check(
        "AC4",
        worst <= 1e-9,
        format!("max |closed-form deviation| = {worst:.3e} (tol 1e-9)"),
    )
}

fn ac5() -> Outcome {
    let mut ok = fitness(0.0, 50.0) == 1.0 && fitness(1.0, 50.0) == 0.5 && fitness(1.0, 2.0) == 0.5;
    let direct = 1.0 / ((0..50).fold(1.0f64, |p, _| p * 0.9) + 1.0);
    let fit_dev = (fitness(0.9, 50.0) - direct).abs();
    ok &= fit_dev <= 1e-9;

    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut recon_dev: f64 = 0.0;
    for _ in 0..20 {
        let len = rng.gen_range(1..=30);
        let x: Vec<f64> = (0..len)
            .map(|_| f64::from(rng.gen::<bool>() as u8))
            .collect();
        let o: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
        let mut sum = 0.0;
        for i in 0..len {
            let d = x[i] - o[i];
            sum += d * d;
        }
        recon_dev = recon_dev.max((reconstruction_error(&x, &o).unwrap() - sum.sqrt()).abs());
    }
    ok &= recon_dev <= 1e-12;
    check(
        "AC5",
        ok,
        format!(
            "fitness(0.9,50) deviation {fit_dev:.2e}; reconstruction max deviation {recon_dev:.2e}"
        ),
    )
}

fn ac6() -> Outcome {
    #[rustfmt::skip]
    let params = vec![
        -0.8, 1.1, 0.2,   // hidden
        1.7, -0.9,        // out 0
        -2.2, 0.4,        // out 1
        0.6, 0.05,        // match
    ];
    let g = NetworkGenome::from_params(2, 1, params).unwrap();
    let mut worst: f64 = 0.0;
    for x in [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]] {
        let h = sigmoid_oracle(0.2 + -0.8 * x[0] + 1.1 * x[1]);
        let expect = [
            sigmoid_oracle(-0.9 + 1.7 * h),
            sigmoid_oracle(0.4 - 2.2 * h),
            sigmoid_oracle(0.05 + 0.6 * h),
        ];
        let out = g.forward(&x).unwrap();
        let got = [
            out.reconstruction[0],
            out.reconstruction[1],
            out.match_activation,
        ];
        worst = worst.max((out.hidden[0] - h).abs());
        for (a, b) in got.iter().zip(expect) {
            worst = worst.max((a - b).abs());
        }
    }
    check(
        "AC6",
        worst <= 1e-12,
        format!("max node deviation {worst:.2e} (tol 1e-12)"),
    )
}

fn ac7() -> Outcome {
    let mut ok = true;
    let mut covers = 0usize;
    let mut cycles = 0usize;
    for pop_size in [200, 4] {
        let cfg = TrainConfig {
            pop_size,
            sigma0: pop_size as f64 / 2.0,
            mu: 1.0,
            theta_ga: 0.0,
            noise_rate: 0.5,
            cycles: 10_000,
            ..TrainConfig::standard(11)
        };
        let source = InputSource::generated(&cfg);
        let mut trainer = Trainer::new(&cfg, &source, 77).unwrap();
        for _ in 0..cfg.cycles {
            let report = trainer.step().unwrap();
            cycles += 1;
            ok &= trainer.rulebase().len() == pop_size;
            if report.cover.is_some() {
                covers += 1;
                ok &= report.match_set_size > 0;
            }
        }
    }
    check(
        "AC7",
        ok && covers > 0,
        format!("{cycles} hostile cycles, {covers} covers; population and cover post-conditions held: {ok}"),
    )
}

fn ac8() -> Outcome {
    let n = 100_000;
    let crit = chi_critical(1);
    let mut rng = ChaCha8Rng::seed_from_u64(88);

    let mut counts = [0.0; 2];
    for _ in 0..n {
        counts[roulette(&[1.0, 3.0], &mut rng).unwrap()] += 1.0;
    }
    let chi_roulette = chi_square(&counts, &[0.25 * n as f64, 0.75 * n as f64]);

    let rule = |id: u64, sigma: f64| Rule {
        id: RuleId(id),
        genome: NetworkGenome::zeros(3, 2).unwrap(),
        error: 1.0,
        niche_size: sigma,
        ga_timestamp: 0,
    };
    let mut counts = [0.0; 2];
    for _ in 0..n {
        let mut rb = Rulebase::from_rules(2, 3, 2, vec![rule(0, 100.0), rule(1, 300.0)]).unwrap();
        let removed = rb.replace_by_niche(rule(2, 1.0), &mut rng).unwrap();
        counts[removed.id.0 as usize] += 1.0;
    }
    let chi_replace = chi_square(&counts, &[0.25 * n as f64, 0.75 * n as f64]);

    let parent = NetworkGenome::random(11, 5, 1.0, &mut rng).unwrap();
    let trials = 10_000;
    let changed: usize = (0..trials)
        .map(|_| {
            let child = parent.mutate(0.05, 0.1, &mut rng).unwrap();
            parent
                .params()
                .iter()
                .zip(child.params())
                .filter(|(a, b)| a != b)
                .count()
        })
        .sum();
    let genes = parent.params().len() as f64;
    let mean_changed = changed as f64 / trials as f64;
    let sd_mean = (genes * 0.05 * 0.95 / trials as f64).sqrt();
    let z = (mean_changed - genes * 0.05).abs() / sd_mean;

    check(
        "AC8",
        chi_roulette < crit && chi_replace < crit && z < 3.0,
        format!(
            "roulette chi2 {chi_roulette:.3}, replacement chi2 {chi_replace:.3} (critical {crit:.3}); mutation mean {mean_changed:.4} vs 6.6, |z| = {z:.2}"
        ),
    )
}

fn ac9() -> Outcome {
    let cfg = TrainConfig {
        pop_size: 150,
        sigma0: 75.0,
        cycles: 3_000,
        sample_interval: 100,
        runs: 3,
        master_seed: 5,
        ..TrainConfig::standard(11)
    };
    let csv = |tl: &ycsae::MetricsTimeline, label: &str| {
        let mut buf = Vec::new();
        write_metrics_csv(&mut buf, label, tl).unwrap();
        buf
    };
    let (a, rb) = train(&cfg, 41).unwrap();
    let (b, rb2) = train(&cfg, 41).unwrap();
    let mut identical = csv(&a, "0") == csv(&b, "0") && rb == rb2;
    let e1 = experiment::run_experiment(&cfg, &InputSource::generated(&cfg)).unwrap();
    let e2 = experiment::run_experiment(&cfg, &InputSource::generated(&cfg)).unwrap();
    identical &= csv(&e1.averaged, "avg") == csv(&e2.averaged, "avg");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.txt");
    save_model(&rb, &path).unwrap();
    let (loaded, header) = load_model(&path).unwrap();
    let round_trip = loaded.rules() == rb.rules()
        && (header.input_width, header.hidden_width, header.capacity) == (11, 5, 150);
    check(
        "AC9",
        identical && round_trip,
        format!("byte-identical CSVs/models: {identical}; model round-trip exact: {round_trip}"),
    )
}

fn main() -> ExitCode {
    let mut outcomes = vec![ac4(), ac5(), ac6(), ac7(), ac8(), ac9()];
    let figs = [figure1(11), figure1(20)];
    outcomes.insert(0, ac3(&figs));
    outcomes.insert(0, ac1_ac2(&figs[1], "AC2"));
    outcomes.insert(0, ac1_ac2(&figs[0], "AC1"));

    let mut failed = 0;
    for o in &outcomes {
        println!(
            "[{}] {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        outcomes.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
