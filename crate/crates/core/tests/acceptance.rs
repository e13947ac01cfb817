//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Set `GRNN_ACCEPTANCE_ONLY` to a comma-separated
//! list of substrings to run a subset.

mod common;

use std::time::{Duration, Instant};

use common::{brute_force_argmin, gaussian, gradient_check, step_mse, FD_TOL};
use grnn_sdr::bench::{run_bench, write_rows, BenchConfig, CellSpec};
use grnn_sdr::dimsearch::{call_budget, golden_points, search_dimension, PenaltyConfig, SearchOptions};
use grnn_sdr::linalg::{matmul, Matrix};
use grnn_sdr::metrics::vector_correlation;
use grnn_sdr::network::train_once;
use grnn_sdr::rng::SplitMix64;
use grnn_sdr::simgen::{generate, ModelSpec};
use grnn_sdr::{DataSplit, TrainConfig};

const BASE_SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn selected(name: &str) -> bool {
    match std::env::var("GRNN_ACCEPTANCE_ONLY") {
        Ok(list) if !list.trim().is_empty() => list.split(',').any(|s| name.contains(s.trim())),
        _ => true,
    }
}

fn check(results: &mut Vec<bool>, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) {
    if !selected(name) {
        return;
    }
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = out.pass && in_time;
    let timing = if in_time {
        format!("{:.1}s", elapsed.as_secs_f64())
    } else {
        format!("{:.1}s exceeds {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64())
    };
    println!(
        "{} {name}: {} [{timing}]",
        if pass { "PASS" } else { "FAIL" },
        out.detail
    );
    results.push(pass);
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn gradient() -> Outcome {
    let r = gradient_check(20, BASE_SEED);
    outcome(
        r.max_rel_err < FD_TOL,
        format!(
            "{} configs, {} coordinates, max relative error {:.2e} (< {FD_TOL:e})",
            r.configs, r.compared, r.max_rel_err
        ),
    )
}

fn metrics() -> Outcome {
    let mut rng = SplitMix64::new(BASE_SEED);
    let mut failures = Vec::new();
    let mut max_shift: f64 = 0.0;
    for _ in 0..1000 {
        let p = 2 + rng.below(9);
        let d = 1 + rng.below(p);
        let d_hat = 1 + rng.below(p);
        let b = gaussian(&mut rng, p, d);
        let bh = gaussian(&mut rng, p, d_hat);
        let r = vector_correlation(&b, &bh).unwrap();
        if !(0.0..=1.0).contains(&r) {
            failures.push(format!("r={r} out of range"));
        }
        let b2 = matmul(&b, &gaussian(&mut rng, d, d)).unwrap();
        let bh2 = matmul(&bh, &gaussian(&mut rng, d_hat, d_hat)).unwrap();
        let r2 = vector_correlation(&b2, &bh2).unwrap();
        max_shift = max_shift.max((r - r2).abs());
        if d_hat > d && r != 0.0 {
            failures.push(format!("d_hat {d_hat} > d {d} gave r={r}"));
        }
        let same = vector_correlation(&b, &b2).unwrap();
        if (same - 1.0).abs() > 1e-9 {
            failures.push(format!("equal spans gave r={same}"));
        }
    }
    if max_shift > 1e-9 {
        failures.push(format!("basis change moved r by {max_shift:e}"));
    }
    let e1 = Matrix::from_columns(&[[1.0, 0.0, 0.0]]).unwrap();
    let e12 = Matrix::from_columns(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
    let over = vector_correlation(&e1, &e12).unwrap();
    if over != 0.0 {
        failures.push(format!("constructed d_hat > d gave r={over}"));
    }
    let angle = std::f64::consts::PI / 3.0;
    let tilted = Matrix::from_columns(&[[angle.cos(), angle.sin(), 0.0]]).unwrap();
    let cos60 = vector_correlation(&e1, &tilted).unwrap();
    if (cos60 - 0.5).abs() > 1e-10 {
        failures.push(format!("cos 60 case gave {cos60}"));
    }
    let detail = if failures.is_empty() {
        format!("1000 random pairs in [0,1], basis shift {max_shift:.1e}, cos60 = {cos60:.12}")
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn search_logic() -> Outcome {
    let mut cases = 0;
    let mut mismatches = Vec::new();
    for p in 1..=12usize {
        for d_star in 1..=p {
            for &pen in &[0.002, 0.02, 0.08] {
                for &b in &[0.0, 0.05, 0.4] {
                    let a = (p as f64 + 0.5) * pen;
                    let mse = |k| step_mse(k, d_star, a, b);
                    let res = search_dimension(p, pen, SearchOptions::default(), |k| Ok(mse(k))).unwrap();
                    let expect = brute_force_argmin(p, pen, mse);
                    cases += 1;
                    if res.d_hat != expect {
                        mismatches.push(format!("p={p} d*={d_star}: {} vs {expect}", res.d_hat));
                    }
                }
            }
        }
    }
    let mut budget = Vec::new();
    let mut over = Vec::new();
    for p in [10usize, 20, 40, 60] {
        let worst = (1..=p)
            .map(|d| {
                search_dimension(p, 0.01, SearchOptions::default(), |k| Ok(step_mse(k, d, 1.0, 0.0)))
                    .unwrap()
                    .trace
                    .bracket_invocations
            })
            .max()
            .unwrap();
        budget.push(format!("p={p} {worst}/{}", call_budget(p)));
        if worst > call_budget(p) {
            over.push(p);
        }
    }
    let mut detail = format!(
        "{}/{cases} argmin matches; bracketing calls (worst/budget) {}",
        cases - mismatches.len(),
        budget.join(", ")
    );
    if !mismatches.is_empty() {
        detail.push_str(&format!("; mismatches: {}", mismatches.join(", ")));
    }
    if !over.is_empty() {
        detail.push_str(&format!("; budget exceeded at p={over:?}"));
    }
    outcome(mismatches.is_empty() && over.is_empty(), detail)
}

fn golden() -> Outcome {
    let a = golden_points(1, 20);
    let b = golden_points(1, 5);
    outcome(a == (8, 12) && b == (2, 3), format!("(1,20) -> {a:?}, (1,5) -> {b:?}"))
}

fn cell(model: u8, n: usize, noise: Option<f64>) -> CellSpec {
    CellSpec {
        model,
        n_train_val: n,
        val_frac: 0.2,
        n_test: 1000,
        p: 20,
        noise,
        replications: 10,
    }
}

fn bench(cells: Vec<CellSpec>) -> Vec<grnn_sdr::bench::BenchRow> {
    let cfg = BenchConfig {
        cells,
        train: TrainConfig::default(),
        penalty: PenaltyConfig::default(),
        search: SearchOptions::default(),
        base_seed: BASE_SEED,
        parallelism: 1,
    };
    run_bench(&cfg).unwrap().into_iter().map(|r| r.row).collect()
}

fn d_hats(rows: &[grnn_sdr::bench::BenchRow]) -> Vec<usize> {
    rows.iter().map(|r| r.d_hat.unwrap_or(0)).collect()
}

fn rs(rows: &[grnn_sdr::bench::BenchRow]) -> Vec<f64> {
    rows.iter().map(|r| r.r.unwrap_or(0.0)).collect()
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn model4() -> Outcome {
    let rows = bench(vec![cell(4, 1000, None)]);
    let d = d_hats(&rows);
    let hits = d.iter().filter(|&&k| k == 3).count();
    let med = median(&rs(&rows));
    outcome(
        hits >= 7 && med >= 0.85,
        format!("d_hat=3 in {hits}/10 (need 7), median r {med:.3} (need 0.85); d_hat {d:?}"),
    )
}

fn model2() -> Outcome {
    let rows = bench(vec![cell(2, 1000, None), cell(2, 4000, None)]);
    let (small, large) = rows.split_at(10);
    let (r_small, r_large) = (mean(&rs(small)), mean(&rs(large)));
    outcome(
        r_large >= 0.85 && r_large > r_small,
        format!(
            "mean r {r_small:.3} at N=1000, {r_large:.3} at N=4000; d_hat {:?} / {:?}",
            d_hats(small),
            d_hats(large)
        ),
    )
}

fn approximation() -> Outcome {
    let rows = bench(vec![cell(6, 2000, Some(0.1)), cell(7, 2000, Some(0.1))]);
    let (m6, m7) = rows.split_at(10);
    let h6 = d_hats(m6).iter().filter(|&&k| k == 5).count();
    let h7 = d_hats(m7).iter().filter(|&&k| k == 4).count();
    outcome(
        h6 >= 6 && h7 >= 6,
        format!(
            "model 6 d_hat=5 in {h6}/10 {:?}; model 7 d_hat=4 in {h7}/10 {:?}",
            d_hats(m6),
            d_hats(m7)
        ),
    )
}

fn linear_time() -> Outcome {
    let cfg = TrainConfig {
        m: 20,
        restarts: 1,
        epochs: 300,
        ..TrainConfig::default()
    };
    let split_for = |n: usize| {
        let data = generate(&ModelSpec::new(4, n, 20, BASE_SEED)).unwrap();
        DataSplit::shuffled(&data.x, &data.y, 0.2, BASE_SEED).unwrap()
    };
    let timed = |split: &DataSplit| {
        (0..3)
            .map(|_| {
                let start = Instant::now();
                train_once(split, 3, &cfg, BASE_SEED).unwrap();
                start.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let (small, large) = (split_for(1000), split_for(4000));
    timed(&small);
    let (t1, t4) = (timed(&small), timed(&large));
    let ratio = t4 / t1;
    outcome(
        (3.0..=5.5).contains(&ratio),
        format!("t(4000)/t(1000) = {t4:.3}s/{t1:.3}s = {ratio:.2} (need 3.0..5.5)"),
    )
}

fn determinism() -> Outcome {
    let csv = |parallelism: usize| {
        let cfg = BenchConfig {
            cells: vec![
                CellSpec {
                    n_test: 100,
                    p: 8,
                    replications: 3,
                    ..cell(4, 300, None)
                },
                CellSpec {
                    n_test: 100,
                    p: 8,
                    replications: 3,
                    ..cell(6, 300, Some(0.1))
                },
            ],
            train: TrainConfig {
                m: 10,
                epochs: 150,
                ..TrainConfig::default()
            },
            penalty: PenaltyConfig::default(),
            search: SearchOptions::default(),
            base_seed: BASE_SEED,
            parallelism,
        };
        let mut rows: Vec<_> = run_bench(&cfg).unwrap().into_iter().map(|r| r.row).collect();
        for r in &mut rows {
            r.wall_seconds = 0.0;
        }
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        buf
    };
    let serial = csv(1);
    let parallel = csv(4);
    outcome(
        serial == parallel,
        format!("serial and 4-thread CSVs identical over {} bytes", serial.len()),
    )
}

fn main() {
    let mut results = Vec::new();
    check(&mut results, "gradient oracle", secs(10), gradient);
    check(&mut results, "metric suite", secs(5), metrics);
    check(&mut results, "search-logic oracle", secs(5), search_logic);
    check(&mut results, "golden-point arithmetic", secs(1), golden);
    check(&mut results, "linear-time training", secs(300), linear_time);
    check(&mut results, "bench determinism", secs(300), determinism);
    check(&mut results, "dimension recovery model 4", secs(600), model4);
    check(&mut results, "model 2 scaling", secs(1800), model2);
    check(&mut results, "approximation models 6 and 7", secs(1200), approximation);
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
