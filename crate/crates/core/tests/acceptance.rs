//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use risloc::geometry::{distance, forward_sensing, map_to_position, Point};
use risloc::harness::scene::admissible;
use risloc::harness::sweep::{run_point, GridIndex};
use risloc::harness::{run_sweep, simulate, ResultRow, SweepConfig};
use risloc::metrics::{pair_targets, total_squared_distance};
use risloc::pipeline::TrialContext;
use risloc::signal::{cyclic_autocorrelation, generate_zc};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn cazac() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut pass = true;
    for (n, r) in [(1989, 7), (839, 3), (63, 5)] {
        let zc = generate_zc(n, r).unwrap();
        let peak = cyclic_autocorrelation(&zc, 0).unwrap();
        pass &= (peak - n as f64).abs() <= 1e-9 * n as f64;
        for shift in 1..n {
            let v = cyclic_autocorrelation(&zc, shift).unwrap() / n as f64;
            worst = worst.max(v);
            pass &= v < 1e-9;
        }
    }
    let t = start.elapsed();
    verdict(pass && within(t, 5), format!("worst sidelobe {worst:.2e}*N, {:.2} s", t.as_secs_f64()))
}

fn geometry_round_trip() -> Verdict {
    let start = Instant::now();
    let config = SweepConfig::default();
    let layout = config.scenario.layout().unwrap();
    let window = config.delay_window(&layout);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 10_000 {
        let p = Point::new(rng.random_range(0.0..=layout.cell_width), rng.random_range(0.0..=layout.cell_height));
        if !admissible(p, &layout, &config.scene, &window) {
            continue;
        }
        let back = map_to_position(forward_sensing(p, &layout).unwrap(), &layout).unwrap();
        worst = worst.max(distance(p, back));
        count += 1;
    }
    let t = start.elapsed();
    verdict(worst < 1e-6 && within(t, 5), format!("max error {worst:.2e} m, {:.2} s", t.as_secs_f64()))
}

fn brute_force(actual: &[Point], est: &[Point]) -> f64 {
    fn go(actual: &[Point], est: &[Point], swap: bool, i: usize, used: &mut Vec<bool>, chosen: &mut Vec<usize>, best: &mut f64) {
        if i == actual.len() {
            // sum in actual-index order, matching the library
            let mut pairs: Vec<(usize, usize)> = if swap {
                chosen.iter().enumerate().map(|(e, &a)| (a, e)).collect()
            } else {
                chosen.iter().copied().enumerate().collect()
            };
            pairs.sort_unstable();
            let (a, e) = if swap { (est, actual) } else { (actual, est) };
            let v = total_squared_distance(a, e, &pairs);
            if v < *best {
                *best = v;
            }
            return;
        }
        for j in 0..est.len() {
            if !used[j] {
                used[j] = true;
                chosen.push(j);
                go(actual, est, swap, i + 1, used, chosen, best);
                chosen.pop();
                used[j] = false;
            }
        }
    }
    if actual.is_empty() || est.is_empty() {
        return 0.0;
    }
    let (small, large, swap) = if actual.len() <= est.len() {
        (actual, est, false)
    } else {
        (est, actual, true)
    };
    let mut best = f64::INFINITY;
    go(small, large, swap, 0, &mut vec![false; large.len()], &mut Vec::new(), &mut best);
    best
}

fn pairing_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let k = rng.random_range(0..=6);
        let k_hat = rng.random_range(0..=6);
        let mut draw = |n: usize| -> Vec<Point> {
            (0..n)
                .map(|_| Point::new(rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0)))
                .collect()
        };
        let actual = draw(k);
        let est = draw(k_hat);
        let pairs = pair_targets(&actual, &est);
        let got = total_squared_distance(&actual, &est, &pairs);
        if pairs.len() != k.min(k_hat) || got != brute_force(&actual, &est) {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("{mismatches}/1000 instances differ from exhaustive search"))
}

fn noiseless_end_to_end() -> Verdict {
    let start = Instant::now();
    let mut c = SweepConfig::default();
    c.trials = 100;
    c.record_timing = false;
    c.scenario.noiseless = true;
    c.axes.ris_elements = vec![64];
    c.axes.targets = vec![2];
    c.scene.min_bearing_separation_deg = 5.0;
    c.scene.min_delay_separation_samples = 10.0;
    let ctx = TrialContext::new(c.scenario.zc_length, c.scenario.zc_root).unwrap();
    let (outcomes, _) = run_point(&c, &ctx, GridIndex { snr: 0, m: 0, k: 0 }).unwrap();
    let mut good = 0;
    let mut worst = 0.0f64;
    for o in &outcomes {
        let pairs = pair_targets(&o.true_positions, &o.estimated_positions);
        let err = pairs
            .iter()
            .map(|&(a, e)| distance(o.true_positions[a], o.estimated_positions[e]))
            .fold(0.0, f64::max);
        worst = worst.max(err);
        if o.k_hat == 2 && pairs.len() == 2 && err <= 0.5 {
            good += 1;
        }
    }
    let t = start.elapsed();
    verdict(
        good == 100 && within(t, 120),
        format!("{good}/100 trials with K_hat = 2 and error <= 0.5 m, worst {worst:.3} m, {:.1} s", t.as_secs_f64()),
    )
}

fn rows_for(rows: &[ResultRow], m: usize) -> Vec<&ResultRow> {
    rows.iter().filter(|r| r.m == m).collect()
}

fn snr_sweep() -> (Vec<ResultRow>, Duration) {
    let start = Instant::now();
    let mut c = SweepConfig::default();
    c.trials = 200;
    c.record_timing = false;
    c.axes.snr_db = vec![-40.0, -30.0, -20.0, -10.0, 0.0];
    c.axes.ris_elements = vec![8, 64];
    c.axes.targets = vec![2];
    let rows = run_sweep(&c).unwrap();
    (rows, start.elapsed())
}

fn mse_trend(rows: &[ResultRow], t: Duration) -> Verdict {
    let m64 = rows_for(rows, 64);
    let m8 = rows_for(rows, 8);
    let mse: Vec<f64> = m64.iter().map(|r| r.mse.unwrap_or(f64::INFINITY)).collect();
    let decays = mse.windows(2).all(|w| w[1] <= 1.2 * w[0]);
    let at = |rs: &[&ResultRow], snr: f64| rs.iter().find(|r| r.snr_db == snr).and_then(|r| r.mse).unwrap_or(f64::INFINITY);
    let ordered = at(&m64, -20.0) < at(&m8, -20.0);
    let floor = *mse.last().unwrap() < 1.0;
    verdict(
        decays && ordered && floor && within(t, 900),
        format!(
            "M=64 mse {:?}; M=8 at -20 dB {:.4}; {:.0} s",
            mse.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            at(&m8, -20.0),
            t.as_secs_f64()
        ),
    )
}

fn pd_vs_snr(rows: &[ResultRow], t: Duration) -> Verdict {
    let m64 = rows_for(rows, 64);
    let pd: Vec<f64> = m64.iter().map(|r| r.p_d).collect();
    let high = m64.iter().filter(|r| r.snr_db >= -20.0).all(|r| r.p_d >= 0.9);
    let monotone = pd.windows(2).all(|w| w[1] >= w[0] - 0.05);
    verdict(
        high && monotone && within(t, 600),
        format!("M=64 p_d {pd:?}; {:.0} s", t.as_secs_f64()),
    )
}

fn pd_vs_k() -> Verdict {
    let start = Instant::now();
    let mut c = SweepConfig::default();
    c.trials = 200;
    c.record_timing = false;
    c.axes.snr_db = vec![50.0];
    c.axes.ris_elements = vec![8, 16, 64];
    c.axes.targets = (1..=7).collect();
    let rows = run_sweep(&c).unwrap();
    let t = start.elapsed();
    let pd = |m: usize| -> Vec<f64> { rows_for(&rows, m).iter().map(|r| r.p_d).collect() };
    let (p8, p16, p64) = (pd(8), pd(16), pd(64));
    let large = p16.iter().chain(&p64).all(|&p| p >= 0.9);
    let small_degrades = p8[6] < p8[0];
    verdict(
        large && small_degrades && within(t, 1200),
        format!(
            "M=16 {p16:?}; M=64 {p64:?}; M=8 {p8:?}; min(M>=16) >= 0.9: {large}; M=8 K=7 < K=1: {small_degrades}; {:.0} s",
            t.as_secs_f64()
        ),
    )
}

fn srp_ordering() -> Verdict {
    let start = Instant::now();
    let mut c = SweepConfig::default();
    c.trials = 200;
    c.record_timing = false;
    c.axes.snr_db = vec![0.0];
    c.axes.ris_elements = vec![8, 16, 32, 64];
    c.axes.targets = vec![2];
    c.metrics.srp_epsilon_m = 1.0;
    let rows = run_sweep(&c).unwrap();
    let t = start.elapsed();
    let srp: Vec<f64> = rows.iter().map(|r| r.srp).collect();
    let ordered = srp.windows(2).all(|w| w[1] >= w[0] - 0.05);
    let top = srp[3] >= 0.9;
    verdict(
        ordered && top && within(t, 900),
        format!("srp for M = 8, 16, 32, 64: {srp:?}; {:.0} s", t.as_secs_f64()),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut c = SweepConfig::default();
    c.trials = 24;
    c.record_timing = false;
    c.axes.snr_db = vec![-20.0, 0.0];
    c.axes.ris_elements = vec![16];
    c.axes.targets = vec![2, 3];
    let mut csv = Vec::new();
    for (i, threads) in [1, 2, 1].into_iter().enumerate() {
        let path = dir.path().join(format!("run{i}.csv"));
        c.threads = Some(threads);
        c.output = Some(path.clone());
        simulate(&c).unwrap();
        csv.push(std::fs::read(&path).unwrap());
    }
    let same = csv.windows(2).all(|w| w[0] == w[1]);
    verdict(same, format!("{} bytes per run, threads 1/2/1 identical: {same}", csv[0].len()))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |name: &str, v: Verdict| {
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    };
    report("cazac", cazac());
    report("geometry-round-trip", geometry_round_trip());
    report("pairing-oracle", pairing_oracle());
    report("noiseless-end-to-end", noiseless_end_to_end());
    let (rows, t) = snr_sweep();
    report("mse-vs-snr", mse_trend(&rows, t));
    report("pd-vs-snr", pd_vs_snr(&rows, t));
    report("pd-vs-k", pd_vs_k());
    report("srp-ordering", srp_ordering());
    report("determinism", determinism());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
