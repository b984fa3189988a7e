//! Acceptance suite. Runs as a plain binary so every criterion prints its
//! PASS/FAIL line. Pass criterion numbers as arguments to run a subset,
//! e.g. `cargo test -p ris-hbf --test acceptance -- 1 2 5`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use ris_hbf::baseband::{mmse_combiner, water_filling, EffectiveChannel};
use ris_hbf::channel::{generate_subchannel, UpaSize};
use ris_hbf::harness::{
    format_results, run_sweep, Method, Scenario, ScenarioConfig, SweepOutput, SweepSpec, SweepVar,
};
use ris_hbf::linalg::{max_abs_deviation_from_identity, CMatrix};
use ris_hbf::optimizer::{exhaustive_search, pso_optimize, FitnessContext, SwarmConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn means(out: &SweepOutput, values: &[f64], method: Method) -> Vec<f64> {
    values.iter().map(|&v| out.mean(v, method).expect("aggregate present")).collect()
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

fn fmt(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

// ---------------------------------------------------------------------------

fn c1_beamformer_structure() -> Outcome {
    let cfg = ScenarioConfig::default();
    let scenario = Scenario::new(&cfg).unwrap();
    let (mut dev_t, mut dev_r, mut dev_mod) = (0.0_f64, 0.0_f64, 0.0_f64);
    for seed in 0..10 {
        let chan = scenario.draw_channel(seed).unwrap();
        let (f_t, f_r, _) = scenario.rf_stage(&cfg, &chan).unwrap();
        assert_eq!(f_t.matrix.shape(), (64, 6));
        let f_r = f_r.combiner();
        assert_eq!(f_r.shape(), (2, 16));
        dev_t = dev_t.max(max_abs_deviation_from_identity(&(f_t.matrix.adjoint() * &f_t.matrix)));
        dev_r = dev_r.max(max_abs_deviation_from_identity(&(&f_r * f_r.adjoint())));
        for (m, f) in [(64.0_f64, &f_t.matrix), (16.0, &f_r)] {
            for z in f.iter() {
                dev_mod = dev_mod.max((z.norm() - 1.0 / m.sqrt()).abs());
            }
        }
    }
    outcome(
        dev_t <= 1e-10 && dev_r <= 1e-10 && dev_mod <= 1e-12,
        format!("|F_t^H F_t - I| = {dev_t:.1e}, |F_r F_r^H - I| = {dev_r:.1e}, modulus dev = {dev_mod:.1e}"),
    )
}

fn c2_water_filling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_sum = 0.0_f64;
    let mut worst_margin = f64::INFINITY;
    for _ in 0..100 {
        let mut sv: Vec<f64> = (0..2).map(|_| 10f64.powf(rng.random_range(-2.0..1.0))).collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let noise = 10f64.powf(rng.random_range(-3.0..0.0));
        let p = 10f64.powf(rng.random_range(-1.0..1.0));
        let alloc = water_filling(&sv, noise, p, 2).unwrap();
        worst_sum = worst_sum.max((alloc.gamma.iter().sum::<f64>() - p).abs());
        // objective whose KKT point is exactly the (μ - σ_v²/(P_T σ²))⁺ rule
        let rate = |g: &[f64]| -> f64 {
            g.iter().zip(&sv).map(|(g, s)| (1.0 + g * p * s * s / noise).log2()).sum()
        };
        let mine = rate(&alloc.gamma);
        let mut best = 0.0_f64;
        for _ in 0..1000 {
            let (mut x, mut y) = (rng.random::<f64>(), rng.random::<f64>());
            if x + y > 1.0 {
                (x, y) = (1.0 - x, 1.0 - y);
            }
            best = best.max(rate(&[x * p, y * p]));
        }
        worst_margin = worst_margin.min(mine - best);
    }
    outcome(
        worst_sum <= 1e-9 && worst_margin >= -1e-12,
        format!("max |sum - P_T| = {worst_sum:.1e}, min(rate - best random) = {worst_margin:.3e}"),
    )
}

fn c3_combiner_right_inverse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let eff = EffectiveChannel { matrix: gaussian(&mut rng, 2, 6) };
        let b_t = gaussian(&mut rng, 6, 2);
        let b_r = mmse_combiner(&eff, &b_t).unwrap();
        worst = worst.max(max_abs_deviation_from_identity(&(&b_r * &eff.matrix * &b_t)));
    }
    outcome(worst <= 1e-8, format!("max |B_r H B_t - I| = {worst:.1e}"))
}

fn c4_channel_normalization() -> Outcome {
    let cfg = ScenarioConfig::default();
    let specs = cfg.subchannel_specs().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ratios = Vec::new();
    for spec in &specs {
        let n = 10_000;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += generate_subchannel(spec, &mut rng).unwrap().0.norm_squared();
        }
        let expected = spec.path_loss().unwrap() * (spec.rx_array.total() * spec.tx_array.total()) as f64;
        ratios.push(acc / n as f64 / expected);
    }
    outcome(
        ratios.iter().all(|r| (r - 1.0).abs() <= 0.05),
        format!("E|H|^2 / (beta M_r M_t) for TR, TI, IR = {}", fmt(&ratios)),
    )
}

fn c5_pso_vs_grid() -> Outcome {
    let mut cfg = ScenarioConfig::default();
    cfg.arrays.ris = UpaSize { nx: 1, ny: 2 };
    let scenario = Scenario::new(&cfg).unwrap();
    let mut ratios = Vec::new();
    let mut spread = 0.0_f64;
    for seed in 0..20u64 {
        let chan = scenario.draw_channel(1000 + seed).unwrap();
        let (f_t, f_r, _) = scenario.rf_stage(&cfg, &chan).unwrap();
        let ctx = FitnessContext::new(&chan, &f_t, &f_r, cfg.link_budget());
        let (_, grid_best) = exhaustive_search(2, 64, &ctx).unwrap();
        let (_, grid_worst) = ris_hbf::optimizer::exhaustive_maximize(2, 64, |x| {
            -ctx.design(x).map(|d| d.rate).unwrap_or(0.0)
        })
        .unwrap();
        spread = spread.max((grid_best + grid_worst) / grid_best);
        let swarm = SwarmConfig {
            num_particles: 100,
            num_iterations: 200,
            seed,
            ..SwarmConfig::default()
        };
        ratios.push(pso_optimize(&swarm, &ctx).fitness / grid_best);
    }
    ratios.sort_by(f64::total_cmp);
    let median = 0.5 * (ratios[9] + ratios[10]);
    outcome(
        median >= 0.99,
        format!(
            "median PSO / grid = {median:.6} (min {:.6}); largest grid best-to-worst spread {:.1}%",
            ratios[0],
            100.0 * spread
        ),
    )
}

// ---------------------------------------------------------------------------

const DISTANCE_D1: [f64; 3] = [20.0, 60.0, 100.0];
const DISTANCE_PSO_TRIALS: usize = 50;
const DISTANCE_BASELINE_TRIALS: usize = 4000;

struct DistanceSweep {
    pso: SweepOutput,
    baselines: SweepOutput,
    csv: (String, String),
}

fn distance_config(methods: &[Method], trials: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.geometry.d_tr = 200.0;
    cfg.geometry.d_v = 5.0;
    cfg.run.trials = trials;
    cfg.run.methods = methods.to_vec();
    cfg
}

fn run_distance_sweep(workers: usize) -> DistanceSweep {
    let sweep = SweepSpec::new(SweepVar::D1, DISTANCE_D1.to_vec()).unwrap();
    let pso = run_sweep(&distance_config(&[Method::Pso], DISTANCE_PSO_TRIALS), &sweep, workers).unwrap();
    let base_cfg = distance_config(&[Method::Random, Method::Constant, Method::NoRis], DISTANCE_BASELINE_TRIALS);
    let baselines = run_sweep(&base_cfg, &sweep, workers).unwrap();
    let csv = (format_results(&pso.rows), format_results(&baselines.rows));
    DistanceSweep { pso, baselines, csv }
}

fn distance_sweep() -> &'static DistanceSweep {
    static CELL: OnceLock<DistanceSweep> = OnceLock::new();
    CELL.get_or_init(|| run_distance_sweep(workers()))
}

fn c6_distance() -> Outcome {
    let r = distance_sweep();
    let pso = means(&r.pso, &DISTANCE_D1, Method::Pso);
    let random = means(&r.baselines, &DISTANCE_D1, Method::Random);
    let constant = means(&r.baselines, &DISTANCE_D1, Method::Constant);
    let no_ris = means(&r.baselines, &DISTANCE_D1, Method::NoRis);
    let ordered = (0..3).all(|i| pso[i] > random[i] && random[i] > constant[i] && constant[i] > no_ris[i]);
    let decreasing = pso.windows(2).all(|w| w[1] < w[0]);
    let ratio = pso[2] / no_ris[2];
    let margin: Vec<f64> = (0..3).map(|i| constant[i] - no_ris[i]).collect();
    outcome(
        ordered && decreasing && ratio >= 2.0,
        format!(
            "pso {} random {} constant {} no_ris {}; constant - no_ris [{}]; pso/no_ris at 100 m = {ratio:.2} \
             ({DISTANCE_PSO_TRIALS} PSO trials, {DISTANCE_BASELINE_TRIALS} baseline trials per point)",
            fmt(&pso),
            fmt(&random),
            fmt(&constant),
            fmt(&no_ris),
            margin.iter().map(|m| format!("{m:.2e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn c7_ris_size() -> Outcome {
    let values = [16.0, 64.0, 144.0, 256.0];
    let mut cfg = ScenarioConfig::default();
    cfg.geometry.d_tr = 100.0;
    cfg.geometry.d_v = 10.0;
    cfg.geometry.d1 = Some(10.0);
    cfg.geometry.d2 = Some(80.0);
    cfg.run.trials = 100;
    cfg.run.methods = vec![Method::Pso, Method::Random];
    let out = run_sweep(&cfg, &SweepSpec::new(SweepVar::Mi, values.to_vec()).unwrap(), workers()).unwrap();
    let pso = means(&out, &values, Method::Pso);
    let random = means(&out, &values, Method::Random);
    let gap: Vec<f64> = pso.iter().zip(&random).map(|(p, r)| p - r).collect();
    let pass = strictly_increasing(&pso) && strictly_increasing(&random) && gap.windows(2).all(|w| w[1] >= w[0]);
    outcome(
        pass,
        format!("M_I {values:?}: pso {} random {} gap {} (100 trials)", fmt(&pso), fmt(&random), fmt(&gap)),
    )
}

fn c8_power() -> Outcome {
    let values: Vec<f64> = (0..=8).map(|k| 5.0 * k as f64).collect();
    let mut cfg = ScenarioConfig::default();
    cfg.geometry.d_tr = 100.0;
    cfg.geometry.d_v = 5.0;
    cfg.geometry.d2_over_d1 = Some(4.0);
    cfg.run.trials = 50;
    let out = run_sweep(&cfg, &SweepSpec::new(SweepVar::Pt, values.clone()).unwrap(), workers()).unwrap();
    let all: Vec<Vec<f64>> = Method::ALL.iter().map(|&m| means(&out, &values, m)).collect();
    let monotone = all.iter().all(|m| strictly_increasing(m));
    let ordered = (0..values.len()).all(|i| all[0][i] >= all[1][i] && all[1][i] >= all[2][i]);
    outcome(
        monotone && ordered,
        format!(
            "P_T 0..40 dBm: pso {} random {} constant {} no_ris {}",
            fmt(&all[0]),
            fmt(&all[1]),
            fmt(&all[2]),
            fmt(&all[3])
        ),
    )
}

fn c9_determinism() -> Outcome {
    let first = distance_sweep();
    let other = if workers() == 1 { 3 } else { 1 };
    let again = run_distance_sweep(other);
    let same = first.csv == again.csv;
    outcome(
        same,
        format!(
            "distance sweep re-run with {other} workers (first run used {}): {} + {} CSV bytes {}",
            workers(),
            first.csv.0.len(),
            first.csv.1.len(),
            if same { "identical" } else { "differ" }
        ),
    )
}

// ---------------------------------------------------------------------------

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

const CRITERIA: [Criterion; 9] = [
    (1, "beamformer structure", Duration::from_secs(1), c1_beamformer_structure),
    (2, "water-filling correctness", Duration::from_secs(10), c2_water_filling),
    (3, "combiner right-inverse", Duration::from_secs(1), c3_combiner_right_inverse),
    (4, "channel normalization", Duration::from_secs(30), c4_channel_normalization),
    (5, "PSO vs 64x64 grid oracle", Duration::from_secs(120), c5_pso_vs_grid),
    (6, "distance sweep ordering", Duration::from_secs(30 * 60), c6_distance),
    (7, "RIS size sweep", Duration::from_secs(45 * 60), c7_ris_size),
    (8, "transmit power sweep", Duration::from_secs(30 * 60), c8_power),
    (9, "determinism", Duration::from_secs(30 * 60), c9_determinism),
];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, limit, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= limit, o.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id} {name}: {} in {:.2} s (limit {} s) | {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {}/{ran} passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
