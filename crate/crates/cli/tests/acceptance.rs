//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use havok_arc_core::arc_model::{
    arc_resistance_trace, compute_profile_coefficients, locate_t_m, ArcParameters,
};
use havok_arc_core::detector::{DetectionThresholds, Verdict};
use havok_arc_core::feeder::{simulate_detailed, FeederConfig, ScenarioSpec};
use havok_arc_core::havok::{build_hankel, decompose, differentiate, identify, select_rank};
use havok_arc_core::linalg::{svd_of_transpose, Matrix};
use havok_arc_core::pipeline::{benchmark_case, run_scenario};

const REPS: usize = 50;
const SEED: u64 = 1;
const ARC_CASES: [&str; 4] = ["A", "B", "C", "D"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn arc_params(id: &str) -> ArcParameters {
    benchmark_case(id).unwrap().scenario.arc.unwrap()
}

// 1. max ln R_arc over a half-cycle equals ln EXTENT within 1% at 50 µs.
fn peak_resistance_identity() -> Outcome {
    let start = Instant::now();
    let dt = 50e-6;
    let u: Vec<f64> = (0..400).map(|k| 12.0 * (2.0 * PI * 50.0 * k as f64 * dt).sin()).collect();
    let mut worst: f64 = 0.0;
    for id in ARC_CASES {
        let params = arc_params(id);
        let t_m = locate_t_m(&u, dt, params.offset).unwrap();
        let profile = compute_profile_coefficients(&params).unwrap().anchored_at(t_m);
        let trace = arc_resistance_trace(&params, &profile, 0.02, dt).unwrap();
        let peak = trace.samples[..200].iter().map(|r| r.ln()).fold(f64::MIN, f64::max);
        worst = worst.max((peak - params.extent.ln()).abs() / params.extent.ln());
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 0.01 && elapsed < Duration::from_secs(1),
        format!("worst relative error {worst:.2e}, {elapsed:.2?}"),
    )
}

// 2. fault-branch current has a near-zero run of DURATION ± 2 samples in
// every half-cycle of the fault window.
fn zero_off_interval() -> Outcome {
    let config = FeederConfig::default();
    let dt = config.dt();
    let mut failures = Vec::new();
    for id in ARC_CASES {
        let case = benchmark_case(id).unwrap();
        let sim = simulate_detailed(&config, &case.scenario, SEED).unwrap();
        let i_f = &sim.fault_current;
        let (k0, k1) = (4000usize, 6000usize);
        let peak = i_f[k0..k1].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let want = case.scenario.arc.unwrap().duration / dt;
        // half-cycles delimited by voltage peaks, each holding one zero crossing
        let mut runs = Vec::new();
        let mut edge = 0.205;
        while edge + 0.01 <= 0.3 + 1e-12 {
            let (a, b) = ((edge / dt).round() as usize, ((edge + 0.01) / dt).round() as usize);
            let (mut best, mut cur) = (0usize, 0usize);
            for x in &i_f[a.max(k0)..b.min(k1)] {
                cur = if x.abs() < 0.01 * peak { cur + 1 } else { 0 };
                best = best.max(cur);
            }
            runs.push(best);
            edge += 0.01;
        }
        if runs.iter().any(|&n| (n as f64 - want).abs() > 2.0) {
            failures.push(format!("{id}: want {want:.1}, got {runs:?}"));
        }
    }
    let pass = failures.is_empty();
    outcome(pass, if pass { "all half-cycles within ±2 samples".into() } else { failures.join("; ") })
}

struct BenchmarkRow {
    case: String,
    latency_ms: Option<f64>,
    verdict: String,
}

fn run_benchmark(out: &Path, reps: usize) -> (Vec<BenchmarkRow>, Vec<u8>, Duration) {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_havok-arc"))
        .args(["benchmark", "--reps", &reps.to_string(), "--seed", &SEED.to_string(), "--out"])
        .arg(out)
        .output()
        .expect("benchmark binary runs");
    let elapsed = start.elapsed();
    assert!(status.status.success(), "benchmark failed: {}", String::from_utf8_lossy(&status.stderr));
    let bytes = std::fs::read(out.join("summary.csv")).unwrap();
    let mut rows = Vec::new();
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    for rec in reader.records() {
        let rec = rec.unwrap();
        rows.push(BenchmarkRow {
            case: rec[0].to_string(),
            latency_ms: rec[6].parse().ok(),
            verdict: rec[7].to_string(),
        });
    }
    (rows, bytes, elapsed)
}

fn case_of(run_id: &str) -> &str {
    run_id.rsplit_once("_r").map_or(run_id, |(c, _)| c)
}

const EXPECTED: [(&str, &str); 9] = [
    ("A", "ArcFault"),
    ("B", "ArcFault"),
    ("C", "ArcFault"),
    ("D", "ArcFault"),
    ("E", "NonArcingDisturbance"),
    ("F", "OtherFault"),
    ("G(a)", "ArcFault"),
    ("G(b)", "ArcFault"),
    ("H", "ArcFault"),
];

// 3. category mapping in ≥ 95% of 50 seeded repetitions per case, < 5 min.
fn classification_table(rows: &[BenchmarkRow], elapsed: Duration) -> Outcome {
    let mut hits: HashMap<&str, usize> = HashMap::new();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for r in rows {
        let case = case_of(&r.case);
        let (key, want) = EXPECTED.iter().find(|(c, _)| *c == case).unwrap();
        *counts.entry(key).or_default() += 1;
        if r.verdict == *want {
            *hits.entry(key).or_default() += 1;
        }
    }
    let mut pass = elapsed < Duration::from_secs(300);
    let mut parts = Vec::new();
    for (case, _) in EXPECTED {
        let n = counts.get(case).copied().unwrap_or(0);
        let h = hits.get(case).copied().unwrap_or(0);
        pass &= n == REPS && h as f64 >= 0.95 * REPS as f64;
        parts.push(format!("{case} {h}/{n}"));
    }
    outcome(pass, format!("{} in {elapsed:.1?}", parts.join(", ")))
}

// 4. arc cases detect within 5 ms and noise delays detection versus case A.
fn latency_ordering(rows: &[BenchmarkRow]) -> Outcome {
    let arc_cases = ["A", "B", "C", "D", "G(a)", "G(b)", "H"];
    let mut slow = Vec::new();
    for r in rows.iter().filter(|r| arc_cases.contains(&case_of(&r.case))) {
        if !r.latency_ms.is_some_and(|l| (0.0..=5.0).contains(&l)) {
            slow.push(r.case.clone());
        }
    }
    let a: Vec<Option<f64>> = rows.iter().filter(|r| case_of(&r.case) == "A").map(|r| r.latency_ms).collect();
    let h: Vec<Option<f64>> = rows.iter().filter(|r| case_of(&r.case) == "H").map(|r| r.latency_ms).collect();
    let ordered = a.len() == h.len()
        && a.iter().zip(&h).all(|(a, h)| matches!((a, h), (Some(a), Some(h)) if h > a));
    let pass = slow.is_empty() && ordered;
    let detail = format!(
        "{} arc runs outside [0, 5] ms; H > A on matched seeds: {ordered} (A {:?}, H {:?})",
        slow.len(),
        a.first().copied().flatten(),
        h.first().copied().flatten()
    );
    outcome(pass, detail)
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }
}

// 5. SVD, differentiator, regression and rank-selector numerics.
fn havok_numerics() -> Outcome {
    let mut rng = Lcg(2024);
    let x: Vec<f64> = (0..3000).map(|k| (k as f64 * 0.031).sin() + 0.2 * rng.next()).collect();
    let h = build_hankel(&x, 40).unwrap();
    let svd = decompose(&h).unwrap();
    let gram = |m: &Matrix| m.transpose().mul(m).sub(&Matrix::identity(m.cols())).frobenius_norm();
    let full = h.to_matrix();
    let recon = full.sub(&svd.reconstruct(40)).frobenius_norm() / full.frobenius_norm();
    let a_ok = gram(&svd.u) < 1e-10 && gram(&svd.v) < 1e-10 && recon < 1e-10;

    let dt = 0.01;
    let cubic = Matrix::from_fn(300, 1, |i, _| (i as f64 * dt - 1.5).powi(3));
    let dc = differentiate(&cubic, dt).unwrap();
    let cubic_err = dc
        .values
        .col(0)
        .iter()
        .enumerate()
        .map(|(k, v)| (v - 3.0 * ((k + 2) as f64 * dt - 1.5).powi(2)).abs())
        .fold(0.0, f64::max);
    let sine = Matrix::from_fn(1000, 1, |i, _| (i as f64 * dt).sin());
    let ds = differentiate(&sine, dt).unwrap();
    let sine_err = ds
        .values
        .col(0)
        .iter()
        .enumerate()
        .map(|(k, v)| (v - ((k + 2) as f64 * dt).cos()).abs())
        .fold(0.0, f64::max);
    let b_ok = cubic_err < 1e-10 && sine_err < 1e-8;

    // exp(A t) v0 for A = [[-1, 2, 0], [-2, -1, 0], [0, 0, -0.5]]
    let step = 1e-3;
    let n = 4000;
    let v = Matrix::from_fn(n, 3, |k, c| {
        let t = k as f64 * step;
        let e = (-t).exp();
        let (co, si) = ((2.0 * t).cos(), (2.0 * t).sin());
        [e * (co + 0.5 * si), e * (-si + 0.5 * co), 0.8 * (-0.5 * t).exp()][c]
    });
    let model = identify(&v, &differentiate(&v, step).unwrap(), &vec![0.0; n], step).unwrap();
    let truth = Matrix::from_columns(&[vec![-1.0, -2.0, 0.0], vec![2.0, -1.0, 0.0], vec![0.0, 0.0, -0.5]]);
    let a_rel = model.a.sub(&truth).frobenius_norm() / truth.frobenius_norm();
    let c_ok = a_rel < 1e-3;

    let (q, p) = (40, 2000);
    let basis: Vec<Vec<f64>> = (0..3)
        .map(|l| (0..p).map(|j| ((l + 1) as f64 * 0.017 * j as f64 + 0.4 * l as f64).sin()).collect())
        .collect();
    let weights: Vec<[f64; 3]> = (0..q).map(|_| [rng.next(), rng.next(), rng.next()]).collect();
    let m = Matrix::from_fn(p, q, |j, i| {
        (0..3).map(|l| weights[i][l] * basis[l][j]).sum::<f64>() + 1e-9 * rng.next()
    });
    let rank = select_rank(&svd_of_transpose(m).unwrap().s, q, p);
    let d_ok = rank == 3;

    outcome(
        a_ok && b_ok && c_ok && d_ok,
        format!(
            "(a) recon {recon:.1e} (b) cubic {cubic_err:.1e} sine {sine_err:.1e} (c) A rel {a_rel:.1e} (d) rank {rank}"
        ),
    )
}

fn verdict_counts(spec: &ScenarioSpec, seeds: impl Iterator<Item = u64>) -> HashMap<Verdict, usize> {
    let config = FeederConfig::default();
    let thresholds = DetectionThresholds::default();
    let mut counts = HashMap::new();
    for seed in seeds {
        let run = run_scenario(&config, spec, seed, 40, &thresholds).unwrap();
        *counts.entry(run.report.verdict).or_default() += 1;
    }
    counts
}

// 6. case A with 60 dB and 70 dB noise stays ArcFault in ≥ 90% of 50 runs.
fn noise_robustness() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for snr in [60.0, 70.0] {
        let spec = ScenarioSpec::noisy_arc(arc_params("A"), snr);
        let counts = verdict_counts(&spec, SEED..SEED + REPS as u64);
        let arc = counts.get(&Verdict::ArcFault).copied().unwrap_or(0);
        pass &= arc as f64 >= 0.9 * REPS as f64;
        parts.push(format!("{snr} dB: {arc}/{REPS} ArcFault {counts:?}"));
    }
    outcome(pass, parts.join("; "))
}

// 7. 50 load-switching runs produce no ArcFault verdict.
fn load_switch_false_positives() -> Outcome {
    let spec = benchmark_case("E").unwrap().scenario;
    let counts = verdict_counts(&spec, SEED..SEED + REPS as u64);
    let arc = counts.get(&Verdict::ArcFault).copied().unwrap_or(0);
    outcome(arc == 0, format!("{arc}/{REPS} ArcFault {counts:?}"))
}

// 8. repeated benchmark runs give byte-identical summaries.
fn determinism(first: &[u8], dir: &Path) -> Outcome {
    let (_, second, _) = run_benchmark(dir, REPS);
    outcome(first == second.as_slice(), format!("{} bytes compared", first.len()))
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let (rows, csv_bytes, elapsed) = run_benchmark(&tmp.path().join("first"), REPS);

    let results = [
        ("1 peak arc resistance equals extent", peak_resistance_identity()),
        ("2 zero-off interval fidelity", zero_off_interval()),
        ("3 benchmark classification table", classification_table(&rows, elapsed)),
        ("4 latency bound and noise ordering", latency_ordering(&rows)),
        ("5 decomposition numerics", havok_numerics()),
        ("6 noise robustness", noise_robustness()),
        ("7 load-switch false positives", load_switch_false_positives()),
        ("8 benchmark determinism", determinism(&csv_bytes, &tmp.path().join("second"))),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        println!("[{}] {name}: {}", if r.pass { "PASS" } else { "FAIL" }, r.detail);
        failed += usize::from(!r.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
