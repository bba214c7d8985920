use std::f64::consts::PI;

use havok_arc_core::arc_model::ArcParameters;
use havok_arc_core::detector::{find_deviation, DetectionThresholds};
use havok_arc_core::feeder::{simulate, FeederConfig, ScenarioKind, ScenarioSpec};
use havok_arc_core::havok::*;
use havok_arc_core::linalg::Matrix;

const DT: f64 = 5e-5;

fn sinusoid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 1.11 * (2.0 * PI * 50.0 * k as f64 * DT).sin()).collect()
}

fn gram_error(m: &Matrix) -> f64 {
    let g = m.transpose().mul(m);
    g.sub(&Matrix::identity(g.rows())).frobenius_norm()
}

/// Small deterministic generator for test noise.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }
}

#[test]
fn hankel_shape_for_full_trace() {
    let h = build_hankel(&vec![0.0; 10_000], 40).unwrap();
    assert_eq!((h.rows(), h.cols()), (40, 9961));
    let x: Vec<f64> = (0..200).map(|k| k as f64).collect();
    let h = build_hankel(&x, 7).unwrap();
    for i in 0..7 {
        for j in 0..194 {
            assert_eq!(h.entry(i, j), (i + j) as f64);
        }
    }
}

#[test]
fn constant_hankel_is_rank_one() {
    let h = build_hankel(&vec![0.7; 300], 20).unwrap();
    let svd = decompose(&h).unwrap();
    let want = 0.7 * ((20 * 281) as f64).sqrt();
    assert!((svd.s[0] - want).abs() < 1e-10 * want);
    assert!(svd.s[1..].iter().all(|s| *s < 1e-12 * want));
}

#[test]
fn zero_hankel_has_zero_spectrum() {
    let svd = decompose(&build_hankel(&vec![0.0; 300], 20).unwrap()).unwrap();
    assert!(svd.s.iter().all(|s| *s == 0.0));
    assert!(gram_error(&svd.u) < 1e-10);
    assert!(gram_error(&svd.v) < 1e-10);
}

#[test]
fn factors_are_orthonormal_and_reconstruct() {
    let mut rng = Lcg(5);
    let x: Vec<f64> = (0..2000).map(|_| rng.next()).collect();
    let h = build_hankel(&x, 40).unwrap();
    let svd = decompose(&h).unwrap();
    assert!(gram_error(&svd.u) < 1e-10);
    assert!(gram_error(&svd.v) < 1e-10);
    assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
    let full = h.to_matrix();
    let rel = full.sub(&svd.reconstruct(40)).frobenius_norm() / full.frobenius_norm();
    assert!(rel < 1e-10, "{rel}");
}

#[test]
fn truncation_error_is_the_tail_energy() {
    let mut rng = Lcg(17);
    let x: Vec<f64> = (0..600).map(|k| (k as f64 * 0.05).sin() + 0.1 * rng.next()).collect();
    let h = build_hankel(&x, 12).unwrap();
    let svd = decompose(&h).unwrap();
    let full = h.to_matrix();
    let mut last = 0.0;
    for r in 1..=12 {
        let approx = svd.reconstruct(r);
        let tail = svd.s[r..].iter().map(|s| s * s).sum::<f64>().sqrt();
        let err = full.sub(&approx).frobenius_norm();
        assert!((err - tail).abs() <= 1e-9 * full.frobenius_norm(), "r={r}");
        let energy = approx.frobenius_norm();
        assert!(energy >= last);
        last = energy;
    }
}

#[test]
fn sign_convention_makes_u_peaks_positive() {
    let h = build_hankel(&sinusoid(1000), 40).unwrap();
    let svd = decompose(&h).unwrap();
    for j in 0..40 {
        let col = svd.u.col(j);
        let big = col.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        assert!(big > 0.0);
    }
    assert_eq!(svd, decompose(&h).unwrap());
}

#[test]
fn sinusoid_energy_sits_in_two_modes() {
    let h = build_hankel(&sinusoid(10_000), 40).unwrap();
    let s = decompose(&h).unwrap().s;
    let total: f64 = s.iter().sum();
    assert!((s[0] + s[1]) / total >= 0.99);
}

#[test]
fn shifted_embedding_stays_in_the_leading_subspace() {
    let x = sinusoid(4000);
    let h = build_hankel(&x, 40).unwrap();
    let svd = decompose(&h).unwrap();
    let r = select_rank(&svd.s, 40, h.cols());
    let shifted = build_hankel(&x[1..], 40).unwrap().to_matrix();
    let ur = Matrix::from_columns(&(0..r).map(|j| svd.u.col(j).to_vec()).collect::<Vec<_>>());
    let projected = ur.mul(&ur.transpose().mul(&shifted));
    let rel = shifted.sub(&projected).frobenius_norm() / shifted.frobenius_norm();
    assert!(rel < 0.05, "{rel}");
}

#[test]
fn rank_three_signal_is_recovered() {
    // three independent rows plus 1e-9 noise
    let (q, p) = (40, 2000);
    let mut rng = Lcg(99);
    let basis: Vec<Vec<f64>> = (0..3)
        .map(|l| (0..p).map(|j| ((l + 1) as f64 * 0.013 * j as f64 + l as f64).sin()).collect())
        .collect();
    let weights: Vec<[f64; 3]> = (0..q).map(|_| [rng.next(), rng.next(), rng.next()]).collect();
    let m = Matrix::from_fn(p, q, |j, i| {
        (0..3).map(|l| weights[i][l] * basis[l][j]).sum::<f64>() + 1e-9 * rng.next()
    });
    let svd = havok_arc_core::linalg::svd_of_transpose(m).unwrap();
    assert_eq!(select_rank(&svd.s, q, p), 3);
}

#[test]
fn differentiator_is_exact_on_cubics() {
    let dt = 0.01;
    let f = Matrix::from_fn(200, 1, |i, _| (i as f64 * dt - 1.0).powi(3));
    let d = differentiate(&f, dt).unwrap();
    for (k, v) in d.values.col(0).iter().enumerate() {
        let t = (k + d.trim) as f64 * dt - 1.0;
        assert!((v - 3.0 * t * t).abs() < 1e-10, "{v} vs {}", 3.0 * t * t);
    }
}

#[test]
fn differentiator_error_on_sine() {
    let dt = 0.01;
    let f = Matrix::from_fn(1000, 1, |i, _| (i as f64 * dt).sin());
    let d = differentiate(&f, dt).unwrap();
    let worst = d
        .values
        .col(0)
        .iter()
        .enumerate()
        .map(|(k, v)| (v - ((k + d.trim) as f64 * dt).cos()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

/// v(t) = exp(A t) v0 for A = [[-1, 2, 0], [-2, -1, 0], [0, 0, -0.5]].
fn damped_rotation(t: f64) -> [f64; 3] {
    let e = (-t).exp();
    let (c, s) = ((2.0 * t).cos(), (2.0 * t).sin());
    [e * (c + 0.5 * s), e * (-s + 0.5 * c), 0.8 * (-0.5 * t).exp()]
}

#[test]
fn regression_recovers_known_dynamics() {
    let dt = 1e-3;
    let n = 4000;
    let states: Vec<[f64; 3]> = (0..n).map(|k| damped_rotation(k as f64 * dt)).collect();
    let v = Matrix::from_fn(n, 3, |k, c| states[k][c]);
    let dv = differentiate(&v, dt).unwrap();
    let model = identify(&v, &dv, &vec![0.0; n], dt).unwrap();
    let truth = Matrix::from_columns(&[vec![-1.0, -2.0, 0.0], vec![2.0, -1.0, 0.0], vec![0.0, 0.0, -0.5]]);
    let rel = model.a.sub(&truth).frobenius_norm() / truth.frobenius_norm();
    assert!(rel < 1e-3, "{rel}");
    assert_eq!(model.b, vec![0.0; 3]);
    assert_eq!(model.rank, 4);
}

#[test]
fn regression_recovers_forcing_coupling() {
    // dv/dt = A v + B w(t), integrated with fine-step RK4
    let a = [[-3.0, 1.0], [0.0, -2.0]];
    let b = [0.7, -1.3];
    let w = |t: f64| (5.0 * t).sin() + 0.3 * (11.0 * t).cos();
    let rhs = |t: f64, x: [f64; 2]| {
        [
            a[0][0] * x[0] + a[0][1] * x[1] + b[0] * w(t),
            a[1][0] * x[0] + a[1][1] * x[1] + b[1] * w(t),
        ]
    };
    let (dt, sub, n) = (1e-3, 20, 3000);
    let h = dt / sub as f64;
    let mut x = [0.4, -0.2];
    let mut states = Vec::with_capacity(n);
    for k in 0..n {
        states.push(x);
        for s in 0..sub {
            let t = k as f64 * dt + s as f64 * h;
            let k1 = rhs(t, x);
            let k2 = rhs(t + h / 2.0, [x[0] + h / 2.0 * k1[0], x[1] + h / 2.0 * k1[1]]);
            let k3 = rhs(t + h / 2.0, [x[0] + h / 2.0 * k2[0], x[1] + h / 2.0 * k2[1]]);
            let k4 = rhs(t + h, [x[0] + h * k3[0], x[1] + h * k3[1]]);
            for i in 0..2 {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    }
    let v = Matrix::from_fn(n, 2, |k, c| states[k][c]);
    let forcing: Vec<f64> = (0..n).map(|k| w(k as f64 * dt)).collect();
    let model = identify(&v, &differentiate(&v, dt).unwrap(), &forcing, dt).unwrap();
    for i in 0..2 {
        assert!((model.b[i] - b[i]).abs() < 1e-3 * b[i].abs(), "{:?}", model.b);
        for j in 0..2 {
            assert!((model.a[(i, j)] - a[i][j]).abs() < 1e-3);
        }
    }
}

#[test]
fn collinear_regressors_are_rejected() {
    let n = 100;
    let col: Vec<f64> = (0..n).map(|k| (k as f64 * 0.1).sin()).collect();
    let v = Matrix::from_columns(&[col.clone(), col.clone()]);
    let dv = differentiate(&v, 0.1).unwrap();
    assert!(matches!(
        identify(&v, &dv, &col, 0.1),
        Err(havok_arc_core::Error::RankDeficient { .. })
    ));
}

#[test]
fn sinusoid_forcing_is_quiet() {
    let model = analyze(&sinusoid(10_000), DT, 40).unwrap();
    let f = forcing_signal(&model);
    let norm = f.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((norm - 1.0).abs() < 1e-10);
    let mut mags: Vec<f64> = f.values.iter().map(|v| v.abs()).collect();
    let max = mags.iter().copied().fold(0.0, f64::max);
    mags.sort_by(f64::total_cmp);
    let median = mags[mags.len() / 2];
    assert!(max / median < 20.0, "{max} / {median}");
}

#[test]
fn forcing_timestamps_are_uniform() {
    let model = analyze(&sinusoid(2000), DT, 40).unwrap();
    let f = forcing_signal(&model);
    let times: Vec<f64> = f.times().collect();
    assert_eq!(times.len(), 2000 - 40 + 1);
    for w in times.windows(2) {
        assert!(w[1] > w[0]);
        assert!((w[1] - w[0] - DT).abs() < 1e-12);
    }
}

#[test]
fn arc_burst_does_not_precede_the_fault() {
    let c = FeederConfig::default();
    let spec = ScenarioSpec::arc(ScenarioKind::LowCurrentArc, ArcParameters::new(5000.0, 0.00413, 0.2, 1000.0));
    let trace = simulate(&c, &spec, 0).unwrap();
    let model = analyze(&trace.samples, trace.dt, 40).unwrap();
    let f = forcing_signal(&model);
    let norm = f.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((norm - 1.0).abs() < 1e-10);
    let t = find_deviation(&f, &DetectionThresholds::default()).unwrap().unwrap();
    assert!(t >= 0.2, "{t}");
}

#[test]
fn decomposition_is_deterministic() {
    let c = FeederConfig::default();
    let spec = ScenarioSpec::arc(ScenarioKind::ArcDrySoil, ArcParameters::new(4708.0, 0.007, 0.2, 50.0));
    let trace = simulate(&c, &spec, 0).unwrap();
    assert_eq!(analyze(&trace.samples, trace.dt, 40).unwrap(), analyze(&trace.samples, trace.dt, 40).unwrap());
}
