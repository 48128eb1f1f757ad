//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pothole_core::imaging::{save_mask, BinaryImage};
use pothole_core::pipeline::{
    detect_potholes, evaluate, load_dataset, run_batch, Confusion, DatasetLayout, PipelineConfig,
};
use pothole_core::road::{fit_model, fit_roll_angle, road_samples, roll_energy, transform_disparity, RoadPixelSample};
use pothole_core::segmentation::{otsu_threshold, Histogram};
use pothole_core::surface::{
    fit_quadratic_surface, normal_equations_power_sums, ransac_fit, Conditioning, QuadraticSurface, RansacConfig,
    SurfaceFrame, SurfacePoint,
};
use pothole_core::synth::{
    detection_suite, generate_scene, oracle_planar_fit, oracle_quadratic_fit, GaussianNoise, Pothole, Profile,
    SceneSpec,
};

enum Verdict {
    Pass,
    Fail,
    /// Reported only; never fails the run.
    Info,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

fn gate(ok: bool, detail: String) -> Outcome {
    Outcome {
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        detail,
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rel_vec(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b)
}

// 1. Roll-angle oracle identity.
fn roll_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0001);
    let sigmas = [0.0, 0.1, 0.5];
    let (mut worst_e, mut worst_phi) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let sigma = sigmas[i % 3];
        let phi: f64 = rng.random_range(-0.5..0.5);
        let kappa = rng.random_range(5.0..60.0);
        let vk = rng.random_range(0.02..0.3);
        let mut noise = GaussianNoise::new(rng.next_u64());
        let samples: Vec<RoadPixelSample> = (0..200)
            .map(|_| {
                let u: f64 = rng.random_range(0.0..640.0);
                let v: f64 = rng.random_range(0.0..480.0);
                let g = vk * (phi.cos() * v - phi.sin() * u + kappa) + sigma * noise.sample();
                RoadPixelSample::new(u, v, g)
            })
            .collect();
        let phi_hat = fit_roll_angle(&samples).unwrap();
        let e = roll_energy(phi_hat, &samples).unwrap();
        let oracle = oracle_planar_fit(&samples).unwrap();
        // Noise-free residuals are zero, so compare against the energy scale instead.
        let scale = if sigma > 0.0 {
            oracle.rss
        } else {
            let mean = samples.iter().map(|s| s.g).sum::<f64>() / 200.0;
            samples.iter().map(|s| (s.g - mean).powi(2)).sum()
        };
        worst_e = worst_e.max(rel(e, oracle.rss, scale));
        worst_phi = worst_phi.max((phi_hat - oracle.roll()).abs());
    }
    let t = start.elapsed();
    gate(
        worst_e <= 1e-9 && worst_phi <= 1e-6 && within(t, 5.0),
        format!(
            "energy rel err {worst_e:.2e} (tol 1e-9), |dphi| {worst_phi:.2e} rad (tol 1e-6), {:.2}s (limit 5s)",
            t.as_secs_f64()
        ),
    )
}

// 2. Model recovery over the parameter grid.
fn model_recovery() -> Outcome {
    let start = Instant::now();
    let phis = [-0.1, 0.0, 0.05, 0.1];
    // A zero true roll is compared against the smallest nonzero grid magnitude.
    let phi_scale = |p: f64| if p == 0.0 { 0.05 } else { p.abs() };
    let mut worst = [0.0f64; 2];
    let mut seed = 100;
    for &phi in &phis {
        for &kappa in &[10.0, 30.0] {
            for &vk in &[0.02, 0.05] {
                for (k, sigma) in [0.0, 0.5].into_iter().enumerate() {
                    // the noisy intercept needs the larger image to pin kappa to 1 %
                    let (w, h) = if sigma > 0.0 { (2048, 1536) } else { (1024, 768) };
                    let mut spec = SceneSpec::road(w, h, phi, kappa, vk);
                    spec.noise_sigma = sigma;
                    spec.seed = seed;
                    spec.horizon_margin = Some(2.5);
                    seed += 1;
                    let scene = generate_scene(&spec).unwrap();
                    let m = fit_model(&road_samples(&scene.disparity, 1)).unwrap();
                    let err = rel(m.phi, phi, phi_scale(phi))
                        .max(rel(m.kappa, kappa, kappa))
                        .max(rel(m.varkappa, vk, vk));
                    worst[k] = worst[k].max(err);
                }
            }
        }
    }
    let t = start.elapsed();
    gate(
        worst[0] <= 1e-6 && worst[1] <= 1e-2 && within(t, 10.0),
        format!(
            "worst rel err noise-free {:.2e} (tol 1e-6), sigma=0.5 {:.2e} (tol 1e-2), {:.2}s (limit 10s)",
            worst[0],
            worst[1],
            t.as_secs_f64()
        ),
    )
}

// 3. Transformation flattening on rolled scenes.
fn flattening() -> Outcome {
    let sigma = 0.1;
    let mut worst_after = 0.0f64;
    let mut worst_before = f64::INFINITY;
    let mut seed = 300;
    for &phi in &[0.05, 0.1] {
        for &vk in &[0.05, 0.1] {
            let (w, h) = (1024, 768);
            let mut spec = SceneSpec::road(w, h, phi, 110.0, vk);
            spec.noise_sigma = sigma;
            spec.seed = seed;
            seed += 1;
            spec.potholes = vec![
                Pothole {
                    center: (300.0, 500.0),
                    radius: (400.0 / std::f64::consts::PI).sqrt(),
                    depth: 6.0,
                    profile: Profile::Flat,
                },
                Pothole {
                    center: (700.0, 620.0),
                    radius: (900.0 / std::f64::consts::PI).sqrt(),
                    depth: 6.0,
                    profile: Profile::Flat,
                },
            ];
            let scene = generate_scene(&spec).unwrap();
            let disp = &scene.disparity;
            let road = |u: usize, v: usize| disp.is_valid(u, v) && !scene.gt_mask.get(u, v);

            for v in 0..h {
                let row: Vec<f64> = (0..w).filter(|&u| road(u, v)).map(|u| disp.get(u, v).unwrap()).collect();
                worst_before = worst_before.min(std_dev(&row));
            }
            let m = fit_model(&road_samples(disp, 1)).unwrap();
            let t = transform_disparity(disp, &m);
            let flat: Vec<f64> = (0..h)
                .flat_map(|v| (0..w).map(move |u| (u, v)))
                .filter(|&(u, v)| road(u, v))
                .map(|(u, v)| t.image.get(u, v))
                .collect();
            worst_after = worst_after.max(std_dev(&flat));
        }
    }
    gate(
        worst_after <= 1.1 * sigma && worst_before >= 5.0 * sigma,
        format!(
            "max road std after {:.4} (<= {:.2}), min per-row std before {:.4} (>= {:.2})",
            worst_after,
            1.1 * sigma,
            worst_before,
            5.0 * sigma
        ),
    )
}

fn std_dev(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

// 4. Otsu against the exhaustive split search in exact arithmetic.
fn otsu_exact() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0004);
    let mut mismatches = 0;
    let mut cases = 0;
    while cases < 1000 {
        let bins = rng.random_range(2..=300usize);
        let mut counts: Vec<u64> = (0..bins)
            .map(|_| {
                if rng.random_bool(0.3) {
                    0
                } else if rng.random_bool(0.1) {
                    rng.random_range(0..1_000_000_000)
                } else {
                    rng.random_range(0..1000)
                }
            })
            .collect();
        if cases % 4 == 0 {
            // mirrored histograms produce exact ties
            for i in 0..bins / 2 {
                counts[bins - 1 - i] = counts[i];
            }
        }
        if counts.iter().filter(|&&c| c > 0).count() < 2 {
            continue;
        }
        cases += 1;
        let hist = Histogram::from_counts(counts.clone(), (0.0, bins as f64)).unwrap();
        let got = otsu_threshold(&hist).unwrap().bin;
        if got != exhaustive_otsu(&counts) {
            mismatches += 1;
        }
    }
    gate(mismatches == 0, format!("{mismatches} mismatches in {cases} histograms (tol 0)"))
}

fn exhaustive_otsu(counts: &[u64]) -> usize {
    let big = |x: u64| BigRational::from_integer(BigInt::from(x));
    let total: u64 = counts.iter().sum();
    let mut best: Option<(BigRational, usize)> = None;
    for t in 1..counts.len() {
        let n0: u64 = counts[..t].iter().sum();
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s0: u64 = counts[..t].iter().enumerate().map(|(b, &c)| b as u64 * c).sum();
        let s1: u64 = counts[t..].iter().enumerate().map(|(b, &c)| (b + t) as u64 * c).sum();
        let diff = big(s0) / big(n0) - big(s1) / big(n1);
        let between = big(n0) * big(n1) * diff.clone() * diff;
        if best.as_ref().is_none_or(|(b, _)| between > *b) {
            best = Some((between, t));
        }
    }
    best.unwrap().1
}

// 5. Quadratic-fit dual-path agreement.
fn quadratic_dual_path() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0005);
    let (mut worst_agree, mut worst_exact) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let a: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let noisy = i % 2 == 0;
        let n = rng.random_range(50..500);
        let pts: Vec<SurfacePoint> = (0..n)
            .map(|_| {
                let x: f64 = rng.random_range(-2.0..2.0);
                let z: f64 = rng.random_range(1.0..5.0);
                let e = if noisy { rng.random_range(-0.05..0.05) } else { 0.0 };
                let y = QuadraticSurface::from_coefficients(a, SurfaceFrame::MetricXZ).evaluate(x, z) + e;
                SurfacePoint::new(x, z, y)
            })
            .collect();
        let design = fit_quadratic_surface(&pts, SurfaceFrame::MetricXZ).unwrap().a;
        let cond = Conditioning::from_points(&pts);
        let local: Vec<SurfacePoint> = pts.iter().map(|p| cond.apply(p)).collect();
        let sums = cond.decondition(&normal_equations_power_sums(&local).solve().unwrap());
        let oracle = oracle_quadratic_fit(&pts).unwrap();
        worst_agree = worst_agree
            .max(rel_vec(&design, &oracle))
            .max(rel_vec(&sums, &oracle))
            .max(rel_vec(&design, &sums));
        if !noisy {
            for fit in [&design, &sums, &oracle] {
                worst_exact = worst_exact.max(rel_vec(fit, &a));
            }
        }
    }
    gate(
        worst_agree <= 1e-8 && worst_exact <= 1e-10,
        format!("worst path disagreement {worst_agree:.2e} (tol 1e-8), exact recovery {worst_exact:.2e} (tol 1e-10)"),
    )
}

// 6. RANSAC robustness.
fn ransac_robustness() -> Outcome {
    let truth = [1.5, 0.02, -0.01, 0.003, 0.0004, -0.001];
    let surface = QuadraticSurface::from_coefficients(truth, SurfaceFrame::MetricXZ);
    let (mut good, mut deterministic) = (0, true);
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let pts: Vec<SurfacePoint> = (0..N_RANSAC)
            .map(|k| {
                let x: f64 = rng.random_range(-3.0..3.0);
                let z: f64 = rng.random_range(4.0..20.0);
                let offset = if k % 10 < 3 { rng.random_range(-0.5..0.5) } else { 0.0 };
                SurfacePoint::new(x, z, surface.evaluate(x, z) + offset)
            })
            .collect();
        let cfg = RansacConfig {
            inlier_threshold: 0.04,
            confidence: 0.999,
            seed,
            ..RansacConfig::default()
        };
        let fit = ransac_fit(&pts, SurfaceFrame::MetricXZ, &cfg).unwrap();
        deterministic &= ransac_fit(&pts, SurfaceFrame::MetricXZ, &cfg).unwrap() == fit;
        let err = rel_vec(&fit.surface.a, &truth);
        if err <= 1e-3 {
            good += 1;
        }
        worst = worst.max(err);
    }
    gate(
        good >= 19 && deterministic,
        format!(
            "{good}/20 runs within 1e-3 relative coefficient error (need 19), worst {worst:.2e}, deterministic: {deterministic}"
        ),
    )
}

/// Outliers that land inside the band bias the refit roughly as 1/√N.
const N_RANSAC: usize = 5000;

// 7. End-to-end synthetic detection.
fn end_to_end() -> Outcome {
    let start = Instant::now();
    let specs = detection_suite(10, 2024, 0.05);
    let cfg = PipelineConfig::default();
    let dir = tempfile::tempdir().unwrap();
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let (single, multi) = (pool(1), pool(4));
    let mut ious = Vec::new();
    let mut identical = true;
    let mut split = true;
    for (i, spec) in specs.iter().enumerate() {
        let scene = generate_scene(spec).unwrap();
        let mut bytes = Vec::new();
        for (k, p) in [&single, &multi, &multi].into_iter().enumerate() {
            let det = p.install(|| detect_potholes(&scene.disparity, &cfg)).unwrap();
            let path = dir.path().join(format!("{i}_{k}.png"));
            save_mask(&det.mask, &path).unwrap();
            bytes.push(std::fs::read(&path).unwrap());
            if k == 0 {
                ious.push(evaluate(det.mask.damaged(), &scene.gt_mask).unwrap().metrics.iou);
                split &= det.mask.regions().len() == 2;
            }
        }
        identical &= bytes.windows(2).all(|w| w[0] == w[1]);
    }
    let mean = ious.iter().sum::<f64>() / ious.len() as f64;
    let min = ious.iter().copied().fold(1.0, f64::min);
    let t = start.elapsed();
    gate(
        mean >= 0.80 && identical && within(t, 60.0),
        format!(
            "mean IoU {mean:.4} (>= 0.80, min {min:.4}), two components per scene: {split}, byte-identical across runs/threads: {identical}, {:.2}s (limit 60s)",
            t.as_secs_f64()
        ),
    )
}

// 8. Metrics correctness.
fn metrics() -> Outcome {
    let mut ok = true;
    let m = |bits: &[u8], w: usize| BinaryImage::new(w, bits.len() / w, bits.iter().map(|&b| b != 0).collect()).unwrap();

    let same = m(&[1, 0, 1, 1, 0, 0], 3);
    let r = evaluate(&same, &same).unwrap().metrics;
    ok &= [r.precision, r.recall, r.f_score, r.iou] == [1.0; 4];

    let gt = BinaryImage::from_fn(4, 4, |u, _| u < 2);
    let pred = BinaryImage::from_fn(4, 4, |u, _| u >= 2);
    let r = evaluate(&pred, &gt).unwrap();
    ok &= r.confusion.tp == 0 && r.metrics.f_score == 0.0 && r.metrics.iou == 0.0;

    let gt = m(&[1, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0], 4);
    let pred = m(&[1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0], 4);
    let r = evaluate(&pred, &gt).unwrap();
    ok &= r.confusion == Confusion { tp: 2, fp: 1, fn_: 1, tn: 12 };
    ok &= r.metrics.precision == 2.0 / 3.0 && r.metrics.recall == 2.0 / 3.0;
    ok &= (r.metrics.f_score - 2.0 / 3.0).abs() < 1e-15 && r.metrics.iou == 0.5;

    let empty = BinaryImage::empty(4, 4);
    let r = evaluate(&empty, &empty).unwrap().metrics;
    ok &= [r.precision, r.recall, r.f_score, r.iou] == [1.0; 4];
    let r = evaluate(&empty, &gt).unwrap().metrics;
    ok &= r.recall == 0.0 && r.precision == 1.0 && r.f_score == 0.0;
    let hand = ok;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0008);
    let mut fuzz_ok = 0;
    for _ in 0..1000 {
        let (w, h) = (rng.random_range(1..64), rng.random_range(1..64));
        let (p1, p2) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let a = BinaryImage::from_fn(w, h, |_, _| rng.random_bool(p1));
        let b = BinaryImage::from_fn(w, h, |_, _| rng.random_bool(p2));
        let r = evaluate(&a, &b).unwrap();
        if r.confusion.total() == (w * h) as u64 {
            fuzz_ok += 1;
        }
    }
    gate(
        hand && fuzz_ok == 1000,
        format!("hand-counted cases exact: {hand}, count identity held on {fuzz_ok}/1000 fuzzed pairs"),
    )
}

// 9. Real-data smoke test, reported only.
fn real_data() -> Outcome {
    let candidates = [
        std::env::var("POTHOLE_DATASET").ok(),
        Some(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/stereo_pothole_datasets").to_string()),
    ];
    let Some(root) = candidates.into_iter().flatten().find(|p| std::path::Path::new(p).is_dir()) else {
        return Outcome {
            verdict: Verdict::Info,
            detail: "no local stereo pothole dataset found (set POTHOLE_DATASET); skipped".into(),
        };
    };
    let detail = match load_dataset(&root, DatasetLayout::StereoPotholes) {
        Ok(listing) => {
            let out = tempfile::tempdir().unwrap();
            match run_batch(&listing.samples, &PipelineConfig::default(), out.path()) {
                Ok(o) => {
                    let m = o.report.mean();
                    format!(
                        "{root}: {} samples, {} failures, mean P {:.4} R {:.4} F {:.4} IoU {:.4}",
                        listing.samples.len(),
                        o.failures.len(),
                        m.precision,
                        m.recall,
                        m.f_score,
                        m.iou
                    )
                }
                Err(e) => format!("{root}: batch failed: {e}"),
            }
        }
        Err(e) => format!("{root}: could not list dataset: {e}"),
    };
    Outcome {
        verdict: Verdict::Info,
        detail,
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 roll-angle oracle identity", roll_oracle),
        ("2 model recovery", model_recovery),
        ("3 transformation flattening", flattening),
        ("4 Otsu exactness", otsu_exact),
        ("5 quadratic-fit dual-path agreement", quadratic_dual_path),
        ("6 RANSAC robustness", ransac_robustness),
        ("7 end-to-end synthetic detection", end_to_end),
        ("8 metrics correctness", metrics),
        ("9 real-data smoke test", real_data),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            gate(false, format!("panicked: {msg}"))
        });
        let tag = match outcome.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                failed += 1;
                "FAIL"
            }
            Verdict::Info => "INFO",
        };
        println!("{tag} criterion {name}: {}", outcome.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
