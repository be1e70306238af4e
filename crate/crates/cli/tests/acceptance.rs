//! Acceptance suite. Runs as a plain binary (`harness = false`) and prints one PASS/FAIL
//! line per criterion; any failure makes the process exit non-zero.
//!
//! Set `AVFRONTIER_REFERENCE_METRICS` to a real-data metrics table to enable the optional
//! reference-means check.

use std::path::Path;
use std::time::Instant;

use avfrontier::frontier::{
    dominates, fit_frontier, headroom_report, headroom_to, pareto_set, FrontierConfig, HeadroomMode,
};
use avfrontier::ingest::AgentType;
use avfrontier::interaction::LaneContext;
use avfrontier::metrics::{
    detect_decel_events, estimate_delay_samples, fit_gpd_exceedances, fit_spacing_model, jerk_flags,
    read_metrics_table, risk_from_survival, shifted_sample, stability_gain, tail_exceedance_prob, InteractionFeatures,
    RegressorKind, SpacingFitConfig, TailModel, DECEL_MIN_FRAMES, DECEL_THRESHOLD, DEFAULT_A_MIN, JERK_THRESHOLD,
};
use avfrontier::objectives::{build_objectives, ObjectivesConfig};
use avfrontier::stats::normal_sf;
use avfrontier_cli::{cmd_synth, run_all, validate_chain, Run, RunConfig, StageManifest};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;
/// Decel magnitudes and the expected `(start, len)` events.
type EventCase = (Vec<f64>, Vec<(usize, usize)>);
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn brute_force_pareto(p: &[[f64; 3]]) -> Vec<usize> {
    (0..p.len()).filter(|&i| !(0..p.len()).any(|j| dominates(&p[j], &p[i]))).collect()
}

fn uniform(n: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect()
}

/// Gaussian clusters, quantized to two decimals so that ties and exact duplicates occur.
fn clustered(n: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    let centres: Vec<[f64; 3]> = (0..5).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
    let eps = Normal::new(0.0, 0.05).unwrap();
    (0..n)
        .map(|_| {
            let c = centres[rng.random_range(0..centres.len())];
            c.map(|v| ((v + eps.sample(rng)).clamp(0.0, 1.0) * 100.0).round() / 100.0)
        })
        .collect()
}

fn pareto_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let sizes = [100, 1000, 2000];
    let start = Instant::now();
    for i in 0..50 {
        let n = sizes[i % 3];
        let pts = if i % 2 == 0 { uniform(n, &mut rng) } else { clustered(n, &mut rng) };
        let got = pareto_set(&pts).indices;
        if got != brute_force_pareto(&pts) {
            return Err(format!("instance {i} (n = {n}) differs from brute force"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 10.0, format!("50/50 instances exact, {secs:.2} s"), format!("exact but took {secs:.2} s"))
}

fn dominance_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    // values on a coarse grid so that dominance and ties are frequent
    let mut draw = || [0; 3].map(|_| rng.random_range(0..3) as f64 * 0.5);
    let mut dominating = 0;
    for _ in 0..10_000 {
        let (a, b, c) = (draw(), draw(), draw());
        if dominates(&a, &a) {
            return Err(format!("reflexive at {a:?}"));
        }
        if dominates(&a, &b) && dominates(&b, &a) {
            return Err(format!("not antisymmetric at {a:?}, {b:?}"));
        }
        if dominates(&a, &b) && dominates(&b, &c) && !dominates(&a, &c) {
            return Err(format!("not transitive at {a:?}, {b:?}, {c:?}"));
        }
        dominating += dominates(&a, &b) as usize;
    }
    let transforms: [fn(f64) -> f64; 4] = [|x| x.powi(3) + 2.0 * x, |x| x.exp(), |x| (x + 1.0).ln(), |x| 5.0 * x - 3.0];
    for i in 0..10 {
        let n = 200 + 100 * i;
        let pts = if i % 2 == 0 { uniform(n, &mut rng) } else { clustered(n, &mut rng) };
        let axis = i % 3;
        let f = transforms[i % transforms.len()];
        let mapped: Vec<[f64; 3]> = pts
            .iter()
            .map(|p| {
                let mut q = *p;
                q[axis] = f(q[axis]);
                q
            })
            .collect();
        if pareto_set(&pts).is_pareto != pareto_set(&mapped).is_pareto {
            return Err(format!("membership changed under transform {i}"));
        }
    }
    Ok(format!("10^4 triples ({dominating} dominating pairs), 10/10 transformed instances invariant"))
}

fn risk_spot_checks() -> Outcome {
    let m0 = risk_from_survival(0.5).value;
    let m1 = risk_from_survival(0.5f64.powf(0.1)).value;
    let grid: Vec<f64> = (1..=99).map(|k| risk_from_survival(k as f64 / 100.0).value).collect();
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    check(
        m0 == 0.0 && (m1 - 1.0).abs() <= 1e-9 && increasing,
        format!("M(0.5) = {m0}, M(0.5^0.1) - 1 = {:.1e}, strictly increasing on 99 points", m1 - 1.0),
        format!("M(0.5) = {m0}, M(0.5^0.1) = {m1}, increasing = {increasing}"),
    )
}

fn gpd_sample(n: usize, xi: f64, beta: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u: f64 = 1.0 - rng.random::<f64>();
            if xi == 0.0 {
                -beta * u.ln()
            } else {
                beta * (u.powf(-xi) - 1.0) / xi
            }
        })
        .collect()
}

fn gpd_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut detail = Vec::new();
    let mut ok = true;
    for (xi, beta) in [(0.2, 0.5), (0.0, 1.0), (-0.2, 0.8)] {
        let mut hits = 0;
        for _ in 0..20 {
            let y = gpd_sample(5000, xi, beta, &mut rng);
            let (xh, bh) = fit_gpd_exceedances(&y).map_err(|e| format!("fit failed: {e}"))?;
            hits += ((xh - xi).abs() <= 0.1 && (bh / beta - 1.0).abs() <= 0.15) as usize;
        }
        ok &= hits >= 18;
        detail.push(format!("({xi}, {beta}): {hits}/20"));
    }
    let tail = |xi: f64| TailModel { percentile: 97.0, u: 1.3, xi, beta: 0.7, n_exceedances: 100 };
    let at_u = [0.3, 0.0, -0.3].iter().all(|&xi| tail_exceedance_prob(1.3, &tail(xi)).unwrap() == 1.0);
    let mut limit_err: f64 = 0.0;
    for xi in [0.0, 1e-10, -1e-10, 1e-12] {
        for k in 0..50 {
            let excess = 0.1 * k as f64;
            let exp_form = (-excess / 0.7).exp();
            limit_err = limit_err.max((tail_exceedance_prob(1.3 + excess, &tail(xi)).unwrap() - exp_form).abs());
        }
    }
    ok &= at_u && limit_err <= 1e-9;
    let msg = format!("{}; P(u) = 1: {at_u}; xi -> 0 limit error {limit_err:.1e}", detail.join(", "));
    check(ok, msg.clone(), msg)
}

fn spacing_pairs(n: usize, seed: u64) -> Vec<(InteractionFeatures, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(0.0, 1.0).unwrap();
    (0..n)
        .map(|_| {
            let v = rng.random_range(0.0..20.0);
            let dv = rng.random_range(0.0..5.0);
            let x = InteractionFeatures {
                s_ij: 0.0,
                rho_ij: rng.random_range(-180.0..180.0),
                rel_speed: dv,
                ego_speed: v,
                agent_type: AgentType::Car,
                lane_context: LaneContext::Same,
                dataset_context: "synthetic".into(),
            };
            let s = (spacing_mu(v, dv) + SPACING_SIGMA * z.sample(&mut rng)).exp();
            (x, s)
        })
        .collect()
}

const SPACING_SIGMA: f64 = 0.3;

fn spacing_mu(v: f64, dv: f64) -> f64 {
    2.0 + 0.1 * v + 0.04 * dv
}

fn spacing_recovery() -> Outcome {
    let data = spacing_pairs(20_000, 404);
    let mut lines = Vec::new();
    let mut ok = true;
    for kind in [RegressorKind::Network, RegressorKind::Linear] {
        let cfg = SpacingFitConfig { regressor: kind, seed: 7, ..Default::default() };
        let model = fit_spacing_model(&data, &cfg).map_err(|e| format!("{kind:?} fit failed: {e}"))?;
        let mut worst: f64 = 0.0;
        for i in 0..10 {
            let v = 1.0 + 2.0 * i as f64;
            for j in 0..10 {
                let s = 5.0 + 6.0 * j as f64;
                let x = InteractionFeatures {
                    s_ij: s,
                    rho_ij: 0.0,
                    rel_speed: 2.5,
                    ego_speed: v,
                    agent_type: AgentType::Car,
                    lane_context: LaneContext::Same,
                    dataset_context: "synthetic".into(),
                };
                let truth = normal_sf((s.ln() - spacing_mu(v, 2.5)) / SPACING_SIGMA);
                worst = worst.max((model.survival(s, &x) - truth).abs());
            }
        }
        ok &= worst <= 0.05;
        lines.push(format!("{kind:?}: max |dP| {worst:.3}, holdout MAE {:.2} m", model.holdout_mae));
    }
    let msg = lines.join("; ");
    check(ok, msg.clone(), msg)
}

fn smooth_signal(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let z = Normal::new(0.0, 1.0).unwrap();
    let mut x = 0.0;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        x = 0.9 * x + z.sample(rng);
        out.push(x);
    }
    out
}

fn delay_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let (w, max_lag) = (50, 30);
    let mut worst_noisy = 0i64;
    for shift in [0usize, 3, 7, 15] {
        for rep in 0..10 {
            let base = smooth_signal(400, &mut rng);
            let n = base.len();
            // follower sample k equals leader sample k - shift
            let leader = base[n - w - max_lag..].to_vec();
            let follower: Vec<f64> = (n - w..n).map(|k| base[k - shift]).collect();
            let got = estimate_delay_samples(&leader, &follower, w, max_lag);
            if got != Some(shift) {
                return Err(format!("noise-free shift {shift} (rep {rep}) estimated as {got:?}"));
            }
            let power = base.iter().map(|v| v * v).sum::<f64>() / n as f64;
            let noise = Normal::new(0.0, (power / 10.0).sqrt()).unwrap();
            let noisy_l: Vec<f64> = leader.iter().map(|v| v + noise.sample(&mut rng)).collect();
            let noisy_f: Vec<f64> = follower.iter().map(|v| v + noise.sample(&mut rng)).collect();
            let got = estimate_delay_samples(&noisy_l, &noisy_f, w, max_lag).map(|g| g as i64 - shift as i64);
            match got {
                Some(e) if e.abs() <= 1 => worst_noisy = worst_noisy.max(e.abs()),
                other => return Err(format!("SNR 10 shift {shift} (rep {rep}) error {other:?}")),
            }
        }
    }
    Ok(format!("shifts {{0, 3, 7, 15}} exact noise-free; worst SNR-10 error {worst_noisy} sample(s) over 40 trials"))
}

fn stability_gain_check() -> Outcome {
    let dt = 0.1;
    let a_ego = |t: f64| 0.8 + 0.3 * t;
    let mut worst: f64 = 0.0;
    for tau in [0.37, 0.5, 1.23, 2.05] {
        // follower series chosen so that a_F(t - tau) reproduces a_ego(t)
        let follower: Vec<f64> = (0..200).map(|k| a_ego(k as f64 * dt + tau)).collect();
        for idx in 30..200 {
            let af = shifted_sample(&follower, idx, tau, dt).ok_or("shifted sample out of range")?;
            let g = stability_gain(af, a_ego(idx as f64 * dt), DEFAULT_A_MIN).ok_or("gain undefined")?;
            worst = worst.max((g - 1.0).abs());
        }
    }
    let guard = [0.0, 0.05, -0.099_999, 0.099_999].iter().all(|&a| stability_gain(0.5, a, DEFAULT_A_MIN).is_none())
        && stability_gain(0.5, 0.1, DEFAULT_A_MIN).is_some();
    check(
        worst <= 1e-6 && guard,
        format!("max |G - 1| = {worst:.1e} at fractional delays; guard rejects |a_ego| < 0.1"),
        format!("max |G - 1| = {worst:.1e}, guard ok = {guard}"),
    )
}

fn event_detection() -> Outcome {
    let hot = DECEL_THRESHOLD + 0.5;
    let cold = 0.4;
    let series = |runs: &[usize]| -> Vec<f64> {
        let mut v = vec![cold; 2];
        for &r in runs {
            v.extend(std::iter::repeat_n(hot, r));
            v.extend([cold; 2]);
        }
        v
    };
    let spans = |d: &[f64]| -> Vec<(usize, usize)> {
        detect_decel_events(d, DECEL_THRESHOLD, DECEL_MIN_FRAMES).iter().map(|e| (e.start, e.len())).collect()
    };
    let cases: Vec<EventCase> = vec![
        (series(&[2]), vec![]),
        (series(&[3]), vec![(2, 3)]),
        (series(&[5]), vec![(2, 5)]),
        (series(&[2, 3, 5]), vec![(6, 3), (11, 5)]),
        // a single sub-threshold frame splits a 6-frame burst into 3 + 2
        (vec![hot, hot, hot, cold, hot, hot], vec![(0, 3)]),
        (vec![hot, hot, hot, DECEL_THRESHOLD, hot, hot, hot], vec![(0, 3), (4, 3)]),
        (vec![hot, hot, f64::NAN, hot, hot, hot], vec![(3, 3)]),
    ];
    for (i, (d, want)) in cases.iter().enumerate() {
        let got = spans(d);
        if &got != want {
            return Err(format!("decel fixture {i}: got {got:?}, want {want:?}"));
        }
    }
    let jerk = [2.4, 2.5, 2.5 + 1e-12, 3.0, 0.0];
    let flags: Vec<bool> = jerk_flags(&jerk, JERK_THRESHOLD).iter().map(|f| f.flagged).collect();
    check(
        flags == [false, false, true, true, false],
        format!("{} decel fixtures exact; jerk flag strict above {JERK_THRESHOLD}", cases.len()),
        format!("jerk flags {flags:?}"),
    )
}

fn concave(s: f64, e: f64) -> f64 {
    1.0 - 0.5 * s * s - 0.5 * e * e
}

/// Draw noisy samples of the concave surface until the non-dominated subset has 60 points.
fn pareto_filtered_surface(seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut all: Vec<[f64; 3]> = Vec::new();
    loop {
        let (s, e): (f64, f64) = (rng.random(), rng.random());
        all.push([s, e, concave(s, e) + noise.sample(&mut rng)]);
        let p = pareto_set(&all);
        if p.indices.len() >= 60 {
            return p.indices.iter().map(|&i| all[i]).collect();
        }
    }
}

fn worst_training_residual(model: &avfrontier::frontier::FrontierModel) -> f64 {
    model.train_x.iter().zip(&model.train_y).map(|(x, y)| (model.predict(*x).0 - y).abs()).fold(0.0, f64::max)
}

fn gpr_frontier() -> Outcome {
    let train = pareto_filtered_surface(0);
    let start = Instant::now();
    let model = fit_frontier(&train, &FrontierConfig::default()).map_err(|e| format!("fit failed: {e}"))?;
    let secs = start.elapsed().as_secs_f64();
    let l = &model.lattice;
    let mse =
        l.inputs.iter().zip(&l.mean).map(|(x, p)| (p - concave(x[0], x[1])).powi(2)).sum::<f64>() / l.mean.len() as f64;
    let rmse = mse.sqrt();
    let tol = 3.0 * model.kernel.noise_var.sqrt();
    let worst = worst_training_residual(&model);
    let o = model.overshoot;
    let reported = o.max.is_finite() && o.mean.is_finite() && (0.0..=1.0).contains(&o.fraction) && o.resolution == l.n;
    // Informational: with Gaussian noise the per-point bound is a tail event on some draws.
    let draws = 50;
    let within = (1..=draws)
        .filter(|&k| {
            let m = fit_frontier(&pareto_filtered_surface(1000 + k), &FrontierConfig::default());
            m.is_ok_and(|m| worst_training_residual(&m) <= 3.0 * m.kernel.noise_var.sqrt())
        })
        .count();
    let msg = format!(
        "{} training points, lattice RMSE {rmse:.4}, worst training residual {worst:.4} (3 sd = {tol:.4}), \
         overshoot max {:.4} mean {:.4} fraction {:.3} on {}x{}, {secs:.1} s; \
         per-point bound held on {within}/{draws} further random draws",
        train.len(),
        o.max,
        o.mean,
        o.fraction,
        o.resolution,
        o.resolution
    );
    check(train.len() == 60 && rmse < 0.05 && worst <= tol && reported && secs < 30.0, msg.clone(), msg)
}

fn headroom_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let cfg = FrontierConfig::default();
    let cell = 1.0 / (cfg.lattice - 1) as f64;

    // constant frontier at 0.9
    let flat: Vec<[f64; 3]> = (0..20).map(|_| [rng.random(), rng.random(), 0.9]).collect();
    let model = fit_frontier(&flat, &cfg).map_err(|e| format!("constant fit failed: {e}"))?;
    let surface = model.surface_points();
    let mut worst_i: f64 = 0.0;
    let mut worst_other: f64 = 0.0;
    for _ in 0..200 {
        let x = [rng.random(), rng.random(), 0.5];
        let h = headroom_to(&x, &surface);
        worst_i = worst_i.max((h[2] - 0.4).abs());
        worst_other = worst_other.max(h[0].max(h[1]));
    }
    if worst_i > 1e-6 || worst_other > cell {
        return Err(format!("constant frontier: |h_I - 0.4| = {worst_i:.1e}, max other {worst_other:.4}"));
    }

    // non-constant surface: cloud below it, and points on it
    let train = pareto_filtered_surface(708);
    let model = fit_frontier(&train, &cfg).map_err(|e| format!("fit failed: {e}"))?;
    let surface = model.surface_points();
    let cloud: Vec<[f64; 3]> = (0..2000).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
    let report = headroom_report(&cloud, &surface, HeadroomMode::Surface).ok_or("empty report")?;
    let nonneg = report.values.iter().all(|h| h.iter().all(|v| *v >= 0.0));
    let n = model.lattice.n;
    let dz = (0..n - 1)
        .flat_map(|i| (0..n - 1).map(move |j| (i, j)))
        .map(|(i, j)| (model.lattice.mean[(i + 1) * n + j + 1] - model.lattice.mean[i * n + j]).abs())
        .fold(0.0, f64::max);
    let diagonal = (2.0 * cell * cell + dz * dz).sqrt();
    let mut worst_on = 0.0f64;
    for _ in 0..500 {
        let (s, e): (f64, f64) = (rng.random(), rng.random());
        let x = [s, e, model.predict([s, e]).0];
        let h = headroom_to(&x, &surface);
        worst_on = worst_on.max((h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt());
    }
    check(
        nonneg && worst_on <= diagonal,
        format!(
            "constant: |h_I - 0.4| <= {worst_i:.1e}, others <= {worst_other:.4} (cell {cell:.4}); \
             2000 headrooms >= 0; on-surface |h| <= {worst_on:.4} (cell diagonal {diagonal:.4})"
        ),
        format!("non-negative {nonneg}, on-surface |h| {worst_on:.4} vs diagonal {diagonal:.4}"),
    )
}

fn run_pipeline(synth: &Path, out: &Path) -> Result<StageManifest, String> {
    let mut cfg = RunConfig::load(&synth.join("run.toml")).map_err(|e| e.to_string())?;
    cfg.out_dir = out.to_path_buf();
    let cfg = cfg.resolved();
    cfg.validate().map_err(|e| e.to_string())?;
    let run = Run::new(&cfg);
    run_all(&run).map_err(|e| e.to_string())?;
    let problems = validate_chain(out, &avfrontier_cli::stages::STAGES);
    if !problems.is_empty() {
        return Err(format!("manifest chain: {}", problems.join("; ")));
    }
    let mut all = StageManifest::new("all", "", 0);
    for stage in avfrontier_cli::stages::STAGES {
        all.outputs.extend(StageManifest::read(&out.join(stage)).map_err(|e| e.to_string())?.outputs);
    }
    Ok(all)
}

fn end_to_end_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let synth = dir.path().join("synthetic");
    cmd_synth(&synth, 2024).map_err(|e| e.to_string())?;
    let a = run_pipeline(&synth, &dir.path().join("a"))?;
    let b = run_pipeline(&synth, &dir.path().join("b"))?;
    check(
        a.outputs == b.outputs && !a.outputs.is_empty(),
        format!("{} output digests identical across two runs; manifest chains consistent", a.outputs.len()),
        "output digests differ between runs".into(),
    )
}

/// Mean composite scores of the dominated and the non-dominated rows on the reference data.
const REFERENCE_MEANS: [[f64; 3]; 2] = [[0.760, 0.798, 0.502], [0.920, 0.944, 0.756]];

fn reference_data() -> Option<Outcome> {
    let path = std::env::var_os("AVFRONTIER_REFERENCE_METRICS")?;
    Some((|| {
        let f = std::fs::File::open(&path).map_err(|e| e.to_string())?;
        let records = read_metrics_table(f, avfrontier::DEFAULT_DT).map_err(|e| e.to_string())?;
        let obj = build_objectives(&records, &ObjectivesConfig::default(), None).map_err(|e| e.to_string())?;
        let r = pareto_set(&obj.points());
        let dominated = r.mean_dominated.ok_or("no dominated rows")?;
        let means = [dominated, r.mean_pareto];
        let worst = (0..2)
            .flat_map(|s| (0..3).map(move |k| (s, k)))
            .map(|(s, k)| (means[s][k] - REFERENCE_MEANS[s][k]).abs())
            .fold(0.0, f64::max);
        let msg = format!("fraction {:.4}, worst mean deviation {worst:.3}", r.fraction);
        check(worst <= 0.05 && r.fraction < 0.01, msg.clone(), msg)
    })())
}

fn main() {
    // libtest flags such as `--nocapture` or filters are accepted and ignored
    let criteria: [Criterion; 11] = [
        ("pareto set equals brute-force oracle", pareto_oracle),
        ("dominance relation laws", dominance_laws),
        ("risk score spot checks", risk_spot_checks),
        ("generalized Pareto recovery", gpd_recovery),
        ("spacing model survival recovery", spacing_recovery),
        ("delay recovery by cross-correlation", delay_recovery),
        ("stability gain", stability_gain_check),
        ("event detection", event_detection),
        ("GPR frontier on a known surface", gpr_frontier),
        ("headroom", headroom_checks),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS  {name} [{secs:.1} s]: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name} [{secs:.1} s]: {msg}");
            }
        }
    }
    match reference_data() {
        None => println!("SKIP  reference-data means (set AVFRONTIER_REFERENCE_METRICS to a metrics table to run)"),
        Some(Ok(msg)) => println!("PASS  reference-data means: {msg}"),
        Some(Err(msg)) => {
            failed += 1;
            println!("FAIL  reference-data means: {msg}");
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
