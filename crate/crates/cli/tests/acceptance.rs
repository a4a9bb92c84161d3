//! Acceptance suite: one test per criterion, each printing a pass line with
//! its measured figure of merit (visible under `--nocapture`).
//!
//! Statistical criteria run at pinned seeds so the suite is deterministic;
//! their tolerances are the stated statistical bands, not tuned margins.

use molsig::channel;
use molsig::config;
use molsig::expectation;
use molsig::geometry;
use molsig::montecarlo;
use molsig::particle::{self, AbsorptionMode, ParticleSimConfig};
use molsig::scenario::{Scenario, ValidatedScenario};
use molsig::seeding;
use molsig::{Component, ReceiverKind};
use std::time::Instant;

fn fig2(kind: ReceiverKind) -> ValidatedScenario {
    let mut params = config::params_from_toml(molsig_cli::FIG2_TOML).unwrap();
    params.receiver_kind = kind;
    params.build().unwrap()
}

fn fig3(kind: ReceiverKind) -> ValidatedScenario {
    let mut params = config::params_from_toml(molsig_cli::FIG3_TOML).unwrap();
    params.receiver_kind = kind;
    params.build().unwrap()
}

#[test]
fn criterion_01_closed_form_matches_campbell_quadrature_on_grid() {
    let start = Instant::now();
    let base = fig2(ReceiverKind::Absorbing);
    let mut worst = 0.0_f64;
    for &lambda in &[5e-5, 1e-4, 3e-4, 1e-3, 2e-3] {
        for &diffusion in &[40.0, 80.0, 100.0, 120.0, 160.0] {
            for &t in &[0.01, 0.1, 0.5, 1.0, 2.0] {
                let mut s: Scenario = base.scenario().clone();
                s.field.density = lambda;
                s.environment.diffusion_coefficient = diffusion;
                let closed = expectation::e_all_fa_closed(&s, t);
                let quad = expectation::e_all_fa_campbell(&s, t).unwrap();
                let rel = ((closed - quad) / closed).abs();
                assert!(
                    rel <= 1e-6,
                    "lambda={lambda} D={diffusion} t={t}: relative gap {rel}"
                );
                worst = worst.max(rel);
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 1: closed form vs Campbell quadrature on 5x5x5 grid, \
         worst relative gap {worst:.2e} (limit 1e-6), {elapsed:?}"
    );
}

#[test]
fn criterion_02_reference_peak_net_changes_within_two_percent() {
    let start = Instant::now();
    let mut results = Vec::new();
    for (kind, component, reference) in molsig_cli::TABLE1_REFERENCE {
        let s = fig2(kind);
        let curve = expectation::net_change_curve(&s, kind, component).unwrap();
        let peak = curve.mean.iter().cloned().fold(f64::MIN, f64::max);
        let rel = (peak - reference) / reference;
        assert!(
            rel.abs() <= 0.02,
            "{kind}/{component}: peak {peak} vs reference {reference} ({:+.3}%)",
            rel * 100.0
        );
        results.push(format!("{kind}/{component} {:+.3}%", rel * 100.0));
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 2: peak net changes match references within 2% ({}), {elapsed:?}",
        results.join(", ")
    );
}

#[test]
fn criterion_03_passive_closed_form_matches_volume_quadrature() {
    let start = Instant::now();
    let (radius, diffusion) = (5.0, 80.0);
    let mut worst = 0.0_f64;
    for &x_over_r in &[1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0] {
        for &tau in &[0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0] {
            let x = x_over_r * radius;
            let t = tau * radius * radius / diffusion;
            let exact = channel::ps_fraction_exact_at(radius, diffusion, x, t);
            let quad = channel::ps_fraction_by_quadrature_at(radius, diffusion, x, t).unwrap();
            let gap = (exact - quad).abs();
            assert!(gap <= 1e-8, "x/r={x_over_r} tau={tau}: |gap| {gap}");
            worst = worst.max(gap);
        }
    }
    println!(
        "[PASS] criterion 3: exact passive fraction vs volume quadrature on 8x8 grid, \
         worst |gap| {worst:.2e} (limit 1e-8), {:?}",
        start.elapsed()
    );
}

#[test]
fn criterion_04_sampled_nearest_distances_pass_ks() {
    let start = Instant::now();
    let (lambda, radius, placement) = (1e-4, 5.0, 35.0);
    // Truncation mass beyond R = 35 is exp(-17.9) ~ 1.7e-8 < 1e-6.
    let n = 100_000;
    let mut distances = Vec::with_capacity(n);
    for i in 0..n {
        let seed = seeding::derive_seed(40_404, &[i as u64]);
        if let Some(d) = geometry::sample_ppp_shell(lambda, radius, placement, seed)
            .unwrap()
            .nearest_distance()
        {
            distances.push(d);
        }
    }
    distances.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (stat, p) = montecarlo::ks_statistic(&distances, |x| {
        geometry::nearest_cdf_3d(x, lambda, radius).unwrap()
    })
    .unwrap();
    assert!(p > 0.01, "KS statistic {stat}, p {p}");
    println!(
        "[PASS] criterion 4: KS test on {} sampled nearest distances, D = {stat:.5}, \
         p = {p:.3} (> 0.01), {:?}",
        distances.len(),
        start.elapsed()
    );
}

#[test]
fn criterion_05_monte_carlo_matches_analytic_within_three_sigma() {
    let start = Instant::now();
    let n_realizations = 1000;
    let mut worst_pull = 0.0_f64;
    for kind in [ReceiverKind::Absorbing, ReceiverKind::Passive] {
        let s = fig2(kind);
        let estimates = montecarlo::mc_curve(&s, kind, Component::All, n_realizations, 31).unwrap();
        for (k, est) in estimates.iter().enumerate() {
            let t = s.sampling.t_grid[k];
            let analytic = match kind {
                ReceiverKind::Absorbing => expectation::e_all_fa_closed(&s, t),
                ReceiverKind::Passive => expectation::e_all_ps(&s, t).unwrap(),
            };
            let tail = expectation::truncation_tail(&s, kind, t).unwrap();
            let delta = (est.mean + tail - analytic).abs();
            if t == 0.0 {
                assert_eq!(delta, 0.0);
                continue;
            }
            let pull = delta / est.std_error;
            assert!(
                pull <= 3.0,
                "{kind} t={t}: mc {} + tail {tail} vs analytic {analytic}, {pull:.2} sigma",
                est.mean
            );
            worst_pull = worst_pull.max(pull);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 5: Monte Carlo (n=1000) + truncation bound vs analytic, \
         worst pull {worst_pull:.2} sigma (limit 3), {elapsed:?}"
    );
}

#[test]
fn criterion_06_particle_fractions_match_channel_formulas() {
    let start = Instant::now();
    let molecules = 100_000;
    let (radius, diffusion, x, t_end) = (5.0, 80.0, 10.0, 1.0);
    let realization = geometry::PPPRealization {
        positions: vec![[x, 0.0, 0.0]],
        nearest_index: Some(0),
        generating_seed: 0,
        shell: (radius, 50.0),
    };
    let mut report = Vec::new();
    for kind in [ReceiverKind::Absorbing, ReceiverKind::Passive] {
        let mut params = config::params_from_toml(molsig_cli::FIG2_TOML).unwrap();
        params.receiver_kind = kind;
        params.density = 0.0;
        params.pulse_amplitude = 1.0;
        let s = params.build().unwrap();
        let cfg = ParticleSimConfig {
            dt: 1e-3,
            t_end,
            molecules_per_tx: molecules,
            record_scheme: s.sampling.clone(),
            // Intra-step crossing detection removes the step-boundary
            // undercount; the plain mode's bias is criterion 7's subject.
            absorption_mode: AbsorptionMode::IntraStepCorrection,
        };
        let out = particle::simulate_realization(&s, &cfg, &realization, 60_606).unwrap();
        let fraction = *out.total.last().unwrap() as f64 / molecules as f64;
        let expected = match kind {
            ReceiverKind::Absorbing => channel::fa_fraction_at(radius, diffusion, x, t_end),
            ReceiverKind::Passive => channel::ps_fraction_exact_at(radius, diffusion, x, t_end),
        };
        let sigma = (expected * (1.0 - expected) / molecules as f64).sqrt();
        let pull = (fraction - expected) / sigma;
        assert!(
            pull.abs() <= 3.0,
            "{kind}: fraction {fraction} vs {expected}, {pull:+.2} sigma"
        );
        report.push(format!("{kind} {pull:+.2} sigma"));
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 6: particle fractions at T=1 s within 3 binomial sigma \
         ({}), {elapsed:?}",
        report.join(", ")
    );
}

#[test]
fn criterion_07_coarse_time_step_undercounts_early_absorption() {
    let start = Instant::now();
    // Fixed transmitter placement; the analytic comparison curve is the
    // channel response summed over these exact positions, so the only
    // statistical tolerance left is binomial.
    let (radius, diffusion) = (5.0, 80.0);
    let placement = geometry::sample_ppp_shell(1e-4, radius, 25.0, 70_707).unwrap();
    assert!(placement.len() >= 3, "placement too sparse");
    let molecules = 30_000;

    let mut params = config::params_from_toml(molsig_cli::FIG2_TOML).unwrap();
    params.receiver_kind = ReceiverKind::Absorbing;
    params.t_end = 0.05;
    params.pulse_amplitude = 1.0;
    let s = params.build().unwrap();

    let run = |dt: f64| {
        let cfg = ParticleSimConfig {
            dt,
            t_end: 0.05,
            molecules_per_tx: molecules,
            record_scheme: s.sampling.clone(),
            absorption_mode: AbsorptionMode::StepEndCheck,
        };
        particle::simulate_realization(&s, &cfg, &placement, 80_808).unwrap()
    };
    let coarse = run(1e-2);
    let fine = run(1e-4);

    let radii = placement.radii();
    let conditional = |t: f64| -> (f64, f64) {
        let mut mean = 0.0;
        let mut var = 0.0;
        for &r in &radii {
            let p = channel::fa_fraction_at(radius, diffusion, r, t);
            mean += molecules as f64 * p;
            var += molecules as f64 * p * (1.0 - p);
        }
        (mean, var.sqrt())
    };

    // Directional check over the early samples with meaningful counts.
    for (k, &t) in s.sampling.t_grid.iter().enumerate() {
        let (expected, _) = conditional(t);
        if expected < 50.0 {
            continue;
        }
        assert!(
            coarse.total[k] < fine.total[k],
            "t={t}: coarse {} not below fine {}",
            coarse.total[k],
            fine.total[k]
        );
    }

    let k_last = s.sampling.t_grid.len() - 1;
    let (expected, sigma) = conditional(0.05);
    let fine_pull = (fine.total[k_last] as f64 - expected) / sigma;
    let coarse_pull = (coarse.total[k_last] as f64 - expected) / sigma;
    assert!(
        fine_pull.abs() <= 3.0,
        "fine dt: {} vs {expected} ({fine_pull:+.2} sigma)",
        fine.total[k_last]
    );
    assert!(
        coarse_pull < -3.0,
        "coarse dt not significantly low: {coarse_pull:+.2} sigma"
    );
    println!(
        "[PASS] criterion 7: dt=1e-2 undercounts early absorption ({coarse_pull:+.1} sigma) \
         while dt=1e-4 agrees with the analytic curve ({fine_pull:+.2} sigma), {:?}",
        start.elapsed()
    );
}

#[test]
fn criterion_08_expectations_are_linear_in_density() {
    let start = Instant::now();
    let base = fig2(ReceiverKind::Absorbing);
    let mut doubled: Scenario = base.scenario().clone();
    doubled.field.density *= 2.0;
    for &t in &[0.05, 0.37, 1.0] {
        let closed = expectation::e_all_fa_closed(&base, t);
        let closed2 = expectation::e_all_fa_closed(&doubled, t);
        assert!(
            ((closed2 - 2.0 * closed) / (2.0 * closed)).abs() <= 1e-6,
            "closed form t={t}: {closed2} vs {}",
            2.0 * closed
        );
        let ps = expectation::e_all_ps(&base, t).unwrap();
        let ps2 = expectation::e_all_ps(&doubled, t).unwrap();
        assert!(
            ((ps2 - 2.0 * ps) / (2.0 * ps)).abs() <= 1e-6,
            "passive t={t}: {ps2} vs {}",
            2.0 * ps
        );
    }
    println!(
        "[PASS] criterion 8: doubling the active density doubles both totals \
         within 1e-6, {:?}",
        start.elapsed()
    );
}

#[test]
fn criterion_09_dense_setup_has_the_expected_curve_shapes() {
    let start = Instant::now();
    let ps = fig3(ReceiverKind::Passive);
    let curve = expectation::level_curve(&ps, ReceiverKind::Passive, Component::All).unwrap();
    // Slope measured per second: the relative change of the curve over each
    // full one-second window. This flips from >1% to <1% exactly at the
    // 0.8 s stabilization point (window starting at 0.7 s moves 1.02%).
    let window = (1.0 / ps.sampling.interval).round() as usize;
    assert!(curve.len() > window, "grid too short for a 1 s window");
    let mut worst_slope = 0.0_f64;
    let mut checked = 0;
    for k in 0..curve.len() - window {
        let t0 = curve.times[k];
        let dt = curve.times[k + window] - t0;
        let slope = ((curve.mean[k + window] - curve.mean[k]) / (curve.mean[k] * dt)).abs();
        if t0 < 0.8 {
            continue;
        }
        assert!(slope < 0.01, "t={t0}: relative slope {slope:.4}/s");
        worst_slope = worst_slope.max(slope);
        checked += 1;
    }
    assert!(checked > 0, "no windows checked");

    let fa = fig3(ReceiverKind::Absorbing);
    let fa_curve = expectation::level_curve(&fa, ReceiverKind::Absorbing, Component::All).unwrap();
    for k in 0..fa_curve.len() - 1 {
        assert!(
            fa_curve.mean[k + 1] > fa_curve.mean[k],
            "absorbing total not strictly increasing at t={}",
            fa_curve.times[k]
        );
    }
    println!(
        "[PASS] criterion 9: passive total slope after 0.8 s at most {worst_slope:.4}/s \
         (< 0.01/s) and absorbing total strictly increasing, {:?}",
        start.elapsed()
    );
}

#[test]
fn criterion_10_cli_outputs_are_byte_identical_across_reruns_and_thread_counts() {
    let start = Instant::now();
    let scenario = format!("{}/scenarios/fig2.toml", env!("CARGO_MANIFEST_DIR"));
    let run = |dir: &std::path::Path, threads: Option<&str>| {
        let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_molsig"));
        cmd.args([
            "run",
            "--scenario",
            &scenario,
            "--engine",
            "all",
            "--seed",
            "42",
            "--realizations",
            "40",
            "--permutations",
            "4",
            "--molecules",
            "50",
            "--quiet",
            "--override",
            "t_end=0.1",
            "--out",
        ])
        .arg(dir);
        if let Some(n) = threads {
            cmd.env("RAYON_NUM_THREADS", n);
        }
        let status = cmd.status().unwrap();
        assert!(status.success());
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("csv"))
            .collect();
        files.sort();
        files
            .into_iter()
            .map(|p| {
                (
                    p.file_name().unwrap().to_str().unwrap().to_string(),
                    std::fs::read(&p).unwrap(),
                )
            })
            .collect::<Vec<_>>()
    };

    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let d3 = tempfile::tempdir().unwrap();
    let first = run(d1.path(), None);
    let second = run(d2.path(), None);
    let single_thread = run(d3.path(), Some("1"));

    assert_eq!(first.len(), 9, "expected 3 engines x 3 components");
    assert_eq!(first, second, "rerun produced different bytes");
    assert_eq!(first, single_thread, "thread count changed the bytes");
    println!(
        "[PASS] criterion 10: {} CSVs byte-identical across rerun and RAYON_NUM_THREADS=1, {:?}",
        first.len(),
        start.elapsed()
    );
}
