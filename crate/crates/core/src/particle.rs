//! Particle-based Brownian diffusion simulator.
//!
//! Every transmitter releases its molecules at `t = 0`; each molecule then
//! takes independent Gaussian steps of standard deviation `sqrt(2 D dt)`
//! per axis per time step. The absorbing receiver removes a molecule once
//! its position at a step boundary falls inside the sphere (optionally also
//! mid-step, via the Brownian-bridge crossing probability); the passive
//! receiver never interacts and simply counts molecules inside at sample
//! times.
//!
//! Molecules do not interact in either receiver model, so every molecule is
//! advanced independently on its own counter-derived RNG substream; tallies
//! are integers, which makes the reduction exact and schedule-independent.

use crate::error::{Error, Result};
use crate::geometry::PPPRealization;
use crate::scenario::{ReceiverKind, SamplingScheme, Scenario};
use crate::seeding::{self, domain};
use crate::signal::SignalCurve;
use crate::stats::RunningStats;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// How the absorbing receiver detects molecule arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbsorptionMode {
    /// Absorb only when a step-boundary position lies inside the sphere.
    /// Mirrors common reaction-diffusion simulators, including their
    /// documented time-step bias: crossings between boundaries are missed.
    StepEndCheck,
    /// Additionally absorb with the radial Brownian-bridge crossing
    /// probability `exp(-(d0 - r_r)(d1 - r_r) / (D dt))` when both step
    /// endpoints are outside. The locally-planar-boundary approximation;
    /// reduces the discretization bias at coarse steps.
    IntraStepCorrection,
}

/// Particle-engine configuration.
#[derive(Debug, Clone)]
pub struct ParticleSimConfig {
    /// Simulation time step, s.
    pub dt: f64,
    /// End of simulated time, s; must cover the last sample.
    pub t_end: f64,
    /// Molecules released per transmitter.
    pub molecules_per_tx: usize,
    /// When to record observations.
    pub record_scheme: SamplingScheme,
    pub absorption_mode: AbsorptionMode,
}

impl ParticleSimConfig {
    /// Configuration matching a scenario: record on the scenario grid, one
    /// molecule per unit of pulse amplitude.
    pub fn from_scenario(s: &Scenario, dt: f64) -> Self {
        ParticleSimConfig {
            dt,
            t_end: s.sampling.t_end(),
            molecules_per_tx: s.field.pulse_amplitude.round() as usize,
            record_scheme: s.sampling.clone(),
            absorption_mode: AbsorptionMode::StepEndCheck,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::domain(format!("dt {} must be positive", self.dt)));
        }
        if self.dt > self.record_scheme.interval {
            return Err(Error::domain(format!(
                "dt {} must not exceed the sampling interval {}",
                self.dt, self.record_scheme.interval
            )));
        }
        if self.record_scheme.t_grid.is_empty() {
            return Err(Error::domain("record scheme has no sample times"));
        }
        if self.t_end + 1e-12 < self.record_scheme.t_end() {
            return Err(Error::domain(format!(
                "t_end {} does not cover the last sample {}",
                self.t_end,
                self.record_scheme.t_end()
            )));
        }
        if self.molecules_per_tx == 0 {
            return Err(Error::domain("molecules_per_tx must be at least 1"));
        }
        Ok(())
    }
}

/// Observation record of a single particle-simulation run.
///
/// For the absorbing receiver the vectors hold cumulative absorbed counts;
/// for the passive receiver, instantaneous inside counts. `total` is always
/// the elementwise sum of the nearest-source and interferer-source tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub sample_times: Vec<f64>,
    pub nearest: Vec<u64>,
    pub interferers: Vec<u64>,
    pub total: Vec<u64>,
    pub receiver_kind: ReceiverKind,
    pub seed: u64,
    pub molecules_total: u64,
}

/// One curve per signal component.
#[derive(Debug, Clone)]
pub struct ComponentCurves {
    pub nearest: SignalCurve,
    pub interferers: SignalCurve,
    pub all: SignalCurve,
}

impl ComponentCurves {
    pub fn get(&self, component: crate::signal::Component) -> &SignalCurve {
        match component {
            crate::signal::Component::Nearest => &self.nearest,
            crate::signal::Component::Interferers => &self.interferers,
            crate::signal::Component::All => &self.all,
        }
    }
}

/// Ensemble average over transmitter-placement permutations, scaled to the
/// scenario's pulse amplitude so curves are directly comparable with the
/// analytic and Monte Carlo engines. Net changes are formed per run before
/// averaging, keeping their error bars free of the level autocorrelation.
#[derive(Debug, Clone)]
pub struct EnsembleOutput {
    pub level: ComponentCurves,
    pub net: ComponentCurves,
    pub n_runs: usize,
}

#[derive(Clone)]
struct Tally {
    nearest: Vec<u64>,
    interferers: Vec<u64>,
}

impl Tally {
    fn zeros(n: usize) -> Self {
        Tally {
            nearest: vec![0; n],
            interferers: vec![0; n],
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.nearest.iter_mut().zip(&other.nearest) {
            *a += b;
        }
        for (a, b) in self.interferers.iter_mut().zip(&other.interferers) {
            *a += b;
        }
        self
    }
}

/// Simulates the molecules of one transmitter realization.
///
/// Deterministic given `seed`: molecule `j` walks on substream `j` of the
/// run seed, so trajectories do not depend on the parallel schedule.
pub fn simulate_realization(
    s: &Scenario,
    cfg: &ParticleSimConfig,
    realization: &PPPRealization,
    seed: u64,
) -> Result<SimOutput> {
    cfg.validate()?;
    let kind = s.receiver.kind;
    let radius = s.receiver.radius;
    let radius_sq = radius * radius;
    let diffusion = s.environment.diffusion_coefficient;
    let sigma = (2.0 * diffusion * cfg.dt).sqrt();

    let sample_times = cfg.record_scheme.t_grid.clone();
    // Samples land on the nearest step boundary.
    let sample_steps: Vec<u64> = sample_times
        .iter()
        .map(|&t| (t / cfg.dt + 0.5).floor() as u64)
        .collect();
    let n_samples = sample_steps.len();

    let per_tx = cfg.molecules_per_tx as u64;
    let molecules_total = realization.positions.len() as u64 * per_tx;

    let tally = (0..molecules_total)
        .into_par_iter()
        .fold(
            || Tally::zeros(n_samples),
            |mut acc, molecule| {
                let tx_index = (molecule / per_tx) as usize;
                let source = realization.positions[tx_index];
                let is_nearest = Some(tx_index) == realization.nearest_index;
                let mut rng = seeding::stream_rng(seed, molecule);
                let slot = if is_nearest {
                    &mut acc.nearest
                } else {
                    &mut acc.interferers
                };
                match kind {
                    ReceiverKind::Absorbing => {
                        if let Some(absorb_step) = walk_until_absorbed(
                            &mut rng,
                            source,
                            sigma,
                            radius,
                            radius_sq,
                            diffusion * cfg.dt,
                            cfg.absorption_mode,
                            &sample_steps,
                        ) {
                            // First sample at or after the absorption step;
                            // later samples are filled by the prefix sum.
                            if let Some(bucket) =
                                sample_steps.iter().position(|&k| k >= absorb_step)
                            {
                                slot[bucket] += 1;
                            }
                        }
                    }
                    ReceiverKind::Passive => {
                        walk_and_count_inside(
                            &mut rng,
                            source,
                            sigma,
                            radius_sq,
                            &sample_steps,
                            slot,
                        );
                    }
                }
                acc
            },
        )
        .reduce(|| Tally::zeros(n_samples), Tally::merge);

    let (mut nearest, mut interferers) = (tally.nearest, tally.interferers);
    if kind == ReceiverKind::Absorbing {
        for k in 1..n_samples {
            nearest[k] += nearest[k - 1];
            interferers[k] += interferers[k - 1];
        }
    }
    let total: Vec<u64> = nearest
        .iter()
        .zip(&interferers)
        .map(|(a, b)| a + b)
        .collect();

    Ok(SimOutput {
        sample_times,
        nearest,
        interferers,
        total,
        receiver_kind: kind,
        seed,
        molecules_total,
    })
}

/// Advances one molecule until absorption or the last sample step.
/// Returns the 1-based step index of absorption, if any.
#[allow(clippy::too_many_arguments)]
fn walk_until_absorbed<R: Rng>(
    rng: &mut R,
    source: [f64; 3],
    sigma: f64,
    radius: f64,
    radius_sq: f64,
    d_dt: f64,
    mode: AbsorptionMode,
    sample_steps: &[u64],
) -> Option<u64> {
    let last_step = *sample_steps.last().unwrap();
    let mut pos = source;
    let mut dist_before = (pos[0] * pos[0] + pos[1] * pos[1] + pos[2] * pos[2]).sqrt();
    for step in 1..=last_step {
        for axis in &mut pos {
            let g: f64 = rng.sample(StandardNormal);
            *axis += sigma * g;
        }
        let dist_sq = pos[0] * pos[0] + pos[1] * pos[1] + pos[2] * pos[2];
        if dist_sq <= radius_sq {
            return Some(step);
        }
        if mode == AbsorptionMode::IntraStepCorrection {
            let dist_after = dist_sq.sqrt();
            let crossing = (-(dist_before - radius) * (dist_after - radius) / d_dt).exp();
            if rng.random::<f64>() < crossing {
                return Some(step);
            }
            dist_before = dist_after;
        }
    }
    None
}

/// Advances one molecule through all steps, incrementing `counts` at every
/// sample where it sits inside the receiver.
fn walk_and_count_inside<R: Rng>(
    rng: &mut R,
    source: [f64; 3],
    sigma: f64,
    radius_sq: f64,
    sample_steps: &[u64],
    counts: &mut [u64],
) {
    let mut pos = source;
    let mut next_sample = 0;
    // Sample at step 0, before any motion.
    while next_sample < sample_steps.len() && sample_steps[next_sample] == 0 {
        if pos[0] * pos[0] + pos[1] * pos[1] + pos[2] * pos[2] <= radius_sq {
            counts[next_sample] += 1;
        }
        next_sample += 1;
    }
    let last_step = *sample_steps.last().unwrap();
    for step in 1..=last_step {
        for axis in &mut pos {
            let g: f64 = rng.sample(StandardNormal);
            *axis += sigma * g;
        }
        while next_sample < sample_steps.len() && sample_steps[next_sample] == step {
            if pos[0] * pos[0] + pos[1] * pos[1] + pos[2] * pos[2] <= radius_sq {
                counts[next_sample] += 1;
            }
            next_sample += 1;
        }
    }
}

/// Runs `n_permutations` fresh transmitter placements, each simulated
/// `reps_per_permutation` times, and averages the curves.
///
/// Counts are rescaled by `pulse_amplitude / molecules_per_tx` so the output
/// is in the scenario's molecule units regardless of the desk-scale molecule
/// budget. Deterministic given `master_seed`.
pub fn simulate_ensemble(
    s: &Scenario,
    cfg: &ParticleSimConfig,
    n_permutations: usize,
    reps_per_permutation: usize,
    master_seed: u64,
) -> Result<EnsembleOutput> {
    simulate_ensemble_observed(
        s,
        cfg,
        n_permutations,
        reps_per_permutation,
        master_seed,
        |_, _| {},
    )
}

/// [`simulate_ensemble`] with a per-run observer, called with the run index
/// and the raw (unscaled) output of every run in deterministic order. Used
/// for trace dumps.
pub fn simulate_ensemble_observed(
    s: &Scenario,
    cfg: &ParticleSimConfig,
    n_permutations: usize,
    reps_per_permutation: usize,
    master_seed: u64,
    mut on_run: impl FnMut(usize, &SimOutput),
) -> Result<EnsembleOutput> {
    cfg.validate()?;
    if n_permutations == 0 || reps_per_permutation == 0 {
        return Err(Error::domain("ensemble needs at least one run"));
    }
    if !s.max_placement_radius.is_finite() {
        return Err(Error::domain(
            "particle ensembles require a finite max_placement_radius",
        ));
    }
    let scale = s.field.pulse_amplitude / cfg.molecules_per_tx as f64;
    let n_samples = cfg.record_scheme.t_grid.len();
    let n_net = n_samples.saturating_sub(1);
    let mut level = [
        vec![RunningStats::new(); n_samples],
        vec![RunningStats::new(); n_samples],
        vec![RunningStats::new(); n_samples],
    ];
    let mut net = [
        vec![RunningStats::new(); n_net],
        vec![RunningStats::new(); n_net],
        vec![RunningStats::new(); n_net],
    ];

    for permutation in 0..n_permutations {
        let placement_seed = seeding::derive_seed(
            master_seed,
            &[domain::ENSEMBLE_PLACEMENT, permutation as u64],
        );
        let realization = crate::geometry::sample_ppp_shell(
            s.field.active_density(),
            s.receiver.radius,
            s.max_placement_radius,
            placement_seed,
        )?;
        for rep in 0..reps_per_permutation {
            let run_seed = seeding::derive_seed(
                master_seed,
                &[domain::ENSEMBLE_RUN, permutation as u64, rep as u64],
            );
            let out = simulate_realization(s, cfg, &realization, run_seed)?;
            on_run(permutation * reps_per_permutation + rep, &out);
            for (series, counts) in [&out.nearest, &out.interferers, &out.total]
                .into_iter()
                .enumerate()
            {
                for k in 0..n_samples {
                    level[series][k].push(counts[k] as f64 * scale);
                }
                for k in 0..n_net {
                    // Counts are unsigned; the passive inside count can drop.
                    let delta = counts[k + 1] as f64 - counts[k] as f64;
                    net[series][k].push(delta * scale);
                }
            }
        }
    }

    let times = cfg.record_scheme.t_grid.clone();
    let curve = |stats: &[RunningStats], times: &[f64]| SignalCurve {
        times: times.to_vec(),
        mean: stats.iter().map(|s| s.mean()).collect(),
        std_error: stats.iter().map(|s| s.std_error()).collect(),
    };
    let pack = |stats: &[Vec<RunningStats>; 3], times: &[f64]| ComponentCurves {
        nearest: curve(&stats[0], times),
        interferers: curve(&stats[1], times),
        all: curve(&stats[2], times),
    };
    Ok(EnsembleOutput {
        level: pack(&level, &times),
        net: pack(&net, &times[..n_net]),
        n_runs: n_permutations * reps_per_permutation,
    })
}
