//! Monte Carlo ("pseudo" simulation) engine.
//!
//! Instead of tracking molecules, each realization samples transmitter
//! positions from the point process and sums the analytic per-transmitter
//! channel response over them. Averaging across realizations estimates the
//! same expectations as the analytic engine, up to the bias from the finite
//! placement radius (reported separately by
//! [`crate::expectation::truncation_tail`]).
//!
//! Realizations are independent work items with counter-derived seeds, so
//! curves are reproducible regardless of how the work is scheduled.

use crate::channel::fraction_at;
use crate::error::{Error, Result};
use crate::geometry;
use crate::scenario::{ReceiverKind, Scenario};
use crate::seeding::{self, domain};
use crate::signal::{Component, Observable, SignalCurve};
use crate::stats::RunningStats;
use rayon::prelude::*;

/// Mean and standard error of one signal component at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_realizations: usize,
    pub component: Component,
}

/// Monte Carlo estimate of one component's level curve over the scenario
/// sample grid.
///
/// Per realization and sample time, the estimator sums
/// `N_tx * fraction(|p|, t)` over the sampled positions (All), takes the
/// identified nearest position alone (Nearest), or everything but it
/// (Interferers). An empty realization contributes zero to every component.
/// Deterministic given the seed, independent of thread count.
pub fn mc_curve(
    s: &Scenario,
    kind: ReceiverKind,
    component: Component,
    n_realizations: usize,
    seed: u64,
) -> Result<Vec<MCEstimate>> {
    mc_observable_curve(s, kind, component, Observable::Level, n_realizations, seed)
}

/// [`mc_curve`] generalized to either observable. Net changes are formed
/// per realization before averaging, so their error bars reflect the
/// within-realization correlation of consecutive samples.
pub fn mc_observable_curve(
    s: &Scenario,
    kind: ReceiverKind,
    component: Component,
    observable: Observable,
    n_realizations: usize,
    seed: u64,
) -> Result<Vec<MCEstimate>> {
    if n_realizations == 0 {
        return Err(Error::domain("at least one realization is required"));
    }
    if !s.max_placement_radius.is_finite() {
        return Err(Error::domain(
            "Monte Carlo sampling requires a finite max_placement_radius",
        ));
    }
    let grid = &s.sampling.t_grid;
    let radius = s.receiver.radius;
    let diffusion = s.environment.diffusion_coefficient;
    let n_tx = s.field.pulse_amplitude;
    let lambda = s.field.active_density();

    // One level curve per realization, in realization order.
    let per_realization: Vec<Vec<f64>> = (0..n_realizations)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let rseed = seeding::derive_seed(seed, &[domain::MC_REALIZATION, i as u64]);
            let realization =
                geometry::sample_ppp_shell(lambda, radius, s.max_placement_radius, rseed)?;
            let radii = realization.radii();
            let nearest = realization.nearest_index;
            let levels: Vec<f64> = grid
                .iter()
                .map(|&t| {
                    let mut nearest_value = 0.0;
                    let mut interferer_value = 0.0;
                    for (j, &r) in radii.iter().enumerate() {
                        let f = n_tx * fraction_at(kind, radius, diffusion, r, t);
                        if Some(j) == nearest {
                            nearest_value = f;
                        } else {
                            interferer_value += f;
                        }
                    }
                    match component {
                        Component::Nearest => nearest_value,
                        Component::Interferers => interferer_value,
                        Component::All => nearest_value + interferer_value,
                    }
                })
                .collect();
            Ok(match observable {
                Observable::Level => levels,
                Observable::NetChange => levels.windows(2).map(|w| w[1] - w[0]).collect(),
            })
        })
        .collect::<Result<_>>()?;

    let n_points = match observable {
        Observable::Level => grid.len(),
        Observable::NetChange => grid.len().saturating_sub(1),
    };
    // Stable sequential reduction in realization order.
    let mut stats = vec![RunningStats::new(); n_points];
    for curve in &per_realization {
        for (acc, &v) in stats.iter_mut().zip(curve) {
            acc.push(v);
        }
    }
    Ok(stats
        .iter()
        .map(|acc| MCEstimate {
            mean: acc.mean(),
            std_error: acc.std_error(),
            n_realizations,
            component,
        })
        .collect())
}

/// Packs estimates against the scenario sample grid. Net-change estimates
/// are indexed by the left endpoint of each interval, so the grid prefix of
/// matching length applies to both observables.
pub fn estimates_to_curve(s: &Scenario, estimates: &[MCEstimate]) -> SignalCurve {
    SignalCurve {
        times: s.sampling.t_grid[..estimates.len()].to_vec(),
        mean: estimates.iter().map(|e| e.mean).collect(),
        std_error: estimates.iter().map(|e| e.std_error).collect(),
    }
}

/// One-sample Kolmogorov-Smirnov statistic with asymptotic p-value.
///
/// `samples` must be sorted ascending; `cdf` is the hypothesized continuous
/// distribution function. Returns `(D, p)` where `D` is the supremum
/// distance between the empirical and hypothesized CDFs.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<(f64, f64)> {
    if samples.len() < 10 {
        return Err(Error::domain(format!(
            "KS test needs at least 10 samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("KS samples must be sorted ascending"));
    }
    let n = samples.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let p = kolmogorov_survival(n.sqrt() * d);
    Ok((d, p))
}

/// Survival function of the asymptotic Kolmogorov distribution,
/// `P(sqrt(n) D > x)`, using the two-sided theta-series split.
fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        let q = (-std::f64::consts::PI.powi(2) / (8.0 * x * x)).exp();
        let series = q + q.powi(9) + q.powi(25) + q.powi(49);
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * series
    } else {
        let e = (-2.0 * x * x).exp();
        (2.0 * (e - e.powi(4) + e.powi(9) - e.powi(16))).clamp(0.0, 1.0)
    }
}
