//! Analytic expected-signal engine.
//!
//! The collective signal at the receiver decomposes into the contribution
//! of the nearest transmitter and that of all interfering transmitters.
//! Averaging the single-transmitter channel response over the
//! point-process statistics gives, per component:
//!
//! - nearest: the channel fraction weighted by the nearest-distance PDF;
//! - interferers: a nested Campbell integral — for every nearest distance
//!   `x`, the remaining transmitters form a Poisson process beyond `x`
//!   whose summed response is a density-weighted radial integral;
//! - all: a single Campbell integral over the whole field, which for the
//!   absorbing receiver collapses to the closed form
//!   `4 N sqrt(pi) lambda_a r_r [D sqrt(pi) t + 2 r_r sqrt(D t)]`.
//!
//! The closed form and the Campbell quadrature are kept as two independent
//! routes to the same number; their agreement is re-checked in the test
//! suite across a parameter grid.
//!
//! Net-change observables over a sampling interval `[t, t + T_ss]` use the
//! closed-form difference for the absorbing receiver and level differences
//! for everything else.

use crate::channel;
use crate::error::{Error, Result};
use crate::numerics::{self, DEFAULT_ABS_TOL, DEFAULT_REL_TOL};
use crate::scenario::{ReceiverKind, Scenario};
use crate::signal::{Component, SignalCurve};
use rayon::prelude::*;
use std::cell::RefCell;
use std::f64::consts::PI;

const FOUR_THIRDS_PI: f64 = 4.0 / 3.0 * PI;

/// Nearest/interferers/all split of an expected signal at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationBreakdown {
    pub e_nearest: f64,
    pub e_interferers: f64,
    pub e_all: f64,
    pub method: Method,
}

/// How the `e_all` member of a breakdown was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Quadrature,
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain(format!("time {t} must be nonnegative")));
    }
    Ok(())
}

use channel::fraction_at;

/// Expected cumulative count absorbed by time `t`, closed form:
/// `4 N sqrt(pi) lambda_a r_r [D sqrt(pi) t + 2 r_r sqrt(D t)]`.
///
/// Exactly linear in the active density and the pulse amplitude; zero at
/// `t = 0`; strictly increasing and unbounded in `t`.
pub fn e_all_fa_closed(s: &Scenario, t: f64) -> f64 {
    let d = s.environment.diffusion_coefficient;
    let r_r = s.receiver.radius;
    let sqrt_pi = PI.sqrt();
    4.0 * s.field.pulse_amplitude
        * sqrt_pi
        * s.field.active_density()
        * r_r
        * (d * sqrt_pi * t + 2.0 * r_r * (d * t).sqrt())
}

/// Expected net count absorbed during `[t, t + t_ss]`, closed form:
/// `4 N sqrt(pi) lambda_a r_r [D sqrt(pi) T_ss + 2 sqrt(D) r_r (sqrt(t + T_ss) - sqrt(t))]`.
///
/// Algebraically identical to `e_all_fa_closed(t + t_ss) - e_all_fa_closed(t)`.
pub fn e_all_fa_net(s: &Scenario, t: f64, t_ss: f64) -> f64 {
    let d = s.environment.diffusion_coefficient;
    let r_r = s.receiver.radius;
    let sqrt_pi = PI.sqrt();
    4.0 * s.field.pulse_amplitude
        * sqrt_pi
        * s.field.active_density()
        * r_r
        * (d * sqrt_pi * t_ss + 2.0 * d.sqrt() * r_r * ((t_ss + t).sqrt() - t.sqrt()))
}

/// Campbell integral for the whole field:
/// `4 pi N lambda_a` times the radial integral of `fraction(x, t) x^2` from
/// `lower` to infinity. The active density enters only as a prefactor, so
/// scaling it scales the result exactly.
fn campbell_total(s: &Scenario, kind: ReceiverKind, t: f64, lower: f64) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 || s.field.active_density() == 0.0 {
        return Ok(0.0);
    }
    let radius = s.receiver.radius;
    let diffusion = s.environment.diffusion_coefficient;
    let integral = numerics::integrate_semi_infinite(
        |x| fraction_at(kind, radius, diffusion, x, t) * x * x,
        lower,
        DEFAULT_REL_TOL,
        DEFAULT_ABS_TOL,
    )?;
    Ok(4.0 * PI * s.field.pulse_amplitude * s.field.active_density() * integral.value)
}

/// Expected cumulative absorbed count by Campbell quadrature; the
/// independent route against [`e_all_fa_closed`].
pub fn e_all_fa_campbell(s: &Scenario, t: f64) -> Result<f64> {
    campbell_total(s, ReceiverKind::Absorbing, t, s.receiver.radius)
}

/// Expected count inside the passive receiver at time `t`:
/// `4 pi N lambda_a` times the radial integral of the observed fraction.
pub fn e_all_ps(s: &Scenario, t: f64) -> Result<f64> {
    campbell_total(s, ReceiverKind::Passive, t, s.receiver.radius)
}

/// Expected net change of the passive count over `[t, t + t_ss]`, evaluated
/// as the difference of the level at the two endpoints.
pub fn e_all_ps_net(s: &Scenario, t: f64, t_ss: f64) -> Result<f64> {
    Ok(e_all_ps(s, t + t_ss)? - e_all_ps(s, t)?)
}

/// Portion of the Campbell total contributed by transmitters beyond the
/// scenario's placement radius. Sampled engines cannot see it; adding this
/// bound to their estimates removes the truncation bias. Zero when the
/// placement radius is infinite.
pub fn truncation_tail(s: &Scenario, kind: ReceiverKind, t: f64) -> Result<f64> {
    if !s.max_placement_radius.is_finite() {
        return Ok(0.0);
    }
    campbell_total(s, kind, t, s.max_placement_radius)
}

fn nearest_expectation(s: &Scenario, kind: ReceiverKind, t: f64) -> Result<f64> {
    check_time(t)?;
    let lambda = s.field.active_density();
    if t == 0.0 || lambda == 0.0 {
        return Ok(0.0);
    }
    let radius = s.receiver.radius;
    let diffusion = s.environment.diffusion_coefficient;
    let r3 = radius.powi(3);
    let integral = numerics::integrate_semi_infinite(
        |x| {
            let density =
                4.0 * lambda * PI * x * x * (-lambda * FOUR_THIRDS_PI * (x.powi(3) - r3)).exp();
            fraction_at(kind, radius, diffusion, x, t) * density
        },
        radius,
        DEFAULT_REL_TOL,
        DEFAULT_ABS_TOL,
    )?;
    Ok(s.field.pulse_amplitude * integral.value)
}

/// Expected absorbed count due to the nearest transmitter only: the channel
/// fraction averaged over the nearest-distance law.
pub fn e_nearest_fa(s: &Scenario, t: f64) -> Result<f64> {
    nearest_expectation(s, ReceiverKind::Absorbing, t)
}

/// Expected passive count due to the nearest transmitter only.
pub fn e_nearest_ps(s: &Scenario, t: f64) -> Result<f64> {
    nearest_expectation(s, ReceiverKind::Passive, t)
}

/// Nested Campbell integral for the interfering transmitters.
///
/// Outer variable: nearest distance `x`, weighted by its density. Inner:
/// the summed response of a Poisson field restricted beyond `x`,
/// `4 pi lambda_a` times the radial integral of `fraction(r, t) r^2` from
/// `x` to infinity. The inner integral is evaluated by semi-infinite
/// quadrature with the outer abscissa as lower limit.
fn interferers_expectation(s: &Scenario, kind: ReceiverKind, t: f64) -> Result<f64> {
    check_time(t)?;
    let lambda = s.field.active_density();
    if t == 0.0 || lambda == 0.0 {
        return Ok(0.0);
    }
    let radius = s.receiver.radius;
    let diffusion = s.environment.diffusion_coefficient;
    let r3 = radius.powi(3);
    let prefactor = s.field.pulse_amplitude * (4.0 * PI * lambda).powi(2);

    // The inner quadrature cannot surface its error through the outer
    // integrand closure; it is parked here and re-raised afterwards.
    let inner_failure: RefCell<Option<Error>> = RefCell::new(None);
    let outer = numerics::integrate_semi_infinite(
        |x| {
            let inner = numerics::integrate_semi_infinite(
                |r| fraction_at(kind, radius, diffusion, r, t) * r * r,
                x,
                DEFAULT_REL_TOL,
                DEFAULT_ABS_TOL * 0.5,
            );
            match inner {
                Ok(q) => q.value * x * x * (-lambda * FOUR_THIRDS_PI * (x.powi(3) - r3)).exp(),
                Err(e) => {
                    *inner_failure.borrow_mut() = Some(e);
                    f64::NAN
                }
            }
        },
        radius,
        DEFAULT_REL_TOL,
        DEFAULT_ABS_TOL * 0.5,
    );
    match outer {
        Ok(q) => Ok(prefactor * q.value),
        Err(outer_err) => Err(inner_failure.into_inner().unwrap_or(outer_err)),
    }
}

/// Expected absorbed count due to all transmitters except the nearest.
pub fn e_interferers_fa(s: &Scenario, t: f64) -> Result<f64> {
    interferers_expectation(s, ReceiverKind::Absorbing, t)
}

/// Expected passive count due to all transmitters except the nearest.
pub fn e_interferers_ps(s: &Scenario, t: f64) -> Result<f64> {
    interferers_expectation(s, ReceiverKind::Passive, t)
}

/// Expected level of one signal component at time `t`.
pub fn level(s: &Scenario, kind: ReceiverKind, component: Component, t: f64) -> Result<f64> {
    match (kind, component) {
        (_, Component::Nearest) => nearest_expectation(s, kind, t),
        (_, Component::Interferers) => interferers_expectation(s, kind, t),
        (ReceiverKind::Absorbing, Component::All) => {
            check_time(t)?;
            Ok(e_all_fa_closed(s, t))
        }
        (ReceiverKind::Passive, Component::All) => e_all_ps(s, t),
    }
}

/// Full nearest/interferers/all split at time `t`. The absorbing total uses
/// the closed form; the passive total uses quadrature.
pub fn breakdown(s: &Scenario, kind: ReceiverKind, t: f64) -> Result<ExpectationBreakdown> {
    let e_nearest = nearest_expectation(s, kind, t)?;
    let e_interferers = interferers_expectation(s, kind, t)?;
    let (e_all, method) = match kind {
        ReceiverKind::Absorbing => {
            check_time(t)?;
            (e_all_fa_closed(s, t), Method::ClosedForm)
        }
        ReceiverKind::Passive => (e_all_ps(s, t)?, Method::Quadrature),
    };
    Ok(ExpectationBreakdown {
        e_nearest,
        e_interferers,
        e_all,
        method,
    })
}

/// Expected level of one component over the scenario's whole sample grid.
/// Grid points are independent and evaluated in parallel.
pub fn level_curve(s: &Scenario, kind: ReceiverKind, component: Component) -> Result<SignalCurve> {
    let times = s.sampling.t_grid.clone();
    let mean = times
        .par_iter()
        .map(|&t| level(s, kind, component, t))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SignalCurve::exact(times, mean))
}

/// Expected net change of one component between consecutive samples,
/// indexed by the left endpoint of each interval. The absorbing total uses
/// the closed-form net expression per interval; other series difference the
/// levels.
pub fn net_change_curve(
    s: &Scenario,
    kind: ReceiverKind,
    component: Component,
) -> Result<SignalCurve> {
    if kind == ReceiverKind::Absorbing && component == Component::All {
        let grid = &s.sampling.t_grid;
        let n = grid.len().saturating_sub(1);
        let times: Vec<f64> = grid[..n].to_vec();
        let mean = times
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                check_time(t)?;
                Ok(e_all_fa_net(s, t, grid[k + 1] - t))
            })
            .collect::<Result<Vec<f64>>>()?;
        return Ok(SignalCurve::exact(times, mean));
    }
    Ok(level_curve(s, kind, component)?.net_change())
}
