//! Single-transmitter channel responses.
//!
//! For one point transmitter at radial distance `x` from the receiver
//! center, these functions give the fraction of its emitted molecules that
//! has been absorbed by (fully absorbing receiver), or is currently
//! observed inside (passive receiver), a sphere of radius `r_r` at elapsed
//! time `t`. The passive fraction is evaluated two ways — a closed form and
//! a direct volume quadrature of the point concentration — and their
//! agreement is this module's primary self-test: the closed form does not
//! assume the concentration inside the receiver is uniform, which matters
//! because sampled transmitters can sit arbitrarily close to the surface.
//!
//! All fractions extend continuously to `t = 0` with value 0.

use crate::error::{Error, Result};
use crate::numerics::{self, erfc};
use crate::scenario::{Environment, ReceiverKind, ReceiverSpec};

/// erfc underflows past this argument; the fraction is returned as 0
/// directly rather than evaluating the tail.
const ERFC_UNDERFLOW_ARG: f64 = 30.0;

/// One (transmitter distance, observation time) evaluation point.
#[derive(Debug, Clone, Copy)]
pub struct ChannelQuery {
    pub environment: Environment,
    pub receiver: ReceiverSpec,
    /// Transmitter distance from the receiver center, um.
    pub distance: f64,
    /// Elapsed time since emission, s.
    pub time: f64,
}

impl ChannelQuery {
    /// Builds a query, checking that the transmitter lies outside the
    /// receiver (`distance >= radius`) and that time is nonnegative.
    pub fn new(
        environment: Environment,
        receiver: ReceiverSpec,
        distance: f64,
        time: f64,
    ) -> Result<Self> {
        if !distance.is_finite() || distance < receiver.radius {
            return Err(Error::domain(format!(
                "transmitter distance {distance} must be at least the receiver radius {}",
                receiver.radius
            )));
        }
        if !time.is_finite() || time < 0.0 {
            return Err(Error::domain(format!(
                "time {time} must be nonnegative and finite"
            )));
        }
        Ok(ChannelQuery {
            environment,
            receiver,
            distance,
            time,
        })
    }
}

/// Fraction absorbed by a fully absorbing receiver up to time `t`:
/// `(r_r / x) erfc((x - r_r) / sqrt(4 D t))`.
///
/// Nondecreasing in `t`, nonincreasing in `x`, with ultimate hitting
/// probability `r_r / x` as `t -> inf`.
pub fn fa_fraction(q: &ChannelQuery) -> Result<f64> {
    if q.receiver.kind != ReceiverKind::Absorbing {
        return Err(Error::domain(
            "fa_fraction requires a fully absorbing receiver",
        ));
    }
    Ok(fa_fraction_at(
        q.receiver.radius,
        q.environment.diffusion_coefficient,
        q.distance,
        q.time,
    ))
}

/// Scalar kernel behind [`fa_fraction`]; `x` in um, `t` in s.
#[inline]
pub fn fa_fraction_at(radius: f64, diffusion: f64, x: f64, t: f64) -> f64 {
    debug_assert!(x >= radius);
    if t <= 0.0 {
        return 0.0;
    }
    let arg = (x - radius) / (4.0 * diffusion * t).sqrt();
    if arg > ERFC_UNDERFLOW_ARG {
        return 0.0;
    }
    (radius / x) * erfc(arg)
}

/// Free-space point concentration at distance `x` from an impulse source,
/// per emitted molecule: `(4 pi D t)^{-3/2} exp(-x^2 / (4 D t))`, um^-3.
pub fn ps_point_concentration(q: &ChannelQuery) -> Result<f64> {
    if q.time <= 0.0 {
        return Err(Error::domain("point concentration requires t > 0"));
    }
    Ok(point_concentration_at(
        q.environment.diffusion_coefficient,
        q.distance,
        q.time,
    ))
}

/// Scalar kernel behind [`ps_point_concentration`]; defined for any
/// `x >= 0`, returns 0 at `t = 0` by continuous extension.
#[inline]
pub fn point_concentration_at(diffusion: f64, x: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let four_dt = 4.0 * diffusion * t;
    (std::f64::consts::PI * four_dt).powf(-1.5) * (-x * x / four_dt).exp()
}

/// Fraction of molecules observed inside a passive receiver at time `t`,
/// exact (non-uniform concentration) closed form.
pub fn ps_fraction_exact(q: &ChannelQuery) -> Result<f64> {
    if q.receiver.kind != ReceiverKind::Passive {
        return Err(Error::domain(
            "ps_fraction_exact requires a passive receiver",
        ));
    }
    if q.distance == 0.0 {
        return Err(Error::domain("ps_fraction_exact is singular at x = 0"));
    }
    Ok(ps_fraction_exact_at(
        q.receiver.radius,
        q.environment.diffusion_coefficient,
        q.distance,
        q.time,
    ))
}

/// Scalar kernel behind [`ps_fraction_exact`].
///
/// `0.5 [erf((r_r - x)/(2 sqrt(D t))) + erf((r_r + x)/(2 sqrt(D t)))]
///  + sqrt(D t)/(sqrt(pi) x) [exp(-(r_r + x)^2/(4 D t)) - exp(-(x - r_r)^2/(4 D t))]`
///
/// The erf pair is evaluated through erfc to keep precision once both
/// arguments are large.
#[inline]
pub fn ps_fraction_exact_at(radius: f64, diffusion: f64, x: f64, t: f64) -> f64 {
    debug_assert!(x > 0.0);
    if t <= 0.0 {
        return 0.0;
    }
    let s = (diffusion * t).sqrt();
    let a = (radius - x) / (2.0 * s);
    let b = (radius + x) / (2.0 * s);
    // 0.5 (erf(a) + erf(b)) == 0.5 (erfc(-a) - erfc(b))
    let erf_pair = 0.5 * (erfc(-a) - erfc(b));
    let exp_pair = (-b * b).exp() - (-a * a).exp();
    let value = erf_pair + s / (std::f64::consts::PI.sqrt() * x) * exp_pair;
    value.clamp(0.0, 1.0)
}

/// Same observable as [`ps_fraction_exact`], but integrating the point
/// concentration over the receiver volume numerically. Serves as the
/// in-repo oracle for the closed form.
pub fn ps_fraction_by_quadrature(q: &ChannelQuery) -> Result<f64> {
    if q.receiver.kind != ReceiverKind::Passive {
        return Err(Error::domain(
            "ps_fraction_by_quadrature requires a passive receiver",
        ));
    }
    if q.distance == 0.0 {
        return Err(Error::domain(
            "ps_fraction_by_quadrature is singular at x = 0",
        ));
    }
    ps_fraction_by_quadrature_at(
        q.receiver.radius,
        q.environment.diffusion_coefficient,
        q.distance,
        q.time,
    )
}

/// Scalar kernel behind [`ps_fraction_by_quadrature`].
///
/// The 3D integral of the Gaussian concentration over the sphere reduces to
/// a radial-shell integral: a shell of radius `s` seen from a source at
/// distance `x` contributes
/// `(4 pi D t s / x) (4 pi D t)^{-3/2} [exp(-(x-s)^2/(4 D t)) - exp(-(x+s)^2/(4 D t))] ds`,
/// with the hyperbolic-sine kernel written in exponential form to avoid
/// overflow.
pub fn ps_fraction_by_quadrature_at(radius: f64, diffusion: f64, x: f64, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let four_dt = 4.0 * diffusion * t;
    let prefactor = (std::f64::consts::PI * four_dt).powf(-1.5);
    let shell = |s: f64| {
        let dm = x - s;
        let dp = x + s;
        prefactor
            * (std::f64::consts::PI * four_dt * s / x)
            * ((-dm * dm / four_dt).exp() - (-dp * dp / four_dt).exp())
    };
    let r = numerics::integrate_finite(shell, 0.0, radius, 1e-11, 1e-14)?;
    Ok(r.value)
}

/// Channel fraction for either receiver kind: cumulative absorbed fraction
/// for the absorbing receiver, instantaneous observed fraction for the
/// passive one.
#[inline]
pub fn fraction_at(kind: ReceiverKind, radius: f64, diffusion: f64, x: f64, t: f64) -> f64 {
    match kind {
        ReceiverKind::Absorbing => fa_fraction_at(radius, diffusion, x, t),
        ReceiverKind::Passive => ps_fraction_exact_at(radius, diffusion, x, t),
    }
}

/// Uniform-concentration approximation: point concentration at the center
/// times the receiver volume. Accurate only when `x >> r_r`.
pub fn ps_fraction_uca(q: &ChannelQuery) -> Result<f64> {
    ps_point_concentration(q).map(|c| c * q.receiver.volume())
}

/// Scalar kernel behind [`ps_fraction_uca`].
#[inline]
pub fn ps_fraction_uca_at(radius: f64, diffusion: f64, x: f64, t: f64) -> f64 {
    point_concentration_at(diffusion, x, t) * (4.0 / 3.0 * std::f64::consts::PI * radius.powi(3))
}
