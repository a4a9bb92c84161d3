//! Domain types, canonical units, and scenario validation.
//!
//! Canonical internal units are micrometers and seconds throughout:
//! lengths in um, times in s, diffusion in um^2/s, densities in um^-3.
//! The receiver is centered at the coordinate origin and all molecule
//! emissions happen at the global-clock instant `t = 0`; the time argument
//! of every engine is elapsed time since emission.

use crate::error::{Error, Result};

/// Conversion factor from m^2/s to um^2/s.
pub const M2_PER_S_TO_UM2_PER_S: f64 = 1e12;

/// Fluid environment: molecules diffuse with a constant coefficient, no flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    /// Diffusion coefficient in um^2/s.
    pub diffusion_coefficient: f64,
}

/// Receiver behavior at its spherical boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverKind {
    /// Permanently captures every molecule reaching the surface; the signal
    /// is the cumulative absorbed count.
    #[serde(alias = "fully_absorbing", alias = "fa")]
    Absorbing,
    /// Transparent; counts molecules currently inside without affecting them.
    #[serde(alias = "ps")]
    Passive,
}

impl std::fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReceiverKind::Absorbing => write!(f, "absorbing"),
            ReceiverKind::Passive => write!(f, "passive"),
        }
    }
}

/// Spherical receiver centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverSpec {
    pub kind: ReceiverKind,
    /// Radius in um.
    pub radius: f64,
}

impl ReceiverSpec {
    /// Receiver volume in um^3.
    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3)
    }
}

/// Homogeneous Poisson field of point transmitters outside the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmitterField {
    /// Transmitter density in um^-3.
    pub density: f64,
    /// Probability that a transmitter is actively emitting, in (0, 1].
    pub activity: f64,
    /// Molecules released per transmitter pulse.
    pub pulse_amplitude: f64,
    /// Emission epoch in s; pinned to 0 by the global-clock assumption.
    pub emission_time: f64,
}

impl TransmitterField {
    /// Active transmitter density: thinning of the field by the activity
    /// probability. Exactly `density * activity`.
    #[inline]
    pub fn active_density(&self) -> f64 {
        self.density * self.activity
    }
}

/// Receiver sampling instants.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingScheme {
    /// Strictly increasing sample times in s, starting at or after 0.
    pub t_grid: Vec<f64>,
    /// Interval between samples used for net-change observables, in s.
    pub interval: f64,
}

impl SamplingScheme {
    /// Uniform grid 0, dt, 2 dt, ..., covering `t_end`.
    pub fn uniform(t_end: f64, interval: f64) -> Self {
        let steps = if interval > 0.0 && t_end > 0.0 {
            (t_end / interval + 0.5).floor() as usize
        } else {
            0
        };
        let t_grid = (0..=steps).map(|k| k as f64 * interval).collect();
        SamplingScheme { t_grid, interval }
    }

    pub fn t_end(&self) -> f64 {
        self.t_grid.last().copied().unwrap_or(0.0)
    }
}

/// A complete model instance shared by every engine.
///
/// `max_placement_radius` bounds sampled transmitter positions only; the
/// analytic integrals always run to infinity. It may be infinite, in which
/// case only the analytic engine applies.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub environment: Environment,
    pub receiver: ReceiverSpec,
    pub field: TransmitterField,
    pub sampling: SamplingScheme,
    /// Maximum sampled transmitter distance in um (may be infinite).
    pub max_placement_radius: f64,
}

impl Scenario {
    /// Checks every type invariant and returns the scenario as validated.
    /// All violations are reported at once, each with its field path.
    pub fn validate(self) -> Result<ValidatedScenario> {
        validate_scenario(self)
    }
}

/// Proof token that a [`Scenario`] passed validation. Immutable; safe to
/// share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedScenario(Scenario);

impl std::ops::Deref for ValidatedScenario {
    type Target = Scenario;
    fn deref(&self) -> &Scenario {
        &self.0
    }
}

impl ValidatedScenario {
    pub fn scenario(&self) -> &Scenario {
        &self.0
    }

    pub fn into_inner(self) -> Scenario {
        self.0
    }
}

/// Validates all scenario invariants, reporting every violation with its
/// field path.
pub fn validate_scenario(s: Scenario) -> Result<ValidatedScenario> {
    let mut violations = Vec::new();
    let mut check = |ok: bool, path: &str, msg: &str| {
        if !ok {
            violations.push(format!("{path}: {msg}"));
        }
    };

    let d = s.environment.diffusion_coefficient;
    check(
        d.is_finite() && d > 0.0,
        "environment.diffusion_coefficient",
        "diffusion coefficient must be positive and finite",
    );

    check(
        s.receiver.radius.is_finite() && s.receiver.radius > 0.0,
        "receiver.radius",
        "radius must be positive",
    );

    check(
        s.field.density.is_finite() && s.field.density >= 0.0,
        "field.density",
        "density must be nonnegative and finite",
    );
    check(
        s.field.activity > 0.0 && s.field.activity <= 1.0,
        "field.activity",
        "activity probability must be in (0, 1]",
    );
    check(
        s.field.pulse_amplitude.is_finite() && s.field.pulse_amplitude > 0.0,
        "field.pulse_amplitude",
        "pulse amplitude must be positive",
    );
    check(
        s.field.emission_time == 0.0,
        "field.emission_time",
        "emission time is fixed at 0 by the global-clock assumption",
    );

    check(
        s.sampling.interval.is_finite() && s.sampling.interval > 0.0,
        "sampling.interval",
        "sampling interval must be positive",
    );
    check(
        !s.sampling.t_grid.is_empty(),
        "sampling.t_grid",
        "sample grid must not be empty",
    );
    let grid_ok = s.sampling.t_grid.windows(2).all(|w| w[0] < w[1])
        && s.sampling.t_grid.first().is_none_or(|&t| t >= 0.0)
        && s.sampling.t_grid.iter().all(|t| t.is_finite());
    check(
        grid_ok,
        "sampling.t_grid",
        "sample times must be finite, nonnegative, and strictly increasing",
    );

    if s.max_placement_radius.is_finite() {
        check(
            s.max_placement_radius > s.receiver.radius,
            "max_placement_radius",
            "placement radius must exceed the receiver radius",
        );
    } else {
        check(
            s.max_placement_radius == f64::INFINITY,
            "max_placement_radius",
            "placement radius must be a positive real or +infinity",
        );
    }

    if violations.is_empty() {
        Ok(ValidatedScenario(s))
    } else {
        Err(Error::InvalidScenario { violations })
    }
}
