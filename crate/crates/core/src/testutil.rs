//! Shared scenario builders for unit tests.

use crate::scenario::{
    Environment, ReceiverKind, ReceiverSpec, SamplingScheme, Scenario, TransmitterField,
};

/// The bundled fig2 validation setup: D = 80 um^2/s,
/// lambda_a = 1e-4 um^-3, R = 50 um, T_ss = 0.01 s, r_r = 5 um, N_tx = 1e4.
pub(crate) fn fig2_scenario(kind: ReceiverKind) -> Scenario {
    Scenario {
        environment: Environment {
            diffusion_coefficient: 80.0,
        },
        receiver: ReceiverSpec { kind, radius: 5.0 },
        field: TransmitterField {
            density: 1e-4,
            activity: 1.0,
            pulse_amplitude: 1e4,
            emission_time: 0.0,
        },
        sampling: SamplingScheme::uniform(1.0, 0.01),
        max_placement_radius: 50.0,
    }
}

/// Denser, faster-diffusion setup: D = 120 um^2/s, lambda_a = 1e-3 um^-3,
/// R = 100 um, T_ss = 0.1 s.
pub(crate) fn fig3_scenario(kind: ReceiverKind) -> Scenario {
    Scenario {
        environment: Environment {
            diffusion_coefficient: 120.0,
        },
        receiver: ReceiverSpec { kind, radius: 5.0 },
        field: TransmitterField {
            density: 1e-3,
            activity: 1.0,
            pulse_amplitude: 1e4,
            emission_time: 0.0,
        },
        sampling: SamplingScheme::uniform(2.0, 0.1),
        max_placement_radius: 100.0,
    }
}
