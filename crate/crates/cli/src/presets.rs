//! Built-in experiment presets: the reference configuration with
//! `k = I = 1`, `A = diag(3, 3, 7)` and three initial conditions that
//! showcase the long-time behaviour.

use clap::ValueEnum;
use damped_rotor::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[allow(clippy::enum_variant_names)] // variant names become the CLI preset names
pub enum Preset {
    /// Co-aligned planar spin: settles in the tied A1 = A2 plane.
    FigStable,
    /// Same state with the fifth coordinate perturbed by -0.01: settles on
    /// the major axis instead.
    FigUnstable,
    /// Crossed initial spins that fail the sufficient attainability
    /// condition yet still reach the major axis.
    FigAttain,
}

pub const PRESET_MOMENTS: [f64; 3] = [3.0, 3.0, 7.0];
pub const PRESET_DAMPER_INERTIA: f64 = 1.0;
pub const PRESET_COUPLING: f64 = 1.0;

pub const FIG_STABLE_STATE: [f64; 6] = [1.5, 3.0, 0.0, -1.0, -2.0, 0.0];
pub const FIG_UNSTABLE_STATE: [f64; 6] = [1.5, 3.0, 0.0, -1.0, -2.01, 0.0];
pub const FIG_ATTAIN_STATE: [f64; 6] = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0];

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::FigStable, Preset::FigUnstable, Preset::FigAttain];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::FigStable => "fig-stable",
            Preset::FigUnstable => "fig-unstable",
            Preset::FigAttain => "fig-attain",
        }
    }

    pub fn initial_state(&self) -> State {
        let c = match self {
            Preset::FigStable => FIG_STABLE_STATE,
            Preset::FigUnstable => FIG_UNSTABLE_STATE,
            Preset::FigAttain => FIG_ATTAIN_STATE,
        };
        State::from_components(c[0], c[1], c[2], c[3], c[4], c[5])
    }
}
