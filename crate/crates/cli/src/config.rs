//! Run configuration: JSON file schema, defaults, and the merge order
//! `defaults < preset < config file < command-line flags`.

use crate::presets::Preset;
use anyhow::{bail, Context, Result};
use damped_rotor::{BodyParams, IntegratorConfig, State};
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// JSON file schema. Every field is optional; flags override file values.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub params: Option<ParamsConfig>,
    pub omega0: Option<[f64; 3]>,
    pub omega10: Option<[f64; 3]>,
    pub integrator: Option<IntegratorOverrides>,
    /// Output directory; overridden by `--out` and the `DAMPED_ROTOR_OUT`
    /// environment variable default.
    pub outputs: Option<PathBuf>,
    pub seed: Option<u64>,
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(rename = "A")]
    pub moments: [f64; 3],
    #[serde(rename = "I")]
    pub damper_inertia: f64,
    #[serde(rename = "k")]
    pub coupling: f64,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorOverrides {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub h_init: Option<f64>,
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub t_end: Option<f64>,
    pub sample_dt: Option<f64>,
    pub conv_eps: Option<f64>,
    pub conv_window: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Number of trajectories.
    pub count: usize,
    /// Per-component `[low, high]` bounds for the six initial components.
    #[serde(rename = "box")]
    pub sample_box: [[f64; 2]; 6],
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("malformed config file {}", path.display()))
    }
}

impl IntegratorOverrides {
    pub fn apply(&self, base: IntegratorConfig) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol.unwrap_or(base.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(base.abs_tol),
            h_init: self.h_init.unwrap_or(base.h_init),
            h_min: self.h_min.unwrap_or(base.h_min),
            h_max: self.h_max.unwrap_or(base.h_max),
            t_end: self.t_end.unwrap_or(base.t_end),
            sample_dt: self.sample_dt.unwrap_or(base.sample_dt),
            conv_eps: self.conv_eps.unwrap_or(base.conv_eps),
            conv_window: self.conv_window.unwrap_or(base.conv_window),
        }
    }
}

/// Parameter and initial-state flags shared by the subcommands.
#[derive(Debug, Default, Clone, clap::Args)]
pub struct ModelFlags {
    /// Principal moments of inertia, sorted A1 <= A2 <= A3.
    #[arg(long = "A", num_args = 3, value_names = ["A1", "A2", "A3"], allow_negative_numbers = true)]
    pub moments: Option<Vec<f64>>,
    /// Damper moment of inertia.
    #[arg(long = "I", value_name = "I", allow_negative_numbers = true)]
    pub damper_inertia: Option<f64>,
    /// Viscous coupling coefficient.
    #[arg(long = "k", value_name = "K", allow_negative_numbers = true)]
    pub coupling: Option<f64>,
    /// Initial angular velocity of the outer body.
    #[arg(long, num_args = 3, value_names = ["P", "Q", "R"], allow_negative_numbers = true)]
    pub omega0: Option<Vec<f64>>,
    /// Initial angular velocity of the damper.
    #[arg(long, num_args = 3, value_names = ["P1", "Q1", "R1"], allow_negative_numbers = true)]
    pub omega10: Option<Vec<f64>>,
    /// Integration horizon (seconds).
    #[arg(long = "t-end", value_name = "T")]
    pub t_end: Option<f64>,
}

/// Fully resolved single-run setup.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub params: BodyParams,
    pub initial: State,
    pub integrator: IntegratorConfig,
}

/// Merge preset, config file, and flags into a run setup. Precedence:
/// defaults < preset < file < flags.
pub fn resolve_run(preset: Option<Preset>, file: &FileConfig, flags: &ModelFlags) -> Result<ResolvedRun> {
    let mut moments: Option<[f64; 3]> = preset.map(|_| crate::presets::PRESET_MOMENTS);
    let mut damper_inertia = preset.map(|_| crate::presets::PRESET_DAMPER_INERTIA);
    let mut coupling = preset.map(|_| crate::presets::PRESET_COUPLING);
    let mut omega0: Option<[f64; 3]> = preset.map(|p| p.initial_state().omega.into());
    let mut omega10: Option<[f64; 3]> = preset.map(|p| p.initial_state().omega1.into());

    if let Some(p) = &file.params {
        moments = Some(p.moments);
        damper_inertia = Some(p.damper_inertia);
        coupling = Some(p.coupling);
    }
    omega0 = file.omega0.or(omega0);
    omega10 = file.omega10.or(omega10);

    if let Some(m) = &flags.moments {
        moments = Some([m[0], m[1], m[2]]);
    }
    damper_inertia = flags.damper_inertia.or(damper_inertia);
    coupling = flags.coupling.or(coupling);
    if let Some(o) = &flags.omega0 {
        omega0 = Some([o[0], o[1], o[2]]);
    }
    if let Some(o) = &flags.omega10 {
        omega10 = Some([o[0], o[1], o[2]]);
    }

    let Some([a1, a2, a3]) = moments else {
        bail!("missing field `params.A`: supply --A, a config file, or a preset");
    };
    let Some(inertia) = damper_inertia else {
        bail!("missing field `params.I`: supply --I, a config file, or a preset");
    };
    let Some(k) = coupling else {
        bail!("missing field `params.k`: supply --k, a config file, or a preset");
    };
    let params = BodyParams::new(a1, a2, a3, inertia, k).context("invalid field `params`")?;

    let Some(o0) = omega0 else {
        bail!("missing field `omega0`: supply --omega0, a config file, or a preset");
    };
    let Some(o1) = omega10 else {
        bail!("missing field `omega10`: supply --omega10, a config file, or a preset");
    };
    let initial = State::from_components(o0[0], o0[1], o0[2], o1[0], o1[1], o1[2]);
    if !initial.is_finite() {
        bail!("invalid field `omega0`/`omega10`: components must be finite");
    }

    let mut integrator = file.integrator.unwrap_or_default().apply(IntegratorConfig::default());
    if let Some(t_end) = flags.t_end {
        integrator.t_end = t_end;
    }
    integrator.validate().context("invalid field `integrator`")?;

    Ok(ResolvedRun { params, initial, integrator })
}

/// Output directory precedence: `--out` flag, then the config file, then
/// `DAMPED_ROTOR_OUT`, then `./out`.
pub fn resolve_out_dir(flag: Option<PathBuf>, file: &FileConfig) -> PathBuf {
    flag.or_else(|| file.outputs.clone())
        .or_else(|| std::env::var_os("DAMPED_ROTOR_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}
