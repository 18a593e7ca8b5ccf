//! Serialized outputs: `report.json`, `classification.csv`, `sweep.csv`,
//! and a small gnuplot script next to each trajectory. Field names are
//! stable; everything needed to re-verify the momentum and energy limit
//! identities offline is included.

use damped_rotor::analysis::ConvergenceReport;
use damped_rotor::dynamics::{balances, BodyParams, Degeneracy, State};
use damped_rotor::integrator::{IntegratorConfig, StopReason, TrajectoryRecord};
use damped_rotor::spectral::{AxisLabel, Classification, Equilibrium, Spectrum};
use damped_rotor::AttainabilityReport;
use serde::Serialize;

pub fn stop_reason_str(stop: &StopReason) -> &'static str {
    match stop {
        StopReason::Converged { .. } => "converged",
        StopReason::HorizonReached => "horizon-reached",
        StopReason::StepFailure { .. } => "step-failure",
    }
}

fn degeneracy_str(d: Degeneracy) -> &'static str {
    match d {
        Degeneracy::Distinct => "distinct",
        Degeneracy::LowPair => "equal-low-pair",
        Degeneracy::HighPair => "equal-high-pair",
        Degeneracy::Sphere => "sphere",
    }
}

#[derive(Debug, Serialize)]
pub struct ParamsOut {
    #[serde(rename = "A")]
    pub moments: [f64; 3],
    #[serde(rename = "I")]
    pub damper_inertia: f64,
    pub k: f64,
}

impl ParamsOut {
    pub fn new(p: &BodyParams) -> Self {
        Self { moments: p.moments(), damper_inertia: p.damper_inertia(), k: p.coupling() }
    }
}

#[derive(Debug, Serialize)]
pub struct IntegratorOut {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub t_end: f64,
    pub sample_dt: f64,
    pub conv_eps: f64,
    pub conv_window: f64,
}

impl IntegratorOut {
    pub fn new(c: &IntegratorConfig) -> Self {
        Self {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            h_init: c.h_init,
            h_min: c.h_min,
            h_max: c.h_max,
            t_end: c.t_end,
            sample_dt: c.sample_dt,
            conv_eps: c.conv_eps,
            conv_window: c.conv_window,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct AttainabilityOut {
    pub case: &'static str,
    /// Signed `LHS - RHS` margins of the sufficient conditions; strict
    /// satisfaction means every margin is positive, vacuous for the sphere.
    pub margins: Vec<f64>,
    pub minor_axis_margin: Option<f64>,
    pub satisfied: bool,
}

impl AttainabilityOut {
    pub fn new(r: &AttainabilityReport) -> Self {
        Self {
            case: degeneracy_str(r.degeneracy),
            margins: r.margins.clone(),
            minor_axis_margin: r.minor_axis_margin,
            satisfied: r.satisfied(),
        }
    }
}

/// The `report.json` payload for one simulated trajectory.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub params: ParamsOut,
    pub omega0: [f64; 3],
    pub omega10: [f64; 3],
    pub integrator: IntegratorOut,
    pub stop_reason: &'static str,
    pub t_star: Option<f64>,
    pub t_final: f64,
    pub v0: f64,
    pub ksq0: f64,
    pub v_final: f64,
    pub omega_bar: [f64; 3],
    pub attained_axis: Option<&'static str>,
    pub fitted_rate: Option<f64>,
    pub fit_goodness: Option<f64>,
    pub predicted_rate: Option<f64>,
    pub d_inf: f64,
    pub momentum_limit_residual: f64,
    pub energy_limit_residual: f64,
    pub ksq_max_rel_drift: f64,
    pub max_energy_increase: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub attainability: AttainabilityOut,
}

impl RunReport {
    pub fn new(
        params: &BodyParams,
        initial: &State,
        cfg: &IntegratorConfig,
        record: &TrajectoryRecord,
        analysis: &ConvergenceReport,
        attainability: &AttainabilityReport,
    ) -> Self {
        let b0 = balances(params, initial);
        Self {
            params: ParamsOut::new(params),
            omega0: initial.omega.into(),
            omega10: initial.omega1.into(),
            integrator: IntegratorOut::new(cfg),
            stop_reason: stop_reason_str(&record.stop_reason),
            t_star: analysis.t_star,
            t_final: record.last().t,
            v0: b0.kinetic_energy,
            ksq0: b0.momentum_sq,
            v_final: record.last().kinetic_energy,
            omega_bar: analysis.omega_bar.into(),
            attained_axis: analysis.attained_axis.map(|a| a.as_str()),
            fitted_rate: analysis.fitted_rate,
            fit_goodness: analysis.fit_goodness,
            predicted_rate: analysis.predicted_rate,
            d_inf: analysis.d_inf,
            momentum_limit_residual: analysis.momentum_residual,
            energy_limit_residual: analysis.energy_residual,
            ksq_max_rel_drift: record.ksq_max_rel_drift,
            max_energy_increase: record.max_energy_increase(),
            steps_accepted: record.steps_accepted,
            steps_rejected: record.steps_rejected,
            attainability: AttainabilityOut::new(attainability),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// One row per equilibrium family for `classification.csv`.
pub const CLASSIFICATION_HEADER: &str = "a1,a2,a3,I,k,label,lambda_star,omega_p,omega_q,omega_r,\
ev1_re,ev1_im,ev2_re,ev2_im,ev3_re,ev3_im,ev4_re,ev4_im,ev5_re,ev5_im,ev6_re,ev6_im,\
zero_multiplicity,n_unstable,n_stable,verdict,semisimple_zero,tangent_matches_null";

pub fn classification_row(
    params: &BodyParams,
    eq: &Equilibrium,
    spectrum: &Spectrum,
    class: &Classification,
) -> String {
    let [a1, a2, a3] = params.moments();
    let o = eq.omega_star();
    let mut fields = vec![
        fmt(a1),
        fmt(a2),
        fmt(a3),
        fmt(params.damper_inertia()),
        fmt(params.coupling()),
        eq.axis_label().as_str().to_string(),
        fmt(eq.lambda_star()),
        fmt(o.x),
        fmt(o.y),
        fmt(o.z),
    ];
    for e in &spectrum.eigenvalues {
        fields.push(fmt(e.re));
        fields.push(fmt(e.im));
    }
    fields.push(spectrum.zero_multiplicity.to_string());
    fields.push(spectrum.n_unstable.to_string());
    fields.push(spectrum.n_stable.to_string());
    fields.push(class.verdict.as_str().to_string());
    fields.push(class.semisimple_zero.to_string());
    fields.push(class.tangent_matches_null.to_string());
    fields.join(",")
}

/// Header of `sweep.csv`; one row per trajectory, then an aggregate
/// comment line with the axis-attainment counts.
pub const SWEEP_HEADER: &str = "seed,p0,q0,r0,p10,q10,r10,stop_reason,attained_axis,t_star,\
fitted_rate,predicted_rate,margin_1,margin_2,minor_axis_margin";

#[derive(Debug)]
pub struct SweepRow {
    pub seed: u64,
    pub initial: State,
    pub stop_reason: &'static str,
    pub attained_axis: Option<AxisLabel>,
    pub t_star: Option<f64>,
    pub fitted_rate: Option<f64>,
    pub predicted_rate: Option<f64>,
    pub margins: Vec<f64>,
    pub minor_axis_margin: Option<f64>,
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        let o = self.initial.omega;
        let o1 = self.initial.omega1;
        [
            self.seed.to_string(),
            fmt(o.x),
            fmt(o.y),
            fmt(o.z),
            fmt(o1.x),
            fmt(o1.y),
            fmt(o1.z),
            self.stop_reason.to_string(),
            self.attained_axis.map(|a| a.as_str()).unwrap_or("ambiguous").to_string(),
            fmt_opt(self.t_star),
            fmt_opt(self.fitted_rate),
            fmt_opt(self.predicted_rate),
            fmt_opt(self.margins.first().copied()),
            fmt_opt(self.margins.get(1).copied()),
            fmt_opt(self.minor_axis_margin),
        ]
        .join(",")
    }
}

pub fn sweep_aggregate_line(rows: &[SweepRow]) -> String {
    let converged = rows.iter().filter(|r| r.stop_reason == "converged").count();
    let mut counts = [
        (AxisLabel::Axis1, 0usize),
        (AxisLabel::Axis2, 0),
        (AxisLabel::Axis3, 0),
        (AxisLabel::Plane12, 0),
        (AxisLabel::Plane23, 0),
        (AxisLabel::AnyAxis, 0),
        (AxisLabel::Origin, 0),
    ];
    let mut ambiguous = 0usize;
    for row in rows {
        match row.attained_axis {
            Some(axis) => {
                if let Some(slot) = counts.iter_mut().find(|(a, _)| *a == axis) {
                    slot.1 += 1;
                }
            }
            None => ambiguous += 1,
        }
    }
    let mut line = format!("# count={} converged={converged}", rows.len());
    for (axis, n) in counts {
        line.push_str(&format!(" {}={n}", axis.as_str()));
    }
    line.push_str(&format!(" ambiguous={ambiguous}"));
    line
}

/// gnuplot script plotting the six angular-velocity components of a
/// trajectory CSV.
pub fn gnuplot_script(csv_name: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 't'\n\
         set ylabel 'angular velocity components'\n\
         plot for [col=2:7] '{csv_name}' using 1:col with lines\n\
         pause -1 'press enter to close'\n"
    )
}
