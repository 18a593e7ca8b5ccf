//! Post-run analysis: attainability conditions on initial data, limit
//! identities implied by the conserved momentum and dissipated energy,
//! identification of the attained axis, and exponential-rate fitting.

use crate::dynamics::{balances, BodyParams, Degeneracy, State};
use crate::integrator::{StopReason, TrajectoryRecord};
use crate::spectral::{classify, AxisLabel, Equilibrium};
use nalgebra::Vector3;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("no eigenspace captures the limit vector: fractions {0:?}")]
    AmbiguousLimit(Vec<f64>),
}

/// Signed margins of the sufficient conditions guaranteeing convergence to
/// the major axis. A condition from the theorem reads `LHS > RHS`; the
/// stored margin is `LHS - RHS`, so strict satisfaction means margin > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AttainabilityReport {
    pub degeneracy: Degeneracy,
    /// One margin for the tied cases, two for distinct moments, none for
    /// the sphere (every condition is vacuous there).
    pub margins: Vec<f64>,
    /// Margin of the companion sufficient condition for convergence to a
    /// principal axis of the tied pair `A1 = A2`; only in that case.
    pub minor_axis_margin: Option<f64>,
}

impl AttainabilityReport {
    /// All sufficient-condition margins strictly positive. False for the
    /// sphere, where no condition applies.
    pub fn satisfied(&self) -> bool {
        !self.margins.is_empty() && self.margins.iter().all(|m| *m > 0.0)
    }
}

/// Evaluate the attainability inequalities on initial data. The case split
/// follows the exact degeneracy pattern of the moments; all conditions are
/// evaluated verbatim on `Omega(0) = (p, q, r)` and `Omega1(0)`.
pub fn attainability(params: &BodyParams, s0: &State) -> AttainabilityReport {
    let [a1, a2, a3] = params.moments();
    let i = params.damper_inertia();
    let (p0, q0, r0) = (s0.omega.x, s0.omega.y, s0.omega.z);
    let cross_term = 2.0 * params.j_apply(&s0.omega).dot(&(i * s0.omega1));
    let magnitude = s0.omega.norm_squared() + s0.omega1.norm_squared();
    let degeneracy = params.degeneracy();

    let margins = match degeneracy {
        Degeneracy::LowPair => {
            vec![(a3 - i) * (a3 - a1) * r0 * r0 + cross_term - a1 * i * magnitude]
        }
        Degeneracy::Distinct => vec![
            (a2 - i) * (a2 - a1) * q0 * q0 + (a3 - i) * (a3 - a1) * r0 * r0 + cross_term - a1 * i * magnitude,
            (a1 - i) * (a1 - a2) * p0 * p0 + (a3 - i) * (a3 - a2) * r0 * r0 + cross_term - a2 * i * magnitude,
        ],
        Degeneracy::HighPair => {
            vec![(a3 - i) * (a3 - a1) * (q0 * q0 + r0 * r0) + cross_term - a1 * i * magnitude]
        }
        Degeneracy::Sphere => Vec::new(),
    };
    let minor_axis_margin = (degeneracy == Degeneracy::LowPair).then(|| {
        (a1 - a3) * (a1 - i) * (s0.omega.norm_squared() - r0 * r0) + cross_term - a3 * i * magnitude
    });
    AttainabilityReport { degeneracy, margins, minor_axis_margin }
}

/// Project a limit vector onto the eigenspaces of J and label the one
/// capturing at least `1 - 1e-8` of its squared norm. The exact zero vector
/// is labelled `Origin`; when no eigenspace dominates the limit is
/// ambiguous, which signals non-convergence.
pub fn classify_limit_axis(params: &BodyParams, omega_bar: &Vector3<f64>) -> Result<AxisLabel, AnalysisError> {
    let total = omega_bar.norm_squared();
    if total == 0.0 {
        return Ok(AxisLabel::Origin);
    }
    let mut fractions = Vec::new();
    for (lambda, axes) in params.distinct_moments() {
        let captured: f64 = axes.iter().map(|&i| omega_bar[i] * omega_bar[i]).sum();
        let fraction = captured / total;
        if fraction >= 1.0 - 1e-8 {
            return Ok(match Equilibrium::from_omega(params, &project(omega_bar, &axes)) {
                Ok(eq) => eq.axis_label(),
                Err(_) => unreachable!("projection onto the {lambda}-eigenspace is an eigenvector"),
            });
        }
        fractions.push(fraction);
    }
    Err(AnalysisError::AmbiguousLimit(fractions))
}

fn project(v: &Vector3<f64>, axes: &[usize]) -> Vector3<f64> {
    let mut out = Vector3::zeros();
    for &i in axes {
        out[i] = v[i];
    }
    out
}

/// Residuals of the two conservation-implied identities tying the limit
/// `omega_bar = (p, q, r)` to the initial data:
///
/// ```text
/// (A1+I)^2 p^2 + (A2+I)^2 q^2 + (A3+I)^2 r^2  =  K^2(0)
/// (A1+I)   p^2 + (A2+I)   q^2 + (A3+I)   r^2  =  2 V(0) - 2 D
/// ```
///
/// where `D` is the accumulated dissipation measured along the trajectory.
pub fn limit_identities(params: &BodyParams, s0: &State, omega_bar: &Vector3<f64>, dissipated: f64) -> (f64, f64) {
    let i = params.damper_inertia();
    let b0 = balances(params, s0);
    let mut momentum_lhs = 0.0;
    let mut energy_lhs = 0.0;
    for (axis, a) in params.moments().iter().enumerate() {
        let coefficient = a + i;
        let sq = omega_bar[axis] * omega_bar[axis];
        momentum_lhs += coefficient * coefficient * sq;
        energy_lhs += coefficient * sq;
    }
    (
        (momentum_lhs - b0.momentum_sq).abs(),
        (energy_lhs - (2.0 * b0.kinetic_energy - 2.0 * dissipated)).abs(),
    )
}

/// Outcome of fitting an exponential rate to the relative-velocity tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateFit {
    Fitted {
        /// Decay rate `c` in `|Omega - Omega1| ~ C exp(-c t)`.
        rate: f64,
        /// Coefficient of determination of the log-linear fit.
        goodness: f64,
    },
    /// Fewer than 20 samples in the tail window.
    Indeterminate,
}

/// Least-squares slope of `log |Omega(t) - Omega1(t)|` over the terminal
/// tail, where the relative speed lies in `[10 conv_eps, 1e-3 * initial
/// value]`.
///
/// Only the terminal pass through that window is used: everything up to and
/// including the last sample above the upper bound is discarded, and the
/// fit stops at the first sample below the lower bound after it. A
/// trajectory that shadows an unstable equilibrium dips into the window
/// early, grows back out, and only then decays for good; mixing the dip
/// into the fit would blend two unrelated rates.
pub fn fit_rate(record: &TrajectoryRecord, conv_eps: f64) -> RateFit {
    let initial = record.initial().state.relative_velocity().norm();
    let lo = 10.0 * conv_eps;
    let hi = 1e-3 * initial;
    let speeds: Vec<f64> = record.samples.iter().map(|s| s.state.relative_velocity().norm()).collect();
    let start = speeds.iter().rposition(|v| *v > hi).map_or(0, |i| i + 1);
    let end = (start..speeds.len()).find(|&i| speeds[i] < lo).unwrap_or(speeds.len());
    let tail: Vec<(f64, f64)> = (start..end).map(|i| (record.samples[i].t, speeds[i].ln())).collect();
    if tail.len() < 20 {
        return RateFit::Indeterminate;
    }
    let n = tail.len() as f64;
    let mean_t = tail.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_y = tail.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for (t, y) in &tail {
        stt += (t - mean_t) * (t - mean_t);
        sty += (t - mean_t) * (y - mean_y);
    }
    let slope = sty / stt;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (t, y) in &tail {
        let fitted = mean_y + slope * (t - mean_t);
        ss_res += (y - fitted) * (y - fitted);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    let goodness = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    RateFit::Fitted { rate: -slope, goodness }
}

/// Everything the toolkit can say about a finished trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// The common limit of `Omega` and `Omega1`, taken from the final state.
    pub omega_bar: Vector3<f64>,
    /// Eigenspace label of the limit; `None` when no eigenspace dominates
    /// (a non-converged or ambiguous run).
    pub attained_axis: Option<AxisLabel>,
    /// Start of the dwell interval that triggered convergence, if any.
    pub t_star: Option<f64>,
    pub fitted_rate: Option<f64>,
    pub fit_goodness: Option<f64>,
    /// Slowest spectral decay rate at the attained equilibrium,
    /// `-max{Re l : Re l < -tau}`.
    pub predicted_rate: Option<f64>,
    /// Accumulated dissipation `k ∫ |Omega1 - Omega|^2 dt`.
    pub d_inf: f64,
    /// Residual of the momentum limit identity.
    pub momentum_residual: f64,
    /// Residual of the energy limit identity.
    pub energy_residual: f64,
}

/// Assemble the convergence report for a record produced by the integrator.
pub fn analyze(params: &BodyParams, s0: &State, record: &TrajectoryRecord, conv_eps: f64) -> ConvergenceReport {
    let omega_bar = record.final_state().omega;
    let attained_axis = classify_limit_axis(params, &omega_bar).ok();
    let t_star = match record.stop_reason {
        StopReason::Converged { t_star } => Some(t_star),
        _ => None,
    };
    let (fitted_rate, fit_goodness) = match fit_rate(record, conv_eps) {
        RateFit::Fitted { rate, goodness } => (Some(rate), Some(goodness)),
        RateFit::Indeterminate => (None, None),
    };
    let predicted_rate = attained_axis
        .filter(|label| *label != AxisLabel::Origin)
        .and_then(|_| {
            let axes: Vec<usize> = params
                .distinct_moments()
                .into_iter()
                .find(|(_, axes)| {
                    axes.iter().map(|&i| omega_bar[i] * omega_bar[i]).sum::<f64>() >= (1.0 - 1e-8) * omega_bar.norm_squared()
                })
                .map(|(_, axes)| axes)?;
            let eq = Equilibrium::from_omega(params, &project(&omega_bar, &axes)).ok()?;
            let (spectrum, _) = classify(params, &eq).ok()?;
            spectrum.slowest_decay_rate()
        });
    let (momentum_residual, energy_residual) = limit_identities(params, s0, &omega_bar, record.dissipated_energy);
    ConvergenceReport {
        omega_bar,
        attained_axis,
        t_star,
        fitted_rate,
        fit_goodness,
        predicted_rate,
        d_inf: record.dissipated_energy,
        momentum_residual,
        energy_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{Sample, StopReason};

    fn p337() -> BodyParams {
        BodyParams::new(3.0, 3.0, 7.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn attainability_margin_for_crossed_initial_data() {
        // Omega(0) = (1,0,0), Omega1(0) = (0,1,0): the cross term vanishes
        // and the condition fails by exactly the right-hand side.
        let report = attainability(&p337(), &State::from_components(1.0, 0.0, 0.0, 0.0, 1.0, 0.0));
        assert_eq!(report.degeneracy, Degeneracy::LowPair);
        assert_eq!(report.margins.len(), 1);
        assert!((report.margins[0] - (-6.0)).abs() < 1e-14, "margin {}", report.margins[0]);
        assert!(!report.satisfied());
        assert!(report.minor_axis_margin.is_some());
    }

    #[test]
    fn attainability_margin_for_major_axis_rotation() {
        let report = attainability(&p337(), &State::from_components(0.0, 0.0, 1.0, 0.0, 0.0, 1.0));
        assert!((report.margins[0] - 32.0).abs() < 1e-14, "margin {}", report.margins[0]);
        assert!(report.satisfied());
    }

    #[test]
    fn attainability_margin_for_perturbed_planar_state() {
        let report = attainability(&p337(), &State::from_components(1.5, 3.0, 0.0, -1.0, -2.01, 0.0));
        assert!((report.margins[0] - (-94.0503)).abs() < 1e-10, "margin {}", report.margins[0]);
        assert!(!report.satisfied());
    }

    #[test]
    fn attainability_cases_follow_degeneracy() {
        let s = State::from_components(1.0, 1.0, 1.0, 0.0, 0.0, 0.0);
        let distinct = attainability(&BodyParams::new(2.0, 3.0, 7.0, 1.0, 1.0).unwrap(), &s);
        assert_eq!(distinct.degeneracy, Degeneracy::Distinct);
        assert_eq!(distinct.margins.len(), 2);
        assert!(distinct.minor_axis_margin.is_none());

        let high = attainability(&BodyParams::new(1.0, 5.0, 5.0, 1.0, 1.0).unwrap(), &s);
        assert_eq!(high.degeneracy, Degeneracy::HighPair);
        assert_eq!(high.margins.len(), 1);

        let sphere = attainability(&BodyParams::new(5.0, 5.0, 5.0, 1.0, 1.0).unwrap(), &s);
        assert_eq!(sphere.degeneracy, Degeneracy::Sphere);
        assert!(sphere.margins.is_empty());
        assert!(!sphere.satisfied());
    }

    #[test]
    fn limit_axis_classification() {
        let p = p337();
        assert_eq!(classify_limit_axis(&p, &Vector3::new(0.0, 0.0, 0.977)).unwrap(), AxisLabel::Axis3);
        assert_eq!(classify_limit_axis(&p, &Vector3::new(0.875, 1.75, 1e-10)).unwrap(), AxisLabel::Plane12);
        assert_eq!(classify_limit_axis(&p, &Vector3::zeros()).unwrap(), AxisLabel::Origin);

        let distinct = BodyParams::new(2.0, 3.0, 7.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            classify_limit_axis(&distinct, &Vector3::new(1.0, 0.0, 1.0)),
            Err(AnalysisError::AmbiguousLimit(_))
        ));
    }

    #[test]
    fn limit_identities_hold_trivially_at_equilibrium() {
        let p = p337();
        let s0 = State::from_components(0.0, 0.0, 1.0, 0.0, 0.0, 1.0);
        let (r1, r2) = limit_identities(&p, &s0, &Vector3::new(0.0, 0.0, 1.0), 0.0);
        assert!(r1 < 1e-14, "momentum residual {r1}");
        assert!(r2 < 1e-14, "energy residual {r2}");
    }

    fn synthetic_record(rate: f64, t_end: f64, dt: f64) -> TrajectoryRecord {
        let samples = (0..)
            .map(|i| i as f64 * dt)
            .take_while(|t| *t <= t_end)
            .map(|t| Sample {
                t,
                state: State::from_components((-rate * t).exp(), 0.0, 0.0, 0.0, 0.0, 0.0),
                kinetic_energy: 0.0,
                momentum_sq: 0.0,
            })
            .collect();
        TrajectoryRecord {
            samples,
            stop_reason: StopReason::HorizonReached,
            ksq_max_rel_drift: 0.0,
            dissipated_energy: 0.0,
            steps_accepted: 0,
            steps_rejected: 0,
            max_accepted_scaled_error: 0.0,
        }
    }

    #[test]
    fn fit_recovers_synthetic_exponential() {
        let record = synthetic_record(0.3, 80.0, 0.05);
        match fit_rate(&record, 1e-9) {
            RateFit::Fitted { rate, goodness } => {
                assert!((rate - 0.3).abs() < 1e-6, "rate {rate}");
                assert!(goodness > 1.0 - 1e-9, "goodness {goodness}");
            }
            RateFit::Indeterminate => panic!("tail should be long enough"),
        }
    }

    #[test]
    fn fit_is_indeterminate_without_a_tail() {
        // A record too short for the relative velocity to enter the tail
        // window leaves nothing to fit.
        let record = synthetic_record(0.3, 0.5, 0.05);
        assert_eq!(fit_rate(&record, 1e-9), RateFit::Indeterminate);
    }
}
