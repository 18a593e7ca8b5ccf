//! Command implementations: single simulations, the classification table,
//! seeded sweeps, and the figure-preset reproduction.

use crate::config::ResolvedRun;
use crate::report::{
    classification_row, gnuplot_script, stop_reason_str, sweep_aggregate_line, RunReport, SweepRow,
    CLASSIFICATION_HEADER, SWEEP_HEADER,
};
use anyhow::{Context, Result};
use damped_rotor::analysis::{analyze, attainability};
use damped_rotor::dynamics::{BodyParams, State};
use damped_rotor::integrator::{integrate, StopReason, TrajectoryRecord};
use damped_rotor::spectral::{classify, equilibrium_set, Equilibrium};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fs;
use std::path::Path;

pub struct SimulationOutcome {
    pub record: TrajectoryRecord,
    pub report: RunReport,
}

/// Integrate one run and write `trajectory.csv`, `report.json`, and
/// `plot.gp` into `out_dir`.
pub fn simulate(run: &ResolvedRun, out_dir: &Path) -> Result<SimulationOutcome> {
    let record = integrate(&run.params, &run.initial, &run.integrator).context("invalid field `integrator`")?;
    let analysis = analyze(&run.params, &run.initial, &record, run.integrator.conv_eps);
    let attain = attainability(&run.params, &run.initial);
    let report = RunReport::new(&run.params, &run.initial, &run.integrator, &record, &analysis, &attain);

    fs::create_dir_all(out_dir).with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let csv_path = out_dir.join("trajectory.csv");
    let mut csv = Vec::new();
    record.write_csv(&mut csv)?;
    fs::write(&csv_path, csv).with_context(|| format!("cannot write {}", csv_path.display()))?;
    fs::write(out_dir.join("report.json"), report.to_json())?;
    fs::write(out_dir.join("plot.gp"), gnuplot_script("trajectory.csv"))?;

    Ok(SimulationOutcome { record, report })
}

/// Classification table: one representative equilibrium (amplitude 1) per
/// connected family of the equilibrium set. Returns the CSV text and a
/// human-readable table.
pub fn classification_table(params: &BodyParams) -> Result<(String, String)> {
    let set = equilibrium_set(params);
    let mut csv = String::from(CLASSIFICATION_HEADER);
    csv.push('\n');
    let mut human = format!(
        "equilibrium set: case {} ({} component{})\n{:<10} {:>9} {:>22} {:>5} {:>9} {:>7} {:>11} {:>8}\n",
        set.case_index,
        set.spans.len(),
        if set.spans.len() == 1 { "" } else { "s" },
        "family",
        "lambda*",
        "verdict",
        "zero",
        "unstable",
        "stable",
        "semisimple",
        "tangent",
    );
    for span in &set.spans {
        let eq = Equilibrium::on_axis(params, span.axes[0], 1.0).expect("axis index valid");
        let (spectrum, class) = classify(params, &eq).with_context(|| {
            format!(
                "eigenvalue iteration failed on the linearization\n{}",
                damped_rotor::spectral::linearization(params, &eq)
            )
        })?;
        csv.push_str(&classification_row(params, &eq, &spectrum, &class));
        csv.push('\n');
        human.push_str(&format!(
            "{:<10} {:>9} {:>22} {:>5} {:>9} {:>7} {:>11} {:>8}\n",
            span.label.as_str(),
            span.lambda_star,
            match class.verdict {
                damped_rotor::Verdict::NormallyHyperbolic { n_unstable } =>
                    format!("normally-hyperbolic({n_unstable})"),
                v => v.as_str().to_string(),
            },
            spectrum.zero_multiplicity,
            spectrum.n_unstable,
            spectrum.n_stable,
            class.semisimple_zero,
            class.tangent_matches_null,
        ));
    }
    Ok((csv, human))
}

pub struct SweepSpec {
    pub params: BodyParams,
    pub integrator: damped_rotor::IntegratorConfig,
    pub count: usize,
    pub sample_box: [[f64; 2]; 6],
    pub seed: u64,
    pub jobs: usize,
}

/// Draw the initial state for one sweep trajectory. Each trajectory uses
/// the ChaCha8 stream identified by its index, so rows are independent of
/// execution order and of how many jobs run in parallel.
pub fn sweep_initial_state(seed: u64, index: u64, sample_box: &[[f64; 2]; 6]) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut c = [0.0; 6];
    for (i, x) in c.iter_mut().enumerate() {
        let [lo, hi] = sample_box[i];
        *x = if lo == hi { lo } else { rng.random_range(lo..=hi) };
    }
    State::from_components(c[0], c[1], c[2], c[3], c[4], c[5])
}

fn sweep_one(spec: &SweepSpec, index: u64) -> SweepRow {
    let initial = sweep_initial_state(spec.seed, index, &spec.sample_box);
    let attain = attainability(&spec.params, &initial);
    match integrate(&spec.params, &initial, &spec.integrator) {
        Ok(record) => {
            let analysis = analyze(&spec.params, &initial, &record, spec.integrator.conv_eps);
            SweepRow {
                seed: index,
                initial,
                stop_reason: stop_reason_str(&record.stop_reason),
                attained_axis: match record.stop_reason {
                    StopReason::Converged { .. } => analysis.attained_axis,
                    _ => None,
                },
                t_star: analysis.t_star,
                fitted_rate: analysis.fitted_rate,
                predicted_rate: analysis.predicted_rate,
                margins: attain.margins,
                minor_axis_margin: attain.minor_axis_margin,
            }
        }
        // Configuration errors surface identically on every row rather
        // than aborting the sweep.
        Err(_) => SweepRow {
            seed: index,
            initial,
            stop_reason: "config-error",
            attained_axis: None,
            t_star: None,
            fitted_rate: None,
            predicted_rate: None,
            margins: attain.margins,
            minor_axis_margin: attain.minor_axis_margin,
        },
    }
}

/// Run the sweep, possibly across threads; rows are gathered in index
/// order so the CSV bytes never depend on scheduling.
pub fn sweep(spec: &SweepSpec) -> Result<(Vec<SweepRow>, String)> {
    let indices: Vec<u64> = (0..spec.count as u64).collect();
    let rows: Vec<SweepRow> = if spec.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.jobs)
            .build()
            .context("cannot build worker pool")?;
        pool.install(|| indices.par_iter().map(|&i| sweep_one(spec, i)).collect())
    } else {
        indices.iter().map(|&i| sweep_one(spec, i)).collect()
    };

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.to_csv());
        csv.push('\n');
    }
    csv.push_str(&sweep_aggregate_line(&rows));
    csv.push('\n');
    Ok((rows, csv))
}
