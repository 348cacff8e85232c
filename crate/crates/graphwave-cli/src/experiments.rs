//! Named experiments: each one maps a validated config onto library calls,
//! writes its data products and returns a manifest of checks.

use crate::config::{Experiment, ExperimentConfig, Family};
use crate::manifest::{write_atomic, CheckRecord, RunManifest};
use graphwave::evolution::{
    discrete_equilibrium, energy, fit_growth_series, seed_perturbation, step,
    EvolutionState,
};
use graphwave::graph::{
    graph_inner_product, vertex_residual, GraphFunction, VertexCondition, YJunction,
};
use graphwave::linalg::SplitMix64;
use graphwave::profiles::{
    eval_profile, solve_antikink_shift, solve_kink_shifts, stationary_residual, ProfileFamily,
    StationaryProfile,
};
use graphwave::spectral::{
    assemble_for_profile, eigen_branch_track, eigen_solve_with_zero_tol, free_resolvent_apply,
    quadratic_form, resolvent_trace_residual, subspace_project, vertex_positivity_term,
    LinearizedOperator, SubspaceKind,
};
use std::fmt::Write as _;
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("profile construction failed: {0}")]
    Profile(#[from] graphwave::profiles::ProfileError),
    #[error("spectral operation failed: {0}")]
    Spectral(#[from] graphwave::spectral::SpectralError),
    #[error("evolution failed: {0}")]
    Evolution(#[from] graphwave::evolution::EvolutionError),
    #[error("graph operation failed: {0}")]
    Graph(#[from] graphwave::graph::GraphError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub fn solve_profile(config: &ExperimentConfig, lambda: f64) -> Result<StationaryProfile, RunError> {
    Ok(match config.family {
        Family::Kink => solve_kink_shifts(lambda, config.speeds)?,
        Family::KinkAntiKink => solve_antikink_shift(lambda)?,
    })
}

fn profile_family(config: &ExperimentConfig) -> ProfileFamily {
    match config.family {
        Family::Kink => ProfileFamily::Kink,
        Family::KinkAntiKink => ProfileFamily::KinkAntiKink,
    }
}

/// Dispatch a validated config to its experiment.
pub fn run(config: &ExperimentConfig) -> Result<RunManifest, RunError> {
    config.validate()?;
    let started = Instant::now();
    let mut manifest = RunManifest::new(config);
    match config.experiment {
        Experiment::Profile => run_profile(config, &mut manifest)?,
        Experiment::Spectrum => run_spectrum(config, &mut manifest)?,
        Experiment::BranchSweep => run_branch_sweep(config, &mut manifest)?,
        Experiment::QuadraticForms => run_quadratic_forms(config, &mut manifest)?,
        Experiment::Instability => run_instability(config, &mut manifest)?,
        Experiment::ResolventCheck => run_resolvent_check(config, &mut manifest)?,
    }
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&config.output_dir, "manifest.json", json.as_bytes())?;
    Ok(manifest)
}

fn run_profile(config: &ExperimentConfig, manifest: &mut RunManifest) -> Result<(), RunError> {
    let lambda = config.lambda.expect("validated");
    let junction = config.junction()?;
    let p = solve_profile(config, lambda)?;
    manifest.checks.push(CheckRecord::le(
        "shift_map_residual",
        p.shift_map_residual().abs(),
        config.tolerance("shift_residual") * lambda.abs().max(1.0),
    ));
    let state = p.stationary_state(&junction);
    let (r1, r2, r3) = vertex_residual(&state, VertexCondition::from_lambda(lambda), &junction);
    manifest.checks.push(CheckRecord::le(
        "vertex_trace_residual",
        r1.abs().max(r2.abs()).max(r3.abs()),
        config.tolerance("vertex_residual"),
    ));
    manifest.checks.push(CheckRecord::le(
        "stationary_equation_residual",
        stationary_residual(&p, &junction),
        config.tolerance("stationary_residual"),
    ));
    manifest
        .checks
        .push(CheckRecord::recorded("shift_a1", p.shifts.0));
    manifest
        .checks
        .push(CheckRecord::recorded("shift_a2", p.shifts.1));
    manifest
        .checks
        .push(CheckRecord::recorded("shift_a3", p.shifts.2));
    let json = serde_json::to_string_pretty(&p).expect("profile serializes");
    write_atomic(&config.output_dir, "profile.json", json.as_bytes())?;
    manifest.outputs.push("profile.json".into());
    let mut csv = Vec::new();
    state.write_csv(&junction, &mut csv)?;
    write_atomic(&config.output_dir, "state.csv", &csv)?;
    manifest.outputs.push("state.csv".into());
    let mut fam = Vec::new();
    eval_profile(&p, &junction).write_csv(&junction, &mut fam)?;
    write_atomic(&config.output_dir, "components.csv", &fam)?;
    manifest.outputs.push("components.csv".into());
    write_atomic(
        &config.output_dir,
        "grid.json",
        junction.build_grid().to_json().as_bytes(),
    )?;
    manifest.outputs.push("grid.json".into());
    Ok(())
}

pub fn assemble_from_config(
    config: &ExperimentConfig,
    lambda: f64,
) -> Result<(YJunction, StationaryProfile, LinearizedOperator), RunError> {
    let junction = config.junction()?.with_lambda(lambda);
    let p = solve_profile(config, lambda)?;
    let mut op = assemble_for_profile(&p, &junction)?;
    let kind: SubspaceKind = config.subspace.into();
    if kind != SubspaceKind::Full {
        op = subspace_project(&op, kind)?;
    }
    Ok((junction, p, op))
}

fn run_spectrum(config: &ExperimentConfig, manifest: &mut RunManifest) -> Result<(), RunError> {
    let lambda = config.lambda.expect("validated");
    let (_, _, op) = assemble_from_config(config, lambda)?;
    manifest.warnings.extend(op.warnings().iter().cloned());
    let sol = eigen_solve_with_zero_tol(
        &op,
        config.tolerance("spectrum_threshold"),
        config.tolerance("zero_tol"),
    )?;
    manifest.checks.push(CheckRecord::recorded(
        "morse_index",
        sol.report.morse_index as f64,
    ));
    manifest.checks.push(CheckRecord::recorded(
        "kernel_dim",
        sol.report.kernel_dim as f64,
    ));
    for (i, mu) in sol.report.eigenvalues_below.iter().enumerate() {
        manifest
            .checks
            .push(CheckRecord::recorded(&format!("mu_{i}"), *mu));
    }
    let worst_res = sol.report.residuals.iter().copied().fold(0.0f64, f64::max);
    manifest.checks.push(CheckRecord::le(
        "eigen_residual",
        worst_res,
        config.tolerance("eigen_residual"),
    ));
    // Rayleigh-quotient consistency of every reported pair.
    let mut worst_rayleigh = 0.0f64;
    for (mu, mode) in sol.report.eigenvalues_below.iter().zip(&sol.modes) {
        let q = quadratic_form(mode, &op);
        let x = op.restrict(mode);
        let mx = op.matvec_m(&x);
        let norm: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
        worst_rayleigh = worst_rayleigh.max((q / norm - mu).abs() / mu.abs().max(1.0));
    }
    manifest.checks.push(CheckRecord::le(
        "rayleigh_consistency",
        worst_rayleigh,
        config.tolerance("rayleigh_consistency"),
    ));
    let json = serde_json::to_string_pretty(&sol.report).expect("report serializes");
    write_atomic(&config.output_dir, "spectrum.json", json.as_bytes())?;
    manifest.outputs.push("spectrum.json".into());
    Ok(())
}

fn run_branch_sweep(config: &ExperimentConfig, manifest: &mut RunManifest) -> Result<(), RunError> {
    let grid = config.lambda_grid.clone().expect("validated");
    let junction = config.junction()?;
    let track = eigen_branch_track(
        profile_family(config),
        &grid,
        &junction,
        config.subspace.into(),
        config.tolerance("spectrum_threshold"),
    )?;
    let mut csv = String::from("lambda,branch_id,mu,residual\n");
    for branch in &track.branches {
        for pt in &branch.points {
            writeln!(csv, "{},{},{},{}", pt.lambda, branch.id, pt.mu, pt.residual).unwrap();
        }
    }
    write_atomic(&config.output_dir, "sweep.csv", csv.as_bytes())?;
    manifest.outputs.push("sweep.csv".into());
    let worst_res = track
        .reports
        .iter()
        .flat_map(|r| r.residuals.iter().copied())
        .fold(0.0f64, f64::max);
    manifest.checks.push(CheckRecord::le(
        "eigen_residual",
        worst_res,
        config.tolerance("eigen_residual"),
    ));
    manifest.checks.push(CheckRecord::recorded(
        "branch_count",
        track.branches.len() as f64,
    ));
    for crossing in &track.crossings {
        manifest.checks.push(
            CheckRecord::recorded(
                &format!("zero_crossing_branch_{}", crossing.branch_id),
                crossing.lambda,
            )
            .with_detail(&format!(
                "slope_left = {}, slope_right = {}",
                crossing.slope_left, crossing.slope_right
            )),
        );
    }
    Ok(())
}

fn run_quadratic_forms(
    config: &ExperimentConfig,
    manifest: &mut RunManifest,
) -> Result<(), RunError> {
    let lambda = config.lambda.expect("validated");
    let (junction, p, op) = assemble_from_config(config, lambda)?;
    let mut values = serde_json::Map::new();
    match config.family {
        Family::KinkAntiKink => {
            let lambda1 = GraphFunction::from_fn(&junction, |e, x| {
                if e == 0 {
                    p.phi_deriv(0, x)
                } else {
                    p.phi_deriv(1, x)
                }
            });
            let q1 = quadratic_form(&lambda1, &op);
            manifest
                .checks
                .push(CheckRecord::recorded("form_first_direction", q1));
            values.insert("form_first_direction".into(), q1.into());
            let lambda2 = GraphFunction::from_fn(&junction, |e, x| {
                if e == 0 {
                    0.0
                } else {
                    p.phi_deriv(1, x)
                }
            });
            let q2 = quadratic_form(&lambda2, &op);
            manifest
                .checks
                .push(CheckRecord::recorded("form_second_direction", q2));
            values.insert("form_second_direction".into(), q2.into());
            let crit = p.critical_lambda();
            if (lambda - crit).abs() < 1e-9 {
                // Closed form -8/pi at the critical coupling.
                let target = -8.0 / std::f64::consts::PI;
                manifest.checks.push(
                    CheckRecord::le("form_first_matches_closed_form", (q1 - target).abs(), 1e-3)
                        .with_detail(&format!("closed form {target}")),
                );
            }
            if lambda > crit && lambda < 0.0 {
                manifest
                    .checks
                    .push(CheckRecord::lt("form_second_negative", q2, 0.0));
            }
        }
        Family::Kink => {
            let state = p.stationary_state(&junction);
            let q = quadratic_form(&state, &op);
            manifest
                .checks
                .push(CheckRecord::lt("form_state_direction", q, 0.0));
            values.insert("form_state_direction".into(), q.into());
        }
    }
    let mut traces = GraphFunction::zeros(junction.points_per_edge());
    let n = junction.points_per_edge();
    traces.edges[0][n - 1] = 1.0;
    traces.edges[1][0] = 1.0;
    traces.edges[2][0] = 1.0;
    let pterm = vertex_positivity_term(&p, &traces)?;
    manifest
        .checks
        .push(CheckRecord::recorded("vertex_positivity_unit_traces", pterm));
    values.insert("vertex_positivity_unit_traces".into(), pterm.into());
    let json = serde_json::to_string_pretty(&serde_json::Value::Object(values)).unwrap();
    write_atomic(&config.output_dir, "forms.json", json.as_bytes())?;
    manifest.outputs.push("forms.json".into());
    Ok(())
}

/// Everything measured by one growing-mode experiment.
pub struct InstabilityOutcome {
    pub mu1: f64,
    pub sigma_predicted: f64,
    pub sigma_measured: f64,
    pub r_squared: f64,
    pub fit_end: f64,
    pub unperturbed_hold: f64,
    pub energy_drift_unperturbed: f64,
}

pub fn measure_instability(
    config: &ExperimentConfig,
    manifest: &mut RunManifest,
    write_outputs: bool,
) -> Result<Option<InstabilityOutcome>, RunError> {
    let lambda = config.lambda.expect("validated");
    let junction = config.junction()?.with_lambda(lambda);
    let p = solve_profile(config, lambda)?;
    let cond = junction.vertex_condition();
    let op = assemble_for_profile(&p, &junction)?;
    let sol = eigen_solve_with_zero_tol(&op, 0.0, config.tolerance("zero_tol"))?;
    let Some((&mu1, mode)) = sol
        .report
        .eigenvalues_below
        .first()
        .zip(sol.modes.first())
    else {
        manifest.checks.push(CheckRecord::failed(
            "unstable_mode_exists",
            f64::NAN,
            "the linearization has no negative eigenvalue; nothing can grow",
        ));
        return Ok(None);
    };
    let base = discrete_equilibrium(&p, &junction, cond)?;
    let base_norm = graph_inner_product(&base.u, &base.u, &junction)?.sqrt();
    let eps = config.tolerance("eps_rel") * base.u.sup_norm();
    let mut state = seed_perturbation(&base.u, mode, mu1, eps, &junction, cond)?;
    let dt = config.tolerance("dt_cfl_factor") * junction.grid_spacing() / junction.max_speed();
    let stride = config.tolerance("sample_stride").max(1.0) as usize;
    let t_max = config.tolerance("t_max");
    let upper = 0.03 * base_norm;
    let deviation = |s: &EvolutionState| -> f64 {
        let mut d = s.u.clone();
        d.axpy(-1.0, &base.u);
        graph_inner_product(&d, &d, &junction)
            .map(|v| v.max(0.0).sqrt())
            .unwrap_or(f64::NAN)
    };
    let mut series = vec![(0.0, deviation(&state))];
    let mut rows = Vec::new();
    let e0 = energy(&state, &junction, cond)?;
    rows.push((0.0, series[0].1, e0.total, e0.vertex));
    let mut snapshots: Vec<f64> = config.snapshot_times.clone();
    snapshots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    snapshots.reverse();
    let steps = (t_max / dt).ceil() as usize;
    for k in 1..=steps {
        state = step(&state, dt, &junction, cond)?;
        if write_outputs {
            while snapshots.last().is_some_and(|&t| state.t >= t) {
                let t = snapshots.pop().unwrap();
                let mut csv = Vec::new();
                state.u.write_csv(&junction, &mut csv)?;
                let name = format!("snapshot_t{t:.3}.csv");
                write_atomic(&config.output_dir, &name, &csv)?;
                manifest.outputs.push(name);
            }
        }
        if k % stride == 0 {
            let d = deviation(&state);
            series.push((state.t, d));
            let e = energy(&state, &junction, cond)?;
            rows.push((state.t, d, e.total, e.vertex));
            if d > 1.3 * upper {
                break;
            }
        }
    }
    let fit = fit_growth_series(&series, base_norm)?;
    // Unperturbed control over the same horizon.
    let mut control = base.clone();
    let control_steps = (fit.window.1 / dt).ceil() as usize;
    let ec0 = energy(&control, &junction, cond)?.total;
    let mut drift = 0.0f64;
    for k in 1..=control_steps {
        control = step(&control, dt, &junction, cond)?;
        if k % (stride * 10) == 0 {
            let e = energy(&control, &junction, cond)?.total;
            drift = drift.max(((e - ec0) / ec0).abs());
        }
    }
    let mut dev = control.u.clone();
    dev.axpy(-1.0, &base.u);
    if write_outputs {
        let mut csv = String::from("t,deviation_norm,energy_total,energy_vertex\n");
        for (t, d, et, ev) in &rows {
            writeln!(csv, "{t},{d},{et},{ev}").unwrap();
        }
        write_atomic(&config.output_dir, "trajectory.csv", csv.as_bytes())?;
        manifest.outputs.push("trajectory.csv".into());
    }
    Ok(Some(InstabilityOutcome {
        mu1,
        sigma_predicted: (-mu1).sqrt(),
        sigma_measured: fit.sigma,
        r_squared: fit.r_squared,
        fit_end: fit.window.1,
        unperturbed_hold: dev.sup_norm(),
        energy_drift_unperturbed: drift,
    }))
}

fn run_instability(config: &ExperimentConfig, manifest: &mut RunManifest) -> Result<(), RunError> {
    let Some(outcome) = measure_instability(config, manifest, true)? else {
        return Ok(());
    };
    manifest
        .checks
        .push(CheckRecord::recorded("mu_1", outcome.mu1));
    manifest.checks.push(CheckRecord::recorded(
        "sigma_predicted",
        outcome.sigma_predicted,
    ));
    manifest.checks.push(CheckRecord::recorded(
        "sigma_measured",
        outcome.sigma_measured,
    ));
    manifest.checks.push(CheckRecord::within(
        "sigma_ratio",
        outcome.sigma_measured / outcome.sigma_predicted,
        config.tolerance("sigma_ratio_low"),
        config.tolerance("sigma_ratio_high"),
    ));
    manifest.checks.push(CheckRecord::ge(
        "fit_r_squared",
        outcome.r_squared,
        config.tolerance("fit_r_squared"),
    ));
    manifest.checks.push(CheckRecord::le(
        "unperturbed_hold",
        outcome.unperturbed_hold,
        config.tolerance("equilibrium_hold"),
    ));
    manifest.checks.push(CheckRecord::le(
        "energy_drift_unperturbed",
        outcome.energy_drift_unperturbed,
        config.tolerance("energy_drift"),
    ));
    Ok(())
}

/// Deterministic smooth test inputs for the resolvent identity: Gaussian
/// bumps well separated from the vertex and the far ends, so the
/// manufactured solution lies in the operator domain to round-off.
pub fn manufactured_resolvent_pair(
    junction: &YJunction,
    eta: f64,
    seed: u64,
) -> (GraphFunction, GraphFunction) {
    let mut rng = SplitMix64::new(seed);
    let l = junction.truncation_length();
    let margin = (0.25 * l).max(8.0);
    let mut centers = [[0.0; 2]; 3];
    let mut widths = [[0.0; 2]; 3];
    let mut amps = [[0.0; 2]; 3];
    for e in 0..3 {
        for b in 0..2 {
            let span = l - 2.0 * margin;
            let c = margin + rng.next_f64() * span.max(1.0);
            centers[e][b] = if e == 0 { -c } else { c };
            widths[e][b] = 0.5 + 0.6 * rng.next_f64();
            amps[e][b] = 0.3 + 0.7 * rng.next_f64();
            if rng.next_f64() < 0.5 {
                amps[e][b] = -amps[e][b];
            }
        }
    }
    let w = GraphFunction::from_fn(junction, |e, x| {
        (0..2)
            .map(|b| {
                let z = (x - centers[e][b]) / widths[e][b];
                amps[e][b] * (-z * z).exp()
            })
            .sum()
    });
    let u = GraphFunction::from_fn(junction, |e, x| {
        let c2 = junction.speed(e) * junction.speed(e);
        (0..2)
            .map(|b| {
                let s = widths[e][b];
                let z = (x - centers[e][b]) / s;
                let g = amps[e][b] * (-z * z).exp();
                let g2 = g * (4.0 * z * z - 2.0) / (s * s);
                -c2 * g2 + eta * eta * g
            })
            .sum()
    });
    (u, w)
}

fn run_resolvent_check(
    config: &ExperimentConfig,
    manifest: &mut RunManifest,
) -> Result<(), RunError> {
    let lambda = config.lambda.expect("validated");
    let junction = config.junction()?.with_lambda(lambda);
    let eta = config.tolerance("resolvent_eta");
    let mut worst_identity = 0.0f64;
    let mut worst_trace = 0.0f64;
    for trial in 0..10u64 {
        let (u, w) = manufactured_resolvent_pair(&junction, eta, 0x7e50_0000 + trial);
        let r = free_resolvent_apply(&u, eta, &junction)?;
        let mut dev = r.clone();
        dev.axpy(-1.0, &w);
        worst_identity = worst_identity.max(dev.sup_norm() / w.sup_norm());
        let (t1, t2, t3) = resolvent_trace_residual(&u, eta, &junction)?;
        worst_trace = worst_trace.max(t1.abs().max(t2.abs()).max(t3.abs()));
    }
    manifest.checks.push(CheckRecord::le(
        "resolvent_identity",
        worst_identity,
        config.tolerance("resolvent_identity"),
    ));
    manifest.checks.push(CheckRecord::le(
        "resolvent_trace_residual",
        worst_trace,
        config.tolerance("resolvent_trace"),
    ));
    let json = serde_json::json!({
        "eta": eta,
        "lambda": lambda,
        "worst_identity_error": worst_identity,
        "worst_trace_residual": worst_trace,
    });
    write_atomic(
        &config.output_dir,
        "resolvent.json",
        serde_json::to_string_pretty(&json).unwrap().as_bytes(),
    )?;
    manifest.outputs.push("resolvent.json".into());
    Ok(())
}
