//! The "paper-tables" suite: the full verification matrix, one row per
//! headline claim, each row a bundle of measured checks with pinned
//! thresholds. A failing row never aborts the suite; the summary reports
//! every measured value next to its threshold.

use crate::config::{Experiment, ExperimentConfig, Family};
use crate::experiments::{manufactured_resolvent_pair, measure_instability, RunError};
use crate::manifest::{write_atomic, CheckRecord, RunManifest};
use graphwave::evolution::{discrete_equilibrium, energy, step};
use graphwave::graph::{vertex_residual, GraphFunction, VertexCondition, YJunction};
use graphwave::profiles::{
    shift_map_derivative, solve_antikink_shift, solve_kink_shifts, stationary_residual,
    ProfileFamily,
};
use graphwave::spectral::{
    assemble_for_profile, assemble_operator, branch_slope_prediction, eigen_branch_track,
    eigen_solve, eigen_solve_with_zero_tol, free_resolvent_apply, kernel_candidates_residual,
    quadratic_form, resolvent_trace_residual, subspace_project, Potential, SubspaceKind,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("unknown suite `{0}` (available: paper-tables)")]
    UnknownSuite(String),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Spectral(#[from] graphwave::spectral::SpectralError),
    #[error(transparent)]
    Profile(#[from] graphwave::profiles::ProfileError),
    #[error(transparent)]
    Evolution(#[from] graphwave::evolution::EvolutionError),
    #[error(transparent)]
    Graph(#[from] graphwave::graph::GraphError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteRow {
    pub criterion: String,
    pub checks: Vec<CheckRecord>,
}

impl SuiteRow {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub truncation_length: f64,
    pub points_per_edge: usize,
    pub rows: Vec<SuiteRow>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(SuiteRow::passed)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# Suite `{}`", self.suite).unwrap();
        writeln!(
            out,
            "\nGrid: L = {}, N = {}\n",
            self.truncation_length, self.points_per_edge
        )
        .unwrap();
        writeln!(out, "| criterion | check | measured | threshold | status |").unwrap();
        writeln!(out, "|---|---|---|---|---|").unwrap();
        for row in &self.rows {
            for check in &row.checks {
                let bound = if check.comparison == "in" {
                    check.detail.clone()
                } else if check.comparison == "recorded" {
                    "-".into()
                } else {
                    format!("{} {:.3e}", check.comparison, check.threshold)
                };
                writeln!(
                    out,
                    "| {} | {} | {:.6e} | {} | {} |",
                    row.criterion,
                    check.name,
                    check.measured,
                    bound,
                    if check.passed { "pass" } else { "FAIL" }
                )
                .unwrap();
            }
        }
        writeln!(
            out,
            "\nOverall: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        )
        .unwrap();
        out
    }
}

const LAMBDA0_KINK: f64 = -1.5 * PI;
const LAMBDA0_AK: f64 = -PI / 2.0;

fn base_config(family: Family, experiment: Experiment, lambda: f64, l: f64, n: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(family, experiment, lambda);
    cfg.truncation_length = l;
    cfg.points_per_edge = n as i64;
    cfg
}

fn junction(lambda: f64, l: f64, n: usize) -> Result<YJunction, SuiteError> {
    Ok(YJunction::new((1.0, 1.0, 1.0), lambda, l, n)?)
}

/// Run a named suite. `paper-tables` is the verification matrix; the grid
/// can be overridden for degradation studies.
pub fn run_suite(name: &str, l: f64, n: usize) -> Result<SuiteReport, SuiteError> {
    if name != "paper-tables" {
        return Err(SuiteError::UnknownSuite(name.to_string()));
    }
    let rows = vec![
        free_operator_row(l, n)?,
        kink_shift_map_row()?,
        kink_morse_row(l, n)?,
        kink_subspace_row(l, n)?,
        antikink_morse_row(l, n)?,
        quadratic_forms_row(l, n)?,
        branch_slope_row(l, n)?,
        instability_row(l, n)?,
        conservation_row(l, n)?,
        resolvent_row(l, n)?,
    ];
    Ok(SuiteReport {
        suite: name.to_string(),
        truncation_length: l,
        points_per_edge: n,
        rows,
    })
}

pub fn write_suite_outputs(report: &SuiteReport, dir: &Path) -> Result<(), SuiteError> {
    let json = serde_json::to_string_pretty(report).expect("suite serializes");
    write_atomic(dir, "suite-summary.json", json.as_bytes())?;
    write_atomic(dir, "suite-summary.md", report.to_markdown().as_bytes())?;
    Ok(())
}

/// Criterion 1: point spectrum of the free operator.
fn free_operator_row(l: f64, n: usize) -> Result<SuiteRow, SuiteError> {
    let mut checks = Vec::new();
    for (tag, speeds, lambda) in [
        ("unit", (1.0, 1.0, 1.0), -3.0),
        ("mixed", (1.0, 2.0, 3.0), -6.0),
    ] {
        let j = YJunction::new(speeds, lambda, l, n)?;
        let op = assemble_operator(&Potential::Free, &j, VertexCondition::DeltaPrime(lambda))?;
        let sol = eigen_solve(&op, -1e-3)?;
        checks.push(CheckRecord::count(
            &format!("{tag}_bound_state_count"),
            sol.report.eigenvalues_below.len(),
            1,
        ));
        let mu = sol
            .report
            .eigenvalues_below
            .first()
            .copied()
            .unwrap_or(f64::NAN);
        checks.push(CheckRecord::le(
            &format!("{tag}_eigenvalue_error"),
            (mu + 1.0).abs(),
            1e-3,
        ));
    }
    let j = junction(2.0, l, n)?;
    let op = assemble_operator(&Potential::Free, &j, VertexCondition::DeltaPrime(2.0))?;
    let sol = eigen_solve(&op, -1e-6)?;
    checks.push(CheckRecord::count(
        "positive_lambda_bound_states",
        sol.report.eigenvalues_below.len(),
        0,
    ));
    Ok(SuiteRow {
        criterion: "free-operator-point-spectrum".into(),
        checks,
    })
}

/// Criterion 2: the kink shift map and its sign regimes.
fn kink_shift_map_row() -> Result<SuiteRow, SuiteError> {
    let mut checks = Vec::new();
    let p0 = solve_kink_shifts(LAMBDA0_KINK, (1.0, 1.0, 1.0))?;
    checks.push(CheckRecord::le(
        "critical_outgoing_shift",
        p0.shifts.1.abs(),
        1e-12,
    ));
    let mut bump_ok = 0usize;
    for k in 0..10 {
        let lambda = -8.0 + k as f64 * (LAMBDA0_KINK + 0.1 + 8.0) / 10.0;
        let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0))?;
        if p.shifts.1 > 0.0 {
            bump_ok += 1;
        }
    }
    checks.push(CheckRecord::count("bump_regime_signs", bump_ok, 10));
    let mut tail_ok = 0usize;
    for k in 0..10 {
        let lambda = (LAMBDA0_KINK + 0.1) + k as f64 * ((-3.1) - (LAMBDA0_KINK + 0.1)) / 9.0;
        let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0))?;
        if p.shifts.1 < 0.0 {
            tail_ok += 1;
        }
    }
    checks.push(CheckRecord::count("tail_regime_signs", tail_ok, 10));
    Ok(SuiteRow {
        criterion: "kink-shift-map".into(),
        checks,
    })
}

/// Criterion 3: kink kernel/Morse table on the full space.
fn kink_morse_row(l: f64, n: usize) -> Result<SuiteRow, SuiteError> {
    let mut checks = Vec::new();
    for lambda in [-3.2, -4.0, -4.5] {
        let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0))?;
        let j = junction(lambda, l, n)?;
        let op = assemble_for_profile(&p, &j)?;
        let sol = eigen_solve_with_zero_tol(&op, 0.9, 1e-4)?;
        checks.push(CheckRecord::count(
            &format!("morse_at_{lambda}"),
            sol.report.morse_index,
            1,
        ));
        checks.push(CheckRecord::count(
            &format!("kernel_at_{lambda}"),
            sol.report.kernel_dim,
            0,
        ));
    }
    let p = solve_kink_shifts(LAMBDA0_KINK, (1.0, 1.0, 1.0))?;
    let j = junction(LAMBDA0_KINK, l, n)?;
    let op = assemble_for_profile(&p, &j)?;
    let sol = eigen_solve_with_zero_tol(&op, 0.5, 1e-4)?;
    checks.push(CheckRecord::count(
        "critical_kernel_dim",
        sol.report.kernel_dim,
        2,
    ));
    let (r1, r2) = kernel_candidates_residual(&p, &j)?;
    checks.push(CheckRecord::le("kernel_candidate_residual_1", r1, 1e-3));
    checks.push(CheckRecord::le("kernel_candidate_residual_2", r2, 1e-3));
    // Exploration, not regression: the full-space count below the critical
    // coupling has no established target, so the measurement is recorded
    // (the former kernel pair moves negative there, giving 1 + 2).
    let p = solve_kink_shifts(-5.0, (1.0, 1.0, 1.0))?;
    let j = junction(-5.0, l, n)?;
    let op = assemble_for_profile(&p, &j)?;
    let sol = eigen_solve_with_zero_tol(&op, 0.9, 1e-4)?;
    checks.push(CheckRecord::recorded(
        "bump_side_full_morse_measured",
        sol.report.morse_index as f64,
    ));
    Ok(SuiteRow {
        criterion: "kink-morse-table".into(),
        checks,
    })
}

/// Criterion 4: kink restricted to the odd-mirror subspace.
fn kink_subspace_row(l: f64, n: usize) -> Result<SuiteRow, SuiteError> {
    let mut checks = Vec::new();
    for lambda in [LAMBDA0_KINK, -5.0, -8.0] {
        let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0))?;
        let j = junction(lambda, l, n)?;
        let full = assemble_for_profile(&p, &j)?;
        let red = subspace_project(&full, SubspaceKind::C2)?;
        let sol = eigen_solve_with_zero_tol(&red, 0.9, 1e-4)?;
        checks.push(CheckRecord::count(
            &format!("restricted_morse_at_{lambda:.4}"),
            sol.report.morse_index,
            1,
        ));
        checks.push(CheckRecord::count(
            &format!("restricted_kernel_at_{lambda:.4}"),
            sol.report.kernel_dim,
            0,
        ));
    }
    Ok(SuiteRow {
        criterion: "kink-symmetric-subspace".into(),
        checks,
    })
}

/// Criterion 5: kink/anti-kink kernel/Morse table, full space and the
/// equal-pair subspace.
fn antikink_morse_row(l: f64, n: usize) -> Result<SuiteRow, SuiteError> {
    let mut checks = Vec::new();
    for lambda in [LAMBDA0_AK, -1.0, 0.0, 1.0, 5.0] {
        let p = solve_antikink_shift(lambda)?;
        let j = junction(lambda, l, n)?;
        let op = assemble_for_profile(&p, &j)?;
        let sol = eigen_solve_with_zero_tol(&op, 0.9, 1e-4)?;
        checks.push(CheckRecord::count(
            &format!("morse_at_{lambda:.4}"),
            sol.report.morse_index,
            1,
        ));
        let expected_kernel = if lambda == LAMBDA0_AK { 2 } else { 0 };
        checks.push(CheckRecord::count(
            &format!("kernel_at_{lambda:.4}"),
            sol.report.kernel_dim,
            expected_kernel,
        ));
    }
    for lambda in [-1.8, -2.5] {
        let p = solve_antikink_shift(lambda)?;
        let j = junction(lambda, l, n)?;
        let full = assemble_for_profile(&p, &j)?;
        let red = subspace_project(&full, SubspaceKind::C1)?;
        let sol = eigen_solve_with_zero_tol(&red, 0.9, 1e-4)?;
        checks.push(CheckRecord::count(
            &format!("pair_subspace_morse_at_{lambda}"),
            sol.report.morse_index,
            2,
        ));
    }
    Ok(SuiteRow {
        criterion: "antikink-morse-table".into(),
        checks,
    })
}

/// Criterion 6: quadratic-form values against closed forms and signs.
fn quadratic_forms_row(l: f64, n: usize) -> Result<SuiteRow, SuiteError> {
    let mut checks = Vec::new();
    let p = solve_antikink_shift(LAMBDA0_AK)?;
    let j = junction(LAMBDA0_AK, l, n)?;
    let op = assemble_for_profile(&p, &j)?;
    let first = GraphFunction::from_fn(&j, |e, x| {
        if e == 0 {
            p.phi_deriv(0, x)
        } else {
            p.phi_deriv(1, x)
        }
    });
    let q1 = quadratic_form(&first, &op);
    checks.push(CheckRecord::le(
        "first_direction_matches_closed_form",
        (q1 - (-8.0 / PI)).abs(),
        1e-3,
    ));
    for lambda in [-1.2, -0.8, -0.3] {
        let p = solve_antikink_shift(lambda)?;
        let j = junction(lambda, l, n)?;
        let op = assemble_for_profile(&p, &j)?;
        let second = GraphFunction::from_fn(&j, |e, x| {
            if e == 0 {
                0.0
            } else {
                p.phi_deriv(1, x)
            }
        });
        checks.push(CheckRecord::lt(
            &format!("second_direction_negative_at_{lambda}"),
            quadratic_form(&second, &op),
            0.0,
        ));
    }
    for lambda in [-4.0, -5.0] {
        let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0))?;
        let j = junction(lambda, l, n)?;
        let op = assemble_for_profile(&p, &j)?;
        let state = p.stationary_state(&j);
        checks.push(CheckRecord::lt(
            &format!("kink_state_negative_at_{lambda}"),
            quadratic_form(&state, &op),
            0.0,
        ));
    }
    Ok(SuiteRow {
        criterion: "quadratic-forms".into(),
        checks,
    })
}

/// Criterion 7: the restricted branch crosses zero at the critical
/// coupling with the slope the perturbation integral predicts, and the
/// shift-map derivative takes its exact critical value.
fn branch_slope_row(l: f64, n: usize) -> Result<SuiteRow, SuiteError> {
    let mut checks = Vec::new();
    let p0 = solve_antikink_shift(LAMBDA0_AK)?;
    let d = shift_map_derivative(&p0)?;
    checks.push(CheckRecord::le(
        "shift_map_derivative_critical",
        (d - 1.0 / 3.0).abs(),
        1e-8,
    ));
    let j = junction(LAMBDA0_AK, l, n)?;
    let eta = graphwave::spectral::eta_integral(&p0, &j)?;
    checks.push(CheckRecord::recorded("eta_integral", eta));
    let beta = branch_slope_prediction(&p0, &j)?;
    checks.push(CheckRecord::recorded("predicted_slope", beta));
    let delta = 0.0125;
    let grid: Vec<f64> = (-16..=16).map(|k| LAMBDA0_AK + delta * k as f64).collect();
    let track = eigen_branch_track(
        ProfileFamily::KinkAntiKink,
        &grid,
        &j,
        SubspaceKind::C1,
        0.9,
    )?;
    checks.push(CheckRecord::count(
        "zero_crossings",
        track.crossings.len(),
        1,
    ));
    if let Some(crossing) = track.crossings.first() {
        checks.push(CheckRecord::le(
            "crossing_location_error",
            (crossing.lambda - LAMBDA0_AK).abs(),
            2e-3,
        ));
        for (name, slope) in [
            ("slope_left_mismatch", crossing.slope_left),
            ("slope_right_mismatch", crossing.slope_right),
        ] {
            checks.push(CheckRecord::le(name, ((slope - beta) / beta).abs(), 0.1));
        }
    }
    Ok(SuiteRow {
        criterion: "branch-crossing-slope".into(),
        checks,
    })
}

/// Criterion 8: growing modes grow at the spectral rate; unperturbed
/// states hold. The stated kink and anti-kink couplings are both run as
/// written; a supplementary anti-kink run on the negative coupling side
/// (where the linearization does have a negative eigenvalue) demonstrates
/// the same measurement on the unstable branch of that family.
fn instability_row(l: f64, n: usize) -> Result<SuiteRow, SuiteError> {
    let mut checks = Vec::new();
    let mut run_one = |tag: &str, family: Family, lambda: f64| -> Result<(), SuiteError> {
        let mut cfg = base_config(family, Experiment::Instability, lambda, l, n);
        cfg.output_dir = std::env::temp_dir().join("graphwave-suite-instability");
        let mut scratch = RunManifest::new(&cfg);
        match measure_instability(&cfg, &mut scratch, false)? {
            Some(outcome) => {
                checks.push(CheckRecord::within(
                    &format!("{tag}_sigma_ratio"),
                    outcome.sigma_measured / outcome.sigma_predicted,
                    0.95,
                    1.05,
                ));
                checks.push(CheckRecord::ge(
                    &format!("{tag}_fit_r_squared"),
                    outcome.r_squared,
                    0.999,
                ));
                checks.push(CheckRecord::le(
                    &format!("{tag}_unperturbed_hold"),
                    outcome.unperturbed_hold,
                    1e-4,
                ));
            }
            None => {
                // No growing mode: the stated check cannot be satisfied.
                let op_mu = {
                    let junction = cfg.junction()?.with_lambda(lambda);
                    let p = crate::experiments::solve_profile(&cfg, lambda)?;
                    let op = assemble_for_profile(&p, &junction)?;
                    let sol = eigen_solve(&op, 0.9)?;
                    sol.report
                        .eigenvalues_below
                        .first()
                        .copied()
                        .unwrap_or(f64::NAN)
                };
                checks.push(
                    CheckRecord::failed(
                        &format!("{tag}_sigma_ratio"),
                        op_mu,
                        "no negative eigenvalue: the linearization is positive and \
                         nothing grows (measured value is the lowest eigenvalue)",
                    ),
                );
            }
        }
        Ok(())
    };
    run_one("kink", Family::Kink, -4.0)?;
    run_one("antikink", Family::KinkAntiKink, 1.0)?;
    run_one(
        "supplementary_antikink_negative_side",
        Family::KinkAntiKink,
        -1.0,
    )?;
    Ok(SuiteRow {
        criterion: "dynamic-instability".into(),
        checks,
    })
}

/// Criterion 9: conservation, convergence orders and truncation stability.
fn conservation_row(l: f64, n: usize) -> Result<SuiteRow, SuiteError> {
    let mut checks = Vec::new();
    // Energy drift of unperturbed profiles over t <= 20 at dt = 0.4 h.
    for (tag, family, lambda) in [
        ("kink", Family::Kink, -4.0),
        ("antikink", Family::KinkAntiKink, 1.0),
    ] {
        let cfg = base_config(family, Experiment::Instability, lambda, l, n);
        let junction = cfg.junction()?;
        let p = crate::experiments::solve_profile(&cfg, lambda)?;
        let cond = junction.vertex_condition();
        let base = discrete_equilibrium(&p, &junction, cond)?;
        let dt = 0.4 * junction.grid_spacing() / junction.max_speed();
        let e0 = energy(&base, &junction, cond)?.total;
        let mut state = base;
        let mut drift = 0.0f64;
        let steps = (20.0 / dt).ceil() as usize;
        for k in 1..=steps {
            state = step(&state, dt, &junction, cond)?;
            if k % 100 == 0 {
                let e = energy(&state, &junction, cond)?.total;
                drift = drift.max(((e - e0) / e0).abs());
            }
        }
        checks.push(CheckRecord::le(&format!("{tag}_energy_drift"), drift, 1e-5));
    }
    // Convergence order of the lowest eigenvalue on a 3-level ladder.
    let p = solve_kink_shifts(-4.0, (1.0, 1.0, 1.0))?;
    let mut mus = Vec::new();
    for nn in [501usize, 1001, 2001] {
        let j = junction(-4.0, 40.0, nn)?;
        let op = assemble_for_profile(&p, &j)?;
        let sol = eigen_solve(&op, 0.0)?;
        mus.push(sol.report.eigenvalues_below[0]);
    }
    let eig_order = ((mus[0] - mus[1]) / (mus[1] - mus[2])).abs().log2();
    checks.push(CheckRecord::within("eigenvalue_order", eig_order, 1.8, 2.2));
    // Stationary-equation residual order on the same ladder.
    let mut rs = Vec::new();
    let mut hs = Vec::new();
    for nn in [501usize, 1001, 2001, 4001] {
        let j = junction(-4.0, 40.0, nn)?;
        rs.push(stationary_residual(&p, &j));
        hs.push(j.grid_spacing());
    }
    checks.push(CheckRecord::within(
        "stationary_residual_order",
        slope_loglog(&hs, &rs),
        1.8,
        2.2,
    ));
    // Vertex-trace residual order on a 4-point ladder.
    let mut vs = Vec::new();
    for nn in [501usize, 1001, 2001, 4001] {
        let j = junction(-4.0, 40.0, nn)?;
        let u = p.stationary_state(&j);
        let (r1, r2, r3) = vertex_residual(&u, VertexCondition::DeltaPrime(-4.0), &j);
        vs.push(r1.abs().max(r2.abs()).max(r3.abs()));
    }
    checks.push(CheckRecord::within(
        "vertex_residual_order",
        slope_loglog(&hs, &vs),
        1.8,
        2.2,
    ));
    // Spectrum stability under doubling the truncation.
    for (tag, family, lambda) in [
        ("kink", Family::Kink, -4.0),
        ("antikink", Family::KinkAntiKink, 1.0),
    ] {
        let cfg = base_config(family, Experiment::Spectrum, lambda, l, n);
        let p = crate::experiments::solve_profile(&cfg, lambda)?;
        let mut spectra = Vec::new();
        for (ll, nn) in [(l, n), (2.0 * l, 2 * n - 1)] {
            let j = junction(lambda, ll, nn)?;
            let op = assemble_for_profile(&p, &j)?;
            let sol = eigen_solve(&op, 0.9)?;
            spectra.push(sol.report.eigenvalues_below.clone());
        }
        let worst = spectra[0]
            .iter()
            .zip(spectra[1].iter())
            .map(|(a, b)| (a - b).abs())
            .fold(
                if spectra[0].len() == spectra[1].len() {
                    0.0
                } else {
                    f64::INFINITY
                },
                f64::max,
            );
        checks.push(CheckRecord::lt(
            &format!("{tag}_truncation_stability"),
            worst,
            1e-4,
        ));
    }
    Ok(SuiteRow {
        criterion: "conservation-and-convergence".into(),
        checks,
    })
}

/// Criterion 10: the resolvent identity on random smooth inputs.
fn resolvent_row(l: f64, n: usize) -> Result<SuiteRow, SuiteError> {
    let mut checks = Vec::new();
    for (lambda, eta) in [(1.0, 1.0), (-3.0, 2.0)] {
        let j = junction(lambda, l, n)?;
        let mut worst = 0.0f64;
        let mut worst_trace = 0.0f64;
        for trial in 0..10u64 {
            let (u, w) = manufactured_resolvent_pair(&j, eta, 0xacce_0000 + trial);
            let r = free_resolvent_apply(&u, eta, &j)?;
            let mut dev = r.clone();
            dev.axpy(-1.0, &w);
            worst = worst.max(dev.sup_norm() / w.sup_norm());
            let (t1, t2, t3) = resolvent_trace_residual(&u, eta, &j)?;
            worst_trace = worst_trace.max(t1.abs().max(t2.abs()).max(t3.abs()));
        }
        checks.push(CheckRecord::le(
            &format!("identity_error_lambda_{lambda}_eta_{eta}"),
            worst,
            1e-6,
        ));
        checks.push(CheckRecord::le(
            &format!("trace_residual_lambda_{lambda}_eta_{eta}"),
            worst_trace,
            1e-8,
        ));
    }
    Ok(SuiteRow {
        criterion: "resolvent-identity".into(),
        checks,
    })
}

fn slope_loglog(hs: &[f64], rs: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
