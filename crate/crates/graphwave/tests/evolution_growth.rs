//! End-to-end dynamics: seeded growing modes must grow at the rate the
//! spectrum predicts, unperturbed equilibria must hold, and the symplectic
//! stepper must conserve the energy.

use graphwave::evolution::{
    boundary_flux, discrete_equilibrium, energy, fit_growth_series, seed_perturbation, step,
    EvolutionState,
};
use graphwave::graph::{graph_inner_product, GraphFunction, VertexCondition, YJunction};
use graphwave::profiles::{solve_antikink_shift, solve_kink_shifts, StationaryProfile};
use graphwave::spectral::{assemble_for_profile, eigen_solve};

struct GrowthRun {
    sigma_predicted: f64,
    sigma_measured: f64,
    r_squared: f64,
    fit_end: f64,
    energy_drift: f64,
    max_flux: f64,
}

fn run_growth(
    p: &StationaryProfile,
    junction: &YJunction,
    eps_rel: f64,
    t_max: f64,
) -> GrowthRun {
    let cond = junction.vertex_condition();
    let op = assemble_for_profile(p, junction).unwrap();
    let sol = eigen_solve(&op, 0.0).unwrap();
    let mu = sol.report.eigenvalues_below[0];
    assert!(mu < 0.0);
    let base = discrete_equilibrium(p, junction, cond).unwrap();
    let base_norm = graph_inner_product(&base.u, &base.u, junction)
        .unwrap()
        .sqrt();
    let sup = base.u.sup_norm();
    let mut state = seed_perturbation(&base.u, &sol.modes[0], mu, eps_rel * sup, junction, cond)
        .unwrap();
    let dt = 0.4 * junction.grid_spacing() / junction.max_speed();
    let stride = 5usize;
    let e0 = energy(&state, junction, cond).unwrap().total;
    let mut series = Vec::new();
    let mut energy_drift = 0.0f64;
    let mut max_flux = 0.0f64;
    let upper = 0.03 * base_norm;
    let dev = |s: &EvolutionState| -> f64 {
        let mut d = s.u.clone();
        d.axpy(-1.0, &base.u);
        graph_inner_product(&d, &d, junction).unwrap().max(0.0).sqrt()
    };
    series.push((0.0, dev(&state)));
    let steps = (t_max / dt).ceil() as usize;
    for k in 1..=steps {
        state = step(&state, dt, junction, cond).unwrap();
        if k % stride == 0 {
            let d = dev(&state);
            series.push((state.t, d));
            let e = energy(&state, junction, cond).unwrap().total;
            energy_drift = energy_drift.max(((e - e0) / e0).abs());
            max_flux = max_flux.max(boundary_flux(&state, junction, 0.9));
            if d > 1.3 * upper {
                break;
            }
        }
    }
    let fit = fit_growth_series(&series, base_norm).unwrap();
    GrowthRun {
        sigma_predicted: (-mu).sqrt(),
        sigma_measured: fit.sigma,
        r_squared: fit.r_squared,
        fit_end: fit.window.1,
        energy_drift,
        max_flux,
    }
}

#[test]
fn kink_growing_mode_rate_matches_spectrum() {
    let lambda = -4.0;
    let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0)).unwrap();
    let j = YJunction::new((1.0, 1.0, 1.0), lambda, 40.0, 2001).unwrap();
    let run = run_growth(&p, &j, 1e-4, 20.0);
    let ratio = run.sigma_measured / run.sigma_predicted;
    assert!(
        (0.95..=1.05).contains(&ratio),
        "sigma {} vs predicted {} (ratio {ratio})",
        run.sigma_measured,
        run.sigma_predicted
    );
    assert!(run.r_squared >= 0.999, "r^2 = {}", run.r_squared);
    // The run leaves the linear regime by design; the symplectic stepper
    // still keeps the energy bounded (the error scales with the squared
    // deviation, not with time).
    assert!(
        run.energy_drift <= 1e-3,
        "energy drift {}",
        run.energy_drift
    );
    println!(
        "kink growth: sigma {} predicted {} r2 {} flux {:.3e}",
        run.sigma_measured, run.sigma_predicted, run.r_squared, run.max_flux
    );
}

#[test]
fn antikink_growing_mode_rate_matches_spectrum() {
    // The anti-kink instability lives on the negative side of the coupling
    // range, where the vertex well carries the single negative eigenvalue.
    let lambda = -1.0;
    let p = solve_antikink_shift(lambda).unwrap();
    let j = YJunction::new((1.0, 1.0, 1.0), lambda, 40.0, 2001).unwrap();
    let run = run_growth(&p, &j, 1e-4, 10.0);
    let ratio = run.sigma_measured / run.sigma_predicted;
    assert!(
        (0.95..=1.05).contains(&ratio),
        "sigma {} vs predicted {} (ratio {ratio})",
        run.sigma_measured,
        run.sigma_predicted
    );
    assert!(run.r_squared >= 0.999, "r^2 = {}", run.r_squared);
}

#[test]
fn growth_rate_is_independent_of_seed_amplitude() {
    let lambda = -4.0;
    let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0)).unwrap();
    let j = YJunction::new((1.0, 1.0, 1.0), lambda, 40.0, 1001).unwrap();
    let a = run_growth(&p, &j, 1e-4, 25.0);
    let b = run_growth(&p, &j, 1e-5, 25.0);
    let rel = ((a.sigma_measured - b.sigma_measured) / a.sigma_measured).abs();
    assert!(rel < 0.01, "eps sensitivity {rel}");
}

#[test]
fn unperturbed_equilibrium_holds_over_fit_horizon() {
    let lambda = -4.0;
    let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0)).unwrap();
    let j = YJunction::new((1.0, 1.0, 1.0), lambda, 40.0, 2001).unwrap();
    let cond = j.vertex_condition();
    let probe = run_growth(&p, &j, 1e-4, 20.0);
    let base = discrete_equilibrium(&p, &j, cond).unwrap();
    let dt = 0.4 * j.grid_spacing();
    let steps = (probe.fit_end / dt).ceil() as usize;
    let mut s = base.clone();
    for _ in 0..steps {
        s = step(&s, dt, &j, cond).unwrap();
    }
    let mut d = s.u.clone();
    d.axpy(-1.0, &base.u);
    assert!(
        d.sup_norm() <= 1e-4,
        "free-running equilibrium drifted by {} over t = {:.2}",
        d.sup_norm(),
        probe.fit_end
    );
}

#[test]
fn stationary_energy_is_conserved() {
    // Unperturbed anti-kink with the delta-prime vertex term in the
    // energy, held over a long horizon.
    let lambda = 1.0;
    let p = solve_antikink_shift(lambda).unwrap();
    let j = YJunction::new((1.0, 1.0, 1.0), lambda, 40.0, 2001).unwrap();
    let cond = j.vertex_condition();
    let base = discrete_equilibrium(&p, &j, cond).unwrap();
    let e0 = energy(&base, &j, cond).unwrap();
    assert!(e0.total > 0.0);
    let dt = 0.4 * j.grid_spacing();
    let mut s = base;
    let mut worst: f64 = 0.0;
    for k in 1..=(50.0f64 / dt) as usize {
        s = step(&s, dt, &j, cond).unwrap();
        if k % 50 == 0 {
            let e = energy(&s, &j, cond).unwrap();
            worst = worst.max(((e.total - e0.total) / e0.total).abs());
        }
    }
    assert!(worst <= 1e-6, "stationary energy drift {worst} over t <= 50");
}

#[test]
fn perturbed_energy_drift_stays_small() {
    // A perturbation that stays in the linear window for the whole run:
    // the anti-kink on the positive coupling side is spectrally stable, so
    // a small bump oscillates without growing and the energy is conserved
    // to well below 1e-5 over t <= 20 at dt = 0.4 h.
    let lambda = 1.0;
    let p = solve_antikink_shift(lambda).unwrap();
    let j = YJunction::new((1.0, 1.0, 1.0), lambda, 40.0, 2001).unwrap();
    let cond = j.vertex_condition();
    let base = discrete_equilibrium(&p, &j, cond).unwrap();
    let mut seeded = base.clone();
    let bump = GraphFunction::from_fn(&j, |_, x| 1e-3 * (-((x.abs() - 5.0) / 1.5f64).powi(2)).exp());
    seeded.u.axpy(1.0, &bump);
    let mut s = graphwave::evolution::enforce_vertex(&seeded, &j, cond).unwrap();
    let e0 = energy(&s, &j, cond).unwrap().total;
    let dt = 0.4 * j.grid_spacing();
    let mut worst: f64 = 0.0;
    for k in 1..=(20.0f64 / dt) as usize {
        s = step(&s, dt, &j, cond).unwrap();
        if k % 50 == 0 {
            let e = energy(&s, &j, cond).unwrap().total;
            worst = worst.max(((e - e0) / e0).abs());
        }
    }
    assert!(worst <= 1e-5, "perturbed drift {worst}");
}

#[test]
fn far_boundary_stays_passive_during_growth() {
    let lambda = -4.0;
    let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0)).unwrap();
    let j = YJunction::new((1.0, 1.0, 1.0), lambda, 40.0, 2001).unwrap();
    let run = run_growth(&p, &j, 1e-4, 20.0);
    assert!(run.max_flux <= 1e-6, "boundary flux {:.3e}", run.max_flux);
}

#[test]
fn seeded_state_satisfies_vertex_conditions() {
    let lambda = -4.0;
    let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0)).unwrap();
    let j = YJunction::new((1.0, 1.0, 1.0), lambda, 40.0, 4001).unwrap();
    let cond = j.vertex_condition();
    let op = assemble_for_profile(&p, &j).unwrap();
    let sol = eigen_solve(&op, 0.0).unwrap();
    let mu = sol.report.eigenvalues_below[0];
    let base = discrete_equilibrium(&p, &j, cond).unwrap();
    let s = seed_perturbation(
        &base.u,
        &sol.modes[0],
        mu,
        1e-4 * base.u.sup_norm(),
        &j,
        cond,
    )
    .unwrap();
    let (r1, r2, r3) = graphwave::graph::vertex_residual(&s.u, cond, &j);
    for r in [r1, r2, r3] {
        assert!(r.abs() <= 1e-6, "seeded trace residual {r}");
    }
}

#[test]
fn growing_mode_fit_works_on_stored_states() {
    use graphwave::evolution::growing_mode_fit;
    let lambda = -4.0;
    let p = solve_kink_shifts(lambda, (1.0, 1.0, 1.0)).unwrap();
    let j = YJunction::new((1.0, 1.0, 1.0), lambda, 40.0, 1001).unwrap();
    let cond = j.vertex_condition();
    let op = assemble_for_profile(&p, &j).unwrap();
    let sol = eigen_solve(&op, 0.0).unwrap();
    let mu = sol.report.eigenvalues_below[0];
    let base = discrete_equilibrium(&p, &j, cond).unwrap();
    let eps = 1e-3 * base.u.sup_norm();
    let mut state = seed_perturbation(&base.u, &sol.modes[0], mu, eps, &j, cond).unwrap();
    let dt = 0.4 * j.grid_spacing();
    let mut states = vec![state.clone()];
    for k in 1..=((8.0 / dt) as usize) {
        state = step(&state, dt, &j, cond).unwrap();
        if k % 20 == 0 {
            states.push(state.clone());
        }
    }
    let fit = growing_mode_fit(&states, &p, &j).unwrap();
    let sigma = (-mu).sqrt();
    assert!(
        ((fit.sigma - sigma) / sigma).abs() < 0.1,
        "fit {} vs {}",
        fit.sigma,
        sigma
    );
}

#[test]
fn kirchhoff_kind_evolves_without_vertex_energy_term() {
    let p = solve_antikink_shift(0.0).unwrap();
    let j = YJunction::new((1.0, 1.0, 1.0), 0.0, 20.0, 1001).unwrap();
    let cond = VertexCondition::DeltaPrimeKirchhoffLimit;
    let base = discrete_equilibrium(&p, &j, cond).unwrap();
    let e = energy(&base, &j, cond).unwrap();
    assert_eq!(e.vertex, 0.0);
    let dt = 0.4 * j.grid_spacing();
    let mut s = base.clone();
    for _ in 0..200 {
        s = step(&s, dt, &j, cond).unwrap();
    }
    let mut d = s.u.clone();
    d.axpy(-1.0, &base.u);
    assert!(d.sup_norm() < 1e-9);
}

#[test]
fn energy_errors_on_zero_lambda_delta_prime() {
    let j = YJunction::new((1.0, 1.0, 1.0), 0.0, 20.0, 1001).unwrap();
    let z = EvolutionState {
        u: GraphFunction::zeros(1001),
        v: GraphFunction::zeros(1001),
        t: 0.0,
    };
    assert!(energy(&z, &j, VertexCondition::DeltaPrime(0.0)).is_err());
}
