use nozzle_shock::locator::find_admissible_locations;
use nozzle_shock::output::{write_linear_csv, write_shock_csv, LinearManifest, ShockManifest};
use nozzle_shock::transonic::{
    lagrange_to_physical, solve_transonic, state_distance, IterationState, TransonicOptions, TransonicProblem,
};
use nozzle_shock::{BackgroundShock, GasConstants, NozzleSpec, Profile1D, ShockSolution};

fn air() -> (BackgroundShock, GasConstants) {
    let g = GasConstants::air();
    (BackgroundShock::from_upstream(1.0, 2.0, &g).unwrap(), g)
}

fn nozzle(theta: &str, pressure: f64, sigma: f64) -> NozzleSpec {
    let theta = Profile1D::expression(theta, 1.0, (0.0, 1.0)).unwrap();
    NozzleSpec::new(1.0, sigma, theta, Profile1D::constant(pressure, (0.0, 1.0))).unwrap()
}

fn expanding(sigma: f64) -> NozzleSpec {
    nozzle("(x/L)^3", 0.6, sigma)
}

fn solve(spec: &NozzleSpec, opts: &TransonicOptions) -> ShockSolution {
    let (bg, g) = air();
    let xi = find_admissible_locations(spec, &bg, &g).admissible_roots()[0];
    solve_transonic(spec, &bg, &g, xi, opts).unwrap()
}

#[test]
fn norm_exponent_does_not_move_the_fixed_point() {
    let spec = expanding(0.005);
    let base = solve(&spec, &TransonicOptions::default());
    for beta in [3.0, 6.0] {
        let other = solve(&spec, &TransonicOptions { beta, ..TransonicOptions::default() });
        assert!((other.xi_star - base.xi_star).abs() < 1e-9, "β = {beta}");
        assert!(other.u_plus.map2(&base.u_plus, |a, b| a - b).max_abs() < 1e-9);
    }
}

#[test]
fn shock_meets_the_wall_on_the_nozzle_contour() {
    let (_, g) = air();
    let spec = expanding(0.01);
    let sol = solve(&spec, &TransonicOptions::default());
    let phys = lagrange_to_physical(&sol, &g).unwrap();
    let (y, x) = phys.wall_point;
    assert!((y - spec.wall_height(x).unwrap()).abs() < 1e-5, "{y} vs {}", spec.wall_height(x).unwrap());
    assert_eq!(phys.y[0], 0.0);
    assert!(phys.y.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn oscillating_walls_give_two_distinct_shocks() {
    let (bg, g) = air();
    let spec = nozzle("sin(2*pi*x/L)", -0.8, 0.005);
    let roots = find_admissible_locations(&spec, &bg, &g).admissible_roots();
    assert_eq!(roots.len(), 2);
    let sols: Vec<_> = roots.iter().map(|&xi| solve_transonic(&spec, &bg, &g, xi, &TransonicOptions::default()).unwrap()).collect();
    let gap = (sols[0].psi.last().unwrap() - sols[1].psi.last().unwrap()).abs();
    assert!(gap >= 0.5 * (roots[1] - roots[0]));
    for s in &sols {
        assert!(s.validation.passed);
        assert!(s.validation.exit_pressure_max < 1e-8);
    }
}

#[test]
fn higher_frequency_walls_give_four_shocks() {
    let (bg, g) = air();
    let spec = nozzle("sin(4*pi*x/L)", -0.8, 0.0025);
    let roots = find_admissible_locations(&spec, &bg, &g).admissible_roots();
    assert_eq!(roots.len(), 4);
    for xi in roots {
        assert!(solve_transonic(&spec, &bg, &g, xi, &TransonicOptions::default()).unwrap().validation.passed);
    }
}

#[test]
fn converged_state_is_a_fixed_point_of_the_map() {
    let (bg, g) = air();
    let spec = expanding(0.01);
    let opts = TransonicOptions::default();
    let sol = solve(&spec, &opts);
    let problem = TransonicProblem::new(&spec, &bg, &g, sol.xi_bar, &opts).unwrap();
    let state = IterationState {
        delta_u: sol.u_plus.map2(&nozzle_shock::StateFields::uniform(sol.u_plus.grid, &bg.u_plus), |a, b| a - b),
        delta_psi_prime: sol.psi_prime.clone(),
        delta_xi_star: sol.xi_star - sol.xi_bar,
        iteration: sol.iterations,
    };
    let (next, _) = problem.apply_iteration_map(&state, &opts).unwrap();
    assert!(state_distance(&next, &state, opts.beta) < 1e-9);
}

#[test]
fn shock_is_compressive_everywhere() {
    let sol = solve(&expanding(0.01), &TransonicOptions::default());
    assert!(sol.validation.min_jump_p > 3.0);
    assert!(sol.log.iter().all(|r| r.compat_residual.abs() < 1e-10));
}

#[test]
fn writers_produce_parseable_grids() {
    let (bg, g) = air();
    let spec = expanding(0.005);
    let sol = solve(&spec, &TransonicOptions::default());
    let phys = lagrange_to_physical(&sol, &g).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_shock_csv(dir.path(), &sol, &phys).unwrap();
    write_linear_csv(dir.path(), sol.linear.as_ref().unwrap()).unwrap();
    let mut rdr = csv::Reader::from_path(dir.path().join("shock.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["eta", "psi", "psi_prime", "x", "y"]);
    let rows: Vec<Vec<f64>> = rdr.records().map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), sol.eta.len());
    assert_eq!(rows.last().unwrap()[1], *sol.psi.last().unwrap());
    let plus = std::fs::read_to_string(dir.path().join("u_plus.csv")).unwrap();
    let first: Vec<f64> = plus.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], sol.psi[0]);
    for name in ["u_minus.csv", "u_dot_minus.csv", "u_dot_plus.csv", "psi_dot.csv"] {
        assert!(dir.path().join(name).exists());
    }
    let m = ShockManifest::new(&sol, &phys, &bg);
    assert_eq!(m.iterations, sol.iterations);
    let lm = LinearManifest::new(sol.linear.as_ref().unwrap(), &spec, &bg, &g);
    assert!(lm.solvability_identity.abs() < 1e-10);
}
