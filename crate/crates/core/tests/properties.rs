//! Property tests across the public API.

use hardsphere::eos::{self, PressureParams};
use hardsphere::limits::profile::InitialProfileSpec;
use hardsphere::limits::sweep::{epsilon_sweep, Experiment, SweepSetup};
use hardsphere::limits::transform::{eulerian_to_lagrangian_with, lagrangian_to_eulerian, ToLagrangian};
use hardsphere::psystem::{self, SmoothConfig};
use hardsphere::riemann::{self, LagrangianState};
use hardsphere::viscous::{self, Boundary, ViscousConfig};
use hardsphere::grid::cubic_interp;
use hardsphere::Grid;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = PressureParams> {
    (-4.0f64..-1.0, 1.1f64..4.0, prop::bool::ANY, 0.1f64..2.0, 1.2f64..2.8).prop_map(|(le, g, iso, k, gt)| {
        if iso {
            PressureParams::with_isentropic(10f64.powf(le), g, k, gt)
        } else {
            PressureParams::singular(10f64.powf(le), g)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eulerian_and_lagrangian_pressures_agree(p in params(), rho in 0.01f64..0.99) {
        let pe = eos::pressure_eulerian(rho, &p).unwrap();
        let pl = eos::pressure_lagrangian(1.0 / rho, &p).unwrap().total;
        prop_assert!((pe - pl).abs() <= 1e-12 * pe.abs());
    }

    #[test]
    fn theta_decreases_and_sound_speed_is_positive(p in params(), l in -3.0f64..1.0, r in 1.01f64..2.0) {
        let v = 1.0 + 10f64.powf(l);
        prop_assert!(eos::sound_speed(v, &p).unwrap() > 0.0);
        prop_assert!(eos::theta_lagrangian(v * r, &p).unwrap() < eos::theta_lagrangian(v, &p).unwrap());
    }

    #[test]
    fn invariants_recover_velocity(p in params(), amp in -0.5f64..0.5) {
        let grid = Grid::spanning(-1.0, 1.0, 21);
        let v = grid.sample(|x| 2.0 + 0.5 * x.sin());
        let u = grid.sample(|x| amp * x.cos());
        let state = LagrangianState::new(grid, v, u.clone()).unwrap();
        let (w, z) = riemann::riemann_invariants_lagrangian(&state, &p).unwrap();
        for i in 0..grid.n {
            prop_assert!((0.5 * (w[i] + z[i]) - u[i]).abs() < 1e-12);
            prop_assert!(w[i] >= z[i]);
        }
    }

    #[test]
    fn periodic_viscous_run_conserves_mass(amp in 0.0f64..0.3, speed in -0.3f64..0.3) {
        let n = 64;
        let grid = Grid::new(0.0, 1.0 / n as f64, n);
        let rho = grid.sample(|x| 0.5 + amp * (2.0 * std::f64::consts::PI * x).sin());
        let m = grid.sample(|x| 0.5 * speed * (2.0 * std::f64::consts::PI * x).cos());
        let mut cfg = ViscousConfig::new(1e-2, PressureParams::singular(0.01, 2.0), grid, 0.05);
        cfg.boundary = Boundary::Periodic;
        let traj = viscous::run(&cfg, &rho, &m).unwrap();
        let (m0, m1) = (traj.diagnostics[0].mass, traj.diagnostics.last().unwrap().mass);
        prop_assert!((m0 - m1).abs() <= 1e-12 * m0);
    }
}

#[test]
fn frame_maps_round_trip() {
    let p = PressureParams::singular(0.1, 2.0);
    let grid = Grid::spanning(-4.0, 4.0, 201);
    let v = grid.sample(|x| 2.0 - 0.3 * (-x * x).exp());
    let u = grid.sample(|x| 0.1 * x.tanh());
    let (traj, br) = psystem::run_smooth(&SmoothConfig::new(p, grid, 0.1), &v, &u).unwrap();
    assert!(br.is_none());
    let eul = lagrangian_to_eulerian(&traj).unwrap();
    let opts = ToLagrangian { mass_origin: grid.x0, ..ToLagrangian::default() };
    let back = eulerian_to_lagrangian_with(&eul, &opts).unwrap();
    let (a, b) = (&traj.first().state, &back.first().state);
    let g = b.grid;
    let mut compared = 0;
    for i in g.n / 4..3 * g.n / 4 {
        let x = g.x(i);
        if let Some(va) = cubic_interp(&a.grid, &a.v, x) {
            assert!((va - b.v[i]).abs() < 1e-3, "v mismatch at {x}");
            compared += 1;
        }
    }
    assert!(compared > 0);
}

#[test]
fn sweeps_are_reproducible() {
    let grid = Grid::spanning(-4.0, 4.0, 401);
    let mut setup = SweepSetup::new(InitialProfileSpec::plateau(grid, 2.0, 0.2), 0.5);
    setup.guard_constant = 1e3;
    let p = PressureParams::with_isentropic(0.1, 2.0, 1.0, 2.0);
    let eps = [1e-1, 1e-2, 1e-3];
    let a = epsilon_sweep(&setup, &p, &eps, Experiment::PressureL1).unwrap();
    let b = epsilon_sweep(&setup, &p, &eps, Experiment::PressureL1).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.records.len(), 3);
}
