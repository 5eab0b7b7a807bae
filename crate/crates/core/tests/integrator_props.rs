use proptest::prelude::*;

use diamag::analytic;
use diamag::designer::closure_error;
use diamag::field::{self, ForceLaw};
use diamag::integrator::pair_separation;
use diamag::model::MICRON;
use diamag::{simulate, Control, Medium, PacketState, Wire, WireField};

fn single(current: f64) -> WireField {
    WireField::new(vec![Wire::new(0.0, 0.0, current)], Medium::diamond())
}

fn launch(b: f64) -> PacketState {
    PacketState::new(0.0, -300.0 * MICRON, b, 0.01, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_and_angular_momentum_are_conserved(b_um in 0.3f64..10.0, current in 0.1f64..3.0) {
        let traj = simulate(launch(b_um * MICRON), &single(current), 0.06, &Control::default()).unwrap();
        prop_assert!(traj.stats.max_energy_drift < 1e-8);
        let l0 = traj.samples[0].angular_momentum_about(0.0, 0.0);
        for s in &traj.samples {
            prop_assert!(((s.angular_momentum_about(0.0, 0.0) - l0) / l0).abs() < 1e-8);
        }
    }

    #[test]
    fn periapsis_matches_closed_form(b_um in 0.3f64..10.0, current in 0.1f64..3.0) {
        let b = b_um * MICRON;
        let traj = simulate(launch(b), &single(current), 0.06, &Control::default()).unwrap();
        let d = analytic::closest_approach(b, current, 0.01, &Medium::diamond()).unwrap();
        let num = traj.events.periapsis_per_wire[0].distance;
        // Launch from 300 μm instead of infinity shifts the periapsis by O(α I²/(v0 L)²).
        prop_assert!(((num - d) / d).abs() < 2e-4, "{} vs {}", num, d);
    }

    #[test]
    fn time_reversal_returns_to_launch(b_um in 0.3f64..10.0, current in 0.1f64..3.0) {
        let field = single(current);
        let start = launch(b_um * MICRON);
        let fwd = simulate(start, &field, 0.06, &Control::default()).unwrap();
        let e = *fwd.final_state();
        let back = simulate(PacketState::new(0.0, e.x, e.z, -e.vx, -e.vz), &field, 0.06, &Control::default()).unwrap();
        let f = back.final_state();
        prop_assert!((f.x - start.x).hypot(f.z - start.z) < 1e-9);
    }

    #[test]
    fn acceleration_is_minus_potential_gradient(
        wires in prop::collection::vec((-300.0f64..300.0, -300.0f64..300.0, -3.0f64..3.0), 1..5),
        px in -400.0f64..400.0,
        pz in -400.0f64..400.0,
        full in any::<bool>(),
    ) {
        let wires: Vec<Wire> = wires.into_iter().map(|(x, z, i)| Wire::new(x * MICRON, z * MICRON, i)).collect();
        let (x, z) = (px * MICRON, pz * MICRON);
        let r_min = wires.iter().map(|w| w.distance_to(x, z)).fold(f64::INFINITY, f64::min);
        prop_assume!(r_min > 0.5 * MICRON);
        let law = if full { ForceLaw::FieldGradient } else { ForceLaw::PerWire };
        let f = WireField::new(wires, Medium::diamond()).with_law(law);
        let a = f.acceleration(x, z).unwrap();
        prop_assume!(a.0.hypot(a.1) > 0.0);
        let h = 1e-4 * r_min;
        let u = |x: f64, z: f64| f.potential(x, z).unwrap();
        let gx = -(u(x + h, z) - u(x - h, z)) / (2.0 * h);
        let gz = -(u(x, z + h) - u(x, z - h)) / (2.0 * h);
        prop_assert!((a.0 - gx).hypot(a.1 - gz) / a.0.hypot(a.1) < 1e-6);
    }

    #[test]
    fn mirror_wires_give_mirror_forces(x in -300.0f64..300.0, z in 1.0f64..300.0, i in 0.1f64..3.0) {
        let wires = vec![
            Wire::new(0.0, 0.0, 0.9),
            Wire::new(-150.0 * MICRON, 316.0 * MICRON, i),
            Wire::new(-150.0 * MICRON, -316.0 * MICRON, i),
        ];
        for law in [ForceLaw::PerWire, ForceLaw::FieldGradient] {
            let f = WireField::new(wires.clone(), Medium::diamond()).with_law(law);
            let (x, z) = (x * MICRON, z * MICRON);
            prop_assume!(wires.iter().all(|w| w.distance_to(x, z) > 0.1 * MICRON));
            let up = f.acceleration(x, z).unwrap();
            let down = f.acceleration(x, -z).unwrap();
            prop_assert!((up.0 - down.0).abs() <= 1e-12 * up.0.abs().max(1e-30));
            prop_assert!((up.1 + down.1).abs() <= 1e-12 * up.1.abs().max(1e-30));
        }
    }
}

#[test]
fn field_potential_uses_the_full_field_for_one_wire() {
    let m = Medium::diamond();
    let wires = [Wire::new(0.0, 0.0, 2.0)];
    let u = field::specific_potential((3.0 * MICRON, 4.0 * MICRON), &wires, &m).unwrap();
    let expect = 0.5 * m.alpha() * 4.0 / (25.0 * MICRON * MICRON);
    assert!(((u - expect) / expect).abs() < 1e-14);
}

/// Global error of the landing point versus a tight reference.
fn landing_error(rtol: f64, reference: &PacketState) -> f64 {
    let control = Control::default().with_rtol(rtol);
    let t = simulate(launch(0.5 * MICRON), &single(2.0), 0.06, &control).unwrap();
    let e = t.final_state();
    (e.x - reference.x).hypot(e.z - reference.z)
}

#[test]
fn global_error_tracks_the_tolerance() {
    let control = Control {
        rtol: 1e-14,
        atol: 1e-20,
        atol_velocity: 1e-20,
        ..Control::default()
    };
    let reference = *simulate(launch(0.5 * MICRON), &single(2.0), 0.06, &control).unwrap().final_state();
    let errs: Vec<f64> = [1e-6, 1e-7, 1e-8, 1e-9].iter().map(|&r| landing_error(r, &reference)).collect();
    // An error-per-step controller on a fifth-order pair gives a global error
    // close to proportional to the tolerance: each decade should buy
    // between a factor 3 and 30.
    for w in errs.windows(2) {
        let gain = w[0] / w[1];
        assert!((3.0..30.0).contains(&gain), "{errs:?}");
    }
}

#[test]
fn closure_miss_shrinks_with_tolerance() {
    let m = Medium::diamond();
    let wires = vec![
        Wire::new(0.0, 0.0, 0.925_272_666_402_374_4),
        Wire::new(-150.0 * MICRON, 316.5 * MICRON, 1.570_327_74),
        Wire::new(-150.0 * MICRON, -316.5 * MICRON, 1.570_327_74),
    ];
    let f = WireField::new(wires, m);
    let start = PacketState::new(0.0, -300.0 * MICRON, 0.5 * MICRON, 0.01, 0.0);
    let miss = |rtol: f64| {
        closure_error(&f, start, 0.1, 0.5, &Control::default().with_rtol(rtol))
            .unwrap()
            .miss()
            .unwrap()
    };
    let reference = miss(1e-13);
    let errs: Vec<f64> = [1e-7, 1e-8, 1e-9].iter().map(|&r| (miss(r) - reference).abs()).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[0] / errs[2] > 10.0, "{errs:?}");
}

#[test]
fn mirror_branches_have_mirror_trajectories() {
    let wires = vec![
        Wire::new(0.0, 0.0, 0.925),
        Wire::new(-150.0 * MICRON, 316.5 * MICRON, 1.57),
        Wire::new(-150.0 * MICRON, -316.5 * MICRON, 1.57),
    ];
    let f = WireField::new(wires, Medium::diamond());
    let top = simulate(PacketState::new(0.0, -300.0 * MICRON, 0.5 * MICRON, 0.01, 0.0), &f, 0.1, &Control::default()).unwrap();
    let bottom = simulate(PacketState::new(0.0, -300.0 * MICRON, -0.5 * MICRON, 0.01, 0.0), &f, 0.1, &Control::default()).unwrap();
    for i in 0..=200 {
        let t = 0.1 * i as f64 / 200.0;
        let (a, b) = (top.state_at(t).unwrap(), bottom.state_at(t).unwrap());
        assert!((a.x - b.x).abs() < 1e-9 && (a.z + b.z).abs() < 1e-9, "t = {t}");
    }
    let sep = pair_separation(&top, &bottom).unwrap();
    let apex = top.samples.iter().map(|s| s.z).fold(0.0, f64::max);
    assert!((sep.max - 2.0 * apex).abs() < 1e-9);
}
