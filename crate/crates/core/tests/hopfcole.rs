use fasep_core::config::{certified_trunc, HalfLineConfig, LatticeConfig};
use fasep_core::dynamics::{simulate_replica, weak_asym_params, Record};
use fasep_core::hopfcole::{height_field, hopf_cole, hopf_cole_identity, rescale, HeightReplay, Scale, Step};
use proptest::prelude::*;

#[test]
fn field_is_positive_and_log_linear_in_height() {
    let eps = 0.25;
    let w = weak_asym_params(eps).unwrap();
    let t = 300.0;
    let times: Vec<f64> = (1..=10).map(|k| k as f64 * 30.0).collect();
    for seed in 0..5 {
        let init = LatticeConfig::HalfLine(HalfLineConfig::empty(certified_trunc(0, t)));
        let tr = simulate_replica(&init, &w, t, seed, 0, &Record::Snapshots(times.clone())).unwrap();
        for (s, c) in &tr.snapshots {
            let LatticeConfig::HalfLine(c) = c else { panic!() };
            let h = height_field(c);
            let z = hopf_cole(&h, *s, &w);
            for (x, &v) in z.values.iter().enumerate() {
                assert!(v > 0.0);
                let hx = h.values[x] as f64;
                let resid = v.ln() + w.lambda * hx - w.nu * s;
                assert!(resid.abs() <= 1e-12 * (1.0 + (w.lambda * hx).abs() + w.nu * s), "x={x} resid={resid}");
            }
            assert_eq!(z.at(-1).unwrap(), w.mu * z.at(0).unwrap());
        }
    }
}

#[test]
fn replayed_jumps_move_one_weight_by_the_height_step() {
    let eps = 0.3;
    let w = weak_asym_params(eps).unwrap();
    let t = 150.0;
    let init = LatticeConfig::HalfLine(HalfLineConfig::empty(certified_trunc(0, t)));
    let tr = simulate_replica(&init, &w, t, 9, 4, &Record::FullLog).unwrap();
    let up = (2.0 * eps).exp();
    let mut jumps = 0;
    let end = HeightReplay::run(&tr, &w, t, |_, step| {
        if let Step::Jump(ch) = step {
            let r = ch.new_w / ch.old_w;
            assert!((r - up).abs() < 1e-12 * up || (r - 1.0 / up).abs() < 1e-12, "ratio {r}");
            jumps += 1;
        }
    })
    .unwrap();
    assert_eq!(jumps, tr.n_events);
    let LatticeConfig::HalfLine(c) = &tr.terminal else { panic!() };
    let z = hopf_cole(&height_field(c), t, &w);
    for x in 0..50 {
        assert!((end.z(x) - z.values[x]).abs() <= 1e-12 * z.values[x]);
    }
}

proptest! {
    #[test]
    fn generator_identity_holds_for_every_epsilon(eps in 0.001f64..0.95) {
        let id = hopf_cole_identity(&weak_asym_params(eps).unwrap());
        prop_assert!(id.interior_max_rel <= 1e-12, "{:?}", id);
        prop_assert!(id.boundary_max_rel() <= 1e-12, "{:?}", id);
    }

    #[test]
    fn rescaled_field_interpolates_between_grid_points(
        bits in proptest::collection::vec(0u8..2, 4..40),
        eps in 0.1f64..0.5,
        k in 0usize..3,
        f in 0.0f64..1.0,
    ) {
        let w = weak_asym_params(eps).unwrap();
        let c = HalfLineConfig::from_occ(bits, 2).unwrap();
        let t_macro = 0.01;
        let z = hopf_cole(&height_field(&c), t_macro * eps.powi(-4), &w);
        let r = rescale(&z, eps, t_macro, Scale::ZetaEmpty).unwrap();
        let e2 = eps * eps;
        prop_assert!((r.eval(r.grid_point(k)).unwrap() - z.values[k] / e2).abs() <= 1e-12 * z.values[k] / e2);
        let v = r.eval(e2 * (k as f64 + f)).unwrap();
        let (a, b) = (z.values[k] / e2, z.values[k + 1] / e2);
        prop_assert!(v >= a.min(b) * (1.0 - 1e-12) && v <= a.max(b) * (1.0 + 1e-12));
    }
}
