use fasep_core::config::{enumerate_window_configs, make_initial, FasepConfig, HalfLineConfig, InitialKind, LatticeConfig};
use fasep_core::dynamics::{apply_fasep, enabled_transitions_fasep, simulate_ctmc, weak_asym_params, Record};
use proptest::prelude::*;

#[test]
fn regular_set_is_closed_on_all_windows_up_to_twelve() {
    let w = weak_asym_params(0.3).unwrap();
    let mut moves = 0usize;
    for n in 1..=12 {
        for tc in enumerate_window_configs(n).unwrap() {
            if !tc.regularity.is_regular {
                continue;
            }
            for tr in enabled_transitions_fasep(&tc.config, &w).unwrap() {
                let next = apply_fasep(&tc.config, tr.kind).unwrap();
                assert!(next.validate_regular().unwrap().is_regular, "{} --{:?}--> {}", tc.config, tr.kind, next);
                moves += 1;
            }
        }
    }
    assert!(moves > 1000);
}

#[test]
fn label_gaps_stay_in_one_two_along_step_evolutions() {
    let w = weak_asym_params(0.2).unwrap();
    let times: Vec<f64> = (1..=20).map(|k| k as f64 * 2.5).collect();
    for seed in 0..20 {
        let tr = simulate_ctmc(&LatticeConfig::Fasep(FasepConfig::step(0)), &w, 50.0, seed, &Record::Snapshots(times.clone())).unwrap();
        for (_, c) in &tr.snapshots {
            let LatticeConfig::Fasep(f) = c else { panic!("lattice changed") };
            assert!(f.validate_regular().unwrap().is_regular);
            let x = f.label_particles().unwrap().positions;
            for pair in x.windows(2) {
                let gap = pair[0] - pair[1];
                assert!(gap == 1 || gap == 2, "gap {gap} in {f}");
            }
        }
    }
}

#[test]
fn bernoulli_density_is_respected() {
    let LatticeConfig::HalfLine(c) =
        make_initial(&InitialKind::Bernoulli { rho: 0.3, seed: 4, n_fill: 20_000, n_trunc: 20_100 }).unwrap()
    else {
        panic!()
    };
    let k = c.particle_count() as f64;
    let sd = (20_000.0f64 * 0.3 * 0.7).sqrt();
    assert!((k - 6000.0).abs() < 4.0 * sd, "{k}");
    assert!(c.occ()[20_000..].iter().all(|&b| b == 0));
}

proptest! {
    #[test]
    fn step_maps_to_empty_halfline(x0 in -1000i64..1000) {
        let h = FasepConfig::step(x0).map_to_halfline().unwrap();
        prop_assert_eq!(h.particle_count(), 0);
    }

    #[test]
    fn literal_roundtrip(lo in -50i64..50, bits in proptest::collection::vec(0u8..2, 1..40)) {
        let c = FasepConfig::new(lo, bits).unwrap();
        let back = FasepConfig::parse(&c.to_string()).unwrap();
        prop_assert_eq!(back.canonical(), c.canonical());
    }

    #[test]
    fn halfline_literal_roundtrip(bits in proptest::collection::vec(0u8..2, 1..60)) {
        let c = HalfLineConfig::from_occ(bits, 0).unwrap();
        let back = HalfLineConfig::parse(&c.to_string()).unwrap();
        prop_assert_eq!(back.occ(), c.occ());
    }

    #[test]
    fn shift_commutes_with_mapping(k in -30i64..30, bits in proptest::collection::vec(0u8..2, 1..12)) {
        let c = FasepConfig::new(0, bits).unwrap();
        prop_assume!(c.validate_regular().unwrap().is_regular);
        let a = c.map_to_halfline().unwrap();
        let b = c.shifted(k).map_to_halfline().unwrap();
        prop_assert_eq!(a.occupied_sites(), b.occupied_sites());
    }
}
