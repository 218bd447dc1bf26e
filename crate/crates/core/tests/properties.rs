use proptest::prelude::*;
use rand::Rng;

use torwalk_core::asymptotics::{pbar, predict_scaling, Regime};
use torwalk_core::fss::{power_law_fit, FitOptions, FitPoint};
use torwalk_core::ising::{worm_step, HighTempConfig};
use torwalk_core::lattice::{Site, Step, Torus};
use torwalk_core::orbit::{Boundary, OrbitSpace};
use torwalk_core::rllerw::ErasedPath;
use torwalk_core::rng::stream_rng;
use torwalk_core::saw::{bs_step, lifted_bs_step, SawState};
use torwalk_core::WalkLengthLaw;

fn law_strategy() -> impl Strategy<Value = WalkLengthLaw> {
    prop_oneof![
        (0.1f64..500.0).prop_map(|m| WalkLengthLaw::geometric(m).unwrap()),
        (0.1f64..500.0).prop_map(|m| WalkLengthLaw::half_normal(m).unwrap()),
        (0.1f64..500.0).prop_map(|m| WalkLengthLaw::discretized_exponential(m).unwrap()),
        (1u64..200, 0.05f64..5.0).prop_map(|(n, z)| WalkLengthLaw::complete_graph_saw(n, z).unwrap()),
        (0u64..300).prop_map(WalkLengthLaw::deterministic),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_and_neighbour_round_trip(d in 1usize..=4, l in 1usize..=7, seed in any::<u64>()) {
        let t = Torus::new(d, l).unwrap();
        let mut rng = stream_rng(seed, 0, 0);
        for _ in 0..50 {
            let x = rng.random_range(0..t.sites());
            let s = t.site(x);
            prop_assert_eq!(t.site_index(&s).unwrap(), x);
            for step in Step::all(d) {
                let y = t.neighbor(x, step);
                prop_assert_eq!(t.neighbor(y, step.reversed()), x);
                prop_assert_eq!(t.site(y), t.wrap_step(&s, step));
            }
        }
    }

    #[test]
    fn displacement_inverts_translation(d in 1usize..=3, l in 2usize..=6, seed in any::<u64>()) {
        let t = Torus::new(d, l).unwrap();
        let mut rng = stream_rng(seed, 0, 0);
        for _ in 0..50 {
            let (a, b) = (rng.random_range(0..t.sites()), rng.random_range(0..t.sites()));
            let disp = t.site(t.displacement(a, b));
            let back: Vec<i64> = t.site(a).iter().zip(disp.iter()).map(|(x, y)| x + y).collect();
            prop_assert_eq!(t.site_index(&t.reduce(&Site::new(&back))).unwrap(), b);
        }
    }

    #[test]
    fn tail_is_a_survival_function(law in law_strategy()) {
        prop_assert_eq!(law.tail(0), 1.0);
        let mut prev = 1.0;
        for n in 0..400u64 {
            let t = law.tail(n);
            prop_assert!((0.0..=1.0).contains(&t));
            prop_assert!(t <= prev + 1e-15);
            prev = t;
        }
    }

    #[test]
    fn orbit_rank_is_symmetry_invariant(d in 1usize..=4, r in 1usize..=6, seed in any::<u64>()) {
        let space = OrbitSpace::new(d, Boundary::Absorbing { radius: r }).unwrap();
        let mut rng = stream_rng(seed, 0, 0);
        for _ in 0..30 {
            let x: Vec<i64> = (0..d).map(|_| rng.random_range(-(r as i64)..=r as i64)).collect();
            let mut y: Vec<i64> = x.iter().map(|c| if rng.random::<bool>() { -c } else { *c }).collect();
            y.rotate_left(rng.random_range(0..d));
            prop_assert_eq!(space.rank_of(&x), space.rank_of(&y));
        }
    }

    #[test]
    fn loop_erasure_stays_self_avoiding(d in 1usize..=3, l in 3usize..=6, seed in any::<u64>()) {
        let t = Torus::new(d, l).unwrap();
        let mut path = ErasedPath::new(&t);
        let mut rng = stream_rng(seed, 0, 0);
        for _ in 0..300 {
            let next = t.neighbor(path.tip(), Step::from_index(rng.random_range(0..2 * d)));
            path.loop_erase_step(next).unwrap();
            prop_assert!(path.is_valid());
        }
    }

    #[test]
    fn worm_keeps_odd_vertices_at_defects(d in 1usize..=3, l in 3usize..=5, z in 0.05f64..0.95, seed in any::<u64>()) {
        let t = Torus::new(d, l).unwrap();
        let mut cfg = HighTempConfig::new(&t, z).unwrap();
        let mut rng = stream_rng(seed, 0, 0);
        for _ in 0..500 {
            worm_step(&mut cfg, &mut rng);
        }
        prop_assert!(cfg.parity_ok());
    }

    #[test]
    fn saw_moves_keep_a_valid_walk(d in 1usize..=3, l in 3usize..=6, z in 0.05f64..1.0, lifted in any::<bool>(), seed in any::<u64>()) {
        let t = Torus::new(d, l).unwrap();
        let mut s = SawState::new(&t, z).unwrap();
        let mut rng = stream_rng(seed, 0, 0);
        for _ in 0..500 {
            if lifted { lifted_bs_step(&mut s, &mut rng); } else { bs_step(&mut s, &mut rng); }
        }
        prop_assert!(s.is_valid());
        prop_assert!(s.len() < t.sites());
    }

    #[test]
    fn pbar_is_even(n in 1u64..1000, x in proptest::collection::vec(-20i64..=20, 1..=5)) {
        let neg: Vec<i64> = x.iter().map(|c| -c).collect();
        prop_assert_eq!(pbar(n, &x), pbar(n, &neg));
    }

    #[test]
    fn exponents_are_monotone_and_capped(d in 3usize..=8, l1 in 0.1f64..6.0, l2 in 0.1f64..6.0) {
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let a = predict_scaling(Regime::Pseudocritical { lambda: lo }, d).unwrap();
        let b = predict_scaling(Regime::Pseudocritical { lambda: hi }, d).unwrap();
        prop_assert!(a.mean_len_exponent <= b.mean_len_exponent);
        prop_assert!(a.plateau_exponent <= b.plateau_exponent);
        prop_assert!(b.mean_len_exponent <= d as f64 / 2.0);
        prop_assert_eq!(b.chi_exponent, b.mean_len_exponent);
    }

    #[test]
    fn noiseless_power_law_is_recovered(a in 0.2f64..5.0, b in 0.5f64..3.0, c in -2.0f64..2.0) {
        let pts: Vec<FitPoint> = [5.0, 7.0, 9.0, 11.0, 13.0, 17.0, 21.0]
            .iter()
            .map(|&l: &f64| { let y = a * l.powf(b) + c; FitPoint { l, y, err: 1e-6 * y.abs().max(1.0) } })
            .collect();
        let fit = power_law_fit(&pts, FitOptions { l_min: 0.0, fix_c: None }).unwrap();
        prop_assert!((fit.b - b).abs() < 1e-6, "b {} vs {}", fit.b, b);
        prop_assert!((fit.a - a).abs() < 1e-6 * a.max(1.0));
        prop_assert!((fit.c - c).abs() < 1e-5);
    }
}
