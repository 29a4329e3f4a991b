use num_complex::Complex64;
use phototherm::oracle::{build_operator, spectrum};
use phototherm::*;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn relative(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs())
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn taxis_vanishes_at_its_critical_intensity(chi in -1.0..1.0_f64) {
        let gc = critical_intensity(chi).unwrap();
        prop_assert!(TaxisFn::new(chi).value(gc).abs() < 1e-12);
        prop_assert!(relative(chi_from_gc(gc).unwrap(), chi) < 1e-9 || chi.abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn basic_state_is_normalized(h in 0.25..1.5_f64, us in 0.0..20.0_f64, gc in 0.5..0.8_f64) {
        let p = Params { optical_depth: h, us, ..Params::default() }.with_gc(gc).unwrap();
        let b = solve_basic_state(&p, 2000).unwrap();
        prop_assert!(b.normalization_error() < 1e-8);
        prop_assert!(b.n.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn stationary_determinant_ignores_prandtl(a in 0.5..6.0_f64, ra in 10.0..400.0_f64, pr in 0.1..100.0_f64, rt in -1000.0..0.0_f64) {
        let p = Params { rt, ..Params::default() };
        let b = solve_basic_state(&p, 400).unwrap();
        let d0 = StabilitySolver::new(&p, &b).unwrap().stationary_determinant(a, ra).unwrap();
        let q = Params { pr, ..p };
        let d1 = StabilitySolver::new(&q, &b).unwrap().stationary_determinant(a, ra).unwrap();
        prop_assert!(relative(d0, d1) < 1e-8);
    }

    #[test]
    fn determinant_respects_conjugation(a in 0.5..6.0_f64, ra in 10.0..400.0_f64, re in -3.0..3.0_f64, im in 0.1..15.0_f64) {
        let p = Params { rt: -400.0, ..Params::default() };
        let b = solve_basic_state(&p, 400).unwrap();
        let s = StabilitySolver::new(&p, &b).unwrap();
        let g = Complex64::new(re, im);
        let d = s.determinant(&ModeProblem::new(a, ra, g)).unwrap().value;
        let dc = s.determinant(&ModeProblem::new(a, ra, g.conj())).unwrap().value;
        prop_assert!((d.conj() - dc).norm() <= 1e-10 * d.norm());
    }

    #[test]
    fn rhs_is_linear_in_the_state(x3 in 0.0..1.0_f64, alpha in -3.0..3.0_f64, seed in proptest::collection::vec(-2.0..2.0_f64, 36)) {
        let p = Params { rt: -250.0, ..Params::default() };
        let b = solve_basic_state(&p, 400).unwrap();
        let s = StabilitySolver::new(&p, &b).unwrap();
        let mp = ModeProblem::new(2.0, 100.0, Complex64::new(0.3, 1.1));
        let mk = |o: usize| StateVector(std::array::from_fn(|k| Complex64::new(seed[o + 2 * k], seed[o + 2 * k + 1])));
        let (y1, y2) = (mk(0), mk(18));
        let combo = StateVector(std::array::from_fn(|k| y1.0[k] * alpha + y2.0[k]));
        let lhs = s.rhs(&mp, x3, &combo).unwrap();
        let (r1, r2) = (s.rhs(&mp, x3, &y1).unwrap(), s.rhs(&mp, x3, &y2).unwrap());
        for k in 0..9 {
            let expect = r1.0[k] * alpha + r2.0[k];
            prop_assert!((lhs.0[k] - expect).norm() <= 1e-10 * (1.0 + expect.norm()));
        }
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn thermal_block_decouples_without_thermal_forcing(a in 0.8..5.0_f64, le in 1.0..40.0_f64) {
        let p = Params { le, ..Params::default() };
        let b = solve_basic_state(&p, 2000).unwrap();
        let full = StabilitySolver::new(&p, &b).unwrap().solve_stationary_ra(a, None).unwrap();
        let reduced = StabilitySolver::new(&p, &b)
            .unwrap()
            .with_thermal_block(ThermalBlock::Omitted)
            .solve_stationary_ra(a, None)
            .unwrap();
        prop_assert!(relative(full, reduced) < 1e-8);
    }

    #[test]
    fn shooting_roots_are_collocation_eigenvalues(a in 0.8..5.0_f64, rt in -1000.0..0.0_f64) {
        let p = Params { rt, ..Params::default() };
        let b = solve_basic_state(&p, 2000).unwrap();
        let ra = StabilitySolver::new(&p, &b).unwrap().solve_stationary_ra(a, None).unwrap();
        let op = build_operator(a, ra, &p, &b, 64).unwrap();
        let nearest = spectrum(&op, 8).unwrap().into_iter().map(|g| g.norm()).fold(f64::INFINITY, f64::min);
        prop_assert!(nearest < 1e-4, "a = {a}, R_T = {rt}: {nearest}");
    }
}
