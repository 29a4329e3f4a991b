use phototherm::neutral::{analyze, analyze_with, critical_point, sweep_rt, trace_oscillatory, trace_stationary};
use phototherm::oracle::{build_operator, spectrum};
use phototherm::*;

fn solver_for(p: &Params) -> (Params, BasicState) {
    let b = solve_basic_state(p, 2000).unwrap();
    (*p, b)
}

fn overstable_case() -> Params {
    Params { us: 15.0, ..Params::default() }.with_gc(0.65).unwrap()
}

#[test]
fn stationary_curve_is_u_shaped() {
    let (p, b) = solver_for(&Params::default());
    let s = StabilitySolver::new(&p, &b).unwrap();
    let branch = trace_stationary(&s, 0.3, 8.0, 24);
    assert_eq!(branch.kind, BranchKind::Stationary);
    assert!(branch.missing.is_empty(), "{:?}", branch.missing);
    assert!(branch.samples.windows(2).all(|w| w[0].a < w[1].a));
    let (imin, _) = branch
        .samples
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.ra.total_cmp(&y.1.ra))
        .unwrap();
    assert!(imin > 0 && imin < branch.samples.len() - 1);
    let first = branch.samples[0].ra;
    let last = branch.samples.last().unwrap().ra;
    let min = branch.samples[imin].ra;
    assert!(first > 1.05 * min && last > 2.0 * min, "{first} {min} {last}");
}

#[test]
fn heating_from_above_lifts_the_stationary_curve() {
    let mut previous: Option<NeutralBranch> = None;
    for rt in [0.0, -500.0, -1000.0] {
        let (p, b) = solver_for(&Params { rt, ..Params::default() });
        let s = StabilitySolver::new(&p, &b).unwrap();
        let branch = trace_stationary(&s, 1.0, 5.0, 6);
        if let Some(prev) = &previous {
            for (lo, hi) in prev.samples.iter().zip(&branch.samples) {
                assert!(hi.ra > lo.ra, "R_T = {rt}, a = {}: {} <= {}", hi.a, hi.ra, lo.ra);
            }
        }
        previous = Some(branch);
    }
}

#[test]
fn stationary_samples_are_collocation_zeros() {
    let (p, b) = solver_for(&Params { rt: -250.0, ..Params::default() });
    let s = StabilitySolver::new(&p, &b).unwrap();
    let branch = trace_stationary(&s, 0.8, 6.0, 5);
    assert_eq!(branch.samples.len(), 5);
    for smp in &branch.samples {
        let op = build_operator(smp.a, smp.ra, &p, &b, 64).unwrap();
        let nearest = spectrum(&op, 12)
            .unwrap()
            .into_iter()
            .map(|g| g.norm())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-4, "a = {}: nearest eigenvalue {nearest}", smp.a);
    }
}

#[test]
fn accepted_samples_are_sharp_zeros() {
    let (p, b) = solver_for(&Params::default());
    let s = StabilitySolver::new(&p, &b).unwrap();
    for smp in trace_stationary(&s, 1.0, 4.0, 4).samples {
        let d = |ra: f64| s.stationary_determinant(smp.a, ra).unwrap().abs();
        let (at, near) = (d(smp.ra), d(smp.ra * 1.05).min(d(smp.ra * 0.95)));
        assert!(at < 1e-8 * near, "a = {}: {at:e} vs {near:e}", smp.a);
    }
}

#[test]
fn oscillatory_branch_ends_on_the_stationary_curve() {
    let p = overstable_case();
    let (p, b) = solver_for(&p);
    let s = StabilitySolver::new(&p, &b).unwrap();
    let result = analyze_with(&s, &NeutralConfig::default()).unwrap();
    let osc = result.oscillatory.first().expect("an oscillatory branch");
    assert_eq!(osc.kind, BranchKind::Oscillatory);
    assert!(osc.samples.windows(2).all(|w| w[0].a < w[1].a));
    let merge = osc.merges.first().expect("a merge point");
    let (end, body) = osc.samples.split_last().unwrap();
    assert!(body.iter().all(|x| x.omega > 0.0));
    assert_eq!((end.a, end.omega), (merge.a, 0.0));
    // frequency falls off towards the merge
    let tail: Vec<_> = osc.samples.iter().filter(|x| x.a > merge.a - 0.5 && x.a <= merge.a).collect();
    assert!(tail.len() > 2 && tail.windows(2).all(|w| w[1].omega < w[0].omega));
    let (ra_s, _) = result.stationary.interpolate(merge.a).unwrap();
    let ra_exact = s.solve_stationary_ra(merge.a, Some(ra_s)).unwrap();
    assert!(((merge.ra - ra_exact) / ra_exact).abs() < 5e-3, "{} vs {ra_exact}", merge.ra);
}

#[test]
fn critical_point_is_a_local_minimum() {
    let (p, b) = solver_for(&Params::default());
    let s = StabilitySolver::new(&p, &b).unwrap();
    let c = analyze_with(&s, &NeutralConfig::default()).unwrap().critical;
    assert_eq!(c.kind, BranchKind::Stationary);
    assert_eq!(c.period, None);
    for f in [0.95, 1.05] {
        let ra = s.solve_stationary_ra(c.a * f, Some(c.ra)).unwrap();
        assert!(ra > c.ra);
    }
}

#[test]
fn overstable_critical_point_has_a_period() {
    let c = analyze(&overstable_case(), &NeutralConfig::default()).unwrap().critical;
    assert_eq!(c.kind, BranchKind::Oscillatory);
    let period = c.period.unwrap();
    assert!(period > 0.0 && (period * c.omega - std::f64::consts::TAU).abs() < 1e-12);
}

#[test]
fn doubling_continuation_density_keeps_the_kind() {
    for p in [Params::default(), overstable_case()] {
        let coarse = analyze(&p, &NeutralConfig::default()).unwrap().critical;
        let dense = NeutralConfig {
            n_points: 120,
            arclength_step: 0.025,
            ..NeutralConfig::default()
        };
        let fine = analyze(&p, &dense).unwrap().critical;
        assert_eq!(coarse.kind, fine.kind);
        assert!(((coarse.ra - fine.ra) / fine.ra).abs() < 1e-3);
    }
}

#[test]
fn single_entry_sweep_is_the_critical_point() {
    let cfg = NeutralConfig {
        search_oscillatory: false,
        n_points: 20,
        ..NeutralConfig::default()
    };
    let table = sweep_rt(&[-250.0], &Params::default(), &cfg).unwrap();
    let direct = analyze(&Params { rt: -250.0, ..Params::default() }, &cfg).unwrap().critical;
    assert_eq!(table.entries.len(), 1);
    assert_eq!(table.entries[0].critical.as_ref().unwrap(), &direct);
    assert!(sweep_rt(&[], &Params::default(), &cfg).is_err());
}

#[test]
fn empty_branches_are_an_error() {
    let (p, b) = solver_for(&Params::default());
    let s = StabilitySolver::new(&p, &b).unwrap();
    assert_eq!(critical_point(&s, &[]), Err(Error::EmptyBranches));
}

#[test]
fn continuation_from_a_polished_seed_runs_both_ways() {
    let (p, b) = solver_for(&overstable_case());
    let s = StabilitySolver::new(&p, &b).unwrap();
    let OscillatoryOutcome::Converged { ra, omega, .. } = s.solve_oscillatory(2.3, 86.0, 2.0).unwrap() else {
        panic!("seed did not converge")
    };
    let seed = NeutralSample { a: 2.3, ra, omega };
    let branch = trace_oscillatory(&s, 0.5, 6.0, seed, 0.05);
    let (lo, hi) = branch.a_range().unwrap();
    assert!(lo < 2.0 && hi > 3.0, "{lo}..{hi}");
    assert!(branch.samples.iter().any(|x| (x.a - 2.3).abs() < 1e-12));
}
