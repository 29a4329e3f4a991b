use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;
use phototherm::fields::{default_probe, extract_eigenmode, most_unstable_wavenumber, render_frame, render_frames, time_series};
use phototherm::oracle::{build_operator, eigenvector, residual};
use phototherm::*;
use rustfft::FftPlanner;

struct Case {
    params: Params,
    basic: BasicState,
    mode: Eigenmode,
    omega: f64,
}

/// Overstable onset with strong absorption and heating from above.
fn travelling() -> &'static Case {
    static CASE: OnceLock<Case> = OnceLock::new();
    CASE.get_or_init(|| {
        let params = Params {
            us: 15.0,
            optical_depth: 1.0,
            rt: -500.0,
            ..Params::default()
        }
        .with_chi(-0.485)
        .unwrap();
        let basic = solve_basic_state(&params, 2000).unwrap();
        let s = StabilitySolver::new(&params, &basic).unwrap();
        let OscillatoryOutcome::Converged { ra, omega, .. } = s.solve_oscillatory(1.9, 91.0, 3.2).unwrap() else {
            panic!("no neutral oscillatory mode")
        };
        let mode = extract_eigenmode(&s, &ModeProblem::oscillatory(1.9, ra, omega)).unwrap();
        Case { params, basic, mode, omega }
    })
}

fn max_abs(rows: &[Vec<f64>]) -> f64 {
    rows.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

#[test]
fn eigenmode_meets_boundary_conditions_and_normalization() {
    let m = &travelling().mode;
    assert!(m.boundary_residual() < 1e-6, "{}", m.boundary_residual());
    let peak = m.w.iter().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap();
    assert!((peak.re - 1.0).abs() < 1e-12 && peak.im.abs() < 1e-12);
    assert!((m.wavelength() - TAU / m.a).abs() < 1e-15);
}

#[test]
fn frames_repeat_after_one_period() {
    let c = travelling();
    let f0 = render_frame(&c.mode, 0.3, 32, 24).unwrap();
    let f1 = render_frame(&c.mode, 0.3 + TAU / c.omega, 32, 24).unwrap();
    for (a, b) in [(&f0.psi, &f1.psi), (&f0.w, &f1.w), (&f0.n, &f1.n), (&f0.temperature, &f1.temperature)] {
        let scale = max_abs(a);
        for (ra, rb) in a.iter().zip(b) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() <= 1e-10 * scale);
            }
        }
    }
}

#[test]
fn hopf_partners_are_mirror_images() {
    let c = travelling();
    let (nx, nz) = (40, 20);
    for t in [0.0, 0.21, 0.9] {
        let f = render_frame(&c.mode, t, nx, nz).unwrap();
        let g = render_frame(&c.mode.conjugate(), t, nx, nz).unwrap();
        for k in 0..nz {
            for j in 0..nx {
                let r = nx - 1 - j;
                assert!((f.w[k][j] - g.w[k][r]).abs() < 1e-12);
                assert!((f.n[k][j] - g.n[k][r]).abs() < 1e-9 * max_abs(&f.n));
                assert!((f.temperature[k][j] - g.temperature[k][r]).abs() < 1e-12);
                assert!((f.psi[k][j] + g.psi[k][r]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn streamfunction_generates_vertical_velocity() {
    let c = travelling();
    let nx = 129;
    let f = render_frame(&c.mode, 0.17, nx, 33).unwrap();
    let dx = f.x1[1] - f.x1[0];
    let wmax = max_abs(&f.w);
    for (psi, w) in f.psi.iter().zip(&f.w) {
        // the first and last columns coincide, so the period is nx - 1 cells
        let n = nx - 1;
        for j in 0..n {
            let d = (psi[(j + 1) % n] - psi[(j + n - 1) % n]) / (2.0 * dx);
            assert!((d - w[j]).abs() < 0.01 * wmax);
        }
    }
    assert!((f.wavelength - TAU / c.mode.a).abs() < 1e-15);
}

#[test]
fn streamfunction_vanishes_on_the_walls() {
    let c = travelling();
    let f = render_frame(&c.mode, 0.5, 32, 32).unwrap();
    let scale = max_abs(&f.psi);
    for row in [&f.psi[0], f.psi.last().unwrap()] {
        assert!(row.iter().all(|v| v.abs() < 1e-6 * scale));
    }
}

#[test]
fn pattern_travels_to_the_left() {
    let c = travelling();
    let nx = 257;
    let times = [0.0, 0.16, 0.32, 0.48];
    let frames = render_frames(&c.mode, &times, nx, 17).unwrap();
    let n = nx - 1;
    let mid = 8;
    let reference = &frames[0].psi[mid];
    let shifts: Vec<i64> = frames
        .iter()
        .map(|f| {
            let row = &f.psi[mid];
            (0..n as i64)
                .map(|s| s - n as i64 / 2)
                .max_by(|&s, &u| {
                    let corr = |k: i64| (0..n).map(|j| reference[j] * row[(j as i64 + k).rem_euclid(n as i64) as usize]).sum::<f64>();
                    corr(s).total_cmp(&corr(u))
                })
                .unwrap()
        })
        .collect();
    assert!(shifts.windows(2).all(|w| w[1] < w[0]), "{shifts:?}");
    // phase speed ω/a
    let dx = frames[0].x1[1];
    let speed = -(shifts[3] as f64) * dx / 0.48;
    assert!((speed - c.omega / c.mode.a).abs() < 2.0 * dx / 0.48);
}

#[test]
fn neutral_orbit_is_a_closed_ellipse() {
    let c = travelling();
    let times: Vec<f64> = (0..400).map(|i| i as f64 * 0.01).collect();
    let series = time_series(&c.mode, default_probe(&c.mode), &times).unwrap();
    let radii: Vec<f64> = series.iter().map(|p| p.temperature.hypot(p.rate / c.omega)).collect();
    let r0 = radii[0];
    assert!(r0 > 0.0);
    assert!(radii.iter().all(|r| (r - r0).abs() < 1e-8 * r0));
}

#[test]
fn damped_orbit_spirals_inwards() {
    let c = travelling();
    let s = StabilitySolver::new(&c.params, &c.basic).unwrap();
    let ra = 0.8 * c.mode.ra;
    let g = s.solve_growth_rate(c.mode.a, ra, &[Complex64::new(-0.1, c.omega)]).unwrap().gamma;
    assert!(g.re < 0.0 && g.im > 0.0, "{g}");
    let m = extract_eigenmode(&s, &ModeProblem::new(c.mode.a, ra, g)).unwrap();
    let period = TAU / g.im;
    let times: Vec<f64> = (0..3).map(|k| 0.1 + k as f64 * period).collect();
    let series = time_series(&m, default_probe(&m), &times).unwrap();
    // |A e^{γt}| recovered from Re and d/dt Re
    let radius = |p: &PhasePoint| p.temperature.hypot((p.rate - g.re * p.temperature) / g.im);
    for w in series.windows(2) {
        let ratio = radius(&w[1]) / radius(&w[0]);
        assert!((ratio - (g.re * period).exp()).abs() < 1e-9, "{ratio}");
    }
}

#[test]
fn temperature_series_oscillates_at_the_mode_frequency() {
    let c = travelling();
    let n = 1024;
    let dt = 0.01;
    let times: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
    let series = time_series(&c.mode, default_probe(&c.mode), &times).unwrap();
    let mut buf: Vec<rustfft::num_complex::Complex<f64>> =
        series.iter().map(|p| rustfft::num_complex::Complex::new(p.temperature, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let peak = (1..n / 2).max_by(|&i, &j| buf[i].norm().total_cmp(&buf[j].norm())).unwrap();
    let bin = 1.0 / (n as f64 * dt);
    assert!((peak as f64 * bin - c.omega / TAU).abs() <= bin);
}

#[test]
fn shooting_and_collocation_eigenvectors_agree() {
    let c = travelling();
    let m = &c.mode;
    let op = build_operator(m.a, m.ra, &c.params, &c.basic, 64).unwrap();
    let v = eigenvector(&op, m.gamma).unwrap();
    assert!(residual(&op, m.gamma, &v) < 1e-6 * op.a_mat.norm());
    let nodes = op.x.len();
    let (w_col, theta_col) = (&v[..nodes], &v[nodes..2 * nodes]);
    let kmax = (0..nodes).max_by(|&i, &j| w_col[i].norm().total_cmp(&w_col[j].norm())).unwrap();
    let scale = m.w_at(op.x[kmax]) / w_col[kmax];
    let theta_max = m.theta.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    let mut err: f64 = 0.0;
    for (k, &x) in op.x.iter().enumerate() {
        err = err.max((w_col[k] * scale - m.w_at(x)).norm());
        err = err.max((theta_col[k] * scale - m.theta_at(x)).norm() / theta_max);
    }
    assert!(err < 1e-3, "{err}");
}

#[test]
fn overstable_onset_is_a_single_cell_in_depth() {
    let p = Params { us: 15.0, ..Params::default() }.with_gc(0.65).unwrap();
    let b = solve_basic_state(&p, 2000).unwrap();
    let s = StabilitySolver::new(&p, &b).unwrap();
    let OscillatoryOutcome::Converged { ra, omega, .. } = s.solve_oscillatory(2.3, 86.0, 2.0).unwrap() else {
        panic!("no neutral oscillatory mode")
    };
    let m = extract_eigenmode(&s, &ModeProblem::oscillatory(2.3, ra, omega)).unwrap();
    assert_eq!(m.interior_sign_changes(1e-6), 0);
}

#[test]
fn no_growth_below_the_neutral_curve() {
    let b = solve_basic_state(&Params::default(), 2000).unwrap();
    let s = StabilitySolver::new(&Params::default(), &b).unwrap();
    let quiet = most_unstable_wavenumber(&s, 30.0, (0.5, 6.0), 8).unwrap();
    assert!(quiet.stable && quiet.gamma.re < 0.0);
    let active = most_unstable_wavenumber(&s, 70.0, (0.5, 6.0), 8).unwrap();
    assert!(!active.stable && active.gamma.re > 0.0);
    assert!((active.wavelength() - 2.0 * PI / active.a).abs() < 1e-15);
    assert!(most_unstable_wavenumber(&s, 70.0, (2.0, 1.0), 8).is_err());
}

#[test]
fn small_grids_and_outside_probes_are_rejected() {
    let m = &travelling().mode;
    assert!(render_frame(m, 0.0, 15, 32).is_err());
    assert!(time_series(m, (0.0, 1.5), &[0.0]).is_err());
}
