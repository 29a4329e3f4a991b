//! Physical-space reconstruction of normal modes.
//!
//! A mode `(ŵ, Θ, n̂)(x₃) exp(i a x₁ + γ t)` is rendered on a vertical
//! `(x₁, x₃)` slice covering one horizontal wavelength. The streamfunction
//! is `ψ = Re[ŵ/(ia) e^{i a x₁ + γ t}]`, so that `∂ψ/∂x₁ = w*`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::numerics::{geomspace, golden_min, hermite};
use crate::stability::{ModeProblem, StabilitySolver};

/// A normalized eigenfunction on the shooting grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigenmode {
    pub a: f64,
    pub ra: f64,
    pub gamma: Complex64,
    pub x: Vec<f64>,
    pub w: Vec<Complex64>,
    pub dw: Vec<Complex64>,
    pub d2w: Vec<Complex64>,
    pub theta: Vec<Complex64>,
    pub dtheta: Vec<Complex64>,
    /// `N(x₃) = ∫_{x₃}^1 n̂`.
    pub n_integrated: Vec<Complex64>,
    pub n_hat: Vec<Complex64>,
    pub dn_hat: Vec<Complex64>,
}

/// Real fields on a uniform grid; arrays are indexed `[i₃][i₁]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldFrame {
    pub t: f64,
    pub wavelength: f64,
    pub x1: Vec<f64>,
    pub x3: Vec<f64>,
    pub psi: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
    pub n: Vec<Vec<f64>>,
    pub temperature: Vec<Vec<f64>>,
}

/// Fastest-growing wavenumber at fixed `Ra`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MostUnstable {
    pub a: f64,
    pub gamma: Complex64,
    /// No wavenumber in the range grows.
    pub stable: bool,
}

impl MostUnstable {
    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub t: f64,
    pub temperature: f64,
    pub rate: f64,
}

/// Eigenfunction at a point where the dispersion function vanishes,
/// scaled so that `max |ŵ| = 1` with `ŵ` real and positive there.
pub fn extract_eigenmode(solver: &StabilitySolver, mp: &ModeProblem) -> Result<Eigenmode> {
    let sol = solver.null_solution(mp)?;
    let imax = sol
        .states
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.w().norm().total_cmp(&y.1.w().norm()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let scale = sol.states[imax].w().inv();
    let col = |k: usize, sign: f64| -> Vec<Complex64> { sol.states.iter().map(|s| s.0[k] * scale * sign).collect() };
    Ok(Eigenmode {
        a: mp.a,
        ra: mp.ra,
        gamma: mp.gamma,
        x: sol.x.clone(),
        w: col(0, 1.0),
        dw: col(1, 1.0),
        d2w: col(2, 1.0),
        theta: col(4, 1.0),
        dtheta: col(5, 1.0),
        n_integrated: col(6, 1.0),
        n_hat: col(7, -1.0),
        dn_hat: col(8, -1.0),
    })
}

impl Eigenmode {
    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.a
    }

    /// The partner mode at `conj γ`.
    pub fn conjugate(&self) -> Self {
        let c = |v: &Vec<Complex64>| v.iter().map(|z| z.conj()).collect();
        Self {
            a: self.a,
            ra: self.ra,
            gamma: self.gamma.conj(),
            x: self.x.clone(),
            w: c(&self.w),
            dw: c(&self.dw),
            d2w: c(&self.d2w),
            theta: c(&self.theta),
            dtheta: c(&self.dtheta),
            n_integrated: c(&self.n_integrated),
            n_hat: c(&self.n_hat),
            dn_hat: c(&self.dn_hat),
        }
    }

    fn locate(&self, x3: f64) -> (usize, f64, f64) {
        let last = self.x.len() - 1;
        let h = 1.0 / last as f64;
        let x3 = x3.clamp(0.0, 1.0);
        let i = ((x3 / h) as usize).min(last - 1);
        (i, (x3 - self.x[i]) / h, h)
    }

    fn interp(&self, y: &[Complex64], dy: &[Complex64], x3: f64) -> Complex64 {
        let (i, s, h) = self.locate(x3);
        Complex64::new(
            hermite(s, h, y[i].re, dy[i].re, y[i + 1].re, dy[i + 1].re),
            hermite(s, h, y[i].im, dy[i].im, y[i + 1].im, dy[i + 1].im),
        )
    }

    pub fn w_at(&self, x3: f64) -> Complex64 {
        self.interp(&self.w, &self.dw, x3)
    }

    pub fn theta_at(&self, x3: f64) -> Complex64 {
        self.interp(&self.theta, &self.dtheta, x3)
    }

    pub fn n_hat_at(&self, x3: f64) -> Complex64 {
        self.interp(&self.n_hat, &self.dn_hat, x3)
    }

    /// Largest absolute residual of the seven Dirichlet-type boundary
    /// conditions `ŵ(0), ŵ′(0), Θ(0), ŵ(1), ŵ″(1), Θ(1), N(1)`.
    pub fn boundary_residual(&self) -> f64 {
        let l = self.x.len() - 1;
        [self.w[0], self.dw[0], self.theta[0], self.w[l], self.d2w[l], self.theta[l], self.n_integrated[l]]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Sign changes of `Re ŵ` strictly inside the layer, ignoring values
    /// below `tol` of the maximum.
    pub fn interior_sign_changes(&self, tol: f64) -> usize {
        let vals: Vec<f64> = self.w.iter().map(|z| z.re).filter(|v| v.abs() > tol).collect();
        vals.windows(2).filter(|p| p[0].signum() != p[1].signum()).count()
    }
}

/// Physical fields at time `t` on an `nx × nz` grid covering
/// `[0, λ] × [0, 1]`, both ends included.
pub fn render_frame(m: &Eigenmode, t: f64, nx: usize, nz: usize) -> Result<FieldFrame> {
    if nx < 16 || nz < 16 {
        return Err(invalid("grid", format!("need at least 16 points per direction, got {nx} x {nz}")));
    }
    let lambda = m.wavelength();
    let x1: Vec<f64> = (0..nx).map(|i| lambda * i as f64 / (nx - 1) as f64).collect();
    let x3: Vec<f64> = (0..nz).map(|k| k as f64 / (nz - 1) as f64).collect();
    let time = (m.gamma * t).exp();
    let phase: Vec<Complex64> = x1.iter().map(|&x| Complex64::new(0.0, m.a * x).exp() * time).collect();
    let ia = Complex64::new(0.0, m.a);
    let mut psi = Vec::with_capacity(nz);
    let mut w = Vec::with_capacity(nz);
    let mut n = Vec::with_capacity(nz);
    let mut temperature = Vec::with_capacity(nz);
    for &z in &x3 {
        let (wz, nzv, tz) = (m.w_at(z), m.n_hat_at(z), m.theta_at(z));
        psi.push(phase.iter().map(|e| (wz / ia * e).re).collect());
        w.push(phase.iter().map(|e| (wz * e).re).collect());
        n.push(phase.iter().map(|e| (nzv * e).re).collect());
        temperature.push(phase.iter().map(|e| (tz * e).re).collect());
    }
    Ok(FieldFrame {
        t,
        wavelength: lambda,
        x1,
        x3,
        psi,
        w,
        n,
        temperature,
    })
}

/// Frames at several times, rendered in parallel.
pub fn render_frames(m: &Eigenmode, times: &[f64], nx: usize, nz: usize) -> Result<Vec<FieldFrame>> {
    times.par_iter().map(|&t| render_frame(m, t, nx, nz)).collect()
}

/// `(t, T′, dT′/dt)` at a probe point.
pub fn time_series(m: &Eigenmode, probe: (f64, f64), times: &[f64]) -> Result<Vec<PhasePoint>> {
    let (x1, x3) = probe;
    if !(0.0..=1.0).contains(&x3) || !x1.is_finite() {
        return Err(invalid("probe", format!("({x1}, {x3}) is outside the layer")));
    }
    let amp = m.theta_at(x3) * Complex64::new(0.0, m.a * x1).exp();
    Ok(times
        .iter()
        .map(|&t| {
            let z = amp * (m.gamma * t).exp();
            PhasePoint {
                t,
                temperature: z.re,
                rate: (m.gamma * z).re,
            }
        })
        .collect())
}

/// Default probe: a quarter wavelength in, at mid-depth.
pub fn default_probe(m: &Eigenmode) -> (f64, f64) {
    (0.25 * m.wavelength(), 0.5)
}

/// Maximizes the leading growth rate over `a` at fixed `Ra`: a coarse
/// log-spaced scan followed by golden-section refinement.
pub fn most_unstable_wavenumber(solver: &StabilitySolver, ra: f64, a_range: (f64, f64), scan_points: usize) -> Result<MostUnstable> {
    let (lo, hi) = a_range;
    if !(lo > 0.0 && hi > lo) || scan_points < 3 {
        return Err(invalid("a_range", "need 0 < a_lo < a_hi and at least 3 scan points"));
    }
    let grid = geomspace(lo, hi, scan_points);
    let rates: Vec<Option<Complex64>> = grid.iter().map(|&a| solver.leading_growth_rate(a, ra).ok()).collect();
    let (ibest, gbest) = rates
        .iter()
        .enumerate()
        .filter_map(|(i, g)| g.map(|g| (i, g)))
        .max_by(|x, y| x.1.re.total_cmp(&y.1.re))
        .ok_or(crate::error::Error::SeedsDiverged { seeds: scan_points })?;
    let left = grid[ibest.saturating_sub(1)];
    let right = grid[(ibest + 1).min(grid.len() - 1)];
    let f = |a: f64| Ok(solver.leading_growth_rate(a, ra).map_or(f64::INFINITY, |g| -g.re));
    let (a_star, neg) = golden_min(f, left, right, 1e-6 * right)?;
    let (a, gamma) = if -neg >= gbest.re {
        (a_star, solver.leading_growth_rate(a_star, ra)?)
    } else {
        (grid[ibest], gbest)
    };
    Ok(MostUnstable {
        a,
        gamma,
        stable: gamma.re < 0.0,
    })
}
