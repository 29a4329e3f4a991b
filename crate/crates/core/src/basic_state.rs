//! Motionless equilibrium of the suspension under collimated light.
//!
//! The concentration obeys `dn/dx₃ = U_s T(G) n` with the intensity
//! `G = I₀ exp(ħ τ)`, `τ(x₃) = ∫₁^{x₃} n ds`, and the mean concentration is
//! one. Both are integrated downward from the lit surface with classical
//! RK4; the unknown surface concentration is found by shooting on the
//! constraint `τ(0) = −1`.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::numerics::{hermite, simpson};
use crate::params::Params;
use crate::taxis::TaxisResponse;

pub const DEFAULT_GRID: usize = 2000;
pub const MIN_GRID: usize = 200;

const SHOOT_BRACKET: (f64, f64) = (1e-6, 1e3);
const SHOOT_MAX_ITER: usize = 100;
const SHOOT_TOL: f64 = 1e-14;

type SharedTaxis = Arc<dyn TaxisResponse + Send + Sync>;

/// Coefficients of the perturbation equations at one height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profiles {
    pub n: f64,
    pub dn: f64,
    /// `Λ = n_b G_b dT/dG`.
    pub lambda: f64,
    pub dlambda: f64,
    /// `T(G_b)`.
    pub taxis: f64,
    pub g: f64,
}

/// Location and height of the concentration maximum.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Sublayer {
    pub x3: f64,
    pub n_max: f64,
}

#[derive(Clone)]
pub struct BasicState {
    /// Uniform grid on `[0, 1]`.
    pub x: Vec<f64>,
    pub n: Vec<f64>,
    pub tau: Vec<f64>,
    pub g: Vec<f64>,
    pub taxis: Vec<f64>,
    pub temperature: Vec<f64>,
    dn: Vec<f64>,
    h: f64,
    us: f64,
    optical_depth: f64,
    incident: f64,
    response: SharedTaxis,
}

impl fmt::Debug for BasicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BasicState")
            .field("nodes", &self.x.len())
            .field("us", &self.us)
            .field("optical_depth", &self.optical_depth)
            .field("surface_concentration", &self.n.last())
            .finish()
    }
}

pub fn solve_basic_state(p: &Params, grid: usize) -> Result<BasicState> {
    solve_basic_state_with(p, Arc::new(p.taxis()), grid)
}

/// Same as [`solve_basic_state`] with a caller-supplied taxis response.
pub fn solve_basic_state_with(p: &Params, response: SharedTaxis, grid: usize) -> Result<BasicState> {
    p.validate()?;
    if grid < MIN_GRID || !grid.is_multiple_of(2) {
        return Err(invalid("grid", format!("need an even grid of at least {MIN_GRID} intervals, got {grid}")));
    }
    let shooter = Shooter {
        us: p.us,
        optical_depth: p.optical_depth,
        incident: p.incident_intensity,
        response: response.as_ref(),
        steps: grid,
    };
    let surface = shooter.solve_surface_concentration()?;
    let (tau_down, n_down) = shooter.integrate(surface, true);

    let h = 1.0 / grid as f64;
    let x: Vec<f64> = (0..=grid).map(|i| i as f64 * h).collect();
    let tau: Vec<f64> = tau_down.into_iter().rev().collect();
    let n: Vec<f64> = n_down.into_iter().rev().collect();
    let g: Vec<f64> = tau.iter().map(|t| p.incident_intensity * (p.optical_depth * t).exp()).collect();
    let taxis: Vec<f64> = g.iter().map(|&gi| response.value(gi)).collect();
    let dn = n.iter().zip(&taxis).map(|(ni, ti)| p.us * ti * ni).collect();
    let temperature = x.iter().map(|xi| xi - 1.0).collect();
    Ok(BasicState {
        x,
        n,
        tau,
        g,
        taxis,
        temperature,
        dn,
        h,
        us: p.us,
        optical_depth: p.optical_depth,
        incident: p.incident_intensity,
        response,
    })
}

struct Shooter<'a> {
    us: f64,
    optical_depth: f64,
    incident: f64,
    response: &'a (dyn TaxisResponse + Send + Sync),
    steps: usize,
}

impl Shooter<'_> {
    #[inline]
    fn rhs(&self, tau: f64, n: f64) -> (f64, f64) {
        let g = self.incident * (self.optical_depth * tau).exp();
        (n, self.us * self.response.value(g) * n)
    }

    /// RK4 from x₃ = 1 down to 0. Returns `(τ, n)` ordered top to bottom;
    /// only the final values are kept unless `store` is set.
    fn integrate(&self, surface: f64, store: bool) -> (Vec<f64>, Vec<f64>) {
        let h = -1.0 / self.steps as f64;
        let (mut tau, mut n) = (0.0, surface);
        let cap = if store { self.steps + 1 } else { 1 };
        let mut taus = Vec::with_capacity(cap);
        let mut ns = Vec::with_capacity(cap);
        if store {
            taus.push(tau);
            ns.push(n);
        }
        for _ in 0..self.steps {
            let k1 = self.rhs(tau, n);
            let k2 = self.rhs(tau + 0.5 * h * k1.0, n + 0.5 * h * k1.1);
            let k3 = self.rhs(tau + 0.5 * h * k2.0, n + 0.5 * h * k2.1);
            let k4 = self.rhs(tau + h * k3.0, n + h * k3.1);
            tau += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            n += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            if store {
                taus.push(tau);
                ns.push(n);
            }
        }
        if !store {
            taus.push(tau);
            ns.push(n);
        }
        (taus, ns)
    }

    fn residual(&self, surface: f64) -> f64 {
        let (tau, _) = self.integrate(surface, false);
        tau[0] + 1.0
    }

    /// Illinois-modified regula falsi in `ln n(1)`.
    fn solve_surface_concentration(&self) -> Result<f64> {
        let (lo, hi) = SHOOT_BRACKET;
        let (mut a, mut b) = (lo.ln(), hi.ln());
        let mut fa = self.residual(lo);
        let mut fb = self.residual(hi);
        if fa.signum() == fb.signum() {
            return Err(Error::BracketFailure { lo, hi });
        }
        let mut side = 0i8;
        for _ in 0..SHOOT_MAX_ITER {
            let c = (a * fb - b * fa) / (fb - fa);
            let fc = self.residual(c.exp());
            if fc.abs() < SHOOT_TOL || (b - a).abs() < 1e-15 {
                return Ok(c.exp());
            }
            if fc.signum() == fb.signum() {
                b = c;
                fb = fc;
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            } else {
                a = c;
                fa = fc;
                if side == 1 {
                    fb *= 0.5;
                }
                side = 1;
            }
        }
        Err(Error::NonConvergence {
            what: "basic-state shooting",
            iterations: SHOOT_MAX_ITER,
        })
    }
}

impl BasicState {
    pub fn grid_intervals(&self) -> usize {
        self.x.len() - 1
    }

    pub fn surface_concentration(&self) -> f64 {
        *self.n.last().expect("non-empty grid")
    }

    /// Concentration maximum. Parabolic refinement when the maximum is
    /// interior; a flat profile reports the top surface.
    pub fn sublayer(&self) -> Sublayer {
        let (mut imax, mut nmax) = (0, f64::NEG_INFINITY);
        let mut nmin = f64::INFINITY;
        for (i, &v) in self.n.iter().enumerate() {
            if v >= nmax {
                imax = i;
                nmax = v;
            }
            nmin = nmin.min(v);
        }
        let last = self.n.len() - 1;
        if nmax - nmin <= 1e-12 * nmax {
            return Sublayer { x3: 1.0, n_max: nmax };
        }
        if imax == 0 || imax == last {
            return Sublayer { x3: self.x[imax], n_max: nmax };
        }
        let (y0, y1, y2) = (self.n[imax - 1], self.n[imax], self.n[imax + 1]);
        let denom = y0 - 2.0 * y1 + y2;
        if denom >= 0.0 {
            return Sublayer { x3: self.x[imax], n_max: nmax };
        }
        let shift = 0.5 * (y0 - y2) / denom;
        Sublayer {
            x3: self.x[imax] + shift * self.h,
            n_max: y1 - 0.25 * (y0 - y2) * shift,
        }
    }

    fn locate(&self, x3: f64) -> Result<(usize, f64)> {
        if !(0.0..=1.0).contains(&x3) {
            return Err(Error::OutOfDomain(x3));
        }
        let last = self.x.len() - 2;
        let i = ((x3 / self.h) as usize).min(last);
        Ok((i, (x3 - self.x[i]) / self.h))
    }

    pub fn concentration_at(&self, x3: f64) -> Result<f64> {
        let (i, s) = self.locate(x3)?;
        Ok(hermite(s, self.h, self.n[i], self.dn[i], self.n[i + 1], self.dn[i + 1]))
    }

    pub fn intensity_at(&self, x3: f64) -> Result<f64> {
        let (i, s) = self.locate(x3)?;
        let tau = hermite(s, self.h, self.tau[i], self.n[i], self.tau[i + 1], self.n[i + 1]);
        Ok(self.incident * (self.optical_depth * tau).exp())
    }

    /// Vertical component of the radiative heat flux, `−G_b`.
    pub fn radiative_flux_at(&self, x3: f64) -> Result<f64> {
        Ok(-self.intensity_at(x3)?)
    }

    /// Coefficient bundle consumed by the perturbation equations. Derivatives
    /// come from the chain rule with `dn/dx₃ = U_s T n`, `dG/dx₃ = ħ n G`.
    pub fn profiles_at(&self, x3: f64) -> Result<Profiles> {
        let n = self.concentration_at(x3)?;
        let g = self.intensity_at(x3)?;
        let taxis = self.response.value(g);
        let dt = self.response.derivative(g);
        let d2t = self.response.second_derivative(g);
        let dn = self.us * taxis * n;
        let dg = self.optical_depth * n * g;
        Ok(Profiles {
            n,
            dn,
            lambda: n * g * dt,
            dlambda: dn * g * dt + n * dg * dt + n * g * d2t * dg,
            taxis,
            g,
        })
    }

    /// `|∫₀¹ n_b dx₃ − 1|` by composite Simpson on the solution grid.
    pub fn normalization_error(&self) -> f64 {
        (simpson(&self.n, self.h) - 1.0).abs()
    }

    /// Largest `|dn/dx₃ − U_s T(G_b) n_b|` over the grid, with `dn/dx₃` from
    /// fourth-order finite differences of the stored profile.
    pub fn ode_residual(&self) -> f64 {
        let n = &self.n;
        let last = n.len() - 1;
        let h = self.h;
        (0..=last)
            .map(|i| {
                let d = if i >= 2 && i + 2 <= last {
                    (n[i - 2] - 8.0 * n[i - 1] + 8.0 * n[i + 1] - n[i + 2]) / (12.0 * h)
                } else if i < 2 {
                    (-25.0 * n[i] + 48.0 * n[i + 1] - 36.0 * n[i + 2] + 16.0 * n[i + 3] - 3.0 * n[i + 4]) / (12.0 * h)
                } else {
                    (25.0 * n[i] - 48.0 * n[i - 1] + 36.0 * n[i - 2] - 16.0 * n[i - 3] + 3.0 * n[i - 4]) / (12.0 * h)
                };
                (d - self.us * self.taxis[i] * n[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(us: f64, gc: f64) -> Params {
        Params {
            us,
            optical_depth: 0.5,
            ..Params::default()
        }
        .with_gc(gc)
        .unwrap()
    }

    #[test]
    fn no_swimming_gives_uniform_concentration() {
        let p = params(0.0, 0.68);
        let b = solve_basic_state(&p, 400).unwrap();
        for (i, &x) in b.x.iter().enumerate() {
            assert!((b.n[i] - 1.0).abs() < 1e-12);
            let g = 0.8 * (0.5 * (x - 1.0)).exp();
            assert!((b.g[i] - g).abs() < 1e-12);
        }
        let s = b.sublayer();
        assert_eq!(s.x3, 1.0);
        assert!((s.n_max - 1.0).abs() < 1e-12);
        let pr = b.profiles_at(0.3).unwrap();
        assert_eq!(pr.dn, 0.0);
        let t = p.taxis();
        assert!((pr.lambda - pr.g * t.derivative(pr.g)).abs() < 1e-12);
    }

    #[test]
    fn boundary_values_and_monotone_intensity() {
        let b = solve_basic_state(&params(15.0, 0.65), DEFAULT_GRID).unwrap();
        assert_eq!(b.tau[b.tau.len() - 1], 0.0);
        assert!((b.tau[0] + 1.0).abs() < 1e-12);
        assert!((b.g.last().unwrap() - 0.8).abs() < 1e-15);
        assert!(b.g.windows(2).all(|w| w[1] > w[0]));
        assert!(b.n.iter().all(|&v| v > 0.0));
        assert_eq!(b.temperature[0], -1.0);
        assert_eq!(*b.temperature.last().unwrap(), 0.0);
        assert!(b.normalization_error() < 1e-8);
    }

    #[test]
    fn ode_residual_is_small() {
        for gc in [0.8, 0.68, 0.63] {
            let b = solve_basic_state(&params(15.0, gc), DEFAULT_GRID).unwrap();
            assert!(b.ode_residual() < 1e-6 * b.sublayer().n_max, "gc={gc}: {}", b.ode_residual());
        }
    }

    #[test]
    fn taxis_vanishes_where_intensity_is_critical() {
        let p = params(15.0, 0.65);
        let b = solve_basic_state(&p, DEFAULT_GRID).unwrap();
        let s = b.sublayer();
        let pr = b.profiles_at(s.x3).unwrap();
        assert!((pr.g - p.gc).abs() < 1e-5);
        assert!(pr.taxis.abs() < 1e-4);
    }

    #[test]
    fn profile_spot_value_survives_grid_refinement() {
        let p = params(15.0, 0.68);
        let coarse = solve_basic_state(&p, DEFAULT_GRID).unwrap().profiles_at(0.5).unwrap();
        let fine = solve_basic_state(&p, 10 * DEFAULT_GRID).unwrap().profiles_at(0.5).unwrap();
        for (c, f) in [(coarse.n, fine.n), (coarse.dn, fine.dn), (coarse.lambda, fine.lambda), (coarse.dlambda, fine.dlambda)] {
            assert!((c - f).abs() <= 1e-6 * f.abs().max(1e-3), "{c} vs {f}");
        }
    }

    #[test]
    fn lambda_derivative_matches_finite_difference() {
        let b = solve_basic_state(&params(15.0, 0.65), DEFAULT_GRID).unwrap();
        let h = 1e-5;
        for x in [0.1, 0.45, 0.76, 0.9] {
            let fd = (b.profiles_at(x + h).unwrap().lambda - b.profiles_at(x - h).unwrap().lambda) / (2.0 * h);
            let an = b.profiles_at(x).unwrap().dlambda;
            assert!((fd - an).abs() < 1e-5 * an.abs().max(1.0), "x={x}: {fd} vs {an}");
        }
    }

    #[test]
    fn out_of_domain_query() {
        let b = solve_basic_state(&params(10.0, 0.68), MIN_GRID).unwrap();
        assert!(matches!(b.profiles_at(1.2), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn rejects_small_or_odd_grids() {
        assert!(solve_basic_state(&params(10.0, 0.68), 100).is_err());
        assert!(solve_basic_state(&params(10.0, 0.68), 201).is_err());
    }

    #[test]
    fn sublayer_descends_as_gc_decreases() {
        let xs: Vec<f64> = [0.8, 0.68, 0.65, 0.63]
            .iter()
            .map(|&gc| solve_basic_state(&params(15.0, gc), DEFAULT_GRID).unwrap().sublayer().x3)
            .collect();
        assert!(xs.windows(2).all(|w| w[1] < w[0]), "{xs:?}");
    }

    #[test]
    fn grid_doubling_barely_moves_the_maximum() {
        let p = params(15.0, 0.68);
        let a = solve_basic_state(&p, 1000).unwrap().sublayer().n_max;
        let b = solve_basic_state(&p, 2000).unwrap().sublayer().n_max;
        assert!(((a - b) / b).abs() < 5e-4);
    }

    #[test]
    fn shooting_residual_is_monotone() {
        let p = params(15.0, 0.65);
        let t = p.taxis();
        let s = Shooter {
            us: p.us,
            optical_depth: p.optical_depth,
            incident: p.incident_intensity,
            response: &t,
            steps: 400,
        };
        let mut prev = s.residual(1e-6);
        for k in 1..=60 {
            let r = s.residual(1e-6 * 10f64.powf(k as f64 * 0.15));
            assert!(r < prev);
            prev = r;
        }
    }
}
