//! Normal-mode stability problem.
//!
//! With perturbations `∝ exp(i a x₁ + γ t)` the linearized equations reduce
//! to a ninth-order linear ODE in `x₃` for the state
//! `(ŵ, ŵ′, ŵ″, ŵ‴, Θ, Θ′, N, N′, N″)`:
//!
//! ```text
//! ŵ⁗ = (2a² + γ/Pr) ŵ″ − a²(a² + γ/Pr) ŵ + a² Ra N′ + a² R_T Θ
//! Θ″ = (γ + a²) Θ − ŵ
//! N‴ = U_s T_b N″ + (γ Le + a² + 2ħ U_s Λ) N′ + ħ U_s Λ′ N − Le n_b′ ŵ
//! ```
//!
//! where `N(x₃) = ∫_{x₃}^1 n̂` and `Λ = n_b G_b dT/dG`. Four conditions hold
//! at the rigid bottom and five at the rigid top. Five independent solutions
//! satisfying the bottom conditions are integrated upward with RK4 and
//! periodically re-orthonormalized; the determinant of the top conditions
//! applied to them is the dispersion function whose zeros are eigenvalues.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::basic_state::{BasicState, Profiles};
use crate::error::{invalid, Error, Result};
use crate::numerics::brent;
use crate::params::Params;

pub const DEFAULT_STEPS: usize = 2000;
pub const DEFAULT_ORTHO_INTERVAL: usize = 50;
/// Upper end of the Rayleigh-number search.
pub const RA_MAX: f64 = 1e6;

const DIM: usize = 9;
const MAX_BASIS: usize = 5;
const RA_SCAN_START: f64 = 1.0;
const RA_SCAN_RATIO: f64 = 1.08;
const RA_REL_TOL: f64 = 1e-11;
const NEWTON_MAX_ITER: usize = 50;
const RANK_TOL: f64 = 1e-6;
const SEED_NCHEB: usize = 48;
const SEED_COUNT: usize = 3;

/// Integration controls for the shooting solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Discretization {
    /// RK4 steps across the layer.
    pub steps: usize,
    /// Re-orthonormalize the solution basis every this many steps.
    pub ortho_interval: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            steps: DEFAULT_STEPS,
            ortho_interval: DEFAULT_ORTHO_INTERVAL,
        }
    }
}

/// Whether the temperature perturbation is carried in the system.
/// `Omitted` drops `Θ` entirely, leaving the seventh-order purely
/// phototactic problem; it is only meaningful when `R_T = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThermalBlock {
    #[default]
    Coupled,
    Omitted,
}

/// One point in `(a, Ra, γ)` at which the dispersion function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeProblem {
    pub a: f64,
    pub ra: f64,
    pub gamma: Complex64,
}

impl ModeProblem {
    pub fn new(a: f64, ra: f64, gamma: Complex64) -> Self {
        Self { a, ra, gamma }
    }

    pub fn stationary(a: f64, ra: f64) -> Self {
        Self::new(a, ra, Complex64::new(0.0, 0.0))
    }

    pub fn oscillatory(a: f64, ra: f64, omega: f64) -> Self {
        Self::new(a, ra, Complex64::new(0.0, omega))
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(invalid("a", format!("wavenumber must be positive, got {}", self.a)));
        }
        if !self.ra.is_finite() || !self.gamma.re.is_finite() || !self.gamma.im.is_finite() {
            return Err(invalid("mode", "non-finite Ra or growth rate"));
        }
        Ok(())
    }
}

/// `(ŵ, ŵ′, ŵ″, ŵ‴, Θ, Θ′, N, N′, N″)` at one height.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StateVector(pub [Complex64; DIM]);

impl StateVector {
    pub fn w(&self) -> Complex64 {
        self.0[0]
    }
    pub fn dw(&self) -> Complex64 {
        self.0[1]
    }
    pub fn d2w(&self) -> Complex64 {
        self.0[2]
    }
    pub fn theta(&self) -> Complex64 {
        self.0[4]
    }
    pub fn n_integrated(&self) -> Complex64 {
        self.0[6]
    }
    /// Concentration perturbation `n̂ = −dN/dx₃`.
    pub fn n_hat(&self) -> Complex64 {
        -self.0[7]
    }
}

/// Value of the dispersion function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionValue {
    /// `mantissa · exp(log_scale)`.
    pub value: Complex64,
    /// Determinant of the boundary matrix built from the orthonormalized basis.
    pub mantissa: Complex64,
    /// Sum of the logarithms of the Gram–Schmidt normalization factors.
    pub log_scale: f64,
    /// Reciprocal condition number `σ_min / σ_max` of the boundary matrix.
    pub rcond: f64,
}

/// Result of the oscillatory neutral solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OscillatoryOutcome {
    Converged { ra: f64, omega: f64, iterations: usize },
    /// The frequency collapsed to zero: the iteration fell onto the
    /// stationary branch at this Rayleigh number.
    Merged { ra: f64 },
}

/// Roots of the dispersion function in `γ` at fixed `(a, Ra)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRate {
    /// Root with the largest real part.
    pub gamma: Complex64,
    /// All distinct converged roots, sorted by decreasing real part.
    pub roots: Vec<Complex64>,
}

/// A nontrivial solution of the boundary-value problem sampled on the
/// integration grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSolution {
    pub x: Vec<f64>,
    pub states: Vec<StateVector>,
    pub rcond: f64,
}

// ---------------------------------------------------------------------------
// scalar abstraction so that real growth rates run in real arithmetic

pub(crate) trait Scalar:
    Copy
    + Default
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn real(x: f64) -> Self;
    fn from_complex(z: Complex64) -> Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    fn real(x: f64) -> Self {
        x
    }
    fn from_complex(z: Complex64) -> Self {
        z.re
    }
    fn conj(self) -> Self {
        self
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    fn real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_complex(z: Complex64) -> Self {
        z
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// Real coefficients of the cell equation at one height.
#[derive(Debug, Clone, Copy)]
struct Coef {
    /// `U_s T_b`
    tb: f64,
    /// `2ħ U_s Λ`
    lam: f64,
    /// `ħ U_s Λ′`
    dlam: f64,
    /// `Le n_b′`
    dn: f64,
}

/// Constant (in `x₃`) coefficients for one mode problem.
#[derive(Clone, Copy)]
struct Consts<S> {
    w2: S,
    w0: S,
    ra_a2: f64,
    rt_a2: f64,
    theta: S,
    cell: S,
    thermal: bool,
}

type Basis<S> = [[S; DIM]; MAX_BASIS];

struct Recorder {
    states: Vec<[[Complex64; DIM]; MAX_BASIS]>,
    /// `(node index, R factor)` for every orthonormalization.
    factors: Vec<(usize, DMatrix<Complex64>)>,
}

pub struct StabilitySolver {
    params: Params,
    basic: BasicState,
    disc: Discretization,
    thermal: ThermalBlock,
    /// Coefficients at every half step, `x₃ = k h / 2`.
    coef: Vec<Coef>,
    bottom: Profiles,
    top: Profiles,
}

impl std::fmt::Debug for StabilitySolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StabilitySolver")
            .field("params", &self.params)
            .field("disc", &self.disc)
            .field("thermal", &self.thermal)
            .finish()
    }
}

impl StabilitySolver {
    pub fn new(params: &Params, basic: &BasicState) -> Result<Self> {
        Self::with_discretization(params, basic, Discretization::default())
    }

    pub fn with_discretization(params: &Params, basic: &BasicState, disc: Discretization) -> Result<Self> {
        params.validate()?;
        if disc.steps < 2 || disc.ortho_interval == 0 {
            return Err(invalid("discretization", "need at least 2 steps and a positive orthonormalization interval"));
        }
        let p = params;
        let nodes = 2 * disc.steps;
        let coef = (0..=nodes)
            .map(|k| {
                let pr = basic.profiles_at(k as f64 / nodes as f64)?;
                Ok(Coef {
                    tb: p.us * pr.taxis,
                    lam: 2.0 * p.optical_depth * p.us * pr.lambda,
                    dlam: p.optical_depth * p.us * pr.dlambda,
                    dn: p.le * pr.dn,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: *p,
            basic: basic.clone(),
            disc,
            thermal: ThermalBlock::Coupled,
            coef,
            bottom: basic.profiles_at(0.0)?,
            top: basic.profiles_at(1.0)?,
        })
    }

    pub fn with_thermal_block(mut self, thermal: ThermalBlock) -> Self {
        self.thermal = thermal;
        self
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn basic_state(&self) -> &BasicState {
        &self.basic
    }

    pub fn discretization(&self) -> Discretization {
        self.disc
    }

    fn basis_size(&self) -> usize {
        match self.thermal {
            ThermalBlock::Coupled => 5,
            ThermalBlock::Omitted => 4,
        }
    }

    fn consts<S: Scalar>(&self, mp: &ModeProblem) -> Consts<S> {
        let p = &self.params;
        let a2 = mp.a * mp.a;
        let g = S::from_complex(mp.gamma);
        let gp = g * (1.0 / p.pr);
        Consts {
            w2: S::real(2.0 * a2) + gp,
            w0: (S::real(a2) + gp) * a2,
            ra_a2: a2 * mp.ra,
            rt_a2: a2 * p.rt,
            theta: g + S::real(a2),
            cell: g * p.le + S::real(a2),
            thermal: self.thermal == ThermalBlock::Coupled,
        }
    }

    #[inline]
    fn deriv<S: Scalar>(k: &Consts<S>, c: &Coef, y: &[S; DIM]) -> [S; DIM] {
        let mut w4 = k.w2 * y[2] - k.w0 * y[0] + y[7] * k.ra_a2;
        let (dt, d2t) = if k.thermal {
            w4 += y[4] * k.rt_a2;
            (y[5], k.theta * y[4] - y[0])
        } else {
            (S::default(), S::default())
        };
        let n3 = y[8] * c.tb + (k.cell + S::real(c.lam)) * y[7] + y[6] * c.dlam - y[0] * c.dn;
        [y[1], y[2], y[3], w4, dt, d2t, y[7], y[8], n3]
    }

    /// Derivative of the state vector at `x₃`, with coefficients taken
    /// directly from the basic state.
    pub fn rhs(&self, mp: &ModeProblem, x3: f64, s: &StateVector) -> Result<StateVector> {
        mp.validate()?;
        let pr = self.basic.profiles_at(x3)?;
        let p = &self.params;
        let c = Coef {
            tb: p.us * pr.taxis,
            lam: 2.0 * p.optical_depth * p.us * pr.lambda,
            dlam: p.optical_depth * p.us * pr.dlambda,
            dn: p.le * pr.dn,
        };
        Ok(StateVector(Self::deriv(&self.consts::<Complex64>(mp), &c, &s.0)))
    }

    fn initial_basis<S: Scalar>(&self) -> Basis<S> {
        let p = &self.params;
        let b = &self.bottom;
        let mut e: Basis<S> = [[S::default(); DIM]; MAX_BASIS];
        let mut j = 0;
        e[j][2] = S::real(1.0);
        j += 1;
        e[j][3] = S::real(1.0);
        j += 1;
        if self.thermal == ThermalBlock::Coupled {
            e[j][5] = S::real(1.0);
            j += 1;
        }
        e[j][6] = S::real(1.0);
        e[j][8] = S::real(p.optical_depth * p.us * b.lambda);
        j += 1;
        e[j][7] = S::real(1.0);
        e[j][8] = S::real(p.us * b.taxis);
        e
    }

    /// Top boundary conditions applied to a state, one entry per condition.
    fn top_conditions<S: Scalar>(&self, y: &[S; DIM]) -> Vec<S> {
        let flux = y[7] * (self.params.us * self.top.taxis) - y[8];
        match self.thermal {
            ThermalBlock::Coupled => vec![y[0], y[2], y[4], y[6], flux],
            ThermalBlock::Omitted => vec![y[0], y[2], y[6], flux],
        }
    }

    /// Modified Gram–Schmidt on the first `nb` vectors. Returns `Σ ln r_jj`
    /// and, when requested, the full upper-triangular factor.
    fn orthonormalize<S: Scalar>(basis: &mut Basis<S>, nb: usize, want_r: bool, x3: f64) -> Result<(f64, Option<DMatrix<Complex64>>)> {
        let mut log_sum = 0.0;
        let mut r = want_r.then(|| DMatrix::<Complex64>::zeros(nb, nb));
        for j in 0..nb {
            for i in 0..j {
                let mut dot = S::default();
                for k in 0..DIM {
                    dot += basis[i][k].conj() * basis[j][k];
                }
                let qi = basis[i];
                for k in 0..DIM {
                    basis[j][k] -= dot * qi[k];
                }
                if let Some(r) = r.as_mut() {
                    r[(i, j)] = dot.to_complex();
                }
            }
            let norm = basis[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::IntegrationOverflow { x3 });
            }
            let inv = 1.0 / norm;
            for k in 0..DIM {
                basis[j][k] = basis[j][k] * inv;
            }
            if let Some(r) = r.as_mut() {
                r[(j, j)] = Complex64::new(norm, 0.0);
            }
            log_sum += norm.ln();
        }
        Ok((log_sum, r))
    }

    /// Integrates the bottom basis to the top. Returns the final basis and
    /// the accumulated log normalization.
    fn shoot<S: Scalar>(&self, mp: &ModeProblem, mut rec: Option<&mut Recorder>) -> Result<(Basis<S>, f64)> {
        let k = self.consts::<S>(mp);
        let nb = self.basis_size();
        let steps = self.disc.steps;
        let h = 1.0 / steps as f64;
        let mut y = self.initial_basis::<S>();
        let (mut log_scale, r0) = Self::orthonormalize(&mut y, nb, rec.is_some(), 0.0)?;
        if let Some(rec) = rec.as_deref_mut() {
            rec.factors.push((0, r0.expect("requested")));
            rec.states.push(to_complex_basis(&y));
        }
        for i in 0..steps {
            let (c0, c1, c2) = (&self.coef[2 * i], &self.coef[2 * i + 1], &self.coef[2 * i + 2]);
            for v in y.iter_mut().take(nb) {
                let k1 = Self::deriv(&k, c0, v);
                let k2 = Self::deriv(&k, c1, &axpy(v, &k1, 0.5 * h));
                let k3 = Self::deriv(&k, c1, &axpy(v, &k2, 0.5 * h));
                let k4 = Self::deriv(&k, c2, &axpy(v, &k3, h));
                for d in 0..DIM {
                    v[d] += (k1[d] + (k2[d] + k3[d]) * 2.0 + k4[d]) * (h / 6.0);
                }
            }
            let node = i + 1;
            if node % self.disc.ortho_interval == 0 && node < steps {
                let (ls, r) = Self::orthonormalize(&mut y, nb, rec.is_some(), node as f64 * h)?;
                log_scale += ls;
                if let Some(rec) = rec.as_deref_mut() {
                    rec.factors.push((node, r.expect("requested")));
                }
            }
            if let Some(rec) = rec.as_deref_mut() {
                rec.states.push(to_complex_basis(&y));
            }
        }
        Ok((y, log_scale))
    }

    fn boundary_matrix<S: Scalar>(&self, y: &Basis<S>) -> DMatrix<Complex64> {
        let nb = self.basis_size();
        let mut m = DMatrix::<Complex64>::zeros(nb, nb);
        for j in 0..nb {
            for (i, v) in self.top_conditions(&y[j]).into_iter().enumerate() {
                m[(i, j)] = v.to_complex();
            }
        }
        m
    }

    fn evaluate<S: Scalar>(&self, mp: &ModeProblem) -> Result<DispersionValue> {
        mp.validate()?;
        let (y, log_scale) = self.shoot::<S>(mp, None)?;
        let m = self.boundary_matrix(&y);
        let sv = m.clone().singular_values();
        let smax = sv.max();
        let rcond = if smax > 0.0 { sv.min() / smax } else { 0.0 };
        let mantissa = m.determinant();
        Ok(DispersionValue {
            value: mantissa * log_scale.exp(),
            mantissa,
            log_scale,
            rcond,
        })
    }

    /// Dispersion function at `mp`. Real growth rates are integrated in
    /// real arithmetic, so the result is exactly real there.
    pub fn determinant(&self, mp: &ModeProblem) -> Result<DispersionValue> {
        if mp.gamma.im == 0.0 {
            self.evaluate::<f64>(mp)
        } else {
            self.evaluate::<Complex64>(mp)
        }
    }

    /// Real dispersion function on `γ = 0`.
    pub fn stationary_determinant(&self, a: f64, ra: f64) -> Result<f64> {
        Ok(self.evaluate::<f64>(&ModeProblem::stationary(a, ra))?.value.re)
    }

    /// `∂D/∂γ` at `γ = 0` by a central difference along the real axis.
    pub fn stationary_gamma_derivative(&self, a: f64, ra: f64) -> Result<f64> {
        let h = 1e-5;
        let plus = self.evaluate::<f64>(&ModeProblem::new(a, ra, Complex64::new(h, 0.0)))?.value.re;
        let minus = self.evaluate::<f64>(&ModeProblem::new(a, ra, Complex64::new(-h, 0.0)))?.value.re;
        Ok((plus - minus) / (2.0 * h))
    }

    /// Stationary neutral Rayleigh number at wavenumber `a`.
    ///
    /// Without a guess, returns the smallest positive root in `(0, RA_MAX]`
    /// found by a geometric scan. With a guess, returns the root nearest to
    /// it found by symmetric bracket expansion, which is what continuation
    /// along a branch needs.
    pub fn solve_stationary_ra(&self, a: f64, guess: Option<f64>) -> Result<f64> {
        if !(a > 0.0) {
            return Err(invalid("a", format!("wavenumber must be positive, got {a}")));
        }
        let f = |ra: f64| self.stationary_determinant(a, ra);
        let refine = |lo: f64, hi: f64, flo: f64, fhi: f64| brent(f, lo, hi, flo, fhi, RA_REL_TOL, 0.0, 200);
        if let Some(g) = guess.filter(|g| *g > 0.0 && *g < RA_MAX) {
            let fg = f(g)?;
            if fg == 0.0 {
                return Ok(g);
            }
            let mut delta = 0.01;
            while g / (1.0 + delta) > 1e-3 || g * (1.0 + delta) < RA_MAX {
                let lo = g / (1.0 + delta);
                let flo = f(lo)?;
                if flo.signum() != fg.signum() {
                    return refine(lo, g, flo, fg);
                }
                let hi = (g * (1.0 + delta)).min(RA_MAX);
                let fhi = f(hi)?;
                if fhi.signum() != fg.signum() {
                    return refine(g, hi, fg, fhi);
                }
                delta *= 2.0;
            }
            return Err(Error::NoRoot {
                what: "stationary dispersion function",
                lo: 0.0,
                hi: RA_MAX,
            });
        }
        self.lowest_stationary_ra(a, RA_MAX)?.ok_or(Error::NoRoot {
            what: "stationary dispersion function",
            lo: 0.0,
            hi: RA_MAX,
        })
    }

    /// Smallest stationary neutral Rayleigh number in `(0, ra_max)`, by a
    /// geometric sign-change scan from zero.
    pub fn lowest_stationary_ra(&self, a: f64, ra_max: f64) -> Result<Option<f64>> {
        if !(a > 0.0) {
            return Err(invalid("a", format!("wavenumber must be positive, got {a}")));
        }
        let f = |ra: f64| self.stationary_determinant(a, ra);
        let ra_max = ra_max.min(RA_MAX);
        let mut lo = 0.0;
        let mut flo = f(lo)?;
        let mut hi = RA_SCAN_START.min(ra_max);
        while hi > lo {
            let fhi = f(hi)?;
            if flo.signum() != fhi.signum() || fhi == 0.0 {
                return brent(f, lo, hi, flo, fhi, RA_REL_TOL, 0.0, 200).map(Some);
            }
            lo = hi;
            flo = fhi;
            hi = (hi * RA_SCAN_RATIO).min(ra_max);
        }
        Ok(None)
    }

    /// Oscillatory neutral point `(Ra, ω)` at wavenumber `a` by damped 2-D
    /// Newton on `D(Ra, iω) = 0` with a finite-difference Jacobian.
    pub fn solve_oscillatory(&self, a: f64, ra_guess: f64, omega_guess: f64) -> Result<OscillatoryOutcome> {
        if omega_guess == 0.0 || !omega_guess.is_finite() {
            return Err(invalid("omega", "oscillatory solve needs a nonzero frequency guess"));
        }
        let sign = omega_guess.signum();
        let d = |ra: f64, om: f64| -> Result<Complex64> { Ok(self.determinant(&ModeProblem::oscillatory(a, ra, om))?.value) };
        let (mut ra, mut om) = (ra_guess, omega_guess);
        let mut f = d(ra, om)?;
        let f0 = f.norm();
        let floor = 1e-4 * omega_guess.abs().max(1e-2);
        for it in 1..=NEWTON_MAX_ITER {
            let hr = 1e-6 * ra.abs().max(1.0);
            let ho = 1e-6 * om.abs().max(1e-2);
            let dr = (d(ra + hr, om)? - d(ra - hr, om)?) / (2.0 * hr);
            let dw = (d(ra, om + ho)? - d(ra, om - ho)?) / (2.0 * ho);
            let det = dr.re * dw.im - dw.re * dr.im;
            if det == 0.0 || !det.is_finite() {
                return Err(Error::NonConvergence {
                    what: "oscillatory Newton (singular Jacobian)",
                    iterations: it,
                });
            }
            let mut sr = -(dw.im * f.re - dw.re * f.im) / det;
            let mut so = -(-dr.im * f.re + dr.re * f.im) / det;
            let damp = (0.2 * ra.abs().max(1.0) / sr.abs()).min(0.5 * om.abs() / so.abs()).min(1.0);
            sr *= damp;
            so *= damp;
            ra += sr;
            om += so;
            if om * sign <= floor {
                return Ok(OscillatoryOutcome::Merged { ra });
            }
            f = d(ra, om)?;
            let step = (sr / ra.abs().max(1.0)).abs().max((so / om).abs());
            if (step < 1e-8 && f.norm() <= 1e-8 * f0) || step < 1e-12 {
                return Ok(OscillatoryOutcome::Converged { ra, omega: om, iterations: it });
            }
        }
        Err(Error::NonConvergence {
            what: "oscillatory Newton",
            iterations: NEWTON_MAX_ITER,
        })
    }

    /// Polishes each seed by complex Newton on `D(γ) = 0` at fixed `(a, Ra)`.
    pub fn solve_growth_rate(&self, a: f64, ra: f64, seeds: &[Complex64]) -> Result<GrowthRate> {
        let mut roots: Vec<Complex64> = Vec::new();
        for &seed in seeds {
            let Ok(root) = self.newton_gamma(a, ra, seed) else {
                log::debug!("growth-rate seed {seed} diverged at a = {a}, Ra = {ra}");
                continue;
            };
            if roots.iter().all(|r| (r - root).norm() > 1e-6) {
                roots.push(root);
            }
        }
        if roots.is_empty() {
            return Err(Error::SeedsDiverged { seeds: seeds.len() });
        }
        roots.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
        Ok(GrowthRate { gamma: roots[0], roots })
    }

    /// Leading growth rate with seeds taken from the collocation spectrum.
    pub fn leading_growth_rate(&self, a: f64, ra: f64) -> Result<Complex64> {
        let op = crate::oracle::build_operator(a, ra, &self.params, &self.basic, SEED_NCHEB)?;
        let seeds: Vec<Complex64> = crate::oracle::full_spectrum(&op)?
            .into_iter()
            .filter(|g| g.im >= 0.0)
            .take(SEED_COUNT)
            .map(|g| if g.im.abs() < 1e-9 { Complex64::new(g.re, 0.0) } else { g })
            .collect();
        Ok(self.solve_growth_rate(a, ra, &seeds)?.gamma)
    }

    fn newton_gamma(&self, a: f64, ra: f64, seed: Complex64) -> Result<Complex64> {
        let d = |g: Complex64| -> Result<Complex64> { Ok(self.determinant(&ModeProblem::new(a, ra, g))?.value) };
        let mut g = seed;
        for it in 1..=NEWTON_MAX_ITER {
            let h = 1e-6 * (1.0 + g.norm());
            let f = d(g)?;
            let df = (d(g + h)? - d(g - h)?) / (2.0 * h);
            if df.norm() == 0.0 || !df.re.is_finite() {
                return Err(Error::NonConvergence { what: "growth-rate Newton", iterations: it });
            }
            let mut step = -f / df;
            let cap = 0.5 * (1.0 + g.norm());
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            g += step;
            // keep real seeds real: the imaginary part is pure round-off
            if seed.im == 0.0 {
                g.im = 0.0;
            }
            if step.norm() < 1e-11 * (1.0 + g.norm()) {
                return Ok(g);
            }
            if g.norm() > 1e6 {
                break;
            }
        }
        Err(Error::NonConvergence {
            what: "growth-rate Newton",
            iterations: NEWTON_MAX_ITER,
        })
    }

    /// Nontrivial solution at a point where the dispersion function
    /// vanishes. The combination of basis solutions is the right singular
    /// vector of the smallest singular value of the boundary matrix, carried
    /// back through the Gram–Schmidt factors.
    pub fn null_solution(&self, mp: &ModeProblem) -> Result<NullSolution> {
        mp.validate()?;
        let nb = self.basis_size();
        let mut rec = Recorder {
            states: Vec::with_capacity(self.disc.steps + 1),
            factors: Vec::new(),
        };
        let (y, _) = self.shoot::<Complex64>(mp, Some(&mut rec))?;
        let m = self.boundary_matrix(&y);
        let svd = m.svd(false, true);
        let v_t = svd.v_t.ok_or_else(|| Error::Eigensolver("SVD of boundary matrix failed".into()))?;
        let (imin, smin) = svd.singular_values.argmin();
        let smax = svd.singular_values.max();
        let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
        if rcond > RANK_TOL {
            return Err(Error::NotRankDeficient { ratio: rcond });
        }
        let mut c: DVector<Complex64> = v_t.row(imin).transpose().map(|z| z.conj());

        // Coefficients on each segment between orthonormalizations, walking
        // down from the top: before factor R the combination is R⁻¹ c.
        let steps = self.disc.steps;
        let mut coeff_at = vec![DVector::<Complex64>::zeros(nb); steps + 1];
        let mut seg_end = steps + 1;
        for (node, r) in rec.factors.iter().rev() {
            for slot in coeff_at.iter_mut().take(seg_end).skip(*node) {
                *slot = c.clone();
            }
            seg_end = *node;
            if *node > 0 {
                c = r
                    .solve_upper_triangular(&c)
                    .ok_or_else(|| Error::Eigensolver("singular Gram-Schmidt factor".into()))?;
            }
        }
        let h = 1.0 / steps as f64;
        let mut x = Vec::with_capacity(steps + 1);
        let mut states = Vec::with_capacity(steps + 1);
        for (i, basis) in rec.states.iter().enumerate() {
            let mut s = [Complex64::new(0.0, 0.0); DIM];
            for j in 0..nb {
                for d in 0..DIM {
                    s[d] += basis[j][d] * coeff_at[i][j];
                }
            }
            x.push(i as f64 * h);
            states.push(StateVector(s));
        }
        Ok(NullSolution { x, states, rcond })
    }
}

#[inline]
fn axpy<S: Scalar>(y: &[S; DIM], k: &[S; DIM], h: f64) -> [S; DIM] {
    let mut out = *y;
    for d in 0..DIM {
        out[d] += k[d] * h;
    }
    out
}

fn to_complex_basis<S: Scalar>(y: &Basis<S>) -> [[Complex64; DIM]; MAX_BASIS] {
    let mut out = [[Complex64::new(0.0, 0.0); DIM]; MAX_BASIS];
    for (o, v) in out.iter_mut().zip(y) {
        for (a, b) in o.iter_mut().zip(v) {
            *a = b.to_complex();
        }
    }
    out
}
