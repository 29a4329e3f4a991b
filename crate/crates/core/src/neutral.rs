//! Neutral curves `Ra(a)`, their critical points and parameter sweeps.
//!
//! The stationary branch is followed by natural continuation in `a`. The
//! oscillatory branch is seeded from the collocation spectrum and followed
//! by pseudo-arclength continuation in `(a, Ra, ω)` on
//! `F = (Re D(iω), Im D(iω)/ω)`. Because `D(−iω) = conj D(iω)` both
//! components are even in `ω`, so `F` stays regular as the frequency
//! vanishes and the continuation runs through `ω = 0` where the branch
//! meets the stationary one; that sign change marks the merge point.

use rayon::prelude::*;
use serde::Serialize;

use crate::basic_state::solve_basic_state;
use crate::error::{Error, Result};
use crate::numerics::{geomspace, golden_min};
use crate::oracle;
use crate::params::Params;
use crate::stability::{Discretization, ModeProblem, OscillatoryOutcome, StabilitySolver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchKind {
    Stationary,
    Oscillatory,
}

impl BranchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchKind::Stationary => "stationary",
            BranchKind::Oscillatory => "oscillatory",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeutralSample {
    pub a: f64,
    pub ra: f64,
    pub omega: f64,
}

/// Where an oscillatory branch joins the stationary one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MergePoint {
    pub a: f64,
    pub ra: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeutralBranch {
    pub kind: BranchKind,
    /// Sorted by `a`.
    pub samples: Vec<NeutralSample>,
    /// Wavenumbers at which no neutral point was found.
    pub missing: Vec<f64>,
    pub merges: Vec<MergePoint>,
    /// Why continuation stopped early, if it did.
    pub diagnostic: Option<String>,
}

impl NeutralBranch {
    fn new(kind: BranchKind) -> Self {
        Self {
            kind,
            samples: Vec::new(),
            missing: Vec::new(),
            merges: Vec::new(),
            diagnostic: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn a_range(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.a, self.samples.last()?.a))
    }

    /// Linear interpolation of `(Ra, ω)` at `a`, if inside the branch.
    pub fn interpolate(&self, a: f64) -> Option<(f64, f64)> {
        let i = self.samples.windows(2).position(|w| w[0].a <= a && a <= w[1].a)?;
        let (l, r) = (self.samples[i], self.samples[i + 1]);
        let t = if r.a > l.a { (a - l.a) / (r.a - l.a) } else { 0.0 };
        Some((l.ra + t * (r.ra - l.ra), l.omega + t * (r.omega - l.omega)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub a: f64,
    pub ra: f64,
    pub omega: f64,
    pub kind: BranchKind,
    /// `2π/ω` for oscillatory onset.
    pub period: Option<f64>,
}

/// Controls for the neutral-curve pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeutralConfig {
    pub a_lo: f64,
    pub a_hi: f64,
    pub n_points: usize,
    pub basic_grid: usize,
    pub discretization: Discretization,
    /// Collocation size used when scanning for oscillatory seeds.
    pub seed_ncheb: usize,
    /// Number of stationary samples probed for oscillatory seeds.
    pub seed_probes: usize,
    /// Initial pseudo-arclength step.
    pub arclength_step: f64,
    pub search_oscillatory: bool,
}

impl Default for NeutralConfig {
    fn default() -> Self {
        Self {
            a_lo: 0.1,
            a_hi: 10.0,
            n_points: 60,
            basic_grid: crate::basic_state::DEFAULT_GRID,
            discretization: Discretization::default(),
            seed_ncheb: 48,
            seed_probes: 10,
            arclength_step: 0.05,
            search_oscillatory: true,
        }
    }
}

/// Everything the pipeline computes for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeutralAnalysis {
    pub stationary: NeutralBranch,
    pub oscillatory: Vec<NeutralBranch>,
    pub critical: CriticalPoint,
}

impl NeutralAnalysis {
    pub fn branches(&self) -> impl Iterator<Item = &NeutralBranch> {
        std::iter::once(&self.stationary).chain(self.oscillatory.iter())
    }
}

/// Stationary neutral curve on a log-uniform grid in `a`, warm-starting
/// each solve from the previous root. A continued root is replaced by any
/// smaller root below it, so the branch follows the lower envelope.
pub fn trace_stationary(solver: &StabilitySolver, a_lo: f64, a_hi: f64, n_points: usize) -> NeutralBranch {
    let mut branch = NeutralBranch::new(BranchKind::Stationary);
    let mut prev: Option<f64> = None;
    for a in geomspace(a_lo, a_hi, n_points) {
        let warm = prev.and_then(|g| solver.solve_stationary_ra(a, Some(g)).ok()).map(|ra| {
            match solver.lowest_stationary_ra(a, ra * (1.0 - 1e-6)) {
                Ok(Some(lower)) => {
                    log::debug!("a = {a}: switching to lower stationary root {lower} from {ra}");
                    lower
                }
                _ => ra,
            }
        });
        match warm.map(Ok).unwrap_or_else(|| solver.solve_stationary_ra(a, None)) {
            Ok(ra) => {
                branch.samples.push(NeutralSample { a, ra, omega: 0.0 });
                prev = Some(ra);
            }
            Err(e) => {
                log::debug!("no stationary root at a = {a}: {e}");
                branch.missing.push(a);
                prev = None;
            }
        }
    }
    branch
}

/// Largest real part among eigenvalues with positive imaginary part, and
/// that eigenvalue's frequency.
fn leading_complex(p: &Params, solver: &StabilitySolver, a: f64, ra: f64, ncheb: usize) -> Result<Option<(f64, f64)>> {
    let op = oracle::build_operator(a, ra, p, solver.basic_state(), ncheb)?;
    Ok(oracle::full_spectrum(&op)?
        .into_iter()
        .filter(|g| g.im > 1e-6)
        .map(|g| (g.re, g.im))
        .max_by(|x, y| x.0.total_cmp(&y.0)))
}

/// Oscillatory neutral point near the stationary point `(a, ra_s)`, found
/// by locating where the leading complex pair of the collocation spectrum
/// crosses the imaginary axis and polishing with the shooting solver.
pub fn oscillatory_seed(solver: &StabilitySolver, a: f64, ra_s: f64, ncheb: usize) -> Result<Option<NeutralSample>> {
    let p = solver.params();
    let mut prev: Option<(f64, f64, f64)> = None;
    for f in geomspace(0.02, 3.0, 16) {
        let ra = f * ra_s;
        let Some((re, om)) = leading_complex(p, solver, a, ra, ncheb)? else {
            prev = None;
            continue;
        };
        if let Some((ra0, re0, _)) = prev {
            if re0 < 0.0 && re >= 0.0 {
                // Illinois regula falsi on the real part; Newton polishes afterwards
                let (mut lo, mut hi, mut flo, mut fhi) = (ra0, ra, re0, re);
                let mut om_mid = om;
                let mut side = 0;
                for _ in 0..40 {
                    let mid = (lo * fhi - hi * flo) / (fhi - flo);
                    let Some((r, w)) = leading_complex(p, solver, a, mid, ncheb)? else {
                        break;
                    };
                    om_mid = w;
                    if r < 0.0 {
                        (lo, flo) = (mid, r);
                        if side == -1 {
                            fhi *= 0.5;
                        }
                        side = -1;
                    } else {
                        (hi, fhi) = (mid, r);
                        if side == 1 {
                            flo *= 0.5;
                        }
                        side = 1;
                    }
                    if hi - lo < 1e-4 * hi || r.abs() < 1e-6 {
                        break;
                    }
                }
                let guess = if flo.abs() < fhi.abs() { lo } else { hi };
                return match solver.solve_oscillatory(a, guess, om_mid) {
                    Ok(OscillatoryOutcome::Converged { ra, omega, .. }) => Ok(Some(NeutralSample { a, ra, omega: omega.abs() })),
                    Ok(OscillatoryOutcome::Merged { .. }) => Ok(None),
                    Err(e) => {
                        log::debug!("oscillatory seed polish failed at a = {a}: {e}");
                        Ok(None)
                    }
                };
            }
        }
        prev = Some((ra, re, om));
    }
    Ok(None)
}

/// Scaled unknowns `(a, Ra/ra_ref, ω/om_ref)` for the continuation.
struct Continuation<'a> {
    solver: &'a StabilitySolver,
    ra_ref: f64,
    om_ref: f64,
}

impl Continuation<'_> {
    fn residual(&self, u: [f64; 3]) -> Result<[f64; 2]> {
        let (a, ra, om) = (u[0], u[1] * self.ra_ref, u[2] * self.om_ref);
        let d = self.solver.determinant(&ModeProblem::oscillatory(a, ra, om))?.value;
        Ok([d.re, d.im / om])
    }

    fn jacobian(&self, u: [f64; 3]) -> Result<[[f64; 3]; 2]> {
        let mut j = [[0.0; 3]; 2];
        for k in 0..3 {
            let h = 1e-6 * u[k].abs().max(1e-2);
            let mut up = u;
            let mut dn = u;
            up[k] += h;
            dn[k] -= h;
            let (fp, fm) = (self.residual(up)?, self.residual(dn)?);
            for r in 0..2 {
                j[r][k] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        Ok(j)
    }

    fn tangent(j: &[[f64; 3]; 2], prev: [f64; 3]) -> [f64; 3] {
        let (r0, r1) = (j[0], j[1]);
        let mut t = [
            r0[1] * r1[2] - r0[2] * r1[1],
            r0[2] * r1[0] - r0[0] * r1[2],
            r0[0] * r1[1] - r0[1] * r1[0],
        ];
        let norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();
        t.iter_mut().for_each(|v| *v /= norm);
        if dot(&t, &prev) < 0.0 {
            t.iter_mut().for_each(|v| *v = -*v);
        }
        t
    }

    /// Newton on `F(u) = 0`, `t·(u − u_pred) = 0`.
    fn correct(&self, mut u: [f64; 3], t: [f64; 3]) -> Result<([f64; 3], usize)> {
        let pred = u;
        for it in 1..=12 {
            let f = self.residual(u)?;
            let j = self.jacobian(u)?;
            let m = [j[0], j[1], t];
            let rhs = [-f[0], -f[1], -dot(&t, &sub(&u, &pred))];
            let du = solve3(m, rhs).ok_or(Error::NonConvergence {
                what: "arclength corrector (singular system)",
                iterations: it,
            })?;
            for k in 0..3 {
                u[k] += du[k];
            }
            if du.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-10 {
                return Ok((u, it));
            }
        }
        Err(Error::NonConvergence {
            what: "arclength corrector",
            iterations: 12,
        })
    }
}

fn dot(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

fn sub(x: &[f64; 3], y: &[f64; 3]) -> [f64; 3] {
    [x[0] - y[0], x[1] - y[1], x[2] - y[2]]
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mat = nalgebra::Matrix3::from_fn(|i, j| m[i][j]);
    let x = mat.lu().solve(&nalgebra::Vector3::new(b[0], b[1], b[2]))?;
    Some([x[0], x[1], x[2]])
}

/// Merge point between two continuation points straddling `ω = 0`:
/// Newton in `(a, Ra)` on `D(0) = 0` and `∂D/∂γ(0) = 0`, starting from
/// linear interpolation.
fn refine_merge(solver: &StabilitySolver, before: NeutralSample, after: NeutralSample) -> MergePoint {
    let t = before.omega / (before.omega - after.omega);
    let mut a = before.a + t * (after.a - before.a);
    let mut ra = before.ra + t * (after.ra - before.ra);
    let guess = MergePoint { a, ra };
    let f = |a: f64, ra: f64| -> Result<[f64; 2]> { Ok([solver.stationary_determinant(a, ra)?, solver.stationary_gamma_derivative(a, ra)?]) };
    for _ in 0..20 {
        let Ok(f0) = f(a, ra) else { return guess };
        let (ha, hr) = (1e-6 * a.max(1e-2), 1e-6 * ra.abs().max(1.0));
        let (Ok(fa), Ok(fr)) = (f(a + ha, ra), f(a, ra + hr)) else { return guess };
        let j = [[(fa[0] - f0[0]) / ha, (fr[0] - f0[0]) / hr], [(fa[1] - f0[1]) / ha, (fr[1] - f0[1]) / hr]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return guess;
        }
        let da = -(j[1][1] * f0[0] - j[0][1] * f0[1]) / det;
        let dr = -(-j[1][0] * f0[0] + j[0][0] * f0[1]) / det;
        a += da;
        ra += dr;
        if (a - guess.a).abs() > 0.5 || (ra - guess.ra).abs() > 0.2 * guess.ra.abs() {
            return guess;
        }
        if da.abs() < 1e-9 * a && dr.abs() < 1e-9 * ra.abs() {
            return MergePoint { a, ra };
        }
    }
    guess
}

/// Follows the oscillatory branch through `seed` in both directions until
/// it leaves `[a_lo, a_hi]` or merges with the stationary branch.
pub fn trace_oscillatory(solver: &StabilitySolver, a_lo: f64, a_hi: f64, seed: NeutralSample, step: f64) -> NeutralBranch {
    let mut branch = NeutralBranch::new(BranchKind::Oscillatory);
    let cont = Continuation {
        solver,
        ra_ref: seed.ra,
        om_ref: seed.omega.abs(),
    };
    let u0 = [seed.a, 1.0, seed.omega.signum()];
    let mut samples = vec![NeutralSample {
        omega: seed.omega.abs(),
        ..seed
    }];
    for direction in [1.0, -1.0] {
        let mut u = u0;
        let mut t_prev = [direction, 0.0, 0.0];
        let mut ds = step;
        let mut steps = 0;
        loop {
            steps += 1;
            if steps > 400 {
                branch.diagnostic = Some("step limit reached".into());
                break;
            }
            let t = match cont.jacobian(u) {
                Ok(j) => Continuation::tangent(&j, t_prev),
                Err(e) => {
                    branch.diagnostic = Some(format!("tangent failed at a = {}: {e}", u[0]));
                    break;
                }
            };
            let pred = [u[0] + ds * t[0], u[1] + ds * t[1], u[2] + ds * t[2]];
            let corrected = if pred[2] == 0.0 { Err(Error::OutOfDomain(0.0)) } else { cont.correct(pred, t) };
            let (next, iters) = match corrected {
                Ok(v) if v.0[2].is_finite() && v.0[1] > 0.0 => v,
                _ => {
                    ds *= 0.5;
                    if ds < 1e-5 {
                        branch.diagnostic = Some(format!("continuation stalled near a = {:.6}", u[0]));
                        break;
                    }
                    continue;
                }
            };
            let here = NeutralSample {
                a: u[0],
                ra: u[1] * cont.ra_ref,
                omega: u[2] * cont.om_ref,
            };
            let there = NeutralSample {
                a: next[0],
                ra: next[1] * cont.ra_ref,
                omega: next[2] * cont.om_ref,
            };
            if here.omega.signum() != there.omega.signum() {
                let m = refine_merge(solver, here, there);
                if (a_lo..=a_hi).contains(&m.a) {
                    samples.push(NeutralSample { a: m.a, ra: m.ra, omega: 0.0 });
                    branch.merges.push(m);
                }
                break;
            }
            if next[0] < a_lo || next[0] > a_hi {
                let edge = if next[0] < a_lo { a_lo } else { a_hi };
                if let Ok(OscillatoryOutcome::Converged { ra, omega, .. }) = solver.solve_oscillatory(edge, there.ra, there.omega) {
                    samples.push(NeutralSample { a: edge, ra, omega: omega.abs() });
                }
                break;
            }
            samples.push(NeutralSample {
                omega: there.omega.abs(),
                ..there
            });
            u = next;
            t_prev = t;
            if iters <= 3 {
                ds = (ds * 1.3).min(10.0 * step);
            }
        }
    }
    samples.sort_by(|x, y| x.a.total_cmp(&y.a));
    samples.dedup_by(|x, y| (x.a - y.a).abs() < 1e-12);
    branch.samples = samples;
    branch
}

/// Global minimum over all branches, refined by golden-section search in
/// `a` with a full re-solve at every trial wavenumber.
pub fn critical_point(solver: &StabilitySolver, branches: &[NeutralBranch]) -> Result<CriticalPoint> {
    let best = branches
        .iter()
        .flat_map(|b| b.samples.iter().enumerate().map(move |(i, s)| (b, i, *s)))
        .filter(|(_, _, s)| s.ra.is_finite())
        .min_by(|x, y| x.2.ra.total_cmp(&y.2.ra))
        .ok_or(Error::EmptyBranches)?;
    let (branch, i, sample) = best;
    let lo = branch.samples[i.saturating_sub(1)].a;
    let hi = branch.samples[(i + 1).min(branch.samples.len() - 1)].a;
    if hi <= lo {
        return Ok(make_critical(branch.kind, sample));
    }
    let solve_at = |a: f64| -> Option<NeutralSample> {
        let (ra_g, om_g) = branch.interpolate(a)?;
        match branch.kind {
            BranchKind::Stationary => solver
                .solve_stationary_ra(a, Some(ra_g))
                .ok()
                .map(|ra| NeutralSample { a, ra, omega: 0.0 }),
            BranchKind::Oscillatory => match solver.solve_oscillatory(a, ra_g, om_g.max(1e-3)) {
                Ok(OscillatoryOutcome::Converged { ra, omega, .. }) => Some(NeutralSample { a, ra, omega: omega.abs() }),
                _ => None,
            },
        }
    };
    let (a_min, _) = golden_min(|a| Ok(solve_at(a).map_or(f64::INFINITY, |s| s.ra)), lo, hi, 1e-6 * hi)?;
    let refined = solve_at(a_min).filter(|s| s.ra <= sample.ra).unwrap_or(sample);
    Ok(make_critical(branch.kind, refined))
}

fn make_critical(kind: BranchKind, s: NeutralSample) -> CriticalPoint {
    let oscillatory = kind == BranchKind::Oscillatory && s.omega > 0.0;
    CriticalPoint {
        a: s.a,
        ra: s.ra,
        omega: if oscillatory { s.omega } else { 0.0 },
        kind: if oscillatory { BranchKind::Oscillatory } else { BranchKind::Stationary },
        period: oscillatory.then(|| 2.0 * std::f64::consts::PI / s.omega),
    }
}

/// Oscillatory branches found by probing the collocation spectrum at
/// stationary samples that no traced branch covers yet.
pub fn find_oscillatory_branches(solver: &StabilitySolver, stationary: &NeutralBranch, cfg: &NeutralConfig) -> Vec<NeutralBranch> {
    let mut found: Vec<NeutralBranch> = Vec::new();
    let samples = &stationary.samples;
    if samples.is_empty() || cfg.seed_probes == 0 {
        return found;
    }
    let probes = cfg.seed_probes.min(samples.len());
    for k in 0..probes {
        let s = samples[k * (samples.len() - 1) / (probes - 1).max(1)];
        let covered = found.iter().any(|b| b.a_range().is_some_and(|(lo, hi)| lo <= s.a && s.a <= hi));
        if covered {
            continue;
        }
        match oscillatory_seed(solver, s.a, s.ra, cfg.seed_ncheb) {
            Ok(Some(seed)) => {
                log::debug!("oscillatory seed at a = {:.4}: Ra = {:.4}, omega = {:.4}", seed.a, seed.ra, seed.omega);
                let b = trace_oscillatory(solver, cfg.a_lo, cfg.a_hi, seed, cfg.arclength_step);
                if !b.is_empty() {
                    found.push(b);
                }
            }
            Ok(None) => {}
            Err(e) => log::debug!("seed scan failed at a = {}: {e}", s.a),
        }
    }
    found
}

/// Basic state, stationary and oscillatory branches, and critical point.
pub fn analyze(p: &Params, cfg: &NeutralConfig) -> Result<NeutralAnalysis> {
    let b = solve_basic_state(p, cfg.basic_grid)?;
    let solver = StabilitySolver::with_discretization(p, &b, cfg.discretization)?;
    analyze_with(&solver, cfg)
}

pub fn analyze_with(solver: &StabilitySolver, cfg: &NeutralConfig) -> Result<NeutralAnalysis> {
    let stationary = trace_stationary(solver, cfg.a_lo, cfg.a_hi, cfg.n_points);
    let oscillatory = if cfg.search_oscillatory {
        find_oscillatory_branches(solver, &stationary, cfg)
    } else {
        Vec::new()
    };
    let mut all = vec![stationary.clone()];
    all.extend(oscillatory.iter().cloned());
    let critical = critical_point(solver, &all)?;
    Ok(NeutralAnalysis {
        stationary,
        oscillatory,
        critical,
    })
}

/// One entry of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub value: f64,
    pub critical: std::result::Result<CriticalPoint, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub parameter: &'static str,
    pub entries: Vec<SweepEntry>,
    /// Whether successive critical Rayleigh numbers are strictly monotone
    /// in list order, and in which direction.
    pub increasing: bool,
    pub decreasing: bool,
}

fn sweep<F>(parameter: &'static str, values: &[f64], base: &Params, cfg: &NeutralConfig, set: F) -> Result<SweepTable>
where
    F: Fn(&mut Params, f64) + Sync,
{
    if values.is_empty() {
        return Err(crate::error::invalid("values", "sweep needs at least one value"));
    }
    let entries: Vec<SweepEntry> = values
        .par_iter()
        .map(|&v| {
            let mut p = *base;
            set(&mut p, v);
            let critical = analyze(&p, cfg).map(|r| r.critical).map_err(|e| e.to_string());
            if let Err(e) = &critical {
                log::warn!("{parameter} = {v}: {e}");
            }
            SweepEntry { value: v, critical }
        })
        .collect();
    let ras: Vec<f64> = entries.iter().filter_map(|e| e.critical.as_ref().ok().map(|c| c.ra)).collect();
    let complete = ras.len() == entries.len();
    let increasing = complete && ras.windows(2).all(|w| w[1] > w[0]);
    let decreasing = complete && ras.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) && ras.len() > 1 {
        log::warn!("critical Rayleigh number is not monotone across the {parameter} sweep");
    }
    Ok(SweepTable {
        parameter,
        entries,
        increasing,
        decreasing,
    })
}

/// Critical point for each thermal Rayleigh number.
pub fn sweep_rt(values: &[f64], base: &Params, cfg: &NeutralConfig) -> Result<SweepTable> {
    sweep("rt", values, base, cfg, |p, v| p.rt = v)
}

/// Critical point for each Lewis number.
pub fn sweep_le(values: &[f64], base: &Params, cfg: &NeutralConfig) -> Result<SweepTable> {
    sweep("le", values, base, cfg, |p, v| p.le = v)
}
