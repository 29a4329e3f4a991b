//! Chebyshev collocation of the normal-mode problem.
//!
//! This is an independent discretization of the same equations solved by
//! [`crate::stability`]: the unknowns `(ŵ, Θ, N)` are sampled at the
//! Gauss–Lobatto nodes, the differential operators become dense matrices,
//! and the boundary conditions replace rows. The result is a generalized
//! eigenproblem `A v = γ B v` solved densely. It is slower and less
//! accurate per unknown than shooting, but shares no code with it beyond
//! the basic-state profiles, which makes it useful as a cross-check and as
//! a source of Newton seeds for growth rates.
//!
//! A boundary row `ℓ·v = 0` is written as `A_row = c ℓ`, `B_row = ℓ` with
//! a large negative `c`, so `(A − γB)_row = (c − γ) ℓ` still enforces the
//! condition exactly while the corresponding eigenvalues sit at `γ = c`,
//! past the spurious cutoff, instead of forming a defective infinite
//! eigenvalue that round-off would scatter into the finite spectrum.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basic_state::BasicState;
use crate::error::{invalid, Error, Result};
use crate::params::Params;

pub const DEFAULT_NCHEB: usize = 64;
pub const MIN_NCHEB: usize = 32;
/// Eigenvalues beyond this magnitude come from the replaced boundary rows.
pub const SPURIOUS_CUTOFF: f64 = 1e8;
const BOUNDARY_EIGENVALUE: f64 = -1e9;

/// Real shift used for the shift-and-invert transformation. Any value that
/// is not itself an eigenvalue works; a small irrational-looking number
/// keeps clear of the neutral eigenvalue at the origin.
const SHIFT: f64 = 0.137;
const SCHUR_EPS: f64 = 1e-14;
const SCHUR_MAX_ITER: usize = 20_000;
const SCHUR_FALLBACK_EPS: f64 = 1e-10;
const SCHUR_FALLBACK_MAX_ITER: usize = 1_000_000;

/// Collocation matrices for one `(a, Ra)`.
#[derive(Debug, Clone)]
pub struct CollocationOperator {
    pub n_cheb: usize,
    pub a: f64,
    pub ra: f64,
    /// Node heights, top (`x₃ = 1`) first.
    pub x: Vec<f64>,
    pub a_mat: DMatrix<f64>,
    pub b_mat: DMatrix<f64>,
}

impl CollocationOperator {
    pub fn size(&self) -> usize {
        self.a_mat.nrows()
    }
}

/// Chebyshev differentiation matrix on `ξ_j = cos(πj/N)`.
pub fn chebyshev_matrix(n: usize) -> (DMatrix<f64>, Vec<f64>) {
    let xi: Vec<f64> = (0..=n).map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos()).collect();
    let c = |j: usize| {
        let base = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j.is_multiple_of(2) {
            base
        } else {
            -base
        }
    };
    let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[(i, j)] = c(i) / c(j) / (xi[i] - xi[j]);
            }
        }
    }
    // negative-sum trick for the diagonal
    for i in 0..=n {
        let s: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    (d, xi)
}

pub fn build_operator(a: f64, ra: f64, p: &Params, b: &BasicState, n_cheb: usize) -> Result<CollocationOperator> {
    if n_cheb < MIN_NCHEB {
        return Err(invalid("n_cheb", format!("need at least {MIN_NCHEB} nodes, got {n_cheb}")));
    }
    if !(a > 0.0) {
        return Err(invalid("a", format!("wavenumber must be positive, got {a}")));
    }
    let n = n_cheb;
    let m = n + 1;
    let (dxi, xi) = chebyshev_matrix(n);
    let d1 = dxi * 2.0;
    let d2 = &d1 * &d1;
    let d3 = &d2 * &d1;
    let d4 = &d3 * &d1;
    let x: Vec<f64> = xi.iter().map(|v| 0.5 * (v + 1.0)).collect();
    let prof = x.iter().map(|&xj| b.profiles_at(xj.clamp(0.0, 1.0))).collect::<Result<Vec<_>>>()?;

    let a2 = a * a;
    let eye = DMatrix::<f64>::identity(m, m);
    let mut am = DMatrix::<f64>::zeros(3 * m, 3 * m);
    let mut bm = DMatrix::<f64>::zeros(3 * m, 3 * m);

    // momentum: γ (D² − a²)/Pr ŵ = (D² − a²)² ŵ − a² Ra N′ − a² R_T Θ
    let lap = &d2 - &eye * a2;
    let bih = &d4 - &d2 * (2.0 * a2) + &eye * (a2 * a2);
    am.view_mut((0, 0), (m, m)).copy_from(&bih);
    am.view_mut((0, m), (m, m)).copy_from(&(&eye * (-a2 * p.rt)));
    am.view_mut((0, 2 * m), (m, m)).copy_from(&(&d1 * (-a2 * ra)));
    bm.view_mut((0, 0), (m, m)).copy_from(&(&lap / p.pr));

    // heat: γ Θ = (D² − a²) Θ + ŵ
    am.view_mut((m, 0), (m, m)).copy_from(&eye);
    am.view_mut((m, m), (m, m)).copy_from(&lap);
    bm.view_mut((m, m), (m, m)).copy_from(&eye);

    // cells: γ Le N′ = N‴ − U_s T_b N″ − (a² + 2ħU_sΛ) N′ − ħU_sΛ′ N + Le n_b′ ŵ
    for i in 0..m {
        let pr = &prof[i];
        am[(2 * m + i, i)] = p.le * pr.dn;
        let tb = p.us * pr.taxis;
        let lam = a2 + 2.0 * p.optical_depth * p.us * pr.lambda;
        let dlam = p.optical_depth * p.us * pr.dlambda;
        for j in 0..m {
            am[(2 * m + i, 2 * m + j)] = d3[(i, j)] - tb * d2[(i, j)] - lam * d1[(i, j)];
            bm[(2 * m + i, 2 * m + j)] = p.le * d1[(i, j)];
        }
        am[(2 * m + i, 2 * m + i)] -= dlam;
    }

    // boundary rows; node 0 is the top, node n the bottom
    let top = &prof[0];
    let bot = &prof[n];
    let mut set_row = |row: usize, block: usize, coeffs: Vec<f64>| {
        am.row_mut(row).fill(0.0);
        bm.row_mut(row).fill(0.0);
        for (j, v) in coeffs.into_iter().enumerate() {
            am[(row, block * m + j)] = BOUNDARY_EIGENVALUE * v;
            bm[(row, block * m + j)] = v;
        }
    };
    let unit = |k: usize| (0..m).map(|j| if j == k { 1.0 } else { 0.0 }).collect::<Vec<_>>();
    let row_of = |mat: &DMatrix<f64>, k: usize| mat.row(k).iter().copied().collect::<Vec<_>>();

    set_row(0, 0, unit(0));
    set_row(1, 0, row_of(&d2, 0));
    set_row(n - 1, 0, row_of(&d1, n));
    set_row(n, 0, unit(n));
    set_row(m, 1, unit(0));
    set_row(m + n, 1, unit(n));
    set_row(2 * m, 2, unit(0));
    let top_flux: Vec<f64> = (0..m).map(|j| p.us * top.taxis * d1[(0, j)] - d2[(0, j)]).collect();
    set_row(2 * m + 1, 2, top_flux);
    let bot_flux: Vec<f64> = (0..m)
        .map(|j| {
            let diag = if j == n { p.optical_depth * p.us * bot.lambda } else { 0.0 };
            diag + p.us * bot.taxis * d1[(n, j)] - d2[(n, j)]
        })
        .collect();
    set_row(2 * m + n, 2, bot_flux);

    Ok(CollocationOperator {
        n_cheb,
        a,
        ra,
        x,
        a_mat: am,
        b_mat: bm,
    })
}

/// All finite eigenvalues, sorted by decreasing real part.
pub fn full_spectrum(op: &CollocationOperator) -> Result<Vec<Complex64>> {
    let shifted = &op.a_mat - &op.b_mat * SHIFT;
    let c = shifted
        .lu()
        .solve(&op.b_mat)
        .ok_or_else(|| Error::Eigensolver("shifted collocation matrix is singular".into()))?;
    let schur = c
        .clone()
        .try_schur(SCHUR_EPS, SCHUR_MAX_ITER)
        .or_else(|| c.try_schur(SCHUR_FALLBACK_EPS, SCHUR_FALLBACK_MAX_ITER))
        .ok_or_else(|| Error::Eigensolver("Schur iteration did not converge".into()))?;
    let mut out: Vec<Complex64> = schur
        .complex_eigenvalues()
        .iter()
        .filter(|mu| mu.norm() > 0.0)
        .map(|mu| SHIFT + mu.inv())
        .filter(|g| g.re.is_finite() && g.im.is_finite() && g.norm() < SPURIOUS_CUTOFF)
        .collect();
    out.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    Ok(out)
}

/// The `k` finite eigenvalues with largest real part.
pub fn spectrum(op: &CollocationOperator, k: usize) -> Result<Vec<Complex64>> {
    if k == 0 {
        return Err(invalid("k", "ask for at least one eigenvalue"));
    }
    let mut all = full_spectrum(op)?;
    all.truncate(k);
    Ok(all)
}

/// Eigenvector for an eigenvalue near `gamma` by inverse iteration.
/// Returned stacked as `(ŵ, Θ, N)` on the nodes, top first.
pub fn eigenvector(op: &CollocationOperator, gamma: Complex64) -> Result<Vec<Complex64>> {
    let a = op.a_mat.map(|v| Complex64::new(v, 0.0));
    let b = op.b_mat.map(|v| Complex64::new(v, 0.0));
    let shift = gamma + Complex64::new(1e-9, 1e-9) * (1.0 + gamma.norm());
    let lu = (&a - &b * shift).lu();
    let mut v = nalgebra::DVector::<Complex64>::from_element(op.size(), Complex64::new(1.0, 0.0));
    for _ in 0..4 {
        let rhs = &b * &v;
        v = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Eigensolver("inverse iteration hit an exactly singular matrix".into()))?;
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Eigensolver("inverse iteration diverged".into()));
        }
        v /= Complex64::new(norm, 0.0);
    }
    Ok(v.iter().copied().collect())
}

/// `‖(A − γB) v‖ / ‖v‖` for a stacked nodal vector.
pub fn residual(op: &CollocationOperator, gamma: Complex64, v: &[Complex64]) -> f64 {
    let a = op.a_mat.map(|x| Complex64::new(x, 0.0));
    let b = op.b_mat.map(|x| Complex64::new(x, 0.0));
    let vv = nalgebra::DVector::from_column_slice(v);
    (&a * &vv - &b * &vv * gamma).norm() / vv.norm()
}
