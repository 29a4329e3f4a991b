//! Phototaxis response: mean upward swimming orientation as a function of
//! the local total intensity `G`.
//!
//! The response used throughout is
//! `T(G) = 0.8 sin(3πφ/2) − 0.1 sin(πφ/2)` with `φ = G exp(χ (G − 1))`,
//! positive (toward the light) below the critical intensity `G_c` and
//! negative above it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bisect, brent};

/// Range of the steepness parameter over which `G_c` sweeps roughly 0.3..0.8.
pub const CHI_RANGE: (f64, f64) = (-1.1, 1.1);

const SCAN_STEP: f64 = 1e-3;
const ROOT_TOL: f64 = 1e-13;

/// A swimming-orientation response to light. `TaxisFn` is the only
/// implementation shipped; the basic-state solver accepts any implementor.
pub trait TaxisResponse {
    fn value(&self, g: f64) -> f64;
    fn derivative(&self, g: f64) -> f64;
    fn second_derivative(&self, g: f64) -> f64;
}

/// The sinusoidal phototaxis response parameterized by its steepness `chi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaxisFn {
    pub chi: f64,
}

impl TaxisFn {
    pub fn new(chi: f64) -> Self {
        if !(CHI_RANGE.0..=CHI_RANGE.1).contains(&chi) {
            log::warn!("chi = {chi} outside [-1.1, 1.1]; G_c may leave [0.3, 0.8]");
        }
        Self { chi }
    }

    #[inline]
    fn phi(&self, g: f64) -> f64 {
        g * (self.chi * (g - 1.0)).exp()
    }

    /// Smallest `G` in `(0, 1]` where the response changes sign from + to −.
    pub fn critical_intensity(&self) -> Result<f64> {
        critical_intensity(self.chi)
    }
}

impl TaxisResponse for TaxisFn {
    #[inline]
    fn value(&self, g: f64) -> f64 {
        let phi = self.phi(g);
        0.8 * (1.5 * PI * phi).sin() - 0.1 * (0.5 * PI * phi).sin()
    }

    #[inline]
    fn derivative(&self, g: f64) -> f64 {
        let e = (self.chi * (g - 1.0)).exp();
        let phi = g * e;
        let dphi = e * (1.0 + self.chi * g);
        (1.2 * PI * (1.5 * PI * phi).cos() - 0.05 * PI * (0.5 * PI * phi).cos()) * dphi
    }

    #[inline]
    fn second_derivative(&self, g: f64) -> f64 {
        let chi = self.chi;
        let e = (chi * (g - 1.0)).exp();
        let phi = g * e;
        let dphi = e * (1.0 + chi * g);
        let d2phi = chi * e * (2.0 + chi * g);
        let df = 1.2 * PI * (1.5 * PI * phi).cos() - 0.05 * PI * (0.5 * PI * phi).cos();
        let d2f = -1.8 * PI * PI * (1.5 * PI * phi).sin() + 0.025 * PI * PI * (0.5 * PI * phi).sin();
        d2f * dphi * dphi + df * d2phi
    }
}

/// Critical total intensity `G_c(χ)`: the first + → − sign change of the
/// response in `(0, 1]`, located by a fixed scan and refined by bisection.
pub fn critical_intensity(chi: f64) -> Result<f64> {
    let taxis = TaxisFn { chi };
    let steps = (1.0 / SCAN_STEP).round() as usize;
    let mut prev_g = SCAN_STEP;
    let mut prev_t = taxis.value(prev_g);
    for k in 2..=steps {
        let g = k as f64 * SCAN_STEP;
        let t = taxis.value(g);
        if prev_t > 0.0 && t <= 0.0 {
            if t == 0.0 {
                return Ok(g);
            }
            return Ok(bisect(|x| taxis.value(x), prev_g, g, ROOT_TOL));
        }
        prev_g = g;
        prev_t = t;
    }
    Err(Error::NoTaxisRoot { chi })
}

/// Inverse of [`critical_intensity`]: the steepness `χ ∈ [−1.1, 1.1]` whose
/// response changes sign at `gc`.
pub fn chi_from_gc(gc: f64) -> Result<f64> {
    let (lo, hi) = CHI_RANGE;
    let f = |chi: f64| critical_intensity(chi).map(|g| g - gc);
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if !gc.is_finite() || flo.signum() == fhi.signum() {
        return Err(Error::CriticalIntensityOutOfRange { gc });
    }
    brent(f, lo, hi, flo, fhi, 0.0, 1e-13, 200)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `φ` at the sign change solves 8 sin(3u) = sin(u) with u = πφ/2, i.e.
    /// sin²u = 23/32; inverting φ = G e^{χ(G−1)} for χ is then closed form.
    fn chi_closed_form(gc: f64) -> f64 {
        let phi0 = 2.0 / PI * (23.0f64 / 32.0).sqrt().asin();
        (phi0 / gc).ln() / (gc - 1.0)
    }

    #[test]
    fn zero_intensity_gives_zero_response() {
        for chi in [-1.1, -0.3, 0.0, 0.7, 1.1] {
            assert_eq!(TaxisFn { chi }.value(0.0), 0.0);
        }
    }

    #[test]
    fn response_vanishes_at_critical_intensity() {
        for chi in [-1.0, -0.485, 0.0, 0.5, 1.0] {
            let gc = critical_intensity(chi).unwrap();
            assert!(TaxisFn { chi }.value(gc).abs() < 1e-12);
        }
    }

    #[test]
    fn value_at_chi_zero_matches_closed_form() {
        // φ = 0.4: 0.8 sin(0.6π) − 0.1 sin(0.2π), evaluated independently
        // with mpmath at 30 digits.
        let expected = 0.702_066_687_806_875_6;
        assert!((TaxisFn { chi: 0.0 }.value(0.4) - expected).abs() < 1e-15);
    }

    #[test]
    fn derivative_at_origin_with_chi_zero() {
        let d = TaxisFn { chi: 0.0 }.derivative(0.0);
        assert!((d - 1.15 * PI).abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-6;
        for chi in [-1.1, -0.485, 0.0, 0.6, 1.1] {
            let t = TaxisFn { chi };
            for i in 1..=100 {
                let g = 0.01 + 0.99 * (i - 1) as f64 / 99.0;
                let fd = (t.value(g + h) - t.value(g - h)) / (2.0 * h);
                let an = t.derivative(g);
                let err = (fd - an).abs() / an.abs().max(1e-3);
                assert!(err < 1e-6, "chi={chi} g={g} fd={fd} an={an}");
            }
        }
    }

    #[test]
    fn derivative_at_reference_critical_intensity() {
        let t = TaxisFn { chi: -0.485 };
        let h = 1e-6;
        let fd = (t.value(0.51 + h) - t.value(0.51 - h)) / (2.0 * h);
        assert!(((t.derivative(0.51) - fd) / fd).abs() < 1e-6);
    }

    #[test]
    fn second_derivative_matches_difference_of_first() {
        let h = 1e-6;
        for chi in [-1.1, -0.2, 0.9] {
            let t = TaxisFn { chi };
            for g in [0.05, 0.3, 0.51, 0.77, 1.0] {
                let fd = (t.derivative(g + h) - t.derivative(g - h)) / (2.0 * h);
                assert!((fd - t.second_derivative(g)).abs() < 1e-5 * fd.abs().max(1.0));
            }
        }
    }

    #[test]
    fn critical_intensity_reference_values() {
        assert!((critical_intensity(-0.485).unwrap() - 0.51).abs() < 0.005);
        assert!((critical_intensity(-1.1).unwrap() - 0.3).abs() < 0.005);
        assert!((critical_intensity(1.1).unwrap() - 0.8).abs() < 0.005);
    }

    #[test]
    fn chi_from_gc_reference_values() {
        assert!((chi_from_gc(0.51).unwrap() + 0.485).abs() < 0.015);
        // closed-form oracle, independent of the scan + bisection path
        for gc in [0.3, 0.51, 0.63, 0.65, 0.68, 0.8] {
            let chi = chi_from_gc(gc).unwrap();
            assert!((chi - chi_closed_form(gc)).abs() < 1e-9, "gc={gc}");
        }
        // G_c = 0.68, closed form evaluated with mpmath at 30 digits
        assert!((chi_from_gc(0.68).unwrap() - 0.169_321_613_125_706_1).abs() < 1e-9);
    }

    #[test]
    fn round_trips() {
        for chi in [-1.05, -0.485, 0.0, 0.33, 1.05] {
            let back = chi_from_gc(critical_intensity(chi).unwrap()).unwrap();
            assert!((back - chi).abs() < 1e-8);
        }
        for gc in [0.3, 0.45, 0.65, 0.8] {
            let back = critical_intensity(chi_from_gc(gc).unwrap()).unwrap();
            assert!((back - gc).abs() < 1e-8);
        }
    }

    #[test]
    fn out_of_range_gc_is_rejected() {
        assert!(matches!(chi_from_gc(0.9), Err(Error::CriticalIntensityOutOfRange { .. })));
        assert!(matches!(chi_from_gc(0.1), Err(Error::CriticalIntensityOutOfRange { .. })));
    }

    #[test]
    fn single_sign_change_and_bounded() {
        let mut chi = -1.1;
        while chi <= 1.1 + 1e-12 {
            let t = TaxisFn { chi };
            let mut changes = 0;
            let mut prev = t.value(1e-4);
            for k in 2..=10_000 {
                let v = t.value(k as f64 * 1e-4);
                if prev.signum() != v.signum() && v != 0.0 {
                    changes += 1;
                }
                prev = v;
            }
            assert_eq!(changes, 1, "chi = {chi}");
            for k in 0..=1200 {
                assert!(t.value(k as f64 * 1e-3).abs() <= 0.9);
            }
            chi += 0.1;
        }
    }

    #[test]
    fn critical_intensity_increases_with_chi() {
        let mut prev = critical_intensity(-1.1).unwrap();
        for k in 1..=44 {
            let g = critical_intensity(-1.1 + 0.05 * k as f64).unwrap();
            assert!(g > prev);
            prev = g;
        }
    }
}
