//! Dimensionless groups and radiation/taxis constants for one problem
//! instance, plus the conversion from dimensional suspension properties.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::taxis::{chi_from_gc, critical_intensity, TaxisFn};

/// Incident collimated intensity at the top surface, held fixed in all runs.
pub const DEFAULT_INCIDENT_INTENSITY: f64 = 0.8;

/// Dimensional suspension properties, CGS units and Kelvin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionalParams {
    /// Layer depth `H` (cm).
    pub depth: f64,
    /// Kinematic viscosity `ν` (cm²/s).
    pub kinematic_viscosity: f64,
    /// Cell diffusivity `D` (cm²/s).
    pub cell_diffusivity: f64,
    /// Thermal diffusivity `α_f` (cm²/s).
    pub thermal_diffusivity: f64,
    /// Mean cell concentration `n̄` (cm⁻³).
    pub mean_concentration: f64,
    /// Mean cell swimming speed `U_c` (cm/s).
    pub swimming_speed: f64,
    /// Cell volume `ϑ` (cm³).
    pub cell_volume: f64,
    /// Cell-to-fluid density excess ratio `Δϱ/ϱ`.
    pub density_ratio: f64,
    /// Volumetric thermal expansion coefficient `β` (1/K).
    pub thermal_expansion: f64,
    /// Bottom minus top wall temperature `ΔT` (K); negative when heated from above.
    pub temperature_difference: f64,
    /// Gravitational acceleration `g` (cm/s²).
    pub gravity: f64,
    /// Absorption cross-section per cell `ι` (cm²).
    pub absorption_per_cell: f64,
}

impl DimensionalParams {
    /// Common values for a suspension of *Chlamydomonas* heated from above.
    ///
    /// The absorption cross-section is chosen so that the optical depth is
    /// 0.5 at `depth = 0.5`.
    pub fn chlamydomonas(depth: f64, cell_diffusivity: f64) -> Self {
        Self {
            depth,
            kinematic_viscosity: 1e-2,
            cell_diffusivity,
            thermal_diffusivity: 2e-3,
            mean_concentration: 1e6,
            swimming_speed: 1e-2,
            cell_volume: 5e-10,
            density_ratio: 5e-2,
            thermal_expansion: 3.4e-3,
            temperature_difference: -1.0,
            gravity: 980.0,
            absorption_per_cell: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("depth", self.depth),
            ("kinematic_viscosity", self.kinematic_viscosity),
            ("cell_diffusivity", self.cell_diffusivity),
            ("thermal_diffusivity", self.thermal_diffusivity),
            ("mean_concentration", self.mean_concentration),
            ("swimming_speed", self.swimming_speed),
            ("cell_volume", self.cell_volume),
            ("density_ratio", self.density_ratio),
            ("thermal_expansion", self.thermal_expansion),
            ("gravity", self.gravity),
            ("absorption_per_cell", self.absorption_per_cell),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !self.temperature_difference.is_finite() {
            return Err(invalid("temperature_difference", "must be finite"));
        }
        Ok(())
    }
}

/// All dimensionless inputs of the stability problem.
///
/// `chi` and `gc` describe the same taxis curve; build through
/// [`Params::with_gc`] or [`Params::with_chi`] to keep them consistent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Bioconvection Rayleigh number.
    pub ra: f64,
    /// Thermal Rayleigh number (negative when heated from above).
    pub rt: f64,
    /// Basic-density Rayleigh number. Only a hydrostatic body force; it
    /// drops out of the perturbation equations.
    pub rm: f64,
    /// Lewis number `α_f / D`.
    pub le: f64,
    /// Prandtl number `ν / α_f`.
    pub pr: f64,
    /// Scaled swimming speed `U_c H / D`.
    pub us: f64,
    /// Optical depth `ι n̄ H`.
    pub optical_depth: f64,
    /// Incident intensity at the top surface.
    pub incident_intensity: f64,
    /// Taxis steepness.
    pub chi: f64,
    /// Critical total intensity implied by `chi`.
    pub gc: f64,
}

impl Default for Params {
    /// Optical depth 0.5, swimming speed 10, `G_c = 0.68`, `Le = 4`,
    /// `Pr = 5`, no thermal forcing.
    fn default() -> Self {
        Self {
            ra: 0.0,
            rt: 0.0,
            rm: 0.0,
            le: 4.0,
            pr: 5.0,
            us: 10.0,
            optical_depth: 0.5,
            incident_intensity: DEFAULT_INCIDENT_INTENSITY,
            chi: 0.0,
            gc: 0.0,
        }
        .with_gc(0.68)
        .expect("0.68 lies inside the taxis range")
    }
}

impl Params {
    /// Fix the taxis curve by its critical intensity, solving for `chi`.
    pub fn with_gc(mut self, gc: f64) -> Result<Self> {
        self.chi = chi_from_gc(gc)?;
        self.gc = gc;
        Ok(self)
    }

    /// Fix the taxis curve by its steepness, computing `gc`.
    pub fn with_chi(mut self, chi: f64) -> Result<Self> {
        self.gc = critical_intensity(chi)?;
        self.chi = chi;
        Ok(self)
    }

    pub fn taxis(&self) -> TaxisFn {
        TaxisFn::new(self.chi)
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("le", self.le, self.le > 0.0),
            ("pr", self.pr, self.pr > 0.0),
            ("us", self.us, self.us >= 0.0),
            ("optical_depth", self.optical_depth, self.optical_depth > 0.0),
            ("incident_intensity", self.incident_intensity, self.incident_intensity > 0.0),
            ("gc", self.gc, self.gc > 0.0 && self.gc < 1.0),
        ];
        for (name, v, ok) in checks {
            if !ok || !v.is_finite() {
                return Err(invalid(name, format!("value {v} out of range")));
            }
        }
        for (name, v) in [("ra", self.ra), ("rt", self.rt), ("rm", self.rm), ("chi", self.chi)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Dimensionless groups from dimensional suspension properties, with
    /// `μ = ϱν`:
    ///
    /// `Ra = n̄ϑΔϱ g H³/(μα_f)`, `R_T = βΔT ϱ g H³/(μα_f)`,
    /// `R_m = ϱ g H³/(μα_f)`, `Le = α_f/D`, `Pr = ν/α_f`, `U_s = U_c H/D`,
    /// `ħ = ι n̄ H`.
    pub fn from_dimensional(d: &DimensionalParams, incident_intensity: f64, chi: f64) -> Result<Self> {
        d.validate()?;
        let h3 = d.depth.powi(3);
        let visc_diff = d.kinematic_viscosity * d.thermal_diffusivity;
        let params = Self {
            ra: d.mean_concentration * d.cell_volume * d.density_ratio * d.gravity * h3 / visc_diff,
            rt: d.thermal_expansion * d.temperature_difference * d.gravity * h3 / visc_diff,
            rm: d.gravity * h3 / visc_diff,
            le: d.thermal_diffusivity / d.cell_diffusivity,
            pr: d.kinematic_viscosity / d.thermal_diffusivity,
            us: d.swimming_speed * d.depth / d.cell_diffusivity,
            optical_depth: d.absorption_per_cell * d.mean_concentration * d.depth,
            incident_intensity,
            chi,
            gc: 0.0,
        }
        .with_chi(chi)?;
        params.validate()?;
        Ok(params)
    }
}

/// Flat key-value form of [`Params`] as read from configuration files.
/// Exactly one of `chi` / `gc` may be set; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub ra: Option<f64>,
    pub rt: Option<f64>,
    pub rm: Option<f64>,
    pub le: Option<f64>,
    pub pr: Option<f64>,
    pub us: Option<f64>,
    pub optical_depth: Option<f64>,
    pub incident_intensity: Option<f64>,
    pub chi: Option<f64>,
    pub gc: Option<f64>,
}

impl ParamsConfig {
    /// Fill unset keys from [`Params::default`] and resolve the taxis curve.
    pub fn resolve(&self) -> Result<Params> {
        let base = Params::default();
        let mut p = Params {
            ra: self.ra.unwrap_or(base.ra),
            rt: self.rt.unwrap_or(base.rt),
            rm: self.rm.unwrap_or(base.rm),
            le: self.le.unwrap_or(base.le),
            pr: self.pr.unwrap_or(base.pr),
            us: self.us.unwrap_or(base.us),
            optical_depth: self.optical_depth.unwrap_or(base.optical_depth),
            incident_intensity: self.incident_intensity.unwrap_or(base.incident_intensity),
            chi: base.chi,
            gc: base.gc,
        };
        p = match (self.chi, self.gc) {
            (Some(_), Some(_)) => return Err(invalid("chi", "set either chi or gc, not both")),
            (Some(chi), None) => p.with_chi(chi)?,
            (None, Some(gc)) => p.with_gc(gc)?,
            (None, None) => p,
        };
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values_at_half_centimetre() {
        let d = DimensionalParams::chlamydomonas(0.5, 5e-4);
        let p = Params::from_dimensional(&d, 0.8, 0.0).unwrap();
        assert!((p.pr - 5.0).abs() < 1e-12);
        assert!((p.le - 4.0).abs() < 1e-12);
        assert!((p.us - 10.0).abs() < 1e-12);
        assert!((p.optical_depth - 0.5).abs() < 1e-12);
        assert!(p.rt < 0.0);
    }

    #[test]
    fn one_centimetre_depth_doubles_swimming_speed() {
        let d = DimensionalParams::chlamydomonas(1.0, 5e-4);
        let p = Params::from_dimensional(&d, 0.8, 0.0).unwrap();
        assert!((p.us - 20.0).abs() < 1e-12);
    }

    #[test]
    fn zero_temperature_difference_gives_zero_thermal_rayleigh() {
        let mut d = DimensionalParams::chlamydomonas(0.5, 5e-4);
        d.temperature_difference = 0.0;
        assert_eq!(Params::from_dimensional(&d, 0.8, 0.0).unwrap().rt, 0.0);
    }

    #[test]
    fn doubling_temperature_difference_only_doubles_rt() {
        let d = DimensionalParams::chlamydomonas(0.7, 2e-4);
        let mut d2 = d;
        d2.temperature_difference *= 2.0;
        let p = Params::from_dimensional(&d, 0.8, 0.2).unwrap();
        let q = Params::from_dimensional(&d2, 0.8, 0.2).unwrap();
        assert!((q.rt - 2.0 * p.rt).abs() <= 1e-12 * p.rt.abs());
        assert_eq!((p.ra, p.rm, p.le, p.pr, p.us, p.optical_depth), (q.ra, q.rm, q.le, q.pr, q.us, q.optical_depth));
    }

    #[test]
    fn lewis_times_speed_identity() {
        let d = DimensionalParams::chlamydomonas(0.8, 3e-4);
        let p = Params::from_dimensional(&d, 0.8, 0.0).unwrap();
        let lhs = p.le * d.swimming_speed * d.depth / d.thermal_diffusivity;
        assert!((lhs - p.us).abs() < 1e-12 * p.us);
    }

    #[test]
    fn non_positive_lengths_are_rejected() {
        for f in [
            |d: &mut DimensionalParams| d.depth = 0.0,
            |d: &mut DimensionalParams| d.cell_diffusivity = -1e-4,
            |d: &mut DimensionalParams| d.thermal_diffusivity = 0.0,
        ] {
            let mut d = DimensionalParams::chlamydomonas(0.5, 5e-4);
            f(&mut d);
            assert!(Params::from_dimensional(&d, 0.8, 0.0).is_err());
        }
    }

    #[test]
    fn gc_and_chi_stay_consistent() {
        let p = Params::default().with_chi(-0.485).unwrap();
        assert!((p.gc - 0.51).abs() < 0.005);
        let q = Params::default().with_gc(p.gc).unwrap();
        assert!((q.chi + 0.485).abs() < 1e-8);
    }

    #[test]
    fn config_rejects_both_taxis_keys() {
        let c = ParamsConfig {
            chi: Some(0.1),
            gc: Some(0.6),
            ..Default::default()
        };
        assert!(c.resolve().is_err());
    }
}
