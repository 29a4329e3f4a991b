//! Linear stability of phototactic bioconvection in a suspension heated
//! from above and illuminated by a collimated beam.
//!
//! The pipeline runs from [`Params`] through the motionless [`BasicState`]
//! to the ninth-order normal-mode problem in [`stability`], whose neutral
//! curves are traced in [`neutral`] and whose eigenmodes are turned into
//! physical fields in [`fields`]. [`oracle`] is an independent Chebyshev
//! collocation discretization used for cross-checks and Newton seeds.

pub mod basic_state;
pub mod error;
pub mod fields;
pub mod neutral;
pub mod numerics;
pub mod oracle;
pub mod params;
pub mod stability;
pub mod taxis;

pub use basic_state::{solve_basic_state, solve_basic_state_with, BasicState, Profiles, Sublayer};
pub use error::{Error, Result};
pub use params::{DimensionalParams, Params, ParamsConfig};
pub use taxis::{chi_from_gc, critical_intensity, TaxisFn, TaxisResponse};
pub use stability::{
    Discretization, DispersionValue, GrowthRate, ModeProblem, OscillatoryOutcome, StabilitySolver, StateVector,
    ThermalBlock,
};
pub use neutral::{BranchKind, CriticalPoint, MergePoint, NeutralAnalysis, NeutralBranch, NeutralConfig, NeutralSample};
pub use fields::{Eigenmode, FieldFrame, MostUnstable, PhasePoint};
