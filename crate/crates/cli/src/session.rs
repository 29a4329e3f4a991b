//! Memoized solver results shared by the acceptance checks and the figure
//! bundles, which revisit the same parameter sets many times.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use phototherm::fields::most_unstable_wavenumber;
use phototherm::neutral::analyze_with;
use phototherm::{solve_basic_state, BasicState, MostUnstable, NeutralAnalysis, NeutralConfig, Params, Result, StabilitySolver};

type Cache<T> = Mutex<HashMap<String, Arc<T>>>;

pub struct Session {
    pub neutral: NeutralConfig,
    basic: Cache<BasicState>,
    analyses: Cache<NeutralAnalysis>,
    unstable: Cache<MostUnstable>,
}

impl Session {
    pub fn new(neutral: NeutralConfig) -> Self {
        Self {
            neutral,
            basic: Mutex::default(),
            analyses: Mutex::default(),
            unstable: Mutex::default(),
        }
    }

    fn memo<T>(cache: &Cache<T>, key: String, make: impl FnOnce() -> Result<T>) -> Result<Arc<T>> {
        if let Some(v) = cache.lock().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let v = Arc::new(make()?);
        cache.lock().expect("cache lock").insert(key, v.clone());
        Ok(v)
    }

    pub fn basic_state(&self, p: &Params) -> Result<Arc<BasicState>> {
        let key = format!("{p:?}|{}", self.neutral.basic_grid);
        Self::memo(&self.basic, key, || solve_basic_state(p, self.neutral.basic_grid))
    }

    pub fn solver(&self, p: &Params) -> Result<StabilitySolver> {
        let b = self.basic_state(p)?;
        StabilitySolver::with_discretization(p, &b, self.neutral.discretization)
    }

    /// Neutral curves and critical point under the session settings.
    pub fn analysis(&self, p: &Params) -> Result<Arc<NeutralAnalysis>> {
        self.analysis_with(p, &self.neutral)
    }

    pub fn analysis_with(&self, p: &Params, cfg: &NeutralConfig) -> Result<Arc<NeutralAnalysis>> {
        let key = format!("{p:?}|{cfg:?}");
        Self::memo(&self.analyses, key, || {
            let b = solve_basic_state(p, cfg.basic_grid)?;
            let s = StabilitySolver::with_discretization(p, &b, cfg.discretization)?;
            log::info!("neutral analysis at {p:?}");
            analyze_with(&s, cfg)
        })
    }

    /// Fastest-growing mode at `p.ra` over the session wavenumber range.
    pub fn most_unstable(&self, p: &Params, scan_points: usize) -> Result<Arc<MostUnstable>> {
        let key = format!("{p:?}|{scan_points}|{:?}", self.neutral);
        Self::memo(&self.unstable, key, || {
            let s = self.solver(p)?;
            most_unstable_wavenumber(&s, p.ra, (self.neutral.a_lo, self.neutral.a_hi), scan_points)
        })
    }
}
