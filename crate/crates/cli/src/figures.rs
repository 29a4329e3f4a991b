//! CSV bundles holding the data behind each figure, and a
//! reader that checks a bundle against its pinned schema.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use phototherm::fields::{default_probe, extract_eigenmode, render_frame, render_frames, time_series};
use phototherm::numerics::linspace;
use phototherm::{Eigenmode, ModeProblem, NeutralAnalysis, Params};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{num, schema, write_csv, Meta};
use crate::session::Session;

/// Thermal Rayleigh numbers drawn in each neutral-curve figure.
pub const FIGURE_RT: [f64; 3] = [0.0, -500.0, -1000.0];
/// Thermal Rayleigh numbers of the stability-enhancement sweep.
pub const SWEEP_RT: [f64; 4] = [0.0, -250.0, -500.0, -1000.0];
pub const SWEEP_LE: [f64; 4] = [1.0, 4.0, 10.0, 40.0];
/// Critical intensities of the strong-swimming figures, in figure order.
pub const STRONG_GC: [f64; 4] = [0.8, 0.68, 0.65, 0.63];
/// Bioconvection Rayleigh number of the pattern figures.
pub const PATTERN_RA: f64 = 70.0;
const PATTERN_GRID: (usize, usize) = (64, 33);

/// `ħ = 0.5`, `U_s = 10`, `G_c = 0.68`, `Le = 4`.
pub fn moderate(rt: f64) -> Params {
    Params { rt, ..Params::default() }
}

/// `ħ = 0.5`, `U_s = 15` at the given critical intensity.
pub fn strong(gc: f64, rt: f64) -> phototherm::Result<Params> {
    Params {
        us: 15.0,
        rt,
        ..Params::default()
    }
    .with_gc(gc)
}

/// `ħ = 1`, `U_s = 15`, `χ = −0.485`.
pub fn opaque(rt: f64) -> phototherm::Result<Params> {
    Params {
        us: 15.0,
        optical_depth: 1.0,
        rt,
        ..Params::default()
    }
    .with_chi(-0.485)
}

/// One emitted file.
#[derive(Debug, Clone, Copy)]
pub struct Bundle {
    pub file: &'static str,
    pub schema: (&'static str, &'static [&'static str]),
    /// Columns holding labels rather than numbers.
    pub text_columns: &'static [&'static str],
}

const fn bundle(file: &'static str, schema: (&'static str, &'static [&'static str])) -> Bundle {
    Bundle {
        file,
        schema,
        text_columns: &["kind", "orbit"],
    }
}

pub const BUNDLES: [Bundle; 15] = [
    bundle("fig02_neutral_curves.csv", schema::FIG_NEUTRAL),
    bundle("fig03_critical_vs_lewis.csv", schema::FIG_LEWIS),
    bundle("fig04_patterns.csv", schema::FIG_PATTERNS),
    bundle("fig05_basic_state.csv", schema::FIG_BASIC),
    bundle("fig05_neutral_curves.csv", schema::FIG_NEUTRAL),
    bundle("fig06_basic_state.csv", schema::FIG_BASIC),
    bundle("fig06_neutral_curves.csv", schema::FIG_NEUTRAL),
    bundle("fig07_basic_state.csv", schema::FIG_BASIC),
    bundle("fig07_neutral_curves.csv", schema::FIG_NEUTRAL),
    bundle("fig08_basic_state.csv", schema::FIG_BASIC),
    bundle("fig08_neutral_curves.csv", schema::FIG_NEUTRAL),
    bundle("fig09_neutral_curves.csv", schema::FIG_NEUTRAL),
    bundle("fig10_cycle_frames.csv", schema::FIG_FRAMES),
    bundle("fig11_time_series.csv", schema::FIG_SERIES),
    bundle("fig12_frequency.csv", schema::FIG_FREQUENCY),
];

/// Extra bundle: neutral and damped orbits for the phase portraits.
pub const PORTRAITS: Bundle = bundle("fig12_phase_portraits.csv", schema::FIG_PORTRAITS);

pub fn all_bundles() -> impl Iterator<Item = Bundle> {
    BUNDLES.into_iter().chain(std::iter::once(PORTRAITS))
}

struct Writer<'a> {
    dir: &'a Path,
    cfg: &'a RunConfig,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn emit(&mut self, b: &Bundle, meta: Meta, rows: &[Vec<String>]) -> CliResult<()> {
        let path = self.dir.join(b.file);
        write_csv(&path, &meta, b.schema.1, rows)?;
        self.written.push(path);
        Ok(())
    }

    fn meta(&self, b: &Bundle, params: serde_json::Value) -> Meta {
        Meta::new("repro", b.schema.0, self.cfg).with_extra("figure_params", params)
    }
}

fn find(file: &str) -> Bundle {
    all_bundles().find(|b| b.file == file).expect("registered bundle")
}

fn neutral_rows(rt: f64, a: &NeutralAnalysis) -> Vec<Vec<String>> {
    a.branches()
        .enumerate()
        .flat_map(|(k, br)| {
            br.samples.iter().map(move |s| {
                vec![num(rt), k.to_string(), br.kind.as_str().to_string(), num(s.a), num(s.ra), num(s.omega)]
            })
        })
        .collect()
}

fn neutral_figure(w: &mut Writer, s: &Session, file: &str, params: &[Params]) -> CliResult<()> {
    let b = find(file);
    let mut rows = Vec::new();
    for p in params {
        rows.extend(neutral_rows(p.rt, &*s.analysis(p)?));
    }
    let meta = w.meta(&b, json!(params));
    w.emit(&b, meta, &rows)
}

fn basic_figure(w: &mut Writer, s: &Session, file: &str, p: &Params) -> CliResult<()> {
    let b = find(file);
    let state = s.basic_state(p)?;
    let rows: Vec<Vec<String>> = (0..state.x.len())
        .map(|i| vec![num(state.x[i]), num(state.n[i]), num(state.g[i])])
        .collect();
    let sub = state.sublayer();
    let meta = w
        .meta(&b, json!(p))
        .with_extra("x3_star", json!(sub.x3))
        .with_extra("n_b_max", json!(sub.n_max));
    w.emit(&b, meta, &rows)
}

/// Critical mode of the strong-absorption overstable case.
pub fn cycle_mode(s: &Session) -> CliResult<(Params, Eigenmode)> {
    let p = opaque(-500.0)?;
    let c = s.analysis(&p)?.critical;
    let mode = extract_eigenmode(&s.solver(&p)?, &ModeProblem::oscillatory(c.a, c.ra, c.omega))?;
    Ok((p, mode))
}

fn pattern_figure(w: &mut Writer, s: &Session) -> CliResult<()> {
    let b = find("fig04_patterns.csv");
    let mut rows = Vec::new();
    let mut params = Vec::new();
    for le in [4.0, 40.0] {
        for rt in FIGURE_RT {
            let p = Params {
                ra: PATTERN_RA,
                le,
                ..moderate(rt)
            };
            let m = s.most_unstable(&p, w.cfg.scan_points)?;
            let mode = extract_eigenmode(&s.solver(&p)?, &ModeProblem::new(m.a, p.ra, m.gamma))?;
            let f = render_frame(&mode, 0.0, PATTERN_GRID.0, PATTERN_GRID.1)?;
            for (k, z) in f.x3.iter().enumerate() {
                for (j, x) in f.x1.iter().enumerate() {
                    rows.push(vec![
                        num(le),
                        num(rt),
                        num(m.a),
                        num(*x),
                        num(*z),
                        num(f.psi[k][j]),
                        num(f.n[k][j]),
                        num(f.temperature[k][j]),
                    ]);
                }
            }
            params.push(p);
        }
    }
    let meta = w.meta(&b, json!(params)).with_assumption(crate::commands::WAVELENGTH_ASSUMPTION);
    w.emit(&b, meta, &rows)
}

fn lewis_figure(w: &mut Writer, s: &Session) -> CliResult<()> {
    let b = find("fig03_critical_vs_lewis.csv");
    let mut rows = Vec::new();
    for rt in FIGURE_RT {
        for le in SWEEP_LE {
            let c = s.analysis(&Params { le, ..moderate(rt) })?.critical;
            rows.push(vec![num(rt), num(le), num(c.a), num(c.ra), num(c.omega), c.kind.as_str().to_string()]);
        }
    }
    let meta = w.meta(&b, json!(moderate(0.0)));
    w.emit(&b, meta, &rows)
}

fn cycle_figures(w: &mut Writer, s: &Session) -> CliResult<()> {
    let (p, mode) = cycle_mode(s)?;
    let period = TAU / mode.gamma.im;

    let b = find("fig10_cycle_frames.csv");
    let times: Vec<f64> = (0..4).map(|k| k as f64 * period / 3.0).collect();
    let mut rows = Vec::new();
    for f in render_frames(&mode, &times, PATTERN_GRID.0, PATTERN_GRID.1)? {
        for (k, z) in f.x3.iter().enumerate() {
            for (j, x) in f.x1.iter().enumerate() {
                rows.push(vec![num(f.t), num(*x), num(*z), num(f.psi[k][j]), num(f.n[k][j]), num(f.temperature[k][j])]);
            }
        }
    }
    let meta = w.meta(&b, json!(p)).with_extra("period", json!(period));
    w.emit(&b, meta, &rows)?;

    let b = find("fig11_time_series.csv");
    let probe = default_probe(&mode);
    let series = time_series(&mode, probe, &linspace(0.0, 4.0 * period, 401))?;
    let rows: Vec<Vec<String>> = series.iter().map(|q| vec![num(q.t), num(q.temperature), num(q.rate)]).collect();
    let meta = w.meta(&b, json!(p)).with_extra("probe", json!([probe.0, probe.1]));
    w.emit(&b, meta, &rows)?;

    // neutral orbit at onset and a damped orbit below it
    let b = PORTRAITS;
    let solver = s.solver(&p)?;
    let below = 0.9 * mode.ra;
    let damped_gamma = solver
        .solve_growth_rate(mode.a, below, &[Complex64::new(-0.1, mode.gamma.im)])?
        .gamma;
    let damped = extract_eigenmode(&solver, &ModeProblem::new(mode.a, below, damped_gamma))?;
    let mut rows = Vec::new();
    for (label, m) in [("neutral", &mode), ("damped", &damped)] {
        let t_end = 4.0 * TAU / m.gamma.im.abs().max(f64::MIN_POSITIVE);
        for q in time_series(m, default_probe(m), &linspace(0.0, t_end, 401))? {
            rows.push(vec![
                label.to_string(),
                num(m.a),
                num(m.ra),
                num(m.gamma.re),
                num(m.gamma.im),
                num(q.t),
                num(q.temperature),
                num(q.rate),
            ]);
        }
    }
    let meta = w.meta(&b, json!(p));
    w.emit(&b, meta, &rows)
}

fn frequency_figure(w: &mut Writer, s: &Session, params: &[Params]) -> CliResult<()> {
    let b = find("fig12_frequency.csv");
    let mut rows = Vec::new();
    for p in params {
        for (k, br) in s.analysis(p)?.oscillatory.iter().enumerate() {
            rows.extend(br.samples.iter().map(|x| vec![num(p.rt), k.to_string(), num(x.a), num(x.ra), num(x.omega)]));
        }
    }
    let meta = w.meta(&b, json!(params));
    w.emit(&b, meta, &rows)
}

/// Writes every bundle into `dir` and returns the paths.
pub fn write_bundles(s: &Session, cfg: &RunConfig, dir: &Path) -> CliResult<Vec<PathBuf>> {
    crate::output::ensure_dir(dir)?;
    let mut w = Writer {
        dir,
        cfg,
        written: Vec::new(),
    };
    let moderate_set: Vec<Params> = SWEEP_RT.iter().map(|&rt| moderate(rt)).collect();
    neutral_figure(&mut w, s, "fig02_neutral_curves.csv", &moderate_set)?;
    lewis_figure(&mut w, s)?;
    pattern_figure(&mut w, s)?;
    for (k, gc) in STRONG_GC.into_iter().enumerate() {
        let fig = k + 5;
        basic_figure(&mut w, s, &format!("fig{fig:02}_basic_state.csv"), &strong(gc, 0.0)?)?;
        let set = FIGURE_RT.iter().map(|&rt| strong(gc, rt)).collect::<phototherm::Result<Vec<_>>>()?;
        neutral_figure(&mut w, s, &format!("fig{fig:02}_neutral_curves.csv"), &set)?;
    }
    let opaque_set = FIGURE_RT.iter().map(|&rt| opaque(rt)).collect::<phototherm::Result<Vec<_>>>()?;
    neutral_figure(&mut w, s, "fig09_neutral_curves.csv", &opaque_set)?;
    cycle_figures(&mut w, s)?;
    frequency_figure(&mut w, s, &opaque_set)?;
    Ok(w.written)
}

/// Reads a bundle back: the schema line and column header must match the
/// pinned layout, and every row must be complete with finite numbers.
/// Returns the row count.
pub fn validate_bundle(dir: &Path, b: &Bundle) -> CliResult<usize> {
    let path = dir.join(b.file);
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::ReadConfig {
        path: path.clone(),
        source,
    })?;
    let expected = format!("# schema: phototherm/{}", b.schema.0);
    if text.lines().next() != Some(expected.as_str()) {
        return Err(bad(format!("first line is not `{expected}`")));
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
    if header != b.schema.1 {
        return Err(bad(format!("header {header:?} differs from {:?}", b.schema.1)));
    }
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        for (name, field) in header.iter().zip(record.iter()) {
            if b.text_columns.contains(&name.as_str()) {
                if field.is_empty() {
                    return Err(bad(format!("row {rows}: empty {name}")));
                }
            } else if !field.parse::<f64>().is_ok_and(f64::is_finite) {
                return Err(bad(format!("row {rows}: {name} = `{field}` is not a finite number")));
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(bad("no data rows".into()));
    }
    Ok(rows)
}
