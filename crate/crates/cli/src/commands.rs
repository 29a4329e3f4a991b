//! Subcommand definitions and their implementations. Each command writes
//! its artifacts under `output_dir` and returns a JSON summary for stdout.

use std::f64::consts::TAU;
use std::path::Path;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use phototherm::fields::{default_probe, extract_eigenmode, most_unstable_wavenumber, render_frames, time_series};
use phototherm::neutral::{analyze_with, sweep_le, sweep_rt, SweepTable};
use phototherm::numerics::linspace;
use phototherm::oracle::{build_operator, spectrum};
use phototherm::{
    solve_basic_state, BasicState, Eigenmode, ModeProblem, NeutralBranch, Params, StabilitySolver, TaxisResponse,
};
use serde_json::{json, Value};

use crate::config::{Overrides, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, num, schema, write_json, write_table, Meta};

/// Assumption recorded whenever a pattern wavelength is reported.
pub const WAVELENGTH_ASSUMPTION: &str = "pattern wavelength is 2*pi/a of the fastest-growing mode at the given Ra";

#[derive(Debug, Parser)]
#[command(name = "phototherm", version, about = "Linear stability of phototactic bioconvection heated from above")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Taxis critical intensity; with --table, the response curve
    Taxis {
        #[arg(long)]
        table: bool,
    },
    /// Equilibrium concentration, intensity and temperature profiles
    BasicState,
    /// Dispersion function at one (a, Ra, gamma)
    Dispersion,
    /// Leading collocation eigenvalues at one (a, Ra)
    Spectrum {
        /// Number of eigenvalues
        #[arg(long)]
        k: Option<usize>,
    },
    /// Stationary and oscillatory neutral curves
    Neutral,
    /// Critical point over all neutral branches
    Critical,
    /// Critical point for each entry of rt_list
    SweepRt,
    /// Critical point for each entry of le_list
    SweepLe,
    /// Streamfunction, concentration and temperature frames of one mode
    Fields,
    /// Temperature time series at a probe point
    Phase,
    /// Acceptance checks plus figure data bundles
    Repro,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Taxis { .. } => "taxis",
            Command::BasicState => "basic-state",
            Command::Dispersion => "dispersion",
            Command::Spectrum { .. } => "spectrum",
            Command::Neutral => "neutral",
            Command::Critical => "critical",
            Command::SweepRt => "sweep-rt",
            Command::SweepLe => "sweep-le",
            Command::Fields => "fields",
            Command::Phase => "phase",
            Command::Repro => "repro",
        }
    }
}

/// Runs one subcommand; the returned value is the stdout summary.
pub fn run(command: &Command, cfg: &RunConfig) -> CliResult<Value> {
    ensure_dir(&cfg.output_dir)?;
    match command {
        Command::Taxis { table } => taxis(cfg, *table),
        Command::BasicState => basic_state(cfg),
        Command::Dispersion => dispersion(cfg),
        Command::Spectrum { k } => eigenvalues(cfg, k.unwrap_or(cfg.spectrum_count)),
        Command::Neutral => neutral(cfg),
        Command::Critical => critical(cfg),
        Command::SweepRt => sweep(cfg, "sweep-rt"),
        Command::SweepLe => sweep(cfg, "sweep-le"),
        Command::Fields => fields(cfg),
        Command::Phase => phase(cfg),
        Command::Repro => crate::checks::repro(cfg),
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn basic(cfg: &RunConfig, p: &Params) -> CliResult<BasicState> {
    Ok(solve_basic_state(p, cfg.basic_grid)?)
}

fn solver(cfg: &RunConfig, p: &Params, b: &BasicState) -> CliResult<StabilitySolver> {
    Ok(StabilitySolver::with_discretization(p, b, cfg.discretization())?)
}

fn taxis(cfg: &RunConfig, table: bool) -> CliResult<Value> {
    let p = cfg.params()?;
    let t = p.taxis();
    let mut summary = json!({ "chi": p.chi, "gc": p.gc });
    if table {
        let rows: Vec<Vec<String>> = linspace(0.0, 1.0, 201)
            .into_iter()
            .map(|g| vec![num(g), num(t.value(g)), num(t.derivative(g))])
            .collect();
        let (id, header) = schema::TAXIS;
        let path = write_table(&cfg.output_dir, "taxis", cfg.format, &Meta::new("taxis", id, cfg), header, &rows)?;
        summary["file"] = json!(path_str(&path));
    }
    Ok(summary)
}

fn basic_state(cfg: &RunConfig) -> CliResult<Value> {
    let p = cfg.params()?;
    let b = basic(cfg, &p)?;
    let rows: Vec<Vec<String>> = (0..b.x.len())
        .map(|i| vec![num(b.x[i]), num(b.n[i]), num(b.g[i]), num(b.taxis[i]), num(b.temperature[i])])
        .collect();
    let (id, header) = schema::BASIC_STATE;
    let meta = Meta::new("basic-state", id, cfg);
    let table = write_table(&cfg.output_dir, "basic_state", cfg.format, &meta, header, &rows)?;
    let sub = b.sublayer();
    let body = json!({
        "x3_star": sub.x3,
        "n_b_max": sub.n_max,
        "surface_concentration": b.surface_concentration(),
        "normalization_error": b.normalization_error(),
    });
    let summary_path = cfg.output_dir.join("basic_state_summary.json");
    write_json(&summary_path, &Meta::new("basic-state", "basic-state-summary/v1", cfg), body.clone())?;
    Ok(json!({ "summary": body, "files": [path_str(&table), path_str(&summary_path)] }))
}

fn dispersion(cfg: &RunConfig) -> CliResult<Value> {
    let p = cfg.params()?;
    let (a, ra) = (cfg.wavenumber()?, cfg.rayleigh()?);
    let b = basic(cfg, &p)?;
    let gamma = Complex64::new(cfg.gamma_re, cfg.gamma_im);
    let d = solver(cfg, &p, &b)?.determinant(&ModeProblem::new(a, ra, gamma))?;
    let row = vec![
        num(a),
        num(ra),
        num(gamma.re),
        num(gamma.im),
        num(d.value.re),
        num(d.value.im),
        num(d.mantissa.re),
        num(d.mantissa.im),
        num(d.log_scale),
        num(d.rcond),
    ];
    let (id, header) = schema::DISPERSION;
    let path = write_table(&cfg.output_dir, "dispersion", cfg.format, &Meta::new("dispersion", id, cfg), header, &[row])?;
    Ok(json!({
        "a": a, "ra": ra, "gamma": { "re": gamma.re, "im": gamma.im },
        "d": { "re": d.value.re, "im": d.value.im },
        "log_scale": d.log_scale, "rcond": d.rcond,
        "file": path_str(&path),
    }))
}

fn eigenvalues(cfg: &RunConfig, k: usize) -> CliResult<Value> {
    let p = cfg.params()?;
    let (a, ra) = (cfg.wavenumber()?, cfg.rayleigh()?);
    let b = basic(cfg, &p)?;
    let op = build_operator(a, ra, &p, &b, cfg.ncheb)?;
    let values: Vec<Value> = spectrum(&op, k)?.iter().map(|g| json!({ "re": g.re, "im": g.im })).collect();
    let body = json!({ "a": a, "ra": ra, "ncheb": cfg.ncheb, "eigenvalues": values });
    let path = cfg.output_dir.join("spectrum.json");
    write_json(&path, &Meta::new("spectrum", "spectrum/v1", cfg), body.clone())?;
    Ok(json!({ "spectrum": body, "file": path_str(&path) }))
}

fn branch_rows(branch: &NeutralBranch) -> Vec<Vec<String>> {
    branch
        .samples
        .iter()
        .map(|s| vec![num(s.a), num(s.ra), num(s.omega), branch.kind.as_str().to_string()])
        .collect()
}

fn critical_json(c: &phototherm::CriticalPoint) -> Value {
    json!({
        "a_c": c.a,
        "Ra_c": c.ra,
        "omega_c": c.omega,
        "kind": c.kind.as_str(),
        "period": c.period,
    })
}

fn analysis(cfg: &RunConfig) -> CliResult<phototherm::NeutralAnalysis> {
    let p = cfg.params()?;
    let b = basic(cfg, &p)?;
    Ok(analyze_with(&solver(cfg, &p, &b)?, &cfg.neutral())?)
}

fn neutral(cfg: &RunConfig) -> CliResult<Value> {
    let result = analysis(cfg)?;
    let (id, header) = schema::NEUTRAL;
    let mut files = Vec::new();
    let mut branches = Vec::new();
    let stems = std::iter::once("neutral_stationary".to_string())
        .chain((1..=result.oscillatory.len()).map(|k| format!("neutral_oscillatory_{k}")));
    for (stem, branch) in stems.zip(result.branches()) {
        let path = write_table(&cfg.output_dir, &stem, cfg.format, &Meta::new("neutral", id, cfg), header, &branch_rows(branch))?;
        files.push(path_str(&path));
        branches.push(json!({
            "file": path_str(&path),
            "kind": branch.kind.as_str(),
            "samples": branch.samples.len(),
            "missing": branch.missing,
            "merges": branch.merges.iter().map(|m| json!({ "a": m.a, "ra": m.ra })).collect::<Vec<_>>(),
            "diagnostic": branch.diagnostic,
        }));
    }
    let body = json!({ "branches": branches, "critical": critical_json(&result.critical) });
    let path = cfg.output_dir.join("neutral.json");
    write_json(&path, &Meta::new("neutral", "neutral-summary/v1", cfg), body.clone())?;
    files.push(path_str(&path));
    Ok(json!({ "neutral": body, "files": files }))
}

fn critical(cfg: &RunConfig) -> CliResult<Value> {
    let result = analysis(cfg)?;
    let body = critical_json(&result.critical);
    let path = cfg.output_dir.join("critical.json");
    write_json(&path, &Meta::new("critical", "critical/v1", cfg), body.clone())?;
    Ok(json!({ "critical": body, "file": path_str(&path) }))
}

fn sweep_rows(table: &SweepTable) -> Vec<Vec<String>> {
    table
        .entries
        .iter()
        .map(|e| match &e.critical {
            Ok(c) => vec![
                num(e.value),
                num(c.a),
                num(c.ra),
                num(c.omega),
                c.kind.as_str().to_string(),
                c.period.map_or_else(String::new, num),
                String::new(),
            ],
            Err(msg) => {
                let mut row = vec![num(e.value)];
                row.extend(std::iter::repeat_n(String::new(), 5));
                row.push(msg.clone());
                row
            }
        })
        .collect()
}

fn sweep(cfg: &RunConfig, command: &str) -> CliResult<Value> {
    let p = cfg.params()?;
    let table = if command == "sweep-rt" {
        sweep_rt(&cfg.rt_list, &p, &cfg.neutral())?
    } else {
        sweep_le(&cfg.le_list, &p, &cfg.neutral())?
    };
    let (id, header) = schema::SWEEP;
    let meta = Meta::new(command, id, cfg)
        .with_extra("parameter", json!(table.parameter))
        .with_extra("increasing", json!(table.increasing))
        .with_extra("decreasing", json!(table.decreasing));
    let stem = command.replace('-', "_");
    let path = write_table(&cfg.output_dir, &stem, cfg.format, &meta, header, &sweep_rows(&table))?;
    Ok(json!({
        "parameter": table.parameter,
        "increasing": table.increasing,
        "decreasing": table.decreasing,
        "failures": table.entries.iter().filter(|e| e.critical.is_err()).count(),
        "file": path_str(&path),
    }))
}

/// The mode a `fields` or `phase` run renders.
pub struct SelectedMode {
    pub mode: Eigenmode,
    pub assumptions: Vec<String>,
}

/// Picks the mode from the config:
/// - `a`, `ra` and a nonzero gamma: that neutral or damped mode as given;
/// - `a` and `ra`: the leading root of the dispersion function;
/// - `ra` only: the fastest-growing wavenumber in `[a_lo, a_hi]`;
/// - neither: the critical mode.
pub fn select_mode(cfg: &RunConfig) -> CliResult<SelectedMode> {
    let p = cfg.params()?;
    let b = basic(cfg, &p)?;
    let s = solver(cfg, &p, &b)?;
    let mut assumptions = Vec::new();
    let gamma = Complex64::new(cfg.gamma_re, cfg.gamma_im);
    let mp = match (cfg.a, cfg.ra.filter(|r| *r > 0.0)) {
        (Some(a), Some(ra)) if gamma != Complex64::new(0.0, 0.0) => ModeProblem::new(a, ra, gamma),
        (Some(a), Some(ra)) => ModeProblem::new(a, ra, s.leading_growth_rate(a, ra)?),
        (None, Some(ra)) => {
            let m = most_unstable_wavenumber(&s, ra, (cfg.a_lo, cfg.a_hi), cfg.scan_points)?;
            assumptions.push(WAVELENGTH_ASSUMPTION.to_string());
            ModeProblem::new(m.a, ra, m.gamma)
        }
        (Some(_), None) => return Err(CliError::Config("--a needs --ra".into())),
        (None, None) => {
            let c = analyze_with(&s, &cfg.neutral())?.critical;
            ModeProblem::oscillatory(c.a, c.ra, c.omega)
        }
    };
    let mode = extract_eigenmode(&s, &mp)?;
    Ok(SelectedMode { mode, assumptions })
}

fn mode_json(m: &Eigenmode) -> Value {
    json!({
        "a": m.a,
        "Ra": m.ra,
        "gamma": { "re": m.gamma.re, "im": m.gamma.im },
        "lambda": m.wavelength(),
    })
}

fn fields(cfg: &RunConfig) -> CliResult<Value> {
    let sel = select_mode(cfg)?;
    let frames = render_frames(&sel.mode, &cfg.times, cfg.nx, cfg.nz)?;
    let (id, header) = schema::FIELD;
    let mut meta = Meta::new("fields", id, cfg);
    for a in &sel.assumptions {
        meta = meta.with_assumption(a.clone());
    }
    let mut files = Vec::new();
    for (k, f) in frames.iter().enumerate() {
        for (name, grid) in [("psi", &f.psi), ("w", &f.w), ("n", &f.n), ("temperature", &f.temperature)] {
            let rows: Vec<Vec<String>> = f
                .x3
                .iter()
                .zip(grid)
                .flat_map(|(z, row)| f.x1.iter().zip(row).map(move |(x, v)| vec![num(*x), num(*z), num(*v)]))
                .collect();
            let frame_meta = meta.clone().with_extra("t", json!(f.t)).with_extra("field", json!(name));
            let path = write_table(&cfg.output_dir, &format!("fields_{k:03}_{name}"), cfg.format, &frame_meta, header, &rows)?;
            files.push(path_str(&path));
        }
    }
    let mut body = mode_json(&sel.mode);
    body["times"] = json!(cfg.times);
    body["files"] = json!(files);
    let path = cfg.output_dir.join("fields.json");
    let mut manifest_meta = Meta::new("fields", "fields-manifest/v1", cfg);
    manifest_meta.assumptions = meta.assumptions.clone();
    write_json(&path, &manifest_meta, body.clone())?;
    Ok(json!({ "manifest": path_str(&path), "mode": mode_json(&sel.mode), "files": files.len() }))
}

fn phase(cfg: &RunConfig) -> CliResult<Value> {
    let sel = select_mode(cfg)?;
    let m = &sel.mode;
    let probe = (cfg.probe_x1.unwrap_or(default_probe(m).0), cfg.probe_x3);
    let times = linspace(0.0, cfg.t_end, cfg.t_samples);
    let series = time_series(m, probe, &times)?;
    let rows: Vec<Vec<String>> = series.iter().map(|q| vec![num(q.t), num(q.temperature), num(q.rate)]).collect();
    let (id, header) = schema::PHASE;
    let mut meta = Meta::new("phase", id, cfg).with_extra("probe", json!([probe.0, probe.1])).with_extra("mode", mode_json(m));
    for a in &sel.assumptions {
        meta = meta.with_assumption(a.clone());
    }
    let path = write_table(&cfg.output_dir, "phase", cfg.format, &meta, header, &rows)?;
    let mut summary = mode_json(m);
    summary["period"] = json!((m.gamma.im.abs() > 0.0).then(|| TAU / m.gamma.im.abs()));
    summary["probe"] = json!([probe.0, probe.1]);
    summary["file"] = json!(path_str(&path));
    Ok(summary)
}

/// Parses arguments, resolves the config and runs the command.
pub fn execute(cli: &Cli) -> CliResult<Value> {
    let cfg = RunConfig::resolve(&cli.overrides)?;
    run(&cli.command, &cfg)
}
