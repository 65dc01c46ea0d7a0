//! Subcommand implementations. Each one computes first and then writes its
//! files, so the computations are usable without touching the disk.

use crate::config::{ConfigError, ExperimentConfig, InitialKind, SnapshotFormat};
use crate::plot::{line_chart, Series};
use breather_core::analysis::{correlation_timeseries, correlation_trend, envelope_burst, raw_burst, SnapshotAnalysis};
use breather_core::analytic::{solve_b_correction, Breather, HarmonicProfiles, ZetaGrid};
use breather_core::kink::{kink_initial_state, kink_profile, KinkProfile};
use breather_core::solver::{init_from_solution, run, FieldState, Grid1D, RunOutput, SimConfig};
use rayon::prelude::*;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numeric(_) => 2,
            CliError::Config(_) | CliError::Io { .. } => 1,
        }
    }
}

fn numeric(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

/// Buffered text file that reports its path on failure.
struct Out {
    path: PathBuf,
    w: BufWriter<File>,
}

impl Out {
    fn create(path: PathBuf) -> Result<Self, CliError> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| CliError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        let f = File::create(&path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(Self {
            path,
            w: BufWriter::new(f),
        })
    }

    fn line(&mut self, s: impl std::fmt::Display) -> Result<(), CliError> {
        writeln!(self.w, "{s}").map_err(|source| CliError::Io {
            path: self.path.clone(),
            source,
        })
    }

    fn finish(mut self) -> Result<(), CliError> {
        self.w.flush().map_err(|source| CliError::Io {
            path: self.path.clone(),
            source,
        })
    }
}

fn write_text(path: PathBuf, text: &str) -> Result<(), CliError> {
    let mut out = Out::create(path)?;
    out.w.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: out.path.clone(),
        source,
    })?;
    out.finish()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the normalized config and a metadata file. Timestamps live only in
/// the metadata file so every other output is reproducible byte for byte.
fn write_provenance(cfg: &ExperimentConfig, dir: &Path, command: &str) -> Result<(), CliError> {
    write_text(dir.join("resolved.cfg"), &cfg.to_toml())?;
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    write_text(
        dir.join("metadata.toml"),
        &format!(
            "command = \"{command}\"\nversion = \"{}\"\ncreated_unix = {secs}\n",
            env!("CARGO_PKG_VERSION")
        ),
    )
}

/// Reference solution positioned at the configured launch point.
#[derive(Debug, Clone, Copy)]
pub struct Reference {
    pub breather: Breather,
    pub x0: f64,
}

impl Reference {
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.breather.eval(x - self.x0, t)
    }
}

pub struct Simulation {
    pub config: ExperimentConfig,
    pub grid: Grid1D,
    pub reference: Option<Reference>,
    pub output: RunOutput,
}

fn initial_state(cfg: &ExperimentConfig, grid: &Grid1D, reference: Option<Reference>) -> Result<FieldState, CliError> {
    let dt = cfg.grid.dt;
    match cfg.initial.kind {
        InitialKind::Zero => init_from_solution(|_, _| 0.0, grid, dt).map_err(numeric),
        InitialKind::Kink => kink_initial_state(cfg.model.b, cfg.initial.v, cfg.initial.x0, grid, dt).map_err(numeric),
        InitialKind::SmallAmplitude | InitialKind::SgBreather => {
            let r = reference.expect("breather initial data has a reference");
            init_from_solution(|x, t| r.eval(x, t), grid, dt).map_err(numeric)
        }
    }
}

/// Runs the configured simulation without writing anything.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Simulation, CliError> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let reference = cfg.reference()?.map(|breather| Reference {
        breather,
        x0: cfg.initial.x0,
    });
    let sim = SimConfig {
        model: cfg.model()?,
        grid,
        dt: cfg.grid.dt,
        t_end: cfg.grid.t_end,
        boundary: cfg.grid.boundary.into(),
        snapshot_every: cfg.snapshot_every()?,
        energy_every: cfg.energy_every()?,
        probes: cfg.grid.probes.clone(),
    };
    // the CFL guard must fire before any initial data is built
    sim.validate().map_err(numeric)?;
    let initial = initial_state(cfg, &grid, reference)?;
    let output = run(&sim, initial).map_err(numeric)?;
    Ok(Simulation {
        config: cfg.clone(),
        grid,
        reference,
        output,
    })
}

fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t:09.3}.csv")
}

fn write_snapshots(sim: &Simulation, dir: &Path) -> Result<(), CliError> {
    let xs = sim.grid.points();
    let overlay = sim.config.output.overlay.then_some(sim.reference).flatten();
    match sim.config.output.snapshot_format {
        SnapshotFormat::PerSnapshot => {
            for s in &sim.output.snapshots {
                let mut out = Out::create(dir.join("snapshots").join(snapshot_name(s.t)))?;
                match overlay {
                    Some(r) => {
                        out.line("x,u,u_ref")?;
                        for (x, u) in xs.iter().zip(&s.u) {
                            out.line(format_args!("{x},{u},{}", r.eval(*x, s.t)))?;
                        }
                    }
                    None => {
                        out.line("x,u")?;
                        for (x, u) in xs.iter().zip(&s.u) {
                            out.line(format_args!("{x},{u}"))?;
                        }
                    }
                }
                out.finish()?;
            }
        }
        SnapshotFormat::Wide => {
            let mut out = Out::create(dir.join("snapshots.csv"))?;
            let header: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
            out.line(format_args!("t,{}", header.join(",")))?;
            for s in &sim.output.snapshots {
                let row: Vec<String> = s.u.iter().map(|u| u.to_string()).collect();
                out.line(format_args!("{},{}", s.t, row.join(",")))?;
            }
            out.finish()?;
            if let Some(r) = overlay {
                let mut out = Out::create(dir.join("snapshots_ref.csv"))?;
                out.line(format_args!("t,{}", header.join(",")))?;
                for s in &sim.output.snapshots {
                    let row: Vec<String> = xs.iter().map(|&x| r.eval(x, s.t).to_string()).collect();
                    out.line(format_args!("{},{}", s.t, row.join(",")))?;
                }
                out.finish()?;
            }
        }
    }
    Ok(())
}

/// Pulse passage at one probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSummary {
    pub x: f64,
    pub peak: f64,
    pub start: Option<f64>,
    pub end: Option<f64>,
    pub duration: Option<f64>,
    pub raw_duration: Option<f64>,
}

pub fn probe_summaries(sim: &Simulation) -> Vec<ProbeSummary> {
    let fraction = sim.config.analysis.burst_fraction;
    sim.output
        .probes
        .iter()
        .map(|p| {
            let env = envelope_burst(&p.t, &p.u, fraction).ok();
            let raw = raw_burst(&p.t, &p.u, fraction).ok().flatten();
            ProbeSummary {
                x: p.x,
                peak: p.u.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                start: env.map(|b| b.start),
                end: env.map(|b| b.end),
                duration: env.map(|b| b.duration()),
                raw_duration: raw.map(|b| b.duration()),
            }
        })
        .collect()
}

fn harmonics(sim: &Simulation) -> Result<Option<HarmonicProfiles>, CliError> {
    match sim.reference.map(|r| r.breather) {
        Some(Breather::SmallAmplitude { params, beta }) if sim.config.output.harmonics && beta > 0.0 => {
            solve_b_correction(params.omega(), beta, &ZetaGrid::default())
                .map(Some)
                .map_err(numeric)
        }
        _ => Ok(None),
    }
}

fn write_simulation(sim: &Simulation, dir: &Path) -> Result<(), CliError> {
    write_snapshots(sim, dir)?;

    let e0 = sim.output.energy.first().map(|e| e.energy).unwrap_or(0.0);
    let mut out = Out::create(dir.join("energy.csv"))?;
    out.line("t,energy,rel_drift")?;
    for e in &sim.output.energy {
        let drift = if e0 != 0.0 { (e.energy - e0) / e0 } else { 0.0 };
        out.line(format_args!("{},{},{}", e.t, e.energy, drift))?;
    }
    out.finish()?;

    if !sim.output.probes.is_empty() {
        let mut out = Out::create(dir.join("probes.csv"))?;
        out.line("x,t,u")?;
        for p in &sim.output.probes {
            for (t, u) in p.t.iter().zip(&p.u) {
                out.line(format_args!("{},{t},{u}", p.x))?;
            }
        }
        out.finish()?;
        let mut out = Out::create(dir.join("pulse.csv"))?;
        out.line("x,peak,start,end,duration,raw_duration")?;
        for s in probe_summaries(sim) {
            out.line(format_args!(
                "{},{},{},{},{},{}",
                s.x,
                s.peak,
                opt(s.start),
                opt(s.end),
                opt(s.duration),
                opt(s.raw_duration)
            ))?;
        }
        out.finish()?;
    }

    if let Some(h) = harmonics(sim)? {
        let mut out = Out::create(dir.join("harmonics.csv"))?;
        out.line("zeta,A,B")?;
        for ((z, a), b) in h.zeta.iter().zip(&h.a).zip(&h.b) {
            out.line(format_args!("{z},{a},{b}"))?;
        }
        out.finish()?;
    }

    if sim.config.output.plots {
        let series: Vec<Series> = sim
            .output
            .snapshots
            .iter()
            .map(|s| Series {
                label: "",
                points: sim.grid.points().into_iter().zip(s.u.iter().copied()).collect(),
            })
            .collect();
        write_text(
            dir.join("snapshots.svg"),
            &line_chart("u(x) at stored times", "x", "u", &series),
        )?;
        for p in &sim.output.probes {
            let svg = line_chart(
                &format!("u(t) at x = {}", p.x),
                "t",
                "u",
                &[Series {
                    label: "u",
                    points: p.t.iter().copied().zip(p.u.iter().copied()).collect(),
                }],
            );
            write_text(dir.join(format!("probe_x{:.3}.svg", p.x)), &svg)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSummary {
    pub dir: PathBuf,
    pub snapshots: usize,
    pub max_energy_drift: f64,
    pub probes: Vec<ProbeSummary>,
}

pub fn max_energy_drift(out: &RunOutput) -> f64 {
    let e0 = out.energy.first().map(|e| e.energy).unwrap_or(0.0);
    if e0 == 0.0 {
        return 0.0;
    }
    out.energy
        .iter()
        .map(|e| ((e.energy - e0) / e0).abs())
        .fold(0.0, f64::max)
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<SimulateSummary, CliError> {
    let sim = simulate(cfg)?;
    let dir = cfg.output_dir();
    write_provenance(cfg, &dir, "simulate")?;
    write_simulation(&sim, &dir)?;
    Ok(SimulateSummary {
        dir,
        snapshots: sim.output.snapshots.len(),
        max_energy_drift: max_energy_drift(&sim.output),
        probes: probe_summaries(&sim),
    })
}

pub struct Comparison {
    pub simulation: Simulation,
    pub epsilon: f64,
    pub series: Vec<SnapshotAnalysis>,
}

impl Comparison {
    /// Last successful correlation record.
    pub fn final_k(&self) -> Option<(f64, f64)> {
        self.series
            .iter()
            .rev()
            .find_map(|a| a.correlation.as_ref().ok().map(|r| (r.t, r.k_corr)))
    }
}

/// Simulation plus the envelope and correlation analysis of every snapshot.
pub fn compare(cfg: &ExperimentConfig) -> Result<Comparison, CliError> {
    let reference = cfg.reference()?.ok_or_else(|| ConfigError::Invalid {
        key: "initial.kind",
        message: "compare needs breather initial data (small-amplitude or sg-breather)".into(),
    })?;
    let simulation = simulate(cfg)?;
    let initial_peak = simulation.output.snapshots[0]
        .u
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let epsilon = cfg
        .analysis
        .epsilon
        .unwrap_or(breather_core::analysis::DEFAULT_EPSILON_FRACTION * initial_peak)
        .max(f64::MIN_POSITIVE);
    let x0 = cfg.initial.x0;
    let series = correlation_timeseries(
        &simulation.output.snapshots,
        &simulation.grid,
        |x, t| reference.eval(x - x0, t),
        epsilon,
        &cfg.correlation_settings(),
    );
    Ok(Comparison {
        simulation,
        epsilon,
        series,
    })
}

fn write_comparison(cmp: &Comparison, dir: &Path) -> Result<(), CliError> {
    let cfg = &cmp.simulation.config;
    let settings = cfg.correlation_settings();

    let mut out = Out::create(dir.join("correlation.csv"))?;
    out.line("t,x_max,K_corr,N,seed")?;
    for a in &cmp.series {
        match &a.correlation {
            Ok(r) => out.line(format_args!("{},{},{},{},{}", r.t, r.x_max, r.k_corr, r.n, r.seed))?,
            Err(_) => out.line(format_args!(
                "{},{},,{},{}",
                a.t,
                opt(a.x_max),
                settings.samples,
                settings.seed
            ))?,
        }
    }
    out.finish()?;

    let mut out = Out::create(dir.join("extrema.csv"))?;
    out.line("t,x,amp")?;
    for a in &cmp.series {
        for p in &a.extrema {
            out.line(format_args!("{},{},{}", a.t, p.x, p.amp))?;
        }
    }
    out.finish()?;

    let mut out = Out::create(dir.join("envelope.csv"))?;
    out.line("t,x,env")?;
    for a in &cmp.series {
        if let Some(env) = &a.envelope {
            for (x, e) in env.samples(cfg.analysis.envelope_points) {
                out.line(format_args!("{},{x},{e}", a.t))?;
            }
        }
    }
    out.finish()?;

    if cfg.output.plots {
        let k: Vec<(f64, f64)> = cmp
            .series
            .iter()
            .map(|a| (a.t, a.correlation.as_ref().map(|r| r.k_corr).unwrap_or(f64::NAN)))
            .collect();
        write_text(
            dir.join("correlation.svg"),
            &line_chart(
                "correlation with the analytic breather",
                "t",
                "K_corr",
                &[Series {
                    label: "K_corr",
                    points: k,
                }],
            ),
        )?;
        if let Some((a, s)) = cmp
            .series
            .iter()
            .zip(&cmp.simulation.output.snapshots)
            .rev()
            .find(|(a, _)| a.envelope.is_some())
        {
            let env = a.envelope.as_ref().expect("filtered above");
            let (lo, hi) = env.domain();
            let grid = &cmp.simulation.grid;
            let abs_u: Vec<(f64, f64)> = grid
                .points()
                .into_iter()
                .zip(&s.u)
                .filter(|(x, _)| *x >= lo && *x <= hi)
                .map(|(x, u)| (x, u.abs()))
                .collect();
            let svg = line_chart(
                &format!("|u| and its envelope at t = {}", a.t),
                "x",
                "|u|",
                &[
                    Series {
                        label: "|u|",
                        points: abs_u,
                    },
                    Series {
                        label: "envelope",
                        points: env.samples(cfg.analysis.envelope_points),
                    },
                ],
            );
            write_text(dir.join("envelope.svg"), &svg)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareSummary {
    pub dir: PathBuf,
    pub final_t: Option<f64>,
    pub final_k: Option<f64>,
    pub trend: Option<f64>,
    pub gaps: usize,
}

fn compare_into(cfg: &ExperimentConfig, dir: &Path) -> Result<CompareSummary, CliError> {
    let cmp = compare(cfg)?;
    write_provenance(cfg, dir, "compare")?;
    write_simulation(&cmp.simulation, dir)?;
    write_comparison(&cmp, dir)?;
    let last = cmp.final_k();
    Ok(CompareSummary {
        dir: dir.to_path_buf(),
        final_t: last.map(|(t, _)| t),
        final_k: last.map(|(_, k)| k),
        trend: correlation_trend(&cmp.series),
        gaps: cmp.series.iter().filter(|a| a.correlation.is_err()).count(),
    })
}

pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<CompareSummary, CliError> {
    compare_into(cfg, &cfg.output_dir())
}

pub fn kink(cfg: &ExperimentConfig) -> Result<KinkProfile, CliError> {
    cfg.validate()?;
    let k = &cfg.kink;
    kink_profile(cfg.model.b, k.xi_max, k.points, k.tol).map_err(numeric)
}

pub fn cmd_kink(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let profile = kink(cfg)?;
    let dir = cfg.output_dir();
    write_provenance(cfg, &dir, "kink")?;
    let path = dir.join("kink_profile.csv");
    let mut out = Out::create(path.clone())?;
    out.line("xi,u")?;
    for (xi, u) in profile.xi.iter().zip(&profile.u) {
        out.line(format_args!("{xi},{u}"))?;
    }
    out.finish()?;
    if cfg.output.plots {
        let svg = line_chart(
            &format!("kink profile, b = {}", cfg.model.b),
            "xi",
            "u",
            &[Series {
                label: "u",
                points: profile.xi.iter().copied().zip(profile.u.iter().copied()).collect(),
            }],
        );
        write_text(dir.join("kink_profile.svg"), &svg)?;
    }
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub omega: f64,
    pub b: f64,
    pub v: f64,
    pub k_final: Option<f64>,
    pub status: String,
}

/// Runs every sweep point through the compare pipeline in a bounded pool.
/// A failing point is recorded in the summary and does not stop the others.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    cfg.validate()?;
    let points = cfg.sweep_points()?;
    let dir = cfg.output_dir();
    write_provenance(cfg, &dir, "sweep")?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.sweep.workers)
        .build()
        .map_err(|e| CliError::Numeric(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let result = compare_into(p, &dir.join(format!("point_{i:03}")));
                let (k_final, status) = match result {
                    Ok(s) => (s.final_k, "ok".to_string()),
                    Err(e) => (None, e.to_string().replace([',', '\n'], ";")),
                };
                SweepRow {
                    omega: p.initial.omega,
                    b: p.model.b,
                    v: p.initial.v,
                    k_final,
                    status,
                }
            })
            .collect()
    });
    let mut out = Out::create(dir.join("summary.csv"))?;
    out.line("omega,b,v,K_corr_final,status")?;
    for r in &rows {
        out.line(format_args!(
            "{},{},{},{},{}",
            r.omega,
            r.b,
            r.v,
            opt(r.k_final),
            r.status
        ))?;
    }
    out.finish()?;
    Ok(rows)
}
