//! Experiment configuration: TOML with one table per concern.

use breather_core::analysis::{CorrelationSettings, DEFAULT_HALF_WIDTH, DEFAULT_SAMPLES};
use breather_core::analytic::{Breather, BreatherParams};
use breather_core::solver::{pulse_domain, Boundary, Grid1D};
use breather_core::NonlinearityModel;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Environment variable that relocates relative output directories.
pub const OUT_ROOT_ENV: &str = "BREATHER_OUT_ROOT";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("bad override `{0}`: expected key=value")]
    Override(String),
    #[error("{key}: {message}")]
    Invalid { key: &'static str, message: String },
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    SineGordon,
    Graphene,
    Cubic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub kind: ModelKind,
    /// Miniband ratio of the superlattice model.
    pub b: f64,
    /// Cubic coefficient of the cubic model.
    pub beta: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelKind::Graphene,
            b: 0.9,
            beta: 1.0 / 6.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// Leading-order small-amplitude breather of the configured model.
    SmallAmplitude,
    /// Exact sine-Gordon traveling breather.
    SgBreather,
    /// Superlattice kink (needs the graphene model).
    Kink,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub kind: InitialKind,
    pub omega: f64,
    pub v: f64,
    /// Launch position of the pulse centre.
    pub x0: f64,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            kind: InitialKind::SmallAmplitude,
            omega: 0.97,
            v: 0.9,
            x0: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    Dirichlet,
    Periodic,
    Fixed,
}

impl From<BoundaryKind> for Boundary {
    fn from(b: BoundaryKind) -> Self {
        match b {
            BoundaryKind::Dirichlet => Boundary::Dirichlet0,
            BoundaryKind::Periodic => Boundary::Periodic,
            BoundaryKind::Fixed => Boundary::Fixed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Left end; when either end is missing the domain is sized from
    /// `x0`, `v`, `t_end` and `margin`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    pub margin: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
    pub boundary: BoundaryKind,
    /// Time between stored snapshots; a whole number of steps.
    pub snapshot_interval: f64,
    /// Time between energy records; a whole number of steps.
    pub energy_interval: f64,
    /// Positions recorded at every step.
    pub probes: Vec<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            x_min: Some(-50.0),
            x_max: Some(300.0),
            margin: 50.0,
            dx: 0.05,
            dt: 0.025,
            t_end: 250.0,
            boundary: BoundaryKind::Dirichlet,
            snapshot_interval: 25.0,
            energy_interval: 1.0,
            probes: vec![50.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// Extrema threshold; defaults to 1% of the initial peak.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub half_width: f64,
    pub samples: usize,
    pub seed: u64,
    /// Level, relative to the peak, that delimits a pulse at a probe.
    pub burst_fraction: f64,
    /// Envelope samples written per snapshot.
    pub envelope_points: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            epsilon: None,
            half_width: DEFAULT_HALF_WIDTH,
            samples: DEFAULT_SAMPLES,
            seed: 1,
            burst_fraction: 0.05,
            envelope_points: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnapshotFormat {
    /// One `x,u[,u_ref]` file per snapshot.
    PerSnapshot,
    /// A single table with one row per snapshot.
    Wide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub snapshot_format: SnapshotFormat,
    /// Add the analytic reference next to each snapshot.
    pub overlay: bool,
    pub plots: bool,
    /// Write the first and third harmonic envelopes.
    pub harmonics: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            snapshot_format: SnapshotFormat::PerSnapshot,
            overlay: true,
            plots: false,
            harmonics: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Empty lists fall back to the base value.
    pub omega: Vec<f64>,
    pub b: Vec<f64>,
    pub v: Vec<f64>,
    pub max_points: usize,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            omega: Vec::new(),
            b: Vec::new(),
            v: Vec::new(),
            max_points: 64,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KinkSection {
    pub xi_max: f64,
    pub points: usize,
    pub tol: f64,
}

impl Default for KinkSection {
    fn default() -> Self {
        Self {
            xi_max: 20.0,
            points: 2001,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub initial: InitialSection,
    pub grid: GridSection,
    pub analysis: AnalysisSection,
    pub output: OutputSection,
    pub sweep: SweepSection,
    pub kink: KinkSection,
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key just written"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `section.key=value` to a parsed document. Values are read as TOML
/// and fall back to bare strings.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(spec.to_string()))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(spec.to_string()));
    }
    let mut node = table;
    for part in &path[..path.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::Override(spec.to_string()))?;
    }
    node.insert(path[path.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        // straight from the text when possible, so errors carry line numbers
        let cfg: Self = if overrides.is_empty() {
            toml::from_str(text)
        } else {
            table.try_into()
        }
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                path: p.to_path_buf(),
                source,
            })?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn model(&self) -> Result<NonlinearityModel, ConfigError> {
        let m = match self.model.kind {
            ModelKind::SineGordon => NonlinearityModel::SineGordon,
            ModelKind::Graphene => NonlinearityModel::GrapheneSl { b: self.model.b },
            ModelKind::Cubic => NonlinearityModel::CubicKg { beta: self.model.beta },
        };
        m.validate().map_err(|e| {
            let key = match self.model.kind {
                ModelKind::Cubic => "model.beta",
                _ => "model.b",
            };
            invalid(key, e.to_string())
        })?;
        Ok(m)
    }

    pub fn params(&self) -> Result<BreatherParams, ConfigError> {
        BreatherParams::new(self.initial.omega, self.initial.v).map_err(|e| {
            let key = if (0.0..1.0).contains(&self.initial.omega) && self.initial.omega > 0.0 {
                "initial.v"
            } else {
                "initial.omega"
            };
            invalid(key, e.to_string())
        })
    }

    /// Analytic solution the run is compared against, shifted to `x0`.
    pub fn reference(&self) -> Result<Option<Breather>, ConfigError> {
        let model = self.model()?;
        Ok(match self.initial.kind {
            InitialKind::SmallAmplitude => Some(Breather::SmallAmplitude {
                params: self.params()?,
                beta: model.beta(),
            }),
            InitialKind::SgBreather => Some(Breather::SgTraveling(self.params()?)),
            InitialKind::Kink | InitialKind::Zero => None,
        })
    }

    pub fn grid(&self) -> Result<Grid1D, ConfigError> {
        let g = &self.grid;
        let (auto_min, auto_max) = pulse_domain(self.initial.x0, self.initial.v, g.t_end, g.margin);
        let x_min = g.x_min.unwrap_or(auto_min);
        let x_max = g.x_max.unwrap_or(auto_max);
        if !(x_max > x_min) {
            return Err(invalid("grid.x_max", format!("must exceed x_min ({x_max} <= {x_min})")));
        }
        Grid1D::with_spacing(x_min, x_max, g.dx).map_err(|e| invalid("grid.dx", e.to_string()))
    }

    pub fn correlation_settings(&self) -> CorrelationSettings {
        CorrelationSettings {
            half_width: self.analysis.half_width,
            samples: self.analysis.samples,
            seed: self.analysis.seed,
        }
    }

    fn steps_for(&self, key: &'static str, interval: f64) -> Result<usize, ConfigError> {
        let steps = interval / self.grid.dt;
        let whole = steps.round();
        if !(whole >= 1.0) || (steps - whole).abs() > 1e-6 * whole.max(1.0) {
            return Err(invalid(
                key,
                format!("{interval} is not a positive multiple of grid.dt = {}", self.grid.dt),
            ));
        }
        Ok(whole as usize)
    }

    pub fn snapshot_every(&self) -> Result<usize, ConfigError> {
        self.steps_for("grid.snapshot_interval", self.grid.snapshot_interval)
    }

    pub fn energy_every(&self) -> Result<usize, ConfigError> {
        self.steps_for("grid.energy_interval", self.grid.energy_interval)
    }

    /// Output directory, placed under the output-root variable when relative.
    pub fn output_dir(&self) -> PathBuf {
        let dir = &self.output.dir;
        match std::env::var_os(OUT_ROOT_ENV) {
            Some(root) if dir.is_relative() => Path::new(&root).join(dir),
            _ => dir.clone(),
        }
    }

    /// Checks everything that can be checked without running. The CFL bound
    /// is left to the solver so it reports as a numerical failure.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model()?;
        if !matches!(self.initial.kind, InitialKind::Zero) {
            self.params()?;
        }
        if matches!(self.initial.kind, InitialKind::Kink) && self.model.kind != ModelKind::Graphene {
            return Err(invalid(
                "initial.kind",
                "kink initial data needs model.kind = \"graphene\"",
            ));
        }
        if !self.initial.x0.is_finite() {
            return Err(invalid("initial.x0", "must be finite"));
        }
        let g = &self.grid;
        if !(g.dt > 0.0 && g.dt.is_finite()) {
            return Err(invalid("grid.dt", format!("must be > 0, got {}", g.dt)));
        }
        if !(g.t_end > 0.0 && g.t_end.is_finite()) {
            return Err(invalid("grid.t_end", format!("must be > 0, got {}", g.t_end)));
        }
        if !(g.margin >= 0.0) {
            return Err(invalid("grid.margin", "must be >= 0"));
        }
        self.grid()?;
        self.snapshot_every()?;
        self.energy_every()?;
        let a = &self.analysis;
        if let Some(eps) = a.epsilon {
            if !(eps > 0.0) {
                return Err(invalid("analysis.epsilon", format!("must be > 0, got {eps}")));
            }
        }
        if !(a.half_width > 0.0) {
            return Err(invalid("analysis.half_width", "must be > 0"));
        }
        if a.samples < 2 {
            return Err(invalid("analysis.samples", "must be >= 2"));
        }
        if !(a.burst_fraction > 0.0 && a.burst_fraction < 1.0) {
            return Err(invalid("analysis.burst_fraction", "must lie in (0, 1)"));
        }
        if a.envelope_points < 2 {
            return Err(invalid("analysis.envelope_points", "must be >= 2"));
        }
        let k = &self.kink;
        if !(k.xi_max > 0.0) {
            return Err(invalid("kink.xi_max", "must be > 0"));
        }
        if k.points < 3 {
            return Err(invalid("kink.points", "must be >= 3"));
        }
        if !(k.tol > 0.0) {
            return Err(invalid("kink.tol", "must be > 0"));
        }
        if self.sweep.max_points == 0 {
            return Err(invalid("sweep.max_points", "must be >= 1"));
        }
        Ok(())
    }

    /// Cartesian product of the sweep lists, each point a full config.
    pub fn sweep_points(&self) -> Result<Vec<ExperimentConfig>, ConfigError> {
        let or_base = |list: &[f64], base: f64| if list.is_empty() { vec![base] } else { list.to_vec() };
        let omegas = or_base(&self.sweep.omega, self.initial.omega);
        let bs = or_base(&self.sweep.b, self.model.b);
        let vs = or_base(&self.sweep.v, self.initial.v);
        let count = omegas.len() * bs.len() * vs.len();
        if count > self.sweep.max_points {
            return Err(invalid(
                "sweep.max_points",
                format!("sweep has {count} points, cap is {}", self.sweep.max_points),
            ));
        }
        let mut out = Vec::with_capacity(count);
        for &omega in &omegas {
            for &b in &bs {
                for &v in &vs {
                    let mut c = self.clone();
                    c.initial.omega = omega;
                    c.model.b = b;
                    c.initial.v = v;
                    c.sweep = SweepSection::default();
                    out.push(c);
                }
            }
        }
        Ok(out)
    }
}
