//! Envelope and correlation diagnostics for simulated pulses.
//!
//! A snapshot is reduced to the local maxima of `|u|`, a monotone cubic
//! envelope through them, the envelope peak `x_max`, and the Pearson
//! correlation between the field and a reference solution at random points
//! of the window `[x_max - L, x_max + L]`.

use crate::numerics::pchip::Pchip;
use crate::numerics::stats::{linear_fit, pearson, sample_std};
use crate::solver::{Grid1D, Snapshot};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Pulse half-width used for the correlation window.
pub const DEFAULT_HALF_WIDTH: f64 = 10.0;
pub const DEFAULT_SAMPLES: usize = 200;
/// Extrema threshold as a fraction of the initial peak.
pub const DEFAULT_EPSILON_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("epsilon must be > 0, got {0}")]
    InvalidEpsilon(f64),
    #[error("no extrema of |u| above epsilon at t = {t}")]
    NoExtremaFound { t: f64 },
    #[error("envelope needs at least {needed} extrema, found {found}")]
    TooFewExtrema { found: usize, needed: usize },
    #[error("window [{lo}, {hi}] leaves the grid")]
    WindowOutsideGrid { lo: f64, hi: f64 },
    #[error("window half-width must be > 0, got {0}")]
    InvalidHalfWidth(f64),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample vector has no variance")]
    DegenerateVariance,
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub amp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremaSet {
    pub t: f64,
    pub points: Vec<Extremum>,
}

/// Local maxima of `|values|` on the uniform lattice `x0 + i h`, refined by
/// the parabola through each maximum and its two neighbours. A sample counts
/// when it beats its left neighbour and is not beaten by its right one, so a
/// flat top yields a single point.
pub fn find_extrema_uniform(values: &[f64], x0: f64, h: f64, epsilon: f64) -> Result<Vec<Extremum>, AnalysisError> {
    if !(epsilon > 0.0) {
        return Err(AnalysisError::InvalidEpsilon(epsilon));
    }
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (a, b, c) = (values[i - 1].abs(), values[i].abs(), values[i + 1].abs());
        if !(b > epsilon && b > a && b >= c) {
            continue;
        }
        let curv = a - 2.0 * b + c;
        let offset = if curv < 0.0 {
            (0.5 * (a - c) / curv).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        out.push(Extremum {
            x: x0 + (i as f64 + offset) * h,
            amp: b - 0.25 * (a - c) * offset,
        });
    }
    Ok(out)
}

pub fn find_extrema(u: &[f64], grid: &Grid1D, t: f64, epsilon: f64) -> Result<ExtremaSet, AnalysisError> {
    if u.len() != grid.nx() {
        return Err(AnalysisError::LengthMismatch(u.len(), grid.nx()));
    }
    let points = find_extrema_uniform(u, grid.x_min(), grid.dx(), epsilon)?;
    if points.is_empty() {
        return Err(AnalysisError::NoExtremaFound { t });
    }
    Ok(ExtremaSet { t, points })
}

/// Monotone cubic interpolant through the extrema of `|u|`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeModel {
    pub t: f64,
    interp: Pchip,
}

pub const MIN_ENVELOPE_KNOTS: usize = 4;

pub fn envelope(extrema: &ExtremaSet) -> Result<EnvelopeModel, AnalysisError> {
    let n = extrema.points.len();
    if n < MIN_ENVELOPE_KNOTS {
        return Err(AnalysisError::TooFewExtrema {
            found: n,
            needed: MIN_ENVELOPE_KNOTS,
        });
    }
    let x = extrema.points.iter().map(|p| p.x).collect();
    let y = extrema.points.iter().map(|p| p.amp).collect();
    let interp = Pchip::new(x, y).expect("extrema are strictly increasing in x");
    Ok(EnvelopeModel { t: extrema.t, interp })
}

impl EnvelopeModel {
    /// Envelope value, held constant outside the knot span and never negative.
    pub fn eval(&self, x: f64) -> f64 {
        self.interp.eval(x).max(0.0)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.interp.domain()
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        self.interp.knots()
    }

    /// Envelope sampled at `n` evenly spaced points of its domain.
    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        let (lo, hi) = self.domain();
        let n = n.max(2);
        (0..n)
            .map(|i| {
                let x = (lo + (hi - lo) * i as f64 / (n - 1) as f64).min(hi);
                (x, self.eval(x))
            })
            .collect()
    }
}

/// Position of the envelope maximum, by golden-section search over the knot
/// intervals adjacent to the largest knot.
pub fn locate_max(env: &EnvelopeModel) -> f64 {
    const TOL: f64 = 1e-6;
    let (xs, ys) = env.knots();
    let k = ys
        .iter()
        .enumerate()
        .fold(0, |best, (i, &y)| if y > ys[best] { i } else { best });
    let mut a = xs[k.saturating_sub(1)];
    let mut b = xs[(k + 1).min(xs.len() - 1)];
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (env.eval(c), env.eval(d));
    while b - a > TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = env.eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = env.eval(d);
        }
    }
    let x = 0.5 * (a + b);
    // a flat-topped bracket can leave the search off the best knot
    if env.eval(xs[k]) > env.eval(x) {
        xs[k]
    } else {
        x
    }
}

/// Window and sampling parameters for the correlation coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSettings {
    pub half_width: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CorrelationSettings {
    fn default() -> Self {
        Self {
            half_width: DEFAULT_HALF_WIDTH,
            samples: DEFAULT_SAMPLES,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationRecord {
    pub t: f64,
    pub x_max: f64,
    pub k_corr: f64,
    pub n: usize,
    pub seed: u64,
    pub half_width: f64,
}

/// Generator for the record at time `t`: one ChaCha stream per snapshot,
/// so records do not depend on evaluation order.
fn record_rng(seed: u64, t: f64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t.to_bits());
    rng
}

/// Uniform sample positions in `[x_max - L, x_max + L]`.
pub fn sample_window(x_max: f64, settings: &CorrelationSettings, t: f64) -> Vec<f64> {
    let mut rng = record_rng(settings.seed, t);
    let (lo, hi) = (x_max - settings.half_width, x_max + settings.half_width);
    (0..settings.samples).map(|_| rng.random_range(lo..=hi)).collect()
}

/// Pearson correlation between `reference` and the linearly interpolated
/// field at random points of the window around `x_max`.
pub fn correlation<F>(
    u: &[f64],
    grid: &Grid1D,
    reference: F,
    t: f64,
    x_max: f64,
    settings: &CorrelationSettings,
) -> Result<CorrelationRecord, AnalysisError>
where
    F: Fn(f64) -> f64,
{
    if u.len() != grid.nx() {
        return Err(AnalysisError::LengthMismatch(u.len(), grid.nx()));
    }
    if !(settings.half_width > 0.0) {
        return Err(AnalysisError::InvalidHalfWidth(settings.half_width));
    }
    if settings.samples < 2 {
        return Err(AnalysisError::TooFewSamples(settings.samples));
    }
    let (lo, hi) = (x_max - settings.half_width, x_max + settings.half_width);
    if !(grid.contains(lo) && grid.contains(hi)) {
        return Err(AnalysisError::WindowOutsideGrid { lo, hi });
    }
    let xs = sample_window(x_max, settings, t);
    let a: Vec<f64> = xs.iter().map(|&x| reference(x)).collect();
    let b: Vec<f64> = xs.iter().map(|&x| grid.interpolate(u, x)).collect();
    for v in [&a, &b] {
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(sample_std(v) > 1e-12 * scale) {
            return Err(AnalysisError::DegenerateVariance);
        }
    }
    Ok(CorrelationRecord {
        t,
        x_max,
        k_corr: pearson(&a, &b),
        n: settings.samples,
        seed: settings.seed,
        half_width: settings.half_width,
    })
}

/// Everything derived from one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotAnalysis {
    pub t: f64,
    pub extrema: Vec<Extremum>,
    pub envelope: Option<EnvelopeModel>,
    /// Envelope peak, or the largest extremum when there are too few
    /// extrema for an envelope.
    pub x_max: Option<f64>,
    pub correlation: Result<CorrelationRecord, AnalysisError>,
}

pub fn analyze_snapshot<F>(
    snapshot: &Snapshot,
    grid: &Grid1D,
    reference: F,
    epsilon: f64,
    settings: &CorrelationSettings,
) -> SnapshotAnalysis
where
    F: Fn(f64, f64) -> f64,
{
    let t = snapshot.t;
    let extrema = match find_extrema(&snapshot.u, grid, t, epsilon) {
        Ok(set) => set,
        Err(e) => {
            return SnapshotAnalysis {
                t,
                extrema: Vec::new(),
                envelope: None,
                x_max: None,
                correlation: Err(e),
            }
        }
    };
    let env = envelope(&extrema).ok();
    let x_max = match &env {
        Some(env) => locate_max(env),
        // a pulse narrower than its carrier has only a crest or two
        None => {
            extrema
                .points
                .iter()
                .fold(extrema.points[0], |best, p| if p.amp > best.amp { *p } else { best })
                .x
        }
    };
    let correlation = correlation(&snapshot.u, grid, |x| reference(x, t), t, x_max, settings);
    SnapshotAnalysis {
        t,
        extrema: extrema.points,
        envelope: env,
        x_max: Some(x_max),
        correlation,
    }
}

/// One analysis per snapshot, computed in parallel. Snapshots where the
/// pipeline fails keep their error in place of a record.
pub fn correlation_timeseries<F>(
    snapshots: &[Snapshot],
    grid: &Grid1D,
    reference: F,
    epsilon: f64,
    settings: &CorrelationSettings,
) -> Vec<SnapshotAnalysis>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    snapshots
        .par_iter()
        .map(|s| analyze_snapshot(s, grid, &reference, epsilon, settings))
        .collect()
}

/// Least-squares slope of `K_corr(t)` over the successful records.
pub fn correlation_trend(series: &[SnapshotAnalysis]) -> Option<f64> {
    let (t, k): (Vec<f64>, Vec<f64>) = series
        .iter()
        .filter_map(|a| a.correlation.as_ref().ok())
        .map(|r| (r.t, r.k_corr))
        .unzip();
    (t.len() >= 2).then(|| linear_fit(&t, &k).slope)
}

/// Least-squares speed of the envelope peak over records with `t` in `[t_lo, t_hi]`.
pub fn envelope_speed(series: &[SnapshotAnalysis], t_lo: f64, t_hi: f64) -> Option<f64> {
    let (t, x): (Vec<f64>, Vec<f64>) = series
        .iter()
        .filter(|a| a.t >= t_lo && a.t <= t_hi)
        .filter_map(|a| a.x_max.map(|x| (a.t, x)))
        .unzip();
    (t.len() >= 2).then(|| linear_fit(&t, &x).slope)
}

/// Interval during which a signal stays above a fraction of its peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Burst {
    pub start: f64,
    pub end: f64,
}

impl Burst {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

fn crossing(t0: f64, y0: f64, t1: f64, y1: f64, level: f64) -> f64 {
    if y1 == y0 {
        t0
    } else {
        t0 + (level - y0) / (y1 - y0) * (t1 - t0)
    }
}

fn burst_of(t: &[f64], y: &[f64], level: f64) -> Option<Burst> {
    let first = y.iter().position(|&v| v > level)?;
    let last = y.iter().rposition(|&v| v > level)?;
    let start = if first == 0 {
        t[0]
    } else {
        crossing(t[first - 1], y[first - 1], t[first], y[first], level)
    };
    let end = if last + 1 == y.len() {
        t[last]
    } else {
        crossing(t[last], y[last], t[last + 1], y[last + 1], level)
    };
    Some(Burst { start, end })
}

/// Span over which `|u|` itself exceeds `fraction` of its peak. On a
/// carrier-modulated signal this measures between the outermost carrier
/// crests above the level, so it undershoots the envelope width.
pub fn raw_burst(t: &[f64], u: &[f64], fraction: f64) -> Result<Option<Burst>, AnalysisError> {
    if t.len() != u.len() {
        return Err(AnalysisError::LengthMismatch(t.len(), u.len()));
    }
    let mag: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    let peak = mag.iter().fold(0.0f64, |m, &v| m.max(v));
    Ok(burst_of(t, &mag, fraction * peak))
}

/// Span over which the temporal envelope of a uniformly sampled probe series
/// exceeds `fraction` of its peak.
pub fn envelope_burst(t: &[f64], u: &[f64], fraction: f64) -> Result<Burst, AnalysisError> {
    if t.len() != u.len() {
        return Err(AnalysisError::LengthMismatch(t.len(), u.len()));
    }
    if t.len() < 3 {
        return Err(AnalysisError::TooFewSamples(t.len()));
    }
    let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(peak > 0.0) {
        return Err(AnalysisError::NoExtremaFound { t: t[0] });
    }
    let h = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    let points = find_extrema_uniform(u, t[0], h, 1e-3 * peak)?;
    if points.is_empty() {
        return Err(AnalysisError::NoExtremaFound { t: t[0] });
    }
    let env = envelope(&ExtremaSet { t: t[0], points })?;
    let (lo, hi) = env.domain();
    let ts: Vec<f64> = t.iter().copied().filter(|&s| s >= lo && s <= hi).collect();
    let ys: Vec<f64> = ts.iter().map(|&s| env.eval(s)).collect();
    let top = ys.iter().fold(0.0f64, |m, &v| m.max(v));
    burst_of(&ts, &ys, fraction * top).ok_or(AnalysisError::NoExtremaFound { t: t[0] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    fn grid() -> Grid1D {
        Grid1D::with_spacing(-15.0, 15.0, 0.005).unwrap()
    }

    fn modulated(g: &Grid1D) -> Vec<f64> {
        g.points().iter().map(|&x| sech(x) * (10.0 * x).cos()).collect()
    }

    /// Exact local maximum of |sech x cos 10x| near a carrier crest, by
    /// bisection on the derivative of ln|u|: -tanh x - 10 tan 10x.
    fn exact_peak(crest: f64) -> (f64, f64) {
        let g = |x: f64| -x.tanh() - 10.0 * (10.0 * x).tan();
        let (mut a, mut b) = (crest - 0.05, crest + 0.05);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(a) * g(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        let x = 0.5 * (a + b);
        (x, (sech(x) * (10.0 * x).cos()).abs())
    }

    #[test]
    fn extrema_of_modulated_sech() {
        let g = grid();
        let set = find_extrema(&modulated(&g), &g, 0.0, 1e-3).unwrap();
        assert!(set.points.len() > 40);
        for p in &set.points {
            let crest = (p.x / (std::f64::consts::PI / 10.0)).round() * std::f64::consts::PI / 10.0;
            let (xe, ae) = exact_peak(crest);
            assert!((p.x - xe).abs() < 1e-5, "{} vs {xe}", p.x);
            assert!((p.amp - ae).abs() < 1e-6, "{} vs {ae}", p.amp);
            // the crest sits slightly off the envelope, by at most sech tanh^2 / 200
            assert!((p.amp - sech(p.x)).abs() < 2e-3);
        }
        assert!(set.points.windows(2).all(|w| w[1].x > w[0].x));
        assert!(set.points.iter().all(|p| p.amp > 1e-3));
    }

    #[test]
    fn zero_field_has_no_extrema() {
        let g = grid();
        let u = vec![0.0; g.nx()];
        assert_eq!(
            find_extrema(&u, &g, 3.0, 1e-6),
            Err(AnalysisError::NoExtremaFound { t: 3.0 })
        );
        assert!(matches!(
            find_extrema(&u, &g, 0.0, 0.0),
            Err(AnalysisError::InvalidEpsilon(_))
        ));
    }

    #[test]
    fn isolated_spike() {
        let g = Grid1D::new(0.0, 1.0, 101).unwrap();
        let mut u = vec![0.0; 101];
        u[37] = -0.5;
        let set = find_extrema(&u, &g, 0.0, 0.1).unwrap();
        assert_eq!(set.points.len(), 1);
        assert!((set.points[0].x - g.x(37)).abs() < 1e-15);
        assert_eq!(set.points[0].amp, 0.5);
    }

    #[test]
    fn plateau_counts_once() {
        let g = Grid1D::new(0.0, 1.0, 20).unwrap();
        let mut u = vec![0.0; 20];
        u[5] = 1.0;
        u[6] = 1.0;
        let set = find_extrema(&u, &g, 0.0, 0.1).unwrap();
        assert_eq!(set.points.len(), 1);
    }

    #[test]
    fn envelope_tracks_sech() {
        let g = grid();
        let set = find_extrema(&modulated(&g), &g, 0.0, 1e-3).unwrap();
        let env = envelope(&set).unwrap();
        let (xs, ys) = env.knots();
        for (x, y) in xs.iter().zip(ys) {
            assert_eq!(env.eval(*x), *y);
        }
        let (lo, hi) = env.domain();
        for (x, e) in env.samples(5000) {
            assert!(x >= lo && x <= hi);
            assert!((e - sech(x)).abs() < 1e-2, "x = {x}");
        }
        let xm = locate_max(&env);
        let spacing = std::f64::consts::PI / 10.0;
        assert!(xm.abs() < spacing, "{xm}");
    }

    #[test]
    fn envelope_needs_four_knots() {
        let set = ExtremaSet {
            t: 0.0,
            points: (0..3).map(|i| Extremum { x: i as f64, amp: 1.0 }).collect(),
        };
        assert_eq!(
            envelope(&set),
            Err(AnalysisError::TooFewExtrema { found: 3, needed: 4 })
        );
    }

    #[test]
    fn envelope_is_nonnegative() {
        let set = ExtremaSet {
            t: 0.0,
            points: [(0.0, 1e-3), (1.0, 1.0), (1.1, 1e-3), (3.0, 1e-3), (3.1, 1.0)]
                .iter()
                .map(|&(x, amp)| Extremum { x, amp })
                .collect(),
        };
        let env = envelope(&set).unwrap();
        assert!(env.samples(2000).iter().all(|&(_, e)| e >= 0.0));
    }

    #[test]
    fn locate_max_on_shifted_pulse() {
        let g = grid();
        let u: Vec<f64> = g.points().iter().map(|&x| sech(x - 2.3) * (10.0 * x).cos()).collect();
        let env = envelope(&find_extrema(&u, &g, 0.0, 1e-3).unwrap()).unwrap();
        assert!((locate_max(&env) - 2.3).abs() < std::f64::consts::PI / 10.0);
    }

    fn field_and_reference() -> (Grid1D, Vec<f64>) {
        let g = grid();
        let u = g.points().iter().map(|&x| sech(x) * (3.0 * x).cos()).collect();
        (g, u)
    }

    #[test]
    fn perfect_and_anti_correlation() {
        let (g, u) = field_and_reference();
        let s = CorrelationSettings::default();
        let r = correlation(&u, &g, |x| g.interpolate(&u, x), 1.0, 0.0, &s).unwrap();
        assert!((r.k_corr - 1.0).abs() < 1e-12);
        let r = correlation(&u, &g, |x| -g.interpolate(&u, x), 1.0, 0.0, &s).unwrap();
        assert!((r.k_corr + 1.0).abs() < 1e-12);
        assert_eq!((r.n, r.seed, r.half_width), (200, 1, 10.0));
    }

    #[test]
    fn correlation_errors() {
        let (g, u) = field_and_reference();
        let s = CorrelationSettings::default();
        assert!(matches!(
            correlation(&u, &g, sech, 0.0, 10.0, &s),
            Err(AnalysisError::WindowOutsideGrid { .. })
        ));
        let few = CorrelationSettings { samples: 1, ..s };
        assert_eq!(
            correlation(&u, &g, sech, 0.0, 0.0, &few),
            Err(AnalysisError::TooFewSamples(1))
        );
        assert_eq!(
            correlation(&u, &g, |_| 2.0, 0.0, 0.0, &s),
            Err(AnalysisError::DegenerateVariance)
        );
        let flat = vec![0.3; g.nx()];
        assert_eq!(
            correlation(&flat, &g, sech, 0.0, 0.0, &s),
            Err(AnalysisError::DegenerateVariance)
        );
    }

    #[test]
    fn records_depend_only_on_seed_and_time() {
        let s = CorrelationSettings::default();
        assert_eq!(sample_window(0.0, &s, 25.0), sample_window(0.0, &s, 25.0));
        assert_ne!(sample_window(0.0, &s, 25.0), sample_window(0.0, &s, 50.0));
        let other = CorrelationSettings { seed: 2, ..s };
        assert_ne!(sample_window(0.0, &s, 25.0), sample_window(0.0, &other, 25.0));
    }

    #[test]
    fn timeseries_of_reference_against_itself() {
        let g = grid();
        let reference = |x: f64, t: f64| sech(x - 0.5 * t) * (8.0 * x - t).cos();
        let snaps: Vec<Snapshot> = (0..6)
            .map(|k| {
                let t = k as f64;
                Snapshot {
                    t,
                    u: g.points().iter().map(|&x| reference(x, t)).collect(),
                }
            })
            .collect();
        let series = correlation_timeseries(&snaps, &g, reference, 1e-3, &CorrelationSettings::default());
        assert_eq!(series.len(), 6);
        for a in &series {
            let r = a.correlation.as_ref().unwrap();
            assert!(r.k_corr > 1.0 - 1e-4, "{}", r.k_corr);
            assert!((r.x_max - 0.5 * a.t).abs() < 0.4);
        }
        let again = correlation_timeseries(&snaps, &g, reference, 1e-3, &CorrelationSettings::default());
        assert_eq!(series, again);
        let v = envelope_speed(&series, 0.0, 5.0).unwrap();
        assert!((v - 0.5).abs() < 0.1, "{v}");
    }

    #[test]
    fn timeseries_keeps_gaps() {
        let g = grid();
        let snaps = vec![
            Snapshot {
                t: 0.0,
                u: modulated(&g),
            },
            Snapshot {
                t: 1.0,
                u: vec![0.0; g.nx()],
            },
        ];
        let series = correlation_timeseries(
            &snaps,
            &g,
            |x, _| sech(x) * (10.0 * x).cos(),
            1e-3,
            &CorrelationSettings::default(),
        );
        assert!(series[0].correlation.is_ok());
        assert_eq!(series[1].correlation, Err(AnalysisError::NoExtremaFound { t: 1.0 }));
        assert!(series[1].envelope.is_none());
    }

    #[test]
    fn narrow_pulse_falls_back_to_largest_crest() {
        let g = grid();
        let bump = |x: f64, _: f64| (-(x - 1.2) * (x - 1.2)).exp();
        let snap = Snapshot {
            t: 0.0,
            u: g.points().iter().map(|&x| bump(x, 0.0)).collect(),
        };
        let a = analyze_snapshot(&snap, &g, bump, 1e-3, &CorrelationSettings::default());
        assert_eq!(a.extrema.len(), 1);
        assert!(a.envelope.is_none());
        assert!((a.x_max.unwrap() - 1.2).abs() < 1e-6);
        assert!(a.correlation.unwrap().k_corr > 0.9999);
    }

    #[test]
    fn trend_of_declining_series() {
        let rec = |t: f64, k: f64| SnapshotAnalysis {
            t,
            extrema: Vec::new(),
            envelope: None,
            x_max: None,
            correlation: Ok(CorrelationRecord {
                t,
                x_max: 0.0,
                k_corr: k,
                n: 2,
                seed: 0,
                half_width: 1.0,
            }),
        };
        let series = vec![rec(0.0, 1.0), rec(1.0, 0.99), rec(2.0, 0.97)];
        assert!(correlation_trend(&series).unwrap() < 0.0);
        assert_eq!(correlation_trend(&series[..1]), None);
    }

    #[test]
    fn burst_durations() {
        // Gaussian envelope exp(-(t - 50)^2 / (2 s^2)) exceeds 5% for 2 s sqrt(2 ln 20)
        let s = 4.0;
        let t: Vec<f64> = (0..10_001).map(|i| i as f64 * 0.01).collect();
        let u: Vec<f64> = t
            .iter()
            .map(|&t| (-(t - 50.0f64).powi(2) / (2.0 * s * s)).exp() * (3.0 * t).cos())
            .collect();
        let expected = 2.0 * s * (2.0 * 20f64.ln()).sqrt();
        let env = envelope_burst(&t, &u, 0.05).unwrap();
        // knots sit on carrier crests, slightly inside the true envelope
        assert!((env.duration() - expected).abs() < 0.1, "{}", env.duration());
        let raw = raw_burst(&t, &u, 0.05).unwrap().unwrap();
        assert!(raw.duration() <= env.duration() + 1e-9);
        assert!(raw.duration() > expected - 2.0 * std::f64::consts::PI / 3.0);
    }

    proptest! {
        #[test]
        fn affine_invariance(alpha in 0.01f64..100.0, shift in -50.0f64..50.0, seed in any::<u64>()) {
            let (g, u) = field_and_reference();
            let s = CorrelationSettings { seed, ..Default::default() };
            let reference = |x: f64| sech(x) * (3.1 * x).cos();
            let base = correlation(&u, &g, reference, 2.0, 0.0, &s).unwrap();
            let moved = correlation(&u, &g, |x| alpha * reference(x) + shift, 2.0, 0.0, &s).unwrap();
            prop_assert!((base.k_corr - moved.k_corr).abs() < 1e-12);
            prop_assert!(base.k_corr.abs() <= 1.0);
        }

        #[test]
        fn window_integrity(x_max in -4.0f64..4.0, half in 0.1f64..10.0, seed in any::<u64>(), t in 0.0f64..300.0) {
            let s = CorrelationSettings { half_width: half, samples: 500, seed };
            for x in sample_window(x_max, &s, t) {
                prop_assert!(x >= x_max - half && x <= x_max + half);
            }
        }

        #[test]
        fn envelope_covers_the_field(shift in -3.0f64..3.0, k in 4.0f64..12.0, phase in 0.0f64..6.3) {
            let g = grid();
            let u: Vec<f64> = g.points().iter().map(|&x| sech(x - shift) * (k * x + phase).cos()).collect();
            let env = envelope(&find_extrema(&u, &g, 0.0, 1e-3).unwrap()).unwrap();
            let (lo, hi) = env.domain();
            let eta = 0.02 * u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut slack: Vec<f64> = g.points().iter().zip(&u)
                .filter(|(x, _)| **x >= lo && **x <= hi)
                .map(|(x, v)| env.eval(*x) - v.abs())
                .collect();
            slack.sort_by(f64::total_cmp);
            // at least 95% of interior points sit under the envelope plus eta
            let p5 = slack[slack.len() / 20];
            prop_assert!(p5 >= -eta, "{}", p5);
        }
    }
}
