//! Cross-engine comparison, retention sweeps and convergence studies.

use crate::collision::collision_series;
use crate::error::{Error, Result};
use crate::lindblad::{closed_form_p, closed_form_series};
use crate::params::{g_from_eta, CollisionSpec, EngineTag, MasterSpec, TimeGrid, TimeSeries};

/// Quadrature points used by [`turning_point_sweep`] per window.
pub const SWEEP_SAMPLES: usize = 4001;

/// Pointwise deviation between two series on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub max_abs: f64,
    /// Root-mean-square deviation over the shared grid.
    pub l2: f64,
    pub grid: Vec<f64>,
    pub tags: (EngineTag, EngineTag),
    /// True when at least one series had to be linearly interpolated.
    pub resampled: bool,
}

/// Compares two series over the overlap of their time ranges.
///
/// Identical grids are compared point by point. Otherwise a collision series
/// contributes its own sample times (collision boundaries) and anything else
/// is compared on the union of both grids, with linear interpolation. The
/// choice does not depend on argument order.
pub fn compare(a: &TimeSeries, b: &TimeSeries) -> Result<DeviationReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("cannot compare an empty series"));
    }
    let tags = (a.engine(), b.engine());
    if a.times() == b.times() {
        let diffs: Vec<f64> = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .collect();
        return Ok(report(diffs, a.times().to_vec(), tags, false));
    }

    let lo = a.times()[0].max(b.times()[0]);
    let hi = a.times()[a.len() - 1].min(b.times()[b.len() - 1]);
    if lo > hi {
        return Err(Error::domain(format!(
            "series do not overlap: [{}, {}] vs [{}, {}]",
            a.times()[0],
            a.times()[a.len() - 1],
            b.times()[0],
            b.times()[b.len() - 1]
        )));
    }
    let in_range = |t: &&f64| **t >= lo && **t <= hi;
    let a_coll = a.engine() == EngineTag::Collision;
    let b_coll = b.engine() == EngineTag::Collision;
    let grid: Vec<f64> = if a_coll != b_coll {
        let c = if a_coll { a } else { b };
        c.times().iter().filter(in_range).copied().collect()
    } else {
        let mut g: Vec<f64> = a
            .times()
            .iter()
            .chain(b.times())
            .filter(in_range)
            .copied()
            .collect();
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    };
    let diffs = grid
        .iter()
        .map(|&t| {
            // t lies inside both ranges, so interpolation always succeeds
            let x = a.interpolate(t).unwrap_or(f64::NAN);
            let y = b.interpolate(t).unwrap_or(f64::NAN);
            (x - y).abs()
        })
        .collect();
    Ok(report(diffs, grid, tags, true))
}

fn report(
    diffs: Vec<f64>,
    grid: Vec<f64>,
    tags: (EngineTag, EngineTag),
    resampled: bool,
) -> DeviationReport {
    let max_abs = diffs.iter().copied().fold(0.0, f64::max);
    let l2 = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
    DeviationReport {
        max_abs,
        l2: l2.min(max_abs),
        grid,
        tags,
        resampled,
    }
}

/// Time average of `p` over `window`, by the trapezoidal rule on the series
/// samples (window edges are linearly interpolated).
pub fn retention(series: &TimeSeries, window: (f64, f64)) -> Result<f64> {
    let (t0, t1) = window;
    if !(t1 > t0) {
        return Err(Error::domain(format!("empty retention window [{t0}, {t1}]")));
    }
    let (first, last) = match (series.times().first(), series.times().last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(Error::domain("retention of an empty series")),
    };
    if t0 < first || t1 > last {
        return Err(Error::domain(format!(
            "window [{t0}, {t1}] outside series range [{first}, {last}]"
        )));
    }
    let mut pts = Vec::with_capacity(series.len() + 2);
    pts.push((t0, series.interpolate(t0).unwrap_or(f64::NAN)));
    pts.extend(series.points().filter(|(t, _)| *t > t0 && *t < t1));
    pts.push((t1, series.interpolate(t1).unwrap_or(f64::NAN)));
    let area: f64 = pts
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    Ok(area / (t1 - t0))
}

/// Retention of the master-equation solution at each `κ`, and the estimated
/// turning point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub kappas: Vec<f64>,
    pub retention: Vec<f64>,
    /// `None` when the retention minimum sits at either end of the sweep.
    pub turning_point: Option<f64>,
}

/// Locates the `κ` that minimizes retention of the excitation in mode 2.
///
/// The minimum over the supplied rates is refined with a parabola through
/// it and its two neighbours.
pub fn turning_point_sweep(
    g_coupling: f64,
    kappas: &[f64],
    window: (f64, f64),
) -> Result<SweepResult> {
    if kappas.len() < 5 {
        return Err(Error::domain(format!(
            "turning point sweep needs at least 5 rates, got {}",
            kappas.len()
        )));
    }
    if kappas.windows(2).any(|w| !(w[1] > w[0])) || !(kappas[0] >= 0.0) {
        return Err(Error::domain(
            "sweep rates must be non-negative and strictly increasing",
        ));
    }
    let turning = 2.0 * g_coupling;
    if !(kappas[0] < turning && kappas[kappas.len() - 1] > turning) {
        return Err(Error::domain(format!(
            "sweep rates must lie on both sides of 2G = {turning}"
        )));
    }
    let (t0, t1) = window;
    if !(t1 > t0) || t0 < 0.0 {
        return Err(Error::domain(format!("empty retention window [{t0}, {t1}]")));
    }
    let step = (t1 - t0) / (SWEEP_SAMPLES - 1) as f64;
    let times: Vec<f64> = (0..SWEEP_SAMPLES).map(|i| t0 + i as f64 * step).collect();
    let grid = TimeGrid::from_times(times)?;

    let retention = kappas
        .iter()
        .map(|&kappa| {
            let spec = MasterSpec {
                kappa,
                omega: 0.0,
                g_coupling,
            };
            let series = closed_form_series(&spec, &grid)?;
            self::retention(&series, window)
        })
        .collect::<Result<Vec<f64>>>()?;

    let imin = retention
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let turning_point = if imin == 0 || imin == kappas.len() - 1 {
        None
    } else {
        Some(parabola_vertex(
            (kappas[imin - 1], retention[imin - 1]),
            (kappas[imin], retention[imin]),
            (kappas[imin + 1], retention[imin + 1]),
        ))
    };
    Ok(SweepResult {
        kappas: kappas.to_vec(),
        retention,
        turning_point,
    })
}

/// Abscissa of the vertex of the parabola through three points.
fn parabola_vertex(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let (x1, y1) = a;
    let (x2, y2) = b;
    let (x3, y3) = c;
    let num = (x2 - x1).powi(2) * (y2 - y3) - (x2 - x3).powi(2) * (y2 - y1);
    let den = (x2 - x1) * (y2 - y3) - (x2 - x3) * (y2 - y1);
    if den == 0.0 {
        x2
    } else {
        x2 - 0.5 * num / den
    }
}

/// Deviation of the collision model from the master equation per `t_int`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub eta: f64,
    /// `(t_int, max_abs)` in the order supplied.
    pub rows: Vec<(f64, f64)>,
    /// False flags a deviation that failed to shrink with `t_int`.
    pub decreasing: bool,
}

impl ConvergenceStudy {
    /// `max_abs[i] / max_abs[i + 1]` for consecutive rows.
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| w[0].1 / w[1].1).collect()
    }
}

/// Runs the collision model at `g = √(2ηG/t_int)` for each interaction time
/// and measures its deviation from the closed-form master equation with
/// `κ = ηG` over `[0, t_max]`, at the collision boundaries.
pub fn convergence_study(
    eta: f64,
    t_ints: &[f64],
    t_max: f64,
    omega: f64,
) -> Result<ConvergenceStudy> {
    if t_ints.len() < 3 {
        return Err(Error::domain(format!(
            "convergence study needs at least 3 interaction times, got {}",
            t_ints.len()
        )));
    }
    if t_ints.windows(2).any(|w| !(w[1] < w[0])) || t_ints.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::domain(
            "interaction times must be positive and strictly decreasing",
        ));
    }
    if !(t_max > 0.0) {
        return Err(Error::domain(format!("t_max must be > 0, got {t_max}")));
    }
    let master = MasterSpec::new(eta, omega);
    let mut rows = Vec::with_capacity(t_ints.len());
    for &t_int in t_ints {
        let n = ((t_max / t_int).round() as usize).max(1);
        let g = g_from_eta(eta, 1.0, t_int)?;
        let series = collision_series(&CollisionSpec::new(g, t_int, n, omega))?;
        let max_abs = series
            .points()
            .map(|(t, p)| (p - closed_form_p(&master, t)).abs())
            .fold(0.0, f64::max);
        rows.push((t_int, max_abs));
    }
    let decreasing = rows.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(ConvergenceStudy {
        eta,
        rows,
        decreasing,
    })
}

/// First interior local minimum of `f` on `[t0, t1]`.
///
/// Scans `samples` evenly spaced points for the first sample lower than both
/// neighbours, then refines it by golden-section search. Returns `(t, f(t))`.
pub fn first_local_minimum<F>(f: F, t0: f64, t1: f64, samples: usize) -> Option<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    if samples < 3 || !(t1 > t0) {
        return None;
    }
    let step = (t1 - t0) / (samples - 1) as f64;
    let ts: Vec<f64> = (0..samples).map(|i| t0 + i as f64 * step).collect();
    let ys: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let i = (1..samples - 1).find(|&i| ys[i] < ys[i - 1] && ys[i] <= ys[i + 1])?;

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (ts[i - 1], ts[i + 1]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    let best = [(ts[i], ys[i]), (t, f(t))]
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))?;
    Some(best)
}
