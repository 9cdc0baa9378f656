//! Shared domain types and the analytic maps linking the three pictures.
//!
//! Units: the mode-mode coupling `G` sets the scale. Frequencies and rates
//! are in units of `G`, times in units of `1/G`.
//!
//! The bath picture is parametrized by the collective coupling `Γ`, the
//! master equation by the damping rate `κ`, and the collision model by the
//! atom-mode coupling `g` and the interaction time `t_int`. They are tied
//! together by
//!
//! * `κ = π Γ² / Δ` (golden-rule rate of a flat band of width `Δ`),
//! * `κ = g² t_int / 2` (per-collision population loss `g² t_int²`),
//!
//! and the dimensionless `η = κ / G` used to label curves.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Placement of the environmental frequencies inside `[Ω − Δ/2, Ω + Δ/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyLayout {
    /// `Ω ± jΔ/(N−2)`, `j = 1..(N−2)/2`, interleaved `+1, −1, +2, −2, …`.
    PairedEquispaced,
    /// i.i.d. uniform draws from a seeded generator.
    RandomUniform,
}

impl fmt::Display for FrequencyLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrequencyLayout::PairedEquispaced => write!(f, "paired"),
            FrequencyLayout::RandomUniform => write!(f, "random"),
        }
    }
}

/// Two resonant modes, one of them coupled to `N − 2` bath oscillators.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    /// Total number of oscillators, including the two modes of interest.
    pub n_total: usize,
    pub omega: f64,
    pub g_coupling: f64,
    pub delta: f64,
    pub gamma: f64,
    pub layout: FrequencyLayout,
    /// Only read for [`FrequencyLayout::RandomUniform`].
    pub seed: u64,
}

impl BathSpec {
    /// Paired-equispaced bath with `G = 1`.
    pub fn paired(n_total: usize, omega: f64, delta: f64, gamma: f64) -> Self {
        BathSpec {
            n_total,
            omega,
            g_coupling: 1.0,
            delta,
            gamma,
            layout: FrequencyLayout::PairedEquispaced,
            seed: 0,
        }
    }

    pub fn with_layout(mut self, layout: FrequencyLayout, seed: u64) -> Self {
        self.layout = layout;
        self.seed = seed;
        self
    }

    /// Number of environmental oscillators, `N − 2`.
    pub fn n_env(&self) -> usize {
        self.n_total.saturating_sub(2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_total < 4 {
            return Err(Error::Configuration(format!(
                "n_total must be at least 4, got {}",
                self.n_total
            )));
        }
        if self.layout == FrequencyLayout::PairedEquispaced && self.n_env() % 2 != 0 {
            return Err(Error::Configuration(format!(
                "odd environment count {} (n_total = {}) cannot be split into +/- pairs",
                self.n_env(),
                self.n_total
            )));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::domain(format!("delta must be > 0, got {}", self.delta)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::domain(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        // G = 0 is admitted so the decoupled limit can be simulated.
        if !(self.g_coupling >= 0.0) || !self.g_coupling.is_finite() {
            return Err(Error::domain(format!(
                "g_coupling must be >= 0, got {}",
                self.g_coupling
            )));
        }
        if !self.omega.is_finite() {
            return Err(Error::domain("omega must be finite"));
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        let mut s = format!(
            "bath;n_total={};omega={};g={};delta={};gamma={};layout={}",
            self.n_total, self.omega, self.g_coupling, self.delta, self.gamma, self.layout
        );
        if self.layout == FrequencyLayout::RandomUniform {
            s.push_str(&format!(";seed={}", self.seed));
        }
        s
    }
}

/// Parameters of the two-mode amplitude-damping master equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasterSpec {
    pub kappa: f64,
    pub omega: f64,
    pub g_coupling: f64,
}

impl MasterSpec {
    pub fn new(kappa: f64, omega: f64) -> Self {
        MasterSpec {
            kappa,
            omega,
            g_coupling: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::domain(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if !(self.g_coupling >= 0.0) || !self.g_coupling.is_finite() {
            return Err(Error::domain(format!(
                "g_coupling must be >= 0, got {}",
                self.g_coupling
            )));
        }
        if !self.omega.is_finite() {
            return Err(Error::domain("omega must be finite"));
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        format!(
            "lindblad;kappa={};omega={};g={}",
            self.kappa, self.omega, self.g_coupling
        )
    }
}

/// Repeated-interaction protocol: `n_collisions` back-to-back atoms, each
/// coupled to mode 1 for `t_int`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionSpec {
    pub g_atom: f64,
    pub t_int: f64,
    pub n_collisions: usize,
    pub omega: f64,
    pub g_coupling: f64,
}

impl CollisionSpec {
    pub fn new(g_atom: f64, t_int: f64, n_collisions: usize, omega: f64) -> Self {
        CollisionSpec {
            g_atom,
            t_int,
            n_collisions,
            omega,
            g_coupling: 1.0,
        }
    }

    /// Protocol whose effective damping rate is `η G`.
    pub fn from_eta(eta: f64, t_int: f64, n_collisions: usize, omega: f64) -> Result<Self> {
        let g = g_from_eta(eta, 1.0, t_int)?;
        Ok(CollisionSpec::new(g, t_int, n_collisions, omega))
    }

    pub fn total_time(&self) -> f64 {
        self.n_collisions as f64 * self.t_int
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_int > 0.0) || !self.t_int.is_finite() {
            return Err(Error::domain(format!("t_int must be > 0, got {}", self.t_int)));
        }
        if !(self.g_atom >= 0.0) || !self.g_atom.is_finite() {
            return Err(Error::domain(format!("g_atom must be >= 0, got {}", self.g_atom)));
        }
        if self.n_collisions == 0 {
            return Err(Error::domain("n_collisions must be positive"));
        }
        if !(self.g_coupling >= 0.0) || !self.g_coupling.is_finite() {
            return Err(Error::domain(format!(
                "g_coupling must be >= 0, got {}",
                self.g_coupling
            )));
        }
        if !self.omega.is_finite() {
            return Err(Error::domain("omega must be finite"));
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        format!(
            "collision;g_atom={};t_int={};n_collisions={};omega={};g={}",
            self.g_atom, self.t_int, self.n_collisions, self.omega, self.g_coupling
        )
    }
}

/// Which engine produced a [`TimeSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EngineTag {
    Bath,
    LindbladClosed,
    LindbladIntegrated,
    Collision,
}

impl EngineTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            EngineTag::Bath => "bath",
            EngineTag::LindbladClosed => "lindblad-closed",
            EngineTag::LindbladIntegrated => "lindblad-integrated",
            EngineTag::Collision => "collision",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bath" => Some(EngineTag::Bath),
            "lindblad-closed" => Some(EngineTag::LindbladClosed),
            "lindblad-integrated" => Some(EngineTag::LindbladIntegrated),
            "collision" => Some(EngineTag::Collision),
            _ => None,
        }
    }
}

impl fmt::Display for EngineTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Strictly increasing, non-negative sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// `samples` evenly spaced points covering `[0, t_max]` inclusive.
    pub fn uniform(t_max: f64, samples: usize) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::domain(format!("t_max must be > 0, got {t_max}")));
        }
        match samples {
            0 => Err(Error::domain("grid needs at least one sample")),
            1 => Ok(TimeGrid { times: vec![0.0] }),
            n => {
                let step = t_max / (n - 1) as f64;
                let mut times: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
                times[n - 1] = t_max;
                Ok(TimeGrid { times })
            }
        }
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::domain("grid times must be finite and non-negative"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("grid times must be strictly increasing"));
        }
        Ok(TimeGrid { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// Probabilities outside `[0, 1]` by less than this are rounding and get clamped.
const PROBABILITY_SLACK: f64 = 1e-9;

/// Sampled survival probability of the excitation in mode 2.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    engine: EngineTag,
    params_digest: String,
}

impl TimeSeries {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        engine: EngineTag,
        params_digest: impl Into<String>,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::domain(format!(
                "times ({}) and values ({}) differ in length",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("series times must be strictly increasing"));
        }
        let mut values = values;
        for (t, v) in times.iter().zip(values.iter_mut()) {
            if !v.is_finite() || *v < -PROBABILITY_SLACK || *v > 1.0 + PROBABILITY_SLACK {
                return Err(Error::Numerical(format!(
                    "probability {v} at t = {t} is outside [0, 1]"
                )));
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(TimeSeries {
            times,
            values,
            engine,
            params_digest: params_digest.into(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn engine(&self) -> EngineTag {
        self.engine
    }

    pub fn params_digest(&self) -> &str {
        &self.params_digest
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Iterates `(t, p)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// Linear interpolation at `t`; `None` outside the sampled range.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        let (first, last) = (*self.times.first()?, *self.times.last()?);
        if t < first || t > last {
            return None;
        }
        let idx = self.times.partition_point(|&x| x < t);
        if idx < self.times.len() && self.times[idx] == t {
            return Some(self.values[idx]);
        }
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        Some(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }
}

/// Which collision-rate convention to use when translating `g` into `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CollisionRateConvention {
    /// `κ = g² t_int / 2`; matches the master-equation normalization.
    #[default]
    HalfSquare,
    /// `κ = g² t_int`; kept for exploration only.
    FullSquare,
}

fn require_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be > 0, got {x}")))
    }
}

fn require_non_negative(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be >= 0, got {x}")))
    }
}

/// Damping rate `κ = π Γ² / Δ` produced by a flat band of width `Δ`.
pub fn kappa_from_gamma(gamma: f64, delta: f64) -> Result<f64> {
    require_positive("delta", delta)?;
    require_non_negative("gamma", gamma)?;
    Ok(PI * gamma * gamma / delta)
}

/// Inverse of [`kappa_from_gamma`]: `Γ = √(κΔ/π)`.
pub fn gamma_from_kappa(kappa: f64, delta: f64) -> Result<f64> {
    require_positive("delta", delta)?;
    require_non_negative("kappa", kappa)?;
    Ok((kappa * delta / PI).sqrt())
}

/// Bath coupling `Γ = √(ηΔG/π)`, for which `κ = ηG`.
pub fn gamma_from_eta(eta: f64, delta: f64, g_coupling: f64) -> Result<f64> {
    require_non_negative("eta", eta)?;
    require_positive("delta", delta)?;
    require_positive("g_coupling", g_coupling)?;
    Ok((eta * delta * g_coupling / PI).sqrt())
}

/// Atom coupling `g = √(2ηG/t_int)`, for which `κ = ηG`.
pub fn g_from_eta(eta: f64, g_coupling: f64, t_int: f64) -> Result<f64> {
    require_non_negative("eta", eta)?;
    require_positive("t_int", t_int)?;
    require_non_negative("g_coupling", g_coupling)?;
    Ok((2.0 * eta * g_coupling / t_int).sqrt())
}

/// Atom coupling giving rate `κ` at interaction time `t_int`: `g = √(2κ/t_int)`.
pub fn g_from_kappa(kappa: f64, t_int: f64) -> Result<f64> {
    require_non_negative("kappa", kappa)?;
    require_positive("t_int", t_int)?;
    Ok((2.0 * kappa / t_int).sqrt())
}

/// Effective damping rate of the collision model, `κ = g² t_int / 2`.
pub fn kappa_from_collision(g_atom: f64, t_int: f64) -> Result<f64> {
    kappa_from_collision_with(g_atom, t_int, CollisionRateConvention::HalfSquare)
}

pub fn kappa_from_collision_with(
    g_atom: f64,
    t_int: f64,
    convention: CollisionRateConvention,
) -> Result<f64> {
    require_non_negative("g_atom", g_atom)?;
    require_positive("t_int", t_int)?;
    let full = g_atom * g_atom * t_int;
    Ok(match convention {
        CollisionRateConvention::HalfSquare => full / 2.0,
        CollisionRateConvention::FullSquare => full,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    }

    #[test]
    fn turning_point_gamma_gives_kappa_two() {
        let gamma = (2.0 * 20.0 / PI).sqrt();
        assert!(rel(kappa_from_gamma(gamma, 20.0).unwrap(), 2.0) < 1e-12);
        assert_eq!(kappa_from_gamma(0.0, 5.0).unwrap(), 0.0);
        let gamma8 = (8.0 * 20.0 / PI).sqrt();
        assert!(rel(kappa_from_gamma(gamma8, 20.0).unwrap(), 8.0) < 1e-12);
    }

    #[test]
    fn non_positive_delta_is_rejected() {
        assert!(matches!(kappa_from_gamma(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(kappa_from_gamma(1.0, -2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_from_eta_values() {
        // sqrt(40/pi) = 3.5682482323055424
        let g = gamma_from_eta(2.0, 20.0, 1.0).unwrap();
        assert!((g - 3.568_248_232_305_542).abs() < 1e-12);
        assert_eq!(gamma_from_eta(0.0, 20.0, 1.0).unwrap(), 0.0);
        let k = kappa_from_gamma(gamma_from_eta(32.0, 20.0, 1.0).unwrap(), 20.0).unwrap();
        assert!(rel(k, 32.0) < 1e-12);
        assert!(gamma_from_eta(-1.0, 20.0, 1.0).is_err());
    }

    #[test]
    fn g_from_eta_values() {
        assert!(rel(g_from_eta(2.0, 1.0, 0.01).unwrap(), 20.0) < 1e-12);
        assert!(rel(g_from_eta(8.0, 1.0, 0.01).unwrap(), 40.0) < 1e-12);
        assert_eq!(g_from_eta(0.0, 1.0, 0.01).unwrap(), 0.0);
        assert!(g_from_eta(1.0, 1.0, 0.0).is_err());
        assert!(g_from_eta(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn collision_rate_values() {
        assert!(rel(kappa_from_collision(20.0, 0.01).unwrap(), 2.0) < 1e-12);
        assert_eq!(kappa_from_collision(0.0, 0.01).unwrap(), 0.0);
        let full =
            kappa_from_collision_with(20.0, 0.01, CollisionRateConvention::FullSquare).unwrap();
        assert!(rel(full, 4.0) < 1e-12);
        let g = g_from_eta(2.0, 1.0, 0.37).unwrap();
        assert!(rel(kappa_from_collision(g, 0.37).unwrap(), 2.0) < 1e-12);
    }

    #[test]
    fn bath_spec_invariants() {
        assert!(BathSpec::paired(500, 100.0, 20.0, 1.0).validate().is_ok());
        assert!(matches!(
            BathSpec::paired(501, 100.0, 20.0, 1.0).validate(),
            Err(Error::Configuration(_))
        ));
        assert!(BathSpec::paired(501, 100.0, 20.0, 1.0)
            .with_layout(FrequencyLayout::RandomUniform, 3)
            .validate()
            .is_ok());
        assert!(BathSpec::paired(2, 100.0, 20.0, 1.0).validate().is_err());
        assert!(BathSpec::paired(10, 100.0, 0.0, 1.0).validate().is_err());
        assert!(BathSpec::paired(10, 100.0, 20.0, -1.0).validate().is_err());
    }

    #[test]
    fn grid_and_series_invariants() {
        let g = TimeGrid::uniform(5.0, 500).unwrap();
        assert_eq!(g.len(), 500);
        assert_eq!(g.times()[0], 0.0);
        assert_eq!(g.t_max(), 5.0);
        assert!(TimeGrid::from_times(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![1.0], EngineTag::Bath, "").is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![1.0, 1.2], EngineTag::Bath, "").is_err());
        let s = TimeSeries::new(vec![0.0, 1.0], vec![1.0 + 1e-13, 0.5], EngineTag::Bath, "")
            .unwrap();
        assert_eq!(s.values()[0], 1.0);
        assert_eq!(s.interpolate(0.5), Some(0.75));
        assert_eq!(s.interpolate(1.5), None);
    }

    proptest! {
        #[test]
        fn gamma_kappa_round_trip(gamma in 1e-6f64..1e3, delta in 1e-3f64..1e3) {
            let k = kappa_from_gamma(gamma, delta).unwrap();
            let back = gamma_from_kappa(k, delta).unwrap();
            prop_assert!(rel(back, gamma) < 1e-12);
        }

        #[test]
        fn collision_composition_is_identity(eta in 0.0f64..100.0, t in 1e-9f64..=1.0) {
            let g = g_from_eta(eta, 1.0, t).unwrap();
            let k = kappa_from_collision(g, t).unwrap();
            prop_assert!(rel(k, eta) < 1e-12);
        }

        #[test]
        fn maps_are_monotone(a in 0.0f64..50.0, b in 0.0f64..50.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(kappa_from_gamma(lo, 7.0).unwrap() <= kappa_from_gamma(hi, 7.0).unwrap());
            prop_assert!(gamma_from_eta(lo, 7.0, 1.0).unwrap() <= gamma_from_eta(hi, 7.0, 1.0).unwrap());
            prop_assert!(g_from_eta(lo, 1.0, 0.1).unwrap() <= g_from_eta(hi, 1.0, 0.1).unwrap());
            prop_assert!(kappa_from_collision(lo, 0.1).unwrap() <= kappa_from_collision(hi, 0.1).unwrap());
        }
    }
}
