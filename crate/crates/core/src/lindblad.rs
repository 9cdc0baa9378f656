//! Master-equation dynamics of the two modes with mode 1 damped at rate `κ`:
//!
//! `dρ/dt = −i[H, ρ] + κ(2a₁ρa₁† − a₁†a₁ρ − ρa₁†a₁)`,
//! `H = Ω(a₁†a₁ + a₂†a₂) + G(a₁†a₂ + a₂†a₁)`.
//!
//! Starting from `|0₁,1₂⟩` the generator never creates a second excitation, so
//! the dynamics is exact on the three states `{|0,0⟩, |1,0⟩, |0,1⟩}`.
//!
//! In the frame rotating at `Ω` the one-excitation amplitudes obey
//! `ċ₁ = −κc₁ − iGc₂`, `ċ₂ = −iGc₁`, i.e. `c̈₂ + κċ₂ + G²c₂ = 0`: a damped
//! oscillator that is critically damped at `κ = 2G`.

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;

use crate::eigen;
use crate::error::{Error, Result};
use crate::params::{EngineTag, MasterSpec, TimeGrid, TimeSeries};

/// Index of `|0,0⟩` in the reduced basis.
pub const VACUUM: usize = 0;
/// Index of `|1,0⟩` (excitation in mode 1).
pub const MODE_1: usize = 1;
/// Index of `|0,1⟩` (excitation in mode 2).
pub const MODE_2: usize = 2;

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-10;

/// Looser bounds enforced along integrated trajectories.
const TRAJECTORY_TOL: f64 = 1e-9;

/// Density matrix on `{|0,0⟩, |1,0⟩, |0,1⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    rho: Matrix3<Complex64>,
}

impl ReducedState {
    /// Validates the state invariants (Hermitian, unit trace, positive).
    pub fn new(rho: Matrix3<Complex64>) -> Result<Self> {
        let state = ReducedState { rho };
        state.check(HERMITICITY_TOL, TRACE_TOL, POSITIVITY_TOL)?;
        Ok(state)
    }

    /// Wraps a matrix without checking it.
    pub(crate) fn from_matrix_unchecked(rho: Matrix3<Complex64>) -> Self {
        ReducedState { rho }
    }

    /// `|k⟩⟨k|` for a basis index `k`.
    pub fn basis(k: usize) -> Self {
        let mut rho = Matrix3::zeros();
        rho[(k, k)] = Complex64::new(1.0, 0.0);
        ReducedState { rho }
    }

    /// Initial state `|0₁,1₂⟩⟨0₁,1₂|`.
    pub fn excited_mode2() -> Self {
        Self::basis(MODE_2)
    }

    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.rho
    }

    pub fn population(&self, k: usize) -> f64 {
        self.rho[(k, k)].re
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let diff = self.rho - self.rho.adjoint();
        diff.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Smallest eigenvalue of the Hermitian part.
    ///
    /// Uses the real embedding `[[Re ρ, −Im ρ], [Im ρ, Re ρ]]`, whose spectrum
    /// is that of `ρ` with every eigenvalue doubled.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let h = (self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        let embed = DMatrix::from_fn(6, 6, |i, j| {
            let z = h[(i % 3, j % 3)];
            match (i < 3, j < 3) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let eig = eigen::symmetric_eigen(&embed)?;
        Ok(eig.eigenvalues[0])
    }

    pub(crate) fn check(&self, herm_tol: f64, trace_tol: f64, pos_tol: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if !(herm <= herm_tol) {
            return Err(Error::Numerical(format!(
                "state is not Hermitian: max |rho - rho^dag| = {herm:.3e}"
            )));
        }
        let tr = self.trace();
        if !((tr.re - 1.0).abs() <= trace_tol && tr.im.abs() <= trace_tol) {
            return Err(Error::Numerical(format!("state trace {tr} differs from 1")));
        }
        let lo = self.min_eigenvalue()?;
        if !(lo >= -pos_tol) {
            return Err(Error::Numerical(format!(
                "state is not positive: smallest eigenvalue {lo:.3e}"
            )));
        }
        Ok(())
    }

    pub(crate) fn hermitize(&mut self) {
        self.rho = (self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
    }
}

/// Which side of the turning point `κ = 2G` a damping rate lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `κ < 2G`: stronger damping drains mode 2 faster.
    Dissipative,
    /// `κ = 2G`.
    Critical,
    /// `κ > 2G`: stronger damping protects the excitation in mode 2.
    Zeno,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Dissipative => "dissipative",
            Regime::Critical => "critical",
            Regime::Zeno => "zeno",
        })
    }
}

fn is_critical(kappa: f64, g: f64) -> bool {
    (kappa - 2.0 * g).abs() <= 1e-12 * 2.0 * g
}

pub fn regime_of(spec: &MasterSpec) -> Regime {
    let g = spec.g_coupling;
    if is_critical(spec.kappa, g) {
        Regime::Critical
    } else if spec.kappa < 2.0 * g {
        Regime::Dissipative
    } else {
        Regime::Zeno
    }
}

/// Rotating-frame amplitude `c₂(t)` (real for this initial state).
pub fn closed_form_amplitude(spec: &MasterSpec, t: f64) -> f64 {
    let g = spec.g_coupling;
    let k = spec.kappa;
    let half = 0.5 * k;
    if is_critical(k, g) {
        (-g * t).exp() * (1.0 + g * t)
    } else if k < 2.0 * g {
        let w = (g * g - half * half).sqrt();
        (-half * t).exp() * ((w * t).cos() + half / w * (w * t).sin())
    } else {
        // e^{−κt/2}[cosh μt + (κ/2μ) sinh μt] with the growing exponential
        // factored out: no overflow at large κt, no cancellation near κ = 2G.
        let mu = (half * half - g * g).sqrt();
        let decay = (-2.0 * mu * t).exp();
        let sinh_part = -(-2.0 * mu * t).exp_m1();
        ((mu - half) * t).exp() * 0.5 * ((1.0 + decay) + half / mu * sinh_part)
    }
}

/// Probability `|c₂(t)|²` of finding the excitation in mode 2.
pub fn closed_form_p(spec: &MasterSpec, t: f64) -> f64 {
    closed_form_amplitude(spec, t).powi(2)
}

/// Closed-form probabilities at the given grid points.
pub fn closed_form_series(spec: &MasterSpec, grid: &TimeGrid) -> Result<TimeSeries> {
    spec.validate()?;
    let values = grid.times().iter().map(|&t| closed_form_p(spec, t)).collect();
    TimeSeries::new(
        grid.times().to_vec(),
        values,
        EngineTag::LindbladClosed,
        spec.digest(),
    )
}

/// Default integration step, `10⁻³ / max(G, κ, |Ω|)`.
pub fn default_dt(spec: &MasterSpec) -> f64 {
    let scale = spec
        .g_coupling
        .max(spec.kappa)
        .max(spec.omega.abs())
        .max(f64::MIN_POSITIVE);
    1e-3 / scale
}

/// Right-hand side of the master equation on the reduced space.
#[derive(Debug, Clone, Copy)]
struct Generator {
    h: Matrix3<Complex64>,
    lowering: Matrix3<Complex64>,
    number: Matrix3<Complex64>,
    kappa: f64,
}

impl Generator {
    fn new(spec: &MasterSpec) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        let mut h = Matrix3::zeros();
        h[(MODE_1, MODE_1)] = c(spec.omega);
        h[(MODE_2, MODE_2)] = c(spec.omega);
        h[(MODE_1, MODE_2)] = c(spec.g_coupling);
        h[(MODE_2, MODE_1)] = c(spec.g_coupling);
        // a₁ = |0,0⟩⟨1,0| on this space
        let mut lowering = Matrix3::zeros();
        lowering[(VACUUM, MODE_1)] = c(1.0);
        let number = lowering.adjoint() * lowering;
        Generator {
            h,
            lowering,
            number,
            kappa: spec.kappa,
        }
    }

    fn apply(&self, rho: &Matrix3<Complex64>) -> Matrix3<Complex64> {
        let minus_i = Complex64::new(0.0, -1.0);
        let unitary = (self.h * rho - rho * self.h) * minus_i;
        if self.kappa == 0.0 {
            return unitary;
        }
        let jump = self.lowering * rho * self.lowering.adjoint() * Complex64::new(2.0, 0.0);
        let anti = self.number * rho + rho * self.number;
        unitary + (jump - anti) * Complex64::new(self.kappa, 0.0)
    }

    fn rk4_step(&self, rho: &Matrix3<Complex64>, dt: f64) -> Matrix3<Complex64> {
        let half = Complex64::new(0.5 * dt, 0.0);
        let full = Complex64::new(dt, 0.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + k1 * half));
        let k3 = self.apply(&(rho + k2 * half));
        let k4 = self.apply(&(rho + k3 * full));
        rho + (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
            * Complex64::new(dt / 6.0, 0.0)
    }
}

/// Integrates the master equation from `|0,1⟩⟨0,1|` with classical RK4 and
/// samples the reduced state at every grid point.
///
/// Each grid interval is split into equal substeps no longer than `dt`
/// (default [`default_dt`]). Trace, Hermiticity and positivity are checked
/// at every sample to within `1e-9`.
pub fn rk4_trajectory(
    spec: &MasterSpec,
    grid: &TimeGrid,
    dt: Option<f64>,
) -> Result<Vec<ReducedState>> {
    spec.validate()?;
    let dt = dt.unwrap_or_else(|| default_dt(spec));
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!("dt must be > 0, got {dt}")));
    }
    let generator = Generator::new(spec);
    let mut state = ReducedState::excited_mode2();
    let mut t = 0.0;
    let mut steps_taken = 0usize;
    let mut out = Vec::with_capacity(grid.len());
    for &target in grid.times() {
        let span = target - t;
        if span > 0.0 {
            let n = (span / dt).ceil().max(1.0) as usize;
            let h = span / n as f64;
            let mut rho = state.rho;
            for _ in 0..n {
                rho = generator.rk4_step(&rho, h);
            }
            steps_taken += n;
            state = ReducedState::from_matrix_unchecked(rho);
            t = target;
        }
        state
            .check(TRAJECTORY_TOL, TRAJECTORY_TOL, TRAJECTORY_TOL)
            .map_err(|e| {
                Error::Numerical(format!(
                    "{e} at t = {t} after {steps_taken} steps of dt <= {dt:.3e} ({})",
                    spec.digest()
                ))
            })?;
        state.hermitize();
        out.push(state);
    }
    Ok(out)
}

/// Mode-2 population from [`rk4_trajectory`].
pub fn rk4_series(spec: &MasterSpec, grid: &TimeGrid, dt: Option<f64>) -> Result<TimeSeries> {
    let states = rk4_trajectory(spec, grid, dt)?;
    let values = states.iter().map(|s| s.population(MODE_2)).collect();
    TimeSeries::new(
        grid.times().to_vec(),
        values,
        EngineTag::LindbladIntegrated,
        spec.digest(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(kappa: f64) -> MasterSpec {
        MasterSpec::new(kappa, 100.0)
    }

    /// Independent oracle: integrate the rotating-frame amplitude equations
    /// with a fine fixed-step RK4.
    fn amplitude_oracle(kappa: f64, t_end: f64) -> f64 {
        let n = 200_000;
        let h = t_end / n as f64;
        let i = Complex64::i();
        let f = |c1: Complex64, c2: Complex64| (-kappa * c1 - i * c2, -i * c1);
        let (mut c1, mut c2) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        for _ in 0..n {
            let (a1, a2) = f(c1, c2);
            let (b1, b2) = f(c1 + a1 * (h / 2.0), c2 + a2 * (h / 2.0));
            let (d1, d2) = f(c1 + b1 * (h / 2.0), c2 + b2 * (h / 2.0));
            let (e1, e2) = f(c1 + d1 * h, c2 + d2 * h);
            c1 += (a1 + b1 * 2.0 + d1 * 2.0 + e1) * (h / 6.0);
            c2 += (a2 + b2 * 2.0 + d2 * 2.0 + e2) * (h / 6.0);
        }
        c2.norm_sqr()
    }

    #[test]
    fn closed_form_matches_amplitude_oracle() {
        for kappa in [0.0, 0.125, 0.5, 1.999, 2.0, 2.001, 8.0, 32.0] {
            for t in [0.3, 1.0, 2.5, 5.0] {
                let p = closed_form_p(&spec(kappa), t);
                let o = amplitude_oracle(kappa, t);
                assert!((p - o).abs() < 1e-10, "kappa {kappa} t {t}: {p} vs {o}");
            }
        }
    }

    #[test]
    fn closed_form_special_values() {
        for t in [0.0, 0.4, 1.3, 4.0] {
            let p = closed_form_p(&spec(0.0), t);
            assert!((p - 0.5 * (1.0 + (2.0 * t).cos())).abs() < 1e-13);
        }
        let crit = closed_form_p(&spec(2.0), 1.0);
        let expected = (2.0 / std::f64::consts::E).powi(2);
        assert!((crit - expected).abs() < 1e-14);
        assert!((crit - 0.54134).abs() < 1e-5);
        for k in [0.0, 0.5, 2.0, 9.0, 1e4] {
            assert_eq!(closed_form_p(&spec(k), 0.0), 1.0);
        }
        // no overflow deep in the Zeno regime
        let p = closed_form_p(&spec(1e4), 500.0);
        assert!(p.is_finite() && p > 0.0);
    }

    #[test]
    fn regimes() {
        assert_eq!(regime_of(&spec(0.5)), Regime::Dissipative);
        assert_eq!(regime_of(&spec(2.0)), Regime::Critical);
        assert_eq!(regime_of(&spec(2.0 * (1.0 + 1e-13))), Regime::Critical);
        assert_eq!(regime_of(&spec(32.0)), Regime::Zeno);
        assert_eq!(regime_of(&spec(0.0)), Regime::Dissipative);
    }

    #[test]
    fn rk4_tracks_closed_form() {
        let grid = TimeGrid::uniform(5.0, 51).unwrap();
        for kappa in [0.0, 0.5, 2.0, 8.0] {
            let s = spec(kappa);
            let series = rk4_series(&s, &grid, None).unwrap();
            for (t, p) in series.points() {
                assert!((p - closed_form_p(&s, t)).abs() < 1e-8, "kappa {kappa}, t {t}");
            }
        }
    }

    #[test]
    fn undamped_trajectory_keeps_trace_and_period() {
        let s = spec(0.0);
        let period = std::f64::consts::PI;
        let grid = TimeGrid::from_times(vec![0.0, 0.5 * period, period, 2.0 * period]).unwrap();
        let states = rk4_trajectory(&s, &grid, None).unwrap();
        for st in &states {
            assert!((st.trace().re - 1.0).abs() < 1e-12);
        }
        assert!(states[1].population(MODE_2) < 1e-9);
        assert!((states[2].population(MODE_2) - 1.0).abs() < 1e-9);
        assert!((states[3].population(MODE_2) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zeno_ordering_at_end_of_window() {
        assert!(closed_form_p(&spec(32.0), 5.0) >= closed_form_p(&spec(8.0), 5.0));
        let grid = TimeGrid::uniform(5.0, 2).unwrap();
        let hi = rk4_series(&MasterSpec::new(32.0, 0.0), &grid, None).unwrap();
        let lo = rk4_series(&MasterSpec::new(8.0, 0.0), &grid, None).unwrap();
        assert!(hi.values()[1] >= lo.values()[1]);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let s = MasterSpec::new(2.0, 10.0);
        let grid = TimeGrid::uniform(5.0, 11).unwrap();
        let err = |dt: f64| {
            let series = rk4_series(&s, &grid, Some(dt)).unwrap();
            series
                .points()
                .map(|(t, p)| (p - closed_form_p(&s, t)).abs())
                .fold(0.0, f64::max)
        };
        let coarse = err(0.02);
        let fine = err(0.01);
        let ratio = coarse / fine;
        assert!((13.0..=19.0).contains(&ratio), "ratio {ratio} ({coarse:e}, {fine:e})");
    }

    #[test]
    fn omega_does_not_change_populations() {
        let grid = TimeGrid::uniform(2.0, 21).unwrap();
        let a = rk4_series(&MasterSpec::new(1.5, 0.0), &grid, Some(1e-4)).unwrap();
        let b = rk4_series(&MasterSpec::new(1.5, 37.0), &grid, Some(1e-4)).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn state_validation() {
        assert!(ReducedState::new(ReducedState::basis(VACUUM).rho).is_ok());
        let mut bad = Matrix3::zeros();
        bad[(0, 0)] = Complex64::new(1.5, 0.0);
        bad[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(ReducedState::new(bad).is_err());
        let mut skew = ReducedState::basis(MODE_1).rho;
        skew[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(ReducedState::new(skew).is_err());
        let mut half = Matrix3::zeros();
        half[(1, 1)] = Complex64::new(0.5, 0.0);
        half[(2, 2)] = Complex64::new(0.5, 0.0);
        half[(1, 2)] = Complex64::new(0.0, 0.5);
        half[(2, 1)] = Complex64::new(0.0, -0.5);
        let st = ReducedState::new(half).unwrap();
        assert!(st.min_eigenvalue().unwrap().abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn zeno_side_is_monotone(k1 in 2.0f64..40.0, dk in 0.01f64..40.0, t in 0.01f64..=5.0) {
            let lo = closed_form_p(&spec(k1), t);
            let hi = closed_form_p(&spec(k1 + dk), t);
            prop_assert!(hi > lo);
        }

        #[test]
        fn closed_form_is_a_probability(k in 0.0f64..100.0, t in 0.0f64..50.0) {
            let p = closed_form_p(&spec(k), t);
            prop_assert!((0.0..=1.0 + 1e-15).contains(&p));
        }
    }
}
