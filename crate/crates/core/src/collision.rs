//! Repeated interactions: fresh ground-state atoms couple one at a time to
//! mode 1 and are traced out after each collision.
//!
//! During a collision the joint Hamiltonian is
//! `Ω(a₁†a₁ + a₂†a₂) + G(a₁†a₂ + a₂†a₁) + (Ω/2)σ_z + g(a₁†σ₋ + a₁σ₊)`.
//! With at most one excitation and the atom starting in `|g⟩` it acts on
//! `{|0,0,g⟩, |1,0,g⟩, |0,1,g⟩, |0,0,e⟩}`; the vacuum only picks up a phase
//! and the remaining three states form a resonant block. Tracing out the atom
//! leaves the Kraus pair `K₀ = ⟨g|U|g⟩`, `K₁ = ⟨e|U|g⟩`.

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;

use crate::eigen;
use crate::error::{Error, Result};
use crate::lindblad::{ReducedState, MODE_1, MODE_2, VACUUM};
use crate::params::{CollisionSpec, EngineTag, TimeSeries};

const COMPLETENESS_TOL: f64 = 1e-10;
const STATE_TOL: f64 = 1e-10;

/// Kraus operators of one collision on the reduced mode space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausPair {
    pub k0: Matrix3<Complex64>,
    pub k1: Matrix3<Complex64>,
}

impl KrausPair {
    /// Validates `K₀†K₀ + K₁†K₁ = I` to within `1e-10`.
    pub fn new(k0: Matrix3<Complex64>, k1: Matrix3<Complex64>) -> Result<Self> {
        let pair = KrausPair { k0, k1 };
        let err = pair.completeness_error();
        if !(err <= COMPLETENESS_TOL) {
            return Err(Error::domain(format!(
                "Kraus pair is not trace preserving: max |K0^dag K0 + K1^dag K1 - I| = {err:.3e}"
            )));
        }
        Ok(pair)
    }

    /// `max |K₀†K₀ + K₁†K₁ − I|`.
    pub fn completeness_error(&self) -> f64 {
        let sum = self.k0.adjoint() * self.k0 + self.k1.adjoint() * self.k1;
        (sum - Matrix3::identity())
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()))
    }

    fn map(&self, rho: &Matrix3<Complex64>) -> Matrix3<Complex64> {
        self.k0 * rho * self.k0.adjoint() + self.k1 * rho * self.k1.adjoint()
    }
}

// Positions inside the one-excitation block.
const B_MODE_1: usize = 0;
const B_MODE_2: usize = 1;
const B_ATOM: usize = 2;

/// Evolution over one collision, reduced to its action on the modes.
pub fn collision_unitary(spec: &CollisionSpec) -> Result<KrausPair> {
    spec.validate()?;
    let (omega, g_modes, g_atom, t) = (spec.omega, spec.g_coupling, spec.g_atom, spec.t_int);

    // Every state in the block has energy Ω/2 before coupling.
    let mut block = DMatrix::from_diagonal_element(3, 3, 0.5 * omega);
    block[(B_MODE_1, B_MODE_2)] = g_modes;
    block[(B_MODE_2, B_MODE_1)] = g_modes;
    block[(B_MODE_1, B_ATOM)] = g_atom;
    block[(B_ATOM, B_MODE_1)] = g_atom;

    let eig = eigen::symmetric_eigen(&block)?;
    let p = &eig.eigenvectors;
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -l * t))
        .collect();
    let u = |i: usize, j: usize| -> Complex64 {
        (0..3)
            .map(|k| phases[k] * (p[(i, k)] * p[(j, k)]))
            .sum()
    };

    let mut k0 = Matrix3::zeros();
    let mut k1 = Matrix3::zeros();
    // |0,0,g⟩ has energy −Ω/2 and is untouched otherwise.
    k0[(VACUUM, VACUUM)] = Complex64::from_polar(1.0, 0.5 * omega * t);
    for (row, br) in [(MODE_1, B_MODE_1), (MODE_2, B_MODE_2)] {
        for (col, bc) in [(MODE_1, B_MODE_1), (MODE_2, B_MODE_2)] {
            k0[(row, col)] = u(br, bc);
        }
    }
    // The atom absorbs the excitation, leaving the modes in vacuum.
    k1[(VACUUM, MODE_1)] = u(B_ATOM, B_MODE_1);
    k1[(VACUUM, MODE_2)] = u(B_ATOM, B_MODE_2);

    let pair = KrausPair { k0, k1 };
    let err = pair.completeness_error();
    if !(err <= COMPLETENESS_TOL) {
        return Err(Error::Numerical(format!(
            "collision channel completeness error {err:.3e} ({})",
            spec.digest()
        )));
    }
    Ok(pair)
}

/// `K₀ρK₀† + K₁ρK₁†`.
pub fn apply_collision(rho: &ReducedState, k: &KrausPair) -> Result<ReducedState> {
    rho.check(STATE_TOL, STATE_TOL, STATE_TOL)
        .map_err(|e| Error::domain(format!("input state: {e}")))?;
    let err = k.completeness_error();
    if !(err <= COMPLETENESS_TOL) {
        return Err(Error::domain(format!(
            "Kraus pair completeness error {err:.3e}"
        )));
    }
    Ok(ReducedState::from_matrix_unchecked(k.map(rho.matrix())))
}

/// States after `0, 1, …, n_collisions` collisions starting from `|0,1⟩⟨0,1|`.
///
/// Trace and positivity are checked after every collision.
pub fn collision_trajectory(spec: &CollisionSpec) -> Result<Vec<ReducedState>> {
    let kraus = collision_unitary(spec)?;
    let mut rho = *ReducedState::excited_mode2().matrix();
    let mut states = Vec::with_capacity(spec.n_collisions + 1);
    states.push(ReducedState::from_matrix_unchecked(rho));
    for k in 1..=spec.n_collisions {
        rho = kraus.map(&rho);
        let mut state = ReducedState::from_matrix_unchecked(rho);
        state.check(STATE_TOL, STATE_TOL, STATE_TOL).map_err(|e| {
            Error::Numerical(format!("{e} after collision {k} ({})", spec.digest()))
        })?;
        state.hermitize();
        rho = *state.matrix();
        states.push(state);
    }
    Ok(states)
}

/// Mode-2 population sampled at `t_k = k·t_int` for `k = 0..=n_collisions`.
pub fn collision_series(spec: &CollisionSpec) -> Result<TimeSeries> {
    let states = collision_trajectory(spec)?;
    let times = (0..states.len()).map(|k| k as f64 * spec.t_int).collect();
    let values = states.iter().map(|s| s.population(MODE_2)).collect();
    TimeSeries::new(times, values, EngineTag::Collision, spec.digest())
}
