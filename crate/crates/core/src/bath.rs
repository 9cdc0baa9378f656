//! Exact single-excitation dynamics of two modes coupled to a finite bath.
//!
//! The quadratic Hamiltonian `Σ a†_i H_ij a_j` is fully described by the real
//! symmetric `N × N` matrix `H`: mode 1 sits in row 0, mode 2 in row 1 and the
//! bath oscillators in rows `2..N`. Mode 1 couples to mode 2 through `G` and to
//! every bath oscillator through `Γ/√(N−2)`, giving an arrowhead pattern.
//!
//! With `H = P D Pᵀ`, an excitation starting in mode 2 survives there with
//! probability `|Σ_j P²_{2j} e^{−iλ_j t}|²`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigen::{self, SymmetricEigen};
use crate::error::{Error, Result};
use crate::params::{BathSpec, EngineTag, FrequencyLayout, TimeGrid, TimeSeries};

/// Fraction of the recurrence time after which results are flagged.
pub const RECURRENCE_GUARD: f64 = 0.5;

const ORTHOGONALITY_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-9;

/// Row of mode 2 in the coupling matrix.
const MODE_2: usize = 1;

/// Dense coupling matrix of modes plus bath.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    entries: DMatrix<f64>,
}

impl CouplingMatrix {
    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Diagonal entries `2..N`.
    pub fn environment_frequencies(&self) -> Vec<f64> {
        (2..self.dimension()).map(|k| self.entries[(k, k)]).collect()
    }
}

/// Bath frequencies in the order they occupy rows `2..N`.
pub fn environment_frequencies(spec: &BathSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let m = spec.n_env();
    let freqs = match spec.layout {
        FrequencyLayout::PairedEquispaced => {
            let spacing = spec.delta / m as f64;
            (1..=m / 2)
                .flat_map(|j| {
                    let shift = j as f64 * spacing;
                    [spec.omega + shift, spec.omega - shift]
                })
                .collect()
        }
        FrequencyLayout::RandomUniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let lo = spec.omega - spec.delta / 2.0;
            let hi = spec.omega + spec.delta / 2.0;
            (0..m).map(|_| rng.random_range(lo..=hi)).collect()
        }
    };
    Ok(freqs)
}

pub fn build_hamiltonian(spec: &BathSpec) -> Result<CouplingMatrix> {
    let freqs = environment_frequencies(spec)?;
    let n = spec.n_total;
    let coupling = spec.gamma / (spec.n_env() as f64).sqrt();
    let mut h = DMatrix::zeros(n, n);
    h[(0, 0)] = spec.omega;
    h[(1, 1)] = spec.omega;
    h[(0, 1)] = spec.g_coupling;
    h[(1, 0)] = spec.g_coupling;
    for (k, w) in freqs.into_iter().enumerate() {
        let row = k + 2;
        h[(row, row)] = w;
        h[(0, row)] = coupling;
        h[(row, 0)] = coupling;
    }
    Ok(CouplingMatrix { entries: h })
}

/// Eigenvalues (ascending) and orthogonal eigenvectors of a coupling matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigen: SymmetricEigen,
    /// `P²_{2j}`: weight of mode 2 in normal mode `j`.
    weights: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigen.eigenvectors
    }

    pub fn mode2_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn orthogonality_error(&self) -> f64 {
        self.eigen.orthogonality_error()
    }

    pub fn residual(&self, h: &CouplingMatrix) -> f64 {
        self.eigen.residual(h.entries())
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.eigen.reconstruct()
    }

    /// Amplitude `Σ_j P²_{2j} e^{−iλ_j t}` of the excitation remaining in mode 2.
    pub fn survival_amplitude(&self, t: f64) -> Complex64 {
        self.eigen
            .eigenvalues
            .iter()
            .zip(&self.weights)
            .map(|(&lambda, &w)| Complex64::from_polar(w, -lambda * t))
            .sum()
    }
}

pub fn eigendecompose(h: &CouplingMatrix) -> Result<SpectralDecomposition> {
    let eigen = eigen::symmetric_eigen(h.entries())?;
    let orth = eigen.orthogonality_error();
    let scale = eigen::max_abs(h.entries());
    let resid = eigen.residual(h.entries());
    if orth > ORTHOGONALITY_TOL || resid > RESIDUAL_TOL * scale {
        return Err(Error::Numerical(format!(
            "eigendecomposition outside tolerance: orthogonality {orth:.3e}, \
             residual {resid:.3e} (matrix scale {scale:.3e})"
        )));
    }
    let weights = (0..eigen.dim())
        .map(|j| eigen.eigenvectors[(MODE_2, j)].powi(2))
        .collect();
    Ok(SpectralDecomposition { eigen, weights })
}

/// Probability that an excitation prepared in mode 2 is found there at `t`.
pub fn survival_probability(sd: &SpectralDecomposition, t: f64) -> f64 {
    sd.survival_amplitude(t).norm_sqr()
}

/// Revival time scale `2π(N−2)/Δ` set by the bath level spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceTime {
    pub time: f64,
    /// True for random layouts, where there is no exact level spacing.
    pub heuristic: bool,
}

pub fn recurrence_time(spec: &BathSpec) -> Result<RecurrenceTime> {
    spec.validate()?;
    Ok(RecurrenceTime {
        time: 2.0 * PI * spec.n_env() as f64 / spec.delta,
        heuristic: spec.layout == FrequencyLayout::RandomUniform,
    })
}

/// Survival probability of mode 2 sampled on `grid`.
///
/// Grids extending past [`RECURRENCE_GUARD`] of the recurrence time are not an
/// error; the series provenance carries a warning instead.
pub fn survival_series(spec: &BathSpec, grid: &TimeGrid) -> Result<TimeSeries> {
    let h = build_hamiltonian(spec)?;
    let sd = eigendecompose(&h)?;
    series_from_decomposition(spec, &sd, grid)
}

/// Like [`survival_series`] with an already computed decomposition of `spec`.
pub fn series_from_decomposition(
    spec: &BathSpec,
    sd: &SpectralDecomposition,
    grid: &TimeGrid,
) -> Result<TimeSeries> {
    let values = grid
        .times()
        .iter()
        .map(|&t| survival_probability(sd, t))
        .collect();
    let mut digest = spec.digest();
    let rec = recurrence_time(spec)?;
    let guard = RECURRENCE_GUARD * rec.time;
    if grid.t_max() > guard {
        digest.push_str(&format!(
            ";warn=t_max {} beyond recurrence guard {:.6}{}",
            grid.t_max(),
            guard,
            if rec.heuristic { " (heuristic)" } else { "" }
        ));
    }
    TimeSeries::new(grid.times().to_vec(), values, EngineTag::Bath, digest)
}
