//! Dense real symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! iteration with Wilkinson-style shifts (the EISPACK `tred2`/`tql2` pair).
//! The result is deterministic for a fixed input.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// QL sweeps allowed per eigenvalue before giving up.
const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues in ascending order and the orthogonal matrix whose column `j`
/// is the eigenvector for `eigenvalues[j]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SymmetricEigen {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max |PᵀP − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let p = &self.eigenvectors;
        let ptp = p.transpose() * p;
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ptp[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// `max |AP − PD|` for the matrix this decomposition claims to diagonalize.
    pub fn residual(&self, a: &DMatrix<f64>) -> f64 {
        let p = &self.eigenvectors;
        let ap = a * p;
        let mut worst = 0.0f64;
        for j in 0..self.dim() {
            let lambda = self.eigenvalues[j];
            for i in 0..self.dim() {
                worst = worst.max((ap[(i, j)] - lambda * p[(i, j)]).abs());
            }
        }
        worst
    }

    /// `P D Pᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let p = &self.eigenvectors;
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            p[(i, j)] * self.eigenvalues[j]
        });
        scaled * p.transpose()
    }
}

/// Largest absolute entry.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Diagonalizes a real symmetric matrix.
///
/// Inputs that are symmetric only up to rounding (relative `1e-12`) are
/// symmetrized first; anything worse is a domain error.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::domain(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(SymmetricEigen {
            eigenvalues: Vec::new(),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let scale = max_abs(a);
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (a[(i, j)], a[(j, i)]);
            if (x - y).abs() > 1e-12 * scale {
                return Err(Error::domain(format!(
                    "matrix is not symmetric at ({i}, {j}): {x} vs {y}"
                )));
            }
            v[i * n + j] = 0.5 * (x + y);
        }
    }

    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut v, &mut d, &mut e);
    // QL rotates pairs of eigenvectors; keep them as contiguous rows.
    transpose_in_place(n, &mut v);
    if let Err(l) = ql_implicit(n, &mut v, &mut d, &mut e) {
        let partial = assemble(n, &v, &d);
        let worst = partial.residual(a);
        return Err(Error::Numerical(format!(
            "QL iteration did not converge for eigenvalue {l} of {n} \
             (worst residual {worst:.3e})"
        )));
    }
    Ok(assemble(n, &v, &d))
}

fn transpose_in_place(n: usize, v: &mut [f64]) {
    for i in 0..n {
        for j in (i + 1)..n {
            v.swap(i * n + j, j * n + i);
        }
    }
}

/// `vt` holds eigenvector `k` in row `k`.
fn assemble(n: usize, vt: &[f64], d: &[f64]) -> SymmetricEigen {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&k| d[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| vt[order[j] * n + i]);
    SymmetricEigen {
        eigenvalues,
        eigenvectors,
    }
}

/// Householder reduction. On exit `v` (row-major) holds the accumulated
/// orthogonal transform, `d` the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..(n - 1) {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            // g = uᵀV over the leading block, then V -= d gᵀ, both row by row
            let mut g = vec![0.0; i + 1];
            for k in 0..=i {
                let u = v[at(k, i + 1)];
                for (gj, vkj) in g.iter_mut().zip(&v[at(k, 0)..=at(k, i)]) {
                    *gj += u * vkj;
                }
            }
            for k in 0..=i {
                let dk = d[k];
                for (vkj, gj) in v[at(k, 0)..=at(k, i)].iter_mut().zip(&g) {
                    *vkj -= gj * dk;
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal form, rotating the rows of `vt`. Returns
/// the index of the first eigenvalue that failed to converge.
fn ql_implicit(n: usize, vt: &mut [f64], d: &mut [f64], e: &mut [f64]) -> std::result::Result<(), usize> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(l);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = vt.split_at_mut((i + 1) * n);
                    let row = &mut lo[i * n..];
                    for (vk, vk1) in row.iter_mut().zip(&mut hi[..n]) {
                        let (a, b) = (*vk, *vk1);
                        *vk1 = s * a + c * b;
                        *vk = c * a - s * b;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_by_two_block() {
        let a = DMatrix::from_row_slice(2, 2, &[100.0, 1.0, 1.0, 100.0]);
        let eig = symmetric_eigen(&a).unwrap();
        assert!((eig.eigenvalues[0] - 99.0).abs() < 1e-12);
        assert!((eig.eigenvalues[1] - 101.0).abs() < 1e-12);
        assert!(eig.orthogonality_error() < 1e-14);
    }

    #[test]
    fn one_by_one_and_diagonal() {
        let a = DMatrix::from_row_slice(1, 1, &[3.5]);
        let eig = symmetric_eigen(&a).unwrap();
        assert_eq!(eig.eigenvalues, vec![3.5]);
        assert_eq!(eig.eigenvectors[(0, 0)].abs(), 1.0);

        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0]));
        let eig = symmetric_eigen(&d).unwrap();
        assert_eq!(eig.eigenvalues, vec![-1.0, 2.0, 3.0]);
        assert!(eig.residual(&d) < 1e-15);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(symmetric_eigen(&a), Err(Error::Domain(_))));
        let b = DMatrix::<f64>::zeros(2, 3);
        assert!(symmetric_eigen(&b).is_err());
    }

    #[test]
    fn degenerate_spectrum() {
        // J - I for the 4x4 all-ones J: eigenvalues -1 (x3) and 3
        let a = DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 });
        let eig = symmetric_eigen(&a).unwrap();
        for l in &eig.eigenvalues[..3] {
            assert!((l + 1.0).abs() < 1e-13);
        }
        assert!((eig.eigenvalues[3] - 3.0).abs() < 1e-13);
        assert!(eig.orthogonality_error() < 1e-13);
        assert!(eig.residual(&a) < 1e-13);
    }

    fn symmetric_matrix(max_n: usize) -> impl Strategy<Value = DMatrix<f64>> {
        (1..=max_n).prop_flat_map(|n| {
            prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |vals| {
                let m = DMatrix::from_vec(n, n, vals);
                (&m + m.transpose()) * 0.5
            })
        })
    }

    proptest! {
        #[test]
        fn decomposition_is_orthogonal_and_exact(a in symmetric_matrix(12)) {
            let eig = symmetric_eigen(&a).unwrap();
            let scale = max_abs(&a).max(1.0);
            prop_assert!(eig.orthogonality_error() <= 1e-12);
            prop_assert!(eig.residual(&a) <= 1e-12 * scale);
            prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let trace: f64 = (0..a.nrows()).map(|i| a[(i, i)]).sum();
            let sum: f64 = eig.eigenvalues.iter().sum();
            prop_assert!((trace - sum).abs() <= 1e-11 * scale * a.nrows() as f64);
        }

        #[test]
        fn reconstruction_matches_input(a in symmetric_matrix(8)) {
            let eig = symmetric_eigen(&a).unwrap();
            let diff = max_abs(&(eig.reconstruct() - &a));
            prop_assert!(diff <= 1e-12 * max_abs(&a).max(1.0));
        }
    }
}
