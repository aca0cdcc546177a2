use nalgebra::{DMatrix, DVector};

use crate::{GeomError, Result};

/// Cap on cyclic Jacobi sweeps.
pub const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSpectrum {
    pub eigenvalues: DVector<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub eigenvectors: DMatrix<f64>,
}

impl SymSpectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `V diag(lambda) V^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        v * DMatrix::from_diagonal(&self.eigenvalues) * v.transpose()
    }
}

/// Symmetric eigensolver using cyclic Jacobi rotations.
///
/// Rejects input whose asymmetry exceeds `1e-10 * (1 + max|A|)`.
pub fn sym_eigen(matrix: &DMatrix<f64>) -> Result<SymSpectrum> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: matrix.ncols(),
        });
    }
    let scale = super::max_abs(matrix);
    let mut defect = 0.0_f64;
    for i in 0..n {
        for j in 0..i {
            defect = defect.max((matrix[(i, j)] - matrix[(j, i)]).abs());
        }
    }
    if defect > 1e-10 * (1.0 + scale) || !scale.is_finite() {
        return Err(GeomError::NotSymmetric { defect });
    }

    let mut a = (matrix + matrix.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let frob = a.norm();

    let mut converged = n < 2 || frob == 0.0;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(GeomError::NoConvergence { iterations: sweeps });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
        }
        converged = off.sqrt() <= 1e-17 * frob;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]).then(i.cmp(&j)));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let mut eigenvectors = DMatrix::<f64>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        eigenvectors.set_column(col, &v.column(i));
    }
    Ok(SymSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        let s = sym_eigen(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(s.eigenvalues.as_slice(), &[1.0, 1.0, 1.0]);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -1.0, 0.0]));
        let s = sym_eigen(&d).unwrap();
        assert_eq!(s.eigenvalues.as_slice(), &[-1.0, 0.0, 2.0]);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.1, 1.0]);
        assert!(matches!(sym_eigen(&m), Err(GeomError::NotSymmetric { .. })));
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let s = sym_eigen(&m).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((s.eigenvalues[1] - 3.0).abs() < 1e-15);
        assert!((s.reconstruct() - m).abs().max() < 1e-15);
    }

    #[test]
    fn empty_and_scalar() {
        let s = sym_eigen(&DMatrix::from_element(1, 1, -4.0)).unwrap();
        assert_eq!(s.eigenvalues[0], -4.0);
        let s = sym_eigen(&DMatrix::<f64>::zeros(0, 0)).unwrap();
        assert_eq!(s.eigenvalues.len(), 0);
    }
}
