//! Symmetric Clifford systems `P_0, ..., P_m` on `R^{2l}`.

use nalgebra::DMatrix;

use crate::{GeomError, Result};

/// Minimal `l` for `m = 1..=4`.
const MIN_SIZE: [usize; 4] = [1, 2, 4, 4];

#[derive(Debug, Clone, PartialEq)]
pub struct CliffordSystem {
    pub m: usize,
    pub l: usize,
    pub matrices: Vec<DMatrix<f64>>,
}

/// Left multiplication by the quaternion units `i, j, k` on `R^4 = H`.
fn quaternion_units() -> [DMatrix<f64>; 3] {
    let i = DMatrix::from_row_slice(
        4,
        4,
        &[
            0., -1., 0., 0., //
            1., 0., 0., 0., //
            0., 0., 0., -1., //
            0., 0., 1., 0.,
        ],
    );
    let j = DMatrix::from_row_slice(
        4,
        4,
        &[
            0., 0., -1., 0., //
            0., 0., 0., 1., //
            1., 0., 0., 0., //
            0., -1., 0., 0.,
        ],
    );
    let k = DMatrix::from_row_slice(
        4,
        4,
        &[
            0., 0., 0., -1., //
            0., 0., -1., 0., //
            0., 1., 0., 0., //
            1., 0., 0., 0.,
        ],
    );
    [i, j, k]
}

/// `copies` diagonal copies of `block`.
fn block_diagonal(block: &DMatrix<f64>, copies: usize) -> DMatrix<f64> {
    let s = block.nrows();
    let mut out = DMatrix::zeros(s * copies, s * copies);
    for c in 0..copies {
        out.view_mut((c * s, c * s), (s, s)).copy_from(block);
    }
    out
}

/// Skew anticommuting complex structures `E_1, ..., E_{m-1}` on `R^l`.
fn complex_structures(m: usize, l: usize) -> Vec<DMatrix<f64>> {
    match m {
        1 => Vec::new(),
        2 => {
            let j = DMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.]);
            vec![block_diagonal(&j, l / 2)]
        }
        _ => quaternion_units()[..m - 1]
            .iter()
            .map(|e| block_diagonal(e, l / 4))
            .collect(),
    }
}

/// Builds `P_0 = diag(I, -I)`, `P_1 = [[0, I], [I, 0]]` and
/// `P_{1+k} = [[0, E_k], [-E_k, 0]]`.
pub fn clifford_build(m: usize, l: usize) -> Result<CliffordSystem> {
    if m == 0 || m > MIN_SIZE.len() || l == 0 || !l.is_multiple_of(MIN_SIZE[m - 1]) {
        return Err(GeomError::NotRepresentable { m, l });
    }
    let id = DMatrix::<f64>::identity(l, l);
    let mut p0 = DMatrix::zeros(2 * l, 2 * l);
    p0.view_mut((0, 0), (l, l)).copy_from(&id);
    p0.view_mut((l, l), (l, l)).copy_from(&(-&id));
    let mut p1 = DMatrix::zeros(2 * l, 2 * l);
    p1.view_mut((0, l), (l, l)).copy_from(&id);
    p1.view_mut((l, 0), (l, l)).copy_from(&id);
    let mut matrices = vec![p0, p1];
    for e in complex_structures(m, l) {
        let mut p = DMatrix::zeros(2 * l, 2 * l);
        p.view_mut((0, l), (l, l)).copy_from(&e);
        p.view_mut((l, 0), (l, l)).copy_from(&(-&e));
        matrices.push(p);
    }
    Ok(CliffordSystem { m, l, matrices })
}

impl CliffordSystem {
    /// `max |P_i - P_i^T|` and `max |P_i P_j + P_j P_i - 2 delta_ij I|`.
    pub fn defect(&self) -> f64 {
        let n = 2 * self.l;
        let mut d = 0.0_f64;
        for (i, a) in self.matrices.iter().enumerate() {
            d = d.max((a - a.transpose()).abs().max());
            for (j, b) in self.matrices.iter().enumerate() {
                let target = if i == j { 2.0 } else { 0.0 };
                let ac = a * b + b * a - DMatrix::identity(n, n) * target;
                d = d.max(ac.abs().max());
            }
        }
        d
    }

    /// `P_c = sum_i c_i P_i`.
    pub fn combination(&self, c: &[f64]) -> DMatrix<f64> {
        let n = 2 * self.l;
        self.matrices
            .iter()
            .zip(c)
            .fold(DMatrix::zeros(n, n), |acc, (p, ci)| acc + p * *ci)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_pair() {
        let c = clifford_build(1, 1).unwrap();
        assert_eq!(
            c.matrices[0],
            DMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.])
        );
        assert_eq!(
            c.matrices[1],
            DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.])
        );
        assert_eq!(c.defect(), 0.0);
    }

    #[test]
    fn representable_sizes() {
        for (m, l) in [(2, 2), (2, 4), (3, 4), (3, 8), (4, 4), (4, 8), (1, 5)] {
            let c = clifford_build(m, l).unwrap();
            assert_eq!(c.matrices.len(), m + 1);
            assert!(c.defect() < 1e-14, "({m}, {l})");
        }
    }

    #[test]
    fn not_representable() {
        for (m, l) in [(4, 3), (2, 3), (3, 2), (5, 8), (0, 2)] {
            assert_eq!(
                clifford_build(m, l),
                Err(GeomError::NotRepresentable { m, l })
            );
        }
    }
}
