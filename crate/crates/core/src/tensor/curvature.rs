use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{GeomError, Result};

/// A 4-index curvature tensor `K_ABCD` in an orthonormal frame (or in
/// coordinates, for the oracle's intermediate results).
///
/// Convention: `K_ABCD = <R(e_C, e_D) e_B, e_A>`, so the unit sphere has
/// `K_1212 = 1` and `Ric_AC = sum_B K_ABCB`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curvature4Tensor {
    dim: usize,
    entries: Vec<f64>,
}

impl Curvature4Tensor {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![0.0; dim.pow(4)],
        }
    }

    /// Builds a tensor by evaluating `f` at every index quadruple.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        let v = f(a, b, c, d);
                        t.set(a, b, c, d, v);
                    }
                }
            }
        }
        t
    }

    /// Constant sectional curvature `k`: `K_ABCD = k (d_AC d_BD - d_AD d_BC)`.
    pub fn constant_curvature(dim: usize, k: f64) -> Self {
        let delta = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
        Self::from_fn(dim, |a, b, c, d| {
            k * (delta(a, c) * delta(b, d) - delta(a, d) * delta(b, c))
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.dim + b) * self.dim + c) * self.dim + d
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.entries[self.idx(a, b, c, d)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let i = self.idx(a, b, c, d);
        self.entries[i] = v;
    }

    /// Writes `v` at `(a,b,c,d)` and at the seven images forced by
    /// antisymmetry in each pair and pair exchange.
    pub fn set_symmetric(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        self.set(a, b, c, d, v);
        self.set(b, a, c, d, -v);
        self.set(a, b, d, c, -v);
        self.set(b, a, d, c, v);
        self.set(c, d, a, b, v);
        self.set(d, c, a, b, -v);
        self.set(c, d, b, a, -v);
        self.set(d, c, b, a, v);
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest violation of `K_ABCD = -K_BACD = -K_ABDC = K_CDAB`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let k = self.get(a, b, c, d);
                        worst = worst
                            .max((k + self.get(b, a, c, d)).abs())
                            .max((k + self.get(a, b, d, c)).abs())
                            .max((k - self.get(c, d, a, b)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest violation of the first Bianchi identity
    /// `K_ABCD + K_ACDB + K_ADBC = 0`.
    pub fn bianchi_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let s = self.get(a, b, c, d) + self.get(a, c, d, b) + self.get(a, d, b, c);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let defect = self.symmetry_defect().max(self.bianchi_defect());
        if defect > tol || defect.is_nan() {
            return Err(GeomError::TensorSymmetry { defect });
        }
        Ok(())
    }

    /// `Ric_AC = sum_B K_ABCB`.
    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |a, c| (0..n).map(|b| self.get(a, b, c, b)).sum())
    }

    pub fn scalar(&self) -> f64 {
        self.ricci().trace()
    }

    /// Ricci form restricted to the subspace spanned by the orthonormal
    /// columns of `basis`: `Ric(X, Y) = sum_Z K(X, Z, Y, Z)` with `Z` running
    /// over the columns only.
    pub fn partial_ricci(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(basis.nrows(), self.dim);
        let restricted = self.transform(basis);
        restricted.ricci()
    }

    /// Components in a new frame whose vectors are the columns of `frame`:
    /// `K'_PQRS = K_ABCD F_AP F_BQ F_CR F_DS`.
    pub fn transform(&self, frame: &DMatrix<f64>) -> Self {
        let n = self.dim;
        assert_eq!(frame.nrows(), n);
        let k = frame.ncols();
        // Contract one index at a time: n^4 k + n^3 k^2 + ... operations.
        let mut cur = self.entries.clone();
        let mut dims = [n, n, n, n];
        for slot in 0..4 {
            let mut next = vec![0.0; dims.iter().product::<usize>() / dims[slot] * k];
            let mut new_dims = dims;
            new_dims[slot] = k;
            let stride = |d: &[usize; 4]| [d[1] * d[2] * d[3], d[2] * d[3], d[3], 1];
            let s_old = stride(&dims);
            let s_new = stride(&new_dims);
            for i0 in 0..new_dims[0] {
                for i1 in 0..new_dims[1] {
                    for i2 in 0..new_dims[2] {
                        for i3 in 0..new_dims[3] {
                            let ix = [i0, i1, i2, i3];
                            let p = ix[slot];
                            let mut acc = 0.0;
                            for a in 0..n {
                                let mut jx = ix;
                                jx[slot] = a;
                                let off = jx[0] * s_old[0]
                                    + jx[1] * s_old[1]
                                    + jx[2] * s_old[2]
                                    + jx[3] * s_old[3];
                                acc += cur[off] * frame[(a, p)];
                            }
                            next[i0 * s_new[0] + i1 * s_new[1] + i2 * s_new[2] + i3 * s_new[3]] =
                                acc;
                        }
                    }
                }
            }
            cur = next;
            dims = new_dims;
        }
        Self {
            dim: k,
            entries: cur,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }
}
