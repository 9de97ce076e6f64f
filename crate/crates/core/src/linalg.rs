//! Small dense linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};

/// `sign(z) * max(|z| - gamma, 0)`.
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Columns of `x` indexed by `cols`, in the given order.
pub fn select_columns(x: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), cols.len(), |i, k| x[(i, cols[k])])
}

pub fn select_entries(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_fn(idx.len(), |k, _| v[idx[k]])
}

/// `Xᵀv / n`.
pub fn scaled_xt_mul(x: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    let n = x.nrows() as f64;
    x.tr_mul(v) / n
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn l1_norm(v: &DVector<f64>) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Indices of nonzero entries, ascending.
pub fn support(v: &DVector<f64>) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| **x != 0.0)
        .map(|(j, _)| j)
        .collect()
}

/// Complement of a sorted index set within `0..p`.
pub fn complement(set: &[usize], p: usize) -> Vec<usize> {
    let mut mask = vec![false; p];
    for &j in set {
        mask[j] = true;
    }
    (0..p).filter(|&j| !mask[j]).collect()
}

/// Cholesky factor `L` (lower triangular, `A = L Lᵀ`) of a Gram matrix that
/// grows and shrinks one variable at a time.
///
/// Appending costs one triangular solve; removal re-triangularizes the
/// trailing block with Givens rotations. Both are O(k²).
#[derive(Debug, Clone, Default)]
pub struct UpdatableCholesky {
    rows: Vec<Vec<f64>>,
}

impl UpdatableCholesky {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Append a variable whose cross products with the current variables are
    /// `cross` (same order) and whose squared norm is `diag`. Returns `false`
    /// and leaves the factor untouched if the new pivot is below
    /// `rel_tol * diag`.
    pub fn push(&mut self, cross: &[f64], diag: f64, rel_tol: f64) -> bool {
        let k = self.dim();
        debug_assert_eq!(cross.len(), k);
        let mut row = vec![0.0; k + 1];
        for i in 0..k {
            let li = &self.rows[i];
            let mut acc = cross[i];
            for (j, rj) in row.iter().take(i).enumerate() {
                acc -= li[j] * rj;
            }
            row[i] = acc / li[i];
        }
        let d2 = diag - row[..k].iter().map(|v| v * v).sum::<f64>();
        if !(d2 > rel_tol * diag.abs()) {
            return false;
        }
        row[k] = d2.sqrt();
        self.rows.push(row);
        true
    }

    /// Remove the variable at position `pos`.
    pub fn remove(&mut self, pos: usize) {
        let m = self.dim();
        assert!(pos < m);
        self.rows.remove(pos);
        // Rows pos.. now have one entry past the diagonal; rotate columns
        // (i, i+1) to restore lower-triangular form.
        for i in pos..m - 1 {
            let a = self.rows[i][i];
            let b = self.rows[i][i + 1];
            let r = a.hypot(b);
            let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (a / r, b / r) };
            for row in self.rows.iter_mut().skip(i) {
                let x = row[i];
                let y = row[i + 1];
                row[i] = c * x + s * y;
                row[i + 1] = -s * x + c * y;
            }
            self.rows[i][i + 1] = 0.0;
        }
        for (i, row) in self.rows.iter_mut().enumerate() {
            row.truncate(i + 1);
        }
    }

    /// Solve `L Lᵀ x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let k = self.dim();
        let mut y = b.to_vec();
        for i in 0..k {
            let row = &self.rows[i];
            let mut acc = y[i];
            for j in 0..i {
                acc -= row[j] * y[j];
            }
            y[i] = acc / row[i];
        }
        for i in (0..k).rev() {
            let mut acc = y[i];
            for j in i + 1..k {
                acc -= self.rows[j][i] * y[j];
            }
            y[i] = acc / self.rows[i][i];
        }
        y
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let k = self.dim();
        DMatrix::from_fn(k, k, |i, j| if j <= i { self.rows[i][j] } else { 0.0 })
    }
}
