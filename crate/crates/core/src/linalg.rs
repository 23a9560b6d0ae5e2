//! Small dense symmetric linear algebra: Cholesky solves for the ridge
//! estimates, the `M^{-1}` norm used as exploration width, and cyclic Jacobi
//! eigenvalues for Gram-matrix diagnostics.

use crate::error::{Error, Result};

/// Symmetric matrix stored as its packed lower triangle, so `M[i][j]` and
/// `M[j][i]` are the same cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    lower: Vec<f64>,
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            lower: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn scaled_identity(n: usize, scale: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.lower[packed(i, i)] = scale;
        }
        m
    }

    /// Builds from a closure evaluated on the lower triangle only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                m.lower[packed(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Reads the lower triangle of a dense row-major matrix.
    pub fn from_dense_lower(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::shape("dense matrix must be square"));
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[packed(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.lower[packed(i, j)] = v;
    }

    pub fn add_diagonal(&mut self, c: f64) {
        for i in 0..self.n {
            self.lower[packed(i, i)] += c;
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.lower.iter_mut().for_each(|v| *v *= c);
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..=i {
                let v = self.get(i, j);
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.lower.iter().all(|v| v.is_finite())
    }

    /// `M += x xᵀ` in place.
    pub fn add_outer(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::shape(format!(
                "vector of length {} against matrix of order {}",
                x.len(),
                self.n
            )));
        }
        for i in 0..self.n {
            let xi = x[i];
            let row = &mut self.lower[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
            for (m, xj) in row.iter_mut().zip(x) {
                *m += xi * xj;
            }
        }
        Ok(())
    }
}

/// Returns `M + x xᵀ`.
pub fn rank1_update(m: &SymMatrix, x: &[f64]) -> Result<SymMatrix> {
    let mut out = m.clone();
    out.add_outer(x)?;
    Ok(out)
}

/// Lower-triangular `L` with `L Lᵀ = M`, stored packed by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    n: usize,
    lower: Vec<f64>,
}

impl CholeskyFactor {
    pub fn new(m: &SymMatrix) -> Result<Self> {
        let n = m.order();
        let mut l = vec![0.0; n * (n + 1) / 2];
        for i in 0..n {
            for j in 0..=i {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l[packed(i, k)] * l[packed(j, k)];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                    }
                    l[packed(i, i)] = s.sqrt();
                } else {
                    l[packed(i, j)] = s / l[packed(j, j)];
                }
            }
        }
        Ok(Self { n, lower: l })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.lower[packed(i, j)]
        }
    }

    fn check(&self, b: &[f64]) -> Result<()> {
        if b.len() != self.n {
            return Err(Error::shape(format!(
                "vector of length {} against factor of order {}",
                b.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check(b)?;
        let mut y = b.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.lower[packed(i, k)] * y[k];
            }
            y[i] = s / self.lower[packed(i, i)];
        }
        Ok(y)
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = self.forward(b)?;
        for i in (0..self.n).rev() {
            let mut s = x[i];
            for k in i + 1..self.n {
                s -= self.lower[packed(k, i)] * x[k];
            }
            x[i] = s / self.lower[packed(i, i)];
        }
        Ok(x)
    }

    /// `sqrt(xᵀ M⁻¹ x) = |L⁻¹ x|`.
    pub fn inv_quad_norm(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

pub fn chol_solve(m: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    CholeskyFactor::new(m)?.solve(b)
}

pub fn inv_quad_norm(m: &SymMatrix, x: &[f64]) -> Result<f64> {
    CholeskyFactor::new(m)?.inv_quad_norm(x)
}

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// All eigenvalues in ascending order, by cyclic Jacobi rotations until the
/// off-diagonal Frobenius norm drops below `1e-12 * ‖M‖_F`.
pub fn eigenvalues(m: &SymMatrix) -> Vec<f64> {
    let n = m.order();
    let mut a = m.to_dense();
    let threshold = JACOBI_TOL * m.frobenius_norm();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

pub fn min_eigen(m: &SymMatrix) -> f64 {
    eigenvalues(m).first().copied().unwrap_or(0.0)
}

pub fn max_eigen(m: &SymMatrix) -> f64 {
    eigenvalues(m).last().copied().unwrap_or(0.0)
}
