use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real matrix in row-major order.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// On-disk layout: `{"rows": n, "cols": m, "data": [row-major numbers]}`.
#[derive(Serialize, Deserialize)]
pub(crate) struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<MatrixJson> for Matrix {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        Matrix::from_row_major(json.rows, json.cols, json.data)
    }
}

impl From<Matrix> for MatrixJson {
    fn from(m: Matrix) -> Self {
        MatrixJson {
            rows: m.rows,
            cols: m.cols,
            data: m.data,
        }
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting empty shapes,
    /// length mismatches and non-finite entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Input(format!("matrix shape {rows}x{cols} has a zero dimension")));
        }
        if data.len() != rows * cols {
            return Err(Error::Input(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Input(format!("entry {pos} is not finite")));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n * m);
        for r in rows {
            assert_eq!(r.as_ref().len(), m, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Matrix { rows: n, cols: m, data }
    }

    /// Column vector from a slice.
    pub fn column(values: &[f64]) -> Self {
        Matrix {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    /// Inverse of [`Matrix::vec`]: fills a `rows x cols` matrix column by column.
    pub fn unvec(values: &[f64], rows: usize, cols: usize) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::contract(format!(
                "cannot reshape {} entries into {rows}x{cols}",
                values.len()
            )));
        }
        let mut m = Matrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = values[i + j * rows];
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Stacks the columns one underneath the other.
    pub fn vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::contract(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.cols != x.len() {
            return Err(Error::contract(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok(self
            .data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `xᵀ M y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.rows {
            return Err(Error::contract("bilinear form: left vector length mismatch"));
        }
        let my = self.mat_vec(y)?;
        Ok(dot(x, &my))
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::contract(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    /// `c·self + other`, shapes must match.
    pub fn axpy(&self, c: f64, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| c * a + b)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius inner product `⟨A, B⟩ = tr(AᵀB)`.
    pub fn inner(&self, rhs: &Matrix) -> Result<f64> {
        if self.shape() != rhs.shape() {
            return Err(Error::contract("inner product of matrices with different shapes"));
        }
        Ok(dot(&self.data, &rhs.data))
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, rhs: &Matrix) -> Result<f64> {
        Ok(self.sub(rhs)?.max_abs())
    }

    /// Kronecker product: the `(i, j)` block is `self[i, j] · rhs`.
    pub fn kron(&self, rhs: &Matrix) -> Matrix {
        let (p, q) = rhs.shape();
        let mut out = Matrix::zeros(self.rows * p, self.cols * q);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == 0.0 {
                    continue;
                }
                for k in 0..p {
                    let dst = (i * p + k) * out.cols + j * q;
                    let src = k * q;
                    for l in 0..q {
                        out.data[dst + l] = a * rhs.data[src + l];
                    }
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for row in self.data.chunks_exact(self.cols.max(1)) {
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `vec(A B C)` via the Kronecker identity `(Cᵀ ⊗ A) vec(B)`.
pub fn vec_triple_product(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<Vec<f64>> {
    if a.cols() != b.rows() || b.cols() != c.rows() {
        return Err(Error::contract("A·B·C is not defined for these shapes"));
    }
    c.transpose().kron(a).mat_vec(&b.vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_stacks_columns() {
        assert_eq!(Matrix::identity(2).vec(), vec![1.0, 0.0, 0.0, 1.0]);
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(a.vec(), vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(Matrix::unvec(&a.vec(), 2, 2).unwrap(), a);
    }

    #[test]
    fn kron_identity_and_diagonal() {
        assert_eq!(Matrix::identity(2).kron(&Matrix::identity(2)), Matrix::identity(4));
        let k = Matrix::diag(&[2.0, 3.0]).kron(&Matrix::identity(2));
        assert_eq!(k, Matrix::diag(&[2.0, 2.0, 3.0, 3.0]));
    }

    #[test]
    fn rejects_bad_json_shapes() {
        assert!(Matrix::from_row_major(2, 2, vec![1.0; 3]).is_err());
        assert!(Matrix::from_row_major(0, 2, vec![]).is_err());
        assert!(Matrix::from_row_major(1, 1, vec![f64::NAN]).is_err());
        let parsed: Matrix = serde_json::from_str(r#"{"rows":2,"cols":1,"data":[1,2]}"#).unwrap();
        assert_eq!(parsed, Matrix::column(&[1.0, 2.0]));
        let bad: std::result::Result<Matrix, _> = serde_json::from_str(r#"{"rows":2,"cols":2,"data":[1,2]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn matmul_shape_mismatch() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(a.matmul(&a), Err(Error::Contract(_))));
    }
}
