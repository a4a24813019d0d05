//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use super::matrix::Matrix;
use super::sym::SymMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// `S = Q diag(values) Qᵀ`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Orthogonal matrix whose columns are the eigenvectors.
    pub vectors: Matrix,
}

impl Eigen {
    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `Q diag(f) Qᵀ` for replacement eigenvalues `f`.
    pub fn reassemble(&self, values: impl IntoIterator<Item = f64>) -> SymMatrix {
        let q = &self.vectors;
        let n = q.rows();
        let lam: Vec<f64> = values.into_iter().collect();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|k| q[(i, k)] * lam[k] * q[(j, k)]).sum();
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        SymMatrix::symmetrize(out)
    }
}

/// Eigenvalues ascending; each eigenvector's largest-magnitude component
/// (first one on ties) is made positive.
pub fn eigh(s: &SymMatrix) -> Result<Eigen> {
    let n = s.dim();
    let mut a = s.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let total = a.norm_fro();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * total || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate(&mut a, &mut v, p, q, c, sn);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut pivot = 0;
        for i in 0..n {
            if v[(i, src)].abs() > v[(pivot, src)].abs() {
                pivot = i;
            }
        }
        let sign = if v[(pivot, src)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(i, col)] = sign * v[(i, src)];
        }
    }
    Ok(Eigen { values, vectors })
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        let e = eigh(&SymMatrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        let e = eigh(&SymMatrix::diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        // eigenvector of 1.0 is e_2 with a positive sign
        assert_eq!(e.vectors[(1, 0)], 1.0);
    }

    #[test]
    fn two_by_two_rotation() {
        let s = SymMatrix::new(Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]])).unwrap();
        let e = eigh(&s).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        let back = e.reassemble(e.values.clone());
        assert!(back.max_abs_diff(&s).unwrap() < 1e-14);
    }
}
