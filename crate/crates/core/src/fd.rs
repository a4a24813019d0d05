//! Central finite differences for functions of a symmetric matrix.
//!
//! Derivatives are taken along the symmetric basis `E_ii` and
//! `(E_ij + E_ji)/2`, so the directional derivative of a scalar `K` along
//! basis element `(i, j)` is exactly the `(i, j)` entry of the gradient
//! `K'` defined by `dK(x)(u) = ⟨K'(x), u⟩`.

use crate::error::Result;
use crate::matcalc::{Matrix, SymMatrix};

/// Step for first-order differences: `1e-5·max(1, ‖x‖)`.
pub fn first_order_step(x: &SymMatrix) -> f64 {
    1e-5 * x.norm_fro().max(1.0)
}

/// Step for second-order differences: `1e-4·max(1, ‖x‖)`.
pub fn second_order_step(x: &SymMatrix) -> f64 {
    1e-4 * x.norm_fro().max(1.0)
}

/// Symmetric basis of `S_d`, ordered `(0,0), (0,1), …, (0,d-1), (1,1), …`.
pub fn sym_basis(d: usize) -> Vec<(usize, usize, SymMatrix)> {
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for j in i..d {
            let mut m = Matrix::zeros(d, d);
            if i == j {
                m[(i, i)] = 1.0;
            } else {
                m[(i, j)] = 0.5;
                m[(j, i)] = 0.5;
            }
            out.push((i, j, SymMatrix::symmetrize(m)));
        }
    }
    out
}

/// Gradient of a scalar function of a symmetric matrix.
pub fn gradient<F>(f: F, x: &SymMatrix, h: f64) -> Result<SymMatrix>
where
    F: Fn(&SymMatrix) -> Result<f64>,
{
    let d = x.dim();
    let mut g = Matrix::zeros(d, d);
    for (i, j, u) in sym_basis(d) {
        let fp = f(&u.affine(h, x)?)?;
        let fm = f(&u.affine(-h, x)?)?;
        let v = (fp - fm) / (2.0 * h);
        g[(i, j)] = v;
        g[(j, i)] = v;
    }
    Ok(SymMatrix::symmetrize(g))
}

/// Second derivatives `d²f(x)[U_a, U_b]` over the symmetric basis.
pub fn hessian_forms<F>(f: F, x: &SymMatrix, h: f64) -> Result<Matrix>
where
    F: Fn(&SymMatrix) -> Result<f64>,
{
    let basis = sym_basis(x.dim());
    let n = basis.len();
    let f0 = f(x)?;
    let mut out = Matrix::zeros(n, n);
    for a in 0..n {
        let ua = &basis[a].2;
        let fp = f(&ua.affine(h, x)?)?;
        let fm = f(&ua.affine(-h, x)?)?;
        out[(a, a)] = (fp - 2.0 * f0 + fm) / (h * h);
        for b in (a + 1)..n {
            let ub = &basis[b].2;
            let shifted = |sa: f64, sb: f64| -> Result<f64> {
                let p = ua.affine(sa * h, x)?;
                f(&ub.affine(sb * h, &p)?)
            };
            let v =
                (shifted(1.0, 1.0)? - shifted(1.0, -1.0)? - shifted(-1.0, 1.0)? + shifted(-1.0, -1.0)?) / (4.0 * h * h);
            out[(a, b)] = v;
            out[(b, a)] = v;
        }
    }
    Ok(out)
}

/// Directional derivatives `dF(x)[U_a]` of a matrix-valued map.
pub fn jacobian_columns<F>(f: F, x: &SymMatrix, h: f64) -> Result<Vec<SymMatrix>>
where
    F: Fn(&SymMatrix) -> Result<SymMatrix>,
{
    sym_basis(x.dim())
        .into_iter()
        .map(|(_, _, u)| {
            let fp = f(&u.affine(h, x)?)?;
            let fm = f(&u.affine(-h, x)?)?;
            Ok(fp.sub(&fm)?.scale(0.5 / h))
        })
        .collect()
}

/// `vec(U_a)ᵀ M vec(U_b)` for a `d² × d²` matrix `M`.
pub fn bilinear_forms(m: &Matrix, d: usize) -> Result<Matrix> {
    let basis: Vec<Vec<f64>> = sym_basis(d).into_iter().map(|(_, _, u)| u.vec()).collect();
    let n = basis.len();
    let mut out = Matrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            out[(a, b)] = m.bilinear(&basis[a], &basis[b])?;
        }
    }
    Ok(out)
}

/// Three-point central second difference.
pub fn second_derivative<F>(f: F, t: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok((f(t + h)? - 2.0 * f(t)? + f(t - h)?) / (h * h))
}
