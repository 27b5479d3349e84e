//! Matrix-representation layer: the built-in spaces are specified by
//! concrete complex matrices (quaternionic ones through the standard complex
//! 2n×2n embedding), and the structure constants are extracted numerically,
//! once, against the invariant trace form. After that the rest of the crate
//! never touches group matrices again, except to exponentiate torus
//! directions and to push isometries down to the tangent space.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub fn czero(n: usize) -> CMat {
    CMat::zeros(n, n)
}

pub fn celem(n: usize, i: usize, j: usize, z: Complex64) -> CMat {
    let mut m = czero(n);
    m[(i, j)] = z;
    m
}

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

/// Quaternionic 2×2 matrix X = A + jB (A, B complex), embedded as the
/// complex 4×4 matrix [[A, −conj(B)], [B, conj(A)]].
pub fn quat_embed(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.nrows(), 2);
    assert_eq!(b.nrows(), 2);
    let mut m = czero(4);
    for r in 0..2 {
        for c in 0..2 {
            m[(r, c)] = a[(r, c)];
            m[(r, c + 2)] = -b[(r, c)].conj();
            m[(r + 2, c)] = b[(r, c)];
            m[(r + 2, c + 2)] = a[(r, c)].conj();
        }
    }
    m
}

/// The invariant form ⟨X,Y⟩ = −scale · Re tr(XY) on a matrix Lie algebra.
pub fn trace_form(scale: f64, x: &CMat, y: &CMat) -> f64 {
    let n = x.nrows();
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            tr += x[(i, k)] * y[(k, i)];
        }
    }
    -scale * tr.re
}

pub fn commutator(x: &CMat, y: &CMat) -> CMat {
    x * y - y * x
}

/// Expresses `m` in the given basis by solving against the Gram matrix of
/// the trace form; returns the coordinates and the residual of the
/// reconstruction.
pub fn coordinates(
    basis: &[CMat],
    gram_chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
    scale: f64,
    m: &CMat,
) -> (nalgebra::DVector<f64>, f64) {
    let rhs = nalgebra::DVector::from_fn(basis.len(), |l, _| trace_form(scale, m, &basis[l]));
    let coords = gram_chol.solve(&rhs);
    let mut recon = czero(m.nrows());
    for (l, b) in basis.iter().enumerate() {
        recon += b * re(coords[l]);
    }
    let residual = (m - recon).iter().map(|z| z.norm()).fold(0.0, f64::max);
    (coords, residual)
}

/// Gram matrix of a basis under the trace form, Cholesky-factored.
pub fn gram_cholesky(
    basis: &[CMat],
    scale: f64,
) -> Result<(DMatrix<f64>, nalgebra::Cholesky<f64, nalgebra::Dyn>)> {
    let n = basis.len();
    let gram = DMatrix::from_fn(n, n, |i, j| trace_form(scale, &basis[i], &basis[j]));
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Validation("trace form is not positive definite on basis".into()))?;
    Ok((gram, chol))
}

/// Structure constants of the span of `basis` under the matrix commutator.
/// Fails if some commutator escapes the span.
pub fn structure_constants(basis: &[CMat], scale: f64) -> Result<Vec<f64>> {
    let n = basis.len();
    let (_, chol) = gram_cholesky(basis, scale)?;
    let mut c = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let comm = commutator(&basis[i], &basis[j]);
            let (coords, residual) = coordinates(basis, &chol, scale, &comm);
            if residual > 1e-10 {
                return Err(Error::Validation(format!(
                    "commutator [{i},{j}] escapes the span (residual {residual:.3e})"
                )));
            }
            for k in 0..n {
                c[(i * n + j) * n + k] = coords[k];
            }
        }
    }
    Ok(c)
}

/// The tangent action of conjugation by `g` expressed on the p-frame:
/// p_j ↦ g p_j g⁻¹, with coordinates solved against the p-frame Gram.
pub fn conjugation_on_p(p_mats: &[CMat], scale: f64, g: &CMat) -> Result<DMatrix<f64>> {
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Validation("conjugating element is singular".into()))?;
    let (_, chol) = gram_cholesky(p_mats, scale)?;
    let np = p_mats.len();
    let mut out = DMatrix::zeros(np, np);
    for j in 0..np {
        let image = g * &p_mats[j] * &g_inv;
        let (coords, residual) = coordinates(p_mats, &chol, scale, &image);
        if residual > 1e-10 {
            return Err(Error::Validation(format!(
                "conjugation does not preserve p (residual {residual:.3e} on column {j})"
            )));
        }
        out.set_column(j, &coords);
    }
    Ok(out)
}

/// A linear map of the representation space applied entrywise to the basis
/// matrices (used for outer automorphisms like block permutations),
/// expressed on the p-frame.
pub fn matrix_map_on_p(
    p_mats: &[CMat],
    scale: f64,
    map: impl Fn(&CMat) -> CMat,
) -> Result<DMatrix<f64>> {
    let (_, chol) = gram_cholesky(p_mats, scale)?;
    let np = p_mats.len();
    let mut out = DMatrix::zeros(np, np);
    for j in 0..np {
        let image = map(&p_mats[j]);
        let (coords, residual) = coordinates(p_mats, &chol, scale, &image);
        if residual > 1e-10 {
            return Err(Error::Validation(format!(
                "map does not preserve p (residual {residual:.3e} on column {j})"
            )));
        }
        out.set_column(j, &coords);
    }
    Ok(out)
}

/// Largest off-diagonal modulus (diagonal-subgroup membership test).
pub fn offdiagonal_amax(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// Largest deviation between the diagonal 2×2 blocks of a block-diagonal
/// matrix (diagonal-subgroup membership for product groups).
pub fn block_equality_residual(m: &CMat, block: usize, count: usize) -> f64 {
    let mut worst = 0.0f64;
    for b in 1..count {
        for r in 0..block {
            for c in 0..block {
                let x = m[(r, c)];
                let y = m[(b * block + r, b * block + c)];
                worst = worst.max((x - y).norm());
            }
        }
    }
    // off-block entries must vanish as well
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            if i / block != j / block {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quaternion_units_multiply_correctly() {
        // 1, i, j, k in the (0,0) slot of a 2×2 quaternionic matrix
        let one = quat_embed(&celem(2, 0, 0, re(1.0)), &czero(2));
        let qi = quat_embed(&celem(2, 0, 0, im(1.0)), &czero(2));
        let qj = quat_embed(&czero(2), &celem(2, 0, 0, re(1.0)));
        let qk = quat_embed(&czero(2), &celem(2, 0, 0, im(-1.0)));
        let diff = |a: &CMat, b: &CMat| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
        // restrict attention to the (0,0) quaternion slot: products of the
        // embedded units must reproduce the quaternion relations
        assert!(diff(&(&qi * &qj), &qk) < 1e-15, "ij = k");
        assert!(diff(&(&qj * &qk), &qi) < 1e-15, "jk = i");
        assert!(diff(&(&qk * &qi), &qj) < 1e-15, "ki = j");
        let m_one = &qi * &qi + &one;
        // i² = −1 on the occupied slot
        assert!(m_one[(0, 0)].norm() < 1e-15 && m_one[(2, 2)].norm() < 1e-15);
    }

    #[test]
    fn trace_form_is_symmetric_on_skew_hermitian() {
        let x = celem(3, 0, 1, re(1.0)) - celem(3, 1, 0, re(1.0));
        let y = celem(3, 0, 1, im(1.0)) + celem(3, 1, 0, im(1.0));
        assert!((trace_form(1.0, &x, &y) - trace_form(1.0, &y, &x)).abs() < 1e-15);
        assert!((trace_form(1.0, &x, &x) - 2.0).abs() < 1e-15);
    }
}
