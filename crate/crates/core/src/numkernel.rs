//! Dense real linear algebra with explicit tolerance discipline.
//!
//! Everything downstream manipulates subspaces of a small Euclidean space
//! (dim ≤ 10), so the kernel works with `nalgebra` dynamic matrices and keeps
//! the numerics boring: column-pivoted Gram–Schmidt, symmetric
//! eigendecomposition with eigenvalue clustering, and a scaling-and-squaring
//! matrix exponential. Subspaces are always compared through their
//! projectors, never through their bases.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tol::Tolerance;

/// A linear subspace of ℝⁿ stored as an n × d matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Wraps a basis matrix, checking orthonormality of the columns.
    pub fn from_orthonormal(basis: DMatrix<f64>, tol: &Tolerance) -> Result<Self> {
        let d = basis.ncols();
        let gram = basis.transpose() * &basis;
        let residual = (&gram - DMatrix::<f64>::identity(d, d)).amax();
        if d > 0 && residual >= tol.eps_zero {
            return Err(Error::Validation(format!(
                "basis columns are not orthonormal: |B^T B - I| = {residual:.3e}"
            )));
        }
        if d > basis.nrows() {
            return Err(Error::Dimension(basis.nrows(), d));
        }
        Ok(Subspace { basis })
    }

    pub fn empty(ambient_dim: usize) -> Self {
        Subspace {
            basis: DMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            basis: DMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    /// Span of the given coordinate axes.
    pub fn coordinate(ambient_dim: usize, axes: &[usize]) -> Self {
        let mut basis = DMatrix::zeros(ambient_dim, axes.len());
        for (col, &ax) in axes.iter().enumerate() {
            basis[(ax, col)] = 1.0;
        }
        Subspace { basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        self.basis.column(i).into_owned()
    }

    /// Orthogonal projector P = B Bᵀ onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Orthogonal projection of a vector onto the subspace.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * v)
    }

    /// Component of `v` orthogonal to the subspace.
    pub fn reject(&self, v: &DVector<f64>) -> DVector<f64> {
        v - self.project(v)
    }

    /// Norm of the component of `v` outside the subspace.
    pub fn rejection_norm(&self, v: &DVector<f64>) -> f64 {
        self.reject(v).norm()
    }

    pub fn contains_vector(&self, v: &DVector<f64>, tol: &Tolerance) -> bool {
        self.rejection_norm(v) < tol.eps_zero * v.norm().max(1.0)
    }

    /// Orthogonal complement within the ambient space.
    pub fn complement(&self, tol: &Tolerance) -> Subspace {
        let n = self.ambient_dim();
        let p = self.projector();
        let mut candidates = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = DVector::zeros(n);
            v[i] = 1.0;
            candidates.push(&v - &p * &v);
        }
        match orthonormalize(&candidates, tol) {
            Ok(s) => s,
            Err(_) => Subspace::empty(n),
        }
    }

    /// Image of the subspace under an invertible linear map.
    pub fn map(&self, m: &DMatrix<f64>, tol: &Tolerance) -> Result<Subspace> {
        let cols: Vec<DVector<f64>> = (0..self.dim()).map(|i| m * self.basis_vector(i)).collect();
        orthonormalize(&cols, tol)
    }
}

/// Column-pivoted modified Gram–Schmidt. Rank is decided by discarding
/// residuals below `eps_zero` after sequential projection; a second
/// orthogonalization pass keeps the columns orthonormal to machine precision.
pub fn orthonormalize(vectors: &[DVector<f64>], tol: &Tolerance) -> Result<Subspace> {
    if vectors.is_empty() {
        return Err(Error::EmptySpan);
    }
    let n = vectors[0].len();
    for v in vectors {
        if v.len() != n {
            return Err(Error::Dimension(n, v.len()));
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::Validation("non-finite entry in input vector".into()));
        }
    }
    let mut work: Vec<DVector<f64>> = vectors.to_vec();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    // pivot: remaining vector with the largest residual norm
    while let Some((best, norm)) = work
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v.norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
    {
        if norm < tol.eps_zero {
            break;
        }
        let mut v = work.swap_remove(best);
        // re-orthogonalize twice for stability
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        let nv = v.norm();
        if nv < tol.eps_zero {
            continue;
        }
        v /= nv;
        for w in work.iter_mut() {
            let c = v.dot(w);
            *w -= &v * c;
        }
        basis.push(v);
        if basis.len() == n {
            break;
        }
    }
    if basis.is_empty() {
        return Err(Error::EmptySpan);
    }
    let mut m = DMatrix::zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        m.set_column(j, b);
    }
    Ok(Subspace { basis: m })
}

/// One eigenvalue cluster of a symmetric operator.
#[derive(Debug, Clone)]
pub struct EigenCluster {
    pub eigenvalue: f64,
    pub eigenspace: Subspace,
}

/// Symmetric eigendecomposition with eigenvalue clustering.
///
/// Eigenvalues within `eps_cluster` of each other are merged into a single
/// eigenspace; clusters come back sorted ascending and their eigenspaces are
/// mutually orthogonal and sum to the full space.
pub fn sym_eig(a: &DMatrix<f64>, tol: &Tolerance) -> Result<Vec<EigenCluster>> {
    let asym = (a - a.transpose()).amax();
    if asym >= tol.eps_zero {
        return Err(Error::Symmetry(asym));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let mut clusters: Vec<EigenCluster> = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n
            && eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]] < tol.eps_cluster
        {
            end += 1;
        }
        let dim = end - start;
        let mut basis = DMatrix::zeros(n, dim);
        let mut mean = 0.0;
        for (col, &idx) in order[start..end].iter().enumerate() {
            basis.set_column(col, &eig.eigenvectors.column(idx));
            mean += eig.eigenvalues[idx];
        }
        mean /= dim as f64;
        // eigenvectors of distinct eigenvalues are orthogonal; re-orthonormalize
        // the cluster to absorb rounding
        let cols: Vec<DVector<f64>> = (0..dim).map(|c| basis.column(c).into_owned()).collect();
        let eigenspace = orthonormalize(&cols, tol)?;
        clusters.push(EigenCluster {
            eigenvalue: mean,
            eigenspace,
        });
        start = end;
    }
    Ok(clusters)
}

/// Matrix exponential by scaling and squaring with a diagonal Padé(6,6)
/// approximant. Works for real and complex square matrices; exp(0) = I
/// exactly.
pub fn mat_exp_generic<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix exponential needs a square matrix");
    let norm = a.iter().fold(0.0f64, |m, x| m.max(x.clone().modulus()));
    if norm == 0.0 {
        return DMatrix::identity(n, n);
    }
    // scale so the Padé approximant stays well inside its accuracy region
    let s = (norm / 0.5).log2().ceil().max(0.0) as u32;
    let scaled = a.map(|x| x / nalgebra::convert::<f64, T>(2f64.powi(s as i32)));

    // Padé(6,6): exp(x) ≈ p(x)/p(-x) with p the truncated series of e^{x/?}
    // coefficients c_k = (12-k)!·12! / (12!·k!·(6-k)!) normalized to c_0 = 1
    let coeffs: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let id = DMatrix::<T>::identity(n, n);
    let mut power = id.clone();
    let mut num = id.clone() * nalgebra::convert::<f64, T>(coeffs[0]);
    let mut den = id.clone() * nalgebra::convert::<f64, T>(coeffs[0]);
    for (k, &c) in coeffs.iter().enumerate().skip(1) {
        power = &power * &scaled;
        let term = &power * nalgebra::convert::<f64, T>(c);
        num += &term;
        if k % 2 == 0 {
            den += &term;
        } else {
            den -= &term;
        }
    }
    let mut result = den
        .lu()
        .solve(&num)
        .expect("Padé denominator is invertible for scaled input");
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Real matrix exponential.
pub fn mat_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    mat_exp_generic(a)
}

/// Containment test via projectors: a ⊆ b iff ‖(I − P_b) B_a‖_∞ < eps_zero.
pub fn subspace_contains(b: &Subspace, a: &Subspace, tol: &Tolerance) -> Result<bool> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::Dimension(a.ambient_dim(), b.ambient_dim()));
    }
    if a.dim() == 0 {
        return Ok(true);
    }
    let residual = (a.basis() - b.projector() * a.basis()).amax();
    Ok(residual < tol.eps_zero)
}

/// Equality as mutual containment.
pub fn subspace_equal(a: &Subspace, b: &Subspace, tol: &Tolerance) -> Result<bool> {
    Ok(subspace_contains(a, b, tol)? && subspace_contains(b, a, tol)?)
}

/// Dimension of the intersection a ∩ b, read off the spectrum of the
/// compressed projector B_aᵀ P_b B_a (eigenvalues near 1 ⇔ shared directions).
pub fn intersection_dim(a: &Subspace, b: &Subspace, tol: &Tolerance) -> Result<usize> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::Dimension(a.ambient_dim(), b.ambient_dim()));
    }
    if a.dim() == 0 || b.dim() == 0 {
        return Ok(0);
    }
    let m = a.basis().transpose() * b.projector() * a.basis();
    let clusters = sym_eig(&m, tol)?;
    Ok(clusters
        .iter()
        .filter(|c| (c.eigenvalue - 1.0).abs() < tol.eps_cluster.sqrt())
        .map(|c| c.eigenspace.dim())
        .sum())
}

pub fn dvec(entries: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(entries)
}

/// Unit coordinate vector.
pub fn axis(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}
