//! Compact Lie algebras given by structure constants with an invariant inner
//! product, and reductive decompositions g = k ⊕ p.
//!
//! The working basis is always ordered so that a reductive space can cache
//! the bracket data it needs: brackets of p-frame vectors split into their
//! p- and k-components, and the adjoint action of k on p. The p-frame is by
//! convention orthonormal for the metric of the homogeneous space; the Gram
//! matrix stored on the algebra is the ad-invariant form on all of g used
//! for validation and for carving out p = k^⊥. The two coincide for normal
//! homogeneous metrics but are allowed to differ (Berger spheres, deformed
//! test metrics), which is why the U tensor below is computed from its
//! defining identity instead of assumed to vanish.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{orthonormalize, subspace_equal, Subspace};
use crate::tol::Tolerance;

/// Structure constants + invariant inner product on a compact Lie algebra.
#[derive(Debug, Clone)]
pub struct LieAlgebraData {
    dim: usize,
    /// c[i][j][k] with [e_i, e_j] = Σ_k c[i][j][k] e_k, flattened row-major.
    structure: Vec<f64>,
    /// Gram matrix of the ad-invariant inner product in the working basis.
    metric: DMatrix<f64>,
    pub name: String,
}

impl LieAlgebraData {
    pub fn new(
        dim: usize,
        structure: Vec<f64>,
        metric: DMatrix<f64>,
        name: impl Into<String>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let data = LieAlgebraData {
            dim,
            structure,
            metric,
            name: name.into(),
        };
        data.validate(tol)?;
        Ok(data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    /// Structure constants as nested arrays (for serialization).
    pub fn structure_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.structure_constant(i, j, k)).collect())
                    .collect()
            })
            .collect()
    }

    /// Lie bracket of coordinate vectors.
    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..n {
                let c = xi * y[j];
                if c == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += c * self.structure_constant(i, j, k);
                }
            }
        }
        out
    }

    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.metric * y)[(0, 0)]
    }

    /// Checks every type invariant, reporting the first violated one.
    pub fn validate(&self, tol: &Tolerance) -> Result<()> {
        let n = self.dim;
        if self.structure.len() != n * n * n {
            return Err(Error::Validation(format!(
                "structure tensor has {} entries, expected {}",
                self.structure.len(),
                n * n * n
            )));
        }
        if self.metric.nrows() != n || self.metric.ncols() != n {
            return Err(Error::Validation("metric shape mismatch".into()));
        }
        if !self.structure.iter().all(|x| x.is_finite())
            || !self.metric.iter().all(|x| x.is_finite())
        {
            return Err(Error::Validation("non-finite entry".into()));
        }
        let sym = (&self.metric - self.metric.transpose()).amax();
        if sym >= tol.eps_zero {
            return Err(Error::Validation(format!(
                "metric is not symmetric (residual {sym:.3e})"
            )));
        }
        if self.metric.clone().cholesky().is_none() {
            return Err(Error::Validation("metric is not positive definite".into()));
        }
        // antisymmetry of the bracket
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let r = self.structure_constant(i, j, k) + self.structure_constant(j, i, k);
                    if r.abs() >= tol.eps_zero {
                        return Err(Error::Validation(format!(
                            "bracket antisymmetry violated at ({i},{j},{k}): {r:.3e}"
                        )));
                    }
                }
            }
        }
        // Jacobi identity over all basis triples
        let basis: Vec<DVector<f64>> = (0..n)
            .map(|i| {
                let mut v = DVector::zeros(n);
                v[i] = 1.0;
                v
            })
            .collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let bij = self.bracket(&basis[i], &basis[j]);
                for k in (j + 1)..n {
                    let r = self.bracket(&bij, &basis[k])
                        + self.bracket(&self.bracket(&basis[j], &basis[k]), &basis[i])
                        + self.bracket(&self.bracket(&basis[k], &basis[i]), &basis[j]);
                    let res = r.amax();
                    if res >= tol.eps_zero {
                        return Err(Error::Validation(format!(
                            "Jacobi identity violated at ({i},{j},{k}): {res:.3e}"
                        )));
                    }
                }
            }
        }
        // ad-invariance of the metric
        for i in 0..n {
            for j in 0..n {
                let bij = self.bracket(&basis[i], &basis[j]);
                for k in 0..n {
                    let bik = self.bracket(&basis[i], &basis[k]);
                    let r = self.inner(&bij, &basis[k]) + self.inner(&basis[j], &bik);
                    if r.abs() >= tol.eps_zero {
                        return Err(Error::Validation(format!(
                            "metric is not ad-invariant at ({i},{j},{k}): {r:.3e}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest of the antisymmetry and Jacobi residuals (diagnostics).
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let basis: Vec<DVector<f64>> = (0..n)
            .map(|i| {
                let mut v = DVector::zeros(n);
                v[i] = 1.0;
                v
            })
            .collect();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let bij = self.bracket(&basis[i], &basis[j]);
                for k in (j + 1)..n {
                    let r = self.bracket(&bij, &basis[k])
                        + self.bracket(&self.bracket(&basis[j], &basis[k]), &basis[i])
                        + self.bracket(&self.bracket(&basis[k], &basis[i]), &basis[j]);
                    worst = worst.max(r.amax());
                }
            }
        }
        worst
    }
}

/// Vertical/horizontal split of p induced by a homogeneous fibration,
/// expressed in p-frame coordinates.
#[derive(Debug, Clone)]
pub struct FibrationSplit {
    pub vertical: Subspace,
    pub horizontal: Subspace,
}

/// A reductive decomposition g = k ⊕ p together with the cached bracket data
/// the geometry layer consumes.
#[derive(Debug, Clone)]
pub struct ReductiveSpace {
    pub algebra: LieAlgebraData,
    pub name: String,
    pub tol: Tolerance,
    /// columns: p-frame vectors in g-coordinates (orthonormal for the space metric)
    p_basis: DMatrix<f64>,
    /// columns: k-frame vectors in g-coordinates
    k_basis: DMatrix<f64>,
    /// inverse of [p_basis | k_basis]
    full_inv: DMatrix<f64>,
    pub fibration: Option<FibrationSplit>,
    // cached bracket data in frame coordinates
    brack_pp_p: Vec<DVector<f64>>, // [p_i, p_j]_p, np² entries
    brack_pp_k: Vec<DVector<f64>>, // [p_i, p_j]_k
    ad_k_p: Vec<DMatrix<f64>>,     // ad(k_a) restricted to p
    u_tensor: Vec<f64>,            // U(p_i, p_j)[a], flattened np³
}

impl ReductiveSpace {
    pub fn new(
        algebra: LieAlgebraData,
        p_basis: DMatrix<f64>,
        k_basis: DMatrix<f64>,
        fibration: Option<FibrationSplit>,
        name: impl Into<String>,
        tol: Tolerance,
    ) -> Result<Self> {
        let n = algebra.dim();
        let np = p_basis.ncols();
        let nk = k_basis.ncols();
        if np + nk != n || p_basis.nrows() != n || k_basis.nrows() != n {
            return Err(Error::Validation(
                "k and p bases must split the algebra".into(),
            ));
        }
        let mut full = DMatrix::zeros(n, n);
        for j in 0..np {
            full.set_column(j, &p_basis.column(j));
        }
        for j in 0..nk {
            full.set_column(np + j, &k_basis.column(j));
        }
        let full_inv = full
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Validation("k ⊕ p is not a direct sum".into()))?;

        // g-orthogonality of k and p
        if nk > 0 {
            let cross = (p_basis.transpose() * algebra.metric() * &k_basis).amax();
            if cross >= tol.eps_zero {
                return Err(Error::Validation(format!(
                    "p is not the metric orthocomplement of k (residual {cross:.3e})"
                )));
            }
        }

        let mut space = ReductiveSpace {
            algebra,
            name: name.into(),
            tol,
            p_basis,
            k_basis,
            full_inv,
            fibration,
            brack_pp_p: Vec::new(),
            brack_pp_k: Vec::new(),
            ad_k_p: Vec::new(),
            u_tensor: Vec::new(),
        };
        space.build_caches();
        space.validate()?;
        Ok(space)
    }

    fn build_caches(&mut self) {
        let np = self.p_dim();
        let nk = self.k_dim();
        self.brack_pp_p = Vec::with_capacity(np * np);
        self.brack_pp_k = Vec::with_capacity(np * np);
        for i in 0..np {
            let pi = self.p_basis.column(i).into_owned();
            for j in 0..np {
                let pj = self.p_basis.column(j).into_owned();
                let b = self.algebra.bracket(&pi, &pj);
                let (p_part, k_part) = self.split_coords(&b);
                self.brack_pp_p.push(p_part);
                self.brack_pp_k.push(k_part);
            }
        }
        self.ad_k_p = (0..nk)
            .map(|a| {
                let ka = self.k_basis.column(a).into_owned();
                let mut m = DMatrix::zeros(np, np);
                for j in 0..np {
                    let pj = self.p_basis.column(j).into_owned();
                    let b = self.algebra.bracket(&ka, &pj);
                    let (p_part, _) = self.split_coords(&b);
                    m.set_column(j, &p_part);
                }
                m
            })
            .collect();
        // U from its defining identity: 2⟨U(X,Y),Z⟩ = ⟨[Z,X]_p,Y⟩ + ⟨X,[Z,Y]_p⟩,
        // with the p-frame orthonormal for the space metric.
        self.u_tensor = vec![0.0; np * np * np];
        for i in 0..np {
            for j in 0..np {
                for a in 0..np {
                    let zx = &self.brack_pp_p[a * np + i];
                    let zy = &self.brack_pp_p[a * np + j];
                    self.u_tensor[(i * np + j) * np + a] = 0.5 * (zx[j] + zy[i]);
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let np = self.p_dim();
        let nk = self.k_dim();
        let eps = self.tol.eps_zero;
        // [k,k] ⊆ k
        for a in 0..nk {
            for b in (a + 1)..nk {
                let br = self.algebra.bracket(
                    &self.k_basis.column(a).into_owned(),
                    &self.k_basis.column(b).into_owned(),
                );
                let (p_part, _) = self.split_coords(&br);
                if p_part.amax() >= eps {
                    return Err(Error::Validation(format!(
                        "[k,k] escapes k at ({a},{b}): {:.3e}",
                        p_part.amax()
                    )));
                }
            }
        }
        // [k,p] ⊆ p
        for a in 0..nk {
            for j in 0..np {
                let br = self.algebra.bracket(
                    &self.k_basis.column(a).into_owned(),
                    &self.p_basis.column(j).into_owned(),
                );
                let (_, k_part) = self.split_coords(&br);
                if k_part.amax() >= eps {
                    return Err(Error::Validation(format!(
                        "[k,p] escapes p at ({a},{j}): {:.3e}",
                        k_part.amax()
                    )));
                }
            }
        }
        if let Some(fib) = &self.fibration {
            if fib.vertical.ambient_dim() != np || fib.horizontal.ambient_dim() != np {
                return Err(Error::Validation("fibration split lives in p".into()));
            }
            let cross = (fib.vertical.basis().transpose() * fib.horizontal.basis()).amax();
            if cross >= eps {
                return Err(Error::Validation(format!(
                    "fibration subspaces are not orthogonal ({cross:.3e})"
                )));
            }
            if fib.vertical.dim() + fib.horizontal.dim() != np {
                return Err(Error::Validation("fibration split must exhaust p".into()));
            }
        }
        Ok(())
    }

    pub fn p_dim(&self) -> usize {
        self.p_basis.ncols()
    }

    pub fn k_dim(&self) -> usize {
        self.k_basis.ncols()
    }

    pub fn p_basis(&self) -> &DMatrix<f64> {
        &self.p_basis
    }

    pub fn k_basis(&self) -> &DMatrix<f64> {
        &self.k_basis
    }

    /// Splits a g-coordinate vector into (p-frame coords, k-frame coords).
    pub fn split_coords(&self, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let c = &self.full_inv * x;
        let np = self.p_dim();
        (
            c.rows(0, np).into_owned(),
            c.rows(np, self.k_dim()).into_owned(),
        )
    }

    /// p-component of a g-vector, as a g-vector.
    pub fn project_p(&self, x: &DVector<f64>) -> DVector<f64> {
        let (p, _) = self.split_coords(x);
        &self.p_basis * p
    }

    /// k-component of a g-vector, as a g-vector.
    pub fn project_k(&self, x: &DVector<f64>) -> DVector<f64> {
        let (_, k) = self.split_coords(x);
        &self.k_basis * k
    }

    /// Lifts p-frame coordinates to a g-vector.
    pub fn lift_p(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.p_basis * v
    }

    /// Lifts k-frame coordinates to a g-vector.
    pub fn lift_k(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.k_basis * v
    }

    /// [X,Y]_p for X, Y in p-frame coordinates.
    pub fn bracket_p_p(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let np = self.p_dim();
        let mut out = DVector::zeros(np);
        for i in 0..np {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..np {
                let c = x[i] * y[j];
                if c != 0.0 {
                    out.axpy(c, &self.brack_pp_p[i * np + j], 1.0);
                }
            }
        }
        out
    }

    /// [X,Y]_k for X, Y in p-frame coordinates (result in k-frame coordinates).
    pub fn bracket_p_k(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let np = self.p_dim();
        let mut out = DVector::zeros(self.k_dim());
        for i in 0..np {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..np {
                let c = x[i] * y[j];
                if c != 0.0 {
                    out.axpy(c, &self.brack_pp_k[i * np + j], 1.0);
                }
            }
        }
        out
    }

    /// Action of ad(W) on p for W in k-frame coordinates.
    pub fn ad_k_on_p(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let np = self.p_dim();
        let mut m = DMatrix::zeros(np, np);
        for (a, mat) in self.ad_k_p.iter().enumerate() {
            if w[a] != 0.0 {
                m += mat * w[a];
            }
        }
        m
    }

    pub fn ad_k_generator(&self, a: usize) -> &DMatrix<f64> {
        &self.ad_k_p[a]
    }

    /// U(X,Y) for X, Y in p-frame coordinates.
    pub fn u_tensor(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let np = self.p_dim();
        let mut out = DVector::zeros(np);
        for i in 0..np {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..np {
                let c = x[i] * y[j];
                if c == 0.0 {
                    continue;
                }
                for a in 0..np {
                    out[a] += c * self.u_tensor[(i * np + j) * np + a];
                }
            }
        }
        out
    }

    /// Replaces the U tensor cache after an explicit p-metric deformation.
    ///
    /// `p_gram` is the Gram matrix of the deformed space metric in the current
    /// p-frame. The deformed metric is realized by rescaling the frame, so
    /// callers normally use [`with_p_metric`](Self::with_p_metric) instead.
    fn recompute_u_with_gram(&mut self, p_gram: &DMatrix<f64>) {
        let np = self.p_dim();
        // 2 G u = rhs, solved against the basis of p
        let factor = p_gram
            .clone()
            .cholesky()
            .expect("p metric must be positive definite");
        for i in 0..np {
            for j in 0..np {
                let mut rhs = DVector::zeros(np);
                for a in 0..np {
                    let zx = &self.brack_pp_p[a * np + i];
                    let zy = &self.brack_pp_p[a * np + j];
                    let mut gi = 0.0;
                    let mut gj = 0.0;
                    for b in 0..np {
                        gi += p_gram[(j, b)] * zx[b];
                        gj += p_gram[(i, b)] * zy[b];
                    }
                    rhs[a] = 0.5 * (gi + gj);
                }
                let u = factor.solve(&rhs);
                for a in 0..np {
                    self.u_tensor[(i * np + j) * np + a] = u[a];
                }
            }
        }
    }

    /// A copy of this space carrying a deformed metric on p, given by the
    /// Gram matrix `p_gram` in the current p-frame. Bracket data is reused;
    /// only the U tensor changes. Used to build non-naturally-reductive
    /// test metrics.
    pub fn with_p_metric(&self, p_gram: &DMatrix<f64>, name: impl Into<String>) -> ReductiveSpace {
        let mut space = self.clone();
        space.name = name.into();
        space.recompute_u_with_gram(p_gram);
        space
    }

    /// Natural reductivity test: max ‖U(p_i, p_j)‖ over basis pairs.
    pub fn naturally_reductive_residual(&self) -> f64 {
        let np = self.p_dim();
        let mut worst = 0.0f64;
        for i in 0..np {
            for j in 0..np {
                let mut norm2 = 0.0;
                for a in 0..np {
                    let u = self.u_tensor[(i * np + j) * np + a];
                    norm2 += u * u;
                }
                worst = worst.max(norm2.sqrt());
            }
        }
        worst
    }

    pub fn is_naturally_reductive(&self) -> bool {
        self.naturally_reductive_residual() < self.tol.eps_zero
    }

    /// Residual of ad-invariance of k and p under the bracket (diagnostics).
    pub fn reductivity_residual(&self) -> f64 {
        let np = self.p_dim();
        let nk = self.k_dim();
        let mut worst = 0.0f64;
        for a in 0..nk {
            let ka = self.k_basis.column(a).into_owned();
            for b in 0..nk {
                let br = self
                    .algebra
                    .bracket(&ka, &self.k_basis.column(b).into_owned());
                worst = worst.max(self.split_coords(&br).0.amax());
            }
            for j in 0..np {
                let br = self
                    .algebra
                    .bracket(&ka, &self.p_basis.column(j).into_owned());
                worst = worst.max(self.split_coords(&br).1.amax());
            }
        }
        worst
    }
}

/// Result of the bracket-closure construction s = [v,v] + v.
#[derive(Debug, Clone)]
pub struct GeneratedSubalgebra {
    /// The bracket closure of v, as a subspace of g.
    pub subalgebra: Subspace,
    /// Closure residual ‖(I−P_s)[s,s]‖ (zero at stabilization by construction).
    pub bracket_residual: f64,
    /// Whether the closure equals [v,v] + v (no further sweeps were needed).
    pub is_single_sweep: bool,
    /// s ∩ k, as a subspace of g.
    pub k_part: Subspace,
    /// s ∩ p, as a subspace of g.
    pub p_part: Subspace,
    /// Whether s = (s∩k) ⊕ (s∩p) with s∩p = v (canonical embedding).
    pub splits: bool,
}

impl ReductiveSpace {
    /// Bracket closure of a subspace v ⊆ p: spans v together with all pairwise
    /// brackets and keeps sweeping until the rank stabilizes. Flags whether
    /// the result splits as [v,v]_k ⊕ v.
    pub fn generated_canonical_subalgebra(&self, v: &Subspace) -> Result<GeneratedSubalgebra> {
        let tol = &self.tol;
        let n = self.algebra.dim();
        if v.ambient_dim() != self.p_dim() {
            return Err(Error::Dimension(v.ambient_dim(), self.p_dim()));
        }
        if v.dim() == 0 {
            return Ok(GeneratedSubalgebra {
                subalgebra: Subspace::empty(n),
                bracket_residual: 0.0,
                is_single_sweep: true,
                k_part: Subspace::empty(n),
                p_part: Subspace::empty(n),
                splits: true,
            });
        }
        // lift v into g-coordinates
        let lifted: Vec<DVector<f64>> = (0..v.dim())
            .map(|i| self.lift_p(&v.basis_vector(i)))
            .collect();
        let mut span = orthonormalize(&lifted, tol)?;
        let mut sweeps = 0usize;
        loop {
            let d = span.dim();
            let mut vectors: Vec<DVector<f64>> = (0..d).map(|i| span.basis_vector(i)).collect();
            for i in 0..d {
                for j in (i + 1)..d {
                    vectors.push(
                        self.algebra
                            .bracket(&span.basis_vector(i), &span.basis_vector(j)),
                    );
                }
            }
            let next = orthonormalize(&vectors, tol)?;
            if next.dim() == d {
                span = next;
                break;
            }
            span = next;
            sweeps += 1;
            if sweeps > n {
                return Err(Error::Closure(sweeps));
            }
        }
        // closure residual (should vanish at stabilization)
        let mut residual = 0.0f64;
        for i in 0..span.dim() {
            for j in (i + 1)..span.dim() {
                let b = self
                    .algebra
                    .bracket(&span.basis_vector(i), &span.basis_vector(j));
                residual = residual.max(span.rejection_norm(&b));
            }
        }

        // s ∩ p and s ∩ k via the coordinate split
        let k_coords_of_s = {
            let mut m = DMatrix::zeros(self.k_dim(), span.dim());
            for c in 0..span.dim() {
                let (_, kc) = self.split_coords(&span.basis_vector(c));
                m.set_column(c, &kc);
            }
            m
        };
        let p_coords_of_s = {
            let mut m = DMatrix::zeros(self.p_dim(), span.dim());
            for c in 0..span.dim() {
                let (pc, _) = self.split_coords(&span.basis_vector(c));
                m.set_column(c, &pc);
            }
            m
        };
        let p_part = intersect_with_kernel(&span, &k_coords_of_s, tol);
        let k_part = intersect_with_kernel(&span, &p_coords_of_s, tol);
        let splits = p_part.dim() + k_part.dim() == span.dim() && {
            let v_lift = orthonormalize(&lifted, tol)?;
            subspace_equal(&p_part, &v_lift, tol)?
        };
        Ok(GeneratedSubalgebra {
            is_single_sweep: sweeps <= 1,
            subalgebra: span,
            bracket_residual: residual,
            k_part,
            p_part,
            splits,
        })
    }
}

/// Vectors of `span` killed by the linear map `m` (given on span coordinates).
/// The kernel is read off the near-zero eigenspace of mᵀm.
fn intersect_with_kernel(span: &Subspace, m: &DMatrix<f64>, tol: &Tolerance) -> Subspace {
    let d = span.dim();
    if d == 0 || m.nrows() == 0 {
        return span.clone();
    }
    let gram = m.transpose() * m;
    let clusters = match crate::numkernel::sym_eig(&gram, tol) {
        Ok(c) => c,
        Err(_) => return Subspace::empty(span.ambient_dim()),
    };
    let mut kernel_cols: Vec<DVector<f64>> = Vec::new();
    for cl in clusters {
        if cl.eigenvalue.abs() < tol.eps_zero {
            for i in 0..cl.eigenspace.dim() {
                kernel_cols.push(cl.eigenspace.basis_vector(i));
            }
        }
    }
    if kernel_cols.is_empty() {
        return Subspace::empty(span.ambient_dim());
    }
    let lifted: Vec<DVector<f64>> = kernel_cols.iter().map(|c| span.basis() * c).collect();
    orthonormalize(&lifted, tol).unwrap_or_else(|_| Subspace::empty(span.ambient_dim()))
}

// --- space-definition file format -----------------------------------------

/// JSON shape of a space definition.
#[derive(Debug, Serialize, Deserialize)]
pub struct SpaceDefinition {
    pub name: String,
    pub dim: usize,
    pub structure: Vec<Vec<Vec<f64>>>,
    pub metric: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_indices: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_basis: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fibration: Option<FibrationIndices>,
}

/// Vertical/horizontal index lists against the p-frame ordering.
#[derive(Debug, Serialize, Deserialize)]
pub struct FibrationIndices {
    pub v: Vec<usize>,
    pub h: Vec<usize>,
}

impl ReductiveSpace {
    /// Exports the decomposition in the space-definition format. Only spaces
    /// whose k-frame is a set of coordinate axes (the built-ins) use
    /// `k_indices`; otherwise the k-basis vectors are written out.
    pub fn to_definition(&self) -> SpaceDefinition {
        let n = self.algebra.dim();
        let metric: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| self.algebra.metric()[(i, j)]).collect())
            .collect();
        // detect coordinate-axis k-frame
        let mut k_indices = Vec::new();
        let mut axis_aligned = true;
        'outer: for c in 0..self.k_dim() {
            let col = self.k_basis.column(c);
            let mut found = None;
            for r in 0..n {
                let x = col[r];
                if x.abs() > 0.5 {
                    if (x - 1.0).abs() > 1e-14 || found.is_some() {
                        axis_aligned = false;
                        break 'outer;
                    }
                    found = Some(r);
                } else if x.abs() > 1e-14 {
                    axis_aligned = false;
                    break 'outer;
                }
            }
            match found {
                Some(r) => k_indices.push(r),
                None => {
                    axis_aligned = false;
                    break;
                }
            }
        }
        let fibration = self.fibration.as_ref().map(|f| FibrationIndices {
            v: subspace_axes(&f.vertical),
            h: subspace_axes(&f.horizontal),
        });
        SpaceDefinition {
            name: self.name.clone(),
            dim: n,
            structure: self.algebra.structure_nested(),
            metric,
            k_indices: if axis_aligned { Some(k_indices) } else { None },
            k_basis: if axis_aligned {
                None
            } else {
                Some(
                    (0..self.k_dim())
                        .map(|c| self.k_basis.column(c).iter().copied().collect())
                        .collect(),
                )
            },
            fibration,
        }
    }

    /// Loads a space definition, validating every type invariant and
    /// reporting the first violated one.
    pub fn from_definition(def: &SpaceDefinition, tol: Tolerance) -> Result<ReductiveSpace> {
        let n = def.dim;
        let mut structure = Vec::with_capacity(n * n * n);
        if def.structure.len() != n {
            return Err(Error::Validation(
                "structure outer dimension mismatch".into(),
            ));
        }
        for plane in &def.structure {
            if plane.len() != n {
                return Err(Error::Validation(
                    "structure middle dimension mismatch".into(),
                ));
            }
            for row in plane {
                if row.len() != n {
                    return Err(Error::Validation(
                        "structure inner dimension mismatch".into(),
                    ));
                }
                structure.extend_from_slice(row);
            }
        }
        if def.metric.len() != n || def.metric.iter().any(|r| r.len() != n) {
            return Err(Error::Validation("metric shape mismatch".into()));
        }
        let metric = DMatrix::from_fn(n, n, |i, j| def.metric[i][j]);
        let algebra = LieAlgebraData::new(n, structure, metric, def.name.clone(), &tol)?;

        let (p_basis, k_basis) = match (&def.k_indices, &def.k_basis) {
            (Some(idx), None) => {
                let k_set: std::collections::BTreeSet<usize> = idx.iter().copied().collect();
                if k_set.len() != idx.len() || idx.iter().any(|&i| i >= n) {
                    return Err(Error::Validation("bad k_indices".into()));
                }
                let p_idx: Vec<usize> = (0..n).filter(|i| !k_set.contains(i)).collect();
                let mut p = DMatrix::zeros(n, p_idx.len());
                for (c, &i) in p_idx.iter().enumerate() {
                    p[(i, c)] = 1.0;
                }
                let mut k = DMatrix::zeros(n, idx.len());
                for (c, &i) in idx.iter().enumerate() {
                    k[(i, c)] = 1.0;
                }
                (p, k)
            }
            (None, Some(vectors)) => {
                // orthonormalize k w.r.t. the g-metric, take p = k^⊥ with a
                // g-orthonormal frame
                let g = algebra.metric().clone();
                let chol = g
                    .clone()
                    .cholesky()
                    .ok_or_else(|| Error::Validation("metric is not positive definite".into()))?;
                let l_t = chol.l().transpose();
                // work in metric-flattening coordinates y = Lᵀ x
                let to_flat = |v: &DVector<f64>| &l_t * v;
                let from_flat = |v: &DVector<f64>| {
                    l_t.clone()
                        .solve_upper_triangular(v)
                        .expect("upper triangular solve")
                };
                let k_flat: Vec<DVector<f64>> = vectors
                    .iter()
                    .map(|row| to_flat(&DVector::from_column_slice(row)))
                    .collect();
                let k_span = orthonormalize(&k_flat, &tol)?;
                let p_span = k_span.complement(&tol);
                let mut k = DMatrix::zeros(n, k_span.dim());
                for c in 0..k_span.dim() {
                    k.set_column(c, &from_flat(&k_span.basis_vector(c)));
                }
                let mut p = DMatrix::zeros(n, p_span.dim());
                for c in 0..p_span.dim() {
                    p.set_column(c, &from_flat(&p_span.basis_vector(c)));
                }
                (p, k)
            }
            _ => {
                return Err(Error::Validation(
                    "exactly one of k_indices / k_basis required".into(),
                ))
            }
        };
        let np = p_basis.ncols();
        let fibration = match &def.fibration {
            None => None,
            Some(f) => {
                if f.v.iter().chain(f.h.iter()).any(|&i| i >= np) {
                    return Err(Error::Validation("fibration index out of range".into()));
                }
                Some(FibrationSplit {
                    vertical: Subspace::coordinate(np, &f.v),
                    horizontal: Subspace::coordinate(np, &f.h),
                })
            }
        };
        ReductiveSpace::new(algebra, p_basis, k_basis, fibration, def.name.clone(), tol)
    }
}

fn subspace_axes(s: &Subspace) -> Vec<usize> {
    // the built-in fibrations are coordinate subspaces; recover the axes
    let mut axes = Vec::new();
    for c in 0..s.dim() {
        let col = s.basis_vector(c);
        let (idx, _) = col
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap();
        axes.push(idx);
    }
    axes.sort_unstable();
    axes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::dvec;

    /// su(2) with basis H, E, F: [H,E] = -2F, [H,F] = 2E, [E,F] = -2H,
    /// metric = -tr(XY) = diag(2,2,2).
    fn su2() -> LieAlgebraData {
        let n = 3;
        let mut c = vec![0.0; n * n * n];
        let mut set = |i: usize, j: usize, k: usize, v: f64| {
            c[(i * n + j) * n + k] = v;
            c[(j * n + i) * n + k] = -v;
        };
        set(0, 1, 2, -2.0);
        set(0, 2, 1, 2.0);
        set(1, 2, 0, -2.0);
        let metric = DMatrix::from_diagonal(&dvec(&[2.0, 2.0, 2.0]));
        LieAlgebraData::new(n, c, metric, "su2", &Tolerance::default()).unwrap()
    }

    #[test]
    fn su2_validates() {
        let alg = su2();
        assert!(alg.jacobi_residual() < 1e-14);
    }

    #[test]
    fn bracket_antisymmetry_kills_diagonal() {
        let alg = su2();
        let x = dvec(&[0.3, -1.2, 0.7]);
        assert!(alg.bracket(&x, &x).amax() < 1e-14);
    }

    #[test]
    fn bad_metric_is_rejected() {
        let n = 3;
        let mut c = vec![0.0; 27];
        let mut set = |i: usize, j: usize, k: usize, v: f64| {
            c[(i * n + j) * n + k] = v;
            c[(j * n + i) * n + k] = -v;
        };
        set(0, 1, 2, -2.0);
        set(0, 2, 1, 2.0);
        set(1, 2, 0, -2.0);
        // not ad-invariant: stretch one direction
        let metric = DMatrix::from_diagonal(&dvec(&[2.0, 2.0, 4.0]));
        let err = LieAlgebraData::new(n, c, metric, "bad", &Tolerance::default()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    /// The sphere S² = SU(2)/U(1): k = span{H}, p = span{E,F}/√2 frame.
    fn s2_space() -> ReductiveSpace {
        let alg = su2();
        let s = 1.0 / 2f64.sqrt();
        let p = DMatrix::from_column_slice(3, 2, &[0.0, s, 0.0, 0.0, 0.0, s]);
        let k = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        ReductiveSpace::new(alg, p, k, None, "s2", Tolerance::default()).unwrap()
    }

    #[test]
    fn s2_is_naturally_reductive_symmetric_pair() {
        let sp = s2_space();
        assert!(sp.is_naturally_reductive());
        // symmetric pair: [p,p] ⊆ k
        let e0 = dvec(&[1.0, 0.0]);
        let e1 = dvec(&[0.0, 1.0]);
        assert!(sp.bracket_p_p(&e0, &e1).amax() < 1e-14);
        assert!(sp.bracket_p_k(&e0, &e1).amax() > 0.1);
    }

    #[test]
    fn projections_are_complementary() {
        let sp = s2_space();
        let x = dvec(&[0.4, -0.3, 1.1]);
        let sum = sp.project_p(&x) + sp.project_k(&x);
        assert!((sum - x).amax() < 1e-13);
        // x ∈ p ⇒ project_k(x) = 0
        let p_vec = sp.lift_p(&dvec(&[0.7, -0.2]));
        assert!(sp.project_k(&p_vec).amax() < 1e-14);
        // x ∈ k ⇒ project_p(x) = 0
        let k_vec = sp.lift_k(&dvec(&[2.0]));
        assert!(sp.project_p(&k_vec).amax() < 1e-14);
    }

    #[test]
    fn u_symmetry_holds_for_deformed_metric() {
        let sp = s2_space();
        let gram = DMatrix::from_diagonal(&dvec(&[1.0, 3.0]));
        let deformed = sp.with_p_metric(&gram, "s2-deformed");
        let x = dvec(&[0.3, 0.9]);
        let y = dvec(&[-1.0, 0.4]);
        let uxy = deformed.u_tensor(&x, &y);
        let uyx = deformed.u_tensor(&y, &x);
        assert!((uxy - uyx).amax() < 1e-13);
    }

    #[test]
    fn zero_subspace_generates_zero() {
        let sp = s2_space();
        let gen = sp
            .generated_canonical_subalgebra(&Subspace::empty(2))
            .unwrap();
        assert_eq!(gen.subalgebra.dim(), 0);
        assert!(gen.splits);
    }

    #[test]
    fn full_p_generates_su2_without_split_violation() {
        let sp = s2_space();
        let gen = sp
            .generated_canonical_subalgebra(&Subspace::full(2))
            .unwrap();
        assert_eq!(gen.subalgebra.dim(), 3);
        assert!(gen.bracket_residual < 1e-12);
        assert_eq!(gen.p_part.dim(), 2);
        assert_eq!(gen.k_part.dim(), 1);
        assert!(gen.splits);
    }

    #[test]
    fn definition_round_trip() {
        let sp = s2_space();
        let def = sp.to_definition();
        let text = serde_json::to_string(&def).unwrap();
        let parsed: SpaceDefinition = serde_json::from_str(&text).unwrap();
        let re = ReductiveSpace::from_definition(&parsed, Tolerance::default()).unwrap();
        assert_eq!(re.algebra.dim(), 3);
        assert_eq!(re.p_dim(), 2);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(
                        re.algebra.structure_constant(i, j, k),
                        sp.algebra.structure_constant(i, j, k),
                        "structure constants must round-trip bit-identically"
                    );
                }
            }
        }
        assert_eq!(re.algebra.metric(), sp.algebra.metric());
    }

    #[test]
    fn loader_reports_first_violation() {
        let sp = s2_space();
        let mut def = sp.to_definition();
        def.structure[0][1][2] += 0.5; // break antisymmetry
        let err = ReductiveSpace::from_definition(&def, Tolerance::default()).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("antisymmetry"), "got: {msg}");
    }
}
