//! Intrinsic geometry of a reductive homogeneous space at the base point:
//! the difference tensor D, the curvature tensors R and R^c, iterated
//! covariant derivatives ∇^k R, Jacobi and Cartan operators, and the totally
//! geodesic decision procedures built on them.
//!
//! Everything is computed in p-frame coordinates, where the space metric is
//! the Euclidean one. The curvature at the base point is
//!
//! ```text
//! R(X,Y)Z = D_X D_Y Z − D_Y D_X Z − [[X,Y]_k, Z] − D_{[X,Y]_p} Z,
//! D_X Y   = ½[X,Y]_p + U(X,Y),
//! ```
//!
//! and ∇R corrects every argument slot with D. Higher derivatives iterate
//! the same rule: every G-invariant tensor is parallel for the canonical
//! connection and ∇ = ∇^c + D, so D acts as a derivation on invariant
//! tensors at any order.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liealg::ReductiveSpace;
use crate::numkernel::{mat_exp, orthonormalize, subspace_equal, sym_eig, Subspace};

/// Dense multilinear tensor with `slots` input slots of dimension `n` and a
/// vector output of dimension `n`.
#[derive(Debug, Clone)]
pub struct MultiTensor {
    n: usize,
    slots: usize,
    data: Vec<f64>,
}

impl MultiTensor {
    pub fn zeros(n: usize, slots: usize) -> Self {
        MultiTensor {
            n,
            slots,
            data: vec![0.0; n.pow(slots as u32) * n],
        }
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    #[inline]
    fn offset(&self, idx: &[usize]) -> usize {
        let mut o = 0;
        for &i in idx {
            o = o * self.n + i;
        }
        o * self.n
    }

    #[inline]
    pub fn entry(&self, idx: &[usize], out: usize) -> f64 {
        self.data[self.offset(idx) + out]
    }

    #[inline]
    fn entry_mut(&mut self, idx: &[usize], out: usize) -> &mut f64 {
        let o = self.offset(idx) + out;
        &mut self.data[o]
    }

    pub fn value(&self, idx: &[usize]) -> DVector<f64> {
        let o = self.offset(idx);
        DVector::from_column_slice(&self.data[o..o + self.n])
    }

    pub fn set_value(&mut self, idx: &[usize], val: &[f64]) {
        let o = self.offset(idx);
        self.data[o..o + self.n].copy_from_slice(val);
    }

    pub fn amax(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    /// Full multilinear contraction against the given argument vectors.
    pub fn contract(&self, args: &[&DVector<f64>]) -> DVector<f64> {
        assert_eq!(args.len(), self.slots);
        let n = self.n;
        let mut current = self.data.clone();
        let mut entries = current.len();
        for arg in args {
            let block = entries / n;
            let mut next = vec![0.0; block];
            for i in 0..n {
                let c = arg[i];
                if c == 0.0 {
                    continue;
                }
                let base = i * block;
                for (t, src) in next.iter_mut().zip(&current[base..base + block]) {
                    *t += c * src;
                }
            }
            current = next;
            entries = block;
        }
        DVector::from_vec(current)
    }

    /// Re-expresses every input slot against the columns of `basis`: the
    /// result takes d-dimensional multi-indices while the output stays
    /// ambient.
    pub fn restrict_inputs(&self, basis: &DMatrix<f64>) -> RestrictedTensor {
        let n = self.n;
        let d = basis.ncols();
        let mut current = self.data.clone();
        let mut done = 0usize;
        for _ in 0..self.slots {
            let lead = d.pow(done as u32);
            let rest = current.len() / (lead * n);
            let mut next = vec![0.0; lead * d * rest];
            for l in 0..lead {
                for c in 0..d {
                    let dst = (l * d + c) * rest;
                    for i in 0..n {
                        let w = basis[(i, c)];
                        if w == 0.0 {
                            continue;
                        }
                        let src = (l * n + i) * rest;
                        for r in 0..rest {
                            next[dst + r] += w * current[src + r];
                        }
                    }
                }
            }
            current = next;
            done += 1;
        }
        RestrictedTensor {
            n,
            d,
            slots: self.slots,
            data: current,
        }
    }
}

/// A tensor whose input slots run over a d-dimensional subspace basis while
/// the output stays ambient.
pub struct RestrictedTensor {
    n: usize,
    d: usize,
    slots: usize,
    data: Vec<f64>,
}

impl RestrictedTensor {
    /// Iterates all index tuples, calling `f(tuple, value_slice)`.
    pub fn for_each(&self, mut f: impl FnMut(&[usize], &[f64])) {
        if self.data.is_empty() {
            return;
        }
        let tuples = self.data.len() / self.n;
        let mut idx = vec![0usize; self.slots];
        for t in 0..tuples {
            let mut rem = t;
            for s in (0..self.slots).rev() {
                idx[s] = rem % self.d;
                rem /= self.d;
            }
            f(&idx, &self.data[t * self.n..(t + 1) * self.n]);
        }
    }
}

/// Where a totally geodesic check failed.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    /// derivative order of the offending tensor (0 = curvature itself)
    pub order: usize,
    /// indices into the subspace basis for each tensor slot
    pub slots: Vec<usize>,
    /// component of the tensor value escaping the subspace
    pub escaped: Vec<f64>,
    pub residual: f64,
}

/// Verdict bundle for a candidate totally geodesic subspace.
#[derive(Debug, Clone, Serialize)]
pub struct TGVerdict {
    pub is_tg: bool,
    pub max_residual: f64,
    pub order_checked: usize,
    pub tojo_residual: f64,
    pub tojo_samples: usize,
    pub d_invariant: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// Report of the translated-curvature (Tojo) test.
#[derive(Debug, Clone)]
pub struct TojoReport {
    pub max_residual: f64,
    pub worst_direction: DVector<f64>,
    pub samples: usize,
}

/// The equivalent characterizations of D-invariant totally geodesic tangent
/// spaces, evaluated independently and cross-checked.
#[derive(Debug, Clone)]
pub struct DInvarianceBundle {
    pub verdict: bool,
    pub d_residual: f64,
    pub r_invariant: bool,
    pub rc_invariant: bool,
    pub subalgebra_splits: bool,
}

/// Totally geodesic surface criterion report.
#[derive(Debug, Clone)]
pub struct SurfaceReport {
    pub kappa_candidate: Option<f64>,
    pub passes: bool,
    pub cyclic_dim: usize,
    pub jacobi_residual: f64,
    pub cartan_residual: f64,
}

/// Well-positionedness report.
#[derive(Debug, Clone)]
pub struct WellPositionedReport {
    pub well_positioned: bool,
    pub worst_residual: f64,
}

/// Cached curvature data for one space.
pub struct CurvatureOperatorSet {
    space: Arc<ReductiveSpace>,
    k_max: usize,
    /// d_ops[i] = matrix of D_{p_i} acting on p
    d_ops: Vec<DMatrix<f64>>,
    /// nabla[k] = ∇^k R, k derivative slots followed by the three curvature slots
    nabla: Vec<MultiTensor>,
    /// R^c(X,Y)Z = −[[X,Y]_k, Z]
    canonical: MultiTensor,
}

impl CurvatureOperatorSet {
    pub fn new(space: Arc<ReductiveSpace>, k_max: usize) -> Self {
        let np = space.p_dim();
        let d_ops: Vec<DMatrix<f64>> = (0..np)
            .map(|i| {
                let mut m = DMatrix::zeros(np, np);
                let ei = crate::numkernel::axis(np, i);
                for j in 0..np {
                    let ej = crate::numkernel::axis(np, j);
                    let col = space.bracket_p_p(&ei, &ej) * 0.5 + space.u_tensor(&ei, &ej);
                    m.set_column(j, &col);
                }
                m
            })
            .collect();

        let d_of = |v: &DVector<f64>| -> DMatrix<f64> {
            let mut m = DMatrix::zeros(np, np);
            for (i, op) in d_ops.iter().enumerate() {
                if v[i] != 0.0 {
                    m += op * v[i];
                }
            }
            m
        };

        let mut r0 = MultiTensor::zeros(np, 3);
        let mut canonical = MultiTensor::zeros(np, 3);
        for i in 0..np {
            let ei = crate::numkernel::axis(np, i);
            for j in 0..np {
                let ej = crate::numkernel::axis(np, j);
                let bk = space.bracket_p_k(&ei, &ej);
                let bp = space.bracket_p_p(&ei, &ej);
                let ad = space.ad_k_on_p(&bk);
                let m = &d_ops[i] * &d_ops[j] - &d_ops[j] * &d_ops[i] - &ad - d_of(&bp);
                for k in 0..np {
                    for out in 0..np {
                        *r0.entry_mut(&[i, j, k], out) = m[(out, k)];
                        *canonical.entry_mut(&[i, j, k], out) = -ad[(out, k)];
                    }
                }
            }
        }

        let mut nabla = vec![r0];
        for k in 0..k_max {
            let prev = &nabla[k];
            let slots = prev.slots();
            let mut next = MultiTensor::zeros(np, slots + 1);
            let tuples = np.pow(slots as u32);
            let mut idx = vec![0usize; slots];
            for (v, dv) in d_ops.iter().enumerate() {
                for t in 0..tuples {
                    let mut rem = t;
                    for s in (0..slots).rev() {
                        idx[s] = rem % np;
                        rem /= np;
                    }
                    let mut val = dv * prev.value(&idx);
                    let mut jdx = idx.clone();
                    for s in 0..slots {
                        let orig = idx[s];
                        for m in 0..np {
                            let w = dv[(m, orig)];
                            if w == 0.0 {
                                continue;
                            }
                            jdx[s] = m;
                            let contrib = prev.value(&jdx);
                            val.axpy(-w, &contrib, 1.0);
                        }
                        jdx[s] = orig;
                    }
                    let mut full = Vec::with_capacity(slots + 1);
                    full.push(v);
                    full.extend_from_slice(&idx);
                    for out in 0..np {
                        *next.entry_mut(&full, out) = val[out];
                    }
                }
            }
            nabla.push(next);
        }

        CurvatureOperatorSet {
            space,
            k_max,
            d_ops,
            nabla,
            canonical,
        }
    }

    pub fn space(&self) -> &Arc<ReductiveSpace> {
        &self.space
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn p_dim(&self) -> usize {
        self.space.p_dim()
    }

    /// D along the i-th frame direction as an operator on p.
    pub fn d_operator_basis(&self, i: usize) -> &DMatrix<f64> {
        &self.d_ops[i]
    }

    /// D_X as an operator on p.
    pub fn d_operator(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let np = self.p_dim();
        let mut m = DMatrix::zeros(np, np);
        for (i, op) in self.d_ops.iter().enumerate() {
            if x[i] != 0.0 {
                m += op * x[i];
            }
        }
        m
    }

    /// D_X Y = ½[X,Y]_p + U(X,Y).
    pub fn difference_tensor(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.space.bracket_p_p(x, y) * 0.5 + self.space.u_tensor(x, y)
    }

    /// R(X,Y)Z.
    pub fn curvature(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        self.nabla[0].contract(&[x, y, z])
    }

    /// R^c(X,Y)Z = −[[X,Y]_k, Z].
    pub fn canonical_curvature(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        z: &DVector<f64>,
    ) -> DVector<f64> {
        self.canonical.contract(&[x, y, z])
    }

    /// Sectional curvature of the plane spanned by X and Y.
    pub fn sectional_curvature(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let rxy = self.curvature(x, y, y);
        let num = rxy.dot(x);
        let den = x.norm_squared() * y.norm_squared() - x.dot(y).powi(2);
        num / den
    }

    /// (∇^k R)(v_1,…,v_k, x, y, z) on explicit vectors.
    pub fn nabla_k_r(&self, k: usize, args: &[&DVector<f64>]) -> Result<DVector<f64>> {
        if k > self.k_max {
            return Err(Error::Order {
                requested: k,
                max: self.k_max,
            });
        }
        if args.len() != k + 3 {
            return Err(Error::Validation(format!(
                "∇^{k} R takes {} arguments, got {}",
                k + 3,
                args.len()
            )));
        }
        Ok(self.nabla[k].contract(args))
    }

    pub fn tensor(&self, k: usize) -> &MultiTensor {
        &self.nabla[k]
    }

    /// Jacobi operator R_X: Y ↦ R(Y,X)X.
    pub fn jacobi_operator(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let np = self.p_dim();
        let mut m = DMatrix::zeros(np, np);
        for y in 0..np {
            let ey = crate::numkernel::axis(np, y);
            let col = self.nabla[0].contract(&[&ey, x, x]);
            m.set_column(y, &col);
        }
        m
    }

    /// Cartan operator of order j: C^j_X Y = ∇^j R(X,…,X, X, Y, X).
    /// The zero direction gives the zero operator.
    pub fn cartan_operator(&self, j: usize, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        if j > self.k_max {
            return Err(Error::Order {
                requested: j,
                max: self.k_max,
            });
        }
        let np = self.p_dim();
        let mut m = DMatrix::zeros(np, np);
        for y in 0..np {
            let ey = crate::numkernel::axis(np, y);
            let mut args: Vec<&DVector<f64>> = vec![x; j + 3];
            args[j + 1] = &ey;
            let col = self.nabla[j].contract(&args);
            m.set_column(y, &col);
        }
        Ok(m)
    }

    /// Ricci tensor contracted from R: Ric(X,Y) = Σ_a ⟨R(X,e_a)e_a, Y⟩.
    pub fn ricci(&self) -> DMatrix<f64> {
        let np = self.p_dim();
        let mut ric = DMatrix::zeros(np, np);
        for i in 0..np {
            let ei = crate::numkernel::axis(np, i);
            for a in 0..np {
                let ea = crate::numkernel::axis(np, a);
                let v = self.curvature(&ei, &ea, &ea);
                for j in 0..np {
                    ric[(i, j)] += v[j];
                }
            }
        }
        let ric_t = ric.transpose();
        (ric + ric_t) * 0.5
    }

    /// Largest violation of the algebraic curvature identities over basis
    /// tuples: antisymmetry in (X,Y), skew-adjointness in (Z,W), first
    /// Bianchi identity and pair symmetry.
    pub fn curvature_symmetry_residual(&self) -> f64 {
        let np = self.p_dim();
        let r = &self.nabla[0];
        let mut worst = 0.0f64;
        for i in 0..np {
            for j in 0..np {
                for k in 0..np {
                    for l in 0..np {
                        let rijkl = r.entry(&[i, j, k], l);
                        worst = worst.max((rijkl + r.entry(&[j, i, k], l)).abs());
                        worst = worst.max((rijkl + r.entry(&[i, j, l], k)).abs());
                        worst = worst.max((rijkl - r.entry(&[k, l, i], j)).abs());
                        let bianchi = rijkl + r.entry(&[j, k, i], l) + r.entry(&[k, i, j], l);
                        worst = worst.max(bianchi.abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest violation of the second Bianchi identity over basis tuples.
    pub fn second_bianchi_residual(&self) -> f64 {
        if self.k_max < 1 {
            return f64::NAN;
        }
        let np = self.p_dim();
        let nr = &self.nabla[1];
        let mut worst = 0.0f64;
        for a in 0..np {
            for b in 0..np {
                for c in 0..np {
                    for d in 0..np {
                        for out in 0..np {
                            let cyc = nr.entry(&[a, b, c, d], out)
                                + nr.entry(&[b, c, a, d], out)
                                + nr.entry(&[c, a, b, d], out);
                            worst = worst.max(cyc.abs());
                        }
                    }
                }
            }
        }
        worst
    }

    /// Max residual of Jacobi-operator symmetry and R_X X = 0 over the frame.
    pub fn jacobi_operator_residual(&self) -> f64 {
        let np = self.p_dim();
        let mut worst = 0.0f64;
        for i in 0..np {
            let ei = crate::numkernel::axis(np, i);
            let jac = self.jacobi_operator(&ei);
            worst = worst.max((&jac - jac.transpose()).amax());
            worst = worst.max((jac * &ei).amax());
        }
        worst
    }

    /// Residual of the subspace under ∇^k R over basis tuples, with the worst
    /// witness when the residual is significant.
    pub fn invariance_residual(&self, v: &Subspace, k: usize) -> Result<(f64, Option<Witness>)> {
        if k > self.k_max {
            return Err(Error::Order {
                requested: k,
                max: self.k_max,
            });
        }
        let restricted = self.nabla[k].restrict_inputs(v.basis());
        let proj = v.projector();
        let mut worst = 0.0f64;
        let mut witness: Option<Witness> = None;
        restricted.for_each(|idx, val| {
            let value = DVector::from_column_slice(val);
            let rejected = &value - &proj * &value;
            let res = rejected.norm();
            if res > worst {
                worst = res;
                witness = Some(Witness {
                    order: k,
                    slots: idx.to_vec(),
                    escaped: rejected.iter().copied().collect(),
                    residual: res,
                });
            }
        });
        if worst < self.space.tol.eps_zero {
            witness = None;
        }
        Ok((worst, witness))
    }

    /// Residual of the subspace under the canonical curvature R^c.
    pub fn canonical_invariance_residual(&self, v: &Subspace) -> f64 {
        let restricted = self.canonical.restrict_inputs(v.basis());
        let proj = v.projector();
        let mut worst = 0.0f64;
        restricted.for_each(|_, val| {
            let value = DVector::from_column_slice(val);
            let rejected = &value - &proj * &value;
            worst = worst.max(rejected.norm());
        });
        worst
    }

    /// Residual of the subspace under D: max ‖(I−P) D(v_i, v_j)‖.
    pub fn d_invariance_residual(&self, v: &Subspace) -> f64 {
        let d = v.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            let vi = v.basis_vector(i);
            for j in 0..d {
                let vj = v.basis_vector(j);
                let dij = self.difference_tensor(&vi, &vj);
                worst = worst.max(v.rejection_norm(&dij));
            }
        }
        worst
    }

    /// Curvature-invariance residual alone (cheap rejection path for sweeps):
    /// any positive value is already an obstruction.
    pub fn r_invariance_residual(&self, v: &Subspace) -> f64 {
        self.invariance_residual(v, 0)
            .map(|(r, _)| r)
            .unwrap_or(f64::NAN)
    }

    /// Directions in v used by the translation-based checks: basis vectors,
    /// normalized pairwise sums, then seeded random unit vectors.
    fn sample_directions(&self, v: &Subspace, sample_count: usize, seed: u64) -> Vec<DVector<f64>> {
        let d = v.dim();
        let mut xs = Vec::new();
        for i in 0..d {
            xs.push(v.basis_vector(i));
        }
        for i in 0..d {
            for j in (i + 1)..d {
                xs.push((v.basis_vector(i) + v.basis_vector(j)) / 2f64.sqrt());
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..sample_count {
            let mut coords = DVector::zeros(d);
            for c in 0..d {
                coords[c] = rng.gen_range(-1.0..1.0);
            }
            let norm = coords.norm();
            if norm < 1e-6 {
                continue;
            }
            xs.push(v.basis() * (coords / norm));
        }
        xs
    }

    /// Translated-curvature criterion: for sampled X ∈ v, the subspace
    /// e^{−D_X} v must be R-invariant. Failures are definitive; passes are
    /// evidence at the sampled resolution.
    pub fn tojo_check(&self, v: &Subspace, sample_count: usize, seed: u64) -> Result<TojoReport> {
        let np = self.p_dim();
        let mut worst = 0.0f64;
        let mut worst_dir = DVector::zeros(np);
        let xs = self.sample_directions(v, sample_count, seed);
        let count = xs.len();
        for x in xs {
            let w = self.translate_subspace_unchecked(v, &x)?;
            let (res, _) = self.invariance_residual(&w, 0)?;
            if res > worst {
                worst = res;
                worst_dir = x;
            }
        }
        Ok(TojoReport {
            max_residual: worst,
            worst_direction: worst_dir,
            samples: count,
        })
    }

    /// e^{−D_X}·v for X ∈ v.
    pub fn translate_subspace(&self, v: &Subspace, x: &DVector<f64>) -> Result<Subspace> {
        let res = v.rejection_norm(x);
        if res >= self.space.tol.eps_zero * x.norm().max(1.0) {
            return Err(Error::NotTangent(res));
        }
        self.translate_subspace_unchecked(v, x)
    }

    fn translate_subspace_unchecked(&self, v: &Subspace, x: &DVector<f64>) -> Result<Subspace> {
        let exp = mat_exp(&(-self.d_operator(x)));
        v.map(&exp, &self.space.tol)
    }

    /// Full totally geodesic test: ∇^k R-invariance for all k ≤ order over
    /// basis tuples of v, combined with the translated-curvature criterion.
    pub fn tg_check(
        &self,
        v: &Subspace,
        order: usize,
        sample_count: usize,
        seed: u64,
    ) -> Result<TGVerdict> {
        let eps = self.space.tol.eps_zero;
        let order = order.min(self.k_max);
        let mut max_residual = 0.0f64;
        let mut witness = None;
        for k in 0..=order {
            let (res, wit) = self.invariance_residual(v, k)?;
            if res > max_residual {
                max_residual = res;
                if let Some(w) = wit {
                    witness = Some(w);
                }
            }
        }
        let tojo = self.tojo_check(v, sample_count, seed)?;
        let d_res = self.d_invariance_residual(v);
        let is_tg = max_residual < eps && tojo.max_residual < eps;
        Ok(TGVerdict {
            is_tg,
            max_residual: max_residual.max(tojo.max_residual),
            order_checked: order,
            tojo_residual: tojo.max_residual,
            tojo_samples: tojo.samples,
            d_invariant: d_res < eps,
            witness: if is_tg { None } else { witness },
        })
    }

    /// D-invariance characterization: the direct tensor conditions and the
    /// generated-subalgebra condition are evaluated independently and must
    /// agree; disagreement signals a kernel bug.
    pub fn d_invariance_check(&self, v: &Subspace) -> Result<DInvarianceBundle> {
        let eps = self.space.tol.eps_zero;
        let d_res = self.d_invariance_residual(v);
        let d_inv = d_res < eps;
        let (r_res, _) = self.invariance_residual(v, 0)?;
        let r_inv = r_res < eps;
        let rc_res = self.canonical_invariance_residual(v);
        let rc_inv = rc_res < eps;
        let generated = self.space.generated_canonical_subalgebra(v)?;

        let clause_i = d_inv && r_inv;
        let clause_ii = d_inv && rc_inv;
        let clause_iii = generated.splits;
        if clause_i != clause_ii || clause_ii != clause_iii {
            return Err(Error::InternalConsistency(format!(
                "D-invariance clauses disagree on a {}-dim subspace: (i)={clause_i} (ii)={clause_ii} (iii)={clause_iii} \
                 [d_res={d_res:.3e} r_res={r_res:.3e} rc_res={rc_res:.3e}]",
                v.dim()
            )));
        }
        Ok(DInvarianceBundle {
            verdict: clause_i,
            d_residual: d_res,
            r_invariant: r_inv,
            rc_invariant: rc_inv,
            subalgebra_splits: clause_iii,
        })
    }

    /// Necessary condition for a totally geodesic surface through orthogonal
    /// X, Y: the D_X-cyclic span of Y must sit inside a single Jacobi
    /// eigenspace of R_X and inside the kernels of the Cartan operators up to
    /// the given order.
    pub fn surface_criterion(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        order: usize,
    ) -> Result<SurfaceReport> {
        let tol = &self.space.tol;
        if x.norm() < tol.eps_zero || y.norm() < tol.eps_zero {
            return Err(Error::Validation(
                "surface criterion needs nonzero X, Y".into(),
            ));
        }
        if x.dot(y).abs() > tol.eps_zero * x.norm() * y.norm() {
            return Err(Error::Validation("X and Y must be orthogonal".into()));
        }
        let dx = self.d_operator(x);
        let mut gens = vec![y.clone()];
        let mut span = orthonormalize(&gens, tol)?;
        loop {
            let next = &dx * gens.last().unwrap();
            gens.push(next);
            let bigger = orthonormalize(&gens, tol)?;
            if bigger.dim() == span.dim() {
                break;
            }
            span = bigger;
            if span.dim() == self.p_dim() {
                break;
            }
        }
        let jac = self.jacobi_operator(x);
        let lambda = y.dot(&(&jac * y)) / y.norm_squared();
        let mut jac_res = 0.0f64;
        for i in 0..span.dim() {
            let w = span.basis_vector(i);
            jac_res = jac_res.max((&jac * &w - &w * lambda).norm());
        }
        let mut cartan_res = 0.0f64;
        for j in 1..=order.min(self.k_max) {
            let c = self.cartan_operator(j, x)?;
            for i in 0..span.dim() {
                cartan_res = cartan_res.max((&c * span.basis_vector(i)).norm());
            }
        }
        let passes = jac_res < tol.eps_zero && cartan_res < tol.eps_zero;
        Ok(SurfaceReport {
            kappa_candidate: if passes {
                Some(lambda / x.norm_squared())
            } else {
                None
            },
            passes,
            cyclic_dim: span.dim(),
            jacobi_residual: jac_res,
            cartan_residual: cartan_res,
        })
    }

    /// Second fundamental form of the orbit of the subgroup with Lie algebra
    /// `s` (a subspace of g closed under the bracket):
    /// II(X_p, Y) = ([X_k, Y] + D_{X_p} Y)_{s_p^⊥} for X ∈ s, Y ∈ s ∩ p.
    pub fn orbit_second_fundamental_form(
        &self,
        s: &Subspace,
        x_g: &DVector<f64>,
        y_p: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let tol = &self.space.tol;
        let space = &self.space;
        if s.ambient_dim() != space.algebra.dim() {
            return Err(Error::Dimension(s.ambient_dim(), space.algebra.dim()));
        }
        let mut closure_res = 0.0f64;
        for i in 0..s.dim() {
            for j in (i + 1)..s.dim() {
                let b = space
                    .algebra
                    .bracket(&s.basis_vector(i), &s.basis_vector(j));
                closure_res = closure_res.max(s.rejection_norm(&b));
            }
        }
        if closure_res >= tol.eps_zero {
            return Err(Error::NotASubalgebra(closure_res));
        }
        if s.rejection_norm(x_g) >= tol.eps_zero * x_g.norm().max(1.0) {
            return Err(Error::NotTangent(s.rejection_norm(x_g)));
        }
        let tangent = self.orbit_tangent_space(s)?;
        if tangent.rejection_norm(y_p) >= tol.eps_zero * y_p.norm().max(1.0) {
            return Err(Error::NotTangent(tangent.rejection_norm(y_p)));
        }
        let (x_p, x_k) = space.split_coords(x_g);
        let ad = space.ad_k_on_p(&x_k);
        let val = &ad * y_p + self.difference_tensor(&x_p, y_p);
        Ok(tangent.reject(&val))
    }

    /// Tangent space at o of the orbit of the subgroup with Lie algebra s:
    /// the projection of s to p, in p-frame coordinates.
    pub fn orbit_tangent_space(&self, s: &Subspace) -> Result<Subspace> {
        let space = &self.space;
        let cols: Vec<DVector<f64>> = (0..s.dim())
            .map(|i| space.split_coords(&s.basis_vector(i)).0)
            .collect();
        orthonormalize(&cols, &space.tol)
    }

    /// Whether the orbit of s is totally geodesic: II vanishes on a basis.
    pub fn orbit_is_totally_geodesic(&self, s: &Subspace) -> Result<(bool, f64)> {
        let tangent = self.orbit_tangent_space(s)?;
        let mut worst = 0.0f64;
        for i in 0..s.dim() {
            let x = s.basis_vector(i);
            for j in 0..tangent.dim() {
                let y = tangent.basis_vector(j);
                let ii = self.orbit_second_fundamental_form(s, &x, &y)?;
                worst = worst.max(ii.norm());
            }
        }
        Ok((worst < self.space.tol.eps_zero, worst))
    }

    /// Well-positionedness with respect to the fibration split: every
    /// translated subspace e^{−D_X}v must split as (w∩V) ⊕ (w∩H). The intersection
    /// dimensions are read off the spectrum of the compressed vertical
    /// projector; for D-invariant v the X = 0 test alone already decides.
    pub fn well_positioned_check(
        &self,
        v: &Subspace,
        sample_count: usize,
        seed: u64,
    ) -> Result<WellPositionedReport> {
        let space = &self.space;
        let fib = space.fibration.as_ref().ok_or(Error::MissingFibration)?;
        let pv = fib.vertical.projector();
        let tol = &space.tol;
        let mut worst = 0.0f64;
        let mut subspaces = vec![v.clone()];
        for x in self.sample_directions(v, sample_count, seed) {
            subspaces.push(self.translate_subspace_unchecked(v, &x)?);
        }
        for w in subspaces {
            let m = w.basis().transpose() * &pv * w.basis();
            let clusters = sym_eig(&m, tol)?;
            for c in clusters {
                let dist = c.eigenvalue.min(1.0 - c.eigenvalue).abs();
                worst = worst.max(dist);
            }
        }
        Ok(WellPositionedReport {
            well_positioned: worst < tol.eps_cluster,
            worst_residual: worst,
        })
    }

    /// Convenience: the subspace spanned by explicit vectors.
    pub fn span(&self, vectors: &[DVector<f64>]) -> Result<Subspace> {
        orthonormalize(vectors, &self.space.tol)
    }
}

/// Haar-uniform random d-dimensional subspace of ℝⁿ from an orthonormalized
/// Gaussian frame.
pub fn random_subspace(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Subspace {
    loop {
        let cols: Vec<DVector<f64>> = (0..d)
            .map(|_| DVector::from_fn(n, |_, _| rng.sample(StandardNormal)))
            .collect();
        if let Ok(s) = orthonormalize(&cols, &crate::tol::Tolerance::default()) {
            if s.dim() == d {
                return s;
            }
        }
    }
}

/// Set equality of subspaces.
pub fn same_subspace(a: &Subspace, b: &Subspace, tol: &crate::tol::Tolerance) -> bool {
    subspace_equal(a, b, tol).unwrap_or(false)
}
