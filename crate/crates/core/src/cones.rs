//! Riemannian cone geometry over a built space: curvature, covariant
//! derivatives, closed-form geodesics, and totally geodesic analysis of cone
//! subspaces.
//!
//! The cone over (M, g) is ℝ⁺ ×_r M with metric ĝ = dr² + r²g. At a point
//! (τ, o) the tangent space splits as ℝ∂r ⊕ p; curvature and its covariant
//! derivatives mix the two parts through the connection rules
//!
//! ```text
//! ∇̂_∂r ∂r = 0,   ∇̂_X ∂r = ∇̂_∂r X = X/r,   ∇̂_X Y = ∇_X Y − r⟨X,Y⟩ ∂r.
//! ```
//!
//! Every tensor ∇̂^k R̂ decomposes over "slot patterns": fixing which argument
//! slots carry ∂r leaves a base tensor for the remaining slots, and the τ
//! dependence of each pattern is an explicit power (τ^{1−ρ} on the radial
//! output, τ^{−ρ} on the tangential one, for ρ radial slots). Differentiating
//! once more maps patterns to patterns by the rules above, with the base
//! covariant derivative supplied by the D-derivation on the homogeneous base.
//! All checks run at the reference point (τ = 1, o); homogeneity of the base
//! and the explicit powers of τ make that sufficient.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::homgeo::{CurvatureOperatorSet, MultiTensor, Witness};
use crate::numkernel::{orthonormalize, Subspace};
use crate::tol::Tolerance;

/// A point of the cone is determined by its radial coordinate.
#[derive(Debug, Clone, Copy)]
pub struct ConePoint {
    pub tau: f64,
}

impl ConePoint {
    pub fn new(tau: f64) -> Result<Self> {
        if tau <= 0.0 {
            return Err(Error::Validation(format!(
                "cone radius must be positive, got {tau}"
            )));
        }
        Ok(ConePoint { tau })
    }
}

/// Tangent vector a·∂r + v at a cone point; `v` is stored as a base vector,
/// and the cone inner product applies the τ² weight to it.
#[derive(Debug, Clone)]
pub struct ConeTangent {
    pub a: f64,
    pub v: DVector<f64>,
}

impl ConeTangent {
    pub fn radial(n: usize) -> Self {
        ConeTangent {
            a: 1.0,
            v: DVector::zeros(n),
        }
    }

    pub fn base(v: DVector<f64>) -> Self {
        ConeTangent { a: 0.0, v }
    }

    /// ĝ-norm at the given point: √(a² + τ²|v|²).
    pub fn norm(&self, at: ConePoint) -> f64 {
        (self.a * self.a + at.tau * at.tau * self.v.norm_squared()).sqrt()
    }

    /// ĝ-inner product at the given point.
    pub fn inner(&self, other: &ConeTangent, at: ConePoint) -> f64 {
        self.a * other.a + at.tau * at.tau * self.v.dot(&other.v)
    }

    /// Coordinates in ℝ^{1+n} (radial first), for subspace work at τ = 1.
    pub fn coords(&self) -> DVector<f64> {
        let n = self.v.len();
        let mut c = DVector::zeros(n + 1);
        c[0] = self.a;
        for i in 0..n {
            c[i + 1] = self.v[i];
        }
        c
    }
}

/// One slot pattern of a cone tensor: the base tensor left after fixing the
/// radial slots. With ρ radial slots the actual value at (τ, p) is
/// τ^{1−ρ}·c(args)·∂r + τ^{−ρ}·b(args).
#[derive(Debug, Clone)]
struct PatternBlock {
    /// base arity (rank − ρ)
    q: usize,
    /// radial output component, n^q entries
    c: Vec<f64>,
    /// tangential output component, n^q × n entries
    b: Vec<f64>,
}

impl PatternBlock {
    fn zeros(n: usize, q: usize) -> Self {
        PatternBlock {
            q,
            c: vec![0.0; n.pow(q as u32)],
            b: vec![0.0; n.pow(q as u32) * n],
        }
    }

    fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0.0) && self.b.iter().all(|&x| x == 0.0)
    }
}

#[inline]
fn tuple_index(n: usize, idx: &[usize]) -> usize {
    let mut o = 0;
    for &i in idx {
        o = o * n + i;
    }
    o
}

/// ∇̂^k R̂ decomposed over slot patterns. `rank` counts the argument slots
/// (k + 3); bit i of a pattern key marks slot i as radial.
#[derive(Debug, Clone)]
pub struct ConeTensor {
    n: usize,
    rank: usize,
    patterns: BTreeMap<u32, PatternBlock>,
}

impl ConeTensor {
    /// Evaluates at radius τ on explicit cone tangents.
    pub fn value(&self, tau: f64, args: &[ConeTangent]) -> ConeTangent {
        assert_eq!(args.len(), self.rank);
        let n = self.n;
        let mut radial = 0.0;
        let mut base = DVector::zeros(n);
        for (&mask, block) in &self.patterns {
            let rho = mask.count_ones() as i32;
            // coefficient from the radial components of the radial slots
            let mut coeff = 1.0;
            for (i, arg) in args.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    coeff *= arg.a;
                }
            }
            if coeff == 0.0 {
                continue;
            }
            let base_args: Vec<&DVector<f64>> = args
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) == 0)
                .map(|(_, a)| &a.v)
                .collect();
            let c_val = contract_scalar(&block.c, n, &base_args);
            let b_val = contract_vector(&block.b, n, &base_args);
            radial += coeff * tau.powi(1 - rho) * c_val;
            base += b_val * (coeff * tau.powi(-rho));
        }
        ConeTangent { a: radial, v: base }
    }

    /// Dense snapshot at τ = 1 over ℝ^{1+n} coordinates (radial axis first),
    /// suitable for subspace-invariance work.
    pub fn flatten_at_unit_radius(&self) -> MultiTensor {
        let n = self.n;
        let nn = n + 1;
        let mut out = MultiTensor::zeros(nn, self.rank);
        let tuples = nn.pow(self.rank as u32);
        let mut idx = vec![0usize; self.rank];
        for t in 0..tuples {
            let mut rem = t;
            for s in (0..self.rank).rev() {
                idx[s] = rem % nn;
                rem /= nn;
            }
            let mut mask = 0u32;
            let mut base_idx = Vec::with_capacity(self.rank);
            for (s, &i) in idx.iter().enumerate() {
                if i == 0 {
                    mask |= 1 << s;
                } else {
                    base_idx.push(i - 1);
                }
            }
            if let Some(block) = self.patterns.get(&mask) {
                let o = tuple_index(n, &base_idx);
                let mut val = vec![0.0; nn];
                val[0] = block.c[o];
                val[1..].copy_from_slice(&block.b[o * n..(o + 1) * n]);
                out.set_value(&idx, &val);
            }
        }
        out
    }
}

fn contract_scalar(data: &[f64], n: usize, args: &[&DVector<f64>]) -> f64 {
    let mut current = data.to_vec();
    for arg in args {
        let block = current.len() / n;
        let mut next = vec![0.0; block];
        for i in 0..n {
            let c = arg[i];
            if c == 0.0 {
                continue;
            }
            for (t, src) in next.iter_mut().zip(&current[i * block..(i + 1) * block]) {
                *t += c * src;
            }
        }
        current = next;
    }
    current[0]
}

fn contract_vector(data: &[f64], n: usize, args: &[&DVector<f64>]) -> DVector<f64> {
    let mut current = data.to_vec();
    for arg in args {
        let block = current.len() / n;
        let mut next = vec![0.0; block];
        for i in 0..n {
            let c = arg[i];
            if c == 0.0 {
                continue;
            }
            for (t, src) in next.iter_mut().zip(&current[i * block..(i + 1) * block]) {
                *t += c * src;
            }
        }
        current = next;
    }
    DVector::from_vec(current)
}

/// The cached cone tensors ∇̂^k R̂ for k ≤ k_max over a homogeneous base,
/// together with their dense snapshots at τ = 1.
pub struct ConeTensorSet {
    n: usize,
    k_max: usize,
    tensors: Vec<ConeTensor>,
    flat: Vec<MultiTensor>,
    tol: Tolerance,
}

impl ConeTensorSet {
    pub fn new(base: &CurvatureOperatorSet, k_max: usize) -> Result<Self> {
        if k_max > base.k_max() {
            return Err(Error::Order {
                requested: k_max,
                max: base.k_max(),
            });
        }
        let n = base.p_dim();
        // R̂: only the all-base pattern is populated:
        // R̂(u,v)w = R(u,v)w − ⟨v,w⟩u + ⟨u,w⟩v
        let mut block = PatternBlock::zeros(n, 3);
        let r = base.tensor(0);
        let mut idx = [0usize; 3];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    idx[0] = i;
                    idx[1] = j;
                    idx[2] = k;
                    let o = tuple_index(n, &idx);
                    for out in 0..n {
                        let mut v = r.entry(&idx, out);
                        if j == k && out == i {
                            v -= 1.0;
                        }
                        if i == k && out == j {
                            v += 1.0;
                        }
                        block.b[o * n + out] = v;
                    }
                }
            }
        }
        let mut patterns = BTreeMap::new();
        if !block.is_zero() {
            patterns.insert(0u32, block);
        }
        let mut tensors = vec![ConeTensor {
            n,
            rank: 3,
            patterns,
        }];
        for _ in 0..k_max {
            let next = derive_cone_tensor(base, tensors.last().unwrap());
            tensors.push(next);
        }
        let flat = tensors.iter().map(|t| t.flatten_at_unit_radius()).collect();
        Ok(ConeTensorSet {
            n,
            k_max,
            tensors,
            flat,
            tol: base.space().tol,
        })
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn tensor(&self, k: usize) -> Result<&ConeTensor> {
        self.tensors.get(k).ok_or(Error::Order {
            requested: k,
            max: self.k_max,
        })
    }

    /// R̂ on explicit cone tangents at a cone point.
    pub fn curvature(
        &self,
        u: &ConeTangent,
        v: &ConeTangent,
        w: &ConeTangent,
        at: ConePoint,
    ) -> ConeTangent {
        self.tensors[0].value(at.tau, &[u.clone(), v.clone(), w.clone()])
    }

    /// (∇̂_x R̂)(u,v,w) on base vectors at a cone point.
    pub fn nabla_r(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
        v: &DVector<f64>,
        w: &DVector<f64>,
        at: ConePoint,
    ) -> Result<ConeTangent> {
        if self.k_max < 1 {
            return Err(Error::Order {
                requested: 1,
                max: self.k_max,
            });
        }
        Ok(self.tensors[1].value(
            at.tau,
            &[
                ConeTangent::base(x.clone()),
                ConeTangent::base(u.clone()),
                ConeTangent::base(v.clone()),
                ConeTangent::base(w.clone()),
            ],
        ))
    }

    /// Max |R̂| entry over the τ=1 frame (flat-cone detector).
    pub fn curvature_amax(&self) -> f64 {
        self.flat[0].amax()
    }

    /// Residual of a cone subspace (coordinates in ℝ^{1+n}, radial first)
    /// under ∇̂^k R̂ at (τ=1, o).
    pub fn invariance_residual(&self, v: &Subspace, k: usize) -> Result<(f64, Option<Witness>)> {
        if k > self.k_max {
            return Err(Error::Order {
                requested: k,
                max: self.k_max,
            });
        }
        let restricted = self.flat[k].restrict_inputs(v.basis());
        let proj = v.projector();
        let mut worst = 0.0f64;
        let mut witness = None;
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
        if worst < self.tol.eps_zero {
            witness = None;
        }
        Ok((worst, witness))
    }

    /// Cone Ricci tensor at τ = 1 (max |entry| of it is the Ricci-flatness
    /// residual used for the rescaled Einstein bases).
    pub fn ricci(&self) -> DMatrix<f64> {
        let nn = self.n + 1;
        let t = &self.flat[0];
        let mut ric = DMatrix::zeros(nn, nn);
        for a in 0..nn {
            for b in 0..nn {
                let mut sum = 0.0;
                for i in 0..nn {
                    sum += t.entry(&[a, i, i], b);
                }
                ric[(a, b)] = sum;
            }
        }
        ric
    }

    /// Totally geodesic test for a base subspace viewed inside the cone:
    /// V = ℝ∂r ⊕ v (or v alone when `include_radial` is false), tested for
    /// ∇̂^k R̂-invariance at (τ=1, o) for all k ≤ order.
    pub fn cone_tg_check(
        &self,
        v_base: &Subspace,
        include_radial: bool,
        order: usize,
    ) -> Result<ConeTGVerdict> {
        let n = self.n;
        let mut cols: Vec<DVector<f64>> = Vec::new();
        if include_radial {
            cols.push(crate::numkernel::axis(n + 1, 0));
        }
        for i in 0..v_base.dim() {
            let b = v_base.basis_vector(i);
            let mut c = DVector::zeros(n + 1);
            for j in 0..n {
                c[j + 1] = b[j];
            }
            cols.push(c);
        }
        let v = orthonormalize(&cols, &self.tol)?;
        self.subspace_tg_check(&v, order)
    }

    /// Totally geodesic test for an arbitrary subspace of the cone tangent
    /// space at (τ=1, o). A residual far above tolerance at a low order is
    /// already a definitive rejection, so higher orders are skipped then.
    pub fn subspace_tg_check(&self, v: &Subspace, order: usize) -> Result<ConeTGVerdict> {
        let order = order.min(self.k_max);
        let mut max_residual = 0.0f64;
        let mut witness = None;
        let mut checked = 0usize;
        for k in 0..=order {
            let (res, wit) = self.invariance_residual(v, k)?;
            if res > max_residual {
                max_residual = res;
                if let Some(w) = wit {
                    witness = Some(w);
                }
            }
            checked = k;
            if max_residual > 1e-3 {
                break;
            }
        }
        let is_tg = max_residual < self.tol.eps_zero && checked == order;
        Ok(ConeTGVerdict {
            is_tg,
            max_residual,
            order_checked: checked,
            witness: if is_tg { None } else { witness },
        })
    }
}

/// Verdict for a cone subspace.
#[derive(Debug, Clone, Serialize)]
pub struct ConeTGVerdict {
    pub is_tg: bool,
    pub max_residual: f64,
    pub order_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// One covariant-derivative step on the pattern decomposition. The new slot
/// is prepended; see the module docs for the rules.
fn derive_cone_tensor(base: &CurvatureOperatorSet, prev: &ConeTensor) -> ConeTensor {
    let n = prev.n;
    let m = prev.rank;
    let mut patterns: BTreeMap<u32, PatternBlock> = BTreeMap::new();

    // case B: new slot radial → (1 − m) times the source block
    for (&mask, block) in &prev.patterns {
        let factor = 1.0 - m as f64;
        let mut out = PatternBlock::zeros(n, block.q);
        for (o, v) in out.c.iter_mut().zip(&block.c) {
            *o = factor * v;
        }
        for (o, v) in out.b.iter_mut().zip(&block.b) {
            *o = factor * v;
        }
        if !out.is_zero() {
            patterns.insert((mask << 1) | 1, out);
        }
    }

    // case A: new slot base. Every source pattern σ, including absent
    // (zero) ones, can receive contributions from its neighbors σ∖i and
    // σ∪i, so the loop runs over all masks.
    for mask in 0u32..(1 << m) {
        let rho = mask.count_ones() as usize;
        let q = m - rho;
        let base_slots: Vec<usize> = (0..m).filter(|i| mask & (1 << i) == 0).collect();
        let radial_slots: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let out_mask = mask << 1;
        let mut out = PatternBlock::zeros(n, q + 1);
        let tuples = n.pow(q as u32);
        let mut touched = false;

        // terms 1 and 2: D-derivation of the σ-block itself, the metric
        // correction on the radial part, and the radial feed into the base part
        if let Some(block) = prev.patterns.get(&mask) {
            touched = true;
            let mut jdx = vec![0usize; q];
            for w in 0..n {
                let dw = base.d_operator_basis(w);
                for t in 0..tuples {
                    let mut rem = t;
                    for s in (0..q).rev() {
                        jdx[s] = rem % n;
                        rem /= n;
                    }
                    let out_o = w * tuples + t;
                    let mut c_acc = 0.0;
                    let mut b_acc = DVector::<f64>::zeros(n);
                    let bo = &block.b[t * n..(t + 1) * n];
                    for row in 0..n {
                        let mut s = 0.0;
                        for col in 0..n {
                            s += dw[(row, col)] * bo[col];
                        }
                        b_acc[row] += s;
                    }
                    let mut kdx = jdx.clone();
                    for s in 0..q {
                        let orig = jdx[s];
                        for mth in 0..n {
                            let wgt = dw[(mth, orig)];
                            if wgt == 0.0 {
                                continue;
                            }
                            kdx[s] = mth;
                            let o2 = tuple_index(n, &kdx);
                            c_acc -= wgt * block.c[o2];
                            for row in 0..n {
                                b_acc[row] -= wgt * block.b[o2 * n + row];
                            }
                        }
                        kdx[s] = orig;
                    }
                    c_acc -= block.b[t * n + w];
                    b_acc[w] += block.c[t];
                    out.c[out_o] += c_acc;
                    for row in 0..n {
                        out.b[out_o * n + row] += b_acc[row];
                    }
                }
            }
        }

        // term 3: −Σ_{i radial} (σ∖i)-block with x inserted at slot i
        for &i in &radial_slots {
            let sub_mask = mask & !(1 << i);
            if let Some(sub) = prev.patterns.get(&sub_mask) {
                touched = true;
                let pos = base_slots.iter().filter(|&&s| s < i).count();
                let mut jdx = vec![0usize; q];
                for w in 0..n {
                    for t in 0..tuples {
                        let mut rem = t;
                        for s in (0..q).rev() {
                            jdx[s] = rem % n;
                            rem /= n;
                        }
                        let mut full = Vec::with_capacity(q + 1);
                        full.extend_from_slice(&jdx[..pos]);
                        full.push(w);
                        full.extend_from_slice(&jdx[pos..]);
                        let o2 = tuple_index(n, &full);
                        let out_o = w * tuples + t;
                        out.c[out_o] -= sub.c[o2];
                        for row in 0..n {
                            out.b[out_o * n + row] -= sub.b[o2 * n + row];
                        }
                    }
                }
            }
        }

        // term 4: +Σ over base tuple positions s with J_s = w of the
        // (σ∪i)-block without that position
        for (s_pos, &i) in base_slots.iter().enumerate() {
            let sup_mask = mask | (1 << i);
            if let Some(sup) = prev.patterns.get(&sup_mask) {
                touched = true;
                let mut jdx = vec![0usize; q];
                for t in 0..tuples {
                    let mut rem = t;
                    for s in (0..q).rev() {
                        jdx[s] = rem % n;
                        rem /= n;
                    }
                    let w = jdx[s_pos]; // ⟨e_w, e_{J_s}⟩ = δ picks x = arg_s
                    let mut shorter = Vec::with_capacity(q - 1);
                    shorter.extend_from_slice(&jdx[..s_pos]);
                    shorter.extend_from_slice(&jdx[s_pos + 1..]);
                    let o2 = tuple_index(n, &shorter);
                    let out_o = w * tuples + t;
                    out.c[out_o] += sup.c[o2];
                    for row in 0..n {
                        out.b[out_o * n + row] += sup.b[o2 * n + row];
                    }
                }
            }
        }

        if touched && !out.is_zero() {
            let slot = patterns
                .entry(out_mask)
                .or_insert_with(|| PatternBlock::zeros(n, q + 1));
            for (dst, src) in slot.c.iter_mut().zip(&out.c) {
                *dst += src;
            }
            for (dst, src) in slot.b.iter_mut().zip(&out.b) {
                *dst += src;
            }
        }
    }

    patterns.retain(|_, b| !b.is_zero());
    ConeTensor {
        n,
        rank: m + 1,
        patterns,
    }
}

// --- geodesics ---------------------------------------------------------------

/// Closed-form cone geodesic with initial point (τ, p) and velocity
/// a∂r + v: the radius is ρ(t) = √((at+τ)² + |v|²τ²t²) and the base motion
/// is exp_p(f(t)·v) with f(t) = atan2(|v|τt, at+τ)/|v|.
#[derive(Debug, Clone, Serialize)]
pub struct ConeGeodesic {
    pub tau: f64,
    pub a: f64,
    /// base-metric speed |v|_g
    pub speed: f64,
}

impl ConeGeodesic {
    pub fn new(at: ConePoint, a: f64, v: &DVector<f64>) -> Result<Self> {
        let speed = v.norm();
        if a.abs() < 1e-300 && speed < 1e-300 {
            return Err(Error::ZeroVelocity);
        }
        Ok(ConeGeodesic {
            tau: at.tau,
            a,
            speed,
        })
    }

    pub fn rho(&self, t: f64) -> f64 {
        let lin = self.a * t + self.tau;
        (lin * lin + self.speed * self.speed * self.tau * self.tau * t * t).sqrt()
    }

    /// Reparametrization of the base geodesic: α(t) = exp_p(f(t)·v).
    pub fn f(&self, t: f64) -> f64 {
        if self.speed == 0.0 {
            return 0.0;
        }
        (self.speed * self.tau * t).atan2(self.a * t + self.tau) / self.speed
    }

    /// d/dt of ρ (used to witness the turning point of unit-speed geodesics).
    pub fn rho_prime(&self, t: f64) -> f64 {
        let lin = self.a * t + self.tau;
        let num = self.a * lin + self.speed * self.speed * self.tau * self.tau * t;
        num / self.rho(t)
    }

    /// Maximal interval of definition: all of ℝ unless the geodesic is purely
    /// radial, in which case it hits the apex.
    pub fn maximal_interval(&self) -> (f64, f64) {
        if self.speed > 0.0 {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else if self.a > 0.0 {
            (-self.tau / self.a, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, -self.tau / self.a)
        }
    }
}

// --- hypersurface obstruction scan --------------------------------------------

/// Parameters of the tilted-hyperplane scan.
#[derive(Debug, Clone)]
pub struct ScanParams {
    pub directions_per_radius: usize,
    pub radii: Vec<f64>,
    pub order: usize,
    pub seed: u64,
    /// residual below which higher orders are evaluated before reporting
    pub escalate_below: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            directions_per_radius: 2000,
            radii: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            order: 2,
            seed: 0x5ca0,
            escalate_below: 1e-3,
        }
    }
}

/// Scan outcome: the minimum over sampled normals η of the hyperplane
/// obstruction residual. A strictly positive minimum certifies, at scan
/// resolution, that no totally geodesic hyperplane avoids the radial field;
/// a vanishing minimum exhibits candidate families (the flat-cone case).
#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub min_residual: f64,
    pub argmin_eta: Vec<f64>,
    pub samples: usize,
    pub order: usize,
    pub families_found: bool,
    /// scans are falsification-grade evidence at the stated resolution, not
    /// a proof of non-existence
    pub exhaustive: bool,
}

/// For each sampled η ∈ T_pM the scan combines two residuals: the polarized
/// curvature obstruction ‖R̂(η,v)w + R̂(η,w)v‖ over frame pairs, and the
/// ∇̂^k R̂-invariance residual of the hyperplane (∂r + η)^⊥.
pub fn hypersurface_obstruction_scan(
    cone: &ConeTensorSet,
    extra_directions: &[DVector<f64>],
    params: &ScanParams,
) -> Result<ScanReport> {
    let n = cone.base_dim();
    let mut etas: Vec<DVector<f64>> = vec![DVector::zeros(n)];
    // structured directions: coordinate axes and pairwise sums, all radii
    let mut units: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        units.push(crate::numkernel::axis(n, i));
        for j in (i + 1)..n {
            units.push((crate::numkernel::axis(n, i) + crate::numkernel::axis(n, j)) / 2f64.sqrt());
        }
    }
    for d in extra_directions {
        let norm = d.norm();
        if norm > 1e-12 {
            units.push(d / norm);
        }
    }
    // seeded uniform directions
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let structured = units.len();
    while units.len() < structured + params.directions_per_radius {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let norm = v.norm();
        if norm > 1e-6 {
            units.push(v / norm);
        }
    }
    for &r in &params.radii {
        for u in &units {
            etas.push(u * r);
        }
    }

    let order = params.order.min(cone.k_max());
    let results: Vec<(f64, usize)> = {
        use rayon::prelude::*;
        etas.par_iter()
            .enumerate()
            .map(|(i, eta)| (eta_residual(cone, eta, order, params.escalate_below), i))
            .collect()
    };
    let (min_residual, argmin) = results
        .iter()
        .map(|&(r, i)| (r, i))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("scan sampled at least one normal");
    Ok(ScanReport {
        min_residual,
        argmin_eta: etas[argmin].iter().copied().collect(),
        samples: etas.len(),
        order,
        families_found: min_residual < 1e-8,
        exhaustive: false,
    })
}

fn eta_residual(
    cone: &ConeTensorSet,
    eta: &DVector<f64>,
    order: usize,
    escalate_below: f64,
) -> f64 {
    let n = cone.base_dim();
    let at = ConePoint { tau: 1.0 };
    // polarized curvature obstruction
    let mut res1 = 0.0f64;
    if eta.norm() > 0.0 {
        let eta_t = ConeTangent::base(eta.clone());
        for i in 0..n {
            let ei = ConeTangent::base(crate::numkernel::axis(n, i));
            for j in i..n {
                let ej = ConeTangent::base(crate::numkernel::axis(n, j));
                let mut val = cone.curvature(&eta_t, &ei, &ej, at);
                let sym = cone.curvature(&eta_t, &ej, &ei, at);
                val.a += sym.a;
                val.v += sym.v;
                res1 = res1.max(val.norm(at));
            }
        }
    }
    // hyperplane invariance: (∂r + η)^⊥ in the τ=1 coordinates
    let mut normal = DVector::zeros(n + 1);
    normal[0] = 1.0;
    for i in 0..n {
        normal[i + 1] = eta[i];
    }
    let tolerance = Tolerance::default();
    let hyper = orthonormalize(&[normal], &tolerance)
        .expect("normal is nonzero")
        .complement(&tolerance);
    let mut res2 = 0.0f64;
    for k in 0..=order.min(1) {
        if let Ok((r, _)) = cone.invariance_residual(&hyper, k) {
            res2 = res2.max(r);
        }
    }
    if res1.max(res2) < escalate_below {
        for k in 2..=order {
            if let Ok((r, _)) = cone.invariance_residual(&hyper, k) {
                res2 = res2.max(r);
            }
        }
    }
    res1.max(res2)
}

/// Whether the cone over a constant-curvature space admits totally geodesic
/// hypersurfaces that are not cones: exactly the flat case κ = 1, realized
/// by scanning the cone over a round 3-sphere of radius 1/√κ.
pub fn constant_curvature_cone_classification(kappa: f64, tol: Tolerance) -> Result<bool> {
    if kappa <= 0.0 {
        return Err(Error::UnsupportedBase(format!(
            "constant-curvature cone scan needs κ > 0, got {kappa}"
        )));
    }
    let bundle = crate::modelspaces::build_round_sphere(3, 1.0 / kappa.sqrt(), tol)?;
    let ops = CurvatureOperatorSet::new(bundle.space.clone(), 2);
    let cone = ConeTensorSet::new(&ops, 2)?;
    let params = ScanParams {
        directions_per_radius: 200,
        ..ScanParams::default()
    };
    let report = hypersurface_obstruction_scan(&cone, &[], &params)?;
    Ok(report.families_found)
}

// --- subspace dichotomy --------------------------------------------------------

/// Which branch of the cone-subspace alternative applies: either ∂r lies in
/// the subspace (and V = ℝ∂r ⊕ W for its base projection W), or it does not.
#[derive(Debug, Clone)]
pub struct ConeDichotomy {
    pub radial_tangent: bool,
    pub projected_base_subspace: Subspace,
    /// in the radial branch, whether V = ℝ∂r ⊕ W held as required
    pub splits_as_expected: Option<bool>,
}

pub fn cone_subspace_dichotomy(v: &Subspace, tol: &Tolerance) -> Result<ConeDichotomy> {
    let nn = v.ambient_dim();
    if nn < 2 {
        return Err(Error::Dimension(nn, 2));
    }
    let n = nn - 1;
    let radial = crate::numkernel::axis(nn, 0);
    let radial_tangent = v.contains_vector(&radial, tol);
    let mut base_cols: Vec<DVector<f64>> = Vec::new();
    for i in 0..v.dim() {
        let b = v.basis_vector(i);
        let mut c = DVector::zeros(n);
        for j in 0..n {
            c[j] = b[j + 1];
        }
        base_cols.push(c);
    }
    let projected = match orthonormalize(&base_cols, tol) {
        Ok(s) => s,
        Err(Error::EmptySpan) => Subspace::empty(n),
        Err(e) => return Err(e),
    };
    let splits = if radial_tangent {
        // V should equal ℝ∂r ⊕ W
        let mut cols = vec![radial.clone()];
        for i in 0..projected.dim() {
            let w = projected.basis_vector(i);
            let mut c = DVector::zeros(nn);
            for j in 0..n {
                c[j + 1] = w[j];
            }
            cols.push(c);
        }
        let rebuilt = orthonormalize(&cols, tol)?;
        Some(crate::numkernel::subspace_equal(&rebuilt, v, tol)?)
    } else {
        None
    };
    Ok(ConeDichotomy {
        radial_tangent,
        projected_base_subspace: projected,
        splits_as_expected: splits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelspaces::{build_berger_sphere, build_by_name, build_round_sphere};
    use crate::numkernel::axis;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn cone_over(name: &str, k: usize) -> (CurvatureOperatorSet, ConeTensorSet) {
        let bundle = build_by_name(name, tol()).unwrap();
        let ops = bundle.curvature(k);
        let cone = ConeTensorSet::new(&ops, k).unwrap();
        (ops, cone)
    }

    #[test]
    fn unit_sphere_cone_is_flat_to_all_cached_orders() {
        let bundle = build_round_sphere(3, 1.0, tol()).unwrap();
        let ops = CurvatureOperatorSet::new(bundle.space.clone(), 2);
        let cone = ConeTensorSet::new(&ops, 2).unwrap();
        assert!(cone.curvature_amax() < 1e-11, "flat cone has R̂ = 0");
        for k in 0..=2 {
            let full = Subspace::full(4);
            let (res, _) = cone.invariance_residual(&full, k).unwrap();
            assert!(res < 1e-11, "∇̂^{k} R̂ must vanish, got {res}");
        }
    }

    #[test]
    fn scaled_sphere_cone_curvature_is_constant_curvature_tensor() {
        // over S³(r): R̂(u,v)w = (κ − 1)(⟨v,w⟩u − ⟨u,w⟩v) with κ = 1/r²
        let r = 2.0f64;
        let bundle = build_round_sphere(3, r, tol()).unwrap();
        let ops = CurvatureOperatorSet::new(bundle.space.clone(), 0);
        let cone = ConeTensorSet::new(&ops, 0).unwrap();
        let at = ConePoint { tau: 1.0 };
        let kappa = 1.0 / (r * r);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let val = cone.curvature(
                        &ConeTangent::base(axis(3, i)),
                        &ConeTangent::base(axis(3, j)),
                        &ConeTangent::base(axis(3, k)),
                        at,
                    );
                    let mut want = DVector::zeros(3);
                    if j == k {
                        want[i] += kappa - 1.0;
                    }
                    if i == k {
                        want[j] -= kappa - 1.0;
                    }
                    assert!((val.v - want).amax() < 1e-12);
                    assert!(val.a.abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn radial_slots_of_curvature_annihilate() {
        let (_, cone) = cone_over("cp3", 1);
        let at = ConePoint { tau: 1.3 };
        let u = ConeTangent::base(axis(6, 0));
        let radial = ConeTangent::radial(6);
        let v = cone.curvature(&radial, &u, &u, at);
        assert!(v.norm(at) < 1e-13, "R̂(∂r, u)u = 0");
        let w = cone.curvature(&u, &radial, &u, at);
        assert!(w.norm(at) < 1e-13);
    }

    #[test]
    fn nabla_r_matches_direct_formula() {
        // (∇̂_x R̂)(u,v,w) = (∇_x R)(u,v,w) − ⟨x, R̂(u,v)w⟩ τ ∂r on base slots
        let (ops, cone) = cone_over("flag", 1);
        let at = ConePoint { tau: 1.7 };
        let vecs = [
            crate::numkernel::dvec(&[0.3, -0.2, 1.0, 0.0, 0.5, -0.7]),
            crate::numkernel::dvec(&[1.0, 0.4, 0.0, -0.3, 0.2, 0.0]),
            crate::numkernel::dvec(&[0.0, 1.0, -0.5, 0.8, 0.0, 0.3]),
            crate::numkernel::dvec(&[-0.6, 0.0, 0.2, 1.0, -0.4, 0.5]),
        ];
        let [x, u, v, w] = &vecs;
        let got = cone.nabla_r(x, u, v, w, at).unwrap();
        let nabla_base = ops.nabla_k_r(1, &[x, u, v, w]).unwrap();
        let r_hat = cone.curvature(
            &ConeTangent::base(u.clone()),
            &ConeTangent::base(v.clone()),
            &ConeTangent::base(w.clone()),
            at,
        );
        let radial_expected = -x.dot(&r_hat.v) * at.tau;
        assert_abs_diff_eq!(got.a, radial_expected, epsilon = 1e-11);
        assert!((got.v - nabla_base).amax() < 1e-11);
    }

    #[test]
    fn berger_cone_radial_witness() {
        // base with τ = r²: (∇̂_X R̂)(X,Y,Y) = (4 − 4/r²)·t·∂r at radius t
        let r = 2.0;
        let bundle = build_berger_sphere(r, r * r, tol()).unwrap();
        let ops = CurvatureOperatorSet::new(bundle.space.clone(), 1);
        let cone = ConeTensorSet::new(&ops, 1).unwrap();
        let x = axis(3, 1);
        let y = axis(3, 2);
        for t in [0.5, 1.0, 2.5] {
            let at = ConePoint { tau: t };
            let val = cone.nabla_r(&x, &x, &y, &y, at).unwrap();
            assert_abs_diff_eq!(val.a, (4.0 - 4.0 / (r * r)) * t, epsilon = 1e-10);
            assert!(val.v.amax() < 1e-10, "no tangential part");
        }
    }

    #[test]
    fn radial_derivative_is_scaling() {
        // ∇̂_{∂r} ∇̂^{k−1} R̂ = (1 − rank) τ^{-1} ∇̂^{k−1} R̂ in the lifted frame
        let (_, cone) = cone_over("s3s3", 2);
        let t1 = cone.tensor(1).unwrap().flatten_at_unit_radius();
        let t2 = cone.tensor(2).unwrap().flatten_at_unit_radius();
        let nn = 7;
        let mut idx = vec![0usize; 4];
        let tuples = nn_pow(nn, 4);
        let mut worst = 0.0f64;
        for t in 0..tuples {
            let mut rem = t;
            for s in (0..4).rev() {
                idx[s] = rem % nn;
                rem /= nn;
            }
            let mut full = vec![0usize; 5];
            full[0] = 0; // radial first slot
            full[1..].copy_from_slice(&idx);
            let lhs = t2.value(&full);
            let rhs = t1.value(&idx) * (1.0 - 4.0);
            worst = worst.max((lhs - rhs).amax());
        }
        assert!(worst < 1e-10, "radial scaling residual {worst}");
    }

    fn nn_pow(n: usize, k: usize) -> usize {
        n.pow(k as u32)
    }

    #[test]
    fn cone_second_bianchi() {
        // cyclic sum of ∇̂R̂ over the first three slots vanishes, including
        // radial arguments
        let (_, cone) = cone_over("cp3", 1);
        let t1 = cone.tensor(1).unwrap().flatten_at_unit_radius();
        let nn = 7;
        let mut worst = 0.0f64;
        for a in 0..nn {
            for b in 0..nn {
                for c in 0..nn {
                    for d in 0..nn {
                        let cyc = t1.value(&[a, b, c, d])
                            + t1.value(&[b, c, a, d])
                            + t1.value(&[c, a, b, d]);
                        worst = worst.max(cyc.amax());
                    }
                }
            }
        }
        assert!(worst < 1e-10, "cone second Bianchi residual {worst}");
    }

    #[test]
    fn cone_ricci_identity_for_second_derivative() {
        // ∇̂²R̂(x,y,·) − ∇̂²R̂(y,x,·) = R̂(x,y)·R̂ acting as a derivation
        let (_, cone) = cone_over("flag", 2);
        let t0 = cone.tensor(0).unwrap().flatten_at_unit_radius();
        let t2 = cone.tensor(2).unwrap().flatten_at_unit_radius();
        let nn = 7;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst = 0.0f64;
        for _ in 0..40 {
            let pick = |rng: &mut ChaCha8Rng| rng.gen_range(0..nn);
            let (x, y, u, v, w) = (
                pick(&mut rng),
                pick(&mut rng),
                pick(&mut rng),
                pick(&mut rng),
                pick(&mut rng),
            );
            let lhs = t2.value(&[x, y, u, v, w]) - t2.value(&[y, x, u, v, w]);
            // R̂(x,y) as an operator on the cone tangent space
            let rxy = DMatrix::from_fn(nn, nn, |r, c| t0.value(&[x, y, c])[r]);
            let mut rhs = &rxy * t0.value(&[u, v, w]);
            for (slot, &arg) in [u, v, w].iter().enumerate() {
                // subtract T(..., R̂(x,y) e_arg, ...)
                for m in 0..nn {
                    let wgt = rxy[(m, arg)];
                    if wgt == 0.0 {
                        continue;
                    }
                    let mut args = [u, v, w];
                    args[slot] = m;
                    rhs -= t0.value(&args) * wgt;
                }
            }
            worst = worst.max((lhs - rhs).amax());
        }
        assert!(worst < 1e-9, "cone Ricci identity residual {worst}");
    }

    #[test]
    fn lagrangian_cone_is_totally_geodesic() {
        let (_, cone) = cone_over("cp3", 2);
        let rp3 = Subspace::coordinate(6, &[0, 2, 4]);
        let verdict = cone.cone_tg_check(&rp3, true, 2).unwrap();
        assert!(verdict.is_tg, "residual {}", verdict.max_residual);
    }

    #[test]
    fn link_tangent_fails_in_curved_cone() {
        let (_, cone) = cone_over("cp3", 2);
        let full = Subspace::full(6);
        let verdict = cone.cone_tg_check(&full, false, 2).unwrap();
        assert!(!verdict.is_tg);
        assert!(verdict.max_residual > 1e-3);
    }

    #[test]
    fn non_tg_base_fails_with_radial() {
        let (_, cone) = cone_over("cp3", 2);
        let bad = Subspace::coordinate(6, &[0, 1, 2]);
        let verdict = cone.cone_tg_check(&bad, true, 2).unwrap();
        assert!(!verdict.is_tg);
        assert!(verdict.max_residual > 0.1);
    }

    #[test]
    fn geodesic_closed_forms() {
        // a=0, |v|=1, τ=1: ρ = √(1+t²), f = arctan t
        let g = ConeGeodesic::new(ConePoint { tau: 1.0 }, 0.0, &axis(3, 0)).unwrap();
        for t in [-2.0, -0.5, 0.0, 1.0, 3.0] {
            assert_abs_diff_eq!(g.rho(t), (1.0 + t * t).sqrt(), epsilon = 1e-14);
            assert_abs_diff_eq!(g.f(t), t.atan(), epsilon = 1e-14);
        }
        assert_eq!(g.maximal_interval(), (f64::NEG_INFINITY, f64::INFINITY));
        // a=1, v=0, τ=1: ρ = 1 + t on (−1, ∞)
        let radial = ConeGeodesic::new(ConePoint { tau: 1.0 }, 1.0, &DVector::zeros(3)).unwrap();
        assert_abs_diff_eq!(radial.rho(0.5), 1.5, epsilon = 1e-14);
        let (lo, hi) = radial.maximal_interval();
        assert_abs_diff_eq!(lo, -1.0, epsilon = 1e-14);
        assert!(hi.is_infinite());
        // unit-speed turning point at t₀ = −aτ
        let tau = 1.4f64;
        let a = 0.6f64;
        let vnorm = ((1.0 - a * a) / (tau * tau)).sqrt();
        let v = axis(3, 1) * vnorm;
        let gen = ConeGeodesic::new(ConePoint { tau }, a, &v).unwrap();
        assert_abs_diff_eq!(gen.rho_prime(-a * tau), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn zero_velocity_is_rejected() {
        assert!(matches!(
            ConeGeodesic::new(ConePoint { tau: 1.0 }, 0.0, &DVector::zeros(3)),
            Err(Error::ZeroVelocity)
        ));
    }

    #[test]
    fn dichotomy_branches() {
        let t = tol();
        // V = ℝ∂r ⊕ span{e1}: radial branch
        let v = Subspace::coordinate(7, &[0, 1]);
        let d = cone_subspace_dichotomy(&v, &t).unwrap();
        assert!(d.radial_tangent);
        assert_eq!(d.splits_as_expected, Some(true));
        assert_eq!(d.projected_base_subspace.dim(), 1);
        // V = span{∂r + e1}: skew branch
        let skew = orthonormalize(
            &[crate::numkernel::dvec(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0])],
            &t,
        )
        .unwrap();
        let d = cone_subspace_dichotomy(&skew, &t).unwrap();
        assert!(!d.radial_tangent);
        assert_eq!(d.projected_base_subspace.dim(), 1);
        // V = the full link tangent: skew branch with full projection
        let link = Subspace::coordinate(7, &[1, 2, 3, 4, 5, 6]);
        let d = cone_subspace_dichotomy(&link, &t).unwrap();
        assert!(!d.radial_tangent);
        assert_eq!(d.projected_base_subspace.dim(), 6);
    }

    #[test]
    fn einstein_rescaled_cones_are_ricci_flat() {
        for (name, factor) in [("cp3", 0.5), ("flag", 0.5), ("s3s3", 1.0 / 3.0)] {
            let bundle = build_by_name(name, tol()).unwrap();
            let rescaled = crate::modelspaces::rescale_space_metric(&bundle.space, factor).unwrap();
            let ops = CurvatureOperatorSet::new(std::sync::Arc::new(rescaled), 0);
            let cone = ConeTensorSet::new(&ops, 0).unwrap();
            let ric = cone.ricci();
            assert!(
                ric.amax() < 1e-9,
                "{name}: rescaled cone Ricci residual {}",
                ric.amax()
            );
        }
    }

    #[test]
    fn constant_curvature_classification() {
        assert!(constant_curvature_cone_classification(1.0, tol()).unwrap());
        assert!(!constant_curvature_cone_classification(0.25, tol()).unwrap());
        assert!(!constant_curvature_cone_classification(4.0, tol()).unwrap());
        assert!(matches!(
            constant_curvature_cone_classification(-1.0, tol()),
            Err(Error::UnsupportedBase(_))
        ));
    }

    #[test]
    fn berger_scans() {
        let quick = ScanParams {
            directions_per_radius: 150,
            ..ScanParams::default()
        };
        // deformed Berger bases admit no totally geodesic hypersurfaces
        for (r, tau) in [
            (2.0, 0.5),
            (2f64.sqrt(), 0.25),
            (2.0, 1.0 / 3.0),
            (2.0, 4.0),
        ] {
            let bundle = build_berger_sphere(r, tau, tol()).unwrap();
            let ops = CurvatureOperatorSet::new(bundle.space.clone(), 2);
            let cone = ConeTensorSet::new(&ops, 2).unwrap();
            let report = hypersurface_obstruction_scan(&cone, &[], &quick).unwrap();
            assert!(
                report.min_residual > 1e-6,
                "berger({r},{tau}): min residual {}",
                report.min_residual
            );
            assert!(!report.families_found);
        }
        // the unit round sphere is the flat-cone exception
        let bundle = build_berger_sphere(1.0, 1.0, tol()).unwrap();
        let ops = CurvatureOperatorSet::new(bundle.space.clone(), 2);
        let cone = ConeTensorSet::new(&ops, 2).unwrap();
        let report = hypersurface_obstruction_scan(&cone, &[], &quick).unwrap();
        assert!(report.families_found, "min {}", report.min_residual);
    }
}
