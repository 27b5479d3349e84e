//! 3-symmetric structure on a reductive space: the order-3 isometry θ of the
//! tangent space, the almost complex structure J = (2/√3)θ + (1/√3)Id it
//! induces, the nearly Kähler defect, and Kähler-angle classification of
//! tangent subspaces.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::homgeo::CurvatureOperatorSet;
use crate::liealg::ReductiveSpace;
use crate::numkernel::{subspace_contains, sym_eig, Subspace};

/// Order-3 automorphism θ on p together with the induced almost complex
/// structure J.
#[derive(Debug, Clone)]
pub struct NKStructure {
    theta: DMatrix<f64>,
    j: DMatrix<f64>,
}

/// How a subspace sits relative to J.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JType {
    Holomorphic,
    Lagrangian,
    TotallyReal,
    Mixed,
}

impl std::fmt::Display for JType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            JType::Holomorphic => "holomorphic",
            JType::Lagrangian => "lagrangian",
            JType::TotallyReal => "totally_real",
            JType::Mixed => "mixed",
        };
        write!(f, "{s}")
    }
}

/// Kähler-angle report for a subspace.
#[derive(Debug, Clone, Serialize)]
pub struct KahlerAngle {
    pub constant: bool,
    /// the angle in [0, π/2] when constant
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    /// principal angles (diagnostics, always present)
    pub principal_angles: Vec<f64>,
}

impl NKStructure {
    /// Validates θ (orthogonal, θ³ = Id, no fixed directions) and builds J.
    pub fn build(space: &ReductiveSpace, theta: DMatrix<f64>) -> Result<NKStructure> {
        let np = space.p_dim();
        let eps = space.tol.eps_zero;
        if theta.nrows() != np || theta.ncols() != np {
            return Err(Error::Dimension(theta.nrows(), np));
        }
        let id = DMatrix::<f64>::identity(np, np);
        let ortho = (theta.transpose() * &theta - &id).amax();
        if ortho >= eps {
            return Err(Error::NotThreeSymmetric(format!(
                "θ is not orthogonal (residual {ortho:.3e})"
            )));
        }
        let cube = (&theta * &theta * &theta - &id).amax();
        if cube >= eps {
            return Err(Error::NotThreeSymmetric(format!(
                "θ³ ≠ Id (residual {cube:.3e})"
            )));
        }
        // no fixed directions: an order-3 orthogonal map without eigenvalue 1
        // satisfies ‖(θ − I)v‖ ≥ √3 |v|, so the smallest singular value of
        // θ − I separates cleanly from zero
        let diff = &theta - &id;
        let min_sv = diff
            .svd(false, false)
            .singular_values
            .iter()
            .fold(f64::MAX, |m, &s| m.min(s));
        if min_sv < 0.5 {
            return Err(Error::NotThreeSymmetric(format!(
                "θ has (near-)fixed directions in p (min singular value of θ−I is {min_sv:.3e})"
            )));
        }
        let j = &theta * (2.0 / 3f64.sqrt()) + &id * (1.0 / 3f64.sqrt());
        let j_sq = (&j * &j + &id).amax();
        if j_sq >= eps {
            return Err(Error::NotThreeSymmetric(format!(
                "J² + Id ≠ 0 (residual {j_sq:.3e})"
            )));
        }
        // J must commute with the isotropy action on p
        for a in 0..space.k_dim() {
            let ad = space.ad_k_generator(a);
            let comm = (&j * ad - ad * &j).amax();
            if comm >= eps {
                return Err(Error::NotThreeSymmetric(format!(
                    "J does not commute with the isotropy generator {a} (residual {comm:.3e})"
                )));
            }
        }
        Ok(NKStructure { theta, j })
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn j(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn apply_j(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.j * v
    }

    /// (∇_X J)Y = D_X(JY) − J(D_X Y), the covariant derivative of the
    /// invariant tensor J at the base point.
    pub fn nabla_j(
        &self,
        ops: &CurvatureOperatorSet,
        x: &DVector<f64>,
        y: &DVector<f64>,
    ) -> DVector<f64> {
        ops.difference_tensor(x, &(&self.j * y)) - &self.j * ops.difference_tensor(x, y)
    }

    /// Nearly Kähler defect: max over frame directions of ‖(∇_X J)X‖, and the
    /// strictness witness max ‖(∇_X J)Y‖ over frame pairs.
    pub fn nearly_kahler_residual(&self, ops: &CurvatureOperatorSet) -> (f64, f64) {
        let np = ops.p_dim();
        let mut defect = 0.0f64;
        let mut strict = 0.0f64;
        for i in 0..np {
            let ei = crate::numkernel::axis(np, i);
            defect = defect.max(self.nabla_j(ops, &ei, &ei).norm());
            for jx in 0..np {
                let ej = crate::numkernel::axis(np, jx);
                strict = strict.max(self.nabla_j(ops, &ei, &ej).norm());
            }
        }
        // per the defining identity, the diagonal defect must also vanish on
        // off-axis directions; sample frame sums
        for i in 0..np {
            for jx in (i + 1)..np {
                let v =
                    (crate::numkernel::axis(np, i) + crate::numkernel::axis(np, jx)) / 2f64.sqrt();
                defect = defect.max(self.nabla_j(ops, &v, &v).norm());
            }
        }
        (defect, strict)
    }

    /// Kähler angle of a subspace: the compressed operator M = Bᵀ J B has
    /// MᵀM = cos²(φ)·Id exactly when the angle is constant.
    pub fn kahler_angle(&self, v: &Subspace, tol: &crate::tol::Tolerance) -> Result<KahlerAngle> {
        if v.dim() == 0 {
            return Ok(KahlerAngle {
                constant: true,
                angle: Some(0.0),
                principal_angles: vec![],
            });
        }
        let m = v.basis().transpose() * &self.j * v.basis();
        let s = m.transpose() * &m;
        let clusters = sym_eig(&s, tol)?;
        let principal: Vec<f64> = clusters
            .iter()
            .flat_map(|c| {
                std::iter::repeat_n(
                    c.eigenvalue.clamp(0.0, 1.0).sqrt().acos(),
                    c.eigenspace.dim(),
                )
            })
            .collect();
        if clusters.len() == 1 {
            Ok(KahlerAngle {
                constant: true,
                angle: Some(principal[0]),
                principal_angles: principal,
            })
        } else {
            Ok(KahlerAngle {
                constant: false,
                angle: None,
                principal_angles: principal,
            })
        }
    }

    /// Classifies a subspace as holomorphic (Jv = v), Lagrangian (Jv ⊥ v of
    /// half dimension), totally real (Jv ⊥ v), or mixed.
    pub fn classify_j_type(&self, v: &Subspace, tol: &crate::tol::Tolerance) -> Result<JType> {
        let jv = v.map(&self.j, tol)?;
        if crate::numkernel::subspace_equal(&jv, v, tol)? {
            return Ok(JType::Holomorphic);
        }
        let pairing = (v.basis().transpose() * &self.j * v.basis()).amax();
        if pairing < tol.eps_zero {
            if 2 * v.dim() == v.ambient_dim() {
                return Ok(JType::Lagrangian);
            }
            return Ok(JType::TotallyReal);
        }
        Ok(JType::Mixed)
    }

    /// Antisymmetry residual of ⟨(∇_X J)Y, Z⟩ over frame triples; full
    /// antisymmetry is the tensorial form of the nearly Kähler identity.
    pub fn nabla_j_antisymmetry_residual(&self, ops: &CurvatureOperatorSet) -> f64 {
        let np = ops.p_dim();
        let mut vals = vec![0.0; np * np * np];
        for x in 0..np {
            let ex = crate::numkernel::axis(np, x);
            for y in 0..np {
                let ey = crate::numkernel::axis(np, y);
                let nj = self.nabla_j(ops, &ex, &ey);
                for z in 0..np {
                    vals[(x * np + y) * np + z] = nj[z];
                }
            }
        }
        let get = |x: usize, y: usize, z: usize| vals[(x * np + y) * np + z];
        let mut worst = 0.0f64;
        for x in 0..np {
            for y in 0..np {
                for z in 0..np {
                    worst = worst.max((get(x, y, z) + get(y, x, z)).abs());
                    worst = worst.max((get(x, y, z) + get(x, z, y)).abs());
                }
            }
        }
        worst
    }

    /// Image of a subspace under J.
    pub fn j_image(&self, v: &Subspace, tol: &crate::tol::Tolerance) -> Result<Subspace> {
        v.map(&self.j, tol)
    }

    /// Whether J maps `a` into `b`.
    pub fn j_maps_into(
        &self,
        a: &Subspace,
        b: &Subspace,
        tol: &crate::tol::Tolerance,
    ) -> Result<bool> {
        let ja = self.j_image(a, tol)?;
        subspace_contains(b, &ja, tol)
    }
}
