//! The built-in homogeneous spaces with their tangent-space catalogs.
//!
//! The three nearly Kähler 6-manifolds are constructed from explicit matrix
//! models (sp(2) through the complex embedding of quaternions, su(3) as
//! complex 3×3 matrices, su(2)³ componentwise) with the same orthonormal
//! frames e₁…e₆ used throughout the analysis, normal homogeneous metrics
//! −2Re tr, −tr and −tr ⊕ −tr ⊕ −tr, and the vertical/horizontal splits of
//! their homogeneous fibrations. Round spheres SO(n+1)/SO(n) and the
//! one-parameter family of Berger spheres U(2)/U(1) join them for the cone
//! analysis. Each bundle also carries the candidate tangent subspaces of the
//! known totally geodesic submanifolds, the isotropy data used to
//! canonicalize subspaces, and the defining representation needed to
//! exponentiate torus directions.

pub mod rep;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::homgeo::CurvatureOperatorSet;
use crate::liealg::{FibrationSplit, LieAlgebraData, ReductiveSpace};
use crate::nkstruct::{JType, NKStructure};
use crate::numkernel::{mat_exp_generic, orthonormalize, sym_eig, Subspace};
use crate::tol::Tolerance;

use rep::{celem, czero, im, quat_embed, re, CMat};

/// Intrinsic geometry class of a candidate submanifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometryClass {
    Round { radius: f64 },
    Berger { r: f64, tau: f64 },
    Flat,
}

/// Berger sphere parameters recovered from curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BergerParams {
    pub r: f64,
    pub tau: f64,
}

/// A flat torus subspace together with the lattice that closes its orbit, in
/// coordinates against an orthonormal basis of the subspace.
#[derive(Debug, Clone)]
pub struct LatticeSpec {
    pub basis_x: DVector<f64>,
    pub basis_y: DVector<f64>,
    pub generators: [(f64, f64); 2],
}

/// Expected classification data for a catalog candidate.
#[derive(Debug, Clone)]
pub struct Expectation {
    pub dim: usize,
    pub j_type: JType,
    pub well_positioned: bool,
    pub d_invariant: bool,
    pub geometry: GeometryClass,
    pub maximal: bool,
    pub lattice: Option<LatticeSpec>,
    pub note: &'static str,
}

/// A named candidate tangent subspace.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub label: String,
    pub subspace: Subspace,
    pub expect: Expectation,
}

/// Membership test for the isotropy subgroup in the defining representation.
#[derive(Debug, Clone, Copy)]
pub enum IsotropyMembership {
    /// isotropy = diagonal subgroup: off-diagonal entries must vanish
    Diagonal,
    /// isotropy = diagonal embedding in a product: blocks must coincide
    EqualBlocks { block: usize, count: usize },
    /// no membership test available
    None,
}

/// The defining matrix representation of the algebra basis.
#[derive(Debug, Clone)]
pub struct Representation {
    pub p_matrices: Vec<CMat>,
    pub k_matrices: Vec<CMat>,
    pub form_scale: f64,
    pub membership: IsotropyMembership,
}

/// A built space with everything the classification driver needs.
pub struct ModelSpaceBundle {
    pub name: String,
    pub space: Arc<ReductiveSpace>,
    pub nk: Option<NKStructure>,
    pub candidates: Vec<Candidate>,
    /// finite isometries of the tangent space fixing o and preserving the
    /// fibration split (outer symmetries, module permutations)
    pub finite_symmetries: Vec<DMatrix<f64>>,
    pub rep: Representation,
    /// proportionality constant of the Killing form against the trace form
    pub killing_trace_constant: Option<f64>,
}

impl ModelSpaceBundle {
    pub fn curvature(&self, k_max: usize) -> CurvatureOperatorSet {
        CurvatureOperatorSet::new(self.space.clone(), k_max)
    }

    /// Deterministic list of orthogonal isotropy operators on p: one-parameter
    /// subgroups e^{t·ad_W} for seeded W ∈ k plus the finite symmetries.
    pub fn isotropy_sample(&self, count: usize, seed: u64) -> Vec<DMatrix<f64>> {
        let nk = self.space.k_dim();
        let mut ops: Vec<DMatrix<f64>> = Vec::new();
        for a in 0..nk {
            for t in [0.35, 1.1] {
                ops.push(crate::numkernel::mat_exp(
                    &(self.space.ad_k_generator(a) * t),
                ));
            }
        }
        ops.extend(self.finite_symmetries.iter().cloned());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while ops.len() < count {
            let mut w = DVector::zeros(nk);
            for c in 0..nk {
                w[c] = rng.gen_range(-1.0..1.0);
            }
            let t = rng.gen_range(0.1..std::f64::consts::PI);
            ops.push(crate::numkernel::mat_exp(&(self.space.ad_k_on_p(&w) * t)));
        }
        ops.truncate(count.max(2 * nk + self.finite_symmetries.len()));
        ops
    }

    pub fn candidate(&self, label: &str) -> Option<&Candidate> {
        self.candidates.iter().find(|c| c.label == label)
    }

    /// Verifies that exponentials of the lattice generators land in the
    /// isotropy subgroup; the torus basis pair must commute.
    pub fn verify_torus_lattice(&self, lattice: &LatticeSpec) -> Result<(bool, f64)> {
        let space = &self.space;
        let bp = space.bracket_p_p(&lattice.basis_x, &lattice.basis_y);
        let bk = space.bracket_p_k(&lattice.basis_x, &lattice.basis_y);
        let comm = bp.amax().max(bk.amax());
        if comm >= space.tol.eps_zero {
            return Err(Error::NotAbelian(comm));
        }
        let x_mat = self.p_matrix_of(&lattice.basis_x);
        let y_mat = self.p_matrix_of(&lattice.basis_y);
        let mut worst = 0.0f64;
        for &(u, v) in &lattice.generators {
            let g = mat_exp_generic(&(x_mat.clone() * re(u)))
                * mat_exp_generic(&(y_mat.clone() * re(v)));
            let residual = match self.rep.membership {
                IsotropyMembership::Diagonal => rep::offdiagonal_amax(&g),
                IsotropyMembership::EqualBlocks { block, count } => {
                    rep::block_equality_residual(&g, block, count)
                }
                IsotropyMembership::None => {
                    return Err(Error::UnsupportedBase(format!(
                        "{} has no isotropy membership test",
                        self.name
                    )))
                }
            };
            worst = worst.max(residual);
        }
        Ok((worst < 1e-7, worst))
    }

    /// The representation matrix of a tangent vector in p-frame coordinates.
    pub fn p_matrix_of(&self, v: &DVector<f64>) -> CMat {
        let mut m = czero(self.rep.p_matrices[0].nrows());
        for (i, mat) in self.rep.p_matrices.iter().enumerate() {
            if v[i] != 0.0 {
                m += mat * re(v[i]);
            }
        }
        m
    }

    /// Greedy canonicalization of a subspace under sampled isotropy
    /// operators, minimizing the lexicographic projector score. This is a
    /// deduplication heuristic: verdicts never depend on it.
    pub fn isotropy_orbit_normalize(&self, v: &Subspace, budget: usize, seed: u64) -> Subspace {
        let tol = &self.space.tol;
        let nk = self.space.k_dim();
        // the move set is a pure function of the seed, so a converged
        // subspace is a fixed point of the whole procedure
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut generators: Vec<DMatrix<f64>> = (0..nk)
            .map(|a| self.space.ad_k_generator(a).clone())
            .collect();
        for _ in 0..6 {
            let mut w = DVector::zeros(nk);
            for c in 0..nk {
                w[c] = rng.gen_range(-1.0..1.0);
            }
            generators.push(self.space.ad_k_on_p(&w));
        }
        let base_steps = [0.07, 0.21, 0.55, 1.3, 2.6];
        let mut best = v.clone();
        let mut best_score = projector_score(&best);
        let mut scale = 1.0f64;
        let mut spent = 0usize;
        'outer: while scale > 1e-9 {
            let mut improved = false;
            let try_op = |op: &DMatrix<f64>,
                          best: &mut Subspace,
                          best_score: &mut Vec<f64>,
                          improved: &mut bool| {
                if let Ok(cand) = best.map(op, tol) {
                    let score = projector_score(&cand);
                    if lex_less(&score, best_score) {
                        *best = cand;
                        *best_score = score;
                        *improved = true;
                    }
                }
            };
            for op in &self.finite_symmetries {
                spent += 1;
                if spent > budget {
                    break 'outer;
                }
                try_op(op, &mut best, &mut best_score, &mut improved);
            }
            for gen in &generators {
                for &t in &base_steps {
                    for sign in [1.0, -1.0] {
                        spent += 1;
                        if spent > budget {
                            break 'outer;
                        }
                        let op = crate::numkernel::mat_exp(&(gen * (sign * t * scale)));
                        try_op(&op, &mut best, &mut best_score, &mut improved);
                    }
                }
            }
            if !improved {
                scale *= 0.2;
            }
        }
        best
    }
}

/// Lexicographic score of a subspace: negated projector diagonal first (mass
/// as early as possible on the frame axes), then absolute off-diagonal
/// entries (as coordinate-aligned as possible). The off-diagonal part decays
/// linearly near an aligned optimum, which lets the greedy descent converge
/// to the sharp form instead of stalling on a quadratic plateau.
fn projector_score(v: &Subspace) -> Vec<f64> {
    let p = v.projector();
    let n = p.nrows();
    let mut score = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        score.push(-p[(i, i)]);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            score.push(p[(i, j)].abs());
        }
    }
    score
}

/// a < b lexicographically, with a dead band so descent terminates.
fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if (x - y).abs() > 1e-9 {
            return x < y;
        }
    }
    false
}

fn unit(v: &[f64]) -> DVector<f64> {
    let v = DVector::from_column_slice(v);
    let n = v.norm();
    v / n
}

fn span(tol: &Tolerance, vectors: &[Vec<f64>]) -> Subspace {
    let cols: Vec<DVector<f64>> = vectors
        .iter()
        .map(|v| DVector::from_column_slice(v))
        .collect();
    orthonormalize(&cols, tol).expect("catalog subspace")
}

/// Builds the space shared by all constructors: structure constants from the
/// matrix model, the reductive split (p-frame first), optional fibration.
fn assemble_space(
    name: &str,
    p_mats: Vec<CMat>,
    k_mats: Vec<CMat>,
    form_scale: f64,
    fibration: Option<(Vec<usize>, Vec<usize>)>,
    tol: Tolerance,
) -> Result<(Arc<ReductiveSpace>, Vec<CMat>)> {
    let np = p_mats.len();
    let nk = k_mats.len();
    let n = np + nk;
    let mut all = p_mats.clone();
    all.extend(k_mats.iter().cloned());
    let structure = rep::structure_constants(&all, form_scale)?;
    let (gram, _) = rep::gram_cholesky(&all, form_scale)?;
    let algebra = LieAlgebraData::new(n, structure, gram, name, &tol)?;
    let mut p_basis = DMatrix::zeros(n, np);
    for c in 0..np {
        p_basis[(c, c)] = 1.0;
    }
    let mut k_basis = DMatrix::zeros(n, nk);
    for c in 0..nk {
        k_basis[(np + c, c)] = 1.0;
    }
    let fib = fibration.map(|(v, h)| FibrationSplit {
        vertical: Subspace::coordinate(np, &v),
        horizontal: Subspace::coordinate(np, &h),
    });
    let space = ReductiveSpace::new(algebra, p_basis, k_basis, fib, name, tol)?;
    Ok((Arc::new(space), all))
}

// --- the complex projective space ------------------------------------------

/// Sp(2)/(U(1)×Sp(1)) with the nearly Kähler metric −2 Re tr.
pub fn build_cp3(tol: Tolerance) -> Result<ModelSpaceBundle> {
    let s2 = 1.0 / 2f64.sqrt();
    // quaternionic 2×2 matrices, X = A + jB
    let p_mats = vec![
        quat_embed(&czero(2), &celem(2, 0, 0, re(s2))), // e1 = (j/√2) E11
        quat_embed(&czero(2), &celem(2, 0, 0, im(-s2))), // e2 = (k/√2) E11
        quat_embed(
            &(celem(2, 1, 0, re(0.5)) - celem(2, 0, 1, re(0.5))), // e3 = (E21 − E12)/2
            &czero(2),
        ),
        quat_embed(
            &(celem(2, 0, 1, im(0.5)) + celem(2, 1, 0, im(0.5))), // e4 = i(E12+E21)/2
            &czero(2),
        ),
        quat_embed(
            &czero(2),
            &(celem(2, 0, 1, re(0.5)) + celem(2, 1, 0, re(0.5))), // e5 = j(E12+E21)/2
        ),
        quat_embed(
            &czero(2),
            &(celem(2, 0, 1, im(-0.5)) + celem(2, 1, 0, im(-0.5))), // e6 = k(E12+E21)/2
        ),
    ];
    let k_mats = vec![
        quat_embed(&celem(2, 0, 0, im(s2)), &czero(2)), // (i/√2) E11
        quat_embed(&celem(2, 1, 1, im(s2)), &czero(2)), // (i/√2) E22
        quat_embed(&czero(2), &celem(2, 1, 1, re(s2))), // (j/√2) E22
        quat_embed(&czero(2), &celem(2, 1, 1, im(-s2))), // (k/√2) E22
    ];
    let (space, _) = assemble_space(
        "cp3",
        p_mats.clone(),
        k_mats.clone(),
        1.0,
        Some((vec![0, 1], vec![2, 3, 4, 5])),
        tol,
    )?;

    // θ = tangent action of conjugation by ω = diag(e^{2πi/3}, 1)
    let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let omega = quat_embed(&(celem(2, 0, 0, w) + celem(2, 1, 1, re(1.0))), &czero(2));
    let theta = rep::conjugation_on_p(&p_mats, 1.0, &omega)?;
    let nk = NKStructure::build(&space, theta)?;

    // outer isometry: conjugation by diag(j, 1)
    let outer = quat_embed(&celem(2, 1, 1, re(1.0)), &celem(2, 0, 0, re(1.0)));
    let outer_op = rep::conjugation_on_p(&p_mats, 1.0, &outer)?;

    let r2 = 2f64.sqrt();
    let r3 = 3f64.sqrt();
    let candidates = vec![
        Candidate {
            label: "lagrangian_rp3".into(),
            subspace: Subspace::coordinate(6, &[0, 2, 4]),
            expect: Expectation {
                dim: 3,
                j_type: JType::Lagrangian,
                well_positioned: true,
                d_invariant: true,
                geometry: GeometryClass::Berger { r: 2.0, tau: 0.5 },
                maximal: true,
                lattice: None,
                note: "orbit of U(2)^j, a Berger real projective 3-space",
            },
        },
        Candidate {
            label: "twistor_fiber".into(),
            subspace: Subspace::coordinate(6, &[0, 1]),
            expect: Expectation {
                dim: 2,
                j_type: JType::Holomorphic,
                well_positioned: true,
                d_invariant: true,
                geometry: GeometryClass::Round {
                    radius: 1.0 / 2f64.sqrt(),
                },
                maximal: true,
                lattice: None,
                note: "fiber of the twistor fibration over S4",
            },
        },
        Candidate {
            label: "su2_sphere".into(),
            subspace: Subspace::coordinate(6, &[2, 3]),
            expect: Expectation {
                dim: 2,
                j_type: JType::Holomorphic,
                well_positioned: true,
                d_invariant: true,
                geometry: GeometryClass::Round { radius: 1.0 },
                maximal: true,
                lattice: None,
                note: "orbit of the standard SU(2)",
            },
        },
        Candidate {
            label: "lambda3_sphere".into(),
            subspace: span(
                &tol,
                &[
                    vec![r2, 0.0, r3, 0.0, 0.0, 0.0],
                    vec![0.0, r2, 0.0, r3, 0.0, 0.0],
                ],
            ),
            expect: Expectation {
                dim: 2,
                j_type: JType::Holomorphic,
                well_positioned: false,
                d_invariant: true,
                geometry: GeometryClass::Round {
                    radius: 5f64.sqrt(),
                },
                maximal: true,
                lattice: None,
                note: "orbit of the irreducibly embedded SU(2)",
            },
        },
    ];

    Ok(ModelSpaceBundle {
        name: "cp3".into(),
        space,
        nk: Some(nk),
        candidates,
        finite_symmetries: vec![outer_op],
        rep: Representation {
            p_matrices: p_mats,
            k_matrices: k_mats,
            form_scale: 1.0,
            membership: IsotropyMembership::None,
        },
        killing_trace_constant: Some(12.0),
    })
}

// --- the flag manifold ------------------------------------------------------

/// SU(3)/T² with the nearly Kähler metric −tr.
pub fn build_flag(tol: Tolerance) -> Result<ModelSpaceBundle> {
    let s2 = 1.0 / 2f64.sqrt();
    let s6 = 1.0 / 6f64.sqrt();
    let p_mats = vec![
        celem(3, 0, 1, re(s2)) - celem(3, 1, 0, re(s2)), // e1
        celem(3, 0, 1, im(s2)) + celem(3, 1, 0, im(s2)), // e2
        celem(3, 1, 2, re(s2)) - celem(3, 2, 1, re(s2)), // e3
        celem(3, 1, 2, im(s2)) + celem(3, 2, 1, im(s2)), // e4
        celem(3, 0, 2, re(s2)) - celem(3, 2, 0, re(s2)), // e5
        celem(3, 0, 2, im(s2)) + celem(3, 2, 0, im(s2)), // e6
    ];
    let k_mats = vec![
        celem(3, 0, 0, im(s2)) - celem(3, 1, 1, im(s2)), // (i/√2) diag(1,−1,0)
        celem(3, 0, 0, im(s6)) + celem(3, 1, 1, im(s6)) - celem(3, 2, 2, im(2.0 * s6)),
    ];
    let (space, _) = assemble_space(
        "flag",
        p_mats.clone(),
        k_mats.clone(),
        1.0,
        Some((vec![0, 1], vec![2, 3, 4, 5])),
        tol,
    )?;

    let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let omega = celem(3, 0, 0, w) + celem(3, 1, 1, re(1.0)) + celem(3, 2, 2, w.conj());
    let theta = rep::conjugation_on_p(&p_mats, 1.0, &omega)?;
    let nk = NKStructure::build(&space, theta)?;

    // module permutation fixing p1 (the transposition of the first two
    // coordinates exchanges p2 and p3), and complex conjugation
    let perm12 = celem(3, 0, 1, re(1.0)) + celem(3, 1, 0, re(1.0)) + celem(3, 2, 2, re(1.0));
    let swap_op = rep::conjugation_on_p(&p_mats, 1.0, &perm12)?;
    let conj_op = rep::matrix_map_on_p(&p_mats, 1.0, |m| m.map(|z| z.conj()))?;

    let s3 = 3f64.sqrt();
    let candidates = vec![
        Candidate {
            label: "real_flag".into(),
            subspace: Subspace::coordinate(6, &[0, 2, 4]),
            expect: Expectation {
                dim: 3,
                j_type: JType::Lagrangian,
                well_positioned: true,
                d_invariant: true,
                geometry: GeometryClass::Round {
                    radius: 2.0 * 2f64.sqrt(),
                },
                maximal: true,
                lattice: None,
                note: "the real flag manifold, orbit of SO(3), constant curvature 1/8",
            },
        },
        Candidate {
            label: "berger_sphere".into(),
            subspace: span(
                &tol,
                &[
                    vec![1.0, 0.0, 1.0, 0.0, 0.0, 0.0],
                    vec![0.0, 1.0, 0.0, -1.0, 0.0, 0.0],
                    vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
                ],
            ),
            expect: Expectation {
                dim: 3,
                j_type: JType::Lagrangian,
                well_positioned: false,
                d_invariant: true,
                geometry: GeometryClass::Berger {
                    r: 2f64.sqrt(),
                    tau: 0.25,
                },
                maximal: true,
                lattice: None,
                note: "orbit of the SU(2) fixing (1,0,1)",
            },
        },
        Candidate {
            label: "torus".into(),
            subspace: span(
                &tol,
                &[
                    vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
                    vec![0.0, 1.0, 0.0, 1.0, 0.0, -1.0],
                ],
            ),
            expect: Expectation {
                dim: 2,
                j_type: JType::Holomorphic,
                well_positioned: false,
                d_invariant: true,
                geometry: GeometryClass::Flat,
                maximal: true,
                lattice: Some(LatticeSpec {
                    basis_x: unit(&[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]),
                    basis_y: unit(&[0.0, 1.0, 0.0, 1.0, 0.0, -1.0]),
                    generators: [
                        (
                            2f64.sqrt() * std::f64::consts::PI,
                            2f64.sqrt() * std::f64::consts::PI / s3,
                        ),
                        (0.0, 2.0 * 2f64.sqrt() * std::f64::consts::PI / s3),
                    ],
                }),
                note: "maximal torus orbit, flat",
            },
        },
        Candidate {
            label: "fiber_cp1".into(),
            subspace: Subspace::coordinate(6, &[0, 1]),
            expect: Expectation {
                dim: 2,
                j_type: JType::Holomorphic,
                well_positioned: true,
                d_invariant: true,
                geometry: GeometryClass::Round {
                    radius: 1.0 / 2f64.sqrt(),
                },
                maximal: true,
                lattice: None,
                note: "fiber of the twistor fibration over CP2",
            },
        },
        Candidate {
            label: "sphere_sqrt2".into(),
            subspace: span(
                &tol,
                &[
                    vec![1.0, 0.0, 1.0, 0.0, 0.0, 0.0],
                    vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0],
                ],
            ),
            expect: Expectation {
                dim: 2,
                j_type: JType::Holomorphic,
                well_positioned: false,
                d_invariant: true,
                geometry: GeometryClass::Round {
                    radius: 2f64.sqrt(),
                },
                maximal: true,
                lattice: None,
                note: "orbit of an SO(3) normalizing a real form",
            },
        },
        Candidate {
            label: "rp2_plane".into(),
            subspace: span(
                &tol,
                &[
                    vec![1.0, 0.0, 1.0, 0.0, 0.0, 0.0],
                    vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
                ],
            ),
            expect: Expectation {
                dim: 2,
                j_type: JType::TotallyReal,
                well_positioned: false,
                d_invariant: false,
                geometry: GeometryClass::Round {
                    radius: 2.0 * 2f64.sqrt(),
                },
                maximal: false,
                lattice: None,
                note: "projective plane inside the real flag manifold; \
                       representative of a family of congruent planes, not injectively immersed",
            },
        },
    ];

    Ok(ModelSpaceBundle {
        name: "flag".into(),
        space,
        nk: Some(nk),
        candidates,
        finite_symmetries: vec![swap_op, conj_op],
        rep: Representation {
            p_matrices: p_mats,
            k_matrices: k_mats,
            form_scale: 1.0,
            membership: IsotropyMembership::Diagonal,
        },
        killing_trace_constant: Some(6.0),
    })
}

// --- the almost product S³×S³ ----------------------------------------------

fn su2_h() -> CMat {
    celem(2, 0, 0, im(1.0)) - celem(2, 1, 1, im(1.0))
}
fn su2_e() -> CMat {
    celem(2, 1, 0, re(1.0)) - celem(2, 0, 1, re(1.0))
}
fn su2_f() -> CMat {
    celem(2, 0, 1, im(1.0)) + celem(2, 1, 0, im(1.0))
}

fn triple(a: &CMat, b: &CMat, c: &CMat) -> CMat {
    let mut m = czero(6);
    for r in 0..2 {
        for col in 0..2 {
            m[(r, col)] = a[(r, col)];
            m[(2 + r, 2 + col)] = b[(r, col)];
            m[(4 + r, 4 + col)] = c[(r, col)];
        }
    }
    m
}

/// SU(2)³/ΔSU(2) with the nearly Kähler metric −tr ⊕ −tr ⊕ −tr.
pub fn build_s3s3(tol: Tolerance) -> Result<ModelSpaceBundle> {
    let h = su2_h();
    let e = su2_e();
    let f = su2_f();
    let s12 = 1.0 / 12f64.sqrt();
    let s6 = 1.0 / 6f64.sqrt();
    let scale = |m: &CMat, c: f64| m * re(c);
    let p_mats = vec![
        triple(&scale(&h, s12), &scale(&h, -2.0 * s12), &scale(&h, s12)), // e1
        triple(&scale(&e, s12), &scale(&e, -2.0 * s12), &scale(&e, s12)), // e2
        triple(&scale(&f, s12), &scale(&f, -2.0 * s12), &scale(&f, s12)), // e3
        triple(&scale(&h, 0.5), &czero(2), &scale(&h, -0.5)),             // e4
        triple(&scale(&e, 0.5), &czero(2), &scale(&e, -0.5)),             // e5
        triple(&scale(&f, 0.5), &czero(2), &scale(&f, -0.5)),             // e6
    ];
    let k_mats = vec![
        triple(&scale(&h, s6), &scale(&h, s6), &scale(&h, s6)),
        triple(&scale(&e, s6), &scale(&e, s6), &scale(&e, s6)),
        triple(&scale(&f, s6), &scale(&f, s6), &scale(&f, s6)),
    ];
    let (space, _) = assemble_space(
        "s3s3",
        p_mats.clone(),
        k_mats.clone(),
        1.0,
        Some((vec![0, 1, 2], vec![3, 4, 5])),
        tol,
    )?;

    // θ = tangent action of the factor cycle (g,h,k) ↦ (h,k,g)
    let cycle = |m: &CMat| -> CMat {
        let mut out = czero(6);
        for r in 0..2 {
            for c in 0..2 {
                out[(r, c)] = m[(2 + r, 2 + c)];
                out[(2 + r, 2 + c)] = m[(4 + r, 4 + c)];
                out[(4 + r, 4 + c)] = m[(r, c)];
            }
        }
        out
    };
    let theta = rep::matrix_map_on_p(&p_mats, 1.0, cycle)?;
    let nk = NKStructure::build(&space, theta)?;

    // the factor swap (g,h,k) ↦ (k,h,g) preserves the fibration split
    let swap13 = |m: &CMat| -> CMat {
        let mut out = czero(6);
        for r in 0..2 {
            for c in 0..2 {
                out[(r, c)] = m[(4 + r, 4 + c)];
                out[(2 + r, 2 + c)] = m[(2 + r, 2 + c)];
                out[(4 + r, 4 + c)] = m[(r, c)];
            }
        }
        out
    };
    let swap_op = rep::matrix_map_on_p(&p_mats, 1.0, swap13)?;

    let pi = std::f64::consts::PI;
    let s3 = 3f64.sqrt();
    let candidates = vec![
        Candidate {
            label: "fiber_s3".into(),
            subspace: Subspace::coordinate(6, &[0, 1, 2]),
            expect: Expectation {
                dim: 3,
                j_type: JType::Lagrangian,
                well_positioned: true,
                d_invariant: true,
                geometry: GeometryClass::Round { radius: 2.0 / s3 },
                maximal: true,
                lattice: None,
                note: "fiber of the projection to the first factor, round",
            },
        },
        Candidate {
            label: "berger_sphere".into(),
            subspace: Subspace::coordinate(6, &[0, 4, 5]),
            expect: Expectation {
                dim: 3,
                j_type: JType::Lagrangian,
                well_positioned: true,
                d_invariant: true,
                geometry: GeometryClass::Berger {
                    r: 2.0,
                    tau: 1.0 / 3.0,
                },
                maximal: true,
                lattice: None,
                note: "Berger 3-sphere orbit",
            },
        },
        Candidate {
            label: "torus".into(),
            subspace: Subspace::coordinate(6, &[0, 3]),
            expect: Expectation {
                dim: 2,
                j_type: JType::Holomorphic,
                well_positioned: true,
                d_invariant: true,
                geometry: GeometryClass::Flat,
                maximal: true,
                lattice: Some(LatticeSpec {
                    basis_x: crate::numkernel::axis(6, 0),
                    basis_y: crate::numkernel::axis(6, 3),
                    generators: [(2.0 * pi / s3, 2.0 * pi), (4.0 * pi / s3, 0.0)],
                }),
                note: "flat torus orbit",
            },
        },
        Candidate {
            label: "skew_sphere".into(),
            subspace: span(
                &tol,
                &[
                    vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
                    vec![0.0, 1.0, 0.0, -1.0, 0.0, 0.0],
                ],
            ),
            expect: Expectation {
                dim: 2,
                j_type: JType::Holomorphic,
                well_positioned: false,
                d_invariant: true,
                geometry: GeometryClass::Round {
                    radius: (3.0f64 / 2.0).sqrt(),
                },
                maximal: true,
                lattice: None,
                note: "round 2-sphere orbit of a conjugated diagonal, not well-positioned",
            },
        },
        Candidate {
            label: "great_sphere".into(),
            subspace: Subspace::coordinate(6, &[0, 1]),
            expect: Expectation {
                dim: 2,
                j_type: JType::TotallyReal,
                well_positioned: true,
                d_invariant: false,
                geometry: GeometryClass::Round { radius: 2.0 / s3 },
                maximal: false,
                lattice: None,
                note: "great sphere inside the fiber; extrinsically homogeneous \
                       but not D-invariant",
            },
        },
    ];

    Ok(ModelSpaceBundle {
        name: "s3s3".into(),
        space,
        nk: Some(nk),
        candidates,
        finite_symmetries: vec![swap_op],
        rep: Representation {
            p_matrices: p_mats,
            k_matrices: k_mats,
            form_scale: 1.0,
            membership: IsotropyMembership::EqualBlocks { block: 2, count: 3 },
        },
        killing_trace_constant: Some(4.0),
    })
}

// --- spheres -----------------------------------------------------------------

/// Round sphere SO(n+1)/SO(n) with the metric scaled so sec = 1/r².
pub fn build_round_sphere(n: usize, r: f64, tol: Tolerance) -> Result<ModelSpaceBundle> {
    if n < 2 || r <= 0.0 {
        return Err(Error::UnsupportedBase(format!(
            "round sphere needs n ≥ 2 and r > 0, got n={n}, r={r}"
        )));
    }
    let dim = n + 1;
    let skew = |a: usize, b: usize| celem(dim, a, b, re(1.0)) - celem(dim, b, a, re(1.0));
    // form −(r²/2) tr: the p-frame L_{0i}/r is orthonormal for the space metric
    let scale = r * r / 2.0;
    let p_mats: Vec<CMat> = (1..dim).map(|i| skew(0, i) * re(1.0 / r)).collect();
    let mut k_mats = Vec::new();
    for a in 1..dim {
        for b in (a + 1)..dim {
            k_mats.push(skew(a, b) * re(1.0 / r));
        }
    }
    let (space, _) = assemble_space(
        &format!("sphere{n}_r{r}"),
        p_mats.clone(),
        k_mats.clone(),
        scale,
        None,
        tol,
    )?;
    // validate the curvature normalization
    let ops = CurvatureOperatorSet::new(space.clone(), 0);
    let sec = ops.sectional_curvature(&crate::numkernel::axis(n, 0), &crate::numkernel::axis(n, 1));
    if (sec - 1.0 / (r * r)).abs() > 1e-9 {
        return Err(Error::InternalConsistency(format!(
            "round sphere normalization: sec = {sec}, expected {}",
            1.0 / (r * r)
        )));
    }
    Ok(ModelSpaceBundle {
        name: format!("sphere{n}_r{r}"),
        space,
        nk: None,
        candidates: vec![],
        finite_symmetries: vec![],
        rep: Representation {
            p_matrices: p_mats,
            k_matrices: k_mats,
            form_scale: scale,
            membership: IsotropyMembership::None,
        },
        killing_trace_constant: None,
    })
}

/// Berger sphere U(2)/U(1): vertical Hopf direction rescaled by τ, overall
/// radius r. The frame E, X, Y is declared orthonormal for the Berger metric
/// while the algebra keeps its ad-invariant trace form, so this space is a
/// genuine example of a non-normal invariant metric.
pub fn build_berger_sphere(r: f64, tau: f64, tol: Tolerance) -> Result<ModelSpaceBundle> {
    if r <= 0.0 || tau <= 0.0 {
        return Err(Error::UnsupportedBase(format!(
            "Berger sphere needs r, τ > 0, got r={r}, τ={tau}"
        )));
    }
    let p_mats = vec![
        celem(2, 1, 1, im(1.0 / (r * tau.sqrt()))), // E
        (celem(2, 1, 0, re(1.0)) - celem(2, 0, 1, re(1.0))) * re(1.0 / r), // X
        (celem(2, 1, 0, im(1.0)) + celem(2, 0, 1, im(1.0))) * re(1.0 / r), // Y
    ];
    let k_mats = vec![celem(2, 0, 0, im(1.0))]; // K
    let (space, _) = assemble_space(
        &format!("berger_r{r}_tau{tau}"),
        p_mats.clone(),
        k_mats.clone(),
        1.0,
        Some((vec![0], vec![1, 2])),
        tol,
    )?;
    // validate the two defining sectional curvatures
    let ops = CurvatureOperatorSet::new(space.clone(), 0);
    let e0 = crate::numkernel::axis(3, 0);
    let e1 = crate::numkernel::axis(3, 1);
    let e2 = crate::numkernel::axis(3, 2);
    let sec_vertical = ops.sectional_curvature(&e0, &e1);
    let sec_horizontal = ops.sectional_curvature(&e1, &e2);
    let expect_v = tau / (r * r);
    let expect_h = (4.0 - 3.0 * tau) / (r * r);
    if (sec_vertical - expect_v).abs() > 1e-9 || (sec_horizontal - expect_h).abs() > 1e-9 {
        return Err(Error::InternalConsistency(format!(
            "Berger normalization: sec(E,X) = {sec_vertical} (want {expect_v}), \
             sec(X,Y) = {sec_horizontal} (want {expect_h})"
        )));
    }
    Ok(ModelSpaceBundle {
        name: format!("berger_r{r}_tau{tau}"),
        space,
        nk: None,
        candidates: vec![],
        finite_symmetries: vec![],
        rep: Representation {
            p_matrices: p_mats,
            k_matrices: k_mats,
            form_scale: 1.0,
            membership: IsotropyMembership::None,
        },
        killing_trace_constant: None,
    })
}

/// Builds one of the named nearly Kähler spaces.
pub fn build_by_name(name: &str, tol: Tolerance) -> Result<ModelSpaceBundle> {
    match name {
        "cp3" => build_cp3(tol),
        "flag" => build_flag(tol),
        "s3s3" => build_s3s3(tol),
        other => Err(Error::UnknownSpace(other.into())),
    }
}

pub const NK_SPACE_NAMES: [&str; 3] = ["cp3", "flag", "s3s3"];

/// The catalog of candidate tangent subspaces for a named space.
pub fn candidate_catalog(name: &str, tol: Tolerance) -> Result<Vec<Candidate>> {
    Ok(build_by_name(name, tol)?.candidates)
}

/// A copy of a bundle's space with the metric on p rescaled by `c` (the
/// p-frame is divided by √c, the invariant form on g is untouched).
pub fn rescale_space_metric(space: &ReductiveSpace, c: f64) -> Result<ReductiveSpace> {
    let scale = 1.0 / c.sqrt();
    let p = space.p_basis() * scale;
    ReductiveSpace::new(
        space.algebra.clone(),
        p,
        space.k_basis().clone(),
        space.fibration.clone(),
        format!("{}_rescaled", space.name),
        space.tol,
    )
}

/// Identifies the constant-curvature or Berger geometry of a 3-dimensional
/// subspace from its induced sectional curvatures: a distinguished direction
/// U (if any) is the multiplicity-one eigenvector of the partial Ricci form,
/// and the parameters solve τ = r² sec(U,X), 4 − 3τ = r² sec(X,Y).
pub fn berger_params_from_subspace(
    ops: &CurvatureOperatorSet,
    v: &Subspace,
) -> Result<GeometryClass> {
    let tol = &ops.space().tol;
    if v.dim() != 3 {
        return Err(Error::Validation(format!(
            "Berger analysis needs a 3-dimensional subspace, got {}",
            v.dim()
        )));
    }
    // partial Ricci form on v
    let mut m = DMatrix::zeros(3, 3);
    for a in 0..3 {
        let va = v.basis_vector(a);
        for b in 0..3 {
            let vb = v.basis_vector(b);
            let mut sum = 0.0;
            for i in 0..3 {
                let vi = v.basis_vector(i);
                sum += ops.curvature(&va, &vi, &vi).dot(&vb);
            }
            m[(a, b)] = sum;
        }
    }
    let m = (&m + m.transpose()) * 0.5;
    let clusters = sym_eig(&m, tol)?;
    match clusters.len() {
        1 => {
            let sec = clusters[0].eigenvalue / 2.0;
            let u = v.basis_vector(0);
            let x = v.basis_vector(1);
            let check = ops.sectional_curvature(&u, &x);
            if (check - sec).abs() > 1e-7 {
                return Err(Error::NotBerger(format!(
                    "partial Ricci is scalar but plane curvatures vary ({check} vs {sec})"
                )));
            }
            if sec <= tol.eps_zero {
                return Err(Error::NotBerger(format!(
                    "constant curvature {sec} is not spherical"
                )));
            }
            Ok(GeometryClass::Round {
                radius: 1.0 / sec.sqrt(),
            })
        }
        2 => {
            let (single, double) = if clusters[0].eigenspace.dim() == 1 {
                (&clusters[0], &clusters[1])
            } else if clusters[1].eigenspace.dim() == 1 {
                (&clusters[1], &clusters[0])
            } else {
                return Err(Error::NotBerger(
                    "partial Ricci eigenvalue multiplicities are not (1,2)".into(),
                ));
            };
            if double.eigenspace.dim() != 2 {
                return Err(Error::NotBerger(
                    "partial Ricci eigenvalue multiplicities are not (1,2)".into(),
                ));
            }
            let u = v.basis() * single.eigenspace.basis_vector(0);
            let x = v.basis() * double.eigenspace.basis_vector(0);
            let y = v.basis() * double.eigenspace.basis_vector(1);
            let s1 = ops.sectional_curvature(&u, &x);
            let s1b = ops.sectional_curvature(&u, &y);
            let s2 = ops.sectional_curvature(&x, &y);
            if (s1 - s1b).abs() > 1e-7 {
                return Err(Error::NotBerger(format!(
                    "vertical plane curvatures disagree: {s1} vs {s1b}"
                )));
            }
            let denom = 3.0 * s1 + s2;
            if denom <= 0.0 {
                return Err(Error::NotBerger(format!(
                    "curvature pair ({s1}, {s2}) admits no Berger parameters"
                )));
            }
            let r2 = 4.0 / denom;
            let tau = s1 * r2;
            if tau <= 0.0 {
                return Err(Error::NotBerger(format!("deformation τ = {tau} ≤ 0")));
            }
            Ok(GeometryClass::Berger { r: r2.sqrt(), tau })
        }
        _ => Err(Error::NotBerger(format!(
            "{} distinct partial Ricci eigenvalues",
            clusters.len()
        ))),
    }
}

/// Classifies the induced geometry of a tangent subspace of any dimension:
/// dimension 2 gives a round sphere or flat plane by sectional curvature,
/// dimension 3 runs the Berger analysis.
pub fn geometry_of_subspace(
    ops: &CurvatureOperatorSet,
    v: &Subspace,
) -> Result<Option<GeometryClass>> {
    match v.dim() {
        2 => {
            let sec = ops.sectional_curvature(&v.basis_vector(0), &v.basis_vector(1));
            if sec.abs() < 1e-9 {
                Ok(Some(GeometryClass::Flat))
            } else if sec > 0.0 {
                Ok(Some(GeometryClass::Round {
                    radius: 1.0 / sec.sqrt(),
                }))
            } else {
                Ok(None)
            }
        }
        3 => Ok(berger_params_from_subspace(ops, v).ok()),
        _ => Ok(None),
    }
}

/// The images of the su(2) basis (H, E, F) under the irreducible
/// four-dimensional representation, as quaternionic matrices in sp(2):
/// H ↦ i(E11 + 3E22), E ↦ √3(E21 − E12) + 2j E11, F ↦ −2k E11 − i√3(E12 + E21).
pub fn lambda3_images() -> [CMat; 3] {
    let s3 = 3f64.sqrt();
    let h = quat_embed(
        &(celem(2, 0, 0, im(1.0)) + celem(2, 1, 1, im(3.0))),
        &czero(2),
    );
    let e = quat_embed(
        &((celem(2, 1, 0, re(1.0)) - celem(2, 0, 1, re(1.0))) * re(s3)),
        &celem(2, 0, 0, re(2.0)),
    );
    let f = quat_embed(
        &((celem(2, 0, 1, im(-1.0)) + celem(2, 1, 0, im(-1.0))) * re(s3)),
        &celem(2, 0, 0, im(2.0)),
    );
    [h, e, f]
}
