//! Classification driver: randomized Grassmannian search for totally
//! geodesic subspaces, congruence fingerprinting, verification of the
//! catalog, maximality analysis, negative-result sweeps, and the cone
//! report. All searches are deterministic given (seed, sample count, order)
//! and parallelize over candidates with results merged in candidate order.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rayon::prelude::*;
use serde::Serialize;

use crate::cones::{hypersurface_obstruction_scan, ConeTensorSet, ScanParams, ScanReport};
use crate::error::{Error, Result};
use crate::homgeo::{random_subspace, CurvatureOperatorSet, TGVerdict};
use crate::modelspaces::{geometry_of_subspace, GeometryClass, ModelSpaceBundle};
use crate::nkstruct::JType;
use crate::numkernel::{orthonormalize, subspace_contains, Subspace};

/// Isotropy-invariant congruence data of a tangent subspace.
#[derive(Debug, Clone, Serialize)]
pub struct Fingerprint {
    pub dim: usize,
    /// sorted spectrum of the curvature operator compressed to Λ²v: the
    /// plane-curvature data of the subspace, invariant under isometries
    /// fixing the base point
    pub sec_spectrum: Vec<f64>,
    pub j_type: JType,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kahler_angle: Option<f64>,
    pub d_invariant: bool,
    /// dim(v ∩ V_o) for the fibration split
    pub vertical_dim: usize,
    pub well_positioned: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryClass>,
}

impl Fingerprint {
    /// Field-by-field agreement within the clustering tolerance.
    pub fn matches(&self, other: &Fingerprint, eps: f64) -> bool {
        self.vertical_dim == other.vertical_dim
            && self.well_positioned == other.well_positioned
            && self.congruence_matches(other, eps)
    }

    /// Agreement on the congruence-invariant fields only. A congruence class
    /// of submanifolds meets the base point in finitely many positions
    /// relative to the fibration, so `vertical_dim` and `well_positioned`
    /// vary within one class; curvature data, the relationship with J, and
    /// D-invariance do not (the canonical connection of these spaces is
    /// unique, so D-invariance is preserved by every isometry).
    pub fn congruence_matches(&self, other: &Fingerprint, eps: f64) -> bool {
        if self.dim != other.dim
            || self.j_type != other.j_type
            || self.d_invariant != other.d_invariant
        {
            return false;
        }
        if self.sec_spectrum.len() != other.sec_spectrum.len() {
            return false;
        }
        self.sec_spectrum
            .iter()
            .zip(&other.sec_spectrum)
            .all(|(a, b)| (a - b).abs() < eps)
    }
}

/// Computes the fingerprint of a subspace.
pub fn fingerprint(
    bundle: &ModelSpaceBundle,
    ops: &CurvatureOperatorSet,
    v: &Subspace,
    wp_samples: usize,
    seed: u64,
) -> Result<Fingerprint> {
    let tol = &bundle.space.tol;
    let d = v.dim();
    // curvature operator on Λ²v: Q[(a,b),(c,d)] = ⟨R(v_a,v_b)v_d, v_c⟩
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|a| ((a + 1)..d).map(move |b| (a, b)))
        .collect();
    let m = pairs.len();
    let mut q = nalgebra::DMatrix::zeros(m, m);
    for (row, &(a, b)) in pairs.iter().enumerate() {
        let rab = |z: &DVector<f64>| ops.curvature(&v.basis_vector(a), &v.basis_vector(b), z);
        for (col, &(c, dd)) in pairs.iter().enumerate() {
            q[(row, col)] = rab(&v.basis_vector(dd)).dot(&v.basis_vector(c));
        }
    }
    let q = (&q + q.transpose()) * 0.5;
    let mut sec_spectrum: Vec<f64> = if m > 0 {
        crate::numkernel::sym_eig(&q, tol)?
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.eigenvalue, c.eigenspace.dim()))
            .collect()
    } else {
        vec![]
    };
    sec_spectrum.sort_by(|a, b| a.total_cmp(b));

    let nk = bundle
        .nk
        .as_ref()
        .ok_or_else(|| Error::UnsupportedBase(bundle.name.clone()))?;
    let j_type = nk.classify_j_type(v, tol)?;
    let angle = nk.kahler_angle(v, tol)?;
    let d_invariant = ops.d_invariance_residual(v) < tol.eps_zero;
    let fib = bundle
        .space
        .fibration
        .as_ref()
        .ok_or(Error::MissingFibration)?;
    let vertical_dim = crate::numkernel::intersection_dim(v, &fib.vertical, tol)?;
    let wp = ops.well_positioned_check(v, wp_samples, seed)?;
    let geometry = geometry_of_subspace(ops, v)?;
    Ok(Fingerprint {
        dim: d,
        sec_spectrum,
        j_type,
        kahler_angle: angle.angle,
        d_invariant,
        vertical_dim,
        well_positioned: wp.well_positioned,
        geometry,
    })
}

/// A totally geodesic subspace found by the search.
#[derive(Debug, Clone, Serialize)]
pub struct Survivor {
    /// index into the deterministic candidate enumeration
    pub candidate_index: usize,
    /// catalog label when the candidate came from the catalog
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_label: Option<String>,
    pub basis: Vec<Vec<f64>>,
    pub verdict: TGVerdict,
    pub fingerprint: Fingerprint,
    pub class_id: usize,
}

/// One congruence class among the survivors.
#[derive(Debug, Clone, Serialize)]
pub struct SurvivorClass {
    pub class_id: usize,
    pub representative: Fingerprint,
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog_match: Option<String>,
}

/// Search outcome.
#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub space: String,
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub order: usize,
    pub candidates_checked: usize,
    pub survivors: Vec<Survivor>,
    pub classes: Vec<SurvivorClass>,
    /// smallest obstruction residual over the rejected candidates: the
    /// falsification margin of the negative part of the sweep
    pub min_rejection_residual: f64,
}

/// Search configuration.
#[derive(Debug, Clone, Copy)]
pub struct SearchParams {
    pub samples: usize,
    pub seed: u64,
    pub order: usize,
    pub tojo_samples: usize,
    /// candidates with a curvature residual above this are rejected without
    /// evaluating higher orders (any positive value is already definitive)
    pub quick_reject_above: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            samples: 10_000,
            seed: 1,
            order: 4,
            tojo_samples: 64,
            quick_reject_above: 1e-6,
        }
    }
}

/// Deterministic candidate enumeration: catalog entries of the dimension,
/// coordinate subspaces, structured radical-coefficient frames, then seeded
/// Gaussian frames.
fn enumerate_candidates(
    bundle: &ModelSpaceBundle,
    dim: usize,
    params: &SearchParams,
) -> Vec<(Option<String>, Subspace)> {
    let np = bundle.space.p_dim();
    let mut out: Vec<(Option<String>, Subspace)> = Vec::new();
    for c in &bundle.candidates {
        if c.subspace.dim() == dim {
            out.push((Some(c.label.clone()), c.subspace.clone()));
        }
    }
    // coordinate subspaces
    let mut axes = vec![0usize; dim];
    fn emit(
        np: usize,
        dim: usize,
        start: usize,
        axes: &mut Vec<usize>,
        pos: usize,
        out: &mut Vec<(Option<String>, Subspace)>,
    ) {
        if pos == dim {
            out.push((None, Subspace::coordinate(np, &axes[..dim])));
            return;
        }
        for a in start..np {
            axes[pos] = a;
            emit(np, dim, a + 1, axes, pos + 1, out);
        }
    }
    emit(np, dim, 0, &mut axes, 0, &mut out);
    // structured frames: sparse vectors with radical coefficients
    let radicals = [
        1.0,
        -1.0,
        2f64.sqrt(),
        -(2f64.sqrt()),
        3f64.sqrt(),
        -(3f64.sqrt()),
        2.0,
        -2.0,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x57ab1e);
    let structured = (params.samples / 10).clamp(64, 4000);
    let mut tries = 0usize;
    let mut made = 0usize;
    while made < structured && tries < structured * 20 {
        tries += 1;
        let cols: Vec<DVector<f64>> = (0..dim)
            .map(|_| {
                let mut v = DVector::zeros(np);
                let nnz = rng.gen_range(1..=2usize);
                for _ in 0..nnz {
                    let idx = rng.gen_range(0..np);
                    let coef = radicals[rng.gen_range(0..radicals.len())];
                    v[idx] += coef;
                }
                v
            })
            .collect();
        if let Ok(s) = orthonormalize(&cols, &bundle.space.tol) {
            if s.dim() == dim {
                out.push((None, s));
                made += 1;
            }
        }
    }
    // Haar-uniform frames
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for _ in 0..params.samples {
        out.push((None, random_subspace(np, dim, &mut rng)));
    }
    out
}

/// Runs the search at one dimension. The verdict for every candidate is a
/// two-stage test: the curvature-invariance residual rejects almost
/// everything immediately (any violation is definitive), and the survivors
/// get the full check over all cached orders plus the translated-curvature
/// criterion.
pub fn search_tg_subspaces(
    bundle: &ModelSpaceBundle,
    ops: &CurvatureOperatorSet,
    dim: usize,
    params: &SearchParams,
) -> Result<SearchReport> {
    let candidates = enumerate_candidates(bundle, dim, params);

    struct Outcome {
        index: usize,
        label: Option<String>,
        subspace: Subspace,
        verdict: Option<TGVerdict>,
        rejection_residual: f64,
    }

    let outcomes: Vec<Outcome> = candidates
        .into_par_iter()
        .enumerate()
        .map(|(index, (label, subspace))| {
            let quick = ops.r_invariance_residual(&subspace);
            if quick > params.quick_reject_above {
                return Outcome {
                    index,
                    label,
                    subspace,
                    verdict: None,
                    rejection_residual: quick,
                };
            }
            let verdict = ops
                .tg_check(&subspace, params.order, params.tojo_samples, params.seed)
                .expect("tg_check on enumerated candidate");
            let rejection = if verdict.is_tg {
                f64::INFINITY
            } else {
                verdict.max_residual
            };
            Outcome {
                index,
                label,
                subspace,
                verdict: Some(verdict),
                rejection_residual: rejection,
            }
        })
        .collect();

    // reference fingerprints of the catalog rows of this dimension, used to
    // tag survivor classes with the congruence class they realize
    let catalog_fps: Vec<(String, Fingerprint)> = bundle
        .candidates
        .iter()
        .filter(|c| c.subspace.dim() == dim)
        .map(|c| {
            fingerprint(bundle, ops, &c.subspace, 16, params.seed).map(|fp| (c.label.clone(), fp))
        })
        .collect::<Result<_>>()?;

    let mut survivors: Vec<Survivor> = Vec::new();
    let mut classes: Vec<SurvivorClass> = Vec::new();
    let mut min_rejection = f64::INFINITY;
    let candidates_checked = outcomes.len();
    let match_eps = bundle.space.tol.eps_cluster.max(1e-7) * 10.0;
    for outcome in outcomes {
        match outcome.verdict {
            Some(v) if v.is_tg => {
                let fp = fingerprint(bundle, ops, &outcome.subspace, 16, params.seed)?;
                let class_id = match classes
                    .iter()
                    .position(|c| c.representative.matches(&fp, match_eps))
                {
                    Some(id) => {
                        classes[id].count += 1;
                        id
                    }
                    None => {
                        let catalog_match = catalog_fps
                            .iter()
                            .find(|(_, cfp)| cfp.congruence_matches(&fp, match_eps))
                            .map(|(label, _)| label.clone());
                        classes.push(SurvivorClass {
                            class_id: classes.len(),
                            representative: fp.clone(),
                            count: 1,
                            catalog_match,
                        });
                        classes.len() - 1
                    }
                };
                survivors.push(Survivor {
                    candidate_index: outcome.index,
                    source_label: outcome.label,
                    basis: (0..outcome.subspace.dim())
                        .map(|i| outcome.subspace.basis_vector(i).iter().copied().collect())
                        .collect(),
                    verdict: v,
                    fingerprint: fp,
                    class_id,
                });
            }
            _ => {
                min_rejection = min_rejection.min(outcome.rejection_residual);
            }
        }
    }
    Ok(SearchReport {
        space: bundle.name.clone(),
        dim,
        samples: params.samples,
        seed: params.seed,
        order: params.order,
        candidates_checked,
        survivors,
        classes,
        min_rejection_residual: min_rejection,
    })
}

/// Statistics of a pure negative sweep (random subspaces only).
#[derive(Debug, Clone, Serialize)]
pub struct SweepStats {
    pub space: String,
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub passes: usize,
    pub min_residual: f64,
}

/// Draws `samples` Haar-random subspaces and records the smallest curvature
/// obstruction; candidates below the quick-reject threshold get the full
/// totally geodesic check.
pub fn negative_sweep(
    bundle: &ModelSpaceBundle,
    ops: &CurvatureOperatorSet,
    dim: usize,
    samples: usize,
    seed: u64,
    order: usize,
) -> SweepStats {
    let np = bundle.space.p_dim();
    // pre-draw subspaces sequentially for determinism, check in parallel
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subspaces: Vec<Subspace> = (0..samples)
        .map(|_| random_subspace(np, dim, &mut rng))
        .collect();
    let results: Vec<(f64, bool)> = subspaces
        .par_iter()
        .map(|v| {
            let quick = ops.r_invariance_residual(v);
            if quick > 1e-6 {
                (quick, false)
            } else {
                let verdict = ops.tg_check(v, order, 32, seed).expect("tg_check");
                (verdict.max_residual, verdict.is_tg)
            }
        })
        .collect();
    let mut min_residual = f64::INFINITY;
    let mut passes = 0usize;
    for (res, is_tg) in results {
        if is_tg {
            passes += 1;
        } else {
            min_residual = min_residual.min(res);
        }
    }
    SweepStats {
        space: bundle.name.clone(),
        dim,
        samples,
        seed,
        passes,
        min_residual,
    }
}

/// Verdict for one catalog row.
#[derive(Debug, Clone, Serialize)]
pub struct RowReport {
    pub space: String,
    pub label: String,
    pub pass: bool,
    pub failures: Vec<String>,
    pub verdict: TGVerdict,
    pub fingerprint: Fingerprint,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_verified: Option<bool>,
}

/// Catalog verification report for one space.
#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub space: String,
    pub rows: Vec<RowReport>,
    pub sweeps: Vec<SweepStats>,
    pub all_pass: bool,
}

/// Verifies every catalog row: the subspace must pass the totally geodesic
/// check at the requested order and match its expected relationship with J,
/// well-positionedness, D-invariance, and geometry parameters (radius,
/// Berger pair, or flatness with a verified lattice). Optional negative
/// sweeps at the excluded dimensions are appended.
pub fn verify_tables(
    bundle: &ModelSpaceBundle,
    ops: &CurvatureOperatorSet,
    order: usize,
    seed: u64,
    sweep_samples: usize,
) -> Result<TableReport> {
    let mut rows = Vec::new();
    for cand in &bundle.candidates {
        let mut failures: Vec<String> = Vec::new();
        let verdict = ops.tg_check(&cand.subspace, order, 64, seed)?;
        if !verdict.is_tg {
            failures.push(format!(
                "not totally geodesic (residual {:.3e})",
                verdict.max_residual
            ));
        }
        let fp = fingerprint(bundle, ops, &cand.subspace, 32, seed)?;
        if fp.dim != cand.expect.dim {
            failures.push(format!("dim {} ≠ expected {}", fp.dim, cand.expect.dim));
        }
        if fp.j_type != cand.expect.j_type {
            failures.push(format!(
                "J-type {} ≠ expected {}",
                fp.j_type, cand.expect.j_type
            ));
        }
        if fp.well_positioned != cand.expect.well_positioned {
            failures.push(format!(
                "well-positioned {} ≠ expected {}",
                fp.well_positioned, cand.expect.well_positioned
            ));
        }
        if fp.d_invariant != cand.expect.d_invariant {
            failures.push(format!(
                "D-invariant {} ≠ expected {}",
                fp.d_invariant, cand.expect.d_invariant
            ));
        }
        match (&fp.geometry, &cand.expect.geometry) {
            (Some(GeometryClass::Round { radius }), GeometryClass::Round { radius: want }) => {
                if (radius - want).abs() > 1e-7 {
                    failures.push(format!("radius {radius} ≠ expected {want}"));
                }
            }
            (Some(GeometryClass::Berger { r, tau }), GeometryClass::Berger { r: wr, tau: wt }) => {
                if (r - wr).abs() > 1e-7 || (tau - wt).abs() > 1e-7 {
                    failures.push(format!("Berger ({r}, {tau}) ≠ expected ({wr}, {wt})"));
                }
            }
            (Some(GeometryClass::Flat), GeometryClass::Flat) => {}
            (got, want) => failures.push(format!("geometry {got:?} ≠ expected {want:?}")),
        }
        let lattice_verified = match &cand.expect.lattice {
            None => None,
            Some(spec) => {
                let (ok, residual) = bundle.verify_torus_lattice(spec)?;
                if !ok {
                    failures.push(format!("lattice residual {residual:.3e}"));
                }
                Some(ok)
            }
        };
        rows.push(RowReport {
            space: bundle.name.clone(),
            label: cand.label.clone(),
            pass: failures.is_empty(),
            failures,
            verdict,
            fingerprint: fp,
            lattice_verified,
        });
    }
    let mut sweeps = Vec::new();
    if sweep_samples > 0 {
        for dim in [4usize, 5] {
            sweeps.push(negative_sweep(bundle, ops, dim, sweep_samples, seed, order));
        }
    }
    let all_pass = rows.iter().all(|r| r.pass)
        && sweeps
            .iter()
            .all(|s| s.passes == 0 && s.min_residual > 1e-8);
    Ok(TableReport {
        space: bundle.name.clone(),
        rows,
        sweeps,
        all_pass,
    })
}

/// Maximality analysis over the survivors of searches at several dimensions:
/// containment is tested directly and after canonicalization of both sides.
#[derive(Debug, Clone, Serialize)]
pub struct MaximalityReport {
    pub space: String,
    /// (smaller class, larger class) pairs found to be nested
    pub containments: Vec<(usize, usize)>,
    /// per entry of `found`: whether it is maximal among the found subspaces
    pub maximal: Vec<bool>,
    /// Kähler-angle law among maximal classes: dim-2 are holomorphic,
    /// dim-3 are Lagrangian
    pub angle_law_holds: bool,
}

pub fn maximality_analysis(
    bundle: &ModelSpaceBundle,
    found: &[(usize, Subspace, Fingerprint)],
) -> Result<MaximalityReport> {
    let tol = &bundle.space.tol;
    let loose = crate::tol::Tolerance::new(1e-6, 1e-4).unwrap();
    // positions of one submanifold through the base point are related by the
    // point isotropy of the full isometry group; beyond Ad(K) this includes
    // the 3-symmetry s_* = −½ Id + (√3/2) J, so containment is also tried on
    // the s-translates of the smaller subspace
    let symmetry_images = |v: &Subspace| -> Vec<Subspace> {
        let mut out = vec![v.clone()];
        if let Some(nk) = &bundle.nk {
            let np = v.ambient_dim();
            let s = nk.j() * (3f64.sqrt() / 2.0) - nalgebra::DMatrix::<f64>::identity(np, np) * 0.5;
            if let Ok(sv) = v.map(&s, tol) {
                if let Ok(ssv) = sv.map(&s, tol) {
                    out.push(ssv);
                }
                out.push(sv);
            }
        }
        out
    };
    let normalized: Vec<Subspace> = found
        .iter()
        .map(|(_, v, _)| bundle.isotropy_orbit_normalize(v, 20_000, 13))
        .collect();
    let mut containments = Vec::new();
    let mut maximal = vec![true; found.len()];
    for (i, (_, vi, _)) in found.iter().enumerate() {
        for (j, (_, vj, _)) in found.iter().enumerate() {
            if i == j || vi.dim() >= vj.dim() {
                continue;
            }
            let mut contained = false;
            for image in symmetry_images(vi) {
                if subspace_contains(vj, &image, tol)? {
                    contained = true;
                    break;
                }
                let ci = bundle.isotropy_orbit_normalize(&image, 20_000, 13);
                if subspace_contains(&normalized[j], &ci, &loose)? {
                    contained = true;
                    break;
                }
            }
            if contained {
                containments.push((i, j));
                maximal[i] = false;
            }
        }
    }
    let mut angle_law = true;
    for (idx, (_, _, fp)) in found.iter().enumerate() {
        if !maximal[idx] {
            continue;
        }
        match fp.dim {
            2 if fp.j_type != JType::Holomorphic => angle_law = false,
            3 if fp.j_type != JType::Lagrangian => angle_law = false,
            _ => {}
        }
    }
    Ok(MaximalityReport {
        space: bundle.name.clone(),
        containments,
        maximal,
        angle_law_holds: angle_law,
    })
}

/// A maximal totally geodesic cone subspace: the radial line over a maximal
/// base subspace, with the calibration label implied by its dimension.
#[derive(Debug, Clone, Serialize)]
pub struct ConeEntry {
    pub label: String,
    pub base_dim: usize,
    pub cone_dim: usize,
    /// "associative" (dim 3) / "coassociative" (dim 4), implied by the
    /// dimension rule for cones over holomorphic curves and Lagrangians;
    /// reported as a label, not computed from a calibration form
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration_label: Option<String>,
    pub verdict_residual: f64,
    pub is_tg: bool,
}

/// Cone report for a space: the cones over the maximal catalog subspaces,
/// plus hypersurface scan evidence.
#[derive(Debug, Clone, Serialize)]
pub struct ConeReport {
    pub space: String,
    pub entries: Vec<ConeEntry>,
    pub hypersurface_scan: ScanReport,
    /// every maximal totally geodesic cone subspace is the cone over a
    /// maximal base subspace whenever the scan finds no hyperplanes
    pub no_hypersurfaces: bool,
}

pub fn cone_report(
    bundle: &ModelSpaceBundle,
    ops: &CurvatureOperatorSet,
    order: usize,
    scan: &ScanParams,
) -> Result<ConeReport> {
    let cone = ConeTensorSet::new(ops, order.min(ops.k_max()))?;
    let mut entries = Vec::new();
    for cand in &bundle.candidates {
        if !cand.expect.maximal {
            continue;
        }
        let verdict = cone.cone_tg_check(&cand.subspace, true, order.min(ops.k_max()))?;
        let cone_dim = cand.subspace.dim() + 1;
        let label = match cone_dim {
            3 => Some("associative".to_string()),
            4 => Some("coassociative".to_string()),
            _ => None,
        };
        entries.push(ConeEntry {
            label: cand.label.clone(),
            base_dim: cand.subspace.dim(),
            cone_dim,
            calibration_label: label,
            verdict_residual: verdict.max_residual,
            is_tg: verdict.is_tg,
        });
    }
    // include the catalog directions among the scanned normals
    let mut special: Vec<DVector<f64>> = Vec::new();
    for cand in &bundle.candidates {
        for i in 0..cand.subspace.dim() {
            special.push(cand.subspace.basis_vector(i));
        }
    }
    let report = hypersurface_obstruction_scan(&cone, &special, scan)?;
    let no_hypersurfaces = !report.families_found;
    Ok(ConeReport {
        space: bundle.name.clone(),
        entries,
        hypersurface_scan: report,
        no_hypersurfaces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelspaces::build_by_name;
    use crate::tol::Tolerance;

    fn quick_params(samples: usize, dim_seed: u64) -> SearchParams {
        SearchParams {
            samples,
            seed: dim_seed,
            order: 4,
            tojo_samples: 24,
            quick_reject_above: 1e-6,
        }
    }

    #[test]
    fn cp3_dim2_search_finds_exactly_three_classes() {
        let bundle = build_by_name("cp3", Tolerance::default()).unwrap();
        let ops = bundle.curvature(4);
        let report = search_tg_subspaces(&bundle, &ops, 2, &quick_params(2000, 7)).unwrap();
        assert_eq!(report.classes.len(), 3, "classes: {:#?}", report.classes);
        assert!(report.survivors.len() >= 3);
        assert!(report.min_rejection_residual > 1e-8);
    }

    #[test]
    fn cp3_dim4_search_is_empty() {
        let bundle = build_by_name("cp3", Tolerance::default()).unwrap();
        let ops = bundle.curvature(4);
        let report = search_tg_subspaces(&bundle, &ops, 4, &quick_params(2000, 7)).unwrap();
        assert!(report.survivors.is_empty());
        assert!(report.min_rejection_residual > 1e-8);
    }

    #[test]
    fn flag_dim3_search_finds_two_classes() {
        let bundle = build_by_name("flag", Tolerance::default()).unwrap();
        let ops = bundle.curvature(4);
        let report = search_tg_subspaces(&bundle, &ops, 3, &quick_params(2000, 7)).unwrap();
        assert_eq!(report.classes.len(), 2, "classes: {:#?}", report.classes);
    }

    #[test]
    fn verify_tables_passes_for_all_spaces() {
        for name in crate::modelspaces::NK_SPACE_NAMES {
            let bundle = build_by_name(name, Tolerance::default()).unwrap();
            let ops = bundle.curvature(4);
            let report = verify_tables(&bundle, &ops, 4, 11, 0).unwrap();
            for row in &report.rows {
                assert!(row.pass, "{name}/{}: {:?}", row.label, row.failures);
            }
        }
    }

    #[test]
    fn catalog_fingerprints_separate_congruence_classes() {
        // the congruence-invariant fields alone must tell every pair of
        // same-dimension catalog rows apart
        for name in crate::modelspaces::NK_SPACE_NAMES {
            let bundle = build_by_name(name, Tolerance::default()).unwrap();
            let ops = bundle.curvature(1);
            let fps: Vec<(String, Fingerprint)> = bundle
                .candidates
                .iter()
                .map(|c| {
                    (
                        c.label.clone(),
                        fingerprint(&bundle, &ops, &c.subspace, 16, 3).unwrap(),
                    )
                })
                .collect();
            for (i, (la, fa)) in fps.iter().enumerate() {
                for (lb, fb) in fps.iter().skip(i + 1) {
                    assert!(
                        !fa.congruence_matches(fb, 1e-6),
                        "{name}: rows {la} and {lb} share a congruence fingerprint"
                    );
                }
            }
        }
    }

    #[test]
    fn fingerprints_are_isotropy_invariant() {
        let bundle = build_by_name("s3s3", Tolerance::default()).unwrap();
        let ops = bundle.curvature(1);
        let v = bundle.candidate("berger_sphere").unwrap().subspace.clone();
        let fp = fingerprint(&bundle, &ops, &v, 16, 3).unwrap();
        for op in bundle.isotropy_sample(10, 17) {
            let moved = v.map(&op, &bundle.space.tol).unwrap();
            let fp2 = fingerprint(&bundle, &ops, &moved, 16, 3).unwrap();
            assert!(
                fp.matches(&fp2, 1e-7),
                "fingerprint not invariant: {fp:?} vs {fp2:?}"
            );
        }
    }

    #[test]
    fn maximality_of_catalog() {
        let bundle = build_by_name("flag", Tolerance::default()).unwrap();
        let ops = bundle.curvature(1);
        let found: Vec<(usize, Subspace, Fingerprint)> = bundle
            .candidates
            .iter()
            .map(|c| {
                let fp = fingerprint(&bundle, &ops, &c.subspace, 16, 3).unwrap();
                (0usize, c.subspace.clone(), fp)
            })
            .collect();
        let report = maximality_analysis(&bundle, &found).unwrap();
        for (i, cand) in bundle.candidates.iter().enumerate() {
            assert_eq!(
                report.maximal[i], cand.expect.maximal,
                "{}: maximal flag mismatch",
                cand.label
            );
        }
        assert!(report.angle_law_holds);
    }
}
