//! Exploratory: enumerate the fingerprint classes the search finds at
//! dimensions 2 and 3 (run with --nocapture --ignored).

use natred::classify::{search_tg_subspaces, SearchParams};
use natred::modelspaces::build_by_name;
use natred::Tolerance;

#[test]
#[ignore]
fn enumerate_classes() {
    for name in natred::modelspaces::NK_SPACE_NAMES {
        let bundle = build_by_name(name, Tolerance::default()).unwrap();
        let ops = bundle.curvature(4);
        for dim in [2usize, 3] {
            let params = SearchParams {
                samples: 60_000,
                seed: 99,
                order: 4,
                tojo_samples: 32,
                quick_reject_above: 1e-6,
            };
            let report = search_tg_subspaces(&bundle, &ops, dim, &params).unwrap();
            println!("== {name} d={dim}: {} classes", report.classes.len());
            for class in &report.classes {
                let fp = &class.representative;
                println!(
                    "  class {} ({} members, match {:?}): jt={} vdim={} wp={} dinv={} sec={:?} geo={:?}",
                    class.class_id,
                    class.count,
                    class.catalog_match,
                    fp.j_type,
                    fp.vertical_dim,
                    fp.well_positioned,
                    fp.d_invariant,
                    fp.sec_spectrum,
                    fp.geometry,
                );
                // show one representative basis
                let rep = report
                    .survivors
                    .iter()
                    .find(|s| s.class_id == class.class_id)
                    .unwrap();
                for b in &rep.basis {
                    let txt: Vec<String> = b.iter().map(|x| format!("{x:+.3}")).collect();
                    println!("      [{}]", txt.join(", "));
                }
            }
        }
    }
}
