//! Acceptance run: one line per criterion, each with a wall-clock budget.
//! Every criterion is computed here from the public API and compared with
//! values derived independently in this file.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rayon::prelude::*;
use sheafsep::day::{
    build_memory_monoid, day_coend, dinaturality_witness, yoneda_comparison, DecompElement, MonoidVariant,
};
use sheafsep::fincat::{build_finsurj_category, build_powerset_category, ObjId};
use sheafsep::laws;
use sheafsep::pred::{all_families, glue_predicates, Fibre, KripkePredicate};
use sheafsep::presheaf::{
    amalgamation_operator, build_resource_sheaf, check_sheaf, matching_object, matching_presheaf, poset_pullback,
    ResourceKind, SheafFailure, SheafMode,
};
use sheafsep::psl::{independence_oracle, law_of, psl_sat, set_partitions, ProbSpace, RandomVariable};
use sheafsep::seplogic::{eval_formula, parse_formula, sat, Formula, Mode, ResourceModel};
use sheafsep::site::{build_coverage, validate_coverage, CoverageKind, Sieve};
use sheafsep::{Element, FinCat, Heap};

type Outcome = Result<String, String>;
type Criterion = (u8, &'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn names(n: &[&str]) -> Vec<String> {
    n.iter().map(|s| s.to_string()).collect()
}

fn powerset(n: &[&str]) -> Arc<FinCat> {
    Arc::new(build_powerset_category(&names(n)).unwrap())
}

fn heap(stage: u32, cells: &[(usize, i64)]) -> Element {
    Element::Heap(Heap::from_pairs(stage, cells).unwrap())
}

const VARIANTS: [MonoidVariant; 3] = [MonoidVariant::Total, MonoidVariant::Weak, MonoidVariant::Strong];

fn matching_example() -> Outcome {
    let c = powerset(&["x1", "x2", "x3"]);
    let m = build_resource_sheaf(c.clone(), &ResourceKind::StrictMemory { values: vec![-1, 3, 7, 9] }).unwrap();
    let u = c.subset(0b111).unwrap();
    let f = c.arrow(c.subset(0b011).unwrap(), u).unwrap();
    let g = c.arrow(c.subset(0b110).unwrap(), u).unwrap();
    let sq = poset_pullback(&c, f, g).ok_or("no pullback")?;
    ensure(sq.object == c.subset(0b010).unwrap(), "pullback of the legs is not {x2}")?;
    let pairs = matching_object(&m, u, f, g, &sq).map_err(|e| e.to_string())?;
    let s1 = heap(0b011, &[(0, 7), (1, 3)]);
    let s2 = heap(0b110, &[(1, 3), (2, 9)]);
    let s2_bad = heap(0b110, &[(1, -1), (2, 9)]);
    ensure(pairs.contains(&(s1.clone(), s2)), "(σ1, σ2) missing from the matching object")?;
    ensure(!pairs.contains(&(s1, s2_bad)), "(σ1, σ2′) wrongly in the matching object")?;
    // Agreeing pairs: 4 values on x2, then 4 free choices on each side.
    ensure(pairs.len() == 4 * 4 * 4, format!("expected 64 matching pairs, got {}", pairs.len()))?;
    Ok(format!("{} agreeing pairs", pairs.len()))
}

fn amalgamation_iso() -> Outcome {
    let c = powerset(&["x", "y", "z"]);
    let cov = build_coverage(c.clone(), CoverageKind::DownwardClosed).unwrap();
    let mp = Arc::new(build_resource_sheaf(c.clone(), &ResourceKind::PartialMemory { values: vec![0, 1] }).unwrap());
    let m = matching_presheaf(&mp, &cov).map_err(|e| e.to_string())?;
    let iso = amalgamation_operator(&mp, &cov, &m).map_err(|e| e.to_string())?;
    ensure(iso.forward.is_total() && iso.inverse.is_total(), "amalgamation map is partial")?;
    ensure(iso.bijectivity.is_empty(), format!("not bijective: {:?}", iso.bijectivity.first()))?;
    ensure(iso.naturality.is_empty(), format!("not natural: {:?}", iso.naturality.first()))?;
    // |M_p(U)| = 3^|U|.
    for a in c.objects() {
        let expected = 3usize.pow(c.mask(a).count_ones());
        ensure(m.classes(a).len() == expected, format!("{} classes at {}", m.classes(a).len(), c.obj_label(a)))?;
    }
    Ok(format!("{} sections matched over 8 stages", c.objects().map(|a| mp.len_at(a)).sum::<usize>()))
}

fn weak_strong_divergence() -> Outcome {
    let phi = parse_formula("x |->! 0 * x |->! 0").map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for mode in [Mode::Unfolded, Mode::Pipeline] {
        for (variant, expected) in [(MonoidVariant::Weak, true), (MonoidVariant::Strong, false)] {
            let m = ResourceModel::memory(&["x"], &[0, 1], true, Some(variant)).map_err(|e| e.to_string())?;
            let r = sat(&m, &phi, ObjId(1), &heap(1, &[(0, 0)]), mode).map_err(|e| e.to_string())?;
            ensure(r.result == expected, format!("{variant} in {mode:?} mode gave {}", r.result))?;
            if expected {
                let w = r.witness.ok_or("missing witness")?;
                ensure(w.left_stage == "{x}" && w.right_stage == "{x}", "witness is not ({x},{x})")?;
            }
        }
        detail.push(format!("{mode:?}"));
    }
    Ok(format!("weak true, strong false in {} modes", detail.join("/")))
}

fn pipeline_oracle() -> Outcome {
    let mut total = 0;
    for (k, v) in VARIANTS.into_iter().enumerate() {
        let m = ResourceModel::memory(&["x", "y"], &[0, 1], true, Some(v)).map_err(|e| e.to_string())?;
        let r = laws::pipeline_vs_unfolded(&m, ObjId(3), 200, 0x5eed + k as u64);
        ensure(r.passed(), format!("{}: {}", r.name, r.violations.join("\n")))?;
        ensure(r.checked == 200, "wrong number of pairs")?;
        total += r.checked;
    }
    Ok(format!("{total} pairs, 100% equal"))
}

fn residuation() -> Outcome {
    let mx = ResourceModel::memory(&["x"], &[0, 1], true, None).map_err(|e| e.to_string())?;
    let mxy = ResourceModel::memory(&["x", "y"], &[0, 1], true, None).map_err(|e| e.to_string())?;
    let fx = mx.fibre(ObjId(1)).map_err(|e| e.to_string())?;
    // At {x}: ∅ holds one heap and {x} three, and restriction-closure is
    // the only constraint, so 1 + 2^3 predicates.
    let n = sheafsep::pred::all_predicates(&fx).map_err(|e| e.to_string())?.len();
    ensure(n == 9, format!("expected 9 predicates at {{x}}, found {n}"))?;
    let exhaustive = laws::residuation(Some(&fx), &fx, 0, 0);
    ensure(exhaustive.checked == 729, "exhaustive run missed triples")?;
    let sampled = laws::residuation(None, &mxy.fibre(ObjId(3)).map_err(|e| e.to_string())?, 500, 11);
    for r in [&exhaustive, &sampled] {
        ensure(r.passed(), r.violations.join("\n"))?;
    }
    Ok(format!("{} exhaustive + {} sampled triples", exhaustive.checked, sampled.checked))
}

fn adjunction() -> Outcome {
    let m = ResourceModel::memory(&["x", "y"], &[0, 1], true, Some(MonoidVariant::Total)).map_err(|e| e.to_string())?;
    let mon = m.monoid().unwrap();
    let stage = ObjId(3);
    let dec = Arc::new(Fibre::new(m.coverage().clone(), mon.decomp().clone(), stage).map_err(|e| e.to_string())?);
    let mp = m.fibre(stage).map_err(|e| e.to_string())?;
    let r1 = laws::adjunction(mon.mult(), &dec, &mp, 100, 21);
    let (matching, iso) = m.amalgamation().map_err(|e| e.to_string())?;
    let mf = Arc::new(Fibre::new(m.coverage().clone(), matching.presheaf().clone(), stage).map_err(|e| e.to_string())?);
    let r2 = laws::adjunction(&iso.forward, &mf, &mp, 100, 22);
    let mut cases = 0;
    for r in [&r1, &r2] {
        ensure(r.passed(), format!("{}: {}", r.name, r.violations.join("\n")))?;
        cases += r.checked / 5;
    }
    ensure(cases == 200, format!("{cases} cases"))?;
    Ok(format!("{cases} cases over the multiplication and the amalgamation map"))
}

fn monoid_laws() -> Outcome {
    let c = powerset(&["x", "y"]);
    let mp = Arc::new(build_resource_sheaf(c, &ResourceKind::PartialMemory { values: vec![0, 1] }).unwrap());
    let mut checked = 0;
    for v in VARIANTS {
        let mon = build_memory_monoid(mp.clone(), v).map_err(|e| e.to_string())?;
        let r = laws::monoid_laws(&mon);
        ensure(r.passed(), format!("{}: {}", r.name, r.violations.join("\n")))?;
        // 16 heaps: 2 unit checks each, 16² commutativity pairs, 16³ triples.
        ensure(r.checked == 16 * 2 + 16 * 16 + 16 * 16 * 16, format!("{} checks", r.checked))?;
        checked += r.checked;
    }
    Ok(format!("{checked} checks over 3 variants"))
}

fn yoneda_monoidal() -> Outcome {
    let c = powerset(&["x", "y", "z"]);
    let yo: Vec<Arc<_>> =
        c.objects().map(|a| Arc::new(build_resource_sheaf(c.clone(), &ResourceKind::Yoneda(a)).unwrap())).collect();
    for a in c.objects() {
        for b in c.objects() {
            let co = day_coend(&yo[a.0], &yo[b.0]).map_err(|e| e.to_string())?;
            let ab = c.subset(c.mask(a) | c.mask(b)).unwrap();
            let cmp = yoneda_comparison(&co, &yo[ab.0]).map_err(|e| e.to_string())?;
            let ok = cmp.is_total()
                && cmp.injectivity_violations().is_empty()
                && cmp.surjectivity_violations().is_empty()
                && cmp.naturality_violations().is_empty();
            ensure(ok, format!("Yo({}) ⊛ Yo({}) is not Yo({})", c.obj_label(a), c.obj_label(b), c.obj_label(ab)))?;
            // Independently: one class exactly at stages inside A ∪ B.
            for u in c.objects() {
                let expected = usize::from(c.mask(u) & !c.mask(ab) == 0);
                ensure(co.n_classes(u) == expected, "class count differs from Yo(A ∪ B)")?;
            }
        }
    }
    let cx = powerset(&["x"]);
    let mp = Arc::new(build_resource_sheaf(cx.clone(), &ResourceKind::PartialMemory { values: vec![0, 1] }).unwrap());
    let mon = build_memory_monoid(mp.clone(), MonoidVariant::Total).map_err(|e| e.to_string())?;
    let co = day_coend(&mp, &mp).map_err(|e| e.to_string())?;
    let x = ObjId(1);
    let triple = |r: ObjId, t: Element| DecompElement {
        stage: x,
        left_obj: x,
        right_obj: r,
        witness: cx.id(x),
        left: heap(1, &[(0, 0)]),
        right: t,
    };
    let (conflict, lone) = (triple(x, heap(1, &[(0, 1)])), triple(ObjId(0), heap(0, &[])));
    ensure(co.class_of(&conflict) == co.class_of(&lone), "witness triples are in different classes")?;
    let m1 = mon.mult_heaps(conflict.left.as_heap().unwrap(), conflict.right.as_heap().unwrap());
    let m2 = mon.mult_heaps(lone.left.as_heap().unwrap(), lone.right.as_heap().unwrap());
    ensure(m1 == Some(Heap::from_pairs(1, &[]).unwrap()) && m2 == Some(Heap::from_pairs(1, &[(0, 0)]).unwrap()), "products do not differ as x:⊥ vs x:0")?;
    ensure(dinaturality_witness(&mon, &co).is_some(), "search found no witness")?;
    Ok("64 pairs isomorphic; non-dinaturality witness present".into())
}

fn sheaf_checks() -> Outcome {
    let c = powerset(&["x", "y", "z"]);
    let cov = build_coverage(c.clone(), CoverageKind::DownwardClosed).unwrap();
    for kind in [ResourceKind::StrictMemory { values: vec![0, 1] }, ResourceKind::PartialMemory { values: vec![0, 1] }] {
        let p = build_resource_sheaf(c.clone(), &kind).unwrap();
        let r = check_sheaf(&p, &cov, &SheafMode::Exhaustive).map_err(|e| e.to_string())?;
        ensure(r.is_sheaf(), format!("{} fails: {:?}", kind.label(), r.failures.first()))?;
    }
    let c2 = powerset(&["x", "y"]);
    let cov2 = build_coverage(c2.clone(), CoverageKind::DownwardClosed).unwrap();
    let sb = build_resource_sheaf(c2.clone(), &ResourceKind::SupportBounded { values: vec![0, 1], k: 1 }).unwrap();
    let r = check_sheaf(&sb, &cov2, &SheafMode::Exhaustive).map_err(|e| e.to_string())?;
    let witness = r.failures.iter().any(|f| match f {
        SheafFailure::NoAmalgamation { object, family, .. } => {
            object == "{x,y}" && family.contains("x:") && family.contains("y:") && !family.contains('⊥')
        }
        _ => false,
    });
    ensure(witness, "support-bounded(1) lacks the σ_x/σ_y witness")?;
    let fs = Arc::new(build_finsurj_category(2).unwrap());
    let sites = [
        build_coverage(c.clone(), CoverageKind::DownwardClosed),
        build_coverage(c.clone(), CoverageKind::FiniteCovers),
        build_coverage(fs, CoverageKind::Atomic),
    ];
    for s in sites {
        let s = s.map_err(|e| e.to_string())?;
        let v = validate_coverage(s.base(), &s).map_err(|e| e.to_string())?;
        ensure(v.is_empty(), format!("{} coverage invalid: {:?}", s.kind(), v.first()))?;
    }
    Ok(format!("M, M_p sheaves; support-bounded fails {} ways; 3 coverages valid", r.failures.len()))
}

/// `⟦x ↪ 0⟧` at stage `V`, straight from its definition.
fn naive_nonstrict(h: &Heap) -> bool {
    !h.in_stage(0) || h.get(0) == Some(0)
}

fn kripke_implication() -> Outcome {
    let m = ResourceModel::memory(&["x"], &[0, 1], true, None).map_err(|e| e.to_string())?;
    let x = ObjId(1);
    let pred = eval_formula(&m, &parse_formula("x ~> 0 -> F").unwrap(), x, Mode::Unfolded).map_err(|e| e.to_string())?;
    let fib = pred.fibre().clone();
    let p = m.resource();
    ensure(pred.family(fib.identity_slot()).count_ones(..) == 0, "⟦(x↪0)→⊥⟧ is not empty at {x}")?;
    // σ ∈ ⟦φ → ⊥⟧(V) iff no restriction σ|W (W ⊆ V) satisfies φ.
    for slot in 0..fib.n_slots() {
        let v = fib.slot_dom(slot).0 as u32;
        for (i, e) in p.at(fib.slot_dom(slot)).iter().enumerate() {
            let h = e.as_heap().unwrap();
            let naive = (0..=v).filter(|w| w & !v == 0).all(|w| !naive_nonstrict(&h.restrict(w)));
            ensure(pred.contains(slot, i) == naive, format!("disagreement at {}", e.render(m.resource().locations())))?;
        }
    }
    Ok("empty at {x}; naive evaluator agrees at every slot".into())
}

fn canonical_values(k: usize, max_values: usize) -> Vec<Vec<usize>> {
    set_partitions(k).into_iter().filter(|p| p.iter().max().map_or(0, |m| m + 1) <= max_values).collect()
}

fn positive_compositions(total: i64, k: usize) -> Vec<Vec<i64>> {
    if k == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    (1..=total - (k as i64 - 1))
        .flat_map(|first| {
            positive_compositions(total - first, k - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn dist_atom(var: &str, law: BTreeMap<i64, Ratio<i64>>) -> Formula {
    Formula::DistAtom { var: var.into(), dist: law }
}

fn psl() -> Outcome {
    let unif = parse_formula("X ~ {0: 1/2, 1: 1/2} * Y ~ {0: 1/2, 1: 1/2}").unwrap();
    let bits: BTreeMap<String, RandomVariable> = [
        ("X".to_string(), RandomVariable(vec![0, 0, 1, 1])),
        ("Y".to_string(), RandomVariable(vec![0, 1, 0, 1])),
    ]
    .into_iter()
    .collect();
    let r = psl_sat(&ProbSpace::uniform(4), &unif, &bits).map_err(|e| e.to_string())?;
    ensure(r.holds, "uniform two-bit space fails")?;
    let w = r.witness.ok_or("no witness")?;
    ensure(w.left == vec![0, 0, 1, 1] && w.right == vec![0, 1, 0, 1], "witness is not the bit projections")?;
    let half = Ratio::new(1, 2);
    let zero = Ratio::new(0, 1);
    let corr = ProbSpace::discrete(vec![half, zero, zero, half]).unwrap();
    ensure(!psl_sat(&corr, &unif, &bits).map_err(|e| e.to_string())?.holds, "correlated space satisfies")?;

    let spaces: Vec<ProbSpace> = (1..=5)
        .flat_map(set_partitions)
        .flat_map(|part| {
            let k = part.iter().max().unwrap() + 1;
            positive_compositions(6, k)
                .into_iter()
                .map(move |comp| {
                    ProbSpace::from_blocks(part.clone(), comp.into_iter().map(|c| Ratio::new(c, 6)).collect()).unwrap()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let checked: Result<Vec<usize>, String> = spaces
        .par_iter()
        .map(|sp| {
            let vars: Vec<RandomVariable> = canonical_values(sp.n_blocks(), 3)
                .into_iter()
                .map(|vals| RandomVariable((0..sp.n()).map(|p| vals[sp.block_of(p)] as i64).collect()))
                .collect();
            let mut count = 0;
            for x in &vars {
                for y in &vars {
                    let env: BTreeMap<String, RandomVariable> =
                        [("X".to_string(), x.clone()), ("Y".to_string(), y.clone())].into_iter().collect();
                    let phi = Formula::star(
                        dist_atom("X", law_of(x, sp).unwrap()),
                        dist_atom("Y", law_of(y, sp).unwrap()),
                    );
                    let star = psl_sat(sp, &phi, &env).map_err(|e| e.to_string())?.holds;
                    let oracle = independence_oracle(sp, x, y).map_err(|e| e.to_string())?;
                    if star != oracle {
                        return Err(format!("{sp}: X={:?} Y={:?} star {star} oracle {oracle}", x.0, y.0));
                    }
                    count += 1;
                }
            }
            Ok(count)
        })
        .collect();
    let total: usize = checked?.into_iter().sum();
    Ok(format!("examples hold; {} spaces, {total} variable pairs agree with the oracle", spaces.len()))
}

fn gluing() -> Outcome {
    let m = ResourceModel::memory(&["x", "y"], &[0, 1], true, None).map_err(|e| e.to_string())?;
    let c = m.resource().base().clone();
    let (x, y, xy) = (ObjId(1), ObjId(2), ObjId(3));
    let (fx, fy, fxy) = (m.fibre(x).unwrap(), m.fibre(y).unwrap(), m.fibre(xy).unwrap());
    let px = eval_formula(&m, &parse_formula("x ~> 0").unwrap(), x, Mode::Unfolded).map_err(|e| e.to_string())?;
    let py = eval_formula(&m, &parse_formula("y ~> 1").unwrap(), y, Mode::Unfolded).map_err(|e| e.to_string())?;
    let (ix, iy) = (c.arrow(x, xy).unwrap(), c.arrow(y, xy).unwrap());
    let parts: BTreeMap<_, _> = [(ix, px.clone()), (iy, py.clone())].into_iter().collect();
    let cover = Sieve::generated(&c, xy, &[ix, iy]).map_err(|e| e.to_string())?;
    let glued = glue_predicates(fxy.clone(), &cover, &parts).map_err(|e| e.to_string())?;
    ensure(glued.restrict_along(fx.clone(), ix).unwrap() == px, "glued predicate does not restrict to P_{x}")?;
    ensure(glued.restrict_along(fy.clone(), iy).unwrap() == py, "glued predicate does not restrict to P_{y}")?;
    let raw = all_families(&fxy).map_err(|e| e.to_string())?;
    ensure(raw.len() == 65536, "expected 2^16 candidate families")?;
    let matches: Vec<&KripkePredicate> = raw
        .iter()
        .filter(|q| {
            q.is_closed()
                && q.restrict_along(fx.clone(), ix).unwrap() == px
                && q.restrict_along(fy.clone(), iy).unwrap() == py
        })
        .collect();
    ensure(matches.len() == 1 && *matches[0] == glued, format!("{} families restrict to the parts", matches.len()))?;
    Ok("unique among 65536 families".into())
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        (1, "matching-object worked example", Duration::from_secs(1), matching_example),
        (2, "amalgamation isomorphism on three locations", Duration::from_secs(30), amalgamation_iso),
        (3, "weak/strong divergence", Duration::from_secs(1), weak_strong_divergence),
        (4, "pipeline-oracle equivalence", Duration::from_secs(60), pipeline_oracle),
        (5, "Heyting residuation", Duration::from_secs(60), residuation),
        (6, "image/preimage adjunction", Duration::from_secs(30), adjunction),
        (7, "monoid laws", Duration::from_secs(30), monoid_laws),
        (8, "Yoneda strong monoidality and non-dinaturality", Duration::from_secs(10), yoneda_monoidal),
        (9, "sheaf and coverage checks", Duration::from_secs(30), sheaf_checks),
        (10, "Kripke implication", Duration::from_secs(1), kripke_implication),
        (11, "probabilistic separation", Duration::from_secs(120), psl),
        (12, "predicate gluing", Duration::from_secs(30), gluing),
    ];
    let mut failed = Vec::new();
    for (id, title, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (status, detail) = match (&outcome, elapsed <= budget) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("over budget; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        println!(
            "criterion {id:>2} {status} {title} ({:.2}s of {}s): {detail}",
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if status == "FAIL" {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("all 12 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
