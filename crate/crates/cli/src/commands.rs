use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::Ratio;
use serde_json::{json, Value};
use sheafsep::fincat::ObjId;
use sheafsep::laws;
use sheafsep::pred::{all_predicates, Fibre};
use sheafsep::presheaf::{amalgamation_operator, check_sheaf, matching_presheaf, validate_presheaf, SheafMode};
use sheafsep::psl::{kripke_holds, psl_sat};
use sheafsep::seplogic::{eval_formula, parse_formula, sat, Formula, Mode, ResourceModel};
use sheafsep::site::validate_coverage;
use sheafsep::{Element, Heap, Presheaf};

use crate::model::{check_references, Model};
use crate::report::{Check, Report};
use crate::CliError;

/// Exhaustive residuation runs only when the cube of the predicate count
/// stays below this.
const EXHAUSTIVE_TRIPLES: usize = 1_000_000;

pub struct Options {
    pub formula: Option<String>,
    pub stage: Option<String>,
    pub heap: Option<String>,
    pub space: Option<String>,
    pub mode: Mode,
    pub seed: u64,
    pub samples: usize,
}

fn memory(model: &Model) -> Result<&ResourceModel, CliError> {
    model.memory.as_ref().ok_or_else(|| CliError::Usage("this command needs a memory resource over a powerset site".into()))
}

fn resource(model: &Model) -> Result<&Arc<Presheaf>, CliError> {
    model.resource.as_ref().ok_or_else(|| CliError::Usage("the model declares no resource".into()))
}

fn formula(model: &Model, opts: &Options) -> Result<Formula, CliError> {
    let text = opts.formula.as_deref().ok_or_else(|| CliError::Usage("--formula is required".into()))?;
    if let Some(phi) = model.formulas.get(text) {
        return Ok(phi.clone());
    }
    let phi = parse_formula(text).map_err(|e| CliError::Formula(e.to_string()))?;
    check_references(&phi, model.memory.as_ref(), &model.variables).map_err(CliError::Formula)?;
    Ok(phi)
}

fn top_stage(m: &ResourceModel) -> ObjId {
    let c = m.resource().base();
    c.subset((1u32 << m.locations().len()) - 1).expect("the full set is an object")
}

fn stage(m: &ResourceModel, opts: &Options) -> Result<ObjId, CliError> {
    match &opts.stage {
        Some(s) => m.stage(s).map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(top_stage(m)),
    }
}

/// Parses `{x:0, y:null}`; `⊥` is accepted for `null`. The heap's stage is
/// the set of listed locations.
pub fn parse_heap(m: &ResourceModel, text: &str) -> Result<Heap, CliError> {
    let bad = |msg: String| CliError::Usage(format!("heap {text:?}: {msg}"));
    let inner = text.trim().strip_prefix('{').and_then(|t| t.strip_suffix('}')).ok_or_else(|| bad("expected braces".into()))?;
    let mut stage = 0u32;
    let mut cells = BTreeMap::new();
    for entry in inner.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (loc, val) = entry.split_once(':').ok_or_else(|| bad(format!("expected loc:value in {entry:?}")))?;
        let l = m.location_index(loc.trim()).map_err(|e| bad(e.to_string()))?;
        if stage & (1 << l) != 0 {
            return Err(bad(format!("{} listed twice", loc.trim())));
        }
        stage |= 1 << l;
        match val.trim() {
            "null" | "⊥" => {}
            v => {
                let v: i64 = v.parse().map_err(|_| bad(format!("bad value {v:?}")))?;
                cells.insert(l, v);
            }
        }
    }
    Ok(Heap::new(stage, cells).expect("cells lie in the stage"))
}

pub fn check_site(model: &Model, report: &mut Report) -> Result<(), CliError> {
    let cov = &model.coverage;
    let violations = validate_coverage(cov.base(), cov).map_err(|e| CliError::Invalid(e.to_string()))?;
    report.check(Check {
        name: format!("{} coverage axioms", cov.kind()),
        passed: violations.is_empty(),
        checked: cov.size(),
        details: violations.iter().map(ToString::to_string).collect(),
    });
    for note in cov.notes() {
        report.text.push_str(&format!("note: {note}\n"));
    }
    Ok(())
}

pub fn check_sheaf_cmd(model: &Model, report: &mut Report) -> Result<(), CliError> {
    let p = resource(model)?;
    let functor = validate_presheaf(p);
    report.check(Check {
        name: format!("{} is a presheaf", p.name()),
        passed: functor.is_empty(),
        checked: p.base().n_morphisms(),
        details: functor.iter().map(ToString::to_string).collect(),
    });
    let r = check_sheaf(p, &model.coverage, &SheafMode::Exhaustive).map_err(|e| CliError::Invalid(e.to_string()))?;
    report.check(Check {
        name: format!("{} sheaf condition", p.name()),
        passed: r.is_sheaf(),
        checked: r.families_checked,
        details: r.failures.iter().map(ToString::to_string).collect(),
    });
    Ok(())
}

pub fn laws_cmd(model: &Model, opts: &Options, report: &mut Report) -> Result<(), CliError> {
    let m = memory(model)?;
    let lift = |e: sheafsep::seplogic::SeplogicError| CliError::Invalid(e.to_string());
    let top = stage(m, opts)?;
    let top_fibre = m.fibre(top).map_err(lift)?;
    let c = m.resource().base();
    let small = c.objects().find(|&a| c.mask(a).count_ones() == 1).unwrap_or(top);
    let small_fibre = m.fibre(small).map_err(lift)?;
    let exhaustive = all_predicates(&small_fibre).ok().filter(|all| all.len().pow(3) <= EXHAUSTIVE_TRIPLES).map(|_| &small_fibre);
    report.check(laws::residuation(exhaustive, &top_fibre, opts.samples, opts.seed).into());
    report.check(laws::heyting_structure(&top_fibre, opts.samples, opts.seed + 1).into());

    let matching = matching_presheaf(m.resource(), m.coverage()).map_err(|e| CliError::Invalid(e.to_string()))?;
    let iso = amalgamation_operator(m.resource(), m.coverage(), &matching).map_err(|e| CliError::Invalid(e.to_string()))?;
    report.check(Check {
        name: "amalgamation isomorphism".into(),
        passed: iso.is_iso(),
        checked: c.objects().map(|a| m.resource().len_at(a)).sum(),
        details: iso.bijectivity.iter().chain(&iso.naturality).take(20).cloned().collect(),
    });
    let match_fibre = Arc::new(Fibre::new(m.coverage().clone(), matching.presheaf().clone(), top).map_err(|e| CliError::Invalid(e.to_string()))?);
    if iso.forward.is_total() {
        report.check(laws::adjunction(&iso.forward, &match_fibre, &top_fibre, opts.samples, opts.seed + 2).into());
    }
    report.check(laws::day_stability(m.coverage(), &[m.resource().clone()], &[]).into());

    if let Some(mon) = m.monoid() {
        report.check(laws::monoid_laws(mon).into());
        if mon.mult().is_total() {
            let dec = Arc::new(Fibre::new(m.coverage().clone(), mon.decomp().clone(), top).map_err(|e| CliError::Invalid(e.to_string()))?);
            report.check(laws::adjunction(mon.mult(), &dec, &top_fibre, opts.samples, opts.seed + 3).into());
        }
        report.check(laws::pipeline_vs_unfolded(m, top, opts.samples, opts.seed + 4).into());
        report.check(laws::star_properties(m, top, opts.samples, opts.seed + 5).into());
    }
    Ok(())
}

pub fn eval_cmd(model: &Model, opts: &Options, report: &mut Report) -> Result<(), CliError> {
    let m = memory(model)?;
    let phi = formula(model, opts)?;
    let st = stage(m, opts)?;
    let pred = eval_formula(m, &phi, st, opts.mode).map_err(|e| CliError::Formula(e.to_string()))?;
    let fib = pred.fibre();
    let p = m.resource();
    let c = p.base();
    let mut table = serde_json::Map::new();
    for slot in 0..fib.n_slots() {
        let b = fib.slot_dom(slot);
        let items: Vec<Value> = pred.family(slot).ones().map(|i| Value::String(p.render(b, i))).collect();
        table.insert(c.obj_label(b).into(), Value::Array(items));
    }
    let at_stage = pred.family(fib.identity_slot()).count_ones(..);
    let valid = at_stage == p.len_at(st);
    report.check(Check { name: format!("{phi} holds of every section at {}", c.obj_label(st)), passed: valid, checked: p.len_at(st), details: vec![] });
    report.text.push_str(&pred.render());
    report.result = Some(json!({ "formula": phi.to_string(), "stage": c.obj_label(st), "table": table }));
    Ok(())
}

pub fn sat_cmd(model: &Model, opts: &Options, report: &mut Report) -> Result<(), CliError> {
    let m = memory(model)?;
    let phi = formula(model, opts)?;
    let text = opts.heap.as_deref().ok_or_else(|| CliError::Usage("--heap is required".into()))?;
    let h = parse_heap(m, text)?;
    let c = m.resource().base();
    let heap_stage = c.subset(h.stage()).expect("heap stage is a subset");
    let st = match &opts.stage {
        Some(_) => stage(m, opts)?,
        None => heap_stage,
    };
    if st != heap_stage {
        return Err(CliError::Usage(format!("heap {text} does not live at stage {}", c.obj_label(st))));
    }
    let r = sat(m, &phi, st, &Element::Heap(h), opts.mode).map_err(|e| CliError::Formula(e.to_string()))?;
    report.check(Check { name: format!("{} ⊨ {phi}", r.element), passed: r.result, checked: 1, details: vec![] });
    if let Some(w) = &r.witness {
        report.text.push_str(&format!("witness: {} at {} and {} at {}\n", w.left, w.left_stage, w.right, w.right_stage));
    }
    report.result = Some(serde_json::to_value(&r).expect("serializable"));
    Ok(())
}

pub fn psl_cmd(model: &Model, opts: &Options, report: &mut Report) -> Result<(), CliError> {
    let phi = formula(model, opts)?;
    let name = opts.space.as_deref().ok_or_else(|| CliError::Usage("--space is required".into()))?;
    let sp = model.spaces.get(name).ok_or_else(|| CliError::Usage(format!("unknown space {name}")))?;
    let out = psl_sat(sp, &phi, &model.variables).map_err(|e| CliError::Formula(e.to_string()))?;
    report.check(Check { name: format!("{sp} ⊨ {phi}"), passed: out.holds, checked: 1, details: vec![] });
    if let Some(w) = &out.witness {
        report.text.push_str(&format!(
            "witness: components {:?} with measures {:?} and {:?} with measures {:?}\n",
            w.left, w.left_measure, w.right, w.right_measure
        ));
    }
    if !phi.has_star() && sp.n() <= 3 {
        let denominator = sp.measures().iter().fold(1i64, |acc, r: &Ratio<i64>| num_integer::lcm(acc, *r.denom()));
        let kripke = kripke_holds(sp, &phi, &model.variables, denominator).map_err(|e| CliError::Formula(e.to_string()))?;
        report.check(Check {
            name: "stage-indexed evaluation agrees".into(),
            passed: kripke == out.holds,
            checked: 1,
            details: if kripke == out.holds { vec![] } else { vec![format!("stage-indexed result is {kripke}")] },
        });
    }
    report.result = Some(serde_json::to_value(&out).expect("serializable"));
    Ok(())
}
