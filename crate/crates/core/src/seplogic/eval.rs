use std::sync::Arc;

use serde::Serialize;

use super::formula::Formula;
use super::model::{atom_predicate, Mode, ResourceModel};
use super::SeplogicError;
use crate::day::MonoidVariant;
use crate::element::{Element, Heap};
use crate::fincat::{subset_label, ObjId};
use crate::pred::{combine_alpha, Fibre, KripkePredicate};

/// The split witnessing a separating conjunction at the stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarWitness {
    pub left_stage: String,
    pub right_stage: String,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SatResult {
    pub result: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<StarWitness>,
    pub stage: String,
    pub element: String,
}

pub fn eval_formula(model: &ResourceModel, phi: &Formula, stage: ObjId, mode: Mode) -> Result<KripkePredicate, SeplogicError> {
    model.check_formula(phi)?;
    eval_at(model, phi, &model.fibre(stage)?, mode)
}

fn eval_at(model: &ResourceModel, phi: &Formula, fibre: &Arc<Fibre>, mode: Mode) -> Result<KripkePredicate, SeplogicError> {
    Ok(match phi {
        Formula::Top => KripkePredicate::top(fibre.clone()),
        Formula::Bottom => KripkePredicate::bottom(fibre.clone()),
        Formula::And(a, b) => eval_at(model, a, fibre, mode)?.meet(&eval_at(model, b, fibre, mode)?)?,
        Formula::Or(a, b) => eval_at(model, a, fibre, mode)?.join(&eval_at(model, b, fibre, mode)?)?,
        Formula::Imp(a, b) => eval_at(model, a, fibre, mode)?.implication(&eval_at(model, b, fibre, mode)?)?,
        Formula::Star(a, b) => {
            let p = eval_at(model, a, fibre, mode)?;
            let q = eval_at(model, b, fibre, mode)?;
            sep_conj(model, &p, &q, mode)?
        }
        atom => atom_predicate(model, atom, fibre.clone())?,
    })
}

/// Separating conjunction of two predicates at the same stage.
pub fn sep_conj(model: &ResourceModel, p: &KripkePredicate, q: &KripkePredicate, mode: Mode) -> Result<KripkePredicate, SeplogicError> {
    let monoid = model.monoid().ok_or(SeplogicError::NoMonoid)?;
    match mode {
        Mode::Unfolded => unfolded(model, monoid.variant(), p, q),
        Mode::Pipeline => {
            let pipe = model.pipeline()?;
            let stage = p.fibre().stage();
            let decomp = Arc::new(Fibre::new(model.coverage().clone(), monoid.decomp().clone(), stage)?);
            let combined = combine_alpha(p, q, decomp)?;
            let matched = Arc::new(Fibre::new(model.coverage().clone(), pipe.matching.presheaf().clone(), stage)?);
            let in_match = combined.direct_image(&pipe.to_match, matched)?;
            Ok(in_match.direct_image(&pipe.iso.forward, p.fibre().clone())?)
        }
    }
}

/// `m = m_{U1,U2}(m1, m2)`: cells seen by one side keep that side's value,
/// shared cells keep a common value and become ⊥ on a conflict.
fn total_comprehension(m: &Heap, u1: u32, u2: u32, m1: &Heap, m2: &Heap) -> bool {
    (0..32).filter(|l| m.stage() & (1 << l) != 0).all(|l| {
        let bit = 1 << l;
        let expected = if u1 & bit != 0 && u2 & bit == 0 {
            m1.get(l)
        } else if u2 & bit != 0 && u1 & bit == 0 {
            m2.get(l)
        } else if m1.get(l) == m2.get(l) {
            m1.get(l)
        } else {
            None
        };
        m.get(l) == expected
    })
}

/// `m1` and `m2` agree on `U1 ∩ U2` and `m = m1 ∪ m2`.
fn weak_comprehension(m: &Heap, u1: u32, u2: u32, m1: &Heap, m2: &Heap) -> bool {
    let overlap = u1 & u2;
    let agree = (0..32).filter(|l| overlap & (1 << l) != 0).all(|l| m1.get(l) == m2.get(l));
    agree
        && (0..32).filter(|l| m.stage() & (1 << l) != 0).all(|l| {
            let v = if u1 & (1 << l) != 0 { m1.get(l) } else { m2.get(l) };
            m.get(l) == v
        })
}

/// `U1 ∩ U2 = ∅` and `m = m1 ⊎ m2`.
fn strong_comprehension(m: &Heap, u1: u32, u2: u32, m1: &Heap, m2: &Heap) -> bool {
    u1 & u2 == 0
        && (0..32).filter(|l| m.stage() & (1 << l) != 0).all(|l| {
            let v = if u1 & (1 << l) != 0 { m1.get(l) } else { m2.get(l) };
            m.get(l) == v
        })
}

fn comprehension(variant: MonoidVariant) -> fn(&Heap, u32, u32, &Heap, &Heap) -> bool {
    match variant {
        MonoidVariant::Total => total_comprehension,
        MonoidVariant::Weak => weak_comprehension,
        MonoidVariant::Strong => strong_comprehension,
    }
}

/// Splits of the slot's stage `V` into `U1 ∪ U2 = V` with members of `p` at
/// `U1` and `q` at `U2`, in lexicographic order of `(U1, U2, m1, m2)`.
fn splits<'a>(
    p: &'a KripkePredicate,
    q: &'a KripkePredicate,
    v: u32,
) -> impl Iterator<Item = (u32, u32, &'a Heap, &'a Heap)> + 'a {
    let fib = p.fibre();
    let res = fib.resource();
    let c = res.base();
    let stage = fib.stage();
    let slot_at = move |u: u32| fib.slot_of(c.arrow(c.subset(u).unwrap(), stage).unwrap()).unwrap();
    (0..=v).filter(move |u1| u1 & !v == 0).flat_map(move |u1| {
        (0..=v).filter(move |u2| u2 & !v == 0 && (u1 | u2) == v).flat_map(move |u2| {
            let (s1, s2) = (slot_at(u1), slot_at(u2));
            let (o1, o2) = (c.subset(u1).unwrap(), c.subset(u2).unwrap());
            p.family(s1).ones().flat_map(move |i| {
                let m1 = res.section(o1, i).as_heap().unwrap();
                q.family(s2).ones().map(move |j| (u1, u2, m1, res.section(o2, j).as_heap().unwrap()))
            })
        })
    })
}

fn unfolded(model: &ResourceModel, variant: MonoidVariant, p: &KripkePredicate, q: &KripkePredicate) -> Result<KripkePredicate, SeplogicError> {
    if p.fibre().stage() != q.fibre().stage() {
        return Err(crate::pred::PredError::FibreMismatch.into());
    }
    let fib = p.fibre().clone();
    let res = model.resource().clone();
    let c = res.base().clone();
    let holds = comprehension(variant);
    Ok(KripkePredicate::from_fn(fib.clone(), |slot, e| {
        let m = e.as_heap().expect("heap sections");
        let v = c.mask(fib.slot_dom(slot));
        splits(p, q, v).any(|(u1, u2, m1, m2)| holds(m, u1, u2, m1, m2))
    }))
}

/// Membership of `element` in the denotation at the stage; a top-level
/// separating conjunction also reports the least witnessing split.
pub fn sat(model: &ResourceModel, phi: &Formula, stage: ObjId, element: &Element, mode: Mode) -> Result<SatResult, SeplogicError> {
    let locs = model.locations().to_vec();
    let res = model.resource();
    let idx = res.index_of(stage, element).ok_or_else(|| SeplogicError::ElementNotAtStage {
        element: element.render(Some(&locs)),
        stage: res.base().obj_label(stage).into(),
    })?;
    let pred = eval_formula(model, phi, stage, mode)?;
    let result = pred.holds_at_stage(idx);
    let mut witness = None;
    if let (true, Formula::Star(a, b)) = (result, phi) {
        let fibre = model.fibre(stage)?;
        let p = eval_at(model, a, &fibre, mode)?;
        let q = eval_at(model, b, &fibre, mode)?;
        let variant = model.monoid().ok_or(SeplogicError::NoMonoid)?.variant();
        let holds = comprehension(variant);
        let m = element.as_heap().expect("heap sections");
        witness = splits(&p, &q, res.base().mask(stage)).find(|&(u1, u2, m1, m2)| holds(m, u1, u2, m1, m2)).map(
            |(u1, u2, m1, m2)| StarWitness {
                left_stage: subset_label(&locs, u1),
                right_stage: subset_label(&locs, u2),
                left: m1.render(&locs),
                right: m2.render(&locs),
            },
        );
    }
    Ok(SatResult { result, witness, stage: res.base().obj_label(stage).into(), element: element.render(Some(&locs)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seplogic::parse_formula;

    fn model(v: MonoidVariant) -> ResourceModel {
        ResourceModel::memory(&["x", "y"], &[0, 1], true, Some(v)).unwrap()
    }

    fn heap(m: &ResourceModel, stage: u32, cells: &[(usize, i64)]) -> Element {
        let _ = m;
        Element::Heap(Heap::from_pairs(stage, cells).unwrap())
    }

    #[test]
    fn weak_and_strong_diverge() {
        let phi = parse_formula("x |->! 0 * x |->! 0").unwrap();
        for mode in [Mode::Unfolded, Mode::Pipeline] {
            let weak = model(MonoidVariant::Weak);
            let x = weak.stage("{x}").unwrap();
            let r = sat(&weak, &phi, x, &heap(&weak, 1, &[(0, 0)]), mode).unwrap();
            assert!(r.result);
            let w = r.witness.unwrap();
            assert_eq!((w.left_stage.as_str(), w.right_stage.as_str()), ("{x}", "{x}"));
            let strong = model(MonoidVariant::Strong);
            let r = sat(&strong, &phi, x, &heap(&strong, 1, &[(0, 0)]), mode).unwrap();
            assert!(!r.result);
            assert!(r.witness.is_none());
        }
    }

    #[test]
    fn disjoint_split_in_every_variant() {
        let phi = parse_formula("x |->! 0 * y |->! 1").unwrap();
        for v in [MonoidVariant::Total, MonoidVariant::Weak, MonoidVariant::Strong] {
            let m = model(v);
            let r = sat(&m, &phi, ObjId(3), &heap(&m, 3, &[(0, 0), (1, 1)]), Mode::Unfolded).unwrap();
            assert!(r.result, "{v}");
            assert_eq!(r.witness.unwrap().left_stage, "{x}");
        }
    }

    #[test]
    fn atoms_and_connectives() {
        let m = model(MonoidVariant::Weak);
        let x = m.stage("{x}").unwrap();
        let fib = m.fibre(x).unwrap();
        let id = fib.identity_slot();
        let neg = eval_formula(&m, &parse_formula("x ~> 0 -> F").unwrap(), x, Mode::Unfolded).unwrap();
        assert_eq!(neg.family(id).count_ones(..), 0);
        let either = eval_formula(&m, &parse_formula("x |->! 0 \\/ x |->! 1").unwrap(), x, Mode::Unfolded).unwrap();
        assert_eq!(either.family(id).count_ones(..), 2);
        let r = sat(&m, &parse_formula("x ~> 1").unwrap(), x, &heap(&m, 1, &[(0, 0)]), Mode::Unfolded).unwrap();
        assert!(!r.result);
        let r = sat(&m, &Formula::Top, x, &heap(&m, 1, &[]), Mode::Unfolded).unwrap();
        assert!(r.result);
        let phi = parse_formula("x |-> 0").unwrap();
        let conj = Formula::and(Formula::Top, phi.clone());
        assert_eq!(
            eval_formula(&m, &conj, x, Mode::Unfolded).unwrap(),
            eval_formula(&m, &phi, x, Mode::Unfolded).unwrap()
        );
    }

    #[test]
    fn atom_tables() {
        let m = ResourceModel::memory(&["x", "y"], &[0, 1], true, None).unwrap();
        let empty = m.fibre(ObjId(0)).unwrap();
        let nonstrict = atom_predicate(&m, &parse_formula("x ~> 0").unwrap(), empty.clone()).unwrap();
        assert_eq!(nonstrict.family(empty.identity_slot()).count_ones(..), 1);
        let y = m.fibre(m.stage("{y}").unwrap()).unwrap();
        let alloc = atom_predicate(&m, &parse_formula("x |->! 0").unwrap(), y.clone()).unwrap();
        assert_eq!(alloc.count(), 0);
        let x = m.fibre(m.stage("{x}").unwrap()).unwrap();
        let strict = atom_predicate(&m, &parse_formula("x |-> 0").unwrap(), x.clone()).unwrap();
        assert_eq!(strict.family(x.identity_slot()).count_ones(..), 1);
    }

    #[test]
    fn unknown_identifiers_are_rejected() {
        let m = model(MonoidVariant::Weak);
        assert!(matches!(
            eval_formula(&m, &parse_formula("z |-> 0").unwrap(), ObjId(1), Mode::Unfolded),
            Err(SeplogicError::UnknownLocation(_))
        ));
        assert!(matches!(
            eval_formula(&m, &parse_formula("x |-> 7").unwrap(), ObjId(1), Mode::Unfolded),
            Err(SeplogicError::UnknownValue(7))
        ));
        assert!(matches!(
            eval_formula(&m, &parse_formula("X ~ {0: 1}").unwrap(), ObjId(1), Mode::Unfolded),
            Err(SeplogicError::AtomIncompatible(_))
        ));
        let plain = ResourceModel::memory(&["x"], &[0, 1], true, None).unwrap();
        assert!(matches!(
            eval_formula(&plain, &parse_formula("T * T").unwrap(), ObjId(1), Mode::Unfolded),
            Err(SeplogicError::NoMonoid)
        ));
    }
}
