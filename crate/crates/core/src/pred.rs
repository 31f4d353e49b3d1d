//! Predicates over a resource sheaf at a fixed stage, stored extensionally:
//! one subset of `F(dom p)` for every morphism `p` into the stage.
//!
//! A family is a predicate when it is closed under restriction and has
//! local character (a section whose restrictions along a covering sieve all
//! lie in the family lies in it). Joins and direct images are closed to a
//! fixpoint since pointwise unions of subsheaves need not be subsheaves.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rand::Rng;
use thiserror::Error;

use crate::fincat::{MorId, ObjId};
use crate::presheaf::{Presheaf, SheafMorphism};
use crate::site::{Coverage, Sieve};

/// Largest number of (slot, section) bits enumerated by [`all_families`].
pub const ENUMERATION_BITS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PredError {
    #[error("predicates live at different stages or over different resources")]
    FibreMismatch,
    #[error("morphism does not relate the two fibres")]
    MorphismMismatch,
    #[error("map is not natural: {0}")]
    NonNatural(String),
    #[error("parts are incompatible: {0}")]
    Incompatible(String),
    #[error("{0}")]
    NotCovering(String),
    #[error("operation needs a preorder base")]
    NotPoset,
    #[error("glued predicate is malformed: {0}")]
    Malformed(String),
    #[error("{bits} bits exceed the enumeration budget {budget}")]
    BudgetExceeded { bits: usize, budget: usize },
    #[error("coverage and resource live over different bases")]
    BaseMismatch,
}

/// The slice over `stage` with the data needed for closure: for every slot
/// `p` the slice morphisms into it and the covering sieves on `dom p`.
#[derive(Debug)]
pub struct Fibre {
    coverage: Arc<Coverage>,
    resource: Arc<Presheaf>,
    stage: ObjId,
    slots: Vec<MorId>,
    slot_of: HashMap<MorId, usize>,
    /// `(g, slot of p∘g)` for every `g` into `dom p`.
    arrows: Vec<Vec<(MorId, usize)>>,
    /// Non-maximal covering sieves on `dom p`, as `(r, slot of p∘r)` lists.
    covers: Vec<Vec<Vec<(MorId, usize)>>>,
}

impl Fibre {
    pub fn new(coverage: Arc<Coverage>, resource: Arc<Presheaf>, stage: ObjId) -> Result<Fibre, PredError> {
        if !resource.same_base(coverage.base()) {
            return Err(PredError::BaseMismatch);
        }
        let c = resource.base().clone();
        let slots: Vec<MorId> = c.arrows_into(stage).to_vec();
        let slot_of: HashMap<MorId, usize> = slots.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let arrows = slots
            .iter()
            .map(|&p| c.arrows_into(c.src(p)).iter().map(|&g| (g, slot_of[&c.comp(p, g)])).collect())
            .collect();
        let covers = slots
            .iter()
            .map(|&p| {
                let b = c.src(p);
                coverage
                    .covers(b)
                    .iter()
                    .filter(|s| !s.contains(c.id(b)))
                    .map(|s| s.members().iter().map(|&r| (r, slot_of[&c.comp(p, r)])).collect())
                    .collect()
            })
            .collect();
        Ok(Fibre { coverage, resource, stage, slots, slot_of, arrows, covers })
    }

    pub fn coverage(&self) -> &Arc<Coverage> {
        &self.coverage
    }

    pub fn resource(&self) -> &Arc<Presheaf> {
        &self.resource
    }

    pub fn stage(&self) -> ObjId {
        self.stage
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn slot_morphism(&self, slot: usize) -> MorId {
        self.slots[slot]
    }

    pub fn slot_of(&self, m: MorId) -> Option<usize> {
        self.slot_of.get(&m).copied()
    }

    /// Domain of the slot's morphism.
    pub fn slot_dom(&self, slot: usize) -> ObjId {
        self.resource.base().src(self.slots[slot])
    }

    pub fn identity_slot(&self) -> usize {
        self.slot_of[&self.resource.base().id(self.stage)]
    }

    fn slot_len(&self, slot: usize) -> usize {
        self.resource.len_at(self.slot_dom(slot))
    }

    fn matches(&self, other: &Fibre) -> bool {
        self.stage == other.stage && Arc::ptr_eq(&self.resource, &other.resource)
    }

    /// Total number of (slot, section) pairs.
    pub fn bits(&self) -> usize {
        (0..self.n_slots()).map(|s| self.slot_len(s)).sum()
    }
}

#[derive(Clone, Debug)]
pub struct KripkePredicate {
    fibre: Arc<Fibre>,
    family: Vec<FixedBitSet>,
}

impl PartialEq for KripkePredicate {
    fn eq(&self, other: &Self) -> bool {
        self.fibre.matches(&other.fibre) && self.family == other.family
    }
}

impl Eq for KripkePredicate {}

impl KripkePredicate {
    fn empty_family(fibre: &Fibre) -> Vec<FixedBitSet> {
        (0..fibre.n_slots()).map(|s| FixedBitSet::with_capacity(fibre.slot_len(s))).collect()
    }

    pub fn bottom(fibre: Arc<Fibre>) -> KripkePredicate {
        let family = Self::empty_family(&fibre);
        KripkePredicate { fibre, family }
    }

    pub fn top(fibre: Arc<Fibre>) -> KripkePredicate {
        let mut family = Self::empty_family(&fibre);
        for f in &mut family {
            f.insert_range(..);
        }
        KripkePredicate { fibre, family }
    }

    /// The raw family `{a ∈ F(dom p) | keep(p, a)}`, not closed.
    pub fn from_fn(fibre: Arc<Fibre>, mut keep: impl FnMut(usize, &crate::element::Element) -> bool) -> KripkePredicate {
        let mut family = Self::empty_family(&fibre);
        for (slot, bits) in family.iter_mut().enumerate() {
            for (i, e) in fibre.resource.at(fibre.slot_dom(slot)).iter().enumerate() {
                if keep(slot, e) {
                    bits.insert(i);
                }
            }
        }
        KripkePredicate { fibre, family }
    }

    /// The raw family from explicit bit sets, not closed.
    pub fn from_family(fibre: Arc<Fibre>, family: Vec<FixedBitSet>) -> Result<KripkePredicate, PredError> {
        if family.len() != fibre.n_slots() || family.iter().enumerate().any(|(s, f)| f.len() != fibre.slot_len(s)) {
            return Err(PredError::FibreMismatch);
        }
        Ok(KripkePredicate { fibre, family })
    }

    pub fn fibre(&self) -> &Arc<Fibre> {
        &self.fibre
    }

    pub fn family(&self, slot: usize) -> &FixedBitSet {
        &self.family[slot]
    }

    pub fn families(&self) -> &[FixedBitSet] {
        &self.family
    }

    pub fn contains(&self, slot: usize, i: usize) -> bool {
        self.family[slot].contains(i)
    }

    /// Membership at the identity slot.
    pub fn holds_at_stage(&self, i: usize) -> bool {
        self.contains(self.fibre.identity_slot(), i)
    }

    pub fn count(&self) -> usize {
        self.family.iter().map(|f| f.count_ones(..)).sum()
    }

    fn check(&self, other: &KripkePredicate) -> Result<(), PredError> {
        if self.fibre.matches(&other.fibre) {
            Ok(())
        } else {
            Err(PredError::FibreMismatch)
        }
    }

    pub fn is_subset(&self, other: &KripkePredicate) -> Result<bool, PredError> {
        self.check(other)?;
        Ok(self.family.iter().zip(&other.family).all(|(a, b)| a.is_subset(b)))
    }

    /// Smallest restriction-closed, locally closed family containing this one.
    pub fn closure(&self) -> KripkePredicate {
        let fib = &self.fibre;
        let p = &fib.resource;
        let mut family = self.family.clone();
        loop {
            let mut changed = false;
            for slot in 0..fib.n_slots() {
                let members: Vec<usize> = family[slot].ones().collect();
                for &(g, q) in &fib.arrows[slot] {
                    for &a in &members {
                        let r = p.restrict_idx(g, a);
                        if !family[q].put(r) {
                            changed = true;
                        }
                    }
                }
            }
            for slot in 0..fib.n_slots() {
                for a in 0..fib.slot_len(slot) {
                    if family[slot].contains(a) {
                        continue;
                    }
                    let local = fib.covers[slot]
                        .iter()
                        .any(|cover| cover.iter().all(|&(r, q)| family[q].contains(p.restrict_idx(r, a))));
                    if local {
                        family[slot].insert(a);
                        changed = true;
                    }
                }
            }
            if !changed {
                return KripkePredicate { fibre: self.fibre.clone(), family };
            }
        }
    }

    /// Restriction-closure and locality failures, one line each.
    pub fn validate(&self) -> Vec<String> {
        let fib = &self.fibre;
        let p = &fib.resource;
        let c = p.base();
        let mut out = Vec::new();
        for slot in 0..fib.n_slots() {
            let b = fib.slot_dom(slot);
            for a in self.family[slot].ones() {
                for &(g, q) in &fib.arrows[slot] {
                    let r = p.restrict_idx(g, a);
                    if !self.family[q].contains(r) {
                        out.push(format!(
                            "{} at {} restricts along {} to {}, which is outside the family",
                            p.render(b, a),
                            c.mor_label(fib.slots[slot]),
                            c.mor_label(g),
                            p.render(c.src(g), r)
                        ));
                    }
                }
            }
            for a in (0..fib.slot_len(slot)).filter(|&a| !self.family[slot].contains(a)) {
                if fib.covers[slot].iter().any(|cv| cv.iter().all(|&(r, q)| self.family[q].contains(p.restrict_idx(r, a)))) {
                    out.push(format!("{} at {} is locally but not globally in the family", p.render(b, a), c.mor_label(fib.slots[slot])));
                }
            }
        }
        out
    }

    pub fn is_closed(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn meet(&self, other: &KripkePredicate) -> Result<KripkePredicate, PredError> {
        self.check(other)?;
        let family = self
            .family
            .iter()
            .zip(&other.family)
            .map(|(a, b)| {
                let mut x = a.clone();
                x.intersect_with(b);
                x
            })
            .collect();
        Ok(KripkePredicate { fibre: self.fibre.clone(), family })
    }

    pub fn join(&self, other: &KripkePredicate) -> Result<KripkePredicate, PredError> {
        Ok(self.union_raw(other)?.closure())
    }

    /// Stage-wise union without closure.
    pub fn union_raw(&self, other: &KripkePredicate) -> Result<KripkePredicate, PredError> {
        self.check(other)?;
        let family = self
            .family
            .iter()
            .zip(&other.family)
            .map(|(a, b)| {
                let mut x = a.clone();
                x.union_with(b);
                x
            })
            .collect();
        Ok(KripkePredicate { fibre: self.fibre.clone(), family })
    }

    /// At `p`: sections all of whose restrictions in `self` are in `other`.
    pub fn implication(&self, other: &KripkePredicate) -> Result<KripkePredicate, PredError> {
        self.check(other)?;
        let fib = &self.fibre;
        let p = &fib.resource;
        let mut family = Self::empty_family(fib);
        for (slot, bits) in family.iter_mut().enumerate() {
            for a in 0..fib.slot_len(slot) {
                let ok = fib.arrows[slot].iter().all(|&(g, q)| {
                    let r = p.restrict_idx(g, a);
                    !self.family[q].contains(r) || other.family[q].contains(r)
                });
                if ok {
                    bits.insert(a);
                }
            }
        }
        Ok(KripkePredicate { fibre: self.fibre.clone(), family })
    }

    /// The predicate at `src f` obtained by precomposing slots with `f`.
    pub fn restrict_along(&self, target: Arc<Fibre>, f: MorId) -> Result<KripkePredicate, PredError> {
        let c = self.fibre.resource.base();
        if !Arc::ptr_eq(&target.resource, &self.fibre.resource)
            || c.dst(f) != self.fibre.stage
            || c.src(f) != target.stage
        {
            return Err(PredError::FibreMismatch);
        }
        let family =
            (0..target.n_slots()).map(|q| self.family[self.fibre.slot_of[&c.comp(f, target.slots[q])]].clone()).collect();
        Ok(KripkePredicate { fibre: target, family })
    }

    /// Stage-wise preimage along `alpha: F → G`; `self` lives over `G` and the
    /// result over `source` (a fibre of `F` at the same stage).
    pub fn reindex_preimage(&self, alpha: &SheafMorphism, source: Arc<Fibre>) -> Result<KripkePredicate, PredError> {
        if !Arc::ptr_eq(alpha.target(), &self.fibre.resource)
            || !Arc::ptr_eq(alpha.source(), &source.resource)
            || source.stage != self.fibre.stage
        {
            return Err(PredError::MorphismMismatch);
        }
        if let Some(w) = alpha.naturality_violations().into_iter().next() {
            return Err(PredError::NonNatural(w));
        }
        let mut family = Self::empty_family(&source);
        for (slot, bits) in family.iter_mut().enumerate() {
            let b = source.slot_dom(slot);
            for a in 0..source.slot_len(slot) {
                if alpha.apply(b, a).is_some_and(|j| self.family[slot].contains(j)) {
                    bits.insert(a);
                }
            }
        }
        Ok(KripkePredicate { fibre: source, family })
    }

    /// Smallest predicate over `target` (a fibre of `G`) containing the
    /// pointwise image of `self` along the partial map `alpha: F → G`.
    pub fn direct_image(&self, alpha: &SheafMorphism, target: Arc<Fibre>) -> Result<KripkePredicate, PredError> {
        if !Arc::ptr_eq(alpha.source(), &self.fibre.resource)
            || !Arc::ptr_eq(alpha.target(), &target.resource)
            || target.stage != self.fibre.stage
        {
            return Err(PredError::MorphismMismatch);
        }
        let mut family = Self::empty_family(&target);
        for (slot, bits) in family.iter_mut().enumerate() {
            let b = target.slot_dom(slot);
            for a in self.family[slot].ones() {
                if let Some(j) = alpha.apply(b, a) {
                    bits.insert(j);
                }
            }
        }
        Ok(KripkePredicate { fibre: target, family }.closure())
    }

    /// A table with one line per slot listing the members.
    pub fn render(&self) -> String {
        let fib = &self.fibre;
        let p = &fib.resource;
        let c = p.base();
        let mut out = String::new();
        for slot in 0..fib.n_slots() {
            let b = fib.slot_dom(slot);
            out.push_str(c.obj_label(b));
            out.push(':');
            for a in self.family[slot].ones() {
                out.push(' ');
                out.push_str(&p.render(b, a));
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for KripkePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Glues predicates given at the domains of generators of a covering sieve
/// into the unique predicate at the sieve's target restricting to each.
pub fn glue_predicates(
    fibre: Arc<Fibre>,
    cover: &Sieve,
    parts: &BTreeMap<MorId, KripkePredicate>,
) -> Result<KripkePredicate, PredError> {
    let p = fibre.resource.clone();
    let c = p.base().clone();
    if cover.target() != fibre.stage {
        return Err(PredError::FibreMismatch);
    }
    if !fibre.coverage.is_covering(cover) {
        return Err(PredError::NotCovering(format!("{} does not cover {}", cover.render(&c), c.obj_label(fibre.stage))));
    }
    for (&f, part) in parts {
        if !cover.contains(f) || c.src(f) != part.fibre.stage || !Arc::ptr_eq(&part.fibre.resource, &p) {
            return Err(PredError::FibreMismatch);
        }
    }
    let gens: Vec<MorId> = parts.keys().copied().collect();
    let generated = Sieve::generated(&c, fibre.stage, &gens).map_err(|e| PredError::Malformed(e.to_string()))?;
    if &generated != cover {
        return Err(PredError::Malformed("parts do not generate the cover".into()));
    }
    let mut family = KripkePredicate::empty_family(&fibre);
    let mut assigned: Vec<Option<(MorId, usize)>> = vec![None; fibre.n_slots()];
    for (&f, part) in parts {
        for k in 0..part.fibre.n_slots() {
            let slot = fibre.slot_of[&c.comp(f, part.fibre.slots[k])];
            match assigned[slot] {
                None => {
                    family[slot] = part.family[k].clone();
                    assigned[slot] = Some((f, k));
                }
                Some((f0, _)) if family[slot] != part.family[k] => {
                    return Err(PredError::Incompatible(format!(
                        "parts over {} and {} disagree at {}",
                        c.mor_label(f0),
                        c.mor_label(f),
                        c.mor_label(fibre.slots[slot])
                    )));
                }
                Some(_) => {}
            }
        }
    }
    // Slots outside the cover are determined by locality along the pulled
    // back cover, which covers by stability.
    for slot in 0..fibre.n_slots() {
        if assigned[slot].is_some() {
            continue;
        }
        let pm = fibre.slots[slot];
        let legs: Vec<(MorId, usize)> = c
            .arrows_into(c.src(pm))
            .iter()
            .filter_map(|&r| {
                let s = fibre.slot_of[&c.comp(pm, r)];
                assigned[s].map(|_| (r, s))
            })
            .collect();
        for a in 0..fibre.slot_len(slot) {
            if legs.iter().all(|&(r, s)| family[s].contains(p.restrict_idx(r, a))) {
                family[slot].insert(a);
            }
        }
    }
    let glued = KripkePredicate { fibre: fibre.clone(), family };
    if let Some(v) = glued.validate().into_iter().next() {
        return Err(PredError::Incompatible(v));
    }
    for (&f, part) in parts {
        if &glued.restrict_along(part.fibre.clone(), f)? != part {
            return Err(PredError::Incompatible(format!("glued predicate does not restrict to the part over {}", c.mor_label(f))));
        }
    }
    Ok(glued)
}

/// Combines predicates `P`, `Q` over `F` into one over the decomposition
/// presheaf: `((B, C), s, t)` is a member iff `s ∈ P` at `B` and `t ∈ Q` at
/// `C`. Needs a preorder base, where `B` and `C` sit below the stage.
pub fn combine_alpha(p: &KripkePredicate, q: &KripkePredicate, decomp: Arc<Fibre>) -> Result<KripkePredicate, PredError> {
    p.check(q)?;
    let f = p.fibre.resource.clone();
    let c = f.base().clone();
    if !c.is_preorder() {
        return Err(PredError::NotPoset);
    }
    if decomp.stage != p.fibre.stage || !decomp.resource.same_base(&c) {
        return Err(PredError::FibreMismatch);
    }
    let a = p.fibre.stage;
    let pf = &p.fibre;
    let out = KripkePredicate::from_fn(decomp, |_, e| {
        let Some(d) = e.as_decomp() else { return false };
        let inside = |pred: &KripkePredicate, obj: ObjId, x: &crate::element::Element| {
            let Some(m) = c.arrow(obj, a) else { return false };
            let Some(i) = f.index_of(obj, x) else { return false };
            pred.contains(pf.slot_of[&m], i)
        };
        inside(p, d.left_obj, &d.left) && inside(q, d.right_obj, &d.right)
    });
    Ok(out)
}

/// Closure of a handful of random members.
pub fn random_predicate(fibre: Arc<Fibre>, rng: &mut impl Rng, max_generators: usize) -> KripkePredicate {
    let mut family = KripkePredicate::empty_family(&fibre);
    let k = rng.gen_range(0..=max_generators);
    for _ in 0..k {
        let slot = rng.gen_range(0..fibre.n_slots());
        let len = fibre.slot_len(slot);
        if len > 0 {
            family[slot].insert(rng.gen_range(0..len));
        }
    }
    KripkePredicate { fibre, family }.closure()
}

/// Every raw family in the fibre, closed or not, in binary counting order.
pub fn all_families(fibre: &Arc<Fibre>) -> Result<Vec<KripkePredicate>, PredError> {
    let bits = fibre.bits();
    if bits > ENUMERATION_BITS {
        return Err(PredError::BudgetExceeded { bits, budget: ENUMERATION_BITS });
    }
    let layout: Vec<(usize, usize)> =
        (0..fibre.n_slots()).flat_map(|s| (0..fibre.slot_len(s)).map(move |i| (s, i))).collect();
    Ok((0u64..1 << bits)
        .map(|mask| {
            let mut family = KripkePredicate::empty_family(fibre);
            for (b, &(s, i)) in layout.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    family[s].insert(i);
                }
            }
            KripkePredicate { fibre: fibre.clone(), family }
        })
        .collect())
}

/// Every predicate (closed family) in the fibre.
pub fn all_predicates(fibre: &Arc<Fibre>) -> Result<Vec<KripkePredicate>, PredError> {
    Ok(all_families(fibre)?.into_iter().filter(|p| p.is_closed()).collect())
}
