//! Day convolution of presheaves over a monoidal base, in two forms: the
//! decomposition presheaf (exact splittings, no quotient) and the coend
//! (witnessed triples modulo the dinaturality relation). Also the memory
//! monoids and their law and stability checks.
//!
//! The coend identifies triples that the decomposition form keeps apart:
//! `Yo({x}) ⊛ Yo({x})` has three decompositions at `{x}` but one class.
//! Neither form is adjusted to match the other.

use std::collections::BTreeMap;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::element::{Element, Heap};
use crate::fincat::{CatShape, FinCat, MorId, ObjId};
use crate::presheaf::{check_sheaf, Presheaf, PresheafError, SheafMode, SheafMorphism};
use crate::site::Coverage;

/// Upper bound on witnessed triples at a single stage.
pub const TRIPLE_BUDGET: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DayError {
    #[error("base category has no monoidal structure")]
    NotMonoidal,
    #[error("presheaves live over different bases")]
    BaseMismatch,
    #[error("{0} witnessed triples at one stage exceeds the budget")]
    BudgetExceeded(usize),
    #[error("restriction is not well defined on classes: {0}")]
    IllDefined(String),
    #[error("memory monoids need a powerset base carrying heaps: {0}")]
    NotMemory(String),
    #[error("multiplication leaves the carrier: {0}")]
    NotClosed(String),
    #[error(transparent)]
    Presheaf(#[from] PresheafError),
}

/// A point of a convolution at `stage`: a witness `stage → left_obj ⊗
/// right_obj` with sections over both factors. In the decomposition form on
/// a powerset the witness is the identity and `left_obj ∪ right_obj = stage`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecompElement {
    pub stage: ObjId,
    pub left_obj: ObjId,
    pub right_obj: ObjId,
    pub witness: MorId,
    pub left: Element,
    pub right: Element,
}

impl std::fmt::Display for DecompElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ⊗ {}", self.left, self.right)
    }
}

impl DecompElement {
    pub fn render(&self, locations: Option<&[String]>) -> String {
        format!("{} ⊗ {}", self.left.render(locations), self.right.render(locations))
    }
}

fn monoidal(c: &FinCat) -> Result<&crate::fincat::MonoidalStructure, DayError> {
    c.monoidal().ok_or(DayError::NotMonoidal)
}

fn same_base(f: &Presheaf, g: &Presheaf) -> Result<(), DayError> {
    if f.same_base(g.base()) {
        Ok(())
    } else {
        Err(DayError::BaseMismatch)
    }
}

/// Exact decompositions on a powerset base.
fn decomp_powerset(f: &Presheaf, g: &Presheaf) -> Result<Presheaf, DayError> {
    let c = f.base().clone();
    let mut sections = Vec::with_capacity(c.n_objects());
    for a in c.objects() {
        let am = c.mask(a);
        let mut here = Vec::new();
        for bm in (0..=am).filter(|b| b & !am == 0) {
            for cm in (0..=am).filter(|x| x & !am == 0 && (bm | x) == am) {
                let (b, cc) = (c.subset(bm).unwrap(), c.subset(cm).unwrap());
                for s in f.at(b) {
                    for t in g.at(cc) {
                        here.push(Element::Decomp(Box::new(DecompElement {
                            stage: a,
                            left_obj: b,
                            right_obj: cc,
                            witness: c.id(a),
                            left: s.clone(),
                            right: t.clone(),
                        })));
                    }
                }
            }
        }
        here.sort();
        sections.push(here);
    }
    let cat = c.clone();
    let (f2, g2) = (f.clone(), g.clone());
    let name = format!("{}⊛{}", f.name(), g.name());
    Ok(Presheaf::from_rule(name, c, sections, move |h, e| {
        let d = e.as_decomp().expect("decomposition sections");
        let sub = cat.src(h);
        let sm = cat.mask(sub);
        let b2 = cat.subset(cat.mask(d.left_obj) & sm).unwrap();
        let c2 = cat.subset(cat.mask(d.right_obj) & sm).unwrap();
        let s = f2.restrict(cat.arrow(b2, d.left_obj).unwrap(), &d.left).expect("section of F");
        let t = g2.restrict(cat.arrow(c2, d.right_obj).unwrap(), &d.right).expect("section of G");
        Element::Decomp(Box::new(DecompElement {
            stage: sub,
            left_obj: b2,
            right_obj: c2,
            witness: cat.id(sub),
            left: s,
            right: t,
        }))
    })?)
}

/// All witnessed triples `(B, C, ξ: A → B⊗C, s, t)`; restriction along `h`
/// precomposes the witness.
pub fn witnessed_triples(f: &Presheaf, g: &Presheaf) -> Result<Presheaf, DayError> {
    same_base(f, g)?;
    let c = f.base().clone();
    let mon = monoidal(&c)?.clone();
    let mut sections = Vec::with_capacity(c.n_objects());
    for a in c.objects() {
        let mut here = Vec::new();
        for b in c.objects() {
            for cc in c.objects() {
                let Some(bc) = mon.tensor_obj(b, cc) else { continue };
                for &xi in c.hom(a, bc) {
                    if here.len() + f.len_at(b) * g.len_at(cc) > TRIPLE_BUDGET {
                        return Err(DayError::BudgetExceeded(here.len() + f.len_at(b) * g.len_at(cc)));
                    }
                    for s in f.at(b) {
                        for t in g.at(cc) {
                            here.push(Element::Decomp(Box::new(DecompElement {
                                stage: a,
                                left_obj: b,
                                right_obj: cc,
                                witness: xi,
                                left: s.clone(),
                                right: t.clone(),
                            })));
                        }
                    }
                }
            }
        }
        here.sort();
        sections.push(here);
    }
    let cat = c.clone();
    let name = format!("{}⊛ₜ{}", f.name(), g.name());
    Ok(Presheaf::from_rule(name, c, sections, move |h, e| {
        let d = e.as_decomp().expect("triple sections");
        Element::Decomp(Box::new(DecompElement { stage: cat.src(h), witness: cat.comp(d.witness, h), ..d.clone() }))
    })?)
}

/// The decomposition presheaf. On a powerset base the points at `A` are the
/// exact splittings `B ∪ C = A`; elsewhere they are all witnessed triples.
pub fn day_decomp(f: &Presheaf, g: &Presheaf) -> Result<Presheaf, DayError> {
    same_base(f, g)?;
    monoidal(f.base())?;
    match f.base().shape() {
        CatShape::Powerset { .. } => decomp_powerset(f, g),
        _ => witnessed_triples(f, g),
    }
}

/// The coend as a presheaf whose points are class representatives, together
/// with the class structure over the witnessed triples.
#[derive(Clone, Debug)]
pub struct CoendPresheaf {
    triples: Arc<Presheaf>,
    presheaf: Arc<Presheaf>,
    /// Class of every triple, per stage.
    class_of: Vec<Vec<usize>>,
    /// Members of every class, per stage, ascending.
    members: Vec<Vec<Vec<usize>>>,
}

impl CoendPresheaf {
    pub fn presheaf(&self) -> &Arc<Presheaf> {
        &self.presheaf
    }

    pub fn triples(&self) -> &Arc<Presheaf> {
        &self.triples
    }

    pub fn n_classes(&self, a: ObjId) -> usize {
        self.members[a.0].len()
    }

    pub fn members(&self, a: ObjId, class: usize) -> &[usize] {
        &self.members[a.0][class]
    }

    pub fn representative(&self, a: ObjId, class: usize) -> &DecompElement {
        self.presheaf.section(a, class).as_decomp().expect("representatives are triples")
    }

    pub fn class_of_index(&self, a: ObjId, triple: usize) -> usize {
        self.class_of[a.0][triple]
    }

    pub fn class_of(&self, d: &DecompElement) -> Option<usize> {
        let i = self.triples.index_of(d.stage, &Element::Decomp(Box::new(d.clone())))?;
        Some(self.class_of[d.stage.0][i])
    }

    /// The quotient from a decomposition presheaf over the same factors.
    pub fn quotient(&self, decomp: &Arc<Presheaf>) -> Result<SheafMorphism, DayError> {
        let me = self.clone();
        let d2 = decomp.clone();
        Ok(SheafMorphism::from_fn(decomp.clone(), self.presheaf.clone(), move |a, i| {
            me.class_of(d2.section(a, i).as_decomp()?)
        })?)
    }
}

/// Quotients the witnessed triples by the relation generated by
/// `(B, C, ξ, F(u)s, G(v)t) ~ (B′, C′, (u⊗v)∘ξ, s, t)` for `u: B → B′`,
/// `v: C → C′`.
pub fn day_coend(f: &Presheaf, g: &Presheaf) -> Result<CoendPresheaf, DayError> {
    let triples = Arc::new(witnessed_triples(f, g)?);
    let c = f.base().clone();
    let mon = monoidal(&c)?.clone();
    let mut class_of = Vec::with_capacity(c.n_objects());
    let mut members = Vec::with_capacity(c.n_objects());
    for a in c.objects() {
        let n = triples.len_at(a);
        let mut uf = UnionFind::<usize>::new(n);
        let idx = |b: ObjId, cc: ObjId, xi: MorId, s: &Element, t: &Element| {
            let d = DecompElement { stage: a, left_obj: b, right_obj: cc, witness: xi, left: s.clone(), right: t.clone() };
            triples.index_of(a, &Element::Decomp(Box::new(d))).expect("triple present")
        };
        for b in c.objects() {
            for cc in c.objects() {
                let Some(bc) = mon.tensor_obj(b, cc) else { continue };
                for &xi in c.hom(a, bc) {
                    for b2 in c.objects() {
                        for &u in c.hom(b, b2) {
                            for c2 in c.objects() {
                                for &v in c.hom(cc, c2) {
                                    let Some(uv) = mon.tensor_mor(u, v) else { continue };
                                    let xi2 = c.comp(uv, xi);
                                    for (si, s) in f.at(b2).iter().enumerate() {
                                        let fs = f.section(b, f.restrict_idx(u, si));
                                        for (ti, t) in g.at(c2).iter().enumerate() {
                                            let gt = g.section(cc, g.restrict_idx(v, ti));
                                            uf.union(idx(b, cc, xi, fs, gt), idx(b2, c2, xi2, s, t));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        // Classes numbered by their least member.
        let mut by_root: BTreeMap<usize, usize> = BTreeMap::new();
        let mut cls = vec![0; n];
        let mut mem: Vec<Vec<usize>> = Vec::new();
        for (i, slot) in cls.iter_mut().enumerate() {
            let r = uf.find(i);
            let k = *by_root.entry(r).or_insert_with(|| {
                mem.push(Vec::new());
                mem.len() - 1
            });
            mem[k].push(i);
            *slot = k;
        }
        class_of.push(cls);
        members.push(mem);
    }
    let sections: Vec<Vec<Element>> =
        c.objects().map(|a| members[a.0].iter().map(|m| triples.section(a, m[0]).clone()).collect()).collect();
    let mut restrict = Vec::with_capacity(c.n_morphisms());
    for h in c.morphisms() {
        let (a2, a) = (c.src(h), c.dst(h));
        let mut table = Vec::with_capacity(members[a.0].len());
        for (k, mem) in members[a.0].iter().enumerate() {
            let image = class_of[a2.0][triples.restrict_idx(h, mem[0])];
            if let Some(&bad) = mem.iter().find(|&&i| class_of[a2.0][triples.restrict_idx(h, i)] != image) {
                return Err(DayError::IllDefined(format!(
                    "class {k} at {} splits along {}: {} vs {}",
                    c.obj_label(a),
                    c.mor_label(h),
                    triples.render(a, mem[0]),
                    triples.render(a, bad)
                )));
            }
            table.push(image);
        }
        restrict.push(table);
    }
    let presheaf = Arc::new(Presheaf::from_tables(format!("{}⊛{}", f.name(), g.name()), c, sections, restrict)?);
    Ok(CoendPresheaf { triples, presheaf, class_of, members })
}

/// The comparison `Yo(A) ⊛ Yo(B) → Yo(A⊗B)` sending `(ξ, s, t)` to
/// `(s⊗t)∘ξ`. `target` must be the representable on `A⊗B`.
pub fn yoneda_comparison(coend: &CoendPresheaf, target: &Arc<Presheaf>) -> Result<SheafMorphism, DayError> {
    let c = coend.presheaf.base().clone();
    let mon = monoidal(&c)?.clone();
    let co = coend.clone();
    Ok(SheafMorphism::from_fn(coend.presheaf.clone(), target.clone(), move |a, k| {
        let d = co.representative(a, k);
        let (Element::MorWitness(s), Element::MorWitness(t)) = (&d.left, &d.right) else { return None };
        let st = mon.tensor_mor(*s, *t)?;
        target.index_of(a, &Element::MorWitness(c.comp(st, d.witness)))
    })?)
}

/// The right unitor `F ⊛ Yo(I) → F` sending `(ξ, s, t)` to `F((id⊗t)∘ξ)(s)`.
pub fn unit_comparison(coend: &CoendPresheaf, f: &Arc<Presheaf>) -> Result<SheafMorphism, DayError> {
    let c = coend.presheaf.base().clone();
    let mon = monoidal(&c)?.clone();
    let co = coend.clone();
    let f2 = f.clone();
    Ok(SheafMorphism::from_fn(coend.presheaf.clone(), f.clone(), move |a, k| {
        let d = co.representative(a, k);
        let Element::MorWitness(t) = &d.right else { return None };
        let it = mon.tensor_mor(c.id(d.left_obj), *t)?;
        let r = c.comp(it, d.witness);
        f2.restrict(r, &d.left).and_then(|e| f2.index_of(a, &e))
    })?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MonoidVariant {
    /// Always defined; conflicting cells become ⊥.
    Total,
    /// Defined when the heaps agree on the overlap.
    Weak,
    /// Defined when the stages are disjoint.
    Strong,
}

impl std::fmt::Display for MonoidVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MonoidVariant::Total => "total",
            MonoidVariant::Weak => "weak",
            MonoidVariant::Strong => "strong",
        })
    }
}

impl std::str::FromStr for MonoidVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "total" => Ok(MonoidVariant::Total),
            "weak" | "weak-partial" => Ok(MonoidVariant::Weak),
            "strong" | "strong-partial" => Ok(MonoidVariant::Strong),
            other => Err(format!("unknown monoid variant {other}")),
        }
    }
}

/// Combines two heaps; the result lives on the union of their stages.
pub fn mult_heaps(variant: MonoidVariant, s: &Heap, t: &Heap) -> Option<Heap> {
    let overlap = s.stage() & t.stage();
    let stage = s.stage() | t.stage();
    match variant {
        MonoidVariant::Strong if overlap != 0 => return None,
        MonoidVariant::Weak if s.restrict(overlap) != t.restrict(overlap) => return None,
        _ => {}
    }
    let mut cells = BTreeMap::new();
    for l in (0..32).filter(|l| stage & (1 << l) != 0) {
        let v = match (s.in_stage(l), t.in_stage(l)) {
            (true, false) => s.get(l),
            (false, true) => t.get(l),
            _ if s.get(l) == t.get(l) => s.get(l),
            _ => None,
        };
        if let Some(v) = v {
            cells.insert(l, v);
        }
    }
    Some(Heap::new(stage, cells).expect("cells within the union"))
}

/// A memory monoid on a heap presheaf over a powerset base. The
/// multiplication is a partial map out of the decomposition presheaf.
#[derive(Clone, Debug)]
pub struct ResourceMonoid {
    variant: MonoidVariant,
    carrier: Arc<Presheaf>,
    decomp: Arc<Presheaf>,
    mult: SheafMorphism,
    unit: usize,
}

impl ResourceMonoid {
    pub fn variant(&self) -> MonoidVariant {
        self.variant
    }

    pub fn carrier(&self) -> &Arc<Presheaf> {
        &self.carrier
    }

    pub fn decomp(&self) -> &Arc<Presheaf> {
        &self.decomp
    }

    pub fn mult(&self) -> &SheafMorphism {
        &self.mult
    }

    /// Index of the empty heap at the unit object.
    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn mult_heaps(&self, s: &Heap, t: &Heap) -> Option<Heap> {
        mult_heaps(self.variant, s, t)
    }

    /// Multiplication on section indices at given stages; returns the
    /// product's stage and index.
    pub fn mult_idx(&self, b: ObjId, i: usize, cc: ObjId, j: usize) -> Option<(ObjId, usize)> {
        let s = self.carrier.section(b, i).as_heap()?;
        let t = self.carrier.section(cc, j).as_heap()?;
        let h = self.mult_heaps(s, t)?;
        let a = self.carrier.base().subset(h.stage())?;
        let k = self.carrier.index_of(a, &Element::Heap(h))?;
        Some((a, k))
    }
}

/// Builds a memory monoid. The carrier must be a heap presheaf on a powerset
/// base closed under the multiplication; the partial variants additionally
/// require cells that may hold ⊥.
pub fn build_memory_monoid(carrier: Arc<Presheaf>, variant: MonoidVariant) -> Result<ResourceMonoid, DayError> {
    let c = carrier.base().clone();
    if !carrier.is_powerset() {
        return Err(DayError::NotMemory("base is not a powerset".into()));
    }
    if c.objects().any(|a| carrier.at(a).iter().any(|e| e.as_heap().is_none())) {
        return Err(DayError::NotMemory(format!("{} has non-heap sections", carrier.name())));
    }
    let has_bottom = c.objects().any(|a| carrier.at(a).iter().any(|e| !e.as_heap().unwrap().is_total()));
    if variant != MonoidVariant::Total && !has_bottom {
        return Err(DayError::NotMemory(format!("the {variant} monoid requires partial memory, not {}", carrier.name())));
    }
    let unit_obj = c.monoidal().ok_or(DayError::NotMonoidal)?.unit();
    let unit = carrier
        .index_of(unit_obj, &Element::Heap(Heap::empty(c.mask(unit_obj))))
        .ok_or_else(|| DayError::NotMemory("no empty heap at the unit".into()))?;
    let decomp = Arc::new(day_decomp(&carrier, &carrier)?);
    let mut components = Vec::with_capacity(c.n_objects());
    for a in c.objects() {
        let mut comp = Vec::with_capacity(decomp.len_at(a));
        for e in decomp.at(a) {
            let d = e.as_decomp().expect("decomposition sections");
            let out = match mult_heaps(variant, d.left.as_heap().unwrap(), d.right.as_heap().unwrap()) {
                None => None,
                Some(h) => {
                    let r = Element::Heap(h);
                    Some(carrier.index_of(a, &r).ok_or_else(|| {
                        DayError::NotClosed(format!("{} is not a section of {}", r.render(c.locations()), carrier.name()))
                    })?)
                }
            };
            comp.push(out);
        }
        components.push(comp);
    }
    let mult = SheafMorphism::new(decomp.clone(), carrier.clone(), components)?;
    Ok(ResourceMonoid { variant, carrier, decomp, mult, unit })
}

/// Outcome of an exhaustive law check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LawCheck {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl LawCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Unit, commutativity and associativity over every heap at every stage,
/// with Kleene equality for the partial variants.
pub fn check_monoid_laws(m: &ResourceMonoid) -> LawCheck {
    let p = &m.carrier;
    let c = p.base();
    let locs = c.locations().unwrap_or(&[]).to_vec();
    let heaps: Vec<&Heap> = c.objects().flat_map(|a| p.at(a).iter().map(|e| e.as_heap().unwrap())).collect();
    let e = Heap::empty(0);
    let show = |h: &Option<Heap>| h.as_ref().map_or("undefined".to_string(), |h| h.render(&locs));
    let mut out = LawCheck::default();
    let fail = |out: &mut LawCheck, msg: String| {
        if out.violations.len() < 32 {
            out.violations.push(msg);
        }
    };
    for &s in &heaps {
        out.checked += 2;
        if m.mult_heaps(&e, s).as_ref() != Some(s) {
            fail(&mut out, format!("left unit fails at {}", s.render(&locs)));
        }
        if m.mult_heaps(s, &e).as_ref() != Some(s) {
            fail(&mut out, format!("right unit fails at {}", s.render(&locs)));
        }
        for &t in &heaps {
            out.checked += 1;
            let st = m.mult_heaps(s, t);
            if st != m.mult_heaps(t, s) {
                fail(&mut out, format!("commutativity fails at {} and {}", s.render(&locs), t.render(&locs)));
            }
            for &u in &heaps {
                out.checked += 1;
                let left = st.as_ref().and_then(|st| m.mult_heaps(st, u));
                let right = m.mult_heaps(t, u).and_then(|tu| m.mult_heaps(s, &tu));
                if left != right {
                    fail(
                        &mut out,
                        format!(
                            "associativity fails at {}, {}, {}: {} vs {}",
                            s.render(&locs),
                            t.render(&locs),
                            u.render(&locs),
                            show(&left),
                            show(&right)
                        ),
                    );
                }
            }
        }
    }
    out
}

/// Two triples in one coend class on which the multiplication (applied to
/// the factors and restricted to the stage) disagrees. Its existence means
/// the multiplication does not factor through the coend.
pub fn dinaturality_witness(m: &ResourceMonoid, coend: &CoendPresheaf) -> Option<(DecompElement, DecompElement)> {
    let c = m.carrier.base();
    let eval = |d: &DecompElement| -> Option<Heap> {
        let h = m.mult_heaps(d.left.as_heap()?, d.right.as_heap()?)?;
        Some(h.restrict(c.mask(d.stage)))
    };
    for a in c.objects() {
        for k in 0..coend.n_classes(a) {
            let mem = coend.members(a, k);
            let first = coend.triples.section(a, mem[0]).as_decomp().unwrap();
            let v = eval(first);
            for &i in &mem[1..] {
                let other = coend.triples.section(a, i).as_decomp().unwrap();
                if eval(other) != v {
                    return Some((first.clone(), other.clone()));
                }
            }
        }
    }
    None
}

/// Findings of [`check_day_stability`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DayStabilityReport {
    pub checked: usize,
    pub sheaf_failures: Vec<String>,
    pub mono_failures: Vec<String>,
    pub gamma_failures: Vec<String>,
}

impl DayStabilityReport {
    pub fn passed(&self) -> bool {
        self.sheaf_failures.is_empty() && self.mono_failures.is_empty() && self.gamma_failures.is_empty()
    }
}

/// The map `F ⊛ F → G ⊛ G` on coend classes induced by `α: F → G`.
pub fn convolve_morphism(
    alpha: &SheafMorphism,
    src: &CoendPresheaf,
    dst: &CoendPresheaf,
) -> Result<SheafMorphism, DayError> {
    let (f, g) = (alpha.source().clone(), alpha.target().clone());
    let (s2, d2, al) = (src.clone(), dst.clone(), alpha.clone());
    Ok(SheafMorphism::from_fn(src.presheaf.clone(), dst.presheaf.clone(), move |a, k| {
        let d = s2.representative(a, k);
        let li = al.apply(d.left_obj, f.index_of(d.left_obj, &d.left)?)?;
        let ri = al.apply(d.right_obj, f.index_of(d.right_obj, &d.right)?)?;
        let image = DecompElement {
            left: g.section(d.left_obj, li).clone(),
            right: g.section(d.right_obj, ri).clone(),
            ..d.clone()
        };
        d2.class_of(&image)
    })?)
}

/// The map `F ⊛ F → G ⊛ G` on decomposition presheaves induced by `α`,
/// applied factor-wise.
pub fn convolve_decomp(alpha: &SheafMorphism, src: &Arc<Presheaf>, dst: &Arc<Presheaf>) -> Result<SheafMorphism, DayError> {
    let (f, g) = (alpha.source().clone(), alpha.target().clone());
    let (s2, d2, al) = (src.clone(), dst.clone(), alpha.clone());
    Ok(SheafMorphism::from_fn(src.clone(), dst.clone(), move |a, i| {
        let d = s2.section(a, i).as_decomp()?;
        let li = al.apply(d.left_obj, f.index_of(d.left_obj, &d.left)?)?;
        let ri = al.apply(d.right_obj, f.index_of(d.right_obj, &d.right)?)?;
        let image = DecompElement {
            left: g.section(d.left_obj, li).clone(),
            right: g.section(d.right_obj, ri).clone(),
            ..d.clone()
        };
        d2.index_of(a, &Element::Decomp(Box::new(image)))
    })?)
}

/// Checks that the base tensor acts functorially on slices: identities go
/// to identities, and `(g∘g′)⊗(k∘k′) = (g⊗k)∘(g′⊗k′)` whenever defined.
pub fn check_gamma(c: &FinCat) -> Result<LawCheck, DayError> {
    let mon = monoidal(c)?;
    let mut out = LawCheck::default();
    for a in c.objects() {
        for b in c.objects() {
            let Some(ab) = mon.tensor_obj(a, b) else { continue };
            out.checked += 1;
            if mon.tensor_mor(c.id(a), c.id(b)) != Some(c.id(ab)) {
                out.violations.push(format!("γ({}, {}) does not preserve identities", c.obj_label(a), c.obj_label(b)));
            }
            for &p in c.arrows_into(a) {
                for &q in c.arrows_into(b) {
                    let Some(pq) = mon.tensor_mor(p, q) else { continue };
                    if c.dst(pq) != ab {
                        out.violations.push(format!("γ of {} and {} misses the target", c.mor_label(p), c.mor_label(q)));
                        continue;
                    }
                    for &g in c.arrows_into(c.src(p)) {
                        for &k in c.arrows_into(c.src(q)) {
                            out.checked += 1;
                            let whole = mon.tensor_mor(c.comp(p, g), c.comp(q, k));
                            let parts = mon.tensor_mor(g, k).map(|gk| c.comp(pq, gk));
                            if whole.is_some() && parts.is_some() && whole != parts {
                                out.violations.push(format!(
                                    "γ is not functorial on {}∘{} and {}∘{}",
                                    c.mor_label(p),
                                    c.mor_label(g),
                                    c.mor_label(q),
                                    c.mor_label(k)
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Sheaf condition for both convolution forms of every pair of samples,
/// injectivity of the convolution of each supplied monomorphism, and
/// functoriality of γ.
pub fn check_day_stability(
    cov: &Coverage,
    samples: &[Arc<Presheaf>],
    inclusions: &[SheafMorphism],
) -> Result<DayStabilityReport, DayError> {
    let c = cov.base();
    monoidal(c)?;
    let mut report = DayStabilityReport::default();
    for f in samples {
        for g in samples {
            let decomp = day_decomp(f, g)?;
            let coend = day_coend(f, g)?;
            for p in [&decomp, coend.presheaf.as_ref()] {
                report.checked += 1;
                let r = check_sheaf(p, cov, &SheafMode::Exhaustive)?;
                report.sheaf_failures.extend(r.failures.iter().map(|x| format!("{}: {x}", p.name())));
            }
        }
    }
    for alpha in inclusions {
        report.checked += 1;
        let (f, g) = (alpha.source(), alpha.target());
        let src = Arc::new(day_decomp(f, f)?);
        let dst = Arc::new(day_decomp(g, g)?);
        let conv = convolve_decomp(alpha, &src, &dst)?;
        let coend_conv = convolve_morphism(alpha, &day_coend(f, f)?, &day_coend(g, g)?)?;
        for (form, m) in [("decomposition", &conv), ("coend", &coend_conv)] {
            report
                .mono_failures
                .extend(m.injectivity_violations().into_iter().map(|v| format!("{form} {}⊛{}: {v}", f.name(), f.name())));
            if !m.is_total() {
                report.mono_failures.push(format!("{form} convolution of {} is not total", f.name()));
            }
        }
    }
    let gamma = check_gamma(c)?;
    report.checked += gamma.checked;
    report.gamma_failures = gamma.violations;
    Ok(report)
}
