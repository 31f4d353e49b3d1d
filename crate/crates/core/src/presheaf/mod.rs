//! Finite-set-valued presheaves with eager restriction tables.

mod builders;
mod matching;
mod sheaf;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::element::Element;
use crate::fincat::{CatShape, FinCat, MorId, ObjId};

pub use builders::{build_resource_sheaf, ResourceKind};
pub use matching::{
    amalgamation_operator, matching_object, matching_presheaf, poset_pullback, AmalgamationIso, MatchingClass,
    MatchingPresheaf, PullbackSquare,
};
pub use sheaf::{
    amalgamate, check_sheaf, compatible_families, slice_restrict, AmalgamationError, CompatibleFamily, SheafFailure,
    SheafMode, SheafReport, FAMILY_BUDGET,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresheafError {
    #[error("resource kind {kind} needs {requirement}")]
    KindMismatch { kind: String, requirement: &'static str },
    #[error("value set must be nonempty")]
    EmptyValues,
    #[error("restriction along {morphism} sends {element} outside the sections at {object}")]
    NotClosed { morphism: String, element: String, object: String },
    #[error("malformed presheaf: {0}")]
    Malformed(String),
    #[error("presheaves live over different base categories")]
    BaseMismatch,
    #[error("unknown object {0}")]
    UnknownObject(ObjId),
    #[error("enumeration over the cover {cover} of {object} exceeds the budget ({budget} families)")]
    BudgetExceeded { object: String, cover: String, budget: usize },
    #[error("pullback square does not commute: {0}")]
    SquareDoesNotCommute(String),
    #[error("not a sheaf: {0}")]
    NotASheaf(String),
    #[error("{0}")]
    Site(#[from] crate::site::SiteError),
    #[error("{0}")]
    Category(#[from] crate::fincat::CatError),
}

/// A presheaf on a finite category. `restrict[m]` is the function
/// `F(dst m) → F(src m)` given by section indices.
#[derive(Clone, Debug)]
pub struct Presheaf {
    name: String,
    base: Arc<FinCat>,
    sections: Vec<Vec<Element>>,
    index: Vec<HashMap<Element, usize>>,
    restrict: Vec<Vec<usize>>,
}

impl Presheaf {
    /// Builds a presheaf from explicit tables; only shapes and ranges are
    /// checked here, functoriality via [`validate_presheaf`].
    pub fn from_tables(
        name: impl Into<String>,
        base: Arc<FinCat>,
        sections: Vec<Vec<Element>>,
        restrict: Vec<Vec<usize>>,
    ) -> Result<Presheaf, PresheafError> {
        if sections.len() != base.n_objects() || restrict.len() != base.n_morphisms() {
            return Err(PresheafError::Malformed("table sizes do not match the base".into()));
        }
        for m in base.morphisms() {
            let (s, d) = (base.src(m), base.dst(m));
            if restrict[m.0].len() != sections[d.0].len() || restrict[m.0].iter().any(|&i| i >= sections[s.0].len()) {
                return Err(PresheafError::Malformed(format!("restriction table of {} is ill-typed", base.mor_label(m))));
            }
        }
        let mut index = Vec::with_capacity(sections.len());
        for (a, secs) in sections.iter().enumerate() {
            let map: HashMap<Element, usize> = secs.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
            if map.len() != secs.len() {
                return Err(PresheafError::Malformed(format!("duplicate sections at {}", base.obj_label(ObjId(a)))));
            }
            index.push(map);
        }
        Ok(Presheaf { name: name.into(), base, sections, index, restrict })
    }

    /// Builds the restriction tables by applying `rule` to every section.
    pub fn from_rule(
        name: impl Into<String>,
        base: Arc<FinCat>,
        sections: Vec<Vec<Element>>,
        rule: impl Fn(MorId, &Element) -> Element,
    ) -> Result<Presheaf, PresheafError> {
        let index: Vec<HashMap<Element, usize>> =
            sections.iter().map(|secs| secs.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect()).collect();
        let mut restrict = Vec::with_capacity(base.n_morphisms());
        for m in base.morphisms() {
            let (s, d) = (base.src(m), base.dst(m));
            let mut table = Vec::with_capacity(sections[d.0].len());
            for e in &sections[d.0] {
                let r = rule(m, e);
                let i = index[s.0].get(&r).copied().ok_or_else(|| PresheafError::NotClosed {
                    morphism: base.mor_label(m).into(),
                    element: e.to_string(),
                    object: base.obj_label(s).into(),
                })?;
                table.push(i);
            }
            restrict.push(table);
        }
        Presheaf::from_tables(name, base, sections, restrict)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &Arc<FinCat> {
        &self.base
    }

    pub fn at(&self, a: ObjId) -> &[Element] {
        &self.sections[a.0]
    }

    pub fn len_at(&self, a: ObjId) -> usize {
        self.sections[a.0].len()
    }

    pub fn section(&self, a: ObjId, i: usize) -> &Element {
        &self.sections[a.0][i]
    }

    pub fn index_of(&self, a: ObjId, e: &Element) -> Option<usize> {
        self.index[a.0].get(e).copied()
    }

    /// `F(m)` on a section index of `F(dst m)`.
    pub fn restrict_idx(&self, m: MorId, i: usize) -> usize {
        self.restrict[m.0][i]
    }

    pub fn restrict_table(&self, m: MorId) -> &[usize] {
        &self.restrict[m.0]
    }

    /// `F(m)` on an element of `F(dst m)`.
    pub fn restrict(&self, m: MorId, e: &Element) -> Option<Element> {
        let i = self.index_of(self.base.dst(m), e)?;
        Some(self.sections[self.base.src(m).0][self.restrict[m.0][i]].clone())
    }

    /// Overwrites one restriction table entry; for fault injection.
    pub fn tamper_restriction(&mut self, m: MorId, from: usize, to: usize) {
        self.restrict[m.0][from] = to;
    }

    /// Total number of sections over all objects.
    pub fn total_size(&self) -> usize {
        self.sections.iter().map(|s| s.len()).sum()
    }

    pub fn locations(&self) -> Option<&[String]> {
        self.base.locations()
    }

    pub fn render(&self, a: ObjId, i: usize) -> String {
        self.sections[a.0][i].render(self.locations())
    }

    /// Base categories agree (by pointer or by value).
    pub fn same_base(&self, c: &Arc<FinCat>) -> bool {
        Arc::ptr_eq(&self.base, c) || *self.base == **c
    }

    pub fn is_powerset(&self) -> bool {
        matches!(self.base.shape(), CatShape::Powerset { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PresheafViolation {
    Identity { object: String, element: String },
    Composition { g: String, f: String, element: String },
}

impl fmt::Display for PresheafViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PresheafViolation::Identity { object, element } => {
                write!(f, "restriction along the identity of {object} moves {element}")
            }
            PresheafViolation::Composition { g, f: ff, element } => {
                write!(f, "F({g} ∘ {ff}) ≠ F({ff}) ∘ F({g}) at {element}")
            }
        }
    }
}

/// Checks `F(id) = id` and `F(g ∘ f) = F(f) ∘ F(g)`. Pairs involving an
/// identity are left to the identity check; each failing pair is reported once.
pub fn validate_presheaf(p: &Presheaf) -> Vec<PresheafViolation> {
    let c = &p.base;
    let mut out = Vec::new();
    for a in c.objects() {
        let id = c.id(a);
        if let Some(i) = (0..p.len_at(a)).find(|&i| p.restrict_idx(id, i) != i) {
            out.push(PresheafViolation::Identity { object: c.obj_label(a).into(), element: p.render(a, i) });
        }
    }
    for g in c.morphisms().filter(|&g| !c.is_identity(g)) {
        for &f in c.arrows_into(c.src(g)).iter().filter(|&&f| !c.is_identity(f)) {
            let gf = c.comp(g, f);
            let d = c.dst(g);
            let bad = (0..p.len_at(d)).find(|&i| p.restrict_idx(gf, i) != p.restrict_idx(f, p.restrict_idx(g, i)));
            if let Some(i) = bad {
                out.push(PresheafViolation::Composition {
                    g: c.mor_label(g).into(),
                    f: c.mor_label(f).into(),
                    element: p.render(d, i),
                });
            }
        }
    }
    out
}

/// A (possibly partial) natural transformation given by per-object index
/// maps. Partial components model partial multiplications.
#[derive(Clone, Debug)]
pub struct SheafMorphism {
    source: Arc<Presheaf>,
    target: Arc<Presheaf>,
    components: Vec<Vec<Option<usize>>>,
}

impl SheafMorphism {
    pub fn new(
        source: Arc<Presheaf>,
        target: Arc<Presheaf>,
        components: Vec<Vec<Option<usize>>>,
    ) -> Result<SheafMorphism, PresheafError> {
        if !source.same_base(target.base()) {
            return Err(PresheafError::BaseMismatch);
        }
        let c = source.base();
        if components.len() != c.n_objects() {
            return Err(PresheafError::Malformed("component count does not match the base".into()));
        }
        for a in c.objects() {
            let comp = &components[a.0];
            if comp.len() != source.len_at(a) || comp.iter().flatten().any(|&j| j >= target.len_at(a)) {
                return Err(PresheafError::Malformed(format!("component at {} is ill-typed", c.obj_label(a))));
            }
        }
        Ok(SheafMorphism { source, target, components })
    }

    /// Builds components by applying `f` to each section.
    pub fn from_fn(
        source: Arc<Presheaf>,
        target: Arc<Presheaf>,
        f: impl Fn(ObjId, usize) -> Option<usize>,
    ) -> Result<SheafMorphism, PresheafError> {
        let components = source.base().objects().map(|a| (0..source.len_at(a)).map(|i| f(a, i)).collect()).collect();
        SheafMorphism::new(source, target, components)
    }

    pub fn identity(p: Arc<Presheaf>) -> SheafMorphism {
        let components = p.base().objects().map(|a| (0..p.len_at(a)).map(Some).collect()).collect();
        SheafMorphism { source: p.clone(), target: p, components }
    }

    /// The inclusion of a subpresheaf, matching sections by equality.
    pub fn inclusion(sub: Arc<Presheaf>, sup: Arc<Presheaf>) -> Result<SheafMorphism, PresheafError> {
        let s2 = sub.clone();
        let t2 = sup.clone();
        let m = SheafMorphism::from_fn(sub, sup, move |a, i| t2.index_of(a, s2.section(a, i)))?;
        if m.components.iter().flatten().any(|x| x.is_none()) {
            return Err(PresheafError::Malformed(format!("{} is not contained in {}", m.source.name, m.target.name)));
        }
        Ok(m)
    }

    pub fn source(&self) -> &Arc<Presheaf> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Presheaf> {
        &self.target
    }

    pub fn apply(&self, a: ObjId, i: usize) -> Option<usize> {
        self.components[a.0][i]
    }

    pub fn component(&self, a: ObjId) -> &[Option<usize>] {
        &self.components[a.0]
    }

    pub fn is_total(&self) -> bool {
        self.components.iter().flatten().all(|x| x.is_some())
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SheafMorphism) -> Result<SheafMorphism, PresheafError> {
        if !Arc::ptr_eq(&self.target, &other.source) {
            return Err(PresheafError::BaseMismatch);
        }
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(a, comp)| comp.iter().map(|x| x.and_then(|j| other.components[a][j])).collect())
            .collect();
        Ok(SheafMorphism { source: self.source.clone(), target: other.target.clone(), components })
    }

    /// Naturality where defined: if `α_A(s)` is defined then `α_B(F(h)s)` is
    /// defined and equals `G(h)(α_A(s))`. One line per failing morphism.
    pub fn naturality_violations(&self) -> Vec<String> {
        let c = self.source.base();
        let mut out = Vec::new();
        for h in c.morphisms() {
            let (b, a) = (c.src(h), c.dst(h));
            for i in 0..self.source.len_at(a) {
                let Some(j) = self.apply(a, i) else { continue };
                let lhs = self.apply(b, self.source.restrict_idx(h, i));
                let rhs = self.target.restrict_idx(h, j);
                if lhs != Some(rhs) {
                    out.push(format!(
                        "square at {} fails for {}",
                        c.mor_label(h),
                        self.source.render(a, i)
                    ));
                    break;
                }
            }
        }
        out
    }

    /// Objects where the component is not injective on defined points.
    pub fn injectivity_violations(&self) -> Vec<String> {
        let c = self.source.base();
        let mut out = Vec::new();
        for a in c.objects() {
            let mut seen: HashMap<usize, usize> = HashMap::new();
            for (i, x) in self.components[a.0].iter().enumerate() {
                let Some(j) = x else { continue };
                if let Some(&k) = seen.get(j) {
                    out.push(format!(
                        "{} and {} collide at {}",
                        self.source.render(a, k),
                        self.source.render(a, i),
                        c.obj_label(a)
                    ));
                    break;
                }
                seen.insert(*j, i);
            }
        }
        out
    }

    /// Objects where some target section has no preimage.
    pub fn surjectivity_violations(&self) -> Vec<String> {
        let c = self.source.base();
        let mut out = Vec::new();
        for a in c.objects() {
            let mut hit = vec![false; self.target.len_at(a)];
            for j in self.components[a.0].iter().flatten() {
                hit[*j] = true;
            }
            if let Some(j) = hit.iter().position(|h| !h) {
                out.push(format!("{} has no preimage at {}", self.target.render(a, j), c.obj_label(a)));
            }
        }
        out
    }
}
