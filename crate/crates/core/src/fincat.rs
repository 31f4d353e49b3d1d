//! Finite categories with interned objects and morphisms, optional strict
//! monoidal structure, functors, and slice categories.
//!
//! Every category in this crate is small enough that hom-sets, composition
//! and the tensor are stored as explicit tables. The two built-in bases are
//! the powerset of a location set (ordered by inclusion, tensor = union) and
//! the truncated category of finite sets and surjections (tensor = cartesian
//! product where the product stays within the size bound).

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Default bound on the number of locations for powerset bases.
pub const DEFAULT_POWERSET_BOUND: usize = 4;
/// Default bound on the largest set in the surjection category.
pub const DEFAULT_FINSURJ_BOUND: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MorId(pub usize);

impl fmt::Display for ObjId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0)
    }
}

impl fmt::Display for MorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatError {
    #[error("size bound exceeded: {requested} > {bound}")]
    BoundExceeded { requested: usize, bound: usize },
    #[error("unknown object {0}")]
    UnknownObject(ObjId),
    #[error("unknown morphism {0}")]
    UnknownMorphism(MorId),
    #[error("tensor of {left} and {right} is undefined (product exceeds the size bound)")]
    TensorUndefined { left: String, right: String },
    #[error("category has no monoidal structure")]
    NotMonoidal,
    #[error("malformed category: {0}")]
    Malformed(String),
}

/// What a category was built from. Builders for resource presheaves and the
/// decomposition form of Day convolution dispatch on this.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CatShape {
    /// Subsets of `locations`; object `i` is the subset with bitmask `i`.
    Powerset { locations: Vec<String> },
    /// Sets `{1..k}` for `k <= max_size`; object `i` has `i + 1` elements.
    /// `maps[m]` is the 0-based function table of morphism `m`.
    FinSurj { max_size: usize, maps: Vec<Vec<usize>> },
    /// Slice over `over`; slice object `i` is the base morphism `legs[i]` and
    /// slice morphism `j` is the base morphism `arrows[j]`.
    Slice { over: ObjId, legs: Vec<MorId>, arrows: Vec<MorId> },
    Custom,
}

/// Tensor tables. Partial entries model the size-bounded product on
/// surjections; associators and unitors are identities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonoidalStructure {
    tensor_obj: HashMap<(ObjId, ObjId), ObjId>,
    tensor_mor: HashMap<(MorId, MorId), MorId>,
    unit: ObjId,
    symmetric: bool,
}

impl MonoidalStructure {
    pub fn new(
        tensor_obj: HashMap<(ObjId, ObjId), ObjId>,
        tensor_mor: HashMap<(MorId, MorId), MorId>,
        unit: ObjId,
        symmetric: bool,
    ) -> Self {
        MonoidalStructure { tensor_obj, tensor_mor, unit, symmetric }
    }

    pub fn unit(&self) -> ObjId {
        self.unit
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn tensor_obj(&self, a: ObjId, b: ObjId) -> Option<ObjId> {
        self.tensor_obj.get(&(a, b)).copied()
    }

    pub fn tensor_mor(&self, f: MorId, g: MorId) -> Option<MorId> {
        self.tensor_mor.get(&(f, g)).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinCat {
    obj_labels: Vec<String>,
    mor_labels: Vec<String>,
    src: Vec<ObjId>,
    dst: Vec<ObjId>,
    identities: Vec<MorId>,
    /// Indexed by `src * n_objects + dst`.
    homs: Vec<Vec<MorId>>,
    /// Morphisms grouped by codomain.
    into: Vec<Vec<MorId>>,
    /// Indexed by `g * n_morphisms + f`, holding `g ∘ f`.
    compose: Vec<Option<MorId>>,
    shape: CatShape,
    monoidal: Option<MonoidalStructure>,
}

/// Assembles a category from raw tables without checking the laws; run
/// [`validate_category`] on the result.
#[derive(Clone, Debug, Default)]
pub struct FinCatBuilder {
    objects: Vec<String>,
    morphisms: Vec<(String, ObjId, ObjId)>,
    identities: HashMap<ObjId, MorId>,
    compose: HashMap<(MorId, MorId), MorId>,
}

impl FinCatBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn object(&mut self, label: impl Into<String>) -> ObjId {
        self.objects.push(label.into());
        ObjId(self.objects.len() - 1)
    }

    pub fn morphism(&mut self, label: impl Into<String>, src: ObjId, dst: ObjId) -> MorId {
        self.morphisms.push((label.into(), src, dst));
        MorId(self.morphisms.len() - 1)
    }

    /// Adds an identity morphism for `obj` and records it.
    pub fn identity(&mut self, obj: ObjId) -> MorId {
        let label = format!("id_{}", self.objects[obj.0]);
        let id = self.morphism(label, obj, obj);
        self.identities.insert(obj, id);
        id
    }

    /// Records `g ∘ f = h`.
    pub fn compose(&mut self, g: MorId, f: MorId, h: MorId) {
        self.compose.insert((g, f), h);
    }

    /// Fills in all composites involving identities.
    pub fn compose_identities(&mut self) {
        for (m, (_, s, d)) in self.morphisms.clone().into_iter().enumerate() {
            let m = MorId(m);
            if let Some(&id) = self.identities.get(&d) {
                self.compose.entry((id, m)).or_insert(m);
            }
            if let Some(&id) = self.identities.get(&s) {
                self.compose.entry((m, id)).or_insert(m);
            }
        }
    }

    pub fn build(self) -> Result<FinCat, CatError> {
        let n = self.objects.len();
        let mut identities = Vec::with_capacity(n);
        for o in 0..n {
            let id = self
                .identities
                .get(&ObjId(o))
                .copied()
                .ok_or_else(|| CatError::Malformed(format!("object {} has no identity", self.objects[o])))?;
            identities.push(id);
        }
        let mut mor_labels = Vec::new();
        let mut src = Vec::new();
        let mut dst = Vec::new();
        for (label, s, d) in self.morphisms {
            if s.0 >= n || d.0 >= n {
                return Err(CatError::Malformed(format!("morphism {label} has an unknown endpoint")));
            }
            mor_labels.push(label);
            src.push(s);
            dst.push(d);
        }
        let m = mor_labels.len();
        let mut compose = vec![None; m * m];
        for ((g, f), h) in self.compose {
            if g.0 >= m || f.0 >= m || h.0 >= m {
                return Err(CatError::Malformed("composite refers to an unknown morphism".into()));
            }
            compose[g.0 * m + f.0] = Some(h);
        }
        Ok(FinCat::assemble(self.objects, mor_labels, src, dst, identities, compose, CatShape::Custom))
    }
}

impl FinCat {
    fn assemble(
        obj_labels: Vec<String>,
        mor_labels: Vec<String>,
        src: Vec<ObjId>,
        dst: Vec<ObjId>,
        identities: Vec<MorId>,
        compose: Vec<Option<MorId>>,
        shape: CatShape,
    ) -> FinCat {
        let n = obj_labels.len();
        let mut homs = vec![Vec::new(); n * n];
        let mut into = vec![Vec::new(); n];
        for m in 0..mor_labels.len() {
            homs[src[m].0 * n + dst[m].0].push(MorId(m));
            into[dst[m].0].push(MorId(m));
        }
        FinCat { obj_labels, mor_labels, src, dst, identities, homs, into, compose, shape, monoidal: None }
    }

    pub fn n_objects(&self) -> usize {
        self.obj_labels.len()
    }

    pub fn n_morphisms(&self) -> usize {
        self.mor_labels.len()
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjId> + '_ {
        (0..self.n_objects()).map(ObjId)
    }

    pub fn morphisms(&self) -> impl Iterator<Item = MorId> + '_ {
        (0..self.n_morphisms()).map(MorId)
    }

    pub fn contains_object(&self, a: ObjId) -> bool {
        a.0 < self.n_objects()
    }

    pub fn check_object(&self, a: ObjId) -> Result<(), CatError> {
        if self.contains_object(a) {
            Ok(())
        } else {
            Err(CatError::UnknownObject(a))
        }
    }

    pub fn obj_label(&self, a: ObjId) -> &str {
        &self.obj_labels[a.0]
    }

    pub fn mor_label(&self, m: MorId) -> &str {
        &self.mor_labels[m.0]
    }

    pub fn src(&self, m: MorId) -> ObjId {
        self.src[m.0]
    }

    pub fn dst(&self, m: MorId) -> ObjId {
        self.dst[m.0]
    }

    pub fn id(&self, a: ObjId) -> MorId {
        self.identities[a.0]
    }

    pub fn is_identity(&self, m: MorId) -> bool {
        self.identities[self.src(m).0] == m
    }

    pub fn hom(&self, a: ObjId, b: ObjId) -> &[MorId] {
        &self.homs[a.0 * self.n_objects() + b.0]
    }

    /// All morphisms with codomain `a`.
    pub fn arrows_into(&self, a: ObjId) -> &[MorId] {
        &self.into[a.0]
    }

    /// `g ∘ f`, if defined.
    pub fn compose(&self, g: MorId, f: MorId) -> Option<MorId> {
        self.compose[g.0 * self.n_morphisms() + f.0]
    }

    /// `g ∘ f` for a pair already known to be composable.
    pub fn comp(&self, g: MorId, f: MorId) -> MorId {
        self.compose(g, f)
            .unwrap_or_else(|| panic!("{} ∘ {} is not composable", self.mor_label(g), self.mor_label(f)))
    }

    pub fn shape(&self) -> &CatShape {
        &self.shape
    }

    pub fn monoidal(&self) -> Option<&MonoidalStructure> {
        self.monoidal.as_ref()
    }

    pub fn with_monoidal(mut self, m: MonoidalStructure) -> Self {
        self.monoidal = Some(m);
        self
    }

    /// Every hom-set has at most one element.
    pub fn is_preorder(&self) -> bool {
        self.homs.iter().all(|h| h.len() <= 1)
    }

    /// Location names when this is a powerset base.
    pub fn locations(&self) -> Option<&[String]> {
        match &self.shape {
            CatShape::Powerset { locations } => Some(locations),
            _ => None,
        }
    }

    /// Powerset object for a location bitmask.
    pub fn subset(&self, mask: u32) -> Option<ObjId> {
        match &self.shape {
            CatShape::Powerset { locations } if (mask as usize) < (1usize << locations.len()) => {
                Some(ObjId(mask as usize))
            }
            _ => None,
        }
    }

    /// Bitmask of a powerset object.
    pub fn mask(&self, a: ObjId) -> u32 {
        debug_assert!(matches!(self.shape, CatShape::Powerset { .. }));
        a.0 as u32
    }

    /// The unique morphism `a -> b` in a preorder.
    pub fn arrow(&self, a: ObjId, b: ObjId) -> Option<MorId> {
        self.hom(a, b).first().copied()
    }

    /// Function table of a surjection.
    pub fn surjection_table(&self, m: MorId) -> Option<&[usize]> {
        match &self.shape {
            CatShape::FinSurj { maps, .. } => Some(&maps[m.0]),
            _ => None,
        }
    }

    /// Powerset object by location names.
    pub fn subset_named<S: AsRef<str>>(&self, names: &[S]) -> Option<ObjId> {
        let locs = self.locations()?;
        let mut mask = 0u32;
        for n in names {
            let i = locs.iter().position(|l| l == n.as_ref())?;
            mask |= 1 << i;
        }
        self.subset(mask)
    }

    /// Looks an object up by its display label.
    pub fn object_by_label(&self, label: &str) -> Option<ObjId> {
        self.obj_labels.iter().position(|l| l == label).map(ObjId)
    }
}

/// Renders a location bitmask as `{x,y}`.
pub fn subset_label(locations: &[String], mask: u32) -> String {
    let names: Vec<&str> = locations
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, l)| l.as_str())
        .collect();
    format!("{{{}}}", names.join(","))
}

/// The powerset of `locations` ordered by inclusion, with union as a strict
/// symmetric tensor and the empty set as unit.
pub fn build_powerset_category(locations: &[String]) -> Result<FinCat, CatError> {
    build_powerset_category_bounded(locations, DEFAULT_POWERSET_BOUND)
}

pub fn build_powerset_category_bounded(locations: &[String], bound: usize) -> Result<FinCat, CatError> {
    if locations.len() > bound {
        return Err(CatError::BoundExceeded { requested: locations.len(), bound });
    }
    let mut seen = std::collections::HashSet::new();
    for l in locations {
        if !seen.insert(l) {
            return Err(CatError::Malformed(format!("duplicate location {l}")));
        }
    }
    let n = 1usize << locations.len();
    let obj_labels: Vec<String> = (0..n).map(|m| subset_label(locations, m as u32)).collect();
    let mut mor_labels = Vec::new();
    let mut src = Vec::new();
    let mut dst = Vec::new();
    let mut index = vec![None; n * n];
    for a in 0..n {
        for b in 0..n {
            if a & !b == 0 {
                index[a * n + b] = Some(MorId(mor_labels.len()));
                mor_labels.push(format!("{}⊆{}", obj_labels[a], obj_labels[b]));
                src.push(ObjId(a));
                dst.push(ObjId(b));
            }
        }
    }
    let m = mor_labels.len();
    let mut compose = vec![None; m * m];
    for g in 0..m {
        for f in 0..m {
            if dst[f] == src[g] {
                compose[g * m + f] = index[src[f].0 * n + dst[g].0];
            }
        }
    }
    let identities = (0..n).map(|a| index[a * n + a].unwrap()).collect();
    let mut tensor_obj = HashMap::new();
    let mut tensor_mor = HashMap::new();
    for a in 0..n {
        for b in 0..n {
            tensor_obj.insert((ObjId(a), ObjId(b)), ObjId(a | b));
        }
    }
    for f in 0..m {
        for g in 0..m {
            let s = src[f].0 | src[g].0;
            let d = dst[f].0 | dst[g].0;
            tensor_mor.insert((MorId(f), MorId(g)), index[s * n + d].unwrap());
        }
    }
    let cat = FinCat::assemble(
        obj_labels,
        mor_labels,
        src,
        dst,
        identities,
        compose,
        CatShape::Powerset { locations: locations.to_vec() },
    );
    Ok(cat.with_monoidal(MonoidalStructure::new(tensor_obj, tensor_mor, ObjId(0), true)))
}

fn is_surjective(table: &[usize], target: usize) -> bool {
    let mut hit = vec![false; target];
    for &v in table {
        hit[v] = true;
    }
    hit.into_iter().all(|h| h)
}

/// All functions `{0..domain} -> {0..codomain}` in lexicographic order.
fn all_functions(domain: usize, codomain: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; domain];
    loop {
        out.push(cur.clone());
        let mut i = domain;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < codomain {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Finite sets `{1..k}` (`1 <= k <= max_size`) and surjections, with the
/// cartesian product as a partial tensor: `k ⊗ l` exists iff `k * l <= max_size`.
/// Pairs are encoded lexicographically, `(i, j) ↦ i * l + j`, which makes the
/// product strictly associative and unital.
pub fn build_finsurj_category(max_size: usize) -> Result<FinCat, CatError> {
    if max_size == 0 {
        return Err(CatError::Malformed("max_size must be positive".into()));
    }
    if max_size > DEFAULT_FINSURJ_BOUND {
        return Err(CatError::BoundExceeded { requested: max_size, bound: DEFAULT_FINSURJ_BOUND });
    }
    let obj_labels: Vec<String> = (1..=max_size)
        .map(|k| format!("{{{}}}", (1..=k).map(|i| i.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    let mut mor_labels = Vec::new();
    let mut src = Vec::new();
    let mut dst = Vec::new();
    let mut maps: Vec<Vec<usize>> = Vec::new();
    let mut lookup: HashMap<(usize, Vec<usize>), MorId> = HashMap::new();
    for a in 1..=max_size {
        for b in 1..=a {
            for table in all_functions(a, b) {
                if !is_surjective(&table, b) {
                    continue;
                }
                let id = MorId(maps.len());
                let label = format!(
                    "[{}]:{}→{}",
                    table.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(""),
                    a,
                    b
                );
                mor_labels.push(label);
                src.push(ObjId(a - 1));
                dst.push(ObjId(b - 1));
                lookup.insert((b, table.clone()), id);
                maps.push(table);
            }
        }
    }
    let m = maps.len();
    let mut compose = vec![None; m * m];
    for g in 0..m {
        for f in 0..m {
            if dst[f] == src[g] {
                let table: Vec<usize> = maps[f].iter().map(|&i| maps[g][i]).collect();
                compose[g * m + f] = Some(lookup[&(dst[g].0 + 1, table)]);
            }
        }
    }
    let identities: Vec<MorId> = (1..=max_size).map(|k| lookup[&(k, (0..k).collect())]).collect();

    let mut tensor_obj = HashMap::new();
    for a in 1..=max_size {
        for b in 1..=max_size {
            if a * b <= max_size {
                tensor_obj.insert((ObjId(a - 1), ObjId(b - 1)), ObjId(a * b - 1));
            }
        }
    }
    let mut tensor_mor = HashMap::new();
    for f in 0..m {
        for g in 0..m {
            let (a, b) = (src[f].0 + 1, src[g].0 + 1);
            if a * b > max_size {
                continue;
            }
            let (a2, b2) = (dst[f].0 + 1, dst[g].0 + 1);
            let mut table = vec![0; a * b];
            for i in 0..a {
                for j in 0..b {
                    table[i * b + j] = maps[f][i] * b2 + maps[g][j];
                }
            }
            tensor_mor.insert((MorId(f), MorId(g)), lookup[&(a2 * b2, table)]);
        }
    }
    let cat = FinCat::assemble(
        obj_labels,
        mor_labels,
        src,
        dst,
        identities,
        compose,
        CatShape::FinSurj { max_size, maps },
    );
    Ok(cat.with_monoidal(MonoidalStructure::new(tensor_obj, tensor_mor, ObjId(0), true)))
}

/// Object and morphism maps between two categories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctorData {
    pub obj_map: Vec<ObjId>,
    pub mor_map: Vec<MorId>,
}

impl FunctorData {
    pub fn on_obj(&self, a: ObjId) -> ObjId {
        self.obj_map[a.0]
    }

    pub fn on_mor(&self, m: MorId) -> MorId {
        self.mor_map[m.0]
    }

    /// Checks typing, identities and composition; returns one line per failure.
    pub fn validate(&self, from: &FinCat, to: &FinCat) -> Vec<String> {
        let mut out = Vec::new();
        if self.obj_map.len() != from.n_objects() || self.mor_map.len() != from.n_morphisms() {
            out.push("functor tables do not cover the source category".to_string());
            return out;
        }
        for m in from.morphisms() {
            let fm = self.on_mor(m);
            if to.src(fm) != self.on_obj(from.src(m)) || to.dst(fm) != self.on_obj(from.dst(m)) {
                out.push(format!("{} is sent to a mistyped morphism", from.mor_label(m)));
            }
        }
        for a in from.objects() {
            if self.on_mor(from.id(a)) != to.id(self.on_obj(a)) {
                out.push(format!("identity of {} not preserved", from.obj_label(a)));
            }
        }
        for g in from.morphisms() {
            for f in from.morphisms() {
                if let Some(gf) = from.compose(g, f) {
                    if to.compose(self.on_mor(g), self.on_mor(f)) != Some(self.on_mor(gf)) {
                        out.push(format!(
                            "composite {} ∘ {} not preserved",
                            from.mor_label(g),
                            from.mor_label(f)
                        ));
                    }
                }
            }
        }
        out
    }
}

/// The slice `C/A` together with its domain functor `dom_A: C/A -> C`.
///
/// Slice objects are the morphisms `p` with codomain `A` (in `MorId` order);
/// a slice morphism `q -> p` is a base morphism `g` with `p ∘ g = q`.
pub fn slice_category(c: &FinCat, a: ObjId) -> Result<(FinCat, FunctorData), CatError> {
    c.check_object(a)?;
    let legs: Vec<MorId> = c.arrows_into(a).to_vec();
    let slot: HashMap<MorId, usize> = legs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let obj_labels: Vec<String> = legs.iter().map(|&p| c.mor_label(p).to_string()).collect();
    let mut mor_labels = Vec::new();
    let mut src = Vec::new();
    let mut dst = Vec::new();
    let mut arrows = Vec::new();
    let mut index: HashMap<(usize, MorId), MorId> = HashMap::new();
    for (pi, &p) in legs.iter().enumerate() {
        for &g in c.arrows_into(c.src(p)) {
            let q = c.comp(p, g);
            let qi = slot[&q];
            let id = MorId(arrows.len());
            index.insert((pi, g), id);
            mor_labels.push(format!("{}:{}→{}", c.mor_label(g), obj_labels[qi], obj_labels[pi]));
            src.push(ObjId(qi));
            dst.push(ObjId(pi));
            arrows.push(g);
        }
    }
    let m = arrows.len();
    let mut compose = vec![None; m * m];
    for gi in 0..m {
        for fi in 0..m {
            if dst[fi] == src[gi] {
                let h = c.comp(arrows[gi], arrows[fi]);
                compose[gi * m + fi] = Some(index[&(dst[gi].0, h)]);
            }
        }
    }
    let identities: Vec<MorId> = legs.iter().enumerate().map(|(pi, &p)| index[&(pi, c.id(c.src(p)))]).collect();
    let dom = FunctorData {
        obj_map: legs.iter().map(|&p| c.src(p)).collect(),
        mor_map: arrows.clone(),
    };
    let cat = FinCat::assemble(
        obj_labels,
        mor_labels,
        src,
        dst,
        identities,
        compose,
        CatShape::Slice { over: a, legs, arrows },
    );
    Ok((cat, dom))
}

/// A single failure found by [`validate_category`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CategoryViolation {
    /// A morphism listed in `hom(a, b)` does not have that source/target.
    HomTyping { morphism: String },
    /// A composite is defined on a non-composable pair, undefined on a
    /// composable one, or has the wrong endpoints.
    Typing { g: String, f: String, detail: String },
    Identity { morphism: String, side: &'static str },
    Associativity { h: String, g: String, f: String },
    Tensor { detail: String },
}

impl fmt::Display for CategoryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CategoryViolation::HomTyping { morphism } => write!(f, "hom-set typing: {morphism}"),
            CategoryViolation::Typing { g, f: ff, detail } => write!(f, "typing of {g} ∘ {ff}: {detail}"),
            CategoryViolation::Identity { morphism, side } => write!(f, "{side} identity law fails at {morphism}"),
            CategoryViolation::Associativity { h, g, f: ff } => {
                write!(f, "associativity fails at ({h}, {g}, {ff})")
            }
            CategoryViolation::Tensor { detail } => write!(f, "tensor: {detail}"),
        }
    }
}

/// Exhaustively checks the category laws (and tensor functoriality when a
/// monoidal structure is present). Law checks skip pairs whose composite is
/// already reported as mistyped, so each injected fault is reported once.
pub fn validate_category(c: &FinCat) -> Vec<CategoryViolation> {
    let mut out = Vec::new();
    for a in c.objects() {
        for b in c.objects() {
            for &m in c.hom(a, b) {
                if c.src(m) != a || c.dst(m) != b {
                    out.push(CategoryViolation::HomTyping { morphism: c.mor_label(m).into() });
                }
            }
        }
    }
    let n = c.n_morphisms();
    let mut bad = vec![false; n * n];
    for g in c.morphisms() {
        for f in c.morphisms() {
            let composable = c.dst(f) == c.src(g);
            let detail = match (composable, c.compose(g, f)) {
                (true, None) => Some("composable pair has no composite".to_string()),
                (false, Some(_)) => Some("composite defined on a non-composable pair".to_string()),
                (true, Some(h)) if c.src(h) != c.src(f) || c.dst(h) != c.dst(g) => Some(format!(
                    "composite {} has type {} → {}, expected {} → {}",
                    c.mor_label(h),
                    c.obj_label(c.src(h)),
                    c.obj_label(c.dst(h)),
                    c.obj_label(c.src(f)),
                    c.obj_label(c.dst(g))
                )),
                _ => None,
            };
            if let Some(detail) = detail {
                bad[g.0 * n + f.0] = true;
                out.push(CategoryViolation::Typing {
                    g: c.mor_label(g).into(),
                    f: c.mor_label(f).into(),
                    detail,
                });
            }
        }
    }
    let ok = |g: MorId, f: MorId| -> Option<MorId> {
        if bad[g.0 * n + f.0] {
            None
        } else {
            c.compose(g, f)
        }
    };
    for f in c.morphisms() {
        let left = c.id(c.dst(f));
        let right = c.id(c.src(f));
        if !bad[left.0 * n + f.0] && c.compose(left, f) != Some(f) {
            out.push(CategoryViolation::Identity { morphism: c.mor_label(f).into(), side: "left" });
        }
        if !bad[f.0 * n + right.0] && c.compose(f, right) != Some(f) {
            out.push(CategoryViolation::Identity { morphism: c.mor_label(f).into(), side: "right" });
        }
    }
    for h in c.morphisms() {
        for g in c.morphisms() {
            if c.dst(g) != c.src(h) {
                continue;
            }
            for f in c.morphisms() {
                if c.dst(f) != c.src(g) {
                    continue;
                }
                let (Some(hg), Some(gf)) = (ok(h, g), ok(g, f)) else { continue };
                let (Some(l), Some(r)) = (ok(hg, f), ok(h, gf)) else { continue };
                if l != r {
                    out.push(CategoryViolation::Associativity {
                        h: c.mor_label(h).into(),
                        g: c.mor_label(g).into(),
                        f: c.mor_label(f).into(),
                    });
                }
            }
        }
    }
    if let Some(t) = c.monoidal() {
        out.extend(validate_tensor(c, t));
    }
    out
}

fn validate_tensor(c: &FinCat, t: &MonoidalStructure) -> Vec<CategoryViolation> {
    let mut out = Vec::new();
    let mut push = |detail: String| out.push(CategoryViolation::Tensor { detail });
    if !c.contains_object(t.unit()) {
        push("unit object is not in the category".into());
        return out;
    }
    for a in c.objects() {
        if t.tensor_obj(t.unit(), a) != Some(a) || t.tensor_obj(a, t.unit()) != Some(a) {
            push(format!("unit is not strict at {}", c.obj_label(a)));
        }
        for b in c.objects() {
            let Some(ab) = t.tensor_obj(a, b) else { continue };
            if t.is_symmetric() && t.tensor_obj(b, a) != Some(ab) {
                push(format!("{} ⊗ {} has no symmetric counterpart", c.obj_label(a), c.obj_label(b)));
            }
            if t.tensor_mor(c.id(a), c.id(b)) != Some(c.id(ab)) {
                push(format!("id ⊗ id ≠ id at ({}, {})", c.obj_label(a), c.obj_label(b)));
            }
            for cc in c.objects() {
                let l = t.tensor_obj(ab, cc);
                let r = t.tensor_obj(b, cc).and_then(|bc| t.tensor_obj(a, bc));
                if l != r {
                    push(format!(
                        "tensor not strictly associative at ({}, {}, {})",
                        c.obj_label(a),
                        c.obj_label(b),
                        c.obj_label(cc)
                    ));
                }
            }
        }
    }
    for f in c.morphisms() {
        for g in c.morphisms() {
            let Some(fg) = t.tensor_mor(f, g) else { continue };
            if Some(c.src(fg)) != t.tensor_obj(c.src(f), c.src(g))
                || Some(c.dst(fg)) != t.tensor_obj(c.dst(f), c.dst(g))
            {
                push(format!("{} ⊗ {} is mistyped", c.mor_label(f), c.mor_label(g)));
            }
        }
    }
    // (f2 ∘ f1) ⊗ (g2 ∘ g1) = (f2 ⊗ g2) ∘ (f1 ⊗ g1)
    for f1 in c.morphisms() {
        for f2 in c.morphisms().filter(|&f2| c.src(f2) == c.dst(f1)) {
            for g1 in c.morphisms() {
                for g2 in c.morphisms().filter(|&g2| c.src(g2) == c.dst(g1)) {
                    let Some(lhs) = t.tensor_mor(c.comp(f2, f1), c.comp(g2, g1)) else { continue };
                    let rhs = t
                        .tensor_mor(f2, g2)
                        .zip(t.tensor_mor(f1, g1))
                        .and_then(|(a, b)| c.compose(a, b));
                    if rhs != Some(lhs) {
                        push(format!(
                            "interchange fails at ({}, {}, {}, {})",
                            c.mor_label(f1),
                            c.mor_label(f2),
                            c.mor_label(g1),
                            c.mor_label(g2)
                        ));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn locs(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn powerset_of_two_locations() {
        let c = build_powerset_category(&locs(&["x", "y"])).unwrap();
        assert_eq!(c.n_objects(), 4);
        assert_eq!(c.n_morphisms(), 9);
        let x = c.subset_named(&["x"]).unwrap();
        let y = c.subset_named(&["y"]).unwrap();
        let empty = c.subset(0).unwrap();
        assert!(c.hom(x, empty).is_empty());
        let t = c.monoidal().unwrap();
        assert_eq!(t.tensor_obj(x, y), c.subset_named(&["x", "y"]));
        assert_eq!(t.unit(), empty);
        assert!(validate_category(&c).is_empty());
    }

    #[test]
    fn powerset_tensor_commutative_idempotent() {
        let c = build_powerset_category(&locs(&["x", "y", "z"])).unwrap();
        let t = c.monoidal().unwrap();
        for a in c.objects() {
            assert_eq!(t.tensor_obj(a, a), Some(a));
            for b in c.objects() {
                assert_eq!(t.tensor_obj(a, b), t.tensor_obj(b, a));
            }
        }
    }

    #[test]
    fn powerset_bound() {
        let five = locs(&["a", "b", "c", "d", "e"]);
        assert_eq!(
            build_powerset_category(&five).unwrap_err(),
            CatError::BoundExceeded { requested: 5, bound: 4 }
        );
        let empty = build_powerset_category(&[]).unwrap();
        assert_eq!(empty.n_objects(), 1);
        assert!(validate_category(&empty).is_empty());
    }

    #[test]
    fn surjection_counts() {
        let c = build_finsurj_category(3).unwrap();
        let one = ObjId(0);
        let two = ObjId(1);
        let three = ObjId(2);
        assert_eq!(c.hom(two, two).len(), 2);
        assert_eq!(c.hom(one, two).len(), 0);
        assert_eq!(c.hom(three, two).len(), 6);
        assert!(validate_category(&c).is_empty());
    }

    #[test]
    fn finsurj_tensor_is_partial() {
        let c = build_finsurj_category(3).unwrap();
        let t = c.monoidal().unwrap();
        assert_eq!(t.tensor_obj(ObjId(1), ObjId(1)), None);
        assert_eq!(t.tensor_obj(ObjId(0), ObjId(2)), Some(ObjId(2)));
        let c4 = build_finsurj_category(4).unwrap();
        assert_eq!(c4.monoidal().unwrap().tensor_obj(ObjId(1), ObjId(1)), Some(ObjId(3)));
        assert!(validate_category(&c4).is_empty());
        assert!(build_finsurj_category(5).is_err());
    }

    #[test]
    fn slice_over_powerset_is_downset() {
        let c = build_powerset_category(&locs(&["x", "y"])).unwrap();
        let top = c.subset(0b11).unwrap();
        let (s, dom) = slice_category(&c, top).unwrap();
        assert_eq!(s.n_objects(), 4);
        assert!(s.is_preorder());
        assert!(validate_category(&s).is_empty());
        assert!(dom.validate(&s, &c).is_empty());
        let mut images: Vec<ObjId> = s.objects().map(|p| dom.on_obj(p)).collect();
        images.sort();
        assert_eq!(images, c.objects().collect::<Vec<_>>());
        // order-isomorphism: q → p in the slice iff dom q ⊆ dom p
        for q in s.objects() {
            for p in s.objects() {
                let base = c.hom(dom.on_obj(q), dom.on_obj(p)).len();
                assert_eq!(s.hom(q, p).len(), base);
            }
        }
    }

    #[test]
    fn slice_over_empty_set() {
        let c = build_powerset_category(&locs(&["x", "y"])).unwrap();
        let (s, dom) = slice_category(&c, ObjId(0)).unwrap();
        assert_eq!(s.n_objects(), 1);
        assert_eq!(dom.on_obj(ObjId(0)), ObjId(0));
        assert!(slice_category(&c, ObjId(9)).is_err());
    }

    #[test]
    fn slice_of_surjections_validates() {
        let c = build_finsurj_category(3).unwrap();
        for a in c.objects() {
            let (s, dom) = slice_category(&c, a).unwrap();
            assert!(validate_category(&s).is_empty());
            assert!(dom.validate(&s, &c).is_empty());
        }
    }

    #[test]
    fn mistyped_composite_reported_once() {
        let mut b = FinCatBuilder::new();
        let a = b.object("a");
        let bb = b.object("b");
        let cc = b.object("c");
        for o in [a, bb, cc] {
            b.identity(o);
        }
        let f = b.morphism("f", a, bb);
        let g = b.morphism("g", bb, cc);
        let gf = b.morphism("gf", a, cc);
        b.compose_identities();
        b.compose(g, f, g);
        let _ = gf;
        let c = b.build().unwrap();
        let report = validate_category(&c);
        assert_eq!(report.len(), 1, "{report:?}");
        assert!(matches!(report[0], CategoryViolation::Typing { .. }));
    }
}
