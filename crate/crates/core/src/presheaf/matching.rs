use std::collections::HashMap;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;

use super::sheaf::{for_each_family, SieveLayout, FAMILY_BUDGET};
use super::{Presheaf, PresheafError, SheafMorphism};
use crate::element::Element;
use crate::fincat::{CatShape, FinCat, MorId, ObjId};
use crate::site::{pullback_sieve, Coverage, Sieve};

/// A commuting square `f ∘ left = g ∘ right` with apex `object`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PullbackSquare {
    pub object: ObjId,
    pub left: MorId,
    pub right: MorId,
}

/// On a powerset base the pullback of two inclusions is the intersection.
pub fn poset_pullback(c: &FinCat, f: MorId, g: MorId) -> Option<PullbackSquare> {
    if !matches!(c.shape(), CatShape::Powerset { .. }) || c.dst(f) != c.dst(g) {
        return None;
    }
    let meet = c.subset(c.mask(c.src(f)) & c.mask(c.src(g)))?;
    Some(PullbackSquare { object: meet, left: c.arrow(meet, c.src(f))?, right: c.arrow(meet, c.src(g))? })
}

/// Pairs `(s_f, s_g)` agreeing on the apex of the square.
pub fn matching_object(
    p: &Presheaf,
    a: ObjId,
    f: MorId,
    g: MorId,
    square: &PullbackSquare,
) -> Result<Vec<(Element, Element)>, PresheafError> {
    let c = p.base();
    c.check_object(a).map_err(|_| PresheafError::UnknownObject(a))?;
    let typed = c.dst(f) == a
        && c.dst(g) == a
        && c.src(square.left) == square.object
        && c.src(square.right) == square.object
        && c.dst(square.left) == c.src(f)
        && c.dst(square.right) == c.src(g);
    if !typed || c.compose(f, square.left) != c.compose(g, square.right) {
        return Err(PresheafError::SquareDoesNotCommute(format!(
            "{} ∘ {} vs {} ∘ {}",
            c.mor_label(f),
            c.mor_label(square.left),
            c.mor_label(g),
            c.mor_label(square.right)
        )));
    }
    let mut out = Vec::new();
    for i in 0..p.len_at(c.src(f)) {
        for j in 0..p.len_at(c.src(g)) {
            if p.restrict_idx(square.left, i) == p.restrict_idx(square.right, j) {
                out.push((p.section(c.src(f), i).clone(), p.section(c.src(g), j).clone()));
            }
        }
    }
    Ok(out)
}

/// The canonical representative of a refinement class: its smallest cover
/// (fewest members, then lexicographic) and the family there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingClass {
    pub cover: Sieve,
    /// Section indices aligned with the cover's members in ascending order.
    pub family: Vec<usize>,
    /// Number of (cover, family) pairs in the class.
    pub size: usize,
}

/// Refinement classes of compatible families over covering sieves, as a
/// presheaf whose sections are `Element::Class(i)` indexing `classes`.
#[derive(Clone, Debug)]
pub struct MatchingPresheaf {
    presheaf: Arc<Presheaf>,
    resource: Arc<Presheaf>,
    classes: Vec<Vec<MatchingClass>>,
    lookup: Vec<HashMap<(Sieve, Vec<usize>), usize>>,
}

impl MatchingPresheaf {
    pub fn presheaf(&self) -> &Arc<Presheaf> {
        &self.presheaf
    }

    pub fn resource(&self) -> &Arc<Presheaf> {
        &self.resource
    }

    pub fn classes(&self, a: ObjId) -> &[MatchingClass] {
        &self.classes[a.0]
    }

    /// Class of an arbitrary compatible family over a covering sieve.
    pub fn class_of(&self, cover: &Sieve, family: &[usize]) -> Option<usize> {
        self.lookup[cover.target().0].get(&(cover.clone(), family.to_vec())).copied()
    }
}

fn sieve_key(s: &Sieve) -> (usize, Vec<MorId>) {
    (s.len(), s.members().iter().copied().collect())
}

/// Builds the matching-object presheaf. Two families are identified when
/// they agree on a covering sieve; restriction pulls the cover back.
pub fn matching_presheaf(p: &Arc<Presheaf>, cov: &Coverage) -> Result<MatchingPresheaf, PresheafError> {
    if !p.same_base(cov.base()) {
        return Err(PresheafError::BaseMismatch);
    }
    let c = p.base().clone();
    let mut classes = Vec::with_capacity(c.n_objects());
    let mut lookup = Vec::with_capacity(c.n_objects());
    for a in c.objects() {
        let mut covers: Vec<&Sieve> = cov.covers(a).iter().collect();
        covers.sort_by_key(|s| sieve_key(s));
        let mut items: Vec<(usize, Vec<usize>)> = Vec::new();
        for (si, s) in covers.iter().enumerate() {
            let layout = SieveLayout::new(&c, s);
            for_each_family(p, &layout, FAMILY_BUDGET, |fam| {
                items.push((si, fam.to_vec()));
                true
            })
            .map_err(|_| PresheafError::BudgetExceeded {
                object: c.obj_label(a).into(),
                cover: s.render(&c),
                budget: FAMILY_BUDGET,
            })?;
        }
        let members: Vec<Vec<MorId>> = covers.iter().map(|s| s.members().iter().copied().collect()).collect();
        let mut uf = UnionFind::<usize>::new(items.len());
        for i in 0..items.len() {
            for j in (i + 1)..items.len() {
                if uf.equiv(i, j) {
                    continue;
                }
                let (si, ref x) = items[i];
                let (sj, ref y) = items[j];
                let agree: std::collections::BTreeSet<MorId> = members[si]
                    .iter()
                    .enumerate()
                    .filter_map(|(pi, f)| {
                        let pj = members[sj].binary_search(f).ok()?;
                        (x[pi] == y[pj]).then_some(*f)
                    })
                    .collect();
                if cov.is_covering(&Sieve::from_members(a, agree)) {
                    uf.union(i, j);
                }
            }
        }
        // Canonical representative per root: least (cover key, family).
        let mut best: HashMap<usize, usize> = HashMap::new();
        let mut sizes: HashMap<usize, usize> = HashMap::new();
        for i in 0..items.len() {
            let r = uf.find(i);
            *sizes.entry(r).or_default() += 1;
            let better = match best.get(&r) {
                None => true,
                Some(&b) => {
                    (sieve_key(covers[items[i].0]), &items[i].1) < (sieve_key(covers[items[b].0]), &items[b].1)
                }
            };
            if better {
                best.insert(r, i);
            }
        }
        let mut roots: Vec<(usize, usize)> = best.into_iter().collect();
        roots.sort_by(|&(_, x), &(_, y)| {
            (sieve_key(covers[items[x].0]), &items[x].1).cmp(&(sieve_key(covers[items[y].0]), &items[y].1))
        });
        let class_of_root: HashMap<usize, usize> = roots.iter().enumerate().map(|(k, &(r, _))| (r, k)).collect();
        let stage_classes: Vec<MatchingClass> = roots
            .iter()
            .map(|&(r, i)| MatchingClass { cover: covers[items[i].0].clone(), family: items[i].1.clone(), size: sizes[&r] })
            .collect();
        let stage_lookup: HashMap<(Sieve, Vec<usize>), usize> = items
            .iter()
            .enumerate()
            .map(|(i, (si, fam))| ((covers[*si].clone(), fam.clone()), class_of_root[&uf.find(i)]))
            .collect();
        classes.push(stage_classes);
        lookup.push(stage_lookup);
    }
    // Restriction: pull the cover back and restrict componentwise; checked
    // to be independent of the representative.
    let restrict_item = |h: MorId, s: &Sieve, fam: &[usize]| -> Result<(Sieve, Vec<usize>), PresheafError> {
        let pb = pullback_sieve(&c, s, h)?;
        let pos: Vec<MorId> = s.members().iter().copied().collect();
        let fam2 = pb.members().iter().map(|&g| fam[pos.binary_search(&c.comp(h, g)).expect("h ∘ g ∈ S")]).collect();
        Ok((pb, fam2))
    };
    let mut restrict = Vec::with_capacity(c.n_morphisms());
    for h in c.morphisms() {
        let (b, a) = (c.src(h), c.dst(h));
        let mut table = vec![usize::MAX; classes[a.0].len()];
        for ((s, fam), &k) in &lookup[a.0] {
            let key = restrict_item(h, s, fam)?;
            let target = *lookup[b.0].get(&key).ok_or_else(|| {
                PresheafError::Malformed(format!("restricted family along {} is not enumerated", c.mor_label(h)))
            })?;
            if table[k] == usize::MAX {
                table[k] = target;
            } else if table[k] != target {
                return Err(PresheafError::Malformed(format!(
                    "restriction along {} is not well defined on classes",
                    c.mor_label(h)
                )));
            }
        }
        restrict.push(table);
    }
    let sections = classes.iter().map(|cl| (0..cl.len()).map(Element::Class).collect()).collect();
    let presheaf = Arc::new(Presheaf::from_tables(format!("Match({})", p.name()), c, sections, restrict)?);
    Ok(MatchingPresheaf { presheaf, resource: p.clone(), classes, lookup })
}

/// The amalgamation map `Match(F) → F` together with its inverse and the
/// results of checking that both are natural and mutually inverse.
#[derive(Clone, Debug)]
pub struct AmalgamationIso {
    pub forward: SheafMorphism,
    pub inverse: SheafMorphism,
    pub bijectivity: Vec<String>,
    pub naturality: Vec<String>,
}

impl AmalgamationIso {
    pub fn is_iso(&self) -> bool {
        self.bijectivity.is_empty() && self.naturality.is_empty()
    }
}

pub fn amalgamation_operator(
    p: &Arc<Presheaf>,
    cov: &Coverage,
    m: &MatchingPresheaf,
) -> Result<AmalgamationIso, PresheafError> {
    if !Arc::ptr_eq(p, m.resource()) {
        return Err(PresheafError::BaseMismatch);
    }
    let c = p.base().clone();
    let mut forward = Vec::with_capacity(c.n_objects());
    let mut inverse = Vec::with_capacity(c.n_objects());
    for a in c.objects() {
        let mut comp = Vec::with_capacity(m.classes(a).len());
        for class in m.classes(a) {
            let members: Vec<MorId> = class.cover.members().iter().copied().collect();
            let mut hits =
                (0..p.len_at(a)).filter(|&i| members.iter().zip(&class.family).all(|(&f, &x)| p.restrict_idx(f, i) == x));
            match (hits.next(), hits.next()) {
                (Some(i), None) => comp.push(Some(i)),
                (None, _) => {
                    return Err(PresheafError::NotASheaf(format!(
                        "a family over {} at {} has no amalgamation",
                        class.cover.render(&c),
                        c.obj_label(a)
                    )))
                }
                (Some(i), Some(j)) => {
                    return Err(PresheafError::NotASheaf(format!(
                        "{} and {} amalgamate the same family at {}",
                        p.render(a, i),
                        p.render(a, j),
                        c.obj_label(a)
                    )))
                }
            }
        }
        forward.push(comp);
        let max = crate::site::Sieve::maximal(&c, a);
        if !cov.is_covering(&max) {
            return Err(PresheafError::Malformed(format!("maximal sieve on {} is not covering", c.obj_label(a))));
        }
        let members: Vec<MorId> = max.members().iter().copied().collect();
        let inv = (0..p.len_at(a))
            .map(|i| {
                let fam: Vec<usize> = members.iter().map(|&f| p.restrict_idx(f, i)).collect();
                m.class_of(&max, &fam)
            })
            .collect();
        inverse.push(inv);
    }
    let forward = SheafMorphism::new(m.presheaf().clone(), p.clone(), forward)?;
    let inverse = SheafMorphism::new(p.clone(), m.presheaf().clone(), inverse)?;
    let mut bijectivity = Vec::new();
    for a in c.objects() {
        for i in 0..p.len_at(a) {
            if inverse.apply(a, i).and_then(|k| forward.apply(a, k)) != Some(i) {
                bijectivity.push(format!("θ then amalgamation moves {} at {}", p.render(a, i), c.obj_label(a)));
            }
        }
        for k in 0..m.classes(a).len() {
            if forward.apply(a, k).and_then(|i| inverse.apply(a, i)) != Some(k) {
                bijectivity.push(format!("amalgamation then θ moves class {k} at {}", c.obj_label(a)));
            }
        }
    }
    let mut naturality = forward.naturality_violations();
    naturality.extend(inverse.naturality_violations());
    Ok(AmalgamationIso { forward, inverse, bijectivity, naturality })
}
