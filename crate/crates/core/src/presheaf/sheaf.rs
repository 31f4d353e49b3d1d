use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::{Presheaf, PresheafError};
use crate::element::{Element, Heap};
use crate::fincat::{slice_category, FinCat, MorId, ObjId};
use crate::site::{Coverage, Sieve};

/// Upper bound on compatible families enumerated over one cover.
pub const FAMILY_BUDGET: usize = 2_000_000;

/// Sections `x_f ∈ F(dom f)` for members `f` of a sieve. The assignment may
/// list only a generating subset; the rest is filled in by restriction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatibleFamily {
    pub sieve: Sieve,
    pub assignment: BTreeMap<MorId, Element>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AmalgamationError {
    #[error("family is incompatible: {0}")]
    Incompatible(String),
    #[error("no amalgamation exists")]
    NoAmalgamation,
    #[error("amalgamation is not unique: {first} and {second} both restrict to the family")]
    NonUnique { first: String, second: String },
    #[error("malformed family: {0}")]
    Malformed(String),
}

/// Members of a sieve in a fixed order plus, per generator, the positions
/// of its precompositions.
pub(crate) struct SieveLayout {
    pub members: Vec<MorId>,
    pub position: HashMap<MorId, usize>,
    pub gens: Vec<MorId>,
    /// For each generator: `(position of g ∘ k, k)`.
    pub spread: Vec<Vec<(usize, MorId)>>,
}

impl SieveLayout {
    pub fn new(c: &FinCat, s: &Sieve) -> SieveLayout {
        let members: Vec<MorId> = s.members().iter().copied().collect();
        let position: HashMap<MorId, usize> = members.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let gens = s.generators(c);
        let spread = gens
            .iter()
            .map(|&g| c.arrows_into(c.src(g)).iter().map(|&k| (position[&c.comp(g, k)], k)).collect())
            .collect();
        SieveLayout { members, position, gens, spread }
    }
}

/// Calls `visit` with every compatible family over the sieve, as section
/// indices aligned with `layout.members`. Stops early when `visit` returns
/// false. Families are determined by their values on generators.
pub(crate) fn for_each_family(
    p: &Presheaf,
    layout: &SieveLayout,
    budget: usize,
    mut visit: impl FnMut(&[usize]) -> bool,
) -> Result<usize, usize> {
    let c = p.base();
    let mut values: Vec<Option<usize>> = vec![None; layout.members.len()];
    let mut count = 0usize;

    #[allow(clippy::too_many_arguments)]
    fn rec(
        p: &Presheaf,
        c: &FinCat,
        layout: &SieveLayout,
        gi: usize,
        values: &mut Vec<Option<usize>>,
        count: &mut usize,
        budget: usize,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<bool, ()> {
        if gi == layout.gens.len() {
            *count += 1;
            if *count > budget {
                return Err(());
            }
            let full: Vec<usize> = values.iter().map(|v| v.expect("generators reach every member")).collect();
            return Ok(visit(&full));
        }
        let g = layout.gens[gi];
        for v in 0..p.len_at(c.src(g)) {
            let mut touched = Vec::new();
            let mut ok = true;
            for &(pos, k) in &layout.spread[gi] {
                let r = p.restrict_idx(k, v);
                match values[pos] {
                    Some(existing) if existing != r => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        values[pos] = Some(r);
                        touched.push(pos);
                    }
                }
            }
            let keep_going = if ok { rec(p, c, layout, gi + 1, values, count, budget, visit)? } else { true };
            for pos in touched {
                values[pos] = None;
            }
            if !keep_going {
                return Ok(false);
            }
        }
        Ok(true)
    }

    match rec(p, c, layout, 0, &mut values, &mut count, budget, &mut visit) {
        Ok(_) => Ok(count),
        Err(()) => Err(count),
    }
}

/// All compatible families over `s`.
pub fn compatible_families(p: &Presheaf, s: &Sieve) -> Result<Vec<CompatibleFamily>, PresheafError> {
    let c = p.base();
    let layout = SieveLayout::new(c, s);
    let mut out = Vec::new();
    for_each_family(p, &layout, FAMILY_BUDGET, |fam| {
        let assignment =
            layout.members.iter().zip(fam).map(|(&m, &i)| (m, p.section(c.src(m), i).clone())).collect();
        out.push(CompatibleFamily { sieve: s.clone(), assignment });
        true
    })
    .map_err(|_| budget_error(c, s))?;
    Ok(out)
}

fn budget_error(c: &FinCat, s: &Sieve) -> PresheafError {
    PresheafError::BudgetExceeded { object: c.obj_label(s.target()).into(), cover: s.render(c), budget: FAMILY_BUDGET }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SheafFailure {
    NoAmalgamation { object: String, cover: String, family: String },
    NonUnique { object: String, cover: String, family: String, first: String, second: String },
    Incompatible { object: String, cover: String, detail: String },
}

impl fmt::Display for SheafFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SheafFailure::NoAmalgamation { object, cover, family } => {
                write!(f, "no amalgamation at {object} over {cover} for family [{family}]")
            }
            SheafFailure::NonUnique { object, cover, family, first, second } => write!(
                f,
                "amalgamation at {object} over {cover} for [{family}] is not unique: {first}, {second}"
            ),
            SheafFailure::Incompatible { object, cover, detail } => {
                write!(f, "supplied family over {cover} at {object} is incompatible: {detail}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SheafReport {
    pub covers_checked: usize,
    pub families_checked: usize,
    pub failures: Vec<SheafFailure>,
}

impl SheafReport {
    pub fn is_sheaf(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug)]
pub enum SheafMode {
    Exhaustive,
    Families(Vec<CompatibleFamily>),
}

fn render_family(p: &Presheaf, layout: &SieveLayout, fam: &[usize]) -> String {
    let c = p.base();
    layout
        .gens
        .iter()
        .map(|g| {
            let pos = layout.position[g];
            format!("{} ↦ {}", c.mor_label(*g), p.render(c.src(*g), fam[pos]))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Verifies existence and uniqueness of amalgamations.
pub fn check_sheaf(p: &Presheaf, cov: &Coverage, mode: &SheafMode) -> Result<SheafReport, PresheafError> {
    if !p.same_base(cov.base()) {
        return Err(PresheafError::BaseMismatch);
    }
    let c = p.base();
    let mut report = SheafReport::default();
    match mode {
        SheafMode::Exhaustive => {
            for a in c.objects() {
                for s in cov.covers(a) {
                    report.covers_checked += 1;
                    let layout = SieveLayout::new(c, s);
                    let mut by_family: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
                    for i in 0..p.len_at(a) {
                        let key: Vec<usize> = layout.members.iter().map(|&f| p.restrict_idx(f, i)).collect();
                        by_family.entry(key).or_default().push(i);
                    }
                    let mut failures = Vec::new();
                    let n = for_each_family(p, &layout, FAMILY_BUDGET, |fam| {
                        match by_family.get(fam).map(|v| v.as_slice()) {
                            None | Some([]) => failures.push(SheafFailure::NoAmalgamation {
                                object: c.obj_label(a).into(),
                                cover: s.render(c),
                                family: render_family(p, &layout, fam),
                            }),
                            Some([_]) => {}
                            Some([x, y, ..]) => failures.push(SheafFailure::NonUnique {
                                object: c.obj_label(a).into(),
                                cover: s.render(c),
                                family: render_family(p, &layout, fam),
                                first: p.render(a, *x),
                                second: p.render(a, *y),
                            }),
                        }
                        true
                    })
                    .map_err(|_| budget_error(c, s))?;
                    report.families_checked += n;
                    report.failures.extend(failures);
                }
            }
        }
        SheafMode::Families(fams) => {
            for fam in fams {
                let a = fam.sieve.target();
                report.families_checked += 1;
                let object = c.obj_label(a).to_string();
                let cover = fam.sieve.render(c);
                match amalgamate(p, fam) {
                    Ok(_) => {}
                    Err(AmalgamationError::NoAmalgamation) => report.failures.push(SheafFailure::NoAmalgamation {
                        object,
                        cover,
                        family: render_assignment(p, fam),
                    }),
                    Err(AmalgamationError::NonUnique { first, second }) => {
                        report.failures.push(SheafFailure::NonUnique {
                            object,
                            cover,
                            family: render_assignment(p, fam),
                            first,
                            second,
                        })
                    }
                    Err(AmalgamationError::Incompatible(detail)) | Err(AmalgamationError::Malformed(detail)) => {
                        report.failures.push(SheafFailure::Incompatible { object, cover, detail })
                    }
                }
            }
            report.covers_checked = fams.len();
        }
    }
    Ok(report)
}

fn render_assignment(p: &Presheaf, fam: &CompatibleFamily) -> String {
    let c = p.base();
    fam.assignment
        .iter()
        .map(|(&m, e)| format!("{} ↦ {}", c.mor_label(m), e.render(p.locations())))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Extends a partial assignment to all sieve members, checking compatibility.
pub(crate) fn complete_family(p: &Presheaf, fam: &CompatibleFamily) -> Result<Vec<usize>, AmalgamationError> {
    let c = p.base();
    let s = &fam.sieve;
    if !s.is_sieve(c) {
        return Err(AmalgamationError::Malformed("cover is not a sieve".into()));
    }
    let layout = SieveLayout::new(c, s);
    let mut values: Vec<Option<usize>> = vec![None; layout.members.len()];
    for (&f, e) in &fam.assignment {
        if !layout.position.contains_key(&f) {
            return Err(AmalgamationError::Malformed(format!("{} is not in the cover", c.mor_label(f))));
        };
        let i = p.index_of(c.src(f), e).ok_or_else(|| {
            AmalgamationError::Malformed(format!("{} is not a section over {}", e.render(p.locations()), c.mor_label(f)))
        })?;
        for &k in c.arrows_into(c.src(f)) {
            let target = layout.position[&c.comp(f, k)];
            let r = p.restrict_idx(k, i);
            match values[target] {
                Some(existing) if existing != r => {
                    let g = layout.members[target];
                    return Err(AmalgamationError::Incompatible(format!(
                        "at {}: {} restricts to {} but {} is already assigned",
                        c.mor_label(g),
                        e.render(p.locations()),
                        p.render(c.src(g), r),
                        p.render(c.src(g), existing)
                    )));
                }
                _ => values[target] = Some(r),
            }
        }
    }
    values
        .into_iter()
        .enumerate()
        .map(|(pos, v)| {
            v.ok_or_else(|| {
                AmalgamationError::Malformed(format!("no value reaches {}", c.mor_label(layout.members[pos])))
            })
        })
        .collect()
}

/// The unique section restricting to the family.
pub fn amalgamate(p: &Presheaf, fam: &CompatibleFamily) -> Result<Element, AmalgamationError> {
    let c = p.base();
    let full = complete_family(p, fam)?;
    let a = fam.sieve.target();
    let members: Vec<MorId> = fam.sieve.members().iter().copied().collect();
    let matches = |i: usize| members.iter().zip(&full).all(|(&f, &x)| p.restrict_idx(f, i) == x);
    if p.is_powerset() {
        let target = c.mask(a);
        let union = members.iter().fold(0u32, |acc, &f| acc | c.mask(c.src(f)));
        let heaps: Option<Vec<&Heap>> =
            members.iter().zip(&full).map(|(&f, &x)| p.section(c.src(f), x).as_heap()).collect();
        if let (Some(heaps), true) = (heaps, union == target) {
            // Pointwise union: every location of the stage is seen by some leg.
            let mut cells = BTreeMap::new();
            for h in heaps {
                cells.extend(h.cells().iter().map(|(&l, &v)| (l, v)));
            }
            let cand = Element::Heap(Heap::new(target, cells).expect("cells within the stage"));
            return match p.index_of(a, &cand) {
                Some(i) if matches(i) => Ok(cand),
                _ => Err(AmalgamationError::NoAmalgamation),
            };
        }
    }
    let mut found = (0..p.len_at(a)).filter(|&i| matches(i));
    match (found.next(), found.next()) {
        (None, _) => Err(AmalgamationError::NoAmalgamation),
        (Some(i), None) => Ok(p.section(a, i).clone()),
        (Some(i), Some(j)) => Err(AmalgamationError::NonUnique { first: p.render(a, i), second: p.render(a, j) }),
    }
}

/// `F ∘ dom_A` on the slice over `a`.
pub fn slice_restrict(p: &Presheaf, a: ObjId) -> Result<Presheaf, PresheafError> {
    let c = p.base();
    c.check_object(a).map_err(|_| PresheafError::UnknownObject(a))?;
    let (s, dom) = slice_category(c, a)?;
    let s = Arc::new(s);
    let sections = s.objects().map(|q| p.at(dom.on_obj(q)).to_vec()).collect();
    let restrict = s.morphisms().map(|g| p.restrict_table(dom.on_mor(g)).to_vec()).collect();
    Presheaf::from_tables(format!("{}|{}", p.name(), c.obj_label(a)), s, sections, restrict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::build_powerset_category;
    use crate::presheaf::{build_resource_sheaf, validate_presheaf, ResourceKind};
    use crate::site::{build_coverage, slice_coverage, CoverageKind};

    fn setup(names: &[&str]) -> (Arc<FinCat>, Coverage) {
        let c = Arc::new(build_powerset_category(&names.iter().map(|s| s.to_string()).collect::<Vec<_>>()).unwrap());
        let cov = build_coverage(c.clone(), CoverageKind::DownwardClosed).unwrap();
        (c, cov)
    }

    fn heap(stage: u32, cells: &[(usize, i64)]) -> Element {
        Element::Heap(Heap::from_pairs(stage, cells).unwrap())
    }

    fn two_point_family(c: &FinCat, x: Element, y: Element) -> CompatibleFamily {
        let top = c.subset(0b11).unwrap();
        let fx = c.arrow(c.subset(0b01).unwrap(), top).unwrap();
        let fy = c.arrow(c.subset(0b10).unwrap(), top).unwrap();
        CompatibleFamily {
            sieve: Sieve::generated(c, top, &[fx, fy]).unwrap(),
            assignment: [(fx, x), (fy, y)].into_iter().collect(),
        }
    }

    #[test]
    fn memory_sheaves() {
        let (c, cov) = setup(&["x", "y"]);
        for kind in [ResourceKind::StrictMemory { values: vec![0, 1] }, ResourceKind::PartialMemory { values: vec![0, 1] }] {
            let p = build_resource_sheaf(c.clone(), &kind).unwrap();
            let r = check_sheaf(&p, &cov, &SheafMode::Exhaustive).unwrap();
            assert!(r.is_sheaf(), "{:?}", r.failures);
            assert!(r.families_checked > 0);
        }
    }

    #[test]
    fn support_bounded_fails_with_witness() {
        let (c, cov) = setup(&["x", "y"]);
        let p = build_resource_sheaf(c.clone(), &ResourceKind::SupportBounded { values: vec![0, 1], k: 1 }).unwrap();
        let fam = two_point_family(&c, heap(0b01, &[(0, 0)]), heap(0b10, &[(1, 0)]));
        assert_eq!(amalgamate(&p, &fam), Err(AmalgamationError::NoAmalgamation));
        let r = check_sheaf(&p, &cov, &SheafMode::Families(vec![fam])).unwrap();
        assert!(matches!(r.failures.as_slice(), [SheafFailure::NoAmalgamation { .. }]));
        let full = check_sheaf(&p, &cov, &SheafMode::Exhaustive).unwrap();
        assert!(full.failures.iter().any(|f| matches!(f, SheafFailure::NoAmalgamation { family, .. }
            if family.contains("{x:0}") && family.contains("{y:0}"))));
    }

    #[test]
    fn constant_presheaf_is_sheaf() {
        let (c, cov) = setup(&["x", "y"]);
        let p = build_resource_sheaf(
            c.clone(),
            &ResourceKind::Constant(vec![Element::Integer(0), Element::Integer(1), Element::Integer(2)]),
        )
        .unwrap();
        assert!(check_sheaf(&p, &cov, &SheafMode::Exhaustive).unwrap().is_sheaf());
        // Families with different values at the ∅-indexed leg are incompatible.
        let top = c.subset(0b11).unwrap();
        let fx = c.arrow(c.subset(0b01).unwrap(), top).unwrap();
        let fy = c.arrow(c.subset(0b10).unwrap(), top).unwrap();
        let s = Sieve::generated(&c, top, &[fx, fy]).unwrap();
        let fams = compatible_families(&p, &s).unwrap();
        assert_eq!(fams.len(), 3);
        let bad = two_point_family(&c, Element::Integer(0), Element::Integer(1));
        assert!(matches!(amalgamate(&p, &bad), Err(AmalgamationError::Incompatible(_))));
    }

    #[test]
    fn amalgamation_examples() {
        let (c, _) = setup(&["x", "y"]);
        let p = build_resource_sheaf(c.clone(), &ResourceKind::PartialMemory { values: vec![0, 1] }).unwrap();
        let fam = two_point_family(&c, heap(0b01, &[(0, 0)]), heap(0b10, &[(1, 1)]));
        assert_eq!(amalgamate(&p, &fam).unwrap(), heap(0b11, &[(0, 0), (1, 1)]));

        let top = c.subset(0b11).unwrap();
        let a = heap(0b11, &[(1, 0)]);
        let max = CompatibleFamily {
            sieve: Sieve::maximal(&c, top),
            assignment: [(c.id(top), a.clone())].into_iter().collect(),
        };
        assert_eq!(amalgamate(&p, &max).unwrap(), a);

        let x = c.subset(0b01).unwrap();
        let fx = c.arrow(x, top).unwrap();
        let clash = CompatibleFamily {
            sieve: Sieve::maximal(&c, top),
            assignment: [(fx, heap(0b01, &[(0, 0)])), (c.id(top), heap(0b11, &[(0, 1)]))].into_iter().collect(),
        };
        assert!(matches!(amalgamate(&p, &clash), Err(AmalgamationError::Incompatible(_))));
    }

    #[test]
    fn round_trip_over_all_families() {
        let (c, cov) = setup(&["x", "y"]);
        let p = build_resource_sheaf(c.clone(), &ResourceKind::PartialMemory { values: vec![0, 1] }).unwrap();
        for a in c.objects() {
            for s in cov.covers(a) {
                for fam in compatible_families(&p, s).unwrap() {
                    let e = amalgamate(&p, &fam).unwrap();
                    for (&f, x) in &fam.assignment {
                        assert_eq!(&p.restrict(f, &e).unwrap(), x);
                    }
                }
            }
        }
    }

    #[test]
    fn generator_values_determine_families() {
        // Families enumerated through generators coincide with brute force
        // over all assignments to all members.
        let (c, _) = setup(&["x", "y"]);
        let p = build_resource_sheaf(c.clone(), &ResourceKind::StrictMemory { values: vec![0, 1] }).unwrap();
        let top = c.subset(0b11).unwrap();
        let fx = c.arrow(c.subset(0b01).unwrap(), top).unwrap();
        let fy = c.arrow(c.subset(0b10).unwrap(), top).unwrap();
        let s = Sieve::generated(&c, top, &[fx, fy]).unwrap();
        let members: Vec<MorId> = s.members().iter().copied().collect();
        let mut brute = 0;
        let sizes: Vec<usize> = members.iter().map(|&m| p.len_at(c.src(m))).collect();
        let total: usize = sizes.iter().product();
        for mut code in 0..total {
            let mut vals = Vec::new();
            for &n in &sizes {
                vals.push(code % n);
                code /= n;
            }
            let ok = members.iter().enumerate().all(|(i, &f)| {
                c.arrows_into(c.src(f)).iter().all(|&k| {
                    let j = members.iter().position(|&g| g == c.comp(f, k)).unwrap();
                    vals[j] == p.restrict_idx(k, vals[i])
                })
            });
            brute += ok as usize;
        }
        assert_eq!(compatible_families(&p, &s).unwrap().len(), brute);
    }

    #[test]
    fn slice_restriction() {
        let (c, cov) = setup(&["x", "y"]);
        let mp = build_resource_sheaf(c.clone(), &ResourceKind::PartialMemory { values: vec![0, 1] }).unwrap();
        let top = c.subset(0b11).unwrap();
        let sl = slice_restrict(&mp, top).unwrap();
        assert!(validate_presheaf(&sl).is_empty());
        let site = slice_coverage(&cov, top).unwrap();
        assert!(check_sheaf(&sl, &site.coverage, &SheafMode::Exhaustive).unwrap().is_sheaf());

        let m = build_resource_sheaf(c.clone(), &ResourceKind::StrictMemory { values: vec![0, 1] }).unwrap();
        let x = c.subset(1).unwrap();
        let sx = slice_restrict(&m, x).unwrap();
        let id_slot = sx.base().objects().find(|&q| sx.base().obj_label(q) == c.mor_label(c.id(x))).unwrap();
        assert_eq!(sx.at(id_slot), m.at(x));
        let s0 = slice_restrict(&m, ObjId(0)).unwrap();
        assert_eq!(s0.base().n_objects(), 1);
        assert_eq!(s0.at(ObjId(0)), m.at(ObjId(0)));
    }
}
