//! Sieves, coverages and their saturation.
//!
//! Covering sieves are always nonempty: the empty sieve never covers, not even
//! on the empty stage. This keeps constant presheaves sheaves and makes the
//! empty family the bottom predicate.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::fincat::{slice_category, CatShape, FinCat, FunctorData, MorId, ObjId};

/// Upper bound on the number of sieves enumerated on one object.
pub const SIEVE_BUDGET: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SiteError {
    #[error("coverage kind {kind} requires {requirement}")]
    KindMismatch { kind: CoverageKind, requirement: &'static str },
    #[error("atomic coverage needs a common refinement of {f} and {g}, none exists")]
    NoCommonRefinement { f: String, g: String },
    #[error("pre-coverage condition fails: pre-cover {cover} of {target} has no refinement along {h}")]
    PreCoverageViolated { target: String, cover: String, h: String },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("unknown object {0}")]
    UnknownObject(ObjId),
    #[error("sieve enumeration on {object} exceeds the budget of {budget}")]
    BudgetExceeded { object: String, budget: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sieve {
    target: ObjId,
    members: BTreeSet<MorId>,
}

impl Sieve {
    pub fn target(&self) -> ObjId {
        self.target
    }

    pub fn members(&self) -> &BTreeSet<MorId> {
        &self.members
    }

    pub fn contains(&self, m: MorId) -> bool {
        self.members.contains(&m)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn empty(target: ObjId) -> Sieve {
        Sieve { target, members: BTreeSet::new() }
    }

    pub fn maximal(c: &FinCat, a: ObjId) -> Sieve {
        Sieve { target: a, members: c.arrows_into(a).iter().copied().collect() }
    }

    /// The sieve generated by `gens`, all of which must have codomain `a`.
    pub fn generated(c: &FinCat, a: ObjId, gens: &[MorId]) -> Result<Sieve, SiteError> {
        let mut members = BTreeSet::new();
        for &g in gens {
            if c.dst(g) != a {
                return Err(SiteError::TypeMismatch(format!(
                    "generator {} does not target {}",
                    c.mor_label(g),
                    c.obj_label(a)
                )));
            }
            for &k in c.arrows_into(c.src(g)) {
                members.insert(c.comp(g, k));
            }
        }
        Ok(Sieve { target: a, members })
    }

    /// Accepts an explicit member set without checking closure.
    pub fn from_members(target: ObjId, members: BTreeSet<MorId>) -> Sieve {
        Sieve { target, members }
    }

    /// Members are typed correctly and closed under precomposition.
    pub fn is_sieve(&self, c: &FinCat) -> bool {
        self.members.iter().all(|&f| {
            c.dst(f) == self.target && c.arrows_into(c.src(f)).iter().all(|&k| self.members.contains(&c.comp(f, k)))
        })
    }

    /// Members not of the form `f ∘ k` for another member `f` and a
    /// non-invertible `k`; in a preorder these are the maximal elements.
    pub fn generators(&self, c: &FinCat) -> Vec<MorId> {
        let mut out: Vec<MorId> = Vec::new();
        let mut covered: BTreeSet<MorId> = BTreeSet::new();
        // Largest domains first so that generators absorb their composites.
        let mut order: Vec<MorId> = self.members.iter().copied().collect();
        order.sort_by_key(|&m| std::cmp::Reverse(c.arrows_into(c.src(m)).len()));
        for m in order {
            if covered.contains(&m) {
                continue;
            }
            out.push(m);
            for &k in c.arrows_into(c.src(m)) {
                covered.insert(c.comp(m, k));
            }
        }
        out.sort();
        out
    }

    pub fn render(&self, c: &FinCat) -> String {
        let gens: Vec<&str> = self.generators(c).into_iter().map(|m| c.mor_label(m)).collect();
        format!("⟨{}⟩", gens.join(", "))
    }
}

/// `h*(S) = {g | h ∘ g ∈ S}`.
pub fn pullback_sieve(c: &FinCat, s: &Sieve, h: MorId) -> Result<Sieve, SiteError> {
    if c.dst(h) != s.target {
        return Err(SiteError::TypeMismatch(format!(
            "{} does not target {}",
            c.mor_label(h),
            c.obj_label(s.target)
        )));
    }
    let b = c.src(h);
    let members = c.arrows_into(b).iter().copied().filter(|&g| s.contains(c.comp(h, g))).collect();
    Ok(Sieve { target: b, members })
}

/// Every sieve on `a`, in a deterministic order.
pub fn all_sieves(c: &FinCat, a: ObjId) -> Result<Vec<Sieve>, SiteError> {
    let into = c.arrows_into(a);
    let principal: Vec<BTreeSet<MorId>> = into
        .iter()
        .map(|&m| c.arrows_into(c.src(m)).iter().map(|&k| c.comp(m, k)).collect())
        .collect();
    let mut seen: HashSet<BTreeSet<MorId>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(BTreeSet::new());
    queue.push_back(BTreeSet::new());
    while let Some(s) = queue.pop_front() {
        for (i, &m) in into.iter().enumerate() {
            if s.contains(&m) {
                continue;
            }
            let mut t = s.clone();
            t.extend(principal[i].iter().copied());
            if seen.insert(t.clone()) {
                if seen.len() > SIEVE_BUDGET {
                    return Err(SiteError::BudgetExceeded { object: c.obj_label(a).into(), budget: SIEVE_BUDGET });
                }
                queue.push_back(t);
            }
        }
    }
    let mut out: Vec<Sieve> = seen.into_iter().map(|members| Sieve { target: a, members }).collect();
    out.sort_by(|x, y| x.members.len().cmp(&y.members.len()).then_with(|| x.members.cmp(&y.members)));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoverageKind {
    DownwardClosed,
    FiniteCovers,
    Atomic,
    /// Produced by saturating a pre-coverage.
    Saturated,
    /// Assembled by hand.
    Custom,
}

impl fmt::Display for CoverageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CoverageKind::DownwardClosed => "downward-closed",
            CoverageKind::FiniteCovers => "finite-covers",
            CoverageKind::Atomic => "atomic",
            CoverageKind::Saturated => "saturated",
            CoverageKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for CoverageKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "downward-closed" => Ok(CoverageKind::DownwardClosed),
            "finite-covers" => Ok(CoverageKind::FiniteCovers),
            "atomic" => Ok(CoverageKind::Atomic),
            "trivial" => Ok(CoverageKind::Saturated),
            other => Err(format!("unknown coverage kind {other:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Coverage {
    base: Arc<FinCat>,
    covers: Vec<BTreeSet<Sieve>>,
    kind: CoverageKind,
    notes: Vec<String>,
}

impl Coverage {
    /// Wraps per-object sieve sets without checking the axioms.
    pub fn from_parts(base: Arc<FinCat>, covers: Vec<BTreeSet<Sieve>>) -> Coverage {
        Coverage { base, covers, kind: CoverageKind::Custom, notes: Vec::new() }
    }

    pub fn base(&self) -> &Arc<FinCat> {
        &self.base
    }

    pub fn kind(&self) -> CoverageKind {
        self.kind
    }

    /// Remarks recorded while building, e.g. coinciding kinds.
    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn covers(&self, a: ObjId) -> &BTreeSet<Sieve> {
        &self.covers[a.0]
    }

    pub fn covers_mut(&mut self, a: ObjId) -> &mut BTreeSet<Sieve> {
        &mut self.covers[a.0]
    }

    pub fn is_covering(&self, s: &Sieve) -> bool {
        self.covers[s.target.0].contains(s)
    }

    /// Total number of covering sieves.
    pub fn size(&self) -> usize {
        self.covers.iter().map(|c| c.len()).sum()
    }

    /// Two coverages on the same base with identical sieve sets.
    pub fn same_sieves(&self, other: &Coverage) -> bool {
        self.covers == other.covers
    }
}

/// Builds one of the built-in coverages.
pub fn build_coverage(c: Arc<FinCat>, kind: CoverageKind) -> Result<Coverage, SiteError> {
    match kind {
        CoverageKind::DownwardClosed => {
            let covers = union_covers(&c, kind)?;
            let mut cov = Coverage { base: c.clone(), covers, kind, notes: Vec::new() };
            let finite = finite_pre_covers(&c)?;
            if finite == cov.covers {
                cov.notes.push("coincides with the finite-covers coverage on this base".into());
            }
            Ok(cov)
        }
        CoverageKind::FiniteCovers => {
            let covers = finite_pre_covers(&c)?;
            let mut cov = Coverage { base: c.clone(), covers, kind, notes: Vec::new() };
            if union_covers(&c, kind)? == cov.covers {
                cov.notes.push("coincides with the downward-closed coverage on this base".into());
            }
            Ok(cov)
        }
        CoverageKind::Atomic => {
            check_common_refinements(&c)?;
            let mut covers = Vec::with_capacity(c.n_objects());
            for a in c.objects() {
                covers.push(all_sieves(&c, a)?.into_iter().filter(|s| !s.is_empty()).collect());
            }
            Ok(Coverage { base: c, covers, kind, notes: Vec::new() })
        }
        CoverageKind::Saturated => Ok(saturate_precoverage(c, &[])?),
        CoverageKind::Custom => Err(SiteError::KindMismatch { kind, requirement: "explicit sieve sets" }),
    }
}

fn require_powerset(c: &FinCat, kind: CoverageKind) -> Result<(), SiteError> {
    match c.shape() {
        CatShape::Powerset { .. } => Ok(()),
        _ => Err(SiteError::KindMismatch { kind, requirement: "a powerset base" }),
    }
}

/// Nonempty sieves whose member domains union to the target.
fn union_covers(c: &FinCat, kind: CoverageKind) -> Result<Vec<BTreeSet<Sieve>>, SiteError> {
    require_powerset(c, kind)?;
    let mut out = Vec::new();
    for a in c.objects() {
        let set = all_sieves(c, a)?
            .into_iter()
            .filter(|s| !s.is_empty() && s.members.iter().fold(0u32, |acc, &m| acc | c.mask(c.src(m))) == c.mask(a))
            .collect();
        out.push(set);
    }
    Ok(out)
}

/// Downward closures of finite nonempty pre-covers `{U_i ⊆ U}` with `⋃ U_i = U`.
/// Every sieve on a finite powerset is the closure of its maximal elements, so
/// it suffices to test those as the pre-cover.
fn finite_pre_covers(c: &FinCat) -> Result<Vec<BTreeSet<Sieve>>, SiteError> {
    require_powerset(c, CoverageKind::FiniteCovers)?;
    let mut out = Vec::new();
    for a in c.objects() {
        let mut set = BTreeSet::new();
        for s in all_sieves(c, a)? {
            let gens = s.generators(c);
            if gens.is_empty() {
                continue;
            }
            let union = gens.iter().fold(0u32, |acc, &m| acc | c.mask(c.src(m)));
            if union == c.mask(a) {
                set.insert(Sieve::generated(c, a, &gens)?);
            }
        }
        out.push(set);
    }
    Ok(out)
}

/// Every cospan `B → A ← C` completes to a commuting square.
fn check_common_refinements(c: &FinCat) -> Result<(), SiteError> {
    for a in c.objects() {
        for &f in c.arrows_into(a) {
            for &g in c.arrows_into(a) {
                let found = c.objects().any(|d| {
                    c.hom(d, c.src(f)).iter().any(|&h| {
                        let fh = c.comp(f, h);
                        c.hom(d, c.src(g)).iter().any(|&k| c.comp(g, k) == fh)
                    })
                });
                if !found {
                    return Err(SiteError::NoCommonRefinement {
                        f: c.mor_label(f).into(),
                        g: c.mor_label(g).into(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// A family of morphisms into `target`, generating a sieve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreCover {
    pub target: ObjId,
    pub family: Vec<MorId>,
}

fn render_family(c: &FinCat, fam: &[MorId]) -> String {
    let names: Vec<&str> = fam.iter().map(|&m| c.mor_label(m)).collect();
    format!("{{{}}}", names.join(", "))
}

/// Least Grothendieck coverage containing the sieves generated by the given
/// pre-covers. Each object also carries the implicit pre-cover `{id}`.
pub fn saturate_precoverage(c: Arc<FinCat>, assignment: &[PreCover]) -> Result<Coverage, SiteError> {
    let n = c.n_objects();
    let mut pre: Vec<Vec<Vec<MorId>>> = (0..n).map(|a| vec![vec![c.id(ObjId(a))]]).collect();
    for p in assignment {
        c.check_object(p.target).map_err(|_| SiteError::UnknownObject(p.target))?;
        if p.family.iter().any(|&m| c.dst(m) != p.target) {
            return Err(SiteError::TypeMismatch(format!(
                "pre-cover {} has a leg not targeting {}",
                render_family(&c, &p.family),
                c.obj_label(p.target)
            )));
        }
        pre[p.target.0].push(p.family.clone());
    }
    // Pre-coverage condition: along every h: B → A, some pre-cover of B
    // factors through the given one.
    for a in c.objects() {
        for fam in &pre[a.0] {
            let s = Sieve::generated(&c, a, fam)?;
            for &h in c.arrows_into(a) {
                let b = c.src(h);
                let ok = pre[b.0].iter().any(|t| t.iter().all(|&g| s.contains(c.comp(h, g))));
                if !ok {
                    return Err(SiteError::PreCoverageViolated {
                        target: c.obj_label(a).into(),
                        cover: render_family(&c, fam),
                        h: c.mor_label(h).into(),
                    });
                }
            }
        }
    }
    let sieves: Vec<Vec<Sieve>> = c.objects().map(|a| all_sieves(&c, a)).collect::<Result<_, _>>()?;
    let mut covers: Vec<BTreeSet<Sieve>> = vec![BTreeSet::new(); n];
    for a in c.objects() {
        covers[a.0].insert(Sieve::maximal(&c, a));
        for fam in &pre[a.0] {
            covers[a.0].insert(Sieve::generated(&c, a, fam)?);
        }
    }
    loop {
        let mut changed = false;
        for a in c.objects() {
            let current: Vec<Sieve> = covers[a.0].iter().cloned().collect();
            for s in &current {
                for &h in c.arrows_into(a) {
                    let p = pullback_sieve(&c, s, h)?;
                    changed |= covers[p.target.0].insert(p);
                }
            }
            for r in &sieves[a.0] {
                if covers[a.0].contains(r) {
                    continue;
                }
                let transitive = covers[a.0].iter().any(|s| {
                    s.members.iter().all(|&f| {
                        let p = pullback_sieve(&c, r, f).expect("typed");
                        covers[p.target.0].contains(&p)
                    })
                });
                if transitive {
                    covers[a.0].insert(r.clone());
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(Coverage { base: c, covers, kind: CoverageKind::Saturated, notes: Vec::new() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverageViolation {
    NotASieve { object: String, sieve: String },
    Maximality { object: String },
    Stability { sieve: String, along: String, pullback: String },
    Transitivity { object: String, cover: String, sieve: String },
}

impl fmt::Display for CoverageViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverageViolation::NotASieve { object, sieve } => {
                write!(f, "{sieve} listed at {object} is not a sieve on it")
            }
            CoverageViolation::Maximality { object } => write!(f, "maximal sieve on {object} is not covering"),
            CoverageViolation::Stability { sieve, along, pullback } => {
                write!(f, "pullback of cover {sieve} along {along} is {pullback}, not covering")
            }
            CoverageViolation::Transitivity { object, cover, sieve } => write!(
                f,
                "{sieve} on {object} is locally covering over {cover} but is not covering"
            ),
        }
    }
}

/// Exhaustively checks maximality, stability and transitivity.
pub fn validate_coverage(c: &FinCat, cov: &Coverage) -> Result<Vec<CoverageViolation>, SiteError> {
    let mut out = Vec::new();
    if cov.covers.len() != c.n_objects() {
        return Err(SiteError::TypeMismatch("coverage does not match the category".into()));
    }
    for a in c.objects() {
        for s in cov.covers(a) {
            if s.target != a || !s.is_sieve(c) {
                out.push(CoverageViolation::NotASieve { object: c.obj_label(a).into(), sieve: s.render(c) });
            }
        }
        if !cov.covers(a).contains(&Sieve::maximal(c, a)) {
            out.push(CoverageViolation::Maximality { object: c.obj_label(a).into() });
        }
    }
    for a in c.objects() {
        for s in cov.covers(a) {
            for &h in c.arrows_into(a) {
                let p = pullback_sieve(c, s, h)?;
                if !cov.is_covering(&p) {
                    out.push(CoverageViolation::Stability {
                        sieve: s.render(c),
                        along: c.mor_label(h).into(),
                        pullback: p.render(c),
                    });
                }
            }
        }
    }
    for a in c.objects() {
        for r in all_sieves(c, a)? {
            if cov.is_covering(&r) {
                continue;
            }
            let witness = cov.covers(a).iter().find(|s| {
                s.members.iter().all(|&f| pullback_sieve(c, &r, f).map(|p| cov.is_covering(&p)).unwrap_or(false))
            });
            if let Some(s) = witness {
                out.push(CoverageViolation::Transitivity {
                    object: c.obj_label(a).into(),
                    cover: s.render(c),
                    sieve: r.render(c),
                });
            }
        }
    }
    Ok(out)
}

/// A slice of a site: the slice category, its domain functor and the
/// induced coverage.
#[derive(Clone, Debug)]
pub struct SliceSite {
    pub category: Arc<FinCat>,
    pub dom: FunctorData,
    pub coverage: Coverage,
}

/// A sieve on slice object `p` covers iff its image under the domain functor
/// covers `dom p` in the base.
pub fn slice_coverage(cov: &Coverage, a: ObjId) -> Result<SliceSite, SiteError> {
    let c = cov.base();
    c.check_object(a).map_err(|_| SiteError::UnknownObject(a))?;
    let (s, dom) = slice_category(c, a).map_err(|_| SiteError::UnknownObject(a))?;
    let s = Arc::new(s);
    let mut covers = Vec::with_capacity(s.n_objects());
    for p in s.objects() {
        let mut set = BTreeSet::new();
        for sieve in all_sieves(&s, p)? {
            let image = Sieve::from_members(dom.on_obj(p), sieve.members.iter().map(|&f| dom.on_mor(f)).collect());
            if cov.is_covering(&image) {
                set.insert(sieve);
            }
        }
        covers.push(set);
    }
    let coverage = Coverage { base: s.clone(), covers, kind: cov.kind(), notes: Vec::new() };
    Ok(SliceSite { category: s, dom, coverage })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{build_finsurj_category, build_powerset_category};

    fn powerset(names: &[&str]) -> Arc<FinCat> {
        let locs: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        Arc::new(build_powerset_category(&locs).unwrap())
    }

    #[test]
    fn sieve_counts_on_powerset() {
        let c = powerset(&["x", "y"]);
        let top = c.subset(0b11).unwrap();
        // downsets of a 4-element square, including the empty one
        assert_eq!(all_sieves(&c, top).unwrap().len(), 6);
        let c3 = powerset(&["x", "y", "z"]);
        assert_eq!(all_sieves(&c3, c3.subset(0b111).unwrap()).unwrap().len(), 20);
    }

    #[test]
    fn downward_closed_contains_two_point_cover() {
        let c = powerset(&["x", "y"]);
        let cov = build_coverage(c.clone(), CoverageKind::DownwardClosed).unwrap();
        let top = c.subset(0b11).unwrap();
        let x = c.arrow(c.subset(0b01).unwrap(), top).unwrap();
        let y = c.arrow(c.subset(0b10).unwrap(), top).unwrap();
        let s = Sieve::generated(&c, top, &[x, y]).unwrap();
        assert!(cov.is_covering(&s));
        assert!(cov.notes().iter().any(|n| n.contains("finite-covers")));
        assert!(validate_coverage(&c, &cov).unwrap().is_empty());
        let fin = build_coverage(c.clone(), CoverageKind::FiniteCovers).unwrap();
        assert!(fin.same_sieves(&cov));
    }

    #[test]
    fn empty_sieve_never_covers() {
        let c = powerset(&["x"]);
        let cov = build_coverage(c.clone(), CoverageKind::DownwardClosed).unwrap();
        assert!(!cov.is_covering(&Sieve::empty(ObjId(0))));
        assert!(cov.is_covering(&Sieve::maximal(&c, ObjId(1))));
    }

    #[test]
    fn atomic_on_two_point_surjections() {
        let c = Arc::new(build_finsurj_category(2).unwrap());
        let cov = build_coverage(c.clone(), CoverageKind::Atomic).unwrap();
        for a in c.objects() {
            for s in all_sieves(&c, a).unwrap() {
                assert_eq!(cov.is_covering(&s), !s.is_empty());
            }
        }
        assert!(validate_coverage(&c, &cov).unwrap().is_empty());
    }

    #[test]
    fn atomic_rejected_without_common_refinements() {
        let c = Arc::new(build_finsurj_category(3).unwrap());
        assert!(matches!(
            build_coverage(c, CoverageKind::Atomic),
            Err(SiteError::NoCommonRefinement { .. })
        ));
        let fs = Arc::new(build_finsurj_category(2).unwrap());
        assert!(build_coverage(fs, CoverageKind::DownwardClosed).is_err());
    }

    #[test]
    fn pullback_examples() {
        let c = powerset(&["x", "y"]);
        let top = c.subset(0b11).unwrap();
        let xs = c.subset(0b01).unwrap();
        let x = c.arrow(xs, top).unwrap();
        let y = c.arrow(c.subset(0b10).unwrap(), top).unwrap();
        let s = Sieve::generated(&c, top, &[x, y]).unwrap();
        assert_eq!(pullback_sieve(&c, &s, x).unwrap(), Sieve::maximal(&c, xs));
        assert_eq!(pullback_sieve(&c, &s, c.id(top)).unwrap(), s);
        let m = Sieve::maximal(&c, top);
        assert_eq!(pullback_sieve(&c, &m, y).unwrap(), Sieve::maximal(&c, c.src(y)));
        assert!(pullback_sieve(&c, &s, c.id(xs)).is_err());
    }

    #[test]
    fn saturation_examples() {
        let c = powerset(&["x", "y"]);
        let top = c.subset(0b11).unwrap();
        let x = c.arrow(c.subset(0b01).unwrap(), top).unwrap();
        let y = c.arrow(c.subset(0b10).unwrap(), top).unwrap();
        let cov = saturate_precoverage(c.clone(), &[PreCover { target: top, family: vec![x, y] }]).unwrap();
        assert!(cov.is_covering(&Sieve::generated(&c, top, &[x, y]).unwrap()));
        assert!(validate_coverage(&c, &cov).unwrap().is_empty());

        let trivial = saturate_precoverage(c.clone(), &[]).unwrap();
        for a in c.objects() {
            assert_eq!(trivial.covers(a).len(), 1);
        }

        let err = saturate_precoverage(c.clone(), &[PreCover { target: top, family: vec![x] }]).unwrap_err();
        match err {
            SiteError::PreCoverageViolated { h, .. } => assert_eq!(h, c.mor_label(y)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn injected_faults_reported_once() {
        let c = powerset(&["x"]);
        let mut cov = build_coverage(c.clone(), CoverageKind::DownwardClosed).unwrap();
        let xs = c.subset(1).unwrap();
        cov.covers_mut(xs).remove(&Sieve::maximal(&c, xs));
        let report = validate_coverage(&c, &cov).unwrap();
        assert_eq!(report, vec![CoverageViolation::Maximality { object: "{x}".into() }]);

        let c = powerset(&["x", "y"]);
        let mut cov = build_coverage(c.clone(), CoverageKind::DownwardClosed).unwrap();
        let top = c.subset(0b11).unwrap();
        let x = c.arrow(c.subset(0b01).unwrap(), top).unwrap();
        let y = c.arrow(c.subset(0b10).unwrap(), top).unwrap();
        cov.covers_mut(top).insert(Sieve::generated(&c, top, &[x]).unwrap());
        let report = validate_coverage(&c, &cov).unwrap();
        assert_eq!(report.len(), 1, "{report:?}");
        match &report[0] {
            CoverageViolation::Stability { along, .. } => assert_eq!(along, c.mor_label(y)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn slice_coverages_validate() {
        let c = powerset(&["x", "y"]);
        let cov = build_coverage(c.clone(), CoverageKind::DownwardClosed).unwrap();
        for a in c.objects() {
            let sl = slice_coverage(&cov, a).unwrap();
            assert!(validate_coverage(&sl.category, &sl.coverage).unwrap().is_empty());
        }
        let top = c.subset(0b11).unwrap();
        let sl = slice_coverage(&cov, top).unwrap();
        assert_eq!(sl.coverage.size(), cov.size());
        let empty = slice_coverage(&cov, ObjId(0)).unwrap();
        assert_eq!(empty.coverage.size(), 1);

        let fs = Arc::new(build_finsurj_category(2).unwrap());
        let atomic = build_coverage(fs.clone(), CoverageKind::Atomic).unwrap();
        let sl = slice_coverage(&atomic, ObjId(1)).unwrap();
        for p in sl.category.objects() {
            for s in all_sieves(&sl.category, p).unwrap() {
                assert_eq!(sl.coverage.is_covering(&s), !s.is_empty());
            }
        }
    }
}
