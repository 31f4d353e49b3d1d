use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::Ratio;

use super::{Presheaf, PresheafError};
use crate::element::{Element, Heap};
use crate::fincat::{CatShape, FinCat, ObjId};
use crate::psl::{pullback_space, set_partitions, ProbSpace};

/// The built-in resource presheaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResourceKind {
    /// Total maps `U → Val`.
    StrictMemory { values: Vec<i64> },
    /// Maps `U → Val + {⊥}`.
    PartialMemory { values: Vec<i64> },
    /// Partial maps with at most `k` defined cells. Not a sheaf for `k` below
    /// the number of locations.
    SupportBounded { values: Vec<i64>, k: usize },
    Constant(Vec<Element>),
    /// Morphisms into the given object.
    Yoneda(ObjId),
    Terminal,
    /// Probability spaces on `{1..n}` whose block measures are multiples of
    /// `1/denominator`; restriction is pullback along surjections.
    ProbabilityGrid { denominator: i64 },
}

impl ResourceKind {
    pub fn label(&self) -> String {
        match self {
            ResourceKind::StrictMemory { .. } => "strict-memory".into(),
            ResourceKind::PartialMemory { .. } => "partial-memory".into(),
            ResourceKind::SupportBounded { k, .. } => format!("support-bounded({k})"),
            ResourceKind::Constant(xs) => format!("constant({})", xs.len()),
            ResourceKind::Yoneda(a) => format!("yoneda({a})"),
            ResourceKind::Terminal => "terminal".into(),
            ResourceKind::ProbabilityGrid { denominator } => format!("probability-grid(1/{denominator})"),
        }
    }
}

/// All heaps on `mask` with values drawn from `choices` (`None` is ⊥).
fn heaps_on(mask: u32, choices: &[Option<i64>]) -> Vec<Heap> {
    let locs: Vec<usize> = (0..32).filter(|l| mask & (1 << l) != 0).collect();
    let mut out = Vec::new();
    let mut digits = vec![0usize; locs.len()];
    loop {
        let cells: BTreeMap<usize, i64> =
            locs.iter().zip(&digits).filter_map(|(&l, &d)| choices[d].map(|v| (l, v))).collect();
        out.push(Heap::new(mask, cells).expect("cells lie in the stage"));
        let mut i = 0;
        loop {
            if i == locs.len() {
                return out;
            }
            digits[i] += 1;
            if digits[i] < choices.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

fn checked_values(values: &[i64]) -> Result<Vec<i64>, PresheafError> {
    if values.is_empty() {
        return Err(PresheafError::EmptyValues);
    }
    let mut v = values.to_vec();
    v.sort();
    v.dedup();
    Ok(v)
}

fn memory(c: Arc<FinCat>, kind: &ResourceKind) -> Result<Presheaf, PresheafError> {
    if !matches!(c.shape(), CatShape::Powerset { .. }) {
        return Err(PresheafError::KindMismatch { kind: kind.label(), requirement: "a powerset base" });
    }
    let (values, partial, bound) = match kind {
        ResourceKind::StrictMemory { values } => (checked_values(values)?, false, usize::MAX),
        ResourceKind::PartialMemory { values } => (checked_values(values)?, true, usize::MAX),
        ResourceKind::SupportBounded { values, k } => (checked_values(values)?, true, *k),
        _ => unreachable!(),
    };
    let mut choices: Vec<Option<i64>> = values.into_iter().map(Some).collect();
    if partial {
        choices.push(None);
    }
    let sections: Vec<Vec<Element>> = c
        .objects()
        .map(|a| {
            let mut hs: Vec<Element> = heaps_on(c.mask(a), &choices)
                .into_iter()
                .filter(|h| h.cells().len() <= bound)
                .map(Element::Heap)
                .collect();
            hs.sort();
            hs
        })
        .collect();
    let cat = c.clone();
    Presheaf::from_rule(kind.label(), c, sections, move |m, e| {
        let h = e.as_heap().expect("memory sections are heaps");
        Element::Heap(h.restrict(cat.mask(cat.src(m))))
    })
}

/// Spaces on `n` points with block measures in `(1/d)ℕ`.
pub(crate) fn grid_spaces(n: usize, d: i64) -> Vec<ProbSpace> {
    let mut out = Vec::new();
    for part in set_partitions(n) {
        let k = part.iter().max().map_or(0, |m| m + 1);
        for comp in weak_compositions(d, k) {
            let measure: Vec<Ratio<i64>> = comp.into_iter().map(|c| Ratio::new(c, d)).collect();
            out.push(ProbSpace::from_blocks(part.clone(), measure).expect("grid spaces are normalized"));
        }
    }
    out
}

/// Ordered `k`-tuples of naturals summing to `total`.
pub(crate) fn weak_compositions(total: i64, k: usize) -> Vec<Vec<i64>> {
    if k == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if k == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in weak_compositions(total - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn build_resource_sheaf(c: Arc<FinCat>, kind: &ResourceKind) -> Result<Presheaf, PresheafError> {
    match kind {
        ResourceKind::StrictMemory { .. } | ResourceKind::PartialMemory { .. } | ResourceKind::SupportBounded { .. } => {
            memory(c, kind)
        }
        ResourceKind::Constant(xs) => {
            if xs.is_empty() {
                return Err(PresheafError::EmptyValues);
            }
            let sections = vec![xs.clone(); c.n_objects()];
            Presheaf::from_rule(kind.label(), c, sections, |_, e| e.clone())
        }
        ResourceKind::Terminal => {
            let sections = vec![vec![Element::Star]; c.n_objects()];
            Presheaf::from_rule(kind.label(), c, sections, |_, e| e.clone())
        }
        ResourceKind::Yoneda(a) => {
            c.check_object(*a).map_err(|_| PresheafError::UnknownObject(*a))?;
            let sections = c.objects().map(|b| c.hom(b, *a).iter().map(|&f| Element::MorWitness(f)).collect()).collect();
            let cat = c.clone();
            let label = format!("yoneda({})", c.obj_label(*a));
            Presheaf::from_rule(label, c, sections, move |h, e| match e {
                Element::MorWitness(f) => Element::MorWitness(cat.comp(*f, h)),
                _ => unreachable!("representable sections are morphisms"),
            })
        }
        ResourceKind::ProbabilityGrid { denominator } => {
            if !matches!(c.shape(), CatShape::FinSurj { .. }) {
                return Err(PresheafError::KindMismatch { kind: kind.label(), requirement: "a surjection base" });
            }
            if *denominator < 1 {
                return Err(PresheafError::Malformed("denominator must be positive".into()));
            }
            let sections: Vec<Vec<Element>> = c
                .objects()
                .map(|a| {
                    let mut v: Vec<Element> =
                        grid_spaces(a.0 + 1, *denominator).into_iter().map(Element::Prob).collect();
                    v.sort();
                    v
                })
                .collect();
            let cat = c.clone();
            Presheaf::from_rule(kind.label(), c, sections, move |m, e| {
                let sp = e.as_prob().expect("probability sections");
                let table = cat.surjection_table(m).expect("surjection base");
                Element::Prob(pullback_space(table, sp).expect("surjections pull back"))
            })
        }
    }
}
