//! Points of the example presheaves.

use std::collections::BTreeMap;
use std::fmt;

use crate::day::DecompElement;
use crate::fincat::MorId;
use crate::psl::ProbSpace;

/// A partial heap over a stage. Locations are indices into the location list
/// of the powerset base; a location of the stage missing from `cells` holds ⊥.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Heap {
    stage: u32,
    cells: BTreeMap<usize, i64>,
}

impl Heap {
    /// Builds a heap, rejecting cells outside the stage.
    pub fn new(stage: u32, cells: BTreeMap<usize, i64>) -> Option<Heap> {
        if cells.keys().all(|&l| l < 32 && stage & (1 << l) != 0) {
            Some(Heap { stage, cells })
        } else {
            None
        }
    }

    pub fn empty(stage: u32) -> Heap {
        Heap { stage, cells: BTreeMap::new() }
    }

    pub fn from_pairs(stage: u32, pairs: &[(usize, i64)]) -> Option<Heap> {
        Heap::new(stage, pairs.iter().copied().collect())
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    pub fn cells(&self) -> &BTreeMap<usize, i64> {
        &self.cells
    }

    /// Value at `loc`; `None` is ⊥ (or out of stage).
    pub fn get(&self, loc: usize) -> Option<i64> {
        self.cells.get(&loc).copied()
    }

    pub fn in_stage(&self, loc: usize) -> bool {
        loc < 32 && self.stage & (1 << loc) != 0
    }

    /// Every location of the stage holds a value.
    pub fn is_total(&self) -> bool {
        self.cells.len() == self.stage.count_ones() as usize
    }

    /// Restriction to a sub-stage.
    pub fn restrict(&self, sub: u32) -> Heap {
        debug_assert_eq!(sub & !self.stage, 0);
        Heap {
            stage: sub,
            cells: self.cells.iter().filter(|(&l, _)| sub & (1 << l) != 0).map(|(&l, &v)| (l, v)).collect(),
        }
    }

    /// Renders the heap as `{x:0, y:⊥}` using location names.
    pub fn render(&self, locations: &[String]) -> String {
        let parts: Vec<String> = (0..locations.len())
            .filter(|&l| self.in_stage(l))
            .map(|l| match self.get(l) {
                Some(v) => format!("{}:{}", locations[l], v),
                None => format!("{}:⊥", locations[l]),
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Integer(i64),
    Symbol(String),
    Heap(Heap),
    Prob(ProbSpace),
    Pair(Box<Element>, Box<Element>),
    Decomp(Box<DecompElement>),
    /// The point of a terminal presheaf.
    Star,
    /// A base morphism, as a point of a representable presheaf.
    MorWitness(MorId),
    /// An equivalence class id (coends, matching classes).
    Class(usize),
}

impl Element {
    pub fn as_heap(&self) -> Option<&Heap> {
        match self {
            Element::Heap(h) => Some(h),
            _ => None,
        }
    }

    pub fn as_decomp(&self) -> Option<&DecompElement> {
        match self {
            Element::Decomp(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_prob(&self) -> Option<&ProbSpace> {
        match self {
            Element::Prob(p) => Some(p),
            _ => None,
        }
    }

    pub fn pair(a: Element, b: Element) -> Element {
        Element::Pair(Box::new(a), Box::new(b))
    }

    /// Display form; heaps use location names when they are known.
    pub fn render(&self, locations: Option<&[String]>) -> String {
        match (self, locations) {
            (Element::Heap(h), Some(locs)) => h.render(locs),
            (Element::Pair(a, b), _) => format!("({}, {})", a.render(locations), b.render(locations)),
            (Element::Decomp(d), _) => d.render(locations),
            _ => self.to_string(),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Integer(i) => write!(f, "{i}"),
            Element::Symbol(s) => write!(f, "{s}"),
            Element::Heap(h) => {
                let parts: Vec<String> = (0..32)
                    .filter(|&l| h.in_stage(l))
                    .map(|l| match h.get(l) {
                        Some(v) => format!("l{l}:{v}"),
                        None => format!("l{l}:⊥"),
                    })
                    .collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
            Element::Prob(p) => write!(f, "{p}"),
            Element::Pair(a, b) => write!(f, "({a}, {b})"),
            Element::Decomp(d) => write!(f, "{d}"),
            Element::Star => write!(f, "*"),
            Element::MorWitness(m) => write!(f, "{m}"),
            Element::Class(c) => write!(f, "[{c}]"),
        }
    }
}
