use std::fmt;

use crate::psl::Distribution;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    Bottom,
    /// Every cell of the stage holds ⊥.
    Emp,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Star(Box<Formula>, Box<Formula>),
    /// `x |-> v`: if `x` is in view it holds `v`.
    PointsToStrict { loc: String, val: i64 },
    /// `x ~> v`: if `x` is in view it is allocated and holds `v`.
    PointsToNonStrict { loc: String, val: i64 },
    /// `x |->! v`: `x` is in view and holds `v`.
    PointsToAlloc { loc: String, val: i64 },
    /// `X ~ {v: p/q, ...}`: the law of `X` is the given distribution.
    DistAtom { var: String, dist: Distribution },
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn star(a: Formula, b: Formula) -> Formula {
        Formula::Star(Box::new(a), Box::new(b))
    }

    /// Locations named by points-to atoms.
    pub fn locations(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |f| match f {
            Formula::PointsToStrict { loc, .. } | Formula::PointsToNonStrict { loc, .. } | Formula::PointsToAlloc { loc, .. } => {
                out.push(loc.as_str())
            }
            _ => {}
        });
        out
    }

    fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Formula)) {
        visit(self);
        match self {
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::Star(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            _ => {}
        }
    }

    pub fn has_star(&self) -> bool {
        let mut found = false;
        self.walk(&mut |f| found |= matches!(f, Formula::Star(..)));
        found
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => write!(f, "T"),
            Formula::Bottom => write!(f, "F"),
            Formula::Emp => write!(f, "emp"),
            Formula::And(a, b) => write!(f, "({a} /\\ {b})"),
            Formula::Or(a, b) => write!(f, "({a} \\/ {b})"),
            Formula::Imp(a, b) => write!(f, "({a} -> {b})"),
            Formula::Star(a, b) => write!(f, "({a} * {b})"),
            Formula::PointsToStrict { loc, val } => write!(f, "{loc} |-> {val}"),
            Formula::PointsToNonStrict { loc, val } => write!(f, "{loc} ~> {val}"),
            Formula::PointsToAlloc { loc, val } => write!(f, "{loc} |->! {val}"),
            Formula::DistAtom { var, dist } => {
                let parts: Vec<String> = dist.iter().map(|(v, p)| format!("{v}: {p}")).collect();
                write!(f, "{var} ~ {{{}}}", parts.join(", "))
            }
        }
    }
}
