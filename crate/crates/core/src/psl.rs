//! Finite probability spaces, laws of random variables and the
//! independence-based separating conjunction.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fincat::build_finsurj_category;
use crate::pred::{Fibre, KripkePredicate};
use crate::presheaf::{build_resource_sheaf, ResourceKind};
use crate::seplogic::Formula;
use crate::site::{build_coverage, saturate_precoverage, CoverageKind};

pub type Rational = Ratio<i64>;
pub type Distribution = BTreeMap<i64, Rational>;

/// Largest sample space accepted by [`psl_sat`].
pub const PSL_BOUND: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PslError {
    #[error("blocks do not partition the sample set: {0}")]
    NotAPartition(String),
    #[error("measures sum to {0}, not 1")]
    NotNormalized(Rational),
    #[error("negative measure {0}")]
    NegativeMeasure(Rational),
    #[error("map is not surjective onto {target} points")]
    NonSurjective { target: usize },
    #[error("random variable is not measurable: block {block} carries values {first} and {second}")]
    NotMeasurable { block: String, first: i64, second: i64 },
    #[error("sample space of {size} points exceeds the bound {bound}")]
    BoundExceeded { size: usize, bound: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unknown random variable {0}")]
    UnknownVariable(String),
    #[error("atom {0} cannot be interpreted over probability spaces")]
    AtomIncompatible(String),
    #[error("non-rational input {0}")]
    NonRational(String),
    #[error("{0}")]
    Unsupported(String),
}

/// A probability space on `{1..n}` whose σ-algebra is generated by a
/// partition. Block ids are canonical (numbered by first occurrence).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProbSpace {
    block_of: Vec<usize>,
    measure: Vec<Rational>,
}

/// Renumbers labels by first occurrence; returns the new labels and the old
/// label of each new block.
fn canonical_labels(labels: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    let mut order = Vec::new();
    let out = labels
        .iter()
        .map(|&l| {
            *map.entry(l).or_insert_with(|| {
                order.push(l);
                order.len() - 1
            })
        })
        .collect();
    (out, order)
}

impl ProbSpace {
    /// `block_of[i]` labels the block of point `i`; `measure[l]` is the mass
    /// of label `l`. Labels are renumbered canonically.
    pub fn from_blocks(block_of: Vec<usize>, measure: Vec<Rational>) -> Result<ProbSpace, PslError> {
        let (labels, order) = canonical_labels(&block_of);
        if order.len() != measure.len() || order.iter().any(|&l| l >= measure.len()) {
            return Err(PslError::NotAPartition(format!(
                "{} labels used, {} measures given",
                order.len(),
                measure.len()
            )));
        }
        let measure: Vec<Rational> = order.iter().map(|&l| measure[l]).collect();
        if let Some(m) = measure.iter().find(|m| **m < Rational::zero()) {
            return Err(PslError::NegativeMeasure(*m));
        }
        let total: Rational = measure.iter().sum();
        if !total.is_one() {
            return Err(PslError::NotNormalized(total));
        }
        Ok(ProbSpace { block_of: labels, measure })
    }

    /// Blocks given as lists of 0-based points.
    pub fn from_partition(n: usize, blocks: &[Vec<usize>], measure: Vec<Rational>) -> Result<ProbSpace, PslError> {
        let mut block_of = vec![usize::MAX; n];
        for (b, pts) in blocks.iter().enumerate() {
            for &p in pts {
                if p >= n || block_of[p] != usize::MAX {
                    return Err(PslError::NotAPartition(format!("point {} is out of range or repeated", p + 1)));
                }
                block_of[p] = b;
            }
        }
        if let Some(p) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(PslError::NotAPartition(format!("point {} is in no block", p + 1)));
        }
        if blocks.iter().any(|b| b.is_empty()) {
            return Err(PslError::NotAPartition("empty block".into()));
        }
        ProbSpace::from_blocks(block_of, measure)
    }

    /// Every point its own block.
    pub fn discrete(measure: Vec<Rational>) -> Result<ProbSpace, PslError> {
        ProbSpace::from_blocks((0..measure.len()).collect(), measure)
    }

    pub fn uniform(n: usize) -> ProbSpace {
        ProbSpace::discrete(vec![Rational::new(1, n as i64); n]).expect("uniform is normalized")
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.measure.len()
    }

    pub fn block_of(&self, point: usize) -> usize {
        self.block_of[point]
    }

    pub fn block_labels(&self) -> &[usize] {
        &self.block_of
    }

    pub fn block_measure(&self, b: usize) -> Rational {
        self.measure[b]
    }

    pub fn measures(&self) -> &[Rational] {
        &self.measure
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_blocks()];
        for (p, &b) in self.block_of.iter().enumerate() {
            out[b].push(p);
        }
        out
    }

    pub fn total(&self) -> Rational {
        self.measure.iter().sum()
    }

    /// `labels` is constant on every block.
    pub fn refines(&self, labels: &[usize]) -> bool {
        let mut seen = vec![None; self.n_blocks()];
        self.block_of.iter().zip(labels).all(|(&b, &l)| match seen[b] {
            None => {
                seen[b] = Some(l);
                true
            }
            Some(x) => x == l,
        })
    }
}

impl fmt::Display for ProbSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks()
            .iter()
            .zip(&self.measure)
            .map(|(pts, m)| {
                let pts: Vec<String> = pts.iter().map(|p| (p + 1).to_string()).collect();
                format!("{{{}}}:{}", pts.join(","), m)
            })
            .collect();
        write!(f, "⟨{}⟩", parts.join(" "))
    }
}

/// All partitions of `{0..n}` as restricted growth strings, in
/// lexicographic order.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let limit = if cur.is_empty() { 0 } else { max + 1 };
        for v in 0..=limit {
            cur.push(v);
            rec(n, cur, max.max(v), out);
            cur.pop();
        }
    }
    rec(n, &mut cur, 0, &mut out);
    out
}

/// The pullback of `sp` along the surjection `f: S' → S`, given as a table.
pub fn pullback_space(f: &[usize], sp: &ProbSpace) -> Result<ProbSpace, PslError> {
    let mut hit = vec![false; sp.n()];
    for &x in f {
        if x >= sp.n() {
            return Err(PslError::NonSurjective { target: sp.n() });
        }
        hit[x] = true;
    }
    if hit.iter().any(|h| !h) {
        return Err(PslError::NonSurjective { target: sp.n() });
    }
    let labels: Vec<usize> = f.iter().map(|&x| sp.block_of(x)).collect();
    ProbSpace::from_blocks(labels, sp.measure.clone())
}

/// A map from sample points to integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RandomVariable(pub Vec<i64>);

/// The law of `x`, listing values of positive mass only.
pub fn law_of(x: &RandomVariable, sp: &ProbSpace) -> Result<Distribution, PslError> {
    if x.0.len() != sp.n() {
        return Err(PslError::LengthMismatch { expected: sp.n(), got: x.0.len() });
    }
    let mut value_of: Vec<Option<i64>> = vec![None; sp.n_blocks()];
    for (p, &v) in x.0.iter().enumerate() {
        let b = sp.block_of(p);
        match value_of[b] {
            Some(w) if w != v => {
                let pts: Vec<String> = sp.blocks()[b].iter().map(|q| (q + 1).to_string()).collect();
                return Err(PslError::NotMeasurable { block: format!("{{{}}}", pts.join(",")), first: w, second: v });
            }
            _ => value_of[b] = Some(v),
        }
    }
    let mut law = Distribution::new();
    for (b, v) in value_of.into_iter().enumerate() {
        *law.entry(v.expect("blocks are nonempty")).or_insert_with(Rational::zero) += sp.block_measure(b);
    }
    law.retain(|_, m| !m.is_zero());
    Ok(law)
}

fn positive_part(d: &Distribution) -> Distribution {
    d.iter().filter(|(_, m)| !m.is_zero()).map(|(&v, &m)| (v, m)).collect()
}

/// `P(X = a, Y = b) = P(X = a) · P(Y = b)` for all value pairs.
pub fn independence_oracle(sp: &ProbSpace, x: &RandomVariable, y: &RandomVariable) -> Result<bool, PslError> {
    law_of(x, sp)?;
    law_of(y, sp)?;
    let mut joint: BTreeMap<(i64, i64), Rational> = BTreeMap::new();
    let mut px: BTreeMap<i64, Rational> = BTreeMap::new();
    let mut py: BTreeMap<i64, Rational> = BTreeMap::new();
    for (b, pts) in sp.blocks().iter().enumerate() {
        let p = pts[0];
        let m = sp.block_measure(b);
        *joint.entry((x.0[p], y.0[p])).or_insert_with(Rational::zero) += m;
        *px.entry(x.0[p]).or_insert_with(Rational::zero) += m;
        *py.entry(y.0[p]).or_insert_with(Rational::zero) += m;
    }
    Ok(px.iter().all(|(a, ma)| {
        py.iter().all(|(b, mb)| joint.get(&(*a, *b)).copied().unwrap_or_else(Rational::zero) == *ma * *mb)
    }))
}

/// The split found for a top-level separating conjunction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PslWitness {
    /// Component label of each sample point, for each side.
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub left_measure: Vec<String>,
    pub right_measure: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PslOutcome {
    pub holds: bool,
    pub witness: Option<PslWitness>,
}

type Vars = BTreeMap<String, Vec<i64>>;

fn check_formula(phi: &Formula, vars: &Vars) -> Result<(), PslError> {
    match phi {
        Formula::Top | Formula::Bottom => Ok(()),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::Star(a, b) => {
            check_formula(a, vars)?;
            check_formula(b, vars)
        }
        Formula::DistAtom { var, .. } => {
            if vars.contains_key(var) {
                Ok(())
            } else {
                Err(PslError::UnknownVariable(var.clone()))
            }
        }
        other => Err(PslError::AtomIncompatible(other.to_string())),
    }
}

/// Measurable quotients `q` of `sp` that satisfy `phi` on their component
/// space, with the component measure.
fn satisfying_quotients(
    sp: &ProbSpace,
    phi: &Formula,
    vars: &Vars,
    parts: &[Vec<usize>],
) -> Vec<(usize, Vec<Rational>)> {
    parts
        .iter()
        .enumerate()
        .filter_map(|(qi, q)| {
            if !sp.refines(q) {
                return None;
            }
            let k = q.iter().max().map_or(0, |m| m + 1);
            let mut mu = vec![Rational::zero(); k];
            for (b, pts) in sp.blocks().iter().enumerate() {
                mu[q[pts[0]]] += sp.block_measure(b);
            }
            let component = ProbSpace::discrete(mu.clone()).expect("component measure is normalized");
            let transported: Vars = vars
                .iter()
                .filter_map(|(name, x)| {
                    let mut val: Vec<Option<i64>> = vec![None; k];
                    for (p, &v) in x.iter().enumerate() {
                        match val[q[p]] {
                            Some(w) if w != v => return None,
                            _ => val[q[p]] = Some(v),
                        }
                    }
                    Some((name.clone(), val.into_iter().map(|v| v.expect("surjective")).collect()))
                })
                .collect();
            eval_classical(&component, phi, &transported).0.then_some((qi, mu))
        })
        .collect()
}

fn eval_classical(sp: &ProbSpace, phi: &Formula, vars: &Vars) -> (bool, Option<PslWitness>) {
    match phi {
        Formula::Top => (true, None),
        Formula::Bottom => (false, None),
        Formula::And(a, b) => (eval_classical(sp, a, vars).0 && eval_classical(sp, b, vars).0, None),
        Formula::Or(a, b) => (eval_classical(sp, a, vars).0 || eval_classical(sp, b, vars).0, None),
        Formula::Imp(a, b) => (!eval_classical(sp, a, vars).0 || eval_classical(sp, b, vars).0, None),
        Formula::DistAtom { var, dist } => {
            let holds = match vars.get(var) {
                Some(x) => law_of(&RandomVariable(x.clone()), sp).map(|l| l == positive_part(dist)).unwrap_or(false),
                None => false,
            };
            (holds, None)
        }
        Formula::Star(a, b) => {
            let parts = set_partitions(sp.n());
            let left = satisfying_quotients(sp, a, vars, &parts);
            if left.is_empty() {
                return (false, None);
            }
            let right = satisfying_quotients(sp, b, vars, &parts);
            let blocks = sp.blocks();
            let found = left.par_iter().find_map_first(|(i1, mu1)| {
                let q1 = &parts[*i1];
                right.iter().find_map(|(i2, mu2)| {
                    let q2 = &parts[*i2];
                    let (k1, k2) = (mu1.len(), mu2.len());
                    let mut cell = vec![Rational::zero(); k1 * k2];
                    let mut inhabited = vec![false; k1 * k2];
                    for (bi, pts) in blocks.iter().enumerate() {
                        let c = q1[pts[0]] * k2 + q2[pts[0]];
                        cell[c] += sp.block_measure(bi);
                        inhabited[c] = true;
                    }
                    let ok = inhabited.iter().all(|&h| h)
                        && (0..k1).all(|a| (0..k2).all(|b| cell[a * k2 + b] == mu1[a] * mu2[b]));
                    ok.then(|| PslWitness {
                        left: q1.clone(),
                        right: q2.clone(),
                        left_measure: mu1.iter().map(|m| m.to_string()).collect(),
                        right_measure: mu2.iter().map(|m| m.to_string()).collect(),
                    })
                })
            });
            (found.is_some(), found)
        }
        _ => (false, None),
    }
}

/// Satisfaction at a single space. Connectives are classical here; the
/// separating conjunction searches pairs of quotient maps whose joint map is
/// onto the product and whose joint law is the product of the marginals.
pub fn psl_sat(
    sp: &ProbSpace,
    phi: &Formula,
    vars: &BTreeMap<String, RandomVariable>,
) -> Result<PslOutcome, PslError> {
    if sp.n() > PSL_BOUND {
        return Err(PslError::BoundExceeded { size: sp.n(), bound: PSL_BOUND });
    }
    let vars: Vars = vars.iter().map(|(k, v)| (k.clone(), v.0.clone())).collect();
    for x in vars.values() {
        if x.len() != sp.n() {
            return Err(PslError::LengthMismatch { expected: sp.n(), got: x.len() });
        }
    }
    check_formula(phi, &vars)?;
    let (holds, witness) = eval_classical(sp, phi, &vars);
    Ok(PslOutcome { holds, witness })
}

/// Evaluates a formula without separating conjunctions as a Kripke predicate
/// over the probability presheaf on surjections, and reports membership of
/// `sp` at the identity slot. Spaces of one or two points use the atomic
/// coverage; three points use the trivial coverage.
pub fn kripke_holds(
    sp: &ProbSpace,
    phi: &Formula,
    vars: &BTreeMap<String, RandomVariable>,
    denominator: i64,
) -> Result<bool, PslError> {
    let n = sp.n();
    if n == 0 || n > 3 {
        return Err(PslError::BoundExceeded { size: n, bound: 3 });
    }
    let vmap: Vars = vars.iter().map(|(k, v)| (k.clone(), v.0.clone())).collect();
    check_formula(phi, &vmap)?;
    let c = Arc::new(build_finsurj_category(n).map_err(|e| PslError::Unsupported(e.to_string()))?);
    let cov = if n <= 2 {
        build_coverage(c.clone(), CoverageKind::Atomic)
    } else {
        saturate_precoverage(c.clone(), &[])
    }
    .map_err(|e| PslError::Unsupported(e.to_string()))?;
    let grid = build_resource_sheaf(c.clone(), &ResourceKind::ProbabilityGrid { denominator })
        .map_err(|e| PslError::Unsupported(e.to_string()))?;
    let stage = crate::fincat::ObjId(n - 1);
    let idx = grid
        .index_of(stage, &crate::element::Element::Prob(sp.clone()))
        .ok_or_else(|| PslError::NonRational(format!("{sp} is not on the 1/{denominator} grid")))?;
    let fibre = Arc::new(
        Fibre::new(Arc::new(cov), Arc::new(grid), stage).map_err(|e| PslError::Unsupported(e.to_string()))?,
    );
    let pred = kripke_eval(&fibre, phi, &vmap)?;
    Ok(pred.contains(fibre.identity_slot(), idx))
}

fn kripke_eval(fibre: &Arc<Fibre>, phi: &Formula, vars: &Vars) -> Result<KripkePredicate, PslError> {
    let lift = |e: crate::pred::PredError| PslError::Unsupported(e.to_string());
    Ok(match phi {
        Formula::Top => KripkePredicate::top(fibre.clone()),
        Formula::Bottom => KripkePredicate::bottom(fibre.clone()),
        Formula::And(a, b) => kripke_eval(fibre, a, vars)?.meet(&kripke_eval(fibre, b, vars)?).map_err(lift)?,
        Formula::Or(a, b) => kripke_eval(fibre, a, vars)?.join(&kripke_eval(fibre, b, vars)?).map_err(lift)?,
        Formula::Imp(a, b) => {
            kripke_eval(fibre, a, vars)?.implication(&kripke_eval(fibre, b, vars)?).map_err(lift)?
        }
        Formula::DistAtom { var, dist } => {
            let x = &vars[var];
            let want = positive_part(dist);
            let c = fibre.resource().base().clone();
            KripkePredicate::from_fn(fibre.clone(), |slot, e| {
                let p = fibre.slot_morphism(slot);
                let table = c.surjection_table(p).expect("surjection base");
                let pulled = RandomVariable(table.iter().map(|&i| x[i]).collect());
                let sp = e.as_prob().expect("probability sections");
                law_of(&pulled, sp).map(|l| l == want).unwrap_or(false)
            })
        }
        Formula::Star(..) => {
            return Err(PslError::Unsupported("separating conjunction has no stage-wise Kripke form here".into()))
        }
        other => return Err(PslError::AtomIncompatible(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    fn dist(pairs: &[(i64, Rational)]) -> Distribution {
        pairs.iter().copied().collect()
    }

    fn two_bits() -> (ProbSpace, BTreeMap<String, RandomVariable>) {
        let sp = ProbSpace::uniform(4);
        let vars = [
            ("X".to_string(), RandomVariable(vec![0, 0, 1, 1])),
            ("Y".to_string(), RandomVariable(vec![0, 1, 0, 1])),
        ]
        .into_iter()
        .collect();
        (sp, vars)
    }

    fn unif(var: &str) -> Formula {
        Formula::DistAtom { var: var.into(), dist: dist(&[(0, r(1, 2)), (1, r(1, 2))]) }
    }

    #[test]
    fn partitions_are_bell_numbers() {
        let counts: Vec<usize> = (0..=6).map(|n| set_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn space_validation() {
        assert!(matches!(ProbSpace::discrete(vec![r(1, 2), r(1, 3)]), Err(PslError::NotNormalized(_))));
        assert!(matches!(ProbSpace::discrete(vec![r(3, 2), r(-1, 2)]), Err(PslError::NegativeMeasure(_))));
        assert!(ProbSpace::from_partition(3, &[vec![0, 1]], vec![r(1, 1)]).is_err());
        let sp = ProbSpace::from_blocks(vec![5, 2, 5], vec![r(0, 1), r(0, 1), r(1, 4), r(0, 1), r(0, 1), r(3, 4)]);
        assert!(sp.is_err());
        let sp = ProbSpace::from_partition(3, &[vec![1], vec![0, 2]], vec![r(1, 4), r(3, 4)]).unwrap();
        assert_eq!(sp.block_labels(), &[0, 1, 0]);
        assert_eq!(sp.block_measure(0), r(3, 4));
    }

    #[test]
    fn pullback_examples() {
        let sp = ProbSpace::uniform(2);
        assert_eq!(pullback_space(&[0, 1], &sp).unwrap(), sp);
        let parity = pullback_space(&[0, 1, 0, 1], &sp).unwrap();
        assert_eq!(parity.blocks(), vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(parity.measures(), &[r(1, 2), r(1, 2)]);
        assert!(parity.total().is_one());
        assert!(matches!(pullback_space(&[0, 0], &sp), Err(PslError::NonSurjective { .. })));
    }

    #[test]
    fn laws() {
        let sp = ProbSpace::uniform(4);
        assert_eq!(law_of(&RandomVariable(vec![3; 4]), &sp).unwrap(), dist(&[(3, r(1, 1))]));
        assert_eq!(
            law_of(&RandomVariable(vec![0, 0, 1, 1]), &sp).unwrap(),
            dist(&[(0, r(1, 2)), (1, r(1, 2))])
        );
        let coarse = ProbSpace::from_partition(2, &[vec![0, 1]], vec![r(1, 1)]).unwrap();
        assert!(matches!(law_of(&RandomVariable(vec![0, 1]), &coarse), Err(PslError::NotMeasurable { .. })));
    }

    #[test]
    fn independent_bits_separate() {
        let (sp, vars) = two_bits();
        let phi = Formula::Star(Box::new(unif("X")), Box::new(unif("Y")));
        let out = psl_sat(&sp, &phi, &vars).unwrap();
        assert!(out.holds);
        let w = out.witness.unwrap();
        assert_eq!(w.left, vec![0, 0, 1, 1]);
        assert_eq!(w.right, vec![0, 1, 0, 1]);
    }

    #[test]
    fn correlated_bits_do_not_separate() {
        let sp = ProbSpace::discrete(vec![r(1, 2), r(0, 1), r(0, 1), r(1, 2)]).unwrap();
        let (_, vars) = two_bits();
        let phi = Formula::Star(Box::new(unif("X")), Box::new(unif("Y")));
        assert!(!psl_sat(&sp, &phi, &vars).unwrap().holds);
        assert!(!independence_oracle(&sp, &vars["X"], &vars["Y"]).unwrap());
    }

    #[test]
    fn own_law_holds() {
        let (sp, vars) = two_bits();
        let law = law_of(&vars["X"], &sp).unwrap();
        let phi = Formula::DistAtom { var: "X".into(), dist: law };
        assert!(psl_sat(&sp, &phi, &vars).unwrap().holds);
        let bad = Formula::DistAtom { var: "Z".into(), dist: Distribution::new() };
        assert!(matches!(psl_sat(&sp, &bad, &vars), Err(PslError::UnknownVariable(_))));
    }

    #[test]
    fn oracle_examples() {
        let (sp, vars) = two_bits();
        assert!(independence_oracle(&sp, &vars["X"], &vars["Y"]).unwrap());
        assert!(independence_oracle(&sp, &RandomVariable(vec![7; 4]), &vars["Y"]).unwrap());
    }

    #[test]
    fn bound_enforced() {
        let sp = ProbSpace::uniform(7);
        assert!(matches!(psl_sat(&sp, &Formula::Top, &BTreeMap::new()), Err(PslError::BoundExceeded { .. })));
    }

    #[test]
    fn kripke_agrees_on_small_spaces() {
        let sp = ProbSpace::uniform(2);
        let vars: BTreeMap<String, RandomVariable> =
            [("X".to_string(), RandomVariable(vec![0, 1]))].into_iter().collect();
        let phi = Formula::Imp(Box::new(unif("X")), Box::new(Formula::Bottom));
        assert_eq!(kripke_holds(&sp, &phi, &vars, 6).unwrap(), psl_sat(&sp, &phi, &vars).unwrap().holds);
        let phi = Formula::Or(Box::new(unif("X")), Box::new(Formula::Bottom));
        assert!(kripke_holds(&sp, &phi, &vars, 6).unwrap());
    }
}
