//! Law suites shared by the tests, the acceptance run and the CLI. Each
//! returns a report instead of panicking so callers decide what a failure
//! means.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::day::{check_day_stability, check_monoid_laws, ResourceMonoid};
use crate::fincat::ObjId;
use crate::pred::{all_predicates, random_predicate, Fibre, KripkePredicate};
use crate::presheaf::{Presheaf, SheafMorphism};
use crate::seplogic::{sep_conj, Mode, ResourceModel, SeplogicError};
use crate::site::Coverage;

/// Violations are capped so a broken law does not flood the output.
const MAX_REPORTED: usize = 20;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub name: String,
    pub checked: usize,
    pub violations: Vec<String>,
}

impl LawReport {
    fn new(name: &str) -> LawReport {
        LawReport { name: name.into(), ..LawReport::default() }
    }

    fn fail(&mut self, msg: impl FnOnce() -> String) {
        if self.violations.len() < MAX_REPORTED {
            self.violations.push(msg());
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sample(fibre: &Arc<Fibre>, rng: &mut ChaCha8Rng, n: usize) -> Vec<KripkePredicate> {
    (0..n).map(|_| random_predicate(fibre.clone(), rng, 6)).collect()
}

fn residuation_on(report: &mut LawReport, p: &KripkePredicate, q: &KripkePredicate, r: &KripkePredicate) {
    report.checked += 1;
    let left = p.meet(q).and_then(|pq| pq.is_subset(r));
    let right = q.implication(r).and_then(|qr| p.is_subset(&qr));
    if left != right {
        report.fail(|| format!("P ∧ Q ≤ R is {left:?} but P ≤ Q → R is {right:?} for P =\n{p}Q =\n{q}R =\n{r}"));
    }
}

/// `P ∧ Q ≤ R ⟺ P ≤ Q → R`, exhaustively over `exhaustive` and on `samples`
/// random triples from `sampled`.
pub fn residuation(exhaustive: Option<&Arc<Fibre>>, sampled: &Arc<Fibre>, samples: usize, seed: u64) -> LawReport {
    let mut report = LawReport::new("heyting residuation");
    if let Some(f) = exhaustive {
        match all_predicates(f) {
            Ok(all) => {
                for p in &all {
                    for q in &all {
                        for r in &all {
                            residuation_on(&mut report, p, q, r);
                        }
                    }
                }
            }
            Err(e) => report.fail(|| e.to_string()),
        }
    }
    let mut g = rng(seed);
    for _ in 0..samples {
        let t = sample(sampled, &mut g, 3);
        residuation_on(&mut report, &t[0], &t[1], &t[2]);
    }
    report
}

/// Distributivity of meet over join, and the implication being closed.
pub fn heyting_structure(fibre: &Arc<Fibre>, samples: usize, seed: u64) -> LawReport {
    let mut report = LawReport::new("heyting structure");
    let mut g = rng(seed);
    for _ in 0..samples {
        let t = sample(fibre, &mut g, 3);
        let (p, q, r) = (&t[0], &t[1], &t[2]);
        report.checked += 2;
        let left = p.meet(&q.join(r).unwrap()).unwrap();
        let right = p.meet(q).unwrap().join(&p.meet(r).unwrap()).unwrap();
        if left != right {
            report.fail(|| format!("meet does not distribute over join for\n{p}{q}{r}"));
        }
        let imp = q.implication(r).unwrap();
        if !imp.is_closed() {
            report.fail(|| format!("implication is not a predicate: {}", imp.validate()[0]));
        }
    }
    report
}

/// `∃α P ≤ Q ⟺ P ≤ α*Q` for random `P` over the source and closed `Q` over
/// the target, plus preservation of meets and top by preimage and of joins
/// and bottom by image.
pub fn adjunction(alpha: &SheafMorphism, source: &Arc<Fibre>, target: &Arc<Fibre>, cases: usize, seed: u64) -> LawReport {
    let mut report = LawReport::new(&format!("image ⊣ preimage along {} → {}", alpha.source().name(), alpha.target().name()));
    let mut g = rng(seed);
    for _ in 0..cases {
        let p = random_predicate(source.clone(), &mut g, 6);
        let p2 = random_predicate(source.clone(), &mut g, 6);
        let q = random_predicate(target.clone(), &mut g, 6);
        let q2 = random_predicate(target.clone(), &mut g, 6);
        let mut run = || -> Result<(), crate::pred::PredError> {
            let img = p.direct_image(alpha, target.clone())?;
            let pre = q.reindex_preimage(alpha, source.clone())?;
            report.checked += 1;
            let (left, right) = (img.is_subset(&q)?, p.is_subset(&pre)?);
            if left != right {
                report.fail(|| format!("image ≤ Q is {left} but P ≤ preimage is {right} for P =\n{p}Q =\n{q}"));
            }
            report.checked += 4;
            if q.meet(&q2)?.reindex_preimage(alpha, source.clone())? != pre.meet(&q2.reindex_preimage(alpha, source.clone())?)? {
                report.fail(|| "preimage does not preserve a meet".into());
            }
            let top = KripkePredicate::top(target.clone()).reindex_preimage(alpha, source.clone())?;
            if alpha.is_total() && top != KripkePredicate::top(source.clone()) {
                report.fail(|| "preimage does not preserve top".into());
            }
            if p.join(&p2)?.direct_image(alpha, target.clone())? != img.join(&p2.direct_image(alpha, target.clone())?)? {
                report.fail(|| "image does not preserve a join".into());
            }
            if KripkePredicate::bottom(source.clone()).direct_image(alpha, target.clone())?
                != KripkePredicate::bottom(target.clone())
            {
                report.fail(|| "image does not preserve bottom".into());
            }
            Ok(())
        };
        if let Err(e) = run() {
            report.fail(|| e.to_string());
        }
    }
    report
}

pub fn monoid_laws(m: &ResourceMonoid) -> LawReport {
    let r = check_monoid_laws(m);
    LawReport { name: format!("{} monoid laws", m.variant()), checked: r.checked, violations: r.violations }
}

pub fn day_stability(cov: &Coverage, samples: &[Arc<Presheaf>], inclusions: &[SheafMorphism]) -> LawReport {
    let mut report = LawReport::new("day stability");
    match check_day_stability(cov, samples, inclusions) {
        Ok(r) => {
            report.checked = r.checked;
            report.violations = r.sheaf_failures.into_iter().chain(r.mono_failures).chain(r.gamma_failures).collect();
        }
        Err(e) => report.fail(|| e.to_string()),
    }
    report
}

/// The amalgamation map of the model's resource is a natural bijection.
pub fn amalgamation_iso(model: &ResourceModel) -> LawReport {
    let mut report = LawReport::new("amalgamation isomorphism");
    match model.amalgamation() {
        Ok((_, iso)) => {
            let c = model.resource().base();
            report.checked = c.objects().map(|a| model.resource().len_at(a)).sum();
            report.violations = iso.bijectivity.iter().chain(&iso.naturality).take(MAX_REPORTED).cloned().collect();
        }
        Err(e) => report.fail(|| e.to_string()),
    }
    report
}

/// Pipeline and unfolded separating conjunctions agree on `pairs` random
/// predicate pairs at `stage`.
pub fn pipeline_vs_unfolded(model: &ResourceModel, stage: ObjId, pairs: usize, seed: u64) -> LawReport {
    let variant = model.monoid().map_or("no".into(), |m| m.variant().to_string());
    let mut report = LawReport::new(&format!("pipeline vs unfolded ({variant} monoid)"));
    let fibre = match model.fibre(stage) {
        Ok(f) => f,
        Err(e) => {
            report.fail(|| e.to_string());
            return report;
        }
    };
    let mut g = rng(seed);
    for _ in 0..pairs {
        let p = random_predicate(fibre.clone(), &mut g, 6);
        let q = random_predicate(fibre.clone(), &mut g, 6);
        report.checked += 1;
        let run = || -> Result<(KripkePredicate, KripkePredicate), SeplogicError> {
            Ok((sep_conj(model, &p, &q, Mode::Pipeline)?, sep_conj(model, &p, &q, Mode::Unfolded)?))
        };
        match run() {
            Ok((a, b)) if a != b => report.fail(|| format!("modes differ for P =\n{p}Q =\n{q}pipeline:\n{a}unfolded:\n{b}")),
            Ok(_) => {}
            Err(e) => report.fail(|| e.to_string()),
        }
    }
    report
}

/// Commutativity and monotonicity of the separating conjunction on random
/// pairs, in the unfolded mode.
pub fn star_properties(model: &ResourceModel, stage: ObjId, pairs: usize, seed: u64) -> LawReport {
    let mut report = LawReport::new("separating conjunction commutes and is monotone");
    let Ok(fibre) = model.fibre(stage) else {
        report.fail(|| "bad stage".into());
        return report;
    };
    let mut g = rng(seed);
    for _ in 0..pairs {
        let t = sample(&fibre, &mut g, 3);
        let (p, q, r) = (&t[0], &t[1], &t[2]);
        let mut run = || -> Result<(), SeplogicError> {
            report.checked += 2;
            let pq = sep_conj(model, p, q, Mode::Unfolded)?;
            if pq != sep_conj(model, q, p, Mode::Unfolded)? {
                report.fail(|| format!("P ∗ Q ≠ Q ∗ P for P =\n{p}Q =\n{q}"));
            }
            let bigger = sep_conj(model, &p.join(r)?, q, Mode::Unfolded)?;
            if !pq.is_subset(&bigger)? {
                report.fail(|| "separating conjunction is not monotone".into());
            }
            Ok(())
        };
        if let Err(e) = run() {
            report.fail(|| e.to_string());
        }
    }
    report
}
