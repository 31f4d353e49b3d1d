use std::sync::{Arc, OnceLock};

use super::formula::Formula;
use super::SeplogicError;
use crate::day::{build_memory_monoid, MonoidVariant, ResourceMonoid};
use crate::fincat::{build_powerset_category, ObjId};
use crate::pred::{Fibre, KripkePredicate};
use crate::presheaf::{
    amalgamation_operator, build_resource_sheaf, matching_presheaf, AmalgamationIso, MatchingPresheaf, Presheaf,
    ResourceKind, SheafMorphism,
};
use crate::site::{build_coverage, Coverage, CoverageKind};

/// How separating conjunction is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Combine, push along the multiplication into the matching presheaf,
    /// then along the amalgamation map.
    Pipeline,
    /// The split-and-multiply comprehension for the monoid's variant.
    #[default]
    Unfolded,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pipeline" => Ok(Mode::Pipeline),
            "unfolded" => Ok(Mode::Unfolded),
            other => Err(format!("unknown mode {other}")),
        }
    }
}

pub(super) struct Pipeline {
    pub matching: MatchingPresheaf,
    pub iso: AmalgamationIso,
    /// Multiplication followed by the inverse amalgamation map.
    pub to_match: SheafMorphism,
}

/// A memory resource over a powerset site with an optional monoid.
pub struct ResourceModel {
    coverage: Arc<Coverage>,
    resource: Arc<Presheaf>,
    values: Vec<i64>,
    monoid: Option<ResourceMonoid>,
    pipeline: OnceLock<Result<Pipeline, SeplogicError>>,
}

impl std::fmt::Debug for ResourceModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ResourceModel")
            .field("resource", &self.resource.name())
            .field("values", &self.values)
            .field("monoid", &self.monoid.as_ref().map(|m| m.variant()))
            .finish()
    }
}

impl ResourceModel {
    pub fn new(
        coverage: Arc<Coverage>,
        resource: Arc<Presheaf>,
        values: Vec<i64>,
        variant: Option<MonoidVariant>,
    ) -> Result<ResourceModel, SeplogicError> {
        if !resource.is_powerset() || !resource.same_base(coverage.base()) {
            return Err(SeplogicError::NotMemory(resource.name().into()));
        }
        let monoid = variant.map(|v| build_memory_monoid(resource.clone(), v)).transpose()?;
        Ok(ResourceModel { coverage, resource, values, monoid, pipeline: OnceLock::new() })
    }

    /// Memory over the powerset of `locations` with the downward-closed
    /// coverage; `partial` selects cells that may hold ⊥.
    pub fn memory(
        locations: &[&str],
        values: &[i64],
        partial: bool,
        variant: Option<MonoidVariant>,
    ) -> Result<ResourceModel, SeplogicError> {
        let locs: Vec<String> = locations.iter().map(|s| s.to_string()).collect();
        let c = Arc::new(build_powerset_category(&locs).map_err(|e| SeplogicError::NotMemory(e.to_string()))?);
        let cov = Arc::new(build_coverage(c.clone(), CoverageKind::DownwardClosed)?);
        let kind = if partial {
            ResourceKind::PartialMemory { values: values.to_vec() }
        } else {
            ResourceKind::StrictMemory { values: values.to_vec() }
        };
        let p = Arc::new(build_resource_sheaf(c, &kind)?);
        ResourceModel::new(cov, p, values.to_vec(), variant)
    }

    pub fn coverage(&self) -> &Arc<Coverage> {
        &self.coverage
    }

    pub fn resource(&self) -> &Arc<Presheaf> {
        &self.resource
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn locations(&self) -> &[String] {
        self.resource.locations().unwrap_or(&[])
    }

    pub fn monoid(&self) -> Option<&ResourceMonoid> {
        self.monoid.as_ref()
    }

    pub fn fibre(&self, stage: ObjId) -> Result<Arc<Fibre>, SeplogicError> {
        Ok(Arc::new(Fibre::new(self.coverage.clone(), self.resource.clone(), stage)?))
    }

    /// Parses a stage written as `{x,y}` (or `x,y`).
    pub fn stage(&self, text: &str) -> Result<ObjId, SeplogicError> {
        let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
        let names: Vec<&str> = inner.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        self.resource.base().subset_named(&names).ok_or_else(|| SeplogicError::UnknownStage(text.into()))
    }

    pub fn location_index(&self, name: &str) -> Result<usize, SeplogicError> {
        self.locations().iter().position(|l| l == name).ok_or_else(|| SeplogicError::UnknownLocation(name.into()))
    }

    /// Rejects atoms naming undeclared locations or values.
    pub fn check_formula(&self, phi: &Formula) -> Result<(), SeplogicError> {
        match phi {
            Formula::Top | Formula::Bottom | Formula::Emp => Ok(()),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::Star(a, b) => {
                self.check_formula(a)?;
                self.check_formula(b)
            }
            Formula::PointsToStrict { loc, val } | Formula::PointsToNonStrict { loc, val } | Formula::PointsToAlloc { loc, val } => {
                self.location_index(loc)?;
                if self.values.contains(val) {
                    Ok(())
                } else {
                    Err(SeplogicError::UnknownValue(*val))
                }
            }
            Formula::DistAtom { .. } => Err(SeplogicError::AtomIncompatible(phi.to_string())),
        }
    }

    pub(super) fn pipeline(&self) -> Result<&Pipeline, SeplogicError> {
        let monoid = self.monoid.as_ref().ok_or(SeplogicError::NoMonoid)?;
        self.pipeline
            .get_or_init(|| {
                let matching = matching_presheaf(&self.resource, &self.coverage)?;
                let iso = amalgamation_operator(&self.resource, &self.coverage, &matching)?;
                let to_match = monoid.mult().then(&iso.inverse)?;
                Ok(Pipeline { matching, iso, to_match })
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// The matching presheaf and amalgamation isomorphism used by the
    /// pipeline mode.
    pub fn amalgamation(&self) -> Result<(&MatchingPresheaf, &AmalgamationIso), SeplogicError> {
        let p = self.pipeline()?;
        Ok((&p.matching, &p.iso))
    }
}

/// The predicate of an atom at the fibre's stage. Strict and non-strict
/// points-to coincide extensionally on heaps: ⊥ never equals a value.
pub fn atom_predicate(model: &ResourceModel, atom: &Formula, fibre: Arc<Fibre>) -> Result<KripkePredicate, SeplogicError> {
    model.check_formula(atom)?;
    let pred = match atom {
        Formula::Emp => KripkePredicate::from_fn(fibre, |_, e| e.as_heap().is_some_and(|h| h.cells().is_empty())),
        Formula::PointsToStrict { loc, val } => {
            let l = model.location_index(loc)?;
            KripkePredicate::from_fn(fibre, |_, e| {
                let h = e.as_heap().expect("heap sections");
                !h.in_stage(l) || h.get(l) == Some(*val)
            })
        }
        Formula::PointsToNonStrict { loc, val } => {
            let l = model.location_index(loc)?;
            KripkePredicate::from_fn(fibre, |_, e| {
                let h = e.as_heap().expect("heap sections");
                !h.in_stage(l) || (h.cells().contains_key(&l) && h.get(l) == Some(*val))
            })
        }
        Formula::PointsToAlloc { loc, val } => {
            let l = model.location_index(loc)?;
            KripkePredicate::from_fn(fibre, |_, e| {
                let h = e.as_heap().expect("heap sections");
                h.in_stage(l) && h.get(l) == Some(*val)
            })
        }
        other => return Err(SeplogicError::AtomIncompatible(other.to_string())),
    };
    Ok(pred)
}
