//! Model files: JSON with a `schema_version`, read strictly.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_rational::Ratio;
use serde::Deserialize;
use sheafsep::day::MonoidVariant;
use sheafsep::fincat::{build_finsurj_category, build_powerset_category};
use sheafsep::presheaf::{build_resource_sheaf, ResourceKind};
use sheafsep::psl::{ProbSpace, RandomVariable, PSL_BOUND};
use sheafsep::seplogic::{parse_formula, Formula, ResourceModel};
use sheafsep::site::{build_coverage, CoverageKind};
use sheafsep::{Coverage, Presheaf};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const MAX_LOCATIONS: usize = 4;
pub const MAX_FINSURJ: usize = 4;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub site: SiteSpec,
    pub resource: Option<ResourceSpec>,
    pub monoid: Option<String>,
    #[serde(default)]
    pub formulas: BTreeMap<String, String>,
    #[serde(default)]
    pub variables: BTreeMap<String, Vec<i64>>,
    #[serde(default)]
    pub spaces: BTreeMap<String, SpaceSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "base", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SiteSpec {
    Powerset { locations: Vec<String>, coverage: String },
    Finsurj { max_size: usize, coverage: String },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ResourceSpec {
    StrictMemory { values: Vec<i64> },
    PartialMemory { values: Vec<i64> },
    SupportBounded { values: Vec<i64>, k: usize },
    ProbabilityGrid { denominator: i64 },
    Terminal,
}

/// A finite probability space: one measure per block, and optionally the
/// block of each point (default: every point its own block).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub measure: Vec<String>,
    pub blocks: Option<Vec<usize>>,
}

/// A loaded and validated model.
pub struct Model {
    pub description: String,
    pub coverage: Arc<Coverage>,
    pub resource: Option<Arc<Presheaf>>,
    pub memory: Option<ResourceModel>,
    pub formulas: BTreeMap<String, Formula>,
    pub variables: BTreeMap<String, RandomVariable>,
    pub spaces: BTreeMap<String, ProbSpace>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

pub fn load_model(path: &Path) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let file: ModelFile = serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Schema { path: e.path().to_string(), message: e.inner().to_string() })?;
    build_model(file)
}

pub fn build_model(file: ModelFile) -> Result<Model, CliError> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::Schema {
            path: "schema_version".into(),
            message: format!("unsupported version {}, expected {SCHEMA_VERSION}", file.schema_version),
        });
    }
    let (base, coverage_name, mut description) = match &file.site {
        SiteSpec::Powerset { locations, coverage } => {
            if locations.len() > MAX_LOCATIONS {
                return Err(CliError::Bound { what: "locations", size: locations.len(), bound: MAX_LOCATIONS });
            }
            let c = build_powerset_category(locations).map_err(|e| invalid(e.to_string()))?;
            (c, coverage, format!("powerset of {{{}}}", locations.join(",")))
        }
        SiteSpec::Finsurj { max_size, coverage } => {
            if *max_size > MAX_FINSURJ {
                return Err(CliError::Bound { what: "surjection site size", size: *max_size, bound: MAX_FINSURJ });
            }
            let c = build_finsurj_category(*max_size).map_err(|e| invalid(e.to_string()))?;
            (c, coverage, format!("surjections between sets of size at most {max_size}"))
        }
    };
    let base = Arc::new(base);
    let kind: CoverageKind = coverage_name.parse().map_err(|e: String| CliError::Schema { path: "site.coverage".into(), message: e })?;
    let coverage = Arc::new(build_coverage(base.clone(), kind).map_err(|e| invalid(e.to_string()))?);
    description.push_str(&format!(", {kind} coverage"));

    let (resource, values) = match &file.resource {
        None => (None, None),
        Some(spec) => {
            let (kind, values) = match spec {
                ResourceSpec::StrictMemory { values } => (ResourceKind::StrictMemory { values: values.clone() }, Some(values)),
                ResourceSpec::PartialMemory { values } => (ResourceKind::PartialMemory { values: values.clone() }, Some(values)),
                ResourceSpec::SupportBounded { values, k } => {
                    (ResourceKind::SupportBounded { values: values.clone(), k: *k }, Some(values))
                }
                ResourceSpec::ProbabilityGrid { denominator } => (ResourceKind::ProbabilityGrid { denominator: *denominator }, None),
                ResourceSpec::Terminal => (ResourceKind::Terminal, None),
            };
            let p = build_resource_sheaf(base.clone(), &kind).map_err(|e| invalid(e.to_string()))?;
            description.push_str(&format!(", {} resource", kind.label()));
            (Some(Arc::new(p)), values.cloned())
        }
    };

    let variant = file
        .monoid
        .as_deref()
        .map(|m| m.parse::<MonoidVariant>().map_err(|e| CliError::Schema { path: "monoid".into(), message: e.to_string() }))
        .transpose()?;
    let memory = match (&resource, values) {
        (Some(p), Some(values)) if p.is_powerset() => {
            Some(ResourceModel::new(coverage.clone(), p.clone(), values, variant).map_err(|e| invalid(e.to_string()))?)
        }
        _ if variant.is_some() => return Err(invalid("a monoid needs a memory resource over a powerset site")),
        _ => None,
    };
    if let Some(v) = variant {
        description.push_str(&format!(", {v} monoid"));
    }

    let mut variables = BTreeMap::new();
    for (name, values) in file.variables {
        variables.insert(name, RandomVariable(values));
    }
    let mut spaces = BTreeMap::new();
    for (name, spec) in file.spaces {
        let sp = build_space(&spec).map_err(|m| CliError::Schema { path: format!("spaces.{name}"), message: m })?;
        for (var, x) in &variables {
            if x.0.len() != sp.n() {
                return Err(invalid(format!("variable {var} has {} points but space {name} has {}", x.0.len(), sp.n())));
            }
        }
        spaces.insert(name, sp);
    }

    let mut formulas = BTreeMap::new();
    for (name, text) in file.formulas {
        let phi = parse_formula(&text).map_err(|e| CliError::Schema { path: format!("formulas.{name}"), message: e.to_string() })?;
        check_references(&phi, memory.as_ref(), &variables)
            .map_err(|m| CliError::Schema { path: format!("formulas.{name}"), message: m })?;
        formulas.insert(name, phi);
    }
    Ok(Model { description, coverage, resource, memory, formulas, variables, spaces })
}

fn build_space(spec: &SpaceSpec) -> Result<ProbSpace, String> {
    let measure: Vec<Ratio<i64>> = spec
        .measure
        .iter()
        .map(|m| m.trim().parse::<Ratio<i64>>().map_err(|e| format!("bad measure {m:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let blocks = spec.blocks.clone().unwrap_or_else(|| (0..measure.len()).collect());
    if blocks.len() > PSL_BOUND {
        return Err(format!("{} points exceed the bound of {PSL_BOUND}", blocks.len()));
    }
    ProbSpace::from_blocks(blocks, measure).map_err(|e| e.to_string())
}

/// Every location, value and variable named by `phi` is declared.
pub fn check_references(
    phi: &Formula,
    memory: Option<&ResourceModel>,
    variables: &BTreeMap<String, RandomVariable>,
) -> Result<(), String> {
    match phi {
        Formula::Top | Formula::Bottom | Formula::Emp => Ok(()),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::Star(a, b) => {
            check_references(a, memory, variables)?;
            check_references(b, memory, variables)
        }
        Formula::DistAtom { var, .. } => {
            if variables.contains_key(var) {
                Ok(())
            } else {
                Err(format!("undeclared variable {var}"))
            }
        }
        _ => match memory {
            Some(m) => m.check_formula(phi).map_err(|e| e.to_string()),
            None => Err(format!("atom {phi} needs a memory resource")),
        },
    }
}
