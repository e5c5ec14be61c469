use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{RefineError, RefinementVerdict, Violation};
use crate::dsl::{Document, DocumentKind, Stimulus};
use crate::model::SystemModel;
use crate::semantics::{elaborate, ElaborateOptions};
use crate::sim::{enumerate_runs, Projection};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceBounds {
    pub rounds: usize,
    /// Node budget of each enumeration.
    pub cap: usize,
}

impl Default for TraceBounds {
    fn default() -> Self {
        TraceBounds { rounds: 6, cap: 200_000 }
    }
}

fn runs(model: &SystemModel, stimuli: &[Stimulus], b: TraceBounds, projection: &Projection) -> Result<BTreeSet<String>, RefineError> {
    let set = enumerate_runs(model, stimuli, b.rounds, b.cap)?;
    if set.truncated {
        return Err(RefineError::ExplosionLimit { cap: b.cap });
    }
    Ok(set.projected(model, projection))
}

fn smallest<'a>(it: impl Iterator<Item = &'a String>) -> Option<&'a String> {
    it.min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
}

fn bound_note(b: TraceBounds) -> String {
    format!("bounded check: rounds={} cap={}", b.rounds, b.cap)
}

/// Every bounded run of `concrete`, rendered under `projection`, must be a
/// run of `abstract_`. The abstract side is rendered in full, or without
/// states when the projection is observable. The smallest missing run is
/// returned as the witness.
pub fn trace_refinement_check(
    abstract_: &SystemModel,
    concrete: &SystemModel,
    stimuli: &[Stimulus],
    bounds: TraceBounds,
    projection: &Projection,
) -> Result<RefinementVerdict, RefineError> {
    let abstract_view = if *projection == Projection::Observable { Projection::Observable } else { Projection::Full };
    let a = runs(abstract_, stimuli, bounds, &abstract_view)?;
    let c = runs(concrete, stimuli, bounds, projection)?;
    let missing: Vec<&String> = c.iter().filter(|t| !a.contains(*t)).collect();
    let mut v = Vec::new();
    if !missing.is_empty() {
        v.push(Violation::new(
            "R-TR-INCLUSION",
            format!("{} of {} concrete runs are not abstract runs", missing.len(), c.len()),
        ));
    }
    let notes = alloc::vec![bound_note(bounds), format!("{} abstract runs, {} concrete runs", a.len(), c.len())];
    let mut verdict = RefinementVerdict::new(&["R-TR-INCLUSION"], v, notes);
    verdict.witness = smallest(missing.into_iter()).cloned();
    Ok(verdict)
}

/// Accepted iff some bounded run, messages only, is shared by all models.
/// The smallest shared run is the witness.
pub fn consistency_intersection(
    models: &[&SystemModel],
    stimuli: &[Stimulus],
    bounds: TraceBounds,
) -> Result<RefinementVerdict, RefineError> {
    if models.len() < 2 {
        return Err(RefineError::TooFewModels(2));
    }
    let mut common = runs(models[0], stimuli, bounds, &Projection::Observable)?;
    for m in &models[1..] {
        let next = runs(m, stimuli, bounds, &Projection::Observable)?;
        common.retain(|t| next.contains(t));
    }
    let mut v = Vec::new();
    if common.is_empty() {
        v.push(Violation::new("R-CONS-EMPTY", format!("the {} models share no run", models.len())));
    }
    let notes = alloc::vec![bound_note(bounds), format!("{} shared runs", common.len())];
    let mut verdict = RefinementVerdict::new(&["R-CONS-EMPTY"], v, notes);
    verdict.witness = smallest(common.iter()).cloned();
    Ok(verdict)
}

fn model_with(base: &[Document], object_diagram: Option<&str>, sd: &Document) -> Result<SystemModel, RefineError> {
    let class = &sd
        .as_state()
        .ok_or_else(|| RefineError::WrongKind { expected: "state diagram", found: sd.id.clone() })?
        .class;
    let mut docs: Vec<Document> = base
        .iter()
        .filter(|d| d.as_state().is_none_or(|b| &b.class != class) && d.id != sd.id)
        .cloned()
        .collect();
    docs.push(sd.clone());
    elaborate(&docs, &[], ElaborateOptions { object_diagram }).map_err(RefineError::Elaboration)
}

/// The models obtained by plugging `old` and `new` into `base`, each
/// replacing any state diagram of the same class.
pub fn state_diagram_models(
    base: &[Document],
    object_diagram: Option<&str>,
    old: &Document,
    new: &Document,
) -> Result<(SystemModel, SystemModel), RefineError> {
    Ok((model_with(base, object_diagram, old)?, model_with(base, object_diagram, new)?))
}

/// Intersection check over one model per state diagram.
pub fn consistency_of_state_diagrams(
    base: &[Document],
    object_diagram: Option<&str>,
    sds: &[&Document],
    stimuli: &[Stimulus],
    bounds: TraceBounds,
) -> Result<RefinementVerdict, RefineError> {
    if let Some(d) = sds.iter().find(|d| d.kind() != DocumentKind::StateDiagram) {
        return Err(RefineError::WrongKind { expected: "state diagram", found: d.id.clone() });
    }
    let models = sds.iter().map(|sd| model_with(base, object_diagram, sd)).collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&SystemModel> = models.iter().collect();
    consistency_intersection(&refs, stimuli, bounds)
}

/// Renaming of `class`'s control states for comparing a refined model
/// against its original.
pub fn renaming(class: &crate::ids::ClassName, map: BTreeMap<String, String>) -> Projection {
    Projection::Renamed(BTreeMap::from([(class.clone(), map)]))
}
