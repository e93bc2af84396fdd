//! Prototype → target derivation: strip operator instances the
//! routing never schedules, so the emitted machine carries exactly the
//! hardware the program exercises.
//!
//! Derivation only removes inventory; scheduled operations, routing,
//! memory images and link slack are untouched, so the target machine
//! is observationally identical to the prototype on every input.

use super::config::{Mode, ProcessorConfig};
use super::validate::{validate, ConfigError};

/// What [`derive_target`] removed, by instance name and kind.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PruneReport {
    /// `(instance name, operator kind)` of every pruned instance.
    pub removed: Vec<(String, String)>,
    /// Instances kept because at least one operation runs on them.
    pub kept: usize,
}

impl PruneReport {
    /// Pruned instance count of a given kind token (`"add"`, `"rsel"`, …).
    pub fn removed_of_kind(&self, kind: &str) -> usize {
        self.removed.iter().filter(|(_, k)| k == kind).count()
    }
}

/// Derive a target-mode configuration from a prototype by deleting
/// unused operator instances. Idempotent: deriving a target again
/// removes nothing.
pub fn derive_target(
    config: &ProcessorConfig,
) -> Result<(ProcessorConfig, PruneReport), ConfigError> {
    // Validate in prototype mode: unused inventory is legal there and
    // is exactly what we are about to remove.
    let mut proto = config.clone();
    proto.mode = Mode::Prototype;
    let (machine, _) = validate(&proto)?;

    let mut out = config.clone();
    out.mode = Mode::Target;
    let mut report = PruneReport::default();
    out.operators.retain(|decl| {
        if machine.unused_instances.contains(&decl.name) {
            report
                .removed
                .push((decl.name.clone(), decl.func.kind_token().to_string()));
            false
        } else {
            true
        }
    });
    report.kept = out.operators.len();

    // The pruned configuration must stand on its own in target mode.
    validate(&out)?;
    Ok((out, report))
}
