//! Harvest-use interaction modes: sequential, concurrent, and hybrid
//! two-buffer operation.

use serde::{Deserialize, Serialize};

use super::{step_energy, EnergyError, EnergyState, StepReport, StorageSpec};

/// Two-buffer hybrid storage: a small buffer feeds immediate loads, its
/// overflow charges a larger buffer that serves deferred loads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HhcSpec {
    pub small: StorageSpec,
    pub large: StorageSpec,
}

impl HhcSpec {
    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut v = self.small.violations(&format!("{prefix}.small"));
        v.extend(self.large.violations(&format!("{prefix}.large")));
        if !(self.small.capacity < self.large.capacity) {
            v.push(format!("{prefix}: small capacity must be < large capacity"));
        }
        v
    }
}

/// Temporal relationship between harvesting and consumption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarvestUseMode {
    /// Sequential harvest-then-consume: the load is disconnected while
    /// harvesting and the harvester while consuming.
    Shc,
    /// Concurrent harvest-and-consume.
    Chc,
    /// Hybrid two-buffer operation.
    Hhc(HhcSpec),
}

/// Phase of a sequential harvest-then-consume cycle. When exactly the
/// switchover happens is a policy decision, not fixed here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShcPhase {
    Harvest,
    Consume,
}

/// One step of sequential operation: the inactive side's flow is ignored
/// entirely (disconnected), so `delivered` stays constant during harvest
/// phases and `harvested` during consume phases.
pub fn shc_step(
    state: &mut EnergyState,
    spec: &StorageSpec,
    phase: ShcPhase,
    e_h: f64,
    e_l: f64,
    dt_s: f64,
) -> Result<StepReport, EnergyError> {
    match phase {
        ShcPhase::Harvest => step_energy(state, spec, e_h, 0.0, dt_s),
        ShcPhase::Consume => step_energy(state, spec, 0.0, e_l, dt_s),
    }
}

/// One step of hybrid two-buffer operation.
///
/// Inflow charges the small buffer first; whatever exceeds its capacity
/// routes into the large buffer through the large buffer's input efficiency.
/// Immediate loads draw from the small buffer, deferred loads from the
/// large one. Each buffer keeps its own ledger and step semantics.
pub fn hhc_step(
    small: &mut EnergyState,
    large: &mut EnergyState,
    spec: &HhcSpec,
    e_h: f64,
    e_l_immediate: f64,
    e_l_deferred: f64,
    dt_s: f64,
) -> Result<(StepReport, StepReport), EnergyError> {
    let small_report = step_energy(small, &spec.small, e_h, e_l_immediate, dt_s)?;
    // The small buffer's spill is the excess routed onward.
    let e_ex = small_report.spilled;
    let large_report = step_energy(large, &spec.large, e_ex, e_l_deferred, dt_s)?;
    Ok((small_report, large_report))
}
