//! Energy storage dynamics: buffers and capacitors with conversion losses,
//! leakage, capacity clamps, and conservation ledgers.
//!
//! The central bookkeeping identity, enforced for every storage element over
//! a whole run, is
//!
//! ```text
//! stored_final - stored_initial
//!     = eta_in * harvested_total - delivered_total / eta_out
//!       - leaked_total - spilled_total
//! ```
//!
//! where `harvested_total` is source-side energy offered to the store and
//! `delivered_total` is load-side energy actually received by consumers.

mod circuit;
mod modes;

pub use circuit::{
    integrate_circuit, rc_transition, IntegrateReport, LoadModel, LoadPower, SourceModel, VoSample,
    WeightedLoad,
};
pub use modes::{hhc_step, shc_step, HarvestUseMode, HhcSpec, ShcPhase};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from energy-state operations. Contract violations, not outcomes:
/// an underflow during a step is reported in [`StepReport`], not here.
#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("negative input: {0}")]
    NegativeInput(&'static str),
    #[error("non-positive time step")]
    NonPositiveDt,
    #[error("operation requires a capacitor storage kind")]
    NotACapacitor,
    #[error("invalid storage spec: {0}")]
    InvalidSpec(String),
}

/// Physical realization of the storage element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageKind {
    /// Abstract energy buffer; state is energy only.
    IdealBuffer,
    /// Ideal capacitor; state carries a voltage consistent with E = C*V^2/2.
    Capacitor {
        capacitance_f: f64,
        v_cutoff_v: f64,
        v_max_v: f64,
    },
}

/// Self-discharge model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Leakage {
    None,
    /// Fraction of stored energy lost per hour, applied as a continuous
    /// exponential decay so results do not depend on the step size.
    FractionPerHour(f64),
    /// Constant leakage power, capped by the stored energy.
    ConstantPowerW(f64),
}

impl Leakage {
    /// Energy leaked from `stored` over `dt_s` seconds. Never exceeds `stored`.
    pub fn amount_j(&self, stored: f64, dt_s: f64) -> f64 {
        match *self {
            Leakage::None => 0.0,
            Leakage::FractionPerHour(f) => {
                if f <= 0.0 || stored <= 0.0 {
                    return 0.0;
                }
                let rate_per_s = -(1.0 - f).ln() / 3600.0;
                stored * (1.0 - (-rate_per_s * dt_s).exp())
            }
            Leakage::ConstantPowerW(p) => (p * dt_s).min(stored),
        }
    }
}

/// Named storage technology presets with input/output efficiencies and
/// leakage defaults taken at the midpoints of their published ranges
/// (one-sided "<= x%/hour" rows use the stated bound).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoragePreset {
    Capacitor,
    Supercapacitor,
    LiIon,
    SolidState,
    HybridCapacitor,
}

impl StoragePreset {
    /// (eta_in, eta_out, leakage fraction per hour)
    pub fn defaults(self) -> (f64, f64, f64) {
        match self {
            StoragePreset::Capacitor => (1.0, 1.0, 0.0275),
            StoragePreset::Supercapacitor => (0.90, 0.90, 0.0275),
            StoragePreset::LiIon => (0.85, 0.90, 0.00005),
            StoragePreset::SolidState => (0.825, 0.85, 0.00001),
            StoragePreset::HybridCapacitor => (0.90, 0.90, 0.00105),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StoragePreset::Capacitor => "capacitor",
            StoragePreset::Supercapacitor => "supercapacitor",
            StoragePreset::LiIon => "li-ion",
            StoragePreset::SolidState => "solid-state",
            StoragePreset::HybridCapacitor => "hybrid-capacitor",
        }
    }
}

/// Storage element parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageSpec {
    pub kind: StorageKind,
    /// Capacity E_M. For capacitor kinds this equals C*V_max^2/2 exactly.
    pub capacity: f64,
    /// Fraction of harvested energy successfully stored.
    pub eta_in: f64,
    /// Fraction of stored energy effectively delivered to the load.
    pub eta_out: f64,
    pub leak: Leakage,
}

impl StorageSpec {
    /// Lossless abstract buffer of the given capacity.
    pub fn ideal(capacity: f64) -> Self {
        StorageSpec {
            kind: StorageKind::IdealBuffer,
            capacity,
            eta_in: 1.0,
            eta_out: 1.0,
            leak: Leakage::None,
        }
    }

    pub fn with_efficiencies(mut self, eta_in: f64, eta_out: f64) -> Self {
        self.eta_in = eta_in;
        self.eta_out = eta_out;
        self
    }

    pub fn with_leak(mut self, leak: Leakage) -> Self {
        self.leak = leak;
        self
    }

    /// Capacitor storage; capacity derives from C and V_max so the
    /// E_M = C*V_max^2/2 invariant holds by construction.
    pub fn capacitor(capacitance_f: f64, v_max_v: f64, v_cutoff_v: f64) -> Self {
        StorageSpec {
            kind: StorageKind::Capacitor { capacitance_f, v_cutoff_v, v_max_v },
            capacity: capacitor_energy(capacitance_f, v_max_v),
            eta_in: 1.0,
            eta_out: 1.0,
            leak: Leakage::None,
        }
    }

    /// Storage from a named technology preset.
    pub fn preset(preset: StoragePreset, capacity: f64) -> Self {
        let (eta_in, eta_out, leak_per_hour) = preset.defaults();
        StorageSpec {
            kind: StorageKind::IdealBuffer,
            capacity,
            eta_in,
            eta_out,
            leak: Leakage::FractionPerHour(leak_per_hour),
        }
    }

    pub fn capacitance_f(&self) -> Option<f64> {
        match self.kind {
            StorageKind::Capacitor { capacitance_f, .. } => Some(capacitance_f),
            StorageKind::IdealBuffer => None,
        }
    }

    /// All violated constraints, with field names, or empty if valid.
    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.capacity > 0.0) {
            v.push(format!("{prefix}.capacity: must be > 0"));
        }
        if !(self.eta_in > 0.0 && self.eta_in <= 1.0) {
            v.push(format!("{prefix}.eta_in: must be in (0, 1]"));
        }
        if !(self.eta_out > 0.0 && self.eta_out <= 1.0) {
            v.push(format!("{prefix}.eta_out: must be in (0, 1]"));
        }
        match self.leak {
            Leakage::FractionPerHour(f) if !(0.0..1.0).contains(&f) => {
                v.push(format!("{prefix}.leak: fraction per hour must be in [0, 1)"));
            }
            Leakage::ConstantPowerW(p) if p < 0.0 => {
                v.push(format!("{prefix}.leak: constant power must be >= 0"));
            }
            _ => {}
        }
        if let StorageKind::Capacitor { capacitance_f, v_cutoff_v, v_max_v } = self.kind {
            if !(capacitance_f > 0.0) {
                v.push(format!("{prefix}.kind.capacitance_f: must be > 0"));
            }
            if !(v_cutoff_v < v_max_v) {
                v.push(format!("{prefix}.kind: v_cutoff_v must be < v_max_v"));
            }
            let expect = capacitor_energy(capacitance_f, v_max_v);
            if capacitance_f > 0.0 && (self.capacity - expect).abs() > 1e-12 * expect.max(1.0) {
                v.push(format!("{prefix}.capacity: must equal C*V_max^2/2 = {expect}"));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<(), EnergyError> {
        let v = self.violations("storage");
        if v.is_empty() {
            Ok(())
        } else {
            Err(EnergyError::InvalidSpec(v.join("; ")))
        }
    }
}

/// Cumulative energy accounting over a run. All fields are non-negative
/// and monotone non-decreasing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    /// Source-side energy offered to the store (before eta_in).
    pub harvested: f64,
    /// Load-side energy actually received by consumers (after eta_out).
    pub delivered: f64,
    pub leaked: f64,
    pub spilled: f64,
    /// Energy spent acquiring energy information.
    pub acquisition_overhead: f64,
}

impl Ledger {
    pub fn add(&mut self, other: &Ledger) {
        self.harvested += other.harvested;
        self.delivered += other.delivered;
        self.leaked += other.leaked;
        self.spilled += other.spilled;
        self.acquisition_overhead += other.acquisition_overhead;
    }

    /// Residual of the conservation identity given initial/final stored energy.
    pub fn conservation_residual(
        &self,
        spec: &StorageSpec,
        stored_initial: f64,
        stored_final: f64,
    ) -> f64 {
        let rhs = spec.eta_in * self.harvested - self.delivered / spec.eta_out
            - self.leaked
            - self.spilled;
        (stored_final - stored_initial) - rhs
    }
}

/// Mutable energy state of one storage element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyState {
    pub stored: f64,
    /// Present for capacitor kinds; kept consistent with E = C*V^2/2.
    pub voltage_v: Option<f64>,
    pub ledger: Ledger,
}

impl EnergyState {
    pub fn empty(spec: &StorageSpec) -> Self {
        Self::with_energy(spec, 0.0)
    }

    pub fn with_energy(spec: &StorageSpec, stored: f64) -> Self {
        let stored = stored.clamp(0.0, spec.capacity);
        EnergyState {
            stored,
            voltage_v: spec.capacitance_f().map(|c| voltage_for_energy(c, stored)),
            ledger: Ledger::default(),
        }
    }

    pub fn with_voltage(spec: &StorageSpec, v: f64) -> Result<Self, EnergyError> {
        let c = spec.capacitance_f().ok_or(EnergyError::NotACapacitor)?;
        Ok(Self::with_energy(spec, capacitor_energy(c, v)))
    }

    pub(crate) fn sync_voltage(&mut self, spec: &StorageSpec) {
        if let Some(c) = spec.capacitance_f() {
            self.voltage_v = Some(voltage_for_energy(c, self.stored));
        }
    }
}

/// Outcome of one [`step_energy`] call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Load-side energy delivered this step (equals the request, or 0 on
    /// underflow, since consumption is atomic).
    pub delivered: f64,
    /// Store-side shortfall when the request could not be covered.
    pub shortfall: Option<f64>,
    pub leaked: f64,
    pub spilled: f64,
}

impl StepReport {
    pub fn underflowed(&self) -> bool {
        self.shortfall.is_some()
    }
}

/// One interval of the energy-state evolution:
///
/// ```text
/// E' = clamp(E + eta_in*E_H - E_L/eta_out - leak(E, dt), 0, E_M)
/// ```
///
/// Harvest and leakage always apply. The load draw is atomic: if
/// `E + eta_in*E_H - leak < E_L/eta_out` the draw does not happen at all and
/// the report carries the store-side shortfall; the caller decides what a
/// failed draw means (task failure, partial waste, ...). Excess above E_M
/// goes to the spill ledger.
pub fn step_energy(
    state: &mut EnergyState,
    spec: &StorageSpec,
    e_h: f64,
    e_l: f64,
    dt_s: f64,
) -> Result<StepReport, EnergyError> {
    if e_h < 0.0 {
        return Err(EnergyError::NegativeInput("e_h"));
    }
    if e_l < 0.0 {
        return Err(EnergyError::NegativeInput("e_l"));
    }
    if !(dt_s > 0.0) {
        return Err(EnergyError::NonPositiveDt);
    }

    let leak = spec.leak.amount_j(state.stored, dt_s);
    let available = state.stored + spec.eta_in * e_h - leak;
    let needed = e_l / spec.eta_out;

    let (mut new_stored, delivered, shortfall) = if needed > available {
        (available, 0.0, Some(needed - available))
    } else {
        (available - needed, e_l, None)
    };

    let spilled = if new_stored > spec.capacity {
        let excess = new_stored - spec.capacity;
        new_stored = spec.capacity;
        excess
    } else {
        0.0
    };
    if new_stored < 0.0 {
        new_stored = 0.0;
    }

    state.stored = new_stored;
    state.ledger.harvested += e_h;
    state.ledger.delivered += delivered;
    state.ledger.leaked += leak;
    state.ledger.spilled += spilled;
    state.sync_voltage(spec);

    Ok(StepReport { delivered, shortfall, leaked: leak, spilled })
}

/// Zero-duration atomic draw inside a slot whose leakage was already
/// accounted by an enclosing [`step_energy`]. Same atomicity contract:
/// either the full load-side amount is delivered or nothing is.
pub fn draw_energy(
    state: &mut EnergyState,
    spec: &StorageSpec,
    e_l: f64,
) -> Result<StepReport, EnergyError> {
    if e_l < 0.0 {
        return Err(EnergyError::NegativeInput("e_l"));
    }
    let needed = e_l / spec.eta_out;
    let report = if needed > state.stored {
        StepReport { delivered: 0.0, shortfall: Some(needed - state.stored), leaked: 0.0, spilled: 0.0 }
    } else {
        state.stored -= needed;
        state.ledger.delivered += e_l;
        StepReport { delivered: e_l, shortfall: None, leaked: 0.0, spilled: 0.0 }
    };
    state.sync_voltage(spec);
    Ok(report)
}

/// Drains the whole store through the delivery path (a failed attempt that
/// wastes whatever energy was available). Returns the load-side energy the
/// waste amounted to.
pub fn drain_all(state: &mut EnergyState, spec: &StorageSpec) -> f64 {
    let wasted_load_side = state.stored * spec.eta_out;
    state.ledger.delivered += wasted_load_side;
    state.stored = 0.0;
    state.sync_voltage(spec);
    wasted_load_side
}

/// Stored energy of a capacitor: E = C*V^2/2.
pub fn capacitor_energy(c_f: f64, v: f64) -> f64 {
    0.5 * c_f * v * v
}

/// Voltage holding the given energy on a capacitor.
pub fn voltage_for_energy(c_f: f64, e_j: f64) -> f64 {
    (2.0 * e_j.max(0.0) / c_f).sqrt()
}

/// Usable capacitor energy above the cut-off voltage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UsableEnergy {
    pub energy_j: f64,
    /// Set when V < V_0, i.e. the device is below cut-off and nothing is usable.
    pub below_cutoff: bool,
}

/// E' = C*(V^2 - V_0^2)/2, clamped at zero below the cut-off voltage.
pub fn capacitor_usable_energy(c_f: f64, v: f64, v_cutoff: f64) -> UsableEnergy {
    if v < v_cutoff {
        UsableEnergy { energy_j: 0.0, below_cutoff: true }
    } else {
        UsableEnergy {
            energy_j: 0.5 * c_f * (v * v - v_cutoff * v_cutoff),
            below_cutoff: false,
        }
    }
}
