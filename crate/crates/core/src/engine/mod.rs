//! Deterministic slotted-time multi-device simulation loop with arrival
//! processes, a shared erasure/collision channel, and metric collection.
//!
//! Within a slot the order of operations is fixed: arrivals, observe, act,
//! resolve (task/channel), settle, metrics. Energy and task arrivals land
//! before the policy observes, so a measurement in slot `s` sees the energy
//! that arrived in slot `s`.

mod sweep;

pub use sweep::{sweep, SweepAxis, SweepRow};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{
    draw_energy, drain_all, integrate_circuit, step_energy, EnergyState,
    LoadModel, SourceModel, StorageKind, StorageSpec,
};
use crate::policy::{
    AoiFullyAware, AoiThreshold, DualThresholdGate, EnergyBlind, Monotonicity, Observation,
    PeriodicMeasure, PolicyDecision, ProbFunction, TinymlModel, TinymlSelect,
};
use crate::rng::{rng_stream, Rng};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    InvalidConfig(Vec<String>),
    #[error("sweep axis error: {0}")]
    Axis(String),
    #[error("runtime failure: {0}")]
    Runtime(String),
}

// ============================================================================
// Scenario configuration
// ============================================================================

/// Numeric regime of a scenario: slotted integer-like energy units, or
/// physical SI quantities with capacitor voltage integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Abstract,
    Physical,
}

/// Energy arrival process for the abstract regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalProcess {
    Poisson { mean: f64 },
    Bernoulli { p: f64 },
    Deterministic { amount: f64 },
}

impl ArrivalProcess {
    fn draw(&self, rng: &mut Rng) -> f64 {
        match *self {
            ArrivalProcess::Poisson { mean } => rng.poisson(mean) as f64,
            ArrivalProcess::Bernoulli { p } => {
                if rng.bernoulli(p) {
                    1.0
                } else {
                    0.0
                }
            }
            ArrivalProcess::Deterministic { amount } => amount,
        }
    }
}

/// What happens to a buffered item whose execution attempt fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureMode {
    /// The item stays buffered for another attempt (computation tasks).
    Retain,
    /// The item is lost (transmissions fail while in progress).
    Discard,
}

/// Work arriving at each device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadConfig {
    /// Computation tasks arriving Bernoulli(p) into a finite buffer;
    /// arrivals to a full buffer are dropped.
    Tasks { arrival_p: f64, cost: f64, buffer_capacity: u32, on_failure: FailureMode },
    /// Status-update packets arriving Bernoulli(p) into a 1-slot buffer;
    /// a new packet replaces (drops) the buffered one.
    Packets { event_p: f64 },
    /// Periodic radio transactions while the device is powered on
    /// (physical gate scenarios).
    TimedTransactions {
        interval_s: f64,
        energy_j: f64,
        rejoin_energy_j: f64,
        rejoin_s: f64,
        idle_power_w: f64,
    },
    /// One inference opportunity per slot (model-selection scenarios).
    Inference,
}

/// Policy selection plus parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyConfig {
    EnergyBlind { period_slots: u64, spend: f64 },
    PeriodicMeasure { period_slots: u64, measure_cost: f64 },
    AoiFullyAware { transmit_prob: ProbFunction, sample_cost: f64 },
    AoiThreshold { threshold: f64, monitor_cost_per_slot: f64 },
    TinymlSelect { models: Vec<TinymlModel>, v_min_v: f64, sample_cost_j: f64 },
    DualThresholdGate { v_on_v: f64, v_off_v: f64 },
}

/// Shared-channel model for packet scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Erasure probability as a (decreasing) function of the energy spent.
    pub erasure: ProbFunction,
}

/// Per-device template; all devices in a scenario are identical apart from
/// their random streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    pub storage: StorageSpec,
    pub initial_energy: f64,
    /// Abstract-regime energy arrivals.
    #[serde(default)]
    pub energy_arrival: Option<ArrivalProcess>,
    /// Physical-regime harvest source.
    #[serde(default)]
    pub source: Option<SourceModel>,
    /// Always-on background load (physical regime).
    #[serde(default)]
    pub idle_load: Option<LoadModel>,
    /// Integration granularity per slot (physical regime).
    #[serde(default = "default_substeps")]
    pub substeps_per_slot: u32,
    pub workload: WorkloadConfig,
    pub policy: PolicyConfig,
}

fn default_substeps() -> u32 {
    100
}

/// Full experiment description. A run is a pure function of this value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub regime: Regime,
    pub n_devices: u32,
    pub slots: u64,
    /// Slot duration in seconds (throughput and leakage use it).
    pub slot_s: f64,
    pub seed: u64,
    pub device: DeviceConfig,
    #[serde(default)]
    pub channel: Option<ChannelConfig>,
}

impl ScenarioConfig {
    /// Every violated constraint, with its config path.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.n_devices < 1 {
            v.push("n_devices: must be >= 1".into());
        }
        if self.slots < 1 {
            v.push("slots: must be >= 1".into());
        }
        if !(self.slot_s > 0.0) {
            v.push("slot_s: must be > 0".into());
        }
        v.extend(self.device.storage.violations("device.storage"));
        if self.initial_energy_invalid() {
            v.push("device.initial_energy: must be within [0, capacity]".into());
        }
        match self.regime {
            Regime::Abstract => {
                if self.device.energy_arrival.is_none() {
                    v.push("device.energy_arrival: required in the abstract regime".into());
                }
                if self.device.source.is_some() {
                    v.push("device.source: only valid in the physical regime".into());
                }
                if !matches!(
                    self.device.workload,
                    WorkloadConfig::Tasks { .. } | WorkloadConfig::Packets { .. }
                ) {
                    v.push(
                        "device.workload: abstract regime supports tasks or packets".into(),
                    );
                }
            }
            Regime::Physical => {
                if self.device.source.is_none() {
                    v.push("device.source: required in the physical regime".into());
                }
                if self.device.energy_arrival.is_some() {
                    v.push("device.energy_arrival: only valid in the abstract regime".into());
                }
                if !matches!(self.device.storage.kind, StorageKind::Capacitor { .. }) {
                    v.push("device.storage.kind: physical regime requires a capacitor".into());
                }
                if self.device.substeps_per_slot < 1 {
                    v.push("device.substeps_per_slot: must be >= 1".into());
                }
                if !matches!(
                    self.device.workload,
                    WorkloadConfig::TimedTransactions { .. } | WorkloadConfig::Inference
                ) {
                    v.push(
                        "device.workload: physical regime supports timed_transactions or inference"
                            .into(),
                    );
                }
            }
        }
        if let Some(arrival) = &self.device.energy_arrival {
            match arrival {
                ArrivalProcess::Poisson { mean } if *mean < 0.0 => {
                    v.push("device.energy_arrival.poisson.mean: must be >= 0".into())
                }
                ArrivalProcess::Bernoulli { p } if !(0.0..=1.0).contains(p) => {
                    v.push("device.energy_arrival.bernoulli.p: must be in [0, 1]".into())
                }
                ArrivalProcess::Deterministic { amount } if *amount < 0.0 => {
                    v.push("device.energy_arrival.deterministic.amount: must be >= 0".into())
                }
                _ => {}
            }
        }
        if let Some(src) = &self.device.source {
            v.extend(src.violations("device.source"));
        }
        if let Some(load) = &self.device.idle_load {
            v.extend(load.violations("device.idle_load"));
        }
        match &self.device.workload {
            WorkloadConfig::Tasks { arrival_p, cost, buffer_capacity, .. } => {
                if !(0.0..=1.0).contains(arrival_p) {
                    v.push("device.workload.tasks.arrival_p: must be in [0, 1]".into());
                }
                if !(*cost >= 0.0) {
                    v.push("device.workload.tasks.cost: must be >= 0".into());
                }
                if *buffer_capacity < 1 {
                    v.push("device.workload.tasks.buffer_capacity: must be >= 1".into());
                }
            }
            WorkloadConfig::Packets { event_p } => {
                if !(0.0..=1.0).contains(event_p) {
                    v.push("device.workload.packets.event_p: must be in [0, 1]".into());
                }
                if self.channel.is_none() {
                    v.push("channel: required for the packets workload".into());
                }
            }
            WorkloadConfig::TimedTransactions { interval_s, energy_j, rejoin_s, .. } => {
                if !(*interval_s > 0.0) {
                    v.push("device.workload.timed_transactions.interval_s: must be > 0".into());
                }
                if *energy_j < 0.0 {
                    v.push("device.workload.timed_transactions.energy_j: must be >= 0".into());
                }
                if *rejoin_s < 0.0 {
                    v.push("device.workload.timed_transactions.rejoin_s: must be >= 0".into());
                }
            }
            WorkloadConfig::Inference => {}
        }
        if let Some(channel) = &self.channel {
            v.extend(channel.erasure.violations("channel.erasure", Monotonicity::NonIncreasing));
        }
        match &self.device.policy {
            PolicyConfig::EnergyBlind { period_slots, spend } => {
                if *period_slots < 1 {
                    v.push("device.policy.energy_blind.period_slots: must be >= 1".into());
                }
                if !(*spend > 0.0) {
                    v.push("device.policy.energy_blind.spend: must be > 0".into());
                }
            }
            PolicyConfig::PeriodicMeasure { period_slots, measure_cost } => {
                if *period_slots < 1 {
                    v.push("device.policy.periodic_measure.period_slots: must be >= 1".into());
                }
                if *measure_cost < 0.0 {
                    v.push("device.policy.periodic_measure.measure_cost: must be >= 0".into());
                }
                if !matches!(self.device.workload, WorkloadConfig::Tasks { .. }) {
                    v.push("device.policy: periodic_measure requires the tasks workload".into());
                }
            }
            PolicyConfig::AoiFullyAware { transmit_prob, sample_cost } => {
                v.extend(transmit_prob.violations(
                    "device.policy.aoi_fully_aware.transmit_prob",
                    Monotonicity::NonDecreasing,
                ));
                if *sample_cost < 0.0 {
                    v.push("device.policy.aoi_fully_aware.sample_cost: must be >= 0".into());
                }
                if !matches!(self.device.workload, WorkloadConfig::Packets { .. }) {
                    v.push("device.policy: aoi_fully_aware requires the packets workload".into());
                }
            }
            PolicyConfig::AoiThreshold { threshold, monitor_cost_per_slot } => {
                if !(*threshold >= 1.0 && *threshold <= self.device.storage.capacity) {
                    v.push("device.policy.aoi_threshold.threshold: must be in [1, capacity]".into());
                }
                if *monitor_cost_per_slot < 0.0 {
                    v.push("device.policy.aoi_threshold.monitor_cost_per_slot: must be >= 0".into());
                }
                if !matches!(self.device.workload, WorkloadConfig::Packets { .. }) {
                    v.push("device.policy: aoi_threshold requires the packets workload".into());
                }
            }
            PolicyConfig::TinymlSelect { models, v_min_v, sample_cost_j } => {
                if models.is_empty() {
                    v.push("device.policy.tinyml_select.models: must be non-empty".into());
                }
                if models.iter().any(|m| !(m.exec_s > 0.0) || !(m.r_load_ohm > 0.0)) {
                    v.push(
                        "device.policy.tinyml_select.models: exec_s and r_load_ohm must be > 0"
                            .into(),
                    );
                }
                if !(*v_min_v >= 0.0) {
                    v.push("device.policy.tinyml_select.v_min_v: must be >= 0".into());
                }
                if *sample_cost_j < 0.0 {
                    v.push("device.policy.tinyml_select.sample_cost_j: must be >= 0".into());
                }
                if self.regime != Regime::Physical {
                    v.push("device.policy: tinyml_select requires the physical regime".into());
                }
                if !matches!(self.device.workload, WorkloadConfig::Inference) {
                    v.push("device.policy: tinyml_select requires the inference workload".into());
                }
                if let WorkloadConfig::Inference = self.device.workload {
                    if let Some(max_exec) =
                        models.iter().map(|m| m.exec_s).max_by(|a, b| a.partial_cmp(b).unwrap())
                    {
                        if max_exec > self.slot_s {
                            v.push("device.policy.tinyml_select.models: exec_s must fit in slot_s".into());
                        }
                    }
                }
            }
            PolicyConfig::DualThresholdGate { v_on_v, v_off_v } => {
                if !(v_off_v < v_on_v) {
                    v.push("device.policy.dual_threshold_gate: v_off_v must be < v_on_v".into());
                }
                if let StorageKind::Capacitor { v_max_v, .. } = self.device.storage.kind {
                    if *v_on_v > v_max_v {
                        v.push("device.policy.dual_threshold_gate.v_on_v: exceeds v_max_v".into());
                    }
                }
                if self.regime != Regime::Physical {
                    v.push("device.policy: dual_threshold_gate requires the physical regime".into());
                }
                if !matches!(self.device.workload, WorkloadConfig::TimedTransactions { .. }) {
                    v.push(
                        "device.policy: dual_threshold_gate requires the timed_transactions workload"
                            .into(),
                    );
                }
            }
        }
        v
    }

    fn initial_energy_invalid(&self) -> bool {
        !(0.0..=self.device.storage.capacity).contains(&self.device.initial_energy)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(EngineError::InvalidConfig(v))
        }
    }
}

// ============================================================================
// Metrics
// ============================================================================

/// Per-device end-of-run accounting, for conservation checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSummary {
    pub stored_initial: f64,
    pub stored_final: f64,
    pub ledger: crate::energy::Ledger,
}

/// Run results. Field order is the frozen serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub slots: u64,
    pub n_devices: u32,
    pub duration_s: f64,
    pub task_completion_rate: f64,
    pub avg_aoi_slots: f64,
    pub net_harvested_power_w: f64,
    pub throughput_pph: f64,
    pub restart_count: u64,
    pub arrivals: u64,
    pub completed: u64,
    pub failed_discarded: u64,
    pub dropped_buffer_full: u64,
    pub still_buffered: u64,
    pub attempts_failed: u64,
    pub successes: u64,
    pub collisions: u64,
    pub erasures: u64,
    pub defers: u64,
    /// Selections per model index (model-selection scenarios).
    pub model_selections: Vec<u64>,
    pub ledger: crate::energy::Ledger,
    pub devices: Vec<DeviceSummary>,
}

/// Age-of-information recursion: a successful reception at the end of the
/// slot resets the age to `now - generated_at + 1` (a packet received in
/// its generation slot has age 1); otherwise the age grows by one.
pub fn aoi_update(aoi: u64, generated_at: u64, received: bool, now: u64) -> u64 {
    if received {
        now - generated_at + 1
    } else {
        aoi + 1
    }
}

/// Optional per-slot trace consumer.
pub trait TraceSink {
    fn record(&mut self, row: &TraceRow);
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub slot: u64,
    pub device: u32,
    pub stored: f64,
    pub voltage_v: Option<f64>,
    pub action: &'static str,
    pub buffered: u32,
    pub aoi: u64,
    pub device_on: bool,
}

// ============================================================================
// Runtime state
// ============================================================================

enum PolicyState {
    EnergyBlind(EnergyBlind),
    PeriodicMeasure(PeriodicMeasure),
    AoiFullyAware(AoiFullyAware),
    AoiThreshold(AoiThreshold),
    TinymlSelect(TinymlSelect),
    DualThresholdGate(DualThresholdGate),
}

struct DeviceState {
    energy: EnergyState,
    stored_initial: f64,
    policy: PolicyState,
    // Workload state.
    task_buffer: u32,
    packet_generated_at: Option<u64>,
    aoi: u64,
    // Gate state.
    rejoin_until_s: f64,
    next_tx_s: f64,
    was_on: bool,
    // Streams.
    rng_energy: Rng,
    rng_work: Rng,
    rng_policy: Rng,
    rng_channel: Rng,
}

struct Totals {
    arrivals: u64,
    completed: u64,
    failed_discarded: u64,
    dropped_buffer_full: u64,
    attempts_failed: u64,
    successes: u64,
    collisions: u64,
    erasures: u64,
    defers: u64,
    restarts: u64,
    aoi_sum: u128,
    model_selections: Vec<u64>,
}

/// Runs a scenario to completion. Identical config (including seed) yields
/// bit-identical metrics.
pub fn run(config: &ScenarioConfig) -> Result<Metrics, EngineError> {
    run_with_sink(config, None)
}

/// [`run`] with an optional per-slot trace consumer.
pub fn run_with_sink(
    config: &ScenarioConfig,
    mut sink: Option<&mut dyn TraceSink>,
) -> Result<Metrics, EngineError> {
    config.validate()?;

    let spec = &config.device.storage;
    let n = config.n_devices as usize;
    let model_count = match &config.device.policy {
        PolicyConfig::TinymlSelect { models, .. } => models.len(),
        _ => 0,
    };

    let mut devices: Vec<DeviceState> = (0..n)
        .map(|d| {
            let d64 = d as u64;
            DeviceState {
                energy: EnergyState::with_energy(spec, config.device.initial_energy),
                stored_initial: config.device.initial_energy,
                policy: build_policy(&config.device.policy),
                task_buffer: 0,
                packet_generated_at: None,
                aoi: 0,
                rejoin_until_s: f64::NEG_INFINITY,
                next_tx_s: 0.0,
                was_on: false,
                rng_energy: rng_stream(config.seed, d64, "energy"),
                rng_work: rng_stream(config.seed, d64, "work"),
                rng_policy: rng_stream(config.seed, d64, "policy"),
                rng_channel: rng_stream(config.seed, d64, "channel"),
            }
        })
        .collect();

    let mut totals = Totals {
        arrivals: 0,
        completed: 0,
        failed_discarded: 0,
        dropped_buffer_full: 0,
        attempts_failed: 0,
        successes: 0,
        collisions: 0,
        erasures: 0,
        defers: 0,
        restarts: 0,
        aoi_sum: 0,
        model_selections: vec![0; model_count],
    };

    // (device, energy spent, generation slot) of in-flight transmissions.
    let mut contenders: Vec<(usize, f64, u64)> = Vec::with_capacity(n);
    // Generation slot of the packet each device got delivered this slot.
    let mut received: Vec<Option<u64>> = vec![None; n];

    for slot in 1..=config.slots {
        let t_start = (slot - 1) as f64 * config.slot_s;
        contenders.clear();
        received.iter_mut().for_each(|r| *r = None);

        for (idx, dev) in devices.iter_mut().enumerate() {
            // --- arrivals ---------------------------------------------------
            if let Some(arrival) = &config.device.energy_arrival {
                let e_h = arrival.draw(&mut dev.rng_energy);
                step_energy(&mut dev.energy, spec, e_h, 0.0, config.slot_s)
                    .map_err(|e| EngineError::Runtime(e.to_string()))?;
            }
            match &config.device.workload {
                WorkloadConfig::Tasks { arrival_p, buffer_capacity, .. } => {
                    if dev.rng_work.bernoulli(*arrival_p) {
                        totals.arrivals += 1;
                        if dev.task_buffer < *buffer_capacity {
                            dev.task_buffer += 1;
                        } else {
                            totals.dropped_buffer_full += 1;
                        }
                    }
                }
                WorkloadConfig::Packets { event_p } => {
                    if dev.rng_work.bernoulli(*event_p) {
                        totals.arrivals += 1;
                        if dev.packet_generated_at.is_some() {
                            // Old packet replaced by the fresh one.
                            totals.dropped_buffer_full += 1;
                        }
                        dev.packet_generated_at = Some(slot);
                    }
                }
                WorkloadConfig::TimedTransactions { .. } | WorkloadConfig::Inference => {}
            }

            // --- observe + act ----------------------------------------------
            let buffered = match &config.device.workload {
                WorkloadConfig::Tasks { .. } => dev.task_buffer,
                WorkloadConfig::Packets { .. } => u32::from(dev.packet_generated_at.is_some()),
                _ => 0,
            };
            let decision = decide(config, spec, dev, slot, buffered);

            // --- resolve ----------------------------------------------------
            let action = resolve(
                config,
                spec,
                dev,
                idx,
                t_start,
                decision,
                &mut totals,
                &mut contenders,
            )?;

            if let Some(sink) = sink.as_deref_mut() {
                sink.record(&TraceRow {
                    slot,
                    device: idx as u32,
                    stored: dev.energy.stored,
                    voltage_v: dev.energy.voltage_v,
                    action,
                    buffered,
                    aoi: dev.aoi,
                    device_on: device_is_on(dev),
                });
            }
        }

        // --- channel resolution (packets workload) --------------------------
        if let (WorkloadConfig::Packets { .. }, Some(channel)) =
            (&config.device.workload, &config.channel)
        {
            let sole = contenders.len() == 1;
            for &(idx, spent, gen) in &contenders {
                let erased = devices[idx].rng_channel.bernoulli(channel.erasure.eval(spent));
                if erased {
                    totals.erasures += 1;
                    totals.failed_discarded += 1;
                } else if sole {
                    totals.successes += 1;
                    totals.completed += 1;
                    received[idx] = Some(gen);
                } else {
                    totals.collisions += 1;
                    totals.failed_discarded += 1;
                }
            }
        }

        // --- settle + metrics -----------------------------------------------
        for (idx, dev) in devices.iter_mut().enumerate() {
            if matches!(config.device.workload, WorkloadConfig::Packets { .. }) {
                dev.aoi = match received[idx] {
                    Some(gen) => aoi_update(dev.aoi, gen, true, slot),
                    None => aoi_update(dev.aoi, 0, false, slot),
                };
                totals.aoi_sum += dev.aoi as u128;
            }
        }
    }

    // --- final accounting -----------------------------------------------------
    let mut ledger = crate::energy::Ledger::default();
    let mut device_summaries = Vec::with_capacity(n);
    let mut still_buffered = 0u64;
    for dev in &devices {
        ledger.add(&dev.energy.ledger);
        device_summaries.push(DeviceSummary {
            stored_initial: dev.stored_initial,
            stored_final: dev.energy.stored,
            ledger: dev.energy.ledger,
        });
        still_buffered += dev.task_buffer as u64 + u64::from(dev.packet_generated_at.is_some());
    }

    let duration_s = config.slots as f64 * config.slot_s;
    let completion_rate = if totals.arrivals > 0 {
        totals.completed as f64 / totals.arrivals as f64
    } else {
        0.0
    };
    let avg_aoi = if matches!(config.device.workload, WorkloadConfig::Packets { .. }) {
        totals.aoi_sum as f64 / (config.slots as f64 * n as f64)
    } else {
        0.0
    };
    let packets_delivered = match config.device.workload {
        WorkloadConfig::Packets { .. } => totals.successes,
        WorkloadConfig::TimedTransactions { .. } => totals.completed,
        _ => 0,
    };
    let net_power = (spec.eta_in * ledger.harvested
        - ledger.leaked
        - ledger.spilled
        - ledger.acquisition_overhead)
        / (duration_s * n as f64);

    Ok(Metrics {
        slots: config.slots,
        n_devices: config.n_devices,
        duration_s,
        task_completion_rate: completion_rate,
        avg_aoi_slots: avg_aoi,
        net_harvested_power_w: net_power,
        throughput_pph: packets_delivered as f64 * 3600.0 / duration_s,
        restart_count: totals.restarts,
        arrivals: totals.arrivals,
        completed: totals.completed,
        failed_discarded: totals.failed_discarded,
        dropped_buffer_full: totals.dropped_buffer_full,
        still_buffered,
        attempts_failed: totals.attempts_failed,
        successes: totals.successes,
        collisions: totals.collisions,
        erasures: totals.erasures,
        defers: totals.defers,
        model_selections: totals.model_selections,
        ledger,
        devices: device_summaries,
    })
}

fn build_policy(config: &PolicyConfig) -> PolicyState {
    match config {
        PolicyConfig::EnergyBlind { period_slots, spend } => {
            PolicyState::EnergyBlind(EnergyBlind { period_slots: *period_slots, spend: *spend })
        }
        PolicyConfig::PeriodicMeasure { period_slots, measure_cost } => {
            // Task cost is wired in by the resolver; the policy compares
            // against it through its decide() parameterization.
            PolicyState::PeriodicMeasure(
                PeriodicMeasure::new(*period_slots, *measure_cost, 0.0).expect("validated"),
            )
        }
        PolicyConfig::AoiFullyAware { transmit_prob, sample_cost } => {
            PolicyState::AoiFullyAware(AoiFullyAware {
                transmit_prob: transmit_prob.clone(),
                sample_cost: *sample_cost,
            })
        }
        PolicyConfig::AoiThreshold { threshold, .. } => {
            PolicyState::AoiThreshold(AoiThreshold { threshold: *threshold })
        }
        PolicyConfig::TinymlSelect { models, v_min_v, .. } => PolicyState::TinymlSelect(
            TinymlSelect::new(models.clone(), *v_min_v, 0.0).expect("validated"),
        ),
        PolicyConfig::DualThresholdGate { v_on_v, v_off_v } => PolicyState::DualThresholdGate(
            DualThresholdGate::new(*v_on_v, *v_off_v).expect("validated"),
        ),
    }
}

fn device_is_on(dev: &DeviceState) -> bool {
    match &dev.policy {
        PolicyState::DualThresholdGate(g) => g.is_on(),
        _ => true,
    }
}

/// Observation construction plus the policy decision, charging acquisition
/// costs as they occur.
fn decide(
    config: &ScenarioConfig,
    spec: &StorageSpec,
    dev: &mut DeviceState,
    slot: u64,
    buffered: u32,
) -> PolicyDecision {
    let mut obs = Observation {
        slot,
        buffer_occupancy: buffered,
        device_on: device_is_on(dev),
        ..Default::default()
    };
    match (&config.device.policy, &mut dev.policy) {
        (_, PolicyState::EnergyBlind(p)) => p.decide(&obs),
        (PolicyConfig::PeriodicMeasure { .. }, PolicyState::PeriodicMeasure(p)) => {
            let task_cost = match config.device.workload {
                WorkloadConfig::Tasks { cost, .. } => cost,
                _ => 0.0,
            };
            p.task_cost = task_cost;
            if p.is_measure_slot(slot) {
                // Pay the measurement cost, then read what is left.
                let report = draw_energy(&mut dev.energy, spec, p.measure_cost).expect("non-neg");
                let paid = if report.underflowed() {
                    drain_all(&mut dev.energy, spec)
                } else {
                    p.measure_cost
                };
                dev.energy.ledger.acquisition_overhead += paid;
                p.record_measurement(dev.energy.stored);
                obs.exact_energy = Some(dev.energy.stored);
            }
            p.decide(&obs)
        }
        (PolicyConfig::AoiFullyAware { .. }, PolicyState::AoiFullyAware(p)) => {
            if buffered > 0 {
                // Reading the storage level costs energy each time.
                let report = draw_energy(&mut dev.energy, spec, p.sample_cost).expect("non-neg");
                let paid = if report.underflowed() {
                    drain_all(&mut dev.energy, spec)
                } else {
                    p.sample_cost
                };
                dev.energy.ledger.acquisition_overhead += paid;
                obs.exact_energy = Some(dev.energy.stored);
            }
            p.decide(&obs, &mut dev.rng_policy)
        }
        (PolicyConfig::AoiThreshold { monitor_cost_per_slot, .. }, PolicyState::AoiThreshold(p)) => {
            if *monitor_cost_per_slot > 0.0 {
                let report =
                    draw_energy(&mut dev.energy, spec, *monitor_cost_per_slot).expect("non-neg");
                let paid =
                    if report.underflowed() { drain_all(&mut dev.energy, spec) } else { *monitor_cost_per_slot };
                dev.energy.ledger.acquisition_overhead += paid;
            }
            obs.flags = Some(vec![dev.energy.stored >= p.threshold]);
            p.decide(&obs)
        }
        (PolicyConfig::TinymlSelect { sample_cost_j, .. }, PolicyState::TinymlSelect(p)) => {
            if *sample_cost_j > 0.0 {
                let report = draw_energy(&mut dev.energy, spec, *sample_cost_j).expect("non-neg");
                let paid =
                    if report.underflowed() { drain_all(&mut dev.energy, spec) } else { *sample_cost_j };
                dev.energy.ledger.acquisition_overhead += paid;
            }
            p.capacitance_f = spec.capacitance_f().expect("validated capacitor");
            obs.exact_energy = Some(dev.energy.stored);
            let t = (slot - 1) as f64 * config.slot_s;
            let v = dev.energy.voltage_v.unwrap_or(0.0);
            obs.harvest_rate =
                config.device.source.as_ref().map(|s| s.current_a(v, t));
            p.decide(&obs)
        }
        (_, PolicyState::DualThresholdGate(p)) => {
            let v = dev.energy.voltage_v.unwrap_or(0.0);
            obs.flags = Some(vec![v >= p.v_off_v, v >= p.v_on_v]);
            p.decide(&obs)
        }
        // Config/state mismatch cannot happen: both derive from the same enum.
        _ => unreachable!("policy state mismatch"),
    }
}

/// Applies a decision to the device, returning a short action label for
/// tracing.
#[allow(clippy::too_many_arguments)]
fn resolve(
    config: &ScenarioConfig,
    spec: &StorageSpec,
    dev: &mut DeviceState,
    idx: usize,
    t_start: f64,
    decision: PolicyDecision,
    totals: &mut Totals,
    contenders: &mut Vec<(usize, f64, u64)>,
) -> Result<&'static str, EngineError> {
    let slot_s = config.slot_s;
    let label = match decision {
        PolicyDecision::Sleep => "sleep",
        PolicyDecision::Measure => "measure",
        PolicyDecision::Defer => {
            totals.defers += 1;
            "defer"
        }
        PolicyDecision::Execute { .. } | PolicyDecision::Transmit { .. } => {
            let spend = match decision {
                PolicyDecision::Transmit { energy } => energy,
                _ => match config.device.workload {
                    WorkloadConfig::Tasks { cost, .. } => cost,
                    _ => 0.0,
                },
            };
            match &config.device.workload {
                WorkloadConfig::Tasks { cost, on_failure, .. } => {
                    if dev.task_buffer == 0 {
                        "sleep"
                    } else {
                        let report = draw_energy(&mut dev.energy, spec, *cost)
                            .map_err(|e| EngineError::Runtime(e.to_string()))?;
                        if report.underflowed() {
                            // Failed attempt wastes whatever was stored.
                            drain_all(&mut dev.energy, spec);
                            totals.attempts_failed += 1;
                            if *on_failure == FailureMode::Discard {
                                dev.task_buffer -= 1;
                                totals.failed_discarded += 1;
                            }
                            "exec-fail"
                        } else {
                            dev.task_buffer -= 1;
                            totals.completed += 1;
                            if let PolicyState::PeriodicMeasure(p) = &mut dev.policy {
                                p.record_spend(*cost);
                            }
                            "exec"
                        }
                    }
                }
                WorkloadConfig::Packets { .. } => {
                    if dev.packet_generated_at.is_none() {
                        "sleep"
                    } else {
                        let report = draw_energy(&mut dev.energy, spec, spend)
                            .map_err(|e| EngineError::Runtime(e.to_string()))?;
                        if report.underflowed() {
                            // Transmission dies in progress: energy wasted,
                            // packet lost, never reaches the channel.
                            drain_all(&mut dev.energy, spec);
                            totals.attempts_failed += 1;
                            totals.failed_discarded += 1;
                            dev.packet_generated_at = None;
                            "tx-fail"
                        } else {
                            // The packet is on the air; no retransmissions,
                            // so it leaves the buffer regardless of outcome.
                            let gen = dev.packet_generated_at.take().expect("buffered");
                            contenders.push((idx, spend, gen));
                            "tx"
                        }
                    }
                }
                _ => "sleep",
            }
        }
        PolicyDecision::SelectModel { model } => {
            if let PolicyConfig::TinymlSelect { models, v_min_v, .. } = &config.device.policy {
                // The policy reports an index into its accuracy-sorted list.
                let mut sorted = models.clone();
                sorted.sort_by_key(|c| std::cmp::Reverse(c.accuracy_rank));
                let m = sorted
                    .get(model)
                    .copied()
                    .ok_or_else(|| EngineError::Runtime("model index out of range".into()))?;
                if let Some(slot_count) = totals.model_selections.get_mut(model) {
                    *slot_count += 1;
                }
                totals.arrivals += 1;
                let source =
                    config.device.source.as_ref().expect("validated physical source");
                let load = LoadModel::Cr { r_ohm: m.r_load_ohm };
                integrate_circuit(
                    &mut dev.energy,
                    spec,
                    source,
                    &load,
                    t_start,
                    m.exec_s,
                    config.device.substeps_per_slot.max(16),
                )
                .map_err(|e| EngineError::Runtime(e.to_string()))?;
                let v_after = dev.energy.voltage_v.unwrap_or(0.0);
                if v_after >= *v_min_v {
                    totals.completed += 1;
                } else {
                    totals.attempts_failed += 1;
                    totals.failed_discarded += 1;
                }
                // Idle recharge for the remainder of the slot.
                let rest = slot_s - m.exec_s;
                if rest > 0.0 {
                    settle_physical(config, spec, dev, t_start + m.exec_s, rest, 0.0)?;
                }
                return Ok("infer");
            }
            "infer"
        }
        PolicyDecision::SetPhaseConfig { .. } => "phase",
        PolicyDecision::PowerGate { on } => {
            if on {
                if let WorkloadConfig::TimedTransactions { rejoin_s, interval_s, .. } =
                    config.device.workload
                {
                    dev.rejoin_until_s = t_start + rejoin_s;
                    dev.next_tx_s = dev.rejoin_until_s + interval_s;
                }
                "gate-on"
            } else {
                totals.restarts += 1;
                "gate-off"
            }
        }
    };

    // Physical settle for workloads driven by continuous integration.
    match &config.device.workload {
        WorkloadConfig::TimedTransactions {
            interval_s,
            energy_j,
            rejoin_energy_j,
            rejoin_s,
            idle_power_w,
        } => {
            let on = device_is_on(dev);
            let rejoining = on && t_start < dev.rejoin_until_s;
            let mut load_power = 0.0;
            if on {
                load_power += idle_power_w;
                if rejoining && *rejoin_s > 0.0 {
                    load_power += rejoin_energy_j / rejoin_s;
                }
            }
            settle_physical(config, spec, dev, t_start, slot_s, load_power)?;
            // Transactions fire at interval boundaries once rejoined.
            if on && !rejoining {
                let t_end = t_start + slot_s;
                while dev.next_tx_s <= t_end {
                    dev.next_tx_s += interval_s;
                    totals.arrivals += 1;
                    let report = draw_energy(&mut dev.energy, spec, *energy_j)
                        .map_err(|e| EngineError::Runtime(e.to_string()))?;
                    if report.underflowed() {
                        drain_all(&mut dev.energy, spec);
                        totals.attempts_failed += 1;
                        totals.failed_discarded += 1;
                    } else {
                        totals.completed += 1;
                        totals.successes += 1;
                    }
                }
            }
            dev.was_on = on;
        }
        // Deferred inference: the whole slot is idle recharge.
        WorkloadConfig::Inference if !matches!(decision, PolicyDecision::SelectModel { .. }) => {
            settle_physical(config, spec, dev, t_start, slot_s, 0.0)?;
        }
        _ => {}
    }
    Ok(label)
}

/// Integrates source plus (idle + extra) load over an interval in the
/// physical regime.
fn settle_physical(
    config: &ScenarioConfig,
    spec: &StorageSpec,
    dev: &mut DeviceState,
    t0: f64,
    dt: f64,
    extra_power_w: f64,
) -> Result<(), EngineError> {
    let Some(source) = config.device.source.as_ref() else {
        return Ok(());
    };
    let mut parts = Vec::new();
    if let Some(idle) = &config.device.idle_load {
        parts.push(crate::energy::WeightedLoad { weight: 1.0, load: idle.clone() });
    }
    if extra_power_w > 0.0 {
        parts.push(crate::energy::WeightedLoad {
            weight: 1.0,
            load: LoadModel::Cp { p_l_w: extra_power_w, v_brownout_v: 0.0 },
        });
    }
    let load = LoadModel::Composite { parts };
    let substeps = config.device.substeps_per_slot.max(1);
    integrate_circuit(&mut dev.energy, spec, source, &load, t0, dt, substeps)
        .map_err(|e| EngineError::Runtime(e.to_string()))?;
    Ok(())
}
