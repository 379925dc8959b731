//! Named experiment presets, each reproducing one of the in-house protocol
//! studies at desk scale, with the sweep axes of the corresponding figure.

use serde::{Deserialize, Serialize};

use crate::energy::{SourceModel, StorageSpec};
use crate::engine::{
    ArrivalProcess, ChannelConfig, DeviceConfig, FailureMode, PolicyConfig, Regime,
    ScenarioConfig, SweepAxis, WorkloadConfig,
};
use crate::forecast::PanelSpec;
use crate::policy::rf::ExploreSchedule;
use crate::policy::{ProbFunction, TinymlModel};

/// A named, fully-baked experiment.
#[derive(Debug, Clone)]
pub struct PresetEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub kind: PresetKind,
}

#[derive(Debug, Clone)]
pub enum PresetKind {
    /// One or more labeled engine sweeps sharing the output table.
    Engine { variants: Vec<PresetVariant>, seeds: Vec<u64> },
    /// RF combining scene study (strategy columns instead of engine metrics).
    RfCombining(RfPresetConfig),
    /// Forecast pipeline time-series output.
    SolarForecast(SolarPresetConfig),
}

#[derive(Debug, Clone)]
pub struct PresetVariant {
    pub label: &'static str,
    pub config: ScenarioConfig,
    /// At most one swept axis per variant keeps the output table rectangular.
    pub axis: Option<SweepAxis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfPresetConfig {
    pub antenna_counts: Vec<usize>,
    pub scenes: usize,
    pub tx_power_w: f64,
    pub disk_radius_m: f64,
    pub path_loss_exponent: f64,
    pub ref_loss_db: f64,
    pub eh_efficiency: f64,
    pub spacing_wavelengths: f64,
    /// P_c = P_c' values to sweep.
    pub overhead_powers_w: Vec<f64>,
    pub schedule: ExploreSchedule,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolarPresetConfig {
    pub slots: usize,
    pub ar_order: usize,
    pub differencing: usize,
    pub panel: PanelSpec,
    pub peak_irradiance_w_m2: f64,
    pub task_energy_j: f64,
    pub horizon_slots: usize,
    pub seed: u64,
}

pub fn names() -> &'static [&'static str] {
    &[
        "task-deferring",
        "aoi-mac",
        "tinyml-select",
        "rf-combining",
        "nbiot-gate",
        "solar-forecast",
    ]
}

pub fn get(name: &str) -> Option<PresetEntry> {
    match name {
        "task-deferring" => Some(task_deferring()),
        "aoi-mac" => Some(aoi_mac()),
        "tinyml-select" => Some(tinyml_select()),
        "rf-combining" => Some(rf_combining()),
        "nbiot-gate" => Some(nbiot_gate()),
        "solar-forecast" => Some(solar_forecast()),
        _ => None,
    }
}

fn seeds(n: u64) -> Vec<u64> {
    (1..=n).collect()
}

// ----------------------------------------------------------------------------
// Energy-aware task deferring
// ----------------------------------------------------------------------------

/// Slotted single-device computation offload study: Poisson(0.75) energy
/// units, Bernoulli(0.35) task arrivals, task cost 2 units, buffer B, and
/// either a periodic conservative measurement policy (period Q, cost E_c)
/// or an energy-blind attempt every F slots.
pub fn task_deferring_config(
    policy: PolicyConfig,
    buffer_capacity: u32,
    capacity_units: f64,
) -> ScenarioConfig {
    ScenarioConfig {
        regime: Regime::Abstract,
        n_devices: 1,
        slots: 100_000,
        slot_s: 1.0,
        seed: 1,
        device: DeviceConfig {
            storage: StorageSpec::ideal(capacity_units),
            initial_energy: 0.0,
            energy_arrival: Some(ArrivalProcess::Poisson { mean: 0.75 }),
            source: None,
            idle_load: None,
            substeps_per_slot: 1,
            workload: WorkloadConfig::Tasks {
                arrival_p: 0.35,
                cost: 2.0,
                buffer_capacity,
                on_failure: FailureMode::Retain,
            },
            policy,
        },
        channel: None,
    }
}

fn task_deferring() -> PresetEntry {
    let q_axis = SweepAxis {
        path: "device.policy.periodic_measure.period_slots".into(),
        values: (1..=50).map(|q| q as f64).collect(),
    };
    let f_axis = SweepAxis {
        path: "device.policy.energy_blind.period_slots".into(),
        values: (1..=50).map(|f| f as f64).collect(),
    };
    let aware = |e_c: f64, b: u32| {
        task_deferring_config(
            PolicyConfig::PeriodicMeasure { period_slots: 2, measure_cost: e_c },
            b,
            10.0,
        )
    };
    let blind = |b: u32| {
        task_deferring_config(PolicyConfig::EnergyBlind { period_slots: 2, spend: 2.0 }, b, 10.0)
    };
    PresetEntry {
        name: "task-deferring",
        description: "Task completion rate of energy-aware deferring (measurement period Q, \
                      cost E_c) versus an energy-blind scheme (attempt period F)",
        kind: PresetKind::Engine {
            variants: vec![
                PresetVariant { label: "aware-ec0-b1", config: aware(0.0, 1), axis: Some(q_axis.clone()) },
                PresetVariant { label: "aware-ec1-b1", config: aware(1.0, 1), axis: Some(q_axis.clone()) },
                PresetVariant { label: "aware-ec1-b3", config: aware(1.0, 3), axis: Some(q_axis) },
                PresetVariant { label: "blind-b1", config: blind(1), axis: Some(f_axis.clone()) },
                PresetVariant { label: "blind-b3", config: blind(3), axis: Some(f_axis) },
            ],
            seeds: seeds(20),
        },
    }
}

// ----------------------------------------------------------------------------
// Energy-aware MAC for AoI reduction
// ----------------------------------------------------------------------------

/// Erasure scale of f(E) = exp(-E/scale) in the AoI study.
pub const AOI_ERASURE_SCALE: f64 = 3.0;

/// 64 devices share an erasure/collision channel; packets arrive
/// Bernoulli(p) into single-packet buffers, one energy unit arrives
/// Bernoulli(p') per slot into a 10-unit buffer.
pub fn aoi_mac_config(policy: PolicyConfig, event_p: f64, energy_p: f64) -> ScenarioConfig {
    ScenarioConfig {
        regime: Regime::Abstract,
        n_devices: 64,
        slots: 100_000,
        slot_s: 1.0,
        seed: 1,
        device: DeviceConfig {
            storage: StorageSpec::ideal(10.0),
            initial_energy: 0.0,
            energy_arrival: Some(ArrivalProcess::Bernoulli { p: energy_p }),
            source: None,
            idle_load: None,
            substeps_per_slot: 1,
            workload: WorkloadConfig::Packets { event_p },
            policy,
        },
        channel: Some(ChannelConfig {
            erasure: ProbFunction::ExpDecay { scale: AOI_ERASURE_SCALE },
        }),
    }
}

/// Transmission probability of the fully-aware transmitter. A steep
/// monotone shape, f'(E) = (E/E_M)^6, so the scheme holds back until the
/// buffer is nearly full instead of gambling its energy away at high
/// erasure probabilities.
pub fn aoi_fully_aware_policy() -> PolicyConfig {
    let points: Vec<(f64, f64)> =
        (0..=10).map(|e| (e as f64, (e as f64 / 10.0).powi(6))).collect();
    PolicyConfig::AoiFullyAware {
        transmit_prob: ProbFunction::Table { points },
        sample_cost: 0.0,
    }
}

pub fn aoi_threshold_policy(delta: f64) -> PolicyConfig {
    PolicyConfig::AoiThreshold { threshold: delta, monitor_cost_per_slot: 0.0 }
}

fn aoi_mac() -> PresetEntry {
    let n = 64.0;
    let delta_axis = SweepAxis {
        path: "device.policy.aoi_threshold.threshold".into(),
        values: (1..=10).map(|d| d as f64).collect(),
    };
    let et_axis = SweepAxis {
        path: "device.policy.energy_blind.spend".into(),
        values: (1..=10).map(|e| e as f64).collect(),
    };
    let mut variants = Vec::new();
    for (tag, p) in [("p-lo", 1.0 / n), ("p-hi", 5.0 / n)] {
        variants.push(PresetVariant {
            label: if tag == "p-lo" { "partial-p-lo" } else { "partial-p-hi" },
            config: aoi_mac_config(aoi_threshold_policy(10.0), p, 0.1),
            axis: Some(delta_axis.clone()),
        });
        variants.push(PresetVariant {
            label: if tag == "p-lo" { "full-p-lo" } else { "full-p-hi" },
            config: aoi_mac_config(aoi_fully_aware_policy(), p, 0.1),
            axis: None,
        });
        variants.push(PresetVariant {
            label: if tag == "p-lo" { "blind-p-lo" } else { "blind-p-hi" },
            config: aoi_mac_config(
                PolicyConfig::EnergyBlind { period_slots: 1, spend: 2.0 },
                p,
                0.1,
            ),
            axis: Some(et_axis.clone()),
        });
    }
    PresetEntry {
        name: "aoi-mac",
        description: "Average age of information for partially-aware (threshold delta), \
                      fully-aware (transmit with probability f'(E)), and energy-blind \
                      transmitters on a shared erasure/collision channel",
        kind: PresetKind::Engine { variants, seeds: seeds(20) },
    }
}

// ----------------------------------------------------------------------------
// TinyML model selection
// ----------------------------------------------------------------------------

/// Two gesture-recognition models on a 0.5 F capacitor: the small one needs
/// 0.12 mJ, the large one 1.46 mJ per inference. Equivalent load
/// resistances and execution times are derived from those energies at a
/// 3 V operating point.
pub fn tinyml_models() -> Vec<TinymlModel> {
    vec![
        // Small TinyML: 12 mW for 10 ms.
        TinymlModel { accuracy_rank: 1, exec_s: 0.010, r_load_ohm: 750.0 },
        // Large TinyML: 14.6 mW for 100 ms.
        TinymlModel { accuracy_rank: 2, exec_s: 0.100, r_load_ohm: 616.0 },
    ]
}

pub const TINYML_V_MIN: f64 = 2.8;

pub fn tinyml_config(harvest_current_a: f64) -> ScenarioConfig {
    ScenarioConfig {
        regime: Regime::Physical,
        n_devices: 1,
        slots: 600,
        slot_s: 1.0,
        seed: 1,
        device: DeviceConfig {
            storage: StorageSpec::capacitor(0.5, 4.2, TINYML_V_MIN),
            // Start just above the operating floor, where model selection
            // actually bites; a large capacitor barely moves per inference.
            initial_energy: crate::energy::capacitor_energy(0.5, 2.81),
            energy_arrival: None,
            source: Some(SourceModel::Ci { i_s_a: harvest_current_a }),
            idle_load: None,
            substeps_per_slot: 50,
            workload: WorkloadConfig::Inference,
            policy: PolicyConfig::TinymlSelect {
                models: tinyml_models(),
                v_min_v: TINYML_V_MIN,
                sample_cost_j: 0.0,
            },
        },
        channel: None,
    }
}

fn tinyml_select() -> PresetEntry {
    let current_axis = SweepAxis {
        path: "device.source.ci.i_s_a".into(),
        values: vec![0.00002, 0.0001, 0.0003, 0.0005, 0.001, 0.002, 0.004, 0.006],
    };
    PresetEntry {
        name: "tinyml-select",
        description: "Adaptive selection between a small and a large inference model from \
                      the predicted post-inference capacitor voltage, swept over the \
                      harvesting current",
        kind: PresetKind::Engine {
            variants: vec![PresetVariant {
                label: "select",
                config: tinyml_config(0.002),
                axis: Some(current_axis),
            }],
            seeds: vec![1],
        },
    }
}

// ----------------------------------------------------------------------------
// Dynamic RF combining
// ----------------------------------------------------------------------------

fn rf_combining() -> PresetEntry {
    PresetEntry {
        name: "rf-combining",
        description: "Average net harvested power of DC combining, static and dynamic RF \
                      combining, and a genie, versus antenna count, for a 10 W ambient \
                      source in a 100 m disk",
        kind: PresetKind::RfCombining(RfPresetConfig {
            antenna_counts: vec![1, 2, 4, 8, 16, 32],
            scenes: 1000,
            tx_power_w: 10.0,
            disk_radius_m: 100.0,
            path_loss_exponent: 2.7,
            ref_loss_db: 40.0,
            eh_efficiency: 0.5,
            spacing_wavelengths: 0.5,
            overhead_powers_w: vec![0.0, 1e-9, 3e-9, 1e-8, 3e-8, 1e-7, 3e-7, 1e-6, 3e-6, 1e-5, 3e-5],
            schedule: ExploreSchedule {
                tune_time_s: 1e-3,
                meas_time_s: 1e-3,
                window_s: 1.0,
                meas_noise_rel: 0.0,
            },
            seed: 1,
        }),
    }
}

// ----------------------------------------------------------------------------
// Batteryless NB-IoT gate
// ----------------------------------------------------------------------------

/// Dual-threshold gated communication: a capacitor-buffered device powers
/// on above 4.0 V, off below 3.6 V, transmits every `interval_s` while on,
/// and pays a rejoin burst after every power cycle.
pub fn nbiot_gate_config(
    capacitance_f: f64,
    harvest_power_w: f64,
    interval_s: f64,
) -> ScenarioConfig {
    let storage = StorageSpec::capacitor(capacitance_f, 5.0, 3.6);
    // One unidirectional packet: prepare 50 mW * 0.2 s + TX 200 mW * 0.2 s.
    let packet = crate::tasks::comm_presets::nbiot_like();
    let (packet_energy, _) =
        crate::tasks::comm_transaction(&packet, &crate::tasks::Transaction::TxOnly).unwrap();
    let rejoin = crate::tasks::comm_presets::lorawan_rejoin();
    ScenarioConfig {
        regime: Regime::Physical,
        n_devices: 1,
        slots: 14_400,
        slot_s: 0.25,
        seed: 1,
        device: DeviceConfig {
            storage,
            initial_energy: crate::energy::capacitor_energy(capacitance_f, 3.8),
            energy_arrival: None,
            source: Some(SourceModel::cp_with_default_cap(harvest_power_w, 3.6)),
            idle_load: None,
            substeps_per_slot: 25,
            workload: WorkloadConfig::TimedTransactions {
                interval_s,
                energy_j: packet_energy,
                rejoin_energy_j: rejoin.energy_j(),
                rejoin_s: rejoin.duration_s,
                idle_power_w: 30e-6,
            },
            policy: PolicyConfig::DualThresholdGate { v_on_v: 4.0, v_off_v: 3.6 },
        },
        channel: None,
    }
}

fn nbiot_gate() -> PresetEntry {
    let power_axis = SweepAxis {
        path: "device.source.cp.p_s_w".into(),
        values: vec![0.001, 0.002, 0.004, 0.006, 0.008, 0.016, 0.032, 0.050, 0.064],
    };
    PresetEntry {
        name: "nbiot-gate",
        description: "Packets per hour and restart count of a dual-threshold (4.0 V on / \
                      3.6 V off) capacitor-gated transmitter versus harvested power",
        kind: PresetKind::Engine {
            variants: vec![
                PresetVariant {
                    label: "ti-1s",
                    config: nbiot_gate_config(2.5, 0.006, 1.0),
                    axis: Some(power_axis.clone()),
                },
                PresetVariant {
                    label: "ti-60s",
                    config: nbiot_gate_config(2.5, 0.006, 60.0),
                    axis: Some(power_axis),
                },
            ],
            seeds: vec![1],
        },
    }
}

// ----------------------------------------------------------------------------
// Solar forecast pipeline
// ----------------------------------------------------------------------------

fn solar_forecast() -> PresetEntry {
    PresetEntry {
        name: "solar-forecast",
        description: "AR-forecasted irradiance converted to expected harvested energy per \
                      30 s slot, with the waiting time until a task's energy demand is \
                      covered",
        kind: PresetKind::SolarForecast(SolarPresetConfig {
            slots: 2880,
            ar_order: 5,
            differencing: 1,
            panel: PanelSpec {
                area_m2: 0.081 * 0.137,
                pv_efficiency: 0.17,
                pmu_efficiency: 0.85,
                slot_s: 30.0,
            },
            peak_irradiance_w_m2: 600.0,
            task_energy_j: 50.0,
            horizon_slots: 120,
            seed: 1,
        }),
    }
}

/// Synthetic one-day irradiance trace: a diurnal half-sine with
/// autocorrelated cloud noise, clamped at zero. Slot duration is
/// `panel.slot_s`.
pub fn synthetic_irradiance(config: &SolarPresetConfig) -> Vec<f64> {
    let mut rng = crate::rng::rng_stream(config.seed, 0, "irradiance");
    let slots = config.slots;
    let mut cloud = 0.0f64;
    let mut out = Vec::with_capacity(slots);
    for s in 0..slots {
        let day_fraction = s as f64 / slots as f64;
        let sun = (std::f64::consts::PI * (day_fraction - 0.25) / 0.5).sin();
        let clear = if (0.25..=0.75).contains(&day_fraction) {
            config.peak_irradiance_w_m2 * sun.max(0.0)
        } else {
            0.0
        };
        // AR(1) cloud attenuation in [-1, 1]-ish, slowly varying.
        cloud = 0.95 * cloud + 0.1 * rng.gauss();
        let attenuation = (1.0 - 0.3 * cloud.abs()).clamp(0.0, 1.0);
        out.push((clear * attenuation).max(0.0));
    }
    out
}
