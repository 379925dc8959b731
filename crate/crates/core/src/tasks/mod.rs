//! Energy/time cost models for the core operation tasks and the
//! atomicity/granularity structure used by schedulers.

mod actuator;
mod comm;

pub use actuator::{actuator_energy, table4, ActuatorError, ActuatorProfile};

pub use comm::{comm_presets, comm_transaction, CommProfile, PhasePower, RadioState, Transaction};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TaskError {
    #[error("atomic task cannot be split below task granularity")]
    AtomicSplitRefused,
    #[error("phase costs {actual} do not sum to task cost {expected}")]
    PhaseCostMismatch { expected: f64, actual: f64 },
    #[error("per-instruction split requires a positive quantum")]
    NonPositiveQuantum,
    #[error("unknown task kind: {0}")]
    UnknownKind(String),
}

// ============================================================================
// Sensing
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensingTrigger {
    /// Fixed sleep interval between cycles; the sleep state is part of the
    /// periodic cycle cost.
    Periodic { t_sleep_s: f64 },
    /// Sleep time is unbounded and charged to device standby, not the task.
    OnDemand,
}

/// Full-cycle sensing operation: sleep, wake/heat, measure, convert/store,
/// each state consuming E_i = V_dd * I_i * t_i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingProfile {
    pub v_dd_v: f64,
    pub i_sleep_a: f64,
    pub i_wake_a: f64,
    pub t_wake_s: f64,
    pub i_measure_a: f64,
    pub t_measure_s: f64,
    pub i_convert_a: f64,
    pub t_convert_s: f64,
    pub trigger: SensingTrigger,
}

/// Energy and duration of one sensing cycle. The sleep term is included
/// only for periodic triggering.
pub fn sensing_energy(profile: &SensingProfile) -> (f64, f64) {
    let p = profile;
    let mut energy = p.v_dd_v
        * (p.i_wake_a * p.t_wake_s + p.i_measure_a * p.t_measure_s + p.i_convert_a * p.t_convert_s);
    let mut duration = p.t_wake_s + p.t_measure_s + p.t_convert_s;
    if let SensingTrigger::Periodic { t_sleep_s } = p.trigger {
        energy += p.v_dd_v * p.i_sleep_a * t_sleep_s;
        duration += t_sleep_s;
    }
    (energy, duration)
}

// ============================================================================
// Computation
// ============================================================================

/// MCU operating mode for the processing-cost model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComputeMode {
    /// Fixed voltage and frequency:
    /// E = gamma*C_s*V_dd^2*N_cyc + I_leak*V_dd*N_cyc/f.
    Fixed {
        activity: f64,
        switch_cap_f: f64,
        v_dd_v: f64,
        clock_hz: f64,
        i_leak_a: f64,
    },
    /// DVFS with f proportional to V_dd: E ~ gamma' * f^2 * N_cyc.
    Dvfs { gamma_prime: f64, clock_hz: f64 },
}

/// Asymptotic cycle-count scaling classes for programmable tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleScaling {
    Constant,
    Linear,
    BilinearNk,
    NLogN,
    NPlusKLogK,
    Quadratic,
    Cubic,
}

/// ceil(log2(n)) with n in {0, 1} contributing no factor.
fn ceil_log2(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        (n - 1).ilog2() as u64 + 1
    }
}

/// Cycle count for a task of the given scaling class, input sizes `n`, `k`,
/// and per-kind cycle constant `c` (implementation-dependent; default 1).
pub fn compute_cycles(scaling: CycleScaling, n: u64, k: u64, c: f64) -> f64 {
    let n_f = n as f64;
    let k_f = k as f64;
    c * match scaling {
        CycleScaling::Constant => 1.0,
        CycleScaling::Linear => n_f,
        CycleScaling::BilinearNk => n_f * k_f,
        CycleScaling::NLogN => n_f * ceil_log2(n) as f64,
        CycleScaling::NPlusKLogK => n_f + k_f * ceil_log2(k) as f64,
        CycleScaling::Quadratic => n_f * n_f,
        CycleScaling::Cubic => n_f * n_f * n_f,
    }
}

/// Scaling class for a named programmable-task kind.
pub fn scaling_for_kind(kind: &str) -> Result<CycleScaling, TaskError> {
    Ok(match kind {
        "threshold-check" | "timer-interrupt" | "scheduler-tick" => CycleScaling::Constant,
        "crc8" | "delta-encoding" | "run-length-encoding" | "minmax" | "hmac" => {
            CycleScaling::Linear
        }
        "moving-average" | "fir" | "kmeans" | "cnn" => CycleScaling::BilinearNk,
        "histogram" => CycleScaling::NPlusKLogK,
        "fft" => CycleScaling::NLogN,
        "autocorrelation" | "binary-classifier" | "ecc" => CycleScaling::Quadratic,
        "rsa" => CycleScaling::Cubic,
        other => return Err(TaskError::UnknownKind(other.to_string())),
    })
}

/// Energy and execution time of `n_cyc` cycles under the given mode.
pub fn compute_energy(mode: &ComputeMode, n_cyc: f64) -> (f64, f64) {
    match *mode {
        ComputeMode::Fixed { activity, switch_cap_f, v_dd_v, clock_hz, i_leak_a } => {
            let dynamic = activity * switch_cap_f * v_dd_v * v_dd_v * n_cyc;
            let static_e = i_leak_a * v_dd_v * n_cyc / clock_hz;
            (dynamic + static_e, n_cyc / clock_hz)
        }
        ComputeMode::Dvfs { gamma_prime, clock_hz } => {
            (gamma_prime * clock_hz * clock_hz * n_cyc, n_cyc / clock_hz)
        }
    }
}

// ============================================================================
// Task structure: atomicity and granularity
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    PerCycle,
    PerTask,
    PerPhase,
    PerInstruction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskClass {
    /// Low demand, can pause and resume opportunistically.
    Intermittent,
    /// Needs a minimum stored energy to execute atomically.
    CapacityConstrained,
    /// Reactive; energy must be available on demand.
    TemporallyConstrained,
}

/// A unit of work with an energy cost, duration, and enforcement structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub cost: f64,
    pub duration: f64,
    pub atomic: bool,
    pub granularity: Granularity,
    #[serde(default)]
    pub phases: Vec<TaskSpec>,
    #[serde(default)]
    pub deadline: Option<f64>,
    #[serde(default)]
    pub checkpoint_cost: Option<f64>,
    pub class: TaskClass,
}

impl TaskSpec {
    pub fn atomic_unit(id: &str, cost: f64, duration: f64) -> Self {
        TaskSpec {
            id: id.to_string(),
            cost,
            duration,
            atomic: true,
            granularity: Granularity::PerTask,
            phases: Vec::new(),
            deadline: None,
            checkpoint_cost: None,
            class: TaskClass::CapacityConstrained,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitKind {
    Work,
    Checkpoint,
}

/// One schedulable atomic unit produced by [`split_task`].
#[derive(Debug, Clone, PartialEq)]
pub struct WorkUnit {
    pub cost: f64,
    pub kind: UnitKind,
}

/// Splits a task into atomic units according to its granularity:
///
/// - atomic or per-task/per-cycle tasks return themselves as a single unit;
/// - per-phase tasks return one unit per phase (costs must sum to the task
///   cost);
/// - per-instruction tasks are cut into quanta of `checkpoint_quantum` with
///   a checkpoint unit inserted between consecutive work units.
///
/// Work-unit costs always sum to the task cost; checkpoint units are
/// overhead on top.
pub fn split_task(task: &TaskSpec, checkpoint_quantum: f64) -> Result<Vec<WorkUnit>, TaskError> {
    let whole = || vec![WorkUnit { cost: task.cost, kind: UnitKind::Work }];
    match task.granularity {
        Granularity::PerTask | Granularity::PerCycle => Ok(whole()),
        Granularity::PerPhase => {
            if task.atomic {
                return Err(TaskError::AtomicSplitRefused);
            }
            if task.phases.is_empty() {
                return Ok(whole());
            }
            let total: f64 = task.phases.iter().map(|p| p.cost).sum();
            if (total - task.cost).abs() > 1e-9 * task.cost.abs().max(1.0) {
                return Err(TaskError::PhaseCostMismatch { expected: task.cost, actual: total });
            }
            Ok(task
                .phases
                .iter()
                .map(|p| WorkUnit { cost: p.cost, kind: UnitKind::Work })
                .collect())
        }
        Granularity::PerInstruction => {
            if task.atomic {
                return Err(TaskError::AtomicSplitRefused);
            }
            if !(checkpoint_quantum > 0.0) {
                return Err(TaskError::NonPositiveQuantum);
            }
            let checkpoint = task.checkpoint_cost.unwrap_or(0.0);
            let mut units = Vec::new();
            let mut remaining = task.cost;
            while remaining > 0.0 {
                let chunk = remaining.min(checkpoint_quantum);
                if !units.is_empty() {
                    units.push(WorkUnit { cost: checkpoint, kind: UnitKind::Checkpoint });
                }
                units.push(WorkUnit { cost: chunk, kind: UnitKind::Work });
                remaining -= chunk;
            }
            if units.is_empty() {
                units.push(WorkUnit { cost: 0.0, kind: UnitKind::Work });
            }
            Ok(units)
        }
    }
}

/// Name-addressable profile presets, so configs can reference them as
/// `table4.<class>` (actuators), `table2.<kind>` (cycle scaling), or
/// `security.<task>`.
pub fn actuator_preset(name: &str) -> Result<ActuatorProfile, TaskError> {
    Ok(match name.strip_prefix("table4.").unwrap_or(name) {
        "mems" | "mems-mirror" => table4::mems_mirror(),
        "led" | "led-blink" => table4::led_blink(),
        "piezo" | "piezo-haptic" => table4::piezo_haptic(),
        "solenoid" | "solenoid-latch" => table4::solenoid_latch(),
        "eink" | "eink-refresh" => table4::eink_refresh(),
        "sma" | "sma-wire" => table4::sma_wire(),
        "servo" | "servo-pan-tilt" => table4::servo_pan_tilt(),
        other => return Err(TaskError::UnknownKind(other.to_string())),
    })
}

/// `table2.<kind>` scaling lookup (same table as [`scaling_for_kind`]).
pub fn named_scaling(name: &str) -> Result<CycleScaling, TaskError> {
    scaling_for_kind(name.strip_prefix("table2.").unwrap_or(name))
}

/// Named security-task presets: generic energy/time/atomicity profiles, not
/// cryptographic implementations. Costs are class defaults in joules and
/// are meant to be overridden per deployment.
pub fn security_task(name: &str) -> Result<TaskSpec, TaskError> {
    let spec = |id: &str, cost, duration, atomic, deadline: Option<f64>, class| TaskSpec {
        id: id.to_string(),
        cost,
        duration,
        atomic,
        granularity: Granularity::PerTask,
        phases: Vec::new(),
        deadline,
        checkpoint_cost: None,
        class,
    };
    Ok(match name {
        // Tight timing, low interrupt tolerance.
        "authentication" => spec(
            "security.authentication",
            5e-3,
            0.5,
            true,
            Some(1.0),
            TaskClass::TemporallyConstrained,
        ),
        "encryption" => {
            spec("security.encryption", 5e-4, 0.05, false, None, TaskClass::Intermittent)
        }
        "key-generation" => spec(
            "security.key-generation",
            5e-2,
            2.0,
            true,
            Some(5.0),
            TaskClass::CapacityConstrained,
        ),
        "key-exchange" => spec(
            "security.key-exchange",
            5e-2,
            2.0,
            true,
            Some(5.0),
            TaskClass::TemporallyConstrained,
        ),
        // Stateless checks tolerate deferral.
        "integrity-mac" => {
            spec("security.integrity-mac", 5e-5, 0.01, false, None, TaskClass::Intermittent)
        }
        "access-control" => {
            spec("security.access-control", 5e-5, 0.01, false, None, TaskClass::Intermittent)
        }
        "secure-boot" => spec(
            "security.secure-boot",
            5e-3,
            1.0,
            true,
            None,
            TaskClass::CapacityConstrained,
        ),
        other => return Err(TaskError::UnknownKind(other.to_string())),
    })
}
