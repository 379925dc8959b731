//! Energy-aware decision strategies behind a single observation/decision
//! interface, plus energy-blind baselines.

pub mod rf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::rc_transition;
use crate::rng::Rng;

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("invalid policy parameter: {0}")]
    InvalidParameter(String),
}

/// What a policy sees in one slot. Field provenance follows the three
/// measurement points: `exact_energy` from sampling the storage element,
/// `flags` from comparator monitoring of the storage element, `harvest_rate`
/// from the transducer output, `forecast` from a predictor.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Observation {
    pub slot: u64,
    /// Present only when the policy paid a sampling cost this slot.
    pub exact_energy: Option<f64>,
    pub flags: Option<Vec<bool>>,
    pub forecast: Option<Vec<f64>>,
    /// Estimated harvest rate at the transducer output.
    pub harvest_rate: Option<f64>,
    pub buffer_occupancy: u32,
    pub device_on: bool,
}

/// What a policy asks the device to do this slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyDecision {
    Sleep,
    Measure,
    Execute { task: usize },
    Transmit { energy: f64 },
    Defer,
    SelectModel { model: usize },
    SetPhaseConfig { index: usize },
    PowerGate { on: bool },
}

/// Monotone probability map over stored energy, used for erasure f(E)
/// (decreasing) and transmission f'(E) (non-decreasing). The exact shapes
/// are deployment choices; the defaults are exp(-E/scale) and min(1, E/E_M).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbFunction {
    /// exp(-e / scale), decreasing in e.
    ExpDecay { scale: f64 },
    /// min(1, e / full_scale), non-decreasing in e.
    LinearCap { full_scale: f64 },
    /// Breakpoint table with linear interpolation, clamped at the ends.
    Table { points: Vec<(f64, f64)> },
}

impl ProbFunction {
    pub fn eval(&self, e: f64) -> f64 {
        match self {
            ProbFunction::ExpDecay { scale } => (-e / scale).exp().clamp(0.0, 1.0),
            ProbFunction::LinearCap { full_scale } => (e / full_scale).clamp(0.0, 1.0),
            ProbFunction::Table { points } => {
                if points.is_empty() {
                    return 0.0;
                }
                if e <= points[0].0 {
                    return points[0].1.clamp(0.0, 1.0);
                }
                let last = points[points.len() - 1];
                if e >= last.0 {
                    return last.1.clamp(0.0, 1.0);
                }
                let idx = points.partition_point(|p| p.0 <= e);
                let (a, b) = (points[idx - 1], points[idx]);
                let w = (e - a.0) / (b.0 - a.0);
                (a.1 + w * (b.1 - a.1)).clamp(0.0, 1.0)
            }
        }
    }

    pub fn violations(&self, prefix: &str, require: Monotonicity) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            ProbFunction::ExpDecay { scale } => {
                if !(*scale > 0.0) {
                    out.push(format!("{prefix}.scale: must be > 0"));
                }
                if require == Monotonicity::NonDecreasing {
                    out.push(format!("{prefix}: exp_decay is decreasing, need non-decreasing"));
                }
            }
            ProbFunction::LinearCap { full_scale } => {
                if !(*full_scale > 0.0) {
                    out.push(format!("{prefix}.full_scale: must be > 0"));
                }
                if require == Monotonicity::NonIncreasing {
                    out.push(format!("{prefix}: linear_cap is increasing, need non-increasing"));
                }
            }
            ProbFunction::Table { points } => {
                if points.is_empty() {
                    out.push(format!("{prefix}.points: must be non-empty"));
                }
                if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                    out.push(format!("{prefix}.points: energies must be strictly increasing"));
                }
                if points.iter().any(|p| !(0.0..=1.0).contains(&p.1)) {
                    out.push(format!("{prefix}.points: probabilities must be in [0, 1]"));
                }
                let bad = match require {
                    Monotonicity::NonIncreasing => points.windows(2).any(|w| w[1].1 > w[0].1),
                    Monotonicity::NonDecreasing => points.windows(2).any(|w| w[1].1 < w[0].1),
                    Monotonicity::Any => false,
                };
                if bad {
                    out.push(format!("{prefix}.points: wrong monotonicity"));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    NonIncreasing,
    NonDecreasing,
    Any,
}

// ============================================================================
// Energy-blind baseline
// ============================================================================

/// Fires a buffered task/packet attempt every F-th slot regardless of the
/// energy state. Attempts with insufficient energy fail and waste whatever
/// was stored.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBlind {
    pub period_slots: u64,
    /// Fixed energy spent per attempt.
    pub spend: f64,
}

impl EnergyBlind {
    pub fn new(period_slots: u64, spend: f64) -> Result<Self, PolicyError> {
        if period_slots < 1 {
            return Err(PolicyError::InvalidParameter("period_slots must be >= 1".into()));
        }
        if !(spend > 0.0) {
            return Err(PolicyError::InvalidParameter("spend must be > 0".into()));
        }
        Ok(EnergyBlind { period_slots, spend })
    }

    /// Slots are 1-based; the policy fires on multiples of F.
    pub fn decide(&self, obs: &Observation) -> PolicyDecision {
        if obs.buffer_occupancy > 0 && obs.slot.is_multiple_of(self.period_slots) {
            PolicyDecision::Transmit { energy: self.spend }
        } else {
            PolicyDecision::Sleep
        }
    }
}

// ============================================================================
// Periodic conservative measurement (energy-aware task deferring)
// ============================================================================

/// Measures the stored energy every Q slots at a cost, keeps a conservative
/// estimate in between (known spends subtracted, no harvest assumed), and
/// executes a buffered task only when the estimate covers its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicMeasure {
    pub period_slots: u64,
    pub measure_cost: f64,
    pub task_cost: f64,
    estimate: f64,
}

impl PeriodicMeasure {
    pub fn new(period_slots: u64, measure_cost: f64, task_cost: f64) -> Result<Self, PolicyError> {
        if period_slots < 1 {
            return Err(PolicyError::InvalidParameter("period_slots must be >= 1".into()));
        }
        if measure_cost < 0.0 {
            return Err(PolicyError::InvalidParameter("measure_cost must be >= 0".into()));
        }
        Ok(PeriodicMeasure { period_slots, measure_cost, task_cost, estimate: 0.0 })
    }

    pub fn is_measure_slot(&self, slot: u64) -> bool {
        slot.is_multiple_of(self.period_slots)
    }

    /// Refresh the estimate with a fresh reading (post-measurement-cost).
    pub fn record_measurement(&mut self, reading: f64) {
        self.estimate = reading;
    }

    /// Subtract a known spend from the estimate.
    pub fn record_spend(&mut self, amount: f64) {
        self.estimate = (self.estimate - amount).max(0.0);
    }

    pub fn estimate(&self) -> f64 {
        self.estimate
    }

    pub fn decide(&self, obs: &Observation) -> PolicyDecision {
        if obs.buffer_occupancy > 0 && self.estimate >= self.task_cost {
            PolicyDecision::Execute { task: 0 }
        } else {
            PolicyDecision::Sleep
        }
    }
}

// ============================================================================
// Age-of-information transmission policies
// ============================================================================

/// Fully energy-aware transmitter: with a buffered packet, transmits with
/// probability f'(E) spending all stored energy.
#[derive(Debug, Clone, PartialEq)]
pub struct AoiFullyAware {
    pub transmit_prob: ProbFunction,
    /// Sampling cost charged when the stored level is read.
    pub sample_cost: f64,
}

impl AoiFullyAware {
    pub fn decide(&self, obs: &Observation, rng: &mut Rng) -> PolicyDecision {
        let Some(e) = obs.exact_energy else {
            return PolicyDecision::Sleep;
        };
        if obs.buffer_occupancy > 0 && e > 0.0 && rng.bernoulli(self.transmit_prob.eval(e)) {
            PolicyDecision::Transmit { energy: e }
        } else {
            PolicyDecision::Sleep
        }
    }
}

/// Partially aware transmitter: a single comparator flag at threshold
/// delta; transmits spending exactly delta once the flag is set.
#[derive(Debug, Clone, PartialEq)]
pub struct AoiThreshold {
    pub threshold: f64,
}

impl AoiThreshold {
    pub fn new(threshold: f64) -> Result<Self, PolicyError> {
        if !(threshold >= 1.0) {
            return Err(PolicyError::InvalidParameter("threshold must be >= 1".into()));
        }
        Ok(AoiThreshold { threshold })
    }

    pub fn decide(&self, obs: &Observation) -> PolicyDecision {
        let flag_set = obs.flags.as_ref().is_some_and(|f| f.first().copied().unwrap_or(false));
        if obs.buffer_occupancy > 0 && flag_set {
            PolicyDecision::Transmit { energy: self.threshold }
        } else {
            PolicyDecision::Sleep
        }
    }
}

// ============================================================================
// TinyML model selection
// ============================================================================

/// One deployable inference model: accuracy rank (higher is better), its
/// execution time, and the equivalent resistance of the inference load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TinymlModel {
    pub accuracy_rank: u32,
    pub exec_s: f64,
    pub r_load_ohm: f64,
}

/// Selects the most accurate model whose predicted post-inference capacitor
/// voltage stays above the operating minimum; defers when none is feasible.
#[derive(Debug, Clone, PartialEq)]
pub struct TinymlSelect {
    /// Candidates sorted by decreasing accuracy rank.
    pub models: Vec<TinymlModel>,
    pub v_min_v: f64,
    pub capacitance_f: f64,
}

impl TinymlSelect {
    pub fn new(
        mut models: Vec<TinymlModel>,
        v_min_v: f64,
        capacitance_f: f64,
    ) -> Result<Self, PolicyError> {
        if models.is_empty() {
            return Err(PolicyError::InvalidParameter("need at least one model".into()));
        }
        models.sort_by_key(|m| std::cmp::Reverse(m.accuracy_rank));
        Ok(TinymlSelect { models, v_min_v, capacitance_f })
    }

    /// Predicted post-inference voltage for model `m` from pre-inference
    /// voltage `v` and harvesting current `i`.
    pub fn predicted_voltage(&self, m: &TinymlModel, v: f64, i_a: f64) -> f64 {
        rc_transition(v, i_a, m.r_load_ohm, self.capacitance_f, m.exec_s)
    }

    /// Index into `models` of the selected candidate, or None to defer.
    pub fn select(&self, v: f64, i_a: f64) -> Option<usize> {
        self.models
            .iter()
            .position(|m| self.predicted_voltage(m, v, i_a) >= self.v_min_v)
    }

    pub fn decide(&self, obs: &Observation) -> PolicyDecision {
        let (Some(e), Some(i)) = (obs.exact_energy, obs.harvest_rate) else {
            return PolicyDecision::Defer;
        };
        let v = (2.0 * e / self.capacitance_f).sqrt();
        match self.select(v, i) {
            Some(idx) => PolicyDecision::SelectModel { model: idx },
            None => PolicyDecision::Defer,
        }
    }
}

// ============================================================================
// Dual-threshold power gating
// ============================================================================

/// Hysteresis gate: powers on when the capacitor voltage exceeds `v_on_v`,
/// off when it drops below `v_off_v`. Every on->off drop is one restart
/// (the next power-up pays the rejoin cost).
#[derive(Debug, Clone, PartialEq)]
pub struct DualThresholdGate {
    pub v_on_v: f64,
    pub v_off_v: f64,
    on: bool,
}

/// Gate transition emitted by [`DualThresholdGate::update`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateTransition {
    TurnedOn,
    TurnedOff,
}

impl DualThresholdGate {
    pub fn new(v_on_v: f64, v_off_v: f64) -> Result<Self, PolicyError> {
        if !(v_off_v < v_on_v) {
            return Err(PolicyError::InvalidParameter("v_off must be < v_on".into()));
        }
        Ok(DualThresholdGate { v_on_v, v_off_v, on: false })
    }

    pub fn is_on(&self) -> bool {
        self.on
    }

    /// Advance the hysteresis state machine with a fresh voltage.
    pub fn update(&mut self, v: f64) -> Option<GateTransition> {
        if !self.on && v >= self.v_on_v {
            self.on = true;
            Some(GateTransition::TurnedOn)
        } else if self.on && v < self.v_off_v {
            self.on = false;
            Some(GateTransition::TurnedOff)
        } else {
            None
        }
    }

    pub fn decide(&mut self, obs: &Observation) -> PolicyDecision {
        // Flags are [v >= v_off, v >= v_on] from a two-threshold comparator.
        let flags = obs.flags.clone().unwrap_or_default();
        let above_off = flags.first().copied().unwrap_or(false);
        let above_on = flags.get(1).copied().unwrap_or(false);
        let transition = if !self.on && above_on {
            self.on = true;
            true
        } else if self.on && !above_off {
            self.on = false;
            true
        } else {
            false
        };
        if transition {
            PolicyDecision::PowerGate { on: self.on }
        } else if self.on {
            PolicyDecision::Execute { task: 0 }
        } else {
            PolicyDecision::Sleep
        }
    }
}
