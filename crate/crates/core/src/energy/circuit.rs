//! Circuit-level source and load behaviors and capacitor integration.

use serde::{Deserialize, Serialize};

use super::{voltage_for_energy, EnergyError, EnergyState, StorageKind, StorageSpec};

/// One sample of a variable-output source trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoSample {
    pub t_s: f64,
    pub v_s_v: f64,
    pub i_s_a: f64,
}

/// Harvester interface behavior seen by the storage element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceModel {
    /// Variable output described by a time-indexed (V_S, I_S) trace.
    Vo { trace: Vec<VoSample> },
    /// Constant voltage behind a series resistance; harvesting stops once
    /// the storage voltage reaches V_S.
    Cv { v_s_v: f64, r_src_ohm: f64 },
    /// Constant current.
    Ci { i_s_a: f64 },
    /// Constant power with a cold-start current cap.
    Cp { p_s_w: f64, i_max_a: f64 },
}

impl SourceModel {
    /// Constant-power source with the default cold-start cap of 10x the
    /// current drawn at the cut-off voltage.
    pub fn cp_with_default_cap(p_s_w: f64, v_cutoff_v: f64) -> Self {
        SourceModel::Cp { p_s_w, i_max_a: 10.0 * p_s_w / v_cutoff_v }
    }

    /// Source current into the storage node at voltage `v` and time `t_s`.
    pub fn current_a(&self, v: f64, t_s: f64) -> f64 {
        match self {
            SourceModel::Vo { trace } => {
                let (v_s, i_s) = interpolate_vo(trace, t_s);
                if v_s > v {
                    i_s
                } else {
                    0.0
                }
            }
            SourceModel::Cv { v_s_v, r_src_ohm } => {
                if v >= *v_s_v {
                    0.0
                } else {
                    (v_s_v - v) / r_src_ohm
                }
            }
            SourceModel::Ci { i_s_a } => *i_s_a,
            SourceModel::Cp { p_s_w, i_max_a } => {
                if v > 0.0 {
                    (p_s_w / v).min(*i_max_a)
                } else {
                    *i_max_a
                }
            }
        }
    }

    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            SourceModel::Vo { trace } => {
                if trace.is_empty() {
                    out.push(format!("{prefix}: vo trace must be non-empty"));
                }
                if trace.windows(2).any(|w| w[1].t_s <= w[0].t_s) {
                    out.push(format!("{prefix}: vo trace timestamps must be strictly increasing"));
                }
            }
            SourceModel::Cv { v_s_v, r_src_ohm } => {
                if !(*v_s_v > 0.0) {
                    out.push(format!("{prefix}.v_s_v: must be > 0"));
                }
                if !(*r_src_ohm > 0.0) {
                    out.push(format!("{prefix}.r_src_ohm: must be > 0"));
                }
            }
            SourceModel::Ci { i_s_a } => {
                if *i_s_a < 0.0 {
                    out.push(format!("{prefix}.i_s_a: must be >= 0"));
                }
            }
            SourceModel::Cp { p_s_w, i_max_a } => {
                if *p_s_w < 0.0 {
                    out.push(format!("{prefix}.p_s_w: must be >= 0"));
                }
                if !(*i_max_a > 0.0) {
                    out.push(format!("{prefix}.i_max_a: must be > 0"));
                }
            }
        }
        out
    }
}

fn interpolate_vo(trace: &[VoSample], t: f64) -> (f64, f64) {
    match trace {
        [] => (0.0, 0.0),
        [only] => (only.v_s_v, only.i_s_a),
        _ => {
            let first = trace.first().unwrap();
            let last = trace.last().unwrap();
            if t <= first.t_s {
                return (first.v_s_v, first.i_s_a);
            }
            if t >= last.t_s {
                return (last.v_s_v, last.i_s_a);
            }
            let idx = trace.partition_point(|s| s.t_s <= t);
            let (a, b) = (&trace[idx - 1], &trace[idx]);
            let w = (t - a.t_s) / (b.t_s - a.t_s);
            (a.v_s_v + w * (b.v_s_v - a.v_s_v), a.i_s_a + w * (b.i_s_a - a.i_s_a))
        }
    }
}

/// Weighted component of a composite load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedLoad {
    pub weight: f64,
    pub load: LoadModel,
}

/// Canonical load behaviors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadModel {
    /// Constant resistance: P = V^2 / R.
    Cr { r_ohm: f64 },
    /// Constant current: P = V * I_L.
    Ci { i_l_a: f64 },
    /// Constant power, browning out below a minimum supply voltage.
    Cp { p_l_w: f64, v_brownout_v: f64 },
    /// Aggregate effect of several load components.
    Composite { parts: Vec<WeightedLoad> },
}

/// Demand of a load at a given supply voltage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadPower {
    pub watts: f64,
    /// Set when a constant-power component is below its brownout voltage;
    /// that component draws nothing while browned out.
    pub brownout: bool,
}

impl LoadModel {
    pub fn power_w(&self, v: f64) -> LoadPower {
        match self {
            LoadModel::Cr { r_ohm } => LoadPower { watts: v * v / r_ohm, brownout: false },
            LoadModel::Ci { i_l_a } => LoadPower { watts: v * i_l_a, brownout: false },
            LoadModel::Cp { p_l_w, v_brownout_v } => {
                if v < *v_brownout_v {
                    LoadPower { watts: 0.0, brownout: true }
                } else {
                    LoadPower { watts: *p_l_w, brownout: false }
                }
            }
            LoadModel::Composite { parts } => {
                let mut watts = 0.0;
                let mut brownout = false;
                for part in parts {
                    let p = part.load.power_w(v);
                    watts += part.weight * p.watts;
                    brownout |= p.brownout;
                }
                LoadPower { watts, brownout }
            }
        }
    }

    /// Current drawn from the storage node at voltage `v`.
    pub fn current_a(&self, v: f64) -> f64 {
        match self {
            LoadModel::Cr { r_ohm } => v / r_ohm,
            LoadModel::Ci { i_l_a } => *i_l_a,
            LoadModel::Cp { .. } | LoadModel::Composite { .. } => {
                let p = self.power_w(v);
                if v > 0.0 {
                    p.watts / v
                } else {
                    0.0
                }
            }
        }
    }

    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            LoadModel::Cr { r_ohm } => {
                if !(*r_ohm > 0.0) {
                    out.push(format!("{prefix}.r_ohm: must be > 0"));
                }
            }
            LoadModel::Ci { i_l_a } => {
                if *i_l_a < 0.0 {
                    out.push(format!("{prefix}.i_l_a: must be >= 0"));
                }
            }
            LoadModel::Cp { p_l_w, v_brownout_v } => {
                if *p_l_w < 0.0 {
                    out.push(format!("{prefix}.p_l_w: must be >= 0"));
                }
                if *v_brownout_v < 0.0 {
                    out.push(format!("{prefix}.v_brownout_v: must be >= 0"));
                }
            }
            LoadModel::Composite { parts } => {
                for (i, part) in parts.iter().enumerate() {
                    if part.weight < 0.0 {
                        out.push(format!("{prefix}.parts[{i}].weight: must be >= 0"));
                    }
                    out.extend(part.load.violations(&format!("{prefix}.parts[{i}]")));
                }
            }
        }
        out
    }
}

/// Post-discharge/charge voltage of a capacitor driven by a constant current
/// source through an effective load resistance over `t_l_s` seconds:
///
/// ```text
/// V' = I*R * (1 - exp(-T/(R*C))) + V * exp(-T/(R*C))
/// ```
pub fn rc_transition(v: f64, i_a: f64, r_ohm: f64, c_f: f64, t_l_s: f64) -> f64 {
    let decay = (-t_l_s / (r_ohm * c_f)).exp();
    i_a * r_ohm * (1.0 - decay) + v * decay
}

/// Result of [`integrate_circuit`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrateReport {
    pub harvested: f64,
    pub delivered: f64,
    pub leaked: f64,
    pub spilled: f64,
    /// Substeps where the load demand exceeded the available energy.
    pub underflow_events: u64,
    /// Transitions into brownout of a constant-power load component.
    pub brownout_events: u64,
}

/// Forward integration of `C dV/dt = eta_in*I_source(V) - I_load(V)/eta_out`
/// over `dt_s` in `substeps` equal sub-intervals, with per-substep ledger
/// bookkeeping that keeps the conservation identity exact.
///
/// With unit efficiencies this is the plain `C dV/dt = I_src - I_load`
/// capacitor law and converges (first order) to the closed forms of
/// [`rc_transition`] as `substeps` grows. Voltage leaving [0, V_max] is
/// clamped with spill/underflow ledger entries.
pub fn integrate_circuit(
    state: &mut EnergyState,
    spec: &StorageSpec,
    source: &SourceModel,
    load: &LoadModel,
    t0_s: f64,
    dt_s: f64,
    substeps: u32,
) -> Result<IntegrateReport, EnergyError> {
    let StorageKind::Capacitor { capacitance_f: c, v_max_v, .. } = spec.kind else {
        return Err(EnergyError::NotACapacitor);
    };
    if substeps == 0 {
        return Err(EnergyError::InvalidSpec("substeps must be >= 1".into()));
    }
    if !(dt_s > 0.0) {
        return Err(EnergyError::NonPositiveDt);
    }

    let h = dt_s / substeps as f64;
    let mut report = IntegrateReport::default();
    let mut was_brownout = false;

    for k in 0..substeps {
        let t = t0_s + k as f64 * h;
        let v = voltage_for_energy(c, state.stored);
        let i_src = source.current_a(v, t);
        let lp = load.power_w(v);
        if lp.brownout && !was_brownout {
            report.brownout_events += 1;
        }
        was_brownout = lp.brownout;
        let i_load = load.current_a(v);

        let leak = spec.leak.amount_j(state.stored, h);
        let dv = (spec.eta_in * i_src - i_load / spec.eta_out) * h / c;
        let v_new_raw = v + dv;
        // Voltage cannot fall below empty; an overdraw is an underflow.
        let mut underflow = v_new_raw < 0.0;
        let v_new = v_new_raw.max(0.0);
        let v_mid = 0.5 * (v + v_new);
        // Exact split of the energy delta: E' - E = C*dv*(v+v')/2.
        let harvest_inc = i_src * v_mid * h;
        let mut deliver_inc = i_load * v_mid * h;

        let mut stored_new =
            state.stored + spec.eta_in * harvest_inc - deliver_inc / spec.eta_out - leak;
        if stored_new < 0.0 {
            // The load overdrew; deliver only what was available.
            underflow = true;
            let available = (state.stored + spec.eta_in * harvest_inc - leak).max(0.0);
            deliver_inc = available * spec.eta_out;
            stored_new = 0.0;
        }
        if underflow {
            report.underflow_events += 1;
        }
        let mut spill_inc = 0.0;
        if stored_new > spec.capacity {
            debug_assert!(v_new >= v_max_v - 1e-9);
            spill_inc = stored_new - spec.capacity;
            stored_new = spec.capacity;
        }

        state.stored = stored_new;
        state.ledger.harvested += harvest_inc;
        state.ledger.delivered += deliver_inc;
        state.ledger.leaked += leak;
        state.ledger.spilled += spill_inc;
        report.harvested += harvest_inc;
        report.delivered += deliver_inc;
        report.leaked += leak;
        report.spilled += spill_inc;
    }
    state.sync_voltage(spec);
    Ok(report)
}
