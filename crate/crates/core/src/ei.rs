//! Energy-information acquisition: how a device learns its own energy state,
//! with explicit energy overhead and measurement error for each method.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Rng;

#[derive(Debug, Error, PartialEq)]
pub enum EiError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("negative energy flow into a pre-storage counter")]
    NegativeFlowPreStorage,
}

// ============================================================================
// Comparator-based monitoring
// ============================================================================

/// Power scaling of a multi-threshold comparator bank with L comparators.
/// Sub-linear scaling comes from sharing techniques (resistor ladders,
/// window comparators); the exact shape is architecture-specific, so a
/// user-supplied table is accepted with linear scaling as the fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparatorScaling {
    Linear,
    /// `table[l-1]` is g(l); must satisfy g(1)=1, non-decreasing, g(l) <= l.
    Table(Vec<f64>),
}

/// Threshold-flag monitoring circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparatorSpec {
    /// Strictly increasing threshold levels (volts or energy units).
    pub thresholds: Vec<f64>,
    /// Standby current of one comparator.
    pub i_sb_a: f64,
    pub v_dd_v: f64,
    pub scaling: ComparatorScaling,
}

impl ComparatorSpec {
    pub fn new(thresholds: Vec<f64>, i_sb_a: f64, v_dd_v: f64) -> Self {
        ComparatorSpec { thresholds, i_sb_a, v_dd_v, scaling: ComparatorScaling::Linear }
    }

    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        if self.thresholds.is_empty() {
            out.push(format!("{prefix}.thresholds: need at least one threshold"));
        }
        if self.thresholds.windows(2).any(|w| w[1] <= w[0]) {
            out.push(format!("{prefix}.thresholds: must be strictly increasing"));
        }
        if self.i_sb_a < 0.0 {
            out.push(format!("{prefix}.i_sb_a: must be >= 0"));
        }
        if let ComparatorScaling::Table(t) = &self.scaling {
            if t.len() < self.thresholds.len() {
                out.push(format!("{prefix}.scaling: table shorter than threshold count"));
            }
            if t.first().map(|&g1| (g1 - 1.0).abs() > 1e-12) == Some(true) {
                out.push(format!("{prefix}.scaling: g(1) must be 1"));
            }
            if t.windows(2).any(|w| w[1] < w[0]) {
                out.push(format!("{prefix}.scaling: must be non-decreasing"));
            }
            if t.iter().enumerate().any(|(i, &g)| g > (i + 1) as f64 + 1e-12) {
                out.push(format!("{prefix}.scaling: g(l) must not exceed l"));
            }
        }
        out
    }

    fn g(&self, l: usize) -> f64 {
        match &self.scaling {
            ComparatorScaling::Linear => l as f64,
            ComparatorScaling::Table(t) => t.get(l - 1).copied().unwrap_or(l as f64),
        }
    }

    /// Static tracking power P_c = g(L) * I_sb * V_dd.
    pub fn power_w(&self) -> f64 {
        self.g(self.thresholds.len()) * self.i_sb_a * self.v_dd_v
    }

    /// Continuous monitoring cost over an interval, to be charged to the
    /// acquisition-overhead ledger.
    pub fn monitoring_cost_j(&self, dt_s: f64) -> f64 {
        self.power_w() * dt_s
    }

    /// Exact, error-free threshold flags. Comparison is closed: a level
    /// equal to a threshold counts as exceeded.
    pub fn observe(&self, level: f64) -> Vec<bool> {
        self.thresholds.iter().map(|&t| level >= t).collect()
    }
}

// ============================================================================
// Information sampling (ADC readings)
// ============================================================================

/// Effective switching capacitance of the converter, either given directly
/// or derived from resolution and architecture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchingCap {
    DirectF(f64),
    /// Charge-redistribution SAR: C_s = unit * 2^N.
    Sar { unit_c_f: f64 },
    /// Flash: 2^N - 1 comparators in parallel.
    Flash { unit_c_f: f64 },
}

/// Explicit voltage/energy sampling front-end plus ADC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    /// Analog front-end power (op-amps, buffers, sample-and-hold).
    pub p_an_w: f64,
    /// Measurement duration.
    pub t_m_s: f64,
    pub switching: SwitchingCap,
    pub v_dd_v: f64,
    /// Input range; readings land on the N-bit mid-rise grid over [0, V_r].
    pub v_r_v: f64,
    pub n_bits: u32,
    /// Thermal-noise coefficient A with sigma_t^2 = A / t_m.
    /// For resistive front-ends A = 2kTR; from a datasheet noise density
    /// e_n, A = e_n^2 / 2.
    pub thermal_a: f64,
    /// Offset temperature drift coefficient (V/K).
    pub alpha_v_per_k: f64,
    /// Offset time drift rate (V/s).
    pub beta_v_per_s: f64,
    pub eps0_init_v: f64,
    pub t0_s: f64,
    pub temp0_k: f64,
}

impl SamplerSpec {
    /// Noise- and drift-free sampler, useful as a baseline.
    pub fn ideal(n_bits: u32, v_r_v: f64) -> Self {
        SamplerSpec {
            p_an_w: 0.0,
            t_m_s: 1e-3,
            switching: SwitchingCap::DirectF(0.0),
            v_dd_v: 3.0,
            v_r_v,
            n_bits,
            thermal_a: 0.0,
            alpha_v_per_k: 0.0,
            beta_v_per_s: 0.0,
            eps0_init_v: 0.0,
            t0_s: 0.0,
            temp0_k: 293.15,
        }
    }

    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        if self.t_m_s < 0.0 {
            out.push(format!("{prefix}.t_m_s: must be >= 0"));
        }
        if self.n_bits < 1 {
            out.push(format!("{prefix}.n_bits: must be >= 1"));
        }
        if self.thermal_a < 0.0 {
            out.push(format!("{prefix}.thermal_a: must be >= 0"));
        }
        if !(self.v_r_v > 0.0) {
            out.push(format!("{prefix}.v_r_v: must be > 0"));
        }
        out
    }

    pub fn c_s_f(&self) -> f64 {
        match self.switching {
            SwitchingCap::DirectF(c) => c,
            SwitchingCap::Sar { unit_c_f } => unit_c_f * (1u64 << self.n_bits) as f64,
            SwitchingCap::Flash { unit_c_f } => {
                unit_c_f * ((1u64 << self.n_bits) - 1) as f64
            }
        }
    }

    /// Per-sample energy E_c = P_an * t_m + C_s * V_dd^2.
    pub fn sample_cost_j(&self) -> f64 {
        self.p_an_w * self.t_m_s + self.c_s_f() * self.v_dd_v * self.v_dd_v
    }

    /// Deterministic offset at time `t` and temperature `temp`.
    pub fn offset_v(&self, t_s: f64, temp_k: f64) -> f64 {
        self.eps0_init_v
            + self.alpha_v_per_k * (temp_k - self.temp0_k)
            + self.beta_v_per_s * (t_s - self.t0_s)
    }

    fn lsb(&self) -> f64 {
        self.v_r_v / (1u64 << self.n_bits) as f64
    }

    /// Round-to-nearest quantization on the N-bit mid-rise grid over
    /// [0, V_r]: cell k reconstructs at (k + 1/2) * LSB.
    pub fn quantize(&self, x: f64) -> f64 {
        let lsb = self.lsb();
        let max_idx = (1u64 << self.n_bits) - 1;
        let idx = if x <= 0.0 {
            0
        } else {
            ((x / lsb).floor() as u64).min(max_idx)
        };
        (idx as f64 + 0.5) * lsb
    }

    /// One sampled reading: true value plus thermal noise plus offset,
    /// quantized, with the per-sample cost attached.
    pub fn sample_read(
        &self,
        true_value_v: f64,
        t_s: f64,
        temp_k: f64,
        rng: &mut Rng,
    ) -> SampleReading {
        let thermal = if self.thermal_a > 0.0 && self.t_m_s > 0.0 {
            rng.gauss() * (self.thermal_a / self.t_m_s).sqrt()
        } else {
            0.0
        };
        let x = true_value_v + thermal + self.offset_v(t_s, temp_k);
        let saturated = !(0.0..=self.v_r_v).contains(&x);
        SampleReading {
            reading_v: self.quantize(x),
            cost_j: self.sample_cost_j(),
            saturated,
            pre_quantization_v: x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleReading {
    pub reading_v: f64,
    pub cost_j: f64,
    /// The noisy input left [0, V_r] and the reading clamped to the grid edge.
    pub saturated: bool,
    /// Input after noise and offset, before quantization (for error analysis).
    pub pre_quantization_v: f64,
}

// ============================================================================
// Energy-integrated accumulation (coulomb counting)
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoulombPlacement {
    /// Between transducer and storage: inflow only.
    PreStorage,
    /// After storage: signed flow, up/down counting.
    PostStorage,
}

/// Quantized energy accumulation meter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoulombSpec {
    /// Energy quantum that triggers one accumulation event.
    pub delta_e_j: f64,
    /// Energy consumed to process one counting event.
    pub event_cost_j: f64,
    /// Quiescent background power.
    pub quiescent_w: f64,
    pub placement: CoulombPlacement,
    /// Probability of missing an event (fast surges, integrator leakage).
    #[serde(default)]
    pub miss_probability: f64,
}

impl CoulombSpec {
    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.delta_e_j > 0.0) {
            out.push(format!("{prefix}.delta_e_j: must be > 0"));
        }
        if self.event_cost_j < 0.0 {
            out.push(format!("{prefix}.event_cost_j: must be >= 0"));
        }
        if self.quiescent_w < 0.0 {
            out.push(format!("{prefix}.quiescent_w: must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.miss_probability) {
            out.push(format!("{prefix}.miss_probability: must be in [0, 1]"));
        }
        out
    }
}

/// Stateful counter. The sub-quantum remainder carries across calls, like a
/// physical integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct CoulombCounter {
    pub spec: CoulombSpec,
    remainder_j: f64,
    net_events: i64,
    true_flow_j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombStep {
    /// Events registered this call (negative for down-counting).
    pub events: i64,
    /// Cumulative estimate: net event count times the quantum.
    pub estimate_j: f64,
    /// Acquisition cost of this interval.
    pub cost_j: f64,
}

impl CoulombCounter {
    pub fn new(spec: CoulombSpec) -> Self {
        CoulombCounter { spec, remainder_j: 0.0, net_events: 0, true_flow_j: 0.0 }
    }

    /// Accumulate `e_flow_j` over [t0, t1]. Cost is quiescent power over the
    /// interval plus the per-event processing energy.
    pub fn step(
        &mut self,
        e_flow_j: f64,
        t0_s: f64,
        t1_s: f64,
        rng: &mut Rng,
    ) -> Result<CoulombStep, EiError> {
        if self.spec.placement == CoulombPlacement::PreStorage && e_flow_j < 0.0 {
            return Err(EiError::NegativeFlowPreStorage);
        }
        self.true_flow_j += e_flow_j;
        let acc = self.remainder_j + e_flow_j;
        let mut events = (acc / self.spec.delta_e_j).trunc() as i64;
        self.remainder_j = acc - events as f64 * self.spec.delta_e_j;
        if self.spec.miss_probability > 0.0 {
            let mut kept = 0i64;
            for _ in 0..events.abs() {
                if !rng.bernoulli(self.spec.miss_probability) {
                    kept += 1;
                }
            }
            events = kept * events.signum();
        }
        self.net_events += events;
        let cost = (t1_s - t0_s) * self.spec.quiescent_w
            + events.unsigned_abs() as f64 * self.spec.event_cost_j;
        Ok(CoulombStep { events, estimate_j: self.estimate_j(), cost_j: cost })
    }

    pub fn estimate_j(&self) -> f64 {
        self.net_events as f64 * self.spec.delta_e_j
    }

    pub fn true_flow_j(&self) -> f64 {
        self.true_flow_j
    }
}

// ============================================================================
// Indirect EI
// ============================================================================

/// Ambient-sensor based estimation: sense the ambient quantity, map it to an
/// estimated harvest power through a calibration curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndirectSpec {
    /// Monotone calibration breakpoints (ambient reading -> harvest power).
    pub mapping: Vec<(f64, f64)>,
    pub sensor: SamplerSpec,
    /// Relative bias of the calibration curve.
    pub map_bias_rel: f64,
    /// Standard deviation of the relative calibration error.
    pub map_noise_rel: f64,
}

impl IndirectSpec {
    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut out = self.sensor.violations(&format!("{prefix}.sensor"));
        if self.mapping.len() < 2 {
            out.push(format!("{prefix}.mapping: need at least two breakpoints"));
        }
        if self.mapping.windows(2).any(|w| w[1].0 <= w[0].0) {
            out.push(format!("{prefix}.mapping: ambient values must be strictly increasing"));
        }
        if self.mapping.windows(2).any(|w| w[1].1 < w[0].1) {
            out.push(format!("{prefix}.mapping: must be monotone non-decreasing"));
        }
        if self.map_noise_rel < 0.0 {
            out.push(format!("{prefix}.map_noise_rel: must be >= 0"));
        }
        out
    }

    /// Calibration curve evaluated without sensor or mapping error.
    pub fn map(&self, ambient: f64) -> f64 {
        let pts = &self.mapping;
        if pts.is_empty() {
            return 0.0;
        }
        if ambient <= pts[0].0 {
            return pts[0].1;
        }
        if ambient >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let idx = pts.partition_point(|p| p.0 <= ambient);
        let (a, b) = (pts[idx - 1], pts[idx]);
        let w = (ambient - a.0) / (b.0 - a.0);
        a.1 + w * (b.1 - a.1)
    }

    /// Estimated harvest power from sensing the ambient quantity, with both
    /// the sensor error model and the calibration error applied.
    pub fn observe(
        &self,
        true_ambient: f64,
        t_s: f64,
        temp_k: f64,
        rng: &mut Rng,
    ) -> (f64, f64) {
        let reading = self.sensor.sample_read(true_ambient, t_s, temp_k, rng);
        let noise = if self.map_noise_rel > 0.0 {
            1.0 + self.map_noise_rel * rng.gauss()
        } else {
            1.0
        };
        let est = (self.map(reading.reading_v) * (1.0 + self.map_bias_rel) * noise).max(0.0);
        (est, reading.cost_j)
    }
}

/// Software-only rate estimate from the elapsed time between well-defined
/// system events (threshold crossings). Needs at least two crossings;
/// returns the threshold gap divided by the mean inter-crossing interval.
pub fn time_to_event_estimate(crossing_times_s: &[f64], threshold_gap: f64) -> Option<f64> {
    if crossing_times_s.len() < 2 {
        return None;
    }
    let n = crossing_times_s.len();
    let span = crossing_times_s[n - 1] - crossing_times_s[0];
    if span <= 0.0 {
        return None;
    }
    let mean_interval = span / (n - 1) as f64;
    Some(threshold_gap / mean_interval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_stream;

    #[test]
    fn comparator_power_single_threshold() {
        let spec = ComparatorSpec::new(vec![2.0], 100e-9, 3.0);
        assert!((spec.power_w() - 300e-9).abs() < 1e-18);
    }

    #[test]
    fn comparator_power_worst_case_linear() {
        let spec = ComparatorSpec::new(vec![1.0, 2.0, 3.0, 4.0], 100e-9, 3.0);
        assert!((spec.power_w() - 1.2e-6).abs() < 1e-15);
    }

    #[test]
    fn comparator_power_shared_ladder_table() {
        let spec = ComparatorSpec {
            thresholds: vec![1.0, 2.0, 3.0, 4.0],
            i_sb_a: 100e-9,
            v_dd_v: 3.0,
            scaling: ComparatorScaling::Table(vec![1.0, 1.4, 1.7, 2.0]),
        };
        assert!(spec.violations("c").is_empty());
        assert!((spec.power_w() - 600e-9).abs() < 1e-15);
    }

    #[test]
    fn comparator_flags() {
        let spec = ComparatorSpec::new(vec![2.0, 4.0], 100e-9, 3.0);
        assert_eq!(spec.observe(3.0), vec![true, false]);
        assert_eq!(spec.observe(1.0), vec![false, false]);
        // Closed boundary: level == threshold counts as exceeded.
        assert_eq!(spec.observe(4.0), vec![true, true]);
    }

    #[test]
    fn sample_cost_components() {
        let mut spec = SamplerSpec::ideal(8, 1.0);
        spec.p_an_w = 1e-6;
        spec.t_m_s = 10e-3;
        spec.switching = SwitchingCap::DirectF(1e-12);
        spec.v_dd_v = 3.0;
        assert!((spec.sample_cost_j() - 1.0009e-8).abs() < 1e-14);
        // Degenerate t_m = 0 leaves only the switching term.
        spec.t_m_s = 0.0;
        assert!((spec.sample_cost_j() - 9e-12).abs() < 1e-18);
    }

    #[test]
    fn sar_switching_cap_doubles_per_bit() {
        let mut spec = SamplerSpec::ideal(8, 1.0);
        spec.switching = SwitchingCap::Sar { unit_c_f: 10e-15 };
        let c8 = spec.c_s_f();
        spec.n_bits = 9;
        assert!((spec.c_s_f() / c8 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn noise_free_high_resolution_reading() {
        let spec = SamplerSpec::ideal(24, 3.0);
        let mut rng = rng_stream(1, 0, "sampler");
        let r = spec.sample_read(1.5, 0.0, 293.15, &mut rng);
        assert!(!r.saturated);
        assert!((r.reading_v - 1.5).abs() <= 3.0 / (1u64 << 24) as f64);
    }

    #[test]
    fn quantization_bound_holds_on_every_draw() {
        let mut spec = SamplerSpec::ideal(8, 1.0);
        spec.thermal_a = 1e-12;
        spec.t_m_s = 1e-3;
        let bound = 1.0 / (1u64 << 9) as f64; // V_r / 2^(N+1)
        let mut rng = rng_stream(2, 0, "sampler");
        for i in 0..20_000 {
            let true_v = rng.uniform(0.05, 0.95);
            let r = spec.sample_read(true_v, i as f64, 293.15, &mut rng);
            if !r.saturated {
                assert!(
                    (r.reading_v - r.pre_quantization_v).abs() <= bound + 1e-15,
                    "bound violated at draw {i}"
                );
            }
        }
    }

    #[test]
    fn quantization_variance_matches_closed_form() {
        // Monte-Carlo estimate of the quantization error variance against
        // V_r^2 / (3 * 2^(2N+2)) for uniform inputs.
        let spec = SamplerSpec::ideal(8, 1.0);
        let sigma_q2 = 1.0 / (3.0 * (1u64 << 18) as f64);
        let mut rng = rng_stream(3, 0, "quant-var");
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let x = rng.uniform(0.0, 1.0);
            let err = spec.quantize(x) - x;
            sum += err;
            sum_sq += err * err;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(
            (var - sigma_q2).abs() / sigma_q2 < 0.02,
            "var {var} vs closed form {sigma_q2}"
        );
    }

    #[test]
    fn thermal_variance_matches_a_over_tm() {
        let mut spec = SamplerSpec::ideal(20, 4.0);
        spec.thermal_a = 1e-12;
        spec.t_m_s = 1e-3;
        let sigma_t2 = 1e-9;
        let mut rng = rng_stream(4, 0, "thermal-var");
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let r = spec.sample_read(2.0, 0.0, 293.15, &mut rng);
            let err = r.pre_quantization_v - 2.0;
            sum += err;
            sum_sq += err * err;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(
            (var - sigma_t2).abs() / sigma_t2 < 0.02,
            "var {var} vs sigma_t^2 {sigma_t2}"
        );
    }

    #[test]
    fn offset_is_deterministic_in_time_and_temperature() {
        let mut spec = SamplerSpec::ideal(12, 3.0);
        spec.alpha_v_per_k = 1e-4;
        spec.beta_v_per_s = 1e-7;
        spec.eps0_init_v = 0.001;
        let a = spec.offset_v(100.0, 300.0);
        let b = spec.offset_v(100.0, 300.0);
        assert_eq!(a, b);
        assert!((a - (0.001 + 1e-4 * (300.0 - 293.15) + 1e-7 * 100.0)).abs() < 1e-15);
    }

    #[test]
    fn saturation_flagged() {
        let mut spec = SamplerSpec::ideal(8, 1.0);
        spec.eps0_init_v = 0.5;
        let mut rng = rng_stream(5, 0, "sat");
        let r = spec.sample_read(0.9, 0.0, 293.15, &mut rng);
        assert!(r.saturated);
        assert!(r.reading_v <= 1.0);
    }

    fn counter(delta_e: f64) -> CoulombCounter {
        CoulombCounter::new(CoulombSpec {
            delta_e_j: delta_e,
            event_cost_j: 0.0,
            quiescent_w: 0.0,
            placement: CoulombPlacement::PreStorage,
            miss_probability: 0.0,
        })
    }

    #[test]
    fn coulomb_floor_counting() {
        let mut c = counter(1e-3);
        let mut rng = rng_stream(6, 0, "coulomb");
        let s = c.step(2.5e-3, 0.0, 1.0, &mut rng).unwrap();
        assert_eq!(s.events, 2);
        assert!((s.estimate_j - 2e-3).abs() < 1e-18);
        let residual = c.true_flow_j() - s.estimate_j;
        assert!((0.0..1e-3).contains(&residual));
    }

    #[test]
    fn coulomb_cost_formula() {
        let mut c = CoulombCounter::new(CoulombSpec {
            delta_e_j: 1e-3,
            event_cost_j: 1e-6,
            quiescent_w: 1e-6,
            placement: CoulombPlacement::PreStorage,
            miss_probability: 0.0,
        });
        let mut rng = rng_stream(6, 0, "coulomb");
        let s = c.step(2.5e-3, 0.0, 10.0, &mut rng).unwrap();
        assert!((s.cost_j - 12e-6).abs() < 1e-15);
    }

    #[test]
    fn coulomb_remainder_carries_across_calls() {
        let mut c = counter(1.0);
        let mut rng = rng_stream(7, 0, "coulomb");
        assert_eq!(c.step(0.6, 0.0, 1.0, &mut rng).unwrap().events, 0);
        assert_eq!(c.step(0.6, 1.0, 2.0, &mut rng).unwrap().events, 1);
    }

    #[test]
    fn coulomb_error_moments() {
        // Mean error Delta_E/2, variance Delta_E^2/12 over uniform flows.
        let delta_e = 1.0;
        let mut rng = rng_stream(8, 0, "coulomb-moments");
        let trials = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..trials {
            let mut c = counter(delta_e);
            let flow = rng.uniform(0.0, 20.0);
            let s = c.step(flow, 0.0, 1.0, &mut rng).unwrap();
            let err = flow - s.estimate_j;
            sum += err;
            sum_sq += err * err;
        }
        let mean = sum / trials as f64;
        let var = sum_sq / trials as f64 - mean * mean;
        assert!((mean - delta_e / 2.0).abs() / (delta_e / 2.0) < 0.02, "mean {mean}");
        assert!(
            (var - delta_e * delta_e / 12.0).abs() / (delta_e * delta_e / 12.0) < 0.05,
            "var {var}"
        );
    }

    #[test]
    fn coulomb_estimate_never_exceeds_flow() {
        let mut c = counter(0.7);
        let mut rng = rng_stream(9, 0, "coulomb-bound");
        for _ in 0..10_000 {
            let flow = rng.uniform(0.0, 3.0);
            let s = c.step(flow, 0.0, 1.0, &mut rng).unwrap();
            let gap = c.true_flow_j() - s.estimate_j;
            assert!(gap >= -1e-9 && gap < 0.7 * (1.0 + 1e-9), "gap {gap}");
        }
    }

    #[test]
    fn coulomb_post_storage_signed_counting() {
        let mut c = CoulombCounter::new(CoulombSpec {
            delta_e_j: 1.0,
            event_cost_j: 0.0,
            quiescent_w: 0.0,
            placement: CoulombPlacement::PostStorage,
            miss_probability: 0.0,
        });
        let mut rng = rng_stream(10, 0, "coulomb-signed");
        assert_eq!(c.step(2.5, 0.0, 1.0, &mut rng).unwrap().events, 2);
        // Accumulator 0.5 - 3.2 = -2.7: two down-events, remainder -0.7.
        let s = c.step(-3.2, 1.0, 2.0, &mut rng).unwrap();
        assert_eq!(s.events, -2);
        assert!(s.estimate_j.abs() < 1e-12);
        // Net flow -0.7 versus estimate 0: error stays within one quantum.
        assert!((c.true_flow_j() - s.estimate_j).abs() < 1.0);
    }

    #[test]
    fn coulomb_pre_storage_rejects_negative_flow() {
        let mut c = counter(1.0);
        let mut rng = rng_stream(11, 0, "coulomb-neg");
        assert_eq!(
            c.step(-0.5, 0.0, 1.0, &mut rng),
            Err(EiError::NegativeFlowPreStorage)
        );
    }

    #[test]
    fn time_to_event_rate() {
        assert_eq!(time_to_event_estimate(&[0.0, 5.0, 10.0, 15.0], 1.0), Some(0.2));
        // Single crossing: no estimate.
        assert_eq!(time_to_event_estimate(&[3.0], 1.0), None);
        // Noisy intervals {4, 5, 6} average to 5.
        let rate = time_to_event_estimate(&[0.0, 4.0, 9.0, 15.0], 1.0).unwrap();
        assert!((rate - 0.2).abs() < 1e-12);
    }

    #[test]
    fn indirect_mapping_interpolates_monotone() {
        let spec = IndirectSpec {
            mapping: vec![(0.0, 0.0), (1.0, 2e-3), (2.0, 3e-3)],
            sensor: SamplerSpec::ideal(16, 3.0),
            map_bias_rel: 0.0,
            map_noise_rel: 0.0,
        };
        assert!(spec.violations("ind").is_empty());
        assert!((spec.map(0.5) - 1e-3).abs() < 1e-12);
        assert!((spec.map(1.5) - 2.5e-3).abs() < 1e-12);
        // Clamped outside the table.
        assert_eq!(spec.map(-1.0), 0.0);
        assert!((spec.map(5.0) - 3e-3).abs() < 1e-15);

        let mut rng = rng_stream(12, 0, "indirect");
        let (est, cost) = spec.observe(1.0, 0.0, 293.15, &mut rng);
        assert!((est - 2e-3).abs() < 1e-4);
        assert!(cost >= 0.0);
    }
}
