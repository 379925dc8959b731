//! Dynamic RF energy combining: a multi-antenna harvester explores a DFT
//! phase-shift codebook, measures the DC output of each entry, and exploits
//! the best one. Benchmarks: per-branch DC combining (incoherent), a static
//! wide-beam configuration, and a cost-free genie.

use serde::{Deserialize, Serialize};

use crate::rng::Rng;

/// Ambient RF harvesting scene for one source position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfScene {
    /// Antenna count M; the codebook has M entries.
    pub antennas: usize,
    /// Element spacing as a fraction of the wavelength.
    pub spacing_wavelengths: f64,
    pub tx_power_w: f64,
    pub path_loss_exponent: f64,
    /// Reference loss at 1 m, in dB.
    pub ref_loss_db: f64,
    /// RF-to-DC conversion efficiency.
    pub eh_efficiency: f64,
    pub source_distance_m: f64,
    /// Angle of arrival relative to array broadside.
    pub source_angle_rad: f64,
    /// Power for tuning one antenna phase shifter (P_c).
    pub tune_power_w: f64,
    /// Power for one EI measurement after a test configuration (P_c').
    pub meas_power_w: f64,
}

impl RfScene {
    /// Scene with the source placed uniformly in a disk of the given radius
    /// (distance floored at the 1 m reference to keep the path-loss model in
    /// its validity region).
    pub fn with_random_source(mut self, disk_radius_m: f64, rng: &mut Rng) -> Self {
        self.source_distance_m = (disk_radius_m * rng.next_f64().sqrt()).max(1.0);
        self.source_angle_rad = rng.uniform(0.0, 2.0 * std::f64::consts::PI);
        self
    }

    /// Received RF power per antenna from the log-distance model:
    /// P_rx = P_tx * 10^(-L0/10) * d^(-n).
    pub fn received_power_per_antenna_w(&self) -> f64 {
        self.tx_power_w
            * 10f64.powf(-self.ref_loss_db / 10.0)
            * self.source_distance_m.powf(-self.path_loss_exponent)
    }

    /// Uniform-linear-array phase of each antenna at the source's angle.
    pub fn steering_phases(&self) -> Vec<f64> {
        let phase_step =
            2.0 * std::f64::consts::PI * self.spacing_wavelengths * self.source_angle_rad.sin();
        (0..self.antennas).map(|k| k as f64 * phase_step).collect()
    }

    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        if self.antennas < 1 {
            out.push(format!("{prefix}.antennas: must be >= 1"));
        }
        if !(self.eh_efficiency > 0.0 && self.eh_efficiency <= 1.0) {
            out.push(format!("{prefix}.eh_efficiency: must be in (0, 1]"));
        }
        if self.tx_power_w < 0.0 {
            out.push(format!("{prefix}.tx_power_w: must be >= 0"));
        }
        if self.tune_power_w < 0.0 || self.meas_power_w < 0.0 {
            out.push(format!("{prefix}: overhead powers must be >= 0"));
        }
        out
    }
}

/// Discrete Fourier codebook: entry m gives antenna k the phase 2*pi*k*m/M.
pub fn dft_codebook(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|entry| {
            (0..m)
                .map(|k| 2.0 * std::f64::consts::PI * (k * entry) as f64 / m as f64)
                .collect()
        })
        .collect()
}

/// Static wide-beam configuration theta = [0, pi, 0, pi, ...]. For even M
/// this is codebook entry M/2.
pub fn static_config(m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| if k % 2 == 0 { 0.0 } else { std::f64::consts::PI })
        .collect()
}

/// Array combining gain |sum_k exp(j(phi_k + theta_k))|^2 / M.
pub fn combining_gain(steering: &[f64], config: &[f64]) -> f64 {
    debug_assert_eq!(steering.len(), config.len());
    let mut re = 0.0;
    let mut im = 0.0;
    for (phi, theta) in steering.iter().zip(config) {
        re += (phi + theta).cos();
        im += (phi + theta).sin();
    }
    (re * re + im * im) / steering.len() as f64
}

/// Harvested DC power for one phase configuration.
pub fn rf_dc_power(scene: &RfScene, config: &[f64]) -> f64 {
    scene.eh_efficiency
        * scene.received_power_per_antenna_w()
        * combining_gain(&scene.steering_phases(), config)
}

/// Per-branch DC combining benchmark: rectify each antenna independently
/// and sum, i.e. the incoherent sum, which under the M-way combiner
/// normalization equals the single-branch power.
pub fn dc_combining_power(scene: &RfScene) -> f64 {
    scene.eh_efficiency * scene.received_power_per_antenna_w()
}

/// Cost-free oracle: exhaustive argmax over the codebook.
/// Returns (entry index, DC power).
pub fn genie_power(scene: &RfScene) -> (usize, f64) {
    let steering = scene.steering_phases();
    let p_branch = scene.eh_efficiency * scene.received_power_per_antenna_w();
    let mut best = (0usize, f64::NEG_INFINITY);
    for (idx, entry) in dft_codebook(scene.antennas).iter().enumerate() {
        let p = p_branch * combining_gain(&steering, entry);
        if p > best.1 {
            best = (idx, p);
        }
    }
    best
}

/// Exploration/exploitation timing. Each tested entry costs the energy of
/// retuning all M shifters plus one measurement; these events are short
/// relative to the exploitation window, so only their energy (amortized
/// over the window) enters the net power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExploreSchedule {
    /// Duration of one phase-shifter tuning event.
    pub tune_time_s: f64,
    /// Duration of one DC-power measurement.
    pub meas_time_s: f64,
    /// Exploitation window the overhead is amortized over.
    pub window_s: f64,
    /// Relative noise on exploration measurements (0 = noise-free).
    pub meas_noise_rel: f64,
}

impl Default for ExploreSchedule {
    fn default() -> Self {
        ExploreSchedule { tune_time_s: 1e-3, meas_time_s: 1e-3, window_s: 1.0, meas_noise_rel: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExploreOutcome {
    /// Codebook entry chosen from the measured DC powers.
    pub selected: usize,
    /// DC power of the selected entry during exploitation.
    pub gross_power_w: f64,
    /// Exploration overhead, amortized over the window.
    pub overhead_power_w: f64,
    /// gross - overhead.
    pub net_power_w: f64,
}

/// Test every codebook entry, select the one with the greatest measured DC
/// power, and report net power over the exploitation window.
pub fn rf_explore_exploit(
    scene: &RfScene,
    schedule: &ExploreSchedule,
    rng: &mut Rng,
) -> ExploreOutcome {
    let steering = scene.steering_phases();
    let p_branch = scene.eh_efficiency * scene.received_power_per_antenna_w();
    let mut selected = 0usize;
    let mut best_measured = f64::NEG_INFINITY;
    let mut best_true = 0.0;
    for (idx, entry) in dft_codebook(scene.antennas).iter().enumerate() {
        let true_power = p_branch * combining_gain(&steering, entry);
        let measured = if schedule.meas_noise_rel > 0.0 {
            true_power * (1.0 + schedule.meas_noise_rel * rng.gauss())
        } else {
            true_power
        };
        if measured > best_measured {
            best_measured = measured;
            selected = idx;
            best_true = true_power;
        }
    }
    let m = scene.antennas as f64;
    let per_entry = m * scene.tune_power_w * schedule.tune_time_s
        + scene.meas_power_w * schedule.meas_time_s;
    let overhead_power = m * per_entry / schedule.window_s;
    ExploreOutcome {
        selected,
        gross_power_w: best_true,
        overhead_power_w: overhead_power,
        net_power_w: best_true - overhead_power,
    }
}
