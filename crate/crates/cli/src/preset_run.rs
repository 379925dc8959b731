//! Preset execution: each preset writes one figure-ready CSV.

use std::fmt::Write as _;
use std::path::Path;

use zedsim::engine::sweep;
use zedsim::forecast::{arima_fit, irradiance_to_energy, waiting_slots};
use zedsim::policy::rf::{
    dc_combining_power, genie_power, rf_dc_power, rf_explore_exploit, static_config, RfScene,
};
use zedsim::presets::{self, PresetKind, RfPresetConfig, SolarPresetConfig};
use zedsim::rng::rng_stream;

use crate::output::{csv_field, metric_cells, METRIC_COLUMNS};
use crate::CliError;

pub fn cmd_preset_run(name: &str, out_dir: &Path, jobs: usize) -> Result<(), CliError> {
    let entry = presets::get(name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown preset {name:?}; available: {}",
            presets::names().join(", ")
        ))
    })?;
    std::fs::create_dir_all(out_dir)?;
    let out_path = out_dir.join(format!("{name}.csv"));
    let csv = match entry.kind {
        PresetKind::Engine { variants, seeds } => {
            let mut text = format!("scheme,param,seed,{METRIC_COLUMNS},completed,defers,model_selections\n");
            for variant in variants {
                let axes = variant.axis.clone().into_iter().collect::<Vec<_>>();
                let rows = sweep(&variant.config, &axes, &seeds, jobs)?;
                for row in rows {
                    let param = row.axis_values.first().copied().unwrap_or(0.0);
                    let selections: Vec<String> =
                        row.metrics.model_selections.iter().map(|c| c.to_string()).collect();
                    let _ = writeln!(
                        text,
                        "{},{param},{},{},{},{},{}",
                        csv_field(variant.label),
                        row.seed,
                        metric_cells(&row.metrics),
                        row.metrics.completed,
                        row.metrics.defers,
                        selections.join(";"),
                    );
                }
            }
            text
        }
        PresetKind::RfCombining(cfg) => run_rf_preset(&cfg),
        PresetKind::SolarForecast(cfg) => run_solar_preset(&cfg)?,
    };
    std::fs::write(&out_path, csv)?;
    println!("wrote {}", out_path.display());
    Ok(())
}

/// Scene-averaged net power of the four strategies per antenna count and
/// overhead level.
fn run_rf_preset(cfg: &RfPresetConfig) -> String {
    let mut text = String::from("antennas,overhead_w,dc_w,static_w,dynamic_w,genie_w\n");
    for &m in &cfg.antenna_counts {
        // One scene set per antenna count, shared across overhead levels.
        let mut rng = rng_stream(cfg.seed, m as u64, "rf-scenes");
        let template = RfScene {
            antennas: m,
            spacing_wavelengths: cfg.spacing_wavelengths,
            tx_power_w: cfg.tx_power_w,
            path_loss_exponent: cfg.path_loss_exponent,
            ref_loss_db: cfg.ref_loss_db,
            eh_efficiency: cfg.eh_efficiency,
            source_distance_m: 1.0,
            source_angle_rad: 0.0,
            tune_power_w: 0.0,
            meas_power_w: 0.0,
        };
        let scenes: Vec<RfScene> = (0..cfg.scenes)
            .map(|_| template.clone().with_random_source(cfg.disk_radius_m, &mut rng))
            .collect();
        let n = scenes.len() as f64;
        let dc: f64 = scenes.iter().map(dc_combining_power).sum::<f64>() / n;
        let st: f64 =
            scenes.iter().map(|s| rf_dc_power(s, &static_config(m))).sum::<f64>() / n;
        let genie: f64 = scenes.iter().map(|s| genie_power(s).1).sum::<f64>() / n;
        for &overhead in &cfg.overhead_powers_w {
            let mut dynamic = 0.0;
            for scene in &scenes {
                let s = RfScene {
                    tune_power_w: overhead,
                    meas_power_w: overhead,
                    ..scene.clone()
                };
                dynamic += rf_explore_exploit(&s, &cfg.schedule, &mut rng).net_power_w;
            }
            dynamic /= n;
            let _ = writeln!(text, "{m},{overhead},{dc},{st},{dynamic},{genie}");
        }
    }
    text
}

/// Walk-forward forecast pipeline over one synthetic day.
fn run_solar_preset(cfg: &SolarPresetConfig) -> Result<String, CliError> {
    let trace = presets::synthetic_irradiance(cfg);
    let warmup = cfg.slots / 4;
    let model = arima_fit(&trace[..warmup], cfg.ar_order, cfg.differencing)
        .map_err(|e| CliError::Runtime(format!("forecast fit failed: {e}")))?;

    let mut text =
        String::from("slot,t_s,irradiance_wm2,forecast_wm2,pred_energy_j,actual_energy_j,waiting_slots\n");
    let mut m = model;
    for s in warmup..cfg.slots - 1 {
        let horizon = m
            .forecast(cfg.horizon_slots)
            .map_err(|e| CliError::Runtime(format!("forecast failed: {e}")))?;
        let next = horizon[0];
        let pred_e = irradiance_to_energy(trace[s], next, &cfg.panel);
        let actual_e = irradiance_to_energy(trace[s], trace[s + 1], &cfg.panel);
        // Expected harvested energy per future slot over the horizon.
        let mut slot_energies = Vec::with_capacity(horizon.len());
        let mut prev = trace[s];
        for &f in &horizon {
            slot_energies.push(irradiance_to_energy(prev, f, &cfg.panel));
            prev = f;
        }
        let wait = match waiting_slots(cfg.task_energy_j, &slot_energies) {
            Ok(n) => n as i64,
            Err(_) => -1,
        };
        let _ = writeln!(
            text,
            "{s},{},{},{next},{pred_e},{actual_e},{wait}",
            s as f64 * cfg.panel.slot_s,
            trace[s]
        );
        m.observe(trace[s + 1]);
    }
    Ok(text)
}
