//! Actuator energy models for the actuator classes common in low-power
//! devices, with datasheet-derived presets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ActuatorError {
    #[error("servo stall: load torque ratio {lambda} >= 1")]
    ServoStall { lambda: f64 },
    #[error("invalid actuator parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Actuator classes and their energy-relevant parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActuatorProfile {
    /// Electrostatic MEMS micro-valve/mirror; worst case dumps the electrode
    /// charge after switching: E = C_M (V1^2 - V2^2) / 2.
    MemsSwitch { c_m_f: f64, v1_v: f64, v2_v: f64, t_switch_s: f64 },
    /// E = V_F * I_F * t.
    Led { v_f_v: f64, i_f_a: f64, t_on_s: f64 },
    /// E = C_p * V_d^2 / 2 per actuation.
    Piezo { c_p_f: f64, v_drive_v: f64, t_pulse_s: f64 },
    /// Latching solenoid/relay: E = V_op^2 * t_p / R_c per switch.
    Solenoid { v_op_v: f64, r_coil_ohm: f64, t_pulse_s: f64 },
    /// E-ink refresh from drive current: E = V_d * I_u * t_u.
    EinkPanel { v_d_v: f64, i_u_a: f64, t_u_s: f64 },
    /// E-ink refresh from an energy-per-area figure: E = A * E_A.
    EinkArea { area_m2: f64, e_per_area_j_m2: f64, t_u_s: f64 },
    /// Shape-memory-alloy wire: t_heat = m c_p dT / (I^2 R),
    /// E = I^2 R t_heat, plus passive cooling afterwards.
    SmaWire {
        r_ohm: f64,
        i_rec_a: f64,
        delta_t_k: f64,
        thermal_mass_j_per_k: f64,
        cool_s: f64,
    },
    /// Micro-servo move+hold:
    /// I_avg = I_0 + tau_L/K_t, lambda = tau_L/(K_t I_s),
    /// t_mv = theta/(omega_0 (1 - lambda)),
    /// E = V_s I_avg t_mv + V_s I_hl t_hl.
    Servo {
        v_s_v: f64,
        i_noload_a: f64,
        i_stall_a: f64,
        k_t_nm_per_a: f64,
        omega0_rad_s: f64,
        theta_rad: f64,
        tau_load_nm: f64,
        i_hold_a: f64,
        t_hold_s: f64,
    },
}

/// Energy and duration of one actuation event.
pub fn actuator_energy(profile: &ActuatorProfile) -> Result<(f64, f64), ActuatorError> {
    match *profile {
        ActuatorProfile::MemsSwitch { c_m_f, v1_v, v2_v, t_switch_s } => {
            Ok((0.5 * c_m_f * (v1_v * v1_v - v2_v * v2_v), t_switch_s))
        }
        ActuatorProfile::Led { v_f_v, i_f_a, t_on_s } => Ok((v_f_v * i_f_a * t_on_s, t_on_s)),
        ActuatorProfile::Piezo { c_p_f, v_drive_v, t_pulse_s } => {
            Ok((0.5 * c_p_f * v_drive_v * v_drive_v, t_pulse_s))
        }
        ActuatorProfile::Solenoid { v_op_v, r_coil_ohm, t_pulse_s } => {
            if !(r_coil_ohm > 0.0) {
                return Err(ActuatorError::InvalidParameter("r_coil_ohm must be > 0"));
            }
            Ok((v_op_v * v_op_v * t_pulse_s / r_coil_ohm, t_pulse_s))
        }
        ActuatorProfile::EinkPanel { v_d_v, i_u_a, t_u_s } => Ok((v_d_v * i_u_a * t_u_s, t_u_s)),
        ActuatorProfile::EinkArea { area_m2, e_per_area_j_m2, t_u_s } => {
            Ok((area_m2 * e_per_area_j_m2, t_u_s))
        }
        ActuatorProfile::SmaWire { r_ohm, i_rec_a, delta_t_k, thermal_mass_j_per_k, cool_s } => {
            let heat_power = i_rec_a * i_rec_a * r_ohm;
            if !(heat_power > 0.0) {
                return Err(ActuatorError::InvalidParameter("I^2*R must be > 0"));
            }
            let t_heat = thermal_mass_j_per_k * delta_t_k / heat_power;
            Ok((heat_power * t_heat, t_heat + cool_s))
        }
        ActuatorProfile::Servo {
            v_s_v,
            i_noload_a,
            i_stall_a,
            k_t_nm_per_a,
            omega0_rad_s,
            theta_rad,
            tau_load_nm,
            i_hold_a,
            t_hold_s,
        } => {
            let lambda = tau_load_nm / (k_t_nm_per_a * i_stall_a);
            if lambda >= 1.0 {
                return Err(ActuatorError::ServoStall { lambda });
            }
            let i_avg = i_noload_a + tau_load_nm / k_t_nm_per_a;
            let t_mv = theta_rad / (omega0_rad_s * (1.0 - lambda));
            let e_move = v_s_v * i_avg * t_mv;
            let e_hold = v_s_v * i_hold_a * t_hold_s;
            Ok((e_move + e_hold, t_mv + t_hold_s))
        }
    }
}

/// Datasheet-derived presets for the published example column.
pub mod table4 {
    use super::ActuatorProfile;

    /// Mirrorcle A3I8.2 dual-axis MEMS mirror: 100 pF, 70 V pull-in.
    pub fn mems_mirror() -> ActuatorProfile {
        ActuatorProfile::MemsSwitch { c_m_f: 100e-12, v1_v: 70.0, v2_v: 0.0, t_switch_s: 260e-6 }
    }

    /// Kingbright WP7104 red 3 mm LED: 2 V, 10 mA, 20 ms blink.
    pub fn led_blink() -> ActuatorProfile {
        ActuatorProfile::Led { v_f_v: 2.0, i_f_a: 10e-3, t_on_s: 20e-3 }
    }

    /// TDK PowerHap 1204: 0.5 uF at 60 V drive.
    pub fn piezo_haptic() -> ActuatorProfile {
        ActuatorProfile::Piezo { c_p_f: 0.5e-6, v_drive_v: 60.0, t_pulse_s: 2.5e-3 }
    }

    /// Ledex 124-131-012 latching solenoid: 5 V, 160 ohm, 20 ms pulse.
    pub fn solenoid_latch() -> ActuatorProfile {
        ActuatorProfile::Solenoid { v_op_v: 5.0, r_coil_ohm: 160.0, t_pulse_s: 20e-3 }
    }

    /// 1.54" Waveshare e-paper: 3.3 V, 18 mA, 0.5 s full refresh.
    pub fn eink_refresh() -> ActuatorProfile {
        ActuatorProfile::EinkPanel { v_d_v: 3.3, i_u_a: 18e-3, t_u_s: 0.5 }
    }

    /// Flexinol 100 um wire: 6.2 ohm, 0.25 A, 50 K rise, 1.62e-3 J/K.
    pub fn sma_wire() -> ActuatorProfile {
        ActuatorProfile::SmaWire {
            r_ohm: 6.2,
            i_rec_a: 0.25,
            delta_t_k: 50.0,
            thermal_mass_j_per_k: 1.62e-3,
            cool_s: 1.25,
        }
    }

    /// SG90-class pan-tilt micro-servo. The published example row lists
    /// I_avg = 0.21 A and t_mv = 0.25 s but not the load torque and sweep
    /// angle behind them; tau_L = 0.0493 N*m and theta = 1.55875 rad are
    /// back-derived so the row's figures are reproduced exactly:
    /// I_avg = 0.04 + 0.0493/0.29 = 0.21 A,
    /// lambda = 0.0493/(0.29*0.6) = 0.28333,
    /// t_mv = 1.55875/(8.7*(1-0.28333)) = 0.25 s.
    pub fn servo_pan_tilt() -> ActuatorProfile {
        ActuatorProfile::Servo {
            v_s_v: 5.0,
            i_noload_a: 0.04,
            i_stall_a: 0.6,
            k_t_nm_per_a: 0.29,
            omega0_rad_s: 8.7,
            theta_rad: 1.55875,
            tau_load_nm: 0.0493,
            i_hold_a: 0.15,
            t_hold_s: 1.0,
        }
    }
}
