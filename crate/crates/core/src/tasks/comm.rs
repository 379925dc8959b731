//! Canonical communication finite-state machine for a low-power radio.
//!
//! A transaction is the active state sequence between two deep-sleep rests;
//! deep sleep itself brackets every transaction and is charged to standby,
//! not to the transaction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CommError {
    #[error("transaction sequence must not be empty")]
    EmptyTransaction,
    #[error("deep-sleep may only bracket a transaction, not appear inside it")]
    DeepSleepInsideTransaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadioState {
    DeepSleep,
    Idle,
    PrepareTx,
    Tx,
    /// Covers both RX preparation and contention back-off.
    PrepareRx,
    /// RX or listen (preamble, beacon, ACK).
    Rx,
}

/// Power draw and dwell time of one radio state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePower {
    pub power_w: f64,
    pub duration_s: f64,
}

impl PhasePower {
    pub fn new(power_w: f64, duration_s: f64) -> Self {
        PhasePower { power_w, duration_s }
    }

    pub fn energy_j(&self) -> f64 {
        self.power_w * self.duration_s
    }
}

/// Per-state power/duration table of one radio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommProfile {
    pub deep_sleep: PhasePower,
    pub idle: PhasePower,
    pub prepare_tx: PhasePower,
    pub tx: PhasePower,
    pub prepare_rx: PhasePower,
    pub rx: PhasePower,
}

impl CommProfile {
    pub fn phase(&self, state: RadioState) -> PhasePower {
        match state {
            RadioState::DeepSleep => self.deep_sleep,
            RadioState::Idle => self.idle,
            RadioState::PrepareTx => self.prepare_tx,
            RadioState::Tx => self.tx,
            RadioState::PrepareRx => self.prepare_rx,
            RadioState::Rx => self.rx,
        }
    }

    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        for (name, p) in [
            ("deep_sleep", self.deep_sleep),
            ("idle", self.idle),
            ("prepare_tx", self.prepare_tx),
            ("tx", self.tx),
            ("prepare_rx", self.prepare_rx),
            ("rx", self.rx),
        ] {
            if p.power_w < 0.0 {
                out.push(format!("{prefix}.{name}.power_w: must be >= 0"));
            }
            if p.duration_s < 0.0 {
                out.push(format!("{prefix}.{name}.duration_s: must be >= 0"));
            }
        }
        out
    }
}

/// Transaction templates over the FSM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transaction {
    /// Unidirectional uplink: prepare-TX, TX.
    TxOnly,
    /// Uplink expecting an acknowledgement: prepare-TX, TX, prepare-RX, RX.
    TxAck,
    /// Receiver-initiated poll: prepare-RX, RX.
    RxPoll,
    Custom(Vec<RadioState>),
}

impl Transaction {
    pub fn states(&self) -> Result<Vec<RadioState>, CommError> {
        let seq = match self {
            Transaction::TxOnly => vec![RadioState::PrepareTx, RadioState::Tx],
            Transaction::TxAck => vec![
                RadioState::PrepareTx,
                RadioState::Tx,
                RadioState::PrepareRx,
                RadioState::Rx,
            ],
            Transaction::RxPoll => vec![RadioState::PrepareRx, RadioState::Rx],
            Transaction::Custom(seq) => seq.clone(),
        };
        if seq.is_empty() {
            return Err(CommError::EmptyTransaction);
        }
        if seq.contains(&RadioState::DeepSleep) {
            return Err(CommError::DeepSleepInsideTransaction);
        }
        Ok(seq)
    }
}

/// Energy and duration of one transaction: the sum of P*t along the state
/// sequence.
pub fn comm_transaction(profile: &CommProfile, txn: &Transaction) -> Result<(f64, f64), CommError> {
    let mut energy = 0.0;
    let mut duration = 0.0;
    for state in txn.states()? {
        let p = profile.phase(state);
        energy += p.energy_j();
        duration += p.duration_s;
    }
    Ok((energy, duration))
}

/// Named radio profiles with published per-state magnitudes.
pub mod comm_presets {
    use super::*;

    /// LoRaWAN-class device at 3.3 V: sensing/prepare 17 mA for 8 ms,
    /// TX 50 mA for 50 ms, ACK listen 22.5 mA (midpoint of 17-28 mA) for
    /// the given window, deep sleep 0.4 uA.
    pub fn lorawan_like(ack_listen_s: f64) -> CommProfile {
        let vdd = 3.3;
        CommProfile {
            deep_sleep: PhasePower::new(0.4e-6 * vdd, 0.0),
            idle: PhasePower::new(2.0e-3 * vdd, 1e-3),
            prepare_tx: PhasePower::new(17e-3 * vdd, 8e-3),
            tx: PhasePower::new(50e-3 * vdd, 50e-3),
            prepare_rx: PhasePower::new(17e-3 * vdd, 1e-3),
            rx: PhasePower::new(22.5e-3 * vdd, ack_listen_s),
        }
    }

    /// Rejoin burst after a power cycle for the LoRaWAN-class device:
    /// 13 mA at 3.3 V for 13 s.
    pub fn lorawan_rejoin() -> PhasePower {
        PhasePower::new(13e-3 * 3.3, 13.0)
    }

    /// NB-IoT-class chipset behind a 3.3 V rail: roughly 50 mJ per
    /// unidirectional packet, PSM floor in the tens of microwatts.
    pub fn nbiot_like() -> CommProfile {
        CommProfile {
            deep_sleep: PhasePower::new(30e-6, 0.0),
            idle: PhasePower::new(10e-3, 10e-3),
            prepare_tx: PhasePower::new(50e-3, 0.2),
            tx: PhasePower::new(200e-3, 0.2),
            prepare_rx: PhasePower::new(40e-3, 0.05),
            rx: PhasePower::new(80e-3, 0.25),
        }
    }
}
