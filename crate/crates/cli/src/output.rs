//! Output formats: JSON run summaries, sweep CSV, and per-slot trace CSV.
//! Column and key orders are frozen; golden tests pin them.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use zedsim::engine::{Metrics, ScenarioConfig, SweepAxis, SweepRow, TraceRow, TraceSink};

use crate::CliError;

/// Fixed metric column block shared by sweep and preset CSVs.
pub const METRIC_COLUMNS: &str = "task_completion_rate,avg_aoi_slots,net_harvested_power_w,\
throughput_pph,restart_count,harvested_j,delivered_j,leaked_j,spilled_j,acquisition_overhead_j";

/// RFC-style quoting: quote only when the field contains a comma, quote,
/// or newline; embedded quotes are doubled.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn metric_cells(m: &Metrics) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        m.task_completion_rate,
        m.avg_aoi_slots,
        m.net_harvested_power_w,
        m.throughput_pph,
        m.restart_count,
        m.ledger.harvested,
        m.ledger.delivered,
        m.ledger.leaked,
        m.ledger.spilled,
        m.ledger.acquisition_overhead,
    )
}

/// Versioned run summary; field order is the serialization order.
#[derive(Serialize)]
struct Summary<'a> {
    schema: u32,
    seed: u64,
    n_devices: u32,
    slots: u64,
    metrics: &'a Metrics,
}

pub fn write_summary_json(
    config: &ScenarioConfig,
    metrics: &Metrics,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let summary = Summary {
        schema: 1,
        seed: config.seed,
        n_devices: config.n_devices,
        slots: config.slots,
        metrics,
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Runtime(format!("summary serialization failed: {e}")))?;
    match out {
        Some(path) => {
            std::fs::write(path, json + "\n")?;
        }
        None => println!("{json}"),
    }
    Ok(())
}

pub fn write_sweep_csv(
    axes: &[SweepAxis],
    rows: &[SweepRow],
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut text = String::new();
    for axis in axes {
        text.push_str(&csv_field(&axis.path));
        text.push(',');
    }
    text.push_str("seed,");
    text.push_str(METRIC_COLUMNS);
    text.push('\n');
    for row in rows {
        for v in &row.axis_values {
            text.push_str(&format!("{v},"));
        }
        text.push_str(&format!("{},{}\n", row.seed, metric_cells(&row.metrics)));
    }
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Streaming per-slot trace writer.
pub struct CsvTraceSink {
    writer: BufWriter<File>,
    error: Option<std::io::Error>,
}

impl CsvTraceSink {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let mut writer = BufWriter::new(File::create(path)?);
        writeln!(writer, "slot,device,stored,voltage_v,action,buffered,aoi,device_on")?;
        Ok(CsvTraceSink { writer, error: None })
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        if let Some(e) = self.error.take() {
            return Err(CliError::Runtime(format!("trace write failed: {e}")));
        }
        self.writer.flush()?;
        Ok(())
    }
}

impl TraceSink for CsvTraceSink {
    fn record(&mut self, row: &TraceRow) {
        if self.error.is_some() {
            return;
        }
        let voltage = row.voltage_v.map(|v| v.to_string()).unwrap_or_default();
        if let Err(e) = writeln!(
            self.writer,
            "{},{},{},{},{},{},{},{}",
            row.slot,
            row.device,
            row.stored,
            voltage,
            row.action,
            row.buffered,
            row.aoi,
            row.device_on,
        ) {
            self.error = Some(e);
        }
    }
}
