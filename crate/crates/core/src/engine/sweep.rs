//! Parameter sweeps: Cartesian products of config-path axes and seeds,
//! each cell an independent deterministic run.

use serde_json::Value;

use super::{run, EngineError, Metrics, ScenarioConfig};

/// One sweep axis: a dotted config path (e.g.
/// `device.policy.periodic_measure.period_slots`) and the values to try.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<f64>,
}

/// One row of the result table: the axis values that produced it, the seed,
/// and the run metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_values: Vec<f64>,
    pub seed: u64,
    pub metrics: Metrics,
}

fn pointer_of(path: &str) -> String {
    let escaped: Vec<String> =
        path.split('.').map(|seg| seg.replace('~', "~0").replace('/', "~1")).collect();
    format!("/{}", escaped.join("/"))
}

fn set_path(doc: &mut Value, path: &str, value: f64) -> Result<(), EngineError> {
    let pointer = pointer_of(path);
    let slot = doc
        .pointer_mut(&pointer)
        .ok_or_else(|| EngineError::Axis(format!("path not found in config: {path}")))?;
    // Keep integer fields integers; a fractional value for an integer field
    // fails downstream deserialization with a clear message.
    *slot = if value.fract() == 0.0 && value.abs() < 2f64.powi(53) && !slot.is_f64() {
        Value::from(value as i64)
    } else {
        Value::from(value)
    };
    Ok(())
}

/// Materializes one configuration from the base plus axis assignments.
fn configure(
    base_doc: &Value,
    axes: &[SweepAxis],
    choice: &[usize],
    seed: u64,
) -> Result<ScenarioConfig, EngineError> {
    let mut doc = base_doc.clone();
    for (axis, &idx) in axes.iter().zip(choice) {
        set_path(&mut doc, &axis.path, axis.values[idx])?;
    }
    let mut config: ScenarioConfig = serde_json::from_value(doc)
        .map_err(|e| EngineError::Axis(format!("axis assignment broke the config: {e}")))?;
    config.seed = seed;
    Ok(config)
}

/// Runs the Cartesian product of `axes` values and `seeds`. Rows come back
/// in lexicographic axis order (last axis fastest), seeds innermost,
/// regardless of how many worker threads execute the runs.
pub fn sweep(
    base: &ScenarioConfig,
    axes: &[SweepAxis],
    seeds: &[u64],
    jobs: usize,
) -> Result<Vec<SweepRow>, EngineError> {
    base.validate()?;
    let base_doc = serde_json::to_value(base)
        .map_err(|e| EngineError::Runtime(format!("config serialization failed: {e}")))?;

    // Validate every axis path and value count before any run.
    for axis in axes {
        if axis.values.is_empty() {
            return Err(EngineError::Axis(format!("axis {} has no values", axis.path)));
        }
        let mut probe = base_doc.clone();
        set_path(&mut probe, &axis.path, axis.values[0])?;
    }
    if seeds.is_empty() {
        return Err(EngineError::Axis("need at least one seed".into()));
    }

    // Enumerate all cells up front so workers just index into them.
    let mut cells: Vec<(Vec<usize>, u64)> = Vec::new();
    let mut choice = vec![0usize; axes.len()];
    loop {
        for &seed in seeds {
            cells.push((choice.clone(), seed));
        }
        // Odometer increment, last axis fastest.
        let mut pos = axes.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < axes[pos].values.len() {
                break;
            }
            choice[pos] = 0;
            if pos == 0 {
                pos = usize::MAX;
                break;
            }
        }
        if axes.is_empty() || pos == usize::MAX {
            break;
        }
    }

    let jobs = jobs.max(1).min(cells.len().max(1));
    let mut rows: Vec<Option<SweepRow>> = (0..cells.len()).map(|_| None).collect();

    if jobs == 1 {
        for (cell, row_slot) in cells.iter().zip(rows.iter_mut()) {
            *row_slot = Some(run_cell(&base_doc, axes, cell)?);
        }
    } else {
        let results: Vec<Result<(usize, SweepRow), EngineError>> = std::thread::scope(|scope| {
            let base_doc = &base_doc;
            let cells = &cells;
            let mut handles = Vec::new();
            for worker in 0..jobs {
                handles.push(scope.spawn(move || {
                    let mut out = Vec::new();
                    let mut i = worker;
                    while i < cells.len() {
                        out.push(run_cell(base_doc, axes, &cells[i]).map(|row| (i, row)));
                        i += jobs;
                    }
                    out
                }));
            }
            handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
        });
        for result in results {
            let (i, row) = result?;
            rows[i] = Some(row);
        }
    }

    Ok(rows.into_iter().map(|r| r.expect("all cells ran")).collect())
}

fn run_cell(
    base_doc: &Value,
    axes: &[SweepAxis],
    cell: &(Vec<usize>, u64),
) -> Result<SweepRow, EngineError> {
    let (choice, seed) = cell;
    let config = configure(base_doc, axes, choice, *seed)?;
    config.validate()?;
    let metrics = run(&config)?;
    Ok(SweepRow {
        axis_values: axes.iter().zip(choice).map(|(a, &i)| a.values[i]).collect(),
        seed: *seed,
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{
        ArrivalProcess, DeviceConfig, FailureMode, PolicyConfig, Regime, WorkloadConfig,
    };
    use crate::energy::StorageSpec;

    fn base() -> ScenarioConfig {
        ScenarioConfig {
            regime: Regime::Abstract,
            n_devices: 1,
            slots: 200,
            slot_s: 1.0,
            seed: 1,
            device: DeviceConfig {
                storage: StorageSpec::ideal(5.0),
                initial_energy: 0.0,
                energy_arrival: Some(ArrivalProcess::Poisson { mean: 0.75 }),
                source: None,
                idle_load: None,
                substeps_per_slot: 1,
                workload: WorkloadConfig::Tasks {
                    arrival_p: 0.35,
                    cost: 2.0,
                    buffer_capacity: 1,
                    on_failure: FailureMode::Retain,
                },
                policy: PolicyConfig::PeriodicMeasure { period_slots: 2, measure_cost: 0.0 },
            },
            channel: None,
        }
    }

    #[test]
    fn single_axis_row_count() {
        let axes = vec![SweepAxis {
            path: "device.policy.periodic_measure.period_slots".into(),
            values: (1..=10).map(|q| q as f64).collect(),
        }];
        let rows = sweep(&base(), &axes, &[1], 1).unwrap();
        assert_eq!(rows.len(), 10);
        assert_eq!(rows[0].axis_values, vec![1.0]);
        assert_eq!(rows[9].axis_values, vec![10.0]);
    }

    #[test]
    fn empty_axes_single_row() {
        let rows = sweep(&base(), &[], &[42], 1).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].seed, 42);
    }

    #[test]
    fn cartesian_order_lexicographic() {
        let axes = vec![
            SweepAxis { path: "device.workload.tasks.cost".into(), values: vec![1.0, 2.0] },
            SweepAxis {
                path: "device.policy.periodic_measure.period_slots".into(),
                values: vec![1.0, 2.0, 3.0],
            },
        ];
        let seeds = vec![1u64, 2];
        let rows = sweep(&base(), &axes, &seeds, 1).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 2);
        let observed: Vec<(Vec<f64>, u64)> =
            rows.iter().map(|r| (r.axis_values.clone(), r.seed)).collect();
        let mut expected = Vec::new();
        for a in [1.0, 2.0] {
            for b in [1.0, 2.0, 3.0] {
                for s in [1u64, 2] {
                    expected.push((vec![a, b], s));
                }
            }
        }
        assert_eq!(observed, expected);
    }

    #[test]
    fn invalid_path_fails_before_running() {
        let axes =
            vec![SweepAxis { path: "device.policy.no_such_field".into(), values: vec![1.0] }];
        match sweep(&base(), &axes, &[1], 1) {
            Err(EngineError::Axis(msg)) => assert!(msg.contains("no_such_field")),
            other => panic!("expected axis error, got {other:?}"),
        }
    }

    #[test]
    fn parallel_equals_sequential() {
        let axes = vec![SweepAxis {
            path: "device.policy.periodic_measure.period_slots".into(),
            values: (1..=6).map(|q| q as f64).collect(),
        }];
        let seeds: Vec<u64> = (0..4).collect();
        let seq = sweep(&base(), &axes, &seeds, 1).unwrap();
        let par = sweep(&base(), &axes, &seeds, 4).unwrap();
        assert_eq!(seq, par);
    }
}
