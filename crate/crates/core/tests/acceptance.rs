//! Acceptance suite: one test per release criterion, each printing a
//! single PASS/FAIL line (run with `--nocapture` to see them on success).
//!
//! ```bash
//! cargo test -p zedsim --test acceptance -- --nocapture
//! ```

use zedsim::energy::{
    capacitor_energy, integrate_circuit, rc_transition, step_energy, EnergyState, Leakage,
    LoadModel, SourceModel, StorageSpec,
};
use zedsim::engine::{run, sweep, PolicyConfig, SweepAxis};
use zedsim::forecast::{arima_fit, irradiance_to_energy, waiting_slots, PanelSpec};
use zedsim::policy::rf::{
    dc_combining_power, dft_codebook, genie_power, rf_dc_power, rf_explore_exploit, static_config,
    ExploreSchedule, RfScene,
};
use zedsim::presets::{
    aoi_fully_aware_policy, aoi_mac_config, aoi_threshold_policy, nbiot_gate_config,
    synthetic_irradiance, task_deferring_config, tinyml_config, tinyml_models, PresetKind,
    SolarPresetConfig, TINYML_V_MIN,
};
use zedsim::rng::rng_stream;
use zedsim::tasks::{actuator_energy, table4};

const JOBS: usize = 2;

fn verdict(criterion: &str, ok: bool, detail: &str) {
    let result = if ok { "PASS" } else { "FAIL" };
    println!("[{criterion}] {result} - {detail}");
    assert!(ok, "{criterion} FAIL - {detail}");
}

fn within(value: f64, published: f64, rel: f64) -> bool {
    (value - published).abs() <= rel * published.abs()
}

// ============================================================================
// Criterion 1: actuator formula fidelity
// ============================================================================

#[test]
fn criterion_1_actuator_formula_fidelity() {
    let start = std::time::Instant::now();
    let mut failures = Vec::new();

    let checks: [(&str, f64, f64); 6] = [
        ("mems", actuator_energy(&table4::mems_mirror()).unwrap().0, 0.25e-6),
        ("led", actuator_energy(&table4::led_blink()).unwrap().0, 0.4e-3),
        ("piezo", actuator_energy(&table4::piezo_haptic()).unwrap().0, 0.9e-3),
        ("solenoid", actuator_energy(&table4::solenoid_latch()).unwrap().0, 3.1e-3),
        ("eink", actuator_energy(&table4::eink_refresh()).unwrap().0, 30e-3),
        ("sma-energy", actuator_energy(&table4::sma_wire()).unwrap().0, 80e-3),
    ];
    for (name, got, published) in checks {
        if !within(got, published, 0.05) {
            failures.push(format!("{name}: {got} vs {published}"));
        }
    }
    // SMA heating time approx 0.2 s (cooling excluded from the comparison).
    let (_, sma_total) = actuator_energy(&table4::sma_wire()).unwrap();
    let sma_heat = sma_total - 1.25;
    if !within(sma_heat, 0.2, 0.05) {
        failures.push(format!("sma-heat-time: {sma_heat} vs 0.2"));
    }
    // Servo: move and hold components, about 1 J total.
    let (servo_e, _) = actuator_energy(&table4::servo_pan_tilt()).unwrap();
    if !within(servo_e, 0.2625 + 0.75, 0.001) || !within(servo_e, 1.0, 0.05) {
        failures.push(format!("servo: {servo_e} vs 1.0125 / ~1"));
    }

    let elapsed = start.elapsed();
    verdict(
        "C1 actuator-formulas",
        failures.is_empty() && elapsed.as_secs_f64() < 1.0,
        &format!(
            "8 published actuator figures within 5% in {:.3}s{}",
            elapsed.as_secs_f64(),
            if failures.is_empty() { String::new() } else { format!("; failures: {failures:?}") }
        ),
    );
}

// ============================================================================
// Criterion 2: task-deferring shape reproduction
// ============================================================================

/// Seed-averaged completion-rate curve over a single axis.
fn rate_curve(base: &zedsim::engine::ScenarioConfig, axis: SweepAxis, seeds: &[u64]) -> Vec<f64> {
    let n_values = axis.values.len();
    let rows = sweep(base, &[axis], seeds, JOBS).expect("sweep");
    let mut curve = vec![0.0; n_values];
    for (i, chunk) in rows.chunks(seeds.len()).enumerate() {
        curve[i] =
            chunk.iter().map(|r| r.metrics.task_completion_rate).sum::<f64>() / seeds.len() as f64;
    }
    curve
}

fn smooth3(curve: &[f64]) -> Vec<f64> {
    (0..curve.len())
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(curve.len() - 1);
            curve[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Single-peak test: rises to the argmax and falls after it, within `tol`.
fn is_unimodal(curve: &[f64], tol: f64) -> bool {
    let peak = curve
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    curve[..=peak].windows(2).all(|w| w[1] >= w[0] - tol)
        && curve[peak..].windows(2).all(|w| w[1] <= w[0] + tol)
}

#[test]
fn criterion_2_task_deferring_shapes() {
    let start = std::time::Instant::now();
    let seeds: Vec<u64> = (1..=20).collect();
    let q_values: Vec<f64> = (1..=20).map(|q| q as f64).collect();
    let q_axis = |values: &[f64]| SweepAxis {
        path: "device.policy.periodic_measure.period_slots".into(),
        values: values.to_vec(),
    };
    let f_axis = SweepAxis {
        path: "device.policy.energy_blind.period_slots".into(),
        values: q_values.clone(),
    };
    let aware = |e_c: f64, b: u32| {
        task_deferring_config(
            PolicyConfig::PeriodicMeasure { period_slots: 2, measure_cost: e_c },
            b,
            10.0,
        )
    };
    let blind = |b: u32| {
        task_deferring_config(PolicyConfig::EnergyBlind { period_slots: 2, spend: 2.0 }, b, 10.0)
    };

    // (a) unimodality of both schemes' seed-averaged curves.
    let aware_curve = rate_curve(&aware(1.0, 1), q_axis(&q_values), &seeds);
    let blind_curve = rate_curve(&blind(1), f_axis.clone(), &seeds);
    let tol = 0.004;
    let a_ok = is_unimodal(&smooth3(&aware_curve), tol);
    let b_ok = is_unimodal(&smooth3(&blind_curve), tol);

    // (b) E_c degrades the energy-aware rate at the three smallest Q.
    let small_q = [1.0, 2.0, 3.0];
    let mut ec_rates = Vec::new();
    for e_c in [0.0, 1.0, 2.0] {
        ec_rates.push(rate_curve(&aware(e_c, 1), q_axis(&small_q), &seeds));
    }
    let mut ec_ok = true;
    for qi in 0..small_q.len() {
        let (r0, r1, r2) = (ec_rates[0][qi], ec_rates[1][qi], ec_rates[2][qi]);
        ec_ok &= r0 >= r1 - tol && r1 >= r2 - tol && r0 > r2 + 0.01;
    }

    // (c) a bigger buffer helps the energy-aware scheme and does not help
    // the energy-blind one at large F.
    let aware_b3 = rate_curve(&aware(1.0, 3), q_axis(&q_values), &seeds);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let buffer_helps_aware = mean(&aware_b3) > mean(&aware_curve) + 0.005;
    let blind_b3_curve = rate_curve(&blind(3), f_axis, &seeds);
    let large_f = 14..20; // F in 15..=20 on the 1-based grid
    let blind_no_gain = large_f
        .clone()
        .all(|i| blind_b3_curve[i] <= blind_curve[i] + tol);

    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        "C2 task-deferring",
        a_ok && b_ok && ec_ok && buffer_helps_aware && blind_no_gain && elapsed < 300.0,
        &format!(
            "unimodal(aware)={a_ok} unimodal(blind)={b_ok} ec-monotone={ec_ok} \
             buffer-helps-aware={buffer_helps_aware} blind-flat-at-large-F={blind_no_gain} \
             in {elapsed:.1}s"
        ),
    );
}

// ============================================================================
// Criterion 3: AoI MAC reproduction
// ============================================================================

fn avg_aoi(policy: PolicyConfig, event_p: f64, seeds: &[u64]) -> f64 {
    let mut total = 0.0;
    for &seed in seeds {
        let mut cfg = aoi_mac_config(policy.clone(), event_p, 0.1);
        cfg.seed = seed;
        total += run(&cfg).unwrap().avg_aoi_slots;
    }
    total / seeds.len() as f64
}

#[test]
fn criterion_3_aoi_mac() {
    let start = std::time::Instant::now();
    let seeds: Vec<u64> = (1..=20).collect();
    let n = 64.0;
    let p_lo = 1.0 / n;
    let p_hi = 5.0 / n;

    // (a) p = 1/N: partially-aware at delta = E_M within 5% of fully-aware.
    let partial_lo_cap = avg_aoi(aoi_threshold_policy(10.0), p_lo, &seeds);
    let fully_lo = avg_aoi(aoi_fully_aware_policy(), p_lo, &seeds);
    let parity = (partial_lo_cap - fully_lo).abs() / fully_lo;
    let a_ok = parity <= 0.05;

    // (b) p = 5/N: some delta* strictly beats fully-aware.
    let fully_hi = avg_aoi(aoi_fully_aware_policy(), p_hi, &seeds);
    let mut best_partial_hi = f64::INFINITY;
    let mut best_delta = 0.0;
    for delta in 1..=10 {
        let aoi = avg_aoi(aoi_threshold_policy(delta as f64), p_hi, &seeds);
        if aoi < best_partial_hi {
            best_partial_hi = aoi;
            best_delta = delta as f64;
        }
    }
    let b_ok = best_partial_hi < fully_hi;

    // (c) the energy-blind baseline is worst for every tested E_t, against
    // both aware schemes, at both event rates.
    let partial_hi_cap = avg_aoi(aoi_threshold_policy(10.0), p_hi, &seeds);
    let mut c_ok = true;
    let mut worst_margin = f64::INFINITY;
    for (p, fully, partial) in [(p_lo, fully_lo, partial_lo_cap), (p_hi, fully_hi, partial_hi_cap)]
    {
        for e_t in 1..=10 {
            let blind = avg_aoi(
                PolicyConfig::EnergyBlind { period_slots: 1, spend: e_t as f64 },
                p,
                &seeds,
            );
            let bound = fully.max(partial);
            worst_margin = worst_margin.min(blind - bound);
            c_ok &= blind > fully && blind > partial;
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        "C3 aoi-mac",
        a_ok && b_ok && c_ok && elapsed < 600.0,
        &format!(
            "parity(delta=E_M vs fully, p=1/N)={:.1}% (cap 5%); delta*={best_delta} gives \
             {best_partial_hi:.1} < fully {fully_hi:.1} at p=5/N; blind worst everywhere \
             (min margin {worst_margin:.1} slots); in {elapsed:.0}s",
            parity * 100.0
        ),
    );
}

// ============================================================================
// Criterion 4: RF combining ordering
// ============================================================================

#[test]
fn criterion_4_rf_combining() {
    let start = std::time::Instant::now();
    let template = |m: usize| RfScene {
        antennas: m,
        spacing_wavelengths: 0.5,
        tx_power_w: 10.0,
        path_loss_exponent: 2.7,
        ref_loss_db: 40.0,
        eh_efficiency: 0.5,
        source_distance_m: 1.0,
        source_angle_rad: 0.0,
        tune_power_w: 0.0,
        meas_power_w: 0.0,
    };
    let schedule = ExploreSchedule {
        tune_time_s: 1e-3,
        meas_time_s: 1e-3,
        window_s: 1.0,
        meas_noise_rel: 0.0,
    };

    // Zero-overhead dominance, every scene, and exact argmax selection.
    let mut rng = rng_stream(4242, 0, "c4-scenes");
    let mut dominance = true;
    let mut argmax_hits = 0usize;
    let mut scene_count = 0usize;
    for m in [1usize, 2, 4, 8, 16] {
        for _ in 0..1000 {
            let scene = template(m).with_random_source(100.0, &mut rng);
            let out = rf_explore_exploit(&scene, &schedule, &mut rng);
            let (genie_idx, genie_p) = genie_power(&scene);
            let st = rf_dc_power(&scene, &static_config(m));
            let dc = dc_combining_power(&scene);
            let slack = 1e-12 * genie_p.max(1e-30);
            dominance &= genie_p >= out.net_power_w - slack
                && out.net_power_w >= st - slack
                && out.net_power_w >= dc - slack;
            if out.selected == genie_idx {
                argmax_hits += 1;
            }
            scene_count += 1;
        }
    }
    let argmax_ok = argmax_hits == scene_count;

    // Overhead sweep at M = 8: the scene-averaged dynamic net power falls
    // monotonically and crosses below static, then below DC combining.
    let m = 8usize;
    let mut scenes = Vec::new();
    let mut rng2 = rng_stream(4243, 0, "c4-sweep");
    for _ in 0..1000 {
        scenes.push(template(m).with_random_source(100.0, &mut rng2));
    }
    let avg_static: f64 =
        scenes.iter().map(|s| rf_dc_power(s, &static_config(m))).sum::<f64>() / scenes.len() as f64;
    let avg_dc: f64 =
        scenes.iter().map(dc_combining_power).sum::<f64>() / scenes.len() as f64;
    let overheads = [0.0, 1e-9, 3e-9, 1e-8, 3e-8, 1e-7, 3e-7, 1e-6, 3e-6, 1e-5, 3e-5];
    let mut dynamic_avgs = Vec::new();
    for &p_c in &overheads {
        let mut total = 0.0;
        for scene in &scenes {
            let s = RfScene { tune_power_w: p_c, meas_power_w: p_c, ..scene.clone() };
            total += rf_explore_exploit(&s, &schedule, &mut rng2).net_power_w;
        }
        dynamic_avgs.push(total / scenes.len() as f64);
    }
    let monotone = dynamic_avgs.windows(2).all(|w| w[1] <= w[0] + 1e-18);
    let ordering_ok = avg_static > avg_dc;
    let first_below_static = dynamic_avgs.iter().position(|&d| d < avg_static);
    let first_below_dc = dynamic_avgs.iter().position(|&d| d < avg_dc);
    let crossing_ok = match (first_below_static, first_below_dc) {
        (Some(s), Some(d)) => dynamic_avgs[0] >= avg_static && s <= d,
        _ => false,
    };

    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        "C4 rf-combining",
        dominance && argmax_ok && monotone && ordering_ok && crossing_ok && elapsed < 120.0,
        &format!(
            "dominance(all {scene_count} scenes)={dominance}; argmax {argmax_hits}/{scene_count}; \
             overhead sweep monotone={monotone}, crosses static then dc={crossing_ok} \
             (static {avg_static:.3e} W > dc {avg_dc:.3e} W); in {elapsed:.1}s"
        ),
    );
}

// ============================================================================
// Criterion 5: TinyML selection frontier
// ============================================================================

#[test]
fn criterion_5_tinyml_selection() {
    let start = std::time::Instant::now();
    let selector =
        zedsim::policy::TinymlSelect::new(tinyml_models(), TINYML_V_MIN, 0.5).unwrap();
    // Decision code: 0 = defer, 1 = small model, 2 = large model.
    let decision = |v: f64, i: f64| -> u32 {
        match selector.select(v, i) {
            None => 0,
            Some(idx) => selector.models[idx].accuracy_rank,
        }
    };

    let v_grid: Vec<f64> = (0..=60).map(|k| 2.797 + k as f64 * 1e-4).collect();
    let i_grid: Vec<f64> = (0..=20).map(|k| k as f64 * 3e-4).collect();

    let mut saw = [false; 3];
    let mut monotone_v = true;
    let mut monotone_i = true;
    for &i in &i_grid {
        let mut prev = 0;
        for &v in &v_grid {
            let d = decision(v, i);
            saw[d as usize] = true;
            monotone_v &= d >= prev;
            prev = d;
        }
    }
    for &v in &v_grid {
        let mut prev = 0;
        for &i in &i_grid {
            let d = decision(v, i);
            monotone_i &= d >= prev;
            prev = d;
        }
    }

    // Dynamic behavior: the large-model share grows with harvest current,
    // with the small model and deferring appearing when energy is scarce.
    let lo = run(&tinyml_config(0.00002)).unwrap();
    let hi = run(&tinyml_config(0.004)).unwrap();
    let share = |m: &zedsim::engine::Metrics| {
        let large = m.model_selections.first().copied().unwrap_or(0) as f64;
        let total = (m.model_selections.iter().sum::<u64>() + m.defers) as f64;
        large / total.max(1.0)
    };
    let switching_ok =
        share(&hi) > 0.9 && share(&lo) < 0.5 && (lo.defers + lo.model_selections[1]) > 0;

    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        "C5 tinyml-select",
        saw == [true; 3] && monotone_v && monotone_i && switching_ok && elapsed < 60.0,
        &format!(
            "regions defer/small/large all present={:?}; frontier monotone in V={monotone_v}, \
             in I={monotone_i}; large-model share {:.2} (lo) -> {:.2} (hi); in {elapsed:.1}s",
            saw,
            share(&lo),
            share(&hi)
        ),
    );
}

// ============================================================================
// Criterion 6: forecast pipeline
// ============================================================================

#[test]
fn criterion_6_forecast_pipeline() {
    let start = std::time::Instant::now();

    // (i) One-step forecasts beat the last-value predictor on >= 95/100 seeds.
    let mut wins = 0;
    for seed in 0..100u64 {
        let mut rng = rng_stream(seed, 0, "c6-irradiance");
        let phi = [0.5, 0.2, 0.1, 0.05, 0.02];
        let mut diffs = vec![0.0; 5];
        let mut series = vec![400.0];
        for _ in 0..300 {
            let n = diffs.len();
            let ar: f64 = phi.iter().enumerate().map(|(k, &c)| c * diffs[n - 1 - k]).sum();
            let next = ar + 2.0 * rng.gauss();
            diffs.push(next);
            series.push((series.last().unwrap() + next).max(0.0));
        }
        let (train, test) = series.split_at(200);
        let model = arima_fit(train, 5, 1).unwrap();
        let mut m = model.clone();
        let mut mse_model = 0.0;
        let mut mse_naive = 0.0;
        let mut last = *train.last().unwrap();
        for &actual in test {
            let pred = m.forecast(1).unwrap()[0];
            mse_model += (pred - actual) * (pred - actual);
            mse_naive += (last - actual) * (last - actual);
            m.observe(actual);
            last = actual;
        }
        if mse_model <= mse_naive {
            wins += 1;
        }
    }
    let forecast_ok = wins >= 95;

    // (ii) Harvested-energy conversion against hand arithmetic.
    let panel = PanelSpec {
        area_m2: 0.081 * 0.137,
        pv_efficiency: 0.17,
        pmu_efficiency: 0.85,
        slot_s: 30.0,
    };
    let e = irradiance_to_energy(500.0, 500.0, &panel);
    let hand = 24.0527475;
    let conversion_ok = (e - hand).abs() / hand <= 1e-9;

    // (iii) waiting_slots against a prefix-sum brute force on 1e4 instances.
    let mut rng = rng_stream(77, 0, "c6-waiting");
    let mut waiting_ok = true;
    for _ in 0..10_000 {
        let len = 1 + rng.u64_below(24) as usize;
        let forecast: Vec<f64> = (0..len).map(|_| rng.uniform(0.0, 3.0)).collect();
        let e_task = rng.uniform(0.0, 40.0);
        // Brute force: scan partial sums independently.
        let mut brute = None;
        for n in 1..=len {
            let sum: f64 = forecast[..n].iter().sum();
            if sum >= e_task {
                brute = Some(n);
                break;
            }
        }
        if e_task <= 0.0 {
            brute = Some(0);
        }
        let got = waiting_slots(e_task, &forecast).ok();
        waiting_ok &= got == brute;
    }

    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        "C6 forecast-pipeline",
        forecast_ok && conversion_ok && waiting_ok,
        &format!(
            "model beat last-value on {wins}/100 seeds; conversion {e:.9} J vs {hand}; \
             waiting-slots oracle agreement={waiting_ok}; in {elapsed:.1}s"
        ),
    );
}

// ============================================================================
// Criterion 7: core invariant suite
// ============================================================================

#[test]
fn criterion_7_core_invariants() {
    let start = std::time::Instant::now();

    // Conservation identity over 1e4 random step sequences.
    let mut conservation_ok = true;
    for seq in 0..10_000u64 {
        let mut rng = rng_stream(seq, 0, "c7-conservation");
        let spec = StorageSpec::ideal(rng.uniform(5.0, 50.0))
            .with_efficiencies(rng.uniform(0.5, 1.0), rng.uniform(0.5, 1.0))
            .with_leak(Leakage::FractionPerHour(rng.uniform(0.0, 0.2)));
        let initial = rng.uniform(0.0, spec.capacity);
        let mut st = EnergyState::with_energy(&spec, initial);
        for _ in 0..50 {
            let e_h = rng.uniform(0.0, 5.0);
            let e_l = rng.uniform(0.0, 4.0);
            step_energy(&mut st, &spec, e_h, e_l, rng.uniform(0.1, 100.0)).unwrap();
        }
        let residual = st.ledger.conservation_residual(&spec, initial, st.stored);
        let scale = 1.0 + st.ledger.harvested + st.ledger.delivered;
        conservation_ok &= residual.abs() <= 1e-9 * scale;
    }

    // Capacitor integration versus closed forms at 1000 substeps.
    let (c, r, i) = (0.1, 200.0, 0.01);
    let spec = StorageSpec::capacitor(c, 10.0, 0.5);
    let dt = r * c;
    let mut discharge = EnergyState::with_voltage(&spec, 4.0).unwrap();
    integrate_circuit(
        &mut discharge,
        &spec,
        &SourceModel::Ci { i_s_a: 0.0 },
        &LoadModel::Cr { r_ohm: r },
        0.0,
        dt,
        1000,
    )
    .unwrap();
    let analytic_ok1 = {
        let expect = rc_transition(4.0, 0.0, r, c, dt);
        (discharge.voltage_v.unwrap() - expect).abs() / expect < 1e-3
    };
    let mut charge = EnergyState::with_voltage(&spec, 1.0).unwrap();
    integrate_circuit(
        &mut charge,
        &spec,
        &SourceModel::Ci { i_s_a: i },
        &LoadModel::Cr { r_ohm: r },
        0.0,
        dt,
        1000,
    )
    .unwrap();
    let analytic_ok2 = {
        let expect = rc_transition(1.0, i, r, c, dt);
        (charge.voltage_v.unwrap() - expect).abs() / expect < 1e-3
    };

    // Quantization bound over 1e6 sampler draws.
    let mut sampler = zedsim::ei::SamplerSpec::ideal(8, 1.0);
    sampler.thermal_a = 1e-12;
    sampler.t_m_s = 1e-3;
    let bound = 1.0 / 512.0; // V_r / 2^(N+1)
    let mut rng = rng_stream(5, 0, "c7-quant");
    let mut quant_ok = true;
    for k in 0..1_000_000u64 {
        let reading = sampler.sample_read(rng.uniform(0.05, 0.95), k as f64, 293.15, &mut rng);
        if !reading.saturated {
            quant_ok &=
                (reading.reading_v - reading.pre_quantization_v).abs() <= bound + 1e-15;
        }
    }

    // Coulomb error moments.
    let mut rng = rng_stream(6, 0, "c7-coulomb");
    let trials = 100_000;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        let mut counter = zedsim::ei::CoulombCounter::new(zedsim::ei::CoulombSpec {
            delta_e_j: 1.0,
            event_cost_j: 0.0,
            quiescent_w: 0.0,
            placement: zedsim::ei::CoulombPlacement::PreStorage,
            miss_probability: 0.0,
        });
        let flow = rng.uniform(0.0, 20.0);
        let s = counter.step(flow, 0.0, 1.0, &mut rng).unwrap();
        let err = flow - s.estimate_j;
        sum += err;
        sum_sq += err * err;
    }
    let mean = sum / trials as f64;
    let var = sum_sq / trials as f64 - mean * mean;
    let coulomb_ok =
        (mean - 0.5).abs() / 0.5 <= 0.02 && (var - 1.0 / 12.0).abs() / (1.0 / 12.0) <= 0.05;

    // Determinism: two runs of every preset's engine configs byte-identical.
    let mut determinism_ok = true;
    for name in zedsim::presets::names() {
        match zedsim::presets::get(name).unwrap().kind {
            PresetKind::Engine { variants, .. } => {
                for v in variants {
                    let a = serde_json::to_string(&run(&v.config).unwrap()).unwrap();
                    let b = serde_json::to_string(&run(&v.config).unwrap()).unwrap();
                    determinism_ok &= a == b;
                }
            }
            PresetKind::RfCombining(cfg) => {
                let scene = RfScene {
                    antennas: 8,
                    spacing_wavelengths: cfg.spacing_wavelengths,
                    tx_power_w: cfg.tx_power_w,
                    path_loss_exponent: cfg.path_loss_exponent,
                    ref_loss_db: cfg.ref_loss_db,
                    eh_efficiency: cfg.eh_efficiency,
                    source_distance_m: 1.0,
                    source_angle_rad: 0.0,
                    tune_power_w: 1e-8,
                    meas_power_w: 1e-8,
                };
                let mut r1 = rng_stream(cfg.seed, 0, "rf");
                let mut r2 = rng_stream(cfg.seed, 0, "rf");
                let s1 = scene.clone().with_random_source(cfg.disk_radius_m, &mut r1);
                let s2 = scene.clone().with_random_source(cfg.disk_radius_m, &mut r2);
                determinism_ok &= rf_explore_exploit(&s1, &cfg.schedule, &mut r1)
                    == rf_explore_exploit(&s2, &cfg.schedule, &mut r2);
            }
            PresetKind::SolarForecast(cfg) => {
                determinism_ok &= synthetic_irradiance(&cfg) == synthetic_irradiance(&cfg);
            }
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        "C7 core-invariants",
        conservation_ok && analytic_ok1 && analytic_ok2 && quant_ok && coulomb_ok
            && determinism_ok,
        &format!(
            "conservation(1e4 seqs)={conservation_ok}; integration-vs-closed-form=\
             {analytic_ok1}/{analytic_ok2}; quantization-bound(1e6)={quant_ok}; \
             coulomb-moments={coulomb_ok}; preset-determinism={determinism_ok}; in {elapsed:.0}s"
        ),
    );
}

// ============================================================================
// Criterion 8: NB-IoT gate properties
// ============================================================================

#[test]
fn criterion_8_nbiot_gate() {
    let start = std::time::Instant::now();

    // Hysteresis correctness over an adversarial random voltage trace.
    let mut gate = zedsim::policy::DualThresholdGate::new(4.0, 3.6).unwrap();
    let mut rng = rng_stream(8, 0, "c8-gate");
    let mut last: Option<zedsim::policy::GateTransition> = None;
    let mut transitions = 0u64;
    let mut hysteresis_ok = true;
    for _ in 0..1_000_000 {
        let v = rng.uniform(3.0, 4.5);
        if let Some(t) = gate.update(v) {
            if let Some(prev) = last {
                hysteresis_ok &= prev != t;
            }
            last = Some(t);
            transitions += 1;
        }
    }
    hysteresis_ok &= transitions > 0;

    // Throughput monotone in harvest power at fixed TI; restart count
    // non-monotone for the 2.5 F / TI = 1 s configuration, via a sweep.
    let axis = SweepAxis {
        path: "device.source.cp.p_s_w".into(),
        values: vec![0.001, 0.002, 0.004, 0.006, 0.008, 0.016, 0.032, 0.050, 0.064],
    };
    let rows = sweep(&nbiot_gate_config(2.5, 0.006, 1.0), &[axis.clone()], &[1], JOBS).unwrap();
    let pph: Vec<f64> = rows.iter().map(|r| r.metrics.throughput_pph).collect();
    let restarts: Vec<u64> = rows.iter().map(|r| r.metrics.restart_count).collect();
    let throughput_monotone = pph.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    let peak = *restarts.iter().max().unwrap();
    let restart_nonmonotone = restarts.first().copied().unwrap_or(0) < peak
        && restarts.last().copied().unwrap_or(0) < peak;

    // The 60 s interval variant is also monotone in throughput.
    let rows60 = sweep(&nbiot_gate_config(2.5, 0.006, 60.0), &[axis], &[1], JOBS).unwrap();
    let pph60: Vec<f64> = rows60.iter().map(|r| r.metrics.throughput_pph).collect();
    let throughput60_monotone = pph60.windows(2).all(|w| w[1] >= w[0] - 1e-9);

    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        "C8 nbiot-gate",
        hysteresis_ok && throughput_monotone && restart_nonmonotone && throughput60_monotone
            && elapsed < 120.0,
        &format!(
            "hysteresis alternates over {transitions} transitions={hysteresis_ok}; \
             pph monotone (TI=1s)={throughput_monotone}, (TI=60s)={throughput60_monotone}; \
             restarts {restarts:?} non-monotone={restart_nonmonotone}; in {elapsed:.1}s"
        ),
    );
}
