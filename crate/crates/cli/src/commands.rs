
use anyhow::Result;
use lcoupler_core::benchmarking::{
    decay_points, fit_exponential, fit_leakage, run_network_benchmarking, run_two_qubit_rb,
    transfer_channel_from_dynamics, DecayFitResult, NoiseModel, Population, Protocol, RateSummary,
    RbDataset, SpamModel, NB_LENGTHS, TQRB_LENGTHS,
};
use lcoupler_core::cliffords::{
    circuit_duration, circuit_to_json, compile_circuit, compile_remote_cnot, schedule_asap, GateOp,
    GateTimes,
};
use lcoupler_core::dynamics::sweep_transfer;
use lcoupler_core::pulses::{build_transfer_schedule, default_theta_max, reverse_schedule, Method, DEFAULT_DT};
use lcoupler_core::rng::streams;
use lcoupler_core::tomography::{bell_circuit, bell_experiment, BellVariant, Readout};
use lcoupler_core::{DeviceConfig, Error, QubitId, RngHandle};
use serde_json::json;

use crate::manifest::RunManifest;
use crate::svg::{Axis, Panel, Series, Svg};
use crate::{BellArgs, BenchArgs, CircuitArgs, Common, Interleave, RbArgs, ScheduleArgs, SweepArgs};

/// 2 for usage and config problems, 3 for numerical failures.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            if let Error::FitFailed { initial_guess, residuals, .. } = err {
                eprintln!("fit diagnostics: initial guess {initial_guess:?}, residuals {residuals:?}");
            }
            return match err {
                Error::ConfigIo { .. }
                | Error::ConfigParse(_)
                | Error::Invalid { .. }
                | Error::UnsupportedTruncation(_)
                | Error::OutOfRange(_)
                | Error::OddLength(_)
                | Error::Usage(_) => 2,
                _ => 3,
            };
        }
    }
    1
}

fn setup(common: &Common, subcommand: &str) -> Result<(DeviceConfig, RunManifest)> {
    let cfg = match &common.config {
        Some(p) => DeviceConfig::load(p)?,
        None => DeviceConfig::default(),
    };
    std::fs::create_dir_all(&common.out)?;
    let manifest = RunManifest::new(subcommand, common.config.clone(), &cfg, common.seed);
    Ok((cfg, manifest))
}

fn models(cfg: &DeviceConfig, noiseless: bool, method: Method) -> Result<(NoiseModel, SpamModel)> {
    if noiseless {
        return Ok((NoiseModel::ideal(cfg), SpamModel::ideal()));
    }
    log::info!("simulating the {} transfer channel", method.name());
    let channel = transfer_channel_from_dynamics(cfg, method, true)?;
    Ok((NoiseModel::from_config(cfg, channel), SpamModel::from_config(cfg)))
}

fn csv(data: &RbDataset) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    data.write_csv(&mut buf)?;
    Ok(buf)
}

pub fn sweep(common: &Common, a: &SweepArgs) -> Result<()> {
    let (cfg, mut m) = setup(common, "sweep")?;
    let (g, t) = (&a.g.0, &a.t.0);
    let grid = sweep_transfer(&cfg, a.method, g, t, a.lossy);
    let failed = grid.cells.iter().filter(|c| c.outcome.is_err()).count();
    if failed > 0 {
        log::warn!("{failed} cells failed and carry NaN populations");
    }
    let mut buf = Vec::new();
    grid.write_csv(&mut buf)?;
    let name = a.method.name();
    m.write(&common.out, &format!("sweep_{name}.csv"), buf)?;

    let mut svg = Svg::new(1080.0, 340.0);
    let x = Axis::linear(t[0] * 1e9, t[t.len() - 1] * 1e9, "T (ns)");
    let y = Axis::linear(g[0] * 1e-6, g[g.len() - 1] * 1e-6, "g/2π (MHz)");
    let panels: [(&str, fn(&lcoupler_core::TransferResult64) -> f64); 3] = [
        ("emitter", |r| r.pop_emitter),
        ("receiver", |r| r.pop_receiver),
        ("other", |r| r.pop_other),
    ];
    for (k, (title, pick)) in panels.iter().enumerate() {
        let values: Vec<Vec<f64>> = (0..g.len())
            .map(|gi| {
                (0..t.len())
                    .map(|ti| grid.cell(gi, ti).outcome.as_ref().map(pick).unwrap_or(f64::NAN))
                    .collect()
            })
            .collect();
        let p = Panel {
            x: 80.0 + 350.0 * k as f64,
            y: 40.0,
            w: 260.0,
            h: 240.0,
            title: format!("{name}: {title} population"),
        };
        svg.heatmap(&p, &x, &y, &values, 0.0, 1.0);
    }
    m.write(&common.out, &format!("sweep_{name}.svg"), svg.finish())?;
    m.record("cells", grid.cells.len());
    m.record("failed_cells", failed);
    m.record("saturated_cells", grid.cells.iter().filter(|c| c.saturated).count());
    m.finish(&common.out)
}

fn curve(fit: &DecayFitResult, lengths: &[usize]) -> Vec<(f64, f64)> {
    let lo = *lengths.iter().min().unwrap_or(&1) as f64;
    let hi = *lengths.iter().max().unwrap_or(&1) as f64;
    (0..=100)
        .map(|k| {
            let n = lo * (hi / lo).powf(k as f64 / 100.0);
            (n, fit.a * fit.p.powf(n) + fit.b)
        })
        .collect()
}

fn decay_svg(title: &str, ylabel: &str, sets: &[(&str, &'static str, &RbDataset, &DecayFitResult)]) -> String {
    let lengths: Vec<usize> = sets.iter().flat_map(|s| s.2.lengths.iter().copied()).collect();
    let lo = *lengths.iter().min().unwrap_or(&1) as f64;
    let hi = *lengths.iter().max().unwrap_or(&2) as f64;
    let series: Vec<Series> = sets
        .iter()
        .map(|(name, colour, data, fit)| Series {
            name: format!("{name}: p = {:.4}", fit.p),
            colour,
            points: decay_points(data, Population::Survival),
            curve: curve(fit, &data.lengths),
        })
        .collect();
    let mut svg = Svg::new(640.0, 420.0);
    let p = Panel { x: 80.0, y: 40.0, w: 520.0, h: 320.0, title: title.into() };
    svg.series(&p, &Axis::log(lo, hi, "sequence length"), &Axis::linear(0.0, 1.0, ylabel), &series);
    svg.finish()
}

fn leakage_summary(data: &RbDataset, protocol: Protocol, spectator: Population) -> serde_json::Value {
    match fit_leakage(data, spectator) {
        Ok(fit) => serde_json::to_value(RateSummary::leakage(protocol, spectator, fit)).expect("serialises"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn lengths_or(b: &BenchArgs, default: &[usize]) -> Vec<usize> {
    b.lengths.clone().unwrap_or_else(|| default.to_vec())
}

pub fn nb(common: &Common, a: &BenchArgs) -> Result<()> {
    let (cfg, mut m) = setup(common, "nb")?;
    let lengths = lengths_or(a, &NB_LENGTHS);
    let (noise, spam) = models(&cfg, a.noiseless, a.transfer)?;
    let rng = RngHandle::with_stream(common.seed, streams::NETWORK_BENCHMARKING);
    let data = run_network_benchmarking(&noise, &spam, &lengths, a.seeds, a.shots, rng)?;
    m.write(&common.out, "nb.csv", csv(&data)?)?;
    let fit = fit_exponential(&data, Population::Survival)?;
    let summary = RateSummary::nb(fit);
    let report = json!({
        "protocol": Protocol::Nb,
        "lengths": lengths,
        "seeds": a.seeds,
        "shots": a.shots,
        "noiseless": a.noiseless,
        "survival": summary,
        "leakage": {
            "spectator_l1": leakage_summary(&data, Protocol::Nb, Population::SpectatorL1),
            "spectator_l2": leakage_summary(&data, Protocol::Nb, Population::SpectatorL2),
        },
    });
    m.write(&common.out, "nb_fit.json", serde_json::to_string_pretty(&report)? + "\n")?;
    m.write(
        &common.out,
        "nb.svg",
        decay_svg("network benchmarking", "P(L1 = 0)", &[("survival", "steelblue", &data, &fit)]),
    )?;
    m.record("eps", summary.error_rate);
    m.record("eps_err", summary.error_rate_err);
    m.finish(&common.out)
}

pub fn rb(common: &Common, a: &RbArgs) -> Result<()> {
    let (cfg, mut m) = setup(common, "rb")?;
    let b = &a.bench;
    let lengths = lengths_or(b, &TQRB_LENGTHS);
    let (noise, spam) = models(&cfg, b.noiseless, b.transfer)?;
    let rng = RngHandle::with_stream(common.seed, streams::TWO_QUBIT_RB);
    let reference = run_two_qubit_rb(&noise, &spam, &lengths, b.seeds, b.shots, rng.split(0), None)?;
    m.write(&common.out, "rb_reference.csv", csv(&reference)?)?;
    let fr = fit_exponential(&reference, Population::Survival)?;
    let ref_summary = RateSummary::tqrb(fr);
    let mut report = json!({
        "lengths": lengths,
        "seeds": b.seeds,
        "shots": b.shots,
        "noiseless": b.noiseless,
        "p_reference": fr.p,
        "reference": ref_summary,
    });
    m.record("epc", ref_summary.error_rate);
    let mut sets = vec![("reference", "steelblue", &reference, &fr)];
    let interleaved;
    let fi;
    if let Some(Interleave::RemoteCnot) = a.interleave {
        let gate = [GateOp::cnot(QubitId::D1, QubitId::D2)];
        interleaved = run_two_qubit_rb(&noise, &spam, &lengths, b.seeds, b.shots, rng.split(1), Some(&gate))?;
        m.write(&common.out, "rb_interleaved.csv", csv(&interleaved)?)?;
        fi = fit_exponential(&interleaved, Population::Survival)?;
        let summary = RateSummary::interleaved(fi, &fr);
        report["p_interleaved"] = json!(fi.p);
        report["interleaved_gate"] = json!("remote-cnot");
        report["interleaved"] = serde_json::to_value(&summary)?;
        m.record("epg", summary.error_rate);
        m.record("epg_err", summary.error_rate_err);
        sets.push(("remote CNOT interleaved", "firebrick", &interleaved, &fi));
    }
    m.write(&common.out, "rb_fit.json", serde_json::to_string_pretty(&report)? + "\n")?;
    m.write(&common.out, "rb.svg", decay_svg("two-qubit randomized benchmarking", "P(00)", &sets))?;
    m.finish(&common.out)
}

fn bell_svg(report: &lcoupler_core::tomography::BellReport, target: &lcoupler_core::dynamics::CMatrix) -> String {
    let label = |i: usize, j: usize| format!("{i:02b}{j:02b}");
    let entries = |m: &lcoupler_core::dynamics::CMatrix| -> Vec<(String, f64)> {
        (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| (label(i, j), m[(i, j)].norm())).collect()
    };
    let mut svg = Svg::new(760.0, 560.0);
    let y = Axis::linear(0.0, 0.6, "|rho|");
    let top = Panel {
        x: 60.0,
        y: 40.0,
        w: 660.0,
        h: 200.0,
        title: format!("{}: |rho_ij| reconstructed, F = {:.4}", report.variant.name(), report.fidelity),
    };
    svg.bars(&top, &y, &entries(&report.tomography.rho), "steelblue");
    let bottom = Panel { x: 60.0, y: 310.0, w: 660.0, h: 200.0, title: "|rho_ij| target".into() };
    svg.bars(&bottom, &y, &entries(target), "gray");
    svg.finish()
}

pub fn bell(common: &Common, a: &BellArgs) -> Result<()> {
    let (cfg, mut m) = setup(common, "bell")?;
    let (noise, spam) = models(&cfg, a.noiseless, a.transfer)?;
    let rng = RngHandle::with_stream(common.seed, streams::TOMOGRAPHY);
    let readout = if a.raw_readout { Readout::Raw } else { Readout::Corrected };
    let report = bell_experiment(a.variant, &noise, &spam, a.shots, rng, readout)?;
    let name = a.variant.name();
    m.write(&common.out, &format!("bell_{name}.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    let target = lcoupler_core::tomography::bell_target(a.variant);
    m.write(&common.out, &format!("bell_{name}.svg"), bell_svg(&report, &target))?;
    m.record("variant", name);
    m.record("fidelity", report.fidelity);
    m.record("phase_optimized_fidelity", report.optimized.fidelity);
    m.record("reference_fidelity", report.reference_fidelity);
    m.record("readout", readout);
    m.finish(&common.out)
}

pub fn circuit(common: &Common, a: &CircuitArgs) -> Result<()> {
    let (cfg, mut m) = setup(common, "circuit")?;
    let times = GateTimes::from_config(&cfg);
    let ops = match a.name.as_str() {
        "remote-cnot" => compile_remote_cnot(QubitId::D1, QubitId::D2, &times)?,
        "remote-cnot-reverse" => compile_remote_cnot(QubitId::D2, QubitId::D1, &times)?,
        other => match other.strip_prefix("bell-").and_then(BellVariant::parse) {
            Some(v) => compile_circuit(&bell_circuit(v, &times), &times)?,
            None => {
                return Err(Error::Usage(format!(
                    "unknown circuit `{other}` (expected remote-cnot, remote-cnot-reverse or bell-<variant>)"
                ))
                .into())
            }
        },
    };
    let timed = schedule_asap(&ops);
    m.write(&common.out, &format!("circuit_{}.json", a.name), circuit_to_json(&timed) + "\n")?;
    m.record("gates", timed.len());
    m.record("duration_s", circuit_duration(&timed));
    m.finish(&common.out)
}

pub fn schedule(common: &Common, a: &ScheduleArgs) -> Result<()> {
    let (cfg, mut m) = setup(common, "schedule")?;
    let mut s = build_transfer_schedule(&cfg, a.method, default_theta_max(a.method), DEFAULT_DT)?;
    if a.reverse {
        s = reverse_schedule(&s);
    }
    let mut buf = Vec::new();
    s.write_csv(&mut buf)?;
    let suffix = if a.reverse { "_reverse" } else { "" };
    m.write(&common.out, &format!("schedule_{}{suffix}.csv", a.method.name()), buf)?;
    m.record("samples", s.samples.len());
    m.record("max_coupling_hz", s.max_coupling());
    m.finish(&common.out)
}

