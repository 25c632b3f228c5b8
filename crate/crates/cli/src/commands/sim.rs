use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use dyst::channel::{inject_signals, is_signal_record, run_channel, SignalTemplate};
use dyst::traffic::save_trace;

use crate::commands::prepare_out_dir;
use crate::config::ExperimentConfig;

pub fn run(
    config_path: &Path,
    seed_override: Option<u64>,
    out_dir: &Path,
    trace_override: Option<&Path>,
    write_traces: bool,
) -> Result<()> {
    let mut config = ExperimentConfig::load(config_path)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let message = config.message_bytes()?;
    let run_config = config.run_config()?;
    let trace = config.trace(trace_override)?;

    let report = run_channel(&trace, &run_config, &message)?;

    prepare_out_dir(out_dir, &toml::to_string_pretty(&config)?)?;
    fs::write(
        out_dir.join("transcript.json"),
        serde_json::to_string_pretty(&report)?,
    )?;

    let summary = format!(
        "chars correct: {}/{} ({:.1}%)\n\
         chunks correct: {}/{}\n\
         complete: {}\n\
         signals sent: {}\n\
         PoIs observed/hashed/eligible: {}/{}/{} (utilization {:.1}%)\n\
         decode failures: {}\n\
         time to transmit, from start:        {}\n\
         time to transmit, from first signal: {}\n",
        report.chars_correct,
        report.chars_total,
        report.chars_correct_pct,
        report.chunks_correct,
        report.chunks_total,
        report.complete,
        report.counters.signals_sent,
        report.counters.pois_cs_observed,
        report.counters.pois_cs_hashed,
        report.counters.pois_cs_eligible,
        report.counters.poi_utilization * 100.0,
        report.counters.decode_failures,
        format_duration(report.timing.from_start_s),
        format_duration(report.timing.from_first_signal_s),
    );
    fs::write(out_dir.join("summary.txt"), &summary)?;
    print!("{summary}");

    if write_traces {
        let template = SignalTemplate::default();
        let covert = inject_signals(&trace, &report.signals, &template);
        save_trace(&out_dir.join("covert.jsonl"), &covert)?;
        let filtered: Vec<_> = covert
            .iter()
            .filter(|r| !is_signal_record(r, &template))
            .cloned()
            .collect();
        save_trace(&out_dir.join("filtered.jsonl"), &filtered)
            .context("writing filtered trace")?;
        println!(
            "wrote covert.jsonl ({} records) and filtered.jsonl ({} records)",
            covert.len(),
            filtered.len()
        );
    }
    Ok(())
}

fn format_duration(seconds: f64) -> String {
    if !seconds.is_finite() {
        return "n/a (no signal sent)".into();
    }
    let total = seconds.round() as i64;
    format!("{:02}:{:02}:{:02}", total / 3600, (total / 60) % 60, total % 60)
}
