use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Result};

use dyst::channel::{direct_embedding_baseline, MultiPointerConfig};

use crate::commands::prepare_out_dir;
use crate::config::ExperimentConfig;
use crate::plot::{ScatterPlot, Series};

pub fn run(
    config_path: &Path,
    pointer_counts: &[u32],
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<()> {
    let mut config = ExperimentConfig::load(config_path)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let message = config.message_bytes()?;
    let base = config.run_config()?;
    let h = base.channel.variant.hash_bits() as u16;
    if pointer_counts.iter().any(|&n| n == 0) {
        bail!("pointer counts must be >= 1");
    }
    let trace = config.trace(None)?;

    let mut csv = String::from(
        "pointers,pointer_bits,chunk_bits,signals,caf,dyst_bits_per_hour,baseline_bits_per_hour\n",
    );
    let mut dyst_points = Vec::new();
    let mut baseline_points = Vec::new();
    for &n in pointer_counts {
        let mut run = base.clone();
        run.loop_message = true;
        run.channel.pointers = n;
        run.channel.multi = (n > 1).then_some(MultiPointerConfig {
            // same chunk size across the sweep so rows stay comparable
            chunk_bits: h,
            delay_alphabet: None,
        });
        run.channel.validate()?;
        let (_, report) = direct_embedding_baseline(&trace, &run, &message)?;
        let _ = writeln!(
            csv,
            "{n},{},{},{},{:.4},{:.3},{:.3}",
            report.pointer_bits,
            report.chunk_bits,
            report.signal_slots,
            report.caf,
            report.dyst_bits_per_hour,
            report.baseline_bits_per_hour
        );
        dyst_points.push((report.pointer_bits as f64, report.dyst_bits_per_hour));
        baseline_points.push((report.pointer_bits as f64, report.baseline_bits_per_hour));
        println!(
            "n={n}: {} signals, CAF {:.2}, {:.1} vs {:.1} bits/hour",
            report.signal_slots, report.caf, report.dyst_bits_per_hour,
            report.baseline_bits_per_hour
        );
    }

    prepare_out_dir(out_dir, &toml::to_string_pretty(&config)?)?;
    fs::write(out_dir.join("bench.csv"), &csv)?;
    let svg = ScatterPlot {
        title: "Throughput vs pointer width",
        x_label: "pointer bits",
        y_label: "bits per hour",
        log_x: false,
        log_y: false,
        series: vec![
            Series {
                label: "hash pointer channel",
                color: "#c5221f",
                points: dyst_points,
            },
            Series {
                label: "direct embedding",
                color: "#1a73e8",
                points: baseline_points,
            },
        ],
    }
    .render();
    fs::write(out_dir.join("bench.svg"), svg)?;
    println!("wrote bench.csv, bench.svg to {}", out_dir.display());
    Ok(())
}
