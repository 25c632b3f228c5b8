use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Result;

use dyst::analysis::{
    chunk_ensemble, default_grid, monte_carlo_variant, pareto_mask, variant_point, VariantPoint,
    VariantSpec,
};

use crate::commands::prepare_out_dir;
use crate::plot::{ScatterPlot, Series};

/// Per-seed pooled Monte-Carlo outcome for one variant.
struct McColumns {
    distance: [Option<f64>; 2],
    bandwidth: [f64; 2],
}

pub fn run(out_dir: &Path, mc: bool, samples: u64, seed: u64, basic_only: bool) -> Result<()> {
    let grid = default_grid();
    let specs: Vec<VariantSpec> = if basic_only {
        grid.specs
            .iter()
            .filter(|s| matches!(s, VariantSpec::Basic { .. }))
            .copied()
            .collect()
    } else {
        grid.specs.clone()
    };
    eprintln!(
        "grid: {} cells enumerated, {} unsupported, {} evaluated",
        if basic_only { specs.len() } else { grid.cells_total },
        if basic_only { 0 } else { grid.cells_skipped },
        specs.len()
    );

    let points: Vec<VariantPoint> = specs.iter().map(variant_point).collect();
    let front = pareto_mask(&points);

    let mc_columns: Vec<Option<McColumns>> = if mc {
        // two seeds per run; pooled over a small chunk ensemble each
        specs
            .iter()
            .map(|spec| run_mc(spec, samples, seed).map(Some))
            .collect::<Result<_>>()?
    } else {
        specs.iter().map(|_| None).collect()
    };

    let mut csv = String::from(
        "mode,h,t,c,checksum,distance_analytic,bw_analytic,distance_mc,bw_mc,on_pareto_front,\
         distance_mc_seed2,bw_mc_seed2\n",
    );
    for ((point, on_front), mc_cols) in points.iter().zip(&front).zip(&mc_columns) {
        let (mode, h, t, c, checksum) = describe(&point.variant);
        let (d1, b1, d2, b2) = match mc_cols {
            Some(cols) => (
                cols.distance[0].map_or(String::new(), |d| format!("{d:.6}")),
                format!("{:.9e}", cols.bandwidth[0]),
                cols.distance[1].map_or(String::new(), |d| format!("{d:.6}")),
                format!("{:.9e}", cols.bandwidth[1]),
            ),
            None => (String::new(), String::new(), String::new(), String::new()),
        };
        let _ = writeln!(
            csv,
            "{mode},{h},{t},{c},{checksum},{:.6},{:.9e},{d1},{b1},{},{d2},{b2}",
            point.distance, point.bandwidth, on_front
        );
    }

    prepare_out_dir(
        out_dir,
        &format!(
            "# pareto sweep\nmc = {mc}\nsamples = {samples}\nseed = {seed}\nbasic_only = {basic_only}\n"
        ),
    )?;
    fs::write(out_dir.join("pareto.csv"), &csv)?;

    let mut front_csv = String::from("mode,h,t,c,checksum,distance,bandwidth\n");
    for (point, on_front) in points.iter().zip(&front) {
        if *on_front {
            let (mode, h, t, c, checksum) = describe(&point.variant);
            let _ = writeln!(
                front_csv,
                "{mode},{h},{t},{c},{checksum},{:.6},{:.9e}",
                point.distance, point.bandwidth
            );
        }
    }
    fs::write(out_dir.join("front.csv"), &front_csv)?;

    let split = |want_front: bool| {
        points
            .iter()
            .zip(&front)
            .filter(|(_, f)| **f == want_front)
            .map(|(p, _)| (p.distance, p.bandwidth))
            .collect::<Vec<_>>()
    };
    let svg = ScatterPlot {
        title: "Variant grid: distance vs steganographic bandwidth",
        x_label: "distance (PoIs between signals, log10)",
        y_label: "bandwidth (secret bits per PoI, log10)",
        log_x: true,
        log_y: true,
        series: vec![
            Series {
                label: "dominated",
                color: "#9aa0a6",
                points: split(false),
            },
            Series {
                label: "pareto front",
                color: "#c5221f",
                points: split(true),
            },
        ],
    }
    .render();
    fs::write(out_dir.join("pareto.svg"), svg)?;

    let front_size = front.iter().filter(|f| **f).count();
    println!(
        "evaluated {} variants; pareto front holds {} ({:.1}%)",
        points.len(),
        front_size,
        100.0 * front_size as f64 / points.len() as f64
    );
    println!("wrote pareto.csv, front.csv, pareto.svg to {}", out_dir.display());
    Ok(())
}

fn run_mc(spec: &VariantSpec, samples: u64, seed: u64) -> Result<McColumns> {
    let mut distance = [None; 2];
    let mut bandwidth = [0.0; 2];
    for (slot, stream) in [0u64, 1].iter().enumerate() {
        let mut key = [0u8; 16];
        key[..8].copy_from_slice(&seed.to_be_bytes());
        key[8..].copy_from_slice(&stream.to_be_bytes());
        // pool gate counts over a small chunk ensemble
        let chunks = chunk_ensemble(spec, key, 8);
        let per_chunk = samples.div_ceil(chunks.len() as u64);
        let mut signals = 0u64;
        let mut total = 0u64;
        for chunk in &chunks {
            let out = monte_carlo_variant(spec, per_chunk, key, chunk)?;
            signals += out.signals;
            total += out.samples;
        }
        distance[slot] = (signals > 0).then(|| total as f64 / signals as f64);
        bandwidth[slot] = spec.payload_bits() as f64 * signals as f64 / total as f64;
    }
    Ok(McColumns { distance, bandwidth })
}

fn describe(spec: &VariantSpec) -> (&'static str, u16, u16, u16, &'static str) {
    match *spec {
        VariantSpec::Basic { h } => ("basic", h, 0, 0, "-"),
        VariantSpec::Ext { h, c, t, checksum } => ("ext", h, t, c, checksum.label()),
    }
}
