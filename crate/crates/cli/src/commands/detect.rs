use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use dyst::detect::{compressibility_scores, extract_ipds, ks_two_sample, IpdSeries};
use dyst::traffic::{load_trace, ArpOp, NetKind};

use crate::commands::prepare_out_dir;
use crate::plot::{ScatterPlot, Series};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Class {
    Covert,
    Filtered,
    Legit,
    Untagged,
}

impl Class {
    fn label(&self) -> &'static str {
        match self {
            Class::Covert => "covert",
            Class::Filtered => "filtered",
            Class::Legit => "legit",
            Class::Untagged => "untagged",
        }
    }
}

struct Recording {
    name: String,
    class: Class,
    ipds: IpdSeries,
}

pub fn run(
    out_dir: &Path,
    window: usize,
    covert: &[PathBuf],
    filtered: &[PathBuf],
    legit: &[PathBuf],
    untagged: &[PathBuf],
) -> Result<()> {
    let mut recordings = Vec::new();
    for (paths, class) in [
        (covert, Class::Covert),
        (filtered, Class::Filtered),
        (legit, Class::Legit),
        (untagged, Class::Untagged),
    ] {
        for path in paths {
            recordings.push(load_recording(path, class)?);
        }
    }
    if recordings.is_empty() {
        anyhow::bail!("no recordings given");
    }
    let any_untagged = recordings.iter().any(|r| r.class == Class::Untagged);

    prepare_out_dir(
        out_dir,
        &format!(
            "# detect run\nwindow = {window}\nrecordings = {}\n",
            recordings.len()
        ),
    )?;

    // all-pairs two-sample KS over signal-packet delays
    let mut ks_csv = String::from("recording_a,recording_b,class,d_stat,p_value\n");
    let mut class_p: Vec<(String, f64)> = Vec::new();
    if recordings.len() < 2 {
        eprintln!("warning: single recording, KS comparison skipped");
    }
    for i in 0..recordings.len() {
        for j in i + 1..recordings.len() {
            let (a, b) = (&recordings[i], &recordings[j]);
            let result = ks_two_sample(&a.ipds, &b.ipds)?;
            let class = pair_class(a.class, b.class);
            let _ = writeln!(
                ks_csv,
                "{},{},{},{:.6},{:.6e}",
                a.name, b.name, class, result.d_stat, result.p_value
            );
            class_p.push((class.to_string(), result.p_value));
        }
    }
    fs::write(out_dir.join("ks.csv"), &ks_csv)?;

    // per-recording compressibility windows
    let mut kappa_csv = String::from("recording,class,window_index,kappa\n");
    let mut kappa_points: Vec<(Class, Vec<f64>)> = Vec::new();
    for recording in &recordings {
        match compressibility_scores(&recording.ipds, window) {
            Ok(scores) => {
                let values: Vec<f64> = scores.iter().map(|w| w.kappa).collect();
                for (index, w) in scores.iter().enumerate() {
                    let _ = writeln!(
                        kappa_csv,
                        "{},{},{index},{:.6}",
                        recording.name,
                        recording.class.label(),
                        w.kappa
                    );
                }
                kappa_points.push((recording.class, values));
            }
            Err(err) => eprintln!(
                "warning: {}: compressibility skipped ({err})",
                recording.name
            ),
        }
    }
    fs::write(out_dir.join("kappa.csv"), &kappa_csv)?;

    // class summary
    let mut summary = String::new();
    if any_untagged {
        eprintln!("warning: untagged recordings present, class summary incomplete");
    }
    for want in ["covert-vs-filtered", "legit-vs-legit", "covert-vs-legit"] {
        let ps: Vec<f64> = class_p
            .iter()
            .filter(|(class, _)| class == want)
            .map(|(_, p)| *p)
            .collect();
        if !ps.is_empty() {
            let mean = ps.iter().sum::<f64>() / ps.len() as f64;
            let _ = writeln!(summary, "{want}: {} pairs, mean p-value {mean:.4}", ps.len());
        }
    }
    if !summary.is_empty() {
        fs::write(out_dir.join("summary.txt"), &summary)?;
        print!("{summary}");
    }

    // kappa scatter, one series per class
    let series: Vec<Series> = [
        (Class::Covert, "#c5221f"),
        (Class::Filtered, "#1a73e8"),
        (Class::Legit, "#188038"),
        (Class::Untagged, "#9aa0a6"),
    ]
    .iter()
    .filter_map(|(class, color)| {
        let points: Vec<(f64, f64)> = kappa_points
            .iter()
            .filter(|(c, _)| c == class)
            .flat_map(|(_, values)| values.iter().copied())
            .enumerate()
            .map(|(i, kappa)| (i as f64, kappa))
            .collect();
        (!points.is_empty()).then_some(Series {
            label: class.label(),
            color,
            points,
        })
    })
    .collect();
    if !series.is_empty() {
        let svg = ScatterPlot {
            title: "Compressibility score per window",
            x_label: "window",
            y_label: "kappa",
            log_x: false,
            log_y: false,
            series,
        }
        .render();
        fs::write(out_dir.join("kappa.svg"), svg)?;
    }
    println!("wrote ks.csv, kappa.csv to {}", out_dir.display());
    Ok(())
}

fn pair_class(a: Class, b: Class) -> &'static str {
    use Class::*;
    match (a.min_pair(b), a.max_pair(b)) {
        (Covert, Filtered) => "covert-vs-filtered",
        (Covert, Legit) => "covert-vs-legit",
        (Legit, Legit) => "legit-vs-legit",
        (Covert, Covert) => "covert-vs-covert",
        (Filtered, Filtered) => "filtered-vs-filtered",
        (Filtered, Legit) => "filtered-vs-legit",
        _ => "untagged",
    }
}

impl Class {
    fn rank(&self) -> u8 {
        match self {
            Class::Covert => 0,
            Class::Filtered => 1,
            Class::Legit => 2,
            Class::Untagged => 3,
        }
    }

    fn min_pair(self, other: Self) -> Self {
        if self.rank() <= other.rank() {
            self
        } else {
            other
        }
    }

    fn max_pair(self, other: Self) -> Self {
        if self.rank() > other.rank() {
            self
        } else {
            other
        }
    }
}

fn load_recording(path: &Path, class: Class) -> Result<Recording> {
    let trace = load_trace(path).with_context(|| format!("loading {}", path.display()))?;
    // the signal channel rides on ARP requests; a warden watches their
    // inter-packet delays
    let ipds = extract_ipds(&trace, |r| {
        r.net_kind == NetKind::Arp && r.arp_op == Some(ArpOp::Request)
    })
    .with_context(|| format!("{}: too few ARP requests", path.display()))?;
    Ok(Recording {
        name: path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string()),
        class,
        ipds,
    })
}
