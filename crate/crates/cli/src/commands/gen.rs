use std::path::Path;

use anyhow::{bail, Context, Result};

use dyst::traffic::{save_trace, synth_trace, SynthSpec};

use crate::config::preset;

pub fn run(
    rate: Option<f64>,
    preset_name: Option<&str>,
    duration: f64,
    mix: f64,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let preset_rate = match preset_name {
        Some(name) => Some(
            preset(name)
                .with_context(|| format!("unknown preset {name:?}"))?
                .rate_per_hour,
        ),
        None => None,
    };
    let Some(rate) = rate.or(preset_rate) else {
        bail!("either --rate or --preset is required");
    };
    let spec = SynthSpec {
        poi_mix: mix,
        ..SynthSpec::new(rate, duration, 1.0, seed)
    };
    let records = synth_trace(&spec)?;
    save_trace(out, &records)?;
    println!(
        "wrote {} records ({:.0}/hour over {:.0}s) to {}",
        records.len(),
        rate,
        duration,
        out.display()
    );
    Ok(())
}
