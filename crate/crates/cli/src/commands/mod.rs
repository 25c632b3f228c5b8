pub mod bench;
pub mod detect;
pub mod gen;
pub mod pareto;
pub mod sim;

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

/// Create the output directory and echo the exact invocation + resolved
/// configuration into it (the reproducibility contract).
pub fn prepare_out_dir(out_dir: &Path, resolved_config: &str) -> Result<()> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let args: Vec<String> = std::env::args().collect();
    fs::write(out_dir.join("invocation.txt"), args.join(" ") + "\n")?;
    fs::write(out_dir.join("config.echo.toml"), resolved_config)?;
    Ok(())
}
