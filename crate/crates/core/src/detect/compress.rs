use std::io::Write;

use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use super::IpdSeries;
use crate::{Error, Result};

/// Default window length in delays.
pub const DEFAULT_WINDOW_LEN: usize = 1000;

/// Compressibility of one window of inter-packet delays.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CompressWindow {
    /// `|S| / |Im(S)|`: raw over compressed byte length.
    pub kappa: f64,
    pub window_len: usize,
}

/// Score consecutive non-overlapping windows of `window_len` delays.
///
/// Each delay is rendered as a fixed-width decimal string with millisecond
/// precision (six integer digits, a point, three fraction digits — ten bytes
/// per delay), the window's strings are concatenated without separators into
/// `S`, and `Im(S)` is the DEFLATE compression of `S` at maximum level
/// inside a gzip container. Scores are only comparable under this exact
/// rendering. The trailing partial window is discarded.
pub fn compressibility_scores(
    series: &IpdSeries,
    window_len: usize,
) -> Result<Vec<CompressWindow>> {
    if window_len == 0 {
        return Err(Error::InvalidConfig("window length must be positive".into()));
    }
    if series.len() < window_len {
        return Err(Error::SeriesTooShort {
            need: window_len,
            got: series.len(),
        });
    }
    series
        .deltas
        .chunks_exact(window_len)
        .map(|window| {
            let mut raw = String::with_capacity(window.len() * 10);
            for &delta in window {
                raw.push_str(&render_delta(delta));
            }
            let compressed = gzip_len(raw.as_bytes())?;
            Ok(CompressWindow {
                kappa: raw.len() as f64 / compressed as f64,
                window_len,
            })
        })
        .collect()
}

/// Fixed-width rendering: 6 integer digits, point, 3 fraction digits.
/// Saturates at 999999.999 so the width is always ten bytes.
fn render_delta(delta: f64) -> String {
    let clamped = delta.clamp(0.0, 999_999.999);
    format!("{clamped:010.3}")
}

fn gzip_len(data: &[u8]) -> Result<usize> {
    let mut encoder = GzEncoder::new(Vec::new(), Compression::best());
    encoder.write_all(data)?;
    Ok(encoder.finish()?.len())
}
