//! Traffic ingestion and generation: the canonical trace format, a classic
//! pcap importer, packet-of-interest classification, a Poisson synthetic
//! generator and the two-observer jitter model.
//!
//! The canonical interchange format is JSON Lines (`dyst-trace/1`): a header
//! line `{"schema":"dyst-trace/1"}` followed by one record per line with
//! addresses hex-encoded. pcap is an importer, not the native format.

mod jitter;
mod pcap;
mod poi;
mod record;
mod synth;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

pub use jitter::{apply_jitter, JitterModel};
pub use pcap::{read_pcap, PcapCapture};
pub use poi::{classify_poi, CustomPoi, PoiPolicy};
pub use record::{read_jsonl, write_jsonl, ArpOp, NetKind, TraceRecord, TRACE_SCHEMA};
pub use synth::{synth_trace, SynthSpec};

use crate::{Error, Result};

/// Load a trace from a `.jsonl` trace file or a classic `.pcap` capture,
/// dispatching on the file extension.
pub fn load_trace(path: &Path) -> Result<Vec<TraceRecord>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pcap") => Ok(read_pcap(path)?.records),
        Some("jsonl") | Some("json") => {
            let file = BufReader::new(File::open(path)?);
            read_jsonl(file)
        }
        other => Err(Error::UnsupportedFormat(format!(
            "unknown trace extension {other:?} for {}",
            path.display()
        ))),
    }
}

/// Write a trace in the canonical JSONL format.
pub fn save_trace(path: &Path, records: &[TraceRecord]) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    write_jsonl(&mut file, records)
}
