//! History covert channel toolkit.
//!
//! A *history covert channel* transmits a secret message without ever putting
//! secret bits on the wire: the covert sender (CS) waits until a legitimate
//! third-party packet — a *packet of interest* (PoI) observable by both CS and
//! the covert receiver (CR) — hashes to the next message chunk, then emits a
//! single innocuous *signal* packet (e.g. an ordinary ARP request). The CR
//! keeps a short-lived log of recent PoI hashes and, on each signal, decodes
//! the chunk from the most recent logged hash. Only the signal timing is
//! covert; the data channel is unmodified legitimate traffic.
//!
//! The crate is organised around that pipeline:
//!
//! - [`bitcore`]: bit vectors, hash/PRF derivation, checksum functions and the
//!   canonical enumeration of near-miss hash modifications.
//! - [`codec`]: message chunking and the extended (checksum-tolerant)
//!   encode / first-fit decode logic shared verbatim by CS and CR.
//! - [`analysis`]: closed-form distance/bandwidth math, Monte-Carlo
//!   cross-checks over an AES counter PRF, Pareto-front extraction and
//!   sizing helpers.
//! - [`traffic`]: pcap ingestion, the canonical JSONL trace format, PoI
//!   classification, synthetic traffic generation and a jitter model that
//!   produces per-observer views of one trace.
//! - [`channel`]: the CS and CR state machines, robust mode (isolation and
//!   guard windows), the multi-pointer extension and the direct-embedding
//!   baseline.
//! - [`detect`]: the warden's side — two-sample Kolmogorov–Smirnov test,
//!   compressibility scores over inter-packet delays, and ROC/AUC scoring.

pub mod analysis;
pub mod bitcore;
pub mod channel;
pub mod codec;
pub mod detect;
mod error;
pub mod traffic;

pub use error::{Error, Result};
