//! The covert sender and receiver state machines.
//!
//! The sender watches its view of the traffic for packets of interest whose
//! hash signals the current message chunk; the receiver logs recent PoI
//! hashes and decodes one chunk per observed signal. Robust mode adds the
//! sender-side isolation window `D` (only PoIs with no neighbour within `D`
//! seconds are considered) and the receiver-side guard window `R` (PoIs
//! arriving less than `R` seconds before a signal are ignored).

mod receiver;
mod run;
mod sender;

use serde::{Deserialize, Serialize};

pub use receiver::{CrEvent, ReceiverState};
pub use run::{
    direct_embedding_baseline, inject_signals, is_signal_record, run_channel, BaselineReport,
    RunConfig, SignalTemplate, TranscriptCounters, TranscriptReport, TranscriptTiming,
    TRANSCRIPT_SCHEMA,
};
pub use sender::{multi_pointer_gate, pointer_targets, SenderState};

use crate::analysis::VariantSpec;
use crate::bitcore::{BitVec, HashSpec};
use crate::traffic::{NetKind, PoiPolicy, TraceRecord};
use crate::{Error, Result};

/// One hashed packet of interest as seen by one observer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoiEvent {
    pub ts: f64,
    pub hash: BitVec,
}

/// One emitted signal. `pointer_index` is always 0 for single-pointer
/// channels; multi-pointer channels attach the matched counter as side
/// information (a log2(n)-bit storage channel).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalEvent {
    pub ts: f64,
    pub pointer_index: u32,
}

/// Extra configuration for multi-pointer operation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiPointerConfig {
    /// Message bits per chunk; independent of the hash width.
    pub chunk_bits: u16,
    /// Alternative pointer encoding: the i-th entry is the extra delay used
    /// to express counter `i` instead of attaching side information.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_alphabet: Option<Vec<f64>>,
}

/// Everything that determines one channel variant end to end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub variant: VariantSpec,
    pub hash: HashSpec,
    pub poi: PoiPolicy,
    /// Robust mode: require PoI isolation at the sender and apply the
    /// receiver guard window.
    #[serde(default)]
    pub robust: bool,
    /// Sender isolation window `D` in seconds.
    #[serde(default)]
    pub d_window: f64,
    /// Receiver guard window `R` in seconds.
    #[serde(default)]
    pub r_window: f64,
    /// Number of hash pointers (1 = plain operation).
    #[serde(default = "one")]
    pub pointers: u32,
    /// Drop PoIs whose receive timestamp is within 0.05 s of a full second,
    /// so both observers hash the same integer second.
    #[serde(default = "yes")]
    pub frac_filter: bool,
    /// Receiver PoI log horizon in seconds.
    #[serde(default = "default_horizon")]
    pub poi_horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multi: Option<MultiPointerConfig>,
}

fn one() -> u32 {
    1
}

fn yes() -> bool {
    true
}

fn default_horizon() -> f64 {
    60.0
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        self.variant.validate()?;
        self.hash.validate()?;
        if self.hash.bits() != self.variant.hash_bits() {
            return Err(Error::InvalidConfig(format!(
                "hash produces {} bits but the variant compares {}",
                self.hash.bits(),
                self.variant.hash_bits()
            )));
        }
        if self.robust && (self.d_window <= 0.0 || self.r_window <= 0.0) {
            return Err(Error::InvalidConfig(
                "robust mode requires positive D and R windows".into(),
            ));
        }
        if self.pointers == 0 {
            return Err(Error::InvalidConfig("pointer count must be >= 1".into()));
        }
        if self.pointers > 1 {
            let multi = self.multi.as_ref().ok_or_else(|| {
                Error::InvalidConfig("pointers > 1 requires the multi-pointer config".into())
            })?;
            if multi.chunk_bits == 0 || multi.chunk_bits as usize > crate::bitcore::MAX_BITS {
                return Err(Error::InvalidConfig("multi-pointer chunk_bits out of range".into()));
            }
            if !matches!(self.variant, VariantSpec::Basic { .. }) {
                return Err(Error::InvalidConfig(
                    "multi-pointer operation works on the basic variant".into(),
                ));
            }
            if let Some(alphabet) = &multi.delay_alphabet {
                if alphabet.len() < self.pointers as usize {
                    return Err(Error::InvalidConfig(
                        "delay alphabet shorter than pointer count".into(),
                    ));
                }
            }
        }
        if self.poi_horizon <= 0.0 {
            return Err(Error::InvalidConfig("poi horizon must be positive".into()));
        }
        Ok(())
    }

    /// Message bits carried per signal.
    pub fn chunk_bits(&self) -> usize {
        if self.pointers > 1 {
            self.multi.as_ref().map_or(0, |m| m.chunk_bits as usize)
        } else {
            self.variant.payload_bits()
        }
    }

    /// Bits of pointer information per signal: the signal itself carries one
    /// bit, a multi-pointer signal carries `ceil(log2 n)` counter bits.
    pub fn pointer_bits(&self) -> u32 {
        if self.pointers <= 1 {
            1
        } else {
            64 - (self.pointers as u64 - 1).leading_zeros()
        }
    }
}

/// Hash input for one packet of interest as seen at `observer_ts`: source
/// address bytes (link source for ARP) concatenated with the ASCII decimal
/// integer second. Returns `None` when the fractional-second filter drops
/// the packet.
pub fn poi_hash_input(
    record: &TraceRecord,
    observer_ts: f64,
    frac_filter: bool,
) -> Option<Vec<u8>> {
    if frac_filter {
        let frac = observer_ts - observer_ts.floor();
        if !(0.05..=0.95).contains(&frac) {
            return None;
        }
    }
    let mut input = match record.net_kind {
        NetKind::Arp => record.link_src.to_vec(),
        _ => record
            .net_src
            .clone()
            .unwrap_or_else(|| record.link_src.to_vec()),
    };
    input.extend_from_slice(format!("{}", observer_ts.floor() as i64).as_bytes());
    Some(input)
}
