use std::collections::VecDeque;

use super::{ChannelConfig, PoiEvent, SignalEvent};
use crate::analysis::VariantSpec;
use crate::bitcore::BitVec;
use crate::channel::sender::pointer_targets;
use crate::codec::{ext_first_fit, BitChunk, ExtCodecConfig};
use crate::Result;

/// An event as seen by the covert receiver, in receiver-view time order.
#[derive(Clone, Copy, Debug)]
pub enum CrEvent {
    Poi(PoiEvent),
    Signal(SignalEvent),
}

impl CrEvent {
    pub fn ts(&self) -> f64 {
        match self {
            CrEvent::Poi(p) => p.ts,
            CrEvent::Signal(s) => s.ts,
        }
    }
}

/// Covert receiver state machine: a short-horizon log of recent PoI hashes
/// ("local database") plus the decoded chunk list.
pub struct ReceiverState {
    poi_log: VecDeque<(f64, BitVec)>,
    pub decoded: Vec<Option<BitVec>>,
    pub decode_failures: u64,
    pub pois_logged: u64,
    pub signals_seen: u64,
    /// Known chunk alphabet for multi-pointer decoding (bench mode): the
    /// receiver cannot invert the hash, so it tests each known chunk against
    /// the signalled counter.
    pub chunk_alphabet: Vec<BitChunk>,
    /// Precomputed hash targets per alphabet chunk, built on first use.
    alphabet_targets: Option<Vec<Vec<BitVec>>>,
}

impl Default for ReceiverState {
    fn default() -> Self {
        Self::new()
    }
}

impl ReceiverState {
    pub fn new() -> Self {
        Self {
            poi_log: VecDeque::new(),
            decoded: Vec::new(),
            decode_failures: 0,
            pois_logged: 0,
            signals_seen: 0,
            chunk_alphabet: Vec::new(),
            alphabet_targets: None,
        }
    }

    /// Process one receiver-view event. Returns the decoded chunk when the
    /// event was a signal that decoded successfully.
    pub fn step(&mut self, event: CrEvent, cfg: &ChannelConfig) -> Result<Option<BitChunk>> {
        match event {
            CrEvent::Poi(poi) => {
                self.pois_logged += 1;
                self.poi_log.push_back((poi.ts, poi.hash));
                let cutoff = poi.ts - cfg.poi_horizon;
                while self.poi_log.front().is_some_and(|(ts, _)| *ts < cutoff) {
                    self.poi_log.pop_front();
                }
                Ok(None)
            }
            CrEvent::Signal(signal) => {
                self.signals_seen += 1;
                let guard = if cfg.robust { cfg.r_window } else { 0.0 };
                let hash = self
                    .poi_log
                    .iter()
                    .rev()
                    .find(|(ts, _)| *ts <= signal.ts - guard)
                    .map(|(_, hash)| *hash);
                let Some(hash) = hash else {
                    self.decode_failures += 1;
                    self.decoded.push(None);
                    return Ok(None);
                };
                let decoded = self.decode(&hash, &signal, cfg)?;
                if decoded.is_none() {
                    self.decode_failures += 1;
                }
                self.decoded.push(decoded);
                Ok(decoded.map(|payload| BitChunk {
                    payload,
                    index: self.decoded.len() - 1,
                }))
            }
        }
    }

    fn decode(
        &mut self,
        hash: &BitVec,
        signal: &SignalEvent,
        cfg: &ChannelConfig,
    ) -> Result<Option<BitVec>> {
        if cfg.pointers > 1 {
            // try every known chunk against the signalled counter
            if self.alphabet_targets.is_none() {
                let targets = self
                    .chunk_alphabet
                    .iter()
                    .map(|chunk| pointer_targets(chunk, cfg.pointers, &cfg.hash))
                    .collect::<Result<Vec<_>>>()?;
                self.alphabet_targets = Some(targets);
            }
            let targets = self.alphabet_targets.as_ref().unwrap();
            for (chunk, chunk_targets) in self.chunk_alphabet.iter().zip(targets) {
                if chunk_targets.get(signal.pointer_index as usize) == Some(hash) {
                    return Ok(Some(chunk.payload));
                }
            }
            return Ok(None);
        }
        match cfg.variant {
            VariantSpec::Basic { .. } => Ok(Some(*hash)),
            VariantSpec::Ext { h, c, t, checksum } => {
                let ext = ExtCodecConfig::new(h as usize, c as usize, t as usize, checksum)?;
                Ok(ext_first_fit(hash, &ext)?.map(|fit| fit.message))
            }
        }
    }
}
