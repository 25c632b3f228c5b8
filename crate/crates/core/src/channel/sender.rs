use super::{ChannelConfig, PoiEvent, SignalEvent};
use crate::analysis::VariantSpec;
use crate::bitcore::{derive_hash, BitVec, HashSpec};
use crate::codec::{ext_sender_gate, BitChunk, ExtCodecConfig};
use crate::Result;

/// Covert sender state machine.
///
/// Feed packets of interest in sender-view time order through
/// [`SenderState::step`]; call [`SenderState::finish`] once the trace ends so
/// a trailing isolation window can still resolve.
pub struct SenderState {
    chunks: Vec<BitChunk>,
    loop_message: bool,
    /// Index of the chunk awaiting its signal; `None` once done.
    cursor: Option<usize>,
    /// Chunks in emission order (grows past `chunks.len()` when looping).
    sent: Vec<BitChunk>,
    last_poi_ts: Option<f64>,
    /// Left-isolated PoI waiting for its right-isolation check.
    pending: Option<PoiEvent>,
    /// Hash of the previous evaluated PoI and whether it signalled; used to
    /// suppress back-to-back signals on identical hash values.
    prev_eval: Option<(BitVec, bool)>,
    /// Multi-pointer targets memoized per chunk payload.
    targets: std::collections::HashMap<BitVec, Vec<BitVec>>,
    pub pois_hashed: u64,
    pub pois_eligible: u64,
    pub signals_sent: u64,
}

impl SenderState {
    pub fn new(chunks: Vec<BitChunk>, loop_message: bool) -> Self {
        let cursor = if chunks.is_empty() { None } else { Some(0) };
        Self {
            chunks,
            loop_message,
            cursor,
            sent: Vec::new(),
            last_poi_ts: None,
            pending: None,
            prev_eval: None,
            targets: std::collections::HashMap::new(),
            pois_hashed: 0,
            pois_eligible: 0,
            signals_sent: 0,
        }
    }

    pub fn sent_chunks(&self) -> &[BitChunk] {
        &self.sent
    }

    pub fn done(&self) -> bool {
        self.cursor.is_none()
    }

    /// Process one PoI; may emit a signal (for the *previous* PoI when its
    /// isolation window closes in robust mode).
    pub fn step(&mut self, poi: PoiEvent, cfg: &ChannelConfig) -> Result<Option<SignalEvent>> {
        self.pois_hashed += 1;
        if !cfg.robust {
            self.last_poi_ts = Some(poi.ts);
            self.pois_eligible += 1;
            return self.evaluate(poi, poi.ts, cfg);
        }

        let mut emitted = None;
        if let Some(held) = self.pending.take() {
            if poi.ts - held.ts >= cfg.d_window {
                // isolated on both sides; the signal leaves once the window
                // has elapsed
                self.pois_eligible += 1;
                emitted = self.evaluate(held, held.ts + cfg.d_window, cfg)?;
            }
            // else: collision voids the held PoI, and the new PoI is not
            // left-isolated either
        }
        let left_isolated = self
            .last_poi_ts
            .is_none_or(|prev| poi.ts - prev >= cfg.d_window);
        self.last_poi_ts = Some(poi.ts);
        if left_isolated {
            self.pending = Some(poi);
        }
        Ok(emitted)
    }

    /// Resolve a trailing pending PoI after the trace ends at `end_ts`.
    pub fn finish(&mut self, end_ts: f64, cfg: &ChannelConfig) -> Result<Option<SignalEvent>> {
        let Some(held) = self.pending.take() else {
            return Ok(None);
        };
        if cfg.robust && end_ts - held.ts >= cfg.d_window {
            self.pois_eligible += 1;
            return self.evaluate(held, held.ts + cfg.d_window, cfg);
        }
        Ok(None)
    }

    fn current_chunk(&self) -> Option<&BitChunk> {
        self.cursor.map(|i| &self.chunks[i])
    }

    fn advance(&mut self) {
        let Some(i) = self.cursor else { return };
        self.sent.push(self.chunks[i]);
        self.cursor = if i + 1 < self.chunks.len() {
            Some(i + 1)
        } else if self.loop_message {
            Some(0)
        } else {
            None
        };
    }

    fn evaluate(
        &mut self,
        poi: PoiEvent,
        signal_ts: f64,
        cfg: &ChannelConfig,
    ) -> Result<Option<SignalEvent>> {
        let Some(chunk) = self.current_chunk().copied() else {
            return Ok(None);
        };
        let pointer = self.gate(&poi.hash, &chunk, cfg)?;
        // never signal twice on identical consecutive hash values
        let duplicate = matches!(&self.prev_eval, Some((prev, true)) if *prev == poi.hash);
        let fire = pointer.is_some() && !duplicate;
        self.prev_eval = Some((poi.hash, fire));
        if !fire {
            return Ok(None);
        }
        self.advance();
        self.signals_sent += 1;
        let pointer_index = pointer.unwrap();
        let ts = match cfg.multi.as_ref().and_then(|m| m.delay_alphabet.as_ref()) {
            Some(alphabet) => signal_ts + alphabet[pointer_index as usize],
            None => signal_ts,
        };
        Ok(Some(SignalEvent { ts, pointer_index }))
    }

    /// Signal/no-signal decision; returns the pointer index on a match.
    fn gate(&mut self, hash: &BitVec, chunk: &BitChunk, cfg: &ChannelConfig) -> Result<Option<u32>> {
        if cfg.pointers > 1 {
            if !self.targets.contains_key(&chunk.payload) {
                let targets = pointer_targets(chunk, cfg.pointers, &cfg.hash)?;
                self.targets.insert(chunk.payload, targets);
            }
            let targets = &self.targets[&chunk.payload];
            return Ok(match_pointer_targets(targets, hash));
        }
        match cfg.variant {
            VariantSpec::Basic { .. } => Ok((*hash == chunk.payload).then_some(0)),
            VariantSpec::Ext { h, c, t, checksum } => {
                let ext = ExtCodecConfig::new(h as usize, c as usize, t as usize, checksum)?;
                Ok(ext_sender_gate(hash, chunk, &ext)?.then_some(0))
            }
        }
    }
}

/// The `n` hash targets of a chunk: target `i` hashes the packed chunk bits
/// followed by the 32-bit big-endian counter `i`.
pub fn pointer_targets(chunk: &BitChunk, n: u32, hash: &HashSpec) -> Result<Vec<BitVec>> {
    let mut input = chunk.payload.to_bytes_msb();
    let base = input.len();
    input.extend_from_slice(&[0u8; 4]);
    (0..n)
        .map(|i| {
            input[base..].copy_from_slice(&i.to_be_bytes());
            derive_hash(hash, &input)
        })
        .collect()
}

/// Smallest matching counter, if any.
pub(crate) fn match_pointer_targets(targets: &[BitVec], poi_hash: &BitVec) -> Option<u32> {
    targets
        .iter()
        .position(|t| t == poi_hash)
        .map(|i| i as u32)
}

/// One-shot multi-pointer gate: smallest `i < n` whose chunk-and-counter
/// hash equals the hash of the PoI input, matching against `n` precomputed
/// targets.
pub fn multi_pointer_gate(
    chunk: &BitChunk,
    poi_input: &[u8],
    n: u32,
    hash: &HashSpec,
) -> Result<Option<u32>> {
    let poi_hash = derive_hash(hash, poi_input)?;
    let targets = pointer_targets(chunk, n, hash)?;
    Ok(match_pointer_targets(&targets, &poi_hash))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcore::ChecksumKind;
    use crate::traffic::PoiPolicy;

    fn basic_cfg(h: usize, robust: bool) -> ChannelConfig {
        ChannelConfig {
            variant: VariantSpec::Basic { h: h as u16 },
            hash: HashSpec::sha3(h).unwrap(),
            poi: PoiPolicy::Custom {
                id: crate::traffic::CustomPoi::All,
            },
            robust,
            d_window: if robust { 0.5 } else { 0.0 },
            r_window: if robust { 0.3 } else { 0.0 },
            pointers: 1,
            frac_filter: true,
            poi_horizon: 60.0,
            multi: None,
        }
    }

    fn chunk(s: &str) -> BitChunk {
        BitChunk {
            payload: s.parse().unwrap(),
            index: 0,
        }
    }

    fn poi(ts: f64, hash: &str) -> PoiEvent {
        PoiEvent {
            ts,
            hash: hash.parse().unwrap(),
        }
    }

    #[test]
    fn non_robust_signals_immediately_and_advances() {
        let cfg = basic_cfg(4, false);
        let mut sender = SenderState::new(vec![chunk("1010"), chunk("0001")], false);
        assert!(sender.step(poi(1.0, "1111"), &cfg).unwrap().is_none());
        let sig = sender.step(poi(2.0, "1010"), &cfg).unwrap().unwrap();
        assert_eq!(sig.ts, 2.0);
        assert_eq!(sig.pointer_index, 0);
        // now waiting for the second chunk
        assert!(sender.step(poi(3.0, "1010"), &cfg).unwrap().is_none());
        let sig = sender.step(poi(4.0, "0001"), &cfg).unwrap().unwrap();
        assert_eq!(sig.ts, 4.0);
        assert!(sender.done());
        assert_eq!(sender.signals_sent, 2);
    }

    #[test]
    fn robust_ignores_colliding_pois() {
        let cfg = basic_cfg(4, true);
        // two matching PoIs 0.1 s apart with D = 0.5: both ignored
        let mut sender = SenderState::new(vec![chunk("1010")], false);
        assert!(sender.step(poi(1.0, "1010"), &cfg).unwrap().is_none());
        assert!(sender.step(poi(1.1, "1010"), &cfg).unwrap().is_none());
        assert!(sender.step(poi(9.0, "0000"), &cfg).unwrap().is_none());
        assert!(sender.finish(20.0, &cfg).unwrap().is_none());
        assert_eq!(sender.signals_sent, 0);
    }

    #[test]
    fn robust_signals_isolated_poi_after_window() {
        let cfg = basic_cfg(4, true);
        let mut sender = SenderState::new(vec![chunk("1010")], false);
        assert!(sender.step(poi(1.0, "1010"), &cfg).unwrap().is_none());
        // the next PoI is far away; the held PoI resolves now
        let sig = sender.step(poi(5.0, "0000"), &cfg).unwrap().unwrap();
        assert_eq!(sig.ts, 1.5); // emitted when the window closed
        assert_eq!(sender.signals_sent, 1);
    }

    #[test]
    fn robust_trailing_poi_resolves_on_finish() {
        let cfg = basic_cfg(4, true);
        let mut sender = SenderState::new(vec![chunk("1010")], false);
        assert!(sender.step(poi(1.0, "1010"), &cfg).unwrap().is_none());
        let sig = sender.finish(10.0, &cfg).unwrap().unwrap();
        assert_eq!(sig.ts, 1.5);
    }

    #[test]
    fn duplicate_consecutive_hash_not_signalled_twice() {
        let cfg = basic_cfg(4, false);
        let mut sender = SenderState::new(vec![chunk("1010"), chunk("1010")], false);
        assert!(sender.step(poi(1.0, "1010"), &cfg).unwrap().is_some());
        // identical hash right after a signal: suppressed
        assert!(sender.step(poi(1.2, "1010"), &cfg).unwrap().is_none());
        // a different hash in between re-arms the gate
        assert!(sender.step(poi(1.4, "0111"), &cfg).unwrap().is_none());
        assert!(sender.step(poi(1.6, "1010"), &cfg).unwrap().is_some());
    }

    #[test]
    fn ext_gate_wired_through() {
        let mut cfg = basic_cfg(5, false);
        cfg.variant = VariantSpec::Ext {
            h: 5,
            c: 2,
            t: 1,
            checksum: ChecksumKind::OnesCount,
        };
        let mut sender = SenderState::new(vec![chunk("101")], false);
        let sig = sender.step(poi(1.0, "10111"), &cfg).unwrap();
        assert!(sig.is_some());
        let mut sender = SenderState::new(vec![chunk("110")], false);
        assert!(sender.step(poi(1.0, "10111"), &cfg).unwrap().is_none());
    }

    #[test]
    fn pigeonhole_with_full_distinct_target_set() {
        // with n = 2^h distinct targets, every hash matches some counter
        let targets: Vec<BitVec> = (0..16u64)
            .map(|v| BitVec::from_u64(v, 4).unwrap())
            .collect();
        for v in 0..16u64 {
            let hash = BitVec::from_u64(v, 4).unwrap();
            assert_eq!(match_pointer_targets(&targets, &hash), Some(v as u32));
        }
    }

    #[test]
    fn single_pointer_gate_reduces_to_target_equality() {
        let hash = HashSpec::sha3(8).unwrap();
        let ch = chunk("10100101");
        let targets = pointer_targets(&ch, 1, &hash).unwrap();
        assert_eq!(targets.len(), 1);
        let mut input = ch.payload.to_bytes_msb();
        input.extend_from_slice(&0u32.to_be_bytes());
        // a PoI input that happens to be exactly the chunk-with-counter
        // input must match pointer 0
        assert_eq!(
            multi_pointer_gate(&ch, &input, 1, &hash).unwrap(),
            Some(0)
        );
    }
}
