use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::{poi_hash_input, ChannelConfig, CrEvent, PoiEvent, ReceiverState, SenderState, SignalEvent};
use crate::bitcore::derive_hash;
use crate::codec::{join_chunks, split_message, BitChunk};
use crate::traffic::{apply_jitter, classify_poi, ArpOp, JitterModel, NetKind, TraceRecord};
use crate::{Error, Result};

/// Schema tag of the serialized transcript.
pub const TRANSCRIPT_SCHEMA: &str = "dyst-transcript/1";

/// One end-to-end simulation: channel parameters plus the jitter model and
/// seed that produce the two observer views.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub channel: ChannelConfig,
    pub jitter: JitterModel,
    pub seed: u64,
    /// Cycle the message forever instead of stopping after the last chunk
    /// (used by detection experiments and throughput benches).
    #[serde(default)]
    pub loop_message: bool,
}

/// Counters and outcomes of one simulated transmission.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TranscriptReport {
    pub schema: String,
    pub config: RunConfig,
    pub counters: TranscriptCounters,
    /// Chunk indices decoded incorrectly or not at all (first message pass).
    pub chunk_errors: Vec<usize>,
    pub chunks_total: usize,
    pub chunks_correct: usize,
    pub chars_total: usize,
    pub chars_correct: usize,
    pub chars_correct_pct: f64,
    pub timing: TranscriptTiming,
    /// Whole message carried by the trace (signals_sent covers every chunk).
    pub complete: bool,
    pub decoded_message_hex: String,
    #[serde(skip)]
    pub signals: Vec<SignalEvent>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TranscriptCounters {
    /// PoIs classified in the sender's view.
    pub pois_cs_observed: u64,
    /// PoIs surviving the fractional-second filter at the sender.
    pub pois_cs_hashed: u64,
    /// PoIs the sender gate actually evaluated (isolation filter applied in
    /// robust mode).
    pub pois_cs_eligible: u64,
    /// Eligible fraction of observed PoIs.
    pub poi_utilization: f64,
    pub pois_cr_logged: u64,
    pub signals_sent: u64,
    pub signals_delivered: u64,
    pub decode_failures: u64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TranscriptTiming {
    /// Last message signal minus trace start.
    pub from_start_s: f64,
    /// Last message signal minus first signal.
    pub from_first_signal_s: f64,
}

/// Simulate one transmission of `message` over `trace`.
///
/// The sender processes its jittered view of the trace; each emitted signal
/// is delivered to the receiver with an independent signal-path delay drawn
/// from the same jitter model, merged into the receiver's own PoI view in
/// receiver time order.
pub fn run_channel(
    trace: &[TraceRecord],
    cfg: &RunConfig,
    message: &[u8],
) -> Result<TranscriptReport> {
    cfg.channel.validate()?;
    let width = cfg.channel.chunk_bits();
    let chunks = split_message(message, width)?;
    if chunks.is_empty() {
        return Err(Error::EmptyInput("message"));
    }
    let chunks_total = chunks.len();
    let (view_cs, view_cr) = apply_jitter(trace, &cfg.jitter, cfg.seed)?;

    // --- sender pass ---
    let mut sender = SenderState::new(chunks.clone(), cfg.loop_message);
    let mut pois_cs_observed = 0u64;
    let mut signals: Vec<SignalEvent> = Vec::new();
    let mut end_ts = f64::NEG_INFINITY;
    for record in &view_cs {
        end_ts = end_ts.max(record.ts);
        if !classify_poi(record, &cfg.channel.poi) {
            continue;
        }
        pois_cs_observed += 1;
        let Some(input) = poi_hash_input(record, record.ts, cfg.channel.frac_filter) else {
            continue;
        };
        let hash = derive_hash(&cfg.channel.hash, &input)?;
        if let Some(signal) = sender.step(PoiEvent { ts: record.ts, hash }, &cfg.channel)? {
            signals.push(signal);
        }
    }
    if end_ts.is_finite() {
        if let Some(signal) = sender.finish(end_ts + cfg.channel.d_window, &cfg.channel)? {
            signals.push(signal);
        }
    }

    // --- signal delivery (same jitter model as the PoI path) ---
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed ^ 0x5157_C0DE_D15C_0DE5);
    let mut delivered: Vec<SignalEvent> = Vec::new();
    for signal in &signals {
        let dropped = cfg.jitter.drop_prob > 0.0 && rng.random_bool(cfg.jitter.drop_prob);
        let delay = sample_signal_delay(&cfg.jitter, &mut rng);
        if !dropped {
            delivered.push(SignalEvent {
                ts: signal.ts + delay,
                pointer_index: signal.pointer_index,
            });
        }
    }

    // --- receiver pass ---
    let mut receiver = ReceiverState::new();
    if cfg.channel.pointers > 1 {
        // bench-mode decoding: the receiver tests the known chunk alphabet
        let mut alphabet: Vec<BitChunk> = Vec::new();
        for chunk in &chunks {
            if !alphabet.iter().any(|c| c.payload == chunk.payload) {
                alphabet.push(*chunk);
            }
        }
        receiver.chunk_alphabet = alphabet;
    }
    let mut events: Vec<CrEvent> = Vec::new();
    for record in &view_cr {
        if !classify_poi(record, &cfg.channel.poi) {
            continue;
        }
        let Some(input) = poi_hash_input(record, record.ts, cfg.channel.frac_filter) else {
            continue;
        };
        let hash = derive_hash(&cfg.channel.hash, &input)?;
        events.push(CrEvent::Poi(PoiEvent { ts: record.ts, hash }));
    }
    events.extend(delivered.iter().map(|s| CrEvent::Signal(*s)));
    events.sort_by(|a, b| a.ts().total_cmp(&b.ts()));
    for event in events {
        receiver.step(event, &cfg.channel)?;
    }

    // --- compare the first message pass ---
    let sent = sender.sent_chunks();
    let compared = chunks_total.min(sent.len());
    let mut chunk_errors = Vec::new();
    let mut decoded_first: Vec<Option<crate::bitcore::BitVec>> = vec![None; chunks_total];
    for index in 0..chunks_total {
        let decoded = receiver.decoded.get(index).copied().flatten();
        let sent_payload = sent.get(index).map(|c| c.payload);
        decoded_first[index] = decoded;
        if decoded.is_none() || sent_payload.is_none() || decoded != sent_payload {
            chunk_errors.push(index);
        }
    }
    let chunks_correct = chunks_total - chunk_errors.len();
    let decoded_bytes = join_chunks(&decoded_first, width, message.len());
    let chars_correct = message
        .iter()
        .zip(&decoded_bytes)
        .filter(|(a, b)| a == b)
        .count();
    let chars_total = message.len();

    let complete = compared == chunks_total && sent.len() >= chunks_total;
    let trace_start = trace.first().map(|r| r.ts).unwrap_or(0.0);
    let message_signals = &signals[..chunks_total.min(signals.len())];
    let (from_start, from_first) = match (message_signals.first(), message_signals.last()) {
        (Some(first), Some(last)) => (last.ts - trace_start, last.ts - first.ts),
        _ => (f64::NAN, f64::NAN),
    };

    let counters = TranscriptCounters {
        pois_cs_observed,
        pois_cs_hashed: sender.pois_hashed,
        pois_cs_eligible: sender.pois_eligible,
        poi_utilization: if pois_cs_observed > 0 {
            sender.pois_eligible as f64 / pois_cs_observed as f64
        } else {
            0.0
        },
        pois_cr_logged: receiver.pois_logged,
        signals_sent: sender.signals_sent,
        signals_delivered: receiver.signals_seen,
        decode_failures: receiver.decode_failures,
    };

    Ok(TranscriptReport {
        schema: TRANSCRIPT_SCHEMA.into(),
        config: cfg.clone(),
        counters,
        chunk_errors,
        chunks_total,
        chunks_correct,
        chars_total,
        chars_correct,
        chars_correct_pct: if chars_total > 0 {
            100.0 * chars_correct as f64 / chars_total as f64
        } else {
            0.0
        },
        timing: TranscriptTiming {
            from_start_s: from_start,
            from_first_signal_s: from_first,
        },
        complete,
        decoded_message_hex: decoded_bytes.iter().map(|b| format!("{b:02x}")).collect(),
        signals,
    })
}

fn sample_signal_delay(jitter: &JitterModel, rng: &mut impl Rng) -> f64 {
    let base = if jitter.delay_std > 0.0 {
        let normal = rand_distr::Normal::new(jitter.delay_mean, jitter.delay_std)
            .expect("validated jitter");
        rng.sample(normal).max(0.0)
    } else {
        jitter.delay_mean
    };
    let extra = if jitter.reorder_window > 0.0 {
        rng.random_range(0.0..jitter.reorder_window)
    } else {
        0.0
    };
    base + extra
}

/// How injected signal packets look on the wire: a legitimate ARP broadcast
/// request from the sender asking for an uninvolved third-party address.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignalTemplate {
    pub link_src: [u8; 6],
    pub sender_ip: [u8; 4],
    pub target_ip: [u8; 4],
}

impl Default for SignalTemplate {
    fn default() -> Self {
        Self {
            link_src: [0x02, 0, 0, 0, 0, 0x02],
            sender_ip: [192, 168, 0, 2],
            target_ip: [192, 168, 0, 77],
        }
    }
}

/// Merge signal packets into a trace at their emission times, producing the
/// capture a warden would record. Removing exactly these records again
/// yields the filtered twin.
pub fn inject_signals(
    trace: &[TraceRecord],
    signals: &[SignalEvent],
    template: &SignalTemplate,
) -> Vec<TraceRecord> {
    let mut merged: Vec<TraceRecord> = trace.to_vec();
    merged.extend(signals.iter().map(|signal| TraceRecord {
        ts: signal.ts,
        link_src: template.link_src,
        link_dst: [0xff; 6],
        net_kind: NetKind::Arp,
        net_src: Some(template.sender_ip.to_vec()),
        net_dst: Some(template.target_ip.to_vec()),
        arp_op: Some(ArpOp::Request),
        len: 60,
    }));
    merged.sort_by(|a, b| a.ts.total_cmp(&b.ts));
    merged
}

/// Matches the records [`inject_signals`] adds; deleting them from a covert
/// capture produces the ground-truth filtered recording.
pub fn is_signal_record(record: &TraceRecord, template: &SignalTemplate) -> bool {
    record.net_kind == NetKind::Arp
        && record.arp_op == Some(ArpOp::Request)
        && record.link_src == template.link_src
        && record.net_dst.as_deref() == Some(&template.target_ip[..])
}

/// Direct-embedding comparison for one configuration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BaselineReport {
    /// Signal packets the channel used on this trace.
    pub signal_slots: u64,
    pub chunk_bits: u32,
    pub pointer_bits: u32,
    /// Bits the channel delivers: chunk bits per slot.
    pub dyst_bits: u64,
    /// Bits a storage channel writing into the very same packets delivers:
    /// pointer bits per slot.
    pub baseline_bits: u64,
    /// Covert amplification factor `chunk_bits / pointer_bits`.
    pub caf: f64,
    pub duration_s: f64,
    pub dyst_bits_per_hour: f64,
    pub baseline_bits_per_hour: f64,
}

/// Run the channel and score it against a conventional storage channel that
/// embeds data directly into the packets the channel would have used as
/// signals.
pub fn direct_embedding_baseline(
    trace: &[TraceRecord],
    cfg: &RunConfig,
    message: &[u8],
) -> Result<(TranscriptReport, BaselineReport)> {
    let transcript = run_channel(trace, cfg, message)?;
    let chunk_bits = cfg.channel.chunk_bits() as u32;
    let pointer_bits = cfg.channel.pointer_bits();
    let slots = transcript.counters.signals_sent;
    let duration = match (trace.first(), trace.last()) {
        (Some(first), Some(last)) => (last.ts - first.ts).max(f64::MIN_POSITIVE),
        _ => f64::MIN_POSITIVE,
    };
    let dyst_bits = slots * chunk_bits as u64;
    let baseline_bits = slots * pointer_bits as u64;
    let report = BaselineReport {
        signal_slots: slots,
        chunk_bits,
        pointer_bits,
        dyst_bits,
        baseline_bits,
        caf: chunk_bits as f64 / pointer_bits as f64,
        duration_s: duration,
        dyst_bits_per_hour: dyst_bits as f64 / duration * 3600.0,
        baseline_bits_per_hour: baseline_bits as f64 / duration * 3600.0,
    };
    Ok((transcript, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::VariantSpec;
    use crate::bitcore::HashSpec;
    use crate::traffic::{synth_trace, PoiPolicy, SynthSpec};

    fn run_cfg(h: usize) -> RunConfig {
        RunConfig {
            channel: ChannelConfig {
                variant: VariantSpec::Basic { h: h as u16 },
                hash: HashSpec::sha3(h).unwrap(),
                poi: PoiPolicy::LocalBroadcast {
                    subnet_broadcast: None,
                },
                robust: false,
                d_window: 0.0,
                r_window: 0.0,
                pointers: 1,
                frac_filter: true,
                poi_horizon: 60.0,
                multi: None,
            },
            jitter: JitterModel::zero(),
            seed: 7,
            loop_message: false,
        }
    }

    #[test]
    fn zero_jitter_transmits_perfectly() {
        let trace = synth_trace(&SynthSpec::new(20_000.0, 4.0 * 3600.0, 1.0, 42)).unwrap();
        let cfg = run_cfg(4);
        let report = run_channel(&trace, &cfg, b"hi there").unwrap();
        assert!(report.complete, "trace too short for the message");
        assert_eq!(report.chars_correct_pct, 100.0);
        assert!(report.chunk_errors.is_empty());
        assert_eq!(
            report.counters.signals_sent as usize,
            report.chunks_total
        );
        assert_eq!(report.counters.decode_failures, 0);
    }

    #[test]
    fn signal_count_is_chunk_count_on_complete_runs() {
        let trace = synth_trace(&SynthSpec::new(30_000.0, 3600.0, 1.0, 3)).unwrap();
        let cfg = run_cfg(2);
        let report = run_channel(&trace, &cfg, b"xyz").unwrap();
        assert!(report.complete);
        assert_eq!(report.counters.signals_sent, 12); // 24 bits / 2
    }

    #[test]
    fn message_longer_than_trace_flagged_incomplete() {
        let trace = synth_trace(&SynthSpec::new(500.0, 120.0, 1.0, 5)).unwrap();
        let cfg = run_cfg(12);
        let report = run_channel(&trace, &cfg, b"a very long message that cannot fit").unwrap();
        assert!(!report.complete);
        assert!(report.chars_correct_pct < 100.0);
    }

    #[test]
    fn baseline_caf_examples() {
        let trace = synth_trace(&SynthSpec::new(20_000.0, 2.0 * 3600.0, 1.0, 9)).unwrap();
        let cfg = run_cfg(8);
        let (_, report) = direct_embedding_baseline(&trace, &cfg, b"ab").unwrap();
        // one signal bit pointing at 8-bit chunks
        assert_eq!(report.pointer_bits, 1);
        assert_eq!(report.caf, 8.0);
        assert_eq!(report.dyst_bits, report.signal_slots * 8);
        assert_eq!(report.baseline_bits, report.signal_slots);
    }

    #[test]
    fn injected_signals_round_trip() {
        let trace = synth_trace(&SynthSpec::new(10_000.0, 600.0, 1.0, 11)).unwrap();
        let template = SignalTemplate::default();
        let signals = vec![
            SignalEvent { ts: 10.0, pointer_index: 0 },
            SignalEvent { ts: 20.0, pointer_index: 0 },
        ];
        let covert = inject_signals(&trace, &signals, &template);
        assert_eq!(covert.len(), trace.len() + 2);
        assert!(covert.windows(2).all(|w| w[0].ts <= w[1].ts));
        let filtered: Vec<TraceRecord> = covert
            .iter()
            .filter(|r| !is_signal_record(r, &template))
            .cloned()
            .collect();
        assert_eq!(filtered, trace);
    }
}
