use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::Exp;
use serde::{Deserialize, Serialize};

use super::{ArpOp, NetKind, TraceRecord};
use crate::{Error, Result};

/// Parameters for the Poisson synthetic traffic generator.
///
/// Arrivals are a Poisson process at `rate_per_hour / 3600` per second; each
/// arrival is a packet of interest (an ARP broadcast request) with
/// probability `poi_mix`, otherwise a unicast IPv4 filler. Source addresses
/// rotate through a host pool so hashes vary between packets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthSpec {
    pub rate_per_hour: f64,
    pub duration_s: f64,
    /// Fraction of arrivals that are packets of interest, in `[0, 1]`.
    pub poi_mix: f64,
    pub seed: u64,
    /// Distinct hosts in the source pool.
    #[serde(default = "default_host_count")]
    pub host_count: usize,
    /// Timestamp of the start of the trace.
    #[serde(default)]
    pub start_ts: f64,
}

fn default_host_count() -> usize {
    24
}

impl SynthSpec {
    pub fn new(rate_per_hour: f64, duration_s: f64, poi_mix: f64, seed: u64) -> Self {
        Self {
            rate_per_hour,
            duration_s,
            poi_mix,
            seed,
            host_count: default_host_count(),
            start_ts: 0.0,
        }
    }
}

fn host_mac(host: usize) -> [u8; 6] {
    [0x02, 0x00, 0x00, 0x00, 0x00, 0x10 + host as u8]
}

fn host_ip(host: usize) -> [u8; 4] {
    [192, 168, 0, 10 + host as u8]
}

/// MAC of the synthetic router, the usual unicast destination.
pub(crate) const ROUTER_MAC: [u8; 6] = [0x02, 0x00, 0x00, 0x00, 0x00, 0x01];

/// Generate a synthetic trace. Deterministic in the seed.
pub fn synth_trace(spec: &SynthSpec) -> Result<Vec<TraceRecord>> {
    if spec.rate_per_hour <= 0.0 {
        return Err(Error::InvalidConfig("synthetic rate must be positive".into()));
    }
    if !(0.0..=1.0).contains(&spec.poi_mix) {
        return Err(Error::InvalidConfig("poi mix must be within [0, 1]".into()));
    }
    if spec.host_count == 0 || spec.host_count > 200 {
        return Err(Error::InvalidConfig("host pool size out of range".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let gap = Exp::new(spec.rate_per_hour / 3600.0)
        .map_err(|e| Error::InvalidConfig(format!("bad arrival rate: {e}")))?;
    let mut records = Vec::new();
    let mut ts = spec.start_ts;
    loop {
        ts += rng.sample(gap);
        if ts >= spec.start_ts + spec.duration_s {
            break;
        }
        let host = rng.random_range(0..spec.host_count);
        let is_poi = rng.random_bool(spec.poi_mix);
        let record = if is_poi {
            TraceRecord {
                ts,
                link_src: host_mac(host),
                link_dst: [0xff; 6],
                net_kind: NetKind::Arp,
                net_src: Some(host_ip(host).to_vec()),
                net_dst: Some(vec![192, 168, 0, 1]),
                arp_op: Some(ArpOp::Request),
                len: 60,
            }
        } else {
            TraceRecord {
                ts,
                link_src: host_mac(host),
                link_dst: ROUTER_MAC,
                net_kind: NetKind::Ipv4,
                net_src: Some(host_ip(host).to_vec()),
                net_dst: Some(vec![10, 0, 0, 1]),
                arp_op: None,
                len: 40 + rng.random_range(0..1200),
            }
        };
        records.push(record);
    }
    Ok(records)
}
