use serde::{Deserialize, Serialize};

use super::{ArpOp, NetKind, TraceRecord};

/// Which packets count as packets of interest for a channel run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum PoiPolicy {
    /// Local broadcast traffic: ARP requests to the broadcast MAC, IPv4
    /// packets to the configured subnet broadcast address, and IPv6
    /// multicast (destination `ff0x::/16` or link layer `33:33:*`).
    ///
    /// Without a configured subnet the IPv4 broadcast clause is disabled
    /// (callers warn at configuration time).
    LocalBroadcast {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subnet_broadcast: Option<[u8; 4]>,
    },
    /// On-path flow predicate for remote scenarios: a record is of interest
    /// when its network addresses match the configured endpoints (absent
    /// endpoint = wildcard).
    RemotePath {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        src: Option<Vec<u8>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dst: Option<Vec<u8>>,
    },
    /// Named built-in predicate.
    Custom { id: CustomPoi },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CustomPoi {
    /// Every record is a packet of interest.
    All,
    /// Every ARP request, regardless of destination.
    ArpRequests,
}

/// Pure PoI predicate.
pub fn classify_poi(record: &TraceRecord, policy: &PoiPolicy) -> bool {
    match policy {
        PoiPolicy::LocalBroadcast { subnet_broadcast } => match record.net_kind {
            NetKind::Arp => {
                record.arp_op == Some(ArpOp::Request) && record.link_dst == [0xff; 6]
            }
            NetKind::Ipv4 => match subnet_broadcast {
                Some(bcast) => record.net_dst.as_deref() == Some(&bcast[..]),
                None => false,
            },
            NetKind::Ipv6 => {
                let multicast_dst = record
                    .net_dst
                    .as_deref()
                    .is_some_and(|dst| dst.len() == 16 && dst[0] == 0xff && dst[1] & 0xf0 == 0);
                multicast_dst || record.link_dst[..2] == [0x33, 0x33]
            }
            NetKind::Other => false,
        },
        PoiPolicy::RemotePath { src, dst } => {
            let src_ok = src
                .as_deref()
                .map_or(true, |want| record.net_src.as_deref() == Some(want));
            let dst_ok = dst
                .as_deref()
                .map_or(true, |want| record.net_dst.as_deref() == Some(want));
            record.net_kind != NetKind::Other && src_ok && dst_ok
        }
        PoiPolicy::Custom { id } => match id {
            CustomPoi::All => true,
            CustomPoi::ArpRequests => {
                record.net_kind == NetKind::Arp && record.arp_op == Some(ArpOp::Request)
            }
        },
    }
}
