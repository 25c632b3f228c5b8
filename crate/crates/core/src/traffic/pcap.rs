use std::fs;
use std::path::Path;

use super::{ArpOp, NetKind, TraceRecord};
use crate::{Error, Result};

const MAGIC_USEC_BE: u32 = 0xa1b2_c3d4;
const MAGIC_USEC_LE: u32 = 0xd4c3_b2a1;
const MAGIC_NSEC_BE: u32 = 0xa1b2_3c4d;
const MAGIC_NSEC_LE: u32 = 0x4d3c_b2a1;

const ETHERTYPE_IPV4: u16 = 0x0800;
const ETHERTYPE_ARP: u16 = 0x0806;
const ETHERTYPE_IPV6: u16 = 0x86dd;

/// Result of reading a capture: parsed records plus the number of
/// truncation warnings (a truncated record stops the read with a partial
/// result).
#[derive(Clone, Debug)]
pub struct PcapCapture {
    pub records: Vec<TraceRecord>,
    pub truncated: u32,
}

/// Read a classic pcap file (Ethernet link type only).
///
/// Packets are dissected to Ethernet plus ARP/IPv4/IPv6 headers; anything
/// malformed or unknown becomes `net_kind = Other` rather than aborting.
pub fn read_pcap(path: &Path) -> Result<PcapCapture> {
    parse_pcap(&fs::read(path)?)
}

pub(crate) fn parse_pcap(data: &[u8]) -> Result<PcapCapture> {
    if data.len() < 24 {
        return Err(Error::UnsupportedFormat("pcap header too short".into()));
    }
    let magic = u32::from_be_bytes(data[0..4].try_into().unwrap());
    let (big_endian, nanos) = match magic {
        MAGIC_USEC_BE => (true, false),
        MAGIC_USEC_LE => (false, false),
        MAGIC_NSEC_BE => (true, true),
        MAGIC_NSEC_LE => (false, true),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "bad pcap magic {other:#010x}"
            )))
        }
    };
    let read_u32 = |bytes: &[u8]| -> u32 {
        let arr: [u8; 4] = bytes.try_into().unwrap();
        if big_endian {
            u32::from_be_bytes(arr)
        } else {
            u32::from_le_bytes(arr)
        }
    };
    let linktype = read_u32(&data[20..24]);
    if linktype != 1 {
        return Err(Error::UnsupportedFormat(format!(
            "pcap linktype {linktype}, only Ethernet (1) is supported"
        )));
    }

    let mut records = Vec::new();
    let mut truncated = 0u32;
    let mut offset = 24usize;
    while offset < data.len() {
        if data.len() - offset < 16 {
            truncated += 1;
            break;
        }
        let ts_sec = read_u32(&data[offset..offset + 4]);
        let ts_frac = read_u32(&data[offset + 4..offset + 8]);
        let incl_len = read_u32(&data[offset + 8..offset + 12]) as usize;
        let orig_len = read_u32(&data[offset + 12..offset + 16]);
        offset += 16;
        if data.len() - offset < incl_len {
            truncated += 1;
            break;
        }
        let frame = &data[offset..offset + incl_len];
        offset += incl_len;
        let divisor = if nanos { 1e9 } else { 1e6 };
        let ts = ts_sec as f64 + ts_frac as f64 / divisor;
        records.push(dissect_frame(frame, ts, orig_len));
    }
    Ok(PcapCapture { records, truncated })
}

fn dissect_frame(frame: &[u8], ts: f64, orig_len: u32) -> TraceRecord {
    let mut record = TraceRecord {
        ts,
        link_src: [0; 6],
        link_dst: [0; 6],
        net_kind: NetKind::Other,
        net_src: None,
        net_dst: None,
        arp_op: None,
        len: orig_len,
    };
    if frame.len() < 14 {
        return record;
    }
    record.link_dst.copy_from_slice(&frame[0..6]);
    record.link_src.copy_from_slice(&frame[6..12]);
    let ethertype = u16::from_be_bytes([frame[12], frame[13]]);
    let payload = &frame[14..];
    match ethertype {
        ETHERTYPE_ARP => dissect_arp(payload, &mut record),
        ETHERTYPE_IPV4 => {
            if payload.len() >= 20 {
                record.net_kind = NetKind::Ipv4;
                record.net_src = Some(payload[12..16].to_vec());
                record.net_dst = Some(payload[16..20].to_vec());
            }
        }
        ETHERTYPE_IPV6 => {
            if payload.len() >= 40 {
                record.net_kind = NetKind::Ipv6;
                record.net_src = Some(payload[8..24].to_vec());
                record.net_dst = Some(payload[24..40].to_vec());
            }
        }
        _ => {}
    }
    record
}

fn dissect_arp(payload: &[u8], record: &mut TraceRecord) {
    if payload.len() < 8 {
        return;
    }
    let hlen = payload[4] as usize;
    let plen = payload[5] as usize;
    let oper = u16::from_be_bytes([payload[6], payload[7]]);
    let op = match oper {
        1 => ArpOp::Request,
        2 => ArpOp::Reply,
        _ => return,
    };
    if payload.len() < 8 + 2 * hlen + 2 * plen {
        return;
    }
    record.net_kind = NetKind::Arp;
    record.arp_op = Some(op);
    // sender/target protocol addresses
    record.net_src = Some(payload[8 + hlen..8 + hlen + plen].to_vec());
    record.net_dst = Some(payload[8 + 2 * hlen + plen..8 + 2 * (hlen + plen)].to_vec());
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hand-build a one-packet classic pcap holding an ARP request to
    /// ff:ff:ff:ff:ff:ff. Used here and to generate the checked-in golden
    /// fixtures.
    pub(crate) fn build_arp_fixture(big_endian: bool) -> Vec<u8> {
        let u32b = |v: u32| -> [u8; 4] {
            if big_endian {
                v.to_be_bytes()
            } else {
                v.to_le_bytes()
            }
        };
        let u16b = |v: u16| -> [u8; 2] {
            if big_endian {
                v.to_be_bytes()
            } else {
                v.to_le_bytes()
            }
        };
        let mut out = Vec::new();
        // the canonical magic written in the file's own byte order
        out.extend_from_slice(&u32b(MAGIC_USEC_BE));
        out.extend_from_slice(&u16b(2)); // version major
        out.extend_from_slice(&u16b(4)); // version minor
        out.extend_from_slice(&u32b(0)); // thiszone
        out.extend_from_slice(&u32b(0)); // sigfigs
        out.extend_from_slice(&u32b(65535)); // snaplen
        out.extend_from_slice(&u32b(1)); // linktype Ethernet

        // Ethernet + ARP request, RFC 826 layout
        let mut frame = Vec::new();
        frame.extend_from_slice(&[0xff; 6]); // dst broadcast
        frame.extend_from_slice(&[0x02, 0x00, 0x00, 0x00, 0x00, 0x07]); // src
        frame.extend_from_slice(&0x0806u16.to_be_bytes());
        frame.extend_from_slice(&1u16.to_be_bytes()); // htype ethernet
        frame.extend_from_slice(&0x0800u16.to_be_bytes()); // ptype ipv4
        frame.push(6); // hlen
        frame.push(4); // plen
        frame.extend_from_slice(&1u16.to_be_bytes()); // oper request
        frame.extend_from_slice(&[0x02, 0x00, 0x00, 0x00, 0x00, 0x07]); // sha
        frame.extend_from_slice(&[192, 168, 0, 7]); // spa
        frame.extend_from_slice(&[0x00; 6]); // tha
        frame.extend_from_slice(&[192, 168, 0, 1]); // tpa

        out.extend_from_slice(&u32b(1_650_000_000)); // ts_sec
        out.extend_from_slice(&u32b(250_000)); // ts_usec
        out.extend_from_slice(&u32b(frame.len() as u32));
        out.extend_from_slice(&u32b(frame.len() as u32));
        out.extend_from_slice(&frame);
        out
    }

    #[test]
    fn empty_capture_yields_empty_sequence() {
        let mut header = build_arp_fixture(true);
        header.truncate(24);
        let cap = parse_pcap(&header).unwrap();
        assert!(cap.records.is_empty());
        assert_eq!(cap.truncated, 0);
    }

    #[test]
    fn arp_fixture_parses() {
        let cap = parse_pcap(&build_arp_fixture(true)).unwrap();
        assert_eq!(cap.records.len(), 1);
        let rec = &cap.records[0];
        assert_eq!(rec.net_kind, NetKind::Arp);
        assert_eq!(rec.arp_op, Some(ArpOp::Request));
        assert_eq!(rec.link_dst, [0xff; 6]);
        assert_eq!(rec.net_src.as_deref(), Some(&[192, 168, 0, 7][..]));
        assert!((rec.ts - 1_650_000_000.25).abs() < 1e-9);
    }

    #[test]
    fn endianness_symmetry() {
        let be = parse_pcap(&build_arp_fixture(true)).unwrap();
        let le = parse_pcap(&build_arp_fixture(false)).unwrap();
        assert_eq!(be.records, le.records);
    }

    #[test]
    fn bad_magic_rejected() {
        let mut data = build_arp_fixture(true);
        data[0] = 0x00;
        assert!(matches!(
            parse_pcap(&data),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn truncated_record_stops_with_partial_result() {
        let full = build_arp_fixture(true);
        let mut two = full.clone();
        two.extend_from_slice(&full[24..]); // second copy of the packet
        let cut = &two[..two.len() - 10];
        let cap = parse_pcap(cut).unwrap();
        assert_eq!(cap.records.len(), 1);
        assert_eq!(cap.truncated, 1);
    }

    #[test]
    fn malformed_payload_becomes_other() {
        // an IPv4 frame whose payload is far too short for an IPv4 header
        let mut data = build_arp_fixture(true);
        let mut frame = Vec::new();
        frame.extend_from_slice(&[0x01; 6]);
        frame.extend_from_slice(&[0x02; 6]);
        frame.extend_from_slice(&0x0800u16.to_be_bytes());
        frame.extend_from_slice(&[0xaa; 4]);
        data.extend_from_slice(&1u32.to_be_bytes());
        data.extend_from_slice(&0u32.to_be_bytes());
        data.extend_from_slice(&(frame.len() as u32).to_be_bytes());
        data.extend_from_slice(&(frame.len() as u32).to_be_bytes());
        data.extend_from_slice(&frame);
        let cap = parse_pcap(&data).unwrap();
        assert_eq!(cap.records.len(), 2);
        assert_eq!(cap.records[1].net_kind, NetKind::Other);
        assert_eq!(cap.records[1].link_dst, [0x01; 6]);
    }
}
