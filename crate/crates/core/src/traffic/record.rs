use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Schema tag of the canonical JSONL trace format.
pub const TRACE_SCHEMA: &str = "dyst-trace/1";

/// Network-layer kind of a trace record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetKind {
    Arp,
    Ipv4,
    Ipv6,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArpOp {
    Request,
    Reply,
}

/// One packet in a canonical traffic trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Seconds since epoch, fractional.
    pub ts: f64,
    #[serde(with = "hex_mac")]
    pub link_src: [u8; 6],
    #[serde(with = "hex_mac")]
    pub link_dst: [u8; 6],
    pub net_kind: NetKind,
    #[serde(
        with = "hex_bytes_opt",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub net_src: Option<Vec<u8>>,
    #[serde(
        with = "hex_bytes_opt",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub net_dst: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arp_op: Option<ArpOp>,
    /// Original packet length in bytes.
    pub len: u32,
}

impl TraceRecord {
    pub fn validate(&self) -> Result<()> {
        match self.net_kind {
            NetKind::Arp if self.arp_op.is_none() => Err(Error::MalformedTrace(
                "arp record without arp_op".into(),
            )),
            NetKind::Ipv4 | NetKind::Ipv6
                if self.net_src.is_none() || self.net_dst.is_none() =>
            {
                Err(Error::MalformedTrace(
                    "ip record without network addresses".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SchemaHeader {
    schema: String,
}

/// Write the schema header line plus one record per line.
pub fn write_jsonl<W: Write>(mut writer: W, records: &[TraceRecord]) -> Result<()> {
    serde_json::to_writer(
        &mut writer,
        &SchemaHeader {
            schema: TRACE_SCHEMA.into(),
        },
    )?;
    writer.write_all(b"\n")?;
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Read a canonical JSONL trace, validating the schema header and every
/// record's field invariants.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<TraceRecord>> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedTrace("empty trace file".into()))??;
    let header: SchemaHeader = serde_json::from_str(&header)?;
    if header.schema != TRACE_SCHEMA {
        return Err(Error::UnsupportedFormat(format!(
            "trace schema {:?}, expected {TRACE_SCHEMA:?}",
            header.schema
        )));
    }
    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TraceRecord = serde_json::from_str(&line)?;
        record.validate()?;
        records.push(record);
    }
    Ok(records)
}

mod hex_mac {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(mac: &[u8; 6], ser: S) -> Result<S::Ok, S::Error> {
        let text = mac
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<Vec<_>>()
            .join(":");
        ser.serialize_str(&text)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<[u8; 6], D::Error> {
        let text = String::deserialize(de)?;
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 6 {
            return Err(serde::de::Error::custom(format!("bad mac {text:?}")));
        }
        let mut mac = [0u8; 6];
        for (slot, part) in mac.iter_mut().zip(parts) {
            *slot = u8::from_str_radix(part, 16)
                .map_err(|_| serde::de::Error::custom(format!("bad mac {text:?}")))?;
        }
        Ok(mac)
    }
}

mod hex_bytes_opt {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &Option<Vec<u8>>, ser: S) -> Result<S::Ok, S::Error> {
        match bytes {
            Some(bytes) => {
                let text: String = bytes.iter().map(|b| format!("{b:02x}")).collect();
                ser.serialize_some(&text)
            }
            None => ser.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Vec<u8>>, D::Error> {
        let text: Option<String> = Option::deserialize(de)?;
        match text {
            None => Ok(None),
            Some(text) => {
                if text.len() % 2 != 0 {
                    return Err(serde::de::Error::custom("odd hex length"));
                }
                let mut bytes = Vec::with_capacity(text.len() / 2);
                for i in (0..text.len()).step_by(2) {
                    let byte = u8::from_str_radix(&text[i..i + 2], 16)
                        .map_err(|_| serde::de::Error::custom("bad hex"))?;
                    bytes.push(byte);
                }
                Ok(Some(bytes))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample_record(ts: f64) -> TraceRecord {
        TraceRecord {
            ts,
            link_src: [2, 0, 0, 0, 0, 7],
            link_dst: [0xff; 6],
            net_kind: NetKind::Arp,
            net_src: Some(vec![192, 168, 0, 7]),
            net_dst: Some(vec![192, 168, 0, 1]),
            arp_op: Some(ArpOp::Request),
            len: 60,
        }
    }

    #[test]
    fn jsonl_round_trip_preserves_fields() {
        let records = vec![
            sample_record(1.5),
            TraceRecord {
                net_kind: NetKind::Ipv4,
                arp_op: None,
                ..sample_record(2.25)
            },
            TraceRecord {
                net_kind: NetKind::Other,
                net_src: None,
                net_dst: None,
                arp_op: None,
                ..sample_record(3.0)
            },
        ];
        let mut buffer = Vec::new();
        write_jsonl(&mut buffer, &records).unwrap();
        let back = read_jsonl(buffer.as_slice()).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn schema_mismatch_rejected() {
        let text = "{\"schema\":\"other/9\"}\n";
        assert!(read_jsonl(text.as_bytes()).is_err());
    }

    #[test]
    fn invariants_enforced_on_read() {
        let mut buffer = Vec::new();
        write_jsonl(
            &mut buffer,
            &[TraceRecord {
                arp_op: None,
                ..sample_record(1.0)
            }],
        )
        .unwrap();
        assert!(read_jsonl(buffer.as_slice()).is_err());
    }
}
