//! Experiment configuration file: one TOML document resolving to a full
//! channel run. Every run echoes its resolved configuration into the output
//! directory so results stay reproducible.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use dyst::analysis::VariantSpec;
use dyst::bitcore::{ChecksumKind, HashSpec};
use dyst::channel::{ChannelConfig, MultiPointerConfig, RunConfig};
use dyst::traffic::{CustomPoi, JitterModel, PoiPolicy, SynthSpec, TraceRecord};

/// Named environment presets pinning a PoI rate and jitter statistics.
#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub rate_per_hour: f64,
    pub jitter: JitterModel,
}

pub fn preset(name: &str) -> Option<Preset> {
    match name {
        "home" => Some(Preset {
            rate_per_hour: 7300.0,
            jitter: JitterModel::home(),
        }),
        "university" => Some(Preset {
            rate_per_hour: 2100.0,
            jitter: JitterModel::university(),
        }),
        // idle smart-device traffic crossing a home uplink
        "smarthome" => Some(Preset {
            rate_per_hour: 12_700.0,
            jitter: JitterModel::home(),
        }),
        _ => None,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Message as UTF-8 text...
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    /// ...or as hex bytes (exactly one of the two).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message_hex: Option<String>,
    #[serde(default)]
    pub loop_message: bool,
    pub channel: ChannelSection,
    #[serde(default)]
    pub hash: HashSection,
    #[serde(default)]
    pub poi: PoiSection,
    pub trace: TraceSection,
    #[serde(default)]
    pub jitter: JitterSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    /// "basic" or "ext".
    pub mode: String,
    pub h: u16,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u16>,
    /// "sha3" | "crc8" | "adhoc" | "ones-count" (ext only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checksum: Option<String>,
    #[serde(default)]
    pub robust: bool,
    #[serde(default)]
    pub d_window: f64,
    #[serde(default)]
    pub r_window: f64,
    #[serde(default = "one")]
    pub pointers: u32,
    #[serde(default = "yes")]
    pub frac_filter: bool,
    #[serde(default = "default_horizon")]
    pub poi_horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multi_chunk_bits: Option<u16>,
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

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HashSection {
    /// "sha3-512" (default) or "aes-ctr".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
    /// 16-byte hex key for "aes-ctr".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_hex: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoiSection {
    /// "local-broadcast" (default), "remote-path" or "custom".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    /// Dotted IPv4 subnet broadcast address for "local-broadcast".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subnet_broadcast: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src_hex: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dst_hex: Option<String>,
    /// "all" or "arp-requests" for "custom".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    /// "synthetic" or "file".
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_per_hour: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poi_mix: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JitterSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reorder_window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop_prob: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: Self = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        Ok(config)
    }

    pub fn message_bytes(&self) -> Result<Vec<u8>> {
        match (&self.message, &self.message_hex) {
            (Some(text), None) => Ok(text.as_bytes().to_vec()),
            (None, Some(hex)) => parse_hex(hex).context("field message_hex"),
            (Some(_), Some(_)) => bail!("set either message or message_hex, not both"),
            (None, None) => bail!("missing field: message (or message_hex)"),
        }
    }

    pub fn variant(&self) -> Result<VariantSpec> {
        let section = &self.channel;
        let variant = match section.mode.as_str() {
            "basic" => VariantSpec::Basic { h: section.h },
            "ext" => {
                let c = section.c.context("field channel.c is required for ext mode")?;
                let t = section.t.context("field channel.t is required for ext mode")?;
                let kind = section
                    .checksum
                    .as_deref()
                    .context("field channel.checksum is required for ext mode")?;
                VariantSpec::Ext {
                    h: section.h,
                    c,
                    t,
                    checksum: parse_checksum(kind)?,
                }
            }
            other => bail!("field channel.mode: unknown mode {other:?}"),
        };
        variant.validate()?;
        Ok(variant)
    }

    pub fn hash_spec(&self) -> Result<HashSpec> {
        let h = self.channel.h as usize;
        match self.hash.algorithm.as_deref().unwrap_or("sha3-512") {
            "sha3-512" => Ok(HashSpec::sha3(h)?),
            "aes-ctr" => {
                let key_hex = self
                    .hash
                    .key_hex
                    .as_deref()
                    .context("field hash.key_hex is required for aes-ctr")?;
                let bytes = parse_hex(key_hex).context("field hash.key_hex")?;
                let key: [u8; 16] = bytes
                    .as_slice()
                    .try_into()
                    .map_err(|_| anyhow::anyhow!("field hash.key_hex must be 16 bytes"))?;
                Ok(HashSpec::aes_prf(h, key)?)
            }
            other => bail!("field hash.algorithm: unknown algorithm {other:?}"),
        }
    }

    pub fn poi_policy(&self) -> Result<PoiPolicy> {
        match self.poi.policy.as_deref().unwrap_or("local-broadcast") {
            "local-broadcast" => {
                let subnet_broadcast = match &self.poi.subnet_broadcast {
                    Some(text) => Some(parse_ipv4(text).context("field poi.subnet_broadcast")?),
                    None => {
                        eprintln!(
                            "warning: no subnet broadcast configured; \
                             the IPv4 broadcast clause is disabled"
                        );
                        None
                    }
                };
                Ok(PoiPolicy::LocalBroadcast { subnet_broadcast })
            }
            "remote-path" => Ok(PoiPolicy::RemotePath {
                src: self
                    .poi
                    .src_hex
                    .as_deref()
                    .map(parse_hex)
                    .transpose()
                    .context("field poi.src_hex")?,
                dst: self
                    .poi
                    .dst_hex
                    .as_deref()
                    .map(parse_hex)
                    .transpose()
                    .context("field poi.dst_hex")?,
            }),
            "custom" => {
                let id = match self.poi.id.as_deref().unwrap_or("all") {
                    "all" => CustomPoi::All,
                    "arp-requests" => CustomPoi::ArpRequests,
                    other => bail!("field poi.id: unknown predicate {other:?}"),
                };
                Ok(PoiPolicy::Custom { id })
            }
            other => bail!("field poi.policy: unknown policy {other:?}"),
        }
    }

    pub fn jitter(&self) -> Result<JitterModel> {
        let mut model = match self.jitter.preset.as_deref() {
            Some(name) => {
                preset(name)
                    .with_context(|| format!("field jitter.preset: unknown preset {name:?}"))?
                    .jitter
            }
            None => JitterModel::zero(),
        };
        if let Some(v) = self.jitter.delay_mean {
            model.delay_mean = v;
        }
        if let Some(v) = self.jitter.delay_std {
            model.delay_std = v;
        }
        if let Some(v) = self.jitter.reorder_window {
            model.reorder_window = v;
        }
        if let Some(v) = self.jitter.drop_prob {
            model.drop_prob = v;
        }
        model.validate()?;
        Ok(model)
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let section = &self.channel;
        let multi = section.multi_chunk_bits.map(|chunk_bits| MultiPointerConfig {
            chunk_bits,
            delay_alphabet: None,
        });
        let channel = ChannelConfig {
            variant: self.variant()?,
            hash: self.hash_spec()?,
            poi: self.poi_policy()?,
            robust: section.robust,
            d_window: section.d_window,
            r_window: section.r_window,
            pointers: section.pointers,
            frac_filter: section.frac_filter,
            poi_horizon: section.poi_horizon,
            multi,
        };
        channel.validate()?;
        Ok(RunConfig {
            channel,
            jitter: self.jitter()?,
            seed: self.seed,
            loop_message: self.loop_message,
        })
    }

    /// Resolve the trace: load a file or generate synthetic traffic.
    pub fn trace(&self, override_path: Option<&Path>) -> Result<Vec<TraceRecord>> {
        if let Some(path) = override_path {
            return Ok(dyst::traffic::load_trace(path)?);
        }
        match self.trace.source.as_str() {
            "file" => {
                let path = self
                    .trace
                    .path
                    .as_ref()
                    .context("field trace.path is required for source = \"file\"")?;
                Ok(dyst::traffic::load_trace(path)?)
            }
            "synthetic" => {
                let preset_rate = self
                    .trace
                    .preset
                    .as_deref()
                    .map(|name| {
                        preset(name)
                            .with_context(|| format!("field trace.preset: unknown preset {name:?}"))
                            .map(|p| p.rate_per_hour)
                    })
                    .transpose()?;
                let rate = self
                    .trace
                    .rate_per_hour
                    .or(preset_rate)
                    .context("field trace.rate_per_hour (or trace.preset) is required")?;
                let duration = self
                    .trace
                    .duration_s
                    .context("field trace.duration_s is required")?;
                let spec = SynthSpec {
                    poi_mix: self.trace.poi_mix.unwrap_or(1.0),
                    ..SynthSpec::new(rate, duration, 1.0, self.seed.wrapping_add(1))
                };
                Ok(dyst::traffic::synth_trace(&spec)?)
            }
            other => bail!("field trace.source: unknown source {other:?}"),
        }
    }
}

pub fn parse_checksum(name: &str) -> Result<ChecksumKind> {
    Ok(match name {
        "sha3" => ChecksumKind::Sha3Prefix,
        "crc8" => ChecksumKind::Crc8Prefix,
        "adhoc" => ChecksumKind::AdHoc,
        "ones-count" => ChecksumKind::OnesCount,
        other => bail!("unknown checksum {other:?}"),
    })
}

pub fn parse_hex(text: &str) -> Result<Vec<u8>> {
    let text = text.trim();
    if text.len() % 2 != 0 {
        bail!("odd hex length");
    }
    (0..text.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&text[i..i + 2], 16).context("bad hex digit"))
        .collect()
}

pub fn parse_ipv4(text: &str) -> Result<[u8; 4]> {
    let parts: Vec<&str> = text.split('.').collect();
    if parts.len() != 4 {
        bail!("expected dotted IPv4, got {text:?}");
    }
    let mut out = [0u8; 4];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part.parse().with_context(|| format!("bad IPv4 octet {part:?}"))?;
    }
    Ok(out)
}
