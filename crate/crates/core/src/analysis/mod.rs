//! Closed-form channel performance math, Monte-Carlo cross-checks,
//! Pareto-front extraction and parameter sizing.
//!
//! *Distance* is the expected number of packets of interest between two
//! signal packets; *bandwidth* is secret bits per packet of interest. Both
//! are derived from the per-PoI signal probability, which for the basic
//! channel is `2^-h` and for the extended channel is the product of the
//! partial-match probability and the first-fit success chance.

mod monte_carlo;

use serde::{Deserialize, Serialize};

pub use monte_carlo::{
    chunk_ensemble, default_chunk, exact_signal_prob, monte_carlo_channel, monte_carlo_variant,
    McOutcome,
};

use crate::bitcore::ChecksumKind;
use crate::{Error, Result};

/// Exact binomial coefficient in integer arithmetic (valid through n = 64).
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of distinct modifications of an `h`-bit value flipping at most `t`
/// bits: `T_{h,t} = sum_{j=0}^{t} C(h,j)`. Equals the length of the canonical
/// modification enumeration.
pub fn t_count(h: u32, t: u32) -> u128 {
    (0..=t.min(h)).map(|j| binomial(h, j)).sum()
}

/// Probability that at most `t` of `h` uniform random bits differ from a
/// fixed pattern: `T_{h,t} / 2^h`. Computed in exact integer arithmetic, then
/// converted.
pub fn p_match(h: u32, t: u32) -> f64 {
    assert!(t <= h, "t={t} exceeds h={h}");
    assert!(h <= 64, "h={h} out of supported range");
    t_count(h, t) as f64 / 2f64.powi(h as i32)
}

/// Chance that the true encoded message is the *first* checksum-consistent
/// candidate among the `T_{h,t}` enumerated modifications, under the model
/// that every other candidate is consistent independently with probability
/// `2^-c`.
pub fn u_first_fit(h: u32, t: u32, c: u32) -> f64 {
    assert!(t <= h, "t={t} exceeds h={h}");
    assert!(c >= 1, "c must be at least 1");
    let t_total = t_count(h, t) as f64;
    let q = 2f64.powi(-(c as i32));
    (1.0 - (1.0 - q).powf(t_total)) / (t_total * q)
}

/// One channel variant: basic (exact match on `h` bits) or extended
/// (checksum-tolerant match with parameters `h`, `c`, `t`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum VariantSpec {
    Basic {
        h: u16,
    },
    Ext {
        h: u16,
        c: u16,
        t: u16,
        checksum: ChecksumKind,
    },
}

impl VariantSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            VariantSpec::Basic { h } => {
                if h == 0 || h > 64 {
                    return Err(Error::InvalidConfig(format!(
                        "basic variant h={h} out of range 1..=64"
                    )));
                }
            }
            VariantSpec::Ext { h, c, t, checksum } => {
                if h == 0 || h > 64 {
                    return Err(Error::InvalidConfig(format!(
                        "ext variant h={h} out of range 1..=64"
                    )));
                }
                if c == 0 || c >= h {
                    return Err(Error::InvalidConfig(format!(
                        "ext variant requires 0 < c < h, got c={c}, h={h}"
                    )));
                }
                if t > h {
                    return Err(Error::InvalidConfig(format!(
                        "ext variant requires t <= h, got t={t}, h={h}"
                    )));
                }
                crate::bitcore::ChecksumSpec::new(checksum, c as usize)?;
            }
        }
        Ok(())
    }

    /// Hash bits compared per packet of interest.
    pub fn hash_bits(&self) -> usize {
        match *self {
            VariantSpec::Basic { h } | VariantSpec::Ext { h, .. } => h as usize,
        }
    }

    /// Secret bits delivered per signal.
    pub fn payload_bits(&self) -> usize {
        match *self {
            VariantSpec::Basic { h } => h as usize,
            VariantSpec::Ext { h, c, .. } => (h - c) as usize,
        }
    }

    /// Per-PoI probability that the sender signals, per the closed-form
    /// model.
    pub fn signal_prob(&self) -> f64 {
        match *self {
            VariantSpec::Basic { h } => 2f64.powi(-(h as i32)),
            VariantSpec::Ext { h, c, t, .. } => {
                p_match(h as u32, t as u32) * u_first_fit(h as u32, t as u32, c as u32)
            }
        }
    }

    pub fn mode_label(&self) -> &'static str {
        match self {
            VariantSpec::Basic { .. } => "basic",
            VariantSpec::Ext { .. } => "ext",
        }
    }
}

/// `(distance, bandwidth)` coordinates of one variant.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct VariantPoint {
    pub variant: VariantSpec,
    /// Expected packets of interest between signals.
    pub distance: f64,
    /// Secret bits per packet of interest.
    pub bandwidth: f64,
}

/// Closed-form `(distance, bandwidth)` for a variant.
///
/// Basic: `(2^h, h/2^h)`. Extended: distance is the reciprocal of the signal
/// probability and bandwidth is `payload_bits * signal_prob`, so that
/// bandwidth x distance equals the payload bits per signal.
pub fn variant_point(variant: &VariantSpec) -> VariantPoint {
    let p = variant.signal_prob();
    VariantPoint {
        variant: *variant,
        distance: 1.0 / p,
        bandwidth: variant.payload_bits() as f64 * p,
    }
}

/// Non-domination mask over a set of points, maximizing both axes.
///
/// `A` is dominated by `B` iff `distance(B) >= distance(A)` and
/// `bandwidth(B) >= bandwidth(A)` with at least one strict inequality.
/// Exact ties survive.
pub fn pareto_mask(points: &[VariantPoint]) -> Vec<bool> {
    points
        .iter()
        .map(|a| {
            !points.iter().any(|b| {
                b.distance >= a.distance
                    && b.bandwidth >= a.bandwidth
                    && (b.distance > a.distance || b.bandwidth > a.bandwidth)
            })
        })
        .collect()
}

/// The non-dominated subset of `points`. Errors on an empty input.
pub fn pareto_front(points: &[VariantPoint]) -> Result<Vec<VariantPoint>> {
    if points.is_empty() {
        return Err(Error::EmptyInput("pareto point set"));
    }
    let mask = pareto_mask(points);
    Ok(points
        .iter()
        .zip(mask)
        .filter(|(_, keep)| *keep)
        .map(|(p, _)| *p)
        .collect())
}

/// Cost of transmitting a whole message through a variant.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TransmissionCost {
    /// Signal packets needed (one per chunk).
    pub signals: u64,
    /// Expected packets of interest observed over the whole transfer.
    pub expected_pois: f64,
    /// Signals as a share of all packets involved.
    pub signal_share: f64,
}

/// Expected packets-of-interest budget for `message_bits` through `variant`.
pub fn transmission_cost(message_bits: u64, variant: &VariantSpec) -> Result<TransmissionCost> {
    if message_bits == 0 {
        return Err(Error::EmptyInput("message bits"));
    }
    variant.validate()?;
    let chunk = variant.payload_bits() as u64;
    let signals = message_bits.div_ceil(chunk);
    let expected_pois = signals as f64 * variant_point(variant).distance;
    Ok(TransmissionCost {
        signals,
        expected_pois,
        signal_share: signals as f64 / (signals as f64 + expected_pois),
    })
}

/// One candidate sizing of the sender-report pointer scheme.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RtcpCandidate {
    pub h: u32,
    /// Packets of interest per report interval: `floor(r*t / 2h)`.
    pub poi_count: u64,
    /// Bits needed to index one of them: `ceil(log2 T)`.
    pub pointer_bits: u32,
}

/// Pointer sizing for a stream of `rate_bits_per_s` split into `2h`-bit
/// pieces between sender reports `sr_interval_s` apart.
pub fn rtcp_candidate(rate_bits_per_s: f64, sr_interval_s: f64, h: u32) -> Result<RtcpCandidate> {
    if rate_bits_per_s <= 0.0 || sr_interval_s <= 0.0 {
        return Err(Error::InvalidConfig(
            "rate and report interval must be positive".into(),
        ));
    }
    if h == 0 {
        return Err(Error::InvalidConfig("h must be positive".into()));
    }
    let t = (rate_bits_per_s * sr_interval_s / (2.0 * h as f64)).floor();
    if t < 1.0 {
        return Err(Error::InvalidConfig(format!(
            "no packet of interest fits: rate*interval too small for h={h}"
        )));
    }
    let poi_count = t as u64;
    let pointer_bits = if poi_count <= 1 {
        0
    } else {
        64 - (poi_count - 1).leading_zeros()
    };
    Ok(RtcpCandidate {
        h,
        poi_count,
        pointer_bits,
    })
}

/// Smallest `h` in 1..=128 whose pointer costs at most a quarter of the
/// payload (`pointer_bits <= h/4`), the suggested operating point.
pub fn rtcp_suggest(rate_bits_per_s: f64, sr_interval_s: f64) -> Option<RtcpCandidate> {
    (1..=128u32).find_map(|h| {
        rtcp_candidate(rate_bits_per_s, sr_interval_s, h)
            .ok()
            .filter(|cand| cand.pointer_bits as f64 <= h as f64 / 4.0)
    })
}

/// The default evaluation grid: basic h = 14..=20 and extended payloads
/// 14..=18 with c = 6..=10, t = 1..=5 for each checksum in the simulation
/// trio. Grid cells whose parameters a checksum cannot support (crc8 with
/// c > 8) are counted but not emitted.
#[derive(Clone, Debug)]
pub struct GridEnumeration {
    pub specs: Vec<VariantSpec>,
    /// Cells in the nominal grid, including unsupported ones.
    pub cells_total: usize,
    /// Cells skipped because the checksum cannot support them.
    pub cells_skipped: usize,
}

pub fn default_grid() -> GridEnumeration {
    let mut specs = Vec::new();
    let mut cells_total = 0;
    let mut cells_skipped = 0;
    for h in 14..=20u16 {
        cells_total += 1;
        specs.push(VariantSpec::Basic { h });
    }
    for payload in 14..=18u16 {
        for c in 6..=10u16 {
            for t in 1..=5u16 {
                for checksum in [
                    ChecksumKind::Sha3Prefix,
                    ChecksumKind::Crc8Prefix,
                    ChecksumKind::AdHoc,
                ] {
                    cells_total += 1;
                    let spec = VariantSpec::Ext {
                        h: payload + c,
                        c,
                        t,
                        checksum,
                    };
                    if spec.validate().is_ok() {
                        specs.push(spec);
                    } else {
                        cells_skipped += 1;
                    }
                }
            }
        }
    }
    GridEnumeration {
        specs,
        cells_total,
        cells_skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_sums() {
        assert_eq!(t_count(5, 1), 6);
        assert_eq!(t_count(5, 2), 16);
        assert_eq!(t_count(20, 0), 1);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
    }

    #[test]
    fn p_match_examples() {
        assert_eq!(p_match(8, 0), 1.0 / 256.0);
        assert!((p_match(8, 1) - 9.0 / 256.0).abs() < 1e-15);
        assert_eq!(p_match(5, 5), 1.0);
    }

    #[test]
    fn p_match_monotone_in_t() {
        for h in [4u32, 8, 20] {
            let mut prev = 0.0;
            for t in 0..=h {
                let p = p_match(h, t);
                assert!(p >= prev);
                prev = p;
            }
            assert_eq!(prev, 1.0);
        }
    }

    #[test]
    fn u_first_fit_examples() {
        assert_eq!(u_first_fit(8, 0, 4), 1.0);
        // (1 - 0.75^6) / (6 * 0.25)
        let want = (1.0 - 0.75f64.powi(6)) / 1.5;
        assert!((u_first_fit(5, 1, 2) - want).abs() < 1e-12);
        assert!((want - 0.54801).abs() < 1e-5);
        // limit: large c with T fixed -> 1
        assert!(u_first_fit(5, 1, 16) > 0.999);
    }

    #[test]
    fn u_first_fit_in_unit_interval() {
        for h in [10u32, 20, 28] {
            for t in 0..=5 {
                for c in 1..=10 {
                    let u = u_first_fit(h, t, c);
                    assert!(u > 0.0 && u <= 1.0, "U({h},{t},{c}) = {u}");
                }
            }
        }
    }

    #[test]
    fn variant_points() {
        let basic = variant_point(&VariantSpec::Basic { h: 8 });
        assert_eq!(basic.distance, 256.0);
        assert_eq!(basic.bandwidth, 0.03125);
        assert_eq!(basic.bandwidth * basic.distance, 8.0);

        // t=0 ext equals basic on h bits carrying h-c payload
        let ext0 = variant_point(&VariantSpec::Ext {
            h: 20,
            c: 6,
            t: 0,
            checksum: ChecksumKind::Sha3Prefix,
        });
        assert_eq!(ext0.distance, 2f64.powi(20));
        assert_eq!(ext0.bandwidth, 14.0 / 2f64.powi(20));

        let ext1 = variant_point(&VariantSpec::Ext {
            h: 20,
            c: 6,
            t: 1,
            checksum: ChecksumKind::Sha3Prefix,
        });
        assert!(
            (ext1.distance - 5.82e4).abs() / 5.82e4 < 0.01,
            "distance {}",
            ext1.distance
        );
    }

    #[test]
    fn bandwidth_distance_product_is_payload() {
        for spec in default_grid().specs {
            let pt = variant_point(&spec);
            let payload = spec.payload_bits() as f64;
            let rel = (pt.bandwidth * pt.distance - payload).abs() / payload;
            assert!(rel < 1e-12, "{spec:?}: product off by {rel}");
            if matches!(spec, VariantSpec::Basic { .. }) {
                assert_eq!(pt.bandwidth * pt.distance, payload);
            }
        }
    }

    #[test]
    fn pareto_examples() {
        let single = vec![variant_point(&VariantSpec::Basic { h: 8 })];
        assert_eq!(pareto_front(&single).unwrap().len(), 1);

        let basics: Vec<_> = (14..=20u16)
            .map(|h| variant_point(&VariantSpec::Basic { h }))
            .collect();
        assert_eq!(pareto_front(&basics).unwrap().len(), 7);

        // equal distance, lower bandwidth dominated
        let mk = |d: f64, b: f64| VariantPoint {
            variant: VariantSpec::Basic { h: 8 },
            distance: d,
            bandwidth: b,
        };
        let front = pareto_front(&[mk(100.0, 0.5), mk(100.0, 0.4)]).unwrap();
        assert_eq!(front.len(), 1);
        assert_eq!(front[0].bandwidth, 0.5);

        // exact ties are kept
        let front = pareto_front(&[mk(100.0, 0.5), mk(100.0, 0.5)]).unwrap();
        assert_eq!(front.len(), 2);
    }

    #[test]
    fn pareto_front_self_consistent() {
        let points: Vec<_> = default_grid()
            .specs
            .iter()
            .map(variant_point)
            .collect();
        let front = pareto_front(&points).unwrap();
        let again = pareto_front(&front).unwrap();
        assert_eq!(front.len(), again.len());
    }

    #[test]
    fn transmission_cost_examples() {
        let c = transmission_cost(1000, &VariantSpec::Basic { h: 1 }).unwrap();
        assert_eq!(c.signals, 1000);
        assert_eq!(c.expected_pois, 2000.0);

        let c = transmission_cost(1000, &VariantSpec::Basic { h: 8 }).unwrap();
        assert_eq!(c.signals, 125);
        assert_eq!(c.expected_pois, 32000.0);
    }

    #[test]
    fn signal_share_decreases_in_h() {
        let mut prev = f64::INFINITY;
        for h in 1..=6u16 {
            let share = transmission_cost(1000, &VariantSpec::Basic { h })
                .unwrap()
                .signal_share;
            assert!(share < prev, "share not decreasing at h={h}");
            prev = share;
        }
    }

    #[test]
    fn rtcp_sizing_examples() {
        let c = rtcp_candidate(64_000.0, 5.0, 64).unwrap();
        assert_eq!(c.poi_count, 2500);
        assert_eq!(c.pointer_bits, 12);

        // r = 2h/t exactly: one packet of interest, zero pointer bits
        let c = rtcp_candidate(2.0 * 64.0 / 5.0, 5.0, 64).unwrap();
        assert_eq!(c.poi_count, 1);
        assert_eq!(c.pointer_bits, 0);

        let s = rtcp_suggest(64_000.0, 5.0).unwrap();
        assert!(s.pointer_bits as f64 <= s.h as f64 / 4.0);
        assert!(rtcp_candidate(1.0, 1.0, 64).is_err());
    }

    #[test]
    fn default_grid_arithmetic() {
        let grid = default_grid();
        assert_eq!(grid.cells_total, 7 + 5 * 5 * 5 * 3);
        assert_eq!(grid.cells_skipped, 5 * 5 * 2); // crc8 at c=9,10
        assert_eq!(grid.specs.len(), grid.cells_total - grid.cells_skipped);
    }
}
