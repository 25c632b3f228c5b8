use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use super::TraceRecord;
use crate::{Error, Result};

/// Per-observer delay model producing the sender's and receiver's views of
/// one trace.
///
/// Every record receives an independent per-observer delay drawn from a
/// normal distribution truncated at zero, plus a uniform draw from
/// `[0, reorder_window]`; each view is re-sorted by its own perceived
/// timestamps, so reordering emerges when delays cross. Records are dropped
/// per observer with probability `drop_prob`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JitterModel {
    pub delay_mean: f64,
    pub delay_std: f64,
    pub reorder_window: f64,
    pub drop_prob: f64,
}

impl JitterModel {
    /// No delays, no drops: both views equal the input trace.
    pub fn zero() -> Self {
        Self {
            delay_mean: 0.0,
            delay_std: 0.0,
            reorder_window: 0.0,
            drop_prob: 0.0,
        }
    }

    /// Quiet residential network: sub-millisecond delays with a 2.1e-5 s
    /// standard deviation.
    pub fn home() -> Self {
        Self {
            delay_mean: 1.0e-4,
            delay_std: 2.1e-5,
            reorder_window: 0.0,
            drop_prob: 0.0,
        }
    }

    /// Busier office network: millisecond-scale delays with a 9.1e-3 s
    /// standard deviation.
    pub fn university() -> Self {
        Self {
            delay_mean: 5.0e-3,
            delay_std: 9.1e-3,
            reorder_window: 0.0,
            drop_prob: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delay_mean < 0.0
            || self.delay_std < 0.0
            || self.reorder_window < 0.0
            || !(0.0..1.0).contains(&self.drop_prob)
        {
            return Err(Error::InvalidConfig(
                "jitter parameters must be non-negative with drop_prob in [0, 1)".into(),
            ));
        }
        Ok(())
    }

    fn sample_delay(&self, rng: &mut impl Rng) -> f64 {
        let base = if self.delay_std > 0.0 {
            let normal = Normal::new(self.delay_mean, self.delay_std).expect("validated");
            rng.sample(normal).max(0.0)
        } else {
            self.delay_mean
        };
        let extra = if self.reorder_window > 0.0 {
            rng.random_range(0.0..self.reorder_window)
        } else {
            0.0
        };
        base + extra
    }
}

/// Apply the jitter model to a time-ordered trace, producing the sender's
/// and receiver's views. Deterministic in the seed.
pub fn apply_jitter(
    trace: &[TraceRecord],
    model: &JitterModel,
    seed: u64,
) -> Result<(Vec<TraceRecord>, Vec<TraceRecord>)> {
    model.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut cs = Vec::with_capacity(trace.len());
    let mut cr = Vec::with_capacity(trace.len());
    for record in trace {
        for view in [&mut cs, &mut cr] {
            let dropped = model.drop_prob > 0.0 && rng.random_bool(model.drop_prob);
            let delay = model.sample_delay(&mut rng);
            if !dropped {
                let mut seen = record.clone();
                seen.ts += delay;
                view.push(seen);
            }
        }
    }
    cs.sort_by(|a, b| a.ts.total_cmp(&b.ts));
    cr.sort_by(|a, b| a.ts.total_cmp(&b.ts));
    Ok((cs, cr))
}
