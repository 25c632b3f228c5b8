use serde::{Deserialize, Serialize};

use super::IpdSeries;
use crate::{Error, Result};

/// Two-sample Kolmogorov–Smirnov outcome.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KsResult {
    /// Supremum distance between the two empirical CDFs.
    pub d_stat: f64,
    /// Asymptotic two-sided p-value.
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test over inter-packet delay series.
///
/// The statistic is the supremum CDF gap computed by a merged sweep over
/// both sorted samples; the p-value uses the asymptotic Kolmogorov
/// distribution with effective size `n_a*n_b/(n_a+n_b)` and the small-sample
/// correction factor `sqrt(n_e) + 0.12 + 0.11/sqrt(n_e)`.
pub fn ks_two_sample(a: &IpdSeries, b: &IpdSeries) -> Result<KsResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::SeriesTooShort {
            need: 2,
            got: a.len().min(b.len()),
        });
    }
    let mut xs = a.deltas.clone();
    let mut ys = b.deltas.clone();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);

    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d_stat: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i];
        let y = ys[j];
        let v = x.min(y);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d_stat = d_stat.max((i as f64 / na - j as f64 / nb).abs());
    }

    let n_eff = na * nb / (na + nb);
    let lambda = (n_eff.sqrt() + 0.12 + 0.11 / n_eff.sqrt()) * d_stat;
    Ok(KsResult {
        d_stat,
        p_value: kolmogorov_q(lambda),
    })
}

/// Asymptotic survival function `Q(lambda) = 2 sum_{j>=1} (-1)^{j-1}
/// exp(-2 j^2 lambda^2)`, truncated when terms drop below 1e-10.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let term = (-2.0 * (j as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-10 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
