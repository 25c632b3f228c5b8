//! The warden's toolkit: inter-packet-delay extraction, the two-sample
//! Kolmogorov–Smirnov test, compressibility scores, and ROC/AUC scoring.

mod compress;
mod ks;
mod roc;

pub use compress::{compressibility_scores, CompressWindow, DEFAULT_WINDOW_LEN};
pub use ks::{ks_two_sample, KsResult};
pub use roc::roc_auc;

use crate::traffic::TraceRecord;
use crate::{Error, Result};

/// Ordered delays between consecutive records matching a predicate in one
/// recording.
#[derive(Clone, Debug, PartialEq)]
pub struct IpdSeries {
    pub deltas: Vec<f64>,
}

impl IpdSeries {
    pub fn new(deltas: Vec<f64>) -> Self {
        Self { deltas }
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

/// Deltas between consecutive records matching `signal_predicate`.
///
/// Fewer than two matches cannot form a delay series and is an error.
pub fn extract_ipds<F>(trace: &[TraceRecord], signal_predicate: F) -> Result<IpdSeries>
where
    F: Fn(&TraceRecord) -> bool,
{
    let times: Vec<f64> = trace
        .iter()
        .filter(|r| signal_predicate(r))
        .map(|r| r.ts)
        .collect();
    if times.len() < 2 {
        return Err(Error::SeriesTooShort {
            need: 2,
            got: times.len(),
        });
    }
    Ok(IpdSeries::new(
        times.windows(2).map(|w| w[1] - w[0]).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::{synth_trace, ArpOp, NetKind, SynthSpec};

    fn record(ts: f64) -> TraceRecord {
        TraceRecord {
            ts,
            link_src: [0; 6],
            link_dst: [0xff; 6],
            net_kind: NetKind::Arp,
            net_src: None,
            net_dst: None,
            arp_op: Some(ArpOp::Request),
            len: 60,
        }
    }

    #[test]
    fn deltas_between_matches() {
        let trace = vec![record(1.0), record(2.0), record(4.0)];
        let series = extract_ipds(&trace, |_| true).unwrap();
        assert_eq!(series.deltas, vec![1.0, 2.0]);
    }

    #[test]
    fn too_few_matches_is_error() {
        let trace = vec![record(1.0), record(2.0)];
        assert!(extract_ipds(&trace, |_| false).is_err());
        assert!(extract_ipds(&trace[..1], |_| true).is_err());
    }

    #[test]
    fn poisson_trace_mean_delta_matches_rate() {
        // lambda = 2/s over 4 hours: mean delta ~ 0.5 s
        let trace = synth_trace(&SynthSpec::new(7200.0, 4.0 * 3600.0, 1.0, 8)).unwrap();
        let series = extract_ipds(&trace, |_| true).unwrap();
        let n = series.len() as f64;
        let mean = series.deltas.iter().sum::<f64>() / n;
        // exponential: sd of the mean is (1/lambda)/sqrt(n)
        let sigma = 0.5 / n.sqrt();
        assert!(
            (mean - 0.5).abs() < 3.0 * sigma,
            "mean {mean} outside band"
        );
    }
}
