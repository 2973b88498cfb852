//! Objective-driven slack assignment and the metrics used to judge it.
//!
//! Slack headers are stamped once, at injection:
//!
//! * `Fct`: slack = flow_size_bytes * D. With D far above any real delay the
//!   constant cancels out of every comparison and packets order by flow size,
//!   emulating shortest-job-first end to end.
//! * `Uniform`: every packet gets the same constant, which makes LSTF
//!   equivalent to FIFO+ (tail-trimming without changing the mean much).
//! * `Fair`: a per-flow virtual queue draining at `r_est`; a flow sending
//!   faster than `r_est` accumulates slack and yields to compliant flows.
//!   slack(p_i) = max(0, slack(p_(i-1)) + size(p_i)/r_est - (i(p_i) - i(p_(i-1)))),
//!   first packet 0. The estimate only has to be a common yardstick:
//!   convergence survives r_est off by orders of magnitude.

use crate::net::FlowId;
use crate::time::{div_round_half_up, SimTime};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SlackPolicy {
    Fct {
        /// Per-byte slack quantum; default one second.
        d: SimTime,
    },
    Uniform {
        c: SimTime,
    },
    Fair {
        r_est_bps: u64,
        /// Per-flow overrides of the rate estimate (weighted variant).
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        per_flow_bps: BTreeMap<FlowId, u64>,
    },
}

impl SlackPolicy {
    pub fn fct_default() -> SlackPolicy {
        SlackPolicy::Fct {
            d: SimTime::from_secs(1),
        }
    }
    pub fn uniform_default() -> SlackPolicy {
        SlackPolicy::Uniform {
            c: SimTime::from_secs(1),
        }
    }
    pub fn name(&self) -> &'static str {
        match self {
            SlackPolicy::Fct { .. } => "fct",
            SlackPolicy::Uniform { .. } => "uniform",
            SlackPolicy::Fair { .. } => "fair",
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct FairFlow {
    prev_slack: i64,
    prev_arrival: SimTime,
    started: bool,
}

/// Stateful policy evaluator; one per simulation run.
pub struct PolicyState {
    policy: SlackPolicy,
    fair: BTreeMap<FlowId, FairFlow>,
    /// Times the fct product hit the i64 ceiling (reported, not fatal).
    pub saturations: u64,
}

impl PolicyState {
    pub fn new(policy: SlackPolicy) -> PolicyState {
        PolicyState {
            policy,
            fair: BTreeMap::new(),
            saturations: 0,
        }
    }

    /// Slack for a packet injected now. Fair-policy arrivals within a flow
    /// must be fed in nondecreasing time order.
    pub fn slack_for(
        &mut self,
        flow: FlowId,
        flow_size_bytes: u64,
        pkt_size_bits: u64,
        arrival: SimTime,
    ) -> i64 {
        match &self.policy {
            SlackPolicy::Fct { d } => {
                let (v, sat) = (flow_size_bytes as i64).overflowing_mul(d.as_i64());
                if sat || v < 0 {
                    self.saturations += 1;
                    i64::MAX
                } else {
                    v
                }
            }
            SlackPolicy::Uniform { c } => c.as_i64(),
            SlackPolicy::Fair {
                r_est_bps,
                per_flow_bps,
            } => {
                let rate = *per_flow_bps.get(&flow).unwrap_or(r_est_bps);
                let svc = div_round_half_up(pkt_size_bits as u128 * 1_000_000_000, rate as u128)
                    as i64;
                let st = self.fair.entry(flow).or_default();
                let slack = if !st.started {
                    0
                } else {
                    assert!(
                        arrival >= st.prev_arrival,
                        "fair policy requires in-order arrivals per flow"
                    );
                    let gap = (arrival - st.prev_arrival).as_i64();
                    (st.prev_slack + svc - gap).max(0)
                };
                st.prev_slack = slack;
                st.prev_arrival = arrival;
                st.started = true;
                slack
            }
        }
    }
}

/// Jain fairness index (sum x)^2 / (n * sum x^2); None when all-zero.
pub fn jain_index(xs: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let s: f64 = xs.iter().sum();
    let s2: f64 = xs.iter().map(|x| x * x).sum();
    if s2 == 0.0 {
        None
    } else {
        Some(s * s / (n * s2))
    }
}

/// Nearest-rank percentile of an unsorted sample; p in (0, 100].
pub fn percentile(values: &[u64], p: f64) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let rank = ((p / 100.0) * v.len() as f64).ceil() as usize;
    Some(v[rank.clamp(1, v.len()) - 1])
}

#[derive(Clone, Debug, Serialize)]
pub struct FctBucket {
    pub lo_bytes: u64,
    /// Exclusive upper edge; None for the final open bucket.
    pub hi_bytes: Option<u64>,
    pub flows: u64,
    pub mean_fct_ns: Option<f64>,
}

/// Mean flow-completion time per flow-size bucket. `edges` are the interior
/// boundaries; buckets are [0,e0), [e0,e1), ..., [ek,inf).
pub fn fct_buckets(flows: &[(u64, SimTime)], edges: &[u64]) -> Vec<FctBucket> {
    assert!(edges.windows(2).all(|w| w[0] < w[1]), "edges must ascend");
    let mut lo = 0u64;
    let mut out = Vec::new();
    for i in 0..=edges.len() {
        let hi = edges.get(i).copied();
        let sel: Vec<f64> = flows
            .iter()
            .filter(|(size, _)| *size >= lo && hi.map_or(true, |h| *size < h))
            .map(|(_, fct)| fct.as_nanos() as f64)
            .collect();
        out.push(FctBucket {
            lo_bytes: lo,
            hi_bytes: hi,
            flows: sel.len() as u64,
            mean_fct_ns: if sel.is_empty() {
                None
            } else {
                Some(sel.iter().sum::<f64>() / sel.len() as f64)
            },
        });
        if let Some(h) = hi {
            lo = h;
        }
    }
    out
}

/// Per-window Jain index over per-flow delivered bytes. `deliveries` are
/// (exit_time, flow, bytes); every flow in `flows` counts in every window,
/// contributing zero when silent. Windows cover [0, horizon).
pub fn jain_windows(
    deliveries: &[(SimTime, FlowId, u64)],
    flows: &[FlowId],
    window: SimTime,
    horizon: SimTime,
) -> Vec<Option<f64>> {
    assert!(window.as_nanos() > 0);
    let nwin = horizon.as_nanos().div_ceil(window.as_nanos()) as usize;
    let mut per: Vec<BTreeMap<FlowId, u64>> = vec![BTreeMap::new(); nwin];
    for (t, flow, bytes) in deliveries {
        let w = (t.as_nanos() / window.as_nanos()) as usize;
        if w < nwin {
            *per[w].entry(*flow).or_insert(0) += bytes;
        }
    }
    per.iter()
        .map(|m| {
            let xs: Vec<f64> = flows
                .iter()
                .map(|f| *m.get(f).unwrap_or(&0) as f64)
                .collect();
            jain_index(&xs)
        })
        .collect()
}

/// Start time of the first window whose index reaches `theta`. Closed-loop
/// sources keep the per-window index oscillating after convergence, so the
/// first crossing is the comparable event, not a sustained plateau.
pub fn time_to_fairness(series: &[Option<f64>], window: SimTime, theta: f64) -> Option<SimTime> {
    series
        .iter()
        .position(|j| matches!(j, Some(v) if *v >= theta))
        .map(|i| SimTime(i as u64 * window.as_nanos()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fct_slack_is_size_times_d() {
        let mut p = PolicyState::new(SlackPolicy::Fct {
            d: SimTime::from_secs(1),
        });
        let s = p.slack_for(FlowId(1), 10_000, 12_000, SimTime::ZERO);
        assert_eq!(s, 10_000 * 1_000_000_000);
        assert_eq!(p.saturations, 0);
        // Saturation: ~1e10 bytes at 1e9 ns/byte overflows i64.
        let s = p.slack_for(FlowId(2), u64::MAX / 2, 12_000, SimTime::ZERO);
        assert_eq!(s, i64::MAX);
        assert_eq!(p.saturations, 1);
    }

    #[test]
    fn uniform_slack_is_constant() {
        let mut p = PolicyState::new(SlackPolicy::Uniform {
            c: SimTime(777),
        });
        for i in 0..5 {
            assert_eq!(p.slack_for(FlowId(i), i as u64, 8, SimTime(i as u64)), 777);
        }
    }

    /// Oracle: hand-run of the virtual-queue recurrence.
    /// svc = 1000 ticks per packet (1000 bits at 1 Gbps).
    /// arrivals 0, 500, 2500, 2600 -> slacks 0, 500, 0, 900.
    #[test]
    fn fair_recurrence_matches_hand_computation() {
        let mut p = PolicyState::new(SlackPolicy::Fair {
            r_est_bps: 1_000_000_000,
            per_flow_bps: BTreeMap::new(),
        });
        let f = FlowId(3);
        assert_eq!(p.slack_for(f, 0, 1_000, SimTime(0)), 0);
        assert_eq!(p.slack_for(f, 0, 1_000, SimTime(500)), 500);
        assert_eq!(p.slack_for(f, 0, 1_000, SimTime(2_500)), 0);
        assert_eq!(p.slack_for(f, 0, 1_000, SimTime(2_600)), 900);
        // Independent flows do not share state.
        assert_eq!(p.slack_for(FlowId(4), 0, 1_000, SimTime(2_600)), 0);
    }

    /// A flow pacing exactly at r_est keeps zero slack; at half r_est the
    /// slack stays zero; at 2x r_est it grows by svc/2 per packet.
    #[test]
    fn fair_slack_tracks_rate_violation() {
        let mk = || {
            PolicyState::new(SlackPolicy::Fair {
                r_est_bps: 1_000_000_000,
                per_flow_bps: BTreeMap::new(),
            })
        };
        let f = FlowId(1);
        let mut exact = mk();
        let mut slow = mk();
        let mut fast = mk();
        for i in 0..50u64 {
            assert_eq!(exact.slack_for(f, 0, 1_000, SimTime(i * 1_000)), 0);
            assert_eq!(slow.slack_for(f, 0, 1_000, SimTime(i * 2_000)), 0);
            let s = fast.slack_for(f, 0, 1_000, SimTime(i * 500));
            assert_eq!(s, (i * 500) as i64);
        }
    }

    #[test]
    fn fair_per_flow_override() {
        let mut per = BTreeMap::new();
        per.insert(FlowId(9), 2_000_000_000u64);
        let mut p = PolicyState::new(SlackPolicy::Fair {
            r_est_bps: 1_000_000_000,
            per_flow_bps: per,
        });
        p.slack_for(FlowId(9), 0, 1_000, SimTime(0));
        // svc at 2 Gbps is 500; gap 400 -> slack 100.
        assert_eq!(p.slack_for(FlowId(9), 0, 1_000, SimTime(400)), 100);
    }

    #[test]
    fn jain_index_basics() {
        assert_eq!(jain_index(&[5.0, 5.0, 5.0]), Some(1.0));
        assert_eq!(jain_index(&[]), None);
        assert_eq!(jain_index(&[0.0, 0.0]), None);
        // One active flow out of four: 1/4.
        let j = jain_index(&[8.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((j - 0.25).abs() < 1e-12);
    }

    #[test]
    fn percentile_nearest_rank() {
        let v: Vec<u64> = (1..=100).collect();
        assert_eq!(percentile(&v, 50.0), Some(50));
        assert_eq!(percentile(&v, 99.0), Some(99));
        assert_eq!(percentile(&v, 100.0), Some(100));
        assert_eq!(percentile(&[7], 99.0), Some(7));
        assert_eq!(percentile(&[], 50.0), None);
    }

    #[test]
    fn buckets_partition_sizes() {
        let flows = vec![
            (100u64, SimTime(10)),
            (5_000, SimTime(20)),
            (5_000, SimTime(40)),
            (1_000_000, SimTime(100)),
        ];
        let b = fct_buckets(&flows, &[1_000, 10_000]);
        assert_eq!(b.len(), 3);
        assert_eq!(b[0].flows, 1);
        assert_eq!(b[0].mean_fct_ns, Some(10.0));
        assert_eq!(b[1].flows, 2);
        assert_eq!(b[1].mean_fct_ns, Some(30.0));
        assert_eq!(b[2].flows, 1);
        assert_eq!(b[2].hi_bytes, None);
        let empty = fct_buckets(&flows[..0], &[1_000]);
        assert_eq!(empty[0].mean_fct_ns, None);
    }

    #[test]
    fn jain_windows_and_convergence_time() {
        let f1 = FlowId(1);
        let f2 = FlowId(2);
        let deliveries = vec![
            (SimTime(100), f1, 3_000u64),
            (SimTime(900), f1, 3_000),
            // window 1: both equal
            (SimTime(1_100), f1, 1_500),
            (SimTime(1_200), f2, 1_500),
            // window 2: both equal
            (SimTime(2_500), f1, 3_000),
            (SimTime(2_600), f2, 3_000),
        ];
        let series = jain_windows(
            &deliveries,
            &[f1, f2],
            SimTime(1_000),
            SimTime(3_000),
        );
        assert_eq!(series.len(), 3);
        assert!((series[0].unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(series[1], Some(1.0));
        assert_eq!(series[2], Some(1.0));
        assert_eq!(
            time_to_fairness(&series, SimTime(1_000), 0.99),
            Some(SimTime(1_000))
        );
        assert_eq!(time_to_fairness(&series, SimTime(1_000), 1.1), None);
        // A later dip does not move the first crossing.
        let dipped = [Some(0.5), Some(0.995), Some(0.9), Some(1.0)];
        assert_eq!(
            time_to_fairness(&dipped, SimTime(1_000), 0.99),
            Some(SimTime(1_000))
        );
        assert_eq!(time_to_fairness(&[None, Some(0.3)], SimTime(1_000), 0.99), None);
    }
}
