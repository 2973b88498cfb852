//! Record the per-hop schedule of a finished run, then replay it under a
//! candidate discipline that sees nothing but a header stamped at injection.
//!
//! The replayed network and injection times are identical to the original;
//! only the queueing decisions differ. A candidate "replays" a record when
//! every packet exits no later than it originally did. Replay quality is
//! reported per packet (lateness against a one-MTU-at-the-bottleneck
//! threshold) and per run (overdue fractions, median queueing ratio).
//!
//! Queueing-ratio conventions: a packet with zero recorded and zero replayed
//! queueing scores 1; zero recorded but positive replayed queueing scores
//! infinity (rendered as `inf` in CSV, null in JSON). The reported median is
//! the lower median.

use crate::engine::{Sim, SimConfig, SimResult};
use crate::net::{FlowId, Network, NodeId, PktId, SchedHeader};
use crate::sched::SchedulerKind;
use crate::time::SimTime;
use crate::transport::{FlowSpec, PlannedPacket, TransportKind};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecordedHop {
    pub node: NodeId,
    pub arrival: SimTime,
    pub start: SimTime,
}

/// One packet's recorded life: injection, per-hop service starts at every
/// forwarding node, and final exit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecordedPacket {
    pub pkt: PktId,
    pub flow: FlowId,
    pub size_bits: u64,
    pub injected: SimTime,
    pub exit: SimTime,
    pub path: Vec<NodeId>,
    pub hops: Vec<RecordedHop>,
}

impl RecordedPacket {
    /// Nodes where this packet was scheduled strictly after it arrived.
    pub fn congestion_points(&self) -> Vec<NodeId> {
        self.hops
            .iter()
            .filter(|h| h.start > h.arrival)
            .map(|h| h.node)
            .collect()
    }

    /// Recorded queueing: everything beyond the no-queue minimum latency.
    pub fn queueing(&self, net: &Network) -> u64 {
        let tmin = net.t_min_full(&self.path, self.size_bits);
        (self.exit - self.injected - tmin).as_nanos()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct ScheduleRecord {
    pub packets: Vec<RecordedPacket>,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("packet {0:?} was dropped; replay needs loss-free records")]
    DroppedPacket(PktId),
    #[error("{0} packets never exited; run the original to completion first")]
    Unfinished(usize),
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("packet {0:?} exits {1} ns before its minimum latency allows")]
    InfeasibleExit(PktId, u64),
    #[error("packet {0:?} waited at {1} nodes; single-congestion-point priorities need at most one")]
    MultipleCongestionPoints(PktId, usize),
    #[error("packet {0:?} crosses {1} congested nodes; no unique congestion point to price against")]
    AmbiguousCongestionPoint(PktId, usize),
}

impl ScheduleRecord {
    pub fn from_result(res: &SimResult) -> Result<ScheduleRecord, RecordError> {
        if let Some(tr) = res.packets.iter().find(|p| p.dropped.is_some()) {
            return Err(RecordError::DroppedPacket(tr.id));
        }
        let unfinished = res.packets.iter().filter(|p| p.exit.is_none()).count();
        if unfinished > 0 {
            return Err(RecordError::Unfinished(unfinished));
        }
        let packets = res
            .packets
            .iter()
            .map(|tr| {
                // The destination hop never queues; forwarding hops carry the
                // schedule.
                let hops: Vec<RecordedHop> = tr.hops[..tr.hops.len() - 1]
                    .iter()
                    .map(|h| RecordedHop {
                        node: h.node,
                        arrival: h.arrival,
                        start: h.start.expect("exited packet has complete hops"),
                    })
                    .collect();
                debug_assert_eq!(hops.len(), tr.path.len() - 1);
                RecordedPacket {
                    pkt: tr.id,
                    flow: tr.flow,
                    size_bits: tr.size_bits,
                    injected: tr.injected,
                    exit: tr.exit.unwrap(),
                    path: tr.path.to_vec(),
                    hops,
                }
            })
            .collect();
        Ok(ScheduleRecord { packets })
    }

    /// Per node: how many packets waited there.
    pub fn congestion_counts(&self) -> BTreeMap<NodeId, u64> {
        let mut out = BTreeMap::new();
        for p in &self.packets {
            for node in p.congestion_points() {
                *out.entry(node).or_insert(0) += 1;
            }
        }
        out
    }

    /// Largest packet in the record (threshold MTU).
    pub fn mtu_bits(&self) -> u64 {
        self.packets.iter().map(|p| p.size_bits).max().unwrap_or(0)
    }

    /// Columnar text form: one `P` line per packet, one `H` line per hop.
    pub fn to_text(&self) -> String {
        let mut out = String::from("schedule-record v1\n");
        for p in &self.packets {
            let path = p
                .path
                .iter()
                .map(|n| n.0.to_string())
                .collect::<Vec<_>>()
                .join(",");
            writeln!(
                out,
                "P {} {} {} {} {} {}",
                p.pkt.0, p.flow.0, p.size_bits, p.injected, p.exit, path
            )
            .unwrap();
            for h in &p.hops {
                writeln!(out, "H {} {} {}", h.node.0, h.arrival, h.start).unwrap();
            }
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<ScheduleRecord, ParseError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "schedule-record v1")) => {}
            _ => return Err(ParseError::new(1, "expected header `schedule-record v1`")),
        }
        let mut packets: Vec<RecordedPacket> = Vec::new();
        for (i, line) in lines {
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut f = line.split_whitespace();
            match f.next() {
                Some("P") => {
                    let mut next = |what: &str| {
                        f.next()
                            .ok_or_else(|| ParseError::new(lineno, format!("missing {what}")))
                    };
                    let pkt = parse_u64(next("pkt id")?, lineno)?;
                    let flow = parse_u64(next("flow id")?, lineno)?;
                    let bits = parse_u64(next("size_bits")?, lineno)?;
                    let injected = parse_u64(next("injected")?, lineno)?;
                    let exit = parse_u64(next("exit")?, lineno)?;
                    let path = next("path")?
                        .split(',')
                        .map(|s| parse_u64(s, lineno).map(|n| NodeId(n as u32)))
                        .collect::<Result<Vec<_>, _>>()?;
                    packets.push(RecordedPacket {
                        pkt: PktId(pkt),
                        flow: FlowId(flow as u32),
                        size_bits: bits,
                        injected: SimTime(injected),
                        exit: SimTime(exit),
                        path,
                        hops: Vec::new(),
                    });
                }
                Some("H") => {
                    let p = packets
                        .last_mut()
                        .ok_or_else(|| ParseError::new(lineno, "hop before any packet"))?;
                    let mut f = line.split_whitespace().skip(1);
                    let mut next = |what: &str| {
                        f.next()
                            .ok_or_else(|| ParseError::new(lineno, format!("missing {what}")))
                    };
                    let node = parse_u64(next("node")?, lineno)?;
                    let arrival = parse_u64(next("arrival")?, lineno)?;
                    let start = parse_u64(next("start")?, lineno)?;
                    p.hops.push(RecordedHop {
                        node: NodeId(node as u32),
                        arrival: SimTime(arrival),
                        start: SimTime(start),
                    });
                }
                Some(tag) => {
                    return Err(ParseError::new(lineno, format!("unknown line tag `{tag}`")))
                }
                None => {}
            }
        }
        Ok(ScheduleRecord { packets })
    }
}

#[derive(Debug, Error)]
#[error("schedule record line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl ParseError {
    fn new(line: usize, msg: impl Into<String>) -> ParseError {
        ParseError {
            line,
            msg: msg.into(),
        }
    }
}

fn parse_u64(s: &str, line: usize) -> Result<u64, ParseError> {
    s.parse()
        .map_err(|_| ParseError::new(line, format!("bad number `{s}`")))
}

/// Header-only disciplines a record can be replayed under.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Candidate {
    /// Slack = recorded end-to-end queueing, decremented hop by hop.
    Lstf,
    /// Same header, preemptive service.
    LstfPreempt,
    /// Deadline = recorded exit time.
    Edf,
    /// Static priority = recorded exit time.
    PriorityExit,
    /// Static priority priced at the packet's single congestion point.
    PrioritySingleCp,
    /// Per-hop recorded start times (upper bound: replays anything).
    Omniscient,
}

impl Candidate {
    pub const ALL: [Candidate; 6] = [
        Candidate::Lstf,
        Candidate::LstfPreempt,
        Candidate::Edf,
        Candidate::PriorityExit,
        Candidate::PrioritySingleCp,
        Candidate::Omniscient,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Candidate::Lstf => "lstf",
            Candidate::LstfPreempt => "lstf_preempt",
            Candidate::Edf => "edf",
            Candidate::PriorityExit => "priority_exit",
            Candidate::PrioritySingleCp => "priority_single_cp",
            Candidate::Omniscient => "omniscient",
        }
    }

    pub fn parse(s: &str) -> Option<Candidate> {
        Candidate::ALL.iter().copied().find(|c| c.name() == s)
    }

    fn kind(self) -> SchedulerKind {
        match self {
            Candidate::Lstf => SchedulerKind::Lstf,
            Candidate::LstfPreempt => SchedulerKind::LstfPreempt,
            Candidate::Edf => SchedulerKind::Edf,
            Candidate::PriorityExit | Candidate::PrioritySingleCp => SchedulerKind::Priority,
            Candidate::Omniscient => SchedulerKind::Omniscient,
        }
    }
}

/// Header stamped on a record's packet for a candidate replay.
pub fn init_header(
    net: &Network,
    record: &ScheduleRecord,
    rp: &RecordedPacket,
    candidate: Candidate,
) -> Result<SchedHeader, ReplayError> {
    let tmin = net.t_min_full(&rp.path, rp.size_bits);
    let available = rp.exit - rp.injected;
    if available < tmin {
        return Err(ReplayError::InfeasibleExit(
            rp.pkt,
            (tmin - available).as_nanos(),
        ));
    }
    Ok(match candidate {
        Candidate::Lstf | Candidate::LstfPreempt => {
            SchedHeader::Slack((available - tmin).as_i64())
        }
        Candidate::Edf | Candidate::PriorityExit => SchedHeader::Priority(rp.exit.as_i64()),
        Candidate::Omniscient => {
            SchedHeader::HopTimes(rp.hops.iter().map(|h| h.start).collect::<Arc<[SimTime]>>())
        }
        Candidate::PrioritySingleCp => {
            let cps = rp.congestion_points();
            let cp = match cps.len() {
                1 => Some(cps[0]),
                0 => {
                    // Packet never waited: price it at the one node on its
                    // path that is congested for anyone, if unique.
                    let counts = record.congestion_counts();
                    let on_path: Vec<NodeId> = rp
                        .path
                        .iter()
                        .copied()
                        .filter(|n| counts.contains_key(n))
                        .collect();
                    match on_path.len() {
                        0 => None,
                        1 => Some(on_path[0]),
                        n => return Err(ReplayError::AmbiguousCongestionPoint(rp.pkt, n)),
                    }
                }
                n => return Err(ReplayError::MultipleCongestionPoints(rp.pkt, n)),
            };
            let prio = match cp {
                Some(cp) => {
                    let m = rp
                        .path
                        .iter()
                        .position(|&n| n == cp)
                        .expect("congestion point lies on the path");
                    // Matches the deadline key this packet would carry at cp:
                    // exit - t_min(cp -> dest) + T(p, cp).
                    rp.exit.as_i64() - net.t_min(&rp.path, m, rp.path.len() - 1, rp.size_bits).as_i64()
                        + net.hop_tx_time(&rp.path, m, rp.size_bits).as_i64()
                }
                // Nothing on the path is ever contended; any finite value
                // works, and the recorded exit keeps priorities comparable.
                None => rp.exit.as_i64(),
            };
            SchedHeader::Priority(prio)
        }
    })
}

/// Replay `record` on `net` under `candidate`. Packet ids in the result
/// equal record indexes: packet i of the replay is `record.packets[i]`.
pub fn replay(
    net: &Network,
    record: &ScheduleRecord,
    candidate: Candidate,
) -> Result<ReplayReport, ReplayError> {
    let result = replay_sim(net, record, candidate)?;
    Ok(ReplayReport::build(net, record, &result, candidate))
}

/// Run the replay and hand back the raw simulation, for callers that need
/// more than the verdict table (e.g. dequeue-trace comparison).
pub fn replay_sim(
    net: &Network,
    record: &ScheduleRecord,
    candidate: Candidate,
) -> Result<SimResult, ReplayError> {
    let mut flows = Vec::with_capacity(record.packets.len());
    for (i, rp) in record.packets.iter().enumerate() {
        let header = init_header(net, record, rp, candidate)?;
        let bytes = rp.size_bits / 8;
        flows.push(FlowSpec {
            id: FlowId(i as u32),
            name: format!("p{i}"),
            src: rp.path[0],
            dst: *rp.path.last().unwrap(),
            path: Some(rp.path.clone()),
            start: rp.injected,
            size_bytes: Some(bytes),
            mss_bytes: bytes as u32,
            kind: TransportKind::OpenLoop { rate_bps: None },
            planned: Some(vec![PlannedPacket {
                at: rp.injected,
                size_bytes: bytes as u32,
                header: Some(header),
                flow_offset: 0,
                remaining_bytes: bytes,
            }]),
            weight: 1,
        });
    }
    let cfg = SimConfig::new(candidate.kind(), 0);
    Ok(Sim::new(net.clone(), flows, cfg).run())
}

#[derive(Clone, Debug, Serialize)]
pub struct PacketVerdict {
    pub pkt: u64,
    pub flow: u32,
    pub recorded_exit: SimTime,
    pub replayed_exit: SimTime,
    /// replayed - recorded; negative means early.
    pub lateness_ns: i64,
    /// One MTU transmission on the slowest finite link of this path.
    pub threshold_ns: u64,
    pub overdue: bool,
    pub overdue_gt_t: bool,
    pub q_recorded_ns: u64,
    pub q_replayed_ns: u64,
    pub q_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplayReport {
    pub candidate: String,
    pub packets: Vec<PacketVerdict>,
    pub frac_overdue: f64,
    pub frac_overdue_gt_t: f64,
    pub median_q_ratio: f64,
    pub max_lateness_ns: i64,
}

/// replayed/recorded queueing with the 0-queue conventions from the module
/// doc: 0/0 is a clean 1.0, q/0 is infinite.
fn q_ratio(replayed: u64, recorded: u64) -> f64 {
    match (replayed, recorded) {
        (0, 0) => 1.0,
        (_, 0) => f64::INFINITY,
        (a, b) => a as f64 / b as f64,
    }
}

impl ReplayReport {
    pub fn build(
        net: &Network,
        record: &ScheduleRecord,
        replayed: &SimResult,
        candidate: Candidate,
    ) -> ReplayReport {
        let threshold = bottleneck_tx(net, record);
        let mut packets = Vec::with_capacity(record.packets.len());
        for (i, rp) in record.packets.iter().enumerate() {
            let tr = &replayed.packets[i];
            debug_assert_eq!(tr.path[..], rp.path[..]);
            let new_exit = tr.exit.expect("replay runs to completion");
            let lateness = new_exit.as_i64() - rp.exit.as_i64();
            let q_rec = rp.queueing(net);
            let q_rep = (new_exit - rp.injected - net.t_min_full(&rp.path, rp.size_bits)).as_nanos();
            packets.push(PacketVerdict {
                pkt: rp.pkt.0,
                flow: rp.flow.0,
                recorded_exit: rp.exit,
                replayed_exit: new_exit,
                lateness_ns: lateness,
                threshold_ns: threshold,
                overdue: lateness > 0,
                overdue_gt_t: lateness > threshold as i64,
                q_recorded_ns: q_rec,
                q_replayed_ns: q_rep,
                q_ratio: q_ratio(q_rep, q_rec),
            });
        }
        let n = packets.len().max(1) as f64;
        let frac_overdue = packets.iter().filter(|p| p.overdue).count() as f64 / n;
        let frac_overdue_gt_t = packets.iter().filter(|p| p.overdue_gt_t).count() as f64 / n;
        let mut ratios: Vec<f64> = packets.iter().map(|p| p.q_ratio).collect();
        ratios.sort_by(|a, b| a.partial_cmp(b).expect("ratios are never NaN"));
        let median_q_ratio = if ratios.is_empty() {
            1.0
        } else {
            ratios[(ratios.len() - 1) / 2]
        };
        let max_lateness_ns = packets.iter().map(|p| p.lateness_ns).max().unwrap_or(0);
        ReplayReport {
            candidate: candidate.name().to_string(),
            packets,
            frac_overdue,
            frac_overdue_gt_t,
            median_q_ratio,
            max_lateness_ns,
        }
    }

    /// No packet exits later than it originally did.
    pub fn perfect(&self) -> bool {
        self.frac_overdue == 0.0
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "pkt,flow,recorded_exit_ns,replayed_exit_ns,lateness_ns,threshold_ns,\
             overdue,overdue_gt_t,q_recorded_ns,q_replayed_ns,q_ratio\n",
        );
        for p in &self.packets {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                p.pkt,
                p.flow,
                p.recorded_exit,
                p.replayed_exit,
                p.lateness_ns,
                p.threshold_ns,
                p.overdue,
                p.overdue_gt_t,
                p.q_recorded_ns,
                p.q_replayed_ns,
                p.q_ratio
            )
            .unwrap();
        }
        out
    }

    /// One JSON object per packet, then one summary object.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for p in &self.packets {
            out.push_str(&serde_json::to_string(p).unwrap());
            out.push('\n');
        }
        #[derive(Serialize)]
        struct Summary<'a> {
            summary: bool,
            candidate: &'a str,
            packets: usize,
            frac_overdue: f64,
            frac_overdue_gt_t: f64,
            median_q_ratio: f64,
            max_lateness_ns: i64,
        }
        out.push_str(
            &serde_json::to_string(&Summary {
                summary: true,
                candidate: &self.candidate,
                packets: self.packets.len(),
                frac_overdue: self.frac_overdue,
                frac_overdue_gt_t: self.frac_overdue_gt_t,
                median_q_ratio: self.median_q_ratio,
                max_lateness_ns: self.max_lateness_ns,
            })
            .unwrap(),
        );
        out.push('\n');
        out
    }
}

/// One MTU transmission time on the slowest finite link any recorded packet
/// traverses; zero when every traversed link is infinite. This is the shared
/// "one transmission time on the bottleneck" lateness threshold.
fn bottleneck_tx(net: &Network, record: &ScheduleRecord) -> u64 {
    let mut slowest: Option<u64> = None;
    for rp in &record.packets {
        for w in rp.path.windows(2) {
            let link = net.find_link(w[0], w[1]).expect("recorded path uses real links");
            if let crate::net::Bandwidth::Bps(bps) = net.link(link).bandwidth {
                slowest = Some(slowest.map_or(bps, |s| s.min(bps)));
            }
        }
    }
    match slowest {
        Some(bps) => crate::net::Bandwidth::Bps(bps).tx_time(record.mtu_bits()).as_nanos(),
        None => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Bandwidth;

    fn chain(n: usize, bw: Bandwidth, prop_ns: u64) -> Network {
        let mut net = Network::new();
        let ids: Vec<NodeId> = (0..n).map(|i| net.add_node(format!("n{i}"))).collect();
        for w in ids.windows(2) {
            net.add_link(w[0], w[1], bw, SimTime(prop_ns));
        }
        net
    }

    fn burst_flow(id: u32, src: NodeId, dst: NodeId, times: &[u64]) -> FlowSpec {
        let mut f = FlowSpec::open_loop(id, format!("f{id}"), src, dst);
        f.planned = Some(
            times
                .iter()
                .map(|&t| PlannedPacket {
                    at: SimTime(t),
                    size_bytes: 1_500,
                    header: None,
                    flow_offset: 0,
                    remaining_bytes: 1_500,
                })
                .collect(),
        );
        f.start = SimTime(times[0]);
        f
    }

    fn single_bottleneck_record() -> (Network, ScheduleRecord) {
        let net = chain(3, Bandwidth::gbps(1), 1_000);
        let flows = vec![burst_flow(0, NodeId(0), NodeId(2), &[0, 1, 2])];
        let res = Sim::new(net.clone(), flows, SimConfig::new(SchedulerKind::Fifo, 1)).run();
        let rec = ScheduleRecord::from_result(&res).unwrap();
        (net, rec)
    }

    #[test]
    fn record_captures_waits_and_exits() {
        let (net, rec) = single_bottleneck_record();
        assert_eq!(rec.packets.len(), 3);
        // All queueing happens at the first node; the second is paced.
        assert_eq!(rec.congestion_counts(), BTreeMap::from([(NodeId(0), 2)]));
        assert_eq!(rec.packets[0].exit, SimTime(26_000));
        assert_eq!(rec.packets[2].exit, SimTime(50_000));
        assert_eq!(rec.packets[2].queueing(&net), 24_000 - 2);
    }

    #[test]
    fn text_round_trip_is_lossless() {
        let (_, rec) = single_bottleneck_record();
        let text = rec.to_text();
        let back = ScheduleRecord::parse_text(&text).unwrap();
        assert_eq!(rec, back);
        assert!(ScheduleRecord::parse_text("not a record").is_err());
        assert!(ScheduleRecord::parse_text("schedule-record v1\nX 1 2").is_err());
    }

    #[test]
    fn every_candidate_replays_a_single_bottleneck_fcfs_record() {
        let (net, rec) = single_bottleneck_record();
        for c in Candidate::ALL {
            let report = replay(&net, &rec, c).unwrap();
            assert!(
                report.perfect(),
                "{} late by {} ns",
                c.name(),
                report.max_lateness_ns
            );
            assert_eq!(report.median_q_ratio, 1.0, "{}", c.name());
        }
    }

    #[test]
    fn omniscient_is_exact_not_just_on_time() {
        let (net, rec) = single_bottleneck_record();
        let report = replay(&net, &rec, Candidate::Omniscient).unwrap();
        for p in &report.packets {
            assert_eq!(p.lateness_ns, 0);
            assert_eq!(p.q_ratio, 1.0);
        }
    }

    #[test]
    fn two_congestion_points_defeat_single_cp_priorities() {
        // f0 queues at n0 (self-burst) and again at m where f1 merges in.
        let mut net = chain(3, Bandwidth::gbps(1), 0);
        let c = net.add_node("c");
        net.add_link(c, NodeId(1), Bandwidth::Infinite, SimTime::ZERO);
        let mut f1 = burst_flow(1, c, NodeId(2), &[11_999, 12_000]);
        f1.path = Some(vec![c, NodeId(1), NodeId(2)]);
        let flows = vec![burst_flow(0, NodeId(0), NodeId(2), &[0, 1]), f1];
        let res = Sim::new(net.clone(), flows, SimConfig::new(SchedulerKind::Fifo, 1)).run();
        let rec = ScheduleRecord::from_result(&res).unwrap();
        // f0's second packet waits at n0 and behind f1's burst at n1.
        let twice_congested = &rec.packets[1];
        assert_eq!(twice_congested.congestion_points().len(), 2);
        let err = replay(&net, &rec, Candidate::PrioritySingleCp).unwrap_err();
        assert!(matches!(err, ReplayError::MultipleCongestionPoints(_, 2)));
        // LSTF does not care how many congestion points there are here.
        assert!(replay(&net, &rec, Candidate::Lstf).unwrap().perfect());
    }

    #[test]
    fn q_ratio_conventions() {
        assert_eq!(q_ratio(0, 0), 1.0);
        assert_eq!(q_ratio(5, 0), f64::INFINITY);
        assert_eq!(q_ratio(0, 5), 0.0);
        assert_eq!(q_ratio(30, 20), 1.5);
    }

    #[test]
    fn infeasible_exit_is_rejected() {
        let (net, mut rec) = single_bottleneck_record();
        rec.packets[0].exit = SimTime(100); // below t_min
        let err = init_header(&net, &rec, &rec.packets[0], Candidate::Lstf).unwrap_err();
        assert!(matches!(err, ReplayError::InfeasibleExit(_, _)));
    }

    #[test]
    fn drops_and_unfinished_runs_are_not_recordable() {
        let mut net = chain(2, Bandwidth::gbps(1), 0);
        net.links[0].buffer_limit = Some(1_500);
        let flows = vec![burst_flow(0, NodeId(0), NodeId(1), &[0, 1, 2, 3])];
        let mut cfg = SimConfig::new(SchedulerKind::Fifo, 1);
        cfg.use_buffer_limits = true;
        let res = Sim::new(net, flows, cfg).run();
        assert!(matches!(
            ScheduleRecord::from_result(&res),
            Err(RecordError::DroppedPacket(_))
        ));
    }
}
