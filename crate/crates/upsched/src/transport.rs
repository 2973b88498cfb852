//! Traffic endpoints: open-loop packet trains and a minimal AIMD sender.
//!
//! Open-loop flows are expanded to a fixed injection schedule up front, so
//! the offered load is identical no matter which scheduler runs the network.
//!
//! The AIMD sender is deliberately minimal: a fractional congestion window
//! (floor >= 1 segment), +1/cwnd per acked segment, halving on each drop
//! signal, no slow start, no timeouts. Acks ride the reverse path as
//! zero-size, propagation-only messages; drop signals reach the source the
//! instant the packet is dropped. Dropped segments are queued for
//! retransmission ahead of new data. Flow completion is when the last byte
//! has been acked.

use crate::net::{FlowId, NodeId, SchedHeader};
use crate::time::{div_round_half_up, SimTime};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TransportKind {
    OpenLoop {
        /// Emission rate; None = first-hop line rate.
        rate_bps: Option<u64>,
    },
    Aimd {
        init_cwnd: f64,
    },
}

/// One pre-planned injection (open-loop flows, fixtures, replay).
#[derive(Clone, Debug)]
pub struct PlannedPacket {
    pub at: SimTime,
    pub size_bytes: u32,
    /// Explicit header; None lets the run's slack policy stamp one.
    pub header: Option<SchedHeader>,
    pub flow_offset: u64,
    pub remaining_bytes: u64,
}

#[derive(Clone, Debug)]
pub struct FlowSpec {
    pub id: FlowId,
    pub name: String,
    pub src: NodeId,
    pub dst: NodeId,
    /// Explicit route; None = deterministic shortest path.
    pub path: Option<Vec<NodeId>>,
    pub start: SimTime,
    /// None = long-lived (never completes).
    pub size_bytes: Option<u64>,
    pub mss_bytes: u32,
    pub kind: TransportKind,
    /// Fully explicit injections; overrides open-loop expansion.
    pub planned: Option<Vec<PlannedPacket>>,
    /// Fair-queueing weight.
    pub weight: u64,
}

impl FlowSpec {
    pub fn open_loop(id: u32, name: impl Into<String>, src: NodeId, dst: NodeId) -> FlowSpec {
        FlowSpec {
            id: FlowId(id),
            name: name.into(),
            src,
            dst,
            path: None,
            start: SimTime::ZERO,
            size_bytes: None,
            mss_bytes: 1_500,
            kind: TransportKind::OpenLoop { rate_bps: None },
            planned: None,
            weight: 1,
        }
    }
}

/// Split `size` bytes into MSS segments; the tail keeps its real size.
pub fn segments(size_bytes: u64, mss: u32) -> Vec<u32> {
    assert!(mss > 0);
    let full = size_bytes / mss as u64;
    let rem = (size_bytes % mss as u64) as u32;
    let mut out = vec![mss; full as usize];
    if rem > 0 {
        out.push(rem);
    }
    out
}

/// Expand a sized open-loop flow into timed injections at `rate_bps`.
/// Emission times accumulate from total bits sent to avoid rounding drift.
pub fn expand_open_loop(
    start: SimTime,
    size_bytes: u64,
    mss: u32,
    rate_bps: u64,
) -> Vec<PlannedPacket> {
    let mut out = Vec::new();
    let mut sent_bits = 0u64;
    let mut offset = 0u64;
    for seg in segments(size_bytes, mss) {
        let dt = div_round_half_up(sent_bits as u128 * 1_000_000_000, rate_bps as u128) as u64;
        out.push(PlannedPacket {
            at: start + SimTime(dt),
            size_bytes: seg,
            header: None,
            flow_offset: offset,
            remaining_bytes: size_bytes - offset,
        });
        sent_bits += seg as u64 * 8;
        offset += seg as u64;
    }
    out
}

/// AIMD sender state. The engine calls `take_emissions` after every state
/// change and injects whatever is allowed by the window.
#[derive(Clone, Debug)]
pub struct AimdState {
    pub cwnd: f64,
    pub mss: u32,
    /// None = long-lived: unlimited data.
    pub size_bytes: Option<u64>,
    next_offset: u64,
    pub acked_bytes: u64,
    in_flight: u32,
    retransmit: VecDeque<(u64, u32)>,
    pub drops: u64,
    pub completed_at: Option<SimTime>,
}

impl AimdState {
    pub fn new(init_cwnd: f64, mss: u32, size_bytes: Option<u64>) -> AimdState {
        assert!(init_cwnd >= 1.0);
        AimdState {
            cwnd: init_cwnd,
            mss,
            size_bytes,
            next_offset: 0,
            acked_bytes: 0,
            in_flight: 0,
            retransmit: VecDeque::new(),
            drops: 0,
            completed_at: None,
        }
    }

    fn window(&self) -> u32 {
        self.cwnd.floor().max(1.0) as u32
    }

    pub fn in_flight(&self) -> u32 {
        self.in_flight
    }

    /// Segments the window permits right now: retransmissions first, then new
    /// data in MSS chunks (short tail on sized flows).
    pub fn take_emissions(&mut self) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        while self.in_flight < self.window() {
            if let Some(seg) = self.retransmit.pop_front() {
                out.push(seg);
            } else {
                let len = match self.size_bytes {
                    Some(total) => {
                        let left = total.saturating_sub(self.next_offset);
                        if left == 0 {
                            break;
                        }
                        left.min(self.mss as u64) as u32
                    }
                    None => self.mss,
                };
                out.push((self.next_offset, len));
                self.next_offset += len as u64;
            }
            self.in_flight += 1;
        }
        out
    }

    /// A segment's last byte was acked.
    pub fn on_ack(&mut self, len: u32, now: SimTime) {
        assert!(self.in_flight > 0, "ack without outstanding data");
        self.in_flight -= 1;
        self.acked_bytes += len as u64;
        self.cwnd += 1.0 / self.cwnd;
        if let Some(total) = self.size_bytes {
            if self.acked_bytes >= total && self.completed_at.is_none() {
                self.completed_at = Some(now);
            }
        }
    }

    /// A segment was dropped in the network: halve, schedule retransmission.
    pub fn on_drop(&mut self, offset: u64, len: u32) {
        assert!(self.in_flight > 0, "drop without outstanding data");
        self.in_flight -= 1;
        self.drops += 1;
        self.cwnd = (self.cwnd * 0.5).max(1.0);
        self.retransmit.push_back((offset, len));
    }
}
