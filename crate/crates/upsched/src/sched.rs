//! Per-output-port packet schedulers.
//!
//! Every discipline reduces to "pop the queued entry with the smallest sort
//! triple `(key, k1, k2)`", with the triple fixed at enqueue time:
//!
//! | kind       | key                                      | tie            |
//! |------------|------------------------------------------|----------------|
//! | fifo       | enqueue time                             | arrival seq    |
//! | lifo       | -enqueue time                            | -arrival seq   |
//! | random     | (uniform pick at dequeue)                |                |
//! | sjf        | flow size                                | enq, seq       |
//! | srpt       | two-stage, see below                     |                |
//! | fq         | virtual finish tag                       | enq, seq       |
//! | priority   | header priority                          | enq, seq       |
//! | omniscient | header hop_times[hop]                    | enq, seq       |
//! | lstf       | enq + slack + T(p, node)                 | enq, seq       |
//! | edf        | o(p) - t_min(p, node, dest) + T(p, node) | enq, seq       |
//! | fifo+      | enq - accumulated wait + T(p, node)      | enq, seq       |
//!
//! The LSTF key is the packet's local deadline: while queued, instantaneous
//! slack decays one-for-one with time, so `enq + slack` is constant and adding
//! `T` aligns packets of different sizes on last-bit exit. This is exactly the
//! EDF key written in terms of the slack header, which is why an EDF replay of
//! the same record produces the identical trace.
//!
//! SRPT follows the pFabric rule: find the entry with minimum remaining-bytes
//! rank, then serve the earliest-queued entry of that entry's flow, which
//! avoids starving a flow mid-packet-train.
//!
//! Schedulers other than LSTF are non-preemptive. Preemptive LSTF is realized
//! by the engine: it compares the smallest queued triple against the in-flight
//! packet's triple and suspends the transmission when strictly beaten; the
//! suspended entry keeps its triple and residual ticks.

use crate::net::{FlowId, Packet, PktId, SchedHeader};
use crate::time::SimTime;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    Fifo,
    Lifo,
    Random,
    Sjf,
    Srpt,
    Fq,
    Priority,
    Omniscient,
    Lstf,
    LstfPreempt,
    Edf,
    FifoPlus,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 12] = [
        SchedulerKind::Fifo,
        SchedulerKind::Lifo,
        SchedulerKind::Random,
        SchedulerKind::Sjf,
        SchedulerKind::Srpt,
        SchedulerKind::Fq,
        SchedulerKind::Priority,
        SchedulerKind::Omniscient,
        SchedulerKind::Lstf,
        SchedulerKind::LstfPreempt,
        SchedulerKind::Edf,
        SchedulerKind::FifoPlus,
    ];

    pub fn parse(name: &str) -> Option<SchedulerKind> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::Fifo => "fifo",
            SchedulerKind::Lifo => "lifo",
            SchedulerKind::Random => "random",
            SchedulerKind::Sjf => "sjf",
            SchedulerKind::Srpt => "srpt",
            SchedulerKind::Fq => "fq",
            SchedulerKind::Priority => "priority",
            SchedulerKind::Omniscient => "omniscient",
            SchedulerKind::Lstf => "lstf",
            SchedulerKind::LstfPreempt => "lstf_preempt",
            SchedulerKind::Edf => "edf",
            SchedulerKind::FifoPlus => "fifo_plus",
        }
    }
}

/// Facts the engine knows at enqueue time that key computations need.
#[derive(Clone, Copy, Debug)]
pub struct EnqueueInfo {
    pub now: SimTime,
    /// Per-port arrival sequence number.
    pub seq: u64,
    /// Transmission time of this packet at this node.
    pub tx: SimTime,
    /// t_min from this node to the packet's destination (inclusive rule).
    pub tmin_to_dest: SimTime,
}

#[derive(Clone, Debug)]
pub struct QueueEntry {
    pub pkt: Packet,
    pub enq: SimTime,
    pub seq: u64,
    pub tx: SimTime,
    /// Remaining service if this entry was preempted mid-transmission.
    pub residual: Option<SimTime>,
    /// First time this entry began service (preserved across preemption).
    pub first_start: Option<SimTime>,
    triple: [i128; 3],
}

impl QueueEntry {
    pub fn triple(&self) -> [i128; 3] {
        self.triple
    }
}

/// Result of asking a port scheduler for the next packet.
pub enum Dequeued {
    Entry(QueueEntry),
    Empty,
    /// Nothing eligible before this time (prescribed schedules only).
    NotBefore(SimTime),
}

/// Buffer-overflow victim selection.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Victim {
    Arriving,
    Queued(PktId),
}

pub trait PortScheduler: Send {
    fn enqueue(&mut self, pkt: Packet, info: EnqueueInfo);
    /// Re-admit a suspended entry, keys and residual preserved.
    fn requeue(&mut self, entry: QueueEntry);
    fn dequeue(&mut self, now: SimTime) -> Dequeued;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Smallest queued sort triple, if the discipline has a static order.
    fn peek_triple(&self) -> Option<[i128; 3]> {
        None
    }
    /// Who to drop when the buffer is full: tail-drop by default, the entry
    /// with the most instantaneous slack for slack-based disciplines.
    fn drop_candidate(&self, _arriving: &Packet, _info: &EnqueueInfo) -> Victim {
        Victim::Arriving
    }
    fn remove(&mut self, id: PktId) -> Option<QueueEntry>;
    /// Called when the port goes idle with an empty queue (FQ clock reset).
    fn on_idle(&mut self) {}
}

fn slack_of(pkt: &Packet) -> i64 {
    match pkt.header {
        SchedHeader::Slack(s) => s,
        ref other => panic!("scheduler requires a slack header, got {other:?}"),
    }
}

fn priority_of(pkt: &Packet) -> i64 {
    match pkt.header {
        SchedHeader::Priority(v) => v,
        ref other => panic!("scheduler requires a priority header, got {other:?}"),
    }
}

/// LSTF sort key: local deadline of the packet's last bit.
pub fn lstf_key(enq: SimTime, slack: i64, tx: SimTime) -> i128 {
    enq.as_nanos() as i128 + slack as i128 + tx.as_nanos() as i128
}

/// EDF sort key: o(p) - t_min(node, dest) + T(p, node).
pub fn edf_key(o_target: i64, tmin_to_dest: SimTime, tx: SimTime) -> i128 {
    o_target as i128 - tmin_to_dest.as_nanos() as i128 + tx.as_nanos() as i128
}

/// FIFO+ sort key: arrival adjusted down by queueing already suffered.
pub fn fifo_plus_key(enq: SimTime, acc_wait: SimTime, tx: SimTime) -> i128 {
    enq.as_nanos() as i128 - acc_wait.as_nanos() as i128 + tx.as_nanos() as i128
}

/// Shared store: linear argmin over fixed triples. Port queues at desk scale
/// stay small enough that O(n) selection is not worth a heap's complexity,
/// and removal by id / random pick / two-stage SRPT all want the flat vec.
struct TripleQueue {
    entries: Vec<QueueEntry>,
}

impl TripleQueue {
    fn new() -> Self {
        TripleQueue {
            entries: Vec::new(),
        }
    }
    fn push(&mut self, pkt: Packet, info: EnqueueInfo, triple: [i128; 3]) {
        self.entries.push(QueueEntry {
            pkt,
            enq: info.now,
            seq: info.seq,
            tx: info.tx,
            residual: None,
            first_start: None,
            triple,
        });
    }
    fn argmin(&self) -> Option<usize> {
        (0..self.entries.len()).min_by_key(|&i| self.entries[i].triple)
    }
    fn take(&mut self, i: usize) -> QueueEntry {
        self.entries.swap_remove(i)
    }
    fn min_triple(&self) -> Option<[i128; 3]> {
        self.entries.iter().map(|e| e.triple).min()
    }
    fn remove_id(&mut self, id: PktId) -> Option<QueueEntry> {
        let i = self.entries.iter().position(|e| e.pkt.id == id)?;
        Some(self.entries.swap_remove(i))
    }
}

/// Everything except random / srpt / fq / prescribed is this struct with a
/// different key function.
pub struct KeyedScheduler {
    q: TripleQueue,
    kind: SchedulerKind,
}

impl KeyedScheduler {
    pub fn new(kind: SchedulerKind) -> Self {
        KeyedScheduler {
            q: TripleQueue::new(),
            kind,
        }
    }

    fn triple_for(kind: SchedulerKind, pkt: &Packet, info: &EnqueueInfo) -> [i128; 3] {
        let enq = info.now.as_nanos() as i128;
        let seq = info.seq as i128;
        match kind {
            SchedulerKind::Fifo => [enq, seq, 0],
            SchedulerKind::Lifo => [-enq, -seq, 0],
            SchedulerKind::Sjf => [pkt.flow_size_bytes as i128, enq, seq],
            SchedulerKind::Priority => [priority_of(pkt) as i128, enq, seq],
            SchedulerKind::Omniscient => {
                let times = match &pkt.header {
                    SchedHeader::HopTimes(t) => t,
                    other => panic!("omniscient replay requires hop times, got {other:?}"),
                };
                [times[pkt.hop].as_nanos() as i128, enq, seq]
            }
            SchedulerKind::Lstf | SchedulerKind::LstfPreempt => {
                [lstf_key(info.now, slack_of(pkt), info.tx), enq, seq]
            }
            SchedulerKind::Edf => {
                [edf_key(priority_of(pkt), info.tmin_to_dest, info.tx), enq, seq]
            }
            SchedulerKind::FifoPlus => {
                [fifo_plus_key(info.now, pkt.acc_wait, info.tx), enq, seq]
            }
            SchedulerKind::Random | SchedulerKind::Srpt | SchedulerKind::Fq => {
                unreachable!("{kind:?} does not use KeyedScheduler")
            }
        }
    }
}

impl PortScheduler for KeyedScheduler {
    fn enqueue(&mut self, pkt: Packet, info: EnqueueInfo) {
        let triple = Self::triple_for(self.kind, &pkt, &info);
        self.q.push(pkt, info, triple);
    }
    fn requeue(&mut self, entry: QueueEntry) {
        self.q.entries.push(entry);
    }
    fn dequeue(&mut self, _now: SimTime) -> Dequeued {
        match self.q.argmin() {
            Some(i) => Dequeued::Entry(self.q.take(i)),
            None => Dequeued::Empty,
        }
    }
    fn len(&self) -> usize {
        self.q.entries.len()
    }
    fn peek_triple(&self) -> Option<[i128; 3]> {
        self.q.min_triple()
    }
    fn drop_candidate(&self, arriving: &Packet, info: &EnqueueInfo) -> Victim {
        match self.kind {
            SchedulerKind::Lstf | SchedulerKind::LstfPreempt => {
                // Most instantaneous slack loses its seat. The arriving packet
                // competes with header slack as-is; queued entries have
                // decayed by their waiting time. Ties drop the newest.
                let now = info.now.as_nanos() as i128;
                let arr_rank = (
                    slack_of(arriving) as i128,
                    now,
                    i128::MAX, // newest possible
                );
                let best_queued = self
                    .q
                    .entries
                    .iter()
                    .map(|e| {
                        let inst =
                            slack_of(&e.pkt) as i128 - (now - e.enq.as_nanos() as i128);
                        ((inst, e.enq.as_nanos() as i128, e.seq as i128), e.pkt.id)
                    })
                    .max();
                match best_queued {
                    Some((rank, id)) if rank > arr_rank => Victim::Queued(id),
                    _ => Victim::Arriving,
                }
            }
            _ => Victim::Arriving,
        }
    }
    fn remove(&mut self, id: PktId) -> Option<QueueEntry> {
        self.q.remove_id(id)
    }
}

/// Uniform random pick among queued packets, from a per-port seeded stream.
pub struct RandomScheduler {
    q: TripleQueue,
    rng: ChaCha8Rng,
}

impl RandomScheduler {
    pub fn new(rng: ChaCha8Rng) -> Self {
        RandomScheduler {
            q: TripleQueue::new(),
            rng,
        }
    }
}

impl PortScheduler for RandomScheduler {
    fn enqueue(&mut self, pkt: Packet, info: EnqueueInfo) {
        let triple = [info.now.as_nanos() as i128, info.seq as i128, 0];
        self.q.push(pkt, info, triple);
    }
    fn requeue(&mut self, entry: QueueEntry) {
        self.q.entries.push(entry);
    }
    fn dequeue(&mut self, _now: SimTime) -> Dequeued {
        if self.q.entries.is_empty() {
            return Dequeued::Empty;
        }
        let i = self.rng.random_range(0..self.q.entries.len());
        Dequeued::Entry(self.q.take(i))
    }
    fn len(&self) -> usize {
        self.q.entries.len()
    }
    fn remove(&mut self, id: PktId) -> Option<QueueEntry> {
        self.q.remove_id(id)
    }
}

/// pFabric-style SRPT: minimum remaining-bytes rank selects the flow, then
/// the flow's earliest-queued packet is served.
pub struct SrptScheduler {
    q: TripleQueue,
}

impl SrptScheduler {
    pub fn new() -> Self {
        SrptScheduler {
            q: TripleQueue::new(),
        }
    }
}

impl Default for SrptScheduler {
    fn default() -> Self {
        Self::new()
    }
}

impl PortScheduler for SrptScheduler {
    fn enqueue(&mut self, pkt: Packet, info: EnqueueInfo) {
        // Rank frozen at injection: remaining flow bytes from this packet on.
        let triple = [
            pkt.remaining_bytes as i128,
            info.now.as_nanos() as i128,
            info.seq as i128,
        ];
        self.q.push(pkt, info, triple);
    }
    fn requeue(&mut self, entry: QueueEntry) {
        self.q.entries.push(entry);
    }
    fn dequeue(&mut self, _now: SimTime) -> Dequeued {
        let Some(top) = self.q.argmin() else {
            return Dequeued::Empty;
        };
        let flow = self.q.entries[top].pkt.flow;
        let i = (0..self.q.entries.len())
            .filter(|&i| self.q.entries[i].pkt.flow == flow)
            .min_by_key(|&i| (self.q.entries[i].enq, self.q.entries[i].seq))
            .unwrap();
        Dequeued::Entry(self.q.take(i))
    }
    fn len(&self) -> usize {
        self.q.entries.len()
    }
    fn remove(&mut self, id: PktId) -> Option<QueueEntry> {
        self.q.remove_id(id)
    }
}

/// Start-time-fair queueing with a self-clocked virtual time: the clock reads
/// the finish tag of the packet in service and resets when the port idles.
/// Tags are integer bit-counts scaled by weight, so order is exact.
pub struct FqScheduler {
    q: TripleQueue,
    virtual_now: u128,
    last_finish: BTreeMap<FlowId, u128>,
    weights: BTreeMap<FlowId, u64>,
}

const FQ_WEIGHT_SCALE: u128 = 1 << 16;

impl FqScheduler {
    pub fn new(weights: BTreeMap<FlowId, u64>) -> Self {
        FqScheduler {
            q: TripleQueue::new(),
            virtual_now: 0,
            last_finish: BTreeMap::new(),
            weights,
        }
    }
    fn weight(&self, flow: FlowId) -> u128 {
        u128::from(*self.weights.get(&flow).unwrap_or(&1))
    }
}

impl PortScheduler for FqScheduler {
    fn enqueue(&mut self, pkt: Packet, info: EnqueueInfo) {
        let start = self
            .last_finish
            .get(&pkt.flow)
            .copied()
            .unwrap_or(0)
            .max(self.virtual_now);
        let finish = start + pkt.size_bits as u128 * FQ_WEIGHT_SCALE / self.weight(pkt.flow);
        self.last_finish.insert(pkt.flow, finish);
        let triple = [
            i128::try_from(finish).expect("virtual time overflow"),
            info.now.as_nanos() as i128,
            info.seq as i128,
        ];
        self.q.push(pkt, info, triple);
    }
    fn requeue(&mut self, entry: QueueEntry) {
        self.q.entries.push(entry);
    }
    fn dequeue(&mut self, _now: SimTime) -> Dequeued {
        match self.q.argmin() {
            Some(i) => {
                let e = self.q.take(i);
                self.virtual_now = e.triple[0] as u128;
                Dequeued::Entry(e)
            }
            None => Dequeued::Empty,
        }
    }
    fn len(&self) -> usize {
        self.q.entries.len()
    }
    fn remove(&mut self, id: PktId) -> Option<QueueEntry> {
        self.q.remove_id(id)
    }
    fn on_idle(&mut self) {
        self.virtual_now = 0;
        self.last_finish.clear();
    }
}

/// Replays a fixed per-packet schedule at one node: serve the entry with the
/// earliest prescribed time, holding the port idle (not work-conserving)
/// until that time arrives.
pub struct PrescribedScheduler {
    q: TripleQueue,
    table: BTreeMap<FlowId, SimTime>,
}

impl PrescribedScheduler {
    pub fn new(table: BTreeMap<FlowId, SimTime>) -> Self {
        PrescribedScheduler {
            q: TripleQueue::new(),
            table,
        }
    }
    fn prescribed(&self, flow: FlowId) -> SimTime {
        *self
            .table
            .get(&flow)
            .unwrap_or_else(|| panic!("no prescribed time for {flow:?}"))
    }
}

impl PortScheduler for PrescribedScheduler {
    fn enqueue(&mut self, pkt: Packet, info: EnqueueInfo) {
        let at = self.prescribed(pkt.flow);
        assert!(
            at >= info.now,
            "prescribed time {at} is before arrival {} for {:?}",
            info.now,
            pkt.flow
        );
        let triple = [
            at.as_nanos() as i128,
            info.now.as_nanos() as i128,
            info.seq as i128,
        ];
        self.q.push(pkt, info, triple);
    }
    fn requeue(&mut self, entry: QueueEntry) {
        self.q.entries.push(entry);
    }
    fn dequeue(&mut self, now: SimTime) -> Dequeued {
        match self.q.argmin() {
            Some(i) => {
                let at = SimTime(self.q.entries[i].triple[0] as u64);
                if at > now {
                    Dequeued::NotBefore(at)
                } else {
                    Dequeued::Entry(self.q.take(i))
                }
            }
            None => Dequeued::Empty,
        }
    }
    fn len(&self) -> usize {
        self.q.entries.len()
    }
    fn remove(&mut self, id: PktId) -> Option<QueueEntry> {
        self.q.remove_id(id)
    }
}
