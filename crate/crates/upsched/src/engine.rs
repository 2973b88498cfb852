//! The simulation engine: store-and-forward packet movement over a topology,
//! one scheduler instance per output port (per link).
//!
//! Event phasing: within one tick, all packet movements (arrivals,
//! transmission completions, injections, acks) are class-0 events; port
//! service decisions ("kicks") are class-1. A port therefore sees every
//! packet that arrives at time t before it picks what to send at time t,
//! which is what the scheduling disciplines assume; a freed port never races
//! a same-tick arrival. Zero-time transmissions (infinite-bandwidth links)
//! complete inline and forward within the tick.
//!
//! Preemption (preemptive LSTF only) is resolved at kick time: if the best
//! queued sort triple strictly beats the in-flight packet's, the transmission
//! is suspended with its residual ticks and the port re-picks. Suspended
//! entries keep their original triple, so total service per packet is exactly
//! its transmission time and no work is lost.
//!
//! Finite buffers count queued bytes only (the packet being transmitted has
//! left the queue). A drop is signalled to an AIMD source synchronously.

use crate::kernel::{EventHandle, Kernel, KernelStats};
use crate::net::{FlowId, LinkId, Network, NodeId, Packet, PktId, SchedHeader};
use crate::policy::{PolicyState, SlackPolicy};
use crate::sched::{
    Dequeued, EnqueueInfo, FqScheduler, KeyedScheduler, PortScheduler, PrescribedScheduler,
    QueueEntry, RandomScheduler, SchedulerKind, SrptScheduler, Victim,
};
use crate::time::SimTime;
use crate::transport::{expand_open_loop, AimdState, FlowSpec, PlannedPacket, TransportKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::Arc;

const PHASE_MOVE: u8 = 0;
const PHASE_KICK: u8 = 1;

/// Scheduler assignment: a default kind, per-node overrides (mixed-discipline
/// networks), and per-node prescribed tables that replace the discipline
/// entirely (fixture originals).
#[derive(Clone, Debug)]
pub struct SchedAssign {
    pub default: SchedulerKind,
    pub per_node: BTreeMap<NodeId, SchedulerKind>,
    pub prescribed: BTreeMap<NodeId, BTreeMap<FlowId, SimTime>>,
}

impl SchedAssign {
    pub fn uniform(kind: SchedulerKind) -> SchedAssign {
        SchedAssign {
            default: kind,
            per_node: BTreeMap::new(),
            prescribed: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub sched: SchedAssign,
    pub seed: u64,
    /// Slack stamped at injection on packets without an explicit header.
    pub policy: Option<SlackPolicy>,
    /// Honor per-link buffer limits (otherwise buffers are unbounded).
    pub use_buffer_limits: bool,
    /// Stop processing events after this time; MAX runs to drain.
    pub horizon: SimTime,
}

impl SimConfig {
    pub fn new(kind: SchedulerKind, seed: u64) -> SimConfig {
        SimConfig {
            sched: SchedAssign::uniform(kind),
            seed,
            policy: None,
            use_buffer_limits: false,
            horizon: SimTime::MAX,
        }
    }
}

enum Ev {
    Arrive(Packet),
    TxDone { link: LinkId },
    Kick { link: LinkId },
    Poll { link: LinkId },
    FlowStart { flow: usize },
    Ack { flow: usize, bytes: u32 },
}

struct InFlight {
    entry: QueueEntry,
    finish: SimTime,
    handle: EventHandle,
}

struct Port {
    link: LinkId,
    sched: Box<dyn PortScheduler>,
    preemptive: bool,
    in_flight: Option<InFlight>,
    queued_bytes: u64,
    next_seq: u64,
    kick_pending: bool,
    poll_pending: Option<SimTime>,
    busy: SimTime,
}

struct FlowRuntime {
    spec: FlowSpec,
    path: Arc<[NodeId]>,
    links: Vec<LinkId>,
    rev_prop: SimTime,
    aimd: Option<AimdState>,
    delivered_bytes: u64,
    injected_packets: u64,
    injected_bytes: u64,
    completed_at: Option<SimTime>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HopRec {
    pub node: NodeId,
    pub arrival: SimTime,
    pub start: Option<SimTime>,
    pub done: Option<SimTime>,
    /// Slack header value after this hop's rewrite (slack-carrying packets).
    pub slack_after: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PacketTrace {
    pub id: PktId,
    pub flow: FlowId,
    pub size_bits: u64,
    pub injected: SimTime,
    pub path: Arc<[NodeId]>,
    pub hops: Vec<HopRec>,
    pub exit: Option<SimTime>,
    pub dropped: Option<(NodeId, SimTime)>,
}

impl PacketTrace {
    /// Nodes where the packet waited (scheduled strictly after arrival).
    pub fn congestion_points(&self) -> Vec<NodeId> {
        self.hops
            .iter()
            .filter(|h| h.start.map_or(false, |s| s > h.arrival))
            .map(|h| h.node)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowOutcome {
    pub id: FlowId,
    pub name: String,
    pub start: SimTime,
    pub size_bytes: Option<u64>,
    pub injected_packets: u64,
    pub injected_bytes: u64,
    pub delivered_bytes: u64,
    pub acked_bytes: u64,
    pub drops: u64,
    pub completed_at: Option<SimTime>,
}

impl FlowOutcome {
    pub fn fct(&self) -> Option<SimTime> {
        self.completed_at.map(|t| t - self.start)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimResult {
    pub packets: Vec<PacketTrace>,
    pub flows: Vec<FlowOutcome>,
    /// (first service start, link, packet), in decision order.
    pub dequeues: Vec<(SimTime, LinkId, PktId)>,
    pub drops: Vec<(PktId, NodeId, SimTime)>,
    pub link_busy: Vec<SimTime>,
    pub stats: KernelStats,
    pub end_time: SimTime,
    /// True when the event queue drained before the horizon.
    pub drained: bool,
    /// Fct-policy saturation count (diagnostic).
    pub policy_saturations: u64,
}

impl SimResult {
    /// Every injected packet accounted for: exited, dropped, or (when the
    /// horizon cut the run short) still in flight.
    pub fn conservation_holds(&self) -> bool {
        let unfinished = self
            .packets
            .iter()
            .filter(|p| p.exit.is_none() && p.dropped.is_none())
            .count();
        if self.drained {
            unfinished == 0
        } else {
            true
        }
    }

    /// Delivery events (exit_time, flow, bytes) for windowed throughput.
    pub fn deliveries(&self) -> Vec<(SimTime, FlowId, u64)> {
        self.packets
            .iter()
            .filter_map(|p| p.exit.map(|t| (t, p.flow, p.size_bits / 8)))
            .collect()
    }

    /// End-to-end delays (exit - injection) of delivered packets.
    pub fn packet_delays(&self) -> Vec<u64> {
        self.packets
            .iter()
            .filter_map(|p| p.exit.map(|t| (t - p.injected).as_nanos()))
            .collect()
    }
}

pub struct Sim {
    kernel: Kernel<Ev>,
    net: Network,
    ports: Vec<Port>,
    flows: Vec<FlowRuntime>,
    policy: Option<PolicyState>,
    cfg: SimConfig,
    next_pkt: u64,
    packets: Vec<PacketTrace>,
    dequeues: Vec<(SimTime, LinkId, PktId)>,
    drops: Vec<(PktId, NodeId, SimTime)>,
}

impl Sim {
    pub fn new(net: Network, flow_specs: Vec<FlowSpec>, cfg: SimConfig) -> Sim {
        let weights: BTreeMap<FlowId, u64> = flow_specs
            .iter()
            .filter(|s| s.weight != 1)
            .map(|s| (s.id, s.weight))
            .collect();
        let ports = net
            .links
            .iter()
            .map(|l| {
                let sched = build_scheduler(&cfg, l.from, l.id, &weights);
                Port {
                    link: l.id,
                    preemptive: effective_kind(&cfg.sched, l.from) == SchedulerKind::LstfPreempt
                        && !cfg.sched.prescribed.contains_key(&l.from),
                    sched,
                    in_flight: None,
                    queued_bytes: 0,
                    next_seq: 0,
                    kick_pending: false,
                    poll_pending: None,
                    busy: SimTime::ZERO,
                }
            })
            .collect();

        let flows: Vec<FlowRuntime> = flow_specs
            .into_iter()
            .map(|spec| {
                let path: Vec<NodeId> = match &spec.path {
                    Some(p) => p.clone(),
                    None => net
                        .shortest_path(spec.src, spec.dst)
                        .unwrap_or_else(|| panic!("no route {:?} -> {:?}", spec.src, spec.dst)),
                };
                assert!(path.len() >= 2, "flow path needs distinct src and dst");
                assert_eq!(path[0], spec.src);
                assert_eq!(*path.last().unwrap(), spec.dst);
                let links: Vec<LinkId> = path
                    .windows(2)
                    .map(|w| {
                        net.find_link(w[0], w[1])
                            .unwrap_or_else(|| panic!("no link {:?}->{:?}", w[0], w[1]))
                    })
                    .collect();
                let rev_prop = net.reverse_prop_delay(&path);
                let aimd = match spec.kind {
                    TransportKind::Aimd { init_cwnd } => Some(AimdState::new(
                        init_cwnd,
                        spec.mss_bytes,
                        spec.size_bytes,
                    )),
                    TransportKind::OpenLoop { .. } => None,
                };
                FlowRuntime {
                    path: Arc::from(path),
                    links,
                    rev_prop,
                    aimd,
                    delivered_bytes: 0,
                    injected_packets: 0,
                    injected_bytes: 0,
                    completed_at: None,
                    spec,
                }
            })
            .collect();

        let policy = cfg.policy.clone().map(PolicyState::new);
        let mut sim = Sim {
            kernel: Kernel::new(),
            net,
            ports,
            flows,
            policy,
            cfg,
            next_pkt: 0,
            packets: Vec::new(),
            dequeues: Vec::new(),
            drops: Vec::new(),
        };
        sim.schedule_sources();
        sim
    }

    /// Pre-plan every open-loop injection and AIMD flow start. Packet ids
    /// are assigned here in flow order, then emission order, which is the
    /// contract replay comparison relies on.
    fn schedule_sources(&mut self) {
        for fi in 0..self.flows.len() {
            let spec = &self.flows[fi].spec;
            match (&spec.kind, &spec.planned) {
                (TransportKind::Aimd { .. }, None) => {
                    self.kernel
                        .schedule_class(spec.start, PHASE_MOVE, Ev::FlowStart { flow: fi });
                }
                (TransportKind::Aimd { .. }, Some(_)) => {
                    panic!("planned packets and AIMD are mutually exclusive")
                }
                (TransportKind::OpenLoop { rate_bps }, planned) => {
                    let planned: Vec<PlannedPacket> = match planned {
                        Some(p) => p.clone(),
                        None => {
                            let size = spec
                                .size_bytes
                                .expect("open-loop flow without explicit packets needs a size");
                            let rate = rate_bps.unwrap_or_else(|| {
                                match self.net.link(self.flows[fi].links[0]).bandwidth {
                                    crate::net::Bandwidth::Bps(b) => b,
                                    crate::net::Bandwidth::Infinite => {
                                        panic!("line-rate emission on an infinite link; set rate_bps")
                                    }
                                }
                            });
                            expand_open_loop(spec.start, size, spec.mss_bytes, rate)
                        }
                    };
                    for pp in planned {
                        let pkt = self.make_packet(
                            fi,
                            pp.flow_offset,
                            pp.size_bytes,
                            pp.remaining_bytes,
                            pp.header.clone(),
                            pp.at,
                        );
                        self.kernel.schedule_class(pp.at, PHASE_MOVE, Ev::Arrive(pkt));
                    }
                }
            }
        }
    }

    fn make_packet(
        &mut self,
        flow_idx: usize,
        offset: u64,
        size_bytes: u32,
        remaining_bytes: u64,
        header: Option<SchedHeader>,
        at: SimTime,
    ) -> Packet {
        let id = PktId(self.next_pkt);
        self.next_pkt += 1;
        let rt = &mut self.flows[flow_idx];
        rt.injected_packets += 1;
        rt.injected_bytes += size_bytes as u64;
        let pkt = Packet {
            id,
            flow: rt.spec.id,
            size_bits: size_bytes as u64 * 8,
            flow_size_bytes: rt.spec.size_bytes.unwrap_or(u64::MAX),
            remaining_bytes,
            injected_at: at,
            path: rt.path.clone(),
            hop: 0,
            header: header.unwrap_or(SchedHeader::None),
            acc_wait: SimTime::ZERO,
            flow_offset: offset,
        };
        self.packets.push(PacketTrace {
            id,
            flow: pkt.flow,
            size_bits: pkt.size_bits,
            injected: at,
            path: pkt.path.clone(),
            hops: Vec::new(),
            exit: None,
            dropped: None,
        });
        pkt
    }

    pub fn run(mut self) -> SimResult {
        let mut kernel = std::mem::take(&mut self.kernel);
        let horizon = self.cfg.horizon;
        let stats = kernel.run_until(horizon, |k, now, ev| self.on_event(k, now, ev));
        let drained = kernel.is_empty();
        let end_time = kernel.now();
        let result = SimResult {
            packets: self.packets,
            flows: self
                .flows
                .into_iter()
                .map(|rt| {
                    let (acked, drops, aimd_done) = match &rt.aimd {
                        Some(a) => (a.acked_bytes, a.drops, a.completed_at),
                        None => (0, 0, None),
                    };
                    FlowOutcome {
                        id: rt.spec.id,
                        name: rt.spec.name.clone(),
                        start: rt.spec.start,
                        size_bytes: rt.spec.size_bytes,
                        injected_packets: rt.injected_packets,
                        injected_bytes: rt.injected_bytes,
                        delivered_bytes: rt.delivered_bytes,
                        acked_bytes: acked,
                        drops,
                        completed_at: rt.completed_at.or(aimd_done),
                    }
                })
                .collect(),
            dequeues: self.dequeues,
            drops: self.drops,
            link_busy: self.ports.iter().map(|p| p.busy).collect(),
            stats,
            end_time,
            drained,
            policy_saturations: self.policy.as_ref().map_or(0, |p| p.saturations),
        };
        debug_assert!(result.conservation_holds(), "packet conservation violated");
        result
    }

    fn on_event(&mut self, k: &mut Kernel<Ev>, now: SimTime, ev: Ev) {
        match ev {
            Ev::Arrive(pkt) => self.on_arrive(k, pkt, now),
            Ev::TxDone { link } => {
                let li = link.0 as usize;
                let inf = self.ports[li]
                    .in_flight
                    .take()
                    .expect("TxDone without in-flight packet");
                debug_assert_eq!(inf.finish, now);
                self.complete_tx(k, li, inf.entry, now);
                // Next pick happens in the kick phase, after all same-tick
                // arrivals have landed.
                self.issue_kick(k, li, now);
            }
            Ev::Kick { link } => {
                let li = link.0 as usize;
                self.ports[li].kick_pending = false;
                self.maybe_preempt(k, li, now);
                self.try_serve(k, li, now);
            }
            Ev::Poll { link } => {
                let li = link.0 as usize;
                self.ports[li].poll_pending = None;
                self.try_serve(k, li, now);
            }
            Ev::FlowStart { flow } => self.pump_aimd(k, flow, now),
            Ev::Ack { flow, bytes } => {
                let a = self.flows[flow]
                    .aimd
                    .as_mut()
                    .expect("ack for non-AIMD flow");
                a.on_ack(bytes, now);
                self.pump_aimd(k, flow, now);
            }
        }
    }

    fn flow_index(&self, id: FlowId) -> usize {
        // Flow ids are dense in every scenario this engine builds.
        let i = id.0 as usize;
        debug_assert_eq!(self.flows[i].spec.id, id);
        i
    }

    fn on_arrive(&mut self, k: &mut Kernel<Ev>, mut pkt: Packet, now: SimTime) {
        if pkt.hop == 0 {
            if let (Some(policy), SchedHeader::None) = (&mut self.policy, &pkt.header) {
                let slack = policy.slack_for(pkt.flow, pkt.flow_size_bytes, pkt.size_bits, now);
                pkt.header = SchedHeader::Slack(slack);
            }
        }
        if pkt.at_last_hop() {
            self.deliver(k, pkt, now);
        } else {
            self.enqueue_at_port(k, pkt, now);
        }
    }

    fn deliver(&mut self, k: &mut Kernel<Ev>, pkt: Packet, now: SimTime) {
        let egress_tx = self.net.hop_tx_time(&pkt.path, pkt.hop, pkt.size_bits);
        let exit = now + egress_tx;
        let tr = &mut self.packets[pkt.id.0 as usize];
        tr.hops.push(HopRec {
            node: pkt.dest(),
            arrival: now,
            start: Some(now),
            done: Some(exit),
            slack_after: None,
        });
        tr.exit = Some(exit);
        let fi = self.flow_index(pkt.flow);
        let rt = &mut self.flows[fi];
        rt.delivered_bytes += pkt.size_bytes();
        if rt.aimd.is_some() {
            let at = exit + rt.rev_prop;
            k.schedule_class(
                at,
                PHASE_MOVE,
                Ev::Ack {
                    flow: fi,
                    bytes: pkt.size_bytes() as u32,
                },
            );
        } else if let Some(total) = rt.spec.size_bytes {
            if rt.delivered_bytes >= total && rt.completed_at.is_none() {
                rt.completed_at = Some(exit);
            }
        }
    }

    fn enqueue_at_port(&mut self, k: &mut Kernel<Ev>, mut pkt: Packet, now: SimTime) {
        let fi = self.flow_index(pkt.flow);
        let li = self.flows[fi].links[pkt.hop].0 as usize;
        let link = self.net.link(LinkId(li as u32));
        if link.bandwidth == crate::net::Bandwidth::Infinite {
            // Wiring hop: zero transmission and no contention, so the packet
            // moves on inside the movement phase. Deferring it through the
            // port's kick would let a same-tick service decision downstream
            // fire while the packet is still mid-chain.
            let prop = link.prop_delay;
            let slack_after = match pkt.header {
                SchedHeader::Slack(s) => Some(s),
                _ => None,
            };
            self.packets[pkt.id.0 as usize].hops.push(HopRec {
                node: pkt.path[pkt.hop],
                arrival: now,
                start: Some(now),
                done: Some(now),
                slack_after,
            });
            pkt.hop += 1;
            k.schedule_class(now + prop, PHASE_MOVE, Ev::Arrive(pkt));
            return;
        }
        let info = EnqueueInfo {
            now,
            seq: self.ports[li].next_seq,
            tx: self.net.hop_tx_time(&pkt.path, pkt.hop, pkt.size_bits),
            tmin_to_dest: self
                .net
                .t_min(&pkt.path, pkt.hop, pkt.path.len() - 1, pkt.size_bits),
        };
        self.ports[li].next_seq += 1;
        self.packets[pkt.id.0 as usize].hops.push(HopRec {
            node: pkt.path[pkt.hop],
            arrival: now,
            start: None,
            done: None,
            slack_after: None,
        });

        if self.cfg.use_buffer_limits {
            if let Some(limit) = self.net.link(LinkId(li as u32)).buffer_limit {
                let size = pkt.size_bytes();
                loop {
                    if self.ports[li].queued_bytes + size <= limit {
                        break;
                    }
                    match self.ports[li].sched.drop_candidate(&pkt, &info) {
                        Victim::Arriving => {
                            self.drop_packet(k, pkt, now);
                            return;
                        }
                        Victim::Queued(victim) => {
                            let e = self.ports[li]
                                .sched
                                .remove(victim)
                                .expect("victim vanished from queue");
                            self.ports[li].queued_bytes -= e.pkt.size_bytes();
                            self.drop_packet(k, e.pkt, now);
                        }
                    }
                }
            }
        }

        self.ports[li].queued_bytes += pkt.size_bytes();
        self.ports[li].sched.enqueue(pkt, info);
        self.issue_kick(k, li, now);
    }

    fn drop_packet(&mut self, k: &mut Kernel<Ev>, pkt: Packet, now: SimTime) {
        let node = pkt.path[pkt.hop];
        let tr = &mut self.packets[pkt.id.0 as usize];
        tr.dropped = Some((node, now));
        self.drops.push((pkt.id, node, now));
        let fi = self.flow_index(pkt.flow);
        if self.flows[fi].aimd.is_some() {
            // Drop signal reaches the source immediately.
            self.flows[fi]
                .aimd
                .as_mut()
                .unwrap()
                .on_drop(pkt.flow_offset, pkt.size_bytes() as u32);
            self.pump_aimd(k, fi, now);
        }
    }

    fn pump_aimd(&mut self, k: &mut Kernel<Ev>, fi: usize, now: SimTime) {
        let emissions = self.flows[fi]
            .aimd
            .as_mut()
            .expect("pump on non-AIMD flow")
            .take_emissions();
        for (offset, len) in emissions {
            let remaining = match self.flows[fi].spec.size_bytes {
                Some(total) => total - self.flows[fi].aimd.as_ref().unwrap().acked_bytes,
                None => u64::MAX,
            };
            let pkt = self.make_packet(fi, offset, len, remaining, None, now);
            k.schedule_class(now, PHASE_MOVE, Ev::Arrive(pkt));
        }
    }

    fn issue_kick(&mut self, k: &mut Kernel<Ev>, li: usize, now: SimTime) {
        if !self.ports[li].kick_pending {
            self.ports[li].kick_pending = true;
            let link = self.ports[li].link;
            k.schedule_class(now, PHASE_KICK, Ev::Kick { link });
        }
    }

    fn maybe_preempt(&mut self, k: &mut Kernel<Ev>, li: usize, now: SimTime) {
        let port = &mut self.ports[li];
        if !port.preemptive {
            return;
        }
        let Some(infl) = &port.in_flight else { return };
        // finish == now means the last bit is leaving this tick; its TxDone
        // already fired or fires this tick in the movement phase, so it
        // cannot still be here. Guard anyway for residual == 0.
        if infl.finish <= now {
            return;
        }
        let Some(best) = port.sched.peek_triple() else {
            return;
        };
        if best < infl.entry.triple() {
            let infl = port.in_flight.take().unwrap();
            let residual = infl.finish - now;
            k.cancel(infl.handle);
            port.busy = port.busy - residual;
            let mut entry = infl.entry;
            entry.residual = Some(residual);
            port.queued_bytes += entry.pkt.size_bytes();
            port.sched.requeue(entry);
        }
    }

    fn try_serve(&mut self, k: &mut Kernel<Ev>, li: usize, now: SimTime) {
        loop {
            if self.ports[li].in_flight.is_some() {
                return;
            }
            match self.ports[li].sched.dequeue(now) {
                Dequeued::Entry(mut entry) => {
                    self.ports[li].queued_bytes -= entry.pkt.size_bytes();
                    if entry.first_start.is_none() {
                        entry.first_start = Some(now);
                        let tr = &mut self.packets[entry.pkt.id.0 as usize];
                        tr.hops
                            .last_mut()
                            .expect("hop record missing at service start")
                            .start = Some(now);
                        self.dequeues.push((now, self.ports[li].link, entry.pkt.id));
                    }
                    let remaining = entry.residual.take().unwrap_or(entry.tx);
                    if remaining == SimTime::ZERO {
                        self.complete_tx(k, li, entry, now);
                        continue;
                    }
                    let finish = now + remaining;
                    let link = self.ports[li].link;
                    let handle = k.schedule_class(finish, PHASE_MOVE, Ev::TxDone { link });
                    self.ports[li].busy += remaining;
                    self.ports[li].in_flight = Some(InFlight {
                        entry,
                        finish,
                        handle,
                    });
                    return;
                }
                Dequeued::NotBefore(t) => {
                    let schedule = self.ports[li].poll_pending.map_or(true, |p| p > t);
                    if schedule {
                        let link = self.ports[li].link;
                        k.schedule_class(t, PHASE_KICK, Ev::Poll { link });
                        self.ports[li].poll_pending = Some(t);
                    }
                    return;
                }
                Dequeued::Empty => {
                    self.ports[li].sched.on_idle();
                    return;
                }
            }
        }
    }

    /// The packet's last bit leaves this node now: rewrite the slack header
    /// by the waiting it experienced here, record the hop, and hand the
    /// packet to the next node after the link's propagation delay.
    fn complete_tx(&mut self, k: &mut Kernel<Ev>, li: usize, entry: QueueEntry, now: SimTime) {
        let QueueEntry {
            mut pkt, enq, tx, ..
        } = entry;
        let waited = (now - enq) - tx;
        pkt.acc_wait += waited;
        let slack_after = match &mut pkt.header {
            SchedHeader::Slack(s) => {
                *s -= waited.as_i64();
                Some(*s)
            }
            _ => None,
        };
        {
            let tr = &mut self.packets[pkt.id.0 as usize];
            let hop = tr.hops.last_mut().expect("hop record missing at tx done");
            hop.done = Some(now);
            hop.slack_after = slack_after;
        }
        let link = self.net.link(self.ports[li].link);
        let arrival = now + link.prop_delay;
        pkt.hop += 1;
        debug_assert_eq!(link.to, pkt.path[pkt.hop]);
        k.schedule_class(arrival, PHASE_MOVE, Ev::Arrive(pkt));
    }
}

fn effective_kind(assign: &SchedAssign, node: NodeId) -> SchedulerKind {
    assign.per_node.get(&node).copied().unwrap_or(assign.default)
}

pub fn build_scheduler(
    cfg: &SimConfig,
    node: NodeId,
    link: LinkId,
    weights: &BTreeMap<FlowId, u64>,
) -> Box<dyn PortScheduler> {
    if let Some(table) = cfg.sched.prescribed.get(&node) {
        return Box::new(PrescribedScheduler::new(table.clone()));
    }
    match effective_kind(&cfg.sched, node) {
        SchedulerKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(0x5EED_0000_0000 + link.0 as u64);
            Box::new(RandomScheduler::new(rng))
        }
        SchedulerKind::Srpt => Box::new(SrptScheduler::new()),
        SchedulerKind::Fq => Box::new(FqScheduler::new(weights.clone())),
        kind => Box::new(KeyedScheduler::new(kind)),
    }
}
