//! Network model: nodes, unidirectional links, routes, packets, and the
//! timing algebra the scheduling headers are computed from.
//!
//! Store-and-forward: a node transmits a packet over one output link at a
//! time; the next hop sees the packet only when its last bit has arrived
//! (transmission time plus propagation delay after the transmission starts).
//!
//! `T(p, node)` is the transmission time of packet `p` at `node` over the
//! outgoing link its path takes. `t_min(p, a, b)` is the no-queueing latency
//! from being scheduled at hop `a` until the last bit reaches hop `b` plus
//! `b`'s own transmission time; it is additive along the path:
//! `t_min(src, dst) = t_min(src, m) + t_min(m, dst) - T(p, m)`.

use crate::time::{tx_time_ns, SimTime};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinkId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlowId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PktId(pub u64);

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}
impl fmt::Debug for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}
impl fmt::Debug for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}
impl fmt::Debug for PktId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Bandwidth {
    /// Finite rate in bits per second.
    Bps(u64),
    /// Zero transmission time regardless of packet size.
    Infinite,
}

impl Bandwidth {
    pub fn gbps(g: u64) -> Bandwidth {
        Bandwidth::Bps(g * 1_000_000_000)
    }
    pub fn tx_time(self, size_bits: u64) -> SimTime {
        match self {
            Bandwidth::Bps(bps) => tx_time_ns(size_bits, bps),
            Bandwidth::Infinite => SimTime::ZERO,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub from: NodeId,
    pub to: NodeId,
    pub bandwidth: Bandwidth,
    pub prop_delay: SimTime,
    /// Output buffer limit in bytes at `from`; None = unbounded.
    pub buffer_limit: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Network {
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    /// Outgoing link ids per node, in insertion order.
    adjacency: Vec<Vec<LinkId>>,
    /// Egress transmission: when set, exiting at the destination costs one
    /// unqueued transmission at this rate; default is zero cost.
    pub egress_bandwidth: Option<Bandwidth>,
}

impl Network {
    pub fn new() -> Network {
        Network::default()
    }

    pub fn add_node(&mut self, name: impl Into<String>) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            id,
            name: name.into(),
        });
        self.adjacency.push(Vec::new());
        id
    }

    pub fn add_link(
        &mut self,
        from: NodeId,
        to: NodeId,
        bandwidth: Bandwidth,
        prop_delay: SimTime,
    ) -> LinkId {
        let id = LinkId(self.links.len() as u32);
        self.links.push(Link {
            id,
            from,
            to,
            bandwidth,
            prop_delay,
            buffer_limit: None,
        });
        self.adjacency[from.0 as usize].push(id);
        id
    }

    /// Add a duplex pair of identical links; returns (forward, backward).
    pub fn add_duplex(
        &mut self,
        a: NodeId,
        b: NodeId,
        bandwidth: Bandwidth,
        prop_delay: SimTime,
    ) -> (LinkId, LinkId) {
        (
            self.add_link(a, b, bandwidth, prop_delay),
            self.add_link(b, a, bandwidth, prop_delay),
        )
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0 as usize]
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0 as usize]
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.name == name).map(|n| n.id)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        &self.adjacency[node.0 as usize]
    }

    pub fn find_link(&self, from: NodeId, to: NodeId) -> Option<LinkId> {
        self.adjacency[from.0 as usize]
            .iter()
            .copied()
            .find(|l| self.link(*l).to == to)
    }

    /// Hop-count shortest path, deterministic: among shortest paths, the one
    /// whose node sequence is lexicographically smallest by NodeId.
    pub fn shortest_path(&self, src: NodeId, dst: NodeId) -> Option<Vec<NodeId>> {
        use std::collections::VecDeque;
        let n = self.nodes.len();
        let mut dist_to_dst = vec![u32::MAX; n];
        // Reverse BFS from dst over link directions.
        let mut rev = vec![Vec::new(); n];
        for l in &self.links {
            rev[l.to.0 as usize].push(l.from);
        }
        let mut q = VecDeque::new();
        dist_to_dst[dst.0 as usize] = 0;
        q.push_back(dst);
        while let Some(v) = q.pop_front() {
            for &u in &rev[v.0 as usize] {
                if dist_to_dst[u.0 as usize] == u32::MAX {
                    dist_to_dst[u.0 as usize] = dist_to_dst[v.0 as usize] + 1;
                    q.push_back(u);
                }
            }
        }
        if dist_to_dst[src.0 as usize] == u32::MAX {
            return None;
        }
        let mut path = vec![src];
        let mut cur = src;
        while cur != dst {
            let d = dist_to_dst[cur.0 as usize];
            let next = self.adjacency[cur.0 as usize]
                .iter()
                .map(|l| self.link(*l).to)
                .filter(|nb| dist_to_dst[nb.0 as usize] == d - 1)
                .min()
                .expect("BFS distance field is consistent");
            path.push(next);
            cur = next;
        }
        Some(path)
    }

    /// Transmission time of `size_bits` leaving `path[hop]`. The final hop
    /// uses the configured egress bandwidth (default: zero time).
    pub fn hop_tx_time(&self, path: &[NodeId], hop: usize, size_bits: u64) -> SimTime {
        if hop + 1 == path.len() {
            return match self.egress_bandwidth {
                Some(bw) => bw.tx_time(size_bits),
                None => SimTime::ZERO,
            };
        }
        let link = self
            .find_link(path[hop], path[hop + 1])
            .unwrap_or_else(|| panic!("no link {:?}->{:?}", path[hop], path[hop + 1]));
        self.link(link).bandwidth.tx_time(size_bits)
    }

    /// Minimum latency from being scheduled at `path[from_hop]` until exit at
    /// `path[to_hop]` inclusive of that hop's transmission: the sum of
    /// per-hop transmission times and propagation delays with no queueing.
    /// `from_hop == to_hop` degenerates to that hop's transmission time.
    pub fn t_min(&self, path: &[NodeId], from_hop: usize, to_hop: usize, size_bits: u64) -> SimTime {
        assert!(from_hop <= to_hop && to_hop < path.len());
        let mut total = SimTime::ZERO;
        for hop in from_hop..=to_hop {
            total += self.hop_tx_time(path, hop, size_bits);
            if hop < to_hop {
                let link = self.find_link(path[hop], path[hop + 1]).unwrap();
                total += self.link(link).prop_delay;
            }
        }
        total
    }

    /// t_min over the packet's entire path.
    pub fn t_min_full(&self, path: &[NodeId], size_bits: u64) -> SimTime {
        self.t_min(path, 0, path.len() - 1, size_bits)
    }

    /// Propagation-only latency of the reverse path (acks).
    pub fn reverse_prop_delay(&self, path: &[NodeId]) -> SimTime {
        let mut total = SimTime::ZERO;
        for w in path.windows(2) {
            let fwd = self.find_link(w[0], w[1]).expect("path uses real links");
            total += self.link(fwd).prop_delay;
        }
        total
    }
}

/// Scheduling header carried by a packet: at most one kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchedHeader {
    None,
    /// Remaining slack in ticks; signed because a failing replay can drive it
    /// negative. Rewritten at each hop when the packet finishes service.
    Slack(i64),
    /// Static value: rank for Priority, target exit time o(p) for EDF.
    Priority(i64),
    /// Per-hop target schedule times, indexed by hop along the path.
    HopTimes(Arc<[SimTime]>),
}

#[derive(Clone, Debug)]
pub struct Packet {
    pub id: PktId,
    pub flow: FlowId,
    /// Size on the wire.
    pub size_bits: u64,
    /// Total size of the flow this packet belongs to (SJF rank).
    pub flow_size_bytes: u64,
    /// Bytes of the flow not yet injected when this packet entered (SRPT rank).
    pub remaining_bytes: u64,
    pub injected_at: SimTime,
    pub path: Arc<[NodeId]>,
    /// Current hop index into `path`.
    pub hop: usize,
    pub header: SchedHeader,
    /// Total queueing the packet has experienced so far (FIFO+ rank).
    pub acc_wait: SimTime,
    /// Byte offset within the flow (transport bookkeeping).
    pub flow_offset: u64,
}

impl Packet {
    pub fn size_bytes(&self) -> u64 {
        self.size_bits / 8
    }
    pub fn src(&self) -> NodeId {
        self.path[0]
    }
    pub fn dest(&self) -> NodeId {
        *self.path.last().unwrap()
    }
    pub fn at_last_hop(&self) -> bool {
        self.hop + 1 == self.path.len()
    }
}
