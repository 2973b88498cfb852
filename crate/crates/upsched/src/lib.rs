//! Discrete-event network simulator built around slack-based packet
//! scheduling: replay of recorded schedules, slack/deadline disciplines and
//! their classical baselines, header-stamping policies, and the workload
//! generators used by the bundled experiments.

pub mod engine;
pub mod kernel;
pub mod net;
pub mod policy;
pub mod replay;
pub mod sched;
pub mod time;
pub mod report;
pub mod scenario;
pub mod transport;
pub mod workload;

pub use engine::{SchedAssign, Sim, SimConfig, SimResult};
pub use net::{Bandwidth, FlowId, LinkId, Network, NodeId, Packet, PktId, SchedHeader};
pub use policy::SlackPolicy;
pub use sched::SchedulerKind;
pub use time::SimTime;
pub use transport::{FlowSpec, TransportKind};
