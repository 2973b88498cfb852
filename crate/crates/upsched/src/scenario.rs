//! Scenario files: one JSON document that fully determines a run.
//!
//! A scenario names a topology, a traffic model, the original (recording)
//! scheduler, the replay candidates, and the run knobs (seed, horizon, slack
//! policy, buffer limits). `schema_version` guards the format; anything but
//! the current version is rejected before building. Serialization round-trips
//! losslessly so a scenario can be archived alongside its outputs.

use crate::engine::SimConfig;
use crate::net::Network;
use crate::policy::SlackPolicy;
use crate::replay::Candidate;
use crate::sched::SchedulerKind;
use crate::time::SimTime;
use crate::transport::FlowSpec;
use crate::workload::{
    self, dumbbell, fat_tree, fixture, poisson_flows_between, star_of_stars, DumbbellParams,
    FatTreeParams, Fixture, FixtureKind, PoissonTraffic, SizeDist, StarParams,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    pub topology: TopologySpec,
    #[serde(default)]
    pub traffic: TrafficSpec,
    /// Discipline that produces the original (recorded) schedule. Fixture
    /// topologies ignore this and use their prescribed tables.
    #[serde(default = "default_original")]
    pub original: SchedulerKind,
    /// Replay candidates, by name.
    #[serde(default)]
    pub candidates: Vec<String>,
    /// Slack stamped at injection in objective runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<SlackPolicy>,
    #[serde(default)]
    pub use_buffer_limits: bool,
    pub seed: u64,
    /// Stop time in nanoseconds; absent means run until drained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_ns: Option<u64>,
}

fn default_original() -> SchedulerKind {
    SchedulerKind::Fifo
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TopologySpec {
    StarOfStars(StarParams),
    FatTree(FatTreeParams),
    Dumbbell(DumbbellParams),
    Fixture { name: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum TrafficSpec {
    /// The topology brings its own flows (fixtures).
    BuiltIn,
    Poisson {
        target_utilization: f64,
        #[serde(default = "SizeDist::heavy_tailed_default")]
        size: SizeDist,
        duration_ns: u64,
        #[serde(default = "default_mss")]
        mss_bytes: u32,
        #[serde(default)]
        cross_core_only: bool,
    },
    /// Long-lived rate-controlled flows (dumbbell fairness runs).
    Aimd {
        flows: usize,
        #[serde(default)]
        stagger_ns: u64,
        #[serde(default = "default_mss")]
        mss_bytes: u32,
    },
}

fn default_mss() -> u32 {
    1_500
}

impl Default for TrafficSpec {
    fn default() -> TrafficSpec {
        TrafficSpec::BuiltIn
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unsupported schema_version {0}, this build reads version {SCHEMA_VERSION}")]
    SchemaVersion(u32),
    #[error("malformed scenario: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("unknown candidate `{0}`")]
    UnknownCandidate(String),
    #[error("{0}")]
    Incompatible(String),
}

/// Everything needed to run the scenario's original schedule.
pub struct BuiltScenario {
    pub net: Network,
    pub flows: Vec<FlowSpec>,
    pub cfg: SimConfig,
    /// Present when the topology is a fixture (carries expected tables).
    pub fixture: Option<Fixture>,
    /// Designated bottleneck for load accounting, when the topology has one.
    pub bottleneck_bps: Option<u64>,
}

impl ScenarioConfig {
    pub fn from_json(s: &str) -> Result<ScenarioConfig, ScenarioError> {
        let cfg: ScenarioConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios always serialize")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::SchemaVersion(self.schema_version));
        }
        if let TopologySpec::Fixture { name } = &self.topology {
            if FixtureKind::parse(name).is_none() {
                return Err(ScenarioError::UnknownFixture(name.clone()));
            }
        }
        self.parsed_candidates()?;
        Ok(())
    }

    pub fn parsed_candidates(&self) -> Result<Vec<Candidate>, ScenarioError> {
        self.candidates
            .iter()
            .map(|n| Candidate::parse(n).ok_or_else(|| ScenarioError::UnknownCandidate(n.clone())))
            .collect()
    }

    fn poisson(&self, t: &TrafficSpec) -> PoissonTraffic {
        match *t {
            TrafficSpec::Poisson {
                target_utilization,
                size,
                duration_ns,
                mss_bytes,
                cross_core_only,
            } => PoissonTraffic {
                target_utilization,
                size,
                seed: self.seed,
                duration: SimTime(duration_ns),
                mss_bytes,
                cross_core_only,
            },
            _ => unreachable!("caller matched Poisson"),
        }
    }

    pub fn build(&self) -> Result<BuiltScenario, ScenarioError> {
        self.validate()?;
        let mut cfg = SimConfig::new(self.original, self.seed);
        cfg.policy = self.policy.clone();
        cfg.use_buffer_limits = self.use_buffer_limits;
        if let Some(h) = self.horizon_ns {
            cfg.horizon = SimTime(h);
        }
        let incompatible = |msg: &str| Err(ScenarioError::Incompatible(msg.to_string()));
        match &self.topology {
            TopologySpec::StarOfStars(p) => {
                let star = star_of_stars(p);
                let flows = match &self.traffic {
                    t @ TrafficSpec::Poisson { .. } => {
                        workload::poisson_flows(&star, &self.poisson(t))
                    }
                    _ => return incompatible("star topologies take poisson traffic"),
                };
                Ok(BuiltScenario {
                    net: star.net,
                    flows,
                    cfg,
                    fixture: None,
                    bottleneck_bps: Some(star.uplink_bps),
                })
            }
            TopologySpec::FatTree(p) => {
                let ft = fat_tree(p);
                let flows = match &self.traffic {
                    t @ TrafficSpec::Poisson { .. } => {
                        let groups: Vec<usize> = (0..ft.hosts.len())
                            .map(|i| i / (p.k / 2).max(1)) // hosts share an edge switch
                            .collect();
                        let uplink = match p.link_bw {
                            crate::net::Bandwidth::Bps(b) => b,
                            crate::net::Bandwidth::Infinite => {
                                return incompatible("fat tree links must be finite")
                            }
                        };
                        poisson_flows_between(&ft.hosts, &groups, uplink, &self.poisson(t))
                    }
                    _ => return incompatible("fat trees take poisson traffic"),
                };
                Ok(BuiltScenario {
                    net: ft.net,
                    flows,
                    cfg,
                    fixture: None,
                    bottleneck_bps: None,
                })
            }
            TopologySpec::Dumbbell(p) => {
                let d = dumbbell(p);
                let flows = match self.traffic {
                    TrafficSpec::Aimd {
                        flows,
                        stagger_ns,
                        mss_bytes,
                    } => workload::dumbbell_aimd_flows(&d, flows, SimTime(stagger_ns), mss_bytes),
                    _ => return incompatible("dumbbells take aimd traffic"),
                };
                let bottleneck_bps = match d.net.links[d.bottleneck.0 as usize].bandwidth {
                    crate::net::Bandwidth::Bps(b) => Some(b),
                    crate::net::Bandwidth::Infinite => None,
                };
                Ok(BuiltScenario {
                    net: d.net,
                    flows,
                    cfg,
                    fixture: None,
                    bottleneck_bps,
                })
            }
            TopologySpec::Fixture { name } => {
                let kind = FixtureKind::parse(name)
                    .ok_or_else(|| ScenarioError::UnknownFixture(name.clone()))?;
                if self.traffic != TrafficSpec::BuiltIn {
                    return incompatible("fixtures bring their own flows");
                }
                let fix = fixture(kind);
                cfg.sched = fix.sched.clone();
                Ok(BuiltScenario {
                    net: fix.net.clone(),
                    flows: fix.flows.clone(),
                    cfg,
                    fixture: Some(fix),
                    bottleneck_bps: None,
                })
            }
        }
    }
}
