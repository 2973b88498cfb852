//! Command-line driver: record scenarios, replay them under candidate
//! disciplines, score scheduling objectives across schedulers, and run the
//! counterexample fixtures end to end.
//!
//! Every command prints a human table on stdout and writes machine-readable
//! JSON-lines (and CSV summaries) under `--out`. Runs are deterministic:
//! the scenario seed fixes topology, traffic and every scheduling decision,
//! so identical invocations produce byte-identical outputs.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use upsched::engine::{SchedAssign, Sim, SimResult};
use upsched::net::{Network, SchedHeader};
use upsched::policy::{self, SlackPolicy};
use upsched::replay::{replay, Candidate, ReplayReport, ScheduleRecord};
use upsched::report::{run_cells, write_file};
use upsched::scenario::{ScenarioConfig, TrafficSpec};
use upsched::sched::SchedulerKind;
use upsched::time::SimTime;
use upsched::transport::FlowSpec;
use upsched::workload::{fixture, Fixture, FixtureKind, UNIT};

#[derive(Parser)]
#[command(name = "upsched", version, about = "Record, replay and score packet schedules")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Record a scenario under its original scheduler, then replay the record
    /// under each candidate and summarize lateness.
    Replay(ReplayArgs),
    /// Run the scheduler matrix (fifo/sjf/srpt/fq/lstf+policy) on a scenario
    /// and report FCT, delay-tail and fairness metrics.
    Objective(ObjectiveArgs),
    /// Run a counterexample fixture and print expected-vs-actual tables.
    Fixture(FixtureArgs),
    /// Replay summaries across a utilization sweep of one Poisson scenario.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Report directory (JSON-lines always; per-packet CSV with --csv).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated candidates, overriding the scenario's list.
    #[arg(long, value_delimiter = ',')]
    candidates: Vec<String>,
    /// Override the run horizon, in nanoseconds.
    #[arg(long)]
    horizon: Option<u64>,
    /// Also write per-packet verdict CSVs (large).
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct ObjectiveArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Slack policy for the LSTF column: fct[=d_ns_per_byte],
    /// uniform[=c_ns], fair=<r_est_bps>. Defaults to the scenario's policy,
    /// then to fct.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    horizon: Option<u64>,
}

#[derive(Args)]
struct FixtureArgs {
    /// priority_cycle, lstf_miss, no_ups_a, no_ups_b, or all.
    name: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Comma-separated target utilizations.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5, 0.7, 0.9])]
    utilizations: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_delimiter = ',')]
    candidates: Vec<String>,
    #[arg(long)]
    horizon: Option<u64>,
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Replay(a) => cmd_replay(a),
        Cmd::Objective(a) => cmd_objective(a),
        Cmd::Fixture(a) => cmd_fixture(a),
        Cmd::Sweep(a) => cmd_sweep(a),
    }
}

fn load_scenario(
    path: &Path,
    seed: Option<u64>,
    horizon: Option<u64>,
    candidates: &[String],
) -> Result<ScenarioConfig> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = ScenarioConfig::from_json(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(h) = horizon {
        cfg.horizon_ns = Some(h);
    }
    if !candidates.is_empty() {
        cfg.candidates = candidates.to_vec();
        cfg.validate()?;
    }
    Ok(cfg)
}

/// Build and run the scenario's original schedule, returning a replayable
/// record of it.
fn record_scenario(cfg: &ScenarioConfig) -> Result<(Network, ScheduleRecord)> {
    let built = cfg.build()?;
    let res = Sim::new(built.net.clone(), built.flows, built.cfg).run();
    let record = ScheduleRecord::from_result(&res)
        .context("recording requires a loss-free original run that drains")?;
    Ok((built.net, record))
}

fn summary_header() -> String {
    format!(
        "{:<18} {:>8} {:>13} {:>15} {:>10} {:>14}  status",
        "candidate", "packets", "frac_overdue", "frac_overdue>T", "median_q", "max_late_ns"
    )
}

fn summary_line(r: &ReplayReport) -> String {
    format!(
        "{:<18} {:>8} {:>13.4} {:>15.4} {:>10.3} {:>14}  ok",
        r.candidate,
        r.packets.len(),
        r.frac_overdue,
        r.frac_overdue_gt_t,
        r.median_q_ratio,
        r.max_lateness_ns
    )
}

const SUMMARY_CSV_HEADER: &str =
    "candidate,packets,frac_overdue,frac_overdue_gt_t,median_q_ratio,max_lateness_ns,status\n";

fn summary_csv_row(r: &ReplayReport) -> String {
    format!(
        "{},{},{},{},{},{},ok\n",
        r.candidate,
        r.packets.len(),
        r.frac_overdue,
        r.frac_overdue_gt_t,
        r.median_q_ratio,
        r.max_lateness_ns
    )
}

fn cmd_replay(a: ReplayArgs) -> Result<()> {
    let cfg = load_scenario(&a.scenario, a.seed, a.horizon, &a.candidates)?;
    let cands = cfg.parsed_candidates()?;
    if cands.is_empty() {
        bail!("no candidates: set them in the scenario or pass --candidates");
    }
    let (net, record) = record_scenario(&cfg)?;
    write_file(&a.out.join(format!("{}.record.txt", cfg.name)), &record.to_text())?;

    let reports = run_cells(&cands, |c| replay(&net, &record, *c));

    println!(
        "scenario {} | original {} | {} packets",
        cfg.name,
        cfg.original.name(),
        record.packets.len()
    );
    println!("{}", summary_header());
    let mut csv = String::from(SUMMARY_CSV_HEADER);
    for (c, rep) in cands.iter().zip(&reports) {
        match rep {
            Ok(r) => {
                println!("{}", summary_line(r));
                csv.push_str(&summary_csv_row(r));
                write_file(
                    &a.out.join(format!("{}.{}.jsonl", cfg.name, c.name())),
                    &r.to_jsonl(),
                )?;
                if a.csv {
                    write_file(
                        &a.out.join(format!("{}.{}.csv", cfg.name, c.name())),
                        &r.to_csv(),
                    )?;
                }
            }
            Err(e) => {
                println!("{:<18} not applicable: {e}", c.name());
                csv.push_str(&format!("{},,,,,,\"{e}\"\n", c.name()));
                let line = json!({"summary": true, "candidate": c.name(), "error": e.to_string()});
                write_file(
                    &a.out.join(format!("{}.{}.jsonl", cfg.name, c.name())),
                    &format!("{line}\n"),
                )?;
            }
        }
    }
    write_file(&a.out.join(format!("{}.summary.csv", cfg.name)), &csv)?;
    Ok(())
}

fn parse_policy(s: &str) -> Result<SlackPolicy> {
    let (name, arg) = match s.split_once('=') {
        Some((n, v)) => (n, Some(v)),
        None => (s, None),
    };
    let num = |v: Option<&str>| -> Result<Option<u64>> {
        v.map(|x| x.parse::<u64>().map_err(|_| anyhow!("bad policy argument `{x}`")))
            .transpose()
    };
    match name {
        "fct" => Ok(SlackPolicy::Fct {
            d: num(arg)?.map_or_else(|| SimTime::from_secs(1), SimTime),
        }),
        "uniform" => Ok(SlackPolicy::Uniform {
            c: num(arg)?.map_or_else(|| SimTime::from_secs(1), SimTime),
        }),
        "fair" => Ok(SlackPolicy::Fair {
            r_est_bps: num(arg)?.ok_or_else(|| anyhow!("fair policy needs fair=<r_est_bps>"))?,
            per_flow_bps: Default::default(),
        }),
        other => bail!("unknown policy `{other}` (fct, uniform, fair=<bps>)"),
    }
}

fn cmd_objective(a: ObjectiveArgs) -> Result<()> {
    let mut cfg = load_scenario(&a.scenario, a.seed, a.horizon, &[])?;
    if let Some(p) = &a.policy {
        cfg.policy = Some(parse_policy(p)?);
    }
    let policy = cfg.policy.clone().unwrap_or_else(SlackPolicy::fct_default);
    let built = cfg.build()?;

    let mut cells: Vec<(String, SchedulerKind, Option<SlackPolicy>)> = [
        SchedulerKind::Fifo,
        SchedulerKind::Sjf,
        SchedulerKind::Srpt,
        SchedulerKind::Fq,
    ]
    .into_iter()
    .map(|k| (k.name().to_string(), k, None))
    .collect();
    cells.push((
        format!("lstf+{}", policy.name()),
        SchedulerKind::Lstf,
        Some(policy),
    ));

    let results = run_cells(&cells, |(_, kind, pol)| {
        let mut c = built.cfg.clone();
        c.sched = SchedAssign::uniform(*kind);
        c.policy = pol.clone();
        Sim::new(built.net.clone(), built.flows.clone(), c).run()
    });

    let flow_ids: Vec<upsched::net::FlowId> = built.flows.iter().map(|f| f.id).collect();
    let edges = [10_000u64, 100_000, 1_000_000];
    let mut buckets_csv =
        String::from("discipline,lo_bytes,hi_bytes,flows,mean_fct_ns\n");
    let mut delays_csv = String::from("discipline,p50_ns,p90_ns,p99_ns,mean_ns\n");
    let mut jsonl = String::new();
    println!(
        "{:<14} {:>7} {:>14} {:>12} {:>12} {:>8}",
        "discipline", "flows", "mean_fct_ms", "p50_us", "p99_us", "jain"
    );
    for ((label, _, _), res) in cells.iter().zip(&results) {
        let sized: Vec<(u64, SimTime)> = res
            .flows
            .iter()
            .filter_map(|f| f.size_bytes.zip(f.fct()))
            .collect();
        let mean_fct = if sized.is_empty() {
            None
        } else {
            Some(sized.iter().map(|(_, t)| t.as_nanos() as f64).sum::<f64>() / sized.len() as f64)
        };
        let mut delays = res.packet_delays();
        delays.sort_unstable();
        let pct = |p: f64| policy::percentile(&delays, p);
        let mean_delay = if delays.is_empty() {
            None
        } else {
            Some(delays.iter().sum::<u64>() as f64 / delays.len() as f64)
        };
        // Macro fairness: total delivered bytes per flow over the whole run.
        let mut per_flow = vec![0u64; flow_ids.len()];
        for (_, f, b) in res.deliveries() {
            per_flow[f.0 as usize] += b;
        }
        let shares: Vec<f64> = per_flow.iter().map(|&b| b as f64).collect();
        let jain = policy::jain_index(&shares);

        println!(
            "{:<14} {:>7} {:>14} {:>12} {:>12} {:>8}",
            label,
            sized.len(),
            mean_fct.map_or_else(|| "-".into(), |v| format!("{:.3}", v / 1e6)),
            pct(50.0).map_or_else(|| "-".into(), |v| format!("{:.1}", v as f64 / 1e3)),
            pct(99.0).map_or_else(|| "-".into(), |v| format!("{:.1}", v as f64 / 1e3)),
            jain.map_or_else(|| "-".into(), |v| format!("{v:.4}")),
        );
        for b in policy::fct_buckets(&sized, &edges) {
            buckets_csv.push_str(&format!(
                "{},{},{},{},{}\n",
                label,
                b.lo_bytes,
                b.hi_bytes.map_or_else(|| "inf".into(), |h| h.to_string()),
                b.flows,
                b.mean_fct_ns.map_or_else(|| "".into(), |v| format!("{v:.1}")),
            ));
        }
        delays_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            label,
            pct(50.0).map_or_else(String::new, |v| v.to_string()),
            pct(90.0).map_or_else(String::new, |v| v.to_string()),
            pct(99.0).map_or_else(String::new, |v| v.to_string()),
            mean_delay.map_or_else(String::new, |v| format!("{v:.1}")),
        ));
        jsonl.push_str(&format!(
            "{}\n",
            json!({
                "discipline": label,
                "completed_flows": sized.len(),
                "mean_fct_ns": mean_fct,
                "p50_delay_ns": pct(50.0),
                "p99_delay_ns": pct(99.0),
                "mean_delay_ns": mean_delay,
                "jain_total_bytes": jain,
                "drops": res.drops.len(),
            })
        ));
    }
    write_file(&a.out.join(format!("{}.objective.jsonl", cfg.name)), &jsonl)?;
    write_file(&a.out.join(format!("{}.fct_buckets.csv", cfg.name)), &buckets_csv)?;
    write_file(&a.out.join(format!("{}.delays.csv", cfg.name)), &delays_csv)?;

    // Fairness convergence series, meaningful for long-lived traffic.
    if matches!(cfg.traffic, TrafficSpec::Aimd { .. }) {
        let horizon = SimTime(cfg.horizon_ns.context("aimd objective runs need a horizon")?);
        let window = SimTime((horizon.0 / 50).max(1_000_000));
        let mut csv = String::from("discipline,window_end_ns,jain\n");
        for ((label, _, _), res) in cells.iter().zip(&results) {
            let series = policy::jain_windows(&res.deliveries(), &flow_ids, window, horizon);
            for (i, j) in series.iter().enumerate() {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    label,
                    (i as u64 + 1) * window.0,
                    j.map_or_else(String::new, |v| format!("{v:.6}")),
                ));
            }
        }
        write_file(&a.out.join(format!("{}.jain.csv", cfg.name)), &csv)?;
    }
    Ok(())
}

/// Times in fixture tables are whole or tenth units; show both views.
fn fmt_units(t: SimTime) -> String {
    let u = t.0 as f64 / UNIT.0 as f64;
    if (u - u.round()).abs() < 1e-9 {
        format!("{}", u.round() as u64)
    } else {
        format!("{u:.1}")
    }
}

fn cmd_fixture(a: FixtureArgs) -> Result<()> {
    let kinds: Vec<FixtureKind> = if a.name == "all" {
        FixtureKind::ALL.to_vec()
    } else {
        vec![FixtureKind::parse(&a.name).ok_or_else(|| {
            anyhow!(
                "unknown fixture `{}` (priority_cycle, lstf_miss, no_ups_a, no_ups_b, all)",
                a.name
            )
        })?]
    };
    let mut all_exact = true;
    for kind in kinds {
        all_exact &= run_fixture(kind, &a.out)?;
        println!();
    }
    if !all_exact {
        bail!("fixture tables diverged from their expected schedules");
    }
    Ok(())
}

fn print_rows(
    fix: &Fixture,
    res: &SimResult,
    expected: &[upsched::workload::ExpectedRow],
    lines: &mut String,
    table: &str,
) -> bool {
    println!(
        "  {:<10} {:<8} {:>9} {:>9} {:>11} {:>11}  status",
        "node", "packet", "arrival", "start", "exp_arrival", "exp_start"
    );
    let actual = fix.rows_like(res, expected);
    let mut exact = true;
    for (act, exp) in actual.iter().zip(expected) {
        let ok = act == exp;
        exact &= ok;
        println!(
            "  {:<10} {:<8} {:>9} {:>9} {:>11} {:>11}  {}",
            fix.net.nodes[exp.node.0 as usize].name,
            fix.flow_names[exp.flow.0 as usize],
            fmt_units(act.arrival),
            fmt_units(act.start),
            fmt_units(exp.arrival),
            fmt_units(exp.start),
            if ok { "exact" } else { "DIFF" },
        );
        lines.push_str(&format!(
            "{}\n",
            json!({
                "table": table,
                "node": fix.net.nodes[exp.node.0 as usize].name,
                "packet": fix.flow_names[exp.flow.0 as usize],
                "arrival_ns": act.arrival.0,
                "start_ns": act.start.0,
                "expected_arrival_ns": exp.arrival.0,
                "expected_start_ns": exp.start.0,
                "exact": ok,
            })
        ));
    }
    exact
}

fn run_fixture(kind: FixtureKind, out: &Path) -> Result<bool> {
    let fix = fixture(kind);
    let res = fix.run_original();
    let mut lines = String::new();
    println!("== fixture {} (times in transmission units)", kind.name());
    println!("original schedule:");
    let mut exact = print_rows(&fix, &res, &fix.expected, &mut lines, "original");
    for &(flow, exit) in &fix.expected_exits {
        let got = res.packets[flow.0 as usize].exit;
        if got != Some(exit) {
            exact = false;
            println!(
                "  exit of {} diverged: got {:?}, expected {}",
                fix.flow_names[flow.0 as usize],
                got.map(fmt_units),
                fmt_units(exit)
            );
        }
    }
    println!("  original table: {}", if exact { "EXACT" } else { "DIVERGED" });

    let record = fix.record();
    match kind {
        FixtureKind::LstfMiss => {
            println!("slack replay (headers stamped from recorded exits):");
            let rep = replay(&fix.net, &record, Candidate::Lstf)?;
            let sim = upsched::replay::replay_sim(&fix.net, &record, Candidate::Lstf)?;
            let table = fix.expected_lstf_replay.as_ref().unwrap();
            exact &= print_rows(&fix, &sim, table, &mut lines, "lstf_replay");
            let overdue: Vec<&str> = rep
                .packets
                .iter()
                .filter(|p| p.overdue)
                .map(|p| fix.flow_names[p.flow as usize])
                .collect();
            println!("  overdue packets under slack replay: {overdue:?}");
            lines.push_str(&format!("{}\n", json!({"table": "verdict", "overdue": overdue})));
            exact &= overdue == ["c2"];
        }
        FixtureKind::PriorityCycle => {
            println!("static priority orderings (low rank serves first):");
            let mut any_clean = false;
            for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let late = run_with_priorities(&fix, &perm);
                let mut order: Vec<usize> = (0..3).collect();
                order.sort_by_key(|&i| perm[i]);
                let label = order
                    .iter()
                    .map(|&i| fix.flow_names[i])
                    .collect::<Vec<_>>()
                    .join("<");
                any_clean |= late.is_empty();
                println!("  {label}: late {late:?}");
                lines.push_str(&format!(
                    "{}\n",
                    json!({"table": "priority_orderings", "ordering": label, "late": late})
                ));
            }
            println!("  every static ordering misses a deadline: {}", !any_clean);
            exact &= !any_clean;
            let rep = replay(&fix.net, &record, Candidate::Lstf)?;
            println!("  slack replay overdue count: {}", count_overdue(&rep));
            exact &= rep.perfect();
        }
        FixtureKind::NoUpsA | FixtureKind::NoUpsB => {
            println!("replay verdicts:");
            for cand in [Candidate::Lstf, Candidate::PriorityExit, Candidate::Omniscient] {
                let verdict = match replay(&fix.net, &record, cand) {
                    Ok(rep) => {
                        let late: Vec<&str> = rep
                            .packets
                            .iter()
                            .filter(|p| p.overdue)
                            .map(|p| fix.flow_names[p.flow as usize])
                            .collect();
                        if late.is_empty() {
                            "replays exactly on time".to_string()
                        } else {
                            format!("late: {late:?}")
                        }
                    }
                    Err(e) => format!("not applicable: {e}"),
                };
                println!("  {:<14} {verdict}", cand.name());
                lines.push_str(&format!(
                    "{}\n",
                    json!({"table": "replay_verdicts", "candidate": cand.name(), "verdict": verdict})
                ));
            }
        }
    }
    write_file(&out.join(format!("fixture_{}.jsonl", kind.name())), &lines)?;
    Ok(exact)
}

/// Run the fixture's packets under a static priority ordering; returns the
/// names of packets that exit after their original deadline.
fn run_with_priorities(fix: &Fixture, rank_of_flow: &[i64]) -> Vec<&'static str> {
    let mut flows: Vec<FlowSpec> = fix.flows.clone();
    for f in &mut flows {
        let rank = rank_of_flow[f.id.0 as usize];
        for p in f.planned.as_mut().expect("fixture flows are planned") {
            p.header = Some(SchedHeader::Priority(rank));
        }
    }
    let cfg = upsched::engine::SimConfig::new(SchedulerKind::Priority, 0);
    let res = Sim::new(fix.net.clone(), flows, cfg).run();
    fix.expected_exits
        .iter()
        .filter(|&&(flow, deadline)| {
            res.packets[flow.0 as usize].exit.expect("fixture packets exit") > deadline
        })
        .map(|&(flow, _)| fix.flow_names[flow.0 as usize])
        .collect()
}

fn count_overdue(rep: &ReplayReport) -> usize {
    rep.packets.iter().filter(|p| p.overdue).count()
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let cfg = load_scenario(&a.scenario, a.seed, a.horizon, &a.candidates)?;
    let cands = cfg.parsed_candidates()?;
    if cands.is_empty() {
        bail!("no candidates: set them in the scenario or pass --candidates");
    }
    if !matches!(cfg.traffic, TrafficSpec::Poisson { .. }) {
        bail!("sweep needs a poisson-traffic scenario");
    }

    type Row = (f64, String, Result<ReplayReport, upsched::replay::ReplayError>);
    let rows: Vec<Result<Vec<Row>>> = run_cells(&a.utilizations, |&u| {
        let mut point = cfg.clone();
        if let TrafficSpec::Poisson {
            target_utilization, ..
        } = &mut point.traffic
        {
            *target_utilization = u;
        }
        let (net, record) = record_scenario(&point)?;
        Ok(cands
            .iter()
            .map(|c| (u, c.name().to_string(), replay(&net, &record, *c)))
            .collect())
    });

    let mut csv = String::from(
        "utilization,candidate,packets,frac_overdue,frac_overdue_gt_t,median_q_ratio,max_lateness_ns,status\n",
    );
    let mut jsonl = String::new();
    println!(
        "{:<6} {}",
        "util",
        summary_header()
    );
    for cell in rows {
        for (u, cand, rep) in cell? {
            match rep {
                Ok(r) => {
                    println!("{u:<6} {}", summary_line(&r));
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{},ok\n",
                        u,
                        cand,
                        r.packets.len(),
                        r.frac_overdue,
                        r.frac_overdue_gt_t,
                        r.median_q_ratio,
                        r.max_lateness_ns
                    ));
                    jsonl.push_str(&format!(
                        "{}\n",
                        json!({
                            "utilization": u,
                            "candidate": cand,
                            "packets": r.packets.len(),
                            "frac_overdue": r.frac_overdue,
                            "frac_overdue_gt_t": r.frac_overdue_gt_t,
                            "median_q_ratio": r.median_q_ratio,
                            "max_lateness_ns": r.max_lateness_ns,
                        })
                    ));
                }
                Err(e) => {
                    println!("{u:<6} {cand:<18} not applicable: {e}");
                    csv.push_str(&format!("{u},{cand},,,,,,\"{e}\"\n"));
                    jsonl.push_str(&format!(
                        "{}\n",
                        json!({"utilization": u, "candidate": cand, "error": e.to_string()})
                    ));
                }
            }
        }
    }
    write_file(&a.out.join(format!("{}.sweep.csv", cfg.name)), &csv)?;
    write_file(&a.out.join(format!("{}.sweep.jsonl", cfg.name)), &jsonl)?;
    Ok(())
}
