use std::collections::{BTreeMap, HashSet, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::generator::Generator;
use super::scenario::{to_substeps, InjectorKind, NormalBroadcastProfile, Scenario};
use super::switch::{flood_copies, saturation_cap, PortFilter, SwitchState};
use super::{FrameLedger, NodeTraffic, SimError, SimTrace, TickRecord, SUBSTEPS_PER_MS};
use crate::agents::{
    attribute_origin, AgentConfig, AgentState, Calibration, ReconnectReason, StormAction, ThresholdDb, TicketLog,
    Trigger, TriggerCause,
};
use crate::metrics::{min_ipg, ChannelStats, Classifier, Thresholds, MIN_IPG_BITS};
use crate::model::TracePoint;
use crate::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Run the scenario's agents, if it configures any.
    pub agents: bool,
    /// Operator reconnects `(node, t_ms)`, applied at the first tick starting at or after `t_ms`.
    pub reconnects: Vec<(NodeId, f64)>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            agents: true,
            reconnects: Vec::new(),
        }
    }
}

impl RunOptions {
    pub fn without_agents() -> Self {
        Self {
            agents: false,
            ..Self::default()
        }
    }
}

pub fn run(scenario: &Scenario) -> Result<SimTrace, SimError> {
    run_with(scenario, RunOptions::default())
}

pub fn run_with(scenario: &Scenario, options: RunOptions) -> Result<SimTrace, SimError> {
    scenario.validate()?;
    let cap = saturation_cap(scenario.link_rate, scenario.frame_size, scenario.tick_ms);
    let agents = match (&scenario.agent_config, options.agents) {
        (Some(cfg), true) => Some(Agents::calibrate(scenario, cfg)?),
        _ => None,
    };
    if options.reconnects.iter().any(|(n, _)| *n >= scenario.node_count) {
        return Err(SimError::Invalid("reconnect target is not a node"));
    }
    let mut engine = Engine::new(scenario, cap, agents);
    engine.reconnects = options.reconnects.clone();
    engine
        .reconnects
        .sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    for k in 0..scenario.tick_count() {
        engine.tick(k);
    }
    Ok(engine.finish())
}

struct Agents {
    config: AgentConfig,
    states: Vec<AgentState>,
    calibration: Option<Calibration>,
    log: TicketLog,
    volume_limit: Option<u64>,
    permissible: f64,
    nbw_history: Vec<VecDeque<u64>>,
}

impl Agents {
    /// Learns the reference and thresholds from a noiseless, injector-free run.
    fn calibrate(scenario: &Scenario, config: &AgentConfig) -> Result<Self, SimError> {
        let config = AgentConfig {
            policy: scenario.suppression_policy,
            ..config.clone()
        };
        let mut db = ThresholdDb {
            pe: 0.0,
            ipg_floor_ns: None,
            utilization_max: config.utilization_max,
            nbw_permissible: None,
            byte_threshold_mb: config.byte_threshold_mb,
        };
        let frame = scenario.frame_size as f64;
        let mut permissible = frame;
        let mut calibration = None;
        if let Some(g) = &scenario.generator {
            let quiet = Scenario {
                name: format!("{}-calibration", scenario.name),
                generator: Some(NormalBroadcastProfile {
                    jitter: 0.0,
                    ..g.clone()
                }),
                injectors: Vec::new(),
                agent_config: None,
                duration_ms: config.calibration_periods as f64 * g.burst_period_ms * g.time_scale,
                ..scenario.clone()
            };
            let trace = run_with(&quiet, RunOptions::without_agents())?;
            let w = config.nbw_window_ticks;
            for node in 0..scenario.node_count as usize {
                let bytes: Vec<u64> = trace.ticks.iter().map(|r| r.nodes[node].broadcast_bytes).collect();
                let best = if bytes.len() < w {
                    bytes.iter().sum::<u64>()
                } else {
                    bytes.windows(w).map(|s| s.iter().sum::<u64>()).max().unwrap_or(0)
                };
                permissible = permissible.max(best as f64);
            }
            db.ipg_floor_ns = trace.ticks.iter().map(|r| r.channel.observed_ipg).reduce(f64::min);
            if config.detectors.ptr {
                let points: Vec<TracePoint> = trace
                    .ticks
                    .iter()
                    .map(|r| TracePoint::new(r.t, r.channel.broadcast_pkts as f64))
                    .collect();
                let mut probe = AgentState::new(0, config.clone()).map_err(|e| SimError::Agent(e.to_string()))?;
                let cal = probe
                    .calibrate(&points)
                    .map_err(|e| SimError::Calibration(e.to_string()))?;
                db.pe = cal.thresholds.pe;
                calibration = Some(cal);
            }
        }
        db.nbw_permissible = Some(permissible);
        if let Some(cal) = calibration.as_mut() {
            cal.thresholds = db;
        }
        let states = (0..scenario.node_count)
            .map(|node| {
                let mut a = AgentState::new(node, config.clone()).map_err(|e| SimError::Agent(e.to_string()))?;
                match &calibration {
                    Some(cal) => a.arm_with(cal),
                    None => a.arm_without_reference(db),
                }
                Ok(a)
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        let volume_limit = config
            .byte_threshold_mb
            .filter(|_| config.detectors.volume)
            .map(|mb| (mb * 1e6).round() as u64);
        Ok(Self {
            nbw_history: vec![VecDeque::new(); scenario.node_count as usize],
            config,
            states,
            calibration,
            log: TicketLog::new(),
            volume_limit,
            permissible,
        })
    }
}

enum InjectorRt {
    FaultyNic {
        fps: f64,
        ramp: f64,
        delay: u64,
        zero: u64,
        emitted: u64,
        was_blocked: bool,
    },
    Loop {
        factor: u64,
        reuse: bool,
        seed: u64,
        ceiling: u64,
        population: u64,
        ipid_base: u32,
        broken: bool,
    },
    Smurf {
        rate: f64,
        emitted: u64,
    },
}

struct ActiveInjector {
    origin: NodeId,
    start: u64,
    end: Option<u64>,
    rt: InjectorRt,
}

#[derive(Default)]
struct TickAcc {
    ledger: FrameLedger,
    nodes: Vec<NodeTraffic>,
    delivered: u64,
    broadcast_bytes: u64,
    copies: u64,
    /// Reused IPIDs seen this tick: source and sighting times.
    sightings: BTreeMap<u32, (NodeId, Vec<f64>)>,
    spoofs_delivered: u64,
    replies_generated: u64,
}

struct Engine<'a> {
    s: &'a Scenario,
    cap: u64,
    tick_sub: u64,
    frame: u64,
    rng: ChaCha8Rng,
    generator: Option<Generator>,
    gen_ptr: u64,
    uni_ptr: u64,
    next_ipid: u32,
    injectors: Vec<ActiveInjector>,
    pending_replies: Vec<(NodeId, u64)>,
    switch: SwitchState,
    agents: Option<Agents>,
    classifier: Classifier,
    ipid_keep: usize,
    acc: TickAcc,
    ticks: Vec<TickRecord>,
    actions: Vec<(u64, StormAction)>,
    reconnects: Vec<(NodeId, f64)>,
}

fn share(total: u64, n: u64, ptr: u64, node: u64) -> u64 {
    total / n + u64::from((node + n - ptr) % n < total % n)
}

fn spread(total: u64, slots: u64, s: u64) -> u64 {
    (total as u128 * (s + 1) as u128 / slots as u128 - total as u128 * s as u128 / slots as u128) as u64
}

impl<'a> Engine<'a> {
    fn new(s: &'a Scenario, cap: u64, agents: Option<Agents>) -> Self {
        let tick_sub = s.tick_substeps();
        let injectors = s
            .injectors
            .iter()
            .map(|inj| {
                let start = to_substeps(inj.start_ms, "start").expect("validated");
                let rt = match inj.kind {
                    InjectorKind::FaultyNic {
                        frames_per_second,
                        ramp_fps_per_s,
                        ramp_delay_ms,
                    } => {
                        let delay = to_substeps(ramp_delay_ms, "delay").expect("validated");
                        InjectorRt::FaultyNic {
                            fps: frames_per_second,
                            ramp: ramp_fps_per_s,
                            delay,
                            zero: start + delay,
                            emitted: 0,
                            was_blocked: false,
                        }
                    }
                    InjectorKind::Loop {
                        replication_factor,
                        reuse_ipid,
                        seed_frames,
                    } => InjectorRt::Loop {
                        factor: replication_factor as u64,
                        reuse: reuse_ipid,
                        seed: seed_frames as u64,
                        ceiling: cap.div_ceil(tick_sub).max(1),
                        population: 0,
                        ipid_base: 0,
                        broken: false,
                    },
                    InjectorKind::Smurf { spoof_rate } => InjectorRt::Smurf {
                        rate: spoof_rate,
                        emitted: 0,
                    },
                };
                ActiveInjector {
                    origin: inj.origin,
                    start,
                    end: inj.end_ms.map(|e| to_substeps(e, "end").expect("validated")),
                    rt,
                }
            })
            .collect();
        let mut thresholds = Thresholds::default();
        if let Some(cfg) = &s.agent_config {
            thresholds.ipid_k = cfg.ipid_k;
            thresholds.ipid_window_ms = cfg.ipid_window_ms;
        }
        Self {
            s,
            cap,
            tick_sub,
            frame: s.frame_size as u64,
            rng: ChaCha8Rng::seed_from_u64(s.seed),
            generator: s.generator.as_ref().map(|g| Generator::new(g, cap)),
            gen_ptr: 0,
            uni_ptr: 0,
            next_ipid: 0,
            injectors,
            pending_replies: Vec::new(),
            switch: SwitchState::new(s.node_count),
            agents,
            ipid_keep: thresholds.ipid_k,
            classifier: Classifier::new(thresholds),
            acc: TickAcc::default(),
            ticks: Vec::new(),
            actions: Vec::new(),
            reconnects: Vec::new(),
        }
    }

    fn n(&self) -> u64 {
        self.s.node_count as u64
    }

    fn fresh_ipids(&mut self, count: u64) -> u32 {
        let base = self.next_ipid;
        self.next_ipid = self.next_ipid.wrapping_add(count as u32);
        base
    }

    fn refresh_ports(&mut self, t_ms: f64) {
        let Some(agents) = &self.agents else { return };
        let filter = PortFilter::for_policy(agents.config.policy);
        for a in &agents.states {
            let f = if a.is_suppressing(t_ms) {
                filter
            } else {
                PortFilter::Open
            };
            self.switch.set_port(a.node(), f);
        }
    }

    /// Puts `count` frames from `src` through port filter, volume limiter and
    /// cap. Returns (delivered, suppressed).
    fn emit(&mut self, src: NodeId, count: u64, broadcast: bool, replicated: bool, t_sub: u64) -> (u64, u64) {
        if count == 0 {
            return (0, 0);
        }
        let acc = &mut self.acc;
        if replicated {
            acc.ledger.replicated += count;
        } else {
            acc.ledger.generated += count;
        }
        if broadcast {
            acc.nodes[src as usize].broadcast_emitted += count;
        }
        if !self.switch.admits(src, broadcast) {
            acc.ledger.suppressed += count;
            return (0, count);
        }
        let mut admitted = count;
        let limit = self.agents.as_ref().and_then(|a| a.volume_limit);
        if let (true, Some(limit)) = (broadcast, limit) {
            let headroom = limit.saturating_sub(self.acc.broadcast_bytes) / self.frame;
            if count > headroom {
                let observed = (self.acc.broadcast_bytes + count * self.frame) as f64 / 1e6;
                self.volume_trigger(t_sub, observed);
                if !self.switch.admits(src, true) {
                    admitted = headroom;
                    self.acc.ledger.suppressed += count - headroom;
                }
            }
        }
        let acc = &mut self.acc;
        let delivered = admitted.min(self.cap - acc.delivered);
        acc.ledger.capped += admitted - delivered;
        acc.ledger.delivered += delivered;
        acc.delivered += delivered;
        let node = &mut acc.nodes[src as usize];
        node.total_pkts += delivered;
        node.total_bytes += delivered * self.frame;
        if broadcast {
            node.broadcast_pkts += delivered;
            node.broadcast_bytes += delivered * self.frame;
            acc.broadcast_bytes += delivered * self.frame;
            acc.copies += delivered * flood_copies(src, &self.switch);
        }
        (delivered, count - admitted)
    }

    fn volume_trigger(&mut self, t_sub: u64, observed: f64) {
        let emissions: Vec<u64> = self.acc.nodes.iter().map(|n| n.broadcast_emitted).collect();
        let origin = attribute_origin(&emissions);
        let Some(agents) = self.agents.as_mut() else { return };
        let trigger = Trigger {
            t: t_sub as f64 / SUBSTEPS_PER_MS as f64,
            origin,
            cause: TriggerCause::BroadcastVolumeExceeded,
            observed,
            threshold: agents.config.byte_threshold_mb.unwrap_or(0.0),
        };
        let action = agents.states[origin as usize].handle_storm(&trigger, &mut agents.log);
        self.actions.push((t_sub / self.tick_sub, action));
        self.refresh_ports(trigger.t);
    }

    fn record_sightings(&mut self, src: NodeId, base: u32, distinct: u64, delivered: u64, t_ms: f64) {
        let keep = self.ipid_keep;
        for i in 0..delivered.min(distinct * keep as u64) {
            let ipid = base.wrapping_add((i % distinct) as u32);
            let (_, seen) = self.acc.sightings.entry(ipid).or_insert((src, Vec::new()));
            if seen.len() < keep {
                seen.push(t_ms);
            }
        }
    }

    fn tick(&mut self, k: u64) {
        let n = self.n();
        let t0 = k * self.tick_sub;
        let t_ms = t0 as f64 / SUBSTEPS_PER_MS as f64;
        self.acc = TickAcc {
            nodes: (0..self.s.node_count)
                .map(|node| NodeTraffic {
                    node,
                    ..NodeTraffic::default()
                })
                .collect(),
            ..TickAcc::default()
        };
        if let Some(agents) = self.agents.as_mut() {
            while self.reconnects.first().is_some_and(|&(_, t)| t <= t_ms) {
                let (node, _) = self.reconnects.remove(0);
                agents.states[node as usize].reconnect(t_ms, ReconnectReason::Operator, &mut agents.log);
            }
            for a in agents.states.iter_mut() {
                a.refresh(t_ms, &mut agents.log);
            }
        }

        // Normal traffic for the whole tick, split per node then per substep.
        let (bcast_shares, uni_shares) = match &self.generator {
            Some(g) => {
                let count = g.jittered(g.base_count(t0), &mut self.rng);
                let uni = g.unicast_per_tick;
                let b: Vec<u64> = (0..n).map(|i| share(count, n, self.gen_ptr, i)).collect();
                let u: Vec<u64> = (0..n).map(|i| share(uni, n, self.uni_ptr, i)).collect();
                self.gen_ptr = (self.gen_ptr + count) % n;
                self.uni_ptr = (self.uni_ptr + uni) % n;
                (b, u)
            }
            None => (vec![0; n as usize], vec![0; n as usize]),
        };
        let replies = std::mem::take(&mut self.pending_replies);
        let mut new_replies = Vec::new();

        for s in 0..self.tick_sub {
            let t_sub = t0 + s;
            let ts = t_sub as f64 / SUBSTEPS_PER_MS as f64;
            self.refresh_ports(ts);
            if s == 0 {
                for &(origin, spoofs) in &replies {
                    for node in (0..self.s.node_count).filter(|&x| x != origin) {
                        self.acc.replies_generated += spoofs;
                        self.fresh_ipids(spoofs);
                        self.emit(node, spoofs, false, false, t_sub);
                    }
                }
            }
            for node in 0..n {
                let c = spread(bcast_shares[node as usize], self.tick_sub, s);
                self.fresh_ipids(c);
                self.emit(node as NodeId, c, true, false, t_sub);
            }
            for node in 0..n {
                let c = spread(uni_shares[node as usize], self.tick_sub, s);
                self.fresh_ipids(c);
                self.emit(node as NodeId, c, false, false, t_sub);
            }
            for i in 0..self.injectors.len() {
                self.step_injector(i, t_sub, ts, &mut new_replies);
            }
        }
        self.pending_replies = new_replies;
        self.close_tick(k, t_ms);
    }

    fn step_injector(&mut self, i: usize, t_sub: u64, ts: f64, new_replies: &mut Vec<(NodeId, u64)>) {
        let (origin, start, end) = {
            let inj = &self.injectors[i];
            (inj.origin, inj.start, inj.end)
        };
        if t_sub < start || end.is_some_and(|e| t_sub >= e) {
            return;
        }
        let blocked = !self.switch.admits(origin, true);
        match &mut self.injectors[i].rt {
            InjectorRt::FaultyNic {
                fps,
                ramp,
                delay,
                zero,
                emitted,
                was_blocked,
            } => {
                if *was_blocked && !blocked {
                    *zero = t_sub + *delay;
                    *emitted = 0;
                }
                *was_blocked = blocked;
                if t_sub < *zero {
                    return;
                }
                let m = (t_sub - *zero + 1) as f64;
                let total = (*fps * m / 1e5 + *ramp * m * m / 2e10).floor() as u64;
                let count = total.saturating_sub(*emitted);
                *emitted = total.max(*emitted);
                self.fresh_ipids(count);
                self.emit(origin, count, true, false, t_sub);
            }
            InjectorRt::Smurf { rate, emitted } => {
                let total = (*rate * (t_sub - start + 1) as f64 / 1e5).floor() as u64;
                let count = total.saturating_sub(*emitted);
                *emitted = total.max(*emitted);
                self.fresh_ipids(count);
                let (delivered, _) = self.emit(origin, count, true, false, t_sub);
                if delivered > 0 {
                    self.acc.spoofs_delivered += delivered;
                    match new_replies.iter_mut().find(|(o, _)| *o == origin) {
                        Some((_, c)) => *c += delivered,
                        None => new_replies.push((origin, delivered)),
                    }
                }
            }
            InjectorRt::Loop { broken, .. } => {
                if *broken && !blocked {
                    *broken = false;
                }
                if *broken {
                    return;
                }
                let InjectorRt::Loop {
                    factor,
                    reuse,
                    seed,
                    ceiling,
                    population,
                    ipid_base,
                    ..
                } = &mut self.injectors[i].rt
                else {
                    unreachable!()
                };
                let (count, replicated) = if *population == 0 {
                    (*seed, false)
                } else {
                    ((*population * *factor).min(*ceiling), true)
                };
                *population = count;
                let (reuse, seed) = (*reuse, *seed);
                let base = if !replicated || !reuse {
                    let b = self.fresh_ipids(count);
                    if let InjectorRt::Loop { ipid_base, .. } = &mut self.injectors[i].rt {
                        *ipid_base = b;
                    }
                    b
                } else {
                    *ipid_base
                };
                let (delivered, suppressed) = self.emit(origin, count, true, replicated, t_sub);
                if reuse {
                    self.record_sightings(origin, base, seed.min(count), delivered, ts);
                }
                if suppressed > 0 {
                    if let InjectorRt::Loop { population, broken, .. } = &mut self.injectors[i].rt {
                        *population = 0;
                        *broken = true;
                    }
                }
            }
        }
    }

    fn close_tick(&mut self, k: u64, t_ms: f64) {
        let s = self.s;
        let acc = std::mem::take(&mut self.acc);
        assert!(
            acc.ledger.balanced(),
            "frame ledger out of balance at tick {k}: {:?}",
            acc.ledger
        );
        debug_assert!(acc.delivered <= self.cap);
        let bcast_pkts: u64 = acc.nodes.iter().map(|x| x.broadcast_pkts).sum();
        let total_pkts: u64 = acc.nodes.iter().map(|x| x.total_pkts).sum();
        let mut channel = ChannelStats {
            tick: t_ms,
            interval_ms: s.tick_ms,
            broadcast_pkts: bcast_pkts,
            total_pkts,
            broadcast_bytes: bcast_pkts * self.frame,
            total_bytes: total_pkts * self.frame,
            observed_ipg: 0.0,
            link_rate: s.link_rate,
        };
        let load = (channel.total_bytes * 8 + total_pkts * MIN_IPG_BITS) as f64 / channel.capacity_bits();
        channel.observed_ipg = min_ipg(s.link_rate).expect("link rate validated") * (1.0 - load).max(0.0);

        let mut sightings: Vec<(u32, f64)> = acc
            .sightings
            .iter()
            .flat_map(|(&ipid, (_, ts))| ts.iter().map(move |&t| (ipid, t)))
            .collect();
        sightings.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let classification = self.classifier.step(&channel, sightings.iter().copied());

        if let Some(agents) = self.agents.as_mut() {
            let emissions: Vec<u64> = acc.nodes.iter().map(|x| x.broadcast_emitted).collect();
            let loudest = attribute_origin(&emissions);
            let cfg = agents.config.clone();
            let mut triggers = Vec::new();
            for a in agents.states.iter_mut() {
                a.sample_channel(t_ms, bcast_pkts as f64)
                    .expect("one sample per tick after calibration");
                if let Some(trigger) = a.compare_ptr(&emissions).and_then(|c| c.trigger) {
                    if cfg.detectors.ptr {
                        triggers.push(trigger);
                    }
                }
            }
            if let Some(limit) = agents.volume_limit {
                if channel.broadcast_bytes > limit {
                    triggers.push(Trigger {
                        t: t_ms,
                        origin: loudest,
                        cause: TriggerCause::BroadcastVolumeExceeded,
                        observed: channel.broadcast_bytes as f64 / 1e6,
                        threshold: limit as f64 / 1e6,
                    });
                }
            }
            if cfg.detectors.utilization && classification.utilization > cfg.utilization_max {
                triggers.push(Trigger {
                    t: t_ms,
                    origin: loudest,
                    cause: TriggerCause::UtilizationExceeded,
                    observed: classification.utilization,
                    threshold: cfg.utilization_max,
                });
            }
            let nbw_limit = cfg.nbw_factor * agents.permissible;
            for (node, hist) in agents.nbw_history.iter_mut().enumerate() {
                hist.push_back(acc.nodes[node].broadcast_bytes);
                while hist.len() > cfg.nbw_window_ticks {
                    hist.pop_front();
                }
                let nbw = hist.iter().sum::<u64>() as f64;
                if cfg.detectors.nbw && nbw > nbw_limit {
                    triggers.push(Trigger {
                        t: t_ms,
                        origin: node as NodeId,
                        cause: TriggerCause::NbwExceeded,
                        observed: nbw,
                        threshold: nbw_limit,
                    });
                }
            }
            // Attributed to the port the most repeated IPID entered on.
            let repeated = acc
                .sightings
                .values()
                .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)));
            if let (true, true, Some((src, times))) = (cfg.detectors.ipid, classification.ipid_loop, repeated) {
                let repeats = times.len();
                triggers.push(Trigger {
                    t: t_ms,
                    origin: *src,
                    cause: TriggerCause::IpidLoop,
                    observed: repeats as f64,
                    threshold: cfg.ipid_k as f64,
                });
            }
            let mut seen = HashSet::new();
            for trigger in triggers {
                if seen.insert((trigger.origin, trigger.cause)) {
                    let action = agents.states[trigger.origin as usize].handle_storm(&trigger, &mut agents.log);
                    self.actions.push((k, action));
                }
            }
        }

        self.ticks.push(TickRecord {
            index: k,
            t: t_ms,
            channel,
            classification,
            nodes: acc.nodes,
            ledger: acc.ledger,
            flooded_copies: acc.copies,
            ipid_sightings: sightings,
            spoofs_delivered: acc.spoofs_delivered,
            replies_generated: acc.replies_generated,
        });
    }

    fn finish(self) -> SimTrace {
        let (calibration, tickets, enabled) = match self.agents {
            Some(a) => (a.calibration, a.log.into_tickets(), true),
            None => (None, Vec::new(), false),
        };
        SimTrace {
            scenario: self.s.clone(),
            saturation_cap: self.cap,
            agents_enabled: enabled,
            calibration,
            ticks: self.ticks,
            tickets,
            actions: self.actions,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn share_and_spread_partition_exactly() {
        for total in [0u64, 1, 7, 40000] {
            let parts: u64 = (0..8).map(|i| share(total, 8, 5, i)).sum();
            assert_eq!(parts, total);
            let slots: u64 = (0..10).map(|s| spread(total, 10, s)).sum();
            assert_eq!(slots, total);
        }
        assert_eq!(share(3, 4, 2, 2), 1);
        assert_eq!(share(3, 4, 2, 1), 0);
    }
}
