use stormctl_core::agents::{StormAction, SuppressionPolicy};
use stormctl_core::datasets::bundled_scenario;
use stormctl_core::sim::{run, run_with, saturation_cap, RunOptions, Scenario, SimTrace};

fn jabber(policy: SuppressionPolicy) -> Scenario {
    let mut s = Scenario::from_json(
        r#"{
          "schema": 1,
          "name": "jabber-with-unicast",
          "node_count": 4,
          "link_rate": 1000000000,
          "frame_size": 512,
          "tick_ms": 1.0,
          "duration_ms": 60.0,
          "seed": 9,
          "generator": { "amplitude": { "cap_fraction": 0.05 }, "unicast_fraction": 0.3 },
          "injectors": [
            { "kind": "faulty_nic", "start_ms": 10.0, "origin": 1, "frames_per_second": 400000.0 }
          ],
          "agent_config": {}
        }"#,
    )
    .unwrap();
    s.suppression_policy = policy;
    s
}

fn suppressed_ticks(trace: &SimTrace, node: u32) -> Vec<usize> {
    let until = trace
        .actions
        .iter()
        .find_map(|(k, a)| match a {
            StormAction::Suppress { node: n, until, .. } if *n == node => Some((*k, *until)),
            _ => None,
        })
        .expect("origin was suppressed");
    // Ticks fully inside the window.
    (until.0 as usize + 1..trace.ticks.len())
        .filter(|&k| trace.ticks[k].t + trace.scenario.tick_ms <= until.1)
        .collect()
}

#[test]
fn bandwidth_policy_keeps_unicast_packet_policy_drops_it() {
    let bw = run(&jabber(SuppressionPolicy::BandwidthBased)).unwrap();
    let pk = run(&jabber(SuppressionPolicy::PacketBased)).unwrap();
    let bw_ticks = suppressed_ticks(&bw, 1);
    let pk_ticks = suppressed_ticks(&pk, 1);
    assert!(!bw_ticks.is_empty() && !pk_ticks.is_empty());
    for &k in &bw_ticks {
        let n = bw.ticks[k].nodes[1];
        assert_eq!(n.broadcast_pkts, 0);
        assert!(n.total_pkts > 0, "unicast from node 1 should pass at tick {k}");
    }
    for &k in &pk_ticks {
        assert_eq!(pk.ticks[k].nodes[1].total_pkts, 0, "tick {k}");
    }
}

#[test]
fn suppression_leaves_other_nodes_alone() {
    let s = jabber(SuppressionPolicy::PacketBased);
    let with = run(&s).unwrap();
    let without = run_with(&s, RunOptions::without_agents()).unwrap();
    assert!(!with.tickets.is_empty());
    assert!(with.tickets.iter().all(|t| t.node == 1));
    for (a, b) in with.ticks.iter().zip(&without.ticks) {
        for node in [0, 2, 3] {
            assert_eq!(a.nodes[node].broadcast_emitted, b.nodes[node].broadcast_emitted);
            // The jabber saturates the channel without agents, so others can only gain.
            assert!(a.nodes[node].total_pkts >= b.nodes[node].total_pkts);
        }
    }
}

#[test]
fn loop_population_doubles_until_the_ceiling() {
    let s = Scenario::from_json(
        r#"{
          "schema": 1,
          "name": "bare-loop",
          "node_count": 6,
          "link_rate": 100000000,
          "frame_size": 512,
          "tick_ms": 1.0,
          "duration_ms": 4.0,
          "seed": 1,
          "injectors": [ { "kind": "loop", "start_ms": 0.0, "origin": 2, "replication_factor": 2 } ]
        }"#,
    )
    .unwrap();
    let trace = run_with(&s, RunOptions::without_agents()).unwrap();
    let cap = saturation_cap(s.link_rate, s.frame_size, s.tick_ms);
    let ceiling = cap.div_ceil(100).max(1);
    let mut pop = 0u64;
    for tick in &trace.ticks {
        let (mut generated, mut replicated) = (0, 0);
        for _ in 0..100 {
            if pop == 0 {
                pop = 1;
                generated += 1;
            } else {
                pop = (pop * 2).min(ceiling);
                replicated += pop;
            }
        }
        assert_eq!(tick.ledger.generated, generated);
        assert_eq!(tick.ledger.replicated, replicated);
        assert_eq!(tick.ledger.delivered, (generated + replicated).min(cap));
    }
}

#[test]
fn smurf_replies_come_from_every_other_node() {
    let s = bundled_scenario("smurf").unwrap();
    let trace = run_with(&s, RunOptions::without_agents()).unwrap();
    let n = s.node_count as u64;
    for w in trace.ticks.windows(2) {
        assert_eq!(w[1].replies_generated, (n - 1) * w[0].spoofs_delivered);
    }
    assert!(trace.ticks.iter().any(|t| t.spoofs_delivered > 0));
}

#[test]
fn operator_reconnect_reopens_the_port() {
    let s = jabber(SuppressionPolicy::PacketBased);
    let base = run(&s).unwrap();
    let first = base.tickets[0].t;
    let at = first + 5.0;
    let opts = RunOptions {
        reconnects: vec![(1, at)],
        ..RunOptions::default()
    };
    let trace = run_with(&s, opts).unwrap();
    let k = trace.ticks.iter().position(|t| t.t >= at).unwrap();
    assert!(trace.ticks[k].nodes[1].total_pkts > 0);
    assert!(base.ticks[k].nodes[1].total_pkts == 0);
    assert!(run_with(
        &s,
        RunOptions {
            reconnects: vec![(9, 1.0)],
            ..RunOptions::default()
        }
    )
    .is_err());
}

#[test]
fn same_seed_same_trace_other_seed_differs() {
    let s = bundled_scenario("loop-storm").unwrap();
    assert_eq!(run(&s).unwrap(), run(&s).unwrap());
    let s = bundled_scenario("table4-normal").unwrap();
    let mut other = s.clone();
    other.seed += 1;
    let a = run_with(&s, RunOptions::without_agents()).unwrap();
    let b = run_with(&other, RunOptions::without_agents()).unwrap();
    assert_ne!(a.ticks, b.ticks);
}
