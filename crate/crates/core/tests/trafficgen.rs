use std::sync::Arc;

use ics_scope_core::classify::Label;
use ics_scope_core::ports::Direction;
use ics_scope_core::trafficgen::{
    builtin, generate, FlowKind, ScenarioSpec, Schedule, BUILTIN_SCENARIOS,
};
use ics_scope_core::{Dissector, Error, PacketRecord, ProtocolId, Transport, Verdict};

fn spec(name: &str) -> ScenarioSpec {
    builtin(name).unwrap().unwrap()
}

fn one_flow(protocol: ProtocolId, packets: u32, ratio: f64) -> ScenarioSpec {
    ScenarioSpec::from_json(&format!(
        r#"{{"seed": 3, "start": "2024-02-01", "days": 2, "flows": [
            {{"kind": "industrial", "protocol": "{protocol}",
              "src": {{"cidr": "10.0.0.0/24", "hosts": 3}}, "dst": {{"cidr": "10.1.0.0/30", "hosts": 2}},
              "schedule": {{"start_day": 0, "end_day": 1, "packets_per_day": {packets}}},
              "request_reply_ratio": {ratio}}}]}}"#
    ))
    .unwrap()
}

#[test]
fn builtin_scenarios_parse() {
    for (name, _) in BUILTIN_SCENARIOS {
        builtin(name).unwrap().unwrap();
    }
    assert!(builtin("nope").is_none());
}

#[test]
fn same_seed_gives_identical_bytes() {
    let s = spec("mixed");
    let (a, b) = (generate(&s).unwrap(), generate(&s).unwrap());
    assert_eq!(a.pcap_bytes(), b.pcap_bytes());
    assert_eq!(a.truth_jsonl(), b.truth_jsonl());

    let mut other = s.clone();
    other.seed += 1;
    assert_ne!(generate(&other).unwrap().pcap_bytes(), a.pcap_bytes());
}

#[test]
fn truth_is_index_aligned_and_time_ordered() {
    let c = generate(&spec("mixed")).unwrap();
    assert_eq!(c.truth.len(), c.packets.len());
    for (i, (t, p)) in c.truth.iter().zip(&c.packets).enumerate() {
        assert_eq!(t.index, i as u64);
        assert_eq!(t.ts, p.ts);
    }
    assert!(c.packets.windows(2).all(|w| w[0].ts <= w[1].ts));
}

#[test]
fn request_reply_ratio_is_exact() {
    for (packets, ratio) in [(10, 0.5), (7, 0.3), (50, 0.0), (13, 1.0), (9, 0.75)] {
        let c = generate(&one_flow(ProtocolId::Modbus, packets, ratio)).unwrap();
        let n = (2 * packets) as f64;
        let requests = c
            .truth
            .iter()
            .filter(|t| t.direction == Direction::Request)
            .count();
        assert_eq!(requests, (n * ratio).round() as usize, "{packets} {ratio}");
        assert_eq!(c.truth.len(), 2 * packets as usize);
    }
}

#[test]
fn sweep_is_request_only_and_non_industrial() {
    let c = generate(&spec("scanner-sweep")).unwrap();
    let (src, dst) = &c.hosts[0];
    assert_eq!((src.len(), dst.len()), (5, 1000));
    assert_eq!(c.truth.len(), 5000);
    assert!(c.truth.iter().all(|t| t.direction == Direction::Request));
    assert!(c
        .truth
        .iter()
        .all(|t| t.class.label == Label::NonIndustrial));
    // every source probes every destination exactly once
    let pairs: std::collections::BTreeSet<_> =
        c.truth.iter().map(|t| (t.src_ip, t.dst_ip)).collect();
    assert_eq!(pairs.len(), 5000);
}

#[test]
fn wellformed_packets_stay_identified_once_long_enough() {
    let c = generate(&spec("industrial-stable")).unwrap();
    let d = Dissector::new(Default::default());
    let vantage: Arc<str> = "t".into();
    for (p, t) in c.packets.iter().zip(&c.truth).step_by(37) {
        assert_eq!(t.verdict, Verdict::WellFormed);
        let full = p.frame.len();
        let hits: Vec<bool> = (0..=full)
            .map(|len| {
                PacketRecord::from_frame(0, p.frame[..len].to_vec(), full as u32, vantage.clone())
                    .ok()
                    .and_then(|r| d.dissect(&r))
                    .is_some_and(|x| x.protocol == t.protocol && x.verdict == Verdict::WellFormed)
            })
            .collect();
        let first = hits
            .iter()
            .position(|h| *h)
            .expect("identified at full length");
        assert!(hits[first..].iter().all(|h| *h), "{t:?}");
        assert!(first <= c.spec.snap_len as usize, "{t:?}");
    }
}

#[test]
fn snap_length_too_short_is_rejected() {
    let mut s = one_flow(ProtocolId::S7comm, 20, 0.5);
    s.snap_len = 80;
    let err = generate(&s).unwrap_err();
    assert!(
        matches!(err, Error::Scenario(ref m) if m.contains("snap_len")),
        "{err}"
    );
}

#[test]
fn invalid_specs_are_rejected() {
    let base = one_flow(ProtocolId::Modbus, 5, 0.5);
    let mut too_many = base.clone();
    too_many.flows[0].dst.hosts = 3;
    assert!(generate(&too_many)
        .unwrap_err()
        .to_string()
        .contains("holds 2"));

    let mut late = base.clone();
    late.flows[0].schedule = Schedule::Days {
        active_days: vec![0, 2],
        packets_per_day: 1,
    };
    assert!(generate(&late).is_err());

    let mut wrong_transport = base.clone();
    wrong_transport.flows[0].transport = Some(Transport::Udp);
    assert!(generate(&wrong_transport).is_err());

    let mut no_heuristic = base.clone();
    no_heuristic.flows[0].server_port = Some(33000);
    assert!(generate(&no_heuristic).is_err());

    let mut decoy = base.clone();
    decoy.flows[0].kind = FlowKind::DpiDecoy;
    assert!(generate(&decoy).is_err());

    let mut ratio = base;
    ratio.flows[0].request_reply_ratio = 1.5;
    assert!(generate(&ratio).is_err());

    assert!(ScenarioSpec::from_json(
        r#"{"seed": 1, "start": "2024-01-01", "days": 1, "flows": [], "extra": 1}"#
    )
    .is_err());
}

#[test]
fn heuristic_port_flows_are_unrelated_by_direction() {
    let mut s = one_flow(ProtocolId::Iec104, 10, 0.5);
    s.flows[0].server_port = Some(33000);
    let c = generate(&s).unwrap();
    assert!(c.truth.iter().all(|t| t.direction == Direction::Unrelated));
}
