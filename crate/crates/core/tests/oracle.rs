use std::path::Path;

use ics_scope_core::capture::read_capture;
use ics_scope_core::pipeline::{Pipeline, PipelineConfig};
use ics_scope_core::trafficgen::{builtin, generate_to_dir, GroundTruth, CONFIG_FILE};
use ics_scope_core::{Dissection, PacketRecord};

fn load(dir: &Path) -> Pipeline {
    let config = PipelineConfig::load(&dir.join(CONFIG_FILE)).unwrap();
    Pipeline::from_config(&config).unwrap()
}

fn records(p: &Pipeline) -> Vec<PacketRecord> {
    let (vantage, path) = &p.captures[0];
    read_capture(path, &p.vantages[vantage])
        .unwrap()
        .map(Result::unwrap)
        .collect()
}

fn check(name: &str) {
    let spec = builtin(name).unwrap().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let corpus = generate_to_dir(&spec, dir.path()).unwrap();
    let p = load(dir.path());
    let recs = records(&p);
    assert_eq!(recs.len(), corpus.truth.len(), "{name}: record count");
    for (r, t) in recs.iter().zip(&corpus.truth) {
        let o = p.process(r);
        let expected = Dissection {
            protocol: t.protocol,
            kind: t.dissector,
            role: t.role,
            function_code: t.function_code,
            verdict: t.verdict,
        };
        let ctx = || format!("{name} packet {}: {t:?}", t.index);
        assert_eq!(
            (r.ts, r.src_ip, r.dst_ip),
            (t.ts, t.src_ip, t.dst_ip),
            "{}",
            ctx()
        );
        assert_eq!(o.dissection, Some(expected), "{}", ctx());
        assert_eq!(o.sanitize, Some(t.sanitize), "{}", ctx());
        assert_eq!(o.direction, t.direction, "{}", ctx());
        assert_eq!(o.class.as_ref(), Some(&t.class), "{}", ctx());
    }
}

#[test]
fn industrial_stable_matches_ground_truth() {
    check("industrial-stable");
}

#[test]
fn scanner_sweep_matches_ground_truth() {
    check("scanner-sweep");
}

#[test]
fn mixed_matches_ground_truth() {
    check("mixed");
}

#[test]
fn sanitize_100_matches_ground_truth() {
    check("sanitize-100");
}

#[test]
fn ground_truth_round_trips_as_json_lines() {
    let spec = builtin("sanitize-100").unwrap().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let corpus = generate_to_dir(&spec, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("ground_truth.jsonl")).unwrap();
    let back: Vec<GroundTruth> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(back, corpus.truth);
    assert!(back.iter().enumerate().all(|(i, t)| t.index == i as u64));
}
