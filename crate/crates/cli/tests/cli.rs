use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ics_scope_core::capture::{PcapFormat, PcapWriter};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ics-scope"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data/golden")
        .join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_pcap(path: &Path, frames: &[Vec<u8>]) {
    let mut w = PcapWriter::new(Vec::new(), 65535, PcapFormat::default()).unwrap();
    for (i, f) in frames.iter().enumerate() {
        w.write_frame(1_700_000_000_000_000 + i as i64, f, f.len() as u32)
            .unwrap();
    }
    fs::write(path, w.into_inner().unwrap()).unwrap();
}

fn arp_frame() -> Vec<u8> {
    let mut f = vec![0xff; 6];
    f.extend([0x02, 0, 0, 0, 0, 1, 0x08, 0x06]);
    f.extend([0, 1, 8, 0, 6, 4, 0, 1]);
    f.extend([0x02, 0, 0, 0, 0, 1, 192, 0, 2, 1]);
    f.extend([0, 0, 0, 0, 0, 0, 192, 0, 2, 2]);
    f
}

fn minimal_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("config.json");
    let text = format!(
        r#"{{"vantages": [{{"name": "ixp", "sample_interval": 16384, "snap_len": 128}}]{extra}}}"#
    );
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn version_prints_package_version() {
    let o = run(&["version"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn dissect_golden_modbus_reports_function_code() {
    let o = run(&[
        "dissect",
        golden("modbus_read_holding.pcap").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["protocol"], "modbus");
    assert_eq!(lines[0]["function_code"], 3);
    assert_eq!(lines[0]["verdict"], "wellformed");
}

#[test]
fn dissect_planted_malformed_packets() {
    for name in [
        "modbus_bad_protocol_id.pcap",
        "dnp3_bad_header_crc.pcap",
        "bacnet_bad_function.pcap",
    ] {
        let o = run(&["dissect", golden(name).to_str().unwrap()]);
        assert!(o.status.success());
        assert!(stdout(&o).contains(r#""verdict":"malformed""#), "{name}");
    }
}

#[test]
fn dissect_arp_only_capture_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let pcap = dir.path().join("arp.pcap");
    write_pcap(&pcap, &[arp_frame(), arp_frame()]);
    let o = run(&["dissect", pcap.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
}

#[test]
fn dissect_unreadable_file_exits_2() {
    let o = run(&["dissect", "/nonexistent/capture.pcap"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/capture.pcap"));
}

#[test]
fn analyze_empty_capture_writes_zero_reports() {
    let dir = tempfile::tempdir().unwrap();
    let pcap = dir.path().join("empty.pcap");
    write_pcap(&pcap, &[]);
    let config = minimal_config(dir.path(), r#", "captures": [{"path": "empty.pcap"}]"#);
    let out = dir.path().join("out");
    let o = run(&[
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sanitize = fs::read_to_string(out.join("sanitize.csv")).unwrap();
    assert_eq!(
        sanitize,
        "step,remaining_count,remaining_pct\n\
         ixp/candidates,0,\nixp/tunnels_removed,0,\nixp/malformed_removed,0,\n\
         ixp/dpi_removed,0,\nixp/port_only_baseline,0,\n"
    );
    let filters = fs::read_to_string(out.join("filters.csv")).unwrap();
    assert_eq!(filters.lines().nth(1), Some("total,0,,,,,"));
    for f in [
        "transitions.csv",
        "domestic.csv",
        "daily.tsv",
        "stability.csv",
        "asn_protocols.csv",
        "scan_overlap.csv",
    ] {
        assert_eq!(
            fs::read_to_string(out.join(f)).unwrap().lines().count(),
            1,
            "{f}"
        );
    }
}

#[test]
fn missing_honeypot_file_exits_2_naming_path() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("hp_ics.txt"), "").unwrap();
    let config = minimal_config(
        dir.path(),
        r#", "hp_all": "missing_hp_all.txt", "hp_ics": "hp_ics.txt""#,
    );
    let o = run(&[
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing_hp_all.txt"), "{}", stderr(&o));
}

#[test]
fn unknown_filter_family_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = minimal_config(dir.path(), "");
    let o = run(&[
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--filters",
        "telescopes",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_pcap_magic_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let pcap = dir.path().join("junk.pcap");
    fs::write(&pcap, [0u8; 64]).unwrap();
    let o = run(&["dissect", pcap.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_rejects_malformed_spec_json() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, "{ not json").unwrap();
    let o = run(&[
        "gen",
        spec.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_rejects_out_of_range_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"seed": 1, "start": "2023-01-01", "days": 10, "flows": [
            {"kind": "industrial", "protocol": "modbus",
             "src": {"cidr": "10.0.0.1/32"}, "dst": {"cidr": "10.0.0.2/32"},
             "schedule": {"start_day": 5, "end_day": 12, "packets_per_day": 1}}]}"#,
    )
    .unwrap();
    let o = run(&[
        "gen",
        spec.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("outside the 10-day corpus"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn gen_then_analyze_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let o = run(&["gen", "sanitize-100", "--out", corpus.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let config = corpus.join("config.json");
    let mut bundles = Vec::new();
    for out in ["a", "b"] {
        let out = dir.path().join(out);
        let o = run(&[
            "analyze",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        bundles.push(out);
    }
    for f in ics_scope_core::pipeline::BUNDLE_FILES {
        let a = fs::read(bundles[0].join(f)).unwrap();
        let b = fs::read(bundles[1].join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let sanitize = fs::read_to_string(bundles[0].join("sanitize.csv")).unwrap();
    assert!(sanitize.contains("ixp/candidates,100,100.0"));
    assert!(sanitize.contains("ixp/dpi_removed,13,13.0"));
}

#[test]
fn sanitize_subcommand_writes_only_the_sanitize_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    assert!(
        run(&["gen", "sanitize-100", "--out", corpus.to_str().unwrap()])
            .status
            .success()
    );
    let out = dir.path().join("out");
    let o = run(&[
        "sanitize",
        "--config",
        corpus.join("config.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let names: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names, ["sanitize.csv"]);
    let text = fs::read_to_string(out.join("sanitize.csv")).unwrap();
    let counts: Vec<&str> = text
        .lines()
        .skip(1)
        .take(4)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(counts, ["100", "99", "14", "13"]);
}

#[test]
fn missing_subcommand_is_usage_error() {
    assert_eq!(run(&[]).status.code(), Some(2));
}
