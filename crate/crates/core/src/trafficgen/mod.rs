//! Labelled synthetic captures. Every packet comes with the dissection,
//! sanitize verdict, direction and traffic class it was built to have.

mod scenarios;
mod spec;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::net::Ipv4Addr;
use std::path::{Path, PathBuf};

use ipnet::Ipv4Net;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::capture::{PcapFormat, PcapWriter, Transport};
use crate::classify::{Reason, TrafficClass};
use crate::dissect::{DissectorKind, Role, Verdict};
use crate::enrich::{parse_mac, Asn, ScanHosts};
use crate::error::{Error, Result};
use crate::frame::{FrameBuilder, L4, TCP_PSH_ACK};
use crate::pipeline::{CaptureInput, PipelineConfig, VantageConfig};
use crate::ports::{Direction, PortRegistry, ProtocolId};
use crate::sanitize::SanitizeVerdict;
use crate::templates::{self, Message};

pub use scenarios::{builtin, BUILTIN_SCENARIOS};
pub use spec::*;

const DAY_MICROS: i64 = 86_400_000_000;
const EPHEMERAL: std::ops::RangeInclusive<u16> = 49152..=65535;
const DNS_PORT: u16 = 53;
const UNROUTED_MAC: [u8; 6] = [0x02, 0x00, 0x5E, 0x00, 0x00, 0x00];

/// Expected pipeline outcome for one generated packet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub index: u64,
    pub flow: usize,
    pub kind: FlowKind,
    pub ts: i64,
    pub src_ip: Ipv4Addr,
    pub dst_ip: Ipv4Addr,
    pub protocol: ProtocolId,
    pub dissector: DissectorKind,
    pub role: Role,
    pub function_code: Option<u16>,
    pub verdict: Verdict,
    pub sanitize: SanitizeVerdict,
    pub direction: Direction,
    pub class: TrafficClass,
}

#[derive(Debug, Clone)]
pub struct GeneratedPacket {
    pub ts: i64,
    /// Full frame before snap-length truncation.
    pub frame: Vec<u8>,
}

/// Host lists and lookup tables matching the generated traffic.
#[derive(Debug, Clone, Default)]
pub struct Sidecars {
    pub hp_all: BTreeSet<Ipv4Addr>,
    pub hp_ics: BTreeSet<Ipv4Addr>,
    pub rdns: BTreeMap<Ipv4Addr, String>,
    /// In flow order; a later line for the same prefix wins.
    pub asn: Vec<(Ipv4Net, Asn)>,
    pub geo: Vec<(Ipv4Net, String)>,
    pub scan: BTreeMap<ProtocolId, ScanHosts>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub spec: ScenarioSpec,
    pub packets: Vec<GeneratedPacket>,
    pub truth: Vec<GroundTruth>,
    pub sidecars: Sidecars,
    /// Hosts chosen for each flow as `(src hosts, dst hosts)`.
    pub hosts: Vec<(Vec<Ipv4Addr>, Vec<Ipv4Addr>)>,
}

fn pick_hosts(e: &EndpointSpec, rng: &mut ChaCha8Rng) -> Vec<Ipv4Addr> {
    let net = e.cidr.trunc();
    let base = u32::from(net.network());
    let capacity = e.capacity();
    let first = if capacity == 1u64 << (32 - net.prefix_len()) {
        0
    } else {
        1
    };
    let offsets: Vec<u64> = if e.hosts as u64 == capacity {
        (0..capacity).collect()
    } else {
        let mut v: Vec<u64> = index::sample(rng, capacity as usize, e.hosts)
            .into_iter()
            .map(|i| i as u64)
            .collect();
        v.sort_unstable();
        v
    };
    offsets
        .into_iter()
        .map(|o| Ipv4Addr::from(base.wrapping_add((o + first) as u32)))
        .collect()
}

/// Most specific registry prefix by exhaustive scan, independent of the
/// classifier's prefix map.
fn scanner_prefix_oracle(spec: &ScenarioSpec, ip: Ipv4Addr) -> Option<&str> {
    let mut best: Option<(u8, &str)> = None;
    for e in &spec.scanners {
        for p in &e.prefixes {
            if p.trunc().contains(&ip) && best.is_none_or(|(l, _)| p.prefix_len() > l) {
                best = Some((p.prefix_len(), &e.project));
            }
        }
    }
    best.map(|(_, p)| p)
}

fn rdns_oracle<'a>(spec: &'a ScenarioSpec, name: &str) -> Option<&'a str> {
    let name = name.to_lowercase();
    spec.scanners
        .iter()
        .find(|e| {
            e.rdns_patterns
                .iter()
                .any(|p| !p.is_empty() && name.contains(&p.to_lowercase()))
        })
        .map(|e| e.project.as_str())
}

fn request_message(f: &FlowSpec, rng: &mut ChaCha8Rng) -> Message {
    use templates::*;
    let t = f.transport();
    match f.protocol {
        ProtocolId::Modbus => modbus::read_request(
            rng.random(),
            rng.random_range(1..=247),
            rng.random_range(1..=4),
            rng.random_range(0..10_000),
            rng.random_range(1..=125),
        ),
        ProtocolId::S7comm => match rng.random_range(0..2) {
            0 => s7::setup_job(rng.random()),
            _ => s7::read_var_job(
                rng.random(),
                rng.random_range(1..100),
                rng.random_range(0..1024),
                4,
            ),
        },
        ProtocolId::EthernetIp => match (t, rng.random_range(0..2)) {
            (Transport::Tcp, 1) => enip::register_session(rng.random()),
            _ => enip::list_identity_request(t, rng.random()),
        },
        ProtocolId::Bacnet => match rng.random_range(0..4) {
            0 => bacnet::who_is(),
            _ => bacnet::read_property(rng.random(), rng.random_range(0..4_194_303), 85),
        },
        ProtocolId::Dnp3 => {
            let mut m = match rng.random_range(0..2) {
                0 => dnp3::read_class0(rng.random()),
                _ => dnp3::read_binary_inputs(rng.random(), 0, rng.random_range(1..64)),
            };
            m.transport = t;
            m
        }
        ProtocolId::HartIp => match rng.random_range(0..2) {
            0 => hartip::session_initiate(t, rng.random()),
            _ => hartip::keep_alive(t, rng.random()),
        },
        ProtocolId::Iec104 => match rng.random_range(0..3) {
            0 => iec104::u_frame(iec104::STARTDT_ACT),
            1 => iec104::u_frame(iec104::TESTFR_ACT),
            _ => iec104::interrogation(
                rng.random_range(0..32768),
                rng.random_range(0..32768),
                rng.random(),
            ),
        },
    }
}

fn reply_message(f: &FlowSpec, rng: &mut ChaCha8Rng) -> Message {
    use templates::*;
    let t = f.transport();
    match f.protocol {
        ProtocolId::Modbus => {
            let fc = rng.random_range(1..=4);
            match rng.random_range(0..8) {
                0 => modbus::exception(rng.random(), 1, fc, 2),
                _ => modbus::read_response(rng.random(), 1, fc, rng.random_range(1..=20)),
            }
        }
        ProtocolId::S7comm => match rng.random_range(0..2) {
            0 => s7::setup_ack_data(rng.random()),
            _ => s7::read_var_ack_data(rng.random(), &rng.random::<[u8; 4]>()),
        },
        ProtocolId::EthernetIp => {
            enip::list_identity_reply(t, rng.random(), "1756-L61/B LOGIX5561")
        }
        ProtocolId::Bacnet => {
            bacnet::read_property_ack(rng.random(), rng.random_range(0..4_194_303), 85)
        }
        ProtocolId::Dnp3 => {
            let mut m = dnp3::response(rng.random());
            m.transport = t;
            m
        }
        ProtocolId::HartIp => hartip::session_initiate_response(t, rng.random()),
        ProtocolId::Iec104 => match rng.random_range(0..2) {
            0 => iec104::u_frame(iec104::STARTDT_CON),
            _ => iec104::u_frame(iec104::TESTFR_CON),
        },
    }
}

fn l4(transport: Transport, sport: u16, dport: u16, rng: &mut ChaCha8Rng) -> L4 {
    match transport {
        Transport::Tcp => L4::Tcp {
            src_port: sport,
            dst_port: dport,
            seq: rng.random(),
            ack: rng.random(),
            flags: TCP_PSH_ACK,
            timestamps: None,
        },
        _ => L4::udp(sport, dport),
    }
}

struct Generator<'a> {
    spec: &'a ScenarioSpec,
    ports: PortRegistry,
    rng: ChaCha8Rng,
    macs: BTreeMap<Asn, [u8; 6]>,
    sidecars: Sidecars,
}

struct Built {
    frame: Vec<u8>,
    /// Offset of the ICS message inside the frame.
    l7_offset: usize,
    message: Message,
    to_server: bool,
    src: Ipv4Addr,
    dst: Ipv4Addr,
}

impl Generator<'_> {
    fn mac(&self, member: Option<Asn>) -> [u8; 6] {
        member
            .and_then(|m| self.macs.get(&m).copied())
            .unwrap_or(UNROUTED_MAC)
    }

    fn register_hosts(
        &mut self,
        f: &FlowSpec,
        e: &EndpointSpec,
        hosts: &[Ipv4Addr],
        side: &str,
    ) -> Result<()> {
        for (i, ip) in hosts.iter().enumerate() {
            match e.honeypot {
                HoneypotMark::None => {}
                HoneypotMark::All => {
                    self.sidecars.hp_all.insert(*ip);
                }
                HoneypotMark::Ics => {
                    self.sidecars.hp_all.insert(*ip);
                    self.sidecars.hp_ics.insert(*ip);
                }
            }
            if let Some(tpl) = &e.rdns {
                let name = tpl.replace("{i}", &i.to_string());
                if let Some(prev) = self.sidecars.rdns.insert(*ip, name.clone()) {
                    if prev != name {
                        return Err(Error::Scenario(format!(
                            "{side} host {ip} has two reverse DNS names: {prev}, {name}"
                        )));
                    }
                }
            }
            if e.scan != ScanMark::None {
                let s = self.sidecars.scan.entry(f.protocol).or_default();
                s.transport.insert(*ip);
                if e.scan == ScanMark::Application {
                    s.application.insert(*ip);
                }
            }
        }
        if let Some(asn) = e.asn {
            self.sidecars.asn.push((e.cidr.trunc(), asn));
        }
        if let Some(cc) = &e.country {
            self.sidecars
                .geo
                .push((e.cidr.trunc(), cc.to_ascii_uppercase()));
        }
        Ok(())
    }

    fn build(&mut self, f: &FlowSpec, client: Ipv4Addr, server: Ipv4Addr, request: bool) -> Built {
        let server_port = f.server_port(&self.ports);
        let transport = f.transport();
        let eph = self.rng.random_range(EPHEMERAL);
        let ip_id = self.rng.random();
        let (cmac, smac) = (self.mac(f.src.member), self.mac(f.dst.member));
        match f.kind {
            FlowKind::Backscatter => {
                let message = request_message(f, &mut self.rng);
                let inner_l4 = l4(transport, eph, server_port, &mut self.rng);
                let inner = FrameBuilder::new(client, server).l4(inner_l4).ip_id(ip_id);
                let quoted = inner.ip_datagram(&message.bytes);
                let outer = FrameBuilder::new(server, client)
                    .macs(smac, cmac)
                    .l4(L4::icmp(3, 3));
                let l7_offset = outer.overhead() + (inner.overhead() - 14);
                Built {
                    frame: outer.build(&quoted),
                    l7_offset,
                    message,
                    to_server: true,
                    src: server,
                    dst: client,
                }
            }
            FlowKind::DpiDecoy => {
                let message = templates::bacnet::dns_lookalike();
                let b = FrameBuilder::new(client, server)
                    .macs(cmac, smac)
                    .ip_id(ip_id)
                    .l4(L4::udp(DNS_PORT, server_port));
                Built {
                    frame: b.build(&message.bytes),
                    l7_offset: b.overhead(),
                    message,
                    to_server: true,
                    src: client,
                    dst: server,
                }
            }
            _ => {
                let mut message = if request {
                    request_message(f, &mut self.rng)
                } else {
                    reply_message(f, &mut self.rng)
                };
                if f.kind == FlowKind::Malformed {
                    message = templates::corrupt(&message);
                }
                let (src, dst, sport, dport, smac2, dmac2) = if request {
                    (client, server, eph, server_port, cmac, smac)
                } else {
                    (server, client, server_port, eph, smac, cmac)
                };
                let b = FrameBuilder::new(src, dst)
                    .macs(smac2, dmac2)
                    .ip_id(ip_id)
                    .l4(l4(transport, sport, dport, &mut self.rng));
                Built {
                    frame: b.build(&message.bytes),
                    l7_offset: b.overhead(),
                    message,
                    to_server: request,
                    src,
                    dst,
                }
            }
        }
    }

    fn class_of(&self, ips: [Ipv4Addr; 2]) -> TrafficClass {
        let mut reasons = BTreeSet::new();
        for ip in ips {
            if let Some(p) = scanner_prefix_oracle(self.spec, ip) {
                reasons.insert(Reason::ScannerPrefix(p.to_owned()));
            }
            if let Some(p) = self
                .sidecars
                .rdns
                .get(&ip)
                .and_then(|n| rdns_oracle(self.spec, n))
            {
                reasons.insert(Reason::ScannerRdns(p.to_owned()));
            }
            if self.sidecars.hp_all.contains(&ip) {
                reasons.insert(Reason::HoneypotAll);
            }
            if self.sidecars.hp_ics.contains(&ip) {
                reasons.insert(Reason::HoneypotIcs);
            }
        }
        TrafficClass::from_reasons(reasons)
    }
}

/// Builds the corpus for `spec`; identical specs give identical bytes.
pub fn generate(spec: &ScenarioSpec) -> Result<Corpus> {
    let ports = PortRegistry::default();
    spec.validate(&ports)?;
    let mut macs = BTreeMap::new();
    for (mac, asn) in &spec.interfaces {
        let m =
            parse_mac(mac).ok_or_else(|| Error::Scenario(format!("bad interface MAC `{mac}`")))?;
        macs.entry(*asn).or_insert(m);
    }
    let mut g = Generator {
        spec,
        ports,
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        macs,
        sidecars: Sidecars::default(),
    };

    let mut hosts = Vec::with_capacity(spec.flows.len());
    for f in &spec.flows {
        let src = pick_hosts(&f.src, &mut g.rng);
        let dst = pick_hosts(&f.dst, &mut g.rng);
        g.register_hosts(f, &f.src, &src, "src")?;
        g.register_hosts(f, &f.dst, &dst, "dst")?;
        hosts.push((src, dst));
    }

    let start = spec
        .start
        .and_hms_opt(0, 0, 0)
        .expect("midnight exists")
        .and_utc()
        .timestamp_micros();
    let mut staged: Vec<(i64, usize, u64, Vec<u8>, GroundTruth)> = Vec::new();
    for (fi, f) in spec.flows.iter().enumerate() {
        let (src_hosts, dst_hosts) = &hosts[fi];
        let n = f.packet_count();
        let requests = (n as f64 * f.request_reply_ratio).round() as u64;
        let server_port = f.server_port(&g.ports);
        let registered = g.ports.lookup(server_port) == Some(f.protocol);
        let mut k = 0u64;
        for day in f.schedule.days() {
            for _ in 0..f.schedule.packets_per_day() {
                let is_request = (k + 1) * requests / n > k * requests / n;
                let (client, server) = if f.kind == FlowKind::ScannerSweep {
                    let d = dst_hosts.len() as u64;
                    (
                        src_hosts[((k / d) % src_hosts.len() as u64) as usize],
                        dst_hosts[(k % d) as usize],
                    )
                } else {
                    (
                        src_hosts[g.rng.random_range(0..src_hosts.len())],
                        dst_hosts[g.rng.random_range(0..dst_hosts.len())],
                    )
                };
                let ts = start + day as i64 * DAY_MICROS + g.rng.random_range(0..DAY_MICROS);
                let b = g.build(f, client, server, is_request);
                let needed = b.l7_offset + b.message.ident_len;
                if needed > spec.snap_len as usize {
                    return Err(Error::Scenario(format!(
                        "flow {fi}: {} message needs {needed} captured bytes but snap_len is {}",
                        f.protocol, spec.snap_len
                    )));
                }
                let port_role = match (registered, b.to_server) {
                    (false, _) => Role::Unknown,
                    (true, true) => Role::Request,
                    (true, false) => Role::Reply,
                };
                let direction = match (f.kind, registered, b.to_server) {
                    (FlowKind::Backscatter, _, _) | (_, false, _) => Direction::Unrelated,
                    (_, true, true) => Direction::Request,
                    (_, true, false) => Direction::Reply,
                };
                let sanitize = match f.kind {
                    FlowKind::Backscatter => SanitizeVerdict::DroppedTunnel,
                    FlowKind::Malformed => SanitizeVerdict::DroppedMalformed,
                    FlowKind::DpiDecoy => SanitizeVerdict::DroppedKnownProtocol,
                    _ => SanitizeVerdict::Kept,
                };
                let truth = GroundTruth {
                    index: 0,
                    flow: fi,
                    kind: f.kind,
                    ts,
                    src_ip: b.src,
                    dst_ip: b.dst,
                    protocol: f.protocol,
                    dissector: if registered {
                        DissectorKind::Normal
                    } else {
                        DissectorKind::Heuristic
                    },
                    role: b.message.expected_role(port_role),
                    function_code: b.message.function_code,
                    verdict: if b.message.malformed {
                        Verdict::Malformed
                    } else {
                        Verdict::WellFormed
                    },
                    sanitize,
                    direction,
                    class: g.class_of([b.src, b.dst]),
                };
                staged.push((ts, fi, k, b.frame, truth));
                k += 1;
            }
        }
    }
    staged.sort_by_key(|s| (s.0, s.1, s.2));

    let mut packets = Vec::with_capacity(staged.len());
    let mut truth = Vec::with_capacity(staged.len());
    for (i, (ts, _, _, frame, mut t)) in staged.into_iter().enumerate() {
        t.index = i as u64;
        packets.push(GeneratedPacket { ts, frame });
        truth.push(t);
    }
    Ok(Corpus {
        spec: spec.clone(),
        packets,
        truth,
        sidecars: g.sidecars,
        hosts,
    })
}

pub const CAPTURE_FILE: &str = "capture.pcap";
pub const TRUTH_FILE: &str = "ground_truth.jsonl";
pub const CONFIG_FILE: &str = "config.json";

impl Corpus {
    /// The capture as pcap bytes, truncated to the scenario's snap length.
    pub fn pcap_bytes(&self) -> Vec<u8> {
        let snap = self.spec.snap_len as usize;
        let mut w = PcapWriter::new(Vec::new(), self.spec.snap_len, PcapFormat::default())
            .expect("in-memory write");
        for p in &self.packets {
            let cut = p.frame.len().min(snap);
            w.write_frame(p.ts, &p.frame[..cut], p.frame.len() as u32)
                .expect("in-memory write");
        }
        w.into_inner().expect("in-memory write")
    }

    pub fn truth_jsonl(&self) -> String {
        let mut s = String::new();
        for t in &self.truth {
            s.push_str(&serde_json::to_string(t).expect("ground truth serializes"));
            s.push('\n');
        }
        s
    }

    /// Pipeline configuration pointing at the sidecar files.
    pub fn config(&self) -> PipelineConfig {
        let p = |s: &str| Some(PathBuf::from(s));
        PipelineConfig {
            vantages: vec![VantageConfig {
                name: self.spec.vantage.clone(),
                sample_interval: self.spec.sample_interval,
                snap_len: self.spec.snap_len,
            }],
            captures: vec![CaptureInput {
                vantage: Some(self.spec.vantage.clone()),
                path: PathBuf::from(CAPTURE_FILE),
            }],
            scanners: p("scanners.json"),
            hp_all: p("hp_all.txt"),
            hp_ics: p("hp_ics.txt"),
            rdns: p("rdns.csv"),
            asn_table: p("asn.txt"),
            geo: p("geo.csv"),
            cones: p("cones.json"),
            interfaces: self.spec.interfaces.clone(),
            scan_snapshot: p("scan_snapshot.json"),
            ..PipelineConfig::default()
        }
    }

    /// Writes the capture, ground truth, sidecars and `config.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, bytes: &[u8]| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))
        };
        put(CAPTURE_FILE, &self.pcap_bytes())?;
        put(TRUTH_FILE, self.truth_jsonl().as_bytes())?;
        put("scanners.json", pretty(&self.spec.scanners).as_bytes())?;
        let lines =
            |set: &BTreeSet<Ipv4Addr>| set.iter().map(|ip| format!("{ip}\n")).collect::<String>();
        put("hp_all.txt", lines(&self.sidecars.hp_all).as_bytes())?;
        put("hp_ics.txt", lines(&self.sidecars.hp_ics).as_bytes())?;

        let mut rdns = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut rdns);
            let csv_err = |e: csv::Error| Error::Csv {
                path: dir.join("rdns.csv"),
                source: e,
            };
            w.write_record(["ip", "name"]).map_err(csv_err)?;
            for (ip, name) in &self.sidecars.rdns {
                w.write_record([ip.to_string(), name.clone()])
                    .map_err(csv_err)?;
            }
            w.flush().map_err(|e| Error::io(dir.join("rdns.csv"), e))?;
        }
        put("rdns.csv", &rdns)?;

        let mut asn = String::new();
        for (net, a) in &self.sidecars.asn {
            asn.push_str(&format!("{net} {a}\n"));
        }
        put("asn.txt", asn.as_bytes())?;
        let mut geo = String::from("prefix,country\n");
        for (net, cc) in &self.sidecars.geo {
            geo.push_str(&format!("{net},{cc}\n"));
        }
        put("geo.csv", geo.as_bytes())?;
        let cones: BTreeMap<String, &Vec<Asn>> = self
            .spec
            .cones
            .iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        put("cones.json", pretty(&cones).as_bytes())?;
        put("scan_snapshot.json", pretty(&self.sidecars.scan).as_bytes())?;
        put(CONFIG_FILE, pretty(&self.config()).as_bytes())?;
        Ok(())
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("sidecar serializes") + "\n"
}

/// Generates `spec` into `dir`.
pub fn generate_to_dir(spec: &ScenarioSpec, dir: &Path) -> Result<Corpus> {
    let corpus = generate(spec)?;
    corpus.write(dir)?;
    Ok(corpus)
}
