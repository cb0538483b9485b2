//! Reference frames with known dissections. The committed corpus under
//! `data/golden/` is regenerated from [`corpus`] with
//! `ICS_SCOPE_BLESS=1 cargo test -p ics-scope-core golden`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::capture::{PcapWriter, Transport};
use crate::dissect::{Dissection, DissectorKind, Role, Verdict};
use crate::error::{Error, Result};
use crate::frame::{FrameBuilder, L4};
use crate::ports::ProtocolId;
use crate::templates::{self, Message};

const CLIENT: [u8; 4] = [192, 0, 2, 10];
const SERVER: [u8; 4] = [198, 51, 100, 20];
const EPHEMERAL: u16 = 49321;
/// 2024-03-01T00:00:00Z
const BASE_TS: i64 = 1_709_251_200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub protocol: Option<ProtocolId>,
    pub kind: Option<DissectorKind>,
    pub role: Option<Role>,
    pub function_code: Option<u16>,
    pub verdict: Option<Verdict>,
}

impl Expected {
    fn from_dissection(d: Option<Dissection>) -> Self {
        Expected {
            protocol: d.map(|d| d.protocol),
            kind: d.map(|d| d.kind),
            role: d.map(|d| d.role),
            function_code: d.and_then(|d| d.function_code),
            verdict: d.map(|d| d.verdict),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GoldenPacket {
    pub name: &'static str,
    pub frame: Vec<u8>,
    pub expected: Option<Dissection>,
    /// Framed so that its length prefix at the protocol's minimum
    /// identifiable length is exactly enough for identification.
    pub min_length: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    #[serde(flatten)]
    pub expected: Expected,
    pub min_length: bool,
}

fn to_server(m: &Message, server_port: u16, vlan: bool) -> Vec<u8> {
    frame(m, CLIENT, SERVER, EPHEMERAL, server_port, vlan)
}

fn from_server(m: &Message, server_port: u16, vlan: bool) -> Vec<u8> {
    frame(m, SERVER, CLIENT, server_port, EPHEMERAL, vlan)
}

fn frame(m: &Message, src: [u8; 4], dst: [u8; 4], sport: u16, dport: u16, vlan: bool) -> Vec<u8> {
    let l4 = match m.transport {
        Transport::Tcp => L4::tcp_ts(sport, dport, 0x0100_0000),
        Transport::Udp => L4::udp(sport, dport),
        Transport::Icmp => unreachable!("templates ride on TCP or UDP"),
    };
    let mut b = FrameBuilder::new(src, dst).l4(l4);
    if vlan {
        b = b.vlan(100);
    }
    b.build(&m.bytes)
}

fn normal(m: &Message, port_role: Role) -> Option<Dissection> {
    Some(Dissection {
        protocol: m.protocol,
        kind: DissectorKind::Normal,
        role: m.expected_role(port_role),
        function_code: m.function_code,
        verdict: if m.malformed {
            Verdict::Malformed
        } else {
            Verdict::WellFormed
        },
    })
}

fn heuristic(m: &Message) -> Option<Dissection> {
    Some(Dissection {
        kind: DissectorKind::Heuristic,
        ..normal(m, Role::Unknown)?
    })
}

pub fn corpus() -> Vec<GoldenPacket> {
    use templates::*;
    let udp = Transport::Udp;
    let tcp = Transport::Tcp;
    let mut out = Vec::new();
    let mut push = |name, frame, expected, min_length| {
        out.push(GoldenPacket {
            name,
            frame,
            expected,
            min_length,
        })
    };

    let m = modbus::read_request(1, 1, 3, 0, 10);
    push(
        "modbus_read_holding",
        to_server(&m, 502, false),
        normal(&m, Role::Request),
        true,
    );
    let m = s7::setup_ack_data(1);
    push(
        "s7comm_setup_ack_data",
        from_server(&m, 102, false),
        normal(&m, Role::Reply),
        true,
    );
    let m = enip::list_identity_reply(udp, 0x1122, "1756-L61/B LOGIX5561");
    push(
        "ethernetip_list_identity_reply",
        from_server(&m, 44818, false),
        normal(&m, Role::Reply),
        true,
    );
    let m = bacnet::read_property(1, 1234, 85);
    push(
        "bacnet_read_property",
        to_server(&m, 47808, false),
        normal(&m, Role::Request),
        true,
    );
    let mut m = dnp3::read_binary_inputs(0, 0, 10);
    m.transport = udp;
    push(
        "dnp3_read_udp",
        to_server(&m, 20000, false),
        normal(&m, Role::Request),
        true,
    );
    let m = hartip::session_initiate(tcp, 1);
    push(
        "hartip_session_initiate",
        to_server(&m, 5094, true),
        normal(&m, Role::Request),
        true,
    );
    let m = iec104::u_frame(iec104::STARTDT_ACT);
    push(
        "iec104_startdt_act",
        to_server(&m, 2404, true),
        normal(&m, Role::Request),
        true,
    );

    let m = modbus::exception(2, 1, 3, 2);
    push(
        "modbus_exception",
        from_server(&m, 502, false),
        normal(&m, Role::Reply),
        false,
    );
    let m = corrupt(&modbus::read_request(3, 1, 3, 0, 10));
    push(
        "modbus_bad_protocol_id",
        to_server(&m, 502, false),
        normal(&m, Role::Request),
        false,
    );
    let m = s7::setup_job(1);
    push(
        "s7comm_setup_job",
        to_server(&m, 102, false),
        normal(&m, Role::Request),
        false,
    );
    let m = enip::list_identity_request(udp, 0x1122);
    push(
        "ethernetip_list_identity",
        to_server(&m, 44818, false),
        normal(&m, Role::Request),
        false,
    );
    let m = corrupt(&bacnet::who_is());
    push(
        "bacnet_bad_function",
        to_server(&m, 47808, false),
        normal(&m, Role::Request),
        false,
    );
    let m = corrupt(&dnp3::read_class0(2));
    push(
        "dnp3_bad_header_crc",
        to_server(&m, 20000, false),
        normal(&m, Role::Request),
        false,
    );
    let m = corrupt(&hartip::keep_alive(tcp, 3));
    push(
        "hartip_bad_message_type",
        to_server(&m, 5094, false),
        normal(&m, Role::Request),
        false,
    );
    let m = iec104::u_frame(iec104::TESTFR_ACT);
    push(
        "iec104_heuristic_port",
        to_server(&m, 33000, false),
        heuristic(&m),
        false,
    );
    let m = dnp3::response(4);
    push(
        "dnp3_heuristic_port",
        from_server(&m, 33001, false),
        heuristic(&m),
        false,
    );

    // ISO session (MMS) connect on port 102
    let mms = Message {
        bytes: vec![
            0x03, 0x00, 0x00, 0x16, 0x02, 0xF0, 0x80, 0x0D, 0x0D, 0x05, 0x06, 0x13, 0x01, 0x00,
            0x16, 0x01, 0x02, 0x14, 0x02, 0x00, 0x02, 0x00,
        ],
        ..s7::setup_job(1)
    };
    push(
        "iso_session_port_102",
        to_server(&mms, 102, false),
        None,
        false,
    );

    // port unreachable quoting a Modbus request
    let m = modbus::read_request(5, 1, 3, 100, 2);
    let quoted = FrameBuilder::new(CLIENT, SERVER)
        .l4(L4::tcp(EPHEMERAL, 502))
        .ip_datagram(&m.bytes);
    let icmp = FrameBuilder::new(SERVER, CLIENT)
        .l4(L4::icmp(3, 3))
        .build(&quoted);
    push(
        "modbus_in_icmp_unreachable",
        icmp,
        normal(&m, Role::Request),
        false,
    );

    out
}

pub fn manifest(corpus: &[GoldenPacket]) -> Vec<ManifestEntry> {
    corpus
        .iter()
        .map(|g| ManifestEntry {
            file: format!("{}.pcap", g.name),
            expected: Expected::from_dissection(g.expected),
            min_length: g.min_length,
        })
        .collect()
}

pub fn pcap_bytes(g: &GoldenPacket) -> Vec<u8> {
    let mut w = PcapWriter::new(Vec::new(), 65535, Default::default()).expect("in-memory write");
    w.write_frame(BASE_TS, &g.frame, g.frame.len() as u32)
        .expect("in-memory write");
    w.into_inner().expect("in-memory write")
}

/// Writes one pcap per golden packet plus `manifest.json`.
pub fn write_corpus(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let corpus = corpus();
    for g in &corpus {
        let path = dir.join(format!("{}.pcap", g.name));
        fs::write(&path, pcap_bytes(g)).map_err(|e| Error::io(&path, e))?;
    }
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest(&corpus)).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capture::{CaptureMeta, PacketRecord};
    use crate::dissect::Dissector;
    use std::path::PathBuf;

    fn record(frame: &[u8]) -> PacketRecord {
        PacketRecord::from_frame(BASE_TS, frame, frame.len() as u32, "golden".into()).unwrap()
    }

    #[test]
    fn golden_frames_dissect_as_expected() {
        let d = Dissector::default();
        for g in corpus() {
            assert_eq!(d.dissect(&record(&g.frame)), g.expected, "{}", g.name);
        }
    }

    #[test]
    fn golden_frames_identify_at_min_length() {
        let d = Dissector::default();
        let mut seen = Vec::new();
        for g in corpus().into_iter().filter(|g| g.min_length) {
            let protocol = g.expected.unwrap().protocol;
            seen.push(protocol);
            let full = record(&g.frame);
            let t = protocol.min_identifiable_length();
            let at = d.dissect(&full.truncated_to(t).unwrap());
            assert_eq!(at.map(|x| x.protocol), Some(protocol), "{} at {t}", g.name);
            let below = full.truncated_to(t - 1).unwrap();
            assert_eq!(d.dissect(&below), None, "{} at {}", g.name, t - 1);
        }
        seen.sort();
        assert_eq!(seen, ProtocolId::ALL.to_vec());
    }

    #[test]
    fn committed_corpus_is_current() {
        let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/golden");
        if std::env::var_os("ICS_SCOPE_BLESS").is_some() {
            write_corpus(&dir).unwrap();
        }
        let corpus = corpus();
        for g in &corpus {
            let path = dir.join(format!("{}.pcap", g.name));
            let bytes = fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(bytes, pcap_bytes(g), "{} is stale", path.display());
            let meta = CaptureMeta::new("golden", 1, 65535).unwrap();
            let records: Vec<_> = crate::capture::read_capture(&path, &meta)
                .unwrap()
                .collect::<Result<_>>()
                .unwrap();
            assert_eq!(records.len(), 1);
        }
        let text = fs::read_to_string(dir.join("manifest.json")).unwrap();
        let committed: Vec<ManifestEntry> = serde_json::from_str(&text).unwrap();
        assert_eq!(committed, manifest(&corpus));
    }
}
