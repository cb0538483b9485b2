//! ICS protocol identification in truncated packets.
//!
//! Identification follows the usual split between *normal* dissectors, keyed
//! on the registered port, and *heuristic* dissectors that pattern-match
//! protocol fields on any port. A normal dissector reports `Malformed` when
//! the entry magic matches but a constrained header field does not; the
//! heuristic path only accepts well-formed packets.

mod bacnet;
pub mod dnp3;
mod enip;
mod hartip;
mod iec104;
mod modbus;
mod opcodes;
mod s7;

use serde::{Deserialize, Serialize};

use crate::capture::{parse_ipv4, PacketRecord, Transport};
use crate::ports::{PortRegistry, ProtocolId};

pub use opcodes::action_name;

/// Heuristic trial order, most selective magic first.
pub const HEURISTIC_ORDER: [ProtocolId; 3] =
    [ProtocolId::Iec104, ProtocolId::Dnp3, ProtocolId::S7comm];

/// ICMP types whose body quotes the offending datagram.
pub const ICMP_ERROR_TYPES: [u8; 3] = [3, 11, 12];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DissectorKind {
    Normal,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Request,
    Reply,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    #[serde(rename = "wellformed")]
    WellFormed,
    Malformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dissection {
    pub protocol: ProtocolId,
    pub kind: DissectorKind,
    pub role: Role,
    pub function_code: Option<u16>,
    pub verdict: Verdict,
}

impl Dissection {
    pub(crate) fn new(
        protocol: ProtocolId,
        role: Role,
        function_code: Option<u16>,
        malformed: bool,
    ) -> Self {
        Dissection {
            protocol,
            kind: DissectorKind::Normal,
            role,
            function_code,
            verdict: if malformed {
                Verdict::Malformed
            } else {
                Verdict::WellFormed
            },
        }
    }

    pub fn is_malformed(&self) -> bool {
        self.verdict == Verdict::Malformed
    }
}

/// Why a single protocol dissector declined a payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reject {
    NotThisProtocol,
    /// TPKT/COTP traffic on port 102 that carries an ISO session layer
    /// (MMS, ICCP) rather than S7.
    ForeignIso,
}

/// Transport payload handed to a dissector.
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    pub payload: &'a [u8],
    /// Payload length on the wire; larger than `payload.len()` under snap
    /// truncation.
    pub orig_len: usize,
    pub transport: Transport,
    pub src_port: u16,
    pub dst_port: u16,
}

impl<'a> Segment<'a> {
    /// Untruncated TCP payload without port context.
    pub fn tcp(payload: &'a [u8]) -> Self {
        Segment {
            payload,
            orig_len: payload.len(),
            transport: Transport::Tcp,
            src_port: 0,
            dst_port: 0,
        }
    }

    pub fn udp(payload: &'a [u8]) -> Self {
        Segment {
            transport: Transport::Udp,
            ..Segment::tcp(payload)
        }
    }

    pub fn with_orig_len(mut self, orig_len: usize) -> Self {
        self.orig_len = orig_len.max(self.payload.len());
        self
    }

    /// Checks a declared message length against what was on the wire. A
    /// length beyond the captured bytes is fine as long as the original
    /// payload could hold it.
    pub(crate) fn fits(&self, declared: usize) -> bool {
        declared <= self.orig_len
    }
}

pub type ProbeResult = Result<Dissection, Reject>;

pub fn dissect_modbus(seg: &Segment, role_hint: Role) -> ProbeResult {
    modbus::dissect(seg, role_hint)
}

pub fn dissect_bacnet(seg: &Segment, role_hint: Role) -> ProbeResult {
    bacnet::dissect(seg, role_hint)
}

pub fn dissect_s7(seg: &Segment, role_hint: Role) -> ProbeResult {
    s7::dissect(seg, role_hint)
}

pub fn dissect_ethernetip(seg: &Segment, role_hint: Role) -> ProbeResult {
    enip::dissect(seg, role_hint)
}

pub fn dissect_dnp3(seg: &Segment, role_hint: Role) -> ProbeResult {
    dnp3::dissect(seg, role_hint)
}

pub fn dissect_hartip(seg: &Segment, role_hint: Role) -> ProbeResult {
    hartip::dissect(seg, role_hint)
}

pub fn dissect_iec104(seg: &Segment, role_hint: Role) -> ProbeResult {
    iec104::dissect(seg, role_hint)
}

/// Runs one protocol's dissector on the normal path.
pub fn dissect_as(protocol: ProtocolId, seg: &Segment, role_hint: Role) -> ProbeResult {
    match protocol {
        ProtocolId::Modbus => dissect_modbus(seg, role_hint),
        ProtocolId::S7comm => dissect_s7(seg, role_hint),
        ProtocolId::EthernetIp => dissect_ethernetip(seg, role_hint),
        ProtocolId::Bacnet => dissect_bacnet(seg, role_hint),
        ProtocolId::Dnp3 => dissect_dnp3(seg, role_hint),
        ProtocolId::HartIp => dissect_hartip(seg, role_hint),
        ProtocolId::Iec104 => dissect_iec104(seg, role_hint),
    }
}

/// Runs one protocol's dissector on the heuristic path, where any header
/// deviation means "not this protocol".
pub fn dissect_heuristic(protocol: ProtocolId, seg: &Segment) -> Option<Dissection> {
    match dissect_as(protocol, seg, Role::Unknown) {
        Ok(d) if !d.is_malformed() => Some(Dissection {
            kind: DissectorKind::Heuristic,
            ..d
        }),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Absent {
    NoPayload,
    ForeignIso,
    Unidentified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    Identified(Dissection),
    Absent(Absent),
}

impl Probe {
    pub fn identified(self) -> Option<Dissection> {
        match self {
            Probe::Identified(d) => Some(d),
            Probe::Absent(_) => None,
        }
    }
}

/// Port-driven dissection with heuristic fallback.
#[derive(Debug, Clone, Default)]
pub struct Dissector {
    ports: PortRegistry,
}

impl Dissector {
    pub fn new(ports: PortRegistry) -> Self {
        Dissector { ports }
    }

    pub fn ports(&self) -> &PortRegistry {
        &self.ports
    }

    pub fn dissect(&self, record: &PacketRecord) -> Option<Dissection> {
        self.probe(record).identified()
    }

    pub fn probe(&self, record: &PacketRecord) -> Probe {
        match record.transport {
            Transport::Tcp | Transport::Udp => {
                if record.payload().is_empty() {
                    return Probe::Absent(Absent::NoPayload);
                }
                let seg = Segment {
                    payload: record.payload(),
                    orig_len: record.payload_orig_len().max(record.payload().len()),
                    transport: record.transport,
                    src_port: record.src_port,
                    dst_port: record.dst_port,
                };
                self.probe_segment(&seg)
            }
            Transport::Icmp => match quoted_segment(record) {
                Some(seg) if !seg.payload.is_empty() => self.probe_segment(&seg),
                Some(_) => Probe::Absent(Absent::NoPayload),
                None => Probe::Absent(Absent::Unidentified),
            },
        }
    }

    pub fn probe_segment(&self, seg: &Segment) -> Probe {
        let mut foreign = false;
        let mut tried: Option<ProtocolId> = None;
        for (port, role) in [(seg.dst_port, Role::Request), (seg.src_port, Role::Reply)] {
            let Some(protocol) = self.ports.lookup(port) else {
                continue;
            };
            if tried == Some(protocol) || !self.ports.carries(protocol, seg.transport) {
                continue;
            }
            tried = Some(protocol);
            match dissect_as(protocol, seg, role) {
                Ok(d) => return Probe::Identified(d),
                Err(Reject::ForeignIso) => foreign = true,
                Err(Reject::NotThisProtocol) => {}
            }
        }
        for protocol in HEURISTIC_ORDER {
            if !self.ports.carries(protocol, seg.transport) {
                continue;
            }
            if let Some(d) = dissect_heuristic(protocol, seg) {
                return Probe::Identified(d);
            }
        }
        Probe::Absent(if foreign {
            Absent::ForeignIso
        } else {
            Absent::Unidentified
        })
    }
}

/// The TCP/UDP datagram quoted in an ICMP error message.
pub fn quoted_segment(record: &PacketRecord) -> Option<Segment<'_>> {
    let (kind, _) = record.icmp_type_code()?;
    if !ICMP_ERROR_TYPES.contains(&kind) {
        return None;
    }
    let quote = record.payload();
    let ip = parse_ipv4(quote).ok()?;
    let quote = &quote[..ip.captured_len];
    let l4 = &quote[ip.header_len..];
    if l4.len() < 4 {
        return None;
    }
    let l4_len = match ip.transport {
        Transport::Tcp if l4.len() >= 13 => ((l4[12] >> 4) as usize * 4).max(20),
        Transport::Tcp => 20,
        Transport::Udp => 8,
        Transport::Icmp => return None,
    };
    let start = (ip.header_len + l4_len).min(quote.len());
    let payload = &quote[start..];
    let orig_len = ip
        .total_len
        .saturating_sub(ip.header_len + l4_len)
        .max(payload.len());
    Some(Segment {
        payload,
        orig_len,
        transport: ip.transport,
        src_port: u16::from_be_bytes([l4[0], l4[1]]),
        dst_port: u16::from_be_bytes([l4[2], l4[3]]),
    })
}

pub(crate) fn be16(b: &[u8], at: usize) -> u16 {
    u16::from_be_bytes([b[at], b[at + 1]])
}

pub(crate) fn le16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

pub(crate) fn le32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}
