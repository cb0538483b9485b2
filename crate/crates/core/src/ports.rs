//! Protocol identities and the well-known port registry.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::capture::{PacketRecord, Transport};
use crate::error::{Error, Result};

const DEFAULT_PORTS: &str = include_str!("../data/ports.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolId {
    Modbus,
    S7comm,
    #[serde(rename = "ethernetip")]
    EthernetIp,
    Bacnet,
    Dnp3,
    #[serde(rename = "hartip")]
    HartIp,
    Iec104,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 7] = [
        ProtocolId::Modbus,
        ProtocolId::S7comm,
        ProtocolId::EthernetIp,
        ProtocolId::Bacnet,
        ProtocolId::Dnp3,
        ProtocolId::HartIp,
        ProtocolId::Iec104,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolId::Modbus => "modbus",
            ProtocolId::S7comm => "s7comm",
            ProtocolId::EthernetIp => "ethernetip",
            ProtocolId::Bacnet => "bacnet",
            ProtocolId::Dnp3 => "dnp3",
            ProtocolId::HartIp => "hartip",
            ProtocolId::Iec104 => "iec104",
        }
    }

    /// Smallest captured frame length (Ethernet header included) at which
    /// the reference packet of this protocol is still identified.
    pub fn min_identifiable_length(self) -> usize {
        match self {
            ProtocolId::Modbus => 74,
            ProtocolId::S7comm => 93,
            ProtocolId::EthernetIp => 74,
            ProtocolId::Bacnet => 46,
            ProtocolId::Dnp3 => 62,
            ProtocolId::HartIp => 78,
            ProtocolId::Iec104 => 76,
        }
    }
}

pub fn min_identifiable_length(protocol: ProtocolId) -> usize {
    protocol.min_identifiable_length()
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        ProtocolId::ALL
            .into_iter()
            .find(|p| p.name() == lower)
            .ok_or_else(|| Error::Invalid(format!("unknown protocol `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Request,
    Reply,
    Unrelated,
}

#[derive(Debug, Deserialize)]
struct RegistryEntry {
    protocol: ProtocolId,
    ports: Vec<String>,
    transports: Vec<Transport>,
}

/// Maps well-known ICS ports to protocols.
#[derive(Debug, Clone)]
pub struct PortRegistry {
    by_port: BTreeMap<u16, ProtocolId>,
    transports: BTreeMap<ProtocolId, Vec<Transport>>,
}

impl Default for PortRegistry {
    fn default() -> Self {
        Self::from_json(DEFAULT_PORTS).expect("bundled port registry is valid")
    }
}

impl PortRegistry {
    pub fn from_json(text: &str) -> Result<Self> {
        let entries: Vec<RegistryEntry> = serde_json::from_str(text)
            .map_err(|e| Error::Invalid(format!("port registry: {e}")))?;
        let mut by_port = BTreeMap::new();
        let mut transports = BTreeMap::new();
        for entry in entries {
            if entry.ports.is_empty() {
                return Err(Error::Invalid(format!(
                    "port registry: {} has no ports",
                    entry.protocol
                )));
            }
            for spec in &entry.ports {
                let (lo, hi) = parse_port_range(spec)?;
                for port in lo..=hi {
                    if let Some(other) = by_port.insert(port, entry.protocol) {
                        if other != entry.protocol {
                            return Err(Error::Invalid(format!(
                                "port registry: port {port} claimed by {other} and {}",
                                entry.protocol
                            )));
                        }
                    }
                }
            }
            transports.insert(entry.protocol, entry.transports);
        }
        Ok(PortRegistry {
            by_port,
            transports,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn lookup(&self, port: u16) -> Option<ProtocolId> {
        self.by_port.get(&port).copied()
    }

    pub fn is_registered(&self, port: u16) -> bool {
        self.by_port.contains_key(&port)
    }

    pub fn ports(&self, protocol: ProtocolId) -> impl Iterator<Item = u16> + '_ {
        self.by_port
            .iter()
            .filter(move |(_, p)| **p == protocol)
            .map(|(port, _)| *port)
    }

    pub fn carries(&self, protocol: ProtocolId, transport: Transport) -> bool {
        self.transports
            .get(&protocol)
            .is_some_and(|t| t.contains(&transport))
    }

    /// Request when the destination port is registered (destination wins
    /// when both are), Reply when only the source port is.
    pub fn direction_of_ports(&self, src_port: u16, dst_port: u16) -> Direction {
        if self.is_registered(dst_port) {
            Direction::Request
        } else if self.is_registered(src_port) {
            Direction::Reply
        } else {
            Direction::Unrelated
        }
    }
}

pub fn direction(record: &PacketRecord, ports: &PortRegistry) -> Direction {
    match record.transport {
        Transport::Tcp | Transport::Udp => {
            ports.direction_of_ports(record.src_port, record.dst_port)
        }
        Transport::Icmp => Direction::Unrelated,
    }
}

fn parse_port_range(spec: &str) -> Result<(u16, u16)> {
    let bad = || Error::Invalid(format!("port registry: bad port spec `{spec}`"));
    let (lo, hi) = match spec.split_once('-') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (spec.trim(), spec.trim()),
    };
    let lo: u16 = lo.parse().map_err(|_| bad())?;
    let hi: u16 = hi.parse().map_err(|_| bad())?;
    if lo > hi || lo == 0 {
        return Err(bad());
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modbus_request_and_reply() {
        let reg = PortRegistry::default();
        assert_eq!(reg.direction_of_ports(49152, 502), Direction::Request);
        assert_eq!(reg.direction_of_ports(502, 49152), Direction::Reply);
        assert_eq!(reg.direction_of_ports(49152, 443), Direction::Unrelated);
    }

    #[test]
    fn bacnet_range_tie_break() {
        let reg = PortRegistry::default();
        assert_eq!(reg.direction_of_ports(47808, 47809), Direction::Request);
        assert_eq!(reg.lookup(47823), Some(ProtocolId::Bacnet));
        assert_eq!(reg.lookup(47824), None);
    }

    #[test]
    fn brute_force_direction_over_registered_pairs() {
        let reg = PortRegistry::default();
        let registered: Vec<u16> = ProtocolId::ALL
            .iter()
            .flat_map(|p| reg.ports(*p).collect::<Vec<_>>())
            .collect();
        let mut probes = registered.clone();
        probes.extend([0, 80, 443, 49152, 65535]);
        for &s in &probes {
            for &d in &probes {
                let expected = if registered.contains(&d) {
                    Direction::Request
                } else if registered.contains(&s) {
                    Direction::Reply
                } else {
                    Direction::Unrelated
                };
                assert_eq!(reg.direction_of_ports(s, d), expected, "{s}->{d}");
            }
        }
    }

    #[test]
    fn every_protocol_has_ports() {
        let reg = PortRegistry::default();
        for p in ProtocolId::ALL {
            assert!(reg.ports(p).next().is_some(), "{p}");
        }
    }

    #[test]
    fn min_lengths() {
        assert_eq!(min_identifiable_length(ProtocolId::Bacnet), 46);
        assert_eq!(min_identifiable_length(ProtocolId::S7comm), 93);
        assert_eq!(min_identifiable_length(ProtocolId::Modbus), 74);
        assert!(ProtocolId::ALL
            .iter()
            .all(|p| p.min_identifiable_length() >= 46));
    }

    #[test]
    fn conflicting_ports_rejected() {
        let json = r#"[{"protocol":"modbus","ports":["502"],"transports":["tcp"]},
                       {"protocol":"dnp3","ports":["500-510"],"transports":["tcp"]}]"#;
        assert!(PortRegistry::from_json(json).is_err());
    }
}
