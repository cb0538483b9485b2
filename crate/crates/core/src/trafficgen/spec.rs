use std::collections::BTreeMap;

use chrono::NaiveDate;
use ipnet::Ipv4Net;
use serde::{Deserialize, Serialize};

use crate::capture::Transport;
use crate::classify::ScannerEntry;
use crate::enrich::Asn;
use crate::error::{Error, Result};
use crate::ports::{PortRegistry, ProtocolId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub seed: u64,
    /// First UTC day of the corpus.
    pub start: NaiveDate,
    pub days: u32,
    #[serde(default = "default_vantage")]
    pub vantage: String,
    #[serde(default = "default_snap_len")]
    pub snap_len: u32,
    #[serde(default = "default_interval")]
    pub sample_interval: u64,
    /// Written out as the scanner registry sidecar.
    #[serde(default)]
    pub scanners: Vec<ScannerEntry>,
    /// IXP member cones, `{"member": [cone ASNs]}`.
    #[serde(default)]
    pub cones: BTreeMap<Asn, Vec<Asn>>,
    /// Fabric port MAC per member, used to tag frames with ingress/egress.
    #[serde(default)]
    pub interfaces: BTreeMap<String, Asn>,
    pub flows: Vec<FlowSpec>,
}

fn default_vantage() -> String {
    "synthetic".into()
}

fn default_snap_len() -> u32 {
    128
}

fn default_interval() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    /// Bidirectional client/server exchange.
    Industrial,
    /// Request-only probes from scanner hosts across a destination range.
    ScannerSweep,
    /// ICMP port unreachable quoting a request with a spoofed source.
    Backscatter,
    /// Requests/replies with one header field set to an invalid value.
    Malformed,
    /// Non-ICS payload that also parses as an ICS message.
    DpiDecoy,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoneypotMark {
    #[default]
    None,
    /// Seen at a honeypot on non-ICS ports only.
    All,
    /// Sent requests to an ICS port of a honeypot.
    Ics,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMark {
    #[default]
    None,
    Transport,
    Application,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointSpec {
    pub cidr: Ipv4Net,
    #[serde(default = "one")]
    pub hosts: usize,
    #[serde(default)]
    pub asn: Option<Asn>,
    #[serde(default)]
    pub country: Option<String>,
    #[serde(default)]
    pub honeypot: HoneypotMark,
    /// Reverse DNS name; `{i}` is replaced by the host index.
    #[serde(default)]
    pub rdns: Option<String>,
    /// IXP member whose fabric port this side's packets use.
    #[serde(default)]
    pub member: Option<Asn>,
    /// What the active scan snapshot records for these hosts.
    #[serde(default)]
    pub scan: ScanMark,
}

fn one() -> usize {
    1
}

impl EndpointSpec {
    pub fn single(cidr: &str) -> Self {
        EndpointSpec {
            cidr: cidr.parse().expect("valid CIDR"),
            hosts: 1,
            asn: None,
            country: None,
            honeypot: HoneypotMark::None,
            rdns: None,
            member: None,
            scan: ScanMark::None,
        }
    }

    /// Usable addresses: all of a /31 or /32, otherwise without the
    /// network and broadcast addresses.
    pub fn capacity(&self) -> u64 {
        let size = 1u64 << (32 - self.cidr.prefix_len());
        if size <= 2 {
            size
        } else {
            size - 2
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Schedule {
    Range {
        start_day: u32,
        end_day: u32,
        packets_per_day: u32,
    },
    Days {
        active_days: Vec<u32>,
        packets_per_day: u32,
    },
}

impl Schedule {
    pub fn days(&self) -> Vec<u32> {
        match self {
            Schedule::Range {
                start_day, end_day, ..
            } => (*start_day..=*end_day).collect(),
            Schedule::Days { active_days, .. } => {
                let mut d = active_days.clone();
                d.sort_unstable();
                d.dedup();
                d
            }
        }
    }

    pub fn packets_per_day(&self) -> u32 {
        match self {
            Schedule::Range {
                packets_per_day, ..
            }
            | Schedule::Days {
                packets_per_day, ..
            } => *packets_per_day,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub kind: FlowKind,
    pub protocol: ProtocolId,
    /// Needed only where a protocol runs over both TCP and UDP.
    #[serde(default)]
    pub transport: Option<Transport>,
    /// Client, scanner, spoofed source or decoy sender.
    pub src: EndpointSpec,
    /// Server, sweep target or backscatter sender.
    pub dst: EndpointSpec,
    /// Overrides the protocol's registered port, e.g. to exercise the
    /// heuristic dissectors.
    #[serde(default)]
    pub server_port: Option<u16>,
    pub schedule: Schedule,
    /// Fraction of packets sent as requests.
    #[serde(default = "all_requests")]
    pub request_reply_ratio: f64,
}

fn all_requests() -> f64 {
    1.0
}

const HEURISTIC: [ProtocolId; 3] = [ProtocolId::Iec104, ProtocolId::Dnp3, ProtocolId::S7comm];

impl FlowSpec {
    pub fn transport(&self) -> Transport {
        self.transport.unwrap_or(match self.protocol {
            ProtocolId::Bacnet => Transport::Udp,
            _ => Transport::Tcp,
        })
    }

    pub fn server_port(&self, ports: &PortRegistry) -> u16 {
        self.server_port.unwrap_or_else(|| {
            ports
                .ports(self.protocol)
                .next()
                .expect("every protocol has a registered port")
        })
    }

    pub fn packet_count(&self) -> u64 {
        self.schedule.days().len() as u64 * self.schedule.packets_per_day() as u64
    }
}

fn invalid(i: usize, msg: impl std::fmt::Display) -> Error {
    Error::Scenario(format!("flow {i}: {msg}"))
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ScenarioSpec =
            serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        spec.validate(&PortRegistry::default())?;
        Ok(spec)
    }

    pub fn validate(&self, ports: &PortRegistry) -> Result<()> {
        if self.days == 0 {
            return Err(Error::Scenario("days must be at least 1".into()));
        }
        if self.sample_interval == 0 {
            return Err(Error::Scenario("sample_interval must be at least 1".into()));
        }
        if self.snap_len < 46 {
            return Err(Error::Scenario("snap_len must be at least 46".into()));
        }
        for (i, f) in self.flows.iter().enumerate() {
            let days = f.schedule.days();
            if days.is_empty() {
                return Err(invalid(i, "schedule has no active days"));
            }
            if let Schedule::Range {
                start_day, end_day, ..
            } = f.schedule
            {
                if start_day > end_day {
                    return Err(invalid(i, "schedule start_day is after end_day"));
                }
            }
            if let Some(&last) = days.last() {
                if last >= self.days {
                    return Err(invalid(
                        i,
                        format!(
                            "schedule day {last} is outside the {}-day corpus",
                            self.days
                        ),
                    ));
                }
            }
            if !(0.0..=1.0).contains(&f.request_reply_ratio) {
                return Err(invalid(i, "request_reply_ratio must lie in [0, 1]"));
            }
            for (side, e) in [("src", &f.src), ("dst", &f.dst)] {
                if e.hosts == 0 {
                    return Err(invalid(i, format!("{side} needs at least one host")));
                }
                if e.hosts as u64 > e.capacity() {
                    return Err(invalid(
                        i,
                        format!(
                            "{side} asks for {} hosts but {} holds {}",
                            e.hosts,
                            e.cidr,
                            e.capacity()
                        ),
                    ));
                }
                if let Some(c) = &e.country {
                    if crate::enrich::Country::new(c).is_none() {
                        return Err(invalid(i, format!("bad country code `{c}`")));
                    }
                }
            }
            let transport = f.transport();
            if transport == Transport::Icmp || !ports.carries(f.protocol, transport) {
                return Err(invalid(
                    i,
                    format!("{} does not run over {transport:?}", f.protocol),
                ));
            }
            let port = f.server_port(ports);
            match ports.lookup(port) {
                Some(p) if p == f.protocol => {}
                Some(p) => {
                    return Err(invalid(i, format!("server port {port} belongs to {p}")));
                }
                None => {
                    if !HEURISTIC.contains(&f.protocol) {
                        return Err(invalid(
                            i,
                            format!("{} has no heuristic dissector; port {port} is not registered for it", f.protocol),
                        ));
                    }
                    if f.kind == FlowKind::Malformed {
                        return Err(invalid(
                            i,
                            "malformed packets are only identified on registered ports",
                        ));
                    }
                }
            }
            if f.kind == FlowKind::DpiDecoy && f.protocol != ProtocolId::Bacnet {
                return Err(invalid(i, "dpi_decoy flows support protocol bacnet only"));
            }
            if f.kind == FlowKind::DpiDecoy && f.request_reply_ratio != 1.0 {
                return Err(invalid(i, "dpi_decoy flows are request-only"));
            }
            if matches!(f.kind, FlowKind::ScannerSweep | FlowKind::Backscatter)
                && f.request_reply_ratio != 1.0
            {
                return Err(invalid(
                    i,
                    "scanner_sweep and backscatter flows are request-only",
                ));
            }
            for m in [f.src.member, f.dst.member].into_iter().flatten() {
                if !self.interfaces.values().any(|&a| a == m) {
                    return Err(invalid(i, format!("member AS{m} has no interface")));
                }
            }
        }
        Ok(())
    }
}
