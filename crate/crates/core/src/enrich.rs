//! IP to AS and country mapping, IXP peering transitions, locality and
//! comparison against active scan snapshots.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::net::Ipv4Addr;
use std::path::Path;

use ipnet::Ipv4Net;
use serde::{Deserialize, Serialize};

use crate::capture::PacketRecord;
use crate::error::{read_json, read_text, Error, Result};
use crate::ports::ProtocolId;
use crate::prefix::PrefixMap;

pub type Asn = u32;

/// Distinct ICS protocols requested by one AS above which it is flagged.
pub const SUSPICIOUS_PROTOCOL_COUNT: usize = 4;

/// Prefix to origin AS table.
#[derive(Debug, Clone, Default)]
pub struct AsnTable {
    map: PrefixMap<Asn>,
}

fn parse_asn(field: &str) -> Option<Asn> {
    // multi-origin entries ("64500_64501", "64500,64501", "{64500}") keep the first AS
    let first = field
        .trim_matches(|c| c == '{' || c == '}')
        .split(['_', ','])
        .next()?;
    first
        .trim_start_matches("AS")
        .parse()
        .ok()
        .filter(|&a| a > 0)
}

impl AsnTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts an entry; a conflicting origin for the same prefix replaces
    /// the earlier one with a warning.
    pub fn insert(&mut self, net: Ipv4Net, asn: Asn) {
        if let Some(old) = self.map.insert(net.trunc(), asn) {
            if old != asn {
                log::warn!("prefix {} origin AS{old} replaced by AS{asn}", net.trunc());
            }
        }
    }

    /// Lines of `prefix asn` or `address length asn`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = AsnTable::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Invalid(format!("AS table line {}: `{line}`", i + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let (net, asn) = match fields.as_slice() {
                [prefix, asn] => (prefix.parse::<Ipv4Net>().map_err(|_| bad())?, *asn),
                [addr, len, asn] => {
                    let addr: Ipv4Addr = addr.parse().map_err(|_| bad())?;
                    let len: u8 = len.parse().map_err(|_| bad())?;
                    (Ipv4Net::new(addr, len).map_err(|_| bad())?, *asn)
                }
                _ => return Err(bad()),
            };
            table.insert(net, parse_asn(asn).ok_or_else(bad)?);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn lookup(&self, ip: Ipv4Addr) -> Option<Asn> {
        self.map.lookup(ip).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

pub fn map_asn(ip: Ipv4Addr, table: &AsnTable) -> Option<Asn> {
    table.lookup(ip)
}

/// ISO 3166-1 alpha-2 code, stored upper case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Country([u8; 2]);

impl Country {
    pub fn new(code: &str) -> Option<Self> {
        match code.as_bytes() {
            [a, b] if a.is_ascii_alphabetic() && b.is_ascii_alphabetic() => {
                Some(Country([a.to_ascii_uppercase(), b.to_ascii_uppercase()]))
            }
            _ => None,
        }
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("ASCII letters")
    }
}

impl fmt::Display for Country {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default)]
pub struct GeoTable {
    map: PrefixMap<Country>,
}

impl GeoTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, net: Ipv4Net, country: Country) {
        self.map.insert(net.trunc(), country);
    }

    /// CSV `prefix,country`; a header row is optional.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut table = GeoTable::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row.map_err(|e| Error::Invalid(format!("geo table: {e}")))?;
            let bad =
                || Error::Invalid(format!("geo table row {}: expected prefix,country", i + 1));
            let (prefix, cc) = (row.get(0).ok_or_else(bad)?, row.get(1).ok_or_else(bad)?);
            if i == 0 && prefix.eq_ignore_ascii_case("prefix") {
                continue;
            }
            let net: Ipv4Net = prefix.parse().map_err(|_| bad())?;
            let country = Country::new(cc).ok_or_else(|| {
                Error::Invalid(format!("geo table row {}: bad country code `{cc}`", i + 1))
            })?;
            table.insert(net, country);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_csv(&read_text(path)?).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn lookup(&self, ip: Ipv4Addr) -> Option<Country> {
        self.map.lookup(ip).copied()
    }
}

/// IXP members, their customer cones, and the MAC addresses of their
/// fabric ports.
#[derive(Debug, Clone, Default)]
pub struct IxpTopology {
    members: BTreeSet<Asn>,
    cones: HashMap<Asn, HashSet<Asn>>,
    interfaces: HashMap<[u8; 6], Asn>,
}

pub fn parse_mac(s: &str) -> Option<[u8; 6]> {
    let parts: Vec<&str> = s.split([':', '-']).collect();
    if parts.len() != 6 {
        return None;
    }
    let mut mac = [0u8; 6];
    for (b, p) in mac.iter_mut().zip(parts) {
        if p.len() != 2 {
            return None;
        }
        *b = u8::from_str_radix(p, 16).ok()?;
    }
    Some(mac)
}

pub fn format_mac(mac: [u8; 6]) -> String {
    mac.map(|b| format!("{b:02x}")).join(":")
}

impl IxpTopology {
    /// `cones` maps each member to the ASes reachable through it;
    /// `interfaces` maps fabric port MACs to members.
    pub fn new(cones: BTreeMap<Asn, Vec<Asn>>, interfaces: BTreeMap<[u8; 6], Asn>) -> Result<Self> {
        let mut topo = IxpTopology::default();
        for (member, cone) in cones {
            if cone.contains(&member) {
                return Err(Error::Invalid(format!(
                    "AS{member} is listed in its own cone"
                )));
            }
            topo.members.insert(member);
            topo.cones.insert(member, cone.into_iter().collect());
        }
        for (mac, member) in interfaces {
            topo.members.insert(member);
            topo.interfaces.insert(mac, member);
        }
        Ok(topo)
    }

    /// Cone file `{"member": [cone ASNs]}` plus interface map from config.
    pub fn load(cone_path: &Path, interfaces: &BTreeMap<String, Asn>) -> Result<Self> {
        let raw: BTreeMap<String, Vec<Asn>> = read_json(cone_path)?;
        let mut cones = BTreeMap::new();
        for (k, v) in raw {
            let member = parse_asn(&k)
                .ok_or_else(|| Error::parse(cone_path, format!("bad member AS `{k}`")))?;
            cones.insert(member, v);
        }
        let macs = parse_interfaces(interfaces)?;
        Self::new(cones, macs).map_err(|e| Error::parse(cone_path, e.to_string()))
    }

    /// Members known only through their fabric ports, without cones.
    pub fn from_interfaces(interfaces: &BTreeMap<String, Asn>) -> Result<Self> {
        Self::new(BTreeMap::new(), parse_interfaces(interfaces)?)
    }

    pub fn members(&self) -> &BTreeSet<Asn> {
        &self.members
    }

    pub fn is_member(&self, asn: Asn) -> bool {
        self.members.contains(&asn)
    }

    pub fn in_cone(&self, member: Asn, asn: Asn) -> bool {
        self.cones.get(&member).is_some_and(|c| c.contains(&asn))
    }

    pub fn interface(&self, mac: [u8; 6]) -> Option<Asn> {
        self.interfaces.get(&mac).copied()
    }

    /// Member through which `asn` reaches the fabric when no interface tag is
    /// available: the AS itself if it is a member, otherwise the lowest
    /// numbered member whose cone contains it.
    pub fn nearest_member(&self, asn: Asn) -> Option<Asn> {
        if self.is_member(asn) {
            return Some(asn);
        }
        self.members.iter().copied().find(|&m| self.in_cone(m, asn))
    }
}

pub fn parse_interfaces(raw: &BTreeMap<String, Asn>) -> Result<BTreeMap<[u8; 6], Asn>> {
    raw.iter()
        .map(|(k, &v)| {
            parse_mac(k)
                .map(|m| (m, v))
                .ok_or_else(|| Error::Invalid(format!("bad interface MAC `{k}`")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    MemberToMember,
    MemberToCone,
    ConeToMember,
    ConeToCone,
    Unknown,
}

impl Transition {
    pub const ALL: [Transition; 5] = [
        Transition::MemberToMember,
        Transition::MemberToCone,
        Transition::ConeToMember,
        Transition::ConeToCone,
        Transition::Unknown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Transition::MemberToMember => "member_to_member",
            Transition::MemberToCone => "member_to_cone",
            Transition::ConeToMember => "cone_to_member",
            Transition::ConeToCone => "cone_to_cone",
            Transition::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Member,
    Cone,
}

fn side(asn: Option<Asn>, member: Option<Asn>, topo: &IxpTopology) -> Option<Side> {
    let (asn, member) = (asn?, member?);
    if asn == member {
        Some(Side::Member)
    } else if topo.in_cone(member, asn) {
        Some(Side::Cone)
    } else {
        None
    }
}

pub fn transition(
    src_asn: Option<Asn>,
    dst_asn: Option<Asn>,
    ingress: Option<Asn>,
    egress: Option<Asn>,
    topo: &IxpTopology,
) -> Transition {
    match (side(src_asn, ingress, topo), side(dst_asn, egress, topo)) {
        (Some(Side::Member), Some(Side::Member)) => Transition::MemberToMember,
        (Some(Side::Member), Some(Side::Cone)) => Transition::MemberToCone,
        (Some(Side::Cone), Some(Side::Member)) => Transition::ConeToMember,
        (Some(Side::Cone), Some(Side::Cone)) => Transition::ConeToCone,
        _ => Transition::Unknown,
    }
}

/// IXP-local traffic: source AS is the ingress member and destination AS
/// the egress member. `None` when any AS is unknown.
pub fn is_local(
    src_asn: Option<Asn>,
    ingress: Option<Asn>,
    egress: Option<Asn>,
    dst_asn: Option<Asn>,
) -> Option<bool> {
    Some(src_asn? == ingress? && egress? == dst_asn?)
}

/// Both endpoints in the same country; `None` if either is unresolved.
pub fn is_domestic(src: Ipv4Addr, dst: Ipv4Addr, geo: &GeoTable) -> Option<bool> {
    Some(geo.lookup(src)? == geo.lookup(dst)?)
}

/// Per-packet enrichment result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enriched {
    pub src_asn: Option<Asn>,
    pub dst_asn: Option<Asn>,
    pub ingress: Option<Asn>,
    pub egress: Option<Asn>,
    pub transition: Transition,
    pub local: Option<bool>,
    pub domestic: Option<bool>,
}

#[derive(Debug, Clone, Default)]
pub struct Enricher {
    pub asn: AsnTable,
    pub geo: GeoTable,
    pub topology: IxpTopology,
}

impl Enricher {
    pub fn new(asn: AsnTable, geo: GeoTable, topology: IxpTopology) -> Self {
        Enricher { asn, geo, topology }
    }

    /// Ingress and egress members from the frame's MAC addresses, falling
    /// back to cone membership.
    pub fn members(
        &self,
        record: &PacketRecord,
        src_asn: Option<Asn>,
        dst_asn: Option<Asn>,
    ) -> (Option<Asn>, Option<Asn>) {
        let t = &self.topology;
        let ingress = t
            .interface(record.src_mac())
            .or_else(|| src_asn.and_then(|a| t.nearest_member(a)));
        let egress = t
            .interface(record.dst_mac())
            .or_else(|| dst_asn.and_then(|a| t.nearest_member(a)));
        (ingress, egress)
    }

    pub fn enrich(&self, record: &PacketRecord) -> Enriched {
        let src_asn = self.asn.lookup(record.src_ip);
        let dst_asn = self.asn.lookup(record.dst_ip);
        let (ingress, egress) = self.members(record, src_asn, dst_asn);
        Enriched {
            src_asn,
            dst_asn,
            ingress,
            egress,
            transition: transition(src_asn, dst_asn, ingress, egress, &self.topology),
            local: is_local(src_asn, ingress, egress, dst_asn),
            domestic: is_domestic(record.src_ip, record.dst_ip, &self.geo),
        }
    }
}

/// Yes/no/indeterminate tallies for a ratio that excludes unknowns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub yes: u64,
    pub no: u64,
    pub indeterminate: u64,
}

impl Tally {
    pub fn add(&mut self, v: Option<bool>) {
        match v {
            Some(true) => self.yes += 1,
            Some(false) => self.no += 1,
            None => self.indeterminate += 1,
        }
    }

    pub fn merge(&mut self, o: &Tally) {
        self.yes += o.yes;
        self.no += o.no;
        self.indeterminate += o.indeterminate;
    }

    /// `yes / (yes + no)`; indeterminate values are excluded.
    pub fn ratio(&self) -> Option<f64> {
        let d = self.yes + self.no;
        (d > 0).then(|| self.yes as f64 / d as f64)
    }
}

/// Distinct protocols requested per source AS.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsnProtocols {
    pub per_asn: BTreeMap<Asn, BTreeSet<ProtocolId>>,
}

impl AsnProtocols {
    pub fn add(&mut self, src_asn: Asn, protocol: ProtocolId) {
        self.per_asn.entry(src_asn).or_default().insert(protocol);
    }

    pub fn merge(&mut self, o: &AsnProtocols) {
        for (asn, ps) in &o.per_asn {
            self.per_asn.entry(*asn).or_default().extend(ps);
        }
    }

    pub fn is_suspicious(&self, asn: Asn) -> bool {
        self.per_asn
            .get(&asn)
            .is_some_and(|p| p.len() > SUSPICIOUS_PROTOCOL_COUNT)
    }

    /// Number of ASes per distinct-protocol count.
    pub fn histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for ps in self.per_asn.values() {
            *h.entry(ps.len()).or_default() += 1;
        }
        h
    }

    pub fn suspicious(&self) -> impl Iterator<Item = Asn> + '_ {
        self.per_asn
            .iter()
            .filter(|(_, p)| p.len() > SUSPICIOUS_PROTOCOL_COUNT)
            .map(|(a, _)| *a)
    }
}

/// Counts distinct protocols per AS over `(source AS, protocol)` pairs of
/// request packets.
pub fn protocols_per_asn<I: IntoIterator<Item = (Asn, ProtocolId)>>(requests: I) -> AsnProtocols {
    let mut out = AsnProtocols::default();
    for (asn, p) in requests {
        out.add(asn, p);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HostRole {
    Source,
    Destination,
}

/// Hosts an active scan found per protocol.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScanSnapshot {
    pub protocols: BTreeMap<ProtocolId, ScanHosts>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanHosts {
    /// Completed a transport handshake.
    #[serde(default)]
    pub transport: BTreeSet<Ipv4Addr>,
    /// Completed an application handshake; always a subset of `transport`.
    #[serde(default)]
    pub application: BTreeSet<Ipv4Addr>,
}

impl ScanSnapshot {
    pub fn new(protocols: BTreeMap<ProtocolId, ScanHosts>) -> Result<Self> {
        for (p, hosts) in &protocols {
            if let Some(ip) = hosts.application.difference(&hosts.transport).next() {
                return Err(Error::Invalid(format!(
                    "scan snapshot: {p} host {ip} completed the application handshake but not the transport handshake"
                )));
            }
        }
        Ok(ScanSnapshot { protocols })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let protocols = serde_json::from_str(text)
            .map_err(|e| Error::Invalid(format!("scan snapshot: {e}")))?;
        Self::new(protocols)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::new(read_json(path)?).map_err(|e| Error::parse(path, e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapRow {
    pub protocol: ProtocolId,
    pub role: HostRole,
    pub passive_hosts: usize,
    pub transport_hosts: usize,
    pub application_hosts: usize,
    pub transport_pct: f64,
    pub application_pct: f64,
    /// Passive hosts that answered the transport scan but not the
    /// application scan.
    pub transport_only: Vec<Ipv4Addr>,
}

fn pct(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        100.0 * n as f64 / d as f64
    }
}

/// Share of passively observed hosts that an active scan also found.
pub fn scan_overlap(
    passive: &BTreeMap<(ProtocolId, HostRole), BTreeSet<Ipv4Addr>>,
    snapshot: &ScanSnapshot,
) -> Vec<OverlapRow> {
    let empty = ScanHosts::default();
    passive
        .iter()
        .map(|(&(protocol, role), hosts)| {
            let scan = snapshot.protocols.get(&protocol).unwrap_or(&empty);
            let transport = hosts.intersection(&scan.transport).count();
            let application = hosts.intersection(&scan.application).count();
            OverlapRow {
                protocol,
                role,
                passive_hosts: hosts.len(),
                transport_hosts: transport,
                application_hosts: application,
                transport_pct: pct(transport, hosts.len()),
                application_pct: pct(application, hosts.len()),
                transport_only: hosts
                    .iter()
                    .filter(|ip| scan.transport.contains(ip) && !scan.application.contains(ip))
                    .copied()
                    .collect(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ip(s: &str) -> Ipv4Addr {
        s.parse().unwrap()
    }

    #[test]
    fn asn_table_formats_and_conflicts() {
        let t = AsnTable::parse(
            "# comment\n10.0.0.0/8 64500\n10.1.0.0 16 64501\n10.1.2.0/24 64502_64503\n10.1.2.0/24 64504\n",
        )
        .unwrap();
        assert_eq!(t.lookup(ip("10.1.2.3")), Some(64504));
        assert_eq!(t.lookup(ip("10.1.3.3")), Some(64501));
        assert_eq!(t.lookup(ip("10.2.0.1")), Some(64500));
        assert_eq!(t.lookup(ip("11.0.0.1")), None);
        assert_eq!(map_asn(ip("10.1.3.3"), &t), Some(64501));
        assert!(AsnTable::parse("10.0.0.0/8\n").is_err());
        assert!(AsnTable::parse("10.0.0.0/8 0\n").is_err());
        assert!(AsnTable::parse("10.0.0.0/8 x\n").is_err());
        let t = AsnTable::parse("192.0.2.7/32 64510\n").unwrap();
        assert_eq!(t.lookup(ip("192.0.2.7")), Some(64510));
    }

    #[test]
    fn geo_table_and_domestic() {
        let g = GeoTable::from_csv("prefix,country\n10.0.0.0/8,de\n10.9.0.0/16,JP\n").unwrap();
        assert_eq!(is_domestic(ip("10.0.0.1"), ip("10.1.0.1"), &g), Some(true));
        assert_eq!(is_domestic(ip("10.0.0.1"), ip("10.9.0.1"), &g), Some(false));
        assert_eq!(is_domestic(ip("11.0.0.1"), ip("10.9.0.1"), &g), None);
        assert!(GeoTable::from_csv("10.0.0.0/8,DEU\n").is_err());
        assert!(GeoTable::from_csv("10.0.0.0/8,D1\n").is_err());
    }

    fn topo() -> IxpTopology {
        IxpTopology::new(
            [(64500, vec![65001, 65002]), (64501, vec![65003])].into(),
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn transitions_by_definition() {
        let t = topo();
        let tr = |s, d, i, e| transition(Some(s), Some(d), Some(i), Some(e), &t);
        assert_eq!(tr(64500, 64501, 64500, 64501), Transition::MemberToMember);
        assert_eq!(tr(64500, 65003, 64500, 64501), Transition::MemberToCone);
        assert_eq!(tr(65001, 64501, 64500, 64501), Transition::ConeToMember);
        assert_eq!(tr(65001, 65003, 64500, 64501), Transition::ConeToCone);
        assert_eq!(tr(65009, 64501, 64500, 64501), Transition::Unknown);
        assert_eq!(
            transition(None, Some(64501), Some(64500), Some(64501), &t),
            Transition::Unknown
        );
    }

    #[test]
    fn locality_formula() {
        assert_eq!(
            is_local(Some(64500), Some(64500), Some(64501), Some(64501)),
            Some(true)
        );
        assert_eq!(
            is_local(Some(64502), Some(64500), Some(64501), Some(64501)),
            Some(false)
        );
        assert_eq!(is_local(None, Some(64500), Some(64501), Some(64501)), None);
    }

    #[test]
    fn member_cannot_be_in_own_cone() {
        assert!(IxpTopology::new([(64500, vec![64500])].into(), BTreeMap::new()).is_err());
    }

    #[test]
    fn nearest_member_fallback_and_interfaces() {
        let mac = parse_mac("02:00:00:00:00:aa").unwrap();
        let t = IxpTopology::new([(64500, vec![65001])].into(), [(mac, 64502)].into()).unwrap();
        assert_eq!(t.nearest_member(64500), Some(64500));
        assert_eq!(t.nearest_member(65001), Some(64500));
        assert_eq!(t.nearest_member(65999), None);
        assert_eq!(t.interface(mac), Some(64502));
        assert!(t.is_member(64502));
        assert_eq!(format_mac(mac), "02:00:00:00:00:aa");
        assert_eq!(parse_mac("02:00:00:00:00"), None);
    }

    #[test]
    fn protocol_counts_per_as() {
        use ProtocolId::*;
        let p = protocols_per_asn([(1, Modbus), (1, Bacnet), (1, Modbus)]);
        assert_eq!(p.per_asn[&1].len(), 2);
        assert!(!p.is_suspicious(1));
        let p = protocols_per_asn([Modbus, Bacnet, Dnp3, S7comm, Iec104].map(|x| (7, x)));
        assert!(p.is_suspicious(7));
        assert_eq!(p.histogram(), [(5, 1)].into());
    }

    #[test]
    fn overlap_arithmetic() {
        let snap = ScanSnapshot::new(
            [(
                ProtocolId::Modbus,
                ScanHosts {
                    transport: [ip("10.0.0.2"), ip("10.0.0.3")].into(),
                    application: BTreeSet::new(),
                },
            )]
            .into(),
        )
        .unwrap();
        let passive = [(
            (ProtocolId::Modbus, HostRole::Source),
            [ip("10.0.0.1"), ip("10.0.0.2")].into(),
        )]
        .into();
        let rows = scan_overlap(&passive, &snap);
        assert_eq!(rows[0].transport_pct, 50.0);
        assert_eq!(rows[0].application_pct, 0.0);
        assert_eq!(rows[0].transport_only, vec![ip("10.0.0.2")]);

        let rows = scan_overlap(&passive, &ScanSnapshot::default());
        assert_eq!(rows[0].transport_pct, 0.0);
    }

    #[test]
    fn snapshot_subset_is_enforced() {
        let bad = r#"{"modbus":{"transport":["10.0.0.1"],"application":["10.0.0.2"]}}"#;
        assert!(ScanSnapshot::from_json(bad).is_err());
        let ok = r#"{"modbus":{"transport":["10.0.0.1"],"application":["10.0.0.1"]}}"#;
        assert!(ScanSnapshot::from_json(ok).is_ok());
    }
}
