//! Industrial vs. non-industrial labelling from scanner registries, reverse
//! DNS names and honeypot address lists.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::net::Ipv4Addr;
use std::path::Path;
use std::str::FromStr;

use ipnet::Ipv4Net;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::capture::PacketRecord;
use crate::error::{read_json, read_text, Error, Result};
use crate::ports::{Direction, ProtocolId};
use crate::prefix::PrefixMap;

const DEFAULT_REGISTRY: &str = include_str!("../data/scanners.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScannerEntry {
    pub project: String,
    #[serde(default)]
    pub prefixes: Vec<Ipv4Net>,
    /// Case-insensitive substrings of the reverse DNS name.
    #[serde(default)]
    pub rdns_patterns: Vec<String>,
}

/// Scan projects in file order; order decides rDNS pattern precedence.
#[derive(Debug, Clone)]
pub struct ScannerRegistry {
    entries: Vec<ScannerEntry>,
    prefixes: PrefixMap<usize>,
}

impl Default for ScannerRegistry {
    fn default() -> Self {
        Self::from_json(DEFAULT_REGISTRY).expect("bundled scanner registry is valid")
    }
}

impl ScannerRegistry {
    pub fn new(mut entries: Vec<ScannerEntry>) -> Result<Self> {
        for e in &mut entries {
            if e.project.trim().is_empty() {
                return Err(Error::Invalid(
                    "scanner registry: empty project name".into(),
                ));
            }
            e.rdns_patterns = e
                .rdns_patterns
                .iter()
                .filter(|p| !p.is_empty())
                .map(|p| p.to_ascii_lowercase())
                .collect();
        }
        let mut prefixes = PrefixMap::new();
        for (i, e) in entries.iter().enumerate() {
            for net in &e.prefixes {
                match prefixes.insert(net.trunc(), i) {
                    Some(prev) if prev != i => {
                        return Err(Error::Invalid(format!(
                            "scanner registry: {net} listed by both `{}` and `{}`",
                            entries[prev].project, e.project
                        )));
                    }
                    _ => {}
                }
            }
        }
        Ok(ScannerRegistry { entries, prefixes })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let entries = serde_json::from_str(text)
            .map_err(|e| Error::Invalid(format!("scanner registry: {e}")))?;
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::new(read_json(path)?).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn entries(&self) -> &[ScannerEntry] {
        &self.entries
    }

    /// Project owning the most specific prefix that covers `ip`.
    pub fn match_prefix(&self, ip: Ipv4Addr) -> Option<&str> {
        self.prefixes
            .lookup(ip)
            .map(|&i| self.entries[i].project.as_str())
    }

    /// First project, in registry order, with a pattern inside `name`.
    pub fn match_name(&self, name: &str) -> Option<&str> {
        let name = name.to_ascii_lowercase();
        self.entries
            .iter()
            .find(|e| e.rdns_patterns.iter().any(|p| name.contains(p.as_str())))
            .map(|e| e.project.as_str())
    }

    pub fn match_rdns(&self, ip: Ipv4Addr, rdns: &RdnsTable) -> Option<&str> {
        rdns.get(ip).and_then(|name| self.match_name(name))
    }
}

/// Offline reverse DNS snapshot.
#[derive(Debug, Clone, Default)]
pub struct RdnsTable {
    names: HashMap<Ipv4Addr, String>,
}

impl RdnsTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a name; a second name for the same address is rejected.
    pub fn insert(&mut self, ip: Ipv4Addr, name: impl Into<String>) -> Result<()> {
        match self.names.entry(ip) {
            std::collections::hash_map::Entry::Occupied(_) => {
                Err(Error::Invalid(format!("rDNS: duplicate entry for {ip}")))
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(name.into());
                Ok(())
            }
        }
    }

    pub fn get(&self, ip: Ipv4Addr) -> Option<&str> {
        self.names.get(&ip).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// CSV `ip,name`; a header row is optional.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut table = RdnsTable::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row.map_err(|e| Error::Invalid(format!("rDNS: {e}")))?;
            let (ip, name) = match (row.get(0), row.get(1)) {
                (Some(ip), Some(name)) => (ip, name),
                _ => {
                    return Err(Error::Invalid(format!(
                        "rDNS line {}: expected ip,name",
                        i + 1
                    )))
                }
            };
            if i == 0 && ip.eq_ignore_ascii_case("ip") {
                continue;
            }
            let ip: Ipv4Addr = ip
                .parse()
                .map_err(|_| Error::Invalid(format!("rDNS line {}: bad address `{ip}`", i + 1)))?;
            table.insert(ip, name.trim_end_matches('.'))?;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_csv(&read_text(path)?).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Ipv4Addr, &str)> + '_ {
        self.names.iter().map(|(ip, n)| (*ip, n.as_str()))
    }
}

/// Addresses observed at honeypots: all of them, and those that sent
/// requests to an ICS port.
#[derive(Debug, Clone, Default)]
pub struct HoneypotSets {
    hp_all: HashSet<Ipv4Addr>,
    hp_ics: HashSet<Ipv4Addr>,
}

fn parse_ip_list(text: &str) -> Result<HashSet<Ipv4Addr>> {
    let mut set = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ip = line
            .parse()
            .map_err(|_| Error::Invalid(format!("line {}: bad address `{line}`", i + 1)))?;
        set.insert(ip);
    }
    Ok(set)
}

impl HoneypotSets {
    pub fn new(hp_all: HashSet<Ipv4Addr>, hp_ics: HashSet<Ipv4Addr>) -> Result<Self> {
        if let Some(ip) = hp_ics.iter().filter(|ip| !hp_all.contains(ip)).min() {
            return Err(Error::Invalid(format!(
                "honeypot lists: {ip} is in HP_ICS but not in HP_all"
            )));
        }
        Ok(HoneypotSets { hp_all, hp_ics })
    }

    pub fn load(hp_all: &Path, hp_ics: &Path) -> Result<Self> {
        let all =
            parse_ip_list(&read_text(hp_all)?).map_err(|e| Error::parse(hp_all, e.to_string()))?;
        let ics =
            parse_ip_list(&read_text(hp_ics)?).map_err(|e| Error::parse(hp_ics, e.to_string()))?;
        Self::new(all, ics).map_err(|e| Error::parse(hp_ics, e.to_string()))
    }

    pub fn in_all(&self, ip: Ipv4Addr) -> bool {
        self.hp_all.contains(&ip)
    }

    pub fn in_ics(&self, ip: Ipv4Addr) -> bool {
        self.hp_ics.contains(&ip)
    }

    pub fn hp_all(&self) -> &HashSet<Ipv4Addr> {
        &self.hp_all
    }

    pub fn hp_ics(&self) -> &HashSet<Ipv4Addr> {
        &self.hp_ics
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reason {
    ScannerPrefix(String),
    ScannerRdns(String),
    HoneypotAll,
    HoneypotIcs,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::ScannerPrefix(p) => write!(f, "scanner_prefix:{p}"),
            Reason::ScannerRdns(p) => write!(f, "scanner_rdns:{p}"),
            Reason::HoneypotAll => f.write_str("hp_all"),
            Reason::HoneypotIcs => f.write_str("hp_ics"),
        }
    }
}

impl FromStr for Reason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("scanner_prefix", p)) if !p.is_empty() => Ok(Reason::ScannerPrefix(p.into())),
            Some(("scanner_rdns", p)) if !p.is_empty() => Ok(Reason::ScannerRdns(p.into())),
            None if s == "hp_all" => Ok(Reason::HoneypotAll),
            None if s == "hp_ics" => Ok(Reason::HoneypotIcs),
            _ => Err(Error::Invalid(format!("unknown reason `{s}`"))),
        }
    }
}

impl Serialize for Reason {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Reason {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Industrial,
    NonIndustrial,
}

/// Label with the filter hits behind it; non-industrial iff any reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficClass {
    pub label: Label,
    pub reasons: BTreeSet<Reason>,
}

impl TrafficClass {
    pub fn from_reasons(reasons: BTreeSet<Reason>) -> Self {
        let label = if reasons.is_empty() {
            Label::Industrial
        } else {
            Label::NonIndustrial
        };
        TrafficClass { label, reasons }
    }

    pub fn is_industrial(&self) -> bool {
        self.label == Label::Industrial
    }

    /// The class seen with only the filters in `filters` active.
    pub fn under(&self, filters: FilterSet) -> TrafficClass {
        TrafficClass::from_reasons(
            self.reasons
                .iter()
                .filter(|r| filters.admits(r))
                .cloned()
                .collect(),
        )
    }
}

/// Which filter families are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FilterSet {
    pub scanners: bool,
    pub hp_ics: bool,
    pub hp_all: bool,
}

impl FilterSet {
    pub const SCANNERS: FilterSet = FilterSet {
        scanners: true,
        hp_ics: false,
        hp_all: false,
    };
    pub const HP_ICS: FilterSet = FilterSet {
        scanners: false,
        hp_ics: true,
        hp_all: false,
    };
    pub const HP_ALL: FilterSet = FilterSet {
        scanners: false,
        hp_ics: false,
        hp_all: true,
    };
    pub const SCANNERS_HP_ICS: FilterSet = FilterSet {
        scanners: true,
        hp_ics: true,
        hp_all: false,
    };
    pub const ALL: FilterSet = FilterSet {
        scanners: true,
        hp_ics: true,
        hp_all: true,
    };

    pub fn admits(&self, reason: &Reason) -> bool {
        match reason {
            Reason::ScannerPrefix(_) | Reason::ScannerRdns(_) => self.scanners,
            Reason::HoneypotAll => self.hp_all,
            Reason::HoneypotIcs => self.hp_ics,
        }
    }
}

impl Default for FilterSet {
    fn default() -> Self {
        FilterSet::ALL
    }
}

impl FromStr for FilterSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "scanners" => Ok(FilterSet::SCANNERS),
            "hp-ics" => Ok(FilterSet::HP_ICS),
            "hp-all" => Ok(FilterSet::HP_ALL),
            "all" => Ok(FilterSet::ALL),
            _ => Err(Error::Invalid(format!(
                "unknown filter family `{s}` (expected scanners, hp-ics, hp-all or all)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Classifier {
    pub registry: ScannerRegistry,
    pub rdns: RdnsTable,
    pub honeypots: HoneypotSets,
}

impl Classifier {
    pub fn new(registry: ScannerRegistry, rdns: RdnsTable, honeypots: HoneypotSets) -> Self {
        Classifier {
            registry,
            rdns,
            honeypots,
        }
    }

    pub fn reasons_for(&self, ip: Ipv4Addr, out: &mut BTreeSet<Reason>) {
        if let Some(p) = self.registry.match_prefix(ip) {
            out.insert(Reason::ScannerPrefix(p.to_owned()));
        }
        if let Some(p) = self.registry.match_rdns(ip, &self.rdns) {
            out.insert(Reason::ScannerRdns(p.to_owned()));
        }
        if self.honeypots.in_all(ip) {
            out.insert(Reason::HoneypotAll);
        }
        if self.honeypots.in_ics(ip) {
            out.insert(Reason::HoneypotIcs);
        }
    }

    /// Evaluates every filter on both endpoints.
    pub fn classify(&self, record: &PacketRecord) -> TrafficClass {
        self.classify_ips(record.src_ip, record.dst_ip)
    }

    pub fn classify_ips(&self, src: Ipv4Addr, dst: Ipv4Addr) -> TrafficClass {
        let mut reasons = BTreeSet::new();
        self.reasons_for(src, &mut reasons);
        self.reasons_for(dst, &mut reasons);
        TrafficClass::from_reasons(reasons)
    }

    pub fn classify_with(&self, record: &PacketRecord, filters: FilterSet) -> TrafficClass {
        self.classify(record).under(filters)
    }
}

/// Per-protocol packet counts under each filter family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCounts {
    pub total: u64,
    pub requests: u64,
    pub replies: u64,
    pub industrial_scanners: u64,
    pub industrial_hp_ics: u64,
    pub industrial_hp_all: u64,
    pub industrial_both: u64,
}

impl FilterCounts {
    pub fn add(&mut self, direction: Direction, class: &TrafficClass) {
        self.total += 1;
        match direction {
            Direction::Request => self.requests += 1,
            Direction::Reply => self.replies += 1,
            Direction::Unrelated => {}
        }
        let kept = |f: FilterSet| u64::from(class.under(f).is_industrial());
        self.industrial_scanners += kept(FilterSet::SCANNERS);
        self.industrial_hp_ics += kept(FilterSet::HP_ICS);
        self.industrial_hp_all += kept(FilterSet::HP_ALL);
        self.industrial_both += kept(FilterSet::ALL);
    }

    pub fn merge(&mut self, o: &FilterCounts) {
        self.total += o.total;
        self.requests += o.requests;
        self.replies += o.replies;
        self.industrial_scanners += o.industrial_scanners;
        self.industrial_hp_ics += o.industrial_hp_ics;
        self.industrial_hp_all += o.industrial_hp_all;
        self.industrial_both += o.industrial_both;
    }

    pub fn request_share(&self) -> Option<f64> {
        let d = self.requests + self.replies;
        (d > 0).then(|| self.requests as f64 / d as f64)
    }

    pub fn pct(&self, n: u64) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * n as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub protocols: BTreeMap<ProtocolId, FilterCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterRow {
    pub protocol: String,
    pub total_packets: u64,
    pub request_share: Option<f64>,
    pub excl_scanners: Option<f64>,
    pub excl_hp_ics: Option<f64>,
    pub excl_hp_all: Option<f64>,
    pub excl_both: Option<f64>,
}

impl FilterReport {
    pub fn add(&mut self, protocol: ProtocolId, direction: Direction, class: &TrafficClass) {
        self.protocols
            .entry(protocol)
            .or_default()
            .add(direction, class);
    }

    pub fn merge(&mut self, other: &FilterReport) {
        for (p, c) in &other.protocols {
            self.protocols.entry(*p).or_default().merge(c);
        }
    }

    pub fn total(&self) -> FilterCounts {
        let mut t = FilterCounts::default();
        for c in self.protocols.values() {
            t.merge(c);
        }
        t
    }

    /// Percent of packets left industrial per family; request share as a
    /// fraction. The totals row comes first.
    pub fn rows(&self) -> Vec<FilterRow> {
        let row = |name: &str, c: &FilterCounts| FilterRow {
            protocol: name.to_owned(),
            total_packets: c.total,
            request_share: c.request_share(),
            excl_scanners: c.pct(c.industrial_scanners),
            excl_hp_ics: c.pct(c.industrial_hp_ics),
            excl_hp_all: c.pct(c.industrial_hp_all),
            excl_both: c.pct(c.industrial_both),
        };
        let mut rows = vec![row("total", &self.total())];
        rows.extend(self.protocols.iter().map(|(p, c)| row(p.name(), c)));
        rows
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "protocol",
            "total_packets",
            "request_share",
            "excl_scanners",
            "excl_hp_ics",
            "excl_hp_all",
            "excl_both",
        ])?;
        let f = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in self.rows() {
            w.write_record([
                r.protocol,
                r.total_packets.to_string(),
                f(r.request_share),
                f(r.excl_scanners),
                f(r.excl_hp_ics),
                f(r.excl_hp_all),
                f(r.excl_both),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ip(s: &str) -> Ipv4Addr {
        s.parse().unwrap()
    }

    fn registry() -> ScannerRegistry {
        ScannerRegistry::from_json(
            r#"[
              {"project":"shodan","prefixes":["198.51.100.0/24"],"rdns_patterns":["shodan"]},
              {"project":"rapid7","prefixes":["198.51.0.0/16"],"rdns_patterns":["rapid7"]},
              {"project":"censys","prefixes":[],"rdns_patterns":["census","censys"]}
            ]"#,
        )
        .unwrap()
    }

    #[test]
    fn prefix_match_prefers_most_specific() {
        let r = registry();
        assert_eq!(r.match_prefix(ip("198.51.100.7")), Some("shodan"));
        assert_eq!(r.match_prefix(ip("198.51.7.7")), Some("rapid7"));
        assert_eq!(r.match_prefix(ip("203.0.113.1")), None);
    }

    #[test]
    fn rdns_patterns_follow_registry_order() {
        let r = ScannerRegistry::default();
        assert_eq!(r.match_name("scanner2.labs.rapid7.com"), Some("rapid7"));
        assert_eq!(r.match_name("pirate.census.shodan.io"), Some("shodan"));
        assert_eq!(
            r.match_name("Scanner-07.CENSYS-scanner.com"),
            Some("censys")
        );
        assert_eq!(r.match_name("mail.example.org"), None);
        let mut rdns = RdnsTable::new();
        rdns.insert(ip("192.0.2.1"), "scanner2.labs.rapid7.com")
            .unwrap();
        assert_eq!(r.match_rdns(ip("192.0.2.1"), &rdns), Some("rapid7"));
        assert_eq!(r.match_rdns(ip("192.0.2.2"), &rdns), None);
    }

    #[test]
    fn registry_validation() {
        assert!(ScannerRegistry::from_json(r#"[{"project":"","prefixes":[]}]"#).is_err());
        assert!(
            ScannerRegistry::from_json(r#"[{"project":"a","prefixes":["10.0.0.0/33"]}]"#).is_err()
        );
        let dup = r#"[{"project":"a","prefixes":["10.0.0.0/8"]},{"project":"b","prefixes":["10.0.0.0/8"]}]"#;
        assert!(ScannerRegistry::from_json(dup).is_err());
    }

    #[test]
    fn rdns_csv_with_and_without_header() {
        let t =
            RdnsTable::from_csv("ip,name\n192.0.2.1,a.example.\n192.0.2.2, b.example\n").unwrap();
        assert_eq!(t.get(ip("192.0.2.1")), Some("a.example"));
        assert_eq!(t.get(ip("192.0.2.2")), Some("b.example"));
        let t = RdnsTable::from_csv("192.0.2.1,a.example\n").unwrap();
        assert_eq!(t.len(), 1);
        assert!(RdnsTable::from_csv("192.0.2.1,a\n192.0.2.1,b\n").is_err());
        assert!(RdnsTable::from_csv("nonsense,a\n").is_err());
    }

    #[test]
    fn honeypot_subset_is_enforced() {
        let all: HashSet<_> = [ip("192.0.2.1")].into();
        let ics: HashSet<_> = [ip("192.0.2.2")].into();
        let err = HoneypotSets::new(all.clone(), ics).unwrap_err().to_string();
        assert!(err.contains("192.0.2.2"), "{err}");
        assert!(HoneypotSets::new(all.clone(), all).is_ok());
    }

    #[test]
    fn classification_unions_both_endpoints() {
        let mut rdns = RdnsTable::new();
        rdns.insert(ip("192.0.2.9"), "probe.shodan.io").unwrap();
        let hp = HoneypotSets::new(
            [ip("192.0.2.9"), ip("203.0.113.5")].into(),
            [ip("192.0.2.9")].into(),
        )
        .unwrap();
        let c = Classifier::new(registry(), rdns, hp);

        let shodan = c.classify_ips(ip("198.51.100.1"), ip("10.0.0.1"));
        assert_eq!(shodan.label, Label::NonIndustrial);
        assert_eq!(
            shodan.reasons,
            [Reason::ScannerPrefix("shodan".into())].into()
        );

        let mirrored = c.classify_ips(ip("10.0.0.1"), ip("198.51.100.1"));
        assert_eq!(mirrored, shodan);

        let both = c.classify_ips(ip("192.0.2.9"), ip("10.0.0.1"));
        assert_eq!(
            both.reasons,
            [
                Reason::ScannerRdns("shodan".into()),
                Reason::HoneypotAll,
                Reason::HoneypotIcs
            ]
            .into()
        );

        let hp_all_only = c.classify_ips(ip("203.0.113.5"), ip("10.0.0.1"));
        assert!(!hp_all_only.is_industrial());
        assert!(hp_all_only.under(FilterSet::HP_ICS).is_industrial());
        assert!(!hp_all_only.under(FilterSet::HP_ALL).is_industrial());

        assert!(c
            .classify_ips(ip("10.0.0.1"), ip("10.0.0.2"))
            .is_industrial());
    }

    #[test]
    fn reasons_round_trip_as_strings() {
        let class = TrafficClass::from_reasons(
            [Reason::ScannerPrefix("shodan".into()), Reason::HoneypotIcs].into(),
        );
        let json = serde_json::to_string(&class).unwrap();
        assert_eq!(
            json,
            r#"{"label":"non_industrial","reasons":["scanner_prefix:shodan","hp_ics"]}"#
        );
        assert_eq!(serde_json::from_str::<TrafficClass>(&json).unwrap(), class);
        assert!("scanner_prefix:".parse::<Reason>().is_err());
    }

    #[test]
    fn filter_report_shares() {
        let mut rep = FilterReport::default();
        let scanner = TrafficClass::from_reasons([Reason::ScannerPrefix("x".into())].into());
        let clean = TrafficClass::from_reasons(BTreeSet::new());
        for _ in 0..80 {
            rep.add(ProtocolId::Bacnet, Direction::Request, &scanner);
        }
        for _ in 0..20 {
            rep.add(ProtocolId::Bacnet, Direction::Request, &clean);
        }
        let rows = rep.rows();
        assert_eq!(rows[0].protocol, "total");
        assert_eq!(rows[1].excl_scanners, Some(20.0));
        assert_eq!(rows[1].excl_both, Some(20.0));
        assert_eq!(rows[1].excl_hp_all, Some(100.0));
        assert_eq!(rows[1].request_share, Some(1.0));

        let mut buf = Vec::new();
        FilterReport::default().write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "protocol,total_packets,request_share,excl_scanners,excl_hp_ics,excl_hp_all,excl_both\n\
             total,0,,,,,\n"
        );
    }
}
