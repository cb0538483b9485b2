//! Configuration loading and the end-to-end analysis run behind the
//! command-line front end.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::net::Ipv4Addr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::capture::{read_capture, CaptureMeta, CaptureStats, PacketRecord};
use crate::classify::{
    Classifier, FilterReport, FilterSet, HoneypotSets, RdnsTable, ScannerRegistry, TrafficClass,
};
use crate::dissect::{Dissection, Dissector};
use crate::dpi::DpiCatalog;
use crate::enrich::{
    scan_overlap, AsnProtocols, AsnTable, Enriched, Enricher, GeoTable, HostRole, IxpTopology,
    ScanSnapshot, Tally, Transition,
};
use crate::error::{read_json, Error, Result};
use crate::metrics::{
    extrapolate, host_stability, rank_counts, write_stability_csv, ActivityTracker, DailySeries,
};
use crate::ports::{direction, Direction, PortRegistry, ProtocolId};
use crate::sanitize::{self, SanitizeReport, SanitizeVerdict};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VantageConfig {
    pub name: String,
    pub sample_interval: u64,
    pub snap_len: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureInput {
    /// Defaults to the first configured vantage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vantage: Option<String>,
    pub path: PathBuf,
}

/// JSON run configuration. Relative paths resolve against the directory
/// holding the configuration file; absent tables are treated as empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub vantages: Vec<VantageConfig>,
    pub captures: Vec<CaptureInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ports: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dpi_catalog: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scanners: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hp_all: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hp_ics: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rdns: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asn_table: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geo: Option<PathBuf>,
    /// Member cones, `{"<member AS>": [cone ASes]}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cones: Option<PathBuf>,
    /// IXP fabric port MAC to member AS.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub interfaces: BTreeMap<String, u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_snapshot: Option<PathBuf>,
    /// Filter families that decide the industrial label: scanners,
    /// hp-ics, hp-all or all (default).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filters: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut config: PipelineConfig = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve(base);
        Ok(config)
    }

    /// Makes every relative path relative to `base`.
    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for c in &mut self.captures {
            fix(&mut c.path);
        }
        for p in [
            &mut self.ports,
            &mut self.dpi_catalog,
            &mut self.scanners,
            &mut self.hp_all,
            &mut self.hp_ics,
            &mut self.rdns,
            &mut self.asn_table,
            &mut self.geo,
            &mut self.cones,
            &mut self.scan_snapshot,
            &mut self.output,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }
}

/// What the pipeline concluded about one record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub dissection: Option<Dissection>,
    pub sanitize: Option<SanitizeVerdict>,
    pub direction: Direction,
    /// Evaluated for every identified record, dropped or not.
    pub class: Option<TrafficClass>,
}

/// Loaded tables, ready to process records.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub dissector: Dissector,
    pub catalog: DpiCatalog,
    pub classifier: Classifier,
    pub enricher: Enricher,
    pub snapshot: ScanSnapshot,
    pub filters: FilterSet,
    pub vantages: BTreeMap<String, CaptureMeta>,
    /// Vantage names in configuration order.
    pub vantage_order: Vec<String>,
    pub captures: Vec<(String, PathBuf)>,
}

fn opt<T: Default>(path: &Option<PathBuf>, load: impl FnOnce(&Path) -> Result<T>) -> Result<T> {
    match path {
        Some(p) => load(p),
        None => Ok(T::default()),
    }
}

impl Pipeline {
    /// Loads every referenced table; the first failure names its file.
    pub fn from_config(config: &PipelineConfig) -> Result<Self> {
        let ports = opt(&config.ports, PortRegistry::load)?;
        let catalog = opt(&config.dpi_catalog, DpiCatalog::load)?;
        let registry = opt(&config.scanners, ScannerRegistry::load)?;
        let rdns = opt(&config.rdns, RdnsTable::load)?;
        let honeypots = match (&config.hp_all, &config.hp_ics) {
            (Some(all), Some(ics)) => HoneypotSets::load(all, ics)?,
            (None, None) => HoneypotSets::default(),
            _ => {
                return Err(Error::Invalid(
                    "hp_all and hp_ics must be given together".into(),
                ))
            }
        };
        let asn = opt(&config.asn_table, AsnTable::load)?;
        let geo = opt(&config.geo, GeoTable::load)?;
        let topology = match &config.cones {
            Some(p) => IxpTopology::load(p, &config.interfaces)?,
            None => IxpTopology::from_interfaces(&config.interfaces)?,
        };
        let snapshot = opt(&config.scan_snapshot, ScanSnapshot::load)?;
        let filters = match &config.filters {
            Some(f) => f.parse()?,
            None => FilterSet::ALL,
        };

        let mut vantages = BTreeMap::new();
        let mut vantage_order = Vec::new();
        for v in &config.vantages {
            let meta = CaptureMeta::new(v.name.clone(), v.sample_interval, v.snap_len)?;
            if vantages.insert(v.name.clone(), meta).is_some() {
                return Err(Error::Invalid(format!(
                    "vantage `{}` is configured twice",
                    v.name
                )));
            }
            vantage_order.push(v.name.clone());
        }
        let mut captures = Vec::new();
        for c in &config.captures {
            let name = match (&c.vantage, vantage_order.first()) {
                (Some(v), _) => v.clone(),
                (None, Some(first)) => first.clone(),
                (None, None) => {
                    return Err(Error::Invalid(format!(
                        "capture {} has no vantage and none is configured",
                        c.path.display()
                    )))
                }
            };
            if !vantages.contains_key(&name) {
                return Err(Error::Invalid(format!(
                    "capture {} names unknown vantage `{name}`",
                    c.path.display()
                )));
            }
            if !c.path.is_file() {
                return Err(Error::io(
                    &c.path,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "capture file not found"),
                ));
            }
            captures.push((name, c.path.clone()));
        }

        Ok(Pipeline {
            dissector: Dissector::new(ports),
            catalog,
            classifier: Classifier::new(registry, rdns, honeypots),
            enricher: Enricher::new(asn, geo, topology),
            snapshot,
            filters,
            vantages,
            vantage_order,
            captures,
        })
    }

    pub fn ports(&self) -> &PortRegistry {
        self.dissector.ports()
    }

    pub fn process(&self, record: &PacketRecord) -> Outcome {
        let dissection = self.dissector.dissect(record);
        let sanitize = dissection.map(|d| sanitize::verdict(record, &d, &self.catalog));
        let class = dissection.map(|_| self.classifier.classify(record));
        Outcome {
            dissection,
            sanitize,
            direction: direction(record, self.ports()),
            class,
        }
    }

    pub fn sample_interval(&self, vantage: &str) -> u64 {
        self.vantages.get(vantage).map_or(1, |m| m.sample_interval)
    }

    /// Reads every configured capture in order.
    pub fn run(&self) -> Result<Analysis> {
        let mut analysis = Analysis::new(&self.vantage_order);
        for (vantage, path) in &self.captures {
            let meta = &self.vantages[vantage];
            let mut reader = read_capture(path, meta)?;
            for record in &mut reader {
                analysis.add(self, &record?);
            }
            log::info!(
                "{}: {} frames, {} records, {} skipped",
                path.display(),
                reader.stats().frames,
                reader.stats().records,
                reader.stats().skipped_total()
            );
            analysis
                .stats
                .entry(vantage.clone())
                .or_default()
                .merge(reader.stats());
        }
        Ok(analysis)
    }
}

/// Capture counters summed over the files of one vantage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VantageStats {
    pub frames: u64,
    pub records: u64,
    pub skipped: BTreeMap<String, u64>,
    pub truncated_files: u64,
}

impl VantageStats {
    fn merge(&mut self, s: &CaptureStats) {
        self.frames += s.frames;
        self.records += s.records;
        for (reason, n) in &s.skipped {
            let key = serde_json::to_value(reason)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_else(|| format!("{reason:?}"));
            *self.skipped.entry(key).or_default() += n;
        }
        self.truncated_files += u64::from(s.truncated_tail);
    }
}

/// Counters for one (protocol, label) cell of the locality tables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LocalityCell {
    pub transitions: BTreeMap<Transition, u64>,
    pub domestic: Tally,
}

/// Accumulated reports; all maps are ordered so output is deterministic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Analysis {
    pub sanitize: BTreeMap<String, SanitizeReport>,
    pub vantage_order: Vec<String>,
    pub filters: FilterReport,
    /// Keyed by protocol and `industrial` flag.
    pub locality: BTreeMap<(ProtocolId, bool), LocalityCell>,
    pub daily: DailySeries,
    pub activity: ActivityTracker,
    pub asn_protocols: AsnProtocols,
    pub passive_hosts: BTreeMap<(ProtocolId, HostRole), BTreeSet<Ipv4Addr>>,
    pub protocol_counts: BTreeMap<(String, ProtocolId), u64>,
    pub stats: BTreeMap<String, VantageStats>,
    pub sample_intervals: BTreeMap<String, u64>,
}

fn label_name(industrial: bool) -> &'static str {
    if industrial {
        "industrial"
    } else {
        "non_industrial"
    }
}

impl Analysis {
    pub fn new(vantages: &[String]) -> Self {
        Analysis {
            vantage_order: vantages.to_vec(),
            ..Analysis::default()
        }
    }

    /// Folds one record into every report.
    pub fn add(&mut self, p: &Pipeline, record: &PacketRecord) {
        let vantage: &str = &record.vantage;
        self.sample_intervals
            .entry(vantage.to_owned())
            .or_insert_with(|| p.sample_interval(vantage));
        let report = self.sanitize.entry(vantage.to_owned()).or_default();
        report.port_only_count += sanitize::port_only_baseline([record], p.ports());
        let Some(d) = p.dissector.dissect(record) else {
            return;
        };
        let v = sanitize::verdict(record, &d, &p.catalog);
        report.record(v);
        if v != SanitizeVerdict::Kept {
            return;
        }
        let dir = direction(record, p.ports());
        let class = p.classifier.classify(record);
        let industrial = class.under(p.filters).is_industrial();
        self.filters.add(d.protocol, dir, &class);
        *self
            .protocol_counts
            .entry((vantage.to_owned(), d.protocol))
            .or_default() += 1;
        self.daily
            .add(vantage, d.protocol, record.day(), industrial);
        if industrial {
            self.activity.add(record.src_ip, record.day());
            self.activity.add(record.dst_ip, record.day());
        }

        let e: Enriched = p.enricher.enrich(record);
        let cell = self.locality.entry((d.protocol, industrial)).or_default();
        *cell.transitions.entry(e.transition).or_default() += 1;
        cell.domestic.add(e.domestic);

        let (client, server) = match dir {
            Direction::Request => (record.src_ip, record.dst_ip),
            Direction::Reply => (record.dst_ip, record.src_ip),
            Direction::Unrelated => return,
        };
        if dir == Direction::Request {
            if let Some(asn) = e.src_asn {
                self.asn_protocols.add(asn, d.protocol);
            }
        }
        self.passive_hosts
            .entry((d.protocol, HostRole::Source))
            .or_default()
            .insert(client);
        self.passive_hosts
            .entry((d.protocol, HostRole::Destination))
            .or_default()
            .insert(server);
    }

    pub fn merge(&mut self, o: &Analysis) {
        for (v, r) in &o.sanitize {
            self.sanitize.entry(v.clone()).or_default().merge(r);
        }
        for v in &o.vantage_order {
            if !self.vantage_order.contains(v) {
                self.vantage_order.push(v.clone());
            }
        }
        self.filters.merge(&o.filters);
        for (k, c) in &o.locality {
            let cell = self.locality.entry(*k).or_default();
            for (t, n) in &c.transitions {
                *cell.transitions.entry(*t).or_default() += n;
            }
            cell.domestic.merge(&c.domestic);
        }
        self.daily.merge(&o.daily);
        self.activity.merge(&o.activity);
        self.asn_protocols.merge(&o.asn_protocols);
        for (k, hosts) in &o.passive_hosts {
            self.passive_hosts.entry(*k).or_default().extend(hosts);
        }
        for (k, n) in &o.protocol_counts {
            *self.protocol_counts.entry(k.clone()).or_default() += n;
        }
        for (k, s) in &o.stats {
            let t = self.stats.entry(k.clone()).or_default();
            t.frames += s.frames;
            t.records += s.records;
            for (r, n) in &s.skipped {
                *t.skipped.entry(r.clone()).or_default() += n;
            }
            t.truncated_files += s.truncated_files;
        }
        for (k, v) in &o.sample_intervals {
            self.sample_intervals.entry(k.clone()).or_insert(*v);
        }
    }

    fn interval(&self, vantage: &str) -> u64 {
        self.sample_intervals.get(vantage).copied().unwrap_or(1)
    }

    /// Sanitize reports in configuration order, then any others by name.
    pub fn sanitize_reports(&self) -> Vec<(&str, SanitizeReport)> {
        let mut names: Vec<&str> = self.vantage_order.iter().map(String::as_str).collect();
        for v in self.sanitize.keys() {
            if !names.contains(&v.as_str()) {
                names.push(v);
            }
        }
        names
            .into_iter()
            .map(|v| (v, self.sanitize.get(v).copied().unwrap_or_default()))
            .collect()
    }

    pub fn write_sanitize<W: Write>(&self, out: W) -> Result<()> {
        let reports = self.sanitize_reports();
        sanitize::write_csv(out, reports.iter().map(|(v, r)| (*v, r)))
            .map_err(csv_err("sanitize.csv"))
    }

    /// Columns `protocol,label,transition,packets,share_pct`; shares are
    /// over packets with a known transition.
    pub fn write_transitions<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let file = "transitions.csv";
        w.write_record(["protocol", "label", "transition", "packets", "share_pct"])
            .map_err(csv_err(file))?;
        for ((p, industrial), cell) in &self.locality {
            let known: u64 = cell
                .transitions
                .iter()
                .filter(|(t, _)| **t != Transition::Unknown)
                .map(|(_, n)| n)
                .sum();
            for t in Transition::ALL {
                let n = cell.transitions.get(&t).copied().unwrap_or(0);
                let share = if t == Transition::Unknown || known == 0 {
                    String::new()
                } else {
                    (100.0 * n as f64 / known as f64).to_string()
                };
                w.write_record([
                    p.name(),
                    label_name(*industrial),
                    t.name(),
                    &n.to_string(),
                    &share,
                ])
                .map_err(csv_err(file))?;
            }
        }
        w.flush().map_err(|e| Error::io(file, e))
    }

    /// Columns `protocol,label,domestic,foreign,unresolved,domestic_pct`.
    pub fn write_domestic<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let file = "domestic.csv";
        w.write_record([
            "protocol",
            "label",
            "domestic",
            "foreign",
            "unresolved",
            "domestic_pct",
        ])
        .map_err(csv_err(file))?;
        for ((p, industrial), cell) in &self.locality {
            let t = cell.domestic;
            let pct = t
                .ratio()
                .map(|r| (100.0 * r).to_string())
                .unwrap_or_default();
            w.write_record([
                p.name(),
                label_name(*industrial),
                &t.yes.to_string(),
                &t.no.to_string(),
                &t.indeterminate.to_string(),
                &pct,
            ])
            .map_err(csv_err(file))?;
        }
        w.flush().map_err(|e| Error::io(file, e))
    }

    pub fn write_daily<W: Write>(&self, out: W) -> Result<()> {
        self.daily
            .write_tsv(out, |v| self.interval(v))
            .map_err(|e| Error::io("daily.tsv", e))
    }

    pub fn write_stability<W: Write>(&self, out: W) -> Result<()> {
        write_stability_csv(out, &host_stability(&self.activity)).map_err(csv_err("stability.csv"))
    }

    /// Columns `asn,protocol_count,protocols,suspicious`.
    pub fn write_asn_protocols<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let file = "asn_protocols.csv";
        w.write_record(["asn", "protocol_count", "protocols", "suspicious"])
            .map_err(csv_err(file))?;
        for (asn, ps) in &self.asn_protocols.per_asn {
            let names: Vec<&str> = ps.iter().map(|p| p.name()).collect();
            w.write_record([
                asn.to_string(),
                ps.len().to_string(),
                names.join(";"),
                self.asn_protocols.is_suspicious(*asn).to_string(),
            ])
            .map_err(csv_err(file))?;
        }
        w.flush().map_err(|e| Error::io(file, e))
    }

    pub fn write_scan_overlap<W: Write>(&self, out: W, snapshot: &ScanSnapshot) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let file = "scan_overlap.csv";
        w.write_record([
            "protocol",
            "role",
            "passive_hosts",
            "transport_hosts",
            "application_hosts",
            "transport_pct",
            "application_pct",
        ])
        .map_err(csv_err(file))?;
        for r in scan_overlap(&self.passive_hosts, snapshot) {
            let role = match r.role {
                HostRole::Source => "source",
                HostRole::Destination => "destination",
            };
            w.write_record([
                r.protocol.name(),
                role,
                &r.passive_hosts.to_string(),
                &r.transport_hosts.to_string(),
                &r.application_hosts.to_string(),
                &r.transport_pct.to_string(),
                &r.application_pct.to_string(),
            ])
            .map_err(csv_err(file))?;
        }
        w.flush().map_err(|e| Error::io(file, e))
    }

    /// Columns `vantage,rank,protocol,packets,extrapolated`.
    pub fn write_ranking<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let file = "ranking.csv";
        w.write_record(["vantage", "rank", "protocol", "packets", "extrapolated"])
            .map_err(csv_err(file))?;
        let mut per_vantage: BTreeMap<&str, BTreeMap<ProtocolId, u64>> = BTreeMap::new();
        for ((v, p), n) in &self.protocol_counts {
            per_vantage.entry(v).or_default().insert(*p, *n);
        }
        for (v, counts) in per_vantage {
            for (i, (p, n)) in rank_counts(&counts).into_iter().enumerate() {
                w.write_record([
                    v,
                    &(i + 1).to_string(),
                    p.name(),
                    &n.to_string(),
                    &extrapolate(n, self.interval(v)).to_string(),
                ])
                .map_err(csv_err(file))?;
            }
        }
        w.flush().map_err(|e| Error::io(file, e))
    }

    pub fn summary(&self) -> serde_json::Value {
        let suspicious: Vec<u32> = self.asn_protocols.suspicious().collect();
        serde_json::json!({
            "captures": self.stats,
            "sanitize": self.sanitize,
            "sample_intervals": self.sample_intervals,
            "suspicious_asns": suspicious,
            "stability_window": "inclusive",
        })
    }

    /// Writes the full report bundle into `dir`.
    pub fn write_bundle(&self, dir: &Path, snapshot: &ScanSnapshot) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let create = |name: &str| -> Result<BufWriter<File>> {
            let path = dir.join(name);
            File::create(&path)
                .map(BufWriter::new)
                .map_err(|e| Error::io(path, e))
        };
        self.write_sanitize(create(SANITIZE_CSV)?)?;
        self.filters
            .write_csv(create("filters.csv")?)
            .map_err(csv_err("filters.csv"))?;
        self.write_transitions(create("transitions.csv")?)?;
        self.write_domestic(create("domestic.csv")?)?;
        self.write_daily(create("daily.tsv")?)?;
        self.write_stability(create("stability.csv")?)?;
        self.write_asn_protocols(create("asn_protocols.csv")?)?;
        self.write_scan_overlap(create("scan_overlap.csv")?, snapshot)?;
        self.write_ranking(create("ranking.csv")?)?;
        let mut s = create("summary.json")?;
        let text = serde_json::to_string_pretty(&self.summary()).expect("summary serializes");
        writeln!(s, "{text}")
            .and_then(|_| s.flush())
            .map_err(|e| Error::io(dir.join("summary.json"), e))
    }
}

pub const SANITIZE_CSV: &str = "sanitize.csv";

/// Every file written by [`Analysis::write_bundle`].
pub const BUNDLE_FILES: &[&str] = &[
    SANITIZE_CSV,
    "filters.csv",
    "transitions.csv",
    "domestic.csv",
    "daily.tsv",
    "stability.csv",
    "asn_protocols.csv",
    "scan_overlap.csv",
    "ranking.csv",
    "summary.json",
];

fn csv_err(file: &'static str) -> impl Fn(csv::Error) -> Error {
    move |e| Error::Csv {
        path: PathBuf::from(file),
        source: e,
    }
}
