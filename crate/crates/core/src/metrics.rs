//! Time series, extrapolation, request shares, rankings and host stability.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::net::Ipv4Addr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::ports::{Direction, ProtocolId};

/// On-wire packet estimate for `count` sampled packets. Exact while the
/// product stays below 2^53.
pub fn extrapolate(count: u64, sample_interval: u64) -> f64 {
    (count as u128 * sample_interval as u128) as f64
}

/// `requests / (requests + replies)`, or `None` without either.
pub fn request_share(requests: u64, replies: u64) -> Option<f64> {
    let d = requests + replies;
    (d > 0).then(|| requests as f64 / d as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionCounts {
    pub requests: u64,
    pub replies: u64,
    pub unrelated: u64,
}

impl DirectionCounts {
    pub fn add(&mut self, d: Direction) {
        match d {
            Direction::Request => self.requests += 1,
            Direction::Reply => self.replies += 1,
            Direction::Unrelated => self.unrelated += 1,
        }
    }

    pub fn merge(&mut self, o: &DirectionCounts) {
        self.requests += o.requests;
        self.replies += o.replies;
        self.unrelated += o.unrelated;
    }

    pub fn total(&self) -> u64 {
        self.requests + self.replies + self.unrelated
    }

    pub fn request_share(&self) -> Option<f64> {
        request_share(self.requests, self.replies)
    }
}

/// Activity window of one host. `w` counts both the first and the last day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostActivity {
    pub ip: Ipv4Addr,
    pub first_day: NaiveDate,
    pub last_day: NaiveDate,
    pub w: u64,
    pub n: u64,
    pub ratio: f64,
    #[serde(skip)]
    pub active_days: BTreeSet<NaiveDate>,
}

impl HostActivity {
    /// `None` for an empty day set.
    pub fn from_days(ip: Ipv4Addr, active_days: BTreeSet<NaiveDate>) -> Option<Self> {
        let first_day = *active_days.first()?;
        let last_day = *active_days.last()?;
        let w = (last_day - first_day).num_days() as u64 + 1;
        let n = active_days.len() as u64;
        Some(HostActivity {
            ip,
            first_day,
            last_day,
            w,
            n,
            ratio: n as f64 / w as f64,
            active_days,
        })
    }
}

/// Active UTC days per host.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActivityTracker {
    days: HashMap<Ipv4Addr, BTreeSet<NaiveDate>>,
}

impl ActivityTracker {
    pub fn add(&mut self, ip: Ipv4Addr, day: NaiveDate) {
        self.days.entry(ip).or_default().insert(day);
    }

    pub fn merge(&mut self, o: &ActivityTracker) {
        for (ip, d) in &o.days {
            self.days.entry(*ip).or_default().extend(d);
        }
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }
}

/// `(w, n)` per host, most active first; ties by window then address.
pub fn host_stability(tracker: &ActivityTracker) -> Vec<HostActivity> {
    let mut out: Vec<HostActivity> = tracker
        .days
        .iter()
        .filter_map(|(ip, d)| HostActivity::from_days(*ip, d.clone()))
        .collect();
    out.sort_by(|a, b| b.n.cmp(&a.n).then(b.w.cmp(&a.w)).then(a.ip.cmp(&b.ip)));
    out
}

pub fn write_stability_csv<W: Write>(out: W, hosts: &[HostActivity]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["ip", "first_day", "last_day", "w", "n", "ratio"])?;
    for h in hosts {
        w.write_record([
            h.ip.to_string(),
            h.first_day.to_string(),
            h.last_day.to_string(),
            h.w.to_string(),
            h.n.to_string(),
            h.ratio.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Protocols by descending packet count, ties by name.
pub fn protocol_rank<I: IntoIterator<Item = ProtocolId>>(protocols: I) -> Vec<(ProtocolId, u64)> {
    let mut counts: BTreeMap<ProtocolId, u64> = BTreeMap::new();
    for p in protocols {
        *counts.entry(p).or_default() += 1;
    }
    rank_counts(&counts)
}

pub fn rank_counts(counts: &BTreeMap<ProtocolId, u64>) -> Vec<(ProtocolId, u64)> {
    let mut v: Vec<_> = counts.iter().map(|(p, c)| (*p, *c)).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.name().cmp(b.0.name())));
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesLabel {
    All,
    Industrial,
}

impl SeriesLabel {
    pub fn name(self) -> &'static str {
        match self {
            SeriesLabel::All => "all",
            SeriesLabel::Industrial => "industrial",
        }
    }
}

/// Daily packet counts per vantage, protocol and label.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DailySeries {
    counts: BTreeMap<(String, ProtocolId, SeriesLabel), BTreeMap<NaiveDate, u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailyRow {
    pub vantage: String,
    pub protocol: ProtocolId,
    pub label: SeriesLabel,
    pub day: NaiveDate,
    pub count: u64,
    pub extrapolated: f64,
}

impl DailySeries {
    /// Counts a packet in the `all` series and, if industrial, in the
    /// `industrial` series.
    pub fn add(&mut self, vantage: &str, protocol: ProtocolId, day: NaiveDate, industrial: bool) {
        self.bump(vantage, protocol, SeriesLabel::All, day);
        if industrial {
            self.bump(vantage, protocol, SeriesLabel::Industrial, day);
        }
    }

    fn bump(&mut self, vantage: &str, protocol: ProtocolId, label: SeriesLabel, day: NaiveDate) {
        *self
            .counts
            .entry((vantage.to_owned(), protocol, label))
            .or_default()
            .entry(day)
            .or_default() += 1;
    }

    pub fn merge(&mut self, o: &DailySeries) {
        for (k, days) in &o.counts {
            let mine = self.counts.entry(k.clone()).or_default();
            for (d, c) in days {
                *mine.entry(*d).or_default() += c;
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    fn range(&self) -> Option<(NaiveDate, NaiveDate)> {
        let first = self.counts.values().filter_map(|d| d.keys().next()).min()?;
        let last = self
            .counts
            .values()
            .filter_map(|d| d.keys().next_back())
            .max()?;
        Some((*first, *last))
    }

    /// Every group over the common day range, gaps filled with zero.
    /// An `industrial` group is emitted for every `all` group.
    pub fn rows(&self, sample_interval: impl Fn(&str) -> u64) -> Vec<DailyRow> {
        let Some((first, last)) = self.range() else {
            return Vec::new();
        };
        let mut keys: BTreeSet<_> = self.counts.keys().cloned().collect();
        for (v, p, _) in self.counts.keys() {
            keys.insert((v.clone(), *p, SeriesLabel::Industrial));
        }
        let empty = BTreeMap::new();
        let mut rows = Vec::new();
        for key in keys {
            let days = self.counts.get(&key).unwrap_or(&empty);
            let interval = sample_interval(&key.0);
            let mut day = first;
            while day <= last {
                let count = days.get(&day).copied().unwrap_or(0);
                rows.push(DailyRow {
                    vantage: key.0.clone(),
                    protocol: key.1,
                    label: key.2,
                    day,
                    count,
                    extrapolated: extrapolate(count, interval),
                });
                day = day + Days::new(1);
            }
        }
        rows
    }

    /// Plot-ready TSV: vantage, protocol, day, count, extrapolated, label.
    pub fn write_tsv<W: Write>(
        &self,
        mut out: W,
        sample_interval: impl Fn(&str) -> u64,
    ) -> std::io::Result<()> {
        writeln!(out, "vantage\tprotocol\tday\tcount\textrapolated\tlabel")?;
        for r in self.rows(sample_interval) {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.vantage,
                r.protocol,
                r.day,
                r.count,
                r.extrapolated,
                r.label.name()
            )?;
        }
        Ok(())
    }
}
