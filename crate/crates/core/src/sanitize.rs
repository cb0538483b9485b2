//! Three-step removal of false ICS candidates: ICMP-quoted datagrams,
//! malformed packets, and payloads fingerprinted as non-ICS protocols.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::capture::{PacketRecord, Transport};
use crate::dissect::{quoted_segment, Dissection, ICMP_ERROR_TYPES};
use crate::dpi::DpiCatalog;
use crate::ports::PortRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SanitizeVerdict {
    Kept,
    DroppedTunnel,
    DroppedMalformed,
    DroppedKnownProtocol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Tunnel,
    Malformed,
    KnownProtocol,
}

pub const STEP_ORDER: [Step; 3] = [Step::Tunnel, Step::Malformed, Step::KnownProtocol];

/// An ICMP error whose quoted datagram carries the identified payload.
pub fn strip_tunnels(record: &PacketRecord) -> SanitizeVerdict {
    let tunneled = record.transport == Transport::Icmp
        && record
            .icmp_type_code()
            .is_some_and(|(t, _)| ICMP_ERROR_TYPES.contains(&t))
        && quoted_segment(record).is_some_and(|s| !s.payload.is_empty());
    if tunneled {
        SanitizeVerdict::DroppedTunnel
    } else {
        SanitizeVerdict::Kept
    }
}

pub fn drop_malformed(dissection: &Dissection) -> SanitizeVerdict {
    if dissection.is_malformed() {
        SanitizeVerdict::DroppedMalformed
    } else {
        SanitizeVerdict::Kept
    }
}

pub fn dpi_cross_check(record: &PacketRecord, catalog: &DpiCatalog) -> SanitizeVerdict {
    if catalog.match_record(record).is_some() {
        SanitizeVerdict::DroppedKnownProtocol
    } else {
        SanitizeVerdict::Kept
    }
}

fn apply(
    step: Step,
    record: &PacketRecord,
    d: &Dissection,
    catalog: &DpiCatalog,
) -> SanitizeVerdict {
    match step {
        Step::Tunnel => strip_tunnels(record),
        Step::Malformed => drop_malformed(d),
        Step::KnownProtocol => dpi_cross_check(record, catalog),
    }
}

/// First dropping step in `order`, or `Kept`.
pub fn verdict_in_order(
    record: &PacketRecord,
    dissection: &Dissection,
    catalog: &DpiCatalog,
    order: [Step; 3],
) -> SanitizeVerdict {
    order
        .into_iter()
        .map(|s| apply(s, record, dissection, catalog))
        .find(|v| *v != SanitizeVerdict::Kept)
        .unwrap_or(SanitizeVerdict::Kept)
}

pub fn verdict(
    record: &PacketRecord,
    dissection: &Dissection,
    catalog: &DpiCatalog,
) -> SanitizeVerdict {
    verdict_in_order(record, dissection, catalog, STEP_ORDER)
}

/// Cumulative retention counters for one vantage point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SanitizeReport {
    pub candidates_in: u64,
    pub after_step1: u64,
    pub after_step2: u64,
    pub after_step3: u64,
    /// Records with any registered ICS port, counted before dissection.
    pub port_only_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRow {
    pub step: String,
    pub remaining_count: u64,
    pub remaining_pct: Option<f64>,
}

impl SanitizeReport {
    pub fn record(&mut self, v: SanitizeVerdict) {
        self.candidates_in += 1;
        match v {
            SanitizeVerdict::DroppedTunnel => {}
            SanitizeVerdict::DroppedMalformed => self.after_step1 += 1,
            SanitizeVerdict::DroppedKnownProtocol => {
                self.after_step1 += 1;
                self.after_step2 += 1;
            }
            SanitizeVerdict::Kept => {
                self.after_step1 += 1;
                self.after_step2 += 1;
                self.after_step3 += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &SanitizeReport) {
        self.candidates_in += other.candidates_in;
        self.after_step1 += other.after_step1;
        self.after_step2 += other.after_step2;
        self.after_step3 += other.after_step3;
        self.port_only_count += other.port_only_count;
    }

    /// Percentage of `candidates_in`; `None` when there were no candidates.
    pub fn pct(&self, count: u64) -> Option<f64> {
        (self.candidates_in > 0).then(|| 100.0 * count as f64 / self.candidates_in as f64)
    }

    /// Port-only detections as a percentage of the fully sanitized count.
    pub fn port_only_pct(&self) -> Option<f64> {
        (self.after_step3 > 0)
            .then(|| 100.0 * self.port_only_count as f64 / self.after_step3 as f64)
    }

    pub fn rows(&self) -> Vec<StepRow> {
        let row = |step: &str, n: u64, pct: Option<f64>| StepRow {
            step: step.to_owned(),
            remaining_count: n,
            remaining_pct: pct,
        };
        vec![
            row(
                "candidates",
                self.candidates_in,
                self.pct(self.candidates_in),
            ),
            row(
                "tunnels_removed",
                self.after_step1,
                self.pct(self.after_step1),
            ),
            row(
                "malformed_removed",
                self.after_step2,
                self.pct(self.after_step2),
            ),
            row("dpi_removed", self.after_step3, self.pct(self.after_step3)),
            row(
                "port_only_baseline",
                self.port_only_count,
                self.port_only_pct(),
            ),
        ]
    }
}

/// Runs the steps in order; the kept stream preserves input order.
pub fn sanitize<I>(
    candidates: I,
    catalog: &DpiCatalog,
) -> (Vec<(PacketRecord, Dissection)>, SanitizeReport)
where
    I: IntoIterator<Item = (PacketRecord, Dissection)>,
{
    let mut report = SanitizeReport::default();
    let mut kept = Vec::new();
    for (record, d) in candidates {
        let v = verdict(&record, &d, catalog);
        report.record(v);
        if v == SanitizeVerdict::Kept {
            kept.push((record, d));
        }
    }
    (kept, report)
}

pub fn port_only_baseline<'a, I>(records: I, ports: &PortRegistry) -> u64
where
    I: IntoIterator<Item = &'a PacketRecord>,
{
    records
        .into_iter()
        .filter(|r| {
            r.transport != Transport::Icmp
                && (ports.is_registered(r.src_port) || ports.is_registered(r.dst_port))
        })
        .count() as u64
}

fn fmt_pct(p: Option<f64>) -> String {
    p.map(|p| format!("{p:.1}")).unwrap_or_default()
}

/// CSV with columns `step,remaining_count,remaining_pct`; each step is
/// prefixed with its vantage, e.g. `ixp/dpi_removed`.
pub fn write_csv<'a, W, I>(out: W, reports: I) -> csv::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a SanitizeReport)>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "remaining_count", "remaining_pct"])?;
    for (vantage, report) in reports {
        for row in report.rows() {
            w.write_record([
                format!("{vantage}/{}", row.step),
                row.remaining_count.to_string(),
                fmt_pct(row.remaining_pct),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
