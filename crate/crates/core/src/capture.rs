//! Classic pcap ingestion into normalized, truncated packet records.
//!
//! Only Ethernet captures carrying IPv4 are modelled. A single 802.1Q tag is
//! unwrapped; stacked tags, IPv6, ARP and IP payloads other than ICMP, TCP and
//! UDP are skipped and counted so that `records + skipped == frames` holds
//! for every file.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::Ipv4Addr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAGIC_MICROS: u32 = 0xA1B2_C3D4;
const MAGIC_NANOS: u32 = 0xA1B2_3C4D;
const LINKTYPE_ETHERNET: u32 = 1;
const MAX_RECORD_LEN: u32 = 256 * 1024 * 1024;

const ETHERTYPE_IPV4: u16 = 0x0800;
const ETHERTYPE_IPV6: u16 = 0x86DD;
const ETHERTYPE_VLAN: u16 = 0x8100;
const ETHERTYPE_QINQ: u16 = 0x88A8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transport {
    Icmp,
    Tcp,
    Udp,
}

impl Transport {
    pub fn number(self) -> u8 {
        match self {
            Transport::Icmp => 1,
            Transport::Tcp => 6,
            Transport::Udp => 17,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Transport::Icmp),
            6 => Some(Transport::Tcp),
            17 => Some(Transport::Udp),
            _ => None,
        }
    }
}

/// Why a frame did not become a [`PacketRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    NotIpv4,
    Ipv6,
    StackedVlan,
    UnsupportedIpProtocol,
    Fragment,
    TruncatedHeader,
}

/// Per-vantage capture properties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptureMeta {
    pub vantage: String,
    /// One captured packet stands for this many packets on the wire.
    pub sample_interval: u64,
    /// Bytes kept per frame, counted from the start of the Ethernet header.
    pub snap_len: u32,
}

impl CaptureMeta {
    pub fn new(vantage: impl Into<String>, sample_interval: u64, snap_len: u32) -> Result<Self> {
        let meta = CaptureMeta {
            vantage: vantage.into(),
            sample_interval,
            snap_len,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vantage.is_empty() {
            return Err(Error::Invalid("vantage name is empty".into()));
        }
        if self.sample_interval < 1 {
            return Err(Error::Invalid(format!(
                "vantage {}: sample_interval must be >= 1",
                self.vantage
            )));
        }
        if self.snap_len < 46 {
            return Err(Error::Invalid(format!(
                "vantage {}: snap_len {} is below 46 bytes",
                self.vantage, self.snap_len
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    l3: usize,
    l4: usize,
    payload: usize,
    /// End of the IP datagram inside `captured` (excludes Ethernet padding).
    end: usize,
    payload_orig_len: usize,
}

/// One sampled, truncated frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketRecord {
    /// Microseconds since the Unix epoch (UTC).
    pub ts: i64,
    pub src_ip: Ipv4Addr,
    pub dst_ip: Ipv4Addr,
    pub transport: Transport,
    /// Zero for ICMP.
    pub src_port: u16,
    pub dst_port: u16,
    /// Bytes from the start of the link-layer frame.
    pub captured: Arc<[u8]>,
    pub orig_len: u32,
    pub vantage: Arc<str>,
    layout: Layout,
}

impl PacketRecord {
    pub fn from_frame(
        ts: i64,
        frame: impl Into<Arc<[u8]>>,
        orig_len: u32,
        vantage: Arc<str>,
    ) -> std::result::Result<Self, SkipReason> {
        let captured: Arc<[u8]> = frame.into();
        let orig_len = orig_len.max(captured.len() as u32);
        let parsed = parse_frame(&captured)?;
        Ok(PacketRecord {
            ts,
            src_ip: parsed.src_ip,
            dst_ip: parsed.dst_ip,
            transport: parsed.transport,
            src_port: parsed.src_port,
            dst_port: parsed.dst_port,
            captured,
            orig_len,
            vantage,
            layout: parsed.layout,
        })
    }

    /// The same packet as it would look with only `len` bytes captured.
    pub fn truncated_to(&self, len: usize) -> std::result::Result<Self, SkipReason> {
        let len = len.min(self.captured.len());
        PacketRecord::from_frame(
            self.ts,
            &self.captured[..len],
            self.orig_len,
            self.vantage.clone(),
        )
    }

    pub fn ip_proto(&self) -> u8 {
        self.transport.number()
    }

    /// Transport payload as captured (TCP/UDP data, or the ICMP body after
    /// the 8-byte ICMP header).
    pub fn payload(&self) -> &[u8] {
        &self.captured[self.layout.payload..self.layout.end]
    }

    /// Payload length on the wire, derived from the IPv4 total length.
    pub fn payload_orig_len(&self) -> usize {
        self.layout.payload_orig_len
    }

    pub fn ip_datagram(&self) -> &[u8] {
        &self.captured[self.layout.l3..self.layout.end]
    }

    pub fn icmp_type_code(&self) -> Option<(u8, u8)> {
        if self.transport != Transport::Icmp {
            return None;
        }
        let l4 = &self.captured[self.layout.l4..self.layout.end];
        Some((l4[0], l4[1]))
    }

    pub fn dst_mac(&self) -> [u8; 6] {
        self.captured[0..6]
            .try_into()
            .expect("frame has an Ethernet header")
    }

    pub fn src_mac(&self) -> [u8; 6] {
        self.captured[6..12]
            .try_into()
            .expect("frame has an Ethernet header")
    }

    pub fn day(&self) -> NaiveDate {
        utc_day(self.ts)
    }
}

pub fn utc_day(ts_micros: i64) -> NaiveDate {
    DateTime::from_timestamp_micros(ts_micros)
        .map(|dt| dt.date_naive())
        .unwrap_or_default()
}

struct ParsedFrame {
    src_ip: Ipv4Addr,
    dst_ip: Ipv4Addr,
    transport: Transport,
    src_port: u16,
    dst_port: u16,
    layout: Layout,
}

fn be16(b: &[u8], at: usize) -> u16 {
    u16::from_be_bytes([b[at], b[at + 1]])
}

fn parse_frame(frame: &[u8]) -> std::result::Result<ParsedFrame, SkipReason> {
    if frame.len() < 14 {
        return Err(SkipReason::TruncatedHeader);
    }
    let mut ethertype = be16(frame, 12);
    let mut l3 = 14;
    if ethertype == ETHERTYPE_QINQ {
        return Err(SkipReason::StackedVlan);
    }
    if ethertype == ETHERTYPE_VLAN {
        if frame.len() < 18 {
            return Err(SkipReason::TruncatedHeader);
        }
        ethertype = be16(frame, 16);
        l3 = 18;
        if ethertype == ETHERTYPE_VLAN || ethertype == ETHERTYPE_QINQ {
            return Err(SkipReason::StackedVlan);
        }
    }
    match ethertype {
        ETHERTYPE_IPV4 => {}
        ETHERTYPE_IPV6 => return Err(SkipReason::Ipv6),
        _ => return Err(SkipReason::NotIpv4),
    }
    let ip = parse_ipv4(&frame[l3..])?;
    let end = l3 + ip.captured_len;
    let l4 = l3 + ip.header_len;
    let l4_bytes = &frame[l4..end];
    let (src_port, dst_port, l4_header_len) = match ip.transport {
        Transport::Tcp => {
            if l4_bytes.len() < 4 {
                return Err(SkipReason::TruncatedHeader);
            }
            let hdr = if l4_bytes.len() >= 13 {
                ((l4_bytes[12] >> 4) as usize * 4).max(20)
            } else {
                20
            };
            (be16(l4_bytes, 0), be16(l4_bytes, 2), hdr)
        }
        Transport::Udp => {
            if l4_bytes.len() < 4 {
                return Err(SkipReason::TruncatedHeader);
            }
            (be16(l4_bytes, 0), be16(l4_bytes, 2), 8)
        }
        Transport::Icmp => {
            if l4_bytes.len() < 2 {
                return Err(SkipReason::TruncatedHeader);
            }
            (0, 0, 8)
        }
    };
    let payload = (l4 + l4_header_len).min(end);
    let payload_orig_len = ip
        .total_len
        .saturating_sub(ip.header_len)
        .saturating_sub(l4_header_len);
    Ok(ParsedFrame {
        src_ip: ip.src,
        dst_ip: ip.dst,
        transport: ip.transport,
        src_port,
        dst_port,
        layout: Layout {
            l3,
            l4,
            payload,
            end,
            payload_orig_len,
        },
    })
}

/// Minimal IPv4 header view shared by frame parsing and ICMP quote parsing.
pub(crate) struct Ipv4View {
    pub src: Ipv4Addr,
    pub dst: Ipv4Addr,
    pub transport: Transport,
    pub header_len: usize,
    /// Value of the total-length field.
    pub total_len: usize,
    /// Bytes of the datagram present in the buffer (padding excluded).
    pub captured_len: usize,
}

pub(crate) fn parse_ipv4(b: &[u8]) -> std::result::Result<Ipv4View, SkipReason> {
    if b.len() < 20 {
        return Err(SkipReason::TruncatedHeader);
    }
    if b[0] >> 4 != 4 {
        return Err(SkipReason::NotIpv4);
    }
    let header_len = (b[0] & 0x0F) as usize * 4;
    if header_len < 20 || b.len() < header_len {
        return Err(SkipReason::TruncatedHeader);
    }
    let total_len = be16(b, 2) as usize;
    let frag_offset = be16(b, 6) & 0x1FFF;
    let transport = Transport::from_number(b[9]).ok_or(SkipReason::UnsupportedIpProtocol)?;
    if frag_offset != 0 {
        return Err(SkipReason::Fragment);
    }
    let captured_len = if total_len >= header_len {
        total_len.min(b.len())
    } else {
        b.len()
    };
    Ok(Ipv4View {
        src: Ipv4Addr::new(b[12], b[13], b[14], b[15]),
        dst: Ipv4Addr::new(b[16], b[17], b[18], b[19]),
        transport,
        header_len,
        total_len: total_len.max(header_len),
        captured_len,
    })
}

/// Counters available once a capture stream is exhausted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CaptureStats {
    pub frames: u64,
    pub records: u64,
    pub skipped: BTreeMap<SkipReason, u64>,
    pub truncated_tail: bool,
}

impl CaptureStats {
    pub fn skipped_total(&self) -> u64 {
        self.skipped.values().sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct FileFormat {
    big_endian: bool,
    nanos: bool,
}

impl FileFormat {
    fn u32(&self, b: &[u8]) -> u32 {
        let arr = [b[0], b[1], b[2], b[3]];
        if self.big_endian {
            u32::from_be_bytes(arr)
        } else {
            u32::from_le_bytes(arr)
        }
    }
}

/// Streaming reader over a classic pcap file.
pub struct CaptureReader<R> {
    input: R,
    path: PathBuf,
    format: FileFormat,
    meta: CaptureMeta,
    vantage: Arc<str>,
    stats: CaptureStats,
    done: bool,
}

pub fn read_capture(path: &Path, meta: &CaptureMeta) -> Result<CaptureReader<BufReader<File>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    CaptureReader::new(BufReader::new(file), path, meta)
}

/// Reads as many bytes as are available up to `buf.len()`.
fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

impl<R: Read> CaptureReader<R> {
    pub fn new(mut input: R, path: &Path, meta: &CaptureMeta) -> Result<Self> {
        meta.validate()?;
        let mut header = [0u8; 24];
        let n = read_full(&mut input, &mut header).map_err(|e| Error::io(path, e))?;
        if n < 4 {
            return Err(Error::TruncatedHeader { path: path.into() });
        }
        let le = u32::from_le_bytes([header[0], header[1], header[2], header[3]]);
        let be = u32::from_be_bytes([header[0], header[1], header[2], header[3]]);
        let format = match (le, be) {
            (MAGIC_MICROS, _) => FileFormat {
                big_endian: false,
                nanos: false,
            },
            (MAGIC_NANOS, _) => FileFormat {
                big_endian: false,
                nanos: true,
            },
            (_, MAGIC_MICROS) => FileFormat {
                big_endian: true,
                nanos: false,
            },
            (_, MAGIC_NANOS) => FileFormat {
                big_endian: true,
                nanos: true,
            },
            _ => {
                return Err(Error::BadMagic {
                    path: path.into(),
                    magic: le,
                })
            }
        };
        if n < header.len() {
            return Err(Error::TruncatedHeader { path: path.into() });
        }
        let linktype = format.u32(&header[20..24]) & 0x0FFF_FFFF;
        if linktype != LINKTYPE_ETHERNET {
            return Err(Error::UnsupportedLinkType {
                path: path.into(),
                linktype,
            });
        }
        Ok(CaptureReader {
            input,
            path: path.into(),
            format,
            vantage: Arc::from(meta.vantage.as_str()),
            meta: meta.clone(),
            stats: CaptureStats::default(),
            done: false,
        })
    }

    pub fn stats(&self) -> &CaptureStats {
        &self.stats
    }

    pub fn meta(&self) -> &CaptureMeta {
        &self.meta
    }

    fn next_frame(&mut self) -> Result<Option<(i64, Vec<u8>, u32)>> {
        let mut rec = [0u8; 16];
        let n = read_full(&mut self.input, &mut rec).map_err(|e| Error::io(&self.path, e))?;
        if n == 0 {
            return Ok(None);
        }
        if n < rec.len() {
            self.truncated_tail();
            return Ok(None);
        }
        let f = self.format;
        let secs = f.u32(&rec[0..4]) as i64;
        let frac = f.u32(&rec[4..8]) as i64;
        let incl_len = f.u32(&rec[8..12]);
        let orig_len = f.u32(&rec[12..16]);
        if incl_len > MAX_RECORD_LEN {
            return Err(Error::parse(
                &self.path,
                format!("record length {incl_len} exceeds limit"),
            ));
        }
        let mut data = vec![0u8; incl_len as usize];
        let got = read_full(&mut self.input, &mut data).map_err(|e| Error::io(&self.path, e))?;
        if got < data.len() {
            self.truncated_tail();
            return Ok(None);
        }
        let micros = if f.nanos { frac / 1000 } else { frac };
        data.truncate(self.meta.snap_len as usize);
        Ok(Some((secs * 1_000_000 + micros, data, orig_len)))
    }

    fn truncated_tail(&mut self) {
        log::warn!(
            "{}: truncated final record after {} frames",
            self.path.display(),
            self.stats.frames
        );
        self.stats.truncated_tail = true;
    }
}

impl<R: Read> Iterator for CaptureReader<R> {
    type Item = Result<PacketRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let (ts, data, orig_len) = match self.next_frame() {
                Ok(Some(frame)) => frame,
                Ok(None) => {
                    self.done = true;
                    return None;
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            };
            self.stats.frames += 1;
            match PacketRecord::from_frame(ts, data, orig_len, self.vantage.clone()) {
                Ok(record) => {
                    self.stats.records += 1;
                    return Some(Ok(record));
                }
                Err(reason) => *self.stats.skipped.entry(reason).or_default() += 1,
            }
        }
        None
    }
}

/// Timestamp resolution and byte order of a written pcap file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PcapFormat {
    pub nanos: bool,
    pub big_endian: bool,
}

/// Writer for classic pcap files.
pub struct PcapWriter<W: Write> {
    out: W,
    format: PcapFormat,
}

impl PcapWriter<BufWriter<File>> {
    pub fn create(path: &Path, snap_len: u32) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        PcapWriter::new(BufWriter::new(file), snap_len, PcapFormat::default())
            .map_err(|e| Error::io(path, e))
    }
}

impl<W: Write> PcapWriter<W> {
    pub fn new(mut out: W, snap_len: u32, format: PcapFormat) -> io::Result<Self> {
        let magic = if format.nanos {
            MAGIC_NANOS
        } else {
            MAGIC_MICROS
        };
        let mut header = Vec::with_capacity(24);
        let put32 = |h: &mut Vec<u8>, v: u32| {
            h.extend_from_slice(&if format.big_endian {
                v.to_be_bytes()
            } else {
                v.to_le_bytes()
            })
        };
        let put16 = |h: &mut Vec<u8>, v: u16| {
            h.extend_from_slice(&if format.big_endian {
                v.to_be_bytes()
            } else {
                v.to_le_bytes()
            })
        };
        put32(&mut header, magic);
        put16(&mut header, 2);
        put16(&mut header, 4);
        put32(&mut header, 0);
        put32(&mut header, 0);
        put32(&mut header, snap_len);
        put32(&mut header, LINKTYPE_ETHERNET);
        out.write_all(&header)?;
        Ok(PcapWriter { out, format })
    }

    pub fn write_frame(
        &mut self,
        ts_micros: i64,
        captured: &[u8],
        orig_len: u32,
    ) -> io::Result<()> {
        let secs = ts_micros.div_euclid(1_000_000) as u32;
        let micros = ts_micros.rem_euclid(1_000_000) as u32;
        let frac = if self.format.nanos {
            micros * 1000
        } else {
            micros
        };
        for v in [secs, frac, captured.len() as u32, orig_len] {
            let bytes = if self.format.big_endian {
                v.to_be_bytes()
            } else {
                v.to_le_bytes()
            };
            self.out.write_all(&bytes)?;
        }
        self.out.write_all(captured)
    }

    pub fn into_inner(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{FrameBuilder, L4};

    fn meta(snap: u32) -> CaptureMeta {
        CaptureMeta::new("test", 1, snap).unwrap()
    }

    fn write(frames: &[(i64, Vec<u8>)], format: PcapFormat) -> Vec<u8> {
        let mut w = PcapWriter::new(Vec::new(), 65535, format).unwrap();
        for (ts, f) in frames {
            w.write_frame(*ts, f, f.len() as u32).unwrap();
        }
        w.into_inner().unwrap()
    }

    fn read_all(bytes: &[u8], snap: u32) -> (Vec<PacketRecord>, CaptureStats) {
        let mut reader = CaptureReader::new(bytes, Path::new("mem.pcap"), &meta(snap)).unwrap();
        let records: Vec<_> = reader.by_ref().map(|r| r.unwrap()).collect();
        (records, reader.stats().clone())
    }

    fn tcp_frame(payload: &[u8]) -> Vec<u8> {
        FrameBuilder::new([10, 0, 0, 1], [10, 0, 0, 2])
            .l4(L4::tcp(49152, 502))
            .build(payload)
    }

    fn udp_frame(payload: &[u8]) -> Vec<u8> {
        FrameBuilder::new([10, 0, 0, 1], [10, 0, 0, 2])
            .l4(L4::udp(49152, 47808))
            .build(payload)
    }

    fn arp_frame() -> Vec<u8> {
        let mut f = vec![0xff; 6];
        f.extend_from_slice(&[2, 0, 0, 0, 0, 1]);
        f.extend_from_slice(&[0x08, 0x06]);
        f.extend_from_slice(&[0u8; 28]);
        f
    }

    #[test]
    fn skips_non_ip_frames() {
        let bytes = write(
            &[
                (0, tcp_frame(b"abc")),
                (1, arp_frame()),
                (2, udp_frame(b"xyz")),
            ],
            PcapFormat::default(),
        );
        let (records, stats) = read_all(&bytes, 65535);
        assert_eq!(records.len(), 2);
        assert_eq!(stats.frames, 3);
        assert_eq!(stats.skipped_total(), 1);
        assert_eq!(stats.skipped[&SkipReason::NotIpv4], 1);
        assert_eq!(records[0].transport, Transport::Tcp);
        assert_eq!(records[1].transport, Transport::Udp);
        assert_eq!(records[1].payload(), b"xyz");
    }

    #[test]
    fn snap_truncation() {
        let frame = udp_frame(&[0x55; 500 - 42]);
        assert_eq!(frame.len(), 500);
        let bytes = write(&[(0, frame)], PcapFormat::default());
        let (records, _) = read_all(&bytes, 128);
        assert_eq!(records[0].captured.len(), 128);
        assert_eq!(records[0].orig_len, 500);
        assert_eq!(records[0].payload_orig_len(), 458);
        assert_eq!(records[0].payload().len(), 128 - 42);
    }

    #[test]
    fn all_magic_variants_agree() {
        let frames = [(1_500_000, tcp_frame(b"hello"))];
        let reference = read_all(&write(&frames, PcapFormat::default()), 65535).0;
        assert_eq!(reference[0].ts, 1_500_000);
        for nanos in [false, true] {
            for big_endian in [false, true] {
                let bytes = write(&frames, PcapFormat { nanos, big_endian });
                let (records, _) = read_all(&bytes, 65535);
                assert_eq!(records, reference, "nanos={nanos} be={big_endian}");
            }
        }
    }

    #[test]
    fn handwritten_nanosecond_header() {
        // same frame, hand-encoded with the two magic variants
        let frame = udp_frame(b"q");
        let mut micros = vec![0xD4, 0xC3, 0xB2, 0xA1, 2, 0, 4, 0];
        micros.extend_from_slice(&[0; 8]);
        micros.extend_from_slice(&65535u32.to_le_bytes());
        micros.extend_from_slice(&1u32.to_le_bytes());
        let mut nanos = micros.clone();
        nanos[0..4].copy_from_slice(&[0x4D, 0x3C, 0xB2, 0xA1]);
        micros.extend_from_slice(&1u32.to_le_bytes());
        micros.extend_from_slice(&500_000u32.to_le_bytes());
        nanos.extend_from_slice(&1u32.to_le_bytes());
        nanos.extend_from_slice(&500_000_000u32.to_le_bytes());
        for f in [&mut micros, &mut nanos] {
            f.extend_from_slice(&(frame.len() as u32).to_le_bytes());
            f.extend_from_slice(&(frame.len() as u32).to_le_bytes());
            f.extend_from_slice(&frame);
        }
        let a = read_all(&micros, 65535).0;
        let b = read_all(&nanos, 65535).0;
        assert_eq!(a[0].ts, 1_500_000);
        assert_eq!(a, b);
    }

    #[test]
    fn bad_magic_and_short_header() {
        let err = CaptureReader::new(&[1u8, 2, 3, 4, 5][..], Path::new("x"), &meta(128));
        assert!(matches!(err, Err(Error::BadMagic { .. })));
        let err = CaptureReader::new(
            &[0xD4u8, 0xC3, 0xB2, 0xA1, 2, 0][..],
            Path::new("x"),
            &meta(128),
        );
        assert!(matches!(err, Err(Error::TruncatedHeader { .. })));
    }

    #[test]
    fn truncated_final_record_stops() {
        let mut bytes = write(
            &[(0, tcp_frame(b"a")), (1, tcp_frame(b"b"))],
            PcapFormat::default(),
        );
        bytes.truncate(bytes.len() - 5);
        let (records, stats) = read_all(&bytes, 65535);
        assert_eq!(records.len(), 1);
        assert!(stats.truncated_tail);
    }

    #[test]
    fn vlan_unwrapped_once_qinq_skipped() {
        let tagged = FrameBuilder::new([10, 0, 0, 1], [10, 0, 0, 2])
            .vlan(10)
            .l4(L4::udp(1, 2))
            .build(b"x");
        let rec =
            PacketRecord::from_frame(0, tagged.clone(), tagged.len() as u32, "v".into()).unwrap();
        assert_eq!(rec.payload(), b"x");
        let mut double = tagged[..16].to_vec();
        double.extend_from_slice(&[0x81, 0x00, 0x00, 0x14]);
        double.extend_from_slice(&tagged[16..]);
        assert_eq!(
            PacketRecord::from_frame(0, double, 0, "v".into()).unwrap_err(),
            SkipReason::StackedVlan
        );
    }

    #[test]
    fn ethernet_padding_excluded_from_payload() {
        let mut frame = udp_frame(&[0x81, 0x0A, 0x00, 0x04]);
        frame.resize(60, 0);
        let rec = PacketRecord::from_frame(0, frame, 60, "v".into()).unwrap();
        assert_eq!(rec.payload(), &[0x81, 0x0A, 0x00, 0x04]);
        assert_eq!(rec.payload_orig_len(), 4);
    }

    #[test]
    fn meta_validation() {
        assert!(CaptureMeta::new("ixp", 0, 128).is_err());
        assert!(CaptureMeta::new("ixp", 1, 45).is_err());
        assert!(CaptureMeta::new("ixp", 16384, 128).is_ok());
    }

    #[test]
    fn utc_day_bucketing() {
        // 2018-01-03T23:59:59Z
        assert_eq!(
            utc_day(1_515_023_999_000_000),
            NaiveDate::from_ymd_opt(2018, 1, 3).unwrap()
        );
    }
}
