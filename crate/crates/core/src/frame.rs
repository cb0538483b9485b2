//! Ethernet/IPv4 frame construction for the golden corpus and the traffic
//! generator.

use std::net::Ipv4Addr;

pub const TCP_PSH_ACK: u8 = 0x18;
pub const TCP_SYN: u8 = 0x02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L4 {
    Tcp {
        src_port: u16,
        dst_port: u16,
        seq: u32,
        ack: u32,
        flags: u8,
        timestamps: Option<(u32, u32)>,
    },
    Udp {
        src_port: u16,
        dst_port: u16,
    },
    Icmp {
        kind: u8,
        code: u8,
    },
}

impl L4 {
    pub fn tcp(src_port: u16, dst_port: u16) -> Self {
        L4::Tcp {
            src_port,
            dst_port,
            seq: 1,
            ack: 1,
            flags: TCP_PSH_ACK,
            timestamps: None,
        }
    }

    /// TCP with the 12-byte timestamp option block (32-byte header).
    pub fn tcp_ts(src_port: u16, dst_port: u16, tsval: u32) -> Self {
        match L4::tcp(src_port, dst_port) {
            L4::Tcp {
                src_port,
                dst_port,
                seq,
                ack,
                flags,
                ..
            } => L4::Tcp {
                src_port,
                dst_port,
                seq,
                ack,
                flags,
                timestamps: Some((tsval, tsval.wrapping_sub(7))),
            },
            _ => unreachable!(),
        }
    }

    pub fn udp(src_port: u16, dst_port: u16) -> Self {
        L4::Udp { src_port, dst_port }
    }

    pub fn icmp(kind: u8, code: u8) -> Self {
        L4::Icmp { kind, code }
    }

    fn proto(&self) -> u8 {
        match self {
            L4::Tcp { .. } => 6,
            L4::Udp { .. } => 17,
            L4::Icmp { .. } => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FrameBuilder {
    src: Ipv4Addr,
    dst: Ipv4Addr,
    src_mac: [u8; 6],
    dst_mac: [u8; 6],
    vlan: Option<u16>,
    ttl: u8,
    ip_id: u16,
    l4: L4,
}

impl FrameBuilder {
    pub fn new(src: impl Into<Ipv4Addr>, dst: impl Into<Ipv4Addr>) -> Self {
        FrameBuilder {
            src: src.into(),
            dst: dst.into(),
            src_mac: [0x02, 0, 0, 0, 0, 0x01],
            dst_mac: [0x02, 0, 0, 0, 0, 0x02],
            vlan: None,
            ttl: 64,
            ip_id: 0,
            l4: L4::udp(0, 0),
        }
    }

    pub fn macs(mut self, src: [u8; 6], dst: [u8; 6]) -> Self {
        self.src_mac = src;
        self.dst_mac = dst;
        self
    }

    pub fn vlan(mut self, id: u16) -> Self {
        self.vlan = Some(id);
        self
    }

    pub fn ttl(mut self, ttl: u8) -> Self {
        self.ttl = ttl;
        self
    }

    pub fn ip_id(mut self, id: u16) -> Self {
        self.ip_id = id;
        self
    }

    pub fn l4(mut self, l4: L4) -> Self {
        self.l4 = l4;
        self
    }

    /// Bytes in front of the transport payload.
    pub fn overhead(&self) -> usize {
        let eth = if self.vlan.is_some() { 18 } else { 14 };
        let l4 = match self.l4 {
            L4::Tcp { timestamps, .. } => 20 + if timestamps.is_some() { 12 } else { 0 },
            L4::Udp { .. } | L4::Icmp { .. } => 8,
        };
        eth + 20 + l4
    }

    pub fn build(&self, payload: &[u8]) -> Vec<u8> {
        let mut frame = Vec::with_capacity(self.overhead() + payload.len());
        frame.extend_from_slice(&self.dst_mac);
        frame.extend_from_slice(&self.src_mac);
        if let Some(id) = self.vlan {
            frame.extend_from_slice(&[0x81, 0x00]);
            frame.extend_from_slice(&(id & 0x0FFF).to_be_bytes());
        }
        frame.extend_from_slice(&[0x08, 0x00]);
        frame.extend_from_slice(&self.ip_datagram(payload));
        frame
    }

    /// The IPv4 datagram alone, as quoted inside ICMP errors.
    pub fn ip_datagram(&self, payload: &[u8]) -> Vec<u8> {
        let segment = self.segment(payload);
        let total = 20 + segment.len();
        let mut ip = Vec::with_capacity(total);
        ip.push(0x45);
        ip.push(0);
        ip.extend_from_slice(&(total as u16).to_be_bytes());
        ip.extend_from_slice(&self.ip_id.to_be_bytes());
        ip.extend_from_slice(&[0x40, 0x00]);
        ip.push(self.ttl);
        ip.push(self.l4.proto());
        ip.extend_from_slice(&[0, 0]);
        ip.extend_from_slice(&self.src.octets());
        ip.extend_from_slice(&self.dst.octets());
        let sum = checksum(&ip, 0);
        ip[10..12].copy_from_slice(&sum.to_be_bytes());
        ip.extend_from_slice(&segment);
        ip
    }

    fn segment(&self, payload: &[u8]) -> Vec<u8> {
        let mut seg = Vec::new();
        match self.l4 {
            L4::Tcp {
                src_port,
                dst_port,
                seq,
                ack,
                flags,
                timestamps,
            } => {
                let hdr_len = if timestamps.is_some() { 32 } else { 20 };
                seg.extend_from_slice(&src_port.to_be_bytes());
                seg.extend_from_slice(&dst_port.to_be_bytes());
                seg.extend_from_slice(&seq.to_be_bytes());
                seg.extend_from_slice(&ack.to_be_bytes());
                seg.push(((hdr_len / 4) as u8) << 4);
                seg.push(flags);
                seg.extend_from_slice(&64240u16.to_be_bytes());
                seg.extend_from_slice(&[0, 0, 0, 0]);
                if let Some((val, echo)) = timestamps {
                    seg.extend_from_slice(&[1, 1, 8, 10]);
                    seg.extend_from_slice(&val.to_be_bytes());
                    seg.extend_from_slice(&echo.to_be_bytes());
                }
                seg.extend_from_slice(payload);
                let sum = checksum(&seg, self.pseudo_header_sum(6, seg.len()));
                seg[16..18].copy_from_slice(&sum.to_be_bytes());
            }
            L4::Udp { src_port, dst_port } => {
                seg.extend_from_slice(&src_port.to_be_bytes());
                seg.extend_from_slice(&dst_port.to_be_bytes());
                seg.extend_from_slice(&((8 + payload.len()) as u16).to_be_bytes());
                seg.extend_from_slice(&[0, 0]);
                seg.extend_from_slice(payload);
                let mut sum = checksum(&seg, self.pseudo_header_sum(17, seg.len()));
                if sum == 0 {
                    sum = 0xFFFF;
                }
                seg[6..8].copy_from_slice(&sum.to_be_bytes());
            }
            L4::Icmp { kind, code } => {
                seg.extend_from_slice(&[kind, code, 0, 0, 0, 0, 0, 0]);
                seg.extend_from_slice(payload);
                let sum = checksum(&seg, 0);
                seg[2..4].copy_from_slice(&sum.to_be_bytes());
            }
        }
        seg
    }

    fn pseudo_header_sum(&self, proto: u8, len: usize) -> u32 {
        let mut sum = 0u32;
        for addr in [self.src.octets(), self.dst.octets()] {
            sum += u16::from_be_bytes([addr[0], addr[1]]) as u32;
            sum += u16::from_be_bytes([addr[2], addr[3]]) as u32;
        }
        sum + proto as u32 + len as u32
    }
}

/// Internet checksum over `data` with an initial partial sum.
pub fn checksum(data: &[u8], initial: u32) -> u16 {
    let mut sum = initial;
    let mut chunks = data.chunks_exact(2);
    for c in &mut chunks {
        sum += u16::from_be_bytes([c[0], c[1]]) as u32;
    }
    if let [last] = chunks.remainder() {
        sum += (*last as u32) << 8;
    }
    while sum >> 16 != 0 {
        sum = (sum & 0xFFFF) + (sum >> 16);
    }
    !(sum as u16)
}
