//! EtherNet/IP encapsulation header (24 bytes, little-endian).

use super::{le16, le32, Dissection, ProbeResult, Reject, Role, Segment};
use crate::capture::Transport;
use crate::ports::ProtocolId;

const HEADER_LEN: usize = 24;
/// Command-specific bytes that must be captured for identification.
const DATA_PREFIX: usize = 8;

const COMMANDS: [u16; 10] = [
    0x0000, 0x0004, 0x0063, 0x0064, 0x0065, 0x0066, 0x006F, 0x0070, 0x0072, 0x0073,
];
const STATUSES: [u32; 7] = [0x0000, 0x0001, 0x0002, 0x0003, 0x0064, 0x0065, 0x0069];

pub(super) fn dissect(seg: &Segment, role_hint: Role) -> ProbeResult {
    let p = seg.payload;
    if p.len() < HEADER_LEN {
        return Err(Reject::NotThisProtocol);
    }
    let command = le16(p, 0);
    let length = le16(p, 2) as usize;
    let status = le32(p, 4);
    if p.len() < HEADER_LEN + length.min(DATA_PREFIX) {
        return Err(Reject::NotThisProtocol);
    }
    let length_ok = match seg.transport {
        Transport::Udp => HEADER_LEN + length == seg.orig_len,
        _ => seg.fits(HEADER_LEN + length),
    };
    let malformed = !COMMANDS.contains(&command) || !STATUSES.contains(&status) || !length_ok;
    Ok(Dissection::new(
        ProtocolId::EthernetIp,
        role_hint,
        Some(command),
        malformed,
    ))
}
