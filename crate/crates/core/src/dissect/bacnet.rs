//! BACnet/IP: BVLC header, then NPDU and APDU for the NPDU-carrying
//! functions.

use super::{be16, Dissection, ProbeResult, Reject, Role, Segment};
use crate::ports::ProtocolId;

const BVLC_TYPE: u8 = 0x81;
const MAX_BVLC_FUNCTION: u8 = 0x0C;
const ORIGINAL_UNICAST: u8 = 0x0A;
const ORIGINAL_BROADCAST: u8 = 0x0B;

pub(super) fn dissect(seg: &Segment, role_hint: Role) -> ProbeResult {
    let p = seg.payload;
    if p.len() < 4 || p[0] != BVLC_TYPE {
        return Err(Reject::NotThisProtocol);
    }
    let function = p[1];
    let length = be16(p, 2) as usize;
    let mut malformed = function > MAX_BVLC_FUNCTION || length < 4 || length != seg.orig_len;

    let mut code = None;
    if matches!(function, ORIGINAL_UNICAST | ORIGINAL_BROADCAST) {
        let npdu = &p[4..];
        if let Some(&version) = npdu.first() {
            if version != 0x01 {
                malformed = true;
            } else {
                match npdu_service(npdu) {
                    Ok(c) => code = c,
                    Err(()) => malformed = true,
                }
            }
        }
    }
    Ok(Dissection::new(
        ProtocolId::Bacnet,
        role_hint,
        code,
        malformed,
    ))
}

/// Service choice of the APDU (or message type of a network-layer message).
/// `Ok(None)` when the bytes needed were not captured, `Err` when a field is
/// out of range.
fn npdu_service(npdu: &[u8]) -> Result<Option<u16>, ()> {
    let Some(&control) = npdu.get(1) else {
        return Ok(None);
    };
    let mut idx = 2;
    for present in [control & 0x20 != 0, control & 0x08 != 0] {
        if present {
            let Some(&addr_len) = npdu.get(idx + 2) else {
                return Ok(None);
            };
            idx += 3 + addr_len as usize;
        }
    }
    if control & 0x20 != 0 {
        idx += 1; // hop count
    }
    if control & 0x80 != 0 {
        return Ok(npdu.get(idx).map(|&m| m as u16));
    }
    let apdu = &npdu[idx.min(npdu.len())..];
    let Some(&head) = apdu.first() else {
        return Ok(None);
    };
    let segmented = head & 0x08 != 0;
    let at = match head >> 4 {
        0 => {
            if segmented {
                5
            } else {
                3
            }
        }
        1 => 1,
        2 | 5 => 2,
        3 => {
            if segmented {
                4
            } else {
                2
            }
        }
        4 | 6 | 7 => return Ok(None),
        _ => return Err(()),
    };
    Ok(apdu.get(at).map(|&s| s as u16))
}
