//! IEC 60870-5-104 APCI: start byte, APDU length, four control octets, and
//! the ASDU type identification for I-frames.

use super::{Dissection, ProbeResult, Reject, Role, Segment};
use crate::ports::ProtocolId;

const START: u8 = 0x68;
const APCI_LEN: usize = 6;
const MIN_APDU: u8 = 4;
const MAX_APDU: u8 = 253;
const ASDU_HEADER: u8 = 6;
const U_FUNCTIONS: [u8; 6] = [0x07, 0x0B, 0x13, 0x23, 0x43, 0x83];

fn defined_type(t: u8) -> bool {
    matches!(t, 1..=21 | 30..=40 | 45..=51 | 58..=64 | 70 | 100..=107 | 110..=113 | 120..=127)
}

pub(super) fn dissect(seg: &Segment, role_hint: Role) -> ProbeResult {
    let p = seg.payload;
    if p.len() < APCI_LEN || p[0] != START {
        return Err(Reject::NotThisProtocol);
    }
    let length = p[1];
    let c1 = p[2];
    let mut malformed = !(MIN_APDU..=MAX_APDU).contains(&length) || !seg.fits(length as usize + 2);
    let function = if c1 & 0x01 == 0 {
        // I-frame
        if length > MIN_APDU {
            malformed |= length < MIN_APDU + ASDU_HEADER;
            match p.get(APCI_LEN) {
                Some(&t) => {
                    malformed |= !defined_type(t);
                    Some(t as u16)
                }
                None => None,
            }
        } else {
            None
        }
    } else if c1 & 0x03 == 0x01 {
        // S-frame
        malformed |= length != MIN_APDU || c1 != 0x01 || p[3] != 0;
        None
    } else {
        // U-frame
        malformed |= length != MIN_APDU || !U_FUNCTIONS.contains(&c1) || p[3..6] != [0, 0, 0];
        Some(c1 as u16)
    };
    Ok(Dissection::new(
        ProtocolId::Iec104,
        role_hint,
        function,
        malformed,
    ))
}
