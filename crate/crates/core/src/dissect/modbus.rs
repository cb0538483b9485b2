//! Modbus/TCP: MBAP header (transaction, protocol id, length, unit) followed
//! by the function code.

use super::{be16, Dissection, ProbeResult, Reject, Role, Segment};
use crate::ports::ProtocolId;

const MBAP_LEN: usize = 7;
const MAX_PDU_LEN: usize = 254;
const EXCEPTION_BIT: u8 = 0x80;

pub(super) fn dissect(seg: &Segment, role_hint: Role) -> ProbeResult {
    let p = seg.payload;
    if p.len() < MBAP_LEN + 1 {
        return Err(Reject::NotThisProtocol);
    }
    let protocol_id = be16(p, 2);
    let length = be16(p, 4) as usize;
    let function = p[7];

    let malformed = protocol_id != 0
        || !(2..=MAX_PDU_LEN).contains(&length)
        || !seg.fits(6 + length)
        || function == 0;
    let role = if function & EXCEPTION_BIT != 0 {
        Role::Reply
    } else {
        role_hint
    };
    Ok(Dissection::new(
        ProtocolId::Modbus,
        role,
        Some(function as u16),
        malformed,
    ))
}
