//! S7comm over ISO-on-TCP: TPKT, COTP data TPDU, S7 header, parameter block.

use super::{be16, Dissection, ProbeResult, Reject, Role, Segment};
use crate::ports::ProtocolId;

const TPKT_VERSION: u8 = 0x03;
const COTP_DT: u8 = 0xF0;
const S7_PROTOCOL_ID: u8 = 0x32;
const MIN_S7_BYTES: usize = 17;
/// Parameter bytes that must be captured for identification.
const PARAM_PREFIX: usize = 8;

const JOB: u8 = 1;
const ACK: u8 = 2;
const ACK_DATA: u8 = 3;
const USERDATA: u8 = 7;

const KNOWN_FUNCTIONS: [u8; 12] = [
    0x00, 0x04, 0x05, 0x1A, 0x1B, 0x1C, 0x1D, 0x1E, 0x1F, 0x28, 0x29, 0xF0,
];

/// First octets of ISO session SPDUs (MMS/ICCP ride on the same TPKT/COTP).
const SESSION_SPDUS: [u8; 9] = [0x01, 0x05, 0x08, 0x09, 0x0A, 0x0C, 0x0D, 0x0E, 0x19];

pub(super) fn dissect(seg: &Segment, role_hint: Role) -> ProbeResult {
    let p = seg.payload;
    if p.len() < 7 || p[0] != TPKT_VERSION || p[1] != 0x00 {
        return Err(Reject::NotThisProtocol);
    }
    let tpkt_len = be16(p, 2) as usize;
    let cotp_li = p[4] as usize;
    if p[5] & 0xF0 != COTP_DT {
        return Err(Reject::NotThisProtocol);
    }
    let off = 5 + cotp_li;
    if let Some(&first) = p.get(off) {
        if first != S7_PROTOCOL_ID && SESSION_SPDUS.contains(&first) {
            return Err(Reject::ForeignIso);
        }
    }
    if p.len() < MIN_S7_BYTES || p.len() < off + 10 {
        return Err(Reject::NotThisProtocol);
    }
    let s7 = &p[off..];
    let msg_type = s7[1];
    let header_len = if matches!(msg_type, ACK | ACK_DATA) {
        12
    } else {
        10
    };
    let param_len = be16(s7, 6) as usize;
    let data_len = be16(s7, 8) as usize;
    if s7.len() < header_len + param_len.min(PARAM_PREFIX) {
        return Err(Reject::NotThisProtocol);
    }

    let mut malformed = s7[0] != S7_PROTOCOL_ID
        || cotp_li != 2
        || !matches!(msg_type, JOB | ACK | ACK_DATA | USERDATA)
        || be16(s7, 2) != 0
        || tpkt_len != off + header_len + param_len + data_len
        || !seg.fits(tpkt_len);

    let mut function = None;
    if matches!(msg_type, JOB | ACK_DATA) && param_len > 0 {
        let f = s7[header_len];
        malformed |= !KNOWN_FUNCTIONS.contains(&f);
        function = Some(f as u16);
    }
    let role = match msg_type {
        JOB => Role::Request,
        ACK | ACK_DATA => Role::Reply,
        _ => role_hint,
    };
    Ok(Dissection::new(
        ProtocolId::S7comm,
        role,
        function,
        malformed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissect::{dissect_heuristic, Verdict};

    const SETUP_JOB: [u8; 25] = [
        0x03, 0x00, 0x00, 0x19, 0x02, 0xF0, 0x80, 0x32, 0x01, 0x00, 0x00, 0x00, 0x01, 0x00, 0x08,
        0x00, 0x00, 0xF0, 0x00, 0x00, 0x01, 0x00, 0x01, 0x01, 0xE0,
    ];

    #[test]
    fn setup_communication_job() {
        let d = dissect(&Segment::tcp(&SETUP_JOB), Role::Request).unwrap();
        assert_eq!(d.verdict, Verdict::WellFormed);
        assert_eq!(d.role, Role::Request);
        assert_eq!(d.function_code, Some(0xF0));
    }

    #[test]
    fn tpkt_magic() {
        let mut p = SETUP_JOB;
        p[0] = 0x02;
        assert_eq!(
            dissect(&Segment::tcp(&p), Role::Request),
            Err(Reject::NotThisProtocol)
        );
    }

    #[test]
    fn wrong_protocol_id_normal_vs_heuristic() {
        let mut p = SETUP_JOB;
        p[7] = 0x33;
        let seg = Segment::tcp(&p);
        assert!(dissect(&seg, Role::Request).unwrap().is_malformed());
        assert_eq!(dissect_heuristic(ProtocolId::S7comm, &seg), None);
    }

    #[test]
    fn iso_session_is_foreign() {
        let mut p = SETUP_JOB;
        p[7] = 0x0D;
        assert_eq!(
            dissect(&Segment::tcp(&p), Role::Request),
            Err(Reject::ForeignIso)
        );
    }

    #[test]
    fn connection_request_is_not_s7() {
        let cr = [
            0x03, 0x00, 0x00, 0x16, 0x11, 0xE0, 0x00, 0x00, 0x00, 0x01, 0x00, 0xC0, 0x01, 0x0A,
            0xC1, 0x02, 0x01, 0x00, 0xC2, 0x02, 0x01, 0x02,
        ];
        assert_eq!(
            dissect(&Segment::tcp(&cr), Role::Request),
            Err(Reject::NotThisProtocol)
        );
    }

    #[test]
    fn unknown_message_type_and_function() {
        let mut p = SETUP_JOB;
        p[8] = 0x05;
        assert!(dissect(&Segment::tcp(&p), Role::Request)
            .unwrap()
            .is_malformed());
        let mut p = SETUP_JOB;
        p[17] = 0x77;
        assert!(dissect(&Segment::tcp(&p), Role::Request)
            .unwrap()
            .is_malformed());
    }

    #[test]
    fn parameter_prefix_required() {
        assert_eq!(
            dissect(
                &Segment::tcp(&SETUP_JOB[..24]).with_orig_len(25),
                Role::Request
            ),
            Err(Reject::NotThisProtocol)
        );
        assert_eq!(
            dissect(&Segment::tcp(&SETUP_JOB[..16]), Role::Request),
            Err(Reject::NotThisProtocol)
        );
    }
}
