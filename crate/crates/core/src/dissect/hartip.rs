//! HART-IP common header: version, message type, message id, status,
//! sequence number, byte count.

use super::{be16, Dissection, ProbeResult, Reject, Role, Segment};
use crate::capture::Transport;
use crate::ports::ProtocolId;

const HEADER_LEN: usize = 8;
const VERSION: u8 = 0x01;

pub(super) fn dissect(seg: &Segment, _role_hint: Role) -> ProbeResult {
    let p = seg.payload;
    if p.len() < HEADER_LEN || p[0] != VERSION {
        return Err(Reject::NotThisProtocol);
    }
    let msg_type = p[1];
    let msg_id = p[2];
    let length = be16(p, 6) as usize;
    let length_ok = length >= HEADER_LEN
        && match seg.transport {
            Transport::Udp => length == seg.orig_len,
            _ => seg.fits(length),
        };
    let malformed = msg_type > 3 || msg_id > 3 || !length_ok;
    let role = match msg_type {
        0 => Role::Request,
        1..=3 => Role::Reply,
        _ => Role::Unknown,
    };
    Ok(Dissection::new(
        ProtocolId::HartIp,
        role,
        Some(msg_id as u16),
        malformed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissect::Verdict;

    const SESSION_INITIATE: [u8; 13] = [
        0x01, 0x00, 0x00, 0x00, 0x00, 0x01, 0x00, 0x0D, 0x01, 0x00, 0x00, 0xEA, 0x60,
    ];

    #[test]
    fn session_initiate_request() {
        let d = dissect(&Segment::tcp(&SESSION_INITIATE), Role::Request).unwrap();
        assert_eq!(d.verdict, Verdict::WellFormed);
        assert_eq!(d.role, Role::Request);
        assert_eq!(d.function_code, Some(0));
    }

    #[test]
    fn version_mismatch() {
        let mut p = SESSION_INITIATE;
        p[0] = 0x07;
        assert_eq!(
            dissect(&Segment::tcp(&p), Role::Request),
            Err(Reject::NotThisProtocol)
        );
    }

    #[test]
    fn bad_message_type() {
        let mut p = SESSION_INITIATE;
        p[1] = 9;
        assert!(dissect(&Segment::tcp(&p), Role::Request)
            .unwrap()
            .is_malformed());
    }

    #[test]
    fn response_and_length() {
        let mut p = SESSION_INITIATE;
        p[1] = 1;
        let d = dissect(&Segment::tcp(&p), Role::Request).unwrap();
        assert_eq!(d.role, Role::Reply);
        let short = Segment::tcp(&SESSION_INITIATE[..8]);
        assert!(dissect(&short, Role::Request).unwrap().is_malformed());
        let truncated = Segment::tcp(&SESSION_INITIATE[..8]).with_orig_len(13);
        assert!(!dissect(&truncated, Role::Request).unwrap().is_malformed());
    }
}
