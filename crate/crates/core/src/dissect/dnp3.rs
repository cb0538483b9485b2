//! DNP3 data-link framing: 0x0564 start, length, control, addresses, and a
//! CRC after the header and after every 16-byte user data block.

use super::{le16, Dissection, ProbeResult, Reject, Role, Segment};
use crate::ports::ProtocolId;

const START: [u8; 2] = [0x05, 0x64];
const HEADER_BLOCK: usize = 10;
const DATA_BLOCK: usize = 16;
const DIR: u8 = 0x80;

const CRC_TABLE: [u16; 256] = build_table();

const fn build_table() -> [u16; 256] {
    let mut table = [0u16; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = i as u16;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 1 != 0 {
                (crc >> 1) ^ 0xA6BC
            } else {
                crc >> 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

/// DNP3 CRC-16 (polynomial 0x3D65, reflected, complemented output).
pub fn crc(data: &[u8]) -> u16 {
    let mut crc = 0u16;
    for &b in data {
        crc = (crc >> 8) ^ CRC_TABLE[((crc ^ b as u16) & 0xFF) as usize];
    }
    !crc
}

/// Wire size of a link frame whose length byte is `length`.
pub fn frame_len(length: u8) -> usize {
    let user = (length as usize).saturating_sub(5);
    HEADER_BLOCK + user + 2 * user.div_ceil(DATA_BLOCK)
}

pub(super) fn dissect(seg: &Segment, _role_hint: Role) -> ProbeResult {
    let p = seg.payload;
    if p.len() < HEADER_BLOCK || p[..2] != START {
        return Err(Reject::NotThisProtocol);
    }
    let length = p[2];
    let control = p[3];
    let user_len = (length as usize).saturating_sub(5);
    let first_block = user_len.min(DATA_BLOCK);
    if user_len > 0 && p.len() < HEADER_BLOCK + first_block + 2 {
        return Err(Reject::NotThisProtocol);
    }
    let header_ok = crc(&p[..8]) == le16(p, 8);
    let block_ok = user_len == 0 || {
        let block = &p[HEADER_BLOCK..HEADER_BLOCK + first_block];
        crc(block) == le16(p, HEADER_BLOCK + first_block)
    };
    let malformed = length < 5 || !header_ok || !block_ok || !seg.fits(frame_len(length));
    let role = if control & DIR != 0 {
        Role::Request
    } else {
        Role::Reply
    };
    // transport header, application control, application function
    let function = (user_len >= 3).then(|| p[HEADER_BLOCK + 2] as u16);
    Ok(Dissection::new(ProtocolId::Dnp3, role, function, malformed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissect::{dissect_heuristic, Verdict};

    /// Bit-at-a-time CRC, independent of the table above.
    fn crc_bitwise(data: &[u8]) -> u16 {
        let mut crc: u16 = 0;
        for &byte in data {
            for i in 0..8 {
                let bit = ((byte >> i) & 1) as u16 ^ (crc & 1);
                crc >>= 1;
                if bit != 0 {
                    crc ^= 0xA6BC;
                }
            }
        }
        !crc
    }

    fn link_status_request() -> Vec<u8> {
        let mut f = vec![0x05, 0x64, 0x05, 0xC9, 0x01, 0x00, 0x00, 0x04];
        let c = crc_bitwise(&f);
        f.extend_from_slice(&c.to_le_bytes());
        f
    }

    #[test]
    fn crc_matches_bitwise_oracle() {
        assert_eq!(
            crc(&[0x05, 0x64, 0x05, 0xC0, 0x01, 0x00, 0x00, 0x04]),
            0x21E9
        );
        for len in 0..40u8 {
            let data: Vec<u8> = (0..len)
                .map(|i| i.wrapping_mul(37).wrapping_add(11))
                .collect();
            assert_eq!(crc(&data), crc_bitwise(&data));
        }
    }

    #[test]
    fn valid_header() {
        let f = link_status_request();
        let d = dissect(&Segment::tcp(&f), Role::Request).unwrap();
        assert_eq!(d.verdict, Verdict::WellFormed);
        assert_eq!(d.role, Role::Request);
        assert_eq!(d.function_code, None);
    }

    #[test]
    fn bad_start_bytes() {
        let mut f = link_status_request();
        f[1] = 0x65;
        assert_eq!(
            dissect(&Segment::tcp(&f), Role::Request),
            Err(Reject::NotThisProtocol)
        );
    }

    #[test]
    fn corrupted_crc() {
        let mut f = link_status_request();
        f[8] ^= 0x01;
        let seg = Segment::tcp(&f);
        assert!(dissect(&seg, Role::Request).unwrap().is_malformed());
        assert_eq!(dissect_heuristic(ProtocolId::Dnp3, &seg), None);
    }

    #[test]
    fn first_data_block_required_and_checked() {
        let mut f = vec![0x05, 0x64, 0x0D, 0xC4, 0x01, 0x00, 0x00, 0x04];
        let c = crc_bitwise(&f);
        f.extend_from_slice(&c.to_le_bytes());
        let user = [0xC0, 0xC0, 0x01, 0x01, 0x02, 0x00, 0x00, 0x0A];
        f.extend_from_slice(&user);
        f.extend_from_slice(&crc_bitwise(&user).to_le_bytes());
        assert_eq!(f.len(), frame_len(0x0D));
        let d = dissect(&Segment::udp(&f), Role::Request).unwrap();
        assert_eq!(d.verdict, Verdict::WellFormed);
        assert_eq!(d.function_code, Some(1));
        let cut = Segment::udp(&f[..19]).with_orig_len(20);
        assert_eq!(dissect(&cut, Role::Request), Err(Reject::NotThisProtocol));
        let mut bad = f.clone();
        bad[19] ^= 0x80;
        assert!(dissect(&Segment::udp(&bad), Role::Request)
            .unwrap()
            .is_malformed());
    }

    #[test]
    fn outstation_frame_is_reply() {
        let mut f = vec![0x05, 0x64, 0x05, 0x0B, 0x04, 0x00, 0x01, 0x00];
        let c = crc(&f);
        f.extend_from_slice(&c.to_le_bytes());
        let d = dissect(&Segment::tcp(&f), Role::Unknown).unwrap();
        assert_eq!(d.role, Role::Reply);
    }
}
