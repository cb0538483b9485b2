//! Protocol message templates shared by the golden corpus and the traffic
//! generator. Each template carries the dissection it is built to produce.

use crate::capture::Transport;
use crate::dissect::{dnp3::crc as dnp3_crc, Role};
use crate::ports::ProtocolId;

/// An application payload together with what a dissector must report for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub protocol: ProtocolId,
    pub transport: Transport,
    pub bytes: Vec<u8>,
    pub function_code: Option<u16>,
    /// Role fixed by a protocol field; `None` when it follows the port.
    pub field_role: Option<Role>,
    /// Leading bytes that must be captured for identification.
    pub ident_len: usize,
    pub malformed: bool,
}

impl Message {
    pub fn expected_role(&self, port_role: Role) -> Role {
        self.field_role.unwrap_or(port_role)
    }
}

pub mod modbus {
    use super::*;

    fn adu(tid: u16, unit: u8, pdu: &[u8]) -> Vec<u8> {
        let mut b = Vec::with_capacity(7 + pdu.len());
        b.extend_from_slice(&tid.to_be_bytes());
        b.extend_from_slice(&[0, 0]);
        b.extend_from_slice(&((pdu.len() + 1) as u16).to_be_bytes());
        b.push(unit);
        b.extend_from_slice(pdu);
        b
    }

    fn message(bytes: Vec<u8>, function: u8) -> Message {
        Message {
            protocol: ProtocolId::Modbus,
            transport: Transport::Tcp,
            bytes,
            function_code: Some(function as u16),
            field_role: (function >= 0x80).then_some(Role::Reply),
            ident_len: 8,
            malformed: false,
        }
    }

    /// Read request for function 1..=4.
    pub fn read_request(tid: u16, unit: u8, function: u8, start: u16, quantity: u16) -> Message {
        let mut pdu = vec![function];
        pdu.extend_from_slice(&start.to_be_bytes());
        pdu.extend_from_slice(&quantity.to_be_bytes());
        message(adu(tid, unit, &pdu), function)
    }

    pub fn read_response(tid: u16, unit: u8, function: u8, registers: u8) -> Message {
        let mut pdu = vec![function, registers * 2];
        pdu.extend((0..registers * 2).map(|i| i.wrapping_mul(7)));
        message(adu(tid, unit, &pdu), function)
    }

    pub fn exception(tid: u16, unit: u8, function: u8, code: u8) -> Message {
        message(adu(tid, unit, &[function | 0x80, code]), function | 0x80)
    }
}

pub mod s7 {
    use super::*;

    const SETUP_PARAMS: [u8; 7] = [0x00, 0x00, 0x01, 0x00, 0x01, 0x01, 0xE0];

    fn pdu(msg_type: u8, pdu_ref: u16, params: &[u8], data: &[u8]) -> Message {
        let header_len = if matches!(msg_type, 2 | 3) { 12 } else { 10 };
        let total = 7 + header_len + params.len() + data.len();
        let mut b = vec![0x03, 0x00];
        b.extend_from_slice(&(total as u16).to_be_bytes());
        b.extend_from_slice(&[0x02, 0xF0, 0x80]);
        b.extend_from_slice(&[0x32, msg_type, 0x00, 0x00]);
        b.extend_from_slice(&pdu_ref.to_be_bytes());
        b.extend_from_slice(&(params.len() as u16).to_be_bytes());
        b.extend_from_slice(&(data.len() as u16).to_be_bytes());
        if header_len == 12 {
            b.extend_from_slice(&[0x00, 0x00]);
        }
        b.extend_from_slice(params);
        b.extend_from_slice(data);
        Message {
            protocol: ProtocolId::S7comm,
            transport: Transport::Tcp,
            bytes: b,
            function_code: params.first().map(|&f| f as u16),
            field_role: Some(if msg_type == 1 {
                Role::Request
            } else {
                Role::Reply
            }),
            ident_len: 7 + header_len + params.len().min(8),
            malformed: false,
        }
    }

    pub fn setup_job(pdu_ref: u16) -> Message {
        let mut params = vec![0xF0];
        params.extend_from_slice(&SETUP_PARAMS);
        pdu(1, pdu_ref, &params, &[])
    }

    pub fn setup_ack_data(pdu_ref: u16) -> Message {
        let mut params = vec![0xF0];
        params.extend_from_slice(&SETUP_PARAMS[..6]);
        params.push(0xF0);
        pdu(3, pdu_ref, &params, &[])
    }

    /// Read Var job for one item of `len` bytes from data block `db`.
    pub fn read_var_job(pdu_ref: u16, db: u16, start: u32, len: u16) -> Message {
        let mut params = vec![0x04, 0x01, 0x12, 0x0A, 0x10, 0x02];
        params.extend_from_slice(&len.to_be_bytes());
        params.extend_from_slice(&db.to_be_bytes());
        params.push(0x84);
        params.extend_from_slice(&(start << 3).to_be_bytes()[1..]);
        pdu(1, pdu_ref, &params, &[])
    }

    pub fn read_var_ack_data(pdu_ref: u16, values: &[u8]) -> Message {
        let mut data = vec![0xFF, 0x04];
        data.extend_from_slice(&((values.len() * 8) as u16).to_be_bytes());
        data.extend_from_slice(values);
        pdu(3, pdu_ref, &[0x04, 0x01], &data)
    }
}

pub mod enip {
    use super::*;

    fn encapsulated(transport: Transport, command: u16, context: u64, data: &[u8]) -> Message {
        let mut b = Vec::with_capacity(24 + data.len());
        b.extend_from_slice(&command.to_le_bytes());
        b.extend_from_slice(&(data.len() as u16).to_le_bytes());
        b.extend_from_slice(&0u32.to_le_bytes()); // session handle
        b.extend_from_slice(&0u32.to_le_bytes()); // status
        b.extend_from_slice(&context.to_le_bytes());
        b.extend_from_slice(&0u32.to_le_bytes()); // options
        b.extend_from_slice(data);
        Message {
            protocol: ProtocolId::EthernetIp,
            transport,
            bytes: b,
            function_code: Some(command),
            field_role: None,
            ident_len: 24 + data.len().min(8),
            malformed: false,
        }
    }

    pub fn list_identity_request(transport: Transport, context: u64) -> Message {
        encapsulated(transport, 0x0063, context, &[])
    }

    pub fn list_identity_reply(transport: Transport, context: u64, product: &str) -> Message {
        let mut item = Vec::new();
        item.extend_from_slice(&1u16.to_le_bytes()); // encapsulation version
        item.extend_from_slice(&2u16.to_be_bytes()); // sockaddr: AF_INET
        item.extend_from_slice(&44818u16.to_be_bytes());
        item.extend_from_slice(&[192, 0, 2, 10]);
        item.extend_from_slice(&[0; 8]);
        item.extend_from_slice(&1u16.to_le_bytes()); // vendor
        item.extend_from_slice(&0x0Cu16.to_le_bytes()); // device type
        item.extend_from_slice(&0x36u16.to_le_bytes()); // product code
        item.extend_from_slice(&[0x14, 0x0B]); // revision
        item.extend_from_slice(&0x0030u16.to_le_bytes()); // status
        item.extend_from_slice(&0x00C0_FFEEu32.to_le_bytes()); // serial
        item.push(product.len() as u8);
        item.extend_from_slice(product.as_bytes());
        item.push(0x03); // state
        let mut data = Vec::new();
        data.extend_from_slice(&1u16.to_le_bytes()); // item count
        data.extend_from_slice(&0x000Cu16.to_le_bytes());
        data.extend_from_slice(&(item.len() as u16).to_le_bytes());
        data.extend_from_slice(&item);
        encapsulated(transport, 0x0063, context, &data)
    }

    pub fn register_session(context: u64) -> Message {
        encapsulated(Transport::Tcp, 0x0065, context, &[1, 0, 0, 0])
    }
}

pub mod bacnet {
    use super::*;

    fn bvlc(function: u8, npdu: &[u8], service: Option<u8>) -> Message {
        let mut b = vec![0x81, function];
        b.extend_from_slice(&((4 + npdu.len()) as u16).to_be_bytes());
        b.extend_from_slice(npdu);
        Message {
            protocol: ProtocolId::Bacnet,
            transport: Transport::Udp,
            bytes: b,
            function_code: service.map(u16::from),
            field_role: None,
            ident_len: 4,
            malformed: false,
        }
    }

    /// Confirmed ReadProperty on a device object.
    pub fn read_property(invoke_id: u8, instance: u32, property: u8) -> Message {
        let object = (8u32 << 22) | (instance & 0x3F_FFFF);
        let mut npdu = vec![0x01, 0x04, 0x00, 0x05, invoke_id, 0x0C, 0x0C];
        npdu.extend_from_slice(&object.to_be_bytes());
        npdu.extend_from_slice(&[0x19, property]);
        bvlc(0x0A, &npdu, Some(0x0C))
    }

    pub fn read_property_ack(invoke_id: u8, instance: u32, property: u8) -> Message {
        let object = (8u32 << 22) | (instance & 0x3F_FFFF);
        let mut npdu = vec![0x01, 0x00, 0x30, invoke_id, 0x0C, 0x0C];
        npdu.extend_from_slice(&object.to_be_bytes());
        npdu.extend_from_slice(&[0x19, property, 0x3E, 0x44, 0x42, 0x48, 0x00, 0x00, 0x3F]);
        bvlc(0x0A, &npdu, Some(0x0C))
    }

    pub fn who_is() -> Message {
        bvlc(
            0x0B,
            &[0x01, 0x20, 0xFF, 0xFF, 0x00, 0xFF, 0x10, 0x08],
            Some(0x08),
        )
    }

    /// A DNS query sent from port 53 whose first bytes also form a valid
    /// BVLC-Result header.
    pub fn dns_lookalike() -> Message {
        let mut b = vec![
            0x81, 0x00, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
        ];
        b.extend_from_slice(b"\x07example\x03com\x00");
        b.extend_from_slice(&[0x00, 0x01, 0x00, 0x01]);
        let len = b.len() as u16;
        b[2..4].copy_from_slice(&len.to_be_bytes());
        Message {
            protocol: ProtocolId::Bacnet,
            transport: Transport::Udp,
            bytes: b,
            function_code: None,
            field_role: None,
            ident_len: 4,
            malformed: false,
        }
    }
}

pub mod dnp3 {
    use super::*;

    /// Link frame with CRCs; `control` carries DIR/PRM and the link function.
    pub fn frame(control: u8, destination: u16, source: u16, user_data: &[u8]) -> Message {
        assert!(user_data.len() <= 250, "user data exceeds one link frame");
        let mut b = vec![0x05, 0x64, (user_data.len() + 5) as u8, control];
        b.extend_from_slice(&destination.to_le_bytes());
        b.extend_from_slice(&source.to_le_bytes());
        let c = dnp3_crc(&b);
        b.extend_from_slice(&c.to_le_bytes());
        for block in user_data.chunks(16) {
            b.extend_from_slice(block);
            b.extend_from_slice(&dnp3_crc(block).to_le_bytes());
        }
        let first = user_data.len().min(16);
        Message {
            protocol: ProtocolId::Dnp3,
            transport: Transport::Tcp,
            bytes: b,
            function_code: (user_data.len() >= 3).then(|| user_data[2] as u16),
            field_role: Some(if control & 0x80 != 0 {
                Role::Request
            } else {
                Role::Reply
            }),
            ident_len: 10 + if first > 0 { first + 2 } else { 0 },
            malformed: false,
        }
    }

    /// Master READ of binary inputs `start..=stop` (group 1 variation 2).
    pub fn read_binary_inputs(seq: u8, start: u8, stop: u8) -> Message {
        let user = [
            0xC0 | (seq & 0x3F),
            0xC0 | (seq & 0x0F),
            0x01,
            0x01,
            0x02,
            0x00,
            start,
            stop,
        ];
        frame(0xC4, 1024, 1, &user)
    }

    /// Master READ of class 0 data.
    pub fn read_class0(seq: u8) -> Message {
        let user = [
            0xC0 | (seq & 0x3F),
            0xC0 | (seq & 0x0F),
            0x01,
            0x3C,
            0x01,
            0x06,
        ];
        frame(0xC4, 1024, 1, &user)
    }

    /// Outstation response with IIN bits and an empty object list.
    pub fn response(seq: u8) -> Message {
        let user = [0xC0 | (seq & 0x3F), 0xC0 | (seq & 0x0F), 0x81, 0x00, 0x00];
        frame(0x44, 1, 1024, &user)
    }

    pub fn link_status_request() -> Message {
        frame(0xC9, 1, 1024, &[])
    }
}

pub mod hartip {
    use super::*;

    pub fn message(
        transport: Transport,
        msg_type: u8,
        msg_id: u8,
        seq: u16,
        body: &[u8],
    ) -> Message {
        let mut b = vec![0x01, msg_type, msg_id, 0x00];
        b.extend_from_slice(&seq.to_be_bytes());
        b.extend_from_slice(&((8 + body.len()) as u16).to_be_bytes());
        b.extend_from_slice(body);
        Message {
            protocol: ProtocolId::HartIp,
            transport,
            bytes: b,
            function_code: Some(msg_id as u16),
            field_role: Some(if msg_type == 0 {
                Role::Request
            } else {
                Role::Reply
            }),
            ident_len: 8,
            malformed: false,
        }
    }

    pub fn session_initiate(transport: Transport, seq: u16) -> Message {
        message(transport, 0, 0, seq, &[0x01, 0x00, 0x00, 0xEA, 0x60])
    }

    pub fn session_initiate_response(transport: Transport, seq: u16) -> Message {
        message(transport, 1, 0, seq, &[0x01, 0x00, 0x00, 0xEA, 0x60])
    }

    pub fn keep_alive(transport: Transport, seq: u16) -> Message {
        message(transport, 0, 2, seq, &[])
    }
}

pub mod iec104 {
    use super::*;

    pub const STARTDT_ACT: u8 = 0x07;
    pub const STARTDT_CON: u8 = 0x0B;
    pub const TESTFR_ACT: u8 = 0x43;
    pub const TESTFR_CON: u8 = 0x83;

    pub fn u_frame(function: u8) -> Message {
        Message {
            protocol: ProtocolId::Iec104,
            transport: Transport::Tcp,
            bytes: vec![0x68, 0x04, function, 0x00, 0x00, 0x00],
            function_code: Some(function as u16),
            field_role: None,
            ident_len: 6,
            malformed: false,
        }
    }

    /// General interrogation (C_IC_NA_1) for common address `ca`.
    pub fn interrogation(send_seq: u16, recv_seq: u16, ca: u16) -> Message {
        let mut b = vec![0x68, 0x0E];
        b.extend_from_slice(&(send_seq << 1).to_le_bytes());
        b.extend_from_slice(&(recv_seq << 1).to_le_bytes());
        b.extend_from_slice(&[0x64, 0x01, 0x06, 0x00]);
        b.extend_from_slice(&ca.to_le_bytes());
        b.extend_from_slice(&[0x00, 0x00, 0x00, 0x14]);
        Message {
            protocol: ProtocolId::Iec104,
            transport: Transport::Tcp,
            bytes: b,
            function_code: Some(100),
            field_role: None,
            ident_len: 6,
            malformed: false,
        }
    }
}

/// Violates one enumerated or range-constrained header field so that the
/// normal dissector reports the message as malformed.
pub fn corrupt(message: &Message) -> Message {
    let mut m = message.clone();
    let b = &mut m.bytes;
    match m.protocol {
        ProtocolId::Modbus => b[3] = 0x01,
        ProtocolId::S7comm => {
            b[8] = 0x05;
            m.field_role = None;
            // an unknown message type has a 10-byte header
            let params = u16::from_be_bytes([b[13], b[14]]) as usize;
            m.ident_len = 17 + params.min(8);
            m.function_code = None;
        }
        ProtocolId::EthernetIp => {
            b[0..2].copy_from_slice(&0xBEEFu16.to_le_bytes());
            m.function_code = Some(0xBEEF);
        }
        ProtocolId::Bacnet => {
            b[1] = 0x0F;
            m.function_code = None;
        }
        ProtocolId::Dnp3 => b[8] ^= 0x01,
        ProtocolId::HartIp => {
            b[1] = 0x09;
            m.field_role = Some(Role::Unknown);
        }
        ProtocolId::Iec104 => {
            b[1] = 0x04;
            b[2] = 0x0F;
            b[3..6].fill(0);
            b.truncate(6);
            m.function_code = Some(0x0F);
        }
    }
    m.malformed = true;
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissect::{dissect_as, Segment, Verdict};

    fn all_templates() -> Vec<Message> {
        vec![
            modbus::read_request(1, 1, 3, 0, 10),
            modbus::read_response(1, 1, 3, 10),
            modbus::exception(1, 1, 3, 2),
            s7::setup_job(1),
            s7::setup_ack_data(1),
            s7::read_var_job(2, 1, 0, 4),
            s7::read_var_ack_data(2, &[1, 2, 3, 4]),
            enip::list_identity_request(Transport::Udp, 7),
            enip::list_identity_reply(Transport::Udp, 7, "1756-L61"),
            enip::register_session(9),
            bacnet::read_property(1, 1234, 85),
            bacnet::read_property_ack(1, 1234, 85),
            bacnet::who_is(),
            bacnet::dns_lookalike(),
            dnp3::read_binary_inputs(0, 0, 10),
            dnp3::read_class0(1),
            dnp3::response(1),
            dnp3::link_status_request(),
            hartip::session_initiate(Transport::Tcp, 1),
            hartip::session_initiate_response(Transport::Udp, 1),
            hartip::keep_alive(Transport::Tcp, 2),
            iec104::u_frame(iec104::STARTDT_ACT),
            iec104::interrogation(0, 0, 1),
        ]
    }

    fn segment(m: &Message) -> Segment<'_> {
        Segment {
            payload: &m.bytes,
            orig_len: m.bytes.len(),
            transport: m.transport,
            src_port: 0,
            dst_port: 0,
        }
    }

    #[test]
    fn templates_dissect_as_declared() {
        for m in all_templates() {
            let d = dissect_as(m.protocol, &segment(&m), Role::Request)
                .unwrap_or_else(|e| panic!("{:?} rejected: {e:?}", m.bytes));
            assert_eq!(d.verdict, Verdict::WellFormed, "{m:?}");
            assert_eq!(d.function_code, m.function_code, "{m:?}");
            assert_eq!(d.role, m.expected_role(Role::Request), "{m:?}");
        }
    }

    #[test]
    fn ident_len_is_tight() {
        for m in all_templates() {
            let orig = m.bytes.len();
            let at = Segment {
                payload: &m.bytes[..m.ident_len],
                ..segment(&m)
            }
            .with_orig_len(orig);
            assert!(dissect_as(m.protocol, &at, Role::Request).is_ok(), "{m:?}");
            let below = Segment {
                payload: &m.bytes[..m.ident_len - 1],
                ..segment(&m)
            }
            .with_orig_len(orig);
            assert!(
                dissect_as(m.protocol, &below, Role::Request).is_err(),
                "{m:?}"
            );
        }
    }

    #[test]
    fn corrupted_templates_are_malformed() {
        for m in all_templates() {
            let bad = corrupt(&m);
            let d = dissect_as(bad.protocol, &segment(&bad), Role::Request).unwrap();
            assert_eq!(d.verdict, Verdict::Malformed, "{bad:?}");
            assert_eq!(d.function_code, bad.function_code, "{bad:?}");
            assert_eq!(d.role, bad.expected_role(Role::Request), "{bad:?}");
        }
    }
}
