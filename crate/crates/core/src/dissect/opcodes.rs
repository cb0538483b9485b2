//! Function code to protocol action names.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::ports::ProtocolId;

const OPCODES: &str = include_str!("../../data/opcodes.json");

type Table = HashMap<ProtocolId, HashMap<u16, String>>;

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let raw: HashMap<ProtocolId, HashMap<String, String>> =
            serde_json::from_str(OPCODES).expect("bundled opcode table is valid");
        raw.into_iter()
            .map(|(p, codes)| {
                let codes = codes
                    .into_iter()
                    .map(|(k, v)| (k.parse().expect("numeric opcode"), v))
                    .collect();
                (p, codes)
            })
            .collect()
    })
}

/// Human-readable action for a protocol's function code, e.g. Modbus 3 is
/// `read_holding_registers`. Modbus exception codes map to their base
/// function.
pub fn action_name(protocol: ProtocolId, code: u16) -> Option<&'static str> {
    let code = match protocol {
        ProtocolId::Modbus if code >= 0x80 => code & 0x7F,
        _ => code,
    };
    table().get(&protocol)?.get(&code).map(String::as_str)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        assert_eq!(
            action_name(ProtocolId::Modbus, 3),
            Some("read_holding_registers")
        );
        assert_eq!(
            action_name(ProtocolId::Modbus, 0x83),
            Some("read_holding_registers")
        );
        assert_eq!(
            action_name(ProtocolId::S7comm, 0xF0),
            Some("setup_communication")
        );
        assert_eq!(action_name(ProtocolId::Bacnet, 12), Some("read_property"));
        assert_eq!(action_name(ProtocolId::Modbus, 99), None);
    }
}
