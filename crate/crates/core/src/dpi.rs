//! Signature matching for well-known non-ICS protocols. A candidate whose
//! payload matches one of these was misidentified by a dissector.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::capture::{PacketRecord, Transport};
use crate::error::{Error, Result};

const DEFAULT_CATALOG: &str = include_str!("../data/dpi_catalog.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct SignatureFile {
    name: String,
    transport: Option<Transport>,
    #[serde(default)]
    port_hint: Option<u16>,
    prefix_bytes: String,
    #[serde(default)]
    mask: Option<String>,
}

/// Masked prefix match on the transport payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub name: String,
    pub transport: Option<Transport>,
    /// Source or destination port must equal this when set.
    pub port_hint: Option<u16>,
    pub prefix: Vec<u8>,
    pub mask: Vec<u8>,
}

impl Signature {
    pub fn matches(
        &self,
        payload: &[u8],
        transport: Transport,
        src_port: u16,
        dst_port: u16,
    ) -> bool {
        if self.transport.is_some_and(|t| t != transport) {
            return false;
        }
        if self
            .port_hint
            .is_some_and(|p| p != src_port && p != dst_port)
        {
            return false;
        }
        payload.len() >= self.prefix.len()
            && self
                .prefix
                .iter()
                .zip(&self.mask)
                .zip(payload)
                .all(|((&p, &m), &b)| b & m == p & m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpiCatalog {
    signatures: Vec<Signature>,
}

impl Default for DpiCatalog {
    fn default() -> Self {
        Self::from_json(DEFAULT_CATALOG).expect("bundled DPI catalog is valid")
    }
}

impl DpiCatalog {
    pub fn new(signatures: Vec<Signature>) -> Self {
        DpiCatalog { signatures }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let entries: Vec<SignatureFile> =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("DPI catalog: {e}")))?;
        let mut signatures = Vec::with_capacity(entries.len());
        for e in entries {
            let bad = |what: &str| Error::Invalid(format!("DPI signature `{}`: {what}", e.name));
            let prefix =
                hex::decode(&e.prefix_bytes).map_err(|_| bad("prefix_bytes is not hex"))?;
            let mask = match &e.mask {
                Some(m) => hex::decode(m).map_err(|_| bad("mask is not hex"))?,
                None => vec![0xFF; prefix.len()],
            };
            if prefix.is_empty() {
                return Err(bad("empty prefix"));
            }
            if mask.len() != prefix.len() {
                return Err(bad("mask length differs from prefix length"));
            }
            if e.transport == Some(Transport::Icmp) {
                return Err(bad("transport must be tcp or udp"));
            }
            signatures.push(Signature {
                name: e.name,
                transport: e.transport,
                port_hint: e.port_hint,
                prefix,
                mask,
            });
        }
        Ok(DpiCatalog { signatures })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn signatures(&self) -> &[Signature] {
        &self.signatures
    }

    /// Name of the first matching signature.
    pub fn match_payload(
        &self,
        payload: &[u8],
        transport: Transport,
        src_port: u16,
        dst_port: u16,
    ) -> Option<&str> {
        self.signatures
            .iter()
            .find(|s| s.matches(payload, transport, src_port, dst_port))
            .map(|s| s.name.as_str())
    }

    /// Matches the record's own transport payload; ICMP records never match.
    pub fn match_record(&self, record: &PacketRecord) -> Option<&str> {
        match record.transport {
            Transport::Icmp => None,
            t => self.match_payload(record.payload(), t, record.src_port, record.dst_port),
        }
    }
}
