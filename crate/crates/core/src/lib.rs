//! Identification, sanitization and classification of industrial control
//! system (ICS) protocol traffic in sampled, truncated packet captures.

pub mod capture;
pub mod classify;
pub mod dissect;
pub mod dpi;
pub mod enrich;
pub mod error;
pub mod frame;
pub mod golden;
pub mod metrics;
pub mod pipeline;
pub mod ports;
pub mod prefix;
pub mod sanitize;
pub mod templates;
pub mod trafficgen;

pub use capture::{CaptureMeta, CaptureReader, PacketRecord, Transport};
pub use dissect::{Dissection, Dissector, DissectorKind, Role, Verdict};
pub use error::{Error, Result};
pub use ports::{PortRegistry, ProtocolId};
