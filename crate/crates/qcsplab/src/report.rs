//! Structured reports. The payload section is deterministic for a given
//! config and seed; wall-clock data lives under `meta` so payloads can be
//! compared byte for byte across runs.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs_digest: String,
    pub payload: serde_json::Value,
    pub meta: Meta,
}

#[derive(Debug, Serialize)]
pub struct Meta {
    pub timestamp_ms: u128,
    pub timings_ms: BTreeMap<String, u128>,
}

impl Report {
    pub fn new(
        command: impl Into<String>,
        inputs_digest: String,
        payload: serde_json::Value,
        timings_ms: BTreeMap<String, u128>,
    ) -> Self {
        let timestamp_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            inputs_digest,
            payload,
            meta: Meta {
                timestamp_ms,
                timings_ms,
            },
        }
    }

    /// Everything except `meta`, canonically serialized. Two runs of the
    /// same config must produce identical bytes here.
    pub fn payload_text(&self) -> String {
        #[derive(Serialize)]
        struct Stable<'a> {
            schema_version: u32,
            command: &'a str,
            inputs_digest: &'a str,
            payload: &'a serde_json::Value,
        }
        serde_json::to_string_pretty(&Stable {
            schema_version: self.schema_version,
            command: &self.command,
            inputs_digest: &self.inputs_digest,
            payload: &self.payload,
        })
        .expect("reports serialize")
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut file = std::fs::File::create(path)?;
        writeln!(
            file,
            "{}",
            serde_json::to_string_pretty(self).expect("reports serialize")
        )
    }
}

/// 64-bit FNV-1a, enough to fingerprint inputs.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Accumulates labeled input parts into one digest string.
#[derive(Debug, Default)]
pub struct DigestBuilder {
    parts: Vec<u8>,
}

impl DigestBuilder {
    pub fn new() -> Self {
        DigestBuilder::default()
    }

    pub fn text(&mut self, label: &str, value: &str) -> &mut Self {
        self.parts.extend_from_slice(label.as_bytes());
        self.parts.push(0);
        self.parts.extend_from_slice(value.as_bytes());
        self.parts.push(0);
        self
    }

    pub fn finish(&self) -> String {
        format!("fnv1a:{:016x}", fnv1a64(&self.parts))
    }
}
