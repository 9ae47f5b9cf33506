//! Binary stream format shared by files and TCP.
//!
//! ```text
//! header (38 bytes)
//!   0..4    magic "PCOR"
//!   4       version (1)
//!   5       party (0 = alice, 1 = bob)
//!   6..38   SHA-256 of the shared configuration
//! record (73 bytes, repeated)
//!   0..8    bin index, u64 LE
//!   8       source tag (0 = D, 1 = A)
//!   9..73   port1 h, port1 v, port2 h, port2 v as (re, im) f64 LE pairs
//! ```
//!
//! Intensities are not transmitted; the decoder derives them from the
//! coefficients exactly as the simulator does.

use std::io::{self, Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polarization::{Party, SourceTag};
use crate::simulator::DetectorSample;

pub const MAGIC: [u8; 4] = *b"PCOR";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 38;
pub const RECORD_LEN: usize = 73;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamHeader {
    pub version: u8,
    pub party: Party,
    pub config_digest: [u8; 32],
}

impl StreamHeader {
    pub fn new(party: Party, config_digest: [u8; 32]) -> Self {
        Self {
            version: VERSION,
            party,
            config_digest,
        }
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        out[4] = self.version;
        out[5] = self.party.as_byte();
        out[6..].copy_from_slice(&self.config_digest);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Framing(format!(
                "header needs {HEADER_LEN} bytes, got {}",
                bytes.len()
            )));
        }
        let magic: [u8; 4] = bytes[..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(Error::BadMagic(magic));
        }
        if bytes[4] != VERSION {
            return Err(Error::VersionMismatch(bytes[4]));
        }
        Ok(Self {
            version: bytes[4],
            party: Party::from_byte(bytes[5])?,
            config_digest: bytes[6..HEADER_LEN].try_into().unwrap(),
        })
    }
}

pub fn encode_record(sample: &DetectorSample) -> [u8; RECORD_LEN] {
    let mut out = [0u8; RECORD_LEN];
    out[..8].copy_from_slice(&sample.bin.to_le_bytes());
    out[8] = sample.tag.as_byte();
    let coefs = [
        sample.port1_coef_h,
        sample.port1_coef_v,
        sample.port2_coef_h,
        sample.port2_coef_v,
    ];
    for (k, c) in coefs.iter().enumerate() {
        let at = 9 + 16 * k;
        out[at..at + 8].copy_from_slice(&c.re.to_le_bytes());
        out[at + 8..at + 16].copy_from_slice(&c.im.to_le_bytes());
    }
    out
}

/// Decodes one record. The party comes from the stream header.
pub fn decode_record(bytes: &[u8], party: Party) -> Result<DetectorSample> {
    if bytes.len() < RECORD_LEN {
        return Err(Error::Framing(format!(
            "record needs {RECORD_LEN} bytes, got {}",
            bytes.len()
        )));
    }
    let f = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let c = |k: usize| Complex64::new(f(9 + 16 * k), f(17 + 16 * k));
    Ok(DetectorSample::from_ports(
        u64::from_le_bytes(bytes[..8].try_into().unwrap()),
        party,
        SourceTag::from_byte(bytes[8])?,
        (c(0), c(1)),
        (c(2), c(3)),
    ))
}

/// Fills `buf` completely. Returns `false` on a clean EOF before the first
/// byte; a partial fill is a framing error.
fn read_frame<R: Read + ?Sized>(r: &mut R, buf: &mut [u8]) -> Result<bool> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(false),
            Ok(0) => {
                return Err(Error::Framing(format!(
                    "truncated frame: {filled} of {} bytes",
                    buf.len()
                )))
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(true)
}

pub fn read_header<R: Read + ?Sized>(r: &mut R) -> Result<StreamHeader> {
    let mut buf = [0u8; HEADER_LEN];
    if !read_frame(r, &mut buf)? {
        return Err(Error::Framing("stream ended before header".into()));
    }
    StreamHeader::decode(&buf)
}

/// Next record, or `None` at a clean end of stream.
pub fn read_record<R: Read + ?Sized>(r: &mut R, party: Party) -> Result<Option<DetectorSample>> {
    let mut buf = [0u8; RECORD_LEN];
    if !read_frame(r, &mut buf)? {
        return Ok(None);
    }
    decode_record(&buf, party).map(Some)
}

pub fn write_header<W: Write + ?Sized>(w: &mut W, header: &StreamHeader) -> Result<()> {
    w.write_all(&header.encode())?;
    Ok(())
}

pub fn write_record<W: Write + ?Sized>(w: &mut W, sample: &DetectorSample) -> Result<()> {
    w.write_all(&encode_record(sample))?;
    Ok(())
}

/// Header plus every sample, as one byte buffer.
pub fn encode_stream(header: &StreamHeader, samples: &[DetectorSample]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * samples.len());
    out.extend_from_slice(&header.encode());
    for s in samples {
        out.extend_from_slice(&encode_record(s));
    }
    out
}
