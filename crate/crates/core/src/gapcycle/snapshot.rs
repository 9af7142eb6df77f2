//! On-disk snapshots of a gap cycle (`.pgc` files).
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        4 bytes  "PGC1"
//! version      u8       currently 1
//! gap_width    u8       1, 2 or 4 bytes per stored gap
//! factor_count u16
//! factors      factor_count x (u64 prime, u32 exponent)
//! phi          u64      number of gaps
//! checksum     u64      FNV-1a-64 over every preceding byte plus the payload
//! payload      phi gaps, each gap_width bytes
//! ```
//!
//! Reads check structure first (magic, version, width), then the checksum,
//! then that the payload length and factorization agree on phi, so corrupt
//! payloads surface as a checksum error rather than a phi complaint.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numtheory::FactoredInteger;

use super::{Cycle, GapCycle, GapWord};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"PGC1";
const SNAPSHOT_VERSION: u8 = 1;
const PAYLOAD_CHUNK: usize = 64 * 1024;

/// Parsed header of a snapshot file, available without loading the payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotHeader {
    pub version: u8,
    pub gap_width: u8,
    pub factors: Vec<(u64, u32)>,
    pub phi: u64,
}

impl SnapshotHeader {
    pub fn modulus(&self) -> Result<FactoredInteger> {
        FactoredInteger::from_factors(self.factors.clone())
    }

    /// The file size a well-formed snapshot with this header must have.
    ///
    /// Lets callers that only peek the header (say, to size a resource
    /// check against `phi`) cheaply reject files whose declared cycle
    /// cannot match their actual length.
    pub fn expected_file_len(&self) -> u128 {
        let header = 24 + 12 * self.factors.len() as u128;
        header + u128::from(self.phi) * u128::from(self.gap_width)
    }
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf29ce484222325)
    }

    fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x100000001b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

fn header_bytes(cycle: &Cycle) -> Vec<u8> {
    let factors = cycle.modulus().factors();
    let mut h = Vec::with_capacity(16 + factors.len() * 12);
    h.extend_from_slice(SNAPSHOT_MAGIC);
    h.push(SNAPSHOT_VERSION);
    h.push(cycle.width());
    h.extend_from_slice(&(factors.len() as u16).to_le_bytes());
    for &(p, e) in factors {
        h.extend_from_slice(&p.to_le_bytes());
        h.extend_from_slice(&e.to_le_bytes());
    }
    h.extend_from_slice(&cycle.len().to_le_bytes());
    h
}

/// Write `cycle` to `path`, streaming the payload and back-patching the
/// checksum once it is known.
pub fn write_snapshot(path: &Path, cycle: &Cycle) -> Result<()> {
    let header = header_bytes(cycle);
    let mut hasher = Fnv1a::new();
    hasher.update(&header);

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&header)?;
    let checksum_pos = header.len() as u64;
    w.write_all(&[0u8; 8])?;

    let mut chunk = Vec::with_capacity(PAYLOAD_CHUNK);
    let width = cycle.width() as usize;
    macro_rules! stream_payload {
        ($gaps:expr) => {
            for g in $gaps {
                g.append_le(&mut chunk);
                if chunk.len() + width > PAYLOAD_CHUNK {
                    hasher.update(&chunk);
                    w.write_all(&chunk)?;
                    chunk.clear();
                }
            }
        };
    }
    match cycle {
        Cycle::W1(c) => stream_payload!(c.gaps().iter().copied()),
        Cycle::W2(c) => stream_payload!(c.gaps().iter().copied()),
        Cycle::W4(c) => stream_payload!(c.gaps().iter().copied()),
    }
    if !chunk.is_empty() {
        hasher.update(&chunk);
        w.write_all(&chunk)?;
    }

    w.seek(SeekFrom::Start(checksum_pos))?;
    w.write_all(&hasher.finish().to_le_bytes())?;
    w.flush()?;
    Ok(())
}

/// Read just the header of a snapshot. No checksum verification happens
/// here; use [`read_snapshot`] for a fully checked load.
pub fn read_header(path: &Path) -> Result<SnapshotHeader> {
    let mut r = BufReader::new(File::open(path)?);
    let mut fixed = [0u8; 8];
    read_exact(&mut r, &mut fixed)?;
    let mut magic = [0u8; 4];
    magic.copy_from_slice(&fixed[..4]);
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let version = fixed[4];
    if version != SNAPSHOT_VERSION {
        return Err(Error::BadVersion(version));
    }
    let gap_width = fixed[5];
    if !matches!(gap_width, 1 | 2 | 4) {
        return Err(Error::BadGapWidth(gap_width));
    }
    let factor_count = u16::from_le_bytes([fixed[6], fixed[7]]) as usize;
    let mut factors = Vec::with_capacity(factor_count);
    for _ in 0..factor_count {
        let mut buf = [0u8; 12];
        read_exact(&mut r, &mut buf)?;
        let p = u64::from_le_bytes(buf[..8].try_into().unwrap());
        let e = u32::from_le_bytes(buf[8..].try_into().unwrap());
        factors.push((p, e));
    }
    let mut phi_buf = [0u8; 8];
    read_exact(&mut r, &mut phi_buf)?;
    Ok(SnapshotHeader {
        version,
        gap_width,
        factors,
        phi: u64::from_le_bytes(phi_buf),
    })
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Malformed("snapshot ends inside the header".into())
        } else {
            Error::Io(e)
        }
    })
}

/// Load a snapshot, verifying structure, checksum and phi consistency.
pub fn read_snapshot(path: &Path) -> Result<Cycle> {
    let data = std::fs::read(path)?;
    parse_snapshot(&data)
}

/// Parse a snapshot already resident in memory.
pub fn parse_snapshot(data: &[u8]) -> Result<Cycle> {
    if data.len() < 8 {
        return Err(Error::Malformed("snapshot ends inside the header".into()));
    }
    let mut magic = [0u8; 4];
    magic.copy_from_slice(&data[..4]);
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let version = data[4];
    if version != SNAPSHOT_VERSION {
        return Err(Error::BadVersion(version));
    }
    let gap_width = data[5];
    if !matches!(gap_width, 1 | 2 | 4) {
        return Err(Error::BadGapWidth(gap_width));
    }
    let factor_count = u16::from_le_bytes([data[6], data[7]]) as usize;
    let header_len = 8 + factor_count * 12 + 8;
    if data.len() < header_len + 8 {
        return Err(Error::Malformed("snapshot ends inside the header".into()));
    }
    let mut factors = Vec::with_capacity(factor_count);
    let mut off = 8;
    for _ in 0..factor_count {
        let p = u64::from_le_bytes(data[off..off + 8].try_into().unwrap());
        let e = u32::from_le_bytes(data[off + 8..off + 12].try_into().unwrap());
        factors.push((p, e));
        off += 12;
    }
    let phi = u64::from_le_bytes(data[off..off + 8].try_into().unwrap());
    off += 8;
    let stored = u64::from_le_bytes(data[off..off + 8].try_into().unwrap());
    let payload = &data[off + 8..];

    let mut hasher = Fnv1a::new();
    hasher.update(&data[..off]);
    hasher.update(payload);
    let computed = hasher.finish();
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }

    let width = gap_width as usize;
    if payload.len() % width != 0 {
        return Err(Error::Malformed(format!(
            "payload of {} bytes is not a multiple of the gap width {width}",
            payload.len()
        )));
    }
    let count = (payload.len() / width) as u64;
    if count != phi {
        return Err(Error::PhiMismatch(format!(
            "header declares {phi} gaps, payload holds {count}"
        )));
    }
    let modulus = FactoredInteger::from_factors(factors)?;
    match modulus.phi_u64() {
        Some(expected) if expected == phi => {}
        _ => {
            return Err(Error::PhiMismatch(format!(
                "phi({modulus}) disagrees with the declared gap count {phi}"
            )));
        }
    }

    Ok(match gap_width {
        1 => Cycle::W1(GapCycle::from_raw_parts(modulus, decode::<u8>(payload))),
        2 => Cycle::W2(GapCycle::from_raw_parts(modulus, decode::<u16>(payload))),
        _ => Cycle::W4(GapCycle::from_raw_parts(modulus, decode::<u32>(payload))),
    })
}

fn decode<G: GapWord>(payload: &[u8]) -> Vec<G> {
    payload
        .chunks_exact(G::WIDTH as usize)
        .map(G::read_le)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patch_checksum(data: &mut [u8]) {
        // recompute a valid checksum after deliberate header edits
        let factor_count = u16::from_le_bytes([data[6], data[7]]) as usize;
        let off = 8 + factor_count * 12 + 8;
        let mut hasher = Fnv1a::new();
        hasher.update(&data[..off]);
        hasher.update(&data[off + 8..]);
        data[off..off + 8].copy_from_slice(&hasher.finish().to_le_bytes());
    }

    fn snapshot_bytes(cycle: &Cycle) -> Vec<u8> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pgc");
        write_snapshot(&path, cycle).unwrap();
        std::fs::read(&path).unwrap()
    }

    #[test]
    fn header_predicts_the_file_length() {
        let dir = tempfile::tempdir().unwrap();
        for p in [2u64, 5, 13] {
            let cycle = Cycle::primorial(p).unwrap();
            let path = dir.path().join(format!("{p}.pgc"));
            write_snapshot(&path, &cycle).unwrap();
            let header = read_header(&path).unwrap();
            let actual = std::fs::metadata(&path).unwrap().len();
            assert_eq!(header.expected_file_len(), u128::from(actual));
        }
    }

    #[test]
    fn round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        for p in [2u64, 3, 5, 7, 11] {
            let cycle = Cycle::primorial(p).unwrap();
            let path = dir.path().join(format!("{p}.pgc"));
            write_snapshot(&path, &cycle).unwrap();
            let back = read_snapshot(&path).unwrap();
            assert_eq!(back, cycle, "round trip changed the {p}# cycle");
        }
    }

    #[test]
    fn round_trip_preserves_width() {
        let wide = Cycle::from_gaps(
            crate::numtheory::FactoredInteger::of(4).unwrap(),
            &[300, 2],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wide.pgc");
        write_snapshot(&path, &wide).unwrap();
        let back = read_snapshot(&path).unwrap();
        assert_eq!(back.width(), 2);
        assert_eq!(back, wide);
    }

    #[test]
    fn header_peek_matches_file() {
        let cycle = Cycle::primorial(7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pgc");
        write_snapshot(&path, &cycle).unwrap();
        let header = read_header(&path).unwrap();
        assert_eq!(header.version, 1);
        assert_eq!(header.gap_width, 1);
        assert_eq!(header.factors, vec![(2, 1), (3, 1), (5, 1), (7, 1)]);
        assert_eq!(header.phi, 48);
        assert_eq!(header.modulus().unwrap(), *cycle.modulus());
    }

    #[test]
    fn bad_magic_detected() {
        let mut data = snapshot_bytes(&Cycle::primorial(5).unwrap());
        data[0] = b'X';
        assert!(matches!(
            parse_snapshot(&data),
            Err(Error::BadMagic { found }) if &found == b"XGC1"
        ));
    }

    #[test]
    fn bad_version_detected() {
        let mut data = snapshot_bytes(&Cycle::primorial(5).unwrap());
        data[4] = 9;
        assert!(matches!(parse_snapshot(&data), Err(Error::BadVersion(9))));
    }

    #[test]
    fn bad_width_detected() {
        let mut data = snapshot_bytes(&Cycle::primorial(5).unwrap());
        data[5] = 3;
        assert!(matches!(parse_snapshot(&data), Err(Error::BadGapWidth(3))));
    }

    #[test]
    fn payload_corruption_fails_checksum() {
        let mut data = snapshot_bytes(&Cycle::primorial(7).unwrap());
        let last = data.len() - 1;
        data[last] ^= 0xff;
        assert!(matches!(
            parse_snapshot(&data),
            Err(Error::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn truncated_payload_fails_checksum_not_phi() {
        let mut data = snapshot_bytes(&Cycle::primorial(7).unwrap());
        data.truncate(data.len() - 5);
        assert!(matches!(
            parse_snapshot(&data),
            Err(Error::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn phi_disagreement_detected_when_checksum_is_valid() {
        let mut data = snapshot_bytes(&Cycle::primorial(5).unwrap());
        // declare one more gap than the payload holds, with a fresh checksum
        let off = 8 + 3 * 12;
        let phi = u64::from_le_bytes(data[off..off + 8].try_into().unwrap());
        data[off..off + 8].copy_from_slice(&(phi + 1).to_le_bytes());
        patch_checksum(&mut data);
        assert!(matches!(parse_snapshot(&data), Err(Error::PhiMismatch(_))));
    }

    #[test]
    fn factorization_phi_disagreement_detected() {
        let mut data = snapshot_bytes(&Cycle::primorial(5).unwrap());
        // swap the factor 5 for 7: phi(2*3*7) = 12 != 8 stored gaps
        data[8 + 2 * 12..8 + 2 * 12 + 8].copy_from_slice(&7u64.to_le_bytes());
        patch_checksum(&mut data);
        assert!(matches!(parse_snapshot(&data), Err(Error::PhiMismatch(_))));
    }

    #[test]
    fn truncated_header_is_malformed() {
        let data = snapshot_bytes(&Cycle::primorial(5).unwrap());
        assert!(matches!(
            parse_snapshot(&data[..6]),
            Err(Error::Malformed(_))
        ));
    }

    #[test]
    fn checksum_is_stable_across_writes() {
        let cycle = Cycle::primorial(7).unwrap();
        let a = snapshot_bytes(&cycle);
        let b = snapshot_bytes(&cycle);
        assert_eq!(a, b, "snapshot bytes must be deterministic");
    }

    #[test]
    fn known_bytes_for_tiny_cycle() {
        // 3#: factors 2,3; phi = 2; gaps 4,2 at width 1
        let cycle = Cycle::primorial(3).unwrap();
        let data = snapshot_bytes(&cycle);
        assert_eq!(&data[..4], b"PGC1");
        assert_eq!(data[4], 1);
        assert_eq!(data[5], 1);
        assert_eq!(u16::from_le_bytes([data[6], data[7]]), 2);
        let header_len = 8 + 2 * 12 + 8;
        assert_eq!(data.len(), header_len + 8 + 2);
        assert_eq!(&data[header_len + 8..], &[4u8, 2]);
    }
}
