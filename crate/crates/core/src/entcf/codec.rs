//! Versioned binary encoding of public keys. All integers are little-endian.
//!
//! ```text
//! offset  size  field
//! 0       1     format version (0x01)
//! 1       1     tag: 0x10 Mock/F, 0x11 Mock/G, 0x20 Lwe/F, 0x21 Lwe/G
//! Mock:
//! 2       1     domain width w
//! 3       1     permutation: 0x00 Feistel, 0x01 identity (test builds only)
//! 4       1     permutation width
//! 5       8     shift s
//! 13      32    four Feistel round keys (Feistel only)
//! Lwe:
//! 2       4     q
//! 6       2     n
//! 8       2     m
//! 10      1     κ
//! 11      4     B
//! 15      4·m·n A, row-major
//! ..      4·m   u
//! ```

use super::{EntcfError, FamilyKind, KeyBody, LweKey, LweParams, MockKey, Permutation, PublicKey, Result};
use crate::entcf::feistel::{Feistel, ROUNDS};
use crate::entcf::mock::word_mask;
use crate::zq::ResidueMatrix;

pub const KEY_FORMAT_VERSION: u8 = 0x01;

const TAG_MOCK_F: u8 = 0x10;
const TAG_MOCK_G: u8 = 0x11;
const TAG_LWE_F: u8 = 0x20;
const TAG_LWE_G: u8 = 0x21;
const PERM_FEISTEL: u8 = 0x00;
const PERM_IDENTITY: u8 = 0x01;

pub fn encode_public_key(pk: &PublicKey) -> Vec<u8> {
    let mut out = vec![KEY_FORMAT_VERSION];
    let injective = pk.kind == FamilyKind::Injective;
    match &pk.body {
        KeyBody::Mock(k) => {
            out.push(if injective { TAG_MOCK_G } else { TAG_MOCK_F });
            out.push(k.width as u8);
            match &k.permutation {
                Permutation::Feistel(f) => {
                    out.extend_from_slice(&[PERM_FEISTEL, f.width() as u8]);
                    out.extend_from_slice(&k.shift.to_le_bytes());
                    for key in f.keys() {
                        out.extend_from_slice(&key.to_le_bytes());
                    }
                }
                #[cfg(any(test, feature = "test-vectors"))]
                Permutation::Identity { width } => {
                    out.extend_from_slice(&[PERM_IDENTITY, *width as u8]);
                    out.extend_from_slice(&k.shift.to_le_bytes());
                }
            }
        }
        KeyBody::Lwe(k) => {
            out.push(if injective { TAG_LWE_G } else { TAG_LWE_F });
            let p = &k.params;
            out.extend_from_slice(&p.q.to_le_bytes());
            out.extend_from_slice(&(p.n as u16).to_le_bytes());
            out.extend_from_slice(&(p.m as u16).to_le_bytes());
            out.push(p.kappa as u8);
            out.extend_from_slice(&p.noise_bound.to_le_bytes());
            for v in k.a.entries().iter().chain(&k.u) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| EntcfError::Malformed(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("length 2")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("length 4")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("length 8")))
    }
}

fn malformed<T>(msg: impl Into<String>) -> Result<T> {
    Err(EntcfError::Malformed(msg.into()))
}

pub fn decode_public_key(bytes: &[u8]) -> Result<PublicKey> {
    let mut r = Reader { bytes, pos: 0 };
    let version = r.u8()?;
    if version != KEY_FORMAT_VERSION {
        return malformed(format!("unknown format version {version:#04x}"));
    }
    let tag = r.u8()?;
    let kind = match tag {
        TAG_MOCK_F | TAG_LWE_F => FamilyKind::ClawFree,
        TAG_MOCK_G | TAG_LWE_G => FamilyKind::Injective,
        other => return malformed(format!("unknown key tag {other:#04x}")),
    };
    let body = if tag & 0xf0 == 0x10 {
        let width = u32::from(r.u8()?);
        let perm_tag = r.u8()?;
        let perm_width = u32::from(r.u8()?);
        let shift = r.u64()?;
        let expected_width = if kind == FamilyKind::Injective { width + 1 } else { width };
        if width == 0 || perm_width != expected_width || perm_width > 64 {
            return malformed(format!("inconsistent widths w = {width}, permutation = {perm_width}"));
        }
        let shift_ok = match kind {
            FamilyKind::ClawFree => shift != 0 && shift & !word_mask(width) == 0,
            FamilyKind::Injective => shift == 0,
        };
        if !shift_ok {
            return malformed(format!("invalid shift {shift:#x} for width {width}"));
        }
        let permutation = match perm_tag {
            PERM_FEISTEL => {
                let mut keys = [0u64; ROUNDS];
                for k in &mut keys {
                    *k = r.u64()?;
                }
                Permutation::Feistel(Feistel::new(perm_width, keys))
            }
            #[cfg(any(test, feature = "test-vectors"))]
            PERM_IDENTITY => Permutation::Identity { width: perm_width },
            #[cfg(not(any(test, feature = "test-vectors")))]
            PERM_IDENTITY => return malformed("transparent keys are only accepted in test builds"),
            other => return malformed(format!("unknown permutation tag {other:#04x}")),
        };
        KeyBody::Mock(MockKey { width, shift, permutation })
    } else {
        let params = LweParams {
            q: r.u32()?,
            n: usize::from(r.u16()?),
            m: usize::from(r.u16()?),
            kappa: u32::from(r.u8()?),
            noise_bound: r.u32()?,
        };
        params.validate()?;
        let mut entries = Vec::with_capacity(params.m * params.n);
        for _ in 0..params.m * params.n {
            entries.push(r.u32()?);
        }
        let a = ResidueMatrix::new(params.q, params.m, params.n, entries)
            .or_else(|e| malformed(format!("matrix: {e}")))?;
        let mut u = Vec::with_capacity(params.m);
        for _ in 0..params.m {
            let v = r.u32()?;
            if v >= params.q {
                return malformed(format!("u entry {v} not reduced mod {}", params.q));
            }
            u.push(v);
        }
        KeyBody::Lwe(LweKey { params, a, u })
    };
    if r.pos != bytes.len() {
        return malformed(format!("{} trailing bytes", bytes.len() - r.pos));
    }
    Ok(PublicKey { kind, body })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entcf::{gen, transparent_mock, BackendParams};

    #[test]
    fn roundtrip_all_tags() {
        let params = [BackendParams::Mock { w: 16 }, BackendParams::Mock { w: 63 }, BackendParams::Lwe(LweParams::desk())];
        for p in params {
            for kind in [FamilyKind::ClawFree, FamilyKind::Injective] {
                let (pk, _) = gen(kind, &p, 99).unwrap();
                let bytes = encode_public_key(&pk);
                assert_eq!(decode_public_key(&bytes).unwrap(), pk);
            }
        }
        let (pk, _) = transparent_mock(FamilyKind::ClawFree, 6, 5).unwrap();
        assert_eq!(decode_public_key(&encode_public_key(&pk)).unwrap(), pk);
    }

    #[test]
    fn mock_layout_is_fixed() {
        let (pk, _) = transparent_mock(FamilyKind::ClawFree, 6, 5).unwrap();
        assert_eq!(encode_public_key(&pk), vec![0x01, 0x10, 6, 0x01, 6, 5, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn rejects_malformed_input() {
        let (pk, _) = gen(FamilyKind::ClawFree, &BackendParams::Mock { w: 16 }, 1).unwrap();
        let bytes = encode_public_key(&pk);
        assert!(decode_public_key(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_public_key(&extra).is_err());
        let mut bad_version = bytes.clone();
        bad_version[0] = 2;
        assert!(decode_public_key(&bad_version).is_err());
        let mut bad_tag = bytes;
        bad_tag[1] = 0x30;
        assert!(decode_public_key(&bad_tag).is_err());
        assert!(decode_public_key(&[]).is_err());
    }
}
