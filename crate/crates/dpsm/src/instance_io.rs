//! Flat little-endian dump of a phase-retrieval instance:
//! `"WCXPR001"`, then `n, N, m, seed` as `u64`, then `x̃`, `w`, `y` as `f64`.

use std::path::Path;

use dpsm_core::PhaseRetrievalInstance;

use crate::error::{io_err, Error, Result};

pub const MAGIC: &[u8; 8] = b"WCXPR001";

pub fn encode_instance(inst: &PhaseRetrievalInstance) -> Vec<u8> {
    let floats = inst.n() + inst.measurements().len() + inst.observations().len();
    let mut out = Vec::with_capacity(8 + 32 + 8 * floats);
    out.extend_from_slice(MAGIC);
    for v in [inst.n(), dpsm_core::ObjectiveOracle::agents(inst), inst.m()] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    out.extend_from_slice(&inst.seed().to_le_bytes());
    for v in inst
        .ground_truth()
        .iter()
        .chain(inst.measurements())
        .chain(inst.observations())
    {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_instance(bytes: &[u8]) -> Result<PhaseRetrievalInstance> {
    if bytes.len() < 40 {
        return Err(Error::Truncated {
            what: "instance header",
            needed: 40,
            available: bytes.len(),
        });
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::Format {
            what: "instance dump",
            reason: "missing WCXPR001 magic".into(),
        });
    }
    let word = |i: usize| u64::from_le_bytes(bytes[8 + 8 * i..16 + 8 * i].try_into().expect("eight bytes"));
    let (n, agents, m, seed) = (word(0) as usize, word(1) as usize, word(2) as usize, word(3));
    let sizes = agents
        .checked_mul(m)
        .and_then(|am| Some((am, am.checked_mul(n)?)))
        .and_then(|(am, amn)| Some(([n, amn, am], n.checked_add(amn)?.checked_add(am)?.checked_mul(8)?)));
    let (counts, body_len) = sizes.ok_or(Error::Format {
        what: "instance dump",
        reason: format!("sizes n={n}, N={agents}, m={m} overflow"),
    })?;
    let body = &bytes[40..];
    if body.len() != body_len {
        return Err(Error::Truncated {
            what: "instance body",
            needed: 40 + body_len,
            available: bytes.len(),
        });
    }
    let mut floats = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes")));
    let mut take = |len: usize| -> Vec<f64> { floats.by_ref().take(len).collect() };
    let truth = take(counts[0]);
    let w = take(counts[1]);
    let y = take(counts[2]);
    Ok(PhaseRetrievalInstance::from_parts(n, agents, m, w, y, truth, seed)?)
}

pub fn save_instance(inst: &PhaseRetrievalInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_instance(inst)).map_err(io_err(path))
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<PhaseRetrievalInstance> {
    let path = path.as_ref();
    decode_instance(&std::fs::read(path).map_err(io_err(path))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let inst = PhaseRetrievalInstance::generate(4, 3, 5, 11).unwrap();
        let bytes = encode_instance(&inst);
        assert_eq!(bytes.len(), 40 + 8 * (4 + 60 + 15));
        assert_eq!(decode_instance(&bytes).unwrap(), inst);
    }

    #[test]
    fn rejects_bad_input() {
        let inst = PhaseRetrievalInstance::generate(2, 1, 2, 0).unwrap();
        let bytes = encode_instance(&inst);
        assert!(decode_instance(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[7] = b'2';
        assert!(decode_instance(&bad).is_err());
        assert!(decode_instance(&bytes[..20]).is_err());
        let mut huge = bytes[..40].to_vec();
        huge[16..24].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(decode_instance(&huge), Err(Error::Format { .. })));
    }
}
