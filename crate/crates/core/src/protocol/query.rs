use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{stream_rng, KeyRecord, QUERY_STREAM};
use crate::error::{Error, Result};

/// Bob's key stretched cyclically or truncated to the database length.
pub fn effective_key(bob_key: &[u8], len: usize) -> Vec<u8> {
    if bob_key.is_empty() {
        return Vec::new();
    }
    bob_key.iter().copied().cycle().take(len).collect()
}

/// Left rotation: `out[t] = key[(t + shift) mod N]`.
pub fn shift_key(key: &[u8], shift: usize) -> Vec<u8> {
    let mut out = key.to_vec();
    if !out.is_empty() {
        out.rotate_left(shift % key.len());
    }
    out
}

/// Bitwise XOR of equal-length bit vectors. Applying it twice with the same
/// key returns the input.
pub fn one_time_pad(bits: &[u8], key: &[u8]) -> Result<Vec<u8>> {
    if bits.len() != key.len() {
        return Err(Error::DimensionMismatch {
            expected: bits.len(),
            found: key.len(),
        });
    }
    Ok(bits.iter().zip(key).map(|(b, k)| b ^ k).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuerySession {
    pub query_index: usize,
    /// Key position whose bit Alice knows.
    pub alice_position: usize,
    pub shift: usize,
    pub shifted_key: Vec<u8>,
    pub ciphertext: Vec<u8>,
    pub recovered_bit: u8,
    /// Whether the recovered bit equals the database entry. It can differ
    /// when Alice's inferred bit is wrong.
    pub correct: bool,
}

/// Retrieves `database[query_index]` using one usable key position.
pub fn private_query(
    record: &KeyRecord,
    database: &[u8],
    query_index: usize,
    seed: u64,
) -> Result<QuerySession> {
    let n = database.len();
    if query_index >= n {
        return Err(Error::QueryIndex {
            index: query_index,
            len: n,
        });
    }
    if let Some(bad) = database.iter().find(|&&b| b > 1) {
        return Err(Error::Database(format!("entry {bad} is not a bit")));
    }
    let key = effective_key(&record.bob_key, n);
    let usable: Vec<usize> = record
        .usable_positions()
        .into_iter()
        .filter(|&p| p < key.len())
        .collect();
    let mut rng = stream_rng(seed, QUERY_STREAM);
    let &j = usable.choose(&mut rng).ok_or(Error::Restart)?;
    let alice_bit = record.alice_known[&j];

    let shift = (j + n - query_index) % n;
    let shifted_key = shift_key(&key, shift);
    let ciphertext = one_time_pad(database, &shifted_key)?;
    let recovered_bit = ciphertext[query_index] ^ alice_bit;
    Ok(QuerySession {
        query_index,
        alice_position: j,
        shift,
        shifted_key,
        ciphertext,
        recovered_bit,
        correct: recovered_bit == database[query_index],
    })
}
