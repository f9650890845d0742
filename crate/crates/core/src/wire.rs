//! Payload encoding for bus messages: each record is a little-endian `u32`
//! byte length followed by that many bytes of JSON.

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::WireError;

pub fn encode_records<T: Serialize>(records: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        let body = serde_json::to_vec(r).expect("records serialize to JSON");
        let len = u32::try_from(body.len()).expect("record shorter than 4 GiB");
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&body);
    }
    out
}

pub fn decode_records<T: DeserializeOwned>(mut bytes: &[u8]) -> Result<Vec<T>, WireError> {
    let total = bytes.len();
    let mut out = Vec::new();
    while !bytes.is_empty() {
        let offset = total - bytes.len();
        let (len, rest) = bytes
            .split_first_chunk::<4>()
            .ok_or(WireError::Truncated(offset))?;
        let len = u32::from_le_bytes(*len) as usize;
        if rest.len() < len {
            return Err(WireError::Truncated(offset));
        }
        let (body, rest) = rest.split_at(len);
        out.push(serde_json::from_slice(body)?);
        bytes = rest;
    }
    Ok(out)
}
