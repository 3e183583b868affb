//! Vector I/O: JSON arrays and a length-prefixed binary stream
//! (`u64` count, then that many `f64`, all little-endian).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version tag written into every JSON document and CSV table the CLI emits.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorFormat {
    Json,
    Binary,
}

pub fn parse_json_vector(text: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = serde_json::from_str(text.trim())
        .map_err(|e| Error::usage(format!("expected a JSON array of numbers: {e}")))?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::usage("vector entries must be finite"));
    }
    Ok(v)
}

pub fn read_binary_vector<R: Read>(mut reader: R) -> Result<Vec<f64>> {
    let mut word = [0u8; 8];
    reader
        .read_exact(&mut word)
        .map_err(|e| Error::usage(format!("binary vector: missing length prefix: {e}")))?;
    let n = u64::from_le_bytes(word);
    let n = usize::try_from(n).map_err(|_| Error::usage("binary vector: length overflows usize"))?;
    let mut out = Vec::new();
    out.try_reserve_exact(n)
        .map_err(|_| Error::usage(format!("binary vector: cannot allocate {n} entries")))?;
    for i in 0..n {
        reader
            .read_exact(&mut word)
            .map_err(|_| Error::usage(format!("binary vector: truncated after {i} of {n} entries")))?;
        let v = f64::from_le_bytes(word);
        if !v.is_finite() {
            return Err(Error::usage(format!("binary vector: entry {i} is not finite")));
        }
        out.push(v);
    }
    let mut rest = [0u8; 1];
    match reader.read(&mut rest) {
        Ok(0) => Ok(out),
        Ok(_) => Err(Error::usage("binary vector: trailing bytes after the declared length")),
        Err(e) => Err(Error::usage(format!("binary vector: {e}"))),
    }
}

pub fn write_binary_vector<W: Write>(mut writer: W, v: &[f64]) -> std::io::Result<()> {
    writer.write_all(&(v.len() as u64).to_le_bytes())?;
    for x in v {
        writer.write_all(&x.to_le_bytes())?;
    }
    writer.flush()
}

pub fn read_vector<R: Read>(mut reader: R, format: VectorFormat) -> Result<Vec<f64>> {
    match format {
        VectorFormat::Binary => read_binary_vector(reader),
        VectorFormat::Json => {
            let mut s = String::new();
            reader
                .read_to_string(&mut s)
                .map_err(|e| Error::usage(format!("cannot read vector: {e}")))?;
            parse_json_vector(&s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn json_vectors() {
        assert_eq!(parse_json_vector("[-2,0.8,3,1.3]").unwrap(), vec![-2.0, 0.8, 3.0, 1.3]);
        assert!(parse_json_vector("[1,").is_err());
        assert!(parse_json_vector("{\"a\":1}").is_err());
    }

    #[test]
    fn binary_rejects_truncation_and_trailing_bytes() {
        let mut buf = Vec::new();
        write_binary_vector(&mut buf, &[1.0, 2.0]).unwrap();
        assert!(read_binary_vector(&buf[..buf.len() - 1]).is_err());
        buf.push(0);
        assert!(read_binary_vector(&buf[..]).is_err());
        assert!(read_binary_vector(&[1u8, 2, 3][..]).is_err());
    }

    #[test]
    fn binary_layout_is_little_endian() {
        let mut buf = Vec::new();
        write_binary_vector(&mut buf, &[1.0]).unwrap();
        assert_eq!(&buf[..8], &1u64.to_le_bytes());
        assert_eq!(&buf[8..], &1.0f64.to_le_bytes());
    }

    proptest! {
        #[test]
        fn binary_round_trip(v in prop::collection::vec(-1e300f64..1e300, 0..64)) {
            let mut buf = Vec::new();
            write_binary_vector(&mut buf, &v).unwrap();
            prop_assert_eq!(read_binary_vector(&buf[..]).unwrap(), v);
        }
    }
}
