//! Binary checkpoint container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes   "PFLOWCK1"
//! config_len   u64       byte length of the config echo
//! config       bytes     UTF-8 JSON describing the model
//! count        u64       number of arrays
//! per array:
//!   name_len   u32
//!   name       bytes     UTF-8
//!   rank       u32
//!   dims       rank × u64
//!   data       prod(dims) × f64 (IEEE-754 binary64, row-major)
//! ```

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{ArrayD, IxDyn};

use super::ParamStore;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"PFLOWCK1";

pub fn write_checkpoint(path: impl AsRef<Path>, config: &str, store: &ParamStore) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_to(&mut out, config, store)?;
    out.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<(String, ParamStore)> {
    let mut input = std::io::BufReader::new(std::fs::File::open(path)?);
    read_from(&mut input)
}

pub(crate) fn write_to(out: &mut impl Write, config: &str, store: &ParamStore) -> Result<()> {
    out.write_all(CHECKPOINT_MAGIC)?;
    out.write_all(&(config.len() as u64).to_le_bytes())?;
    out.write_all(config.as_bytes())?;
    out.write_all(&(store.len() as u64).to_le_bytes())?;
    for p in store.params() {
        out.write_all(&(p.name.len() as u32).to_le_bytes())?;
        out.write_all(p.name.as_bytes())?;
        out.write_all(&(p.value.ndim() as u32).to_le_bytes())?;
        for &d in p.value.shape() {
            out.write_all(&(d as u64).to_le_bytes())?;
        }
        for v in p.value.iter() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(input: &mut impl Read) -> Result<u32> {
    let mut b = [0; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(input: &mut impl Read) -> Result<u64> {
    let mut b = [0; 8];
    input.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_string(input: &mut impl Read, len: usize) -> Result<String> {
    let mut b = vec![0; len];
    input.read_exact(&mut b)?;
    String::from_utf8(b).map_err(|_| Error::Checkpoint("invalid UTF-8".into()))
}

pub(crate) fn read_from(input: &mut impl Read) -> Result<(String, ParamStore)> {
    let mut magic = [0; 8];
    input.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let config_len = read_u64(input)? as usize;
    let config = read_string(input, config_len)?;
    let count = read_u64(input)?;
    let mut store = ParamStore::new();
    for _ in 0..count {
        let name_len = read_u32(input)? as usize;
        let name = read_string(input, name_len)?;
        let rank = read_u32(input)? as usize;
        let dims = (0..rank)
            .map(|_| read_u64(input).map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let len: usize = dims.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut b = [0; 8];
        for _ in 0..len {
            input.read_exact(&mut b)?;
            data.push(f64::from_le_bytes(b));
        }
        if store.id(&name).is_some() {
            return Err(Error::Checkpoint(format!("duplicate array {name}")));
        }
        let value = ArrayD::from_shape_vec(IxDyn(&dims), data)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        store.add(name, value);
    }
    Ok((config, store))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::numeric::uniform;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = ParamStore::new();
        s.add("a.b", uniform(&[3, 4], 1.0, &mut rng));
        s.add("c", uniform(&[2, 2, 5], 1.0, &mut rng));
        s.add("d", uniform(&[7], 1.0, &mut rng));
        let mut buf = Vec::new();
        write_to(&mut buf, "{\"k\":1}", &s).unwrap();
        let (config, back) = read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(config, "{\"k\":1}");
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_from(&mut &b"NOTACKPT........"[..]).is_err());
        assert!(read_from(&mut &CHECKPOINT_MAGIC[..]).is_err());
    }
}
