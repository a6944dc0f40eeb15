//! Flat binary parameter container.
//!
//! Layout: the six magic bytes `RESEB1`, then one record per array until end
//! of file. A record is the name length (u64 LE), the UTF-8 name bytes, the
//! rank (u64 LE), each extent (u64 LE), and the values as IEEE-754 f64 LE.
//! Values are copied bit for bit, so a round trip is exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{NumArray, ParameterSet};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"RESEB1";

pub fn write_container<W: Write>(mut w: W, params: &ParameterSet) -> Result<()> {
    w.write_all(MAGIC)?;
    for (name, value) in params.iter() {
        w.write_all(&(name.len() as u64).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(value.rank() as u64).to_le_bytes())?;
        for &e in value.shape() {
            w.write_all(&(e as u64).to_le_bytes())?;
        }
        for v in value.data() {
            w.write_all(&v.to_bits().to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// Reads the next record, or `None` at a clean end of file.
fn read_record<R: Read>(r: &mut R) -> Result<Option<(String, NumArray)>> {
    let mut first = [0u8; 8];
    let mut got = 0;
    while got < 8 {
        let n = r.read(&mut first[got..])?;
        if n == 0 {
            break;
        }
        got += n;
    }
    if got == 0 {
        return Ok(None);
    }
    if got < 8 {
        return Err(Error::Format("truncated record header".into()));
    }
    let name_len = u64::from_le_bytes(first) as usize;
    if name_len > 1 << 16 {
        return Err(Error::Format(format!("implausible name length {name_len}")));
    }
    let mut name = vec![0u8; name_len];
    r.read_exact(&mut name)?;
    let name = String::from_utf8(name).map_err(|_| Error::Format("name is not UTF-8".into()))?;
    let rank = read_u64(r)? as usize;
    if rank > 3 {
        return Err(Error::Format(format!("{name}: rank {rank} > 3")));
    }
    let mut shape = Vec::with_capacity(rank);
    for _ in 0..rank {
        shape.push(read_u64(r)? as usize);
    }
    let count: usize = shape.iter().product();
    let mut raw = vec![0u8; count * 8];
    r.read_exact(&mut raw)?;
    let data = raw
        .chunks_exact(8)
        .map(|c| f64::from_bits(u64::from_le_bytes(c.try_into().unwrap())))
        .collect();
    let value = NumArray::new(&shape, data).map_err(|e| Error::Format(format!("{name}: {e}")))?;
    Ok(Some((name, value)))
}

pub fn read_container<R: Read>(mut r: R) -> Result<ParameterSet> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("missing RESEB1 header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    let mut params = ParameterSet::new();
    while let Some((name, value)) = read_record(&mut r)? {
        params.insert(name, value)?;
    }
    Ok(params)
}

pub fn save(path: &Path, params: &ParameterSet) -> Result<()> {
    write_container(BufWriter::new(File::create(path)?), params)
}

pub fn load(path: &Path) -> Result<ParameterSet> {
    read_container(BufReader::new(File::open(path)?))
}
