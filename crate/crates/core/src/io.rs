//! On-disk formats: binary matrices with a JSON header, JSON reports and CSV
//! tables. Every write goes to a sibling temp file first and is renamed into
//! place.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"BCLABMX1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub rows: usize,
    pub cols: usize,
    pub dtype: String,
    pub order: String,
    pub endian: String,
    pub config_hash: String,
}

impl MatrixHeader {
    pub fn new(rows: usize, cols: usize, config_hash: &str) -> Self {
        Self {
            rows,
            cols,
            dtype: "float64".into(),
            order: "row-major".into(),
            endian: "little".into(),
            config_hash: config_hash.into(),
        }
    }
}

/// SHA-256 of the compact JSON form of `value`, hex encoded.
pub fn config_hash<S: Serialize>(value: &S) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| missing(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn missing(path: &Path, e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::NotFound {
        Error::MissingInput(path.to_path_buf())
    } else {
        Error::Io(e)
    }
}

/// Write through a temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        fill(&mut w)?;
        w.flush()?;
        w.get_ref().sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Layout: magic, u64 LE header length, JSON header, row-major f64 LE payload.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>, config_hash: &str) -> Result<()> {
    let header = serde_json::to_vec(&MatrixHeader::new(m.nrows(), m.ncols(), config_hash))?;
    write_atomic(path, |w| {
        w.write_all(MAGIC)?;
        w.write_all(&(header.len() as u64).to_le_bytes())?;
        w.write_all(&header)?;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                w.write_all(&m[(i, j)].to_le_bytes())?;
            }
        }
        Ok(())
    })
}

pub fn read_matrix(path: &Path) -> Result<(DMatrix<f64>, MatrixHeader)> {
    let mut f = fs::File::open(path).map_err(|e| missing(path, e))?;
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("{}: bad magic", path.display())));
    }
    let mut len = [0u8; 8];
    f.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len) as usize;
    if len > 1 << 20 {
        return Err(Error::Format(format!("{}: header length {len}", path.display())));
    }
    let mut header = vec![0u8; len];
    f.read_exact(&mut header)?;
    let header: MatrixHeader = serde_json::from_slice(&header)?;
    if header.dtype != "float64" || header.order != "row-major" || header.endian != "little" {
        return Err(Error::Format(format!("{}: unsupported layout {header:?}", path.display())));
    }
    let mut payload = Vec::new();
    f.read_to_end(&mut payload)?;
    if payload.len() != 8 * header.rows * header.cols {
        return Err(Error::Format(format!(
            "{}: payload has {} bytes, header promises {}x{}",
            path.display(),
            payload.len(),
            header.rows,
            header.cols
        )));
    }
    let vals: Vec<f64> = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((DMatrix::from_row_slice(header.rows, header.cols, &vals), header))
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let bytes = fs::read(path).map_err(|e| missing(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// CSV with a header row; floats are written in shortest round-trip form.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    write_atomic(path, |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(header)?;
        for r in rows {
            if r.len() != header.len() {
                return Err(Error::Shape(format!("csv row has {} columns, header {}", r.len(), header.len())));
            }
            c.write_record(r.iter().map(|v| v.to_string()))?;
        }
        c.flush()?;
        Ok(())
    })
}

pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => Error::MissingInput(path.to_path_buf()),
        _ => Error::Csv(e),
    })?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Format(format!("{}: {e}", path.display()))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
