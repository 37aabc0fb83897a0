//! Binary phase / amplitude map files.
//!
//! Layout: an ASCII header line `PHMAP <width> <height>\n` (or `AMMAP`),
//! then `width * height` little-endian `f32` values in row-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// Phase in radians.
    Phase,
    /// Amplitude or intensity.
    Amplitude,
}

impl MapKind {
    pub fn magic(self) -> &'static str {
        match self {
            MapKind::Phase => "PHMAP",
            MapKind::Amplitude => "AMMAP",
        }
    }

    fn from_magic(s: &str) -> Option<Self> {
        match s {
            "PHMAP" => Some(MapKind::Phase),
            "AMMAP" => Some(MapKind::Amplitude),
            _ => None,
        }
    }
}

pub fn write_map<W: Write>(mut w: W, kind: MapKind, map: &Array2<f64>) -> Result<()> {
    let (rows, cols) = map.dim();
    writeln!(w, "{} {} {}", kind.magic(), cols, rows)?;
    let mut buf = Vec::with_capacity(rows * cols * 4);
    for &v in map.iter() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_map<R: BufRead>(mut r: R) -> Result<(MapKind, Array2<f64>)> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let header = header
        .strip_suffix('\n')
        .ok_or_else(|| Error::Format("map header is not newline-terminated".into()))?;
    let mut parts = header.split(' ');
    let kind = parts
        .next()
        .and_then(MapKind::from_magic)
        .ok_or_else(|| Error::Format(format!("bad map magic in header {header:?}")))?;
    let mut dim = || -> Result<usize> {
        parts
            .next()
            .and_then(|s| s.parse().ok())
            .filter(|&n: &usize| n > 0)
            .ok_or_else(|| Error::Format(format!("bad map dimensions in header {header:?}")))
    };
    let width = dim()?;
    let height = dim()?;
    if parts.next().is_some() {
        return Err(Error::Format(format!(
            "trailing fields in header {header:?}"
        )));
    }
    let mut bytes = vec![0u8; width * height * 4];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Format(format!("truncated map payload: {e}")))?;
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(Error::Format("trailing bytes after map payload".into()));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    let map = Array2::from_shape_vec((height, width), values)
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok((kind, map))
}

pub fn save_map(path: &Path, kind: MapKind, map: &Array2<f64>) -> Result<()> {
    write_map(BufWriter::new(File::create(path)?), kind, map)
}

pub fn load_map(path: &Path) -> Result<(MapKind, Array2<f64>)> {
    read_map(BufReader::new(File::open(path)?))
}

/// Load a map and check that it has the expected kind.
pub fn load_map_of(path: &Path, kind: MapKind) -> Result<Array2<f64>> {
    let (found, map) = load_map(path)?;
    if found != kind {
        return Err(Error::Format(format!(
            "{} holds a {} map, expected {}",
            path.display(),
            found.magic(),
            kind.magic()
        )));
    }
    Ok(map)
}
