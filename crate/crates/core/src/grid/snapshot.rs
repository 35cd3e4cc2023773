//! Binary field snapshots.
//!
//! Layout (little endian): magic `SH2D`, `u32` N, `f64` L, `u8` space tag
//! (0 = position, 1 = frequency), then N² `complex128` values row-major.
//! A JSON sidecar with the grid metadata sits next to the binary file.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Field, GridError, GridSpec, Result, Space};

const MAGIC: &[u8; 4] = b"SH2D";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub cells: usize,
    pub length: f64,
    pub spacing: f64,
    pub space: Space,
    pub origin_index: [usize; 2],
}

impl SnapshotMeta {
    pub fn of(field: &Field) -> Self {
        let spec = field.spec();
        let c = spec.cells() / 2;
        Self {
            cells: spec.cells(),
            length: spec.length(),
            spacing: spec.spacing(),
            space: field.space(),
            origin_index: [c, c],
        }
    }
}

pub fn encode(field: &Field, mut out: impl Write) -> Result<()> {
    let spec = field.spec();
    let n = u32::try_from(spec.cells()).map_err(|_| GridError::Format("N too large".into()))?;
    out.write_all(MAGIC)?;
    out.write_all(&n.to_le_bytes())?;
    out.write_all(&spec.length().to_le_bytes())?;
    out.write_all(&[match field.space() {
        Space::Position => 0u8,
        Space::Frequency => 1u8,
    }])?;
    let mut buf = Vec::with_capacity(16 * field.values().len());
    for v in field.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn decode(mut input: impl Read) -> Result<Field> {
    let mut head = [0u8; 17];
    input.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(GridError::Format("bad magic".into()));
    }
    let n = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
    let l = f64::from_le_bytes(head[8..16].try_into().unwrap());
    let space = match head[16] {
        0 => Space::Position,
        1 => Space::Frequency,
        t => return Err(GridError::Format(format!("unknown space tag {t}"))),
    };
    let spec = GridSpec::coarse(l, n)?;
    let mut raw = vec![0u8; 16 * spec.len()];
    input.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Field::from_values(spec, space, values)
}

/// Sidecar path: `name.bin` -> `name.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes the binary snapshot and its JSON sidecar.
pub fn save(field: &Field, path: &Path) -> Result<()> {
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    encode(field, &mut file)?;
    file.flush()?;
    let meta = serde_json::to_string_pretty(&SnapshotMeta::of(field))?;
    fs::write(sidecar_path(path), meta)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Field> {
    decode(std::io::BufReader::new(fs::File::open(path)?))
}
