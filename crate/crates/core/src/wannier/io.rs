//! Binary container for [`WannierBasis`].
//!
//! Layout, little endian:
//!
//! ```text
//! magic "GWB1"
//! u64 dim, u64 count, u64 degeneracy M, u64 half_width N, u64 labeled (0/1)
//! count x (f64 mu1, f64 mu2)
//! if labeled: count x (i64 m1, i64 m2, u32 slot, u32 zero)
//! dim * count x (f64 re, f64 im), column-major
//! ```
//!
//! The number of orbitals per site is `dim / (4 N^2)`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use faer::{c64, Mat};

use super::{LatticeLabel, WannierBasis};
use crate::error::{LabError, Result};
use crate::lattice::{LatticeIndexing, Site};

const MAGIC: &[u8; 4] = b"GWB1";

impl WannierBasis {
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| LabError::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| LabError::io(path, e))?;
        w.flush().map_err(|e| LabError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| LabError::io(path, e))?;
        Self::read_from(&mut BufReader::new(file)).map_err(|e| match e {
            ReadError::Io(e) => LabError::io(path, e),
            ReadError::Format(msg) => LabError::Format(msg),
        })
    }

    fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        for v in [
            self.dim(),
            self.len(),
            self.degeneracy,
            self.lattice.half_width(),
            self.labels.is_some() as usize,
        ] {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        for c in &self.centers {
            w.write_all(&c[0].to_le_bytes())?;
            w.write_all(&c[1].to_le_bytes())?;
        }
        if let Some(labels) = &self.labels {
            for l in labels {
                w.write_all(&l.site.x.to_le_bytes())?;
                w.write_all(&l.site.y.to_le_bytes())?;
                w.write_all(&(l.slot as u32).to_le_bytes())?;
                w.write_all(&0u32.to_le_bytes())?;
            }
        }
        for j in 0..self.len() {
            for z in self.functions.col(j).iter() {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    fn read_from(r: &mut impl Read) -> std::result::Result<Self, ReadError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(ReadError::Format("bad magic".into()));
        }
        let dim = read_len(r)?;
        let count = read_len(r)?;
        let degeneracy = read_len(r)?;
        let half_width = read_len(r)?;
        let labeled = match read_u64(r)? {
            0 => false,
            1 => true,
            other => return Err(ReadError::Format(format!("bad label flag {other}"))),
        };
        let sites = 4 * half_width.checked_mul(half_width).ok_or_else(too_large)?;
        if half_width == 0 || dim == 0 || dim % sites != 0 {
            return Err(ReadError::Format(format!(
                "dimension {dim} does not match half width {half_width}"
            )));
        }
        if count > dim || degeneracy == 0 {
            return Err(ReadError::Format(format!(
                "{count} functions in dimension {dim} with degeneracy {degeneracy}"
            )));
        }
        let lattice = LatticeIndexing::new(half_width, dim / sites);

        let mut centers = Vec::with_capacity(count);
        for _ in 0..count {
            let c = [read_f64(r)?, read_f64(r)?];
            if !c[0].is_finite() || !c[1].is_finite() {
                return Err(ReadError::Format("non-finite center".into()));
            }
            centers.push(c);
        }
        let labels = if labeled {
            let mut labels = Vec::with_capacity(count);
            for _ in 0..count {
                let x = i64::from_le_bytes(read_array(r)?);
                let y = i64::from_le_bytes(read_array(r)?);
                let slot = u32::from_le_bytes(read_array(r)?) as usize;
                let _pad: [u8; 4] = read_array(r)?;
                if slot >= degeneracy {
                    return Err(ReadError::Format(format!(
                        "slot {slot} exceeds degeneracy {degeneracy}"
                    )));
                }
                labels.push(LatticeLabel {
                    site: Site::new(x, y),
                    slot,
                });
            }
            Some(labels)
        } else {
            None
        };
        let mut functions = Mat::<c64>::zeros(dim, count);
        for j in 0..count {
            for i in 0..dim {
                functions[(i, j)] = c64::new(read_f64(r)?, read_f64(r)?);
            }
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(ReadError::Format("trailing bytes".into()));
        }
        Ok(WannierBasis {
            functions,
            centers,
            labels,
            degeneracy,
            lattice,
        })
    }
}

enum ReadError {
    Io(std::io::Error),
    Format(String),
}

impl From<std::io::Error> for ReadError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            ReadError::Format("truncated container".into())
        } else {
            ReadError::Io(e)
        }
    }
}

fn too_large() -> ReadError {
    ReadError::Format("header values overflow".into())
}

fn read_array<const K: usize>(r: &mut impl Read) -> std::result::Result<[u8; K], ReadError> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u64(r: &mut impl Read) -> std::result::Result<u64, ReadError> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

fn read_len(r: &mut impl Read) -> std::result::Result<usize, ReadError> {
    let v = read_u64(r)?;
    usize::try_from(v)
        .ok()
        .filter(|v| *v <= 1 << 40)
        .ok_or_else(too_large)
}

fn read_f64(r: &mut impl Read) -> std::result::Result<f64, ReadError> {
    Ok(f64::from_le_bytes(read_array(r)?))
}
