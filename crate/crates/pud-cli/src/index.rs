//! Binary feature-index file format.
//!
//! Little-endian layout:
//!
//! ```text
//! magic          4 bytes  "PUDX"
//! format_version u32
//! kind           u8       0 = PUD, 1 = HSV histogram
//! dim            u32
//! record_count   u64
//! beta1          f64
//! beta2          f64
//! per record:
//!   id_len       u16, then UTF-8 image id
//!   label_len    u16, then UTF-8 class label
//!   descriptor   dim x f32
//! ```
//!
//! Descriptors are stored as f32 to halve index size; all in-memory math is
//! f64. Format version 1 implies the hue-major 8x4x4 color quantizer
//! layout. Writing a freshly read index reproduces the file byte for byte.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::CliError;
use pud_core::{CorpusItem, LabeledCorpus, COLOR_BINS, PUD_DIM};

pub const MAGIC: [u8; 4] = *b"PUDX";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DescriptorKind {
    Pud,
    Hsv,
}

impl DescriptorKind {
    pub fn dim(&self) -> u32 {
        match self {
            DescriptorKind::Pud => PUD_DIM as u32,
            DescriptorKind::Hsv => COLOR_BINS as u32,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DescriptorKind::Pud => "pud",
            DescriptorKind::Hsv => "hsv",
        }
    }

    fn to_byte(self) -> u8 {
        match self {
            DescriptorKind::Pud => 0,
            DescriptorKind::Hsv => 1,
        }
    }

    fn from_byte(b: u8) -> Result<Self, CliError> {
        match b {
            0 => Ok(DescriptorKind::Pud),
            1 => Ok(DescriptorKind::Hsv),
            other => Err(CliError::Data(format!("unknown descriptor kind byte {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexRecord {
    pub image_id: String,
    pub class_label: String,
    pub descriptor: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureIndex {
    pub descriptor_kind: DescriptorKind,
    pub dim: u32,
    pub beta1: f64,
    pub beta2: f64,
    pub records: Vec<IndexRecord>,
}

impl FeatureIndex {
    pub fn new(
        descriptor_kind: DescriptorKind,
        beta1: f64,
        beta2: f64,
        records: Vec<IndexRecord>,
    ) -> Result<Self, CliError> {
        let dim = descriptor_kind.dim();
        for r in &records {
            if r.descriptor.len() != dim as usize {
                return Err(CliError::Data(format!(
                    "record '{}' has dimension {}, expected {dim}",
                    r.image_id,
                    r.descriptor.len()
                )));
            }
        }
        Ok(Self {
            descriptor_kind,
            dim,
            beta1,
            beta2,
            records,
        })
    }

    pub fn position(&self, image_id: &str) -> Option<usize> {
        self.records.iter().position(|r| r.image_id == image_id)
    }

    pub fn descriptors(&self) -> Vec<&[f64]> {
        self.records.iter().map(|r| r.descriptor.as_slice()).collect()
    }

    pub fn to_corpus(&self) -> Result<LabeledCorpus, CliError> {
        LabeledCorpus::new(
            self.records
                .iter()
                .map(|r| CorpusItem {
                    image_id: r.image_id.clone(),
                    class_label: r.class_label.clone(),
                    descriptor: r.descriptor.clone(),
                })
                .collect(),
        )
        .map_err(Into::into)
    }

    pub fn write(&self, mut w: impl Write) -> Result<(), CliError> {
        w.write_all(&MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&[self.descriptor_kind.to_byte()])?;
        w.write_all(&self.dim.to_le_bytes())?;
        w.write_all(&(self.records.len() as u64).to_le_bytes())?;
        w.write_all(&self.beta1.to_le_bytes())?;
        w.write_all(&self.beta2.to_le_bytes())?;
        for r in &self.records {
            write_string(&mut w, &r.image_id)?;
            write_string(&mut w, &r.class_label)?;
            for &v in &r.descriptor {
                w.write_all(&(v as f32).to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn write_to(&self, path: &Path) -> Result<(), CliError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read(mut r: impl Read) -> Result<Self, CliError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(CliError::Data("not a feature index (bad magic)".into()));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(CliError::Data(format!(
                "unsupported index format version {version} (expected {FORMAT_VERSION})"
            )));
        }
        let mut kind_byte = [0u8; 1];
        r.read_exact(&mut kind_byte)?;
        let descriptor_kind = DescriptorKind::from_byte(kind_byte[0])?;
        let dim = read_u32(&mut r)?;
        if dim != descriptor_kind.dim() {
            return Err(CliError::Data(format!(
                "dimension {dim} does not match descriptor kind {}",
                descriptor_kind.as_str()
            )));
        }
        let count = read_u64(&mut r)?;
        let beta1 = read_f64(&mut r)?;
        let beta2 = read_f64(&mut r)?;

        let mut records = Vec::with_capacity(count.min(1 << 20) as usize);
        let mut buf = vec![0u8; dim as usize * 4];
        for _ in 0..count {
            let image_id = read_string(&mut r)?;
            let class_label = read_string(&mut r)?;
            r.read_exact(&mut buf)?;
            let descriptor = buf
                .chunks_exact(4)
                .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
                .collect();
            records.push(IndexRecord {
                image_id,
                class_label,
                descriptor,
            });
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(CliError::Data("trailing bytes after last record".into()));
        }
        Ok(Self {
            descriptor_kind,
            dim,
            beta1,
            beta2,
            records,
        })
    }

    pub fn read_from(path: &Path) -> Result<Self, CliError> {
        let file = File::open(path)
            .map_err(|e| CliError::Data(format!("cannot open index {}: {e}", path.display())))?;
        Self::read(BufReader::new(file))
    }
}

fn write_string(w: &mut impl Write, s: &str) -> Result<(), CliError> {
    let bytes = s.as_bytes();
    let len = u16::try_from(bytes.len())
        .map_err(|_| CliError::Data(format!("string too long for index: '{s}'")))?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(bytes)?;
    Ok(())
}

fn read_string(r: &mut impl Read) -> Result<String, CliError> {
    let mut len = [0u8; 2];
    r.read_exact(&mut len)?;
    let mut bytes = vec![0u8; u16::from_le_bytes(len) as usize];
    r.read_exact(&mut bytes)?;
    String::from_utf8(bytes).map_err(|e| CliError::Data(format!("invalid UTF-8 in index: {e}")))
}

fn read_u32(r: &mut impl Read) -> Result<u32, CliError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64, CliError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64, CliError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
