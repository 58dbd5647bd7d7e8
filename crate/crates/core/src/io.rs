//! File formats: JSON documents for matrices, parameters, and sample sets;
//! the PWIF binary covariance-image container; and label-map outputs.
//!
//! Matrix documents carry `p`, `re`, and `im` fields. `re`/`im` may hold
//! either full `p x p` arrays or the upper triangle row by row (row `i` of
//! length `p - i`); the lower triangle is reconstructed by conjugate
//! symmetry. Sample-set files are line-delimited: a header line with `p` and
//! `N`, then one matrix document per line.
//!
//! PWIF layout (all little-endian): magic `PWIF`, version `u32`, height
//! `u32`, width `u32`, `p` as `u16`, looks as `f64`, then row-major pixels,
//! each a full `p x p` complex matrix stored as `(re, im)` `f64` pairs.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::CovarianceImage;
use crate::hermitian::HermitianPD;
use crate::wishart::{SampleSet, WishartParams};

pub const PWIF_MAGIC: &[u8; 4] = b"PWIF";
pub const PWIF_VERSION: u32 = 1;

/// Errors raised while reading or writing the file formats.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("not a PWIF file")]
    NotPwif,

    #[error("unsupported PWIF version {0}")]
    BadVersion(u32),

    #[error("truncated PWIF file: expected {expected} bytes, found {found} (missing {missing})")]
    Truncated {
        expected: u64,
        found: u64,
        missing: u64,
    },

    #[error("invalid PWIF field at byte offset {offset}: {message}")]
    InvalidField { offset: usize, message: String },

    #[error(transparent)]
    Invalid(#[from] crate::Error),
}

pub type FormatResult<T> = std::result::Result<T, FormatError>;

/// JSON form of a Hermitian matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub p: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &HermitianPD) -> Self {
        let p = m.dim();
        MatrixDoc {
            p,
            re: (0..p)
                .map(|i| (0..p).map(|j| m.get(i, j).re).collect())
                .collect(),
            im: (0..p)
                .map(|i| (0..p).map(|j| m.get(i, j).im).collect())
                .collect(),
        }
    }

    /// Validates into a matrix, accepting full or upper-triangular layouts.
    pub fn into_matrix(&self) -> FormatResult<HermitianPD> {
        let p = self.p;
        if p == 0 {
            return Err(FormatError::Invalid(crate::Error::DimensionMismatch {
                expected: 1,
                found: 0,
            }));
        }
        let full = self.re.len() == p && self.re.iter().all(|r| r.len() == p);
        let tri = self.re.len() == p
            && self.re.iter().enumerate().all(|(i, r)| r.len() == p - i);
        let shape_ok = |v: &Vec<Vec<f64>>| v.len() == self.re.len()
            && v.iter().zip(&self.re).all(|(a, b)| a.len() == b.len());
        if !(full || tri) || !shape_ok(&self.im) {
            return Err(FormatError::Parse {
                line: 0,
                message: format!(
                    "re/im must be full {p}x{p} arrays or the upper triangle (row i of length p - i)"
                ),
            });
        }
        let mut rows = vec![vec![Complex64::ZERO; p]; p];
        for i in 0..p {
            for (off, j) in (if full { 0..p } else { i..p }).enumerate() {
                let z = Complex64::new(self.re[i][off], self.im[i][off]);
                rows[i][j] = z;
                if j > i && !full {
                    rows[j][i] = z.conj();
                }
            }
        }
        Ok(HermitianPD::validate(&rows)?)
    }
}

/// JSON form of a parameter pair `(n, sigma)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub n: f64,
    pub sigma: MatrixDoc,
}

impl ParamsDoc {
    pub fn from_params(t: &WishartParams) -> Self {
        ParamsDoc {
            n: t.looks(),
            sigma: MatrixDoc::from_matrix(t.sigma()),
        }
    }

    pub fn into_params(&self) -> FormatResult<WishartParams> {
        Ok(WishartParams::new(self.sigma.into_matrix()?, self.n)?)
    }
}

pub fn read_matrix(path: &Path) -> FormatResult<HermitianPD> {
    let text = fs::read_to_string(path)?;
    let doc: MatrixDoc = serde_json::from_str(&text).map_err(|e| FormatError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    doc.into_matrix()
}

pub fn write_matrix(path: &Path, m: &HermitianPD) -> FormatResult<()> {
    let doc = MatrixDoc::from_matrix(m);
    fs::write(path, serde_json::to_string_pretty(&doc).expect("serializable") + "\n")?;
    Ok(())
}

pub fn read_params(path: &Path) -> FormatResult<WishartParams> {
    let text = fs::read_to_string(path)?;
    let doc: ParamsDoc = serde_json::from_str(&text).map_err(|e| FormatError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    doc.into_params()
}

pub fn write_params(path: &Path, t: &WishartParams) -> FormatResult<()> {
    let doc = ParamsDoc::from_params(t);
    fs::write(path, serde_json::to_string_pretty(&doc).expect("serializable") + "\n")?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleHeader {
    p: usize,
    #[serde(rename = "N")]
    count: usize,
}

/// Reads a line-delimited sample-set file; parse failures carry the
/// offending line number.
pub fn read_sample_set(path: &Path) -> FormatResult<SampleSet> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header_line) = lines.next().ok_or(FormatError::Parse {
        line: 1,
        message: "empty sample-set file".into(),
    })?;
    let header: SampleHeader =
        serde_json::from_str(header_line).map_err(|e| FormatError::Parse {
            line: 1,
            message: format!("bad header: {e}"),
        })?;
    let mut matrices = Vec::with_capacity(header.count);
    for (idx, line) in lines {
        let doc: MatrixDoc = serde_json::from_str(line).map_err(|e| FormatError::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        let m = doc.into_matrix().map_err(|e| FormatError::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if m.dim() != header.p {
            return Err(FormatError::Parse {
                line: idx + 1,
                message: format!("matrix dimension {} does not match header p {}", m.dim(), header.p),
            });
        }
        matrices.push(m);
    }
    if matrices.len() != header.count {
        return Err(FormatError::Parse {
            line: text.lines().count(),
            message: format!(
                "header announces N = {} matrices, file holds {}",
                header.count,
                matrices.len()
            ),
        });
    }
    Ok(SampleSet::new(matrices)?)
}

pub fn write_sample_set(path: &Path, s: &SampleSet) -> FormatResult<()> {
    let mut out = fs::File::create(path)?;
    let header = SampleHeader {
        p: s.dim(),
        count: s.len(),
    };
    writeln!(out, "{}", serde_json::to_string(&header).expect("serializable"))?;
    for m in s.matrices() {
        let doc = MatrixDoc::from_matrix(m);
        writeln!(out, "{}", serde_json::to_string(&doc).expect("serializable"))?;
    }
    Ok(())
}

fn pwif_expected_len(height: u64, width: u64, p: u64) -> u64 {
    // header: magic 4 + version 4 + height 4 + width 4 + p 2 + looks 8
    26 + height * width * p * p * 16
}

pub fn write_pwif(path: &Path, img: &CovarianceImage) -> FormatResult<()> {
    let mut buf = Vec::with_capacity(pwif_expected_len(
        img.height() as u64,
        img.width() as u64,
        img.dim() as u64,
    ) as usize);
    buf.extend_from_slice(PWIF_MAGIC);
    buf.extend_from_slice(&PWIF_VERSION.to_le_bytes());
    buf.extend_from_slice(&(img.height() as u32).to_le_bytes());
    buf.extend_from_slice(&(img.width() as u32).to_le_bytes());
    buf.extend_from_slice(&(img.dim() as u16).to_le_bytes());
    buf.extend_from_slice(&img.looks().to_le_bytes());
    let p = img.dim();
    for px in img.pixels() {
        for i in 0..p {
            for j in 0..p {
                let z = px.get(i, j);
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_pwif(path: &Path) -> FormatResult<CovarianceImage> {
    let bytes = fs::read(path)?;
    if bytes.len() < 4 || &bytes[0..4] != PWIF_MAGIC {
        return Err(FormatError::NotPwif);
    }
    let need = |hi: usize| -> FormatResult<()> {
        if bytes.len() < hi {
            Err(FormatError::Truncated {
                expected: hi as u64,
                found: bytes.len() as u64,
                missing: (hi - bytes.len()) as u64,
            })
        } else {
            Ok(())
        }
    };
    need(26)?;
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != PWIF_VERSION {
        return Err(FormatError::BadVersion(version));
    }
    let height = u32_at(8) as usize;
    let width = u32_at(12) as usize;
    let p = u16::from_le_bytes(bytes[16..18].try_into().unwrap()) as usize;
    let looks = f64::from_le_bytes(bytes[18..26].try_into().unwrap());
    if height == 0 || width == 0 {
        return Err(FormatError::InvalidField {
            offset: 8,
            message: "image dimensions must be positive".into(),
        });
    }
    if p == 0 {
        return Err(FormatError::InvalidField {
            offset: 16,
            message: "matrix dimension must be positive".into(),
        });
    }
    let expected = pwif_expected_len(height as u64, width as u64, p as u64);
    if (bytes.len() as u64) < expected {
        return Err(FormatError::Truncated {
            expected,
            found: bytes.len() as u64,
            missing: expected - bytes.len() as u64,
        });
    }
    let mut off = 26;
    let mut pixels = Vec::with_capacity(height * width);
    for _ in 0..height * width {
        let mut rows = vec![vec![Complex64::ZERO; p]; p];
        for row in rows.iter_mut() {
            for z in row.iter_mut() {
                let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
                let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
                *z = Complex64::new(re, im);
                off += 16;
            }
        }
        pixels.push(HermitianPD::validate(&rows).map_err(|e| FormatError::InvalidField {
            offset: off,
            message: format!("pixel failed validation: {e}"),
        })?);
    }
    Ok(CovarianceImage::new(height, width, looks, pixels)?)
}

/// JSON form of a covariance image; the text counterpart of PWIF.
#[derive(Debug, Serialize, Deserialize)]
pub struct ImageDoc {
    pub height: usize,
    pub width: usize,
    pub p: usize,
    pub looks: f64,
    /// Row-major pixels, each a full matrix document without the `p` field.
    pub pixels: Vec<PixelDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PixelDoc {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl ImageDoc {
    pub fn from_image(img: &CovarianceImage) -> Self {
        let p = img.dim();
        ImageDoc {
            height: img.height(),
            width: img.width(),
            p,
            looks: img.looks(),
            pixels: img
                .pixels()
                .iter()
                .map(|m| {
                    let doc = MatrixDoc::from_matrix(m);
                    PixelDoc {
                        re: doc.re,
                        im: doc.im,
                    }
                })
                .collect(),
        }
    }

    pub fn into_image(&self) -> FormatResult<CovarianceImage> {
        let pixels = self
            .pixels
            .iter()
            .map(|px| {
                MatrixDoc {
                    p: self.p,
                    re: px.re.clone(),
                    im: px.im.clone(),
                }
                .into_matrix()
            })
            .collect::<FormatResult<Vec<_>>>()?;
        Ok(CovarianceImage::new(self.height, self.width, self.looks, pixels)?)
    }
}

pub fn read_image_text(path: &Path) -> FormatResult<CovarianceImage> {
    let text = fs::read_to_string(path)?;
    let doc: ImageDoc = serde_json::from_str(&text).map_err(|e| FormatError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    doc.into_image()
}

pub fn write_image_text(path: &Path, img: &CovarianceImage) -> FormatResult<()> {
    let doc = ImageDoc::from_image(img);
    fs::write(path, serde_json::to_string(&doc).expect("serializable") + "\n")?;
    Ok(())
}

/// Writes a label map as a plain-text (P2) PGM raster with `maxval` equal to
/// the largest label (at least 1).
pub fn write_labels_pgm(
    path: &Path,
    labels: &[usize],
    height: usize,
    width: usize,
) -> FormatResult<()> {
    assert_eq!(labels.len(), height * width);
    let maxval = labels.iter().copied().max().unwrap_or(0).max(1);
    let mut out = String::new();
    out.push_str(&format!("P2\n{width} {height}\n{maxval}\n"));
    for row in 0..height {
        let line: Vec<String> = (0..width)
            .map(|col| labels[row * width + col].to_string())
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a label map as `row,col,label` CSV with a header line.
pub fn write_labels_csv(
    path: &Path,
    labels: &[usize],
    height: usize,
    width: usize,
) -> FormatResult<()> {
    assert_eq!(labels.len(), height * width);
    let mut out = String::from("row,col,label\n");
    for row in 0..height {
        for col in 0..width {
            out.push_str(&format!("{row},{col},{}\n", labels[row * width + col]));
        }
    }
    fs::write(path, out)?;
    Ok(())
}
