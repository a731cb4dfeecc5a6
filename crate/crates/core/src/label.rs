//! Per-pixel instance labels read from annotation PNGs.
//!
//! Palette PNGs keep their raw indices (DAVIS-style multi-object annotations);
//! grayscale PNGs keep their sample value. Color PNGs collapse to a single
//! instance: any nonzero channel becomes label 255.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("label map dimensions must be positive"));
        }
        if data.len() != width * height {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: width * height,
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Sorted distinct nonzero labels; 0 is background.
    pub fn instance_ids(&self) -> Vec<u8> {
        let mut seen = [false; 256];
        for &v in &self.data {
            seen[v as usize] = true;
        }
        (1..=255u8).filter(|&v| seen[v as usize]).collect()
    }

    pub fn instance_mask(&self, id: u8) -> BinaryMask {
        let bits = self.data.iter().map(|&v| v == id).collect();
        BinaryMask::from_bits(self.width, self.height, bits)
            .expect("dims validated at construction")
    }

    pub fn nonzero_mask(&self) -> BinaryMask {
        let bits = self.data.iter().map(|&v| v > 0).collect();
        BinaryMask::from_bits(self.width, self.height, bits)
            .expect("dims validated at construction")
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let png_err = |e: png::DecodingError| Error::Png {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let mut decoder = png::Decoder::new(BufReader::new(file));
        decoder.set_transformations(png::Transformations::IDENTITY);
        let mut reader = decoder.read_info().map_err(png_err)?;
        let size = reader.output_buffer_size().ok_or_else(|| Error::Png {
            path: path.to_path_buf(),
            message: "image too large".into(),
        })?;
        let mut buf = vec![0u8; size];
        let info = reader.next_frame(&mut buf).map_err(png_err)?;
        let (w, h) = (info.width as usize, info.height as usize);
        let line = info.line_size;
        let bits = info.bit_depth as usize;

        let mut data = Vec::with_capacity(w * h);
        for row in buf.chunks(line).take(h) {
            match info.color_type {
                png::ColorType::Grayscale | png::ColorType::Indexed => {
                    if bits == 16 {
                        data.extend(row.chunks(2).take(w).map(|s| s[0]));
                    } else {
                        data.extend(unpack_row(row, bits, w));
                    }
                }
                png::ColorType::GrayscaleAlpha => {
                    let step = 2 * (bits / 8);
                    data.extend(row.chunks(step).take(w).map(|s| s[0]));
                }
                png::ColorType::Rgb | png::ColorType::Rgba => {
                    let channels = if info.color_type == png::ColorType::Rgb {
                        3
                    } else {
                        4
                    };
                    let step = channels * (bits / 8);
                    data.extend(row.chunks(step).take(w).map(|s| {
                        let color = &s[..3 * (bits / 8)];
                        if color.iter().any(|&c| c != 0) {
                            255
                        } else {
                            0
                        }
                    }));
                }
            }
        }
        Self::new(w, h, data)
    }

    /// Writes the labels as an 8-bit palette PNG using `palette` (RGB triples).
    pub fn save_indexed_png(&self, path: impl AsRef<Path>, palette: &[[u8; 3]]) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut encoder =
            png::Encoder::new(BufWriter::new(file), self.width as u32, self.height as u32);
        encoder.set_color(png::ColorType::Indexed);
        encoder.set_depth(png::BitDepth::Eight);
        let mut pal: Vec<u8> = palette.iter().flatten().copied().collect();
        let needed = (*self.data.iter().max().unwrap_or(&0) as usize + 1) * 3;
        if pal.len() < needed {
            pal.resize(needed, 0);
        }
        encoder.set_palette(pal);
        write_png(path, encoder, &self.data)
    }
}

fn unpack_row(row: &[u8], bits: usize, width: usize) -> Vec<u8> {
    if bits == 8 {
        return row[..width].to_vec();
    }
    let per_byte = 8 / bits;
    let mask = (1u8 << bits) - 1;
    (0..width)
        .map(|x| {
            let byte = row[x / per_byte];
            let shift = 8 - bits * (x % per_byte + 1);
            (byte >> shift) & mask
        })
        .collect()
}

fn write_png(path: &Path, encoder: png::Encoder<'_, BufWriter<File>>, data: &[u8]) -> Result<()> {
    let err = |e: png::EncodingError| Error::Png {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut writer = encoder.write_header().map_err(err)?;
    writer.write_image_data(data).map_err(err)?;
    writer.finish().map_err(err)
}

pub(crate) fn write_gray_png(path: &Path, width: usize, height: usize, data: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    write_png(path, encoder, data)
}
