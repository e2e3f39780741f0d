use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::RealGrid;

/// Writes a `[0, 1]` raster as 8-bit grayscale.
pub fn write_png8(path: &Path, image: &RealGrid) -> Result<()> {
    let data: Vec<u8> =
        image.values.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
    encode(path, image, png::BitDepth::Eight, &data)
}

/// Writes a `[0, 1]` raster as 16-bit grayscale.
pub fn write_png16(path: &Path, image: &RealGrid) -> Result<()> {
    let data: Vec<u8> = image
        .values
        .iter()
        .flat_map(|v| ((v.clamp(0.0, 1.0) * 65535.0).round() as u16).to_be_bytes())
        .collect();
    encode(path, image, png::BitDepth::Sixteen, &data)
}

fn encode(path: &Path, image: &RealGrid, depth: png::BitDepth, data: &[u8]) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    let mut encoder = png::Encoder::new(file, image.cols as u32, image.rows as u32);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(depth);
    let mut writer = encoder.write_header().map_err(|e| Error::format(path, e.to_string()))?;
    writer.write_image_data(data).map_err(|e| Error::format(path, e.to_string()))?;
    writer.finish().map_err(|e| Error::format(path, e.to_string()))?;
    Ok(())
}

/// Decodes a PNG into `[0, 1]` intensities. Color images are reduced to
/// luma; alpha is ignored; samples are divided by the bit depth's maximum.
pub fn read_png_gray(path: &Path) -> Result<RealGrid> {
    let bad = |why: String| Error::format(path, why);
    let decoder = png::Decoder::new(std::io::BufReader::new(File::open(path)?));
    let mut reader = decoder.read_info().map_err(|e| bad(e.to_string()))?;
    let mut buf = vec![0; reader.output_buffer_size().ok_or_else(|| bad("image too large".into()))?];
    let info = reader.next_frame(&mut buf).map_err(|e| bad(e.to_string()))?;
    let (w, h) = (info.width as usize, info.height as usize);
    if w == 0 || h == 0 {
        return Err(bad("empty raster".into()));
    }
    let bytes = &buf[..info.buffer_size()];
    let (bits, max) = match info.bit_depth {
        png::BitDepth::Eight => (8, 255.0),
        png::BitDepth::Sixteen => (16, 65535.0),
        other => return Err(bad(format!("unsupported bit depth {other:?}"))),
    };
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => return Err(bad("indexed color is not supported".into())),
    };
    let sample = |i: usize| -> f64 {
        if bits == 8 {
            bytes[i] as f64 / max
        } else {
            u16::from_be_bytes([bytes[2 * i], bytes[2 * i + 1]]) as f64 / max
        }
    };
    let row_samples = info.line_size / (bits / 8);
    let mut values = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            let base = r * row_samples + c * channels;
            let v = if channels >= 3 {
                0.299 * sample(base) + 0.587 * sample(base + 1) + 0.114 * sample(base + 2)
            } else {
                sample(base)
            };
            values.push(v);
        }
    }
    Ok(RealGrid::new(h, w, values))
}

/// Tiles equally sized images into a grid with one-pixel separators.
pub fn tile_gallery(images: &[RealGrid], columns: usize) -> RealGrid {
    if images.is_empty() {
        return RealGrid::filled(1, 1, 0.0);
    }
    let (h, w) = (images[0].rows, images[0].cols);
    let rows = images.len().div_ceil(columns);
    let gap = 1;
    let mut out = RealGrid::filled(rows * (h + gap) - gap, columns * (w + gap) - gap, 1.0);
    for (k, img) in images.iter().enumerate() {
        let (tr, tc) = (k / columns, k % columns);
        for r in 0..h {
            for c in 0..w {
                out.set(tr * (h + gap) + r, tc * (w + gap) + c, img.get(r, c));
            }
        }
    }
    out
}
