use crate::error::{Error, Result};
use crate::field::{RealGrid, DB_FLOOR};

/// Side length of the training images.
pub const IMAGE_SIDE: usize = 100;
/// Upsampling factor from the probe grid to the intermediate raster.
pub const RENDER_FACTOR: usize = 10;
/// Gaussian anti-aliasing width per unit of decimation factor.
pub const SIGMA_PER_FACTOR: f64 = 0.4;
/// Kernel truncation radius in standard deviations.
pub const KERNEL_SIGMAS: f64 = 4.0;

/// Maps a dB map onto `[0, 1]` intensity (`-60 dB → 0`, `0 dB → 1`) and
/// bilinearly upsamples it by [`RENDER_FACTOR`].
///
/// Probe `i` lands exactly on output pixel `i·f + f/2` (integer division),
/// so every probe value appears unchanged in the raster.
pub fn render_grayscale(db_map: &RealGrid) -> Result<RealGrid> {
    for &v in &db_map.values {
        if !(DB_FLOOR..=0.0).contains(&v) {
            return Err(Error::OutOfRange { value: v, min: DB_FLOOR, max: 0.0 });
        }
    }
    let intensity: Vec<f64> = db_map.values.iter().map(|v| (v - DB_FLOOR) / -DB_FLOOR).collect();
    let intensity = RealGrid::new(db_map.rows, db_map.cols, intensity);
    Ok(upsample_bilinear(&intensity, RENDER_FACTOR))
}

pub fn upsample_bilinear(src: &RealGrid, factor: usize) -> RealGrid {
    let (rows, cols) = (src.rows * factor, src.cols * factor);
    let offset = (factor / 2) as f64;
    let coord = |p: usize, n: usize| ((p as f64 - offset) / factor as f64).clamp(0.0, (n - 1) as f64);
    let mut out = RealGrid::filled(rows, cols, 0.0);
    for r in 0..rows {
        let u = coord(r, src.rows);
        for c in 0..cols {
            let v = coord(c, src.cols);
            out.set(r, c, bilinear(src, u, v));
        }
    }
    out
}

/// Bilinear sample at fractional `(row, col)`, clamped to the grid.
pub fn bilinear(src: &RealGrid, u: f64, v: f64) -> f64 {
    let u = u.clamp(0.0, (src.rows - 1) as f64);
    let v = v.clamp(0.0, (src.cols - 1) as f64);
    let (r0, c0) = (u.floor() as usize, v.floor() as usize);
    let (r1, c1) = ((r0 + 1).min(src.rows - 1), (c0 + 1).min(src.cols - 1));
    let (fu, fv) = (u - r0 as f64, v - c0 as f64);
    let top = src.get(r0, c0) * (1.0 - fv) + src.get(r0, c1) * fv;
    let bottom = src.get(r1, c0) * (1.0 - fv) + src.get(r1, c1) * fv;
    top * (1.0 - fu) + bottom * fu
}

/// Blur-then-decimate from the 300×300 render to the 100×100 training
/// image.
pub fn downsample_antialiased(image: &RealGrid) -> RealGrid {
    resize_antialiased(image, IMAGE_SIDE, IMAGE_SIDE)
}

/// Resizes to `rows × cols`. When shrinking along an axis by factor `f`,
/// the image is first blurred with a Gaussian of `σ = 0.4·f` (truncated at
/// 4σ, renormalized at borders), then sampled at the output block centers
/// `(q + ½)·f − ½`. Equal sizes pass through untouched.
pub fn resize_antialiased(image: &RealGrid, rows: usize, cols: usize) -> RealGrid {
    if image.rows == rows && image.cols == cols {
        return image.clone();
    }
    let fr = image.rows as f64 / rows as f64;
    let fc = image.cols as f64 / cols as f64;
    let sigma = |f: f64| if f > 1.0 { SIGMA_PER_FACTOR * f } else { 0.0 };
    let blurred = gaussian_blur(image, sigma(fr), sigma(fc));
    let mut out = RealGrid::filled(rows, cols, 0.0);
    for q in 0..rows {
        let u = (q as f64 + 0.5) * fr - 0.5;
        for p in 0..cols {
            let v = (p as f64 + 0.5) * fc - 0.5;
            out.set(q, p, bilinear(&blurred, u, v).clamp(0.0, 1.0));
        }
    }
    out
}

/// Truncated Gaussian weights for offsets `-radius..=radius`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (KERNEL_SIGMAS * sigma).ceil() as i64;
    (-radius..=radius).map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp()).collect()
}

/// Separable Gaussian blur; at the borders the truncated kernel is
/// renormalized over in-range taps.
pub fn gaussian_blur(image: &RealGrid, sigma_rows: f64, sigma_cols: f64) -> RealGrid {
    let horizontal = convolve_axis(image, &gaussian_kernel(sigma_cols), false);
    convolve_axis(&horizontal, &gaussian_kernel(sigma_rows), true)
}

fn convolve_axis(image: &RealGrid, kernel: &[f64], along_rows: bool) -> RealGrid {
    if kernel.len() == 1 {
        return image.clone();
    }
    let radius = (kernel.len() / 2) as i64;
    let mut out = RealGrid::filled(image.rows, image.cols, 0.0);
    let (outer, inner) = if along_rows { (image.cols, image.rows) } else { (image.rows, image.cols) };
    for a in 0..outer {
        for b in 0..inner {
            let mut acc = 0.0;
            let mut norm = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                let t = b as i64 + k as i64 - radius;
                if t < 0 || t >= inner as i64 {
                    continue;
                }
                let t = t as usize;
                let value = if along_rows { image.get(t, a) } else { image.get(a, t) };
                acc += w * value;
                norm += w;
            }
            let value = acc / norm;
            if along_rows {
                out.set(b, a, value);
            } else {
                out.set(a, b, value);
            }
        }
    }
    out
}
