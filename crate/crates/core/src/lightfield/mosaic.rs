//! 16-bit PNG export/import: full-aperture mosaics and single views.
//!
//! A mosaic lays the `Ns x Nt` sub-aperture views out as a grid of
//! `Nu x Nv` tiles: view `(is, it)` occupies pixel rows
//! `[is*Nu, (is+1)*Nu)` and columns `[it*Nv, (it+1)*Nv)`. Intensities are
//! clamped to `[0, 1]` and quantized to 16 bits, so a round trip is exact to
//! within half a quantization step (1/131070). Only 1- and 3-channel fields
//! can be rasterized.

use std::path::Path;

use image::{ImageBuffer, Luma, Rgb};

use crate::error::{Error, Result};
use crate::lightfield::{Dims, Image, Intrinsics, LightField};

fn to_u16(x: f32) -> u16 {
    (x.clamp(0.0, 1.0) as f64 * 65535.0).round() as u16
}

fn from_u16(x: u16) -> f32 {
    (x as f64 / 65535.0) as f32
}

fn check_channels(nc: usize) -> Result<()> {
    if nc != 1 && nc != 3 {
        return Err(Error::config(format!(
            "PNG rasterization supports 1 or 3 channels, got {nc}"
        )));
    }
    Ok(())
}

/// Write all sub-aperture views as one 16-bit PNG grid.
pub fn export_mosaic(lf: &LightField, path: &Path) -> Result<()> {
    let d = lf.dims();
    check_channels(d.nc)?;
    let height = (d.ns * d.nu) as u32;
    let width = (d.nt * d.nv) as u32;
    let pixel = |row: u32, col: u32, c: usize| {
        let (row, col) = (row as usize, col as usize);
        let (is, iu) = (row / d.nu, row % d.nu);
        let (it, iv) = (col / d.nv, col % d.nv);
        to_u16(lf.get(is, it, iu, iv, c))
    };
    save_png(path, height, width, d.nc, pixel)
}

/// Read a mosaic back into a light field. The aperture shape `(ns, nt)`
/// cannot be recovered from pixels alone, so the caller supplies it along
/// with the sampling geometry.
pub fn import_mosaic(
    path: &Path,
    ns: usize,
    nt: usize,
    intrinsics: Intrinsics,
) -> Result<LightField> {
    if ns == 0 || nt == 0 {
        return Err(Error::config("aperture dimensions must be at least 1"));
    }
    let img = load_png16(path)?;
    let (height, width, nc, pixels) = img;
    if height % ns != 0 || width % nt != 0 {
        return Err(Error::format(format!(
            "mosaic {width}x{height} does not tile into {ns}x{nt} views"
        )));
    }
    let nu = height / ns;
    let nv = width / nt;
    let dims = Dims::new(ns, nt, nu, nv, nc);
    let mut data = vec![0f32; dims.len()];
    for row in 0..height {
        let (is, iu) = (row / nu, row % nu);
        for col in 0..width {
            let (it, iv) = (col / nv, col % nv);
            for c in 0..nc {
                data[dims.idx(is, it, iu, iv, c)] = from_u16(pixels[(row * width + col) * nc + c]);
            }
        }
    }
    LightField::new(dims, intrinsics, data)
}

/// Write a single 2-D view as a 16-bit PNG (`u` maps to rows, `v` to columns).
pub fn write_image_png(img: &Image, path: &Path) -> Result<()> {
    check_channels(img.nc)?;
    let pixel = |row: u32, col: u32, c: usize| to_u16(img.get(row as usize, col as usize, c));
    save_png(path, img.nu as u32, img.nv as u32, img.nc, pixel)
}

/// Read a 16-bit (or 8-bit, widened) PNG into an [`Image`] with intensities
/// in `[0, 1]`.
pub fn read_image_png(path: &Path) -> Result<Image> {
    let (height, width, nc, pixels) = load_png16(path)?;
    let data = pixels.iter().map(|&p| from_u16(p)).collect();
    Image::new(height, width, nc, data)
}

fn save_png(
    path: &Path,
    height: u32,
    width: u32,
    nc: usize,
    pixel: impl Fn(u32, u32, usize) -> u16,
) -> Result<()> {
    let encode_err = |e: image::ImageError| Error::Io(std::io::Error::other(e.to_string()));
    match nc {
        1 => {
            let img: ImageBuffer<Luma<u16>, Vec<u16>> =
                ImageBuffer::from_fn(width, height, |x, y| Luma([pixel(y, x, 0)]));
            img.save(path).map_err(encode_err)
        }
        3 => {
            let img: ImageBuffer<Rgb<u16>, Vec<u16>> = ImageBuffer::from_fn(width, height, |x, y| {
                Rgb([pixel(y, x, 0), pixel(y, x, 1), pixel(y, x, 2)])
            });
            img.save(path).map_err(encode_err)
        }
        _ => unreachable!("channel count validated by caller"),
    }
}

/// Returns (height, width, channels, row-major channel-fastest u16 pixels).
fn load_png16(path: &Path) -> Result<(usize, usize, usize, Vec<u16>)> {
    let dyn_img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::Io(io),
        other => Error::format(format!("unreadable image: {other}")),
    })?;
    match dyn_img {
        image::DynamicImage::ImageLuma16(img) => {
            let (w, h) = img.dimensions();
            Ok((h as usize, w as usize, 1, img.into_raw()))
        }
        image::DynamicImage::ImageRgb16(img) => {
            let (w, h) = img.dimensions();
            Ok((h as usize, w as usize, 3, img.into_raw()))
        }
        // 8-bit inputs are accepted and widened, mapping 255 -> 65535.
        image::DynamicImage::ImageLuma8(img) => {
            let (w, h) = img.dimensions();
            let px = img.into_raw().iter().map(|&b| b as u16 * 257).collect();
            Ok((h as usize, w as usize, 1, px))
        }
        image::DynamicImage::ImageRgb8(img) => {
            let (w, h) = img.dimensions();
            let px = img.into_raw().iter().map(|&b| b as u16 * 257).collect();
            Ok((h as usize, w as usize, 3, px))
        }
        other => Err(Error::format(format!(
            "unsupported pixel layout {:?}; expected 1- or 3-channel gray/rgb",
            other.color()
        ))),
    }
}
