//! Dense 4-D light-field container with absolute two-plane parameterization.
//!
//! A sample `L(s, t, u, v, c)` is the intensity of the ray passing through
//! `(s, t, 0)` on the camera plane and `(u, v, D)` on the image plane, both in
//! metric units of the reference frame. Index axes map to metric coordinates
//! through [`Intrinsics`]:
//!
//!   s = offset_st + is * pitch_st        (identically for t)
//!   u = offset_uv + iu * pitch_uv        (identically for v)
//!
//! Storage is row-major with `s` slowest and channel fastest:
//! `(((is*Nt + it)*Nu + iu)*Nv + iv)*Nc + c`. Intensities are linear,
//! nominally in `[0, 1]`; values above 1 are legal (metrics flag them) but
//! must be finite and non-negative.

mod io;
mod mosaic;

pub use io::{read_lf, write_lf};
pub use mosaic::{export_mosaic, import_mosaic, read_image_png, write_image_png};

use crate::error::{Error, Result};
use crate::geometry::Ray;

/// Grid extents `(Ns, Nt, Nu, Nv, Nc)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub ns: usize,
    pub nt: usize,
    pub nu: usize,
    pub nv: usize,
    pub nc: usize,
}

impl Dims {
    pub fn new(ns: usize, nt: usize, nu: usize, nv: usize, nc: usize) -> Self {
        Dims { ns, nt, nu, nv, nc }
    }

    /// Total sample count including channels.
    pub fn len(&self) -> usize {
        self.ns * self.nt * self.nu * self.nv * self.nc
    }

    /// Ray count (samples per channel).
    pub fn rays(&self) -> usize {
        self.ns * self.nt * self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear index of `(is, it, iu, iv, c)`.
    #[inline(always)]
    pub fn idx(&self, is: usize, it: usize, iu: usize, iv: usize, c: usize) -> usize {
        ((((is * self.nt) + it) * self.nu + iu) * self.nv + iv) * self.nc + c
    }

    /// Linear ray index of `(is, it, iu, iv)` — channel-free, used by masks.
    #[inline(always)]
    pub fn ray_idx(&self, is: usize, it: usize, iu: usize, iv: usize) -> usize {
        ((is * self.nt + it) * self.nu + iu) * self.nv + iv
    }

    /// Inverse of [`Dims::ray_idx`].
    #[inline(always)]
    pub fn ray_coords(&self, ray: usize) -> (usize, usize, usize, usize) {
        let iv = ray % self.nv;
        let rest = ray / self.nv;
        let iu = rest % self.nu;
        let rest = rest / self.nu;
        (rest / self.nt, rest % self.nt, iu, iv)
    }

    fn validate(&self) -> Result<()> {
        if self.ns == 0 || self.nt == 0 || self.nu == 0 || self.nv == 0 || self.nc == 0 {
            return Err(Error::config("all light-field dimensions must be at least 1"));
        }
        Ok(())
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}x{}x{}", self.ns, self.nt, self.nu, self.nv, self.nc)
    }
}

/// Two-plane sampling geometry: plane separation `D`, grid pitches, and the
/// metric coordinate of index 0 on each plane pair (one offset shared by s
/// and t, another shared by u and v).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub plane_sep: f64,
    pub pitch_st: f64,
    pub pitch_uv: f64,
    pub offset_st: f64,
    pub offset_uv: f64,
}

impl Intrinsics {
    pub fn new(
        plane_sep: f64,
        pitch_st: f64,
        pitch_uv: f64,
        offset_st: f64,
        offset_uv: f64,
    ) -> Result<Self> {
        let intr = Intrinsics { plane_sep, pitch_st, pitch_uv, offset_st, offset_uv };
        intr.validate()?;
        Ok(intr)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.plane_sep.is_finite() && self.plane_sep > 0.0) {
            return Err(Error::config("plane separation must be finite and > 0"));
        }
        if !(self.pitch_st.is_finite() && self.pitch_st > 0.0)
            || !(self.pitch_uv.is_finite() && self.pitch_uv > 0.0)
        {
            return Err(Error::config("grid pitches must be finite and > 0"));
        }
        if !self.offset_st.is_finite() || !self.offset_uv.is_finite() {
            return Err(Error::config("grid offsets must be finite"));
        }
        Ok(())
    }

    /// Metric ray of a (possibly fractional) 4-D grid index, as its two
    /// plane intersection points.
    pub fn index_to_ray(&self, idx: [f64; 4]) -> Ray {
        Ray::new(
            [
                self.offset_st + idx[0] * self.pitch_st,
                self.offset_st + idx[1] * self.pitch_st,
                0.0,
            ],
            [
                self.offset_uv + idx[2] * self.pitch_uv,
                self.offset_uv + idx[3] * self.pitch_uv,
                self.plane_sep,
            ],
        )
    }

    /// Fractional grid index of an arbitrary two-point ray.
    ///
    /// The ray is treated as an infinite line and intersected with both
    /// parameterization planes; rays parallel to the planes are degenerate.
    pub fn ray_to_index(&self, ray: &Ray) -> Result<[f64; 4]> {
        let a = ray.p0;
        let d = ray.dir();
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if d[2].abs() < 1e-12 * norm || norm == 0.0 {
            return Err(Error::DegenerateRay);
        }
        let l0 = -a[2] / d[2];
        let l1 = (self.plane_sep - a[2]) / d[2];
        let s = a[0] + l0 * d[0];
        let t = a[1] + l0 * d[1];
        let u = a[0] + l1 * d[0];
        let v = a[1] + l1 * d[1];
        Ok([
            (s - self.offset_st) / self.pitch_st,
            (t - self.offset_st) / self.pitch_st,
            (u - self.offset_uv) / self.pitch_uv,
            (v - self.offset_uv) / self.pitch_uv,
        ])
    }
}

/// Per-ray boolean validity grid (one flag per `(s,t,u,v)` ray, shared by all
/// channels).
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityMask {
    dims: Dims,
    data: Vec<bool>,
}

impl ValidityMask {
    pub fn all_true(dims: Dims) -> Self {
        ValidityMask { dims, data: vec![true; dims.rays()] }
    }

    pub fn all_false(dims: Dims) -> Self {
        ValidityMask { dims, data: vec![false; dims.rays()] }
    }

    pub fn from_vec(dims: Dims, data: Vec<bool>) -> Result<Self> {
        if data.len() != dims.rays() {
            return Err(Error::config(format!(
                "mask length {} does not match ray count {}",
                data.len(),
                dims.rays()
            )));
        }
        Ok(ValidityMask { dims, data })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline(always)]
    pub fn get(&self, is: usize, it: usize, iu: usize, iv: usize) -> bool {
        self.data[self.dims.ray_idx(is, it, iu, iv)]
    }

    #[inline(always)]
    pub fn get_ray(&self, ray: usize) -> bool {
        self.data[ray]
    }

    pub fn set(&mut self, is: usize, it: usize, iu: usize, iv: usize, value: bool) {
        let i = self.dims.ray_idx(is, it, iu, iv);
        self.data[i] = value;
    }

    /// Ray count covered by the mask.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    /// Logical AND with another mask of the same shape.
    pub fn and(&self, other: &ValidityMask) -> Result<ValidityMask> {
        if self.dims != other.dims {
            return Err(Error::config("mask shape mismatch"));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a && b)
            .collect();
        Ok(ValidityMask { dims: self.dims, data })
    }
}

/// Plain 2-D image (one sub-aperture view): `Nu` rows, `Nv` columns, channel
/// fastest — the natural slice of a light field at fixed `(s, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub nu: usize,
    pub nv: usize,
    pub nc: usize,
    pub data: Vec<f32>,
}

impl Image {
    pub fn new(nu: usize, nv: usize, nc: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != nu * nv * nc {
            return Err(Error::config("image data length does not match dimensions"));
        }
        Ok(Image { nu, nv, nc, data })
    }

    pub fn constant(nu: usize, nv: usize, nc: usize, value: f32) -> Self {
        Image { nu, nv, nc, data: vec![value; nu * nv * nc] }
    }

    #[inline(always)]
    pub fn idx(&self, iu: usize, iv: usize, c: usize) -> usize {
        (iu * self.nv + iv) * self.nc + c
    }

    #[inline(always)]
    pub fn get(&self, iu: usize, iv: usize, c: usize) -> f32 {
        self.data[self.idx(iu, iv, c)]
    }

    pub fn set(&mut self, iu: usize, iv: usize, c: usize, value: f32) {
        let i = self.idx(iu, iv, c);
        self.data[i] = value;
    }
}

/// Dense light field: dimensions, sampling geometry, and the sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LightField {
    dims: Dims,
    intrinsics: Intrinsics,
    data: Vec<f32>,
}

impl LightField {
    /// Build from raw samples, validating shape, finiteness, and sign.
    pub fn new(dims: Dims, intrinsics: Intrinsics, data: Vec<f32>) -> Result<Self> {
        dims.validate()?;
        intrinsics.validate()?;
        if data.len() != dims.len() {
            return Err(Error::config(format!(
                "data length {} does not match dims {} ({} samples)",
                data.len(),
                dims,
                dims.len()
            )));
        }
        if let Some(bad) = data.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::config(format!(
                "intensities must be finite and non-negative, found {bad}"
            )));
        }
        Ok(LightField { dims, intrinsics, data })
    }

    pub fn constant(dims: Dims, intrinsics: Intrinsics, value: f32) -> Result<Self> {
        LightField::new(dims, intrinsics, vec![value; dims.len()])
    }

    /// Build by evaluating `f(is, it, iu, iv, c)` at every sample.
    pub fn from_fn(
        dims: Dims,
        intrinsics: Intrinsics,
        f: impl Fn(usize, usize, usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.len());
        for is in 0..dims.ns {
            for it in 0..dims.nt {
                for iu in 0..dims.nu {
                    for iv in 0..dims.nv {
                        for c in 0..dims.nc {
                            data.push(f(is, it, iu, iv, c));
                        }
                    }
                }
            }
        }
        LightField::new(dims, intrinsics, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn intrinsics(&self) -> Intrinsics {
        self.intrinsics
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline(always)]
    pub fn get(&self, is: usize, it: usize, iu: usize, iv: usize, c: usize) -> f32 {
        self.data[self.dims.idx(is, it, iu, iv, c)]
    }

    pub fn set(&mut self, is: usize, it: usize, iu: usize, iv: usize, c: usize, value: f32) {
        let i = self.dims.idx(is, it, iu, iv, c);
        self.data[i] = value;
    }

    /// Copy of the sub-aperture view at `(is, it)`.
    pub fn view_image(&self, is: usize, it: usize) -> Image {
        let start = self.dims.idx(is, it, 0, 0, 0);
        let len = self.dims.nu * self.dims.nv * self.dims.nc;
        Image {
            nu: self.dims.nu,
            nv: self.dims.nv,
            nc: self.dims.nc,
            data: self.data[start..start + len].to_vec(),
        }
    }

    /// Aperture-center view indices `(⌊Ns/2⌋, ⌊Nt/2⌋)`.
    pub fn central_index(&self) -> (usize, usize) {
        (self.dims.ns / 2, self.dims.nt / 2)
    }

    /// The central sub-aperture view.
    pub fn central_view(&self) -> Image {
        let (is, it) = self.central_index();
        self.view_image(is, it)
    }

    /// Drop `k` views from every side of the aperture axes (s and t), keeping
    /// the metric coordinates of the surviving views unchanged.
    pub fn crop_aperture_border(&self, k: usize) -> Result<LightField> {
        if 2 * k >= self.dims.ns || 2 * k >= self.dims.nt {
            return Err(Error::config(format!(
                "crop border {k} leaves no views in a {} aperture",
                self.dims
            )));
        }
        let dims = Dims::new(
            self.dims.ns - 2 * k,
            self.dims.nt - 2 * k,
            self.dims.nu,
            self.dims.nv,
            self.dims.nc,
        );
        let intrinsics = Intrinsics {
            offset_st: self.intrinsics.offset_st + k as f64 * self.intrinsics.pitch_st,
            ..self.intrinsics
        };
        let view_len = self.dims.nu * self.dims.nv * self.dims.nc;
        let mut data = Vec::with_capacity(dims.len());
        for is in 0..dims.ns {
            for it in 0..dims.nt {
                let start = self.dims.idx(is + k, it + k, 0, 0, 0);
                data.extend_from_slice(&self.data[start..start + view_len]);
            }
        }
        LightField::new(dims, intrinsics, data)
    }

    /// Per-channel mean intensity, optionally restricted to rays where
    /// `select` is true.
    pub fn channel_means(&self, select: Option<&[bool]>) -> Vec<f64> {
        let nc = self.dims.nc;
        let mut sums = vec![0.0f64; nc];
        let mut count = 0usize;
        for (ray, chunk) in self.data.chunks_exact(nc).enumerate() {
            if select.map_or(true, |m| m[ray]) {
                for (c, &x) in chunk.iter().enumerate() {
                    sums[c] += x as f64;
                }
                count += 1;
            }
        }
        if count > 0 {
            for s in &mut sums {
                *s /= count as f64;
            }
        }
        sums
    }

    /// Largest absolute sample difference against another field of the same
    /// shape (test helper).
    pub fn max_abs_diff(&self, other: &LightField) -> f64 {
        assert_eq!(self.dims, other.dims, "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs() as f64)
            .fold(0.0, f64::max)
    }
}
