//! Conventional 2-D Richardson-Lucy on a single view.
//!
//! The comparison arm for the light-field method: a linear motion kernel of
//! a chosen pixel length and direction, applied to one image with the
//! classical multiplicative update
//!
//! ```text
//! I_next = I * Aᵀ(B / A I) / Aᵀ1
//! ```
//!
//! where `A` is replicate-boundary convolution with the kernel and `Aᵀ` its
//! exact adjoint (in the interior this is plain correlation; at the edges it
//! scatters clamped taps back where they came from, and the `Aᵀ1` factor
//! renormalizes the surplus). Using the exact adjoint keeps the Poisson
//! likelihood non-decreasing all the way to the border. A single kernel
//! length can only match one scene depth, which is exactly the weakness the
//! 4-D method is measured against.

use crate::error::{Error, Result};
use crate::lightfield::Image;

/// Dense 2-D convolution kernel with odd side lengths, centered on its
/// middle tap. Taps are nonnegative and sum to 1.
#[derive(Debug, Clone)]
pub struct Kernel2D {
    /// Tap count is `(2*half_u + 1) * (2*half_v + 1)`, row-major in `(u, v)`.
    half_u: usize,
    half_v: usize,
    taps: Vec<f64>,
}

impl Kernel2D {
    /// Rasterizes a line segment of `length_px` pixels through the origin at
    /// `angle` radians (measured from the +u axis toward +v) into a box
    /// kernel with anti-aliased endpoints: the segment is sampled at
    /// midpoints, each sample deposited on its nearest pixel, and the taps
    /// normalized to sum 1. A tap's weight is thus the fraction of the
    /// segment crossing that pixel's cell, so an integer-length axis-aligned
    /// kernel gives exact equal weights and fractional lengths taper at the
    /// two ends. `length_px = 0` yields the identity (single center tap).
    pub fn linear(length_px: f64, angle: f64) -> Result<Self> {
        if !(length_px.is_finite() && length_px >= 0.0) {
            return Err(Error::config("kernel length must be finite and >= 0"));
        }
        if !angle.is_finite() {
            return Err(Error::config("kernel angle must be finite"));
        }
        let (du, dv) = (angle.cos(), angle.sin());
        let half = length_px / 2.0;
        let half_u = (half * du.abs() + 0.5).ceil() as usize;
        let half_v = (half * dv.abs() + 0.5).ceil() as usize;
        let (wu, wv) = (2 * half_u + 1, 2 * half_v + 1);
        let mut taps = vec![0.0f64; wu * wv];
        // Midpoint samples keep the tap pattern symmetric under 180°
        // rotation, so the reversed kernel equals the forward one. 16
        // samples per pixel of length make the cell fractions exact for
        // integer lengths (cell boundaries land between samples).
        let samples = (length_px * 16.0).ceil().max(1.0) as usize;
        for j in 0..samples {
            let x = -half + length_px * (j as f64 + 0.5) / samples as f64;
            let iu = ((x * du).round() as i64 + half_u as i64) as usize;
            let iv = ((x * dv).round() as i64 + half_v as i64) as usize;
            taps[iu * wv + iv] += 1.0;
        }
        let total: f64 = taps.iter().sum();
        for t in &mut taps {
            *t /= total;
        }
        Ok(Kernel2D { half_u, half_v, taps })
    }

    /// 180°-rotated kernel (the adjoint for correlation-free RL updates).
    pub fn reversed(&self) -> Self {
        let mut taps = self.taps.clone();
        taps.reverse();
        Kernel2D { half_u: self.half_u, half_v: self.half_v, taps }
    }

    pub fn tap_sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    fn tap(&self, ou: i64, ov: i64) -> f64 {
        let iu = (ou + self.half_u as i64) as usize;
        let iv = (ov + self.half_v as i64) as usize;
        self.taps[iu * (2 * self.half_v + 1) + iv]
    }
}

/// Convolution with replicate (clamp-to-edge) boundary handling:
/// `out(p) = Σ_d k(d) · img(clamp(p − d))`.
pub fn convolve(img: &Image, kernel: &Kernel2D) -> Image {
    let (nu, nv, nc) = (img.nu, img.nv, img.nc);
    let mut out = Image::constant(nu, nv, nc, 0.0);
    let hu = kernel.half_u as i64;
    let hv = kernel.half_v as i64;
    for iu in 0..nu {
        for iv in 0..nv {
            for c in 0..nc {
                let mut acc = 0.0f64;
                for ou in -hu..=hu {
                    for ov in -hv..=hv {
                        let w = kernel.tap(ou, ov);
                        if w == 0.0 {
                            continue;
                        }
                        let su = (iu as i64 - ou).clamp(0, nu as i64 - 1) as usize;
                        let sv = (iv as i64 - ov).clamp(0, nv as i64 - 1) as usize;
                        acc += w * img.get(su, sv, c) as f64;
                    }
                }
                out.set(iu, iv, c, acc as f32);
            }
        }
    }
    out
}

/// Exact adjoint of [`convolve`]: each clamped tap scatters its weight back
/// to the source pixel it read, so `⟨convolve(x), r⟩ = ⟨x, adjoint(r)⟩`
/// holds including the replicated border. In the interior this reduces to
/// plain correlation with the kernel.
pub fn adjoint_convolve(img: &Image, kernel: &Kernel2D) -> Image {
    let (nu, nv, nc) = (img.nu, img.nv, img.nc);
    let mut acc = vec![0.0f64; nu * nv * nc];
    let hu = kernel.half_u as i64;
    let hv = kernel.half_v as i64;
    for iu in 0..nu {
        for iv in 0..nv {
            for ou in -hu..=hu {
                for ov in -hv..=hv {
                    let w = kernel.tap(ou, ov);
                    if w == 0.0 {
                        continue;
                    }
                    let su = (iu as i64 - ou).clamp(0, nu as i64 - 1) as usize;
                    let sv = (iv as i64 - ov).clamp(0, nv as i64 - 1) as usize;
                    for c in 0..nc {
                        acc[(su * nv + sv) * nc + c] += w * img.get(iu, iv, c) as f64;
                    }
                }
            }
        }
    }
    let mut out = Image::constant(nu, nv, nc, 0.0);
    for (o, &a) in out.data.iter_mut().zip(&acc) {
        *o = a as f32;
    }
    out
}

/// Classical Richardson-Lucy deconvolution of a single image, using the
/// exact adjoint and its sensitivity `Aᵀ1` so the Poisson likelihood of the
/// observation is non-decreasing even at the replicated border. The blurred
/// model is floored at 1e-12 before division; the output stays nonnegative
/// for nonnegative input.
pub fn rl2d(observed: &Image, kernel: &Kernel2D, iterations: usize) -> Image {
    let (nu, nv, nc) = (observed.nu, observed.nv, observed.nc);
    let sensitivity = adjoint_convolve(&Image::constant(nu, nv, nc, 1.0), kernel);
    let mut iterate = observed.clone();
    for _ in 0..iterations {
        let model = convolve(&iterate, kernel);
        let mut ratio = Image::constant(nu, nv, nc, 0.0);
        for (r, (&b, &m)) in ratio
            .data
            .iter_mut()
            .zip(observed.data.iter().zip(&model.data))
        {
            *r = (b as f64 / (m as f64).max(1e-12)) as f32;
        }
        let corr = adjoint_convolve(&ratio, kernel);
        for (x, (&c, &s)) in iterate
            .data
            .iter_mut()
            .zip(corr.data.iter().zip(&sensitivity.data))
        {
            *x = (*x as f64 * c as f64 / s as f64) as f32;
        }
    }
    iterate
}
