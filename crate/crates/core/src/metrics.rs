//! Quality and fidelity metrics.
//!
//! The reconstruction-error scale is the db error `-20 log10(rmse)` between
//! two signals in the same [0, 1] radiance convention: higher is better and
//! identical signals score `+inf`. Patch statistics (edge energy, noise
//! standard deviation) quantify sharpening versus noise amplification on
//! hand-picked view regions, and the Poisson log-likelihood scores a blurred
//! model against the observation on the rays the forward model covers.

use crate::error::{Error, Result};
use crate::lightfield::{Image, LightField, ValidityMask};
use crate::render::BlurResult;

/// Rectangular pixel patch `[u0, u1) x [v0, v1)` inside view `(is, it)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchSpec {
    pub is: usize,
    pub it: usize,
    pub u0: usize,
    pub v0: usize,
    pub u1: usize,
    pub v1: usize,
}

impl PatchSpec {
    /// Parses `"is,it,u0,v0,u1,v1"`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(Error::config(format!(
                "patch must be 'is,it,u0,v0,u1,v1', got '{text}'"
            )));
        }
        let mut vals = [0usize; 6];
        for (slot, part) in vals.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| Error::config(format!("invalid patch component '{part}'")))?;
        }
        Ok(PatchSpec {
            is: vals[0],
            it: vals[1],
            u0: vals[2],
            v0: vals[3],
            u1: vals[4],
            v1: vals[5],
        })
    }

    fn validate(&self, lf: &LightField) -> Result<()> {
        let d = lf.dims();
        if self.is >= d.ns || self.it >= d.nt {
            return Err(Error::config(format!(
                "patch view ({}, {}) outside {}x{} aperture grid",
                self.is, self.it, d.ns, d.nt
            )));
        }
        if self.u0 >= self.u1 || self.v0 >= self.v1 || self.u1 > d.nu || self.v1 > d.nv {
            return Err(Error::config(format!(
                "patch pixels [{}, {}) x [{}, {}) invalid for a {}x{} view",
                self.u0, self.u1, self.v0, self.v1, d.nu, d.nv
            )));
        }
        Ok(())
    }
}

/// Root-mean-square error accumulated in f64 over an iterator of sample
/// pairs; `None` when the iterator is empty.
fn rmse(pairs: impl Iterator<Item = (f32, f32)>) -> Option<f64> {
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for (a, b) in pairs {
        let d = a as f64 - b as f64;
        sum += d * d;
        count += 1;
    }
    (count > 0).then(|| (sum / count as f64).sqrt())
}

fn db_from_rmse(rmse: f64) -> f64 {
    if rmse == 0.0 {
        f64::INFINITY
    } else {
        -20.0 * rmse.log10()
    }
}

/// db error between two equally shaped images, pooled over channels.
/// `select`, when given, holds one flag per pixel (length `nu * nv`) and
/// restricts the average to the flagged pixels.
pub fn db_error_images(test: &Image, truth: &Image, select: Option<&[bool]>) -> Result<f64> {
    if test.nu != truth.nu || test.nv != truth.nv || test.nc != truth.nc {
        return Err(Error::config(format!(
            "image shapes differ: {}x{}x{} vs {}x{}x{}",
            test.nu, test.nv, test.nc, truth.nu, truth.nv, truth.nc
        )));
    }
    if let Some(sel) = select {
        if sel.len() != test.nu * test.nv {
            return Err(Error::config(format!(
                "pixel selection holds {} flags for {} pixels",
                sel.len(),
                test.nu * test.nv
            )));
        }
    }
    let nc = test.nc;
    let pairs = test
        .data
        .iter()
        .zip(&truth.data)
        .enumerate()
        .filter(|(i, _)| select.map_or(true, |sel| sel[i / nc]))
        .map(|(_, (&a, &b))| (a, b));
    rmse(pairs)
        .map(db_from_rmse)
        .ok_or_else(|| Error::config("db error over an empty pixel selection"))
}

/// db error between two equally shaped light fields, pooled over all rays
/// and channels; `mask`, when given, restricts to its valid rays.
pub fn db_error_fields(
    test: &LightField,
    truth: &LightField,
    mask: Option<&ValidityMask>,
) -> Result<f64> {
    let dims = test.dims();
    if truth.dims() != dims {
        return Err(Error::config(format!(
            "field dims differ: {} vs {}",
            dims,
            truth.dims()
        )));
    }
    if let Some(m) = mask {
        if m.len() != dims.rays() {
            return Err(Error::config(format!(
                "mask covers {} rays but the field has {}",
                m.len(),
                dims.rays()
            )));
        }
    }
    let nc = dims.nc;
    let pairs = test
        .data()
        .iter()
        .zip(truth.data())
        .enumerate()
        .filter(|(i, _)| mask.map_or(true, |m| m.get_ray(i / nc)))
        .map(|(_, (&a, &b))| (a, b));
    rmse(pairs)
        .map(db_from_rmse)
        .ok_or_else(|| Error::config("db error over an empty ray selection"))
}

/// db error restricted to one pixel patch of one view.
pub fn db_error_patch(test: &LightField, truth: &LightField, patch: &PatchSpec) -> Result<f64> {
    if truth.dims() != test.dims() {
        return Err(Error::config(format!(
            "field dims differ: {} vs {}",
            test.dims(),
            truth.dims()
        )));
    }
    patch.validate(test)?;
    let pairs = patch_samples(test, patch)
        .into_iter()
        .zip(patch_samples(truth, patch))
        .collect::<Vec<_>>();
    rmse(pairs.into_iter())
        .map(db_from_rmse)
        .ok_or_else(|| Error::config("db error over an empty patch"))
}

fn patch_samples(lf: &LightField, patch: &PatchSpec) -> Vec<f32> {
    let d = lf.dims();
    let mut out = Vec::with_capacity((patch.u1 - patch.u0) * (patch.v1 - patch.v0) * d.nc);
    for iu in patch.u0..patch.u1 {
        for iv in patch.v0..patch.v1 {
            for c in 0..d.nc {
                out.push(lf.get(patch.is, patch.it, iu, iv, c));
            }
        }
    }
    out
}

/// Mean squared first difference along the `u` axis inside a patch — a
/// proxy for edge sharpness. Needs at least two rows of pixels.
pub fn edge_energy(lf: &LightField, patch: &PatchSpec) -> Result<f64> {
    patch.validate(lf)?;
    if patch.u1 - patch.u0 < 2 {
        return Err(Error::config("edge energy needs a patch at least 2 pixels tall"));
    }
    let d = lf.dims();
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for iu in patch.u0..patch.u1 - 1 {
        for iv in patch.v0..patch.v1 {
            for c in 0..d.nc {
                let step = lf.get(patch.is, patch.it, iu + 1, iv, c) as f64
                    - lf.get(patch.is, patch.it, iu, iv, c) as f64;
                sum += step * step;
                count += 1;
            }
        }
    }
    Ok(sum / count as f64)
}

/// Population standard deviation of the samples inside a patch, channels
/// pooled — a noise level estimate on patches that are flat in the clean
/// signal.
pub fn noise_std(lf: &LightField, patch: &PatchSpec) -> Result<f64> {
    patch.validate(lf)?;
    let samples = patch_samples(lf, patch);
    let n = samples.len() as f64;
    let mean = samples.iter().map(|&x| x as f64).sum::<f64>() / n;
    let var = samples
        .iter()
        .map(|&x| {
            let d = x as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    Ok(var.sqrt())
}

/// Poisson log-likelihood of `observed` under a blurred `model`, up to the
/// observation-only constant: `sum b * ln(max(m, 1e-12)) - m` over the
/// channels of every ray the model's mask marks valid, accumulated in f64.
pub fn poisson_loglik(observed: &LightField, model: &BlurResult) -> Result<f64> {
    let dims = observed.dims();
    if model.lf.dims() != dims {
        return Err(Error::config(format!(
            "model dims {} do not match observation dims {}",
            model.lf.dims(),
            dims
        )));
    }
    let nc = dims.nc;
    let mut sum = 0.0f64;
    for ray in 0..dims.rays() {
        if !model.mask.get_ray(ray) {
            continue;
        }
        for c in 0..nc {
            let i = ray * nc + c;
            let b = observed.data()[i] as f64;
            let m = model.lf.data()[i] as f64;
            sum += b * m.max(1e-12).ln() - m;
        }
    }
    Ok(sum)
}
