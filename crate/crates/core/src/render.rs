//! Light-field rendering: quadrilinear resampling along rigid camera poses
//! and blur as the average over a pose trajectory.
//!
//! The forward blur model is purely geometric — no depth estimation, no
//! per-pixel kernels. For every output ray we chase its metric line through
//! each trajectory pose back into the reference light field and average the
//! quadrilinearly interpolated samples. Rays that leave the sampled volume
//! are tracked by a validity mask instead of being invented: a single view
//! sample survives partial out-of-bounds support while at least half of its
//! interpolation weight remains in-bounds (the surviving corners are
//! renormalized); a blurred ray stays valid while at least a coverage
//! fraction of its views survive.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{transform_ray, Pose, Trajectory};
use crate::lightfield::{LightField, ValidityMask};

/// Fraction of interpolation weight that must be in-bounds for a single
/// resampled ray to count as valid.
const MIN_INBOUNDS_WEIGHT: f64 = 0.5;

/// Default fraction of trajectory views that must be valid for a blurred ray
/// to stay valid.
pub const DEFAULT_COVERAGE_THRESHOLD: f64 = 0.5;

/// Blur (or resample) output: intensities, per-ray validity, and the
/// fraction of trajectory views that contributed to each ray.
///
/// Masked rays keep whatever partial average was accumulated (zero when no
/// view contributed) so they can be inspected, but consumers must respect
/// the mask.
#[derive(Debug, Clone)]
pub struct BlurResult {
    pub lf: LightField,
    pub mask: ValidityMask,
    /// Per-ray contributing-view fraction `count / N` in `[0, 1]`.
    pub weight: Vec<f32>,
}

/// Interpolate the light field at a fractional 4-D index.
///
/// Writes one intensity per channel into `out` and returns the validity
/// flag. The 16 surrounding grid samples are combined with separable linear
/// weights; out-of-bounds corners contribute nothing, and the in-bounds
/// remainder is renormalized when it holds at least half the total weight.
/// Below that the sample is invalid: `out` is zeroed and `false` returned.
pub fn sample_quadrilinear(lf: &LightField, idx: [f64; 4], out: &mut [f64]) -> bool {
    let dims = lf.dims();
    let nc = dims.nc;
    assert_eq!(out.len(), nc, "output buffer must hold one value per channel");

    let extents = [dims.ns, dims.nt, dims.nu, dims.nv];
    let mut base = [0isize; 4];
    let mut frac = [0f64; 4];
    for a in 0..4 {
        let f = idx[a].floor();
        base[a] = f as isize;
        frac[a] = idx[a] - f;
    }

    out.fill(0.0);
    let mut w_in = 0.0f64;
    let data = lf.data();
    for corner in 0..16usize {
        let mut w = 1.0f64;
        let mut flat = 0usize;
        let mut inside = true;
        for a in 0..4 {
            let hi = (corner >> a) & 1;
            w *= if hi == 1 { frac[a] } else { 1.0 - frac[a] };
            let ci = base[a] + hi as isize;
            if ci < 0 || ci as usize >= extents[a] {
                inside = false;
                break;
            }
            flat = flat * extents[a] + ci as usize;
        }
        if w == 0.0 {
            continue; // zero-weight corners never influence value or validity
        }
        if !inside {
            continue;
        }
        w_in += w;
        // `flat` was accumulated with axis order (s,t,u,v) which matches the
        // storage layout, so the channel block starts at flat * nc.
        let chunk = &data[flat * nc..flat * nc + nc];
        for (o, &x) in out.iter_mut().zip(chunk) {
            *o += w * x as f64;
        }
    }

    if w_in >= MIN_INBOUNDS_WEIGHT {
        if w_in != 1.0 {
            for o in out.iter_mut() {
                *o /= w_in;
            }
        }
        true
    } else {
        out.fill(0.0);
        false
    }
}

/// Render the light field seen by a camera rig displaced by `pose`.
///
/// Every output ray is mapped through the pose into the reference frame and
/// sampled quadrilinearly; rays that leave the sampled volume (or become
/// parallel to the reference planes) come back as intensity 0 with a false
/// mask. The identity pose reproduces the input exactly with an all-true
/// mask.
pub fn resample_at_pose(lf: &LightField, pose: &Pose) -> BlurResult {
    blur_with(
        lf,
        &Trajectory::new(vec![*pose]),
        DEFAULT_COVERAGE_THRESHOLD,
    )
    .expect("single-pose trajectory is never empty")
}

/// Motion blur: the validity-weighted average of the light field resampled
/// at every trajectory pose, with the default coverage threshold.
pub fn blur(lf: &LightField, traj: &Trajectory) -> Result<BlurResult> {
    blur_with(lf, traj, DEFAULT_COVERAGE_THRESHOLD)
}

/// [`blur`] with an explicit coverage threshold in `(0, 1]`: rays whose
/// valid-view fraction falls below it are masked invalid.
///
/// Views are accumulated in trajectory order for every ray, so results are
/// bit-reproducible regardless of thread count.
pub fn blur_with(lf: &LightField, traj: &Trajectory, coverage_threshold: f64) -> Result<BlurResult> {
    if traj.is_empty() {
        return Err(Error::config("blur requires at least one trajectory pose"));
    }
    if !(coverage_threshold > 0.0 && coverage_threshold <= 1.0) {
        return Err(Error::config("coverage threshold must lie in (0, 1]"));
    }

    let dims = lf.dims();
    let intr = lf.intrinsics();
    let nc = dims.nc;
    let n_views = traj.len();
    let rays = dims.rays();

    let mut out = vec![0f32; dims.len()];
    let mut weight = vec![0f32; rays];
    let mut mask = vec![false; rays];

    // Ray-major parallel chunks; each ray walks the poses in order.
    const CHUNK: usize = 2048;
    out.par_chunks_mut(CHUNK * nc)
        .zip(weight.par_chunks_mut(CHUNK))
        .zip(mask.par_chunks_mut(CHUNK))
        .enumerate()
        .for_each(|(chunk_no, ((out_chunk, weight_chunk), mask_chunk))| {
            let mut acc = vec![0f64; nc];
            let mut sample = vec![0f64; nc];
            for k in 0..weight_chunk.len() {
                let ray = chunk_no * CHUNK + k;
                let iv = ray % dims.nv;
                let iu = (ray / dims.nv) % dims.nu;
                let it = (ray / (dims.nv * dims.nu)) % dims.nt;
                let is = ray / (dims.nv * dims.nu * dims.nt);
                let base_ray =
                    intr.index_to_ray([is as f64, it as f64, iu as f64, iv as f64]);

                acc.fill(0.0);
                let mut count = 0usize;
                for pose in &traj.poses {
                    let Ok(moved) = transform_ray(pose, &base_ray, intr.plane_sep) else {
                        continue;
                    };
                    let Ok(idx) = intr.ray_to_index(&moved) else {
                        continue;
                    };
                    if sample_quadrilinear(lf, idx, &mut sample) {
                        for (a, &s) in acc.iter_mut().zip(&sample) {
                            *a += s;
                        }
                        count += 1;
                    }
                }

                if count > 0 {
                    for (c, a) in acc.iter().enumerate() {
                        out_chunk[k * nc + c] = (a / count as f64) as f32;
                    }
                }
                weight_chunk[k] = count as f32 / n_views as f32;
                mask_chunk[k] = weight_chunk[k] as f64 >= coverage_threshold;
            }
        });

    Ok(BlurResult {
        lf: LightField::new(dims, intr, out)?,
        mask: ValidityMask::from_vec(dims, mask)?,
        weight,
    })
}
