//! Analytic ray-traced ground truth.
//!
//! A miniature Lambertian ray tracer renders still and motion-blurred light
//! fields directly from scene geometry, independent of the resampling
//! renderer, so the two can cross-validate each other. The camera rig is a
//! pinhole grid on the `z = 0` plane looking through pixel centers on the
//! `z = plane_sep` plane; scenes are fronto-parallel textured planes and
//! spheres over a constant background. Motion blur averages `substeps` full
//! renders at rig poses sampled endpoint-inclusive along the exposure, and
//! Poisson shot noise replaces each sample by a scaled count drawn from a
//! per-sample seeded stream.
//!
//! Intersections are evaluated in the affine form `o*(1-t) + p*t` along the
//! camera-to-pixel segment, which is exact at `t = 1`: a plane lying on the
//! image plane hits every pixel at exactly its own grid coordinate, so all
//! its views are bit-identical — several fixtures rely on that.

mod rng;

pub use rng::{ln_gamma, mix64, poisson_sample, SplitMix64};

use rayon::prelude::*;

use crate::config::KvMap;
use crate::error::{Error, Result};
use crate::geometry::{discretize, Pose, Velocity6};
use crate::lightfield::{Dims, Intrinsics, LightField};

/// Smallest segment parameter accepted as a hit (rejects the camera point
/// itself and anything behind it).
const T_MIN: f64 = 1e-9;

/// Albedo pattern over the world `(x, y)` of a hit point.
#[derive(Debug, Clone, PartialEq)]
pub enum Texture {
    /// Uniform albedo.
    Solid,
    /// Squares of `period` world units alternating between the object albedo
    /// and `albedo2`.
    Checker { period: f64, albedo2: [f64; 3] },
    /// Smoothly interpolated value noise with lattice cell `period`,
    /// modulating the albedo between 25% and 100%.
    Noise { period: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Fronto-parallel infinite plane `z = depth`.
    Plane { depth: f64 },
    /// Sphere fully in front of the camera plane.
    Sphere { center: [f64; 3], radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub shape: Shape,
    pub albedo: [f64; 3],
    pub texture: Texture,
}

/// Scene content: listed objects over a constant background, all Lambertian.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub background: [f64; 3],
    pub objects: Vec<SceneObject>,
}

/// Camera rig and synthesis parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub dims: Dims,
    /// Camera-grid pitch in length units (becomes the `s, t` pitch).
    pub baseline: f64,
    /// Full field of view across the `u` axis, radians.
    pub fov: f64,
    /// Camera-to-image plane separation `D`.
    pub plane_sep: f64,
    /// Still renders averaged per blurred render.
    pub substeps: usize,
    /// Expected photon count at intensity 1 (noise injection).
    pub photon_peak: f64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let d = self.dims;
        if d.is_empty() {
            return Err(Error::config("all light-field dimensions must be at least 1"));
        }
        if d.ns != d.nt || d.nu != d.nv {
            return Err(Error::config(format!(
                "synthetic rigs are square: got {}x{} cameras, {}x{} pixels",
                d.ns, d.nt, d.nu, d.nv
            )));
        }
        if !(self.baseline.is_finite() && self.baseline > 0.0) {
            return Err(Error::config("camera baseline must be finite and > 0"));
        }
        if !(self.fov.is_finite() && self.fov > 0.0 && self.fov < std::f64::consts::PI) {
            return Err(Error::config("field of view must lie in (0, pi) radians"));
        }
        if !(self.plane_sep.is_finite() && self.plane_sep > 0.0) {
            return Err(Error::config("plane separation must be finite and > 0"));
        }
        if self.substeps == 0 {
            return Err(Error::config("blur substeps must be at least 1"));
        }
        if !(self.photon_peak.is_finite() && self.photon_peak > 0.0) {
            return Err(Error::config("photon peak must be finite and > 0"));
        }
        Ok(())
    }

    /// Two-plane intrinsics of the rig: pitch from the field of view, both
    /// grids centered on the optical axis.
    pub fn intrinsics(&self) -> Result<Intrinsics> {
        let pitch_uv = 2.0 * self.plane_sep * (self.fov / 2.0).tan() / self.dims.nu as f64;
        Intrinsics::new(
            self.plane_sep,
            self.baseline,
            pitch_uv,
            -((self.dims.ns - 1) as f64) / 2.0 * self.baseline,
            -((self.dims.nu - 1) as f64) / 2.0 * pitch_uv,
        )
    }
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        check_albedo("background", &self.background)?;
        for (k, obj) in self.objects.iter().enumerate() {
            let name = format!("object {}", k + 1);
            check_albedo(&name, &obj.albedo)?;
            match &obj.shape {
                Shape::Plane { depth } => {
                    if !(depth.is_finite() && *depth > 0.0) {
                        return Err(Error::config(format!(
                            "{name}: plane depth must be finite and > 0"
                        )));
                    }
                }
                Shape::Sphere { center, radius } => {
                    if center.iter().any(|c| !c.is_finite())
                        || !(radius.is_finite() && *radius > 0.0)
                    {
                        return Err(Error::config(format!(
                            "{name}: sphere needs finite center and radius > 0"
                        )));
                    }
                    if center[2] - radius <= 0.0 {
                        return Err(Error::config(format!(
                            "{name}: sphere must lie entirely in front of the camera plane"
                        )));
                    }
                }
            }
            match &obj.texture {
                Texture::Solid => {}
                Texture::Checker { period, albedo2 } => {
                    check_period(&name, *period)?;
                    check_albedo(&format!("{name} albedo2"), albedo2)?;
                }
                Texture::Noise { period, .. } => check_period(&name, *period)?,
            }
        }
        Ok(())
    }
}

fn check_albedo(name: &str, albedo: &[f64; 3]) -> Result<()> {
    if albedo.iter().any(|a| !(a.is_finite() && (0.0..=1.0).contains(a))) {
        return Err(Error::config(format!("{name}: albedo components must lie in [0, 1]")));
    }
    Ok(())
}

fn check_period(name: &str, period: f64) -> Result<()> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::config(format!("{name}: texture period must be finite and > 0")));
    }
    Ok(())
}

/// Parses a scene description plus its camera block from flat key-value
/// text. Schema (see the repository README for the full reference):
///
/// ```text
/// camera.dims       = 9,9,64,64,1      # Ns,Nt,Nu,Nv,Nc (required)
/// camera.baseline   = 0.01             # camera grid pitch (required)
/// camera.fov        = 0.6981           # radians across u (required)
/// camera.plane_sep  = 0.5              # D (required)
/// camera.substeps   = 32               # blur substeps M (default 32)
/// camera.photon_peak = 1000            # photons at intensity 1 (default 1000)
/// background        = 0.25             # 1 or 3 components (required)
/// object.1.type     = plane            # or sphere
/// object.1.depth    = 0.6              # planes only
/// object.1.texture  = checker          # solid (default) | checker | noise
/// object.1.period   = 0.05             # checker/noise only
/// object.1.albedo   = 0.9              # 1 or 3 components (default 0.5)
/// object.1.albedo2  = 0.1              # checker only (default albedo/8)
/// object.2.type     = sphere
/// object.2.center   = 0.0,0.05,1.2
/// object.2.radius   = 0.2
/// object.2.seed     = 9                # noise only (default: object id)
/// ```
pub fn parse_scene(text: &str) -> Result<(Scene, SynthConfig)> {
    let kv = KvMap::parse(text)?;

    let dims = kv.usize_list("camera.dims")?.ok_or_else(|| {
        Error::config("missing required key 'camera.dims'")
    })?;
    if dims.len() != 5 {
        return Err(Error::config(format!(
            "camera.dims needs 5 components Ns,Nt,Nu,Nv,Nc, got {}",
            dims.len()
        )));
    }
    let cfg = SynthConfig {
        dims: Dims::new(dims[0], dims[1], dims[2], dims[3], dims[4]),
        baseline: require_f64(&kv, "camera.baseline")?,
        fov: require_f64(&kv, "camera.fov")?,
        plane_sep: require_f64(&kv, "camera.plane_sep")?,
        substeps: kv.usize("camera.substeps")?.unwrap_or(32),
        photon_peak: kv.f64("camera.photon_peak")?.unwrap_or(1000.0),
    };

    let background = albedo_from(&kv, "background")?
        .ok_or_else(|| Error::config("missing required key 'background'"))?;

    let mut objects = Vec::new();
    for id in kv.group_ids("object.")? {
        let key = |field: &str| format!("object.{id}.{field}");
        let shape = match kv.require(&key("type"))? {
            "plane" => Shape::Plane { depth: require_f64(&kv, &key("depth"))? },
            "sphere" => {
                let center = kv.f64_list(&key("center"))?.ok_or_else(|| {
                    Error::config(format!("missing required key '{}'", key("center")))
                })?;
                if center.len() != 3 {
                    return Err(Error::config(format!(
                        "{} needs 3 components x,y,z",
                        key("center")
                    )));
                }
                Shape::Sphere {
                    center: [center[0], center[1], center[2]],
                    radius: require_f64(&kv, &key("radius"))?,
                }
            }
            other => {
                return Err(Error::config(format!(
                    "object.{id}.type must be 'plane' or 'sphere', got '{other}'"
                )))
            }
        };
        let albedo = albedo_from(&kv, &key("albedo"))?.unwrap_or([0.5; 3]);
        let texture = match kv.raw(&key("texture")).unwrap_or("solid") {
            "solid" => Texture::Solid,
            "checker" => Texture::Checker {
                period: require_f64(&kv, &key("period"))?,
                albedo2: albedo_from(&kv, &key("albedo2"))?
                    .unwrap_or(albedo.map(|a| a / 8.0)),
            },
            "noise" => Texture::Noise {
                period: require_f64(&kv, &key("period"))?,
                seed: kv.u64(&key("seed"))?.unwrap_or(id as u64),
            },
            other => {
                return Err(Error::config(format!(
                    "object.{id}.texture must be solid, checker, or noise, got '{other}'"
                )))
            }
        };
        objects.push(SceneObject { shape, albedo, texture });
    }

    kv.finish()?;
    let scene = Scene { background, objects };
    cfg.validate()?;
    scene.validate()?;
    Ok((scene, cfg))
}

fn require_f64(kv: &KvMap, key: &str) -> Result<f64> {
    kv.f64(key)?
        .ok_or_else(|| Error::config(format!("missing required key '{key}'")))
}

/// 1 component broadcast to gray, or 3 components as RGB.
fn albedo_from(kv: &KvMap, key: &str) -> Result<Option<[f64; 3]>> {
    match kv.f64_list(key)? {
        None => Ok(None),
        Some(list) => match list.len() {
            1 => Ok(Some([list[0]; 3])),
            3 => Ok(Some([list[0], list[1], list[2]])),
            n => Err(Error::config(format!("key '{key}': expected 1 or 3 components, got {n}"))),
        },
    }
}

impl SceneObject {
    /// Albedo at world hit coordinates `(x, y)`.
    fn color_at(&self, x: f64, y: f64) -> [f64; 3] {
        match &self.texture {
            Texture::Solid => self.albedo,
            Texture::Checker { period, albedo2 } => {
                let cell = (x / period).floor() as i64 + (y / period).floor() as i64;
                if cell.rem_euclid(2) == 0 {
                    self.albedo
                } else {
                    *albedo2
                }
            }
            Texture::Noise { period, seed } => {
                let n = 0.25 + 0.75 * value_noise(x / period, y / period, *seed);
                self.albedo.map(|a| a * n)
            }
        }
    }
}

/// Lattice hash in `[0, 1)` for value noise.
fn lattice(ix: i64, iy: i64, seed: u64) -> f64 {
    let h = mix64(
        seed ^ (ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
            ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F),
    );
    (h >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// C¹ value noise: lattice hashes blended with smoothstep weights.
fn value_noise(gx: f64, gy: f64, seed: u64) -> f64 {
    let (fx, fy) = (gx.floor(), gy.floor());
    let (ix, iy) = (fx as i64, fy as i64);
    let (ax, ay) = (gx - fx, gy - fy);
    let wx = ax * ax * (3.0 - 2.0 * ax);
    let wy = ay * ay * (3.0 - 2.0 * ay);
    let n0 = lattice(ix, iy, seed) * (1.0 - wx) + lattice(ix + 1, iy, seed) * wx;
    let n1 = lattice(ix, iy + 1, seed) * (1.0 - wx) + lattice(ix + 1, iy + 1, seed) * wx;
    n0 * (1.0 - wy) + n1 * wy
}

impl Shape {
    /// Smallest segment parameter `t > T_MIN` where the line
    /// `o*(1-t) + p*t` meets the shape.
    fn intersect(&self, o: [f64; 3], p: [f64; 3]) -> Option<f64> {
        let d = [p[0] - o[0], p[1] - o[1], p[2] - o[2]];
        match self {
            Shape::Plane { depth } => {
                if d[2].abs() < 1e-12 {
                    return None;
                }
                let t = (depth - o[2]) / d[2];
                (t > T_MIN).then_some(t)
            }
            Shape::Sphere { center, radius } => {
                let oc = [o[0] - center[0], o[1] - center[1], o[2] - center[2]];
                let a = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                let b = 2.0 * (d[0] * oc[0] + d[1] * oc[1] + d[2] * oc[2]);
                let c = oc[0] * oc[0] + oc[1] * oc[1] + oc[2] * oc[2] - radius * radius;
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 || a == 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                let t0 = (-b - sq) / (2.0 * a);
                let t1 = (-b + sq) / (2.0 * a);
                if t0 > T_MIN {
                    Some(t0)
                } else if t1 > T_MIN {
                    Some(t1)
                } else {
                    None
                }
            }
        }
    }
}

/// Nearest-hit albedo along the camera-to-pixel segment, or the background.
fn trace(scene: &Scene, o: [f64; 3], p: [f64; 3]) -> [f64; 3] {
    let mut best_t = f64::INFINITY;
    let mut color = scene.background;
    for obj in &scene.objects {
        if let Some(t) = obj.shape.intersect(o, p) {
            if t < best_t {
                best_t = t;
                let hx = o[0] * (1.0 - t) + p[0] * t;
                let hy = o[1] * (1.0 - t) + p[1] * t;
                color = obj.color_at(hx, hy);
            }
        }
    }
    color
}

const RAY_CHUNK: usize = 2048;

/// Renders the rig rigidly moved to `pose` (which maps rig coordinates to
/// the world frame). Deterministic regardless of thread count.
pub fn render_at_rig_pose(scene: &Scene, cfg: &SynthConfig, pose: &Pose) -> Result<LightField> {
    cfg.validate()?;
    scene.validate()?;
    let dims = cfg.dims;
    let intr = cfg.intrinsics()?;
    let nc = dims.nc;
    let mut data = vec![0.0f32; dims.len()];
    data.par_chunks_mut(RAY_CHUNK * nc)
        .enumerate()
        .for_each(|(chunk, out)| {
            let ray0 = chunk * RAY_CHUNK;
            for (j, px) in out.chunks_mut(nc).enumerate() {
                let (is, it, iu, iv) = dims.ray_coords(ray0 + j);
                let ray =
                    intr.index_to_ray([is as f64, it as f64, iu as f64, iv as f64]);
                let o = pose.apply(ray.p0);
                let p = pose.apply(ray.p1);
                let color = trace(scene, o, p);
                for (c, slot) in px.iter_mut().enumerate() {
                    *slot = color[c.min(2)] as f32;
                }
            }
        });
    LightField::new(dims, intr, data)
}

/// Ground-truth still render at the reference pose.
pub fn render_still(scene: &Scene, cfg: &SynthConfig) -> Result<LightField> {
    render_at_rig_pose(scene, cfg, &Pose::identity())
}

/// Ground-truth motion-blurred render: the mean of `cfg.substeps` stills at
/// poses sampled endpoint-inclusive along the exposure of `velocity`. This
/// shares no code with the light-field resampling blur, so the two act as
/// independent cross-checks.
pub fn render_blurred(scene: &Scene, cfg: &SynthConfig, velocity: &Velocity6) -> Result<LightField> {
    cfg.validate()?;
    let traj = discretize(velocity, cfg.substeps)?;
    let dims = cfg.dims;
    let mut acc = vec![0.0f64; dims.len()];
    let mut intr = None;
    for pose in &traj.poses {
        let still = render_at_rig_pose(scene, cfg, pose)?;
        for (a, &x) in acc.iter_mut().zip(still.data()) {
            *a += x as f64;
        }
        intr = Some(still.intrinsics());
    }
    let m = traj.poses.len() as f64;
    let data: Vec<f32> = acc.into_iter().map(|a| (a / m) as f32).collect();
    LightField::new(dims, intr.expect("trajectory is never empty"), data)
}

/// Replaces every sample by `PoissonSample(value * photon_peak) / photon_peak`
/// using a per-sample stream derived from `(seed, sample index)`, so the
/// result is reproducible under any parallel schedule.
pub fn add_poisson(lf: &LightField, photon_peak: f64, seed: u64) -> Result<LightField> {
    if !(photon_peak.is_finite() && photon_peak > 0.0) {
        return Err(Error::config("photon peak must be finite and > 0"));
    }
    let mut data = lf.data().to_vec();
    data.par_chunks_mut(RAY_CHUNK)
        .enumerate()
        .for_each(|(chunk, out)| {
            let base = chunk * RAY_CHUNK;
            for (j, x) in out.iter_mut().enumerate() {
                let mut rng = SplitMix64::for_index(seed, (base + j) as u64);
                let lambda = *x as f64 * photon_peak;
                *x = (poisson_sample(&mut rng, lambda) as f64 / photon_peak) as f32;
            }
        });
    LightField::new(lf.dims(), lf.intrinsics(), data)
}
