//! Rigid 6-DOF camera geometry: constant-velocity exposure paths and the
//! two-plane ray transform.
//!
//! A camera trajectory over one exposure is described by a six-vector
//! `(tx, ty, tz, rx, ry, rz)`: metric translation per exposure unit and an
//! axis-angle rotation rate in radians per exposure unit, both expressed in
//! the reference camera frame. Exposure time is normalized to `[-0.5, 0.5]`
//! so the reference pose sits at the temporal midpoint:
//!
//!   P(t) = ( exp(skew(t * (rx, ry, rz))),  t * (tx, ty, tz) )
//!
//! A [`Pose`] maps points from the moved (virtual) camera frame into the
//! reference light-field frame: `q_ref = R * q_virtual + T`. Rotations are
//! about the origin of the camera plane, i.e. nodal for the central camera.

use crate::error::{Error, Result};

/// A light ray stored as two points on it, in metric reference-frame
/// coordinates. Fresh from [`index_to_ray`](crate::lightfield::Intrinsics::index_to_ray)
/// the points lie on the z=0 and z=D parameterization planes, but any two
/// distinct points are acceptable as input to the ray/index conversions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub p0: [f64; 3],
    pub p1: [f64; 3],
}

impl Ray {
    pub fn new(p0: [f64; 3], p1: [f64; 3]) -> Self {
        Ray { p0, p1 }
    }

    /// Direction vector `p1 - p0` (not normalized).
    pub fn dir(&self) -> [f64; 3] {
        [
            self.p1[0] - self.p0[0],
            self.p1[1] - self.p0[1],
            self.p1[2] - self.p0[2],
        ]
    }
}

/// Constant 6-DOF velocity over one exposure: translation per exposure unit
/// and axis-angle rotation rate (radians per exposure unit).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Velocity6 {
    pub tx: f64,
    pub ty: f64,
    pub tz: f64,
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
}

impl Velocity6 {
    pub fn new(tx: f64, ty: f64, tz: f64, rx: f64, ry: f64, rz: f64) -> Self {
        Velocity6 { tx, ty, tz, rx, ry, rz }
    }

    pub fn zero() -> Self {
        Velocity6::default()
    }

    pub fn is_zero(&self) -> bool {
        self.tx == 0.0
            && self.ty == 0.0
            && self.tz == 0.0
            && self.rx == 0.0
            && self.ry == 0.0
            && self.rz == 0.0
    }

    /// Parse "tx,ty,tz,rx,ry,rz".
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(Error::config(format!(
                "velocity must have 6 comma-separated components, got {}",
                parts.len()
            )));
        }
        let mut v = [0.0f64; 6];
        for (slot, part) in v.iter_mut().zip(&parts) {
            *slot = part
                .parse::<f64>()
                .map_err(|_| Error::config(format!("invalid velocity component '{part}'")))?;
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("velocity components must be finite"));
        }
        Ok(Velocity6::new(v[0], v[1], v[2], v[3], v[4], v[5]))
    }

    pub fn components(&self) -> [f64; 6] {
        [self.tx, self.ty, self.tz, self.rx, self.ry, self.rz]
    }
}

impl std::fmt::Display for Velocity6 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{}",
            self.tx, self.ty, self.tz, self.rx, self.ry, self.rz
        )
    }
}

/// Rigid transform: rotation matrix (row-major 3x3) plus translation.
/// Maps virtual-camera-frame points into the reference frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0, 0.0, 0.0],
        }
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2] + t[0],
            r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2] + t[1],
            r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2] + t[2],
        ]
    }

    /// Rigid inverse: `(R, T)^-1 = (R^T, -R^T T)`.
    pub fn inverse(&self) -> Pose {
        let r = &self.rotation;
        let rt = [
            [r[0][0], r[1][0], r[2][0]],
            [r[0][1], r[1][1], r[2][1]],
            [r[0][2], r[1][2], r[2][2]],
        ];
        let t = &self.translation;
        let nt = [
            -(rt[0][0] * t[0] + rt[0][1] * t[1] + rt[0][2] * t[2]),
            -(rt[1][0] * t[0] + rt[1][1] * t[1] + rt[1][2] * t[2]),
            -(rt[2][0] * t[0] + rt[2][1] * t[1] + rt[2][2] * t[2]),
        ];
        Pose { rotation: rt, translation: nt }
    }

    /// Composition `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        let a = &self.rotation;
        let b = &other.rotation;
        let mut rotation = [[0.0; 3]; 3];
        for (i, row) in rotation.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Pose {
            rotation,
            translation: self.apply(other.translation),
        }
    }

    /// Max absolute deviation of `R^T R` from the identity — used by tests
    /// and debug checks to confirm orthonormality.
    pub fn orthonormality_error(&self) -> f64 {
        let r = &self.rotation;
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Determinant of the rotation block.
    pub fn rotation_det(&self) -> f64 {
        let r = &self.rotation;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }
}

/// Finite pose sequence sampled over one exposure, in temporal order.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub poses: Vec<Pose>,
}

impl Trajectory {
    pub fn new(poses: Vec<Pose>) -> Self {
        Trajectory { poses }
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// Rodrigues rotation: `exp(skew(w))` for axis-angle vector `w`.
///
/// For very small angles the matrix is the exact identity, which keeps
/// zero-velocity resampling bit-exact.
fn rotation_exp(w: [f64; 3]) -> [[f64; 3]; 3] {
    let angle = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    if angle < 1e-14 {
        return Pose::identity().rotation;
    }
    let (x, y, z) = (w[0] / angle, w[1] / angle, w[2] / angle);
    let (s, c) = angle.sin_cos();
    let ic = 1.0 - c;
    [
        [c + x * x * ic, x * y * ic - z * s, x * z * ic + y * s],
        [y * x * ic + z * s, c + y * y * ic, y * z * ic - x * s],
        [z * x * ic - y * s, z * y * ic + x * s, c + z * z * ic],
    ]
}

/// Pose of the camera at normalized exposure time `t` under constant
/// velocity `v`: rotation `exp(skew(t*(rx,ry,rz)))`, translation `t*(tx,ty,tz)`.
pub fn pose_from_velocity(v: &Velocity6, t: f64) -> Pose {
    Pose {
        rotation: rotation_exp([t * v.rx, t * v.ry, t * v.rz]),
        translation: [t * v.tx, t * v.ty, t * v.tz],
    }
}

/// Sample the exposure path at `n` poses, endpoint-inclusive:
/// `t_i = -0.5 + i/(n-1)`. `n = 1` yields the single midpoint (identity) pose.
pub fn discretize(v: &Velocity6, n: usize) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::config("trajectory must have at least one pose"));
    }
    let poses = (0..n)
        .map(|i| {
            let t = if n == 1 {
                0.0
            } else {
                -0.5 + i as f64 / (n as f64 - 1.0)
            };
            pose_from_velocity(v, t)
        })
        .collect();
    Ok(Trajectory::new(poses))
}

/// Direction-reversed trajectory: each pose replaced by its rigid inverse and
/// the temporal order flipped. Applying `reverse` twice returns the original.
pub fn reverse(traj: &Trajectory) -> Trajectory {
    Trajectory::new(traj.poses.iter().rev().map(Pose::inverse).collect())
}

/// Transform a ray by a pose and re-express it by its intersections with the
/// z=0 and z=D planes.
///
/// Fails with [`Error::DegenerateRay`] when the transformed direction is
/// parallel to the planes (|dz| below `1e-12` of the direction norm).
pub fn transform_ray(pose: &Pose, ray: &Ray, plane_sep: f64) -> Result<Ray> {
    let a = pose.apply(ray.p0);
    let b = pose.apply(ray.p1);
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if d[2].abs() < 1e-12 * norm || norm == 0.0 {
        return Err(Error::DegenerateRay);
    }
    // Intersections with z = 0 and z = plane_sep, in the lerp form
    // a*(1-l) + b*l which returns the endpoints bit-exactly at l = 0 and
    // l = 1 — so an identity pose is a true no-op.
    let l0 = -a[2] / d[2];
    let l1 = (plane_sep - a[2]) / d[2];
    Ok(Ray::new(
        [
            a[0] * (1.0 - l0) + b[0] * l0,
            a[1] * (1.0 - l0) + b[1] * l0,
            0.0,
        ],
        [
            a[0] * (1.0 - l1) + b[0] * l1,
            a[1] * (1.0 - l1) + b[1] * l1,
            plane_sep,
        ],
    ))
}
