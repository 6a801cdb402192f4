//! Richardson-Lucy deconvolution generalized to trajectory blur.
//!
//! The forward operator is [`crate::render::blur`] along a discretized
//! camera path; its adjoint-like companion is the same average along the
//! reversed path. One multiplicative update is
//!
//! ```text
//! ratio   = b / max(blur(L), floor)          (per valid ray, 1 elsewhere)
//! corr    = revblur(ratio)                   (1 where the reverse path is invalid)
//! L_next  = L * corr / clamp(1 - rho_tv*E_tv - rho_ep*E_ep, lo, hi)
//! ```
//!
//! with `E_tv`/`E_ep` evaluated on the current iterate (lagged), so that with
//! the regularizers off the scheme reduces to the classical expectation-
//! maximization update whose Poisson log-likelihood never decreases. Rays
//! flagged invalid in the input mask are frozen at their initial value and
//! excluded from the ratio; rays the forward model cannot cover contribute a
//! neutral ratio of 1.
//!
//! Every sample stays nonnegative by construction (ratios, corrections, and
//! the clamped denominator are nonnegative); a NaN or infinity appearing in
//! the iterate aborts with a numerical-failure error naming the iteration.

pub mod regularizer;

pub use regularizer::RegConfig;

use crate::error::{Error, Result};
use crate::geometry::{discretize, reverse, Velocity6};
use crate::lightfield::{LightField, ValidityMask};
use crate::metrics;
use crate::render::{blur, blur_with, BlurResult};

/// Coverage demanded of the forward model inside the RL loop: a ray enters
/// the data term only when every trajectory pose observed it. A partially
/// covered ray's renormalized average systematically disagrees with the full
/// exposure it is compared against (views near the aperture edge would pull
/// the whole field toward that bias through the reverse blur), so such rays
/// get a neutral ratio instead. Sits just under 1 so the exact `count == N`
/// weight of 1.0 passes.
const FULL_COVERAGE: f64 = 0.999;
use regularizer::{
    e_ep_from_gradient, e_tv_from_gradient, gradient4, r_ep_from_gradient, r_tv_from_gradient,
    Gradient4,
};

/// Iteration-loop parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RLConfig {
    /// Number of multiplicative updates to run.
    pub iterations: usize,
    /// Poses used to discretize the exposure trajectory.
    pub n_steps: usize,
    /// Floor applied to the blurred model before dividing the observation.
    pub ratio_floor: f64,
    /// Clamp `(lo, hi)` for the regularizer denominator.
    pub denom_clamp: (f64, f64),
}

impl Default for RLConfig {
    fn default() -> Self {
        RLConfig {
            iterations: 50,
            n_steps: 10,
            ratio_floor: 1e-6,
            denom_clamp: (0.2, 5.0),
        }
    }
}

impl RLConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::config("iteration count must be at least 1"));
        }
        if self.n_steps == 0 {
            return Err(Error::config("trajectory must use at least 1 step"));
        }
        if !(self.ratio_floor.is_finite() && self.ratio_floor > 0.0) {
            return Err(Error::config("ratio floor must be finite and > 0"));
        }
        let (lo, hi) = self.denom_clamp;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
            return Err(Error::config("denominator clamp needs 0 < lo <= hi"));
        }
        Ok(())
    }
}

/// Per-iteration diagnostics recorded after each update.
#[derive(Debug, Clone, Copy)]
pub struct IterationStats {
    /// 1-based iteration index.
    pub iteration: usize,
    /// Poisson log-likelihood of the observation under the current model,
    /// summed over rays the forward model covers.
    pub loglik: f64,
    /// Total-variation functional of the iterate.
    pub r_tv: f64,
    /// Parallax-consistency functional of the iterate.
    pub r_ep: f64,
    /// Smallest sample in the iterate.
    pub min: f32,
    /// Largest sample in the iterate.
    pub max: f32,
    /// Central-view db error against the reference field, when one is given.
    pub db: Option<f64>,
}

/// Deblurred field plus the per-iteration diagnostic trace.
#[derive(Debug, Clone)]
pub struct DeblurOutput {
    pub lf: LightField,
    pub stats: Vec<IterationStats>,
}

/// Runs `rl.iterations` multiplicative updates of the blurred observation
/// `observed` under camera velocity `velocity`. `input_mask` freezes rays
/// (false = never updated, excluded from the data term); pass
/// [`ValidityMask::all_true`] when every ray is trusted. `truth`, when given,
/// only adds a db-error diagnostic per iteration.
pub fn rl_deblur(
    observed: &LightField,
    velocity: &Velocity6,
    rl: &RLConfig,
    reg: &RegConfig,
    input_mask: &ValidityMask,
    truth: Option<&LightField>,
) -> Result<DeblurOutput> {
    rl.validate()?;
    reg.validate()?;
    let dims = observed.dims();
    if input_mask.len() != dims.rays() {
        return Err(Error::config(format!(
            "input mask covers {} rays but the field has {}",
            input_mask.len(),
            dims.rays()
        )));
    }
    if let Some(t) = truth {
        if t.dims() != dims {
            return Err(Error::config(format!(
                "reference dims {} do not match observation dims {}",
                t.dims(),
                dims
            )));
        }
    }

    let traj = discretize(velocity, rl.n_steps)?;
    let rev = reverse(&traj);
    let nc = dims.nc;
    let truth_central = truth.map(|t| t.central_view());

    let mut iterate = observed.clone();
    let mut model = blur_with(&iterate, &traj, FULL_COVERAGE)?;
    let mut stats = Vec::with_capacity(rl.iterations);
    // Gradient of the current iterate, shared between this iteration's
    // diagnostics and the next update's regularizer fields.
    let mut grad_cache: Option<Gradient4> = None;

    for iteration in 1..=rl.iterations {
        let denom = if reg.is_active() {
            let g = grad_cache
                .take()
                .unwrap_or_else(|| gradient4(&iterate));
            let etv = e_tv_from_gradient(&g, reg);
            let eep = e_ep_from_gradient(&g, reg);
            let (lo, hi) = rl.denom_clamp;
            Some(
                etv.iter()
                    .zip(&eep)
                    .map(|(&tv, &ep)| (1.0 - reg.rho_tv * tv - reg.rho_ep * ep).clamp(lo, hi))
                    .collect::<Vec<f64>>(),
            )
        } else {
            None
        };

        let ratio = ratio_field(observed, &model, input_mask, rl.ratio_floor)?;
        let corr = blur(&ratio, &rev)?;

        let data = iterate.data_mut();
        for ray in 0..dims.rays() {
            if !input_mask.get_ray(ray) {
                continue;
            }
            let corr_valid = corr.mask.get_ray(ray);
            for c in 0..nc {
                let i = ray * nc + c;
                let corrv = if corr_valid { corr.lf.data()[i] as f64 } else { 1.0 };
                let d = denom.as_ref().map_or(1.0, |d| d[i]);
                data[i] = (data[i] as f64 * corrv / d) as f32;
            }
        }
        if iterate.data().iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalFailure { iteration });
        }

        model = blur_with(&iterate, &traj, FULL_COVERAGE)?;
        let g = gradient4(&iterate);
        let (mut lo, mut hi) = (f32::INFINITY, f32::NEG_INFINITY);
        for &x in iterate.data() {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        stats.push(IterationStats {
            iteration,
            loglik: metrics::poisson_loglik(observed, &model)?,
            r_tv: r_tv_from_gradient(&g, reg),
            r_ep: r_ep_from_gradient(&g, reg),
            min: lo,
            max: hi,
            db: truth_central
                .as_ref()
                .map(|t| metrics::db_error_images(&iterate.central_view(), t, None))
                .transpose()?,
        });
        grad_cache = Some(g);
    }

    Ok(DeblurOutput { lf: iterate, stats })
}

/// Elementwise data/model ratio: `b / max(model, floor)` on rays that are
/// both trusted and covered by the forward model, and exactly 1 elsewhere so
/// the reverse blur treats them as neutral.
fn ratio_field(
    observed: &LightField,
    model: &BlurResult,
    input_mask: &ValidityMask,
    floor: f64,
) -> Result<LightField> {
    let dims = observed.dims();
    let nc = dims.nc;
    let mut data = vec![1.0f32; dims.len()];
    let b = observed.data();
    let m = model.lf.data();
    for ray in 0..dims.rays() {
        if !(model.mask.get_ray(ray) && input_mask.get_ray(ray)) {
            continue;
        }
        for c in 0..nc {
            let i = ray * nc + c;
            data[i] = (b[i] as f64 / (m[i] as f64).max(floor)) as f32;
        }
    }
    LightField::new(dims, observed.intrinsics(), data)
}
