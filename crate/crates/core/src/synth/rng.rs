//! Deterministic random numbers for synthesis and tests.
//!
//! [`SplitMix64`] is the 64-bit mixing generator of Steele, Lea & Vigna —
//! a one-word state advanced by the golden-ratio increment and finalized by
//! two xor-multiply rounds. It is seedable per sample index via
//! [`SplitMix64::for_index`], so parallel noise injection visits samples in
//! any order and still produces identical output.
//!
//! [`poisson_sample`] draws Poisson counts by inversion for means up to
//! 1000 — walking outward from the modal count so the probabilities stay in
//! range even for large means — and by a rounded normal approximation above
//! that, where the relative error of the approximation is below float
//! precision of the downstream intensities.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Finalizer of the SplitMix64 generator: a bijective 64-bit mix.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Minimal deterministic PRNG with a 64-bit state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Stream for one (seed, sample-index) pair: a hash of the pair seeds
    /// the state, so streams for different indices are decorrelated no
    /// matter how many draws each consumes.
    pub fn for_index(seed: u64, index: u64) -> Self {
        SplitMix64 { state: mix64(seed ^ mix64(index.wrapping_add(GOLDEN))) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }
}

/// Natural log of the gamma function for positive arguments, via the
/// Stirling series after shifting the argument above 10.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    let mut x = x;
    // Shift into x >= 12 where the truncated Stirling series (through the
    // x^-7 term) has remainder ~1/(1188 x^9) < 2e-13.
    while x < 12.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series =
        inv / 12.0 - inv * inv2 / 360.0 + inv * inv2 * inv2 / 1260.0 - inv * inv2 * inv2 * inv2 / 1680.0;
    shift + 0.5 * (2.0 * std::f64::consts::PI).ln() + (x - 0.5) * x.ln() - x + series
}

/// Largest mean handled by exact inversion; above it the normal
/// approximation takes over.
const INVERSION_MAX_MEAN: f64 = 1000.0;

/// One Poisson draw with mean `lambda >= 0`, consuming one or two uniforms
/// from `rng`.
pub fn poisson_sample(rng: &mut SplitMix64, lambda: f64) -> u64 {
    debug_assert!(lambda.is_finite() && lambda >= 0.0);
    if lambda == 0.0 {
        return 0;
    }
    if lambda <= INVERSION_MAX_MEAN {
        poisson_by_inversion(rng.next_f64(), lambda)
    } else {
        // Box-Muller normal approximation, rounded and clamped at zero.
        let u1 = 1.0 - rng.next_f64(); // (0, 1]
        let u2 = rng.next_f64();
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        (lambda + lambda.sqrt() * z).round().max(0.0) as u64
    }
}

/// Inversion from the modal count outward: accumulate probability mass in
/// decreasing-probability order until it exceeds `u`. Starting at the mode
/// keeps every term representable (the mass at the mode is ~1/sqrt(lambda)),
/// unlike the classical count-up from zero which underflows near mean 700.
fn poisson_by_inversion(u: f64, lambda: f64) -> u64 {
    let mode = lambda.floor();
    let p_mode = (-lambda + mode * lambda.ln() - ln_gamma(mode + 1.0)).exp();
    let mode = mode as u64;
    let mut cum = p_mode;
    if u < cum {
        return mode;
    }
    let (mut lo, mut hi) = (mode, mode);
    let (mut p_lo, mut p_hi) = (p_mode, p_mode);
    // ±40 standard deviations around the mode carries all representable mass.
    let span = (40.0 * lambda.sqrt()).ceil() as u64 + 8;
    for _ in 0..2 * span {
        let next_lo = if lo > 0 { p_lo * lo as f64 / lambda } else { 0.0 };
        let next_hi = p_hi * lambda / (hi + 1) as f64;
        if next_hi >= next_lo {
            if next_hi == 0.0 {
                break;
            }
            hi += 1;
            p_hi = next_hi;
            cum += p_hi;
            if u < cum {
                return hi;
            }
        } else {
            lo -= 1;
            p_lo = next_lo;
            cum += p_lo;
            if u < cum {
                return lo;
            }
        }
    }
    // u fell into float round-off beyond the accumulated mass.
    hi
}
