//! Slice-size concentration bound, required message counts for rank
//! estimation, and Monte-Carlo checks of both.

use rand::Rng;

use crate::domain::SliceSpec;
use crate::error::{Error, Result};

/// Minimal slice length for which a slice of `n` uniformly placed nodes
/// holds `(1 ± beta)·n·p` nodes with probability at least `1 - epsilon`:
/// `3 / (beta² n) · ln(2 / epsilon)`.
pub fn lemma1_min_slice_length(beta: f64, epsilon: f64, n: u64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta {beta} outside (0, 1]"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon {epsilon} outside (0, 1)"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok(3.0 / (beta * beta * n as f64) * (2.0 / epsilon).ln())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceSizeQuery {
    pub beta: f64,
    pub epsilon: f64,
    pub n: u64,
    pub p: f64,
}

/// Lower bound a Monte-Carlo estimate must clear: `1 - eps - 3 sqrt(eps / trials)`.
pub fn lemma1_contract(epsilon: f64, trials: u64) -> f64 {
    1.0 - epsilon - 3.0 * (epsilon / trials as f64).sqrt()
}

/// Fraction of `trials` in which the count of `n` uniform `(0, 1]` draws
/// falling into `(0, p]` lies within `[(1 - beta) n p, (1 + beta) n p]`.
///
/// Refuses queries below the bound's threshold, where nothing is claimed.
pub fn verify_lemma1_monte_carlo<R: Rng + ?Sized>(
    query: &SliceSizeQuery,
    trials: u64,
    rng: &mut R,
) -> Result<f64> {
    let threshold = lemma1_min_slice_length(query.beta, query.epsilon, query.n)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if !(query.p > 0.0 && query.p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p {} outside (0, 1]",
            query.p
        )));
    }
    if query.p < threshold {
        return Err(Error::Precondition(format!(
            "slice length {} is below the bound's threshold {threshold:.6}",
            query.p
        )));
    }
    let mean = query.n as f64 * query.p;
    let (lo, hi) = ((1.0 - query.beta) * mean, (1.0 + query.beta) * mean);
    let mut inside = 0u64;
    for _ in 0..trials {
        let mut count = 0u64;
        for _ in 0..query.n {
            let u = 1.0 - rng.gen::<f64>();
            count += u64::from(u <= query.p);
        }
        let x = count as f64;
        inside += u64::from(x >= lo && x <= hi);
    }
    Ok(inside as f64 / trials as f64)
}

// Wichura's AS241 (PPND16) coefficients.
const A: [f64; 8] = [
    3.387_132_872_796_366_5,
    133.141_667_891_784_38,
    1_971.590_950_306_551_3,
    13_731.693_765_509_46,
    45_921.953_931_549_87,
    67_265.770_927_008_7,
    33_430.575_583_588_13,
    2_509.080_928_730_122_7,
];
const B: [f64; 8] = [
    1.0,
    42.313_330_701_600_91,
    687.187_007_492_057_9,
    5_394.196_021_424_751,
    21_213.794_301_586_597,
    39_307.895_800_092_71,
    28_729.085_735_721_943,
    5_226.495_278_852_854,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_546,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    0.241_780_725_177_450_6,
    0.022_723_844_989_269_184,
    7.745_450_142_783_414e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    0.689_767_334_985_1,
    0.148_103_976_427_480_08,
    0.015_198_666_563_616_457,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    0.296_560_571_828_504_87,
    0.026_532_189_526_576_124,
    0.001_242_660_947_388_078_4,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const F: [f64; 8] = [
    1.0,
    0.599_832_206_555_888,
    0.136_929_880_922_735_8,
    0.014_875_361_290_850_615,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];

fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Standard normal quantile for `p` in `(0, 1)`.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// `Z_{alpha/2} = Φ⁻¹(1 - alpha/2)`.
pub fn z_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha {alpha} outside (0, 1)"
        )));
    }
    // Evaluate in the upper tail through the symmetric lower one to keep
    // precision for tiny alpha.
    Ok(-inverse_normal_cdf(alpha / 2.0))
}

/// Messages needed to pin a rank estimate `p_hat` that lies `d` from the
/// nearest boundary at confidence `1 - alpha`:
/// `(Z_{alpha/2} sqrt(p_hat (1 - p_hat)) / d)²`.
pub fn theorem1_required_messages(p_hat: f64, d: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::InvalidParameter(format!(
            "p_hat {p_hat} outside [0, 1]"
        )));
    }
    if d == 0.0 {
        return Err(Error::OnBoundary);
    }
    if d.is_nan() || d < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "distance {d} must be positive"
        )));
    }
    let z = z_quantile(alpha)?;
    let spread = z * (p_hat * (1.0 - p_hat)).sqrt() / d;
    Ok(spread * spread)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankConfidenceReport {
    /// Distance from the true rank to the nearest interior boundary.
    pub distance: f64,
    /// Bernoulli samples drawn per trial.
    pub messages: u64,
    /// Fraction of trials whose estimate fell into the true slice.
    pub correct_fraction: f64,
}

/// Slack allowed below `1 - alpha` for the normal approximation.
pub const THEOREM1_SLACK: f64 = 0.03;

/// Draws `ceil(required messages)` Bernoulli(`p`) comparisons per trial and
/// reports how often the resulting estimate lands in `p`'s slice.
pub fn verify_theorem1_monte_carlo<R: Rng + ?Sized>(
    p: f64,
    spec: &SliceSpec,
    alpha: f64,
    trials: u64,
    rng: &mut R,
) -> Result<RankConfidenceReport> {
    let target = spec.slice_of(p)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let distance = spec.boundary_distance(p);
    let required = if distance.is_infinite() {
        0.0
    } else {
        theorem1_required_messages(p, distance, alpha)?
    };
    let messages = (required.ceil() as u64).max(1);
    let mut correct = 0u64;
    for _ in 0..trials {
        let mut lower = 0u64;
        for _ in 0..messages {
            lower += u64::from(rng.gen::<f64>() < p);
        }
        let estimate = lower as f64 / messages as f64;
        correct += u64::from(spec.slice_of_estimate(estimate) == target);
    }
    Ok(RankConfidenceReport {
        distance,
        messages,
        correct_fraction: correct as f64 / trials as f64,
    })
}
