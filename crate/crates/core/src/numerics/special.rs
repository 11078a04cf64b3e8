//! Normal-distribution tails, the error function and the exponential integral.
//!
//! Φ, Q and erf all route through one complementary-error-function kernel
//! (W. J. Cody's rational Chebyshev approximations), so the far tails keep
//! full relative precision instead of being formed as `1 - Φ`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// |x| <= 0.46875
const ERF_A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_16,
    377.485_237_685_302,
    3_209.377_589_138_469_5,
    0.185_777_706_184_603_15,
];
const ERF_B: [f64; 4] = [
    23.601_290_952_344_12,
    244.024_637_934_444_17,
    1_282.616_526_077_372_3,
    2_844.236_833_439_170_6,
];

// 0.46875 < |x| <= 4
const ERFC_C: [f64; 9] = [
    0.564_188_496_988_670_1,
    8.883_149_794_388_376,
    66.119_190_637_141_63,
    298.635_138_197_400_1,
    881.952_221_241_769_1,
    1_712.047_612_634_070_6,
    2_051.078_377_826_071_6,
    1_230.339_354_797_997_2,
    2.153_115_354_744_038_5e-8,
];
const ERFC_D: [f64; 8] = [
    15.744_926_110_709_835,
    117.693_950_891_312_5,
    537.181_101_862_009_9,
    1_621.389_574_566_690_2,
    3_290.799_235_733_459_6,
    4_362.619_090_143_247,
    3_439.367_674_143_721_6,
    1_230.339_354_803_749_4,
];

// |x| > 4
const ERFC_P: [f64; 6] = [
    0.305_326_634_961_232_36,
    0.360_344_899_949_804_45,
    0.125_781_726_111_229_26,
    0.016_083_785_148_742_275,
    6.587_491_615_298_378e-4,
    0.016_315_387_137_302_097,
];
const ERFC_Q: [f64; 5] = [
    2.568_520_192_289_822,
    1.872_952_849_923_460_4,
    0.527_905_102_951_428_4,
    0.060_518_341_312_441_32,
    0.002_335_204_976_268_691_8,
];

const ERF_SMALL: f64 = 0.468_75;
const ERFC_UNDERFLOW: f64 = 26.543;

#[inline]
fn erf_small(z: f64) -> f64 {
    ((((ERF_A[4] * z + ERF_A[0]) * z + ERF_A[1]) * z + ERF_A[2]) * z + ERF_A[3])
        / ((((z + ERF_B[0]) * z + ERF_B[1]) * z + ERF_B[2]) * z + ERF_B[3])
}

#[inline]
fn erfc_mid(y: f64) -> f64 {
    let mut num = ERFC_C[8] * y;
    let mut den = y;
    for i in 0..7 {
        num = (num + ERFC_C[i]) * y;
        den = (den + ERFC_D[i]) * y;
    }
    (num + ERFC_C[7]) / (den + ERFC_D[7])
}

#[inline]
fn erfc_tail_poly(z: f64) -> f64 {
    z * (((((ERFC_P[5] * z + ERFC_P[0]) * z + ERFC_P[1]) * z + ERFC_P[2]) * z + ERFC_P[3]) * z
        + ERFC_P[4])
        / (((((z + ERFC_Q[0]) * z + ERFC_Q[1]) * z + ERFC_Q[2]) * z + ERFC_Q[3]) * z + ERFC_Q[4])
}

/// `exp(-y*y)` evaluated in two pieces so the rounding of `y*y` does not
/// leak into the relative error for large `y`.
#[inline]
fn exp_neg_square(y: f64) -> f64 {
    let head = (y * 16.0).trunc() / 16.0;
    (-head * head).exp() * (-(y - head) * (y + head)).exp()
}

/// `erfc(|x|)` for `|x| > 0.46875`.
fn erfc_abs(y: f64) -> f64 {
    if y >= ERFC_UNDERFLOW {
        0.0
    } else if y <= 4.0 {
        erfc_mid(y) * exp_neg_square(y)
    } else {
        (FRAC_1_SQRT_PI - erfc_tail_poly(1.0 / (y * y))) / y * exp_neg_square(y)
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= ERF_SMALL {
        return 1.0 - x * erf_small(y * y);
    }
    let tail = erfc_abs(y);
    if x < 0.0 {
        2.0 - tail
    } else {
        tail
    }
}

/// Error function; odd, with `erf(±∞) = ±1`.
pub fn erf(x: f64) -> f64 {
    let y = x.abs();
    if y <= ERF_SMALL {
        return x * erf_small(y * y);
    }
    let tail = erfc_abs(y);
    if x < 0.0 {
        tail - 1.0
    } else {
        1.0 - tail
    }
}

/// Standard normal CDF Φ(x).
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Gaussian tail Q(x) = 1 − Φ(x), computed without cancellation.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Density of N(0, sigma²) at `x`.
pub fn normal_pdf(x: f64, sigma: f64) -> f64 {
    std_normal_pdf(x / sigma) / sigma
}

/// Two-exponential approximation of the Gaussian tail,
/// `Q(x) ≈ e^{-x²/2}/12 + e^{-2x²/3}/4`, valid on `x ≥ 0`.
pub fn chiani_q_approx(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain {
            function: "chiani_q_approx",
            value: x,
            expected: "x >= 0",
        });
    }
    let x2 = x * x;
    Ok((-0.5 * x2).exp() / 12.0 + 0.25 * (-2.0 * x2 / 3.0).exp())
}

fn check_e1_domain(function: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function,
            value: x,
            expected: "0 < x < inf",
        })
    }
}

/// Power series of E₁ about zero; used for `x <= 1`.
fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        let k = k as f64;
        term *= -x / k;
        let contrib = term / k;
        sum += contrib;
        if contrib.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Continued fraction for `e^x E₁(x)`, modified Lentz; used for `x > 1`.
fn e1_scaled_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Exponential integral `E₁(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    check_e1_domain("exp_integral_e1", x)?;
    Ok(if x <= 1.0 {
        e1_series(x)
    } else {
        e1_scaled_fraction(x) * (-x).exp()
    })
}

/// `e^x E₁(x)`, finite for every `x > 0` (no overflow at large `x`).
pub fn scaled_exp_integral_e1(x: f64) -> Result<f64> {
    check_e1_domain("scaled_exp_integral_e1", x)?;
    Ok(if x <= 1.0 {
        x.exp() * e1_series(x)
    } else {
        e1_scaled_fraction(x)
    })
}
