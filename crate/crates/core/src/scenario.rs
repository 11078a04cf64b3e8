//! System parameters and the superposed BPSK constellation.

use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Two-user downlink parameters. Only `alpha1` is stored; `alpha2` is
/// always `1 - alpha1`, and `σ_n²`, `γ_th` are recomputed on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    alpha1: f64,
    gamma_bar: f64,
    omega: f64,
    rate: f64,
}

impl Scenario {
    /// Builds a scenario from an average SNR given in dB.
    pub fn new(alpha1: f64, snr_db: f64, omega: f64, rate: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::invalid("snr_db", format!("must be finite, got {snr_db}")));
        }
        Self::from_linear(alpha1, db_to_linear(snr_db), omega, rate)
    }

    pub fn from_linear(alpha1: f64, gamma_bar: f64, omega: f64, rate: f64) -> Result<Self> {
        if !(alpha1 > 0.5 && alpha1 < 1.0) {
            return Err(Error::invalid(
                "alpha1",
                format!("must satisfy 0.5 < alpha1 < 1, got {alpha1}"),
            ));
        }
        if !(gamma_bar > 0.0 && gamma_bar.is_finite()) {
            return Err(Error::invalid(
                "gamma_bar",
                format!("must be positive and finite, got {gamma_bar}"),
            ));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid(
                "omega",
                format!("must be positive and finite, got {omega}"),
            ));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::invalid(
                "rate",
                format!("must be positive and finite, got {rate}"),
            ));
        }
        Ok(Scenario {
            alpha1,
            gamma_bar,
            omega,
            rate,
        })
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        1.0 - self.alpha1
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Average SNR γ̄ = Ω/σ_n², linear.
    pub fn gamma_bar(&self) -> f64 {
        self.gamma_bar
    }

    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.gamma_bar)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn sigma_n_sq(&self) -> f64 {
        self.omega / self.gamma_bar
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n_sq().sqrt()
    }

    /// `γ_th = 2^R - 1`, accurate for small `R`.
    pub fn gamma_th(&self) -> f64 {
        (self.rate * LN_2).exp_m1()
    }

    pub fn with_alpha1(&self, alpha1: f64) -> Result<Self> {
        Self::from_linear(alpha1, self.gamma_bar, self.omega, self.rate)
    }

    pub fn with_snr_db(&self, snr_db: f64) -> Result<Self> {
        Self::new(self.alpha1, snr_db, self.omega, self.rate)
    }

    pub fn with_rate(&self, rate: f64) -> Result<Self> {
        Self::from_linear(self.alpha1, self.gamma_bar, self.omega, rate)
    }
}

/// One superposed symbol `X_ij = ī√α₁ + j̄√α₂` with `ī = 2i-1`, `j̄ = 2j-1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstellationPoint {
    pub far_bit: u8,
    pub near_bit: u8,
    pub value: f64,
}

impl ConstellationPoint {
    pub fn new(s: &Scenario, far_bit: u8, near_bit: u8) -> Result<Self> {
        if far_bit > 1 || near_bit > 1 {
            return Err(Error::invalid("bits", format!("bits must be 0 or 1, got ({far_bit}, {near_bit})")));
        }
        let sign = |b: u8| 2.0 * f64::from(b) - 1.0;
        Ok(ConstellationPoint {
            far_bit,
            near_bit,
            value: sign(far_bit) * s.alpha1().sqrt() + sign(near_bit) * s.alpha2().sqrt(),
        })
    }

    /// All four symbols are equiprobable.
    pub fn prob(&self) -> f64 {
        0.25
    }

    pub fn magnitude(&self) -> f64 {
        self.value.abs()
    }

    /// Sign of the far-user symbol, i.e. the sign of `X_ij` when `α₁ > 1/2`.
    pub fn far_symbol(&self) -> f64 {
        if self.far_bit == 1 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn label(&self) -> String {
        format!("X{}{}", self.far_bit, self.near_bit)
    }
}

impl fmt::Display for ConstellationPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={:.6}", self.label(), self.value)
    }
}

/// `[X00, X01, X10, X11]`.
pub fn bpsk_constellation(s: &Scenario) -> [ConstellationPoint; 4] {
    let p = |i, j| ConstellationPoint::new(s, i, j).expect("bits in range");
    [p(0, 0), p(0, 1), p(1, 0), p(1, 1)]
}

/// `[X11, X10]`: one representative per distinct `|X_ij|`.
pub fn distinct_points(s: &Scenario) -> [ConstellationPoint; 2] {
    let c = bpsk_constellation(s);
    [c[3], c[2]]
}

/// Rayleigh density `(2β/Ω) e^{-β²/Ω}` on `β ≥ 0`.
pub fn rayleigh_pdf(beta: f64, omega: f64) -> f64 {
    if beta < 0.0 {
        return 0.0;
    }
    2.0 * beta / omega * (-beta * beta / omega).exp()
}

/// Residual-interference model of the conventional imperfect-SIC analysis.
/// `zeta` may exceed 1; `eta = √zeta` is only reported when `zeta ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegacyModel {
    zeta: f64,
}

impl LegacyModel {
    pub fn from_zeta(zeta: f64) -> Result<Self> {
        if !(zeta >= 0.0 && zeta.is_finite()) {
            return Err(Error::invalid("zeta", format!("must be finite and >= 0, got {zeta}")));
        }
        Ok(LegacyModel { zeta })
    }

    pub fn from_eta(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::invalid("eta", format!("must lie in [0, 1], got {eta}")));
        }
        Ok(LegacyModel { zeta: eta * eta })
    }

    /// Perfect cancellation.
    pub fn perfect() -> Self {
        LegacyModel { zeta: 0.0 }
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn eta(&self) -> Option<f64> {
        (self.zeta <= 1.0).then(|| self.zeta.sqrt())
    }
}
