//! Independent reference implementation used by the integration tests.
//!
//! Everything here is built from first principles with its own quadrature
//! (double-exponential tanh-sinh) and `libm::erfc`, and shares no code with
//! the library beyond the scenario parameters it is handed.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, LN_2, PI, SQRT_2};

pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

pub fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

pub fn gauss(x: f64, sigma: f64) -> f64 {
    (-0.5 * (x / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt())
}

/// Tanh-sinh rule on `[a, b]` with step `h` in the transformed variable.
pub fn tanh_sinh_h<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, h: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let d = 0.5 * (b - a);
    let n = (3.5 / h).ceil() as i64;
    let mut sum = 0.0;
    for k in -n..=n {
        let t = k as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cu * cu);
        // distance to the nearer endpoint, computed without cancellation
        let gap = d * 2.0 / ((2.0 * u.abs()).exp() + 1.0);
        let x = if u >= 0.0 { b - gap } else { a + gap };
        if x <= a || x >= b || w == 0.0 {
            continue;
        }
        sum += w * f(x);
    }
    sum * d * h
}

/// Tanh-sinh with step halving until two levels agree.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mut h = 1.0 / 8.0;
    let mut prev = tanh_sinh_h(f, a, b, h);
    while h > 1.0 / 256.0 {
        h *= 0.5;
        let cur = tanh_sinh_h(f, a, b, h);
        if (cur - prev).abs() <= 1e-14 * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Sum of tanh-sinh integrals over consecutive breakpoints.
pub fn integrate<F: Fn(f64) -> f64>(f: F, pts: &[f64]) -> f64 {
    pts.windows(2).map(|p| tanh_sinh(&f, p[0], p[1])).sum()
}

/// `0, s, 2s, 4s, ...` capped at `hi`.
pub fn doubling(s: f64, hi: f64) -> Vec<f64> {
    let mut v = vec![0.0];
    let mut p = s;
    while p < hi {
        v.push(p);
        p *= 2.0;
    }
    v.push(hi);
    v
}

/// Plain parameters of one scenario. `sigma2 = omega / gamma`.
#[derive(Debug, Clone, Copy)]
pub struct Ref {
    pub a1: f64,
    pub gamma: f64,
    pub omega: f64,
    pub rate: f64,
}

impl Ref {
    pub fn new(a1: f64, snr_db: f64, omega: f64, rate: f64) -> Self {
        Ref {
            a1,
            gamma: 10f64.powf(snr_db / 10.0),
            omega,
            rate,
        }
    }

    pub fn a2(&self) -> f64 {
        1.0 - self.a1
    }

    pub fn sigma2(&self) -> f64 {
        self.omega / self.gamma
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2().sqrt()
    }

    pub fn gamma_th(&self) -> f64 {
        2f64.powf(self.rate) - 1.0
    }

    /// `|X|` for the two distinct superposed amplitudes.
    pub fn mags(&self) -> [f64; 2] {
        [self.a1.sqrt() + self.a2().sqrt(), self.a1.sqrt() - self.a2().sqrt()]
    }

    pub fn rayleigh(&self, b: f64) -> f64 {
        2.0 * b / self.omega * (-b * b / self.omega).exp()
    }

    fn fading_pts(&self, x: f64, hi: f64) -> Vec<f64> {
        let narrow = 1.0 / (1.0 / self.omega + x * x / (2.0 * self.sigma2())).sqrt();
        doubling(narrow / 16.0, hi)
    }

    fn fading_hi(&self) -> f64 {
        30.0 * self.omega.sqrt()
    }

    fn noise_pts(&self) -> Vec<f64> {
        let s = self.sigma();
        vec![-14.0 * s, -6.0 * s, -3.0 * s, -1.5 * s, -0.5 * s, 0.0, 0.5 * s, 1.5 * s, 3.0 * s, 6.0 * s, 14.0 * s]
    }

    /// `Pr(n > -β|X|)` averaged over Rayleigh `β`.
    pub fn p_s(&self, x: f64) -> f64 {
        let c = x / self.sigma();
        integrate(|b| self.rayleigh(b) * phi(c * b), &self.fading_pts(x, self.fading_hi()))
    }

    pub fn p_f(&self, x: f64) -> f64 {
        let c = x / self.sigma();
        integrate(|b| self.rayleigh(b) * q(c * b), &self.fading_pts(x, self.fading_hi()))
    }

    /// Unnormalized success-branch noise density: Gaussian times the
    /// probability that the fade keeps `βX + w` positive.
    pub fn w_weight(&self, x: f64, w: f64) -> f64 {
        let keep = if w >= 0.0 {
            1.0
        } else {
            (-w * w / (x * x * self.omega)).exp()
        };
        gauss(w, self.sigma()) * keep
    }

    pub fn z_weight(&self, x: f64, z: f64) -> f64 {
        if z >= 0.0 {
            return 0.0;
        }
        gauss(z, self.sigma()) * -(-z * z / (x * x * self.omega)).exp_m1()
    }

    pub fn m2_w(&self, x: f64) -> f64 {
        integrate(|w| w * w * self.w_weight(x, w), &self.noise_pts()) / self.p_s(x)
    }

    pub fn m2_z(&self, x: f64) -> f64 {
        integrate(|z| z * z * self.z_weight(x, z), &self.noise_pts()) / self.p_f(x)
    }

    pub fn eps_s(&self, x: f64) -> f64 {
        (self.gamma_th() * self.m2_w(x) / self.a2()).sqrt()
    }

    /// `Pr(α₂β²/E[W²] < γ_th | success)`.
    pub fn outage_s(&self, x: f64) -> f64 {
        let c = x / self.sigma();
        let eps = self.eps_s(x);
        integrate(|b| self.rayleigh(b) * phi(c * b), &self.fading_pts(x, eps)) / self.p_s(x)
    }

    /// `Pr(α₂β²/(4α₁β² + E[Z²]) < γ_th | failure)`.
    pub fn outage_f(&self, x: f64) -> f64 {
        let g = self.gamma_th();
        let margin = self.a2() - 4.0 * self.a1 * g;
        if margin <= 0.0 {
            return 1.0;
        }
        let eps = (g * self.m2_z(x) / margin).sqrt();
        let c = x / self.sigma();
        integrate(|b| self.rayleigh(b) * q(c * b), &self.fading_pts(x, eps)) / self.p_f(x)
    }

    pub fn outage_total(&self) -> f64 {
        self.mags()
            .iter()
            .map(|&x| 0.5 * (self.p_s(x) * self.outage_s(x) + self.p_f(x) * self.outage_f(x)))
            .sum()
    }

    pub fn ec_total(&self) -> f64 {
        let (a1, a2) = (self.a1, self.a2());
        self.mags()
            .iter()
            .map(|&x| {
                let c = x / self.sigma();
                let (mw, mz) = (self.m2_w(x), self.m2_z(x));
                let pts = self.fading_pts(x, self.fading_hi());
                let succ = integrate(|b| self.rayleigh(b) * phi(c * b) * (a2 * b * b / mw).ln_1p(), &pts);
                let fail = integrate(
                    |b| self.rayleigh(b) * q(c * b) * (a2 * b * b / (4.0 * a1 * b * b + mz)).ln_1p(),
                    &pts,
                );
                0.5 * (succ + fail) / LN_2
            })
            .sum()
    }

    /// Conventional capacity: unconditional Rayleigh fade, Gaussian noise and
    /// a residual interference power `ζα₁β²`.
    pub fn legacy_ec(&self, zeta: f64) -> f64 {
        let (a1, a2, s2) = (self.a1, self.a2(), self.sigma2());
        let pts = doubling(self.omega.sqrt() / 64.0, self.fading_hi());
        integrate(|b| self.rayleigh(b) * (a2 * b * b / (zeta * a1 * b * b + s2)).ln_1p() / LN_2, &pts)
    }

    /// `∫₀^∞ β log₂(1 + Aβ²) e^{-β²/Ω} dβ`.
    pub fn log_kernel(&self, a: f64) -> f64 {
        let pts = doubling(self.omega.sqrt() / 64.0, self.fading_hi());
        integrate(|b| b * (a * b * b).ln_1p() / LN_2 * (-b * b / self.omega).exp(), &pts)
    }

    /// Rail amplitudes `(√α₁ ± √α₂)/√2` of the QPSK constellation.
    pub fn rail(&self, plus: bool) -> f64 {
        let s = if plus { 1.0 } else { -1.0 };
        (self.a1.sqrt() + s * self.a2().sqrt()) / SQRT_2
    }

    /// `E_β[Φ(βλ_i/σ)Φ(βλ_j/σ)]`.
    pub fn qpsk_p_s(&self, li: f64, lj: f64) -> f64 {
        let s = self.sigma();
        let pts = self.fading_pts(li.min(lj) * SQRT_2, self.fading_hi());
        integrate(|b| self.rayleigh(b) * phi(b * li / s) * phi(b * lj / s), &pts)
    }

    /// `E[W_R² | both rails correct]` as a genuine double integral over the
    /// fade and the real noise component.
    pub fn qpsk_m2_real(&self, li: f64, lj: f64) -> f64 {
        let s = self.sigma();
        let pts = self.fading_pts(li.min(lj) * SQRT_2, self.fading_hi());
        let h = 1.0 / 32.0;
        let inner = |b: f64| {
            let lo = -b * li;
            let f = |w: f64| w * w * gauss(w, s);
            let mut edges = vec![(-14.0 * s).max(lo)];
            for e in [-3.0 * s, 0.0, 3.0 * s, 14.0 * s] {
                if e > edges[edges.len() - 1] {
                    edges.push(e);
                }
            }
            edges.windows(2).map(|p| tanh_sinh_h(&f, p[0], p[1], h)).sum::<f64>()
        };
        let outer = |b: f64| self.rayleigh(b) * phi(b * lj / s) * inner(b);
        let total: f64 = pts.windows(2).map(|p| tanh_sinh_h(&outer, p[0], p[1], h)).sum();
        total / self.qpsk_p_s(li, lj)
    }
}

/// `∫_{-∞}^0 w² N(w; 0, a²) Φ(bw) dw`.
pub fn psi(a: f64, b: f64) -> f64 {
    let pts: Vec<f64> = [-16.0, -8.0, -4.0, -2.0, -1.0, -0.5, -0.25, 0.0].iter().map(|k| k * a).collect();
    integrate(|w| w * w * gauss(w, a) * phi(b * w), &pts)
}

/// `∫_x^∞ e^{-t}/t dt`.
pub fn e1(x: f64) -> f64 {
    let mut pts = vec![x];
    let mut p = x.max(1e-3);
    while p < x + 750.0 {
        p = (2.0 * p).max(p + 1.0);
        pts.push(p.min(x + 750.0));
    }
    integrate(|t| (-t).exp() / t, &pts)
}
