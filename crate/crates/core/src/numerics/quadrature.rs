//! Gauss–Laguerre and globally adaptive Gauss–Kronrod quadrature.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Default absolute tolerance for analytic integrals.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Gauss–Laguerre order used for semi-infinite integrals.
pub const DEFAULT_LAGUERRE_ORDER: usize = 64;

const MAX_SUBINTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    GaussLaguerre,
    AdaptiveInterval,
}

/// Nodes and weights of a fixed rule.
///
/// For `GaussLaguerre` the weights carry the `e^{-t}` weight function, so
/// `Σ w_i g(t_i) ≈ ∫₀^∞ e^{-t} g(t) dt`. For `AdaptiveInterval` the rule is
/// the 15-point Kronrod rule on `[-1, 1]` used by [`integrate_adaptive`].
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
}

/// Result of a quadrature together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct LaguerreTable {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `w_i e^{t_i}`, for integrating `f` directly rather than `e^{-t} g`.
    scaled_weights: Vec<f64>,
}

/// `(L_n(z), L_{n-1}(z), L'_n(z))` by the three-term recurrence.
fn laguerre_eval(n: usize, z: f64) -> (f64, f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
    }
    (p1, p2, n as f64 * (p1 - p2) / z)
}

fn laguerre_table(n: usize) -> LaguerreTable {
    assert!(n >= 1, "Gauss-Laguerre order must be positive");
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut log_weights = vec![0.0; n];
    let mut z = 0.0;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
            }
        };
        for _ in 0..100 {
            let (p1, _, pp) = laguerre_eval(n, z);
            let step = p1 / pp;
            z -= step;
            if step.abs() <= 1e-15 * z.abs() {
                break;
            }
        }
        let (_, p2, pp) = laguerre_eval(n, z);
        nodes[i] = z;
        // w = -1 / (n L'_n(z) L_{n-1}(z)), kept in log space for large n
        log_weights[i] = -(pp.abs().ln() + nf.ln() + p2.abs().ln());
    }
    let weights = log_weights.iter().map(|lw| lw.exp()).collect();
    let scaled_weights = log_weights
        .iter()
        .zip(&nodes)
        .map(|(lw, t)| (lw + t).exp())
        .collect();
    LaguerreTable {
        nodes,
        weights,
        scaled_weights,
    }
}

/// The default order and its double, built once per process.
fn cached_laguerre(doubled: bool) -> &'static LaguerreTable {
    static LOW: OnceLock<LaguerreTable> = OnceLock::new();
    static HIGH: OnceLock<LaguerreTable> = OnceLock::new();
    if doubled {
        HIGH.get_or_init(|| laguerre_table(2 * DEFAULT_LAGUERRE_ORDER))
    } else {
        LOW.get_or_init(|| laguerre_table(DEFAULT_LAGUERRE_ORDER))
    }
}

// 15-point Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

impl QuadratureRule {
    /// Gauss–Laguerre rule of order `n` (weight `e^{-t}` on `[0, ∞)`).
    pub fn gauss_laguerre(n: usize) -> Self {
        let t = laguerre_table(n);
        QuadratureRule {
            nodes: t.nodes,
            weights: t.weights,
            kind: RuleKind::GaussLaguerre,
        }
    }

    /// The 15-point Kronrod rule on `[-1, 1]`.
    pub fn gauss_kronrod15() -> Self {
        let mut nodes = Vec::with_capacity(15);
        let mut weights = Vec::with_capacity(15);
        for k in 0..7 {
            nodes.push(-XGK[k]);
            weights.push(WGK[k]);
        }
        nodes.push(0.0);
        weights.push(WGK[7]);
        for k in (0..7).rev() {
            nodes.push(XGK[k]);
            weights.push(WGK[k]);
        }
        QuadratureRule {
            nodes,
            weights,
            kind: RuleKind::AdaptiveInterval,
        }
    }

    /// `Σ w_i f(t_i)`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// QUADPACK-style 15-point Gauss–Kronrod on one interval.
/// Returns `(value, error estimate)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    res_abs *= h;
    res_asc *= h;
    let value = res_k * half;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod over the intervals delimited by `points`
/// (sorted, at least two). Stops when the summed error estimate is at most
/// `max(abs_tol, rel_tol·|value|)`.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Integral> {
    if points.len() < 2 {
        return Err(Error::invalid("points", "need at least two breakpoints"));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(a < b) {
            if a == b {
                continue;
            }
            return Err(Error::invalid("points", format!("breakpoints not increasing at {a} > {b}")));
        }
        let (value, error) = gk15(&f, a, b);
        evaluations += 15;
        heap.push(Segment { a, b, value, error });
    }
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Integral {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() >= MAX_SUBINTERVALS {
            return Err(Error::NonConvergence {
                estimate: error,
                tolerance: abs_tol.max(rel_tol * value.abs()),
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // interval exhausted at machine resolution; accept what we have
            heap.push(worst);
            let (value, error) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
            return Err(Error::NonConvergence {
                estimate: error,
                tolerance: abs_tol.max(rel_tol * value.abs()),
            });
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evaluations += 30;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
}

/// Adaptive quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Integral> {
    if !(a < b) {
        return Err(Error::invalid("interval", format!("require a < b, got [{a}, {b}]")));
    }
    integrate_piecewise(f, &[a, b], tol, 0.0)
}

/// Breakpoints `0, hi·2^{-levels}, …, hi/2, hi`, which resolve integrands
/// whose features sit at unknown scales below `hi`.
pub fn geometric_breakpoints(hi: f64, levels: usize) -> Vec<f64> {
    let mut pts = Vec::with_capacity(levels + 2);
    pts.push(0.0);
    for k in (0..=levels).rev() {
        pts.push(hi * 0.5f64.powi(k as i32));
    }
    pts
}

/// `∫₀^∞ f(t) dt`.
///
/// Tries Gauss–Laguerre at orders 64 and 128 (with `e^t` reweighting); if the
/// two disagree by more than `tol`, falls back to adaptive quadrature on the
/// map `t = u/(1-u)` with breakpoints spread over several decades of `t`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, tol: f64) -> Result<Integral> {
    let gl = |doubled: bool| {
        let t = cached_laguerre(doubled);
        t.nodes
            .iter()
            .zip(&t.scaled_weights)
            .map(|(&x, &w)| w * f(x))
            .sum::<f64>()
    };
    let low = gl(false);
    let high = gl(true);
    let gap = (high - low).abs();
    if gap <= tol && high.is_finite() {
        return Ok(Integral {
            value: high,
            error: gap,
            evaluations: 3 * DEFAULT_LAGUERRE_ORDER,
        });
    }
    let mapped = |u: f64| {
        let one_minus = 1.0 - u;
        let t = u / one_minus;
        let v = f(t) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let mut pts = vec![0.0];
    for k in -12..=12 {
        let t = 2f64.powi(k);
        pts.push(t / (1.0 + t));
    }
    pts.push(1.0);
    let mut out = integrate_piecewise(mapped, &pts, tol, 0.0)?;
    out.evaluations += 3 * DEFAULT_LAGUERRE_ORDER;
    Ok(out)
}
