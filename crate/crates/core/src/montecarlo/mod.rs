//! Link-level simulator: superposition, Rayleigh fading, AWGN and a hard
//! far-user decision at the near user.
//!
//! Samples are split into fixed-size chunks. Chunk `c` draws from its own
//! substream `(seed, c)` and owns its accumulators; results are merged in
//! chunk order with compensated sums, so estimates are bit-identical under
//! sequential and parallel execution.

mod accum;
mod histogram;
mod rng;

pub use accum::{CompensatedSum, McEstimate, Moments};
pub use histogram::{histogram_distance, ConditionalHistogram, HistVariable, HistogramDistance};
pub use rng::ChunkRng;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::postsic_bpsk::{
    fading_support, in_success_region, noise_support, second_moment_w, second_moment_z, CurveBranch,
};
use crate::postsic_qpsk::QuadrantLevels;
use crate::scenario::{bpsk_constellation, ConstellationPoint, Scenario};

pub const DEFAULT_SAMPLES: u64 = 10_000_000;
pub const DEFAULT_CHUNK: u64 = 1 << 20;
pub const DEFAULT_BINS: usize = 200;
pub const DEFAULT_SEED: u64 = 0x5eed_2024;
pub const MIN_SAMPLES: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub chunk: u64,
    pub bins: usize,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            chunk: DEFAULT_CHUNK,
            bins: DEFAULT_BINS,
            execution: Execution::default(),
        }
    }
}

impl McConfig {
    /// Default chunking, shrunk to `samples` when that is smaller.
    pub fn new(samples: u64, seed: u64) -> Result<Self> {
        let cfg = McConfig {
            samples,
            seed,
            chunk: DEFAULT_CHUNK.min(samples.max(1)),
            ..McConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::invalid("samples", "must be at least 1000"));
        }
        if self.chunk == 0 || self.chunk > self.samples {
            return Err(Error::invalid("chunk", "must be in 1..=samples"));
        }
        if self.bins == 0 {
            return Err(Error::invalid("bins", "must be positive"));
        }
        Ok(())
    }

    pub fn chunk_count(&self) -> usize {
        self.samples.div_ceil(self.chunk) as usize
    }

    fn chunk_len(&self, c: usize) -> u64 {
        let start = c as u64 * self.chunk;
        self.chunk.min(self.samples - start)
    }
}

/// Runs `step` once per sample, chunk by chunk, and returns the chunk
/// accumulators in chunk order.
fn run_chunks<A, I, S>(cfg: &McConfig, init: I, step: S) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    S: Fn(&mut ChunkRng, &mut A) + Sync + Send,
{
    cfg.execution.map_collect(cfg.chunk_count(), |c| {
        let mut rng = ChunkRng::new(cfg.seed, c as u64);
        let mut acc = init();
        for _ in 0..cfg.chunk_len(c) {
            step(&mut rng, &mut acc);
        }
        acc
    })
}

/// The histograms collected by [`simulate_bpsk_branch_stats`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchHistograms {
    pub fading_success: ConditionalHistogram,
    pub fading_failure: ConditionalHistogram,
    pub fading_all: ConditionalHistogram,
    pub noise_success: ConditionalHistogram,
    pub noise_failure: ConditionalHistogram,
    pub noise_all: ConditionalHistogram,
}

impl BranchHistograms {
    fn new(s: &Scenario, x: &ConstellationPoint, bins: usize) -> Result<Self> {
        let fading = |b: CurveBranch| {
            let (lo, hi) = fading_support(s, x, b);
            ConditionalHistogram::new(b, HistVariable::Fading, lo, hi, bins)
        };
        let (nlo, nhi) = noise_support(s);
        let noise = |b: CurveBranch| ConditionalHistogram::new(b, HistVariable::NoiseReal, nlo, nhi, bins);
        Ok(BranchHistograms {
            fading_success: fading(CurveBranch::Success)?,
            fading_failure: fading(CurveBranch::Failure)?,
            fading_all: fading(CurveBranch::Unconditional)?,
            noise_success: noise(CurveBranch::Success)?,
            noise_failure: noise(CurveBranch::Failure)?,
            noise_all: noise(CurveBranch::Unconditional)?,
        })
    }

    fn all(&self) -> [&ConditionalHistogram; 6] {
        [
            &self.fading_success,
            &self.fading_failure,
            &self.fading_all,
            &self.noise_success,
            &self.noise_failure,
            &self.noise_all,
        ]
    }

    fn all_mut(&mut self) -> [&mut ConditionalHistogram; 6] {
        [
            &mut self.fading_success,
            &mut self.fading_failure,
            &mut self.fading_all,
            &mut self.noise_success,
            &mut self.noise_failure,
            &mut self.noise_all,
        ]
    }

    fn merge(&mut self, other: &BranchHistograms) -> Result<()> {
        for (a, b) in self.all_mut().into_iter().zip(other.all()) {
            a.merge(b)?;
        }
        Ok(())
    }

    pub fn get(&self, branch: CurveBranch, variable: HistVariable) -> Option<&ConditionalHistogram> {
        self.all()
            .into_iter()
            .find(|h| h.branch == branch && h.variable == variable)
    }
}

/// Empirical post-SIC statistics for one fixed symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchStats {
    pub point: ConstellationPoint,
    pub n: u64,
    pub successes: u64,
    pub failures: u64,
    pub p_success: McEstimate,
    pub mean_w: McEstimate,
    pub mean_z: McEstimate,
    /// `E[W²]`, the noise second moment on the success branch.
    pub m2_w: McEstimate,
    /// `E[Z²]`, the noise second moment on the failure branch.
    pub m2_z: McEstimate,
    pub histograms: BranchHistograms,
}

struct BranchAcc {
    w: Moments,
    w2: Moments,
    z: Moments,
    z2: Moments,
    hist: BranchHistograms,
}

pub fn simulate_bpsk_branch_stats(s: &Scenario, x: &ConstellationPoint, cfg: &McConfig) -> Result<BranchStats> {
    cfg.validate()?;
    let template = BranchHistograms::new(s, x, cfg.bins)?;
    let (omega, sigma) = (s.omega(), s.sigma_n());
    let chunks = run_chunks(
        cfg,
        || BranchAcc {
            w: Moments::default(),
            w2: Moments::default(),
            z: Moments::default(),
            z2: Moments::default(),
            hist: template.clone(),
        },
        |rng, acc| {
            let beta = rng.rayleigh(omega);
            let n = rng.normal(sigma);
            acc.hist.fading_all.record(beta);
            acc.hist.noise_all.record(n);
            if in_success_region(x, beta, n) {
                acc.w.push(n);
                acc.w2.push(n * n);
                acc.hist.fading_success.record(beta);
                acc.hist.noise_success.record(n);
            } else {
                acc.z.push(n);
                acc.z2.push(n * n);
                acc.hist.fading_failure.record(beta);
                acc.hist.noise_failure.record(n);
            }
        },
    );
    let mut it = chunks.into_iter();
    let mut total = it.next().expect("at least one chunk");
    for c in it {
        total.w.merge(&c.w);
        total.w2.merge(&c.w2);
        total.z.merge(&c.z);
        total.z2.merge(&c.z2);
        total.hist.merge(&c.hist)?;
    }
    let successes = total.w.n;
    let failures = total.z.n;
    Ok(BranchStats {
        point: *x,
        n: cfg.samples,
        successes,
        failures,
        p_success: McEstimate::from_proportion(successes, cfg.samples),
        mean_w: total.w.estimate(),
        mean_z: total.z.estimate(),
        m2_w: total.w2.estimate(),
        m2_z: total.z2.estimate(),
        histograms: total.hist,
    })
}

/// Outage and ergodic-capacity estimates from one simulated run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkEstimate {
    pub outage: McEstimate,
    pub ec: McEstimate,
    pub success_fraction: McEstimate,
}

#[derive(Default)]
struct LinkAcc {
    outages: u64,
    successes: u64,
    rate: Moments,
}

/// Each sample draws an equiprobable symbol, a fade and a noise value,
/// classifies the SIC outcome and evaluates the branch SINR
/// `α₂β²/E[W²]` (success) or `α₂β²/(4α₁β² + E[Z²])` (failure) with the
/// ensemble moments of that symbol.
pub fn simulate_bpsk_link(s: &Scenario, cfg: &McConfig) -> Result<LinkEstimate> {
    cfg.validate()?;
    let points = bpsk_constellation(s);
    let m2w = points.map(|x| second_moment_w(s, &x));
    let m2z = points.map(|x| second_moment_z(s, &x));
    let (a1, a2) = (s.alpha1(), s.alpha2());
    let (omega, sigma, th) = (s.omega(), s.sigma_n(), s.gamma_th());
    let chunks = run_chunks(cfg, LinkAcc::default, |rng, acc| {
        let k = (rng.next_u64() & 3) as usize;
        let beta = rng.rayleigh(omega);
        let n = rng.normal(sigma);
        let b2 = beta * beta;
        let sinr = if in_success_region(&points[k], beta, n) {
            acc.successes += 1;
            a2 * b2 / m2w[k]
        } else {
            a2 * b2 / (4.0 * a1 * b2 + m2z[k])
        };
        if sinr < th {
            acc.outages += 1;
        }
        acc.rate.push(sinr.ln_1p() * std::f64::consts::LOG2_E);
    });
    let mut total = LinkAcc::default();
    for c in &chunks {
        total.outages += c.outages;
        total.successes += c.successes;
        total.rate.merge(&c.rate);
    }
    Ok(LinkEstimate {
        outage: McEstimate::from_proportion(total.outages, cfg.samples),
        ec: total.rate.estimate(),
        success_fraction: McEstimate::from_proportion(total.successes, cfg.samples),
    })
}

pub fn simulate_bpsk_outage(s: &Scenario, cfg: &McConfig) -> Result<McEstimate> {
    Ok(simulate_bpsk_link(s, cfg)?.outage)
}

pub fn simulate_bpsk_ec(s: &Scenario, cfg: &McConfig) -> Result<McEstimate> {
    Ok(simulate_bpsk_link(s, cfg)?.ec)
}

/// Empirical success-branch statistics of the complex noise for one QPSK
/// rail combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpskStats {
    pub levels: QuadrantLevels,
    pub n: u64,
    pub p_success: McEstimate,
    pub mean_re: McEstimate,
    pub mean_im: McEstimate,
    pub m2_real: McEstimate,
    pub m2_imag: McEstimate,
    /// `E[|W|²]`
    pub m2_w: McEstimate,
    /// `E[|W|²] - |E[W]|²`
    pub var_w: f64,
}

#[derive(Default)]
struct QpskAcc {
    re: Moments,
    im: Moments,
    re2: Moments,
    im2: Moments,
    abs2: Moments,
}

pub fn simulate_qpsk_success_stats(s: &Scenario, q: &QuadrantLevels, cfg: &McConfig) -> Result<QpskStats> {
    cfg.validate()?;
    let (omega, sigma) = (s.omega(), s.sigma_n());
    let (li, lj) = (q.lambda_i, q.lambda_j);
    let chunks = run_chunks(cfg, QpskAcc::default, |rng, acc| {
        let beta = rng.rayleigh(omega);
        let nr = rng.normal(sigma);
        let ni = rng.normal(sigma);
        if beta * li + nr >= 0.0 && beta * lj + ni >= 0.0 {
            acc.re.push(nr);
            acc.im.push(ni);
            acc.re2.push(nr * nr);
            acc.im2.push(ni * ni);
            acc.abs2.push(nr * nr + ni * ni);
        }
    });
    let mut total = QpskAcc::default();
    for c in &chunks {
        total.re.merge(&c.re);
        total.im.merge(&c.im);
        total.re2.merge(&c.re2);
        total.im2.merge(&c.im2);
        total.abs2.merge(&c.abs2);
    }
    let mean_re = total.re.estimate();
    let mean_im = total.im.estimate();
    let m2_w = total.abs2.estimate();
    Ok(QpskStats {
        levels: *q,
        n: cfg.samples,
        p_success: McEstimate::from_proportion(total.abs2.n, cfg.samples),
        mean_re,
        mean_im,
        m2_real: total.re2.estimate(),
        m2_imag: total.im2.estimate(),
        m2_w,
        var_w: m2_w.mean - mean_re.mean.powi(2) - mean_im.mean.powi(2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outage::outage_total;
    use crate::postsic_bpsk::sic_success_prob;

    fn cfg(samples: u64) -> McConfig {
        McConfig::new(samples, 42).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::new(999, 1).is_err());
        let mut c = cfg(5000);
        c.chunk = 6000;
        assert!(c.validate().is_err());
        c.chunk = 2048;
        assert_eq!(c.chunk_count(), 3);
        assert_eq!(c.chunk_len(2), 5000 - 4096);
    }

    #[test]
    fn branch_counts_add_up() {
        let s = Scenario::new(0.8, 0.0, 1.0, 1.0).unwrap();
        let x = bpsk_constellation(&s)[3];
        let mut c = cfg(20_000);
        c.chunk = 3000;
        let st = simulate_bpsk_branch_stats(&s, &x, &c).unwrap();
        assert_eq!(st.successes + st.failures, 20_000);
        assert_eq!(st.histograms.fading_success.total(), st.successes);
        assert_eq!(st.histograms.noise_failure.total(), st.failures);
        assert_eq!(st.histograms.noise_all.total(), 20_000);
        assert!(st.p_success.within(sic_success_prob(&s, &x), 4.0));
    }

    #[test]
    fn modes_are_bit_identical() {
        let s = Scenario::new(0.75, 10.0, 1.0, 1.0).unwrap();
        let mut c = cfg(30_000);
        c.chunk = 4096;
        let a = simulate_bpsk_link(&s, &c.with_execution(Execution::Sequential)).unwrap();
        let b = simulate_bpsk_link(&s, &c.with_execution(Execution::Parallel)).unwrap();
        assert_eq!(a, b);
        assert!(a.outage.within(outage_total(&s), 4.0));
    }

    #[test]
    fn qpsk_stats_shape() {
        let s = Scenario::new(0.8, 0.0, 1.0, 1.0).unwrap();
        let q = crate::postsic_qpsk::table_rails(&s)[0];
        let st = simulate_qpsk_success_stats(&s, &q, &cfg(20_000)).unwrap();
        assert!(st.p_success.mean > 0.25 && st.p_success.mean < 1.0);
        assert!(st.var_w <= st.m2_w.mean);
        assert!((st.m2_real.mean + st.m2_imag.mean - st.m2_w.mean).abs() < 1e-12);
    }
}
