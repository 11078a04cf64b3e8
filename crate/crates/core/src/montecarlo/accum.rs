use serde::{Deserialize, Serialize};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Count, sum and sum of squares of a sample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: CompensatedSum,
    pub sum_sq: CompensatedSum,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum.add(v);
        self.sum_sq.add(v * v);
    }

    pub fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
    }

    pub fn estimate(&self) -> McEstimate {
        McEstimate::from_moments(self.sum.value(), self.sum_sq.value(), self.n)
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl McEstimate {
    /// Binomial proportion with `√(p(1-p)/n)`.
    pub fn from_proportion(hits: u64, n: u64) -> Self {
        if n == 0 {
            return McEstimate { mean: f64::NAN, stderr: f64::NAN, n };
        }
        let p = hits as f64 / n as f64;
        McEstimate {
            mean: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            n,
        }
    }

    /// Sample mean with `s/√n`, `s` the unbiased sample deviation.
    pub fn from_moments(sum: f64, sum_sq: f64, n: u64) -> Self {
        if n == 0 {
            return McEstimate { mean: f64::NAN, stderr: f64::NAN, n };
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        McEstimate {
            mean,
            stderr: (var / nf).sqrt(),
            n,
        }
    }

    /// `|mean - v| / stderr`; zero when both sides agree exactly.
    pub fn z_score(&self, v: f64) -> f64 {
        let d = (self.mean - v).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }

    pub fn within(&self, v: f64, k_sigma: f64) -> bool {
        self.z_score(v) <= k_sigma
    }

    /// Score-test z for a proportion against a hypothesised `p`, using
    /// `√(p(1-p)/n)` rather than the empirical spread. Stays finite when the
    /// estimate has no hits at all.
    pub fn proportion_z_score(&self, p: f64) -> f64 {
        let d = (self.mean - p).abs();
        if d == 0.0 {
            return 0.0;
        }
        d / (p * (1.0 - p) / self.n as f64).sqrt()
    }

    pub fn proportion_within(&self, p: f64, k_sigma: f64) -> bool {
        self.proportion_z_score(p) <= k_sigma
    }
}
