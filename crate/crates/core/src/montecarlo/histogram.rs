use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::postsic_bpsk::{CurveBranch, PdfCurve, Variable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistVariable {
    Fading,
    NoiseReal,
    NoiseImag,
}

impl HistVariable {
    fn matches(self, v: Variable) -> bool {
        matches!(
            (self, v),
            (HistVariable::Fading, Variable::Fading)
                | (HistVariable::NoiseReal, Variable::Noise)
                | (HistVariable::NoiseImag, Variable::Noise)
        )
    }
}

/// Fixed-edge histogram of one variable on one branch. Samples outside the
/// edges are tallied in `underflow`/`overflow`, so every recorded sample is
/// accounted for and the density is normalized by the full branch count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalHistogram {
    pub branch: CurveBranch,
    pub variable: HistVariable,
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl ConditionalHistogram {
    pub fn new(branch: CurveBranch, variable: HistVariable, lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("bins", "must be positive"));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("hi", "histogram edges must satisfy lo < hi"));
        }
        Ok(ConditionalHistogram {
            branch,
            variable,
            lo,
            hi,
            counts: vec![0; bins],
            underflow: 0,
            overflow: 0,
        })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        let w = self.width();
        (0..=self.bins()).map(|k| self.lo + w * k as f64).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.width();
        (0..self.bins()).map(|k| self.lo + w * (k as f64 + 0.5)).collect()
    }

    /// Bins are half-open `[e_k, e_{k+1})`; the top edge itself goes to the
    /// last bin.
    pub fn record(&mut self, v: f64) {
        if v < self.lo {
            self.underflow += 1;
        } else if v > self.hi {
            self.overflow += 1;
        } else {
            let k = (((v - self.lo) / self.width()) as usize).min(self.bins() - 1);
            self.counts[k] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    pub fn merge(&mut self, other: &ConditionalHistogram) -> Result<()> {
        if self.bins() != other.bins() || self.lo != other.lo || self.hi != other.hi {
            return Err(Error::SupportMismatch("cannot merge histograms with different edges".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        Ok(())
    }

    pub fn density(&self) -> Vec<f64> {
        let total = self.total();
        if total == 0 {
            return vec![0.0; self.bins()];
        }
        let scale = 1.0 / (total as f64 * self.width());
        self.counts.iter().map(|&c| c as f64 * scale).collect()
    }

    /// `center,density,count` rows with a `#` metadata line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# branch={:?} variable={:?} underflow={} overflow={} total={}",
            self.branch,
            self.variable,
            self.underflow,
            self.overflow,
            self.total()
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["center", "density", "count"])?;
        for ((c, d), n) in self.centers().iter().zip(self.density()).zip(&self.counts) {
            w.write_record([c.to_string(), d.to_string(), n.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramDistance {
    /// Largest per-bin density gap.
    pub sup: f64,
    /// `Σ |empirical - analytic|·width` over the bins.
    pub l1: f64,
}

const BIN_SUBSAMPLES: usize = 32;

/// Compares a histogram to the bin averages of an analytic curve. The
/// histogram's edges must lie inside the curve's support.
pub fn histogram_distance(h: &ConditionalHistogram, analytic: &PdfCurve) -> Result<HistogramDistance> {
    if h.branch != analytic.branch || !h.variable.matches(analytic.variable) {
        return Err(Error::SupportMismatch(format!(
            "histogram {:?}/{:?} vs curve {}",
            h.branch,
            h.variable,
            analytic.metadata()
        )));
    }
    let (lo, hi) = analytic.support();
    let slack = 1e-12 * (hi - lo);
    if h.lo < lo - slack || h.hi > hi + slack {
        return Err(Error::SupportMismatch(format!(
            "histogram [{}, {}] outside curve support [{lo}, {hi}]",
            h.lo, h.hi
        )));
    }
    let width = h.width();
    let step = width / BIN_SUBSAMPLES as f64;
    let mut sup = 0.0f64;
    let mut l1 = 0.0;
    for (k, emp) in h.density().into_iter().enumerate() {
        let left = h.lo + width * k as f64;
        let avg = (0..BIN_SUBSAMPLES)
            .map(|m| analytic.interpolate(left + step * (m as f64 + 0.5)))
            .sum::<f64>()
            / BIN_SUBSAMPLES as f64;
        let gap = (emp - avg).abs();
        sup = sup.max(gap);
        l1 += gap * width;
    }
    Ok(HistogramDistance { sup, l1 })
}
