//! Spectral and output-distribution statistics.

use crate::error::{Error, Result};
use crate::floquet::{amplitudes, FloquetSpectrum};
use crate::rmt::ReferenceDensity;

/// Porter-Thomas comparison: 48 uniform bins of `x = N p` on `[0, 12]`.
pub const PT_BINS: usize = 48;
pub const PT_RANGE: f64 = 12.0;
/// Eigenvector products: 60 bins of `|d|` on `(0, 6 / N]`.
pub const D_BINS: usize = 60;
pub const D_RANGE_TIMES_N: f64 = 6.0;

/// Fixed-bin histogram; samples outside the edges go to under/overflow
/// counters and still count towards `total`.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    underflow: u64,
    overflow: u64,
    total: u64,
}

impl Histogram {
    /// `bins` equal bins on `[lo, hi]`; the last bin is closed.
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(bins > 0 && hi > lo, "invalid histogram range");
        let w = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|k| lo + k as f64 * w).collect();
        edges.push(hi);
        Self {
            edges,
            counts: vec![0; bins],
            underflow: 0,
            overflow: 0,
            total: 0,
        }
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    pub fn underflow(&self) -> u64 {
        self.underflow
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn add(&mut self, x: f64) {
        self.total += 1;
        let lo = self.edges[0];
        let hi = self.edges[self.edges.len() - 1];
        if x < lo {
            self.underflow += 1;
        } else if x > hi || x.is_nan() {
            self.overflow += 1;
        } else {
            let bins = self.counts.len();
            let k = (((x - lo) / (hi - lo)) * bins as f64) as usize;
            self.counts[k.min(bins - 1)] += 1;
        }
    }

    pub fn extend<I: IntoIterator<Item = f64>>(&mut self, xs: I) {
        for x in xs {
            self.add(x);
        }
    }

    /// Adds the counts of a histogram with identical edges.
    pub fn merge(&mut self, other: &Histogram) {
        assert_eq!(self.edges, other.edges, "merging histograms with different bins");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        self.total += other.total;
    }

    /// Fraction of all samples in each bin.
    pub fn masses(&self) -> Vec<f64> {
        let t = self.total.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }

    /// `counts / (total * width)`.
    pub fn density(&self) -> Vec<f64> {
        self.masses()
            .iter()
            .zip(self.edges.windows(2))
            .map(|(m, w)| m / (w[1] - w[0]))
            .collect()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    fn tail_fractions(&self) -> (f64, f64) {
        let t = self.total.max(1) as f64;
        (self.underflow as f64 / t, self.overflow as f64 / t)
    }
}

/// Quasi-energy phases and derived samples of one realization.
#[derive(Clone, Debug, Default)]
pub struct SpectralSample {
    pub realization_id: u64,
    pub cycles: usize,
    pub r_values: Vec<f64>,
    /// `|d_e(z)|` for all `(e, z)`.
    pub d_values: Vec<f64>,
    /// `N p_M(z)` for all `z`.
    pub p_values: Vec<f64>,
}

/// `(M phi) mod 2 pi`, sorted ascending.
pub fn folded_phases(phases: &[f64], cycles: usize) -> Vec<f64> {
    let tau = 2.0 * std::f64::consts::PI;
    let mut out: Vec<f64> = phases
        .iter()
        .map(|p| {
            let w = (cycles as f64 * p).rem_euclid(tau);
            if w >= tau {
                0.0
            } else {
                w
            }
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Gap ratios `min(d_k, d_{k+1}) / max(d_k, d_{k+1})` of sorted phases on the
/// circle, wrap-around gap included: one value per phase.
pub fn r_statistics(sorted_phases: &[f64]) -> Result<Vec<f64>> {
    let n = sorted_phases.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "gap ratios need at least 3 phases, got {n}"
        )));
    }
    debug_assert!(sorted_phases.windows(2).all(|w| w[0] <= w[1]));
    let tau = 2.0 * std::f64::consts::PI;
    let gaps: Vec<f64> = (0..n)
        .map(|k| {
            if k + 1 < n {
                sorted_phases[k + 1] - sorted_phases[k]
            } else {
                sorted_phases[0] + tau - sorted_phases[n - 1]
            }
        })
        .collect();
    Ok((0..n)
        .map(|k| {
            let (a, b) = (gaps[k], gaps[(k + 1) % n]);
            let (lo, hi) = (a.min(b), a.max(b));
            if hi == 0.0 {
                1.0
            } else {
                lo / hi
            }
        })
        .collect())
}

/// `|<z|E_e><E_e|z0>|` for every eigenvector `e` and basis state `z`.
pub fn eigenstate_products(spec: &FloquetSpectrum, z0: usize) -> Vec<f64> {
    let n = spec.dim();
    let mut out = Vec::with_capacity(n * n);
    for e in 0..n {
        let c0 = spec.eigvecs[(z0, e)];
        out.extend(spec.eigvecs.column(e).iter().map(|c| (c * c0).abs()));
    }
    out
}

/// `N p_M(z)` for every `z`.
pub fn rescaled_probabilities(spec: &FloquetSpectrum, z0: usize, cycles: usize) -> Vec<f64> {
    let n = spec.dim() as f64;
    amplitudes(spec, z0, cycles)
        .iter()
        .map(|a| n * a.norm_sqr())
        .collect()
}

/// Sum over bins of `|histogram mass - reference mass|`, plus the same
/// difference for the mass below the first and above the last edge.
pub fn l1_distance(hist: &Histogram, reference: &ReferenceDensity) -> f64 {
    let edges = hist.edges();
    let lo = edges[0];
    let hi = edges[edges.len() - 1];
    let (under, over) = hist.tail_fractions();
    let inner: f64 = hist
        .masses()
        .iter()
        .zip(edges.windows(2))
        .map(|(m, w)| (m - reference.mass(w[0], w[1])).abs())
        .sum();
    inner
        + (under - reference.mass(f64::NEG_INFINITY, lo)).abs()
        + (over - reference.mass(hi, f64::INFINITY)).abs()
}

/// Same distance between two histograms with identical binning.
pub fn l1_between(a: &Histogram, b: &Histogram) -> f64 {
    assert_eq!(a.edges(), b.edges(), "histograms use different bins");
    let (ua, oa) = a.tail_fractions();
    let (ub, ob) = b.tail_fractions();
    let inner: f64 = a
        .masses()
        .iter()
        .zip(b.masses())
        .map(|(x, y)| (x - y).abs())
        .sum();
    inner + (ua - ub).abs() + (oa - ob).abs()
}

/// Fraction of rescaled probabilities strictly above `delta`.
pub fn anti_concentration_fraction(p_values: &[f64], delta: f64) -> f64 {
    if p_values.is_empty() {
        return 0.0;
    }
    p_values.iter().filter(|&&x| x > delta).count() as f64 / p_values.len() as f64
}

pub fn pt_histogram() -> Histogram {
    Histogram::uniform(0.0, PT_RANGE, PT_BINS)
}

pub fn d_histogram(dim: usize) -> Histogram {
    Histogram::uniform(0.0, D_RANGE_TIMES_N / dim as f64, D_BINS)
}

pub fn r_histogram() -> Histogram {
    Histogram::uniform(0.0, 1.0, crate::rmt::R_BINS)
}

/// For each `M` in `schedule`, pools `N p_M(z)` over all `z` and all
/// realizations (in the given order) and returns the distance to `exp(-x)`.
pub fn pt_convergence_curve(
    realizations: &[(FloquetSpectrum, usize)],
    schedule: &[usize],
) -> Vec<(usize, f64)> {
    let reference = crate::rmt::density_porter_thomas(1);
    schedule
        .iter()
        .map(|&m| {
            let mut hist = pt_histogram();
            for (spec, z0) in realizations {
                hist.extend(rescaled_probabilities(spec, *z0, m));
            }
            (m, l1_distance(&hist, &reference))
        })
        .collect()
}
