//! Random matrix ensembles and the reference densities the dynamics is
//! compared against.
//!
//! Samplers are pure functions of `(N, seed)`. Densities expose exact bin
//! masses so that histogram comparisons never evaluate a density at a
//! singular point.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::floquet::diagonalize_symmetric_unitary;
use crate::linalg::{self, CMatrix, Complex64};
use crate::seed::seed_stream;
use crate::special::{bessel_k0, bessel_k0_tail};
use crate::stats::{r_statistics, Histogram};

/// Bins of the level-spacing-ratio histograms on `[0, 1]`.
pub const R_BINS: usize = 40;

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("matrix dimension must be >= 2, got {n}")));
    }
    Ok(())
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn sample_cue(n: usize, seed: u64) -> Result<CMatrix> {
    check_dim(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gin = CMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            gin[(i, j)] = Complex64::new(re, im);
        }
    }
    let qr = gin.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        if norm == 0.0 {
            return Err(Error::Numerical("singular Ginibre sample".into()));
        }
        let phase = d / norm;
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    Ok(q)
}

/// `W^T W` for Haar-random `W`: a symmetric unitary from the circular
/// orthogonal ensemble.
pub fn sample_coe(n: usize, seed: u64) -> Result<CMatrix> {
    let w = sample_cue(n, seed)?;
    let u = linalg::cmul(&w.transpose(), &w);
    // Only rounding separates u from its transpose.
    Ok((&u + u.transpose()).map(|z| z * 0.5))
}

/// `(G + G^T) / 2` with i.i.d. standard normal `G`.
pub fn sample_goe(n: usize, seed: u64) -> Result<DMatrix<f64>> {
    check_dim(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    Ok((&g + g.transpose()) * 0.5)
}

/// Closed-form or tabulated probability density on a half line or interval.
#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceDensity {
    /// `scale * exp(-scale * x)` on `x >= 0`.
    PorterThomas { scale: f64 },
    /// `(2N / pi) K0(N d)` on `d > 0`.
    BesselD { dim: f64 },
    /// `2 / (1 + r)^2` on `[0, 1]`: ratio of adjacent gaps of uncorrelated
    /// levels, smaller over larger.
    PoissonR,
    /// `sqrt(2N / pi) exp(-N c^2 / 2)` on `c >= 0`.
    HalfNormalC { dim: f64 },
    /// Piecewise-constant density on `edges`.
    Empirical { edges: Vec<f64>, density: Vec<f64> },
}

impl ReferenceDensity {
    pub fn name(&self) -> &'static str {
        match self {
            ReferenceDensity::PorterThomas { .. } => "porter_thomas",
            ReferenceDensity::BesselD { .. } => "bessel_d",
            ReferenceDensity::PoissonR => "poisson_r",
            ReferenceDensity::HalfNormalC { .. } => "half_normal_c",
            ReferenceDensity::Empirical { .. } => "coe_r_empirical",
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            ReferenceDensity::PoissonR => (0.0, 1.0),
            ReferenceDensity::Empirical { edges, .. } => (edges[0], edges[edges.len() - 1]),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// Density value; the Bessel density is unbounded at zero and reports a
    /// domain error there.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if x.is_nan() {
            return Err(Error::Domain("NaN argument".into()));
        }
        if x < lo || x > hi {
            return Ok(0.0);
        }
        Ok(match self {
            ReferenceDensity::PorterThomas { scale } => scale * (-scale * x).exp(),
            ReferenceDensity::BesselD { dim } => {
                if x == 0.0 {
                    return Err(Error::Domain(
                        "Bessel density diverges logarithmically at d = 0".into(),
                    ));
                }
                2.0 * dim / std::f64::consts::PI * bessel_k0(dim * x)
            }
            ReferenceDensity::PoissonR => 2.0 / (1.0 + x).powi(2),
            ReferenceDensity::HalfNormalC { dim } => {
                (2.0 * dim / std::f64::consts::PI).sqrt() * (-0.5 * dim * x * x).exp()
            }
            ReferenceDensity::Empirical { edges, density } => {
                let k = edges.partition_point(|&e| e <= x).saturating_sub(1);
                density[k.min(density.len() - 1)]
            }
        })
    }

    /// Probability mass below `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match self {
            ReferenceDensity::PorterThomas { scale } => -(-scale * x).exp_m1(),
            ReferenceDensity::BesselD { dim } => {
                1.0 - 2.0 / std::f64::consts::PI * bessel_k0_tail(dim * x)
            }
            ReferenceDensity::PoissonR => 2.0 * x / (1.0 + x),
            ReferenceDensity::HalfNormalC { dim } => libm::erf(x * (0.5 * dim).sqrt()),
            ReferenceDensity::Empirical { edges, density } => {
                let mut acc = 0.0;
                for (k, d) in density.iter().enumerate() {
                    let (a, b) = (edges[k], edges[k + 1]);
                    if x <= a {
                        break;
                    }
                    acc += d * (x.min(b) - a);
                }
                acc
            }
        }
    }

    /// Mass on `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        // Upper tails are computed directly to keep relative accuracy.
        match self {
            ReferenceDensity::PorterThomas { scale } if a >= 0.0 => {
                (-scale * a).exp() - if b.is_finite() { (-scale * b).exp() } else { 0.0 }
            }
            ReferenceDensity::BesselD { dim } if a >= 0.0 => {
                let tail_b = if b.is_finite() { bessel_k0_tail(dim * b) } else { 0.0 };
                2.0 / std::f64::consts::PI * (bessel_k0_tail(dim * a) - tail_b)
            }
            _ => self.cdf(b) - self.cdf(a),
        }
    }

    /// Builds a piecewise-constant density from a histogram's in-range bins.
    pub fn from_histogram(hist: &Histogram) -> Self {
        let in_range: u64 = hist.counts().iter().sum();
        let edges = hist.edges().to_vec();
        let density = hist
            .counts()
            .iter()
            .zip(edges.windows(2))
            .map(|(&c, w)| c as f64 / (in_range.max(1) as f64 * (w[1] - w[0])))
            .collect();
        ReferenceDensity::Empirical { edges, density }
    }
}

/// Output-probability density `N exp(-N p)`; `density_porter_thomas(1)` is
/// the law of the rescaled variable `x = N p`.
pub fn density_porter_thomas(n: usize) -> ReferenceDensity {
    ReferenceDensity::PorterThomas { scale: n as f64 }
}

/// Eigenvector-product magnitudes `|d|`: `(2N / pi) K0(N d)`.
pub fn density_bessel_d(n: usize) -> ReferenceDensity {
    ReferenceDensity::BesselD { dim: n as f64 }
}

pub fn density_poisson_r() -> ReferenceDensity {
    ReferenceDensity::PoissonR
}

/// Eigenvector component magnitudes `|c|` with signed variance `1 / N`.
pub fn density_half_normal_c(n: usize) -> ReferenceDensity {
    ReferenceDensity::HalfNormalC { dim: n as f64 }
}

/// Gap-ratio histogram of `n_samples` sampled COE matrices of dimension `n`
/// (sample `i` uses seed `seed_stream(seed, i)`), as a tabulated density.
pub fn reference_coe_r(n: usize, n_samples: usize, seed: u64) -> Result<ReferenceDensity> {
    Ok(ReferenceDensity::from_histogram(&coe_r_histogram(n, n_samples, seed)?))
}

pub fn coe_r_histogram(n: usize, n_samples: usize, seed: u64) -> Result<Histogram> {
    if n_samples < 100 {
        return Err(Error::InvalidParameter(format!(
            "COE reference needs at least 100 samples, got {n_samples}"
        )));
    }
    let mut hist = Histogram::uniform(0.0, 1.0, R_BINS);
    for i in 0..n_samples {
        let u = sample_coe(n, seed_stream(seed, i as u64))?;
        let spec = diagonalize_symmetric_unitary(&u)?;
        hist.extend(r_statistics(&spec.phases)?);
    }
    Ok(hist)
}
