//! Disorder ensembles: one spectrum and one initial state per realization,
//! with seeds derived from a master seed.
//!
//! Realizations run in parallel; results are always returned in ascending
//! realization order, so anything pooled from them is independent of the
//! thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::floquet::{
    converged_floquet_operator, diagonalize_symmetric_unitary, hamiltonian_spectrum,
    FloquetSpectrum, CONVERGENCE_TOL, DEFAULT_START_STEPS,
};
use crate::models::{build_bose_hubbard, build_ising, random_initial_state, DrivenModel, ModelParams};
use crate::rmt::{sample_coe, sample_goe};
use crate::seed::RealizationSeeds;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chain {
    Ising { sites: usize },
    BoseHubbard { sites: usize, particles: usize },
}

impl Chain {
    pub fn build(&self, params: &ModelParams, disorder_seed: u64) -> Result<DrivenModel> {
        match *self {
            Chain::Ising { sites } => build_ising(sites, params, disorder_seed),
            Chain::BoseHubbard { sites, particles } => {
                build_bose_hubbard(sites, particles, params, disorder_seed)
            }
        }
    }
}

/// Where the spectra of an ensemble come from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Source {
    /// Floquet operator of the driven chain.
    Driven(Chain),
    /// Static evolution under the period-averaged Hamiltonian `H0 + V/2`,
    /// sampled once per drive period.
    Undriven(Chain),
    /// Sampled COE matrices of dimension `dim`.
    Coe { dim: usize },
    /// Static evolution under a GOE Hamiltonian, sampled at steps `dt`.
    Goe { dim: usize, dt: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleConfig {
    pub source: Source,
    pub params: ModelParams,
    pub realizations: usize,
    pub master_seed: u64,
    /// First step count of the doubling search.
    pub start_steps: usize,
    /// Self-convergence tolerance of the Floquet operator.
    pub tolerance: f64,
}

impl EnsembleConfig {
    pub fn new(source: Source, params: ModelParams, realizations: usize, master_seed: u64) -> Self {
        Self {
            source,
            params,
            realizations,
            master_seed,
            start_steps: DEFAULT_START_STEPS,
            tolerance: CONVERGENCE_TOL,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Realization {
    pub id: usize,
    pub seeds: RealizationSeeds,
    /// Index of the initial basis state.
    pub z0: usize,
    pub spectrum: FloquetSpectrum,
    /// Integrator step count (0 when no integration was needed).
    pub steps: usize,
    /// Self-convergence residual of the Floquet operator (0 when no
    /// integration was needed).
    pub convergence_residual: f64,
}

fn uniform_state(dim: usize, seed: u64) -> usize {
    ChaCha8Rng::seed_from_u64(seed).random_range(0..dim)
}

/// Spectrum of realization `id`. The disorder seed drives the model's
/// disorder or the random matrix; the initial-state seed picks `z0`.
pub fn realization(cfg: &EnsembleConfig, id: usize) -> Result<Realization> {
    let seeds = RealizationSeeds::derive(cfg.master_seed, id as u64);
    let (spectrum, z0, steps, residual) = match cfg.source {
        Source::Driven(chain) => {
            let model = chain.build(&cfg.params, seeds.disorder)?;
            let op = converged_floquet_operator(
                &model,
                &model.envelope(),
                cfg.start_steps,
                cfg.tolerance,
            )?;
            let spectrum = diagonalize_symmetric_unitary(&op.unitary)?;
            let z0 = random_initial_state(&model.basis, seeds.initial_state);
            (spectrum, z0, op.steps, op.residual)
        }
        Source::Undriven(chain) => {
            let model = chain.build(&cfg.params, seeds.disorder)?;
            let dt = model.envelope().period();
            let spectrum = hamiltonian_spectrum(&model.average_hamiltonian(), dt)?;
            let z0 = random_initial_state(&model.basis, seeds.initial_state);
            (spectrum, z0, 0, 0.0)
        }
        Source::Coe { dim } => {
            let spectrum = diagonalize_symmetric_unitary(&sample_coe(dim, seeds.disorder)?)?;
            (spectrum, uniform_state(dim, seeds.initial_state), 0, 0.0)
        }
        Source::Goe { dim, dt } => {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
            }
            let spectrum = hamiltonian_spectrum(&sample_goe(dim, seeds.disorder)?, dt)?;
            (spectrum, uniform_state(dim, seeds.initial_state), 0, 0.0)
        }
    };
    Ok(Realization {
        id,
        seeds,
        z0,
        spectrum,
        steps,
        convergence_residual: residual,
    })
}

/// Applies `reduce` to every realization, in parallel, and returns the
/// results in realization order. Spectra are dropped after reduction.
pub fn map_realizations<T, F>(cfg: &EnsembleConfig, reduce: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Realization) -> Result<T> + Sync,
{
    map_ids(cfg, 0..cfg.realizations, reduce)
}

/// As [`map_realizations`] for an explicit range of realization ids.
pub fn map_ids<T, F>(cfg: &EnsembleConfig, ids: std::ops::Range<usize>, reduce: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Realization) -> Result<T> + Sync,
{
    ids.into_par_iter()
        .map(|id| reduce(&realization(cfg, id)?))
        .collect()
}
