//! Many-body Fock bases.
//!
//! Two families are supported: spin-1/2 chains, where every configuration of
//! `L` sites is allowed, and bosonic chains at fixed total particle number.
//! States are kept in lexicographic order so that ordinals do not depend on
//! any random seed. For spin chains the ordinal is the integer whose binary
//! digits, read left to right, are the site occupations.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Largest spin chain the dense machinery accepts.
pub const MAX_SPIN_SITES: usize = 14;

/// Largest bosonic Hilbert-space dimension accepted.
pub const MAX_BOSE_DIM: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    Spin,
    Boson { particles: usize },
}

#[derive(Clone, Debug)]
pub struct FockBasis {
    kind: BasisKind,
    sites: usize,
    local_dim: usize,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl FockBasis {
    fn from_states(kind: BasisKind, sites: usize, local_dim: usize, states: Vec<Vec<u32>>) -> Self {
        let index = states
            .iter()
            .enumerate()
            .map(|(k, s)| (s.clone(), k))
            .collect();
        Self {
            kind,
            sites,
            local_dim,
            states,
            index,
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Local Hilbert-space dimension: 2 for spins, `n + 1` for `n` bosons.
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, ordinal: usize) -> &[u32] {
        &self.states[ordinal]
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn index_of(&self, occupations: &[u32]) -> Option<usize> {
        self.index.get(occupations).copied()
    }
}

/// All `2^L` spin configurations; bit `L-1-i` of the ordinal is `z_i`.
pub fn enumerate_spin_basis(sites: usize) -> Result<FockBasis> {
    if sites == 0 || sites > MAX_SPIN_SITES {
        return Err(Error::SizeLimit(format!(
            "spin chain length {sites} outside 1..={MAX_SPIN_SITES}"
        )));
    }
    let dim = 1usize << sites;
    let states = (0..dim)
        .map(|k| {
            (0..sites)
                .map(|i| ((k >> (sites - 1 - i)) & 1) as u32)
                .collect()
        })
        .collect();
    Ok(FockBasis::from_states(BasisKind::Spin, sites, 2, states))
}

/// Number of ways to place `particles` bosons on `sites` sites, or `None`
/// once it exceeds `cap`.
fn bose_dimension(sites: usize, particles: usize, cap: usize) -> Option<usize> {
    // C(n + L - 1, min(n, L - 1)), built incrementally; every partial product
    // is itself a binomial coefficient, so the division is exact.
    let k = particles.min(sites - 1);
    let top = particles + sites - 1;
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c * (top - k + i) as u128 / i as u128;
        if c > cap as u128 {
            return None;
        }
    }
    Some(c as usize)
}

/// Occupation tuples of `sites` sites summing to `particles`, lexicographic.
pub fn enumerate_bose_basis(sites: usize, particles: usize) -> Result<FockBasis> {
    if sites == 0 {
        return Err(Error::SizeLimit("bosonic chain needs at least one site".into()));
    }
    let dim = bose_dimension(sites, particles, MAX_BOSE_DIM).ok_or_else(|| {
        Error::SizeLimit(format!(
            "{particles} bosons on {sites} sites exceeds dimension {MAX_BOSE_DIM}"
        ))
    })?;

    let mut states = Vec::with_capacity(dim);
    let mut current = vec![0u32; sites];
    fill_bose(&mut current, 0, particles as u32, &mut states);
    debug_assert_eq!(states.len(), dim);
    Ok(FockBasis::from_states(
        BasisKind::Boson { particles },
        sites,
        particles + 1,
        states,
    ))
}

fn fill_bose(current: &mut Vec<u32>, site: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if site + 1 == current.len() {
        current[site] = remaining;
        out.push(current.clone());
        return;
    }
    for n in 0..=remaining {
        current[site] = n;
        fill_bose(current, site + 1, remaining - n, out);
    }
    current[site] = 0;
}
