//! Driven disordered chains: the Ising chain with a global transverse drive
//! and the Bose-Hubbard chain with driven hopping.
//!
//! Both static Hamiltonians are diagonal in the Fock basis, so `H0` is kept
//! as a vector. The drive operator `V` is a real symmetric matrix and the
//! full Hamiltonian is `H(t) = H0 + f(t) V` with `f(t) = (1 - cos wt) / 2`.
//! Energies are in units of the coupling `J`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::{enumerate_bose_basis, enumerate_spin_basis, FockBasis};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Ising coupling `J` (energy unit).
    pub coupling: f64,
    /// Disorder strength `W`; each site potential is drawn from `{0, W}`.
    pub disorder: f64,
    /// Drive amplitude `F`.
    pub drive: f64,
    /// On-site interaction `U` (bosons only).
    pub interaction: f64,
    /// Drive angular frequency.
    pub omega: f64,
}

impl Default for ModelParams {
    /// `W = 1`, `F = 2.5`, `omega = 8`, `U = 1`, all in units of `J = 1`.
    fn default() -> Self {
        Self {
            coupling: 1.0,
            disorder: 1.0,
            drive: 2.5,
            interaction: 1.0,
            omega: 8.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("coupling", self.coupling),
            ("disorder", self.disorder),
            ("drive", self.drive),
            ("interaction", self.interaction),
            ("omega", self.omega),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and nonnegative, got {value}"
                )));
            }
        }
        if self.omega == 0.0 {
            return Err(Error::InvalidParameter("omega must be positive".into()));
        }
        Ok(())
    }

    pub fn envelope(&self) -> DriveEnvelope {
        DriveEnvelope::new(self.omega)
    }
}

/// `f(t) = (1 - cos wt) / 2`, one period `T = 2 pi / w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveEnvelope {
    pub omega: f64,
}

impl DriveEnvelope {
    pub fn new(omega: f64) -> Self {
        Self { omega }
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    pub fn value(&self, t: f64) -> f64 {
        f_envelope(t, self)
    }
}

pub fn f_envelope(t: f64, env: &DriveEnvelope) -> f64 {
    0.5 * (1.0 - (env.omega * t).cos())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Ising,
    BoseHubbard,
    Custom,
}

/// How the drive exponential `exp(-i theta V)` can be applied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DriveStructure {
    /// No exploitable structure: go through the eigendecomposition of `V`.
    Dense,
    /// `V = amplitude * sum_l X_l` on a spin basis, a product of commuting
    /// single-site rotations.
    TransverseField { amplitude: f64 },
}

#[derive(Clone, Debug)]
pub struct DrivenModel {
    pub kind: ModelKind,
    pub basis: FockBasis,
    pub h0_diag: Vec<f64>,
    pub drive: DMatrix<f64>,
    pub params: ModelParams,
    pub mu: Vec<f64>,
    pub structure: DriveStructure,
}

impl DrivenModel {
    /// Assembles a model from explicit parts. `drive` must be symmetric.
    pub fn custom(
        basis: FockBasis,
        h0_diag: Vec<f64>,
        drive: DMatrix<f64>,
        params: ModelParams,
    ) -> Result<Self> {
        let n = basis.len();
        if h0_diag.len() != n || drive.nrows() != n || drive.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "model parts do not match basis dimension {n}"
            )));
        }
        if drive != drive.transpose() {
            return Err(Error::InvalidParameter("drive operator is not symmetric".into()));
        }
        Ok(Self {
            kind: ModelKind::Custom,
            mu: vec![0.0; basis.sites()],
            basis,
            h0_diag,
            drive,
            params,
            structure: DriveStructure::Dense,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn envelope(&self) -> DriveEnvelope {
        self.params.envelope()
    }

    /// `H(t) = H0 + f(t) V` as a dense matrix.
    pub fn hamiltonian_at(&self, t: f64) -> DMatrix<f64> {
        let f = self.envelope().value(t);
        let mut h = &self.drive * f;
        for (k, e) in self.h0_diag.iter().enumerate() {
            h[(k, k)] += e;
        }
        h
    }

    /// Period-averaged Hamiltonian `H0 + V / 2`, the undriven counterpart.
    pub fn average_hamiltonian(&self) -> DMatrix<f64> {
        let mut h = &self.drive * 0.5;
        for (k, e) in self.h0_diag.iter().enumerate() {
            h[(k, k)] += e;
        }
        h
    }
}

fn draw_disorder(sites: usize, strength: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..sites)
        .map(|_| if rng.random_bool(0.5) { strength } else { 0.0 })
        .collect()
}

fn spin_sign(z: u32) -> f64 {
    1.0 - 2.0 * z as f64
}

/// Disordered Ising chain driven by a global transverse field `F sum_l X_l`.
pub fn build_ising(sites: usize, params: &ModelParams, disorder_seed: u64) -> Result<DrivenModel> {
    if sites < 2 {
        return Err(Error::InvalidParameter(format!(
            "Ising chain needs at least 2 sites, got {sites}"
        )));
    }
    params.validate()?;
    let basis = enumerate_spin_basis(sites)?;
    let mu = draw_disorder(sites, params.disorder, disorder_seed);
    let n = basis.len();

    let h0_diag = basis
        .states()
        .iter()
        .map(|z| {
            let field: f64 = z.iter().zip(&mu).map(|(&zl, m)| m * spin_sign(zl)).sum();
            let bonds: f64 = z.windows(2).map(|w| spin_sign(w[0]) * spin_sign(w[1])).sum();
            field + params.coupling * bonds
        })
        .collect();

    let mut drive = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in 0..sites {
            drive[(k ^ (1 << (sites - 1 - l)), k)] = params.drive;
        }
    }

    Ok(DrivenModel {
        kind: ModelKind::Ising,
        basis,
        h0_diag,
        drive,
        params: *params,
        mu,
        structure: DriveStructure::TransverseField {
            amplitude: params.drive,
        },
    })
}

/// Disordered Bose-Hubbard chain at fixed filling whose hopping
/// `-F sum_l (a_l^dag a_{l+1} + h.c.)` is the driven term.
pub fn build_bose_hubbard(
    sites: usize,
    particles: usize,
    params: &ModelParams,
    disorder_seed: u64,
) -> Result<DrivenModel> {
    if sites < 2 {
        return Err(Error::InvalidParameter(format!(
            "Bose-Hubbard chain needs at least 2 sites, got {sites}"
        )));
    }
    params.validate()?;
    let basis = enumerate_bose_basis(sites, particles)?;
    let mu = draw_disorder(sites, params.disorder, disorder_seed);
    let n = basis.len();

    let h0_diag = basis
        .states()
        .iter()
        .map(|occ| {
            occ.iter()
                .zip(&mu)
                .map(|(&nl, m)| {
                    let nl = nl as f64;
                    m * nl + 0.5 * params.interaction * nl * (nl - 1.0)
                })
                .sum()
        })
        .collect();

    let mut drive = DMatrix::zeros(n, n);
    let mut target = vec![0u32; sites];
    for (k, occ) in basis.states().iter().enumerate() {
        for l in 0..sites - 1 {
            if occ[l + 1] == 0 {
                continue;
            }
            // a_l^dag a_{l+1}: one particle hops from l+1 to l.
            target.copy_from_slice(occ);
            target[l] += 1;
            target[l + 1] -= 1;
            let j = basis
                .index_of(&target)
                .expect("hopping preserves particle number");
            let amp = -params.drive * ((occ[l] as f64 + 1.0) * occ[l + 1] as f64).sqrt();
            drive[(j, k)] = amp;
            drive[(k, j)] = amp;
        }
    }

    Ok(DrivenModel {
        kind: ModelKind::BoseHubbard,
        basis,
        h0_diag,
        drive,
        params: *params,
        mu,
        structure: DriveStructure::Dense,
    })
}

/// Uniformly random Fock basis state.
pub fn random_initial_state(basis: &FockBasis, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.random_range(0..basis.len())
}
