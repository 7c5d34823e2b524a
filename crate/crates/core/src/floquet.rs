//! One-period Floquet operators, their quasi-energy spectra and stroboscopic
//! evolution.
//!
//! The period is integrated with symmetric splitting: each sub-step is
//! `exp(-i dt H0 / 2) exp(-i dt f(t_mid) V) exp(-i dt H0 / 2)`. `H0` is
//! diagonal, and `V` has a fixed shape, so every factor is exact and complex
//! symmetric; since `f(T - t) = f(t)` the product is palindromic and the
//! resulting `U_F` is a symmetric unitary at any step count.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Complex64};
use crate::models::{DriveEnvelope, DriveStructure, DrivenModel};

/// Residual target for step doubling.
pub const CONVERGENCE_TOL: f64 = 1e-8;
/// Step count where automatic doubling starts.
pub const DEFAULT_START_STEPS: usize = 64;
/// Hard cap on the number of outer steps.
pub const MAX_STEPS: usize = 1 << 16;
/// Largest `max |U - U^T|` accepted by the diagonalizer.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Composition used for each outer step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitScheme {
    /// Plain second-order Strang splitting, one kick per step.
    Strang,
    /// Triple-jump composition of Strang sub-steps (fourth order, three
    /// kicks per step). Still symmetric and palindromic.
    TripleJump,
}

impl SplitScheme {
    pub fn name(&self) -> &'static str {
        match self {
            SplitScheme::Strang => "strang2",
            SplitScheme::TripleJump => "triple_jump4",
        }
    }
}

/// Scheme used by [`compute_floquet_operator`].
pub const DEFAULT_SCHEME: SplitScheme = SplitScheme::TripleJump;

/// Alternating diagonal and kick factors of one period.
///
/// `diagonal[k]` is the duration of the `exp(-i tau H0)` factor applied
/// before kick `k` (the last entry closes the period), `kicks[k]` is the
/// integrated drive weight `dt * f(t_mid)` of kick `k`.
#[derive(Clone, Debug)]
struct Schedule {
    diagonal: Vec<f64>,
    kicks: Vec<f64>,
}

fn schedule(env: &DriveEnvelope, steps: usize, scheme: SplitScheme) -> Schedule {
    let period = env.period();
    let h = period / steps as f64;
    let fractions: Vec<f64> = match scheme {
        SplitScheme::Strang => vec![1.0],
        SplitScheme::TripleJump => {
            let g1 = 1.0 / (2.0 - 2f64.powf(1.0 / 3.0));
            vec![g1, 1.0 - 2.0 * g1, g1]
        }
    };

    let mut lengths = Vec::with_capacity(steps * fractions.len());
    let mut mids = Vec::with_capacity(steps * fractions.len());
    for k in 0..steps {
        let mut t = k as f64 * h;
        for g in &fractions {
            let len = g * h;
            lengths.push(len);
            mids.push(t + 0.5 * len);
            t += len;
        }
    }

    let mut diagonal = Vec::with_capacity(lengths.len() + 1);
    diagonal.push(0.5 * lengths[0]);
    for w in lengths.windows(2) {
        diagonal.push(0.5 * (w[0] + w[1]));
    }
    diagonal.push(0.5 * lengths[lengths.len() - 1]);

    let kicks = lengths
        .iter()
        .zip(&mids)
        .map(|(len, &t)| len * env.value(t))
        .collect();
    Schedule { diagonal, kicks }
}

/// Distinct diagonal durations get one precomputed phase vector each.
struct DiagonalPhases {
    index: Vec<usize>,
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
}

impl DiagonalPhases {
    fn new(h0: &[f64], durations: &[f64]) -> Self {
        let mut keys: Vec<u64> = Vec::new();
        let mut index = Vec::with_capacity(durations.len());
        for d in durations {
            let bits = d.to_bits();
            let slot = match keys.iter().position(|&k| k == bits) {
                Some(p) => p,
                None => {
                    keys.push(bits);
                    keys.len() - 1
                }
            };
            index.push(slot);
        }
        let cos = keys
            .iter()
            .map(|&b| h0.iter().map(|e| (f64::from_bits(b) * e).cos()).collect())
            .collect();
        let sin = keys
            .iter()
            .map(|&b| h0.iter().map(|e| (f64::from_bits(b) * e).sin()).collect())
            .collect();
        Self { index, cos, sin }
    }

    /// Multiplies a state by `exp(-i tau H0)` for the `k`-th duration.
    #[inline]
    fn apply(&self, k: usize, re: &mut [f64], im: &mut [f64]) {
        let slot = self.index[k];
        let (c, s) = (&self.cos[slot], &self.sin[slot]);
        for i in 0..re.len() {
            let (r, m) = (re[i], im[i]);
            re[i] = c[i] * r + s[i] * m;
            im[i] = c[i] * m - s[i] * r;
        }
    }
}

/// Applies `prod_l exp(-i theta X_l)` in place.
#[inline]
fn transverse_kick(sites: usize, cos: f64, sin: f64, re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    for l in 0..sites {
        let stride = 1usize << (sites - 1 - l);
        let mut block = 0;
        while block < n {
            for a in block..block + stride {
                let b = a + stride;
                let (ar, ai, br, bi) = (re[a], im[a], re[b], im[b]);
                re[a] = cos * ar + sin * bi;
                im[a] = cos * ai - sin * br;
                re[b] = cos * br + sin * ai;
                im[b] = cos * bi - sin * ar;
            }
            block += 2 * stride;
        }
    }
}

fn evolve_transverse(model: &DrivenModel, amplitude: f64, sched: &Schedule) -> CMatrix {
    let n = model.dim();
    let sites = model.basis.sites();
    let phases = DiagonalPhases::new(&model.h0_diag, &sched.diagonal);
    let rotations: Vec<(f64, f64)> = sched
        .kicks
        .iter()
        .map(|w| ((w * amplitude).cos(), (w * amplitude).sin()))
        .collect();

    // Columns of U_F are independent state propagations.
    let columns: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|col| {
            let mut re = vec![0.0; n];
            let mut im = vec![0.0; n];
            re[col] = 1.0;
            for (k, &(c, s)) in rotations.iter().enumerate() {
                phases.apply(k, &mut re, &mut im);
                transverse_kick(sites, c, s, &mut re, &mut im);
            }
            phases.apply(rotations.len(), &mut re, &mut im);
            (re, im)
        })
        .collect();

    let mut u = CMatrix::zeros(n, n);
    for (j, (re, im)) in columns.iter().enumerate() {
        for i in 0..n {
            u[(i, j)] = Complex64::new(re[i], im[i]);
        }
    }
    u
}

fn scale_rows(c: &[f64], s: &[f64], re: &mut DMatrix<f64>, im: &mut DMatrix<f64>) {
    let n = re.nrows();
    let cols = re.as_mut_slice().chunks_mut(n).zip(im.as_mut_slice().chunks_mut(n));
    for (rs, is) in cols {
        for i in 0..n {
            let (r, m) = (rs[i], is[i]);
            rs[i] = c[i] * r + s[i] * m;
            is[i] = c[i] * m - s[i] * r;
        }
    }
}

fn evolve_dense(model: &DrivenModel, sched: &Schedule) -> Result<CMatrix> {
    let n = model.dim();
    let eig = SymmetricEigen::try_new(model.drive.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("eigendecomposition of the drive failed".into()))?;
    let q = eig.eigenvectors;
    let qt = q.transpose();
    let d = eig.eigenvalues;

    let diag = DiagonalPhases::new(&model.h0_diag, &sched.diagonal);
    let mut re = DMatrix::<f64>::identity(n, n);
    let mut im = DMatrix::<f64>::zeros(n, n);
    let mut tre = DMatrix::<f64>::zeros(n, n);
    let mut tim = DMatrix::<f64>::zeros(n, n);
    let mut kc = vec![0.0; n];
    let mut ks = vec![0.0; n];

    for (k, w) in sched.kicks.iter().enumerate() {
        let slot = diag.index[k];
        scale_rows(&diag.cos[slot], &diag.sin[slot], &mut re, &mut im);
        qt.mul_to(&re, &mut tre);
        qt.mul_to(&im, &mut tim);
        for i in 0..n {
            kc[i] = (w * d[i]).cos();
            ks[i] = (w * d[i]).sin();
        }
        scale_rows(&kc, &ks, &mut tre, &mut tim);
        q.mul_to(&tre, &mut re);
        q.mul_to(&tim, &mut im);
    }
    let slot = diag.index[sched.kicks.len()];
    scale_rows(&diag.cos[slot], &diag.sin[slot], &mut re, &mut im);
    Ok(linalg::join(&re, &im))
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < 16 || steps % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "step count must be even and at least 16, got {steps}"
        )));
    }
    Ok(())
}

/// One-period Floquet operator with the default scheme and the fastest
/// drive route available for the model.
pub fn compute_floquet_operator(
    model: &DrivenModel,
    env: &DriveEnvelope,
    steps: usize,
) -> Result<CMatrix> {
    compute_floquet_operator_with(model, env, steps, DEFAULT_SCHEME, model.structure)
}

/// As [`compute_floquet_operator`] with an explicit scheme and drive route.
/// Passing [`DriveStructure::Dense`] forces the eigendecomposition route for
/// any model.
pub fn compute_floquet_operator_with(
    model: &DrivenModel,
    env: &DriveEnvelope,
    steps: usize,
    scheme: SplitScheme,
    structure: DriveStructure,
) -> Result<CMatrix> {
    check_steps(steps)?;
    let sched = schedule(env, steps, scheme);
    match structure {
        DriveStructure::TransverseField { amplitude } => {
            Ok(evolve_transverse(model, amplitude, &sched))
        }
        DriveStructure::Dense => evolve_dense(model, &sched),
    }
}

/// `max |U(steps) - U(2 steps)|`.
pub fn verify_convergence(model: &DrivenModel, env: &DriveEnvelope, steps: usize) -> Result<f64> {
    let coarse = compute_floquet_operator(model, env, steps)?;
    let fine = compute_floquet_operator(model, env, 2 * steps)?;
    Ok(linalg::max_abs_diff(&coarse, &fine))
}

#[derive(Clone, Debug)]
pub struct ConvergedOperator {
    pub unitary: CMatrix,
    /// Outer step count of `unitary`.
    pub steps: usize,
    /// `max |U(steps / 2) - U(steps)|`.
    pub residual: f64,
    /// `(coarse steps, residual)` for every doubling performed.
    pub history: Vec<(usize, f64)>,
}

/// Doubles the step count from `start_steps` until two successive operators
/// agree to `tol`; returns the finer one.
pub fn converged_floquet_operator(
    model: &DrivenModel,
    env: &DriveEnvelope,
    start_steps: usize,
    tol: f64,
) -> Result<ConvergedOperator> {
    check_steps(start_steps)?;
    let mut steps = start_steps;
    let mut coarse = compute_floquet_operator(model, env, steps)?;
    let mut history: Vec<(usize, f64)> = Vec::new();
    loop {
        if 2 * steps > MAX_STEPS {
            return Err(Error::Integrator(format!(
                "no convergence to {tol:e} within {MAX_STEPS} steps: {history:?}"
            )));
        }
        let fine = compute_floquet_operator(model, env, 2 * steps)?;
        let residual = linalg::max_abs_diff(&coarse, &fine);
        history.push((steps, residual));
        if residual < tol {
            return Ok(ConvergedOperator {
                unitary: fine,
                steps: 2 * steps,
                residual,
                history,
            });
        }
        if let [.., a, b, c] = history.as_slice() {
            if c.1 >= b.1 && b.1 >= a.1 {
                return Err(Error::Integrator(format!(
                    "residual stopped decreasing: {history:?}"
                )));
            }
        }
        coarse = fine;
        steps *= 2;
    }
}

/// Quasi-energy decomposition `U = sum_e exp(-i phi_e) |E_e><E_e|` of a
/// symmetric unitary, with real eigenvectors.
#[derive(Clone, Debug)]
pub struct FloquetSpectrum {
    pub unitary: CMatrix,
    /// Quasi-energy phases in `[0, 2 pi)`, ascending.
    pub phases: Vec<f64>,
    /// Real orthogonal matrix whose columns are the eigenvectors.
    pub eigvecs: DMatrix<f64>,
    pub symmetry_residual: f64,
    pub unitarity_residual: f64,
    /// `max |U - sum_e exp(-i phi_e) |E_e><E_e||`.
    pub reconstruction_residual: f64,
}

impl FloquetSpectrum {
    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    /// `max |V^T V - I|` of the eigenvector matrix.
    pub fn orthogonality_residual(&self) -> f64 {
        let g = self.eigvecs.transpose() * &self.eigvecs;
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let t = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - t).abs());
            }
        }
        worst
    }

    /// Largest per-column `max |U v - exp(-i phi) v|`.
    pub fn eigen_residual(&self) -> f64 {
        let uv = linalg::real_cmul_right(&self.unitary, &self.eigvecs);
        let mut worst: f64 = 0.0;
        for (e, phi) in self.phases.iter().enumerate() {
            let lambda = Complex64::from_polar(1.0, -phi);
            for i in 0..self.dim() {
                worst = worst.max((uv[(i, e)] - lambda * self.eigvecs[(i, e)]).norm());
            }
        }
        worst
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let w = phi.rem_euclid(tau);
    if w >= tau {
        0.0
    } else {
        w
    }
}

pub(crate) struct DisjointSet(Vec<usize>);

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Off-diagonal weight of `V^T Y V` above which two eigenvectors of the real
/// part are treated as mixed and re-diagonalized together.
const COUPLING_TOL: f64 = 1e-11;

/// Splits `U = X + iY` into commuting real symmetric parts, diagonalizes `X`
/// and resolves its degenerate clusters with `Y`.
pub fn diagonalize_symmetric_unitary(u: &CMatrix) -> Result<FloquetSpectrum> {
    let n = u.nrows();
    if n == 0 || u.ncols() != n {
        return Err(Error::InvalidParameter("expected a nonempty square matrix".into()));
    }
    let symmetry_residual = linalg::symmetry_residual(u);
    if symmetry_residual >= SYMMETRY_TOL {
        return Err(Error::Symmetry(format!(
            "max |U - U^T| = {symmetry_residual:e}"
        )));
    }
    let unitarity_residual = linalg::unitarity_residual(u);

    let (re, im) = linalg::split(u);
    let x = (&re + re.transpose()) * 0.5;
    let y = (&im + im.transpose()) * 0.5;
    let commutator = &x * &y - &y * &x;
    let comm = commutator.amax();
    if comm > 1e-9 {
        return Err(Error::Symmetry(format!(
            "real and imaginary parts do not commute: {comm:e}"
        )));
    }

    let eig = SymmetricEigen::try_new(x, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("real-part eigendecomposition failed".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut v = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        v.set_column(dst, &eig.eigenvectors.column(src));
    }
    let xs: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();

    let yp = v.transpose() * &y * &v;
    let gap_tol = 1e-10 * n as f64;
    let mut sets = DisjointSet::new(n);
    for k in 1..n {
        if xs[k] - xs[k - 1] < gap_tol {
            sets.union(k - 1, k);
        }
    }
    for j in 0..n {
        for i in 0..j {
            if yp[(i, j)].abs() > COUPLING_TOL {
                sets.union(i, j);
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); n];
    for k in 0..n {
        let r = sets.find(k);
        clusters[r].push(k);
    }

    for members in clusters.iter().filter(|c| c.len() > 1) {
        let m = members.len();
        let block = DMatrix::from_fn(m, m, |a, b| yp[(members[a], members[b])]);
        let sub = SymmetricEigen::try_new(block, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("cluster eigendecomposition failed".into()))?;
        let mut basis = DMatrix::<f64>::zeros(n, m);
        for (a, &col) in members.iter().enumerate() {
            basis.set_column(a, &v.column(col));
        }
        let rotated = basis * sub.eigenvectors;
        for (a, &col) in members.iter().enumerate() {
            v.set_column(col, &rotated.column(a));
        }
    }

    // Eigenvalues from Rayleigh quotients v^T U v.
    let uv = linalg::real_cmul_right(u, &v);
    let mut pairs: Vec<(f64, usize)> = (0..n)
        .map(|e| {
            let lambda: Complex64 = (0..n).map(|i| uv[(i, e)] * v[(i, e)]).sum();
            (wrap_phase((-lambda.im).atan2(lambda.re)), e)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let phases: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut eigvecs = DMatrix::<f64>::zeros(n, n);
    for (dst, &(_, src)) in pairs.iter().enumerate() {
        eigvecs.set_column(dst, &v.column(src));
    }

    let reconstruction_residual = linalg::max_abs_diff(u, &reconstruct(&phases, &eigvecs, 1));
    Ok(FloquetSpectrum {
        unitary: u.clone(),
        phases,
        eigvecs,
        symmetry_residual,
        unitarity_residual,
        reconstruction_residual,
    })
}

/// `sum_e exp(-i power phi_e) |E_e><E_e|`.
pub fn reconstruct(phases: &[f64], eigvecs: &DMatrix<f64>, power: usize) -> CMatrix {
    let n = phases.len();
    let mut vc = eigvecs.clone();
    let mut vs = eigvecs.clone();
    for (e, phi) in phases.iter().enumerate() {
        let a = power as f64 * phi;
        vc.column_mut(e).scale_mut(a.cos());
        vs.column_mut(e).scale_mut(-a.sin());
    }
    let vt = eigvecs.transpose();
    let re = vc * &vt;
    let im = vs * &vt;
    debug_assert_eq!(re.nrows(), n);
    linalg::join(&re, &im)
}

/// `<z| U^M |z0>` for every `z`, evaluated from the spectrum.
pub fn amplitudes(spec: &FloquetSpectrum, z0: usize, cycles: usize) -> Vec<Complex64> {
    let n = spec.dim();
    let weights: Vec<Complex64> = spec
        .phases
        .iter()
        .enumerate()
        .map(|(e, phi)| {
            Complex64::from_polar(spec.eigvecs[(z0, e)], -(cycles as f64) * phi)
        })
        .collect();
    (0..n)
        .map(|z| {
            spec.eigvecs
                .row(z)
                .iter()
                .zip(&weights)
                .map(|(c, w)| w * *c)
                .sum()
        })
        .collect()
}

/// `p_M(z) = |<z| U^M |z0>|^2`.
pub fn output_probabilities(spec: &FloquetSpectrum, z0: usize, cycles: usize) -> Vec<f64> {
    amplitudes(spec, z0, cycles)
        .iter()
        .map(|a| a.norm_sqr())
        .collect()
}

/// `exp(-i t H)` for a real symmetric `H`.
pub fn static_evolution(h: &DMatrix<f64>, t: f64) -> Result<CMatrix> {
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("Hamiltonian eigendecomposition failed".into()))?;
    let phases: Vec<f64> = eig.eigenvalues.iter().map(|e| e * t).collect();
    Ok(reconstruct_raw(&phases, &eig.eigenvectors))
}

fn reconstruct_raw(angles: &[f64], eigvecs: &DMatrix<f64>) -> CMatrix {
    let mut vc = eigvecs.clone();
    let mut vs = eigvecs.clone();
    for (e, a) in angles.iter().enumerate() {
        vc.column_mut(e).scale_mut(a.cos());
        vs.column_mut(e).scale_mut(-a.sin());
    }
    let vt = eigvecs.transpose();
    linalg::join(&(vc * &vt), &(vs * &vt))
}

/// Spectrum of the evolution `exp(-i dt H)` of a static Hamiltonian, so that
/// `cycles` counts multiples of `dt`.
pub fn hamiltonian_spectrum(h: &DMatrix<f64>, dt: f64) -> Result<FloquetSpectrum> {
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("Hamiltonian eigendecomposition failed".into()))?;
    let mut pairs: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, e)| (wrap_phase(e * dt), k))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = h.nrows();
    let phases: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut eigvecs = DMatrix::zeros(n, n);
    for (dst, &(_, src)) in pairs.iter().enumerate() {
        eigvecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    let unitary = reconstruct(&phases, &eigvecs, 1);
    Ok(FloquetSpectrum {
        symmetry_residual: linalg::symmetry_residual(&unitary),
        unitarity_residual: linalg::unitarity_residual(&unitary),
        reconstruction_residual: 0.0,
        unitary,
        phases,
        eigvecs,
    })
}
