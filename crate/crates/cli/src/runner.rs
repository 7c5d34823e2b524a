//! Experiment drivers. Each returns its tables and summary; nothing here
//! touches the file system.

use floquet_coe::circuit::{build_coe_circuit, map_to_ising, verify_mapping, MAX_FREE_SPINS};
use floquet_coe::ensemble::{map_realizations, Chain, EnsembleConfig, Realization, Source};
use floquet_coe::floquet::{amplitudes, DEFAULT_SCHEME, MAX_STEPS};
use floquet_coe::rmt::{density_bessel_d, density_poisson_r, density_porter_thomas};
use floquet_coe::seed::seed_stream;
use floquet_coe::stats::{
    eigenstate_products, folded_phases, l1_between, l1_distance, r_statistics,
    rescaled_probabilities, D_RANGE_TIMES_N, PT_RANGE,
};
use floquet_coe::{Histogram, ReferenceDensity};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{Experiment, ExperimentConfig, ModelChoice};
use crate::error::CliError;
use crate::output::{push_histogram, real, Artifacts, Table};

/// Stream ids under the master seed for ensembles other than the primary one.
const REFERENCE_STREAM: u64 = 1 << 40;
const GOE_STREAM: u64 = (1 << 40) + 1;

/// Mapping deviations at or above this count as failures.
pub const MAPPING_TOL: f64 = 1e-10;

const POOLING: &str = "histograms pool every value of every realization; realizations are merged in ascending id order";

pub fn execute(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::LevelSpacing => level_spacing(cfg),
        Experiment::EigenstateDist => eigenstate_dist(cfg),
        Experiment::PtConvergence => pt_convergence(cfg),
        Experiment::AntiConcentration => anti_concentration(cfg),
        Experiment::UndrivenCompare => undriven_compare(cfg),
        Experiment::VerifyIsingMap => verify_ising_map(cfg),
        Experiment::RmtBaseline => rmt_baseline(cfg),
    }
}

/// Runs the experiment and writes its artifacts to `cfg.output_dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let artifacts = execute(cfg)?;
    artifacts.write(&cfg.output_dir)?;
    Ok(artifacts)
}

fn chain(cfg: &ExperimentConfig) -> Option<Chain> {
    match cfg.model {
        ModelChoice::Ising => Some(Chain::Ising { sites: cfg.sites }),
        ModelChoice::BoseHubbard => Some(Chain::BoseHubbard {
            sites: cfg.sites,
            particles: cfg.particles,
        }),
        ModelChoice::Coe | ModelChoice::Goe => None,
    }
}

fn primary_source(cfg: &ExperimentConfig) -> Source {
    match (chain(cfg), cfg.model) {
        (Some(c), _) => Source::Driven(c),
        (None, ModelChoice::Goe) => Source::Goe {
            dim: cfg.dim,
            dt: cfg.goe_dt,
        },
        (None, _) => Source::Coe { dim: cfg.dim },
    }
}

fn ensemble(cfg: &ExperimentConfig, source: Source, realizations: usize, master_seed: u64) -> EnsembleConfig {
    EnsembleConfig::new(source, cfg.params, realizations, master_seed)
}

/// Per-realization provenance and residuals.
#[derive(Clone, Debug)]
struct Record {
    id: usize,
    disorder_seed: u64,
    initial_state_seed: u64,
    z0: usize,
    dim: usize,
    steps: usize,
    convergence: f64,
    unitarity: f64,
    symmetry: f64,
    reconstruction: f64,
}

impl Record {
    fn of(r: &Realization) -> Self {
        Self {
            id: r.id,
            disorder_seed: r.seeds.disorder,
            initial_state_seed: r.seeds.initial_state,
            z0: r.z0,
            dim: r.spectrum.dim(),
            steps: r.steps,
            convergence: r.convergence_residual,
            unitarity: r.spectrum.unitarity_residual,
            symmetry: r.spectrum.symmetry_residual,
            reconstruction: r.spectrum.reconstruction_residual,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "disorder_seed": self.disorder_seed,
            "initial_state_seed": self.initial_state_seed,
            "z0": self.z0,
            "integrator_steps": self.steps,
            "convergence_residual": self.convergence,
            "unitarity_residual": self.unitarity,
            "symmetry_residual": self.symmetry,
            "reconstruction_residual": self.reconstruction,
        })
    }
}

/// One ensemble's realizations after reduction.
struct Sweep<T> {
    name: &'static str,
    ens: EnsembleConfig,
    parts: Vec<T>,
    records: Vec<Record>,
}

impl<T> Sweep<T> {
    fn dim(&self) -> usize {
        self.records.first().map_or(0, |r| r.dim)
    }

    fn to_json(&self) -> Value {
        let max = |f: fn(&Record) -> f64| self.records.iter().map(f).fold(0.0, f64::max);
        let steps: Vec<usize> = self.records.iter().map(|r| r.steps).collect();
        let source = match self.ens.source {
            Source::Driven(c) | Source::Undriven(c) => json!({"kind": self.name, "chain": chain_json(&c)}),
            Source::Coe { dim } => json!({"kind": "coe", "N": dim}),
            Source::Goe { dim, dt } => json!({"kind": "goe", "N": dim, "dt": dt}),
        };
        json!({
            "source": source,
            "dim": self.dim(),
            "master_seed": self.ens.master_seed,
            "realizations": self.records.len(),
            "integrator": {
                "scheme": DEFAULT_SCHEME.name(),
                "start_steps": self.ens.start_steps,
                "tolerance": self.ens.tolerance,
                "max_steps": MAX_STEPS,
                "min_steps_used": steps.iter().min(),
                "max_steps_used": steps.iter().max(),
                "applies": matches!(self.ens.source, Source::Driven(_)),
            },
            "residuals": {
                "max_convergence": max(|r| r.convergence),
                "max_unitarity": max(|r| r.unitarity),
                "max_symmetry": max(|r| r.symmetry),
                "max_reconstruction": max(|r| r.reconstruction),
            },
            "records": self.records.iter().map(Record::to_json).collect::<Vec<_>>(),
        })
    }
}

fn chain_json(c: &Chain) -> Value {
    match *c {
        Chain::Ising { sites } => json!({"model": "ising", "L": sites}),
        Chain::BoseHubbard { sites, particles } => {
            json!({"model": "bose_hubbard", "L": sites, "n_particles": particles})
        }
    }
}

fn sweep<T, F>(name: &'static str, ens: EnsembleConfig, reduce: F) -> Result<Sweep<T>, CliError>
where
    T: Send,
    F: Fn(&Realization) -> floquet_coe::Result<T> + Sync,
{
    let out = map_realizations(&ens, |r| Ok((reduce(r)?, Record::of(r))))?;
    let (parts, records) = out.into_iter().unzip();
    Ok(Sweep {
        name,
        ens,
        parts,
        records,
    })
}

fn pt_hist(cfg: &ExperimentConfig) -> Histogram {
    Histogram::uniform(0.0, PT_RANGE, cfg.pt_bins)
}

fn r_hist(cfg: &ExperimentConfig) -> Histogram {
    Histogram::uniform(0.0, 1.0, cfg.r_bins)
}

fn d_hist(cfg: &ExperimentConfig, dim: usize) -> Histogram {
    Histogram::uniform(0.0, D_RANGE_TIMES_N / dim as f64, cfg.d_bins)
}

/// Merges per-realization histogram lists slot by slot, in realization order.
fn pool(parts: &[Vec<Histogram>], empty: impl Fn() -> Histogram) -> Vec<Histogram> {
    let slots = parts.first().map_or(0, Vec::len);
    let mut out: Vec<Histogram> = (0..slots).map(|_| empty()).collect();
    for part in parts {
        for (acc, h) in out.iter_mut().zip(part) {
            acc.merge(h);
        }
    }
    out
}

/// Per-cycle output histograms of one realization.
fn pt_parts(cfg: &ExperimentConfig, r: &Realization) -> Vec<Histogram> {
    cfg.cycles
        .iter()
        .map(|&m| {
            let mut h = pt_hist(cfg);
            h.extend(rescaled_probabilities(&r.spectrum, r.z0, m));
            h
        })
        .collect()
}

/// Pools the histograms of all cycle counts at or above `plateau_start`.
fn plateau(cfg: &ExperimentConfig, pooled: &[Histogram]) -> Option<(Histogram, f64)> {
    let mut acc = pt_hist(cfg);
    let mut any = false;
    for (h, &m) in pooled.iter().zip(&cfg.cycles) {
        if m >= cfg.plateau_start {
            acc.merge(h);
            any = true;
        }
    }
    any.then(|| {
        let d = l1_distance(&acc, &density_porter_thomas(1));
        (acc, d)
    })
}

fn base_summary(cfg: &ExperimentConfig) -> Map<String, Value> {
    let p = &cfg.params;
    let mut parameters = json!({
        "J": p.coupling,
        "W": p.disorder,
        "F": p.drive,
        "U_int": p.interaction,
        "omega": p.omega,
    });
    match cfg.model {
        ModelChoice::Ising => parameters["L"] = json!(cfg.sites),
        ModelChoice::BoseHubbard => {
            parameters["L"] = json!(cfg.sites);
            parameters["n_particles"] = json!(cfg.particles);
        }
        ModelChoice::Coe => parameters["N"] = json!(cfg.dim),
        ModelChoice::Goe => {
            parameters["N"] = json!(cfg.dim);
            parameters["goe_dt"] = json!(cfg.goe_dt);
        }
    }
    let mut m = Map::new();
    m.insert("experiment".into(), json!(cfg.experiment.name()));
    m.insert("model".into(), json!(cfg.model.name()));
    m.insert("parameters".into(), parameters);
    m.insert("M_list".into(), json!(cfg.cycles));
    m.insert("realizations".into(), json!(cfg.realizations));
    m.insert("master_seed".into(), json!(cfg.master_seed));
    m.insert(
        "seed_derivation".into(),
        json!("realization i of an ensemble with master s uses base = seed_stream(s, i); disorder = seed_stream(base, 0); initial_state = seed_stream(base, 1)"),
    );
    m.insert("pooling".into(), json!(POOLING));
    m.insert("plateau_start".into(), json!(cfg.plateau_start));
    m.insert(
        "binning".into(),
        json!({
            "pt": {"lo": 0.0, "hi": PT_RANGE, "bins": cfg.pt_bins, "variable": "N p"},
            "r": {"lo": 0.0, "hi": 1.0, "bins": cfg.r_bins},
            "d": {"lo": 0.0, "hi_times_N": D_RANGE_TIMES_N, "bins": cfg.d_bins},
        }),
    );
    m
}

fn finish<T>(cfg: &ExperimentConfig, tables: Vec<Table>, sweeps: &[&Sweep<T>], results: Value) -> Artifacts {
    let mut summary = base_summary(cfg);
    let ensembles: Map<String, Value> = sweeps
        .iter()
        .map(|s| (s.name.to_string(), s.to_json()))
        .collect();
    summary.insert("ensembles".into(), Value::Object(ensembles));
    summary.insert("results".into(), results);
    summary.insert(
        "artifacts".into(),
        json!(tables.iter().map(Table::file_name).collect::<Vec<_>>()),
    );
    Artifacts {
        tables,
        summary: Value::Object(summary),
    }
}

fn level_spacing(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let primary = sweep("primary", ensemble(cfg, primary_source(cfg), cfg.realizations, cfg.master_seed), |r| {
        cfg.cycles
            .iter()
            .map(|&m| {
                let mut h = r_hist(cfg);
                h.extend(r_statistics(&folded_phases(&r.spectrum.phases, m))?);
                Ok(h)
            })
            .collect::<floquet_coe::Result<Vec<_>>>()
    })?;
    let reference_ens = ensemble(
        cfg,
        Source::Coe {
            dim: cfg.reference_dim,
        },
        cfg.reference_samples,
        seed_stream(cfg.master_seed, REFERENCE_STREAM),
    );
    let reference = sweep("coe_reference", reference_ens, |r| {
        let mut h = r_hist(cfg);
        h.extend(r_statistics(&r.spectrum.phases)?);
        Ok(vec![h])
    })?;
    let coe = pool(&reference.parts, || r_hist(cfg)).remove(0);
    let coe_density = ReferenceDensity::from_histogram(&coe);
    let poisson = density_poisson_r();

    let pooled = pool(&primary.parts, || r_hist(cfg));
    let mut table = Table::new(
        "r_histogram",
        &["M", "bin_lo", "bin_hi", "count", "density", "coe_reference", "poisson"],
    );
    let mut curves = Vec::new();
    for (h, &m) in pooled.iter().zip(&cfg.cycles) {
        push_histogram(&mut table, &[m.to_string()], h, &[&coe_density, &poisson]);
        let density = h.density();
        let argmax = (0..density.len()).fold(0, |best, k| if density[k] > density[best] { k } else { best });
        let mean: f64 = h.masses().iter().zip(h.bin_centers()).map(|(p, c)| p * c).sum();
        curves.push(json!({
            "M": m,
            "samples": h.total(),
            "l1_coe_reference": l1_between(h, &coe),
            "l1_poisson": l1_distance(h, &poisson),
            "first_bin_density": density[0],
            "max_density_bin": argmax,
            "mean_r": mean,
        }));
    }
    let results = json!({
        "per_M": curves,
        "coe_reference": {
            "N": cfg.reference_dim,
            "samples": cfg.reference_samples,
            "master_seed": reference.ens.master_seed,
            "values": coe.total(),
        },
        "poisson_reference": "2 / (1 + r)^2 on [0, 1]",
    });
    Ok(finish(cfg, vec![table], &[&primary, &reference], results))
}

fn eigenstate_dist(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let primary = sweep("primary", ensemble(cfg, primary_source(cfg), cfg.realizations, cfg.master_seed), |r| {
        let mut h = d_hist(cfg, r.spectrum.dim());
        h.extend(eigenstate_products(&r.spectrum, r.z0));
        Ok(vec![h])
    })?;
    let dim = primary.dim();
    let hist = pool(&primary.parts, || d_hist(cfg, dim)).remove(0);
    let bessel = density_bessel_d(dim);
    let mut table = Table::new("d_histogram", &["bin_lo", "bin_hi", "count", "density", "bessel"]);
    push_histogram(&mut table, &[], &hist, &[&bessel]);
    let results = json!({
        "N": dim,
        "samples": hist.total(),
        "l1_bessel": l1_distance(&hist, &bessel),
        "reference": "(2N / pi) K0(N d)",
        "values": "|<z|E><E|z0>| for every eigenvector E and basis state z, z0 fixed per realization",
    });
    Ok(finish(cfg, vec![table], &[&primary], results))
}

fn pt_convergence(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let primary = sweep("primary", ensemble(cfg, primary_source(cfg), cfg.realizations, cfg.master_seed), |r| {
        Ok(pt_parts(cfg, r))
    })?;
    let pooled = pool(&primary.parts, || pt_hist(cfg));
    let pt = density_porter_thomas(1);
    let mut curve = Table::new("pt_convergence", &["M", "l1"]);
    let mut points = Vec::new();
    for (h, &m) in pooled.iter().zip(&cfg.cycles) {
        let d = l1_distance(h, &pt);
        curve.push(vec![m.to_string(), real(d)]);
        points.push(json!({"M": m, "l1": d}));
    }
    let mut tables = vec![curve];
    let mut results = json!({
        "per_M": points,
        "final_M": cfg.cycles.last(),
        "final_l1": points.last().map(|p| p["l1"].clone()),
    });
    if let Some((hist, d)) = plateau(cfg, &pooled) {
        let mut table = Table::new("pt_histogram", &["bin_lo", "bin_hi", "count", "density", "porter_thomas"]);
        push_histogram(&mut table, &[], &hist, &[&pt]);
        tables.push(table);
        results["plateau_l1"] = json!(d);
        results["plateau_samples"] = json!(hist.total());
    }
    Ok(finish(cfg, tables, &[&primary], results))
}

fn anti_concentration(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let primary = sweep("primary", ensemble(cfg, primary_source(cfg), cfg.realizations, cfg.master_seed), |r| {
        Ok(cfg
            .cycles
            .iter()
            .map(|&m| {
                let p = rescaled_probabilities(&r.spectrum, r.z0, m);
                let above = p.iter().filter(|&&x| x > cfg.delta).count() as u64;
                let mut h = pt_hist(cfg);
                h.extend(p);
                (h, above)
            })
            .collect::<Vec<_>>())
    })?;
    let mut per_m: Vec<(Histogram, u64)> = cfg.cycles.iter().map(|_| (pt_hist(cfg), 0)).collect();
    for part in &primary.parts {
        for (acc, (h, above)) in per_m.iter_mut().zip(part) {
            acc.0.merge(h);
            acc.1 += above;
        }
    }
    let mut all = pt_hist(cfg);
    let mut above_all = 0;
    let mut curve = Table::new("anti_concentration", &["M", "fraction"]);
    let mut points = Vec::new();
    for ((h, above), &m) in per_m.iter().zip(&cfg.cycles) {
        let f = *above as f64 / h.total() as f64;
        curve.push(vec![m.to_string(), real(f)]);
        points.push(json!({"M": m, "fraction": f}));
        all.merge(h);
        above_all += above;
    }
    let pt = density_porter_thomas(1);
    let mut table = Table::new("pt_histogram", &["bin_lo", "bin_hi", "count", "density", "porter_thomas"]);
    push_histogram(&mut table, &[], &all, &[&pt]);
    let results = json!({
        "delta": cfg.delta,
        "fraction": above_all as f64 / all.total() as f64,
        "porter_thomas_fraction": (-cfg.delta).exp(),
        "samples": all.total(),
        "l1_porter_thomas": l1_distance(&all, &pt),
        "per_M": points,
    });
    Ok(finish(cfg, vec![curve, table], &[&primary], results))
}

fn undriven_compare(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let c = chain(cfg).expect("validated: chain model");
    let driven = sweep("driven", ensemble(cfg, Source::Driven(c), cfg.realizations, cfg.master_seed), |r| {
        Ok(pt_parts(cfg, r))
    })?;
    let undriven = sweep("undriven", ensemble(cfg, Source::Undriven(c), cfg.realizations, cfg.master_seed), |r| {
        Ok(pt_parts(cfg, r))
    })?;
    let goe_source = Source::Goe {
        dim: driven.dim(),
        dt: cfg.goe_dt,
    };
    let goe = sweep(
        "goe",
        ensemble(cfg, goe_source, cfg.realizations, seed_stream(cfg.master_seed, GOE_STREAM)),
        |r| Ok(pt_parts(cfg, r)),
    )?;
    let pt = density_porter_thomas(1);
    let sweeps = [&driven, &undriven, &goe];
    let pooled: Vec<Vec<Histogram>> = sweeps.iter().map(|s| pool(&s.parts, || pt_hist(cfg))).collect();
    let mut curve = Table::new("undriven_compare", &["M", "driven", "undriven", "goe"]);
    for (k, &m) in cfg.cycles.iter().enumerate() {
        let mut row = vec![m.to_string()];
        row.extend(pooled.iter().map(|p| real(l1_distance(&p[k], &pt))));
        curve.push(row);
    }
    let mut results = Map::new();
    let mut plateaus = Vec::new();
    for (s, p) in sweeps.iter().zip(&pooled) {
        let value = plateau(cfg, p).map(|(_, d)| d);
        plateaus.push(value);
        results.insert(format!("{}_plateau_l1", s.name), json!(value));
    }
    if let (Some(d), Some(u)) = (plateaus[0], plateaus[1]) {
        results.insert("undriven_to_driven_ratio".into(), json!(u / d));
    }
    results.insert("goe_dt".into(), json!(cfg.goe_dt));
    results.insert(
        "undriven_hamiltonian".into(),
        json!("period average H0 + V/2, sampled once per drive period"),
    );
    Ok(finish(cfg, vec![curve], &sweeps, Value::Object(results)))
}

/// Draws random COE circuits, redrawing any whose spin model is too large
/// for brute-force enumeration, and compares partition functions with
/// state-vector amplitudes.
fn verify_ising_map(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let limit = 1000 * cfg.trials.max(1);
    let mut accepted = Vec::with_capacity(cfg.trials);
    let mut rejected = 0usize;
    let mut draw = 0u64;
    while accepted.len() < cfg.trials {
        if rejected > limit {
            return Err(CliError::Usage(format!(
                "more than {limit} circuits exceeded {MAX_FREE_SPINS} free spins; lower max_qubits or max_layers"
            )));
        }
        let s = seed_stream(cfg.master_seed, draw);
        draw += 1;
        let n = 1 + (s % cfg.max_qubits as u64) as usize;
        let layers = 1 + ((s >> 16) % cfg.max_layers as u64) as usize;
        let cycles = 1 + ((s >> 32) & 1) as usize;
        let circuit_seed = seed_stream(s, 0);
        let circuit = build_coe_circuit(n, layers, circuit_seed)?;
        match map_to_ising(&circuit, &vec![0; n], &vec![0; n], cycles) {
            Ok(g) => accepted.push((circuit, n, layers, cycles, circuit_seed, g.len(), g.free_spins())),
            Err(floquet_coe::Error::SizeLimit(_)) => rejected += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let deviations: Vec<f64> = accepted
        .par_iter()
        .map(|(c, _, _, m, seed, _, _)| verify_mapping(c, *m, cfg.pairs, seed_stream(*seed, 1)))
        .collect::<floquet_coe::Result<_>>()?;
    let mut table = Table::new(
        "ising_map",
        &["trial", "qubits", "layers", "cycles", "circuit_seed", "spins", "free_spins", "max_deviation"],
    );
    for (k, ((_, n, layers, m, seed, spins, free), dev)) in accepted.iter().zip(&deviations).enumerate() {
        table.push(vec![
            k.to_string(),
            n.to_string(),
            layers.to_string(),
            m.to_string(),
            seed.to_string(),
            spins.to_string(),
            free.to_string(),
            real(*dev),
        ]);
    }
    let max_dev = deviations.iter().copied().fold(0.0, f64::max);
    let results = json!({
        "trials": cfg.trials,
        "pairs_per_circuit": cfg.pairs,
        "max_qubits": cfg.max_qubits,
        "max_layers": cfg.max_layers,
        "max_deviation": max_dev,
        "tolerance": MAPPING_TOL,
        "failures": deviations.iter().filter(|&&d| !(d < MAPPING_TOL)).count(),
        "rejected_draws": rejected,
        "max_free_spins": MAX_FREE_SPINS,
        "sampling": "draw k uses s = seed_stream(master_seed, k): qubits 1 + s mod max_qubits, layers 1 + (s >> 16) mod max_layers, cycles 1 + ((s >> 32) & 1), circuit seed seed_stream(s, 0), bit strings from seed_stream(circuit seed, 1); circuits above max_free_spins are redrawn",
    });
    Ok(finish::<()>(cfg, vec![table], &[], results))
}

struct BaselinePart {
    pt: Vec<Histogram>,
    above: Vec<u64>,
    /// Per cycle count: variances of the real and imaginary amplitude parts.
    variances: Vec<(f64, f64)>,
    r: Histogram,
    d: Histogram,
}

fn variances(amps: &[floquet_coe::Complex64]) -> (f64, f64) {
    let n = amps.len() as f64;
    let (ma, mb) = (
        amps.iter().map(|a| a.re).sum::<f64>() / n,
        amps.iter().map(|a| a.im).sum::<f64>() / n,
    );
    (
        amps.iter().map(|a| (a.re - ma).powi(2)).sum::<f64>() / n,
        amps.iter().map(|a| (a.im - mb).powi(2)).sum::<f64>() / n,
    )
}

fn rmt_baseline(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let primary = sweep("primary", ensemble(cfg, primary_source(cfg), cfg.realizations, cfg.master_seed), |r| {
        let n = r.spectrum.dim() as f64;
        let mut part = BaselinePart {
            pt: Vec::new(),
            above: Vec::new(),
            variances: Vec::new(),
            r: r_hist(cfg),
            d: d_hist(cfg, r.spectrum.dim()),
        };
        for &m in &cfg.cycles {
            let amps = amplitudes(&r.spectrum, r.z0, m);
            let p: Vec<f64> = amps.iter().map(|a| n * a.norm_sqr()).collect();
            part.above.push(p.iter().filter(|&&x| x > cfg.delta).count() as u64);
            let mut h = pt_hist(cfg);
            h.extend(p);
            part.pt.push(h);
            part.variances.push(variances(&amps));
        }
        part.r.extend(r_statistics(&r.spectrum.phases)?);
        part.d.extend(eigenstate_products(&r.spectrum, r.z0));
        Ok(part)
    })?;
    let dim = primary.dim();
    let pt = density_porter_thomas(1);
    let bessel = density_bessel_d(dim);
    let poisson = density_poisson_r();
    let half = 1.0 / (2.0 * dim as f64);
    let count = primary.parts.len() as f64;

    let mut r_all = r_hist(cfg);
    let mut d_all = d_hist(cfg, dim);
    for part in &primary.parts {
        r_all.merge(&part.r);
        d_all.merge(&part.d);
    }
    let mut curve = Table::new(
        "rmt_baseline",
        &["M", "l1_porter_thomas", "fraction", "variance_re_ratio", "variance_im_ratio"],
    );
    let mut points = Vec::new();
    for (k, &m) in cfg.cycles.iter().enumerate() {
        let mut h = pt_hist(cfg);
        let (mut above, mut va, mut vb) = (0u64, 0.0, 0.0);
        for part in &primary.parts {
            h.merge(&part.pt[k]);
            above += part.above[k];
            va += part.variances[k].0;
            vb += part.variances[k].1;
        }
        let (l1, f) = (l1_distance(&h, &pt), above as f64 / h.total() as f64);
        let (ra, rb) = (va / count / half, vb / count / half);
        curve.push(vec![m.to_string(), real(l1), real(f), real(ra), real(rb)]);
        points.push(json!({
            "M": m,
            "l1_porter_thomas": l1,
            "fraction": f,
            "variance_re_ratio": ra,
            "variance_im_ratio": rb,
        }));
    }
    let mut r_table = Table::new("r_histogram", &["bin_lo", "bin_hi", "count", "density", "poisson"]);
    push_histogram(&mut r_table, &[], &r_all, &[&poisson]);
    let mut d_table = Table::new("d_histogram", &["bin_lo", "bin_hi", "count", "density", "bessel"]);
    push_histogram(&mut d_table, &[], &d_all, &[&bessel]);
    let mean_r: f64 = r_all.masses().iter().zip(r_all.bin_centers()).map(|(p, c)| p * c).sum();
    let results = json!({
        "N": dim,
        "delta": cfg.delta,
        "per_M": points,
        "variance_target": half,
        "variance_definition": "population variance over z of Re and Im of <z|U^M|z0>, averaged over realizations, divided by 1/(2N)",
        "l1_bessel": l1_distance(&d_all, &bessel),
        "l1_poisson_r": l1_distance(&r_all, &poisson),
        "mean_r": mean_r,
    });
    Ok(finish(cfg, vec![curve, r_table, d_table], &[&primary], results))
}
