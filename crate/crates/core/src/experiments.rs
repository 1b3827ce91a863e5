//! Monte Carlo drivers for the concentration and gradient-decay sweeps, and
//! the statistics used to summarize them.
//!
//! Every instance draws from its own stream, keyed by `(n_h, instance)` and
//! the config's base seed, so results do not depend on how rayon schedules the
//! work. Records come back ordered by `(n_h, instance)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{
    enumerate_two_local_terms, gue_hamiltonian, haar_state, sample_two_local, two_local_term_count,
    CoeffDistribution, SeededRng,
};
use crate::error::{Error, Result};
use crate::gradients::{finite_diff_gradient, GradientRecord, DEFAULT_STEP};
use crate::linalg::{fidelity, hermitian_eig, trace_distance, BipartiteDims};
use crate::models::{
    mixedness_distance, mixedness_distance_pure, thermal_state, BoltzmannModel, UnitaryAnsatz,
};

/// Largest full Hilbert-space dimension an experiment may allocate.
pub const MAX_DIM: usize = 1 << 12;
pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_EVOLUTION_TIME: f64 = 10.0;

const TARGET_STREAM_TAG: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "trace_distance")]
    TraceDistance,
    #[serde(rename = "grad_unitary")]
    GradUnitary,
    #[serde(rename = "grad_qbm")]
    GradQbm,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 3] = [Self::TraceDistance, Self::GradUnitary, Self::GradQbm];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::TraceDistance => "trace_distance",
            Self::GradUnitary => "grad_unitary",
            Self::GradQbm => "grad_qbm",
        }
    }

    pub fn is_gradient(&self) -> bool {
        !matches!(self, Self::TraceDistance)
    }

    /// Whether `model` can be run under this experiment.
    pub fn supports(&self, model: ModelKind) -> bool {
        match self {
            Self::TraceDistance => true,
            Self::GradUnitary => model == ModelKind::Unitary,
            Self::GradQbm => model == ModelKind::QbmNormalized,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown experiment kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// `exp(-iHt)|0...0>` with `H` drawn from the GUE.
    #[serde(rename = "gue_t10")]
    GueT10,
    #[serde(rename = "unitary")]
    Unitary,
    #[serde(rename = "qbm_normalized")]
    QbmNormalized,
    #[serde(rename = "haar")]
    Haar,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [Self::GueT10, Self::Unitary, Self::QbmNormalized, Self::Haar];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::GueT10 => "gue_t10",
            Self::Unitary => "unitary",
            Self::QbmNormalized => "qbm_normalized",
            Self::Haar => "haar",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model {s:?}")))
    }
}

/// Inclusive range of hidden-qubit counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiddenRange {
    pub min: u32,
    pub max: u32,
}

impl HiddenRange {
    pub fn iter(&self) -> impl Iterator<Item = u32> {
        self.min..=self.max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distributions {
    /// Onsite couplings of sampled two-local Hamiltonians.
    pub onsite: CoeffDistribution,
    /// Offsite couplings of sampled two-local Hamiltonians.
    pub offsite: CoeffDistribution,
    /// Rotation angles of the unitary ansatz.
    pub params: CoeffDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: ModelKind,
    pub n_v: u32,
    pub n_h: HiddenRange,
    pub instances: usize,
    pub seed: u64,
    pub distributions: Distributions,
    /// Finite-difference step.
    pub h: f64,
    /// Evolution time for `gue_t10`.
    pub t: f64,
    pub bins: usize,
}

/// A single config violation, keyed by its dotted path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

impl Distributions {
    /// Onsite N(0, 0.01), offsite N(0, 1); angles uniform on `[0, 1)` for
    /// concentration sweeps and N(0, 1) for gradient sweeps.
    pub fn defaults_for(kind: ExperimentKind) -> Self {
        Self {
            onsite: CoeffDistribution::normal(0.0, 0.01),
            offsite: CoeffDistribution::normal(0.0, 1.0),
            params: match kind {
                ExperimentKind::TraceDistance => CoeffDistribution::uniform(0.0, 1.0),
                _ => CoeffDistribution::normal(0.0, 1.0),
            },
        }
    }
}

impl ExperimentConfig {
    /// Config with every optional field at its default.
    pub fn new(
        experiment: ExperimentKind,
        model: ModelKind,
        n_v: u32,
        n_h: HiddenRange,
        instances: usize,
        seed: u64,
    ) -> Self {
        Self {
            experiment,
            model,
            n_v,
            n_h,
            instances,
            seed,
            distributions: Distributions::defaults_for(experiment),
            h: DEFAULT_STEP,
            t: DEFAULT_EVOLUTION_TIME,
            bins: DEFAULT_BINS,
        }
    }

    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        if !self.experiment.supports(self.model) {
            issues.push(ConfigIssue::new(
                "model",
                format!(
                    "model {} is not compatible with experiment {}",
                    self.model, self.experiment
                ),
            ));
        }
        if self.n_v < 1 {
            issues.push(ConfigIssue::new("n_v", "must be at least 1"));
        }
        if self.n_h.min > self.n_h.max {
            issues.push(ConfigIssue::new(
                "n_h",
                format!("empty range: min {} > max {}", self.n_h.min, self.n_h.max),
            ));
        }
        if self.instances < 1 {
            issues.push(ConfigIssue::new("instances", "must be at least 1"));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            issues.push(ConfigIssue::new(
                "h",
                format!("must be positive, got {}", self.h),
            ));
        }
        if !self.t.is_finite() {
            issues.push(ConfigIssue::new("t", "must be finite"));
        }
        if self.bins < 1 {
            issues.push(ConfigIssue::new("bins", "must be at least 1"));
        }
        for (name, d) in [
            ("onsite", self.distributions.onsite),
            ("offsite", self.distributions.offsite),
            ("params", self.distributions.params),
        ] {
            if let Err(e) = d.validate() {
                issues.push(ConfigIssue::new(
                    format!("distributions.{name}"),
                    e.to_string(),
                ));
            }
        }
        issues
    }

    /// Refuses sweeps whose largest cell exceeds [`MAX_DIM`], before anything is allocated.
    pub fn check_resources(&self) -> Result<()> {
        let qubits = self.n_v.saturating_add(self.n_h.max);
        if qubits > MAX_DIM.trailing_zeros() {
            return Err(Error::ResourceLimit {
                dim: 1usize << qubits.min(62),
                limit: MAX_DIM,
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if !issues.is_empty() {
            let text: Vec<String> = issues.iter().map(|i| i.to_string()).collect();
            return Err(Error::InvalidParameter(text.join("; ")));
        }
        self.check_resources()
    }

    pub fn dims(&self, n_h: u32) -> Result<BipartiteDims> {
        BipartiteDims::new(self.n_v, n_h)
    }
}

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub experiment: ExperimentKind,
    pub model: ModelKind,
    pub n_v: u32,
    pub n_h: u32,
    pub instance: usize,
    pub seed: u64,
    /// Trace distance, or gradient infinity-norm for gradient sweeps.
    pub value: f64,
}

/// Aggregate statistics of one `(model, n_h)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: ModelKind,
    pub n_h: u32,
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub hist_peak: f64,
    pub bound: f64,
}

/// Least-squares fit of `ln y = slope * x + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<Record>,
    /// Full gradient vectors; empty for concentration sweeps.
    pub gradients: Vec<GradientRecord>,
    pub summary: Vec<SummaryRow>,
    pub fit: Option<FitResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub peak: f64,
}

/// Stream index of instance `instance` in cell `n_h`.
pub fn instance_stream(n_h: u32, instance: usize) -> u64 {
    ((n_h as u64) << 32) | instance as u64
}

fn target_stream(n_h: u32) -> u64 {
    TARGET_STREAM_TAG | n_h as u64
}

/// Uniform bins over `[min, max]`; the peak is the centre of the fullest bin,
/// ties going to the lowest bin. A zero-width range collapses to one bin.
pub fn histogram_peak(data: &[f64], bins: usize) -> Result<Histogram> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if bins < 1 {
        return Err(Error::InvalidParameter(
            "histogram needs at least one bin".into(),
        ));
    }
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidParameter(
            "histogram data must be finite".into(),
        ));
    }
    if hi == lo {
        return Ok(Histogram {
            edges: vec![lo, hi],
            counts: vec![data.len()],
            peak: lo,
        });
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in data {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    let peak = 0.5 * (edges[best] + edges[best + 1]);
    Ok(Histogram {
        edges,
        counts,
        peak,
    })
}

/// Ordinary least squares of `ln y` against `x`.
pub fn semilog_fit(x: &[f64], y: &[f64]) -> Result<FitResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if let Some(bad) = y.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Fit(format!(
            "semilog fit needs positive y, got {bad}"
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if x.len() < 2 || sxx == 0.0 {
        return Err(Error::Fit("need at least two distinct x values".into()));
    }
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - (slope * a + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        x: x.to_vec(),
    })
}

/// `1/2 sqrt(D_v / D_h)`.
pub fn bound_curve(dims: BipartiteDims) -> f64 {
    0.5 * (dims.d_v() as f64 / dims.d_h() as f64).sqrt()
}

/// Fraction of samples with `|x - center| >= eps`.
pub fn tail_fraction(data: &[f64], center: f64, eps: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let hits = data.iter().filter(|&&x| (x - center).abs() >= eps).count();
    Ok(hits as f64 / data.len() as f64)
}

/// Sample mean and unbiased variance (exactly zero for constant data).
pub fn mean_and_variance(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    if data.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = data.iter().sum::<f64>() / n;
    if data.len() < 2 || data.iter().all(|&x| x == data[0]) {
        return (mean, 0.0);
    }
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn summarize(cfg: &ExperimentConfig, records: &[Record]) -> Result<Vec<SummaryRow>> {
    cfg.n_h
        .iter()
        .map(|n_h| {
            let values: Vec<f64> = records
                .iter()
                .filter(|r| r.n_h == n_h)
                .map(|r| r.value)
                .collect();
            let (mean, variance) = mean_and_variance(&values);
            let hist = histogram_peak(&values, cfg.bins)?;
            Ok(SummaryRow {
                model: cfg.model,
                n_h,
                count: values.len(),
                mean,
                variance,
                hist_peak: hist.peak,
                bound: bound_curve(cfg.dims(n_h)?),
            })
        })
        .collect()
}

fn jobs(cfg: &ExperimentConfig) -> Vec<(u32, usize)> {
    cfg.n_h
        .iter()
        .flat_map(|n_h| (0..cfg.instances).map(move |i| (n_h, i)))
        .collect()
}

/// `exp(-iHt)|0>` through the spectrum of `H`.
fn evolve_from_zero(h: &crate::linalg::ComplexMatrix, t: f64) -> Result<Vec<Complex64>> {
    let spec = hermitian_eig(h)?;
    let u = &spec.eigenvectors;
    let d = spec.dim();
    let coeffs: Vec<Complex64> = (0..d)
        .map(|j| u[(0, j)].conj() * Complex64::new(0.0, -spec.eigenvalues[j] * t).exp())
        .collect();
    Ok((0..d)
        .map(|i| (0..d).map(|j| u[(i, j)] * coeffs[j]).sum())
        .collect())
}

/// Mixedness of one sampled model state.
pub fn sample_mixedness(
    cfg: &ExperimentConfig,
    dims: BipartiteDims,
    rng: &mut SeededRng,
) -> Result<f64> {
    match cfg.model {
        ModelKind::Haar => mixedness_distance_pure(&haar_state(dims, rng), dims),
        ModelKind::GueT10 => {
            let h = gue_hamiltonian(dims.dim(), rng);
            mixedness_distance_pure(&evolve_from_zero(&h, cfg.t)?, dims)
        }
        ModelKind::Unitary => {
            let n_terms = two_local_term_count(dims.qubits());
            let params = cfg.distributions.params.sample_n(n_terms, rng)?;
            let psi = UnitaryAnsatz::two_local(dims, params)?.state();
            mixedness_distance_pure(&psi, dims)
        }
        ModelKind::QbmNormalized => {
            let h = sample_two_local(
                dims.qubits(),
                &cfg.distributions.onsite,
                &cfg.distributions.offsite,
                rng,
            )?;
            let rho = BoltzmannModel::new(h, true)?.thermal_state()?;
            mixedness_distance(&rho, dims)
        }
    }
}

/// Trace distance of each sampled model's visible marginal to `I / D_v`.
pub fn run_trace_distance_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    if cfg.experiment != ExperimentKind::TraceDistance {
        return Err(Error::InvalidParameter(format!(
            "expected a trace_distance config, got {}",
            cfg.experiment
        )));
    }
    let records = jobs(cfg)
        .into_par_iter()
        .map(|(n_h, instance)| {
            let dims = cfg.dims(n_h)?;
            let mut rng = SeededRng::new(cfg.seed, instance_stream(n_h, instance));
            let seed = rng.seed();
            let value = sample_mixedness(cfg, dims, &mut rng)?;
            Ok(Record {
                experiment: cfg.experiment,
                model: cfg.model,
                n_v: cfg.n_v,
                n_h,
                instance,
                seed,
                value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(cfg, &records)?;
    Ok(SweepOutput {
        records,
        gradients: Vec::new(),
        summary,
        fit: None,
    })
}

/// Gradient of the fidelity between the unitary ansatz state and `target`.
fn unitary_fidelity_gradient(
    dims: BipartiteDims,
    target: &crate::linalg::ComplexMatrix,
    params: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let terms = enumerate_two_local_terms(dims.qubits());
    let ansatz = UnitaryAnsatz::with_terms(dims, terms, params.to_vec())?;
    let objective = |theta: &[f64]| {
        let mut a = ansatz.clone();
        match a.set_params(theta) {
            Ok(()) => fidelity(&a.state(), target).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        }
    };
    finite_diff_gradient(objective, params, h)
}

/// `g_k = T(rho(theta), rho(theta + h e_k)) / h` for a normalized Boltzmann machine.
pub fn qbm_trace_distance_gradient(model: &BoltzmannModel, h: f64) -> Result<Vec<f64>> {
    let base = model.thermal_state()?;
    (0..model.num_params())
        .map(|k| {
            let perturbed = thermal_state(&model.perturbed_hamiltonian(k, h)?)?;
            Ok(trace_distance(&base, &perturbed)? / h)
        })
        .collect()
}

/// Gradient infinity-norm statistics per hidden size, with a semilog fit of
/// the per-cell variance against `n_h`.
pub fn run_gradient_decay_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    if !cfg.experiment.is_gradient() {
        return Err(Error::InvalidParameter(format!(
            "expected a gradient config, got {}",
            cfg.experiment
        )));
    }
    if cfg.n_h.max == cfg.n_h.min {
        return Err(Error::Fit(
            "a decay fit needs at least two n_h cells".into(),
        ));
    }

    // one fixed thermal target per cell for the fidelity objective
    let targets = if cfg.experiment == ExperimentKind::GradUnitary {
        cfg.n_h
            .iter()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|n_h| {
                let dims = cfg.dims(n_h)?;
                let mut rng = SeededRng::new(cfg.seed, target_stream(n_h));
                let h = sample_two_local(
                    dims.qubits(),
                    &cfg.distributions.onsite,
                    &cfg.distributions.offsite,
                    &mut rng,
                )?;
                thermal_state(&crate::ensembles::assemble_hamiltonian(&h))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    let gradients = jobs(cfg)
        .into_par_iter()
        .map(|(n_h, instance)| {
            let dims = cfg.dims(n_h)?;
            let mut rng = SeededRng::new(cfg.seed, instance_stream(n_h, instance));
            let seed = rng.seed();
            let gradient = match cfg.experiment {
                ExperimentKind::GradUnitary => {
                    let target = &targets[(n_h - cfg.n_h.min) as usize];
                    let n_terms = two_local_term_count(dims.qubits());
                    let params = cfg.distributions.params.sample_n(n_terms, &mut rng)?;
                    unitary_fidelity_gradient(dims, target, &params, cfg.h)?
                }
                _ => {
                    let h = sample_two_local(
                        dims.qubits(),
                        &cfg.distributions.onsite,
                        &cfg.distributions.offsite,
                        &mut rng,
                    )?;
                    qbm_trace_distance_gradient(&BoltzmannModel::new(h, true)?, cfg.h)?
                }
            };
            Ok(GradientRecord::new(
                cfg.model, dims, instance, seed, gradient,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let records: Vec<Record> = gradients
        .iter()
        .map(|g| Record {
            experiment: cfg.experiment,
            model: cfg.model,
            n_v: cfg.n_v,
            n_h: g.dims.n_h(),
            instance: g.instance,
            seed: g.seed,
            value: g.inf_norm,
        })
        .collect();
    let summary = summarize(cfg, &records)?;
    let x: Vec<f64> = summary.iter().map(|r| r.n_h as f64).collect();
    let y: Vec<f64> = summary.iter().map(|r| r.variance).collect();
    let fit = semilog_fit(&x, &y)?;
    Ok(SweepOutput {
        records,
        gradients,
        summary,
        fit: Some(fit),
    })
}

/// Dispatches on the experiment kind.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    match cfg.experiment {
        ExperimentKind::TraceDistance => run_trace_distance_sweep(cfg),
        _ => run_gradient_decay_sweep(cfg),
    }
}
