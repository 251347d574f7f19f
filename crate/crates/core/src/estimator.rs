//! Monte Carlo estimators over tetris pairs.
//!
//! Every sample draws its own random stream from `(master_seed, index)`, and
//! results are reduced in index order, so the output does not depend on how
//! samples are scheduled across threads.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::noise::NoiseModel;
use crate::pauli::PauliString;
use crate::state::State;
use crate::tetris::{apply_events, attenuation_report, AngleAssignment, AttenuationReport, Background, TetrisSampler};

/// Random stream for sample `index`: ChaCha8 keyed by the master seed, with
/// the sample index selecting the stream.
pub fn sample_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Child seed for independent runs (for example the points of a time grid)
/// sharing one master seed. Draws from a stream no sample index reaches.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    use rand::RngCore;
    sample_rng(master_seed, u64::MAX - index).next_u64()
}

/// Hermitian observable: a real combination of Pauli strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Observable {
    Pauli(PauliString),
    Sum(Vec<(f64, PauliString)>),
}

impl Observable {
    pub fn n_qubits(&self) -> Option<usize> {
        match self {
            Observable::Pauli(p) => Some(p.n_qubits()),
            Observable::Sum(terms) => terms.first().map(|(_, p)| p.n_qubits()),
        }
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        let sizes: Vec<usize> = match self {
            Observable::Pauli(p) => vec![p.n_qubits()],
            Observable::Sum(terms) => terms.iter().map(|(_, p)| p.n_qubits()).collect(),
        };
        match sizes.into_iter().find(|&n| n != n_qubits) {
            Some(got) => Err(Error::QubitMismatch { expected: n_qubits, got }),
            None => Ok(()),
        }
    }

    /// `<bra|M|ket>`.
    pub fn matrix_element(&self, bra: &State, ket: &State) -> Complex64 {
        match self {
            Observable::Pauli(p) => bra.matrix_element_unchecked(p, ket),
            Observable::Sum(terms) => terms.iter().map(|(c, p)| bra.matrix_element_unchecked(p, ket) * c).sum(),
        }
    }

    /// Energy observable `H(t)` frozen at time `t`.
    pub fn hamiltonian_at(h: &Hamiltonian, t: f64) -> Observable {
        Observable::Sum(h.terms().iter().map(|term| (term.schedule.value(t), term.pauli)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSettings {
    pub t: f64,
    pub angles: AngleAssignment,
    pub n_samples: usize,
    pub noise: Option<NoiseModel>,
    pub background: Option<Background>,
    pub master_seed: u64,
}

impl EstimatorSettings {
    pub fn new(t: f64, angles: AngleAssignment, n_samples: usize, master_seed: u64) -> Self {
        EstimatorSettings { t, angles, n_samples, noise: None, background: None, master_seed }
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = Some(noise);
        self
    }

    pub fn with_background(mut self, background: Background) -> Self {
        self.background = Some(background);
        self
    }

    fn validate(&self, h: &Hamiltonian) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidArgument("n_samples must be positive".into()));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid time {}", self.t)));
        }
        AngleAssignment::new(self.angles.as_slice().to_vec())?;
        if self.angles.len() != h.n_terms() {
            return Err(Error::InvalidArgument(format!(
                "{} angles supplied for {} terms",
                self.angles.len(),
                h.n_terms()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    /// Attenuation-corrected estimate.
    pub mean: Complex64,
    /// Sample mean before dividing by the attenuation factors.
    pub raw_mean: Complex64,
    /// Standard errors of the real and imaginary parts of `mean`.
    pub stderr_re: f64,
    pub stderr_im: f64,
    /// Covariance of the real and imaginary parts of `mean`.
    pub cov_re_im: f64,
    pub n_samples: usize,
    /// Average number of gates applied per sample (both copies for expectations).
    pub mean_gates: f64,
    pub report: AttenuationReport,
}

impl EstimatorResult {
    /// Standard error of one corrected sample, `stderr_re * sqrt(n)`.
    pub fn sample_std_re(&self) -> f64 {
        self.stderr_re * (self.n_samples as f64).sqrt()
    }
}

pub(crate) struct Sample {
    pub(crate) value: Complex64,
    pub(crate) gates: usize,
}

/// Sums in index order and scales by `1 / divisor`.
pub(crate) fn reduce(samples: &[Sample], divisor: f64, report: AttenuationReport) -> EstimatorResult {
    let n = samples.len() as f64;
    let raw_mean = samples.iter().map(|s| s.value).sum::<Complex64>() / n;
    let (mut var_re, mut var_im, mut cov) = (0.0, 0.0, 0.0);
    for s in samples {
        let d = s.value - raw_mean;
        var_re += d.re * d.re;
        var_im += d.im * d.im;
        cov += d.re * d.im;
    }
    let dof = if samples.len() > 1 { n - 1.0 } else { 1.0 };
    let scale = 1.0 / (divisor * divisor * dof * n);
    EstimatorResult {
        mean: raw_mean / divisor,
        raw_mean,
        stderr_re: (var_re * scale).sqrt(),
        stderr_im: (var_im * scale).sqrt(),
        cov_re_im: cov * scale,
        n_samples: samples.len(),
        mean_gates: samples.iter().map(|s| s.gates as f64).sum::<f64>() / n,
        report,
    }
}

/// `<ψ(t)|M|ψ(t)>` for a Pauli observable.
pub fn estimate_expectation(
    h: &Hamiltonian,
    observable: &PauliString,
    initial: &State,
    settings: &EstimatorSettings,
) -> Result<EstimatorResult> {
    estimate_observable(h, &Observable::Pauli(*observable), initial, settings)
}

/// `<ψ(t)|M|ψ(t)> = E[<ψ_T'|M|ψ_T>] / λ_att` over independent tetrises `T, T'`,
/// further divided by `q_att` when the noise model asks for mitigation.
pub fn estimate_observable(
    h: &Hamiltonian,
    observable: &Observable,
    initial: &State,
    settings: &EstimatorSettings,
) -> Result<EstimatorResult> {
    settings.validate(h)?;
    observable.check(h.n_qubits())?;
    check_initial(h, initial)?;
    let noise = settings.noise.as_ref();
    let background = settings.background.as_ref();
    let report = attenuation_report(h, settings.t, &settings.angles, noise, background)?;
    let sampler = TetrisSampler::new(h, settings.t, &settings.angles, background)?;

    let samples: Vec<Sample> = (0..settings.n_samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(settings.master_seed, index);
            let ket_tetris = sampler.sample(&mut rng);
            let bra_tetris = sampler.sample(&mut rng);
            let mut ket = initial.clone();
            let mut bra = initial.clone();
            let fk = apply_events(&mut ket, &ket_tetris, h, &settings.angles, background, noise.map(|m| (m, &mut rng)));
            let fb = apply_events(&mut bra, &bra_tetris, h, &settings.angles, background, noise.map(|m| (m, &mut rng)));
            Sample {
                value: observable.matrix_element(&bra, &ket) * (fk * fb),
                gates: ket_tetris.len() + bra_tetris.len(),
            }
        })
        .collect();

    let mitigation = match noise {
        Some(m) if m.mitigate => report.q_att,
        _ => 1.0,
    };
    Ok(reduce(&samples, report.lambda_att * mitigation, report))
}

/// Loschmidt echo `L(t) = <ψ(0)|ψ(t)> = E[<ψ(0)|ψ_T>] / sqrt(λ_att)`, one
/// tetris per sample; mitigation divides by `sqrt(q_att)`.
pub fn estimate_loschmidt(h: &Hamiltonian, initial: &State, settings: &EstimatorSettings) -> Result<EstimatorResult> {
    settings.validate(h)?;
    check_initial(h, initial)?;
    let noise = settings.noise.as_ref();
    let background = settings.background.as_ref();
    let mut report = attenuation_report(h, settings.t, &settings.angles, noise, background)?;
    let sampler = TetrisSampler::new(h, settings.t, &settings.angles, background)?;

    let samples: Vec<Sample> = (0..settings.n_samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(settings.master_seed, index);
            let tetris = sampler.sample(&mut rng);
            let mut ket = initial.clone();
            let f = apply_events(&mut ket, &tetris, h, &settings.angles, background, noise.map(|m| (m, &mut rng)));
            Sample { value: initial.inner_product(&ket).unwrap() * f, gates: tetris.len() }
        })
        .collect();

    let mitigation = match noise {
        Some(m) if m.mitigate => report.q_att.sqrt(),
        _ => 1.0,
    };
    let divisor = report.lambda_att.sqrt() * mitigation;
    // Single-copy attenuation factors.
    report.lambda_att = report.lambda_att.sqrt();
    report.q_att = report.q_att.sqrt();
    Ok(reduce(&samples, divisor, report))
}

fn check_initial(h: &Hamiltonian, initial: &State) -> Result<()> {
    if initial.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch { expected: h.n_qubits(), got: initial.n_qubits() });
    }
    Ok(())
}

/// `R = Im L / Re L`, invariant under positive rescaling of `L`.
pub fn ratio_r(value: Complex64, floor: f64) -> Result<f64> {
    if !(value.re.abs() > floor) {
        return Err(Error::RatioUndefined { re: value.re, floor });
    }
    Ok(value.im / value.re)
}

/// Ratio with the real-part floor set to 10 standard errors, plus its
/// delta-method standard error.
pub fn ratio_from_estimate(result: &EstimatorResult) -> Result<(f64, f64)> {
    let r = ratio_r(result.mean, 10.0 * result.stderr_re)?;
    let (re, im) = (result.mean.re, result.mean.im);
    let d_re = -im / (re * re);
    let d_im = 1.0 / re;
    let var = d_re * d_re * result.stderr_re.powi(2)
        + d_im * d_im * result.stderr_im.powi(2)
        + 2.0 * d_re * d_im * result.cov_re_im;
    Ok((r, var.max(0.0).sqrt()))
}

/// One CSV row: `t,mean_re,mean_im,stderr_re,stderr_im,n_samples,lambda_att,q_att`.
pub const CSV_HEADER: &str = "t,mean_re,mean_im,stderr_re,stderr_im,n_samples,lambda_att,q_att";

pub fn csv_row(t: f64, result: &EstimatorResult) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        t,
        result.mean.re,
        result.mean.im,
        result.stderr_re,
        result.stderr_im,
        result.n_samples,
        result.report.lambda_att,
        result.report.q_att
    )
}
