//! TOML experiment configuration.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use tetris_core::analytics::{optimal_angles, AngleMethod};
use tetris_core::estimator::Observable;
use tetris_core::models::{build_ising2d, build_ising2d_adiabatic, single_site_z};
use tetris_core::noise::{NoiseMode, NoiseModel};
use tetris_core::tetris::{AngleAssignment, Background};
use tetris_core::{jordan_wigner, FermionTermSet, Hamiltonian, PauliLetter, PauliString, State};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    /// Bitstring, character `k` is qubit `k`. Defaults to all zeros.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    /// Pauli string, `mean_z`, `energy` or `loschmidt`. Defaults to `mean_z`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
    /// `none` or `all-<letters>`, e.g. `all-ZZ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub hamiltonian: HamiltonianSource,
    pub time: TimeGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<AngleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trotter: Option<TrotterSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adiabatic: Option<AdiabaticSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSpec>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianSource {
    Ising2d {
        rows: usize,
        cols: usize,
        h: f64,
        #[serde(default = "yes")]
        periodic: bool,
    },
    Ising2dAdiabatic {
        rows: usize,
        cols: usize,
        h_final: f64,
        ramp_time: f64,
        #[serde(default = "yes")]
        periodic: bool,
    },
    /// Inline `coefficient pauli` lines.
    Pauli { terms: Vec<String> },
    PauliFile { path: PathBuf },
    FermionFile { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    /// Number of intervals between `start` and `stop`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngleSpec {
    Uniform { tau: f64 },
    Explicit { values: Vec<f64> },
    Optimal {
        #[serde(default = "default_method")]
        method: AngleMethod,
    },
}

fn default_method() -> AngleMethod {
    AngleMethod::Numeric
}

fn default_mode() -> NoiseMode {
    NoiseMode::StochasticDepolarizing
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    #[serde(default = "default_mode")]
    pub mode: NoiseMode,
    #[serde(default)]
    pub mitigate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterSpec {
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdiabaticSpec {
    pub ramp_times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    pub epsilon: f64,
    #[serde(default = "unit")]
    pub trotter_coefficient: f64,
}

fn unit() -> f64 {
    1.0
}

/// What an observable string resolved to.
#[derive(Clone, Debug)]
pub enum Target {
    Loschmidt,
    Energy,
    Fixed(Observable),
}

/// Validated configuration plus everything loaded from disk.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub hamiltonian: Hamiltonian,
    pub initial: State,
    pub times: Vec<f64>,
    /// Hashes of referenced input files, in a fixed order.
    pub input_hashes: Vec<(String, String)>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow!("config error at {path}: {}", e.into_inner().message().trim())
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text)
    }

    /// Canonical TOML of the resolved configuration.
    pub fn canonical(&self) -> Result<String> {
        toml::to_string(self).context("serializing resolved config")
    }

    pub fn sha256(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.canonical()?.as_bytes())))
    }

    pub fn observable_name(&self) -> &str {
        self.observable.as_deref().unwrap_or("mean_z")
    }

    pub fn resolve(self, base_dir: &Path) -> Result<Experiment> {
        let mut input_hashes = Vec::new();
        let mut load = |field: &str, path: &Path| -> Result<String> {
            let full = if path.is_absolute() { path.to_path_buf() } else { base_dir.join(path) };
            let text =
                fs::read_to_string(&full).with_context(|| format!("{field}: cannot read {}", full.display()))?;
            input_hashes.push((field.to_string(), hex::encode(Sha256::digest(text.as_bytes()))));
            Ok(text)
        };
        let hamiltonian = match &self.hamiltonian {
            HamiltonianSource::Ising2d { rows, cols, h, periodic } => {
                check_lattice(*rows, *cols)?;
                finite("hamiltonian.h", *h)?;
                build_ising2d(*rows, *cols, *h, *periodic).context("hamiltonian")?
            }
            HamiltonianSource::Ising2dAdiabatic { rows, cols, h_final, ramp_time, periodic } => {
                check_lattice(*rows, *cols)?;
                finite("hamiltonian.h_final", *h_final)?;
                positive("hamiltonian.ramp_time", *ramp_time)?;
                build_ising2d_adiabatic(*rows, *cols, *h_final, *ramp_time, *periodic).context("hamiltonian")?
            }
            HamiltonianSource::Pauli { terms } => {
                Hamiltonian::parse(&terms.join("\n")).context("hamiltonian.terms")?
            }
            HamiltonianSource::PauliFile { path } => {
                Hamiltonian::parse(&load("hamiltonian.path", path)?).context("hamiltonian.path")?
            }
            HamiltonianSource::FermionFile { path } => {
                let set = FermionTermSet::parse(&load("hamiltonian.path", path)?).context("hamiltonian.path")?;
                jordan_wigner(&set).context("hamiltonian.path")?
            }
        };
        let n = hamiltonian.n_qubits();
        let initial = match &self.initial {
            None => State::zero(n).context("initial")?,
            Some(bits) => {
                if bits.len() != n {
                    bail!("initial: bitstring has {} characters for {n} qubits", bits.len());
                }
                State::basis(n, bits).context("initial")?
            }
        };
        let times = self.time.points()?;
        let horizon = hamiltonian.horizon();
        if let Some(&t) = times.iter().find(|&&t| t > horizon) {
            bail!("time: point {t} lies beyond the schedule horizon {horizon}");
        }
        if let Some(n_samples) = self.n_samples {
            if n_samples == 0 {
                bail!("n_samples: must be positive");
            }
        }
        if let Some(trotter) = &self.trotter {
            positive("trotter.step", trotter.step)?;
        }
        if let Some(adiabatic) = &self.adiabatic {
            if adiabatic.ramp_times.is_empty() {
                bail!("adiabatic.ramp_times: must not be empty");
            }
            for (i, &t) in adiabatic.ramp_times.iter().enumerate() {
                positive(&format!("adiabatic.ramp_times[{i}]"), t)?;
            }
        }
        if let Some(analysis) = &self.analysis {
            positive("analysis.epsilon", analysis.epsilon)?;
            if !(analysis.trotter_coefficient >= 0.0 && analysis.trotter_coefficient.is_finite()) {
                bail!("analysis.trotter_coefficient: must be finite and >= 0");
            }
        }
        let experiment = Experiment { config: self, hamiltonian, initial, times, input_hashes };
        // Surface errors in the optional sections up front.
        experiment.noise()?;
        if experiment.config.angles.is_some() {
            experiment.angles()?;
        }
        experiment.background()?;
        experiment.target()?;
        Ok(experiment)
    }
}

fn check_lattice(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        bail!("hamiltonian: rows and cols must be positive");
    }
    Ok(())
}

fn finite(field: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        bail!("{field}: must be finite, got {value}");
    }
    Ok(())
}

fn positive(field: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        bail!("{field}: must be positive and finite, got {value}");
    }
    Ok(())
}

impl TimeGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let points = match (&self.points, self.start, self.stop, self.steps) {
            (Some(points), None, None, None) => points.clone(),
            (None, start, Some(stop), Some(steps)) => {
                let start = start.unwrap_or(0.0);
                if steps == 0 {
                    bail!("time.steps: must be positive");
                }
                if stop.is_nan() || start.is_nan() || stop < start {
                    bail!("time.stop: must not be smaller than time.start");
                }
                (0..=steps).map(|k| start + (stop - start) * k as f64 / steps as f64).collect()
            }
            _ => bail!("time: give either `points` or `stop` and `steps` (with optional `start`)"),
        };
        if points.is_empty() {
            bail!("time.points: must not be empty");
        }
        for (i, &t) in points.iter().enumerate() {
            if !(t >= 0.0 && t.is_finite()) {
                bail!("time.points[{i}]: must be finite and >= 0, got {t}");
            }
        }
        Ok(points)
    }
}

impl Experiment {
    pub fn n_samples(&self) -> Result<usize> {
        self.config.n_samples.ok_or_else(|| anyhow!("n_samples: required for this command"))
    }

    pub fn noise(&self) -> Result<Option<NoiseModel>> {
        let Some(spec) = &self.config.noise else { return Ok(None) };
        let n_terms = self.hamiltonian.n_terms();
        let rates = match (spec.rate, &spec.rates) {
            (Some(r), None) => vec![r; n_terms],
            (None, Some(rates)) => {
                if rates.len() != n_terms {
                    bail!("noise.rates: {} rates for {n_terms} terms", rates.len());
                }
                rates.clone()
            }
            _ => bail!("noise: give exactly one of `rate` or `rates`"),
        };
        NoiseModel::new(rates, spec.mode, spec.mitigate).map(Some).context("noise")
    }

    pub fn angles(&self) -> Result<AngleAssignment> {
        let n_terms = self.hamiltonian.n_terms();
        match &self.config.angles {
            None => bail!("angles: required for this command"),
            Some(AngleSpec::Uniform { tau }) => AngleAssignment::uniform(n_terms, *tau).context("angles.tau"),
            Some(AngleSpec::Explicit { values }) => {
                if values.len() != n_terms {
                    bail!("angles.values: {} angles for {n_terms} terms", values.len());
                }
                AngleAssignment::new(values.clone()).context("angles.values")
            }
            Some(AngleSpec::Optimal { method }) => {
                let noise = self.noise()?.ok_or_else(|| anyhow!("angles: kind = \"optimal\" requires a [noise] section"))?;
                optimal_angles(&noise.rates, *method).context("angles")
            }
        }
    }

    pub fn background(&self) -> Result<Option<Background>> {
        let Some(selector) = self.config.background.as_deref() else { return Ok(None) };
        if selector == "none" {
            return Ok(None);
        }
        let letters = selector
            .strip_prefix("all-")
            .ok_or_else(|| anyhow!("background: expected `none` or `all-<letters>`, got `{selector}`"))?;
        let pattern: Vec<PauliLetter> = letters
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'X' => Ok(PauliLetter::X),
                'Y' => Ok(PauliLetter::Y),
                'Z' => Ok(PauliLetter::Z),
                _ => Err(anyhow!("background: invalid letter `{c}` in `{selector}`")),
            })
            .collect::<Result<_>>()?;
        if pattern.is_empty() {
            bail!("background: empty letter pattern");
        }
        let background = Background::matching(&self.hamiltonian, |p| {
            let support: Vec<PauliLetter> = p.letters().into_iter().filter(|l| *l != PauliLetter::I).collect();
            support == pattern
        })
        .context("background")?;
        Ok(Some(background))
    }

    pub fn target(&self) -> Result<Target> {
        let n = self.hamiltonian.n_qubits();
        Ok(match self.config.observable_name() {
            "loschmidt" => Target::Loschmidt,
            "energy" => Target::Energy,
            "mean_z" => Target::Fixed(Observable::Sum(single_site_z(n).into_iter().map(|p| (1.0 / n as f64, p)).collect())),
            text => {
                let p = PauliString::parse(text).context("observable")?;
                if p.n_qubits() != n {
                    bail!("observable: {} characters for {n} qubits", p.n_qubits());
                }
                Target::Fixed(Observable::Pauli(p))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
seed = 7
n_samples = 10
[hamiltonian]
kind = "ising2d"
rows = 1
cols = 3
h = 1.0
[time]
stop = 1.0
steps = 4
[angles]
kind = "uniform"
tau = 0.3
"#;

    #[test]
    fn parses_and_resolves() {
        let cfg = ExperimentConfig::from_toml(BASE).unwrap();
        let exp = cfg.resolve(Path::new(".")).unwrap();
        assert_eq!(exp.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(exp.hamiltonian.n_qubits(), 3);
        assert_eq!(exp.angles().unwrap().len(), exp.hamiltonian.n_terms());
    }

    #[test]
    fn canonical_round_trip() {
        let cfg = ExperimentConfig::from_toml(BASE).unwrap();
        let again = ExperimentConfig::from_toml(&cfg.canonical().unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.sha256().unwrap(), again.sha256().unwrap());
    }

    #[test]
    fn errors_name_the_field() {
        let err = ExperimentConfig::from_toml(&BASE.replace("steps = 4", "steps = \"x\"")).unwrap_err();
        assert!(err.to_string().contains("time.steps"), "{err}");
        let err = ExperimentConfig::from_toml(&BASE.replace("seed = 7", "seed = 7\nbogus = 1")).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let cfg = ExperimentConfig::from_toml(&BASE.replace("n_samples = 10", "n_samples = 0")).unwrap();
        let err = cfg.resolve(Path::new(".")).err().unwrap();
        assert!(err.to_string().starts_with("n_samples"), "{err}");
        let cfg = ExperimentConfig::from_toml(&BASE.replace("tau = 0.3", "tau = 2.0")).unwrap();
        assert!(cfg.resolve(Path::new(".")).is_err());
        let cfg = ExperimentConfig::from_toml(&format!("observable = \"ZZ\"\n{BASE}")).unwrap();
        let err = cfg.resolve(Path::new(".")).err().unwrap();
        assert!(err.to_string().starts_with("observable"), "{err}");
    }

    #[test]
    fn background_selector() {
        let cfg = ExperimentConfig::from_toml(&format!("background = \"all-ZZ\"\n{BASE}")).unwrap();
        let exp = cfg.resolve(Path::new(".")).unwrap();
        let bg = exp.background().unwrap().unwrap();
        assert_eq!(bg.indices().len(), 3);
        for &i in bg.indices() {
            assert!(exp.hamiltonian.term(i).pauli.is_diagonal());
        }
        let cfg = ExperimentConfig::from_toml(&format!("background = \"some\"\n{BASE}")).unwrap();
        assert!(cfg.resolve(Path::new(".")).is_err());
    }
}
