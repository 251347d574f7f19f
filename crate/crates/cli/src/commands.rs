use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use tetris_core::analytics::{crossover_epsilon, log_shots_tetris, log_shots_trotter};
use tetris_core::estimator::{
    csv_row, derive_seed, estimate_loschmidt, estimate_observable, ratio_from_estimate, sample_rng,
    EstimatorResult, EstimatorSettings, Observable, CSV_HEADER,
};
use tetris_core::evolution::{evolve_oracle, exact_evolve_td, trotter_evolve};
use tetris_core::models::build_ising2d_adiabatic;
use tetris_core::tetris::{attenuation_report, TetrisSampler};
use tetris_core::{Hamiltonian, State};

use crate::config::{Experiment, HamiltonianSource, Target};

fn settings(exp: &Experiment, t: f64, point: usize) -> Result<EstimatorSettings> {
    Ok(EstimatorSettings {
        t,
        angles: exp.angles()?,
        n_samples: exp.n_samples()?,
        noise: exp.noise()?,
        background: exp.background()?,
        master_seed: derive_seed(exp.config.seed, point as u64),
    })
}

fn estimate(exp: &Experiment, h: &Hamiltonian, target: &Target, settings: &EstimatorSettings) -> Result<EstimatorResult> {
    let result = match target {
        Target::Loschmidt => estimate_loschmidt(h, &exp.initial, settings),
        Target::Energy => estimate_observable(h, &Observable::hamiltonian_at(h, settings.t), &exp.initial, settings),
        Target::Fixed(o) => estimate_observable(h, o, &exp.initial, settings),
    };
    result.with_context(|| format!("estimating at t = {}", settings.t))
}

/// Runs `f` over the time grid in parallel and joins rows in grid order.
fn grid_rows<F>(exp: &Experiment, f: F) -> Result<String>
where
    F: Fn(usize, f64) -> Result<String> + Sync,
{
    let rows = exp.times.par_iter().enumerate().map(|(k, &t)| f(k, t)).collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().map(|r| r + "\n").collect())
}

pub fn evolve(exp: &Experiment) -> Result<String> {
    let target = exp.target()?;
    exp.angles()?;
    exp.n_samples()?;
    let body = grid_rows(exp, |k, t| {
        let r = estimate(exp, &exp.hamiltonian, &target, &settings(exp, t, k)?)?;
        Ok(csv_row(t, &r))
    })?;
    Ok(format!("{CSV_HEADER}\n{body}"))
}

fn exact_row(t: f64, value: Complex64) -> String {
    format!("{t},{},{},0,0,0,1,1", value.re, value.im)
}

fn measure(exp: &Experiment, target: &Target, t: f64, state: &State) -> Result<Complex64> {
    Ok(match target {
        Target::Loschmidt => exp.initial.inner_product(state)?,
        // Hermitian observables: the imaginary part is roundoff.
        Target::Energy => Observable::hamiltonian_at(&exp.hamiltonian, t).matrix_element(state, state).re.into(),
        Target::Fixed(o) => o.matrix_element(state, state).re.into(),
    })
}

pub fn exact(exp: &Experiment) -> Result<String> {
    let target = exp.target()?;
    let body = grid_rows(exp, |_, t| {
        let state = evolve_oracle(&exp.hamiltonian, t, &exp.initial).with_context(|| format!("exact evolution to t = {t}"))?;
        Ok(exact_row(t, measure(exp, &target, t, &state)?))
    })?;
    Ok(format!("{CSV_HEADER}\n{body}"))
}

pub fn trotter(exp: &Experiment) -> Result<String> {
    let target = exp.target()?;
    let step = exp.config.trotter.as_ref().context("trotter: section required for this command")?.step;
    let body = grid_rows(exp, |_, t| {
        let state = trotter_evolve(&exp.hamiltonian, t, step, &exp.initial).with_context(|| format!("Trotter evolution to t = {t}"))?;
        Ok(exact_row(t, measure(exp, &target, t, &state)?))
    })?;
    Ok(format!("{CSV_HEADER}\n{body}"))
}

pub fn loschmidt(exp: &Experiment) -> Result<String> {
    exp.angles()?;
    exp.n_samples()?;
    let body = grid_rows(exp, |k, t| {
        let r = estimate(exp, &exp.hamiltonian, &Target::Loschmidt, &settings(exp, t, k)?)?;
        let ratio = match ratio_from_estimate(&r) {
            Ok((value, err)) => format!("{value},{err}"),
            Err(_) => ",".to_string(),
        };
        Ok(format!("{},{ratio}", csv_row(t, &r)))
    })?;
    Ok(format!("{CSV_HEADER},r,r_stderr\n{body}"))
}

/// Final energy per site after ramps of different lengths; each row carries
/// the tetris estimate and the exact value.
pub fn adiabatic(exp: &Experiment) -> Result<String> {
    let HamiltonianSource::Ising2dAdiabatic { rows, cols, h_final, periodic, .. } = exp.config.hamiltonian else {
        bail!("hamiltonian: the adiabatic command needs kind = \"ising2d_adiabatic\"");
    };
    let ramps = &exp.config.adiabatic.as_ref().context("adiabatic: section required for this command")?.ramp_times;
    exp.angles()?;
    exp.n_samples()?;
    let rows_out = ramps
        .par_iter()
        .enumerate()
        .map(|(k, &ramp)| {
            let h = build_ising2d_adiabatic(rows, cols, h_final, ramp, periodic)?;
            let n = h.n_qubits() as f64;
            let per_site = Observable::Sum(h.terms().iter().map(|term| (term.schedule.value(ramp) / n, term.pauli)).collect());
            let r = estimate(exp, &h, &Target::Fixed(per_site.clone()), &settings(exp, ramp, k)?)?;
            let exact = exact_evolve_td(&h, ramp, &exp.initial)?;
            let value = per_site.matrix_element(&exact, &exact);
            Ok(format!("{},{}\n", csv_row(ramp, &r), value.re))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(format!("{CSV_HEADER},exact_re\n{}", rows_out.concat()))
}

pub fn analyze(exp: &Experiment, provenance: &str) -> Result<String> {
    let t = *exp.times.last().unwrap();
    let angles = exp.angles()?;
    let noise = exp.noise()?;
    let background = exp.background()?;
    let analysis = exp.config.analysis.as_ref().context("analysis: section required for this command")?;
    let report = attenuation_report(&exp.hamiltonian, t, &angles, noise.as_ref(), background.as_ref())?;
    let rate = match &noise {
        None => 0.0,
        Some(m) => {
            let r = m.rates[0];
            if m.rates.iter().any(|&x| x != r) {
                bail!("noise: shot-count analysis needs a uniform rate");
            }
            r
        }
    };
    let n_terms = exp.hamiltonian.n_terms();
    let c = analysis.trotter_coefficient;
    let log_m_tetris = log_shots_tetris(&exp.hamiltonian, t, analysis.epsilon, rate)?;
    let log_m_trotter = log_shots_trotter(n_terms, t, analysis.epsilon, c, rate)?;
    let crossover = if t > 0.0 { Some(crossover_epsilon(&exp.hamiltonian, n_terms, t, c, rate)?) } else { None };
    let doc = json!({
        "provenance": provenance.lines().map(|l| l.trim_start_matches('#').trim_start()).collect::<Vec<_>>(),
        "t": t,
        "angles": angles.as_slice(),
        "lambda_att": report.lambda_att,
        "q_att": report.q_att,
        "expected_gates": report.expected_gates,
        "expected_gates_per_pair": report.expected_gates_per_pair(),
        "rate": rate,
        "epsilon": analysis.epsilon,
        "trotter_coefficient": c,
        "m_tetris": log_m_tetris.exp(),
        "m_trotter": log_m_trotter.exp(),
        "log_m_tetris": log_m_tetris,
        "log_m_trotter": log_m_trotter,
        "crossover_epsilon": crossover,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

/// Dump of one tetris drawn for the last grid time.
pub fn sample(exp: &Experiment) -> Result<String> {
    let t = *exp.times.last().unwrap();
    let angles = exp.angles()?;
    let background = exp.background()?;
    let sampler = TetrisSampler::new(&exp.hamiltonian, t, &angles, background.as_ref())?;
    let tetris = sampler.sample(&mut sample_rng(exp.config.seed, 0));
    Ok(tetris.to_dump(exp.config.seed, &angles))
}
