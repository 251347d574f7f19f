//! Poisson "tetris" sampling: random circuits of fixed-angle gates whose
//! average reproduces continuous-time evolution up to a known attenuation.
//!
//! For every term `n` the gate `e^{iτ_n sgn(c_n(s)) O_n}` falls at the times
//! of a Poisson process with rate `|c_n(s)| / sin τ_n`. Inhomogeneous rates
//! are handled by drawing uniform points on `[0, z_n(t)]` and mapping them
//! back through `z_n^{-1}`.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::noise::{NoiseMode, NoiseModel};
use crate::pauli::PauliString;
use crate::schedule::{IntegratedSchedule, Schedule};
use crate::state::State;

/// Per-term gate angles `τ_n ∈ (0, π/2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleAssignment(Vec<f64>);

impl AngleAssignment {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        for (index, &angle) in angles.iter().enumerate() {
            if !(angle > 0.0 && angle <= FRAC_PI_2) {
                return Err(Error::InvalidAngle { index, angle });
            }
        }
        Ok(AngleAssignment(angles))
    }

    pub fn uniform(n_terms: usize, angle: f64) -> Result<Self> {
        Self::new(vec![angle; n_terms])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, n: usize) -> f64 {
        self.0[n]
    }

    fn check_terms(&self, n_terms: usize) -> Result<()> {
        if self.0.len() != n_terms {
            return Err(Error::InvalidArgument(format!(
                "{} angles supplied for {n_terms} terms",
                self.0.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TetrisEvent {
    pub time: f64,
    /// Zero-based term index.
    pub term: usize,
    /// `sgn(c_n(time))`, +1 at zeros.
    pub sign: i8,
}

/// One sampled circuit: events sorted by time, ties broken by term index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tetris {
    pub horizon: f64,
    pub events: Vec<TetrisEvent>,
}

impl Tetris {
    pub fn empty(horizon: f64) -> Self {
        Tetris { horizon, events: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    fn sort(&mut self) {
        self.events
            .sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap().then(a.term.cmp(&b.term)));
    }

    /// Plain-text dump: `#`-prefixed header with horizon, seed and angles, then
    /// one `time term sign` line per event.
    pub fn to_dump(&self, seed: u64, angles: &AngleAssignment) -> String {
        let mut out = String::new();
        writeln!(out, "# t {:e}", self.horizon).unwrap();
        writeln!(out, "# seed {seed}").unwrap();
        let list: Vec<String> = angles.as_slice().iter().map(|a| format!("{a:e}")).collect();
        writeln!(out, "# angles {}", list.join(" ")).unwrap();
        writeln!(out, "# events {}", self.events.len()).unwrap();
        for e in &self.events {
            writeln!(out, "{:.17e} {} {}", e.time, e.term, e.sign).unwrap();
        }
        out
    }

    /// Parses a dump produced by [`Tetris::to_dump`].
    pub fn from_dump(text: &str) -> Result<Tetris> {
        let mut horizon = None;
        let mut events = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: &str| Error::Parse { line: line_no, message: message.to_string() };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                let mut fields = header.split_whitespace();
                if fields.next() == Some("t") {
                    let v = fields.next().ok_or_else(|| err("missing horizon"))?;
                    horizon = Some(v.parse::<f64>().map_err(|_| err("invalid horizon"))?);
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err("expected `time term sign`"));
            }
            let time = fields[0].parse::<f64>().map_err(|_| err("invalid time"))?;
            let term = fields[1].parse::<usize>().map_err(|_| err("invalid term index"))?;
            let sign = match fields[2] {
                "1" => 1,
                "-1" => -1,
                _ => return Err(err("sign must be 1 or -1")),
            };
            events.push(TetrisEvent { time, term, sign });
        }
        let horizon = horizon.ok_or(Error::Parse { line: 0, message: "missing `# t` header".into() })?;
        Ok(Tetris { horizon, events })
    }
}

/// A set of mutually commuting, constant-coefficient terms evolved exactly
/// between sampled gates instead of being sampled themselves.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Background {
    indices: Vec<usize>,
}

impl Background {
    pub fn new(h: &Hamiltonian, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        for &k in &indices {
            if k >= h.n_terms() {
                return Err(Error::IndexOutOfRange { index: k, limit: h.n_terms() });
            }
            if !h.term(k).schedule.is_constant() {
                return Err(Error::TimeDependentBackground { index: k });
            }
        }
        for (i, &a) in indices.iter().enumerate() {
            for &b in &indices[i + 1..] {
                if !h.term(a).pauli.commutes(&h.term(b).pauli)? {
                    return Err(Error::NonCommutingBackground { a, b });
                }
            }
        }
        Ok(Background { indices })
    }

    /// All terms whose Pauli string satisfies `select`.
    pub fn matching<F: Fn(&PauliString) -> bool>(h: &Hamiltonian, select: F) -> Result<Self> {
        let indices = (0..h.n_terms()).filter(|&k| select(&h.term(k).pauli)).collect();
        Self::new(h, indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, n: usize) -> bool {
        self.indices.binary_search(&n).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn evolve(&self, h: &Hamiltonian, state: &mut State, dt: f64) {
        if dt <= 0.0 {
            return;
        }
        for &k in &self.indices {
            if let Schedule::Constant { value } = h.term(k).schedule {
                state.rotate_unchecked(&h.term(k).pauli, dt * value);
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Process {
    Homogeneous { sign: i8 },
    Inhomogeneous(IntegratedSchedule),
}

#[derive(Clone, Debug)]
struct TermProcess {
    term: usize,
    mean_count: f64,
    poisson: Option<Poisson<f64>>,
    process: Process,
}

/// Precomputed per-term Poisson processes on `[0, t]`; draws any number of
/// tetrises from caller-supplied random streams.
#[derive(Clone, Debug)]
pub struct TetrisSampler {
    horizon: f64,
    processes: Vec<TermProcess>,
}

impl TetrisSampler {
    pub fn new(h: &Hamiltonian, t: f64, angles: &AngleAssignment, background: Option<&Background>) -> Result<Self> {
        angles.check_terms(h.n_terms())?;
        if !(t >= 0.0) || t > h.horizon() {
            return Err(Error::OutsideHorizon { time: t, horizon: h.horizon() });
        }
        let mut processes = Vec::new();
        for (n, term) in h.terms().iter().enumerate() {
            if background.is_some_and(|b| b.contains(n)) {
                continue;
            }
            let (z, process) = match &term.schedule {
                Schedule::Constant { value } => {
                    (value.abs() * t, Process::Homogeneous { sign: if *value < 0.0 { -1 } else { 1 } })
                }
                other => {
                    let integrated = IntegratedSchedule::new(other.clone(), t)?;
                    (integrated.total(), Process::Inhomogeneous(integrated))
                }
            };
            let mean_count = z / angles.get(n).sin();
            let poisson = if mean_count > 0.0 {
                Some(Poisson::new(mean_count).map_err(|e| Error::InvalidArgument(e.to_string()))?)
            } else {
                None
            };
            processes.push(TermProcess { term: n, mean_count, poisson, process });
        }
        Ok(TetrisSampler { horizon: t, processes })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Expected number of events in one tetris.
    pub fn expected_events(&self) -> f64 {
        self.processes.iter().map(|p| p.mean_count).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Tetris {
        let mut tetris = Tetris::empty(self.horizon);
        for p in &self.processes {
            let Some(poisson) = &p.poisson else { continue };
            let count = poisson.sample(rng) as usize;
            for _ in 0..count {
                let event = match &p.process {
                    Process::Homogeneous { sign } => {
                        TetrisEvent { time: self.horizon * rng.gen::<f64>(), term: p.term, sign: *sign }
                    }
                    Process::Inhomogeneous(integrated) => {
                        let u = integrated.total() * rng.gen::<f64>();
                        let time = integrated.inverse(u).expect("u drawn inside [0, z(t)]");
                        let sign = integrated.schedule().sign(time) as i8;
                        TetrisEvent { time, term: p.term, sign }
                    }
                };
                tetris.events.push(event);
            }
        }
        tetris.sort();
        tetris
    }
}

/// Draws a tetris for a time-independent Hamiltonian.
pub fn draw_tetris<R: Rng + ?Sized>(h: &Hamiltonian, t: f64, angles: &AngleAssignment, rng: &mut R) -> Result<Tetris> {
    h.constant_coefficients()?;
    Ok(TetrisSampler::new(h, t, angles, None)?.sample(rng))
}

/// Draws a tetris for a Hamiltonian with time-dependent coefficients.
pub fn draw_tetris_td<R: Rng + ?Sized>(h: &Hamiltonian, t: f64, angles: &AngleAssignment, rng: &mut R) -> Result<Tetris> {
    Ok(TetrisSampler::new(h, t, angles, None)?.sample(rng))
}

/// Draws events only for terms outside `background`.
pub fn draw_tetris_background<R: Rng + ?Sized>(
    h: &Hamiltonian,
    background: &Background,
    t: f64,
    angles: &AngleAssignment,
    rng: &mut R,
) -> Result<Tetris> {
    Ok(TetrisSampler::new(h, t, angles, Some(background))?.sample(rng))
}

fn check_application(s: &State, tetris: &Tetris, h: &Hamiltonian, angles: &AngleAssignment) -> Result<()> {
    if s.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch { expected: h.n_qubits(), got: s.n_qubits() });
    }
    angles.check_terms(h.n_terms())?;
    if let Some(e) = tetris.events.iter().find(|e| e.term >= h.n_terms()) {
        return Err(Error::IndexOutOfRange { index: e.term, limit: h.n_terms() });
    }
    Ok(())
}

/// Applies the tetris gates in time order. With a background set, every gap
/// between consecutive events (and before the first / after the last) is
/// filled with exact evolution under the background terms.
pub fn apply_tetris(
    s: &State,
    tetris: &Tetris,
    h: &Hamiltonian,
    angles: &AngleAssignment,
    background: Option<&Background>,
) -> Result<State> {
    check_application(s, tetris, h, angles)?;
    let mut out = s.clone();
    apply_events::<rand::rngs::mock::StepRng>(&mut out, tetris, h, angles, background, None);
    Ok(out)
}

/// In-place application, optionally with noise. Returns the amplitude factor
/// accumulated from the noise channel (1 when noiseless).
pub(crate) fn apply_events<R: Rng + ?Sized>(
    state: &mut State,
    tetris: &Tetris,
    h: &Hamiltonian,
    angles: &AngleAssignment,
    background: Option<&Background>,
    mut noise: Option<(&NoiseModel, &mut R)>,
) -> f64 {
    let mut factor = 1.0;
    let mut cursor = 0.0;
    for e in &tetris.events {
        if let Some(bg) = background {
            bg.evolve(h, state, e.time - cursor);
            cursor = e.time;
        }
        let pauli = &h.term(e.term).pauli;
        state.rotate_unchecked(pauli, e.sign as f64 * angles.get(e.term));
        if let Some((model, rng)) = noise.as_mut() {
            match model.mode {
                NoiseMode::DeterministicAttenuation => factor *= (-model.rates[e.term]).exp(),
                NoiseMode::StochasticDepolarizing => {
                    if rng.gen::<f64>() < model.error_probability(e.term) {
                        let support = pauli.support_mask();
                        let x = rng.gen::<u64>() & support;
                        let z = rng.gen::<u64>() & support;
                        let error = PauliString::from_masks(pauli.n_qubits(), x, z).unwrap();
                        state.apply_pauli_unchecked(&error);
                        if rng.gen::<bool>() {
                            factor = -factor;
                        }
                    }
                }
            }
        }
    }
    if let Some(bg) = background {
        bg.evolve(h, state, tetris.horizon - cursor);
    }
    factor
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttenuationReport {
    /// `exp(-2 Σ_n z_n(t) tan(τ_n/2))` over sampled terms.
    pub lambda_att: f64,
    /// `exp(-2 Σ_n r_n z_n(t) / sin τ_n)`, 1 without noise.
    pub q_att: f64,
    /// Mean number of gates in a single tetris, `Σ_n z_n(t) / sin τ_n`.
    pub expected_gates: f64,
    /// `z_n(t)` for every term.
    pub z_values: Vec<f64>,
}

impl AttenuationReport {
    /// Expected gate count for the bra/ket pair used by the expectation estimator.
    pub fn expected_gates_per_pair(&self) -> f64 {
        2.0 * self.expected_gates
    }
}

pub fn attenuation_report(
    h: &Hamiltonian,
    t: f64,
    angles: &AngleAssignment,
    noise: Option<&NoiseModel>,
    background: Option<&Background>,
) -> Result<AttenuationReport> {
    angles.check_terms(h.n_terms())?;
    if let Some(model) = noise {
        model.check_terms(h.n_terms())?;
    }
    let z_values = h.terms().iter().map(|term| term.schedule.z(t)).collect::<Result<Vec<_>>>()?;
    let mut log_lambda = 0.0;
    let mut log_q = 0.0;
    let mut expected_gates = 0.0;
    for (n, &z) in z_values.iter().enumerate() {
        if background.is_some_and(|b| b.contains(n)) {
            continue;
        }
        let tau = angles.get(n);
        log_lambda -= 2.0 * z * (0.5 * tau).tan();
        expected_gates += z / tau.sin();
        if let Some(model) = noise {
            log_q -= 2.0 * model.rates[n] * z / tau.sin();
        }
    }
    Ok(AttenuationReport { lambda_att: log_lambda.exp(), q_att: log_q.exp(), expected_gates, z_values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::exact_evolve;
    use crate::models::build_ising2d;
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn angle_validation() {
        assert!(AngleAssignment::new(vec![0.1, FRAC_PI_2]).is_ok());
        assert!(matches!(AngleAssignment::new(vec![0.0]), Err(Error::InvalidAngle { index: 0, .. })));
        assert!(AngleAssignment::new(vec![0.3, 1.6]).is_err());
    }

    #[test]
    fn zero_time_gives_empty_tetris() {
        let h = build_ising2d(1, 3, 1.0, true).unwrap();
        let a = AngleAssignment::uniform(h.n_terms(), 0.2).unwrap();
        assert!(draw_tetris(&h, 0.0, &a, &mut rng(1)).unwrap().is_empty());
        assert!(draw_tetris_td(&h, 0.0, &a, &mut rng(1)).unwrap().is_empty());
    }

    #[test]
    fn events_sorted_with_valid_signs() {
        let h = Hamiltonian::from_constant_terms(&[(2.0, "XI"), (-1.0, "ZZ")]).unwrap();
        let a = AngleAssignment::uniform(2, 0.1).unwrap();
        let tetris = draw_tetris(&h, 0.5, &a, &mut rng(5)).unwrap();
        assert!(tetris.events.windows(2).all(|w| w[0].time <= w[1].time));
        for e in &tetris.events {
            assert!(e.time >= 0.0 && e.time <= 0.5);
            assert_eq!(e.sign, if e.term == 0 { 1 } else { -1 });
        }
    }

    #[test]
    fn tie_break_by_term_index() {
        let mut t = Tetris {
            horizon: 1.0,
            events: vec![
                TetrisEvent { time: 0.5, term: 3, sign: 1 },
                TetrisEvent { time: 0.5, term: 1, sign: 1 },
                TetrisEvent { time: 0.2, term: 2, sign: 1 },
            ],
        };
        t.sort();
        assert_eq!(t.events.iter().map(|e| e.term).collect::<Vec<_>>(), vec![2, 1, 3]);
    }

    #[test]
    fn background_validation() {
        let h = Hamiltonian::from_constant_terms(&[(1.0, "ZZ"), (1.0, "XI"), (0.5, "IZ")]).unwrap();
        assert!(Background::new(&h, vec![0, 2]).is_ok());
        assert!(matches!(Background::new(&h, vec![0, 1]), Err(Error::NonCommutingBackground { .. })));
        assert!(Background::new(&h, vec![7]).is_err());
        let diag = Background::matching(&h, |p| p.is_diagonal()).unwrap();
        assert_eq!(diag.indices(), &[0, 2]);
    }

    #[test]
    fn full_background_is_exact_diagonal_evolution() {
        let h = Hamiltonian::from_constant_terms(&[(0.7, "ZZI"), (-0.4, "IZZ"), (1.1, "ZII")]).unwrap();
        let bg = Background::new(&h, vec![0, 1, 2]).unwrap();
        let a = AngleAssignment::uniform(3, 0.3).unwrap();
        let tetris = draw_tetris_background(&h, &bg, 0.9, &a, &mut rng(2)).unwrap();
        assert!(tetris.is_empty());
        let mut s = State::zero(3).unwrap();
        for q in 0..3 {
            s.apply_h(q).unwrap();
        }
        let out = apply_tetris(&s, &tetris, &h, &a, Some(&bg)).unwrap();
        let exact = exact_evolve(&h, 0.9, &s).unwrap();
        assert!((out.inner_product(&exact).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!((out.inner_product(&exact).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let report = attenuation_report(&h, 0.9, &a, None, Some(&bg)).unwrap();
        assert_eq!(report.lambda_att, 1.0);
        assert_eq!(report.expected_gates, 0.0);
    }

    #[test]
    fn empty_background_matches_plain_sampler() {
        let h = build_ising2d(1, 3, 0.5, true).unwrap();
        let a = AngleAssignment::uniform(h.n_terms(), 0.4).unwrap();
        let bg = Background::new(&h, vec![]).unwrap();
        let plain = draw_tetris(&h, 0.7, &a, &mut rng(11)).unwrap();
        let with_bg = draw_tetris_background(&h, &bg, 0.7, &a, &mut rng(11)).unwrap();
        assert_eq!(plain, with_bg);
    }

    #[test]
    fn ising_background_rate_bookkeeping() {
        let h = build_ising2d(3, 4, 3.0, true).unwrap();
        let a = AngleAssignment::uniform(h.n_terms(), 0.3).unwrap();
        let bg = Background::matching(&h, |p| p.is_diagonal()).unwrap();
        assert_eq!(bg.indices().len(), 24);
        let sampler = TetrisSampler::new(&h, 1.0, &a, Some(&bg)).unwrap();
        assert!((sampler.expected_events() - 12.0 * 3.0 / 0.3f64.sin()).abs() < 1e-12);
        let tetris = sampler.sample(&mut rng(4));
        assert!(tetris.events.iter().all(|e| !h.term(e.term).pauli.is_diagonal()));
    }

    #[test]
    fn apply_examples() {
        let h = Hamiltonian::from_constant_terms(&[(1.0, "X")]).unwrap();
        let a = AngleAssignment::uniform(1, FRAC_PI_2).unwrap();
        let s = State::zero(1).unwrap();
        assert_eq!(apply_tetris(&s, &Tetris::empty(1.0), &h, &a, None).unwrap(), s);
        let one = Tetris { horizon: 1.0, events: vec![TetrisEvent { time: 0.3, term: 0, sign: 1 }] };
        let out = apply_tetris(&s, &one, &h, &a, None).unwrap();
        assert!((out.amplitudes()[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn three_events_match_dense_product() {
        let h = Hamiltonian::from_constant_terms(&[(0.5, "XY"), (-1.0, "ZI"), (2.0, "YZ")]).unwrap();
        let a = AngleAssignment::new(vec![0.3, 0.7, 1.1]).unwrap();
        let tetris = Tetris {
            horizon: 1.0,
            events: vec![
                TetrisEvent { time: 0.1, term: 2, sign: 1 },
                TetrisEvent { time: 0.4, term: 1, sign: -1 },
                TetrisEvent { time: 0.8, term: 0, sign: 1 },
            ],
        };
        let mut s = State::zero(2).unwrap();
        s.apply_h(0).unwrap();
        let out = apply_tetris(&s, &tetris, &h, &a, None).unwrap();
        let gate = |k: usize, theta: f64| {
            let p = h.term(k).pauli.to_dense();
            DMatrix::<Complex64>::identity(4, 4) * Complex64::new(theta.cos(), 0.0) + p * Complex64::new(0.0, theta.sin())
        };
        let total = gate(0, 0.3) * gate(1, -0.7) * gate(2, 1.1);
        let expected = total * DVector::from_column_slice(s.amplitudes());
        for (x, y) in out.amplitudes().iter().zip(expected.iter()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn attenuation_examples() {
        let h = Hamiltonian::from_constant_terms(&[(1.0, "X")]).unwrap();
        let a = AngleAssignment::uniform(1, FRAC_PI_2).unwrap();
        let r = attenuation_report(&h, 1.0, &a, None, None).unwrap();
        assert!((r.lambda_att - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(r.q_att, 1.0);
        let tiny = AngleAssignment::uniform(1, 1e-9).unwrap();
        assert!((attenuation_report(&h, 1.0, &tiny, None, None).unwrap().lambda_att - 1.0).abs() < 1e-8);

        let ising = build_ising2d(3, 4, 3.0, true).unwrap();
        let a = AngleAssignment::uniform(36, 0.04).unwrap();
        let r = attenuation_report(&ising, 1.0, &a, None, None).unwrap();
        assert!((r.lambda_att - (-120.0 * 0.02f64.tan()).exp()).abs() < 1e-14);
        assert!((r.lambda_att - 0.0906).abs() < 1e-4);
        assert!((r.expected_gates_per_pair() - 120.0 / 0.04f64.sin()).abs() < 1e-9);
        assert!((r.expected_gates_per_pair() - 3000.8).abs() < 0.1);
    }

    #[test]
    fn attenuation_with_noise() {
        let h = Hamiltonian::from_constant_terms(&[(2.0, "X"), (-1.0, "Z")]).unwrap();
        let a = AngleAssignment::new(vec![0.2, 0.5]).unwrap();
        let noise = NoiseModel::new(vec![1e-3, 2e-3], NoiseMode::DeterministicAttenuation, false).unwrap();
        let r = attenuation_report(&h, 0.8, &a, Some(&noise), None).unwrap();
        let expected = (-2.0 * (1e-3 * 1.6 / 0.2f64.sin() + 2e-3 * 0.8 / 0.5f64.sin())).exp();
        assert!((r.q_att - expected).abs() < 1e-15);
    }

    #[test]
    fn dump_round_trip() {
        let h = build_ising2d(1, 3, 1.0, true).unwrap();
        let a = AngleAssignment::uniform(h.n_terms(), 0.5).unwrap();
        let tetris = draw_tetris(&h, 1.0, &a, &mut rng(8)).unwrap();
        let text = tetris.to_dump(8, &a);
        assert!(text.starts_with("# t 1e0\n# seed 8\n# angles"));
        assert_eq!(Tetris::from_dump(&text).unwrap(), tetris);
        assert!(Tetris::from_dump("# t 1\n0.1 0 2\n").is_err());
    }
}
