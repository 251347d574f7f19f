//! Time-dependent coefficients `c(t)` and their integrated weight
//! `z(t) = ∫₀ᵗ |c(s)| ds`, used to map homogeneous Poisson times onto the
//! physical time axis.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const QUADRATURE_TOL: f64 = 1e-13;
pub const INVERSE_REL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Linear,
    /// Piecewise constant, holding the value of the left knot.
    Step,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant { value: f64 },
    /// `intercept + slope * t`.
    Linear { intercept: f64, slope: f64 },
    /// `amplitude * sin(pi/2 * sin(pi t / (2 ramp_time))^2)^2`, rising from 0 to
    /// `amplitude` at `t = ramp_time`.
    Adiabatic { amplitude: f64, ramp_time: f64 },
    /// Knot values on `times` (strictly increasing, starting at 0).
    Tabulated { times: Vec<f64>, values: Vec<f64>, interpolation: Interpolation },
}

impl Schedule {
    pub fn constant(value: f64) -> Self {
        Schedule::Constant { value }
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::InvalidArgument(
                "tabulated schedule needs at least two knots with matching values".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidArgument("tabulated schedule must start at t = 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("knot times must be strictly increasing".into()));
        }
        if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite knot".into()));
        }
        Ok(Schedule::Tabulated { times, values, interpolation })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Schedule::Constant { .. })
    }

    /// Last time at which the schedule is defined.
    pub fn horizon(&self) -> f64 {
        match self {
            Schedule::Tabulated { times, .. } => *times.last().unwrap(),
            _ => f64::INFINITY,
        }
    }

    /// Multiplies every value by `factor`.
    pub fn scaled(&self, factor: f64) -> Schedule {
        match self {
            Schedule::Constant { value } => Schedule::Constant { value: value * factor },
            Schedule::Linear { intercept, slope } => Schedule::Linear {
                intercept: intercept * factor,
                slope: slope * factor,
            },
            Schedule::Adiabatic { amplitude, ramp_time } => Schedule::Adiabatic {
                amplitude: amplitude * factor,
                ramp_time: *ramp_time,
            },
            Schedule::Tabulated { times, values, interpolation } => Schedule::Tabulated {
                times: times.clone(),
                values: values.iter().map(|v| v * factor).collect(),
                interpolation: *interpolation,
            },
        }
    }

    /// Value at `t`; `t` is assumed inside `[0, horizon]`.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Schedule::Constant { value } => *value,
            Schedule::Linear { intercept, slope } => intercept + slope * t,
            Schedule::Adiabatic { amplitude, ramp_time } => {
                let inner = (std::f64::consts::PI * t / (2.0 * ramp_time)).sin();
                let outer = (FRAC_PI_2 * inner * inner).sin();
                amplitude * outer * outer
            }
            Schedule::Tabulated { times, values, interpolation } => {
                let k = match times.partition_point(|&s| s <= t) {
                    0 => 0,
                    k if k >= times.len() => times.len() - 2,
                    k => k - 1,
                };
                match interpolation {
                    Interpolation::Step => {
                        if t >= *times.last().unwrap() {
                            *values.last().unwrap()
                        } else {
                            values[k]
                        }
                    }
                    Interpolation::Linear => {
                        let w = (t - times[k]) / (times[k + 1] - times[k]);
                        values[k] + w * (values[k + 1] - values[k])
                    }
                }
            }
        }
    }

    /// `sgn(c(t))` with the convention `sgn(0) = +1`.
    pub fn sign(&self, t: f64) -> f64 {
        if self.value(t) < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let horizon = self.horizon();
        if !(t >= 0.0 && t <= horizon) {
            return Err(Error::OutsideHorizon { time: t, horizon });
        }
        Ok(())
    }

    /// Integrated absolute weight `z(t) = ∫₀ᵗ |c(s)| ds`.
    ///
    /// Exact for constant and piecewise-linear schedules, adaptive Simpson
    /// quadrature (absolute tolerance 1e-13) for the analytic ones.
    pub fn z(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match self {
            Schedule::Constant { value } => value.abs() * t,
            Schedule::Linear { intercept, slope } => abs_linear_integral(0.0, t, *intercept, intercept + slope * t),
            Schedule::Adiabatic { .. } => {
                adaptive_simpson(|s| self.value(s).abs(), 0.0, t, QUADRATURE_TOL)
            }
            Schedule::Tabulated { times, values, interpolation } => {
                let mut total = 0.0;
                for k in 0..times.len() - 1 {
                    let (a, b) = (times[k], times[k + 1]);
                    if a >= t {
                        break;
                    }
                    let end = b.min(t);
                    total += match interpolation {
                        Interpolation::Step => values[k].abs() * (end - a),
                        Interpolation::Linear => abs_linear_integral(a, end, values[k], self.value(end)),
                    };
                }
                total
            }
        })
    }

    /// Smallest `s` in `[0, t_max]` with `z(s) >= u`, so flat stretches of
    /// `z` resolve to their left endpoint.
    pub fn z_inverse(&self, u: f64, t_max: f64) -> Result<f64> {
        IntegratedSchedule::new(self.clone(), t_max)?.inverse(u)
    }
}

/// `∫_a^b |f|` for `f` linear between `fa = f(a)` and `fb = f(b)`.
fn abs_linear_integral(a: f64, b: f64, fa: f64, fb: f64) -> f64 {
    let width = b - a;
    if width <= 0.0 {
        return 0.0;
    }
    if fa * fb >= 0.0 {
        0.5 * width * (fa.abs() + fb.abs())
    } else {
        // Two triangles meeting at the root.
        let root = width * fa.abs() / (fa.abs() + fb.abs());
        0.5 * root * fa.abs() + 0.5 * (width - root) * fb.abs()
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // Start from a few panels so narrow features are not missed by the first estimate.
    let panels = 8;
    let h = (b - a) / panels as f64;
    if h > 0.0 && whole.is_finite() {
        return (0..panels)
            .map(|k| {
                let (lo, hi) = (a + k as f64 * h, if k + 1 == panels { b } else { a + (k + 1) as f64 * h });
                let (flo, fhi, fmid) = (f(lo), f(hi), f(0.5 * (lo + hi)));
                let w = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
                recurse(&f, lo, hi, flo, fmid, fhi, w, tol / panels as f64, 48)
            })
            .sum();
    }
    whole
}

// 10-point Gauss-Legendre nodes/weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// A schedule with its integrated weight precomputed on a refined cell grid
/// over `[0, t_max]`. Evaluating `z` inside a cell is a single fixed-order
/// Gauss–Legendre rule, which keeps `z` continuous and cheap to invert.
#[derive(Clone, Debug)]
pub struct IntegratedSchedule {
    schedule: Schedule,
    t_max: f64,
    edges: Vec<f64>,
    cumulative: Vec<f64>,
}

impl IntegratedSchedule {
    pub fn new(schedule: Schedule, t_max: f64) -> Result<Self> {
        schedule.check_time(t_max)?;
        let mut edges = vec![0.0];
        let mut cumulative = vec![0.0];
        if t_max > 0.0 && !schedule.is_constant() {
            let f = |s: f64| schedule.value(s).abs();
            let mut seeds: Vec<f64> = match &schedule {
                Schedule::Tabulated { times, .. } => {
                    times.iter().copied().filter(|&s| s > 0.0 && s < t_max).collect()
                }
                _ => Vec::new(),
            };
            let coarse = 32;
            seeds.extend((1..coarse).map(|k| t_max * k as f64 / coarse as f64));
            seeds.push(t_max);
            seeds.sort_by(|a, b| a.partial_cmp(b).unwrap());
            seeds.dedup();
            let mut a = 0.0;
            for b in seeds {
                // Split at sign changes of c so |c| is smooth on each piece.
                let mut pieces = vec![a];
                let (va, vb) = (schedule.value(a), schedule.value(b));
                if va * vb < 0.0 {
                    let (mut lo, mut hi) = (a, b);
                    for _ in 0..200 {
                        let m = 0.5 * (lo + hi);
                        if schedule.value(m) * va > 0.0 {
                            lo = m;
                        } else {
                            hi = m;
                        }
                        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
                            break;
                        }
                    }
                    pieces.push(0.5 * (lo + hi));
                }
                pieces.push(b);
                for w in pieces.windows(2) {
                    refine(&f, w[0], w[1], 0, &mut edges, &mut cumulative);
                }
                a = b;
            }
        }
        if edges.len() == 1 {
            edges.push(t_max);
            cumulative.push(match schedule {
                Schedule::Constant { value } => value.abs() * t_max,
                _ => 0.0,
            });
        }
        Ok(IntegratedSchedule { schedule, t_max, edges, cumulative })
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// `z(t_max)`.
    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn z(&self, s: f64) -> f64 {
        if let Schedule::Constant { value } = self.schedule {
            return value.abs() * s;
        }
        let k = self.cell(s);
        let f = |x: f64| self.schedule.value(x).abs();
        self.cumulative[k] + gauss_legendre(&f, self.edges[k], s)
    }

    fn cell(&self, s: f64) -> usize {
        let k = self.edges.partition_point(|&e| e <= s);
        k.saturating_sub(1).min(self.edges.len() - 2)
    }

    /// Smallest `s` with `z(s) >= u`, to `1e-12 * max(1, z(t_max))`.
    pub fn inverse(&self, u: f64) -> Result<f64> {
        let total = self.total();
        let slack = INVERSE_REL_TOL * total.max(1.0);
        if !(u >= 0.0 && u <= total + slack) {
            return Err(Error::WeightOutOfRange { value: u, max: total });
        }
        if let Schedule::Constant { value } = self.schedule {
            return Ok(if value == 0.0 { 0.0 } else { (u / value.abs()).min(self.t_max) });
        }
        if u <= 0.0 {
            return Ok(0.0);
        }
        // Cell k satisfies cumulative[k] < u <= cumulative[k + 1].
        let k = self.cumulative.partition_point(|&c| c < u).clamp(1, self.edges.len() - 1) - 1;
        let (mut lo, mut hi) = (self.edges[k], self.edges[k + 1]);
        let mut s = hi;
        for _ in 0..200 {
            let zs = self.z(s);
            if zs >= u {
                hi = s;
            } else {
                lo = s;
            }
            let rate = self.schedule.value(s).abs();
            if (zs - u).abs() <= slack && rate > 0.0 {
                return Ok(s);
            }
            if hi - lo <= f64::EPSILON * hi.max(1.0) {
                return Ok(hi);
            }
            let newton = s - (zs - u) / rate;
            s = if rate > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        Ok(hi)
    }
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32, edges: &mut Vec<f64>, cumulative: &mut Vec<f64>) {
    let whole = gauss_legendre(f, a, b);
    let m = 0.5 * (a + b);
    let split = gauss_legendre(f, a, m) + gauss_legendre(f, m, b);
    if depth < 30 && (whole - split).abs() > 1e-14 * (1.0 + split.abs()) && b - a > 1e-9 {
        refine(f, a, m, depth + 1, edges, cumulative);
        refine(f, m, b, depth + 1, edges, cumulative);
    } else {
        let last = *cumulative.last().unwrap();
        edges.push(b);
        cumulative.push(last + split);
    }
}
