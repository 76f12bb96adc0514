//! Time evolution under `H(t) = H̃(s(t))`, ground-space overlap, and
//! measurement sampling.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{OperatorPair, StateVector};
use crate::instance::Assignment;
use crate::operator::InterpolatedOperator;
use crate::spectrum::format_sig15;

/// Largest allowed `dt·‖H‖`.
pub const STABILITY_LIMIT: f64 = 0.1;
/// Default bound on `|‖ψ(T)‖ - 1|`.
pub const NORM_DRIFT_BOUND: f64 = 1e-6;

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Interpolation profile `s(τ)` for `τ = t/T ∈ [0, 1]`.
#[derive(Clone)]
pub enum Profile {
    Linear,
    Custom(ProfileFn),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Linear => write!(f, "Linear"),
            Profile::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Schedule {
    total_time: f64,
    profile: Profile,
}

impl Schedule {
    pub fn linear(total_time: f64) -> Result<Self> {
        Self::with_profile(total_time, Profile::Linear)
    }

    /// Custom profiles are checked on a grid for `s(0) = 0`, `s(1) = 1` and
    /// monotonicity.
    pub fn with_profile(total_time: f64, profile: Profile) -> Result<Self> {
        if !(total_time >= 0.0 && total_time.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "total time must be finite and nonnegative, got {total_time}"
            )));
        }
        if let Profile::Custom(f) = &profile {
            if f(0.0).abs() > 1e-12 || (f(1.0) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument("profile must run from 0 to 1".into()));
            }
            let mut last = 0.0;
            for i in 1..=1000 {
                let v = f(i as f64 / 1000.0);
                if v < last - 1e-12 || !(0.0..=1.0 + 1e-12).contains(&v) {
                    return Err(Error::InvalidArgument(
                        "profile must be nondecreasing within [0, 1]".into(),
                    ));
                }
                last = v;
            }
        }
        Ok(Schedule {
            total_time,
            profile,
        })
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    /// `s` at physical time `t`.
    pub fn s_at(&self, t: f64) -> f64 {
        if self.total_time == 0.0 {
            return 1.0;
        }
        let tau = (t / self.total_time).clamp(0.0, 1.0);
        match &self.profile {
            Profile::Linear => tau,
            Profile::Custom(f) => f(tau).clamp(0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub final_state: StateVector,
    /// `(Σ_{z ∈ ground} |ψ_z|²)^{1/2}`.
    pub overlap: f64,
    pub norm_drift: f64,
    pub total_time: f64,
    pub steps: usize,
    pub dt: f64,
    pub ground_indices: Vec<usize>,
    /// Set when the target space is the minimum-energy space of an
    /// unsatisfiable instance rather than its satisfying assignments.
    pub unsatisfiable: bool,
}

/// `0.01 / ‖H‖_bound`.
pub fn default_dt(op: &dyn InterpolatedOperator) -> f64 {
    let (b, p) = op.norm_bounds();
    0.01 / (b + p).max(1e-300)
}

pub fn ground_overlap(psi: &[Complex64], ground: &[usize]) -> f64 {
    ground
        .iter()
        .map(|&z| psi[z].norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn norm(psi: &[Complex64]) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrates `i dψ/dt = H(t) ψ` from `initial` with fixed-step RK4 and
/// reports the overlap with the basis states in `ground`. The step is
/// shrunk so that a whole number of steps lands exactly on `T`.
pub fn evolve_state(
    op: &dyn InterpolatedOperator,
    initial: &StateVector,
    ground: &[usize],
    schedule: &Schedule,
    dt: f64,
    drift_bound: f64,
) -> Result<EvolutionResult> {
    let dim = op.dim();
    if initial.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: initial.dim(),
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let (b, p) = op.norm_bounds();
    let bound = b + p;
    if dt * bound > STABILITY_LIMIT {
        return Err(Error::StepTooLarge {
            dt,
            norm_bound: bound,
        });
    }
    let total = schedule.total_time();
    let steps = (total / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { total / steps as f64 };

    let mut psi = initial.amplitudes().to_vec();
    let zero = Complex64::new(0.0, 0.0);
    let mut k1 = vec![zero; dim];
    let mut k2 = vec![zero; dim];
    let mut k3 = vec![zero; dim];
    let mut k4 = vec![zero; dim];
    let mut tmp = vec![zero; dim];
    let minus_i = Complex64::new(0.0, -1.0);

    // dψ/dt = -i H ψ
    let rhs = |s: f64, x: &[Complex64], out: &mut [Complex64]| {
        op.apply_complex(s, x, out);
        out.iter_mut().for_each(|v| *v *= minus_i);
    };

    for step in 0..steps {
        let t = step as f64 * h;
        let s0 = schedule.s_at(t);
        let s_mid = schedule.s_at(t + 0.5 * h);
        let s1 = schedule.s_at(t + h);
        rhs(s0, &psi, &mut k1);
        for ((o, x), k) in tmp.iter_mut().zip(&psi).zip(&k1) {
            *o = x + k * (0.5 * h);
        }
        rhs(s_mid, &tmp, &mut k2);
        for ((o, x), k) in tmp.iter_mut().zip(&psi).zip(&k2) {
            *o = x + k * (0.5 * h);
        }
        rhs(s_mid, &tmp, &mut k3);
        for ((o, x), k) in tmp.iter_mut().zip(&psi).zip(&k3) {
            *o = x + k * h;
        }
        rhs(s1, &tmp, &mut k4);
        let w = h / 6.0;
        for i in 0..dim {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
    }

    let norm_drift = (norm(&psi) - 1.0).abs();
    if norm_drift > drift_bound {
        return Err(Error::NormDrift {
            drift: norm_drift,
            bound: drift_bound,
            dt: h,
        });
    }
    let overlap = ground_overlap(&psi, ground);
    Ok(EvolutionResult {
        final_state: StateVector::from_raw(psi),
        overlap,
        norm_drift,
        total_time: total,
        steps,
        dt: h,
        ground_indices: ground.to_vec(),
        unsatisfiable: false,
    })
}

/// Evolves the uniform superposition under an instance's operator pair and
/// measures the overlap with the ground space of `H_P`.
pub fn evolve(pair: &OperatorPair, schedule: &Schedule, dt: f64) -> Result<EvolutionResult> {
    let dim = pair.dim();
    let amp = (dim as f64).sqrt().recip();
    let initial = StateVector::from_raw(vec![Complex64::new(amp, 0.0); dim]);
    let ground = pair.hp.ground_indices();
    let mut result = evolve_state(pair, &initial, &ground, schedule, dt, NORM_DRIFT_BOUND)?;
    result.unsatisfiable = pair.hp.min_value() > 0.0;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub n: usize,
    /// Basis indices in sampling order.
    pub samples: Vec<usize>,
}

impl Measurement {
    pub fn counts(&self) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for &z in &self.samples {
            *counts.entry(z).or_insert(0) += 1;
        }
        counts
    }

    pub fn frequency(&self, pred: impl Fn(usize) -> bool) -> f64 {
        self.samples.iter().filter(|&&z| pred(z)).count() as f64 / self.samples.len() as f64
    }

    /// One `bitstring count` line per observed outcome.
    pub fn to_text(&self) -> String {
        self.counts()
            .into_iter()
            .map(|(z, c)| format!("{} {c}\n", Assignment::from_index(self.n, z)))
            .collect()
    }
}

/// Draws `shots` independent basis states with probabilities `|ψ_z|²`.
pub fn measure(psi: &StateVector, n: usize, shots: usize, seed: u64) -> Result<Measurement> {
    if shots == 0 {
        return Err(Error::InvalidArgument("need at least one shot".into()));
    }
    if psi.dim() != 1usize << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            got: psi.dim(),
        });
    }
    let drift = (psi.norm() - 1.0).abs();
    if drift > 1e-6 {
        return Err(Error::Unnormalized(drift));
    }
    let mut cumulative = Vec::with_capacity(psi.dim());
    let mut acc = 0.0;
    for p in psi.probabilities() {
        acc += p;
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last = cumulative.len() - 1;
    let samples = (0..shots)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            // first index whose cumulative weight exceeds u; skips zero-probability states
            cumulative.partition_point(|&c| c <= u).min(last)
        })
        .collect();
    Ok(Measurement { n, samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DtRule {
    /// `0.01 / ‖H‖_bound`.
    Default,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessPoint {
    pub total_time: f64,
    pub overlap: f64,
    pub norm_drift: f64,
}

pub fn success_curve(
    pair: &OperatorPair,
    t_values: &[f64],
    dt_rule: DtRule,
) -> Result<Vec<SuccessPoint>> {
    if t_values.is_empty() {
        return Err(Error::InvalidArgument("no evolution times given".into()));
    }
    if let Some(t) = t_values.iter().find(|t| t.is_nan() || **t <= 0.0) {
        return Err(Error::InvalidArgument(format!("evolution time {t} is not positive")));
    }
    let dt = match dt_rule {
        DtRule::Default => default_dt(pair),
        DtRule::Fixed(dt) => dt,
    };
    crate::par::map_slice(t_values, |&t| {
        let result = evolve(pair, &Schedule::linear(t)?, dt)?;
        Ok(SuccessPoint {
            total_time: t,
            overlap: result.overlap,
            norm_drift: result.norm_drift,
        })
    })
    .into_iter()
    .collect()
}

pub fn success_curve_csv(points: &[SuccessPoint]) -> String {
    let mut out = String::from("T,overlap,norm_drift\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            format_sig15(p.total_time),
            format_sig15(p.overlap),
            format_sig15(p.norm_drift)
        ));
    }
    out
}
