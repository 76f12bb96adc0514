//! Compilation of the interpolated evolution into one-bit rotations and
//! clause phases.
//!
//! Time is cut into `M` slices of length `Δ = T/M`. Slice `ℓ` freezes the
//! Hamiltonian at its left end, `u H_B + v H_P` with `u = 1 - ℓ/M` and
//! `v = ℓ/M`, and splits its exponential into `K` substeps of
//! `e^{-iΔu H_B/K} e^{-iΔv H_P/K}`. Every angle is an integer multiple of
//! `T/(M²K)`, so gates store the integer and the unit is applied once at
//! execution.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{InitialMode, OperatorPair, StateVector};
use crate::instance::{ClauseKind, SatInstance};
use crate::operator::to_dense;

/// Upper limit on `M·K·(n + m)` for a compiled sequence.
pub const MAX_GATES: u64 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    /// `exp(-iθ·½(1 - σ_x))` on `bit` (1-based), `θ = numerator·unit`.
    OneBitTransverse { bit: usize, numerator: i64 },
    /// `exp(-iφ·H_C)` for clause `clause` (0-based), `φ = numerator·unit`.
    ClausePhase { clause: usize, numerator: i64 },
}

impl Gate {
    pub fn numerator(&self) -> i64 {
        match self {
            Gate::OneBitTransverse { numerator, .. } | Gate::ClausePhase { numerator, .. } => {
                *numerator
            }
        }
    }

    fn negated(self) -> Gate {
        match self {
            Gate::OneBitTransverse { bit, numerator } => Gate::OneBitTransverse {
                bit,
                numerator: -numerator,
            },
            Gate::ClausePhase { clause, numerator } => Gate::ClausePhase {
                clause,
                numerator: -numerator,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterBudget {
    /// Time slices `M`.
    pub slices: usize,
    /// Substeps per slice `K`.
    pub substeps: usize,
    pub total_time: f64,
    pub epsilon_target: f64,
    /// `Σ d_i`, bounding `‖H_B‖`.
    pub initial_bound: f64,
    /// Clause count, bounding `‖H_P‖`.
    pub problem_bound: f64,
    /// `Δ·(‖H_B‖ + ‖H_P‖)`, which must be small.
    pub slice_surrogate: f64,
    /// `K / (M (1 + Δ‖H_B‖ + Δ‖H_P‖)²)`, which must be large.
    pub substep_ratio: f64,
    /// First-order bound on the state error from freezing `H` per slice.
    pub slice_error_bound: f64,
    /// First-order bound on the state error from splitting each slice.
    pub splitting_error_bound: f64,
    pub gate_count: u64,
}

impl TrotterBudget {
    pub fn delta(&self) -> f64 {
        self.total_time / self.slices as f64
    }

    /// A budget with explicit `M` and `K`; the diagnostics are recomputed.
    pub fn with_counts(&self, slices: usize, substeps: usize) -> Result<TrotterBudget> {
        budget_for(
            self.total_time,
            self.epsilon_target,
            self.initial_bound,
            self.problem_bound,
            self.gate_count / (self.slices as u64 * self.substeps as u64),
            slices,
            substeps,
        )
    }
}

fn budget_for(
    total_time: f64,
    epsilon_target: f64,
    b: f64,
    p: f64,
    gates_per_substep: u64,
    slices: usize,
    substeps: usize,
) -> Result<TrotterBudget> {
    if slices == 0 || substeps == 0 {
        return Err(Error::InvalidArgument("M and K must be positive".into()));
    }
    let delta = total_time / slices as f64;
    let gate_count = (slices as u64)
        .checked_mul(substeps as u64)
        .and_then(|v| v.checked_mul(gates_per_substep))
        .unwrap_or(u64::MAX);
    Ok(TrotterBudget {
        slices,
        substeps,
        total_time,
        epsilon_target,
        initial_bound: b,
        problem_bound: p,
        slice_surrogate: delta * (b + p),
        substep_ratio: substeps as f64
            / (slices as f64 * (1.0 + delta * b + delta * p).powi(2)),
        slice_error_bound: total_time * (b + p) / (2.0 * slices as f64),
        splitting_error_bound: total_time * delta * b * p / (4.0 * substeps as f64),
        gate_count,
    })
}

/// Smallest powers of two `M`, `K` whose first-order error bounds each stay
/// below half of the state-distance budget `√(2ε)`, so the fidelity with the
/// continuous evolution is at least `1 - ε`.
///
/// Freezing `H` over a slice costs about `Δ²‖H_P - H_B‖/(2T)` per slice, in
/// total `T(‖H_B‖ + ‖H_P‖)/(2M)`. Splitting costs `(Δ/K)²‖[uH_B, vH_P]‖/2`
/// per substep with `uv ≤ ¼`, in total `TΔ‖H_B‖‖H_P‖/(4K)`.
pub fn plan_budget(inst: &SatInstance, total_time: f64, epsilon_target: f64) -> Result<TrotterBudget> {
    plan_budget_with(inst, InitialMode::ClauseWeighted, total_time, epsilon_target)
}

pub fn plan_budget_with(
    inst: &SatInstance,
    mode: InitialMode,
    total_time: f64,
    epsilon_target: f64,
) -> Result<TrotterBudget> {
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(Error::InvalidArgument(format!("T must be positive, got {total_time}")));
    }
    if !(epsilon_target > 0.0 && epsilon_target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon_target}"
        )));
    }
    let b: f64 = match mode {
        InitialMode::ClauseWeighted => inst.degrees().iter().sum::<usize>() as f64,
        InitialMode::Uniform => inst.n() as f64,
    };
    let p = inst.len() as f64;
    let half_budget = 0.5 * (2.0 * epsilon_target).sqrt();
    let slices = ((total_time * (b + p) / (2.0 * half_budget)).ceil() as usize)
        .max(1)
        .next_power_of_two();
    let delta = total_time / slices as f64;
    let substeps = ((total_time * delta * b * p / (4.0 * half_budget)).ceil() as usize)
        .max(1)
        .next_power_of_two();
    budget_for(
        total_time,
        epsilon_target,
        b,
        p,
        (inst.n() + inst.len()) as u64,
        slices,
        substeps,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateSequence {
    pub n: usize,
    pub clauses: Vec<ClauseKind>,
    pub slices: usize,
    pub substeps: usize,
    pub total_time: f64,
    pub gates: Vec<Gate>,
}

impl GateSequence {
    /// `T/(M²K)`.
    pub fn unit(&self) -> f64 {
        self.total_time / (self.slices as f64 * self.slices as f64 * self.substeps as f64)
    }

    pub fn angle(&self, gate: &Gate) -> f64 {
        gate.numerator() as f64 * self.unit()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Reversed order with negated angles.
    pub fn inverse(&self) -> GateSequence {
        GateSequence {
            gates: self.gates.iter().rev().map(|g| g.negated()).collect(),
            ..self.clone()
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "trotter {} {} {} {} {:.16e}\n",
            self.n,
            self.clauses.len(),
            self.slices,
            self.substeps,
            self.total_time
        );
        for g in &self.gates {
            let _ = match g {
                Gate::OneBitTransverse { bit, .. } => {
                    writeln!(out, "xrot {bit} {:.16e}", self.angle(g))
                }
                Gate::ClausePhase { clause, .. } => {
                    writeln!(out, "cphase {clause} {:.16e}", self.angle(g))
                }
            };
        }
        out
    }

    /// Reads the text form back; clause indices refer to `inst`.
    pub fn from_text(text: &str, inst: &SatInstance) -> Result<GateSequence> {
        let syntax = |line: usize, message: String| Error::Syntax { line, message };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| syntax(1, "empty gate file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 || fields[0] != "trotter" {
            return Err(syntax(1, "expected `trotter <n> <m> <M> <K> <T>`".into()));
        }
        let int = |t: &str| t.parse::<usize>().map_err(|_| syntax(1, format!("bad integer {t:?}")));
        let n = int(fields[1])?;
        let m = int(fields[2])?;
        let slices = int(fields[3])?;
        let substeps = int(fields[4])?;
        let total_time: f64 = fields[5]
            .parse()
            .map_err(|_| syntax(1, format!("bad time {:?}", fields[5])))?;
        if n != inst.n() || m != inst.len() {
            return Err(Error::InvalidArgument(format!(
                "gate file is for {n} bits and {m} clauses, the instance has {} and {}",
                inst.n(),
                inst.len()
            )));
        }
        if slices == 0 || substeps == 0 {
            return Err(syntax(1, "M and K must be positive".into()));
        }
        let mut seq = GateSequence {
            n,
            clauses: inst.clauses().to_vec(),
            slices,
            substeps,
            total_time,
            gates: Vec::new(),
        };
        let unit = seq.unit();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(syntax(line_no, "expected `<kind> <target> <angle>`".into()));
            }
            let target: usize = parts[1]
                .parse()
                .map_err(|_| syntax(line_no, format!("bad target {:?}", parts[1])))?;
            let angle: f64 = parts[2]
                .parse()
                .map_err(|_| syntax(line_no, format!("bad angle {:?}", parts[2])))?;
            let numerator = (angle / unit).round();
            if (numerator * unit - angle).abs() > 1e-9 * angle.abs().max(unit) {
                return Err(syntax(
                    line_no,
                    format!("angle {angle} is not a multiple of T/(M^2 K)"),
                ));
            }
            let numerator = numerator as i64;
            let gate = match parts[0] {
                "xrot" if (1..=n).contains(&target) => Gate::OneBitTransverse {
                    bit: target,
                    numerator,
                },
                "cphase" if target < m => Gate::ClausePhase {
                    clause: target,
                    numerator,
                },
                "xrot" | "cphase" => {
                    return Err(syntax(line_no, format!("target {target} out of range")));
                }
                other => return Err(syntax(line_no, format!("unknown gate {other:?}"))),
            };
            seq.gates.push(gate);
        }
        Ok(seq)
    }
}

/// Emits the gate sequence for `budget`, bit-ascending then
/// clause-ascending within each substep.
pub fn compile(
    inst: &SatInstance,
    mode: InitialMode,
    total_time: f64,
    budget: &TrotterBudget,
) -> Result<GateSequence> {
    if (budget.total_time - total_time).abs() > 1e-12 * total_time.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "budget was planned for T = {}, not {total_time}",
            budget.total_time
        )));
    }
    let n = inst.n();
    let m = inst.len();
    let count = (budget.slices as u64)
        .checked_mul(budget.substeps as u64)
        .and_then(|v| v.checked_mul((n + m) as u64))
        .unwrap_or(u64::MAX);
    if count > MAX_GATES {
        return Err(Error::Capacity {
            what: "gate count",
            requested: count.min(usize::MAX as u64) as usize,
            cap: MAX_GATES as usize,
        });
    }
    let weights: Vec<i64> = match mode {
        InitialMode::ClauseWeighted => inst.degrees().iter().map(|&d| d as i64).collect(),
        InitialMode::Uniform => vec![1; n],
    };
    let big_m = budget.slices as i64;
    let mut gates = Vec::with_capacity(count as usize);
    for slice in 0..big_m {
        for _ in 0..budget.substeps {
            for (i, w) in weights.iter().enumerate() {
                gates.push(Gate::OneBitTransverse {
                    bit: i + 1,
                    numerator: (big_m - slice) * w,
                });
            }
            for clause in 0..m {
                gates.push(Gate::ClausePhase {
                    clause,
                    numerator: slice,
                });
            }
        }
    }
    Ok(GateSequence {
        n,
        clauses: inst.clauses().to_vec(),
        slices: budget.slices,
        substeps: budget.substeps,
        total_time,
        gates,
    })
}

fn apply_transverse(n: usize, bit: usize, theta: f64, amps: &mut [Complex64]) {
    // e^{-iθ/2} (cos(θ/2) + i sin(θ/2) σ_x)
    let half = 0.5 * theta;
    let phase = Complex64::from_polar(1.0, -half);
    let c = phase * half.cos();
    let s = phase * Complex64::new(0.0, half.sin());
    let mask = 1usize << (n - bit);
    for z in 0..amps.len() {
        if z & mask == 0 {
            let a = amps[z];
            let b = amps[z | mask];
            amps[z] = c * a + s * b;
            amps[z | mask] = s * a + c * b;
        }
    }
}

/// Applies the gates in order.
pub fn execute(seq: &GateSequence, psi: &StateVector) -> Result<StateVector> {
    let dim = 1usize << seq.n;
    if psi.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: psi.dim(),
        });
    }
    let violating: Vec<Vec<usize>> = seq
        .clauses
        .iter()
        .map(|c| (0..dim).filter(|&z| c.energy_at_index(seq.n, z) > 0).collect())
        .collect();
    let unit = seq.unit();
    let mut amps = psi.amplitudes().to_vec();
    for gate in &seq.gates {
        let angle = gate.numerator() as f64 * unit;
        match *gate {
            Gate::OneBitTransverse { bit, .. } => apply_transverse(seq.n, bit, angle, &mut amps),
            Gate::ClausePhase { clause, .. } => {
                let phase = Complex64::from_polar(1.0, -angle);
                for &z in &violating[clause] {
                    amps[z] *= phase;
                }
            }
        }
    }
    Ok(StateVector::from_raw(amps))
}

/// `|⟨a|b⟩|`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    for v in [a, b] {
        let drift = (v.norm() - 1.0).abs();
        if drift > 1e-6 {
            return Err(Error::Unnormalized(drift));
        }
    }
    Ok(a.inner(b).norm().min(1.0))
}

/// `min_α ‖a - e^{iα} b‖ = √(2 - 2|⟨a|b⟩|)`, which is first order in the
/// error, unlike `1 - |⟨a|b⟩|`.
pub fn state_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok((2.0 - 2.0 * fidelity(a, b)?).max(0.0).sqrt())
}

/// The product of exact slice exponentials `Π_ℓ e^{-iΔH(ℓΔ/T)}`, the limit
/// of the compiled sequence as `K → ∞`. Dense, so only for small `n`.
pub fn exact_slice_evolution(
    pair: &OperatorPair,
    total_time: f64,
    slices: usize,
    psi: &StateVector,
) -> Result<StateVector> {
    let n = pair.n();
    if n > 10 {
        return Err(Error::Capacity {
            what: "qubits for dense slice exponentials",
            requested: n,
            cap: 10,
        });
    }
    let delta = total_time / slices as f64;
    let mut state: DVector<Complex64> = DVector::from_column_slice(psi.amplitudes());
    for slice in 0..slices {
        let s = slice as f64 / slices as f64;
        let eig = nalgebra::SymmetricEigen::new(to_dense(pair, s));
        let q: DMatrix<Complex64> = eig.eigenvectors.map(Complex64::from);
        let coeffs = q.adjoint() * &state;
        let rotated = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(eig.eigenvalues.iter())
                .map(|(c, e)| c * Complex64::from_polar(1.0, -delta * e)),
        );
        state = q * rotated;
    }
    Ok(StateVector::from_raw(state.iter().copied().collect()))
}
