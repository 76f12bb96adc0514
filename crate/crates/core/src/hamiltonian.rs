//! Problem and beginning Hamiltonians in the `2^n` computational basis.
//!
//! Operators are kept in structural form: the problem Hamiltonian is the
//! vector of classical energies, the beginning Hamiltonian is a list of
//! per-bit weights `d_i` for `Σ_i d_i · ½(1 - σ_x^(i))`. Nothing here builds a
//! dense `2^n × 2^n` matrix; see [`crate::operator::to_dense`] for small test
//! fixtures.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{families, Assignment, ClauseKind, SatInstance};
use crate::operator::InterpolatedOperator;

/// Largest qubit count for which full state vectors are allocated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionCap(pub usize);

impl Default for DimensionCap {
    fn default() -> Self {
        DimensionCap(24)
    }
}

impl DimensionCap {
    pub fn check(self, n: usize, what: &'static str) -> Result<()> {
        if n > self.0 {
            Err(Error::Capacity {
                what,
                requested: n,
                cap: self.0,
            })
        } else {
            Ok(())
        }
    }
}

/// Diagonal operator whose entry at basis index `z` is the number of
/// clauses violated by `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    n: usize,
    values: Vec<f64>,
}

impl DiagonalOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Basis indices attaining the minimum entry.
    pub fn ground_indices(&self) -> Vec<usize> {
        let min = self.min_value();
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == min)
            .map(|(z, _)| z)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialMode {
    /// `d_i` = number of clauses containing bit `i`.
    ClauseWeighted,
    /// Every `d_i = 1`.
    Uniform,
}

/// `Σ_i d_i · ½(1 - σ_x^(i))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseOperator {
    n: usize,
    weights: Vec<f64>,
}

impl TransverseOperator {
    pub fn new(weights: Vec<f64>) -> Self {
        TransverseOperator {
            n: weights.len(),
            weights,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Applies `Σ_i d_i · ½(1 - σ_x^(i))` to `x`, adding `scale` times the result
/// into `y`.
fn transverse_accumulate<T>(weights: &[f64], scale: f64, x: &[T], y: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = weights.len();
    for (k, &d) in weights.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        let c = 0.5 * d * scale;
        let mask = 1usize << (n - 1 - k);
        for z in 0..x.len() {
            y[z] = y[z] + (x[z] - x[z ^ mask]) * c;
        }
    }
}

/// The pair `(H_B, H_P)` defining `H(s) = (1 - s) H_B + s H_P`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPair {
    pub hb: TransverseOperator,
    pub hp: DiagonalOperator,
}

impl OperatorPair {
    pub fn new(hb: TransverseOperator, hp: DiagonalOperator) -> Result<Self> {
        if hb.n != hp.n {
            return Err(Error::DimensionMismatch {
                expected: hp.n,
                got: hb.n,
            });
        }
        Ok(OperatorPair { hb, hp })
    }

    pub fn from_instance(inst: &SatInstance, mode: InitialMode, cap: DimensionCap) -> Result<Self> {
        let hp = build_problem_hamiltonian(inst, cap)?;
        let hb = build_initial_hamiltonian(inst, mode);
        OperatorPair::new(hb, hp)
    }

    pub fn n(&self) -> usize {
        self.hp.n
    }

    /// `Σ d_i + max h`, a bound on `‖H(s)‖` for every `s`.
    pub fn norm_bound(&self) -> f64 {
        let (b, p) = self.norm_bounds();
        b + p
    }
}

impl InterpolatedOperator for OperatorPair {
    fn dim(&self) -> usize {
        self.hp.values.len()
    }

    fn apply_initial(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        transverse_accumulate(&self.hb.weights, 1.0, x, y);
    }

    fn apply_problem(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), h) in y.iter_mut().zip(x).zip(&self.hp.values) {
            *yi = h * xi;
        }
    }

    fn norm_bounds(&self) -> (f64, f64) {
        let pmax = self.hp.values.iter().copied().fold(0.0, f64::max);
        (self.hb.total_weight(), pmax)
    }

    fn apply(&self, s: f64, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), h) in y.iter_mut().zip(x).zip(&self.hp.values) {
            *yi = s * h * xi;
        }
        transverse_accumulate(&self.hb.weights, 1.0 - s, x, y);
    }

    fn apply_complex(&self, s: f64, x: &[Complex64], y: &mut [Complex64]) {
        for ((yi, xi), h) in y.iter_mut().zip(x).zip(&self.hp.values) {
            *yi = xi * (s * h);
        }
        transverse_accumulate(&self.hb.weights, 1.0 - s, x, y);
    }

    fn qubits(&self) -> Option<usize> {
        Some(self.n())
    }
}

/// Complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state, requiring unit norm to within `1e-12`.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let state = StateVector { amps };
        let drift = (state.norm() - 1.0).abs();
        if drift > 1e-12 {
            return Err(Error::Unnormalized(drift));
        }
        Ok(state)
    }

    /// Wraps amplitudes without checking the norm (intermediate results).
    pub fn from_raw(amps: Vec<Complex64>) -> Self {
        StateVector { amps }
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { amps }
    }

    pub fn from_real(values: &[f64]) -> Self {
        StateVector {
            amps: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

pub fn build_problem_hamiltonian(inst: &SatInstance, cap: DimensionCap) -> Result<DiagonalOperator> {
    let n = inst.n();
    cap.check(n, "problem Hamiltonian")?;
    let values = crate::par::map_indices(1usize << n, |z| inst.energy_at_index(z) as f64);
    Ok(DiagonalOperator { n, values })
}

pub fn build_initial_hamiltonian(inst: &SatInstance, mode: InitialMode) -> TransverseOperator {
    let weights = match mode {
        InitialMode::Uniform => vec![1.0; inst.n()],
        InitialMode::ClauseWeighted => inst.degrees().into_iter().map(|d| d as f64).collect(),
    };
    TransverseOperator::new(weights)
}

/// The uniform superposition `2^(-n/2) Σ_z |z⟩`, ground state of every
/// beginning Hamiltonian.
pub fn initial_state(n: usize, cap: DimensionCap) -> Result<StateVector> {
    cap.check(n, "initial state")?;
    let dim = 1usize << n;
    let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
    Ok(StateVector {
        amps: vec![amp; dim],
    })
}

/// `H(s) ψ` in `O(n · 2^n)`.
pub fn apply_interpolated(pair: &OperatorPair, s: f64, psi: &StateVector) -> Result<StateVector> {
    if psi.dim() != pair.dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim(),
            got: psi.dim(),
        });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
    pair.apply_complex(s, &psi.amps, &mut out);
    Ok(StateVector { amps: out })
}

/// One clause's share of `H(s)`: a `2^k × 2^k` matrix on `bits` (ascending;
/// the first listed bit is the most significant local bit).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTerm {
    pub bits: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

impl LocalTerm {
    /// Adds the term, embedded into the `n`-qubit space, applied to `x`.
    pub fn accumulate(&self, n: usize, x: &[f64], y: &mut [f64]) {
        let k = self.bits.len();
        let masks: Vec<usize> = self.bits.iter().map(|&b| 1usize << (n - b)).collect();
        let local_of = |z: usize| {
            masks
                .iter()
                .fold(0usize, |acc, &m| (acc << 1) | usize::from(z & m != 0))
        };
        let with_local = |z: usize, local: usize| {
            masks.iter().enumerate().fold(z, |acc, (pos, &m)| {
                if (local >> (k - 1 - pos)) & 1 == 1 {
                    acc | m
                } else {
                    acc & !m
                }
            })
        };
        for z in 0..x.len() {
            let row = local_of(z);
            let mut acc = 0.0;
            for col in 0..(1usize << k) {
                let m = self.matrix[(row, col)];
                if m != 0.0 {
                    acc += m * x[with_local(z, col)];
                }
            }
            y[z] += acc;
        }
    }
}

/// Splits `H(s)` into one few-bit term per clause:
/// `(1 - s) Σ_{i ∈ C} ½(1 - σ_x^(i)) + s · h_C`.
pub fn clause_local_terms(inst: &SatInstance, s: f64) -> Result<Vec<LocalTerm>> {
    let mut terms = Vec::with_capacity(inst.len());
    for clause in inst.clauses() {
        if matches!(clause, ClauseKind::GroverOracle(_)) {
            return Err(Error::Unsupported(
                "the grover oracle has no few-bit decomposition".into(),
            ));
        }
        let bits = clause.bits();
        let k = bits.len();
        let dim = 1usize << k;
        let mut m = DMatrix::zeros(dim, dim);
        for local in 0..dim {
            let energy = clause.energy_with_local(&bits, local);
            m[(local, local)] += s * energy as f64;
            for pos in 0..k {
                let flipped = local ^ (1 << (k - 1 - pos));
                m[(local, local)] += (1.0 - s) * 0.5;
                m[(local, flipped)] -= (1.0 - s) * 0.5;
            }
        }
        terms.push(LocalTerm { bits, matrix: m });
    }
    Ok(terms)
}

impl ClauseKind {
    /// Energy on a local basis state over `bits` (first bit most significant).
    pub(crate) fn energy_with_local(&self, bits: &[usize], local: usize) -> u8 {
        let k = bits.len();
        let n = bits.iter().copied().max().unwrap_or(0);
        let mut full = 0usize;
        for (pos, &b) in bits.iter().enumerate() {
            if (local >> (k - 1 - pos)) & 1 == 1 {
                full |= 1 << (n - b);
            }
        }
        self.energy_at_index(n, full)
    }
}

/// Maps an agree/disagree ring with an even number of disagree clauses onto
/// the all-agree ring by flipping every bit where a satisfying assignment
/// `w` has a 1. Returns the all-agree ring and `w`.
pub fn gauge_transform_ring(inst: &SatInstance) -> Result<(SatInstance, Assignment)> {
    let n = inst.n();
    if inst.len() != n || n < 3 {
        return Err(Error::InvalidArgument(
            "expected a ring with one clause per bit".into(),
        ));
    }
    let mut disagree = Vec::with_capacity(n);
    for (j, clause) in inst.clauses().iter().enumerate() {
        let (a, b) = (j + 1, (j + 1) % n + 1);
        match clause {
            ClauseKind::Agree(i, k) if (*i, *k) == (a, b) || (*i, *k) == (b, a) => {
                disagree.push(false)
            }
            ClauseKind::Disagree(i, k) if (*i, *k) == (a, b) || (*i, *k) == (b, a) => {
                disagree.push(true)
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "clause {} ({other}) is not an agree/disagree clause on bits {a},{b}",
                    j + 1
                )))
            }
        }
    }
    if disagree.iter().filter(|&&d| d).count() % 2 == 1 {
        return Err(Error::Unsatisfiable(
            "a ring with an odd number of disagree clauses".into(),
        ));
    }
    let mut w = vec![0u8; n];
    for j in 1..n {
        w[j] = w[j - 1] ^ u8::from(disagree[j - 1]);
    }
    Ok((families::agree_ring(n)?, Assignment(w)))
}

/// Relabels basis states `z -> z XOR mask`.
pub fn flip_bits(diag: &DiagonalOperator, mask: &Assignment) -> DiagonalOperator {
    let m = mask.index();
    DiagonalOperator {
        n: diag.n,
        values: (0..diag.values.len()).map(|z| diag.values[z ^ m]).collect(),
    }
}
