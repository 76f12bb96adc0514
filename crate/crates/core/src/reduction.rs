//! Symmetry-reduced interpolating matrices for the Grover, bush and
//! overconstrained families, the Grover secular equation, and gap scaling
//! studies built on them.
//!
//! The reduced bases are spin states `|m⟩`, `m = n/2 - k`, where `|m⟩` is the
//! normalized sum of all `n`-bit strings of Hamming weight `k`. Index `k` of
//! a reduced vector is the state with `m = n/2 - k`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::InitialMode;
use crate::operator::DensePair;
use crate::ring::ring_gap;
use crate::spectrum::{find_min_gap, format_sig15, GapOptions, SectorProjector};

/// Reduced operators are stored as a dense `(B, P)` pair.
pub type ReducedOperator = DensePair;

/// The `n + 1` fully symmetric states of `n` spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetricBasis {
    pub n: usize,
}

impl SymmetricBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one spin".into()));
        }
        Ok(SymmetricBasis { n })
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// `m` for basis index `k`.
    pub fn m(&self, k: usize) -> f64 {
        self.n as f64 / 2.0 - k as f64
    }

    pub fn m_values(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.m(k)).collect()
    }

    /// Columns are the basis states written out in the `2^n` computational
    /// basis. Only for small `n`.
    pub fn embedding(&self) -> DMatrix<f64> {
        let n = self.n;
        let dim = 1usize << n;
        let mut q = DMatrix::zeros(dim, n + 1);
        let mut counts = vec![0usize; n + 1];
        for z in 0..dim {
            counts[z.count_ones() as usize] += 1;
        }
        for z in 0..dim {
            let k = z.count_ones() as usize;
            q[(z, k)] = (counts[k] as f64).sqrt().recip();
        }
        q
    }
}

/// `S_x` in the `|m⟩` basis: tridiagonal with
/// `⟨m+1|S_x|m⟩ = ½√(j(j+1) - m(m+1))`, `j = n/2`.
pub fn sx_matrix_elements(n: usize) -> Result<DMatrix<f64>> {
    let basis = SymmetricBasis::new(n)?;
    let j = n as f64 / 2.0;
    let mut s = DMatrix::zeros(n + 1, n + 1);
    for k in 0..n {
        let m = basis.m(k + 1);
        let v = 0.5 * (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        s[(k, k + 1)] = v;
        s[(k + 1, k)] = v;
    }
    Ok(s)
}

/// `n/2 - S_x`, the reduced form of `Σ_j ½(1 - σ_x^(j))`.
fn transverse_block(n: usize) -> Result<DMatrix<f64>> {
    let sx = sx_matrix_elements(n)?;
    Ok(DMatrix::identity(n + 1, n + 1) * (n as f64 / 2.0) - sx)
}

/// Grover search for the all-zeros string in the symmetric sector.
pub fn grover_reduced(n: usize) -> Result<ReducedOperator> {
    let initial = transverse_block(n)?;
    let mut problem = DMatrix::identity(n + 1, n + 1);
    problem[(0, 0)] = 0.0;
    Ok(DensePair::new(initial, problem))
}

/// The bush instance reduced over permutations of its `n` leaf bits.
///
/// Basis index `z0 * (n + 1) + k` holds hub value `z0` and leaf state
/// `m = n/2 - k`. The hub enters the beginning Hamiltonian with weight
/// `n + 1` (its clause degree) or `1` in uniform mode.
pub fn bush_reduced(n: usize, mode: InitialMode) -> Result<ReducedOperator> {
    let leaves = transverse_block(n)?;
    let basis = SymmetricBasis::new(n)?;
    let dim = n + 1;
    let hub_weight = match mode {
        InitialMode::ClauseWeighted => (n + 1) as f64,
        InitialMode::Uniform => 1.0,
    };
    let half_flip = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
    let initial = half_flip.kronecker(&DMatrix::<f64>::identity(dim, dim)) * hub_weight
        + DMatrix::<f64>::identity(2, 2).kronecker(&leaves);
    let mut problem = DMatrix::zeros(2 * dim, 2 * dim);
    for k in 0..dim {
        // hub 0 breaks the one-bit clause; hub 1 breaks one implication per zero leaf
        problem[(k, k)] = 1.0;
        problem[(dim + k, dim + k)] = n as f64 / 2.0 + basis.m(k);
    }
    Ok(DensePair::new(initial, problem))
}

/// Overconstrained 2-SAT in the symmetric sector, before the negation
/// filter.
pub fn overconstrained_reduced(n: usize) -> Result<ReducedOperator> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "overconstrained instance needs n >= 2, got {n}"
        )));
    }
    let initial = transverse_block(n)? * (n - 1) as f64;
    let basis = SymmetricBasis::new(n)?;
    let quarter = (n * n) as f64 / 4.0;
    let problem = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n + 1,
        basis.m_values().into_iter().map(|m| quarter - m * m),
    ));
    Ok(DensePair::new(initial, problem))
}

/// Orthonormal basis of the `m ↔ -m` invariant states: `(|m⟩ + |-m⟩)/√2`
/// for `m > 0`, plus `|0⟩` when `n` is even. Columns are ordered by
/// descending `m`.
pub fn negation_invariant_basis(n: usize) -> DMatrix<f64> {
    let cols = n / 2 + 1;
    let mut q = DMatrix::zeros(n + 1, cols);
    for k in 0..cols {
        let mirror = n - k;
        if mirror == k {
            q[(k, k)] = 1.0;
        } else {
            q[(k, k)] = std::f64::consts::FRAC_1_SQRT_2;
            q[(mirror, k)] = std::f64::consts::FRAC_1_SQRT_2;
        }
    }
    q
}

/// Overconstrained 2-SAT restricted to the global-negation invariant sector.
pub fn overconstrained_invariant(n: usize) -> Result<ReducedOperator> {
    Ok(overconstrained_reduced(n)?.restrict(&negation_invariant_basis(n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecularSolution {
    pub n: usize,
    pub s_star: f64,
    /// `Σ_{r≥1} P_r / r`.
    pub inverse_sum: f64,
    /// `Σ_{r≥1} P_r / r²`.
    pub inverse_square_sum: f64,
    /// The roots in `(-∞, 0)` and `(0, 1)`.
    pub lambda_roots: (f64, f64),
    /// `(1 - s*)(λ₊ - λ₋)`.
    pub exact_gap: f64,
    /// `2(1 - s*)(Σ P_r/r²)^{-1/2} 2^{-n/2}`.
    pub g_min_estimate: f64,
}

/// `P_r = C(n, r) / 2^n` for `r = 0..=n`, via logarithms so large `n` does
/// not underflow in intermediate steps.
pub fn binomial_weights(n: usize) -> Vec<f64> {
    let mut log_p = -(n as f64) * std::f64::consts::LN_2;
    let mut out = Vec::with_capacity(n + 1);
    for r in 0..=n {
        out.push(log_p.exp());
        log_p += ((n - r) as f64).ln() - ((r + 1) as f64).ln();
    }
    out
}

/// `Σ_r P_r/(r - λ) - (1 - s)/s`.
pub fn secular_function(weights: &[f64], s: f64, lambda: f64) -> f64 {
    weights
        .iter()
        .enumerate()
        .map(|(r, p)| p / (r as f64 - lambda))
        .sum::<f64>()
        - (1.0 - s) / s
}

/// Bisection for the unique root of the increasing secular function on
/// `(lo, hi)`; `lo` may be `-∞`.
pub fn secular_root(weights: &[f64], s: f64, lo: f64, hi: f64) -> f64 {
    let f = |l: f64| secular_function(weights, s, l);
    let mut lo = lo;
    if lo == f64::NEG_INFINITY {
        let mut step = 1.0;
        lo = hi - step;
        while f(lo) > 0.0 {
            step *= 2.0;
            lo = hi - step;
        }
    }
    let mut a = lo;
    let mut b = hi;
    for _ in 0..2000 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    0.5 * (a + b)
}

pub fn grover_secular(n: usize) -> Result<SecularSolution> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("secular solution needs n >= 2, got {n}")));
    }
    let weights = binomial_weights(n);
    let inverse_sum: f64 = weights
        .iter()
        .enumerate()
        .skip(1)
        .map(|(r, p)| p / r as f64)
        .sum();
    let inverse_square_sum: f64 = weights
        .iter()
        .enumerate()
        .skip(1)
        .map(|(r, p)| p / (r * r) as f64)
        .sum();
    let s_star = 1.0 / (1.0 + inverse_sum);
    let minus = secular_root(&weights, s_star, f64::NEG_INFINITY, 0.0);
    let plus = secular_root(&weights, s_star, 0.0, 1.0);
    Ok(SecularSolution {
        n,
        s_star,
        inverse_sum,
        inverse_square_sum,
        lambda_roots: (minus, plus),
        exact_gap: (1.0 - s_star) * (plus - minus),
        g_min_estimate: 2.0 * (1.0 - s_star) / inverse_square_sum.sqrt()
            * 2f64.powf(-(n as f64) / 2.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Grover,
    Bush,
    BushUniform,
    Overconstrained,
    Ring,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "grover" => Family::Grover,
            "bush" => Family::Bush,
            "bush-uniform" => Family::BushUniform,
            "overconstrained" => Family::Overconstrained,
            "ring" => Family::Ring,
            other => {
                return Err(Error::InvalidArgument(format!("unknown family {other:?}")));
            }
        })
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Grover => "grover",
            Family::Bush => "bush",
            Family::BushUniform => "bush-uniform",
            Family::Overconstrained => "overconstrained",
            Family::Ring => "ring",
        })
    }
}

impl Family {
    /// The reduced operator in which the family's gap is measured. The ring
    /// has no reduced matrix; its gap comes from the momentum blocks.
    pub fn reduced(&self, n: usize) -> Result<ReducedOperator> {
        match self {
            Family::Grover => grover_reduced(n),
            Family::Bush => bush_reduced(n, InitialMode::ClauseWeighted),
            Family::BushUniform => bush_reduced(n, InitialMode::Uniform),
            Family::Overconstrained => overconstrained_invariant(n),
            Family::Ring => Err(Error::Unsupported(
                "the ring is solved in closed form, not by a reduced matrix".into(),
            )),
        }
    }

    pub fn gap(&self, n: usize, options: GapOptions) -> Result<(f64, f64)> {
        match self {
            Family::Ring => {
                let g = ring_gap(n, options.refine_tol)?;
                Ok((g.g_min, g.s_star))
            }
            _ => {
                let report = find_min_gap(&self.reduced(n)?, &SectorProjector::Full, options)?;
                Ok((report.g_min, report.s_star))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of the data from the line.
    pub residual: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<Fit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument("a fit needs at least two matching points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(Fit {
        slope,
        intercept,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub g_min: f64,
    pub s_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub family: Family,
    pub rows: Vec<ScalingRow>,
    /// `log g` against `log n`.
    pub power_fit: Fit,
    /// `log g` against `n`.
    pub exponential_fit: Fit,
}

impl ScalingStudy {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,g_min,log_n,log_g\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.n,
                format_sig15(r.g_min),
                format_sig15((r.n as f64).ln()),
                format_sig15(r.g_min.ln())
            ));
        }
        out
    }

    /// Whether an exponential in `n` describes the data better than a power
    /// of `n`.
    pub fn prefers_exponential(&self) -> bool {
        self.exponential_fit.residual < self.power_fit.residual
    }
}

/// Gap options suited to scaling studies, where minima get extremely
/// narrow in `s`.
pub fn scaling_gap_options() -> GapOptions {
    GapOptions {
        coarse_points: 400,
        refine_tol: 1e-14,
    }
}

pub fn gap_scaling_study(
    family: Family,
    n_values: &[usize],
    options: GapOptions,
) -> Result<ScalingStudy> {
    if n_values.len() < 3 {
        return Err(Error::InvalidArgument("a scaling study needs at least 3 sizes".into()));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("sizes must be strictly ascending".into()));
    }
    let rows = crate::par::map_slice(n_values, |&n| {
        family
            .gap(n, options)
            .map(|(g_min, s_star)| ScalingRow { n, g_min, s_star })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    if let Some(r) = rows.iter().find(|r| r.g_min <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gap vanishes at n = {}; no logarithmic fit possible",
            r.n
        )));
    }
    let log_g: Vec<f64> = rows.iter().map(|r| r.g_min.ln()).collect();
    let log_n: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    Ok(ScalingStudy {
        family,
        power_fit: linear_fit(&log_n, &log_g)?,
        exponential_fit: linear_fit(&ns, &log_g)?,
        rows,
    })
}
