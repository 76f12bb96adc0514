//! Instantaneous spectra of `H(s)`, minimum-gap search, and the adiabatic
//! time scale.
//!
//! Symmetry sectors are restricted to symmetries that permute computational
//! basis states (bit permutations combined with bit negations). The +1 sector
//! of such a group is spanned by normalized orbit sums, so restriction is
//! exact and needs no eigenvector classification.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eigen::{self, EigenOptions, Eigenpair, SymmetricMap};
use crate::error::{Error, Result};
use crate::operator::InterpolatedOperator;

/// A map on bit positions combined with bit negations. Bit `i` (1-based) of
/// the input lands at position `target[i - 1]` of the output, negated when
/// `negate[i - 1]` is set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedPermutation {
    pub target: Vec<usize>,
    pub negate: Vec<bool>,
}

impl SignedPermutation {
    pub fn identity(n: usize) -> Self {
        SignedPermutation {
            target: (1..=n).collect(),
            negate: vec![false; n],
        }
    }

    pub fn swap(n: usize, i: usize, j: usize) -> Self {
        let mut p = Self::identity(n);
        p.target.swap(i - 1, j - 1);
        p
    }

    pub fn negate_all(n: usize) -> Self {
        SignedPermutation {
            target: (1..=n).collect(),
            negate: vec![true; n],
        }
    }

    pub fn with_negated(mut self, bits: &[usize]) -> Self {
        for &b in bits {
            self.negate[b - 1] = !self.negate[b - 1];
        }
        self
    }

    pub fn n(&self) -> usize {
        self.target.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        let mut seen = vec![false; n];
        for &t in &self.target {
            if !(1..=n).contains(&t) || std::mem::replace(&mut seen[t - 1], true) {
                return Err(Error::InvalidArgument(format!(
                    "{:?} is not a permutation of 1..={n}",
                    self.target
                )));
            }
        }
        if self.negate.len() != n {
            return Err(Error::InvalidArgument("negation mask length mismatch".into()));
        }
        Ok(())
    }

    pub fn apply(&self, index: usize) -> usize {
        let n = self.n();
        let mut out = 0usize;
        for i in 0..n {
            let bit = (index >> (n - 1 - i)) & 1 == 1;
            if bit != self.negate[i] {
                out |= 1 << (n - self.target[i]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectorProjector {
    Full,
    /// +1 eigenspace of `G = ∏_j σ_x^(j)`.
    GlobalNegation,
    /// States invariant under every element of the group generated by
    /// `generators`.
    BitPermutationInvariant {
        generators: Vec<SignedPermutation>,
        description: String,
    },
}

impl SectorProjector {
    /// Invariance under every permutation of the listed bits.
    pub fn symmetric_in(n: usize, bits: &[usize]) -> Self {
        let generators = bits
            .windows(2)
            .map(|w| SignedPermutation::swap(n, w[0], w[1]))
            .collect();
        SectorProjector::BitPermutationInvariant {
            generators,
            description: format!("symmetric in bits {bits:?}"),
        }
    }

    pub fn description(&self) -> String {
        self.to_string()
    }

    /// Builds the orbit basis for an `n`-qubit register.
    pub fn build(&self, n: usize) -> Result<Sector> {
        let dim = 1usize << n;
        let generators: Vec<SignedPermutation> = match self {
            SectorProjector::Full => Vec::new(),
            SectorProjector::GlobalNegation => vec![SignedPermutation::negate_all(n)],
            SectorProjector::BitPermutationInvariant { generators, .. } => {
                for g in generators {
                    g.validate()?;
                    if g.n() != n {
                        return Err(Error::DimensionMismatch {
                            expected: n,
                            got: g.n(),
                        });
                    }
                }
                generators.clone()
            }
        };
        if generators.is_empty() {
            return Ok(Sector {
                description: self.description(),
                orbit_of: None,
                weights: Vec::new(),
                full_dim: dim,
            });
        }
        let mut orbit_of = vec![u32::MAX; dim];
        let mut sizes: Vec<usize> = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..dim {
            if orbit_of[start] != u32::MAX {
                continue;
            }
            let id = sizes.len() as u32;
            orbit_of[start] = id;
            let mut size = 1;
            queue.push_back(start);
            while let Some(z) = queue.pop_front() {
                for g in &generators {
                    let image = g.apply(z);
                    if orbit_of[image] == u32::MAX {
                        orbit_of[image] = id;
                        size += 1;
                        queue.push_back(image);
                    }
                }
            }
            sizes.push(size);
        }
        Ok(Sector {
            description: self.description(),
            orbit_of: Some(orbit_of),
            weights: sizes.iter().map(|&s| (s as f64).sqrt().recip()).collect(),
            full_dim: dim,
        })
    }
}

impl fmt::Display for SectorProjector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectorProjector::Full => write!(f, "full"),
            SectorProjector::GlobalNegation => write!(f, "global-negation(+1)"),
            SectorProjector::BitPermutationInvariant { description, .. } => {
                write!(f, "permutation-invariant({description})")
            }
        }
    }
}

/// Orthonormal orbit-sum basis of a symmetry sector.
#[derive(Debug, Clone)]
pub struct Sector {
    description: String,
    orbit_of: Option<Vec<u32>>,
    weights: Vec<f64>,
    full_dim: usize,
}

impl Sector {
    pub fn full(dim: usize) -> Self {
        Sector {
            description: SectorProjector::Full.description(),
            orbit_of: None,
            weights: Vec::new(),
            full_dim: dim,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.orbit_of {
            None => self.full_dim,
            Some(_) => self.weights.len(),
        }
    }

    pub fn full_dim(&self) -> usize {
        self.full_dim
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn embed(&self, x: &[f64], full: &mut [f64]) {
        match &self.orbit_of {
            None => full.copy_from_slice(x),
            Some(orbit_of) => {
                for (z, f) in full.iter_mut().enumerate() {
                    let o = orbit_of[z] as usize;
                    *f = x[o] * self.weights[o];
                }
            }
        }
    }

    pub fn restrict(&self, full: &[f64], y: &mut [f64]) {
        match &self.orbit_of {
            None => y.copy_from_slice(full),
            Some(orbit_of) => {
                y.iter_mut().for_each(|v| *v = 0.0);
                for (z, f) in full.iter().enumerate() {
                    let o = orbit_of[z] as usize;
                    y[o] += f * self.weights[o];
                }
            }
        }
    }

    /// Orthogonal projection of a full-space vector onto the sector.
    pub fn project(&self, full: &[f64]) -> Vec<f64> {
        let mut reduced = vec![0.0; self.dim()];
        self.restrict(full, &mut reduced);
        let mut out = vec![0.0; self.full_dim];
        self.embed(&reduced, &mut out);
        out
    }

    /// Largest `‖ΠHx - HΠx‖` over a few deterministic probe vectors, for
    /// `H = H(s)` at two interior `s` values.
    pub fn commutator_defect(&self, op: &dyn InterpolatedOperator) -> f64 {
        if self.orbit_of.is_none() {
            return 0.0;
        }
        let dim = self.full_dim;
        let mut worst: f64 = 0.0;
        let mut hx = vec![0.0; dim];
        let mut hpx = vec![0.0; dim];
        for probe in 0..3u64 {
            let x: Vec<f64> = (0..dim)
                .map(|z| {
                    let h = (z as u64 ^ probe.wrapping_mul(0x9e37_79b9_7f4a_7c15))
                        .wrapping_mul(0xbf58_476d_1ce4_e5b9);
                    ((h >> 11) as f64 / (1u64 << 53) as f64) - 0.5
                })
                .collect();
            for &s in &[0.3, 0.7] {
                op.apply(s, &x, &mut hx);
                let phx = self.project(&hx);
                let px = self.project(&x);
                op.apply(s, &px, &mut hpx);
                let d = phx
                    .iter()
                    .zip(&hpx)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(d);
            }
        }
        worst
    }
}

/// `H(s)` restricted to a sector, as a symmetric map on sector coordinates.
struct RestrictedMap<'a> {
    op: &'a dyn InterpolatedOperator,
    s: f64,
    sector: &'a Sector,
}

impl SymmetricMap for RestrictedMap<'_> {
    fn dim(&self) -> usize {
        self.sector.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        if self.sector.orbit_of.is_none() {
            self.op.apply(self.s, x, y);
            return;
        }
        let mut full = vec![0.0; self.sector.full_dim];
        let mut out = vec![0.0; self.sector.full_dim];
        self.sector.embed(x, &mut full);
        self.op.apply(self.s, &full, &mut out);
        self.sector.restrict(&out, y);
    }

    fn to_dense(&self) -> DMatrix<f64> {
        if self.sector.orbit_of.is_none() {
            if let Some(m) = self.op.dense_at(self.s) {
                return m;
            }
        }
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        let mut e = vec![0.0; dim];
        let mut col = vec![0.0; dim];
        for j in 0..dim {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            m.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        (&m + m.transpose()) * 0.5
    }
}

/// A sector prepared for repeated use on one operator.
pub struct PreparedSector {
    sector: Sector,
}

impl PreparedSector {
    pub fn new(op: &dyn InterpolatedOperator, projector: &SectorProjector) -> Result<Self> {
        let sector = match (projector, op.qubits()) {
            (SectorProjector::Full, _) => Sector::full(op.dim()),
            (_, Some(n)) => projector.build(n)?,
            (_, None) => {
                return Err(Error::InvalidArgument(format!(
                    "sector {projector} needs an operator on the qubit basis"
                )))
            }
        };
        let defect = sector.commutator_defect(op);
        let (b, p) = op.norm_bounds();
        if defect > 1e-9 * (1.0 + b + p) {
            return Err(Error::InvalidArgument(format!(
                "sector {projector} does not commute with the operator (defect {defect:.3e})"
            )));
        }
        Ok(PreparedSector { sector })
    }

    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    pub fn eigenpairs(
        &self,
        op: &dyn InterpolatedOperator,
        s: f64,
        k: usize,
        opts: &EigenOptions,
    ) -> Result<Vec<Eigenpair>> {
        let map = RestrictedMap {
            op,
            s,
            sector: &self.sector,
        };
        let mut pairs = eigen::lowest_eigenpairs(&map, k, opts)?;
        if self.sector.orbit_of.is_some() {
            for p in &mut pairs {
                let mut full = vec![0.0; self.sector.full_dim];
                self.sector.embed(&p.vector, &mut full);
                p.vector = full;
            }
        }
        Ok(pairs)
    }

    pub fn eigenvalues(
        &self,
        op: &dyn InterpolatedOperator,
        s: f64,
        k: usize,
        opts: &EigenOptions,
    ) -> Result<Vec<f64>> {
        let map = RestrictedMap {
            op,
            s,
            sector: &self.sector,
        };
        eigen::lowest_eigenvalues(&map, k, opts)
    }
}

/// The `k` lowest eigenpairs of `H(s)` within `sector`, ascending; vectors
/// are returned in the full space.
pub fn lowest_eigenpairs(
    op: &dyn InterpolatedOperator,
    s: f64,
    k: usize,
    sector: &SectorProjector,
) -> Result<Vec<Eigenpair>> {
    PreparedSector::new(op, sector)?.eigenpairs(op, s, k, &EigenOptions::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumScan {
    pub s_grid: Vec<f64>,
    /// `levels[i]` holds the `k` lowest eigenvalues at `s_grid[i]`, ascending.
    pub levels: Vec<Vec<f64>>,
    pub k: usize,
}

/// Formats with 15 significant digits.
pub fn format_sig15(v: f64) -> String {
    format!("{v:.14e}")
}

impl SpectrumScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s");
        for l in 0..self.k {
            out.push_str(&format!(",E{l}"));
        }
        out.push('\n');
        for (s, row) in self.s_grid.iter().zip(&self.levels) {
            out.push_str(&format_sig15(*s));
            for e in row {
                out.push(',');
                out.push_str(&format_sig15(*e));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Syntax {
            line: 1,
            message: "empty CSV".into(),
        })?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.first() != Some(&"s") {
            return Err(Error::Syntax {
                line: 1,
                message: "header must start with `s`".into(),
            });
        }
        let k = cols.len() - 1;
        let mut scan = SpectrumScan {
            s_grid: Vec::new(),
            levels: Vec::new(),
            k,
        };
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let values = line
                .split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|_| Error::Syntax {
                        line: idx + 1,
                        message: format!("not a number: {t:?}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != k + 1 {
                return Err(Error::Syntax {
                    line: idx + 1,
                    message: format!("expected {} fields", k + 1),
                });
            }
            scan.s_grid.push(values[0]);
            scan.levels.push(values[1..].to_vec());
        }
        Ok(scan)
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l[1] - l[0]).collect()
    }
}

/// Uniform grid on `[0, 1]` with both endpoints.
pub fn unit_grid(points: usize) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points).map(|i| i as f64 / last).collect()
}

pub fn scan_spectrum(
    op: &dyn InterpolatedOperator,
    k: usize,
    grid_points: usize,
    sector: &SectorProjector,
) -> Result<SpectrumScan> {
    if grid_points < 2 {
        return Err(Error::InvalidArgument("a scan needs at least 2 grid points".into()));
    }
    let prepared = PreparedSector::new(op, sector)?;
    let opts = EigenOptions::default();
    let s_grid = unit_grid(grid_points);
    let levels = crate::par::map_slice(&s_grid, |&s| prepared.eigenvalues(op, s, k, &opts))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumScan { s_grid, levels, k })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub g_min: f64,
    pub s_star: f64,
    pub refinement_tolerance: f64,
    pub sector: String,
    /// `E_1 - E_0` at `s = 1`.
    pub endpoint_gap: f64,
    /// Set when the two lowest levels are degenerate at `s = 1`; `g_min` is
    /// then the smallest interior local minimum.
    pub degenerate_endpoint: bool,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapOptions {
    pub coarse_points: usize,
    pub refine_tol: f64,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions {
            coarse_points: 200,
            refine_tol: 1e-8,
        }
    }
}

const DEGENERACY_TOL: f64 = 1e-12;

/// Golden-section minimization of `f` on `[a, b]` down to a bracket of `tol`.
/// Returns `(f_min, argmin)` over every point evaluated.
pub fn golden_section(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut best = if fc < fd { (fc, c) } else { (fd, d) };
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
            if fc < best.0 {
                best = (fc, c);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
            if fd < best.0 {
                best = (fd, d);
            }
        }
        // stop once the bracket no longer shrinks in floating point
        if c <= a || d >= b || c >= d {
            break;
        }
    }
    Ok(best)
}

/// Coarse scan of `E_1 - E_0` followed by golden-section refinement around
/// the coarse minimum.
pub fn find_min_gap(
    op: &dyn InterpolatedOperator,
    sector: &SectorProjector,
    options: GapOptions,
) -> Result<GapReport> {
    if options.coarse_points < 16 {
        return Err(Error::InvalidArgument(
            "minimum-gap search needs at least 16 coarse points".into(),
        ));
    }
    if options.refine_tol <= 0.0 {
        return Err(Error::InvalidArgument("refinement tolerance must be positive".into()));
    }
    let prepared = PreparedSector::new(op, sector)?;
    let opts = EigenOptions::default();
    let gap_at = |s: f64| -> Result<f64> {
        let e = prepared.eigenvalues(op, s, 2, &opts)?;
        Ok(e[1] - e[0])
    };
    let grid = unit_grid(options.coarse_points);
    let gaps = crate::par::map_slice(&grid, |&s| gap_at(s))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let last = gaps.len() - 1;
    let endpoint_gap = gaps[last];
    let degenerate_endpoint = endpoint_gap < DEGENERACY_TOL;

    let candidate = if degenerate_endpoint {
        (1..last)
            .filter(|&i| gaps[i] <= gaps[i - 1] && gaps[i] <= gaps[i + 1])
            .min_by(|&a, &b| gaps[a].total_cmp(&gaps[b]))
    } else {
        (0..=last).min_by(|&a, &b| gaps[a].total_cmp(&gaps[b]))
    };

    let mut warning = degenerate_endpoint.then(|| {
        format!(
            "ground level is degenerate at s = 1 in sector {}; reporting the interior minimum",
            prepared.sector().description()
        )
    });

    let (g_min, s_star) = match candidate {
        None => {
            warning = Some(format!(
                "ground level is degenerate at s = 1 in sector {} and E1 - E0 has no interior minimum",
                prepared.sector().description()
            ));
            (endpoint_gap, 1.0)
        }
        Some(i) => {
            let lo = grid[i.saturating_sub(1)];
            let hi = grid[(i + 1).min(last)];
            let (g, s) = golden_section(gap_at, lo, hi, options.refine_tol)?;
            if g < gaps[i] {
                (g, s)
            } else {
                (gaps[i], grid[i])
            }
        }
    };

    Ok(GapReport {
        g_min: g_min.max(0.0),
        s_star,
        refinement_tolerance: options.refine_tol,
        sector: prepared.sector().description().to_string(),
        endpoint_gap,
        degenerate_endpoint,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticEstimate {
    /// `max_s |⟨E_1(s)| (H_P - H_B) |E_0(s)⟩|` over the grid.
    pub matrix_element: f64,
    pub g_min: f64,
    /// `matrix_element / g_min²`; the evolution time should be much larger.
    pub time_scale: f64,
    /// `‖H_P - H_B‖`, which bounds `matrix_element`.
    pub crude_bound: f64,
}

struct DerivativeMap<'a> {
    op: &'a dyn InterpolatedOperator,
    sign: f64,
}

impl SymmetricMap for DerivativeMap<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut b = vec![0.0; x.len()];
        self.op.apply_problem(x, y);
        self.op.apply_initial(x, &mut b);
        for (yi, bi) in y.iter_mut().zip(&b) {
            *yi = self.sign * (*yi - bi);
        }
    }
}

pub fn adiabatic_time_estimate(
    op: &dyn InterpolatedOperator,
    report: &GapReport,
    sector: &SectorProjector,
    grid_points: usize,
) -> Result<AdiabaticEstimate> {
    if report.g_min <= 0.0 {
        return Err(Error::ZeroGap);
    }
    let prepared = PreparedSector::new(op, sector)?;
    let opts = EigenOptions::default();
    let grid = unit_grid(grid_points.max(2));
    let dim = op.dim();
    let elements = crate::par::map_slice(&grid, |&s| -> Result<f64> {
        let pairs = prepared.eigenpairs(op, s, 2, &opts)?;
        let mut d = vec![0.0; dim];
        let mut b = vec![0.0; dim];
        op.apply_problem(&pairs[0].vector, &mut d);
        op.apply_initial(&pairs[0].vector, &mut b);
        let element: f64 = pairs[1]
            .vector
            .iter()
            .zip(d.iter().zip(&b))
            .map(|(v, (p, q))| v * (p - q))
            .sum();
        Ok(element.abs())
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let matrix_element = elements.into_iter().fold(0.0, f64::max);

    let top = eigen::lowest_eigenvalues(&DerivativeMap { op, sign: -1.0 }, 1, &opts)?[0];
    let bottom = eigen::lowest_eigenvalues(&DerivativeMap { op, sign: 1.0 }, 1, &opts)?[0];
    let crude_bound = top.abs().max(bottom.abs());

    Ok(AdiabaticEstimate {
        matrix_element,
        g_min: report.g_min,
        time_scale: matrix_element / (report.g_min * report.g_min),
        crude_bound,
    })
}
