//! Exact low-lying spectrum of the agree ring from its decomposition into
//! commuting 2×2 momentum blocks.
//!
//! After a Jordan–Wigner transformation the `G = +1` sector of the ring
//! Hamiltonian is quadratic in fermions with antiperiodic boundary
//! `b_{n+1} = -b_1`, so momenta run over odd `p`. Each pair of modes `±p`
//! contributes one block `A_p(s)` acting on `{|Ω_p⟩, |Σ_p⟩}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{format_sig15, golden_section, unit_grid};

fn check_ring(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "the momentum decomposition needs an even ring size, got {n}"
        )));
    }
    Ok(())
}

fn check_block(n: usize, p: usize, s: f64) -> Result<()> {
    check_ring(n)?;
    if p.is_multiple_of(2) || p >= n {
        return Err(Error::InvalidArgument(format!(
            "momentum {p} is not an odd integer in 1..{n}"
        )));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("s = {s} outside [0, 1]")));
    }
    Ok(())
}

/// The 2×2 block `A_p(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumBlock {
    pub p: usize,
    pub matrix: [[Complex64; 2]; 2],
}

impl MomentumBlock {
    pub fn new(n: usize, p: usize, s: f64) -> Result<Self> {
        check_block(n, p, s)?;
        let (sin, cos) = (PI * p as f64 / n as f64).sin_cos();
        let i = Complex64::i();
        Ok(MomentumBlock {
            p,
            matrix: [
                [Complex64::from(s + s * cos), i * (s * sin)],
                [-i * (s * sin), Complex64::from(4.0 - 3.0 * s - s * cos)],
            ],
        })
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = &self.matrix;
        m[0][0].im.abs() <= tol
            && m[1][1].im.abs() <= tol
            && (m[0][1] - m[1][0].conj()).norm() <= tol
    }

    /// Eigenvalues from the characteristic polynomial, ascending.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = &self.matrix;
        let a = m[0][0].re;
        let d = m[1][1].re;
        let off = m[0][1].norm();
        let mean = 0.5 * (a + d);
        let half = (0.25 * (a - d) * (a - d) + off * off).sqrt();
        (mean - half, mean + half)
    }
}

/// `(E_p^-(s), E_p^+(s))` in closed form.
pub fn block_eigenvalues(n: usize, p: usize, s: f64) -> Result<(f64, f64)> {
    check_block(n, p, s)?;
    Ok(block_pair(n, p, s))
}

fn block_pair(n: usize, p: usize, s: f64) -> (f64, f64) {
    let cos = (PI * p as f64 / n as f64).cos();
    let root = ((2.0 - 3.0 * s).powi(2) + 4.0 * s * (1.0 - s) * (1.0 - cos)).sqrt();
    (2.0 - s - root, 2.0 - s + root)
}

/// Closed-form levels of the `n`-bit agree ring in the `G = +1` sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSpectrum {
    n: usize,
}

impl RingSpectrum {
    pub fn new(n: usize) -> Result<Self> {
        check_ring(n)?;
        Ok(RingSpectrum { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn momenta(&self) -> impl Iterator<Item = usize> {
        (1..self.n).step_by(2)
    }

    /// `Σ_p E_p^-(s)`.
    pub fn ground_energy(&self, s: f64) -> f64 {
        self.momenta().map(|p| block_pair(self.n, p, s).0).sum()
    }

    /// `E_1^+(s) + Σ_{p≥3} E_p^-(s)`.
    pub fn first_excited(&self, s: f64) -> f64 {
        self.ground_energy(s) + self.gap(s)
    }

    /// `E_1^+(s) - E_1^-(s)`.
    pub fn gap(&self, s: f64) -> f64 {
        let (lo, hi) = block_pair(self.n, 1, s);
        hi - lo
    }

    /// The momentum whose promotion to the upper block level costs least
    /// at `s`.
    pub fn cheapest_promotion(&self, s: f64) -> usize {
        self.momenta()
            .map(|p| {
                let (lo, hi) = block_pair(self.n, p, s);
                (p, hi - lo)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(p, _)| p)
            .unwrap_or(1)
    }
}

/// `(ground_energy, first_excited_energy)` of the `n`-bit ring at `s`.
pub fn ring_levels(n: usize, s: f64) -> Result<(f64, f64)> {
    let spectrum = RingSpectrum::new(n)?;
    Ok((spectrum.ground_energy(s), spectrum.first_excited(s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingGap {
    pub n: usize,
    pub g_min: f64,
    pub s_star: f64,
}

/// Minimum of `E_1^+ - E_1^-` over `s`, refined by golden section to a
/// bracket of `resolution`.
pub fn ring_gap(n: usize, resolution: f64) -> Result<RingGap> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("ring size {n} is below 4")));
    }
    if resolution <= 0.0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let spectrum = RingSpectrum::new(n)?;
    // the minimum sits close to 2/3; the coarse pass only locates the bracket
    let grid = unit_grid(129);
    let best = (0..grid.len())
        .min_by(|&a, &b| spectrum.gap(grid[a]).total_cmp(&spectrum.gap(grid[b])))
        .unwrap_or(86);
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (g_min, s_star) = golden_section(|s| Ok(spectrum.gap(s)), lo, hi, resolution)?;
    Ok(RingGap { n, g_min, s_star })
}

pub fn ring_gaps_csv(rows: &[RingGap]) -> String {
    let mut out = String::from("n,g_min,s_star\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.n,
            format_sig15(r.g_min),
            format_sig15(r.s_star)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn block_endpoints() {
        for p in [1, 3, 5, 7] {
            let (lo, hi) = block_eigenvalues(8, p, 0.0).unwrap();
            assert!((lo - 0.0).abs() < 1e-15 && (hi - 4.0).abs() < 1e-15);
            let (lo, hi) = block_eigenvalues(8, p, 1.0).unwrap();
            assert!((lo - 0.0).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn parity_is_checked() {
        assert!(block_eigenvalues(8, 2, 0.5).is_err());
        assert!(block_eigenvalues(8, 9, 0.5).is_err());
        assert!(block_eigenvalues(7, 1, 0.5).is_err());
        assert!(block_eigenvalues(8, 1, 1.5).is_err());
        assert!(RingSpectrum::new(5).is_err());
        assert!(ring_gap(2, 1e-9).is_err());
    }

    #[test]
    fn block_matrix_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let n = 2 * rng.random_range(2..40usize);
            let p = 2 * rng.random_range(0..n / 2) + 1;
            let s: f64 = rng.random();
            let block = MomentumBlock::new(n, p, s).unwrap();
            assert!(block.is_hermitian(1e-15));
            let (a, b) = block.eigenvalues();
            let (lo, hi) = block_eigenvalues(n, p, s).unwrap();
            assert!((a - lo).abs() < 1e-14 && (b - hi).abs() < 1e-14);
        }
    }

    #[test]
    fn levels_at_endpoints() {
        for n in [4, 8, 20] {
            let (g, e) = ring_levels(n, 0.0).unwrap();
            assert!(g.abs() < 1e-14 && (e - 4.0).abs() < 1e-14);
            let (g, e) = ring_levels(n, 1.0).unwrap();
            assert!(g.abs() < 1e-14 && (e - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn p1_promotion_is_cheapest() {
        let spectrum = RingSpectrum::new(12).unwrap();
        for s in unit_grid(101) {
            assert_eq!(spectrum.cheapest_promotion(s), 1);
            assert!(spectrum.gap(s) > 0.0);
        }
    }

    #[test]
    fn gap_location_and_scaling() {
        let g100 = ring_gap(100, 1e-12).unwrap();
        let target = 4.0 * PI / 300.0;
        assert!((g100.g_min - target).abs() / target < 0.02, "{g100:?}");
        assert!((g100.s_star - 2.0 / 3.0).abs() < 0.02);
        let g200 = ring_gap(200, 1e-12).unwrap();
        let g400 = ring_gap(400, 1e-12).unwrap();
        assert!((g400.g_min / g200.g_min - 0.5).abs() < 0.025);
    }

    #[test]
    fn csv_layout() {
        let csv = ring_gaps_csv(&[ring_gap(8, 1e-10).unwrap()]);
        assert!(csv.starts_with("n,g_min,s_star\n8,"));
    }

    fn kron_all(factors: &[DMatrix<f64>]) -> DMatrix<f64> {
        factors
            .iter()
            .skip(1)
            .fold(factors[0].clone(), |acc, f| acc.kronecker(f))
    }

    /// `b_j` as a `2^n` matrix; bit 1 is the most significant tensor factor.
    fn fermion(n: usize, j: usize) -> DMatrix<f64> {
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let minus = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, 0.5, -0.5]);
        let id = DMatrix::identity(2, 2);
        let factors: Vec<DMatrix<f64>> = (1..=n)
            .map(|k| match k.cmp(&j) {
                std::cmp::Ordering::Less => x.clone(),
                std::cmp::Ordering::Equal => minus.clone(),
                std::cmp::Ordering::Greater => id.clone(),
            })
            .collect();
        kron_all(&factors)
    }

    fn single(n: usize, j: usize, m: &DMatrix<f64>) -> DMatrix<f64> {
        let id = DMatrix::identity(2, 2);
        let factors: Vec<DMatrix<f64>> = (1..=n)
            .map(|k| if k == j { m.clone() } else { id.clone() })
            .collect();
        kron_all(&factors)
    }

    #[test]
    fn jordan_wigner_identities() {
        let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        for n in [2usize, 4, 6] {
            let dim = 1 << n;
            let id = DMatrix::<f64>::identity(dim, dim);
            let b: Vec<DMatrix<f64>> = (1..=n).map(|j| fermion(n, j)).collect();
            for j in 0..n {
                for k in 0..n {
                    let bk_dag = b[k].transpose();
                    let anti = &b[j] * &b[k] + &b[k] * &b[j];
                    assert!(anti.amax() < 1e-14);
                    let anti_dag = &b[j] * &bk_dag + &bk_dag * &b[j];
                    let expected = if j == k { id.clone() } else { id.clone() * 0.0 };
                    assert!((anti_dag - expected).amax() < 1e-14);
                }
                let number = b[j].transpose() * &b[j];
                let expected = (&id - single(n, j + 1, &x)) * 0.5;
                assert!((number - expected).amax() < 1e-14);
            }
            let g = (1..=n).fold(id.clone(), |acc, k| acc * single(n, k, &x));
            for j in 0..n {
                let next = (j + 1) % n;
                let lhs = (b[j].transpose() - &b[j]) * (b[next].transpose() + &b[next]);
                let zz = single(n, j + 1, &z) * single(n, next + 1, &z);
                let rhs = if next == 0 { -(&g * zz) } else { zz };
                assert!((lhs - rhs).amax() < 1e-14);
            }
        }
    }

    #[test]
    fn fermion_form_reproduces_the_ring_in_the_even_sector() {
        use crate::hamiltonian::{DimensionCap, InitialMode, OperatorPair};
        use crate::instance::families;
        use crate::operator::to_dense;

        let n = 6;
        let dim = 1 << n;
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let id = DMatrix::<f64>::identity(dim, dim);
        let g = (1..=n).fold(id.clone(), |acc, k| acc * single(n, k, &x));
        let even = (&id + &g) * 0.5;
        let b: Vec<DMatrix<f64>> = (1..=n).map(|j| fermion(n, j)).collect();
        let op = OperatorPair::from_instance(
            &families::agree_ring(n).unwrap(),
            InitialMode::ClauseWeighted,
            DimensionCap::default(),
        )
        .unwrap();
        for s in [0.1, 0.5, 0.9] {
            let mut h = DMatrix::<f64>::zeros(dim, dim);
            for j in 0..n {
                // b_{n+1} = -b_1
                let next = if j + 1 == n { -&b[0] } else { b[j + 1].clone() };
                h += b[j].transpose() * &b[j] * (2.0 * (1.0 - s));
                h += (&id - (b[j].transpose() - &b[j]) * (next.transpose() + &next)) * (s / 2.0);
            }
            let direct = to_dense(&op, s);
            let diff = &even * (h - direct) * &even;
            assert!(diff.amax() < 1e-12);
        }
    }
}
