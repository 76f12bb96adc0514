//! The interpolating operator `H(s) = (1 - s)·B + s·P` as an abstract
//! real-symmetric linear map.
//!
//! Everything that diagonalizes or integrates goes through
//! [`InterpolatedOperator`], so the same eigensolver and integrator serve the
//! structured `2^n` operators, the symmetry-reduced dense matrices, and the
//! hand-written two-level examples.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub trait InterpolatedOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = B x`.
    fn apply_initial(&self, x: &[f64], y: &mut [f64]);

    /// `y = P x`.
    fn apply_problem(&self, x: &[f64], y: &mut [f64]);

    /// Upper bounds on the operator norms of `B` and `P`.
    fn norm_bounds(&self) -> (f64, f64);

    /// `y = ((1 - s) B + s P) x`.
    fn apply(&self, s: f64, x: &[f64], y: &mut [f64]) {
        let mut tmp = vec![0.0; self.dim()];
        self.apply_initial(x, y);
        self.apply_problem(x, &mut tmp);
        for (yi, ti) in y.iter_mut().zip(&tmp) {
            *yi = (1.0 - s) * *yi + s * ti;
        }
    }

    /// Complex version of [`apply`](Self::apply). The operator is real, so
    /// the default splits into real and imaginary parts.
    fn apply_complex(&self, s: f64, x: &[Complex64], y: &mut [Complex64]) {
        let dim = self.dim();
        let re: Vec<f64> = x.iter().map(|c| c.re).collect();
        let im: Vec<f64> = x.iter().map(|c| c.im).collect();
        let mut out_re = vec![0.0; dim];
        let mut out_im = vec![0.0; dim];
        self.apply(s, &re, &mut out_re);
        self.apply(s, &im, &mut out_im);
        for (k, yk) in y.iter_mut().enumerate() {
            *yk = Complex64::new(out_re[k], out_im[k]);
        }
    }

    /// `Some(n)` when the operator acts on the `2^n` computational basis of
    /// `n` qubits, which is what symmetry sectors are defined over.
    fn qubits(&self) -> Option<usize> {
        None
    }

    /// `H(s)` as a dense matrix when the operator is stored that way.
    fn dense_at(&self, _s: f64) -> Option<DMatrix<f64>> {
        None
    }
}

/// Materializes `H(s)` as a dense matrix. Only meant for small dimensions.
pub fn to_dense(op: &dyn InterpolatedOperator, s: f64) -> DMatrix<f64> {
    let dim = op.dim();
    let mut m = DMatrix::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    let mut col = vec![0.0; dim];
    for j in 0..dim {
        e[j] = 1.0;
        op.apply(s, &e, &mut col);
        m.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    m
}

/// Dense interpolation between two real-symmetric matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct DensePair {
    pub initial: DMatrix<f64>,
    pub problem: DMatrix<f64>,
}

impl DensePair {
    pub fn new(initial: DMatrix<f64>, problem: DMatrix<f64>) -> Self {
        assert!(initial.is_square() && initial.shape() == problem.shape());
        DensePair { initial, problem }
    }

    pub fn at(&self, s: f64) -> DMatrix<f64> {
        &self.initial * (1.0 - s) + &self.problem * s
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let sym = |m: &DMatrix<f64>| (m - m.transpose()).amax() <= tol;
        sym(&self.initial) && sym(&self.problem)
    }

    /// Conjugates both parts by the orthonormal columns of `basis`:
    /// returns `Qᵀ B Q`, `Qᵀ P Q`.
    pub fn restrict(&self, basis: &DMatrix<f64>) -> DensePair {
        DensePair {
            initial: basis.transpose() * &self.initial * basis,
            problem: basis.transpose() * &self.problem * basis,
        }
    }

    /// The one-qubit pair `H_B = ½ - ½σ_x`, `H_P = ½ + ½σ_z`.
    pub fn one_qubit() -> Self {
        DensePair::new(
            DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        )
    }

    /// One qubit with the beginning Hamiltonian `½ - ½σ_z`, diagonal in the
    /// same basis as the problem: the two levels `s` and `1 - s` cross.
    pub fn one_qubit_diagonal() -> Self {
        DensePair::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        )
    }

    /// `[[s, ε(1-s)], [ε(1-s), 1-s]]`: the crossing above with a small
    /// off-diagonal perturbation, giving a minimum gap `ε/√(1+ε²)`.
    pub fn avoided_crossing(epsilon: f64) -> Self {
        DensePair::new(
            DMatrix::from_row_slice(2, 2, &[0.0, epsilon, epsilon, 1.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        )
    }
}

fn dense_apply(m: &DMatrix<f64>, x: &[f64], y: &mut [f64]) {
    let n = m.nrows();
    for (i, yi) in y.iter_mut().enumerate().take(n) {
        let mut acc = 0.0;
        for (j, xj) in x.iter().enumerate() {
            acc += m[(i, j)] * xj;
        }
        *yi = acc;
    }
}

/// Max absolute row sum; bounds the spectral norm of a symmetric matrix.
fn row_sum_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl InterpolatedOperator for DensePair {
    fn dim(&self) -> usize {
        self.initial.nrows()
    }

    fn apply_initial(&self, x: &[f64], y: &mut [f64]) {
        dense_apply(&self.initial, x, y);
    }

    fn apply_problem(&self, x: &[f64], y: &mut [f64]) {
        dense_apply(&self.problem, x, y);
    }

    fn norm_bounds(&self) -> (f64, f64) {
        (row_sum_norm(&self.initial), row_sum_norm(&self.problem))
    }

    fn apply(&self, s: f64, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for (i, yi) in y.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate() {
                acc += ((1.0 - s) * self.initial[(i, j)] + s * self.problem[(i, j)]) * xj;
            }
            *yi = acc;
        }
    }

    fn apply_complex(&self, s: f64, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.dim();
        for (i, yi) in y.iter_mut().enumerate().take(n) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, xj) in x.iter().enumerate() {
                acc += xj * ((1.0 - s) * self.initial[(i, j)] + s * self.problem[(i, j)]);
            }
            *yi = acc;
        }
    }

    fn dense_at(&self, s: f64) -> Option<DMatrix<f64>> {
        Some(self.at(s))
    }
}
