//! Lowest eigenpairs of real-symmetric operators.
//!
//! Small operators are materialized and diagonalized densely. Larger ones go
//! through Lanczos with full reorthogonalization, one eigenpair at a time:
//! each converged vector is locked and later runs are kept orthogonal to it,
//! so degenerate levels come out with their full multiplicity.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub trait SymmetricMap {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn to_dense(&self) -> DMatrix<f64> {
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
        // symmetrize away rounding asymmetry
        (&m + m.transpose()) * 0.5
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Operators up to this dimension are diagonalized densely.
    pub dense_threshold: usize,
    /// Convergence target on `‖Av - θv‖ / max(1, |θ|)`.
    pub tolerance: f64,
    /// Residual above which a result is reported as a failure.
    pub acceptance: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            dense_threshold: 400,
            tolerance: 1e-11,
            acceptance: 1e-9,
            max_restarts: 60,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn residual_of(map: &dyn SymmetricMap, value: f64, v: &[f64]) -> f64 {
    let mut av = vec![0.0; v.len()];
    map.apply(v, &mut av);
    axpy(-value, v, &mut av);
    dot(&av, &av).sqrt()
}

fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// The `k` lowest eigenvalues, ascending.
pub fn lowest_eigenvalues(map: &dyn SymmetricMap, k: usize, opts: &EigenOptions) -> Result<Vec<f64>> {
    check_k(map, k)?;
    if map.dim() <= opts.dense_threshold {
        let mut values: Vec<f64> = map.to_dense().symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values.truncate(k);
        return Ok(values);
    }
    Ok(lowest_eigenpairs(map, k, opts)?
        .into_iter()
        .map(|p| p.value)
        .collect())
}

fn check_k(map: &dyn SymmetricMap, k: usize) -> Result<()> {
    if k == 0 || k > map.dim() {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs of a {}-dimensional operator",
            map.dim()
        )));
    }
    Ok(())
}

/// The `k` lowest eigenpairs, ascending, with orthonormal vectors.
pub fn lowest_eigenpairs(map: &dyn SymmetricMap, k: usize, opts: &EigenOptions) -> Result<Vec<Eigenpair>> {
    check_k(map, k)?;
    let dim = map.dim();
    let mut pairs = if dim <= opts.dense_threshold {
        let (values, vectors) = sorted_eigen(map.to_dense());
        (0..k)
            .map(|i| Eigenpair {
                value: values[i],
                vector: vectors.column(i).iter().copied().collect(),
                residual: 0.0,
            })
            .collect::<Vec<_>>()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut locked: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut pairs = Vec::with_capacity(k);
        for _ in 0..k {
            let pair = lanczos_lowest(map, &locked, &mut rng, opts)?;
            locked.push(pair.vector.clone());
            pairs.push(pair);
        }
        pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
        pairs
    };
    for p in &mut pairs {
        p.residual = residual_of(map, p.value, &p.vector);
    }
    let bad: Vec<f64> = pairs
        .iter()
        .filter(|p| p.residual > opts.acceptance * p.value.abs().max(1.0))
        .map(|p| p.residual)
        .collect();
    if !bad.is_empty() {
        return Err(Error::NoConvergence {
            iterations: opts.max_restarts,
            residuals: bad,
        });
    }
    Ok(pairs)
}

fn orthogonalize(w: &mut [f64], against: &[Vec<f64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for q in against {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

fn max_basis(dim: usize, locked: usize) -> usize {
    let by_memory = (1usize << 25) / dim.max(1);
    by_memory.clamp(40, 400).min(dim - locked)
}

/// Lowest eigenpair of `map` restricted to the orthogonal complement of
/// `locked`.
fn lanczos_lowest(
    map: &dyn SymmetricMap,
    locked: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
    opts: &EigenOptions,
) -> Result<Eigenpair> {
    let dim = map.dim();
    let m = max_basis(dim, locked.len());

    let mut start: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    orthogonalize(&mut start, locked);
    normalize(&mut start);

    let mut last_residual = f64::INFINITY;
    for _restart in 0..opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut w = vec![0.0; dim];

        loop {
            let j = basis.len() - 1;
            map.apply(&basis[j], &mut w);
            let a = dot(&basis[j], &w);
            alpha.push(a);
            axpy(-a, &basis[j], &mut w);
            if j > 0 {
                axpy(-beta[j - 1], &basis[j - 1], &mut w);
            }
            orthogonalize(&mut w, locked);
            orthogonalize(&mut w, &basis);
            let b = dot(&w, &w).sqrt();

            let size = alpha.len();
            let exhausted = b < 1e-13 * a.abs().max(1.0) || size >= m;
            if size.is_multiple_of(8) || exhausted {
                let t = DMatrix::from_fn(size, size, |r, c| {
                    if r == c {
                        alpha[r]
                    } else if r + 1 == c {
                        beta[r]
                    } else if c + 1 == r {
                        beta[c]
                    } else {
                        0.0
                    }
                });
                let (values, vectors) = sorted_eigen(t);
                let theta = values[0];
                let y = vectors.column(0);
                let estimate = b * y[size - 1].abs();
                let converged = estimate <= opts.tolerance * theta.abs().max(1.0);
                if converged || exhausted {
                    let mut v = vec![0.0; dim];
                    for (q, &c) in basis.iter().zip(y.iter()) {
                        axpy(c, q, &mut v);
                    }
                    orthogonalize(&mut v, locked);
                    normalize(&mut v);
                    let mut av = vec![0.0; dim];
                    map.apply(&v, &mut av);
                    let value = dot(&v, &av);
                    axpy(-value, &v, &mut av);
                    let residual = dot(&av, &av).sqrt();
                    if residual <= opts.tolerance * value.abs().max(1.0) {
                        return Ok(Eigenpair {
                            value,
                            vector: v,
                            residual,
                        });
                    }
                    last_residual = residual;
                    start = v;
                    break;
                }
            }
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(std::mem::replace(&mut w, vec![0.0; dim]));
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_restarts * m,
        residuals: vec![last_residual],
    })
}

/// A dense matrix viewed as a [`SymmetricMap`].
pub struct DenseMap<'a>(pub &'a DMatrix<f64>);

impl SymmetricMap for DenseMap<'_> {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let xv = nalgebra::DVectorView::from_slice(x, x.len());
        let out = self.0 * xv;
        y.copy_from_slice(out.as_slice());
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.0.clone()
    }
}
