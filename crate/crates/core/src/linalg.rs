//! Sparse and dense linear algebra on discrete instances.

use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use crate::discretize::DiscreteInstance;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sparse Cholesky factor of `a·M + b·E`.
pub struct SpdSolver<T: Real> {
    chol: CscCholesky<T>,
    n: usize,
}

impl<T: Real> SpdSolver<T> {
    pub fn mass_energy(inst: &DiscreteInstance<T>, a: T, b: T) -> Result<Self> {
        Self::decoupled(inst, a, b, &[])
    }

    /// Like [`Self::mass_energy`] with every off-diagonal entry touching a
    /// flagged node removed, so flagged nodes are solved by their diagonal
    /// alone and the rest by the principal submatrix.
    pub fn decoupled(inst: &DiscreteInstance<T>, a: T, b: T, flagged: &[bool]) -> Result<Self> {
        let n = inst.len();
        let off = |i: usize| flagged.get(i).copied().unwrap_or(false);
        let mut coo = CooMatrix::new(n, n);
        for (i, &w) in inst.m.iter().enumerate() {
            coo.push(i, i, a * w);
        }
        for e in &inst.edges {
            let c = b * e.c;
            coo.push(e.i, e.i, c);
            coo.push(e.j, e.j, c);
            if !off(e.i) && !off(e.j) {
                coo.push(e.i, e.j, -c);
                coo.push(e.j, e.i, -c);
            }
        }
        let csc = CscMatrix::from(&coo);
        let chol = CscCholesky::factor(&csc).map_err(|e| Error::NonConvergent(format!("cholesky: {e}")))?;
        Ok(Self { chol, n })
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut b = DMatrix::from_column_slice(self.n, 1, rhs);
        self.chol.solve_mut(&mut b);
        b.as_slice().to_vec()
    }
}

/// `M^{-1/2} E M^{-1/2}`.
pub fn symmetrized<T: Real>(inst: &DiscreteInstance<T>) -> DMatrix<T> {
    let s: Vec<T> = inst.m.iter().map(|w| T::one() / w.sqrt()).collect();
    let mut e = inst.dense_e();
    for i in 0..e.nrows() {
        for j in 0..e.ncols() {
            e[(i, j)] *= s[i] * s[j];
        }
    }
    e
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn axpy<T: Real>(f: &[T], eta: T, d: &[T]) -> Vec<T> {
    f.iter().zip(d).map(|(&x, &y)| x + eta * y).collect()
}
