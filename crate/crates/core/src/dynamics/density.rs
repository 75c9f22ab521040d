use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::real::{cabs, cre, Cx, Real};

/// Density matrix on a labelled truncated basis.
#[derive(Debug, Clone)]
pub struct DensityOperator<T: Real> {
    pub matrix: DMatrix<Cx<T>>,
    pub basis: Arc<Basis>,
}

/// Tolerances for state validity, floored at what the scalar type resolves.
pub(crate) fn hermiticity_tol<T: Real>() -> T {
    T::lit(1e-12).max(T::eps() * T::lit(64.0))
}
pub(crate) fn trace_tol<T: Real>() -> T {
    T::lit(1e-9).max(T::eps() * T::lit(256.0))
}
pub(crate) fn positivity_tol<T: Real>() -> T {
    T::lit(1e-8).max(T::eps() * T::lit(256.0))
}

impl<T: Real> DensityOperator<T> {
    /// `|i⟩⟨i|` for basis index `i`.
    pub fn basis_state(basis: Arc<Basis>, i: usize) -> Self {
        let n = basis.len();
        let mut m = DMatrix::from_element(n, n, cre(T::zero()));
        m[(i, i)] = cre(T::one());
        Self { matrix: m, basis }
    }

    pub fn from_matrix(basis: Arc<Basis>, matrix: DMatrix<Cx<T>>) -> Result<Self> {
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix on a {}-state basis",
                matrix.nrows(),
                matrix.ncols(),
                basis.len()
            )));
        }
        let rho = Self { matrix, basis };
        rho.validate()?;
        Ok(rho)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Cx<T> {
        self.matrix.trace()
    }

    pub fn population(&self, i: usize) -> T {
        self.matrix[(i, i)].re
    }

    pub fn purity(&self) -> T {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn hermiticity_error(&self) -> T {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().fold(T::zero(), |m, z| m.max(cabs(*z)))
    }

    pub fn min_eigenvalue(&self) -> T {
        let h = (&self.matrix + self.matrix.adjoint()) * cre(T::lit(0.5));
        let eig = SymmetricEigen::new(h);
        eig.eigenvalues.iter().fold(T::max_value().unwrap_or(T::one()), |m, &v| m.min(v))
    }

    /// Hermitian within 1e-12, unit trace within 1e-9, eigenvalues ≥ -1e-8.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > hermiticity_tol() {
            return Err(Error::InvalidState(format!("not hermitian ({herm})")));
        }
        let tr = self.trace();
        if (tr.re - T::one()).abs() > trace_tol() || tr.im.abs() > trace_tol() {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min = self.min_eigenvalue();
        if min < -positivity_tol::<T>() {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }
}
