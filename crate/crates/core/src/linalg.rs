//! Direct and iterative kernels: sparse Cholesky, preconditioned conjugate
//! gradients with an optional projector, and small dense oracles.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::linalg::LltError;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{MatMut, Side};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Largest problem handed to the dense routines.
pub const DENSE_LIMIT: usize = 400;

/// Sparse Cholesky factor of a symmetric positive-definite matrix, with a
/// fill-reducing ordering chosen by the backend.
pub struct CholeskyFactor {
    llt: Option<Llt<usize, f64>>,
    n: usize,
}

impl std::fmt::Debug for CholeskyFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CholeskyFactor").field("n", &self.n).finish_non_exhaustive()
    }
}

impl CholeskyFactor {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::ShapeMismatch(format!("cholesky of a {}x{} matrix", n, a.cols())));
        }
        let scale = a.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !a.is_symmetric(1e-12 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::Factorization("matrix is not symmetric".into()));
        }
        if n == 0 {
            return Ok(Self { llt: None, n });
        }
        // Row j of a symmetric CSR matrix is column j; keep the lower part.
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut vals = Vec::new();
        col_ptr.push(0);
        for j in 0..n {
            for (i, v) in a.row(j) {
                if i >= j {
                    row_idx.push(i);
                    vals.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        let sym = SymbolicSparseColMat::<usize>::new_checked(n, n, col_ptr, None, row_idx);
        let lower = SparseColMat::<usize, f64>::new(sym, vals);
        let llt = lower.sp_cholesky(Side::Lower).map_err(|e| match e {
            LltError::Numeric(faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index }) => {
                Error::NotPositiveDefinite { pivot: index }
            }
            other => Error::Factorization(format!("{other:?}")),
        })?;
        Ok(Self { llt: Some(llt), n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n, "cholesky solve: rhs length");
        if let Some(llt) = &self.llt {
            llt.solve_in_place(MatMut::from_column_major_slice_mut(b, self.n, 1));
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// A square linear map applied into caller-owned storage.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y);
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

/// `y_i = d_i x_i`.
#[derive(Clone, Debug)]
pub struct DiagonalOperator(pub Vec<f64>);

impl DiagonalOperator {
    pub fn inverse_of(d: &[f64]) -> Self {
        Self(d.iter().map(|v| 1.0 / v).collect())
    }
}

impl LinearOperator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.0) {
            *yi = di * xi;
        }
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let r = self * DVector::from_column_slice(x);
        y.copy_from_slice(r.as_slice());
    }
}

/// `P -> B A^-1 B^T P` without forming the Schur complement.
pub struct SchurOperator<'a> {
    b: &'a CsrMatrix,
    a: &'a CholeskyFactor,
}

impl<'a> SchurOperator<'a> {
    pub fn new(b: &'a CsrMatrix, a: &'a CholeskyFactor) -> Result<Self> {
        if b.cols() != a.dim() {
            return Err(Error::ShapeMismatch(format!(
                "B has {} columns, the factor has dimension {}",
                b.cols(),
                a.dim()
            )));
        }
        Ok(Self { b, a })
    }
}

impl LinearOperator for SchurOperator<'_> {
    fn dim(&self) -> usize {
        self.b.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut w = self.b.mul_transpose_vec(x);
        self.a.solve_in_place(&mut w);
        self.b.mul_vec_into(&w, y);
    }
}

/// Removal of a one-dimensional kernel from primal vectors (iterates) and
/// from dual vectors (residuals).
pub trait Projector {
    fn project_primal(&self, x: &mut [f64]);
    fn project_dual(&self, r: &mut [f64]);
}

/// Zero mean with respect to a diagonal mass: primal `x - (m.x / sum m) 1`,
/// dual `r - m (sum r / sum m)`.
#[derive(Clone, Debug)]
pub struct ZeroMeanProjector<'a> {
    mass: &'a [f64],
    total: f64,
}

impl<'a> ZeroMeanProjector<'a> {
    pub fn new(mass: &'a [f64]) -> Self {
        Self {
            mass,
            total: mass.iter().sum(),
        }
    }
}

impl Projector for ZeroMeanProjector<'_> {
    fn project_primal(&self, x: &mut [f64]) {
        let mean = weighted_mean(x, self.mass, self.total);
        x.iter_mut().for_each(|v| *v -= mean);
    }

    fn project_dual(&self, r: &mut [f64]) {
        let s = r.iter().sum::<f64>() / self.total;
        for (ri, mi) in r.iter_mut().zip(self.mass) {
            *ri -= mi * s;
        }
    }
}

fn weighted_mean(x: &[f64], m: &[f64], total: f64) -> f64 {
    x.iter().zip(m).map(|(a, b)| a * b).sum::<f64>() / total
}

/// `P - (sum M_TT P_T / sum M_TT) 1`.
pub fn zero_mean_project(p: &[f64], mass: &[f64]) -> Vec<f64> {
    let mut out = p.to_vec();
    ZeroMeanProjector::new(mass).project_primal(&mut out);
    out
}

/// M-weighted mean of `p`.
pub fn mass_mean(p: &[f64], mass: &[f64]) -> f64 {
    weighted_mean(p, mass, mass.iter().sum())
}

#[derive(Clone, Debug)]
pub struct PcgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Relative preconditioned residual after each iteration.
    pub history: Vec<f64>,
}

pub struct PcgOptions<'a> {
    pub tol: f64,
    pub max_iter: usize,
    pub projector: Option<&'a dyn Projector>,
}

impl Default for PcgOptions<'_> {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 1000,
            projector: None,
        }
    }
}

/// Preconditioned conjugate gradients from a zero initial guess. The
/// observer sees every iterate.
pub fn pcg_observed(
    op: &dyn LinearOperator,
    precond: &dyn LinearOperator,
    rhs: &[f64],
    opts: &PcgOptions<'_>,
    mut observer: impl FnMut(usize, &[f64]),
) -> Result<PcgOutcome> {
    let n = op.dim();
    if rhs.len() != n || precond.dim() != n {
        return Err(Error::ShapeMismatch(format!(
            "pcg: operator {n}, preconditioner {}, rhs {}",
            precond.dim(),
            rhs.len()
        )));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    if let Some(p) = opts.projector {
        p.project_dual(&mut r);
    }
    let mut z = vec![0.0; n];
    let precondition = |r: &[f64], z: &mut [f64]| {
        precond.apply(r, z);
        if let Some(p) = opts.projector {
            p.project_primal(z);
        }
    };
    precondition(&r, &mut z);
    let mut rz = dot(&r, &z);
    let rz0 = rz;
    let mut history = Vec::new();
    if !(rz0 > 0.0) {
        return Ok(PcgOutcome {
            solution: x,
            iterations: 0,
            history,
        });
    }
    let mut d = z.clone();
    let mut q = vec![0.0; n];
    for k in 1..=opts.max_iter {
        op.apply(&d, &mut q);
        let dq = dot(&d, &q);
        if !(dq > 0.0) {
            break;
        }
        let alpha = rz / dq;
        for i in 0..n {
            x[i] += alpha * d[i];
            r[i] -= alpha * q[i];
        }
        if let Some(p) = opts.projector {
            p.project_dual(&mut r);
        }
        observer(k, &x);
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let rel = (rz_new.max(0.0) / rz0).sqrt();
        history.push(rel);
        if rel <= opts.tol {
            return Ok(PcgOutcome {
                solution: x,
                iterations: k,
                history,
            });
        }
        let beta = rz_new / rz;
        for i in 0..n {
            d[i] = z[i] + beta * d[i];
        }
        rz = rz_new;
    }
    Err(Error::NotConverged {
        iterations: history.len(),
        last: history.last().copied().unwrap_or(1.0),
        history,
    })
}

pub fn pcg(op: &dyn LinearOperator, precond: &dyn LinearOperator, rhs: &[f64], opts: &PcgOptions<'_>) -> Result<PcgOutcome> {
    pcg_observed(op, precond, rhs, opts, |_, _| {})
}

fn check_dense(n: usize) -> Result<()> {
    check_dense_limit(n, DENSE_LIMIT)
}

pub(crate) fn check_dense_limit(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        Err(Error::SizeLimit { size: n, limit })
    } else {
        Ok(())
    }
}

/// Ascending eigenvalues of a symmetric dense matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    symmetric_eigenvalues_limited(m, DENSE_LIMIT)
}

/// [`symmetric_eigenvalues`] with an explicit size cap.
pub fn symmetric_eigenvalues_limited(m: &DMatrix<f64>, limit: usize) -> Result<Vec<f64>> {
    check_dense_limit(m.nrows(), limit)?;
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Dense LU solve for the oracles.
pub fn dense_solve(m: &DMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    check_dense(m.nrows())?;
    m.clone()
        .lu()
        .solve(&DVector::from_column_slice(rhs))
        .map(|v| v.as_slice().to_vec())
        .ok_or_else(|| Error::Factorization("singular dense matrix".into()))
}

/// Orthonormal basis of the column space, from the singular values above
/// `rel_tol * sigma_max`.
pub fn column_space(m: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    column_space_limited(m, rel_tol, DENSE_LIMIT)
}

pub fn column_space_limited(m: &DMatrix<f64>, rel_tol: f64, limit: usize) -> Result<DMatrix<f64>> {
    check_dense_limit(m.nrows().min(m.ncols()), limit)?;
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_tol * smax)
        .collect();
    Ok(u.select_columns(&keep))
}

/// Singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> Result<usize> {
    Ok(column_space(m, rel_tol)?.ncols())
}

/// Euclidean distance from `v` to the column space of `m`.
pub fn distance_to_range(m: &DMatrix<f64>, v: &[f64]) -> Result<f64> {
    distance_to_range_limited(m, v, DENSE_LIMIT)
}

pub fn distance_to_range_limited(m: &DMatrix<f64>, v: &[f64], limit: usize) -> Result<f64> {
    let q = column_space_limited(m, 1e-12, limit)?;
    let v = DVector::from_column_slice(v);
    let proj = &q * (q.transpose() * &v);
    Ok((v - proj).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_small() {
        let d = CsrMatrix::from_diagonal(&[4.0, 9.0]);
        assert_eq!(CholeskyFactor::new(&d).unwrap().solve(&[4.0, 9.0]), vec![1.0, 1.0]);
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0)]);
        let x = CholeskyFactor::new(&a).unwrap().solve(&[1.0, 0.0]);
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-15 && (x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cholesky_rejects_indefinite_and_nonsymmetric() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, -2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0)]);
        assert!(matches!(CholeskyFactor::new(&a), Err(Error::NotPositiveDefinite { .. })));
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 2.0), (0, 1, -1.0), (1, 1, 2.0)]);
        assert!(matches!(CholeskyFactor::new(&a), Err(Error::Factorization(_))));
    }

    #[test]
    fn empty_factor() {
        let f = CholeskyFactor::new(&CsrMatrix::zeros(0, 0)).unwrap();
        assert!(f.solve(&[]).is_empty());
    }

    #[test]
    fn zero_mean() {
        let m = [0.5, 0.5];
        assert_eq!(zero_mean_project(&[3.0, 3.0], &m), vec![0.0, 0.0]);
        assert_eq!(zero_mean_project(&[1.0, 0.0], &m), vec![0.5, -0.5]);
        assert_eq!(zero_mean_project(&[0.5, -0.5], &m), vec![0.5, -0.5]);
    }

    #[test]
    fn pcg_identity_and_finite_termination() {
        let out = pcg(&IdentityOperator(3), &IdentityOperator(3), &[1.0, 2.0, 3.0], &PcgOptions::default()).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.solution, vec![1.0, 2.0, 3.0]);
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let out = pcg(&a, &IdentityOperator(3), &[1.0, 2.0, 3.0], &PcgOptions::default()).unwrap();
        assert!(out.iterations <= 3);
        let r = &a * DVector::from_column_slice(&out.solution) - DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn pcg_reports_non_convergence() {
        let a = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 10.0, 100.0, 1000.0]));
        let opts = PcgOptions {
            max_iter: 2,
            ..Default::default()
        };
        match pcg(&a, &IdentityOperator(4), &[1.0; 4], &opts) {
            Err(Error::NotConverged { iterations, history, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(history.len(), 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn range_distance() {
        let m = DMatrix::from_row_slice(3, 1, &[1.0, 1.0, 0.0]);
        assert!(distance_to_range(&m, &[2.0, 2.0, 0.0]).unwrap() < 1e-14);
        assert!((distance_to_range(&m, &[0.0, 0.0, 3.0]).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(numerical_rank(&m, 1e-12).unwrap(), 1);
        assert!(matches!(
            symmetric_eigenvalues(&DMatrix::zeros(401, 401)),
            Err(Error::SizeLimit { .. })
        ));
    }
}
