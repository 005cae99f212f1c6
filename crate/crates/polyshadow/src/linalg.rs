//! Dense linear-algebra kernels: row-major matrices, min-norm least squares,
//! nullspace projectors, and nonnegative least squares.
//!
//! Every public routine validates finiteness up front and reports
//! [`Error::NonFiniteInput`]. Tolerances follow the absolute-plus-relative
//! convention `tol * (1 + scale)`, with the scale stated per routine.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Relative rank cutoff: singular values at or below `RANK_REL_TOL * sigma_max`
/// count as zero when deciding rank.
pub const RANK_REL_TOL: f64 = 1e-10;

/// Column vector, stored as a plain `Vec<f64>`.
pub type Vector = Vec<f64>;

/// Dense row-major matrix over `f64`. Entries are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    /// Build from a flat row-major entry buffer.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix {}x{} needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        if !is_finite_slice(&entries) {
            return Err(Error::NonFiniteInput("matrix entries"));
        }
        Ok(Self { rows, cols, entries })
    }

    /// Build from nested rows; every row must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".to_string()));
        }
        let entries = rows.iter().flatten().copied().collect();
        Self::new(r, c, entries)
    }

    /// Build entry-by-entry from a closure.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![0.0; rows * cols] }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.cols + j] = v;
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Flat row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `A x`; `x.len()` must equal `cols`.
    pub fn matvec(&self, x: &[f64]) -> Vector {
        assert_eq!(x.len(), self.cols, "matvec length mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `A^T x`; `x.len()` must equal `rows`.
    pub fn t_matvec(&self, x: &[f64]) -> Vector {
        assert_eq!(x.len(), self.rows, "t_matvec length mismatch");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let xi = x[i];
            for (o, r) in out.iter_mut().zip(row) {
                *o += xi * r;
            }
        }
        out
    }

    /// `A B`; panics on inner-dimension mismatch.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self.get(i, k) * other.get(k, j)).sum()
        })
    }

    /// New matrix holding the listed rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            entries.extend_from_slice(self.row(i));
        }
        Self { rows: idx.len(), cols: self.cols, entries }
    }

    fn to_na(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    fn from_na(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

/// True when every entry is finite.
pub fn is_finite_slice(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len(), "dot length mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn add(a: &[f64], b: &[f64]) -> Vector {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vector {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scaled(a: &[f64], s: f64) -> Vector {
    a.iter().map(|x| s * x).collect()
}

/// `alpha * x + y`.
pub fn axpy(alpha: f64, x: &[f64], y: &[f64]) -> Vector {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(xi, yi)| alpha * xi + yi).collect()
}

/// Largest absolute difference between two equal-length slices.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Minimum-norm least-squares solution of `M x ~ rhs`.
///
/// Rank is decided by a singular-value cutoff at `RANK_REL_TOL` relative to
/// the largest singular value, so rank-deficient systems get the unique
/// min-norm solution rather than an arbitrary basic one.
pub fn least_squares(m: &DenseMatrix, rhs: &[f64]) -> Result<Vector> {
    if rhs.len() != m.rows {
        return Err(Error::DimensionMismatch(format!(
            "least_squares: matrix has {} rows, rhs has {}",
            m.rows,
            rhs.len()
        )));
    }
    if !is_finite_slice(rhs) {
        return Err(Error::NonFiniteInput("least_squares rhs"));
    }
    if m.rows == 0 || m.cols == 0 {
        return Ok(vec![0.0; m.cols]);
    }
    let svd = m.to_na().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
    let x = svd
        .solve(&DVector::from_column_slice(rhs), RANK_REL_TOL * smax)
        .expect("svd computed with singular vectors");
    Ok(x.iter().copied().collect())
}

/// Orthogonal projector onto the nullspace of `M`: `P = I - pinv(M) M`.
///
/// The result is explicitly symmetrized; callers can rely on `P = P^T`,
/// `P^2 = P`, and `M P = 0` up to `1e-9`-level roundoff.
pub fn pseudoinverse_projector(m: &DenseMatrix) -> Result<DenseMatrix> {
    let n = m.cols;
    if m.rows == 0 {
        return Ok(DenseMatrix::identity(n));
    }
    let svd = m.to_na().svd(false, true);
    let vt = svd.v_t.as_ref().expect("svd computed with right vectors");
    let smax = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
    let cutoff = RANK_REL_TOL * smax;
    let mut p = DMatrix::<f64>::identity(n, n);
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > cutoff {
            let v = vt.row(i);
            for r in 0..n {
                for c in 0..n {
                    p[(r, c)] -= v[r] * v[c];
                }
            }
        }
    }
    for r in 0..n {
        for c in (r + 1)..n {
            let avg = 0.5 * (p[(r, c)] + p[(c, r)]);
            p[(r, c)] = avg;
            p[(c, r)] = avg;
        }
    }
    Ok(DenseMatrix::from_na(&p))
}

/// Output of [`nnls`].
#[derive(Debug, Clone)]
pub struct Nnls {
    /// Nonnegative multipliers, one per generator row of the input matrix.
    pub mu: Vector,
    /// `rhs - M^T mu`, the part of `rhs` outside the generated cone.
    pub residual: Vector,
    /// Least-squares subproblems solved before termination.
    pub iterations: usize,
}

/// Nonnegative least squares over the cone spanned by the rows of `m`.
///
/// Finds `mu >= 0` minimizing `||M^T mu - rhs||_2` by active-set descent
/// (Lawson-Hanson), with inner subproblems solved through the same
/// rank-revealing [`least_squares`] path. At the solution the KKT conditions
/// hold: `<row_i, residual> <= tol` for every generator and `= 0` (within
/// `tol`) wherever `mu_i > 0`, with `tol = 1e-10 * (1 + ||rhs||)`.
pub fn nnls(m: &DenseMatrix, rhs: &[f64]) -> Result<Nnls> {
    let k = m.rows;
    let n = m.cols;
    if rhs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "nnls: generators live in dim {}, rhs has dim {}",
            n,
            rhs.len()
        )));
    }
    if !is_finite_slice(rhs) {
        return Err(Error::NonFiniteInput("nnls rhs"));
    }
    let tol = 1e-10 * (1.0 + norm(rhs));
    let cap = 10 * (k + n).max(1);
    let mut passive: Vec<usize> = Vec::new();
    let mut in_passive = vec![false; k];
    let mut mu = vec![0.0; k];
    let mut residual = rhs.to_vec();
    let mut iterations = 0usize;

    loop {
        let mut entering: Option<(f64, usize)> = None;
        for i in 0..k {
            if in_passive[i] {
                continue;
            }
            let w = dot(m.row(i), &residual);
            if w > tol && entering.map_or(true, |(best, _)| w > best) {
                entering = Some((w, i));
            }
        }
        let Some((_, enter)) = entering else { break };
        passive.push(enter);
        passive.sort_unstable();
        in_passive[enter] = true;

        loop {
            iterations += 1;
            if iterations > cap {
                return Err(Error::IterationCap("nnls"));
            }
            // Columns of the subproblem are the passive generators.
            let sub = DenseMatrix::from_fn(n, passive.len(), |r, c| m.get(passive[c], r));
            let z = least_squares(&sub, rhs)?;
            if z.iter().all(|&v| v > 0.0) {
                for (j, &gi) in passive.iter().enumerate() {
                    mu[gi] = z[j];
                }
                break;
            }
            // Step from mu toward z until the first passive coordinate hits zero.
            let mut alpha = 1.0f64;
            for (j, &gi) in passive.iter().enumerate() {
                if z[j] <= 0.0 {
                    let denom = mu[gi] - z[j];
                    let a = if denom > f64::EPSILON { mu[gi] / denom } else { 0.0 };
                    alpha = alpha.min(a);
                }
            }
            for (j, &gi) in passive.iter().enumerate() {
                mu[gi] += alpha * (z[j] - mu[gi]);
            }
            passive.retain(|&gi| {
                if mu[gi] <= 1e-14 {
                    mu[gi] = 0.0;
                    in_passive[gi] = false;
                    false
                } else {
                    true
                }
            });
        }

        residual = rhs.to_vec();
        for &gi in &passive {
            let g = m.row(gi);
            for (r, gv) in residual.iter_mut().zip(g) {
                *r -= mu[gi] * gv;
            }
        }
    }

    Ok(Nnls { mu, residual, iterations })
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn symmetric_eigen_bounds(m: &DenseMatrix) -> Result<(f64, f64)> {
    if m.rows != m.cols {
        return Err(Error::DimensionMismatch(format!(
            "eigen bounds need a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    if m.rows == 0 {
        return Err(Error::DimensionMismatch("eigen bounds of empty matrix".to_string()));
    }
    let eig = nalgebra::SymmetricEigen::new(m.to_na());
    let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::SplitMix64;

    const CHECK_TOL: f64 = 1e-8;

    fn mat(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn random_matrix(rng: &mut SplitMix64, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.next_f64() * 4.0 - 2.0)
    }

    fn random_vec(rng: &mut SplitMix64, n: usize) -> Vector {
        (0..n).map(|_| rng.next_f64() * 4.0 - 2.0).collect()
    }

    #[test]
    fn least_squares_identity_recovers_rhs() {
        let m = mat(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let x = least_squares(&m, &[3.0, 4.0]).unwrap();
        assert!(max_abs_diff(&x, &[3.0, 4.0]) <= 1e-12);
    }

    #[test]
    fn least_squares_overdetermined_averages() {
        let m = mat(&[&[1.0], &[1.0]]);
        let x = least_squares(&m, &[0.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() <= 1e-12, "expected 1.0, got {}", x[0]);
    }

    #[test]
    fn least_squares_underdetermined_returns_min_norm() {
        let m = mat(&[&[1.0, 1.0]]);
        let x = least_squares(&m, &[2.0]).unwrap();
        assert!(max_abs_diff(&x, &[1.0, 1.0]) <= 1e-12, "min-norm solution is (1,1), got {x:?}");
    }

    #[test]
    fn least_squares_rejects_non_finite() {
        let m = mat(&[&[1.0, 0.0]]);
        assert_eq!(least_squares(&m, &[f64::NAN]), Err(Error::NonFiniteInput("least_squares rhs")));
        assert!(DenseMatrix::from_rows(&[vec![f64::INFINITY]]).is_err());
    }

    #[test]
    fn least_squares_residual_is_orthogonal_to_column_space() {
        let mut rng = SplitMix64::new(11);
        for trial in 0..100 {
            let rows = 1 + (rng.next_u64() % 6) as usize;
            let cols = 1 + (rng.next_u64() % 6) as usize;
            let m = random_matrix(&mut rng, rows, cols);
            let rhs = random_vec(&mut rng, rows);
            let x = least_squares(&m, &rhs).unwrap();
            let r = sub(&rhs, &m.matvec(&x));
            let against = m.t_matvec(&r);
            assert!(
                norm_inf(&against) <= CHECK_TOL * (1.0 + norm(&rhs)),
                "trial {trial}: residual not orthogonal, |M^T r|_inf = {}",
                norm_inf(&against)
            );
        }
    }

    #[test]
    fn projector_matches_line_example() {
        let p = pseudoinverse_projector(&mat(&[&[1.0, 1.0]])).unwrap();
        let expect = mat(&[&[0.5, -0.5], &[-0.5, 0.5]]);
        assert!(max_abs_diff(p.entries(), expect.entries()) <= 1e-12);
    }

    #[test]
    fn projector_of_full_rank_square_is_zero() {
        let p = pseudoinverse_projector(&mat(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert!(norm_inf(p.entries()) <= 1e-12);
    }

    #[test]
    fn projector_of_single_axis_keeps_complement() {
        let p = pseudoinverse_projector(&mat(&[&[1.0, 0.0, 0.0]])).unwrap();
        let expect = DenseMatrix::from_fn(3, 3, |i, j| if i == j && i > 0 { 1.0 } else { 0.0 });
        assert!(max_abs_diff(p.entries(), expect.entries()) <= 1e-12);
    }

    #[test]
    fn projector_is_symmetric_idempotent_and_annihilated() {
        let mut rng = SplitMix64::new(23);
        for trial in 0..100 {
            let rows = 1 + (rng.next_u64() % 5) as usize;
            let cols = 1 + (rng.next_u64() % 5) as usize;
            let m = random_matrix(&mut rng, rows, cols);
            let p = pseudoinverse_projector(&m).unwrap();
            let pt = p.transpose();
            assert!(max_abs_diff(p.entries(), pt.entries()) <= CHECK_TOL, "trial {trial}: not symmetric");
            let pp = p.matmul(&p);
            assert!(max_abs_diff(pp.entries(), p.entries()) <= CHECK_TOL, "trial {trial}: not idempotent");
            let mp = m.matmul(&p);
            assert!(norm_inf(mp.entries()) <= CHECK_TOL, "trial {trial}: M P != 0");
        }
    }

    #[test]
    fn nnls_clips_to_cone_boundary() {
        let m = mat(&[&[1.0, 1.0]]);
        let out = nnls(&m, &[0.0, 1.0]).unwrap();
        assert!((out.mu[0] - 0.5).abs() <= 1e-10, "mu = {:?}", out.mu);
        assert!(max_abs_diff(&out.residual, &[-0.5, 0.5]) <= 1e-10);
    }

    #[test]
    fn nnls_outside_cone_returns_zero() {
        let m = mat(&[&[1.0, 0.0]]);
        let out = nnls(&m, &[-1.0, 0.0]).unwrap();
        assert_eq!(out.mu, vec![0.0]);
        assert!(max_abs_diff(&out.residual, &[-1.0, 0.0]) <= 1e-12);
    }

    #[test]
    fn nnls_interior_recovers_coordinates() {
        let m = mat(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let out = nnls(&m, &[2.0, 3.0]).unwrap();
        assert!(max_abs_diff(&out.mu, &[2.0, 3.0]) <= 1e-10);
        assert!(norm(&out.residual) <= 1e-10);
    }

    #[test]
    fn nnls_satisfies_kkt_and_is_locally_optimal() {
        let mut rng = SplitMix64::new(37);
        for trial in 0..100 {
            let k = 1 + (rng.next_u64() % 6) as usize;
            let n = 1 + (rng.next_u64() % 5) as usize;
            let m = random_matrix(&mut rng, k, n);
            let rhs = random_vec(&mut rng, n);
            let out = nnls(&m, &rhs).unwrap();
            let tol = 1e-10 * (1.0 + norm(&rhs));
            assert!(out.mu.iter().all(|&v| v >= -1e-12), "trial {trial}: negative multiplier");
            for i in 0..k {
                let w = dot(m.row(i), &out.residual);
                assert!(w <= tol + 1e-12, "trial {trial}: dual feasibility broken, w = {w}");
                if out.mu[i] > 1e-9 {
                    assert!(w.abs() <= 1e-8 * (1.0 + norm(&rhs)), "trial {trial}: slackness broken");
                }
            }
            // Random feasible perturbations must not reduce the residual.
            let base = norm(&out.residual);
            for _ in 0..20 {
                let mut cand = out.mu.clone();
                for c in cand.iter_mut() {
                    *c = (*c + (rng.next_f64() - 0.5) * 0.2).max(0.0);
                }
                let mut r = rhs.clone();
                for (i, &ci) in cand.iter().enumerate() {
                    for (rv, gv) in r.iter_mut().zip(m.row(i)) {
                        *rv -= ci * gv;
                    }
                }
                assert!(
                    norm(&r) >= base - 1e-10,
                    "trial {trial}: perturbation improved the fit ({} < {base})",
                    norm(&r)
                );
            }
        }
    }

    #[test]
    fn eigen_bounds_of_diagonal() {
        let m = mat(&[&[2.0, 0.0], &[0.0, 5.0]]);
        let (lo, hi) = symmetric_eigen_bounds(&m).unwrap();
        assert!((lo - 2.0).abs() <= 1e-12 && (hi - 5.0).abs() <= 1e-12);
    }
}
