//! Linear-algebra diagnostics on sparse operators: spectral norms, singular values, and
//! kernel/cokernel bases.
//!
//! A sparse matrix is first split into the connected components of its bipartite sparsity
//! graph (rows ↔ columns).  Singular values of the whole matrix are the union of those of the
//! blocks, so exact dense factorizations stay affordable even when the total dimension is large.
//! Components above [`DENSE_LIMIT`] fall back to Lanczos iteration for the norm.

use crate::error::{Error, Result};
use crate::operator::SparseMatrix;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

/// Largest component side for which dense factorizations are used.
pub const DENSE_LIMIT: usize = 1600;

/// Relative accuracy requested from iterative norm estimates.
pub const NORM_TOL: f64 = 1e-9;

/// Maximal number of Lanczos steps.
pub const MAX_LANCZOS: usize = 300;

/// Relative change of the top Ritz value below which three consecutive Lanczos steps count as
/// converged.
pub const RITZ_STAGNATION: f64 = 1e-13;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Row and column index sets of one connected block.
#[derive(Debug, Clone)]
pub struct Component {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components of the bipartite sparsity graph; empty rows and columns are omitted.
pub fn components(m: &SparseMatrix) -> Vec<Component> {
    // Nodes 0..ncols are columns, ncols.. are rows.
    let n = m.ncols + m.nrows;
    let mut parent: Vec<usize> = (0..n).collect();
    for j in 0..m.ncols {
        for (i, _) in m.column(j) {
            let (a, b) = (find(&mut parent, j), find(&mut parent, m.ncols + i));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut slot = vec![usize::MAX; n];
    let mut out: Vec<Component> = Vec::new();
    for j in 0..m.ncols {
        if m.colptr[j] == m.colptr[j + 1] {
            continue;
        }
        let r = find(&mut parent, j);
        if slot[r] == usize::MAX {
            slot[r] = out.len();
            out.push(Component { rows: Vec::new(), cols: Vec::new() });
        }
        out[slot[r]].cols.push(j);
    }
    let mut has_entry = vec![false; m.nrows];
    for &i in &m.rowidx {
        has_entry[i] = true;
    }
    for (i, &present) in has_entry.iter().enumerate() {
        if present {
            let r = find(&mut parent, m.ncols + i);
            out[slot[r]].rows.push(i);
        }
    }
    out
}

/// Dense block of `m` on a component.
pub fn dense_block(m: &SparseMatrix, comp: &Component) -> DMatrix<Complex64> {
    let mut local = vec![usize::MAX; m.nrows];
    for (k, &i) in comp.rows.iter().enumerate() {
        local[i] = k;
    }
    let mut d = DMatrix::zeros(comp.rows.len(), comp.cols.len());
    for (jj, &j) in comp.cols.iter().enumerate() {
        for (i, v) in m.column(j) {
            d[(local[i], jj)] += v;
        }
    }
    d
}

/// Singular values of a dense block, descending.
pub fn dense_singular_values(d: &DMatrix<Complex64>) -> Vec<f64> {
    if d.nrows() == 0 || d.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = d.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Spectral norm of a sparse matrix.
pub fn spectral_norm(m: &SparseMatrix) -> Result<f64> {
    if m.nnz() == 0 {
        return Ok(0.0);
    }
    let comps = components(m);
    let large = comps.iter().any(|c| c.rows.len().max(c.cols.len()) > DENSE_LIMIT);
    if large {
        return lanczos_norm(m);
    }
    Ok(comps
        .par_iter()
        .map(|c| {
            let d = dense_block(m, c);
            if c.rows.len() == 1 || c.cols.len() == 1 {
                d.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
            } else {
                dense_singular_values(&d).first().copied().unwrap_or(0.0)
            }
        })
        .reduce(|| 0.0, f64::max))
}

/// All `min(nrows, ncols)` singular values, descending (structural zeros included).
pub fn singular_values(m: &SparseMatrix) -> Result<Vec<f64>> {
    let comps = components(m);
    if let Some(c) = comps.iter().find(|c| c.rows.len().max(c.cols.len()) > DENSE_LIMIT) {
        return Err(Error::Unsupported(format!(
            "dense singular values of a {}x{} block",
            c.rows.len(),
            c.cols.len()
        )));
    }
    let mut s: Vec<f64> = comps.par_iter().flat_map(|c| dense_singular_values(&dense_block(m, c))).collect();
    let total = m.nrows.min(m.ncols);
    s.resize(total.max(s.len()), 0.0);
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s.truncate(total);
    Ok(s)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending with matching columns.
pub fn hermitian_eigen(h: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Orthonormal bases of the approximate kernel and cokernel of a sparse matrix.
#[derive(Debug, Clone, Default)]
pub struct NullSpaces {
    /// Kernel vectors as sparse `(column index, value)` lists.
    pub kernel: Vec<Vec<(usize, Complex64)>>,
    /// Cokernel vectors as sparse `(row index, value)` lists.
    pub cokernel: Vec<Vec<(usize, Complex64)>>,
    /// Smallest singular value that is not below the threshold (`+∞` if none).
    pub min_regular_singular_value: f64,
    /// Smallest singular value overall, structural zeros included.
    pub min_singular_value: f64,
}

/// Kernel/cokernel of `m` at singular-value `threshold`, from the Hermitian squares `A*A` and
/// `AA*` of every block (full eigenbases, so rectangular blocks are handled without padding).
pub fn null_spaces(m: &SparseMatrix, threshold: f64) -> Result<NullSpaces> {
    let comps = components(m);
    if let Some(c) = comps.iter().find(|c| c.rows.len().max(c.cols.len()) > DENSE_LIMIT) {
        return Err(Error::Unsupported(format!(
            "kernel analysis of a {}x{} block",
            c.rows.len(),
            c.cols.len()
        )));
    }
    let parts: Vec<NullSpaces> = comps
        .par_iter()
        .map(|c| {
            let d = dense_block(m, c);
            let t2 = threshold * threshold;
            let mut out = NullSpaces { min_regular_singular_value: f64::INFINITY, min_singular_value: f64::INFINITY, ..Default::default() };
            let (vals, vecs) = hermitian_eigen(&(d.adjoint() * &d));
            for (k, &l) in vals.iter().enumerate() {
                let s = l.max(0.0).sqrt();
                out.min_singular_value = out.min_singular_value.min(s);
                if l < t2 {
                    out.kernel.push(c.cols.iter().enumerate().map(|(a, &j)| (j, vecs[(a, k)])).collect());
                } else {
                    out.min_regular_singular_value = out.min_regular_singular_value.min(s);
                }
            }
            let (vals, vecs) = hermitian_eigen(&(&d * d.adjoint()));
            for (k, &l) in vals.iter().enumerate() {
                if l < t2 {
                    out.cokernel.push(c.rows.iter().enumerate().map(|(a, &i)| (i, vecs[(a, k)])).collect());
                }
            }
            out
        })
        .collect();
    let mut total = NullSpaces { min_regular_singular_value: f64::INFINITY, min_singular_value: f64::INFINITY, ..Default::default() };
    for p in parts {
        total.kernel.extend(p.kernel);
        total.cokernel.extend(p.cokernel);
        total.min_regular_singular_value = total.min_regular_singular_value.min(p.min_regular_singular_value);
        total.min_singular_value = total.min_singular_value.min(p.min_singular_value);
    }
    let one = Complex64::new(1.0, 0.0);
    for j in 0..m.ncols {
        if m.colptr[j] == m.colptr[j + 1] {
            total.kernel.push(vec![(j, one)]);
            total.min_singular_value = 0.0;
        }
    }
    let mut has_entry = vec![false; m.nrows];
    for &i in &m.rowidx {
        has_entry[i] = true;
    }
    for (i, &present) in has_entry.iter().enumerate() {
        if !present {
            total.cokernel.push(vec![(i, one)]);
            total.min_singular_value = 0.0;
        }
    }
    Ok(total)
}

/// Deterministic pseudo-random start vector (splitmix64), so iterative estimates are reproducible.
pub fn start_vector(n: usize, seed: u64) -> Vec<Complex64> {
    let mut state = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut next = || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    (0..n).map(|_| Complex64::new(next(), next())).collect()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest eigenvalue of the Hermitian positive map `h` by Lanczos with full
/// reorthogonalization.
pub fn lanczos_top_eigenvalue(n: usize, h: &(dyn Fn(&[Complex64]) -> Vec<Complex64> + Sync), tol: f64) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    let mut v = start_vector(n, 7);
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut basis: Vec<Vec<Complex64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = f64::NAN;
    let mut stalled = 0;
    let steps = MAX_LANCZOS.min(n);
    for j in 0..steps {
        let mut w = h(&basis[j]);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        // Two passes of classical Gram–Schmidt against the whole basis.
        for _ in 0..2 {
            let coefs: Vec<Complex64> = basis.par_iter().map(|b| dot(b, &w)).collect();
            for (b, c) in basis.iter().zip(coefs) {
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = norm(&w);
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c || c + 1 == r {
                beta[r.min(c)]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        let (imax, theta) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, x)| if x > acc.1 { (i, x) } else { acc });
        let resid = b * eig.eigenvectors[(k - 1, imax)].abs();
        let scale = theta.abs().max(1e-300);
        if resid <= tol * scale || b <= 1e-14 * scale || k == n {
            return Ok(theta.max(0.0));
        }
        // Ritz values converge quadratically faster than residuals; a clustered top of the
        // spectrum stalls the residual while the value itself has settled.
        if (theta - last).abs() <= RITZ_STAGNATION * scale {
            stalled += 1;
            if stalled >= 3 {
                return Ok(theta.max(0.0));
            }
        } else {
            stalled = 0;
        }
        last = theta;
        beta.push(b);
        basis.push(w.into_iter().map(|x| x / b).collect());
    }
    Err(Error::NoConvergence(format!("Lanczos did not converge in {steps} steps (n = {n})")))
}

/// Spectral norm via Lanczos on `A*A`.
pub fn lanczos_norm(m: &SparseMatrix) -> Result<f64> {
    let h = |v: &[Complex64]| m.matvec_adjoint(&m.matvec(v));
    lanczos_top_eigenvalue(m.ncols, &h, NORM_TOL * NORM_TOL.sqrt()).map(f64::sqrt)
}

/// Spectral norm for a matrix-free map given the normal operator `v ↦ A*Av`, by power
/// iteration; errors when `max_iter` iterations do not reach relative change `tol`.
pub fn power_norm(n: usize, normal: &(dyn Fn(&[Complex64]) -> Vec<Complex64> + Sync), max_iter: usize, tol: f64) -> Result<f64> {
    let mut v = start_vector(n, 11);
    let mut lam_prev = 0.0;
    for _ in 0..max_iter {
        let nv = norm(&v);
        if nv == 0.0 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let w = normal(&v);
        let lam = dot(&v, &w).re;
        if (lam - lam_prev).abs() <= tol * lam.abs() {
            return Ok(lam.max(0.0).sqrt());
        }
        lam_prev = lam;
        v = w;
    }
    Err(Error::NoConvergence(format!("power iteration did not converge in {max_iter} steps")))
}

/// Residual `‖Ax − b‖` helper for dense systems.
pub fn residual(a: &DMatrix<Complex64>, x: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    (a * x - b).norm()
}

/// Orthonormal basis (columns) of the range of a dense matrix, from the eigenvectors of
/// `M M*` with eigenvalue above `threshold²·max`.
pub fn range_basis(m: &DMatrix<Complex64>, threshold: f64) -> DMatrix<Complex64> {
    let (vals, vecs) = hermitian_eigen(&(m * m.adjoint()));
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > threshold * threshold * top.max(1e-300) && vals[k] > 0.0).collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |i, j| vecs[(i, keep[j])])
}

/// Orthonormal basis of the range of a (near-)projection: eigenvectors of its Hermitian part
/// with eigenvalue above `1/2`.
pub fn projection_range(p: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (vals, vecs) = hermitian_eigen(p);
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 0.5).collect();
    DMatrix::from_fn(p.nrows(), keep.len(), |i, j| vecs[(i, keep[j])])
}

/// Smallest singular value of a dense block (`0` for an empty or non-square-compatible map
/// whose column count exceeds its row count).
pub fn min_singular_value(d: &DMatrix<Complex64>) -> f64 {
    if d.ncols() == 0 {
        return f64::INFINITY;
    }
    if d.nrows() < d.ncols() {
        return 0.0;
    }
    dense_singular_values(d).last().copied().unwrap_or(0.0)
}

/// Vector helper: `Σ|v_i|²`.
pub fn mass(v: &[(usize, Complex64)], pred: impl Fn(usize) -> bool) -> f64 {
    v.iter().filter(|(i, _)| pred(*i)).map(|(_, x)| x.norm_sqr()).sum()
}

/// Dense zero vector of length `n`.
pub fn zeros(n: usize) -> Vec<Complex64> {
    vec![ZERO; n]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn lanczos_matches_dense() {
        let n = 60;
        let d = DMatrix::from_fn(n, n, |i, j| {
            let v = start_vector(1, (i * n + j) as u64)[0];
            if (i as i64 - j as i64).abs() <= 2 { v } else { ZERO }
        });
        let m = SparseMatrix::from_dense(&d);
        let exact = dense_singular_values(&d)[0];
        let lz = lanczos_norm(&m).unwrap();
        assert!((exact - lz).abs() < 1e-8 * exact, "{exact} vs {lz}");
        assert!((spectral_norm(&m).unwrap() - exact).abs() < 1e-10);
    }

    #[test]
    fn null_spaces_of_rectangular() {
        // 2x3 block [[1,0,0],[0,1,0]]: kernel e2, no cokernel; plus an empty row.
        let cols = vec![vec![(0, c(1.0))], vec![(1, c(1.0))], vec![]];
        let m = SparseMatrix::from_columns(3, cols);
        let ns = null_spaces(&m, 1e-6).unwrap();
        assert_eq!(ns.kernel.len(), 1);
        assert_eq!(ns.cokernel.len(), 1);
        assert_eq!(ns.min_singular_value, 0.0);
        assert!((ns.min_regular_singular_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_converges() {
        let d = [3.0, 1.0, 0.5];
        let f = |v: &[Complex64]| v.iter().zip(d).map(|(x, s)| x * s * s).collect::<Vec<_>>();
        let n = power_norm(3, &f, 500, 1e-13).unwrap();
        assert!((n - 3.0).abs() < 1e-6);
        assert!(power_norm(3, &f, 1, 1e-16).is_err());
    }
}
