//! Operator containers on truncated mixed Fourier spaces.
//!
//! Assembled operators are stored column-compressed: most corpus operators couple only a few
//! modes per column, so the storage (and all diagnostics built on it) scale with the number of
//! nonzeros rather than with the square of the dimension.

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg;
use crate::sobolev::SobolevWeight;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// Entries below this magnitude are discarded at assembly time.
pub const DROP_TOL: f64 = 1e-14;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Column-compressed complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowidx: Vec<usize>,
    pub vals: Vec<Complex64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, colptr: vec![0; ncols + 1], rowidx: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            colptr: (0..=n).collect(),
            rowidx: (0..n).collect(),
            vals: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    pub fn diagonal(d: &[Complex64]) -> Self {
        let cols = d.iter().enumerate().map(|(i, &v)| vec![(i, v)]).collect();
        SparseMatrix::from_columns(d.len(), cols)
    }

    /// Builds from per-column entry lists; duplicate rows are summed and tiny entries dropped.
    pub fn from_columns(nrows: usize, columns: Vec<Vec<(usize, Complex64)>>) -> Self {
        let ncols = columns.len();
        let mut colptr = Vec::with_capacity(ncols + 1);
        let mut rowidx = Vec::new();
        let mut vals = Vec::new();
        colptr.push(0);
        for mut col in columns {
            col.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < col.len() {
                let r = col[k].0;
                let mut v = ZERO;
                while k < col.len() && col[k].0 == r {
                    v += col[k].1;
                    k += 1;
                }
                debug_assert!(r < nrows);
                if v.norm() > DROP_TOL {
                    rowidx.push(r);
                    vals.push(v);
                }
            }
            colptr.push(rowidx.len());
        }
        SparseMatrix { nrows, ncols, colptr, rowidx, vals }
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let cols = (0..m.ncols())
            .map(|j| (0..m.nrows()).filter_map(|i| {
                let v = m[(i, j)];
                (v.norm() > DROP_TOL).then_some((i, v))
            }).collect())
            .collect();
        SparseMatrix::from_columns(m.nrows(), cols)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for j in 0..self.ncols {
            for k in self.colptr[j]..self.colptr[j + 1] {
                m[(self.rowidx[k], j)] += self.vals[k];
            }
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.colptr[j]..self.colptr[j + 1]).map(move |k| (self.rowidx[k], self.vals[k]))
    }

    pub fn columns(&self) -> Vec<Vec<(usize, Complex64)>> {
        (0..self.ncols).map(|j| self.column(j).collect()).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.column(j).find(|e| e.0 == i).map_or(ZERO, |e| e.1)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![ZERO; self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == ZERO {
                continue;
            }
            for (i, v) in self.column(j) {
                y[i] += v * xj;
            }
        }
        y
    }

    pub fn matvec_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.nrows);
        (0..self.ncols)
            .map(|j| self.column(j).map(|(i, v)| v.conj() * y[i]).sum())
            .collect()
    }

    pub fn adjoint(&self) -> SparseMatrix {
        let mut cols = vec![Vec::new(); self.nrows];
        for j in 0..self.ncols {
            for (i, v) in self.column(j) {
                cols[i].push((j, v.conj()));
            }
        }
        SparseMatrix::from_columns(self.ncols, cols)
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols, rhs.nrows);
        let cols: Vec<Vec<(usize, Complex64)>> = (0..rhs.ncols)
            .into_par_iter()
            .map(|j| {
                let mut acc: Vec<(usize, Complex64)> = Vec::new();
                for (k, b) in rhs.column(j) {
                    for (i, a) in self.column(k) {
                        acc.push((i, a * b));
                    }
                }
                acc
            })
            .collect();
        SparseMatrix::from_columns(self.nrows, cols)
    }

    /// Linear combination `α·self + β·rhs`.
    pub fn axpby(&self, alpha: Complex64, rhs: &SparseMatrix, beta: Complex64) -> SparseMatrix {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        let cols = (0..self.ncols)
            .map(|j| {
                self.column(j)
                    .map(|(i, v)| (i, alpha * v))
                    .chain(rhs.column(j).map(|(i, v)| (i, beta * v)))
                    .collect()
            })
            .collect();
        SparseMatrix::from_columns(self.nrows, cols)
    }

    /// `diag(left) · self · diag(right)`.
    pub fn scale_rows_cols(&self, left: &[f64], right: &[f64]) -> SparseMatrix {
        let mut out = self.clone();
        for j in 0..self.ncols {
            for k in self.colptr[j]..self.colptr[j + 1] {
                out.vals[k] *= left[self.rowidx[k]] * right[j];
            }
        }
        out.prune()
    }

    fn prune(self) -> SparseMatrix {
        let nrows = self.nrows;
        SparseMatrix::from_columns(nrows, self.columns())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// A finite realization of an operator between two truncated mixed Fourier spaces.
#[derive(Debug, Clone)]
pub struct QuantizedOperator {
    /// Source (column) window.
    pub src: FrequencyGrid,
    /// Target (row) window.
    pub dst: FrequencyGrid,
    pub matrix: SparseMatrix,
    /// Free-form provenance tag (symbol name, construction route).
    pub tag: String,
}

impl QuantizedOperator {
    pub fn new(src: FrequencyGrid, dst: FrequencyGrid, matrix: SparseMatrix, tag: impl Into<String>) -> Self {
        assert_eq!(matrix.ncols, src.dim());
        assert_eq!(matrix.nrows, dst.dim());
        QuantizedOperator { src, dst, matrix, tag: tag.into() }
    }

    pub fn identity(grid: &FrequencyGrid) -> Self {
        QuantizedOperator::new(*grid, *grid, SparseMatrix::identity(grid.dim()), "identity")
    }

    pub fn zero(src: &FrequencyGrid, dst: &FrequencyGrid) -> Self {
        QuantizedOperator::new(*src, *dst, SparseMatrix::zeros(dst.dim(), src.dim()), "zero")
    }

    /// Fourier multiplier `(ξ,η,c) ↦ f(ξ,η)` (scalar, applied to every component).
    pub fn multiplier(grid: &FrequencyGrid, f: impl Fn(i64, i64) -> Complex64) -> Self {
        let d: Vec<Complex64> = (0..grid.dim())
            .map(|i| {
                let (xi, eta, _) = grid.mode_of(i);
                f(xi, eta)
            })
            .collect();
        QuantizedOperator::new(*grid, *grid, SparseMatrix::diagonal(&d), "multiplier")
    }

    pub fn from_dense(src: &FrequencyGrid, dst: &FrequencyGrid, m: &DMatrix<Complex64>, tag: &str) -> Result<Self> {
        if m.nrows() != dst.dim() || m.ncols() != src.dim() {
            return Err(Error::Dimension(format!(
                "dense matrix {}x{} does not fit {}<-{}",
                m.nrows(),
                m.ncols(),
                dst.dim(),
                src.dim()
            )));
        }
        Ok(QuantizedOperator::new(*src, *dst, SparseMatrix::from_dense(m), tag))
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        self.matrix.to_dense()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.matrix.matvec(v)
    }

    pub fn is_square(&self) -> bool {
        self.src == self.dst
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    /// Composition `self ∘ rhs`.
    pub fn compose(&self, rhs: &QuantizedOperator) -> Result<Self> {
        if rhs.dst != self.src {
            return Err(Error::Dimension("compose: inner windows differ".into()));
        }
        Ok(QuantizedOperator::new(rhs.src, self.dst, self.matrix.mul(&rhs.matrix), format!("{}*{}", self.tag, rhs.tag)))
    }

    fn check_same_shape(&self, rhs: &QuantizedOperator) -> Result<()> {
        if self.src != rhs.src || self.dst != rhs.dst {
            return Err(Error::Dimension("operators act between different windows".into()));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &QuantizedOperator) -> Result<Self> {
        self.check_same_shape(rhs)?;
        let one = Complex64::new(1.0, 0.0);
        Ok(QuantizedOperator::new(self.src, self.dst, self.matrix.axpby(one, &rhs.matrix, one), self.tag.clone()))
    }

    pub fn sub(&self, rhs: &QuantizedOperator) -> Result<Self> {
        self.check_same_shape(rhs)?;
        let one = Complex64::new(1.0, 0.0);
        Ok(QuantizedOperator::new(self.src, self.dst, self.matrix.axpby(one, &rhs.matrix, -one), self.tag.clone()))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let zero = SparseMatrix::zeros(self.matrix.nrows, self.matrix.ncols);
        QuantizedOperator::new(self.src, self.dst, self.matrix.axpby(c, &zero, ZERO), self.tag.clone())
    }

    pub fn adjoint(&self) -> Self {
        QuantizedOperator::new(self.dst, self.src, self.matrix.adjoint(), format!("{}^*", self.tag))
    }

    /// Re-expresses the operator between other windows of the same rank: entries whose modes
    /// fall outside the new windows are dropped; new modes get zero rows/columns.
    pub fn restrict(&self, src: &FrequencyGrid, dst: &FrequencyGrid) -> Result<Self> {
        if src.rank != self.src.rank || dst.rank != self.dst.rank {
            return Err(Error::Rank(src.rank, self.src.rank));
        }
        let cols = (0..src.dim())
            .map(|j| {
                let (xi, eta, c) = src.mode_of(j);
                match self.src.try_index(xi, eta, c) {
                    None => Vec::new(),
                    Some(jj) => self
                        .matrix
                        .column(jj)
                        .filter_map(|(i, v)| {
                            let (a, b, r) = self.dst.mode_of(i);
                            dst.try_index(a, b, r).map(|ii| (ii, v))
                        })
                        .collect(),
                }
            })
            .collect();
        Ok(QuantizedOperator::new(*src, *dst, SparseMatrix::from_columns(dst.dim(), cols), self.tag.clone()))
    }

    /// `W_{s_out} · op · W_{s_in}^{-1}` with the full Sobolev weights.
    pub fn sobolev_conjugate(&self, s_in: f64, s_out: f64) -> Self {
        let left = SobolevWeight::new(s_out).diagonal(&self.dst);
        let right = SobolevWeight::new(-s_in).diagonal(&self.src);
        QuantizedOperator::new(self.src, self.dst, self.matrix.scale_rows_cols(&left, &right), self.tag.clone())
    }

    /// Spectral norm of `W_{s_out}·op·W_{s_in}^{-1}`.
    pub fn sobolev_norm(&self, s_in: f64, s_out: f64) -> Result<f64> {
        linalg::spectral_norm(&self.sobolev_conjugate(s_in, s_out).matrix)
    }

    /// Plain `L²` operator norm.
    pub fn norm(&self) -> Result<f64> {
        linalg::spectral_norm(&self.matrix)
    }
}

/// Spectral norm `‖W_{s_out}·op·W_{s_in}^{-1}‖₂`.
pub fn operator_sobolev_norm(op: &QuantizedOperator, s_in: f64, s_out: f64) -> Result<f64> {
    op.sobolev_norm(s_in, s_out)
}

/// Number of singular values of a square operator below `threshold`.
pub fn near_kernel_count(op: &QuantizedOperator, threshold: f64) -> Result<usize> {
    let sv = linalg::singular_values(&op.matrix)?;
    Ok(sv.iter().filter(|&&s| s < threshold).count())
}

/// `P_{≥K}·op·P_{≥K}` where `P_{≥K}` removes every mode with `max(|ξ|,|η|) < K`.
pub fn high_frequency_compression(op: &QuantizedOperator, k: usize) -> Result<QuantizedOperator> {
    let kmax = op.src.n_base_modes.max(op.src.n_fiber_modes);
    if k > kmax {
        return Err(Error::Range(format!("shell K = {k} exceeds the grid window {kmax}")));
    }
    let k = k as i64;
    let mask = |g: &FrequencyGrid| -> Vec<f64> {
        (0..g.dim()).map(|i| if g.shell_of(i) >= k { 1.0 } else { 0.0 }).collect()
    };
    let m = op.matrix.scale_rows_cols(&mask(&op.dst), &mask(&op.src));
    Ok(QuantizedOperator::new(op.src, op.dst, m, format!("{}|K>={k}", op.tag)))
}

/// Matrix-free realization: a coefficient-vector map between two windows.
#[derive(Clone)]
pub struct MatrixFreeOperator {
    pub src: FrequencyGrid,
    pub dst: FrequencyGrid,
    pub apply: Arc<dyn Fn(&[Complex64]) -> Vec<Complex64> + Send + Sync>,
    pub tag: String,
}

impl MatrixFreeOperator {
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (self.apply)(v)
    }

    /// Spectral norm by power iteration on `A*A` using a supplied adjoint map.
    pub fn norm_with_adjoint(
        &self,
        adjoint: &(dyn Fn(&[Complex64]) -> Vec<Complex64> + Sync),
        max_iter: usize,
        tol: f64,
    ) -> Result<f64> {
        linalg::power_norm(self.src.dim(), &|v: &[Complex64]| adjoint(&self.apply(v)), max_iter, tol)
    }
}

impl std::fmt::Debug for MatrixFreeOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatrixFreeOperator").field("src", &self.src).field("dst", &self.dst).field("tag", &self.tag).finish()
    }
}
