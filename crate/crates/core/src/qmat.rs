//! Dense complex matrices sized for few-qudit problems.
//!
//! Storage is row-major. Tensor products use the A-major convention: for
//! `A ⊗ B` the composite basis index is `i_A * dim_B + i_B`, so the first
//! factor of every bipartite operator is Alice's leg and the second is Bob's.
//! All channel outputs in this crate depend on that ordering.
//!
//! Entropies are in bits throughout.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::DensityOperator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Negative eigenvalues down to this value are treated as round-off and clipped to zero.
pub const CLIP_TOL: f64 = 1e-10;

/// Tolerance on `‖H − H†‖_max` accepted by [`herm_eig`].
pub const HERMITIAN_TOL: f64 = 1e-8;

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries. Fails on a length mismatch or
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("matrix has non-finite entries".into()));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self::from_vec(r, c, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `self += s * other` in place.
    pub fn add_scaled(&mut self, s: f64, other: &CMatrix) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn try_mul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `U X U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> CMatrix {
        &(u * self) * &u.adjoint()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖self − other‖_max`; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖H − H†‖_max`, or infinity for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(H + H†)/2`.
    pub fn hermitize(&self) -> CMatrix {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// `‖U U† − I‖_max`.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (self * &self.adjoint()).max_abs_diff(&Self::identity(self.rows))
    }

    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let (r, c) = (self.rows * rhs.rows, self.cols * rhs.cols);
        let mut out = Self::zeros(r, c);
        for ia in 0..self.rows {
            for ja in 0..self.cols {
                let a = self[(ia, ja)];
                if a == ZERO {
                    continue;
                }
                for ib in 0..rhs.rows {
                    for jb in 0..rhs.cols {
                        out[(ia * rhs.rows + ib, ja * rhs.cols + jb)] = a * rhs[(ib, jb)];
                    }
                }
            }
        }
        out
    }

    /// Extracts the `rows x cols` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    /// Panics on a shape mismatch; use [`CMatrix::try_mul`] for fallible products.
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.try_mul(rhs).expect("matrix shape mismatch")
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Spectrum and eigenvectors of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    /// `V Λ V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        CMatrix::from_fn(n, n, |i, j| {
            self.eigenvalues
                .iter()
                .enumerate()
                .map(|(k, &l)| v[(i, k)] * v[(j, k)].conj() * l)
                .sum()
        })
    }

    /// `V f(Λ) V†` with a complex-valued spectral function.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let fl: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            fl.iter()
                .enumerate()
                .map(|(k, &g)| v[(i, k)] * v[(j, k)].conj() * g)
                .sum()
        })
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// The input is hermitized before factorization; it must be square and
/// Hermitian to within [`HERMITIAN_TOL`].
pub fn herm_eig(h: &CMatrix) -> Result<EigenDecomposition> {
    if !h.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            h.rows, h.cols
        )));
    }
    let dev = h.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let n = h.rows;
    let mut a = h.hermitize();
    let mut v = CMatrix::identity(n);

    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                // Phase rotation makes a_pq real, then a real Jacobi rotation zeroes it.
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;

                // A <- A G
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                // A <- G† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                // V <- V G
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Clips round-off negatives and renormalizes a spectrum to unit sum.
///
/// Fails when an eigenvalue lies below `-CLIP_TOL`.
pub fn clip_spectrum(eigenvalues: &[f64]) -> Result<Vec<f64>> {
    if let Some(&min) = eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
        if min < -CLIP_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
    }
    let clipped: Vec<f64> = eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::Validation("spectrum has zero total weight".into()));
    }
    Ok(clipped.into_iter().map(|l| l / total).collect())
}

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Von Neumann entropy of a positive semidefinite, unit-trace matrix.
pub fn entropy_of_matrix(rho: &CMatrix) -> Result<f64> {
    let eig = herm_eig(rho)?;
    Ok(shannon_entropy(&clip_spectrum(&eig.eigenvalues)?))
}

/// Von Neumann entropy `−tr ρ log₂ ρ` in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    entropy_of_matrix(rho.matrix())
}

/// Eigenvalues of `sigma` below this count as outside its support.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Quantum relative entropy `tr ρ (log₂ ρ − log₂ σ)` in bits.
///
/// Returns `f64::INFINITY` when `rho` has weight outside the support of `sigma`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!(
            "relative entropy of {}-dim and {}-dim states",
            rho.dim(),
            sigma.dim()
        )));
    }
    let er = herm_eig(rho.matrix())?;
    let neg_entropy = -shannon_entropy(&clip_spectrum(&er.eigenvalues)?);

    let es = herm_eig(sigma.matrix())?;
    let sigma_spec = clip_spectrum(&es.eigenvalues)?;
    let mut cross = 0.0;
    for (k, &mu) in sigma_spec.iter().enumerate() {
        let w = es.eigenvectors.column(k);
        // ⟨w|ρ|w⟩
        let weight: f64 = (0..w.len())
            .flat_map(|i| (0..w.len()).map(move |j| (i, j)))
            .map(|(i, j)| (w[i].conj() * rho.matrix()[(i, j)] * w[j]).re)
            .sum();
        if mu < SUPPORT_TOL {
            if weight > SUPPORT_TOL {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += weight * mu.log2();
    }
    Ok((neg_entropy - cross).max(0.0))
}

/// Which tensor factor to trace out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of an operator on `d_A · d_B` dimensions.
///
/// `Subsystem::A` traces out Alice and returns a `d_B x d_B` matrix.
pub fn partial_trace(rho: &CMatrix, traced: Subsystem, dims: (usize, usize)) -> Result<CMatrix> {
    let (da, db) = dims;
    if !rho.is_square() || rho.rows() != da * db {
        return Err(Error::Dimension(format!(
            "partial trace over ({da},{db}) needs a {0}x{0} matrix, got {1}x{2}",
            da * db,
            rho.rows(),
            rho.cols()
        )));
    }
    Ok(match traced {
        Subsystem::A => CMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| rho[(k * db + i, k * db + j)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| rho[(i * db + k, j * db + k)]).sum()
        }),
    })
}

/// `exp(iH)` for Hermitian `H`.
pub fn expi_hermitian(h: &CMatrix) -> Result<CMatrix> {
    let eig = herm_eig(h)?;
    Ok(eig.map_spectrum(|l| Complex64::from_polar(1.0, l)))
}

/// Pauli matrices `σ_0..σ_3`.
pub fn pauli(index: usize) -> CMatrix {
    let i = Complex64::i();
    let (a, b, c, d) = match index {
        0 => (ONE, ZERO, ZERO, ONE),
        1 => (ZERO, ONE, ONE, ZERO),
        2 => (ZERO, -i, i, ZERO),
        3 => (ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index {index} out of range"),
    };
    CMatrix {
        rows: 2,
        cols: 2,
        data: vec![a, b, c, d],
    }
}
