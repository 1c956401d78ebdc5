//! Density operators and the resource states used for dense coding.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{check_range, Error, Result};
use crate::qmat::{herm_eig, partial_trace, CMatrix, Subsystem};

/// Tolerance for the Hermiticity, trace and positivity checks of [`DensityOperator`].
pub const STATE_TOL: f64 = 1e-9;

/// A validated density operator on `d_A · d_B` dimensions.
///
/// Single-party states use `d_B = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    dims: (usize, usize),
}

impl DensityOperator {
    pub fn new(matrix: CMatrix, dims: (usize, usize)) -> Result<Self> {
        let (da, db) = dims;
        if da == 0 || db == 0 || !matrix.is_square() || matrix.rows() != da * db {
            return Err(Error::Dimension(format!(
                "{}x{} matrix does not match dims ({da},{db})",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > STATE_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = matrix.trace();
        if (tr - 1.0).norm() > STATE_TOL {
            return Err(Error::Validation(format!(
                "density operator trace is {:.12}{:+.3e}i, expected 1",
                tr.re, tr.im
            )));
        }
        let min = herm_eig(&matrix)?.eigenvalues[0];
        if min < -STATE_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(DensityOperator {
            matrix: matrix.hermitize(),
            dims,
        })
    }

    pub fn single(matrix: CMatrix) -> Result<Self> {
        let d = matrix.rows();
        Self::new(matrix, (d, 1))
    }

    /// Pure state `|ψ⟩⟨ψ|`; the ket is normalized here.
    pub fn pure(ket: &[Complex64], dims: (usize, usize)) -> Result<Self> {
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero ket".into()));
        }
        let ket: Vec<Complex64> = ket.iter().map(|z| z / norm).collect();
        Self::new(CMatrix::outer(&ket, &ket), dims)
    }

    pub fn maximally_mixed(dims: (usize, usize)) -> Self {
        let n = dims.0 * dims.1;
        DensityOperator {
            matrix: CMatrix::identity(n).scale(1.0 / n as f64),
            dims,
        }
    }

    /// Convex combination `w·self + (1−w)·other`.
    pub fn mix(&self, w: f64, other: &DensityOperator) -> Result<Self> {
        check_range("mixing weight", w, 0.0, 1.0, "[0, 1]")?;
        if self.dims != other.dims {
            return Err(Error::Dimension(format!(
                "cannot mix states with dims {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        let mut m = self.matrix.scale(w);
        m.add_scaled(1.0 - w, &other.matrix);
        Ok(DensityOperator {
            matrix: m,
            dims: self.dims,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Bob's reduced state `tr_a ρ`.
    pub fn reduced_b(&self) -> DensityOperator {
        let m = partial_trace(&self.matrix, Subsystem::A, self.dims).expect("dims checked");
        DensityOperator {
            matrix: m,
            dims: (self.dims.1, 1),
        }
    }

    /// Alice's reduced state `tr_b ρ`.
    pub fn reduced_a(&self) -> DensityOperator {
        let m = partial_trace(&self.matrix, Subsystem::B, self.dims).expect("dims checked");
        DensityOperator {
            matrix: m,
            dims: (self.dims.0, 1),
        }
    }

    /// Wraps a matrix produced by a trace-preserving map of a valid state.
    /// Only the shape is checked; positivity and trace are inherited.
    pub(crate) fn from_channel_output(matrix: CMatrix, dims: (usize, usize)) -> Self {
        debug_assert_eq!(matrix.rows(), dims.0 * dims.1);
        DensityOperator {
            matrix: matrix.hermitize(),
            dims,
        }
    }
}

/// `|Φ⁺⟩⟨Φ⁺|` with `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2`.
pub fn bell_phi_plus() -> DensityOperator {
    phi_with_phase(0.0)
}

/// `|Φ⟩ = (|00⟩ + e^{iφ}|11⟩)/√2`.
pub fn phi_with_phase(phi: f64) -> DensityOperator {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let ket = [s, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), s * Complex64::from_polar(1.0, phi)];
    DensityOperator {
        matrix: CMatrix::outer(&ket, &ket),
        dims: (2, 2),
    }
}

/// Two-qubit Werner state `η|Φ⁺⟩⟨Φ⁺| + (1−η)/4 · 𝟙`, for `η ∈ [0, 1]`.
pub fn werner(eta: f64) -> Result<DensityOperator> {
    check_range("eta", eta, 0.0, 1.0, "[0, 1]")?;
    bell_phi_plus().mix(eta, &DensityOperator::maximally_mixed((2, 2)))
}

/// Projector onto `(1/√d) Σ_k |kk⟩`.
pub fn max_entangled(d: usize) -> Result<DensityOperator> {
    if d < 2 {
        return Err(Error::Dimension(format!(
            "maximally entangled state needs d >= 2, got {d}"
        )));
    }
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut ket = vec![Complex64::new(0.0, 0.0); d * d];
    for k in 0..d {
        ket[k * d + k] = amp;
    }
    Ok(DensityOperator {
        matrix: CMatrix::outer(&ket, &ket),
        dims: (d, d),
    })
}
