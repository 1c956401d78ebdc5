//! Random fixtures for identity checks: states, unitaries and channels.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::{CorrelatedPauliSpec, PauliChannelSpec};
use crate::qmat::CMatrix;
use crate::states::DensityOperator;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Full-rank density operator `G G† / tr(G G†)` from a square Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dims: (usize, usize)) -> DensityOperator {
    let n = dims.0 * dims.1;
    let g = ginibre(rng, n, n);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(m.scale(1.0 / tr), dims).expect("Wishart matrix is a valid state")
}

/// Pure state with Gaussian amplitudes.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, dims: (usize, usize)) -> DensityOperator {
    let ket: Vec<Complex64> = (0..dims.0 * dims.1).map(|_| gaussian(rng)).collect();
    DensityOperator::pure(&ket, dims).expect("non-zero ket")
}

/// Unitary from Gram–Schmidt on the columns of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        for q in &cols {
            let overlap: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= overlap * qi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    CMatrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Pauli channel with a random probability table.
pub fn random_pauli_spec<R: Rng + ?Sized>(rng: &mut R, d: usize) -> PauliChannelSpec {
    let raw: Vec<f64> = (0..d * d).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let mut q: Vec<Vec<f64>> = raw.chunks(d).map(|row| row.iter().map(|x| x / total).collect()).collect();
    // Absorb the rounding residue so the table sums to one.
    let residue = 1.0 - q.iter().flatten().sum::<f64>();
    q[0][0] += residue;
    PauliChannelSpec::new(q).expect("normalized table")
}

pub fn random_correlated<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CorrelatedPauliSpec {
    let mu = rng.gen::<f64>();
    CorrelatedPauliSpec::new(random_pauli_spec(rng, d), mu).expect("valid spec")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixtures_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 2..=3 {
            let u = random_unitary(&mut rng, d);
            assert!(u.unitarity_deviation() < 1e-12);
            let rho = random_density(&mut rng, (d, d));
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
            let psi = random_pure(&mut rng, (d, d));
            assert!((psi.purity() - 1.0).abs() < 1e-12);
            let ch = random_correlated(&mut rng, d);
            assert!((ch.joint().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
