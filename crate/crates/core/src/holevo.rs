//! Holevo quantities of encoded ensembles and dense coding capacities.
//!
//! For a correlated Pauli channel `Λ` and resource state `ρ`, the capacity
//! with encoder `enc` (a unitary or a pre-processing map on Alice's leg) is
//!
//! ```text
//! C = log₂ d + S(Λ_b(ρ_b)) − S(Λ(enc(ρ)))
//! ```
//!
//! when `enc` minimizes the output entropy. The functions here evaluate that
//! expression for a supplied encoder; the search lives in [`crate::optimize`].

use serde::Serialize;

use crate::channels::{bob_marginal_apply, correlated_apply, displacements, kraus_apply, CorrelatedPauliSpec, KrausMap, KRAUS_TOL};
use crate::error::{Error, Result};
use crate::qmat::{relative_entropy, shannon_entropy, von_neumann_entropy, CMatrix};
use crate::states::DensityOperator;

/// Ensemble probabilities must sum to one within this tolerance.
pub const ENSEMBLE_TOL: f64 = 1e-12;

/// Encoders applied on Alice's leg with their probabilities.
#[derive(Clone, Debug)]
pub struct EncodingEnsemble {
    items: Vec<(f64, KrausMap)>,
}

impl EncodingEnsemble {
    pub fn new(items: Vec<(f64, KrausMap)>) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::Validation("ensemble is empty".into()))?;
        let d = first.1.d_in();
        if items.iter().any(|(_, e)| e.d_in() != d || e.d_out() != d) {
            return Err(Error::Dimension("encoders must all map dimension d to d".into()));
        }
        if let Some((p, _)) = items.iter().find(|(p, _)| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::Validation(format!("invalid ensemble probability {p}")));
        }
        let total: f64 = items.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > ENSEMBLE_TOL {
            return Err(Error::Validation(format!(
                "ensemble probabilities sum to {total:.15}, expected 1"
            )));
        }
        Ok(EncodingEnsemble { items })
    }

    pub fn items(&self) -> &[(f64, KrausMap)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Channel outputs `Λ(enc_i(ρ))`, paired with their probabilities.
    fn outputs(&self, channel: &CorrelatedPauliSpec, rho: &DensityOperator) -> Result<Vec<(f64, DensityOperator)>> {
        self.items
            .iter()
            .map(|(p, enc)| Ok((*p, correlated_apply(channel, &kraus_apply(enc, rho)?)?)))
            .collect()
    }
}

fn average(outputs: &[(f64, DensityOperator)]) -> DensityOperator {
    let first = &outputs[0].1;
    let mut avg = CMatrix::zeros(first.dim(), first.dim());
    for (p, out) in outputs {
        avg.add_scaled(*p, out.matrix());
    }
    DensityOperator::from_channel_output(avg, first.dims())
}

/// `χ = S(Σ p_i Λ(ρ_i)) − Σ p_i S(Λ(ρ_i))` with `ρ_i = enc_i(ρ)`.
pub fn holevo_quantity(ensemble: &EncodingEnsemble, channel: &CorrelatedPauliSpec, rho: &DensityOperator) -> Result<f64> {
    let outputs = ensemble.outputs(channel, rho)?;
    let avg_entropy = von_neumann_entropy(&average(&outputs))?;
    let mut mean = 0.0;
    for (p, out) in &outputs {
        if *p > 0.0 {
            mean += p * von_neumann_entropy(out)?;
        }
    }
    Ok(avg_entropy - mean)
}

/// The same quantity as `Σ p_i S(Λ(ρ_i) ‖ Λ̄)`.
pub fn holevo_quantity_relative(
    ensemble: &EncodingEnsemble,
    channel: &CorrelatedPauliSpec,
    rho: &DensityOperator,
) -> Result<f64> {
    let outputs = ensemble.outputs(channel, rho)?;
    let avg = average(&outputs);
    let mut chi = 0.0;
    for (p, out) in &outputs {
        if *p > 0.0 {
            chi += p * relative_entropy(out, &avg)?;
        }
    }
    Ok(chi)
}

/// Serializable record of an encoder's Kraus operators, entries as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EncoderDescription {
    pub kind: EncoderKind,
    pub operators: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncoderKind {
    Unitary,
    Kraus,
}

impl EncoderDescription {
    pub fn of_unitary(u: &CMatrix) -> Self {
        EncoderDescription {
            kind: EncoderKind::Unitary,
            operators: vec![matrix_entries(u)],
        }
    }

    pub fn of_map(map: &KrausMap) -> Self {
        EncoderDescription {
            kind: EncoderKind::Kraus,
            operators: map.operators().iter().map(matrix_entries).collect(),
        }
    }
}

fn matrix_entries(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityReport {
    pub capacity_bits: f64,
    /// `S(Λ_b(ρ_b))`.
    pub bob_term_bits: f64,
    /// `S(Λ(enc(ρ)))` for the supplied minimizing encoder.
    pub min_entropy_bits: f64,
    pub encoder: EncoderDescription,
}

impl CapacityReport {
    fn assemble(d: usize, bob_term_bits: f64, min_entropy_bits: f64, encoder: EncoderDescription) -> Self {
        CapacityReport {
            capacity_bits: (d as f64).log2() + bob_term_bits - min_entropy_bits,
            bob_term_bits,
            min_entropy_bits,
            encoder,
        }
    }
}

fn check_bipartite(channel: &CorrelatedPauliSpec, rho: &DensityOperator) -> Result<usize> {
    let d = channel.d();
    if rho.dims() != (d, d) {
        return Err(Error::Dimension(format!(
            "channel acts on ({d},{d}), state has dims {:?}",
            rho.dims()
        )));
    }
    Ok(d)
}

/// `S(Λ_b(tr_a ρ))`.
pub fn bob_term(channel: &CorrelatedPauliSpec, rho: &DensityOperator) -> Result<f64> {
    von_neumann_entropy(&bob_marginal_apply(channel, &rho.reduced_b())?)
}

/// `S(Λ((U ⊗ 𝟙) ρ (U ⊗ 𝟙)†))`.
pub fn output_entropy_unitary(channel: &CorrelatedPauliSpec, rho: &DensityOperator, u: &CMatrix) -> Result<f64> {
    output_entropy_map(channel, rho, &KrausMap::from_unitary(u.clone())?)
}

/// `S(Λ((Γ ⊗ id)(ρ)))`.
pub fn output_entropy_map(channel: &CorrelatedPauliSpec, rho: &DensityOperator, gamma: &KrausMap) -> Result<f64> {
    von_neumann_entropy(&correlated_apply(channel, &kraus_apply(gamma, rho)?)?)
}

/// Unitary-encoding capacity for a caller-supplied minimizing unitary.
pub fn capacity_unitary(channel: &CorrelatedPauliSpec, rho: &DensityOperator, u_min: &CMatrix) -> Result<CapacityReport> {
    let d = check_bipartite(channel, rho)?;
    if u_min.rows() != d || u_min.cols() != d {
        return Err(Error::Dimension(format!(
            "encoder is {}x{}, Alice's leg has dimension {d}",
            u_min.rows(),
            u_min.cols()
        )));
    }
    let deviation = u_min.unitarity_deviation();
    if deviation > KRAUS_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let min_entropy = output_entropy_unitary(channel, rho, u_min)?;
    Ok(CapacityReport::assemble(
        d,
        bob_term(channel, rho)?,
        min_entropy,
        EncoderDescription::of_unitary(u_min),
    ))
}

/// Non-unitary capacity for a caller-supplied minimizing pre-processing map.
///
/// The Bob term uses the marginal of the original `ρ`; a map on Alice's
/// leg does not change it.
pub fn capacity_nonunitary(channel: &CorrelatedPauliSpec, rho: &DensityOperator, gamma_min: &KrausMap) -> Result<CapacityReport> {
    let d = check_bipartite(channel, rho)?;
    if gamma_min.d_in() != d || gamma_min.d_out() != d {
        return Err(Error::Dimension(format!(
            "pre-processing maps {} to {}, Alice's leg has dimension {d}",
            gamma_min.d_in(),
            gamma_min.d_out()
        )));
    }
    let deviation = gamma_min.completeness_deviation();
    if deviation > KRAUS_TOL {
        return Err(Error::Completeness { deviation });
    }
    let min_entropy = output_entropy_map(channel, rho, gamma_min)?;
    Ok(CapacityReport::assemble(
        d,
        bob_term(channel, rho)?,
        min_entropy,
        EncoderDescription::of_map(gamma_min),
    ))
}

/// Equiprobable ensemble `{1/d², V_i ∘ enc}` over all `d²` displacements.
pub fn achievability_ensemble(encoder: &KrausMap, d: usize) -> Result<EncodingEnsemble> {
    if encoder.d_in() != d || encoder.d_out() != d {
        return Err(Error::Dimension(format!(
            "encoder maps {} to {}, expected {d}",
            encoder.d_in(),
            encoder.d_out()
        )));
    }
    let w = 1.0 / (d * d) as f64;
    let items = displacements(d)
        .iter()
        .map(|v| Ok((w, encoder.then_unitary(v)?)))
        .collect::<Result<Vec<_>>>()?;
    EncodingEnsemble::new(items)
}

/// Closed-form spectrum of the correlated quasi-classical qubit channel
/// applied to `η|Φ⟩⟨Φ| + (1−η)/4 · 𝟙` with `|Φ⟩ = (|00⟩ + e^{iφ}|11⟩)/√2`.
///
/// Returned as `[ν₁, ν₂, ν₃, ν₄]` with `ν₃ ≥ ν₄`.
pub fn eig23(eta: f64, mu: f64, p: f64, phi: f64) -> [f64; 4] {
    let pq = p * (1.0 - p);
    let floor = (1.0 - eta) / 4.0;
    let flat = eta * (1.0 - mu) * pq + floor;
    let root = (mu * mu * (1.0 - 4.0 * pq * phi.sin().powi(2))).max(0.0).sqrt();
    let center = 1.0 - 2.0 * (1.0 - mu) * pq;
    [
        flat,
        flat,
        eta / 2.0 * (center + root) + floor,
        eta / 2.0 * (center - root) + floor,
    ]
}

/// Unitary capacity of a Werner state through the correlated quasi-classical
/// qubit channel, `2 − H(eig23(η, μ, p, 0))`.
pub fn analytic_capacity_quasi(eta: f64, mu: f64, p: f64) -> f64 {
    2.0 - shannon_entropy(&eig23(eta, mu, p, 0.0))
}

/// Information transmitted with the qubit-reset pre-processing on a Bell
/// pair: `1 + p log₂ p + (1−p) log₂(1−p)`, independent of `μ`.
pub fn transferred_info_preprocessed(p: f64) -> f64 {
    1.0 - shannon_entropy(&[p, 1.0 - p])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::PauliChannelSpec;
    use crate::qmat::{expi_hermitian, herm_eig, pauli};
    use crate::states::{bell_phi_plus, phi_with_phase, werner};
    use approx::assert_abs_diff_eq;

    fn pauli_ensemble() -> EncodingEnsemble {
        let items = (0..4)
            .map(|i| (0.25, KrausMap::from_unitary(pauli(i)).unwrap()))
            .collect();
        EncodingEnsemble::new(items).unwrap()
    }

    #[test]
    fn single_element_ensemble_has_zero_chi() {
        let ens = EncodingEnsemble::new(vec![(1.0, KrausMap::identity(2))]).unwrap();
        let ch = CorrelatedPauliSpec::quasi_classical(2, 0.2, 0.5).unwrap();
        let chi = holevo_quantity(&ens, &ch, &werner(0.7).unwrap()).unwrap();
        assert_abs_diff_eq!(chi, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pauli_encodings_noiseless_give_two_bits() {
        let ch = CorrelatedPauliSpec::noiseless(2).unwrap();
        let chi = holevo_quantity(&pauli_ensemble(), &ch, &bell_phi_plus()).unwrap();
        assert_abs_diff_eq!(chi, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn pauli_encodings_independent_dephasing_give_one_bit() {
        let ch = CorrelatedPauliSpec::quasi_classical(2, 0.0, 0.0).unwrap();
        let chi = holevo_quantity(&pauli_ensemble(), &ch, &bell_phi_plus()).unwrap();
        assert_abs_diff_eq!(chi, 1.0, epsilon = 1e-10);
        let rel = holevo_quantity_relative(&pauli_ensemble(), &ch, &bell_phi_plus()).unwrap();
        assert_abs_diff_eq!(rel, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn ensemble_validation() {
        assert!(EncodingEnsemble::new(vec![]).is_err());
        assert!(EncodingEnsemble::new(vec![(0.5, KrausMap::identity(2))]).is_err());
        assert!(EncodingEnsemble::new(vec![(0.5, KrausMap::identity(2)), (0.5, KrausMap::identity(3))]).is_err());
        assert!(EncodingEnsemble::new(vec![(1.5, KrausMap::identity(2)), (-0.5, KrausMap::identity(2))]).is_err());
    }

    #[test]
    fn capacity_unitary_examples() {
        let full = CorrelatedPauliSpec::fully_correlated(PauliChannelSpec::quasi_classical(2, 0.3).unwrap()).unwrap();
        let r = capacity_unitary(&full, &bell_phi_plus(), &CMatrix::identity(2)).unwrap();
        assert_abs_diff_eq!(r.capacity_bits, 2.0, epsilon = 1e-9);

        let indep = CorrelatedPauliSpec::quasi_classical(2, 0.0, 0.0).unwrap();
        let r = capacity_unitary(&indep, &bell_phi_plus(), &CMatrix::identity(2)).unwrap();
        assert_abs_diff_eq!(r.capacity_bits, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.bob_term_bits, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.min_entropy_bits, 1.0, epsilon = 1e-10);

        let ch = CorrelatedPauliSpec::quasi_classical(2, 0.4, 0.3).unwrap();
        let r = capacity_unitary(&ch, &werner(0.0).unwrap(), &CMatrix::identity(2)).unwrap();
        assert_abs_diff_eq!(r.capacity_bits, 0.0, epsilon = 1e-10);
        assert_eq!(r.capacity_bits, 1.0 + r.bob_term_bits - r.min_entropy_bits);

        assert!(matches!(
            capacity_unitary(&ch, &bell_phi_plus(), &CMatrix::diag_real(&[1.0, 0.9])),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn capacity_nonunitary_examples() {
        let ch = CorrelatedPauliSpec::quasi_classical(2, 0.2, 0.6).unwrap();
        let rho = werner(0.8).unwrap();
        let a = capacity_nonunitary(&ch, &rho, &KrausMap::identity(2)).unwrap();
        let b = capacity_unitary(&ch, &rho, &CMatrix::identity(2)).unwrap();
        assert_abs_diff_eq!(a.capacity_bits, b.capacity_bits, epsilon = 1e-12);

        for p in [0.0, 0.05, 0.3, 0.5, 0.81] {
            for mu in [0.0, 0.5, 1.0] {
                let ch = CorrelatedPauliSpec::quasi_classical(2, p, mu).unwrap();
                let r = capacity_nonunitary(&ch, &bell_phi_plus(), &KrausMap::qubit_reset()).unwrap();
                assert_abs_diff_eq!(r.capacity_bits, transferred_info_preprocessed(p), epsilon = 1e-10);
            }
        }
        let ch = CorrelatedPauliSpec::quasi_classical(2, 0.5, 0.0).unwrap();
        let r = capacity_nonunitary(&ch, &bell_phi_plus(), &KrausMap::qubit_reset()).unwrap();
        assert_abs_diff_eq!(r.capacity_bits, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn achievability_ensemble_shape() {
        let ens = achievability_ensemble(&KrausMap::identity(2), 2).unwrap();
        assert_eq!(ens.len(), 4);
        for ((p, e), v) in ens.items().iter().zip(displacements(2)) {
            assert_eq!(*p, 0.25);
            assert!(e.operators()[0].max_abs_diff(&v) < 1e-15);
        }
        let ens = achievability_ensemble(&KrausMap::identity(3), 3).unwrap();
        assert_eq!(ens.len(), 9);
        assert!(ens.items().iter().all(|(p, _)| (*p - 1.0 / 9.0).abs() < 1e-15));
        assert!(achievability_ensemble(&KrausMap::identity(2), 3).is_err());
    }

    #[test]
    fn achievability_matches_capacity_formula() {
        let u = expi_hermitian(&(&pauli(1).scale(0.3) + &pauli(2).scale(-0.8))).unwrap();
        let ch = CorrelatedPauliSpec::quasi_classical(2, 0.12, 0.45).unwrap();
        let rho = werner(0.9).unwrap();
        let ens = achievability_ensemble(&KrausMap::from_unitary(u.clone()).unwrap(), 2).unwrap();
        let chi = holevo_quantity(&ens, &ch, &rho).unwrap();
        let cap = capacity_unitary(&ch, &rho, &u).unwrap();
        assert_abs_diff_eq!(chi, cap.capacity_bits, epsilon = 1e-9);
    }

    #[test]
    fn eig23_examples() {
        let e = eig23(1.0, 1.0, 0.37, 0.0);
        for (a, b) in e.iter().zip([0.0, 0.0, 1.0, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        for x in eig23(0.0, 0.4, 0.2, 1.1) {
            assert_abs_diff_eq!(x, 0.25, epsilon = 1e-15);
        }
        let e = eig23(1.0, 0.0, 0.1, 0.0);
        for (a, b) in e.iter().zip([0.09, 0.09, 0.41, 0.41]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let e = eig23(0.6, 0.3, 0.2, 0.9);
        assert_abs_diff_eq!(e.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn eig23_matches_channel_output_spectrum() {
        let (eta, mu, p, phi) = (1.0, 0.0, 0.1, 0.0);
        let ch = CorrelatedPauliSpec::quasi_classical(2, p, mu).unwrap();
        let rho = phi_with_phase(phi).mix(eta, &DensityOperator::maximally_mixed((2, 2))).unwrap();
        let out = correlated_apply(&ch, &rho).unwrap();
        let mut numeric = herm_eig(out.matrix()).unwrap().eigenvalues;
        let mut analytic = eig23(eta, mu, p, phi).to_vec();
        numeric.sort_by(f64::total_cmp);
        analytic.sort_by(f64::total_cmp);
        for (a, b) in numeric.iter().zip(&analytic) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn analytic_capacity_examples() {
        for p in [0.0, 0.2, 0.7, 1.0] {
            assert_abs_diff_eq!(analytic_capacity_quasi(1.0, 1.0, p), 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(analytic_capacity_quasi(0.0, 0.5, p), 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(analytic_capacity_quasi(1.0, 0.0, 0.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn transferred_info_examples() {
        assert_eq!(transferred_info_preprocessed(0.0), 1.0);
        assert_eq!(transferred_info_preprocessed(1.0), 1.0);
        assert_abs_diff_eq!(transferred_info_preprocessed(0.5), 0.0, epsilon = 1e-15);
        // 1 − H2(0.05) = 0.7136030428…
        assert_abs_diff_eq!(transferred_info_preprocessed(0.05), 0.71360, epsilon = 1e-4);
    }

    #[test]
    fn report_serializes() {
        let ch = CorrelatedPauliSpec::quasi_classical(2, 0.1, 0.1).unwrap();
        let r = capacity_nonunitary(&ch, &bell_phi_plus(), &KrausMap::qubit_reset()).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["encoder"]["kind"], "kraus");
        assert_eq!(json["encoder"]["operators"][0][0][1], serde_json::json!([1.0, 0.0]));
    }
}
