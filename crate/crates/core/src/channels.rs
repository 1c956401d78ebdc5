//! Displacement operators, Pauli channels and their correlated two-leg form,
//! plus Kraus maps acting on Alice's leg.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::qmat::CMatrix;
use crate::states::DensityOperator;

/// Probability tables must sum to one within this tolerance.
pub const PROB_TOL: f64 = 1e-12;

/// Completeness tolerance for Kraus maps and unitarity checks.
pub const KRAUS_TOL: f64 = 1e-9;

/// Displacement operator `V_mn = Σ_k e^{2πikn/d} |k⟩⟨k+m mod d|`.
///
/// For `d = 2`: `V_00 = 𝟙`, `V_10 = σ₁`, `V_01 = σ₃`, `V_11 = iσ₂`.
pub fn displacement(d: usize, m: usize, n: usize) -> Result<CMatrix> {
    if d == 0 || m >= d || n >= d {
        return Err(Error::Dimension(format!(
            "displacement index ({m},{n}) out of range for d = {d}"
        )));
    }
    let mut v = CMatrix::zeros(d, d);
    for k in 0..d {
        let angle = 2.0 * PI * ((k * n) % d) as f64 / d as f64;
        v[(k, (k + m) % d)] = Complex64::from_polar(1.0, angle);
    }
    Ok(v)
}

/// All `d²` displacement operators in the order `i = m·d + n`.
pub fn displacements(d: usize) -> Vec<CMatrix> {
    (0..d * d)
        .map(|i| displacement(d, i / d, i % d).expect("indices in range"))
        .collect()
}

/// Single-leg Pauli channel: `q[m][n]` is the probability of `V_mn`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliChannelSpec {
    d: usize,
    q: Vec<Vec<f64>>,
}

impl PauliChannelSpec {
    pub fn new(q: Vec<Vec<f64>>) -> Result<Self> {
        let d = q.len();
        if d == 0 || q.iter().any(|row| row.len() != d) {
            return Err(Error::Dimension("probability table must be square and non-empty".into()));
        }
        if let Some(&bad) = q.iter().flatten().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Validation(format!("negative or non-finite probability {bad}")));
        }
        let total: f64 = q.iter().flatten().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::Validation(format!(
                "probabilities sum to {total:.15}, expected 1"
            )));
        }
        Ok(PauliChannelSpec { d, q })
    }

    /// Quasi-classical channel: `q[0][n] = (1−p)/d` and `q[m≠0][n] = p/(d(d−1))`.
    pub fn quasi_classical(d: usize, p: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::Dimension(format!("quasi-classical channel needs d >= 2, got {d}")));
        }
        check_range("p", p, 0.0, 1.0, "[0, 1]")?;
        let df = d as f64;
        let q = (0..d)
            .map(|m| {
                let v = if m == 0 { (1.0 - p) / df } else { p / (df * (df - 1.0)) };
                vec![v; d]
            })
            .collect();
        Self::new(q)
    }

    /// All weight on `V_00`.
    pub fn noiseless(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("d must be positive".into()));
        }
        let mut q = vec![vec![0.0; d]; d];
        q[0][0] = 1.0;
        Self::new(q)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn prob(&self, m: usize, n: usize) -> f64 {
        self.q[m][n]
    }
}

/// `Σ_mn q_mn V_mn ρ V_mn†` on a single `d`-dimensional system.
pub fn pauli_apply(spec: &PauliChannelSpec, rho: &DensityOperator) -> Result<DensityOperator> {
    if rho.dim() != spec.d {
        return Err(Error::Dimension(format!(
            "channel acts on d = {}, state has dimension {}",
            spec.d,
            rho.dim()
        )));
    }
    let out = weighted_conjugations(
        rho.matrix(),
        displacements(spec.d)
            .into_iter()
            .enumerate()
            .map(|(i, v)| (spec.q[i / spec.d][i % spec.d], v)),
    );
    Ok(DensityOperator::from_channel_output(out, (spec.d, 1)))
}

fn weighted_conjugations(rho: &CMatrix, terms: impl IntoIterator<Item = (f64, CMatrix)>) -> CMatrix {
    let mut out = CMatrix::zeros(rho.rows(), rho.cols());
    for (w, op) in terms {
        if w != 0.0 {
            out.add_scaled(w, &rho.conjugate_by(&op));
        }
    }
    out
}

/// Correlated two-leg Pauli channel with correlation degree `μ`.
///
/// Both legs share one marginal table; the joint probability of
/// `V_mn ⊗ V_m̃ñ` is `(1−μ) q_mn q_m̃ñ + μ q_mn δ_mm̃ δ_nñ`, materialized
/// with index `((m·d + n)·d + m̃)·d + ñ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatedPauliSpec {
    marginal: PauliChannelSpec,
    mu: f64,
    joint: Vec<f64>,
}

impl CorrelatedPauliSpec {
    pub fn new(marginal: PauliChannelSpec, mu: f64) -> Result<Self> {
        check_range("mu", mu, 0.0, 1.0, "[0, 1]")?;
        let d = marginal.d;
        let d2 = d * d;
        let mut joint = vec![0.0; d2 * d2];
        for a in 0..d2 {
            let qa = marginal.q[a / d][a % d];
            for b in 0..d2 {
                let qb = marginal.q[b / d][b % d];
                let diag = if a == b { qa } else { 0.0 };
                joint[a * d2 + b] = (1.0 - mu) * qa * qb + mu * diag;
            }
        }
        let total: f64 = joint.iter().sum();
        if (total - 1.0).abs() > PROB_TOL || joint.iter().any(|&x| x < 0.0) {
            return Err(Error::Validation(format!(
                "joint table is not a distribution (sum {total:.15})"
            )));
        }
        Ok(CorrelatedPauliSpec { marginal, mu, joint })
    }

    /// Correlated quasi-classical channel.
    pub fn quasi_classical(d: usize, p: f64, mu: f64) -> Result<Self> {
        Self::new(PauliChannelSpec::quasi_classical(d, p)?, mu)
    }

    /// `μ = 1`: identical displacements on both legs.
    pub fn fully_correlated(marginal: PauliChannelSpec) -> Result<Self> {
        Self::new(marginal, 1.0)
    }

    pub fn noiseless(d: usize) -> Result<Self> {
        Self::new(PauliChannelSpec::noiseless(d)?, 0.0)
    }

    pub fn marginal(&self) -> &PauliChannelSpec {
        &self.marginal
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn d(&self) -> usize {
        self.marginal.d
    }

    pub fn joint(&self) -> &[f64] {
        &self.joint
    }

    /// Probability of `V_{a} ⊗ V_{b}` with `a = m·d + n`, `b = m̃·d + ñ`.
    pub fn joint_prob(&self, a: usize, b: usize) -> f64 {
        let d2 = self.d() * self.d();
        self.joint[a * d2 + b]
    }

    /// Bob's effective single-leg table `Σ_mn q_{mn m̃ñ}`.
    pub fn bob_marginal_table(&self) -> Vec<f64> {
        let d2 = self.d() * self.d();
        (0..d2)
            .map(|b| (0..d2).map(|a| self.joint[a * d2 + b]).sum())
            .collect()
    }

    /// The Kraus decomposition as `(probability, V_a ⊗ V_b)` pairs with non-zero weight.
    pub fn terms(&self) -> Vec<(f64, CMatrix)> {
        let d = self.d();
        let d2 = d * d;
        let ops = displacements(d);
        let mut out = Vec::new();
        for a in 0..d2 {
            for b in 0..d2 {
                let w = self.joint[a * d2 + b];
                if w != 0.0 {
                    out.push((w, ops[a].kron(&ops[b])));
                }
            }
        }
        out
    }

    /// Perturbs one joint-table entry without revalidating. Test hook for
    /// negative controls of the identity checks.
    #[doc(hidden)]
    pub fn tampered(mut self, index: usize, delta: f64) -> Self {
        self.joint[index] += delta;
        self
    }
}

/// `Σ q_{mnm̃ñ} (V_mn ⊗ V_m̃ñ) ρ (V_mn ⊗ V_m̃ñ)†`.
pub fn correlated_apply(spec: &CorrelatedPauliSpec, rho: &DensityOperator) -> Result<DensityOperator> {
    let d = spec.d();
    if rho.dims() != (d, d) {
        return Err(Error::Dimension(format!(
            "correlated channel acts on ({d},{d}), state has dims {:?}",
            rho.dims()
        )));
    }
    let out = weighted_conjugations(rho.matrix(), spec.terms());
    Ok(DensityOperator::from_channel_output(out, (d, d)))
}

/// Bob's effective channel: the single-leg Pauli channel whose table is the
/// marginal of the joint table over Alice's indices.
pub fn bob_marginal_apply(spec: &CorrelatedPauliSpec, rho_b: &DensityOperator) -> Result<DensityOperator> {
    let d = spec.d();
    if rho_b.dim() != d {
        return Err(Error::Dimension(format!(
            "Bob's channel acts on d = {d}, state has dimension {}",
            rho_b.dim()
        )));
    }
    let table = spec.bob_marginal_table();
    let out = weighted_conjugations(rho_b.matrix(), table.into_iter().zip(displacements(d)));
    Ok(DensityOperator::from_channel_output(out, (d, 1)))
}

/// Uniform twirl of Alice's leg, `(1/d²) Σ_i (V_i ⊗ 𝟙) τ (V_i ⊗ 𝟙)†`.
pub fn twirl_alice(tau: &CMatrix, dims: (usize, usize)) -> Result<CMatrix> {
    let (da, db) = dims;
    if !tau.is_square() || tau.rows() != da * db {
        return Err(Error::Dimension(format!("operator does not match dims {dims:?}")));
    }
    let id_b = CMatrix::identity(db);
    let w = 1.0 / (da * da) as f64;
    Ok(weighted_conjugations(
        tau,
        displacements(da).into_iter().map(|v| (w, v.kron(&id_b))),
    ))
}

/// Completely positive trace-preserving map given by Kraus operators
/// `E_k: ℂ^{d_in} → ℂ^{d_out}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausMap {
    d_in: usize,
    d_out: usize,
    operators: Vec<CMatrix>,
}

impl KrausMap {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::Validation("Kraus map needs at least one operator".into()))?;
        let (d_out, d_in) = (first.rows(), first.cols());
        if operators.iter().any(|e| e.rows() != d_out || e.cols() != d_in) {
            return Err(Error::Dimension("Kraus operators have differing shapes".into()));
        }
        let mut sum = CMatrix::zeros(d_in, d_in);
        for e in &operators {
            sum.add_scaled(1.0, &(&e.adjoint() * e));
        }
        let deviation = sum.max_abs_diff(&CMatrix::identity(d_in));
        if deviation > KRAUS_TOL {
            return Err(Error::Completeness { deviation });
        }
        Ok(KrausMap {
            d_in,
            d_out,
            operators,
        })
    }

    pub fn identity(d: usize) -> Self {
        KrausMap {
            d_in: d,
            d_out: d,
            operators: vec![CMatrix::identity(d)],
        }
    }

    pub fn from_unitary(u: CMatrix) -> Result<Self> {
        let deviation = u.unitarity_deviation();
        if deviation > KRAUS_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Self::new(vec![u])
    }

    /// Qubit reset `E₁ = |0⟩⟨1|`, `E₂ = |0⟩⟨0|`; sends Alice's half of a
    /// Bell pair to `|0⟩⟨0| ⊗ 𝟙/2`.
    pub fn qubit_reset() -> Self {
        let mut e1 = CMatrix::zeros(2, 2);
        e1[(0, 1)] = Complex64::new(1.0, 0.0);
        let mut e2 = CMatrix::zeros(2, 2);
        e2[(0, 0)] = Complex64::new(1.0, 0.0);
        KrausMap {
            d_in: 2,
            d_out: 2,
            operators: vec![e1, e2],
        }
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    /// `‖Σ E_k†E_k − 𝟙‖_max`.
    pub fn completeness_deviation(&self) -> f64 {
        let mut sum = CMatrix::zeros(self.d_in, self.d_in);
        for e in &self.operators {
            sum.add_scaled(1.0, &(&e.adjoint() * e));
        }
        sum.max_abs_diff(&CMatrix::identity(self.d_in))
    }

    /// The composed map `X ↦ V Γ(X) V†`, i.e. Kraus operators `V E_k`.
    pub fn then_unitary(&self, v: &CMatrix) -> Result<KrausMap> {
        if v.rows() != self.d_out || v.cols() != self.d_out {
            return Err(Error::Dimension(format!(
                "{}x{} unitary cannot follow a map with output dimension {}",
                v.rows(),
                v.cols(),
                self.d_out
            )));
        }
        Ok(KrausMap {
            d_in: self.d_in,
            d_out: self.d_out,
            operators: self.operators.iter().map(|e| v * e).collect(),
        })
    }

    /// `(Γ ⊗ id)(ρ)`, with `Γ` on Alice's leg.
    pub fn apply_on_alice(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        kraus_apply(self, rho)
    }
}

/// `Σ_k (E_k ⊗ 𝟙) ρ (E_k ⊗ 𝟙)†`.
pub fn kraus_apply(map: &KrausMap, rho: &DensityOperator) -> Result<DensityOperator> {
    let (da, db) = rho.dims();
    if map.d_in != da {
        return Err(Error::Dimension(format!(
            "map acts on dimension {}, Alice's leg has dimension {da}",
            map.d_in
        )));
    }
    let deviation = map.completeness_deviation();
    if deviation > KRAUS_TOL {
        return Err(Error::Completeness { deviation });
    }
    let id_b = CMatrix::identity(db);
    let mut out = CMatrix::zeros(map.d_out * db, map.d_out * db);
    for e in &map.operators {
        let big = e.kron(&id_b);
        out.add_scaled(1.0, &(&(&big * rho.matrix()) * &big.adjoint()));
    }
    Ok(DensityOperator::from_channel_output(out, (map.d_out, db)))
}

/// JSON form of a channel:
/// `{"type": "quasi-classical"|"pauli", "d": int, "p": float | "q": [[float]], "mu": float}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ChannelConfig {
    #[serde(rename = "quasi-classical")]
    QuasiClassical { d: usize, p: f64, mu: f64 },
    #[serde(rename = "pauli")]
    Pauli { d: usize, q: Vec<Vec<f64>>, mu: f64 },
}

impl ChannelConfig {
    pub fn build(&self) -> Result<CorrelatedPauliSpec> {
        match self {
            ChannelConfig::QuasiClassical { d, p, mu } => CorrelatedPauliSpec::quasi_classical(*d, *p, *mu),
            ChannelConfig::Pauli { d, q, mu } => {
                let spec = PauliChannelSpec::new(q.clone())?;
                if spec.d() != *d {
                    return Err(Error::Dimension(format!(
                        "\"d\" is {d} but \"q\" is {0}x{0}",
                        spec.d()
                    )));
                }
                CorrelatedPauliSpec::new(spec, *mu)
            }
        }
    }
}

impl From<&CorrelatedPauliSpec> for ChannelConfig {
    fn from(spec: &CorrelatedPauliSpec) -> Self {
        ChannelConfig::Pauli {
            d: spec.d(),
            q: spec.marginal.q.clone(),
            mu: spec.mu,
        }
    }
}
