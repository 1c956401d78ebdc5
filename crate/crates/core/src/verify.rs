//! Numerical identity suites for the channel and capacity machinery.
//!
//! Each suite draws random fixtures (or walks a grid), evaluates both sides of
//! an identity, and records the worst deviation against a fixed tolerance.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::{
    bob_marginal_apply, correlated_apply, displacements, pauli_apply, twirl_alice, CorrelatedPauliSpec, KrausMap,
};
use crate::error::Result;
use crate::holevo::{achievability_ensemble, capacity_unitary, eig23, holevo_quantity, holevo_quantity_relative, EncodingEnsemble};
use crate::qmat::{partial_trace, pauli, shannon_entropy, von_neumann_entropy, CMatrix, Subsystem};
use crate::random::{random_correlated, random_density, random_unitary};
use crate::states::{phi_with_phase, DensityOperator};

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Points per axis for grid suites; random suites scale their sample counts with it.
    pub grid_density: usize,
    pub seed: u64,
    /// Perturb every channel's joint table before use (negative control).
    pub corrupt_channel: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            grid_density: 5,
            seed: 0,
            corrupt_channel: false,
        }
    }
}

impl VerifyConfig {
    /// Random samples at `d = 2`: 100 at the default density.
    fn samples_qubit(&self) -> usize {
        20 * self.grid_density.max(1)
    }

    /// Random samples at `d = 3`: 10 at the default density.
    fn samples_qutrit(&self) -> usize {
        2 * self.grid_density.max(1)
    }

    fn channel(&self, spec: CorrelatedPauliSpec) -> CorrelatedPauliSpec {
        if self.corrupt_channel {
            spec.tampered(0, 0.05)
        } else {
            spec
        }
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x100).wrapping_add(salt))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// First evaluation error, if any case failed to evaluate.
    pub error: Option<String>,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<24} cases={:<5} max_err={:.3e} tol={:.0e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.max_error,
            self.tolerance
        )?;
        if let Some(e) = &self.error {
            write!(f, " error: {e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            writeln!(f, "{s}")?;
        }
        let failed = self.suites.iter().filter(|s| !s.passed).count();
        write!(f, "{} suites, {} failed", self.suites.len(), failed)
    }
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    max_error: f64,
    error: Option<String>,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally {
            name,
            tolerance,
            cases: 0,
            max_error: 0.0,
            error: None,
        }
    }

    fn record(&mut self, deviation: Result<f64>) {
        self.cases += 1;
        match deviation {
            Ok(e) if e.is_nan() => self.max_error = f64::INFINITY,
            Ok(e) => self.max_error = self.max_error.max(e),
            Err(err) => {
                self.max_error = f64::INFINITY;
                self.error.get_or_insert_with(|| err.to_string());
            }
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name,
            cases: self.cases,
            passed: self.cases > 0 && self.error.is_none() && self.max_error <= self.tolerance,
            max_error: self.max_error,
            tolerance: self.tolerance,
            error: self.error,
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `(1/d²) Σ_i (V_i⊗𝟙) τ (V_i⊗𝟙)† = 𝟙/d ⊗ tr_a τ`.
pub fn hiroshima_identity(cfg: &VerifyConfig) -> SuiteReport {
    let mut t = Tally::new("hiroshima-identity", 1e-12);
    let mut rng = cfg.rng(1);
    for (d, n) in [(2, cfg.samples_qubit()), (3, cfg.samples_qutrit())] {
        for _ in 0..n {
            let tau = random_density(&mut rng, (d, d));
            t.record((|| {
                let lhs = twirl_alice(tau.matrix(), (d, d))?;
                let rhs = CMatrix::identity(d)
                    .scale(1.0 / d as f64)
                    .kron(&partial_trace(tau.matrix(), Subsystem::A, (d, d))?);
                Ok(lhs.max_abs_diff(&rhs))
            })());
        }
    }
    t.finish()
}

/// `tr_a Λ(ρ) = Λ_b(tr_a ρ)`, with `Λ_b` the single-leg marginal channel.
pub fn bob_marginal_identity(cfg: &VerifyConfig) -> SuiteReport {
    let mut t = Tally::new("bob-marginal-identity", 1e-12);
    let mut rng = cfg.rng(2);
    for (d, n) in [(2, cfg.samples_qubit()), (3, cfg.samples_qutrit())] {
        for _ in 0..n {
            let ch = cfg.channel(random_correlated(&mut rng, d));
            let rho = random_density(&mut rng, (d, d));
            t.record((|| {
                let lhs = partial_trace(correlated_apply(&ch, &rho)?.matrix(), Subsystem::A, (d, d))?;
                let rho_b = rho.reduced_b();
                let marginal = pauli_apply(ch.marginal(), &rho_b)?;
                let effective = bob_marginal_apply(&ch, &rho_b)?;
                Ok(lhs
                    .max_abs_diff(marginal.matrix())
                    .max(effective.matrix().max_abs_diff(marginal.matrix())))
            })());
        }
    }
    t.finish()
}

/// `(V⊗𝟙) Λ(ξ) (V⊗𝟙)† = Λ((V⊗𝟙) ξ (V⊗𝟙)†)` for every displacement `V`.
pub fn channel_covariance(cfg: &VerifyConfig) -> SuiteReport {
    let mut t = Tally::new("channel-covariance", 1e-10);
    let mut rng = cfg.rng(3);
    for (d, n) in [(2, cfg.samples_qubit() / 5), (3, cfg.samples_qutrit() / 2)] {
        for _ in 0..n.max(1) {
            let ch = cfg.channel(random_correlated(&mut rng, d));
            let xi = random_density(&mut rng, (d, d));
            t.record((|| {
                let out = correlated_apply(&ch, &xi)?;
                let mut worst: f64 = 0.0;
                for v in displacements(d) {
                    let big = v.kron(&CMatrix::identity(d));
                    let moved = DensityOperator::new(xi.matrix().conjugate_by(&big), (d, d))?;
                    let lhs = out.matrix().conjugate_by(&big);
                    let rhs = correlated_apply(&ch, &moved)?;
                    worst = worst.max(lhs.max_abs_diff(rhs.matrix()));
                }
                Ok(worst)
            })());
        }
    }
    t.finish()
}

/// `Λ(ρ) = Λ((σ₃⊗σ₃) ρ (σ₃⊗σ₃))` for the correlated quasi-classical qubit channel.
pub fn sigma3_invariance(cfg: &VerifyConfig) -> SuiteReport {
    let mut t = Tally::new("sigma3-invariance", 1e-10);
    let mut rng = cfg.rng(4);
    let zz = pauli(3).kron(&pauli(3));
    for _ in 0..cfg.samples_qubit() {
        let p = rng.gen::<f64>();
        let mu = rng.gen::<f64>();
        let rho = random_density(&mut rng, (2, 2));
        t.record((|| {
            let ch = cfg.channel(CorrelatedPauliSpec::quasi_classical(2, p, mu)?);
            let flipped = DensityOperator::new(rho.matrix().conjugate_by(&zz), (2, 2))?;
            let a = correlated_apply(&ch, &rho)?;
            let b = correlated_apply(&ch, &flipped)?;
            Ok(a.matrix().max_abs_diff(b.matrix()))
        })());
    }
    t.finish()
}

/// The equiprobable ensemble `{V_i U}` attains `log₂ d + S(Λ_b(ρ_b)) − S(Λ((U⊗𝟙)ρ(U⊗𝟙)†))`
/// for any unitary `U`.
pub fn lemma1_achievability(cfg: &VerifyConfig) -> SuiteReport {
    let mut t = Tally::new("achievability-equality", 1e-9);
    let mut rng = cfg.rng(5);
    for (d, n) in [(2, cfg.samples_qubit()), (3, cfg.samples_qutrit())] {
        for _ in 0..n {
            let ch = cfg.channel(random_correlated(&mut rng, d));
            let rho = random_density(&mut rng, (d, d));
            let u = random_unitary(&mut rng, d);
            t.record((|| {
                let ens = achievability_ensemble(&KrausMap::from_unitary(u.clone())?, d)?;
                let chi = holevo_quantity(&ens, &ch, &rho)?;
                let cap = capacity_unitary(&ch, &rho, &u)?;
                Ok((chi - cap.capacity_bits).abs())
            })());
        }
    }
    t.finish()
}

/// Closed-form spectrum against the numerically applied channel over an
/// `n⁴` grid in `(η, μ, p, φ)`.
pub fn eig23_agreement(cfg: &VerifyConfig) -> SuiteReport {
    let mut t = Tally::new("closed-form-spectrum", 1e-9);
    let n = cfg.grid_density.max(2);
    let unit = linspace(0.0, 1.0, n);
    let phases = linspace(0.0, 2.0 * PI, n);
    for &eta in &unit {
        for &mu in &unit {
            for &p in &unit {
                for &phi in &phases {
                    t.record((|| {
                        let ch = cfg.channel(CorrelatedPauliSpec::quasi_classical(2, p, mu)?);
                        let rho = phi_with_phase(phi).mix(eta, &DensityOperator::maximally_mixed((2, 2)))?;
                        let numeric = von_neumann_entropy(&correlated_apply(&ch, &rho)?)?;
                        Ok((numeric - shannon_entropy(&eig23(eta, mu, p, phi))).abs())
                    })());
                }
            }
        }
    }
    t.finish()
}

/// Entropy-difference and relative-entropy forms of the Holevo quantity agree,
/// and neither is negative.
pub fn holevo_two_forms(cfg: &VerifyConfig) -> SuiteReport {
    let mut t = Tally::new("holevo-two-forms", 1e-9);
    let mut rng = cfg.rng(6);
    for _ in 0..cfg.samples_qubit() / 2 {
        let ch = cfg.channel(random_correlated(&mut rng, 2));
        let rho = random_density(&mut rng, (2, 2));
        let k = rng.gen_range(2..=5);
        let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 0.01).collect();
        let total: f64 = raw.iter().sum();
        let unitaries: Vec<CMatrix> = (0..k).map(|_| random_unitary(&mut rng, 2)).collect();
        t.record((|| {
            let mut items: Vec<(f64, KrausMap)> = raw
                .iter()
                .zip(&unitaries)
                .map(|(w, u)| Ok((w / total, KrausMap::from_unitary(u.clone())?)))
                .collect::<Result<_>>()?;
            let residue = 1.0 - items.iter().map(|(w, _)| w).sum::<f64>();
            items[0].0 += residue;
            let ens = EncodingEnsemble::new(items)?;
            let a = holevo_quantity(&ens, &ch, &rho)?;
            let b = holevo_quantity_relative(&ens, &ch, &rho)?;
            let negativity = (-a).max(0.0);
            Ok((a - b).abs().max(negativity))
        })());
    }
    t.finish()
}

/// Runs every suite in a fixed order.
pub fn run_all(cfg: &VerifyConfig) -> VerifyReport {
    VerifyReport {
        suites: vec![
            hiroshima_identity(cfg),
            bob_marginal_identity(cfg),
            channel_covariance(cfg),
            sigma3_invariance(cfg),
            lemma1_achievability(cfg),
            eig23_agreement(cfg),
            holevo_two_forms(cfg),
        ],
    }
}
