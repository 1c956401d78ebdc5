//! Minimization of the channel-output entropy over encoders on Alice's leg,
//! and root finding for the unitary/pre-processed crossover.
//!
//! Both searches are seeded multi-start Nelder–Mead runs. Unitaries are
//! parametrized as `U = exp(iH)` with `H` Hermitian (`d²` reals). CPTP maps
//! are parametrized by a `(d·d_env) x d` complex matrix `M` whose polar
//! factor `W = M (M†M)^{-1/2}` is an isometry; the `d_env` stacked `d x d`
//! blocks of `W` are the Kraus operators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{CorrelatedPauliSpec, KrausMap};
use crate::error::{Error, Result};
use crate::holevo::{analytic_capacity_quasi, output_entropy_map, transferred_info_preprocessed};
use crate::qmat::{expi_hermitian, herm_eig, CMatrix};
use crate::states::DensityOperator;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when the spread of objective values over the simplex falls below this.
    pub ftol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 16,
            max_iters: 2000,
            ftol: 1e-10,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::Validation("restarts and max_iters must be positive".into()));
        }
        if !(self.ftol > 0.0) || !self.ftol.is_finite() {
            return Err(Error::Validation(format!("ftol must be positive, got {}", self.ftol)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct OptimResult {
    pub entropy_bits: f64,
    pub parameters: Vec<f64>,
    pub encoder: KrausMap,
    pub converged: bool,
    /// Objective evaluations summed over all restarts.
    pub evaluations: usize,
    /// Index of the restart that produced the result.
    pub restart: usize,
}

impl OptimResult {
    /// The encoder as a unitary, when it has a single Kraus operator.
    pub fn unitary(&self) -> Option<&CMatrix> {
        match self.encoder.operators() {
            [u] if u.rows() == u.cols() => Some(u),
            _ => None,
        }
    }
}

struct LocalMin {
    x: Vec<f64>,
    fx: f64,
    converged: bool,
    evaluations: usize,
}

/// Nelder–Mead with standard coefficients. Polishes by rebuilding the simplex
/// around the incumbent until a rebuild no longer improves it by `ftol`.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, max_iters: usize, ftol: f64) -> LocalMin {
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0);
    let mut iters = 0;
    let mut converged = false;
    let mut step = step;

    while iters < max_iters {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((best_x.clone(), best_f));
        for i in 0..n {
            let mut x = best_x.clone();
            x[i] += step;
            let fx = eval(&x);
            simplex.push((x, fx));
        }
        let start_f = best_f;
        converged = false;

        while iters < max_iters {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[n].1 - simplex[0].1 <= ftol {
                converged = true;
                break;
            }
            iters += 1;
            let centroid: Vec<f64> = (0..n)
                .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let xr = along(1.0);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(2.0);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let xc = along(0.5);
                    let fc = eval(&xc);
                    (xc, fc)
                } else {
                    let xc = along(-0.5);
                    let fc = eval(&xc);
                    (xc, fc)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let x_best = simplex[0].0.clone();
                    for (x, fx) in simplex.iter_mut().skip(1) {
                        for (xi, bi) in x.iter_mut().zip(&x_best) {
                            *xi = bi + 0.5 * (*xi - bi);
                        }
                        *fx = eval(x);
                    }
                }
            }
        }

        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < best_f {
            best_x = simplex[0].0.clone();
            best_f = simplex[0].1;
        }
        if !converged || start_f - best_f <= ftol {
            break;
        }
        step = (step * 0.1).max(1e-6);
    }

    LocalMin {
        x: best_x,
        fx: best_f,
        converged,
        evaluations,
    }
}

/// `H` from `d²` reals: `d` diagonal entries, then `(re, im)` for each `i < j`.
pub fn hermitian_from_params(d: usize, params: &[f64]) -> Result<CMatrix> {
    if params.len() != d * d {
        return Err(Error::Dimension(format!(
            "{} parameters cannot define a {d}x{d} Hermitian matrix",
            params.len()
        )));
    }
    let mut h = CMatrix::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = Complex64::new(params[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = Complex64::new(params[k], params[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    Ok(h)
}

/// `exp(iH)` for the Hermitian matrix encoded by `params`.
pub fn unitary_from_params(d: usize, params: &[f64]) -> Result<CMatrix> {
    expi_hermitian(&hermitian_from_params(d, params)?)
}

/// Kraus map from the polar factor of the `(d·d_env) x d` matrix encoded by
/// `params` as interleaved `(re, im)` in row-major order.
pub fn kraus_from_params(d: usize, d_env: usize, params: &[f64]) -> Result<KrausMap> {
    if params.len() != 2 * d * d * d_env {
        return Err(Error::Dimension(format!(
            "{} parameters cannot define a {}x{d} matrix",
            params.len(),
            d * d_env
        )));
    }
    let m = CMatrix::from_fn(d * d_env, d, |i, j| {
        let k = 2 * (i * d + j);
        Complex64::new(params[k], params[k + 1])
    });
    let gram = &m.adjoint() * &m;
    let eig = herm_eig(&gram)?;
    if eig.eigenvalues[0] < 1e-12 * eig.eigenvalues[d - 1].max(1e-300) || eig.eigenvalues[0] <= 0.0 {
        return Err(Error::Validation("parameter matrix is rank deficient".into()));
    }
    let inv_sqrt = eig.map_spectrum(|l| Complex64::new(l.powf(-0.5), 0.0));
    let w = &m * &inv_sqrt;
    let ops = (0..d_env).map(|k| w.block(k * d, 0, d, d)).collect();
    KrausMap::new(ops)
}

/// Parameters that reproduce `ops` exactly when they already form an isometry.
fn params_from_kraus(ops: &[CMatrix], d: usize, d_env: usize) -> Vec<f64> {
    let mut params = vec![0.0; 2 * d * d * d_env];
    for (k, e) in ops.iter().enumerate().take(d_env) {
        for i in 0..d {
            for j in 0..d {
                let idx = 2 * ((k * d + i) * d + j);
                params[idx] = e[(i, j)].re;
                params[idx + 1] = e[(i, j)].im;
            }
        }
    }
    params
}

fn check_instance(channel: &CorrelatedPauliSpec, rho: &DensityOperator) -> Result<usize> {
    let d = channel.d();
    if rho.dims() != (d, d) {
        return Err(Error::Dimension(format!(
            "channel acts on ({d},{d}), state has dims {:?}",
            rho.dims()
        )));
    }
    Ok(d)
}

struct Start {
    params: Vec<f64>,
    step: f64,
}

fn run_restarts(
    starts: Vec<Start>,
    objective: &(dyn Fn(&[f64]) -> f64 + Sync),
    cfg: &OptimizerConfig,
) -> (usize, LocalMin, usize) {
    let runs: Vec<LocalMin> = starts
        .par_iter()
        .map(|s| nelder_mead(objective, &s.params, s.step, cfg.max_iters, cfg.ftol))
        .collect();
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    // Lowest entropy wins; ties go to the lowest restart index.
    let (index, best) = runs
        .into_iter()
        .enumerate()
        .reduce(|a, b| if b.1.fx < a.1.fx { b } else { a })
        .expect("at least one restart");
    (index, best, evaluations)
}

/// Searches for the unitary on Alice's leg that minimizes `S(Λ((U⊗𝟙)ρ(U⊗𝟙)†))`.
///
/// Restart 0 starts at the identity; the remaining `restarts − 1` start from
/// parameters drawn uniformly in `[−π, π]` from a stream seeded by `cfg.seed`.
pub fn minimize_unitary(channel: &CorrelatedPauliSpec, rho: &DensityOperator, cfg: &OptimizerConfig) -> Result<OptimResult> {
    cfg.validate()?;
    let d = check_instance(channel, rho)?;
    let n = d * d;
    let objective = |x: &[f64]| -> f64 {
        unitary_from_params(d, x)
            .and_then(KrausMap::from_unitary)
            .and_then(|map| output_entropy_map(channel, rho, &map))
            .unwrap_or(f64::INFINITY)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = vec![Start {
        params: vec![0.0; n],
        step: 0.5,
    }];
    for _ in 1..cfg.restarts {
        let params = (0..n).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
        starts.push(Start { params, step: 0.5 });
    }

    let (restart, best, evaluations) = run_restarts(starts, &objective, cfg);
    let u = unitary_from_params(d, &best.x)?;
    Ok(OptimResult {
        entropy_bits: best.fx,
        encoder: KrausMap::from_unitary(u)?,
        parameters: best.x,
        converged: best.converged,
        evaluations,
        restart,
    })
}

/// Searches for the CPTP map on Alice's leg that minimizes `S(Λ((Γ⊗id)ρ))`.
///
/// Fixed candidates come first: the identity, the qubit reset map (for
/// `d = 2`, `d_env ≥ 2`), and the unitary found by [`minimize_unitary`].
/// Random starts with Gaussian entries fill the remaining restarts; a rank
/// deficient draw is resampled, at most `10·restarts` times in total.
pub fn minimize_cptp(
    channel: &CorrelatedPauliSpec,
    rho: &DensityOperator,
    d_env: usize,
    cfg: &OptimizerConfig,
) -> Result<OptimResult> {
    cfg.validate()?;
    let d = check_instance(channel, rho)?;
    if d_env == 0 {
        return Err(Error::Validation("environment dimension must be positive".into()));
    }
    let objective = |x: &[f64]| -> f64 {
        kraus_from_params(d, d_env, x)
            .and_then(|map| output_entropy_map(channel, rho, &map))
            .unwrap_or(f64::INFINITY)
    };

    let mut starts = vec![Start {
        params: params_from_kraus(&[CMatrix::identity(d)], d, d_env),
        step: 0.3,
    }];
    if d == 2 && d_env >= 2 {
        starts.push(Start {
            params: params_from_kraus(KrausMap::qubit_reset().operators(), d, d_env),
            step: 0.3,
        });
    }
    let unitary = minimize_unitary(channel, rho, cfg)?;
    starts.push(Start {
        params: params_from_kraus(unitary.encoder.operators(), d, d_env),
        step: 0.3,
    });

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = 2 * d * d * d_env;
    let mut resamples = 0;
    while starts.len() < cfg.restarts {
        let params: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        if kraus_from_params(d, d_env, &params).is_err() {
            resamples += 1;
            if resamples > 10 * cfg.restarts {
                return Err(Error::Validation("too many degenerate CPTP parameter draws".into()));
            }
            continue;
        }
        starts.push(Start { params, step: 0.5 });
    }

    let (restart, best, evaluations) = run_restarts(starts, &objective, cfg);
    Ok(OptimResult {
        entropy_bits: best.fx,
        encoder: kraus_from_params(d, d_env, &best.x)?,
        parameters: best.x,
        converged: best.converged,
        evaluations: evaluations + unitary.evaluations,
        restart,
    })
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Returns an endpoint when `f` vanishes there to `1e-12`, `None` when the
/// endpoint values share a sign, and otherwise the midpoint of a bracket no
/// wider than `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo.abs() <= 1e-12 {
        return Some(lo);
    }
    if f_hi.abs() <= 1e-12 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `C_un(μ, p) − C_Γ(p)` for a Bell pair through the correlated quasi-classical qubit channel.
pub fn capacity_gap(mu: f64, p: f64) -> f64 {
    analytic_capacity_quasi(1.0, mu, p) - transferred_info_preprocessed(p)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Crossover {
    pub p: f64,
    pub mu_tilde: Option<f64>,
    /// Gap at `μ = 0` and `μ = 1`.
    pub gap_at_zero: f64,
    pub gap_at_one: f64,
}

/// Correlation degree `μ̃(p)` at which unitary encoding and reset
/// pre-processing transmit the same information.
pub fn crossover_mu(p: f64, tol: f64) -> Result<Crossover> {
    crate::error::check_range("p", p, 0.0, 1.0, "[0, 1]")?;
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("tolerance must be positive, got {tol}")));
    }
    Ok(Crossover {
        p,
        mu_tilde: bisect(|mu| capacity_gap(mu, p), 0.0, 1.0, tol),
        gap_at_zero: capacity_gap(0.0, p),
        gap_at_one: capacity_gap(1.0, p),
    })
}
