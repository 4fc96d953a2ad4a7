//! Idempotent self-strategies by averaging.
//!
//! Iterating a winning self-strategy `p` under composition gives powers
//! `p_k`; their running Cesàro averages converge to a correlation `r` whose
//! map is the mean-ergodic projection: idempotent, absorbing (`r.p = p.r =
//! r`), and still winning because forced zeros survive averaging. The
//! iteration tracks three candidate sequences — the running average, the raw
//! power, and repeated squares of the half-identity-averaged strategy (which
//! converges geometrically even when plain averaging is slow) — and returns
//! the first candidate whose idempotency and absorption residuals clear the
//! tolerance. Those residuals are the contract; closeness to any particular
//! generalized-limit construction is not claimed.

use serde::Serialize;
use thiserror::Error;

use crate::choi::{self, ChoiError};
use crate::correlation::{Correlation, CorrelationError, StrategyReport};
use crate::graph::Graph;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Debug, Error)]
pub enum CesaroError {
    #[error("correlation must be square (inputs = outputs), got ({0}, {1})")]
    NotSquare(usize, usize),
    #[error("correlation is not synchronous at tolerance {0:.1e}")]
    NotSynchronous(f64),
    #[error("input must be idempotent within {tol:.1e}; residual {residual:.3e}")]
    NotIdempotent { tol: f64, residual: f64 },
    #[error(
        "no candidate reached tolerance {tol:.1e} within {max_iter} iterations \
         (last residuals: idempotency {idempotency:.3e}, absorption {absorption:.3e})"
    )]
    MaxIterations {
        tol: f64,
        max_iter: usize,
        idempotency: f64,
        absorption: f64,
    },
    #[error("correlation is not a winning self-strategy for the graph")]
    NotWinning,
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Choi(#[from] ChoiError),
}

/// Residuals of the three identities the output must satisfy.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CesaroResiduals {
    pub idempotency: f64,
    pub absorption_left: f64,
    pub absorption_right: f64,
}

impl CesaroResiduals {
    pub fn max(&self) -> f64 {
        self.idempotency
            .max(self.absorption_left)
            .max(self.absorption_right)
    }
}

/// Which candidate sequence produced the returned correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CesaroRoute {
    /// Running Cesàro average of the powers.
    Average,
    /// The raw power sequence converged on its own.
    Power,
    /// Repeated squares of the half-identity-averaged strategy.
    AveragedSquares,
}

#[derive(Debug, Clone, Serialize)]
pub struct CesaroDiagnostics {
    pub iterations: usize,
    pub route: CesaroRoute,
    pub residuals: CesaroResiduals,
    /// Max residual of the averaged candidate per iteration.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CesaroResult {
    pub correlation: Correlation,
    pub diagnostics: CesaroDiagnostics,
}

fn residuals_for(
    candidate: &Correlation,
    p: &Correlation,
) -> Result<CesaroResiduals, CorrelationError> {
    let squared = Correlation::compose(candidate, candidate)?;
    let left = Correlation::compose(p, candidate)?;
    let right = Correlation::compose(candidate, p)?;
    Ok(CesaroResiduals {
        idempotency: squared.max_abs_diff(candidate),
        absorption_left: left.max_abs_diff(candidate),
        absorption_right: right.max_abs_diff(candidate),
    })
}

/// Averages the composition powers of a synchronous square correlation into
/// an idempotent one. Stops at the first candidate `r` with
/// `compose(r,r) = r` and `compose(p,r) = compose(r,p) = r` within `tol`.
pub fn cesaro_idempotent(
    p: &Correlation,
    tol: f64,
    max_iter: usize,
) -> Result<CesaroResult, CesaroError> {
    if p.inputs() != p.outputs() {
        return Err(CesaroError::NotSquare(p.inputs(), p.outputs()));
    }
    p.validate()
        .map_err(|v| CorrelationError::Invalid(v.len()))?;
    if !p.is_synchronous(tol).0 {
        return Err(CesaroError::NotSynchronous(tol));
    }
    let n = p.inputs();

    let mut power = p.clone();
    let mut average = p.clone();
    // Half-identity-averaged strategy; its pure powers converge geometrically
    // to the same projection, covering spectra where averaging is slow.
    let identity = Correlation::identity(n);
    let mut squares = Correlation::mixture(&[(0.5, &identity), (0.5, p)])?;

    let mut history = Vec::new();
    let mut last_avg = CesaroResiduals {
        idempotency: f64::INFINITY,
        absorption_left: f64::INFINITY,
        absorption_right: f64::INFINITY,
    };

    for iter in 1..=max_iter {
        let avg_res = residuals_for(&average, p)?;
        history.push(avg_res.max());
        last_avg = avg_res;
        if avg_res.max() <= tol {
            return Ok(CesaroResult {
                correlation: average,
                diagnostics: CesaroDiagnostics {
                    iterations: iter,
                    route: CesaroRoute::Average,
                    residuals: avg_res,
                    history,
                },
            });
        }
        let pow_res = residuals_for(&power, p)?;
        if pow_res.max() <= tol {
            return Ok(CesaroResult {
                correlation: power,
                diagnostics: CesaroDiagnostics {
                    iterations: iter,
                    route: CesaroRoute::Power,
                    residuals: pow_res,
                    history,
                },
            });
        }
        let sq_res = residuals_for(&squares, p)?;
        if sq_res.max() <= tol {
            return Ok(CesaroResult {
                correlation: squares,
                diagnostics: CesaroDiagnostics {
                    iterations: iter,
                    route: CesaroRoute::AveragedSquares,
                    residuals: sq_res,
                    history,
                },
            });
        }

        // Advance: next power, incremental average, squared average.
        power = Correlation::compose(p, &power)?;
        let k = (iter + 1) as f64;
        average = Correlation::mixture(&[((k - 1.0) / k, &average), (1.0 / k, &power)])?;
        squares = Correlation::compose(&squares, &squares)?;
    }

    Err(CesaroError::MaxIterations {
        tol,
        max_iter,
        idempotency: last_avg.idempotency,
        absorption: last_avg.absorption_left.max(last_avg.absorption_right),
    })
}

/// Partial order on idempotent strategies: `r <= s` iff composing with `s`
/// on either side leaves `r` unchanged. Inputs must be idempotent within
/// `tol`.
pub fn idempotent_leq(r: &Correlation, s: &Correlation, tol: f64) -> Result<bool, CesaroError> {
    for c in [r, s] {
        if c.inputs() != c.outputs() {
            return Err(CesaroError::NotSquare(c.inputs(), c.outputs()));
        }
        let squared = Correlation::compose(c, c)?;
        let residual = squared.max_abs_diff(c);
        if residual > tol {
            return Err(CesaroError::NotIdempotent { tol, residual });
        }
    }
    if r.inputs() != s.inputs() {
        return Err(CesaroError::NotSquare(r.inputs(), s.inputs()));
    }
    let rs = Correlation::compose(r, s)?;
    let sr = Correlation::compose(s, r)?;
    Ok(rs.max_abs_diff(r) <= tol && sr.max_abs_diff(r) <= tol)
}

/// Comparison row against one user-supplied idempotent candidate.
#[derive(Debug, Clone, Serialize)]
pub struct CoreComparison {
    pub candidate: usize,
    /// `core <= candidate` in the idempotent order, when decidable.
    pub core_leq_candidate: Option<bool>,
    /// `candidate <= core`, when decidable.
    pub candidate_leq_core: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantumCoreReport {
    pub core: Correlation,
    pub diagnostics: CesaroDiagnostics,
    pub winning: StrategyReport,
    pub choi_min_eigenvalue: f64,
    pub comparisons: Vec<CoreComparison>,
    pub notes: Vec<String>,
}

/// Builds an idempotent winning self-strategy from `p` and checks everything
/// the construction promises: the result still wins the game from `g` to
/// itself, its map is idempotent, and its Choi matrix stays PSD. Minimality
/// in the idempotent order is *not* certified; the report only compares
/// against the supplied candidates.
pub fn quantum_core_candidate(
    p: &Correlation,
    g: &Graph,
    candidates: &[Correlation],
    tol: f64,
    max_iter: usize,
) -> Result<QuantumCoreReport, CesaroError> {
    let report = p.is_winning_strategy(g, g, tol)?;
    if !report.winning {
        return Err(CesaroError::NotWinning);
    }
    let result = cesaro_idempotent(p, tol, max_iter)?;
    let core = result.correlation;

    let winning = core.is_winning_strategy(g, g, tol)?;
    let (_, choi_report) = choi::choi_of(&core)?;

    let mut comparisons = Vec::new();
    for (index, candidate) in candidates.iter().enumerate() {
        let core_leq_candidate = idempotent_leq(&core, candidate, tol).ok();
        let candidate_leq_core = idempotent_leq(candidate, &core, tol).ok();
        comparisons.push(CoreComparison {
            candidate: index,
            core_leq_candidate,
            candidate_leq_core,
        });
    }

    let notes = vec![
        "minimality in the idempotent order is not certified; only the listed \
         comparisons were checked"
            .to_string(),
        "minimal idempotents need not be unique; no uniqueness is assumed".to_string(),
        "if the input is certified only as a finite-dimensional quantum strategy, \
         the output is guaranteed only in the closure class of such strategies"
            .to_string(),
    ];

    Ok(QuantumCoreReport {
        core,
        diagnostics: result.diagnostics,
        winning,
        choi_min_eigenvalue: choi_report.min_eigenvalue,
        comparisons,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choi::{choi_of, one_norm, sigma};
    use crate::linalg::Matrix;

    fn swap_on_k2() -> Correlation {
        let k2 = Graph::complete(2).unwrap();
        Correlation::from_homomorphism(&[1, 0], &k2, &k2).unwrap().0
    }

    fn half_id_half_swap() -> Correlation {
        let id = Correlation::identity(2);
        let swap = swap_on_k2();
        Correlation::mixture(&[(0.5, &id), (0.5, &swap)]).unwrap()
    }

    #[test]
    fn swap_averages_to_half_mixture() {
        let result = cesaro_idempotent(&swap_on_k2(), 1e-6, 10_000).unwrap();
        let expected = half_id_half_swap();
        assert!(result.correlation.max_abs_diff(&expected) <= 1e-6);
        assert!(result.diagnostics.iterations <= 10);
        // Two-cycle closed form verified by direct composition.
        let squared = Correlation::compose(&expected, &expected).unwrap();
        assert!(squared.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn idempotent_input_returns_immediately() {
        let id = Correlation::identity(3);
        let result = cesaro_idempotent(&id, 1e-6, 10).unwrap();
        assert_eq!(result.diagnostics.iterations, 1);
        assert!(result.correlation.max_abs_diff(&id) == 0.0);
    }

    fn c6_rotation(shift: usize) -> Correlation {
        let c6 = Graph::cycle(6).unwrap();
        let f: Vec<usize> = (0..6).map(|v| (v + shift) % 6).collect();
        let (p, is_homo) = Correlation::from_homomorphism(&f, &c6, &c6).unwrap();
        assert!(is_homo);
        p
    }

    #[test]
    fn rotation_averages_to_uniform_rotation_mixture() {
        let result = cesaro_idempotent(&c6_rotation(1), 1e-6, 10_000).unwrap();
        // Cyclic-group averaging oracle: the uniform mixture over all six
        // rotations.
        let rotations: Vec<Correlation> = (0..6).map(c6_rotation).collect();
        let parts: Vec<(f64, &Correlation)> =
            rotations.iter().map(|r| (1.0 / 6.0, r)).collect();
        let expected = Correlation::mixture(&parts).unwrap();
        assert!(result.correlation.max_abs_diff(&expected) <= 1e-6);
        assert!(result.diagnostics.iterations <= 10_000);
        let squared = Correlation::compose(&expected, &expected).unwrap();
        assert!(squared.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn non_resonant_mixture_still_converges() {
        // 0.3 id + 0.7 swap contracts instead of oscillating; the squared
        // ladder covers it well inside the default budget.
        let p = Correlation::mixture(&[(0.3, &Correlation::identity(2)), (0.7, &swap_on_k2())])
            .unwrap();
        let result = cesaro_idempotent(&p, 1e-8, DEFAULT_MAX_ITER).unwrap();
        assert!(result.correlation.max_abs_diff(&half_id_half_swap()) <= 1e-6);
        assert!(result.diagnostics.iterations < 200);
    }

    #[test]
    fn output_satisfies_all_promised_properties() {
        let result = cesaro_idempotent(&c6_rotation(1), 1e-6, 10_000).unwrap();
        let r = &result.correlation;
        let p = c6_rotation(1);
        let c6 = Graph::cycle(6).unwrap();

        // Winning (zero pattern preserved).
        assert!(r.is_winning_strategy(&c6, &c6, 1e-6).unwrap().winning);
        // Idempotent and absorbing.
        assert!(Correlation::compose(r, r).unwrap().max_abs_diff(r) <= 1e-6);
        assert!(Correlation::compose(&p, r).unwrap().max_abs_diff(r) <= 1e-6);
        assert!(Correlation::compose(r, &p).unwrap().max_abs_diff(r) <= 1e-6);
        // CP: PSD Choi matrix.
        let (phi, report) = choi_of(r).unwrap();
        assert!(report.min_eigenvalue >= -1e-6);
        // Entry-sum preservation and one-norm contraction of the map.
        let mut a = Matrix::zeros(6, 6);
        let mut state = 77_u64;
        for i in 0..6 {
            for j in 0..6 {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                a.set(i, j, ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0);
            }
        }
        let image = phi.apply(&a).unwrap();
        assert!((sigma(&image) - sigma(&a)).abs() <= 1e-9);
        assert!(one_norm(&image) <= one_norm(&a) + 1e-9);
    }

    #[test]
    fn order_examples_on_k2() {
        let s = half_id_half_swap();
        let t = Correlation::identity(2);
        assert!(idempotent_leq(&s, &s, 1e-9).unwrap());
        assert!(idempotent_leq(&s, &t, 1e-9).unwrap());
        assert!(!idempotent_leq(&t, &s, 1e-9).unwrap());
    }

    #[test]
    fn non_idempotent_inputs_rejected_by_order() {
        let swap = swap_on_k2();
        let id = Correlation::identity(2);
        assert!(matches!(
            idempotent_leq(&swap, &id, 1e-9),
            Err(CesaroError::NotIdempotent { .. })
        ));
    }

    #[test]
    fn core_candidate_for_swap() {
        let k2 = Graph::complete(2).unwrap();
        let id = Correlation::identity(2);
        let report =
            quantum_core_candidate(&swap_on_k2(), &k2, &[id], 1e-6, 10_000).unwrap();
        assert!(report.winning.winning);
        assert!(report.choi_min_eigenvalue >= -1e-6);
        assert!(report.core.max_abs_diff(&half_id_half_swap()) <= 1e-6);
        // The averaged core sits below the identity candidate.
        assert_eq!(report.comparisons[0].core_leq_candidate, Some(true));
        assert_eq!(report.comparisons[0].candidate_leq_core, Some(false));
        assert!(!report.notes.is_empty());
    }

    #[test]
    fn core_candidate_rejects_losing_strategy() {
        let k2 = Graph::complete(2).unwrap();
        let (constant, _) = Correlation::from_homomorphism(&[0, 0], &k2, &k2).unwrap();
        assert!(matches!(
            quantum_core_candidate(&constant, &k2, &[], 1e-6, 100),
            Err(CesaroError::NotWinning)
        ));
    }

    #[test]
    fn rectangular_input_rejected() {
        let c6 = Graph::cycle(6).unwrap();
        let k2 = Graph::complete(2).unwrap();
        let f: Vec<usize> = (0..6).map(|v| v % 2).collect();
        let (p, _) = Correlation::from_homomorphism(&f, &c6, &k2).unwrap();
        assert!(matches!(
            cesaro_idempotent(&p, 1e-6, 100),
            Err(CesaroError::NotSquare(6, 2))
        ));
    }
}
