//! Membership tests for correlation classes.
//!
//! Synchronous vectorial membership asks for a Gram matrix of vectors
//! `h_{v,x}` reproducing the correlation under the orthogonality, common-sum,
//! and (optionally) nonnegativity rules; dropping nonnegativity gives the
//! B variant. The same Gram program with the two winning conditions pinned to
//! zero decides whether one graph admits a vectorial homomorphism to another.
//! Local membership is exact: a winning correlation is local iff it is a
//! convex mixture of classical homomorphisms, decided by a finite LP.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::correlation::{Correlation, CorrelationError};
use crate::graph::Graph;
use crate::homo::{self, HomoError, VertexMap};
use crate::linalg::{self, SymMatrix};
use crate::lp::{self, LpOutcome};
use crate::sdp::{solve_sdp, SdpError, SdpProblem, SolveParams, SolveStatus};

#[derive(Debug, Error)]
pub enum MembershipError {
    #[error("correlation is not synchronous at tolerance {tol:.1e} (worst violation {worst:.3e})")]
    NotSynchronous { tol: f64, worst: f64 },
    #[error("correlation is not a winning strategy for the given game")]
    NotWinning,
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Homo(#[from] HomoError),
    #[error("solver did not converge within the iteration budget")]
    NonConvergence,
}

/// PSD slack tolerated in a verified witness.
pub const WITNESS_PSD_TOL: f64 = 1e-8;
/// Orthogonality-row tolerance in a verified witness.
pub const WITNESS_ORTHO_TOL: f64 = 1e-8;
/// Sum-rule tolerance in a verified witness.
pub const WITNESS_SUM_TOL: f64 = 1e-7;

/// Internal solver tolerance for Gram programs, one order below the witness
/// invariants so returned witnesses verify with margin.
const GRAM_SOLVE_TOL: f64 = 1e-9;

fn gram_default_params() -> SolveParams {
    SolveParams {
        tol: GRAM_SOLVE_TOL,
        max_iter: 200_000,
        ..Default::default()
    }
}

/// Gram matrix of the vectors `h_{v,x}`, indexed by flattened pairs
/// `(v, x) -> v * m + x`, certifying synchronous vectorial (or B) membership.
#[derive(Debug, Clone)]
pub struct GramWitness {
    pub n: usize,
    pub m: usize,
    pub matrix: SymMatrix,
    pub nonneg_mode: bool,
}

impl GramWitness {
    #[inline]
    pub fn index(&self, v: usize, x: usize) -> usize {
        v * self.m + x
    }

    /// Checks every invariant of a valid witness; returns the violations.
    pub fn verify(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let norm = self.matrix.frobenius_norm();
        match linalg::min_eigenvalue(&self.matrix) {
            Ok(lambda) => {
                if lambda < -WITNESS_PSD_TOL * (1.0 + norm) {
                    problems.push(format!("minimum eigenvalue {lambda:.3e}"));
                }
            }
            Err(e) => problems.push(format!("eigenvalue check failed: {e}")),
        }
        for v in 0..self.n {
            for x in 0..self.m {
                for y in 0..self.m {
                    if x == y {
                        continue;
                    }
                    let value = self.matrix.get(self.index(v, x), self.index(v, y));
                    if value.abs() > WITNESS_ORTHO_TOL {
                        problems.push(format!(
                            "orthogonality violated at v={v}, x={x}, y={y}: {value:.3e}"
                        ));
                    }
                }
            }
        }
        for v in 0..self.n {
            for w in 0..self.n {
                let mut sum = 0.0;
                for x in 0..self.m {
                    for y in 0..self.m {
                        sum += self.matrix.get(self.index(v, x), self.index(w, y));
                    }
                }
                if (sum - 1.0).abs() > WITNESS_SUM_TOL {
                    problems.push(format!("sum rule violated at (v={v}, w={w}): {sum:.9}"));
                }
            }
        }
        if self.nonneg_mode {
            for value in self.matrix.data() {
                if *value < -WITNESS_PSD_TOL {
                    problems.push(format!("negative entry {value:.3e} in nonneg mode"));
                    break;
                }
            }
        }
        problems
    }

    /// The correlation this witness represents: `p(x,y|v,w) = M[(v,x),(w,y)]`.
    pub fn to_correlation(&self) -> Result<Correlation, CorrelationError> {
        let mut c = Correlation::zeros(self.n, self.m);
        for v in 0..self.n {
            for w in 0..self.n {
                for x in 0..self.m {
                    for y in 0..self.m {
                        c.set(v, w, x, y, self.matrix.get(self.index(v, x), self.index(w, y)));
                    }
                }
            }
        }
        Ok(c)
    }
}

impl Serialize for GramWitness {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("GramWitness", 3)?;
        s.serialize_field("nm", &(self.n * self.m))?;
        s.serialize_field("M", self.matrix.data())?;
        s.serialize_field("nonneg_mode", &self.nonneg_mode)?;
        s.end()
    }
}

/// Result of a Gram feasibility search. Infeasibility inherits the solver's
/// heuristic character unless the affine constraints alone were contradictory.
#[derive(Debug, Clone)]
pub enum GramOutcome {
    Feasible(GramWitness),
    Infeasible { affine_inconsistent: bool },
}

impl GramOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, GramOutcome::Feasible(_))
    }
}

/// Tests whether a synchronous correlation lies in the synchronous vectorial
/// class (`nonneg_mode = true`) or its B relaxation (`nonneg_mode = false`) by
/// pinning the full Gram matrix and asking for positive semidefiniteness.
///
/// Entries at most `tol` in magnitude are treated as exact zeros, so inputs
/// that are synchronous up to `tol` behave as their synchronous rounding.
pub fn synchronous_vect_membership(
    p: &Correlation,
    nonneg_mode: bool,
    tol: f64,
) -> Result<GramOutcome, MembershipError> {
    p.validate().map_err(|v| CorrelationError::Invalid(v.len()))?;
    let (synchronous, violations) = p.is_synchronous(tol);
    if !synchronous {
        let worst = violations
            .iter()
            .map(|v| v.magnitude)
            .fold(0.0_f64, f64::max);
        return Err(MembershipError::NotSynchronous { tol, worst });
    }
    let n = p.inputs();
    let m = p.outputs();
    let dim = n * m;
    let mut problem = SdpProblem::new(dim);
    let index = |v: usize, x: usize| v * m + x;

    // Pin every entry to the correlation (snapping sub-tolerance mass to 0).
    for v in 0..n {
        for w in 0..n {
            for x in 0..m {
                for y in 0..m {
                    let (i, j) = (index(v, x), index(w, y));
                    if i > j {
                        continue;
                    }
                    let value = p.get(v, w, x, y);
                    let value = if value.abs() <= tol { 0.0 } else { value };
                    problem.pin_value(i, j, value)?;
                }
            }
        }
    }
    // Orthogonality rows and sum rules are implied by the pins for a valid
    // synchronous correlation; stating them keeps contradictions detectable
    // at the affine stage.
    for v in 0..n {
        for x in 0..m {
            for y in (x + 1)..m {
                problem.pin_zero(index(v, x), index(v, y))?;
            }
        }
    }
    add_sum_rules(&mut problem, n, m)?;
    if nonneg_mode {
        problem.require_nonneg_everywhere();
    }

    run_gram_sdp(problem, n, m, nonneg_mode, &gram_default_params())
}

/// Decides `G -> H` at the vectorial level (`nonneg_mode = true`) or the
/// B level (`nonneg_mode = false`): Gram feasibility with the game's two
/// winning conditions pinned to zero.
pub fn vect_homomorphism_feasibility(
    g: &Graph,
    h: &Graph,
    nonneg_mode: bool,
) -> Result<GramOutcome, MembershipError> {
    vect_homomorphism_feasibility_with(g, h, nonneg_mode, &gram_default_params())
}

pub fn vect_homomorphism_feasibility_with(
    g: &Graph,
    h: &Graph,
    nonneg_mode: bool,
    params: &SolveParams,
) -> Result<GramOutcome, MembershipError> {
    let n = g.vertex_count();
    let m = h.vertex_count();
    let dim = n * m;
    let mut problem = SdpProblem::new(dim);
    let index = |v: usize, x: usize| v * m + x;

    // Condition (1): equal questions, equal answers.
    for v in 0..n {
        for x in 0..m {
            for y in (x + 1)..m {
                problem.pin_zero(index(v, x), index(v, y))?;
            }
        }
    }
    // Condition (2): adjacent questions cannot produce non-adjacent answers
    // (equal answers included, targets being loop-free).
    for (v, w) in g.edges() {
        for x in 0..m {
            for y in 0..m {
                if !h.has_edge(x, y) {
                    problem.pin_zero(index(v, x), index(w, y))?;
                }
            }
        }
    }
    add_sum_rules(&mut problem, n, m)?;
    if nonneg_mode {
        problem.require_nonneg_everywhere();
    }

    run_gram_sdp(problem, n, m, nonneg_mode, params)
}

// One sum rule per unordered input pair: sum_{x,y} M[(v,x),(w,y)] = 1,
// written with a symmetrized block indicator so the constraint matrix is
// symmetric. The mirrored (w,v) rule is the same constraint by symmetry.
fn add_sum_rules(problem: &mut SdpProblem, n: usize, m: usize) -> Result<(), SdpError> {
    let dim = n * m;
    for v in 0..n {
        for w in v..n {
            let mut a = SymMatrix::zeros(dim);
            for x in 0..m {
                for y in 0..m {
                    let (i, j) = (v * m + x, w * m + y);
                    if v == w {
                        if i <= j {
                            a.set(i, j, 1.0);
                        }
                    } else {
                        a.set(i, j, 0.5);
                    }
                }
            }
            problem.add_eq(a, 1.0)?;
        }
    }
    Ok(())
}

fn run_gram_sdp(
    problem: SdpProblem,
    n: usize,
    m: usize,
    nonneg_mode: bool,
    params: &SolveParams,
) -> Result<GramOutcome, MembershipError> {
    let solution = solve_sdp(&problem, params)?;
    match solution.status {
        SolveStatus::Optimal => Ok(GramOutcome::Feasible(GramWitness {
            n,
            m,
            matrix: solution.x,
            nonneg_mode,
        })),
        SolveStatus::InfeasibleHeuristic => Ok(GramOutcome::Infeasible {
            affine_inconsistent: solution.affine_inconsistent,
        }),
        SolveStatus::MaxIterations => Err(MembershipError::NonConvergence),
    }
}

/// Result of exact local-class membership.
#[derive(Debug, Clone)]
pub enum LocalMembership {
    /// Mixture weights, aligned with the returned homomorphism list.
    Feasible {
        homomorphisms: Vec<VertexMap>,
        weights: Vec<f64>,
    },
    Infeasible,
}

impl LocalMembership {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LocalMembership::Feasible { .. })
    }
}

/// LP tolerance for local membership; the finite LP makes infeasibility sound.
pub const LOCAL_LP_TOL: f64 = 1e-9;

/// Decides whether a winning correlation is a convex mixture of classical
/// homomorphisms, and recovers the weights when it is.
pub fn local_membership(
    p: &Correlation,
    g: &Graph,
    h: &Graph,
) -> Result<LocalMembership, MembershipError> {
    let report = p.is_winning_strategy(g, h, crate::correlation::DEFAULT_ZERO_TOL)?;
    if !report.winning {
        return Err(MembershipError::NotWinning);
    }
    let homomorphisms = homo::enumerate_homomorphisms(g, h, None)?;
    if homomorphisms.is_empty() {
        return Ok(LocalMembership::Infeasible);
    }
    let n = p.inputs();
    let m = p.outputs();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for v in 0..n {
        for w in 0..n {
            for x in 0..m {
                for y in 0..m {
                    let row: Vec<f64> = homomorphisms
                        .iter()
                        .map(|map| {
                            if map.f[v] == x && map.f[w] == y {
                                1.0
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    let target = p.get(v, w, x, y);
                    if row.iter().all(|&c| c == 0.0) {
                        // No homomorphism covers this outcome; any mass here
                        // puts p outside the polytope.
                        if target > LOCAL_LP_TOL {
                            return Ok(LocalMembership::Infeasible);
                        }
                        continue;
                    }
                    rows.push(row);
                    rhs.push(target);
                }
            }
        }
    }
    rows.push(vec![1.0; homomorphisms.len()]);
    rhs.push(1.0);

    match lp::solve_eq_feasibility(&rows, &rhs, LOCAL_LP_TOL) {
        LpOutcome::Feasible(weights) => Ok(LocalMembership::Feasible {
            homomorphisms,
            weights,
        }),
        LpOutcome::Infeasible { .. } => Ok(LocalMembership::Infeasible),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    #[test]
    fn deterministic_strategy_is_vect_member() {
        let c6 = Graph::cycle(6).unwrap();
        let k2 = Graph::complete(2).unwrap();
        let f: Vec<usize> = (0..6).map(|v| v % 2).collect();
        let (p, _) = Correlation::from_homomorphism(&f, &c6, &k2).unwrap();
        let outcome = synchronous_vect_membership(&p, true, 1e-9).unwrap();
        match outcome {
            GramOutcome::Feasible(witness) => {
                assert!(witness.verify().is_empty(), "{:?}", witness.verify());
                // The witness reproduces the correlation entrywise.
                let back = witness.to_correlation().unwrap();
                assert!(back.max_abs_diff(&p) < 1e-6);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn homomorphism_mixture_is_vect_member() {
        let c6 = Graph::cycle(6).unwrap();
        let k2 = Graph::complete(2).unwrap();
        let (p0, _) =
            Correlation::from_homomorphism(&[0, 1, 0, 1, 0, 1], &c6, &k2).unwrap();
        let (p1, _) =
            Correlation::from_homomorphism(&[1, 0, 1, 0, 1, 0], &c6, &k2).unwrap();
        let mix = Correlation::mixture(&[(0.5, &p0), (0.5, &p1)]).unwrap();
        let outcome = synchronous_vect_membership(&mix, true, 1e-9).unwrap();
        assert!(outcome.is_feasible());
    }

    /// The synchronous correlation whose Choi matrix has eigenvalue -1: all
    /// mass on swapped answers for crossed questions.
    pub fn non_vect_counterexample() -> Correlation {
        let mut c = Correlation::zeros(2, 2);
        c.set(0, 0, 0, 0, 1.0);
        c.set(1, 1, 1, 1, 1.0);
        c.set(0, 1, 1, 0, 1.0);
        c.set(1, 0, 0, 1, 1.0);
        c
    }

    #[test]
    fn non_psd_choi_correlation_is_infeasible() {
        let p = non_vect_counterexample();
        assert!(p.validate().is_ok());
        assert!(p.is_synchronous(1e-12).0);
        let outcome = synchronous_vect_membership(&p, true, 1e-9).unwrap();
        assert!(!outcome.is_feasible());
    }

    #[test]
    fn vect_self_homomorphism_feasible() {
        for g in [Graph::cycle(5).unwrap(), Graph::complete(3).unwrap()] {
            let outcome = vect_homomorphism_feasibility(&g, &g, true).unwrap();
            match outcome {
                GramOutcome::Feasible(w) => assert!(w.verify().is_empty(), "{:?}", w.verify()),
                other => panic!("expected feasible, got {other:?}"),
            }
        }
    }

    #[test]
    fn k3_to_k2_vect_infeasible() {
        let k3 = Graph::complete(3).unwrap();
        let k2 = Graph::complete(2).unwrap();
        let outcome = vect_homomorphism_feasibility(&k3, &k2, true).unwrap();
        assert!(!outcome.is_feasible());
    }

    #[test]
    fn c5_to_k3_vect_feasible() {
        let c5 = Graph::cycle(5).unwrap();
        let k3 = Graph::complete(3).unwrap();
        let outcome = vect_homomorphism_feasibility(&c5, &k3, true).unwrap();
        assert!(outcome.is_feasible());
    }

    #[test]
    fn local_membership_recovers_single_map() {
        let c6 = Graph::cycle(6).unwrap();
        let k2 = Graph::complete(2).unwrap();
        let f = vec![0usize, 1, 0, 1, 0, 1];
        let (p, _) = Correlation::from_homomorphism(&f, &c6, &k2).unwrap();
        match local_membership(&p, &c6, &k2).unwrap() {
            LocalMembership::Feasible {
                homomorphisms,
                weights,
            } => {
                let hit = homomorphisms
                    .iter()
                    .zip(&weights)
                    .find(|(map, _)| map.f == f)
                    .expect("the map itself is enumerated");
                assert!((hit.1 - 1.0).abs() < 1e-8);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn local_membership_recovers_even_mixture() {
        let c6 = Graph::cycle(6).unwrap();
        let k2 = Graph::complete(2).unwrap();
        let (p0, _) =
            Correlation::from_homomorphism(&[0, 1, 0, 1, 0, 1], &c6, &k2).unwrap();
        let (p1, _) =
            Correlation::from_homomorphism(&[1, 0, 1, 0, 1, 0], &c6, &k2).unwrap();
        let mix = Correlation::mixture(&[(0.5, &p0), (0.5, &p1)]).unwrap();
        match local_membership(&mix, &c6, &k2).unwrap() {
            LocalMembership::Feasible { weights, .. } => {
                assert_eq!(weights.len(), 2);
                assert!((weights[0] - 0.5).abs() < 1e-8);
                assert!((weights[1] - 0.5).abs() < 1e-8);

                // Segment-membership oracle: with two vertices the mixture
                // coefficient is determined by any separating coordinate.
                let coordinate = (p0.get(0, 0, 0, 0), p1.get(0, 0, 0, 0));
                let target = mix.get(0, 0, 0, 0);
                let lambda = (target - coordinate.1) / (coordinate.0 - coordinate.1);
                assert!((lambda - 0.5).abs() < 1e-12);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn local_membership_rejects_non_winning() {
        let k2 = Graph::complete(2).unwrap();
        let (p, _) = Correlation::from_homomorphism(&[0, 0], &k2, &k2).unwrap();
        assert!(matches!(
            local_membership(&p, &k2, &k2),
            Err(MembershipError::NotWinning)
        ));
    }

    #[test]
    fn hierarchy_local_implies_vect() {
        let c6 = Graph::cycle(6).unwrap();
        let k2 = Graph::complete(2).unwrap();
        let (p0, _) =
            Correlation::from_homomorphism(&[0, 1, 0, 1, 0, 1], &c6, &k2).unwrap();
        let (p1, _) =
            Correlation::from_homomorphism(&[1, 0, 1, 0, 1, 0], &c6, &k2).unwrap();
        for mix in [
            Correlation::mixture(&[(1.0, &p0)]).unwrap(),
            Correlation::mixture(&[(0.25, &p0), (0.75, &p1)]).unwrap(),
        ] {
            assert!(local_membership(&mix, &c6, &k2).unwrap().is_feasible());
            assert!(synchronous_vect_membership(&mix, true, 1e-9)
                .unwrap()
                .is_feasible());
        }
    }
}
