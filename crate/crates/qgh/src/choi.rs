//! Choi matrices of the linear maps induced by correlations, and the
//! structural checks that make a winning strategy into a well-behaved map
//! between graph operator systems: complete positivity (PSD Choi matrix),
//! trace preservation on the source support, and support containment in the
//! target.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::correlation::Correlation;
use crate::graph::Graph;
use crate::linalg::{self, LinalgError, Matrix, SymMatrix};

#[derive(Debug, Error)]
pub enum ChoiError {
    #[error("matrix is {got}x{got2}, expected {expected}x{expected}")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        got2: usize,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The Choi matrix of the map `E_{v,w} -> sum_{x,y} p(x,y|v,w) E_{x,y}`,
/// indexed by flattened pairs `(v, x) -> v * m + x`, together with the source
/// correlation it was built from.
#[derive(Debug, Clone)]
pub struct ChoiMap {
    n: usize,
    m: usize,
    choi: SymMatrix,
    source: Correlation,
}

/// Advisory positivity report attached to a freshly built Choi matrix.
#[derive(Debug, Clone, Serialize)]
pub struct ChoiReport {
    pub min_eigenvalue: f64,
    /// Worst deviation from `p(x,y|v,w) = p(y,x|w,v)`; the Choi matrix is
    /// symmetrized, so a large defect means it only represents the symmetric
    /// part of the tensor.
    pub symmetry_defect: f64,
    /// Whether the matrix is PSD up to `1e-8 * (1 + ||choi||)`.
    pub psd: bool,
}

impl ChoiMap {
    pub fn source_dim(&self) -> usize {
        self.n
    }

    pub fn target_dim(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.choi
    }

    pub fn source(&self) -> &Correlation {
        &self.source
    }

    /// Applies the map to an `n x n` real matrix:
    /// `B[x][y] = sum_{v,w} p(x,y|v,w) A[v][w]`.
    pub fn apply(&self, a: &Matrix) -> Result<Matrix, ChoiError> {
        if a.rows() != self.n || a.cols() != self.n {
            return Err(ChoiError::DimensionMismatch {
                expected: self.n,
                got: a.rows(),
                got2: a.cols(),
            });
        }
        let mut out = Matrix::zeros(self.m, self.m);
        for v in 0..self.n {
            for w in 0..self.n {
                let weight = a.get(v, w);
                if weight == 0.0 {
                    continue;
                }
                for x in 0..self.m {
                    for y in 0..self.m {
                        let add = weight * self.source.get(v, w, x, y);
                        if add != 0.0 {
                            out.set(x, y, out.get(x, y) + add);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Image of the matrix unit `E_{v,w}`.
    pub fn apply_unit(&self, v: usize, w: usize) -> Matrix {
        let mut out = Matrix::zeros(self.m, self.m);
        for x in 0..self.m {
            for y in 0..self.m {
                out.set(x, y, self.source.get(v, w, x, y));
            }
        }
        out
    }
}

impl Serialize for ChoiMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ChoiMap", 3)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("m", &self.m)?;
        s.serialize_field("choi", self.choi.data())?;
        s.end()
    }
}

/// Builds the Choi matrix of a validated correlation and reports its least
/// eigenvalue. Positivity is advisory: it is guaranteed exactly when the
/// correlation admits a synchronous Gram representation.
pub fn choi_of(p: &Correlation) -> Result<(ChoiMap, ChoiReport), ChoiError> {
    let n = p.inputs();
    let m = p.outputs();
    let dim = n * m;
    let mut raw = vec![0.0_f64; dim * dim];
    for v in 0..n {
        for w in 0..n {
            for x in 0..m {
                for y in 0..m {
                    raw[(v * m + x) * dim + (w * m + y)] = p.get(v, w, x, y);
                }
            }
        }
    }
    let mut defect = 0.0_f64;
    for i in 0..dim {
        for j in (i + 1)..dim {
            defect = defect.max((raw[i * dim + j] - raw[j * dim + i]).abs());
        }
    }
    let choi = SymMatrix::from_row_major(dim, &raw)?;
    let min_eigenvalue = linalg::min_eigenvalue(&choi)?;
    let psd = min_eigenvalue >= -1e-8 * (1.0 + choi.frobenius_norm());
    let report = ChoiReport {
        min_eigenvalue,
        symmetry_defect: defect,
        psd,
    };
    Ok((
        ChoiMap {
            n,
            m,
            choi,
            source: p.clone(),
        },
        report,
    ))
}

/// One failed support pair in a trace-preservation check.
#[derive(Debug, Clone, Serialize)]
pub struct TraceFailure {
    pub pair: (usize, usize),
    pub trace: f64,
    pub expected: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TracePreservationReport {
    pub pass: bool,
    pub worst: f64,
    pub failures: Vec<TraceFailure>,
}

/// Checks trace preservation on the source operator system: for every support
/// pair `(v, w)` of `g`, `trace(phi(E_{v,w}))` must be `1` on the diagonal and
/// `0` on edges.
pub fn verify_trace_preserving(
    phi: &ChoiMap,
    g: &Graph,
    tol: f64,
) -> Result<TracePreservationReport, ChoiError> {
    if g.vertex_count() != phi.n {
        return Err(ChoiError::DimensionMismatch {
            expected: phi.n,
            got: g.vertex_count(),
            got2: g.vertex_count(),
        });
    }
    let mut failures = Vec::new();
    let mut worst = 0.0_f64;
    for (v, w) in g.operator_system_support().pairs() {
        let mut trace = 0.0;
        for x in 0..phi.m {
            trace += phi.source.get(v, w, x, x);
        }
        let expected = if v == w { 1.0 } else { 0.0 };
        let error = (trace - expected).abs();
        worst = worst.max(error);
        if error > tol {
            failures.push(TraceFailure {
                pair: (v, w),
                trace,
                expected,
            });
        }
    }
    Ok(TracePreservationReport {
        pass: failures.is_empty(),
        worst,
        failures,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportFailure {
    pub source_pair: (usize, usize),
    pub target_entry: (usize, usize),
    pub magnitude: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportPreservationReport {
    pub pass: bool,
    pub worst: f64,
    pub failures: Vec<SupportFailure>,
}

/// Checks that the map sends the source operator system into the target's:
/// images of diagonal units are diagonal, and images of edge units vanish
/// outside the target support.
pub fn verify_operator_system_preserving(
    phi: &ChoiMap,
    g: &Graph,
    h: &Graph,
    tol: f64,
) -> Result<SupportPreservationReport, ChoiError> {
    if g.vertex_count() != phi.n || h.vertex_count() != phi.m {
        return Err(ChoiError::DimensionMismatch {
            expected: phi.n,
            got: g.vertex_count(),
            got2: h.vertex_count(),
        });
    }
    let target_support = h.operator_system_support();
    let mut failures = Vec::new();
    let mut worst = 0.0_f64;
    for (v, w) in g.operator_system_support().pairs() {
        for x in 0..phi.m {
            for y in 0..phi.m {
                let inside = if v == w {
                    x == y
                } else {
                    target_support.contains(x, y)
                };
                if inside {
                    continue;
                }
                let magnitude = phi.source.get(v, w, x, y).abs();
                worst = worst.max(magnitude);
                if magnitude > tol {
                    failures.push(SupportFailure {
                        source_pair: (v, w),
                        target_entry: (x, y),
                        magnitude,
                    });
                }
            }
        }
    }
    Ok(SupportPreservationReport {
        pass: failures.is_empty(),
        worst,
        failures,
    })
}

/// Entry sum `sigma(A) = sum_{i,j} a_ij`.
pub fn sigma(a: &Matrix) -> f64 {
    a.data().iter().sum()
}

/// Entrywise one-norm `||A||_1 = sum_{i,j} |a_ij|`.
pub fn one_norm(a: &Matrix) -> f64 {
    a.data().iter().map(|v| v.abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::sample_q_correlation;

    fn matrix_unit(n: usize, v: usize, w: usize) -> Matrix {
        let mut e = Matrix::zeros(n, n);
        e.set(v, w, 1.0);
        e
    }

    fn random_matrix(n: usize, seed: u64) -> Matrix {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(3);
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, next());
            }
        }
        m
    }

    #[test]
    fn identity_choi_is_entangled_projector() {
        let p = Correlation::identity(2);
        let (phi, report) = choi_of(&p).unwrap();
        for (i, j, expected) in [
            (0, 0, 1.0),
            (0, 3, 1.0),
            (3, 0, 1.0),
            (3, 3, 1.0),
            (0, 1, 0.0),
            (1, 2, 0.0),
        ] {
            assert_eq!(phi.matrix().get(i, j), expected);
        }
        assert!(report.psd);
        assert!(report.symmetry_defect < 1e-15);
    }

    #[test]
    fn sampled_correlations_have_psd_choi() {
        for seed in 0..10u64 {
            let p = sample_q_correlation(3, 2, 2, seed);
            let (_, report) = choi_of(&p).unwrap();
            assert!(
                report.min_eigenvalue >= -1e-8,
                "seed {seed}: {}",
                report.min_eigenvalue
            );
        }
    }

    #[test]
    fn counterexample_has_eigenvalue_minus_one() {
        let p = crate::membership::tests::non_vect_counterexample();
        let (_, report) = choi_of(&p).unwrap();
        assert!((report.min_eigenvalue + 1.0).abs() < 1e-9);
        assert!(!report.psd);
    }

    #[test]
    fn apply_of_identity_correlation_is_identity_map() {
        let p = Correlation::identity(3);
        let (phi, _) = choi_of(&p).unwrap();
        let a = random_matrix(3, 5);
        let image = phi.apply(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((image.get(i, j) - a.get(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn deterministic_map_sends_units_to_units() {
        let c6 = Graph::cycle(6).unwrap();
        let k2 = Graph::complete(2).unwrap();
        let f: Vec<usize> = (0..6).map(|v| v % 2).collect();
        let (p, _) = Correlation::from_homomorphism(&f, &c6, &k2).unwrap();
        let (phi, _) = choi_of(&p).unwrap();
        for v in 0..6 {
            for w in 0..6 {
                let image = phi.apply(&matrix_unit(6, v, w)).unwrap();
                for x in 0..2 {
                    for y in 0..2 {
                        let expected = if x == f[v] && y == f[w] { 1.0 } else { 0.0 };
                        assert_eq!(image.get(x, y), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn synchronous_maps_send_identity_to_trace_n() {
        let p = sample_q_correlation(4, 3, 2, 1);
        let (phi, _) = choi_of(&p).unwrap();
        let image = phi.apply(&Matrix::identity(4)).unwrap();
        assert!((image.trace() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn trace_preservation_examples() {
        let c5 = Graph::cycle(5).unwrap();
        let k3 = Graph::complete(3).unwrap();
        let (p, _) = Correlation::from_homomorphism(&[0, 1, 0, 1, 2], &c5, &k3).unwrap();
        let (phi, _) = choi_of(&p).unwrap();
        assert!(verify_trace_preserving(&phi, &c5, 1e-8).unwrap().pass);

        let k2 = Graph::complete(2).unwrap();
        let (identity, _) = Correlation::from_homomorphism(&[0, 1], &k2, &k2).unwrap();
        let (phi, _) = choi_of(&identity).unwrap();
        assert!(verify_trace_preserving(&phi, &k2, 1e-8).unwrap().pass);

        let (constant, _) = Correlation::from_homomorphism(&[0, 0], &k2, &k2).unwrap();
        let (phi, _) = choi_of(&constant).unwrap();
        let report = verify_trace_preserving(&phi, &k2, 1e-8).unwrap();
        assert!(!report.pass);
        assert!(report.failures.iter().any(|f| f.pair == (0, 1)));
    }

    #[test]
    fn support_preservation_examples() {
        let c6 = Graph::cycle(6).unwrap();
        let k2 = Graph::complete(2).unwrap();
        let f: Vec<usize> = (0..6).map(|v| v % 2).collect();
        let (p, _) = Correlation::from_homomorphism(&f, &c6, &k2).unwrap();
        let (phi, _) = choi_of(&p).unwrap();
        assert!(
            verify_operator_system_preserving(&phi, &c6, &k2, 1e-8)
                .unwrap()
                .pass
        );

        let c5 = Graph::cycle(5).unwrap();
        let (identity, _) =
            Correlation::from_homomorphism(&[0, 1, 2, 3, 4], &c5, &c5).unwrap();
        let (phi, _) = choi_of(&identity).unwrap();
        assert!(
            verify_operator_system_preserving(&phi, &c5, &c5, 1e-8)
                .unwrap()
                .pass
        );

        // Synchronous strategy placing mass on an off-diagonal non-edge
        // target pair under an edge source pair.
        let e2 = Graph::empty(2).unwrap();
        let mut bad = Correlation::zeros(2, 2);
        bad.set(0, 0, 0, 0, 1.0);
        bad.set(1, 1, 0, 0, 1.0);
        bad.set(0, 1, 0, 1, 1.0);
        bad.set(1, 0, 1, 0, 1.0);
        assert!(bad.validate().is_ok());
        assert!(bad.is_synchronous(1e-12).0);
        let (phi, _) = choi_of(&bad).unwrap();
        let report = verify_operator_system_preserving(&phi, &k2, &e2, 1e-8).unwrap();
        assert!(!report.pass);
        assert!(report
            .failures
            .iter()
            .any(|f| f.source_pair == (0, 1) && f.target_entry == (0, 1)));
    }

    #[test]
    fn sigma_and_one_norm_trivials() {
        let e11 = matrix_unit(3, 1, 1);
        assert_eq!(sigma(&e11), 1.0);
        assert_eq!(one_norm(&e11), 1.0);
        let mut ones = Matrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                ones.set(i, j, 1.0);
            }
        }
        assert_eq!(sigma(&ones), 16.0);
    }

    #[test]
    fn sigma_is_preserved_by_sampled_maps() {
        for seed in 0..5u64 {
            let p = sample_q_correlation(3, 3, 2, seed);
            let (phi, _) = choi_of(&p).unwrap();
            for matrix_seed in 0..5u64 {
                let a = random_matrix(3, matrix_seed);
                let image = phi.apply(&a).unwrap();
                assert!(
                    (sigma(&image) - sigma(&a)).abs() <= 1e-9,
                    "seed ({seed}, {matrix_seed})"
                );
            }
        }
    }

    #[test]
    fn one_norm_contracts_and_is_exact_on_nonnegative() {
        for seed in 0..5u64 {
            let p = sample_q_correlation(3, 3, 2, seed);
            let (phi, _) = choi_of(&p).unwrap();
            for matrix_seed in 0..5u64 {
                let a = random_matrix(3, matrix_seed);
                let image = phi.apply(&a).unwrap();
                assert!(one_norm(&image) <= one_norm(&a) + 1e-9);

                let mut nonneg = a.clone();
                for i in 0..3 {
                    for j in 0..3 {
                        nonneg.set(i, j, a.get(i, j).abs());
                    }
                }
                let image = phi.apply(&nonneg).unwrap();
                assert!((one_norm(&image) - one_norm(&nonneg)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn composition_is_functorial_at_the_map_level() {
        for seed in 0..5u64 {
            let p = sample_q_correlation(3, 2, 2, seed);
            let q = sample_q_correlation(2, 3, 2, seed + 100);
            let composed = Correlation::compose(&q, &p).unwrap();
            let (phi_p, _) = choi_of(&p).unwrap();
            let (phi_q, _) = choi_of(&q).unwrap();
            let (phi_r, _) = choi_of(&composed).unwrap();
            for matrix_seed in 0..4u64 {
                let a = random_matrix(3, matrix_seed);
                let via_r = phi_r.apply(&a).unwrap();
                let via_qp = phi_q.apply(&phi_p.apply(&a).unwrap()).unwrap();
                let mut worst = 0.0_f64;
                for i in 0..3 {
                    for j in 0..3 {
                        worst = worst.max((via_r.get(i, j) - via_qp.get(i, j)).abs());
                    }
                }
                assert!(worst <= 1e-10, "functoriality defect {worst}");
            }
        }
    }
}
