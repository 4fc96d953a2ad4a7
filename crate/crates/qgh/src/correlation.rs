//! The correlation tensor `p(x,y|v,w)`: validation, the two winning
//! conditions of the homomorphism game, deterministic strategies, and
//! composition.
//!
//! Indexing convention: `v, w` range over the `n` inputs (vertices of the
//! source graph), `x, y` over the `m` outputs (vertices of the target graph).

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::graph::Graph;

/// Absolute slack below zero tolerated in probability entries.
pub const EPS_ENTRY: f64 = 1e-12;
/// Tolerance on the per-input-pair normalization.
pub const EPS_NORM: f64 = 1e-9;
/// Default tolerance for zero-pattern (winning-condition) checks.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum CorrelationError {
    #[error("tensor has {got} entries, expected n^2 m^2 = {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("input/output counts must be positive")]
    EmptyShape,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("correlation failed validation with {0} violation(s)")]
    Invalid(usize),
    #[error("map has {got} entries, expected {expected}")]
    MapLength { expected: usize, got: usize },
    #[error("map value {value} out of range [0, {m})")]
    MapRange { value: usize, m: usize },
}

/// Which rule a reported violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Entry below `-EPS_ENTRY`.
    Negative,
    /// Row `(v, w)` does not sum to one.
    Normalization,
    /// Condition (1): mass on unequal answers to equal questions.
    Synchronous,
    /// Condition (2): mass on non-adjacent answers to adjacent questions.
    EdgeCondition,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// `(v, w, x, y)`; normalization rows use `x = y = 0`.
    pub index: (usize, usize, usize, usize),
    pub magnitude: f64,
}

/// Outcome of the two winning-condition checks for a concrete game `(G, H)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyReport {
    pub synchronous: bool,
    pub winning: bool,
    pub violations: Vec<Violation>,
}

/// Dense correlation tensor `p[v][w][x][y]` with `n` inputs and `m` outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlation {
    n: usize,
    m: usize,
    p: Vec<f64>,
}

impl Correlation {
    /// Builds and validates a correlation from the flattened tensor
    /// (index order `[v][w][x][y]`).
    pub fn new(n: usize, m: usize, p: Vec<f64>) -> Result<Self, CorrelationError> {
        let c = Correlation::new_unchecked(n, m, p)?;
        match c.validate() {
            Ok(()) => Ok(c),
            Err(violations) => Err(CorrelationError::Invalid(violations.len())),
        }
    }

    /// Shape check only; used internally for tensors that are validated later
    /// or intentionally violate the probability rules in tests.
    pub fn new_unchecked(n: usize, m: usize, p: Vec<f64>) -> Result<Self, CorrelationError> {
        if n == 0 || m == 0 {
            return Err(CorrelationError::EmptyShape);
        }
        let expected = n * n * m * m;
        if p.len() != expected {
            return Err(CorrelationError::ShapeMismatch {
                expected,
                got: p.len(),
            });
        }
        Ok(Correlation { n, m, p })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Correlation {
            n,
            m,
            p: vec![0.0; n * n * m * m],
        }
    }

    pub fn inputs(&self) -> usize {
        self.n
    }

    pub fn outputs(&self) -> usize {
        self.m
    }

    #[inline]
    fn idx(&self, v: usize, w: usize, x: usize, y: usize) -> usize {
        ((v * self.n + w) * self.m + x) * self.m + y
    }

    #[inline]
    pub fn get(&self, v: usize, w: usize, x: usize, y: usize) -> f64 {
        self.p[self.idx(v, w, x, y)]
    }

    #[inline]
    pub fn set(&mut self, v: usize, w: usize, x: usize, y: usize, value: f64) {
        let i = self.idx(v, w, x, y);
        self.p[i] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.p
    }

    /// Checks nonnegativity and per-`(v, w)` normalization, reporting every
    /// violating index.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        for v in 0..self.n {
            for w in 0..self.n {
                let mut row_sum = 0.0;
                for x in 0..self.m {
                    for y in 0..self.m {
                        let value = self.get(v, w, x, y);
                        if value < -EPS_ENTRY {
                            violations.push(Violation {
                                kind: ViolationKind::Negative,
                                index: (v, w, x, y),
                                magnitude: -value,
                            });
                        }
                        row_sum += value;
                    }
                }
                if (row_sum - 1.0).abs() > EPS_NORM {
                    violations.push(Violation {
                        kind: ViolationKind::Normalization,
                        index: (v, w, 0, 0),
                        magnitude: (row_sum - 1.0).abs(),
                    });
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Condition (1): no mass on `x != y` when `v = w`.
    pub fn is_synchronous(&self, tol: f64) -> (bool, Vec<Violation>) {
        let mut violations = Vec::new();
        for v in 0..self.n {
            for x in 0..self.m {
                for y in 0..self.m {
                    if x == y {
                        continue;
                    }
                    let value = self.get(v, v, x, y);
                    if value > tol {
                        violations.push(Violation {
                            kind: ViolationKind::Synchronous,
                            index: (v, v, x, y),
                            magnitude: value,
                        });
                    }
                }
            }
        }
        (violations.is_empty(), violations)
    }

    /// Both winning conditions for the homomorphism game from `g` to `h`:
    /// synchronicity, and no mass on non-adjacent answer pairs (including
    /// equal answers) for adjacent questions.
    pub fn is_winning_strategy(
        &self,
        g: &Graph,
        h: &Graph,
        tol: f64,
    ) -> Result<StrategyReport, CorrelationError> {
        if g.vertex_count() != self.n || h.vertex_count() != self.m {
            return Err(CorrelationError::DimensionMismatch(format!(
                "correlation is ({}, {}), graphs are ({}, {})",
                self.n,
                self.m,
                g.vertex_count(),
                h.vertex_count()
            )));
        }
        let (synchronous, mut violations) = self.is_synchronous(tol);
        for (u, v) in g.edges() {
            for (a, b) in [(u, v), (v, u)] {
                for x in 0..self.m {
                    for y in 0..self.m {
                        if h.has_edge(x, y) {
                            continue;
                        }
                        let value = self.get(a, b, x, y);
                        if value > tol {
                            violations.push(Violation {
                                kind: ViolationKind::EdgeCondition,
                                index: (a, b, x, y),
                                magnitude: value,
                            });
                        }
                    }
                }
            }
        }
        Ok(StrategyReport {
            synchronous,
            winning: violations.is_empty(),
            violations,
        })
    }

    /// The deterministic correlation of a vertex map `f`:
    /// `p(x,y|v,w) = 1` iff `x = f(v)` and `y = f(w)`.
    ///
    /// Always builds; the returned flag says whether `f` preserves edges (so
    /// whether the strategy wins the game from `g` to `h`).
    pub fn from_homomorphism(
        f: &[usize],
        g: &Graph,
        h: &Graph,
    ) -> Result<(Correlation, bool), CorrelationError> {
        let n = g.vertex_count();
        let m = h.vertex_count();
        if f.len() != n {
            return Err(CorrelationError::MapLength {
                expected: n,
                got: f.len(),
            });
        }
        for &value in f {
            if value >= m {
                return Err(CorrelationError::MapRange { value, m });
            }
        }
        let mut c = Correlation::zeros(n, m);
        for v in 0..n {
            for w in 0..n {
                c.set(v, w, f[v], f[w], 1.0);
            }
        }
        let edge_preserving = g.edges().all(|(u, v)| h.has_edge(f[u], f[v]));
        Ok((c, edge_preserving))
    }

    /// The identity strategy on `n` vertices: answer the question verbatim.
    pub fn identity(n: usize) -> Correlation {
        let mut c = Correlation::zeros(n, n);
        for v in 0..n {
            for w in 0..n {
                c.set(v, w, v, w, 1.0);
            }
        }
        c
    }

    /// Composition `r(a,b|v,w) = sum_{x,y} q(a,b|x,y) p(x,y|v,w)`; feeds the
    /// outputs of `p` into `q`.
    pub fn compose(q: &Correlation, p: &Correlation) -> Result<Correlation, CorrelationError> {
        if q.n != p.m {
            return Err(CorrelationError::DimensionMismatch(format!(
                "q takes {} inputs but p produces {} outputs",
                q.n, p.m
            )));
        }
        let n = p.n;
        let mid = p.m;
        let l = q.m;
        let mut r = Correlation::zeros(n, l);
        for v in 0..n {
            for w in 0..n {
                for x in 0..mid {
                    for y in 0..mid {
                        let weight = p.get(v, w, x, y);
                        if weight == 0.0 {
                            continue;
                        }
                        for a in 0..l {
                            for b in 0..l {
                                let add = weight * q.get(x, y, a, b);
                                if add != 0.0 {
                                    let i = r.idx(v, w, a, b);
                                    r.p[i] += add;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(r)
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &Correlation) -> f64 {
        assert_eq!(self.n, other.n);
        assert_eq!(self.m, other.m);
        self.p
            .iter()
            .zip(&other.p)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Convex mixture `sum_i weights_i * corrs_i`.
    pub fn mixture(parts: &[(f64, &Correlation)]) -> Result<Correlation, CorrelationError> {
        let (n, m) = match parts.first() {
            Some((_, c)) => (c.n, c.m),
            None => return Err(CorrelationError::EmptyShape),
        };
        let mut out = Correlation::zeros(n, m);
        for (weight, c) in parts {
            if c.n != n || c.m != m {
                return Err(CorrelationError::DimensionMismatch(
                    "mixture parts must share a shape".into(),
                ));
            }
            for (slot, &value) in out.p.iter_mut().zip(&c.p) {
                *slot += weight * value;
            }
        }
        Ok(out)
    }
}

// JSON serialization keeps the tensor nested as p[v][w][x][y].
impl Serialize for Correlation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut nested = Vec::with_capacity(self.n);
        for v in 0..self.n {
            let mut per_w = Vec::with_capacity(self.n);
            for w in 0..self.n {
                let mut per_x = Vec::with_capacity(self.m);
                for x in 0..self.m {
                    let mut per_y = Vec::with_capacity(self.m);
                    for y in 0..self.m {
                        per_y.push(self.get(v, w, x, y));
                    }
                    per_x.push(per_y);
                }
                per_w.push(per_x);
            }
            nested.push(per_w);
        }
        let mut s = serializer.serialize_struct("Correlation", 3)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("m", &self.m)?;
        s.serialize_field("p", &nested)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for Correlation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            m: usize,
            p: Vec<Vec<Vec<Vec<f64>>>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut flat = Vec::with_capacity(raw.n * raw.n * raw.m * raw.m);
        if raw.p.len() != raw.n {
            return Err(D::Error::custom("outer tensor dimension mismatch"));
        }
        for per_w in &raw.p {
            if per_w.len() != raw.n {
                return Err(D::Error::custom("tensor dimension mismatch at w"));
            }
            for per_x in per_w {
                if per_x.len() != raw.m {
                    return Err(D::Error::custom("tensor dimension mismatch at x"));
                }
                for per_y in per_x {
                    if per_y.len() != raw.m {
                        return Err(D::Error::custom("tensor dimension mismatch at y"));
                    }
                    flat.extend_from_slice(per_y);
                }
            }
        }
        Correlation::new_unchecked(raw.n, raw.m, flat).map_err(D::Error::custom)
    }
}
