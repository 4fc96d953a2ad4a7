//! Seeded generators: synchronous quantum correlations from Haar-random
//! projective measurements, and a Monte Carlo referee for the homomorphism
//! game.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::correlation::Correlation;
use crate::graph::Graph;

/// Draws a Haar-random `d x d` unitary: QR of a complex Gaussian matrix with
/// the phases of the diagonal of `R` absorbed into the columns.
fn haar_unitary(d: usize, rng: &mut impl Rng) -> Vec<Vec<Complex64>> {
    let mut columns: Vec<Vec<Complex64>> = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let re: f64 = sample_standard_normal(rng);
                    let im: f64 = sample_standard_normal(rng);
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    // Modified Gram-Schmidt with positive-real pivot phases.
    for k in 0..d {
        for prev in 0..k {
            let proj: Complex64 = columns[prev]
                .iter()
                .zip(&columns[k])
                .map(|(a, b)| a.conj() * b)
                .sum();
            for i in 0..d {
                let delta = proj * columns[prev][i];
                columns[k][i] -= delta;
            }
        }
        let norm: f64 = columns[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let pivot = columns[k][0];
        let phase = if pivot.norm() > 1e-300 {
            pivot / pivot.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let scale = phase.conj() / norm;
        for z in &mut columns[k] {
            *z *= scale;
        }
    }
    columns
}

fn sample_standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; two uniform draws per call keep the stream layout simple.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Draws one Haar-random projective measurement per input and returns the
/// tracial correlation `p(x,y|v,w) = tr(P_{v,x} P_{w,y}) / d`.
///
/// Each measurement groups the columns of a Haar unitary into `m` projectors
/// by a uniformly random assignment, so outputs are synchronous, symmetric in
/// `(v,x) <-> (w,y)`, and normalized by construction.
pub fn sample_q_correlation(n: usize, m: usize, d: usize, seed: u64) -> Correlation {
    assert!(n >= 1 && m >= 1 && d >= 1, "shape must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Projectors stored as column groups: projector[v][x] = list of columns.
    let mut groups: Vec<Vec<Vec<Vec<Complex64>>>> = Vec::with_capacity(n);
    for _ in 0..n {
        let unitary = haar_unitary(d, &mut rng);
        let mut per_output: Vec<Vec<Vec<Complex64>>> = vec![Vec::new(); m];
        for column in unitary {
            let output = rng.gen_range(0..m);
            per_output[output].push(column);
        }
        groups.push(per_output);
    }

    let mut p = Correlation::zeros(n, m);
    for v in 0..n {
        for w in 0..n {
            for x in 0..m {
                for y in 0..m {
                    // tr(P Q) with P = sum_a u_a u_a*, Q = sum_b q_b q_b*:
                    // sum_{a,b} |<u_a, q_b>|^2.
                    let mut trace = 0.0;
                    for u in &groups[v][x] {
                        for q in &groups[w][y] {
                            let inner: Complex64 =
                                u.iter().zip(q).map(|(a, b)| a.conj() * b).sum();
                            trace += inner.norm_sqr();
                        }
                    }
                    p.set(v, w, x, y, trace / d as f64);
                }
            }
        }
    }
    p
}

/// How the referee draws question pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefereeDistribution {
    /// Uniform over all ordered vertex pairs of the source graph.
    UniformPairs,
    /// Uniform over the diagonal plus both orientations of each edge.
    EdgesOnly,
}

fn question_pairs(g: &Graph, distribution: RefereeDistribution) -> Vec<(usize, usize)> {
    let n = g.vertex_count();
    match distribution {
        RefereeDistribution::UniformPairs => {
            let mut pairs = Vec::with_capacity(n * n);
            for v in 0..n {
                for w in 0..n {
                    pairs.push((v, w));
                }
            }
            pairs
        }
        RefereeDistribution::EdgesOnly => {
            let mut pairs: Vec<(usize, usize)> = (0..n).map(|v| (v, v)).collect();
            for (u, v) in g.edges() {
                pairs.push((u, v));
                pairs.push((v, u));
            }
            pairs
        }
    }
}

fn wins(g: &Graph, h: &Graph, v: usize, w: usize, x: usize, y: usize) -> bool {
    if v == w && x != y {
        return false;
    }
    if g.has_edge(v, w) && !h.has_edge(x, y) {
        return false;
    }
    true
}

/// Monte Carlo estimate of the winning frequency of `p` in the homomorphism
/// game from `g` to `h`. Each trial uses its own counter-derived stream, so
/// the result depends only on `(seed, trials)`.
pub fn simulate_game(
    p: &Correlation,
    g: &Graph,
    h: &Graph,
    trials: u64,
    seed: u64,
    distribution: RefereeDistribution,
) -> f64 {
    assert!(trials >= 1, "at least one trial");
    let pairs = question_pairs(g, distribution);
    let m = p.outputs();
    let mut wins_count = 0u64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial + 1);
        let (v, w) = pairs[rng.gen_range(0..pairs.len())];
        // Inverse-CDF sampling over the outcome distribution for (v, w);
        // stray negative mass (within validation slack) is clipped.
        let mut mass = 0.0;
        for x in 0..m {
            for y in 0..m {
                mass += p.get(v, w, x, y).max(0.0);
            }
        }
        let target: f64 = rng.gen::<f64>() * mass;
        let mut acc = 0.0;
        let mut chosen = (m - 1, m - 1);
        'outer: for x in 0..m {
            for y in 0..m {
                acc += p.get(v, w, x, y).max(0.0);
                if target < acc {
                    chosen = (x, y);
                    break 'outer;
                }
            }
        }
        if wins(g, h, v, w, chosen.0, chosen.1) {
            wins_count += 1;
        }
    }
    wins_count as f64 / trials as f64
}

/// Exact winning probability of `p` under the referee distribution, by direct
/// summation over questions and outcomes.
pub fn exact_win_probability(
    p: &Correlation,
    g: &Graph,
    h: &Graph,
    distribution: RefereeDistribution,
) -> f64 {
    let pairs = question_pairs(g, distribution);
    let m = p.outputs();
    let mut total = 0.0;
    for &(v, w) in &pairs {
        let mut mass = 0.0;
        let mut winning = 0.0;
        for x in 0..m {
            for y in 0..m {
                let value = p.get(v, w, x, y).max(0.0);
                mass += value;
                if wins(g, h, v, w, x, y) {
                    winning += value;
                }
            }
        }
        total += winning / mass;
    }
    total / pairs.len() as f64
}
