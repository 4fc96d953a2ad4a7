//! A dense first-order semidefinite solver.
//!
//! Problems are posed over one symmetric matrix variable `X`:
//! maximize `<C, X>` subject to `<A_i, X> = b_i`, entries in `zero_pattern`
//! pinned to zero, entries in `nonneg_pattern` kept nonnegative, and `X` PSD.
//!
//! The method is consensus ADMM over three prox-friendly blocks: the affine
//! set (pins plus general equalities, projected through a precomputed Gram
//! pseudo-inverse), the PSD cone (eigenvalue truncation, warm-started between
//! iterations), and the nonnegativity box. Infeasibility is certified only
//! heuristically, by a stalled consensus gap; affine-level contradictions are
//! detected exactly up front.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, LinalgError, Matrix, SymMatrix};

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("constraint matrix dimension {got} does not match problem dimension {expected}")]
    ConstraintDim { expected: usize, got: usize },
    #[error("index ({0}, {1}) out of range")]
    IndexOutOfRange(usize, usize),
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Semidefinite program over one symmetric matrix variable.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    dim: usize,
    objective: SymMatrix,
    eq_constraints: Vec<(SymMatrix, f64)>,
    zero_pattern: Vec<(usize, usize)>,
    nonneg_pattern: Vec<(usize, usize)>,
}

impl SdpProblem {
    pub fn new(dim: usize) -> Self {
        SdpProblem {
            dim,
            objective: SymMatrix::zeros(dim),
            eq_constraints: Vec::new(),
            zero_pattern: Vec::new(),
            nonneg_pattern: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set_objective(&mut self, c: SymMatrix) -> Result<(), SdpError> {
        if c.dim() != self.dim {
            return Err(SdpError::ConstraintDim {
                expected: self.dim,
                got: c.dim(),
            });
        }
        self.objective = c;
        Ok(())
    }

    pub fn add_eq(&mut self, a: SymMatrix, b: f64) -> Result<(), SdpError> {
        if a.dim() != self.dim {
            return Err(SdpError::ConstraintDim {
                expected: self.dim,
                got: a.dim(),
            });
        }
        self.eq_constraints.push((a, b));
        Ok(())
    }

    /// Convenience: `trace(X) = value`.
    pub fn add_trace_eq(&mut self, value: f64) {
        self.eq_constraints
            .push((SymMatrix::identity(self.dim), value));
    }

    /// Convenience: `X[i][j] = value` (single-entry equality).
    pub fn pin_value(&mut self, i: usize, j: usize, value: f64) -> Result<(), SdpError> {
        if i >= self.dim || j >= self.dim {
            return Err(SdpError::IndexOutOfRange(i, j));
        }
        let mut a = SymMatrix::zeros(self.dim);
        if i == j {
            a.set(i, i, 1.0);
        } else {
            a.set(i, j, 0.5);
        }
        self.eq_constraints.push((a, value));
        Ok(())
    }

    pub fn pin_zero(&mut self, i: usize, j: usize) -> Result<(), SdpError> {
        if i >= self.dim || j >= self.dim {
            return Err(SdpError::IndexOutOfRange(i, j));
        }
        self.zero_pattern.push((i, j));
        Ok(())
    }

    pub fn require_nonneg(&mut self, i: usize, j: usize) -> Result<(), SdpError> {
        if i >= self.dim || j >= self.dim {
            return Err(SdpError::IndexOutOfRange(i, j));
        }
        self.nonneg_pattern.push((i, j));
        Ok(())
    }

    pub fn require_nonneg_everywhere(&mut self) {
        for i in 0..self.dim {
            for j in i..self.dim {
                self.nonneg_pattern.push((i, j));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    InfeasibleHeuristic,
    MaxIterations,
}

/// One sampled row of the solver's iteration log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationStat {
    pub iteration: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: SymMatrix,
    pub objective_value: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// True when the equality constraints and pins alone are contradictory
    /// (detected exactly; the status is still reported as heuristic).
    pub affine_inconsistent: bool,
    pub trace_log: Vec<IterationStat>,
}

#[derive(Debug, Clone)]
pub struct SolveParams {
    pub tol: f64,
    pub max_iter: usize,
    pub record_trace: bool,
    pub trace_every: usize,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            tol: 1e-7,
            max_iter: 50_000,
            record_trace: false,
            trace_every: 100,
        }
    }
}

impl SolveParams {
    pub fn with_tol(tol: f64) -> Self {
        SolveParams {
            tol,
            ..Default::default()
        }
    }
}

// Iterations with no relative gap improvement before a consensus gap still
// above 10*tol is reported as heuristic infeasibility.
const STALL_WINDOW: usize = 1000;
const STALL_IMPROVEMENT: f64 = 1e-3;
const RHO_ADAPT_PERIOD: usize = 50;
const RHO_MIN: f64 = 1e-4;
const RHO_MAX: f64 = 1e4;
// Cold-restart period for the warm eigenbasis, guarding orthogonality drift.
const WARM_RESET: usize = 500;

struct AffineProjector {
    /// Pinned flat indices (both orientations) with their values.
    pins: Vec<(usize, f64)>,
    pinned_mask: Vec<bool>,
    /// General constraints restricted to free entries: sparse (flat index, coeff).
    supports: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    gram_pinv: Matrix,
}

enum AffineBuild {
    Ok(AffineProjector),
    Inconsistent,
}

fn build_affine(problem: &SdpProblem) -> Result<AffineBuild, SdpError> {
    let dim = problem.dim;
    let flat = |i: usize, j: usize| i * dim + j;

    // Collect pins: the zero pattern plus every single-entry equality.
    let mut pin_values: BTreeMap<usize, f64> = BTreeMap::new();
    let mut consistent = true;
    let insert_pin = |idx: usize, value: f64, pin_values: &mut BTreeMap<usize, f64>| {
        match pin_values.get(&idx) {
            Some(&existing) if (existing - value).abs() > 1e-9 * (1.0 + value.abs()) => false,
            _ => {
                pin_values.insert(idx, value);
                true
            }
        }
    };
    for &(i, j) in &problem.zero_pattern {
        consistent &= insert_pin(flat(i, j), 0.0, &mut pin_values);
        consistent &= insert_pin(flat(j, i), 0.0, &mut pin_values);
    }

    let mut general: Vec<(&SymMatrix, f64)> = Vec::new();
    for (a, b) in &problem.eq_constraints {
        let mut nonzeros: Vec<(usize, usize)> = Vec::new();
        'scan: for i in 0..dim {
            for j in 0..dim {
                if a.get(i, j) != 0.0 {
                    nonzeros.push((i, j));
                    if nonzeros.len() > 2 {
                        break 'scan;
                    }
                }
            }
        }
        let single = match nonzeros.as_slice() {
            [(i, j)] if i == j => Some((*i, *i, a.get(*i, *i))),
            [(i1, j1), (i2, j2)] if i1 == j2 && j1 == i2 && i1 != j1 => {
                Some((*i1, *j1, 2.0 * a.get(*i1, *j1)))
            }
            _ => None,
        };
        match single {
            Some((i, j, coeff)) if coeff != 0.0 => {
                let value = b / coeff;
                consistent &= insert_pin(flat(i, j), value, &mut pin_values);
                consistent &= insert_pin(flat(j, i), value, &mut pin_values);
            }
            _ => general.push((a, *b)),
        }
    }
    if !consistent {
        return Ok(AffineBuild::Inconsistent);
    }

    let mut pinned_mask = vec![false; dim * dim];
    let mut pins = Vec::with_capacity(pin_values.len());
    for (&idx, &value) in &pin_values {
        pinned_mask[idx] = true;
        pins.push((idx, value));
    }

    // Restrict general constraints to free entries, folding pinned entries
    // into the right-hand side.
    let mut supports = Vec::with_capacity(general.len());
    let mut rhs = Vec::with_capacity(general.len());
    for (a, b) in &general {
        let mut support = Vec::new();
        let mut shift = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let coeff = a.get(i, j);
                if coeff == 0.0 {
                    continue;
                }
                let idx = flat(i, j);
                if pinned_mask[idx] {
                    shift += coeff * pin_values[&idx];
                } else {
                    support.push((idx, coeff));
                }
            }
        }
        supports.push(support);
        rhs.push(b - shift);
    }

    // Gram pseudo-inverse of the restricted constraints.
    let k = supports.len();
    let mut gram = SymMatrix::zeros(k.max(1));
    for p in 0..k {
        for q in p..k {
            let mut dot = 0.0;
            // Supports are built in ascending flat order; merge join.
            let (mut ip, mut iq) = (0usize, 0usize);
            let (sp, sq) = (&supports[p], &supports[q]);
            while ip < sp.len() && iq < sq.len() {
                match sp[ip].0.cmp(&sq[iq].0) {
                    std::cmp::Ordering::Less => ip += 1,
                    std::cmp::Ordering::Greater => iq += 1,
                    std::cmp::Ordering::Equal => {
                        dot += sp[ip].1 * sq[iq].1;
                        ip += 1;
                        iq += 1;
                    }
                }
            }
            gram.set(p, q, dot);
        }
    }
    let gram_pinv = pseudo_inverse(&gram)?;

    let projector = AffineProjector {
        pins,
        pinned_mask,
        supports,
        rhs,
        gram_pinv,
    };

    // Exact affine consistency check: project once and test the residual.
    let projected = projector.project(&SymMatrix::zeros(dim));
    for (idx, support) in projector.supports.iter().enumerate() {
        let value: f64 = support
            .iter()
            .map(|&(f, c)| c * projected.data()[f])
            .sum();
        let target = projector.rhs[idx];
        if (value - target).abs() > 1e-6 * (1.0 + target.abs()) {
            return Ok(AffineBuild::Inconsistent);
        }
    }

    Ok(AffineBuild::Ok(projector))
}

fn pseudo_inverse(gram: &SymMatrix) -> Result<Matrix, SdpError> {
    let (vals, vecs) = linalg::eig_sym(gram)?;
    let k = gram.dim();
    let cutoff = 1e-12
        * vals
            .iter()
            .fold(0.0_f64, |a, &v| a.max(v.abs()))
            .max(1e-300);
    let mut out = Matrix::zeros(k, k);
    for r in 0..k {
        if vals[r].abs() <= cutoff {
            continue;
        }
        let inv = 1.0 / vals[r];
        for i in 0..k {
            let vi = vecs.get(i, r) * inv;
            if vi == 0.0 {
                continue;
            }
            for j in 0..k {
                out.set(i, j, out.get(i, j) + vi * vecs.get(j, r));
            }
        }
    }
    Ok(out)
}

impl AffineProjector {
    fn project(&self, y: &SymMatrix) -> SymMatrix {
        let mut x = y.clone();
        // Pins come in mirrored pairs and the general supports are symmetric
        // matrices, so raw writes keep the storage symmetric.
        let data = x.data_mut();
        for &(idx, value) in &self.pins {
            data[idx] = value;
        }
        let k = self.supports.len();
        if k == 0 {
            return x;
        }
        let mut residual = vec![0.0; k];
        for (row, support) in self.supports.iter().enumerate() {
            let value: f64 = support.iter().map(|&(f, c)| c * data[f]).sum();
            residual[row] = self.rhs[row] - value;
        }
        let mut lambda = vec![0.0; k];
        for (i, slot) in lambda.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, r) in residual.iter().enumerate() {
                acc += self.gram_pinv.get(i, j) * r;
            }
            *slot = acc;
        }
        for (row, support) in self.supports.iter().enumerate() {
            let l = lambda[row];
            if l == 0.0 {
                continue;
            }
            for &(f, c) in support {
                data[f] += l * c;
            }
        }
        x
    }
}

/// Warm-startable PSD projection: reuses the previous eigenbasis to
/// pre-diagonalize, which leaves the Jacobi sweep almost no work between
/// consecutive ADMM iterates.
struct WarmPsd {
    basis: Option<Matrix>,
    since_reset: usize,
}

impl WarmPsd {
    fn new() -> Self {
        WarmPsd {
            basis: None,
            since_reset: 0,
        }
    }

    fn project(&mut self, m: &SymMatrix) -> Result<SymMatrix, LinalgError> {
        let n = m.dim();
        self.since_reset += 1;
        if self.since_reset > WARM_RESET {
            self.basis = None;
            self.since_reset = 0;
        }
        let (vals, vecs) = match &self.basis {
            None => linalg::eig_sym(m)?,
            Some(v) => {
                // B = V^T M V is nearly diagonal; diagonalize the rest.
                let mt = m.to_matrix();
                let b = v.transpose().matmul(&mt).matmul(v);
                let mut b_sym = SymMatrix::zeros(n);
                for i in 0..n {
                    for j in i..n {
                        b_sym.set(i, j, 0.5 * (b.get(i, j) + b.get(j, i)));
                    }
                }
                let (vals, w) = linalg::eig_sym(&b_sym)?;
                (vals, v.matmul(&w))
            }
        };
        let mut out = SymMatrix::zeros(n);
        for (k, &lambda) in vals.iter().enumerate() {
            if lambda <= 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = vecs.get(i, k) * lambda;
                if vi == 0.0 {
                    continue;
                }
                for j in i..n {
                    let add = vi * vecs.get(j, k);
                    out.set(i, j, out.get(i, j) + add);
                }
            }
        }
        self.basis = Some(vecs);
        Ok(out)
    }
}

pub fn solve_sdp(problem: &SdpProblem, params: &SolveParams) -> Result<SdpSolution, SdpError> {
    if params.tol <= 0.0 {
        return Err(SdpError::BadTolerance);
    }
    let dim = problem.dim;
    let affine = match build_affine(problem)? {
        AffineBuild::Ok(p) => p,
        AffineBuild::Inconsistent => {
            return Ok(SdpSolution {
                x: SymMatrix::zeros(dim),
                objective_value: 0.0,
                primal_residual: f64::INFINITY,
                dual_residual: f64::INFINITY,
                status: SolveStatus::InfeasibleHeuristic,
                iterations: 0,
                affine_inconsistent: true,
                trace_log: Vec::new(),
            });
        }
    };

    // Nonnegativity pattern as flat indices, minus pinned entries.
    let mut nonneg: Vec<usize> = Vec::new();
    for &(i, j) in &problem.nonneg_pattern {
        for idx in [i * dim + j, j * dim + i] {
            if !affine.pinned_mask[idx] {
                nonneg.push(idx);
            }
        }
    }
    nonneg.sort_unstable();
    nonneg.dedup();
    let use_box = !nonneg.is_empty();
    let blocks = if use_box { 3.0 } else { 2.0 };

    let mut z = affine.project(&SymMatrix::zeros(dim));
    let mut u_affine = SymMatrix::zeros(dim);
    let mut u_psd = SymMatrix::zeros(dim);
    let mut u_box = SymMatrix::zeros(dim);
    let mut warm = WarmPsd::new();

    let mut rho = 1.0_f64;
    let mut best_gap = f64::INFINITY;
    let mut since_improvement = 0usize;
    let mut status = SolveStatus::MaxIterations;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut trace_log = Vec::new();
    let mut iterations = 0usize;

    for iter in 0..params.max_iter {
        iterations = iter + 1;

        let x_affine = affine.project(&z.sub(&u_affine));
        let x_psd = warm.project(&z.sub(&u_psd))?;
        let x_box = if use_box {
            let mut b = z.sub(&u_box);
            let data = b.data_mut();
            for &idx in &nonneg {
                if data[idx] < 0.0 {
                    data[idx] = 0.0;
                }
            }
            Some(b)
        } else {
            None
        };

        // Consensus update, including the prox of the linear objective.
        let mut z_new = x_affine.add(&u_affine).add(&x_psd.add(&u_psd));
        if let Some(xb) = &x_box {
            z_new = z_new.add(&xb.add(&u_box));
        }
        z_new = z_new.scale(1.0 / blocks);
        z_new = z_new.add(&problem.objective.scale(1.0 / (blocks * rho)));

        u_affine = u_affine.add(&x_affine.sub(&z_new));
        u_psd = u_psd.add(&x_psd.sub(&z_new));
        if let Some(xb) = &x_box {
            u_box = u_box.add(&xb.sub(&z_new));
        }

        let scale = 1.0 + z_new.frobenius_norm();
        let mut gap = x_affine.sub(&z_new).frobenius_norm();
        gap = gap.max(x_psd.sub(&z_new).frobenius_norm());
        if let Some(xb) = &x_box {
            gap = gap.max(xb.sub(&z_new).frobenius_norm());
        }
        primal = gap / scale;
        dual = rho * blocks.sqrt() * z_new.sub(&z).frobenius_norm() / scale;
        z = z_new;

        if params.record_trace && iter % params.trace_every == 0 {
            trace_log.push(IterationStat {
                iteration: iter,
                primal_residual: primal,
                dual_residual: dual,
                rho,
            });
        }

        if primal.max(dual) <= params.tol {
            status = SolveStatus::Optimal;
            break;
        }

        // Heuristic infeasibility: the consensus gap stopped improving while
        // still far from the feasibility tolerance.
        if primal < best_gap * (1.0 - STALL_IMPROVEMENT) {
            best_gap = primal;
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }
        if since_improvement >= STALL_WINDOW && primal > 10.0 * params.tol {
            status = SolveStatus::InfeasibleHeuristic;
            break;
        }

        if iter % RHO_ADAPT_PERIOD == RHO_ADAPT_PERIOD - 1 {
            let mut factor = 1.0;
            if primal > 10.0 * dual && rho < RHO_MAX {
                factor = 2.0;
            } else if dual > 10.0 * primal && rho > RHO_MIN {
                factor = 0.5;
            }
            if factor != 1.0 {
                rho *= factor;
                let rescale = 1.0 / factor;
                u_affine = u_affine.scale(rescale);
                u_psd = u_psd.scale(rescale);
                u_box = u_box.scale(rescale);
                since_improvement = 0;
                best_gap = f64::INFINITY;
            }
        }
    }

    // Assemble the reported point: re-apply pins and box clips on the
    // consensus, then land inside the PSD cone.
    let mut assembled = z.clone();
    {
        let data = assembled.data_mut();
        for &(idx, value) in &affine.pins {
            data[idx] = value;
        }
        for &idx in &nonneg {
            if data[idx] < 0.0 {
                data[idx] = 0.0;
            }
        }
    }
    let x = linalg::psd_project(&assembled)?;
    let objective_value = problem.objective.dot(&x);

    Ok(SdpSolution {
        x,
        objective_value,
        primal_residual: primal,
        dual_residual: dual,
        status,
        iterations,
        affine_inconsistent: false,
        trace_log,
    })
}
