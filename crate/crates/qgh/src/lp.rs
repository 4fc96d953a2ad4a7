//! A small dense phase-one simplex for equality-form feasibility:
//! find `x >= 0` with `A x = b`. Bland's rule keeps pivoting deterministic
//! and cycle-free, and the phase-one optimum gives a sound infeasibility
//! verdict for these exactly-posed finite systems.

const PIVOT_EPS: f64 = 1e-11;

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Feasible(Vec<f64>),
    /// Phase-one optimum (total artificial mass) that could not be driven to
    /// zero.
    Infeasible { residual: f64 },
}

/// Solves the feasibility problem `A x = b, x >= 0`.
///
/// `rows` holds the constraint rows of `A`; `tol` bounds the artificial mass
/// accepted as "zero" (scaled by `1 + ||b||_1`).
pub fn solve_eq_feasibility(rows: &[Vec<f64>], b: &[f64], tol: f64) -> LpOutcome {
    assert_eq!(rows.len(), b.len(), "row/rhs count mismatch");
    let k = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    if k == 0 {
        return LpOutcome::Feasible(vec![0.0; n]);
    }

    // Tableau: k constraint rows + objective row; columns: n original vars,
    // k artificials, rhs.
    let cols = n + k + 1;
    let mut tableau = vec![vec![0.0_f64; cols]; k + 1];
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), n, "ragged constraint row");
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for (j, &coeff) in row.iter().enumerate() {
            tableau[i][j] = flip * coeff;
        }
        tableau[i][n + i] = 1.0;
        tableau[i][cols - 1] = flip * b[i];
    }
    // Phase-one objective: minimize the artificial sum. With artificials
    // basic, the reduced-cost row prices them out: r_j = -sum_i a_ij for
    // original columns, rhs = -sum_i b_i.
    for j in 0..n {
        let mut acc = 0.0;
        for row in tableau.iter().take(k) {
            acc += row[j];
        }
        tableau[k][j] = -acc;
    }
    let mut obj_rhs = 0.0;
    for row in tableau.iter().take(k) {
        obj_rhs += row[cols - 1];
    }
    tableau[k][cols - 1] = -obj_rhs;

    let mut basis: Vec<usize> = (n..n + k).collect();

    loop {
        // Bland: entering column = smallest index with negative reduced cost.
        let entering = (0..n + k).find(|&j| tableau[k][j] < -PIVOT_EPS);
        let Some(enter) = entering else {
            break;
        };
        // Ratio test; ties broken by the smallest basis variable (Bland).
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..k {
            let coeff = tableau[i][enter];
            if coeff > PIVOT_EPS {
                let ratio = tableau[i][cols - 1] / coeff;
                let better = ratio < best_ratio - PIVOT_EPS
                    || (ratio < best_ratio + PIVOT_EPS
                        && leave.map_or(true, |l| basis[i] < basis[l]));
                if better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(pivot_row) = leave else {
            // Unbounded phase-one cannot happen (objective bounded below by
            // zero); bail out defensively as infeasible-with-residual.
            let residual = -tableau[k][cols - 1];
            return LpOutcome::Infeasible { residual };
        };
        pivot(&mut tableau, pivot_row, enter);
        basis[pivot_row] = enter;
    }

    let residual = -tableau[k][cols - 1];
    let scale = 1.0 + b.iter().map(|v| v.abs()).sum::<f64>();
    if residual > tol * scale {
        return LpOutcome::Infeasible { residual };
    }

    let mut x = vec![0.0; n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = tableau[i][cols - 1].max(0.0);
        }
    }
    LpOutcome::Feasible(x)
}

fn pivot(tableau: &mut [Vec<f64>], row: usize, col: usize) {
    let cols = tableau[0].len();
    let scale = tableau[row][col];
    for j in 0..cols {
        tableau[row][j] /= scale;
    }
    for i in 0..tableau.len() {
        if i == row {
            continue;
        }
        let factor = tableau[i][col];
        if factor == 0.0 {
            continue;
        }
        for j in 0..cols {
            tableau[i][j] -= factor * tableau[row][j];
        }
        tableau[i][col] = 0.0;
    }
}
