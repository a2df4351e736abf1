//! Dense tableau simplex for the small master LPs.
//!
//! Solves `maximize c'x  subject to  Ax <= b, x >= 0` with `b >= 0`, so the
//! all-slack basis is feasible and no phase-1 is needed. Rows are given
//! sparsely; the tableau is dense. Dantzig pricing with a switch to Bland's
//! rule after a fixed iteration budget guards against cycling on the highly
//! degenerate instances that integer durations produce.

/// A row `a . x <= rhs` with sparse coefficients.
#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct DenseLp {
    /// Number of structural variables.
    pub n_vars: usize,
    /// Objective coefficients (maximized), length `n_vars`.
    pub objective: Vec<f64>,
    /// Constraint rows; every `rhs` must be non-negative.
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimplexError {
    #[error("LP is unbounded")]
    Unbounded,
    #[error("simplex iteration limit reached")]
    IterationLimit,
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;

pub fn maximize(lp: &DenseLp) -> Result<(f64, Vec<f64>), SimplexError> {
    let n = lp.n_vars;
    let m = lp.rows.len();
    let width = n + m + 1;

    // Tableau rows: [structural | slack | rhs]; cost row holds -c.
    let mut tab = vec![0.0f64; m * width];
    let mut basis = Vec::with_capacity(m);
    for (i, row) in lp.rows.iter().enumerate() {
        debug_assert!(row.rhs >= 0.0, "simplex rhs must be non-negative");
        let r = &mut tab[i * width..(i + 1) * width];
        for &(j, v) in &row.coeffs {
            r[j] += v;
        }
        r[n + i] = 1.0;
        r[width - 1] = row.rhs;
        basis.push(n + i);
    }
    let mut cost = vec![0.0f64; width];
    for j in 0..n {
        cost[j] = -lp.objective[j];
    }

    let bland_after = 4 * (n + m) + 50;
    let max_iters = 100 * (n + m) + 1000;

    for iter in 0..max_iters {
        let bland = iter >= bland_after;

        // Entering column: most negative reduced cost (Dantzig), or the first
        // negative one under Bland's rule. Ties resolve to the lowest index.
        let mut enter = None;
        let mut best = -COST_TOL;
        for (j, &cj) in cost[..n + m].iter().enumerate() {
            if cj < best {
                enter = Some(j);
                if bland {
                    break;
                }
                best = cj;
            }
        }
        let Some(enter) = enter else {
            // Optimal: read off the solution.
            let mut x = vec![0.0; n];
            for (i, &b) in basis.iter().enumerate() {
                if b < n {
                    x[b] = tab[i * width + width - 1];
                }
            }
            return Ok((cost[width - 1], x));
        };

        // Leaving row: minimum ratio; ties resolve to the row whose basic
        // variable has the lowest index (Bland-compatible).
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let a = tab[i * width + enter];
            if a > PIVOT_TOL {
                let ratio = tab[i * width + width - 1] / a;
                let better = match leave {
                    None => true,
                    Some(cur) => {
                        ratio < best_ratio - 1e-12
                            || (ratio < best_ratio + 1e-12 && basis[i] < basis[cur])
                    }
                };
                if better {
                    leave = Some(i);
                    best_ratio = best_ratio.min(ratio);
                }
            }
        }
        let Some(leave) = leave else {
            return Err(SimplexError::Unbounded);
        };

        pivot(&mut tab, &mut cost, width, leave, enter);
        basis[leave] = enter;
    }
    Err(SimplexError::IterationLimit)
}

fn pivot(tab: &mut [f64], cost: &mut [f64], width: usize, row: usize, col: usize) {
    let m = tab.len() / width;
    let piv = tab[row * width + col];
    let inv = 1.0 / piv;
    for v in &mut tab[row * width..(row + 1) * width] {
        *v *= inv;
    }
    tab[row * width + col] = 1.0;

    for i in 0..m {
        if i == row {
            continue;
        }
        let factor = tab[i * width + col];
        if factor != 0.0 {
            for j in 0..width {
                tab[i * width + j] -= factor * tab[row * width + j];
            }
            tab[i * width + col] = 0.0;
        }
    }
    let factor = cost[col];
    if factor != 0.0 {
        // The rhs cell of the cost row carries the current objective value.
        for j in 0..width {
            cost[j] -= factor * tab[row * width + j];
        }
        cost[col] = 0.0;
    }
}
