//! Brute-force LP oracle: enumerate every candidate basic point (each choice
//! of `dim` active constraints), keep the feasible ones, and take the best
//! objective value. Exponential, exact, and entirely independent of the
//! production solver.

/// `maximize objective . x` subject to `ineqs` (`a . x <= b`) and `eqs`
/// (`a . x == b`), all rows dense.
#[derive(Debug, Clone)]
pub struct OracleLp {
    pub dim: usize,
    pub objective: Vec<f64>,
    pub ineqs: Vec<(Vec<f64>, f64)>,
    pub eqs: Vec<(Vec<f64>, f64)>,
}

const FEAS_TOL: f64 = 1e-7;

pub fn vertex_enumerate_max(lp: &OracleLp) -> Option<(f64, Vec<f64>)> {
    let d = lp.dim;
    let fixed = lp.eqs.len();
    assert!(fixed <= d, "more equalities than dimensions");
    let free = d - fixed;

    let mut best: Option<(f64, Vec<f64>)> = None;
    for_each_combination(lp.ineqs.len(), free, &mut |chosen| {
        let mut matrix = Vec::with_capacity(d * d);
        let mut rhs = Vec::with_capacity(d);
        for (row, b) in &lp.eqs {
            matrix.extend_from_slice(row);
            rhs.push(*b);
        }
        for &i in chosen {
            matrix.extend_from_slice(&lp.ineqs[i].0);
            rhs.push(lp.ineqs[i].1);
        }
        let Some(x) = solve_square(&matrix, &rhs, d) else {
            return;
        };
        if !is_feasible(lp, &x) {
            return;
        }
        let value: f64 = lp.objective.iter().zip(&x).map(|(c, xi)| c * xi).sum();
        if best.as_ref().is_none_or(|(cur, _)| value > *cur) {
            best = Some((value, x));
        }
    });
    best
}

pub fn is_feasible(lp: &OracleLp, x: &[f64]) -> bool {
    for (row, b) in &lp.ineqs {
        let lhs: f64 = row.iter().zip(x).map(|(a, xi)| a * xi).sum();
        if lhs > b + FEAS_TOL * (1.0 + b.abs()) {
            return false;
        }
    }
    for (row, b) in &lp.eqs {
        let lhs: f64 = row.iter().zip(x).map(|(a, xi)| a * xi).sum();
        if (lhs - b).abs() > FEAS_TOL * (1.0 + b.abs()) {
            return false;
        }
    }
    true
}

/// Gaussian elimination with partial pivoting; None when singular.
fn solve_square(matrix: &[f64], rhs: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut a = matrix.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..d {
        let (pivot_row, pivot_val) = (col..d)
            .map(|r| (r, a[r * d + col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pivot_val < 1e-9 {
            return None;
        }
        if pivot_row != col {
            for j in 0..d {
                a.swap(col * d + j, pivot_row * d + j);
            }
            b.swap(col, pivot_row);
        }
        let inv = 1.0 / a[col * d + col];
        for r in col + 1..d {
            let factor = a[r * d + col] * inv;
            if factor != 0.0 {
                for j in col..d {
                    a[r * d + j] -= factor * a[col * d + j];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; d];
    for r in (0..d).rev() {
        let mut acc = b[r];
        for j in r + 1..d {
            acc -= a[r * d + j] * x[j];
        }
        x[r] = acc / a[r * d + r];
    }
    Some(x)
}

/// Calls `f` with every k-subset of `0..n` in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
