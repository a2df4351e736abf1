//! Primal active-set method for strictly convex quadratic programs with a
//! diagonal Hessian, a uniform lower bound on every variable, and a few
//! general inequality rows:
//!
//! ```text
//!     minimize     1/2 sum_t q_t x_t^2 - sum_t c_t x_t      (q_t > 0)
//!     subject to   x_t >= lower_bound                       (bounds)
//!                  a_i . x <= rhs_i                         (rows)
//! ```
//!
//! Active bounds are eliminated rather than carried as working-set rows:
//! variables at the bound are fixed and the subproblem is solved over the
//! free variables only. The working-set rows are orthogonalized (in the
//! metric induced by the Hessian) with modified Gram-Schmidt; rows whose
//! restriction to the free variables is linearly dependent on earlier rows
//! are already implied, so they ride along with a zero multiplier instead of
//! making the system singular. Integer task data produces heavily degenerate
//! working sets, and this is what keeps the solve exact through them.

#[derive(Debug, Clone)]
pub struct SparseRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl SparseRow {
    fn dot(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, v)| v * x[j]).sum()
    }
}

#[derive(Debug, Clone)]
pub struct DiagQp {
    /// Diagonal Hessian entries, all strictly positive.
    pub quad: Vec<f64>,
    /// Linear objective coefficients.
    pub lin: Vec<f64>,
    /// Uniform lower bound on every variable.
    pub lower_bound: f64,
    /// General inequality rows `a . x <= rhs`.
    pub rows: Vec<SparseRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QpError {
    #[error("active-set iteration limit reached")]
    IterationLimit,
}

const STEP_TOL: f64 = 1e-11;
const MULTIPLIER_TOL: f64 = 1e-9;
const RATIO_TOL: f64 = 1e-12;

/// Minimizes the QP starting from a feasible point. Returns the optimizer,
/// which is unique because the Hessian is positive definite.
pub fn minimize(qp: &DiagQp, start: &[f64]) -> Result<Vec<f64>, QpError> {
    let n = qp.quad.len();
    debug_assert_eq!(qp.lin.len(), n);
    debug_assert!(qp.quad.iter().all(|&q| q > 0.0));

    let mut x = start.to_vec();
    let mut fixed = vec![false; n];
    let mut active: Vec<usize> = Vec::new();
    // Multipliers live on the gradient's scale; a released constraint pays
    // back only quadratically in its multiplier, so a scaled threshold
    // costs nothing measurable while keeping knife-edge multipliers from
    // toggling the working set forever.
    let multiplier_tol =
        MULTIPLIER_TOL * (1.0 + qp.lin.iter().fold(0.0f64, |m, c| m.max(c.abs())));

    let max_iters = 60 * (n + qp.rows.len()) + 200;
    let mut seen_stationary: std::collections::HashSet<(Vec<bool>, Vec<usize>)> =
        std::collections::HashSet::new();
    for _ in 0..max_iters {
        let sub = solve_subproblem(qp, &fixed, &active);

        let step: Vec<f64> = sub.point.iter().zip(&x).map(|(t, c)| t - c).collect();
        let step_size = step.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let x_scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        if step_size <= STEP_TOL * x_scale {
            // Stationary on the working set. Release the most negative
            // multiplier, or declare optimality. A recurring stationary
            // working set means a marginal multiplier is toggling on a
            // degenerate vertex; the point is optimal to within the
            // tolerance, so accept it rather than cycle.
            let mut sorted_active = active.clone();
            sorted_active.sort_unstable();
            if !seen_stationary.insert((fixed.clone(), sorted_active)) {
                return Ok(sub.point);
            }

            let mut release: Option<(f64, Release)> = None;
            for (t, &mu) in sub.bound_multipliers.iter().enumerate() {
                if fixed[t]
                    && mu < -multiplier_tol
                    && release.as_ref().is_none_or(|&(best, _)| mu < best)
                {
                    release = Some((mu, Release::Bound(t)));
                }
            }
            for (slot, _) in active.iter().enumerate() {
                let mu = sub.row_multipliers[slot];
                if mu < -multiplier_tol && release.as_ref().is_none_or(|&(best, _)| mu < best) {
                    release = Some((mu, Release::Row(slot)));
                }
            }
            match release {
                Some((_, Release::Bound(t))) => fixed[t] = false,
                Some((_, Release::Row(slot))) => {
                    active.remove(slot);
                }
                None => return Ok(sub.point),
            }
            continue;
        }

        // Ratio test: longest step toward the subproblem optimum that keeps
        // every bound and inactive row satisfied. Ties go to the lowest
        // canonical index.
        let mut alpha = 1.0f64;
        let mut blocker: Option<Blocker> = None;
        for t in 0..n {
            if !fixed[t] && step[t] < -RATIO_TOL {
                let cand = ((qp.lower_bound - x[t]) / step[t]).max(0.0);
                if cand < alpha - 1e-15 {
                    alpha = cand;
                    blocker = Some(Blocker::Bound(t));
                }
            }
        }
        for (i, row) in qp.rows.iter().enumerate() {
            if active.contains(&i) {
                continue;
            }
            let advance = row.dot(&step);
            if advance > RATIO_TOL {
                let cand = ((row.rhs - row.dot(&x)) / advance).max(0.0);
                if cand < alpha - 1e-15 {
                    alpha = cand;
                    blocker = Some(Blocker::Row(i));
                }
            }
        }

        match blocker {
            None => x = sub.point,
            Some(which) => {
                for (xi, si) in x.iter_mut().zip(&step) {
                    *xi += alpha * si;
                }
                match which {
                    Blocker::Bound(t) => {
                        fixed[t] = true;
                        x[t] = qp.lower_bound;
                    }
                    Blocker::Row(i) => active.push(i),
                }
            }
        }
    }
    Err(QpError::IterationLimit)
}

enum Release {
    Bound(usize),
    Row(usize),
}

enum Blocker {
    Bound(usize),
    Row(usize),
}

struct Subproblem {
    point: Vec<f64>,
    /// Aligned with the active set; implied (dependent) rows get zero.
    row_multipliers: Vec<f64>,
    /// Per variable; meaningful only where fixed.
    bound_multipliers: Vec<f64>,
}

/// Equality-constrained subproblem on the working set, solved by QR in the
/// variables `z = Q^(1/2) x`, where the objective is a plain Euclidean
/// projection of `z_unc = Q^(-1/2) c` onto the working-set affine subspace.
fn solve_subproblem(qp: &DiagQp, fixed: &[bool], active: &[usize]) -> Subproblem {
    let n = qp.quad.len();
    let k = active.len();
    let root_q: Vec<f64> = qp.quad.iter().map(|q| q.sqrt()).collect();

    // Unconstrained free target in z coordinates; fixed variables excluded.
    let z_unc: Vec<f64> = (0..n)
        .map(|t| {
            if fixed[t] {
                0.0
            } else {
                qp.lin[t] / root_q[t]
            }
        })
        .collect();

    // Modified Gram-Schmidt over the active rows restricted to the free
    // variables (in z coordinates). `coeff[i][j]` holds the R factor.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r_factor = vec![0.0f64; k * k];
    let mut kept: Vec<bool> = vec![false; k];
    let mut shifted_rhs = vec![0.0f64; k];
    for (j, &row_idx) in active.iter().enumerate() {
        let row = &qp.rows[row_idx];
        let mut v = vec![0.0f64; n];
        let mut original = 0.0f64;
        let mut fixed_part = 0.0f64;
        for &(t, a) in &row.coeffs {
            if fixed[t] {
                fixed_part += a * qp.lower_bound;
            } else {
                v[t] = a / root_q[t];
                original += v[t] * v[t];
            }
        }
        shifted_rhs[j] = row.rhs - fixed_part;
        for (i, u) in basis.iter().enumerate() {
            let proj: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            r_factor[i * k + j] = proj;
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let residual: f64 = v.iter().map(|a| a * a).sum();
        if residual > 1e-20 * (1.0 + original) {
            let norm = residual.sqrt();
            for vi in &mut v {
                *vi /= norm;
            }
            r_factor[basis.len() * k + j] = norm;
            kept[j] = true;
            basis.push(v);
        }
    }

    // Orthonormal-basis rhs by forward substitution through R, kept rows
    // only; dependent rows are consistent with the kept ones by construction
    // (every working-set row holds with equality at the current point).
    let mut w = Vec::with_capacity(basis.len());
    {
        let mut level = 0usize;
        for j in 0..k {
            if !kept[j] {
                continue;
            }
            let mut acc = shifted_rhs[j];
            for (i, wi) in w.iter().enumerate().take(level) {
                acc -= r_factor[i * k + j] * wi;
            }
            w.push(acc / r_factor[level * k + j]);
            level += 1;
        }
    }

    // Projection: z* = z_unc - sum_i u_i gamma_i with gamma = U' z_unc - w.
    let gamma: Vec<f64> = basis
        .iter()
        .zip(&w)
        .map(|(u, wi)| u.iter().zip(&z_unc).map(|(a, b)| a * b).sum::<f64>() - wi)
        .collect();
    let mut z_star = z_unc;
    for (u, g) in basis.iter().zip(&gamma) {
        for (zi, ui) in z_star.iter_mut().zip(u) {
            *zi -= g * ui;
        }
    }

    let point: Vec<f64> = (0..n)
        .map(|t| {
            if fixed[t] {
                qp.lower_bound
            } else {
                z_star[t] / root_q[t]
            }
        })
        .collect();

    // Row multipliers: back-substitute R' lambda_kept = gamma; implied rows
    // keep zero.
    let mut row_multipliers = vec![0.0f64; k];
    {
        let kept_slots: Vec<usize> = (0..k).filter(|&j| kept[j]).collect();
        let mut lambda = vec![0.0f64; kept_slots.len()];
        for i in (0..kept_slots.len()).rev() {
            let mut acc = gamma[i];
            for (idx, &j_slot) in kept_slots.iter().enumerate().skip(i + 1) {
                acc -= r_factor[i * k + j_slot] * lambda[idx];
            }
            lambda[i] = acc / r_factor[i * k + kept_slots[i]];
        }
        for (idx, &j) in kept_slots.iter().enumerate() {
            row_multipliers[j] = lambda[idx];
        }
    }

    // Stationarity at the fixed variables yields the bound multipliers:
    // mu_t = q_t lb - c_t + sum_i lambda_i a_i[t].
    let mut bound_multipliers: Vec<f64> = (0..n)
        .map(|t| {
            if fixed[t] {
                qp.quad[t] * qp.lower_bound - qp.lin[t]
            } else {
                0.0
            }
        })
        .collect();
    for (slot, &row_idx) in active.iter().enumerate() {
        let mu = row_multipliers[slot];
        if mu != 0.0 {
            for &(t, a) in &qp.rows[row_idx].coeffs {
                if fixed[t] {
                    bound_multipliers[t] += mu * a;
                }
            }
        }
    }

    Subproblem {
        point,
        row_multipliers,
        bound_multipliers,
    }
}
