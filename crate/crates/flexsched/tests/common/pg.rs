//! Quadratic-program oracle: projected gradient descent where each projection
//! onto the feasible polytope is computed by Dykstra's alternating method
//! over the individual half-spaces. Slow and simple; shares no code with the
//! production active-set solver.

/// `minimize sum_t w_t (targets_t - x_t)^2` over the intersection of
/// `halfspaces` (`a . x <= b`) and the optional hyperplane (`a . x == b`).
#[derive(Debug, Clone)]
pub struct PgProblem {
    pub weights: Vec<f64>,
    pub targets: Vec<f64>,
    pub halfspaces: Vec<(Vec<f64>, f64)>,
    pub hyperplane: Option<(Vec<f64>, f64)>,
}

impl PgProblem {
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&self.targets)
            .zip(x)
            .map(|((&w, &target), &xi)| w * (target - xi) * (target - xi))
            .sum()
    }
}

/// Dykstra's algorithm for the Euclidean projection onto the intersection.
fn project(problem: &PgProblem, point: &[f64], sweeps: usize) -> Vec<f64> {
    let n = point.len();
    let n_sets = problem.halfspaces.len() + usize::from(problem.hyperplane.is_some());
    let mut x = point.to_vec();
    let mut corrections = vec![vec![0.0; n]; n_sets];

    for _ in 0..sweeps {
        let mut set_idx = 0;
        for (row, rhs) in problem
            .halfspaces
            .iter()
            .chain(problem.hyperplane.iter())
        {
            let correction = &mut corrections[set_idx];
            set_idx += 1;
            let mut y: Vec<f64> = x.iter().zip(correction.iter()).map(|(a, c)| a + c).collect();
            let overshoot: f64 = row.iter().zip(&y).map(|(a, yi)| a * yi).sum::<f64>() - rhs;
            let norm_sq: f64 = row.iter().map(|a| a * a).sum();
            let is_hyperplane = set_idx == n_sets && problem.hyperplane.is_some();
            if (overshoot > 0.0 || is_hyperplane) && norm_sq > 0.0 {
                let scale = overshoot / norm_sq;
                for (yi, a) in y.iter_mut().zip(row) {
                    *yi -= scale * a;
                }
            }
            for ((c, yi), xi) in correction.iter_mut().zip(&y).zip(&x) {
                *c = xi + *c - yi;
            }
            x = y;
        }
    }
    x
}

/// Runs projected gradient from a feasible start until the iterates settle
/// or the iteration budget runs out. Returns the final point.
pub fn projected_gradient(
    problem: &PgProblem,
    start: &[f64],
    max_iters: usize,
    sweeps: usize,
) -> Vec<f64> {
    let lipschitz = 2.0 * problem.weights.iter().fold(0.0f64, |m, &w| m.max(w));
    let gamma = 1.0 / lipschitz;
    let mut x = start.to_vec();
    for _ in 0..max_iters {
        let stepped: Vec<f64> = x
            .iter()
            .zip(&problem.weights)
            .zip(&problem.targets)
            .map(|((&xi, &w), &target)| xi - gamma * 2.0 * w * (xi - target))
            .collect();
        let next = project(problem, &stepped, sweeps);
        let moved = next
            .iter()
            .zip(&x)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        x = next;
        if moved <= 1e-13 {
            break;
        }
    }
    x
}
