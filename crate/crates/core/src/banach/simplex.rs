//! Dense tableau simplex for small linear programs of the form
//!
//! ```text
//! minimize cᵀx  subject to  A·x ≤ b,  x ≥ 0,  with b ≥ 0
//! ```
//!
//! so the origin is a feasible starting vertex and no phase one is needed.
//! Dantzig pricing with a two-pass (Harris) ratio test that prefers large
//! pivots, falling back to Bland's rule after a run of degenerate pivots.
//! The tableau is periodically rebuilt from the original data through an LU
//! factorization of the basis so rounding does not accumulate.

use std::fmt;

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    Unbounded,
    InfeasibleStart,
    IterationLimit,
    /// The final vertex violates a constraint by more than rounding allows.
    Numerical(f64),
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Unbounded => write!(f, "linear program is unbounded"),
            LpError::InfeasibleStart => write!(f, "right-hand side must be nonnegative"),
            LpError::IterationLimit => write!(f, "simplex iteration limit reached"),
            LpError::Numerical(v) => write!(f, "simplex lost feasibility (violation {v:e})"),
        }
    }
}

const PIVOT_REL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-11;
const REINVERT_EVERY: usize = 25;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau<'a> {
    cost: &'a [f64],
    a: &'a [Vec<f64>],
    b: &'a [f64],
    m: usize,
    n: usize,
    width: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau<'_> {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.width + self.width - 1]
    }

    /// Column `j` of `[A | I]`.
    fn original(&self, i: usize, j: usize) -> f64 {
        if j < self.n {
            self.a[i][j]
        } else if j - self.n == i {
            1.0
        } else {
            0.0
        }
    }

    fn full_cost(&self, j: usize) -> f64 {
        if j < self.n {
            self.cost[j]
        } else {
            0.0
        }
    }

    /// Rebuilds `B⁻¹[A | I | b]` and the reduced costs for the current basis.
    fn reinvert(&mut self) -> bool {
        let (m, n, width) = (self.m, self.n, self.width);
        let bmat = DMatrix::from_fn(m, m, |i, k| self.original(i, self.basis[k]));
        let lu = bmat.lu();
        let rhs = DMatrix::from_fn(m, width, |i, j| {
            if j < n + m {
                self.original(i, j)
            } else {
                self.b[i]
            }
        });
        let Some(body) = lu.solve(&rhs) else { return false };
        for i in 0..m {
            for j in 0..width {
                self.t[i * width + j] = body[(i, j)];
            }
        }
        for j in 0..width {
            let cb: f64 = (0..m).map(|i| self.full_cost(self.basis[i]) * body[(i, j)]).sum();
            let cj = if j < n + m { self.full_cost(j) } else { 0.0 };
            self.t[m * width + j] = cj - cb;
        }
        for (i, &j) in self.basis.iter().enumerate() {
            for r in 0..m {
                self.t[r * width + j] = if r == i { 1.0 } else { 0.0 };
            }
            self.t[m * width + j] = 0.0;
        }
        true
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.width;
        let piv = self.at(row, col);
        for k in 0..width {
            self.t[row * width + k] /= piv;
        }
        for i in 0..=self.m {
            if i == row {
                continue;
            }
            let factor = self.t[i * width + col];
            if factor != 0.0 {
                for k in 0..width {
                    self.t[i * width + k] -= factor * self.t[row * width + k];
                }
                self.t[i * width + col] = 0.0;
            }
        }
        self.basis[row] = col;
    }
}

pub fn minimize(cost: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution, LpError> {
    let m = a.len();
    let n = cost.len();
    if b.iter().any(|&bi| bi < 0.0) {
        return Err(LpError::InfeasibleStart);
    }
    let width = n + m + 1;
    // Row i < m: constraint i with slack column n + i. Row m: reduced costs.
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        debug_assert_eq!(a[i].len(), n);
        t[i * width..i * width + n].copy_from_slice(&a[i]);
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = b[i];
    }
    t[m * width..m * width + n].copy_from_slice(cost);
    let mut tab = Tableau {
        cost,
        a,
        b,
        m,
        n,
        width,
        t,
        basis: (n..n + m).collect(),
    };

    let cost_scale = cost.iter().fold(0.0f64, |acc, c| acc.max(c.abs())).max(1.0);
    let b_scale = b.iter().fold(0.0f64, |acc, c| acc.max(c.abs())).max(1.0);
    let max_pivots = 50 * (n + m) + 1000;
    let mut pivots = 0;
    let mut degenerate_run = 0;
    let mut since_reinvert = 0;
    loop {
        if since_reinvert >= REINVERT_EVERY {
            if !tab.reinvert() {
                return Err(LpError::Numerical(f64::INFINITY));
            }
            since_reinvert = 0;
        }
        let bland = degenerate_run > 50;
        let reduced = &tab.t[m * width..m * width + n + m];
        let threshold = -1e-12 * cost_scale;
        let entering = if bland {
            reduced.iter().position(|&r| r < threshold)
        } else {
            let (j, &r) = reduced
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(y.1))
                .expect("nonempty tableau");
            (r < threshold).then_some(j)
        };
        let Some(col) = entering else {
            // Confirm on a freshly rebuilt tableau; repair leftover primal
            // infeasibility with dual simplex steps (the basis is dual feasible).
            if since_reinvert > 0 {
                if !tab.reinvert() {
                    return Err(LpError::Numerical(f64::INFINITY));
                }
                since_reinvert = 0;
                continue;
            }
            let delta = FEAS_TOL * b_scale;
            let worst = (0..m).min_by(|&i, &k| tab.rhs(i).total_cmp(&tab.rhs(k)));
            match worst {
                Some(row) if tab.rhs(row) < -delta => {
                    let row_max = (0..n + m).map(|j| tab.at(row, j).abs()).fold(0.0, f64::max);
                    let piv_tol = (PIVOT_REL * row_max).max(1e-14);
                    let col = (0..n + m)
                        .filter(|&j| tab.at(row, j) < -piv_tol)
                        .min_by(|&j, &k| {
                            let rj = tab.at(m, j).max(0.0) / -tab.at(row, j);
                            let rk = tab.at(m, k).max(0.0) / -tab.at(row, k);
                            rj.total_cmp(&rk)
                        });
                    let Some(col) = col else {
                        return Err(LpError::Numerical(-tab.rhs(row)));
                    };
                    tab.pivot(row, col);
                    pivots += 1;
                    since_reinvert += 1;
                    if pivots > max_pivots {
                        return Err(LpError::IterationLimit);
                    }
                    continue;
                }
                _ => break,
            }
        };

        let col_max = (0..m).map(|i| tab.at(i, col).abs()).fold(0.0, f64::max);
        let piv_tol = (PIVOT_REL * col_max).max(1e-14);
        // Harris pass one: the largest step keeping every basic value ≥ −δ.
        let delta = FEAS_TOL * b_scale;
        let mut theta_max = f64::INFINITY;
        for i in 0..m {
            let aij = tab.at(i, col);
            if aij > piv_tol {
                theta_max = theta_max.min((tab.rhs(i) + delta) / aij);
            }
        }
        if theta_max == f64::INFINITY {
            return Err(LpError::Unbounded);
        }
        // Pass two: among rows blocking within that step, the largest pivot
        // (lowest basis index under Bland's rule).
        let mut leaving: Option<usize> = None;
        for i in 0..m {
            let aij = tab.at(i, col);
            if aij > piv_tol && tab.rhs(i) / aij <= theta_max {
                let better = match leaving {
                    None => true,
                    Some(r) if bland => tab.basis[i] < tab.basis[r],
                    Some(r) => aij > tab.at(r, col),
                };
                if better {
                    leaving = Some(i);
                }
            }
        }
        let row = leaving.expect("a blocking row exists when theta is finite");
        let step = tab.rhs(row) / tab.at(row, col);
        degenerate_run = if step <= 1e-15 * b_scale { degenerate_run + 1 } else { 0 };
        tab.pivot(row, col);
        pivots += 1;
        since_reinvert += 1;
        if pivots > max_pivots {
            return Err(LpError::IterationLimit);
        }
    }

    let mut x = vec![0.0; n];
    for (i, &j) in tab.basis.iter().enumerate() {
        if j < n {
            x[j] = tab.rhs(i).max(0.0);
        }
    }
    let violation = a
        .iter()
        .zip(b)
        .map(|(row, bi)| row.iter().zip(&x).map(|(a, x)| a * x).sum::<f64>() - bi)
        .fold(0.0f64, f64::max);
    let x_scale = x.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    if violation > 1e-9 * b_scale.max(x_scale) {
        return Err(LpError::Numerical(violation));
    }
    let objective = cost.iter().zip(&x).map(|(c, x)| c * x).sum();
    Ok(LpSolution { x, objective, pivots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  →  (2, 6), value 36
        let sol = minimize(
            &[-3.0, -5.0],
            &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            &[4.0, 12.0, 18.0],
        )
        .unwrap();
        assert!((sol.x[0] - 2.0).abs() < 1e-12 && (sol.x[1] - 6.0).abs() < 1e-12);
        assert!((sol.objective + 36.0).abs() < 1e-12);
    }

    #[test]
    fn detects_unbounded() {
        assert_eq!(minimize(&[-1.0, 0.0], &[vec![0.0, 1.0]], &[1.0]).unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // Beale's cycling example in ≤ form.
        let a = vec![
            vec![0.25, -60.0, -0.04, 9.0],
            vec![0.5, -90.0, -0.02, 3.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ];
        let sol = minimize(&[-0.75, 150.0, -0.02, 6.0], &a, &[0.0, 0.0, 1.0]).unwrap();
        assert!((sol.objective + 0.05).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_rhs() {
        assert_eq!(minimize(&[1.0], &[vec![1.0]], &[-1.0]).unwrap_err(), LpError::InfeasibleStart);
    }

    /// Feasible, and no random feasible direction improves the objective.
    #[test]
    fn random_programs_satisfy_optimality_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let m = rng.random_range(3..40);
            let n = rng.random_range(2..12);
            let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            // Some zero right-hand sides to force degeneracy.
            let b: Vec<f64> = (0..m).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..2.0) }).collect();
            let cost: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            // Box rows keep it bounded.
            let mut a_box = a.clone();
            let mut b_box = b.clone();
            for j in 0..n {
                let mut row = vec![0.0; n];
                row[j] = 1.0;
                a_box.push(row);
                b_box.push(10.0);
            }
            let sol = minimize(&cost, &a_box, &b_box).unwrap();
            // Primal feasibility.
            for (row, bi) in a_box.iter().zip(&b_box) {
                assert!(row.iter().zip(&sol.x).map(|(a, x)| a * x).sum::<f64>() <= bi + 1e-10);
            }
            // No improving direction among random feasible perturbations.
            for _ in 0..50 {
                let dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let mut s = 1e-3;
                while s > 1e-9 {
                    let trial: Vec<f64> = sol.x.iter().zip(&dir).map(|(x, d)| x + s * d).collect();
                    let feasible = trial.iter().all(|v| *v >= 0.0)
                        && a_box.iter().zip(&b_box).all(|(row, bi)| row.iter().zip(&trial).map(|(a, x)| a * x).sum::<f64>() <= *bi);
                    if feasible {
                        let val: f64 = cost.iter().zip(&trial).map(|(c, x)| c * x).sum();
                        assert!(val >= sol.objective - 1e-10);
                        break;
                    }
                    s *= 0.5;
                }
            }
        }
    }
}
