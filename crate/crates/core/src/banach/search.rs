//! Multistart minimization of scale-invariant ratios over complex unit spheres.
//!
//! The objective sees a complex vector in interleaved real form. Starts are
//! the caller's seeds, a hyperspherical grid when the sphere is small, and
//! seeded random directions; each is refined by a compass search with a
//! shrinking step that also tries fresh random directions every sweep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{from_real, to_real, CVec};

/// Effort of a brute-force estimate. Always recorded next to the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    /// Random multistart count.
    pub starts: usize,
    /// Grid points per hyperspherical angle; used when the complex dimension is at most 3.
    pub grid: usize,
    pub seed: u64,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            starts: 64,
            grid: 8,
            seed: 0,
        }
    }
}

pub const GRID_MAX_COMPLEX_DIM: usize = 3;
const GRID_MAX_POINTS: usize = 200_000;
const MIN_STEP: f64 = 1e-11;
const MAX_SWEEPS: usize = 20_000;

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub value: f64,
    pub argmin: CVec,
    /// Largest objective value seen among the unrefined starts.
    pub max_seen: f64,
    pub evaluations: usize,
}

fn normalize(x: &mut [f64]) -> bool {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 && n.is_finite() {
        x.iter_mut().for_each(|v| *v /= n);
        true
    } else {
        false
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if normalize(&mut v) {
            return v;
        }
    }
}

/// Points of the unit sphere in `R^n` on a regular hyperspherical-angle grid.
fn sphere_grid(n: usize, density: usize) -> Vec<Vec<f64>> {
    if n < 2 || density == 0 {
        return Vec::new();
    }
    let angles = n - 1;
    let total = density.checked_pow(angles as u32).unwrap_or(usize::MAX);
    if total > GRID_MAX_POINTS {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; angles];
    for _ in 0..total {
        let mut x = vec![0.0; n];
        let mut sin_prod = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            let phi = if k + 1 == angles {
                2.0 * std::f64::consts::PI * i as f64 / density as f64
            } else {
                std::f64::consts::PI * (i as f64 + 0.5) / density as f64
            };
            x[k] = sin_prod * phi.cos();
            sin_prod *= phi.sin();
        }
        x[n - 1] = sin_prod;
        out.push(x);
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < density {
                break;
            }
            *slot = 0;
        }
    }
    out
}

fn refine<F: Fn(&[f64]) -> f64>(f: &F, mut x: Vec<f64>, mut fx: f64, rng: &mut ChaCha8Rng, evals: &mut usize) -> (Vec<f64>, f64) {
    let n = x.len();
    let mut step = 0.25;
    let mut trial = vec![0.0; n];
    let mut sweeps = 0;
    while step > MIN_STEP && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut improved = false;
        let randoms: Vec<Vec<f64>> = (0..n).map(|_| random_unit(rng, n)).collect();
        for k in 0..(2 * n) {
            for sign in [1.0, -1.0] {
                for i in 0..n {
                    let d = if k < n {
                        if i == k { 1.0 } else { 0.0 }
                    } else {
                        randoms[k - n][i]
                    };
                    trial[i] = x[i] + sign * step * d;
                }
                if !normalize(&mut trial) {
                    continue;
                }
                let ft = f(&trial);
                *evals += 1;
                if ft < fx {
                    fx = ft;
                    x.copy_from_slice(&trial);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Minimizes a degree-zero homogeneous `f` over nonzero vectors of `C^dim`.
pub fn minimize_ratio<F: Fn(&[f64]) -> f64>(dim: usize, f: F, seeds: &[CVec], res: &Resolution) -> SearchOutcome {
    let n = 2 * dim;
    let mut rng = ChaCha8Rng::seed_from_u64(res.seed);
    let mut evaluations = 0;
    let mut max_seen = 0.0f64;

    let mut starts: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut scored = |x: Vec<f64>| {
        let fx = f(&x);
        evaluations += 1;
        if fx.is_finite() {
            max_seen = max_seen.max(fx);
        }
        (x, fx)
    };
    for s in seeds {
        let mut x = to_real(s);
        if normalize(&mut x) {
            starts.push(scored(x));
        }
    }
    for _ in 0..res.starts {
        starts.push(scored(random_unit(&mut rng, n)));
    }
    if dim <= GRID_MAX_COMPLEX_DIM {
        let mut grid: Vec<(Vec<f64>, f64)> = sphere_grid(n, res.grid).into_iter().map(&mut scored).collect();
        grid.sort_by(|a, b| a.1.total_cmp(&b.1));
        grid.truncate((res.starts / 8).max(4));
        starts.extend(grid);
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for (x, fx) in starts {
        let (x, fx) = refine(&f, x, fx, &mut rng, &mut evaluations);
        if best.as_ref().is_none_or(|b| fx < b.1) {
            best = Some((x, fx));
        }
    }
    let (x, value) = best.unwrap_or_else(|| (vec![0.0; n], f64::INFINITY));
    SearchOutcome {
        value,
        argmin: from_real(&x),
        max_seen,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_are_unit() {
        for n in 2..=6 {
            for p in sphere_grid(n, 4) {
                let norm: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-14);
            }
        }
        assert_eq!(sphere_grid(4, 5).len(), 125);
    }

    #[test]
    fn finds_smallest_weighted_coordinate() {
        // f = sqrt(Σ w_i |x_i|²) / ‖x‖ with weights 9, 4, 1 has minimum 1.
        let f = |x: &[f64]| {
            let w = [9.0, 9.0, 4.0, 4.0, 1.0, 1.0];
            (x.iter().zip(w).map(|(v, w)| w * v * v).sum::<f64>()).sqrt() / x.iter().map(|v| v * v).sum::<f64>().sqrt()
        };
        let out = minimize_ratio(3, f, &[], &Resolution::default());
        assert!((out.value - 1.0).abs() < 1e-9, "{}", out.value);
        assert!(out.max_seen <= 3.0 + 1e-12);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let f = |x: &[f64]| (x[0].abs() + 2.0 * x[1].abs() + x[2].abs() + 3.0 * x[3].abs()) / x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let a = minimize_ratio(2, f, &[], &Resolution::default());
        let b = minimize_ratio(2, f, &[], &Resolution::default());
        assert_eq!(a.value, b.value);
        assert_eq!(a.argmin, b.argmin);
    }
}
