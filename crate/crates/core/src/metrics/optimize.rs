//! Grid search followed by Nelder–Mead refinement over pure states and
//! density matrices.

use std::f64::consts::PI;

use crate::channel::DensityMatrix;
use crate::numerics::{self, c64, CMatrix, CVector};

pub(crate) const SPHERE_GRID: usize = 64;
pub(crate) const QUASI_RANDOM_POINTS: usize = 2000;
pub(crate) const REFINE_ITERATIONS: usize = 500;
pub(crate) const RESTARTS: usize = 5;
const BALL_RADII: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// Best point found and the number of objective evaluations spent.
#[derive(Debug, Clone)]
pub(crate) struct Optimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Downhill simplex minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction ½, shrink ½).
pub(crate) fn nelder_mead(
    f: &mut impl FnMut(&[f64]) -> f64,
    start: &[f64],
    step: f64,
    iterations: usize,
) -> Optimum {
    let n = start.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(start, &mut evaluations);
    simplex.push((start.to_vec(), v0));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += step;
        let v = eval(&x, &mut evaluations);
        simplex.push((x, v));
    }

    for _ in 0..iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() <= 1e-15 * (1.0 + simplex[0].1.abs()) && simplex_size(&simplex) < 1e-12 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(1.0);
        let fr = eval(&reflected, &mut evaluations);
        if fr < simplex[0].1 {
            let expanded = along(2.0);
            let fe = eval(&expanded, &mut evaluations);
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let x = along(0.5);
            let v = eval(&x, &mut evaluations);
            (x, v)
        } else {
            let x = along(-0.5);
            let v = eval(&x, &mut evaluations);
            (x, v)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best
                .iter()
                .zip(&entry.0)
                .map(|(b, xi)| b + 0.5 * (xi - b))
                .collect();
            let v = eval(&x, &mut evaluations);
            *entry = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = simplex.swap_remove(0);
    Optimum {
        point,
        value,
        evaluations,
    }
}

fn simplex_size(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let base = &simplex[0].0;
    simplex[1..]
        .iter()
        .map(|(x, _)| {
            x.iter()
                .zip(base)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Grid scan, then refinement from the best few grid points. Minimizes.
pub(crate) fn search(f: &mut impl FnMut(&[f64]) -> f64, grid: &[Vec<f64>], step: f64) -> Optimum {
    let mut scored: Vec<(usize, f64)> = grid
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let v = f(x);
            (i, if v.is_nan() { f64::INFINITY } else { v })
        })
        .collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut evaluations = grid.len();
    let mut best = Optimum {
        point: grid[scored[0].0].clone(),
        value: scored[0].1,
        evaluations: 0,
    };
    for &(i, _) in scored.iter().take(RESTARTS) {
        let local = nelder_mead(f, &grid[i], step, REFINE_ITERATIONS);
        evaluations += local.evaluations;
        if local.value < best.value {
            best = local;
        }
    }
    best.evaluations = evaluations;
    best
}

/// Radical-inverse (Halton) sequence in `[0, 1)^dims`, skipping index 0.
pub(crate) fn halton(count: usize, dims: usize) -> Vec<Vec<f64>> {
    let primes = first_primes(dims);
    (1..=count)
        .map(|i| primes.iter().map(|&p| radical_inverse(i, p)).collect())
        .collect()
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut factor = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * factor;
        i /= base;
        factor *= inv;
    }
    out
}

fn first_primes(n: usize) -> Vec<usize> {
    let mut primes = Vec::with_capacity(n);
    let mut c = 2;
    while primes.len() < n {
        if primes.iter().all(|p| c % p != 0) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

/// Pure state from `2N − 2` reals: `N − 1` hyperspherical angles for the
/// magnitudes followed by `N − 1` relative phases.
pub(crate) fn pure_state(dim: usize, params: &[f64]) -> CVector {
    let (angles, phases) = params.split_at(dim - 1);
    let mut psi = CVector::zeros(dim);
    let mut carry = 1.0;
    for k in 0..dim {
        let magnitude = if k + 1 < dim {
            let m = carry * angles[k].cos();
            carry *= angles[k].sin();
            m
        } else {
            carry
        };
        let phase = if k == 0 { 0.0 } else { phases[k - 1] };
        psi[k] = c64(magnitude * phase.cos(), magnitude * phase.sin());
    }
    psi
}

pub(crate) fn pure_state_grid(dim: usize) -> Vec<Vec<f64>> {
    if dim == 2 {
        let mut grid = Vec::with_capacity(SPHERE_GRID * SPHERE_GRID);
        for i in 0..SPHERE_GRID {
            let half_polar = 0.5 * PI * (i as f64 + 0.5) / SPHERE_GRID as f64;
            for k in 0..SPHERE_GRID {
                let phase = 2.0 * PI * k as f64 / SPHERE_GRID as f64;
                grid.push(vec![half_polar, phase]);
            }
        }
        return grid;
    }
    halton(QUASI_RANDOM_POINTS, 2 * dim - 2)
        .into_iter()
        .map(|u| {
            u.iter()
                .enumerate()
                .map(|(i, x)| {
                    if i < dim - 1 {
                        0.5 * PI * x
                    } else {
                        2.0 * PI * x
                    }
                })
                .collect()
        })
        .collect()
}

/// Density-matrix parametrization used by the search.
#[derive(Debug, Clone, Copy)]
pub(crate) enum MixedParam {
    /// One qubit: a point of `R³` folded radially into the Bloch ball.
    Ball,
    /// `V · diag(softmax(w)) · V†` with `V = exp(iH)`; `N²` parameters for the
    /// Hermitian `H` then `N` weight logits.
    Spectral(usize),
}

impl MixedParam {
    pub(crate) fn for_dim(dim: usize) -> Self {
        if dim == 2 {
            MixedParam::Ball
        } else {
            MixedParam::Spectral(dim)
        }
    }

    pub(crate) fn state(&self, params: &[f64]) -> DensityMatrix {
        let m = match *self {
            MixedParam::Ball => {
                let mut v = nalgebra::Vector3::new(params[0], params[1], params[2]);
                let r = v.norm();
                if r > 1.0 {
                    v /= r;
                }
                let [x, y, z] = crate::pauli::sigmas();
                let mut rho = CMatrix::identity(2, 2);
                rho += x.scale(v[0]) + y.scale(v[1]) + z.scale(v[2]);
                rho.unscale(2.0)
            }
            MixedParam::Spectral(n) => spectral_state(n, params),
        };
        DensityMatrix::from_matrix_unchecked(numerics::hermitian_part(&m))
    }

    pub(crate) fn grid(&self) -> Vec<Vec<f64>> {
        match *self {
            MixedParam::Ball => {
                let directions = crate::bloch::sphere_grid(SPHERE_GRID);
                let mut grid = vec![vec![0.0; 3]];
                for r in BALL_RADII {
                    for d in &directions {
                        grid.push(vec![r * d[0], r * d[1], r * d[2]]);
                    }
                }
                grid
            }
            MixedParam::Spectral(n) => {
                let dims = n * n + n;
                let mut grid = vec![vec![0.0; dims]];
                grid.extend(halton(QUASI_RANDOM_POINTS, dims).into_iter().map(|u| {
                    u.iter()
                        .enumerate()
                        .map(|(i, x)| {
                            if i < n * n {
                                PI * (2.0 * x - 1.0)
                            } else {
                                6.0 * x - 3.0
                            }
                        })
                        .collect()
                }));
                grid
            }
        }
    }

    pub(crate) fn step(&self) -> f64 {
        match self {
            MixedParam::Ball => 0.1,
            MixedParam::Spectral(_) => 0.3,
        }
    }
}

fn spectral_state(n: usize, params: &[f64]) -> CMatrix {
    let (h_params, logits) = params.split_at(n * n);
    let mut h = CMatrix::zeros(n, n);
    let mut idx = 0;
    for i in 0..n {
        h[(i, i)] = c64(h_params[idx], 0.0);
        idx += 1;
    }
    for i in 0..n {
        for j in i + 1..n {
            let z = c64(h_params[idx], h_params[idx + 1]);
            idx += 2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    let v = h.map(|z| z * c64(0.0, 1.0)).exp();
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        n,
        w.iter().map(|x| c64(x / total, 0.0)),
    ));
    &v * d * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let mut f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
        let opt = nelder_mead(&mut f, &[0.0, 0.0], 0.5, 500);
        assert!((opt.point[0] - 1.0).abs() < 1e-6);
        assert!((opt.point[1] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock_converges() {
        let mut f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opt = nelder_mead(&mut f, &[-1.2, 1.0], 0.5, 2000);
        assert!(opt.value < 1e-10);
    }

    #[test]
    fn halton_is_in_unit_cube_and_spread() {
        let pts = halton(100, 3);
        assert!(pts.iter().flatten().all(|&x| (0.0..1.0).contains(&x)));
        assert_eq!(pts[0], vec![0.5, 1.0 / 3.0, 0.2]);
    }

    #[test]
    fn parametrized_states_are_valid() {
        for dim in [2, 3, 4] {
            for p in pure_state_grid(dim).iter().take(50) {
                assert!((pure_state(dim, p).norm() - 1.0).abs() < 1e-14);
            }
        }
        for param in [MixedParam::Ball, MixedParam::Spectral(4)] {
            for p in param.grid().iter().step_by(97) {
                let rho = param.state(p);
                assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
            }
        }
        let centre = MixedParam::Spectral(4).state(&[0.0; 20]);
        assert!((centre.matrix() - CMatrix::identity(4, 4).unscale(4.0)).norm() < 1e-14);
    }
}
