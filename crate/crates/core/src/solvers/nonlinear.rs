use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{SolveReport, SolveStatus};
use crate::algebra::{Det, Mat2, Vec2};
use crate::constitutive::{Energy, Material};
use crate::error::{Error, Result};
use crate::fem::DisplacementField;
use crate::functionals::{fh_elastic, fh_gradient_from};
use crate::loads::LoadSystem;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FhOptions {
    /// Smallest admissible element determinant `det(I + h∇v)`.
    pub delta_det: f64,
    /// Gradient tolerance relative to `1 + |b|`.
    pub tol_g: f64,
    pub max_iter: usize,
    pub armijo: f64,
    pub backtrack: f64,
    /// L-BFGS memory.
    pub memory: usize,
    /// A run is `Diverged` below `−10·k_guard·(‖f‖² + ‖g‖²)`.
    pub k_guard: f64,
}

impl Default for FhOptions {
    fn default() -> Self {
        Self {
            delta_det: 1e-8,
            tol_g: 1e-9,
            max_iter: 10_000,
            armijo: 1e-4,
            backtrack: 0.5,
            memory: 10,
            k_guard: 1e3,
        }
    }
}

struct State {
    x: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn grads_of(mesh: &Mesh, x: &[f64]) -> Vec<Mat2> {
    mesh.triangles()
        .iter()
        .zip(mesh.elements())
        .map(|(t, e)| {
            (0..3).fold(Mat2::zeros(), |acc, j| {
                acc + Vec2::new(x[2 * t[j]], x[2 * t[j] + 1]) * e.grads[j].transpose()
            })
        })
        .collect()
}

/// Descent on `F_h` with L-BFGS directions and a backtracking line search
/// that only accepts states with every `det(I + h∇v) > δ_det`.
///
/// The returned field is the final iterate itself (`F_h` is not invariant
/// under infinitesimal rotations, so no rigid part is removed).
pub fn minimize_fh(
    mesh: &Mesh,
    m: &Material,
    ls: &LoadSystem,
    h: f64,
    init: &DisplacementField,
    opts: &FhOptions,
) -> Result<SolveReport> {
    if !(h > 0.0) {
        return Err(Error::BadParameter(format!("h must be positive, got {h}")));
    }
    let load = ls.load_vector(mesh)?;
    let b: Vec<f64> = load.iter().flat_map(|v| [v[0], v[1]]).collect();
    let tol = opts.tol_g * (1.0 + dot(&b, &b).sqrt());
    let guard = -10.0 * opts.k_guard * ls.norm_sq(mesh);

    let evaluate = |x: &[f64]| -> Option<State> {
        let grads = grads_of(mesh, x);
        if grads.iter().any(|g| (Mat2::identity() + g * h).det() <= opts.delta_det) {
            return None;
        }
        let Energy::Finite(elastic) = fh_elastic(mesh, m, h, &grads) else {
            return None;
        };
        let gn = fh_gradient_from(mesh, m, h, &grads, &load).ok()?;
        Some(State {
            x: x.to_vec(),
            value: elastic - dot(&b, x),
            grad: gn.iter().flat_map(|v| [v[0], v[1]]).collect(),
        })
    };

    let x0 = init.to_flat(mesh)?;
    let mut state = evaluate(&x0).ok_or(Error::InfiniteEnergy)?;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let finish = |state: State, iterations: usize, status: SolveStatus| -> SolveReport {
        let residual = dot(&state.grad, &state.grad).sqrt();
        SolveReport {
            field: DisplacementField::from_flat(&state.x),
            value: state.value,
            iterations,
            residual,
            status,
        }
    };

    for it in 0..opts.max_iter {
        let gnorm = dot(&state.grad, &state.grad).sqrt();
        if gnorm <= tol {
            return Ok(finish(state, it, SolveStatus::Converged));
        }
        if state.value < guard {
            let witness: Vec<f64> = state.x.iter().zip(&x0).map(|(a, b)| a - b).collect();
            return Ok(finish(
                state,
                it,
                SolveStatus::Diverged {
                    witness: DisplacementField::from_flat(&witness),
                },
            ));
        }
        // two-loop recursion
        let mut q = state.grad.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(q, y)| *q -= a * y);
            alphas.push(a);
        }
        let gamma = history
            .back()
            .map_or(1.0 / gnorm.max(1.0), |(s, y, _)| dot(s, y) / dot(y, y));
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let beta = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(q, s)| *q += (a - beta) * s);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&dir, &state.grad);
        if !(slope < 0.0) {
            history.clear();
            dir = state.grad.iter().map(|g| -g / gnorm.max(1.0)).collect();
            slope = dot(&dir, &state.grad);
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..80 {
            let trial: Vec<f64> = state.x.iter().zip(&dir).map(|(x, d)| x + t * d).collect();
            if let Some(next) = evaluate(&trial) {
                if next.value <= state.value + opts.armijo * t * slope {
                    accepted = Some(next);
                    break;
                }
                // round-off regime: accept on approximate Wolfe conditions
                let new_slope = dot(&next.grad, &dir);
                if next.value <= state.value + 1e-12 * (1.0 + state.value.abs())
                    && new_slope >= 0.9 * slope
                    && new_slope <= -0.8 * slope
                {
                    accepted = Some(next);
                    break;
                }
            }
            t *= opts.backtrack;
        }
        let Some(next) = accepted else {
            return Ok(finish(state, it, SolveStatus::Stalled));
        };
        let s: Vec<f64> = next.x.iter().zip(&state.x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next.grad.iter().zip(&state.grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            history.push_back((s, y, 1.0 / sy));
            if history.len() > opts.memory {
                history.pop_front();
            }
        }
        state = next;
    }
    let iterations = opts.max_iter;
    Ok(finish(state, iterations, SolveStatus::MaxIter))
}
