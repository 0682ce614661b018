use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linear::solve_linear_elasticity;
use super::nonlinear::{minimize_fh, FhOptions};
use crate::algebra::Vec2;
use crate::constitutive::Material;
use crate::error::{Error, Result};
use crate::fem::{gradient_field, l1_norm_elementwise, l2_norm_elementwise, strain_field, DisplacementField};
use crate::functionals::eval_fh;
use crate::loads::{classify_compatibility, Compatibility, LoadSystem};
use crate::mesh::Mesh;
use crate::rigid::remove_rigid;

/// Relative amplitude of the seeded perturbation of the initial state.
pub const PERTURBATION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStep {
    pub h: f64,
    /// `F_h(v_h)` at the computed minimizer.
    pub energy: f64,
    /// `F_h(w_h)` with `w_h = v_h − P v_h`.
    pub energy_rigid_free: f64,
    /// `|F_h(w_h) − min E|`.
    pub energy_gap: f64,
    /// `‖E(w_h) − E(v₀)‖_{L²}`.
    pub strain_error: f64,
    /// `‖√h ∇w_h‖_{L²}`.
    pub sqrt_h_gradient: f64,
    /// `‖∇w_h − ∇v₀‖_{L¹}`.
    pub gradient_l1_error: f64,
    pub iterations: usize,
    pub residual: f64,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub min_e: f64,
    pub load_norm_sq: f64,
    /// Smallest `K` with `F_h ≥ −K(‖f‖² + ‖g‖²)` over the sweep.
    pub k_obs: f64,
    pub options: FhOptions,
    /// Effective stopping tolerance `tol_g·(1 + |b|)` on the gradient norm.
    pub gradient_tolerance: f64,
    pub steps: Vec<SweepStep>,
}

/// Minimizes `F_h` for each `h` (in parallel, merged in input order) from
/// the linear solution plus a seeded perturbation and records convergence
/// diagnostics of `w_h = v_h − P v_h` against the linear minimizer `v₀`.
pub fn gamma_sweep(
    mesh: &Mesh,
    m: &Material,
    ls: &LoadSystem,
    h_list: &[f64],
    seed: u64,
    opts: &FhOptions,
) -> Result<SweepReport> {
    if h_list.iter().any(|h| !(*h > 0.0)) || h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::BadParameter("h_list must be positive and strictly decreasing".into()));
    }
    let load_norm_sq = ls.norm_sq(mesh);
    let cls = classify_compatibility(ls, mesh)?;
    // the zero load is trivially admissible although Tr T = 0
    if load_norm_sq > 0.0 && !matches!(cls, Compatibility::StrictlyCompatible { .. }) {
        return Err(Error::IncompatibleLoad(cls.label().into()));
    }
    let v0 = solve_linear_elasticity(mesh, m, ls, None)?;
    let base = v0.field.nodal(mesh)?;
    let amp = PERTURBATION * base.iter().fold(0.0_f64, |a, u| a.max(u.amax()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = DisplacementField::Nodal(
        base.iter()
            .map(|u| u + Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * amp)
            .collect(),
    );
    let e0 = strain_field(mesh, &v0.field)?;
    let g0 = gradient_field(mesh, &v0.field)?;

    let steps = h_list
        .par_iter()
        .map(|&h| -> Result<SweepStep> {
            let run = minimize_fh(mesh, m, ls, h, &init, opts)?;
            let w = remove_rigid(mesh, &run.field)?;
            let energy_rigid_free = eval_fh(mesh, m, ls, h, &w)?.value().ok_or(Error::InfiniteEnergy)?;
            let ew = strain_field(mesh, &w)?;
            let gw = gradient_field(mesh, &w)?;
            let de: Vec<_> = ew.iter().zip(&e0).map(|(a, b)| a - b).collect();
            let dg: Vec<_> = gw.iter().zip(&g0).map(|(a, b)| a - b).collect();
            Ok(SweepStep {
                h,
                energy: run.value,
                energy_rigid_free,
                energy_gap: (energy_rigid_free - v0.value).abs(),
                strain_error: l2_norm_elementwise(mesh, &de),
                sqrt_h_gradient: h.sqrt() * l2_norm_elementwise(mesh, &gw),
                gradient_l1_error: l1_norm_elementwise(mesh, &dg),
                iterations: run.iterations,
                residual: run.residual,
                status: run.status.label().into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let k_obs = if load_norm_sq > 0.0 {
        steps
            .iter()
            .flat_map(|s| [s.energy, s.energy_rigid_free])
            .fold(0.0_f64, |k, e| k.max(-e / load_norm_sq))
    } else {
        0.0
    };
    let b = ls.load_vector(mesh)?;
    let b_norm = b.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
    Ok(SweepReport {
        min_e: v0.value,
        load_norm_sq,
        k_obs,
        options: *opts,
        gradient_tolerance: opts.tol_g * (1.0 + b_norm),
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionVerdict {
    pub diverged: bool,
    /// `δ = 1e−3·(‖f‖² + ‖g‖²)`.
    pub delta: f64,
    /// `max_h h·F_h`.
    pub max_scaled_energy: f64,
    pub guard: f64,
    pub guard_crossed: bool,
}

/// h-sweep divergence policy: energies that scale like `−c/h` (every
/// `h·F_h ≤ −δ`) or cross the `K_guard` bound mark the load as unbounded.
pub fn compression_verdict(h_list: &[f64], energies: &[f64], load_norm_sq: f64, opts: &FhOptions) -> CompressionVerdict {
    let delta = 1e-3 * load_norm_sq;
    let guard = -10.0 * opts.k_guard * load_norm_sq;
    let max_scaled_energy = h_list
        .iter()
        .zip(energies)
        .map(|(h, e)| h * e)
        .fold(f64::NEG_INFINITY, f64::max);
    let guard_crossed = energies.iter().any(|e| *e < guard);
    CompressionVerdict {
        diverged: !energies.is_empty() && (max_scaled_energy <= -delta || guard_crossed),
        delta,
        max_scaled_energy,
        guard,
        guard_crossed,
    }
}
