//! Evaluators for `E`, `F`, `F_ε`, `a*`, the first variation of `F`, and the
//! rescaled finite-strain energies `F_h` with their gradient.
//!
//! In 2D every `½W²` is a nonpositive multiple of `I`, so the inner problem
//! collapses to a scalar quadratic in `s = w²/2 ≥ 0`:
//!
//! ```text
//! ∫V0(E(v) + sI) = ∫V0(E(v)) + s α + s² V,   α = ∫DV0(I)·E(v),  V = ∫V0(I)
//! ```
//!
//! giving `F = E − ¼V⁻¹(α⁻)²`.

use serde::{Deserialize, Serialize};

use crate::algebra::{AxialSkew, Mat2, MatrixN, PlanarSkew, Vec2};
use crate::constitutive::{v0, v0_stress, vh_density, vh_stress, Energy, Material};
use crate::error::{Error, Result};
use crate::fem::{gradient_field, integrate_strain_energy, strain_field, AffineField, BoxDomain3, DisplacementField};
use crate::inner::{minimize_axial, minimize_planar, InnerReport, MeshPrestrain, UniformPrestrain};
use crate::loads::{eval_load_work, BoxLoad3, LoadSystem};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown<S> {
    /// `∫V0(E(v) − ½W²)` at the optimal `W`.
    pub elastic: f64,
    /// `L(v)`.
    pub load_work: f64,
    /// `elastic − ∫V0(E(v))`, never positive.
    pub correction: f64,
    pub w_opt: S,
    pub total: f64,
}

impl<S> EnergyBreakdown<S> {
    /// The linearized energy `E(v)` recovered from the parts.
    pub fn linearized(&self) -> f64 {
        self.elastic - self.correction - self.load_work
    }
}

/// `E(v) = ∫V0(E(v)) − L(v)`.
pub fn eval_e(mesh: &Mesh, m: &Material, ls: &LoadSystem, v: &DisplacementField) -> Result<f64> {
    let strains = strain_field(mesh, v)?;
    Ok(integrate_strain_energy(mesh, m, &strains, &Mat2::zeros()) - eval_load_work(ls, mesh, v)?)
}

/// `V = ∫V0(I)`.
pub fn identity_energy(mesh: &Mesh, m: &Material) -> f64 {
    mesh.area() * v0(m, &Mat2::identity())
}

/// `α(v) = ∫DV0(I)·E(v) = (8μ + 8λ)∫div v`.
pub fn trace_integral(mesh: &Mesh, m: &Material, v: &DisplacementField) -> Result<f64> {
    let stress = v0_stress(m, &Mat2::identity());
    Ok(strain_field(mesh, v)?
        .iter()
        .zip(mesh.elements())
        .map(|(e, el)| el.area * stress.dot(e))
        .sum())
}

/// `F(v)` by numerical inner minimization over `w`.
pub fn eval_f(mesh: &Mesh, m: &Material, ls: &LoadSystem, v: &DisplacementField) -> Result<EnergyBreakdown<PlanarSkew>> {
    let obj = MeshPrestrain {
        mesh,
        material: *m,
        strains: strain_field(mesh, v)?,
    };
    let inner = minimize_planar(&obj)?;
    let plain = integrate_strain_energy(mesh, m, &obj.strains, &Mat2::zeros());
    let load_work = eval_load_work(ls, mesh, v)?;
    Ok(EnergyBreakdown {
        elastic: inner.value,
        load_work,
        correction: (inner.value - plain).min(0.0),
        w_opt: inner.skew,
        total: inner.value - load_work,
    })
}

/// `F(v) = E(v) − ¼V⁻¹(α⁻)²` with `w_opt² = α⁻/V`.
pub fn eval_f_closed_form(
    mesh: &Mesh,
    m: &Material,
    ls: &LoadSystem,
    v: &DisplacementField,
) -> Result<EnergyBreakdown<PlanarSkew>> {
    let strains = strain_field(mesh, v)?;
    let plain = integrate_strain_energy(mesh, m, &strains, &Mat2::zeros());
    let load_work = eval_load_work(ls, mesh, v)?;
    let vol = identity_energy(mesh, m);
    let alpha_minus = (-trace_integral(mesh, m, v)?).max(0.0);
    let correction = -0.25 * alpha_minus * alpha_minus / vol;
    Ok(EnergyBreakdown {
        elastic: plain + correction,
        load_work,
        correction,
        w_opt: PlanarSkew::new((alpha_minus / vol).sqrt()),
        total: plain + correction - load_work,
    })
}

/// `F` for an exact affine field on a box, with the inner search diagnostics.
pub fn eval_f_affine3(
    domain: &BoxDomain3,
    m: &Material,
    load: &BoxLoad3,
    v: &AffineField<3>,
) -> Result<(EnergyBreakdown<AxialSkew>, InnerReport<AxialSkew>)> {
    let obj = UniformPrestrain {
        material: *m,
        strain: v.strain(),
        volume: domain.volume(),
    };
    let inner = minimize_axial(&obj)?;
    let plain = domain.volume() * v0(m, &v.strain());
    let load_work = load.work(domain, v);
    let breakdown = EnergyBreakdown {
        elastic: inner.value,
        load_work,
        correction: (inner.value - plain).min(0.0),
        w_opt: inner.skew,
        total: inner.value - load_work,
    };
    Ok((breakdown, inner))
}

/// `a*² = |Ω|⁻¹(∫div v)⁻`, the squared rotation rate selected by `F`.
pub fn eval_a_star_sq(mesh: &Mesh, v: &DisplacementField) -> Result<f64> {
    let div: f64 = gradient_field(mesh, v)?
        .iter()
        .zip(mesh.elements())
        .map(|(g, el)| el.area * g.trace())
        .sum();
    Ok((-div).max(0.0) / mesh.area())
}

/// `C²` smoothing of `(t⁻)²` from below.
pub fn phi_eps(eps: f64, t: f64) -> f64 {
    if t <= 0.0 {
        t * t - eps * t + eps * eps / 3.0
    } else if t <= eps {
        (eps - t).powi(3) / (3.0 * eps)
    } else {
        0.0
    }
}

pub fn phi_eps_derivative(eps: f64, t: f64) -> f64 {
    if t <= 0.0 {
        2.0 * t - eps
    } else if t <= eps {
        -(eps - t).powi(2) / eps
    } else {
        0.0
    }
}

/// `F_ε(v) = E(v) − ¼V⁻¹φ_ε(α(v))`.
pub fn eval_f_eps(eps: f64, mesh: &Mesh, m: &Material, ls: &LoadSystem, v: &DisplacementField) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::BadParameter(format!("smoothing parameter must be positive, got {eps}")));
    }
    let alpha = trace_integral(mesh, m, v)?;
    Ok(eval_e(mesh, m, ls, v)? - 0.25 * phi_eps(eps, alpha) / identity_energy(mesh, m))
}

/// `δE(v)[φ] = ∫DV0(E(v))·E(φ) − L(φ)`.
pub fn first_variation_e(
    mesh: &Mesh,
    m: &Material,
    ls: &LoadSystem,
    v: &DisplacementField,
    phi: &DisplacementField,
) -> Result<f64> {
    let ev = strain_field(mesh, v)?;
    let ep = strain_field(mesh, phi)?;
    let bulk: f64 = ev
        .iter()
        .zip(&ep)
        .zip(mesh.elements())
        .map(|((a, b), el)| el.area * v0_stress(m, a).dot(b))
        .sum();
    Ok(bulk - eval_load_work(ls, mesh, phi)?)
}

/// `δF(v)[φ] = δE(v)[φ] + ½V⁻¹ α(v)⁻ α(φ)`.
pub fn first_variation_f(
    mesh: &Mesh,
    m: &Material,
    ls: &LoadSystem,
    v: &DisplacementField,
    phi: &DisplacementField,
) -> Result<f64> {
    let alpha_minus = (-trace_integral(mesh, m, v)?).max(0.0);
    Ok(first_variation_e(mesh, m, ls, v, phi)?
        + 0.5 * alpha_minus * trace_integral(mesh, m, phi)? / identity_energy(mesh, m))
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0) {
        return Err(Error::BadParameter(format!("h must be positive, got {h}")));
    }
    Ok(())
}

pub(crate) fn fh_elastic(mesh: &Mesh, m: &Material, h: f64, grads: &[Mat2]) -> Energy {
    grads
        .iter()
        .zip(mesh.elements())
        .map(|(g, el)| vh_density(m, h, g).scale(el.area))
        .sum()
}

/// `F_h(v) = ∫h⁻²W(I + h∇v) − L(v)`, `+∞` if some `det(I + h∇v) ≤ 0`.
pub fn eval_fh(mesh: &Mesh, m: &Material, ls: &LoadSystem, h: f64, v: &DisplacementField) -> Result<Energy> {
    check_h(h)?;
    let grads = gradient_field(mesh, v)?;
    Ok(match fh_elastic(mesh, m, h, &grads) {
        Energy::Finite(e) => Energy::Finite(e - eval_load_work(ls, mesh, v)?),
        Energy::Infinite => Energy::Infinite,
    })
}

pub(crate) fn fh_gradient_from(
    mesh: &Mesh,
    m: &Material,
    h: f64,
    grads: &[Mat2],
    load: &[Vec2],
) -> Result<Vec<Vec2>> {
    let mut out: Vec<Vec2> = load.iter().map(|b| -b).collect();
    for ((t, el), g) in mesh.triangles().iter().zip(mesh.elements()).zip(grads) {
        let s = vh_stress(m, h, g).ok_or(Error::InfiniteEnergy)? * el.area;
        for j in 0..3 {
            out[t[j]] += s * el.grads[j];
        }
    }
    Ok(out)
}

/// Nodal gradient of `F_h`: `∫h⁻¹DW(I + h∇v):∇φ_i − b_i`.
pub fn grad_fh(mesh: &Mesh, m: &Material, ls: &LoadSystem, h: f64, v: &DisplacementField) -> Result<DisplacementField> {
    check_h(h)?;
    let grads = gradient_field(mesh, v)?;
    let load = ls.load_vector(mesh)?;
    Ok(DisplacementField::Nodal(fh_gradient_from(mesh, m, h, &grads, &load)?))
}

/// `F` restricted to the cells selected by `keep`, load free: the
/// integrals in the closed form run over the selected cells only.
pub fn eval_f_on_cells(mesh: &Mesh, m: &Material, v: &DisplacementField, keep: impl Fn(usize) -> bool) -> Result<f64> {
    let strains = strain_field(mesh, v)?;
    let id_stress = v0_stress(m, &Mat2::identity());
    let (mut plain, mut alpha, mut area) = (0.0, 0.0, 0.0);
    for (k, (e, el)) in strains.iter().zip(mesh.elements()).enumerate() {
        if keep(k) {
            plain += el.area * v0(m, e);
            alpha += el.area * id_stress.dot(e);
            area += el.area;
        }
    }
    if area == 0.0 {
        return Ok(0.0);
    }
    let vol = area * v0(m, &Mat2::identity());
    let alpha_minus = (-alpha).max(0.0);
    Ok(plain - 0.25 * alpha_minus * alpha_minus / vol)
}

/// Scale used to make tolerances relative: `1 + |E(v)| + ¼V⁻¹α²`.
pub fn energy_scale(mesh: &Mesh, m: &Material, ls: &LoadSystem, v: &DisplacementField) -> Result<f64> {
    let alpha = trace_integral(mesh, m, v)?;
    Ok(1.0 + eval_e(mesh, m, ls, v)?.abs() + 0.25 * alpha * alpha / identity_energy(mesh, m))
}

/// `∫V0(E(v) − G)` for an affine field; convenience for 3D examples.
pub fn affine_energy3(domain: &BoxDomain3, m: &Material, v: &AffineField<3>, g: &MatrixN<3>) -> f64 {
    domain.volume() * v0(m, &(v.strain() - g))
}
