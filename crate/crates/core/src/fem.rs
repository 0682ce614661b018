//! P1 vector fields on meshes, exact affine fields, strains and quadrature.

use serde::{Deserialize, Serialize};

use crate::algebra::{is_symmetric, sym, Mat2, MatrixN, Vec2};
use crate::constitutive::{v0, Material};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Exact affine displacement `v(x) = M x + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineField<const N: usize> {
    pub m: MatrixN<N>,
    pub b: nalgebra::SVector<f64, N>,
}

impl<const N: usize> AffineField<N> {
    pub fn linear(m: MatrixN<N>) -> Self {
        Self {
            m,
            b: nalgebra::SVector::<f64, N>::zeros(),
        }
    }

    pub fn eval(&self, x: &nalgebra::SVector<f64, N>) -> nalgebra::SVector<f64, N> {
        self.m * x + self.b
    }

    pub fn strain(&self) -> MatrixN<N> {
        sym(&self.m)
    }
}

/// Displacement on a planar mesh: nodal P1 values or an exact affine field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DisplacementField {
    Nodal(Vec<Vec2>),
    Affine(AffineField<2>),
}

impl DisplacementField {
    pub fn zeros(mesh: &Mesh) -> Self {
        DisplacementField::Nodal(vec![Vec2::zeros(); mesh.node_count()])
    }

    pub fn affine(m: Mat2, b: Vec2) -> Self {
        DisplacementField::Affine(AffineField { m, b })
    }

    pub fn linear(m: Mat2) -> Self {
        DisplacementField::Affine(AffineField::linear(m))
    }

    /// Nodal values on `mesh` (P1 interpolation is exact for affine fields).
    pub fn nodal(&self, mesh: &Mesh) -> Result<Vec<Vec2>> {
        match self {
            DisplacementField::Nodal(v) => {
                if v.len() != mesh.node_count() {
                    return Err(Error::SizeMismatch {
                        expected: mesh.node_count(),
                        got: v.len(),
                    });
                }
                Ok(v.clone())
            }
            DisplacementField::Affine(a) => Ok(mesh.nodes().iter().map(|x| a.eval(x)).collect()),
        }
    }

    pub fn to_nodal(&self, mesh: &Mesh) -> Result<DisplacementField> {
        Ok(DisplacementField::Nodal(self.nodal(mesh)?))
    }

    /// Flat dof vector `[u₀ₓ, u₀ᵧ, u₁ₓ, …]`.
    pub fn to_flat(&self, mesh: &Mesh) -> Result<Vec<f64>> {
        Ok(self.nodal(mesh)?.iter().flat_map(|v| [v[0], v[1]]).collect())
    }

    pub fn from_flat(x: &[f64]) -> Self {
        DisplacementField::Nodal(x.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect())
    }

    /// `a·self + b·other` as a nodal field.
    pub fn combine(&self, a: f64, other: &DisplacementField, b: f64, mesh: &Mesh) -> Result<DisplacementField> {
        let u = self.nodal(mesh)?;
        let v = other.nodal(mesh)?;
        Ok(DisplacementField::Nodal(u.iter().zip(&v).map(|(p, q)| p * a + q * b).collect()))
    }
}

/// Per-triangle displacement gradients `∇v`.
pub fn gradient_field(mesh: &Mesh, v: &DisplacementField) -> Result<Vec<Mat2>> {
    match v {
        DisplacementField::Affine(a) => Ok(vec![a.m; mesh.triangles().len()]),
        DisplacementField::Nodal(_) => {
            let u = v.nodal(mesh)?;
            Ok(mesh
                .triangles()
                .iter()
                .zip(mesh.elements())
                .map(|(t, e)| (0..3).fold(Mat2::zeros(), |acc, j| acc + u[t[j]] * e.grads[j].transpose()))
                .collect())
        }
    }
}

/// Per-triangle linearized strain `E(v) = sym ∇v`.
pub fn strain_field(mesh: &Mesh, v: &DisplacementField) -> Result<Vec<Mat2>> {
    Ok(gradient_field(mesh, v)?.iter().map(sym).collect())
}

/// `∫_Ω V0(E(v) − G) dx` for a constant symmetric pre-strain `G`.
pub fn integrate_quadratic_energy(mesh: &Mesh, m: &Material, v: &DisplacementField, g: &Mat2) -> Result<f64> {
    if !is_symmetric(g, 1e-12) {
        return Err(Error::NotSymmetric);
    }
    let strains = strain_field(mesh, v)?;
    Ok(integrate_strain_energy(mesh, m, &strains, g))
}

pub(crate) fn integrate_strain_energy(mesh: &Mesh, m: &Material, strains: &[Mat2], g: &Mat2) -> f64 {
    strains
        .iter()
        .zip(mesh.elements())
        .map(|(e, el)| el.area * v0(m, &(e - g)))
        .sum()
}

/// `∫_Ω u·v dx`, exact for P1 fields.
pub fn l2_inner(mesh: &Mesh, u: &DisplacementField, v: &DisplacementField) -> Result<f64> {
    let a = u.nodal(mesh)?;
    let b = v.nodal(mesh)?;
    let mut total = 0.0;
    for (t, e) in mesh.triangles().iter().zip(mesh.elements()) {
        // P1 mass matrix: |T|/12 · (1 + δ_ij)
        let mut local = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let w = if i == j { 2.0 } else { 1.0 };
                local += w * a[t[i]].dot(&b[t[j]]);
            }
        }
        total += local * e.area / 12.0;
    }
    Ok(total)
}

/// `(∫_Ω |A|² dx)^{1/2}` for an element-wise constant matrix field.
pub fn l2_norm_elementwise(mesh: &Mesh, field: &[Mat2]) -> f64 {
    field
        .iter()
        .zip(mesh.elements())
        .map(|(a, e)| e.area * a.norm_squared())
        .sum::<f64>()
        .sqrt()
}

/// `∫_Ω |A| dx` for an element-wise constant matrix field.
pub fn l1_norm_elementwise(mesh: &Mesh, field: &[Mat2]) -> f64 {
    field.iter().zip(mesh.elements()).map(|(a, e)| e.area * a.norm()).sum()
}

/// Centred axis-aligned box `∏[-hᵢ, hᵢ]` used for exact affine integrals in 3D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain3 {
    pub half_widths: [f64; 3],
}

impl BoxDomain3 {
    pub fn new(half_widths: [f64; 3]) -> Result<Self> {
        if half_widths.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::BadParameter("box half-widths must be positive".into()));
        }
        Ok(Self { half_widths })
    }

    pub fn unit_cube() -> Self {
        Self {
            half_widths: [0.5; 3],
        }
    }

    pub fn volume(&self) -> f64 {
        self.half_widths.iter().map(|h| 2.0 * h).product()
    }

    /// `∫ x ⊗ x dx` (diagonal).
    pub fn second_moment(&self) -> MatrixN<3> {
        let vol = self.volume();
        MatrixN::<3>::from_diagonal(&nalgebra::Vector3::from_fn(|i, _| vol * self.half_widths[i].powi(2) / 3.0))
    }

    /// Outward face normals and areas.
    pub fn faces(&self) -> Vec<(nalgebra::Vector3<f64>, f64)> {
        let vol = self.volume();
        let mut out = Vec::with_capacity(6);
        for i in 0..3 {
            let area = vol / (2.0 * self.half_widths[i]);
            for s in [1.0, -1.0] {
                let mut n = nalgebra::Vector3::zeros();
                n[i] = s;
                out.push((n, area));
            }
        }
        out
    }

    /// `∫ V0(sym M − G) dx`: the integrand is constant.
    pub fn integrate_quadratic_energy(&self, m: &Material, v: &AffineField<3>, g: &MatrixN<3>) -> Result<f64> {
        if !is_symmetric(g, 1e-12) {
            return Err(Error::NotSymmetric);
        }
        Ok(self.volume() * v0(m, &(v.strain() - g)))
    }
}
