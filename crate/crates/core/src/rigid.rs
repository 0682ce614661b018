//! Infinitesimal rigid displacements and the L² projection onto them.
//!
//! On a normalized frame (`∫x = 0`, `∫x₁x₂ = 0`) translations and the
//! rotation field decouple, so
//! `P v = |Ω|⁻¹∫v + ω (−x₂, x₁)` with `ω = I⁻¹ ∫(x × v)` and `I = ∫|x|²`.

use crate::algebra::{cross2, Mat2, PlanarSkew, SkewParam, Vec2};
use crate::error::{Error, Result};
use crate::fem::{AffineField, DisplacementField};
use crate::mesh::Mesh;

/// Orthogonal basis of the rigid fields on a normalized mesh:
/// `e₁`, `e₂`, `(−x₂, x₁)`.
pub fn rigid_basis() -> [DisplacementField; 3] {
    [
        DisplacementField::affine(Mat2::zeros(), Vec2::new(1.0, 0.0)),
        DisplacementField::affine(Mat2::zeros(), Vec2::new(0.0, 1.0)),
        DisplacementField::linear(PlanarSkew::new(1.0).to_matrix()),
    ]
}

/// `P v` as an exact rigid affine field `c + W x`.
pub fn project_rigid(mesh: &Mesh, v: &DisplacementField) -> Result<AffineField<2>> {
    if !mesh.is_normalized() {
        return Err(Error::NotNormalized);
    }
    let u = v.nodal(mesh)?;
    let mut mean = Vec2::zeros();
    let mut moment = 0.0;
    for (k, (t, el)) in mesh.triangles().iter().zip(mesh.elements()).enumerate() {
        for &i in t {
            mean += u[i] * (el.area / 3.0);
        }
        // x × v is quadratic on the triangle: edge-midpoint rule is exact
        let mids = mesh.midpoints(k);
        let vm = [(u[t[0]] + u[t[1]]) * 0.5, (u[t[1]] + u[t[2]]) * 0.5, (u[t[2]] + u[t[0]]) * 0.5];
        moment += (0..3).map(|j| cross2(&mids[j], &vm[j])).sum::<f64>() * el.area / 3.0;
    }
    let area = mesh.area();
    let inertia = mesh.second_moment().trace();
    Ok(AffineField {
        m: PlanarSkew::new(moment / inertia).to_matrix(),
        b: mean / area,
    })
}

/// `v − P v` as a nodal field.
pub fn remove_rigid(mesh: &Mesh, v: &DisplacementField) -> Result<DisplacementField> {
    let p = project_rigid(mesh, v)?;
    let u = v.nodal(mesh)?;
    Ok(DisplacementField::Nodal(
        u.iter().zip(mesh.nodes()).map(|(u, x)| u - p.eval(x)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{l2_inner, strain_field};
    use crate::mesh::{generate_mesh, normalize_frame, MeshKind};
    use approx::assert_abs_diff_eq;

    #[test]
    fn rigid_fields_are_fixed() {
        let mesh = generate_mesh(MeshKind::UnitSquare, 4).unwrap();
        let v = DisplacementField::affine(PlanarSkew::new(0.7).to_matrix(), Vec2::new(1.0, -3.0));
        let p = project_rigid(&mesh, &v).unwrap();
        assert_abs_diff_eq!(p.m, PlanarSkew::new(0.7).to_matrix(), epsilon = 1e-14);
        assert_abs_diff_eq!(p.b, Vec2::new(1.0, -3.0), epsilon = 1e-14);
    }

    #[test]
    fn principal_stretches_project_to_zero() {
        // ∫x × Mx = M₁₂(S₁₁ − S₂₂) for symmetric M, so off-diagonal shear
        // only projects to zero on an isotropic section
        let mesh = normalize_frame(&generate_mesh(MeshKind::Rectangle { width: 2.0, height: 0.5 }, 4).unwrap()).unwrap();
        let p = project_rigid(&mesh, &DisplacementField::linear(Mat2::new(1.0, 0.0, 0.0, -2.0))).unwrap();
        assert_abs_diff_eq!(p.m, Mat2::zeros(), epsilon = 1e-14);
        assert_abs_diff_eq!(p.b, Vec2::zeros(), epsilon = 1e-14);
        let square = generate_mesh(MeshKind::UnitSquare, 4).unwrap();
        let p = project_rigid(&square, &DisplacementField::linear(Mat2::new(1.0, 0.4, 0.4, -2.0))).unwrap();
        assert_abs_diff_eq!(p.m, Mat2::zeros(), epsilon = 1e-14);
        assert_abs_diff_eq!(p.b, Vec2::zeros(), epsilon = 1e-14);
    }

    #[test]
    fn requires_normalized_frame() {
        let mesh = generate_mesh(MeshKind::UnitSquare, 2).unwrap();
        let shifted = mesh.transformed(&Mat2::identity(), &Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(
            project_rigid(&shifted, &DisplacementField::zeros(&shifted)),
            Err(Error::NotNormalized)
        );
    }

    #[test]
    fn residual_is_orthogonal_and_strain_free_change() {
        let mesh = generate_mesh(MeshKind::UnitSquare, 3).unwrap();
        let u: Vec<Vec2> = mesh
            .nodes()
            .iter()
            .map(|x| Vec2::new((3.0 * x[0]).sin() + x[1] * x[1], x[0] * x[1] - 0.4))
            .collect();
        let v = DisplacementField::Nodal(u);
        let r = remove_rigid(&mesh, &v).unwrap();
        for b in rigid_basis() {
            assert!(l2_inner(&mesh, &r, &b).unwrap().abs() <= 1e-15);
        }
        let e0 = strain_field(&mesh, &v).unwrap();
        let e1 = strain_field(&mesh, &r).unwrap();
        for (a, b) in e0.iter().zip(&e1) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }
}
