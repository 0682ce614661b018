//! Green-St.Venant stored energy, its rescalings `V_h` and the limit
//! quadratic form `V0(B) = 4μ|B|² + 2λ(Tr B)²`.

use serde::{Deserialize, Serialize};

use crate::algebra::{frob, frob_sq, is_symmetric, sym, Det, MatrixN};
use crate::error::{Error, Result};

/// Energy value that may be `+∞` (orientation constraint violated).
///
/// Infinite values never enter floating-point sums: any sum containing an
/// `Infinite` term is `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Energy {
    Finite(f64),
    Infinite,
}

impl Energy {
    pub fn is_finite(&self) -> bool {
        matches!(self, Energy::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Energy::Finite(v) => Some(*v),
            Energy::Infinite => None,
        }
    }

    pub fn scale(self, s: f64) -> Energy {
        match self {
            Energy::Finite(v) => Energy::Finite(v * s),
            Energy::Infinite => Energy::Infinite,
        }
    }
}

impl std::ops::Add for Energy {
    type Output = Energy;

    fn add(self, rhs: Energy) -> Energy {
        match (self, rhs) {
            (Energy::Finite(a), Energy::Finite(b)) => Energy::Finite(a + b),
            _ => Energy::Infinite,
        }
    }
}

impl std::iter::Sum for Energy {
    fn sum<I: Iterator<Item = Energy>>(iter: I) -> Energy {
        iter.fold(Energy::Finite(0.0), |acc, e| acc + e)
    }
}

/// Homogeneous isotropic material `(μ, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub mu: f64,
    pub lambda: f64,
}

impl Material {
    /// Requires `μ > 0` and `λ ≥ 0`. `λ = 0` is admitted for the pure
    /// `|FᵀF − I|²` density; see [`Material::require_strict`].
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidMaterial(format!("mu must be > 0, got {mu}")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidMaterial(format!("lambda must be >= 0, got {lambda}")));
        }
        Ok(Self { mu, lambda })
    }

    /// Both Lamé parameters strictly positive.
    pub fn require_strict(&self) -> Result<()> {
        if self.lambda > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidMaterial("lambda must be strictly positive here".into()))
        }
    }

    /// Coercivity constant `C` with `W(F) ≥ C|FᵀF − I|²`.
    pub fn coercivity(&self) -> f64 {
        self.mu
    }

    /// Upper constant `γ` with `V0(B) ≤ γ|B|²` in dimension `n`.
    pub fn upper_constant(&self, n: usize) -> f64 {
        4.0 * self.mu + 2.0 * self.lambda * n as f64
    }
}

fn gsv_from_strain<const N: usize>(m: &Material, e: &MatrixN<N>) -> f64 {
    let tr = e.trace();
    m.mu * frob_sq(e) + 0.5 * m.lambda * tr * tr
}

// F·[4μ E + 2λ Tr(E) I]
fn gsv_stress_from_strain<const N: usize>(m: &Material, f: &MatrixN<N>, e: &MatrixN<N>) -> MatrixN<N> {
    let inner = e * (4.0 * m.mu) + MatrixN::<N>::identity() * (2.0 * m.lambda * e.trace());
    f * inner
}

/// Green-St.Venant density `μ|FᵀF−I|² + (λ/2)(Tr(FᵀF−I))²`, infinite unless `det F > 0`.
pub fn gsv_density<const N: usize>(m: &Material, f: &MatrixN<N>) -> Energy
where
    MatrixN<N>: Det,
{
    if f.det() <= 0.0 {
        return Energy::Infinite;
    }
    let e = f.transpose() * f - MatrixN::<N>::identity();
    Energy::Finite(gsv_from_strain(m, &e))
}

/// `DW(F) = F·[4μ(C − I) + 2λ Tr(C − I) I]`, `None` where `W = +∞`.
pub fn gsv_stress<const N: usize>(m: &Material, f: &MatrixN<N>) -> Option<MatrixN<N>>
where
    MatrixN<N>: Det,
{
    if f.det() <= 0.0 {
        return None;
    }
    let e = f.transpose() * f - MatrixN::<N>::identity();
    Some(gsv_stress_from_strain(m, f, &e))
}

/// `V0(B) = 4μ|B|² + 2λ(Tr B)²` for symmetric `B`.
pub fn v0_quadratic<const N: usize>(m: &Material, b: &MatrixN<N>) -> Result<f64> {
    if !is_symmetric(b, 1e-12) {
        return Err(Error::NotSymmetric);
    }
    Ok(v0(m, b))
}

pub(crate) fn v0<const N: usize>(m: &Material, b: &MatrixN<N>) -> f64 {
    let tr = b.trace();
    4.0 * m.mu * frob_sq(b) + 2.0 * m.lambda * tr * tr
}

/// `DV0(B) = 8μB + 4λ(Tr B) I`, so that `V0(B + tC) = V0(B) + t DV0(B)·C + t² V0(C)`.
pub fn v0_stress<const N: usize>(m: &Material, b: &MatrixN<N>) -> MatrixN<N> {
    b * (8.0 * m.mu) + MatrixN::<N>::identity() * (4.0 * m.lambda * b.trace())
}

/// Symmetric bilinear form with `V0(B) = q(B, B)`.
pub fn v0_bilinear<const N: usize>(m: &Material, a: &MatrixN<N>, b: &MatrixN<N>) -> f64 {
    4.0 * m.mu * frob(a, b) + 2.0 * m.lambda * a.trace() * b.trace()
}

/// `h⁻²·W(I + hB)`, evaluated without cancellation as
/// `μ|2 sym B + h BᵀB|² + (λ/2)(Tr(2 sym B + h BᵀB))²`.
pub fn vh_density<const N: usize>(m: &Material, h: f64, b: &MatrixN<N>) -> Energy
where
    MatrixN<N>: Det,
{
    let f = MatrixN::<N>::identity() + b * h;
    if f.det() <= 0.0 {
        return Energy::Infinite;
    }
    Energy::Finite(gsv_from_strain(m, &rescaled_strain(h, b)))
}

/// Derivative of [`vh_density`] with respect to `B`, i.e. `h⁻¹ DW(I + hB)`.
pub fn vh_stress<const N: usize>(m: &Material, h: f64, b: &MatrixN<N>) -> Option<MatrixN<N>>
where
    MatrixN<N>: Det,
{
    let f = MatrixN::<N>::identity() + b * h;
    if f.det() <= 0.0 {
        return None;
    }
    Some(gsv_stress_from_strain(m, &f, &rescaled_strain(h, b)))
}

// (FᵀF − I)/h with F = I + hB
fn rescaled_strain<const N: usize>(h: f64, b: &MatrixN<N>) -> MatrixN<N> {
    sym(b) * 2.0 + b.transpose() * b * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{euler_rodrigues, rotation2, AxialSkew, Mat2, Mat3, PlanarSkew, Vec3};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit() -> Material {
        Material::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn material_validation() {
        assert!(Material::new(0.0, 1.0).is_err());
        assert!(Material::new(1.0, -1.0).is_err());
        assert!(Material::new(1.0, 0.0).unwrap().require_strict().is_err());
        assert!(unit().require_strict().is_ok());
    }

    #[test]
    fn gsv_reference_values() {
        let m = unit();
        assert_eq!(gsv_density(&m, &Mat2::identity()), Energy::Finite(0.0));
        let r = rotation2(0.7);
        assert!(gsv_density(&m, &r).value().unwrap().abs() < 1e-28);
        assert_eq!(gsv_density(&m, &Mat2::new(1.0, 0.0, 0.0, -1.0)), Energy::Infinite);
        // C − I = I: |I|² + ½·2² = 4
        let f = Mat2::identity() * 2.0_f64.sqrt();
        assert_relative_eq!(gsv_density(&m, &f).value().unwrap(), 4.0, epsilon = 1e-14);
    }

    #[test]
    fn v0_reference_values() {
        let m = unit();
        assert_eq!(v0_quadratic(&m, &Mat2::zeros()).unwrap(), 0.0);
        assert_eq!(v0_quadratic(&m, &Mat2::identity()).unwrap(), 16.0);
        assert_eq!(v0_quadratic(&m, &(-Mat2::identity())).unwrap(), 16.0);
        assert_eq!(v0_quadratic(&m, &Mat2::new(0.0, 1.0, 0.0, 0.0)), Err(Error::NotSymmetric));
    }

    #[test]
    fn vh_reference_values() {
        let m = Material::new(1.0, 0.0).unwrap();
        assert_eq!(vh_density(&m, 0.1, &Mat2::zeros()), Energy::Finite(0.0));
        for h in [1e-1, 1e-2, 1e-3] {
            let w = crate::algebra::SkewParam::to_matrix(&PlanarSkew::new(1.0));
            assert_relative_eq!(vh_density(&m, h, &w).value().unwrap(), 2.0 * h * h, max_relative = 1e-12);
        }
    }

    #[test]
    fn vh_converges_linearly_to_v0() {
        let m = Material::new(1.3, 0.7).unwrap();
        let b = Mat2::new(0.3, -0.8, 0.5, 0.2);
        let limit = v0_quadratic(&m, &sym(&b)).unwrap();
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&h| (vh_density(&m, h, &b).value().unwrap() - limit).abs())
            .collect();
        for (k, e) in errs.iter().enumerate() {
            let h = [1e-2, 1e-3, 1e-4][k];
            assert!(*e <= 10.0 * h, "error {e} at h={h}");
        }
        // linear rate: each decade divides the error by ~10
        assert!((errs[0] / errs[1] - 10.0).abs() < 0.5);
        assert!((errs[1] / errs[2] - 10.0).abs() < 0.5);
    }

    #[test]
    fn frame_indifference_and_coercivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = Material::new(1.7, 0.4).unwrap();
        for _ in 0..50 {
            let f = Mat3::from_fn(|_, _| rng.random_range(-1.0..1.0)) + Mat3::identity();
            if f.determinant() <= 0.0 {
                continue;
            }
            let axis = Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0)).normalize();
            let r = euler_rodrigues(&AxialSkew { a: axis }, rng.random_range(-3.0..3.0)).unwrap();
            let w0 = gsv_density(&m, &f).value().unwrap();
            let w1 = gsv_density(&m, &(r * f)).value().unwrap();
            assert!((w0 - w1).abs() <= 1e-12 * (1.0 + w0));
            let e = f.transpose() * f - Mat3::identity();
            assert!(w0 >= m.coercivity() * frob_sq(&e) - 1e-14);
        }
    }

    #[test]
    fn upper_bound_near_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = Material::new(0.8, 2.0).unwrap();
        let gamma = m.upper_constant(2);
        for _ in 0..200 {
            let b = Mat2::from_fn(|_, _| rng.random_range(-0.1..0.1));
            let s = sym(&b);
            assert!(v0(&m, &s) <= gamma * frob_sq(&s) + 1e-15);
        }
    }

    #[test]
    fn stress_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = Material::new(1.1, 0.9).unwrap();
        for _ in 0..20 {
            let f = Mat2::identity() + Mat2::from_fn(|_, _| rng.random_range(-0.3..0.3));
            let dir = Mat2::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let t = 1e-5;
            let wp = gsv_density(&m, &(f + dir * t)).value().unwrap();
            let wm = gsv_density(&m, &(f - dir * t)).value().unwrap();
            let fd = (wp - wm) / (2.0 * t);
            let an = frob(&gsv_stress(&m, &f).unwrap(), &dir);
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "fd {fd} analytic {an}");

            let h = 0.05;
            let b = Mat2::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let vp = vh_density(&m, h, &(b + dir * t)).value().unwrap();
            let vm = vh_density(&m, h, &(b - dir * t)).value().unwrap();
            let fd = (vp - vm) / (2.0 * t);
            let an = frob(&vh_stress(&m, h, &b).unwrap(), &dir);
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3));
        }
    }

    #[test]
    fn v0_stress_is_derivative() {
        let m = Material::new(0.6, 1.4).unwrap();
        let b = Mat2::new(0.2, 0.1, 0.1, -0.7);
        let c = Mat2::new(1.0, 0.3, 0.3, 0.5);
        let t = 0.37;
        let lhs = v0(&m, &(b + c * t));
        let rhs = v0(&m, &b) + t * frob(&v0_stress(&m, &b), &c) + t * t * v0(&m, &c);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-14);
        assert_relative_eq!(v0_bilinear(&m, &b, &b), v0(&m, &b), max_relative = 1e-15);
    }

    #[test]
    fn infinite_energy_is_absorbing() {
        let total: Energy = [Energy::Finite(1.0), Energy::Infinite, Energy::Finite(2.0)].into_iter().sum();
        assert_eq!(total, Energy::Infinite);
        assert_eq!(Energy::Finite(3.0).scale(2.0), Energy::Finite(6.0));
    }
}
