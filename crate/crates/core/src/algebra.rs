//! Small fixed-dimension matrix helpers and skew-symmetric parametrizations.
//!
//! Skew matrices are never stored as raw matrices: a planar skew matrix is a
//! single rate `w`, a spatial one is its axis vector `a` with `W x = a × x`.

use nalgebra::{Matrix2, Matrix3, SMatrix, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type MatrixN<const N: usize> = SMatrix<f64, N, N>;
pub type Mat2 = Matrix2<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;

/// Tolerance on `|p| - 1` accepted by [`euler_rodrigues`].
pub const UNIT_TOL: f64 = 1e-12;

pub fn sym<const N: usize>(m: &MatrixN<N>) -> MatrixN<N> {
    (m + m.transpose()) * 0.5
}

pub fn skw<const N: usize>(m: &MatrixN<N>) -> MatrixN<N> {
    (m - m.transpose()) * 0.5
}

/// Frobenius inner product `A · B = Σ A_ij B_ij`.
pub fn frob<const N: usize>(a: &MatrixN<N>, b: &MatrixN<N>) -> f64 {
    a.dot(b)
}

/// Squared Frobenius norm `|A|² = Tr(AᵀA)`.
pub fn frob_sq<const N: usize>(a: &MatrixN<N>) -> f64 {
    a.norm_squared()
}

pub fn is_symmetric<const N: usize>(m: &MatrixN<N>, tol: f64) -> bool {
    (m - m.transpose()).norm() <= tol * (1.0 + m.norm())
}

/// Determinant for the two supported dimensions.
pub trait Det {
    fn det(&self) -> f64;
}

impl Det for Mat2 {
    fn det(&self) -> f64 {
        self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)]
    }
}

impl Det for Mat3 {
    fn det(&self) -> f64 {
        self.determinant()
    }
}

/// Minimal parametrization of an `N × N` skew-symmetric matrix.
pub trait SkewParam<const N: usize>: Copy + std::fmt::Debug + PartialEq {
    /// Number of real parameters (1 for N=2, 3 for N=3).
    const PARAMS: usize;

    fn from_params(p: &[f64]) -> Self;
    fn params(&self) -> Vec<f64>;
    fn to_matrix(&self) -> MatrixN<N>;

    /// `W²`, computed in closed form.
    fn square(&self) -> MatrixN<N>;

    /// `∂W/∂p_k`.
    fn generator(k: usize) -> MatrixN<N>;

    /// Squared parameter norm: `w²` or `|a|²`.
    fn param_norm_sq(&self) -> f64 {
        self.params().iter().map(|x| x * x).sum()
    }

    /// Representative of the `±` pair with first nonzero component positive.
    fn canonical(&self) -> Self {
        let p = self.params();
        let scale = p.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        match p.iter().find(|x| x.abs() > 1e-14 * scale) {
            Some(first) if *first < 0.0 => Self::from_params(&p.iter().map(|x| -x).collect::<Vec<_>>()),
            _ => *self,
        }
    }
}

/// Planar skew matrix `[[0, -w], [w, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarSkew {
    pub w: f64,
}

impl PlanarSkew {
    pub fn new(w: f64) -> Self {
        Self { w }
    }
}

impl SkewParam<2> for PlanarSkew {
    const PARAMS: usize = 1;

    fn from_params(p: &[f64]) -> Self {
        Self { w: p[0] }
    }

    fn params(&self) -> Vec<f64> {
        vec![self.w]
    }

    fn to_matrix(&self) -> Mat2 {
        Mat2::new(0.0, -self.w, self.w, 0.0)
    }

    fn square(&self) -> Mat2 {
        Mat2::identity() * (-self.w * self.w)
    }

    fn generator(_k: usize) -> Mat2 {
        Mat2::new(0.0, -1.0, 1.0, 0.0)
    }
}

/// Spatial skew matrix given by its axis: `W x = a × x`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AxialSkew {
    pub a: Vec3,
}

impl AxialSkew {
    pub fn new(a0: f64, a1: f64, a2: f64) -> Self {
        Self {
            a: Vec3::new(a0, a1, a2),
        }
    }
}

impl SkewParam<3> for AxialSkew {
    const PARAMS: usize = 3;

    fn from_params(p: &[f64]) -> Self {
        Self::new(p[0], p[1], p[2])
    }

    fn params(&self) -> Vec<f64> {
        vec![self.a[0], self.a[1], self.a[2]]
    }

    fn to_matrix(&self) -> Mat3 {
        self.a.cross_matrix()
    }

    // W² = a⊗a − |a|² I
    fn square(&self) -> Mat3 {
        self.a * self.a.transpose() - Mat3::identity() * self.a.norm_squared()
    }

    fn generator(k: usize) -> Mat3 {
        let mut e = Vec3::zeros();
        e[k] = 1.0;
        e.cross_matrix()
    }
}

pub fn skew_from_params<const N: usize, S: SkewParam<N>>(p: &S) -> MatrixN<N> {
    p.to_matrix()
}

pub fn skew_square<const N: usize, S: SkewParam<N>>(p: &S) -> MatrixN<N> {
    p.square()
}

/// `∂(W²)/∂p_k = W G_k + G_k W`.
pub fn skew_square_derivative<const N: usize, S: SkewParam<N>>(p: &S, k: usize) -> MatrixN<N> {
    let w = p.to_matrix();
    let g = S::generator(k);
    w * g + g * w
}

/// Rotation `R = I + sin θ W + (1 − cos θ) W²` for a unit parameter.
pub fn euler_rodrigues<const N: usize, S: SkewParam<N>>(p: &S, theta: f64) -> Result<MatrixN<N>> {
    let norm = p.param_norm_sq().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitAxis(norm));
    }
    Ok(MatrixN::<N>::identity() + p.to_matrix() * theta.sin() + p.square() * (1.0 - theta.cos()))
}

/// Rotation of the plane by `theta`.
pub fn rotation2(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// Planar cross product `x₁v₂ − x₂v₁`.
pub fn cross2(x: &Vec2, v: &Vec2) -> f64 {
    x[0] * v[1] - x[1] * v[0]
}
