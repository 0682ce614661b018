//! Dead loads, the work functional `L`, equilibrium and the compatibility
//! trichotomy for the sign of `L(W²x)`.

use serde::{Deserialize, Serialize};

use crate::algebra::{sym, AxialSkew, Mat2, Mat3, MatrixN, PlanarSkew, SkewParam, Vec2, Vec3};
use crate::error::{Error, Result};
use crate::fem::{AffineField, BoxDomain3, DisplacementField};
use crate::mesh::Mesh;

/// Band below which a compatibility test quantity counts as zero, relative to `|T|`.
pub const WEAK_BAND: f64 = 1e-10;

/// Relative tolerance of [`check_equilibrated`].
pub const EQUILIBRIUM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Traction {
    Zero,
    /// `f = f₀ n` with `n` the outward normal.
    NormalScaled(f64),
    /// One constant vector per boundary edge, in mesh order.
    PerEdge(Vec<Vec2>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BodyForce {
    Zero,
    /// `g(x) = M x`.
    Linear(Mat2),
    /// One constant vector per triangle.
    PerCell(Vec<Vec2>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSystem {
    pub traction: Traction,
    pub body: BodyForce,
}

impl LoadSystem {
    pub fn zero() -> Self {
        Self {
            traction: Traction::Zero,
            body: BodyForce::Zero,
        }
    }

    pub fn normal(coefficient: f64) -> Self {
        Self {
            traction: Traction::NormalScaled(coefficient),
            body: BodyForce::Zero,
        }
    }

    pub fn linear_body(m: Mat2) -> Self {
        Self {
            traction: Traction::Zero,
            body: BodyForce::Linear(m),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            traction: match &self.traction {
                Traction::Zero => Traction::Zero,
                Traction::NormalScaled(c) => Traction::NormalScaled(c * t),
                Traction::PerEdge(v) => Traction::PerEdge(v.iter().map(|f| f * t).collect()),
            },
            body: match &self.body {
                BodyForce::Zero => BodyForce::Zero,
                BodyForce::Linear(m) => BodyForce::Linear(m * t),
                BodyForce::PerCell(v) => BodyForce::PerCell(v.iter().map(|g| g * t).collect()),
            },
        }
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        if let Traction::PerEdge(v) = &self.traction {
            if v.len() != mesh.boundary().len() {
                return Err(Error::SizeMismatch {
                    expected: mesh.boundary().len(),
                    got: v.len(),
                });
            }
        }
        if let BodyForce::PerCell(v) = &self.body {
            if v.len() != mesh.triangles().len() {
                return Err(Error::SizeMismatch {
                    expected: mesh.triangles().len(),
                    got: v.len(),
                });
            }
        }
        Ok(())
    }

    fn edge_traction(&self, mesh: &Mesh, k: usize) -> Vec2 {
        match &self.traction {
            Traction::Zero => Vec2::zeros(),
            Traction::NormalScaled(c) => mesh.boundary()[k].normal * *c,
            Traction::PerEdge(v) => v[k],
        }
    }

    /// Nodal load vector `b_i = ∫_∂Ω f φ_i + ∫_Ω g φ_i`, so that
    /// `L(v) = Σ b_i·v_i` for every P1 field.
    pub fn load_vector(&self, mesh: &Mesh) -> Result<Vec<Vec2>> {
        self.validate(mesh)?;
        let mut b = vec![Vec2::zeros(); mesh.node_count()];
        for (k, e) in mesh.boundary().iter().enumerate() {
            let f = self.edge_traction(mesh, k) * (0.5 * mesh.edge_length(e));
            b[e.nodes[0]] += f;
            b[e.nodes[1]] += f;
        }
        match &self.body {
            BodyForce::Zero => {}
            BodyForce::PerCell(g) => {
                for (k, (t, el)) in mesh.triangles().iter().zip(mesh.elements()).enumerate() {
                    for &i in t {
                        b[i] += g[k] * (el.area / 3.0);
                    }
                }
            }
            BodyForce::Linear(m) => {
                // edge-midpoint rule, exact for the quadratic integrand g·φ_i
                for (k, (t, el)) in mesh.triangles().iter().zip(mesh.elements()).enumerate() {
                    let mids = mesh.midpoints(k);
                    // φ at the midpoints: node j is ½ on the two edges touching it
                    for (j, &i) in t.iter().enumerate() {
                        let touching = [mids[j], mids[(j + 2) % 3]];
                        let g_sum = touching.iter().map(|x| m * x * 0.5).fold(Vec2::zeros(), |a, c| a + c);
                        b[i] += g_sum * (el.area / 3.0);
                    }
                }
            }
        }
        Ok(b)
    }

    /// `∫_∂Ω |f|²`.
    pub fn traction_norm_sq(&self, mesh: &Mesh) -> f64 {
        (0..mesh.boundary().len())
            .map(|k| self.edge_traction(mesh, k).norm_squared() * mesh.edge_length(&mesh.boundary()[k]))
            .sum()
    }

    /// `∫_Ω |g|²`, exact for the supported body forces.
    pub fn body_norm_sq(&self, mesh: &Mesh) -> f64 {
        match &self.body {
            BodyForce::Zero => 0.0,
            BodyForce::PerCell(g) => g.iter().zip(mesh.elements()).map(|(g, e)| g.norm_squared() * e.area).sum(),
            BodyForce::Linear(m) => (m.transpose() * m * mesh.second_moment()).trace(),
        }
    }

    /// `‖f‖²_{L²(∂Ω)} + ‖g‖²_{L²(Ω)}`.
    pub fn norm_sq(&self, mesh: &Mesh) -> f64 {
        self.traction_norm_sq(mesh) + self.body_norm_sq(mesh)
    }

    fn magnitude(&self, mesh: &Mesh) -> f64 {
        let traction: f64 = (0..mesh.boundary().len())
            .map(|k| self.edge_traction(mesh, k).norm() * mesh.edge_length(&mesh.boundary()[k]))
            .sum();
        let body = (self.body_norm_sq(mesh) * mesh.area()).sqrt();
        traction + body
    }
}

/// `L(v) = ∫_∂Ω f·v + ∫_Ω g·v`, exact for P1 and affine fields.
pub fn eval_load_work(ls: &LoadSystem, mesh: &Mesh, v: &DisplacementField) -> Result<f64> {
    let b = ls.load_vector(mesh)?;
    let u = v.nodal(mesh)?;
    Ok(b.iter().zip(&u).map(|(b, u)| b.dot(u)).sum())
}

/// Matrix `T = ∫_∂Ω f⊗x + ∫_Ω g⊗x`, representing `L(Mx) = ⟨M, T⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResultantMatrix<const N: usize> {
    pub t: MatrixN<N>,
}

impl<const N: usize> ResultantMatrix<N> {
    /// `c(W) = L(W²x) = ⟨W², sym T⟩`.
    pub fn compatibility_value<S: SkewParam<N>>(&self, w: &S) -> f64 {
        w.square().dot(&sym(&self.t))
    }

    /// `L(Mx) = ⟨M, T⟩`.
    pub fn work_on_linear(&self, m: &MatrixN<N>) -> f64 {
        m.dot(&self.t)
    }
}

pub fn resultant_matrix(ls: &LoadSystem, mesh: &Mesh) -> Result<ResultantMatrix<2>> {
    ls.validate(mesh)?;
    let mut t = Mat2::zeros();
    for (k, e) in mesh.boundary().iter().enumerate() {
        let mid = (mesh.nodes()[e.nodes[0]] + mesh.nodes()[e.nodes[1]]) * 0.5;
        t += ls.edge_traction(mesh, k) * mid.transpose() * mesh.edge_length(e);
    }
    match &ls.body {
        BodyForce::Zero => {}
        BodyForce::PerCell(g) => {
            for (k, (gk, el)) in g.iter().zip(mesh.elements()).enumerate() {
                t += gk * mesh.centroid(k).transpose() * el.area;
            }
        }
        BodyForce::Linear(m) => t += m * mesh.second_moment(),
    }
    Ok(ResultantMatrix { t })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub equilibrated: bool,
    /// Work on the unit translations `e₁, e₂`.
    pub force_residual: Vec2,
    /// Work on the rotation field `(−x₂, x₁)`.
    pub moment_residual: f64,
    pub tolerance: f64,
}

/// Checks that `L` vanishes on the rigid fields `e₁`, `e₂`, `(−x₂, x₁)`.
pub fn check_equilibrated(ls: &LoadSystem, mesh: &Mesh) -> Result<Equilibrium> {
    let b = ls.load_vector(mesh)?;
    let force = b.iter().fold(Vec2::zeros(), |a, c| a + c);
    let moment: f64 = b
        .iter()
        .zip(mesh.nodes())
        .map(|(b, x)| b.dot(&Vec2::new(-x[1], x[0])))
        .sum();
    let tolerance = EQUILIBRIUM_TOL * ls.magnitude(mesh) * (1.0 + mesh.diameter()) + f64::MIN_POSITIVE;
    Ok(Equilibrium {
        equilibrated: force.norm() <= tolerance && moment.abs() <= tolerance,
        force_residual: force,
        moment_residual: moment,
        tolerance,
    })
}

/// Sign class of `c(W) = L(W²x)` over nonzero skew `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Compatibility<S> {
    /// `c(W) < 0` for every `W ≠ 0`; `margin` is the test quantity (`Tr T` in
    /// 2D, the smallest pairwise eigenvalue sum of `sym T` in 3D).
    StrictlyCompatible { margin: f64, band: f64 },
    /// `c(W) ≤ 0` with equality on the span of `kernel`.
    WeaklyCompatible { kernel: Vec<S>, margin: f64, band: f64 },
    /// `c(witness) > 0`, with `excess = c(witness)` for the unit witness.
    Violated { witness: S, excess: f64 },
}

impl<S> Compatibility<S> {
    pub fn label(&self) -> &'static str {
        match self {
            Compatibility::StrictlyCompatible { .. } => "strictly_compatible",
            Compatibility::WeaklyCompatible { .. } => "weakly_compatible",
            Compatibility::Violated { .. } => "violated",
        }
    }
}

/// 2D: `c(W) = −w² Tr T`.
pub fn classify_resultant2(t: &ResultantMatrix<2>) -> Compatibility<PlanarSkew> {
    let margin = t.t.trace();
    let band = WEAK_BAND * t.t.norm();
    if margin.abs() <= band {
        Compatibility::WeaklyCompatible {
            kernel: vec![PlanarSkew::new(1.0)],
            margin,
            band,
        }
    } else if margin > 0.0 {
        Compatibility::StrictlyCompatible { margin, band }
    } else {
        Compatibility::Violated {
            witness: PlanarSkew::new(1.0),
            excess: -margin,
        }
    }
}

/// 3D: on `|a| = 1`, `c = aᵀ S a − Tr S` with `S = sym T`, whose maximum
/// `−(t₁ + t₂)` is attained on the top eigenvector.
pub fn classify_resultant3(t: &ResultantMatrix<3>) -> Compatibility<AxialSkew> {
    let s = sym(&t.t);
    let eig = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs: Vec<Vec3> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    let margin = vals[0] + vals[1];
    let band = WEAK_BAND * t.t.norm();
    if margin.abs() <= band {
        // c vanishes on eigenvectors whose eigenvalue ties the top one
        let kernel = (0..3)
            .filter(|&k| (vals[k] - vals[2]).abs() <= band)
            .map(|k| AxialSkew { a: vecs[k] }.canonical())
            .collect();
        Compatibility::WeaklyCompatible { kernel, margin, band }
    } else if margin > 0.0 {
        Compatibility::StrictlyCompatible { margin, band }
    } else {
        Compatibility::Violated {
            witness: AxialSkew { a: vecs[2] }.canonical(),
            excess: -margin,
        }
    }
}

pub fn classify_compatibility(ls: &LoadSystem, mesh: &Mesh) -> Result<Compatibility<PlanarSkew>> {
    let eq = check_equilibrated(ls, mesh)?;
    if !eq.equilibrated {
        return Err(Error::NotEquilibrated {
            force: eq.force_residual.norm(),
            moment: eq.moment_residual.abs(),
        });
    }
    Ok(classify_resultant2(&resultant_matrix(ls, mesh)?))
}

/// Value of `inf F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InfStatus<S> {
    Finite(f64),
    /// `F(τ z_W) ≤ min E − τ·slope → −∞` along `z_W = ½W²x`, `W = witness`.
    MinusInfinity { witness: S, slope: f64 },
}

/// `inf F = min E − sup_W L(½W²x)`.
pub fn inf_f_status<S: Clone>(cls: &Compatibility<S>, min_e: f64) -> InfStatus<S> {
    match cls {
        Compatibility::StrictlyCompatible { .. } | Compatibility::WeaklyCompatible { .. } => InfStatus::Finite(min_e),
        Compatibility::Violated { witness, excess } => InfStatus::MinusInfinity {
            witness: witness.clone(),
            slope: 0.5 * excess,
        },
    }
}

/// Dead load on a [`BoxDomain3`]: `f = f₀ n` on the faces and `g = M x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxLoad3 {
    pub traction_coefficient: f64,
    pub body_matrix: Mat3,
}

impl BoxLoad3 {
    pub fn zero() -> Self {
        Self {
            traction_coefficient: 0.0,
            body_matrix: Mat3::zeros(),
        }
    }

    /// Exact resultant: `f₀|Ω| I + M S` with `S` the second moment.
    pub fn resultant(&self, domain: &BoxDomain3) -> ResultantMatrix<3> {
        ResultantMatrix {
            t: Mat3::identity() * (self.traction_coefficient * domain.volume()) + self.body_matrix * domain.second_moment(),
        }
    }

    /// Force and moment residuals vanish iff `T` is symmetric on a centred box.
    pub fn is_equilibrated(&self, domain: &BoxDomain3) -> bool {
        let t = self.resultant(domain).t;
        (t - t.transpose()).norm() <= EQUILIBRIUM_TOL * (1.0 + t.norm())
    }

    /// `L(Mx + b)`; the translation part does no work on a centred box.
    pub fn work(&self, domain: &BoxDomain3, v: &AffineField<3>) -> f64 {
        self.resultant(domain).work_on_linear(&v.m)
    }

    pub fn classify(&self, domain: &BoxDomain3) -> Result<Compatibility<AxialSkew>> {
        if !self.is_equilibrated(domain) {
            let t = self.resultant(domain).t;
            return Err(Error::NotEquilibrated {
                force: 0.0,
                moment: (t - t.transpose()).norm(),
            });
        }
        Ok(classify_resultant3(&self.resultant(domain)))
    }
}
