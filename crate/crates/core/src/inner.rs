//! Inner minimization `min_W ∫V0(E(v) − ½W²)` over skew parameters.
//!
//! For N=2 the objective is an even, unimodal function of the scalar rate and
//! is minimized with Brent's method. For N=3 it is a quartic polynomial in
//! the axis vector: multistart BFGS from a fixed schedule, checked against a
//! successively refined 21³ grid that also serves as fallback start.

use serde::{Deserialize, Serialize};

use crate::algebra::{skew_square_derivative, AxialSkew, Mat2, MatrixN, PlanarSkew, SkewParam};
use crate::constitutive::{v0, v0_stress, Material};
use crate::error::{Error, Result};
use crate::fem::integrate_strain_energy;
use crate::mesh::Mesh;

/// Grid resolution per axis for the 3D oracle.
pub const GRID_POINTS: usize = 21;
/// Number of grid levels (the first grid plus refinements).
pub const GRID_LEVELS: usize = 8;

/// `G ↦ ∫ V0(E − G)` for a fixed strain field, with its derivative in `G`.
pub trait PrestrainObjective<const N: usize> {
    fn value(&self, g: &MatrixN<N>) -> f64;
    fn gradient(&self, g: &MatrixN<N>) -> MatrixN<N>;
    /// Root-mean-square strain magnitude, used to size brackets and grids.
    fn strain_scale(&self) -> f64;
    fn material(&self) -> &Material;
}

/// Element-wise constant strains on a planar mesh.
pub struct MeshPrestrain<'a> {
    pub mesh: &'a Mesh,
    pub material: Material,
    pub strains: Vec<Mat2>,
}

impl PrestrainObjective<2> for MeshPrestrain<'_> {
    fn value(&self, g: &Mat2) -> f64 {
        integrate_strain_energy(self.mesh, &self.material, &self.strains, g)
    }

    fn gradient(&self, g: &Mat2) -> Mat2 {
        -self
            .strains
            .iter()
            .zip(self.mesh.elements())
            .map(|(e, el)| v0_stress(&self.material, &(e - g)) * el.area)
            .fold(Mat2::zeros(), |a, b| a + b)
    }

    fn strain_scale(&self) -> f64 {
        let sq: f64 = self.strains.iter().zip(self.mesh.elements()).map(|(e, el)| el.area * e.norm_squared()).sum();
        (sq / self.mesh.area()).sqrt()
    }

    fn material(&self) -> &Material {
        &self.material
    }
}

/// Constant strain over a region of given volume (affine fields).
pub struct UniformPrestrain<const N: usize> {
    pub material: Material,
    pub strain: MatrixN<N>,
    pub volume: f64,
}

impl<const N: usize> PrestrainObjective<N> for UniformPrestrain<N> {
    fn value(&self, g: &MatrixN<N>) -> f64 {
        self.volume * v0(&self.material, &(self.strain - g))
    }

    fn gradient(&self, g: &MatrixN<N>) -> MatrixN<N> {
        -v0_stress(&self.material, &(self.strain - g)) * self.volume
    }

    fn strain_scale(&self) -> f64 {
        self.strain.norm()
    }

    fn material(&self) -> &Material {
        &self.material
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerReport<S> {
    /// Canonical minimizer (first nonzero component positive).
    pub skew: S,
    pub value: f64,
    /// Best value found by the grid oracle (3D only).
    pub grid_value: Option<f64>,
    pub evaluations: usize,
}

fn param_value<const N: usize, S: SkewParam<N>, O: PrestrainObjective<N>>(obj: &O, p: &[f64]) -> f64 {
    obj.value(&(S::from_params(p).square() * 0.5))
}

fn param_gradient<const N: usize, S: SkewParam<N>, O: PrestrainObjective<N>>(obj: &O, p: &[f64]) -> Vec<f64> {
    let s = S::from_params(p);
    let dg = obj.gradient(&(s.square() * 0.5));
    (0..S::PARAMS)
        .map(|k| dg.dot(&skew_square_derivative(&s, k)) * 0.5)
        .collect()
}

/// Upper bound on `|p|` at any minimizer: `V0(Ē − G) ≤ V0(Ē)` forces
/// `|G| ≤ |Ē|(1 + √κ)`, and `|½W²| ≥ |p|²/√2`.
fn radius_bound<const N: usize, O: PrestrainObjective<N>>(obj: &O) -> f64 {
    let m = obj.material();
    let kappa = m.upper_constant(N) / (4.0 * m.mu);
    (std::f64::consts::SQRT_2 * obj.strain_scale() * (1.0 + kappa.sqrt())).sqrt() * 1.05 + 1e-12
}

pub fn minimize_planar<O: PrestrainObjective<2>>(obj: &O) -> Result<InnerReport<PlanarSkew>> {
    let f = |w: f64| param_value::<2, PlanarSkew, O>(obj, &[w]);
    let hi = radius_bound(obj);
    let (w, value, evals) = brent(&f, 0.0, hi, 1e-13, 200).ok_or_else(|| {
        Error::InnerMinimization(format!("Brent search on [0, {hi:e}] exceeded its iteration budget"))
    })?;
    // the bracket includes w = 0, which Brent may only approach
    let at_zero = f(0.0);
    let (w, value) = if at_zero <= value { (0.0, at_zero) } else { (w, value) };
    Ok(InnerReport {
        skew: PlanarSkew::new(w).canonical(),
        value,
        grid_value: None,
        evaluations: evals + 1,
    })
}

/// Fixed start schedule: the origin plus 26 lattice directions × 3 radii.
pub fn start_schedule(radius: f64) -> Vec<[f64; 3]> {
    let mut starts = vec![[0.0; 3]];
    for scale in [0.5, 1.0, 2.0] {
        for i in -1i32..=1 {
            for j in -1i32..=1 {
                for k in -1i32..=1 {
                    if i == 0 && j == 0 && k == 0 {
                        continue;
                    }
                    let d = [i as f64, j as f64, k as f64];
                    let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                    starts.push([d[0] / n * radius * scale, d[1] / n * radius * scale, d[2] / n * radius * scale]);
                }
            }
        }
    }
    starts
}

pub fn minimize_axial<O: PrestrainObjective<3>>(obj: &O) -> Result<InnerReport<AxialSkew>> {
    let f = |p: &[f64]| param_value::<3, AxialSkew, O>(obj, p);
    let g = |p: &[f64]| param_gradient::<3, AxialSkew, O>(obj, p);
    let bound = radius_bound(obj);
    let mut evals = 0;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut converged = 0;
    for start in start_schedule(bound / 2.0) {
        let run = bfgs(&f, &g, &start, 500);
        evals += run.evaluations;
        if run.converged {
            converged += 1;
            if best.as_ref().is_none_or(|(_, v)| run.value < *v) {
                best = Some((run.x, run.value));
            }
        }
    }

    let (grid_x, grid_value, grid_evals) = grid_minimize3(&f, bound, GRID_POINTS, GRID_LEVELS);
    evals += grid_evals;
    let scale = 1.0 + grid_value.abs();
    let needs_fallback = best.as_ref().is_none_or(|(_, v)| *v > grid_value + 1e-9 * scale);
    if needs_fallback {
        let run = bfgs(&f, &g, &grid_x, 500);
        evals += run.evaluations;
        if run.converged && run.value <= grid_value + 1e-9 * scale {
            best = Some((run.x, run.value));
        } else {
            return Err(Error::InnerMinimization(format!(
                "{converged} of 27·3 starts converged; best multistart {:?}, grid {grid_value:e}, polished {:e}",
                best.map(|b| b.1),
                run.value
            )));
        }
    }
    let (x, value) = best.expect("set above");
    Ok(InnerReport {
        skew: AxialSkew::from_params(&x).canonical(),
        value,
        grid_value: Some(grid_value),
        evaluations: evals,
    })
}

/// Brent's method on `[a, b]`; returns `(x, f(x), evaluations)`.
pub fn brent(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_iter: usize) -> Option<(f64, f64, usize)> {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (a, b);
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut evals = 1;
    let abs_tol = (1e-3 * tol * (b - a).abs()).max(f64::MIN_POSITIVE);
    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = tol * x.abs() + abs_tol;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            return Some((x, fx, evals));
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        evals += 1;
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    None
}

pub struct BfgsRun {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Dense BFGS with Armijo backtracking; converged when
/// `|∇f| ≤ 1e−10·(1 + |f|)` or the step stalls at a stationary point.
pub fn bfgs(f: &impl Fn(&[f64]) -> f64, grad: &impl Fn(&[f64]) -> Vec<f64>, x0: &[f64], max_iter: usize) -> BfgsRun {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut g = grad(&x);
    let mut h = nalgebra::DMatrix::<f64>::identity(n, n);
    let mut evals = 1;
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    for _ in 0..max_iter {
        if norm(&g) <= 1e-10 * (1.0 + fx.abs()) {
            return BfgsRun {
                x,
                value: fx,
                converged: true,
                evaluations: evals,
            };
        }
        let gv = nalgebra::DVector::from_column_slice(&g);
        let mut dir = -(&h * &gv);
        let mut slope = dir.dot(&gv);
        if slope >= 0.0 {
            h = nalgebra::DMatrix::identity(n, n);
            dir = -gv.clone();
            slope = dir.dot(&gv);
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(dir.iter()).map(|(a, d)| a + t * d).collect();
            let ft = f(&trial);
            evals += 1;
            if ft <= fx + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            // no decrease possible at round-off level
            let stationary = norm(&g) <= 1e-7 * (1.0 + fx.abs());
            return BfgsRun {
                x,
                value: fx,
                converged: stationary,
                evaluations: evals,
            };
        };
        let gn = grad(&xn);
        let s = nalgebra::DVector::from_iterator(n, xn.iter().zip(&x).map(|(a, b)| a - b));
        let y = nalgebra::DVector::from_iterator(n, gn.iter().zip(&g).map(|(a, b)| a - b));
        let sy = s.dot(&y);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let i = nalgebra::DMatrix::<f64>::identity(n, n);
            let left = &i - &s * y.transpose() * rho;
            let right = &i - &y * s.transpose() * rho;
            h = &left * &h * &right + &s * s.transpose() * rho;
        }
        x = xn;
        fx = fnew;
        g = gn;
    }
    let converged = norm(&g) <= 1e-10 * (1.0 + fx.abs());
    BfgsRun {
        x,
        value: fx,
        converged,
        evaluations: evals,
    }
}

/// Grid search on `[−r, r]³` with `points` per axis, re-centred and shrunk
/// around the best node for `levels − 1` further passes.
pub fn grid_minimize3(f: &impl Fn(&[f64]) -> f64, r: f64, points: usize, levels: usize) -> (Vec<f64>, f64, usize) {
    let mut center = [0.0; 3];
    let mut half = r;
    let mut best = (vec![0.0; 3], f(&[0.0; 3]));
    let mut evals = 1;
    for _ in 0..levels {
        let step = 2.0 * half / (points - 1) as f64;
        for i in 0..points {
            for j in 0..points {
                for k in 0..points {
                    let p = [
                        center[0] - half + step * i as f64,
                        center[1] - half + step * j as f64,
                        center[2] - half + step * k as f64,
                    ];
                    let v = f(&p);
                    evals += 1;
                    if v < best.1 {
                        best = (p.to_vec(), v);
                    }
                }
            }
        }
        center = [best.0[0], best.0[1], best.0[2]];
        half = 2.0 * step;
    }
    (best.0, best.1, evals)
}
