use super::sparse::CsrMatrix;
use super::{SolveReport, SolveStatus};
use crate::algebra::{is_symmetric, Mat2, Vec2};
use crate::constitutive::{v0_stress, Material};
use crate::error::{Error, Result};
use crate::fem::{integrate_strain_energy, strain_field, DisplacementField};
use crate::loads::{check_equilibrated, eval_load_work, LoadSystem};
use crate::mesh::Mesh;
use crate::rigid::remove_rigid;

/// Relative stationarity tolerance of the linear solve.
pub const LINEAR_TOL: f64 = 1e-10;

/// `K_ij = ∫DV0(E(φ_i))·E(φ_j)` over the vector P1 basis, dof `2·node + component`.
pub fn assemble_stiffness(mesh: &Mesh, m: &Material) -> CsrMatrix {
    let mut triplets = Vec::with_capacity(36 * mesh.triangles().len());
    for (t, el) in mesh.triangles().iter().zip(mesh.elements()) {
        let mut strains = [Mat2::zeros(); 6];
        for a in 0..3 {
            for c in 0..2 {
                let mut e = Vec2::zeros();
                e[c] = 1.0;
                let g = e * el.grads[a].transpose();
                strains[2 * a + c] = (g + g.transpose()) * 0.5;
            }
        }
        for p in 0..6 {
            let s = v0_stress(m, &strains[p]) * el.area;
            for q in 0..6 {
                triplets.push((2 * t[p / 2] + p % 2, 2 * t[q / 2] + q % 2, s.dot(&strains[q])));
            }
        }
    }
    CsrMatrix::from_triplets(2 * mesh.node_count(), triplets)
}

/// Euclidean orthonormal basis of the nodal rigid vectors.
fn rigid_vectors(mesh: &Mesh) -> Vec<Vec<f64>> {
    let raw: [Vec<f64>; 3] = [
        mesh.nodes().iter().flat_map(|_| [1.0, 0.0]).collect(),
        mesh.nodes().iter().flat_map(|_| [0.0, 1.0]).collect(),
        mesh.nodes().iter().flat_map(|x| [-x[1], x[0]]).collect(),
    ];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in raw {
        for b in &basis {
            let d = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let n = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        basis.push(v);
    }
    basis
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn deflate(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let d = dot(v, b);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
    }
}

/// Jacobi-preconditioned CG restricted to the complement of the rigid vectors.
pub(crate) fn deflated_cg(k: &CsrMatrix, rhs: &[f64], basis: &[Vec<f64>], tol: f64) -> Result<(Vec<f64>, usize, f64)> {
    let n = k.dim();
    let diag = k.diagonal();
    let mut b = rhs.to_vec();
    deflate(&mut b, basis);
    let target = tol * dot(&b, &b).sqrt();
    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let precondition = |r: &[f64]| {
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
        deflate(&mut z, basis);
        z
    };
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let max_iter = 10 * n + 100;
    for it in 0..max_iter {
        let rn = dot(&r, &r).sqrt();
        if rn <= target {
            return Ok((x, it, rn));
        }
        let mut kp = k.mul_vec(&p);
        deflate(&mut kp, basis);
        let pkp = dot(&p, &kp);
        if !(pkp > 0.0) {
            return Err(Error::SolverBreakdown(format!("nonpositive curvature {pkp:e} at iteration {it}")));
        }
        let a = rz / pkp;
        x.iter_mut().zip(&p).for_each(|(x, p)| *x += a * p);
        r.iter_mut().zip(&kp).for_each(|(r, q)| *r -= a * q);
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
    }
    let rn = dot(&r, &r).sqrt();
    Ok((x, max_iter, rn))
}

/// Minimizes `∫V0(E(v) − G) − L(v)` over P1 fields and returns the
/// representative with `Pv = 0`.
pub fn solve_linear_elasticity(mesh: &Mesh, m: &Material, ls: &LoadSystem, prestrain: Option<&Mat2>) -> Result<SolveReport> {
    let g = prestrain.copied().unwrap_or_else(Mat2::zeros);
    if !is_symmetric(&g, 1e-12) {
        return Err(Error::NotSymmetric);
    }
    let eq = check_equilibrated(ls, mesh)?;
    if !eq.equilibrated {
        return Err(Error::NotEquilibrated {
            force: eq.force_residual.norm(),
            moment: eq.moment_residual.abs(),
        });
    }
    if !mesh.is_normalized() {
        return Err(Error::NotNormalized);
    }
    let k = assemble_stiffness(mesh, m);
    let load = ls.load_vector(mesh)?;
    let mut rhs: Vec<f64> = load.iter().flat_map(|b| [b[0], b[1]]).collect();
    let sg = v0_stress(m, &g);
    for (t, el) in mesh.triangles().iter().zip(mesh.elements()) {
        for j in 0..3 {
            let f = sg * el.grads[j] * el.area;
            rhs[2 * t[j]] += f[0];
            rhs[2 * t[j] + 1] += f[1];
        }
    }
    let basis = rigid_vectors(mesh);
    let (x, iterations, _) = deflated_cg(&k, &rhs, &basis, LINEAR_TOL)?;
    let field = remove_rigid(mesh, &DisplacementField::from_flat(&x))?;
    let flat = field.to_flat(mesh)?;
    let mut res: Vec<f64> = k.mul_vec(&flat).iter().zip(&rhs).map(|(a, b)| a - b).collect();
    deflate(&mut res, &basis);
    let residual = dot(&res, &res).sqrt();
    let mut rhs_d = rhs.clone();
    deflate(&mut rhs_d, &basis);
    let scale = dot(&rhs_d, &rhs_d).sqrt();
    let strains = strain_field(mesh, &field)?;
    let value = integrate_strain_energy(mesh, m, &strains, &g) - eval_load_work(ls, mesh, &field)?;
    // rigid removal perturbs the residual at round-off level only
    let status = if residual <= LINEAR_TOL * scale * 10.0 || scale == 0.0 {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIter
    };
    Ok(SolveReport {
        field,
        value,
        iterations,
        residual,
        status,
    })
}
