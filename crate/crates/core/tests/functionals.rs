use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use traction_core::algebra::{Mat2, PlanarSkew, SkewParam, Vec2};
use traction_core::constitutive::Material;
use traction_core::fem::{l2_inner, DisplacementField};
use traction_core::functionals::{
    energy_scale, eval_e, eval_f, eval_f_closed_form, eval_f_eps, eval_f_on_cells, eval_fh, first_variation_f,
    grad_fh, trace_integral,
};
use traction_core::loads::LoadSystem;
use traction_core::mesh::{generate_mesh, Mesh, MeshKind};

fn setup() -> (Mesh, Material, LoadSystem) {
    (
        generate_mesh(MeshKind::UnitSquare, 8).unwrap(),
        Material::new(1.0, 1.0).unwrap(),
        LoadSystem::normal(1.0),
    )
}

fn random_field(mesh: &Mesh, rng: &mut ChaCha8Rng) -> DisplacementField {
    let a = Mat2::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let noise = rng.random_range(0.0..0.5);
    DisplacementField::Nodal(
        mesh.nodes()
            .iter()
            .map(|x| a * x + Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * noise)
            .collect(),
    )
}

#[test]
fn f_below_e_and_closed_form_agrees() {
    let (mesh, m, ls) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut active = 0;
    for _ in 0..100 {
        let v = random_field(&mesh, &mut rng);
        let inner = eval_f(&mesh, &m, &ls, &v).unwrap();
        let closed = eval_f_closed_form(&mesh, &m, &ls, &v).unwrap();
        let e = eval_e(&mesh, &m, &ls, &v).unwrap();
        let scale = energy_scale(&mesh, &m, &ls, &v).unwrap();
        assert!(inner.total <= e + 1e-12);
        assert!((inner.total - closed.total).abs() <= 1e-10 * scale);
        assert!(closed.correction <= 0.0);
        if closed.correction < 0.0 {
            active += 1;
        }
    }
    assert!(active > 20 && active < 80, "sample should exercise both branches: {active}");
}

#[test]
fn midpoint_convexity() {
    let (mesh, m, ls) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let (v1, v2) = (random_field(&mesh, &mut rng), random_field(&mesh, &mut rng));
        let mid = v1.combine(0.5, &v2, 0.5, &mesh).unwrap();
        let f = |v: &DisplacementField| eval_f_closed_form(&mesh, &m, &ls, v).unwrap().total;
        let scale = energy_scale(&mesh, &m, &ls, &v1).unwrap() + energy_scale(&mesh, &m, &ls, &v2).unwrap();
        assert!(f(&mid) <= 0.5 * (f(&v1) + f(&v2)) + 1e-9 * scale);
    }
}

#[test]
fn smoothed_family_bounds() {
    let (mesh, m, ls) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let v = random_field(&mesh, &mut rng);
        let f = eval_f_closed_form(&mesh, &m, &ls, &v).unwrap().total;
        let scale = energy_scale(&mesh, &m, &ls, &v).unwrap();
        let mut last = f64::NEG_INFINITY;
        for eps in [1.0, 0.1, 0.01] {
            let fe = eval_f_eps(eps, &mesh, &m, &ls, &v).unwrap();
            assert!(fe <= f + 1e-12 * scale);
            assert!(fe >= last - 1e-12 * scale);
            last = fe;
        }
        if trace_integral(&mesh, &m, &v).unwrap() <= -1.0 {
            assert!(f - last <= 1e-3 * scale);
        }
    }
}

#[test]
fn smoothed_second_variation_nonnegative() {
    let (mesh, m, ls) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let v = random_field(&mesh, &mut rng);
    for _ in 0..50 {
        let d = random_field(&mesh, &mut rng);
        let t = 1e-3;
        let at = |s: f64| eval_f_eps(0.1, &mesh, &m, &ls, &v.combine(1.0, &d, s, &mesh).unwrap()).unwrap();
        let second = (at(t) - 2.0 * at(0.0) + at(-t)) / (t * t);
        assert!(second >= -1e-8 * energy_scale(&mesh, &m, &ls, &v).unwrap());
    }
}

#[test]
fn rigid_invariance() {
    let (mesh, m, ls) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..20 {
        let v = random_field(&mesh, &mut rng);
        let r = DisplacementField::affine(PlanarSkew::new(rng.random_range(-2.0..2.0)).to_matrix(), Vec2::new(0.3, -1.2));
        let shifted = v.combine(1.0, &r, 1.0, &mesh).unwrap();
        let a = eval_f_closed_form(&mesh, &m, &ls, &v).unwrap().total;
        let b = eval_f_closed_form(&mesh, &m, &ls, &shifted).unwrap().total;
        assert!((a - b).abs() <= 1e-12 * energy_scale(&mesh, &m, &ls, &v).unwrap());
    }
}

#[test]
fn first_variation_matches_differences() {
    let (mesh, m, ls) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..20 {
        let v = random_field(&mesh, &mut rng);
        let phi = random_field(&mesh, &mut rng);
        let size = v.nodal(&mesh).unwrap().iter().fold(0.0_f64, |a, u| a.max(u.norm()));
        let t = 1e-5 * (1.0 + size);
        let f = |s: f64| eval_f_closed_form(&mesh, &m, &ls, &v.combine(1.0, &phi, s, &mesh).unwrap()).unwrap().total;
        let fd = (f(t) - f(-t)) / (2.0 * t);
        let exact = first_variation_f(&mesh, &m, &ls, &v, &phi).unwrap();
        assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{fd} vs {exact}");
    }
}

#[test]
fn fh_gradient_matches_differences() {
    let (mesh, m, ls) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for h in [1e-1, 1e-3] {
        for _ in 0..5 {
            let v = random_field(&mesh, &mut rng).combine(0.05, &DisplacementField::zeros(&mesh), 0.0, &mesh).unwrap();
            let phi = random_field(&mesh, &mut rng);
            let g = grad_fh(&mesh, &m, &ls, h, &v).unwrap();
            let exact: f64 = g
                .nodal(&mesh)
                .unwrap()
                .iter()
                .zip(phi.nodal(&mesh).unwrap())
                .map(|(a, b)| a.dot(&b))
                .sum();
            let t = 1e-5;
            let f = |s: f64| eval_fh(&mesh, &m, &ls, h, &v.combine(1.0, &phi, s, &mesh).unwrap()).unwrap().value().unwrap();
            let fd = (f(t) - f(-t)) / (2.0 * t);
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{fd} vs {exact}");
        }
    }
}

#[test]
fn fh_rigid_direction_is_flat_at_rest() {
    let (mesh, m, ls) = setup();
    let g = grad_fh(&mesh, &m, &ls, 0.1, &DisplacementField::zeros(&mesh)).unwrap();
    for r in traction_core::rigid::rigid_basis() {
        let dot: f64 = g.nodal(&mesh).unwrap().iter().zip(r.nodal(&mesh).unwrap()).map(|(a, b)| a.dot(&b)).sum();
        assert!(dot.abs() < 1e-14);
    }
    assert!(l2_inner(&mesh, &g, &g).unwrap() > 0.0);
}

#[test]
fn gap_on_pure_rotation_squares() {
    let (mesh, m, ls) = setup();
    for w in [0.5, 1.0, 2.0_f64.sqrt(), 3.0] {
        let v = DisplacementField::linear(PlanarSkew::new(w).square() * 0.5);
        let f = eval_f(&mesh, &m, &ls, &v).unwrap();
        let work = traction_core::loads::eval_load_work(&ls, &mesh, &v).unwrap();
        assert!((f.total + work).abs() <= 1e-10 * (1.0 + work.abs()));
        assert!(f.total < eval_e(&mesh, &m, &ls, &v).unwrap());
        assert!((f.w_opt.w - w).abs() <= 1e-6 * w);
    }
}

#[test]
fn split_square_is_superadditive() {
    let (mesh, m, _) = setup();
    let v = DisplacementField::Nodal(mesh.nodes().iter().map(|x| Vec2::new(0.5 * x[0] * x[0], 0.0)).collect());
    let left = |k: usize| mesh.centroid(k)[0] < 0.0;
    let whole = eval_f_on_cells(&mesh, &m, &v, |_| true).unwrap();
    let parts = eval_f_on_cells(&mesh, &m, &v, left).unwrap() + eval_f_on_cells(&mesh, &m, &v, |k| !left(k)).unwrap();
    assert!(whole > parts + 1e-3, "{whole} vs {parts}");
    assert!((whole - eval_e(&mesh, &m, &LoadSystem::zero(), &v).unwrap()).abs() < 1e-12);
}
