use traction_core::algebra::{Mat2, PlanarSkew, SkewParam};
use traction_core::constitutive::Material;
use traction_core::fem::DisplacementField;
use traction_core::functionals::{eval_f, eval_fh};
use traction_core::loads::LoadSystem;
use traction_core::mesh::{generate_mesh, Mesh, MeshKind};
use traction_core::rigid::project_rigid;
use traction_core::solvers::{
    compression_verdict, gamma_sweep, minimize_f, minimize_fh, solve_linear_elasticity, FhOptions, SolveStatus,
};

fn setup() -> (Mesh, Material) {
    (generate_mesh(MeshKind::UnitSquare, 8).unwrap(), Material::new(1.0, 1.0).unwrap())
}

#[test]
fn minimize_f_tension_matches_min_e() {
    let (mesh, m) = setup();
    let ls = LoadSystem::normal(1.0);
    // start far away, with a large active rotation
    let init = DisplacementField::linear(-Mat2::identity() * 3.0);
    let (report, parts) = minimize_f(&mesh, &m, &ls, &init).unwrap();
    assert_eq!(report.status, SolveStatus::Converged);
    assert!((report.value + 1.0 / 16.0).abs() <= 1e-8 / 16.0, "{}", report.value);
    assert_eq!(parts.w_opt.w, 0.0);
    let p = project_rigid(&mesh, &report.field).unwrap();
    assert!(p.m.norm() + p.b.norm() <= 1e-12);
}

#[test]
fn minimize_f_compression_diverges() {
    let (mesh, m) = setup();
    let (report, _) = minimize_f(&mesh, &m, &LoadSystem::normal(-1.0), &DisplacementField::zeros(&mesh)).unwrap();
    match report.status {
        SolveStatus::Diverged { witness } => {
            let w = PlanarSkew::new(1.0).square() * 0.5;
            assert_eq!(witness, DisplacementField::linear(w));
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn minimize_f_weak_load_keeps_rotation_family() {
    let (mesh, m) = setup();
    let ls = LoadSystem::linear_body(Mat2::new(1.0, 0.0, 0.0, -1.0));
    let (report, _) = minimize_f(&mesh, &m, &ls, &DisplacementField::zeros(&mesh)).unwrap();
    assert_eq!(report.status, SolveStatus::Converged);
    let v0 = solve_linear_elasticity(&mesh, &m, &ls, None).unwrap();
    assert!((report.value - v0.value).abs() <= 1e-9 * (1.0 + v0.value.abs()));
    for t in [0.0, 1.0, 5.0] {
        let v = v0.field.combine(1.0, &DisplacementField::linear(Mat2::identity()).to_nodal(&mesh).unwrap(), -t, &mesh).unwrap();
        let f = eval_f(&mesh, &m, &ls, &v).unwrap().total;
        assert!((f - v0.value).abs() <= 1e-9 * (1.0 + v0.value.abs()), "t = {t}: {f}");
    }
}

#[test]
fn minimize_fh_zero_load_stays_at_rest() {
    let (mesh, m) = setup();
    let r = minimize_fh(&mesh, &m, &LoadSystem::zero(), 0.1, &DisplacementField::zeros(&mesh), &FhOptions::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Converged);
    assert_eq!(r.value, 0.0);
    assert_eq!(r.iterations, 0);
}

#[test]
fn minimize_fh_tension_close_to_linear() {
    let (mesh, m) = setup();
    let ls = LoadSystem::normal(1.0);
    let v0 = solve_linear_elasticity(&mesh, &m, &ls, None).unwrap();
    let r = minimize_fh(&mesh, &m, &ls, 1e-3, &v0.field, &FhOptions::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Converged);
    assert!((r.value - v0.value).abs() <= 1e-2 * v0.value.abs());
}

#[test]
fn minimize_fh_rejects_inverted_start() {
    let (mesh, m) = setup();
    let v = DisplacementField::linear(Mat2::new(-20.0, 0.0, 0.0, 0.0));
    assert!(minimize_fh(&mesh, &m, &LoadSystem::zero(), 0.1, &v, &FhOptions::default()).is_err());
}

#[test]
fn tension_sweep_converges() {
    let (mesh, m) = setup();
    let ls = LoadSystem::normal(1.0);
    let hs = [1e-1, 1e-2, 1e-3, 1e-4];
    let report = gamma_sweep(&mesh, &m, &ls, &hs, 7, &FhOptions::default()).unwrap();
    for s in &report.steps {
        assert_eq!(s.status, "converged", "h = {}", s.h);
    }
    for w in report.steps.windows(2) {
        assert!(w[1].energy_gap < w[0].energy_gap);
        assert!(w[1].sqrt_h_gradient <= 0.5 * w[0].sqrt_h_gradient);
    }
    assert!(report.steps[3].energy_gap <= 1e-2 * report.min_e.abs());
    assert!(report.k_obs > 0.0 && report.k_obs < 1.0);
}

#[test]
fn zero_load_sweep_is_trivial() {
    let (mesh, m) = setup();
    let report = gamma_sweep(&mesh, &m, &LoadSystem::zero(), &[1e-1, 1e-2], 1, &FhOptions::default()).unwrap();
    for s in &report.steps {
        assert_eq!((s.energy, s.energy_gap, s.strain_error, s.sqrt_h_gradient, s.gradient_l1_error), (0.0, 0.0, 0.0, 0.0, 0.0));
    }
}

#[test]
fn sweep_rejects_weak_and_violated_loads() {
    let (mesh, m) = setup();
    for ls in [LoadSystem::normal(-1.0), LoadSystem::linear_body(Mat2::new(1.0, 0.0, 0.0, -1.0))] {
        assert!(gamma_sweep(&mesh, &m, &ls, &[1e-1], 0, &FhOptions::default()).is_err());
    }
}

#[test]
fn compression_sequence_flagged() {
    let (mesh, m) = setup();
    let ls = LoadSystem::normal(-1.0);
    let w = PlanarSkew::new(1.0);
    let hs = [0.5, 0.25, 0.125, 0.0625];
    let energies: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let g = (w.square() * 0.5 + w.to_matrix() * (3.0_f64.sqrt() / 2.0)) / h;
            let v = DisplacementField::linear(g);
            let e = eval_fh(&mesh, &m, &ls, h, &v).unwrap().value().unwrap();
            // −(f₀/2h)·Tr W²·|Ω| with f₀ = −1, Tr W² = −2
            assert!((e + 1.0 / h).abs() <= 1e-12 / h);
            let r = minimize_fh(&mesh, &m, &ls, h, &v, &FhOptions::default()).unwrap();
            assert!(r.value <= e);
            r.value
        })
        .collect();
    let verdict = compression_verdict(&hs, &energies, ls.norm_sq(&mesh), &FhOptions::default());
    assert!(verdict.diverged, "{verdict:?}");
}
