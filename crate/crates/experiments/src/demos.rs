//! The demo catalog. Each demo records its claims with tolerances into a
//! [`Report`]; a failed claim makes the run fail.

use traction_core::algebra::{AxialSkew, Mat2, PlanarSkew, SkewParam, Vec2};
use traction_core::constitutive::v0_quadratic;
use traction_core::fem::{gradient_field, l2_norm_elementwise, AffineField, BoxDomain3, DisplacementField};
use traction_core::functionals::{
    energy_scale, eval_e, eval_f, eval_f_affine3, eval_f_closed_form, eval_f_on_cells, eval_fh, trace_integral,
};
use traction_core::loads::{
    check_equilibrated, classify_compatibility, eval_load_work, inf_f_status, resultant_matrix, BoxLoad3, Compatibility,
    InfStatus,
};
use traction_core::solvers::{
    compression_verdict, gamma_sweep, minimize_f, minimize_fh, solve_linear_elasticity, FhOptions, SolveStatus,
    SweepReport,
};

use crate::config::{BodySpec, DemoKind, Scenario, TractionSpec};
use crate::error::{ExperimentError, Result};
use crate::report::Report;

/// `min_a V0(A − ½W(a)²)` for the midpoint `A = −½(e₁⊗e₁ + e₃⊗e₃) − e₂⊗e₂`
/// with `μ = λ = 1` on the unit cube, from an independent grid + BFGS
/// search; the minimizers form the circle `a ∈ span{e₁, e₃}`, `|a|² = 7/4`.
pub const NONCONVEX_MIDPOINT: f64 = 1.75;

pub fn run_scenario(s: &Scenario) -> Result<Report> {
    s.validate()?;
    let mut r = Report::new(s);
    match s.demo {
        DemoKind::Gap => gap(s, &mut r)?,
        DemoKind::Tension => tension(s, &mut r)?,
        DemoKind::WeakCompat => weak_compat(s, &mut r)?,
        DemoKind::Compression => compression(s, &mut r)?,
        DemoKind::Noncompact => noncompact(s, &mut r)?,
        DemoKind::Nonconvexity3d => nonconvexity(s, &mut r)?,
        DemoKind::GammaSweep => sweep_only(s, &mut r)?,
        DemoKind::Nonlocality => nonlocality(s, &mut r)?,
    }
    r.verdict("result", if r.passed() { "pass" } else { "fail" });
    Ok(r)
}

/// The 3D nonconvexity witness with its default scenario.
pub fn demo_nonconvexity() -> Result<Report> {
    run_scenario(&Scenario::preset(DemoKind::Nonconvexity3d))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn gap(s: &Scenario, r: &mut Report) -> Result<()> {
    let tol = s.tolerances.identity;
    let (mesh, m, ls) = (s.mesh()?, s.material()?, s.loads());
    let half = s.gap_w2 / 2.0;
    let v = DisplacementField::linear(-Mat2::identity() * half);
    let t = resultant_matrix(&ls, &mesh)?;
    let area = mesh.area();
    // E(v) = |Ω|V0(−sI) − L(−sx) with L(Mx) = ⟨M, T⟩
    let elastic = area * v0_quadratic(&m, &(-Mat2::identity() * half))?;
    let expected_e = elastic + half * t.t.trace();
    let work = eval_load_work(&ls, &mesh, &v)?;
    let e = eval_e(&mesh, &m, &ls, &v)?;
    let f_inner = eval_f(&mesh, &m, &ls, &v)?;
    let f_closed = eval_f_closed_form(&mesh, &m, &ls, &v)?;
    let scale = 1.0 + e.abs();
    r.info(None, "load_work", work);
    r.check(None, "E", e, tol, (e - expected_e).abs() <= tol * scale);
    r.check(None, "F_inner_minus_neg_L", f_inner.total + work, tol, (f_inner.total + work).abs() <= tol * scale);
    r.check(None, "F_closed_minus_neg_L", f_closed.total + work, tol, (f_closed.total + work).abs() <= tol * scale);
    r.check(None, "F", f_closed.total, tol, (f_closed.total + work).abs() <= tol * scale);
    let g = e - f_closed.total;
    r.check(None, "gap_E_minus_F", g, tol, (g - elastic).abs() <= tol * scale);
    if half > 0.0 {
        r.check(None, "F_strictly_below_E", g, 0.0, g > 0.0);
    }
    r.check(None, "w_opt_sq", f_inner.w_opt.w.powi(2), 1e-6, (f_inner.w_opt.w.powi(2) - s.gap_w2).abs() <= 1e-6 * (1.0 + s.gap_w2));
    r.verdict("gap", "F(v) = -L(v) < E(v)");
    Ok(())
}

fn tension(s: &Scenario, r: &mut Report) -> Result<()> {
    let tol = s.tolerances;
    let (mesh, m, ls) = (s.mesh()?, s.material()?, s.loads());
    let cls = classify_compatibility(&ls, &mesh)?;
    r.verdict("compatibility", cls.label());
    let v0 = solve_linear_elasticity(&mesh, &m, &ls, None)?;
    r.check(None, "linear_residual", v0.residual, traction_core::solvers::LINEAR_TOL, v0.status == SolveStatus::Converged);
    let (report, parts) = minimize_f(&mesh, &m, &ls, &DisplacementField::zeros(&mesh))?;
    r.info(None, "min_E", v0.value);
    r.info(None, "min_F", report.value);
    r.info(None, "alternating_rounds", report.iterations as f64);
    let gap = rel(report.value, v0.value);
    let ok = report.status == SolveStatus::Converged && gap <= tol.min_coincidence;
    r.check(None, "min_F_vs_min_E", gap, tol.min_coincidence, ok);
    r.check(None, "w_opt", parts.w_opt.w, tol.zero, parts.w_opt.w.abs() <= tol.zero);
    if ok {
        r.verdict("min_coincidence", "min F = min E");
    } else {
        r.verdict("min_coincidence", "mismatch");
    }
    if let (TractionSpec::Normal { coefficient }, BodySpec::Zero) = (s.traction, s.body) {
        // homogeneous solution: DV0(eI) = f₀I
        let e = coefficient / (8.0 * m.mu + 8.0 * m.lambda);
        let expected = -coefficient * coefficient * mesh.area() / (8.0 * m.mu + 8.0 * m.lambda);
        r.check(None, "min_E_vs_homogeneous", rel(v0.value, expected), tol.identity, rel(v0.value, expected) <= tol.identity);
        let err = v0
            .field
            .nodal(&mesh)?
            .iter()
            .zip(mesh.nodes())
            .fold(0.0_f64, |a, (u, x)| a.max((u - x * e).norm()));
        r.check(None, "nodal_error_vs_homogeneous", err, tol.closed_form, err <= tol.closed_form);
    }
    if !s.h_list.is_empty() {
        let sweep = gamma_sweep(&mesh, &m, &ls, &s.h_list, s.seed, &FhOptions::default())?;
        sweep_records(s, r, &sweep);
    }
    Ok(())
}

fn sweep_only(s: &Scenario, r: &mut Report) -> Result<()> {
    let (mesh, m, ls) = (s.mesh()?, s.material()?, s.loads());
    let cls = classify_compatibility(&ls, &mesh)?;
    r.verdict("compatibility", cls.label());
    let sweep = gamma_sweep(&mesh, &m, &ls, &s.h_list, s.seed, &FhOptions::default())?;
    sweep_records(s, r, &sweep);
    Ok(())
}

pub(crate) fn sweep_records(s: &Scenario, r: &mut Report, sweep: &SweepReport) {
    let tol = s.tolerances;
    r.info(None, "min_E", sweep.min_e);
    for st in &sweep.steps {
        let h = Some(st.h);
        r.info(h, "F_h", st.energy);
        r.info(h, "F_h_rigid_free", st.energy_rigid_free);
        r.info(h, "energy_gap", st.energy_gap);
        r.info(h, "sqrt_h_gradient", st.sqrt_h_gradient);
        r.info(h, "strain_error_l2", st.strain_error);
        r.info(h, "gradient_error_l1", st.gradient_l1_error);
        r.info(h, "iterations", st.iterations as f64);
        r.check(h, "solver_converged", st.residual, sweep.gradient_tolerance, st.status == "converged");
    }
    if sweep.load_norm_sq == 0.0 {
        let all_zero = sweep
            .steps
            .iter()
            .all(|st| st.energy == 0.0 && st.energy_gap == 0.0 && st.sqrt_h_gradient == 0.0 && st.strain_error == 0.0);
        r.check(None, "zero_load_diagnostics", 0.0, 0.0, all_zero);
        r.verdict("sweep", "trivial");
        return;
    }
    let mut ok = true;
    for w in sweep.steps.windows(2) {
        let ratio = w[1].energy_gap / w[0].energy_gap;
        ok &= r.check(Some(w[1].h), "energy_gap_ratio", ratio, 1.0, ratio < 1.0);
        let decades = (w[0].h / w[1].h).log10();
        let per_decade = (w[1].sqrt_h_gradient / w[0].sqrt_h_gradient).powf(1.0 / decades);
        ok &= r.check(Some(w[1].h), "sqrt_h_gradient_ratio", per_decade, tol.sweep_ratio, per_decade <= tol.sweep_ratio);
    }
    if let Some(last) = sweep.steps.last() {
        let rel_err = last.energy_gap / sweep.min_e.abs();
        ok &= r.check(Some(last.h), "final_relative_gap", rel_err, tol.sweep_final, rel_err <= tol.sweep_final);
    }
    let guard = 10.0 * sweep.options.k_guard;
    r.check(None, "k_obs", sweep.k_obs, guard, sweep.k_obs <= guard);
    r.verdict("sweep", if ok { "converging" } else { "not converging" });
}

fn weak_compat(s: &Scenario, r: &mut Report) -> Result<()> {
    let tol = s.tolerances;
    let (mesh, m, ls) = (s.mesh()?, s.material()?, s.loads());
    let cls = classify_compatibility(&ls, &mesh)?;
    r.verdict("compatibility", cls.label());
    let t = resultant_matrix(&ls, &mesh)?.t;
    let band = traction_core::loads::WEAK_BAND * t.norm();
    r.check(None, "trace_T", t.trace(), band, matches!(cls, Compatibility::WeaklyCompatible { .. }));
    let v0 = solve_linear_elasticity(&mesh, &m, &ls, None)?;
    r.info(None, "min_E", v0.value);
    r.info(None, "trace_integral_v0", trace_integral(&mesh, &m, &v0.field)?);
    let dilation = DisplacementField::linear(Mat2::identity());
    for t in [0.0, 1.0, 5.0] {
        let v = v0.field.combine(1.0, &dilation, -t, &mesh)?;
        let f = eval_f(&mesh, &m, &ls, &v)?.total;
        let scale = energy_scale(&mesh, &m, &ls, &v)?;
        let dev = (f - v0.value).abs() / scale;
        r.check(Some(t), "F_along_family_minus_min_E", dev, tol.weak_flatness, dev <= tol.weak_flatness);
        r.info(Some(t), "E_along_family", eval_e(&mesh, &m, &ls, &v)?);
    }
    let (report, _) = minimize_f(&mesh, &m, &ls, &DisplacementField::zeros(&mesh))?;
    let gap = (report.value - v0.value).abs() / (1.0 + v0.value.abs());
    r.check(None, "min_F_vs_min_E", gap, tol.min_coincidence, gap <= tol.min_coincidence);
    r.verdict("argmin", "nonunique: v0 - t x for t >= 0");
    Ok(())
}

fn compression(s: &Scenario, r: &mut Report) -> Result<()> {
    let tol = s.tolerances;
    let (mesh, m, ls) = (s.mesh()?, s.material()?, s.loads());
    let f0 = match s.traction {
        TractionSpec::Normal { coefficient } => coefficient,
        TractionSpec::Zero => 0.0,
    };
    r.check(None, "traction_coefficient", f0, 0.0, f0 < 0.0);
    let cls = classify_compatibility(&ls, &mesh)?;
    r.verdict("compatibility", cls.label());
    r.check(None, "classified_violated", 0.0, 0.0, matches!(cls, Compatibility::Violated { .. }));
    let v0 = solve_linear_elasticity(&mesh, &m, &ls, None)?;
    match inf_f_status(&cls, v0.value) {
        InfStatus::MinusInfinity { slope, .. } => {
            r.info(None, "inf_F_slope", slope);
            r.verdict("inf_F", "MinusInfinity");
        }
        InfStatus::Finite(v) => {
            r.check(None, "inf_F", v, 0.0, false);
            r.verdict("inf_F", "Finite");
        }
    }
    let w = PlanarSkew::new(1.0);
    let step = w.square() * 0.5 + w.to_matrix() * (3.0_f64.sqrt() / 2.0);
    let opts = FhOptions::default();
    let mut minimized = Vec::new();
    for &h in &s.h_list {
        let v = DisplacementField::linear(step / h);
        let e = eval_fh(&mesh, &m, &ls, h, &v)?.value().ok_or(traction_core::Error::InfiniteEnergy)?;
        let expected = -(f0 / (2.0 * h)) * w.square().trace() * mesh.area();
        let work = eval_load_work(&ls, &mesh, &v)?;
        r.check(Some(h), "F_h_sequence_rel_err", rel(e, expected), tol.identity, rel(e, expected) <= tol.identity);
        let elastic = e + work;
        r.check(Some(h), "elastic_term", elastic, tol.closed_form, elastic.abs() <= tol.closed_form);
        r.info(Some(h), "F_h_sequence", e);
        let run = minimize_fh(&mesh, &m, &ls, h, &v, &opts)?;
        r.info(Some(h), "F_h_minimized", run.value);
        r.check(Some(h), "minimized_below_sequence", run.value - e, 0.0, run.value <= e);
        minimized.push(run.value);
    }
    let verdict = compression_verdict(&s.h_list, &minimized, ls.norm_sq(&mesh), &opts);
    r.info(None, "max_h_times_F_h", verdict.max_scaled_energy);
    r.check(None, "divergence_policy", verdict.max_scaled_energy, -verdict.delta, verdict.diverged);
    r.verdict("sweep", if verdict.diverged { "Diverged" } else { "bounded" });
    Ok(())
}

fn noncompact(s: &Scenario, r: &mut Report) -> Result<()> {
    let tol = s.tolerances;
    let (mesh, m, ls) = (s.mesh()?, s.material()?, s.loads());
    if ls.norm_sq(&mesh) != 0.0 {
        return Err(ExperimentError::Scenario("the noncompact demo needs the zero load".into()));
    }
    let alpha = s.noncompact_alpha;
    let w = PlanarSkew::new(1.0).to_matrix();
    let mut last = 0.0;
    for &h in &s.h_list {
        let z = DisplacementField::linear(w * h.powf(-alpha));
        let e = eval_fh(&mesh, &m, &ls, h, &z)?.value().ok_or(traction_core::Error::InfiniteEnergy)?;
        // (I + h^{1−α}W)ᵀ(I + h^{1−α}W) − I = h^{2−2α} I
        let expected = h.powf(2.0 - 4.0 * alpha) * (2.0 * m.mu + 2.0 * m.lambda) * mesh.area();
        r.info(Some(h), "F_h", e);
        r.check(Some(h), "F_h_rel_err", rel(e, expected), tol.closed_form, rel(e, expected) <= tol.closed_form);
        let grad = l2_norm_elementwise(&mesh, &gradient_field(&mesh, &z)?);
        let expected_grad = h.powf(-alpha) * (2.0 * mesh.area()).sqrt();
        r.info(Some(h), "gradient_l2", grad);
        r.check(Some(h), "gradient_rel_err", rel(grad, expected_grad), tol.closed_form, rel(grad, expected_grad) <= tol.closed_form);
        if last > 0.0 {
            r.check(Some(h), "gradient_growth", grad / last, 1.0, grad > last);
        }
        last = grad;
    }
    r.verdict("compactness", "F_h -> 0 while gradients diverge");
    Ok(())
}

fn nonconvexity(s: &Scenario, r: &mut Report) -> Result<()> {
    let tol = s.tolerances;
    let m = s.material()?;
    let domain = BoxDomain3::unit_cube();
    let load = BoxLoad3::zero();
    let w1 = AxialSkew::new(0.0, 0.0, -1.0);
    let w2 = AxialSkew::new(-1.0, 0.0, 0.0);
    let mut ends = Vec::new();
    for (name, w) in [("v1", w1), ("v2", w2)] {
        let v = AffineField::linear(w.square());
        let (f, inner) = eval_f_affine3(&domain, &m, &load, &v)?;
        r.check(None, &format!("F_{name}"), f.total, tol.zero, f.total.abs() <= tol.zero);
        // the optimal ½W² reproduces Wᵢ²
        let dev = (inner.skew.square() * 0.5 - w.square()).norm();
        r.check(None, &format!("half_w_opt_sq_minus_{name}_strain"), dev, 1e-6, dev <= 1e-6);
        ends.push(f.total);
    }
    let mid = AffineField::linear((w1.square() + w2.square()) * 0.5);
    r.info(None, "midpoint_strain_22", mid.m[(1, 1)]);
    let (f, inner) = eval_f_affine3(&domain, &m, &load, &mid)?;
    let chord = 0.5 * (ends[0] + ends[1]);
    r.check(None, "F_midpoint_minus_chord", f.total - chord, 0.0, f.total > chord);
    let grid = inner.grid_value.unwrap_or(f64::NAN);
    let agree = rel(grid, f.elastic);
    r.check(None, "grid_vs_multistart", agree, tol.oracle_agreement, agree <= tol.oracle_agreement);
    r.info(None, "w_opt_norm_sq", inner.skew.param_norm_sq());
    if m.mu == 1.0 && m.lambda == 1.0 {
        let dev = rel(f.total, NONCONVEX_MIDPOINT);
        r.check(None, "F_midpoint", f.total, tol.identity, dev <= tol.identity);
        // a second minimizer on the same circle gives a different W²
        let other = AxialSkew::new(0.0, 0.0, (7.0_f64 / 4.0).sqrt());
        let g = mid.strain() - other.square() * 0.5;
        let alt = v0_quadratic(&m, &g)?;
        r.check(None, "second_minimizer_value", alt, tol.identity, rel(alt, NONCONVEX_MIDPOINT) <= tol.identity);
    } else {
        r.info(None, "F_midpoint", f.total);
    }
    r.verdict("convexity", if f.total > chord { "nonconvex" } else { "no witness" });
    Ok(())
}

fn nonlocality(s: &Scenario, r: &mut Report) -> Result<()> {
    let (mesh, m, ls) = (s.mesh()?, s.material()?, s.loads());
    if ls.norm_sq(&mesh) != 0.0 {
        return Err(ExperimentError::Scenario("the nonlocality demo needs the zero load".into()));
    }
    let left = |k: usize| mesh.centroid(k)[0] < 0.0;
    let split = |v: &DisplacementField| -> Result<(f64, f64)> {
        let whole = eval_f_on_cells(&mesh, &m, v, |_| true)?;
        let parts = eval_f_on_cells(&mesh, &m, v, left)? + eval_f_on_cells(&mesh, &m, v, |k| !left(k))?;
        Ok((whole, parts))
    };
    let v = DisplacementField::Nodal(mesh.nodes().iter().map(|x| Vec2::new(0.5 * x[0] * x[0], 0.0)).collect());
    let (whole, parts) = split(&v)?;
    r.info(None, "F_whole", whole);
    r.info(None, "F_left_plus_right", parts);
    r.check(None, "superadditivity_margin", whole - parts, s.tolerances.zero, whole - parts > s.tolerances.zero);
    // uniform compression splits additively: the trace integral has one sign
    let (w2, p2) = split(&DisplacementField::linear(-Mat2::identity()))?;
    r.info(None, "uniform_compression_split_defect", w2 - p2);
    r.verdict("locality", if whole > parts { "nonlocal" } else { "no witness" });
    Ok(())
}

/// Equilibrium, compatibility class and `inf F` status of a scenario load.
pub fn check_loads(s: &Scenario) -> Result<Report> {
    s.validate()?;
    let mut r = Report::new(s);
    if s.demo == DemoKind::Nonconvexity3d {
        let domain = BoxDomain3::unit_cube();
        let cls = BoxLoad3::zero().classify(&domain)?;
        r.verdict("compatibility", cls.label());
        return Ok(r);
    }
    let (mesh, m, ls) = (s.mesh()?, s.material()?, s.loads());
    let eq = check_equilibrated(&ls, &mesh)?;
    r.check(None, "force_residual", eq.force_residual.norm(), eq.tolerance, eq.force_residual.norm() <= eq.tolerance);
    r.check(None, "moment_residual", eq.moment_residual.abs(), eq.tolerance, eq.moment_residual.abs() <= eq.tolerance);
    if !eq.equilibrated {
        r.verdict("equilibrium", "not equilibrated");
        return Ok(r);
    }
    r.verdict("equilibrium", "equilibrated");
    let t = resultant_matrix(&ls, &mesh)?;
    r.info(None, "trace_T", t.t.trace());
    let cls = classify_compatibility(&ls, &mesh)?;
    r.verdict("compatibility", cls.label());
    let v0 = solve_linear_elasticity(&mesh, &m, &ls, None)?;
    r.info(None, "min_E", v0.value);
    r.verdict(
        "inf_F",
        match inf_f_status(&cls, v0.value) {
            InfStatus::Finite(_) => "Finite",
            InfStatus::MinusInfinity { .. } => "MinusInfinity",
        },
    );
    Ok(r)
}
