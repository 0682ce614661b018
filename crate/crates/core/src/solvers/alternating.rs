use super::linear::solve_linear_elasticity;
use super::{SolveReport, SolveStatus};
use crate::algebra::{PlanarSkew, SkewParam};
use crate::constitutive::Material;
use crate::error::Result;
use crate::fem::DisplacementField;
use crate::functionals::{eval_f, EnergyBreakdown};
use crate::loads::{classify_compatibility, Compatibility, LoadSystem};
use crate::mesh::Mesh;

const MAX_ROUNDS: usize = 500;
const STOP_TOL: f64 = 1e-12;

/// Alternating minimization of `F`: a linear solve with pre-strain `½W²`,
/// then the inner minimization over `W` at the new field.
///
/// Violated loads are not iterated: the report is `Diverged` with the
/// witness `½W²x` along which `F` decreases linearly.
pub fn minimize_f(
    mesh: &Mesh,
    m: &Material,
    ls: &LoadSystem,
    init: &DisplacementField,
) -> Result<(SolveReport, EnergyBreakdown<PlanarSkew>)> {
    let cls = classify_compatibility(ls, mesh)?;
    let mut current = eval_f(mesh, m, ls, init)?;
    if let Compatibility::Violated { witness, .. } = cls {
        let report = SolveReport {
            field: init.clone(),
            value: f64::NEG_INFINITY,
            iterations: 0,
            residual: f64::NAN,
            status: SolveStatus::Diverged {
                witness: DisplacementField::linear(witness.square() * 0.5),
            },
        };
        return Ok((report, current));
    }
    let mut field = init.clone();
    let mut last_decrease = f64::INFINITY;
    for round in 1..=MAX_ROUNDS {
        let g = current.w_opt.square() * 0.5;
        let step = solve_linear_elasticity(mesh, m, ls, Some(&g))?;
        let next = eval_f(mesh, m, ls, &step.field)?;
        let decrease = current.total - next.total;
        let scale = 1.0 + current.total.abs();
        if next.total <= current.total || round == 1 {
            field = step.field;
            current = next;
        }
        last_decrease = decrease;
        if decrease < STOP_TOL * scale {
            return Ok((
                SolveReport {
                    field,
                    value: current.total,
                    iterations: round,
                    residual: decrease.max(0.0),
                    status: SolveStatus::Converged,
                },
                current,
            ));
        }
    }
    Ok((
        SolveReport {
            field,
            value: current.total,
            iterations: MAX_ROUNDS,
            residual: last_decrease,
            status: SolveStatus::MaxIter,
        },
        current,
    ))
}
