//! Flat `key = value` scenario files with dotted keys.
//!
//! ```text
//! # tension sweep on the unit square
//! demo = tension
//! domain.n = 8
//! material.mu = 1
//! material.lambda = 1
//! traction.kind = normal
//! traction.coefficient = 1
//! h_list = 1e-1, 1e-2, 1e-3, 1e-4
//! ```
//!
//! Unset keys take the defaults of the chosen demo.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use traction_core::algebra::Mat2;
use traction_core::constitutive::Material;
use traction_core::loads::LoadSystem;
use traction_core::mesh::{generate_mesh, Mesh, MeshKind};

use crate::error::{ExperimentError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemoKind {
    Gap,
    Tension,
    WeakCompat,
    Compression,
    Noncompact,
    Nonconvexity3d,
    GammaSweep,
    Nonlocality,
}

impl DemoKind {
    pub const ALL: [DemoKind; 8] = [
        DemoKind::Gap,
        DemoKind::Tension,
        DemoKind::WeakCompat,
        DemoKind::Compression,
        DemoKind::Noncompact,
        DemoKind::Nonconvexity3d,
        DemoKind::GammaSweep,
        DemoKind::Nonlocality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DemoKind::Gap => "gap",
            DemoKind::Tension => "tension",
            DemoKind::WeakCompat => "weak_compat",
            DemoKind::Compression => "compression",
            DemoKind::Noncompact => "noncompact",
            DemoKind::Nonconvexity3d => "nonconvexity3d",
            DemoKind::GammaSweep => "gamma_sweep",
            DemoKind::Nonlocality => "nonlocality",
        }
    }
}

impl fmt::Display for DemoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DemoKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        DemoKind::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown demo '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    UnitSquare,
    Rectangle { width: f64, height: f64 },
    UnitCube,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TractionSpec {
    Zero,
    Normal { coefficient: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodySpec {
    Zero,
    /// `g(x) = M x`, row-major.
    Linear { matrix: [f64; 4] },
}

/// Tolerances every reported claim is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Exact identities of the gap and compression demos (relative).
    pub identity: f64,
    /// Closed-form energies evaluated in floating point (relative).
    pub closed_form: f64,
    /// `min F = min E` (relative).
    pub min_coincidence: f64,
    /// Flatness of `F` along the weak-compatibility family (relative to scale).
    pub weak_flatness: f64,
    /// Final `|F_h − min E| / |min E|` of a sweep.
    pub sweep_final: f64,
    /// Largest admissible decade ratio of `‖√h∇w_h‖`.
    pub sweep_ratio: f64,
    /// Grid oracle against multistart (relative).
    pub oracle_agreement: f64,
    /// Absolute tolerance for values that must vanish.
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-10,
            closed_form: 1e-12,
            min_coincidence: 1e-8,
            weak_flatness: 1e-9,
            sweep_final: 1e-2,
            sweep_ratio: 0.5,
            oracle_agreement: 1e-6,
            zero: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub demo: DemoKind,
    pub domain: DomainSpec,
    pub mu: f64,
    pub lambda: f64,
    pub traction: TractionSpec,
    pub body: BodySpec,
    pub h_list: Vec<f64>,
    pub seed: u64,
    /// `w²` of the gap field `½W²x`.
    pub gap_w2: f64,
    /// Exponent of the noncompact sequence `h^(−α)Wx`.
    pub noncompact_alpha: f64,
    pub tolerances: Tolerances,
}

impl Scenario {
    /// Defaults of each demo: unit square with `n = 8`, `μ = λ = 1`.
    pub fn preset(demo: DemoKind) -> Scenario {
        let decades = vec![1e-1, 1e-2, 1e-3, 1e-4];
        let mut s = Scenario {
            name: demo.name().to_string(),
            demo,
            domain: DomainSpec {
                kind: DomainKind::UnitSquare,
                n: 8,
            },
            mu: 1.0,
            lambda: 1.0,
            traction: TractionSpec::Normal { coefficient: 1.0 },
            body: BodySpec::Zero,
            h_list: Vec::new(),
            seed: 0,
            gap_w2: 2.0,
            noncompact_alpha: 0.3,
            tolerances: Tolerances::default(),
        };
        match demo {
            DemoKind::Gap => {}
            DemoKind::Nonlocality => s.traction = TractionSpec::Zero,
            DemoKind::Tension | DemoKind::GammaSweep => s.h_list = decades,
            DemoKind::WeakCompat => {
                s.traction = TractionSpec::Zero;
                s.body = BodySpec::Linear {
                    matrix: [1.0, 0.0, 0.0, -1.0],
                };
            }
            DemoKind::Compression => {
                s.traction = TractionSpec::Normal { coefficient: -1.0 };
                s.h_list = vec![0.5, 0.25, 0.125, 0.0625];
            }
            DemoKind::Noncompact => {
                s.lambda = 0.0;
                s.traction = TractionSpec::Zero;
                s.h_list = decades;
            }
            DemoKind::Nonconvexity3d => {
                s.domain.kind = DomainKind::UnitCube;
                s.traction = TractionSpec::Zero;
            }
        }
        s
    }

    pub fn material(&self) -> Result<Material> {
        Ok(Material::new(self.mu, self.lambda)?)
    }

    pub fn mesh(&self) -> Result<Mesh> {
        let kind = match self.domain.kind {
            DomainKind::UnitSquare => MeshKind::UnitSquare,
            DomainKind::Rectangle { width, height } => MeshKind::Rectangle { width, height },
            DomainKind::UnitCube => {
                return Err(ExperimentError::Scenario(format!(
                    "demo '{}' needs a planar domain, got unit_cube",
                    self.demo
                )))
            }
        };
        Ok(generate_mesh(kind, self.domain.n)?)
    }

    pub fn loads(&self) -> LoadSystem {
        let mut ls = LoadSystem::zero();
        if let TractionSpec::Normal { coefficient } = self.traction {
            ls = LoadSystem::normal(coefficient);
        }
        if let BodySpec::Linear { matrix: [a, b, c, d] } = self.body {
            ls.body = traction_core::loads::BodyForce::Linear(Mat2::new(a, b, c, d));
        }
        ls
    }

    /// Checks demo/domain consistency and parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ExperimentError::Scenario(msg));
        let cube = self.domain.kind == DomainKind::UnitCube;
        if cube != (self.demo == DemoKind::Nonconvexity3d) {
            return bad(format!("demo '{}' is inconsistent with the domain {:?}", self.demo, self.domain.kind));
        }
        if self.domain.n == 0 {
            return bad("domain.n must be at least 1".into());
        }
        if let DomainKind::Rectangle { width, height } = self.domain.kind {
            if !(width > 0.0 && height > 0.0) {
                return bad("rectangle sides must be positive".into());
            }
        }
        self.material()?;
        if self.h_list.iter().any(|h| !(*h > 0.0)) || self.h_list.windows(2).any(|w| w[1] >= w[0]) {
            return bad("h_list must be positive and strictly decreasing".into());
        }
        if !(self.gap_w2 >= 0.0) {
            return bad("gap.w2 must be nonnegative".into());
        }
        if !(self.noncompact_alpha > 0.0 && self.noncompact_alpha < 0.5) {
            return bad("noncompact.alpha must lie in (0, 1/2)".into());
        }
        Ok(())
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    value.trim().parse().map_err(|_| ExperimentError::Config {
        line,
        msg: format!("'{key}' expects a decimal number, got '{value}'"),
    })
}

fn parse_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse_f64(line, key, v)).collect()
}

/// Parses a scenario file. Each non-empty, non-`#` line is `key = value`.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ExperimentError::Config {
            line,
            msg: format!("expected 'key = value', got '{content}'"),
        })?;
        let key = key.trim().to_string();
        if entries.insert(key.clone(), (line, value.trim().to_string())).is_some() {
            return Err(ExperimentError::Config {
                line,
                msg: format!("duplicate key '{key}'"),
            });
        }
    }
    let (demo_line, demo) = entries.remove("demo").ok_or(ExperimentError::Config {
        line: 0,
        msg: "missing required key 'demo'".into(),
    })?;
    let demo: DemoKind = demo.parse().map_err(|msg| ExperimentError::Config { line: demo_line, msg })?;
    let mut s = Scenario::preset(demo);
    let mut width = None;
    let mut height = None;
    let mut traction_kind = None;
    let mut traction_coefficient = None;
    let mut body_kind = None;
    let mut body_matrix = None;

    for (key, (line, value)) in &entries {
        let (line, value) = (*line, value.as_str());
        let num = || parse_f64(line, key, value);
        match key.as_str() {
            "name" => s.name = value.to_string(),
            "domain.kind" => {
                s.domain.kind = match value {
                    "unit_square" => DomainKind::UnitSquare,
                    "rectangle" => DomainKind::Rectangle { width: 1.0, height: 1.0 },
                    "unit_cube" => DomainKind::UnitCube,
                    other => {
                        return Err(ExperimentError::Config {
                            line,
                            msg: format!("unknown domain.kind '{other}'"),
                        })
                    }
                }
            }
            "domain.n" => {
                s.domain.n = value.parse().map_err(|_| ExperimentError::Config {
                    line,
                    msg: format!("domain.n expects a positive integer, got '{value}'"),
                })?
            }
            "domain.width" => width = Some(num()?),
            "domain.height" => height = Some(num()?),
            "material.mu" => s.mu = num()?,
            "material.lambda" => s.lambda = num()?,
            "traction.kind" => traction_kind = Some((line, value.to_string())),
            "traction.coefficient" => traction_coefficient = Some(num()?),
            "body.kind" => body_kind = Some((line, value.to_string())),
            "body.matrix" => {
                let m = parse_list(line, key, value)?;
                let m: [f64; 4] = m.try_into().map_err(|_| ExperimentError::Config {
                    line,
                    msg: "body.matrix expects four entries a11, a12, a21, a22".into(),
                })?;
                body_matrix = Some(m);
            }
            "h_list" => s.h_list = parse_list(line, key, value)?,
            "seed" => {
                s.seed = value.parse().map_err(|_| ExperimentError::Config {
                    line,
                    msg: format!("seed expects an unsigned integer, got '{value}'"),
                })?
            }
            "gap.w2" => s.gap_w2 = num()?,
            "noncompact.alpha" => s.noncompact_alpha = num()?,
            "tol.identity" => s.tolerances.identity = num()?,
            "tol.closed_form" => s.tolerances.closed_form = num()?,
            "tol.min_coincidence" => s.tolerances.min_coincidence = num()?,
            "tol.weak_flatness" => s.tolerances.weak_flatness = num()?,
            "tol.sweep_final" => s.tolerances.sweep_final = num()?,
            "tol.sweep_ratio" => s.tolerances.sweep_ratio = num()?,
            "tol.oracle_agreement" => s.tolerances.oracle_agreement = num()?,
            "tol.zero" => s.tolerances.zero = num()?,
            other => {
                return Err(ExperimentError::Config {
                    line,
                    msg: format!("unknown key '{other}'"),
                })
            }
        }
    }

    if width.is_some() || height.is_some() {
        match &mut s.domain.kind {
            DomainKind::Rectangle { width: w, height: h } => {
                *w = width.unwrap_or(*w);
                *h = height.unwrap_or(*h);
            }
            _ => {
                return Err(ExperimentError::Config {
                    line: 0,
                    msg: "domain.width/height require domain.kind = rectangle".into(),
                })
            }
        }
    }
    if let Some((line, kind)) = traction_kind {
        s.traction = match kind.as_str() {
            "zero" => TractionSpec::Zero,
            "normal" => TractionSpec::Normal {
                coefficient: traction_coefficient.unwrap_or(1.0),
            },
            other => {
                return Err(ExperimentError::Config {
                    line,
                    msg: format!("unknown traction.kind '{other}'"),
                })
            }
        };
    } else if let Some(c) = traction_coefficient {
        s.traction = TractionSpec::Normal { coefficient: c };
    }
    if let Some((line, kind)) = body_kind {
        s.body = match kind.as_str() {
            "zero" => BodySpec::Zero,
            "linear" => BodySpec::Linear {
                matrix: body_matrix.ok_or(ExperimentError::Config {
                    line,
                    msg: "body.kind = linear needs body.matrix".into(),
                })?,
            },
            other => {
                return Err(ExperimentError::Config {
                    line,
                    msg: format!("unknown body.kind '{other}'"),
                })
            }
        };
    } else if let Some(matrix) = body_matrix {
        s.body = BodySpec::Linear { matrix };
    }
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_apply_on_top_of_preset() {
        let s = parse_scenario(
            "demo = tension\n# comment\nmaterial.lambda = 0.5\nh_list = 1e-1, 1e-2\nseed = 9\ntol.sweep_final = 0.02\n",
        )
        .unwrap();
        assert_eq!(s.demo, DemoKind::Tension);
        assert_eq!(s.lambda, 0.5);
        assert_eq!(s.h_list, vec![0.1, 0.01]);
        assert_eq!(s.seed, 9);
        assert_eq!(s.tolerances.sweep_final, 0.02);
        assert_eq!(s.traction, TractionSpec::Normal { coefficient: 1.0 });
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_scenario("demo = tension\nfoo = 1\n"), Err(ExperimentError::Config { line: 2, .. })));
        assert!(matches!(parse_scenario("material.mu = 1\n"), Err(ExperimentError::Config { .. })));
        assert!(matches!(parse_scenario("demo = gap\ndemo = gap\n"), Err(ExperimentError::Config { line: 2, .. })));
        assert!(matches!(
            parse_scenario("demo = nonconvexity3d\ndomain.kind = unit_square\n"),
            Err(ExperimentError::Scenario(_))
        ));
        assert!(matches!(parse_scenario("demo = tension\nh_list = 1e-2, 1e-1\n"), Err(ExperimentError::Scenario(_))));
        assert!(matches!(parse_scenario("demo = gap\nmaterial.mu = x\n"), Err(ExperimentError::Config { line: 2, .. })));
    }

    #[test]
    fn rectangle_and_body_keys() {
        let s = parse_scenario(
            "demo = weak_compat\ndomain.kind = rectangle\ndomain.width = 2\ndomain.height = 0.5\nbody.matrix = 1, 0, 0, -1\n",
        )
        .unwrap();
        assert_eq!(s.domain.kind, DomainKind::Rectangle { width: 2.0, height: 0.5 });
        assert_eq!(s.body, BodySpec::Linear { matrix: [1.0, 0.0, 0.0, -1.0] });
    }
}
