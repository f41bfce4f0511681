//! File formats: problem files, frontier files, scenario files.
//!
//! Rationals serialize as strings like `"-1/5"` by default so every value
//! round-trips exactly; `--float` switches the emitters to JSON numbers for
//! plotting pipelines. Incoming JSON numbers are read from their literal
//! digits (never through an `f64`), so `0.4` means exactly `4/10`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use mf_core::game::JointDistribution;
use mf_core::problem::{
    CovariateDesign, DesignChoice, DesignPoint, Frontier, Problem, Subgroup, SubgroupDesign,
    TauBounds,
};
use mf_core::rational::{self, Rational};
use mf_core::{Error as CoreError, Violation};

/// Reads a rational from a JSON string (`"2/5"`, `"0.4"`) or a JSON number
/// via its literal decimal expansion.
pub fn rational_from_value(value: &Value) -> Result<Rational, CoreError> {
    match value {
        Value::String(s) => rational::parse_rational(s),
        Value::Number(n) => rational::parse_rational(&n.to_string()),
        other => Err(CoreError::domain(
            "rational",
            format!("expected string or number, got {other}"),
        )),
    }
}

/// Emits a rational as an exact string, or as a JSON number when `float`.
pub fn rational_to_value(value: &Rational, float: bool) -> Value {
    if float {
        serde_json::Number::from_f64(rational::to_f64(value))
            .map(Value::Number)
            .unwrap_or(Value::Null)
    } else {
        Value::String(rational::format_rational(value))
    }
}

pub fn rational_text(value: &Rational, float: bool) -> String {
    if float {
        rational::to_f64(value).to_string()
    } else {
        rational::format_rational(value)
    }
}

/// `"LOWER,UPPER"` as used by `--tau-override` and `--tau`.
pub fn parse_tau_pair(text: &str) -> Result<TauBounds, CoreError> {
    let (lo, hi) = text
        .split_once(',')
        .ok_or_else(|| CoreError::domain("tau", "expected LOWER,UPPER"))?;
    Ok(TauBounds::new(
        rational::parse_rational(lo)?,
        rational::parse_rational(hi)?,
    ))
}

#[derive(Debug, Deserialize)]
pub struct SubgroupFile {
    pub label: String,
    pub weight: Value,
    pub p: Value,
}

/// The problem input document.
#[derive(Debug, Deserialize)]
pub struct ProblemFile {
    pub subgroups: Vec<SubgroupFile>,
    /// Either `{"lower", "upper"}` for all subgroups or a per-label map.
    #[serde(default)]
    pub tau: Option<Value>,
    #[serde(default)]
    pub alpha: Option<Value>,
    #[serde(default)]
    pub beta: Option<Value>,
}

pub struct LoadedProblem {
    pub problem: Problem,
    pub alpha: Option<Rational>,
    pub beta: Option<Rational>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<ProblemFile, String> {
        serde_json::from_str(text).map_err(|e| format!("problem file: {e}"))
    }

    /// Converts and validates. `normalize` rescales weights to sum to one
    /// first (for float-originated inputs).
    pub fn load(&self, normalize: bool) -> Result<LoadedProblem, Vec<Violation>> {
        let mut violations = Vec::new();
        let mut subgroups = Vec::new();
        for (i, s) in self.subgroups.iter().enumerate() {
            let weight = rational_from_value(&s.weight)
                .map_err(|e| vec![Violation::new(format!("subgroups[{i}].weight"), e.to_string())])?;
            let p = rational_from_value(&s.p)
                .map_err(|e| vec![Violation::new(format!("subgroups[{i}].p"), e.to_string())])?;
            subgroups.push(Subgroup::new(s.label.clone(), weight, p));
        }
        if normalize {
            let total: Rational = subgroups
                .iter()
                .map(|s| s.weight.clone())
                .fold(rational::zero(), |acc, w| acc + w);
            if total != rational::zero() {
                for s in &mut subgroups {
                    s.weight = &s.weight / &total;
                }
            }
        }
        if let Some(tau) = &self.tau {
            apply_tau(tau, &mut subgroups).map_err(|e| vec![Violation::new("tau", e.to_string())])?;
        }
        let alpha = match &self.alpha {
            Some(v) => Some(
                rational_from_value(v)
                    .map_err(|e| vec![Violation::new("alpha", e.to_string())])?,
            ),
            None => None,
        };
        let beta = match &self.beta {
            Some(v) => {
                Some(rational_from_value(v).map_err(|e| vec![Violation::new("beta", e.to_string())])?)
            }
            None => None,
        };
        violations.extend(match mf_core::validate_problem(Problem::new(subgroups)) {
            Ok(problem) => return Ok(LoadedProblem { problem, alpha, beta }),
            Err(v) => v,
        });
        Err(violations)
    }
}

fn apply_tau(tau: &Value, subgroups: &mut [Subgroup]) -> Result<(), CoreError> {
    let object = tau
        .as_object()
        .ok_or_else(|| CoreError::domain("tau", "expected an object"))?;
    if object.contains_key("lower") || object.contains_key("upper") {
        let bounds = tau_from_object(tau)?;
        for s in subgroups.iter_mut() {
            s.tau = bounds.clone();
        }
    } else {
        for (label, value) in object {
            let bounds = tau_from_object(value)?;
            match subgroups.iter_mut().find(|s| &s.label == label) {
                Some(s) => s.tau = bounds,
                None => {
                    return Err(CoreError::domain("tau", format!("no subgroup labeled {label}")))
                }
            }
        }
    }
    Ok(())
}

fn tau_from_object(value: &Value) -> Result<TauBounds, CoreError> {
    let lower = value
        .get("lower")
        .ok_or_else(|| CoreError::domain("tau", "missing lower"))?;
    let upper = value
        .get("upper")
        .ok_or_else(|| CoreError::domain("tau", "missing upper"))?;
    Ok(TauBounds::new(rational_from_value(lower)?, rational_from_value(upper)?))
}

#[derive(Debug, Serialize, Deserialize, Clone)]
pub struct AtomDto {
    pub x1: String,
    pub mass: Value,
}

#[derive(Debug, Serialize, Deserialize, Clone)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DesignDto {
    Pure { by_subgroup: BTreeMap<String, Vec<AtomDto>> },
    Mixture { weight: Value, first: Box<DesignDto>, second: Box<DesignDto> },
}

pub fn design_to_dto(design: &DesignChoice, float: bool) -> DesignDto {
    match design {
        DesignChoice::Pure(d) => DesignDto::Pure { by_subgroup: covariate_to_dto(d, float) },
        DesignChoice::Mixture { first, second, weight } => DesignDto::Mixture {
            weight: rational_to_value(weight, float),
            first: Box::new(DesignDto::Pure { by_subgroup: covariate_to_dto(first, float) }),
            second: Box::new(DesignDto::Pure { by_subgroup: covariate_to_dto(second, float) }),
        },
    }
}

pub fn covariate_to_dto(design: &CovariateDesign, float: bool) -> BTreeMap<String, Vec<AtomDto>> {
    design
        .by_subgroup
        .iter()
        .map(|(label, sd)| {
            (
                label.clone(),
                sd.atoms
                    .iter()
                    .map(|a| AtomDto { x1: a.label.clone(), mass: rational_to_value(&a.mass, float) })
                    .collect(),
            )
        })
        .collect()
}

pub fn subgroup_design_from_dto(atoms: &[AtomDto]) -> Result<SubgroupDesign, CoreError> {
    let mut parsed = Vec::new();
    for a in atoms {
        parsed.push((a.x1.clone(), rational_from_value(&a.mass)?));
    }
    Ok(SubgroupDesign::new(parsed))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VertexDto {
    pub worst: Value,
    pub best: Value,
    pub kind: String,
    pub limit: bool,
    pub design: DesignDto,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentDto {
    pub from: usize,
    pub to: usize,
    pub slope: Value,
}

/// The frontier output document; vertices run distrust to trust.
#[derive(Debug, Serialize, Deserialize)]
pub struct FrontierFile {
    pub vertices: Vec<VertexDto>,
    pub segments: Vec<SegmentDto>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn vertex_to_dto(vertex: &DesignPoint, float: bool) -> VertexDto {
    VertexDto {
        worst: rational_to_value(&vertex.payoff.worst, float),
        best: rational_to_value(&vertex.payoff.best, float),
        kind: vertex.kind.as_str().to_string(),
        limit: vertex.limit,
        design: design_to_dto(&vertex.design, float),
    }
}

impl FrontierFile {
    pub fn from_frontier(frontier: &Frontier, float: bool) -> FrontierFile {
        FrontierFile {
            vertices: frontier.vertices.iter().map(|v| vertex_to_dto(v, float)).collect(),
            segments: frontier
                .segments
                .iter()
                .map(|s| SegmentDto {
                    from: s.from,
                    to: s.to,
                    slope: rational_to_value(&s.slope, float),
                })
                .collect(),
            notes: frontier.notes.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("frontier serializes");
        text.push('\n');
        text
    }

    /// CSV variant: one row per vertex, slope of the segment leaving it.
    pub fn to_csv(frontier: &Frontier, float: bool) -> String {
        let mut out = String::from("worst,best,kind,slope_to_next\n");
        for (i, v) in frontier.vertices.iter().enumerate() {
            let slope = frontier
                .segments
                .iter()
                .find(|s| s.from == i)
                .map(|s| rational_text(&s.slope, float))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                rational_text(&v.payoff.worst, float),
                rational_text(&v.payoff.best, float),
                v.kind.as_str(),
                slope
            ));
        }
        out
    }
}

#[derive(Debug, Deserialize)]
pub struct CellFile {
    pub x1: String,
    pub y1_prob: Value,
    #[serde(default)]
    pub mass: Option<Value>,
}

/// Input for `mf evaluate`: a concrete design, report, truth, and
/// tie-breaking probability.
#[derive(Debug, Deserialize)]
pub struct ScenarioFile {
    pub problem: ProblemFile,
    pub design: BTreeMap<String, Vec<AtomDto>>,
    pub report: BTreeMap<String, Vec<CellFile>>,
    pub truth: BTreeMap<String, Vec<CellFile>>,
    #[serde(default)]
    pub rho: Option<Value>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<ScenarioFile, String> {
        serde_json::from_str(text).map_err(|e| format!("scenario file: {e}"))
    }

    pub fn design(&self, problem: &Problem) -> Result<CovariateDesign, CoreError> {
        let mut design = CovariateDesign::new();
        for (label, atoms) in &self.design {
            design.insert(label, subgroup_design_from_dto(atoms)?);
        }
        let violations = design.validate_for(problem);
        if !violations.is_empty() {
            return Err(CoreError::Invalid(violations));
        }
        Ok(design)
    }

    pub fn joint(
        &self,
        which: &BTreeMap<String, Vec<CellFile>>,
        problem: &Problem,
        design: &CovariateDesign,
    ) -> Result<JointDistribution, CoreError> {
        let mut joint = JointDistribution::new();
        for s in &problem.subgroups {
            let cells = which
                .get(&s.label)
                .ok_or_else(|| CoreError::domain("scenario", format!("missing subgroup {}", s.label)))?;
            let sd = &design.by_subgroup[&s.label];
            for cell in cells {
                let mass = match &cell.mass {
                    Some(v) => rational_from_value(v)?,
                    None => {
                        let atom = sd
                            .atoms
                            .iter()
                            .find(|a| a.label == cell.x1)
                            .ok_or_else(|| {
                                CoreError::domain(
                                    "scenario",
                                    format!("cell ({}, {}) not in design", s.label, cell.x1),
                                )
                            })?;
                        &s.weight * &atom.mass
                    }
                };
                joint.insert(&s.label, &cell.x1, mass, rational_from_value(&cell.y1_prob)?);
            }
        }
        Ok(joint)
    }
}
