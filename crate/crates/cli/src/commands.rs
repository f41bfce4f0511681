//! Command implementations. Exit-code contract: `0` success, `1`
//! verification failure, `2` input or validation error.

use std::path::Path;

use serde_json::{json, Value};

use mf_core::frontier_aggregate::{aggregate_frontier, hedge_chain, optimal_point};
use mf_core::frontier_single::evaluate_design;
use mf_core::game::{check_admissible, expected_payoff, TieBreak};
use mf_core::hurwicz::hurwicz_frontier;
use mf_core::oracle::{
    dominance_check_against, frontier_dominance_check, OracleConfig, OracleMode, OracleReport,
};
use mf_core::payoff::{
    best_targeting, best_targeting_tau, default_payoff, feasible_ic_set, phi_best, phi_worst,
    worst_targeting, worst_targeting_tau,
};
use mf_core::problem::{SubgroupDesign, TauBounds};
use mf_core::rational::{self, one, rat, Rational};
use mf_core::tau_design::{optimal_tau_closed, optimal_tau_grid, TauChoice};
use mf_core::Violation;

use crate::formats::{
    self, design_to_dto, rational_text, rational_to_value, vertex_to_dto, FrontierFile,
    LoadedProblem, ProblemFile, ScenarioFile,
};

pub const DEFAULT_SEED: u64 = 271828;

pub struct CmdOutput {
    pub text: String,
    pub exit: i32,
}

pub struct CmdError {
    pub exit: i32,
    pub message: String,
}

pub type CmdResult = Result<CmdOutput, CmdError>;

fn ok(text: String) -> CmdResult {
    Ok(CmdOutput { text, exit: 0 })
}

fn input_error(message: impl Into<String>) -> CmdError {
    CmdError { exit: 2, message: message.into() }
}

fn violations_error(violations: &[Violation]) -> CmdError {
    let lines: Vec<String> = violations.iter().map(|v| format!("  - {v}")).collect();
    input_error(format!("validation failed:\n{}", lines.join("\n")))
}

fn read_file(path: &Path) -> Result<String, CmdError> {
    std::fs::read_to_string(path)
        .map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))
}

fn load_problem(path: &Path, normalize: bool) -> Result<LoadedProblem, CmdError> {
    let text = read_file(path)?;
    let file = ProblemFile::parse(&text).map_err(input_error)?;
    file.load(normalize).map_err(|v| violations_error(&v))
}

fn parse_rational_arg(name: &str, text: &str) -> Result<Rational, CmdError> {
    rational::parse_rational(text).map_err(|e| input_error(format!("--{name}: {e}")))
}

fn to_json_line(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    text
}

fn float_value(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

pub fn cmd_frontier(
    problem_path: &Path,
    tau_override: Option<&str>,
    format: OutputFormat,
    float: bool,
    normalize: bool,
) -> CmdResult {
    let mut loaded = load_problem(problem_path, normalize)?;
    if let Some(text) = tau_override {
        let tau = formats::parse_tau_pair(text).map_err(|e| input_error(e.to_string()))?;
        for s in &mut loaded.problem.subgroups {
            s.tau = tau.clone();
        }
        loaded.problem = mf_core::validate_problem(loaded.problem)
            .map_err(|v| violations_error(&v))?;
    }
    let frontier =
        aggregate_frontier(&loaded.problem).map_err(|e| input_error(e.to_string()))?;
    let text = match format {
        OutputFormat::Json => FrontierFile::from_frontier(&frontier, float).to_json(),
        OutputFormat::Csv => FrontierFile::to_csv(&frontier, float),
    };
    ok(text)
}

pub fn cmd_optimal_design(
    problem_path: &Path,
    alpha_arg: Option<&str>,
    float: bool,
    normalize: bool,
) -> CmdResult {
    let loaded = load_problem(problem_path, normalize)?;
    let alpha = match alpha_arg {
        Some(text) => parse_rational_arg("alpha", text)?,
        None => loaded
            .alpha
            .clone()
            .ok_or_else(|| input_error("no --alpha given and none in the problem file"))?,
    };
    let opt = optimal_point(&loaded.problem, &alpha).map_err(|e| input_error(e.to_string()))?;
    let chain = hedge_chain(&loaded.problem).map_err(|e| input_error(e.to_string()))?;
    let value = json!({
        "alpha": rational_to_value(&alpha, float),
        "score": rational_to_value(&opt.score, float),
        "vertex_index": opt.vertex_index,
        "kind": opt.primary.kind.as_str(),
        "limit": opt.primary.limit,
        "payoff": {
            "worst": rational_to_value(&opt.primary.payoff.worst, float),
            "best": rational_to_value(&opt.primary.payoff.best, float),
        },
        "design": design_to_dto(&opt.primary.design, float),
        "alternates": opt.alternates.iter().map(|v| serde_json::to_value(vertex_to_dto(v, float)).expect("vertex serializes")).collect::<Vec<_>>(),
        "switch_alphas": chain.alphas.iter().map(|a| rational_to_value(a, float)).collect::<Vec<_>>(),
    });
    ok(to_json_line(&value))
}

fn tau_choice_to_value(choice: &TauChoice, float: bool) -> Value {
    json!({
        "regime": choice.regime.as_str(),
        "tau": {
            "lower": rational_to_value(&choice.tau.lower, float),
            "upper": rational_to_value(&choice.tau.upper, float),
        },
        "tau_circ": choice.tau_circ.map(float_value).unwrap_or(Value::Null),
        "design": choice.design.atoms.iter().map(|a| json!({
            "x1": a.label,
            "mass": rational_to_value(&a.mass, float),
        })).collect::<Vec<_>>(),
        "utility": float_value(choice.utility),
        "utility_exact": choice.utility_exact.as_ref().map(|u| rational_to_value(u, float)).unwrap_or(Value::Null),
        "alpha_lo": rational_to_value(&choice.alpha_lo, float),
        "alpha_hi": rational_to_value(&choice.alpha_hi, float),
        "lattice": choice.lattice.map(|n| json!(n)).unwrap_or(Value::Null),
        "alternates": choice.alternates.iter().map(|c| tau_choice_to_value(c, float)).collect::<Vec<_>>(),
    })
}

pub fn cmd_optimal_tau(
    problem_path: &Path,
    alpha_arg: Option<&str>,
    grid: Option<u32>,
    float: bool,
) -> CmdResult {
    let loaded = load_problem(problem_path, false)?;
    let alpha = match alpha_arg {
        Some(text) => parse_rational_arg("alpha", text)?,
        None => loaded
            .alpha
            .clone()
            .ok_or_else(|| input_error("no --alpha given and none in the problem file"))?,
    };
    let mut per_subgroup = Vec::new();
    for s in &loaded.problem.subgroups {
        let choice = match grid {
            Some(n) => optimal_tau_grid(&s.p, &alpha, n),
            None if s.p <= rat(1, 3) => optimal_tau_closed(&s.p, &alpha),
            None => optimal_tau_grid(&s.p, &alpha, 512),
        }
        .map_err(|e| input_error(e.to_string()))?;
        let mut value = tau_choice_to_value(&choice, float);
        value["subgroup"] = json!(s.label);
        value["p"] = rational_to_value(&s.p, float);
        per_subgroup.push(value);
    }
    ok(to_json_line(&json!({
        "alpha": rational_to_value(&alpha, float),
        "subgroups": per_subgroup,
    })))
}

fn report_to_value(report: &OracleReport) -> Value {
    json!({
        "mode": match report.mode { OracleMode::Grid => "grid", OracleMode::AnalyticInner => "analytic" },
        "seed": report.seed,
        "grid_n": report.grid_n,
        "samples": report.samples,
        "tolerance": float_value(report.tolerance),
        "max_support": report.max_support,
        "max_gap": float_value(report.max_gap),
        "passed": report.passed(),
        "violations": report.violations.iter().map(|v| json!({
            "kind": v.kind,
            "seed": v.seed,
            "sample": v.sample,
            "detail": v.detail,
        })).collect::<Vec<_>>(),
        "records": report.records.iter().map(|r| json!({
            "sample": r.sample,
            "subgroup": r.subgroup,
            "p": rational_to_value(&r.p, false),
            "tau": {
                "lower": rational_to_value(&r.tau.lower, false),
                "upper": rational_to_value(&r.tau.upper, false),
            },
            "design": r.design.atoms.iter().map(|a| json!({
                "x1": a.label,
                "mass": rational_to_value(&a.mass, false),
            })).collect::<Vec<_>>(),
            "closed": {
                "worst": rational_to_value(&r.closed.worst, false),
                "best": rational_to_value(&r.closed.best, false),
            },
            "oracle": { "worst": float_value(r.oracle_worst), "best": float_value(r.oracle_best) },
            "gap": float_value(r.gap),
        })).collect::<Vec<_>>(),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_verify(
    problem_path: &Path,
    samples: Option<u32>,
    grid: Option<u32>,
    seed: Option<u64>,
    mode: OracleMode,
    self_test: bool,
) -> CmdResult {
    let loaded = load_problem(problem_path, false)?;
    let seed = seed
        .or_else(|| std::env::var("MF_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(DEFAULT_SEED);
    let mut config = match mode {
        OracleMode::AnalyticInner => OracleConfig::analytic(seed),
        OracleMode::Grid => OracleConfig::grid(seed),
    };
    if let Some(samples) = samples {
        config = config.with_samples(samples);
    }
    if let Some(grid_n) = grid {
        config = config.with_grid_n(grid_n);
    }
    let report = if self_test {
        let mut frontier =
            aggregate_frontier(&loaded.problem).map_err(|e| input_error(e.to_string()))?;
        let last = frontier.vertices.len() - 1;
        frontier.vertices[last].payoff.best += rat(1, 1000);
        let report = dominance_check_against(&frontier, &loaded.problem, &config)
            .map_err(|e| input_error(e.to_string()))?;
        if report.passed() {
            return Err(CmdError {
                exit: 1,
                message: "self-test failed: the mutated frontier was not rejected".into(),
            });
        }
        report
    } else {
        frontier_dominance_check(&loaded.problem, &config)
            .map_err(|e| input_error(e.to_string()))?
    };
    let exit = if report.passed() { 0 } else { 1 };
    Ok(CmdOutput { text: to_json_line(&report_to_value(&report)), exit })
}

pub fn cmd_evaluate(scenario_path: &Path, float: bool) -> CmdResult {
    let text = read_file(scenario_path)?;
    let scenario = ScenarioFile::parse(&text).map_err(input_error)?;
    let loaded = scenario.problem.load(false).map_err(|v| violations_error(&v))?;
    let design = scenario.design(&loaded.problem).map_err(|e| input_error(e.to_string()))?;
    let report = scenario
        .joint(&scenario.report, &loaded.problem, &design)
        .map_err(|e| input_error(e.to_string()))?;
    let truth = scenario
        .joint(&scenario.truth, &loaded.problem, &design)
        .map_err(|e| input_error(e.to_string()))?;
    let rho = match &scenario.rho {
        Some(v) => formats::rational_from_value(v).map_err(|e| input_error(e.to_string()))?,
        None => one(),
    };
    let tie = TieBreak::new(rho.clone()).map_err(|e| input_error(e.to_string()))?;

    // Admissibility is always checked and reported first.
    let report_violations = check_admissible(&report, &loaded.problem, &design);
    let truth_violations = check_admissible(&truth, &loaded.problem, &design);
    if !report_violations.is_empty() || !truth_violations.is_empty() {
        let mut all = report_violations.clone();
        all.extend(truth_violations.clone());
        return Err(violations_error(&all));
    }
    let payoff = expected_payoff(&report, &truth, &loaded.problem, &tie)
        .map_err(|e| input_error(e.to_string()))?;
    ok(to_json_line(&json!({
        "payoff": rational_to_value(&payoff, float),
        "rho": rational_to_value(&rho, float),
        "report_violations": [],
        "truth_violations": [],
    })))
}

pub fn cmd_hurwicz(
    problem_path: &Path,
    beta_arg: Option<&str>,
    format: OutputFormat,
    float: bool,
) -> CmdResult {
    let loaded = load_problem(problem_path, false)?;
    let beta = match beta_arg {
        Some(text) => parse_rational_arg("beta", text)?,
        None => loaded
            .beta
            .clone()
            .ok_or_else(|| input_error("no --beta given and none in the problem file"))?,
    };
    if loaded.problem.subgroups.len() != 1 {
        return Err(input_error("the mixed-Nature frontier is defined for a single subgroup"));
    }
    let p = &loaded.problem.subgroups[0].p;
    let frontier = hurwicz_frontier(p, &beta).map_err(|e| input_error(e.to_string()))?;
    let text = match format {
        OutputFormat::Json => FrontierFile::from_frontier(&frontier, float).to_json(),
        OutputFormat::Csv => FrontierFile::to_csv(&frontier, float),
    };
    ok(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Alpha,
    Tau,
    Beta,
}

pub fn cmd_plot_data(
    problem_path: &Path,
    sweep: Sweep,
    steps: u32,
    float: bool,
    grid: Option<u32>,
) -> CmdResult {
    let loaded = load_problem(problem_path, false)?;
    match sweep {
        Sweep::Alpha => {
            let mut out = String::from("alpha,vertex,kind,worst,best,score\n");
            for k in 0..=steps {
                if steps == 0 {
                    break;
                }
                let alpha = rat(k as i64, steps as i64);
                let opt = optimal_point(&loaded.problem, &alpha)
                    .map_err(|e| input_error(e.to_string()))?;
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    rational_text(&alpha, float),
                    opt.vertex_index,
                    opt.primary.kind.as_str(),
                    rational_text(&opt.primary.payoff.worst, float),
                    rational_text(&opt.primary.payoff.best, float),
                    rational_text(&opt.score, float),
                ));
            }
            ok(out)
        }
        Sweep::Tau => {
            let mut out = String::from("subgroup,alpha,regime,tau_lower,tau_upper,design_rate,utility\n");
            for s in &loaded.problem.subgroups {
                for k in 0..=steps {
                    if steps == 0 {
                        break;
                    }
                    let alpha = rat(k as i64, steps as i64);
                    let choice = match grid {
                        Some(n) => optimal_tau_grid(&s.p, &alpha, n),
                        None if s.p <= rat(1, 3) => optimal_tau_closed(&s.p, &alpha),
                        None => optimal_tau_grid(&s.p, &alpha, 64),
                    }
                    .map_err(|e| input_error(e.to_string()))?;
                    let rate = match choice.design.atoms.first() {
                        Some(atom) if choice.design.atoms.len() == 2 => {
                            rational_text(&atom.mass, float)
                        }
                        _ => "0".to_string(),
                    };
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        s.label,
                        rational_text(&alpha, float),
                        choice.regime.as_str(),
                        match choice.tau_circ {
                            Some(circ) => format!("{circ:.12}"),
                            None => rational_text(&choice.tau.lower, float),
                        },
                        rational_text(&choice.tau.upper, float),
                        rate,
                        format!("{:.12}", choice.utility),
                    ));
                }
            }
            ok(out)
        }
        Sweep::Beta => {
            if loaded.problem.subgroups.len() != 1 {
                return Err(input_error("beta sweeps are defined for a single subgroup"));
            }
            let p = &loaded.problem.subgroups[0].p;
            let mut out = String::from("beta,worst,best\n");
            for k in 1..=steps {
                let beta = rat(k as i64, steps as i64);
                let frontier =
                    hurwicz_frontier(p, &beta).map_err(|e| input_error(e.to_string()))?;
                let trust = &frontier.trust().payoff;
                out.push_str(&format!(
                    "{},{},{}\n",
                    rational_text(&beta, float),
                    rational_text(&trust.worst, float),
                    rational_text(&trust.best, float),
                ));
            }
            ok(out)
        }
    }
}

pub fn cmd_primitives(
    p_arg: &str,
    q_arg: Option<&str>,
    tau_arg: Option<&str>,
    design_arg: Option<&str>,
    float: bool,
) -> CmdResult {
    let p = parse_rational_arg("p", p_arg)?;
    let tau = match tau_arg {
        Some(text) => formats::parse_tau_pair(text).map_err(|e| input_error(e.to_string()))?,
        None => TauBounds::full(),
    };
    let mut value = json!({
        "p": rational_to_value(&p, float),
        "tau": {
            "lower": rational_to_value(&tau.lower, float),
            "upper": rational_to_value(&tau.upper, float),
        },
    });
    let d = default_payoff(&p).map_err(|e| input_error(e.to_string()))?;
    value["default_payoff"] = rational_to_value(&d, float);
    let bp = feasible_ic_set(&p, &tau).map_err(|e| input_error(e.to_string()))?;
    value["feasible_set"] = Value::Array(
        bp.intervals
            .iter()
            .map(|i| {
                json!({
                    "lo": rational_to_value(&i.lo, float),
                    "hi": rational_to_value(&i.hi, float),
                    "lo_closed": i.lo_closed,
                    "hi_closed": i.hi_closed,
                })
            })
            .collect(),
    );
    if let Some(q_text) = q_arg {
        let q = parse_rational_arg("q", q_text)?;
        let pairs: [(&str, Result<Rational, mf_core::Error>); 6] = [
            ("best_targeting", best_targeting(&p, &q)),
            ("worst_targeting", worst_targeting(&p, &q)),
            ("best_targeting_tau", best_targeting_tau(&p, &q, &tau)),
            ("worst_targeting_tau", worst_targeting_tau(&p, &q, &tau)),
            ("phi_best", phi_best(&p, &q, &tau)),
            ("phi_worst", phi_worst(&p, &q, &tau)),
        ];
        value["q"] = rational_to_value(&q, float);
        for (name, result) in pairs {
            let v = result.map_err(|e| input_error(e.to_string()))?;
            value[name] = rational_to_value(&v, float);
        }
    }
    if let Some(design_text) = design_arg {
        let mut atoms = Vec::new();
        for (i, part) in design_text.split(',').enumerate() {
            atoms.push((format!("v{i}"), parse_rational_arg("design", part.trim())?));
        }
        let design = SubgroupDesign::new(atoms);
        let payoff =
            evaluate_design(&p, &tau, &design).map_err(|e| input_error(e.to_string()))?;
        value["design_payoff"] = json!({
            "worst": rational_to_value(&payoff.worst, float),
            "best": rational_to_value(&payoff.best, float),
        });
    }
    ok(to_json_line(&value))
}

