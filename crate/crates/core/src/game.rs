//! The concrete interaction: reports, decisions, payoffs, best responses.
//!
//! A joint distribution assigns each `(subgroup, x1)` cell a mass and a
//! conditional treatment-need probability. The designer treats a cell when
//! the *reported* conditional probability clears one half (ties go to
//! treatment with probability `rho`, one by default), and the payoff is
//! evaluated under the *true* distribution. The advisor's report must stay
//! admissible: same covariate marginal, same per-subgroup need rate, and
//! conditionals within the subgroup's informativeness bounds.

use std::collections::BTreeMap;

use num::traits::Signed;
use num::traits::Zero;

use crate::error::{Error, Violation};
use crate::payoff::feasible_ic_set;
use crate::problem::{CovariateDesign, Problem, SubgroupDesign};
use crate::rational::{half, one, rat, zero, Rational};

/// Probability of treating when the reported posterior is exactly one half.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieBreak {
    pub rho: Rational,
}

impl TieBreak {
    /// Treat on ties; optimal for the designer.
    pub fn treat() -> Self {
        TieBreak { rho: one() }
    }

    pub fn new(rho: Rational) -> Result<Self, Error> {
        if rho.is_negative() || rho > one() {
            return Err(Error::domain("rho", "must be in [0, 1]"));
        }
        Ok(TieBreak { rho })
    }
}

impl Default for TieBreak {
    fn default() -> Self {
        TieBreak::treat()
    }
}

/// One cell of a joint law: mass over `(subgroup, x1)` and the conditional
/// probability of needing treatment there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub mass: Rational,
    pub y1_prob: Rational,
}

/// A finite-support joint law over `(subgroup, x1, outcome)`, stored as the
/// covariate marginal plus per-cell outcome conditionals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDistribution {
    pub cells: BTreeMap<String, BTreeMap<String, Cell>>,
}

impl JointDistribution {
    pub fn new() -> Self {
        JointDistribution { cells: BTreeMap::new() }
    }

    pub fn insert(
        &mut self,
        subgroup: impl Into<String>,
        x1: impl Into<String>,
        mass: Rational,
        y1_prob: Rational,
    ) {
        self.cells
            .entry(subgroup.into())
            .or_default()
            .insert(x1.into(), Cell { mass, y1_prob });
    }

    /// Builds the law with the marginal implied by `design` and the given
    /// per-cell conditionals.
    pub fn from_design(
        problem: &Problem,
        design: &CovariateDesign,
        y1: &BTreeMap<String, BTreeMap<String, Rational>>,
    ) -> Result<Self, Error> {
        let mut joint = JointDistribution::new();
        for s in &problem.subgroups {
            let sd = design
                .by_subgroup
                .get(&s.label)
                .ok_or_else(|| Error::domain("design", format!("missing subgroup {}", s.label)))?;
            for atom in &sd.atoms {
                let prob = y1
                    .get(&s.label)
                    .and_then(|m| m.get(&atom.label))
                    .cloned()
                    .ok_or_else(|| {
                        Error::domain(
                            "y1_prob",
                            format!("missing conditional for ({}, {})", s.label, atom.label),
                        )
                    })?;
                joint.insert(&s.label, &atom.label, &s.weight * &atom.mass, prob);
            }
        }
        Ok(joint)
    }

    pub fn cell(&self, subgroup: &str, x1: &str) -> Option<&Cell> {
        self.cells.get(subgroup).and_then(|m| m.get(x1))
    }
}

impl Default for JointDistribution {
    fn default() -> Self {
        JointDistribution::new()
    }
}

/// Checks consistency with the designer's information: the covariate
/// marginal must equal the design exactly, each subgroup's aggregate need
/// rate must equal `p`, and every positive-mass cell's conditional must
/// respect the subgroup's bounds. Returns the full violation list (empty
/// means admissible).
pub fn check_admissible(
    joint: &JointDistribution,
    problem: &Problem,
    design: &CovariateDesign,
) -> Vec<Violation> {
    let mut out = Vec::new();
    for s in &problem.subgroups {
        let field = format!("P[{}]", s.label);
        let sd = match design.by_subgroup.get(&s.label) {
            Some(sd) => sd,
            None => {
                out.push(Violation::new(&field, "design has no such subgroup"));
                continue;
            }
        };
        let cells = match joint.cells.get(&s.label) {
            Some(c) => c,
            None => {
                out.push(Violation::new(&field, "missing subgroup"));
                continue;
            }
        };
        for atom in &sd.atoms {
            match cells.get(&atom.label) {
                None => out.push(Violation::new(
                    format!("{field}.{}", atom.label),
                    "missing cell for design atom",
                )),
                Some(cell) => {
                    let expected = &s.weight * &atom.mass;
                    if cell.mass != expected {
                        out.push(Violation::new(
                            format!("{field}.{}", atom.label),
                            format!("mass {} != design mass {expected}", cell.mass),
                        ));
                    }
                    if cell.y1_prob.is_negative() || cell.y1_prob > one() {
                        out.push(Violation::new(
                            format!("{field}.{}", atom.label),
                            "y1_prob outside [0, 1]",
                        ));
                    } else if cell.mass.is_positive() && !s.tau.contains(&cell.y1_prob) {
                        out.push(Violation::new(
                            format!("{field}.{}", atom.label),
                            format!(
                                "y1_prob {} outside tau bounds [{}, {}]",
                                cell.y1_prob, s.tau.lower, s.tau.upper
                            ),
                        ));
                    }
                }
            }
        }
        for label in cells.keys() {
            if !sd.atoms.iter().any(|a| &a.label == label) {
                out.push(Violation::new(
                    format!("{field}.{label}"),
                    "cell not in design support",
                ));
            }
        }
        // Aggregate rate: sum of mass * y1_prob must equal weight * p.
        let rate: Rational = cells
            .values()
            .map(|c| &c.mass * &c.y1_prob)
            .fold(zero(), |acc, v| acc + v);
        let expected = &s.weight * &s.p;
        if rate != expected {
            out.push(Violation::new(
                field,
                format!("P(Y=1) = {} != {} within subgroup", rate / &s.weight, s.p),
            ));
        }
    }
    out
}

/// The designer's treatment probability at one cell: treat when the
/// reported posterior exceeds one half, randomize with `rho` at exactly one
/// half. Zero-mass cells have no posterior and are an error.
pub fn designer_action(
    report: &JointDistribution,
    subgroup: &str,
    x1: &str,
    tie: &TieBreak,
) -> Result<Rational, Error> {
    let cell = report
        .cell(subgroup, x1)
        .ok_or_else(|| Error::domain("cell", format!("no cell ({subgroup}, {x1})")))?;
    if cell.mass.is_zero() {
        return Err(Error::ZeroMassCell { subgroup: subgroup.into(), x1: x1.into() });
    }
    let h = half();
    Ok(if cell.y1_prob > h {
        one()
    } else if cell.y1_prob == h {
        tie.rho.clone()
    } else {
        zero()
    })
}

/// Expected payoff `U(P, P*)`: the designer acts on the report, outcomes
/// follow the truth. Both laws must be admissible for the same design
/// (their shared covariate marginal), which is checked first.
pub fn expected_payoff(
    report: &JointDistribution,
    truth: &JointDistribution,
    problem: &Problem,
    tie: &TieBreak,
) -> Result<Rational, Error> {
    let design = marginal_design(report, problem)?;
    let mut violations = check_admissible(report, problem, &design);
    violations.extend(check_admissible(truth, problem, &design));
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let mut total = zero();
    for (subgroup, cells) in &truth.cells {
        for (x1, cell) in cells {
            if cell.mass.is_zero() {
                continue;
            }
            let action = designer_action(report, subgroup, x1, tie)?;
            if action.is_zero() {
                continue;
            }
            total += &cell.mass * action * (rat(2, 1) * &cell.y1_prob - one());
        }
    }
    Ok(total)
}

/// Recovers the covariate design from a joint law's marginal masses.
fn marginal_design(joint: &JointDistribution, problem: &Problem) -> Result<CovariateDesign, Error> {
    let mut design = CovariateDesign::new();
    for s in &problem.subgroups {
        let cells = joint
            .cells
            .get(&s.label)
            .ok_or_else(|| Error::domain("P", format!("missing subgroup {}", s.label)))?;
        let atoms: Vec<(String, Rational)> = cells
            .iter()
            .map(|(x1, cell)| (x1.clone(), &cell.mass / &s.weight))
            .collect();
        design.insert(&s.label, SubgroupDesign::new(atoms));
    }
    Ok(design)
}

const BEST_RESPONSE_SUPPORT_CAP: usize = 20;

/// The advisor's optimal admissible report against a fixed truth.
///
/// Within each subgroup, enumerates the treated events whose mass is
/// incentive-compatible (open endpoints of the feasible set excluded by
/// exact comparison), scores each by the true payoff of treating it, picks
/// the extremal one (maximal when `aligned`, minimal otherwise, ties to the
/// lexicographically smallest event), and constructs witness posteriors:
/// a uniform level at least one half on the treated event, a level strictly
/// below one half elsewhere, averaging to the subgroup rate within the tau
/// bounds.
pub fn ai_best_response(
    truth: &JointDistribution,
    problem: &Problem,
    design: &CovariateDesign,
    aligned: bool,
    _tie: &TieBreak,
) -> Result<JointDistribution, Error> {
    let violations = check_admissible(truth, problem, design);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let mut report = JointDistribution::new();
    for s in &problem.subgroups {
        let sd = &design.by_subgroup[&s.label];
        if sd.support() > BEST_RESPONSE_SUPPORT_CAP {
            return Err(Error::SupportTooLarge {
                support: sd.support(),
                cap: BEST_RESPONSE_SUPPORT_CAP,
            });
        }
        let bp = feasible_ic_set(&s.p, &s.tau)?;
        let cells = &truth.cells[&s.label];

        // Enumerate treated events; score = sum of design mass * (2 y* - 1).
        let n = sd.support();
        let mut chosen: Option<(Rational, Vec<String>, Rational)> = None;
        for bits in 0u32..(1 << n) {
            let mut q = zero();
            let mut score = zero();
            let mut event = Vec::new();
            for (i, atom) in sd.atoms.iter().enumerate() {
                if bits & (1 << i) != 0 {
                    q += &atom.mass;
                    let y_true = &cells[&atom.label].y1_prob;
                    score += &atom.mass * (rat(2, 1) * y_true - one());
                    event.push(atom.label.clone());
                }
            }
            if !bp.contains(&q) {
                continue;
            }
            event.sort();
            let better = match &chosen {
                None => true,
                Some((s0, e0, _)) => {
                    let strictly = if aligned { score > *s0 } else { score < *s0 };
                    strictly || (score == *s0 && event < *e0)
                }
            };
            if better {
                chosen = Some((score, event, q));
            }
        }
        let (_, event, q) = chosen.ok_or_else(|| {
            Error::domain("design", format!("no feasible treated event in subgroup {}", s.label))
        })?;

        let (pi1, pi0) = witness_posteriors(&s.p, &s.tau, &q)?;
        for atom in &sd.atoms {
            let treated = event.binary_search(&atom.label).is_ok();
            report.insert(
                &s.label,
                &atom.label,
                &s.weight * &atom.mass,
                if treated { pi1.clone() } else { pi0.clone() },
            );
        }
    }
    Ok(report)
}

/// Two-level posteriors inducing treatment exactly on a mass-`q` event:
/// `pi1` as high as the bounds allow, `pi0` solved from the mean
/// constraint. Feasibility of `q` guarantees `pi1 >= 1/2 > pi0`.
fn witness_posteriors(
    p: &Rational,
    tau: &crate::problem::TauBounds,
    q: &Rational,
) -> Result<(Rational, Rational), Error> {
    if q.is_zero() {
        return Ok((one(), p.clone()));
    }
    if q == &one() {
        return Ok((p.clone(), zero()));
    }
    let rest = one() - q;
    let pi1 = std::cmp::min(tau.upper.clone(), (p - &rest * &tau.lower) / q);
    let pi0 = (p - q * &pi1) / &rest;
    debug_assert!(pi1 >= half() && pi0 < half());
    Ok((pi1, pi0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Problem, Subgroup, TauBounds};
    use crate::rational::rat;

    /// The introduction's scenario: 40% need treatment, binary covariate
    /// splitting the population 40/60, truth perfectly correlated.
    fn intro() -> (Problem, CovariateDesign, JointDistribution, JointDistribution) {
        let problem = Problem::new(vec![Subgroup::new("all", one(), rat(2, 5))]);
        let design = CovariateDesign::single("all", SubgroupDesign::bernoulli(rat(2, 5)));
        let mut truth = JointDistribution::new();
        truth.insert("all", "1", rat(2, 5), one());
        truth.insert("all", "0", rat(3, 5), zero());
        let mut report = JointDistribution::new();
        report.insert("all", "1", rat(2, 5), zero());
        report.insert("all", "0", rat(3, 5), rat(2, 3));
        (problem, design, truth, report)
    }

    #[test]
    fn intro_report_is_admissible() {
        let (problem, design, truth, report) = intro();
        assert!(check_admissible(&report, &problem, &design).is_empty());
        assert!(check_admissible(&truth, &problem, &design).is_empty());
    }

    #[test]
    fn perturbed_rate_is_caught() {
        let (problem, design, _, mut report) = intro();
        report.insert("all", "0", rat(3, 5), rat(7, 10));
        let violations = check_admissible(&report, &problem, &design);
        assert!(violations.iter().any(|v| v.constraint.contains("P(Y=1) = 21/50 != 2/5")));
    }

    #[test]
    fn tau_bounds_are_enforced() {
        let (mut problem, design, _, report) = intro();
        problem.subgroups[0].tau = TauBounds::new(rat(1, 10), rat(9, 10));
        let violations = check_admissible(&report, &problem, &design);
        assert!(violations.iter().any(|v| v.constraint.contains("outside tau bounds")));
    }

    #[test]
    fn designer_action_rules() {
        let (_, _, _, report) = intro();
        let tie = TieBreak::treat();
        assert_eq!(designer_action(&report, "all", "0", &tie).unwrap(), one());
        assert_eq!(designer_action(&report, "all", "1", &tie).unwrap(), zero());

        let mut tied = JointDistribution::new();
        tied.insert("all", "1", rat(4, 5), half());
        tied.insert("all", "0", rat(1, 5), zero());
        assert_eq!(designer_action(&tied, "all", "1", &tie).unwrap(), one());
        let rho = TieBreak::new(rat(3, 10)).unwrap();
        assert_eq!(designer_action(&tied, "all", "1", &rho).unwrap(), rat(3, 10));

        let mut zero_mass = JointDistribution::new();
        zero_mass.insert("all", "1", zero(), half());
        assert!(matches!(
            designer_action(&zero_mass, "all", "1", &tie),
            Err(Error::ZeroMassCell { .. })
        ));
    }

    #[test]
    fn intro_payoff_is_minus_three_fifths() {
        let (problem, _, truth, report) = intro();
        let payoff = expected_payoff(&report, &truth, &problem, &TieBreak::treat()).unwrap();
        assert_eq!(payoff, rat(-3, 5));
    }

    #[test]
    fn truthful_trust_report_earns_p() {
        let (problem, _, truth, _) = intro();
        let payoff = expected_payoff(&truth, &truth, &problem, &TieBreak::treat()).unwrap();
        assert_eq!(payoff, rat(2, 5));
    }

    #[test]
    fn pessimistic_report_treats_no_one() {
        let (problem, _, truth, _) = intro();
        let mut report = JointDistribution::new();
        // Uninformative report: every posterior below 1/2, nobody treated.
        report.insert("all", "1", rat(2, 5), rat(2, 5));
        report.insert("all", "0", rat(3, 5), rat(2, 5));
        let payoff = expected_payoff(&report, &truth, &problem, &TieBreak::treat()).unwrap();
        assert_eq!(payoff, zero());
    }

    #[test]
    fn inadmissible_inputs_are_rejected() {
        let (problem, _, truth, _) = intro();
        let mut report = JointDistribution::new();
        report.insert("all", "1", rat(2, 5), one());
        report.insert("all", "0", rat(3, 5), rat(1, 5));
        let err = expected_payoff(&report, &truth, &problem, &TieBreak::treat());
        assert!(matches!(err, Err(Error::Invalid(_))));
    }

    #[test]
    fn misaligned_best_response_reproduces_intro() {
        let (problem, design, truth, _) = intro();
        let tie = TieBreak::treat();
        let response = ai_best_response(&truth, &problem, &design, false, &tie).unwrap();
        assert!(check_admissible(&response, &problem, &design).is_empty());
        let payoff = expected_payoff(&response, &truth, &problem, &tie).unwrap();
        assert_eq!(payoff, rat(-3, 5));
        // Treated event is the 3/5-mass cell x1 = 0.
        assert!(response.cell("all", "0").unwrap().y1_prob >= half());
        assert!(response.cell("all", "1").unwrap().y1_prob < half());
    }

    #[test]
    fn aligned_best_response_reproduces_intro() {
        let (problem, design, truth, _) = intro();
        let tie = TieBreak::treat();
        let response = ai_best_response(&truth, &problem, &design, true, &tie).unwrap();
        let payoff = expected_payoff(&response, &truth, &problem, &tie).unwrap();
        assert_eq!(payoff, rat(2, 5));
    }

    #[test]
    fn uninformative_truth_lets_misalignment_cost_maximal_mass() {
        // With y* identically p < 1/3, the misaligned advisor treats the
        // largest feasible mass and the payoff is -(mass)(1 - 2p).
        let p = rat(1, 4);
        let problem = Problem::new(vec![Subgroup::new("all", one(), p.clone())]);
        let design = CovariateDesign::single(
            "all",
            SubgroupDesign::new(vec![("a", rat(3, 10)), ("b", rat(3, 10)), ("c", rat(2, 5))]),
        );
        let mut truth = JointDistribution::new();
        for (x1, mass) in [("a", rat(3, 10)), ("b", rat(3, 10)), ("c", rat(2, 5))] {
            truth.insert("all", x1, mass, p.clone());
        }
        let tie = TieBreak::treat();
        let response = ai_best_response(&truth, &problem, &design, false, &tie).unwrap();
        let payoff = expected_payoff(&response, &truth, &problem, &tie).unwrap();
        // Feasible set is [0, 1/2]; the largest attainable event mass is 2/5
        // (3/10 + 3/10 overshoots). Payoff = -(2/5)(1/2).
        assert_eq!(payoff, rat(-1, 5));
    }

    #[test]
    fn best_response_ties_break_lexicographically() {
        let p = rat(1, 4);
        let problem = Problem::new(vec![Subgroup::new("all", one(), p.clone())]);
        let design = CovariateDesign::single(
            "all",
            SubgroupDesign::new(vec![("x", rat(2, 5)), ("y", rat(2, 5)), ("z", rat(1, 5))]),
        );
        let mut truth = JointDistribution::new();
        for (x1, mass) in [("x", rat(2, 5)), ("y", rat(2, 5)), ("z", rat(1, 5))] {
            truth.insert("all", x1, mass, p.clone());
        }
        let tie = TieBreak::treat();
        // {x} and {y} are the only minimizers (2/5 + anything overshoots the
        // feasible cap 1/2); the lexicographically smaller event wins.
        let response = ai_best_response(&truth, &problem, &design, false, &tie).unwrap();
        assert!(response.cell("all", "x").unwrap().y1_prob >= half());
        assert!(response.cell("all", "y").unwrap().y1_prob < half());
    }

    #[test]
    fn best_response_output_is_always_admissible() {
        let cases = [
            (rat(2, 5), TauBounds::full()),
            (rat(13, 20), TauBounds::full()),
            (rat(2, 5), TauBounds::new(rat(1, 10), rat(9, 10))),
            (rat(11, 20), TauBounds::new(rat(1, 5), rat(19, 20))),
        ];
        for (p, tau) in cases {
            let problem =
                Problem::new(vec![Subgroup::new("all", one(), p.clone()).with_tau(tau.clone())]);
            let design = CovariateDesign::single(
                "all",
                SubgroupDesign::new(vec![("a", rat(1, 5)), ("b", rat(3, 10)), ("c", rat(1, 2))]),
            );
            let mut truth = JointDistribution::new();
            for (x1, mass) in [("a", rat(1, 5)), ("b", rat(3, 10)), ("c", rat(1, 2))] {
                truth.insert("all", x1, mass, p.clone());
            }
            for aligned in [true, false] {
                let response =
                    ai_best_response(&truth, &problem, &design, aligned, &TieBreak::treat())
                        .unwrap();
                let violations = check_admissible(&response, &problem, &design);
                assert!(violations.is_empty(), "violations at p = {p}: {violations:?}");
            }
        }
    }

    #[test]
    fn tie_break_payoff_scales_with_rho() {
        // Report with its whole treated event at posterior exactly 1/2.
        let p = rat(2, 5);
        let problem = Problem::new(vec![Subgroup::new("all", one(), p)]);
        let mut report = JointDistribution::new();
        report.insert("all", "1", rat(4, 5), half());
        report.insert("all", "0", rat(1, 5), zero());
        let mut truth = JointDistribution::new();
        truth.insert("all", "1", rat(4, 5), rat(1, 4));
        truth.insert("all", "0", rat(1, 5), one());
        let base = expected_payoff(&report, &truth, &problem, &TieBreak::treat()).unwrap();
        assert_eq!(base, rat(-2, 5));
        for rho in [zero(), rat(1, 4), half(), one()] {
            let tie = TieBreak::new(rho.clone()).unwrap();
            let payoff = expected_payoff(&report, &truth, &problem, &tie).unwrap();
            assert_eq!(payoff, rho * &base);
        }
    }
}
