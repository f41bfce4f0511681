//! Problem inputs and shared result types.
//!
//! A [`Problem`] is the designer's prior information: a partition of the
//! population into subgroups, each with a weight and a treatment-need rate,
//! plus optional per-subgroup informativeness bounds. All types here are
//! immutable after validation and safe to share across threads.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use num::traits::Signed;

use crate::error::{Error, Violation};
use crate::rational::{self, one, zero, Rational};

/// Bounds `[lower, upper]` on the conditional treatment-need probability the
/// auxiliary covariate may induce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauBounds {
    pub lower: Rational,
    pub upper: Rational,
}

impl TauBounds {
    /// The unconstrained bounds `(0, 1)` of the baseline model.
    pub fn full() -> Self {
        TauBounds { lower: zero(), upper: one() }
    }

    pub fn new(lower: Rational, upper: Rational) -> Self {
        TauBounds { lower, upper }
    }

    pub fn is_full(&self) -> bool {
        self.lower == zero() && self.upper == one()
    }

    /// Structural check: `0 <= lower <= upper <= 1`.
    pub fn check(&self, field: &str, out: &mut Vec<Violation>) {
        if self.lower.is_negative() {
            out.push(Violation::new(format!("{field}.lower"), "must be >= 0"));
        }
        if self.upper > one() {
            out.push(Violation::new(format!("{field}.upper"), "must be <= 1"));
        }
        if self.lower > self.upper {
            out.push(Violation::new(field, "lower <= upper fails"));
        }
    }

    pub fn contains(&self, p: &Rational) -> bool {
        &self.lower <= p && p <= &self.upper
    }
}

/// One covariate cell of the prior data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    pub label: String,
    /// Population share; positive, and all shares sum to one.
    pub weight: Rational,
    /// Fraction of the subgroup that needs treatment.
    pub p: Rational,
    /// Informativeness bounds for this subgroup; `(0, 1)` when omitted.
    pub tau: TauBounds,
}

impl Subgroup {
    pub fn new(label: impl Into<String>, weight: Rational, p: Rational) -> Self {
        Subgroup { label: label.into(), weight, p, tau: TauBounds::full() }
    }

    pub fn with_tau(mut self, tau: TauBounds) -> Self {
        self.tau = tau;
        self
    }
}

/// The designer's prior information.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub subgroups: Vec<Subgroup>,
}

impl Problem {
    pub fn new(subgroups: Vec<Subgroup>) -> Self {
        Problem { subgroups }
    }

    /// Single-subgroup convenience constructor (weight one).
    pub fn singleton(p: Rational) -> Self {
        Problem::new(vec![Subgroup::new("x0", one(), p)])
    }

    pub fn subgroup(&self, label: &str) -> Option<&Subgroup> {
        self.subgroups.iter().find(|s| s.label == label)
    }
}

/// Returns the problem unchanged iff every invariant holds; otherwise the
/// full list of violations, each naming field and constraint.
///
/// Checked invariants: nonempty subgroup list, unique labels, weights
/// positive and summing to exactly one (rational arithmetic, zero
/// tolerance), `p` within `[0, 1]`, structurally valid tau bounds, and
/// `lower <= p <= upper` per subgroup.
pub fn validate_problem(problem: Problem) -> Result<Problem, Vec<Violation>> {
    let mut violations = Vec::new();
    if problem.subgroups.is_empty() {
        violations.push(Violation::new("subgroups", "must be nonempty"));
    }

    let mut seen = BTreeSet::new();
    let mut weight_sum = zero();
    for (i, s) in problem.subgroups.iter().enumerate() {
        let field = format!("subgroups[{i}] ({})", s.label);
        if !seen.insert(s.label.clone()) {
            violations.push(Violation::new(format!("{field}.label"), "duplicate label"));
        }
        if !s.weight.is_positive() {
            violations.push(Violation::new(format!("{field}.weight"), "must be > 0"));
        }
        if s.weight > one() {
            violations.push(Violation::new(format!("{field}.weight"), "must be <= 1"));
        }
        if !rational::is_probability(&s.p) {
            violations.push(Violation::new(format!("{field}.p"), "must be in [0, 1]"));
        }
        s.tau.check(&format!("{field}.tau"), &mut violations);
        if s.p < s.tau.lower {
            violations.push(Violation::new(format!("{field}.tau"), "lower <= p fails"));
        }
        if s.p > s.tau.upper {
            violations.push(Violation::new(format!("{field}.tau"), "p <= upper fails"));
        }
        weight_sum += &s.weight;
    }
    if !problem.subgroups.is_empty() && weight_sum != one() {
        violations.push(Violation::new(
            "subgroups.weight",
            format!("weights sum to {weight_sum}, expected 1"),
        ));
    }

    if violations.is_empty() {
        Ok(problem)
    } else {
        Err(violations)
    }
}

/// One atom of a covariate design: an `x1` value and its probability mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignAtom {
    pub label: String,
    pub mass: Rational,
}

/// Distribution of the auxiliary covariate within one subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupDesign {
    pub atoms: Vec<DesignAtom>,
}

impl SubgroupDesign {
    pub fn new(atoms: Vec<(impl Into<String>, Rational)>) -> Self {
        SubgroupDesign {
            atoms: atoms
                .into_iter()
                .map(|(label, mass)| DesignAtom { label: label.into(), mass })
                .collect(),
        }
    }

    /// Binary covariate with `P(X1 = "1") = q`.
    pub fn bernoulli(q: Rational) -> Self {
        let rest = one() - &q;
        SubgroupDesign::new(vec![("1", q), ("0", rest)])
    }

    /// A covariate carrying no information.
    pub fn constant() -> Self {
        SubgroupDesign::new(vec![("c", one())])
    }

    pub fn support(&self) -> usize {
        self.atoms.len()
    }

    pub fn check(&self, field: &str, out: &mut Vec<Violation>) {
        let mut seen = BTreeSet::new();
        let mut total = zero();
        for atom in &self.atoms {
            if atom.mass.is_negative() {
                out.push(Violation::new(
                    format!("{field}.{}", atom.label),
                    "mass must be >= 0",
                ));
            }
            if !seen.insert(atom.label.clone()) {
                out.push(Violation::new(
                    format!("{field}.{}", atom.label),
                    "duplicate x1 label",
                ));
            }
            total += &atom.mass;
        }
        if total != one() {
            out.push(Violation::new(field, format!("masses sum to {total}, expected 1")));
        }
    }
}

/// The designer's choice: a finite covariate distribution per subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovariateDesign {
    pub by_subgroup: BTreeMap<String, SubgroupDesign>,
}

impl CovariateDesign {
    pub fn new() -> Self {
        CovariateDesign { by_subgroup: BTreeMap::new() }
    }

    pub fn single(label: impl Into<String>, design: SubgroupDesign) -> Self {
        let mut map = BTreeMap::new();
        map.insert(label.into(), design);
        CovariateDesign { by_subgroup: map }
    }

    pub fn insert(&mut self, label: impl Into<String>, design: SubgroupDesign) {
        self.by_subgroup.insert(label.into(), design);
    }

    /// Validates masses and label uniqueness, and that the design covers
    /// exactly the problem's subgroups.
    pub fn validate_for(&self, problem: &Problem) -> Vec<Violation> {
        let mut out = Vec::new();
        for s in &problem.subgroups {
            match self.by_subgroup.get(&s.label) {
                Some(d) => d.check(&format!("design.{}", s.label), &mut out),
                None => out.push(Violation::new(
                    format!("design.{}", s.label),
                    "missing subgroup design",
                )),
            }
        }
        for label in self.by_subgroup.keys() {
            if problem.subgroup(label).is_none() {
                out.push(Violation::new(
                    format!("design.{label}"),
                    "no such subgroup in problem",
                ));
            }
        }
        out
    }
}

impl Default for CovariateDesign {
    fn default() -> Self {
        CovariateDesign::new()
    }
}

/// A (worst-case, best-case) payoff pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffPoint {
    pub worst: Rational,
    pub best: Rational,
}

impl PayoffPoint {
    pub fn new(worst: Rational, best: Rational) -> Self {
        PayoffPoint { worst, best }
    }

    pub fn diagonal(value: Rational) -> Self {
        PayoffPoint { worst: value.clone(), best: value }
    }

    /// `alpha * worst + (1 - alpha) * best`.
    pub fn score(&self, alpha: &Rational) -> Rational {
        alpha * &self.worst + (one() - alpha) * &self.best
    }

    /// Weak dominance: at least as good on both coordinates.
    pub fn dominates(&self, other: &PayoffPoint) -> bool {
        self.worst >= other.worst && self.best >= other.best
    }

    pub fn scaled(&self, factor: &Rational) -> PayoffPoint {
        PayoffPoint { worst: factor * &self.worst, best: factor * &self.best }
    }

    pub fn plus(&self, other: &PayoffPoint) -> PayoffPoint {
        PayoffPoint {
            worst: &self.worst + &other.worst,
            best: &self.best + &other.best,
        }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (rational::to_f64(&self.worst), rational::to_f64(&self.best))
    }

    /// Structural invariant: `worst <= best`, both within `[-1, 1]`.
    pub fn is_valid(&self) -> bool {
        self.worst <= self.best
            && self.worst >= rational::rat(-1, 1)
            && self.best <= one()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Trust,
    Hedge,
    Distrust,
    Mixture,
}

impl VertexKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VertexKind::Trust => "trust",
            VertexKind::Hedge => "hedge",
            VertexKind::Distrust => "distrust",
            VertexKind::Mixture => "mixture",
        }
    }
}

/// A design, or a two-point randomization over designs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DesignChoice {
    Pure(CovariateDesign),
    Mixture {
        first: CovariateDesign,
        second: CovariateDesign,
        /// Probability of playing `first`.
        weight: Rational,
    },
}

/// A frontier vertex: a payoff pair together with a design implementing it.
///
/// `limit` marks points that are only limit-implemented; the stored design
/// is then an explicit epsilon-perturbation whose payoffs converge to
/// `payoff` as epsilon shrinks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignPoint {
    pub payoff: PayoffPoint,
    pub kind: VertexKind,
    pub design: DesignChoice,
    pub limit: bool,
}

/// A maximal straight piece of the frontier, as vertex indices plus slope
/// in the (worst, best) plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub from: usize,
    pub to: usize,
    pub slope: Rational,
}

/// The efficient frontier: an ordered piecewise-linear chain of undominated
/// payoff pairs, distrust end first.
///
/// Invariants enforced by [`Frontier::from_vertices`]: `worst` strictly
/// decreasing and `best` strictly increasing along the chain (so no vertex
/// dominates another), every slope strictly negative, and slopes strictly
/// increasing in storage order (concavity; equivalently slopes weakly
/// decrease when traversed trust to distrust).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frontier {
    pub vertices: Vec<DesignPoint>,
    pub segments: Vec<Segment>,
    /// Regime annotations (knife-edge flags and the like).
    pub notes: Vec<String>,
}

impl Frontier {
    pub fn from_vertices(vertices: Vec<DesignPoint>) -> Result<Frontier, Error> {
        Frontier::with_notes(vertices, Vec::new())
    }

    pub fn with_notes(vertices: Vec<DesignPoint>, notes: Vec<String>) -> Result<Frontier, Error> {
        if vertices.is_empty() {
            return Err(Error::NonConcaveChain("empty vertex list".into()));
        }
        for v in &vertices {
            if !v.payoff.is_valid() {
                return Err(Error::NonConcaveChain(format!(
                    "invalid payoff pair ({}, {})",
                    v.payoff.worst, v.payoff.best
                )));
            }
        }
        let mut segments = Vec::new();
        for i in 1..vertices.len() {
            let prev = &vertices[i - 1].payoff;
            let next = &vertices[i].payoff;
            if next.worst >= prev.worst || next.best <= prev.best {
                return Err(Error::NonConcaveChain(format!(
                    "vertex {i} does not move strictly up-left: ({}, {}) then ({}, {})",
                    prev.worst, prev.best, next.worst, next.best
                )));
            }
            let slope = (&next.best - &prev.best) / (&next.worst - &prev.worst);
            if let Some(last) = segments.last() {
                let last: &Segment = last;
                if slope <= last.slope {
                    return Err(Error::NonConcaveChain(format!(
                        "slope {slope} after {} breaks concavity",
                        last.slope
                    )));
                }
            }
            segments.push(Segment { from: i - 1, to: i, slope });
        }
        Ok(Frontier { vertices, segments, notes })
    }

    /// Distrust-end vertex.
    pub fn distrust(&self) -> &DesignPoint {
        &self.vertices[0]
    }

    /// Trust-end vertex.
    pub fn trust(&self) -> &DesignPoint {
        self.vertices.last().expect("frontier is nonempty")
    }

    pub fn payoffs(&self) -> Vec<PayoffPoint> {
        self.vertices.iter().map(|v| v.payoff.clone()).collect()
    }

    /// Largest best-case payoff available on the chain at worst-case level
    /// at least `worst`, or `None` if `worst` exceeds the distrust end.
    pub fn best_at(&self, worst: &Rational) -> Option<Rational> {
        let right = &self.vertices[0].payoff;
        if worst > &right.worst {
            return None;
        }
        let left = &self.trust().payoff;
        if worst <= &left.worst {
            return Some(left.best.clone());
        }
        // worst lies strictly between two vertices; interpolate.
        for seg in &self.segments {
            let a = &self.vertices[seg.from].payoff;
            let b = &self.vertices[seg.to].payoff;
            if worst <= &a.worst && worst >= &b.worst {
                return Some(&a.best + &seg.slope * (worst - &a.worst));
            }
        }
        None
    }

    /// Whether `point` is weakly dominated by the frontier chain.
    pub fn dominates_point(&self, point: &PayoffPoint) -> bool {
        match self.best_at(&point.worst) {
            Some(best) => point.best <= best,
            None => false,
        }
    }

    /// Convex combination of the two endpoints of segment `segment`, with
    /// probability `weight` on the `from` (distrust-side) vertex.
    pub fn mixture_point(&self, segment: usize, weight: Rational) -> Result<DesignPoint, Error> {
        if segment >= self.segments.len() {
            return Err(Error::domain("segment", "no such segment"));
        }
        if weight.is_negative() || weight > one() {
            return Err(Error::domain("weight", "mixture weight must be in [0, 1]"));
        }
        let seg = &self.segments[segment];
        let a = &self.vertices[seg.from];
        let b = &self.vertices[seg.to];
        let rest = one() - &weight;
        let payoff = a.payoff.scaled(&weight).plus(&b.payoff.scaled(&rest));
        let design = DesignChoice::Mixture {
            first: pure_design(&a.design).clone(),
            second: pure_design(&b.design).clone(),
            weight: weight.clone(),
        };
        Ok(DesignPoint { payoff, kind: VertexKind::Mixture, design, limit: a.limit || b.limit })
    }
}

fn pure_design(choice: &DesignChoice) -> &CovariateDesign {
    match choice {
        DesignChoice::Pure(d) => d,
        DesignChoice::Mixture { first, .. } => first,
    }
}
