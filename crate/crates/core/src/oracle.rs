//! Independent brute-force verification of the closed forms.
//!
//! Nothing here calls the closed-form payoff or frontier functions on its
//! checking path. Feasibility of a treated fraction is re-derived from the
//! raw constraints (posteriors bracketing one half, within the bounds,
//! averaging to the subgroup rate), and Nature's inner extremization is
//! solved either on an exact rational interval (`AnalyticInner`) or by
//! scanning a posterior grid (`Grid`). The dominance checker then draws
//! seeded random designs, computes their payoffs through this independent
//! path, and asserts they fall weakly below the closed-form frontier.

use num::traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::frontier_aggregate::aggregate_frontier;
use crate::frontier_single::evaluate_design;
use crate::problem::{
    DesignChoice, Frontier, PayoffPoint, Problem, SubgroupDesign, TauBounds,
};
use crate::rational::{self, half, one, rat, zero, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Posterior grid scan; fully independent, tolerance `2 / grid_n`.
    Grid,
    /// Subset enumeration with the inner extremization solved exactly on
    /// the admissible interval.
    AnalyticInner,
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub mode: OracleMode,
    /// Posterior grid resolution for `Grid` mode.
    pub grid_n: u32,
    /// Random designs drawn per dominance check.
    pub samples: u32,
    pub seed: u64,
    /// Acceptable closed-form-versus-oracle gap.
    pub tolerance: f64,
    /// Cap on design support for subset enumeration.
    pub max_support: usize,
}

impl OracleConfig {
    pub fn analytic(seed: u64) -> Self {
        OracleConfig {
            mode: OracleMode::AnalyticInner,
            grid_n: 4096,
            samples: 200,
            seed,
            tolerance: 1e-9,
            max_support: 5,
        }
    }

    pub fn grid(seed: u64) -> Self {
        OracleConfig {
            mode: OracleMode::Grid,
            grid_n: 4096,
            samples: 200,
            seed,
            tolerance: 2.0 / 4096.0,
            max_support: 5,
        }
    }

    pub fn with_samples(mut self, samples: u32) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_grid_n(mut self, grid_n: u32) -> Self {
        self.grid_n = grid_n;
        if self.mode == OracleMode::Grid {
            self.tolerance = 2.0 / grid_n as f64;
        }
        self
    }

    fn check(&self) -> Result<(), Error> {
        if self.grid_n < 64 {
            return Err(Error::domain("grid_n", "must be at least 64"));
        }
        if self.tolerance <= 0.0 {
            return Err(Error::domain("tolerance", "must be positive"));
        }
        Ok(())
    }
}

/// A treated fraction together with the event realizing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibleQ {
    pub q: Rational,
    pub event: Vec<String>,
}

/// Result of the feasibility enumeration. In grid mode, fractions that pass
/// only with tolerance slack land in `boundary_ambiguous` instead of being
/// asserted feasible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibleSet {
    pub feasible: Vec<FeasibleQ>,
    pub boundary_ambiguous: Vec<FeasibleQ>,
}

impl FeasibleSet {
    pub fn qs(&self) -> Vec<Rational> {
        let mut qs: Vec<Rational> = self.feasible.iter().map(|f| f.q.clone()).collect();
        qs.sort();
        qs.dedup();
        qs
    }
}

/// Exact feasibility of a treated fraction from the raw constraints.
fn feasible_exact(p: &Rational, tau: &TauBounds, q: &Rational) -> bool {
    let h = half();
    if q.is_zero() {
        // The untreated posterior is exactly p; needs p strictly below 1/2.
        return p < &h;
    }
    if q == &one() {
        return p >= &h;
    }
    if tau.upper < h || tau.lower >= h {
        return false;
    }
    let pi1_lo = std::cmp::max(tau.lower.clone(), h.clone());
    let lo = q * pi1_lo + (one() - q) * &tau.lower;
    let hi = q * &tau.upper + (one() - q) * h;
    &lo <= p && p < &hi
}

/// Grid feasibility with slack on every constraint. Both posterior axes
/// are scanned: whichever of the pair moves slower under the mean
/// constraint has a grid point near any feasible assignment.
fn feasible_grid(p: f64, tau: (f64, f64), q: &Rational, grid_n: u32, slack: f64) -> bool {
    let (lower, upper) = tau;
    let qf = rational::to_f64(q);
    if qf <= 0.0 {
        return p >= lower - slack && p < 0.5 + slack;
    }
    if qf >= 1.0 {
        return p >= 0.5 - slack && p <= upper + slack;
    }
    let g = grid_n as f64;
    let ok = |pi1: f64, pi0: f64| {
        pi1 >= 0.5 - slack
            && pi1 >= lower - slack
            && pi1 <= upper + slack
            && pi0 >= lower - slack
            && pi0 <= upper + slack
            && pi0 < 0.5 + slack
    };
    for i in 0..=grid_n {
        let x = i as f64 / g;
        let pi0_from_pi1 = (p - qf * x) / (1.0 - qf);
        if ok(x, pi0_from_pi1) {
            return true;
        }
        let pi1_from_pi0 = (p - (1.0 - qf) * x) / qf;
        if ok(pi1_from_pi0, x) {
            return true;
        }
    }
    false
}

fn subset_events(design: &SubgroupDesign) -> Vec<(Rational, Vec<String>)> {
    let n = design.support();
    let mut out = Vec::with_capacity(1 << n);
    for bits in 0u32..(1 << n) {
        let mut q = zero();
        let mut event = Vec::new();
        for (i, atom) in design.atoms.iter().enumerate() {
            if bits & (1 << i) != 0 {
                q += &atom.mass;
                event.push(atom.label.clone());
            }
        }
        event.sort();
        out.push((q, event));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    out
}

/// Enumerates the treated events of `design` that an incentive-compatible
/// report can induce.
pub fn feasible_q_oracle(
    p: &Rational,
    tau: &TauBounds,
    design: &SubgroupDesign,
    config: &OracleConfig,
) -> Result<FeasibleSet, Error> {
    config.check()?;
    if design.support() > config.max_support {
        return Err(Error::SupportTooLarge { support: design.support(), cap: config.max_support });
    }
    let mut feasible = Vec::new();
    let mut ambiguous = Vec::new();
    let pf = rational::to_f64(p);
    let tf = (rational::to_f64(&tau.lower), rational::to_f64(&tau.upper));
    for (q, event) in subset_events(design) {
        match config.mode {
            OracleMode::AnalyticInner => {
                if feasible_exact(p, tau, &q) {
                    feasible.push(FeasibleQ { q, event });
                }
            }
            OracleMode::Grid => {
                let strict = feasible_grid(pf, tf, &q, config.grid_n, -config.tolerance);
                let loose = feasible_grid(pf, tf, &q, config.grid_n, config.tolerance);
                if strict {
                    feasible.push(FeasibleQ { q, event });
                } else if loose {
                    ambiguous.push(FeasibleQ { q, event });
                }
            }
        }
    }
    Ok(FeasibleSet { feasible, boundary_ambiguous: ambiguous })
}

/// Oracle payoff pair; `exact` is populated in analytic-inner mode.
///
/// A float grid cannot resolve the open/closed endpoints of the feasible
/// set, so grid mode reports an envelope: `worst`/`best` extremize over the
/// fractions asserted feasible, `worst_outer`/`best_outer` additionally
/// include the boundary-ambiguous ones. The exact answer must lie between
/// them (within grid resolution); in analytic mode the envelope is a point.
#[derive(Debug, Clone, PartialEq)]
pub struct OraclePoint {
    pub worst: f64,
    pub best: f64,
    pub worst_outer: f64,
    pub best_outer: f64,
    pub exact: Option<PayoffPoint>,
}

/// Nature's extremal payoffs at a fixed treated fraction, solved exactly:
/// extremize `q (2 pi1 - 1)` over `pi1` in the bounds with the untreated
/// posterior `(p - q pi1) / (1 - q)` also in the bounds.
fn inner_extrema_exact(p: &Rational, tau: &TauBounds, q: &Rational) -> (Rational, Rational) {
    if q.is_zero() {
        return (zero(), zero());
    }
    if q == &one() {
        let v = rat(2, 1) * p - one();
        return (v.clone(), v);
    }
    let rest = one() - q;
    let pi1_max = std::cmp::min(tau.upper.clone(), (p - &rest * &tau.lower) / q);
    let pi1_min = std::cmp::max(tau.lower.clone(), (p - &rest * &tau.upper) / q);
    let worst = q * (rat(2, 1) * pi1_min - one());
    let best = q * (rat(2, 1) * pi1_max - one());
    (worst, best)
}

/// As above on a float grid with `1 / grid_n` slack on the bound checks.
/// Scanning both posterior axes keeps the payoff error within
/// `2 / grid_n`: the slower-moving axis of the pair has a grid point within
/// one step of each exact extremum, and a one-step bound overshoot changes
/// the payoff by at most `2 / grid_n`.
fn inner_extrema_grid(p: f64, tau: (f64, f64), q: f64, grid_n: u32) -> (f64, f64) {
    if q <= 0.0 {
        return (0.0, 0.0);
    }
    if q >= 1.0 {
        let v = 2.0 * p - 1.0;
        return (v, v);
    }
    let (lower, upper) = tau;
    let g = grid_n as f64;
    let slack = 1.0 / g;
    let mut worst = f64::INFINITY;
    let mut best = f64::NEG_INFINITY;
    let mut consider = |pi1: f64, pi0: f64| {
        if pi1 < lower - slack || pi1 > upper + slack {
            return;
        }
        if pi0 < lower - slack || pi0 > upper + slack {
            return;
        }
        let value = q * (2.0 * pi1 - 1.0);
        worst = worst.min(value);
        best = best.max(value);
    };
    for i in 0..=grid_n {
        let x = i as f64 / g;
        consider(x, (p - q * x) / (1.0 - q));
        consider((p - (1.0 - q) * x) / q, x);
    }
    (worst, best)
}

/// Worst- and best-case payoffs of a design through the oracle path:
/// enumerate feasible treated fractions, extremize Nature's payoff at each.
pub fn minimax_payoffs_oracle(
    p: &Rational,
    tau: &TauBounds,
    design: &SubgroupDesign,
    config: &OracleConfig,
) -> Result<OraclePoint, Error> {
    let set = feasible_q_oracle(p, tau, design, config)?;
    match config.mode {
        OracleMode::AnalyticInner => {
            let mut worst: Option<Rational> = None;
            let mut best: Option<Rational> = None;
            for f in &set.feasible {
                let (w, b) = inner_extrema_exact(p, tau, &f.q);
                if worst.as_ref().map_or(true, |cur| &w < cur) {
                    worst = Some(w);
                }
                if best.as_ref().map_or(true, |cur| &b > cur) {
                    best = Some(b);
                }
            }
            let (w, b) = match (worst, best) {
                (Some(w), Some(b)) => (w, b),
                _ => return Err(Error::domain("design", "no feasible treated fraction")),
            };
            let (wf, bf) = (rational::to_f64(&w), rational::to_f64(&b));
            Ok(OraclePoint {
                worst: wf,
                best: bf,
                worst_outer: wf,
                best_outer: bf,
                exact: Some(PayoffPoint::new(w, b)),
            })
        }
        OracleMode::Grid => {
            let pf = rational::to_f64(p);
            let tf = (rational::to_f64(&tau.lower), rational::to_f64(&tau.upper));
            let extremes = |qs: &[&FeasibleQ]| -> (f64, f64) {
                let mut worst = f64::INFINITY;
                let mut best = f64::NEG_INFINITY;
                for f in qs {
                    let (w, b) =
                        inner_extrema_grid(pf, tf, rational::to_f64(&f.q), config.grid_n);
                    worst = worst.min(w);
                    best = best.max(b);
                }
                (worst, best)
            };
            // The true feasible set is never empty (no treatment for
            // p < 1/2, universal treatment otherwise). If the grid flagged
            // everything as boundary-ambiguous, fall back to the flagged
            // set for the inner answer as well.
            let strict: Vec<&FeasibleQ> = if set.feasible.is_empty() {
                set.boundary_ambiguous.iter().collect()
            } else {
                set.feasible.iter().collect()
            };
            let all: Vec<&FeasibleQ> =
                set.feasible.iter().chain(&set.boundary_ambiguous).collect();
            let (worst, best) = extremes(&strict);
            let (worst_outer, best_outer) = extremes(&all);
            if !worst.is_finite() || !best.is_finite() {
                return Err(Error::domain("design", "no feasible treated fraction"));
            }
            Ok(OraclePoint { worst, best, worst_outer, best_outer, exact: None })
        }
    }
}

/// One checked design, with both routes' answers and their gap.
#[derive(Debug, Clone)]
pub struct SampleRecord {
    pub sample: u32,
    pub subgroup: String,
    pub p: Rational,
    pub tau: TauBounds,
    pub design: SubgroupDesign,
    pub closed: PayoffPoint,
    pub oracle_worst: f64,
    pub oracle_best: f64,
    pub gap: f64,
}

/// A failed check with everything needed to reproduce it.
#[derive(Debug, Clone)]
pub struct OracleViolation {
    pub kind: String,
    pub seed: u64,
    pub sample: u32,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub mode: OracleMode,
    pub seed: u64,
    pub grid_n: u32,
    pub samples: u32,
    pub tolerance: f64,
    pub max_support: usize,
    pub records: Vec<SampleRecord>,
    pub violations: Vec<OracleViolation>,
    pub max_gap: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Draws a design with rational masses: an integer composition of `support`
/// cells normalized to one.
pub fn random_design(rng: &mut ChaCha8Rng, support: usize) -> SubgroupDesign {
    let parts: Vec<i64> = (0..support).map(|_| rng.gen_range(1..=64)).collect();
    let total: i64 = parts.iter().sum();
    SubgroupDesign::new(
        parts
            .iter()
            .enumerate()
            .map(|(i, part)| (format!("v{i}"), rat(*part, total)))
            .collect(),
    )
}

/// Draws a subgroup rate on the 1/64 grid and either full or random valid
/// bounds around it.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (Rational, TauBounds) {
    let p = rat(rng.gen_range(0..=64), 64);
    let tau = if rng.gen_bool(0.5) {
        TauBounds::full()
    } else {
        let a = rat(rng.gen_range(0..=8), 8);
        let b = rat(rng.gen_range(0..=8), 8);
        TauBounds::new(&p * a, &p + (one() - &p) * b)
    };
    (p, tau)
}

fn f64_dominated(frontier: &Frontier, worst: f64, best: f64, tol: f64) -> bool {
    let chain: Vec<(f64, f64)> = frontier.vertices.iter().map(|v| v.payoff.to_f64()).collect();
    let right = chain[0];
    if worst > right.0 + tol {
        return false;
    }
    let left = *chain.last().expect("nonempty");
    if worst <= left.0 {
        return best <= left.1 + tol;
    }
    for pair in chain.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if worst <= a.0 && worst >= b.0 {
            let t = if (a.0 - b.0).abs() < f64::EPSILON {
                0.0
            } else {
                (a.0 - worst) / (a.0 - b.0)
            };
            let hull = a.1 + t * (b.1 - a.1);
            return best <= hull + tol;
        }
    }
    false
}

/// Checks a frontier against the oracle: every sampled random design must
/// evaluate weakly below-left of it, the oracle and closed-form payoffs
/// must agree within tolerance, and every non-limit vertex must be attained
/// by its stored design.
pub fn dominance_check_against(
    frontier: &Frontier,
    problem: &Problem,
    config: &OracleConfig,
) -> Result<OracleReport, Error> {
    config.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut records = Vec::new();
    let mut violations = Vec::new();
    let mut max_gap = 0.0f64;

    for sample in 0..config.samples {
        let mut agg_worst = 0.0f64;
        let mut agg_best = 0.0f64;
        let mut agg_exact = Some(PayoffPoint::new(zero(), zero()));
        for s in &problem.subgroups {
            let support = if sample % 2 == 0 {
                2
            } else {
                rng.gen_range(2..=config.max_support.max(2))
            };
            let design = random_design(&mut rng, support);
            let closed = evaluate_design(&s.p, &s.tau, &design)?;
            let oracle = minimax_payoffs_oracle(&s.p, &s.tau, &design, config)?;
            let gap = match &oracle.exact {
                Some(exact) => {
                    let dw = rational::to_f64(&(&exact.worst - &closed.worst));
                    let db = rational::to_f64(&(&exact.best - &closed.best));
                    dw.abs().max(db.abs())
                }
                None => {
                    // Exact answers must lie inside the grid envelope:
                    // worst in [worst_outer, worst], best in [best, best_outer].
                    let (cw, cb) = closed.to_f64();
                    let gap_w = (oracle.worst_outer - cw).max(cw - oracle.worst).max(0.0);
                    let gap_b = (oracle.best - cb).max(cb - oracle.best_outer).max(0.0);
                    gap_w.max(gap_b)
                }
            };
            max_gap = max_gap.max(gap);
            if gap > config.tolerance {
                violations.push(OracleViolation {
                    kind: "closed-form-mismatch".into(),
                    seed: config.seed,
                    sample,
                    detail: format!(
                        "subgroup {}: closed ({}, {}) vs oracle ({}, {}), gap {gap:e}",
                        s.label, closed.worst, closed.best, oracle.worst, oracle.best
                    ),
                });
            }
            let wf = rational::to_f64(&s.weight);
            agg_worst += wf * oracle.worst_outer;
            agg_best += wf * oracle.best;
            agg_exact = match (agg_exact, &oracle.exact) {
                (Some(acc), Some(exact)) => Some(acc.plus(&exact.scaled(&s.weight))),
                _ => None,
            };
            records.push(SampleRecord {
                sample,
                subgroup: s.label.clone(),
                p: s.p.clone(),
                tau: s.tau.clone(),
                design,
                closed,
                oracle_worst: oracle.worst,
                oracle_best: oracle.best,
                gap,
            });
        }
        let dominated = match &agg_exact {
            Some(point) => frontier.dominates_point(point),
            None => f64_dominated(frontier, agg_worst, agg_best, config.tolerance),
        };
        if !dominated {
            violations.push(OracleViolation {
                kind: "dominance".into(),
                seed: config.seed,
                sample,
                detail: format!("sampled point ({agg_worst}, {agg_best}) escapes the frontier"),
            });
        }
    }

    // Non-limit vertices must be attained by their stored designs.
    for (index, vertex) in frontier.vertices.iter().enumerate() {
        if vertex.limit {
            continue;
        }
        let design = match &vertex.design {
            DesignChoice::Pure(d) => d,
            DesignChoice::Mixture { .. } => continue,
        };
        let mut worst = 0.0f64;
        let mut best = 0.0f64;
        let mut worst_outer = 0.0f64;
        let mut best_outer = 0.0f64;
        let mut applicable = true;
        for s in &problem.subgroups {
            match design.by_subgroup.get(&s.label) {
                Some(sd) if sd.support() <= config.max_support => {
                    let point = minimax_payoffs_oracle(&s.p, &s.tau, sd, config)?;
                    let wf = rational::to_f64(&s.weight);
                    worst += wf * point.worst;
                    best += wf * point.best;
                    worst_outer += wf * point.worst_outer;
                    best_outer += wf * point.best_outer;
                }
                _ => {
                    applicable = false;
                    break;
                }
            }
        }
        if !applicable {
            continue;
        }
        let (vw, vb) = vertex.payoff.to_f64();
        let gap_w = (worst_outer - vw).max(vw - worst).max(0.0);
        let gap_b = (best - vb).max(vb - best_outer).max(0.0);
        let gap = gap_w.max(gap_b);
        max_gap = max_gap.max(gap);
        if gap > config.tolerance {
            violations.push(OracleViolation {
                kind: "vertex-attainment".into(),
                seed: config.seed,
                sample: index as u32,
                detail: format!(
                    "vertex {index} ({vw}, {vb}) evaluates to ({worst}, {best}) via the oracle"
                ),
            });
        }
    }

    Ok(OracleReport {
        mode: config.mode,
        seed: config.seed,
        grid_n: config.grid_n,
        samples: config.samples,
        tolerance: config.tolerance,
        max_support: config.max_support,
        records,
        violations,
        max_gap,
    })
}

/// Verifies the closed-form aggregate frontier of `problem` against the
/// oracle path.
pub fn frontier_dominance_check(
    problem: &Problem,
    config: &OracleConfig,
) -> Result<OracleReport, Error> {
    let frontier = aggregate_frontier(problem)?;
    dominance_check_against(&frontier, problem, config)
}
