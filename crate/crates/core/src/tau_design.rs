//! Choosing the informativeness bounds.
//!
//! When the designer can also pick the bounds `tau` on how predictive the
//! covariate may be, the frontier itself becomes endogenous. For treatment
//! need `p <= 1/3` the optimum has a closed form in the preference weight
//! `alpha`: full ambiguity below `(1-p)/2`, an interior lower bound
//! `1 - sqrt((1-p)/(2 alpha))` in the middle band, and no information above
//! `1/(2(1-p))`. The interior bound is irrational; it and the interior
//! utility are the only non-rational quantities in the crate and are
//! carried as doubles (one square root, error within a few ulp). Beyond
//! `p = 1/3` the closed form is unproven and only the lattice search is
//! offered.

use num::traits::Signed;

use crate::error::Error;
use crate::frontier_single::single_frontier_payoffs;
use crate::problem::{SubgroupDesign, TauBounds, VertexKind};
use crate::rational::{self, one, rat, zero, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauRegime {
    /// Full ambiguity `(0, 1)` with the trust design.
    TrustFull,
    /// Interior lower bound with the trust design.
    TrustInterior,
    /// No information: any bounds with a constant covariate.
    Distrust,
    /// Lattice search only: a hedge vertex won (possible for `p > 1/3`).
    Hedge,
}

impl TauRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            TauRegime::TrustFull => "trust-full",
            TauRegime::TrustInterior => "trust-interior",
            TauRegime::Distrust => "distrust",
            TauRegime::Hedge => "hedge",
        }
    }
}

/// An optimal choice of bounds, design, and the utility it earns.
///
/// `utility` is always populated; `utility_exact` only when the value is
/// rational (every regime except the interior closed form). `tau_circ`
/// carries the irrational interior lower bound when applicable, and
/// `lattice` the resolution that produced a grid answer.
#[derive(Debug, Clone)]
pub struct TauChoice {
    pub tau: TauBounds,
    pub design: SubgroupDesign,
    pub utility: f64,
    pub utility_exact: Option<Rational>,
    pub regime: TauRegime,
    /// `(1 - p) / 2`: below this weight, full ambiguity is optimal.
    pub alpha_lo: Rational,
    /// `1 / (2 (1 - p))`: above this weight, no information is optimal.
    pub alpha_hi: Rational,
    pub tau_circ: Option<f64>,
    pub lattice: Option<u32>,
    /// Equally good choices at regime-boundary weights.
    pub alternates: Vec<TauChoice>,
}

fn boundary_weights(p: &Rational) -> (Rational, Rational) {
    let lo = (one() - p) / rat(2, 1);
    let hi = one() / (rat(2, 1) * (one() - p));
    (lo, hi)
}

fn check_alpha(alpha: &Rational) -> Result<(), Error> {
    if alpha.is_negative() || alpha > &one() {
        return Err(Error::domain("alpha", "must be in [0, 1]"));
    }
    Ok(())
}

fn trust_full_choice(p: &Rational, alpha: &Rational) -> TauChoice {
    let (alpha_lo, alpha_hi) = boundary_weights(p);
    let utility = p * (one() - rat(2, 1) * alpha);
    TauChoice {
        tau: TauBounds::full(),
        design: SubgroupDesign::bernoulli(p.clone()),
        utility: rational::to_f64(&utility),
        utility_exact: Some(utility),
        regime: TauRegime::TrustFull,
        alpha_lo,
        alpha_hi,
        tau_circ: None,
        lattice: None,
        alternates: Vec::new(),
    }
}

fn trust_interior_choice(p: &Rational, alpha: &Rational) -> TauChoice {
    let (alpha_lo, alpha_hi) = boundary_weights(p);
    let pf = rational::to_f64(p);
    let af = rational::to_f64(alpha);
    let tau_circ = 1.0 - ((1.0 - pf) / (2.0 * af)).sqrt();
    let rate = (pf - tau_circ) / (1.0 - tau_circ);
    let utility = rate * (1.0 - 2.0 * af + 2.0 * af * tau_circ);
    let lower = rational::from_f64(tau_circ.max(0.0)).expect("finite bound");
    let rate_exact = rational::from_f64(rate.clamp(0.0, 1.0)).expect("finite rate");
    TauChoice {
        tau: TauBounds::new(lower, one()),
        design: SubgroupDesign::bernoulli(rate_exact),
        utility,
        utility_exact: None,
        regime: TauRegime::TrustInterior,
        alpha_lo,
        alpha_hi,
        tau_circ: Some(tau_circ),
        lattice: None,
        alternates: Vec::new(),
    }
}

fn distrust_choice(p: &Rational) -> TauChoice {
    let (alpha_lo, alpha_hi) = boundary_weights(p);
    TauChoice {
        tau: TauBounds::new(p.clone(), one()),
        design: SubgroupDesign::constant(),
        utility: 0.0,
        utility_exact: Some(zero()),
        regime: TauRegime::Distrust,
        alpha_lo,
        alpha_hi,
        tau_circ: None,
        lattice: None,
        alternates: Vec::new(),
    }
}

/// Closed-form optimal bounds for `p <= 1/3`.
///
/// At the two boundary weights the adjacent regimes tie exactly; the lower
/// regime is returned with the other listed as an alternate. Refuses
/// `p > 1/3`, where the characterization is unproven.
pub fn optimal_tau_closed(p: &Rational, alpha: &Rational) -> Result<TauChoice, Error> {
    if p.is_negative() || p > &rat(1, 3) {
        return Err(Error::UnsupportedRegime(format!(
            "closed form requires p <= 1/3, got {p}"
        )));
    }
    check_alpha(alpha)?;
    let (alpha_lo, alpha_hi) = boundary_weights(p);
    if alpha < &alpha_lo {
        Ok(trust_full_choice(p, alpha))
    } else if alpha == &alpha_lo {
        let mut choice = trust_full_choice(p, alpha);
        choice.alternates.push(trust_interior_choice(p, alpha));
        Ok(choice)
    } else if alpha < &alpha_hi {
        Ok(trust_interior_choice(p, alpha))
    } else if alpha == &alpha_hi {
        let mut choice = trust_interior_choice(p, alpha);
        choice.alternates.push(distrust_choice(p));
        Ok(choice)
    } else {
        Ok(distrust_choice(p))
    }
}

/// Lattice search over the feasible bounds, usable for any `p`.
///
/// Scans `lower` over `{0, .., p}` and `upper` over `{p, .., 1}` on a
/// `grid_n` lattice, scores every extreme point of each candidate frontier,
/// and returns the argmax (ties to the lexicographically smallest
/// `(lower, upper)`). Utilities are exact rationals since every lattice
/// candidate is rational.
pub fn optimal_tau_grid(p: &Rational, alpha: &Rational, grid_n: u32) -> Result<TauChoice, Error> {
    if grid_n < 8 {
        return Err(Error::domain("grid_n", "must be at least 8"));
    }
    if p.is_negative() || p > &one() {
        return Err(Error::domain("p", "must be in [0, 1]"));
    }
    check_alpha(alpha)?;
    let (alpha_lo, alpha_hi) = boundary_weights(p);
    let n = grid_n as i64;
    let mut best: Option<(Rational, TauBounds, VertexKind, Rational)> = None;
    for i in 0..=n {
        let lower = p * rat(i, n);
        for j in 0..=n {
            let upper = p + (one() - p) * rat(j, n);
            let tau = TauBounds::new(lower.clone(), upper);
            for (kind, payoff) in single_frontier_payoffs(p, &tau)? {
                let score = payoff.score(alpha);
                if best.as_ref().map_or(true, |(s, ..)| &score > s) {
                    let q = match kind {
                        VertexKind::Trust | VertexKind::Hedge => payoff_rate(p, &tau, kind),
                        _ => None,
                    };
                    best = Some((score, tau.clone(), kind, q.unwrap_or_else(zero)));
                }
            }
        }
    }
    let (score, tau, kind, rate) = best.expect("lattice is nonempty");
    let design = match kind {
        VertexKind::Distrust => SubgroupDesign::constant(),
        _ => SubgroupDesign::bernoulli(rate),
    };
    let regime = match kind {
        VertexKind::Distrust => TauRegime::Distrust,
        VertexKind::Hedge => TauRegime::Hedge,
        _ => {
            if tau.is_full() {
                TauRegime::TrustFull
            } else {
                TauRegime::TrustInterior
            }
        }
    };
    Ok(TauChoice {
        tau,
        design,
        utility: rational::to_f64(&score),
        utility_exact: Some(score),
        regime,
        alpha_lo,
        alpha_hi,
        tau_circ: None,
        lattice: Some(grid_n),
        alternates: Vec::new(),
    })
}

/// Design mass of the trust or hedge vertex at these bounds.
fn payoff_rate(p: &Rational, tau: &TauBounds, kind: VertexKind) -> Option<Rational> {
    let thresholds = crate::frontier_single::tau_thresholds(p, tau).ok()?;
    match kind {
        VertexKind::Trust => Some(thresholds.q_t),
        VertexKind::Hedge => Some(thresholds.q_h),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn case1_utility(p: &Rational, tau: &TauBounds, alpha: &Rational) -> Rational {
        // Trust point of a single-segment frontier: treat q_t, all of it at
        // the upper bound when aligned, at the lower bound when not.
        let q_t = (p - &tau.lower) / (&tau.upper - &tau.lower);
        let w = &q_t * (rat(2, 1) * &tau.lower - one());
        let b = &q_t * (rat(2, 1) * &tau.upper - one());
        alpha * w + (one() - alpha) * b
    }

    fn case2_utility(p: &Rational, tau: &TauBounds, alpha: &Rational) -> Rational {
        let q_t = (p - &tau.lower) / (&tau.upper - &tau.lower);
        let w = (one() - &q_t) * (rat(2, 1) * &tau.lower - one());
        let b = &q_t * (rat(2, 1) * &tau.upper - one());
        alpha * w + (one() - alpha) * b
    }

    fn hedge_utility(p: &Rational, tau: &TauBounds, alpha: &Rational) -> Rational {
        let q_h = (one() - rat(2, 1) * p) / (one() - rat(2, 1) * &tau.lower);
        let w = &q_h * (rat(2, 1) * &tau.lower - one());
        let b = &q_h * (rat(2, 1) * &tau.upper - one());
        alpha * w + (one() - alpha) * b
    }

    #[test]
    fn closed_form_regimes() {
        let p = rat(1, 5);
        let low = optimal_tau_closed(&p, &rat(3, 10)).unwrap();
        assert_eq!(low.regime, TauRegime::TrustFull);
        assert_eq!(low.utility_exact.unwrap(), rat(2, 25));
        assert!(low.tau.is_full());

        let mid = optimal_tau_closed(&p, &rat(1, 2)).unwrap();
        assert_eq!(mid.regime, TauRegime::TrustInterior);
        let circ = mid.tau_circ.unwrap();
        assert!((circ - 0.105_572_809_000_084_1).abs() < 1e-12);
        assert!((mid.utility - circ * circ).abs() < 1e-12);
        assert_eq!(mid.tau.upper, one());

        let high = optimal_tau_closed(&p, &rat(7, 10)).unwrap();
        assert_eq!(high.regime, TauRegime::Distrust);
        assert_eq!(high.utility_exact.unwrap(), zero());
        assert_eq!(high.tau, TauBounds::new(rat(1, 5), one()));
    }

    #[test]
    fn closed_form_refuses_large_p() {
        assert!(matches!(
            optimal_tau_closed(&rat(2, 5), &rat(1, 2)),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn boundary_weights_return_both_regimes() {
        let p = rat(1, 5);
        let at_lo = optimal_tau_closed(&p, &rat(2, 5)).unwrap();
        assert_eq!(at_lo.regime, TauRegime::TrustFull);
        assert_eq!(at_lo.alternates.len(), 1);
        assert_eq!(at_lo.alternates[0].regime, TauRegime::TrustInterior);
        assert!((at_lo.utility - at_lo.alternates[0].utility).abs() < 1e-12);

        let at_hi = optimal_tau_closed(&p, &rat(5, 8)).unwrap();
        assert_eq!(at_hi.regime, TauRegime::TrustInterior);
        assert_eq!(at_hi.alternates[0].regime, TauRegime::Distrust);
        assert!(at_hi.utility.abs() < 1e-12);
    }

    #[test]
    fn grid_converges_to_closed_form() {
        let p = rat(1, 5);
        let alpha = rat(1, 2);
        let closed = optimal_tau_closed(&p, &alpha).unwrap().utility;
        let mut errors = Vec::new();
        for grid_n in [64u32, 128, 256, 512] {
            let grid = optimal_tau_grid(&p, &alpha, grid_n).unwrap();
            errors.push((closed - grid.utility).abs());
        }
        assert!(errors[3] < 1e-3);
        for pair in errors.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-15, "errors not monotone: {errors:?}");
        }
        // Quadratic local behavior. A single doubling can plateau when the
        // refined lattice keeps the same nearest point, so compare across
        // two doublings.
        for (a, b) in [(0usize, 2usize), (1, 3)] {
            assert!(errors[b] <= 0.6 * errors[a] + 1e-15, "errors: {errors:?}");
        }
    }

    #[test]
    fn grid_at_full_weight_is_distrust() {
        let choice = optimal_tau_grid(&rat(1, 5), &one(), 16).unwrap();
        assert_eq!(choice.utility_exact.unwrap(), zero());
        let choice = optimal_tau_grid(&rat(9, 20), &rat(2, 5), 16).unwrap();
        // (0, 1) is on the lattice, so the optimum is at least as good.
        let baseline = {
            let f = single_frontier_payoffs(&rat(9, 20), &TauBounds::full()).unwrap();
            f.iter().map(|(_, payoff)| payoff.score(&rat(2, 5))).max().unwrap()
        };
        assert!(choice.utility_exact.unwrap() >= baseline);
    }

    /// Hedge-regime threshold `(upper - 2 lower^2) / (1 + 2 upper - 4 lower)`.
    fn p1_of(tau: &TauBounds) -> Rational {
        (&tau.upper - rat(2, 1) * &tau.lower * &tau.lower)
            / (one() + rat(2, 1) * &tau.upper - rat(4, 1) * &tau.lower)
    }

    #[test]
    fn never_optimal_vertices_stay_below_the_case1_optimum() {
        // On a (lower, upper) lattice with p <= 1/3, neither the flipped
        // trust point (its regime is p > p1) nor the hedge point (regime
        // p1 < p <= (lower + upper) / 2) ever beats max(0, case-1 best).
        let lattice = 24i64;
        for p in [rat(1, 5), rat(4, 15), rat(1, 3)] {
            for alpha in [rat(1, 10), rat(2, 5), rat(1, 2), rat(7, 10), one()] {
                let mut best_case1 = zero();
                for i in 0..=lattice {
                    let lower = &p * rat(i, lattice);
                    for j in 0..=lattice {
                        let upper = &p + (one() - &p) * rat(j, lattice);
                        if upper <= rational::half() || lower == p {
                            continue;
                        }
                        let tau = TauBounds::new(lower.clone(), upper);
                        if p <= p1_of(&tau) {
                            let u = case1_utility(&p, &tau, &alpha);
                            if u > best_case1 {
                                best_case1 = u;
                            }
                        }
                    }
                }
                for i in 0..=lattice {
                    let lower = &p * rat(i, lattice);
                    for j in 0..=lattice {
                        let upper = &p + (one() - &p) * rat(j, lattice);
                        if upper <= rational::half() || lower == p {
                            continue;
                        }
                        let tau = TauBounds::new(lower.clone(), upper.clone());
                        let p1 = p1_of(&tau);
                        if p > p1 {
                            let u2 = case2_utility(&p, &tau, &alpha);
                            assert!(
                                u2 <= best_case1,
                                "case-2 trust beats case 1 at p={p}, alpha={alpha}, tau=({lower}, {upper})"
                            );
                        }
                        let p2 = (&lower + &upper) / rat(2, 1);
                        if p > p1 && p <= p2 {
                            let uh = hedge_utility(&p, &tau, &alpha);
                            assert!(
                                uh <= best_case1,
                                "hedge beats case 1 at p={p}, alpha={alpha}, tau=({lower}, {upper})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn monotonicity_facts() {
        // Case-1 trust utility rises with the upper bound at fixed lower
        // bound; hedge utility at upper = 1 rises with the lower bound.
        let p = rat(1, 4);
        for alpha in [rat(1, 10), rat(2, 5), rat(3, 5), one()] {
            for i in 0..8i64 {
                let lower = &p * rat(i, 8);
                let mut prev: Option<Rational> = None;
                for j in 1..=8i64 {
                    let upper = &p + (one() - &p) * rat(j, 8);
                    if upper <= rational::half() {
                        continue;
                    }
                    let u = case1_utility(&p, &TauBounds::new(lower.clone(), upper), &alpha);
                    if let Some(prev) = prev {
                        assert!(u >= prev);
                    }
                    prev = Some(u);
                }
            }
            let mut prev: Option<Rational> = None;
            for i in 0..8i64 {
                let lower = &p * rat(i, 8);
                let u = hedge_utility(&p, &TauBounds::new(lower, one()), &alpha);
                if let Some(prev) = prev {
                    assert!(u >= prev);
                }
                prev = Some(u);
            }
        }
    }
}
