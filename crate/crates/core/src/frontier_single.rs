//! Efficient frontier and implementing designs for a single subgroup.
//!
//! For a subgroup with treatment-need rate `p` and informativeness bounds
//! `tau`, the frontier between worst-case and best-case payoffs is a
//! piecewise-linear chain with at most three extreme points:
//!
//! - the **distrust point** `D` (constant covariate, prior-optimal action),
//! - the **trust point** `T` (covariate rich enough for full targeting by
//!   an aligned advisor), and
//! - in an intermediate regime, a **hedge point** `H` where the advisor's
//!   reach is capped at the mass that cannot be flipped onto the
//!   complementary event.
//!
//! Which vertices appear depends on where `p` falls relative to the
//! thresholds in [`TauThresholds`]. The knife-edge cases collapse the trust
//! vertex into the hedge vertex; degenerate bounds collapse everything into
//! the distrust point.

use std::collections::BTreeSet;

use num::traits::Signed;

use crate::error::Error;
use crate::payoff::{
    best_targeting_tau, default_payoff, feasible_ic_set, phi_best, phi_worst, worst_targeting_tau,
};
use crate::problem::{
    CovariateDesign, DesignChoice, DesignPoint, Frontier, PayoffPoint, SubgroupDesign, TauBounds,
    VertexKind,
};
use crate::rational::{half, one, rat, zero, Rational};

/// Default perturbation for limit-implemented hedge designs: `10^-6` exact.
pub fn default_epsilon() -> Rational {
    rat(1, 1_000_000)
}

/// Label used for the anonymous subgroup of the standalone entry points.
pub const SINGLE_LABEL: &str = "x0";

/// Regime thresholds for a subgroup.
///
/// `p1` bounds the hedge regime from below on the `p < 1/2` side and is
/// `None` when that side is degenerate (`lower >= 1/2`); `p3` bounds it
/// from above on the `p > 1/2` side and is `None` when `upper <= 1/2`.
/// `p2 = (lower + upper) / 2` separates the two sides' trust-point forms.
/// `q_t` is the trust treated fraction and `q_h` the hedge design mass for
/// the side `p` falls on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauThresholds {
    pub p1: Option<Rational>,
    pub p2: Rational,
    pub p3: Option<Rational>,
    pub q_t: Rational,
    pub q_h: Rational,
}

pub fn tau_thresholds(p: &Rational, tau: &TauBounds) -> Result<TauThresholds, Error> {
    if !tau.contains(p) {
        return Err(Error::domain("p", format!("{p} outside [{}, {}]", tau.lower, tau.upper)));
    }
    if tau.lower == tau.upper {
        return Err(Error::domain("tau", "degenerate bounds have no thresholds"));
    }
    let two = rat(2, 1);
    let h = half();
    let p1 = (tau.lower < h).then(|| {
        (&tau.upper - &two * &tau.lower * &tau.lower)
            / (one() + &two * &tau.upper - rat(4, 1) * &tau.lower)
    });
    let p3 = (tau.upper > h).then(|| {
        (&two * &tau.upper * &tau.upper - &tau.lower)
            / (rat(4, 1) * &tau.upper - &two * &tau.lower - one())
    });
    let p2 = (&tau.lower + &tau.upper) / &two;
    let q_t = (p - &tau.lower) / (&tau.upper - &tau.lower);
    let q_h = if p <= &h {
        if tau.lower >= h {
            zero()
        } else {
            (one() - &two * p) / (one() - &two * &tau.lower)
        }
    } else {
        (&two * &tau.upper - &two * p) / (&two * &tau.upper - one())
    };
    Ok(TauThresholds { p1, p2, p3, q_t, q_h })
}

/// Slope of the trust-hedge segment in the unconstrained model.
///
/// Only defined for `p` in `[1/3, 2/3]`; outside that range the frontier
/// has no hedge segment.
pub fn slope_sigma(p: &Rational) -> Result<Rational, Error> {
    if p < &rat(1, 3) || p > &rat(2, 3) {
        return Err(Error::domain("p", format!("{p} outside [1/3, 2/3]: no hedge segment")));
    }
    if p <= &half() {
        Ok((one() - rat(3, 1) * p) / p)
    } else {
        Ok((rat(3, 1) * p - rat(2, 1)) / (one() - p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Regime {
    /// Frontier is the distrust point alone.
    Collapsed,
    /// Single segment from distrust to trust.
    TrustOnly,
    /// Two segments: distrust-hedge and hedge-trust.
    Hedged,
    /// Knife edge: the trust vertex coincides with or is dominated by the
    /// hedge vertex; single segment from distrust to hedge.
    KnifeEdge,
}

fn classify(p: &Rational, tau: &TauBounds) -> Result<(Regime, Option<TauThresholds>), Error> {
    if !tau.contains(p) {
        return Err(Error::domain("p", format!("{p} outside [{}, {}]", tau.lower, tau.upper)));
    }
    let h = half();
    if tau.lower == tau.upper {
        return Ok((Regime::Collapsed, None));
    }
    let t = tau_thresholds(p, tau)?;
    let regime = if p < &h {
        if tau.upper <= h || p == &tau.lower {
            Regime::Collapsed
        } else {
            match &t.p1 {
                Some(p1) if p == p1 => Regime::KnifeEdge,
                Some(p1) if p > p1 && p < &t.p2 => Regime::Hedged,
                _ => Regime::TrustOnly,
            }
        }
    } else if p == &h {
        if tau.upper == h || tau.lower == h {
            Regime::Collapsed
        } else {
            Regime::TrustOnly
        }
    } else {
        if tau.lower >= h || p == &tau.upper {
            Regime::Collapsed
        } else {
            match &t.p3 {
                Some(p3) if p == p3 => Regime::KnifeEdge,
                Some(p3) if p < p3 && p > &t.p2 => Regime::Hedged,
                _ => Regime::TrustOnly,
            }
        }
    };
    Ok((regime, Some(t)))
}

fn distrust_point(label: &str, p: &Rational) -> Result<DesignPoint, Error> {
    let d = default_payoff(p)?;
    Ok(DesignPoint {
        payoff: PayoffPoint::diagonal(d),
        kind: VertexKind::Distrust,
        design: DesignChoice::Pure(CovariateDesign::single(label, SubgroupDesign::constant())),
        limit: false,
    })
}

/// Trust payoff: the aligned advisor treats the fraction `q_t`; whether the
/// misaligned advisor can flip onto the complementary fraction depends on
/// which side of `p1` (resp. `p3`) the rate falls.
fn trust_payoff(p: &Rational, tau: &TauBounds, t: &TauThresholds) -> Result<PayoffPoint, Error> {
    let best = best_targeting_tau(p, &t.q_t, tau)?;
    let split = if p < &half() {
        match &t.p1 {
            Some(p1) => p >= p1,
            None => false,
        }
    } else if p == &half() {
        true
    } else {
        match &t.p3 {
            Some(p3) => p < p3,
            None => false,
        }
    };
    let worst_arg = if split { one() - &t.q_t } else { t.q_t.clone() };
    let worst = worst_targeting_tau(p, &worst_arg, tau)?;
    Ok(PayoffPoint::new(worst, best))
}

fn hedge_payoff(p: &Rational, tau: &TauBounds, t: &TauThresholds) -> Result<PayoffPoint, Error> {
    Ok(PayoffPoint::new(
        worst_targeting_tau(p, &t.q_h, tau)?,
        best_targeting_tau(p, &t.q_h, tau)?,
    ))
}

/// Builds the design point implementing one extreme point of the frontier.
///
/// - `distrust`: constant covariate, exact.
/// - `trust`: `Ber(q_t)`, exact.
/// - `hedge`: for `p <= 1/2`, `Ber(q_h - epsilon)` with `limit = true` —
///   the boundary design `Ber(q_h)` hands the misaligned advisor the
///   complementary mass and lands strictly below the hedge point, so only
///   the perturbed design approaches it. The recorded payoff is the limit
///   value at `q_h`. For `p > 1/2` the complementary mass sits on an open
///   endpoint of the feasible set and is unusable, so `Ber(q_h)` implements
///   the hedge point exactly (`limit = false`).
pub fn implementing_design(
    p: &Rational,
    tau: &TauBounds,
    kind: VertexKind,
    epsilon: &Rational,
) -> Result<DesignPoint, Error> {
    implementing_design_labeled(SINGLE_LABEL, p, tau, kind, epsilon)
}

pub(crate) fn implementing_design_labeled(
    label: &str,
    p: &Rational,
    tau: &TauBounds,
    kind: VertexKind,
    epsilon: &Rational,
) -> Result<DesignPoint, Error> {
    if !epsilon.is_positive() {
        return Err(Error::domain("epsilon", "must be > 0"));
    }
    let (regime, thresholds) = classify(p, tau)?;
    match kind {
        VertexKind::Distrust => distrust_point(label, p),
        VertexKind::Trust => {
            if matches!(regime, Regime::Collapsed | Regime::KnifeEdge) {
                return Err(Error::UnsupportedRegime(format!(
                    "no trust vertex at p = {p}, tau = [{}, {}]",
                    tau.lower, tau.upper
                )));
            }
            let t = thresholds.expect("non-collapsed regime has thresholds");
            Ok(DesignPoint {
                payoff: trust_payoff(p, tau, &t)?,
                kind: VertexKind::Trust,
                design: DesignChoice::Pure(CovariateDesign::single(
                    label,
                    SubgroupDesign::bernoulli(t.q_t.clone()),
                )),
                limit: false,
            })
        }
        VertexKind::Hedge => {
            if !matches!(regime, Regime::Hedged | Regime::KnifeEdge) {
                return Err(Error::UnsupportedRegime(format!(
                    "no hedge vertex at p = {p}, tau = [{}, {}]",
                    tau.lower, tau.upper
                )));
            }
            let t = thresholds.expect("hedged regime has thresholds");
            let payoff = hedge_payoff(p, tau, &t)?;
            if p <= &half() {
                if epsilon >= &t.q_h {
                    return Err(Error::domain(
                        "epsilon",
                        format!("must be < hedge mass {}", t.q_h),
                    ));
                }
                Ok(DesignPoint {
                    payoff,
                    kind: VertexKind::Hedge,
                    design: DesignChoice::Pure(CovariateDesign::single(
                        label,
                        SubgroupDesign::bernoulli(&t.q_h - epsilon),
                    )),
                    limit: true,
                })
            } else {
                Ok(DesignPoint {
                    payoff,
                    kind: VertexKind::Hedge,
                    design: DesignChoice::Pure(CovariateDesign::single(
                        label,
                        SubgroupDesign::bernoulli(t.q_h.clone()),
                    )),
                    limit: false,
                })
            }
        }
        VertexKind::Mixture => Err(Error::domain("kind", "mixtures come from Frontier::mixture_point")),
    }
}

/// The extreme points of a single-subgroup frontier.
///
/// `sigma` is the slope of the trust-hedge segment when a hedge vertex
/// exists, of the trust-distrust segment otherwise, and `-1` by convention
/// for a collapsed frontier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremePoints {
    pub trust: DesignPoint,
    pub hedge: Option<DesignPoint>,
    pub distrust: DesignPoint,
    pub sigma: Rational,
}

pub fn extreme_points(p: &Rational, tau: &TauBounds) -> Result<ExtremePoints, Error> {
    extreme_points_labeled(SINGLE_LABEL, p, tau, &default_epsilon())
}

pub(crate) fn extreme_points_labeled(
    label: &str,
    p: &Rational,
    tau: &TauBounds,
    epsilon: &Rational,
) -> Result<ExtremePoints, Error> {
    let (regime, _) = classify(p, tau)?;
    let distrust = distrust_point(label, p)?;
    let slope_between = |a: &DesignPoint, b: &DesignPoint| -> Rational {
        (&a.payoff.best - &b.payoff.best) / (&a.payoff.worst - &b.payoff.worst)
    };
    match regime {
        Regime::Collapsed => Ok(ExtremePoints {
            trust: distrust.clone(),
            hedge: None,
            distrust,
            sigma: rat(-1, 1),
        }),
        Regime::TrustOnly => {
            let trust = implementing_design_labeled(label, p, tau, VertexKind::Trust, epsilon)?;
            let sigma = if trust.payoff == distrust.payoff {
                rat(-1, 1)
            } else {
                slope_between(&trust, &distrust)
            };
            Ok(ExtremePoints { trust, hedge: None, distrust, sigma })
        }
        Regime::Hedged => {
            let trust = implementing_design_labeled(label, p, tau, VertexKind::Trust, epsilon)?;
            let hedge = implementing_design_labeled(label, p, tau, VertexKind::Hedge, epsilon)?;
            let sigma = slope_between(&trust, &hedge);
            Ok(ExtremePoints { trust, hedge: Some(hedge), distrust, sigma })
        }
        Regime::KnifeEdge => {
            let hedge = implementing_design_labeled(label, p, tau, VertexKind::Hedge, epsilon)?;
            let sigma = slope_between(&hedge, &distrust);
            Ok(ExtremePoints {
                trust: hedge.clone(),
                hedge: Some(hedge),
                distrust,
                sigma,
            })
        }
    }
}

/// The efficient frontier for one subgroup, distrust end first.
pub fn single_frontier(p: &Rational, tau: &TauBounds) -> Result<Frontier, Error> {
    single_frontier_labeled(SINGLE_LABEL, p, tau, &default_epsilon())
}

/// Vertex payoffs of the single-subgroup frontier without building the
/// implementing designs; used by lattice searches that score millions of
/// candidate bound pairs.
pub(crate) fn single_frontier_payoffs(
    p: &Rational,
    tau: &TauBounds,
) -> Result<Vec<(VertexKind, PayoffPoint)>, Error> {
    let (regime, thresholds) = classify(p, tau)?;
    let d = PayoffPoint::diagonal(default_payoff(p)?);
    let mut out = vec![(VertexKind::Distrust, d.clone())];
    match regime {
        Regime::Collapsed => {}
        Regime::TrustOnly => {
            let t = thresholds.expect("thresholds exist");
            let trust = trust_payoff(p, tau, &t)?;
            if trust != d {
                out.push((VertexKind::Trust, trust));
            }
        }
        Regime::Hedged => {
            let t = thresholds.expect("thresholds exist");
            out.push((VertexKind::Hedge, hedge_payoff(p, tau, &t)?));
            out.push((VertexKind::Trust, trust_payoff(p, tau, &t)?));
        }
        Regime::KnifeEdge => {
            let t = thresholds.expect("thresholds exist");
            out.push((VertexKind::Hedge, hedge_payoff(p, tau, &t)?));
        }
    }
    Ok(out)
}

pub(crate) fn single_frontier_labeled(
    label: &str,
    p: &Rational,
    tau: &TauBounds,
    epsilon: &Rational,
) -> Result<Frontier, Error> {
    let (regime, thresholds) = classify(p, tau)?;
    let distrust = distrust_point(label, p)?;
    let mut notes = Vec::new();
    if let Some(t) = &thresholds {
        if p == &t.p2 && !matches!(regime, Regime::Collapsed) {
            notes.push(format!(
                "p equals (lower + upper)/2 = {}; treated as the single-segment regime by continuity",
                t.p2
            ));
        }
    }
    let mut vertices = vec![distrust];
    match regime {
        Regime::Collapsed => {}
        Regime::TrustOnly => {
            let trust = implementing_design_labeled(label, p, tau, VertexKind::Trust, epsilon)?;
            if trust.payoff != vertices[0].payoff {
                vertices.push(trust);
            }
        }
        Regime::Hedged => {
            vertices.push(implementing_design_labeled(label, p, tau, VertexKind::Hedge, epsilon)?);
            vertices.push(implementing_design_labeled(label, p, tau, VertexKind::Trust, epsilon)?);
        }
        Regime::KnifeEdge => {
            notes.push(format!("knife edge: trust vertex coincides with the hedge vertex at p = {p}"));
            vertices.push(implementing_design_labeled(label, p, tau, VertexKind::Hedge, epsilon)?);
        }
    }
    Frontier::with_notes(vertices, notes)
}

/// Worst- and best-case payoffs of an arbitrary finite covariate design.
///
/// Enumerates the subset masses of the design's support, keeps those inside
/// the incentive-compatible set (open endpoints excluded by exact
/// comparison), and extremizes Nature's payoff over them.
pub fn evaluate_design(
    p: &Rational,
    tau: &TauBounds,
    design: &SubgroupDesign,
) -> Result<PayoffPoint, Error> {
    const MAX_SUPPORT: usize = 20;
    let mut violations = Vec::new();
    design.check("design", &mut violations);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    if design.support() > MAX_SUPPORT {
        return Err(Error::SupportTooLarge { support: design.support(), cap: MAX_SUPPORT });
    }
    let bp = feasible_ic_set(p, tau)?;

    let mut masses = BTreeSet::new();
    masses.insert(zero());
    for atom in &design.atoms {
        let previous: Vec<Rational> = masses.iter().cloned().collect();
        for m in previous {
            masses.insert(m + &atom.mass);
        }
    }

    let mut worst: Option<Rational> = None;
    let mut best: Option<Rational> = None;
    for q in masses {
        if !bp.contains(&q) {
            continue;
        }
        let w = phi_worst(p, &q, tau)?;
        let b = phi_best(p, &q, tau)?;
        if worst.as_ref().map_or(true, |cur| &w < cur) {
            worst = Some(w);
        }
        if best.as_ref().map_or(true, |cur| &b > cur) {
            best = Some(b);
        }
    }
    match (worst, best) {
        (Some(w), Some(b)) => Ok(PayoffPoint::new(w, b)),
        _ => Err(Error::domain("design", "no feasible treated fraction")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn full() -> TauBounds {
        TauBounds::full()
    }

    fn payoffs(frontier: &Frontier) -> Vec<(Rational, Rational)> {
        frontier
            .vertices
            .iter()
            .map(|v| (v.payoff.worst.clone(), v.payoff.best.clone()))
            .collect()
    }

    #[test]
    fn example_one_frontier() {
        let f = single_frontier(&rat(2, 5), &full()).unwrap();
        assert_eq!(
            payoffs(&f),
            vec![
                (zero(), zero()),
                (rat(-1, 5), rat(1, 5)),
                (rat(-3, 5), rat(2, 5)),
            ]
        );
        assert_eq!(f.vertices[0].kind, VertexKind::Distrust);
        assert_eq!(f.vertices[1].kind, VertexKind::Hedge);
        assert_eq!(f.vertices[2].kind, VertexKind::Trust);
        assert_eq!(f.segments[0].slope, rat(-1, 1));
        assert_eq!(f.segments[1].slope, rat(-1, 2));
    }

    #[test]
    fn low_p_single_segment() {
        let f = single_frontier(&rat(1, 4), &full()).unwrap();
        assert_eq!(payoffs(&f), vec![(zero(), zero()), (rat(-1, 4), rat(1, 4))]);
        assert_eq!(f.segments[0].slope, rat(-1, 1));
    }

    #[test]
    fn tau_example_frontier() {
        let tau = TauBounds::new(rat(1, 10), rat(9, 10));
        let f = single_frontier(&rat(2, 5), &tau).unwrap();
        assert_eq!(
            payoffs(&f),
            vec![
                (zero(), zero()),
                (rat(-1, 5), rat(1, 5)),
                (rat(-1, 2), rat(3, 10)),
            ]
        );
    }

    #[test]
    fn lemma_reduction_sweep() {
        // The unconstrained frontier follows the three-regime closed form,
        // including the knife edges at 1/3, 1/2, 2/3.
        for k in 0..=64i64 {
            let p = rat(k, 64);
            let f = single_frontier(&p, &full()).unwrap();
            let got = payoffs(&f);
            let third = rat(1, 3);
            let two_thirds = rat(2, 3);
            let expected: Vec<(Rational, Rational)> = if p == zero() {
                vec![(zero(), zero())]
            } else if p == one() {
                vec![(one(), one())]
            } else if p < third {
                vec![(zero(), zero()), (-p.clone(), p.clone())]
            } else if p == third {
                vec![(zero(), zero()), (rat(-1, 3), rat(1, 3))]
            } else if p < half() {
                vec![
                    (zero(), zero()),
                    (rat(2, 1) * &p - one(), one() - rat(2, 1) * &p),
                    (&p - one(), p.clone()),
                ]
            } else if p == half() {
                vec![(zero(), zero()), (rat(-1, 2), rat(1, 2))]
            } else if p < two_thirds {
                let d = rat(2, 1) * &p - one();
                vec![
                    (d.clone(), d.clone()),
                    (zero(), rat(4, 1) * &p - rat(2, 1)),
                    (&p - one(), p.clone()),
                ]
            } else if p == two_thirds {
                vec![(rat(1, 3), rat(1, 3)), (zero(), rat(2, 3))]
            } else {
                let d = rat(2, 1) * &p - one();
                vec![(d.clone(), d.clone()), (rat(3, 1) * &p - rat(2, 1), p.clone())]
            };
            assert_eq!(got, expected, "mismatch at p = {p}");
        }
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(slope_sigma(&rat(13, 20)).unwrap(), rat(-1, 7));
        assert_eq!(slope_sigma(&rat(13, 25)).unwrap(), rat(-11, 12));
        assert_eq!(slope_sigma(&half()).unwrap(), rat(-1, 1));
        assert!(slope_sigma(&rat(1, 5)).is_err());
    }

    #[test]
    fn sigma_matches_frontier_segment() {
        for k in [22i64, 27, 30, 35, 40] {
            let p = rat(k, 64);
            if p <= rat(1, 3) || p >= rat(2, 3) || p == half() {
                continue;
            }
            let f = single_frontier(&p, &full()).unwrap();
            assert_eq!(f.segments.last().unwrap().slope, slope_sigma(&p).unwrap());
        }
    }

    #[test]
    fn trust_design_example() {
        let d = implementing_design(&rat(2, 5), &full(), VertexKind::Trust, &default_epsilon())
            .unwrap();
        assert_eq!(d.payoff, PayoffPoint::new(rat(-3, 5), rat(2, 5)));
        assert!(!d.limit);
        match &d.design {
            DesignChoice::Pure(c) => {
                let atoms = &c.by_subgroup[SINGLE_LABEL].atoms;
                assert_eq!(atoms[0].mass, rat(2, 5));
            }
            _ => panic!("expected pure design"),
        }
    }

    #[test]
    fn hedge_design_low_side_is_perturbed() {
        let eps = rat(1, 1000);
        let d = implementing_design(&rat(2, 5), &full(), VertexKind::Hedge, &eps).unwrap();
        assert_eq!(d.payoff, PayoffPoint::new(rat(-1, 5), rat(1, 5)));
        assert!(d.limit);
        match &d.design {
            DesignChoice::Pure(c) => {
                assert_eq!(c.by_subgroup[SINGLE_LABEL].atoms[0].mass, rat(1, 5) - &eps);
            }
            _ => panic!("expected pure design"),
        }
    }

    #[test]
    fn hedge_design_high_side_is_exact() {
        let d = implementing_design(&rat(13, 20), &full(), VertexKind::Hedge, &default_epsilon())
            .unwrap();
        assert_eq!(d.payoff, PayoffPoint::new(zero(), rat(3, 5)));
        assert!(!d.limit);
        match &d.design {
            DesignChoice::Pure(c) => {
                let q = &c.by_subgroup[SINGLE_LABEL].atoms[0].mass;
                assert_eq!(q, &rat(7, 10));
                // The boundary design itself attains the hedge point.
                let eval =
                    evaluate_design(&rat(13, 20), &full(), &c.by_subgroup[SINGLE_LABEL]).unwrap();
                assert_eq!(eval, d.payoff);
            }
            _ => panic!("expected pure design"),
        }
    }

    #[test]
    fn hedge_outside_regime_is_refused() {
        assert!(matches!(
            implementing_design(&rat(1, 5), &full(), VertexKind::Hedge, &default_epsilon()),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn hedge_perturbation_converges_linearly() {
        // p <= 1/2: payoffs at q_h - eps approach the hedge point linearly.
        let p = rat(2, 5);
        let hedge = PayoffPoint::new(rat(-1, 5), rat(1, 5));
        for denom in [100i64, 200, 400] {
            let eps = rat(1, denom);
            let design = SubgroupDesign::bernoulli(rat(1, 5) - &eps);
            let got = evaluate_design(&p, &full(), &design).unwrap();
            assert_eq!(got.worst, &hedge.worst + &eps);
            assert_eq!(got.best, &hedge.best - &eps);
        }
        // p > 1/2: the approach is from above.
        let p = rat(13, 20);
        let hedge = PayoffPoint::new(zero(), rat(3, 5));
        for denom in [100i64, 200, 400] {
            let eps = rat(1, denom);
            let design = SubgroupDesign::bernoulli(rat(7, 10) + &eps);
            let got = evaluate_design(&p, &full(), &design).unwrap();
            assert_eq!(got.worst, &hedge.worst + &eps);
            assert_eq!(got.best, &hedge.best - &eps);
        }
    }

    #[test]
    fn boundary_hedge_design_is_strictly_worse_on_the_low_side() {
        // Treating exactly q_h hands the misaligned advisor the
        // complementary mass: payoff 4p - 2 instead of -q_h.
        let p = rat(2, 5);
        let got = evaluate_design(&p, &full(), &SubgroupDesign::bernoulli(rat(1, 5))).unwrap();
        assert_eq!(got, PayoffPoint::new(rat(-2, 5), rat(1, 5)));
    }

    #[test]
    fn evaluate_design_examples() {
        let got = evaluate_design(&rat(2, 5), &full(), &SubgroupDesign::bernoulli(rat(2, 5)))
            .unwrap();
        assert_eq!(got, PayoffPoint::new(rat(-3, 5), rat(2, 5)));

        let got = evaluate_design(&rat(1, 4), &full(), &SubgroupDesign::bernoulli(rat(1, 10)))
            .unwrap();
        assert_eq!(got, PayoffPoint::new(rat(-1, 10), rat(1, 10)));

        let got = evaluate_design(&rat(2, 5), &full(), &SubgroupDesign::constant()).unwrap();
        assert_eq!(got, PayoffPoint::new(zero(), zero()));
    }

    #[test]
    fn vertex_attainment() {
        let cases = [
            (rat(2, 5), TauBounds::full()),
            (rat(1, 4), TauBounds::full()),
            (rat(13, 20), TauBounds::full()),
            (rat(2, 5), TauBounds::new(rat(1, 10), rat(9, 10))),
            (rat(3, 5), TauBounds::new(rat(1, 20), rat(19, 20))),
        ];
        for (p, tau) in cases {
            let f = single_frontier(&p, &tau).unwrap();
            for v in &f.vertices {
                if v.limit {
                    continue;
                }
                let design = match &v.design {
                    DesignChoice::Pure(c) => &c.by_subgroup[SINGLE_LABEL],
                    _ => panic!("expected pure design"),
                };
                let got = evaluate_design(&p, &tau, design).unwrap();
                assert_eq!(got, v.payoff, "vertex not attained at p = {p}");
            }
        }
    }

    #[test]
    fn degenerate_and_collapsed_regimes() {
        // Upper bound below 1/2: no treatment ever.
        let tau = TauBounds::new(zero(), rat(2, 5));
        let f = single_frontier(&rat(1, 5), &tau).unwrap();
        assert_eq!(payoffs(&f), vec![(zero(), zero())]);

        // Upper bound exactly 1/2: best case cannot beat the default.
        let tau = TauBounds::new(zero(), half());
        let f = single_frontier(&rat(1, 5), &tau).unwrap();
        assert_eq!(payoffs(&f), vec![(zero(), zero())]);

        // Degenerate bounds pin the posterior at p.
        let tau = TauBounds::new(rat(2, 5), rat(2, 5));
        let f = single_frontier(&rat(2, 5), &tau).unwrap();
        assert_eq!(payoffs(&f), vec![(zero(), zero())]);

        // Mirror side: lower bound above 1/2 forces universal treatment.
        let tau = TauBounds::new(rat(3, 5), one());
        let f = single_frontier(&rat(7, 10), &tau).unwrap();
        assert_eq!(payoffs(&f), vec![(rat(2, 5), rat(2, 5))]);
    }

    #[test]
    fn thresholds_match_unconstrained_knife_edges() {
        let t = tau_thresholds(&rat(2, 5), &TauBounds::full()).unwrap();
        assert_eq!(t.p1.unwrap(), rat(1, 3));
        assert_eq!(t.p2, half());
        assert_eq!(t.p3.unwrap(), rat(2, 3));
        assert_eq!(t.q_t, rat(2, 5));
        assert_eq!(t.q_h, rat(1, 5));
        let t = tau_thresholds(&rat(2, 5), &TauBounds::new(rat(1, 10), rat(9, 10))).unwrap();
        assert_eq!(t.p1.unwrap(), rat(11, 30));
        assert_eq!(t.q_t, rat(3, 8));
        assert_eq!(t.q_h, rat(1, 4));
    }

    #[test]
    fn mirror_symmetry_up_to_translation() {
        // Relabeling outcomes and complementing actions maps the problem at
        // (p, tau) to the problem at (1 - p, mirrored tau) and shifts every
        // payoff by 2p - 1; frontiers match vertex-by-vertex after the shift.
        let cases = [
            (rat(2, 5), TauBounds::full()),
            (rat(13, 20), TauBounds::full()),
            (rat(3, 5), TauBounds::new(rat(1, 20), rat(9, 10))),
            (rat(3, 4), TauBounds::new(rat(1, 10), rat(49, 50))),
        ];
        for (p, tau) in cases {
            let mirrored_tau = TauBounds::new(one() - &tau.upper, one() - &tau.lower);
            let mirrored_p = one() - &p;
            let f = single_frontier(&p, &tau).unwrap();
            let g = single_frontier(&mirrored_p, &mirrored_tau).unwrap();
            assert_eq!(f.vertices.len(), g.vertices.len(), "vertex count at p = {p}");
            let shift = if p > half() { rat(2, 1) * &p - one() } else { zero() };
            let back = if mirrored_p > half() {
                rat(2, 1) * &mirrored_p - one()
            } else {
                zero()
            };
            for (a, b) in f.vertices.iter().zip(&g.vertices) {
                assert_eq!(&a.payoff.worst - &shift, &b.payoff.worst - &back);
                assert_eq!(&a.payoff.best - &shift, &b.payoff.best - &back);
            }
        }
    }
}
