//! Closed-form payoff benchmarks and feasibility sets.
//!
//! For a population in which a fraction `p` needs treatment and a fraction
//! `q` is treated, these functions give the designer's expected payoff under
//! the best and worst couplings of treatment with need, with and without
//! bounds `tau` on how informative the auxiliary covariate may be. The
//! `feasible_ic_set` function is the set of treated fractions an advisor can
//! induce through an incentive-compatible report; its endpoints carry exact
//! open/closed flags because the underlying suprema are attained only in the
//! limit at open endpoints.
//!
//! Two algebraically equivalent routes are kept deliberately distinct:
//! the targeting forms (`best_targeting_tau`, `worst_targeting_tau`)
//! branch on population thresholds, while the extremization forms
//! (`phi_best`, `phi_worst`) branch on the treated-fraction threshold
//! `q_hat = (p - lower) / (upper - lower)`. Tests assert they agree.

use crate::error::Error;
use crate::problem::TauBounds;
use crate::rational::{half, one, rat, zero, Rational};

/// An interval within `[0, 1]` with exact endpoint openness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn left_open(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: true }
    }

    pub fn contains(&self, q: &Rational) -> bool {
        let above = if self.lo_closed { q >= &self.lo } else { q > &self.lo };
        let below = if self.hi_closed { q <= &self.hi } else { q < &self.hi };
        above && below
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

/// Up to two disjoint, sorted intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSet {
    pub intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn single(interval: Interval) -> Self {
        IntervalSet { intervals: vec![interval] }
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.intervals.iter().any(|i| i.contains(q))
    }

    /// Set inclusion, honoring endpoint openness.
    pub fn subset_of(&self, other: &IntervalSet) -> bool {
        self.intervals.iter().all(|a| {
            other.intervals.iter().any(|b| {
                let lo_ok = a.lo > b.lo || (a.lo == b.lo && (b.lo_closed || !a.lo_closed));
                let hi_ok = a.hi < b.hi || (a.hi == b.hi && (b.hi_closed || !a.hi_closed));
                lo_ok && hi_ok
            })
        })
    }
}

fn check_unit(name: &str, value: &Rational) -> Result<(), Error> {
    if value < &zero() || value > &one() {
        return Err(Error::domain(name, format!("{value} outside [0, 1]")));
    }
    Ok(())
}

fn check_tau(p: &Rational, tau: &TauBounds) -> Result<(), Error> {
    check_unit("tau.lower", &tau.lower)?;
    check_unit("tau.upper", &tau.upper)?;
    if tau.lower > tau.upper {
        return Err(Error::domain("tau", "lower <= upper fails"));
    }
    if !tau.contains(p) {
        return Err(Error::domain("p", format!("{p} outside [{}, {}]", tau.lower, tau.upper)));
    }
    Ok(())
}

/// Expected payoff from the best action under the prior alone: treat nobody
/// when `p < 1/2`, everybody otherwise.
pub fn default_payoff(p: &Rational) -> Result<Rational, Error> {
    check_unit("p", p)?;
    if p < &half() {
        Ok(zero())
    } else {
        Ok(rat(2, 1) * p - one())
    }
}

/// Payoff when the `q`-fraction with highest treatment need is treated
/// (treatment and need comonotone).
pub fn best_targeting(p: &Rational, q: &Rational) -> Result<Rational, Error> {
    check_unit("p", p)?;
    check_unit("q", q)?;
    if p >= q {
        Ok(q.clone())
    } else {
        Ok(rat(2, 1) * p - q)
    }
}

/// Payoff when the worst `q`-fraction is treated (countermonotone).
pub fn worst_targeting(p: &Rational, q: &Rational) -> Result<Rational, Error> {
    check_unit("p", p)?;
    check_unit("q", q)?;
    if *p <= one() - q {
        Ok(-q.clone())
    } else {
        Ok(rat(2, 1) * p + q - rat(2, 1))
    }
}

/// Best-case payoff from treating a `q`-fraction when conditional
/// treatment-need probabilities are confined to `[lower, upper]`.
///
/// Reduces to [`best_targeting`] at `tau = (0, 1)`.
pub fn best_targeting_tau(p: &Rational, q: &Rational, tau: &TauBounds) -> Result<Rational, Error> {
    check_unit("q", q)?;
    check_tau(p, tau)?;
    let threshold = q * &tau.upper + (one() - q) * &tau.lower;
    if p >= &threshold {
        Ok(q * (rat(2, 1) * &tau.upper - one()))
    } else {
        Ok(rat(2, 1) * (p - (one() - q) * &tau.lower) - q)
    }
}

/// Worst-case payoff from treating a `q`-fraction under `tau` bounds.
///
/// Reduces to [`worst_targeting`] at `tau = (0, 1)`.
pub fn worst_targeting_tau(p: &Rational, q: &Rational, tau: &TauBounds) -> Result<Rational, Error> {
    check_unit("q", q)?;
    check_tau(p, tau)?;
    let threshold = q * &tau.lower + (one() - q) * &tau.upper;
    if p <= &threshold {
        Ok(q * (rat(2, 1) * &tau.lower - one()))
    } else {
        Ok(rat(2, 1) * (p - (one() - q) * &tau.upper) - q)
    }
}

/// The treated-fraction threshold at which Nature's best assignment can no
/// longer put probability `upper` on every treated patient.
pub fn q_hat(p: &Rational, tau: &TauBounds) -> Option<Rational> {
    if tau.lower == tau.upper {
        return None;
    }
    Some((p - &tau.lower) / (&tau.upper - &tau.lower))
}

/// Nature's most favorable payoff when a fraction `q` is treated: maximizes
/// `q (2 pi1 - 1)` over posterior assignments within the `tau` bounds that
/// average to `p`.
///
/// With degenerate bounds (`lower == upper == p`) every assignment is the
/// constant `p`, so the value is `q (2p - 1)`.
pub fn phi_best(p: &Rational, q: &Rational, tau: &TauBounds) -> Result<Rational, Error> {
    check_unit("q", q)?;
    check_tau(p, tau)?;
    match q_hat(p, tau) {
        None => Ok(q * (rat(2, 1) * p - one())),
        Some(hat) => {
            if q <= &hat {
                Ok(q * (rat(2, 1) * &tau.upper - one()))
            } else {
                Ok(rat(2, 1) * p - rat(2, 1) * (one() - q) * &tau.lower - q)
            }
        }
    }
}

/// Nature's least favorable payoff when a fraction `q` is treated.
pub fn phi_worst(p: &Rational, q: &Rational, tau: &TauBounds) -> Result<Rational, Error> {
    check_unit("q", q)?;
    check_tau(p, tau)?;
    match q_hat(p, tau) {
        None => Ok(q * (rat(2, 1) * p - one())),
        Some(hat) => {
            if *q <= one() - &hat {
                Ok(q * (rat(2, 1) * &tau.lower - one()))
            } else {
                Ok(rat(2, 1) * p - rat(2, 1) * (one() - q) * &tau.upper - q)
            }
        }
    }
}

/// The set of treated fractions `q` attainable by an incentive-compatible
/// report: there must exist posteriors `pi1 >= 1/2 > pi0`, both within the
/// `tau` bounds, averaging to `p`.
///
/// Endpoint openness is exact. For `tau = (0, 1)` this is `[0, 2p]` for
/// `p < 1/2`, `(0, 1]` at `p = 1/2`, and `(2p - 1, 1]` for `p > 1/2`.
pub fn feasible_ic_set(p: &Rational, tau: &TauBounds) -> Result<IntervalSet, Error> {
    check_tau(p, tau)?;
    let h = half();
    let interval = if p < &h {
        if tau.upper < h {
            // No posterior can reach 1/2: treatment can never be induced.
            Interval::closed(zero(), zero())
        } else {
            let cap = rat(2, 1) * (p - &tau.lower) / (one() - rat(2, 1) * &tau.lower);
            Interval::closed(zero(), cap)
        }
    } else if p == &h {
        if tau.upper == h {
            Interval::closed(one(), one())
        } else {
            Interval::left_open(zero(), one())
        }
    } else {
        if tau.lower >= h || p == &tau.upper {
            // Every cell's posterior stays weakly above 1/2 (or the mean
            // pins all mass at the upper bound): everyone is treated.
            Interval::closed(one(), one())
        } else {
            let floor = (rat(2, 1) * p - one()) / (rat(2, 1) * &tau.upper - one());
            Interval::left_open(floor, one())
        }
    };
    Ok(IntervalSet::single(interval))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau(lo: (i64, i64), hi: (i64, i64)) -> TauBounds {
        TauBounds::new(rat(lo.0, lo.1), rat(hi.0, hi.1))
    }

    /// Brute-force coupling oracle: extremize `P(A=1, Y=1) - P(A=1, Y=0)`
    /// over joint laws with marginals `A ~ Ber(q)`, `Y ~ Ber(p)`, by
    /// scanning the overlap `P(A=1, Y=1)` on a fine rational grid.
    fn coupling_oracle(p: &Rational, q: &Rational, maximize: bool) -> Rational {
        let lo = std::cmp::max(zero(), p + q - one());
        let hi = std::cmp::min(p.clone(), q.clone());
        let steps = 256i64;
        let mut best: Option<Rational> = None;
        for k in 0..=steps {
            let overlap = &lo + (&hi - &lo) * rat(k, steps);
            let value = rat(2, 1) * &overlap - q;
            let better = match &best {
                None => true,
                Some(b) => {
                    if maximize {
                        value > *b
                    } else {
                        value < *b
                    }
                }
            };
            if better {
                best = Some(value);
            }
        }
        best.expect("nonempty grid")
    }

    #[test]
    fn default_payoff_examples() {
        assert_eq!(default_payoff(&rat(2, 5)).unwrap(), zero());
        assert_eq!(default_payoff(&rat(13, 20)).unwrap(), rat(3, 10));
        assert_eq!(default_payoff(&half()).unwrap(), zero());
        assert!(default_payoff(&rat(3, 2)).is_err());
    }

    #[test]
    fn best_targeting_examples() {
        assert_eq!(best_targeting(&rat(2, 5), &rat(2, 5)).unwrap(), rat(2, 5));
        assert_eq!(best_targeting(&zero(), &zero()).unwrap(), zero());
        assert_eq!(best_targeting(&rat(3, 10), &half()).unwrap(), rat(1, 10));
    }

    #[test]
    fn worst_targeting_examples() {
        assert_eq!(worst_targeting(&rat(2, 5), &rat(3, 5)).unwrap(), rat(-3, 5));
        assert_eq!(worst_targeting(&rat(7, 10), &rat(7, 10)).unwrap(), rat(1, 10));
        for k in 0..=10 {
            assert_eq!(worst_targeting(&rat(k, 10), &zero()).unwrap(), zero());
        }
    }

    #[test]
    fn targeting_matches_coupling_oracle() {
        for pk in 0..=16 {
            for qk in 0..=16 {
                let p = rat(pk, 16);
                let q = rat(qk, 16);
                assert_eq!(
                    best_targeting(&p, &q).unwrap(),
                    coupling_oracle(&p, &q, true),
                    "b({p}, {q})"
                );
                assert_eq!(
                    worst_targeting(&p, &q).unwrap(),
                    coupling_oracle(&p, &q, false),
                    "w({p}, {q})"
                );
            }
        }
    }

    #[test]
    fn tau_forms_reduce_to_unconstrained() {
        let full = TauBounds::full();
        for pk in 0..=64 {
            for qk in 0..=64 {
                let p = rat(pk, 64);
                let q = rat(qk, 64);
                assert_eq!(
                    best_targeting_tau(&p, &q, &full).unwrap(),
                    best_targeting(&p, &q).unwrap()
                );
                assert_eq!(
                    worst_targeting_tau(&p, &q, &full).unwrap(),
                    worst_targeting(&p, &q).unwrap()
                );
                assert_eq!(phi_best(&p, &q, &full).unwrap(), best_targeting(&p, &q).unwrap());
                assert_eq!(phi_worst(&p, &q, &full).unwrap(), worst_targeting(&p, &q).unwrap());
            }
        }
    }

    #[test]
    fn tau_targeting_examples() {
        let t = tau((1, 10), (9, 10));
        assert_eq!(best_targeting_tau(&rat(2, 5), &rat(1, 4), &t).unwrap(), rat(1, 5));
        // Threshold holds with equality: first branch.
        assert_eq!(best_targeting_tau(&rat(2, 5), &rat(3, 8), &t).unwrap(), rat(3, 10));
        assert_eq!(worst_targeting_tau(&rat(2, 5), &rat(5, 8), &t).unwrap(), rat(-1, 2));
        assert_eq!(worst_targeting_tau(&rat(2, 5), &rat(1, 4), &t).unwrap(), rat(-1, 5));
    }

    #[test]
    fn phi_examples() {
        let full = TauBounds::full();
        assert_eq!(phi_worst(&rat(2, 5), &rat(7, 10), &full).unwrap(), rat(-1, 2));
        assert_eq!(phi_best(&rat(2, 5), &rat(2, 5), &full).unwrap(), rat(2, 5));
        // Degenerate bounds force the constant assignment.
        let point = tau((2, 5), (2, 5));
        assert_eq!(phi_best(&rat(2, 5), &half(), &point).unwrap(), rat(-1, 10));
        assert_eq!(phi_worst(&rat(2, 5), &half(), &point).unwrap(), rat(-1, 10));
    }

    #[test]
    fn phi_and_targeting_forms_agree() {
        let taus = [tau((0, 1), (1, 1)), tau((1, 10), (9, 10)), tau((1, 8), (1, 1)), tau((0, 1), (5, 8))];
        for t in &taus {
            for pk in 0..=32 {
                let p = rat(pk, 32);
                if !t.contains(&p) {
                    continue;
                }
                for qk in 0..=32 {
                    let q = rat(qk, 32);
                    assert_eq!(
                        phi_best(&p, &q, t).unwrap(),
                        best_targeting_tau(&p, &q, t).unwrap()
                    );
                    assert_eq!(
                        phi_worst(&p, &q, t).unwrap(),
                        worst_targeting_tau(&p, &q, t).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn branch_continuity_at_thresholds() {
        // Both branch expressions agree at the exact threshold q.
        let t = tau((1, 10), (9, 10));
        let p = rat(2, 5);
        let hat = q_hat(&p, &t).unwrap();
        let first = &hat * (rat(2, 1) * &t.upper - one());
        let second = rat(2, 1) * &p - rat(2, 1) * (one() - &hat) * &t.lower - &hat;
        assert_eq!(first, second);
        let anti = one() - &hat;
        let first_w = &anti * (rat(2, 1) * &t.lower - one());
        let second_w = rat(2, 1) * &p - rat(2, 1) * (one() - &anti) * &t.upper - &anti;
        assert_eq!(first_w, second_w);
    }

    #[test]
    fn feasible_set_examples() {
        let full = TauBounds::full();
        let set = feasible_ic_set(&rat(3, 10), &full).unwrap();
        assert_eq!(set.intervals[0], Interval::closed(zero(), rat(3, 5)));

        let set = feasible_ic_set(&rat(3, 5), &full).unwrap();
        assert_eq!(set.intervals[0], Interval::left_open(rat(1, 5), one()));
        assert!(!set.contains(&rat(1, 5)));
        assert!(set.contains(&one()));

        let set = feasible_ic_set(&rat(2, 5), &tau((1, 10), (9, 10))).unwrap();
        assert_eq!(set.intervals[0], Interval::closed(zero(), rat(3, 4)));

        let set = feasible_ic_set(&half(), &full).unwrap();
        assert_eq!(set.intervals[0], Interval::left_open(zero(), one()));
    }

    #[test]
    fn feasible_set_degenerate_corners() {
        // p at the lower bound: only q = 0.
        let set = feasible_ic_set(&rat(1, 10), &tau((1, 10), (1, 1))).unwrap();
        assert_eq!(set.intervals[0], Interval::closed(zero(), zero()));
        // p at the upper bound above 1/2: only q = 1.
        let set = feasible_ic_set(&rat(7, 10), &tau((0, 1), (7, 10))).unwrap();
        assert_eq!(set.intervals[0], Interval::closed(one(), one()));
        // Upper bound below 1/2: treatment can never be induced.
        let set = feasible_ic_set(&rat(1, 5), &tau((0, 1), (2, 5))).unwrap();
        assert_eq!(set.intervals[0], Interval::closed(zero(), zero()));
    }

    #[test]
    fn monotone_nesting() {
        // Tighter bounds shrink the feasible set.
        let wide = tau((1, 20), (19, 20));
        let narrow = tau((1, 10), (9, 10));
        for pk in 2..=18 {
            let p = rat(pk, 20);
            let inner = feasible_ic_set(&p, &narrow).unwrap();
            let outer = feasible_ic_set(&p, &wide).unwrap();
            assert!(inner.subset_of(&outer), "nesting fails at p = {p}");
        }
    }

    #[test]
    fn bounds_property() {
        let taus = [tau((0, 1), (1, 1)), tau((1, 10), (9, 10)), tau((1, 5), (4, 5))];
        for t in &taus {
            for pk in 0..=20 {
                let p = rat(pk, 20);
                if !t.contains(&p) {
                    continue;
                }
                for qk in 0..=20 {
                    let q = rat(qk, 20);
                    let w = worst_targeting_tau(&p, &q, t).unwrap();
                    let b = best_targeting_tau(&p, &q, t).unwrap();
                    assert!(-&q <= w, "w >= -q fails at p={p}, q={q}");
                    assert!(w <= b, "w <= b fails at p={p}, q={q}");
                    assert!(b <= q, "b <= q fails at p={p}, q={q}");
                }
            }
        }
    }
}
