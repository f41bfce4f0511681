//! Mixed beliefs about Nature: the four-cell payoff table and the
//! beta-weighted frontier.
//!
//! Here the advisor's alignment and Nature's benevolence are weighted
//! separately. With `beta` the probability of an adversarial Nature, the
//! worst case mixes the (adversarial, adversarial) and (benevolent,
//! adversarial) cells and the best case mixes the two aligned-advisor
//! cells. For `p < 1/3` and a binary covariate of mass `q <= p` the four
//! cells are `(-q, 0, 0, q)`: the off-diagonal cells vanish because a
//! benevolent Nature can neutralize a misaligned advisor (and vice versa)
//! by making the covariate uninformative.

use num::traits::Signed;
use num::traits::Zero;

use crate::error::Error;
use crate::oracle::{minimax_payoffs_oracle, OracleConfig};
use crate::problem::{
    CovariateDesign, DesignChoice, DesignPoint, Frontier, PayoffPoint, SubgroupDesign, TauBounds,
    VertexKind,
};
use crate::rational::{one, rat, zero, Rational};

/// Payoffs by (Nature, advisor) alignment; subscript order is Nature first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellPayoffs {
    /// Both adversarial: the baseline worst case.
    pub v_mm: Rational,
    /// Adversarial Nature, aligned advisor.
    pub v_ma: Rational,
    /// Benevolent Nature, misaligned advisor.
    pub v_am: Rational,
    /// Both benevolent: the baseline best case.
    pub v_aa: Rational,
}

impl CellPayoffs {
    /// Worst/best pair under adversarial-Nature weight `beta`.
    pub fn mix(&self, beta: &Rational) -> PayoffPoint {
        let rest = one() - beta;
        PayoffPoint::new(
            beta * &self.v_mm + &rest * &self.v_am,
            beta * &self.v_ma + &rest * &self.v_aa,
        )
    }
}

fn check_small_p(p: &Rational) -> Result<(), Error> {
    if p.is_negative() || p >= &rat(1, 3) {
        return Err(Error::UnsupportedRegime(format!(
            "the mixed-Nature analysis covers p < 1/3, got {p}"
        )));
    }
    Ok(())
}

/// Closed-form four-cell payoffs for a binary covariate `Ber(q)` with
/// `q <= p < 1/3`: `(-q, 0, 0, q)`. Larger treated masses are refused
/// rather than extrapolated (they are dominated by `q = p`).
pub fn four_cell_payoffs(p: &Rational, q: &Rational) -> Result<CellPayoffs, Error> {
    check_small_p(p)?;
    if q.is_negative() || q > p {
        return Err(Error::UnsupportedRegime(format!(
            "closed-form cells require 0 <= q <= p, got q = {q}"
        )));
    }
    Ok(CellPayoffs { v_mm: -q.clone(), v_ma: zero(), v_am: zero(), v_aa: q.clone() })
}

const FOUR_CELL_SUPPORT_CAP: usize = 6;

/// Brute-force four-cell evaluation of an arbitrary design.
///
/// The diagonal cells come from the minimax oracle. The off-diagonal cells
/// play the game directly: Nature picks conditional need probabilities on
/// the support (a `1/f_grid` lattice on all atoms but the last, which is
/// solved exactly from the mean constraint), the advisor picks the
/// payoff-extremal treated event among those with incentive-compatible
/// mass, and Nature extremizes the result.
pub fn four_cell_oracle(
    p: &Rational,
    design: &SubgroupDesign,
    f_grid: u32,
) -> Result<CellPayoffs, Error> {
    check_small_p(p)?;
    if design.support() > FOUR_CELL_SUPPORT_CAP {
        return Err(Error::SupportTooLarge {
            support: design.support(),
            cap: FOUR_CELL_SUPPORT_CAP,
        });
    }
    let tau = TauBounds::full();
    let cfg = OracleConfig::analytic(0).with_samples(0);
    let diag = minimax_payoffs_oracle(p, &tau, design, &cfg)?;
    let diag = diag.exact.expect("analytic mode returns exact payoffs");

    // Feasible treated events by mass (exact, open endpoints excluded).
    let feasible = crate::oracle::feasible_q_oracle(p, &tau, design, &cfg)?;
    let events: Vec<Vec<usize>> = feasible
        .feasible
        .iter()
        .map(|f| {
            f.event
                .iter()
                .map(|label| design.atoms.iter().position(|a| &a.label == label).unwrap())
                .collect()
        })
        .collect();

    let n = design.support();
    let mut v_ma: Option<Rational> = None;
    let mut v_am: Option<Rational> = None;
    let mut f = vec![zero(); n];
    enumerate_nature(design, p, f_grid, 0, &mut f, &mut |f: &[Rational]| {
        let score = |event: &[usize]| -> Rational {
            event
                .iter()
                .map(|&i| &design.atoms[i].mass * (rat(2, 1) * &f[i] - one()))
                .fold(zero(), |acc, v| acc + v)
        };
        let best = events.iter().map(|e| score(e)).max().expect("events nonempty");
        let worst = events.iter().map(|e| score(e)).min().expect("events nonempty");
        if v_ma.as_ref().map_or(true, |cur| &best < cur) {
            v_ma = Some(best);
        }
        if v_am.as_ref().map_or(true, |cur| &worst > cur) {
            v_am = Some(worst);
        }
    });
    Ok(CellPayoffs {
        v_mm: diag.worst,
        v_ma: v_ma.expect("nature has at least one assignment"),
        v_am: v_am.expect("nature has at least one assignment"),
        v_aa: diag.best,
    })
}

/// Enumerates Nature's conditional probabilities: lattice values on all
/// atoms but the last, the last solved exactly so the mean equals `p`.
fn enumerate_nature(
    design: &SubgroupDesign,
    p: &Rational,
    f_grid: u32,
    index: usize,
    f: &mut Vec<Rational>,
    visit: &mut dyn FnMut(&[Rational]),
) {
    let n = design.support();
    if index + 1 == n {
        let partial: Rational = (0..index)
            .map(|i| &design.atoms[i].mass * &f[i])
            .fold(zero(), |acc, v| acc + v);
        let last_mass = &design.atoms[index].mass;
        if last_mass.is_zero() {
            if &partial == p {
                f[index] = zero();
                visit(f);
            }
            return;
        }
        let solved = (p - partial) / last_mass;
        if solved.is_negative() || solved > one() {
            return;
        }
        f[index] = solved;
        visit(f);
        return;
    }
    for k in 0..=f_grid {
        f[index] = rat(k as i64, f_grid as i64);
        enumerate_nature(design, p, f_grid, index + 1, f, visit);
    }
}

/// The beta-weighted frontier for `p < 1/3`: the segment from the distrust
/// point to `(-beta p, (1 - beta) p)`, traversed by `Ber(q)` designs with
/// `q` up to `p`.
///
/// At `beta = 1` the weighted best case degenerates (an adversarial Nature
/// nullifies even an aligned advisor), and the function returns the
/// unweighted worst/best frontier instead: the slope `-1` segment to
/// `(-p, p)` of the baseline model.
pub fn hurwicz_frontier(p: &Rational, beta: &Rational) -> Result<Frontier, Error> {
    check_small_p(p)?;
    if !beta.is_positive() || beta > &one() {
        return Err(Error::UnsupportedRegime(format!(
            "beta must be in (0, 1], got {beta}"
        )));
    }
    if beta == &one() {
        return crate::frontier_single::single_frontier(p, &TauBounds::full());
    }
    let label = crate::frontier_single::SINGLE_LABEL;
    let distrust = DesignPoint {
        payoff: PayoffPoint::new(zero(), zero()),
        kind: VertexKind::Distrust,
        design: DesignChoice::Pure(CovariateDesign::single(label, SubgroupDesign::constant())),
        limit: false,
    };
    if p.is_zero() {
        return Frontier::from_vertices(vec![distrust]);
    }
    let trust = DesignPoint {
        payoff: PayoffPoint::new(-(beta * p), (one() - beta) * p),
        kind: VertexKind::Trust,
        design: DesignChoice::Pure(CovariateDesign::single(
            label,
            SubgroupDesign::bernoulli(p.clone()),
        )),
        limit: false,
    };
    Frontier::from_vertices(vec![distrust, trust])
}
