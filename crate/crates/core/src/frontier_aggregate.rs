//! Aggregation of subgroup frontiers into the population frontier.
//!
//! Payoffs add linearly across subgroups with the prior weights, so the
//! feasible set for the whole population is the weighted Minkowski sum of
//! the per-subgroup feasible sets, and its undominated boundary is obtained
//! by the standard edge merge for convex chains: concatenate every
//! subgroup's frontier segments sorted by slope. Hedging switches on
//! subgroup by subgroup as the designer's weight on the worst case grows,
//! in order of decreasing trust-hedge slope.

use std::collections::BTreeMap;

use num::traits::Signed;
use num::traits::Zero;

use crate::error::Error;
use crate::frontier_single::{default_epsilon, extreme_points_labeled, single_frontier_labeled};
use crate::problem::{
    CovariateDesign, DesignChoice, DesignPoint, Frontier, PayoffPoint, Problem, VertexKind,
};
use crate::rational::{half, one, zero, Rational};

/// The order in which subgroups switch from trust to hedge as the weight on
/// the worst case increases, with the exact switch thresholds.
///
/// `ordering` lists the subgroups whose frontier has a hedge vertex, sorted
/// by trust-hedge slope descending (flattest first, ties by label).
/// `alphas[j]` solves `-alpha/(1-alpha) = sigmas[j]`; one extra terminal
/// entry `1/2` marks the simultaneous switch to full distrust in the
/// unconstrained model. `hedge_points[j]` is the aggregate payoff from
/// hedging the first `j + 1` subgroups and trusting the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HedgeChain {
    pub ordering: Vec<String>,
    pub sigmas: Vec<Rational>,
    pub alphas: Vec<Rational>,
    pub hedge_points: Vec<PayoffPoint>,
    pub trust: PayoffPoint,
    pub distrust: PayoffPoint,
}

/// The optimizer's answer for one preference weight: the maximizing vertex,
/// with every tied vertex listed as an alternate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalPoint {
    pub primary: DesignPoint,
    /// Other vertices achieving the same score (boundary weights).
    pub alternates: Vec<DesignPoint>,
    pub score: Rational,
    /// Index of `primary` in the aggregate frontier's vertex list.
    pub vertex_index: usize,
}

fn design_of(vertex: &DesignPoint) -> Result<&CovariateDesign, Error> {
    match &vertex.design {
        DesignChoice::Pure(d) => Ok(d),
        DesignChoice::Mixture { .. } => Err(Error::NonConcaveChain(
            "minkowski merge expects pure vertex designs".into(),
        )),
    }
}

fn merge_designs(
    frontiers: &[Frontier],
    positions: &[usize],
) -> Result<(CovariateDesign, bool), Error> {
    let mut merged = BTreeMap::new();
    let mut limit = false;
    for (i, frontier) in frontiers.iter().enumerate() {
        let vertex = &frontier.vertices[positions[i]];
        limit = limit || vertex.limit;
        for (label, design) in &design_of(vertex)?.by_subgroup {
            let key = if merged.contains_key(label) {
                format!("f{i}.{label}")
            } else {
                label.clone()
            };
            merged.insert(key, design.clone());
        }
    }
    Ok((CovariateDesign { by_subgroup: merged }, limit))
}

/// Upper-left boundary of the weighted Minkowski sum of concave frontier
/// chains. Equal-slope edges coalesce into a single segment, so degenerate
/// vertices never appear. Fed the per-subgroup frontiers with the prior
/// weights, this is exactly the population frontier.
pub fn minkowski_sum(frontiers: &[Frontier], weights: &[Rational]) -> Result<Frontier, Error> {
    if frontiers.is_empty() || frontiers.len() != weights.len() {
        return Err(Error::domain("weights", "need one weight per frontier"));
    }
    if weights.iter().any(|w| w.is_negative()) {
        return Err(Error::domain("weights", "must be nonnegative"));
    }
    if weights.iter().fold(zero(), |acc, w| acc + w) != one() {
        return Err(Error::domain("weights", "must sum to 1"));
    }

    struct Edge {
        slope: Rational,
        d_worst: Rational,
        d_best: Rational,
        source: usize,
        target: usize,
    }

    let mut edges = Vec::new();
    let mut start = PayoffPoint::new(zero(), zero());
    let mut notes = Vec::new();
    for (i, (frontier, weight)) in frontiers.iter().zip(weights).enumerate() {
        start = start.plus(&frontier.vertices[0].payoff.scaled(weight));
        for note in &frontier.notes {
            notes.push(format!("input {i}: {note}"));
        }
        if weight.is_zero() {
            continue;
        }
        for seg in &frontier.segments {
            let a = &frontier.vertices[seg.from].payoff;
            let b = &frontier.vertices[seg.to].payoff;
            edges.push(Edge {
                slope: seg.slope.clone(),
                d_worst: weight * (&b.worst - &a.worst),
                d_best: weight * (&b.best - &a.best),
                source: i,
                target: seg.to,
            });
        }
    }
    // Ascending slope from the distrust end; source index settles exact ties
    // deterministically (tied edges coalesce into one segment anyway).
    edges.sort_by(|a, b| a.slope.cmp(&b.slope).then(a.source.cmp(&b.source)));

    let mut positions = vec![0usize; frontiers.len()];
    let (design, limit) = merge_designs(frontiers, &positions)?;
    let mut vertices = vec![DesignPoint {
        payoff: start.clone(),
        kind: VertexKind::Distrust,
        design: DesignChoice::Pure(design),
        limit,
    }];
    let mut payoff = start;

    let mut idx = 0;
    while idx < edges.len() {
        let mut end = idx;
        while end < edges.len() && edges[end].slope == edges[idx].slope {
            payoff = payoff.plus(&PayoffPoint::new(
                edges[end].d_worst.clone(),
                edges[end].d_best.clone(),
            ));
            positions[edges[end].source] = edges[end].target;
            end += 1;
        }
        let last = end == edges.len();
        let (design, limit) = merge_designs(frontiers, &positions)?;
        vertices.push(DesignPoint {
            payoff: payoff.clone(),
            kind: if last { VertexKind::Trust } else { VertexKind::Hedge },
            design: DesignChoice::Pure(design),
            limit,
        });
        idx = end;
    }

    Frontier::with_notes(vertices, notes)
}

fn subgroup_frontiers(problem: &Problem) -> Result<(Vec<Frontier>, Vec<Rational>), Error> {
    let eps = default_epsilon();
    let mut frontiers = Vec::new();
    let mut weights = Vec::new();
    for s in &problem.subgroups {
        frontiers.push(single_frontier_labeled(&s.label, &s.p, &s.tau, &eps)?);
        weights.push(s.weight.clone());
    }
    Ok((frontiers, weights))
}

/// The population frontier: weighted Minkowski sum of the per-subgroup
/// frontiers. Vertices carry the per-subgroup designs implementing them.
pub fn aggregate_frontier(problem: &Problem) -> Result<Frontier, Error> {
    let (frontiers, weights) = subgroup_frontiers(problem)?;
    let mut frontier = minkowski_sum(&frontiers, &weights)?;
    frontier.notes = frontier
        .notes
        .iter()
        .map(|n| match n.strip_prefix("input ") {
            Some(rest) => match rest.split_once(": ") {
                Some((idx, note)) => {
                    let i: usize = idx.parse().unwrap_or(0);
                    format!("{}: {note}", problem.subgroups[i].label)
                }
                None => n.clone(),
            },
            None => n.clone(),
        })
        .collect();
    Ok(frontier)
}

/// Orders the hedge-capable subgroups by how cheap hedging is and computes
/// the exact preference weights at which each switch happens.
pub fn hedge_chain(problem: &Problem) -> Result<HedgeChain, Error> {
    let eps = default_epsilon();
    let mut tops: BTreeMap<&str, PayoffPoint> = BTreeMap::new();
    let mut hedges: BTreeMap<&str, PayoffPoint> = BTreeMap::new();
    let mut chain: Vec<(&str, Rational)> = Vec::new();
    let mut trust = PayoffPoint::new(zero(), zero());
    let mut distrust = PayoffPoint::new(zero(), zero());
    for s in &problem.subgroups {
        let ep = extreme_points_labeled(&s.label, &s.p, &s.tau, &eps)?;
        trust = trust.plus(&ep.trust.payoff.scaled(&s.weight));
        distrust = distrust.plus(&ep.distrust.payoff.scaled(&s.weight));
        tops.insert(&s.label, ep.trust.payoff.clone());
        if let Some(hedge) = &ep.hedge {
            // A knife-edge subgroup has its trust vertex already at the
            // hedge point; its switch is free (sigma = 0).
            let sigma = if ep.trust.payoff == hedge.payoff { zero() } else { ep.sigma.clone() };
            hedges.insert(&s.label, hedge.payoff.clone());
            chain.push((&s.label, sigma));
        }
    }
    chain.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));

    let mut ordering = Vec::new();
    let mut sigmas = Vec::new();
    let mut alphas = Vec::new();
    let mut hedge_points = Vec::new();
    for j in 0..chain.len() {
        let (label, sigma) = &chain[j];
        ordering.push(label.to_string());
        sigmas.push(sigma.clone());
        alphas.push(-sigma / (one() - sigma));
        let mut point = PayoffPoint::new(zero(), zero());
        for s in &problem.subgroups {
            let hedged = chain[..=j].iter().any(|(l, _)| *l == s.label.as_str());
            let part = if hedged { &hedges[s.label.as_str()] } else { &tops[s.label.as_str()] };
            point = point.plus(&part.scaled(&s.weight));
        }
        hedge_points.push(point);
    }
    alphas.push(half());
    Ok(HedgeChain { ordering, sigmas, alphas, hedge_points, trust, distrust })
}

/// The frontier vertex maximizing `alpha * worst + (1 - alpha) * best`.
///
/// At boundary weights several vertices tie; the primary is the least
/// hedged one (closest to the trust end) and the others are returned as
/// alternates.
pub fn optimal_point(problem: &Problem, alpha: &Rational) -> Result<OptimalPoint, Error> {
    if alpha.is_negative() || alpha > &one() {
        return Err(Error::domain("alpha", "must be in [0, 1]"));
    }
    let frontier = aggregate_frontier(problem)?;
    let scores: Vec<Rational> =
        frontier.vertices.iter().map(|v| v.payoff.score(alpha)).collect();
    let best = scores.iter().max().expect("frontier is nonempty").clone();
    let tied: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == best).collect();
    let primary_index = *tied.last().expect("at least one maximizer");
    let alternates = tied
        .iter()
        .filter(|&&i| i != primary_index)
        .map(|&i| frontier.vertices[i].clone())
        .collect();
    Ok(OptimalPoint {
        primary: frontier.vertices[primary_index].clone(),
        alternates,
        score: best,
        vertex_index: primary_index,
    })
}
