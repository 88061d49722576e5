//! Exhaustive CHAID trees for a continuous target over categorical
//! predictors: agglomerative category merging tracked at every level,
//! Bonferroni-adjusted best-grouping selection, and breadth-first recursive
//! splitting with stopping rules.
//!
//! The node-homogeneity test is the one-way ANOVA F-test: the target is
//! continuous, so a chi-square independence test does not apply. This choice
//! is recorded in tree metadata.

use crate::analysis::AnalysisRow;
use crate::statcore::{oneway_anova, Summary};
use crate::types::{Predictor, PredictorKind, Trait};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChaidError {
    #[error("no rows with a present target score")]
    EmptyTable,
    #[error("need at least 2 observed categories to split")]
    SingleCategory,
    #[error("bonferroni multiplier domain: need 1 <= r <= c, got c = {c}, r = {r}")]
    BadMultiplierArgs { c: usize, r: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaidParams {
    pub alpha_split: f64,
    /// Kept for interface compatibility; the exhaustive merge explores every
    /// level, so no merge-stage threshold applies.
    pub alpha_merge: f64,
    pub max_depth: usize,
    pub min_parent: usize,
    pub min_child: usize,
    pub bonferroni: bool,
    /// Overrides for merge semantics; predictors not listed use their
    /// built-in kind.
    #[serde(default)]
    pub predictor_kinds: BTreeMap<Predictor, PredictorKind>,
}

impl Default for ChaidParams {
    fn default() -> Self {
        ChaidParams {
            alpha_split: 0.05,
            alpha_merge: 0.05,
            max_depth: 3,
            min_parent: 100,
            min_child: 50,
            bonferroni: true,
            predictor_kinds: BTreeMap::new(),
        }
    }
}

impl ChaidParams {
    pub fn kind_of(&self, p: Predictor) -> PredictorKind {
        self.predictor_kinds.get(&p).copied().unwrap_or(p.kind())
    }
}

/// A candidate split: merged category groups with the adjusted p-value of
/// the grouping's between-group F-test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub predictor: Predictor,
    /// Disjoint code sets covering every observed code, each sorted, ordered
    /// by smallest code.
    pub groups: Vec<Vec<u8>>,
    pub raw_p: f64,
    pub multiplier: u64,
    pub adjusted_p: f64,
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaidNode {
    pub id: usize,
    pub depth: usize,
    pub parent: Option<usize>,
    pub split: Option<SplitCandidate>,
    pub child_ids: Vec<usize>,
    pub n: u64,
    pub mean: f64,
    pub sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaidTree {
    pub target: Trait,
    pub params: ChaidParams,
    /// Statistical test used for merging and splitting.
    pub test: String,
    /// Node ids are dense 0..N-1 in breadth-first creation order.
    pub nodes: Vec<ChaidNode>,
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn stirling2(n: usize, k: usize) -> u64 {
    if k == 0 {
        return (n == 0) as u64;
    }
    if k > n {
        return 0;
    }
    // S(n, k) = k S(n-1, k) + S(n-1, k-1)
    let mut row = vec![0u64; k + 1];
    row[0] = 1; // S(0, 0)
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = j as u64 * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    row[k]
}

/// Number of admissible ways to partition `c` observed categories into `r`
/// nonempty groups: all set partitions for nominal predictors, interval
/// partitions for ordinal ones.
pub fn bonferroni_multiplier(
    c: usize,
    r: usize,
    kind: PredictorKind,
) -> Result<u64, ChaidError> {
    if r < 1 || r > c {
        return Err(ChaidError::BadMultiplierArgs { c, r });
    }
    Ok(match kind {
        PredictorKind::Nominal => stirling2(c, r),
        PredictorKind::Ordinal => binomial(c as u64 - 1, r as u64 - 1),
    })
}

/// Ordinal variant when the floating missing category 0 is observed:
/// `c_nonzero` interval-constrained categories plus a 0 that may join any
/// group or stand alone.
pub fn bonferroni_multiplier_floating(
    c_nonzero: usize,
    r: usize,
) -> Result<u64, ChaidError> {
    let c = c_nonzero + 1;
    if r < 1 || r > c {
        return Err(ChaidError::BadMultiplierArgs { c, r });
    }
    if c_nonzero == 0 {
        return Ok(1);
    }
    let intervals = |groups: usize| -> u64 {
        if groups == 0 {
            0
        } else {
            binomial(c_nonzero as u64 - 1, groups as u64 - 1)
        }
    };
    // 0 alone (nonzero codes form r-1 intervals) or attached to one of r
    // interval groups.
    let zero_alone = if r >= 2 { intervals(r - 1) } else { 0 };
    Ok(zero_alone + r as u64 * intervals(r))
}

#[derive(Debug, Clone)]
struct Group {
    codes: Vec<u8>,
    summary: Summary,
}

impl Group {
    fn is_floating(&self) -> bool {
        self.codes == [0]
    }
}

/// Pairwise mergeability test; undefined tests count as fully mergeable.
fn pairwise_p(a: &Summary, b: &Summary) -> f64 {
    match oneway_anova(&[*a, *b]) {
        Ok(r) => r.p,
        Err(_) => 1.0,
    }
}

fn overall_raw_p(groups: &[Group]) -> (f64, f64) {
    let summaries: Vec<Summary> = groups.iter().map(|g| g.summary).collect();
    match oneway_anova(&summaries) {
        Ok(r) => (r.p, if r.f.is_finite() { r.f } else { f64::MAX }),
        Err(_) => (1.0, 0.0),
    }
}

/// Mergeable pairs at the current level: any pair for nominal predictors;
/// for ordinal ones only neighbours in code order, with a lone 0 floating
/// freely.
fn mergeable_pairs(groups: &[Group], kind: PredictorKind) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    match kind {
        PredictorKind::Nominal => {
            for i in 0..groups.len() {
                for j in i + 1..groups.len() {
                    pairs.push((i, j));
                }
            }
        }
        PredictorKind::Ordinal => {
            let fixed: Vec<usize> = (0..groups.len())
                .filter(|&i| !groups[i].is_floating())
                .collect();
            for w in fixed.windows(2) {
                pairs.push((w[0], w[1]));
            }
            if let Some(float) = (0..groups.len()).find(|&i| groups[i].is_floating()) {
                for &i in &fixed {
                    pairs.push((i.min(float), i.max(float)));
                }
            }
        }
    }
    pairs
}

/// Exhaustive merge for one predictor: repeatedly merge the most similar
/// admissible pair, score every level r >= 2 with its Bonferroni-adjusted
/// overall p, and return the level with the smallest adjusted p (ties go to
/// fewer groups).
pub fn merge_categories(
    predictor: Predictor,
    categories: &[(u8, Summary)],
    kind: PredictorKind,
    params: &ChaidParams,
) -> Result<SplitCandidate, ChaidError> {
    let c = categories.len();
    if c < 2 {
        return Err(ChaidError::SingleCategory);
    }
    debug_assert!(categories.windows(2).all(|w| w[0].0 < w[1].0));
    let has_zero = categories[0].0 == 0;

    let multiplier_at = |r: usize| -> Result<u64, ChaidError> {
        if kind == PredictorKind::Ordinal && has_zero {
            bonferroni_multiplier_floating(c - 1, r)
        } else {
            bonferroni_multiplier(c, r, kind)
        }
    };

    let mut groups: Vec<Group> = categories
        .iter()
        .map(|(code, summary)| Group {
            codes: vec![*code],
            summary: *summary,
        })
        .collect();

    let mut best: Option<SplitCandidate> = None;
    loop {
        let r = groups.len();
        let (raw_p, statistic) = overall_raw_p(&groups);
        let multiplier = if params.bonferroni { multiplier_at(r)? } else { 1 };
        let adjusted_p = (raw_p * multiplier as f64).min(1.0);
        let replace = match &best {
            None => true,
            // Iteration runs from many groups to few, so on ties the later
            // (fewer-group) level wins.
            Some(b) => adjusted_p <= b.adjusted_p,
        };
        if replace {
            best = Some(SplitCandidate {
                predictor,
                groups: groups.iter().map(|g| g.codes.clone()).collect(),
                raw_p,
                multiplier,
                adjusted_p,
                statistic,
            });
        }
        if r == 2 {
            break;
        }

        // Merge the admissible pair with the largest pairwise p.
        let pairs = mergeable_pairs(&groups, kind);
        let (i, j) = pairs
            .iter()
            .copied()
            .max_by(|&(a1, b1), &(a2, b2)| {
                pairwise_p(&groups[a1].summary, &groups[b1].summary)
                    .total_cmp(&pairwise_p(&groups[a2].summary, &groups[b2].summary))
            })
            .expect("at least one mergeable pair exists for r >= 3");
        let absorbed = groups.remove(j);
        groups[i].summary = groups[i].summary.merge(&absorbed.summary);
        groups[i].codes.extend(absorbed.codes);
        groups[i].codes.sort_unstable();
        // Keep groups ordered by smallest code for deterministic output.
        groups.sort_by_key(|g| g.codes[0]);
    }

    Ok(best.expect("at least the initial level was scored"))
}

/// Evaluate every predictor at a node and pick the winning candidate, if
/// any survives the significance and child-size rules.
pub fn best_split(
    values: &[f64],
    codes: &[Vec<u8>],
    predictors: &[Predictor],
    params: &ChaidParams,
) -> Option<SplitCandidate> {
    let candidates: Vec<Option<SplitCandidate>> = predictors
        .par_iter()
        .enumerate()
        .map(|(pi, &p)| {
            let mut by_code: BTreeMap<u8, Summary> = BTreeMap::new();
            for (v, row_codes) in values.iter().zip(codes) {
                by_code.entry(row_codes[pi]).or_default().push(*v);
            }
            let categories: Vec<(u8, Summary)> = by_code.into_iter().collect();
            let candidate =
                merge_categories(p, &categories, params.kind_of(p), params).ok()?;
            if candidate.adjusted_p >= params.alpha_split {
                return None;
            }
            // Every child must carry at least min_child rows.
            let group_ns = candidate.groups.iter().map(|g| {
                g.iter()
                    .map(|code| {
                        categories
                            .iter()
                            .find(|(c, _)| c == code)
                            .map_or(0, |(_, s)| s.n)
                    })
                    .sum::<u64>()
            });
            if group_ns.clone().any(|n| (n as usize) < params.min_child) {
                return None;
            }
            Some(candidate)
        })
        .collect();

    // Deterministic selection: smallest adjusted p, ties by declared
    // predictor order, then by fewer groups.
    let mut winner: Option<SplitCandidate> = None;
    for candidate in candidates.into_iter().flatten() {
        let better = match &winner {
            None => true,
            Some(w) => {
                candidate.adjusted_p < w.adjusted_p
                    || (candidate.adjusted_p == w.adjusted_p
                        && candidate.groups.len() < w.groups.len())
            }
        };
        if better {
            winner = Some(candidate);
        }
    }
    winner
}

/// Grow a tree breadth-first. Rows with a missing target are excluded up
/// front; node statistics come from single-pass summaries.
pub fn grow_tree(
    rows: &[AnalysisRow],
    target: Trait,
    predictors: &[Predictor],
    params: &ChaidParams,
) -> Result<ChaidTree, ChaidError> {
    let mut values = Vec::new();
    let mut codes: Vec<Vec<u8>> = Vec::new();
    for row in rows {
        if let Some(score) = row.scores.get(target) {
            values.push(score as f64);
            codes.push(predictors.iter().map(|&p| row.predictors.get(p)).collect());
        }
    }
    if values.is_empty() {
        return Err(ChaidError::EmptyTable);
    }

    let mut nodes: Vec<ChaidNode> = Vec::new();
    // Queue of (node id, member row indices).
    let mut queue: std::collections::VecDeque<(usize, Vec<usize>)> =
        std::collections::VecDeque::new();

    let root_members: Vec<usize> = (0..values.len()).collect();
    nodes.push(make_node(0, 0, None, &root_members, &values));
    queue.push_back((0, root_members));

    while let Some((id, members)) = queue.pop_front() {
        let depth = nodes[id].depth;
        if depth >= params.max_depth || members.len() < params.min_parent {
            continue;
        }
        let node_values: Vec<f64> = members.iter().map(|&i| values[i]).collect();
        let node_codes: Vec<Vec<u8>> = members.iter().map(|&i| codes[i].clone()).collect();
        let Some(candidate) = best_split(&node_values, &node_codes, predictors, params)
        else {
            continue;
        };

        let pi = predictors
            .iter()
            .position(|&p| p == candidate.predictor)
            .expect("candidate predictor came from the list");
        let mut child_ids = Vec::with_capacity(candidate.groups.len());
        for group in &candidate.groups {
            let child_members: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&i| group.contains(&codes[i][pi]))
                .collect();
            let child_id = nodes.len();
            nodes.push(make_node(child_id, depth + 1, Some(id), &child_members, &values));
            child_ids.push(child_id);
            queue.push_back((child_id, child_members));
        }
        nodes[id].split = Some(candidate);
        nodes[id].child_ids = child_ids;
    }

    Ok(ChaidTree {
        target,
        params: params.clone(),
        test: "one-way ANOVA F".to_string(),
        nodes,
    })
}

fn make_node(
    id: usize,
    depth: usize,
    parent: Option<usize>,
    members: &[usize],
    values: &[f64],
) -> ChaidNode {
    let mut summary = Summary::new();
    for &i in members {
        summary.push(values[i]);
    }
    ChaidNode {
        id,
        depth,
        parent,
        split: None,
        child_ids: Vec::new(),
        n: summary.n,
        mean: summary.mean,
        sd: summary.sd(),
    }
}

impl ChaidTree {
    pub fn root(&self) -> &ChaidNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &ChaidNode> {
        self.nodes.iter().filter(|n| n.split.is_none())
    }

    /// Predictors appearing in any split.
    pub fn split_predictors(&self) -> Vec<Predictor> {
        let mut out = Vec::new();
        for node in &self.nodes {
            if let Some(s) = &node.split {
                if !out.contains(&s.predictor) {
                    out.push(s.predictor);
                }
            }
        }
        out
    }

    /// Route a record to its leaf. Codes unseen at training follow the group
    /// containing 0 when present, else the largest-n child (ties to the
    /// smallest id).
    pub fn assign_node(&self, predictors: &crate::encoding::EncodedPredictors) -> usize {
        let mut id = 0;
        while let Some(split) = &self.nodes[id].split {
            let code = predictors.get(split.predictor);
            let child_pos = split
                .groups
                .iter()
                .position(|g| g.contains(&code))
                .or_else(|| split.groups.iter().position(|g| g.contains(&0)))
                .unwrap_or_else(|| {
                    let children = &self.nodes[id].child_ids;
                    children
                        .iter()
                        .enumerate()
                        .max_by(|(_, &a), (_, &b)| {
                            self.nodes[a]
                                .n
                                .cmp(&self.nodes[b].n)
                                .then(self.nodes[b].id.cmp(&self.nodes[a].id))
                        })
                        .map(|(pos, _)| pos)
                        .expect("split nodes have children")
                });
            id = self.nodes[id].child_ids[child_pos];
        }
        id
    }

    /// Graphviz DOT rendering: node label id/n/mean/sd, edge label the
    /// category group.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        out.push_str("digraph chaid {\n");
        out.push_str("  node [shape=box];\n");
        out.push_str(&format!(
            "  label=\"target {} ({})\";\n",
            self.target,
            self.target.full_name()
        ));
        for node in &self.nodes {
            let sd = node
                .sd
                .map_or("n/a".to_string(), |s| format!("{s:.2}"));
            out.push_str(&format!(
                "  n{} [label=\"Node {}\\nn={} mean={:.2} sd={}\"];\n",
                node.id, node.id, node.n, node.mean, sd
            ));
        }
        for node in &self.nodes {
            if let Some(split) = &node.split {
                for (group, child) in split.groups.iter().zip(&node.child_ids) {
                    let label: Vec<String> = group.iter().map(|c| c.to_string()).collect();
                    out.push_str(&format!(
                        "  n{} -> n{} [label=\"{} in {{{}}}\"];\n",
                        node.id,
                        child,
                        split.predictor,
                        label.join(",")
                    ));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}
