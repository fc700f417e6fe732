//! Social networks, binary labellings, winners, illusion reports, and edge
//! edit plans.
//!
//! A social network is an undirected irreflexive graph over dense node ids
//! `0..n`. Winners are always strict majorities: a tie means the winner does
//! not exist, and a node can only be under illusion when both the global and
//! its local winner exist and differ. Everything here is immutable after
//! construction and safe to share across threads.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fraction::Fraction;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("node {0} out of range for a network with {1} nodes")]
    NodeOutOfRange(usize, usize),
    #[error("self-loop at node {0} is not allowed")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) already present")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) not present")]
    MissingEdge(usize, usize),
    #[error("labelling has {0} entries but the network has {1} nodes")]
    LabellingSize(usize, usize),
    #[error("plan addition ({0}, {1}) is already an edge")]
    AdditionExists(usize, usize),
    #[error("plan removal ({0}, {1}) is not an edge")]
    RemovalMissing(usize, usize),
    #[error("plan lists ({0}, {1}) both as addition and removal")]
    AdditionRemovalOverlap(usize, usize),
}

/// One of the two opinion colours of the binary setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Colour {
    Blue,
    Red,
}

impl Colour {
    pub fn swapped(self) -> Colour {
        match self {
            Colour::Blue => Colour::Red,
            Colour::Red => Colour::Blue,
        }
    }
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Colour::Blue => write!(f, "b"),
            Colour::Red => write!(f, "r"),
        }
    }
}

/// Undirected irreflexive graph over node ids `0..node_count`.
///
/// Adjacency is stored per node in sorted order; each unordered pair appears
/// once in [`SocialNetwork::edges`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialNetwork {
    adjacency: Vec<BTreeSet<usize>>,
}

impl SocialNetwork {
    pub fn new(node_count: usize) -> Self {
        SocialNetwork { adjacency: vec![BTreeSet::new(); node_count] }
    }

    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self, NetworkError> {
        let mut sn = SocialNetwork::new(node_count);
        for &(u, v) in edges {
            sn.add_edge(u, v)?;
        }
        Ok(sn)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    fn check_node(&self, i: usize) -> Result<(), NetworkError> {
        if i >= self.node_count() {
            Err(NetworkError::NodeOutOfRange(i, self.node_count()))
        } else {
            Ok(())
        }
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<(), NetworkError> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(NetworkError::SelfLoop(u));
        }
        Ok(())
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), NetworkError> {
        self.check_pair(u, v)?;
        if !self.adjacency[u].insert(v) {
            return Err(NetworkError::DuplicateEdge(u, v));
        }
        self.adjacency[v].insert(u);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> Result<(), NetworkError> {
        self.check_pair(u, v)?;
        if !self.adjacency[u].remove(&v) {
            return Err(NetworkError::MissingEdge(u, v));
        }
        self.adjacency[v].remove(&u);
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency.get(u).is_some_and(|s| s.contains(&v))
    }

    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i].iter().copied()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Unordered edges `(u, v)` with `u < v`, in sorted order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            for &v in nbrs.range(u + 1..) {
                out.push((u, v));
            }
        }
        out
    }

    /// Unordered non-adjacent pairs `(u, v)` with `u < v`, in sorted order.
    pub fn non_edges(&self) -> Vec<(usize, usize)> {
        let n = self.node_count();
        let mut out = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if !self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Appends another network as a disjoint component, returning the id
    /// offset its nodes received.
    pub fn append_disjoint(&mut self, other: &SocialNetwork) -> usize {
        let offset = self.node_count();
        for nbrs in &other.adjacency {
            self.adjacency.push(nbrs.iter().map(|&v| v + offset).collect());
        }
        offset
    }

    /// The unique neighbour of `i` if `i` has exactly one, i.e. the node `i`
    /// is a dependant of.
    pub fn dependant_target(&self, i: usize) -> Option<usize> {
        if self.degree(i) == 1 {
            self.neighbours(i).next()
        } else {
            None
        }
    }
}

/// Total assignment of a colour to every node of a paired network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labelling {
    colours: Vec<Colour>,
}

impl Labelling {
    pub fn new(colours: Vec<Colour>) -> Self {
        Labelling { colours }
    }

    pub fn uniform(node_count: usize, colour: Colour) -> Self {
        Labelling { colours: vec![colour; node_count] }
    }

    /// Decodes a bitmask labelling: bit `n-1-i` of `mask` set means node `i`
    /// is red, so masks in increasing order enumerate labellings in
    /// lexicographic order with blue < red.
    pub fn from_mask(node_count: usize, mask: u64) -> Self {
        let colours = (0..node_count)
            .map(|i| {
                if mask >> (node_count - 1 - i) & 1 == 1 {
                    Colour::Red
                } else {
                    Colour::Blue
                }
            })
            .collect();
        Labelling { colours }
    }

    pub fn len(&self) -> usize {
        self.colours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colours.is_empty()
    }

    pub fn colour(&self, i: usize) -> Colour {
        self.colours[i]
    }

    pub fn colours(&self) -> &[Colour] {
        &self.colours
    }

    pub fn set(&mut self, i: usize, colour: Colour) {
        self.colours[i] = colour;
    }

    pub fn swapped(&self) -> Labelling {
        Labelling { colours: self.colours.iter().map(|c| c.swapped()).collect() }
    }

    pub fn count(&self, colour: Colour) -> usize {
        self.colours.iter().filter(|&&c| c == colour).count()
    }
}

/// A social network together with a labelling of its nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledNetwork {
    network: SocialNetwork,
    labelling: Labelling,
}

impl LabelledNetwork {
    pub fn new(network: SocialNetwork, labelling: Labelling) -> Result<Self, NetworkError> {
        if labelling.len() != network.node_count() {
            return Err(NetworkError::LabellingSize(labelling.len(), network.node_count()));
        }
        Ok(LabelledNetwork { network, labelling })
    }

    pub fn network(&self) -> &SocialNetwork {
        &self.network
    }

    pub fn labelling(&self) -> &Labelling {
        &self.labelling
    }

    pub fn node_count(&self) -> usize {
        self.network.node_count()
    }

    pub fn with_network(&self, network: SocialNetwork) -> Result<Self, NetworkError> {
        LabelledNetwork::new(network, self.labelling.clone())
    }

    /// The colour held by a strict majority of all nodes, if any.
    pub fn majority_winner(&self) -> Option<Colour> {
        let red = self.labelling.count(Colour::Red);
        let blue = self.labelling.len() - red;
        match red.cmp(&blue) {
            std::cmp::Ordering::Greater => Some(Colour::Red),
            std::cmp::Ordering::Less => Some(Colour::Blue),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// The strict majority colour in `i`'s open neighbourhood, if any.
    pub fn local_winner(&self, i: usize) -> Result<Option<Colour>, NetworkError> {
        self.network.check_node(i)?;
        let red = self.red_neighbours(i);
        let blue = self.network.degree(i) - red;
        Ok(match red.cmp(&blue) {
            std::cmp::Ordering::Greater => Some(Colour::Red),
            std::cmp::Ordering::Less => Some(Colour::Blue),
            std::cmp::Ordering::Equal => None,
        })
    }

    fn red_neighbours(&self, i: usize) -> usize {
        self.network.neighbours(i).filter(|&j| self.labelling.colour(j) == Colour::Red).count()
    }

    /// Blue-neighbour count minus red-neighbour count for node `i`.
    pub fn margin_of_victory(&self, i: usize) -> Result<i64, NetworkError> {
        self.network.check_node(i)?;
        let red = self.red_neighbours(i) as i64;
        let blue = self.network.degree(i) as i64 - red;
        Ok(blue - red)
    }

    pub fn illusion_report(&self) -> IllusionReport {
        let n = self.node_count();
        let global_winner = self.majority_winner();
        let mut local = Vec::with_capacity(n);
        let mut under = BTreeSet::new();
        for i in 0..n {
            let lw = self.local_winner(i).expect("node in range");
            if let (Some(g), Some(l)) = (global_winner, lw) {
                if g != l {
                    under.insert(i);
                }
            }
            local.push(lw);
        }
        let fraction = Fraction::ratio(under.len(), n.max(1)).expect("counts fit");
        IllusionReport {
            global_winner,
            per_node_local_winner: local,
            illuded_count: under.len(),
            under_illusion: under,
            fraction,
        }
    }

    /// True iff at least `q * n` nodes are under illusion, decided exactly
    /// as `illuded * denom >= numer * n`.
    pub fn is_q_illusion(&self, q: Fraction) -> bool {
        let report = self.illusion_report();
        report.meets_threshold(q, self.node_count())
    }

    pub fn swapped(&self) -> LabelledNetwork {
        LabelledNetwork { network: self.network.clone(), labelling: self.labelling.swapped() }
    }
}

/// Everything the illusion definitions say about one labelled network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IllusionReport {
    pub global_winner: Option<Colour>,
    pub per_node_local_winner: Vec<Option<Colour>>,
    pub under_illusion: BTreeSet<usize>,
    pub illuded_count: usize,
    pub fraction: Fraction,
}

impl IllusionReport {
    pub fn meets_threshold(&self, q: Fraction, node_count: usize) -> bool {
        use std::cmp::Ordering;
        // illuded * b >= a * n
        let lhs = self.illuded_count as i128 * q.denominator() as i128;
        let rhs = q.numerator() as i128 * node_count as i128;
        lhs.cmp(&rhs) != Ordering::Less
    }
}

/// A set of edge additions and removals against a base network.
///
/// Pairs are stored unordered (`u < v`); additions must be non-edges of the
/// base, removals must be edges, and the two sets are disjoint.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditPlan {
    #[serde(rename = "add")]
    pub additions: BTreeSet<(usize, usize)>,
    #[serde(rename = "remove")]
    pub removals: BTreeSet<(usize, usize)>,
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

impl EditPlan {
    pub fn empty() -> Self {
        EditPlan::default()
    }

    pub fn add(&mut self, u: usize, v: usize) {
        self.additions.insert(ordered(u, v));
    }

    pub fn remove(&mut self, u: usize, v: usize) {
        self.removals.insert(ordered(u, v));
    }

    pub fn size(&self) -> usize {
        self.additions.len() + self.removals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// The plan that undoes this one.
    pub fn inverse(&self) -> EditPlan {
        EditPlan { additions: self.removals.clone(), removals: self.additions.clone() }
    }

    pub fn validate(&self, sn: &SocialNetwork) -> Result<(), NetworkError> {
        for &(u, v) in &self.additions {
            sn.check_pair(u, v)?;
            if sn.has_edge(u, v) {
                return Err(NetworkError::AdditionExists(u, v));
            }
            if self.removals.contains(&(u, v)) {
                return Err(NetworkError::AdditionRemovalOverlap(u, v));
            }
        }
        for &(u, v) in &self.removals {
            sn.check_pair(u, v)?;
            if !sn.has_edge(u, v) {
                return Err(NetworkError::RemovalMissing(u, v));
            }
        }
        Ok(())
    }
}

/// Applies a validated plan, leaving the original network untouched. The
/// symmetric difference of the edge sets equals the plan size.
pub fn apply_edit_plan(sn: &SocialNetwork, plan: &EditPlan) -> Result<SocialNetwork, NetworkError> {
    plan.validate(sn)?;
    let mut out = sn.clone();
    for &(u, v) in &plan.additions {
        out.add_edge(u, v)?;
    }
    for &(u, v) in &plan.removals {
        out.remove_edge(u, v)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ln(n: usize, edges: &[(usize, usize)], reds: &[usize]) -> LabelledNetwork {
        let sn = SocialNetwork::from_edges(n, edges).unwrap();
        let mut lab = Labelling::uniform(n, Colour::Blue);
        for &r in reds {
            lab.set(r, Colour::Red);
        }
        LabelledNetwork::new(sn, lab).unwrap()
    }

    /// Blue centre with two red leaves, plus a disjoint blue edge. Exactly
    /// the centre is under illusion.
    fn five_node_example() -> LabelledNetwork {
        ln(5, &[(0, 1), (0, 2), (3, 4)], &[1, 2])
    }

    #[test]
    fn majority_winner_cases() {
        assert_eq!(ln(3, &[], &[]).majority_winner(), Some(Colour::Blue));
        assert_eq!(ln(4, &[], &[0, 1]).majority_winner(), None);
        assert_eq!(ln(3, &[], &[0, 1]).majority_winner(), Some(Colour::Red));
    }

    #[test]
    fn local_winner_cases() {
        let g = ln(4, &[(0, 1), (0, 2), (0, 3)], &[1, 2]);
        assert_eq!(g.local_winner(0).unwrap(), Some(Colour::Red));
        let tie = ln(3, &[(0, 1), (0, 2)], &[1]);
        assert_eq!(tie.local_winner(0).unwrap(), None);
        let isolated = ln(2, &[], &[1]);
        assert_eq!(isolated.local_winner(0).unwrap(), None);
        assert!(isolated.local_winner(7).is_err());
    }

    #[test]
    fn margin_cases() {
        let g = ln(4, &[(0, 1), (0, 2), (0, 3)], &[3]);
        assert_eq!(g.margin_of_victory(0).unwrap(), 1);
        assert_eq!(ln(1, &[], &[]).margin_of_victory(0).unwrap(), 0);
        let all_red = ln(5, &[(0, 1), (0, 2), (0, 3), (0, 4)], &[1, 2, 3, 4]);
        assert_eq!(all_red.margin_of_victory(0).unwrap(), -4);
    }

    #[test]
    fn report_on_all_blue_clique() {
        let g = ln(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], &[]);
        let r = g.illusion_report();
        assert_eq!(r.illuded_count, 0);
        assert_eq!(r.global_winner, Some(Colour::Blue));
    }

    #[test]
    fn report_on_five_node_example() {
        let r = five_node_example().illusion_report();
        assert_eq!(r.under_illusion.iter().copied().collect::<Vec<_>>(), vec![0]);
        assert_eq!(r.fraction, Fraction::new(1, 5).unwrap());
    }

    #[test]
    fn q_threshold_is_exact() {
        let g = five_node_example();
        assert!(g.is_q_illusion("1/5".parse().unwrap()));
        assert!(!g.is_q_illusion("1/4".parse().unwrap()));
        assert!(g.is_q_illusion(Fraction::ZERO));
    }

    #[test]
    fn edit_plan_application() {
        let sn = SocialNetwork::new(2);
        let mut plan = EditPlan::empty();
        plan.add(0, 1);
        let sn2 = apply_edit_plan(&sn, &plan).unwrap();
        assert!(sn2.has_edge(0, 1));
        assert!(!sn.has_edge(0, 1));

        let back = apply_edit_plan(&sn2, &plan.inverse()).unwrap();
        assert_eq!(back, sn);

        assert_eq!(apply_edit_plan(&sn, &EditPlan::empty()).unwrap(), sn);
        assert!(matches!(
            apply_edit_plan(&sn2, &plan),
            Err(NetworkError::AdditionExists(0, 1))
        ));
        let mut bad = EditPlan::empty();
        bad.remove(0, 1);
        assert!(matches!(apply_edit_plan(&sn, &bad), Err(NetworkError::RemovalMissing(0, 1))));
    }

    #[test]
    fn dependant_rule_on_full_illusion() {
        // If all nodes are illuded with blue winning, a dependant's target
        // must be red.
        let g = crate::fixtures::minority_fixture();
        let report = g.illusion_report();
        assert_eq!(report.illuded_count, g.node_count());
        assert_eq!(report.global_winner, Some(Colour::Blue));
        for i in 0..g.node_count() {
            if let Some(target) = g.network().dependant_target(i) {
                assert_eq!(g.labelling().colour(target), Colour::Red);
            }
        }
    }

    fn arbitrary_labelled(max_n: usize) -> impl Strategy<Value = LabelledNetwork> {
        (2..=max_n)
            .prop_flat_map(|n| {
                let edges = proptest::collection::btree_set((0..n, 0..n), 0..=n * 2);
                let mask = 0u64..(1u64 << n);
                (Just(n), edges, mask)
            })
            .prop_map(|(n, pairs, mask)| {
                let mut sn = SocialNetwork::new(n);
                for (u, v) in pairs {
                    if u != v && !sn.has_edge(u, v) {
                        sn.add_edge(u, v).unwrap();
                    }
                }
                LabelledNetwork::new(sn, Labelling::from_mask(n, mask)).unwrap()
            })
    }

    proptest! {
        #[test]
        fn colour_swap_preserves_under_illusion_set(g in arbitrary_labelled(9)) {
            let before = g.illusion_report();
            let after = g.swapped().illusion_report();
            prop_assert_eq!(before.under_illusion, after.under_illusion);
            prop_assert_eq!(before.global_winner.map(Colour::swapped), after.global_winner);
        }

        #[test]
        fn ties_and_isolated_nodes_are_never_illuded(g in arbitrary_labelled(9)) {
            let report = g.illusion_report();
            for i in 0..g.node_count() {
                if report.per_node_local_winner[i].is_none() {
                    prop_assert!(!report.under_illusion.contains(&i));
                }
            }
        }

        #[test]
        fn q_illusion_is_monotone_in_q(g in arbitrary_labelled(9), a in 0i64..=12, b in 1i64..=12) {
            prop_assume!(a <= b);
            let q = Fraction::new(a, b).unwrap();
            if g.is_q_illusion(q) {
                for a2 in 0..=a {
                    prop_assert!(g.is_q_illusion(Fraction::new(a2, b).unwrap()));
                }
            }
        }

        #[test]
        fn apply_then_inverse_is_identity(g in arbitrary_labelled(8)) {
            let sn = g.network();
            let edges = sn.edges();
            let non_edges = sn.non_edges();
            let mut plan = EditPlan::empty();
            for (i, &(u, v)) in non_edges.iter().enumerate() {
                if i % 2 == 0 {
                    plan.add(u, v);
                }
            }
            for (i, &(u, v)) in edges.iter().enumerate() {
                if i % 3 == 0 {
                    plan.remove(u, v);
                }
            }
            let applied = apply_edit_plan(sn, &plan).unwrap();
            let sym_diff = applied
                .edges()
                .iter()
                .filter(|e| !sn.has_edge(e.0, e.1))
                .count()
                + edges.iter().filter(|e| !applied.has_edge(e.0, e.1)).count();
            prop_assert_eq!(sym_diff, plan.size());
            prop_assert_eq!(&apply_edit_plan(&applied, &plan.inverse()).unwrap(), sn);
        }
    }
}
