//! Gadget encodings that turn a 3-CNF formula into a social network which
//! admits a full majority illusion exactly when the formula is satisfiable,
//! plus the padded variant that targets an arbitrary threshold q in (1/2, 1].
//!
//! A variable gadget has eleven nodes: a 4-clique whose members all carry
//! dependants, the two literal nodes below it, and five dependants. A clause
//! gadget has sixteen nodes around a 5-clique; three of its members accept
//! an external edge from a literal node. The balance gadget pads the red
//! side so that blue wins globally by exactly one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{is_3cnf, CnfFormula};
use crate::fraction::{threshold_h_star, Fraction, FractionError};
use crate::network::{Colour, Labelling, NetworkError, SocialNetwork};

#[derive(Debug, Error)]
pub enum EncodingError {
    #[error("formula is not in 3-CNF")]
    Not3Cnf,
    #[error("balance gadget needs k >= 2, got {0}")]
    BalanceTooSmall(usize),
    #[error(transparent)]
    Fraction(#[from] FractionError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("model does not satisfy the encoded formula")]
    UnsatisfyingModel,
    #[error("model assigns {0} variables but the formula has {1}")]
    ModelSize(usize, usize),
}

/// What part a node plays in a verification encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerificationRole {
    VariableClique { var: usize },
    Literal { var: usize, negated: bool },
    ClauseClique { clause: usize },
    CoDependant { clause: usize },
    Dependant { target: usize },
    Balance,
    PaddingPair { pair: usize },
}

/// Node ids of one wired variable gadget.
#[derive(Debug, Clone, Copy)]
pub struct VariableGadgetIds {
    pub clique: [usize; 4],
    pub positive_literal: usize,
    pub negative_literal: usize,
    /// (dependant, clique member it hangs off); the first clique member
    /// carries two dependants, the rest one each.
    pub dependants: [(usize, usize); 5],
}

fn wire_variable_gadget(sn: &mut SocialNetwork, ids: &VariableGadgetIds) -> Result<(), NetworkError> {
    let [a, b, c, d] = ids.clique;
    for (i, &u) in ids.clique.iter().enumerate() {
        for &v in &ids.clique[i + 1..] {
            sn.add_edge(u, v)?;
        }
    }
    for lit in [ids.positive_literal, ids.negative_literal] {
        sn.add_edge(c, lit)?;
        sn.add_edge(d, lit)?;
    }
    debug_assert_eq!(
        [ids.dependants[0].1, ids.dependants[1].1, ids.dependants[2].1, ids.dependants[3].1, ids.dependants[4].1],
        [a, a, b, c, d]
    );
    for &(dep, target) in &ids.dependants {
        sn.add_edge(dep, target)?;
    }
    Ok(())
}

fn variable_gadget_ids(clique_base: usize, literal_base: usize, dep_base: usize) -> VariableGadgetIds {
    let clique = [clique_base, clique_base + 1, clique_base + 2, clique_base + 3];
    VariableGadgetIds {
        clique,
        positive_literal: literal_base,
        negative_literal: literal_base + 1,
        dependants: [
            (dep_base, clique[0]),
            (dep_base + 1, clique[0]),
            (dep_base + 2, clique[1]),
            (dep_base + 3, clique[2]),
            (dep_base + 4, clique[3]),
        ],
    }
}

/// An eleven-node variable gadget as a separate network. Nodes 0..4 are the
/// clique, 4 and 5 the literal pair, 6..11 the dependants.
pub struct VariableGadget {
    pub network: SocialNetwork,
    pub ids: VariableGadgetIds,
}

pub fn build_variable_gadget() -> VariableGadget {
    let ids = variable_gadget_ids(0, 4, 6);
    let mut network = SocialNetwork::new(11);
    wire_variable_gadget(&mut network, &ids).expect("fixed wiring is valid");
    VariableGadget { network, ids }
}

impl VariableGadget {
    /// The unique illusion-inducing labelling with the positive literal red.
    pub fn type_a(&self) -> Labelling {
        self.labelling_with_red_literal(self.ids.positive_literal)
    }

    /// The unique illusion-inducing labelling with the negative literal red.
    pub fn type_b(&self) -> Labelling {
        self.labelling_with_red_literal(self.ids.negative_literal)
    }

    fn labelling_with_red_literal(&self, literal: usize) -> Labelling {
        let mut lab = Labelling::uniform(11, Colour::Blue);
        for &c in &self.ids.clique {
            lab.set(c, Colour::Red);
        }
        lab.set(literal, Colour::Red);
        lab
    }
}

/// Node ids of one wired clause gadget (literal nodes excluded; ports point
/// at the three clique members that receive the external literal edges).
#[derive(Debug, Clone, Copy)]
pub struct ClauseGadgetIds {
    pub clique: [usize; 5],
    /// Clique members wired to the first, second, and third literal of the
    /// clause (top-left, central, top-right).
    pub ports: [usize; 3],
    /// Co-dependant paired with the same-index port member.
    pub co_dependants: [usize; 3],
    pub dependants: [(usize, usize); 8],
}

fn clause_gadget_ids(clique_base: usize, dep_base: usize) -> ClauseGadgetIds {
    let clique = [
        clique_base,
        clique_base + 1,
        clique_base + 2,
        clique_base + 3,
        clique_base + 4,
    ];
    let (s, a, b, c, d) = (clique[0], clique[1], clique[2], clique[3], clique[4]);
    ClauseGadgetIds {
        clique,
        ports: [a, s, b],
        co_dependants: [clique_base + 6, clique_base + 5, clique_base + 7],
        dependants: [
            (dep_base, s),
            (dep_base + 1, s),
            (dep_base + 2, a),
            (dep_base + 3, a),
            (dep_base + 4, b),
            (dep_base + 5, b),
            (dep_base + 6, c),
            (dep_base + 7, d),
        ],
    }
}

fn wire_clause_gadget(sn: &mut SocialNetwork, ids: &ClauseGadgetIds) -> Result<(), NetworkError> {
    for (i, &u) in ids.clique.iter().enumerate() {
        for &v in &ids.clique[i + 1..] {
            sn.add_edge(u, v)?;
        }
    }
    // Each port member holds its co-dependant; the co-dependants form a
    // triangle among themselves.
    for (&port, &co) in ids.ports.iter().zip(&ids.co_dependants) {
        sn.add_edge(port, co)?;
    }
    for i in 0..3 {
        for j in i + 1..3 {
            sn.add_edge(ids.co_dependants[i], ids.co_dependants[j])?;
        }
    }
    for &(dep, target) in &ids.dependants {
        sn.add_edge(dep, target)?;
    }
    Ok(())
}

/// A sixteen-node clause gadget as a separate network (external literal
/// nodes not included). Local layout: 0..5 clique, 5..8 co-dependants,
/// 8..16 dependants.
pub struct ClauseGadget {
    pub network: SocialNetwork,
    pub ids: ClauseGadgetIds,
}

pub fn build_clause_gadget() -> ClauseGadget {
    let ids = clause_gadget_ids(0, 8);
    let mut network = SocialNetwork::new(16);
    wire_clause_gadget(&mut network, &ids).expect("fixed wiring is valid");
    ClauseGadget { network, ids }
}

impl ClauseGadget {
    /// The gadget-internal red set when the literal attached to port `slot`
    /// is red: the whole 5-clique plus the co-dependants of the other two
    /// ports (seven red nodes).
    pub fn red_set_for_satisfied_slot(&self, slot: usize) -> Vec<usize> {
        let mut reds: Vec<usize> = self.ids.clique.to_vec();
        for (i, &co) in self.ids.co_dependants.iter().enumerate() {
            if i != slot {
                reds.push(co);
            }
        }
        reds
    }
}

/// A balance gadget: `k` nodes split into connected pairs, plus one
/// triangle when `k` is odd.
pub fn build_balance_gadget(k: usize) -> Result<SocialNetwork, EncodingError> {
    if k < 2 {
        return Err(EncodingError::BalanceTooSmall(k));
    }
    let mut sn = SocialNetwork::new(k);
    let pairs = if k.is_multiple_of(2) { k / 2 } else { (k - 3) / 2 };
    for p in 0..pairs {
        sn.add_edge(2 * p, 2 * p + 1)?;
    }
    if k % 2 == 1 {
        let t = 2 * pairs;
        sn.add_edge(t, t + 1)?;
        sn.add_edge(t + 1, t + 2)?;
        sn.add_edge(t, t + 2)?;
    }
    Ok(sn)
}

/// A 3-CNF formula encoded as a social network, with role metadata.
#[derive(Debug, Clone)]
pub struct GadgetEncoding {
    pub network: SocialNetwork,
    pub roles: Vec<VerificationRole>,
    /// Literal (positive or negative variable index, 1-based as in CNF) to
    /// its literal node.
    pub literal_index: BTreeMap<i32, usize>,
    pub formula: CnfFormula,
    pub variable_count: usize,
    pub clause_count: usize,
    pub expected_node_count: usize,
    /// Maximum red count compatible with a strict blue majority.
    pub i_phi: usize,
    /// Number of appended padding pairs (zero for the plain encoding).
    pub padding_pairs: usize,
    variable_ids: Vec<VariableGadgetIds>,
    clause_ids: Vec<ClauseGadgetIds>,
    balance_range: (usize, usize),
}

impl GadgetEncoding {
    pub fn variable_gadget(&self, var: usize) -> &VariableGadgetIds {
        &self.variable_ids[var]
    }

    pub fn clause_gadget(&self, clause: usize) -> &ClauseGadgetIds {
        &self.clause_ids[clause]
    }

    pub fn balance_nodes(&self) -> std::ops::Range<usize> {
        self.balance_range.0..self.balance_range.1
    }

    pub fn base_node_count(&self) -> usize {
        self.expected_node_count
    }
}

/// Builds the plain encoding of a 3-CNF formula: one variable gadget per
/// variable, one clause gadget per clause with its three ports wired to the
/// literal nodes of the clause, and a balance gadget of m + 2n - 1 nodes.
/// Total size is 12m + 18n - 1.
///
/// Node ids are laid out with all branching-relevant nodes (cliques,
/// literals, co-dependants, balance) before the dependants, which keeps the
/// lowest-id-first search of the solvers effective.
pub fn encode_3cnf(f: &CnfFormula) -> Result<GadgetEncoding, EncodingError> {
    if !is_3cnf(f) {
        return Err(EncodingError::Not3Cnf);
    }
    let m = f.variable_count();
    let n = f.clause_count();
    let balance_k = m + 2 * n - 1;
    let expected = 12 * m + 18 * n - 1;

    let clause_base = 6 * m;
    let balance_base = clause_base + 8 * n;
    let dep_base = balance_base + balance_k;

    let mut roles = vec![VerificationRole::Balance; expected];
    let mut sn = SocialNetwork::new(expected);

    let mut variable_ids = Vec::with_capacity(m);
    let mut literal_index = BTreeMap::new();
    for var in 0..m {
        let ids = variable_gadget_ids(6 * var, 6 * var + 4, dep_base + 5 * var);
        wire_variable_gadget(&mut sn, &ids)?;
        for &c in &ids.clique {
            roles[c] = VerificationRole::VariableClique { var };
        }
        roles[ids.positive_literal] = VerificationRole::Literal { var, negated: false };
        roles[ids.negative_literal] = VerificationRole::Literal { var, negated: true };
        for &(dep, target) in &ids.dependants {
            roles[dep] = VerificationRole::Dependant { target };
        }
        literal_index.insert(var as i32 + 1, ids.positive_literal);
        literal_index.insert(-(var as i32 + 1), ids.negative_literal);
        variable_ids.push(ids);
    }

    let mut clause_ids = Vec::with_capacity(n);
    for clause in 0..n {
        let ids = clause_gadget_ids(clause_base + 8 * clause, dep_base + 5 * m + 8 * clause);
        wire_clause_gadget(&mut sn, &ids)?;
        for &c in &ids.clique {
            roles[c] = VerificationRole::ClauseClique { clause };
        }
        for &co in &ids.co_dependants {
            roles[co] = VerificationRole::CoDependant { clause };
        }
        for &(dep, target) in &ids.dependants {
            roles[dep] = VerificationRole::Dependant { target };
        }
        // Wire the three literal slots to their ports.
        for (slot, &lit) in f.clauses()[clause].iter().enumerate() {
            sn.add_edge(literal_index[&lit], ids.ports[slot])?;
        }
        clause_ids.push(ids);
    }

    let balance = build_balance_gadget(balance_k)?;
    for (u, v) in balance.edges() {
        sn.add_edge(balance_base + u, balance_base + v)?;
    }

    debug_assert_eq!(sn.node_count(), expected);
    Ok(GadgetEncoding {
        network: sn,
        roles,
        literal_index,
        formula: f.clone(),
        variable_count: m,
        clause_count: n,
        expected_node_count: expected,
        i_phi: 6 * m + 9 * n - 1,
        padding_pairs: 0,
        variable_ids,
        clause_ids,
        balance_range: (balance_base, balance_base + balance_k),
    })
}

/// The padded encoding for a threshold q in (1/2, 1]: the plain encoding
/// plus h* disconnected pairs, where h* is sized against the plain
/// encoding's node count so that the q threshold falls exactly between
/// "everything illuded" and "one node short".
pub fn encode_q(f: &CnfFormula, q: Fraction) -> Result<GadgetEncoding, EncodingError> {
    if !q.is_majority_threshold() {
        return Err(EncodingError::Fraction(FractionError::OutOfRange(q, "(1/2, 1]")));
    }
    let mut enc = encode_3cnf(f)?;
    let h = threshold_h_star(enc.expected_node_count as u64, q)? as usize;
    let base = enc.network.node_count();
    let mut sn = enc.network.clone();
    let mut pair_net = SocialNetwork::new(2 * h);
    for p in 0..h {
        pair_net.add_edge(2 * p, 2 * p + 1)?;
    }
    sn.append_disjoint(&pair_net);
    for p in 0..h {
        enc.roles.push(VerificationRole::PaddingPair { pair: p });
        enc.roles.push(VerificationRole::PaddingPair { pair: p });
    }
    debug_assert_eq!(sn.node_count(), base + 2 * h);
    enc.network = sn;
    enc.padding_pairs = h;
    Ok(enc)
}

/// Builds the witness labelling of an encoding from a satisfying model:
/// type A or B per variable gadget, seven reds per clause gadget arranged
/// around its first satisfied literal, the balance gadget all red, and one
/// red node per padding pair. Everything else is blue.
pub fn labelling_from_model(enc: &GadgetEncoding, model: &[bool]) -> Result<Labelling, EncodingError> {
    if model.len() != enc.variable_count {
        return Err(EncodingError::ModelSize(model.len(), enc.variable_count));
    }
    let model_vec: Vec<bool> = model.to_vec();
    if !enc.formula.satisfies(&model_vec) {
        return Err(EncodingError::UnsatisfyingModel);
    }

    let mut lab = Labelling::uniform(enc.network.node_count(), Colour::Blue);
    for (var, ids) in enc.variable_ids.iter().enumerate() {
        for &c in &ids.clique {
            lab.set(c, Colour::Red);
        }
        let red_literal = if model[var] { ids.positive_literal } else { ids.negative_literal };
        lab.set(red_literal, Colour::Red);
    }
    for (clause, ids) in enc.clause_ids.iter().enumerate() {
        for &c in &ids.clique {
            lab.set(c, Colour::Red);
        }
        let satisfied_slot = enc.formula.clauses()[clause]
            .iter()
            .position(|&lit| {
                let value = model[(lit.unsigned_abs() - 1) as usize];
                (lit > 0) == value
            })
            .expect("model satisfies every clause");
        for (slot, &co) in ids.co_dependants.iter().enumerate() {
            if slot != satisfied_slot {
                lab.set(co, Colour::Red);
            }
        }
    }
    for node in enc.balance_nodes() {
        lab.set(node, Colour::Red);
    }
    let pad_base = enc.expected_node_count;
    for p in 0..enc.padding_pairs {
        lab.set(pad_base + 2 * p, Colour::Red);
    }
    Ok(lab)
}

/// Checks the per-role bookkeeping of an encoding: eleven nodes per
/// variable gadget, sixteen per clause gadget, the right balance size, and
/// every node carrying exactly one role.
pub fn audit_roles(enc: &GadgetEncoding) -> Result<(), String> {
    let mut per_var = vec![0usize; enc.variable_count];
    let mut per_clause = vec![0usize; enc.clause_count];
    let mut balance = 0usize;
    let mut padding = 0usize;
    if enc.roles.len() != enc.network.node_count() {
        return Err(format!("{} roles for {} nodes", enc.roles.len(), enc.network.node_count()));
    }
    for (node, role) in enc.roles.iter().enumerate() {
        match *role {
            VerificationRole::VariableClique { var } | VerificationRole::Literal { var, .. } => {
                per_var[var] += 1
            }
            VerificationRole::ClauseClique { clause } | VerificationRole::CoDependant { clause } => {
                per_clause[clause] += 1
            }
            VerificationRole::Dependant { target } => {
                if enc.network.dependant_target(node) != Some(target) {
                    return Err(format!("node {node} is not a dependant of {target}"));
                }
                match enc.roles[target] {
                    VerificationRole::VariableClique { var } => per_var[var] += 1,
                    VerificationRole::ClauseClique { clause } => per_clause[clause] += 1,
                    _ => return Err(format!("dependant {node} hangs off a non-clique node")),
                }
            }
            VerificationRole::Balance => balance += 1,
            VerificationRole::PaddingPair { .. } => padding += 1,
        }
    }
    for (var, &count) in per_var.iter().enumerate() {
        if count != 11 {
            return Err(format!("variable gadget {var} has {count} nodes, want 11"));
        }
    }
    for (clause, &count) in per_clause.iter().enumerate() {
        if count != 16 {
            return Err(format!("clause gadget {clause} has {count} nodes, want 16"));
        }
    }
    let want_balance = enc.variable_count + 2 * enc.clause_count - 1;
    if balance != want_balance {
        return Err(format!("balance gadget has {balance} nodes, want {want_balance}"));
    }
    if padding != 2 * enc.padding_pairs {
        return Err(format!("{padding} padding nodes for {} pairs", enc.padding_pairs));
    }
    Ok(())
}
