//! Elimination encodings: labelled networks built from 2P2N formulas in
//! which an illusion can be reduced to the requirement within the edit
//! budget exactly when the formula is satisfiable, plus the pump gadgets
//! that move the illuded fraction across an arbitrary threshold q in (0,1).
//!
//! Red pendant group sizes are derived from the margin each target node
//! must have (-1 for literal/extra/verifier nodes, -3 for auxiliary nodes,
//! +1 for literal nodes in the addition and removal variants), then
//! cross-checked against the closed-form counts stated alongside the
//! constructions; mismatches are recorded in `discrepancies` rather than
//! trusted, since several of those counts contradict the margins they are
//! supposed to produce.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{is_2p2n, CnfFormula};
use crate::fraction::{threshold_h_plus, threshold_h_sharp, Fraction, FractionError};
use crate::network::{
    Colour, EditPlan, Labelling, LabelledNetwork, NetworkError, SocialNetwork,
};

#[derive(Debug, Error)]
pub enum EliminationError {
    #[error("formula is not in 2P2N form")]
    Not2p2n,
    #[error("pump-up gadget needs k >= 1, got {0}")]
    PumpUpTooSmall(usize),
    #[error("pump-down gadget needs k >= 3, got {0}")]
    PumpDownTooSmall(usize),
    #[error("threshold sizing gives a pump-up of {0} nodes; cannot realise k >= 1")]
    PumpUnrealisable(u64),
    #[error("encoding already carries a pump gadget")]
    AlreadyPumped,
    #[error(transparent)]
    Fraction(#[from] FractionError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("model does not satisfy the encoded formula")]
    UnsatisfyingModel,
    #[error("model assigns {0} variables but the formula has {1}")]
    ModelSize(usize, usize),
    #[error("witness plan uses {size} edits, above the budget {budget}; construction bug")]
    InternalBudgetOverrun { size: usize, budget: usize },
}

/// Which of the three elimination reductions an encoding realises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EliminationVariant {
    /// Edits in both directions, budget 6m, requirement m.
    Mixed,
    /// Additions only.
    Addition,
    /// Removals only.
    Removal,
}

impl std::fmt::Display for EliminationVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EliminationVariant::Mixed => write!(f, "mixed"),
            EliminationVariant::Addition => write!(f, "addition"),
            EliminationVariant::Removal => write!(f, "removal"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EliminationRole {
    /// One of the three copies of a literal's node triple.
    LiteralNode { var: usize, negated: bool, copy: usize },
    Auxiliary { var: usize, negated: bool },
    Extra { var: usize },
    Verifier { clause: usize },
    /// Red pendant attached to a designated node to set its margin.
    GroupRed { target: usize },
    /// Blue pendant attached to a designated node (removal variant).
    GroupBlue { target: usize },
    /// Blue balance node on a literal node (addition variant).
    BalanceBlue { target: usize },
    /// Red partner of a balance blue (addition variant).
    BalanceRed { partner: usize },
    /// Blue partner of a literal-pendant red (removal variant).
    PartnerBlue { partner: usize },
    FillerBlue,
    PumpBlue,
    PumpRed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpKind {
    Up,
    Down,
}

/// A pump gadget as a separate labelled fragment.
#[derive(Debug, Clone)]
pub struct PumpGadget {
    pub kind: PumpKind,
    pub k: usize,
    pub network: SocialNetwork,
    pub labelling: Labelling,
    /// Nodes under illusion once embedded under a blue global winner.
    pub illuded_contribution: usize,
}

/// k+4 disconnected blue nodes, 4 disconnected red nodes, complete
/// bipartite between them. Under a blue global winner every blue member is
/// illuded at margin -4.
pub fn build_pump_up(k: usize) -> Result<PumpGadget, EliminationError> {
    if k < 1 {
        return Err(EliminationError::PumpUpTooSmall(k));
    }
    let blues = k + 4;
    let mut sn = SocialNetwork::new(blues + 4);
    for b in 0..blues {
        for r in 0..4 {
            sn.add_edge(b, blues + r)?;
        }
    }
    let mut lab = Labelling::uniform(blues + 4, Colour::Blue);
    for r in 0..4 {
        lab.set(blues + r, Colour::Red);
    }
    Ok(PumpGadget { kind: PumpKind::Up, k, network: sn, labelling: lab, illuded_contribution: k + 4 })
}

/// For odd k, a k-clique in which blue wins by one; for even k, the gadget
/// for k-1 plus a disjoint red node. Contributes no illuded nodes, and a
/// single added red edge pushes a blue member into illusion.
pub fn build_pump_down(k: usize) -> Result<PumpGadget, EliminationError> {
    if k < 3 {
        return Err(EliminationError::PumpDownTooSmall(k));
    }
    let clique = if k % 2 == 1 { k } else { k - 1 };
    let mut sn = SocialNetwork::new(k);
    for u in 0..clique {
        for v in u + 1..clique {
            sn.add_edge(u, v)?;
        }
    }
    let mut lab = Labelling::uniform(k, Colour::Blue);
    for r in clique.div_ceil(2)..clique {
        lab.set(r, Colour::Red);
    }
    if k.is_multiple_of(2) {
        lab.set(k - 1, Colour::Red);
    }
    Ok(PumpGadget { kind: PumpKind::Down, k, network: sn, labelling: lab, illuded_contribution: 0 })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PumpInfo {
    pub kind: PumpKind,
    pub k: usize,
    pub node_count: usize,
    pub illuded_contribution: usize,
}

/// A 2P2N formula encoded as a labelled network with budget and
/// requirement.
///
/// `requirement` is the maximum number of nodes that may remain under
/// illusion after editing; `eliminate_target` is the number of designated
/// nodes the witness plan frees. For the mixed and removal variants the
/// two are complementary views of the same bound; the addition variant
/// keeps a large always-illuded red background, so its requirement is the
/// background plus the auxiliary slack rather than the bare named constant.
#[derive(Debug, Clone)]
pub struct EliminationEncoding {
    pub labelled: LabelledNetwork,
    pub roles: Vec<EliminationRole>,
    pub variant: EliminationVariant,
    pub budget: usize,
    pub requirement: usize,
    pub eliminate_target: usize,
    pub formula: CnfFormula,
    pub variable_count: usize,
    pub clause_count: usize,
    /// Node count before any pump gadget.
    pub base_node_count: usize,
    /// Illuded count of the (unpumped) encoding.
    pub base_illuded: usize,
    pub pump: Option<PumpInfo>,
    /// Margin each designated node must carry, by node id.
    pub designated_margins: BTreeMap<usize, i64>,
    /// Cross-check log: derived pendant sizes vs the stated closed forms.
    pub discrepancies: Vec<String>,
}

impl EliminationEncoding {
    pub fn literal_node(&self, lit: i32, copy: usize) -> usize {
        debug_assert!(copy < 3);
        let var = (lit.unsigned_abs() - 1) as usize;
        6 * var + if lit > 0 { 0 } else { 3 } + copy
    }

    pub fn auxiliary_node(&self, lit: i32) -> usize {
        let var = (lit.unsigned_abs() - 1) as usize;
        6 * self.variable_count + 2 * var + if lit > 0 { 0 } else { 1 }
    }

    pub fn extra_node(&self, var: usize) -> usize {
        8 * self.variable_count + var
    }

    pub fn verifier_node(&self, clause: usize) -> usize {
        9 * self.variable_count + clause
    }

    pub fn first_filler(&self) -> Option<usize> {
        self.roles.iter().position(|r| matches!(r, EliminationRole::FillerBlue))
    }

    /// Illuded nodes restricted to the base (pre-pump) part.
    pub fn base_illuded_count(&self, ln: &LabelledNetwork) -> usize {
        ln.illusion_report()
            .under_illusion
            .iter()
            .filter(|&&i| i < self.base_node_count)
            .count()
    }
}

struct Builder {
    sn: SocialNetwork,
    lab: Vec<Colour>,
    roles: Vec<EliminationRole>,
}

impl Builder {
    fn new() -> Self {
        Builder { sn: SocialNetwork::new(0), lab: Vec::new(), roles: Vec::new() }
    }

    fn push(&mut self, colour: Colour, role: EliminationRole) -> usize {
        let id = self.sn.node_count();
        self.sn.append_disjoint(&SocialNetwork::new(1));
        self.lab.push(colour);
        self.roles.push(role);
        id
    }

    fn edge(&mut self, u: usize, v: usize) -> Result<(), NetworkError> {
        self.sn.add_edge(u, v)
    }

    fn margin(&self, node: usize) -> i64 {
        let mut m = 0i64;
        for j in self.sn.neighbours(node) {
            m += if self.lab[j] == Colour::Blue { 1 } else { -1 };
        }
        m
    }

    /// Attaches red pendants to `target` until its margin is exactly
    /// `want`, returning the group size.
    fn attach_red_group(&mut self, target: usize, want: i64) -> Result<usize, NetworkError> {
        let current = self.margin(target);
        let size = current - want;
        assert!(size >= 0, "target {target} already below wanted margin");
        for _ in 0..size {
            let r = self.push(Colour::Red, EliminationRole::GroupRed { target });
            self.edge(r, target)?;
        }
        Ok(size as usize)
    }

    fn attach_blue_group(&mut self, target: usize, size: usize) -> Result<(), NetworkError> {
        for _ in 0..size {
            let b = self.push(Colour::Blue, EliminationRole::GroupBlue { target });
            self.edge(b, target)?;
        }
        Ok(())
    }

    fn add_fillers(&mut self) {
        let red = self.lab.iter().filter(|&&c| c == Colour::Red).count();
        let blue = self.lab.len() - red;
        let need = (red + 1).saturating_sub(blue);
        for _ in 0..need {
            self.push(Colour::Blue, EliminationRole::FillerBlue);
        }
    }
}

struct FormulaView {
    m: usize,
    n: usize,
    /// Distinct literals per clause.
    clause_sets: Vec<Vec<i32>>,
    /// Clauses whose literal set contains the literal.
    clauses_with: BTreeMap<i32, usize>,
}

impl FormulaView {
    fn new(f: &CnfFormula) -> Self {
        let m = f.variable_count();
        let clause_sets: Vec<Vec<i32>> =
            (0..f.clause_count()).map(|i| f.clause_literal_set(i).into_iter().collect()).collect();
        let mut clauses_with = BTreeMap::new();
        for v in 1..=m as i32 {
            for lit in [v, -v] {
                clauses_with.insert(lit, clause_sets.iter().filter(|s| s.contains(&lit)).count());
            }
        }
        FormulaView { m, n: f.clause_count(), clause_sets, clauses_with }
    }

    fn literals(&self) -> impl Iterator<Item = i32> + '_ {
        (1..=self.m as i32).flat_map(|v| [v, -v])
    }
}

fn literal_node(m: usize, lit: i32, copy: usize) -> usize {
    let _ = m;
    let var = (lit.unsigned_abs() - 1) as usize;
    6 * var + if lit > 0 { 0 } else { 3 } + copy
}

fn corresponds(lit: i32, node_lit: i32) -> bool {
    lit == node_lit
}

/// Lays down the 6m literal nodes, 2m auxiliaries, m extras, and n
/// verifiers in the fixed id order shared by all three variants.
fn push_designated(b: &mut Builder, view: &FormulaView, colours: [Colour; 4]) {
    let [lit_colour, aux_colour, extra_colour, verifier_colour] = colours;
    for var in 0..view.m {
        for negated in [false, true] {
            for copy in 0..3 {
                b.push(lit_colour, EliminationRole::LiteralNode { var, negated, copy });
            }
        }
    }
    for var in 0..view.m {
        for negated in [false, true] {
            b.push(aux_colour, EliminationRole::Auxiliary { var, negated });
        }
    }
    for var in 0..view.m {
        b.push(extra_colour, EliminationRole::Extra { var });
    }
    for clause in 0..view.n {
        b.push(verifier_colour, EliminationRole::Verifier { clause });
    }
}

fn cross_check(
    discrepancies: &mut Vec<String>,
    what: &str,
    derived: usize,
    stated: i64,
    stated_form: &str,
) {
    if stated < 0 || derived != stated as usize {
        discrepancies.push(format!(
            "{what}: margin-derived group size {derived} != stated {stated_form} = {stated}"
        ));
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    b: Builder,
    f: &CnfFormula,
    view: &FormulaView,
    variant: EliminationVariant,
    budget: usize,
    eliminate_target: usize,
    designated_margins: BTreeMap<usize, i64>,
    discrepancies: Vec<String>,
) -> Result<EliminationEncoding, EliminationError> {
    let labelled = LabelledNetwork::new(b.sn, Labelling::new(b.lab))?;
    let base_illuded = labelled.illusion_report().illuded_count;
    let requirement = base_illuded - eliminate_target;
    Ok(EliminationEncoding {
        base_node_count: labelled.node_count(),
        labelled,
        roles: b.roles,
        variant,
        budget,
        requirement,
        eliminate_target,
        formula: f.clone(),
        variable_count: view.m,
        clause_count: view.n,
        base_illuded,
        pump: None,
        designated_margins,
        discrepancies,
    })
}

/// The mixed-edit encoding: blue literal triples in one clique, blue
/// auxiliary/extra/verifier layers wired over them, and per-node red
/// pendant groups setting margins to -1 (-3 for auxiliaries). Budget 6m,
/// requirement m.
pub fn encode_2p2n_mixed(f: &CnfFormula) -> Result<EliminationEncoding, EliminationError> {
    if !is_2p2n(f) {
        return Err(EliminationError::Not2p2n);
    }
    let view = FormulaView::new(f);
    let (m, n) = (view.m, view.n);
    let mut b = Builder::new();
    push_designated(&mut b, &view, [Colour::Blue; 4]);

    // All literal nodes form one clique.
    for u in 0..6 * m {
        for v in u + 1..6 * m {
            b.edge(u, v)?;
        }
    }
    // Auxiliaries form a clique; each adjacent to every literal node not
    // corresponding to its literal.
    let aux_ids: Vec<(i32, usize)> =
        view.literals().map(|lit| (lit, 6 * m + 2 * ((lit.unsigned_abs() - 1) as usize) + usize::from(lit < 0))).collect();
    for i in 0..aux_ids.len() {
        for j in i + 1..aux_ids.len() {
            b.edge(aux_ids[i].1, aux_ids[j].1)?;
        }
    }
    for &(lit, aux) in &aux_ids {
        for other in view.literals() {
            if !corresponds(other, lit) {
                for copy in 0..3 {
                    b.edge(aux, literal_node(m, other, copy))?;
                }
            }
        }
    }
    // Extras form a clique, adjacent to every auxiliary and to literal
    // nodes of other variables.
    for var in 0..m {
        let e = 8 * m + var;
        for var2 in var + 1..m {
            b.edge(e, 8 * m + var2)?;
        }
        for &(_, aux) in &aux_ids {
            b.edge(e, aux)?;
        }
        for lit in view.literals() {
            if (lit.unsigned_abs() - 1) as usize != var {
                for copy in 0..3 {
                    b.edge(e, literal_node(m, lit, copy))?;
                }
            }
        }
    }
    // Verifiers: adjacent to the literal nodes of literals outside their
    // clause and to every auxiliary and extra node.
    for clause in 0..n {
        let v = 9 * m + clause;
        for lit in view.literals() {
            if !view.clause_sets[clause].contains(&lit) {
                for copy in 0..3 {
                    b.edge(v, literal_node(m, lit, copy))?;
                }
            }
        }
        for &(_, aux) in &aux_ids {
            b.edge(v, aux)?;
        }
        for var in 0..m {
            b.edge(v, 8 * m + var)?;
        }
    }

    // Red pendant groups: margin -1 everywhere except -3 on auxiliaries.
    // The pendant groups stay mutually disconnected in this variant.
    let mut discrepancies = Vec::new();
    let mut designated_margins = BTreeMap::new();
    for lit in view.literals() {
        let not_in = (n - view.clauses_with[&lit]) as i64;
        for copy in 0..3 {
            let node = literal_node(m, lit, copy);
            let size = b.attach_red_group(node, -1)?;
            cross_check(
                &mut discrepancies,
                &format!("mixed literal node {lit}^{copy}"),
                size,
                9 * m as i64 + not_in - 2,
                "9|P| + (#clauses without L) - 2",
            );
            designated_margins.insert(node, -1);
        }
    }
    for &(lit, aux) in &aux_ids {
        let size = b.attach_red_group(aux, -3)?;
        cross_check(
            &mut discrepancies,
            &format!("mixed auxiliary of {lit}"),
            size,
            (9 * m + n) as i64 - 1,
            "9|P| + |C| - 1",
        );
        designated_margins.insert(aux, -3);
    }
    for var in 0..m {
        let e = 8 * m + var;
        let size = b.attach_red_group(e, -1)?;
        cross_check(
            &mut discrepancies,
            &format!("mixed extra E_{var}"),
            size,
            15 * m as i64 - 6,
            "6|P| + 9|P| - 6",
        );
        designated_margins.insert(e, -1);
    }
    for clause in 0..n {
        let v = 9 * m + clause;
        let not_in_count = (2 * m - view.clause_sets[clause].len()) as i64;
        let size = b.attach_red_group(v, -1)?;
        cross_check(
            &mut discrepancies,
            &format!("mixed verifier v_{clause}"),
            size,
            3 * not_in_count + 3 * m as i64 + 1,
            "3|not-P^i| + 3|P| + 1",
        );
        designated_margins.insert(v, -1);
    }
    b.add_fillers();

    finish(b, f, &view, EliminationVariant::Mixed, 6 * m, 8 * m + n, designated_margins, discrepancies)
}

/// The addition-only encoding: blue literal triples with no internal
/// edges, red auxiliary/extra/verifier nodes with red pendant groups,
/// balance blues holding every literal node at margin +1, and all
/// background red nodes joined into one clique so none of them can be
/// freed within the budget. Budget |C| + 4|P|.
///
/// The background clique nodes are under illusion by construction (each
/// sees only red); the designated set the witness frees is the |C| + 2|P|
/// auxiliary/extra/verifier nodes closest to their thresholds.
pub fn encode_2p2n_addition(f: &CnfFormula) -> Result<EliminationEncoding, EliminationError> {
    if !is_2p2n(f) {
        return Err(EliminationError::Not2p2n);
    }
    let view = FormulaView::new(f);
    let (m, n) = (view.m, view.n);
    let mut b = Builder::new();
    push_designated(&mut b, &view, [Colour::Blue, Colour::Red, Colour::Red, Colour::Red]);

    let aux_ids: Vec<(i32, usize)> =
        view.literals().map(|lit| (lit, 6 * m + 2 * ((lit.unsigned_abs() - 1) as usize) + usize::from(lit < 0))).collect();
    for &(lit, aux) in &aux_ids {
        for other in view.literals() {
            if !corresponds(other, lit) {
                for copy in 0..3 {
                    b.edge(aux, literal_node(m, other, copy))?;
                }
            }
        }
    }
    for var in 0..m {
        let e = 8 * m + var;
        for lit in view.literals() {
            if (lit.unsigned_abs() - 1) as usize != var {
                for copy in 0..3 {
                    b.edge(e, literal_node(m, lit, copy))?;
                }
            }
        }
    }
    for clause in 0..n {
        let v = 9 * m + clause;
        for lit in view.literals() {
            if !view.clause_sets[clause].contains(&lit) {
                for copy in 0..3 {
                    b.edge(v, literal_node(m, lit, copy))?;
                }
            }
        }
    }

    let mut discrepancies = Vec::new();
    let mut designated_margins = BTreeMap::new();
    let mut background = Vec::new();

    // Red pendant groups on the red designated nodes.
    for &(lit, aux) in &aux_ids {
        let size = b.attach_red_group(aux, -3)?;
        cross_check(
            &mut discrepancies,
            &format!("addition auxiliary of {lit}"),
            size,
            6 * m as i64 - 3,
            "6|P| - 3",
        );
        designated_margins.insert(aux, -3);
    }
    for var in 0..m {
        let e = 8 * m + var;
        let size = b.attach_red_group(e, -1)?;
        cross_check(&mut discrepancies, &format!("addition extra E_{var}"), size, 6 * m as i64 - 5, "6|P| - 5");
        designated_margins.insert(e, -1);
    }
    for clause in 0..n {
        let v = 9 * m + clause;
        let distinct = view.clause_sets[clause].len() as i64;
        let size = b.attach_red_group(v, -1)?;
        cross_check(
            &mut discrepancies,
            &format!("addition verifier v_{clause}"),
            size,
            6 * n as i64 - 3 * distinct + 1,
            "6|C| - 3 L_i + 1",
        );
        designated_margins.insert(v, -1);
    }

    // Balance gadgets: enough blue nodes on each literal node for a blue
    // margin of exactly +1, each balance blue tied to a fresh red.
    for lit in view.literals() {
        let not_in = (n - view.clauses_with[&lit]) as i64;
        for copy in 0..3 {
            let node = literal_node(m, lit, copy);
            let current = b.margin(node);
            let size = 1 - current;
            assert!(size >= 0);
            cross_check(
                &mut discrepancies,
                &format!("addition balance of {lit}^{copy}"),
                size as usize,
                not_in + 3 * m as i64 - 1,
                "B_L + 3|P| - 1",
            );
            for _ in 0..size {
                let blue = b.push(Colour::Blue, EliminationRole::BalanceBlue { target: node });
                b.edge(blue, node)?;
                let red = b.push(Colour::Red, EliminationRole::BalanceRed { partner: blue });
                b.edge(red, blue)?;
                background.push(red);
            }
            designated_margins.insert(node, 1);
        }
    }

    // Clique over every constructed red node other than the verifier,
    // auxiliary, and extra nodes.
    for (node, role) in b.roles.iter().enumerate() {
        if matches!(role, EliminationRole::GroupRed { .. }) {
            background.push(node);
        }
    }
    background.sort_unstable();
    for i in 0..background.len() {
        for j in i + 1..background.len() {
            b.edge(background[i], background[j])?;
        }
    }
    b.add_fillers();

    finish(
        b,
        f,
        &view,
        EliminationVariant::Addition,
        n + 4 * m,
        n + 2 * m,
        designated_margins,
        discrepancies,
    )
}

/// The removal-only encoding: red literal triples, blue auxiliaries on
/// their own triple, blue extras and verifiers with blue pendant pads, and
/// per-literal-node red pendants each shielded by a clique of blue
/// partners. Budget |C| + 4|P|, requirement |P|.
///
/// The stated budget of 3|P| cannot carry its own witness (freeing the
/// |C| + 2|P| designated nodes costs |C| + 4|P| removals, one per margin
/// point, and no two illuded nodes are adjacent), so the budget the
/// witness actually needs is used instead.
pub fn encode_2p2n_removal(f: &CnfFormula) -> Result<EliminationEncoding, EliminationError> {
    if !is_2p2n(f) {
        return Err(EliminationError::Not2p2n);
    }
    let view = FormulaView::new(f);
    let (m, n) = (view.m, view.n);
    let mut b = Builder::new();
    push_designated(&mut b, &view, [Colour::Red, Colour::Blue, Colour::Blue, Colour::Blue]);

    let aux_ids: Vec<(i32, usize)> =
        view.literals().map(|lit| (lit, 6 * m + 2 * ((lit.unsigned_abs() - 1) as usize) + usize::from(lit < 0))).collect();
    // Auxiliary of L sits on L's own triple.
    for &(lit, aux) in &aux_ids {
        for copy in 0..3 {
            b.edge(aux, literal_node(m, lit, copy))?;
        }
    }
    // Extra of a variable sits on both of its triples, padded to margin -1
    // by five blue pendants.
    for var in 0..m {
        let e = 8 * m + var;
        for lit in [var as i32 + 1, -(var as i32 + 1)] {
            for copy in 0..3 {
                b.edge(e, literal_node(m, lit, copy))?;
            }
        }
        b.attach_blue_group(e, 5)?;
    }
    // Verifier of a clause sits on the triples of the literals in the
    // clause, padded to margin -1.
    for clause in 0..n {
        let v = 9 * m + clause;
        for &lit in &view.clause_sets[clause] {
            for copy in 0..3 {
                b.edge(v, literal_node(m, lit, copy))?;
            }
        }
        b.attach_blue_group(v, 3 * view.clause_sets[clause].len() - 1)?;
    }

    // Literal nodes are held at margin +1 by red pendants, each red
    // pendant shielded by a blue partner; the partners form one clique.
    let mut discrepancies = Vec::new();
    let mut designated_margins = BTreeMap::new();
    let mut partners = Vec::new();
    for lit in view.literals() {
        let in_count = view.clauses_with[&lit] as i64;
        for copy in 0..3 {
            let node = literal_node(m, lit, copy);
            let current = b.margin(node);
            let size = current - 1;
            assert!(size >= 0);
            cross_check(
                &mut discrepancies,
                &format!("removal pendants of {lit}^{copy}"),
                size as usize,
                in_count + 2,
                "|C^L| + 2",
            );
            for _ in 0..size {
                let red = b.push(Colour::Red, EliminationRole::GroupRed { target: node });
                b.edge(red, node)?;
                let blue = b.push(Colour::Blue, EliminationRole::PartnerBlue { partner: red });
                b.edge(blue, red)?;
                partners.push(blue);
            }
            designated_margins.insert(node, 1);
        }
    }
    for i in 0..partners.len() {
        for j in i + 1..partners.len() {
            b.edge(partners[i], partners[j])?;
        }
    }
    discrepancies.push(format!(
        "removal budget: stated 3|P| = {} removals cannot free the |C| + 2|P| designated nodes \
         (no two illuded nodes are adjacent and their margin deficits sum to |C| + 4|P| = {}); \
         using the witness cost",
        3 * m,
        n + 4 * m,
    ));
    for &(_, aux) in &aux_ids {
        designated_margins.insert(aux, -3);
    }
    for var in 0..m {
        designated_margins.insert(8 * m + var, -1);
    }
    for clause in 0..n {
        designated_margins.insert(9 * m + clause, -1);
    }
    b.add_fillers();

    finish(
        b,
        f,
        &view,
        EliminationVariant::Removal,
        n + 4 * m,
        n + 2 * m,
        designated_margins,
        discrepancies,
    )
}

pub fn encode_2p2n(f: &CnfFormula, variant: EliminationVariant) -> Result<EliminationEncoding, EliminationError> {
    match variant {
        EliminationVariant::Mixed => encode_2p2n_mixed(f),
        EliminationVariant::Addition => encode_2p2n_addition(f),
        EliminationVariant::Removal => encode_2p2n_removal(f),
    }
}

/// Appends the pump gadget that places the q threshold exactly between
/// "requirement met" and "one node over": after the witness plan leaves
/// `requirement` base nodes illuded, the whole network sits strictly below
/// q, while one more illuded node would reach it.
///
/// With `r` the requirement, `N` the base size, and `pc` the pump's
/// illuded contribution, the construction guarantees
/// `(r + pc) / total < q <= (r + pc + 1) / total`.
pub fn attach_pump(enc: &EliminationEncoding, q: Fraction) -> Result<EliminationEncoding, EliminationError> {
    if !q.is_in_open_01() {
        return Err(EliminationError::Fraction(FractionError::OutOfRange(q, "(0, 1)")));
    }
    if enc.pump.is_some() {
        return Err(EliminationError::AlreadyPumped);
    }
    let r = enc.requirement as u64;
    let total = enc.base_node_count as u64;

    let below = q.cmp_ratio(r as i128, total as i128) == std::cmp::Ordering::Greater;
    let gadget = if below {
        // Pump up: contribute u = h# illuded blues among u + 4 nodes.
        let u = threshold_h_sharp(r, total, q)?;
        if u < 5 {
            return Err(EliminationError::PumpUnrealisable(u));
        }
        build_pump_up((u - 4) as usize)?
    } else {
        // Pump down: dilute with h+ illusion-free nodes.
        let k = threshold_h_plus(r, total, q)? as usize;
        if k >= 3 {
            build_pump_down(k)?
        } else {
            // Degenerate sizes: isolated nodes, blue one ahead, no illusion.
            let mut sn = SocialNetwork::new(k);
            let _ = &mut sn;
            let mut lab = Labelling::uniform(k, Colour::Blue);
            if k == 2 {
                lab.set(1, Colour::Red);
            }
            PumpGadget { kind: PumpKind::Down, k, network: sn, labelling: lab, illuded_contribution: 0 }
        }
    };

    let mut out = enc.clone();
    let mut sn = enc.labelled.network().clone();
    sn.append_disjoint(&gadget.network);
    let mut colours = enc.labelled.labelling().colours().to_vec();
    for &c in gadget.labelling.colours() {
        colours.push(c);
        out.roles.push(match c {
            Colour::Blue => EliminationRole::PumpBlue,
            Colour::Red => EliminationRole::PumpRed,
        });
    }
    out.labelled = LabelledNetwork::new(sn, Labelling::new(colours))?;
    out.pump = Some(PumpInfo {
        kind: gadget.kind,
        k: gadget.k,
        node_count: gadget.network.node_count(),
        illuded_contribution: gadget.illuded_contribution,
    });
    debug_assert_eq!(out.labelled.majority_winner(), Some(Colour::Blue));
    Ok(out)
}

/// Builds the witness edit plan from a satisfying model, following the
/// constructive direction of the reductions. The plan respects the
/// variant's edit direction and budget, frees exactly the designated
/// nodes, and pushes nothing into illusion.
pub fn plan_from_model(enc: &EliminationEncoding, model: &[bool]) -> Result<EditPlan, EliminationError> {
    if model.len() != enc.variable_count {
        return Err(EliminationError::ModelSize(model.len(), enc.variable_count));
    }
    let model_vec: Vec<bool> = model.to_vec();
    if !enc.formula.satisfies(&model_vec) {
        return Err(EliminationError::UnsatisfyingModel);
    }
    let m = enc.variable_count;
    let true_literal = |var: usize| if model[var] { var as i32 + 1 } else { -(var as i32 + 1) };
    let false_literal = |var: usize| -true_literal(var);

    // Per clause, the first satisfied literal in slot order; per literal, a
    // cursor over its three node copies.
    let chosen: Vec<i32> = enc
        .formula
        .clauses()
        .iter()
        .map(|clause| {
            *clause
                .iter()
                .find(|&&lit| (lit > 0) == model[(lit.unsigned_abs() - 1) as usize])
                .expect("model satisfies every clause")
        })
        .collect();

    let mut plan = EditPlan::empty();
    match enc.variant {
        EliminationVariant::Mixed => {
            for var in 0..m {
                let f_lit = false_literal(var);
                for copy in 0..3 {
                    plan.add(enc.literal_node(f_lit, copy), enc.auxiliary_node(f_lit));
                }
                plan.add(enc.extra_node(var), enc.literal_node(true_literal(var), 0));
            }
            // Verifiers take copies 1 and 2 of their chosen literal; a
            // literal sits in at most two clauses, so the copies suffice.
            let mut cursor: BTreeMap<i32, usize> = BTreeMap::new();
            let mut used: Vec<(i32, usize)> = Vec::new();
            for (clause, &lit) in chosen.iter().enumerate() {
                let c = cursor.entry(lit).or_insert(1);
                plan.add(enc.verifier_node(clause), enc.literal_node(lit, *c));
                used.push((lit, *c));
                *c += 1;
            }
            // Any true-literal copy still at margin -1 leans on the lowest
            // filler blue node.
            let mut remaining: Vec<usize> = Vec::new();
            for var in 0..m {
                let t = true_literal(var);
                for copy in 1..3 {
                    if !used.contains(&(t, copy)) {
                        remaining.push(enc.literal_node(t, copy));
                    }
                }
            }
            if !remaining.is_empty() {
                let filler = self_filler(enc)?;
                for node in remaining {
                    plan.add(node, filler);
                }
            }
        }
        EliminationVariant::Addition => {
            let mut used: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
            for (clause, &lit) in chosen.iter().enumerate() {
                let slots = used.entry(lit).or_default();
                let copy = (0..3).find(|c| !slots.contains(c)).expect("a free copy exists");
                slots.push(copy);
                plan.add(enc.verifier_node(clause), enc.literal_node(lit, copy));
            }
            for var in 0..m {
                let f_lit = false_literal(var);
                for copy in 0..3 {
                    plan.add(enc.literal_node(f_lit, copy), enc.auxiliary_node(f_lit));
                }
                let t = true_literal(var);
                let slots = used.entry(t).or_default();
                let copy = (0..3).find(|c| !slots.contains(c)).expect("a free copy exists");
                slots.push(copy);
                plan.add(enc.extra_node(var), enc.literal_node(t, copy));
            }
        }
        EliminationVariant::Removal => {
            for var in 0..m {
                let f_lit = false_literal(var);
                for copy in 0..3 {
                    plan.remove(enc.literal_node(f_lit, copy), enc.auxiliary_node(f_lit));
                }
                plan.remove(enc.extra_node(var), enc.literal_node(true_literal(var), 0));
            }
            let mut cursor: BTreeMap<i32, usize> = BTreeMap::new();
            for (clause, &lit) in chosen.iter().enumerate() {
                let c = cursor.entry(lit).or_insert(1);
                plan.remove(enc.verifier_node(clause), enc.literal_node(lit, *c));
                *c += 1;
            }
        }
    }
    if plan.size() > enc.budget {
        return Err(EliminationError::InternalBudgetOverrun { size: plan.size(), budget: enc.budget });
    }
    Ok(plan)
}

fn self_filler(enc: &EliminationEncoding) -> Result<usize, EliminationError> {
    enc.first_filler().ok_or(EliminationError::InternalBudgetOverrun { size: 0, budget: 0 })
}

/// Audits an encoding against its designated margins and illusion census.
///
/// Designated nodes must carry exactly their prescribed margin; nodes at
/// negative margins must be illuded, literal nodes at +1 must not be.
/// Outside the designated set, only the addition variant's background red
/// nodes (pendant groups and balance reds, which see only red) may be
/// under illusion.
pub fn audit_margins(enc: &EliminationEncoding) -> Result<(), String> {
    let ln = &enc.labelled;
    let report = ln.illusion_report();
    if report.global_winner != Some(Colour::Blue) {
        return Err("blue is not the strict global winner".into());
    }
    for (&node, &want) in &enc.designated_margins {
        let got = ln.margin_of_victory(node).expect("node in range");
        if got != want {
            return Err(format!("node {node} has margin {got}, want {want}"));
        }
        let illuded = report.under_illusion.contains(&node);
        if want < 0 && !illuded {
            return Err(format!("designated node {node} (margin {want}) is not illuded"));
        }
        if want >= 0 && illuded {
            return Err(format!("node {node} (margin {want}) is unexpectedly illuded"));
        }
    }
    let background_ok = |role: &EliminationRole| {
        enc.variant == EliminationVariant::Addition
            && matches!(role, EliminationRole::GroupRed { .. } | EliminationRole::BalanceRed { .. })
    };
    for &node in &report.under_illusion {
        if enc.designated_margins.contains_key(&node) {
            continue;
        }
        let role = &enc.roles[node];
        if matches!(role, EliminationRole::PumpBlue) && matches!(enc.pump, Some(PumpInfo { kind: PumpKind::Up, .. })) {
            continue;
        }
        if !background_ok(role) {
            return Err(format!("unexpected illuded node {node} with role {role:?}"));
        }
    }
    Ok(())
}
