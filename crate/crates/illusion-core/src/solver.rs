//! Decision and search procedures: does a network admit a q-majority
//! illusion (specialised q = 1 backtracking, exhaustive brute force, CNF
//! export for external solvers), and can an existing illusion be removed
//! within an edit budget (exhaustive and greedy search, plan checking).
//!
//! All searches fix blue as the intended global winner; colour-swap
//! symmetry makes that lossless for existence questions and halves the
//! space. Thresholds are compared in exact integer arithmetic throughout.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::CnfFormula;
use crate::fraction::{Fraction, FractionError};
use crate::network::{
    apply_edit_plan, Colour, EditPlan, Labelling, LabelledNetwork, NetworkError, SocialNetwork,
};

/// Node cap for the exhaustive labelling search (2^n labellings).
pub const BRUTE_FORCE_NODE_CAP: usize = 24;
/// Node and budget caps for exhaustive elimination search.
pub const ELIMINATE_NODE_CAP: usize = 12;
pub const ELIMINATE_BUDGET_CAP: usize = 3;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("network has {0} nodes, above the cap of {1} for this search")]
    CapacityExceeded(usize, usize),
    #[error("budget {0} above the exhaustive-search cap of {ELIMINATE_BUDGET_CAP}")]
    BudgetCapExceeded(usize),
    #[error(transparent)]
    Fraction(#[from] FractionError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Which edit directions an elimination search may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditMode {
    Both,
    AddOnly,
    RemoveOnly,
}

impl EditMode {
    fn allows_additions(self) -> bool {
        !matches!(self, EditMode::RemoveOnly)
    }

    fn allows_removals(self) -> bool {
        !matches!(self, EditMode::AddOnly)
    }
}

// ---------------------------------------------------------------------------
// q = 1 backtracking search
// ---------------------------------------------------------------------------

/// Searches for a labelling under which every node is under illusion.
///
/// Convention: blue is the intended global winner, so every node needs a
/// strict red majority in its neighbourhood while reds stay below half of
/// all nodes. Propagation: (a) a node with a dependant is red, as the
/// special case of (b) forcing when a neighbourhood constraint is tight;
/// (b) per node, prune when red neighbours cannot reach a strict majority
/// and force undecided neighbours red when they are all needed; (c) the
/// global red budget prunes and, once spent, forces the rest blue.
/// Branching is deterministic: lowest-id undecided node, red first.
pub fn solve_one_illusion(sn: &SocialNetwork) -> Option<Labelling> {
    Search::new(sn, false).run()
}

/// As [`solve_one_illusion`], additionally verifying by exhaustive
/// enumeration that every forced assignment is entailed by the partial
/// labelling it was derived from. Exponential; intended for small test
/// networks only. Panics on an unsound forcing.
pub fn solve_one_illusion_debug(sn: &SocialNetwork) -> Option<Labelling> {
    Search::new(sn, true).run()
}

struct Search {
    adj: Vec<Vec<usize>>,
    need: Vec<usize>,
    colour: Vec<Option<Colour>>,
    red_nb: Vec<usize>,
    blue_nb: Vec<usize>,
    red_total: usize,
    cap: usize,
    decided: usize,
    trail: Vec<usize>,
    audit_forcings: bool,
}

impl Search {
    fn new(sn: &SocialNetwork, audit_forcings: bool) -> Self {
        let n = sn.node_count();
        let adj: Vec<Vec<usize>> = (0..n).map(|i| sn.neighbours(i).collect()).collect();
        let need = adj.iter().map(|nb| nb.len() / 2 + 1).collect();
        Search {
            adj,
            need,
            colour: vec![None; n],
            red_nb: vec![0; n],
            blue_nb: vec![0; n],
            red_total: 0,
            cap: n.saturating_sub(1) / 2,
            decided: 0,
            trail: Vec::with_capacity(n),
            audit_forcings,
        }
    }

    fn run(mut self) -> Option<Labelling> {
        let n = self.adj.len();
        if n == 0 {
            return Some(Labelling::new(Vec::new()));
        }
        // A node with an empty or unsatisfiable neighbourhood sinks the
        // whole search before it starts.
        for u in 0..n {
            if !self.check_node(u) {
                return None;
            }
        }
        if !self.propagate(0) {
            return None;
        }
        if self.dfs() {
            let colours = self.colour.iter().map(|c| c.expect("search completed")).collect();
            Some(Labelling::new(colours))
        } else {
            None
        }
    }

    fn dfs(&mut self) -> bool {
        let Some(node) = self.colour.iter().position(Option::is_none) else {
            return true; // all decided and consistent
        };
        for colour in [Colour::Red, Colour::Blue] {
            let checkpoint = self.trail.len();
            if self.assign(node, colour) && self.propagate(checkpoint) && self.dfs() {
                return true;
            }
            self.undo_to(checkpoint);
        }
        false
    }

    fn assign(&mut self, node: usize, colour: Colour) -> bool {
        if let Some(existing) = self.colour[node] {
            return existing == colour;
        }
        if colour == Colour::Red && self.red_total == self.cap {
            return false;
        }
        self.colour[node] = Some(colour);
        self.decided += 1;
        if colour == Colour::Red {
            self.red_total += 1;
        }
        for i in 0..self.adj[node].len() {
            let u = self.adj[node][i];
            match colour {
                Colour::Red => self.red_nb[u] += 1,
                Colour::Blue => self.blue_nb[u] += 1,
            }
        }
        self.trail.push(node);
        true
    }

    fn force(&mut self, node: usize, colour: Colour) -> bool {
        if self.audit_forcings && self.colour[node].is_none() {
            self.assert_entailed(node, colour);
        }
        self.assign(node, colour)
    }

    fn undo_to(&mut self, checkpoint: usize) {
        while self.trail.len() > checkpoint {
            let node = self.trail.pop().expect("trail non-empty");
            let colour = self.colour[node].take().expect("was assigned");
            self.decided -= 1;
            if colour == Colour::Red {
                self.red_total -= 1;
            }
            for i in 0..self.adj[node].len() {
                let u = self.adj[node][i];
                match colour {
                    Colour::Red => self.red_nb[u] -= 1,
                    Colour::Blue => self.blue_nb[u] -= 1,
                }
            }
        }
    }

    /// Re-checks node `u` after its neighbourhood changed; the same rules
    /// run once per node before any assignment exists.
    fn check_node(&mut self, u: usize) -> bool {
        let deg = self.adj[u].len();
        let undecided = deg - self.red_nb[u] - self.blue_nb[u];
        if self.red_nb[u] + undecided < self.need[u] {
            return false; // covers isolated nodes, where need exceeds degree
        }
        if self.blue_nb[u] > deg - self.need[u] {
            return false;
        }
        if self.red_nb[u] < self.need[u] && self.red_nb[u] + undecided == self.need[u] {
            for i in 0..self.adj[u].len() {
                let w = self.adj[u][i];
                if self.colour[w].is_none() && !self.force(w, Colour::Red) {
                    return false;
                }
            }
        }
        true
    }

    fn propagate(&mut self, mut head: usize) -> bool {
        while head < self.trail.len() {
            let v = self.trail[head];
            head += 1;
            for i in 0..self.adj[v].len() {
                let u = self.adj[v][i];
                if !self.check_node(u) {
                    return false;
                }
            }
            if self.red_total == self.cap && self.decided < self.colour.len() {
                for w in 0..self.colour.len() {
                    if self.colour[w].is_none() && !self.force(w, Colour::Blue) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Exhaustively checks that no completion of the current partial
    /// labelling with `node` set to the opposite colour is a valid
    /// blue-winner full illusion.
    fn assert_entailed(&self, node: usize, colour: Colour) {
        let n = self.colour.len();
        let undecided: Vec<usize> =
            (0..n).filter(|&i| i != node && self.colour[i].is_none()).collect();
        assert!(undecided.len() <= 24, "entailment audit is exponential");
        for mask in 0u64..(1 << undecided.len()) {
            let mut full: Vec<Colour> = (0..n)
                .map(|i| self.colour[i].unwrap_or(Colour::Blue))
                .collect();
            full[node] = colour.swapped();
            for (bit, &i) in undecided.iter().enumerate() {
                full[i] = if mask >> bit & 1 == 1 { Colour::Red } else { Colour::Blue };
            }
            let reds = full.iter().filter(|&&c| c == Colour::Red).count();
            if reds > self.cap {
                continue;
            }
            let all_illuded = (0..n).all(|i| {
                let red = self.adj[i].iter().filter(|&&j| full[j] == Colour::Red).count();
                2 * red > self.adj[i].len()
            });
            assert!(
                !all_illuded,
                "unsound forcing: node {node} was forced {colour:?} but the opposite completes"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Exhaustive labelling search
// ---------------------------------------------------------------------------

fn neighbour_masks(sn: &SocialNetwork) -> Vec<u64> {
    let n = sn.node_count();
    (0..n)
        .map(|i| {
            let mut m = 0u64;
            for j in sn.neighbours(i) {
                m |= 1 << (n - 1 - j);
            }
            m
        })
        .collect()
}

fn mask_is_q_illusion(n: usize, adj: &[u64], mask: u64, q: Fraction) -> bool {
    let red = mask.count_ones() as usize;
    let blue = n - red;
    let global_red = match red.cmp(&blue) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => {
            // No global winner: nothing is illuded.
            return q.cmp_ratio(0, n.max(1) as i128) != Ordering::Greater;
        }
    };
    let mut illuded = 0usize;
    for (i, &nb) in adj.iter().enumerate() {
        let _ = i;
        let deg = nb.count_ones() as usize;
        let red_nb = (nb & mask).count_ones() as usize;
        let local_red = match (2 * red_nb).cmp(&deg) {
            Ordering::Greater => Some(true),
            Ordering::Less => Some(false),
            Ordering::Equal => None,
        };
        if let Some(lr) = local_red {
            if lr != global_red {
                illuded += 1;
            }
        }
    }
    illuded as i128 * q.denominator() as i128 >= q.numerator() as i128 * n as i128
}

/// Enumerates all 2^n labellings in lexicographic order (blue before red,
/// node 0 most significant) and returns the first that induces a
/// q-majority illusion. Capped at [`BRUTE_FORCE_NODE_CAP`] nodes.
pub fn solve_q_illusion_bruteforce(
    sn: &SocialNetwork,
    q: Fraction,
) -> Result<Option<Labelling>, SolverError> {
    let n = sn.node_count();
    if n > BRUTE_FORCE_NODE_CAP {
        return Err(SolverError::CapacityExceeded(n, BRUTE_FORCE_NODE_CAP));
    }
    let adj = neighbour_masks(sn);
    let total: u64 = 1 << n;
    let found = (0u64..total)
        .into_par_iter()
        .find_first(|&mask| mask_is_q_illusion(n, &adj, mask, q));
    Ok(found.map(|mask| Labelling::from_mask(n, mask)))
}

// ---------------------------------------------------------------------------
// CNF export
// ---------------------------------------------------------------------------

/// Where each meaning lives in an exported CNF: `node_vars[i]` is true iff
/// node i is red, `indicator_vars[i]` iff node i is under illusion, and
/// `aux_range` spans the sequential-counter registers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariableMap {
    pub node_vars: Vec<i32>,
    pub indicator_vars: Vec<i32>,
    pub aux_range: (i32, i32),
}

struct CnfBuilder {
    next_var: i32,
    clauses: Vec<Vec<i32>>,
}

impl CnfBuilder {
    fn fresh(&mut self) -> i32 {
        self.next_var += 1;
        self.next_var
    }

    fn clause(&mut self, lits: &[i32]) {
        self.clauses.push(lits.to_vec());
    }

    /// Sequential counter with full equivalences: returns `out[j-1]` true
    /// iff at least `j` of `lits` are true, for `j` in `1..=max_k`.
    fn at_least_outputs(&mut self, lits: &[i32], max_k: usize) -> Vec<i32> {
        debug_assert!(max_k >= 1);
        let mut prev: Vec<i32> = Vec::new();
        for (idx, &x) in lits.iter().enumerate() {
            let bound = (idx + 1).min(max_k);
            let mut cur = Vec::with_capacity(bound);
            for j in 1..=bound {
                let u = self.fresh();
                let upper = prev.get(j - 1).copied(); // >= j among the first idx
                if j == 1 {
                    match upper {
                        None => {
                            // u <-> x
                            self.clause(&[-u, x]);
                            self.clause(&[u, -x]);
                        }
                        Some(up) => {
                            // u <-> up v x
                            self.clause(&[-up, u]);
                            self.clause(&[-x, u]);
                            self.clause(&[-u, up, x]);
                        }
                    }
                } else {
                    let lower = prev[j - 2]; // >= j-1 among the first idx
                    match upper {
                        None => {
                            // u <-> x ^ lower
                            self.clause(&[-u, x]);
                            self.clause(&[-u, lower]);
                            self.clause(&[u, -x, -lower]);
                        }
                        Some(up) => {
                            // u <-> up v (x ^ lower)
                            self.clause(&[-up, u]);
                            self.clause(&[-x, -lower, u]);
                            self.clause(&[-u, up, x]);
                            self.clause(&[-u, up, lower]);
                        }
                    }
                }
                cur.push(u);
            }
            prev = cur;
        }
        // Counts beyond the number of literals are constant false.
        while prev.len() < max_k {
            let f = self.fresh();
            self.clause(&[-f]);
            prev.push(f);
        }
        prev
    }
}

/// Exports a CNF whose models are exactly the labellings inducing a
/// q-majority illusion with blue as the global winner, for q in (1/2, 1]
/// (colour-swap symmetry makes the blue convention lossless). One selector
/// variable per node (true = red), one illusion indicator per node, and
/// sequential-counter cardinality constraints for the global red budget
/// and the q threshold.
pub fn export_illusion_cnf(
    sn: &SocialNetwork,
    q: Fraction,
) -> Result<(CnfFormula, VariableMap), SolverError> {
    if !q.is_majority_threshold() {
        return Err(SolverError::Fraction(FractionError::OutOfRange(q, "(1/2, 1]")));
    }
    let n = sn.node_count();
    let node_vars: Vec<i32> = (1..=n as i32).collect();
    let indicator_vars: Vec<i32> = (n as i32 + 1..=2 * n as i32).collect();
    let mut b = CnfBuilder { next_var: 2 * n as i32, clauses: Vec::new() };

    for (i, &y) in indicator_vars.iter().enumerate() {
        let deg = sn.degree(i);
        if deg == 0 {
            b.clause(&[-y]);
            continue;
        }
        let neighbour_lits: Vec<i32> = sn.neighbours(i).map(|j| node_vars[j]).collect();
        let threshold = deg / 2 + 1;
        let outs = b.at_least_outputs(&neighbour_lits, threshold);
        let at_least = outs[threshold - 1];
        b.clause(&[-y, at_least]);
        b.clause(&[y, -at_least]);
    }

    if n > 0 {
        // Strict blue majority: red count <= ceil(n/2) - 1.
        let cap = (n - 1) / 2;
        let outs = b.at_least_outputs(&node_vars, cap + 1);
        b.clause(&[-outs[cap]]);

        // At least ceil(q * n) nodes under illusion.
        let threshold = {
            let (a, den) = (q.numerator() as i128, q.denominator() as i128);
            ((a * n as i128 + den - 1) / den) as usize
        };
        if threshold > 0 {
            let outs = b.at_least_outputs(&indicator_vars, threshold);
            b.clause(&[outs[threshold - 1]]);
        }
    }

    let aux_range = (2 * n as i32 + 1, b.next_var);
    let formula = CnfFormula::new(b.next_var as usize, b.clauses).expect("builder literals in range");
    Ok((formula, VariableMap { node_vars, indicator_vars, aux_range }))
}

/// Reads a labelling back out of a model of an exported CNF.
pub fn decode_model(map: &VariableMap, assignment: &[bool]) -> Labelling {
    Labelling::new(
        map.node_vars
            .iter()
            .map(|&v| {
                if assignment.get((v - 1) as usize).copied().unwrap_or(false) {
                    Colour::Red
                } else {
                    Colour::Blue
                }
            })
            .collect(),
    )
}

/// Parses an external solver's assignment output (`v` lines or bare
/// integers, optionally with SAT/UNSAT status lines) into a total
/// assignment for `variable_count` variables. Returns `None` for an
/// explicitly unsatisfiable result.
pub fn parse_solver_model(text: &str, variable_count: usize) -> Option<Vec<bool>> {
    let mut assignment = vec![false; variable_count];
    let mut saw_literal = false;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let upper = line.to_ascii_uppercase();
        if upper.contains("UNSAT") {
            return None;
        }
        let body = line.strip_prefix("v ").or_else(|| line.strip_prefix("V ")).unwrap_or(line);
        for token in body.split_whitespace() {
            if let Ok(lit) = token.parse::<i64>() {
                if lit == 0 {
                    continue;
                }
                let var = lit.unsigned_abs() as usize;
                if var <= variable_count {
                    assignment[var - 1] = lit > 0;
                    saw_literal = true;
                }
            }
        }
    }
    saw_literal.then_some(assignment)
}

// ---------------------------------------------------------------------------
// Elimination search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edit {
    Add(usize, usize),
    Remove(usize, usize),
}

impl Edit {
    fn apply_to(self, plan: &mut EditPlan) {
        match self {
            Edit::Add(u, v) => plan.add(u, v),
            Edit::Remove(u, v) => plan.remove(u, v),
        }
    }
}

fn candidate_edits(sn: &SocialNetwork, mode: EditMode) -> Vec<Edit> {
    let mut out = Vec::new();
    let n = sn.node_count();
    for u in 0..n {
        for v in u + 1..n {
            if sn.has_edge(u, v) {
                if mode.allows_removals() {
                    out.push(Edit::Remove(u, v));
                }
            } else if mode.allows_additions() {
                out.push(Edit::Add(u, v));
            }
        }
    }
    out
}

/// Finds a minimum-size plan (ties broken lexicographically over the
/// sorted candidate pairs) after which the q-majority illusion no longer
/// holds, trying all subsets of at most `budget` single edits. `None` if
/// no plan within the budget works.
pub fn eliminate_exhaustive(
    ln: &LabelledNetwork,
    q: Fraction,
    budget: usize,
    mode: EditMode,
) -> Result<Option<EditPlan>, SolverError> {
    let n = ln.node_count();
    if n > ELIMINATE_NODE_CAP {
        return Err(SolverError::CapacityExceeded(n, ELIMINATE_NODE_CAP));
    }
    if budget > ELIMINATE_BUDGET_CAP {
        return Err(SolverError::BudgetCapExceeded(budget));
    }
    let candidates = candidate_edits(ln.network(), mode);
    let mut chosen: Vec<usize> = Vec::new();
    for size in 0..=budget.min(candidates.len()) {
        chosen.clear();
        if let Some(plan) = combinations(ln, q, &candidates, size, 0, &mut chosen)? {
            return Ok(Some(plan));
        }
    }
    Ok(None)
}

fn combinations(
    ln: &LabelledNetwork,
    q: Fraction,
    candidates: &[Edit],
    remaining: usize,
    start: usize,
    chosen: &mut Vec<usize>,
) -> Result<Option<EditPlan>, SolverError> {
    if remaining == 0 {
        let mut plan = EditPlan::empty();
        for &i in chosen.iter() {
            candidates[i].apply_to(&mut plan);
        }
        let edited = apply_edit_plan(ln.network(), &plan)?;
        let ln2 = ln.with_network(edited)?;
        if !ln2.is_q_illusion(q) {
            return Ok(Some(plan));
        }
        return Ok(None);
    }
    for i in start..candidates.len() {
        chosen.push(i);
        if let Some(plan) = combinations(ln, q, candidates, remaining - 1, i + 1, chosen)? {
            return Ok(Some(plan));
        }
        chosen.pop();
    }
    Ok(None)
}

/// Greedy elimination: repeatedly applies the single edit with the best
/// (illuded-count decrease, illuded-margin improvement) score that pushes
/// no currently-safe node into illusion. Sound (the result is verified)
/// but incomplete; coordinated multi-edge fixes are beyond its horizon.
///
/// Labels never change, so the global winner is fixed and a single edit
/// can only flip the illusion status of its two endpoints; candidates are
/// scored from endpoint margins alone.
pub fn eliminate_greedy(
    ln: &LabelledNetwork,
    q: Fraction,
    budget: usize,
    mode: EditMode,
) -> Option<EditPlan> {
    let mut plan = EditPlan::empty();
    let mut current = ln.clone();
    let n = ln.node_count();
    'steps: for _ in 0..budget {
        if !current.is_q_illusion(q) {
            break;
        }
        let report = current.illusion_report();
        let Some(global) = report.global_winner else {
            break 'steps; // no winner means nothing is illuded and no edit changes that
        };
        let margins: Vec<i64> =
            (0..n).map(|i| current.margin_of_victory(i).expect("node in range")).collect();
        // Under a blue winner an illuded node sits at margin < 0 and
        // improvement means increasing it; mirrored for a red winner.
        let illuded = |margin: i64| match global {
            Colour::Blue => margin < 0,
            Colour::Red => margin > 0,
        };
        let towards_safety = |delta: i64| match global {
            Colour::Blue => delta,
            Colour::Red => -delta,
        };

        let mut best: Option<(usize, i64, Edit)> = None;
        for edit in candidate_edits(current.network(), mode) {
            let (u, v) = match edit {
                Edit::Add(u, v) | Edit::Remove(u, v) => (u, v),
            };
            // Never revisit a pair the plan already touched.
            if plan.additions.contains(&(u, v)) || plan.removals.contains(&(u, v)) {
                continue;
            }
            let sign = if matches!(edit, Edit::Add(..)) { 1 } else { -1 };
            let endpoint_delta = |other: usize| match current.labelling().colour(other) {
                Colour::Blue => sign,
                Colour::Red => -sign,
            };
            let mut freed = 0usize;
            let mut pushed = false;
            let mut margin_gain = 0i64;
            for (x, other) in [(u, v), (v, u)] {
                let delta = endpoint_delta(other);
                let (was, now) = (illuded(margins[x]), illuded(margins[x] + delta));
                match (was, now) {
                    (true, false) => freed += 1,
                    (false, true) => pushed = true,
                    _ => {}
                }
                if was {
                    margin_gain += towards_safety(delta);
                }
            }
            if pushed || (freed == 0 && margin_gain <= 0) {
                continue;
            }
            let better = match &best {
                None => true,
                Some((bf, bm, _)) => (freed, margin_gain) > (*bf, *bm),
            };
            if better {
                best = Some((freed, margin_gain, edit));
            }
        }
        let Some((_, _, edit)) = best else { break };
        edit.apply_to(&mut plan);
        let net = apply_edit_plan(ln.network(), &plan).expect("greedy edits stay valid");
        current = ln.with_network(net).expect("same node count");
    }
    match verify_plan(ln, &plan, q, budget, mode) {
        PlanVerdict::Accepted => Some(plan),
        PlanVerdict::Rejected(_) => None,
    }
}

/// Why [`verify_plan`] rejected a plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanRejection {
    BudgetExceeded,
    ModeViolation,
    InvalidPlan(String),
    StillIllusion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanVerdict {
    Accepted,
    Rejected(PlanRejection),
}

impl PlanVerdict {
    pub fn accepted(&self) -> bool {
        matches!(self, PlanVerdict::Accepted)
    }

    pub fn rejection(&self) -> Option<&PlanRejection> {
        match self {
            PlanVerdict::Accepted => None,
            PlanVerdict::Rejected(r) => Some(r),
        }
    }
}

/// The membership checker for the elimination problems: a plan is accepted
/// iff it respects the mode and budget, is valid against the network, and
/// the q-majority illusion no longer holds after applying it.
pub fn verify_plan(
    ln: &LabelledNetwork,
    plan: &EditPlan,
    q: Fraction,
    budget: usize,
    mode: EditMode,
) -> PlanVerdict {
    if plan.size() > budget {
        return PlanVerdict::Rejected(PlanRejection::BudgetExceeded);
    }
    if (!plan.additions.is_empty() && !mode.allows_additions())
        || (!plan.removals.is_empty() && !mode.allows_removals())
    {
        return PlanVerdict::Rejected(PlanRejection::ModeViolation);
    }
    let edited = match apply_edit_plan(ln.network(), plan) {
        Ok(net) => net,
        Err(e) => return PlanVerdict::Rejected(PlanRejection::InvalidPlan(e.to_string())),
    };
    let ln2 = ln.with_network(edited).expect("same node count");
    if ln2.is_q_illusion(q) {
        return PlanVerdict::Rejected(PlanRejection::StillIllusion);
    }
    PlanVerdict::Accepted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn q(s: &str) -> Fraction {
        s.parse().unwrap()
    }

    #[test]
    fn single_edge_admits_no_full_illusion() {
        let sn = SocialNetwork::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(solve_one_illusion(&sn), None);
        assert_eq!(solve_q_illusion_bruteforce(&sn, q("1/1")).unwrap(), None);
    }

    #[test]
    fn minority_fixture_admits_full_illusion() {
        let g = fixtures::minority_fixture();
        let lab = solve_one_illusion(g.network()).expect("the fixture admits one");
        let ln = LabelledNetwork::new(g.network().clone(), lab).unwrap();
        assert!(ln.is_q_illusion(q("1/1")));
    }

    #[test]
    fn edgeless_networks_admit_nothing_positive() {
        let sn = SocialNetwork::new(3);
        assert_eq!(solve_q_illusion_bruteforce(&sn, q("1/3")).unwrap(), None);
        assert_eq!(solve_one_illusion(&sn), None);
        // q = 0 is vacuously satisfied by the all-blue labelling.
        assert!(solve_q_illusion_bruteforce(&sn, Fraction::ZERO).unwrap().is_some());
    }

    #[test]
    fn brute_force_cap_is_loud() {
        let sn = SocialNetwork::new(25);
        assert!(matches!(
            solve_q_illusion_bruteforce(&sn, q("1/2")),
            Err(SolverError::CapacityExceeded(25, BRUTE_FORCE_NODE_CAP))
        ));
    }

    #[test]
    fn backtracker_agrees_with_brute_force_on_small_graphs() {
        for seed in 0..120u64 {
            let n = 2 + (seed % 9) as usize;
            let edges = crate::cnf::seeded_pairs(n, 2, 5, seed);
            let sn = SocialNetwork::from_edges(n, &edges).unwrap();
            let fast = solve_one_illusion(&sn);
            let slow = solve_q_illusion_bruteforce(&sn, q("1/1")).unwrap();
            assert_eq!(fast.is_some(), slow.is_some(), "seed {seed}");
            if let Some(lab) = fast {
                let ln = LabelledNetwork::new(sn, lab).unwrap();
                assert!(ln.is_q_illusion(q("1/1")));
            }
        }
    }

    #[test]
    fn forced_assignments_are_entailed() {
        for seed in 0..60u64 {
            let n = 3 + (seed % 8) as usize;
            let edges = crate::cnf::seeded_pairs(n, 1, 3, seed.wrapping_mul(77).wrapping_add(5));
            let sn = SocialNetwork::from_edges(n, &edges).unwrap();
            let audited = solve_one_illusion_debug(&sn);
            assert_eq!(audited.is_some(), solve_one_illusion(&sn).is_some());
        }
    }

    #[test]
    fn cnf_export_shape_on_the_minority_fixture() {
        let g = fixtures::minority_fixture();
        let (formula, map) = export_illusion_cnf(g.network(), q("1/1")).unwrap();
        assert_eq!(map.node_vars.len(), 9);
        assert!(formula.variable_count() >= 18);
        assert_eq!(map.aux_range.0, 19);
        assert_eq!(map.aux_range.1 as usize, formula.variable_count());
    }

    #[test]
    fn brute_force_returns_the_lexicographically_first_witness() {
        // 4-star: centre 0, leaves 1..5. Cross-validate the bitmask
        // evaluation against the report-based definition over all 2^5
        // labellings, for several thresholds.
        let sn = SocialNetwork::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        for frac in [q("1/5"), q("2/5"), q("1/1")] {
            let by_report = (0u64..32).find(|&mask| {
                LabelledNetwork::new(sn.clone(), Labelling::from_mask(5, mask))
                    .unwrap()
                    .is_q_illusion(frac)
            });
            let by_search = solve_q_illusion_bruteforce(&sn, frac).unwrap();
            assert_eq!(
                by_search,
                by_report.map(|mask| Labelling::from_mask(5, mask)),
                "q = {frac}"
            );
        }
    }

    #[test]
    fn cnf_export_rejects_low_q() {
        let sn = SocialNetwork::new(2);
        assert!(export_illusion_cnf(&sn, q("1/2")).is_err());
    }

    #[test]
    fn exhaustive_elimination_on_the_five_node_example() {
        let g = fixtures::single_illuded_example();
        // k = 0 cannot help an instance that is a q-illusion.
        assert_eq!(eliminate_exhaustive(&g, q("1/5"), 0, EditMode::Both).unwrap(), None);
        // One added blue edge leaves the centre with a 2-1 red majority,
        // so no single edit works; two additions do.
        assert_eq!(eliminate_exhaustive(&g, q("1/5"), 1, EditMode::AddOnly).unwrap(), None);
        let plan = eliminate_exhaustive(&g, q("1/5"), 2, EditMode::AddOnly).unwrap().expect("two edits fix it");
        assert_eq!(plan.size(), 2);
        assert!(verify_plan(&g, &plan, q("1/5"), 2, EditMode::AddOnly).accepted());
    }

    #[test]
    fn exhaustive_elimination_on_the_minority_fixture() {
        let g = fixtures::minority_fixture();
        let plan = eliminate_exhaustive(&g, q("1/1"), 1, EditMode::Both).unwrap().expect("one edit breaks a full illusion");
        assert_eq!(plan.size(), 1);
        assert!(verify_plan(&g, &plan, q("1/1"), 1, EditMode::Both).accepted());
    }

    #[test]
    fn caps_are_enforced() {
        let g = fixtures::single_illuded_example();
        assert!(matches!(
            eliminate_exhaustive(&g, q("1/5"), 4, EditMode::Both),
            Err(SolverError::BudgetCapExceeded(4))
        ));
        let big = LabelledNetwork::new(
            SocialNetwork::new(13),
            Labelling::uniform(13, Colour::Blue),
        )
        .unwrap();
        assert!(matches!(
            eliminate_exhaustive(&big, q("1/2"), 1, EditMode::Both),
            Err(SolverError::CapacityExceeded(13, ELIMINATE_NODE_CAP))
        ));
    }

    #[test]
    fn greedy_matches_exhaustive_at_budget_one() {
        for seed in 0..80u64 {
            let n = 3 + (seed % 7) as usize;
            let edges = crate::cnf::seeded_pairs(n, 1, 2, seed.wrapping_mul(31));
            let sn = SocialNetwork::from_edges(n, &edges).unwrap();
            let lab = Labelling::from_mask(n, seed.wrapping_mul(0x9e37) & ((1 << n) - 1));
            let ln = LabelledNetwork::new(sn, lab).unwrap();
            let qq = q("1/2");
            if !ln.is_q_illusion(qq) {
                continue;
            }
            let exhaustive = eliminate_exhaustive(&ln, qq, 1, EditMode::Both).unwrap();
            if exhaustive.is_some() {
                let greedy = eliminate_greedy(&ln, qq, 1, EditMode::Both);
                assert!(greedy.is_some(), "seed {seed}: greedy missed a single-edit fix");
                assert!(verify_plan(&ln, &greedy.unwrap(), qq, 1, EditMode::Both).accepted());
            }
        }
    }

    #[test]
    fn verify_plan_reports_reasons() {
        let g = fixtures::minority_fixture();
        let empty = EditPlan::empty();
        assert_eq!(
            verify_plan(&g, &empty, q("1/1"), 3, EditMode::Both).rejection(),
            Some(&PlanRejection::StillIllusion)
        );
        let mut oversized = EditPlan::empty();
        oversized.remove(0, 1);
        oversized.remove(0, 2);
        assert_eq!(
            verify_plan(&g, &oversized, q("1/1"), 1, EditMode::Both).rejection(),
            Some(&PlanRejection::BudgetExceeded)
        );
        assert_eq!(
            verify_plan(&g, &oversized, q("1/1"), 3, EditMode::AddOnly).rejection(),
            Some(&PlanRejection::ModeViolation)
        );
        let mut invalid = EditPlan::empty();
        invalid.add(0, 1); // already an edge
        assert!(matches!(
            verify_plan(&g, &invalid, q("1/1"), 3, EditMode::Both).rejection(),
            Some(&PlanRejection::InvalidPlan(_))
        ));
    }

    #[test]
    fn solver_model_parsing() {
        let model = parse_solver_model("c comment\ns SATISFIABLE\nv 1 -2 3 0\n", 3);
        assert_eq!(model, Some(vec![true, false, true]));
        assert_eq!(parse_solver_model("s UNSATISFIABLE\n", 3), None);
        assert_eq!(parse_solver_model("1 -2 -3 0", 3), Some(vec![true, false, false]));
        assert_eq!(parse_solver_model("", 3), None);
    }
}
