//! Round-trip verification harness: runs the SAT oracle against the gadget
//! encodings on generated corpora and emits machine-readable verdicts.
//!
//! Satisfiable instances are checked constructively (witness labellings and
//! edit plans must verify); unsatisfiable elimination instances only admit
//! a structural audit at desk scale, so they report `not-refuted` rather
//! than a hollow pass.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{brute_force_sat, is_2p2n, is_3cnf, CnfError, CnfFormula};
use crate::elimination::{
    attach_pump, audit_margins, encode_2p2n, plan_from_model, EliminationError, EliminationVariant,
};
use crate::fraction::{Fraction, FractionError};
use crate::network::{apply_edit_plan, LabelledNetwork, NetworkError};
use crate::solver::solve_one_illusion;
use crate::verification::{audit_roles, encode_3cnf, encode_q, labelling_from_model, EncodingError};

/// Caps keeping the exponential pieces of the harness within budget.
pub const THEOREM1_VAR_CAP: usize = 3;
pub const THEOREM1_CLAUSE_CAP: usize = 3;
pub const THEOREM2_VAR_CAP: usize = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("formula is not in 3-CNF")]
    Not3Cnf,
    #[error("formula is not in 2P2N form")]
    Not2p2n,
    #[error("formula has {0} variables / {1} clauses, above the harness caps")]
    CapacityExceeded(usize, usize),
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Elimination(#[from] EliminationError),
    #[error(transparent)]
    Fraction(#[from] FractionError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotRefuted,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::NotRefuted => write!(f, "not-refuted"),
        }
    }
}

/// One line of the verdict log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub id: String,
    pub formula: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub sat: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admits: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan_ok: Option<bool>,
    pub verdict: Verdict,
    pub millis: u128,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

/// Checks the verification reduction on one formula: the formula is
/// satisfiable iff its encoding admits a full illusion, and when it is,
/// the witness labelling built from a model illudes every encoding node
/// and reaches the q threshold on the padded encoding.
pub fn verify_theorem1_roundtrip(f: &CnfFormula, q: Fraction) -> Result<VerdictRecord, HarnessError> {
    if !is_3cnf(f) {
        return Err(HarnessError::Not3Cnf);
    }
    if f.variable_count() > THEOREM1_VAR_CAP || f.clause_count() > THEOREM1_CLAUSE_CAP {
        return Err(HarnessError::CapacityExceeded(f.variable_count(), f.clause_count()));
    }
    let start = Instant::now();
    let mut notes = Vec::new();

    let enc = encode_3cnf(f)?;
    if let Err(e) = audit_roles(&enc) {
        notes.push(format!("role audit: {e}"));
    }
    let sat_model = brute_force_sat(f)?;
    let sat = sat_model.is_some();
    let witness = solve_one_illusion(&enc.network);
    let admits = witness.is_some();

    let mut ok = sat == admits && notes.is_empty();
    if let Some(lab) = &witness {
        let ln = LabelledNetwork::new(enc.network.clone(), lab.clone())?;
        if ln.illusion_report().illuded_count != enc.network.node_count() {
            notes.push("solver witness does not illude every node".into());
            ok = false;
        }
    }
    if let Some(model) = &sat_model {
        let q_enc = encode_q(f, q)?;
        let lab = labelling_from_model(&q_enc, model)?;
        let ln = LabelledNetwork::new(q_enc.network.clone(), lab)?;
        let report = ln.illusion_report();
        let base_illuded = report
            .under_illusion
            .iter()
            .filter(|&&i| i < q_enc.base_node_count())
            .count();
        if base_illuded != q_enc.base_node_count() {
            notes.push(format!(
                "witness labelling illudes {base_illuded} of {} encoding nodes",
                q_enc.base_node_count()
            ));
            ok = false;
        }
        if !ln.is_q_illusion(q) {
            notes.push("witness labelling misses the q threshold".into());
            ok = false;
        }
    }

    Ok(VerdictRecord {
        id: format!("t1-{}", f.compact()),
        formula: f.compact(),
        variant: None,
        sat,
        admits: Some(admits),
        plan_ok: None,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        millis: start.elapsed().as_millis(),
        notes,
    })
}

/// Checks one elimination reduction: for a satisfiable formula the witness
/// plan must respect budget and direction, free the designated nodes
/// without pushing anything into illusion, and cross the q threshold on
/// the pumped instance. Unsatisfiable formulas get a structural audit and
/// a `not-refuted` verdict.
pub fn verify_theorem2_witness(
    f: &CnfFormula,
    variant: EliminationVariant,
    q: Fraction,
) -> Result<VerdictRecord, HarnessError> {
    if !is_2p2n(f) {
        return Err(HarnessError::Not2p2n);
    }
    if f.variable_count() > THEOREM2_VAR_CAP {
        return Err(HarnessError::CapacityExceeded(f.variable_count(), f.clause_count()));
    }
    let start = Instant::now();
    let mut notes = Vec::new();

    let enc = encode_2p2n(f, variant)?;
    if let Err(e) = audit_margins(&enc) {
        notes.push(format!("margin audit: {e}"));
    }
    let pumped = attach_pump(&enc, q)?;
    let sat_model = brute_force_sat(f)?;
    let sat = sat_model.is_some();

    let plan_ok = if let Some(model) = &sat_model {
        let plan = plan_from_model(&pumped, model)?;
        let mut ok = plan.size() <= pumped.budget;
        if !ok {
            notes.push(format!("plan size {} exceeds budget {}", plan.size(), pumped.budget));
        }
        match variant {
            EliminationVariant::Addition if !plan.removals.is_empty() => {
                notes.push("addition-variant plan removes edges".into());
                ok = false;
            }
            EliminationVariant::Removal if !plan.additions.is_empty() => {
                notes.push("removal-variant plan adds edges".into());
                ok = false;
            }
            _ => {}
        }
        let before: BTreeSet<usize> = pumped.labelled.illusion_report().under_illusion;
        let after_net = apply_edit_plan(pumped.labelled.network(), &plan)?;
        let after_ln = pumped.labelled.with_network(after_net)?;
        let after = after_ln.illusion_report();
        if pumped.base_illuded_count(&after_ln) > pumped.requirement {
            notes.push(format!(
                "{} base nodes remain illuded, requirement {}",
                pumped.base_illuded_count(&after_ln),
                pumped.requirement
            ));
            ok = false;
        }
        if after.under_illusion.iter().any(|i| !before.contains(i)) {
            notes.push("plan pushes a node into illusion".into());
            ok = false;
        }
        if after_ln.is_q_illusion(q) {
            notes.push("q-majority illusion still holds after the plan".into());
            ok = false;
        }
        Some(ok)
    } else {
        None
    };

    let verdict = match plan_ok {
        Some(true) if notes.is_empty() => Verdict::Pass,
        Some(_) => Verdict::Fail,
        None if notes.is_empty() => Verdict::NotRefuted,
        None => Verdict::Fail,
    };
    Ok(VerdictRecord {
        id: format!("t2-{variant}-{}", f.compact()),
        formula: f.compact(),
        variant: Some(variant.to_string()),
        sat,
        admits: None,
        plan_ok,
        verdict,
        millis: start.elapsed().as_millis(),
        notes,
    })
}

/// Canonical enumeration of 3-CNF formulas: every multiset of at most
/// `max_clauses` sorted clauses over exactly `vars` variables (clauses may
/// repeat literals), deduplicated up to clause and literal order.
pub fn enumerate_3cnf(vars: usize, max_clauses: usize) -> Vec<CnfFormula> {
    let mut literals: Vec<i32> = Vec::new();
    for v in 1..=vars as i32 {
        literals.push(v);
        literals.push(-v);
    }
    // All sorted clauses of exactly three literal slots.
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    for i in 0..literals.len() {
        for j in i..literals.len() {
            for k in j..literals.len() {
                clauses.push(vec![literals[i], literals[j], literals[k]]);
            }
        }
    }
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn rec(
        clauses: &[Vec<i32>],
        vars: usize,
        max_clauses: usize,
        start: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<CnfFormula>,
    ) {
        if !stack.is_empty() {
            let picked: Vec<Vec<i32>> = stack.iter().map(|&i| clauses[i].clone()).collect();
            // Keep only formulas that mention the last variable, so lower
            // variable counts are not re-enumerated here.
            let uses_last =
                picked.iter().flatten().any(|&l| l.unsigned_abs() as usize == vars);
            if vars == 1 || uses_last {
                out.push(CnfFormula::new(vars, picked).expect("literals in range"));
            }
        }
        if stack.len() == max_clauses {
            return;
        }
        for i in start..clauses.len() {
            stack.push(i);
            rec(clauses, vars, max_clauses, i, stack, out);
            stack.pop();
        }
    }
    rec(&clauses, vars, max_clauses, 0, &mut stack, &mut out);
    out
}

/// Canonical enumeration of all 2P2N formulas over exactly `vars`
/// variables with clauses of size >= 2 and no literal repeated inside a
/// clause, up to clause and literal order.
pub fn enumerate_2p2n(vars: usize) -> Vec<CnfFormula> {
    let mut slots: Vec<i32> = Vec::new();
    for v in 1..=vars as i32 {
        slots.extend([v, v, -v, -v]);
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut clauses: Vec<Vec<i32>> = Vec::new();

    #[allow(clippy::ptr_arg)]
    fn rec(
        remaining: &mut Vec<i32>,
        clauses: &mut Vec<Vec<i32>>,
        vars: usize,
        seen: &mut BTreeSet<Vec<Vec<i32>>>,
        out: &mut Vec<CnfFormula>,
    ) {
        if remaining.is_empty() {
            let mut canon = clauses.clone();
            canon.sort();
            if seen.insert(canon.clone()) {
                out.push(CnfFormula::new(vars, canon).expect("literals in range"));
            }
            return;
        }
        // Build the next clause around the smallest remaining literal to
        // avoid permuted duplicates.
        let distinct: Vec<i32> = {
            let s: BTreeSet<i32> = remaining.iter().copied().collect();
            s.into_iter().collect()
        };
        let anchor = distinct[0];
        for size in 2..=3usize.min(distinct.len()) {
            // Choose size-1 partners greater than the anchor.
            let partners: Vec<i32> = distinct.iter().copied().filter(|&l| l > anchor).collect();
            let mut pick = vec![0usize; size - 1];
            choose(&partners, size - 1, 0, &mut pick, &mut |combo| {
                let mut clause = vec![anchor];
                clause.extend_from_slice(combo);
                let mut rest = remaining.clone();
                for lit in &clause {
                    let pos = rest.iter().position(|r| r == lit).expect("literal available");
                    rest.remove(pos);
                }
                clauses.push(clause);
                rec(&mut rest, clauses, vars, seen, out);
                clauses.pop();
            });
        }
    }

    fn choose(items: &[i32], k: usize, start: usize, pick: &mut [usize], f: &mut impl FnMut(&[i32])) {
        if k == 0 {
            let combo: Vec<i32> = pick.iter().map(|&i| items[i]).collect();
            f(&combo);
            return;
        }
        for i in start..items.len() {
            pick[pick.len() - k] = i;
            choose(items, k - 1, i + 1, pick, f);
        }
    }

    rec(&mut slots, &mut clauses, vars, &mut seen, &mut out);
    out.sort_by_key(|f| f.clauses().to_vec());
    out
}

/// Runs the verification round trip over a corpus in parallel. The record
/// order is canonical (sorted by instance id), independent of scheduling.
pub fn verify_theorem1_corpus(
    formulas: &[CnfFormula],
    q: Fraction,
) -> Result<Vec<VerdictRecord>, HarnessError> {
    use rayon::prelude::*;
    let mut records = formulas
        .par_iter()
        .map(|f| verify_theorem1_roundtrip(f, q))
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(records)
}

/// Parallel corpus run of the elimination witnesses, one record per
/// (formula, variant) pair, canonically ordered.
pub fn verify_theorem2_corpus(
    formulas: &[CnfFormula],
    variants: &[EliminationVariant],
    q: Fraction,
) -> Result<Vec<VerdictRecord>, HarnessError> {
    use rayon::prelude::*;
    let pairs: Vec<(&CnfFormula, EliminationVariant)> = formulas
        .iter()
        .flat_map(|f| variants.iter().map(move |&v| (f, v)))
        .collect();
    let mut records = pairs
        .par_iter()
        .map(|&(f, v)| verify_theorem2_witness(f, v, q))
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(records)
}

pub fn verdicts_to_jsonl(records: &[VerdictRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serialises"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Fraction {
        s.parse().unwrap()
    }

    #[test]
    fn satisfiable_formula_passes_roundtrip() {
        let f = CnfFormula::new(2, vec![vec![1, 1, 2]]).unwrap();
        let record = verify_theorem1_roundtrip(&f, q("1/1")).unwrap();
        assert_eq!(record.verdict, Verdict::Pass);
        assert!(record.sat);
        assert_eq!(record.admits, Some(true));
    }

    #[test]
    fn unsatisfiable_formula_passes_roundtrip_negatively() {
        let f = CnfFormula::new(1, vec![vec![1, 1, 1], vec![-1, -1, -1]]).unwrap();
        let record = verify_theorem1_roundtrip(&f, q("2/3")).unwrap();
        assert_eq!(record.verdict, Verdict::Pass);
        assert!(!record.sat);
        assert_eq!(record.admits, Some(false));
    }

    #[test]
    fn theorem2_sat_and_unsat_routes() {
        let sat = CnfFormula::new(2, vec![vec![1, 2], vec![1, 2], vec![-1, -2], vec![-1, -2]]).unwrap();
        let unsat =
            CnfFormula::new(2, vec![vec![1, 2], vec![-1, -2], vec![1, -2], vec![-1, 2]]).unwrap();
        for variant in [EliminationVariant::Mixed, EliminationVariant::Addition, EliminationVariant::Removal] {
            let r = verify_theorem2_witness(&sat, variant, q("1/2")).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{variant}: {:?}", r.notes);
            assert_eq!(r.plan_ok, Some(true));

            let r = verify_theorem2_witness(&unsat, variant, q("1/2")).unwrap();
            assert_eq!(r.verdict, Verdict::NotRefuted, "{variant}: {:?}", r.notes);
            assert_eq!(r.plan_ok, None);
        }
    }

    #[test]
    fn caps_are_enforced() {
        let big = crate::cnf::generate_3cnf(4, 2, 1).unwrap();
        assert!(matches!(
            verify_theorem1_roundtrip(&big, q("1/1")),
            Err(HarnessError::CapacityExceeded(4, 2))
        ));
    }

    #[test]
    fn enumeration_is_canonical_and_complete_for_one_variable() {
        let fs = enumerate_3cnf(1, 2);
        // Clauses over {1, -1} with three slots: 4 sorted multisets; up to
        // two clauses: 4 singletons + 10 pairs.
        assert_eq!(fs.len(), 14);
        for f in &fs {
            assert!(is_3cnf(f));
            assert_eq!(f.canonicalised().clauses().len(), f.clauses().len());
        }
    }

    #[test]
    fn two_variable_2p2n_enumeration_is_clean() {
        let fs = enumerate_2p2n(2);
        assert!(!fs.is_empty());
        for f in &fs {
            assert!(is_2p2n(f), "{}", f.compact());
            for clause in f.clauses() {
                assert!(clause.len() >= 2);
                let set: BTreeSet<i32> = clause.iter().copied().collect();
                assert_eq!(set.len(), clause.len());
            }
        }
        // The xor-style unsat instance must be in the corpus.
        let xor = CnfFormula::new(2, vec![vec![-2, -1], vec![-2, 1], vec![-1, 2], vec![1, 2]]).unwrap();
        assert!(fs.iter().any(|f| f.canonicalised() == xor.canonicalised()));
    }

    #[test]
    fn corpus_runs_are_deterministic_across_pools() {
        let corpus = enumerate_3cnf(1, 2);
        let strip = |records: Vec<VerdictRecord>| {
            records
                .into_iter()
                .map(|r| (r.id, r.sat, r.admits, r.verdict))
                .collect::<Vec<_>>()
        };
        let default_pool = strip(verify_theorem1_corpus(&corpus, q("1/1")).unwrap());
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let sequential =
            strip(single.install(|| verify_theorem1_corpus(&corpus, q("1/1")).unwrap()));
        assert_eq!(default_pool, sequential);
    }

    #[test]
    fn jsonl_round_trip() {
        let f = CnfFormula::new(2, vec![vec![1, 1, 2]]).unwrap();
        let record = verify_theorem1_roundtrip(&f, q("1/1")).unwrap();
        let line = verdicts_to_jsonl(std::slice::from_ref(&record));
        let parsed: VerdictRecord = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(parsed.verdict, record.verdict);
        assert_eq!(parsed.formula, record.formula);
    }
}
