//! CNF formulas: DIMACS parsing and serialization, 3-CNF / 2P2N
//! classification, a brute-force satisfiability oracle, and seeded
//! generators for small test corpora.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Hard cap on the brute-force oracle; enumeration is exponential.
pub const BRUTE_FORCE_VAR_CAP: usize = 26;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },
    #[error("formula has {0} variables, above the brute-force cap of {BRUTE_FORCE_VAR_CAP}")]
    CapacityExceeded(usize),
    #[error("literal {0} is zero or out of range for {1} variables")]
    BadLiteral(i32, usize),
    #[error("cannot generate requested shape: {0}")]
    Generation(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    MissingHeader,
    MalformedHeader(String),
    BadToken(String),
    LiteralOutOfRange(i32),
    UnterminatedClause,
    TooManyClauses(usize),
    ClauseCountMismatch { declared: usize, found: usize },
}

impl std::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseErrorKind::MissingHeader => write!(f, "missing `p cnf` header"),
            ParseErrorKind::MalformedHeader(s) => write!(f, "malformed header `{s}`"),
            ParseErrorKind::BadToken(s) => write!(f, "unexpected token `{s}`"),
            ParseErrorKind::LiteralOutOfRange(l) => write!(f, "literal {l} out of declared range"),
            ParseErrorKind::UnterminatedClause => write!(f, "final clause is missing its 0 terminator"),
            ParseErrorKind::TooManyClauses(n) => write!(f, "more clauses than the declared {n}"),
            ParseErrorKind::ClauseCountMismatch { declared, found } => {
                write!(f, "header declares {declared} clauses but {found} were found")
            }
        }
    }
}

/// A CNF formula over variables `1..=variable_count`; positive literals are
/// variables, negative literals negations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CnfFormula {
    variable_count: usize,
    clauses: Vec<Vec<i32>>,
}

/// Total truth assignment; index `v - 1` holds the value of variable `v`.
pub type Assignment = Vec<bool>;

impl CnfFormula {
    pub fn new(variable_count: usize, clauses: Vec<Vec<i32>>) -> Result<Self, CnfError> {
        for clause in &clauses {
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > variable_count {
                    return Err(CnfError::BadLiteral(lit, variable_count));
                }
            }
        }
        Ok(CnfFormula { variable_count, clauses })
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    /// Distinct literals of one clause (a clause may repeat literals).
    pub fn clause_literal_set(&self, i: usize) -> BTreeSet<i32> {
        self.clauses[i].iter().copied().collect()
    }

    /// Number of clauses whose literal set contains `lit`.
    pub fn clauses_containing(&self, lit: i32) -> usize {
        self.clauses.iter().filter(|c| c.contains(&lit)).count()
    }

    pub fn satisfies(&self, assignment: &Assignment) -> bool {
        assignment.len() == self.variable_count
            && self.clauses.iter().all(|clause| {
                clause.iter().any(|&lit| {
                    let value = assignment[(lit.unsigned_abs() - 1) as usize];
                    (lit > 0) == value
                })
            })
    }

    /// Sorts literals within clauses and clauses within the formula.
    /// Two formulas that differ only in literal or clause order
    /// canonicalise identically; repeated clauses are kept, since they
    /// change the encoding.
    pub fn canonicalised(&self) -> CnfFormula {
        let mut clauses: Vec<Vec<i32>> = self
            .clauses
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort_unstable();
                c
            })
            .collect();
        clauses.sort();
        CnfFormula { variable_count: self.variable_count, clauses }
    }

    /// Compact one-line rendering like `(1 -2)(2 3)` for logs and records.
    pub fn compact(&self) -> String {
        let mut s = String::new();
        for clause in &self.clauses {
            let inner: Vec<String> = clause.iter().map(|l| l.to_string()).collect();
            let _ = write!(s, "({})", inner.join(" "));
        }
        s
    }
}

/// Parses the standard DIMACS cnf format: `c` comment lines, a `p cnf V C`
/// header, and zero-terminated clauses (which may span lines).
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
    let mut variable_count: Option<usize> = None;
    let mut declared_clauses = 0usize;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut in_clause = false;
    let mut last_line = 0usize;

    let err = |line: usize, kind: ParseErrorKind| CnfError::Parse { line, kind };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if variable_count.is_some() {
                return Err(err(line_no, ParseErrorKind::MalformedHeader(line.to_string())));
            }
            let mut parts = line.split_whitespace();
            let (p, cnf) = (parts.next(), parts.next());
            let vars = parts.next().and_then(|t| t.parse::<usize>().ok());
            let cls = parts.next().and_then(|t| t.parse::<usize>().ok());
            match (p, cnf, vars, cls, parts.next()) {
                (Some("p"), Some("cnf"), Some(v), Some(c), None) => {
                    variable_count = Some(v);
                    declared_clauses = c;
                }
                _ => return Err(err(line_no, ParseErrorKind::MalformedHeader(line.to_string()))),
            }
            continue;
        }
        let vars = variable_count.ok_or_else(|| err(line_no, ParseErrorKind::MissingHeader))?;
        for token in line.split_whitespace() {
            let lit: i32 = token
                .parse()
                .map_err(|_| err(line_no, ParseErrorKind::BadToken(token.to_string())))?;
            if lit == 0 {
                if clauses.len() == declared_clauses {
                    return Err(err(line_no, ParseErrorKind::TooManyClauses(declared_clauses)));
                }
                clauses.push(std::mem::take(&mut current));
                in_clause = false;
            } else {
                if lit.unsigned_abs() as usize > vars {
                    return Err(err(line_no, ParseErrorKind::LiteralOutOfRange(lit)));
                }
                current.push(lit);
                in_clause = true;
            }
        }
    }

    let vars = variable_count.ok_or_else(|| err(last_line.max(1), ParseErrorKind::MissingHeader))?;
    if in_clause {
        return Err(err(last_line, ParseErrorKind::UnterminatedClause));
    }
    if clauses.len() != declared_clauses {
        return Err(err(
            last_line,
            ParseErrorKind::ClauseCountMismatch { declared: declared_clauses, found: clauses.len() },
        ));
    }
    CnfFormula::new(vars, clauses)
}

pub fn serialize_dimacs(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.variable_count, f.clauses.len());
    for clause in &f.clauses {
        for lit in clause {
            let _ = write!(out, "{lit} ");
        }
        out.push_str("0\n");
    }
    out
}

/// True iff every clause has exactly three literal slots. Repeats are
/// allowed; use [`is_3cnf_strict`] to reject them.
pub fn is_3cnf(f: &CnfFormula) -> bool {
    f.clauses.iter().all(|c| c.len() == 3)
}

/// Length-3 clauses with three distinct, non-complementary literals.
pub fn is_3cnf_strict(f: &CnfFormula) -> bool {
    f.clauses.iter().all(|c| {
        c.len() == 3 && {
            let set: BTreeSet<i32> = c.iter().copied().collect();
            set.len() == 3 && c.iter().all(|&l| !set.contains(&-l))
        }
    })
}

/// True iff every variable occurs exactly twice positively and twice
/// negatively, counting occurrences across all clauses.
pub fn is_2p2n(f: &CnfFormula) -> bool {
    let mut pos = vec![0usize; f.variable_count];
    let mut neg = vec![0usize; f.variable_count];
    for clause in &f.clauses {
        for &lit in clause {
            let v = (lit.unsigned_abs() - 1) as usize;
            if lit > 0 {
                pos[v] += 1;
            } else {
                neg[v] += 1;
            }
        }
    }
    pos.iter().all(|&c| c == 2) && neg.iter().all(|&c| c == 2)
}

/// Exhaustive satisfiability check, returning the lexicographically first
/// model (variable 1 most significant, false < true) if one exists.
pub fn brute_force_sat(f: &CnfFormula) -> Result<Option<Assignment>, CnfError> {
    let n = f.variable_count;
    if n > BRUTE_FORCE_VAR_CAP {
        return Err(CnfError::CapacityExceeded(n));
    }
    for mask in 0u64..(1u64 << n) {
        let assignment: Assignment = (0..n).map(|v| mask >> (n - 1 - v) & 1 == 1).collect();
        if f.satisfies(&assignment) {
            return Ok(Some(assignment));
        }
    }
    Ok(None)
}

/// Deterministic random 3-CNF: `n` clauses of three literals over `m`
/// variables, no variable repeated within a clause.
pub fn generate_3cnf(m: usize, n: usize, seed: u64) -> Result<CnfFormula, CnfError> {
    if m == 0 {
        return Err(CnfError::Generation("need at least one variable".into()));
    }
    if m < 3 {
        // Three distinct variables per clause are impossible; fall back to
        // distinct literals only.
        return generate_3cnf_with_repeats(m, n, seed);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clauses = Vec::with_capacity(n);
    for _ in 0..n {
        let mut vars = BTreeSet::new();
        while vars.len() < 3 {
            vars.insert(rng.random_range(1..=m as i32));
        }
        let clause = vars
            .into_iter()
            .map(|v| if rng.random_bool(0.5) { v } else { -v })
            .collect();
        clauses.push(clause);
    }
    CnfFormula::new(m, clauses)
}

fn generate_3cnf_with_repeats(m: usize, n: usize, seed: u64) -> Result<CnfFormula, CnfError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clauses = Vec::with_capacity(n);
    for _ in 0..n {
        let clause: Vec<i32> = (0..3)
            .map(|_| {
                let v = rng.random_range(1..=m as i32);
                if rng.random_bool(0.5) {
                    v
                } else {
                    -v
                }
            })
            .collect();
        clauses.push(clause);
    }
    CnfFormula::new(m, clauses)
}

/// Deterministic random 2P2N formula over `m` variables: the 4m occurrence
/// slots (two positive and two negative per variable) are partitioned into
/// clauses of size 2 or 3 with no literal repeated inside a clause.
pub fn generate_2p2n(m: usize, seed: u64) -> Result<CnfFormula, CnfError> {
    if m == 0 {
        return Err(CnfError::Generation("need at least one variable".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _attempt in 0..1000 {
        if let Some(f) = try_generate_2p2n(m, &mut rng) {
            debug_assert!(is_2p2n(&f));
            return Ok(f);
        }
    }
    Err(CnfError::Generation(format!("no valid 2P2N partition found for m = {m}")))
}

fn try_generate_2p2n(m: usize, rng: &mut ChaCha8Rng) -> Option<CnfFormula> {
    let mut slots: Vec<i32> = Vec::with_capacity(4 * m);
    for v in 1..=m as i32 {
        slots.extend([v, v, -v, -v]);
    }
    // Fisher-Yates with the seeded rng.
    for i in (1..slots.len()).rev() {
        let j = rng.random_range(0..=i);
        slots.swap(i, j);
    }
    // Split 4m slots into sizes of 2 and 3: 4m = 3a + 2b.
    let max_threes = (4 * m) / 3;
    let valid_a: Vec<usize> = (0..=max_threes).filter(|a| (4 * m - 3 * a).is_multiple_of(2)).collect();
    let a = valid_a[rng.random_range(0..valid_a.len())];
    let mut sizes = vec![3usize; a];
    sizes.extend(vec![2usize; (4 * m - 3 * a) / 2]);

    let mut clauses = Vec::with_capacity(sizes.len());
    let mut cursor = 0;
    for size in sizes {
        let clause: Vec<i32> = slots[cursor..cursor + size].to_vec();
        cursor += size;
        let set: BTreeSet<i32> = clause.iter().copied().collect();
        if set.len() != clause.len() {
            return None; // repeated literal inside a clause; reshuffle
        }
        clauses.push(clause);
    }
    CnfFormula::new(m, clauses).ok()
}

/// Seeded Erdos-Renyi style random graph helper used by generators and test
/// corpora: `n` nodes, each pair an edge with probability `num/den`.
pub fn seeded_pairs(n: usize, num: u32, den: u32, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_range(0..den) < num {
                edges.push((u, v));
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_minimal_formula() {
        let f = parse_dimacs("p cnf 1 1\n1 0").unwrap();
        assert_eq!(f.variable_count(), 1);
        assert_eq!(f.clauses(), &[vec![1]]);
    }

    #[test]
    fn parses_two_clauses_with_comments() {
        let f = parse_dimacs("c a comment\np cnf 2 2\n1 2 0\n-1 -2 0\n").unwrap();
        assert_eq!(f.clause_count(), 2);
    }

    #[test]
    fn clause_spanning_lines_parses() {
        let f = parse_dimacs("p cnf 3 1\n1 2\n3 0").unwrap();
        assert_eq!(f.clauses(), &[vec![1, 2, 3]]);
    }

    #[test]
    fn header_mismatch_is_an_error() {
        let e = parse_dimacs("p cnf 2 3\n1 0\n2 0\n").unwrap_err();
        assert!(matches!(
            e,
            CnfError::Parse { kind: ParseErrorKind::ClauseCountMismatch { declared: 3, found: 2 }, .. }
        ));
        assert!(parse_dimacs("1 0").is_err());
        assert!(parse_dimacs("p cnf 1 1\n2 0").is_err());
        assert!(parse_dimacs("p cnf 1 1\n1").is_err());
        assert!(parse_dimacs("p cnf 1 1\n1 0\n1 0").is_err());
    }

    #[test]
    fn classifier_examples() {
        let f = CnfFormula::new(3, vec![vec![1, 2, 3]]).unwrap();
        assert!(is_3cnf(&f));
        assert!(!is_3cnf(&CnfFormula::new(2, vec![vec![1, 2]]).unwrap()));
        let repeats = CnfFormula::new(1, vec![vec![1, 1, -1]]).unwrap();
        assert!(is_3cnf(&repeats));
        assert!(!is_3cnf_strict(&repeats));
        assert!(is_3cnf_strict(&f));
    }

    #[test]
    fn two_p_two_n_examples() {
        let yes = CnfFormula::new(2, vec![vec![1, 2], vec![1, 2], vec![-1, -2], vec![-1, -2]]).unwrap();
        assert!(is_2p2n(&yes));
        let xor_style =
            CnfFormula::new(2, vec![vec![1, 2], vec![-1, -2], vec![1, -2], vec![-1, 2]]).unwrap();
        assert!(is_2p2n(&xor_style));
        let no = CnfFormula::new(1, vec![vec![1, 1, 1]]).unwrap();
        assert!(!is_2p2n(&no));
    }

    #[test]
    fn brute_force_examples() {
        let unit = CnfFormula::new(1, vec![vec![1]]).unwrap();
        assert_eq!(brute_force_sat(&unit).unwrap(), Some(vec![true]));
        let contradiction = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
        assert_eq!(brute_force_sat(&contradiction).unwrap(), None);
        // c1 and c2 force p1 != p2, c3 and c4 force p1 == p2.
        let xor_style =
            CnfFormula::new(2, vec![vec![1, 2], vec![-1, -2], vec![1, -2], vec![-1, 2]]).unwrap();
        assert_eq!(brute_force_sat(&xor_style).unwrap(), None);
        let big = CnfFormula::new(30, vec![]).unwrap();
        assert!(matches!(brute_force_sat(&big), Err(CnfError::CapacityExceeded(30))));
    }

    #[test]
    fn brute_force_model_is_lexicographically_first() {
        let f = CnfFormula::new(2, vec![vec![1, 2]]).unwrap();
        // (F,T) comes before (T,F) and (T,T).
        assert_eq!(brute_force_sat(&f).unwrap(), Some(vec![false, true]));
    }

    #[test]
    fn generators_are_deterministic_and_classified() {
        for seed in 0..20 {
            let f = generate_3cnf(4, 5, seed).unwrap();
            assert!(is_3cnf(&f));
            assert_eq!(f, generate_3cnf(4, 5, seed).unwrap());
            let g = generate_2p2n(3, seed).unwrap();
            assert!(is_2p2n(&g));
            assert_eq!(g, generate_2p2n(3, seed).unwrap());
        }
        let f1 = generate_3cnf(1, 2, 7).unwrap();
        assert!(is_3cnf(&f1));
        assert!(generate_3cnf(0, 1, 0).is_err());
    }

    fn arbitrary_formula() -> impl Strategy<Value = CnfFormula> {
        (1usize..6).prop_flat_map(|m| {
            proptest::collection::vec(
                proptest::collection::vec((1..=m as i32, proptest::bool::ANY), 1..5),
                0..6,
            )
            .prop_map(move |raw| {
                let clauses = raw
                    .into_iter()
                    .map(|c| c.into_iter().map(|(v, neg)| if neg { -v } else { v }).collect())
                    .collect();
                CnfFormula::new(m, clauses).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn dimacs_round_trip(f in arbitrary_formula()) {
            let text = serialize_dimacs(&f);
            prop_assert_eq!(parse_dimacs(&text).unwrap(), f);
        }

        #[test]
        fn returned_models_satisfy(f in arbitrary_formula()) {
            if let Some(model) = brute_force_sat(&f).unwrap() {
                prop_assert!(f.satisfies(&model));
            }
        }

        #[test]
        fn parser_never_panics(text in "\\PC*") {
            let _ = parse_dimacs(&text);
        }
    }
}
