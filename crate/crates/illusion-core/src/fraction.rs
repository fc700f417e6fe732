//! Exact rational arithmetic and the three padding thresholds used by the
//! reductions.
//!
//! All comparisons cross-multiply in `i128`, so every boundary case
//! (`count * b >= a * n` and friends) is decided exactly. The documented
//! input bounds (`k, m <= 10^6`, denominators `<= 10^4`) leave ample
//! headroom before `i128` overflows; constructors reject anything larger.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest numerator/denominator magnitude accepted by [`Fraction::new`].
///
/// Keeps all internal cross-multiplications at most ~2^80, far below the
/// `i128` limit even after the threshold computations below scale them.
pub const MAX_FRACTION_PART: i64 = 1_000_000_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FractionError {
    #[error("denominator must be positive, got {0}")]
    ZeroOrNegativeDenominator(i64),
    #[error("fraction component {0} exceeds supported magnitude {MAX_FRACTION_PART}")]
    Overflow(i64),
    #[error("cannot parse `{0}` as a fraction (expected `a/b` or `a`)")]
    Parse(String),
    #[error("q = {0} is outside the required range {1}")]
    OutOfRange(Fraction, &'static str),
    #[error("precondition m/k {0} q failed for m = {1}, k = {2}")]
    Precondition(&'static str, u64, u64),
    #[error("k must be positive")]
    ZeroK,
}

/// A rational number in lowest terms with a positive denominator.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Fraction {
    numerator: i64,
    denominator: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { numerator: 0, denominator: 1 };
    pub const ONE: Fraction = Fraction { numerator: 1, denominator: 1 };
    pub const HALF: Fraction = Fraction { numerator: 1, denominator: 2 };

    pub fn new(numerator: i64, denominator: i64) -> Result<Self, FractionError> {
        if denominator <= 0 {
            return Err(FractionError::ZeroOrNegativeDenominator(denominator));
        }
        if numerator.abs() > MAX_FRACTION_PART {
            return Err(FractionError::Overflow(numerator));
        }
        if denominator > MAX_FRACTION_PART {
            return Err(FractionError::Overflow(denominator));
        }
        let g = gcd(numerator, denominator);
        Ok(Fraction { numerator: numerator / g, denominator: denominator / g })
    }

    pub fn from_integer(n: i64) -> Self {
        Fraction { numerator: n, denominator: 1 }
    }

    /// The exact ratio `p / q` of two counts, e.g. an illusion fraction.
    pub fn ratio(p: usize, q: usize) -> Result<Self, FractionError> {
        Self::new(p as i64, q as i64)
    }

    pub fn numerator(&self) -> i64 {
        self.numerator
    }

    pub fn denominator(&self) -> i64 {
        self.denominator
    }

    /// Exact comparison of `self` against the ratio `p / q` (`q > 0`),
    /// without constructing a reduced fraction for the right-hand side.
    pub fn cmp_ratio(&self, p: i128, q: i128) -> Ordering {
        debug_assert!(q > 0);
        (self.numerator as i128 * q).cmp(&(p * self.denominator as i128))
    }

    pub fn is_in_open_01(&self) -> bool {
        *self > Fraction::ZERO && *self < Fraction::ONE
    }

    /// True iff `1/2 < self <= 1`.
    pub fn is_majority_threshold(&self) -> bool {
        *self > Fraction::HALF && *self <= Fraction::ONE
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.numerator as i128 * other.denominator as i128)
            .cmp(&(other.numerator as i128 * self.denominator as i128))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator == 1 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator)
        }
    }
}

impl fmt::Debug for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

impl FromStr for Fraction {
    type Err = FractionError;

    /// Parses `a/b`, or a bare `a` meaning `a/1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parse_int = |t: &str| t.trim().parse::<i64>().map_err(|_| FractionError::Parse(s.to_string()));
        match s.split_once('/') {
            None => Fraction::new(parse_int(s)?, 1),
            Some((a, b)) => Fraction::new(parse_int(a)?, parse_int(b)?),
        }
    }
}

impl TryFrom<String> for Fraction {
    type Error = FractionError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Fraction> for String {
    fn from(f: Fraction) -> String {
        f.to_string()
    }
}

/// The padding count `h*` for appending disconnected pairs to a verification
/// encoding: the maximal `h` with `(k+h)/(k+2h) >= q`, which also satisfies
/// `(k+h-1)/(k+2h) < q`. Defined for `q` in `(1/2, 1]` and `k >= 1`.
pub fn threshold_h_star(k: u64, q: Fraction) -> Result<u64, FractionError> {
    if k == 0 {
        return Err(FractionError::ZeroK);
    }
    if !q.is_majority_threshold() {
        return Err(FractionError::OutOfRange(q, "(1/2, 1]"));
    }
    let (a, b) = (q.numerator as i128, q.denominator as i128);
    let k = k as i128;
    // (k+h)b >= (k+2h)a  <=>  h(2a-b) <= k(b-a); 2a-b >= 1 since q > 1/2.
    let h = (k * (b - a)) / (2 * a - b);
    debug_assert!(h >= 0);
    Ok(h as u64)
}

/// The pump-up sizing threshold of the elimination reduction: the unique
/// switch point of the increasing map `h -> (m+h)/(k+h+4)`, i.e. the `h`
/// with `(m+h)/(k+h+4) < q` and `(m+h+1)/(k+h+5) >= q`. It then also
/// satisfies `(m+h+1)/(k+h+4) >= q`. Requires `m/k < q` and `q` in `(0,1)`.
pub fn threshold_h_sharp(m: u64, k: u64, q: Fraction) -> Result<u64, FractionError> {
    if k == 0 {
        return Err(FractionError::ZeroK);
    }
    if !q.is_in_open_01() {
        return Err(FractionError::OutOfRange(q, "(0, 1)"));
    }
    if q.cmp_ratio(m as i128, k as i128) != Ordering::Greater {
        return Err(FractionError::Precondition("<", m, k));
    }
    let (a, b) = (q.numerator as i128, q.denominator as i128);
    let (m, k) = (m as i128, k as i128);
    // Least t with (m+t)b >= (k+t+4)a, i.e. t(b-a) >= a(k+4) - bm; then h = t-1.
    let num = a * (k + 4) - b * m;
    let t = if num <= 0 { 0 } else { (num + (b - a) - 1) / (b - a) };
    debug_assert!(t >= 1, "m/k < q guarantees the switch point is positive");
    Ok((t - 1) as u64)
}

/// The pump-down sizing threshold: the least `h` with `m/(k+h) < q`, which
/// then also satisfies `(m+1)/(k+h) >= q`. Requires `m/k >= q` and `q` in
/// `(0,1)`; the result is always >= 1.
pub fn threshold_h_plus(m: u64, k: u64, q: Fraction) -> Result<u64, FractionError> {
    if k == 0 {
        return Err(FractionError::ZeroK);
    }
    if !q.is_in_open_01() {
        return Err(FractionError::OutOfRange(q, "(0, 1)"));
    }
    if q.cmp_ratio(m as i128, k as i128) == Ordering::Greater {
        return Err(FractionError::Precondition(">=", m, k));
    }
    let (a, b) = (q.numerator as i128, q.denominator as i128);
    let (m, k) = (m as i128, k as i128);
    // Least h with bm < a(k+h), i.e. h > (bm - ak)/a.
    let h = (b * m - a * k).div_euclid(a) + 1;
    debug_assert!(h >= 1);
    Ok(h as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Fraction {
        s.parse().unwrap()
    }

    /// Reference implementation for h*: scan the strictly decreasing
    /// f(h) = (k+h)/(k+2h) for the last h with f(h) >= q.
    fn h_star_scan(k: u64, frac: Fraction) -> u64 {
        let (a, b) = (frac.numerator() as i128, frac.denominator() as i128);
        let k = k as i128;
        let mut h = 0i128;
        while (k + h + 1) * b >= (k + 2 * (h + 1)) * a {
            h += 1;
        }
        h as u64
    }

    /// Reference scan for h#: first switch point of the increasing
    /// f(h) = (m+h)/(k+h+4).
    fn h_sharp_scan(m: u64, k: u64, frac: Fraction) -> u64 {
        let (a, b) = (frac.numerator() as i128, frac.denominator() as i128);
        let (m, k) = (m as i128, k as i128);
        let mut h = 0i128;
        loop {
            let below = (m + h) * b < (k + h + 4) * a;
            let next_at_or_above = (m + h + 1) * b >= (k + h + 5) * a;
            if below && next_at_or_above {
                return h as u64;
            }
            h += 1;
        }
    }

    /// Reference scan for h+: least h with m/(k+h) < q.
    fn h_plus_scan(m: u64, k: u64, frac: Fraction) -> u64 {
        let (a, b) = (frac.numerator() as i128, frac.denominator() as i128);
        let (m, k) = (m as i128, k as i128);
        let mut h = 1i128;
        while m * b >= (k + h) * a {
            h += 1;
        }
        h as u64
    }

    fn reduced_fractions_up_to(max_den: i64) -> Vec<Fraction> {
        let mut out = Vec::new();
        for b in 1..=max_den {
            for a in 0..=b {
                let f = Fraction::new(a, b).unwrap();
                if !out.contains(&f) {
                    out.push(f);
                }
            }
        }
        out
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(q("3/4"), Fraction::new(3, 4).unwrap());
        assert_eq!(q("2/4"), Fraction::new(1, 2).unwrap());
        assert_eq!(q("7"), Fraction::from_integer(7));
        assert_eq!(q("1/1").to_string(), "1");
        assert_eq!(q("3/9").to_string(), "1/3");
        assert!("1/0".parse::<Fraction>().is_err());
        assert!("".parse::<Fraction>().is_err());
        assert!("a/b".parse::<Fraction>().is_err());
    }

    #[test]
    fn exact_ordering() {
        assert!(q("1/3") < q("1/2"));
        assert!(q("2/3") > q("1/2"));
        assert_eq!(q("2/6").cmp(&q("1/3")), Ordering::Equal);
        assert_eq!(q("1/2").cmp_ratio(5, 10), Ordering::Equal);
        assert_eq!(q("1/2").cmp_ratio(4, 10), Ordering::Greater);
    }

    #[test]
    fn h_star_examples() {
        assert_eq!(threshold_h_star(10, q("1/1")).unwrap(), 0);
        // Frozen from the scan oracle: f(2) = 6/8 >= 3/4, f(3) = 7/10 < 3/4,
        // and (4+2-1)/8 = 5/8 < 3/4.
        assert_eq!(threshold_h_star(4, q("3/4")).unwrap(), 2);
        // f(3) = 6/9 >= 2/3, f(4) = 7/11 < 2/3, and 5/9 < 2/3.
        assert_eq!(threshold_h_star(3, q("2/3")).unwrap(), 3);
        assert!(threshold_h_star(4, q("1/2")).is_err());
        assert!(threshold_h_star(4, q("1/3")).is_err());
        assert!(threshold_h_star(0, q("3/4")).is_err());
    }

    #[test]
    fn h_sharp_examples() {
        // Frozen from the scan oracle: (1+5)/13 < 1/2 and (1+6)/14 >= 1/2.
        assert_eq!(threshold_h_sharp(1, 4, q("1/2")).unwrap(), 5);
        // Scan oracle: 9/14 < 2/3 while 10/15 >= 2/3, so the switch point
        // is 8; both defining inequalities hold there ((1+8)/14 < 2/3,
        // (1+9)/14 >= 2/3).
        assert_eq!(threshold_h_sharp(1, 2, q("2/3")).unwrap(), 8);
        assert!(threshold_h_sharp(3, 4, q("1/2")).is_err());
        assert!(threshold_h_sharp(1, 2, q("1/1")).is_err());
    }

    #[test]
    fn h_plus_examples() {
        // 3/6 >= 1/2, 3/7 < 1/2, and 4/7 >= 1/2.
        assert_eq!(threshold_h_plus(3, 4, q("1/2")).unwrap(), 3);
        // 2/6 >= 1/3, 2/7 < 1/3, and 3/7 >= 1/3.
        assert_eq!(threshold_h_plus(2, 2, q("1/3")).unwrap(), 5);
        assert!(threshold_h_plus(1, 4, q("1/2")).is_err());
    }

    #[test]
    fn closed_forms_agree_with_scans_on_grid() {
        for frac in reduced_fractions_up_to(12) {
            if frac.is_majority_threshold() {
                for k in 1..=50 {
                    assert_eq!(
                        threshold_h_star(k, frac).unwrap(),
                        h_star_scan(k, frac),
                        "h* mismatch at k={k}, q={frac}"
                    );
                }
            }
            if frac.is_in_open_01() {
                for m in 1..=50u64 {
                    for k in 1..=50u64 {
                        if frac.cmp_ratio(m as i128, k as i128) == Ordering::Greater {
                            assert_eq!(
                                threshold_h_sharp(m, k, frac).unwrap(),
                                h_sharp_scan(m, k, frac),
                                "h# mismatch at m={m}, k={k}, q={frac}"
                            );
                        } else {
                            assert_eq!(
                                threshold_h_plus(m, k, frac).unwrap(),
                                h_plus_scan(m, k, frac),
                                "h+ mismatch at m={m}, k={k}, q={frac}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn defining_inequalities_hold_by_substitution() {
        // Independent recheck of the defining property pairs, decoupled from
        // how the thresholds are computed.
        for frac in reduced_fractions_up_to(12) {
            let (a, b) = (frac.numerator() as i128, frac.denominator() as i128);
            if frac.is_majority_threshold() {
                for k in 1..=50i128 {
                    let h = threshold_h_star(k as u64, frac).unwrap() as i128;
                    assert!((k + h) * b >= (k + 2 * h) * a);
                    assert!((k + h - 1) * b < (k + 2 * h) * a);
                }
            }
            if frac.is_in_open_01() {
                for m in 1..=50i128 {
                    for k in 1..=50i128 {
                        if m * b < k * a {
                            let h = threshold_h_sharp(m as u64, k as u64, frac).unwrap() as i128;
                            assert!((m + h) * b < (k + h + 4) * a);
                            assert!((m + h + 1) * b >= (k + h + 4) * a);
                        } else {
                            let h = threshold_h_plus(m as u64, k as u64, frac).unwrap() as i128;
                            assert!(m * b < (k + h) * a);
                            assert!((m + 1) * b >= (k + h) * a);
                        }
                    }
                }
            }
        }
    }
}
