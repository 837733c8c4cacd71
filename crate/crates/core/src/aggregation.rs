//! Quota-rule evaluation and doctrinal-paradox detection.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{histogram, Agenda, Histogram, Profile, QuotaRule};
use crate::scalar::Rational;

/// A joint verdict on every premise followed by the conclusion.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeVector(Vec<bool>);

impl OutcomeVector {
    pub fn new(bits: Vec<bool>) -> Self {
        OutcomeVector(bits)
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        OutcomeVector(bits.iter().map(|&b| b != 0).collect())
    }

    /// Outcome number `code` of `len` propositions, first proposition most significant.
    pub fn from_code(code: usize, len: usize) -> Self {
        OutcomeVector((0..len).map(|i| (code >> (len - 1 - i)) & 1 == 1).collect())
    }

    /// Every vector in `{0,1}^len`, in binary order.
    pub fn all(len: usize) -> impl Iterator<Item = OutcomeVector> {
        (0..1usize << len).map(move |c| OutcomeVector::from_code(c, len))
    }

    pub fn code(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, proposition: usize) -> bool {
        self.0[proposition]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn check_agenda(&self, agenda: &Agenda) -> Result<()> {
        if self.len() != agenda.propositions() {
            return Err(Error::dimension("outcome vector", agenda.propositions(), self.len()));
        }
        Ok(())
    }
}

impl fmt::Display for OutcomeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", u8::from(*b))?;
        }
        write!(f, ")")
    }
}

fn check_histogram(h: &Histogram, agenda: &Agenda) -> Result<()> {
    if h.len() != agenda.judgements() {
        return Err(Error::dimension("histogram", agenda.judgements(), h.len()));
    }
    Ok(())
}

/// `n_i`: total weight of judgements accepting `proposition`.
pub fn proposition_weight(h: &Histogram, proposition: usize, agenda: &Agenda) -> Result<Rational> {
    agenda.check_proposition(proposition)?;
    check_histogram(h, agenda)?;
    Ok(h.weights()
        .iter()
        .enumerate()
        .filter(|(w, _)| agenda.accepts(*w, proposition))
        .map(|(_, x)| x)
        .sum())
}

pub fn is_tied(h: &Histogram, proposition: usize, rule: &QuotaRule, agenda: &Agenda) -> Result<bool> {
    rule.check_agenda(agenda)?;
    let weight = proposition_weight(h, proposition, agenda)?;
    Ok(weight == rule.threshold(proposition) * h.total())
}

/// Proposition-wise quota rule: accept when `n_i > q_i n`, use `d_i` on a tie.
pub fn apply_quota(h: &Histogram, rule: &QuotaRule, agenda: &Agenda) -> Result<OutcomeVector> {
    rule.check_agenda(agenda)?;
    check_histogram(h, agenda)?;
    let n = h.total();
    let bits = (0..agenda.propositions())
        .map(|i| {
            let weight = proposition_weight(h, i, agenda)?;
            let bar = rule.threshold(i) * n;
            Ok(match weight.cmp(&bar) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Equal => rule.breaking(i),
                std::cmp::Ordering::Less => false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OutcomeVector(bits))
}

/// Whether the conclusion verdict agrees with `f` applied to the premise verdicts.
pub fn is_consistent(alpha: &OutcomeVector, agenda: &Agenda) -> bool {
    let p = agenda.premises();
    agenda.evaluate(&alpha.bits()[..p]) == alpha.get(p)
}

pub fn is_paradox(profile: &Profile, rule: &QuotaRule, agenda: &Agenda) -> Result<bool> {
    let outcome = apply_quota(&histogram(profile), rule, agenda)?;
    Ok(!is_consistent(&outcome, agenda))
}

/// The quota rule specialised to integer histograms of a fixed size `n`.
///
/// For integral `n_i`, `n_i > q n` iff `n_i > floor(q n)`, and a tie is only
/// possible when `q n` is itself an integer.
#[derive(Clone, Debug)]
pub struct IntegerQuota {
    n: u64,
    floors: Vec<u64>,
    exact: Vec<bool>,
    breakings: Vec<bool>,
}

impl IntegerQuota {
    pub fn new(rule: &QuotaRule, n: u64) -> Self {
        let mut floors = Vec::with_capacity(rule.propositions());
        let mut exact = Vec::with_capacity(rule.propositions());
        for q in rule.thresholds() {
            let scaled = q.numer() * BigInt::from(n);
            let (quot, rem) = scaled.div_rem(q.denom());
            floors.push(quot.to_u64().expect("q in [0,1] keeps q*n <= n"));
            exact.push(rem.is_zero());
        }
        IntegerQuota {
            n,
            floors,
            exact,
            breakings: rule.breakings().to_vec(),
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn verdict(&self, proposition: usize, weight: u64) -> bool {
        let floor = self.floors[proposition];
        if weight > floor {
            true
        } else if weight == floor && self.exact[proposition] {
            self.breakings[proposition]
        } else {
            false
        }
    }

    /// Inclusive range of integer tallies `n_i` with verdict `accept`; `lo > hi` when empty.
    pub fn tally_range(&self, proposition: usize, accept: bool) -> (i64, i64) {
        let floor = self.floors[proposition] as i64;
        let tie_accepts = self.exact[proposition] && self.breakings[proposition];
        if accept {
            (if tie_accepts { floor } else { floor + 1 }, self.n as i64)
        } else {
            (0, if tie_accepts { floor - 1 } else { floor })
        }
    }

    #[inline]
    pub fn is_tied(&self, proposition: usize, weight: u64) -> bool {
        self.exact[proposition] && weight == self.floors[proposition]
    }

    /// Outcome for integer judgement counts summing to `n`.
    pub fn outcome(&self, counts: &[u64], agenda: &Agenda) -> OutcomeVector {
        let tallies = tallies(counts, agenda);
        OutcomeVector(tallies.iter().enumerate().map(|(i, &t)| self.verdict(i, t)).collect())
    }

    pub fn is_paradox(&self, counts: &[u64], agenda: &Agenda) -> bool {
        !is_consistent(&self.outcome(counts, agenda), agenda)
    }
}

/// Per-proposition counts `n_i` of an integer histogram.
pub fn tallies(counts: &[u64], agenda: &Agenda) -> Vec<u64> {
    let mut out = vec![0u64; agenda.propositions()];
    for (w, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for (i, slot) in out.iter_mut().enumerate() {
            if agenda.accepts(w, i) {
                *slot += c;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FractionalVote;
    use crate::scalar::{int, rat};

    fn table2() -> (Histogram, QuotaRule, Agenda) {
        let h = Histogram::new(vec![int(0), int(1), rat(3, 2), rat(1, 2)]).unwrap();
        let rule = QuotaRule::uniform(rat(1, 2), vec![true, true, false]).unwrap();
        (h, rule, Agenda::conjunction(2).unwrap())
    }

    #[test]
    fn weights_from_table2() {
        let (h, _, agenda) = table2();
        assert_eq!(proposition_weight(&h, 0, &agenda).unwrap(), int(2));
        assert_eq!(proposition_weight(&h, 1, &agenda).unwrap(), rat(3, 2));
        assert_eq!(proposition_weight(&h, 2, &agenda).unwrap(), rat(1, 2));
        let bottom = Histogram::from_counts(&[5, 0, 0, 0]);
        assert_eq!(proposition_weight(&bottom, 1, &agenda).unwrap(), int(0));
        assert!(proposition_weight(&h, 3, &agenda).is_err());
    }

    #[test]
    fn quota_outcomes() {
        let (h, rule, agenda) = table2();
        assert_eq!(apply_quota(&h, &rule, &agenda).unwrap(), OutcomeVector::from_bits(&[1, 1, 0]));
        let single = Histogram::from_counts(&[0, 0, 0, 1]);
        assert_eq!(apply_quota(&single, &rule, &agenda).unwrap(), OutcomeVector::from_bits(&[1, 1, 1]));
        let tied = Histogram::from_counts(&[1, 0, 0, 1]);
        assert_eq!(apply_quota(&tied, &rule, &agenda).unwrap(), OutcomeVector::from_bits(&[1, 1, 0]));
    }

    #[test]
    fn ties() {
        let (h, rule, agenda) = table2();
        assert!(is_tied(&h, 1, &rule, &agenda).unwrap());
        assert!(!is_tied(&h, 0, &rule, &agenda).unwrap());
        let third = QuotaRule::uniform(rat(1, 3), vec![true, true, false]).unwrap();
        for a in 0..=2u64 {
            for b in 0..=(2 - a) {
                for c in 0..=(2 - a - b) {
                    let h = Histogram::from_counts(&[a, b, c, 2 - a - b - c]);
                    for i in 0..3 {
                        assert!(!is_tied(&h, i, &third, &agenda).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn consistency() {
        let agenda = Agenda::conjunction(2).unwrap();
        assert!(!is_consistent(&OutcomeVector::from_bits(&[1, 1, 0]), &agenda));
        assert!(is_consistent(&OutcomeVector::from_bits(&[1, 0, 0]), &agenda));
        assert!(is_consistent(&OutcomeVector::from_bits(&[0, 0, 0]), &agenda));
        let always = Agenda::from_fn(3, |_| true).unwrap();
        assert!(is_consistent(&OutcomeVector::from_bits(&[0, 0, 0, 1]), &always));
    }

    #[test]
    fn paradox_examples() {
        let (_, rule, agenda) = table2();
        let v = |w: [Rational; 4]| FractionalVote::new(w.to_vec()).unwrap();
        let profile = Profile::new(vec![
            v([int(0), int(0), int(1), int(0)]),
            v([int(0), int(1), int(0), int(0)]),
            v([int(0), int(0), rat(1, 2), rat(1, 2)]),
        ])
        .unwrap();
        assert!(is_paradox(&profile, &rule, &agenda).unwrap());

        // Agents (Y,N), (N,Y), (Y,Y).
        let jury = Profile::from_indices(4, &[2, 1, 3]).unwrap();
        assert!(is_paradox(&jury, &rule, &agenda).unwrap());

        for w in 0..4 {
            let single = Profile::from_indices(4, &[w]).unwrap();
            assert!(!is_paradox(&single, &rule, &agenda).unwrap());
        }
    }

    #[test]
    fn integer_quota_agrees_with_rational_rule() {
        let agenda = Agenda::conjunction(2).unwrap();
        let rules = [
            QuotaRule::uniform(rat(1, 2), vec![true, true, false]).unwrap(),
            QuotaRule::new(vec![rat(1, 3), rat(2, 5), rat(0, 1)], vec![false, true, true]).unwrap(),
            QuotaRule::new(vec![rat(1, 1), rat(3, 4), rat(1, 4)], vec![true, false, true]).unwrap(),
        ];
        for rule in &rules {
            for n in 1..=6u64 {
                let fast = IntegerQuota::new(rule, n);
                for a in 0..=n {
                    for b in 0..=(n - a) {
                        for c in 0..=(n - a - b) {
                            let counts = [a, b, c, n - a - b - c];
                            let h = Histogram::from_counts(&counts);
                            assert_eq!(fast.outcome(&counts, &agenda), apply_quota(&h, rule, &agenda).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn outcome_codes_roundtrip() {
        for len in 1..5 {
            for (c, v) in OutcomeVector::all(len).enumerate() {
                assert_eq!(v.code(), c);
                assert_eq!(v.len(), len);
            }
        }
        assert_eq!(OutcomeVector::from_bits(&[1, 1, 0]).to_string(), "(1,1,0)");
    }

    #[test]
    fn tally_ranges_match_verdicts() {
        for (q, d) in [(rat(1, 2), true), (rat(1, 2), false), (rat(1, 3), true), (int(0), false), (int(1), true)] {
            let rule = QuotaRule::uniform(q, vec![d, d]).unwrap();
            for n in 1..=9u64 {
                let iq = IntegerQuota::new(&rule, n);
                for accept in [false, true] {
                    let (lo, hi) = iq.tally_range(0, accept);
                    for w in 0..=n {
                        let inside = (w as i64) >= lo && (w as i64) <= hi;
                        assert_eq!(inside, iq.verdict(0, w) == accept, "n={n} w={w}");
                    }
                }
            }
        }
    }
}
