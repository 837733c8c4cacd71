//! Judgements, votes, profiles, histograms, agendas and quota rules.
//!
//! Judgements over `p` premises are indexed by reading the premise bits as a
//! binary number with the first premise as the most significant digit. The
//! 0-based index is used internally; [`encode_judgement`] and
//! [`decode_index`] speak the 1-based canonical index.
//!
//! Propositions are 0-based throughout: premises are `0..p` and the
//! conclusion is `p`.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{in_unit_interval, int, Rational};

/// Number of premises the crate is willing to model (`m = 2^p` judgements).
pub const MAX_PREMISES: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Judgement {
    bits: Vec<bool>,
}

impl Judgement {
    pub fn new(bits: Vec<bool>) -> Self {
        Judgement { bits }
    }

    /// Builds a judgement from `0`/`1` values.
    pub fn from_bits(bits: &[u8]) -> Self {
        Judgement {
            bits: bits.iter().map(|&b| b != 0).collect(),
        }
    }

    /// Decodes a 0-based index over `p` premises.
    pub fn from_index(index: usize, p: usize) -> Self {
        let bits = (0..p).map(|i| (index >> (p - 1 - i)) & 1 == 1).collect();
        Judgement { bits }
    }

    /// 0-based index: premise bits read as a binary number, first premise most significant.
    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, premise: usize) -> bool {
        self.bits[premise]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

impl fmt::Display for Judgement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.bits.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", u8::from(*b))?;
        }
        write!(f, ")")
    }
}

/// 1-based canonical index of `judgement` within `agenda`.
pub fn encode_judgement(judgement: &Judgement, agenda: &Agenda) -> Result<usize> {
    if judgement.len() != agenda.premises() {
        return Err(Error::dimension("judgement", agenda.premises(), judgement.len()));
    }
    Ok(judgement.index() + 1)
}

/// Inverse of [`encode_judgement`].
pub fn decode_index(index: usize, p: usize) -> Result<Judgement> {
    let m = 1usize << p;
    if index == 0 || index > m {
        return Err(Error::Range {
            what: "judgement index",
            value: index,
            lo: 1,
            hi: m,
        });
    }
    Ok(Judgement::from_index(index - 1, p))
}

/// `p` premises plus the logical connection `f`, stored as a truth table in index order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Agenda {
    premises: usize,
    truth_table: Vec<bool>,
}

impl Agenda {
    pub fn new(premises: usize, truth_table: Vec<bool>) -> Result<Self> {
        if premises == 0 || premises > MAX_PREMISES {
            return Err(Error::Range {
                what: "premise count",
                value: premises,
                lo: 1,
                hi: MAX_PREMISES,
            });
        }
        let m = 1usize << premises;
        if truth_table.len() != m {
            return Err(Error::dimension("truth table", m, truth_table.len()));
        }
        Ok(Agenda {
            premises,
            truth_table,
        })
    }

    pub fn from_fn(premises: usize, f: impl Fn(&Judgement) -> bool) -> Result<Self> {
        if premises == 0 || premises > MAX_PREMISES {
            return Self::new(premises, Vec::new());
        }
        let table = (0..1usize << premises)
            .map(|i| f(&Judgement::from_index(i, premises)))
            .collect();
        Self::new(premises, table)
    }

    /// Conclusion holds iff every premise holds.
    pub fn conjunction(premises: usize) -> Result<Self> {
        Self::from_fn(premises, |w| w.bits().iter().all(|&b| b))
    }

    /// One premise; the conclusion copies it.
    pub fn identity() -> Self {
        Agenda {
            premises: 1,
            truth_table: vec![false, true],
        }
    }

    pub fn premises(&self) -> usize {
        self.premises
    }

    /// Number of judgements, `2^p`.
    pub fn judgements(&self) -> usize {
        self.truth_table.len()
    }

    /// Number of propositions, `p + 1`.
    pub fn propositions(&self) -> usize {
        self.premises + 1
    }

    pub fn truth_table(&self) -> &[bool] {
        &self.truth_table
    }

    /// `f` at a 0-based judgement index.
    pub fn conclusion(&self, index: usize) -> bool {
        self.truth_table[index]
    }

    /// `f` evaluated on arbitrary premise values.
    pub fn evaluate(&self, premises: &[bool]) -> bool {
        let index = premises.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b));
        self.truth_table[index]
    }

    /// Whether the judgement at `index` accepts `proposition` (premise bit, or `f` for the conclusion).
    #[inline]
    pub fn accepts(&self, index: usize, proposition: usize) -> bool {
        if proposition < self.premises {
            (index >> (self.premises - 1 - proposition)) & 1 == 1
        } else {
            self.truth_table[index]
        }
    }

    pub(crate) fn check_proposition(&self, proposition: usize) -> Result<()> {
        if proposition > self.premises {
            return Err(Error::Range {
                what: "proposition index",
                value: proposition,
                lo: 0,
                hi: self.premises,
            });
        }
        Ok(())
    }

    /// Judgements whose `proposition` is 1 (for the conclusion: those with `f = 1`).
    pub fn omega_set(&self, proposition: usize) -> Result<Vec<Judgement>> {
        self.check_proposition(proposition)?;
        Ok((0..self.judgements())
            .filter(|&w| self.accepts(w, proposition))
            .map(|w| Judgement::from_index(w, self.premises))
            .collect())
    }
}

/// Free-function form of [`Agenda::omega_set`].
pub fn omega_set(proposition: usize, agenda: &Agenda) -> Result<Vec<Judgement>> {
    agenda.omega_set(proposition)
}

/// A probability distribution over the `m` judgements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FractionalVote {
    weights: Vec<Rational>,
}

impl FractionalVote {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("fractional vote", "no weights"));
        }
        if let Some(w) = weights.iter().find(|w| !in_unit_interval(w)) {
            return Err(Error::invalid("fractional vote", format!("weight {w} outside [0, 1]")));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::invalid("fractional vote", format!("weights sum to {total}, not 1")));
        }
        Ok(FractionalVote { weights })
    }

    /// The non-fractional vote for the judgement at 0-based `index`.
    pub fn vote(m: usize, index: usize) -> Self {
        let weights = (0..m)
            .map(|i| if i == index { Rational::one() } else { Rational::zero() })
            .collect();
        FractionalVote { weights }
    }

    pub fn uniform(m: usize) -> Self {
        FractionalVote {
            weights: vec![Rational::new(1.into(), (m as i64).into()); m],
        }
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The judgement index when the vote is non-fractional.
    pub fn as_vote(&self) -> Option<usize> {
        let mut hit = None;
        for (i, w) in self.weights.iter().enumerate() {
            if w.is_one() {
                hit = Some(i);
            } else if !w.is_zero() {
                return None;
            }
        }
        hit
    }

    pub fn min_weight(&self) -> &Rational {
        self.weights.iter().min().expect("non-empty")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    votes: Vec<FractionalVote>,
}

impl Profile {
    pub fn new(votes: Vec<FractionalVote>) -> Result<Self> {
        let Some(first) = votes.first() else {
            return Err(Error::invalid("profile", "no votes"));
        };
        let m = first.len();
        if let Some(v) = votes.iter().find(|v| v.len() != m) {
            return Err(Error::dimension("vote", m, v.len()));
        }
        Ok(Profile { votes })
    }

    /// Profile of non-fractional votes given by 0-based judgement indices.
    pub fn from_indices(m: usize, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= m) {
            return Err(Error::Range {
                what: "judgement index",
                value: bad,
                lo: 0,
                hi: m - 1,
            });
        }
        Self::new(indices.iter().map(|&i| FractionalVote::vote(m, i)).collect())
    }

    pub fn votes(&self) -> &[FractionalVote] {
        &self.votes
    }

    pub fn len(&self) -> usize {
        self.votes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.votes.is_empty()
    }

    pub fn judgements(&self) -> usize {
        self.votes[0].len()
    }

    pub fn concat(&self, other: &Profile) -> Result<Profile> {
        Profile::new(self.votes.iter().chain(other.votes.iter()).cloned().collect())
    }
}

/// Total weight per judgement; the only thing a quota rule looks at.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Histogram {
    weights: Vec<Rational>,
    total: Rational,
}

impl Histogram {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("histogram", "no entries"));
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::invalid("histogram", format!("negative weight {w}")));
        }
        let total = weights.iter().sum();
        Ok(Histogram { weights, total })
    }

    pub fn from_counts(counts: &[u64]) -> Self {
        let weights: Vec<Rational> = counts.iter().map(|&c| int(c as i64)).collect();
        let total = weights.iter().sum();
        Histogram { weights, total }
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// Total weight `n`.
    pub fn total(&self) -> &Rational {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Integer counts, if every entry is integral.
    pub fn counts(&self) -> Option<Vec<u64>> {
        self.weights
            .iter()
            .map(|w| {
                if w.is_integer() {
                    w.numer().try_into().ok()
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Coordinate-wise sum of the votes in `profile`.
pub fn histogram(profile: &Profile) -> Histogram {
    let m = profile.judgements();
    let mut weights = vec![Rational::zero(); m];
    for vote in profile.votes() {
        for (acc, w) in weights.iter_mut().zip(vote.weights()) {
            *acc += w;
        }
    }
    Histogram::new(weights).expect("votes are non-negative")
}

/// Thresholds `q` and tie-breaking bits `d`, one per proposition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuotaRule {
    thresholds: Vec<Rational>,
    breakings: Vec<bool>,
}

impl QuotaRule {
    pub fn new(thresholds: Vec<Rational>, breakings: Vec<bool>) -> Result<Self> {
        if thresholds.len() != breakings.len() {
            return Err(Error::dimension("breakings", thresholds.len(), breakings.len()));
        }
        if thresholds.len() < 2 {
            return Err(Error::invalid("quota rule", "needs at least one premise and the conclusion"));
        }
        if let Some(q) = thresholds.iter().find(|q| !in_unit_interval(q)) {
            return Err(Error::invalid("quota rule", format!("threshold {q} outside [0, 1]")));
        }
        Ok(QuotaRule {
            thresholds,
            breakings,
        })
    }

    /// Same threshold on every proposition.
    pub fn uniform(threshold: Rational, breakings: Vec<bool>) -> Result<Self> {
        Self::new(vec![threshold; breakings.len()], breakings)
    }

    pub fn thresholds(&self) -> &[Rational] {
        &self.thresholds
    }

    pub fn breakings(&self) -> &[bool] {
        &self.breakings
    }

    pub fn threshold(&self, proposition: usize) -> &Rational {
        &self.thresholds[proposition]
    }

    pub fn breaking(&self, proposition: usize) -> bool {
        self.breakings[proposition]
    }

    pub fn propositions(&self) -> usize {
        self.thresholds.len()
    }

    /// Fails unless the rule has one entry per proposition of `agenda`.
    pub fn check_agenda(&self, agenda: &Agenda) -> Result<()> {
        if self.propositions() != agenda.propositions() {
            return Err(Error::dimension("quota rule", agenda.propositions(), self.propositions()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn and2() -> Agenda {
        Agenda::conjunction(2).unwrap()
    }

    #[test]
    fn encode_matches_binary_reading() {
        let agenda = and2();
        assert_eq!(encode_judgement(&Judgement::from_bits(&[1, 0]), &agenda).unwrap(), 3);
        assert_eq!(encode_judgement(&Judgement::from_bits(&[0, 0]), &agenda).unwrap(), 1);
        let and3 = Agenda::conjunction(3).unwrap();
        assert_eq!(encode_judgement(&Judgement::from_bits(&[1, 1, 1]), &and3).unwrap(), 8);
        assert!(matches!(
            encode_judgement(&Judgement::from_bits(&[1]), &agenda),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn decode_inverts_encode() {
        assert_eq!(decode_index(3, 2).unwrap(), Judgement::from_bits(&[1, 0]));
        assert_eq!(decode_index(1, 2).unwrap(), Judgement::from_bits(&[0, 0]));
        assert_eq!(decode_index(8, 3).unwrap(), Judgement::from_bits(&[1, 1, 1]));
        assert!(matches!(decode_index(0, 2), Err(Error::Range { .. })));
        assert!(matches!(decode_index(5, 2), Err(Error::Range { .. })));
        for p in 1..=4 {
            let agenda = Agenda::conjunction(p).unwrap();
            let mut seen = std::collections::HashSet::new();
            for i in 1..=(1usize << p) {
                let w = decode_index(i, p).unwrap();
                assert_eq!(encode_judgement(&w, &agenda).unwrap(), i);
                assert!(seen.insert(w));
            }
        }
    }

    #[test]
    fn omega_sets_for_conjunction() {
        let agenda = and2();
        let j = |b: &[u8]| Judgement::from_bits(b);
        assert_eq!(agenda.omega_set(0).unwrap(), vec![j(&[1, 0]), j(&[1, 1])]);
        assert_eq!(agenda.omega_set(1).unwrap(), vec![j(&[0, 1]), j(&[1, 1])]);
        assert_eq!(agenda.omega_set(2).unwrap(), vec![j(&[1, 1])]);
        assert!(agenda.omega_set(3).is_err());
        let never = Agenda::from_fn(2, |_| false).unwrap();
        assert!(never.omega_set(2).unwrap().is_empty());
    }

    #[test]
    fn omega_set_sizes() {
        for p in 1..=4 {
            let agenda = Agenda::from_fn(p, |w| w.index() % 3 == 0).unwrap();
            for i in 0..p {
                assert_eq!(agenda.omega_set(i).unwrap().len(), 1 << (p - 1));
            }
            let ones = agenda.truth_table().iter().filter(|&&b| b).count();
            assert_eq!(agenda.omega_set(p).unwrap().len(), ones);
        }
    }

    #[test]
    fn histogram_of_fractional_profile() {
        let v = |w: [Rational; 4]| FractionalVote::new(w.to_vec()).unwrap();
        let z = || rat(0, 1);
        let profile = Profile::new(vec![
            v([z(), z(), rat(1, 1), z()]),
            v([z(), rat(1, 1), z(), z()]),
            v([z(), z(), rat(1, 2), rat(1, 2)]),
        ])
        .unwrap();
        let h = histogram(&profile);
        assert_eq!(h.weights(), &[z(), rat(1, 1), rat(3, 2), rat(1, 2)]);
        assert_eq!(h.total(), &rat(3, 1));

        let single = Profile::from_indices(4, &[3]).unwrap();
        assert_eq!(histogram(&single).counts().unwrap(), vec![0, 0, 0, 1]);

        let uniform = Profile::new(vec![FractionalVote::uniform(4); 3]).unwrap();
        assert_eq!(histogram(&uniform).weights(), &[rat(3, 4), rat(3, 4), rat(3, 4), rat(3, 4)]);
    }

    #[test]
    fn profile_rejects_mixed_dimensions() {
        let err = Profile::new(vec![FractionalVote::vote(4, 0), FractionalVote::vote(2, 0)]);
        assert!(matches!(err, Err(Error::Dimension { .. })));
        assert!(Profile::new(vec![]).is_err());
    }

    #[test]
    fn fractional_vote_validation() {
        assert!(FractionalVote::new(vec![rat(1, 2), rat(1, 3)]).is_err());
        assert!(FractionalVote::new(vec![rat(3, 2), rat(-1, 2)]).is_err());
        let v = FractionalVote::new(vec![rat(0, 1), rat(1, 1)]).unwrap();
        assert_eq!(v.as_vote(), Some(1));
        assert_eq!(FractionalVote::uniform(4).as_vote(), None);
    }

    #[test]
    fn quota_rule_validation() {
        assert!(QuotaRule::new(vec![rat(1, 2)], vec![true]).is_err());
        assert!(QuotaRule::new(vec![rat(1, 2), rat(3, 2)], vec![true, false]).is_err());
        assert!(QuotaRule::new(vec![rat(1, 2), rat(1, 2)], vec![true]).is_err());
        let rule = QuotaRule::uniform(rat(1, 2), vec![true, true, false]).unwrap();
        assert!(rule.check_agenda(&and2()).is_ok());
        assert!(rule.check_agenda(&Agenda::identity()).is_err());
    }
}
