//! Refinements and the four conditions that decide the asymptotic paradox rate.
//!
//! A distribution only matters through the sign of `c_i . pi` for each
//! proposition, so the continuous conditions are decided by enumerating the
//! sign patterns reachable in the convex hull of the distribution set. Each
//! pattern is an exact linear feasibility problem over mixture weights.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::aggregation::{is_consistent, IntegerQuota, OutcomeVector};
use crate::error::{Error, Result};
use crate::lp::LinearSystem;
use crate::model::{Agenda, FractionalVote, QuotaRule};
use crate::polyhedra::characteristic_vector;
use crate::scalar::{int, Rational};

/// Node cap for the integer feasibility search behind [`outcome_feasible`].
pub const FEASIBILITY_NODE_LIMIT: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    /// Support strictly above the quota: `c_i . pi < 0`.
    Plus,
    /// Exactly at the quota.
    Zero,
    Minus,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Zero => '0',
            Sign::Minus => '-',
        }
    }

    /// Sign of the verdict for `c . pi`.
    pub fn of_margin(margin: &Rational) -> Sign {
        if margin.is_negative() {
            Sign::Plus
        } else if margin.is_positive() {
            Sign::Minus
        } else {
            Sign::Zero
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignPattern {
    beta: Vec<Sign>,
}

impl SignPattern {
    pub fn new(beta: Vec<Sign>) -> Self {
        SignPattern { beta }
    }

    pub fn signs(&self) -> &[Sign] {
        &self.beta
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    /// The sign pattern of a single distribution.
    pub fn of(pi: &FractionalVote, rule: &QuotaRule, agenda: &Agenda) -> Result<SignPattern> {
        check_vote(pi, agenda)?;
        let beta = (0..agenda.propositions())
            .map(|i| {
                let c = characteristic_vector(i, rule, agenda)?;
                Ok(Sign::of_margin(&c.dot(pi.weights())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SignPattern { beta })
    }

    /// Every outcome vector agreeing with the pattern on its non-zero entries.
    pub fn refinements(&self) -> Vec<OutcomeVector> {
        let free: Vec<usize> = (0..self.len()).filter(|&i| self.beta[i] == Sign::Zero).collect();
        (0..1usize << free.len())
            .map(|mask| {
                let mut bits: Vec<bool> = self.beta.iter().map(|&s| s == Sign::Plus).collect();
                for (k, &i) in free.iter().enumerate() {
                    bits[i] = (mask >> (free.len() - 1 - k)) & 1 == 1;
                }
                OutcomeVector::new(bits)
            })
            .collect()
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.beta.iter().map(|s| s.symbol()).collect();
        write!(f, "({s})")
    }
}

fn check_vote(pi: &FractionalVote, agenda: &Agenda) -> Result<()> {
    if pi.len() != agenda.judgements() {
        return Err(Error::dimension("distribution", agenda.judgements(), pi.len()));
    }
    Ok(())
}

/// A finite set of vote distributions available to the adversary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistributionSet {
    members: Vec<FractionalVote>,
    epsilon: Rational,
}

impl DistributionSet {
    /// Members must be non-empty, pairwise distinct and of equal length.
    /// Zero weights are accepted here; see [`DistributionSet::require_strictly_positive`].
    pub fn new(members: Vec<FractionalVote>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::invalid("distribution set", "no distributions"));
        };
        let m = first.len();
        for (k, pi) in members.iter().enumerate() {
            if pi.len() != m {
                return Err(Error::dimension("distribution", m, pi.len()));
            }
            if members[..k].contains(pi) {
                return Err(Error::invalid("distribution set", format!("distribution {k} duplicates an earlier one")));
            }
        }
        let epsilon = members.iter().map(|pi| pi.min_weight().clone()).min().expect("non-empty");
        Ok(DistributionSet { members, epsilon })
    }

    pub fn from_weights(rows: Vec<Vec<Rational>>) -> Result<Self> {
        DistributionSet::new(rows.into_iter().map(FractionalVote::new).collect::<Result<Vec<_>>>()?)
    }

    pub fn members(&self) -> &[FractionalVote] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Number of judgements `m`.
    pub fn judgements(&self) -> usize {
        self.members[0].len()
    }

    /// Smallest weight over all members.
    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.epsilon.is_positive()
    }

    pub fn require_strictly_positive(&self) -> Result<()> {
        if self.is_strictly_positive() {
            return Ok(());
        }
        let k = self.members.iter().position(|pi| !pi.min_weight().is_positive()).expect("zero weight exists");
        Err(Error::Precondition(format!("distribution {k} has a zero weight; every member must be strictly positive")))
    }

    pub(crate) fn check_agenda(&self, agenda: &Agenda) -> Result<()> {
        check_vote(&self.members[0], agenda)
    }
}

/// Outcome vectors `alpha` with `pi` in the characteristic cone of `H_alpha`.
pub fn refinements(pi: &FractionalVote, rule: &QuotaRule, agenda: &Agenda) -> Result<Vec<OutcomeVector>> {
    Ok(SignPattern::of(pi, rule, agenda)?.refinements())
}

/// Refinements that some `n`-agent profile actually produces.
pub fn effective_refinements(
    pi: &FractionalVote,
    rule: &QuotaRule,
    agenda: &Agenda,
    n: u64,
) -> Result<Vec<OutcomeVector>> {
    let mut out = Vec::new();
    for alpha in refinements(pi, rule, agenda)? {
        if outcome_feasible(&alpha, n, rule, agenda)? {
            out.push(alpha);
        }
    }
    Ok(out)
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("agent count", "n must be at least 1"));
    }
    Ok(())
}

/// Whether some non-negative integer histogram of `n` votes has quota outcome `alpha`.
///
/// The rows of `A_alpha x <= b_alpha` are written on the tallies `n_i` and
/// tightened to integer bounds, which keeps the same integer points and gives
/// branch and bound a sharper relaxation.
pub fn outcome_feasible(alpha: &OutcomeVector, n: u64, rule: &QuotaRule, agenda: &Agenda) -> Result<bool> {
    check_n(n)?;
    rule.check_agenda(agenda)?;
    alpha.check_agenda(agenda)?;
    let quota = IntegerQuota::new(rule, n);
    let m = agenda.judgements();
    let mut system = LinearSystem::new(m);
    system.eq(vec![Rational::one(); m], int(n as i64));
    for i in 0..agenda.propositions() {
        let (lo, hi) = quota.tally_range(i, alpha.get(i));
        if lo > hi {
            return Ok(false);
        }
        let row: Vec<Rational> = (0..m)
            .map(|w| if agenda.accepts(w, i) { Rational::one() } else { Rational::zero() })
            .collect();
        if lo > 0 {
            system.ge(row.clone(), int(lo));
        }
        if hi < n as i64 {
            system.le(row, int(hi));
        }
    }
    Ok(system.integer_point(FEASIBILITY_NODE_LIMIT)?.is_some())
}

/// Whether no `n`-agent profile is a doctrinal paradox.
pub fn check_kappa1(n: u64, rule: &QuotaRule, agenda: &Agenda) -> Result<bool> {
    check_n(n)?;
    rule.check_agenda(agenda)?;
    for alpha in OutcomeVector::all(agenda.propositions()) {
        if !is_consistent(&alpha, agenda) && outcome_feasible(&alpha, n, rule, agenda)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A mixture of the set realising `beta`, or `None` when no point of the hull does.
///
/// Mixture weights `y >= 0` satisfy `c_j . (sum y_k pi_k) <= -1` for `+`,
/// `>= 1` for `-`, `= 0` for `0`, and `sum y >= 1`. The strict rows are
/// homogeneous, so scaling turns any strict solution into one of these.
pub fn sign_pattern_witness(
    beta: &SignPattern,
    set: &DistributionSet,
    rule: &QuotaRule,
    agenda: &Agenda,
) -> Result<Option<FractionalVote>> {
    rule.check_agenda(agenda)?;
    set.check_agenda(agenda)?;
    if beta.len() != agenda.propositions() {
        return Err(Error::dimension("sign pattern", agenda.propositions(), beta.len()));
    }
    let margins = margin_table(set, rule, agenda)?;
    let Some(y) = pattern_system(beta.signs(), &margins, set.len()).feasible_point() else {
        return Ok(None);
    };
    Ok(Some(mixture(set, &y)))
}

pub fn feasible_sign_pattern(beta: &SignPattern, set: &DistributionSet, rule: &QuotaRule, agenda: &Agenda) -> Result<bool> {
    Ok(sign_pattern_witness(beta, set, rule, agenda)?.is_some())
}

/// `margins[j][k] = c_j . pi_k`.
fn margin_table(set: &DistributionSet, rule: &QuotaRule, agenda: &Agenda) -> Result<Vec<Vec<Rational>>> {
    (0..agenda.propositions())
        .map(|j| {
            let c = characteristic_vector(j, rule, agenda)?;
            Ok(set.members().iter().map(|pi| c.dot(pi.weights())).collect())
        })
        .collect()
}

fn pattern_system(signs: &[Sign], margins: &[Vec<Rational>], l: usize) -> LinearSystem {
    let mut system = LinearSystem::new(l);
    system.ge(vec![Rational::one(); l], Rational::one());
    for (sign, row) in signs.iter().zip(margins) {
        match sign {
            Sign::Plus => system.le(row.clone(), -Rational::one()),
            Sign::Minus => system.ge(row.clone(), Rational::one()),
            Sign::Zero => system.eq(row.clone(), Rational::zero()),
        }
    }
    system
}

fn mixture(set: &DistributionSet, y: &[Rational]) -> FractionalVote {
    let total: Rational = y.iter().sum();
    let weights = (0..set.judgements())
        .map(|w| {
            set.members()
                .iter()
                .zip(y)
                .filter(|(_, yk)| !yk.is_zero())
                .map(|(pi, yk)| &pi.weights()[w] * yk)
                .sum::<Rational>()
                / &total
        })
        .collect();
    FractionalVote::new(weights).expect("a convex combination of distributions is a distribution")
}

/// Every sign pattern realised by some point of the convex hull, with a witness.
///
/// Patterns are grown one proposition at a time and a prefix is abandoned as
/// soon as its partial system is infeasible.
pub fn feasible_sign_patterns(
    set: &DistributionSet,
    rule: &QuotaRule,
    agenda: &Agenda,
) -> Result<Vec<(SignPattern, FractionalVote)>> {
    rule.check_agenda(agenda)?;
    set.check_agenda(agenda)?;
    let margins = margin_table(set, rule, agenda)?;
    let total = agenda.propositions();
    let mut found = Vec::new();
    let mut stack: Vec<Vec<Sign>> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        let system = pattern_system(&prefix, &margins[..prefix.len()], set.len());
        let Some(y) = system.feasible_point() else {
            continue;
        };
        if prefix.len() == total {
            found.push((SignPattern::new(prefix), mixture(set, &y)));
            continue;
        }
        for sign in [Sign::Minus, Sign::Zero, Sign::Plus] {
            let mut next = prefix.clone();
            next.push(sign);
            stack.push(next);
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(found)
}

/// The four condition verdicts at a fixed `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KappaTuple {
    pub kappa1: bool,
    pub kappa2: bool,
    pub kappa3: bool,
    pub kappa4: bool,
}

impl KappaTuple {
    pub fn as_array(&self) -> [bool; 4] {
        [self.kappa1, self.kappa2, self.kappa3, self.kappa4]
    }
}

impl fmt::Display for KappaTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.as_array();
        write!(f, "({a}, {b}, {c}, {d})")
    }
}

/// Computes all four conditions, sharing feasibility work between them.
///
/// When no `n`-agent profile is a paradox, the second and third conditions are
/// reported false: that case is already settled by the first, and the rate
/// table lists them that way.
pub fn kappa_tuple(set: &DistributionSet, rule: &QuotaRule, agenda: &Agenda, n: u64) -> Result<KappaTuple> {
    let kappa1 = check_kappa1(n, rule, agenda)?;
    let kappa4 = check_kappa4(rule, agenda)?;
    if kappa1 {
        set.check_agenda(agenda)?;
        return Ok(KappaTuple {
            kappa1,
            kappa2: false,
            kappa3: false,
            kappa4,
        });
    }
    let mut cache: BTreeMap<OutcomeVector, bool> = BTreeMap::new();
    let mut all_clean = true;
    let mut some_clean = false;
    for (beta, _) in feasible_sign_patterns(set, rule, agenda)? {
        let mut clean = true;
        for alpha in beta.refinements() {
            if is_consistent(&alpha, agenda) {
                continue;
            }
            let feasible = match cache.get(&alpha) {
                Some(&v) => v,
                None => {
                    let v = outcome_feasible(&alpha, n, rule, agenda)?;
                    cache.insert(alpha, v);
                    v
                }
            };
            if feasible {
                clean = false;
                break;
            }
        }
        all_clean &= clean;
        some_clean |= clean;
    }
    Ok(KappaTuple {
        kappa1,
        kappa2: all_clean,
        kappa3: some_clean,
        kappa4,
    })
}

/// Every distribution in the hull has only consistent effective refinements.
pub fn check_kappa2(set: &DistributionSet, rule: &QuotaRule, agenda: &Agenda, n: u64) -> Result<bool> {
    Ok(kappa_tuple(set, rule, agenda, n)?.kappa2)
}

/// Some distribution in the hull has only consistent effective refinements.
pub fn check_kappa3(set: &DistributionSet, rule: &QuotaRule, agenda: &Agenda, n: u64) -> Result<bool> {
    Ok(kappa_tuple(set, rule, agenda, n)?.kappa3)
}

/// The conclusion copies or negates a single premise with a matching threshold.
pub fn check_kappa4(rule: &QuotaRule, agenda: &Agenda) -> Result<bool> {
    rule.check_agenda(agenda)?;
    let p = agenda.premises();
    let q = rule.threshold(p);
    for i in 0..p {
        let copies = (0..agenda.judgements()).all(|w| agenda.conclusion(w) == agenda.accepts(w, i));
        let negates = (0..agenda.judgements()).all(|w| agenda.conclusion(w) != agenda.accepts(w, i));
        if copies && q == rule.threshold(i) {
            return Ok(true);
        }
        if negates && *q == Rational::one() - rule.threshold(i) {
            return Ok(true);
        }
    }
    Ok(false)
}
