//! Paradox likelihood: exact and sampled probabilities, smoothed extremes,
//! the rate classification and curve fitting.

pub mod dp;
pub mod extremes;
pub mod fit;
pub mod monte_carlo;

use std::fmt;

use crate::conditions::{kappa_tuple, DistributionSet, KappaTuple};
use crate::error::{Error, Result};
use crate::model::{Agenda, QuotaRule};
use crate::scalar::{Probability, Rational};

pub use dp::{HistogramDistribution, ParadoxKernel, SimplexLattice};
pub use extremes::{smoothed_extremes, Estimate, Extremes, ExtremesConfig, Mode, Precision};
pub use fit::{fit_curve, CurveFit, Family};
pub use monte_carlo::{monte_carlo_estimate, McEstimate};

/// Default cap on histogram states for the exact recursion.
pub const DEFAULT_BUDGET_STATES: u128 = 20_000_000;

/// How many agents draw from each member of the distribution set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    counts: Vec<u64>,
}

impl Assignment {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid("assignment", "no groups"));
        }
        Ok(Assignment { counts })
    }

    /// All agents on member `index` of a set of size `l`.
    pub fn single(l: usize, index: usize, n: u64) -> Self {
        let mut counts = vec![0; l];
        counts[index] = n;
        Assignment { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn groups(&self) -> usize {
        self.counts.len()
    }

    /// Every way to split `n` agents over `l` members, in lex order.
    pub fn all(n: u64, l: usize) -> impl Iterator<Item = Assignment> {
        let mut next = Some({
            let mut c = vec![0; l];
            c[l - 1] = n;
            c
        });
        std::iter::from_fn(move || {
            let current = next.take()?;
            next = advance(&current);
            Some(Assignment { counts: current })
        })
    }

    /// `C(n + l - 1, l - 1)`, saturating.
    pub fn count(n: u64, l: usize) -> u128 {
        dp::lattice_size(n, l)
    }

    /// The per-agent list of member indices, grouped.
    pub fn expand(&self) -> Vec<usize> {
        self.counts.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat_n(k, c as usize)).collect()
    }
}

fn advance(x: &[u64]) -> Option<Vec<u64>> {
    let d = x.len();
    let mut x = x.to_vec();
    let mut tail = x[d - 1];
    for i in (0..d.saturating_sub(1)).rev() {
        if tail > 0 {
            x[i] += 1;
            for v in &mut x[i + 1..] {
                *v = 0;
            }
            x[d - 1] = tail - 1;
            return Some(x);
        }
        tail += x[i];
    }
    None
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(u64::to_string).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Exact paradox probability for one assignment, in scalar `T`.
pub fn exact_paradox_probability<T: Probability>(
    assignment: &Assignment,
    set: &DistributionSet,
    rule: &QuotaRule,
    agenda: &Agenda,
) -> Result<T> {
    check_assignment(assignment, set)?;
    let kernel = ParadoxKernel::new(assignment.n(), rule, agenda, DEFAULT_BUDGET_STATES)?;
    kernel.probability(assignment.counts(), &dp::convert::<T>(&weights(set)))
}

pub(crate) fn check_assignment(assignment: &Assignment, set: &DistributionSet) -> Result<()> {
    if assignment.groups() != set.len() {
        return Err(Error::dimension("assignment", set.len(), assignment.groups()));
    }
    if assignment.n() == 0 {
        return Err(Error::invalid("assignment", "no agents"));
    }
    Ok(())
}

pub(crate) fn weights(set: &DistributionSet) -> Vec<Vec<Rational>> {
    set.members().iter().map(|pi| pi.weights().to_vec()).collect()
}

/// Asymptotic order of a smoothed likelihood.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RateClass {
    Zero,
    ExpSmall,
    InvSqrt,
    Constant,
}

impl fmt::Display for RateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateClass::Zero => "0",
            RateClass::ExpSmall => "exp(-Theta(n))",
            RateClass::InvSqrt => "Theta(n^-1/2)",
            RateClass::Constant => "Theta(1)",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Classification {
    pub max_rate: RateClass,
    pub min_rate: RateClass,
    pub kappa: KappaTuple,
}

impl Classification {
    pub fn from_kappa(kappa: KappaTuple) -> Self {
        let rate = |small: bool| {
            if kappa.kappa1 {
                RateClass::Zero
            } else if small {
                RateClass::ExpSmall
            } else if kappa.kappa4 {
                RateClass::InvSqrt
            } else {
                RateClass::Constant
            }
        };
        Classification {
            max_rate: rate(kappa.kappa2),
            min_rate: rate(kappa.kappa3),
            kappa,
        }
    }
}

/// Rate classes of the max and min smoothed likelihood at `n` agents.
pub fn classify(set: &DistributionSet, rule: &QuotaRule, agenda: &Agenda, n: u64) -> Result<Classification> {
    set.require_strictly_positive()?;
    Ok(Classification::from_kappa(kappa_tuple(set, rule, agenda, n)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FractionalVote;
    use crate::scalar::rat;

    #[test]
    fn assignments_enumerate_compositions() {
        let all: Vec<String> = Assignment::all(2, 3).map(|a| a.to_string()).collect();
        assert_eq!(all, vec!["0;0;2", "0;1;1", "0;2;0", "1;0;1", "1;1;0", "2;0;0"]);
        assert_eq!(Assignment::count(2, 3), 6);
        assert_eq!(Assignment::all(5, 1).count(), 1);
        assert_eq!(Assignment::all(99, 2).count(), 100);
        assert_eq!(Assignment::new(vec![1, 2]).unwrap().expand(), vec![0, 1, 1]);
    }

    fn kt(a: [bool; 4]) -> KappaTuple {
        KappaTuple {
            kappa1: a[0],
            kappa2: a[1],
            kappa3: a[2],
            kappa4: a[3],
        }
    }

    #[test]
    fn case_order() {
        use RateClass::*;
        let c = |a| {
            let c = Classification::from_kappa(kt(a));
            (c.max_rate, c.min_rate)
        };
        assert_eq!(c([true, true, true, true]), (Zero, Zero));
        assert_eq!(c([false, true, true, true]), (ExpSmall, ExpSmall));
        assert_eq!(c([false, false, true, true]), (InvSqrt, ExpSmall));
        assert_eq!(c([false, false, false, true]), (InvSqrt, InvSqrt));
        assert_eq!(c([false, false, false, false]), (Constant, Constant));
    }

    #[test]
    fn classify_requires_positive_members() {
        let rule = QuotaRule::uniform(rat(1, 2), vec![true, false]).unwrap();
        let set = DistributionSet::new(vec![FractionalVote::vote(2, 0)]).unwrap();
        assert!(matches!(classify(&set, &rule, &Agenda::identity(), 2), Err(Error::Precondition(_))));
    }
}
