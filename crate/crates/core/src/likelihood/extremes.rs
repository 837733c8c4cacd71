//! Max and min paradox probability over every distribution assignment.

use num_integer::Integer;
use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;

use super::monte_carlo::{monte_carlo_stream, Sampler};
use super::{dp, weights, Assignment, ParadoxKernel, DEFAULT_BUDGET_STATES};
use crate::conditions::DistributionSet;
use crate::error::{Error, Result};
use crate::model::{Agenda, QuotaRule};
use crate::scalar::{rational_to_f64, Rational};

/// Environment variable naming the worker count.
pub const THREADS_ENV: &str = "PARADOX_LAB_THREADS";

/// Scalar used by the exact recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    /// Exact fractions throughout.
    Rational,
    /// `f64` accumulation; relative error stays below about `(n + 1) m` ulps.
    Float,
    /// Fractions while the final denominator stays under the given bit count, `f64` beyond.
    Auto { max_denominator_bits: u64 },
}

impl Default for Precision {
    fn default() -> Self {
        Precision::Auto {
            max_denominator_bits: 128,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact(Precision),
    MonteCarlo { trials: u64, seed: u64 },
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Exact(_) => "exact",
            Mode::MonteCarlo { .. } => "mc",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExtremesConfig {
    pub mode: Mode,
    /// Cap on histogram states of the exact recursion.
    pub budget_states: u128,
    /// Cap on the number of assignments evaluated.
    pub budget_assignments: u128,
    /// Worker count; `None` reads the environment, then falls back to rayon's default.
    pub threads: Option<usize>,
}

impl Default for ExtremesConfig {
    fn default() -> Self {
        ExtremesConfig {
            mode: Mode::Exact(Precision::default()),
            budget_states: DEFAULT_BUDGET_STATES,
            budget_assignments: 1_000_000,
            threads: None,
        }
    }
}

impl ExtremesConfig {
    pub fn exact(precision: Precision) -> Self {
        ExtremesConfig {
            mode: Mode::Exact(precision),
            ..Default::default()
        }
    }

    pub fn monte_carlo(trials: u64, seed: u64) -> Self {
        ExtremesConfig {
            mode: Mode::MonteCarlo { trials, seed },
            ..Default::default()
        }
    }
}

/// A probability with its standard error (zero for exact values).
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    /// The exact value when computed in rational arithmetic.
    pub exact: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extremes {
    pub n: u64,
    pub max: Estimate,
    pub max_witness: Assignment,
    pub min: Estimate,
    pub min_witness: Assignment,
    pub mode: Mode,
    /// Whether exact values were carried as fractions.
    pub rational: bool,
    pub assignments: usize,
}

/// Bits in the common denominator of every histogram probability at `n` agents.
pub fn denominator_bits(set: &DistributionSet, n: u64) -> u64 {
    let lcm = set
        .members()
        .iter()
        .flat_map(|pi| pi.weights())
        .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    // ceil(log2(lcm)) per agent.
    (lcm - 1u32).bits().saturating_mul(n)
}

fn worker_count(config: &ExtremesConfig) -> Option<usize> {
    config
        .threads
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&t| t > 0)
}

/// Runs `f` on a pool sized by the config.
pub(crate) fn with_pool<R: Send>(config: &ExtremesConfig, f: impl FnOnce() -> R + Send) -> Result<R> {
    match worker_count(config) {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::invalid("thread pool", e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Max and min of the paradox probability over all ways of assigning the
/// set's members to `n` agents, with the first maximiser and minimiser in lex order.
pub fn smoothed_extremes(
    set: &DistributionSet,
    n: u64,
    rule: &QuotaRule,
    agenda: &Agenda,
    config: &ExtremesConfig,
) -> Result<Extremes> {
    if n == 0 {
        return Err(Error::invalid("agent count", "n must be at least 1"));
    }
    rule.check_agenda(agenda)?;
    if set.judgements() != agenda.judgements() {
        return Err(Error::dimension("distribution", agenda.judgements(), set.judgements()));
    }
    let total = Assignment::count(n, set.len());
    if total > config.budget_assignments {
        return Err(Error::Resource {
            what: "distribution assignments",
            required: total,
            cap: config.budget_assignments,
        });
    }
    let assignments: Vec<Assignment> = Assignment::all(n, set.len()).collect();

    let (estimates, rational) = match config.mode {
        Mode::Exact(precision) => {
            let kernel = ParadoxKernel::new(n, rule, agenda, config.budget_states)?;
            let rational = match precision {
                Precision::Rational => true,
                Precision::Float => false,
                Precision::Auto { max_denominator_bits } => denominator_bits(set, n) <= max_denominator_bits,
            };
            let ws = weights(set);
            let estimates = if rational {
                let dists = dp::convert::<Rational>(&ws);
                with_pool(config, || {
                    assignments
                        .par_iter()
                        .map(|a| {
                            let p: Rational = kernel.probability(a.counts(), &dists)?;
                            Ok(Estimate {
                                value: rational_to_f64(&p),
                                stderr: 0.0,
                                exact: Some(p),
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })??
            } else {
                let dists = dp::convert::<f64>(&ws);
                with_pool(config, || {
                    assignments
                        .par_iter()
                        .map(|a| {
                            let p: f64 = kernel.probability(a.counts(), &dists)?;
                            Ok(Estimate {
                                value: p.clamp(0.0, 1.0),
                                stderr: 0.0,
                                exact: None,
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })??
            };
            (estimates, rational)
        }
        Mode::MonteCarlo { trials, seed } => {
            // Validate once up front so errors do not depend on scheduling.
            Sampler::new(&assignments[0], set, rule, agenda)?;
            let estimates = with_pool(config, || {
                assignments
                    .par_iter()
                    .enumerate()
                    .map(|(k, a)| {
                        let e = monte_carlo_stream(a, set, rule, agenda, trials, seed, k as u64)?;
                        Ok(Estimate {
                            value: e.estimate,
                            stderr: e.stderr,
                            exact: None,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })??;
            (estimates, false)
        }
    };

    let better = |a: &Estimate, b: &Estimate, greater: bool| match (&a.exact, &b.exact) {
        (Some(x), Some(y)) => {
            if greater {
                x > y
            } else {
                x < y
            }
        }
        _ => {
            if greater {
                a.value > b.value
            } else {
                a.value < b.value
            }
        }
    };
    let (mut hi, mut lo) = (0, 0);
    for k in 1..estimates.len() {
        if better(&estimates[k], &estimates[hi], true) {
            hi = k;
        }
        if better(&estimates[k], &estimates[lo], false) {
            lo = k;
        }
    }
    Ok(Extremes {
        n,
        max: estimates[hi].clone(),
        max_witness: assignments[hi].clone(),
        min: estimates[lo].clone(),
        min_witness: assignments[lo].clone(),
        mode: config.mode,
        rational,
        assignments: assignments.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FractionalVote;
    use crate::scalar::rat;

    fn vote(ws: &[(i64, i64)]) -> FractionalVote {
        FractionalVote::new(ws.iter().map(|&(a, b)| rat(a, b)).collect()).unwrap()
    }

    fn and_rule() -> (QuotaRule, Agenda) {
        (
            QuotaRule::uniform(rat(1, 2), vec![true, true, false]).unwrap(),
            Agenda::conjunction(2).unwrap(),
        )
    }

    #[test]
    fn single_member_extremes_coincide() {
        let (rule, agenda) = and_rule();
        let set = DistributionSet::new(vec![FractionalVote::uniform(4)]).unwrap();
        let e = smoothed_extremes(&set, 2, &rule, &agenda, &ExtremesConfig::exact(Precision::Rational)).unwrap();
        assert_eq!(e.max.exact, Some(rat(1, 2)));
        assert_eq!(e.max, e.min);
        assert_eq!(e.assignments, 1);
    }

    #[test]
    fn rational_and_float_agree() {
        let (rule, agenda) = and_rule();
        let set = DistributionSet::new(vec![vote(&[(1, 4); 4]), vote(&[(1, 25), (8, 25), (8, 25), (8, 25)])]).unwrap();
        for n in 1..=8 {
            let r = smoothed_extremes(&set, n, &rule, &agenda, &ExtremesConfig::exact(Precision::Rational)).unwrap();
            let f = smoothed_extremes(&set, n, &rule, &agenda, &ExtremesConfig::exact(Precision::Float)).unwrap();
            assert!(r.rational && !f.rational);
            assert!((r.max.value - f.max.value).abs() < 1e-14);
            assert!((r.min.value - f.min.value).abs() < 1e-14);
            assert!(r.min.value <= r.max.value);
        }
    }

    #[test]
    fn auto_precision_switches_on_denominator_size() {
        let (rule, agenda) = and_rule();
        let set = DistributionSet::new(vec![vote(&[(1, 4); 4])]).unwrap();
        assert_eq!(denominator_bits(&set, 10), 20);
        let cfg = ExtremesConfig::exact(Precision::Auto { max_denominator_bits: 20 });
        assert!(smoothed_extremes(&set, 10, &rule, &agenda, &cfg).unwrap().rational);
        assert!(!smoothed_extremes(&set, 11, &rule, &agenda, &cfg).unwrap().rational);
    }

    #[test]
    fn budgets_raise_resource_errors() {
        let (rule, agenda) = and_rule();
        let set = DistributionSet::new(vec![vote(&[(1, 4); 4]), vote(&[(1, 10), (1, 10), (1, 10), (7, 10)])]).unwrap();
        let cfg = ExtremesConfig {
            budget_assignments: 10,
            ..Default::default()
        };
        assert!(matches!(smoothed_extremes(&set, 20, &rule, &agenda, &cfg), Err(Error::Resource { required: 21, .. })));
        let cfg = ExtremesConfig {
            budget_states: 100,
            ..Default::default()
        };
        assert!(matches!(smoothed_extremes(&set, 20, &rule, &agenda, &cfg), Err(Error::Resource { .. })));
    }

    #[test]
    fn monte_carlo_is_reproducible_across_pools() {
        let (rule, agenda) = and_rule();
        let set = DistributionSet::new(vec![vote(&[(1, 4); 4]), vote(&[(1, 25), (8, 25), (8, 25), (8, 25)])]).unwrap();
        let mut one = ExtremesConfig::monte_carlo(2000, 9);
        one.threads = Some(1);
        let mut two = one.clone();
        two.threads = Some(2);
        let a = smoothed_extremes(&set, 6, &rule, &agenda, &one).unwrap();
        let b = smoothed_extremes(&set, 6, &rule, &agenda, &two).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mode.label(), "mc");
    }
}
