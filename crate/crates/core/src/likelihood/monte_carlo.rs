//! Sampled paradox frequencies.
//!
//! Streams are split from one master seed: assignment `k` of a sweep uses
//! `ChaCha8Rng::seed_from_u64(seed)` moved to stream `k`. Each trial draws the
//! histogram of every agent group directly, as a chain of conditional binomials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::{check_assignment, Assignment};
use crate::aggregation::IntegerQuota;
use crate::conditions::DistributionSet;
use crate::error::{Error, Result};
use crate::model::{Agenda, QuotaRule};
use crate::scalar::rational_to_f64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub hits: u64,
    pub trials: u64,
}

impl McEstimate {
    fn new(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        McEstimate {
            estimate: p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
            hits,
            trials,
        }
    }
}

/// The generator for stream `stream` of master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Conditional split probabilities `pi_w / (pi_w + ... + pi_{m-1})`.
fn chain(pi: &[f64]) -> Vec<f64> {
    let mut rest: f64 = pi.iter().sum();
    pi.iter()
        .map(|&p| {
            let c = if rest > 0.0 { (p / rest).clamp(0.0, 1.0) } else { 0.0 };
            rest -= p;
            c
        })
        .collect()
}

pub(crate) struct Sampler<'a> {
    chains: Vec<Vec<f64>>,
    counts: &'a [u64],
    quota: IntegerQuota,
    agenda: &'a Agenda,
    accept: Vec<Vec<bool>>,
}

impl<'a> Sampler<'a> {
    pub(crate) fn new(assignment: &'a Assignment, set: &DistributionSet, rule: &QuotaRule, agenda: &'a Agenda) -> Result<Self> {
        check_assignment(assignment, set)?;
        rule.check_agenda(agenda)?;
        if set.judgements() != agenda.judgements() {
            return Err(Error::dimension("distribution", agenda.judgements(), set.judgements()));
        }
        let chains = set
            .members()
            .iter()
            .map(|pi| chain(&pi.weights().iter().map(rational_to_f64).collect::<Vec<_>>()))
            .collect();
        let accept = (0..agenda.judgements())
            .map(|w| (0..agenda.propositions()).map(|i| agenda.accepts(w, i)).collect())
            .collect();
        Ok(Sampler {
            chains,
            counts: assignment.counts(),
            quota: IntegerQuota::new(rule, assignment.n()),
            agenda,
            accept,
        })
    }

    fn trial(&self, rng: &mut impl Rng, hist: &mut [u64], tallies: &mut [u64]) -> Result<bool> {
        hist.iter_mut().for_each(|v| *v = 0);
        for (chain, &c) in self.chains.iter().zip(self.counts) {
            let mut left = c;
            for (w, &p) in chain.iter().enumerate() {
                if left == 0 {
                    break;
                }
                let k = if w + 1 == chain.len() || p >= 1.0 {
                    left
                } else if p <= 0.0 {
                    0
                } else {
                    Binomial::new(left, p)
                        .map_err(|e| Error::invalid("binomial", e.to_string()))?
                        .sample(rng)
                };
                hist[w] += k;
                left -= k;
            }
        }
        tallies.iter_mut().for_each(|v| *v = 0);
        for (w, &c) in hist.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (t, &a) in tallies.iter_mut().zip(&self.accept[w]) {
                if a {
                    *t += c;
                }
            }
        }
        let p = self.agenda.premises();
        let premises: Vec<bool> = (0..p).map(|i| self.quota.verdict(i, tallies[i])).collect();
        Ok(self.agenda.evaluate(&premises) != self.quota.verdict(p, tallies[p]))
    }

    pub(crate) fn run(&self, trials: u64, rng: &mut impl Rng) -> Result<McEstimate> {
        if trials == 0 {
            return Err(Error::invalid("trials", "at least one trial is required"));
        }
        let mut hist = vec![0u64; self.agenda.judgements()];
        let mut tallies = vec![0u64; self.agenda.propositions()];
        let mut hits = 0;
        for _ in 0..trials {
            if self.trial(rng, &mut hist, &mut tallies)? {
                hits += 1;
            }
        }
        Ok(McEstimate::new(hits, trials))
    }
}

/// Paradox frequency over `trials` sampled profiles, on stream 0 of `seed`.
pub fn monte_carlo_estimate(
    assignment: &Assignment,
    set: &DistributionSet,
    rule: &QuotaRule,
    agenda: &Agenda,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    monte_carlo_stream(assignment, set, rule, agenda, trials, seed, 0)
}

pub fn monte_carlo_stream(
    assignment: &Assignment,
    set: &DistributionSet,
    rule: &QuotaRule,
    agenda: &Agenda,
    trials: u64,
    seed: u64,
    stream: u64,
) -> Result<McEstimate> {
    Sampler::new(assignment, set, rule, agenda)?.run(trials, &mut stream_rng(seed, stream))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FractionalVote;
    use crate::scalar::rat;

    fn and_rule() -> (QuotaRule, Agenda) {
        (
            QuotaRule::uniform(rat(1, 2), vec![true, true, false]).unwrap(),
            Agenda::conjunction(2).unwrap(),
        )
    }

    #[test]
    fn uniform_pair_within_three_sigma() {
        let (rule, agenda) = and_rule();
        let set = DistributionSet::new(vec![FractionalVote::uniform(4)]).unwrap();
        let a = Assignment::new(vec![2]).unwrap();
        let est = monte_carlo_estimate(&a, &set, &rule, &agenda, 200_000, 7).unwrap();
        assert!((est.estimate - 0.5).abs() <= 3.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn degenerate_distribution_is_deterministic() {
        let (rule, agenda) = and_rule();
        let set = DistributionSet::new(vec![FractionalVote::vote(4, 3), FractionalVote::vote(4, 1)]).unwrap();
        // Votes (1,1) and (0,1): premise one and the conclusion tie whenever the groups are equal.
        for (counts, expected) in [(vec![3, 0], 0.0), (vec![0, 3], 0.0), (vec![1, 1], 1.0), (vec![2, 2], 1.0)] {
            let a = Assignment::new(counts).unwrap();
            let est = monte_carlo_estimate(&a, &set, &rule, &agenda, 50, 1).unwrap();
            assert_eq!(est.estimate, expected);
            assert_eq!(est.stderr, 0.0);
        }
    }

    #[test]
    fn single_trial_is_zero_or_one() {
        let (rule, agenda) = and_rule();
        let set = DistributionSet::new(vec![FractionalVote::uniform(4)]).unwrap();
        let a = Assignment::new(vec![6]).unwrap();
        for seed in 0..20 {
            let est = monte_carlo_estimate(&a, &set, &rule, &agenda, 1, seed).unwrap();
            assert!(est.estimate == 0.0 || est.estimate == 1.0);
        }
        assert!(monte_carlo_estimate(&a, &set, &rule, &agenda, 0, 0).is_err());
    }

    #[test]
    fn seeds_reproduce_and_streams_differ() {
        let (rule, agenda) = and_rule();
        let set = DistributionSet::new(vec![FractionalVote::uniform(4)]).unwrap();
        let a = Assignment::new(vec![10]).unwrap();
        let x = monte_carlo_stream(&a, &set, &rule, &agenda, 5000, 42, 3).unwrap();
        let y = monte_carlo_stream(&a, &set, &rule, &agenda, 5000, 42, 3).unwrap();
        let z = monte_carlo_stream(&a, &set, &rule, &agenda, 5000, 42, 4).unwrap();
        assert_eq!(x.estimate.to_bits(), y.estimate.to_bits());
        assert_ne!(x.hits, z.hits);
    }
}
