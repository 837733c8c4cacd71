#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use paradox_lab::io::{parse_instance, Instance};
use paradox_lab::model::{Agenda, FractionalVote, Histogram, QuotaRule};
use paradox_lab::scalar::{rat, Rational};
use paradox_lab::{apply_quota, is_consistent, DistributionSet};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn load(name: &str) -> Instance {
    parse_instance(data(name)).unwrap().instance
}

/// A random small instance: `p` in 1..=2, grid thresholds, integer-weight members.
#[derive(Clone, Debug)]
pub struct Random {
    pub agenda: Agenda,
    pub rule: QuotaRule,
    pub set: DistributionSet,
}

pub fn random_rule(rng: &mut impl Rng, propositions: usize) -> QuotaRule {
    let thresholds = (0..propositions)
        .map(|_| {
            let den = rng.random_range(2..=6i64);
            rat(rng.random_range(0..=den), den)
        })
        .collect();
    let breakings = (0..propositions).map(|_| rng.random_bool(0.5)).collect();
    QuotaRule::new(thresholds, breakings).unwrap()
}

pub fn random_agenda(rng: &mut impl Rng, p: usize) -> Agenda {
    let table = (0..1usize << p).map(|_| rng.random_bool(0.5)).collect();
    Agenda::new(p, table).unwrap()
}

/// Weights `k_w / sum k` with `k_w` in `lo..=5`.
pub fn random_vote(rng: &mut impl Rng, m: usize, lo: i64) -> FractionalVote {
    let ks: Vec<i64> = (0..m).map(|_| rng.random_range(lo..=5)).collect();
    let total: i64 = ks.iter().sum();
    if total == 0 {
        return FractionalVote::uniform(m);
    }
    FractionalVote::new(ks.iter().map(|&k| rat(k, total)).collect()).unwrap()
}

pub fn random_instance(seed: u64) -> Random {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = rng.random_range(1..=2);
    let agenda = random_agenda(&mut rng, p);
    let rule = random_rule(&mut rng, p + 1);
    let m = 1 << p;
    let l = rng.random_range(1..=2);
    let mut members: Vec<FractionalVote> = Vec::new();
    while members.len() < l {
        let v = random_vote(&mut rng, m, 1);
        if !members.contains(&v) {
            members.push(v);
        }
    }
    Random {
        agenda,
        rule,
        set: DistributionSet::new(members).unwrap(),
    }
}

fn paradox_of_counts(counts: &[u64], rule: &QuotaRule, agenda: &Agenda) -> bool {
    let h = Histogram::from_counts(counts);
    !is_consistent(&apply_quota(&h, rule, agenda).unwrap(), agenda)
}

/// Paradox probability by enumerating every ordered profile; agent `j` draws from `members[j]`.
pub fn brute_force_probability(members: &[&FractionalVote], rule: &QuotaRule, agenda: &Agenda) -> Rational {
    let m = agenda.judgements();
    let mut by_histogram: HashMap<Vec<u64>, Rational> = HashMap::new();
    let mut counts = vec![0u64; m];
    fn walk(
        j: usize,
        members: &[&FractionalVote],
        weight: Rational,
        counts: &mut Vec<u64>,
        out: &mut HashMap<Vec<u64>, Rational>,
    ) {
        if j == members.len() {
            *out.entry(counts.clone()).or_insert_with(Rational::zero) += weight;
            return;
        }
        for (w, pw) in members[j].weights().iter().enumerate() {
            if pw.is_zero() {
                continue;
            }
            counts[w] += 1;
            walk(j + 1, members, &weight * pw, counts, out);
            counts[w] -= 1;
        }
    }
    walk(0, members, Rational::one(), &mut counts, &mut by_histogram);
    by_histogram
        .into_iter()
        .filter(|(c, _)| paradox_of_counts(c, rule, agenda))
        .map(|(_, p)| p)
        .fold(Rational::zero(), |a, b| a + b)
}

/// Whether no `n`-agent profile at all is paradoxical, by enumerating ordered profiles.
pub fn brute_force_kappa1(n: u64, rule: &QuotaRule, agenda: &Agenda) -> bool {
    let m = agenda.judgements();
    let mut counts = vec![0u64; m];
    fn any(j: u64, n: u64, counts: &mut Vec<u64>, rule: &QuotaRule, agenda: &Agenda) -> bool {
        if j == n {
            return paradox_of_counts(counts, rule, agenda);
        }
        for w in 0..counts.len() {
            counts[w] += 1;
            let hit = any(j + 1, n, counts, rule, agenda);
            counts[w] -= 1;
            if hit {
                return true;
            }
        }
        false
    }
    !any(0, n, &mut counts, rule, agenda)
}
