//! Exact law of the vote histogram by repeated convolution.
//!
//! After `k` agents the histogram is determined by the counts of judgements
//! `1..m`, since judgement `0` takes the remaining `k - sum`. Those reduced
//! vectors live in the simplex lattice `{x in N^(m-1) : sum x <= n}`, which is
//! ranked by total and then lexicographically. Adding one agent with vote
//! distribution `pi` maps `P(x)` to `pi_0 P(x) + sum_j pi_j P(x - e_j)`, and
//! since `x - e_j` always ranks below `x` the update runs in place from the top.

use std::sync::Arc;

use crate::aggregation::IntegerQuota;
use crate::error::{Error, Result};
use crate::model::{Agenda, QuotaRule};
use crate::scalar::{Probability, Rational};

const NO_STATE: u32 = u32::MAX;

/// `C(a + b, b)` for the lattice sizes in use, saturating at `u128::MAX`.
pub fn lattice_size(n: u64, m: usize) -> u128 {
    let d = m.saturating_sub(1) as u128;
    let mut acc: u128 = 1;
    for i in 1..=d {
        // acc = C(n + i, i), exact at every step.
        acc = match acc.checked_mul(n as u128 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// Ranked histogram states for up to `n` agents over `m` judgements.
#[derive(Debug)]
pub struct SimplexLattice {
    n: u64,
    m: usize,
    /// Reduced coordinates, `m - 1` per state, in rank order.
    coords: Vec<u32>,
    /// `pred[r * (m - 1) + j]` is the rank of `x_r - e_j`, or `NO_STATE`.
    pred: Vec<u32>,
    /// `level_end[s]` is the number of states with total at most `s`.
    level_end: Vec<usize>,
}

impl SimplexLattice {
    pub fn new(n: u64, m: usize, budget_states: u128) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid("lattice", "at least two judgements are required"));
        }
        let size = lattice_size(n, m);
        if size > budget_states || size >= NO_STATE as u128 {
            return Err(Error::Resource {
                what: "histogram states",
                required: size,
                cap: budget_states.min(NO_STATE as u128 - 1),
            });
        }
        let d = m - 1;
        let size = size as usize;
        let mut coords = Vec::with_capacity(size * d);
        let mut level_end = Vec::with_capacity(n as usize + 1);
        let mut x = vec![0u32; d];
        for s in 0..=n as u32 {
            // First vector of total s in lex order: everything on the last coordinate.
            x.iter_mut().for_each(|v| *v = 0);
            x[d - 1] = s;
            loop {
                coords.extend_from_slice(&x);
                if !next_composition(&mut x) {
                    break;
                }
            }
            level_end.push(coords.len() / d);
        }
        debug_assert_eq!(coords.len(), size * d);

        let binom = Binomials::new(n as usize + d, d);
        let mut pred = vec![NO_STATE; size * d];
        let mut y = vec![0u32; d];
        for r in 0..size {
            let x = &coords[r * d..(r + 1) * d];
            for j in 0..d {
                if x[j] == 0 {
                    continue;
                }
                y.copy_from_slice(x);
                y[j] -= 1;
                pred[r * d + j] = binom.rank(&y) as u32;
            }
        }
        Ok(SimplexLattice {
            n,
            m,
            coords,
            pred,
            level_end,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn judgements(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.level_end[self.n as usize]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Reduced coordinates of the state at `rank`.
    pub fn reduced(&self, rank: usize) -> &[u32] {
        let d = self.m - 1;
        &self.coords[rank * d..(rank + 1) * d]
    }

    /// Full judgement counts of the state at `rank` once `agents` votes are in.
    pub fn counts(&self, rank: usize, agents: u64) -> Vec<u64> {
        let x = self.reduced(rank);
        let rest: u64 = x.iter().map(|&v| u64::from(v)).sum();
        let mut out = Vec::with_capacity(self.m);
        out.push(agents - rest);
        out.extend(x.iter().map(|&v| u64::from(v)));
        out
    }

    /// Number of states reachable by `agents` votes.
    pub fn reachable(&self, agents: u64) -> usize {
        self.level_end[agents.min(self.n) as usize]
    }

    /// Rank of the reduced vector `x`, or `None` outside the lattice.
    pub fn rank_of(&self, x: &[u32]) -> Option<usize> {
        let total: u64 = x.iter().map(|&v| u64::from(v)).sum();
        if x.len() != self.m - 1 || total > self.n {
            return None;
        }
        Some(Binomials::new(self.n as usize + self.m - 1, self.m - 1).rank(x))
    }
}

/// Advances `x` to the next vector with the same total in lex order.
fn next_composition(x: &mut [u32]) -> bool {
    let d = x.len();
    // Find the rightmost position before the last with a non-zero suffix to borrow from.
    let mut tail: u32 = x[d - 1];
    for i in (0..d - 1).rev() {
        if tail > 0 {
            x[i] += 1;
            tail -= 1;
            for v in &mut x[i + 1..] {
                *v = 0;
            }
            x[d - 1] = tail;
            return true;
        }
        tail += x[i];
    }
    false
}

struct Binomials {
    table: Vec<Vec<u128>>,
}

impl Binomials {
    fn new(top: usize, k: usize) -> Self {
        let mut table = vec![vec![0u128; k + 1]; top + 1];
        for a in 0..=top {
            table[a][0] = 1;
            for b in 1..=k.min(a) {
                table[a][b] = table[a - 1][b - 1] + if b < a { table[a - 1][b] } else { 0 };
            }
        }
        Binomials { table }
    }

    fn c(&self, a: usize, b: usize) -> u128 {
        if b > a {
            0
        } else {
            self.table[a][b]
        }
    }

    /// Graded lex rank of `x`.
    fn rank(&self, x: &[u32]) -> usize {
        let d = x.len();
        let s: usize = x.iter().map(|&v| v as usize).sum();
        // Vectors with a smaller total.
        let mut r = if s == 0 { 0 } else { self.c(s - 1 + d, d) };
        let mut rest = s;
        for (i, &xi) in x.iter().enumerate() {
            let dd = d - i - 1;
            let xi = xi as usize;
            // Vectors of length dd with total <= rest, minus those with total <= rest - xi.
            r += self.c(rest + dd, dd) - self.c(rest - xi + dd, dd);
            rest -= xi;
        }
        r as usize
    }
}

/// Probability of each histogram after some number of agents.
#[derive(Clone, Debug)]
pub struct HistogramDistribution<T> {
    lattice: Arc<SimplexLattice>,
    agents: u64,
    probs: Vec<T>,
}

impl<T: Probability> HistogramDistribution<T> {
    /// The point mass at the empty histogram.
    pub fn new(lattice: Arc<SimplexLattice>) -> Self {
        let mut probs = vec![T::zero(); lattice.len()];
        probs[0] = T::one();
        HistogramDistribution {
            lattice,
            agents: 0,
            probs,
        }
    }

    pub fn agents(&self) -> u64 {
        self.agents
    }

    pub fn lattice(&self) -> &SimplexLattice {
        &self.lattice
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probs[..self.lattice.reachable(self.agents)]
    }

    /// Probability of the histogram with judgement counts `counts`.
    pub fn probability(&self, counts: &[u64]) -> Option<T> {
        if counts.len() != self.lattice.m || counts.iter().sum::<u64>() != self.agents {
            return None;
        }
        let x: Vec<u32> = counts[1..].iter().map(|&c| c as u32).collect();
        self.lattice.rank_of(&x).map(|r| self.probs[r].clone())
    }

    pub fn total(&self) -> T {
        let mut acc = T::zero();
        for p in self.probabilities() {
            acc += p.clone();
        }
        acc
    }

    /// Adds one agent voting by `pi`.
    pub fn convolve(&mut self, pi: &[T]) -> Result<()> {
        let m = self.lattice.m;
        if pi.len() != m {
            return Err(Error::dimension("vote distribution", m, pi.len()));
        }
        if self.agents >= self.lattice.n {
            return Err(Error::invalid("histogram distribution", "lattice is full"));
        }
        let d = m - 1;
        let top = self.lattice.reachable(self.agents + 1);
        let pred = &self.lattice.pred;
        for r in (0..top).rev() {
            let mut acc = self.probs[r].clone() * pi[0].clone();
            for j in 0..d {
                let q = pred[r * d + j];
                if q != NO_STATE {
                    acc.add_product(&self.probs[q as usize], &pi[j + 1]);
                }
            }
            self.probs[r] = acc;
        }
        self.agents += 1;
        Ok(())
    }

    /// Total probability of the states selected by `mask`.
    pub fn mass(&self, mask: &[bool]) -> T {
        let mut acc = T::zero();
        for (p, _) in self.probabilities().iter().zip(mask).filter(|(_, &hit)| hit) {
            acc += p.clone();
        }
        acc
    }
}

/// Lattice plus the paradox indicator at `n` agents, shared by every assignment.
#[derive(Clone, Debug)]
pub struct ParadoxKernel {
    lattice: Arc<SimplexLattice>,
    mask: Arc<Vec<bool>>,
}

impl ParadoxKernel {
    pub fn new(n: u64, rule: &QuotaRule, agenda: &Agenda, budget_states: u128) -> Result<Self> {
        rule.check_agenda(agenda)?;
        let lattice = Arc::new(SimplexLattice::new(n, agenda.judgements(), budget_states)?);
        let quota = IntegerQuota::new(rule, n);
        let mask = (0..lattice.len())
            .map(|r| quota.is_paradox(&lattice.counts(r, n), agenda))
            .collect();
        Ok(ParadoxKernel {
            lattice,
            mask: Arc::new(mask),
        })
    }

    pub fn n(&self) -> u64 {
        self.lattice.n
    }

    pub fn lattice(&self) -> &Arc<SimplexLattice> {
        &self.lattice
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Paradox probability when agent group `k` has `counts[k]` members voting by `dists[k]`.
    pub fn probability<T: Probability>(&self, counts: &[u64], dists: &[Vec<T>]) -> Result<T> {
        if counts.len() != dists.len() {
            return Err(Error::dimension("assignment", dists.len(), counts.len()));
        }
        let total: u64 = counts.iter().sum();
        if total != self.n() {
            return Err(Error::invalid("assignment", format!("counts sum to {total}, expected {}", self.n())));
        }
        let mut dist = HistogramDistribution::new(self.lattice.clone());
        for (&c, pi) in counts.iter().zip(dists) {
            for _ in 0..c {
                dist.convolve(pi)?;
            }
        }
        Ok(dist.mass(&self.mask))
    }
}

/// Converts rational distributions to the working scalar.
pub fn convert<T: Probability>(dists: &[Vec<Rational>]) -> Vec<Vec<T>> {
    dists.iter().map(|pi| pi.iter().map(T::from_rational).collect()).collect()
}
