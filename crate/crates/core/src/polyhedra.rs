//! Polyhedral description of the paradox region.
//!
//! For proposition `i`, the characteristic vector `c_i` has entry `q_i - 1` at
//! judgements accepting `i` and `q_i` elsewhere, so `c_i . h = q_i n - n_i`
//! for a histogram `h` of total weight `n`. An outcome `alpha` is then the set
//! `{x : A_alpha x <= b_alpha}` with one row per proposition.
//!
//! The offsets `b_alpha` encode a strict `n_i > q_i n` as `n_i >= q_i n + 1`,
//! which matches the quota rule on integer histograms only when `q_i n` is an
//! integer. [`build_integer_polyhedron`] gives the exact offsets for a fixed `n`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::aggregation::{is_consistent, IntegerQuota, OutcomeVector};
use crate::conditions::{check_kappa4, outcome_feasible};
use crate::error::{Error, Result};
use crate::model::{Agenda, FractionalVote, Histogram, QuotaRule};
use crate::scalar::{format_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacteristicVector {
    proposition: usize,
    entries: Vec<Rational>,
}

impl CharacteristicVector {
    pub fn proposition(&self) -> usize {
        self.proposition
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn dot(&self, x: &[Rational]) -> Rational {
        dot(&self.entries, x)
    }
}

fn dot(a: &[Rational], x: &[Rational]) -> Rational {
    a.iter().zip(x).filter(|(_, v)| !v.is_zero()).map(|(a, v)| a * v).sum()
}

pub fn characteristic_vector(proposition: usize, rule: &QuotaRule, agenda: &Agenda) -> Result<CharacteristicVector> {
    rule.check_agenda(agenda)?;
    agenda.check_proposition(proposition)?;
    let q = rule.threshold(proposition);
    let below = q - Rational::one();
    let entries = (0..agenda.judgements())
        .map(|w| {
            if agenda.accepts(w, proposition) {
                below.clone()
            } else {
                q.clone()
            }
        })
        .collect();
    Ok(CharacteristicVector {
        proposition,
        entries,
    })
}

/// `H_alpha = {x : A x <= b}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polyhedron {
    alpha: OutcomeVector,
    rows: Vec<Vec<Rational>>,
    offsets: Vec<Rational>,
}

impl Polyhedron {
    pub fn alpha(&self) -> &OutcomeVector {
        &self.alpha
    }

    /// Rows of `A`.
    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    /// Entries of `b`.
    pub fn offsets(&self) -> &[Rational] {
        &self.offsets
    }

    pub fn dimension(&self) -> usize {
        self.rows[0].len()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dimension() {
            return Err(Error::dimension("point", self.dimension(), len));
        }
        Ok(())
    }

    /// `A h <= b`.
    pub fn contains(&self, h: &[Rational]) -> Result<bool> {
        self.check_len(h.len())?;
        Ok(self.rows.iter().zip(&self.offsets).all(|(row, b)| dot(row, h) <= *b))
    }

    pub fn in_polyhedron(&self, h: &Histogram) -> Result<bool> {
        self.contains(h.weights())
    }

    /// `A x <= 0`, membership in the characteristic cone.
    pub fn in_cone(&self, x: &[Rational]) -> Result<bool> {
        self.check_len(x.len())?;
        Ok(self.rows.iter().all(|row| !dot(row, x).is_positive()))
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "H{}:", self.alpha)?;
        for (row, b) in self.rows.iter().zip(&self.offsets) {
            let cells: Vec<String> = row.iter().map(format_rational).collect();
            writeln!(f, "  [{}] <= {}", cells.join(", "), format_rational(b))?;
        }
        Ok(())
    }
}

/// Row `i` is `sign(alpha_i) c_i` and offset `sign(alpha_i) d_i - [alpha_i = 1]`,
/// where `sign(1) = 1` and `sign(0) = -1`.
pub fn build_polyhedron(alpha: &OutcomeVector, rule: &QuotaRule, agenda: &Agenda) -> Result<Polyhedron> {
    rule.check_agenda(agenda)?;
    alpha.check_agenda(agenda)?;
    let mut rows = Vec::with_capacity(agenda.propositions());
    let mut offsets = Vec::with_capacity(agenda.propositions());
    for i in 0..agenda.propositions() {
        let c = characteristic_vector(i, rule, agenda)?;
        let d = if rule.breaking(i) { Rational::one() } else { Rational::zero() };
        if alpha.get(i) {
            rows.push(c.entries);
            offsets.push(d - Rational::one());
        } else {
            rows.push(c.entries.into_iter().map(|v| -v).collect());
            offsets.push(-d);
        }
    }
    Ok(Polyhedron {
        alpha: alpha.clone(),
        rows,
        offsets,
    })
}

/// `H_alpha` with offsets tightened for integer histograms of total `n`.
///
/// The rows match [`build_polyhedron`]. Offset `i` becomes `q_i n - lo_i` when
/// `alpha_i = 1` and `hi_i - q_i n` otherwise, where `[lo_i, hi_i]` is the tally
/// range giving verdict `alpha_i`. For histograms summing to `n`, membership then
/// holds exactly when the quota rule outputs `alpha`, whether or not `q_i n` is an integer.
pub fn build_integer_polyhedron(alpha: &OutcomeVector, rule: &QuotaRule, agenda: &Agenda, n: u64) -> Result<Polyhedron> {
    let mut poly = build_polyhedron(alpha, rule, agenda)?;
    let quota = IntegerQuota::new(rule, n);
    let total = Rational::from_integer(n.into());
    for (i, b) in poly.offsets.iter_mut().enumerate() {
        let bar = rule.threshold(i) * &total;
        let (lo, hi) = quota.tally_range(i, alpha.get(i));
        *b = if alpha.get(i) {
            bar - Rational::from_integer(lo.into())
        } else {
            Rational::from_integer(hi.into()) - bar
        };
    }
    Ok(poly)
}

/// The polyhedra of every inconsistent outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParadoxRegion {
    polyhedra: Vec<Polyhedron>,
}

impl ParadoxRegion {
    pub fn new(rule: &QuotaRule, agenda: &Agenda) -> Result<Self> {
        rule.check_agenda(agenda)?;
        let polyhedra = OutcomeVector::all(agenda.propositions())
            .filter(|alpha| !is_consistent(alpha, agenda))
            .map(|alpha| build_polyhedron(&alpha, rule, agenda))
            .collect::<Result<Vec<_>>>()?;
        Ok(ParadoxRegion { polyhedra })
    }

    pub fn polyhedra(&self) -> &[Polyhedron] {
        &self.polyhedra
    }

    pub fn len(&self) -> usize {
        self.polyhedra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polyhedra.is_empty()
    }

    /// Whether `h` lies in some paradox polyhedron.
    pub fn contains(&self, h: &Histogram) -> Result<bool> {
        for poly in &self.polyhedra {
            if poly.in_polyhedron(h)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Dimension of the characteristic cone of a paradox polyhedron: `m - 1` when
/// the conclusion mirrors a single premise with matching threshold, `m` otherwise.
pub fn cone_dimension(poly: &Polyhedron, rule: &QuotaRule, agenda: &Agenda) -> Result<usize> {
    poly.check_len(agenda.judgements())?;
    if is_consistent(poly.alpha(), agenda) {
        return Err(Error::Precondition(format!(
            "cone dimension is only characterised for inconsistent outcomes, got {}",
            poly.alpha()
        )));
    }
    let m = agenda.judgements();
    Ok(if check_kappa4(rule, agenda)? { m - 1 } else { m })
}

/// Active dimension of a polyhedron for a distribution at `n` agents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActiveDimension {
    Active(usize),
    /// The `-infinity` case: `pi` is outside the cone, or no `n`-vote histogram reaches the polyhedron.
    Inactive,
}

pub fn active_dimension(
    pi: &FractionalVote,
    poly: &Polyhedron,
    n: u64,
    rule: &QuotaRule,
    agenda: &Agenda,
) -> Result<ActiveDimension> {
    if !poly.in_cone(pi.weights())? {
        return Ok(ActiveDimension::Inactive);
    }
    if !outcome_feasible(poly.alpha(), n, rule, agenda)? {
        return Ok(ActiveDimension::Inactive);
    }
    Ok(ActiveDimension::Active(cone_dimension(poly, rule, agenda)?))
}

/// Rank of a rational matrix by fraction-free (Bareiss) elimination.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|row| {
            let lcm = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            row.iter().map(|v| v.numer() * (&lcm / v.denom())).collect()
        })
        .collect();
    let Some(cols) = m.first().map(Vec::len) else {
        return 0;
    };
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            for j in c + 1..cols {
                let v = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                debug_assert!((&v % &prev).is_zero());
                m[i][j] = v / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
    }
    r
}
