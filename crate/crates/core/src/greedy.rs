//! Greedy Wasserstein minimization on `[0, 1]`.
//!
//! Given points `x_1..x_n`, the next point minimizes
//!
//! ```text
//! F(x) = (n+1) x^2 - x - 2 * sum_k max(x, x_k)
//! ```
//!
//! which differs from `(n+1)^2 W_2^2` of the augmented empirical measure by
//! a constant. `F` is a convex quadratic between consecutive points and can
//! never be minimal at an existing point, so the minimizer is one of the
//! `n+1` candidates `(2m+1)/(2n+2)`.
//!
//! Candidate values are compared through their offsets from the first
//! candidate, `F(c_m) - F(c_0)`, accumulated from increments that each touch
//! only the points between two neighbouring candidates. The increments are
//! `O(1/n)` in size, which keeps float ties detectable at an absolute
//! tolerance long after `F` itself has grown to magnitude `n`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{Rational, Scalar, DEFAULT_TIE_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GreedyError {
    #[error("point {0} lies outside [0, 1]")]
    OutOfDomain(String),
    #[error("chosen candidate {0} coincides with an existing point")]
    NoveltyViolation(String),
}

/// Which candidate wins when several attain the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TieRule {
    #[default]
    Smallest,
    Largest,
}

impl std::fmt::Display for TieRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TieRule::Smallest => "smallest",
            TieRule::Largest => "largest",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyOptions {
    pub tie_rule: TieRule,
    /// Absolute tie tolerance, used by the float backend only.
    pub tolerance: f64,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        Self {
            tie_rule: TieRule::Smallest,
            tolerance: DEFAULT_TIE_TOLERANCE,
        }
    }
}

impl GreedyOptions {
    pub fn with_tie_rule(tie_rule: TieRule) -> Self {
        Self {
            tie_rule,
            ..Self::default()
        }
    }
}

/// How a point entered the sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    /// Initial configuration. `exact` is the exact value when one is known.
    Seed { exact: Option<Rational> },
    /// Added greedily at step `n`, as `raw_numerator / raw_denominator` with
    /// `raw_denominator = 2n` and an odd numerator (unreduced).
    Greedy {
        raw_numerator: u64,
        raw_denominator: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry<S> {
    /// 1-based position in append order.
    pub step: usize,
    pub value: S,
    pub origin: Origin,
}

impl<S: Scalar> Entry<S> {
    /// Exact value if known: the raw greedy form, or the seed's exact value.
    pub fn exact(&self) -> Option<Rational> {
        match &self.origin {
            Origin::Seed { exact } => exact.clone(),
            Origin::Greedy {
                raw_numerator,
                raw_denominator,
            } => Rational::from_parts(*raw_numerator, *raw_denominator).ok(),
        }
    }

    pub fn raw_form(&self) -> Option<(u64, u64)> {
        match &self.origin {
            Origin::Greedy {
                raw_numerator,
                raw_denominator,
            } => Some((*raw_numerator, *raw_denominator)),
            Origin::Seed { exact: Some(r) } => {
                use num_traits::ToPrimitive;
                Some((r.numer().to_u64()?, r.denom().to_u64()?))
            }
            Origin::Seed { exact: None } => None,
        }
    }
}

/// A greedily chosen point: candidate `m` of step `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyPoint {
    pub step: usize,
    pub m: usize,
    pub raw_numerator: u64,
    pub raw_denominator: u64,
}

impl GreedyPoint {
    fn new(n_before: usize, m: usize) -> Self {
        Self {
            step: n_before + 1,
            m,
            raw_numerator: 2 * m as u64 + 1,
            raw_denominator: 2 * (n_before as u64 + 1),
        }
    }

    pub fn reduced(&self) -> Rational {
        Rational::from_parts(self.raw_numerator, self.raw_denominator)
            .expect("raw denominator is positive")
    }

    pub fn raw_string(&self) -> String {
        format!("{}/{}", self.raw_numerator, self.raw_denominator)
    }
}

/// Candidate `(2m+1)/(2n+2)` paired with the value of `F` there.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEvaluation<S> {
    pub m: usize,
    pub value: Rational,
    pub f_value: S,
}

/// The multiset being grown, kept sorted with cached suffix sums.
#[derive(Debug, Clone)]
pub struct SequenceState<S: Scalar> {
    points: Vec<S>,
    /// `suffix_sums[i] = points[i] + ... + points[n-1]`; `suffix_sums[n] = 0`.
    suffix_sums: Vec<S>,
    history: Vec<Entry<S>>,
}

impl<S: Scalar> Default for SequenceState<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> SequenceState<S> {
    pub fn new() -> Self {
        Self {
            points: Vec::new(),
            suffix_sums: vec![S::zero()],
            history: Vec::new(),
        }
    }

    pub fn from_seeds(seeds: impl IntoIterator<Item = S>) -> Result<Self, GreedyError> {
        let mut state = Self::new();
        for s in seeds {
            state.push_seed(s)?;
        }
        Ok(state)
    }

    pub fn push_seed(&mut self, value: S) -> Result<(), GreedyError> {
        let exact = match S::BACKEND {
            crate::numeric::Backend::Rational => value.to_rational(),
            crate::numeric::Backend::Float => None,
        };
        self.push_seed_with_exact(value, exact)
    }

    /// Adds a seed, recording its exact value for dumps (used by the float
    /// backend when the seed came from an exact literal).
    pub fn push_seed_with_exact(&mut self, value: S, exact: Option<Rational>) -> Result<(), GreedyError> {
        check_unit(&value)?;
        self.insert_sorted(value.clone());
        self.history.push(Entry {
            step: self.history.len() + 1,
            value,
            origin: Origin::Seed { exact },
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points in ascending order.
    pub fn points(&self) -> &[S] {
        &self.points
    }

    pub fn suffix_sum(&self, i: usize) -> &S {
        &self.suffix_sums[i]
    }

    /// Every point in the order it was added.
    pub fn history(&self) -> &[Entry<S>] {
        &self.history
    }

    /// Number of points strictly below `x`.
    pub fn count_below(&self, x: &S) -> usize {
        self.points.partition_point(|p| p.scalar_cmp(x) == Ordering::Less)
    }

    pub fn contains(&self, x: &S) -> bool {
        let i = self.count_below(x);
        i < self.points.len() && self.points[i].scalar_cmp(x) == Ordering::Equal
    }

    fn insert_sorted(&mut self, x: S) {
        let pos = self.points.partition_point(|p| p.scalar_cmp(&x) != Ordering::Greater);
        self.points.insert(pos, x.clone());
        let tail = self.suffix_sums[pos].clone();
        self.suffix_sums.insert(pos, tail);
        for s in &mut self.suffix_sums[..=pos] {
            *s = s.clone() + x.clone();
        }
    }

    /// `F(x) = (n+1)x^2 - x - 2[x * #{x_k < x} + sum_{x_k >= x} x_k]`.
    pub fn kritzinger_f(&self, x: &S) -> Result<S, GreedyError> {
        check_unit(x)?;
        let n = self.points.len();
        let below = self.count_below(x);
        let quad = S::from_int(n as i64 + 1) * x.square() - x.clone();
        let linear = x.clone() * S::from_int(below as i64) + self.suffix_sums[below].clone();
        Ok(quad - S::from_int(2) * linear)
    }

    /// `F(c_m) - F(c_0)` for every candidate, in one merge sweep.
    fn candidate_offsets(&self) -> Vec<S> {
        let n = self.points.len();
        let n1 = n as u64 + 1;
        let den = 2 * n1;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = S::zero();
        offsets.push(acc.clone());

        let mut p = 0usize;
        let first = S::from_ratio(1, den);
        while p < n && self.points[p].scalar_cmp(&first) != Ordering::Greater {
            p += 1;
        }
        for i in 0..n {
            // p = #{x_k <= c_i}
            let at_or_below = p as i64;
            let next = S::from_ratio(2 * i as i64 + 3, den);
            let mut between = S::zero();
            while p < n && self.points[p].scalar_cmp(&next) == Ordering::Less {
                between = between + (next.clone() - self.points[p].clone());
                p += 1;
            }
            while p < n && self.points[p].scalar_cmp(&next) == Ordering::Equal {
                p += 1;
            }
            let step = S::from_ratio(2 * i as i64 + 1 - 2 * at_or_below, n1) - S::from_int(2) * between;
            acc = acc + step;
            offsets.push(acc.clone());
        }
        offsets
    }

    pub fn enumerate_candidates(&self) -> Vec<CandidateEvaluation<S>> {
        let n = self.points.len() as u64;
        let base = self
            .kritzinger_f(&S::from_ratio(1, 2 * n + 2))
            .expect("candidates lie in (0, 1)");
        self.candidate_offsets()
            .into_iter()
            .enumerate()
            .map(|(m, off)| CandidateEvaluation {
                m,
                value: Rational::from_parts(2 * m as i64 + 1, 2 * n + 2).expect("positive"),
                f_value: base.clone() + off,
            })
            .collect()
    }

    /// Index `m` of the candidate `next_point` would pick, without mutating.
    pub fn select_candidate(&self, opts: &GreedyOptions) -> usize {
        select(&self.candidate_offsets(), opts)
    }

    /// Appends the minimizer of `F` and returns it.
    pub fn next_point(&mut self, opts: &GreedyOptions) -> Result<GreedyPoint, GreedyError> {
        let m = self.select_candidate(opts);
        self.append_candidate(m)
    }

    /// `E(z) = -2 int_0^z g_n(x) x dx + 2 int_z^1 g_n(x)(1-x) dx`, evaluated
    /// in closed form from the step structure of the counting function.
    pub fn e_functional(&self, z: &S) -> Result<S, GreedyError> {
        check_unit(z)?;
        let n = S::from_int(self.points.len() as i64);
        let one = S::one();
        let mut left = S::zero();
        let mut right = S::zero();
        for x in &self.points {
            if x.scalar_cmp(z) != Ordering::Greater {
                // int_0^z 1{x_k <= t} t dt
                left = left + (z.square() - x.square());
                right = right + (one.clone() - z.clone()).square();
            } else {
                right = right + (one.clone() - x.clone()).square();
            }
        }
        // -2 * [sum (z^2 - x_k^2)/2 - n z^3/3] + 2 * [sum (1 - max)^2/2 - n(1/6 - z^2/2 + z^3/3)]
        let two_thirds = S::from_ratio(2, 3);
        let cubic = n.clone() * z.cube();
        let e = -left + two_thirds.clone() * cubic.clone() + right
            - n.clone() * S::from_ratio(1, 3)
            + n * z.square()
            - two_thirds * cubic;
        Ok(e)
    }

    /// `E(c_m) + (c_m^3 + (1 - c_m)^3) / 3` for every candidate.
    pub fn e_objectives(&self) -> Vec<S> {
        let n = self.points.len();
        let den = 2 * (n as u64 + 1);
        let one = S::one();
        let n_s = S::from_int(n as i64);
        let third = S::from_ratio(1, 3);
        let total_right: S = self
            .points
            .iter()
            .fold(S::zero(), |acc, x| acc + (one.clone() - x.clone()).square());

        let mut p = 0usize;
        let mut sq_le = S::zero();
        let mut right_le = S::zero();
        (0..=n)
            .map(|m| {
                let z = S::from_ratio(2 * m as i64 + 1, den);
                while p < n && self.points[p].scalar_cmp(&z) != Ordering::Greater {
                    sq_le = sq_le.clone() + self.points[p].square();
                    right_le = right_le.clone() + (one.clone() - self.points[p].clone()).square();
                    p += 1;
                }
                let cnt = S::from_int(p as i64);
                let w = one.clone() - z.clone();
                let e = -(cnt.clone() * z.square() - sq_le.clone())
                    + cnt * w.square()
                    + total_right.clone()
                    - right_le.clone()
                    - n_s.clone() * third.clone()
                    + n_s.clone() * z.square();
                e + (z.cube() + w.cube()) * third.clone()
            })
            .collect()
    }

    pub fn select_candidate_via_e(&self, opts: &GreedyOptions) -> usize {
        select(&self.e_objectives(), opts)
    }

    /// Same contract as [`next_point`](Self::next_point), minimizing
    /// `E(z) + (z^3 + (1-z)^3)/3` instead of `F`.
    pub fn next_point_via_e(&mut self, opts: &GreedyOptions) -> Result<GreedyPoint, GreedyError> {
        let m = self.select_candidate_via_e(opts);
        self.append_candidate(m)
    }

    /// Runs `count` greedy steps.
    pub fn extend(&mut self, count: usize, opts: &GreedyOptions) -> Result<Vec<GreedyPoint>, GreedyError> {
        (0..count).map(|_| self.next_point(opts)).collect()
    }

    fn append_candidate(&mut self, m: usize) -> Result<GreedyPoint, GreedyError> {
        let n = self.points.len();
        let chosen = GreedyPoint::new(n, m);
        let value = S::from_ratio(chosen.raw_numerator as i64, chosen.raw_denominator);
        if self.contains(&value) {
            return Err(GreedyError::NoveltyViolation(chosen.raw_string()));
        }
        self.insert_sorted(value.clone());
        self.history.push(Entry {
            step: chosen.step,
            value,
            origin: Origin::Greedy {
                raw_numerator: chosen.raw_numerator,
                raw_denominator: chosen.raw_denominator,
            },
        });
        Ok(chosen)
    }
}

fn check_unit<S: Scalar>(x: &S) -> Result<(), GreedyError> {
    if x.in_unit_interval() {
        Ok(())
    } else {
        Err(GreedyError::OutOfDomain(x.to_string()))
    }
}

fn select<S: Scalar>(values: &[S], opts: &GreedyOptions) -> usize {
    let best = values
        .iter()
        .min_by(|a, b| a.scalar_cmp(b))
        .expect("candidate set is never empty");
    let mut tied = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_tie(best, opts.tolerance))
        .map(|(m, _)| m);
    match opts.tie_rule {
        TieRule::Smallest => tied.next(),
        TieRule::Largest => tied.last(),
    }
    .expect("the minimum ties with itself")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational_from_parts;

    fn q(j: i64, d: u64) -> Rational {
        rational_from_parts(j, d).unwrap()
    }

    fn example_seeds() -> SequenceState<f64> {
        let seeds = [
            1.0 / std::f64::consts::PI,
            1.0 / std::f64::consts::E,
            1.0 / std::f64::consts::SQRT_2,
        ];
        SequenceState::from_seeds(seeds).unwrap()
    }

    #[test]
    fn f_examples() {
        let state = SequenceState::from_seeds([q(1, 2)]).unwrap();
        assert_eq!(state.kritzinger_f(&q(1, 4)).unwrap(), q(-9, 8));
        assert_eq!(state.kritzinger_f(&q(3, 4)).unwrap(), q(-9, 8));
        let empty = SequenceState::<Rational>::new();
        assert_eq!(empty.kritzinger_f(&q(1, 2)).unwrap(), q(-1, 4));
        assert!(empty.kritzinger_f(&q(5, 4)).is_err());
        assert!(empty.kritzinger_f(&q(-1, 4)).is_err());
    }

    #[test]
    fn f_at_existing_point_uses_either_branch() {
        let state = SequenceState::from_seeds([q(1, 2), q(1, 3)]).unwrap();
        // x = 1/2: (3)(1/4) - 1/2 - 2(1/2 + 1/2) = -7/4
        assert_eq!(state.kritzinger_f(&q(1, 2)).unwrap(), q(-7, 4));
    }

    #[test]
    fn candidates_match_direct_evaluation() {
        let state = SequenceState::from_seeds([q(1, 3), q(2, 7), q(9, 10), q(1, 3)]).unwrap();
        let cands = state.enumerate_candidates();
        assert_eq!(cands.len(), 5);
        for c in &cands {
            assert_eq!(c.value, q(2 * c.m as i64 + 1, 10));
            assert_eq!(c.f_value, state.kritzinger_f(&c.value).unwrap());
        }
    }

    #[test]
    fn candidate_sets() {
        let empty = SequenceState::<Rational>::new();
        let c = empty.enumerate_candidates();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].value, q(1, 2));
        assert_eq!(c[0].f_value, q(-1, 4));

        let seeded = example_seeds();
        let values: Vec<_> = seeded.enumerate_candidates().into_iter().map(|c| c.value).collect();
        assert_eq!(values, vec![q(1, 8), q(3, 8), q(5, 8), q(7, 8)]);

        let half = SequenceState::from_seeds([q(1, 2)]).unwrap();
        let c = half.enumerate_candidates();
        assert_eq!(c[0].f_value, c[1].f_value);
    }

    #[test]
    fn worked_example_sequence() {
        let mut state = example_seeds();
        let opts = GreedyOptions::default();
        let got: Vec<String> = (0..6).map(|_| state.next_point(&opts).unwrap().raw_string()).collect();
        assert_eq!(got, ["7/8", "1/10", "7/12", "7/14", "13/16", "3/18"]);
    }

    #[test]
    fn via_e_agrees_on_example_seeds() {
        let mut a = example_seeds();
        let mut b = example_seeds();
        let opts = GreedyOptions::default();
        for _ in 0..20 {
            assert_eq!(a.next_point(&opts).unwrap(), b.next_point_via_e(&opts).unwrap());
        }
        assert_eq!(a.history()[3].raw_form(), Some((7, 8)));
    }

    #[test]
    fn empty_state_starts_at_half() {
        let mut s = SequenceState::<Rational>::new();
        let p = s.next_point(&GreedyOptions::default()).unwrap();
        assert_eq!(p.reduced(), q(1, 2));
        let mut s = SequenceState::<Rational>::new();
        let p = s.next_point_via_e(&GreedyOptions::default()).unwrap();
        assert_eq!(p.reduced(), q(1, 2));
    }

    #[test]
    fn tie_rules() {
        let base = SequenceState::from_seeds([q(1, 2)]).unwrap();
        let mut s = base.clone();
        assert_eq!(s.next_point(&GreedyOptions::with_tie_rule(TieRule::Smallest)).unwrap().reduced(), q(1, 4));
        let mut s = base.clone();
        assert_eq!(s.next_point(&GreedyOptions::with_tie_rule(TieRule::Largest)).unwrap().reduced(), q(3, 4));
        let mut s = SequenceState::from_seeds([0.5f64]).unwrap();
        assert_eq!(s.next_point(&GreedyOptions::default()).unwrap().raw_string(), "1/4");
    }

    #[test]
    fn e_examples() {
        let empty = SequenceState::<Rational>::new();
        for z in [q(0, 1), q(1, 3), q(1, 1)] {
            assert_eq!(empty.e_functional(&z).unwrap(), q(0, 1));
        }
        let half = SequenceState::from_seeds([q(1, 2)]).unwrap();
        assert_eq!(half.e_functional(&q(1, 2)).unwrap(), q(1, 6));
        // E(0) = 2 int_0^1 g(1-x) dx; for {1/2}: 2[-int_0^.5 x(1-x) + int_.5^1 (1-x)^2] = 2[-1/12 + 1/24]
        assert_eq!(half.e_functional(&q(0, 1)).unwrap(), q(-1, 12));
        assert!(half.e_functional(&q(3, 2)).is_err());
    }

    #[test]
    fn e_sweep_matches_direct() {
        let state = SequenceState::from_seeds([q(1, 3), q(2, 7), q(9, 10), q(1, 10)]).unwrap();
        let sweep = state.e_objectives();
        for (m, v) in sweep.iter().enumerate() {
            let z = q(2 * m as i64 + 1, 10);
            let w = q(1, 1) - z.clone();
            let direct = state.e_functional(&z).unwrap() + (z.cube() + w.cube()) / q(3, 1);
            assert_eq!(v, &direct);
        }
    }

    #[test]
    fn greedy_form_and_novelty() {
        let mut s = SequenceState::<Rational>::new();
        let opts = GreedyOptions::default();
        for _ in 0..60 {
            let before = s.clone();
            let p = s.next_point(&opts).unwrap();
            assert_eq!(p.raw_denominator, 2 * p.step as u64);
            assert_eq!(p.raw_numerator % 2, 1);
            assert!(p.raw_numerator < p.raw_denominator);
            assert!(!before.contains(&p.reduced()));
        }
        for (i, sfx) in s.suffix_sums.iter().enumerate() {
            let direct = s.points[i..].iter().fold(q(0, 1), |a, b| a + b);
            assert_eq!(sfx, &direct);
        }
    }

    #[test]
    fn seeds_must_be_in_unit_interval() {
        assert!(SequenceState::from_seeds([1.5f64]).is_err());
        assert!(SequenceState::from_seeds([f64::NAN]).is_err());
        assert!(SequenceState::from_seeds([q(1, 1), q(0, 1), q(0, 1)]).is_ok());
    }
}
