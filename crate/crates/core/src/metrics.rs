//! Regularity functionals of a finite point set in `[0, 1]`.
//!
//! All closed forms take the points sorted ascending (duplicates allowed)
//! and return values on the unnormalized count scale used throughout the
//! crate: the deviation `g_n(x) = #{k : x_k <= x} - n x`.

use std::cmp::Ordering;

use thiserror::Error;

use crate::greedy::{GreedyError, SequenceState};
use crate::numeric::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("metric is undefined for an empty point set")]
    Empty,
    #[error("points must be sorted ascending")]
    Unsorted,
    #[error("point {0} lies outside [0, 1]")]
    OutOfDomain(String),
    #[error(transparent)]
    Greedy(#[from] GreedyError),
}

fn check<S: Scalar>(points: &[S]) -> Result<(), MetricsError> {
    if points.is_empty() {
        return Err(MetricsError::Empty);
    }
    if points.windows(2).any(|w| w[0].scalar_cmp(&w[1]) == Ordering::Greater) {
        return Err(MetricsError::Unsorted);
    }
    match points.iter().find(|p| !p.in_unit_interval()) {
        Some(p) => Err(MetricsError::OutOfDomain(p.to_string())),
        None => Ok(()),
    }
}

/// Sorts a copy of `points` with the backend's total order.
pub fn sorted<S: Scalar>(points: &[S]) -> Vec<S> {
    let mut v = points.to_vec();
    v.sort_by(|a, b| a.scalar_cmp(b));
    v
}

/// `W_2^2` between the empirical measure and Lebesgue measure, via
/// `n^2 W_2^2 = n^2/3 + n sum x_k^2 - sum x_k (2k-1)`.
pub fn w2_squared<S: Scalar>(points: &[S]) -> Result<S, MetricsError> {
    check(points)?;
    let n = points.len() as i64;
    let (sq, weighted) = points.iter().enumerate().fold((S::zero(), S::zero()), |(sq, w), (i, x)| {
        (sq + x.square(), w + x.clone() * S::from_int(2 * i as i64 + 1))
    });
    let scaled = S::from_ratio(n * n, 3) + S::from_int(n) * sq - weighted;
    Ok(scaled / S::from_int(n * n))
}

/// `int_0^1 g_n(x)^2 dx = n sum (x_k - (2k-1)/(2n))^2 + 1/12`.
pub fn l2_discrepancy_squared<S: Scalar>(points: &[S]) -> Result<S, MetricsError> {
    check(points)?;
    let n = points.len() as u64;
    let sum = points.iter().enumerate().fold(S::zero(), |acc, (i, x)| {
        acc + (x.clone() - S::from_ratio(2 * i as i64 + 1, 2 * n)).square()
    });
    Ok(S::from_int(n as i64) * sum + S::from_ratio(1, 12))
}

/// `sup_x |g_n(x)|`, on the count scale (not divided by `n`).
pub fn star_discrepancy<S: Scalar>(points: &[S]) -> Result<S, MetricsError> {
    check(points)?;
    let n = S::from_int(points.len() as i64);
    let mut best = S::zero();
    for (i, x) in points.iter().enumerate() {
        let nx = n.clone() * x.clone();
        // right value at x_(i) and left limit just below it
        let after = (S::from_int(i as i64 + 1) - nx.clone()).abs();
        let before = (S::from_int(i as i64) - nx).abs();
        best = S::max_of(best, S::max_of(after, before));
    }
    Ok(best)
}

/// `D*_n = sup |g_n| / n`, the classical normalized star discrepancy.
pub fn normalized_star_discrepancy<S: Scalar>(points: &[S]) -> Result<S, MetricsError> {
    Ok(star_discrepancy(points)? / S::from_int(points.len() as i64))
}

/// `g_n(x) = #{k : x_k <= x} - n x` for a fixed point multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct GFunction<S> {
    points: Vec<S>,
}

impl<S: Scalar> GFunction<S> {
    pub fn new(points: &[S]) -> Result<Self, MetricsError> {
        let points = sorted(points);
        if let Some(p) = points.iter().find(|p| !p.in_unit_interval()) {
            return Err(MetricsError::OutOfDomain(p.to_string()));
        }
        Ok(Self { points })
    }

    pub fn from_state(state: &SequenceState<S>) -> Self {
        Self {
            points: state.points().to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[S] {
        &self.points
    }

    pub fn eval(&self, x: &S) -> S {
        let count = self.points.partition_point(|p| p.scalar_cmp(x) != Ordering::Greater);
        S::from_int(count as i64) - S::from_int(self.n() as i64) * x.clone()
    }

    /// Maximal intervals `[a, b)` on which the counting function is constant,
    /// with that constant. Covers `[0, 1]`; empty intervals are skipped.
    pub fn segments(&self) -> Vec<(S, S, usize)> {
        let mut out = Vec::new();
        let mut a = S::zero();
        let mut count = 0usize;
        let mut i = 0usize;
        let n = self.points.len();
        while i < n && self.points[i].is_zero() {
            i += 1;
            count += 1;
        }
        while i < n {
            let b = self.points[i].clone();
            if b.scalar_cmp(&S::one()) == Ordering::Equal {
                break;
            }
            out.push((a, b.clone(), count));
            while i < n && self.points[i].scalar_cmp(&b) == Ordering::Equal {
                i += 1;
                count += 1;
            }
            a = b;
        }
        out.push((a, S::one(), count));
        out
    }
}

/// `max_x |H_n(x)|` with `H_n(x) = int_0^x g_n`. `H_n` is a concave
/// quadratic on each segment, so its extremes sit at breakpoints or at the
/// zero `y = count / n` of `g_n` inside a segment.
pub fn max_abs_h<S: Scalar>(g: &GFunction<S>) -> S {
    let n = g.n();
    if n == 0 {
        return S::zero();
    }
    let n_s = S::from_int(n as i64);
    let half = S::from_ratio(1, 2);
    let mut h = S::zero();
    let mut best = S::zero();
    for (a, b, count) in g.segments() {
        let c = S::from_int(count as i64);
        let h_at = |y: &S| {
            h.clone() + c.clone() * (y.clone() - a.clone())
                - n_s.clone() * half.clone() * (y.square() - a.square())
        };
        let critical = S::from_ratio(count as i64, n as u64);
        if critical.scalar_cmp(&a) == Ordering::Greater && critical.scalar_cmp(&b) == Ordering::Less {
            best = S::max_of(best, h_at(&critical).abs());
        }
        let end = h_at(&b);
        best = S::max_of(best, end.abs());
        h = end;
    }
    best
}

/// Residual of the one-step identity
/// `int g_{n+1}^2 = int g_n^2 + E(z) + (z^3 + (1-z)^3)/3` for `z = chosen`.
pub fn step_identity_check<S: Scalar>(state: &SequenceState<S>, chosen: &S) -> Result<S, MetricsError> {
    let before = if state.is_empty() {
        S::zero()
    } else {
        l2_discrepancy_squared(state.points())?
    };
    let e = state.e_functional(chosen)?;
    let mut after_points = state.points().to_vec();
    let pos = after_points.partition_point(|p| p.scalar_cmp(chosen) != Ordering::Greater);
    after_points.insert(pos, chosen.clone());
    let after = l2_discrepancy_squared(&after_points)?;
    let w = S::one() - chosen.clone();
    let cubic = (chosen.cube() + w.cube()) / S::from_int(3);
    Ok(after - (before + e + cubic))
}

/// Per-`n` bundle of every regularity functional.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyReport<S> {
    pub n: usize,
    pub w2_squared: S,
    pub l2_disc_squared: S,
    pub star_disc: S,
    pub max_abs_h: S,
}

impl<S: Scalar> DiscrepancyReport<S> {
    /// `star_disc / ln n`; undefined for `n = 1`.
    pub fn star_over_log(&self) -> Option<f64> {
        star_over_log(self.star_disc.to_f64(), self.n)
    }
}

pub fn star_over_log(star: f64, n: usize) -> Option<f64> {
    (n > 1).then(|| star / (n as f64).ln())
}

pub fn report<S: Scalar>(sorted_points: &[S]) -> Result<DiscrepancyReport<S>, MetricsError> {
    check(sorted_points)?;
    let g = GFunction {
        points: sorted_points.to_vec(),
    };
    Ok(DiscrepancyReport {
        n: sorted_points.len(),
        w2_squared: w2_squared(sorted_points)?,
        l2_disc_squared: l2_discrepancy_squared(sorted_points)?,
        star_disc: star_discrepancy(sorted_points)?,
        max_abs_h: max_abs_h(&g),
    })
}

/// Reports for the prefixes of `sequence` (append order) of length
/// `every, 2*every, ...`, always including the full length.
pub fn report_series<S: Scalar>(sequence: &[S], every: usize) -> Result<Vec<DiscrepancyReport<S>>, MetricsError> {
    if sequence.is_empty() {
        return Err(MetricsError::Empty);
    }
    let every = every.max(1);
    let mut prefix: Vec<S> = Vec::with_capacity(sequence.len());
    let mut out = Vec::new();
    for (i, x) in sequence.iter().enumerate() {
        let pos = prefix.partition_point(|p| p.scalar_cmp(x) != Ordering::Greater);
        prefix.insert(pos, x.clone());
        let n = i + 1;
        if n % every == 0 || n == sequence.len() {
            out.push(report(&prefix)?);
        }
    }
    Ok(out)
}

/// Star discrepancy of every prefix, cheaper than full reports.
pub fn star_series<S: Scalar>(sequence: &[S]) -> Result<Vec<S>, MetricsError> {
    let mut prefix: Vec<S> = Vec::with_capacity(sequence.len());
    let mut out = Vec::with_capacity(sequence.len());
    for x in sequence {
        let pos = prefix.partition_point(|p| p.scalar_cmp(x) != Ordering::Greater);
        prefix.insert(pos, x.clone());
        out.push(star_discrepancy(&prefix)?);
    }
    Ok(out)
}
