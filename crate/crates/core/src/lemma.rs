//! Exact checks of the integral inequalities behind the regularity bounds.
//!
//! Everything is phrased through the antiderivative `G(x) = int_0^x g`.
//! Integrating by parts twice gives
//!
//! ```text
//! int_0^z g(x) x dx - int_z^1 g(x)(1-x) dx = G(z) - int_0^1 G
//! ```
//!
//! so the left side of both lemmas is `max G - mean G`, and `G` is piecewise
//! quadratic for piecewise-linear `g`, which makes every quantity exact.

use std::cmp::Ordering;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::metrics::GFunction;
use crate::numeric::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LemmaError {
    #[error("breakpoints must increase strictly from 0 to 1")]
    BadBreakpoints,
    #[error("expected {expected} pieces, got {got}")]
    PieceCount { expected: usize, got: usize },
    #[error("the inequality is undefined for g = 0")]
    ZeroFunction,
    #[error("{0} lies outside the admissible range")]
    OutOfDomain(String),
}

/// `g(x) = slope * x + intercept` on one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece<S> {
    pub slope: S,
    pub intercept: S,
}

impl<S: Scalar> Piece<S> {
    pub fn constant(c: S) -> Self {
        Self {
            slope: S::zero(),
            intercept: c,
        }
    }

    pub fn eval(&self, x: &S) -> S {
        self.slope.clone() * x.clone() + self.intercept.clone()
    }

    /// `int_a^b x^k g(x) dx` for k = 0, 1 and `int_a^b g^2`.
    fn moments(&self, a: &S, b: &S) -> (S, S, S) {
        let (s, c) = (&self.slope, &self.intercept);
        let d1 = b.clone() - a.clone();
        let d2 = (b.square() - a.square()) / S::from_int(2);
        let d3 = (b.cube() - a.cube()) / S::from_int(3);
        let int_g = s.clone() * d2.clone() + c.clone() * d1.clone();
        let int_gx = s.clone() * d3.clone() + c.clone() * d2.clone();
        let int_g2 = s.square() * d3 + S::from_int(2) * s.clone() * c.clone() * d2 + c.square() * d1;
        (int_g, int_gx, int_g2)
    }

    /// `int_a^x g`.
    fn primitive(&self, a: &S, x: &S) -> S {
        self.slope.clone() * (x.square() - a.square()) / S::from_int(2)
            + self.intercept.clone() * (x.clone() - a.clone())
    }
}

/// A piecewise-linear function on `[0, 1]`, possibly discontinuous at the
/// breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction<S> {
    breakpoints: Vec<S>,
    pieces: Vec<Piece<S>>,
}

/// Extremes of `G` together with where they are attained.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiderivativeExtremes<S> {
    pub min: S,
    pub argmin: S,
    pub max: S,
    pub argmax: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaLhs<S> {
    pub value: S,
    /// A maximizing `z`.
    pub argmax: S,
}

impl<S: Scalar> PiecewiseFunction<S> {
    pub fn new(breakpoints: Vec<S>, pieces: Vec<Piece<S>>) -> Result<Self, LemmaError> {
        let ok = breakpoints.len() >= 2
            && breakpoints[0].is_zero()
            && breakpoints.last().unwrap().scalar_cmp(&S::one()) == Ordering::Equal
            && breakpoints.windows(2).all(|w| w[0].scalar_cmp(&w[1]) == Ordering::Less);
        if !ok {
            return Err(LemmaError::BadBreakpoints);
        }
        if pieces.len() != breakpoints.len() - 1 {
            return Err(LemmaError::PieceCount {
                expected: breakpoints.len() - 1,
                got: pieces.len(),
            });
        }
        Ok(Self { breakpoints, pieces })
    }

    pub fn constant(c: S) -> Self {
        Self {
            breakpoints: vec![S::zero(), S::one()],
            pieces: vec![Piece::constant(c)],
        }
    }

    /// Indicator of `[0, eps]`.
    pub fn indicator(eps: S) -> Result<Self, LemmaError> {
        if eps.scalar_cmp(&S::zero()) != Ordering::Greater || eps.scalar_cmp(&S::one()) == Ordering::Greater {
            return Err(LemmaError::OutOfDomain(eps.to_string()));
        }
        if eps.scalar_cmp(&S::one()) == Ordering::Equal {
            return Ok(Self::constant(S::one()));
        }
        Self::new(
            vec![S::zero(), eps, S::one()],
            vec![Piece::constant(S::one()), Piece::constant(S::zero())],
        )
    }

    /// Interpolates `values[i]` at `breakpoints[i]` linearly; continuous.
    pub fn interpolating(breakpoints: Vec<S>, values: &[S]) -> Result<Self, LemmaError> {
        if values.len() != breakpoints.len() {
            return Err(LemmaError::PieceCount {
                expected: breakpoints.len(),
                got: values.len(),
            });
        }
        let pieces = breakpoints
            .windows(2)
            .zip(values.windows(2))
            .map(|(b, v)| {
                let slope = (v[1].clone() - v[0].clone()) / (b[1].clone() - b[0].clone());
                let intercept = v[0].clone() - slope.clone() * b[0].clone();
                Piece { slope, intercept }
            })
            .collect();
        Self::new(breakpoints, pieces)
    }

    /// Exact piecewise form of `g_n`: slope `-n`, intercept the count.
    pub fn from_gfunction(g: &GFunction<S>) -> Self {
        let n = S::from_int(g.n() as i64);
        let mut breakpoints = vec![S::zero()];
        let mut pieces = Vec::new();
        for (_, b, count) in g.segments() {
            breakpoints.push(b);
            pieces.push(Piece {
                slope: -n.clone(),
                intercept: S::from_int(count as i64),
            });
        }
        Self { breakpoints, pieces }
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece<S>] {
        &self.pieces
    }

    fn intervals(&self) -> impl Iterator<Item = (&S, &S, &Piece<S>)> {
        self.breakpoints
            .windows(2)
            .zip(&self.pieces)
            .map(|(w, p)| (&w[0], &w[1], p))
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.slope.is_zero() && p.intercept.is_zero())
    }

    pub fn is_continuous(&self) -> bool {
        self.pieces.windows(2).zip(&self.breakpoints[1..]).all(|(p, b)| {
            p[0].eval(b).scalar_cmp(&p[1].eval(b)) == Ordering::Equal
        })
    }

    pub fn eval(&self, x: &S) -> S {
        let i = self.locate(x);
        self.pieces[i].eval(x)
    }

    fn locate(&self, x: &S) -> usize {
        let i = self.breakpoints.partition_point(|b| b.scalar_cmp(x) != Ordering::Greater);
        i.saturating_sub(1).min(self.pieces.len() - 1)
    }

    pub fn integral(&self) -> S {
        self.intervals().fold(S::zero(), |acc, (a, b, p)| acc + p.moments(a, b).0)
    }

    /// `||g||^2 = int_0^1 g^2`.
    pub fn norm_squared(&self) -> S {
        self.intervals().fold(S::zero(), |acc, (a, b, p)| acc + p.moments(a, b).2)
    }

    /// `G` at every breakpoint.
    fn antiderivative_knots(&self) -> Vec<S> {
        let mut knots = Vec::with_capacity(self.breakpoints.len());
        let mut acc = S::zero();
        knots.push(acc.clone());
        for (a, b, p) in self.intervals() {
            acc = acc + p.moments(a, b).0;
            knots.push(acc.clone());
        }
        knots
    }

    /// `G(x) = int_0^x g`.
    pub fn antiderivative(&self, x: &S) -> S {
        let i = self.locate(x);
        let knots = self.antiderivative_knots();
        knots[i].clone() + self.pieces[i].primitive(&self.breakpoints[i], x)
    }

    /// `mean G = int_0^1 G`.
    pub fn antiderivative_mean(&self) -> S {
        let knots = self.antiderivative_knots();
        let two = S::from_int(2);
        let three = S::from_int(3);
        self.intervals().zip(&knots).fold(S::zero(), |acc, ((a, b, p), g_a)| {
            let d = b.clone() - a.clone();
            // int_a^b [G(a) + s(x^2 - a^2)/2 + c(x - a)] dx
            let quad = (b.cube() - a.cube()) / three.clone() - a.square() * d.clone();
            let lin = (b.square() - a.square()) / two.clone() - a.clone() * d.clone();
            acc + g_a.clone() * d + p.slope.clone() * quad / two.clone() + p.intercept.clone() * lin
        })
    }

    /// Exact min and max of `G` over `[0, 1]`: knots plus interior zeros of `g`.
    pub fn antiderivative_extremes(&self) -> AntiderivativeExtremes<S> {
        let knots = self.antiderivative_knots();
        let mut ext = AntiderivativeExtremes {
            min: S::zero(),
            argmin: S::zero(),
            max: S::zero(),
            argmax: S::zero(),
        };
        let mut consider = |x: &S, v: S| {
            if v.scalar_cmp(&ext.max) == Ordering::Greater {
                ext.max = v.clone();
                ext.argmax = x.clone();
            }
            if v.scalar_cmp(&ext.min) == Ordering::Less {
                ext.min = v;
                ext.argmin = x.clone();
            }
        };
        for ((a, b, p), (g_a, g_b)) in self.intervals().zip(knots.iter().zip(&knots[1..])) {
            if !p.slope.is_zero() {
                let root = -p.intercept.clone() / p.slope.clone();
                if root.scalar_cmp(a) == Ordering::Greater && root.scalar_cmp(b) == Ordering::Less {
                    consider(&root, g_a.clone() + p.primitive(a, &root));
                }
            }
            consider(b, g_b.clone());
        }
        ext
    }

    /// `max_x |G(x)|`.
    pub fn max_abs_antiderivative(&self) -> S {
        let ext = self.antiderivative_extremes();
        S::max_of(ext.max, -ext.min)
    }

    /// `int_0^z g(x) x dx - int_z^1 g(x)(1-x) dx`, integrated directly.
    pub fn lemma_expression(&self, z: &S) -> S {
        let mut left = S::zero();
        let mut right = S::zero();
        for (a, b, p) in self.intervals() {
            if a.scalar_cmp(z) == Ordering::Less {
                let hi = S::min_of(b.clone(), z.clone());
                left = left + p.moments(a, &hi).1;
            }
            if b.scalar_cmp(z) == Ordering::Greater {
                let lo = S::max_of(a.clone(), z.clone());
                let (g, gx, _) = p.moments(&lo, b);
                right = right + (g - gx);
            }
        }
        left - right
    }
}

fn check_nonzero<S: Scalar>(g: &PiecewiseFunction<S>) -> Result<(), LemmaError> {
    if g.is_zero() {
        Err(LemmaError::ZeroFunction)
    } else {
        Ok(())
    }
}

/// `max_z int_0^z g x - int_z^1 g(1-x)`, computed as `max G - mean G`.
pub fn lemma_lhs<S: Scalar>(g: &PiecewiseFunction<S>) -> LemmaLhs<S> {
    let ext = g.antiderivative_extremes();
    LemmaLhs {
        value: ext.max - g.antiderivative_mean(),
        argmax: ext.argmax,
    }
}

/// `(1/16) * (max |G|)^3 / ||g||^2`.
pub fn lemma_rhs<S: Scalar>(g: &PiecewiseFunction<S>) -> Result<S, LemmaError> {
    check_nonzero(g)?;
    Ok(g.max_abs_antiderivative().cube() / (S::from_int(16) * g.norm_squared()))
}

/// Both sides of the integration-by-parts identity at `z`:
/// `(direct integral, G(z) - mean G)`.
pub fn basic_lemma_identity<S: Scalar>(g: &PiecewiseFunction<S>, z: &S) -> Result<(S, S), LemmaError> {
    if !z.in_unit_interval() {
        return Err(LemmaError::OutOfDomain(z.to_string()));
    }
    Ok((g.lemma_expression(z), g.antiderivative(z) - g.antiderivative_mean()))
}

/// `(max G - mean G) - (mean G - min G)^3 / (8 ||g||^2)`; nonnegative.
pub fn fact_check<S: Scalar>(g: &PiecewiseFunction<S>) -> Result<S, LemmaError> {
    check_nonzero(g)?;
    let ext = g.antiderivative_extremes();
    let mean = g.antiderivative_mean();
    let gap = mean.clone() - ext.min;
    Ok((ext.max - mean) - gap.cube() / (S::from_int(8) * g.norm_squared()))
}

/// LHS/RHS ratio for the indicator of `[0, eps]`, for each `eps`.
pub fn sharpness_scan(eps_list: &[Rational]) -> Result<Vec<(Rational, Rational)>, LemmaError> {
    eps_list
        .iter()
        .map(|eps| {
            let g = PiecewiseFunction::indicator(eps.clone())?;
            let ratio = lemma_lhs(&g).value / lemma_rhs(&g)?;
            Ok((eps.clone(), ratio))
        })
        .collect()
}

/// Shape family for randomized trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// Step function.
    PiecewiseConstant,
    /// Continuous, linear between breakpoints.
    ContinuousLinear,
    /// Independent linear piece per interval.
    DiscontinuousLinear,
}

/// Random piecewise-linear `g` with up to `max_pieces` pieces and values in
/// `[-10, 10]`. Breakpoints are multiples of `1/4096`, values of `1/64`.
pub fn random_piecewise<S: Scalar, R: Rng>(rng: &mut R, shape: Shape, max_pieces: usize) -> PiecewiseFunction<S> {
    const GRID: u64 = 4096;
    let pieces = rng.random_range(1..=max_pieces.max(1));
    let mut cuts: Vec<u64> = Vec::with_capacity(pieces + 1);
    while cuts.len() < pieces - 1 {
        let c = rng.random_range(1..GRID);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let breakpoints: Vec<S> = std::iter::once(0)
        .chain(cuts)
        .chain(std::iter::once(GRID))
        .map(|c| S::from_ratio(c as i64, GRID))
        .collect();
    let mut value = || S::from_ratio(rng.random_range(-640i64..=640), 64);
    match shape {
        Shape::PiecewiseConstant => {
            let pieces = (0..pieces).map(|_| Piece::constant(value())).collect();
            PiecewiseFunction::new(breakpoints, pieces).expect("valid by construction")
        }
        Shape::ContinuousLinear => {
            let values: Vec<S> = (0..=pieces).map(|_| value()).collect();
            PiecewiseFunction::interpolating(breakpoints, &values).expect("valid by construction")
        }
        Shape::DiscontinuousLinear => {
            let pieces = breakpoints
                .windows(2)
                .map(|b| {
                    let (left, right) = (value(), value());
                    let slope = (right - left.clone()) / (b[1].clone() - b[0].clone());
                    let intercept = left - slope.clone() * b[0].clone();
                    Piece { slope, intercept }
                })
                .collect();
            PiecewiseFunction::new(breakpoints, pieces).expect("valid by construction")
        }
    }
}

/// One randomized trial of `max G - mean G >= (max |G|)^3 / (16 ||g||^2)`.
#[derive(Debug, Clone, Serialize)]
pub struct Trial {
    pub seed: u64,
    pub shape: Shape,
    pub pieces: usize,
    pub continuous: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub ratio: f64,
    pub fact_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub trials: usize,
    /// Failures on continuous `g` (inside the lemma's hypothesis).
    pub violations: usize,
    /// Failures on discontinuous `g`, reported separately.
    pub outside_hypothesis: usize,
    pub fact_violations: usize,
    pub basic_lemma_violations: usize,
    pub min_margin: f64,
    pub min_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub tolerance: f64,
    pub trials: Vec<Trial>,
    pub summary: SweepSummary,
}

const SHAPES: [Shape; 3] = [Shape::PiecewiseConstant, Shape::ContinuousLinear, Shape::DiscontinuousLinear];

/// Trial `i` uses its own generator seeded with `base_seed + i`, so any trial
/// can be replayed on its own.
pub fn main_lemma_trial<S: Scalar>(seed: u64, max_pieces: usize) -> (Shape, PiecewiseFunction<S>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = SHAPES[rng.random_range(0..SHAPES.len())];
    let mut g = random_piecewise::<S, _>(&mut rng, shape, max_pieces);
    while g.is_zero() {
        g = random_piecewise(&mut rng, shape, max_pieces);
    }
    (shape, g)
}

/// Checks `lhs >= rhs` (and the auxiliary cubic bound) on `trials` random `g`.
pub fn main_lemma_sweep<S: Scalar>(trials: usize, base_seed: u64, max_pieces: usize, tolerance: f64) -> SweepReport {
    use rayon::prelude::*;
    let rows: Vec<Trial> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i);
            let (shape, g) = main_lemma_trial::<S>(seed, max_pieces);
            let lhs = lemma_lhs(&g).value;
            let rhs = lemma_rhs(&g).expect("nonzero g");
            let fact = fact_check(&g).expect("nonzero g");
            Trial {
                seed,
                shape,
                pieces: g.pieces().len(),
                continuous: g.is_continuous(),
                lhs: lhs.to_f64(),
                rhs: rhs.to_f64(),
                margin: (lhs.clone() - rhs.clone()).to_f64(),
                ratio: (lhs / rhs).to_f64(),
                fact_margin: fact.to_f64(),
            }
        })
        .collect();
    let failed = |t: &&Trial| t.margin < -tolerance;
    let summary = SweepSummary {
        trials: rows.len(),
        violations: rows.iter().filter(|t| t.continuous).filter(failed).count(),
        outside_hypothesis: rows.iter().filter(|t| !t.continuous).filter(failed).count(),
        fact_violations: rows.iter().filter(|t| t.fact_margin < -tolerance).count(),
        basic_lemma_violations: rows.iter().filter(|t| t.lhs < -tolerance).count(),
        min_margin: rows.iter().map(|t| t.margin).fold(f64::INFINITY, f64::min),
        min_ratio: rows.iter().map(|t| t.ratio).fold(f64::INFINITY, f64::min),
    };
    SweepReport {
        tolerance,
        trials: rows,
        summary,
    }
}

/// Result of a local search for small LHS/RHS ratios over step functions.
#[derive(Debug, Clone, Serialize)]
pub struct SearchLog {
    pub seed: u64,
    pub iterations: usize,
    pub pieces: usize,
    pub min_ratio: f64,
    /// Step heights of the best function found, on an equispaced partition.
    pub best_values: Vec<f64>,
}

/// Hill-climbs on equispaced step functions to make the inequality as tight
/// as possible, logging the smallest ratio seen.
pub fn adversarial_search(seed: u64, pieces: usize, iterations: usize) -> SearchLog {
    let pieces = pieces.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let breakpoints: Vec<f64> = (0..=pieces).map(|i| i as f64 / pieces as f64).collect();
    let ratio = |values: &[f64]| -> f64 {
        let g = PiecewiseFunction::new(
            breakpoints.clone(),
            values.iter().map(|v| Piece::constant(*v)).collect(),
        )
        .expect("equispaced");
        match lemma_rhs(&g) {
            Ok(rhs) => lemma_lhs(&g).value / rhs,
            Err(_) => f64::INFINITY,
        }
    };
    let mut best: Vec<f64> = (0..pieces).map(|_| rng.random_range(-10.0..10.0)).collect();
    let mut best_ratio = ratio(&best);
    let mut scale = 2.0;
    for it in 0..iterations {
        let mut cand = best.clone();
        let k = rng.random_range(0..pieces);
        cand[k] = (cand[k] + rng.random_range(-scale..scale)).clamp(-10.0, 10.0);
        let r = ratio(&cand);
        if r < best_ratio {
            best = cand;
            best_ratio = r;
        }
        if it % 500 == 499 {
            scale = f64::max(scale * 0.7, 1e-3);
        }
    }
    SearchLog {
        seed,
        iterations,
        pieces,
        min_ratio: best_ratio,
        best_values: best,
    }
}
