//! Verification suites behind `kritzinger verify`. Each suite runs a batch
//! of independent checks and reports every one with a signed margin
//! (nonnegative means satisfied), so a failing run shows how far off it was.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::greedy::{GreedyError, GreedyOptions, SequenceState, TieRule};
use crate::lemma::{main_lemma_sweep, sharpness_scan};
use crate::metrics::{l2_discrepancy_squared, max_abs_h, w2_squared, GFunction};
use crate::numeric::{rational_from_parts, Rational, Scalar, INV_E, INV_PI, INV_SQRT2};
use crate::oracle::{
    grid_argmin_w2, l2_by_quadrature, max_abs_h_by_grid, w2_after_insert, w2_by_quadrature, GridSpec,
    QuadratureRule, ARGMIN_RESOLUTION, QUADRATURE_RESOLUTION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Suite {
    /// Greedy steps minimize `W_2^2` over the candidates, exactly.
    Theorem1,
    /// Form, novelty and `int g_n^2 <= n/3 + c` along random runs.
    KritzingerBound,
    /// One-step increments of `int g_n^2` stay at most `1/3`.
    Prop2,
    /// `int g_n^2 = n^2 W_2^2` on random exact sets.
    CnZero,
    /// The integral inequality on random piecewise-linear `g`, and the
    /// ratio 8 on indicators.
    MainLemma,
    /// Every window `[N, 100N]` holds an `n` with `max|H_n|^3 <= 8n`.
    Theorem2Windows,
    /// Closed forms against quadrature, grid maxima and grid argmins.
    OracleEquiv,
}

impl Suite {
    /// Steps, trials or horizon, depending on the suite.
    pub fn default_budget(&self) -> usize {
        match self {
            Suite::Theorem1 => 60,
            Suite::KritzingerBound | Suite::Prop2 => 5000,
            Suite::CnZero | Suite::OracleEquiv => 100,
            Suite::MainLemma => 1000,
            Suite::Theorem2Windows => 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, margin: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            margin,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub budget: usize,
    pub rng_seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub budget: Option<usize>,
    pub rng_seed: u64,
    pub greedy: GreedyOptions,
    /// Grid cells for argmin and maximization oracles.
    pub grid_resolution: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            budget: None,
            rng_seed: 0,
            greedy: GreedyOptions::default(),
            grid_resolution: ARGMIN_RESOLUTION,
        }
    }
}

/// Steps of the exact shadow run that accompanies float greedy audits.
pub const EXACT_SHADOW_STEPS: usize = 400;
/// Random seed configurations per greedy audit.
pub const AUDIT_CONFIGS: usize = 10;

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport, GreedyError> {
    let budget = opts.budget.unwrap_or_else(|| suite.default_budget());
    let checks = match suite {
        Suite::Theorem1 => w2_minimization_checks(budget, opts)?,
        Suite::KritzingerBound => audit_checks(budget, opts, false)?,
        Suite::Prop2 => audit_checks(budget, opts, true)?,
        Suite::CnZero => cn_zero_checks(budget, opts.rng_seed),
        Suite::MainLemma => main_lemma_checks(budget, opts.rng_seed),
        Suite::Theorem2Windows => {
            let report = h_windows(vec![0.5f64], budget, &opts.greedy)?;
            report
                .windows
                .iter()
                .map(|w| {
                    Check::new(
                        format!("window [{}, {}]", w.start, w.end),
                        w.witness.is_some(),
                        w.margin,
                        w.witness.map(|n| format!("witness n = {n}")).unwrap_or_default(),
                    )
                })
                .collect()
        }
        Suite::OracleEquiv => oracle_checks(budget, opts),
    };
    Ok(SuiteReport {
        suite,
        budget,
        rng_seed: opts.rng_seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// The three irrational seeds of the worked example, in float.
pub fn example_seeds() -> [f64; 3] {
    [INV_PI, INV_E, INV_SQRT2]
}

/// 0 to 50 uniform seeds in `[0, 1)`, reproducible from `seed`.
pub fn random_seed_config(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(0..=50usize);
    (0..count).map(|_| rng.random::<f64>()).collect()
}

// ---------------------------------------------------------------------------
// greedy run audit

/// Everything checked along one greedy run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunAudit {
    pub seeds: usize,
    pub final_n: usize,
    /// `max(0, int g_{n0}^2 - n0/3)` for the seed configuration.
    pub c: f64,
    pub form_violations: usize,
    pub novelty_violations: usize,
    pub bound_violations: usize,
    pub increment_violations: usize,
    /// `min_n (n/3 + c - int g_n^2)`.
    pub min_bound_margin: f64,
    /// Largest one-step increase of `int g_n^2`.
    pub max_increment: f64,
}

impl RunAudit {
    pub fn clean(&self) -> bool {
        self.form_violations + self.novelty_violations + self.bound_violations + self.increment_violations == 0
    }
}

fn l2_or_zero<S: Scalar>(points: &[S]) -> S {
    if points.is_empty() {
        S::zero()
    } else {
        l2_discrepancy_squared(points).expect("state points are sorted and in range")
    }
}

/// Extends `seeds` greedily to `target_n` points, checking after every step
/// that the point is new and of the form `(2k+1)/(2n)`, that
/// `int g_n^2 <= n/3 + c`, and that the step raised `int g_n^2` by at most
/// `1/3`. Both inequalities are tested with additive `slack`.
pub fn audit_greedy_run<S: Scalar>(
    seeds: Vec<S>,
    target_n: usize,
    opts: &GreedyOptions,
    slack: &S,
) -> Result<RunAudit, GreedyError> {
    let n0 = seeds.len();
    let mut seen_exact: HashSet<Rational> = HashSet::new();
    let mut seen_bits: HashSet<u64> = HashSet::new();
    for s in &seeds {
        seen_bits.insert(s.to_f64().to_bits());
        if let Some(r) = s.to_rational() {
            seen_exact.insert(r);
        }
    }
    let mut state = SequenceState::from_seeds(seeds)?;
    let third = S::from_ratio(1, 3);
    let mut l2 = l2_or_zero(state.points());
    let c = S::max_of(S::zero(), l2.clone() - S::from_int(n0 as i64) * third.clone());
    let mut audit = RunAudit {
        seeds: n0,
        final_n: n0,
        c: c.to_f64(),
        form_violations: 0,
        novelty_violations: 0,
        bound_violations: 0,
        increment_violations: 0,
        min_bound_margin: f64::INFINITY,
        max_increment: f64::NEG_INFINITY,
    };
    while state.len() < target_n {
        let p = match state.next_point(opts) {
            Ok(p) => p,
            Err(GreedyError::NoveltyViolation(_)) => {
                audit.novelty_violations += 1;
                break;
            }
            Err(e) => return Err(e),
        };
        let n = state.len();
        if p.raw_denominator != 2 * n as u64 || p.raw_numerator % 2 == 0 || p.raw_numerator >= p.raw_denominator {
            audit.form_violations += 1;
        }
        let exact = p.reduced();
        let bits = (p.raw_numerator as f64 / p.raw_denominator as f64).to_bits();
        if !seen_exact.insert(exact) || !seen_bits.insert(bits) {
            audit.novelty_violations += 1;
        }
        let next = l2_or_zero(state.points());
        let inc = next.clone() - l2;
        if inc.scalar_cmp(&(third.clone() + slack.clone())) == std::cmp::Ordering::Greater {
            audit.increment_violations += 1;
        }
        audit.max_increment = audit.max_increment.max(inc.to_f64());
        let margin = S::from_int(n as i64) * third.clone() + c.clone() - next.clone();
        if (margin.clone() + slack.clone()).scalar_cmp(&S::zero()) == std::cmp::Ordering::Less {
            audit.bound_violations += 1;
        }
        audit.min_bound_margin = audit.min_bound_margin.min(margin.to_f64());
        l2 = next;
        audit.final_n = n;
    }
    Ok(audit)
}

/// Float audits of `AUDIT_CONFIGS` random seed configurations, run in parallel.
pub fn float_audits(base_seed: u64, target_n: usize, opts: &GreedyOptions) -> Result<Vec<RunAudit>, GreedyError> {
    (0..AUDIT_CONFIGS as u64)
        .into_par_iter()
        .map(|i| audit_greedy_run(random_seed_config(base_seed + i), target_n, opts, &1e-12))
        .collect()
}

/// Exact audits of the same configurations (float seeds are dyadic, hence
/// exact rationals), to `n0 + steps`.
pub fn exact_audits(base_seed: u64, steps: usize, opts: &GreedyOptions) -> Result<Vec<RunAudit>, GreedyError> {
    (0..AUDIT_CONFIGS as u64)
        .into_par_iter()
        .map(|i| {
            let seeds: Vec<Rational> = random_seed_config(base_seed + i)
                .into_iter()
                .map(|x| Rational::from_f64(x).expect("finite"))
                .collect();
            let target = seeds.len() + steps;
            audit_greedy_run(seeds, target, opts, &Rational::zero())
        })
        .collect()
}

fn audit_checks(budget: usize, opts: &VerifyOptions, increments: bool) -> Result<Vec<Check>, GreedyError> {
    let mut out = Vec::new();
    let mut push = |label: &str, i: usize, a: &RunAudit| {
        let name = format!("{label} config {i} ({} seeds, n = {})", a.seeds, a.final_n);
        if increments {
            let margin = 1.0 / 3.0 - a.max_increment;
            out.push(Check::new(name, a.increment_violations == 0, margin, format!("max increment {}", a.max_increment)));
        } else {
            let ok = a.form_violations + a.novelty_violations + a.bound_violations == 0;
            let detail = format!(
                "c = {}, form {}, novelty {}, bound {}",
                a.c, a.form_violations, a.novelty_violations, a.bound_violations
            );
            out.push(Check::new(name, ok, a.min_bound_margin, detail));
        }
    };
    for (i, a) in float_audits(opts.rng_seed, budget, &opts.greedy)?.iter().enumerate() {
        push("float", i, a);
    }
    if increments {
        let steps = budget.min(EXACT_SHADOW_STEPS);
        for (i, a) in exact_audits(opts.rng_seed, steps, &opts.greedy)?.iter().enumerate() {
            push("exact", i, a);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// greedy step = W2 minimization

/// `W_2^2` of the sorted points from the defining integral
/// `sum_i int_{(i-1)/n}^{i/n} (t - y_i)^2 dt`, exactly.
pub fn w2_defining_integral<S: Scalar>(sorted: &[S]) -> S {
    let n = sorted.len() as u64;
    let three = S::from_int(3);
    sorted.iter().enumerate().fold(S::zero(), |acc, (i, y)| {
        let hi = S::from_ratio(i as i64 + 1, n) - y.clone();
        let lo = S::from_ratio(i as i64, n) - y.clone();
        acc + (hi.cube() - lo.cube()) / three.clone()
    })
}

/// One exact greedy step compared against direct `W_2^2` minimization over
/// the candidates. Returns `(identity holds, chosen minimizes, margin)`,
/// where the identity is `F(c_m) - F(c_0) = (n+1)^2 (W(c_m) - W(c_0))` for
/// every `m` and `margin` is the gap to the best other candidate, scaled by
/// `(n+1)^2`.
pub fn w2_step_check(state: &SequenceState<Rational>, opts: &GreedyOptions) -> (bool, bool, Rational) {
    let n1 = Rational::from_integer(state.len() as u64 + 1);
    let scale = n1.square();
    let evals = state.enumerate_candidates();
    let w: Vec<Rational> = evals
        .iter()
        .map(|c| {
            let mut pts = state.points().to_vec();
            let pos = pts.partition_point(|p| *p <= c.value);
            pts.insert(pos, c.value.clone());
            w2_defining_integral(&pts)
        })
        .collect();
    let identity = evals
        .iter()
        .zip(&w)
        .all(|(e, wm)| e.f_value.clone() - evals[0].f_value.clone() == scale.clone() * (wm.clone() - w[0].clone()));
    let chosen = state.select_candidate(opts);
    let best = w.iter().min().expect("nonempty");
    let margin = w
        .iter()
        .enumerate()
        .filter(|(m, _)| *m != chosen)
        .map(|(_, v)| scale.clone() * (v.clone() - w[chosen].clone()))
        .min()
        .unwrap_or_else(Rational::zero);
    (identity, w[chosen] == *best, margin)
}

fn w2_minimization_checks(budget: usize, opts: &VerifyOptions) -> Result<Vec<Check>, GreedyError> {
    let mut out = Vec::new();
    let mut state = SequenceState::from_seeds(example_seeds())?;
    let got: Vec<String> = state.extend(6, &opts.greedy)?.iter().map(|p| p.raw_string()).collect();
    let want = ["7/8", "1/10", "7/12", "7/14", "13/16", "3/18"];
    out.push(Check::new("worked example", got == want, 0.0, got.join(" ")));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let seeds: Vec<Rational> = (0..rng.random_range(1..=5))
        .map(|_| {
            let q = rng.random_range(1..=64u64);
            rational_from_parts(rng.random_range(0..=q) as i64, q).expect("q > 0")
        })
        .collect();
    let mut state = SequenceState::from_seeds(seeds)?;
    let mut min_margin = Rational::from_integer(i64::MAX);
    let (mut identity_ok, mut argmin_ok) = (true, true);
    for _ in 0..budget {
        let (id, arg, margin) = w2_step_check(&state, &opts.greedy);
        identity_ok &= id;
        argmin_ok &= arg;
        min_margin = min_margin.min(margin);
        state.next_point(&opts.greedy)?;
    }
    let margin = if budget == 0 { 0.0 } else { min_margin.to_f64() };
    out.push(Check::new("F differences equal scaled W2 differences", identity_ok, 0.0, ""));
    out.push(Check::new("greedy choice minimizes W2 over candidates", argmin_ok, margin, format!("{budget} exact steps")));
    Ok(out)
}

// ---------------------------------------------------------------------------
// L2 = n^2 W2

/// Random exact point set: `n <= max_n` points `j/q` with `q <= 1000`.
pub fn random_rational_set(seed: u64, max_n: usize) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_n.max(1));
    let mut pts: Vec<Rational> = (0..n)
        .map(|_| {
            let q = rng.random_range(1..=1000u64);
            rational_from_parts(rng.random_range(0..=q) as i64, q).expect("q > 0")
        })
        .collect();
    pts.sort();
    pts
}

/// `int_0^1 g_n^2` by exact integration over the segments of `g_n`.
pub fn l2_by_segments<S: Scalar>(sorted: &[S]) -> S {
    let n = S::from_int(sorted.len() as i64);
    let g = GFunction::new(sorted).expect("sorted unit points");
    g.segments().into_iter().fold(S::zero(), |acc, (a, b, count)| {
        // int_a^b (count - n x)^2 dx = [(n x - count)^3 / (3n)]_a^b
        let c = S::from_int(count as i64);
        let fb = (n.clone() * b - c.clone()).cube();
        let fa = (n.clone() * a - c).cube();
        acc + (fb - fa) / (S::from_int(3) * n.clone())
    })
}

/// Exact comparison of the closed forms with the segment oracles and with
/// each other on one random set. Returns the set size and whether all of
/// `l2 = n^2 w2`, `l2 = oracle`, `w2 = oracle` hold.
pub fn cn_zero_instance(seed: u64, max_n: usize) -> (usize, bool) {
    let pts = random_rational_set(seed, max_n);
    let n2 = Rational::from_integer(pts.len() as u64).square();
    let l2 = l2_discrepancy_squared(&pts).expect("valid set");
    let w2 = w2_squared(&pts).expect("valid set");
    let ok = l2 == n2 * w2.clone() && l2 == l2_by_segments(&pts) && w2 == w2_defining_integral(&pts);
    (pts.len(), ok)
}

fn cn_zero_checks(budget: usize, base_seed: u64) -> Vec<Check> {
    (0..budget as u64)
        .into_par_iter()
        .map(|i| {
            let (n, ok) = cn_zero_instance(base_seed + i, 200);
            Check::new(format!("set {i} (n = {n})"), ok, 0.0, "")
        })
        .collect()
}

// ---------------------------------------------------------------------------
// integral inequality

/// Pieces per random function in lemma sweeps.
pub const LEMMA_MAX_PIECES: usize = 8;

fn main_lemma_checks(budget: usize, base_seed: u64) -> Vec<Check> {
    let sweep = main_lemma_sweep::<Rational>(budget, base_seed, LEMMA_MAX_PIECES, 1e-12);
    let s = &sweep.summary;
    let mut out = vec![
        Check::new(
            "continuous trials satisfy the lemma",
            s.violations == 0,
            s.min_margin,
            format!("{} trials, min ratio {}", s.trials, s.min_ratio),
        ),
        Check::new("fact inequality", s.fact_violations == 0, 0.0, ""),
        Check::new("lhs nonnegative", s.basic_lemma_violations == 0, 0.0, ""),
    ];
    if s.outside_hypothesis > 0 {
        out.push(Check::new(
            "discontinuous trials (informational)",
            true,
            0.0,
            format!("{} below the bound, outside the hypothesis", s.outside_hypothesis),
        ));
    }
    let eps: Vec<Rational> = [4u64, 100, 1000]
        .iter()
        .map(|q| rational_from_parts(1, *q).expect("q > 0"))
        .collect();
    let eight = Rational::from_integer(8);
    match sharpness_scan(&eps) {
        Ok(rows) => {
            for (e, ratio) in rows {
                let ok = ratio == eight;
                out.push(Check::new(format!("sharpness ratio at eps = {e}"), ok, 0.0, ratio.to_string()));
            }
        }
        Err(e) => out.push(Check::new("sharpness family", false, f64::NAN, e.to_string())),
    }
    out
}

// ---------------------------------------------------------------------------
// max|H_n| windows

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Window {
    pub start: usize,
    pub end: usize,
    /// Smallest `n` in the window with `max|H_n|^3 <= 8n`.
    pub witness: Option<usize>,
    /// `max_n (2 n^{1/3} - max|H_n|)` over the window.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowReport {
    pub horizon: usize,
    /// Number of `n <= horizon` satisfying the bound.
    pub hits: usize,
    pub windows: Vec<Window>,
}

impl WindowReport {
    pub fn all_witnessed(&self) -> bool {
        self.windows.iter().all(|w| w.witness.is_some())
    }
}

/// Runs the greedy sequence from `seeds` to `horizon` points, evaluates
/// `max|H_n|` for every `n`, and checks each window `[N, 100N]` inside
/// `[1, horizon]`.
pub fn h_windows<S: Scalar>(seeds: Vec<S>, horizon: usize, opts: &GreedyOptions) -> Result<WindowReport, GreedyError> {
    let mut state = SequenceState::from_seeds(seeds)?;
    // index n; None before the seeds are all in
    let mut per_n: Vec<Option<(bool, f64)>> = vec![None; horizon + 1];
    let eight = S::from_int(8);
    loop {
        let n = state.len();
        if n >= 1 && n <= horizon {
            let h = max_abs_h(&GFunction::from_state(&state));
            let ok = h.cube().scalar_cmp(&(eight.clone() * S::from_int(n as i64))) != std::cmp::Ordering::Greater;
            per_n[n] = Some((ok, 2.0 * (n as f64).cbrt() - h.to_f64()));
        }
        if n >= horizon {
            break;
        }
        state.next_point(opts)?;
    }
    let windows = (1..=horizon / 100)
        .map(|start| {
            let end = 100 * start;
            let slice = &per_n[start..=end];
            let witness = slice
                .iter()
                .position(|v| matches!(v, Some((true, _))))
                .map(|i| start + i);
            let margin = slice.iter().flatten().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
            Window {
                start,
                end,
                witness,
                margin,
            }
        })
        .collect();
    Ok(WindowReport {
        horizon,
        hits: per_n.iter().flatten().filter(|v| v.0).count(),
        windows,
    })
}

/// Seed `{1/2}` with the smallest-candidate tie rule.
pub fn h_windows_reference(horizon: usize) -> Result<WindowReport, GreedyError> {
    h_windows(vec![0.5f64], horizon, &GreedyOptions::with_tie_rule(TieRule::Smallest))
}

// ---------------------------------------------------------------------------
// oracle equivalence

/// Closed forms against quadrature and grid oracles on one random float set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub n: usize,
    pub w2_error: f64,
    pub l2_error: f64,
    pub max_h_error: f64,
}

impl OracleComparison {
    pub fn max_error(&self) -> f64 {
        self.w2_error.max(self.l2_error).max(self.max_h_error)
    }
}

fn random_float_set(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Vec<f64> {
    let n = rng.random_range(lo..=hi);
    let mut pts: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    pts.sort_by(|a, b| a.total_cmp(b));
    pts
}

pub fn oracle_instance(seed: u64, grid_resolution: usize) -> OracleComparison {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = random_float_set(&mut rng, 1, 50);
    let quad = GridSpec::new(QUADRATURE_RESOLUTION, QuadratureRule::Simpson);
    let fine = GridSpec::new(grid_resolution, QuadratureRule::Trapezoid);
    let g = GFunction::new(&pts).expect("sorted unit points");
    OracleComparison {
        n: pts.len(),
        w2_error: (w2_squared(&pts).expect("valid") - w2_by_quadrature(&pts, &quad)).abs(),
        l2_error: (l2_discrepancy_squared(&pts).expect("valid") - l2_by_quadrature(&pts, &quad)).abs(),
        max_h_error: (max_abs_h(&g) - max_abs_h_by_grid(&pts, &fine)).abs(),
    }
}

/// Candidate argmin against the dense-grid argmin on one random state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArgminComparison {
    pub n: usize,
    pub candidate: f64,
    pub grid_point: f64,
    /// `|candidate - grid_point|` in grid cells.
    pub cells_apart: f64,
    /// `W(grid point) - W(candidate)`; never below `-1e-12`.
    pub grid_excess: f64,
    pub via_e_agrees: bool,
}

impl ArgminComparison {
    pub fn passed(&self) -> bool {
        self.cells_apart <= 1.0 + 1e-9 && self.grid_excess >= -1e-12 && self.via_e_agrees
    }
}

pub fn argmin_instance(seed: u64, grid_resolution: usize, opts: &GreedyOptions) -> ArgminComparison {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = random_float_set(&mut rng, 0, 40);
    let state = SequenceState::from_seeds(pts.iter().copied()).expect("unit points");
    let m = state.select_candidate(opts);
    let candidate = (2 * m + 1) as f64 / (2 * pts.len() + 2) as f64;
    let grid = GridSpec::new(grid_resolution, QuadratureRule::Trapezoid);
    let (grid_point, grid_value) = grid_argmin_w2(&pts, &grid);
    ArgminComparison {
        n: pts.len(),
        candidate,
        grid_point,
        cells_apart: (candidate - grid_point).abs() / grid.cell(),
        grid_excess: grid_value - w2_after_insert(&pts, candidate),
        via_e_agrees: state.select_candidate_via_e(opts) == m,
    }
}

/// Oracle instances run `budget` times; argmin instances `budget / 2` times.
fn oracle_checks(budget: usize, opts: &VerifyOptions) -> Vec<Check> {
    let mut out: Vec<Check> = (0..budget as u64)
        .into_par_iter()
        .map(|i| {
            let c = oracle_instance(opts.rng_seed + i, opts.grid_resolution);
            let err = c.max_error();
            Check::new(format!("closed forms vs oracles, set {i} (n = {})", c.n), err <= 1e-6, 1e-6 - err, "")
        })
        .collect();
    out.par_extend((0..(budget / 2) as u64).into_par_iter().map(|i| {
        let c = argmin_instance(opts.rng_seed + i, opts.grid_resolution, &opts.greedy);
        Check::new(
            format!("argmin vs grid, state {i} (n = {})", c.n),
            c.passed(),
            1.0 - c.cells_apart,
            format!("candidate {} grid {}", c.candidate, c.grid_point),
        )
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_integral_examples() {
        let q = |j, d| rational_from_parts(j, d).unwrap();
        assert_eq!(w2_defining_integral(&[q(1, 2)]), q(1, 12));
        assert_eq!(w2_defining_integral(&[q(0, 1)]), q(1, 3));
        assert_eq!(w2_defining_integral(&[q(1, 4), q(3, 4)]), q(1, 48));
        assert_eq!(l2_by_segments(&[q(1, 4)]), q(7, 48));
    }

    #[test]
    fn small_suites_pass() {
        let opts = VerifyOptions {
            grid_resolution: 20_000,
            ..VerifyOptions::default()
        };
        for (suite, budget) in [
            (Suite::Theorem1, 15),
            (Suite::KritzingerBound, 200),
            (Suite::Prop2, 100),
            (Suite::CnZero, 10),
            (Suite::MainLemma, 50),
            (Suite::Theorem2Windows, 300),
            (Suite::OracleEquiv, 6),
        ] {
            let opts = VerifyOptions {
                budget: Some(budget),
                ..opts
            };
            let r = run_suite(suite, &opts).unwrap();
            assert!(r.passed, "{suite:?}: {:?}", r.checks.iter().find(|c| !c.passed));
            assert!(!r.checks.is_empty());
        }
    }

    #[test]
    fn audit_counts_every_step() {
        let a = audit_greedy_run(vec![0.25f64, 0.5], 40, &GreedyOptions::default(), &1e-12).unwrap();
        assert_eq!(a.final_n, 40);
        assert!(a.clean());
        assert!(a.max_increment <= 1.0 / 3.0);
        let empty = audit_greedy_run(Vec::<Rational>::new(), 30, &GreedyOptions::default(), &Rational::zero()).unwrap();
        assert_eq!(empty.c, 0.0);
        assert!(empty.clean());
    }

    #[test]
    fn windows_follow_horizon() {
        let r = h_windows_reference(250).unwrap();
        assert_eq!(r.windows.len(), 2);
        assert_eq!((r.windows[1].start, r.windows[1].end), (2, 200));
        // n = 1: max|H_1| = 1/8 <= 2
        assert_eq!(r.windows[0].witness, Some(1));
    }
}
