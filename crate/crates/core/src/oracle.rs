//! Brute-force references for the closed forms: dense-grid minimization,
//! composite quadrature, and grid maximization. Everything here is plain
//! `f64` and shares no code with the exact paths it checks.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    Midpoint,
    Trapezoid,
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    resolution: usize,
    rule: QuadratureRule,
}

/// Resolution for argmin and maximization checks.
pub const ARGMIN_RESOLUTION: usize = 1_000_000;
/// Resolution for quadrature checks.
pub const QUADRATURE_RESOLUTION: usize = 10_000;

impl GridSpec {
    /// `resolution` is the number of cells and is clamped to at least 2.
    pub fn new(resolution: usize, rule: QuadratureRule) -> Self {
        Self {
            resolution: resolution.max(2),
            rule,
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn cell(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    fn node(&self, i: usize) -> f64 {
        i as f64 / self.resolution as f64
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::new(QUADRATURE_RESOLUTION, QuadratureRule::Simpson)
    }
}

fn integrate_interval(f: &dyn Fn(f64) -> f64, a: f64, b: f64, cells: usize, rule: QuadratureRule) -> f64 {
    let cells = cells.max(1);
    let h = (b - a) / cells as f64;
    let x = |i: usize| if i == cells { b } else { a + i as f64 * h };
    match rule {
        QuadratureRule::Midpoint => (0..cells).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h,
        QuadratureRule::Trapezoid => {
            let inner: f64 = (1..cells).map(|i| f(x(i))).sum();
            (0.5 * (f(a) + f(b)) + inner) * h
        }
        QuadratureRule::Simpson => {
            let ends: f64 = (0..=cells).map(|i| f(x(i)) * if i == 0 || i == cells { 1.0 } else { 2.0 }).sum();
            let mids: f64 = (0..cells).map(|i| f(a + (i as f64 + 0.5) * h)).sum();
            (ends + 4.0 * mids) * h / 6.0
        }
    }
}

/// Composite rule over `[0, 1]` with `grid.resolution()` cells.
pub fn quadrature(f: &dyn Fn(f64) -> f64, grid: &GridSpec) -> f64 {
    integrate_interval(f, 0.0, 1.0, grid.resolution, grid.rule)
}

/// Composite rule applied separately on each `[breaks[j], breaks[j+1]]`;
/// `f(j, x)` evaluates the `j`-th smooth branch so that jumps at the
/// breakpoints never enter a cell. Cells are shared out by segment length.
pub fn quadrature_split(f: &dyn Fn(usize, f64) -> f64, breaks: &[f64], grid: &GridSpec) -> f64 {
    breaks
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] > w[0])
        .map(|(j, w)| {
            let cells = ((w[1] - w[0]) * grid.resolution as f64).ceil() as usize;
            integrate_interval(&|x| f(j, x), w[0], w[1], cells, grid.rule)
        })
        .sum()
}

/// `max |f|` over the grid nodes; a lower bound on the true supremum.
pub fn grid_max_abs(f: &dyn Fn(f64) -> f64, grid: &GridSpec) -> f64 {
    (0..=grid.resolution).map(|i| f(grid.node(i)).abs()).fold(0.0, f64::max)
}

/// `int_{lo}^{hi} (x - a)^2 dx`, written around the midpoint to avoid
/// cancellation.
fn cell_cost(a: f64, lo: f64, hi: f64) -> f64 {
    let h = hi - lo;
    let m = 0.5 * (lo + hi) - a;
    h * (m * m + h * h / 12.0)
}

/// `W_2^2` of the empirical measure on `sorted ∪ {x}` from the defining
/// integral `sum_i int_{(i-1)/N}^{i/N} (t - y_i)^2 dt`.
pub fn w2_after_insert(sorted: &[f64], x: f64) -> f64 {
    let big_n = sorted.len() + 1;
    let slot = |i: usize| (i as f64 / big_n as f64, (i + 1) as f64 / big_n as f64);
    let j = sorted.partition_point(|p| *p <= x);
    let mut total = 0.0;
    for (k, a) in sorted.iter().enumerate() {
        let (lo, hi) = slot(if k < j { k } else { k + 1 });
        total += cell_cost(*a, lo, hi);
    }
    let (lo, hi) = slot(j);
    total + cell_cost(x, lo, hi)
}

/// Grid point `i / resolution` minimizing `W_2^2` after inserting it, and
/// the minimal value. Prefix sums make each grid point `O(1)`; the first
/// minimal grid point wins.
pub fn grid_argmin_w2(sorted: &[f64], grid: &GridSpec) -> (f64, f64) {
    let n = sorted.len();
    let big_n = (n + 1) as f64;
    let slot = |i: usize| (i as f64 / big_n, (i + 1) as f64 / big_n);
    // before[j] = cost of sorted[..j] in their own slots; after[j] = cost of
    // sorted[j..] each shifted up one slot
    let mut before = vec![0.0; n + 1];
    for k in 0..n {
        let (lo, hi) = slot(k);
        before[k + 1] = before[k] + cell_cost(sorted[k], lo, hi);
    }
    let mut after = vec![0.0; n + 1];
    for k in (0..n).rev() {
        let (lo, hi) = slot(k + 1);
        after[k] = after[k + 1] + cell_cost(sorted[k], lo, hi);
    }
    let mut j = 0usize;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..=grid.resolution {
        let x = grid.node(i);
        while j < n && sorted[j] <= x {
            j += 1;
        }
        let (lo, hi) = slot(j);
        let v = before[j] + cell_cost(x, lo, hi) + after[j];
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

fn count_le(sorted: &[f64], x: f64) -> usize {
    sorted.partition_point(|p| *p <= x)
}

/// `W_2^2` by quadrature of the defining integral, split at `i/n`.
pub fn w2_by_quadrature(sorted: &[f64], grid: &GridSpec) -> f64 {
    let n = sorted.len();
    let breaks: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    quadrature_split(&|j, t| (t - sorted[j]).powi(2), &breaks, grid)
}

fn point_breaks(sorted: &[f64]) -> Vec<f64> {
    let mut breaks = vec![0.0];
    breaks.extend(sorted.iter().copied().filter(|x| *x > 0.0 && *x < 1.0));
    breaks.push(1.0);
    breaks.dedup();
    breaks
}

/// `int_0^1 (f_n(x) - n x)^2 dx` by quadrature split at the points.
pub fn l2_by_quadrature(sorted: &[f64], grid: &GridSpec) -> f64 {
    let n = sorted.len() as f64;
    let breaks = point_breaks(sorted);
    let counts: Vec<f64> = breaks.iter().map(|b| count_le(sorted, *b) as f64).collect();
    quadrature_split(&|j, x| (counts[j] - n * x).powi(2), &breaks, grid)
}

/// `max |f_n(x) - n x|` over grid nodes.
pub fn star_by_grid(sorted: &[f64], grid: &GridSpec) -> f64 {
    let n = sorted.len() as f64;
    grid_max_abs(&|x| count_le(sorted, x) as f64 - n * x, grid)
}

/// `max |int_0^x g_n|` from a cumulative trapezoid rule on the grid nodes
/// merged with the points, using one-sided limits of `g_n` so that each
/// sub-interval sees a single linear branch.
pub fn max_abs_h_by_grid(sorted: &[f64], grid: &GridSpec) -> f64 {
    let n = sorted.len();
    let nf = n as f64;
    let mut nodes = Vec::with_capacity(grid.resolution + n + 1);
    let mut k = 0usize;
    for i in 0..=grid.resolution {
        let t = grid.node(i);
        while k < n && sorted[k] < t {
            nodes.push(sorted[k]);
            k += 1;
        }
        nodes.push(t);
    }
    nodes.dedup();
    let mut h = 0.0f64;
    let mut best = 0.0f64;
    let mut below = 0usize; // #{x_k < left node} after advancing
    for w in nodes.windows(2) {
        let (u, v) = (w[0], w[1]);
        while below < n && sorted[below] <= u {
            below += 1;
        }
        // on (u, v) the count is constant: #{x_k <= u}
        let c = below as f64;
        h += 0.5 * ((c - nf * u) + (c - nf * v)) * (v - u);
        best = best.max(h.abs());
    }
    best
}
