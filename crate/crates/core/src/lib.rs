//! Greedy Wasserstein-minimizing point sequences on the unit interval.
//!
//! Starting from any finite configuration in `[0, 1]`, each new point is
//! chosen to minimize the quadratic Wasserstein distance between the
//! empirical measure and Lebesgue measure. The resulting (Kritzinger)
//! sequences consist of rationals `(2k+1)/(2n)` and are extremely regular.
//!
//! - [`numeric`]: exact [`Rational`](numeric::Rational) and `f64` backends
//!   behind one [`Scalar`](numeric::Scalar) trait.
//! - [`greedy`]: the construction itself.
//! - [`metrics`]: `W_2^2`, L2 and star discrepancy, `max |H_n|`.
//! - [`classical`]: van der Corput, Kronecker and seeded uniform references.
//! - [`lemma`]: exact checks of the integral inequalities on piecewise-linear functions.
//! - [`oracle`]: brute-force numerical references.
//! - [`cli`] and [`verify`]: the command-line front end and its check suites.

pub mod classical;
pub mod cli;
pub mod greedy;
pub mod lemma;
pub mod metrics;
pub mod numeric;
pub mod oracle;
pub mod verify;

pub use greedy::{GreedyOptions, SequenceState, TieRule};
pub use numeric::{Backend, Rational, Scalar};
