//! Exact analysis of weighted games of best choice.
//!
//! A permutation π ∈ S_N is drawn with probability proportional to θ^c(π) for
//! a permutation statistic `c`, and an interviewer who only sees relative
//! ranks tries to stop on the value N. The crate provides:
//!
//! - [`exactnum`]: rationals, θ-polynomials, mediant fractions, root isolation;
//! - [`permutation`]: statistics, prefix flattening, winnability, the prefix
//!   action and an exhaustive prefix-equivariance checker;
//! - [`tree_solver`]: backward induction over the prefix tree at rational θ;
//! - [`positional`]: `W(N,k)` tables, critical roots and strategy functions
//!   for the Ewens (left-to-right maxima) and Mallows (inversions) weights;
//! - [`asymptotics`]: large-N limits and finite-N floating-point profiles;
//! - [`sampler`]: Ewens/Mallows samplers and seeded Monte Carlo play;
//! - [`checks`]: the cross-check suites behind `bestchoice verify`.

pub mod asymptotics;
pub mod checks;
pub mod exactnum;
pub mod permutation;
pub mod positional;
pub mod sampler;
pub mod tree_solver;

pub use exactnum::{BigRat, ThetaPoly, WinFraction};
pub use permutation::{Permutation, Statistic};
