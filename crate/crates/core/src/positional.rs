//! Positional strategies for the Ewens and Mallows weightings.
//!
//! `W(N,k)` is the θ-weighted count of permutations won by the strategy that
//! rejects `k` candidates and then accepts the next left-to-right maximum.
//! Dividing by the normalizer (⟨N⟩! for Ewens, [N]! for Mallows) gives its
//! win probability.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{
    rat, rational_string, rising_factorial, theta_factorial, theta_integer, BigRat, ThetaPoly,
};
use crate::permutation::Statistic;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PositionalError {
    #[error("game size must be at least 1")]
    EmptyGame,
    #[error("k = {k} out of range for N = {n}")]
    KOutOfRange { n: usize, k: usize },
    #[error("θ must be positive")]
    NonPositiveTheta,
    #[error("unknown model {0:?} (expected ewens or mallows)")]
    UnknownModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Weight θ^(number of left-to-right maxima).
    Ewens,
    /// Weight θ^(number of inversions).
    Mallows,
}

impl Model {
    pub fn statistic(self) -> Statistic {
        match self {
            Model::Ewens => Statistic::LeftToRightMaxima,
            Model::Mallows => Statistic::Inversions,
        }
    }

    /// Σ over S_N of the weight: ⟨N⟩! or [N]!.
    pub fn normalizer(self, n: usize) -> ThetaPoly {
        match self {
            Model::Ewens => rising_factorial(n),
            Model::Mallows => theta_factorial(n),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Ewens => "ewens",
            Model::Mallows => "mallows",
        }
    }
}

impl FromStr for Model {
    type Err = PositionalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ewens" | "lrmax" => Ok(Model::Ewens),
            "mallows" | "inversions" => Ok(Model::Mallows),
            _ => Err(PositionalError::UnknownModel(s.to_string())),
        }
    }
}

/// `W(N,k)` for `k = 0..=N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WTable {
    pub model: Model,
    pub n: usize,
    pub entries: Vec<ThetaPoly>,
}

impl WTable {
    pub fn get(&self, k: usize) -> &ThetaPoly {
        &self.entries[k]
    }

    /// `W(N,k+1) − W(N,k)`.
    pub fn delta(&self, k: usize) -> ThetaPoly {
        self.get(k + 1) - self.get(k)
    }
}

fn factorial(n: usize) -> BigRat {
    (1..=n).fold(BigRat::one(), |acc, i| acc * rat(i as i64))
}

/// Σ_{i=from}^{to} 1/i (empty sums are 0).
pub fn harmonic_range(from: usize, to: usize) -> BigRat {
    (from.max(1)..=to).fold(BigRat::zero(), |acc, i| acc + rat(i as i64).recip())
}

fn check_theta(theta: &BigRat) -> Result<(), PositionalError> {
    if theta.is_positive() {
        Ok(())
    } else {
        Err(PositionalError::NonPositiveTheta)
    }
}

/// Ewens tables for `N = 1..=n_max` by the recurrence
/// `W(N,k) = (N−1)W(N−1,k) + ((N−2)!/(k−1)!)·θ⟨k⟩!` for `k ≥ 1`.
///
/// The recurrence term is undefined at `k = 0`; that column is
/// `W(N,0) = (N−1)!·θ` (only π with π₁ = N are won).
pub fn ewens_w_rows(n_max: usize) -> Vec<WTable> {
    let theta = ThetaPoly::theta();
    let mut rows: Vec<WTable> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut entries = vec![ThetaPoly::zero(); n + 1];
        entries[0] = theta.scale(&factorial(n - 1));
        if n >= 2 {
            let prev = &rows[n - 2].entries;
            let scale = rat(n as i64 - 1);
            for (k, slot) in entries.iter_mut().enumerate().take(n).skip(1) {
                let carried = prev[k].scale(&scale);
                let fresh =
                    (&theta * &rising_factorial(k)).scale(&(factorial(n - 2) / factorial(k - 1)));
                *slot = &carried + &fresh;
            }
        }
        rows.push(WTable {
            model: Model::Ewens,
            n,
            entries,
        });
    }
    rows
}

pub fn ewens_w_recurrence(n: usize) -> Result<WTable, PositionalError> {
    if n == 0 {
        return Err(PositionalError::EmptyGame);
    }
    Ok(ewens_w_rows(n).pop().expect("n ≥ 1"))
}

/// `W(N,k) = θ⟨k⟩!·((N−1)!/(k−1)!)·Σ_{i=k}^{N−1} 1/i` for `k ≥ 1`,
/// `(N−1)!θ` for `k = 0` and `0` for `k = N`.
pub fn ewens_w_closed(n: usize, k: usize) -> Result<ThetaPoly, PositionalError> {
    if n == 0 {
        return Err(PositionalError::EmptyGame);
    }
    if k > n {
        return Err(PositionalError::KOutOfRange { n, k });
    }
    let theta = ThetaPoly::theta();
    Ok(match k {
        0 => theta.scale(&factorial(n - 1)),
        k if k == n => ThetaPoly::zero(),
        k => {
            let c = factorial(n - 1) / factorial(k - 1) * harmonic_range(k, n - 1);
            debug_assert!(c.is_integer());
            (&theta * &rising_factorial(k)).scale(&c)
        }
    })
}

pub fn ewens_w_closed_table(n: usize) -> Result<WTable, PositionalError> {
    let entries = (0..=n)
        .map(|k| ewens_w_closed(n, k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WTable {
        model: Model::Ewens,
        n,
        entries,
    })
}

/// `ΔW(N,k) = W(N,k+1) − W(N,k)` from the recurrence tables, `0 ≤ k ≤ N−1`.
pub fn ewens_delta_w(n: usize, k: usize) -> Result<ThetaPoly, PositionalError> {
    if n == 0 {
        return Err(PositionalError::EmptyGame);
    }
    if k >= n {
        return Err(PositionalError::KOutOfRange { n, k });
    }
    Ok(ewens_w_recurrence(n)?.delta(k))
}

/// `c₁(N,k)·((Σ_{i=k+1}^{N−1} 1/i)θ − 1)·θ⟨k⟩!` with `c₁ = ∏_{j=k+1}^{N−1} j`.
pub fn ewens_delta_w_factored(n: usize, k: usize) -> Result<ThetaPoly, PositionalError> {
    if n == 0 {
        return Err(PositionalError::EmptyGame);
    }
    if k >= n {
        return Err(PositionalError::KOutOfRange { n, k });
    }
    let c1 = (k + 1..n).fold(BigRat::one(), |acc, j| acc * rat(j as i64));
    let linear = ThetaPoly::from_coeffs(vec![-BigRat::one(), harmonic_range(k + 1, n - 1)]);
    Ok((&(&linear * &ThetaPoly::theta()) * &rising_factorial(k)).scale(&c1))
}

/// The unique positive root `1 / Σ_{i=k+1}^{N−1} 1/i` of `ΔW(N,k)`,
/// `0 ≤ k ≤ N−2`.
pub fn ewens_critical_root(n: usize, k: usize) -> Result<BigRat, PositionalError> {
    if n < 2 || k + 2 > n {
        return Err(PositionalError::KOutOfRange { n, k });
    }
    Ok(harmonic_range(k + 1, n - 1).recip())
}

/// Optimal number of initial rejections for the Ewens game.
///
/// The critical roots increase in `k`, so κ is the number of roots strictly
/// below θ. At a root both neighbours are optimal and the smaller is returned.
pub fn ewens_kappa(n: usize, theta: &BigRat) -> Result<usize, PositionalError> {
    if n == 0 {
        return Err(PositionalError::EmptyGame);
    }
    check_theta(theta)?;
    // tail = Σ_{i=k+1}^{N−1} 1/i, the reciprocal of the k-th root.
    let mut tail = harmonic_range(1, n - 1);
    let mut below = 0;
    for k in 0..n.saturating_sub(1) {
        if &tail.recip() < theta {
            below += 1;
            tail -= rat(k as i64 + 1).recip();
        } else {
            break;
        }
    }
    Ok(below)
}

/// Win probability of every positional strategy `k = 0..N−1` at a fixed θ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrategyProfile {
    pub model: Model,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(with = "rational_string")]
    pub theta: BigRat,
    #[serde(serialize_with = "serialize_rationals")]
    pub win_by_k: Vec<BigRat>,
    /// Smallest maximizing `k`.
    pub kappa: usize,
}

fn serialize_rationals<S: serde::Serializer>(v: &[BigRat], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for r in v {
        seq.serialize_element(&crate::exactnum::format_rational(r))?;
    }
    seq.end()
}

impl StrategyProfile {
    fn from_values(model: Model, n: usize, theta: BigRat, win_by_k: Vec<BigRat>) -> Self {
        let mut kappa = 0;
        for (k, w) in win_by_k.iter().enumerate() {
            if w > &win_by_k[kappa] {
                kappa = k;
            }
        }
        StrategyProfile {
            model,
            n,
            theta,
            win_by_k,
            kappa,
        }
    }

    pub fn optimum(&self) -> &BigRat {
        &self.win_by_k[self.kappa]
    }
}

/// Exact Ewens profile from the closed form
/// `W(N,k)/⟨N⟩! = θ·(Σ_{i=k}^{N−1} 1/i)·∏_{j=k}^{N−1} j/(j+θ)` (`k ≥ 1`).
pub fn ewens_profile(n: usize, theta: &BigRat) -> Result<StrategyProfile, PositionalError> {
    if n == 0 {
        return Err(PositionalError::EmptyGame);
    }
    check_theta(theta)?;
    let mut win = vec![BigRat::zero(); n];
    let mut product = BigRat::one();
    let mut harmonic = BigRat::zero();
    for k in (1..n).rev() {
        let j = rat(k as i64);
        product *= &j / (&j + theta);
        harmonic += j.recip();
        win[k] = theta * &harmonic * &product;
    }
    win[0] = product;
    Ok(StrategyProfile::from_values(
        Model::Ewens,
        n,
        theta.clone(),
        win,
    ))
}

/// Mallows tables for `N = 1..=n_max` by
/// `W(N,k) = θ[N−1]·W(N−1,k) + θ^{N−k−1}[k][N−2]!`, `W(1,0) = 1`, `W(N,N) = 0`.
///
/// At `k = 0` the second term vanishes ([0]_θ = 0), which leaves
/// `W(N,0) = θ^{N−1}[N−1]!`; that column is set directly.
pub fn mallows_w_rows(n_max: usize) -> Vec<WTable> {
    let mut rows: Vec<WTable> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut entries = vec![ThetaPoly::zero(); n + 1];
        entries[0] = theta_factorial(n - 1).shift(n - 1);
        if n >= 2 {
            let prev = &rows[n - 2].entries;
            let carry = theta_integer(n - 1).shift(1);
            let base = theta_factorial(n - 2);
            for (k, slot) in entries.iter_mut().enumerate().take(n).skip(1) {
                let fresh = (&theta_integer(k) * &base).shift(n - k - 1);
                *slot = &(&carry * &prev[k]) + &fresh;
            }
        }
        rows.push(WTable {
            model: Model::Mallows,
            n,
            entries,
        });
    }
    rows
}

pub fn mallows_w_recurrence(n: usize) -> Result<WTable, PositionalError> {
    if n == 0 {
        return Err(PositionalError::EmptyGame);
    }
    Ok(mallows_w_rows(n).pop().expect("n ≥ 1"))
}

/// `W(N,k) = θ^{N−k−1}·[N−1]!·Σ_{i=k}^{N−1} [k]/[i]` for `0 < k < N`, with
/// `θ^{N−1}[N−1]!` at `k = 0` and `0` at `k = N`. Each `[N−1]!/[i]` is an
/// exact polynomial quotient.
pub fn mallows_w_closed(n: usize, k: usize) -> Result<ThetaPoly, PositionalError> {
    if n == 0 {
        return Err(PositionalError::EmptyGame);
    }
    if k > n {
        return Err(PositionalError::KOutOfRange { n, k });
    }
    if k == 0 {
        return Ok(theta_factorial(n - 1).shift(n - 1));
    }
    if k == n {
        return Ok(ThetaPoly::zero());
    }
    let fact = theta_factorial(n - 1);
    let sum: ThetaPoly = (k..n)
        .map(|i| {
            fact.exact_div(&theta_integer(i))
                .expect("[i] divides [N-1]! for i ≤ N-1")
        })
        .sum();
    Ok((&theta_integer(k) * &sum).shift(n - k - 1))
}

pub fn mallows_w_closed_table(n: usize) -> Result<WTable, PositionalError> {
    let entries = (0..=n)
        .map(|k| mallows_w_closed(n, k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WTable {
        model: Model::Mallows,
        n,
        entries,
    })
}

pub fn mallows_delta_w(n: usize, k: usize) -> Result<ThetaPoly, PositionalError> {
    if n == 0 {
        return Err(PositionalError::EmptyGame);
    }
    if k >= n {
        return Err(PositionalError::KOutOfRange { n, k });
    }
    Ok(mallows_w_recurrence(n)?.delta(k))
}

/// Exact Mallows profile, evaluated without building the polynomials:
/// `W(N,k)/[N]! = θ^{N−k−1}·([k]/[N])·Σ_{i=k}^{N−1} 1/[i]` for `k ≥ 1` and
/// `θ^{N−1}/[N]` for `k = 0`. All comparisons are exact.
pub fn mallows_kappa(n: usize, theta: &BigRat) -> Result<StrategyProfile, PositionalError> {
    if n == 0 {
        return Err(PositionalError::EmptyGame);
    }
    check_theta(theta)?;
    // ints[i] = [i]_θ evaluated at θ
    let mut ints = Vec::with_capacity(n + 1);
    ints.push(BigRat::zero());
    for i in 1..=n {
        let next = BigRat::one() + theta * &ints[i - 1];
        ints.push(next);
    }
    let mut powers = Vec::with_capacity(n);
    powers.push(BigRat::one());
    for i in 1..n {
        let next = &powers[i - 1] * theta;
        powers.push(next);
    }
    let top = &ints[n];
    let mut win = vec![BigRat::zero(); n];
    let mut tail = BigRat::zero();
    for k in (1..n).rev() {
        tail += ints[k].recip();
        win[k] = &powers[n - k - 1] * &ints[k] / top * &tail;
    }
    win[0] = &powers[n - 1] / top;
    Ok(StrategyProfile::from_values(
        Model::Mallows,
        n,
        theta.clone(),
        win,
    ))
}

/// Integer form of θ = a/b and the numerators `A_i` of `[i]_θ = A_i / b^{i−1}`.
struct ThetaIntegers {
    a: BigInt,
    b: BigInt,
    /// `numer[i] = A_i`, `numer[0] = 0`.
    numer: Vec<BigInt>,
    /// `b_pow[i] = b^i`.
    b_pow: Vec<BigInt>,
}

impl ThetaIntegers {
    fn new(n: usize, theta: &BigRat) -> Self {
        let a = theta.numer().clone();
        let b = theta.denom().clone();
        let mut b_pow = vec![BigInt::one()];
        let mut numer = vec![BigInt::zero(), BigInt::one()];
        for i in 1..=n {
            b_pow.push(&b_pow[i - 1] * &b);
            if i < n {
                // A_{i+1} = b^i + a·A_i
                let next = &b_pow[i] + &a * &numer[i];
                numer.push(next);
            }
        }
        ThetaIntegers { a, b, numer, b_pow }
    }

    /// `(k, num, den)` with `S_k = Σ_{i=k}^{N−1} 1/[i]_θ = num/den` unreduced,
    /// `den > 0`, for `k = N−1` down to `1`.
    fn tails(&self, n: usize) -> impl Iterator<Item = (usize, BigInt, BigInt)> + '_ {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        (1..n).rev().map(move |i| {
            // 1/[i] = b^{i−1} / A_i
            num = &num * &self.numer[i] + &self.b_pow[i - 1] * &den;
            den = &den * &self.numer[i];
            (i, num.clone(), den.clone())
        })
    }
}

/// Smallest optimal k for the Mallows game, without building the profile.
///
/// `win(k+1) − win(k) = θ^{N−k−2}·(S_{k+1} − θ)/[N]_θ` with `S_k` decreasing,
/// so κ is the least k with `S_{k+1} ≤ θ`. The partial sums are kept as
/// unreduced integer fractions; only sign tests are needed.
pub fn mallows_optimal_k(n: usize, theta: &BigRat) -> Result<usize, PositionalError> {
    if n == 0 {
        return Err(PositionalError::EmptyGame);
    }
    check_theta(theta)?;
    let ints = ThetaIntegers::new(n, theta);
    // S_N = 0 ≤ θ, so k = N−1 always satisfies the condition.
    let mut kappa = n - 1;
    for (i, num, den) in ints.tails(n) {
        // S_i ≤ θ  ⇔  num·b ≤ a·den
        if num * &ints.b <= &ints.a * den {
            kappa = i - 1;
        } else {
            break;
        }
    }
    Ok(kappa)
}

/// Exact Mallows win probability of the positional strategy k, reduced once.
pub fn mallows_win(n: usize, k: usize, theta: &BigRat) -> Result<BigRat, PositionalError> {
    if n == 0 {
        return Err(PositionalError::EmptyGame);
    }
    if k > n {
        return Err(PositionalError::KOutOfRange { n, k });
    }
    check_theta(theta)?;
    if k == n {
        return Ok(BigRat::zero());
    }
    let ints = ThetaIntegers::new(n, theta);
    let a_pow = |e: usize| num_traits::pow(ints.a.clone(), e);
    // [N]_θ = A_N / b^{N−1}
    let top_num = &ints.b_pow[n - 1] + &ints.a * &ints.numer[n - 1];
    let top = BigRat::new(top_num, ints.b_pow[n - 1].clone());
    if k == 0 {
        return Ok(BigRat::new(a_pow(n - 1), ints.b_pow[n - 1].clone()) / top);
    }
    let (_, s_num, s_den) = ints
        .tails(n)
        .find(|(i, _, _)| *i == k)
        .expect("1 ≤ k ≤ N−1");
    // θ^{N−k−1}·[k]·S_k
    let num = a_pow(n - k - 1) * &ints.numer[k] * s_num;
    let den = ints.b_pow[n - k - 1].clone() * &ints.b_pow[k - 1] * s_den;
    Ok(BigRat::new(num, den) / top)
}

/// Exact profile for either model.
pub fn profile(model: Model, n: usize, theta: &BigRat) -> Result<StrategyProfile, PositionalError> {
    match model {
        Model::Ewens => ewens_profile(n, theta),
        Model::Mallows => mallows_kappa(n, theta),
    }
}

pub fn w_rows(model: Model, n_max: usize) -> Vec<WTable> {
    match model {
        Model::Ewens => ewens_w_rows(n_max),
        Model::Mallows => mallows_w_rows(n_max),
    }
}

fn coeff_cell(c: &BigRat) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// CSV with header `N,k,coeff0,…` and one row per `(N, k)`, `k < N`,
/// zero-padded to a common width.
pub fn w_table_csv(tables: &[WTable]) -> String {
    let width = tables
        .iter()
        .flat_map(|t| t.entries.iter())
        .filter_map(ThetaPoly::degree)
        .max()
        .map_or(1, |d| d + 1);
    let mut out = String::from("N,k");
    for i in 0..width {
        write!(out, ",coeff{i}").unwrap();
    }
    out.push('\n');
    for t in tables {
        for k in 0..t.n {
            write!(out, "{},{}", t.n, k).unwrap();
            let p = t.get(k);
            for i in 0..width {
                write!(out, ",{}", coeff_cell(&p.coeff(i))).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

/// One row of the Ewens critical-root table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalRootRow {
    pub n: usize,
    pub k: usize,
    pub root: BigRat,
    /// The interval ending at this root holds θ = 1, i.e. `k = κ_N(1)`.
    pub starred: bool,
}

pub fn critical_root_rows(n_max: usize) -> Vec<CriticalRootRow> {
    let one = BigRat::one();
    let mut rows = Vec::new();
    for n in 2..=n_max {
        let classical = ewens_kappa(n, &one).expect("valid");
        for k in 0..=n - 2 {
            rows.push(CriticalRootRow {
                n,
                k,
                root: ewens_critical_root(n, k).expect("k ≤ N-2"),
                starred: k == classical,
            });
        }
    }
    rows
}

/// CSV `N,k,num,den,starred` for `N = 2..=n_max`.
pub fn roots_csv(n_max: usize) -> String {
    let mut out = String::from("N,k,num,den,starred\n");
    for r in critical_root_rows(n_max) {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            r.k,
            r.root.numer(),
            r.root.denom(),
            if r.starred { "starred" } else { "" }
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;

    fn poly(c: &[i64]) -> ThetaPoly {
        ThetaPoly::from_integers(c)
    }

    #[test]
    fn ewens_row_four() {
        let t = ewens_w_recurrence(4).unwrap();
        assert_eq!(t.get(0), &poly(&[0, 6]));
        assert_eq!(t.get(1), &poly(&[0, 0, 11]));
        assert_eq!(t.get(2), &poly(&[0, 0, 5, 5]));
        assert_eq!(t.get(3), &poly(&[0, 0, 2, 3, 1]));
        assert!(t.get(4).is_zero());
        assert_eq!(t.get(1).eval(&rat(1)), rat(11));
    }

    #[test]
    fn ewens_selected_entries() {
        assert_eq!(
            ewens_w_recurrence(6).unwrap().get(3),
            &poly(&[0, 0, 94, 141, 47])
        );
        assert_eq!(ewens_w_closed(5, 2).unwrap(), poly(&[0, 0, 26, 26]));
        for n in 2..10 {
            let expected = &ThetaPoly::theta() * &rising_factorial(n - 1);
            assert_eq!(ewens_w_closed(n, n - 1).unwrap(), expected);
        }
    }

    #[test]
    fn ewens_recurrence_matches_closed_form() {
        for t in ewens_w_rows(10) {
            for k in 0..=t.n {
                assert_eq!(
                    t.get(k),
                    &ewens_w_closed(t.n, k).unwrap(),
                    "N={} k={k}",
                    t.n
                );
            }
        }
    }

    #[test]
    fn ewens_tables_have_nonnegative_coefficients_divisible_by_theta() {
        for t in ewens_w_rows(8) {
            assert!(t.get(t.n).is_zero());
            for p in &t.entries {
                assert!(p.coeffs().iter().all(|c| !c.is_negative()));
                assert!(p.coeff(0).is_zero());
            }
        }
    }

    #[test]
    fn critical_roots_from_table() {
        assert_eq!(ewens_critical_root(8, 3).unwrap(), ratio(420, 319));
        assert_eq!(ewens_critical_root(10, 0).unwrap(), ratio(2520, 7129));
        assert_eq!(ewens_critical_root(4, 0).unwrap(), ratio(6, 11));
        assert!(ewens_critical_root(4, 3).is_err());
        for n in 2..=10 {
            for k in 0..=n - 2 {
                let r = ewens_critical_root(n, k).unwrap();
                assert!(ewens_delta_w(n, k).unwrap().eval(&r).is_zero());
            }
        }
    }

    #[test]
    fn delta_w_factorization() {
        for n in 2..=9 {
            for k in 0..n {
                assert_eq!(
                    ewens_delta_w(n, k).unwrap(),
                    ewens_delta_w_factored(n, k).unwrap(),
                    "N={n} k={k}"
                );
            }
            let expected = (&ThetaPoly::from_integers(&[-(n as i64 - 1), 1]) * &ThetaPoly::theta())
                * rising_factorial(n - 2);
            assert_eq!(ewens_delta_w(n, n - 2).unwrap(), expected);
        }
        assert_eq!(ewens_delta_w(4, 0).unwrap().eval(&rat(1)), rat(5));
    }

    #[test]
    fn ewens_strategy_function() {
        assert_eq!(ewens_kappa(7, &rat(1)).unwrap(), 2);
        assert_eq!(ewens_kappa(7, &ratio(61, 10)).unwrap(), 6);
        assert_eq!(ewens_kappa(7, &rat(6)).unwrap(), 5);
        assert_eq!(ewens_kappa(1, &rat(3)).unwrap(), 0);
        // at a root the smaller k is chosen
        assert_eq!(ewens_kappa(4, &ratio(6, 11)).unwrap(), 0);
        assert_eq!(ewens_kappa(4, &ratio(6, 5)).unwrap(), 1);
        assert_eq!(
            ewens_kappa(4, &rat(0)),
            Err(PositionalError::NonPositiveTheta)
        );
    }

    #[test]
    fn ewens_kappa_is_profile_argmax() {
        for n in 1..=10 {
            for num in 1..=40 {
                let theta = ratio(num, 7);
                let profile = ewens_profile(n, &theta).unwrap();
                assert_eq!(
                    profile.kappa,
                    ewens_kappa(n, &theta).unwrap(),
                    "N={n} θ={theta}"
                );
            }
        }
    }

    #[test]
    fn ewens_profile_matches_tables() {
        let theta = ratio(6, 5);
        let t = ewens_w_recurrence(7).unwrap();
        let z = rising_factorial(7).eval(&theta);
        let p = ewens_profile(7, &theta).unwrap();
        for k in 0..7 {
            assert_eq!(p.win_by_k[k], t.get(k).eval(&theta) / &z);
        }
    }

    #[test]
    fn mallows_recurrence_matches_closed_form() {
        for t in mallows_w_rows(9) {
            for k in 0..=t.n {
                assert_eq!(
                    t.get(k),
                    &mallows_w_closed(t.n, k).unwrap(),
                    "N={} k={k}",
                    t.n
                );
            }
        }
    }

    #[test]
    fn mallows_edge_columns() {
        for t in mallows_w_rows(8) {
            let n = t.n;
            assert_eq!(t.get(0), &theta_factorial(n - 1).shift(n - 1));
            if n >= 2 {
                assert_eq!(t.get(n - 1), &theta_factorial(n - 1));
            }
            assert!(t.get(n).is_zero());
        }
        assert_eq!(
            mallows_w_recurrence(4).unwrap().get(1).eval(&rat(1)),
            rat(11)
        );
    }

    #[test]
    fn mallows_profile_matches_tables() {
        for theta in [ratio(1, 2), rat(1), ratio(7, 3)] {
            for t in mallows_w_rows(7) {
                let z = theta_factorial(t.n).eval(&theta);
                let p = mallows_kappa(t.n, &theta).unwrap();
                for k in 0..t.n {
                    assert_eq!(p.win_by_k[k], t.get(k).eval(&theta) / &z);
                }
            }
        }
    }

    #[test]
    fn models_agree_at_theta_one() {
        for n in 1..=12 {
            let e = ewens_profile(n, &rat(1)).unwrap();
            let m = mallows_kappa(n, &rat(1)).unwrap();
            assert_eq!(e.win_by_k, m.win_by_k);
        }
        assert_eq!(mallows_kappa(10, &rat(1)).unwrap().kappa, 3);
    }

    #[test]
    fn mallows_small_theta_is_right_justified() {
        let p = mallows_kappa(20, &ratio(1, 4)).unwrap();
        assert_eq!(p.kappa, 19);
    }

    #[test]
    fn mallows_large_theta_kappa_stabilizes() {
        let ks: Vec<usize> = (15..=25)
            .map(|n| mallows_kappa(n, &rat(2)).unwrap().kappa)
            .collect();
        assert!(ks.windows(2).all(|w| w[0] == w[1]), "{ks:?}");
    }

    #[test]
    fn mallows_fast_paths_match_profile() {
        for theta in [
            ratio(1, 3),
            ratio(1, 2),
            rat(1),
            ratio(6, 5),
            rat(2),
            rat(3),
            ratio(21, 20),
        ] {
            for n in 1..=16 {
                let p = mallows_kappa(n, &theta).unwrap();
                assert_eq!(
                    mallows_optimal_k(n, &theta).unwrap(),
                    p.kappa,
                    "N={n} θ={theta}"
                );
                for k in 0..=n {
                    let expected = p.win_by_k.get(k).cloned().unwrap_or_else(BigRat::zero);
                    assert_eq!(mallows_win(n, k, &theta).unwrap(), expected);
                }
            }
        }
    }

    #[test]
    fn roots_csv_rows() {
        let csv = roots_csv(8);
        assert!(csv.lines().any(|l| l == "8,3,420,319,starred"));
        assert!(csv.lines().any(|l| l == "4,0,6,11,"));
        assert!(csv.starts_with("N,k,num,den,starred\n"));
    }

    #[test]
    fn w_csv_rows() {
        let csv = w_table_csv(&ewens_w_rows(4));
        assert!(csv.lines().any(|l| l == "4,3,0,0,2,3,1"));
        assert!(csv.lines().any(|l| l == "1,0,0,1,0,0,0"));
    }

    #[test]
    fn model_parsing() {
        assert_eq!("Ewens".parse::<Model>().unwrap(), Model::Ewens);
        assert!("uniform".parse::<Model>().is_err());
    }
}
